//! End-to-end run: base case, contingency scan, switching per critical contingency.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acpf::{check_limits, check_voltage_limits, PowerFlow, SolverParams, ViolationSet};
use crate::error::{Error, Result};
use crate::network::{parse_case, NetworkCase, RatingTier, TopologyMask};
use crate::par;
use crate::report::{OutputFormat, RunReport, SCHEMA_VERSION};
use crate::rtca::{build_contingency_list, run_rtca, RtcaReport};
use crate::sensitivity::{write_factor_table, SensitivityRecord};
use crate::tntc::{run_tntc, RankingMethod, TntcOptions, TntcSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Powerflow,
    Rtca,
    Tntc,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "powerflow" | "pf" => Ok(Mode::Powerflow),
            "rtca" => Ok(Mode::Rtca),
            "tntc" => Ok(Mode::Tntc),
            _ => Err(Error::Config(format!("unknown mode '{s}'"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Powerflow => "powerflow",
            Mode::Rtca => "rtca",
            Mode::Tntc => "tntc",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub case_path: PathBuf,
    pub mode: Mode,
    pub methods: Vec<RankingMethod>,
    pub top_k: usize,
    pub solver: SolverParams,
    /// 0 = one per core.
    pub workers: usize,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub lines_only: bool,
    /// Where to write the (c, m, k) factor table, if anywhere.
    pub dump_factors: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(case_path: impl Into<PathBuf>, mode: Mode) -> Self {
        RunConfig {
            case_path: case_path.into(),
            mode,
            methods: Vec::new(),
            top_k: 5,
            solver: SolverParams::default(),
            workers: par::ALL_CORES,
            output_format: OutputFormat::Human,
            output_path: None,
            lines_only: false,
            dump_factors: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.top_k == 0 {
            return Err(Error::Config("top-k must be at least 1".into()));
        }
        if self.mode == Mode::Tntc && self.methods.is_empty() {
            return Err(Error::Config("tntc mode needs at least one --method".into()));
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn tntc_options(&self) -> TntcOptions {
        TntcOptions {
            top_k: self.top_k,
            lines_only: self.lines_only,
            ..TntcOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Load,
    BaseCase,
    Rtca,
    Tntc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    /// Method label for switching stages.
    pub label: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseCaseSummary {
    pub case_name: String,
    pub buses: usize,
    pub branches: usize,
    pub generators: usize,
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch: f64,
    pub load_mw: f64,
    pub generation_mw: f64,
    pub losses_mw: f64,
    pub slack_p_mw: f64,
    pub q_limited_buses: usize,
    pub normal_violations: ViolationSet,
    pub emergency_violations: ViolationSet,
    pub voltage_violations: usize,
}

/// Reads and parses a case file.
pub fn load_case(path: &Path) -> Result<NetworkCase> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_case(&text)
}

/// Loads the configured case and runs it.
pub fn run_pipeline(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let t = Instant::now();
    let case = load_case(&config.case_path)?;
    let load = StageTiming {
        stage: Stage::Load,
        label: None,
        seconds: t.elapsed().as_secs_f64(),
    };
    let mut report = run_pipeline_on(&case, config)?;
    report.stages.insert(0, load);
    Ok(report)
}

/// Runs the stages selected by `config.mode` on an already loaded case.
pub fn run_pipeline_on(case: &NetworkCase, config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let mut stages = Vec::new();

    let t = Instant::now();
    let pf = PowerFlow::new(case);
    let base = pf.solve(&TopologyMask::empty(), None, &config.solver)?;
    stages.push(StageTiming {
        stage: Stage::BaseCase,
        label: None,
        seconds: t.elapsed().as_secs_f64(),
    });
    if !base.converged {
        return Err(Error::BaseCaseDiverged(
            base.diagnostic.clone().unwrap_or_else(|| "base case did not converge".into()),
        ));
    }
    let load_mw: f64 = case.buses().iter().map(|b| b.active_load).sum();
    let losses_mw: f64 = base.branch_flows.iter().map(|f| f.losses_mw()).sum();
    let generation_mw = base.slack_p_mw
        + case
            .generators()
            .iter()
            .filter(|g| g.in_service)
            .filter(|g| case.bus_position(g.bus).is_some_and(|i| case.buses()[i].bus_type != crate::BusType::Slack))
            .map(|g| g.p_set)
            .sum::<f64>();
    let base_summary = BaseCaseSummary {
        case_name: case.name().to_string(),
        buses: case.bus_count(),
        branches: case.branches().len(),
        generators: case.generators().len(),
        converged: base.converged,
        iterations: base.iterations,
        max_mismatch: base.max_mismatch,
        load_mw,
        generation_mw,
        losses_mw,
        slack_p_mw: base.slack_p_mw,
        q_limited_buses: base.q_limited.len(),
        normal_violations: check_limits(&base.branch_flows, case, RatingTier::Normal),
        emergency_violations: check_limits(&base.branch_flows, case, RatingTier::Emergency),
        voltage_violations: check_voltage_limits(&base, case).len(),
    };

    let mut rtca: Option<RtcaReport> = None;
    let mut tntc: Vec<TntcSummary> = Vec::new();
    if config.mode != Mode::Powerflow {
        let t = Instant::now();
        let list = build_contingency_list(case);
        rtca = Some(run_rtca(case, &list, &base, &config.solver, config.workers)?);
        stages.push(StageTiming {
            stage: Stage::Rtca,
            label: None,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    if config.mode == Mode::Tntc {
        let scan = rtca.as_ref().expect("scan ran before switching");
        let options = config.tntc_options();
        let mut records: Vec<SensitivityRecord> = Vec::new();
        for &method in &config.methods {
            let t = Instant::now();
            let sink = config.dump_factors.as_ref().map(|_| &mut records);
            tntc.push(run_tntc(case, scan, method, &options, &config.solver, config.workers, sink)?);
            stages.push(StageTiming {
                stage: Stage::Tntc,
                label: Some(method.to_string()),
                seconds: t.elapsed().as_secs_f64(),
            });
        }
        if let Some(path) = &config.dump_factors {
            let file = fs::File::create(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            write_factor_table(&records, std::io::BufWriter::new(file)).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
    }

    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        base_case: base_summary,
        contingency_count: rtca.as_ref().map(|r| r.results.len()),
        rtca,
        tntc,
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::testing::triangle;

    #[test]
    fn tntc_without_methods_is_rejected() {
        let cfg = RunConfig::new("x.m", Mode::Tntc);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn powerflow_mode_runs_base_only() {
        let cfg = RunConfig::new("triangle.m", Mode::Powerflow);
        let report = run_pipeline_on(&triangle(0.1), &cfg).unwrap();
        assert!(report.rtca.is_none() && report.tntc.is_empty());
        assert_eq!(report.stages.len(), 1);
        assert!(report.base_case.converged);
    }

    #[test]
    fn rtca_mode_never_reaches_switching() {
        let mut cfg = RunConfig::new("triangle.m", Mode::Rtca);
        cfg.methods.push(RankingMethod::Ce);
        let report = run_pipeline_on(&triangle(0.1), &cfg).unwrap();
        assert!(report.rtca.is_some());
        assert!(report.tntc.is_empty());
        assert!(report.stages.iter().all(|s| s.stage != Stage::Tntc));
    }

    #[test]
    fn missing_file_names_the_path() {
        let cfg = RunConfig::new("/nonexistent/case.m", Mode::Powerflow);
        let err = run_pipeline(&cfg).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/case.m"));
        assert_eq!(err.exit_code(), 1);
    }
}
