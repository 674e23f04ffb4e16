//! Run report and its human, delimited and structured renderings.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{BaseCaseSummary, RunConfig, StageTiming};
use crate::rtca::RtcaReport;
use crate::tntc::TntcSummary;

/// Bumped whenever the structured layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Human,
    Delimited,
    Structured,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "human" | "text" => Ok(OutputFormat::Human),
            "delimited" | "csv" => Ok(OutputFormat::Delimited),
            "structured" | "json" => Ok(OutputFormat::Structured),
            _ => Err(Error::Config(format!("unknown output format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub base_case: BaseCaseSummary,
    pub contingency_count: Option<usize>,
    pub rtca: Option<RtcaReport>,
    pub tntc: Vec<TntcSummary>,
    pub stages: Vec<StageTiming>,
}

impl RunReport {
    /// Copy with every wall-clock figure zeroed, for run-to-run comparison.
    pub fn without_timings(&self) -> RunReport {
        let mut r = self.clone();
        for s in &mut r.stages {
            s.seconds = 0.0;
        }
        if let Some(rtca) = &mut r.rtca {
            rtca.timing = Default::default();
            for c in &mut rtca.results {
                c.elapsed_seconds = 0.0;
            }
        }
        for t in &mut r.tntc {
            t.solution_seconds = 0.0;
            for o in &mut t.outcomes {
                o.elapsed_seconds = 0.0;
            }
        }
        r
    }
}

pub fn render(report: &RunReport, format: OutputFormat) -> Result<String> {
    Ok(match format {
        OutputFormat::Human => render_human(report),
        OutputFormat::Delimited => render_delimited(report),
        OutputFormat::Structured => serde_json::to_string_pretty(report)? + "\n",
    })
}

/// Writes the report to `path`, or to stdout when no path is given.
pub fn emit_report(report: &RunReport, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let text = render(report, format)?;
    match path {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

pub fn read_structured(text: &str) -> Result<RunReport> {
    Ok(serde_json::from_str(text)?)
}

fn pct(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

pub fn render_human(r: &RunReport) -> String {
    let mut s = String::new();
    let b = &r.base_case;
    let _ = writeln!(s, "Case {}: {} buses, {} branches, {} generators", b.case_name, b.buses, b.branches, b.generators);
    let _ = writeln!(
        s,
        "Base case: converged in {} iterations (mismatch {:.2e} p.u.), load {:.1} MW, losses {:.1} MW, slack {:.1} MW",
        b.iterations, b.max_mismatch, b.load_mw, b.losses_mw, b.slack_p_mw
    );
    let _ = writeln!(
        s,
        "Base-case overloads: {} above normal rating, {} above emergency rating; {} buses outside voltage band; {} buses at reactive limits",
        b.normal_violations.len(),
        b.emergency_violations.len(),
        b.voltage_violations,
        b.q_limited_buses
    );

    if let Some(rtca) = &r.rtca {
        let gens = rtca.results.iter().filter(|c| c.contingency.kind() == "generator").count();
        let _ = writeln!(
            s,
            "\nContingency analysis: {} generator + {} branch contingencies, {:.2} s + {:.2} s, {} unsolved",
            gens,
            rtca.results.len() - gens,
            rtca.timing.generator_seconds,
            rtca.timing.branch_seconds,
            rtca.unsolved.len()
        );
        let _ = writeln!(s, "\nCritical contingencies ({}):", rtca.critical.len());
        let _ = writeln!(
            s,
            "{:<16} {:>10} {:>12} {:>14} {:>12} {:>10}",
            "contingency", "overloads", "total (MVA)", "worst branch", "worst (MVA)", "relative"
        );
        for res in rtca.critical_results() {
            let w = res.violations.worst().expect("critical contingencies have a violation");
            let _ = writeln!(
                s,
                "{:<16} {:>10} {:>12.1} {:>14} {:>12.1} {:>9.1}%",
                res.contingency.label(),
                res.violations.len(),
                res.violations.total_excess,
                w.branch.to_string(),
                w.excess,
                w.relative_percent()
            );
        }
        let st = &rtca.stats;
        let _ = writeln!(s, "\nFlow violation statistics (MVA):");
        let _ = writeln!(s, "{:>6} {:>8} {:>8} {:>8} {:>8} {:>8}", "count", "max", "min", "mean", "median", "stddev");
        let _ = writeln!(
            s,
            "{:>6} {:>8.1} {:>8.1} {:>8.1} {:>8.1} {:>8.1}",
            st.count, st.max, st.min, st.mean, st.median, st.stddev
        );
    }

    for t in &r.tntc {
        let _ = writeln!(s, "\nViolation reduction in percent with TNTC solutions ({}):", t.method);
        let mut header = format!("{:<16}", "contingency");
        for rank in 1..=t.top_k {
            let _ = write!(header, " {:>18}", format!("solution {rank}"));
        }
        let _ = writeln!(s, "{header}");
        for o in &t.outcomes {
            let mut row = format!("{:<16}", o.contingency.label());
            for rank in 0..t.top_k {
                let cell = o
                    .solutions
                    .get(rank)
                    .map_or("-".to_string(), |e| format!("{} (Brc:{})", pct(e.vrp), e.switch_branch));
                let _ = write!(row, " {cell:>18}");
            }
            let _ = writeln!(s, "{row}");
        }
        let _ = writeln!(
            s,
            "epsilon {}  mu {:.2}  n1 {}  n2 {}  n3 {}  time {:.3} s",
            pct(t.epsilon),
            t.mu,
            t.n1,
            t.n2,
            t.n3,
            t.solution_seconds
        );
        let _ = writeln!(s, "{:<6} {:>14} {:>10} {:>10}", "rank", "residual MVA", "avg VRP", "avg depth");
        for rank in 0..t.top_k {
            let depth = t.average_depth[rank].map_or("-".to_string(), |d| format!("{d:.1}"));
            let _ = writeln!(
                s,
                "{:<6} {:>14.1} {:>10} {:>10}",
                rank + 1,
                t.total_excess_after[rank],
                pct(t.average_vrp[rank]),
                depth
            );
        }
    }

    let _ = writeln!(s, "\nStage timings:");
    for st in &r.stages {
        let name = match &st.label {
            Some(l) => format!("{:?} {l}", st.stage),
            None => format!("{:?}", st.stage),
        };
        let _ = writeln!(s, "  {name:<16} {:.3} s", st.seconds);
    }
    s
}

/// Comma-separated sections, each with its own header row, separated by a blank line.
pub fn render_delimited(r: &RunReport) -> String {
    let mut s = String::new();
    if let Some(rtca) = &r.rtca {
        s.push_str("kind,element,solved,total_excess_mva,worst_branch,worst_excess_mva,relative_pct,ms\n");
        for c in &rtca.results {
            let (wb, we, rel) = match c.violations.worst() {
                Some(w) => (w.branch.to_string(), format!("{:.4}", w.excess), format!("{:.4}", w.relative_percent())),
                None => (String::new(), String::new(), String::new()),
            };
            let _ = writeln!(
                s,
                "{},{},{},{:.4},{},{},{},{:.3}",
                c.contingency.kind(),
                c.contingency.element_id(),
                c.solved,
                c.violations.total_excess,
                wb,
                we,
                rel,
                c.elapsed_seconds * 1e3
            );
        }
    }
    if !r.tntc.is_empty() {
        if !s.is_empty() {
            s.push('\n');
        }
        s.push_str("method,contingency,rank,branch,vrp,residual_mva,depth,pareto\n");
        for t in &r.tntc {
            for o in &t.outcomes {
                for (i, e) in o.solutions.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{:.6},{:.4},{},{}",
                        t.method,
                        o.contingency.label(),
                        i + 1,
                        e.switch_branch,
                        e.vrp,
                        e.total_excess_after,
                        e.depth,
                        e.pareto
                    );
                }
            }
        }
    }
    if s.is_empty() {
        let b = &r.base_case;
        s.push_str("case,buses,branches,generators,converged,iterations,load_mw,losses_mw,slack_mw\n");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:.4},{:.4},{:.4}",
            b.case_name, b.buses, b.branches, b.generators, b.converged, b.iterations, b.load_mw, b.losses_mw, b.slack_p_mw
        );
    }
    s
}
