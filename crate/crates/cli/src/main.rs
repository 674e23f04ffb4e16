//! `tntc` — AC contingency analysis with sensitivity-ranked corrective switching.
//!
//! Exit status: 0 completed, 1 input error, 2 base case failed, 3 internal error.

use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use tntc::pipeline::{run_pipeline, Mode, RunConfig};
use tntc::report::{emit_report, OutputFormat};
use tntc::tntc::RankingMethod;

const INPUT_ERROR: u8 = 1;
const INTERNAL_ERROR: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "tntc", version, about)]
struct Args {
    /// MATPOWER case file.
    #[arg(long)]
    case: PathBuf,

    /// powerflow, rtca or tntc.
    #[arg(long, default_value = "tntc")]
    mode: Mode,

    /// Ranking method, repeatable: tsdf:N, ftdf:N or ce.
    #[arg(long = "method")]
    methods: Vec<RankingMethod>,

    /// Solutions kept per critical contingency.
    #[arg(long, default_value_t = 5)]
    top_k: usize,

    /// Newton mismatch tolerance, p.u.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,

    #[arg(long, default_value_t = 30)]
    max_iter: usize,

    /// Reactive-limit enforcement passes; 0 ignores generator Q limits.
    #[arg(long, default_value_t = 5)]
    qlim_passes: usize,

    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,

    /// human, delimited or structured.
    #[arg(long, default_value = "human")]
    format: OutputFormat,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Rank only lines, never transformers.
    #[arg(long)]
    lines_only: bool,

    /// Write every computed switching factor to this CSV file.
    #[arg(long)]
    dump_factors: Option<PathBuf>,
}

impl Args {
    fn into_config(self) -> RunConfig {
        let mut cfg = RunConfig::new(self.case, self.mode);
        cfg.methods = self.methods;
        cfg.top_k = self.top_k;
        cfg.solver.tol = self.tol;
        cfg.solver.max_iter = self.max_iter;
        cfg.solver.qlim_passes = self.qlim_passes;
        cfg.workers = self.workers;
        cfg.output_format = self.format;
        cfg.output_path = self.out;
        cfg.lines_only = self.lines_only;
        cfg.dump_factors = self.dump_factors;
        cfg
    }
}

fn run(args: Args) -> Result<(), tntc::Error> {
    let cfg = args.into_config();
    let report = run_pipeline(&cfg)?;
    emit_report(&report, cfg.output_format, cfg.output_path.as_deref())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(INPUT_ERROR),
            };
        }
    };
    match panic::catch_unwind(|| run(args)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("tntc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(INTERNAL_ERROR),
    }
}
