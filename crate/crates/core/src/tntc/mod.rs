//! Corrective topology control: rank branches to open for each critical
//! contingency, evaluate them in AC, keep the Pareto improvements.

mod evaluate;
mod ranking;
mod summary;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use evaluate::{evaluate_switch, find_beneficial, pareto_check, ContingencyOutcome, SwitchEvaluation};
pub use ranking::{rank_candidates, rank_candidates_with_factors, CandidateEntry, CandidateList};
pub use summary::{compute_summary, run_tntc, TntcSummary};

/// Violation comparisons are made with this slack, MVA.
pub const PARETO_TOL: f64 = 0.01;

/// How switching candidates are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RankingMethod {
    /// N candidates by directed switching distribution factor.
    Tsdf(usize),
    /// N candidates by predicted MW relief.
    Ftdf(usize),
    /// Every switchable branch.
    Ce,
}

impl fmt::Display for RankingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankingMethod::Tsdf(n) => write!(f, "TSDF{n}"),
            RankingMethod::Ftdf(n) => write!(f, "FTDF{n}"),
            RankingMethod::Ce => write!(f, "CE"),
        }
    }
}

/// Accepts `tsdf:N`, `ftdf:N`, `ce`, and the display forms `TSDF20` etc.
impl FromStr for RankingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "ce" {
            return Ok(RankingMethod::Ce);
        }
        let (kind, n) = if let Some(rest) = lower.strip_prefix("tsdf") {
            ("tsdf", rest)
        } else if let Some(rest) = lower.strip_prefix("ftdf") {
            ("ftdf", rest)
        } else {
            return Err(Error::Config(format!("unknown ranking method '{s}'")));
        };
        let n: usize = n
            .trim_start_matches(':')
            .parse()
            .map_err(|_| Error::Config(format!("bad list size in '{s}'")))?;
        if n == 0 {
            return Err(Error::Config(format!("list size must be at least 1 in '{s}'")));
        }
        Ok(if kind == "tsdf" {
            RankingMethod::Tsdf(n)
        } else {
            RankingMethod::Ftdf(n)
        })
    }
}

impl TryFrom<String> for RankingMethod {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<RankingMethod> for String {
    fn from(m: RankingMethod) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TntcOptions {
    /// Solutions kept per contingency.
    pub top_k: usize,
    pub tol: f64,
    /// Restrict candidates to lines, leaving transformers closed.
    pub lines_only: bool,
}

impl Default for TntcOptions {
    fn default() -> Self {
        TntcOptions {
            top_k: 5,
            tol: PARETO_TOL,
            lines_only: false,
        }
    }
}
