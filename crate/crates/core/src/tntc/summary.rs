use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{find_beneficial, rank_candidates_with_factors, ContingencyOutcome, RankingMethod, TntcOptions};
use crate::acpf::{PowerFlow, SolverParams};
use crate::error::Result;
use crate::network::NetworkCase;
use crate::rtca::RtcaReport;
use crate::sensitivity::SensitivityRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TntcSummary {
    pub method: RankingMethod,
    pub top_k: usize,
    pub outcomes: Vec<ContingencyOutcome>,
    /// Mean best-solution VRP over critical contingencies (0 for those without one).
    pub epsilon: f64,
    /// Mean number of candidates per contingency that clear every overload.
    pub mu: f64,
    /// Contingencies fully relieved / partially relieved / not helped.
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    /// Index r-1: residual total excess, MVA, when every contingency applies its
    /// r-th best solution (or stays unswitched if it has none).
    pub total_excess_after: Vec<f64>,
    /// Index r-1: mean VRP of the r-th best solution, 0 where missing.
    pub average_vrp: Vec<f64>,
    /// Index r-1: mean depth over contingencies that have an r-th solution.
    pub average_depth: Vec<Option<f64>>,
    pub solution_seconds: f64,
}

pub fn compute_summary(
    outcomes: Vec<ContingencyOutcome>,
    method: RankingMethod,
    top_k: usize,
    solution_seconds: f64,
) -> TntcSummary {
    let nc = outcomes.len();
    let mean = |total: f64| if nc == 0 { 0.0 } else { total / nc as f64 };
    let epsilon = mean(outcomes.iter().map(|o| o.best_vrp()).sum());
    let mu = mean(outcomes.iter().map(|o| o.full_eliminations as f64).sum());
    let n1 = outcomes
        .iter()
        .filter(|o| o.solutions.first().is_some_and(|s| s.post_violations.is_empty()))
        .count();
    let n3 = outcomes.iter().filter(|o| o.solutions.is_empty()).count();
    let n2 = nc - n1 - n3;

    let mut total_excess_after = Vec::with_capacity(top_k);
    let mut average_vrp = Vec::with_capacity(top_k);
    let mut average_depth = Vec::with_capacity(top_k);
    for r in 0..top_k {
        total_excess_after.push(
            outcomes
                .iter()
                .map(|o| o.solutions.get(r).map_or(o.pre_total_excess, |s| s.total_excess_after))
                .sum(),
        );
        average_vrp.push(mean(outcomes.iter().filter_map(|o| o.solutions.get(r)).map(|s| s.vrp).sum()));
        let depths: Vec<f64> = outcomes
            .iter()
            .filter_map(|o| o.solutions.get(r))
            .map(|s| s.depth as f64)
            .collect();
        average_depth.push((!depths.is_empty()).then(|| depths.iter().sum::<f64>() / depths.len() as f64));
    }

    TntcSummary {
        method,
        top_k,
        outcomes,
        epsilon,
        mu,
        n1,
        n2,
        n3,
        total_excess_after,
        average_vrp,
        average_depth,
        solution_seconds,
    }
}

/// Ranks, evaluates and summarizes every critical contingency of `rtca` with
/// one method. Factor records are appended to `records` when given.
pub fn run_tntc(
    case: &NetworkCase,
    rtca: &RtcaReport,
    method: RankingMethod,
    options: &TntcOptions,
    params: &SolverParams,
    workers: usize,
    mut records: Option<&mut Vec<SensitivityRecord>>,
) -> Result<TntcSummary> {
    let started = Instant::now();
    let pf = PowerFlow::new(case);
    let mut outcomes = Vec::with_capacity(rtca.critical.len());
    for result in rtca.critical_results() {
        let t = Instant::now();
        let candidates = rank_candidates_with_factors(case, result, method, options, records.as_deref_mut())?;
        let mut outcome = find_beneficial(&pf, result, candidates, options, params, workers);
        outcome.elapsed_seconds = t.elapsed().as_secs_f64();
        outcomes.push(outcome);
    }
    Ok(compute_summary(outcomes, method, options.top_k, started.elapsed().as_secs_f64()))
}
