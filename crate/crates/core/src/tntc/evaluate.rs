use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{CandidateList, TntcOptions};
use crate::acpf::{check_limits, PowerFlow, SolverParams, ViolationSet};
use crate::network::{BranchId, RatingTier};
use crate::par;
use crate::rtca::{Contingency, ContingencyResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvaluation {
    pub contingency: Contingency,
    pub switch_branch: BranchId,
    pub solved: bool,
    pub post_violations: ViolationSet,
    pub pareto: bool,
    /// Per originally overloaded branch: share of its excess removed.
    pub line_vrp: Vec<(BranchId, f64)>,
    /// Share of the total excess removed; 0 unless Pareto-admissible.
    pub vrp: f64,
    pub total_excess_after: f64,
    /// Post-switching MVA loading of each originally overloaded branch.
    pub monitored_loading: Vec<(BranchId, f64)>,
    /// 1-based rank of the switch in its candidate list.
    pub depth: usize,
}

impl SwitchEvaluation {
    pub fn eliminates_all(&self) -> bool {
        self.pareto && self.post_violations.is_empty()
    }
}

/// Whether `post` is a Pareto improvement over `pre`: less total excess, no
/// new overloads, and no existing overload made worse (all within `tol` MVA).
pub fn pareto_check(pre: &ViolationSet, post: &ViolationSet, tol: f64) -> bool {
    let reduced = post.total_excess <= pre.total_excess - tol || (post.is_empty() && pre.total_excess > 0.0);
    reduced
        && post.entries.iter().all(|v| match pre.get(v.branch) {
            Some(before) => v.excess <= before.excess + tol,
            None => false,
        })
}

/// AC check of opening `k` in the post-contingency network of `result`.
pub fn evaluate_switch(
    pf: &PowerFlow<'_>,
    result: &ContingencyResult,
    k: BranchId,
    depth: usize,
    params: &SolverParams,
    tol: f64,
) -> SwitchEvaluation {
    let c = result.contingency;
    let pre = &result.violations;
    let mask = c.mask().with_branch(k);
    let unsolved = || SwitchEvaluation {
        contingency: c,
        switch_branch: k,
        solved: false,
        post_violations: ViolationSet::default(),
        pareto: false,
        line_vrp: pre.entries.iter().map(|v| (v.branch, 0.0)).collect(),
        vrp: 0.0,
        total_excess_after: pre.total_excess,
        monitored_loading: Vec::new(),
        depth,
    };
    let sol = match pf.solve(&mask, result.post_solution.as_ref(), params) {
        Ok(sol) if sol.converged => sol,
        _ => return unsolved(),
    };
    let post = check_limits(&sol.branch_flows, pf.case(), RatingTier::Emergency);
    let pareto = pareto_check(pre, &post, tol);
    let line_vrp = pre
        .entries
        .iter()
        .map(|v| {
            let r = (v.excess - post.excess_on(v.branch)) / v.excess;
            (v.branch, if pareto { r.clamp(0.0, 1.0) } else { r })
        })
        .collect();
    let vrp = if pareto && pre.total_excess > 0.0 {
        ((pre.total_excess - post.total_excess) / pre.total_excess).clamp(0.0, 1.0)
    } else {
        0.0
    };
    SwitchEvaluation {
        contingency: c,
        switch_branch: k,
        solved: true,
        pareto,
        line_vrp,
        vrp,
        total_excess_after: post.total_excess,
        monitored_loading: pre
            .entries
            .iter()
            .map(|v| (v.branch, sol.flow(v.branch).loading()))
            .collect(),
        post_violations: post,
        depth,
    }
}

/// Everything the switching stage learned about one critical contingency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyOutcome {
    pub contingency: Contingency,
    pub candidates: CandidateList,
    pub pre_total_excess: f64,
    pub evaluated: usize,
    /// Candidates that removed every overload.
    pub full_eliminations: usize,
    /// Best solutions, by descending VRP.
    pub solutions: Vec<SwitchEvaluation>,
    pub elapsed_seconds: f64,
}

impl ContingencyOutcome {
    pub fn best_vrp(&self) -> f64 {
        self.solutions.first().map_or(0.0, |s| s.vrp)
    }
}

/// Evaluates every candidate and keeps the `top_k` Pareto improvements with
/// positive VRP, ordered by VRP, then depth, then branch id.
pub fn find_beneficial(
    pf: &PowerFlow<'_>,
    result: &ContingencyResult,
    candidates: CandidateList,
    options: &TntcOptions,
    params: &SolverParams,
    workers: usize,
) -> ContingencyOutcome {
    let started = Instant::now();
    let evals = par::map_ordered(&candidates.entries, workers, |e| {
        evaluate_switch(pf, result, e.branch, e.rank, params, options.tol)
    });
    let full_eliminations = evals.iter().filter(|e| e.eliminates_all()).count();
    let mut solutions: Vec<SwitchEvaluation> = evals.into_iter().filter(|e| e.pareto && e.vrp > 0.0).collect();
    solutions.sort_by(|a, b| {
        b.vrp
            .total_cmp(&a.vrp)
            .then(a.depth.cmp(&b.depth))
            .then(a.switch_branch.cmp(&b.switch_branch))
    });
    solutions.truncate(options.top_k);
    ContingencyOutcome {
        contingency: result.contingency,
        pre_total_excess: result.violations.total_excess,
        evaluated: candidates.len(),
        full_eliminations,
        solutions,
        candidates,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    }
}
