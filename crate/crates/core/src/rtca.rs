//! N-1 contingency scan against emergency ratings.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acpf::{check_limits, PowerFlow, PowerFlowSolution, SolverParams, ViolationSet};
use crate::error::{Error, Result};
use crate::network::{bridges, BranchId, BusType, GenId, NetworkCase, RatingTier, TopologyMask};
use crate::par;

/// A single-element outage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "element", rename_all = "lowercase")]
pub enum Contingency {
    Generator(GenId),
    Branch(BranchId),
}

impl Contingency {
    pub fn mask(&self) -> TopologyMask {
        match *self {
            Contingency::Generator(g) => TopologyMask::generator(g),
            Contingency::Branch(b) => TopologyMask::branches([b]),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Contingency::Generator(_) => "generator",
            Contingency::Branch(_) => "branch",
        }
    }

    pub fn element_id(&self) -> usize {
        match *self {
            Contingency::Generator(g) => g.0,
            Contingency::Branch(b) => b.0,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Contingency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Contingency::Generator(g) => write!(f, "gen {g}"),
            Contingency::Branch(b) => write!(f, "branch {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyResult {
    pub contingency: Contingency,
    pub solved: bool,
    /// Emergency-tier overloads; empty when unsolved.
    pub violations: ViolationSet,
    pub iterations: usize,
    pub diagnostic: Option<String>,
    pub elapsed_seconds: f64,
    /// Post-contingency state, kept only for critical contingencies since
    /// only those are carried into switching.
    pub post_solution: Option<PowerFlowSolution>,
}

impl ContingencyResult {
    pub fn is_critical(&self) -> bool {
        self.solved && !self.violations.is_empty()
    }

    /// From-end MW on branch `k` in the post-contingency state.
    pub fn switch_line_flow(&self, k: BranchId) -> Option<f64> {
        let sol = self.post_solution.as_ref()?;
        let f = sol.branch_flows.get(k.index())?;
        f.in_service.then_some(f.p_from)
    }

    /// `(k, P_k)` for every in-service branch surviving the contingency.
    pub fn switch_line_flows(&self) -> Vec<(BranchId, f64)> {
        self.post_solution
            .iter()
            .flat_map(|s| s.branch_flows.iter())
            .filter(|f| f.in_service)
            .map(|f| (f.branch, f.p_from))
            .collect()
    }
}

/// Summary of per-contingency total excess over the critical set, MVA.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RtcaStats {
    pub count: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub stddev: f64,
}

impl RtcaStats {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return RtcaStats::default();
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        let stddev = if n > 1 {
            (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        RtcaStats {
            count: n,
            max: sorted[n - 1],
            min: sorted[0],
            mean,
            median,
            stddev,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RtcaTiming {
    pub generator_seconds: f64,
    pub branch_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtcaReport {
    /// One entry per contingency, in list order.
    pub results: Vec<ContingencyResult>,
    /// Critical contingencies, by descending total excess.
    pub critical: Vec<Contingency>,
    pub unsolved: Vec<Contingency>,
    pub stats: RtcaStats,
    pub timing: RtcaTiming,
}

impl RtcaReport {
    pub fn result(&self, c: Contingency) -> Option<&ContingencyResult> {
        self.results.iter().find(|r| r.contingency == c)
    }

    pub fn critical_results(&self) -> impl Iterator<Item = &ContingencyResult> {
        self.critical.iter().filter_map(|&c| self.result(c))
    }
}

/// In-service generators, then in-service non-radial branches, each by id.
///
/// A generator that is the only one at the slack bus is left out: losing it
/// would remove the angle reference and the balancing machine.
pub fn build_contingency_list(case: &NetworkCase) -> Vec<Contingency> {
    let none = TopologyMask::empty();
    let mut list: Vec<Contingency> = case
        .generators()
        .iter()
        .filter(|g| g.in_service)
        .filter(|g| {
            let at_slack = case
                .bus_position(g.bus)
                .is_some_and(|i| case.buses()[i].bus_type == BusType::Slack);
            !(at_slack && case.generators_at(g.bus, &none).count() == 1)
        })
        .map(|g| Contingency::Generator(g.id))
        .collect();
    let radial = bridges(case, &none);
    list.extend(
        case.branches()
            .iter()
            .filter(|b| b.in_service && radial.binary_search(&b.id).is_err())
            .map(|b| Contingency::Branch(b.id)),
    );
    list
}

/// AC solve of the case minus `c`, warm-started from `base`.
pub fn simulate_contingency(
    pf: &PowerFlow<'_>,
    base: &PowerFlowSolution,
    c: Contingency,
    params: &SolverParams,
) -> ContingencyResult {
    let started = Instant::now();
    let outcome = pf.solve(&c.mask(), Some(base), params);
    let elapsed_seconds = started.elapsed().as_secs_f64();
    match outcome {
        Ok(sol) if sol.converged => {
            let violations = check_limits(&sol.branch_flows, pf.case(), RatingTier::Emergency);
            let keep = !violations.is_empty();
            ContingencyResult {
                contingency: c,
                solved: true,
                violations,
                iterations: sol.iterations,
                diagnostic: None,
                elapsed_seconds,
                post_solution: keep.then_some(sol),
            }
        }
        Ok(sol) => ContingencyResult {
            contingency: c,
            solved: false,
            violations: ViolationSet::default(),
            iterations: sol.iterations,
            diagnostic: sol.diagnostic,
            elapsed_seconds,
            post_solution: None,
        },
        Err(e) => ContingencyResult {
            contingency: c,
            solved: false,
            violations: ViolationSet::default(),
            iterations: 0,
            diagnostic: Some(e.to_string()),
            elapsed_seconds,
            post_solution: None,
        },
    }
}

/// Simulates every contingency; results keep list order whatever the worker count.
pub fn run_rtca(
    case: &NetworkCase,
    list: &[Contingency],
    base: &PowerFlowSolution,
    params: &SolverParams,
    workers: usize,
) -> Result<RtcaReport> {
    if !base.converged {
        return Err(Error::BaseCaseDiverged(
            base.diagnostic.clone().unwrap_or_else(|| "base case did not converge".into()),
        ));
    }
    let pf = PowerFlow::new(case);
    let split = list.iter().position(|c| matches!(c, Contingency::Branch(_))).unwrap_or(list.len());
    let (gens, branches) = list.split_at(split);

    let t = Instant::now();
    let mut results = par::map_ordered(gens, workers, |&c| simulate_contingency(&pf, base, c, params));
    let generator_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    results.extend(par::map_ordered(branches, workers, |&c| {
        simulate_contingency(&pf, base, c, params)
    }));
    let branch_seconds = t.elapsed().as_secs_f64();

    Ok(assemble_report(
        results,
        RtcaTiming {
            generator_seconds,
            branch_seconds,
        },
    ))
}

pub(crate) fn assemble_report(results: Vec<ContingencyResult>, timing: RtcaTiming) -> RtcaReport {
    let mut report = RtcaReport {
        unsolved: results.iter().filter(|r| !r.solved).map(|r| r.contingency).collect(),
        results,
        critical: Vec::new(),
        stats: RtcaStats::default(),
        timing,
    };
    report.critical = select_critical(&report);
    let totals: Vec<f64> = report.critical_results().map(|r| r.violations.total_excess).collect();
    report.stats = RtcaStats::from_values(&totals);
    report
}

/// Solved contingencies with emergency overloads, by descending total excess;
/// ties keep list order.
pub fn select_critical(report: &RtcaReport) -> Vec<Contingency> {
    let mut crit: Vec<(usize, &ContingencyResult)> =
        report.results.iter().enumerate().filter(|(_, r)| r.is_critical()).collect();
    crit.sort_by(|a, b| {
        b.1.violations
            .total_excess
            .total_cmp(&a.1.violations.total_excess)
            .then(a.0.cmp(&b.0))
    });
    crit.into_iter().map(|(_, r)| r.contingency).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acpf::Violation;
    use crate::network::testing::{generator, ring, triangle};

    #[test]
    fn triangle_list_is_branches_only() {
        let list = build_contingency_list(&triangle(0.1));
        assert_eq!(
            list,
            vec![
                Contingency::Branch(BranchId(1)),
                Contingency::Branch(BranchId(2)),
                Contingency::Branch(BranchId(3))
            ]
        );
    }

    #[test]
    fn spur_is_excluded_and_generators_come_first() {
        let (name, base, buses, branches, mut gens) = ring(4, true).into_parts();
        gens.push(generator(2, 3, 10.0, 1.0));
        gens.push(generator(3, 1, 10.0, 1.0));
        let case = NetworkCase::new(name, base, buses, branches, gens).unwrap();
        let list = build_contingency_list(&case);
        // two machines at the slack now, so both are eligible
        assert_eq!(&list[..3], &[
            Contingency::Generator(GenId(1)),
            Contingency::Generator(GenId(2)),
            Contingency::Generator(GenId(3))
        ]);
        assert!(!list.contains(&Contingency::Branch(BranchId(5))));
        assert_eq!(list.len(), 3 + 4);
    }

    #[test]
    fn stats_use_sample_deviation() {
        let s = RtcaStats::from_values(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.count, 8);
        assert!((s.mean - 5.0).abs() < 1e-12);
        assert!((s.median - 4.5).abs() < 1e-12);
        assert!((s.stddev - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(RtcaStats::from_values(&[]), RtcaStats::default());
    }

    fn result(id: usize, excess: &[f64]) -> ContingencyResult {
        let entries = excess
            .iter()
            .enumerate()
            .map(|(i, &e)| Violation {
                branch: BranchId(i + 1),
                loading: 100.0 + e,
                rating: 100.0,
                excess: e,
            })
            .collect();
        ContingencyResult {
            contingency: Contingency::Branch(BranchId(id)),
            solved: true,
            violations: ViolationSet::from_entries(entries),
            iterations: 1,
            diagnostic: None,
            elapsed_seconds: 0.0,
            post_solution: None,
        }
    }

    #[test]
    fn critical_sorted_by_total_excess() {
        let report = assemble_report(
            vec![result(1, &[5.0]), result(2, &[]), result(3, &[10.0, 11.0]), result(4, &[5.0])],
            RtcaTiming::default(),
        );
        assert_eq!(
            report.critical,
            vec![
                Contingency::Branch(BranchId(3)),
                Contingency::Branch(BranchId(1)),
                Contingency::Branch(BranchId(4))
            ]
        );
        assert_eq!(report.stats.count, 3);
        assert!((report.stats.max - 21.0).abs() < 1e-12);
    }

    #[test]
    fn empty_list_gives_empty_report() {
        let case = triangle(0.1);
        let base = crate::acpf::solve_power_flow(&case, &TopologyMask::empty(), None, &SolverParams::default()).unwrap();
        let report = run_rtca(&case, &[], &base, &SolverParams::default(), 1).unwrap();
        assert!(report.results.is_empty() && report.critical.is_empty());
        assert_eq!(report.stats, RtcaStats::default());
    }
}
