use serde::{Deserialize, Serialize};

use super::{BranchFlow, PowerFlowSolution};
use crate::network::{BranchId, BusId, NetworkCase, RatingTier};

/// One branch loaded past its rating, in MVA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub branch: BranchId,
    pub loading: f64,
    pub rating: f64,
    pub excess: f64,
}

impl Violation {
    /// Excess as a percentage of the rating.
    pub fn relative_percent(&self) -> f64 {
        self.excess / self.rating * 100.0
    }
}

/// Branch overloads sorted by descending excess (ties by ascending branch id).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationSet {
    pub entries: Vec<Violation>,
    pub total_excess: f64,
}

impl ViolationSet {
    pub fn from_entries(mut entries: Vec<Violation>) -> Self {
        entries.retain(|v| v.excess > 0.0);
        entries.sort_by(|a, b| b.excess.total_cmp(&a.excess).then(a.branch.cmp(&b.branch)));
        let total_excess = entries.iter().fold(0.0, |acc, v| acc + v.excess);
        ViolationSet { entries, total_excess }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, branch: BranchId) -> Option<&Violation> {
        self.entries.iter().find(|v| v.branch == branch)
    }

    pub fn excess_on(&self, branch: BranchId) -> f64 {
        self.get(branch).map_or(0.0, |v| v.excess)
    }

    pub fn worst(&self) -> Option<&Violation> {
        self.entries.first()
    }
}

/// Monitored in-service branches whose larger-end MVA exceeds the tier rating.
pub fn check_limits(flows: &[BranchFlow], case: &NetworkCase, tier: RatingTier) -> ViolationSet {
    let entries = flows
        .iter()
        .filter(|f| f.in_service)
        .filter_map(|f| {
            let rating = case.branch(f.branch)?.rating(tier)?;
            let loading = f.loading();
            (loading > rating).then(|| Violation {
                branch: f.branch,
                loading,
                rating,
                excess: loading - rating,
            })
        })
        .collect();
    ViolationSet::from_entries(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoltageBound {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoltageViolation {
    pub bus: BusId,
    pub v_mag: f64,
    /// The bound that was crossed, p.u.
    pub bound: f64,
    pub side: VoltageBound,
}

/// Buses outside their voltage band. Reported only; never used for ranking.
pub fn check_voltage_limits(solution: &PowerFlowSolution, case: &NetworkCase) -> Vec<VoltageViolation> {
    case.buses()
        .iter()
        .zip(&solution.v_mag)
        .filter_map(|(bus, &v)| {
            if v < bus.v_min {
                Some(VoltageViolation {
                    bus: bus.id,
                    v_mag: v,
                    bound: bus.v_min,
                    side: VoltageBound::Low,
                })
            } else if v > bus.v_max {
                Some(VoltageViolation {
                    bus: bus.id,
                    v_mag: v,
                    bound: bus.v_max,
                    side: VoltageBound::High,
                })
            } else {
                None
            }
        })
        .collect()
}
