use crate::error::{Error, Result};
use crate::network::graph::adjacency;
use crate::network::{connected_components, BusType, NetworkCase, TopologyMask};
use crate::sparse::{minimum_degree, CscMatrix, LuFactors};

const NONE: usize = usize::MAX;
const PIVOT_THRESHOLD: f64 = 0.1;

/// Factorized reduced susceptance matrix B' of one topology, slack removed.
///
/// Branch susceptance is 1/x; taps and phase shifts are ignored.
#[derive(Debug, Clone)]
pub(crate) struct DcSystem {
    // bus position -> row of the reduced system (NONE for the slack)
    index: Vec<usize>,
    lu: LuFactors,
}

impl DcSystem {
    pub(crate) fn new(case: &NetworkCase, mask: &TopologyMask) -> Result<Self> {
        let slack = case
            .buses()
            .iter()
            .position(|b| b.bus_type == BusType::Slack)
            .ok_or(Error::NoSlack)?;
        Self::with_slack(case, mask, slack)
    }

    pub(crate) fn with_slack(case: &NetworkCase, mask: &TopologyMask, slack: usize) -> Result<Self> {
        mask.check(case)?;
        let labels = connected_components(case, mask);
        let components = labels.iter().max().map_or(0, |m| m + 1);
        if components > 1 {
            return Err(Error::Disconnected { components });
        }
        let adj: Vec<Vec<usize>> = adjacency(case, mask)
            .into_iter()
            .map(|l| l.into_iter().map(|(nb, _)| nb).collect())
            .collect();
        let mut index = vec![NONE; case.bus_count()];
        let mut dim = 0;
        for bus in minimum_degree(&adj) {
            if bus != slack {
                index[bus] = dim;
                dim += 1;
            }
        }

        let mut trip = Vec::new();
        for br in case.branches() {
            if !case.branch_active(br, mask) {
                continue;
            }
            if br.x == 0.0 {
                return Err(Error::Validation(format!("branch {} has zero reactance", br.id)));
            }
            let b = 1.0 / br.x;
            let (f, t) = case.branch_ends(br);
            let (rf, rt) = (index[f], index[t]);
            if rf != NONE {
                trip.push((rf, rf, b));
            }
            if rt != NONE {
                trip.push((rt, rt, b));
            }
            if rf != NONE && rt != NONE {
                trip.push((rf, rt, -b));
                trip.push((rt, rf, -b));
            }
        }
        let lu = LuFactors::factor(&CscMatrix::from_triplets(dim, dim, &trip), PIVOT_THRESHOLD)?;
        Ok(DcSystem { index, lu })
    }

    /// Bus angles (slack at zero) for per-bus injections; the slack's own
    /// entry is ignored since it absorbs the imbalance.
    pub(crate) fn angles(&self, injections: &[f64]) -> Vec<f64> {
        let mut rhs = vec![0.0; self.lu.dim()];
        for (bus, &p) in injections.iter().enumerate() {
            if self.index[bus] != NONE {
                rhs[self.index[bus]] = p;
            }
        }
        self.lu.solve_in_place(&mut rhs);
        self.expand(&rhs)
    }

    /// Solves `B' y = (e_a - e_b) * scale` and returns `y` per bus. Because B'
    /// is symmetric, this is the PTDF row of a branch from `a` to `b` when
    /// `scale = 1/x`.
    pub(crate) fn transfer_row(&self, a: usize, b: usize, scale: f64) -> Vec<f64> {
        let mut rhs = vec![0.0; self.lu.dim()];
        if self.index[a] != NONE {
            rhs[self.index[a]] += scale;
        }
        if self.index[b] != NONE {
            rhs[self.index[b]] -= scale;
        }
        self.lu.solve_in_place(&mut rhs);
        self.expand(&rhs)
    }

    fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        self.index
            .iter()
            .map(|&r| if r == NONE { 0.0 } else { reduced[r] })
            .collect()
    }
}

/// Linearized branch flows in MW for per-bus injections in MW.
///
/// The slack absorbs whatever the other injections leave unbalanced. Flows on
/// inactive branches are zero.
pub fn dc_flows(case: &NetworkCase, mask: &TopologyMask, injections: &[f64]) -> Result<Vec<f64>> {
    if injections.len() != case.bus_count() {
        return Err(Error::Config(format!(
            "{} injections given for {} buses",
            injections.len(),
            case.bus_count()
        )));
    }
    let sys = DcSystem::new(case, mask)?;
    let theta = sys.angles(injections);
    Ok(case
        .branches()
        .iter()
        .map(|br| {
            if !case.branch_active(br, mask) {
                return 0.0;
            }
            let (f, t) = case.branch_ends(br);
            (theta[f] - theta[t]) / br.x
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::testing::{triangle, two_bus};
    use crate::network::BranchId;

    #[test]
    fn triangle_split() {
        let f = dc_flows(&triangle(0.1), &TopologyMask::empty(), &[100.0, 0.0, 0.0]).unwrap();
        assert!((f[0] - 200.0 / 3.0).abs() < 1e-9);
        assert!((f[1] - 100.0 / 3.0).abs() < 1e-9);
        assert!((f[2] - 100.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_injections_zero_flows() {
        let f = dc_flows(&triangle(0.1), &TopologyMask::empty(), &[0.0; 3]).unwrap();
        assert!(f.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_bus_flows_toward_slack() {
        let f = dc_flows(&two_bus(0.0, 0.1), &TopologyMask::empty(), &[0.0, 50.0]).unwrap();
        assert!((f[0] + 50.0).abs() < 1e-9);
    }

    #[test]
    fn split_network_is_rejected() {
        let r = dc_flows(&two_bus(0.0, 0.1), &TopologyMask::branches([BranchId(1)]), &[0.0, 50.0]);
        assert!(matches!(r, Err(Error::Disconnected { .. })));
    }
}
