use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::dc::DcSystem;
use crate::error::{Error, Result};
use crate::network::{BranchId, BusId, NetworkCase, TopologyMask};
use crate::rtca::Contingency;

/// Denominators below this magnitude mean the opened branch is a bridge.
pub const ISLANDING_THRESHOLD: f64 = 1e-6;

/// PTDF rows for a set of monitored branches; columns follow case bus order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtdfMatrix {
    monitored: Vec<BranchId>,
    slack: BusId,
    mask: TopologyMask,
    values: Vec<Vec<f64>>,
}

impl PtdfMatrix {
    pub fn monitored(&self) -> &[BranchId] {
        &self.monitored
    }

    pub fn slack(&self) -> BusId {
        self.slack
    }

    pub fn mask(&self) -> &TopologyMask {
        &self.mask
    }

    pub fn row(&self, branch: BranchId) -> Option<&[f64]> {
        let r = self.monitored.iter().position(|&b| b == branch)?;
        Some(&self.values[r])
    }

    /// Entry for a monitored branch and a bus position.
    pub fn entry(&self, branch: BranchId, bus: usize) -> Option<f64> {
        self.row(branch).and_then(|r| r.get(bus).copied())
    }
}

fn active_branch(case: &NetworkCase, mask: &TopologyMask, id: BranchId) -> Result<(usize, usize, f64)> {
    let br = case.branch(id).ok_or(Error::UnknownBranch(id))?;
    if !case.branch_active(br, mask) {
        return Err(Error::Validation(format!("branch {id} is out of service in this topology")));
    }
    let (f, t) = case.branch_ends(br);
    Ok((f, t, br.x))
}

/// MW flow change on each monitored branch per MW injected at a bus and
/// withdrawn at `slack`, on the masked topology. One back-solve per row.
pub fn compute_ptdf(
    case: &NetworkCase,
    mask: &TopologyMask,
    slack: BusId,
    monitored: &[BranchId],
) -> Result<PtdfMatrix> {
    let slack_pos = case.bus_position(slack).ok_or(Error::UnknownBus(slack))?;
    let sys = DcSystem::with_slack(case, mask, slack_pos)?;
    let values = monitored
        .iter()
        .map(|&id| {
            let (f, t, x) = active_branch(case, mask, id)?;
            Ok(sys.transfer_row(f, t, 1.0 / x))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PtdfMatrix {
        monitored: monitored.to_vec(),
        slack,
        mask: mask.clone(),
        values,
    })
}

fn outage_ratio(numerator: f64, self_transfer: f64, opened: BranchId) -> Result<f64> {
    let den = 1.0 - self_transfer;
    if den.abs() < ISLANDING_THRESHOLD {
        return Err(Error::Islanding(opened));
    }
    Ok(numerator / den)
}

/// Share of branch `outaged`'s pre-outage flow that moves onto `monitored`.
/// Both branches must be rows of `ptdf`.
pub fn compute_lodf(ptdf: &PtdfMatrix, case: &NetworkCase, outaged: BranchId, monitored: BranchId) -> Result<f64> {
    if outaged == monitored {
        return Ok(-1.0);
    }
    let (f, t, _) = active_branch(case, ptdf.mask(), outaged)?;
    let row_l = ptdf.row(monitored).ok_or(Error::UnknownBranch(monitored))?;
    let row_c = ptdf.row(outaged).ok_or(Error::UnknownBranch(outaged))?;
    outage_ratio(row_l[f] - row_l[t], row_c[f] - row_c[t], outaged)
}

/// Switching factors of one post-contingency topology for a fixed set of
/// overloaded branches.
///
/// Factorizes B' once; each candidate then costs a single back-solve for its
/// self-transfer term.
#[derive(Debug, Clone)]
pub struct SwitchingFactors {
    sys: DcSystem,
    mask: TopologyMask,
    overloaded: Vec<BranchId>,
    rows: Vec<Vec<f64>>,
}

impl SwitchingFactors {
    pub fn new(case: &NetworkCase, post_mask: &TopologyMask, overloaded: &[BranchId]) -> Result<Self> {
        let sys = DcSystem::new(case, post_mask)?;
        let rows = overloaded
            .iter()
            .map(|&m| {
                let (f, t, x) = active_branch(case, post_mask, m)?;
                Ok(sys.transfer_row(f, t, 1.0 / x))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SwitchingFactors {
            sys,
            mask: post_mask.clone(),
            overloaded: overloaded.to_vec(),
            rows,
        })
    }

    pub fn overloaded(&self) -> &[BranchId] {
        &self.overloaded
    }

    /// TSDF of opening `k` for every overloaded branch, in construction order.
    pub fn tsdf_row(&self, case: &NetworkCase, k: BranchId) -> Result<Vec<f64>> {
        let (f, t, x) = active_branch(case, &self.mask, k)?;
        let own = self.sys.transfer_row(f, t, 1.0 / x);
        let self_transfer = own[f] - own[t];
        self.overloaded
            .iter()
            .zip(&self.rows)
            .map(|(&m, row)| {
                if m == k {
                    Ok(-1.0)
                } else {
                    outage_ratio(row[f] - row[t], self_transfer, k)
                }
            })
            .collect()
    }

    pub fn tsdf(&self, case: &NetworkCase, k: BranchId, m: BranchId) -> Result<f64> {
        let pos = self
            .overloaded
            .iter()
            .position(|&b| b == m)
            .ok_or(Error::UnknownBranch(m))?;
        Ok(self.tsdf_row(case, k)?[pos])
    }
}

/// Flow change on `m` per MW flowing on `k` when `k` is opened in the
/// post-contingency topology `post_mask`.
pub fn compute_tsdf(case: &NetworkCase, post_mask: &TopologyMask, k: BranchId, m: BranchId) -> Result<f64> {
    if k == m {
        return Ok(-1.0);
    }
    SwitchingFactors::new(case, post_mask, &[m])?.tsdf(case, k, m)
}

/// Predicted MW change on the overloaded branch.
pub fn compute_ftdf(tsdf: f64, p_kc: f64) -> f64 {
    tsdf * p_kc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRecord {
    pub contingency: Contingency,
    pub overloaded: BranchId,
    pub candidate: BranchId,
    pub tsdf: f64,
    /// MW on the candidate in the post-contingency AC state.
    pub p_kc: f64,
    pub ftdf: f64,
}

impl SensitivityRecord {
    pub fn new(contingency: Contingency, overloaded: BranchId, candidate: BranchId, tsdf: f64, p_kc: f64) -> Self {
        SensitivityRecord {
            contingency,
            overloaded,
            candidate,
            tsdf,
            p_kc,
            ftdf: compute_ftdf(tsdf, p_kc),
        }
    }
}

/// Comma-separated dump, one row per record.
pub fn write_factor_table<W: Write>(records: &[SensitivityRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "contingency,overloaded,candidate,tsdf,p_kc,ftdf")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.contingency.label(),
            r.overloaded,
            r.candidate,
            r.tsdf,
            r.p_kc,
            r.ftdf
        )?;
    }
    Ok(())
}
