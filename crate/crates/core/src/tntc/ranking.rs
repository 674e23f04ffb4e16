use serde::{Deserialize, Serialize};

use super::{RankingMethod, TntcOptions};
use crate::error::{Error, Result};
use crate::network::{switchable_branches, BranchId, BranchKind, NetworkCase};
use crate::rtca::{Contingency, ContingencyResult};
use crate::sensitivity::{SensitivityRecord, SwitchingFactors};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub branch: BranchId,
    /// Aggregate directed factor: dimensionless for TSDF, MW for FTDF, 0 for CE.
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateList {
    pub contingency: Contingency,
    pub method: RankingMethod,
    pub entries: Vec<CandidateEntry>,
}

impl CandidateList {
    /// 1-based rank of `k`, if listed.
    pub fn depth_of(&self, k: BranchId) -> Option<usize> {
        self.entries.iter().find(|e| e.branch == k).map(|e| e.rank)
    }

    pub fn branches(&self) -> Vec<BranchId> {
        self.entries.iter().map(|e| e.branch).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Candidate switching branches for one critical contingency.
pub fn rank_candidates(
    case: &NetworkCase,
    result: &ContingencyResult,
    method: RankingMethod,
    options: &TntcOptions,
) -> Result<CandidateList> {
    rank_candidates_with_factors(case, result, method, options, None)
}

/// As [`rank_candidates`], optionally collecting every (c, m, k) factor
/// evaluated along the way.
///
/// Each overloaded branch m contributes `sign(P_m) * factor(m, k)`, so a
/// negative score predicts relief whichever way m happens to be oriented.
pub fn rank_candidates_with_factors(
    case: &NetworkCase,
    result: &ContingencyResult,
    method: RankingMethod,
    options: &TntcOptions,
    mut records: Option<&mut Vec<SensitivityRecord>>,
) -> Result<CandidateList> {
    let c = result.contingency;
    let mask = c.mask();
    let switchable: Vec<BranchId> = switchable_branches(case, &mask)
        .into_iter()
        .filter(|&k| {
            !options.lines_only || case.branch(k).is_some_and(|b| b.kind == BranchKind::Line)
        })
        .collect();

    let limit = match method {
        RankingMethod::Ce => {
            let entries = switchable
                .into_iter()
                .enumerate()
                .map(|(i, branch)| CandidateEntry {
                    branch,
                    score: 0.0,
                    rank: i + 1,
                })
                .collect();
            return Ok(CandidateList {
                contingency: c,
                method,
                entries,
            });
        }
        RankingMethod::Tsdf(n) | RankingMethod::Ftdf(n) => n,
    };

    let overloaded: Vec<BranchId> = result.violations.entries.iter().map(|v| v.branch).collect();
    if overloaded.is_empty() || switchable.is_empty() {
        return Ok(CandidateList {
            contingency: c,
            method,
            entries: Vec::new(),
        });
    }
    let flow = |b: BranchId| -> Result<f64> {
        result
            .switch_line_flow(b)
            .ok_or_else(|| Error::Config(format!("no post-contingency flow for branch {b} under {c}")))
    };
    let signs: Vec<f64> = overloaded
        .iter()
        .map(|&m| Ok(if flow(m)? < 0.0 { -1.0 } else { 1.0 }))
        .collect::<Result<_>>()?;
    let factors = SwitchingFactors::new(case, &mask, &overloaded)?;

    let mut scored = Vec::with_capacity(switchable.len());
    for k in switchable {
        let row = match factors.tsdf_row(case, k) {
            Ok(row) => row,
            // numerically islanding though the graph test passed: drop it
            Err(Error::Islanding(_)) => continue,
            Err(e) => return Err(e),
        };
        let p_kc = flow(k)?;
        // An overloaded candidate is read along its own flow, so that TSDF
        // scores (which, unlike FTDF, ignore P_k) do not depend on how that
        // branch happens to be stored.
        let k_sign = if p_kc < 0.0 && overloaded.contains(&k) { -1.0 } else { 1.0 };
        let mut score = 0.0;
        for ((&m, &sign), &tsdf) in overloaded.iter().zip(&signs).zip(&row) {
            let rec = SensitivityRecord::new(c, m, k, tsdf, p_kc);
            score += sign
                * match method {
                    RankingMethod::Ftdf(_) => rec.ftdf,
                    _ => k_sign * rec.tsdf,
                };
            if let Some(out) = records.as_deref_mut() {
                out.push(rec);
            }
        }
        scored.push((k, score));
    }
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    scored.truncate(limit);
    Ok(CandidateList {
        contingency: c,
        method,
        entries: scored
            .into_iter()
            .enumerate()
            .map(|(i, (branch, score))| CandidateEntry {
                branch,
                score,
                rank: i + 1,
            })
            .collect(),
    })
}
