use num_complex::Complex64;

use super::{branch_admittance, BranchFlow};
use crate::network::{NetworkCase, TopologyMask};

/// Both-end complex flows for every branch at the given voltage state.
/// Out-of-service and masked branches report zero flow.
pub fn compute_branch_flows(
    v_mag: &[f64],
    v_ang: &[f64],
    case: &NetworkCase,
    mask: &TopologyMask,
) -> Vec<BranchFlow> {
    let base = case.base_mva();
    case.branches()
        .iter()
        .map(|br| {
            if !case.branch_active(br, mask) {
                return BranchFlow {
                    branch: br.id,
                    in_service: false,
                    p_from: 0.0,
                    q_from: 0.0,
                    p_to: 0.0,
                    q_to: 0.0,
                    s_from: 0.0,
                    s_to: 0.0,
                };
            }
            let (f, t) = case.branch_ends(br);
            let vf = Complex64::from_polar(v_mag[f], v_ang[f]);
            let vt = Complex64::from_polar(v_mag[t], v_ang[t]);
            let y = branch_admittance(br);
            let sf = vf * (y.yff * vf + y.yft * vt).conj() * base;
            let st = vt * (y.ytf * vf + y.ytt * vt).conj() * base;
            BranchFlow {
                branch: br.id,
                in_service: true,
                p_from: sf.re,
                q_from: sf.im,
                p_to: st.re,
                q_to: st.im,
                s_from: sf.norm(),
                s_to: st.norm(),
            }
        })
        .collect()
}
