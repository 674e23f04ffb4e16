use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::{connected_components, Branch, BusId, NetworkCase, TopologyMask};

/// Pi-model terminal admittances of one branch, p.u.
///
/// `[I_f; I_t] = [[yff, yft], [ytf, ytt]] [V_f; V_t]`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAdmittance {
    pub yff: Complex64,
    pub yft: Complex64,
    pub ytf: Complex64,
    pub ytt: Complex64,
}

pub fn branch_admittance(br: &Branch) -> BranchAdmittance {
    let ys = Complex64::new(br.r, br.x).inv();
    let charging = Complex64::new(0.0, br.charging_susceptance / 2.0);
    let tap = Complex64::from_polar(br.tap_ratio, br.phase_shift.to_radians());
    let ytt = ys + charging;
    BranchAdmittance {
        yff: ytt / (tap * tap.conj()),
        yft: -ys / tap.conj(),
        ytf: -ys / tap,
        ytt,
    }
}

/// Sparse bus admittance matrix in compressed rows, indexed by case bus order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
    bus_ids: Vec<BusId>,
}

impl AdmittanceMatrix {
    pub fn dimension(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn bus_id(&self, index: usize) -> BusId {
        self.bus_ids[index]
    }

    pub fn index_of(&self, id: BusId) -> Option<usize> {
        self.bus_ids.iter().position(|&b| b == id)
    }

    /// Row `i` as `(column, value)`; the diagonal is always present.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let slice = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match slice.binary_search(&j) {
            Ok(p) => self.values[self.row_ptr[i] + p],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// `Y V`
    pub fn mul(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dimension())
            .map(|i| self.row(i).map(|(j, y)| y * v[j]).sum())
            .collect()
    }
}

/// Assembles the admittance matrix from in-service, unmasked elements.
///
/// Fails when the masked network is split, since no power flow is defined on it.
pub fn build_ybus(case: &NetworkCase, mask: &TopologyMask) -> Result<AdmittanceMatrix> {
    mask.check(case)?;
    let labels = connected_components(case, mask);
    let components = labels.iter().max().map_or(0, |m| m + 1);
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    Ok(assemble(case, mask, None, false))
}

/// Assembly without the connectivity check; `admittances` may carry
/// precomputed per-branch values.
/// With `structural`, inactive branches still contribute (zero) entries, so
/// every topology of a case shares one sparsity pattern.
pub(crate) fn assemble(
    case: &NetworkCase,
    mask: &TopologyMask,
    admittances: Option<&[BranchAdmittance]>,
    structural: bool,
) -> AdmittanceMatrix {
    let n = case.bus_count();
    let base = case.base_mva();
    let mut rows: Vec<Vec<(usize, Complex64)>> = (0..n)
        .map(|i| {
            let bus = &case.buses()[i];
            vec![(i, Complex64::new(bus.shunt_conductance, bus.shunt_susceptance) / base)]
        })
        .collect();
    for (k, br) in case.branches().iter().enumerate() {
        let y = if !case.branch_active(br, mask) {
            if !structural {
                continue;
            }
            let zero = Complex64::new(0.0, 0.0);
            BranchAdmittance {
                yff: zero,
                yft: zero,
                ytf: zero,
                ytt: zero,
            }
        } else {
            match admittances {
                Some(list) => list[k],
                None => branch_admittance(br),
            }
        };
        let (f, t) = case.branch_ends(br);
        rows[f].push((f, y.yff));
        rows[f].push((t, y.yft));
        rows[t].push((f, y.ytf));
        rows[t].push((t, y.ytt));
    }

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for mut row in rows {
        row.sort_by_key(|&(j, _)| j);
        let start = col_idx.len();
        for (j, y) in row {
            if col_idx.len() > start && *col_idx.last().unwrap() == j {
                *values.last_mut().unwrap() += y;
            } else {
                col_idx.push(j);
                values.push(y);
            }
        }
        row_ptr.push(col_idx.len());
    }
    AdmittanceMatrix {
        row_ptr,
        col_idx,
        values,
        bus_ids: case.buses().iter().map(|b| b.id).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::testing::{triangle, two_bus};
    use crate::network::BranchId;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn single_series_element() {
        let y = build_ybus(&two_bus(100.0, 0.1), &TopologyMask::empty()).unwrap();
        assert!(close(y.get(0, 0), Complex64::new(0.0, -10.0)));
        assert!(close(y.get(1, 1), Complex64::new(0.0, -10.0)));
        assert!(close(y.get(0, 1), Complex64::new(0.0, 10.0)));
        assert!(close(y.get(1, 0), Complex64::new(0.0, 10.0)));
    }

    #[test]
    fn half_charging_per_end() {
        let (name, base, buses, mut branches, gens) = two_bus(100.0, 0.1).into_parts();
        branches[0].charging_susceptance = 0.2;
        let case = NetworkCase::new(name, base, buses, branches, gens).unwrap();
        let y = build_ybus(&case, &TopologyMask::empty()).unwrap();
        assert!(close(y.get(0, 0), Complex64::new(0.0, -10.0 + 0.1)));
        assert!(close(y.get(1, 1), Complex64::new(0.0, -10.0 + 0.1)));
    }

    #[test]
    fn triangle_pattern() {
        let y = build_ybus(&triangle(0.1), &TopologyMask::empty()).unwrap();
        for i in 0..3 {
            assert!(close(y.get(i, i), Complex64::new(0.0, -20.0)));
            for j in 0..3 {
                if i != j {
                    assert!(close(y.get(i, j), Complex64::new(0.0, 10.0)));
                }
            }
        }
    }

    #[test]
    fn masked_branch_contributes_nothing() {
        let y = build_ybus(&triangle(0.1), &TopologyMask::branches([BranchId(1)])).unwrap();
        assert!(close(y.get(0, 2), Complex64::new(0.0, 0.0)));
        assert!(close(y.get(0, 0), Complex64::new(0.0, -10.0)));
    }

    #[test]
    fn disconnected_mask_is_an_error() {
        let case = two_bus(100.0, 0.1);
        assert!(matches!(
            build_ybus(&case, &TopologyMask::branches([BranchId(1)])),
            Err(Error::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn tap_and_shift_follow_pi_model() {
        let (name, base, buses, mut branches, gens) = two_bus(0.0, 0.1).into_parts();
        branches[0].tap_ratio = 1.05;
        branches[0].phase_shift = 10.0;
        let case = NetworkCase::new(name, base, buses, branches, gens).unwrap();
        let y = build_ybus(&case, &TopologyMask::empty()).unwrap();
        let ys = Complex64::new(0.0, -10.0);
        let tap = Complex64::from_polar(1.05, 10f64.to_radians());
        assert!(close(y.get(0, 0), ys / (1.05 * 1.05)));
        assert!(close(y.get(0, 1), -ys / tap.conj()));
        assert!(close(y.get(1, 0), -ys / tap));
    }
}
