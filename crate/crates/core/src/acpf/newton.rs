use std::sync::OnceLock;

use num_complex::Complex64;

use super::ybus::{assemble, branch_admittance, AdmittanceMatrix, BranchAdmittance};
use super::{compute_branch_flows, PowerFlowSolution, SolverParams};
use crate::error::{Error, Result};
use crate::network::graph::adjacency;
use crate::network::{connected_components, BusId, BusType, NetworkCase, TopologyMask};
use crate::sparse::{minimum_degree, CscMatrix, LuFactors};

const NONE: usize = usize::MAX;
const PIVOT_THRESHOLD: f64 = 0.01;
// mismatch beyond which an iterate is treated as blown up, p.u.
const BLOWUP: f64 = 1e8;
// MVAR slack before a reactive limit counts as crossed
const QLIM_TOL: f64 = 1e-4;
// smallest damped Newton step before the step is taken regardless
const MIN_STEP: f64 = 1.0 / 64.0;

/// Newton-Raphson solver bound to one case.
///
/// Holds the per-branch admittances and a fill-reducing bus ordering that are
/// reused across every topology solved on the same case.
#[derive(Debug, Clone)]
pub struct PowerFlow<'a> {
    case: &'a NetworkCase,
    order: Vec<usize>,
    admittances: Vec<BranchAdmittance>,
    template: OnceLock<JacobianTemplate>,
}

struct Injections {
    p: Vec<f64>,
    q: Vec<f64>,
}

struct NewtonOutcome {
    converged: bool,
    iterations: usize,
    max_mismatch: f64,
    diagnostic: Option<String>,
}

impl<'a> PowerFlow<'a> {
    pub fn new(case: &'a NetworkCase) -> Self {
        let adj: Vec<Vec<usize>> = adjacency(case, &TopologyMask::empty())
            .into_iter()
            .map(|list| list.into_iter().map(|(nb, _)| nb).collect())
            .collect();
        PowerFlow {
            case,
            order: minimum_degree(&adj),
            admittances: case.branches().iter().map(branch_admittance).collect(),
            template: OnceLock::new(),
        }
    }

    pub fn case(&self) -> &'a NetworkCase {
        self.case
    }

    /// Solves the masked topology.
    ///
    /// `start` warm-starts from an earlier solution on the same case. A
    /// non-converged result is returned as `Ok` with `converged == false`;
    /// errors are reserved for inputs on which no power flow is defined.
    pub fn solve(
        &self,
        mask: &TopologyMask,
        start: Option<&PowerFlowSolution>,
        params: &SolverParams,
    ) -> Result<PowerFlowSolution> {
        let case = self.case;
        mask.check(case)?;
        let labels = connected_components(case, mask);
        let components = labels.iter().max().map_or(0, |m| m + 1);
        if components > 1 {
            return Err(Error::Disconnected { components });
        }
        let n = case.bus_count();
        let slack = case
            .buses()
            .iter()
            .position(|b| b.bus_type == BusType::Slack)
            .ok_or(Error::NoSlack)?;

        let mut types = vec![BusType::PQ; n];
        let mut v_set = vec![None; n];
        for (i, bus) in case.buses().iter().enumerate() {
            let first = case.generators_at(bus.id, mask).next();
            if i == slack {
                types[i] = BusType::Slack;
                v_set[i] = Some(first.map_or(bus.v_init, |g| g.v_set));
            } else if bus.bus_type != BusType::PQ && first.is_some() {
                types[i] = BusType::PV;
                v_set[i] = first.map(|g| g.v_set);
            }
        }

        let (mut vm, mut va) = match start {
            Some(s) if s.v_mag.len() == n && s.v_ang.len() == n => (s.v_mag.clone(), s.v_ang.clone()),
            Some(_) => {
                return Err(Error::Config("warm start does not match the case size".into()));
            }
            None if params.flat_start => (vec![1.0; n], vec![0.0; n]),
            None => (
                case.buses().iter().map(|b| b.v_init).collect(),
                case.buses().iter().map(|b| b.angle_init.to_radians()).collect(),
            ),
        };
        for i in 0..n {
            if let Some(v) = v_set[i] {
                vm[i] = v;
            }
        }

        let ybus = assemble(case, mask, Some(&self.admittances), true);
        let mut q_fixed: Vec<Option<f64>> = vec![None; n];
        let mut q_limited = Vec::new();
        let mut iterations = 0;
        let mut passes = 0;
        let outcome = loop {
            let inj = injections(case, mask, &types, &q_fixed);
            let mut out = self.newton(&ybus, &types, &inj, &mut vm, &mut va, params);
            iterations += out.iterations;
            out.iterations = iterations;
            if !out.converged || passes >= params.qlim_passes {
                break out;
            }
            passes += 1;
            let hits = reactive_limit_hits(case, mask, &ybus, &types, &vm, &va);
            if hits.is_empty() {
                break out;
            }
            for (i, limit) in hits {
                types[i] = BusType::PQ;
                q_fixed[i] = Some(limit);
                q_limited.push((case.buses()[i].id, limit));
            }
        };

        let flows = compute_branch_flows(&vm, &va, case, mask);
        let s = injection_at(&ybus, &vm, &va, slack) * case.base_mva();
        let slack_bus = &case.buses()[slack];
        q_limited.sort_by_key(|&(b, _): &(BusId, f64)| b);
        Ok(PowerFlowSolution {
            v_mag: vm,
            v_ang: va,
            converged: outcome.converged,
            iterations: outcome.iterations,
            max_mismatch: outcome.max_mismatch,
            branch_flows: flows,
            slack_p_mw: s.re + slack_bus.active_load,
            slack_q_mvar: s.im + slack_bus.reactive_load,
            bus_types: types,
            q_limited,
            diagnostic: outcome.diagnostic,
        })
    }

    /// Newton iterations for fixed bus types.
    ///
    /// Every non-slack bus carries both an angle and a magnitude unknown; a PV
    /// bus pins its magnitude with a unit row in place of its reactive
    /// equation. The Jacobian pattern is therefore the same for every
    /// topology and bus-type assignment, and the pivot sequence of the first
    /// factorization is reused until it stops being numerically sound.
    fn newton(
        &self,
        ybus: &AdmittanceMatrix,
        types: &[BusType],
        inj: &Injections,
        vm: &mut [f64],
        va: &mut [f64],
        params: &SolverParams,
    ) -> NewtonOutcome {
        let n = types.len();
        // unknowns follow the elimination order so the LU sees a low-fill pattern
        let mut var = vec![NONE; n];
        let mut dim = 0;
        for &i in &self.order {
            if types[i] != BusType::Slack {
                var[i] = dim;
                dim += 2;
            }
        }

        let jj = Complex64::i();
        let eval = |vm: &[f64], va: &[f64]| {
            let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
            let cur = ybus.mul(&v);
            let s: Vec<Complex64> = (0..n).map(|i| v[i] * cur[i].conj()).collect();
            let mut f = vec![0.0; dim];
            for i in 0..n {
                if var[i] != NONE {
                    f[var[i]] = s[i].re - inj.p[i];
                    if types[i] == BusType::PQ {
                        f[var[i] + 1] = s[i].im - inj.q[i];
                    }
                }
            }
            (v, cur, s, f)
        };
        let sq_norm = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>();

        let mut iterations = 0;
        let mut jac: Option<CscMatrix> = None;
        let mut lu: Option<LuFactors> = None;
        let mut vals = Vec::with_capacity(4 * ybus.nnz());
        let (mut v, mut cur, mut s, mut f) = eval(vm, va);
        loop {
            let worst = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if !worst.is_finite() || worst > BLOWUP {
                return NewtonOutcome {
                    converged: false,
                    iterations,
                    max_mismatch: worst,
                    diagnostic: Some(format!("diverged after {iterations} iterations")),
                };
            }
            if worst <= params.tol {
                return NewtonOutcome {
                    converged: true,
                    iterations,
                    max_mismatch: worst,
                    diagnostic: None,
                };
            }
            if iterations >= params.max_iter {
                return NewtonOutcome {
                    converged: false,
                    iterations,
                    max_mismatch: worst,
                    diagnostic: Some(format!(
                        "no convergence in {iterations} iterations, mismatch {worst:.3e} p.u."
                    )),
                };
            }

            vals.clear();
            for i in 0..n {
                let r = var[i];
                if r == NONE {
                    continue;
                }
                let pq = types[i] == BusType::PQ;
                let vi = v[i];
                for (j, y) in ybus.row(i) {
                    if var[j] == NONE {
                        continue;
                    }
                    let vn = v[j] / vm[j];
                    let (d_ang, d_mag) = if j == i {
                        (
                            jj * (s[i] - vi * (y * vi).conj()),
                            vi * (y * vn).conj() + cur[i].conj() * vn,
                        )
                    } else {
                        (-jj * vi * (y * v[j]).conj(), vi * (y * vn).conj())
                    };
                    // a PV magnitude is not an unknown: its row and column reduce to the identity
                    let q_ang = if pq { d_ang.im } else { 0.0 };
                    let (p_mag, q_mag) = match (pq, types[j] == BusType::PQ) {
                        (true, true) => (d_mag.re, d_mag.im),
                        (false, true) => (d_mag.re, 0.0),
                        _ => (0.0, if j == i { 1.0 } else { 0.0 }),
                    };
                    vals.extend_from_slice(&[d_ang.re, q_ang, p_mag, q_mag]);
                }
            }
            let template = self.template.get_or_init(|| JacobianTemplate::new(ybus, &var, dim));
            let matrix = jac.get_or_insert_with(|| template.pattern.clone());
            matrix.fill_slots(&template.slots, &vals);

            let mut reused = match lu.as_mut() {
                Some(f) => f.refactor(matrix, PIVOT_THRESHOLD).is_ok(),
                None => false,
            };
            if !reused && lu.is_none() {
                if let Some(seed) = template.lu.get() {
                    let mut f = seed.clone();
                    reused = f.refactor(matrix, PIVOT_THRESHOLD).is_ok();
                    if reused {
                        lu = Some(f);
                    }
                }
            }
            if !reused {
                match LuFactors::factor(matrix, PIVOT_THRESHOLD) {
                    Ok(f) => {
                        let _ = template.lu.set(f.clone());
                        lu = Some(f);
                    }
                    Err(_) => {
                        return NewtonOutcome {
                            converged: false,
                            iterations,
                            max_mismatch: worst,
                            diagnostic: Some(format!("singular Jacobian at iteration {iterations}")),
                        }
                    }
                }
            }
            let lu = lu.as_ref().expect("factored above");
            let mut dx: Vec<f64> = f.iter().map(|x| -x).collect();
            lu.solve_in_place(&mut dx);

            // full Newton step unless it increases the residual norm; then halve
            let merit = sq_norm(&f);
            let (vm0, va0) = (vm.to_vec(), va.to_vec());
            let mut alpha = 1.0;
            loop {
                for i in 0..n {
                    if var[i] != NONE {
                        va[i] = va0[i] + alpha * dx[var[i]];
                        if types[i] == BusType::PQ {
                            vm[i] = vm0[i] + alpha * dx[var[i] + 1];
                        }
                    }
                }
                let trial = eval(vm, va);
                if sq_norm(&trial.3) < merit || alpha <= MIN_STEP {
                    (v, cur, s, f) = trial;
                    break;
                }
                alpha *= 0.5;
            }
            iterations += 1;
        }
    }
}

/// Jacobian sparsity pattern shared by all topologies of a case, and the
/// first numerically sound factorization as a pivot-sequence seed.
#[derive(Debug, Clone)]
struct JacobianTemplate {
    pattern: CscMatrix,
    slots: Vec<usize>,
    lu: OnceLock<LuFactors>,
}

impl JacobianTemplate {
    // must visit entries in the same order as the value fill in `newton`
    fn new(ybus: &AdmittanceMatrix, var: &[usize], dim: usize) -> Self {
        let mut coords = Vec::with_capacity(4 * ybus.nnz());
        for (i, &r) in var.iter().enumerate() {
            if r == NONE {
                continue;
            }
            for (j, _) in ybus.row(i) {
                let c = var[j];
                if c != NONE {
                    coords.extend_from_slice(&[(r, c), (r + 1, c), (r, c + 1), (r + 1, c + 1)]);
                }
            }
        }
        let (pattern, slots) = CscMatrix::with_slots(dim, dim, &coords);
        JacobianTemplate {
            pattern,
            slots,
            lu: OnceLock::new(),
        }
    }
}

/// One-shot solve; see [`PowerFlow::solve`].
pub fn solve_power_flow(
    case: &NetworkCase,
    mask: &TopologyMask,
    start: Option<&PowerFlowSolution>,
    params: &SolverParams,
) -> Result<PowerFlowSolution> {
    PowerFlow::new(case).solve(mask, start, params)
}

/// Scheduled net injections in p.u.; Q only matters at PQ buses.
fn injections(case: &NetworkCase, mask: &TopologyMask, types: &[BusType], q_fixed: &[Option<f64>]) -> Injections {
    let base = case.base_mva();
    let mut p = Vec::with_capacity(types.len());
    let mut q = Vec::with_capacity(types.len());
    for (i, bus) in case.buses().iter().enumerate() {
        let (pg, qg) = case
            .generators_at(bus.id, mask)
            .fold((0.0, 0.0), |(a, b), g| (a + g.p_set, b + g.q_set));
        let qg = q_fixed[i].unwrap_or(qg);
        p.push((pg - bus.active_load) / base);
        q.push(if types[i] == BusType::PQ { (qg - bus.reactive_load) / base } else { 0.0 });
    }
    Injections { p, q }
}

fn injection_at(ybus: &AdmittanceMatrix, vm: &[f64], va: &[f64], i: usize) -> Complex64 {
    let vi = Complex64::from_polar(vm[i], va[i]);
    let cur: Complex64 = ybus.row(i).map(|(j, y)| y * Complex64::from_polar(vm[j], va[j])).sum();
    vi * cur.conj()
}

/// PV buses whose generators would have to leave their reactive range, with
/// the limit each one is pinned to.
fn reactive_limit_hits(
    case: &NetworkCase,
    mask: &TopologyMask,
    ybus: &AdmittanceMatrix,
    types: &[BusType],
    vm: &[f64],
    va: &[f64],
) -> Vec<(usize, f64)> {
    let base = case.base_mva();
    let mut hits = Vec::new();
    for (i, bus) in case.buses().iter().enumerate() {
        if types[i] != BusType::PV {
            continue;
        }
        let (qmin, qmax) = case
            .generators_at(bus.id, mask)
            .fold((0.0, 0.0), |(lo, hi), g| (lo + g.q_min, hi + g.q_max));
        let qg = injection_at(ybus, vm, va, i).im * base + bus.reactive_load;
        if qg > qmax + QLIM_TOL {
            hits.push((i, qmax));
        } else if qg < qmin - QLIM_TOL {
            hits.push((i, qmin));
        }
    }
    hits
}

/// Largest power mismatch of a solution, recomputed term by term in
/// polar-trigonometric form, independently of the solver's complex arithmetic.
pub fn mismatch_certificate(case: &NetworkCase, mask: &TopologyMask, solution: &PowerFlowSolution) -> f64 {
    let ybus = assemble(case, mask, None, false);
    let n = case.bus_count();
    let mut q_fixed = vec![None; n];
    for &(bus, q) in &solution.q_limited {
        if let Some(i) = case.bus_position(bus) {
            q_fixed[i] = Some(q);
        }
    }
    let inj = injections(case, mask, &solution.bus_types, &q_fixed);
    let (vm, va) = (&solution.v_mag, &solution.v_ang);
    let mut worst = 0.0f64;
    for i in 0..n {
        if solution.bus_types[i] == BusType::Slack {
            continue;
        }
        let (mut p, mut q) = (0.0, 0.0);
        for (j, y) in ybus.row(i) {
            let (g, b) = (y.re, y.im);
            let th = va[i] - va[j];
            p += vm[i] * vm[j] * (g * th.cos() + b * th.sin());
            q += vm[i] * vm[j] * (g * th.sin() - b * th.cos());
        }
        worst = worst.max((p - inj.p[i]).abs());
        if solution.bus_types[i] == BusType::PQ {
            worst = worst.max((q - inj.q[i]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::testing::{ring, triangle, two_bus};
    use crate::network::BranchId;

    #[test]
    fn zero_load_converges_immediately() {
        let sol = solve_power_flow(&triangle(0.1), &TopologyMask::empty(), None, &SolverParams::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.iterations <= 2);
        assert!(sol.branch_flows.iter().all(|f| f.loading() < 1e-6));
    }

    #[test]
    fn two_bus_lossless_angle() {
        // P = V1 V2 sin(d) / x with both magnitudes solved; check the certificate instead
        let case = two_bus(50.0, 0.1);
        let sol = solve_power_flow(&case, &TopologyMask::empty(), None, &SolverParams::default()).unwrap();
        assert!(sol.converged);
        let p = sol.v_mag[0] * sol.v_mag[1] * (sol.v_ang[0] - sol.v_ang[1]).sin() / 0.1 * 100.0;
        assert!((p - 50.0).abs() < 1e-6);
        assert!(mismatch_certificate(&case, &TopologyMask::empty(), &sol) < 1e-8);
        assert!((sol.slack_p_mw - 50.0).abs() < 1e-6);
    }

    #[test]
    fn warm_start_is_not_slower() {
        let (name, base, mut buses, branches, gens) = ring(6, true).into_parts();
        for b in buses.iter_mut().skip(1) {
            b.active_load = 20.0;
            b.reactive_load = 5.0;
        }
        let case = NetworkCase::new(name, base, buses, branches, gens).unwrap();
        let params = SolverParams::default();
        let pf = PowerFlow::new(&case);
        let base = pf.solve(&TopologyMask::empty(), None, &params).unwrap();
        let mask = TopologyMask::branches([BranchId(2)]);
        let cold = pf.solve(&mask, None, &params).unwrap();
        let warm = pf.solve(&mask, Some(&base), &params).unwrap();
        assert!(cold.converged && warm.converged);
        assert!(warm.iterations <= cold.iterations);
        for (a, b) in cold.v_ang.iter().zip(&warm.v_ang) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let case = two_bus(50.0, 0.1);
        let params = SolverParams { max_iter: 0, ..SolverParams::default() };
        let sol = solve_power_flow(&case, &TopologyMask::empty(), None, &params).unwrap();
        assert!(!sol.converged);
        assert!(sol.diagnostic.is_some());
    }

    #[test]
    fn impossible_transfer_does_not_converge() {
        let case = two_bus(5000.0, 0.1);
        let sol = solve_power_flow(&case, &TopologyMask::empty(), None, &SolverParams::default()).unwrap();
        assert!(!sol.converged);
    }

    #[test]
    fn reactive_limit_switches_bus() {
        let (name, base, mut buses, branches, mut gens) = ring(4, false).into_parts();
        buses[2].bus_type = BusType::PV;
        buses[2].reactive_load = 80.0;
        gens.push(crate::network::testing::generator(gens.len() + 1, 3, 0.0, 1.05));
        let last = gens.len() - 1;
        gens[last].q_max = 10.0;
        gens[last].q_min = -10.0;
        let case = NetworkCase::new(name, base, buses, branches, gens).unwrap();
        let sol = solve_power_flow(&case, &TopologyMask::empty(), None, &SolverParams::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.q_limited, vec![(BusId(3), 10.0)]);
        assert_eq!(sol.bus_types[2], BusType::PQ);
        assert!(mismatch_certificate(&case, &TopologyMask::empty(), &sol) < 1e-8);

        let off = SolverParams { qlim_passes: 0, ..SolverParams::default() };
        let free = solve_power_flow(&case, &TopologyMask::empty(), None, &off).unwrap();
        assert!(free.q_limited.is_empty());
        assert!((free.v_mag[2] - 1.05).abs() < 1e-12);
    }
}
