//! Newton-Raphson power flow against an independent dense solver, plus
//! physical invariants of converged states.

mod common;

use common::{load, non_bridges, random_network, Shape};
use proptest::prelude::*;
use tntc::acpf::{mismatch_certificate, solve_power_flow, PowerFlowSolution, SolverParams};
use tntc::network::testing::{ring, two_bus};
use tntc::network::{BusType, NetworkCase, TopologyMask};

fn no_qlim() -> SolverParams {
    SolverParams {
        qlim_passes: 0,
        ..SolverParams::default()
    }
}

fn certified(case: &NetworkCase, mask: &TopologyMask, sol: &PowerFlowSolution) {
    assert!(sol.converged, "{:?}", sol.diagnostic);
    let cert = mismatch_certificate(case, mask, sol);
    assert!(cert <= 1e-8, "mismatch certificate {cert:e}");
}

/// Dense polar Newton with a finite-difference Jacobian and real-valued
/// branch equations written out term by term.
mod oracle {
    use tntc::network::{BusType, NetworkCase};

    struct Setup {
        slack: usize,
        pv: Vec<bool>,
        p: Vec<f64>,
        q: Vec<f64>,
    }

    fn setup(case: &NetworkCase, vm: &mut [f64]) -> Setup {
        let base = case.base_mva();
        let n = case.bus_count();
        let mut s = Setup {
            slack: usize::MAX,
            pv: vec![false; n],
            p: vec![0.0; n],
            q: vec![0.0; n],
        };
        for (i, b) in case.buses().iter().enumerate() {
            let gens: Vec<_> = case.generators().iter().filter(|g| g.in_service && g.bus == b.id).collect();
            s.p[i] = (gens.iter().map(|g| g.p_set).sum::<f64>() - b.active_load) / base;
            s.q[i] = (gens.iter().map(|g| g.q_set).sum::<f64>() - b.reactive_load) / base;
            if b.bus_type != BusType::PQ && !gens.is_empty() {
                vm[i] = gens[0].v_set;
                if b.bus_type == BusType::Slack && s.slack == usize::MAX {
                    s.slack = i;
                } else {
                    s.pv[i] = true;
                }
            }
        }
        s
    }

    /// Net (P, Q) leaving each bus into the network, p.u.
    pub fn injections(case: &NetworkCase, vm: &[f64], va: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let base = case.base_mva();
        let n = case.bus_count();
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for (i, b) in case.buses().iter().enumerate() {
            p[i] += b.shunt_conductance / base * vm[i] * vm[i];
            q[i] -= b.shunt_susceptance / base * vm[i] * vm[i];
        }
        for br in case.branches().iter().filter(|b| b.in_service) {
            let f = case.bus_position(br.from_bus).unwrap();
            let t = case.bus_position(br.to_bus).unwrap();
            let z2 = br.r * br.r + br.x * br.x;
            let (g, b) = (br.r / z2, -br.x / z2);
            let bc = br.charging_susceptance / 2.0;
            let tau = br.tap_ratio;
            let shift = br.phase_shift.to_radians();
            let (vf, vt) = (vm[f], vm[t]);
            let df = va[f] - va[t] - shift;
            let dt = va[t] - va[f] + shift;
            p[f] += g * vf * vf / (tau * tau) - vf * vt / tau * (g * df.cos() + b * df.sin());
            q[f] += -(b + bc) * vf * vf / (tau * tau) - vf * vt / tau * (g * df.sin() - b * df.cos());
            p[t] += g * vt * vt - vf * vt / tau * (g * dt.cos() + b * dt.sin());
            q[t] += -(b + bc) * vt * vt - vf * vt / tau * (g * dt.sin() - b * dt.cos());
        }
        (p, q)
    }

    fn gauss(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
        let n = rhs.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            rhs.swap(k, p);
            for i in k + 1..n {
                let l = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= l * a[k][j];
                }
                rhs[i] -= l * rhs[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (rhs[k] - s) / a[k][k];
        }
        x
    }

    pub fn solve(case: &NetworkCase) -> (Vec<f64>, Vec<f64>) {
        let n = case.bus_count();
        let mut vm = vec![1.0; n];
        let mut va = vec![0.0; n];
        let s = setup(case, &mut vm);
        // unknowns: angles of non-slack buses, magnitudes of PQ buses
        let mut vars: Vec<(usize, bool)> = (0..n).filter(|&i| i != s.slack).map(|i| (i, false)).collect();
        vars.extend((0..n).filter(|&i| i != s.slack && !s.pv[i]).map(|i| (i, true)));
        let residual = |vm: &[f64], va: &[f64]| -> Vec<f64> {
            let (p, q) = injections(case, vm, va);
            vars.iter()
                .map(|&(i, mag)| if mag { q[i] - s.q[i] } else { p[i] - s.p[i] })
                .collect()
        };
        for _ in 0..50 {
            let f = residual(&vm, &va);
            if f.iter().all(|x| x.abs() < 1e-12) {
                break;
            }
            let h = 1e-7;
            let mut jac = vec![vec![0.0; vars.len()]; vars.len()];
            for (col, &(i, mag)) in vars.iter().enumerate() {
                let (mut vp, mut ap) = (vm.clone(), va.clone());
                let (mut vn, mut an) = (vm.clone(), va.clone());
                if mag {
                    vp[i] += h;
                    vn[i] -= h;
                } else {
                    ap[i] += h;
                    an[i] -= h;
                }
                let (fp, fn_) = (residual(&vp, &ap), residual(&vn, &an));
                for row in 0..vars.len() {
                    jac[row][col] = (fp[row] - fn_[row]) / (2.0 * h);
                }
            }
            let dx = gauss(jac, f.iter().map(|x| -x).collect());
            for (&(i, mag), d) in vars.iter().zip(dx) {
                if mag {
                    vm[i] += d;
                } else {
                    va[i] += d;
                }
            }
        }
        (vm, va)
    }
}

fn loaded_ring() -> NetworkCase {
    let (name, base, mut buses, branches, gens) = ring(6, true).into_parts();
    for b in buses.iter_mut().skip(1) {
        b.active_load = 20.0;
        b.reactive_load = 5.0;
    }
    NetworkCase::new(name, base, buses, branches, gens).unwrap()
}

#[test]
fn agrees_with_dense_oracle() {
    let mut cases = vec![two_bus(80.0, 0.1), loaded_ring()];
    cases.extend([3u64, 11, 29].map(|s| random_network(s, Shape::ac(12))));
    cases.push(load("rts24_revised.m"));
    cases.push(load("case24_ieee_rts.m"));
    for case in &cases {
        let sol = solve_power_flow(case, &TopologyMask::empty(), None, &no_qlim()).unwrap();
        certified(case, &TopologyMask::empty(), &sol);
        let (vm, va) = oracle::solve(case);
        for i in 0..case.bus_count() {
            assert!((sol.v_mag[i] - vm[i]).abs() < 1e-6, "{}: vm at {i}", case.name());
            assert!((sol.v_ang[i] - va[i]).abs() < 1e-6, "{}: va at {i}", case.name());
        }
        // branch flows also agree with the oracle's bus sums
        let (p, _) = oracle::injections(case, &vm, &va);
        let slack = case.buses().iter().position(|b| b.bus_type == BusType::Slack).unwrap();
        let slack_gen_mw = p[slack] * case.base_mva() + case.buses()[slack].active_load;
        assert!((sol.slack_p_mw - slack_gen_mw).abs() < 1e-4, "{}", case.name());
    }
}

#[test]
fn reactive_limits_keep_certificate() {
    for name in ["rts24_revised.m", "case24_ieee_rts.m"] {
        let case = load(name);
        let sol = solve_power_flow(&case, &TopologyMask::empty(), None, &SolverParams::default()).unwrap();
        certified(&case, &TopologyMask::empty(), &sol);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn warm_start_reaches_the_same_root(seed in 0u64..5_000, n in 6usize..=20) {
        let case = random_network(seed, Shape::ac(n));
        let params = no_qlim();
        let mask = TopologyMask::empty();
        let flat = solve_power_flow(&case, &mask, None, &SolverParams { flat_start: true, ..params }).unwrap();
        prop_assume!(flat.converged);
        certified(&case, &mask, &flat);
        // start from a converged state of a neighbouring topology
        let c = non_bridges(&case, &mask);
        prop_assume!(!c.is_empty());
        let other = solve_power_flow(&case, &TopologyMask::branches([c[0]]), None, &params).unwrap();
        prop_assume!(other.converged);
        let warm = solve_power_flow(&case, &mask, Some(&other), &params).unwrap();
        certified(&case, &mask, &warm);
        for i in 0..n {
            prop_assert!((warm.v_mag[i] - flat.v_mag[i]).abs() <= 10.0 * params.tol);
            prop_assert!((warm.v_ang[i] - flat.v_ang[i]).abs() <= 10.0 * params.tol);
        }
    }

    #[test]
    fn generation_covers_load_and_losses(seed in 0u64..5_000, n in 6usize..=20) {
        let case = random_network(seed, Shape::ac(n));
        let sol = solve_power_flow(&case, &TopologyMask::empty(), None, &no_qlim()).unwrap();
        prop_assume!(sol.converged);
        certified(&case, &TopologyMask::empty(), &sol);
        let other_gen: f64 = case.generators().iter().filter(|g| g.bus != case.buses()[0].id).map(|g| g.p_set).sum();
        let load: f64 = case.buses().iter().map(|b| b.active_load).sum();
        let losses: f64 = sol.branch_flows.iter().map(|f| f.losses_mw()).sum();
        prop_assert!((sol.slack_p_mw + other_gen - load - losses).abs() < 1e-6);
        for f in &sol.branch_flows {
            prop_assert!(f.losses_mw() >= -1e-9, "branch {} loses {}", f.branch, f.losses_mw());
        }
    }

    #[test]
    fn lossless_flows_are_antisymmetric(seed in 0u64..5_000, n in 6usize..=20) {
        let case = random_network(seed, Shape::dc(n));
        let sol = solve_power_flow(&case, &TopologyMask::empty(), None, &no_qlim()).unwrap();
        prop_assume!(sol.converged);
        certified(&case, &TopologyMask::empty(), &sol);
        for f in &sol.branch_flows {
            prop_assert!((f.p_from + f.p_to).abs() < 1e-9);
        }
    }
}
