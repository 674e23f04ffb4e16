#![allow(dead_code)]

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tntc::network::testing::{bus, generator, line};
use tntc::network::{bridges, parse_case, BranchId, BusType, NetworkCase, TopologyMask};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn load(name: &str) -> NetworkCase {
    parse_case(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub buses: usize,
    /// resistance as a fraction of reactance
    pub r_over_x: f64,
    pub charging: bool,
    pub taps: bool,
}

impl Shape {
    pub fn dc(buses: usize) -> Self {
        Shape {
            buses,
            r_over_x: 0.0,
            charging: false,
            taps: false,
        }
    }

    pub fn ac(buses: usize) -> Self {
        Shape {
            buses,
            r_over_x: 0.15,
            charging: true,
            taps: true,
        }
    }
}

/// Connected meshed network: a random spanning tree plus about half as many
/// chords again. Bus 1 is the slack; a few buses carry voltage-regulating
/// generators, the rest light loads.
pub fn random_network(seed: u64, shape: Shape) -> NetworkCase {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = shape.buses;
    let mut buses = vec![bus(1, BusType::Slack, 0.0, 0.0)];
    let mut gens = vec![generator(1, 1, 0.0, 1.02)];
    for i in 2..=n as u32 {
        if rng.random_bool(0.2) {
            buses.push(bus(i, BusType::PV, 0.0, 0.0));
            gens.push(generator(gens.len() + 1, i, rng.random_range(10.0..60.0), 1.0));
        } else {
            buses.push(bus(
                i,
                BusType::PQ,
                rng.random_range(0.0..30.0),
                rng.random_range(0.0..8.0),
            ));
        }
    }

    let mut edges: Vec<(u32, u32)> = (2..=n as u32).map(|i| (rng.random_range(1..i), i)).collect();
    for _ in 0..(n / 2).max(2) {
        let a = rng.random_range(1..=n as u32);
        let b = rng.random_range(1..=n as u32);
        if a != b {
            edges.push((a, b));
        }
    }
    let branches = edges
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let x = rng.random_range(0.05..0.4);
            let charge = if shape.charging { rng.random_range(0.0..0.05) } else { 0.0 };
            let mut br = line(i + 1, a, b, shape.r_over_x * x, x, charge);
            if shape.taps && rng.random_bool(0.15) {
                br.tap_ratio = rng.random_range(0.95..1.05);
                br.kind = tntc::BranchKind::Transformer;
            }
            br
        })
        .collect();
    NetworkCase::new(format!("random-{seed}"), 100.0, buses, branches, gens).unwrap()
}

/// Random per-bus injections in MW, slack entry zero.
pub fn random_injections(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(-80.0..80.0)).collect();
    p[0] = 0.0;
    p
}

/// Branches whose individual removal keeps `mask` connected.
pub fn non_bridges(case: &NetworkCase, mask: &TopologyMask) -> Vec<BranchId> {
    let br = bridges(case, mask);
    case.branches()
        .iter()
        .filter(|b| case.branch_active(b, mask) && !br.contains(&b.id))
        .map(|b| b.id)
        .collect()
}
