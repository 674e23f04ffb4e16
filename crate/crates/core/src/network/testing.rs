//! Small synthetic cases for tests, benches and examples.

use super::{Branch, BranchId, BranchKind, Bus, BusId, BusType, GenId, Generator, NetworkCase};

pub fn bus(id: u32, bus_type: BusType, p_load: f64, q_load: f64) -> Bus {
    Bus {
        id: BusId(id),
        bus_type,
        active_load: p_load,
        reactive_load: q_load,
        shunt_conductance: 0.0,
        shunt_susceptance: 0.0,
        base_kv: 230.0,
        v_min: 0.95,
        v_max: 1.05,
        v_init: 1.0,
        angle_init: 0.0,
    }
}

/// Line with 1-based id `id`; ratings 0 (unmonitored).
pub fn line(id: usize, from: u32, to: u32, r: f64, x: f64, b: f64) -> Branch {
    Branch {
        id: BranchId(id),
        from_bus: BusId(from),
        to_bus: BusId(to),
        r,
        x,
        charging_susceptance: b,
        tap_ratio: 1.0,
        phase_shift: 0.0,
        rate_normal: 0.0,
        rate_emergency: 0.0,
        in_service: true,
        kind: BranchKind::Line,
    }
}

pub fn generator(id: usize, bus: u32, p: f64, v_set: f64) -> Generator {
    Generator {
        id: GenId(id),
        bus: BusId(bus),
        p_set: p,
        q_set: 0.0,
        q_min: -9999.0,
        q_max: 9999.0,
        v_set,
        p_min: 0.0,
        p_max: 9999.0,
        in_service: true,
    }
}

/// Three buses, branches 1: 1-3, 2: 1-2, 3: 2-3, all with reactance `x`;
/// bus 3 is the slack and nothing is loaded.
pub fn triangle(x: f64) -> NetworkCase {
    NetworkCase::new(
        "triangle",
        100.0,
        vec![
            bus(1, BusType::PQ, 0.0, 0.0),
            bus(2, BusType::PQ, 0.0, 0.0),
            bus(3, BusType::Slack, 0.0, 0.0),
        ],
        vec![
            line(1, 1, 3, 0.0, x, 0.0),
            line(2, 1, 2, 0.0, x, 0.0),
            line(3, 2, 3, 0.0, x, 0.0),
        ],
        vec![generator(1, 3, 0.0, 1.0)],
    )
    .expect("triangle is valid")
}

/// Slack bus 1 feeding a PQ bus 2 over a single lossless line.
pub fn two_bus(load_mw: f64, x: f64) -> NetworkCase {
    NetworkCase::new(
        "two_bus",
        100.0,
        vec![bus(1, BusType::Slack, 0.0, 0.0), bus(2, BusType::PQ, load_mw, 0.0)],
        vec![line(1, 1, 2, 0.0, x, 0.0)],
        vec![generator(1, 1, load_mw, 1.0)],
    )
    .expect("two-bus case is valid")
}

/// Ring of `n` buses (branch i joins bus i and i+1, branch n closes the ring),
/// optionally with a pendant bus n+1 hung off bus 1 by branch n+1.
pub fn ring(n: u32, spur: bool) -> NetworkCase {
    let mut buses = vec![bus(1, BusType::Slack, 0.0, 0.0)];
    buses.extend((2..=n).map(|i| bus(i, BusType::PQ, 0.0, 0.0)));
    let mut branches: Vec<Branch> = (1..n)
        .map(|i| line(i as usize, i, i + 1, 0.01, 0.1, 0.0))
        .collect();
    branches.push(line(n as usize, n, 1, 0.01, 0.1, 0.0));
    if spur {
        buses.push(bus(n + 1, BusType::PQ, 0.0, 0.0));
        branches.push(line(n as usize + 1, 1, n + 1, 0.01, 0.1, 0.0));
    }
    NetworkCase::new("ring", 100.0, buses, branches, vec![generator(1, 1, 0.0, 1.0)])
        .expect("ring is valid")
}
