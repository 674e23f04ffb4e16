//! Full AC power flow: admittance matrix, Newton-Raphson solve, branch flows
//! and limit checks.

mod flows;
mod limits;
mod newton;
mod ybus;

use serde::{Deserialize, Serialize};

use crate::network::{BranchId, BusId, BusType};

pub use flows::compute_branch_flows;
pub use limits::{check_limits, check_voltage_limits, Violation, ViolationSet, VoltageBound, VoltageViolation};
pub use newton::{mismatch_certificate, solve_power_flow, PowerFlow};
pub use ybus::{branch_admittance, build_ybus, AdmittanceMatrix, BranchAdmittance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Largest acceptable active/reactive mismatch, p.u.
    pub tol: f64,
    pub max_iter: usize,
    /// Outer passes of PV to PQ switching at reactive limits; 0 disables the check.
    pub qlim_passes: usize,
    /// Start from 1.0 p.u. / 0 rad instead of the case voltage profile when no
    /// warm start is given.
    pub flat_start: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tol: 1e-8,
            max_iter: 30,
            qlim_passes: 5,
            flat_start: false,
        }
    }
}

/// Both-end flows of one branch, in MW / MVAR / MVA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchFlow {
    pub branch: BranchId,
    /// False for branches that are out of service or masked; their flows are zero.
    pub in_service: bool,
    pub p_from: f64,
    pub q_from: f64,
    pub p_to: f64,
    pub q_to: f64,
    pub s_from: f64,
    pub s_to: f64,
}

impl BranchFlow {
    /// Apparent-power loading checked against ratings: the larger end.
    pub fn loading(&self) -> f64 {
        self.s_from.max(self.s_to)
    }

    pub fn losses_mw(&self) -> f64 {
        self.p_from + self.p_to
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowSolution {
    /// Per bus, in case order, p.u.
    pub v_mag: Vec<f64>,
    /// Per bus, in case order, radians.
    pub v_ang: Vec<f64>,
    pub converged: bool,
    /// Newton updates taken across all reactive-limit passes.
    pub iterations: usize,
    /// Largest mismatch at the returned state, p.u.
    pub max_mismatch: f64,
    pub branch_flows: Vec<BranchFlow>,
    pub slack_p_mw: f64,
    pub slack_q_mvar: f64,
    /// Bus types after reactive-limit switching.
    pub bus_types: Vec<BusType>,
    /// Buses switched to PQ, with the total generator MVAR they were pinned to.
    pub q_limited: Vec<(BusId, f64)>,
    pub diagnostic: Option<String>,
}

impl PowerFlowSolution {
    pub fn flow(&self, id: BranchId) -> &BranchFlow {
        &self.branch_flows[id.index()]
    }
}
