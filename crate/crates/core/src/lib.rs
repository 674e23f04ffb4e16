//! Real-time contingency analysis with sensitivity-ranked corrective line switching.
//!
//! The pipeline runs an AC base case, simulates every credible N-1 outage,
//! picks the contingencies that overload branches beyond their emergency
//! rating, and for each of them ranks single-branch switching actions with
//! DC transmission switching distribution factors (TSDF) or flow transfer
//! distribution factors (FTDF). Ranked candidates are then checked with a
//! full AC solve and only Pareto improvements are kept.
//!
//! Module map:
//!
//! * [`network`] case model, MATPOWER parsing, connectivity and bridge detection
//! * [`acpf`] admittance matrix, Newton-Raphson power flow, flows and limit checks
//! * [`sensitivity`] DC power flow, PTDF, LODF, TSDF and FTDF
//! * [`rtca`] contingency list, contingency scan and critical selection
//! * [`tntc`] candidate ranking, AC evaluation, Pareto filter and summary metrics
//! * [`pipeline`] and [`report`] end-to-end orchestration and report emission

pub mod acpf;
pub mod error;
pub mod network;
pub mod par;
pub mod pipeline;
pub mod report;
pub mod rtca;
pub mod sensitivity;
pub mod sparse;
pub mod tntc;

pub use error::{Error, Result};
pub use network::{
    Branch, BranchId, BranchKind, Bus, BusId, BusType, GenId, Generator, NetworkCase, TopologyMask,
};
