//! Linearized (DC) sensitivity factors on arbitrary topologies.

mod dc;
mod factors;

pub use dc::dc_flows;
pub use factors::{
    compute_ftdf, compute_lodf, compute_ptdf, compute_tsdf, write_factor_table, PtdfMatrix, SensitivityRecord,
    SwitchingFactors, ISLANDING_THRESHOLD,
};
