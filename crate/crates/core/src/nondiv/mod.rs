//! Quantitative nondivergence: the explicit constants of the measure
//! estimate and Monte Carlo checks of both sides of the bound.

mod check;
mod constants;

pub use check::{
    di_measure_scan, map_lattice, qn_empirical_check, qn_rhs, CovolumeSup, DiScanReport, DiScanRow, DiScanSetup,
    NondivReport, QNConfig, QNRow,
};
pub use constants::{prop_constants, rho_tilde, PropConstants, PropInputs};
