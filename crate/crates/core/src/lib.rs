pub mod error;
pub mod number_field;
pub mod s_adic;
pub mod dirichlet;
pub mod lattice;
pub mod measures;
pub mod nondiv;
pub mod experiments;

pub use error::{Error, Result};
