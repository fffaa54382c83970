//! Measures on products of balls over the places of `S`: sampling, Federer
//! and Besicovitch constants, empirical `(C, α)`-good certification and
//! nonplanarity of polynomial maps.

mod good;
mod planar;
mod spec;

pub use good::{
    binomial, certify_good, combine_good_product, coordinate_abs, random_combinations, sublevel_fraction, Combination,
    GoodCert, GoodEvidence, ProductCert, SampleFn,
};
pub use planar::{check_nonplanar, estimate_rho_v, NonplanarReport, RhoEstimate, TAU_RANK};
pub use spec::{
    besicovitch_constant, federer_constant, sample_ball, MapSpec, MeasureSpec, PlaceBall, Polynomial, SamplePoint,
    CHUNK, SAMPLE_PREC,
};
