//! Lattices `g·O_S^N` in `K_S^N`: the diagonal flow, shortest content,
//! the Dirichlet correspondence, exterior powers and covolumes of primitive
//! submodules.

mod basis;
mod search;
mod wedge;

pub use basis::{diag_flow, flow_lattice, named_value, tau, FlowData, SLatticeBasis};
pub use search::{
    check_correspondence, delta_below, delta_lattice, lattice_points_generic, lattice_points_in_content_ball,
    search_region, CorrespondenceReport, DeltaResult, LatticePoint, SearchMode, SearchRegion,
};
pub use wedge::{
    covolume_submodule, enumerate_primitive_submodules, plucker, subsets, wedge_action, PrimitiveSubmodule,
    Structure, WedgeVec,
};
