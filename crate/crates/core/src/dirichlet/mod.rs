//! Dirichlet systems over `O_S`: the positive chamber and its central ray,
//! an exhaustive solver, and the ε-improvability tests.

mod ray;
mod short;
mod solve;

pub use ray::{central_ray_point, central_ray_schedule, RayPoint, PRODUCT_TOL};
pub use solve::{
    exact_matrices, is_improvable_at, residual_norms, scan_di, solve_dirichlet, DirichletInstance,
    DirichletSolution, ScanReport, ScanRow,
};
