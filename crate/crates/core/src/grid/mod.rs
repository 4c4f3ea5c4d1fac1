//! Box-domain discretization: cell-centered fields, the discrete Neumann
//! Laplacian, quadrature norms and implicit Helmholtz solves.

mod domain;
mod field;
mod helmholtz;
pub(crate) mod laplacian;
mod norms;
pub mod snapshot;

pub use domain::BoxDomain;
pub use field::{ScalarField, State};
pub use helmholtz::{
    helmholtz_residual, helmholtz_solve, helmholtz_solve_cg, CgOptions, CgStats, HelmholtzMethod, HelmholtzSolver,
};
pub use laplacian::neumann_laplacian_apply;
pub use norms::{lp_norm, total_mass, MassSummary};
