//! Boundary optimal control of the time-harmonic eddy-current equations.
//!
//! The state `u` solves `curl(μ⁻¹ curl u) + iωκ u = j_c` in a polyhedral
//! domain with tangential boundary data given by a control `z` on the
//! boundary surface. The control minimizes
//! `½‖u − u_d‖² + (α/2)‖curl_Γ z‖² + (β/2)‖z‖²`.
//!
//! Modules:
//! * [`mesh`]: tetrahedral meshes, boundary topology, MSH 2.2 input, generators;
//! * [`nedelec`]: Nédélec spaces of order 0 and 1, assembly, interpolation, error norms;
//! * [`trace`]: the surface control space, closed-form surface matrices, lifting;
//! * [`solver`]: state and adjoint solves sharing one sparse LU factorization;
//! * [`wirtinger`]: reduced cost and gradient, finite-difference checks, BFGS;
//! * [`analytic`]: Bessel-function solution on a cylinder.

pub mod analytic;
pub mod config;
pub mod error;
pub mod export;
pub mod mesh;
pub mod nedelec;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod study;
pub mod trace;
pub mod wirtinger;

pub use config::{CVec3, Coefficient, ProblemConfig, VectorField, C64};
pub use error::{Error, MeshError, Result};
pub use mesh::Mesh;
pub use nedelec::FeSpace;
pub use solver::StateOperator;
pub use trace::SurfaceOperators;
pub use wirtinger::ReducedProblem;
