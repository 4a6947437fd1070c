use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("unsupported mesh format: {0}")]
    UnsupportedVersion(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("element {element} references unknown vertex {vertex}")]
    DanglingVertex { element: usize, vertex: usize },
    #[error("tetrahedron {0} is degenerate (zero volume)")]
    DegenerateTet(usize),
    #[error("boundary edge ({0}, {1}) is shared by {2} boundary faces, expected 2")]
    NonManifoldEdge(usize, usize, usize),
    #[error("face {0:?} is shared by {1} tetrahedra")]
    NonManifoldFace([usize; 3], usize),
    #[error("boundary surface is not consistently orientable at edge ({0}, {1})")]
    Unorientable(usize, usize),
    #[error("mesh has no tetrahedra")]
    Empty,
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("coefficient is not symmetric positive definite at {point:?} (smallest eigenvalue {min_eig:e})")]
    NotSpd { point: [f64; 3], min_eig: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("bessel argument |x| = {0} outside the series regime (|x| <= 50)")]
    BesselDomain(f64),
    #[error("point {0:?} lies outside the cylinder")]
    OutsideDomain([f64; 3]),
    #[error("line search failed after {iterations} iterations (gradient norm {grad_norm:e})")]
    LineSearch {
        iterations: usize,
        grad_norm: f64,
        last: Box<crate::wirtinger::BfgsResult>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
