//! Problem data: material coefficients, frequency, source, target and
//! regularization weights.

use crate::error::{Error, Result};
use crate::mesh::Point;
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

pub type C64 = Complex64;
/// Complex 3-vector (field value).
pub type CVec3 = Vector3<C64>;

/// Complex vector field defined on the whole domain.
pub type VectorField = Arc<dyn Fn(&Point) -> CVec3 + Send + Sync>;

/// A symmetric positive definite material tensor, either constant or
/// sampled pointwise.
#[derive(Clone)]
pub enum Coefficient {
    Constant(Matrix3<f64>),
    Field(Arc<dyn Fn(&Point) -> Matrix3<f64> + Send + Sync>),
}

impl Coefficient {
    pub fn identity() -> Self {
        Self::scalar(1.0)
    }

    pub fn scalar(value: f64) -> Self {
        Self::Constant(Matrix3::identity() * value)
    }

    pub fn eval(&self, x: &Point) -> Matrix3<f64> {
        match self {
            Self::Constant(m) => *m,
            Self::Field(f) => f(x),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            Self::Field(_) => f.write_str("Field(..)"),
        }
    }
}

/// Checks symmetry and positive definiteness of a coefficient sample.
pub fn check_spd(m: &Matrix3<f64>, x: &Point) -> Result<()> {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax();
    let min_eig = m.symmetric_eigenvalues().min();
    if asym > 1e-12 * scale || !(min_eig > 0.0) {
        return Err(Error::NotSpd {
            point: [x.x, x.y, x.z],
            min_eig,
        });
    }
    Ok(())
}

/// Data of the state equation `curl(mu^-1 curl u) + i omega kappa u = j_c`
/// and of the tracking functional with weights `alpha` (surface curl) and
/// `beta` (surface L2).
#[derive(Clone)]
pub struct ProblemConfig {
    pub mu: Coefficient,
    pub kappa: Coefficient,
    pub omega: f64,
    pub source: Option<VectorField>,
    pub target: Option<VectorField>,
    pub alpha: f64,
    pub beta: f64,
    /// Relative residual accepted from the linear solver.
    pub solver_tol: f64,
    /// Polynomial degree for stiffness/mass/load assembly; `None` picks `2k + 2`.
    pub quad_degree: Option<usize>,
}

impl fmt::Debug for ProblemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemConfig")
            .field("mu", &self.mu)
            .field("kappa", &self.kappa)
            .field("omega", &self.omega)
            .field("source", &self.source.is_some())
            .field("target", &self.target.is_some())
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("solver_tol", &self.solver_tol)
            .field("quad_degree", &self.quad_degree)
            .finish()
    }
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            mu: Coefficient::identity(),
            kappa: Coefficient::identity(),
            omega: 1.0,
            source: None,
            target: None,
            alpha: 1e-3,
            beta: 0.0,
            solver_tol: 1e-10,
            quad_degree: None,
        }
    }
}

impl ProblemConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega != 0.0) {
            return Err(Error::Config(format!(
                "omega must be finite and nonzero, got {}",
                self.omega
            )));
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err(Error::Config(
                "regularization weights must be nonnegative".into(),
            ));
        }
        if self.alpha == 0.0 && self.beta == 0.0 {
            return Err(Error::Config("alpha and beta cannot both be zero".into()));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::Config("solver tolerance must be positive".into()));
        }
        for (name, c) in [("mu", &self.mu), ("kappa", &self.kappa)] {
            if let Coefficient::Constant(m) = c {
                check_spd(m, &Point::zeros()).map_err(|e| Error::Config(format!("{name}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn source_at(&self, x: &Point) -> CVec3 {
        self.source.as_ref().map_or_else(CVec3::zeros, |f| f(x))
    }

    pub fn target_at(&self, x: &Point) -> CVec3 {
        self.target.as_ref().map_or_else(CVec3::zeros, |f| f(x))
    }
}

/// Constant complex vector field.
pub fn constant_field(v: CVec3) -> VectorField {
    Arc::new(move |_| v)
}
