//! Derivatives of real-valued functions of complex controls, the reduced
//! tracking functional with its adjoint-based gradient, finite-difference
//! validation and a BFGS minimizer.
//!
//! For a real function `f` of `z ∈ C^n` the directional derivative along a
//! direction `ξ` with real step `t` is `d f(z; ξ) = lim (f(z + tξ) − f(z))/t`.
//! Every such derivative is represented by a vector `G = ∂f/∂z̄` through
//! `d f(z; ξ) = 2 Re(ξ̄^T G)`, and `−G` is the steepest descent direction.
//! In the stacked real coordinates `(Re z, Im z)` the ordinary gradient is
//! `(2 Re G, 2 Im G)`.

mod bfgs;
mod problem;

pub use bfgs::{bfgs_minimize, history_csv, BfgsOptions, BfgsResult, IterRecord};
pub use problem::{ReducedGradient, ReducedProblem};

use crate::config::C64;
use crate::error::Result;
use serde::Serialize;

/// Value of the reduced cost and its parts
/// `J = J1 + J2 + J3`, `J1 = ½‖u − u_d‖²`, `J2 = (α/2)‖curl_Γ z‖²`, `J3 = (β/2)‖z‖²`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CostReport {
    pub j: f64,
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
}

impl CostReport {
    pub fn new(j1: f64, j2: f64, j3: f64) -> Self {
        Self {
            j: j1 + j2 + j3,
            j1,
            j2,
            j3,
        }
    }

    /// Cost with no breakdown (generic objectives).
    pub fn total(j: f64) -> Self {
        Self {
            j,
            j1: j,
            j2: 0.0,
            j3: 0.0,
        }
    }
}

/// A real-valued function of complex coefficients with its Wirtinger gradient.
pub trait Objective {
    fn dim(&self) -> usize;

    fn cost(&self, z: &[C64]) -> Result<CostReport>;

    /// Cost and `G = ∂f/∂z̄`.
    fn cost_and_gradient(&self, z: &[C64]) -> Result<(CostReport, Vec<C64>)>;
}

/// `2 Re(ξ̄^T G)`: the directional derivative represented by `G`.
pub fn pairing(g: &[C64], xi: &[C64]) -> f64 {
    2.0 * g
        .iter()
        .zip(xi)
        .map(|(g, x)| (x.conj() * g).re)
        .sum::<f64>()
}

/// `−G`.
pub fn steepest_descent_direction(g: &[C64]) -> Vec<C64> {
    g.iter().map(|x| -x).collect()
}

/// Euclidean norm of a complex vector.
pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `(Re z, Im z)`.
pub fn to_real(z: &[C64]) -> Vec<f64> {
    z.iter()
        .map(|c| c.re)
        .chain(z.iter().map(|c| c.im))
        .collect()
}

/// Inverse of [`to_real`].
pub fn from_real(x: &[f64]) -> Vec<C64> {
    let n = x.len() / 2;
    (0..n).map(|i| C64::new(x[i], x[n + i])).collect()
}

/// Gradient in the stacked real coordinates: `(2 Re G, 2 Im G)`.
pub fn real_gradient(g: &[C64]) -> Vec<f64> {
    to_real(g).into_iter().map(|v| 2.0 * v).collect()
}

/// One row of a finite-difference table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdRow {
    pub t: f64,
    pub quotient: f64,
    pub error: f64,
}

/// Compares `(f(z + tξ) − f(z))/t` with a derivative value for every step `t`.
pub fn fd_check(
    f: impl Fn(&[C64]) -> Result<f64>,
    z: &[C64],
    xi: &[C64],
    derivative: f64,
    steps: &[f64],
) -> Result<Vec<FdRow>> {
    let f0 = f(z)?;
    steps
        .iter()
        .map(|&t| {
            let zt: Vec<C64> = z.iter().zip(xi).map(|(a, b)| a + b * t).collect();
            let quotient = (f(&zt)? - f0) / t;
            Ok(FdRow {
                t,
                quotient,
                error: (quotient - derivative).abs(),
            })
        })
        .collect()
}

/// `t = 10^-1, ..., 10^-n`.
pub fn decade_steps(n: usize) -> Vec<f64> {
    (1..=n).map(|k| 10f64.powi(-(k as i32))).collect()
}

/// Least-squares slope of `log error` vs `log t` over the decay region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdFit {
    pub slope: f64,
    /// Decades of `t` spanned by the fitted region.
    pub decades: f64,
    /// Smallest error relative to `|derivative|` (round-off plateau).
    pub plateau: f64,
}

/// Fits the linear decay region: rows with decreasing `t` are taken from the
/// largest `t` down to the step with the smallest error, which marks the
/// onset of the round-off plateau.
pub fn fit_fd_slope(rows: &[FdRow], derivative: f64) -> FdFit {
    let mut sorted: Vec<FdRow> = rows.iter().copied().filter(|r| r.t > 0.0).collect();
    sorted.sort_by(|a, b| b.t.total_cmp(&a.t));
    let best = sorted
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.error.total_cmp(&b.1.error))
        .map_or(0, |(i, _)| i);
    let plateau = sorted.get(best).map_or(f64::NAN, |r| {
        r.error / derivative.abs().max(f64::MIN_POSITIVE)
    });
    let region: Vec<(f64, f64)> = sorted[..=best.min(sorted.len().saturating_sub(1))]
        .iter()
        .filter(|r| r.error > 0.0)
        .map(|r| (r.t.log10(), r.error.log10()))
        .collect();
    if region.len() < 2 {
        return FdFit {
            slope: f64::NAN,
            decades: 0.0,
            plateau,
        };
    }
    FdFit {
        slope: least_squares_slope(&region),
        decades: region[0].0 - region[region.len() - 1].0,
        plateau,
    }
}

/// Slope of the least-squares line through `(x, y)` points.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    num / den
}

#[cfg(test)]
mod tests;
