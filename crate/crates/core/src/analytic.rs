//! Closed-form fields of a cylindrical conductor driven by a total current,
//! expressed through modified Bessel functions of the first kind.
//!
//! With `γ = sqrt(i ω μ σ)` (principal branch) and `r = sqrt(x² + y²)`:
//!
//! * `H = ι/(2πR) · I₁(γr)/I₁(γR) · e_θ`
//! * `E = ιγ/(2πRσ) · I₀(γr)/I₁(γR) · e_z`
//! * `J = σE = curl H`
//!
//! `H` solves `curl(σ⁻¹ curl H) + iωμ H = 0`, i.e. the state equation with
//! volume coefficient `σ` in the curl term and `μ` in the mass term.

use crate::config::{CVec3, Coefficient, ProblemConfig, C64};
use crate::error::{Error, Result};
use crate::mesh::Point;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Largest argument modulus accepted by the power series.
pub const SERIES_LIMIT: f64 = 50.0;

/// `Σ_m (x/2)^{2m} / (m! (m+ν)!)`, the series of `I_ν(x) / (x/2)^ν`.
fn reduced_series(nu: u32, x: C64) -> C64 {
    let q = x * x * 0.25;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for m in 1..1000u32 {
        term *= q / (f64::from(m) * f64::from(m + nu));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn check_domain(x: C64) -> Result<()> {
    if !(x.norm() <= SERIES_LIMIT) {
        return Err(Error::BesselDomain(x.norm()));
    }
    Ok(())
}

/// Modified Bessel function `I_ν(x)` for `ν ∈ {0, 1}` and `|x| ≤ 50`.
pub fn bessel_i(nu: u32, x: C64) -> Result<C64> {
    check_domain(x)?;
    match nu {
        0 => Ok(reduced_series(0, x)),
        1 => Ok(0.5 * x * reduced_series(1, x)),
        _ => Err(Error::Config(format!(
            "Bessel order {nu} not supported (0 or 1)"
        ))),
    }
}

/// `I₁(x)/x`, regular at `x = 0` where it equals `1/2`.
pub fn bessel_i1_over_x(x: C64) -> Result<C64> {
    check_domain(x)?;
    Ok(0.5 * reduced_series(1, x))
}

/// Physical data of the single-electrode cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeParams {
    /// Total current `ι` through the cylinder cross-section (A).
    pub current: f64,
    pub omega: f64,
    pub mu: f64,
    pub sigma: f64,
    pub radius: f64,
    pub height: f64,
}

impl Default for ElectrodeParams {
    /// All parameters one except `R = ½`.
    fn default() -> Self {
        Self {
            current: 1.0,
            omega: 1.0,
            mu: 1.0,
            sigma: 1.0,
            radius: 0.5,
            height: 1.0,
        }
    }
}

impl ElectrodeParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.radius > 0.0
            && self.height > 0.0
            && self.mu > 0.0
            && self.sigma > 0.0
            && self.omega != 0.0
            && self.omega.is_finite()
            && self.current.is_finite();
        if !ok {
            return Err(Error::Config(format!(
                "invalid electrode parameters {self:?}"
            )));
        }
        check_domain(self.gamma() * self.radius)
    }

    /// `γ = sqrt(i ω μ σ)` on the principal branch (`Re γ > 0`).
    pub fn gamma(&self) -> C64 {
        (C64::i() * self.omega * self.mu * self.sigma).sqrt()
    }

    fn check_point(&self, p: &Point) -> Result<f64> {
        let r = p.x.hypot(p.y);
        let tol = 1e-9 * self.radius.max(self.height);
        if r > self.radius + tol || p.z < -tol || p.z > self.height + tol {
            return Err(Error::OutsideDomain([p.x, p.y, p.z]));
        }
        Ok(r)
    }

    /// Magnetic field with an explicit branch of `γ`.
    pub fn h_with_gamma(&self, p: &Point, gamma: C64) -> Result<CVec3> {
        let r = self.check_point(p)?;
        let i1_r = bessel_i(1, gamma * self.radius)?;
        // I₁(γr)/r · (−y, x, 0) equals I₁(γr) e_θ and stays regular on the axis
        let ratio = gamma * bessel_i1_over_x(gamma * r)? / i1_r;
        let c = ratio * (self.current / (2.0 * PI * self.radius));
        Ok(CVec3::new(-c * p.y, c * p.x, C64::default()))
    }

    /// Electric field with an explicit branch of `γ`.
    pub fn e_with_gamma(&self, p: &Point, gamma: C64) -> Result<CVec3> {
        let r = self.check_point(p)?;
        let ez = self.current * gamma / (2.0 * PI * self.radius * self.sigma)
            * bessel_i(0, gamma * r)?
            / bessel_i(1, gamma * self.radius)?;
        Ok(CVec3::new(C64::default(), C64::default(), ez))
    }

    pub fn exact_h(&self, p: &Point) -> Result<CVec3> {
        self.h_with_gamma(p, self.gamma())
    }

    pub fn exact_e(&self, p: &Point) -> Result<CVec3> {
        self.e_with_gamma(p, self.gamma())
    }

    /// Current density `J = σE`.
    pub fn exact_j(&self, p: &Point) -> Result<CVec3> {
        Ok(self.exact_e(p)? * C64::from(self.sigma))
    }

    /// `curl H`, which equals `J`.
    pub fn exact_curl_h(&self, p: &Point) -> Result<CVec3> {
        self.exact_j(p)
    }

    /// State problem whose solution is `H`: curl coefficient `σ`, mass
    /// coefficient `μ`, no source, target `u_d = H`.
    pub fn problem_config(&self, alpha: f64, beta: f64) -> ProblemConfig {
        let params = *self;
        ProblemConfig {
            mu: Coefficient::scalar(self.sigma),
            kappa: Coefficient::scalar(self.mu),
            omega: self.omega,
            source: None,
            target: Some(Arc::new(move |p: &Point| {
                params.exact_h(p).unwrap_or_else(|_| CVec3::zeros())
            })),
            alpha,
            beta,
            ..ProblemConfig::default()
        }
    }
}
