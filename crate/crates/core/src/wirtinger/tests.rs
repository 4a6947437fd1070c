use super::*;
use crate::error::Error;
use crate::mesh::generate_cube;
use crate::trace::SurfaceOperators;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// `f(z) = Σ |z_k|² + Re z_k`, minimized at `z_k = −½` with `G = z + ½`.
struct ShiftedNorm(usize);

impl Objective for ShiftedNorm {
    fn dim(&self) -> usize {
        self.0
    }
    fn cost(&self, z: &[C64]) -> crate::error::Result<CostReport> {
        Ok(CostReport::total(
            z.iter().map(|v| v.norm_sqr() + v.re).sum(),
        ))
    }
    fn cost_and_gradient(&self, z: &[C64]) -> crate::error::Result<(CostReport, Vec<C64>)> {
        Ok((self.cost(z)?, z.iter().map(|v| v + 0.5).collect()))
    }
}

/// `f(z) = ½ z^H M z − Re(b^H z)` with a real SPD `M`; `G = ½(M z − b)`.
struct Quadratic {
    m: crate::sparse::CsrMatrix<f64>,
    b: Vec<C64>,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn cost(&self, z: &[C64]) -> crate::error::Result<CostReport> {
        let lin: C64 = self.b.iter().zip(z).map(|(b, z)| b.conj() * z).sum();
        Ok(CostReport::total(0.5 * self.m.form(z, z).re - lin.re))
    }
    fn cost_and_gradient(&self, z: &[C64]) -> crate::error::Result<(CostReport, Vec<C64>)> {
        let mz = self.m.mul_vec_c(z);
        Ok((
            self.cost(z)?,
            mz.iter().zip(&self.b).map(|(a, b)| 0.5 * (a - b)).collect(),
        ))
    }
}

/// Unbounded below: no step length satisfies the curvature condition.
struct Linear;

impl Objective for Linear {
    fn dim(&self) -> usize {
        1
    }
    fn cost(&self, z: &[C64]) -> crate::error::Result<CostReport> {
        Ok(CostReport::total(-z[0].re))
    }
    fn cost_and_gradient(&self, z: &[C64]) -> crate::error::Result<(CostReport, Vec<C64>)> {
        Ok((self.cost(z)?, vec![c(-0.5, 0.0)]))
    }
}

#[test]
fn real_stacking_round_trips() {
    let z = random(5, 1);
    let x = to_real(&z);
    assert_eq!(x.len(), 10);
    assert_eq!(from_real(&x), z);
    let g = real_gradient(&z);
    assert_eq!(g[0], 2.0 * z[0].re);
    assert_eq!(g[5], 2.0 * z[0].im);
}

#[test]
fn pairing_represents_directional_derivative_of_squared_norm() {
    // f = |z|², G = z, df(z; ξ) = 2 Re(ξ̄ᵀ z)
    let z = random(4, 2);
    let xi = random(4, 3);
    let f = |v: &[C64]| Ok(v.iter().map(|x| x.norm_sqr()).sum::<f64>());
    let d = pairing(&z, &xi);
    let rows = fd_check(f, &z, &xi, d, &decade_steps(6)).unwrap();
    let xi_sq: f64 = xi.iter().map(|x| x.norm_sqr()).sum();
    for r in &rows {
        // the quotient error of a quadratic is exactly t |ξ|²
        assert!((r.error - r.t * xi_sq).abs() < 1e-8, "{r:?}");
    }
    let fit = fit_fd_slope(&rows, d);
    assert!((fit.slope - 1.0).abs() < 1e-3, "{fit:?}");
}

#[test]
fn pairing_is_real_linear_not_complex_linear() {
    let g = random(3, 4);
    let xi = random(3, 5);
    let scaled: Vec<C64> = xi.iter().map(|x| x * C64::i()).collect();
    let a = pairing(&g, &xi);
    let b = pairing(&g, &scaled);
    let expected: f64 = 2.0
        * g.iter()
            .zip(&xi)
            .map(|(g, x)| (x.conj() * g).im)
            .sum::<f64>();
    assert!((b - expected).abs() < 1e-14);
    assert!((pairing(&g, &steepest_descent_direction(&g)) + 2.0 * norm(&g).powi(2)).abs() < 1e-13);
    assert!((2.0 * a - pairing(&g, &xi.iter().map(|x| x * 2.0).collect::<Vec<_>>())).abs() < 1e-14);
}

#[test]
fn slope_fit_stops_at_the_plateau() {
    let rows: Vec<FdRow> = decade_steps(12)
        .into_iter()
        .map(|t| FdRow {
            t,
            quotient: 0.0,
            error: (t * t).max(1e-12),
        })
        .collect();
    let fit = fit_fd_slope(&rows, 1.0);
    assert!((fit.slope - 2.0).abs() < 1e-12);
    assert_eq!(fit.plateau, 1e-12);
    assert!((fit.decades - 5.0).abs() < 1e-12);
    assert!((least_squares_slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]) - 2.0).abs() < 1e-15);
}

#[test]
fn bfgs_finds_the_shifted_minimizer() {
    let z0 = random(6, 7);
    let res = bfgs_minimize(&ShiftedNorm(6), &z0, &BfgsOptions::default()).unwrap();
    assert!(res.converged);
    for v in &res.z {
        assert!((v - c(-0.5, 0.0)).norm() < 1e-9);
    }
    assert!((res.cost.j + 1.5).abs() < 1e-15);
    for w in res.history.windows(2) {
        assert!(w[1].cost.j <= w[0].cost.j);
    }
}

#[test]
fn bfgs_solves_the_surface_mass_model_problem() {
    let mesh = generate_cube(2).unwrap();
    let ops = SurfaceOperators::new(&mesh).unwrap();
    let b = random(ops.dim(), 9);
    let obj = Quadratic {
        m: ops.mass.clone(),
        b: b.clone(),
    };
    let res = bfgs_minimize(
        &obj,
        &vec![C64::default(); ops.dim()],
        &BfgsOptions {
            tol: 1e-11,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(res.converged, "{:?}", res.grad_norm);
    let residual: Vec<C64> = ops
        .mass
        .mul_vec_c(&res.z)
        .iter()
        .zip(&b)
        .map(|(a, b)| a - b)
        .collect();
    assert!(norm(&residual) < 3e-11);
    // cost at the minimizer is −½ b^H M^{-1} b = −½ Re(b^H z*)
    let lin: C64 = b.iter().zip(&res.z).map(|(b, z)| b.conj() * z).sum();
    assert!((res.cost.j + 0.5 * lin.re).abs() < 1e-12 * lin.norm());
    assert!(res.iterations < 200);
    let csv = history_csv(&res.history);
    assert!(csv.starts_with("iter,J,J1,J2,J3,grad_norm,step\n0,"));
    assert_eq!(csv.lines().count(), res.history.len() + 1);
}

#[test]
fn unbounded_objective_reports_line_search_failure() {
    let err = bfgs_minimize(
        &Linear,
        &[c(0.0, 0.0)],
        &BfgsOptions {
            max_iter: 50,
            ..Default::default()
        },
    );
    match err {
        Err(Error::LineSearch {
            iterations, last, ..
        }) => {
            // the slope never flattens, so the very first search fails from z0
            assert_eq!(iterations, 0);
            assert_eq!(last.z, vec![c(0.0, 0.0)]);
        }
        other => panic!("expected a line-search failure, got {other:?}"),
    }
}

#[test]
fn invalid_tolerance_is_rejected() {
    let res = bfgs_minimize(
        &ShiftedNorm(1),
        &[c(0.0, 0.0)],
        &BfgsOptions {
            tol: 0.0,
            ..Default::default()
        },
    );
    assert!(matches!(res, Err(Error::Config(_))));
}

#[test]
fn iteration_cap_is_honoured() {
    let res = bfgs_minimize(
        &ShiftedNorm(3),
        &random(3, 11),
        &BfgsOptions {
            max_iter: 0,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(!res.converged);
    assert_eq!(res.iterations, 0);
    assert_eq!(res.evaluations, 1);
}
