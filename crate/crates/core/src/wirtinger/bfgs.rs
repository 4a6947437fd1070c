//! BFGS on the stacked real coordinates `x = (Re z, Im z)` with a dense
//! inverse-Hessian approximation and a strong Wolfe line search.

use super::{from_real, norm, real_gradient, to_real, CostReport, Objective};
use crate::config::C64;
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BfgsOptions {
    /// Stop when `‖G‖ ≤ tol` (Euclidean norm of the Wirtinger gradient).
    pub tol: f64,
    pub max_iter: usize,
    /// Sufficient decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Function evaluations allowed per line search.
    pub max_line_search: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 5000,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub cost: CostReport,
    pub grad_norm: f64,
    /// Step length that produced this iterate (0 for the initial point).
    pub step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BfgsResult {
    #[serde(skip)]
    pub z: Vec<C64>,
    pub cost: CostReport,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Number of cost-and-gradient evaluations.
    pub evaluations: usize,
    /// Times the quasi-Newton direction failed to descend and was reset.
    pub resets: usize,
    pub history: Vec<IterRecord>,
}

/// Iteration history as CSV with header `iter,J,J1,J2,J3,grad_norm,step`.
pub fn history_csv(history: &[IterRecord]) -> String {
    let mut out = String::from("iter,J,J1,J2,J3,grad_norm,step\n");
    for r in history {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.iter, r.cost.j, r.cost.j1, r.cost.j2, r.cost.j3, r.grad_norm, r.step
        );
    }
    out
}

struct Point {
    x: Vec<f64>,
    cost: CostReport,
    g_complex: Vec<C64>,
    g: Vec<f64>,
}

struct Evaluator<'a> {
    obj: &'a dyn Objective,
    count: usize,
}

impl Evaluator<'_> {
    fn eval(&mut self, x: Vec<f64>) -> Result<Point> {
        self.count += 1;
        let (cost, g_complex) = self.obj.cost_and_gradient(&from_real(&x))?;
        let g = real_gradient(&g_complex);
        Ok(Point {
            x,
            cost,
            g_complex,
            g,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

/// Minimizer of the cubic interpolating `(a, fa, da)` and `(b, fb, db)`,
/// safeguarded into the interior of the bracket.
fn cubic_min(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let width = hi - lo;
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    let trial = if disc >= 0.0 {
        let d2 = (b - a).signum() * disc.sqrt();
        b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2)
    } else {
        f64::NAN
    };
    if trial.is_finite() && trial > lo + 0.1 * width && trial < hi - 0.1 * width {
        trial
    } else {
        lo + 0.5 * width
    }
}

/// Whether `f_new` satisfies sufficient decrease; decreases below the
/// round-off level of `f0` are accepted as long as `f` does not grow beyond it.
fn sufficient_decrease(f0: f64, f_new: f64, alpha: f64, slope0: f64, c1: f64) -> bool {
    let noise = 1e-14 * f0.abs();
    f_new <= f0 + c1 * alpha * slope0
        || (f_new - f0).abs() <= noise && c1 * alpha * slope0.abs() <= noise
}

fn line_search(
    ev: &mut Evaluator<'_>,
    start: &Point,
    d: &[f64],
    alpha0: f64,
    opts: &BfgsOptions,
) -> Result<Option<(f64, Point)>> {
    let f0 = start.cost.j;
    let slope0 = dot(&start.g, d);
    let curvature_ok = |p: &Point| dot(&p.g, d).abs() <= -opts.c2 * slope0;

    let (mut a_prev, mut f_prev, mut s_prev) = (0.0, f0, slope0);
    let mut alpha = alpha0;
    let mut budget = opts.max_line_search;
    let mut first = true;
    // bracketing phase
    let (mut lo, mut hi);
    loop {
        if budget == 0 {
            return Ok(None);
        }
        budget -= 1;
        let p = ev.eval(axpy(&start.x, alpha, d))?;
        let s = dot(&p.g, d);
        if !sufficient_decrease(f0, p.cost.j, alpha, slope0, opts.c1)
            || (!first && p.cost.j >= f_prev)
        {
            lo = (a_prev, f_prev, s_prev);
            hi = (alpha, p.cost.j, s);
            break;
        }
        if curvature_ok(&p) {
            return Ok(Some((alpha, p)));
        }
        if s >= 0.0 {
            lo = (alpha, p.cost.j, s);
            hi = (a_prev, f_prev, s_prev);
            break;
        }
        a_prev = alpha;
        f_prev = p.cost.j;
        s_prev = s;
        alpha *= 2.0;
        first = false;
    }
    // zoom phase
    while budget > 0 {
        budget -= 1;
        let a = cubic_min(lo.0, lo.1, lo.2, hi.0, hi.1, hi.2);
        let p = ev.eval(axpy(&start.x, a, d))?;
        let s = dot(&p.g, d);
        if !sufficient_decrease(f0, p.cost.j, a, slope0, opts.c1) || p.cost.j >= lo.1 {
            hi = (a, p.cost.j, s);
        } else {
            if curvature_ok(&p) {
                return Ok(Some((a, p)));
            }
            if s * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = (a, p.cost.j, s);
        }
        if (hi.0 - lo.0).abs() <= 1e-16 * lo.0.abs().max(1.0) {
            break;
        }
    }
    Ok(None)
}

/// Dense BFGS update of the inverse Hessian `H`:
/// `H ← (I − ρ s y^T) H (I − ρ y s^T) + ρ s s^T`, `ρ = 1/(y^T s)`.
fn update_inverse(h: &mut [f64], n: usize, s: &[f64], y: &[f64]) {
    let rho = 1.0 / dot(y, s);
    let hy: Vec<f64> = h.par_chunks(n).map(|row| dot(row, y)).collect();
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    h.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for j in 0..n {
            row[j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + coef * s[i] * s[j];
        }
    });
}

fn apply(h: &[f64], n: usize, g: &[f64]) -> Vec<f64> {
    h.par_chunks(n).map(|row| -dot(row, g)).collect()
}

/// Minimizes `obj` from `z0` until `‖G‖ ≤ tol`.
///
/// The cost history is nonincreasing. A quasi-Newton direction that fails
/// to descend triggers a reset to steepest descent; a line search that
/// cannot satisfy the Wolfe conditions after a reset aborts with
/// [`Error::LineSearch`] carrying the last iterate.
pub fn bfgs_minimize(obj: &dyn Objective, z0: &[C64], opts: &BfgsOptions) -> Result<BfgsResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::Config("BFGS tolerance must be positive".into()));
    }
    let n = 2 * obj.dim();
    let mut ev = Evaluator { obj, count: 0 };
    let mut cur = ev.eval(to_real(z0))?;
    let mut history = vec![IterRecord {
        iter: 0,
        cost: cur.cost,
        grad_norm: norm(&cur.g_complex),
        step: 0.0,
    }];
    let mut h: Option<Vec<f64>> = None;
    let mut resets = 0;
    let mut iter = 0;

    let finish =
        |cur: &Point, history: Vec<IterRecord>, iter, converged, evaluations, resets| BfgsResult {
            z: from_real(&cur.x),
            cost: cur.cost,
            grad_norm: norm(&cur.g_complex),
            iterations: iter,
            converged,
            evaluations,
            resets,
            history,
        };

    loop {
        let gnorm = norm(&cur.g_complex);
        if gnorm <= opts.tol {
            return Ok(finish(&cur, history, iter, true, ev.count, resets));
        }
        if iter >= opts.max_iter {
            return Ok(finish(&cur, history, iter, false, ev.count, resets));
        }
        let mut d = match &h {
            Some(h) => apply(h, n, &cur.g),
            None => cur.g.iter().map(|v| -v).collect(),
        };
        if dot(&d, &cur.g) >= 0.0 {
            h = None;
            resets += 1;
            d = cur.g.iter().map(|v| -v).collect();
        }
        let alpha0 = if h.is_some() {
            1.0
        } else {
            1.0 / dot(&cur.g, &cur.g).sqrt()
        };
        let found = line_search(&mut ev, &cur, &d, alpha0, opts)?;
        let (alpha, next) = match found {
            Some(v) => v,
            None if h.is_some() => {
                // retry once from steepest descent before giving up
                h = None;
                resets += 1;
                continue;
            }
            None => {
                let last = finish(&cur, history, iter, false, ev.count, resets);
                return Err(Error::LineSearch {
                    iterations: iter,
                    grad_norm: gnorm,
                    last: Box::new(last),
                });
            }
        };
        let s: Vec<f64> = d.iter().map(|v| alpha * v).collect();
        let y: Vec<f64> = next.g.iter().zip(&cur.g).map(|(a, b)| a - b).collect();
        let ys = dot(&y, &s);
        if ys > 1e-14 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            let hm = h.get_or_insert_with(|| {
                let scale = ys / dot(&y, &y);
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = scale;
                }
                m
            });
            update_inverse(hm, n, &s, &y);
        }
        iter += 1;
        cur = next;
        history.push(IterRecord {
            iter,
            cost: cur.cost,
            grad_norm: norm(&cur.g_complex),
            step: alpha,
        });
        log::debug!(
            "bfgs iter {iter}: J = {:e}, |G| = {:e}, step = {alpha:e}",
            cur.cost.j,
            norm(&cur.g_complex)
        );
    }
}
