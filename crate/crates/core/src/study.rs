//! Drivers for the numerical experiments: mesh-convergence studies against
//! a known field, finite-difference gradient checks and optimization runs on
//! a family of meshes.

use crate::config::{CVec3, ProblemConfig, C64};
use crate::error::Result;
use crate::mesh::{Mesh, Point};
use crate::nedelec::{hcurl_error, interpolate, ErrorNorms, FeSpace};
use crate::solver::StateOperator;
use crate::wirtinger::{
    bfgs_minimize, decade_steps, fd_check, fit_fd_slope, least_squares_slope, pairing, BfgsOptions,
    BfgsResult, CostReport, FdFit, FdRow, Objective, ReducedProblem,
};
use serde::Serialize;
use std::sync::Arc;
use std::time::Instant;

pub type FieldFn<'a> = &'a (dyn Fn(&Point) -> CVec3 + Sync);

/// Solves the state equation with boundary dofs set to the interpolant of
/// `exact` (all boundary moments, not only the lowest-order control part).
pub fn solve_with_boundary_field(
    op: &StateOperator,
    exact: FieldFn<'_>,
    degree: usize,
) -> Result<Vec<C64>> {
    let space = op.space();
    let full = interpolate(space, exact, degree);
    let u_b: Vec<C64> = space.boundary_dofs().iter().map(|&i| full[i]).collect();
    op.solve_dirichlet(&u_b, op.load())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub ndofs: usize,
    pub l2: f64,
    pub curl: f64,
    pub hcurl: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub order: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log E_h` against `log h`.
    pub slope: f64,
}

impl ConvergenceStudy {
    /// Error table `h,ndofs,l2_error,curl_error,hcurl_error`; wall-clock
    /// times are kept out so that repeated runs give identical bytes.
    pub fn csv(&self) -> String {
        let mut out = String::from("h,ndofs,l2_error,curl_error,hcurl_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:e},{},{:e},{:e},{:e}\n",
                r.h, r.ndofs, r.l2, r.curl, r.hcurl
            ));
        }
        out
    }
}

/// One level of a convergence study: solve with interpolated boundary data
/// and measure the H(curl) error against `exact`.
pub fn convergence_level(
    mesh: Arc<Mesh>,
    order: usize,
    config: &ProblemConfig,
    exact: FieldFn<'_>,
    exact_curl: FieldFn<'_>,
) -> Result<ConvergenceRow> {
    let start = Instant::now();
    let h = mesh.mesh_size()?;
    let space = Arc::new(FeSpace::new(mesh, order)?);
    let op = StateOperator::new(space.clone(), config)?;
    let degree = 2 * order + 4;
    let u = solve_with_boundary_field(&op, exact, degree)?;
    let ErrorNorms { l2, curl } = hcurl_error(&space, &u, exact, exact_curl, degree);
    Ok(ConvergenceRow {
        h,
        ndofs: space.ndofs(),
        l2,
        curl,
        hcurl: (l2 * l2 + curl * curl).sqrt(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs [`convergence_level`] on every mesh and fits the rate. A failure at
/// any level is returned together with the rows completed so far.
pub fn convergence_study(
    meshes: impl IntoIterator<Item = Mesh>,
    order: usize,
    config: &ProblemConfig,
    exact: FieldFn<'_>,
    exact_curl: FieldFn<'_>,
) -> std::result::Result<ConvergenceStudy, (ConvergenceStudy, crate::error::Error)> {
    let mut rows = Vec::new();
    for mesh in meshes {
        match convergence_level(Arc::new(mesh), order, config, exact, exact_curl) {
            Ok(row) => {
                log::info!(
                    "k = {order}, h = {:.4}, ndofs = {}, E_h = {:.4e}",
                    row.h,
                    row.ndofs,
                    row.hcurl
                );
                rows.push(row);
            }
            Err(e) => return Err((ConvergenceStudy::from_rows(order, rows), e)),
        }
    }
    Ok(ConvergenceStudy::from_rows(order, rows))
}

impl ConvergenceStudy {
    /// Collects level results and fits the rate (NaN with fewer than two
    /// nonzero errors).
    pub fn from_rows(order: usize, rows: Vec<ConvergenceRow>) -> Self {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.hcurl > 0.0)
            .map(|r| (r.h.ln(), r.hcurl.ln()))
            .collect();
        let slope = if pts.len() >= 2 {
            least_squares_slope(&pts)
        } else {
            f64::NAN
        };
        Self { order, rows, slope }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientCheck {
    /// `2 Re(ξ̄^T G)`.
    pub derivative: f64,
    /// Directional derivative assembled from the adjoint action and the surface matrices.
    pub independent: f64,
    pub rows: Vec<FdRow>,
    pub fit: FdFit,
}

impl GradientCheck {
    pub fn csv(&self) -> String {
        let mut out = String::from("t,quotient,error,relative_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e}\n",
                r.t,
                r.quotient,
                r.error,
                r.error / self.derivative.abs()
            ));
        }
        out
    }
}

/// Forward-difference check of the reduced gradient at `z` along `xi` for
/// steps `10^-1 … 10^-decades`.
pub fn gradient_check(
    problem: &ReducedProblem,
    z: &[C64],
    xi: &[C64],
    decades: usize,
) -> Result<GradientCheck> {
    let (_, grad) = problem.reduced_gradient(z)?;
    let derivative = pairing(&grad.g, xi);
    let independent = problem.directional_derivative(z, xi)?;
    let rows = fd_check(
        |v| Ok(problem.reduced_cost(v)?.j),
        z,
        xi,
        derivative,
        &decade_steps(decades),
    )?;
    let fit = fit_fd_slope(&rows, derivative);
    Ok(GradientCheck {
        derivative,
        independent,
        rows,
        fit,
    })
}

/// Summary of one optimization run on one mesh.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationRow {
    pub h: f64,
    pub ndofs: usize,
    pub ncontrols: usize,
    pub cost: CostReport,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub state_solves: usize,
    pub adjoint_solves: usize,
    pub seconds: f64,
    /// `|J − J_ref| / J_ref` against the finest level (filled by [`relative_gaps`]).
    pub gap_j: f64,
    pub gap_j1: f64,
    pub gap_j2: f64,
}

impl OptimizationRow {
    pub fn csv_header() -> &'static str {
        "h,ndofs,ncontrols,J,J1,J2,J3,grad_norm,iterations,evaluations,converged,state_solves,adjoint_solves,gap_J,gap_J1,gap_J2\n"
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{:e},{},{},{:e},{:e},{:e},{:e},{:e},{},{},{},{},{},{:e},{:e},{:e}\n",
            self.h,
            self.ndofs,
            self.ncontrols,
            self.cost.j,
            self.cost.j1,
            self.cost.j2,
            self.cost.j3,
            self.grad_norm,
            self.iterations,
            self.evaluations,
            self.converged,
            self.state_solves,
            self.adjoint_solves,
            self.gap_j,
            self.gap_j1,
            self.gap_j2
        )
    }
}

/// Minimizes the reduced cost on one mesh from `z = 0`.
pub fn optimize_level(
    mesh: Arc<Mesh>,
    order: usize,
    config: &ProblemConfig,
    opts: &BfgsOptions,
) -> Result<(OptimizationRow, BfgsResult)> {
    let start = Instant::now();
    let h = mesh.mesh_size()?;
    let space = Arc::new(FeSpace::new(mesh, order)?);
    let problem = ReducedProblem::from_config(space.clone(), config)?;
    let z0 = vec![C64::default(); problem.dim()];
    let res = bfgs_minimize(&problem, &z0, opts)?;
    let row = OptimizationRow {
        h,
        ndofs: space.ndofs(),
        ncontrols: problem.dim(),
        cost: res.cost,
        grad_norm: res.grad_norm,
        iterations: res.iterations,
        evaluations: res.evaluations,
        converged: res.converged,
        state_solves: problem.operator().state_solves(),
        adjoint_solves: problem.operator().adjoint_solves(),
        seconds: start.elapsed().as_secs_f64(),
        gap_j: f64::NAN,
        gap_j1: f64::NAN,
        gap_j2: f64::NAN,
    };
    Ok((row, res))
}

/// Fills the relative gaps of every row against the last (finest) one.
pub fn relative_gaps(rows: &mut [OptimizationRow]) {
    let Some(reference) = rows.last().map(|r| r.cost) else {
        return;
    };
    let gap = |v: f64, r: f64| (v - r).abs() / r.abs();
    for row in rows {
        row.gap_j = gap(row.cost.j, reference.j);
        row.gap_j1 = gap(row.cost.j1, reference.j1);
        row.gap_j2 = gap(row.cost.j2, reference.j2);
    }
}
