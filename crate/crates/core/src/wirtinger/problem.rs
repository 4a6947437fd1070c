use super::{CostReport, Objective};
use crate::config::{ProblemConfig, C64};
use crate::error::{Error, Result};
use crate::nedelec::{FeSpace, SampledField};
use crate::solver::StateOperator;
use crate::trace::SurfaceOperators;
use std::sync::Arc;

/// Wirtinger gradient `G = ∂j/∂z̄` of the reduced cost with its parts:
/// `G = tracking + curl_term + mass_term` where
/// `tracking = ½ S^*(u − u_d)`, `curl_term = (α/2) K_Γ z`, `mass_term = (β/2) M_Γ z`.
#[derive(Debug, Clone)]
pub struct ReducedGradient {
    pub g: Vec<C64>,
    pub tracking: Vec<C64>,
    pub curl_term: Vec<C64>,
    pub mass_term: Vec<C64>,
}

/// Reduced functional `j(z) = ½‖S_h z − u_d‖² + (α/2)‖curl_Γ z‖² + (β/2)‖z‖²`.
#[derive(Debug)]
pub struct ReducedProblem {
    op: Arc<StateOperator>,
    surface: SurfaceOperators,
    target: SampledField,
    alpha: f64,
    beta: f64,
    tracking: bool,
}

impl ReducedProblem {
    pub fn new(
        op: Arc<StateOperator>,
        surface: SurfaceOperators,
        target: SampledField,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        if surface.dim() != op.space().mesh().boundary_edges().len() {
            return Err(Error::Dimension {
                expected: op.space().mesh().boundary_edges().len(),
                got: surface.dim(),
            });
        }
        Ok(Self {
            op,
            surface,
            target,
            alpha,
            beta,
            tracking: true,
        })
    }

    /// Assembles everything needed for the configured problem on a space.
    pub fn from_config(space: Arc<FeSpace>, config: &ProblemConfig) -> Result<Self> {
        config.validate()?;
        let op = Arc::new(StateOperator::new(space.clone(), config)?);
        let surface = SurfaceOperators::new(space.mesh())?;
        let degree = config.quad_degree.unwrap_or(2 * space.order() + 2);
        let target = SampledField::new(
            &space,
            config
                .target
                .as_deref()
                .map(|f| f as &(dyn Fn(&crate::mesh::Point) -> crate::config::CVec3 + Sync)),
            degree,
        );
        Self::new(op, surface, target, config.alpha, config.beta)
    }

    /// Disables the tracking term (regularizer-only probe).
    pub fn without_tracking(mut self) -> Self {
        self.tracking = false;
        self
    }

    pub fn operator(&self) -> &Arc<StateOperator> {
        &self.op
    }
    pub fn surface(&self) -> &SurfaceOperators {
        &self.surface
    }
    pub fn space(&self) -> &FeSpace {
        self.op.space()
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn regularization(&self, z: &[C64]) -> (f64, f64) {
        (
            0.5 * self.alpha * self.surface.curl_norm_sq(z),
            0.5 * self.beta * self.surface.mass_norm_sq(z),
        )
    }

    /// State, `½‖u − u_d‖²` and the residual load `b_i = (u − u_d, φ_i)`.
    pub fn state_and_residual(&self, z: &[C64]) -> Result<(Vec<C64>, f64, Vec<C64>)> {
        let u = self.op.solve_state(z)?;
        let (j1, b) = self.target.residual(self.space(), &u);
        Ok((u, j1, b))
    }

    pub fn reduced_cost(&self, z: &[C64]) -> Result<CostReport> {
        self.check(z)?;
        let j1 = if self.tracking {
            self.state_and_residual(z)?.1
        } else {
            0.0
        };
        let (j2, j3) = self.regularization(z);
        Ok(CostReport::new(j1, j2, j3))
    }

    /// Cost and gradient from one state and one adjoint solve.
    pub fn reduced_gradient(&self, z: &[C64]) -> Result<(CostReport, ReducedGradient)> {
        self.check(z)?;
        let n = z.len();
        let (j1, tracking) = if self.tracking {
            let (_, j1, b) = self.state_and_residual(z)?;
            let adj = self.op.solve_adjoint(&b)?;
            let g = self.op.adjoint_action_vector(&adj);
            (j1, g.into_iter().map(|v| 0.5 * v).collect())
        } else {
            (0.0, vec![C64::default(); n])
        };
        let curl_term: Vec<C64> = self
            .surface
            .curl
            .mul_vec_c(z)
            .into_iter()
            .map(|v| 0.5 * self.alpha * v)
            .collect();
        let mass_term: Vec<C64> = self
            .surface
            .mass
            .mul_vec_c(z)
            .into_iter()
            .map(|v| 0.5 * self.beta * v)
            .collect();
        let g = (0..n)
            .map(|i| tracking[i] + curl_term[i] + mass_term[i])
            .collect();
        let (j2, j3) = self.regularization(z);
        Ok((
            CostReport::new(j1, j2, j3),
            ReducedGradient {
                g,
                tracking,
                curl_term,
                mass_term,
            },
        ))
    }

    /// Directional derivative evaluated term by term from the adjoint action
    /// `⟨S^* r, ξ⟩` and the surface matrices (independent of the assembled `G`).
    pub fn directional_derivative(&self, z: &[C64], xi: &[C64]) -> Result<f64> {
        self.check(z)?;
        self.check(xi)?;
        let tracking = if self.tracking {
            let (_, _, b) = self.state_and_residual(z)?;
            let adj = self.op.solve_adjoint(&b)?;
            self.op.adjoint_action(&adj, xi)?.re
        } else {
            0.0
        };
        let curl = self.alpha * self.surface.curl.form(xi, z).re;
        let mass = self.beta * self.surface.mass.form(xi, z).re;
        Ok(tracking + curl + mass)
    }

    fn check(&self, z: &[C64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(())
    }
}

impl Objective for ReducedProblem {
    fn dim(&self) -> usize {
        self.surface.dim()
    }

    fn cost(&self, z: &[C64]) -> Result<CostReport> {
        self.reduced_cost(z)
    }

    fn cost_and_gradient(&self, z: &[C64]) -> Result<(CostReport, Vec<C64>)> {
        self.reduced_gradient(z).map(|(c, g)| (c, g.g))
    }
}
