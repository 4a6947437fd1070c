//! State and adjoint solves with boundary data imposed by block elimination.
//!
//! Dofs are split into interior `I` and boundary `B`. For boundary values
//! `u_B` the state solves `A_II u_I = f_I − A_IB u_B`; the adjoint solves
//! `A_II^H w_I = b_I` with the same LU factors.

use crate::config::{ProblemConfig, C64};
use crate::error::{Error, Result};
use crate::nedelec::{assemble, assemble_load, FeSpace, SystemMatrix};
use crate::sparse::CsrMatrix;
use crate::trace::{lift, lift_dofs};
use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// Factorized interior block and coupling data for one mesh and problem.
pub struct StateOperator {
    space: Arc<FeSpace>,
    system: SystemMatrix,
    load: Vec<C64>,
    a_ii: CsrMatrix<C64>,
    a_ib: CsrMatrix<C64>,
    lu: faer::sparse::linalg::solvers::Lu<usize, C64>,
    /// Position of each control's volume dof within the boundary block.
    control_in_boundary: Vec<usize>,
    tol: f64,
    state_solves: AtomicUsize,
    adjoint_solves: AtomicUsize,
}

impl std::fmt::Debug for StateOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StateOperator")
            .field("ndofs", &self.space.ndofs())
            .field("interior", &self.a_ii.nrows())
            .field("boundary", &self.a_ib.ncols())
            .finish()
    }
}

/// Adjoint state `w` (zero on boundary dofs) and the residual load `b` it solves for.
#[derive(Debug, Clone)]
pub struct AdjointState {
    pub w: Vec<C64>,
    pub rhs: Vec<C64>,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

impl StateOperator {
    pub fn new(space: Arc<FeSpace>, config: &ProblemConfig) -> Result<Self> {
        let system = assemble(&space, config)?;
        let load = assemble_load(&space, config);
        Self::from_system(space, system, load, config.solver_tol)
    }

    pub fn from_system(
        space: Arc<FeSpace>,
        system: SystemMatrix,
        load: Vec<C64>,
        tol: f64,
    ) -> Result<Self> {
        let n = space.ndofs();
        if system.ndofs() != n || load.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: system.ndofs().min(load.len()),
            });
        }
        let interior = space.interior_dofs();
        let boundary = space.boundary_dofs();
        let mut map_i = vec![None; n];
        let mut map_b = vec![None; n];
        for (k, &i) in interior.iter().enumerate() {
            map_i[i] = Some(k);
        }
        for (k, &i) in boundary.iter().enumerate() {
            map_b[i] = Some(k);
        }
        let a_ii = system.a.submatrix(interior, &map_i, interior.len());
        let a_ib = system.a.submatrix(interior, &map_b, boundary.len());
        if interior.is_empty() {
            return Err(Error::Factorization(
                "no interior degrees of freedom".into(),
            ));
        }
        let trip: Vec<Triplet<usize, usize, C64>> = a_ii
            .triplets()
            .map(|(i, j, v)| Triplet::new(i, j, v))
            .collect();
        let mat =
            SparseColMat::<usize, C64>::try_new_from_triplets(a_ii.nrows(), a_ii.ncols(), &trip)
                .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let control_in_boundary = lift_dofs(&space)
            .iter()
            .map(|&d| map_b[d].expect("control dof on boundary"))
            .collect();
        log::debug!(
            "factorized interior block: {} dofs, {} nonzeros",
            a_ii.nrows(),
            a_ii.nnz()
        );
        Ok(Self {
            space,
            system,
            load,
            a_ii,
            a_ib,
            lu,
            control_in_boundary,
            tol,
            state_solves: AtomicUsize::new(0),
            adjoint_solves: AtomicUsize::new(0),
        })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }
    pub fn system(&self) -> &SystemMatrix {
        &self.system
    }
    pub fn load(&self) -> &[C64] {
        &self.load
    }
    pub fn interior_block(&self) -> &CsrMatrix<C64> {
        &self.a_ii
    }
    pub fn coupling_block(&self) -> &CsrMatrix<C64> {
        &self.a_ib
    }
    pub fn state_solves(&self) -> usize {
        self.state_solves.load(Ordering::Relaxed)
    }
    pub fn adjoint_solves(&self) -> usize {
        self.adjoint_solves.load(Ordering::Relaxed)
    }
    pub fn reset_counters(&self) {
        self.state_solves.store(0, Ordering::Relaxed);
        self.adjoint_solves.store(0, Ordering::Relaxed);
    }

    fn solve_interior(&self, rhs: Vec<C64>, adjoint: bool) -> Result<Vec<C64>> {
        let n = rhs.len();
        let rhs_norm = norm(&rhs);
        if rhs_norm == 0.0 {
            return Ok(rhs);
        }
        let mut x = Mat::<C64>::from_fn(n, 1, |i, _| rhs[i]);
        if adjoint {
            self.lu.solve_adjoint_in_place(x.as_mut());
            self.adjoint_solves.fetch_add(1, Ordering::Relaxed);
        } else {
            self.lu.solve_in_place(x.as_mut());
            self.state_solves.fetch_add(1, Ordering::Relaxed);
        }
        let x: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
        let ax = if adjoint {
            self.a_ii.mul_vec_adjoint(&x)
        } else {
            self.a_ii.mul_vec(&x)
        };
        let res = ax
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / rhs_norm;
        if !(res <= self.tol) {
            return Err(Error::Residual {
                residual: res,
                tolerance: self.tol,
            });
        }
        Ok(x)
    }

    /// Solves with prescribed boundary values `u_b` (ordered like
    /// [`FeSpace::boundary_dofs`]) and volume load `f`.
    pub fn solve_dirichlet(&self, u_b: &[C64], f: &[C64]) -> Result<Vec<C64>> {
        let boundary = self.space.boundary_dofs();
        let interior = self.space.interior_dofs();
        if u_b.len() != boundary.len() {
            return Err(Error::Dimension {
                expected: boundary.len(),
                got: u_b.len(),
            });
        }
        let coupling = self.a_ib.mul_vec(u_b);
        let rhs: Vec<C64> = interior
            .iter()
            .zip(&coupling)
            .map(|(&i, c)| f[i] - c)
            .collect();
        let u_i = self.solve_interior(rhs, false)?;
        let mut u = vec![C64::default(); self.space.ndofs()];
        for (&i, v) in interior.iter().zip(u_i) {
            u[i] = v;
        }
        for (&i, v) in boundary.iter().zip(u_b) {
            u[i] = *v;
        }
        Ok(u)
    }

    fn boundary_values(&self, lifted: &[C64]) -> Vec<C64> {
        self.space
            .boundary_dofs()
            .iter()
            .map(|&i| lifted[i])
            .collect()
    }

    /// `S_h z`: state for control `z` with the configured source.
    pub fn solve_state(&self, z: &[C64]) -> Result<Vec<C64>> {
        let lifted = lift(&self.space, z)?;
        self.solve_dirichlet(&self.boundary_values(&lifted), &self.load)
    }

    /// Linear part of `S_h`: state for control `z` without source.
    pub fn solve_homogeneous(&self, z: &[C64]) -> Result<Vec<C64>> {
        let lifted = lift(&self.space, z)?;
        let zero = vec![C64::default(); self.space.ndofs()];
        self.solve_dirichlet(&self.boundary_values(&lifted), &zero)
    }

    /// Solves `A_II^H w_I = b_I`, `w_B = 0`, for a residual load `b_i = (r, φ_i)`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Result<AdjointState> {
        let interior = self.space.interior_dofs();
        if b.len() != self.space.ndofs() {
            return Err(Error::Dimension {
                expected: self.space.ndofs(),
                got: b.len(),
            });
        }
        let rhs: Vec<C64> = interior.iter().map(|&i| b[i]).collect();
        let w_i = self.solve_interior(rhs, true)?;
        let mut w = vec![C64::default(); self.space.ndofs()];
        for (&i, v) in interior.iter().zip(w_i) {
            w[i] = v;
        }
        Ok(AdjointState { w, rhs: b.to_vec() })
    }

    /// Vector `g` with `⟨S_h^* r, ξ⟩ = Σ conj(ξ_e) g_e` for every control `ξ`:
    /// `g = P^T (b_B − A_IB^H w_I)`, touching only the coupling block.
    pub fn adjoint_action_vector(&self, adj: &AdjointState) -> Vec<C64> {
        let w_i: Vec<C64> = self
            .space
            .interior_dofs()
            .iter()
            .map(|&i| adj.w[i])
            .collect();
        let coupled = self.a_ib.mul_vec_adjoint(&w_i);
        let boundary = self.space.boundary_dofs();
        self.control_in_boundary
            .iter()
            .map(|&k| adj.rhs[boundary[k]] - coupled[k])
            .collect()
    }

    /// `⟨S_h^* r, ξ⟩ = −conj(a(L ξ, w)) + (r, L ξ)`.
    pub fn adjoint_action(&self, adj: &AdjointState, xi: &[C64]) -> Result<C64> {
        let l_xi = lift(&self.space, xi)?;
        // L ξ vanishes on interior dofs and w on boundary dofs, so only A_IB contributes
        let coupled = self.a_ib.mul_vec(&self.boundary_values(&l_xi));
        let a_lw: C64 = self
            .space
            .interior_dofs()
            .iter()
            .zip(&coupled)
            .map(|(&i, c)| adj.w[i].conj() * c)
            .sum();
        let r_l: C64 = l_xi.iter().zip(&adj.rhs).map(|(l, b)| l.conj() * b).sum();
        Ok(-a_lw.conj() + r_l)
    }
}
