use super::{rdot, Element, FeSpace, MAX_LOCAL};
use crate::config::{check_spd, ProblemConfig, C64};
use crate::error::Result;
use crate::quadrature::tet_rule;
use crate::sparse::CsrMatrix;
use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

/// Discrete sesquilinear form `A = K + i ω M` with
/// `K_ij = ∫ μ⁻¹ curl φ_j · curl φ_i` and `M_ij = ∫ κ φ_j · φ_i`.
#[derive(Debug, Clone)]
pub struct SystemMatrix {
    pub curl: CsrMatrix<f64>,
    pub mass: CsrMatrix<f64>,
    pub omega: f64,
    pub a: CsrMatrix<C64>,
}

impl SystemMatrix {
    pub fn ndofs(&self) -> usize {
        self.a.nrows()
    }

    /// `a(u, v) = v^H A u`.
    pub fn form(&self, u: &[C64], v: &[C64]) -> C64 {
        self.a.form(v, u)
    }
}

struct LocalMatrices {
    dofs: [usize; MAX_LOCAL],
    n: usize,
    /// Upper triangles (row-major, `i <= j`).
    curl: Vec<f64>,
    mass: Vec<f64>,
}

fn sample(coef: &crate::config::Coefficient, x: &crate::mesh::Point) -> Result<Matrix3<f64>> {
    let m = coef.eval(x);
    if !coef.is_constant() {
        check_spd(&m, x)?;
    }
    Ok(m)
}

fn local_matrices(el: &Element, config: &ProblemConfig, degree: usize) -> Result<LocalMatrices> {
    let n = el.n;
    let rule = tet_rule(degree);
    let mut curl = vec![0.0; n * (n + 1) / 2];
    let mut mass = vec![0.0; n * (n + 1) / 2];
    let mut vals = [Vector3::zeros(); MAX_LOCAL];
    let mut curls = [Vector3::zeros(); MAX_LOCAL];
    let mut mv = [Vector3::zeros(); MAX_LOCAL];
    let mut kc = [Vector3::zeros(); MAX_LOCAL];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let x = el.point(p);
        let mu = sample(&config.mu, &x)?;
        let kappa = sample(&config.kappa, &x)?;
        let mu_inv = mu.try_inverse().expect("SPD matrices are invertible");
        el.eval(p, &mut vals, &mut curls);
        let wv = w * el.volume;
        for i in 0..n {
            mv[i] = mu_inv * curls[i];
            kc[i] = kappa * vals[i];
        }
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                curl[k] += wv * mv[j].dot(&curls[i]);
                mass[k] += wv * kc[j].dot(&vals[i]);
                k += 1;
            }
        }
    }
    Ok(LocalMatrices {
        dofs: el.dofs,
        n,
        curl,
        mass,
    })
}

/// Assembles the complex system matrix of the eddy-current form.
///
/// Element matrices are computed in parallel and reduced in element order,
/// so the result is bitwise reproducible and `A^T = A` holds exactly.
pub fn assemble(space: &FeSpace, config: &ProblemConfig) -> Result<SystemMatrix> {
    config.validate()?;
    let degree = config.quad_degree.unwrap_or(2 * space.order() + 2);
    let locals: Vec<LocalMatrices> = (0..space.mesh().tets().len())
        .into_par_iter()
        .map(|t| local_matrices(&space.element(t), config, degree))
        .collect::<Result<_>>()?;
    let n = space.ndofs();
    let cap: usize = locals.iter().map(|l| l.n * l.n).sum();
    let mut tk = Vec::with_capacity(cap);
    let mut tm = Vec::with_capacity(cap);
    let mut ta = Vec::with_capacity(cap);
    let iw = C64::new(0.0, config.omega);
    for loc in &locals {
        let mut k = 0;
        for i in 0..loc.n {
            for j in i..loc.n {
                let (gi, gj) = (loc.dofs[i], loc.dofs[j]);
                let (c, m) = (loc.curl[k], loc.mass[k]);
                let a = C64::new(c, 0.0) + iw * m;
                tk.push((gi, gj, c));
                tm.push((gi, gj, m));
                ta.push((gi, gj, a));
                if i != j {
                    tk.push((gj, gi, c));
                    tm.push((gj, gi, m));
                    ta.push((gj, gi, a));
                }
                k += 1;
            }
        }
    }
    Ok(SystemMatrix {
        curl: CsrMatrix::from_triplets(n, n, &tk),
        mass: CsrMatrix::from_triplets(n, n, &tm),
        omega: config.omega,
        a: CsrMatrix::from_triplets(n, n, &ta),
    })
}

/// Load vector `f_i = ∫ j_c · φ_i` (real basis, so no conjugation is visible).
pub fn assemble_load(space: &FeSpace, config: &ProblemConfig) -> Vec<C64> {
    let n = space.ndofs();
    let Some(source) = config.source.as_ref() else {
        return vec![C64::default(); n];
    };
    let degree = config.quad_degree.unwrap_or(2 * space.order() + 2);
    let rule = tet_rule(degree);
    let locals: Vec<([usize; MAX_LOCAL], usize, [C64; MAX_LOCAL])> = (0..space.mesh().tets().len())
        .into_par_iter()
        .map(|t| {
            let el = space.element(t);
            let mut vals = [Vector3::zeros(); MAX_LOCAL];
            let mut curls = [Vector3::zeros(); MAX_LOCAL];
            let mut out = [C64::default(); MAX_LOCAL];
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let j = source(&el.point(p));
                el.eval(p, &mut vals, &mut curls);
                for i in 0..el.n {
                    out[i] += w * el.volume * rdot(&j, &vals[i]);
                }
            }
            (el.dofs, el.n, out)
        })
        .collect();
    let mut f = vec![C64::default(); n];
    for (dofs, nl, vals) in &locals {
        for i in 0..*nl {
            f[dofs[i]] += vals[i];
        }
    }
    f
}
