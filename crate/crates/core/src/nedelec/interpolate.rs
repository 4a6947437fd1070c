use super::{cdot, rdot, scale_c, solve2, FeSpace, MAX_LOCAL};
use crate::config::{CVec3, C64};
use crate::mesh::Point;
use crate::quadrature::{line_rule, tet_rule, triangle_rule};
use nalgebra::{Vector2, Vector3};
use rayon::prelude::*;

/// Moment interpolant of a smooth field; `degree` sets the exactness of the
/// edge and face quadratures used to evaluate the moments.
pub fn interpolate(
    space: &FeSpace,
    field: &(dyn Fn(&Point) -> CVec3 + Sync),
    degree: usize,
) -> Vec<C64> {
    let mesh = space.mesh();
    let mut u = vec![C64::default(); space.ndofs()];
    let lrule = line_rule(degree + 1);
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let t = (pb - pa) / (pb - pa).norm();
        let mut m0 = C64::default();
        let mut m1 = C64::default();
        for (p, w) in lrule.points.iter().zip(&lrule.weights) {
            let vt = rdot(&field(&(pa * p[0] + pb * p[1])), &t);
            m0 += w * vt;
            m1 += 3.0 * w * (p[0] - p[1]) * vt;
        }
        u[space.edge_dof(e, 0)] = m0;
        if space.order() == 1 {
            u[space.edge_dof(e, 1)] = m1;
        }
    }
    if space.order() == 1 {
        let trule = triangle_rule(degree + 1);
        let face_coeffs: Vec<[C64; 2]> = (0..mesh.faces().len())
            .into_par_iter()
            .map(|f| {
                let el = space.element(mesh.face_tets(f)[0]);
                let lf = el.local_face_of(f);
                let (tan, _) = el.face_tangents(lf);
                let mut vals = [Vector3::zeros(); MAX_LOCAL];
                let mut curls = [Vector3::zeros(); MAX_LOCAL];
                let mut mom = Vector2::<C64>::zeros();
                for (p, w) in trule.points.iter().zip(&trule.weights) {
                    let bary = el.face_bary(lf, p);
                    el.eval(&bary, &mut vals, &mut curls);
                    // remainder after removing the (already known) edge part
                    let mut r = field(&el.point(&bary));
                    for i in 0..12 {
                        r -= scale_c(&vals[i], u[el.dofs[i]]);
                    }
                    mom[0] += w * rdot(&r, &tan[0]);
                    mom[1] += w * rdot(&r, &tan[1]);
                }
                let c = solve2(space.face_moments_inv(f), mom);
                [c[0], c[1]]
            })
            .collect();
        for (f, c) in face_coeffs.iter().enumerate() {
            u[space.face_dof(f, 0)] = c[0];
            u[space.face_dof(f, 1)] = c[1];
        }
    }
    u
}

/// Squared L2 and curl parts of the H(curl) error and the combined norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub curl: f64,
}

impl ErrorNorms {
    /// `(‖u − u_h‖² + ‖curl u − curl u_h‖²)^{1/2}`.
    pub fn hcurl(&self) -> f64 {
        (self.l2 * self.l2 + self.curl * self.curl).sqrt()
    }
}

/// H(curl) error of `u` against an exact field and its curl, integrated
/// with a tet rule of the given degree.
pub fn hcurl_error(
    space: &FeSpace,
    u: &[C64],
    exact: &(dyn Fn(&Point) -> CVec3 + Sync),
    exact_curl: &(dyn Fn(&Point) -> CVec3 + Sync),
    degree: usize,
) -> ErrorNorms {
    let rule = tet_rule(degree);
    let parts: Vec<(f64, f64)> = (0..space.mesh().tets().len())
        .into_par_iter()
        .map(|t| {
            let el = space.element(t);
            let mut vals = [Vector3::zeros(); MAX_LOCAL];
            let mut curls = [Vector3::zeros(); MAX_LOCAL];
            let (mut l2, mut cu) = (0.0, 0.0);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let x = el.point(p);
                el.eval(p, &mut vals, &mut curls);
                let mut dv = exact(&x);
                let mut dc = exact_curl(&x);
                for i in 0..el.n {
                    dv -= scale_c(&vals[i], u[el.dofs[i]]);
                    dc -= scale_c(&curls[i], u[el.dofs[i]]);
                }
                l2 += w * el.volume * cdot(&dv, &dv).re;
                cu += w * el.volume * cdot(&dc, &dc).re;
            }
            (l2, cu)
        })
        .collect();
    let (l2, curl) = parts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    ErrorNorms {
        l2: l2.sqrt(),
        curl: curl.sqrt(),
    }
}

/// A field sampled once at the quadrature points of every tet, used for
/// repeated L2 tracking evaluations `½‖u_h − f‖²`.
#[derive(Debug, Clone)]
pub struct SampledField {
    degree: usize,
    values: Vec<Vec<CVec3>>,
}

impl SampledField {
    pub fn new(
        space: &FeSpace,
        field: Option<&(dyn Fn(&Point) -> CVec3 + Sync)>,
        degree: usize,
    ) -> Self {
        let rule = tet_rule(degree);
        let values = (0..space.mesh().tets().len())
            .into_par_iter()
            .map(|t| {
                let el = space.element(t);
                rule.points
                    .iter()
                    .map(|p| field.map_or_else(CVec3::zeros, |f| f(&el.point(p))))
                    .collect()
            })
            .collect();
        Self { degree, values }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Returns `½‖u_h − f‖²` and the vector `b_i = ∫ (u_h − f) · φ_i`,
    /// both computed with the same quadrature so that `b` is the exact
    /// derivative of the discrete functional.
    pub fn residual(&self, space: &FeSpace, u: &[C64]) -> (f64, Vec<C64>) {
        let rule = tet_rule(self.degree);
        let locals: Vec<(f64, [usize; MAX_LOCAL], usize, [C64; MAX_LOCAL])> =
            (0..space.mesh().tets().len())
                .into_par_iter()
                .map(|t| {
                    let el = space.element(t);
                    let mut vals = [Vector3::zeros(); MAX_LOCAL];
                    let mut curls = [Vector3::zeros(); MAX_LOCAL];
                    let mut out = [C64::default(); MAX_LOCAL];
                    let mut j = 0.0;
                    for (q, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                        el.eval(p, &mut vals, &mut curls);
                        let mut r = -self.values[t][q];
                        for i in 0..el.n {
                            r += scale_c(&vals[i], u[el.dofs[i]]);
                        }
                        let wv = w * el.volume;
                        j += 0.5 * wv * cdot(&r, &r).re;
                        for i in 0..el.n {
                            out[i] += wv * rdot(&r, &vals[i]);
                        }
                    }
                    (j, el.dofs, el.n, out)
                })
                .collect();
        let mut b = vec![C64::default(); space.ndofs()];
        let mut j = 0.0;
        for (jl, dofs, n, vals) in &locals {
            j += jl;
            for i in 0..*n {
                b[dofs[i]] += vals[i];
            }
        }
        (j, b)
    }
}
