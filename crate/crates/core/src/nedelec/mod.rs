//! First-kind Nédélec spaces of order 0 and 1 on tetrahedra.
//!
//! Basis (hierarchical, orientation fixed by global vertex ids so that no
//! per-element sign bookkeeping is needed). For an edge `e = (p, q)` with
//! `p < q` globally:
//!
//! * `W_e = |e| (λ_p ∇λ_q − λ_q ∇λ_p)`, the Whitney function with unit mean
//!   tangential component along `e`;
//! * `G_e = |e| ∇(λ_p λ_q)` (order 1 only), tangential component `λ_p − λ_q`.
//!
//! For a face `(a, b, c)` with `a < b < c` (order 1 only):
//! `|e_ab| λ_c w_ab` and `|e_ac| λ_b w_ac` with `w_xy = λ_x ∇λ_y − λ_y ∇λ_x`.
//! Face functions have vanishing tangential trace on every edge.
//!
//! Degrees of freedom, for a field `v`:
//! * edge: `(1/|e|) ∫_e v·t ds` and `(3/|e|) ∫_e v·t (λ_p − λ_q) ds`;
//! * face: the two mean tangential moments `(1/|F|) ∫_F r·t_i dA` of the
//!   remainder `r = v − (edge part)`, with `t_1 ∥ x_b − x_a`, `t_2 ∥ x_c − x_a`.

mod assembly;
mod interpolate;

pub use assembly::{assemble, assemble_load, SystemMatrix};
pub use interpolate::{hcurl_error, interpolate, ErrorNorms, SampledField};

use crate::config::{CVec3, C64};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point, TET_EDGES, TET_FACES};
use crate::quadrature::triangle_rule;
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use std::sync::Arc;

/// Maximum number of local basis functions (order 1).
pub const MAX_LOCAL: usize = 20;

/// Mesh entity a degree of freedom is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Edge(usize),
    Face(usize),
}

/// A degree of freedom: an entity and the index of the moment on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dof {
    pub entity: Entity,
    pub moment: usize,
}

/// Nédélec space of order `k` on a mesh, with its boundary/interior split.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    order: usize,
    dofs: Vec<Dof>,
    on_boundary: Vec<bool>,
    boundary: Vec<usize>,
    interior: Vec<usize>,
    /// Inverse of the face moment matrices (order 1).
    face_moments_inv: Vec<Matrix2<f64>>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, order: usize) -> Result<Self> {
        if order > 1 {
            return Err(Error::Config(format!(
                "Nédélec order {order} not supported (0 or 1)"
            )));
        }
        let ne = mesh.edges().len();
        let nf = mesh.faces().len();
        let mut dofs = Vec::new();
        let mut on_boundary = Vec::new();
        let per_edge = order + 1;
        for e in 0..ne {
            for m in 0..per_edge {
                dofs.push(Dof {
                    entity: Entity::Edge(e),
                    moment: m,
                });
                on_boundary.push(mesh.edge_boundary_index(e).is_some());
            }
        }
        if order == 1 {
            for f in 0..nf {
                for m in 0..2 {
                    dofs.push(Dof {
                        entity: Entity::Face(f),
                        moment: m,
                    });
                    on_boundary.push(mesh.face_boundary_index(f).is_some());
                }
            }
        }
        let boundary = (0..dofs.len()).filter(|&i| on_boundary[i]).collect();
        let interior = (0..dofs.len()).filter(|&i| !on_boundary[i]).collect();
        let mut space = Self {
            mesh,
            order,
            dofs,
            on_boundary,
            boundary,
            interior,
            face_moments_inv: Vec::new(),
        };
        if order == 1 {
            space.face_moments_inv = (0..nf)
                .map(|f| space.face_moment_matrix(f))
                .collect::<Result<_>>()?;
        }
        Ok(space)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }
    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn ndofs(&self) -> usize {
        self.dofs.len()
    }
    pub fn dofs(&self) -> &[Dof] {
        &self.dofs
    }
    pub fn is_boundary_dof(&self, i: usize) -> bool {
        self.on_boundary[i]
    }
    /// Dofs whose entity lies on the boundary, ascending.
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary
    }
    /// Complement of [`boundary_dofs`](Self::boundary_dofs), ascending.
    pub fn interior_dofs(&self) -> &[usize] {
        &self.interior
    }
    pub fn local_dim(&self) -> usize {
        if self.order == 0 {
            6
        } else {
            MAX_LOCAL
        }
    }

    /// Global index of moment `m` on edge `e`.
    pub fn edge_dof(&self, e: usize, m: usize) -> usize {
        (self.order + 1) * e + m
    }

    /// Global index of moment `m` on face `f` (order 1).
    pub fn face_dof(&self, f: usize, m: usize) -> usize {
        2 * self.mesh.edges().len() + 2 * f + m
    }

    pub fn element(&self, t: usize) -> Element {
        Element::new(self, t)
    }

    fn face_moment_matrix(&self, f: usize) -> Result<Matrix2<f64>> {
        let t = self.mesh.face_tets(f)[0];
        let el = self.element(t);
        let lf = el.local_face_of(f);
        let rule = triangle_rule(4);
        let (tan, _) = el.face_tangents(lf);
        let mut m = Matrix2::zeros();
        let mut vals = [Vector3::zeros(); MAX_LOCAL];
        let mut curls = [Vector3::zeros(); MAX_LOCAL];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let bary = el.face_bary(lf, p);
            el.eval(&bary, &mut vals, &mut curls);
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] += w * vals[12 + 2 * lf + j].dot(&tan[i]);
                }
            }
        }
        m.try_inverse()
            .ok_or_else(|| Error::Config(format!("singular face moment matrix on face {f}")))
    }

    /// Field value and curl of coefficient vector `u` in tet `t` at barycentric point `bary`.
    pub fn eval_field(&self, u: &[C64], t: usize, bary: &[f64; 4]) -> (CVec3, CVec3) {
        let el = self.element(t);
        let mut vals = [Vector3::zeros(); MAX_LOCAL];
        let mut curls = [Vector3::zeros(); MAX_LOCAL];
        el.eval(bary, &mut vals, &mut curls);
        let mut v = CVec3::zeros();
        let mut c = CVec3::zeros();
        for i in 0..el.n {
            let coef = u[el.dofs[i]];
            v += vals[i].map(|x| coef * x);
            c += curls[i].map(|x| coef * x);
        }
        (v, c)
    }
}

/// Local basis of one tetrahedron.
#[derive(Debug, Clone)]
pub struct Element {
    /// Number of local functions (6 or 20).
    pub n: usize,
    /// Global dof of each local function.
    pub dofs: [usize; MAX_LOCAL],
    pub points: [Point; 4],
    pub grads: [Vector3<f64>; 4],
    pub volume: f64,
    /// Local vertex pair of each local edge ordered by global id, and its length.
    edges: [(usize, usize, f64); 6],
    /// Local vertices of each local face sorted by global id, with the
    /// scalings of its two functions.
    faces: [([usize; 3], [f64; 2]); 4],
    global_faces: [usize; 4],
}

impl Element {
    fn new(space: &FeSpace, t: usize) -> Self {
        let mesh = &space.mesh;
        let gv = mesh.tets()[t];
        let points = mesh.tet_points(t);
        let jac = Matrix3::from_columns(&[
            points[1] - points[0],
            points[2] - points[0],
            points[3] - points[0],
        ]);
        let volume = jac.determinant() / 6.0;
        // rows of J^{-1} are the gradients of λ1..λ3
        let inv = jac
            .try_inverse()
            .expect("tets are validated non-degenerate");
        let g1 = inv.row(0).transpose();
        let g2 = inv.row(1).transpose();
        let g3 = inv.row(2).transpose();
        let grads = [-(g1 + g2 + g3), g1, g2, g3];

        let mut dofs = [0usize; MAX_LOCAL];
        let mut edges = [(0, 0, 0.0); 6];
        let tet_edges = mesh.tet_edges(t);
        for (l, [a, b]) in TET_EDGES.iter().enumerate() {
            let (p, q) = if gv[*a] < gv[*b] { (*a, *b) } else { (*b, *a) };
            edges[l] = (p, q, (points[q] - points[p]).norm());
            dofs[l] = space.edge_dof(tet_edges[l], 0);
            if space.order == 1 {
                dofs[6 + l] = space.edge_dof(tet_edges[l], 1);
            }
        }
        let mut faces = [([0; 3], [0.0; 2]); 4];
        let tet_faces = *mesh.tet_faces(t);
        for (l, lf) in TET_FACES.iter().enumerate() {
            let mut s = *lf;
            s.sort_unstable_by_key(|&i| gv[i]);
            let [a, b, c] = s;
            faces[l] = (
                s,
                [
                    (points[b] - points[a]).norm(),
                    (points[c] - points[a]).norm(),
                ],
            );
            if space.order == 1 {
                dofs[12 + 2 * l] = space.face_dof(tet_faces[l], 0);
                dofs[12 + 2 * l + 1] = space.face_dof(tet_faces[l], 1);
            }
        }
        Self {
            n: space.local_dim(),
            dofs,
            points,
            grads,
            volume,
            edges,
            faces,
            global_faces: tet_faces,
        }
    }

    /// Physical point of a barycentric coordinate.
    pub fn point(&self, bary: &[f64; 4]) -> Point {
        self.points.iter().zip(bary).map(|(p, l)| p * *l).sum()
    }

    /// Evaluates all local functions and their curls.
    pub fn eval(
        &self,
        l: &[f64; 4],
        vals: &mut [Vector3<f64>; MAX_LOCAL],
        curls: &mut [Vector3<f64>; MAX_LOCAL],
    ) {
        let g = &self.grads;
        for (k, &(p, q, len)) in self.edges.iter().enumerate() {
            vals[k] = len * (l[p] * g[q] - l[q] * g[p]);
            curls[k] = 2.0 * len * g[p].cross(&g[q]);
            if self.n > 6 {
                vals[6 + k] = len * (l[p] * g[q] + l[q] * g[p]);
                curls[6 + k] = Vector3::zeros();
            }
        }
        if self.n > 6 {
            for (k, &([a, b, c], [sab, sac])) in self.faces.iter().enumerate() {
                let wab = l[a] * g[b] - l[b] * g[a];
                let wac = l[a] * g[c] - l[c] * g[a];
                let cab = 2.0 * g[a].cross(&g[b]);
                let cac = 2.0 * g[a].cross(&g[c]);
                vals[12 + 2 * k] = sab * l[c] * wab;
                curls[12 + 2 * k] = sab * (g[c].cross(&wab) + l[c] * cab);
                vals[13 + 2 * k] = sac * l[b] * wac;
                curls[13 + 2 * k] = sac * (g[b].cross(&wac) + l[b] * cac);
            }
        }
    }

    /// Local index of global face `f`.
    pub fn local_face_of(&self, f: usize) -> usize {
        self.global_faces
            .iter()
            .position(|&g| g == f)
            .expect("face belongs to element")
    }

    /// Unit tangents `t_1, t_2` of the moment definition on local face `lf`,
    /// and its area.
    pub fn face_tangents(&self, lf: usize) -> ([Vector3<f64>; 2], f64) {
        let [a, b, c] = self.faces[lf].0;
        let (ab, ac) = (
            self.points[b] - self.points[a],
            self.points[c] - self.points[a],
        );
        ([ab.normalize(), ac.normalize()], 0.5 * ab.cross(&ac).norm())
    }

    /// Tet barycentrics of a point given by barycentrics `p` of local face
    /// `lf` with respect to its sorted vertices.
    pub fn face_bary(&self, lf: usize, p: &[f64; 3]) -> [f64; 4] {
        let mut bary = [0.0; 4];
        for (k, &v) in self.faces[lf].0.iter().enumerate() {
            bary[v] = p[k];
        }
        bary
    }

    /// Tet barycentrics of a point at parameter `s ∈ [0,1]` along local edge
    /// `le`, running from its lower to its higher global vertex.
    pub fn edge_bary(&self, le: usize, s: f64) -> [f64; 4] {
        let (p, q, _) = self.edges[le];
        let mut bary = [0.0; 4];
        bary[p] = 1.0 - s;
        bary[q] = s;
        bary
    }
}

/// Evaluates a real vector expression in complex arithmetic.
pub(crate) fn scale_c(v: &Vector3<f64>, c: C64) -> CVec3 {
    v.map(|x| c * x)
}

/// `Σ_i conj(a_i) b_i` for complex 3-vectors.
pub(crate) fn cdot(a: &CVec3, b: &CVec3) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `Σ_i a_i b_i` for a complex and a real vector (no conjugation).
pub(crate) fn rdot(a: &CVec3, b: &Vector3<f64>) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Applies a real 2x2 matrix to a complex 2-vector.
pub(crate) fn solve2(m: &Matrix2<f64>, r: Vector2<C64>) -> Vector2<C64> {
    Vector2::new(
        m[(0, 0)] * r[0] + m[(0, 1)] * r[1],
        m[(1, 0)] * r[0] + m[(1, 1)] * r[1],
    )
}

impl FeSpace {
    pub(crate) fn face_moments_inv(&self, f: usize) -> &Matrix2<f64> {
        &self.face_moments_inv[f]
    }
}
