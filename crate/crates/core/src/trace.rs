//! The boundary control space: lowest-order surface Nédélec functions `φ_e`
//! on the boundary triangulation, their rotated Rao-Wilton-Glisson partners
//! `ψ_e = φ_e × n`, closed-form surface curl and mass matrices, and the
//! transfer between controls and volume coefficient vectors.
//!
//! A control is one complex coefficient per boundary edge, indexed like
//! [`Mesh::boundary_edges`].

use crate::config::{CVec3, C64};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::nedelec::FeSpace;
use crate::sparse::CsrMatrix;
use nalgebra::{Matrix2, Vector2, Vector3};

/// Sign of boundary edge `be` within boundary face `bf`: `+1` on `F+`
/// (edge runs counterclockwise), `-1` on `F-`, `0` if not adjacent.
pub fn edge_sign(mesh: &Mesh, be: usize, bf: usize) -> f64 {
    let b = mesh.boundary_edges()[be];
    if b.plus == bf {
        1.0
    } else if b.minus == bf {
        -1.0
    } else {
        0.0
    }
}

/// Surface gradients of the three barycentric coordinates of a boundary face.
pub fn face_gradients(mesh: &Mesh, bf: usize) -> [Vector3<f64>; 3] {
    let p = mesh.boundary_face_points(bf);
    let n = mesh.boundary_face_normal(bf);
    let two_area = 2.0 * mesh.boundary_face_area(bf);
    [0, 1, 2].map(|i| n.cross(&(p[(i + 2) % 3] - p[(i + 1) % 3])) / two_area)
}

/// Barycentric coordinates of `x` with respect to the (ccw) vertices of a
/// boundary face; `x` is projected onto the face plane.
pub fn face_barycentric(mesh: &Mesh, bf: usize, x: &Point) -> [f64; 3] {
    let p = mesh.boundary_face_points(bf);
    let g = face_gradients(mesh, bf);
    // λ_i vanishes on the opposite edge, which contains vertex i + 1
    [0, 1, 2].map(|i| g[i].dot(&(x - p[(i + 1) % 3])))
}

fn local_vertex(mesh: &Mesh, bf: usize, v: usize) -> usize {
    mesh.boundary_faces()[bf]
        .vertices
        .iter()
        .position(|&w| w == v)
        .expect("vertex of face")
}

/// `φ_e(x)` for `x` in boundary face `bf` (zero if `e` is not an edge of `bf`).
pub fn phi_on_face(mesh: &Mesh, be: usize, bf: usize, x: &Point) -> Vector3<f64> {
    if edge_sign(mesh, be, bf) == 0.0 {
        return Vector3::zeros();
    }
    let e = mesh.boundary_edges()[be].edge;
    let [lo, hi] = mesh.edges()[e];
    let (l, m) = (local_vertex(mesh, bf, lo), local_vertex(mesh, bf, hi));
    let lam = face_barycentric(mesh, bf, x);
    let g = face_gradients(mesh, bf);
    mesh.edge_length(e) * (lam[l] * g[m] - lam[m] * g[l])
}

/// Rao-Wilton-Glisson function `ψ_e(x) = ±|e|/(2|F±|) (x − v±)` on `F±`,
/// where `v±` is the vertex of `F±` opposite to `e`.
pub fn psi_on_face(mesh: &Mesh, be: usize, bf: usize, x: &Point) -> Vector3<f64> {
    let s = edge_sign(mesh, be, bf);
    if s == 0.0 {
        return Vector3::zeros();
    }
    let e = mesh.boundary_edges()[be].edge;
    let [lo, hi] = mesh.edges()[e];
    let face = &mesh.boundary_faces()[bf];
    let opposite = *face
        .vertices
        .iter()
        .find(|&&v| v != lo && v != hi)
        .expect("triangle");
    let x_proj = project_to_face(mesh, bf, x);
    s * mesh.edge_length(e) / (2.0 * mesh.boundary_face_area(bf))
        * (x_proj - mesh.vertices()[opposite])
}

fn project_to_face(mesh: &Mesh, bf: usize, x: &Point) -> Point {
    let n = mesh.boundary_face_normal(bf);
    let p0 = mesh.boundary_face_points(bf)[0];
    x - n * n.dot(&(x - p0))
}

/// Boundary face containing `x` among the two faces adjacent to `be`.
fn locate(mesh: &Mesh, be: usize, x: &Point) -> Option<usize> {
    let b = mesh.boundary_edges()[be];
    [b.plus, b.minus].into_iter().find(|&bf| {
        let scale = mesh.edge_length(b.edge);
        let off_plane = mesh
            .boundary_face_normal(bf)
            .dot(&(x - mesh.boundary_face_points(bf)[0]))
            .abs();
        off_plane <= 1e-10 * scale && face_barycentric(mesh, bf, x).iter().all(|&l| l >= -1e-12)
    })
}

/// `φ_e(x)` for a point on the boundary; zero outside `F+ ∪ F-`.
pub fn eval_phi(mesh: &Mesh, be: usize, x: &Point) -> Vector3<f64> {
    locate(mesh, be, x).map_or_else(Vector3::zeros, |bf| phi_on_face(mesh, be, bf, x))
}

/// `ψ_e(x)` for a point on the boundary; zero outside `F+ ∪ F-`.
pub fn eval_psi(mesh: &Mesh, be: usize, x: &Point) -> Vector3<f64> {
    locate(mesh, be, x).map_or_else(Vector3::zeros, |bf| psi_on_face(mesh, be, bf, x))
}

/// Facewise constant `curl_Γ φ_e = ±|e|/|F±|` (also `div_Γ ψ_e`).
pub fn surface_curl_phi(mesh: &Mesh, be: usize, bf: usize) -> f64 {
    let e = mesh.boundary_edges()[be].edge;
    edge_sign(mesh, be, bf) * mesh.edge_length(e) / mesh.boundary_face_area(bf)
}

/// Value of the control field `z = Σ z_e φ_e` at `x` in face `bf`.
pub fn eval_control(mesh: &Mesh, z: &[C64], bf: usize, x: &Point) -> CVec3 {
    let face = &mesh.boundary_faces()[bf];
    let mut out = CVec3::zeros();
    for &e in &face.edges {
        let be = mesh
            .edge_boundary_index(e)
            .expect("boundary face edges are boundary edges");
        let phi = phi_on_face(mesh, be, bf, x);
        out += phi.map(|c| z[be] * c);
    }
    out
}

/// Surface curl matrix `K_ij = ∫_Γ curl_Γ φ_i curl_Γ φ_j`, assembled from
/// the facewise closed form `s_i s_j |e_i||e_j| / |F|`.
pub fn surface_curl_matrix(mesh: &Mesh) -> CsrMatrix<f64> {
    let n = mesh.boundary_edges().len();
    let mut trip = Vec::with_capacity(9 * mesh.boundary_faces().len());
    for (bf, face) in mesh.boundary_faces().iter().enumerate() {
        let area = mesh.boundary_face_area(bf);
        let idx = face
            .edges
            .map(|e| mesh.edge_boundary_index(e).expect("boundary edge"));
        let w = idx
            .map(|be| edge_sign(mesh, be, bf) * mesh.edge_length(mesh.boundary_edges()[be].edge));
        for i in 0..3 {
            for j in 0..3 {
                trip.push((idx[i], idx[j], w[i] * w[j] / area));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &trip)
}

/// Inverse Gram matrix `(B^T B)^{-1}` of the affine map from the reference
/// triangle, written through squared edge lengths: with `e_c = v1v2`,
/// `e_a = v1v3`, `e_b = v2v3`,
/// `1/(4|F|^2) [[|e_a|^2, (|e_b|^2 - |e_a|^2 - |e_c|^2)/2], [., |e_c|^2]]`.
pub fn inverse_gram(sq_a: f64, sq_b: f64, sq_c: f64, area: f64) -> Matrix2<f64> {
    let off = 0.5 * (sq_b - sq_a - sq_c);
    Matrix2::new(sq_a, off, off, sq_c) / (4.0 * area * area)
}

/// Coefficients `c[i][k]` of the reference functions `φ̂_i = Σ_k λ_k c[i][k]`
/// on the reference triangle, one per edge `(v1v2, v2v3, v3v1)` and oriented
/// clockwise.
const REF_COEFFS: [[[f64; 2]; 3]; 3] = [
    [[-1.0, 0.0], [-1.0, -1.0], [0.0, 0.0]],
    [[0.0, 0.0], [0.0, -1.0], [1.0, 0.0]],
    [[0.0, 1.0], [0.0, 0.0], [1.0, 1.0]],
];

/// `∫_F̂ φ̂_i^T B φ̂_j` using `∫_F̂ λ_k λ_l = (1 + δ_kl)/24`.
fn reference_mass(b: &Matrix2<f64>) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let mut s = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    let ck = Vector2::from(REF_COEFFS[i][k]);
                    let cl = Vector2::from(REF_COEFFS[j][l]);
                    let lam = if k == l { 2.0 / 24.0 } else { 1.0 / 24.0 };
                    s += lam * ck.dot(&(b * cl));
                }
            }
            out[i][j] = s;
            out[j][i] = s;
        }
    }
    out
}

/// Surface mass matrix `M_ij = ∫_Γ φ_i · φ_j` from the closed form
/// `s_i s_j |e_i||e_j| det(B_F) ∫_F̂ φ̂_i^T (B^T B)^{-1} φ̂_j` with `det(B_F) = 2|F|`.
pub fn surface_mass_matrix(mesh: &Mesh) -> Result<CsrMatrix<f64>> {
    let n = mesh.boundary_edges().len();
    let mut trip = Vec::with_capacity(9 * mesh.boundary_faces().len());
    for (bf, face) in mesh.boundary_faces().iter().enumerate() {
        let area = mesh.boundary_face_area(bf);
        let [p1, p2, p3] = mesh.boundary_face_points(bf);
        let (sq_c, sq_a, sq_b) = (
            (p2 - p1).norm_squared(),
            (p3 - p1).norm_squared(),
            (p3 - p2).norm_squared(),
        );
        if area <= 1e-14 * (sq_a + sq_b + sq_c) {
            return Err(Error::Config(format!("degenerate boundary face {bf}")));
        }
        let local = reference_mass(&inverse_gram(sq_a, sq_b, sq_c, area));
        let idx = face
            .edges
            .map(|e| mesh.edge_boundary_index(e).expect("boundary edge"));
        // reference functions are clockwise, global ones run low to high:
        // both carry the factor -s, whose square is one in every product
        let w = idx
            .map(|be| edge_sign(mesh, be, bf) * mesh.edge_length(mesh.boundary_edges()[be].edge));
        for i in 0..3 {
            for j in 0..3 {
                trip.push((idx[i], idx[j], w[i] * w[j] * 2.0 * area * local[i][j]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(n, n, &trip))
}

/// Surface curl and mass matrices of the control space.
#[derive(Debug, Clone)]
pub struct SurfaceOperators {
    pub curl: CsrMatrix<f64>,
    pub mass: CsrMatrix<f64>,
}

impl SurfaceOperators {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        Ok(Self {
            curl: surface_curl_matrix(mesh),
            mass: surface_mass_matrix(mesh)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.curl.nrows()
    }

    /// `‖curl_Γ z‖²`.
    pub fn curl_norm_sq(&self, z: &[C64]) -> f64 {
        self.curl.form(z, z).re
    }

    /// `‖z‖²` in L2 of the boundary.
    pub fn mass_norm_sq(&self, z: &[C64]) -> f64 {
        self.mass.form(z, z).re
    }

    /// `‖z‖²_{H(curl_Γ)} = z^H (M + K) z`.
    pub fn hcurl_norm_sq(&self, z: &[C64]) -> f64 {
        self.curl_norm_sq(z) + self.mass_norm_sq(z)
    }
}

/// Control coefficients of the discrete tangential gradient of the hat
/// function of vertex `v`: `z_e = (λ_v(hi) − λ_v(lo)) / |e|`.
pub fn vertex_gradient(mesh: &Mesh, v: usize) -> Vec<f64> {
    mesh.boundary_edges()
        .iter()
        .map(|b| {
            let [lo, hi] = mesh.edges()[b.edge];
            let d = f64::from(u8::from(hi == v)) - f64::from(u8::from(lo == v));
            d / mesh.edge_length(b.edge)
        })
        .collect()
}

fn check_len(len: usize, expected: usize) -> Result<()> {
    if len != expected {
        return Err(Error::Dimension { expected, got: len });
    }
    Ok(())
}

/// Lifting into the volume space: the boundary moments of the result are the
/// moments of the surface field `z`, all interior moments vanish.
///
/// The tangential trace of the Whitney function of a boundary edge coincides
/// with `φ_e`, so the mean tangential moment of `z` on `e` is `z_e`, and all
/// higher boundary moments of `z` (order 1) are zero.
pub fn lift(space: &FeSpace, z: &[C64]) -> Result<Vec<C64>> {
    let mesh = space.mesh();
    check_len(z.len(), mesh.boundary_edges().len())?;
    let mut u = vec![C64::default(); space.ndofs()];
    for (be, b) in mesh.boundary_edges().iter().enumerate() {
        u[space.edge_dof(b.edge, 0)] = z[be];
    }
    Ok(u)
}

/// Tangential trace onto the control space: the mean tangential moment of
/// `u` along every boundary edge.
pub fn tangential_trace(space: &FeSpace, u: &[C64]) -> Result<Vec<C64>> {
    check_len(u.len(), space.ndofs())?;
    Ok(space
        .mesh()
        .boundary_edges()
        .iter()
        .map(|b| u[space.edge_dof(b.edge, 0)])
        .collect())
}

/// Column indices of the lifting: the volume dof carrying each control coefficient.
pub fn lift_dofs(space: &FeSpace) -> Vec<usize> {
    space
        .mesh()
        .boundary_edges()
        .iter()
        .map(|b| space.edge_dof(b.edge, 0))
        .collect()
}

#[cfg(test)]
mod tests;
