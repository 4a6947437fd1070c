//! Structured test geometries.

use super::{Mesh, Point};
use crate::error::MeshError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Unit cube `[0,1]^3` with `n` cells per axis, each split into the six
/// Kuhn tetrahedra around its main diagonal.
pub fn generate_cube(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter(
            "cube subdivisions must be >= 1".into(),
        ));
    }
    let np = n + 1;
    let id = |i: usize, j: usize, k: usize| i + np * (j + np * k);
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity(np * np * np);
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                vertices.push(Point::new(i as f64 * h, j as f64 * h, k as f64 * h));
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut tet = [id(c[0], c[1], c[2]), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        c[axis] += 1;
                        tet[step + 1] = id(c[0], c[1], c[2]);
                    }
                    tets.push(tet);
                }
            }
        }
    }
    Mesh::from_tets(vertices, tets)
}

/// Parameters of the extruded structured disk mesher.
///
/// Ring `i` (`1..=n_r`) of the disk carries `n_theta * i` vertices at radius
/// `radius * i / n_r`, so the outer polygon has `n_theta * n_r` sides and all
/// of its vertices lie exactly on the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub radius: f64,
    pub height: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_z: usize,
}

impl CylinderSpec {
    pub fn new(radius: f64, height: f64, n_r: usize, n_theta: usize, n_z: usize) -> Self {
        Self {
            radius,
            height,
            n_r,
            n_theta,
            n_z,
        }
    }

    /// Refinement level `m` of the family used for convergence studies:
    /// `n_r = m`, `n_theta = 6`, `n_z = 2m`.
    pub fn level(radius: f64, height: f64, m: usize) -> Self {
        Self::new(radius, height, m, 6, 2 * m)
    }

    /// Number of sides of the outer boundary polygon.
    pub fn outer_sides(&self) -> usize {
        self.n_theta * self.n_r
    }

    /// Exact volume of the polyhedral approximation.
    pub fn polyhedron_volume(&self) -> f64 {
        let n = self.outer_sides() as f64;
        self.height * 0.5 * n * self.radius * self.radius * (2.0 * PI / n).sin()
    }
}

fn disk(spec: &CylinderSpec) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut points = vec![[0.0, 0.0]];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..=spec.n_r {
        let r = spec.radius * i as f64 / spec.n_r as f64;
        let count = spec.n_theta * i;
        let mut ring = Vec::with_capacity(count);
        for j in 0..count {
            let t = 2.0 * PI * j as f64 / count as f64;
            ring.push(points.len());
            // boundary vertices land exactly on the circle up to sin/cos rounding
            points.push([r * t.cos(), r * t.sin()]);
        }
        rings.push(ring);
    }
    let mut triangles = Vec::new();
    let ring1 = &rings[1];
    for j in 0..ring1.len() {
        triangles.push([0, ring1[j], ring1[(j + 1) % ring1.len()]]);
    }
    for i in 2..=spec.n_r {
        let (inner, outer) = (&rings[i - 1], &rings[i]);
        let (na, nb) = (inner.len(), outer.len());
        // merge the two rings by angle; fractions j/n avoid rounding ties
        let (mut ia, mut ib) = (0usize, 0usize);
        while ia < na || ib < nb {
            let take_outer = ib < nb && (ia == na || (ib + 1) * na <= (ia + 1) * nb);
            if take_outer {
                triangles.push([inner[ia % na], outer[ib], outer[(ib + 1) % nb]]);
                ib += 1;
            } else {
                triangles.push([inner[ia], outer[ib % nb], inner[(ia + 1) % na]]);
                ia += 1;
            }
        }
    }
    (points, triangles)
}

/// Tetrahedralized polyhedral cylinder `{x^2 + y^2 < R^2, 0 < z < L}`
/// obtained by extruding a structured disk and splitting every prism into
/// three tets with diagonals chosen by global vertex id.
pub fn generate_cylinder(spec: &CylinderSpec) -> Result<Mesh, MeshError> {
    if !(spec.radius > 0.0 && spec.height > 0.0) {
        return Err(MeshError::InvalidParameter(
            "radius and height must be positive".into(),
        ));
    }
    if spec.n_r == 0 || spec.n_theta < 3 || spec.n_z == 0 {
        return Err(MeshError::InvalidParameter(format!(
            "degenerate cylinder counts n_r={}, n_theta={}, n_z={}",
            spec.n_r, spec.n_theta, spec.n_z
        )));
    }
    let (points2d, triangles) = disk(spec);
    let n2 = points2d.len();
    let mut vertices = Vec::with_capacity(n2 * (spec.n_z + 1));
    for k in 0..=spec.n_z {
        let z = spec.height * k as f64 / spec.n_z as f64;
        vertices.extend(points2d.iter().map(|p| Point::new(p[0], p[1], z)));
    }
    let mut tets = Vec::with_capacity(3 * triangles.len() * spec.n_z);
    for k in 0..spec.n_z {
        let (lo, hi) = (k * n2, (k + 1) * n2);
        for tri in &triangles {
            let mut s = *tri;
            s.sort_unstable();
            let [a, b, c] = s.map(|v| v + lo);
            let [ta, tb, tc] = s.map(|v| v + hi);
            tets.push([a, b, c, tc]);
            tets.push([a, b, tb, tc]);
            tets.push([a, ta, tb, tc]);
        }
    }
    Mesh::from_tets(vertices, tets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_counts_and_measures() {
        let m = generate_cube(1).unwrap();
        assert_eq!(m.tets().len(), 6);
        assert_eq!(m.vertices().len(), 8);
        // 12 cube edges + 6 face diagonals + 1 main diagonal
        assert_eq!(m.edges().len(), 19);
        assert_eq!(m.boundary_faces().len(), 12);
        assert!((m.boundary_area() - 6.0).abs() < 1e-12);
        let m2 = generate_cube(2).unwrap();
        assert_eq!(m2.tets().len(), 48);
        assert!((m2.volume() - 1.0).abs() < 1e-12);
        assert!(matches!(
            generate_cube(0),
            Err(MeshError::InvalidParameter(_))
        ));
    }

    #[test]
    fn cube_side_areas_sum_to_one() {
        let m = generate_cube(3).unwrap();
        let mut sides = [0.0; 6];
        for bf in 0..m.boundary_faces().len() {
            let n = m.boundary_face_normal(bf);
            let (axis, val) = (0..3)
                .map(|a| (a, n[a]))
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .unwrap();
            sides[2 * axis + usize::from(val > 0.0)] += m.boundary_face_area(bf);
        }
        for s in sides {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_cylinder_is_closed() {
        let m = generate_cylinder(&CylinderSpec::new(0.5, 1.0, 1, 4, 1)).unwrap();
        assert_eq!(m.boundary_euler_characteristic(), 2);
        assert!((0..m.tets().len()).all(|t| m.tet_volume(t) > 0.0));
    }

    #[test]
    fn cylinder_volume_matches_inscribed_polygon_and_increases() {
        let mut prev = 0.0;
        for nt in [4, 6, 8, 16, 32] {
            let spec = CylinderSpec::new(0.5, 1.0, 1, nt, 2);
            let m = generate_cylinder(&spec).unwrap();
            let v = m.volume();
            let oracle = 1.0 * (nt as f64 * 0.25 / 2.0) * (2.0 * PI / nt as f64).sin();
            assert!((v - oracle).abs() < 1e-12);
            assert!(v < PI / 4.0 && v > prev);
            prev = v;
        }
        assert!((PI / 4.0 - prev) / (PI / 4.0) < 0.01);
    }

    #[test]
    fn outer_vertices_lie_on_radius() {
        let spec = CylinderSpec::new(0.5, 1.0, 3, 5, 2);
        let m = generate_cylinder(&spec).unwrap();
        let rmax = m
            .vertices()
            .iter()
            .map(|p| p.x.hypot(p.y))
            .fold(0.0, f64::max);
        assert!((rmax - 0.5).abs() < 1e-15);
        let on_rim = m
            .vertices()
            .iter()
            .filter(|p| (p.x.hypot(p.y) - 0.5).abs() < 1e-12)
            .count();
        assert_eq!(on_rim, spec.outer_sides() * (spec.n_z + 1));
        assert!((m.volume() - spec.polyhedron_volume()).abs() < 1e-12);
    }

    #[test]
    fn refinement_halves_mesh_size() {
        for m in 1..4 {
            let h1 = generate_cylinder(&CylinderSpec::level(0.5, 1.0, m))
                .unwrap()
                .mesh_size()
                .unwrap();
            let h2 = generate_cylinder(&CylinderSpec::level(0.5, 1.0, 2 * m))
                .unwrap()
                .mesh_size()
                .unwrap();
            let ratio = h2 / h1;
            assert!(ratio > 0.5 / 1.5 && ratio < 0.5 * 1.5, "ratio {ratio}");
        }
    }

    #[test]
    fn invalid_cylinder_parameters() {
        assert!(generate_cylinder(&CylinderSpec::new(-1.0, 1.0, 1, 4, 1)).is_err());
        assert!(generate_cylinder(&CylinderSpec::new(1.0, 1.0, 0, 4, 1)).is_err());
        assert!(generate_cylinder(&CylinderSpec::new(1.0, 1.0, 1, 4, 0)).is_err());
    }
}
