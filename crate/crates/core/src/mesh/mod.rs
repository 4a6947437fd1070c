//! Tetrahedral meshes with global edge/face numbering and an oriented
//! boundary surface.
//!
//! Conventions:
//! * tets are stored with positive signed volume;
//! * a global edge runs from its lower to its higher vertex id;
//! * a global face stores its vertex ids in ascending order;
//! * boundary faces are additionally stored counterclockwise seen from
//!   outside, so `(v1 - v0) x (v2 - v0)` is the outward normal.

mod generate;
mod msh;

pub use generate::{generate_cube, generate_cylinder, CylinderSpec};
pub use msh::{parse_msh, write_msh};

use crate::error::MeshError;
use nalgebra::Vector3;
use serde::Serialize;
use std::collections::HashMap;

pub type Point = Vector3<f64>;

/// Local vertex pairs of the six tet edges.
pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
/// Local faces; face `i` is opposite local vertex `i`.
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryFace {
    /// Global face id.
    pub face: usize,
    /// Vertex ids, counterclockwise seen from outside.
    pub vertices: [usize; 3],
    /// Global ids of the edges `(v0,v1)`, `(v1,v2)`, `(v2,v0)`.
    pub edges: [usize; 3],
    /// The unique tet owning this face.
    pub tet: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryEdge {
    pub edge: usize,
    /// Boundary face (index into `boundary_faces`) in which the edge runs counterclockwise.
    pub plus: usize,
    /// Boundary face in which the edge runs clockwise.
    pub minus: usize,
}

/// Orthonormal data attached to a boundary edge.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryEdgeFrame {
    pub edge: usize,
    pub tangent: Point,
    pub normal_plus: Point,
    pub normal_minus: Point,
    /// `t x n` on the `F+` side; points out of `F+`.
    pub nu_plus: Point,
    /// `t x n` on the `F-` side; points into `F-`.
    pub nu_minus: Point,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    tets: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    tet_edges: Vec<[usize; 6]>,
    tet_edge_signs: Vec<[i8; 6]>,
    tet_faces: Vec<[usize; 4]>,
    face_tets: Vec<Vec<usize>>,
    boundary_faces: Vec<BoundaryFace>,
    boundary_edges: Vec<BoundaryEdge>,
    edge_boundary_index: Vec<Option<usize>>,
    face_boundary_index: Vec<Option<usize>>,
    boundary_vertices: Vec<usize>,
    orientation_fixes: usize,
}

fn signed_volume(v: &[Point], t: &[usize; 4]) -> f64 {
    let a = v[t[1]] - v[t[0]];
    let b = v[t[2]] - v[t[0]];
    let c = v[t[3]] - v[t[0]];
    a.dot(&b.cross(&c)) / 6.0
}

impl Mesh {
    /// Builds topology from raw vertices and tets. Negatively oriented tets
    /// are repaired by swapping their last two vertices.
    pub fn from_tets(vertices: Vec<Point>, mut tets: Vec<[usize; 4]>) -> Result<Self, MeshError> {
        if tets.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut orientation_fixes = 0;
        let scale = vertices
            .iter()
            .fold(0.0f64, |m, p| m.max(p.amax()))
            .max(f64::MIN_POSITIVE);
        for (k, t) in tets.iter_mut().enumerate() {
            for &v in t.iter() {
                if v >= vertices.len() {
                    return Err(MeshError::DanglingVertex {
                        element: k,
                        vertex: v,
                    });
                }
            }
            let vol = signed_volume(&vertices, t);
            if vol.abs() <= 1e-14 * scale.powi(3) {
                return Err(MeshError::DegenerateTet(k));
            }
            if vol < 0.0 {
                t.swap(2, 3);
                orientation_fixes += 1;
            }
        }

        let mut edge_map: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut tet_edges = Vec::with_capacity(tets.len());
        let mut tet_edge_signs = Vec::with_capacity(tets.len());
        let mut face_map: HashMap<[usize; 3], usize> = HashMap::new();
        let mut faces = Vec::new();
        let mut face_tets: Vec<Vec<usize>> = Vec::new();
        let mut tet_faces = Vec::with_capacity(tets.len());

        for (k, t) in tets.iter().enumerate() {
            let mut te = [0; 6];
            let mut ts = [0i8; 6];
            for (l, [a, b]) in TET_EDGES.iter().enumerate() {
                let (ga, gb) = (t[*a], t[*b]);
                let key = [ga.min(gb), ga.max(gb)];
                let id = *edge_map.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
                te[l] = id;
                ts[l] = if ga < gb { 1 } else { -1 };
            }
            tet_edges.push(te);
            tet_edge_signs.push(ts);

            let mut tf = [0; 4];
            for (l, lf) in TET_FACES.iter().enumerate() {
                let mut key = [t[lf[0]], t[lf[1]], t[lf[2]]];
                key.sort_unstable();
                let id = *face_map.entry(key).or_insert_with(|| {
                    faces.push(key);
                    face_tets.push(Vec::new());
                    faces.len() - 1
                });
                face_tets[id].push(k);
                tf[l] = id;
            }
            tet_faces.push(tf);
        }

        if let Some(f) = face_tets.iter().position(|ts| ts.len() > 2) {
            return Err(MeshError::NonManifoldFace(faces[f], face_tets[f].len()));
        }

        // boundary faces: owned by exactly one tet, oriented outward
        let mut boundary_faces = Vec::new();
        let mut face_boundary_index = vec![None; faces.len()];
        for (k, t) in tets.iter().enumerate() {
            for l in 0..4 {
                let f = tet_faces[k][l];
                if face_tets[f].len() != 1 {
                    continue;
                }
                let [a, mut b, mut c] = faces[f];
                let opposite = vertices[t[l]];
                let n = (vertices[b] - vertices[a]).cross(&(vertices[c] - vertices[a]));
                if n.dot(&(vertices[a] - opposite)) < 0.0 {
                    std::mem::swap(&mut b, &mut c);
                }
                let key = |x: usize, y: usize| edge_map[&[x.min(y), x.max(y)]];
                face_boundary_index[f] = Some(boundary_faces.len());
                boundary_faces.push(BoundaryFace {
                    face: f,
                    vertices: [a, b, c],
                    edges: [key(a, b), key(b, c), key(c, a)],
                    tet: k,
                });
            }
        }

        let mut edge_faces: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
        for (bf, face) in boundary_faces.iter().enumerate() {
            for &e in &face.edges {
                edge_faces[e].push(bf);
            }
        }
        let mut boundary_edges = Vec::new();
        let mut edge_boundary_index = vec![None; edges.len()];
        for (e, adj) in edge_faces.iter().enumerate() {
            if adj.is_empty() {
                continue;
            }
            let [lo, hi] = edges[e];
            if adj.len() != 2 {
                return Err(MeshError::NonManifoldEdge(lo, hi, adj.len()));
            }
            let positive = |bf: usize| {
                let v = boundary_faces[bf].vertices;
                (0..3).any(|i| v[i] == lo && v[(i + 1) % 3] == hi)
            };
            let (p0, p1) = (positive(adj[0]), positive(adj[1]));
            let (plus, minus) = match (p0, p1) {
                (true, false) => (adj[0], adj[1]),
                (false, true) => (adj[1], adj[0]),
                _ => return Err(MeshError::Unorientable(lo, hi)),
            };
            edge_boundary_index[e] = Some(boundary_edges.len());
            boundary_edges.push(BoundaryEdge {
                edge: e,
                plus,
                minus,
            });
        }

        let mut on_boundary = vec![false; vertices.len()];
        for f in &boundary_faces {
            for &v in &f.vertices {
                on_boundary[v] = true;
            }
        }
        let boundary_vertices = (0..vertices.len()).filter(|&v| on_boundary[v]).collect();

        Ok(Self {
            vertices,
            tets,
            edges,
            faces,
            tet_edges,
            tet_edge_signs,
            tet_faces,
            face_tets,
            boundary_faces,
            boundary_edges,
            edge_boundary_index,
            face_boundary_index,
            boundary_vertices,
            orientation_fixes,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    pub fn tet_edges(&self, t: usize) -> &[usize; 6] {
        &self.tet_edges[t]
    }
    /// +1 if local edge `l` of tet `t` runs along the global edge direction.
    pub fn tet_edge_signs(&self, t: usize) -> &[i8; 6] {
        &self.tet_edge_signs[t]
    }
    pub fn tet_faces(&self, t: usize) -> &[usize; 4] {
        &self.tet_faces[t]
    }
    /// Tets sharing a face (one for boundary faces, two otherwise).
    pub fn face_tets(&self, f: usize) -> &[usize] {
        &self.face_tets[f]
    }
    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }
    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }
    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }
    pub fn edge_boundary_index(&self, e: usize) -> Option<usize> {
        self.edge_boundary_index[e]
    }
    pub fn face_boundary_index(&self, f: usize) -> Option<usize> {
        self.face_boundary_index[f]
    }
    /// Number of tets whose vertex order was flipped on construction.
    pub fn orientation_fixes(&self) -> usize {
        self.orientation_fixes
    }

    pub fn tet_points(&self, t: usize) -> [Point; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        signed_volume(&self.vertices, &self.tets[t])
    }

    pub fn volume(&self) -> f64 {
        (0..self.tets.len()).map(|t| self.tet_volume(t)).sum()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        (self.vertices[b] - self.vertices[a]).norm()
    }

    /// Unit tangent along the global edge direction (low to high vertex id).
    pub fn edge_tangent(&self, e: usize) -> Point {
        let [a, b] = self.edges[e];
        (self.vertices[b] - self.vertices[a]).normalize()
    }

    pub fn boundary_face_points(&self, bf: usize) -> [Point; 3] {
        self.boundary_faces[bf].vertices.map(|v| self.vertices[v])
    }

    /// `|F| n_F` for a boundary face.
    pub fn boundary_face_vector_area(&self, bf: usize) -> Point {
        let [a, b, c] = self.boundary_face_points(bf);
        0.5 * (b - a).cross(&(c - a))
    }

    pub fn boundary_face_area(&self, bf: usize) -> f64 {
        self.boundary_face_vector_area(bf).norm()
    }

    pub fn boundary_face_normal(&self, bf: usize) -> Point {
        self.boundary_face_vector_area(bf).normalize()
    }

    pub fn boundary_area(&self) -> f64 {
        (0..self.boundary_faces.len())
            .map(|f| self.boundary_face_area(f))
            .sum()
    }

    pub fn boundary_edge_frame(&self, be: usize) -> BoundaryEdgeFrame {
        let b = self.boundary_edges[be];
        let tangent = self.edge_tangent(b.edge);
        let normal_plus = self.boundary_face_normal(b.plus);
        let normal_minus = self.boundary_face_normal(b.minus);
        BoundaryEdgeFrame {
            edge: b.edge,
            tangent,
            normal_plus,
            normal_minus,
            nu_plus: tangent.cross(&normal_plus),
            nu_minus: tangent.cross(&normal_minus),
        }
    }

    /// `V - E + F` of the boundary surface.
    pub fn boundary_euler_characteristic(&self) -> i64 {
        self.boundary_vertices.len() as i64 - self.boundary_edges.len() as i64
            + self.boundary_faces.len() as i64
    }

    /// Largest element diameter (longest tet edge).
    pub fn mesh_size(&self) -> Result<f64, MeshError> {
        if self.tets.is_empty() {
            return Err(MeshError::Empty);
        }
        Ok((0..self.tets.len())
            .flat_map(|t| self.tet_edges[t].iter().map(|&e| self.edge_length(e)))
            .fold(0.0, f64::max))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, MeshError> {
        Self::from_tets(
            self.vertices.iter().map(|p| p * factor).collect(),
            self.tets.clone(),
        )
    }

    pub fn dump(&self) -> MeshDump {
        MeshDump {
            vertices: self.vertices.iter().map(|p| [p.x, p.y, p.z]).collect(),
            tets: self.tets.clone(),
            boundary_faces: self.boundary_faces.iter().map(|f| f.vertices).collect(),
            boundary_edges: self
                .boundary_edges
                .iter()
                .map(|b| self.edges[b.edge])
                .collect(),
        }
    }
}

/// Debug dump of a mesh, serialized as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct MeshDump {
    pub vertices: Vec<[f64; 3]>,
    pub tets: Vec<[usize; 4]>,
    pub boundary_faces: Vec<[usize; 3]>,
    pub boundary_edges: Vec<[usize; 2]>,
}
