use super::*;
use crate::mesh::{generate_cube, generate_cylinder, CylinderSpec};
use crate::quadrature::{line_rule, triangle_rule};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn meshes() -> Vec<Mesh> {
    vec![
        crate::mesh::tests::reference_tet(),
        generate_cube(2).unwrap(),
        generate_cylinder(&CylinderSpec::level(0.5, 1.0, 1)).unwrap(),
    ]
}

fn random_control(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn face_point(mesh: &Mesh, bf: usize, bary: &[f64; 3]) -> Point {
    let p = mesh.boundary_face_points(bf);
    p[0] * bary[0] + p[1] * bary[1] + p[2] * bary[2]
}

#[test]
fn phi_has_unit_tangential_moment_on_its_edge_only() {
    let rule = line_rule(4);
    for mesh in meshes() {
        for (be, b) in mesh.boundary_edges().iter().enumerate() {
            for bf in [b.plus, b.minus] {
                for &e in &mesh.boundary_faces()[bf].edges {
                    let [lo, hi] = mesh.edges()[e];
                    let (a, c) = (mesh.vertices()[lo], mesh.vertices()[hi]);
                    let t = mesh.edge_tangent(e);
                    let moment: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(s, w)| {
                            w * phi_on_face(&mesh, be, bf, &(a * s[0] + c * s[1])).dot(&t)
                        })
                        .sum();
                    let expected = if e == b.edge { 1.0 } else { 0.0 };
                    assert!(
                        (moment - expected).abs() < 1e-12,
                        "edge {be}, face {bf}: {moment}"
                    );
                }
            }
        }
    }
}

#[test]
fn psi_is_phi_rotated_and_has_unit_normal_flux() {
    let rule = triangle_rule(3);
    for mesh in meshes() {
        for (be, b) in mesh.boundary_edges().iter().enumerate() {
            let frame = mesh.boundary_edge_frame(be);
            for (bf, nu) in [(b.plus, frame.nu_plus), (b.minus, frame.nu_minus)] {
                let n = mesh.boundary_face_normal(bf);
                for p in &rule.points {
                    let x = face_point(&mesh, bf, p);
                    let phi = phi_on_face(&mesh, be, bf, &x);
                    let psi = psi_on_face(&mesh, be, bf, &x);
                    assert!((psi - phi.cross(&n)).norm() < 1e-12);
                    assert!(phi.dot(&n).abs() < 1e-12);
                }
                // normal component of ψ across its own edge is one everywhere on it
                let [lo, hi] = mesh.edges()[b.edge];
                let mid = 0.5 * (mesh.vertices()[lo] + mesh.vertices()[hi]);
                assert!(
                    (psi_on_face(&mesh, be, bf, &mid).dot(&nu) - 1.0).abs() < 1e-12,
                    "edge {be}"
                );
            }
        }
    }
}

#[test]
fn evaluation_locates_the_adjacent_faces() {
    let mesh = generate_cube(1).unwrap();
    let b = mesh.boundary_edges()[0];
    let x = face_point(&mesh, b.plus, &[0.2, 0.3, 0.5]);
    assert_eq!(eval_phi(&mesh, 0, &x), phi_on_face(&mesh, 0, b.plus, &x));
    assert_eq!(eval_psi(&mesh, 0, &x), psi_on_face(&mesh, 0, b.plus, &x));
    assert_eq!(
        eval_phi(&mesh, 0, &Point::new(0.5, 0.5, 0.5)),
        Vector3::zeros()
    );
}

#[test]
fn surface_curl_matches_finite_differences() {
    let mesh = generate_cylinder(&CylinderSpec::level(0.5, 1.0, 1)).unwrap();
    let h = 1e-6;
    for be in (0..mesh.boundary_edges().len()).step_by(7) {
        let b = mesh.boundary_edges()[be];
        for bf in [b.plus, b.minus] {
            let n = mesh.boundary_face_normal(bf);
            let x = face_point(&mesh, bf, &[0.3, 0.3, 0.4]);
            let [p0, p1, _] = mesh.boundary_face_points(bf);
            let e1 = (p1 - p0).normalize();
            let e2 = n.cross(&e1);
            let d = |dir: Point| {
                (phi_on_face(&mesh, be, bf, &(x + h * dir))
                    - phi_on_face(&mesh, be, bf, &(x - h * dir)))
                    / (2.0 * h)
            };
            // curl_Γ v = ∂_1 v·e2 − ∂_2 v·e1 in the oriented frame (e1, e2, n)
            let fd = d(e1).dot(&e2) - d(e2).dot(&e1);
            assert!(
                (fd - surface_curl_phi(&mesh, be, bf)).abs() < 1e-6,
                "edge {be}, face {bf}"
            );
        }
    }
}

fn quadrature_matrices(mesh: &Mesh) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = mesh.boundary_edges().len();
    let rule = triangle_rule(4);
    let mut k = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for (bf, face) in mesh.boundary_faces().iter().enumerate() {
        let area = mesh.boundary_face_area(bf);
        let idx = face.edges.map(|e| mesh.edge_boundary_index(e).unwrap());
        for p in &rule.points {
            let w = rule.weights[rule.points.iter().position(|q| q == p).unwrap()] * area;
            let x = face_point(mesh, bf, p);
            for &i in &idx {
                for &j in &idx {
                    m[(i, j)] +=
                        w * phi_on_face(mesh, i, bf, &x).dot(&phi_on_face(mesh, j, bf, &x));
                    k[(i, j)] += w * surface_curl_phi(mesh, i, bf) * surface_curl_phi(mesh, j, bf);
                }
            }
        }
    }
    (k, m)
}

#[test]
fn closed_form_matrices_match_quadrature() {
    for mesh in meshes() {
        let ops = SurfaceOperators::new(&mesh).unwrap();
        let (k, m) = quadrature_matrices(&mesh);
        let kd = ops.curl.to_dense();
        let md = ops.mass.to_dense();
        assert!((kd - &k).abs().max() < 1e-12 * k.abs().max());
        assert!((md - &m).abs().max() < 1e-12 * m.abs().max());
        assert!(ops.curl.is_symmetric_exact());
        assert!(ops.mass.is_symmetric_exact());
    }
}

#[test]
fn reference_gram_is_identity_for_the_unit_right_triangle() {
    let g = inverse_gram(1.0, 2.0, 1.0, 0.5);
    assert!((g - Matrix2::identity()).norm() < 1e-15);
    // equilateral triangle with unit sides
    let area = 3f64.sqrt() / 4.0;
    let g = inverse_gram(1.0, 1.0, 1.0, area);
    let expected = Matrix2::new(1.0, -0.5, -0.5, 1.0) / (4.0 * area * area);
    assert!((g - expected).norm() < 1e-14);
}

#[test]
fn curl_kernel_is_spanned_by_vertex_gradients() {
    for mesh in meshes() {
        let ops = SurfaceOperators::new(&mesh).unwrap();
        let eig = ops.curl.to_dense().symmetric_eigenvalues();
        let scale = eig.amax();
        let kernel = eig.iter().filter(|v| v.abs() < 1e-10 * scale).count();
        assert_eq!(kernel, mesh.boundary_vertices().len() - 1);
        assert!(eig.min() > -1e-10 * scale);
        for &v in mesh.boundary_vertices() {
            let g: Vec<C64> = vertex_gradient(&mesh, v)
                .into_iter()
                .map(C64::from)
                .collect();
            let g_sq: f64 = g.iter().map(|v| v.norm_sqr()).sum();
            assert!(ops.curl_norm_sq(&g) < 1e-13 * scale * g_sq);
            assert!(ops.mass_norm_sq(&g) > 0.0);
        }
    }
}

#[test]
fn mass_matrix_is_positive_definite() {
    for mesh in meshes() {
        let ops = SurfaceOperators::new(&mesh).unwrap();
        let eig = ops.mass.to_dense().symmetric_eigenvalues();
        assert!(eig.min() > 1e-8 * eig.max(), "{}", eig.min());
    }
}

#[test]
fn norms_are_consistent() {
    let mesh = generate_cube(2).unwrap();
    let ops = SurfaceOperators::new(&mesh).unwrap();
    let z = random_control(ops.dim(), 4);
    let total = ops.hcurl_norm_sq(&z);
    assert!((total - ops.curl_norm_sq(&z) - ops.mass_norm_sq(&z)).abs() < 1e-14 * total);
    let scaled: Vec<C64> = z.iter().map(|v| v * C64::new(0.0, 2.0)).collect();
    assert!((ops.hcurl_norm_sq(&scaled) - 4.0 * total).abs() < 1e-12 * total);
}

#[test]
fn lift_and_trace_round_trip() {
    let mesh = Arc::new(generate_cylinder(&CylinderSpec::level(0.5, 1.0, 1)).unwrap());
    for order in [0, 1] {
        let space = FeSpace::new(mesh.clone(), order).unwrap();
        let z = random_control(mesh.boundary_edges().len(), 8);
        let u = lift(&space, &z).unwrap();
        assert_eq!(tangential_trace(&space, &u).unwrap(), z);
        for (i, ui) in u.iter().enumerate() {
            if !space.is_boundary_dof(i) {
                assert_eq!(*ui, C64::default());
            }
        }
        let cols = lift_dofs(&space);
        assert_eq!(cols.len(), z.len());
        assert!(cols.iter().all(|&c| space.is_boundary_dof(c)));
        assert!(matches!(
            lift(&space, &z[1..]),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            tangential_trace(&space, &u[1..]),
            Err(Error::Dimension { .. })
        ));
    }
}

#[test]
fn tangential_part_of_lift_equals_control_field() {
    let mesh = Arc::new(generate_cube(2).unwrap());
    let space = FeSpace::new(mesh.clone(), 1).unwrap();
    let z = random_control(mesh.boundary_edges().len(), 21);
    let u = lift(&space, &z).unwrap();
    let rule = triangle_rule(3);
    for (bf, face) in mesh.boundary_faces().iter().enumerate() {
        let n = mesh.boundary_face_normal(bf);
        let gv = mesh.tets()[face.tet];
        for p in &rule.points {
            let bary = [0, 1, 2, 3].map(|k| {
                face.vertices
                    .iter()
                    .position(|&g| g == gv[k])
                    .map_or(0.0, |j| p[j])
            });
            let (v, _) = space.eval_field(&u, face.tet, &bary);
            let tangential = v - n.map(C64::from) * (v[0] * n.x + v[1] * n.y + v[2] * n.z);
            let x = face_point(&mesh, bf, p);
            let expected = eval_control(&mesh, &z, bf, &x);
            assert!((tangential - expected).norm() < 1e-12, "face {bf}");
        }
    }
}
