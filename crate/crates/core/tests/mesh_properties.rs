use eddy_core::mesh::{
    generate_cube, generate_cylinder, parse_msh, write_msh, CylinderSpec, Mesh, Point,
};
use eddy_core::nedelec::FeSpace;
use eddy_core::trace::SurfaceOperators;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn jittered_cube(n: usize, seed: u64) -> Mesh {
    let m = generate_cube(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / n as f64;
    let v = m
        .vertices()
        .iter()
        .map(|p| {
            if (0..3).all(|a| p[a] > 1e-12 && p[a] < 1.0 - 1e-12) {
                p + Point::new(
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.2..0.2),
                ) * h
            } else {
                *p
            }
        })
        .collect();
    Mesh::from_tets(v, m.tets().to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cylinder_topology_and_volume(n_r in 1usize..4, n_theta in 3usize..8, n_z in 1usize..4) {
        let spec = CylinderSpec::new(0.5, 1.0, n_r, n_theta, n_z);
        let mesh = generate_cylinder(&spec).unwrap();
        prop_assert_eq!(mesh.boundary_euler_characteristic(), 2);
        prop_assert!((mesh.volume() - spec.polyhedron_volume()).abs() <= 1e-12);
        // Euler characteristic of the solid ball: V − E + F − T = 1
        let chi = mesh.vertices().len() as i64 - mesh.edges().len() as i64 + mesh.faces().len() as i64 - mesh.tets().len() as i64;
        prop_assert_eq!(chi, 1);
        for p in mesh.vertices() {
            prop_assert!(p.x.hypot(p.y) <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn scaling_scales_size_volume_and_surface_matrices(factor in 0.1f64..10.0, seed in any::<u64>()) {
        let mesh = jittered_cube(2, seed);
        let scaled = mesh.scaled(factor).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        prop_assert!(rel(scaled.mesh_size().unwrap(), factor * mesh.mesh_size().unwrap()) < 1e-13);
        prop_assert!(rel(scaled.volume(), factor.powi(3) * mesh.volume()) < 1e-12);
        let (a, b) = (SurfaceOperators::new(&mesh).unwrap(), SurfaceOperators::new(&scaled).unwrap());
        // curl_Γ φ_e scales like 1/h and φ_e like h^0 with |e| normalization
        for ((_, _, x), (_, _, y)) in a.curl.triplets().zip(b.curl.triplets()) {
            prop_assert!((y - x).abs() <= 1e-12 * x.abs().max(1e-12));
        }
        for ((_, _, x), (_, _, y)) in a.mass.triplets().zip(b.mass.triplets()) {
            prop_assert!((y - factor * factor * x).abs() <= 1e-12 * (factor * factor * x).abs().max(1e-12));
        }
    }

    #[test]
    fn msh_round_trip_preserves_geometry(seed in any::<u64>()) {
        let mesh = jittered_cube(2, seed);
        let text = write_msh(&mesh);
        let back = parse_msh(text.as_bytes()).unwrap();
        prop_assert_eq!(back.vertices(), mesh.vertices());
        prop_assert_eq!(back.tets(), mesh.tets());
        prop_assert_eq!(back.volume().to_bits(), mesh.volume().to_bits());
    }

    #[test]
    fn dof_partition_is_complete(n in 1usize..3, order in 0usize..2) {
        let space = FeSpace::new(Arc::new(generate_cube(n).unwrap()), order).unwrap();
        let mut all: Vec<usize> = space.boundary_dofs().iter().chain(space.interior_dofs()).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..space.ndofs()).collect::<Vec<_>>());
        let per_edge = if order == 0 { 1 } else { 2 };
        let per_face = if order == 0 { 0 } else { 2 };
        let mesh = space.mesh();
        let bfaces = mesh.boundary_faces().len();
        prop_assert_eq!(space.boundary_dofs().len(), per_edge * mesh.boundary_edges().len() + per_face * bfaces);
    }
}
