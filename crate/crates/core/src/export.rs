//! VTK legacy ASCII output of a mesh with cellwise field samples.

use crate::config::C64;
use crate::nedelec::FeSpace;
use std::fmt::Write;

/// Writes the mesh as an unstructured grid with the real and imaginary
/// parts of the field `u` and of its curl sampled at tet centroids.
pub fn vtk_legacy(space: &FeSpace, u: &[C64], name: &str) -> String {
    let mesh = space.mesh();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# vtk DataFile Version 3.0\n{name}\nASCII\nDATASET UNSTRUCTURED_GRID"
    );
    let _ = writeln!(out, "POINTS {} double", mesh.vertices().len());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{:?} {:?} {:?}", p.x, p.y, p.z);
    }
    let nt = mesh.tets().len();
    let _ = writeln!(out, "CELLS {} {}", nt, 5 * nt);
    for t in mesh.tets() {
        let _ = writeln!(out, "4 {} {} {} {}", t[0], t[1], t[2], t[3]);
    }
    let _ = writeln!(out, "CELL_TYPES {nt}");
    for _ in 0..nt {
        out.push_str("10\n");
    }
    let samples: Vec<_> = (0..nt)
        .map(|t| space.eval_field(u, t, &[0.25; 4]))
        .collect();
    let _ = writeln!(out, "CELL_DATA {nt}");
    for (label, curl) in [("", false), ("curl_", true)] {
        for (part, f) in [
            ("re", (|c: C64| c.re) as fn(C64) -> f64),
            ("im", |c: C64| c.im),
        ] {
            let _ = writeln!(out, "VECTORS {label}{name}_{part} double");
            for (v, c) in &samples {
                let w = if curl { c } else { v };
                let _ = writeln!(out, "{:?} {:?} {:?}", f(w[0]), f(w[1]), f(w[2]));
            }
        }
    }
    out
}
