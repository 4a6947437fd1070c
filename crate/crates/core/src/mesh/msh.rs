//! Gmsh MSH 2.2 ASCII reader and writer.
//!
//! Only `$MeshFormat`, `$Nodes` and `$Elements` sections are interpreted.
//! Elements of type 4 (4-node tetrahedron) define the mesh; every other
//! element type (points, lines, triangles, ...) is skipped, because the
//! boundary is derived from the volume topology. Unknown sections such as
//! `$PhysicalNames` are ignored.

use super::{Mesh, Point};
use crate::error::MeshError;
use std::collections::HashMap;
use std::fmt::Write;

const TET4: u32 = 4;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_nonempty(&mut self) -> Option<(usize, &'a str)> {
        self.inner
            .by_ref()
            .map(|(i, l)| (i + 1, l.trim()))
            .find(|(_, l)| !l.is_empty())
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), MeshError> {
        self.next_nonempty().ok_or_else(|| MeshError::Parse {
            line: 0,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn parse_num<T: std::str::FromStr>(
    tok: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, MeshError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| MeshError::Parse {
            line,
            msg: format!("invalid or missing {what}"),
        })
}

/// Parses an MSH 2.2 ASCII document.
pub fn parse_msh(input: &[u8]) -> Result<Mesh, MeshError> {
    let text = std::str::from_utf8(input).map_err(|e| MeshError::Parse {
        line: 0,
        msg: e.to_string(),
    })?;
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let mut seen_format = false;
    let mut node_index: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut tets = Vec::new();

    while let Some((lineno, line)) = lines.next_nonempty() {
        match line {
            "$MeshFormat" => {
                let (ln, header) = lines.expect("format header")?;
                let mut tok = header.split_whitespace();
                let version = tok.next().unwrap_or("");
                if !version.starts_with("2.") {
                    return Err(MeshError::UnsupportedVersion(format!(
                        "MSH version {version}"
                    )));
                }
                let file_type: u32 = parse_num(tok.next(), ln, "file type")?;
                if file_type != 0 {
                    return Err(MeshError::UnsupportedVersion("binary MSH".into()));
                }
                expect_end(&mut lines, "$EndMeshFormat")?;
                seen_format = true;
            }
            "$Nodes" => {
                require_format(seen_format, lineno)?;
                let (ln, count) = lines.expect("node count")?;
                let n: usize = parse_num(Some(count), ln, "node count")?;
                vertices.reserve(n);
                for _ in 0..n {
                    let (ln, l) = lines.expect("node")?;
                    let mut tok = l.split_whitespace();
                    let id: usize = parse_num(tok.next(), ln, "node id")?;
                    let x: f64 = parse_num(tok.next(), ln, "x")?;
                    let y: f64 = parse_num(tok.next(), ln, "y")?;
                    let z: f64 = parse_num(tok.next(), ln, "z")?;
                    if node_index.insert(id, vertices.len()).is_some() {
                        return Err(MeshError::Parse {
                            line: ln,
                            msg: format!("duplicate node id {id}"),
                        });
                    }
                    vertices.push(Point::new(x, y, z));
                }
                expect_end(&mut lines, "$EndNodes")?;
            }
            "$Elements" => {
                require_format(seen_format, lineno)?;
                let (ln, count) = lines.expect("element count")?;
                let n: usize = parse_num(Some(count), ln, "element count")?;
                for _ in 0..n {
                    let (ln, l) = lines.expect("element")?;
                    let mut tok = l.split_whitespace();
                    let _id: usize = parse_num(tok.next(), ln, "element id")?;
                    let kind: u32 = parse_num(tok.next(), ln, "element type")?;
                    let ntags: usize = parse_num(tok.next(), ln, "tag count")?;
                    if kind != TET4 {
                        continue;
                    }
                    let mut tok = tok.skip(ntags);
                    let mut tet = [0usize; 4];
                    for slot in &mut tet {
                        let node: usize = parse_num(tok.next(), ln, "node reference")?;
                        *slot = *node_index.get(&node).ok_or(MeshError::DanglingVertex {
                            element: tets.len(),
                            vertex: node,
                        })?;
                    }
                    tets.push(tet);
                }
                expect_end(&mut lines, "$EndElements")?;
            }
            l if l.starts_with('$') && !l.starts_with("$End") => {
                let end = format!("$End{}", &l[1..]);
                while let Some((_, l)) = lines.next_nonempty() {
                    if l == end {
                        break;
                    }
                }
            }
            other => {
                return Err(MeshError::Parse {
                    line: lineno,
                    msg: format!("unexpected content '{other}'"),
                });
            }
        }
    }
    if !seen_format {
        return Err(MeshError::UnsupportedVersion(
            "missing $MeshFormat section".into(),
        ));
    }
    Mesh::from_tets(vertices, tets)
}

fn require_format(seen: bool, line: usize) -> Result<(), MeshError> {
    if seen {
        Ok(())
    } else {
        Err(MeshError::Parse {
            line,
            msg: "section before $MeshFormat".into(),
        })
    }
}

fn expect_end(lines: &mut Lines<'_>, tag: &str) -> Result<(), MeshError> {
    let (ln, l) = lines.expect(tag)?;
    if l == tag {
        Ok(())
    } else {
        Err(MeshError::Parse {
            line: ln,
            msg: format!("expected {tag}, found '{l}'"),
        })
    }
}

/// Serializes the volume mesh as MSH 2.2 ASCII (1-based ids, tets only).
pub fn write_msh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(out, "{}", mesh.vertices().len());
    for (i, p) in mesh.vertices().iter().enumerate() {
        // {:?} prints the shortest representation that round-trips exactly
        let _ = writeln!(out, "{} {:?} {:?} {:?}", i + 1, p.x, p.y, p.z);
    }
    out.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(out, "{}", mesh.tets().len());
    for (i, t) in mesh.tets().iter().enumerate() {
        let _ = writeln!(
            out,
            "{} 4 2 0 1 {} {} {} {}",
            i + 1,
            t[0] + 1,
            t[1] + 1,
            t[2] + 1,
            t[3] + 1
        );
    }
    out.push_str("$EndElements\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_cube;

    const SINGLE: &str = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n\
$Elements\n5\n1 2 2 0 1 1 2 3\n2 4 2 0 1 1 2 3 4\n3 15 2 0 1 1\n4 1 2 0 1 1 2\n5 2 2 0 1 1 3 4\n$EndElements\n";

    #[test]
    fn single_tet_file() {
        let m = parse_msh(SINGLE.as_bytes()).unwrap();
        assert_eq!(m.tets().len(), 1);
        assert_eq!(m.edges().len(), 6);
        assert_eq!(m.boundary_faces().len(), 4);
        assert_eq!(m.boundary_edges().len(), 6);
    }

    #[test]
    fn version_four_is_rejected() {
        let text = "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n";
        assert!(matches!(
            parse_msh(text.as_bytes()),
            Err(MeshError::UnsupportedVersion(_))
        ));
        let binary = "$MeshFormat\n2.2 1 8\n$EndMeshFormat\n";
        assert!(matches!(
            parse_msh(binary.as_bytes()),
            Err(MeshError::UnsupportedVersion(_))
        ));
    }

    #[test]
    fn dangling_node_reference() {
        let text = SINGLE.replace("2 4 2 0 1 1 2 3 4", "2 4 2 0 1 1 2 3 9");
        assert!(matches!(
            parse_msh(text.as_bytes()),
            Err(MeshError::DanglingVertex { vertex: 9, .. })
        ));
    }

    #[test]
    fn non_manifold_boundary_is_rejected() {
        // two tets sharing only the edge (1,2): that edge has four boundary faces
        let text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n6\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n5 0 -1 0\n6 0 0 -1\n$EndNodes\n\
$Elements\n2\n1 4 0 1 2 3 4\n2 4 0 1 2 5 6\n$EndElements\n";
        assert!(matches!(
            parse_msh(text.as_bytes()),
            Err(MeshError::NonManifoldEdge(0, 1, 4))
        ));
    }

    #[test]
    fn kuhn_cube_counts() {
        let text = write_msh(&generate_cube(1).unwrap());
        let m = parse_msh(text.as_bytes()).unwrap();
        assert_eq!(m.vertices().len(), 8);
        assert_eq!(m.edges().len(), 19);
        assert_eq!(m.boundary_faces().len(), 12);
    }

    #[test]
    fn negative_tets_counted_and_roundtrip_is_stable() {
        let text = SINGLE.replace("2 4 2 0 1 1 2 3 4", "2 4 2 0 1 1 3 2 4");
        let m = parse_msh(text.as_bytes()).unwrap();
        assert_eq!(m.orientation_fixes(), 1);
        let again = parse_msh(write_msh(&m).as_bytes()).unwrap();
        assert_eq!(again.orientation_fixes(), 0);
        assert_eq!(again.tet_volume(0).to_bits(), m.tet_volume(0).to_bits());
    }
}
