//! Plain-text mesh format.
//!
//! ```text
//! vertices N / triangles M / edges K
//! x y            (N rows)
//! a b c          (M rows, counterclockwise)
//! a b TAG        (K rows, TAG is ROUGH or DIRICHLET)
//! h H
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::mesh::{BoundaryEdge, EdgeTag, TriMesh};

pub fn write_mesh(mesh: &TriMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "vertices {} / triangles {} / edges {}",
        mesh.n_vertices(),
        mesh.n_triangles(),
        mesh.boundary_edges.len()
    );
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:e} {:e}", v[0], v[1]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    for e in &mesh.boundary_edges {
        let _ = writeln!(s, "{} {} {}", e.v[0], e.v[1], e.tag.as_str());
    }
    let _ = writeln!(s, "h {:e}", mesh.h);
    s
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("invalid {what}")))
}

pub fn read_mesh(text: &str) -> Result<TriMesh> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty mesh file".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 8 || h[0] != "vertices" || h[3] != "triangles" || h[6] != "edges" {
        return Err(Error::Parse(format!("bad header `{header}`")));
    }
    let nv: usize = parse(Some(h[1]), "vertex count")?;
    let nt: usize = parse(Some(h[4]), "triangle count")?;
    let ne: usize = parse(Some(h[7]), "edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut it = lines.next().ok_or_else(|| Error::Parse("truncated vertices".into()))?.split_whitespace();
        vertices.push([parse(it.next(), "x")?, parse(it.next(), "y")?]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let mut it = lines.next().ok_or_else(|| Error::Parse("truncated triangles".into()))?.split_whitespace();
        triangles.push([parse(it.next(), "index")?, parse(it.next(), "index")?, parse(it.next(), "index")?]);
    }
    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let mut it = lines.next().ok_or_else(|| Error::Parse("truncated edges".into()))?.split_whitespace();
        let v = [parse(it.next(), "index")?, parse(it.next(), "index")?];
        let tag = EdgeTag::parse(it.next().ok_or_else(|| Error::Parse("missing tag".into()))?)?;
        edges.push(BoundaryEdge { v, tag });
    }
    let size = match lines.next() {
        Some(l) => {
            let mut it = l.split_whitespace();
            if it.next() != Some("h") {
                return Err(Error::Parse(format!("unexpected trailing line `{l}`")));
            }
            parse(it.next(), "mesh size")?
        }
        None => 0.0,
    };
    let mesh = TriMesh::new(vertices, triangles, edges, size);
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_coarse_mesh, BoundaryProfile, UnitCell};

    #[test]
    fn round_trip_preserves_mesh() {
        let profile = BoundaryProfile::periodic(UnitCell::cosine(0.1), 0.25).unwrap();
        let mesh = build_coarse_mesh(&profile, 4).unwrap().mesh;
        let back = read_mesh(&write_mesh(&mesh)).unwrap();
        assert_eq!(back.vertices, mesh.vertices);
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.boundary_edges, mesh.boundary_edges);
        assert_eq!(back.classes, mesh.classes);
        assert_eq!(back.h, mesh.h);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(matches!(read_mesh(""), Err(Error::Parse(_))));
        assert!(matches!(read_mesh("vertices 1 / triangles 0 / edges 0\n"), Err(Error::Parse(_))));
        assert!(matches!(read_mesh("vertices 1 / faces 0 / edges 0\n0 0\n"), Err(Error::Parse(_))));
    }
}
