use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeTag {
    Rough,
    Dirichlet,
}

impl EdgeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeTag::Rough => "ROUGH",
            EdgeTag::Dirichlet => "DIRICHLET",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ROUGH" => Ok(EdgeTag::Rough),
            "DIRICHLET" => Ok(EdgeTag::Dirichlet),
            other => Err(Error::Parameter(format!("unknown edge tag `{other}`"))),
        }
    }
}

/// Element groups by contact with the rough boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementClass {
    /// Owns exactly one rough edge.
    T1,
    /// Touches the rough boundary at a vertex only.
    T2,
    /// Interior.
    T3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub tag: EdgeTag,
}

/// Conforming triangle mesh with counterclockwise triangles.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub classes: Vec<ElementClass>,
    /// Nominal mesh size (grid spacing of the generator).
    pub h: f64,
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    /// Builds a mesh and derives element classes from the edge tags.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, boundary_edges: Vec<BoundaryEdge>, h: f64) -> Self {
        let mut mesh = TriMesh { vertices, triangles, boundary_edges, classes: Vec::new(), h };
        mesh.classify();
        mesh
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.corners(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    /// Smallest interior angle of triangle `t`, in degrees.
    pub fn min_angle_deg(&self, t: usize) -> f64 {
        let p = self.corners(t);
        let mut m = f64::INFINITY;
        for k in 0..3 {
            let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            let cos = (u[0] * v[0] + u[1] * v[1]) / (dist(a, b) * dist(a, c));
            m = m.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
        }
        m
    }

    /// Gradients of the three P1 basis functions on triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.corners(t);
        let twice = 2.0 * signed_area(a, b, c);
        [
            [(b[1] - c[1]) / twice, (c[0] - b[0]) / twice],
            [(c[1] - a[1]) / twice, (a[0] - c[0]) / twice],
            [(a[1] - b[1]) / twice, (b[0] - a[0]) / twice],
        ]
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.corners(t);
        let total = signed_area(a, b, c);
        let l0 = signed_area(p, b, c) / total;
        let l1 = signed_area(a, p, c) / total;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Vertices lying on edges with the given tag, ascending.
    pub fn tagged_vertices(&self, tag: EdgeTag) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_edges.iter().filter(|e| e.tag == tag).flat_map(|e| e.v).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn count_class(&self, class: ElementClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// Local index pairs of the rough edges owned by triangle `t`.
    pub fn rough_edges_of(&self, t: usize) -> Vec<(usize, usize)> {
        let tri = self.triangles[t];
        let rough: std::collections::HashSet<(usize, usize)> =
            self.boundary_edges.iter().filter(|e| e.tag == EdgeTag::Rough).map(|e| edge_key(e.v[0], e.v[1])).collect();
        (0..3).filter(|&k| rough.contains(&edge_key(tri[k], tri[(k + 1) % 3]))).map(|k| (k, (k + 1) % 3)).collect()
    }

    fn classify(&mut self) {
        let mut rough_edge = std::collections::HashSet::new();
        let mut rough_vertex = vec![false; self.vertices.len()];
        for e in self.boundary_edges.iter().filter(|e| e.tag == EdgeTag::Rough) {
            rough_edge.insert(edge_key(e.v[0], e.v[1]));
            rough_vertex[e.v[0]] = true;
            rough_vertex[e.v[1]] = true;
        }
        self.classes = self
            .triangles
            .iter()
            .map(|tri| {
                let owns = (0..3).any(|k| rough_edge.contains(&edge_key(tri[k], tri[(k + 1) % 3])));
                if owns {
                    ElementClass::T1
                } else if tri.iter().any(|&v| rough_vertex[v]) {
                    ElementClass::T2
                } else {
                    ElementClass::T3
                }
            })
            .collect();
    }

    /// Checks orientation, conformity and tag consistency.
    pub fn validate(&self) -> Result<()> {
        let mut uses: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= self.vertices.len()) {
                return Err(Error::Mesh { element: t, reason: "vertex index out of range".into() });
            }
            if !(self.area(t) > 0.0) {
                return Err(Error::Mesh { element: t, reason: format!("non-positive area {:e}", self.area(t)) });
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                uses.entry(edge_key(a, b)).or_default().push((t, a < b));
            }
        }
        for (edge, owners) in &uses {
            match owners.as_slice() {
                [_] => {}
                [(_, d0), (t1, d1)] => {
                    if d0 == d1 {
                        return Err(Error::Mesh {
                            element: *t1,
                            reason: format!("edge {edge:?} traversed twice in the same direction"),
                        });
                    }
                }
                _ => {
                    return Err(Error::Mesh {
                        element: owners[2].0,
                        reason: format!("edge {edge:?} shared by {} triangles", owners.len()),
                    })
                }
            }
        }
        for e in &self.boundary_edges {
            match uses.get(&edge_key(e.v[0], e.v[1])).map(Vec::len) {
                Some(1) => {}
                _ => {
                    return Err(Error::Mesh {
                        element: usize::MAX,
                        reason: format!("tagged edge {:?} is not a boundary edge", e.v),
                    })
                }
            }
        }
        for t in 0..self.n_triangles() {
            let n = self.rough_edges_of(t).len();
            if n > 1 {
                return Err(Error::Mesh { element: t, reason: format!("{n} rough edges") });
            }
            if (n == 1) != (self.classes[t] == ElementClass::T1) {
                return Err(Error::Mesh { element: t, reason: "class inconsistent with edge tags".into() });
            }
        }
        Ok(())
    }
}
