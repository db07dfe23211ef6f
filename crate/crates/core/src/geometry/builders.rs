//! Structured, boundary-conforming triangulations of the rough domain,
//! the rescaled cell elements and the periodic boundary-layer strip.

use crate::error::{Error, Result};
use crate::geometry::frame::ElementFrame;
use crate::geometry::mesh::{BoundaryEdge, EdgeTag, ElementClass, Point, TriMesh};
use crate::geometry::profile::{BoundaryProfile, UnitCell};

/// Minimum interior angle accepted on coarse meshes, in degrees.
pub const MIN_ANGLE_DEG: f64 = 15.0;

/// Vertex cap for fine reference meshes.
pub const DEFAULT_VERTEX_CAP: usize = 6_000_000;

/// Coarse MsFEM mesh together with the profile it conforms to.
#[derive(Debug, Clone)]
pub struct CoarseMesh {
    pub mesh: TriMesh,
    pub profile: BoundaryProfile,
    pub n: usize,
    /// Per bottom-row column: true when the quad is split along BL-TR.
    pub flipped: Vec<bool>,
}

impl CoarseMesh {
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn t1_elements(&self) -> Vec<usize> {
        (0..self.mesh.n_triangles()).filter(|&t| self.mesh.classes[t] == ElementClass::T1).collect()
    }

    /// Frame of a rough-edge element.
    pub fn frame(&self, t: usize) -> Result<ElementFrame> {
        let edges = self.mesh.rough_edges_of(t);
        let &[(i, j)] = edges.as_slice() else {
            return Err(Error::Geometry(format!("element {t} does not own exactly one rough edge")));
        };
        ElementFrame::new(t, self.mesh.corners(t), (i, j))
    }

    /// Area of element `t`, with rough edges following the true curve.
    pub fn element_area(&self, t: usize) -> f64 {
        let chord_area = self.mesh.area(t);
        match self.frame(t) {
            Ok(f) if self.mesh.classes[t] == ElementClass::T1 => {
                let (a, b) = f.interval;
                let ya = self.mesh.vertices[self.mesh.triangles[t][f.rough.0]][1];
                let yb = self.mesh.vertices[self.mesh.triangles[t][f.rough.1]][1];
                let chord = 0.5 * (ya + yb) * (b - a);
                chord_area + chord - self.profile.integral(a, b)
            }
            _ => chord_area,
        }
    }

    pub fn domain_area(&self) -> f64 {
        (0..self.mesh.n_triangles()).map(|t| self.element_area(t)).sum()
    }

    /// Global vertex index of grid node `(i, j)`.
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }
}

fn grid_tags(n: usize, idx: impl Fn(usize, usize) -> usize) -> Vec<BoundaryEdge> {
    let mut edges = Vec::with_capacity(4 * n);
    for i in 0..n {
        edges.push(BoundaryEdge { v: [idx(i, 0), idx(i + 1, 0)], tag: EdgeTag::Rough });
    }
    for j in 0..n {
        edges.push(BoundaryEdge { v: [idx(n, j), idx(n, j + 1)], tag: EdgeTag::Dirichlet });
    }
    for i in (0..n).rev() {
        edges.push(BoundaryEdge { v: [idx(i + 1, n), idx(i, n)], tag: EdgeTag::Dirichlet });
    }
    for j in (0..n).rev() {
        edges.push(BoundaryEdge { v: [idx(0, j + 1), idx(0, j)], tag: EdgeTag::Dirichlet });
    }
    edges
}

/// Sample abscissae on (a, b): uniform points plus profile breakpoints.
fn probe_points(profile: &BoundaryProfile, a: f64, b: f64, samples: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (1..samples).map(|k| a + (b - a) * k as f64 / samples as f64).collect();
    xs.extend(profile.breakpoints(a, b).into_iter().filter(|&x| x > a && x < b));
    xs
}

/// Whether the rough curve over (a, b) stays strictly below the segment
/// from `p` to `q` (both at the ends of the interval, one of them on it).
fn curve_below(profile: &BoundaryProfile, p: Point, q: Point, a: f64, b: f64) -> bool {
    probe_points(profile, a, b, 512).into_iter().all(|x| {
        let line = p[1] + (q[1] - p[1]) * (x - p[0]) / (q[0] - p[0]);
        profile.height(x) < line
    })
}

/// Uniform coarse mesh with `h = 1/n`: grid nodes `(ih, jh)` for `j >= 1`,
/// bottom nodes snapped onto the rough curve. Quads are split along the
/// TL-BR diagonal; a bottom quad is flipped to BL-TR only when the rough
/// curve would otherwise cross the diagonal.
pub fn build_coarse_mesh(profile: &BoundaryProfile, n: usize) -> Result<CoarseMesh> {
    if n < 2 {
        return Err(Error::Parameter(format!("coarse mesh needs N >= 2, got {n}")));
    }
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let x1 = i as f64 * h;
            let x2 = if j == 0 { profile.height(x1) } else { j as f64 * h };
            vertices.push([x1, x2]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    let mut flipped = vec![false; n];
    for j in 0..n {
        for i in 0..n {
            let (bl, br, tl, tr) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            let mut flip = false;
            if j == 0 {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                let default_ok = curve_below(profile, vertices[tl], vertices[br], a, b);
                if !default_ok {
                    if curve_below(profile, vertices[bl], vertices[tr], a, b) {
                        flip = true;
                    } else {
                        return Err(Error::Mesh {
                            element: triangles.len(),
                            reason: format!("rough curve on [{a}, {b}] crosses both quad diagonals"),
                        });
                    }
                }
                flipped[i] = flip;
            }
            if flip {
                triangles.push([bl, br, tr]);
                triangles.push([bl, tr, tl]);
            } else {
                triangles.push([bl, br, tl]);
                triangles.push([br, tr, tl]);
            }
        }
    }
    let mesh = TriMesh::new(vertices, triangles, grid_tags(n, idx), h);
    for t in 0..mesh.n_triangles() {
        let angle = mesh.min_angle_deg(t);
        if !(angle >= MIN_ANGLE_DEG) {
            return Err(Error::Mesh {
                element: t,
                reason: format!("minimum angle {angle:.2} deg below {MIN_ANGLE_DEG} deg"),
            });
        }
    }
    Ok(CoarseMesh { mesh, profile: profile.clone(), n, flipped })
}

/// Uniform mesh of the unit square (flat bottom tagged rough).
pub fn build_square_mesh(n: usize) -> Result<TriMesh> {
    Ok(build_coarse_mesh(&BoundaryProfile::flat(), n)?.mesh)
}

/// Triangulation of the rescaled rough element.
///
/// Columns sit at `x_hat1 = k/K` with `K = ceil(scale / htilde)`; each column
/// spans from the rescaled rough curve up to the straight edge, with node
/// counts decreasing towards the vertex where the rough edge meets the
/// diagonal. A flat bottom gives the uniform refinement of the triangle.
pub fn build_cell_mesh(frame: &ElementFrame, profile: &BoundaryProfile, htilde: f64) -> Result<TriMesh> {
    if !(htilde > 0.0) {
        return Err(Error::Parameter(format!("subgrid size must be positive, got {htilde}")));
    }
    if htilde > 0.5 * profile.epsilon() && !profile.is_flat() {
        log::warn!(
            "element {}: subgrid size {htilde:e} does not resolve roughness epsilon = {:e}",
            frame.element,
            profile.epsilon()
        );
    }
    let k_cols = ((frame.scale / htilde) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let apex_left = frame.apex_left();
    let apex = frame.local[frame.apex];
    let left = frame.local[frame.rough.0];
    let right = frame.local[frame.rough.1];
    let bottom = |s: f64| -> f64 {
        if s == 0.0 {
            left[1]
        } else if s == 1.0 {
            right[1]
        } else {
            profile.height(frame.interval.0 + frame.scale * s) / frame.scale
        }
    };
    // straight upper edge joining the apex to the far rough endpoint
    let top = |s: f64| -> f64 {
        if apex_left {
            apex[1] + (right[1] - apex[1]) * s
        } else {
            left[1] + (apex[1] - left[1]) * s
        }
    };

    let mut vertices: Vec<Point> = Vec::new();
    let mut index: Vec<Vec<usize>> = Vec::with_capacity(k_cols + 1);
    for k in 0..=k_cols {
        let s = k as f64 / k_cols as f64;
        let m = if apex_left { k_cols - k } else { k };
        let (yb, yt) = (bottom(s), top(s));
        if m > 0 && !(yt > yb) {
            return Err(Error::Geometry(format!(
                "element {}: rough curve reaches the straight edge at x_hat1 = {s}",
                frame.element
            )));
        }
        let mut col = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let y = if m == 0 { yb } else { yb + (yt - yb) * j as f64 / m as f64 };
            let y = if j == m && m > 0 { yt } else { y };
            col.push(vertices.len());
            vertices.push([s, y]);
        }
        index.push(col);
    }
    // apex and corner nodes exactly at the frame vertices
    let apex_node = if apex_left { index[0][k_cols] } else { index[k_cols][k_cols] };
    vertices[apex_node] = apex;
    vertices[index[0][0]] = left;
    vertices[index[k_cols][0]] = right;

    let mut triangles = Vec::with_capacity(k_cols * k_cols);
    for k in 0..k_cols {
        let (c0, c1) = (&index[k], &index[k + 1]);
        if apex_left {
            // column k has one node more than column k+1
            let m = c1.len();
            for j in 0..m {
                triangles.push([c0[j], c1[j], c0[j + 1]]);
                if j + 1 < m {
                    triangles.push([c1[j], c1[j + 1], c0[j + 1]]);
                }
            }
        } else {
            let m = c0.len();
            for j in 0..m {
                triangles.push([c0[j], c1[j], c1[j + 1]]);
                if j + 1 < m {
                    triangles.push([c0[j], c1[j + 1], c0[j + 1]]);
                }
            }
        }
    }

    let mut edges = Vec::new();
    for k in 0..k_cols {
        edges.push(BoundaryEdge { v: [index[k][0], index[k + 1][0]], tag: EdgeTag::Rough });
    }
    if apex_left {
        for k in 0..k_cols {
            edges.push(BoundaryEdge {
                v: [*index[k + 1].last().unwrap(), *index[k].last().unwrap()],
                tag: EdgeTag::Dirichlet,
            });
        }
        for j in (0..k_cols).rev() {
            edges.push(BoundaryEdge { v: [index[0][j + 1], index[0][j]], tag: EdgeTag::Dirichlet });
        }
    } else {
        for j in 0..k_cols {
            edges.push(BoundaryEdge { v: [index[k_cols][j], index[k_cols][j + 1]], tag: EdgeTag::Dirichlet });
        }
        for k in (0..k_cols).rev() {
            edges.push(BoundaryEdge {
                v: [*index[k + 1].last().unwrap(), *index[k].last().unwrap()],
                tag: EdgeTag::Dirichlet,
            });
        }
    }

    let mesh = TriMesh::new(vertices, triangles, edges, 1.0 / k_cols as f64);
    for t in 0..mesh.n_triangles() {
        if !(mesh.area(t) > 0.0) {
            return Err(Error::Geometry(format!(
                "element {}: cell triangle {t} inverted; rough curve too steep for the subgrid",
                frame.element
            )));
        }
    }
    Ok(mesh)
}

/// Boundary-conforming fine mesh of the rough domain. Column `i` at
/// `x1 = i/n` is stretched from the rough curve to `x2 = 1`, `n = ceil(1/hfine)`.
pub fn build_reference_mesh(profile: &BoundaryProfile, hfine: f64) -> Result<TriMesh> {
    build_reference_mesh_capped(profile, hfine, DEFAULT_VERTEX_CAP)
}

pub fn build_reference_mesh_capped(profile: &BoundaryProfile, hfine: f64, vertex_cap: usize) -> Result<TriMesh> {
    if !(hfine > 0.0) {
        return Err(Error::Parameter(format!("fine mesh size must be positive, got {hfine}")));
    }
    let n = ((1.0 / hfine) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let projected = (n + 1) * (n + 1);
    if projected > vertex_cap {
        return Err(Error::Resource(format!("reference mesh needs {projected} vertices, cap is {vertex_cap}")));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity(projected);
    for j in 0..=n {
        let eta = j as f64 / n as f64;
        for i in 0..=n {
            let x1 = i as f64 / n as f64;
            let y = profile.height(x1);
            let x2 = if j == n { 1.0 } else { y + eta * (1.0 - y) };
            vertices.push([x1, x2]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (bl, br, tl, tr) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([bl, br, tl]);
            triangles.push([br, tr, tl]);
        }
    }
    Ok(TriMesh::new(vertices, triangles, grid_tags(n, idx), 1.0 / n as f64))
}

/// Truncated periodic strip `{0 < xi1 < 1, gamma(xi1) < xi2 < height}`.
///
/// Rows sit at nominal heights `y_j = j * dy`; node heights are
/// `y_j + gamma(xi1) * max(0, 1 - y_j)`, so rows above `xi2 = 1` are flat and
/// identical for every truncation height. The last column duplicates the
/// first and is identified with it through `dof`.
#[derive(Debug, Clone)]
pub struct StripMesh {
    pub mesh: TriMesh,
    pub dof: Vec<usize>,
    pub n_dof: usize,
    pub cols: usize,
    pub rows: usize,
    pub dy: f64,
}

impl StripMesh {
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        j * (self.cols + 1) + i
    }

    /// Nominal height of row `j`.
    pub fn row_height(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }
}

pub fn build_strip_mesh(cell: &UnitCell, cols: usize, height: f64) -> Result<StripMesh> {
    if cols < 2 {
        return Err(Error::Parameter("strip needs at least two columns".into()));
    }
    let dy = 1.0 / cols as f64;
    let rows = (height / dy).round() as usize;
    if rows < 2 || (rows as f64 * dy - height).abs() > 1e-9 {
        return Err(Error::Parameter(format!("strip height {height} is not a multiple of {dy}")));
    }
    let idx = |i: usize, j: usize| j * (cols + 1) + i;
    let mut vertices = Vec::with_capacity((cols + 1) * (rows + 1));
    for j in 0..=rows {
        let y = j as f64 * dy;
        let blend = (1.0 - y).max(0.0);
        for i in 0..=cols {
            let x = i as f64 / cols as f64;
            vertices.push([x, y + cell.value(x) * blend]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * cols * rows);
    for j in 0..rows {
        for i in 0..cols {
            let (bl, br, tl, tr) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([bl, br, tl]);
            triangles.push([br, tr, tl]);
        }
    }
    let mut edges = Vec::new();
    for i in 0..cols {
        edges.push(BoundaryEdge { v: [idx(i, 0), idx(i + 1, 0)], tag: EdgeTag::Rough });
        edges.push(BoundaryEdge { v: [idx(i + 1, rows), idx(i, rows)], tag: EdgeTag::Dirichlet });
    }
    let mesh = TriMesh::new(vertices, triangles, edges, dy);
    let mut dof = Vec::with_capacity(mesh.n_vertices());
    for j in 0..=rows {
        for i in 0..=cols {
            let master = if i == cols { 0 } else { i };
            dof.push(j * cols + master);
        }
    }
    Ok(StripMesh { mesh, dof, n_dof: cols * (rows + 1), cols, rows, dy })
}
