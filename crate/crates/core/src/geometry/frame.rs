use crate::error::{Error, Result};
use crate::geometry::mesh::{signed_area, Point};

/// Affine frame of a rough-edge element: `x = origin + scale * x_hat`.
///
/// The rescaled element has its rough edge over `x_hat1 in [0, 1]` and the
/// apex (the vertex off the rough boundary) at `x_hat2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementFrame {
    pub element: usize,
    pub origin: Point,
    pub scale: f64,
    /// Rough-edge parameter interval `[a, b]` in `x1`.
    pub interval: (f64, f64),
    /// Element vertices in rescaled coordinates, in the element's own order.
    pub local: [Point; 3],
    /// Local indices of the rough-edge endpoints at `x1 = a` and `x1 = b`.
    pub rough: (usize, usize),
    pub apex: usize,
}

impl ElementFrame {
    /// `vertices` are physical coordinates in the element's counterclockwise
    /// order; `rough` names the local indices of the rough edge.
    pub fn new(element: usize, vertices: [Point; 3], rough: (usize, usize)) -> Result<Self> {
        let (mut l, mut r) = rough;
        if l == r || l > 2 || r > 2 {
            return Err(Error::Geometry(format!("element {element}: invalid rough edge {rough:?}")));
        }
        if vertices[l][0] > vertices[r][0] {
            std::mem::swap(&mut l, &mut r);
        }
        let apex = 3 - l - r;
        let (a, b) = (vertices[l][0], vertices[r][0]);
        let scale = b - a;
        if !(scale > 0.0) {
            return Err(Error::Geometry(format!("element {element}: rough edge has zero horizontal extent")));
        }
        let origin = [a, 0.0];
        let local = vertices.map(|p| [(p[0] - origin[0]) / scale, (p[1] - origin[1]) / scale]);
        if !(signed_area(local[0], local[1], local[2]) > 0.0) {
            return Err(Error::Geometry(format!("element {element}: degenerate or clockwise frame")));
        }
        let ax = local[apex][0];
        if ax.abs() > 1e-12 && (ax - 1.0).abs() > 1e-12 {
            return Err(Error::Geometry(format!(
                "element {element}: apex must sit above an end of the rough edge (x_hat1 = {ax})"
            )));
        }
        Ok(ElementFrame { element, origin, scale, interval: (a, b), local, rough: (l, r), apex })
    }

    pub fn apex_left(&self) -> bool {
        self.local[self.apex][0] < 0.5
    }

    pub fn to_local(&self, p: Point) -> Point {
        [(p[0] - self.origin[0]) / self.scale, (p[1] - self.origin[1]) / self.scale]
    }

    pub fn to_physical(&self, q: Point) -> Point {
        [self.origin[0] + self.scale * q[0], self.origin[1] + self.scale * q[1]]
    }

    /// Barycentric coordinates of a rescaled point with respect to the
    /// straight-sided element; these are the linear nodal functions.
    pub fn linear_basis(&self, q: Point) -> [f64; 3] {
        let [a, b, c] = self.local;
        let total = signed_area(a, b, c);
        let l0 = signed_area(q, b, c) / total;
        let l1 = signed_area(a, q, c) / total;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Rescaled outward normal derivatives of the linear nodal functions of
    /// the homogenized element (rough endpoints dropped onto `x2 = 0`),
    /// taken on its flat bottom edge of unit rescaled length.
    pub fn flux_weights(&self) -> [f64; 3] {
        let mut flat = self.local;
        flat[self.rough.0] = [0.0, 0.0];
        flat[self.rough.1] = [1.0, 0.0];
        let [a, b, c] = flat;
        let twice = 2.0 * signed_area(a, b, c);
        // outward normal (0, -1): b_p = -d(phi_p)/dy
        let dy = [(c[0] - b[0]) / twice, (a[0] - c[0]) / twice, (b[0] - a[0]) / twice];
        dy.map(|d| if d == 0.0 { 0.0 } else { -d })
    }
}
