//! Rectangular domain with polygonal obstacles.

use crate::vec2::Vec2;

use super::GeometryError;

/// A simple polygon, stored counterclockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    /// Absolute tolerance for boundary tests, scaled to the polygon size.
    tol: f64,
}

impl Polygon {
    /// Build and validate a simple polygon; a clockwise vertex list is
    /// reversed so the stored orientation is always counterclockwise.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidPolygon(
                "vertices must be finite".into(),
            ));
        }
        let mut vertices = vertices;
        let signed = signed_area(&vertices);
        let (lo, hi) = bounding_box(&vertices);
        let diag = lo.dist(hi);
        if signed.abs() <= 1e-12 * diag * diag {
            return Err(GeometryError::InvalidPolygon(
                "polygon area is zero".into(),
            ));
        }
        if signed < 0.0 {
            vertices.reverse();
        }
        let poly = Polygon {
            vertices,
            tol: 1e-12 * (1.0 + diag),
        };
        poly.check_simple()?;
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Edges as (start, end) pairs, last vertex closing back to the first.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    /// Non-adjacent edges must not intersect or touch.
    fn check_simple(&self) -> Result<(), GeometryError> {
        let n = self.vertices.len();
        let edges: Vec<(Vec2, Vec2)> = self.edges().collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_touch(edges[i].0, edges[i].1, edges[j].0, edges[j].1, self.tol) {
                    return Err(GeometryError::InvalidPolygon(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(())
    }

    /// True when p lies on the polygon boundary (within tolerance).
    pub fn on_boundary(&self, p: Vec2) -> bool {
        self.edges()
            .any(|(a, b)| point_segment_distance(p, a, b) <= self.tol)
    }

    /// Even-odd interior test; boundary points count as outside.
    pub fn contains(&self, p: Vec2) -> bool {
        if self.on_boundary(p) {
            return false;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Axis-aligned rectangular domain with polygonal obstacles.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    min: Vec2,
    max: Vec2,
    obstacles: Vec<Polygon>,
}

impl Domain {
    pub fn new(min: Vec2, max: Vec2, obstacles: Vec<Polygon>) -> Result<Self, GeometryError> {
        if !(min.is_finite() && max.is_finite() && min.x < max.x && min.y < max.y) {
            return Err(GeometryError::InvalidBounds);
        }
        for (index, poly) in obstacles.iter().enumerate() {
            let inside = poly.vertices().iter().all(|v| {
                v.x >= min.x && v.x <= max.x && v.y >= min.y && v.y <= max.y
            });
            if !inside {
                return Err(GeometryError::ObstacleOutsideBounds { index });
            }
        }
        Ok(Domain {
            min,
            max,
            obstacles,
        })
    }

    /// Obstacle-free rectangle.
    pub fn rectangle(min: Vec2, max: Vec2) -> Result<Self, GeometryError> {
        Self::new(min, max, Vec::new())
    }

    pub fn min(&self) -> Vec2 {
        self.min
    }

    pub fn max(&self) -> Vec2 {
        self.max
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Length of the bounding-box diagonal.
    pub fn diameter(&self) -> f64 {
        self.min.dist(self.max)
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    /// True when p is inside the bounds rectangle (boundary inclusive).
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// True when p is strictly inside some obstacle. Obstacle boundary
    /// points count as outside: they carry the obstacle boundary condition
    /// as grid vertices instead.
    pub fn point_in_obstacle(&self, p: Vec2) -> bool {
        self.obstacles.iter().any(|poly| poly.contains(p))
    }

    /// True when the straight segment from `a` to `b` stays inside the
    /// domain and does not pass through any obstacle interior. Touching an
    /// obstacle boundary without entering is allowed.
    pub fn segment_clear(&self, a: Vec2, b: Vec2) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        if self.point_in_obstacle(a) || self.point_in_obstacle(b) {
            return false;
        }
        if self.obstacles.is_empty() {
            return true;
        }

        // A transversal crossing of any obstacle edge blocks immediately.
        for poly in &self.obstacles {
            for (u, v) in poly.edges() {
                if segments_cross_properly(a, b, u, v) {
                    return false;
                }
            }
        }

        // Remaining hazard: the segment enters an interior through a
        // polygon vertex or by sliding along edges. Split [a, b] at every
        // parameter where it touches an obstacle edge or vertex and test
        // the midpoint of each piece; by the Jordan curve theorem an
        // interior excursion is bounded by such touch points.
        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        let len = a.dist(b);
        if len == 0.0 {
            return true;
        }
        for poly in &self.obstacles {
            let tol = poly_tol(poly);
            for (u, v) in poly.edges() {
                for w in [u, v] {
                    if point_segment_distance(w, a, b) <= tol {
                        cuts.push(project_param(w, a, b));
                    }
                }
                for e in [a, b] {
                    if point_segment_distance(e, u, v) <= tol {
                        cuts.push(project_param(e, a, b));
                    }
                }
                if let Some(t) = segment_intersection_param(a, b, u, v) {
                    cuts.push(t);
                }
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        for pair in cuts.windows(2) {
            let mid = a.lerp(b, 0.5 * (pair[0] + pair[1]));
            if self.point_in_obstacle(mid) {
                return false;
            }
        }
        true
    }
}

fn poly_tol(poly: &Polygon) -> f64 {
    poly.tol
}

fn signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc += a.cross(b);
    }
    0.5 * acc
}

fn bounding_box(vertices: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for v in vertices {
        lo.x = lo.x.min(v.x);
        lo.y = lo.y.min(v.y);
        hi.x = hi.x.max(v.x);
        hi.y = hi.y.max(v.y);
    }
    (lo, hi)
}

/// Distance from p to the closed segment [a, b].
pub(crate) fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Parameter of the projection of p onto the line through a and b.
fn project_param(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0)
}

/// Strict transversal crossing: the open segments intersect at a single
/// point interior to both.
fn segments_cross_properly(p: Vec2, q: Vec2, u: Vec2, v: Vec2) -> bool {
    let d1 = (v - u).cross(p - u);
    let d2 = (v - u).cross(q - u);
    let d3 = (q - p).cross(u - p);
    let d4 = (q - p).cross(v - p);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Any contact between closed segments, within an absolute tolerance.
fn segments_touch(p: Vec2, q: Vec2, u: Vec2, v: Vec2, tol: f64) -> bool {
    if segments_cross_properly(p, q, u, v) {
        return true;
    }
    point_segment_distance(p, u, v) <= tol
        || point_segment_distance(q, u, v) <= tol
        || point_segment_distance(u, p, q) <= tol
        || point_segment_distance(v, p, q) <= tol
}

/// Parameter t on [p, q] where the segments' support lines intersect, when
/// that intersection lies on both segments; None for (near-)parallel lines.
fn segment_intersection_param(p: Vec2, q: Vec2, u: Vec2, v: Vec2) -> Option<f64> {
    let r = q - p;
    let s = v - u;
    let den = r.cross(s);
    let scale = r.norm() * s.norm();
    if den.abs() <= 1e-14 * scale.max(1e-300) {
        return None;
    }
    let t = (u - p).cross(s) / den;
    let w = (u - p).cross(r) / den;
    let slack = 1e-9;
    if (-slack..=1.0 + slack).contains(&t) && (-slack..=1.0 + slack).contains(&w) {
        Some(t.clamp(0.0, 1.0))
    } else {
        None
    }
}
