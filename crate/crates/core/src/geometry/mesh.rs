//! Delaunay triangulation, point location, and barycentric interpolation.

use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

use crate::vec2::Vec2;

use super::{GeometryError, VertexClass};

/// Slack on normalized barycentric weights when testing containment;
/// points this far outside an edge still count as inside, which keeps
/// hull-boundary landings locatable.
const BARY_SLACK: f64 = 1e-10;

/// Probe lattice resolution for the grid-resolution estimate Δp.
const PROBE_RES: usize = 512;

struct MeshVertex {
    position: Point2<f64>,
    index: usize,
}

impl HasPosition for MeshVertex {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.position
    }
}

/// Interpolation stencil at a point: the containing triangle and the
/// barycentric weights of its three vertices (clamped to [0, 1], summing
/// to 1).
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    pub triangle: usize,
    pub vertices: [usize; 3],
    pub weights: [f64; 3],
}

/// An unstructured triangulated grid over the domain.
///
/// Vertices carry classes (free / goal / obstacle / domain boundary);
/// `delta_p` records the grid resolution: the largest distance from any
/// point of the vertex bounding box to its nearest vertex, estimated on a
/// 512×512 probe lattice.
#[derive(Debug)]
pub struct SpatialGrid {
    vertices: Vec<Vec2>,
    classes: Vec<VertexClass>,
    triangles: Vec<[usize; 3]>,
    goal: usize,
    delta_p: f64,
    lo: Vec2,
    hi: Vec2,
    tri_bins: Bins,
    vertex_bins: Bins,
}

/// Uniform binning of items (triangles or vertices) over the bounding box.
#[derive(Debug)]
struct Bins {
    lo: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    items: Vec<Vec<u32>>,
}

impl Bins {
    fn build(lo: Vec2, hi: Vec2, n_items: usize, bbox_of: impl Fn(usize) -> (Vec2, Vec2)) -> Bins {
        let w = (hi.x - lo.x).max(1e-300);
        let h = (hi.y - lo.y).max(1e-300);
        let target = (n_items.max(1)) as f64;
        let cell = (w * h / target).sqrt().max(1e-12 * (w + h));
        let nx = ((w / cell).ceil() as usize).clamp(1, 2048);
        let ny = ((h / cell).ceil() as usize).clamp(1, 2048);
        let cell = (w / nx as f64).max(h / ny as f64);
        let mut items = vec![Vec::new(); nx * ny];
        for i in 0..n_items {
            let (blo, bhi) = bbox_of(i);
            let (ix0, iy0) = clamp_cell(lo, cell, nx, ny, blo);
            let (ix1, iy1) = clamp_cell(lo, cell, nx, ny, bhi);
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    items[iy * nx + ix].push(i as u32);
                }
            }
        }
        Bins {
            lo,
            cell,
            nx,
            ny,
            items,
        }
    }

    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        clamp_cell(self.lo, self.cell, self.nx, self.ny, p)
    }
}

fn clamp_cell(lo: Vec2, cell: f64, nx: usize, ny: usize, p: Vec2) -> (usize, usize) {
    let ix = (((p.x - lo.x) / cell).floor() as isize).clamp(0, nx as isize - 1) as usize;
    let iy = (((p.y - lo.y) / cell).floor() as isize).clamp(0, ny as isize - 1) as usize;
    (ix, iy)
}

/// Delaunay-triangulate a classed vertex cloud.
///
/// Requires at least 3 non-collinear vertices, no duplicates, and exactly
/// one vertex of class `Goal`. The triangle list is canonicalized (each
/// triple rotated so its smallest index leads, kept counterclockwise, and
/// the list sorted), so identical input always produces the identical
/// grid.
pub fn triangulate(points: &[(Vec2, VertexClass)]) -> Result<SpatialGrid, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::DegenerateInput(format!(
            "need at least 3 vertices, got {}",
            points.len()
        )));
    }
    let mut goal = None;
    for (i, (p, class)) in points.iter().enumerate() {
        if !p.is_finite() {
            return Err(GeometryError::DegenerateInput(format!(
                "vertex {i} is not finite"
            )));
        }
        if *class == VertexClass::Goal {
            if goal.is_some() {
                return Err(GeometryError::DegenerateInput(
                    "more than one goal vertex".into(),
                ));
            }
            goal = Some(i);
        }
    }
    let goal = goal.ok_or_else(|| GeometryError::DegenerateInput("no goal vertex".into()))?;

    let mut dt: DelaunayTriangulation<MeshVertex> = DelaunayTriangulation::new();
    for (index, (p, _)) in points.iter().enumerate() {
        let before = dt.num_vertices();
        dt.insert(MeshVertex {
            position: Point2::new(p.x, p.y),
            index,
        })
        .map_err(|e| GeometryError::DegenerateInput(format!("vertex {index}: {e:?}")))?;
        if dt.num_vertices() == before {
            return Err(GeometryError::DuplicateVertex { index });
        }
    }
    if dt.num_inner_faces() == 0 {
        return Err(GeometryError::DegenerateInput(
            "all vertices are collinear".into(),
        ));
    }

    let mut triangles: Vec<[usize; 3]> = dt
        .inner_faces()
        .map(|face| {
            let vs = face.vertices();
            let tri = [
                vs[0].data().index,
                vs[1].data().index,
                vs[2].data().index,
            ];
            canonical(tri)
        })
        .collect();
    triangles.sort_unstable();

    let vertices: Vec<Vec2> = points.iter().map(|(p, _)| *p).collect();
    let classes: Vec<VertexClass> = points.iter().map(|(_, c)| *c).collect();

    let mut referenced = vec![false; vertices.len()];
    for tri in &triangles {
        for &v in tri {
            referenced[v] = true;
        }
    }
    if let Some(i) = referenced.iter().position(|r| !r) {
        return Err(GeometryError::DegenerateInput(format!(
            "vertex {i} belongs to no triangle"
        )));
    }

    let (lo, hi) = {
        let mut lo = vertices[0];
        let mut hi = vertices[0];
        for v in &vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    };

    let tri_bins = Bins::build(lo, hi, triangles.len(), |t| {
        let [a, b, c] = triangles[t];
        let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
        (
            Vec2::new(pa.x.min(pb.x).min(pc.x), pa.y.min(pb.y).min(pc.y)),
            Vec2::new(pa.x.max(pb.x).max(pc.x), pa.y.max(pb.y).max(pc.y)),
        )
    });
    let vertex_bins = Bins::build(lo, hi, vertices.len(), |v| (vertices[v], vertices[v]));

    let mut grid = SpatialGrid {
        vertices,
        classes,
        triangles,
        goal,
        delta_p: 0.0,
        lo,
        hi,
        tri_bins,
        vertex_bins,
    };
    grid.delta_p = grid.probe_delta_p();
    Ok(grid)
}

/// Rotate so the smallest index leads, preserving cyclic (ccw) order.
fn canonical(tri: [usize; 3]) -> [usize; 3] {
    let k = (0..3).min_by_key(|&k| tri[k]).unwrap();
    [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]]
}

impl SpatialGrid {
    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn classes(&self) -> &[VertexClass] {
        &self.classes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn goal_index(&self) -> usize {
        self.goal
    }

    pub fn goal(&self) -> Vec2 {
        self.vertices[self.goal]
    }

    /// Grid resolution: estimated max distance from any bounding-box point
    /// to its nearest vertex.
    pub fn delta_p(&self) -> f64 {
        self.delta_p
    }

    /// Index of the triangle containing p, or None outside the hull.
    /// Points on shared edges resolve to the lowest triangle index.
    pub fn locate(&self, p: Vec2) -> Option<usize> {
        self.locate_weights(p).map(|(t, _)| t)
    }

    /// Interpolation stencil at p, or None outside the hull.
    pub fn stencil(&self, p: Vec2) -> Option<Stencil> {
        let (t, w) = self.locate_weights(p)?;
        let [a, b, c] = self.triangles[t];
        // Clamp the slack-negative weights and renormalize so the stencil
        // is a true convex combination.
        let w = [w[0].max(0.0), w[1].max(0.0), w[2].max(0.0)];
        let sum = w[0] + w[1] + w[2];
        Some(Stencil {
            triangle: t,
            vertices: [a, b, c],
            weights: [w[0] / sum, w[1] / sum, w[2] / sum],
        })
    }

    /// Barycentric interpolation of per-vertex values at p; returns 1
    /// outside the hull (the exterior carries the worst possible value).
    ///
    /// Inside the hull the result is a convex combination of the three
    /// corner values: monotone in `values` and bounded by their range.
    pub fn interpolate(&self, values: &[f64], p: Vec2) -> f64 {
        assert_eq!(values.len(), self.vertices.len(), "one value per vertex");
        match self.stencil(p) {
            Some(st) => {
                st.weights[0] * values[st.vertices[0]]
                    + st.weights[1] * values[st.vertices[1]]
                    + st.weights[2] * values[st.vertices[2]]
            }
            None => 1.0,
        }
    }

    /// Index of the vertex nearest to p.
    pub fn nearest_vertex(&self, p: Vec2) -> usize {
        let bins = &self.vertex_bins;
        let (cx0, cy0) = bins.cell_of(p);
        let (cx, cy) = (cx0 as isize, cy0 as isize);
        let (nx, ny) = (bins.nx as isize, bins.ny as isize);
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        let max_ring = bins.nx.max(bins.ny) as isize;
        for ring in 0..=max_ring {
            // Cells in this ring are at least (ring − 1) cell widths away;
            // once that exceeds the best distance, no closer vertex exists.
            if best < usize::MAX && ((ring - 1).max(0) as f64) * bins.cell > best_d {
                break;
            }
            let mut scan = |ix: isize, iy: isize| {
                if ix < 0 || iy < 0 || ix >= nx || iy >= ny {
                    return;
                }
                for &v in &bins.items[(iy * nx + ix) as usize] {
                    let d = self.vertices[v as usize].dist(p);
                    if d < best_d {
                        best_d = d;
                        best = v as usize;
                    }
                }
            };
            if ring == 0 {
                scan(cx, cy);
            } else {
                for x in (cx - ring)..=(cx + ring) {
                    scan(x, cy - ring);
                    scan(x, cy + ring);
                }
                for y in (cy - ring + 1)..=(cy + ring - 1) {
                    scan(cx - ring, y);
                    scan(cx + ring, y);
                }
            }
        }
        best
    }

    fn locate_weights(&self, p: Vec2) -> Option<(usize, [f64; 3])> {
        if p.x < self.lo.x || p.x > self.hi.x || p.y < self.lo.y || p.y > self.hi.y {
            return None;
        }
        let (ix, iy) = self.tri_bins.cell_of(p);
        for &t in &self.tri_bins.items[iy * self.tri_bins.nx + ix] {
            let tri = self.triangles[t as usize];
            if let Some(w) = barycentric(self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]], p)
            {
                if w[0] >= -BARY_SLACK && w[1] >= -BARY_SLACK && w[2] >= -BARY_SLACK {
                    return Some((t as usize, w));
                }
            }
        }
        None
    }

    fn probe_delta_p(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let steps = (PROBE_RES - 1) as f64;
        for iy in 0..PROBE_RES {
            let y = self.lo.y + (self.hi.y - self.lo.y) * iy as f64 / steps;
            for ix in 0..PROBE_RES {
                let x = self.lo.x + (self.hi.x - self.lo.x) * ix as f64 / steps;
                let p = Vec2::new(x, y);
                let d = self.vertices[self.nearest_vertex(p)].dist(p);
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// Normalized barycentric coordinates of p in triangle (a, b, c), or None
/// when the triangle is degenerate.
fn barycentric(a: Vec2, b: Vec2, c: Vec2, p: Vec2) -> Option<[f64; 3]> {
    let den = (b - a).cross(c - a);
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    let wb = (p - a).cross(c - a) / den;
    let wc = (b - a).cross(p - a) / den;
    let wa = 1.0 - wb - wc;
    if wa.is_finite() && wb.is_finite() {
        Some([wa, wb, wc])
    } else {
        None
    }
}
