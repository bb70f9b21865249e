//! Independent optimality oracle: exposure-weighted shortest paths on a
//! regular lattice.
//!
//! This deliberately shares no machinery with the solver — no value
//! function, no triangulation, no policy iteration — so agreement between
//! the two is meaningful cross-validation. The lattice uses a
//! 16-neighborhood, whose worst-case length distortion against straight
//! lines is below 2.8%, and edge weights integrate the raw intensity by
//! the trapezoid rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use mep_core::path::evaluate_exposure;
use mep_core::{Path as PlannedPath, Vec2};

use crate::scenario::Scenario;

/// Worst-case relative length overshoot of a 16-neighborhood lattice path
/// against the straight-line distance (attained between the (1,0) and
/// (1,2) directions).
pub const METRICATION_BOUND: f64 = 0.028;

const OFFSETS: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
];

/// How far (in cells) snapping may move a source/goal to find a free node.
const SNAP_RADIUS: i64 = 8;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid oracle input: {0}")]
    Validation(String),
    #[error("no lattice path from source to goal: {0}")]
    Unreachable(String),
}

struct Lattice<'a> {
    scenario: &'a Scenario,
    nx: i64,
    ny: i64,
    sx: f64,
    sy: f64,
}

impl<'a> Lattice<'a> {
    fn new(scenario: &'a Scenario, h: f64) -> Result<Self, OracleError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(OracleError::Validation(format!(
                "lattice spacing must be positive, got {h}"
            )));
        }
        let domain = &scenario.domain;
        let nx = (domain.width() / h).ceil() as i64;
        let ny = (domain.height() / h).ceil() as i64;
        let nodes = (nx + 1).checked_mul(ny + 1).filter(|&n| n <= 50_000_000);
        if nodes.is_none() {
            return Err(OracleError::Validation(format!(
                "lattice spacing {h} needs more than 5e7 nodes"
            )));
        }
        Ok(Lattice {
            scenario,
            nx,
            ny,
            sx: domain.width() / nx as f64,
            sy: domain.height() / ny as f64,
        })
    }

    fn len(&self) -> usize {
        ((self.nx + 1) * (self.ny + 1)) as usize
    }

    fn id(&self, i: i64, j: i64) -> usize {
        (j * (self.nx + 1) + i) as usize
    }

    fn position(&self, i: i64, j: i64) -> Vec2 {
        let domain = &self.scenario.domain;
        // Pin the far edges exactly so inclusive bounds checks cannot lose
        // the last row/column to rounding.
        let x = if i == self.nx {
            domain.max().x
        } else {
            domain.min().x + i as f64 * self.sx
        };
        let y = if j == self.ny {
            domain.max().y
        } else {
            domain.min().y + j as f64 * self.sy
        };
        Vec2::new(x, y)
    }

    /// A node is usable if it is strictly outside every obstacle. Points
    /// *on* an obstacle boundary are excluded too: the solver treats them
    /// as blocked vertices, and admitting them here would let lattice
    /// paths slide along obstacle faces through zero-width corridors.
    fn free(&self, p: Vec2) -> bool {
        let domain = &self.scenario.domain;
        domain.contains(p) && !self.in_or_on_obstacle(p)
    }

    fn in_or_on_obstacle(&self, p: Vec2) -> bool {
        self.scenario
            .domain
            .obstacles()
            .iter()
            .any(|poly| poly.contains(p) || poly.on_boundary(p))
    }

    fn edge_admissible(&self, a: Vec2, b: Vec2) -> bool {
        self.scenario.domain.segment_clear(a, b) && !self.in_or_on_obstacle(a.lerp(b, 0.5))
    }

    /// Free lattice node closest to `p` within the first non-empty ring
    /// of cells, searched outward.
    fn snap(&self, p: Vec2, what: &str) -> Result<(i64, i64), OracleError> {
        let domain = &self.scenario.domain;
        let ci = ((p.x - domain.min().x) / self.sx).round() as i64;
        let cj = ((p.y - domain.min().y) / self.sy).round() as i64;
        for ring in 0..=SNAP_RADIUS {
            let mut best: Option<((i64, i64), f64)> = None;
            for dj in -ring..=ring {
                for di in -ring..=ring {
                    if di.abs().max(dj.abs()) != ring {
                        continue;
                    }
                    let (i, j) = (ci + di, cj + dj);
                    if i < 0 || i > self.nx || j < 0 || j > self.ny {
                        continue;
                    }
                    let q = self.position(i, j);
                    if !self.free(q) {
                        continue;
                    }
                    let d = p.dist(q);
                    if best.map_or(true, |(_, bd)| d < bd) {
                        best = Some(((i, j), d));
                    }
                }
            }
            if let Some((cell, _)) = best {
                return Ok(cell);
            }
        }
        Err(OracleError::Validation(format!(
            "cannot snap {what} to a free lattice node; spacing too coarse"
        )))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the cheapest first.
        other
            .cost
            .partial_cmp(&self.cost)
            .expect("edge costs are finite")
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exposure of the cheapest lattice path from the scenario's first source
/// to its goal, with edge weights ∫ intensity ds along each edge.
pub fn dijkstra_oracle(scenario: &Scenario, h: f64) -> Result<f64, OracleError> {
    let lattice = Lattice::new(scenario, h)?;
    let source = scenario.sources[0];
    let (si, sj) = lattice.snap(source, "source")?;
    let (gi, gj) = lattice.snap(scenario.goal, "goal")?;
    let goal_id = lattice.id(gi, gj);

    let edge_cost = |a: Vec2, b: Vec2| -> f64 {
        let segment = PlannedPath {
            waypoints: vec![a, b],
            dt: 1.0,
        };
        evaluate_exposure(&scenario.field, &segment, h / 2.0)
    };

    let mut dist = vec![f64::INFINITY; lattice.len()];
    let mut heap = BinaryHeap::new();
    let start = lattice.id(si, sj);
    dist[start] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        node: start,
    });

    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if node == goal_id {
            return Ok(cost);
        }
        if cost > dist[node] {
            continue; // stale entry
        }
        let (i, j) = (node as i64 % (lattice.nx + 1), node as i64 / (lattice.nx + 1));
        let p = lattice.position(i, j);
        for (di, dj) in OFFSETS {
            let (ni, nj) = (i + di, j + dj);
            if ni < 0 || ni > lattice.nx || nj < 0 || nj > lattice.ny {
                continue;
            }
            let q = lattice.position(ni, nj);
            if !lattice.free(q) || !lattice.edge_admissible(p, q) {
                continue;
            }
            let next = HeapEntry {
                cost: cost + edge_cost(p, q),
                node: lattice.id(ni, nj),
            };
            if next.cost < dist[next.node] {
                dist[next.node] = next.cost;
                heap.push(next);
            }
        }
    }
    Err(OracleError::Unreachable(format!(
        "exhausted {} lattice nodes at spacing {h}",
        lattice.len()
    )))
}

/// Oracle runs at `h`, `h/2`, `h/4`, plus their Aitken extrapolation to
/// the zero-spacing limit.
#[derive(Clone, Copy, Debug)]
pub struct RichardsonEstimate {
    pub hs: [f64; 3],
    pub costs: [f64; 3],
    pub limit: f64,
}

/// Estimates the zero-spacing oracle limit by Aitken extrapolation of a
/// three-term spacing-halving sequence starting at `h`.
pub fn richardson_limit(scenario: &Scenario, h: f64) -> Result<RichardsonEstimate, OracleError> {
    let hs = [h, h / 2.0, h / 4.0];
    let costs = [
        dijkstra_oracle(scenario, hs[0])?,
        dijkstra_oracle(scenario, hs[1])?,
        dijkstra_oracle(scenario, hs[2])?,
    ];
    let (d1, d2) = (costs[1] - costs[0], costs[2] - costs[1]);
    let den = d2 - d1;
    let limit = if den.abs() <= 1e-12 * costs[2].abs().max(1e-300) {
        costs[2] // already converged to rounding noise
    } else {
        costs[2] - d2 * d2 / den
    };
    Ok(RichardsonEstimate { hs, costs, limit })
}
