//! Exposure-weighted grid sampling.
//!
//! Vertex placement follows the field: a candidate point drawn uniformly
//! in the domain is kept with probability
//!
//! ```text
//! accept(p) = base_rate + (1 − base_rate) · Ī(p) / Ī_max
//! ```
//!
//! so regions under heavy sensor coverage — where the value function bends
//! hardest — get proportionally more vertices, while `base_rate` keeps the
//! quiet regions from starving. Ī_max is a robust (99th percentile) sample
//! estimate of the scaled intensity; using the raw maximum would let the
//! near-sensor cap flatten the acceptance ratio everywhere else.
//!
//! Besides the random interior points, the grid always contains: the goal
//! (first), the sources, rings of points along every obstacle boundary,
//! the four domain corners, and points along the domain boundary, spaced
//! at `boundary_spacing`. Exact duplicates are dropped, first occurrence
//! (and hence its class) wins.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sensing::IntensityField;
use crate::vec2::Vec2;

use super::{Domain, GeometryError, VertexClass};

/// Number of uniform samples used to estimate Ī_max.
const INTENSITY_SAMPLES: usize = 4096;

/// Grid sampling parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    /// Target number of interior points per sensor node (at least one
    /// node's worth for a nodeless field).
    pub points_per_node: usize,
    /// Spacing of domain-boundary and obstacle-ring points.
    pub boundary_spacing: f64,
    /// Floor of the acceptance probability.
    pub base_rate: f64,
    /// Seed for the sampling RNG; equal seeds give identical grids.
    pub seed: u64,
}

impl GridConfig {
    /// Defaults for a given domain: 100 points per node, boundary spacing
    /// of 2% of the domain diameter, base rate 0.1, seed 0.
    pub fn for_domain(domain: &Domain) -> Self {
        GridConfig {
            points_per_node: 100,
            boundary_spacing: 0.02 * domain.diameter(),
            base_rate: 0.1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let ok = self.points_per_node > 0
            && self.boundary_spacing.is_finite()
            && self.boundary_spacing > 0.0
            && self.base_rate.is_finite()
            && self.base_rate > 0.0
            && self.base_rate <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(GeometryError::DegenerateInput(format!(
                "invalid grid config: {self:?}"
            )))
        }
    }
}

/// Sample the vertex cloud for a scenario. The goal is the first vertex;
/// all returned points are inside the domain and outside obstacle
/// interiors (obstacle-ring points sit exactly on the boundaries).
pub fn sample_grid(
    domain: &Domain,
    field: &IntensityField,
    goal: Vec2,
    sources: &[Vec2],
    config: &GridConfig,
) -> Result<Vec<(Vec2, VertexClass)>, GeometryError> {
    config.validate()?;
    if !domain.contains(goal) {
        return Err(GeometryError::OutsideBounds { what: "goal" });
    }
    if domain.point_in_obstacle(goal) {
        return Err(GeometryError::GoalInObstacle);
    }
    for (index, &s) in sources.iter().enumerate() {
        if !domain.contains(s) {
            return Err(GeometryError::OutsideBounds { what: "source" });
        }
        if domain.point_in_obstacle(s) {
            return Err(GeometryError::SourceInObstacle { index });
        }
    }

    let mut points: Vec<(Vec2, VertexClass)> = Vec::new();
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    let mut push = |points: &mut Vec<(Vec2, VertexClass)>, p: Vec2, class: VertexClass| {
        if seen.insert((p.x.to_bits(), p.y.to_bits())) {
            points.push((p, class));
        }
    };

    push(&mut points, goal, VertexClass::Goal);
    for &s in sources {
        push(&mut points, s, VertexClass::Free);
    }

    // Obstacle boundary rings: every polygon vertex, plus edge subdivision
    // at the boundary spacing.
    for poly in domain.obstacles() {
        for (a, b) in poly.edges() {
            let n_seg = (a.dist(b) / config.boundary_spacing).ceil().max(1.0) as usize;
            for j in 0..n_seg {
                let p = a.lerp(b, j as f64 / n_seg as f64);
                push(&mut points, p, VertexClass::Obstacle);
            }
        }
    }

    // Domain rectangle: corners, then edge subdivisions (corners excluded).
    let (lo, hi) = (domain.min(), domain.max());
    let corners = [
        lo,
        Vec2::new(hi.x, lo.y),
        hi,
        Vec2::new(lo.x, hi.y),
    ];
    for &c in &corners {
        if !domain.point_in_obstacle(c) {
            push(&mut points, c, VertexClass::DomainBoundary);
        }
    }
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let n_seg = (a.dist(b) / config.boundary_spacing).ceil().max(1.0) as usize;
        for j in 1..n_seg {
            let p = a.lerp(b, j as f64 / n_seg as f64);
            if !domain.point_in_obstacle(p) {
                push(&mut points, p, VertexClass::DomainBoundary);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let uniform_point = |rng: &mut ChaCha8Rng| {
        Vec2::new(
            lo.x + rng.gen::<f64>() * (hi.x - lo.x),
            lo.y + rng.gen::<f64>() * (hi.y - lo.y),
        )
    };

    // Robust Ī_max estimate over the free space.
    let mut intensities = Vec::with_capacity(INTENSITY_SAMPLES);
    let mut draws = 0usize;
    while intensities.len() < INTENSITY_SAMPLES && draws < 4 * INTENSITY_SAMPLES {
        draws += 1;
        let p = uniform_point(&mut rng);
        if !domain.point_in_obstacle(p) {
            intensities.push(field.scaled_intensity(p));
        }
    }
    if intensities.len() < INTENSITY_SAMPLES / 16 {
        return Err(GeometryError::SamplingExhausted {
            draws,
            accepted: intensities.len(),
            target: INTENSITY_SAMPLES,
        });
    }
    intensities.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((0.99 * intensities.len() as f64).ceil() as usize).clamp(1, intensities.len()) - 1;
    let i_max = intensities[idx].max(field.eps_floor());

    // Exposure-weighted rejection sampling of the interior.
    let target = config.points_per_node * field.nodes().len().max(1);
    let max_draws = ((target as f64 / config.base_rate) * 50.0) as usize;
    let mut accepted = 0usize;
    let mut draws = 0usize;
    while accepted < target {
        if draws >= max_draws {
            return Err(GeometryError::SamplingExhausted {
                draws,
                accepted,
                target,
            });
        }
        draws += 1;
        let p = uniform_point(&mut rng);
        let u: f64 = rng.gen();
        if domain.point_in_obstacle(p) {
            continue;
        }
        let accept = config.base_rate
            + (1.0 - config.base_rate) * (field.scaled_intensity(p) / i_max).min(1.0);
        if u < accept {
            push(&mut points, p, VertexClass::Free);
            accepted += 1;
        }
    }

    Ok(points)
}
