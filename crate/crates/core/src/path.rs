//! Path extraction, exposure evaluation, and local smoothing.
//!
//! A discrete path follows the converged value field greedily: from the
//! current point, take the control chosen by a Bellman update and step by
//! `speed · Δt` until the goal is within one step. The exposure of a path
//! is the line integral of the **raw** field intensity, evaluated per
//! segment with the composite trapezoid rule at spacing `h_eval`.
//!
//! Because the extracted path is restricted to the discrete control
//! headings, a cheap local pass usually shaves a little exposure off:
//! each interior waypoint in turn is offered a handful of random nearby
//! replacements and keeps the best one that lowers the exposure of its
//! two adjacent segments without losing clearance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::Domain;
use crate::sensing::IntensityField;
use crate::solver::{bellman_update, SolverConfig, ValueField};
use crate::vec2::Vec2;

/// Candidate replacements offered per waypoint per smoothing pass.
const SMOOTH_CANDIDATES: usize = 8;
/// Smoothing passes before giving up on further improvement.
const SMOOTH_MAX_PASSES: usize = 20;
/// A pass that gains less than this fraction of the path exposure stops
/// the smoothing early; replanning speed matters more than the last few
/// parts per million.
const SMOOTH_REL_TOL: f64 = 1e-5;
/// Path length budget, in multiples of the domain diameter.
const MAX_PATH_DIAMETERS: f64 = 20.0;

/// A polyline path, sampled at the solver time step.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub waypoints: Vec<Vec2>,
    /// Time step between consecutive waypoints.
    pub dt: f64,
}

impl Path {
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].dist(w[1])).sum()
    }
}

/// A solved path with its reported quantities.
#[derive(Clone, Debug)]
pub struct PathResult {
    pub path: Path,
    /// Exposure of the path under the raw intensity.
    pub exposure: f64,
    /// Value read off the solved field at the source (scaled units).
    pub value_at_source: f64,
    /// Outer iterations of the solve that produced the field.
    pub outer_iters: usize,
    /// Wall-clock seconds spent producing this result.
    pub wall_time: f64,
}

/// Path extraction failure.
#[derive(Debug, Error)]
pub enum PathError {
    #[error("no path to the goal ({reason} after {steps} steps)")]
    Unreachable { steps: usize, reason: &'static str },
}

/// Follow the value field greedily from `source` until `goal` is captured
/// (within one step length and reachable by a clear segment).
///
/// Fails when the local value saturates (the field says the goal cannot be
/// reached), no control is admissible, or the step budget — 20 domain
/// diameters worth of steps — runs out.
pub fn extract_path(
    value: &ValueField,
    field: &IntensityField,
    domain: &Domain,
    source: Vec2,
    goal: Vec2,
    config: &SolverConfig,
) -> Result<Path, PathError> {
    let step = config.step_length();
    let max_steps = (MAX_PATH_DIAMETERS * domain.diameter() / step).ceil() as usize;
    let mut waypoints = vec![source];
    let mut p = source;
    for _ in 0..max_steps {
        if p.dist(goal) <= step && domain.segment_clear(p, goal) {
            waypoints.push(goal);
            return Ok(Path {
                waypoints,
                dt: config.dt,
            });
        }
        let (best, control) = bellman_update(value, field, domain, p, config);
        let Some(u) = control else {
            return Err(PathError::Unreachable {
                steps: waypoints.len() - 1,
                reason: "no admissible control",
            });
        };
        if best >= 1.0 - 1e-12 {
            return Err(PathError::Unreachable {
                steps: waypoints.len() - 1,
                reason: "value saturated",
            });
        }
        p = p + u * config.dt;
        waypoints.push(p);
    }
    Err(PathError::Unreachable {
        steps: max_steps,
        reason: "step budget exhausted",
    })
}

/// Exposure of the path: per-segment composite trapezoid integration of
/// the raw intensity at spacing `h_eval`.
pub fn evaluate_exposure(field: &IntensityField, path: &Path, h_eval: f64) -> f64 {
    assert!(h_eval > 0.0, "h_eval must be positive");
    path.waypoints
        .windows(2)
        .map(|w| integrate_segment(&|p| field.intensity(p), w[0], w[1], h_eval))
        .sum()
}

/// Like [`evaluate_exposure`], but integrates the rescaled, floored
/// intensity — the quantity the value function approximates, so this is
/// the number to compare against a recovered source value.
pub fn evaluate_scaled_exposure(field: &IntensityField, path: &Path, h_eval: f64) -> f64 {
    assert!(h_eval > 0.0, "h_eval must be positive");
    path.waypoints
        .windows(2)
        .map(|w| integrate_segment(&|p| field.scaled_intensity(p), w[0], w[1], h_eval))
        .sum()
}

/// Composite trapezoid rule for f along [a, b] with sub-segments no longer
/// than h; exact (up to rounding) for f linear along the segment.
fn integrate_segment(f: &impl Fn(Vec2) -> f64, a: Vec2, b: Vec2, h: f64) -> f64 {
    let len = a.dist(b);
    if len == 0.0 {
        return 0.0;
    }
    let n = (len / h).ceil().max(1.0) as usize;
    let mut acc = 0.0;
    let mut prev = f(a);
    for i in 1..=n {
        let cur = f(a.lerp(b, i as f64 / n as f64));
        acc += 0.5 * (prev + cur);
        prev = cur;
    }
    acc * (len / n as f64)
}

/// Local exposure smoothing by randomized coordinate descent.
///
/// Each pass visits the interior waypoints in order and offers each one
/// a few uniformly random replacements within a disk of radius
/// `½ · speed · Δt`; the waypoint moves to the best candidate that keeps
/// both adjacent segments clear and strictly lowers their combined
/// exposure (evaluated at `h_eval`, like the reported exposure). Stops
/// after a pass that gains nothing — or nothing beyond a relative
/// rounding-level threshold — or after 20 passes.
///
/// Since every move strictly decreases the sum of the two affected segment
/// integrals and leaves all other segments untouched, the total exposure
/// never increases. Equal seeds give identical results.
pub fn local_optimize(
    field: &IntensityField,
    domain: &Domain,
    path: &Path,
    config: &SolverConfig,
    h_eval: f64,
    seed: u64,
) -> Path {
    let mut waypoints = path.waypoints.clone();
    if waypoints.len() < 3 {
        return path.clone();
    }
    let radius = 0.5 * config.step_length();
    let seg = |a: Vec2, b: Vec2| integrate_segment(&|p| field.intensity(p), a, b, h_eval);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Segment integrals, maintained incrementally: moving waypoint k only
    // invalidates segments k-1 and k.
    let mut seg_cost: Vec<f64> = waypoints
        .windows(2)
        .map(|w| seg(w[0], w[1]))
        .collect();
    let gain_floor = SMOOTH_REL_TOL * seg_cost.iter().sum::<f64>();
    for _pass in 0..SMOOTH_MAX_PASSES {
        let mut pass_gain = 0.0;
        for k in 1..waypoints.len() - 1 {
            let (prev, cur, next) = (waypoints[k - 1], waypoints[k], waypoints[k + 1]);
            let base = seg_cost[k - 1] + seg_cost[k];
            let mut best = base;
            let mut best_point = None;
            for _ in 0..SMOOTH_CANDIDATES {
                // Uniform draw in the disk; draws happen for every
                // candidate so the RNG stream does not depend on geometry.
                let r = radius * rng.gen::<f64>().sqrt();
                let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
                let cand = cur + Vec2::new(r * theta.cos(), r * theta.sin());
                if !domain.contains(cand) || domain.point_in_obstacle(cand) {
                    continue;
                }
                if !domain.segment_clear(prev, cand) || !domain.segment_clear(cand, next) {
                    continue;
                }
                let (before, after) = (seg(prev, cand), seg(cand, next));
                if before + after < best {
                    best = before + after;
                    best_point = Some((cand, before, after));
                }
            }
            if let Some((point, before, after)) = best_point {
                waypoints[k] = point;
                seg_cost[k - 1] = before;
                seg_cost[k] = after;
                pass_gain += base - best;
            }
        }
        if pass_gain <= gain_floor {
            break;
        }
    }
    Path {
        waypoints,
        dt: path.dt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_grid, triangulate, GridConfig, Polygon};
    use crate::sensing::{IntensityMode, SensingModel, SensorNode};
    use crate::solver::solve;
    use std::sync::Arc;

    #[test]
    fn trapezoid_is_exact_for_linear_integrands() {
        let f = |p: Vec2| 2.0 * p.x + 3.0 * p.y + 1.0;
        let (a, b) = (Vec2::new(0.0, 0.0), Vec2::new(2.0, 1.0));
        let len = a.dist(b);
        let exact = 0.5 * (f(a) + f(b)) * len;
        for h in [1.0, 0.1, 0.007] {
            let got = integrate_segment(&f, a, b, h);
            assert!((got - exact).abs() < 1e-12 * exact, "h = {h}: {got}");
        }
        assert_eq!(integrate_segment(&f, a, a, 0.1), 0.0);
    }

    #[test]
    fn exposure_of_constant_intensity_is_length() {
        // A huge sharp Boolean disk makes the raw intensity exactly 1.
        let field = IntensityField::new(
            vec![SensorNode::new(
                Vec2::new(0.0, 0.0),
                SensingModel::BooleanDisk {
                    radius: 1e3,
                    delta: 0.0,
                },
            )],
            IntensityMode::AllSensor,
            100.0,
            1e-9,
        )
        .unwrap();
        let path = Path {
            waypoints: vec![Vec2::new(0.0, 0.0), Vec2::new(3.0, 4.0)],
            dt: 0.1,
        };
        let e = evaluate_exposure(&field, &path, 1e-3);
        assert!((e - 5.0).abs() < 1e-12, "got {e}");
    }

    #[test]
    fn scaled_exposure_of_floor_field_is_floor_times_length() {
        let field = IntensityField::floor_only(100.0, 1e-4).unwrap();
        let path = Path {
            waypoints: vec![Vec2::new(0.0, 0.0), Vec2::new(3.0, 4.0), Vec2::new(6.0, 8.0)],
            dt: 0.1,
        };
        let e = evaluate_scaled_exposure(&field, &path, 0.05);
        assert!((e - 1e-4 * 10.0).abs() < 1e-15, "got {e}");
    }

    #[test]
    fn exposure_matches_closed_form_for_offset_segment() {
        // Node at (0, 1), path along the x axis: I(t) = 4 / (t² + 1), so
        // ∫_{-2}^{2} I dt = 8 · atan 2.
        let field = IntensityField::new(
            vec![SensorNode::new(
                Vec2::new(0.0, 1.0),
                SensingModel::attenuated_disk(4.0, 2.0),
            )],
            IntensityMode::AllSensor,
            100.0,
            1e-9,
        )
        .unwrap();
        let path = Path {
            waypoints: vec![Vec2::new(-2.0, 0.0), Vec2::new(2.0, 0.0)],
            dt: 0.1,
        };
        let want = 8.0 * 2.0f64.atan();
        let h = 1e-3 * path.length();
        let got = evaluate_exposure(&field, &path, h);
        assert!(
            (got - want).abs() / want < 1e-4,
            "got {got}, want {want} (closed form)"
        );
    }

    #[test]
    fn exposure_matches_adaptive_quadrature_for_noisy_model() {
        let field = IntensityField::new(
            vec![SensorNode::new(
                Vec2::new(3.0, 2.0),
                SensingModel::noisy_probability(100.0, 1.0, 1.0, 6.0),
            )],
            IntensityMode::AllSensor,
            100.0,
            1e-9,
        )
        .unwrap();
        let (a, b) = (Vec2::new(0.0, 0.0), Vec2::new(8.0, 3.0));
        let path = Path {
            waypoints: vec![a, b],
            dt: 0.1,
        };
        let h = 1e-3 * path.length();
        let got = evaluate_exposure(&field, &path, h);

        // Adaptive Simpson along the segment parameter, independent of the
        // trapezoid path.
        let len = a.dist(b);
        let f = |t: f64| field.intensity(a.lerp(b, t / len));
        let want = adaptive_simpson(&f, 0.0, len, 1e-10, 40);
        assert!(
            (got - want).abs() / want < 1e-4,
            "got {got}, want {want} (quadrature)"
        );
    }

    fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        fn rec(
            f: &impl Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, depth)
    }

    fn floor_scenario() -> (
        Domain,
        IntensityField,
        Vec2,
        Vec2,
        Arc<crate::geometry::SpatialGrid>,
        SolverConfig,
    ) {
        let domain = Domain::rectangle(Vec2::new(0.0, 0.0), Vec2::new(10.0, 10.0)).unwrap();
        let field = IntensityField::floor_only(100.0, 0.01).unwrap();
        let goal = Vec2::new(8.0, 5.0);
        let source = Vec2::new(1.0, 5.0);
        let gc = GridConfig {
            points_per_node: 250,
            boundary_spacing: 0.7,
            base_rate: 0.1,
            seed: 12,
        };
        let pts = sample_grid(&domain, &field, goal, &[source], &gc).unwrap();
        let grid = Arc::new(triangulate(&pts).unwrap());
        (domain, field, source, goal, grid, SolverConfig::default())
    }

    #[test]
    fn extract_path_in_constant_field_is_nearly_straight() {
        let (domain, field, source, goal, grid, config) = floor_scenario();
        let vf = solve(&domain, &field, goal, grid, &config).unwrap();
        let path = extract_path(&vf, &field, &domain, source, goal, &config).unwrap();
        assert_eq!(path.waypoints[0], source);
        assert_eq!(*path.waypoints.last().unwrap(), goal);
        // All real steps have the step length; the final capture hop may
        // be shorter.
        for w in path.waypoints[..path.waypoints.len() - 1].windows(2) {
            assert!((w[0].dist(w[1]) - config.step_length()).abs() < 1e-9);
        }
        let straight = source.dist(goal);
        assert!(
            path.length() <= 1.1 * straight,
            "length {} vs straight {straight}",
            path.length()
        );
    }

    #[test]
    fn extract_path_degenerate_source_at_goal() {
        let (domain, field, _, goal, grid, config) = floor_scenario();
        let vf = solve(&domain, &field, goal, grid, &config).unwrap();
        let path = extract_path(&vf, &field, &domain, goal, goal, &config).unwrap();
        assert_eq!(path.waypoints, vec![goal, goal]);
        assert_eq!(path.length(), 0.0);
    }

    #[test]
    fn extract_path_reports_unreachable_across_a_wall() {
        // A full-height wall splits the domain; the left half cannot reach
        // the goal on the right.
        let wall = Polygon::new(vec![
            Vec2::new(4.9, 0.0),
            Vec2::new(5.1, 0.0),
            Vec2::new(5.1, 10.0),
            Vec2::new(4.9, 10.0),
        ])
        .unwrap();
        let domain =
            Domain::new(Vec2::new(0.0, 0.0), Vec2::new(10.0, 10.0), vec![wall]).unwrap();
        let field = IntensityField::floor_only(100.0, 0.01).unwrap();
        let goal = Vec2::new(8.0, 5.0);
        let source = Vec2::new(2.0, 5.0);
        let gc = GridConfig {
            points_per_node: 250,
            boundary_spacing: 0.7,
            base_rate: 0.1,
            seed: 3,
        };
        let pts = sample_grid(&domain, &field, goal, &[source], &gc).unwrap();
        let grid = Arc::new(triangulate(&pts).unwrap());
        let config = SolverConfig::default();
        let vf = solve(&domain, &field, goal, grid, &config).unwrap();
        let err = extract_path(&vf, &field, &domain, source, goal, &config).unwrap_err();
        assert!(matches!(err, PathError::Unreachable { .. }), "{err}");
        // The right half still reaches it.
        let ok = extract_path(&vf, &field, &domain, Vec2::new(6.5, 5.0), goal, &config);
        assert!(ok.is_ok());
    }

    fn straight_path(a: Vec2, b: Vec2, step: f64) -> Path {
        let n = (a.dist(b) / step).ceil() as usize;
        let waypoints = (0..=n).map(|i| a.lerp(b, i as f64 / n as f64)).collect();
        Path {
            waypoints,
            dt: 0.1,
        }
    }

    #[test]
    fn local_optimize_bends_away_from_a_peak() {
        let domain = Domain::rectangle(Vec2::new(0.0, 0.0), Vec2::new(10.0, 10.0)).unwrap();
        let field = IntensityField::new(
            vec![SensorNode::new(
                Vec2::new(5.0, 5.0),
                SensingModel::attenuated_disk(4.0, 2.0),
            )],
            IntensityMode::AllSensor,
            100.0,
            1e-9,
        )
        .unwrap();
        let config = SolverConfig::default();
        let path = straight_path(Vec2::new(1.0, 5.0), Vec2::new(9.0, 5.0), 0.1);
        let h = 0.05;
        let before = evaluate_exposure(&field, &path, h);
        let optimized = local_optimize(&field, &domain, &path, &config, h, 7);
        let after = evaluate_exposure(&field, &optimized, h);
        assert!(after < before, "{after} vs {before}");
        // Endpoints stay put.
        assert_eq!(optimized.waypoints[0], path.waypoints[0]);
        assert_eq!(optimized.waypoints.last(), path.waypoints.last());
        // Same seed, same answer.
        let again = local_optimize(&field, &domain, &path, &config, h, 7);
        assert_eq!(optimized, again);
    }

    #[test]
    fn local_optimize_leaves_zero_exposure_paths_alone() {
        // Raw intensity is zero everywhere in a nodeless field, so no move
        // can strictly improve and the path must come back unchanged.
        let domain = Domain::rectangle(Vec2::new(0.0, 0.0), Vec2::new(10.0, 10.0)).unwrap();
        let field = IntensityField::floor_only(100.0, 1e-9).unwrap();
        let config = SolverConfig::default();
        let path = straight_path(Vec2::new(1.0, 1.0), Vec2::new(9.0, 9.0), 0.1);
        let optimized = local_optimize(&field, &domain, &path, &config, 0.05, 99);
        assert_eq!(optimized, path);
    }

    #[test]
    fn local_optimize_respects_obstacles() {
        // Straight path hugging a wall gap: no candidate may cut through.
        let block = Polygon::new(vec![
            Vec2::new(4.0, 4.9),
            Vec2::new(6.0, 4.9),
            Vec2::new(6.0, 5.4),
            Vec2::new(4.0, 5.4),
        ])
        .unwrap();
        let domain =
            Domain::new(Vec2::new(0.0, 0.0), Vec2::new(10.0, 10.0), vec![block]).unwrap();
        let field = IntensityField::new(
            vec![SensorNode::new(
                Vec2::new(5.0, 3.0),
                SensingModel::attenuated_disk(4.0, 2.0),
            )],
            IntensityMode::AllSensor,
            100.0,
            1e-9,
        )
        .unwrap();
        let config = SolverConfig::default();
        // Path passes just below the block; the hot node pushes candidates
        // up, the block must keep them out.
        let path = straight_path(Vec2::new(1.0, 4.7), Vec2::new(9.0, 4.7), 0.1);
        let optimized = local_optimize(&field, &domain, &path, &config, 0.05, 5);
        for w in optimized.waypoints.windows(2) {
            assert!(domain.segment_clear(w[0], w[1]));
        }
        let h = 0.05;
        assert!(
            evaluate_exposure(&field, &optimized, h) <= evaluate_exposure(&field, &path, h)
        );
    }
}
