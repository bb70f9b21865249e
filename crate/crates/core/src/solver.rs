//! Semi-Lagrangian policy iteration on the transformed value function.
//!
//! The minimal exposure value V(p) = inf over paths of ∫ Ī ds solves a
//! static HJB equation. Its transform v̄ = 1 − e^{−V} takes values in
//! [0, 1] and satisfies the discrete fixed-point relation
//!
//! ```text
//! v̄(p) = min over controls u of  1 + (ℐv̄(p + u Δt) − 1) · e^{−g(p, u)}
//! ```
//!
//! where ℐ is barycentric interpolation on the grid (1 outside the hull)
//! and g is the trapezoidal step cost
//! g = ½ (Ī(p) + Ī(p + u Δt)) · ‖u‖ · Δt. The goal vertex is pinned to 0
//! and obstacle vertices to 1. Because the interpolation is a convex
//! combination and e^{−g} < 1, the update is monotone and a sup-norm
//! contraction: Picard iteration converges, and policy iteration
//! (alternating one improvement sweep with evaluation of the frozen
//! policy to a fixed point) converges much faster in outer iterations.
//!
//! All sweeps are Jacobi: each vertex updates against a snapshot of the
//! previous sweep, so results are independent of vertex order. A solve
//! precomputes, per (vertex, control) pair, the admissibility, the decay
//! factor e^{−g}, and the landing stencil; sweeps then reduce to scans of
//! this transition table.

use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{Domain, SpatialGrid, VertexClass};
use crate::sensing::IntensityField;
use crate::vec2::Vec2;

/// Solver parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Time step of the semi-Lagrangian scheme.
    pub dt: f64,
    /// Agent speed; steps have length `speed * dt`.
    pub speed: f64,
    /// Number of evenly spaced control directions.
    pub n_directions: usize,
    /// Sup-norm tolerance for fixed-policy evaluation sweeps.
    pub tol_policy_eval: f64,
    /// Sup-norm tolerance on the value change across one outer iteration.
    pub tol_outer: f64,
    /// Evaluation sweep budget before giving up.
    pub max_eval_sweeps: usize,
    /// Outer iteration budget before giving up.
    pub max_outer_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.1,
            speed: 1.0,
            n_directions: 36,
            tol_policy_eval: 1e-10,
            tol_outer: 1e-8,
            max_eval_sweeps: 50_000,
            max_outer_iters: 10_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = self.dt.is_finite()
            && self.dt > 0.0
            && self.speed.is_finite()
            && self.speed > 0.0
            && self.n_directions >= 2
            && self.tol_policy_eval > 0.0
            && self.tol_outer > 0.0
            && self.max_eval_sweeps > 0
            && self.max_outer_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidConfig(format!("{self:?}")))
        }
    }

    /// Step length `speed * dt`.
    pub fn step_length(&self) -> f64 {
        self.speed * self.dt
    }
}

/// Solver failure.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("goal ({x}, {y}) is not the goal vertex of the grid")]
    GoalMismatch { x: f64, y: f64 },
    #[error("{stage} did not converge within {limit} iterations (residual {residual:e})")]
    NonConvergence {
        stage: &'static str,
        limit: usize,
        residual: f64,
    },
}

/// The control set: `n_directions` velocities of norm `speed`, at evenly
/// spaced headings 2πj/n starting from the positive x axis.
pub fn control_set(config: &SolverConfig) -> Vec<Vec2> {
    (0..config.n_directions)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / config.n_directions as f64;
            Vec2::new(config.speed * theta.cos(), config.speed * theta.sin())
        })
        .collect()
}

/// Trapezoidal step cost g = ½ (Ī(from) + Ī(to)) ‖u‖ Δt.
pub fn step_cost(field: &IntensityField, from: Vec2, to: Vec2, u: Vec2, dt: f64) -> f64 {
    0.5 * (field.scaled_intensity(from) + field.scaled_intensity(to)) * u.norm() * dt
}

/// Invert the value transform: V = −ln(1 − v̄), clamped so the obstacle
/// value v̄ = 1 maps to a large finite number instead of infinity.
pub fn recover_value(vbar: f64) -> f64 {
    let v = vbar.clamp(0.0, 1.0 - 1e-15);
    -(-v).ln_1p()
}

/// The transformed value field on a grid, with the greedy policy.
#[derive(Clone, Debug)]
pub struct ValueField {
    grid: Arc<SpatialGrid>,
    controls: Vec<Vec2>,
    vbar: Vec<f64>,
    policy: Vec<Option<usize>>,
    frozen: Vec<bool>,
    outer_iters: usize,
}

impl ValueField {
    /// Fresh field: v̄ = 1 everywhere except the goal vertex at 0; goal
    /// and obstacle vertices are frozen (boundary conditions), the policy
    /// is empty. The control set is fixed here from `config`.
    pub fn new(grid: Arc<SpatialGrid>, config: &SolverConfig) -> Self {
        let n = grid.len();
        let mut vbar = vec![1.0; n];
        let mut frozen = vec![false; n];
        for (i, class) in grid.classes().iter().enumerate() {
            match class {
                VertexClass::Goal => {
                    vbar[i] = 0.0;
                    frozen[i] = true;
                }
                VertexClass::Obstacle => {
                    vbar[i] = 1.0;
                    frozen[i] = true;
                }
                _ => {}
            }
        }
        ValueField {
            controls: control_set(config),
            grid,
            vbar,
            policy: vec![None; n],
            frozen,
            outer_iters: 0,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn grid_shared(&self) -> Arc<SpatialGrid> {
        Arc::clone(&self.grid)
    }

    /// Transformed values, one per vertex, in [0, 1].
    pub fn vbar(&self) -> &[f64] {
        &self.vbar
    }

    /// Overwrite the values (clamped to [0, 1]); frozen vertices keep
    /// their boundary values. Intended for analysis and testing.
    pub fn set_vbar(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.vbar.len(), "one value per vertex");
        for (i, &v) in values.iter().enumerate() {
            if !self.frozen[i] {
                self.vbar[i] = v.clamp(0.0, 1.0);
            }
        }
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    /// Chosen control index at vertex i, if any.
    pub fn policy_control(&self, i: usize) -> Option<usize> {
        self.policy[i]
    }

    /// Chosen control velocity at vertex i, if any.
    pub fn policy_velocity(&self, i: usize) -> Option<Vec2> {
        self.policy[i].map(|j| self.controls[j])
    }

    pub fn controls(&self) -> &[Vec2] {
        &self.controls
    }

    /// Outer iterations used by the solve that produced this field.
    pub fn outer_iterations(&self) -> usize {
        self.outer_iters
    }

    /// Interpolated transformed value at p (1 outside the hull).
    pub fn value_at(&self, p: Vec2) -> f64 {
        self.grid.interpolate(&self.vbar, p)
    }

    /// Interpolated value in original (scaled) units: −ln(1 − v̄(p)).
    pub fn recovered_value_at(&self, p: Vec2) -> f64 {
        recover_value(self.value_at(p))
    }
}

/// One Bellman update at an arbitrary point: the minimum over admissible
/// controls of 1 + (ℐv̄(p + u Δt) − 1) e^{−g}, and the minimizing control
/// (ties to the lowest control index). A control is admissible when the
/// straight step stays in the domain and clear of obstacles. With no
/// admissible control the result is (1, None).
pub fn bellman_update(
    value: &ValueField,
    field: &IntensityField,
    domain: &Domain,
    p: Vec2,
    config: &SolverConfig,
) -> (f64, Option<Vec2>) {
    let mut best = f64::INFINITY;
    let mut best_u = None;
    for &u in value.controls() {
        let landing = p + u * config.dt;
        if !domain.segment_clear(p, landing) {
            continue;
        }
        let interp = value.value_at(landing);
        let g = step_cost(field, p, landing, u, config.dt);
        let cand = 1.0 + (interp - 1.0) * (-g).exp();
        if cand < best {
            best = cand;
            best_u = Some(u);
        }
    }
    if best_u.is_none() {
        (1.0, None)
    } else {
        (best.clamp(0.0, 1.0), best_u)
    }
}

/// Precomputed transition data for one admissible (vertex, control) pair.
#[derive(Clone, Copy, Debug)]
struct Transition {
    /// Decay factor e^{−g} of the step.
    rho: f64,
    /// Landing stencil: vertex indices and convex weights, or None when
    /// the landing point is outside the hull (interpolant 1).
    stencil: Option<([u32; 3], [f64; 3])>,
}

/// Dense (vertex-major) table of transitions; `None` rows are inadmissible
/// controls or frozen vertices.
struct TransitionTable {
    d: usize,
    rows: Vec<Option<Transition>>,
}

impl TransitionTable {
    fn build(
        grid: &SpatialGrid,
        field: &IntensityField,
        domain: &Domain,
        controls: &[Vec2],
        frozen: &[bool],
        dt: f64,
    ) -> Self {
        let n = grid.len();
        let d = controls.len();
        let mut rows = vec![None; n * d];
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let p = grid.vertices()[i];
            for (j, &u) in controls.iter().enumerate() {
                let landing = p + u * dt;
                if !domain.segment_clear(p, landing) {
                    continue;
                }
                let stencil = grid.stencil(landing).map(|st| {
                    (
                        [
                            st.vertices[0] as u32,
                            st.vertices[1] as u32,
                            st.vertices[2] as u32,
                        ],
                        st.weights,
                    )
                });
                let g = step_cost(field, p, landing, u, dt);
                rows[i * d + j] = Some(Transition {
                    rho: (-g).exp(),
                    stencil,
                });
            }
        }
        TransitionTable { d, rows }
    }

    #[inline]
    fn candidate(&self, t: &Transition, vbar: &[f64]) -> f64 {
        let interp = match t.stencil {
            Some((idx, w)) => {
                w[0] * vbar[idx[0] as usize]
                    + w[1] * vbar[idx[1] as usize]
                    + w[2] * vbar[idx[2] as usize]
            }
            None => 1.0,
        };
        1.0 + (interp - 1.0) * t.rho
    }
}

/// One Jacobi improvement sweep: every non-frozen vertex takes the best
/// candidate value and control, computed against the pre-sweep snapshot.
fn improve_sweep(table: &TransitionTable, vf: &mut ValueField) {
    let snapshot = vf.vbar.clone();
    let d = table.d;
    for i in 0..vf.vbar.len() {
        if vf.frozen[i] {
            continue;
        }
        let mut best = f64::INFINITY;
        let mut best_j = None;
        for j in 0..d {
            if let Some(t) = &table.rows[i * d + j] {
                let cand = table.candidate(t, &snapshot);
                if cand < best {
                    best = cand;
                    best_j = Some(j);
                }
            }
        }
        match best_j {
            Some(_) => vf.vbar[i] = best.clamp(0.0, 1.0),
            None => vf.vbar[i] = 1.0,
        }
        vf.policy[i] = best_j;
    }
}

/// Result of a bounded run of Jacobi evaluation sweeps.
struct EvalRun {
    sweeps: usize,
    residual: f64,
    converged: bool,
}

/// Jacobi evaluation sweeps of the frozen policy until the sup-norm
/// residual drops below `tol` or the sweep budget runs out. Exhausting the
/// budget is not an error: a frozen policy can contain cycles whose
/// evaluation contracts arbitrarily slowly (the factor approaches one as
/// the running cost approaches zero), and the next improvement sweep
/// dissolves such cycles, so the caller decides what an unconverged run
/// means.
fn evaluate_sweeps(table: &TransitionTable, vf: &mut ValueField, tol: f64, max_sweeps: usize) -> EvalRun {
    let d = table.d;
    let n = vf.vbar.len();
    let mut next = vf.vbar.clone();
    let mut residual = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        residual = 0.0;
        for i in 0..n {
            let new = if vf.frozen[i] {
                vf.vbar[i]
            } else {
                match vf.policy[i].and_then(|j| table.rows[i * d + j].as_ref()) {
                    Some(t) => table.candidate(t, &vf.vbar).clamp(0.0, 1.0),
                    None => vf.vbar[i],
                }
            };
            residual = residual.max((new - vf.vbar[i]).abs());
            next[i] = new;
        }
        std::mem::swap(&mut vf.vbar, &mut next);
        if residual < tol {
            return EvalRun {
                sweeps: sweep,
                residual,
                converged: true,
            };
        }
    }
    EvalRun {
        sweeps: max_sweeps,
        residual,
        converged: false,
    }
}

/// Public single improvement sweep (builds the transition table for this
/// call; `solve` reuses one table across all sweeps).
pub fn policy_improve(
    value: &mut ValueField,
    field: &IntensityField,
    domain: &Domain,
    config: &SolverConfig,
) {
    let grid = value.grid_shared();
    let controls = value.controls.clone();
    let table = TransitionTable::build(&grid, field, domain, &controls, &value.frozen, config.dt);
    improve_sweep(&table, value);
}

/// Public fixed-policy evaluation to tolerance; returns sweeps used.
pub fn policy_evaluate(
    value: &mut ValueField,
    field: &IntensityField,
    domain: &Domain,
    config: &SolverConfig,
) -> Result<usize, SolverError> {
    let grid = value.grid_shared();
    let controls = value.controls.clone();
    let table = TransitionTable::build(&grid, field, domain, &controls, &value.frozen, config.dt);
    let run = evaluate_sweeps(&table, value, config.tol_policy_eval, config.max_eval_sweeps);
    if run.converged {
        Ok(run.sweeps)
    } else {
        Err(SolverError::NonConvergence {
            stage: "policy evaluation",
            limit: config.max_eval_sweeps,
            residual: run.residual,
        })
    }
}

/// Solve the fixed-point problem by policy iteration.
///
/// `goal` must coincide with the grid's goal vertex. Iterates improvement
/// and evaluation until the policy repeats or the value change across an
/// outer iteration falls below `tol_outer`.
pub fn solve(
    domain: &Domain,
    field: &IntensityField,
    goal: Vec2,
    grid: Arc<SpatialGrid>,
    config: &SolverConfig,
) -> Result<ValueField, SolverError> {
    config.validate()?;
    let gv = grid.goal();
    if gv.x != goal.x || gv.y != goal.y {
        return Err(SolverError::GoalMismatch {
            x: goal.x,
            y: goal.y,
        });
    }
    let mut vf = ValueField::new(Arc::clone(&grid), config);
    let table = TransitionTable::build(&grid, field, domain, &vf.controls, &vf.frozen, config.dt);

    let mut prev_vbar = vf.vbar.clone();
    let mut prev_policy = vf.policy.clone();
    let mut residual = f64::INFINITY;
    for outer in 1..=config.max_outer_iters {
        improve_sweep(&table, &mut vf);
        let eval = evaluate_sweeps(&table, &mut vf, config.tol_policy_eval, config.max_eval_sweeps);
        vf.outer_iters = outer;
        residual = sup_diff(&vf.vbar, &prev_vbar);
        // Accept convergence only on a fully evaluated policy: an
        // exhausted evaluation means the frozen policy still contains
        // slow cycles, and the next improvement sweep reroutes them.
        if eval.converged && (vf.policy == prev_policy || residual < config.tol_outer) {
            return Ok(vf);
        }
        prev_vbar.copy_from_slice(&vf.vbar);
        prev_policy.clone_from(&vf.policy);
    }
    Err(SolverError::NonConvergence {
        stage: "outer policy iteration",
        limit: config.max_outer_iters,
        residual,
    })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
