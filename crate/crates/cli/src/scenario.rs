//! Scenario documents: the on-disk description of a planning problem.
//!
//! A scenario is a TOML document describing the domain rectangle, obstacle
//! polygons, sensor nodes, intensity aggregation, sources and goal, plus
//! the numerical settings for gridding, solving, and path evaluation.
//! Every section except `domain`, `sources`, and `goal` is optional and
//! falls back to documented defaults. Unknown fields are rejected so that
//! typos fail loudly instead of silently running with defaults.

use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use mep_core::geometry::{GridConfig, Polygon};
use mep_core::sensing::{
    IntensityField, IntensityMode, SensingModel, SensorNode, BOOLEAN_BAND_FRACTION,
    DEFAULT_EPS_FLOOR, DEFAULT_OMEGA, DEFAULT_S_MAX,
};
use mep_core::solver::SolverConfig;
use mep_core::{Domain, Vec2};

/// Default evaluation step for exposure quadrature, as a fraction of the
/// domain diameter.
pub const DEFAULT_H_EVAL_FRACTION: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// The document is not well-formed TOML or has unknown/mistyped fields.
    /// The message carries the location reported by the parser.
    #[error("parse error: {0}")]
    Parse(String),
    /// The document parsed but violates a scenario invariant.
    #[error("invalid scenario: {0}")]
    Validation(String),
}

/// A fully validated planning problem, ready to hand to the solver.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub domain: Domain,
    pub field: IntensityField,
    pub sources: Vec<Vec2>,
    pub goal: Vec2,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    /// Sample spacing for exposure quadrature along extracted paths.
    pub h_eval: f64,
}

// ---------------------------------------------------------------------------
// Document schema
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    domain: DomainDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    obstacles: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    nodes: Vec<NodeDoc>,
    #[serde(default)]
    intensity: IntensityDoc,
    sources: Vec<[f64; 2]>,
    goal: [f64; 2],
    #[serde(default)]
    grid: GridDoc,
    #[serde(default)]
    solver: SolverDoc,
    #[serde(default)]
    eval: EvalDoc,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DomainDoc {
    min: [f64; 2],
    max: [f64; 2],
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum ModeDoc {
    AllSensor,
    MaxSensor,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct IntensityDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<ModeDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_floor: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum ModelKind {
    BooleanDisk,
    AttenuatedDisk,
    ProbabilityExp,
    NoisyProbability,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    x: f64,
    y: f64,
    model: ModelKind,
    #[serde(default)]
    params: ParamsDoc,
}

/// Union of every model parameter. Each model requires its own subset and
/// rejects the rest, so a stray `alpha` on an attenuated-disk node is an
/// error rather than silently ignored.
#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    points_per_node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary_spacing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SolverDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_directions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol_policy_eval: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol_outer: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_eval_sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_outer_iters: Option<usize>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EvalDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    h_eval: Option<f64>,
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Loads and validates a scenario from a TOML file.
pub fn load_scenario(path: &FsPath) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

/// Parses and validates a scenario from TOML text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    resolve(doc)
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation(msg.into())
}

fn resolve(doc: ScenarioDoc) -> Result<Scenario, ScenarioError> {
    let obstacles = doc
        .obstacles
        .into_iter()
        .enumerate()
        .map(|(i, ring)| {
            let vertices = ring.into_iter().map(Vec2::from).collect();
            Polygon::new(vertices).map_err(|e| invalid(format!("obstacle {i}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let domain = Domain::new(Vec2::from(doc.domain.min), Vec2::from(doc.domain.max), obstacles)
        .map_err(|e| invalid(e.to_string()))?;

    let mode = match doc.intensity.mode.unwrap_or(ModeDoc::AllSensor) {
        ModeDoc::AllSensor => IntensityMode::AllSensor,
        ModeDoc::MaxSensor => IntensityMode::MaxSensor,
    };
    let omega = doc.intensity.omega.unwrap_or(DEFAULT_OMEGA);
    let eps_floor = doc.intensity.eps_floor.unwrap_or(DEFAULT_EPS_FLOOR);

    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (i, node) in doc.nodes.iter().enumerate() {
        let position = Vec2::new(node.x, node.y);
        if !domain.contains(position) {
            return Err(invalid(format!("node {i} lies outside the domain")));
        }
        let model = resolve_model(node.model, &node.params)
            .map_err(|msg| invalid(format!("node {i}: {msg}")))?;
        model
            .validate()
            .map_err(|e| invalid(format!("node {i}: {e}")))?;
        nodes.push(SensorNode::new(position, model));
    }
    let field = if nodes.is_empty() {
        IntensityField::floor_only(omega, eps_floor)
    } else {
        IntensityField::new(nodes, mode, omega, eps_floor)
    }
    .map_err(|e| invalid(e.to_string()))?;

    if doc.sources.is_empty() {
        return Err(invalid("at least one source is required"));
    }
    let sources: Vec<Vec2> = doc.sources.into_iter().map(Vec2::from).collect();
    for (i, &s) in sources.iter().enumerate() {
        if !domain.contains(s) {
            return Err(invalid(format!("source {i} lies outside the domain")));
        }
        if domain.point_in_obstacle(s) {
            return Err(invalid(format!("source {i} lies inside an obstacle")));
        }
    }
    let goal = Vec2::from(doc.goal);
    if !domain.contains(goal) {
        return Err(invalid("goal lies outside the domain"));
    }
    if domain.point_in_obstacle(goal) {
        return Err(invalid("goal lies inside an obstacle"));
    }

    let mut grid = GridConfig::for_domain(&domain);
    if let Some(v) = doc.grid.points_per_node {
        grid.points_per_node = v;
    }
    if let Some(v) = doc.grid.boundary_spacing {
        grid.boundary_spacing = v;
    }
    if let Some(v) = doc.grid.base_rate {
        grid.base_rate = v;
    }
    if let Some(v) = doc.grid.seed {
        grid.seed = v;
    }
    grid.validate().map_err(|e| invalid(e.to_string()))?;

    let mut solver = SolverConfig::default();
    if let Some(v) = doc.solver.dt {
        solver.dt = v;
    }
    if let Some(v) = doc.solver.speed {
        solver.speed = v;
    }
    if let Some(v) = doc.solver.n_directions {
        solver.n_directions = v;
    }
    if let Some(v) = doc.solver.tol_policy_eval {
        solver.tol_policy_eval = v;
    }
    if let Some(v) = doc.solver.tol_outer {
        solver.tol_outer = v;
    }
    if let Some(v) = doc.solver.max_eval_sweeps {
        solver.max_eval_sweeps = v;
    }
    if let Some(v) = doc.solver.max_outer_iters {
        solver.max_outer_iters = v;
    }
    solver.validate().map_err(|e| invalid(e.to_string()))?;

    let h_eval = doc
        .eval
        .h_eval
        .unwrap_or(DEFAULT_H_EVAL_FRACTION * domain.diameter());
    if !h_eval.is_finite() || h_eval <= 0.0 {
        return Err(invalid(format!("eval.h_eval must be positive, got {h_eval}")));
    }

    Ok(Scenario {
        domain,
        field,
        sources,
        goal,
        grid,
        solver,
        h_eval,
    })
}

/// Maps a parsed node entry onto a sensing model, filling documented
/// defaults and rejecting parameters the model does not take.
fn resolve_model(kind: ModelKind, p: &ParamsDoc) -> Result<SensingModel, String> {
    fn need(name: &str, v: Option<f64>) -> Result<f64, String> {
        v.ok_or_else(|| format!("missing required parameter `{name}`"))
    }
    fn forbid(kind: &str, name: &str, v: Option<f64>) -> Result<(), String> {
        if v.is_some() {
            Err(format!("parameter `{name}` does not apply to {kind}"))
        } else {
            Ok(())
        }
    }
    match kind {
        ModelKind::BooleanDisk => {
            for (name, v) in [
                ("lambda", p.lambda),
                ("mu", p.mu),
                ("s_max", p.s_max),
                ("alpha", p.alpha),
                ("beta", p.beta),
                ("sigma", p.sigma),
                ("a_threshold", p.a_threshold),
            ] {
                forbid("boolean_disk", name, v)?;
            }
            let radius = need("radius", p.radius)?;
            let delta = p.delta.unwrap_or(BOOLEAN_BAND_FRACTION * radius);
            Ok(SensingModel::BooleanDisk { radius, delta })
        }
        ModelKind::AttenuatedDisk => {
            for (name, v) in [
                ("radius", p.radius),
                ("delta", p.delta),
                ("alpha", p.alpha),
                ("beta", p.beta),
                ("sigma", p.sigma),
                ("a_threshold", p.a_threshold),
            ] {
                forbid("attenuated_disk", name, v)?;
            }
            Ok(SensingModel::AttenuatedDisk {
                lambda: need("lambda", p.lambda)?,
                mu: need("mu", p.mu)?,
                s_max: p.s_max.unwrap_or(DEFAULT_S_MAX),
            })
        }
        ModelKind::ProbabilityExp => {
            for (name, v) in [
                ("radius", p.radius),
                ("delta", p.delta),
                ("lambda", p.lambda),
                ("mu", p.mu),
                ("s_max", p.s_max),
                ("sigma", p.sigma),
                ("a_threshold", p.a_threshold),
            ] {
                forbid("probability_exp", name, v)?;
            }
            Ok(SensingModel::ProbabilityExp {
                alpha: need("alpha", p.alpha)?,
                beta: need("beta", p.beta)?,
            })
        }
        ModelKind::NoisyProbability => {
            for (name, v) in [
                ("radius", p.radius),
                ("delta", p.delta),
                ("alpha", p.alpha),
                ("beta", p.beta),
            ] {
                forbid("noisy_probability", name, v)?;
            }
            Ok(SensingModel::NoisyProbability {
                lambda: need("lambda", p.lambda)?,
                mu: need("mu", p.mu)?,
                sigma: need("sigma", p.sigma)?,
                a_threshold: need("a_threshold", p.a_threshold)?,
                s_max: p.s_max.unwrap_or(DEFAULT_S_MAX),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Renders a scenario back to TOML. `parse_scenario(serialize_scenario(s))`
/// reproduces `s` exactly: every resolved value is written explicitly, and
/// floats print with round-trip precision.
pub fn serialize_scenario(s: &Scenario) -> String {
    let doc = ScenarioDoc {
        domain: DomainDoc {
            min: s.domain.min().into(),
            max: s.domain.max().into(),
        },
        obstacles: s
            .domain
            .obstacles()
            .iter()
            .map(|poly| poly.vertices().iter().map(|&v| v.into()).collect())
            .collect(),
        nodes: s.field.nodes().iter().map(node_doc).collect(),
        intensity: IntensityDoc {
            mode: Some(match s.field.mode() {
                IntensityMode::AllSensor => ModeDoc::AllSensor,
                IntensityMode::MaxSensor => ModeDoc::MaxSensor,
            }),
            omega: Some(s.field.omega()),
            eps_floor: Some(s.field.eps_floor()),
        },
        sources: s.sources.iter().map(|&v| v.into()).collect(),
        goal: s.goal.into(),
        grid: GridDoc {
            points_per_node: Some(s.grid.points_per_node),
            boundary_spacing: Some(s.grid.boundary_spacing),
            base_rate: Some(s.grid.base_rate),
            seed: Some(s.grid.seed),
        },
        solver: SolverDoc {
            dt: Some(s.solver.dt),
            speed: Some(s.solver.speed),
            n_directions: Some(s.solver.n_directions),
            tol_policy_eval: Some(s.solver.tol_policy_eval),
            tol_outer: Some(s.solver.tol_outer),
            max_eval_sweeps: Some(s.solver.max_eval_sweeps),
            max_outer_iters: Some(s.solver.max_outer_iters),
        },
        eval: EvalDoc {
            h_eval: Some(s.h_eval),
        },
    };
    toml::to_string_pretty(&doc).expect("scenario serialization cannot fail")
}

fn node_doc(node: &SensorNode) -> NodeDoc {
    let mut params = ParamsDoc::default();
    let kind = match node.model {
        SensingModel::BooleanDisk { radius, delta } => {
            params.radius = Some(radius);
            params.delta = Some(delta);
            ModelKind::BooleanDisk
        }
        SensingModel::AttenuatedDisk { lambda, mu, s_max } => {
            params.lambda = Some(lambda);
            params.mu = Some(mu);
            params.s_max = Some(s_max);
            ModelKind::AttenuatedDisk
        }
        SensingModel::ProbabilityExp { alpha, beta } => {
            params.alpha = Some(alpha);
            params.beta = Some(beta);
            ModelKind::ProbabilityExp
        }
        SensingModel::NoisyProbability {
            lambda,
            mu,
            sigma,
            a_threshold,
            s_max,
        } => {
            params.lambda = Some(lambda);
            params.mu = Some(mu);
            params.sigma = Some(sigma);
            params.a_threshold = Some(a_threshold);
            params.s_max = Some(s_max);
            ModelKind::NoisyProbability
        }
    };
    NodeDoc {
        x: node.position.x,
        y: node.position.y,
        model: kind,
        params,
    }
}

// ---------------------------------------------------------------------------
// Coordinate-table import
// ---------------------------------------------------------------------------

/// Reads a plain coordinate table (one `x y` or `x,y` pair per line) and
/// instantiates a sensor at each position using the template model.
///
/// Blank lines and `#` comments are skipped; a leading non-numeric header
/// row is tolerated. Any other malformed row is an error.
pub fn import_nodes(
    path: &FsPath,
    template: &SensingModel,
) -> Result<Vec<SensorNode>, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    import_nodes_from_str(&text, template)
}

/// String-input core of [`import_nodes`].
pub fn import_nodes_from_str(
    text: &str,
    template: &SensingModel,
) -> Result<Vec<SensorNode>, ScenarioError> {
    template
        .validate()
        .map_err(|e| ScenarioError::Validation(format!("template model: {e}")))?;
    let mut nodes = Vec::new();
    let mut saw_data = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parsed: Vec<Option<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        if !saw_data && parsed.iter().all(|p| p.is_none()) {
            continue; // header row
        }
        if fields.len() != 2 {
            return Err(ScenarioError::Parse(format!(
                "line {}: expected 2 columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let coords: Vec<f64> = parsed
            .into_iter()
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| {
                ScenarioError::Parse(format!("line {}: non-numeric coordinate", lineno + 1))
            })?;
        saw_data = true;
        nodes.push(SensorNode::new(
            Vec2::new(coords[0], coords[1]),
            *template,
        ));
    }
    Ok(nodes)
}

/// The detection model used for imported benchmark node tables: a noisy
/// threshold detector with amplitude 100/d, unit noise, and threshold 6.
pub fn benchmark_template() -> SensingModel {
    SensingModel::noisy_probability(100.0, 1.0, 1.0, 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        sources = [[0.0, 5.0]]
        goal = [10.0, 5.0]

        [domain]
        min = [0.0, 0.0]
        max = [10.0, 10.0]

        [[nodes]]
        x = 5.0
        y = 5.0
        model = "attenuated_disk"
        params = { lambda = 4.0, mu = 2.0 }
    "#;

    #[test]
    fn minimal_document_fills_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.field.nodes().len(), 1);
        assert_eq!(s.field.mode(), IntensityMode::AllSensor);
        assert_eq!(s.field.omega(), DEFAULT_OMEGA);
        assert_eq!(s.solver.dt, 0.1);
        assert_eq!(s.grid.points_per_node, 100);
        assert_eq!(s.grid.seed, 0);
        // Boundary spacing and h_eval default relative to the diameter.
        let diag = 200.0f64.sqrt();
        assert!((s.grid.boundary_spacing - 0.02 * diag).abs() < 1e-12);
        assert!((s.h_eval - 1e-3 * diag).abs() < 1e-12);
        assert_eq!(
            s.field.nodes()[0].model,
            SensingModel::AttenuatedDisk {
                lambda: 4.0,
                mu: 2.0,
                s_max: DEFAULT_S_MAX
            }
        );
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let doc = MINIMAL.replace("[domain]", "typo_field = 1\n[domain]");
        let err = parse_scenario(&doc).unwrap_err();
        assert!(matches!(err, ScenarioError::Parse(_)), "{err}");
        assert!(err.to_string().contains("typo_field"), "{err}");
    }

    #[test]
    fn wrong_model_parameter_is_rejected() {
        let doc = MINIMAL.replace("lambda = 4.0, mu = 2.0", "lambda = 4.0, mu = 2.0, alpha = 1.0");
        let err = parse_scenario(&doc).unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
    }

    #[test]
    fn missing_model_parameter_is_rejected() {
        let doc = MINIMAL.replace("lambda = 4.0, mu = 2.0", "lambda = 4.0");
        let err = parse_scenario(&doc).unwrap_err();
        assert!(err.to_string().contains("mu"), "{err}");
    }

    #[test]
    fn goal_inside_obstacle_is_rejected() {
        let doc = MINIMAL.replace("goal = [10.0, 5.0]", "goal = [9.0, 5.0]");
        let doc = format!(
            "obstacles = [[[8.5, 4.5], [9.5, 4.5], [9.5, 5.5], [8.5, 5.5]]]\n{doc}"
        );
        let err = parse_scenario(&doc).unwrap_err();
        assert!(err.to_string().contains("goal"), "{err}");
    }

    #[test]
    fn empty_sources_rejected() {
        let doc = MINIMAL.replace("sources = [[0.0, 5.0]]", "sources = []");
        let err = parse_scenario(&doc).unwrap_err();
        assert!(err.to_string().contains("source"), "{err}");
    }

    #[test]
    fn nodeless_scenario_uses_floor_field() {
        let doc = MINIMAL.replace("[[nodes]]", "[[__removed]]");
        let doc: String = doc
            .lines()
            .take_while(|l| !l.contains("__removed"))
            .collect::<Vec<_>>()
            .join("\n");
        let s = parse_scenario(&doc).unwrap();
        assert!(s.field.nodes().is_empty());
        assert_eq!(s.field.scaled_intensity(Vec2::new(3.0, 3.0)), DEFAULT_EPS_FLOOR);
    }

    #[test]
    fn roundtrip_reproduces_scenario() {
        let original = parse_scenario(MINIMAL).unwrap();
        let text = serialize_scenario(&original);
        let reloaded = parse_scenario(&text).unwrap();
        assert_eq!(original, reloaded);
    }

    #[test]
    fn roundtrip_with_obstacles_and_mixed_models() {
        let doc = r#"
            obstacles = [
                [[4.0, 4.0], [6.0, 4.0], [6.0, 8.0], [4.0, 8.0]],
                [[10.0, 1.0], [12.0, 2.0], [11.0, 3.5]],
            ]

            sources = [[0.0, 6.0], [1.0, 1.0]]
            goal = [19.0, 6.0]

            [domain]
            min = [0.0, 0.0]
            max = [20.0, 12.0]

            [intensity]
            mode = "max_sensor"
            omega = 50.0

            [[nodes]]
            x = 8.0
            y = 6.0
            model = "boolean_disk"
            params = { radius = 2.0 }

            [[nodes]]
            x = 14.0
            y = 6.0
            model = "probability_exp"
            params = { alpha = 0.5, beta = 2.0 }

            [[nodes]]
            x = 16.0
            y = 3.0
            model = "noisy_probability"
            params = { lambda = 100.0, mu = 1.0, sigma = 1.0, a_threshold = 6.0 }

            [solver]
            dt = 0.05
            n_directions = 24

            [eval]
            h_eval = 0.01
        "#;
        let original = parse_scenario(doc).unwrap();
        assert_eq!(original.domain.obstacles().len(), 2);
        assert_eq!(original.field.mode(), IntensityMode::MaxSensor);
        // The boolean disk picked up its default band width.
        assert_eq!(
            original.field.nodes()[0].model,
            SensingModel::BooleanDisk {
                radius: 2.0,
                delta: 0.1
            }
        );
        let reloaded = parse_scenario(&serialize_scenario(&original)).unwrap();
        assert_eq!(original, reloaded);
    }

    #[test]
    fn import_accepts_whitespace_and_commas() {
        let table = "x,y\n1.0, 2.0\n3.5 4.5\n\n# comment\n5 6\n";
        let nodes = import_nodes_from_str(&table, &benchmark_template()).unwrap();
        assert_eq!(nodes.len(), 3);
        assert_eq!(nodes[1].position, Vec2::new(3.5, 4.5));
        assert!(matches!(
            nodes[0].model,
            SensingModel::NoisyProbability { a_threshold, .. } if a_threshold == 6.0
        ));
    }

    #[test]
    fn import_rejects_three_columns() {
        let err = import_nodes_from_str("1 2 3\n", &benchmark_template()).unwrap_err();
        assert!(matches!(err, ScenarioError::Parse(_)), "{err}");
        assert!(err.to_string().contains("3"), "{err}");
    }

    #[test]
    fn import_rejects_non_numeric_after_data() {
        let err = import_nodes_from_str("1 2\nx y\n", &benchmark_template()).unwrap_err();
        assert!(matches!(err, ScenarioError::Parse(_)), "{err}");
    }
}
