//! Sensor models and field intensity.
//!
//! A sensor at s observes a point p at distance d = ‖p − s‖ with an
//! intensity S(s, p) that depends on the model:
//!
//! - **Boolean disk**: 1 inside radius r, 0 outside, with an optional
//!   smoothstep band of half-width δ around the rim so the intensity stays
//!   continuous.
//! - **Attenuated disk**: λ / d^μ, power-law decay with range.
//! - **Exponential detection probability**: e^{−α d^β}.
//! - **Noisy threshold detection**: the sensor reads λ/d^μ plus Gaussian
//!   noise of deviation σ and reports a detection when the reading exceeds
//!   a threshold A; the per-visit detection probability is
//!   q = Q((A − λ/d^μ)/σ) with Q the standard normal tail, and the
//!   intensity is the hazard −ln(1 − q), so that exposure accumulated
//!   along a path equals −ln(probability of traversing undetected).
//!
//! Unbounded models are capped at `s_max` so the intensity stays finite at
//! d = 0. The field intensity I(p) aggregates all sensors by sum or max,
//! and the solver consumes the rescaled form Ī = max(I/ω, ε) which is
//! bounded away from zero; a strictly positive running cost is what keeps
//! the optimal-control problem well posed (paths cannot linger for free).

use thiserror::Error;

use crate::vec2::Vec2;

/// Cap applied to unbounded intensities near d = 0.
pub const DEFAULT_S_MAX: f64 = 1e6;
/// Intensity rescale divisor ω.
pub const DEFAULT_OMEGA: f64 = 100.0;
/// Positive floor for the rescaled intensity.
pub const DEFAULT_EPS_FLOOR: f64 = 1e-9;
/// Smoothstep half-width for a Boolean disk, as a fraction of its radius.
pub const BOOLEAN_BAND_FRACTION: f64 = 0.05;

/// Parameter or construction error for sensing types.
#[derive(Debug, Error)]
pub enum SensingError {
    #[error("sensing parameter {name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("intensity field has no sensor nodes; use IntensityField::floor_only for a nodeless field")]
    EmptyField,
    #[error("intensity scale omega must be finite and >= 1, got {0}")]
    InvalidOmega(f64),
    #[error("intensity floor eps_floor must be finite and > 0, got {0}")]
    InvalidFloor(f64),
}

/// Per-sensor intensity model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SensingModel {
    /// Full intensity inside `radius`, zero outside, blended by a cubic
    /// smoothstep over [radius − delta, radius + delta]. `delta = 0`
    /// degenerates to a sharp step (1 for d ≤ radius).
    BooleanDisk { radius: f64, delta: f64 },
    /// λ / d^μ, capped at `s_max`.
    AttenuatedDisk { lambda: f64, mu: f64, s_max: f64 },
    /// e^{−α d^β}.
    ProbabilityExp { alpha: f64, beta: f64 },
    /// −ln(1 − Q((a_threshold − λ/d^μ)/σ)), capped at `s_max`.
    NoisyProbability {
        lambda: f64,
        mu: f64,
        sigma: f64,
        a_threshold: f64,
        s_max: f64,
    },
}

impl SensingModel {
    /// Boolean disk with the default smoothstep band δ = 0.05 r.
    pub fn boolean_disk(radius: f64) -> Self {
        SensingModel::BooleanDisk {
            radius,
            delta: BOOLEAN_BAND_FRACTION * radius,
        }
    }

    /// Attenuated disk with the default cap.
    pub fn attenuated_disk(lambda: f64, mu: f64) -> Self {
        SensingModel::AttenuatedDisk {
            lambda,
            mu,
            s_max: DEFAULT_S_MAX,
        }
    }

    pub fn probability_exp(alpha: f64, beta: f64) -> Self {
        SensingModel::ProbabilityExp { alpha, beta }
    }

    /// Noisy threshold detector with the default cap.
    pub fn noisy_probability(lambda: f64, mu: f64, sigma: f64, a_threshold: f64) -> Self {
        SensingModel::NoisyProbability {
            lambda,
            mu,
            sigma,
            a_threshold,
            s_max: DEFAULT_S_MAX,
        }
    }

    /// Check parameter ranges.
    pub fn validate(&self) -> Result<(), SensingError> {
        fn check(
            name: &'static str,
            value: f64,
            requirement: &'static str,
            ok: bool,
        ) -> Result<(), SensingError> {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(SensingError::InvalidParameter {
                    name,
                    requirement,
                    value,
                })
            }
        }
        match *self {
            SensingModel::BooleanDisk { radius, delta } => {
                check("radius", radius, "> 0", radius > 0.0)?;
                check("delta", delta, "in [0, radius]", (0.0..=radius).contains(&delta))
            }
            SensingModel::AttenuatedDisk { lambda, mu, s_max } => {
                check("lambda", lambda, "> 0", lambda > 0.0)?;
                check("mu", mu, "> 0", mu > 0.0)?;
                check("s_max", s_max, "> 0", s_max > 0.0)
            }
            SensingModel::ProbabilityExp { alpha, beta } => {
                check("alpha", alpha, "> 0", alpha > 0.0)?;
                check("beta", beta, "> 0", beta > 0.0)
            }
            SensingModel::NoisyProbability {
                lambda,
                mu,
                sigma,
                a_threshold,
                s_max,
            } => {
                check("lambda", lambda, "> 0", lambda > 0.0)?;
                check("mu", mu, "> 0", mu > 0.0)?;
                check("sigma", sigma, "> 0", sigma > 0.0)?;
                check("a_threshold", a_threshold, "finite", a_threshold.is_finite())?;
                check("s_max", s_max, "> 0", s_max > 0.0)
            }
        }
    }

    /// Intensity with which a sensor at `sensor` observes the point `p`.
    ///
    /// Always finite and non-negative; unbounded models are capped at
    /// their `s_max`, including at d = 0.
    pub fn sense(&self, sensor: Vec2, p: Vec2) -> f64 {
        let d = sensor.dist(p);
        match *self {
            SensingModel::BooleanDisk { radius, delta } => {
                if delta == 0.0 {
                    return if d <= radius { 1.0 } else { 0.0 };
                }
                if d <= radius - delta {
                    1.0
                } else if d >= radius + delta {
                    0.0
                } else {
                    // Cubic smoothstep from 1 down to 0 across the band.
                    let t = (d - (radius - delta)) / (2.0 * delta);
                    1.0 - (3.0 * t * t - 2.0 * t * t * t)
                }
            }
            SensingModel::AttenuatedDisk { lambda, mu, s_max } => {
                // d = 0 gives +inf, which min() resolves to the cap.
                (lambda / d.powf(mu)).min(s_max)
            }
            SensingModel::ProbabilityExp { alpha, beta } => (-alpha * d.powf(beta)).exp(),
            SensingModel::NoisyProbability {
                lambda,
                mu,
                sigma,
                a_threshold,
                s_max,
            } => {
                let reading = lambda / d.powf(mu); // +inf at d = 0
                let q = q_function((a_threshold - reading) / sigma);
                // −ln(1 − q) via ln_1p: q can be within 1e-16 of 0 or 1,
                // where forming 1 − q directly would lose all precision.
                let hazard = -(-q).ln_1p();
                hazard.min(s_max)
            }
        }
    }
}

/// Standard normal tail probability Q(x) = P(Z > x) for Z ~ N(0, 1).
///
/// Computed as erfc(x/√2)/2, accurate to a few ulps over the full range;
/// symmetric under Q(x) + Q(−x) = 1 to within 1e-12.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// A placed sensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorNode {
    pub position: Vec2,
    pub model: SensingModel,
}

impl SensorNode {
    pub fn new(position: Vec2, model: SensingModel) -> Self {
        SensorNode { position, model }
    }
}

/// How per-sensor intensities aggregate into the field intensity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntensityMode {
    /// I(p) = Σ_i S_i(p): total output of the whole field.
    AllSensor,
    /// I(p) = max_i S_i(p): output of the closest-effective sensor.
    MaxSensor,
}

/// A sensor field together with the rescaling the solver consumes.
///
/// `intensity` is the raw aggregate I(p); `scaled_intensity` is
/// Ī(p) = max(I(p)/ω, ε) with ω ≥ 1 and ε > 0, so the running cost is
/// bounded and strictly positive everywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityField {
    nodes: Vec<SensorNode>,
    mode: IntensityMode,
    omega: f64,
    eps_floor: f64,
}

impl IntensityField {
    /// Field over at least one sensor node.
    pub fn new(
        nodes: Vec<SensorNode>,
        mode: IntensityMode,
        omega: f64,
        eps_floor: f64,
    ) -> Result<Self, SensingError> {
        if nodes.is_empty() {
            return Err(SensingError::EmptyField);
        }
        Self::build(nodes, mode, omega, eps_floor)
    }

    /// Degenerate nodeless field whose scaled intensity is ε everywhere.
    ///
    /// Useful as a control case: with a constant running cost the minimal
    /// exposure path is the shortest obstacle-avoiding path.
    pub fn floor_only(omega: f64, eps_floor: f64) -> Result<Self, SensingError> {
        Self::build(Vec::new(), IntensityMode::AllSensor, omega, eps_floor)
    }

    fn build(
        nodes: Vec<SensorNode>,
        mode: IntensityMode,
        omega: f64,
        eps_floor: f64,
    ) -> Result<Self, SensingError> {
        if !(omega.is_finite() && omega >= 1.0) {
            return Err(SensingError::InvalidOmega(omega));
        }
        if !(eps_floor.is_finite() && eps_floor > 0.0) {
            return Err(SensingError::InvalidFloor(eps_floor));
        }
        for node in &nodes {
            if !node.position.is_finite() {
                return Err(SensingError::InvalidParameter {
                    name: "position",
                    requirement: "finite",
                    value: f64::NAN,
                });
            }
            node.model.validate()?;
        }
        Ok(IntensityField {
            nodes,
            mode,
            omega,
            eps_floor,
        })
    }

    pub fn nodes(&self) -> &[SensorNode] {
        &self.nodes
    }

    pub fn mode(&self) -> IntensityMode {
        self.mode
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn eps_floor(&self) -> f64 {
        self.eps_floor
    }

    /// Raw aggregate intensity I(p).
    pub fn intensity(&self, p: Vec2) -> f64 {
        match self.mode {
            IntensityMode::AllSensor => self
                .nodes
                .iter()
                .map(|n| n.model.sense(n.position, p))
                .sum(),
            IntensityMode::MaxSensor => self
                .nodes
                .iter()
                .map(|n| n.model.sense(n.position, p))
                .fold(0.0, f64::max),
        }
    }

    /// Rescaled intensity Ī(p) = max(I(p)/ω, ε).
    pub fn scaled_intensity(&self, p: Vec2) -> f64 {
        (self.intensity(p) / self.omega).max(self.eps_floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 40-digit arbitrary-precision
    // arithmetic, rounded to nearest f64.
    const Q_AT_1: f64 = 0.158_655_253_931_457_05;
    const Q_AT_5: f64 = 2.866_515_718_791_939_1e-7;
    const Q_AT_MINUS_1: f64 = 0.841_344_746_068_542_9;
    const HAZARD_Q5: f64 = 2.866_516_129_637_635_9e-7; // −ln(1 − Q(5))
    const LN_2: f64 = std::f64::consts::LN_2;

    #[test]
    fn q_function_matches_reference_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(1.0) - Q_AT_1).abs() < 1e-13);
        assert!((q_function(-1.0) - Q_AT_MINUS_1).abs() < 1e-13);
        assert!((q_function(5.0) - Q_AT_5).abs() < 1e-13 * Q_AT_5.max(1e-30) / Q_AT_5);
        assert!((q_function(5.0) - Q_AT_5).abs() / Q_AT_5 < 1e-12);
        // Deep tail underflows to 0 well within absolute 1e-15.
        assert!(q_function(40.0) >= 0.0);
        assert!(q_function(40.0) < 1e-15);
    }

    /// Adaptive Simpson integration of the standard normal density, as an
    /// oracle independent of erfc.
    fn normal_tail_quadrature(x: f64) -> f64 {
        fn phi(t: f64) -> f64 {
            (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
        }
        fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
            (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        }
        fn adapt(a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = phi(lm);
            let frm = phi(rm);
            let left = simpson(a, m, fa, flm, fm);
            let right = simpson(m, b, fm, frm, fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                adapt(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + adapt(m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        // Integrate x..40; the remaining tail is below 1e-300.
        let (a, b) = (x, 40.0);
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (phi(a), phi(m), phi(b));
        let whole = simpson(a, b, fa, fm, fb);
        adapt(a, b, fa, fm, fb, whole, 1e-14, 40)
    }

    #[test]
    fn q_function_agrees_with_quadrature() {
        for &x in &[-2.0, -1.0, -0.5, 0.0, 0.3, 1.0, 2.0, 3.0] {
            let oracle = normal_tail_quadrature(x);
            assert!(
                (q_function(x) - oracle).abs() < 1e-12,
                "Q({x}) = {} vs quadrature {}",
                q_function(x),
                oracle
            );
        }
    }

    #[test]
    fn boolean_disk_plateau_band_and_outside() {
        let m = SensingModel::boolean_disk(2.0); // delta = 0.1
        let s = Vec2::new(0.0, 0.0);
        assert_eq!(m.sense(s, Vec2::new(1.0, 0.0)), 1.0);
        assert_eq!(m.sense(s, Vec2::new(1.9, 0.0)), 1.0); // band start
        assert_eq!(m.sense(s, Vec2::new(3.0, 0.0)), 0.0);
        assert_eq!(m.sense(s, Vec2::new(2.1, 0.0)), 0.0); // band end
        // Midpoint of the band is exactly 1/2.
        let mid = m.sense(s, Vec2::new(2.0, 0.0));
        assert!((mid - 0.5).abs() < 1e-15, "band midpoint {mid}");
    }

    #[test]
    fn boolean_disk_sharp_step_when_delta_zero() {
        let m = SensingModel::BooleanDisk {
            radius: 1.0,
            delta: 0.0,
        };
        let s = Vec2::new(0.0, 0.0);
        assert_eq!(m.sense(s, Vec2::new(1.0, 0.0)), 1.0); // on the rim
        assert_eq!(m.sense(s, Vec2::new(1.0 + 1e-12, 0.0)), 0.0);
    }

    #[test]
    fn attenuated_disk_power_law_and_cap() {
        let m = SensingModel::attenuated_disk(4.0, 2.0);
        let s = Vec2::new(0.0, 0.0);
        // λ/d^μ = 4/4 = 1 at d = 2.
        assert_eq!(m.sense(s, Vec2::new(2.0, 0.0)), 1.0);
        assert_eq!(m.sense(s, Vec2::new(0.0, 1.0)), 4.0);
        // At the sensor itself the cap applies.
        assert_eq!(m.sense(s, s), DEFAULT_S_MAX);
    }

    #[test]
    fn probability_exp_decay() {
        let m = SensingModel::probability_exp(1.0, 2.0);
        let s = Vec2::new(0.0, 0.0);
        assert_eq!(m.sense(s, s), 1.0);
        let v = m.sense(s, Vec2::new(1.0, 0.0));
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn noisy_probability_reference_points() {
        // λ = 100, μ = 1, σ = 1, A = 6.
        let m = SensingModel::noisy_probability(100.0, 1.0, 1.0, 6.0);
        let s = Vec2::new(0.0, 0.0);

        // At d = 100/6 the reading mean equals the threshold, q = 1/2,
        // so the hazard is ln 2.
        let at_balance = m.sense(s, Vec2::new(100.0 / 6.0, 0.0));
        assert!((at_balance - LN_2).abs() < 1e-12, "got {at_balance}");

        // At d = 100 the reading mean is 1, q = Q(5); the hazard must be
        // the precision-correct −ln(1 − Q(5)), not Q(5) itself: the two
        // differ in the 8th digit.
        let far = m.sense(s, Vec2::new(100.0, 0.0));
        assert!((far - HAZARD_Q5).abs() / HAZARD_Q5 < 1e-9, "got {far}");
        assert!(far > Q_AT_5);

        // At the sensor the reading diverges, q → 1, hazard → cap.
        assert_eq!(m.sense(s, s), DEFAULT_S_MAX);
    }

    #[test]
    fn model_validation_rejects_bad_parameters() {
        assert!(SensingModel::boolean_disk(0.0).validate().is_err());
        assert!(SensingModel::BooleanDisk {
            radius: 1.0,
            delta: 2.0
        }
        .validate()
        .is_err());
        assert!(SensingModel::attenuated_disk(-1.0, 2.0).validate().is_err());
        assert!(SensingModel::attenuated_disk(1.0, f64::NAN).validate().is_err());
        assert!(SensingModel::probability_exp(1.0, 0.0).validate().is_err());
        assert!(SensingModel::noisy_probability(1.0, 1.0, 0.0, 6.0)
            .validate()
            .is_err());
        assert!(SensingModel::boolean_disk(1.0).validate().is_ok());
    }

    fn two_node_field(mode: IntensityMode) -> IntensityField {
        let nodes = vec![
            SensorNode::new(Vec2::new(0.0, 0.0), SensingModel::attenuated_disk(4.0, 2.0)),
            SensorNode::new(Vec2::new(4.0, 0.0), SensingModel::attenuated_disk(4.0, 2.0)),
        ];
        IntensityField::new(nodes, mode, DEFAULT_OMEGA, DEFAULT_EPS_FLOOR).unwrap()
    }

    #[test]
    fn intensity_sum_and_max_aggregation() {
        let p = Vec2::new(2.0, 0.0); // distance 2 from both, S = 1 each
        let sum = two_node_field(IntensityMode::AllSensor).intensity(p);
        let max = two_node_field(IntensityMode::MaxSensor).intensity(p);
        assert!((sum - 2.0).abs() < 1e-15);
        assert!((max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_intensity_applies_omega_and_floor() {
        let f = two_node_field(IntensityMode::AllSensor);
        let near = Vec2::new(2.0, 0.0);
        assert!((f.scaled_intensity(near) - 2.0 / 100.0).abs() < 1e-15);
        // Far away the raw intensity underflows the floor.
        let far = Vec2::new(1e6, 0.0);
        assert_eq!(f.scaled_intensity(far), DEFAULT_EPS_FLOOR);
    }

    #[test]
    fn floor_only_field_is_constant() {
        let f = IntensityField::floor_only(100.0, 0.01).unwrap();
        assert_eq!(f.intensity(Vec2::new(3.0, 7.0)), 0.0);
        assert_eq!(f.scaled_intensity(Vec2::new(3.0, 7.0)), 0.01);
        assert!(IntensityField::new(Vec::new(), IntensityMode::AllSensor, 100.0, 0.01).is_err());
    }

    #[test]
    fn field_validation_rejects_bad_scale() {
        let nodes = vec![SensorNode::new(
            Vec2::new(0.0, 0.0),
            SensingModel::boolean_disk(1.0),
        )];
        assert!(IntensityField::new(nodes.clone(), IntensityMode::AllSensor, 0.5, 1e-9).is_err());
        assert!(IntensityField::new(nodes, IntensityMode::AllSensor, 100.0, 0.0).is_err());
    }
}
