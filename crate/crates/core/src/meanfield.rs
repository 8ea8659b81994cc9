//! Closed mean-field equations of motion for the pattern overlaps.
//!
//! For a single pattern the overlaps obey
//!
//! ```text
//! dM_z/dt = -M_z + A(M_z) + 2Ω M_y
//! dM_y/dt = -2Ω M_z - M_y B(M_z) / 2
//! dM_x/dt = -M_x B(M_z) / 2
//! ```
//!
//! with `A = <tanh(β h_i M_z)>` and
//! `B = 1 + β²/2 <(1 + M_z tanh(β h_i M_z))(1 - tanh²(β h_i M_z))>`,
//! the averages running over the local energies `h_i` of the pattern.
//! Infinite `β` is handled through the sign and zero limits of `tanh` and
//! `sech²` rather than through a large finite value.

use nalgebra::Matrix2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid overlap state: {0}")]
    InvalidState(String),
    #[error("invalid integration setup: {0}")]
    InvalidStep(String),
    #[error("state became non-finite at t = {time}")]
    Divergence { time: f64 },
    #[error("Newton iteration did not reach a fixed point (last residual {residual:e})")]
    NoFixedPoint { residual: f64 },
}

/// Physical point `(β, Ω, m)`. `β = ∞` encodes zero temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta: f64,
    pub omega: f64,
    pub m: f64,
}

impl ModelParams {
    pub fn new(beta: f64, omega: f64, m: f64) -> Result<Self, DynamicsError> {
        if beta.is_nan() || beta < 0.0 {
            return Err(DynamicsError::InvalidParams(format!("beta must be >= 0, got {beta}")));
        }
        if !omega.is_finite() || omega < 0.0 {
            return Err(DynamicsError::InvalidParams(format!("omega must be finite and >= 0, got {omega}")));
        }
        if !(m > 0.0 && m < 1.0) {
            return Err(DynamicsError::InvalidParams(format!("m must lie in (0, 1), got {m}")));
        }
        Ok(Self { beta, omega, m })
    }

    /// `T = 0` maps to `β = ∞`.
    pub fn from_temperature(temperature: f64, omega: f64, m: f64) -> Result<Self, DynamicsError> {
        if temperature.is_nan() || temperature < 0.0 {
            return Err(DynamicsError::InvalidParams(format!(
                "temperature must be >= 0, got {temperature}"
            )));
        }
        Self::new(1.0 / temperature, omega, m)
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapState {
    pub m_z: f64,
    pub m_y: f64,
    pub m_x: f64,
}

impl OverlapState {
    pub fn new(m_z: f64, m_y: f64, m_x: f64) -> Result<Self, DynamicsError> {
        let s = Self { m_z, m_y, m_x };
        if s.box_violation() > 0.0 || ![m_z, m_y, m_x].iter().all(|v| v.is_finite()) {
            return Err(DynamicsError::InvalidState(format!(
                "components must lie in [-1, 1], got ({m_z}, {m_y}, {m_x})"
            )));
        }
        Ok(s)
    }

    /// Largest excursion of any component outside `[-1, 1]` (0 when inside).
    pub fn box_violation(&self) -> f64 {
        [self.m_z, self.m_y, self.m_x]
            .iter()
            .map(|v| (v.abs() - 1.0).max(0.0))
            .fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        self.m_z.is_finite() && self.m_y.is_finite() && self.m_x.is_finite()
    }

    fn axpy(&self, k: f64, d: &OverlapRates) -> Self {
        Self {
            m_z: self.m_z + k * d.m_z,
            m_y: self.m_y + k * d.m_y,
            m_x: self.m_x + k * d.m_x,
        }
    }
}

/// Time derivatives of the three overlaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapRates {
    pub m_z: f64,
    pub m_y: f64,
    pub m_x: f64,
}

/// Local energies `h_i` of one pattern.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldProfile {
    Homogeneous(f64),
    Sites(Vec<f64>),
}

impl FieldProfile {
    pub fn homogeneous(h: f64) -> Self {
        FieldProfile::Homogeneous(h)
    }

    pub fn sites(values: Vec<f64>) -> Result<Self, DynamicsError> {
        if values.is_empty() {
            return Err(DynamicsError::InvalidParams("field profile must not be empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(DynamicsError::InvalidParams(format!("non-finite local energy {v}")));
        }
        Ok(FieldProfile::Sites(values))
    }

    fn mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        match self {
            FieldProfile::Homogeneous(h) => f(*h),
            FieldProfile::Sites(hs) => hs.iter().map(|&h| f(h)).sum::<f64>() / hs.len() as f64,
        }
    }
}

/// `tanh(β x)` including the `β = ∞` sign limit.
pub(crate) fn tanh_beta(beta: f64, x: f64) -> f64 {
    if beta.is_infinite() {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        }
    } else {
        (beta * x).tanh()
    }
}

/// Per-site terms and their `M_z` derivatives.
struct SiteTerms {
    a: f64,
    b: f64,
    da: f64,
    db: f64,
}

fn site_terms(m_z: f64, h: f64, beta: f64) -> SiteTerms {
    if beta == 0.0 {
        return SiteTerms { a: 0.0, b: 1.0, da: 0.0, db: 0.0 };
    }
    let x = h * m_z;
    if beta.is_infinite() {
        if x == 0.0 {
            // sech² stays 1 while β² diverges.
            return SiteTerms {
                a: 0.0,
                b: f64::INFINITY,
                da: if h == 0.0 { 0.0 } else { f64::INFINITY },
                db: f64::INFINITY,
            };
        }
        return SiteTerms { a: tanh_beta(beta, x), b: 1.0, da: 0.0, db: 0.0 };
    }
    let a = (beta * x).tanh();
    let s = 1.0 - a * a;
    let bh = beta * h;
    SiteTerms {
        a,
        b: 1.0 + 0.5 * beta * beta * (1.0 + m_z * a) * s,
        da: bh * s,
        db: 0.5 * beta * beta * s * (a * (1.0 - 2.0 * bh) + bh * m_z * (1.0 - 3.0 * a * a)),
    }
}

/// `A(M_z) = <tanh(β h_i M_z)>`.
pub fn drift_a(m_z: f64, fields: &FieldProfile, beta: f64) -> f64 {
    fields.mean_of(|h| site_terms(m_z, h, beta).a)
}

/// `B(M_z) = 1 + β²/2 <(1 + M_z a_i)(1 - a_i²)>`.
pub fn drift_b(m_z: f64, fields: &FieldProfile, beta: f64) -> f64 {
    fields.mean_of(|h| site_terms(m_z, h, beta).b)
}

/// `dA/dM_z`.
pub fn drift_a_prime(m_z: f64, fields: &FieldProfile, beta: f64) -> f64 {
    fields.mean_of(|h| site_terms(m_z, h, beta).da)
}

/// `dB/dM_z`.
pub fn drift_b_prime(m_z: f64, fields: &FieldProfile, beta: f64) -> f64 {
    fields.mean_of(|h| site_terms(m_z, h, beta).db)
}

pub fn eom_rhs(state: &OverlapState, params: &ModelParams, fields: &FieldProfile) -> OverlapRates {
    let a = drift_a(state.m_z, fields, params.beta);
    let b = drift_b(state.m_z, fields, params.beta);
    let w = params.omega;
    OverlapRates {
        m_z: -state.m_z + a + 2.0 * w * state.m_y,
        m_y: -2.0 * w * state.m_z - 0.5 * state.m_y * b,
        m_x: -0.5 * state.m_x * b,
    }
}

/// Jacobian of `(dM_z/dt, dM_y/dt)` with respect to `(M_z, M_y)`.
pub fn jacobian(state: &OverlapState, params: &ModelParams, fields: &FieldProfile) -> Matrix2<f64> {
    let beta = params.beta;
    let w = params.omega;
    let da = drift_a_prime(state.m_z, fields, beta);
    let db = drift_b_prime(state.m_z, fields, beta);
    let b = drift_b(state.m_z, fields, beta);
    // Avoid 0·∞ for the decoupled entry when M_y vanishes.
    let lower_left = if state.m_y == 0.0 { -2.0 * w } else { -2.0 * w - 0.5 * db * state.m_y };
    Matrix2::new(da - 1.0, 2.0 * w, lower_left, -0.5 * b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub det: f64,
    pub trace: f64,
    pub discriminant: f64,
    pub stable: bool,
}

/// Linear stability of a stationary point. Ties (`det = 0` or
/// `trace = 0`) count as unstable.
pub fn stability(state: &OverlapState, params: &ModelParams, fields: &FieldProfile) -> Stability {
    let j = jacobian(state, params, fields);
    let det = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
    let trace = j[(0, 0)] + j[(1, 1)];
    let discriminant = trace * trace - 4.0 * det;
    let stable = if discriminant < 0.0 { trace < 0.0 } else { det > 0.0 && trace < 0.0 };
    Stability { det, trace, discriminant, stable }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<(f64, OverlapState)>,
    /// Largest excursion outside `[-1, 1]³` seen along the trajectory.
    pub max_box_violation: f64,
}

impl Trajectory {
    pub fn last(&self) -> &OverlapState {
        &self.points.last().expect("trajectory holds the initial state").1
    }
}

/// Fixed-step RK4 integration. States are never clamped to the physical
/// box; excursions are reported in [`Trajectory::max_box_violation`].
pub fn integrate_dynamics(
    state0: &OverlapState,
    params: &ModelParams,
    fields: &FieldProfile,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory, DynamicsError> {
    if !(dt > 0.0) || !(t_max >= dt) || !t_max.is_finite() {
        return Err(DynamicsError::InvalidStep(format!("need dt > 0 and t_max >= dt, got dt={dt}, t_max={t_max}")));
    }
    let steps = (t_max / dt).round() as usize;
    let mut points = Vec::with_capacity(steps + 1);
    let mut state = *state0;
    let mut worst = state.box_violation();
    points.push((0.0, state));
    let f = |s: &OverlapState| eom_rhs(s, params, fields);
    for k in 1..=steps {
        let k1 = f(&state);
        let k2 = f(&state.axpy(0.5 * dt, &k1));
        let k3 = f(&state.axpy(0.5 * dt, &k2));
        let k4 = f(&state.axpy(dt, &k3));
        state = OverlapState {
            m_z: state.m_z + dt / 6.0 * (k1.m_z + 2.0 * k2.m_z + 2.0 * k3.m_z + k4.m_z),
            m_y: state.m_y + dt / 6.0 * (k1.m_y + 2.0 * k2.m_y + 2.0 * k3.m_y + k4.m_y),
            m_x: state.m_x + dt / 6.0 * (k1.m_x + 2.0 * k2.m_x + 2.0 * k3.m_x + k4.m_x),
        };
        let t = k as f64 * dt;
        if !state.is_finite() {
            return Err(DynamicsError::Divergence { time: t });
        }
        worst = worst.max(state.box_violation());
        points.push((t, state));
    }
    Ok(Trajectory { points, max_box_violation: worst })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub state: OverlapState,
    pub stability: Stability,
    pub iterations: usize,
}

/// Newton iteration on `(dM_z/dt, dM_y/dt) = 0`. `M_x` relaxes to 0 at
/// every fixed point since `B ≥ 1`.
pub fn find_fixed_point(
    params: &ModelParams,
    fields: &FieldProfile,
    guess: &OverlapState,
) -> Result<FixedPoint, DynamicsError> {
    const MAX_ITER: usize = 200;
    const TOL: f64 = 1e-10;
    let mut s = OverlapState { m_x: 0.0, ..*guess };
    let mut residual = f64::INFINITY;
    for it in 0..=MAX_ITER {
        let r = eom_rhs(&s, params, fields);
        residual = r.m_z.abs().max(r.m_y.abs());
        if !residual.is_finite() {
            break;
        }
        if residual < TOL {
            return Ok(FixedPoint { state: s, stability: stability(&s, params, fields), iterations: it });
        }
        let j = jacobian(&s, params, fields);
        let Some(step) = j.lu().solve(&nalgebra::Vector2::new(r.m_z, r.m_y)) else {
            break;
        };
        s.m_z -= step[0];
        s.m_y -= step[1];
    }
    Err(DynamicsError::NoFixedPoint { residual })
}
