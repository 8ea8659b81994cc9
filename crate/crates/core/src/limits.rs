//! Closed-form limits of the capacity and the small-drive expansion.

use thiserror::Error;

use crate::capacity::{
    build_profile, integrate_profile, solve_saddle_with, CapacityError, Landscape, SolverConfig,
};
use crate::meanfield::ModelParams;
use crate::quadrature::{inverse_erf, normal_cdf, normal_pdf, GaussianGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitsError {
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
}

/// `∫₀ᵃ t² φ(t) dt`, by series near the origin where the closed form cancels.
fn truncated_second_moment(a: f64) -> f64 {
    if a < 0.5 {
        let x = -0.5 * a * a;
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..30 {
            sum += term / (2 * k + 3) as f64;
            term *= x / (k + 1) as f64;
        }
        normal_pdf(0.0) * a.powi(3) * sum
    } else {
        normal_cdf(a) - 0.5 - a * normal_pdf(a)
    }
}

/// Zero-temperature, zero-drive capacity `(Φ(a) - ½ - aφ(a))⁻¹` with
/// `a = √2 erf⁻¹(m)`. Tends to 2 as `m → 1` and diverges as `m → 0`.
pub fn classical_zero_t(m: f64) -> Result<f64, LimitsError> {
    if !(m > 0.0 && m < 1.0) {
        return Err(LimitsError::Domain(format!("m must lie in (0, 1), got {m}")));
    }
    let a = std::f64::consts::SQRT_2 * inverse_erf(m).map_err(|e| LimitsError::Domain(e.to_string()))?;
    let d = truncated_second_moment(a);
    Ok(if d > 0.0 { 1.0 / d } else { f64::INFINITY })
}

/// `(β / (1 + 8Ω²))²`, the weak-coupling form of the capacity with
/// `tanh` linearized. Approaches the solver only when `m(1 + 8Ω²) ≪ 1`;
/// otherwise the small-β capacity is `(βm / atanh(m(1 + 8Ω²)))²`.
pub fn high_t_capacity(beta: f64, omega: f64) -> f64 {
    let x = beta / (1.0 + 8.0 * omega * omega);
    x * x
}

/// Drive strength above which no saddle exists at high temperature.
pub fn omega_critical(m: f64) -> Result<f64, LimitsError> {
    if !(m > 0.0 && m <= 1.0) {
        return Err(LimitsError::Domain(format!("m must lie in (0, 1], got {m}")));
    }
    Ok(0.5 * (0.5 * (1.0 / m - 1.0)).sqrt())
}

/// The coefficient `c` in `α_c(Ω) = α_c(0) - c Ω² + O(Ω³)`.
pub fn small_omega_coefficient(m: f64, beta: f64, grid: &GaussianGrid) -> Result<f64, LimitsError> {
    small_omega_coefficient_with(m, beta, grid, &SolverConfig::default())
}

/// Perturbs the classical saddle to second order in `Ω`. The drive enters
/// through `2Ω M_y = -8Ω² m / B̄` in the first saddle equation and through
/// the term `ε b(h)` with `ε = 8 m λ₁ Ω² / B̄²` in the landscape. The
/// resulting shift of `h(t)` is linearized on smooth branches, and the jump
/// locations move according to the equal-height condition.
pub fn small_omega_coefficient_with(
    m: f64,
    beta: f64,
    grid: &GaussianGrid,
    config: &SolverConfig,
) -> Result<f64, LimitsError> {
    let params = ModelParams::new(beta, 0.0, m).map_err(|e| LimitsError::Domain(e.to_string()))?;
    let classical = solve_saddle_with(&params, grid, config)?;
    let lambda = classical.state.lambda1;
    let b_bar = classical.averages.b_mean;
    let alpha = 1.0 / classical.averages.gap_sq_mean;
    let eps = 8.0 * m * lambda / (b_bar * b_bar);

    let land = Landscape::new(beta, m, lambda, 0.0, 0.0);
    let profile = build_profile(land, grid, config)?;
    let [au, av, gu, gv] = integrate_profile(&profile, grid, config, |t, h| {
        let s = land.terms(h);
        let denom = 1.0 - lambda * s.a2;
        let u = s.a1 / denom;
        let v = s.b1 / denom;
        let g = 2.0 * (h + t);
        [s.a1 * u, s.a1 * v, g * u, g * v]
    })?;
    let (mut ja_p, mut ja_r, mut jg_p, mut jg_r) = (0.0, 0.0, 0.0, 0.0);
    for jump in profile.jumps() {
        let (l, r) = (land.terms(jump.h_left), land.terms(jump.h_right));
        let dh = jump.h_left - jump.h_right;
        let w = normal_pdf(jump.t);
        let da = l.a - r.a;
        let db = l.b - r.b;
        let dg = (jump.h_left + jump.t).powi(2) - (jump.h_right + jump.t).powi(2);
        ja_p += da * w * da / dh;
        ja_r += da * w * db / dh;
        jg_p += dg * w * da / dh;
        jg_r += dg * w * db / dh;
    }
    let lambda_shift = (8.0 * m / b_bar - eps * (av + ja_r)) / (au + ja_p);
    let gap_shift = lambda_shift * (gu + jg_p) + eps * (gv + jg_r);
    Ok(alpha * alpha * gap_shift)
}
