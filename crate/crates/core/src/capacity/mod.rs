//! Replica-symmetric saddle point and the critical load `α_c(m, T, Ω)`.
//!
//! The saddle pins `M_z = m`. For a given `M_y` the multiplier `λ₁` is the
//! root of the first residual with `λ₂ = -λ₁ M_y / m`; `M_y` is then the
//! root of `M_y + 4Ω m / B̄`.

mod profile;
mod sweep;

use std::f64::consts::SQRT_2;

use thiserror::Error;

use crate::limits;
use crate::meanfield::ModelParams;
use crate::quadrature::{normal_pdf, GaussLegendre, GaussianGrid, QuadratureError};
use crate::roots::brent;

pub(crate) use profile::{Landscape, Profile};
pub use sweep::sweep;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("no root for lambda1 in [0, {upper}]")]
    NoSaddle { upper: f64 },
    #[error("m_y iteration did not converge after {iterations} steps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("maximization of Y failed in bracket [{lo}, {hi}]")]
    Maximization { lo: f64, hi: f64 },
    #[error("non-finite {what} at {at}")]
    NonFinite { what: &'static str, at: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("at beta = {beta}, omega = {omega}, m = {m}: {source}")]
    At {
        beta: f64,
        omega: f64,
        m: f64,
        source: Box<CapacityError>,
    },
}

/// Solver settings. The defaults are used throughout the test suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Convergence threshold on `max(|r1|, |r2|)`.
    pub residual_tol: f64,
    /// Cap on `M_y` updates.
    pub max_iterations: usize,
    /// Grid samples used by [`maximize_y`] before local refinement.
    pub scan_samples: usize,
    /// The constant multiplying `Ω²` in the stability functional.
    pub omega_sq_coefficient: f64,
    /// Largest `λ₁` tried before giving up on a saddle.
    pub lambda_limit: f64,
    /// `|t|` beyond which the Gaussian weight is neglected in split integrals.
    pub tail: f64,
    /// Order of each Gauss–Legendre panel in split integrals.
    pub panel_order: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            max_iterations: 200,
            scan_samples: 512,
            omega_sq_coefficient: 16.0,
            lambda_limit: 1e6,
            tail: 10.0,
            panel_order: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleState {
    pub m_z: f64,
    pub m_y: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `h(t_k)` on the nodes of the grid the saddle was solved with.
    pub h_profile: Vec<f64>,
    pub lambda_theta: f64,
}

impl SaddleState {
    /// A saddle candidate with `λ₂` derived from the other multipliers and an
    /// empty profile.
    pub fn from_multipliers(m_z: f64, m_y: f64, lambda1: f64) -> Self {
        Self {
            m_z,
            m_y,
            lambda1,
            lambda2: -lambda1 * m_y / m_z,
            h_profile: vec![],
            lambda_theta: 0.0,
        }
    }

    fn landscape(&self, beta: f64) -> Landscape {
        Landscape::new(beta, self.m_z, self.lambda1, self.lambda2, self.m_y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reason {
    Ok,
    StabilityViolated,
    NoSaddle,
    AboveOmegaC,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Ok => "ok",
            Reason::StabilityViolated => "stability_violated",
            Reason::NoSaddle => "no_saddle",
            Reason::AboveOmegaC => "above_omega_c",
        }
    }
}

impl std::fmt::Display for Reason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub alpha_c: f64,
    pub converged: bool,
    pub iterations: usize,
    /// The stability functional `D`; NaN when no saddle was found.
    pub stability_value: f64,
    pub reason: Reason,
}

/// Gaussian averages over the saddle profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileAverages {
    /// `∫Dt tanh(β m h(t))`
    pub tanh_mean: f64,
    /// `1 + (β²/2) ∫Dt (1 + m a)(1 - a²)`
    pub b_mean: f64,
    /// `∫Dt (h(t) + t)²`
    pub gap_sq_mean: f64,
}

/// The solved saddle with the averages evaluated on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub state: SaddleState,
    pub averages: ProfileAverages,
    pub residuals: (f64, f64),
    pub iterations: usize,
}

pub fn y_value(h: f64, t: f64, saddle: &SaddleState, params: &ModelParams) -> f64 {
    saddle.landscape(params.beta).y(h, t)
}

/// `∂Y/∂h`, zero at interior maximizers.
pub fn stationarity_residual(h: f64, t: f64, saddle: &SaddleState, params: &ModelParams) -> f64 {
    saddle.landscape(params.beta).dy(h, t)
}

/// Global maximizer of `Y(·, t)`: a scan of `scan_samples` points over the
/// bracket `[-t-Δ, -t+Δ]` followed by refinement of every sampled local
/// maximum.
pub fn maximize_y(
    t: f64,
    saddle: &SaddleState,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<f64, CapacityError> {
    let land = saddle.landscape(params.beta);
    if land.is_zero_temperature() {
        let p = Profile::build(land, t.abs() + 1.0, 0.0)?;
        return Ok(p.h(t));
    }
    let delta = land.displacement_bound();
    if delta == 0.0 {
        return Ok(-t);
    }
    let lo = -t - delta;
    let hi = -t + delta;
    let n = config.scan_samples.max(3);
    let xs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&h| land.y(h, t)).collect();
    let mut best: Option<(f64, f64)> = None;
    for k in 0..n {
        let left = if k == 0 { f64::NEG_INFINITY } else { ys[k - 1] };
        let right = if k == n - 1 { f64::NEG_INFINITY } else { ys[k + 1] };
        if ys[k] < left || ys[k] < right {
            continue;
        }
        let a = xs[k.saturating_sub(1)];
        let b = xs[(k + 1).min(n - 1)];
        let h = land.local_max(t, a, b);
        let y = land.y(h, t);
        if !y.is_finite() {
            return Err(CapacityError::NonFinite { what: "Y", at: h });
        }
        if best.is_none_or(|(_, yb)| y > yb) {
            best = Some((h, y));
        }
    }
    match best {
        Some((h, _)) if h >= lo - 1e-9 * delta && h <= hi + 1e-9 * delta => Ok(h),
        _ => Err(CapacityError::Maximization { lo, hi }),
    }
}

/// Integrates `f(t, h(t))` against the Gaussian measure, splitting the domain
/// at the breakpoints of the profile when there are any.
pub(crate) fn integrate_profile<const K: usize>(
    profile: &Profile,
    grid: &GaussianGrid,
    config: &SolverConfig,
    f: impl Fn(f64, f64) -> [f64; K],
) -> Result<[f64; K], CapacityError> {
    let mut acc = [0.0; K];
    let mut add = |t: f64, w: f64| -> Result<(), CapacityError> {
        let v = f(t, profile.h(t));
        for (a, x) in acc.iter_mut().zip(v) {
            if !x.is_finite() {
                return Err(QuadratureError::NonFiniteIntegrand { node: t }.into());
            }
            *a += w * x;
        }
        Ok(())
    };
    let breaks = profile.breakpoints();
    if breaks.is_empty() {
        for (&t, &w) in grid.nodes().iter().zip(grid.weights()) {
            add(t, w)?;
        }
        return Ok(acc);
    }
    let gl = GaussLegendre::new(config.panel_order)?;
    let l = config.tail;
    let panels = (grid.order() / 4).max(24);
    let width = 2.0 * l / panels as f64;
    let mut edges = vec![-l];
    edges.extend(breaks.into_iter().filter(|b| b.abs() < l));
    edges.push(l);
    for piece in edges.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        if b <= a {
            continue;
        }
        let n = ((b - a) / width).ceil().max(1.0) as usize;
        for k in 0..n {
            let pa = a + (b - a) * k as f64 / n as f64;
            let pb = a + (b - a) * (k + 1) as f64 / n as f64;
            for (t, w) in gl.mapped(pa, pb) {
                add(t, w * normal_pdf(t))?;
            }
        }
    }
    Ok(acc)
}

fn profile_range(grid: &GaussianGrid, config: &SolverConfig) -> f64 {
    grid.nodes().last().copied().unwrap_or(0.0).max(config.tail)
}

pub(crate) fn build_profile(
    land: Landscape,
    grid: &GaussianGrid,
    config: &SolverConfig,
) -> Result<Profile, CapacityError> {
    Profile::build(land, profile_range(grid, config), config.tail)
}

fn averages(
    profile: &Profile,
    grid: &GaussianGrid,
    config: &SolverConfig,
) -> Result<ProfileAverages, CapacityError> {
    let land = profile.land;
    let [a, q, g] = integrate_profile(profile, grid, config, |t, h| {
        let s = land.terms(h);
        [s.a, s.b - 1.0, (h + t) * (h + t)]
    })?;
    Ok(ProfileAverages {
        tanh_mean: a,
        b_mean: 1.0 + q,
        gap_sq_mean: g,
    })
}

fn residuals_from(m_z: f64, m_y: f64, omega: f64, avg: &ProfileAverages) -> (f64, f64) {
    (
        -m_z + 2.0 * omega * m_y + avg.tanh_mean,
        m_y + 4.0 * omega * m_z / avg.b_mean,
    )
}

/// `(r1, r2)` of the saddle equations, with `h(t)` recomputed from the
/// multipliers.
pub fn saddle_residuals(
    saddle: &SaddleState,
    params: &ModelParams,
    grid: &GaussianGrid,
) -> Result<(f64, f64), CapacityError> {
    saddle_residuals_with(saddle, params, grid, &SolverConfig::default())
}

pub fn saddle_residuals_with(
    saddle: &SaddleState,
    params: &ModelParams,
    grid: &GaussianGrid,
    config: &SolverConfig,
) -> Result<(f64, f64), CapacityError> {
    let p = build_profile(saddle.landscape(params.beta), grid, config)?;
    let avg = averages(&p, grid, config)?;
    Ok(residuals_from(saddle.m_z, saddle.m_y, params.omega, &avg))
}

struct LambdaRoot {
    lambda1: f64,
    averages: ProfileAverages,
}

/// Solves `r1(λ₁) = 0` at fixed `M_y`, starting from a bracket around
/// `guess` when one is available.
fn solve_lambda(
    params: &ModelParams,
    m_y: f64,
    guess: Option<f64>,
    grid: &GaussianGrid,
    config: &SolverConfig,
) -> Result<LambdaRoot, CapacityError> {
    let m = params.m;
    let eval = |l: f64| -> Result<(f64, ProfileAverages), CapacityError> {
        let land = Landscape::new(params.beta, m, l, -l * m_y / m, m_y);
        let p = build_profile(land, grid, config)?;
        let avg = averages(&p, grid, config)?;
        Ok((residuals_from(m, m_y, params.omega, &avg).0, avg))
    };
    let limit = config.lambda_limit;
    if params.beta == 0.0 || m - 2.0 * params.omega * m_y >= 1.0 {
        // `⟨tanh⟩` cannot reach the target.
        return Err(CapacityError::NoSaddle { upper: limit });
    }
    let (mut lo, mut flo, mut hi) = match guess {
        Some(g) if g > 0.0 => {
            let lo = 0.9 * g;
            let (f, _) = eval(lo)?;
            if f < 0.0 {
                (lo, f, 1.1 * g)
            } else {
                (0.0, eval(0.0)?.0, lo)
            }
        }
        _ => {
            let start = if params.beta.is_finite() { 10.0 / params.beta } else { 1.0 };
            (0.0, eval(0.0)?.0, start.min(limit))
        }
    };
    if flo > 0.0 {
        // Even λ₁ = 0 overshoots; no positive multiplier fits.
        return Err(CapacityError::NoSaddle { upper: limit });
    }
    let mut fhi = eval(hi)?.0;
    while fhi < 0.0 {
        if hi >= limit {
            return Err(CapacityError::NoSaddle { upper: limit });
        }
        lo = hi;
        flo = fhi;
        hi = (2.0 * hi).min(limit);
        fhi = eval(hi)?.0;
    }
    let root = brent(
        |l| eval(l).map(|r| r.0).unwrap_or(f64::NAN),
        lo,
        hi,
        flo,
        fhi,
        1e-15 * hi,
        200,
    )
    .ok_or(CapacityError::NoSaddle { upper: hi })?;
    let (_, averages) = eval(root)?;
    Ok(LambdaRoot { lambda1: root, averages })
}

pub fn solve_saddle(params: &ModelParams, grid: &GaussianGrid) -> Result<SaddleState, CapacityError> {
    solve_saddle_with(params, grid, &SolverConfig::default()).map(|s| s.state)
}

/// Solves both saddle equations. `M_y` is found by a secant search on
/// `r2(M_y)` that switches to Illinois regula falsi once the root is
/// bracketed; every evaluation solves `r1 = 0` for `λ₁`.
pub fn solve_saddle_with(
    params: &ModelParams,
    grid: &GaussianGrid,
    config: &SolverConfig,
) -> Result<SaddleSolution, CapacityError> {
    let m = params.m;
    let omega = params.omega;
    let classical = solve_lambda(params, 0.0, None, grid, config)?;
    let finish = |m_y: f64, root: LambdaRoot, iterations: usize| -> Result<SaddleSolution, CapacityError> {
        let mut state = SaddleState::from_multipliers(m, m_y, root.lambda1);
        let p = build_profile(state.landscape(params.beta), grid, config)?;
        state.h_profile = grid.nodes().iter().map(|&t| p.h(t)).collect();
        Ok(SaddleSolution {
            state,
            residuals: residuals_from(m, m_y, omega, &root.averages),
            averages: root.averages,
            iterations,
        })
    };
    if omega == 0.0 {
        return finish(0.0, classical, 1);
    }

    // (M_y, r2) with r2 > 0 and, once found, with r2 < 0.
    let mut right = (0.0, 4.0 * omega * m / classical.averages.b_mean);
    let mut left: Option<(f64, f64)> = None;
    let mut infeasible = Some(-(1.0 - m) / (2.0 * omega));
    let mut last_side = 0i8;
    let mut guess = Some(classical.lambda1);
    let mut m_y = (-right.1).max(0.5 * infeasible.unwrap_or(-1.0));
    let mut residual = f64::INFINITY;
    for iteration in 1..=config.max_iterations {
        let root = match solve_lambda(params, m_y, guess, grid, config) {
            Ok(r) => r,
            Err(CapacityError::NoSaddle { upper }) => {
                infeasible = Some(m_y);
                let target = left.map_or(right.0, |l| if m_y < l.0 { l.0 } else { right.0 });
                if (target - m_y).abs() < 1e-9 {
                    return Err(CapacityError::NoSaddle { upper });
                }
                m_y = 0.5 * (m_y + target);
                continue;
            }
            Err(e) => return Err(e),
        };
        let (r1, r2) = residuals_from(m, m_y, omega, &root.averages);
        residual = r1.abs().max(r2.abs());
        if residual < config.residual_tol {
            return finish(m_y, root, iteration);
        }
        guess = Some(root.lambda1);
        match left {
            None if r2 > 0.0 => {
                if r2 >= right.1 || m_y <= -1.0 {
                    break;
                }
                let slope = (r2 - right.1) / (m_y - right.0);
                right = (m_y, r2);
                let mut next = (m_y - r2 / slope).max(-1.0);
                if let Some(bad) = infeasible {
                    if m_y - bad < 1e-4 * bad.abs() {
                        // r2 stays positive up to the edge of the feasible region.
                        return Err(CapacityError::NoSaddle { upper: config.lambda_limit });
                    }
                    if next <= bad {
                        next = 0.5 * (m_y + bad);
                    }
                }
                m_y = next;
                continue;
            }
            None => left = Some((m_y, r2)),
            Some(ref mut l) => {
                if r2 < 0.0 {
                    *l = (m_y, r2);
                    if last_side == -1 {
                        right.1 *= 0.5;
                    }
                    last_side = -1;
                } else {
                    right = (m_y, r2);
                    if last_side == 1 {
                        l.1 *= 0.5;
                    }
                    last_side = 1;
                }
            }
        }
        let l = left.expect("bracket set above");
        if (right.0 - l.0).abs() < 1e-15 {
            break;
        }
        m_y = (l.0 * right.1 - right.0 * l.1) / (right.1 - l.1);
    }
    Err(CapacityError::NotConverged {
        iterations: config.max_iterations,
        residual,
    })
}

/// The stability functional
/// `D = c Ω² + ∫Dt [-2(β h s - 1) b + 4Ω M_y b']`, with `s = 1 - a²` and
/// `b'` the derivative of `b` with respect to `M_z`.
pub fn stability_functional(
    saddle: &SaddleState,
    params: &ModelParams,
    grid: &GaussianGrid,
    config: &SolverConfig,
) -> Result<f64, CapacityError> {
    let omega = params.omega;
    let base = config.omega_sq_coefficient * omega * omega;
    if params.is_zero_temperature() {
        // β h s → 0 on every branch and b = 1; the drive term diverges.
        return Ok(if omega > 0.0 && saddle.m_y != 0.0 { f64::INFINITY } else { base + 2.0 });
    }
    let beta = params.beta;
    let m = saddle.m_z;
    let p = build_profile(saddle.landscape(beta), grid, config)?;
    let [v] = integrate_profile(&p, grid, config, |_, h| {
        let x = beta * h;
        let (a, s) = profile::tanh_sech2(x * m);
        let b = 1.0 + 0.5 * beta * beta * (1.0 + m * a) * s;
        let b_prime = 0.5 * beta * beta * s * (a * (1.0 - 2.0 * x) + x * m * (1.0 - 3.0 * a * a));
        [-2.0 * (x * s - 1.0) * b + 4.0 * omega * saddle.m_y * b_prime]
    })?;
    Ok(base + v)
}

pub fn compute_capacity(params: &ModelParams, grid: &GaussianGrid) -> Result<CapacityResult, CapacityError> {
    compute_capacity_with(params, grid, &SolverConfig::default())
}

pub fn compute_capacity_with(
    params: &ModelParams,
    grid: &GaussianGrid,
    config: &SolverConfig,
) -> Result<CapacityResult, CapacityError> {
    let annotate = |e: CapacityError| CapacityError::At {
        beta: params.beta,
        omega: params.omega,
        m: params.m,
        source: Box::new(e),
    };
    let solution = match solve_saddle_with(params, grid, config) {
        Ok(s) => s,
        Err(CapacityError::NoSaddle { .. }) | Err(CapacityError::NotConverged { .. }) => {
            let above = params.beta <= 0.3
                && limits::omega_critical(params.m).is_ok_and(|oc| params.omega > oc);
            return Ok(CapacityResult {
                alpha_c: 0.0,
                converged: false,
                iterations: 0,
                stability_value: f64::NAN,
                reason: if above { Reason::AboveOmegaC } else { Reason::NoSaddle },
            });
        }
        Err(e) => return Err(annotate(e)),
    };
    let d = stability_functional(&solution.state, params, grid, config).map_err(annotate)?;
    let (alpha_c, reason) = if d < 0.0 {
        (0.0, Reason::StabilityViolated)
    } else {
        (1.0 / solution.averages.gap_sq_mean, Reason::Ok)
    };
    Ok(CapacityResult {
        alpha_c,
        converged: true,
        iterations: solution.iterations,
        stability_value: d,
        reason,
    })
}

/// The profile threshold `a = √2 erf⁻¹(m)` appearing in the zero-temperature
/// classical solution.
pub fn classical_threshold(m: f64) -> Result<f64, QuadratureError> {
    Ok(SQRT_2 * crate::quadrature::inverse_erf(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64, omega: f64, m: f64) -> ModelParams {
        ModelParams::new(beta, omega, m).unwrap()
    }

    #[test]
    fn y_value_examples() {
        let p = params(1.0, 0.0, 0.95);
        let s = SaddleState::from_multipliers(0.95, 0.0, 1.0);
        assert!((y_value(1.0, 0.0, &s, &p) - 0.239783).abs() < 1e-6);
        let zero = SaddleState::from_multipliers(0.95, 0.0, 0.0);
        assert_eq!(y_value(-0.3, 0.3, &zero, &p), 0.0);
        let p0 = params(0.0, 0.1, 0.95);
        let s = SaddleState::from_multipliers(0.95, 0.2, 1.0);
        let y = y_value(0.5, -0.5, &s, &p0);
        assert!((y + 0.5 * s.lambda2 * s.m_y).abs() < 1e-15);
    }

    #[test]
    fn maximize_y_with_zero_multiplier_is_minus_t() {
        let p = params(2.0, 0.0, 0.9);
        let s = SaddleState::from_multipliers(0.9, 0.0, 0.0);
        let cfg = SolverConfig::default();
        for t in [-2.0, 0.0, 0.7] {
            assert_eq!(maximize_y(t, &s, &p, &cfg).unwrap(), -t);
        }
    }

    #[test]
    fn maximize_y_is_stationary() {
        let p = params(1.0, 0.0, 0.95);
        let s = SaddleState::from_multipliers(0.95, 0.0, 0.5);
        let h = maximize_y(1.0, &s, &p, &SolverConfig::default()).unwrap();
        let k = 0.95;
        let r = h + 1.0 - 0.5 * k / (k * h).cosh().powi(2);
        assert!(r.abs() < 1e-9, "{r}");
    }

    #[test]
    fn zero_temperature_profile_matches_threshold() {
        let p = ModelParams::from_temperature(0.0, 0.0, 0.9).unwrap();
        let grid = GaussianGrid::new(101).unwrap();
        let s = solve_saddle(&p, &grid).unwrap();
        let a = classical_threshold(0.9).unwrap();
        assert!((2.0 * s.lambda1.sqrt() - a).abs() < 1e-9);
        let cfg = SolverConfig::default();
        assert_eq!(maximize_y(0.5 * a, &s, &p, &cfg).unwrap(), 0.0);
        assert_eq!(maximize_y(a + 0.1, &s, &p, &cfg).unwrap(), -(a + 0.1));
    }

    #[test]
    fn infinite_temperature_has_no_saddle() {
        let grid = GaussianGrid::new(21).unwrap();
        let r = compute_capacity(&params(0.0, 0.0, 0.9), &grid).unwrap();
        assert_eq!(r.reason, Reason::NoSaddle);
        assert_eq!(r.alpha_c, 0.0);
        assert!(!r.converged);
    }

    #[test]
    fn residuals_at_infinite_temperature() {
        let grid = GaussianGrid::new(21).unwrap();
        let p = params(0.0, 0.1, 0.9);
        let s = SaddleState::from_multipliers(0.9, -0.2, 0.7);
        let (r1, r2) = saddle_residuals(&s, &p, &grid).unwrap();
        assert!((r1 - (-0.9 + 2.0 * 0.1 * -0.2)).abs() < 1e-14);
        assert!((r2 - (-0.2 + 4.0 * 0.1 * 0.9)).abs() < 1e-14);
    }
}
