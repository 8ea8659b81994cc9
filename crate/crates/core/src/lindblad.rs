//! Exact Lindblad evolution of a few-spin open Hopfield network.
//!
//! Basis states are bit strings over the `N` spins; bit `n` set means spin
//! `n` points up (`σ_n^z = +1`). Each spin carries the jump operators
//! `Γ_{n,±} = f_{n,±} σ_n^±` with
//! `f_{n,±} = exp(±βΔE_n/2) / √(2 cosh βΔE_n)` and
//! `ΔE_n = N^{-1/2} Σ_{j≠n} J_nj σ_j^z`, and the coherent part is
//! `H = Ω Σ_n σ_n^x`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rand::Rng;
use thiserror::Error;

pub type C64 = Complex<f64>;

pub const MAX_SPINS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LindbladError {
    #[error("at most {MAX_SPINS} spins are supported, got {0}")]
    TooLarge(usize),
    #[error("invalid patterns: {0}")]
    InvalidPatterns(String),
    #[error("invalid spin system: {0}")]
    InvalidSystem(String),
    #[error("density matrix violates {what} by {magnitude:e}")]
    InvalidState { what: &'static str, magnitude: f64 },
    #[error("integration failed at t = {time}: {what} violated by {magnitude:e}")]
    Integration {
        time: f64,
        what: &'static str,
        magnitude: f64,
    },
    #[error("invalid integration setup: {0}")]
    InvalidStep(String),
}

/// Patterns `ξ^μ ∈ {-1, +1}^N`, one row per pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    n: usize,
    rows: Vec<Vec<i8>>,
}

impl PatternSet {
    pub fn new(rows: Vec<Vec<i8>>) -> Result<Self, LindbladError> {
        let Some(first) = rows.first() else {
            return Err(LindbladError::InvalidPatterns("need at least one pattern".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(LindbladError::InvalidPatterns("patterns must be nonempty".into()));
        }
        if n > MAX_SPINS {
            return Err(LindbladError::TooLarge(n));
        }
        for (k, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(LindbladError::InvalidPatterns(format!(
                    "pattern {k} has {} entries, expected {n}",
                    r.len()
                )));
            }
            if r.iter().any(|&x| x != 1 && x != -1) {
                return Err(LindbladError::InvalidPatterns(format!("pattern {k} has entries other than ±1")));
            }
        }
        Ok(Self { n, rows })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<Self, LindbladError> {
        if p == 0 {
            return Err(LindbladError::InvalidPatterns("need at least one pattern".into()));
        }
        let rows = (0..p)
            .map(|_| (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect())
            .collect();
        Self::new(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn pattern(&self, mu: usize) -> &[i8] {
        &self.rows[mu]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i8]> {
        self.rows.iter().map(Vec::as_slice)
    }
}

/// Hebbian couplings `Σ_μ ξ_i^μ ξ_j^μ` with zero diagonal, scaled so that
/// `Σ_ij J_ij² = N²`.
pub fn hebb_couplings(patterns: &PatternSet) -> DMatrix<f64> {
    let n = patterns.n();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for xi in patterns.iter() {
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    j[(a, b)] += f64::from(xi[a]) * f64::from(xi[b]);
                }
            }
        }
    }
    // A single common factor keeps J symmetric; rows then meet the
    // constraint exactly when their norms agree (always for p = 1) and on
    // average otherwise.
    let frob_sq = j.norm_squared();
    if frob_sq > 0.0 {
        j *= (n as f64 * n as f64 / frob_sq).sqrt();
    }
    j
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    n: usize,
    couplings: DMatrix<f64>,
    pub beta: f64,
    pub omega: f64,
}

impl SpinSystem {
    pub fn new(couplings: DMatrix<f64>, beta: f64, omega: f64) -> Result<Self, LindbladError> {
        let n = couplings.nrows();
        if couplings.ncols() != n || n == 0 {
            return Err(LindbladError::InvalidSystem("couplings must be a nonempty square matrix".into()));
        }
        if n > MAX_SPINS {
            return Err(LindbladError::TooLarge(n));
        }
        if (0..n).any(|i| couplings[(i, i)] != 0.0) {
            return Err(LindbladError::InvalidSystem("couplings must have zero diagonal".into()));
        }
        if couplings.iter().any(|x| !x.is_finite()) {
            return Err(LindbladError::InvalidSystem("couplings must be finite".into()));
        }
        if beta.is_nan() || beta < 0.0 {
            return Err(LindbladError::InvalidSystem(format!("beta must be >= 0, got {beta}")));
        }
        if !omega.is_finite() || omega < 0.0 {
            return Err(LindbladError::InvalidSystem(format!("omega must be finite and >= 0, got {omega}")));
        }
        Ok(Self { n, couplings, beta, omega })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    /// `ΔE_n` in the configuration `s`.
    pub fn local_field(&self, site: usize, s: usize) -> f64 {
        let sum: f64 = (0..self.n)
            .filter(|&j| j != site)
            .map(|j| self.couplings[(site, j)] * spin(s, j))
            .sum();
        sum / (self.n as f64).sqrt()
    }

    /// `E(s) = -(1 / 2√N) Σ_{i≠j} J_ij s_i s_j`, the energy whose Boltzmann
    /// weight the flip rates balance for symmetric couplings.
    pub fn energy(&self, s: usize) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    e += self.couplings[(i, j)] * spin(s, i) * spin(s, j);
                }
            }
        }
        -0.5 * e / (self.n as f64).sqrt()
    }

    /// `(f_{n,+}, f_{n,-})` in the configuration `s`.
    pub fn rates(&self, site: usize, s: usize) -> (f64, f64) {
        let de = self.local_field(site, s);
        let x = if de == 0.0 { 0.0 } else { self.beta * de };
        let th = x.tanh();
        (((1.0 + th) / 2.0).sqrt(), ((1.0 - th) / 2.0).sqrt())
    }
}

fn spin(s: usize, site: usize) -> f64 {
    if s >> site & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `Γ_{n,τ}`: the rate factor `f` as a diagonal over configurations times
/// the raising (`sign = +1`) or lowering (`sign = -1`) operator on `site`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub site: usize,
    pub sign: i8,
    pub rate: Vec<f64>,
}

impl JumpOperator {
    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.rate.len();
        let mut m = DMatrix::<C64>::zeros(d, d);
        let bit = 1 << self.site;
        for s in 0..d {
            let up = s & bit != 0;
            // σ⁺ maps the down state s^bit to the up state s.
            if (self.sign > 0) == up {
                m[(s, s ^ bit)] = C64::new(self.rate[s], 0.0);
            }
        }
        m
    }
}

pub fn build_jump_operators(system: &SpinSystem) -> Vec<JumpOperator> {
    let d = system.dim();
    let mut ops = Vec::with_capacity(2 * system.n);
    for site in 0..system.n {
        let (plus, minus): (Vec<f64>, Vec<f64>) = (0..d).map(|s| system.rates(site, s)).unzip();
        ops.push(JumpOperator { site, sign: 1, rate: plus });
        ops.push(JumpOperator { site, sign: -1, rate: minus });
    }
    ops
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<C64>,
}

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Deviations of a matrix from the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violations {
    pub hermiticity: f64,
    pub trace: f64,
    /// `max(0, -λ_min)`.
    pub positivity: f64,
}

impl Violations {
    pub fn of(m: &DMatrix<C64>) -> Self {
        let hermiticity = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let trace = (m.trace() - C64::new(1.0, 0.0)).norm();
        let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let min_eig = SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        Self { hermiticity, trace, positivity: (-min_eig).max(0.0) }
    }

    /// The first invariant exceeded, with its magnitude.
    pub fn first_failure(&self) -> Option<(&'static str, f64)> {
        if self.hermiticity > HERMITICITY_TOL {
            Some(("hermiticity", self.hermiticity))
        } else if self.trace > TRACE_TOL {
            Some(("unit trace", self.trace))
        } else if self.positivity > POSITIVITY_TOL {
            Some(("positivity", self.positivity))
        } else {
            None
        }
    }
}

impl DensityMatrix {
    pub fn new(data: DMatrix<C64>) -> Result<Self, LindbladError> {
        let d = data.nrows();
        if data.ncols() != d || !d.is_power_of_two() {
            return Err(LindbladError::InvalidSystem("density matrix must be 2^N × 2^N".into()));
        }
        if d > 1 << MAX_SPINS {
            return Err(LindbladError::TooLarge(d.trailing_zeros() as usize));
        }
        if let Some((what, magnitude)) = Violations::of(&data).first_failure() {
            return Err(LindbladError::InvalidState { what, magnitude });
        }
        Ok(Self { data: hermitize(data) })
    }

    /// `|s⟩⟨s|` for the configuration with spin `i` equal to `pattern[i]`.
    pub fn pattern_state(pattern: &[i8]) -> Result<Self, LindbladError> {
        let n = pattern.len();
        if n > MAX_SPINS {
            return Err(LindbladError::TooLarge(n));
        }
        let s = configuration(pattern);
        let mut data = DMatrix::<C64>::zeros(1 << n, 1 << n);
        data[(s, s)] = C64::new(1.0, 0.0);
        Ok(Self { data })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self, LindbladError> {
        if n > MAX_SPINS {
            return Err(LindbladError::TooLarge(n));
        }
        let d = 1 << n;
        Ok(Self { data: DMatrix::<C64>::identity(d, d) * C64::new(1.0 / d as f64, 0.0) })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn n(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|s| self.data[(s, s)].re).collect()
    }
}

fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    let adj = m.adjoint();
    (m + adj) * C64::new(0.5, 0.0)
}

/// Basis index of the configuration `pattern` (entry `+1` is spin up).
pub fn configuration(pattern: &[i8]) -> usize {
    pattern
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0)
        .fold(0, |s, (i, _)| s | 1 << i)
}

/// The generator with the jump operators precomputed.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    n: usize,
    omega: f64,
    /// `g[site][s]`: amplitude of the jump into `s` that flips `site`
    /// (`f_+` if `s` has the spin up, `f_-` otherwise).
    into: Vec<Vec<f64>>,
    /// Total rate of leaving each configuration.
    escape: Vec<f64>,
}

impl Liouvillian {
    pub fn new(system: &SpinSystem) -> Self {
        let d = system.dim();
        let mut into = vec![vec![0.0; d]; system.n];
        let mut escape = vec![0.0; d];
        for (site, row) in into.iter_mut().enumerate() {
            for s in 0..d {
                let (fp, fm) = system.rates(site, s);
                let up = s >> site & 1 == 1;
                row[s] = if up { fp } else { fm };
                // Leaving s flips the spin the other way.
                escape[s] += if up { fm * fm } else { fp * fp };
            }
        }
        Self { n: system.n, omega: system.omega, into, escape }
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = rho.nrows();
        let mut out = DMatrix::<C64>::zeros(d, d);
        let minus_i_omega = C64::new(0.0, -self.omega);
        for c in 0..d {
            for r in 0..d {
                let mut v = -0.5 * (self.escape[r] + self.escape[c]) * rho[(r, c)];
                for site in 0..self.n {
                    let bit = 1 << site;
                    if (r ^ c) & bit == 0 {
                        v += self.into[site][r] * self.into[site][c] * rho[(r ^ bit, c ^ bit)];
                    }
                    if self.omega != 0.0 {
                        v += minus_i_omega * (rho[(r ^ bit, c)] - rho[(r, c ^ bit)]);
                    }
                }
                out[(r, c)] = v;
            }
        }
        out
    }
}

/// `dρ/dt = -i[H, ρ] + Σ_{n,τ} (Γ ρ Γ† - ½{Γ†Γ, ρ})`.
pub fn lindblad_rhs(rho: &DensityMatrix, system: &SpinSystem) -> DMatrix<C64> {
    Liouvillian::new(system).apply(&rho.data)
}

fn check_step(dt: f64, t_max: f64) -> Result<usize, LindbladError> {
    if !(dt > 0.0) || !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(LindbladError::InvalidStep(format!("need dt > 0 and t_max >= 0, got dt={dt}, t_max={t_max}")));
    }
    Ok((t_max / dt).round() as usize)
}

/// RK4 evolution, keeping every `stride`-th state. Kept states are checked
/// against the density-matrix invariants and the evolution stops with an
/// error at the first violation.
pub fn evolve(
    rho0: &DensityMatrix,
    system: &SpinSystem,
    t_max: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<(f64, DensityMatrix)>, LindbladError> {
    if rho0.dim() != system.dim() {
        return Err(LindbladError::InvalidSystem("state and system sizes differ".into()));
    }
    let steps = check_step(dt, t_max)?;
    let stride = stride.max(1);
    let lv = Liouvillian::new(system);
    let h = C64::new(dt, 0.0);
    let mut rho = rho0.data.clone();
    let mut out = vec![(0.0, rho0.clone())];
    for k in 1..=steps {
        let k1 = lv.apply(&rho);
        let k2 = lv.apply(&(&rho + &k1 * (h * 0.5)));
        let k3 = lv.apply(&(&rho + &k2 * (h * 0.5)));
        let k4 = lv.apply(&(&rho + &k3 * h));
        rho += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (h / 6.0);
        if k % stride == 0 || k == steps {
            let t = k as f64 * dt;
            if let Some((what, magnitude)) = Violations::of(&rho).first_failure() {
                return Err(LindbladError::Integration { time: t, what, magnitude });
            }
            rho = hermitize(rho);
            out.push((t, DensityMatrix { data: rho.clone() }));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `(1/N) Σ_i ξ_i tr(ρ σ_i^a)`.
pub fn overlap_expectation(rho: &DensityMatrix, pattern: &[i8], axis: Axis) -> f64 {
    let n = rho.n();
    assert_eq!(pattern.len(), n, "pattern length must match the number of spins");
    let m = &rho.data;
    let mut total = 0.0;
    for (site, &xi) in pattern.iter().enumerate() {
        let bit = 1 << site;
        let mut e = 0.0;
        for s in 0..rho.dim() {
            let up = s & bit != 0;
            e += match axis {
                Axis::Z => spin(s, site) * m[(s, s)].re,
                Axis::X => m[(s, s ^ bit)].re,
                // ⟨s^bit|σ^y|s⟩ is i for s up and -i for s down.
                Axis::Y => {
                    let z = m[(s, s ^ bit)];
                    if up {
                        -z.im
                    } else {
                        z.im
                    }
                }
            };
        }
        total += f64::from(xi) * e;
    }
    total / n as f64
}

/// Master equation on the `2^N` z-configurations with single-flip rates
/// `f²`, integrated by RK4 and keeping every `stride`-th distribution.
pub fn classical_glauber_evolve(
    p0: &[f64],
    system: &SpinSystem,
    t_max: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<(f64, Vec<f64>)>, LindbladError> {
    let d = system.dim();
    if p0.len() != d {
        return Err(LindbladError::InvalidSystem("distribution and system sizes differ".into()));
    }
    let total: f64 = p0.iter().sum();
    if (total - 1.0).abs() > 1e-10 || p0.iter().any(|&p| !(-1e-12..=1.0 + 1e-10).contains(&p)) {
        return Err(LindbladError::InvalidSystem("initial distribution must be normalized".into()));
    }
    let steps = check_step(dt, t_max)?;
    let stride = stride.max(1);
    let lv = Liouvillian::new(system);
    let rhs = |p: &[f64]| -> Vec<f64> {
        (0..d)
            .map(|s| {
                let gain: f64 = (0..system.n)
                    .map(|site| lv.into[site][s].powi(2) * p[s ^ 1 << site])
                    .sum();
                gain - lv.escape[s] * p[s]
            })
            .collect()
    };
    let axpy = |p: &[f64], a: f64, k: &[f64]| -> Vec<f64> { p.iter().zip(k).map(|(x, y)| x + a * y).collect() };
    let mut p = p0.to_vec();
    let mut out = vec![(0.0, p.clone())];
    for k in 1..=steps {
        let k1 = rhs(&p);
        let k2 = rhs(&axpy(&p, 0.5 * dt, &k1));
        let k3 = rhs(&axpy(&p, 0.5 * dt, &k2));
        let k4 = rhs(&axpy(&p, dt, &k3));
        for s in 0..d {
            p[s] += dt / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
        }
        let t = k as f64 * dt;
        if let Some(&bad) = p.iter().find(|&&x| !(-1e-10..=1.0 + 1e-10).contains(&x)) {
            let magnitude = if bad < 0.0 { -bad } else { bad - 1.0 };
            return Err(LindbladError::Integration { time: t, what: "probability range", magnitude });
        }
        if k % stride == 0 || k == steps {
            out.push((t, p.clone()));
        }
    }
    Ok(out)
}

/// The Boltzmann distribution `exp(-βE(s)) / Z`.
pub fn boltzmann_distribution(system: &SpinSystem) -> Vec<f64> {
    let energies: Vec<f64> = (0..system.dim()).map(|s| system.energy(s)).collect();
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|e| (-system.beta * (e - e_min)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}
