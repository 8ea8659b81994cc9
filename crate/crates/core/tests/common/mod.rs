//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Brute-force replica-symmetric saddle: `h(t)` from a dense scan of
/// `Y(h) = -(h+t)²/2 + λ₁ tanh(βmh) + λ_b b(h)` refined by golden section,
/// a rectangle rule in `t`, and plain bisection for both multipliers.
pub struct BruteForce {
    pub m: f64,
    pub beta: f64,
    pub omega: f64,
    pub t_step: f64,
    pub h_step: f64,
}

pub struct BruteSaddle {
    pub lambda1: f64,
    pub m_y: f64,
    pub alpha: f64,
}

impl BruteForce {
    pub fn new(m: f64, beta: f64, omega: f64) -> Self {
        Self { m, beta, omega, t_step: 0.01, h_step: 0.01 }
    }

    fn site(&self, h: f64) -> (f64, f64) {
        let a = (self.beta * self.m * h).tanh();
        let b = 1.0 + 0.5 * self.beta * self.beta * (1.0 + self.m * a) * (1.0 - a * a);
        (a, b)
    }

    fn argmax(&self, t: f64, lambda1: f64, lam_b: f64) -> f64 {
        let y = |h: f64| {
            let (a, b) = self.site(h);
            -(h + t) * (h + t) / 2.0 + lambda1 * a + lam_b * b
        };
        // |G| is bounded by λ₁ + |λ_b| (1 + β²), so |h + t| ≤ 2 √(that).
        let reach = 2.0 * (lambda1 + lam_b.abs() * (1.0 + self.beta * self.beta)).sqrt() + self.h_step;
        let n = (2.0 * reach / self.h_step).ceil() as usize;
        let mut best = (-t, y(-t));
        for k in 0..=n {
            let h = -t - reach + 2.0 * reach * k as f64 / n as f64;
            let v = y(h);
            if v > best.1 {
                best = (h, v);
            }
        }
        let (mut lo, mut hi) = (best.0 - self.h_step, best.0 + self.h_step);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..60 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if y(x1) > y(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        0.5 * (lo + hi)
    }

    /// `(⟨a⟩, ⟨b⟩, ⟨(h+t)²⟩)`.
    fn averages(&self, lambda1: f64, m_y: f64) -> (f64, f64, f64) {
        let lam_b = lambda1 * m_y * m_y / (2.0 * self.m);
        let n = (16.0 / self.t_step).round() as usize;
        let (mut sa, mut sb, mut sg) = (0.0, 0.0, 0.0);
        for k in 0..=n {
            let t = -8.0 + k as f64 * self.t_step;
            let w = (-t * t / 2.0).exp() / (2.0 * PI).sqrt() * self.t_step;
            let h = self.argmax(t, lambda1, lam_b);
            let (a, b) = self.site(h);
            sa += w * a;
            sb += w * b;
            sg += w * (h + t) * (h + t);
        }
        (sa, sb, sg)
    }

    fn lambda_for(&self, m_y: f64) -> Option<(f64, (f64, f64, f64))> {
        let target = self.m - 2.0 * self.omega * m_y;
        if target >= 1.0 {
            return None;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while self.averages(hi, m_y).0 < target {
            lo = hi;
            hi *= 2.0;
            if hi > 1e5 {
                return None;
            }
        }
        for _ in 0..32 {
            let mid = 0.5 * (lo + hi);
            if self.averages(mid, m_y).0 < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let l = 0.5 * (lo + hi);
        Some((l, self.averages(l, m_y)))
    }

    pub fn solve(&self) -> Option<BruteSaddle> {
        if self.omega == 0.0 {
            let (lambda1, (_, _, g)) = self.lambda_for(0.0)?;
            return Some(BruteSaddle { lambda1, m_y: 0.0, alpha: 1.0 / g });
        }
        let r2 = |m_y: f64| self.lambda_for(m_y).map(|(l, (_, b, g))| (m_y + 4.0 * self.omega * self.m / b, l, g));
        // r2 > 0 at M_y = 0; walk down to a sign change, then bisect.
        let (mut hi, mut lo) = (0.0, -0.02);
        loop {
            match r2(lo) {
                Some((r, _, _)) if r < 0.0 => break,
                Some(_) => {
                    hi = lo;
                    lo -= 0.02;
                }
                None => return None,
            }
        }
        for _ in 0..24 {
            let mid = 0.5 * (lo + hi);
            match r2(mid) {
                Some((r, _, _)) if r < 0.0 => lo = mid,
                _ => hi = mid,
            }
        }
        let m_y = 0.5 * (lo + hi);
        let (_, lambda1, g) = r2(m_y)?;
        Some(BruteSaddle { lambda1, m_y, alpha: 1.0 / g })
    }
}

/// `∫₀ᵃ t² φ(t) dt` by composite Simpson with many panels.
pub fn truncated_second_moment_simpson(a: f64) -> f64 {
    let n = 20_000;
    let h = a / n as f64;
    let f = |t: f64| t * t * (-t * t / 2.0).exp() / (2.0 * PI).sqrt();
    let mut s = f(0.0) + f(a);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    s * h / 3.0
}

/// Gardner's closed form from a bisection inverse of `erf` computed by
/// Simpson integration of the Gaussian density.
pub fn gardner_reference(m: f64) -> f64 {
    // m = 2Φ(a) - 1 = erf(a/√2).
    let phi_mass = |a: f64| {
        let n = 20_000;
        let h = a / n as f64;
        let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * PI).sqrt();
        let mut s = f(0.0) + f(a);
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        2.0 * s * h / 3.0
    };
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if phi_mass(mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    1.0 / truncated_second_moment_simpson(0.5 * (lo + hi))
}

/// Least squares fit of `y ≈ Σ_k c_k x^{p_k}`.
pub fn least_squares(xs: &[f64], ys: &[f64], powers: &[i32]) -> Vec<f64> {
    let k = powers.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (&x, &y) in xs.iter().zip(ys) {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += x.powi(powers[i]) * x.powi(powers[j]);
            }
            a[i][k] += x.powi(powers[i]) * y;
        }
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, piv);
        for row in 0..k {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..=k {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..k).map(|i| a[i][k] / a[i][i]).collect()
}
