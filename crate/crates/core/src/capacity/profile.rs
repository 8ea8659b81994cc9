//! The maximizer profile `h(t) = argmax_h Y(h, t)`.
//!
//! Writing `Y(h, t) = K(h) - t·h - t²/2` with `K(h) = G(h) - h²/2` shows that
//! `h(t)` is the point where a line of slope `t` touches `K` from above. It
//! is therefore read off the upper concave envelope of `K`: `h(t)` is
//! non-increasing in `t` and jumps exactly at the slopes of the envelope's
//! bridges. Locating those jumps lets integrals over `t` be split there, so
//! the integrals are smooth functions of the multipliers.

use crate::roots::brent;

use super::CapacityError;

/// Single-site functions of the saddle landscape at inverse temperature
/// `beta` and overlap `m` (the pinned `M_z`).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Landscape {
    pub beta: f64,
    pub m: f64,
    kappa: f64,
    /// Coefficient of `a(h)` in `G`.
    pub lam_a: f64,
    /// Coefficient of `b(h)` in `G`, i.e. `-λ₂ M_y / 2`.
    pub lam_b: f64,
}

/// `a`, `b` and their `h`-derivatives (second order for `a` only).
#[derive(Debug, Clone, Copy)]
pub(crate) struct SiteTerms {
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub b1: f64,
}

impl Landscape {
    pub fn new(beta: f64, m: f64, lambda1: f64, lambda2: f64, m_y: f64) -> Self {
        Self {
            beta,
            m,
            kappa: beta * m,
            lam_a: lambda1,
            lam_b: -0.5 * lambda2 * m_y,
        }
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }

    pub fn terms(&self, h: f64) -> SiteTerms {
        if self.is_zero_temperature() {
            // h = 0 stands for the 0⁺ plateau.
            let a = if h >= 0.0 { 1.0 } else { -1.0 };
            return SiteTerms { a, a1: 0.0, a2: 0.0, b: 1.0, b1: 0.0 };
        }
        let k = self.kappa;
        let m = self.m;
        let (a, s) = tanh_sech2(k * h);
        let a1 = k * s;
        let a2 = -2.0 * k * k * a * s;
        let half_b2 = 0.5 * self.beta * self.beta;
        let q = (1.0 + m * a) * s;
        let q1 = m - 2.0 * a - 3.0 * m * a * a;
        SiteTerms {
            a,
            a1,
            a2,
            b: 1.0 + half_b2 * q,
            b1: half_b2 * q1 * a1,
        }
    }

    pub fn g(&self, h: f64) -> f64 {
        let s = self.terms(h);
        self.lam_a * s.a + self.lam_b * s.b
    }

    pub fn g1(&self, h: f64) -> f64 {
        let s = self.terms(h);
        self.lam_a * s.a1 + self.lam_b * s.b1
    }

    pub fn y(&self, h: f64, t: f64) -> f64 {
        -0.5 * (h + t) * (h + t) + self.g(h)
    }

    pub fn dy(&self, h: f64, t: f64) -> f64 {
        -(h + t) + self.g1(h)
    }

    fn k(&self, h: f64) -> f64 {
        self.g(h) - 0.5 * h * h
    }

    /// A bound on `|h(t) + t|`: the maximizer can move away from `-t` by at
    /// most `sup|G'|` and at most `√(2·osc G)`.
    pub fn displacement_bound(&self) -> f64 {
        let la = self.lam_a.abs();
        let lb = self.lam_b.abs();
        let osc = 2.0 * la + if self.is_zero_temperature() { 0.0 } else { self.beta * self.beta * lb };
        let by_osc = (2.0 * osc).sqrt();
        if self.is_zero_temperature() {
            return by_osc;
        }
        let by_slope = self.kappa * (la + 3.0 * self.beta * self.beta * lb);
        by_slope.min(by_osc)
    }

    /// Refines a local maximum of `Y(·, t)` inside `[lo, hi]`, widening the
    /// bracket by its own width until `∂_h Y` changes sign.
    pub fn local_max(&self, t: f64, mut lo: f64, mut hi: f64) -> f64 {
        let width = (hi - lo).max(1e-12);
        let mut flo = self.dy(lo, t);
        let mut fhi = self.dy(hi, t);
        for _ in 0..64 {
            if flo >= 0.0 && fhi <= 0.0 {
                break;
            }
            if flo < 0.0 {
                lo -= width;
                flo = self.dy(lo, t);
            }
            if fhi > 0.0 {
                hi += width;
                fhi = self.dy(hi, t);
            }
        }
        let xtol = 1e-15 * (1.0 + lo.abs().max(hi.abs()));
        brent(|h| self.dy(h, t), lo, hi, flo, fhi, xtol, 200).unwrap_or(0.5 * (lo + hi))
    }
}

/// A discontinuity of `h(t)`: for `t < t_jump` the profile follows the branch
/// ending at `h_left`, for `t > t_jump` the one starting at `h_right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jump {
    pub t: f64,
    pub h_left: f64,
    pub h_right: f64,
}

#[derive(Debug, Clone)]
enum Envelope {
    /// Hull vertices (grid indices) and the slope to the next vertex, with
    /// bridge slopes replaced by refined jump locations.
    Smooth {
        grid: Vec<f64>,
        vertices: Vec<usize>,
        slopes: Vec<f64>,
    },
    /// Zero temperature with `G = λ₁ sign(h)`: plateau at `0⁺` on `(0, t*)`.
    ZeroTemperature { t_star: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct Profile {
    pub land: Landscape,
    envelope: Envelope,
    jumps: Vec<Jump>,
}

/// Coarse sampling step of `K` away from the sigmoid region.
const COARSE_STEP: f64 = 0.02;
/// Samples per unit of `κh` inside the sigmoid region.
const DENSE_PER_UNIT: f64 = 50.0;
/// Half-width of the sigmoid region in units of `1/κ`.
const SIGMOID_HALF_WIDTH: f64 = 20.0;

impl Profile {
    /// Builds the profile for `|t| ≤ t_range`. Jumps are only resolved inside
    /// `[-jump_range, jump_range]`.
    pub fn build(land: Landscape, t_range: f64, jump_range: f64) -> Result<Self, CapacityError> {
        if land.is_zero_temperature() {
            if land.lam_a < 0.0 {
                return Err(CapacityError::Maximization {
                    lo: f64::NEG_INFINITY,
                    hi: f64::INFINITY,
                });
            }
            let t_star = 2.0 * land.lam_a.sqrt();
            let mut jumps = vec![];
            if t_star > 0.0 && t_star <= jump_range {
                jumps.push(Jump { t: t_star, h_left: 0.0, h_right: -t_star });
            }
            return Ok(Self {
                land,
                envelope: Envelope::ZeroTemperature { t_star },
                jumps,
            });
        }

        let delta = land.displacement_bound();
        let half = t_range + delta + 1.0;
        let grid = sample_points(half, land.kappa);
        let values: Vec<f64> = grid.iter().map(|&h| land.k(h)).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CapacityError::NonFinite { what: "Y landscape", at: grid[i] });
        }
        let vertices = upper_hull(&grid, &values);
        let mut slopes: Vec<f64> = vertices
            .windows(2)
            .map(|w| (values[w[1]] - values[w[0]]) / (grid[w[1]] - grid[w[0]]))
            .collect();

        let scale = 1.0 + values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut jumps = vec![];
        for (e, w) in vertices.windows(2).enumerate() {
            let (i, j) = (w[0], w[1]);
            if j == i + 1 {
                continue;
            }
            let gap = (i + 1..j)
                .map(|k| {
                    let chord = values[i] + slopes[e] * (grid[k] - grid[i]);
                    chord - values[k]
                })
                .fold(0.0f64, f64::max);
            if gap <= 1e-12 * scale {
                continue;
            }
            let step_i = local_step(&grid, i);
            let step_j = local_step(&grid, j);
            let jump = refine_jump(&land, slopes[e], grid[i], step_i, grid[j], step_j);
            slopes[e] = jump.t;
            if jump.t.abs() <= jump_range {
                jumps.push(jump);
            }
        }
        // Refinement moves bridge slopes by roundoff only; keep them ordered.
        for e in 1..slopes.len() {
            if slopes[e] > slopes[e - 1] {
                slopes[e] = slopes[e - 1];
            }
        }
        jumps.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(Self {
            land,
            envelope: Envelope::Smooth { grid, vertices, slopes },
            jumps,
        })
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Points in `t` where `h(t)` is not smooth (jumps and, at zero
    /// temperature, the plateau onset at `t = 0`).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.jumps.iter().map(|j| j.t).collect();
        if let Envelope::ZeroTemperature { t_star } = self.envelope {
            if t_star > 0.0 {
                b.push(0.0);
            }
        }
        b.sort_by(f64::total_cmp);
        b
    }

    pub fn h(&self, t: f64) -> f64 {
        match &self.envelope {
            Envelope::ZeroTemperature { t_star } => {
                if t > 0.0 && t < *t_star {
                    0.0
                } else {
                    -t
                }
            }
            Envelope::Smooth { grid, vertices, slopes } => {
                let land = &self.land;
                // First edge whose slope is below t; its left vertex touches.
                let v = slopes.partition_point(|&s| s >= t);
                let g = vertices[v];
                let at_edge = v == 0 || v == vertices.len() - 1;
                let h0 = grid[g];
                if at_edge && (h0 + t).abs() > land.displacement_bound() + 0.5 {
                    // Outside the sampled range, where K is strictly concave.
                    let d = land.displacement_bound() + 1e-9;
                    return land.local_max(t, -t - d, -t + d);
                }
                let lo = grid[g.saturating_sub(1)];
                let hi = grid[(g + 1).min(grid.len() - 1)];
                land.local_max(t, lo, hi)
            }
        }
    }
}

fn local_step(grid: &[f64], i: usize) -> f64 {
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    0.5 * (hi - lo)
}

/// Newton iteration on the equal-height condition of the two branches
/// touching the bridge from `x1` (low `h`) to `x2` (high `h`).
fn refine_jump(land: &Landscape, slope: f64, x1: f64, s1: f64, x2: f64, s2: f64) -> Jump {
    let mut t = slope;
    let mut h1 = land.local_max(t, x1 - s1, x1 + s1);
    let mut h2 = land.local_max(t, x2 - s2, x2 + s2);
    for _ in 0..60 {
        let f = land.y(h2, t) - land.y(h1, t);
        let dt = f / (h2 - h1);
        t += dt;
        let w1 = s1.max(4.0 * dt.abs());
        let w2 = s2.max(4.0 * dt.abs());
        h1 = land.local_max(t, h1 - w1, h1 + w1);
        h2 = land.local_max(t, h2 - w2, h2 + w2);
        if dt.abs() <= 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    Jump { t, h_left: h2, h_right: h1 }
}

/// Sample points on `[-half, half]`: coarse spacing far from the origin and
/// spacing resolving `tanh(κh)` near it.
fn sample_points(half: f64, kappa: f64) -> Vec<f64> {
    let sigmoid = if kappa > 0.0 { SIGMOID_HALF_WIDTH / kappa } else { f64::INFINITY };
    let dense_step = if kappa > 0.0 {
        (1.0 / (DENSE_PER_UNIT * kappa)).min(COARSE_STEP)
    } else {
        COARSE_STEP
    };
    let inner = sigmoid.min(half);
    let mut pts = vec![];
    let n_outer = ((half - inner) / COARSE_STEP).ceil() as usize;
    for k in (1..=n_outer).rev() {
        pts.push(-inner - (half - inner) * k as f64 / n_outer as f64);
    }
    let n_inner = (2.0 * inner / dense_step).ceil().max(2.0) as usize;
    for k in 0..=n_inner {
        pts.push(-inner + 2.0 * inner * k as f64 / n_inner as f64);
    }
    for k in 1..=n_outer {
        pts.push(inner + (half - inner) * k as f64 / n_outer as f64);
    }
    pts
}

/// Indices of the upper concave hull of `(x_k, y_k)`, `x` strictly increasing.
fn upper_hull(x: &[f64], y: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (x[a] - x[o]) * (y[k] - y[o]) - (y[a] - y[o]) * (x[k] - x[o]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

/// `(tanh x, sech² x)` without cancellation in `1 - tanh²` for large `|x|`.
pub(crate) fn tanh_sech2(x: f64) -> (f64, f64) {
    let e = (-2.0 * x.abs()).exp();
    let a = ((1.0 - e) / (1.0 + e)).copysign(x);
    (a, 4.0 * e / ((1.0 + e) * (1.0 + e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_concave_data_keeps_everything() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| -v * v).collect();
        assert_eq!(upper_hull(&x, &y).len(), 10);
    }

    #[test]
    fn hull_bridges_a_dip() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, -1.0, -1.0, 0.0];
        assert_eq!(upper_hull(&x, &y), vec![0, 3]);
    }

    #[test]
    fn zero_multipliers_give_identity_profile() {
        let land = Landscape::new(1.0, 0.9, 0.0, 0.0, 0.0);
        let p = Profile::build(land, 10.0, 10.0).unwrap();
        for t in [-3.0, -0.2, 0.0, 1.7, 9.0] {
            assert!((p.h(t) + t).abs() < 1e-12);
        }
        assert!(p.jumps().is_empty());
    }

    #[test]
    fn low_temperature_profile_has_a_plateau_and_one_jump() {
        let land = Landscape::new(200.0, 0.95, 1.0, 0.0, 0.0);
        let p = Profile::build(land, 10.0, 10.0).unwrap();
        assert_eq!(p.jumps().len(), 1);
        let j = p.jumps()[0];
        // Nearly the zero-temperature jump at 2√λ₁.
        assert!((j.t - 2.0).abs() < 0.05, "{j:?}");
        assert!(p.h(1.0).abs() < 0.05);
        assert!((p.h(3.0) + 3.0).abs() < 1e-6);
        // Both branches are equally high at the jump.
        assert!((land.y(j.h_left, j.t) - land.y(j.h_right, j.t)).abs() < 1e-12);
    }

    #[test]
    fn profile_is_the_global_maximum() {
        let land = Landscape::new(30.0, 0.95, 0.4, 0.0, 0.0);
        let p = Profile::build(land, 10.0, 10.0).unwrap();
        for k in 0..200 {
            let t = -4.0 + 8.0 * k as f64 / 200.0;
            let h = p.h(t);
            let best = (0..20001)
                .map(|i| -6.0 + 12.0 * i as f64 / 20000.0)
                .map(|x| land.y(x, t))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(land.y(h, t) >= best - 1e-9, "t = {t}");
        }
    }

    #[test]
    fn profile_is_non_increasing() {
        let land = Landscape::new(50.0, 0.9, 0.7, -0.3, 0.2);
        let p = Profile::build(land, 10.0, 10.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..2000 {
            let t = -8.0 + 16.0 * k as f64 / 2000.0;
            let h = p.h(t);
            assert!(h <= prev + 1e-12);
            prev = h;
        }
    }

    #[test]
    fn zero_temperature_profile() {
        let land = Landscape::new(f64::INFINITY, 0.9, 0.25, 0.0, 0.0);
        let p = Profile::build(land, 10.0, 10.0).unwrap();
        assert_eq!(p.breakpoints(), vec![0.0, 1.0]);
        assert_eq!(p.h(-0.5), 0.5);
        assert_eq!(p.h(0.5), 0.0);
        assert_eq!(p.h(1.5), -1.5);
    }
}
