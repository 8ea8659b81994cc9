//! Integration against the standard Gaussian measure `Dt = dt e^{-t²/2}/√(2π)`.
//!
//! Nodes come from a Golub–Welsch eigen-decomposition of the Hermite
//! recurrence, so any order can be built without shipped tables. A
//! Gauss–Legendre rule is provided as well for integrating piecewise
//! smooth functions on finite panels.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature order must be at least 2, got {0}")]
    InvalidOrder(usize),
    #[error("integrand is not finite at node t = {node}")]
    NonFiniteIntegrand { node: f64 },
    #[error("inverse_erf requires |y| < 1, got {0}")]
    Domain(f64),
}

/// Gauss–Hermite rule normalized to the standard-normal probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Eigen-decomposition of a symmetric tridiagonal Jacobi matrix with zero
/// diagonal. Returns sorted eigenvalues and the squared first components of
/// the corresponding eigenvectors.
fn golub_welsch(off_diagonal: impl Fn(usize) -> f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = off_diagonal(k);
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eigen = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = eigen
        .eigenvalues
        .iter()
        .zip(eigen.eigenvectors.column_iter())
        .map(|(&x, v)| (x, v[0] * v[0]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Averages mirrored entries so that the rule is exactly symmetric about 0.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for k in 0..n / 2 {
        let j = n - 1 - k;
        let x = 0.5 * (nodes[j] - nodes[k]);
        let w = 0.5 * (weights[j] + weights[k]);
        nodes[k] = -x;
        nodes[j] = x;
        weights[k] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

impl GaussianGrid {
    pub fn new(order: usize) -> Result<Self, QuadratureError> {
        if order < 2 {
            return Err(QuadratureError::InvalidOrder(order));
        }
        // Physicists' Hermite recurrence: off-diagonal √(k/2), weight total √π.
        let (x, w_h) = golub_welsch(|k| (k as f64 / 2.0).sqrt(), order);
        let mut nodes: Vec<f64> = x.iter().map(|x| SQRT_2 * x).collect();
        // w_H = √π v₀², so the probability weight w_H/√π is just v₀².
        let mut weights = w_h;
        symmetrize(&mut nodes, &mut weights);
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_k w_k f(t_k)`; fails on the first node where `f` is not finite.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64, QuadratureError> {
        let mut acc = 0.0;
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(t);
            if !v.is_finite() {
                return Err(QuadratureError::NonFiniteIntegrand { node: t });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// Weighted sum of values already sampled on the nodes.
    pub fn sum_sampled(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.order());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Convenience wrapper for [`GaussianGrid::new`].
pub fn build_grid(order: usize) -> Result<GaussianGrid, QuadratureError> {
    GaussianGrid::new(order)
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self, QuadratureError> {
        if order < 2 {
            return Err(QuadratureError::InvalidOrder(order));
        }
        let (mut nodes, v2) = golub_welsch(
            |k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            },
            order,
        );
        let mut weights: Vec<f64> = v2.iter().map(|v| 2.0 * v).collect();
        symmetrize(&mut nodes, &mut weights);
        Ok(Self { nodes, weights })
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / SQRT_2)
}

/// Solves `erf(x) = y` by Newton iteration from a rational initial guess.
pub fn inverse_erf(y: f64) -> Result<f64, QuadratureError> {
    if !(y.abs() < 1.0) {
        return Err(QuadratureError::Domain(y));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    // Giles' single-precision approximation as starting point.
    let w = -((1.0 - y) * (1.0 + y)).ln();
    let mut x = if w < 5.0 {
        let w = w - 2.5;
        let mut p = 2.810_226_36e-08;
        for c in [
            3.432_739_39e-07,
            -3.523_387_7e-06,
            -4.391_506_54e-06,
            0.000_218_580_87,
            -0.001_253_725_03,
            -0.004_177_681_64,
            0.246_640_727,
            1.501_409_41,
        ] {
            p = c + p * w;
        }
        p * y
    } else {
        let w = w.sqrt() - 3.0;
        let mut p = -0.000_200_214_257;
        for c in [
            0.000_100_950_558,
            0.001_349_343_22,
            -0.003_673_428_44,
            0.005_739_507_73,
            -0.007_622_461_3,
            0.009_438_870_47,
            1.001_674_06,
            2.832_976_82,
        ] {
            p = c + p * w;
        }
        p * y
    };
    let two_over_sqrt_pi = 2.0 / PI.sqrt();
    for _ in 0..50 {
        // erf(x) - y, through erfc near the tails to keep relative accuracy.
        let r = if y > 0.5 {
            (1.0 - y) - libm::erfc(x)
        } else if y < -0.5 {
            libm::erfc(-x) - (1.0 + y)
        } else {
            libm::erf(x) - y
        };
        let step = r / (two_over_sqrt_pi * (-x * x).exp());
        x -= step;
        if step.abs() <= 1e-13 {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moment(grid: &GaussianGrid, k: i32) -> f64 {
        grid.integrate(|t| t.powi(k)).unwrap()
    }

    #[test]
    fn two_point_rule() {
        let g = build_grid(2).unwrap();
        assert!((g.nodes()[0] + 1.0).abs() < 1e-14);
        assert!((g.nodes()[1] - 1.0).abs() < 1e-14);
        assert!((g.weights()[0] - 0.5).abs() < 1e-14);
        assert!((g.weights()[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_order_below_two() {
        assert_eq!(build_grid(1), Err(QuadratureError::InvalidOrder(1)));
        assert_eq!(build_grid(0), Err(QuadratureError::InvalidOrder(0)));
    }

    #[test]
    fn moments() {
        for order in [3, 10, 64, 101, 201] {
            let g = build_grid(order).unwrap();
            assert!((moment(&g, 0) - 1.0).abs() < 1e-12, "order {order}");
            assert!((moment(&g, 2) - 1.0).abs() < 1e-10, "order {order}");
            assert!(moment(&g, 1).abs() < 1e-12);
        }
        let g = build_grid(64).unwrap();
        assert!((moment(&g, 4) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn odd_order_contains_origin_and_is_symmetric() {
        let g = build_grid(101).unwrap();
        assert_eq!(g.nodes()[50], 0.0);
        let n = g.order();
        for k in 0..n {
            assert_eq!(g.nodes()[k], -g.nodes()[n - 1 - k]);
            assert_eq!(g.weights()[k], g.weights()[n - 1 - k]);
        }
    }

    #[test]
    fn half_gaussian_mean() {
        // The kink at 0 limits Gauss–Hermite to roughly 1/order accuracy.
        let exact = 1.0 / (2.0 * PI).sqrt();
        let err = |order| {
            let g = build_grid(order).unwrap();
            (g.integrate(|t| if t > 0.0 { t } else { 0.0 }).unwrap() - exact).abs()
        };
        assert!(err(128) < 2e-3);
        assert!(err(512) < err(128));
    }

    #[test]
    fn non_finite_integrand_reports_node() {
        let g = build_grid(3).unwrap();
        let err = g.integrate(|t| if t > 0.5 { f64::NAN } else { 1.0 }).unwrap_err();
        match err {
            QuadratureError::NonFiniteIntegrand { node } => assert!(node > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let gl = GaussLegendre::new(8).unwrap();
        let v: f64 = gl.mapped(0.0, 2.0).map(|(x, w)| w * x.powi(5)).sum();
        assert!((v - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_erf_values() {
        assert_eq!(inverse_erf(0.0).unwrap(), 0.0);
        assert!((inverse_erf(erf(1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((SQRT_2 * inverse_erf(0.95).unwrap() - 1.959964).abs() < 1e-5);
        assert!(matches!(inverse_erf(1.0), Err(QuadratureError::Domain(_))));
        assert!(matches!(inverse_erf(-1.5), Err(QuadratureError::Domain(_))));
    }
}
