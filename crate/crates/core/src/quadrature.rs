//! Gauss-Legendre rules on the unit interval.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    /// Gauss-Legendre nodes mapped affinely onto [0, 1].
    GaussLegendre,
    /// Gauss-Legendre in t after the substitution v = I_t(p + 1, p + 1)
    /// (regularized incomplete beta, a polynomial), which flattens the
    /// integrand at both endpoints to order `p`.
    SmoothedGaussLegendre { order: u32 },
}

/// Nodes and positive weights on [0, 1]; the weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        let (x, w) = legendre_nodes(n)?;
        Ok(QuadratureRule {
            kind: QuadratureKind::GaussLegendre,
            nodes: x.iter().map(|&x| 0.5 * (x + 1.0)).collect(),
            weights: w.iter().map(|&w| 0.5 * w).collect(),
        })
    }

    pub fn smoothed_gauss_legendre(n: usize, order: u32) -> Result<Self> {
        if n <= order as usize {
            return Err(Error::Domain(format!(
                "a smoothing order of {order} needs more than {order} nodes"
            )));
        }
        let base = QuadratureRule::gauss_legendre(n)?;
        let p = order as i32;
        // 1 / B(p+1, p+1) = (2p+1)! / (p!)²
        let norm = (1..=(2 * p + 1)).map(f64::from).product::<f64>()
            / (1..=p).map(f64::from).product::<f64>().powi(2);
        let (nodes, weights) = base
            .nodes
            .iter()
            .zip(&base.weights)
            .map(|(&t, &w)| {
                let jac = norm * (t * (1.0 - t)).powi(p);
                (regularized_beta_sym(t, order), w * jac)
            })
            .unzip();
        Ok(QuadratureRule {
            kind: QuadratureKind::SmoothedGaussLegendre { order },
            nodes,
            weights,
        })
    }

    /// Builds the rule named by `kind` with `n` nodes.
    pub fn new(kind: QuadratureKind, n: usize) -> Result<Self> {
        match kind {
            QuadratureKind::GaussLegendre => QuadratureRule::gauss_legendre(n),
            QuadratureKind::SmoothedGaussLegendre { order } => {
                QuadratureRule::smoothed_gauss_legendre(n, order)
            }
        }
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫₀¹ f.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// ∫ₐᵇ f, mapping the rule affinely onto [a, b].
    pub fn integrate_over(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        len * self.integrate(|t| f(a + len * t))
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
fn legendre_nodes(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Domain("quadrature needs at least one node".into()));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-15 {
                dp = legendre_with_derivative(n, z).1;
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// P_n(z) and P_n'(z) by the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// I_t(p + 1, p + 1) = Σ_{j=p+1}^{2p+1} C(2p+1, j) t^j (1-t)^{2p+1-j}.
fn regularized_beta_sym(t: f64, p: u32) -> f64 {
    let m = 2 * p + 1;
    let mut binom = 1.0;
    let mut acc = 0.0;
    for j in 0..=m {
        if j > p {
            acc += binom * t.powi(j as i32) * (1.0 - t).powi((m - j) as i32);
        }
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    acc
}
