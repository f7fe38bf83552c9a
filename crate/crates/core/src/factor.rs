//! K-dimensional one-factor copula density estimator and the naive
//! multivariate KDE baseline.
//!
//! The factor estimator integrates the product of the first K fitted linking
//! densities over the latent variable,
//! ĉ₁:K(u) = ∫₀¹ ∏ⱼ ĉⱼ(uⱼ, v₀) dv₀,
//! where every link is fitted against the same proxy column.

use rayon::prelude::*;

use crate::copula_kde::{fit_pair_with, BivariateCopulaFit, ClipRegion, KdeOptions};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::marginal::UniformMatrix;
use crate::normal;
use crate::proxy::{compute_proxy_with, ProxyOptions, ProxyResult};
use crate::quadrature::QuadratureRule;
use crate::util::{ordered_product, robust_scale};

/// Default number of Gauss-Legendre nodes for the latent integral.
pub const DEFAULT_QUAD_NODES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorOptions {
    pub kde: KdeOptions,
    pub quad_nodes: usize,
    pub proxy: ProxyOptions,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions {
            kde: KdeOptions::default(),
            quad_nodes: DEFAULT_QUAD_NODES,
            proxy: ProxyOptions::default(),
        }
    }
}

/// Per-link kernel values at the quadrature nodes, with the link's anchors
/// sorted by their first coordinate so that the u-window is contiguous.
#[derive(Debug, Clone)]
struct NodeTable {
    z1_sorted: Vec<f64>,
    /// `values[m * n + i]` = K((z_v(m) - z2[order[i]]) / b2)
    values: Vec<f64>,
    /// 1 / (n · det B · φ(z_v(m)))
    node_scale: Vec<f64>,
}

impl NodeTable {
    fn build(link: &BivariateCopulaFit, quad: &QuadratureRule) -> Option<Self> {
        let bw = link.bandwidth();
        if bw.b3 != 0.0 {
            return None;
        }
        let (z1, z2) = link.scores();
        let n = z1.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| z1[a].total_cmp(&z1[b]));
        let z1_sorted = order.iter().map(|&i| z1[i]).collect();
        let clip = link.clip();
        let kernel = link.kernel();
        let mut values = Vec::with_capacity(n * quad.len());
        let mut node_scale = Vec::with_capacity(quad.len());
        for &v in quad.nodes() {
            let zv = normal::quantile(clip.clamp(v));
            values.extend(order.iter().map(|&i| kernel.eval((zv - z2[i]) / bw.b2)));
            node_scale.push(1.0 / (n as f64 * bw.det() * normal::pdf(zv)));
        }
        Some(NodeTable {
            z1_sorted,
            values,
            node_scale,
        })
    }

    /// ĉ(u, v_m) for every node m, written into `out`.
    fn link_values(&self, link: &BivariateCopulaFit, u: f64, out: &mut [f64], k1: &mut Vec<f64>) {
        let bw = link.bandwidth();
        let kernel = link.kernel();
        let zu = normal::quantile(link.clip().clamp(u));
        let r = kernel.radius() * bw.b1;
        let lo = self.z1_sorted.partition_point(|&z| z <= zu - r);
        let hi = self.z1_sorted.partition_point(|&z| z < zu + r);
        k1.clear();
        k1.extend(self.z1_sorted[lo..hi].iter().map(|&z| kernel.eval((zu - z) / bw.b1)));
        let n = self.z1_sorted.len();
        let u_scale = 1.0 / normal::pdf(zu);
        for (m, o) in out.iter_mut().enumerate() {
            let row = &self.values[m * n + lo..m * n + hi];
            let s: f64 = row.iter().zip(k1.iter()).map(|(a, b)| a * b).sum();
            *o = (s * self.node_scale[m] * u_scale).min(link.cap());
        }
    }
}

#[derive(Debug, Clone)]
pub struct FactorCopulaFit {
    links: Vec<BivariateCopulaFit>,
    quad: QuadratureRule,
    tables: Vec<Option<NodeTable>>,
    proxy: Option<ProxyResult>,
}

/// Fits the first `k` linking copulas of `u` against a proxy computed from
/// all d columns.
pub fn fit_factor(u: &UniformMatrix, k: usize) -> Result<FactorCopulaFit> {
    fit_factor_with(u, k, &FactorOptions::default())
}

pub fn fit_factor_with(u: &UniformMatrix, k: usize, opts: &FactorOptions) -> Result<FactorCopulaFit> {
    if k < 2 || k > u.d() {
        return Err(Error::Domain(format!(
            "need 2 <= k <= d, got k = {k}, d = {}",
            u.d()
        )));
    }
    let proxy = compute_proxy_with(u, opts.proxy)?;
    let links = (0..k)
        .map(|j| fit_pair_with(&u.column_vec(j), &proxy.v_hat, &opts.kde))
        .collect::<Result<Vec<_>>>()?;
    let quad = QuadratureRule::gauss_legendre(opts.quad_nodes)?;
    let mut fit = FactorCopulaFit::from_links(links, quad)?;
    fit.proxy = Some(proxy);
    Ok(fit)
}

impl FactorCopulaFit {
    /// Assembles a fit from already fitted links; they must share n.
    pub fn from_links(links: Vec<BivariateCopulaFit>, quad: QuadratureRule) -> Result<Self> {
        let first = links
            .first()
            .ok_or_else(|| Error::Domain("need at least one link".into()))?;
        if let Some(bad) = links.iter().find(|l| l.n() != first.n()) {
            return Err(Error::LengthMismatch {
                expected: first.n(),
                actual: bad.n(),
            });
        }
        let tables = links.iter().map(|l| NodeTable::build(l, &quad)).collect();
        Ok(FactorCopulaFit {
            links,
            quad,
            tables,
            proxy: None,
        })
    }

    pub fn k(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[BivariateCopulaFit] {
        &self.links
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    /// Proxy the links were fitted against, when built by [`fit_factor`].
    pub fn proxy(&self) -> Option<&ProxyResult> {
        self.proxy.as_ref()
    }

    /// Σ_m w_m ∏ⱼ ĉⱼ(uⱼ, v_m).
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.k() {
            return Err(Error::LengthMismatch {
                expected: self.k(),
                actual: u.len(),
            });
        }
        if let Some(x) = u.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
            return Err(Error::Domain(format!("u = {x} is not in (0, 1)")));
        }
        let nodes = self.quad.len();
        let mut per_link = vec![0.0; self.k() * nodes];
        let mut k1 = Vec::new();
        for (j, ((link, table), &uj)) in self.links.iter().zip(&self.tables).zip(u).enumerate() {
            let out = &mut per_link[j * nodes..(j + 1) * nodes];
            match table {
                Some(t) => t.link_values(link, uj, out, &mut k1),
                None => {
                    for (o, &v) in out.iter_mut().zip(self.quad.nodes()) {
                        *o = link.eval_density(uj, v);
                    }
                }
            }
        }
        let mut factors = vec![0.0; self.k()];
        let mut total = 0.0;
        for (m, &w) in self.quad.weights().iter().enumerate() {
            for (j, f) in factors.iter_mut().enumerate() {
                *f = per_link[j * nodes + m];
            }
            total += w * ordered_product(&mut factors);
        }
        Ok(total)
    }

    /// Evaluates many points in parallel, preserving order.
    pub fn eval_many(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.par_iter().map(|p| self.eval(p)).collect()
    }
}

/// Product-kernel KDE applied directly on the uniform scale, ignoring both
/// the boundary of the unit cube and the factor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveKdeFit {
    /// Row-major n × K.
    points: Vec<f64>,
    k: usize,
    bandwidths: Vec<f64>,
    kernel: KernelSpec,
    clip: ClipRegion,
}

/// Per-dimension bandwidths σ̂ⱼ (4 / (K + 2))^{1/(K+4)} n^{-1/(K+4)}.
pub fn fit_naive(u_sub: &UniformMatrix) -> Result<NaiveKdeFit> {
    let (n, k) = (u_sub.n(), u_sub.d());
    if k == 0 || n < k + 1 {
        return Err(Error::Degenerate(format!(
            "naive KDE needs n >= K + 1, got n = {n}, K = {k}"
        )));
    }
    let kf = k as f64;
    let factor = (4.0 / (kf + 2.0)).powf(1.0 / (kf + 4.0)) * (n as f64).powf(-1.0 / (kf + 4.0));
    let bandwidths = (0..k)
        .map(|j| {
            let s = robust_scale(&u_sub.column_vec(j));
            if s > 0.0 {
                Ok(s * factor)
            } else {
                Err(Error::Degenerate(format!("column {j} has zero scale")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    NaiveKdeFit::with_bandwidths(u_sub, bandwidths)
}

impl NaiveKdeFit {
    pub fn with_bandwidths(u_sub: &UniformMatrix, bandwidths: Vec<f64>) -> Result<Self> {
        if bandwidths.len() != u_sub.d() {
            return Err(Error::LengthMismatch {
                expected: u_sub.d(),
                actual: bandwidths.len(),
            });
        }
        if let Some(b) = bandwidths.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::Domain(format!("bandwidth {b} must be positive")));
        }
        Ok(NaiveKdeFit {
            points: u_sub.view().iter().copied().collect(),
            k: u_sub.d(),
            bandwidths,
            kernel: KernelSpec::Quartic,
            clip: ClipRegion::default(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                actual: u.len(),
            });
        }
        let x: Vec<f64> = u.iter().map(|&v| self.clip.clamp(v)).collect();
        let norm: f64 = self.bandwidths.iter().product();
        let n = self.points.len() / self.k;
        let mut sum = 0.0;
        'rows: for row in self.points.chunks_exact(self.k) {
            let mut prod = 1.0;
            for ((&p, &xj), &b) in row.iter().zip(&x).zip(&self.bandwidths) {
                let kv = self.kernel.eval((xj - p) / b);
                if kv == 0.0 {
                    continue 'rows;
                }
                prod *= kv;
            }
            sum += prod;
        }
        Ok(sum / (n as f64 * norm))
    }

    pub fn eval_many(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.par_iter().map(|p| self.eval(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{sample_one_factor, CopulaFamily, OneFactorModel};
    use ndarray::Array2;

    #[test]
    fn comonotone_columns_give_identical_links() {
        let col: Vec<f64> = (1..=60).map(|i| ((i * 37) % 61) as f64 / 61.0).collect();
        let u = UniformMatrix::new(Array2::from_shape_fn((60, 4), |(i, _)| col[i])).unwrap();
        let fit = fit_factor(&u, 2).unwrap();
        assert_eq!(fit.links()[0], fit.links()[1]);
    }

    #[test]
    fn rejects_bad_k() {
        let model = OneFactorModel::homogeneous(CopulaFamily::Independence, 3).unwrap();
        let (u, _) = sample_one_factor(&model, 50, 1).unwrap();
        assert!(fit_factor(&u, 1).is_err());
        assert!(fit_factor(&u, 4).is_err());
        let fit = fit_factor(&u, 2).unwrap();
        assert!(fit.eval(&[0.5]).is_err());
        assert!(fit.eval(&[0.5, 1.0]).is_err());
    }

    #[test]
    fn table_path_matches_direct_evaluation() {
        let model = OneFactorModel::homogeneous(CopulaFamily::clayton(2.0).unwrap(), 6).unwrap();
        let (u, _) = sample_one_factor(&model, 300, 3).unwrap();
        let fit = fit_factor_with(&u, 3, &FactorOptions { quad_nodes: 30, ..Default::default() }).unwrap();
        for p in [[0.2, 0.5, 0.7], [0.01, 0.99, 0.5], [0.0005, 0.3, 0.9995]] {
            let direct: f64 = fit
                .quadrature()
                .nodes()
                .iter()
                .zip(fit.quadrature().weights())
                .map(|(&v, &w)| w * fit.links().iter().zip(p).map(|(l, x)| l.eval_density(x, v)).product::<f64>())
                .sum();
            let fast = fit.eval(&p).unwrap();
            assert!((fast - direct).abs() <= 1e-12 * direct.abs().max(1.0), "{fast} vs {direct}");
        }
    }

    #[test]
    fn naive_kernel_at_mode() {
        let u = UniformMatrix::new(Array2::from_elem((10, 2), 0.5)).unwrap();
        assert!(fit_naive(&u).is_err());
        let b = 0.2;
        let fit = NaiveKdeFit::with_bandwidths(&u, vec![b, b]).unwrap();
        let want = (0.9375 / b).powi(2);
        assert!((fit.eval(&[0.5, 0.5]).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn naive_requires_enough_rows() {
        let u = UniformMatrix::new(Array2::from_shape_fn((3, 3), |(i, j)| (i + j + 1) as f64 / 7.0)).unwrap();
        assert!(fit_naive(&u).is_err());
    }
}
