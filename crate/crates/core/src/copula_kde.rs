//! Transformation kernel estimator of bivariate copula densities.
//!
//! Both columns are mapped to normal scores, a product-kernel density
//! estimate f̂ is formed there, and the copula density is recovered as
//! ĉ(u, v) = f̂(Φ⁻¹(u), Φ⁻¹(v)) / (φ(Φ⁻¹(u)) φ(Φ⁻¹(v))),
//! capped at K₀ and evaluated on a clip rectangle.
//!
//! The same fit serves every stage of the linking-copula estimator; only
//! the columns passed in differ (true latent, proxy, pseudo-observations).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{bandwidth_copula_with, BandwidthMatrix, KernelSpec, DEFAULT_DENSITY_CONST};
use crate::normal;
use crate::quadrature::QuadratureRule;

pub const DEFAULT_CAP: f64 = 200.0;
pub const DEFAULT_CLIP: ClipRegion = ClipRegion { lo: 0.001, hi: 0.999 };

/// Square [lo, hi]² on which densities are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipRegion {
    pub lo: f64,
    pub hi: f64,
}

impl ClipRegion {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return Err(Error::Domain(format!("invalid clip region [{lo}, {hi}]")));
        }
        Ok(ClipRegion { lo, hi })
    }

    #[inline]
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

impl Default for ClipRegion {
    fn default() -> Self {
        DEFAULT_CLIP
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeOptions {
    pub kernel: KernelSpec,
    pub density_const: f64,
    pub cap: f64,
    pub clip: ClipRegion,
}

impl Default for KdeOptions {
    fn default() -> Self {
        KdeOptions {
            kernel: KernelSpec::Quartic,
            density_const: DEFAULT_DENSITY_CONST,
            cap: DEFAULT_CAP,
            clip: DEFAULT_CLIP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BivariateCopulaFit {
    z1: Vec<f64>,
    z2: Vec<f64>,
    bandwidth: BandwidthMatrix,
    kernel: KernelSpec,
    cap: f64,
    clip: ClipRegion,
}

/// Fits with the default bandwidth rule, cap and clip region.
pub fn fit_pair(u_col: &[f64], v_col: &[f64]) -> Result<BivariateCopulaFit> {
    fit_pair_with(u_col, v_col, &KdeOptions::default())
}

pub fn fit_pair_with(u_col: &[f64], v_col: &[f64], opts: &KdeOptions) -> Result<BivariateCopulaFit> {
    if u_col.len() != v_col.len() {
        return Err(Error::LengthMismatch {
            expected: u_col.len(),
            actual: v_col.len(),
        });
    }
    let z1 = scores(u_col, "u")?;
    let z2 = scores(v_col, "v")?;
    let bandwidth = bandwidth_copula_with(&z1, &z2, opts.density_const)?;
    BivariateCopulaFit::from_scores(z1, z2, bandwidth, opts)
}

fn scores(col: &[f64], name: &str) -> Result<Vec<f64>> {
    col.iter()
        .map(|&x| {
            if x > 0.0 && x < 1.0 {
                Ok(normal::quantile(x))
            } else {
                Err(Error::Domain(format!("{name} column value {x} is not in (0, 1)")))
            }
        })
        .collect()
}

impl BivariateCopulaFit {
    /// Builds a fit from normal-scores anchors and an explicit bandwidth.
    pub fn from_scores(
        z1: Vec<f64>,
        z2: Vec<f64>,
        bandwidth: BandwidthMatrix,
        opts: &KdeOptions,
    ) -> Result<Self> {
        if z1.len() != z2.len() {
            return Err(Error::LengthMismatch {
                expected: z1.len(),
                actual: z2.len(),
            });
        }
        if z1.is_empty() {
            return Err(Error::Degenerate("no data points".into()));
        }
        if !(opts.cap > 0.0) {
            return Err(Error::Domain(format!("cap must be positive, got {}", opts.cap)));
        }
        let bandwidth = BandwidthMatrix::new(bandwidth.b1, bandwidth.b2, bandwidth.b3)?;
        Ok(BivariateCopulaFit {
            z1,
            z2,
            bandwidth,
            kernel: opts.kernel,
            cap: opts.cap,
            clip: ClipRegion::new(opts.clip.lo, opts.clip.hi)?,
        })
    }

    pub fn n(&self) -> usize {
        self.z1.len()
    }

    pub fn bandwidth(&self) -> BandwidthMatrix {
        self.bandwidth
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn clip(&self) -> ClipRegion {
        self.clip
    }

    /// Normal-score anchors of the first and second coordinate.
    pub fn scores(&self) -> (&[f64], &[f64]) {
        (&self.z1, &self.z2)
    }

    /// ĉ(u, v) after clamping (u, v) into the clip region.
    pub fn eval_density(&self, u: f64, v: f64) -> f64 {
        let zu = normal::quantile(self.clip.clamp(u));
        let zv = normal::quantile(self.clip.clamp(v));
        self.density_at_scores(zu, zv)
    }

    /// Density at normal scores that are already inside the clip region.
    fn density_at_scores(&self, zu: f64, zv: f64) -> f64 {
        let k = self.kernel;
        let bw = &self.bandwidth;
        let r1 = k.radius() * bw.b1;
        let mut sum = 0.0;
        for (&a, &b) in self.z1.iter().zip(&self.z2) {
            let s1 = zu - a;
            if s1.abs() >= r1 {
                continue;
            }
            let t = bw.solve([s1, zv - b]);
            sum += k.eval(t[0]) * k.eval(t[1]);
        }
        let f = sum / (self.n() as f64 * bw.det());
        (f / (normal::pdf(zu) * normal::pdf(zv))).min(self.cap)
    }

    /// Evaluates on a `size × size` grid spanning the clip region; returns
    /// (u, v, density) triples with u varying slowest.
    pub fn eval_grid(&self, size: usize) -> Vec<(f64, f64, f64)> {
        let ticks = grid_ticks(self.clip, size);
        let points: Vec<(f64, f64)> = ticks
            .iter()
            .flat_map(|&u| ticks.iter().map(move |&v| (u, v)))
            .collect();
        points
            .into_par_iter()
            .map(|(u, v)| (u, v, self.eval_density(u, v)))
            .collect()
    }
}

fn grid_ticks(clip: ClipRegion, size: usize) -> Vec<f64> {
    match size {
        0 => vec![],
        1 => vec![0.5 * (clip.lo + clip.hi)],
        _ => (0..size)
            .map(|i| clip.lo + (clip.hi - clip.lo) * i as f64 / (size - 1) as f64)
            .collect(),
    }
}

/// ∫∫ ĉ over the clip region by a tensor-product rule.
///
/// The integral is taken in normal-score coordinates, ∫∫ ĉ(Φ(z₁), Φ(z₂))
/// φ(z₁) φ(z₂) dz₁ dz₂ over [Φ⁻¹(lo), Φ⁻¹(hi)]², where the integrand is the
/// bounded kernel estimate itself.
pub fn integrate_density(fit: &BivariateCopulaFit, quad: &QuadratureRule) -> f64 {
    let zlo = normal::quantile(fit.clip.lo);
    let zhi = normal::quantile(fit.clip.hi);
    let len = zhi - zlo;
    let axis: Vec<(f64, f64)> = quad
        .nodes()
        .iter()
        .zip(quad.weights())
        .map(|(&t, &w)| {
            let z = zlo + len * t;
            (z, w * len * normal::pdf(z))
        })
        .collect();
    axis.par_iter()
        .map(|&(z1, w1)| {
            w1 * axis
                .iter()
                .map(|&(z2, w2)| w2 * fit.density_at_scores(z1, z2))
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}
