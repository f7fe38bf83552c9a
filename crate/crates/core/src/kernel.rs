//! Kernels, integrated kernels and normal-reference bandwidth rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::robust_scale;

/// Default constant of the marginal-CDF bandwidth rule.
pub const DEFAULT_CDF_CONST: f64 = 1.587;
/// Default constant of the bivariate copula-density bandwidth rule.
pub const DEFAULT_DENSITY_CONST: f64 = 1.25;

/// Compactly supported kernel on [-1, 1].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelSpec {
    /// Biweight, K(s) = 15/16 (1 - s²)².
    #[default]
    Quartic,
}

impl KernelSpec {
    #[inline]
    pub fn eval(self, s: f64) -> f64 {
        match self {
            KernelSpec::Quartic => {
                if s.abs() <= 1.0 {
                    let t = 1.0 - s * s;
                    0.9375 * t * t
                } else {
                    0.0
                }
            }
        }
    }

    /// J(x) = ∫_{-∞}^x K(s) ds.
    #[inline]
    pub fn integrated(self, x: f64) -> f64 {
        match self {
            KernelSpec::Quartic => {
                if x <= -1.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    let x2 = x * x;
                    0.5 + 0.9375 * x * (1.0 - x2 * (2.0 / 3.0 - x2 / 5.0))
                }
            }
        }
    }

    /// Half-width of the support.
    pub fn radius(self) -> f64 {
        1.0
    }
}

/// Lower-triangular bandwidth matrix [[b1, 0], [b3, b2]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthMatrix {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl BandwidthMatrix {
    pub fn new(b1: f64, b2: f64, b3: f64) -> Result<Self> {
        let det = b1 * b2;
        if !(b1 > 0.0 && b2 > 0.0 && det.is_finite() && b3.is_finite()) {
            return Err(Error::SingularBandwidth(det));
        }
        Ok(BandwidthMatrix { b1, b2, b3 })
    }

    /// b · I₂.
    pub fn isotropic(b: f64) -> Result<Self> {
        BandwidthMatrix::new(b, b, 0.0)
    }

    pub fn det(&self) -> f64 {
        self.b1 * self.b2
    }

    /// B⁻¹ s.
    #[inline]
    pub fn solve(&self, s: [f64; 2]) -> [f64; 2] {
        let t1 = s[0] / self.b1;
        [t1, (s[1] - self.b3 * t1) / self.b2]
    }
}

/// K_B(s) = K(t₁) K(t₂) / det(B) with t = B⁻¹ s.
pub fn product_kernel_2d(kernel: KernelSpec, bw: &BandwidthMatrix, s: [f64; 2]) -> Result<f64> {
    let det = bw.det();
    if !(bw.b1 > 0.0 && bw.b2 > 0.0) {
        return Err(Error::SingularBandwidth(det));
    }
    let t = bw.solve(s);
    Ok(kernel.eval(t[0]) * kernel.eval(t[1]) / det)
}

/// Constants of the two normal-reference bandwidth rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthConstants {
    pub cdf: f64,
    pub density: f64,
}

impl Default for BandwidthConstants {
    fn default() -> Self {
        BandwidthConstants {
            cdf: DEFAULT_CDF_CONST,
            density: DEFAULT_DENSITY_CONST,
        }
    }
}

fn scale_of(data: &[f64], what: &str) -> Result<f64> {
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("{what} contains non-finite values")));
    }
    let s = robust_scale(data);
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Degenerate(format!("{what} has zero scale")))
    }
}

/// Bandwidth for kernel CDF estimation, c·σ̂·n^{-1/3} with
/// σ̂ = min(sd, IQR/1.349).
pub fn bandwidth_cdf(data: &[f64]) -> Result<f64> {
    bandwidth_cdf_with(data, DEFAULT_CDF_CONST)
}

pub fn bandwidth_cdf_with(data: &[f64], constant: f64) -> Result<f64> {
    if data.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 observations, got {}",
            data.len()
        )));
    }
    let sigma = scale_of(data, "data")?;
    Ok(constant * sigma * (data.len() as f64).powf(-1.0 / 3.0))
}

/// Isotropic bandwidth b·I₂ for bivariate normal-scores data,
/// b = c·σ̄·n^{-1/6} with σ̄ the mean of the two robust column scales.
pub fn bandwidth_copula(z1: &[f64], z2: &[f64]) -> Result<BandwidthMatrix> {
    bandwidth_copula_with(z1, z2, DEFAULT_DENSITY_CONST)
}

pub fn bandwidth_copula_with(z1: &[f64], z2: &[f64], constant: f64) -> Result<BandwidthMatrix> {
    if z1.len() != z2.len() {
        return Err(Error::LengthMismatch {
            expected: z1.len(),
            actual: z2.len(),
        });
    }
    if z1.len() < 4 {
        return Err(Error::Degenerate(format!(
            "need at least 4 observations, got {}",
            z1.len()
        )));
    }
    let sigma = 0.5 * (scale_of(z1, "first column")? + scale_of(z2, "second column")?);
    BandwidthMatrix::isotropic(constant * sigma * (z1.len() as f64).powf(-1.0 / 6.0))
}
