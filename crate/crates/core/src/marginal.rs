//! Kernel estimation of marginal CDFs, pseudo-observations and normal scores.

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::kernel::{bandwidth_cdf_with, KernelSpec, DEFAULT_CDF_CONST};
use crate::normal;

/// Entries of a [`UniformMatrix`] are clamped into `[UNIFORM_FLOOR, 1 - UNIFORM_FLOOR]`.
pub const UNIFORM_FLOOR: f64 = 1e-6;

/// n × d matrix of values in (0, 1); rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformMatrix {
    values: Array2<f64>,
}

impl UniformMatrix {
    /// Accepts values in [0, 1] and clamps them into
    /// `[1e-6, 1 - 1e-6]`. Non-finite or out-of-range entries are an error.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let mut values = values;
        for (idx, x) in values.indexed_iter_mut() {
            if !(0.0..=1.0).contains(x) {
                return Err(Error::Domain(format!(
                    "entry {:?} = {x} is not in [0, 1]",
                    idx
                )));
            }
            *x = x.clamp(UNIFORM_FLOOR, 1.0 - UNIFORM_FLOOR);
        }
        Ok(UniformMatrix { values })
    }

    /// Row-major constructor.
    pub fn from_vec(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        let arr = Array2::from_shape_vec((n, d), values).map_err(|_| Error::LengthMismatch {
            expected: n * d,
            actual: len,
        })?;
        UniformMatrix::new(arr)
    }

    /// Strict variant for data that claims to already be on the copula
    /// scale: every entry must lie in the open interval (0, 1).
    pub fn from_open_unit(values: Array2<f64>) -> Result<Self> {
        if let Some((idx, x)) = values.indexed_iter().find(|(_, x)| !(**x > 0.0 && **x < 1.0)) {
            return Err(Error::Domain(format!(
                "entry {:?} = {x} is not in the open interval (0, 1)",
                idx
            )));
        }
        UniformMatrix::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn view(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn column_vec(&self, j: usize) -> Vec<f64> {
        self.values.column(j).to_vec()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<UniformMatrix> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.d()) {
            return Err(Error::Domain(format!(
                "column {bad} out of range for {} columns",
                self.d()
            )));
        }
        Ok(UniformMatrix {
            values: self.values.select(Axis(1), cols),
        })
    }
}

/// Kernel estimator of one marginal CDF,
/// F̂(x) = (1/n) Σᵢ J((x - Xᵢ) / b).
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalFit {
    /// Sorted copy of the data.
    data: Vec<f64>,
    bandwidth: f64,
    kernel: KernelSpec,
}

impl MarginalFit {
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    /// F̂(x). Points further than one bandwidth below `x` contribute one,
    /// points further above contribute zero; only the window in between is
    /// evaluated.
    pub fn eval_cdf(&self, x: f64) -> f64 {
        let r = self.kernel.radius() * self.bandwidth;
        let below = self.data.partition_point(|&xi| xi <= x - r);
        let above = self.data.partition_point(|&xi| xi < x + r);
        let window: f64 = self.data[below..above]
            .iter()
            .map(|&xi| self.kernel.integrated((x - xi) / self.bandwidth))
            .sum();
        (below as f64 + window) / self.data.len() as f64
    }
}

pub fn fit_marginal(data: &[f64], kernel: KernelSpec) -> Result<MarginalFit> {
    fit_marginal_with(data, kernel, DEFAULT_CDF_CONST)
}

pub fn fit_marginal_with(data: &[f64], kernel: KernelSpec, cdf_const: f64) -> Result<MarginalFit> {
    let bandwidth = bandwidth_cdf_with(data, cdf_const)?;
    let mut sorted = data.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(MarginalFit {
        data: sorted,
        bandwidth,
        kernel,
    })
}

/// Û_j⁽ⁱ⁾ = F̂_j(X_j⁽ⁱ⁾), column by column.
pub fn pseudo_observations(raw: &Array2<f64>, kernel: KernelSpec) -> Result<UniformMatrix> {
    pseudo_observations_with(raw, kernel, DEFAULT_CDF_CONST)
}

pub fn pseudo_observations_with(
    raw: &Array2<f64>,
    kernel: KernelSpec,
    cdf_const: f64,
) -> Result<UniformMatrix> {
    let mut out = Array2::zeros(raw.raw_dim());
    for (j, col) in raw.axis_iter(Axis(1)).enumerate() {
        let data = col.to_vec();
        let fit = fit_marginal_with(&data, kernel, cdf_const)
            .map_err(|e| Error::Degenerate(format!("column {j}: {e}")))?;
        for (o, &x) in out.column_mut(j).iter_mut().zip(&data) {
            *o = fit.eval_cdf(x);
        }
    }
    UniformMatrix::new(out)
}

/// Entrywise Φ⁻¹.
pub fn normal_scores(u: &UniformMatrix) -> Array2<f64> {
    u.view().mapv(normal::quantile)
}
