//! Proxy for the latent factor built from all observed columns.
//!
//! The row mean of normal scores Z̄ is mapped to the uniform scale by its
//! empirical CDF (rank / (n + 1)) and back to the normal scale, giving
//! Ŵ = Φ⁻¹(F̂(Z̄)).

use crate::error::{Error, Result};
use crate::marginal::UniformMatrix;
use crate::normal;
use crate::util::{average_ranks, ordered_sum, ordinal_ranks, pearson};

#[derive(Debug, Clone, PartialEq)]
pub struct ProxyResult {
    /// Ŵ on the normal scale.
    pub w_hat: Vec<f64>,
    /// V̂₀ = F̂(Z̄) on the uniform scale, a permutation of {k / (n + 1)}.
    pub v_hat: Vec<f64>,
    /// Row means of the normal scores.
    pub z_bar: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProxyOptions {
    /// Flip the proxy when its Spearman correlation with the first column is
    /// negative. Off by default: links are assumed positively dependent.
    pub auto_orient: bool,
}

pub fn compute_proxy(u: &UniformMatrix) -> Result<ProxyResult> {
    compute_proxy_with(u, ProxyOptions::default())
}

pub fn compute_proxy_with(u: &UniformMatrix, opts: ProxyOptions) -> Result<ProxyResult> {
    let (n, d) = (u.n(), u.d());
    if n < 2 || d < 2 {
        return Err(Error::Domain(format!(
            "proxy needs n >= 2 and d >= 2, got n = {n}, d = {d}"
        )));
    }

    let mut scratch = vec![0.0; d];
    let z_bar: Vec<f64> = u
        .view()
        .rows()
        .into_iter()
        .map(|row| {
            for (s, &x) in scratch.iter_mut().zip(row) {
                *s = normal::quantile(x);
            }
            // sorted summation keeps Z̄ invariant to column order
            ordered_sum(&mut scratch) / d as f64
        })
        .collect();

    let (ranks, tied) = ordinal_ranks(&z_bar);
    if tied {
        log::warn!("proxy: tied row means, ties broken by row order");
    }
    let denom = (n + 1) as f64;
    let mut v_hat: Vec<f64> = ranks.iter().map(|&r| r as f64 / denom).collect();

    if opts.auto_orient {
        let first = u.column_vec(0);
        let rho = pearson(&average_ranks(&v_hat), &average_ranks(&first));
        if rho < 0.0 {
            log::info!("proxy: Spearman rho with column 0 is {rho:.3}, flipping orientation");
            v_hat = ranks.iter().map(|&r| (n + 1 - r) as f64 / denom).collect();
        }
    }

    let w_hat = v_hat.iter().map(|&v| normal::quantile(v)).collect();
    Ok(ProxyResult { w_hat, v_hat, z_bar })
}
