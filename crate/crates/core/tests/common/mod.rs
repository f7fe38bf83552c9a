#![allow(dead_code)]

use factorkde::UniformMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn gumbel_cdf(u: f64, v: f64, t: f64) -> f64 {
    (-((-u.ln()).powf(t) + (-v.ln()).powf(t)).powf(1.0 / t)).exp()
}

pub fn clayton_cdf(u: f64, v: f64, t: f64) -> f64 {
    (u.powf(-t) + v.powf(-t) - 1.0).powf(-1.0 / t)
}

/// Central difference of C in v.
pub fn fd_h(c: impl Fn(f64, f64) -> f64, u: f64, v: f64) -> f64 {
    let e = 1e-4;
    (c(u, v + e) - c(u, v - e)) / (2.0 * e)
}

/// Kendall's tau by pair counting; fine for the sizes used in tests.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]) * (y[i] - y[j]);
            s += if a > 0.0 { 1 } else if a < 0.0 { -1 } else { 0 };
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn independent_uniforms(n: usize, d: usize, seed: u64) -> UniformMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Array2::from_shape_simple_fn((n, d), || rng.random_range(1e-9..1.0));
    UniformMatrix::new(a).unwrap()
}

pub fn uniform_points(m: usize, k: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m).map(|_| (0..k).map(|_| rng.random_range(lo..hi)).collect()).collect()
}

/// Sup distance between the empirical CDFs of two samples.
pub fn kolmogorov(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let mut pts: Vec<f64> = sa.iter().chain(&sb).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.iter()
        .map(|&x| {
            let fa = sa.partition_point(|&v| v <= x) as f64 / sa.len() as f64;
            let fb = sb.partition_point(|&v| v <= x) as f64 / sb.len() as f64;
            (fa - fb).abs()
        })
        .fold(0.0, f64::max)
}

pub fn median(mut x: Vec<f64>) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len();
    if n % 2 == 1 {
        x[n / 2]
    } else {
        0.5 * (x[n / 2 - 1] + x[n / 2])
    }
}
