//! Error metrics for the simulation study, RMSD between estimators and scree
//! eigenvalues of the rank correlation matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::UniformMatrix;
use crate::util::{average_ranks, mean, pearson, sample_std};

/// Per-replication errors over the evaluation points, e = est - true.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationErrors {
    pub rmse: f64,
    pub mae: f64,
    pub mean_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub rmse: f64,
    pub mae: f64,
    pub sd: f64,
    pub bias: f64,
}

fn check_lengths(est: &[f64], truth: &[f64]) -> Result<()> {
    if est.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: est.len(),
        });
    }
    if est.is_empty() {
        return Err(Error::Domain("need at least one evaluation point".into()));
    }
    Ok(())
}

pub fn replication_errors(est: &[f64], truth: &[f64]) -> Result<ReplicationErrors> {
    check_lengths(est, truth)?;
    let m = est.len() as f64;
    let (mut sq, mut abs, mut sum) = (0.0, 0.0, 0.0);
    for (e, t) in est.iter().zip(truth) {
        let err = e - t;
        sq += err * err;
        abs += err.abs();
        sum += err;
    }
    Ok(ReplicationErrors {
        rmse: (sq / m).sqrt(),
        mae: abs / m,
        mean_err: sum / m,
    })
}

/// Root mean squared difference between two sets of density values.
pub fn rmsd(est: &[f64], truth: &[f64]) -> Result<f64> {
    replication_errors(est, truth).map(|r| r.rmse)
}

/// Mean of the per-replication RMSE and MAE, mean of the per-replication mean
/// errors as bias and their sample standard deviation as SD. A single
/// replication gives SD 0 with a warning.
pub fn aggregate(reps: &[ReplicationErrors]) -> Result<ErrorSummary> {
    if reps.is_empty() {
        return Err(Error::Domain("no replications to aggregate".into()));
    }
    if reps.len() == 1 {
        log::warn!("aggregate: only one replication, SD reported as 0");
    }
    // sorting makes the summary independent of replication order
    let sorted = |f: fn(&ReplicationErrors) -> f64| {
        let mut v: Vec<f64> = reps.iter().map(f).collect();
        v.sort_unstable_by(f64::total_cmp);
        v
    };
    let means = sorted(|r| r.mean_err);
    Ok(ErrorSummary {
        rmse: mean(&sorted(|r| r.rmse)),
        mae: mean(&sorted(|r| r.mae)),
        sd: sample_std(&means),
        bias: mean(&means),
    })
}

/// Spearman correlation matrix of the columns, row-major d × d.
pub fn spearman_matrix(u: &UniformMatrix) -> Result<Vec<f64>> {
    let (n, d) = (u.n(), u.d());
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    let ranks: Vec<Vec<f64>> = (0..d).map(|j| average_ranks(&u.column_vec(j))).collect();
    for (j, r) in ranks.iter().enumerate() {
        if r.iter().all(|&x| x == r[0]) {
            return Err(Error::Degenerate(format!("column {j} is constant")));
        }
    }
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
        for j in i + 1..d {
            let r = pearson(&ranks[i], &ranks[j]);
            m[i * d + j] = r;
            m[j * d + i] = r;
        }
    }
    Ok(m)
}

/// Eigenvalues of the Spearman correlation matrix, descending.
pub fn scree_eigenvalues(u: &UniformMatrix) -> Result<Vec<f64>> {
    let d = u.d();
    let mut vals = symmetric_eigenvalues(spearman_matrix(u)?, d);
    vals.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// Cyclic Jacobi rotations on a symmetric row-major matrix.
fn symmetric_eigenvalues(mut a: Vec<f64>, d: usize) -> Vec<f64> {
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j] * a[i * d + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..d).map(|i| a[i * d + i]).collect()
}
