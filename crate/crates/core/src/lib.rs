//! Non-parametric estimation of one-factor copula densities.
//!
//! The pipeline maps data to pseudo-observations with kernel CDFs, builds a
//! proxy for the latent factor from all columns, fits each linking copula
//! against the proxy with a transformation kernel estimator, and integrates
//! the product of the first K linking densities over the latent variable.
//! A Monte Carlo harness compares the result with a naive multivariate KDE.

pub mod copula_kde;
pub mod error;
pub mod factor;
pub mod families;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod marginal;
pub mod metrics;
pub mod normal;
pub mod proxy;
pub mod quadrature;
mod util;

pub use copula_kde::{fit_pair, fit_pair_with, integrate_density, BivariateCopulaFit, ClipRegion, KdeOptions};
pub use error::{Error, Result};
pub use factor::{fit_factor, fit_factor_with, fit_naive, FactorCopulaFit, FactorOptions, NaiveKdeFit};
pub use families::{sample_one_factor, true_factor_density, CopulaFamily, FamilySpec, OneFactorModel};
pub use harness::{run_replication, run_study, Estimator, ExperimentConfig, McReport};
pub use kernel::{bandwidth_cdf, bandwidth_copula, BandwidthMatrix, KernelSpec};
pub use marginal::{fit_marginal, normal_scores, pseudo_observations, MarginalFit, UniformMatrix};
pub use metrics::{aggregate, replication_errors, rmsd, scree_eigenvalues, ErrorSummary, ReplicationErrors};
pub use proxy::{compute_proxy, compute_proxy_with, ProxyOptions, ProxyResult};
pub use quadrature::{QuadratureKind, QuadratureRule};
