//! Parametric bivariate linking copulas and the one-factor model built from
//! them. These are the data-generating process and the ground truth for the
//! simulation study; the kernel estimators never look at the family.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::UniformMatrix;
use crate::quadrature::QuadratureRule;
use crate::util::ordered_product;

const BISECT_LO: f64 = 1e-12;
const BISECT_HI: f64 = 1.0 - 1e-12;
const BISECT_TOL: f64 = 1e-10;
const BISECT_MAX_ITER: usize = 200;

/// Bivariate copula family with its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopulaFamily {
    Independence,
    /// Gumbel copula, θ ≥ 1 (θ = 1 is independence).
    Gumbel { theta: f64 },
    /// Clayton copula, θ > 0.
    Clayton { theta: f64 },
}

/// Serialized form of a family: `{"family": "gumbel", "theta": 1.4}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl TryFrom<&FamilySpec> for CopulaFamily {
    type Error = Error;

    fn try_from(spec: &FamilySpec) -> Result<Self> {
        let theta = || {
            spec.theta
                .ok_or_else(|| Error::Parameter(format!("family `{}` needs theta", spec.family)))
        };
        match spec.family.to_ascii_lowercase().as_str() {
            "independence" => Ok(CopulaFamily::Independence),
            "gumbel" => CopulaFamily::gumbel(theta()?),
            "clayton" => CopulaFamily::clayton(theta()?),
            other => Err(Error::Parameter(format!("unknown copula family `{other}`"))),
        }
    }
}

impl From<CopulaFamily> for FamilySpec {
    fn from(fam: CopulaFamily) -> Self {
        FamilySpec {
            family: fam.name().to_string(),
            theta: fam.theta(),
        }
    }
}

impl CopulaFamily {
    pub fn gumbel(theta: f64) -> Result<Self> {
        let fam = CopulaFamily::Gumbel { theta };
        fam.validate()?;
        Ok(fam)
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        let fam = CopulaFamily::Clayton { theta };
        fam.validate()?;
        Ok(fam)
    }

    pub fn name(&self) -> &'static str {
        match self {
            CopulaFamily::Independence => "independence",
            CopulaFamily::Gumbel { .. } => "gumbel",
            CopulaFamily::Clayton { .. } => "clayton",
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match *self {
            CopulaFamily::Independence => None,
            CopulaFamily::Gumbel { theta } | CopulaFamily::Clayton { theta } => Some(theta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CopulaFamily::Independence => Ok(()),
            CopulaFamily::Gumbel { theta } if theta.is_finite() && theta >= 1.0 => Ok(()),
            CopulaFamily::Clayton { theta } if theta.is_finite() && theta > 0.0 => Ok(()),
            CopulaFamily::Gumbel { theta } => {
                Err(Error::Parameter(format!("Gumbel needs theta >= 1, got {theta}")))
            }
            CopulaFamily::Clayton { theta } => {
                Err(Error::Parameter(format!("Clayton needs theta > 0, got {theta}")))
            }
        }
    }

    /// Population Kendall's τ.
    pub fn kendall_tau(&self) -> f64 {
        match *self {
            CopulaFamily::Independence => 0.0,
            CopulaFamily::Gumbel { theta } => 1.0 - 1.0 / theta,
            CopulaFamily::Clayton { theta } => theta / (theta + 2.0),
        }
    }

    /// Copula CDF C(u, v).
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        self.check(u, v)?;
        Ok(match *self {
            CopulaFamily::Independence => u * v,
            CopulaFamily::Gumbel { theta } => {
                let a = (-u.ln()).powf(theta) + (-v.ln()).powf(theta);
                (-a.powf(1.0 / theta)).exp()
            }
            CopulaFamily::Clayton { theta } => {
                (u.powf(-theta) + v.powf(-theta) - 1.0).powf(-1.0 / theta)
            }
        })
    }

    /// Copula density c(u, v).
    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        self.check(u, v)?;
        Ok(self.density_unchecked(u, v))
    }

    pub(crate) fn density_unchecked(&self, u: f64, v: f64) -> f64 {
        match *self {
            CopulaFamily::Independence => 1.0,
            CopulaFamily::Gumbel { theta } => {
                let x = -u.ln();
                let y = -v.ln();
                let a = x.powf(theta) + y.powf(theta);
                let a_root = a.powf(1.0 / theta);
                let c = (-a_root).exp();
                c / (u * v)
                    * (x * y).powf(theta - 1.0)
                    * a.powf(2.0 / theta - 2.0)
                    * (1.0 + (theta - 1.0) / a_root)
            }
            CopulaFamily::Clayton { theta } => {
                let s = u.powf(-theta) + v.powf(-theta) - 1.0;
                (1.0 + theta) * (u * v).powf(-theta - 1.0) * s.powf(-1.0 / theta - 2.0)
            }
        }
    }

    /// Conditional CDF h(u | v) = ∂C(u, v)/∂v.
    pub fn h_function(&self, u: f64, v: f64) -> Result<f64> {
        self.check(u, v)?;
        Ok(self.conditional(v).h(u))
    }

    /// Solves h(u | v) = w for u.
    ///
    /// Clayton has a closed form; Gumbel is bisected on `[1e-12, 1 - 1e-12]`
    /// until the residual falls below 1e-10 (or the bracket reaches machine
    /// resolution), with at most 200 halvings.
    pub fn h_inverse(&self, w: f64, v: f64) -> Result<f64> {
        self.check(w, v)?;
        self.conditional(v).invert(w, v)
    }

    fn conditional(&self, v: f64) -> Conditional {
        match *self {
            CopulaFamily::Independence => Conditional::Independence,
            CopulaFamily::Gumbel { theta } => {
                let y = -v.ln();
                Conditional::Gumbel {
                    theta,
                    y_pow: y.powf(theta),
                    // ∂C/∂v = C · A^{1/θ-1} · y^{θ-1} / v
                    scale: y.powf(theta - 1.0) / v,
                }
            }
            CopulaFamily::Clayton { theta } => Conditional::Clayton {
                theta,
                v_pow: v.powf(-theta),
                scale: v.powf(-theta - 1.0),
            },
        }
    }

    fn check(&self, u: f64, v: f64) -> Result<()> {
        self.validate()?;
        for (name, x) in [("u", u), ("v", v)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Domain(format!("{name} = {x} is not in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// h(· | v) with the v-dependent pieces evaluated once.
enum Conditional {
    Independence,
    Gumbel { theta: f64, y_pow: f64, scale: f64 },
    Clayton { theta: f64, v_pow: f64, scale: f64 },
}

impl Conditional {
    fn h(&self, u: f64) -> f64 {
        match *self {
            Conditional::Independence => u,
            Conditional::Gumbel { theta, y_pow, scale } => {
                let a = (-u.ln()).powf(theta) + y_pow;
                let a_root = a.powf(1.0 / theta);
                ((-a_root).exp() * a_root / a * scale).clamp(0.0, 1.0)
            }
            Conditional::Clayton { theta, v_pow, scale } => {
                let s = u.powf(-theta) + v_pow - 1.0;
                (scale * s.powf(-1.0 / theta - 1.0)).clamp(0.0, 1.0)
            }
        }
    }

    fn invert(&self, w: f64, v: f64) -> Result<f64> {
        match *self {
            Conditional::Independence => Ok(w),
            Conditional::Clayton { theta, v_pow, .. } => {
                let inner = (w.powf(-theta / (theta + 1.0)) - 1.0) * v_pow + 1.0;
                Ok(inner.powf(-1.0 / theta))
            }
            Conditional::Gumbel { .. } => self.bisect(w, v),
        }
    }

    fn bisect(&self, w: f64, v: f64) -> Result<f64> {
        let (mut lo, mut hi) = (BISECT_LO, BISECT_HI);
        if self.h(lo) >= w {
            return Ok(lo);
        }
        if self.h(hi) <= w {
            return Ok(hi);
        }
        for _ in 0..BISECT_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            let r = self.h(mid) - w;
            if r.abs() <= BISECT_TOL || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if r < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::Convergence {
            iterations: BISECT_MAX_ITER,
            w,
            v,
        })
    }
}

/// One-factor copula model: d observed variables, each linked to a common
/// latent uniform V₀ through its own bivariate copula.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFactorModel {
    links: Vec<CopulaFamily>,
}

impl OneFactorModel {
    pub fn new(links: Vec<CopulaFamily>) -> Result<Self> {
        if links.len() < 2 {
            return Err(Error::Domain(format!(
                "a one-factor model needs d >= 2 variables, got {}",
                links.len()
            )));
        }
        // Every supported family is stochastically increasing on its
        // parameter range, so validation is all that is left to check.
        for link in &links {
            link.validate()?;
        }
        Ok(OneFactorModel { links })
    }

    /// All d links share one family.
    pub fn homogeneous(family: CopulaFamily, d: usize) -> Result<Self> {
        OneFactorModel::new(vec![family; d])
    }

    pub fn d(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[CopulaFamily] {
        &self.links
    }

    /// Quadrature rule suited to integrating products of this model's link
    /// densities over v₀. Gumbel densities carry `ln v` terms at both ends of
    /// the interval, which plain Gauss-Legendre resolves slowly; those models
    /// get the endpoint-smoothed rule.
    pub fn reference_rule(&self, nodes: usize) -> Result<QuadratureRule> {
        let has_gumbel = self
            .links
            .iter()
            .any(|l| matches!(l, CopulaFamily::Gumbel { theta } if *theta > 1.0));
        if has_gumbel {
            QuadratureRule::smoothed_gauss_legendre(nodes, 2)
        } else {
            QuadratureRule::gauss_legendre(nodes)
        }
    }
}

/// Draws `n` observations from the one-factor model by conditional inversion.
///
/// Per row the stream yields V₀ first, then one W per variable in column
/// order; U_j = h_j⁻¹(W_j | V₀). Returns the observed matrix and the latent
/// V₀ vector.
pub fn sample_one_factor(
    model: &OneFactorModel,
    n: usize,
    seed: u64,
) -> Result<(UniformMatrix, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let d = model.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * d);
    let mut latent = Vec::with_capacity(n);
    for _ in 0..n {
        let v0: f64 = rng.sample(Open01);
        latent.push(v0);
        for link in model.links() {
            let w: f64 = rng.sample(Open01);
            values.push(link.conditional(v0).invert(w, v0)?);
        }
    }
    let matrix = UniformMatrix::from_vec(n, d, values)?;
    Ok((matrix, latent))
}

/// Density of the first K = `u.len()` variables of the model,
/// ∫₀¹ ∏ⱼ c_j(u_j, v₀) dv₀, by the given quadrature rule.
pub fn true_factor_density(model: &OneFactorModel, u: &[f64], quad: &QuadratureRule) -> Result<f64> {
    let k = u.len();
    if k == 0 || k > model.d() {
        return Err(Error::Domain(format!(
            "evaluation point has {k} coordinates, model has {} variables",
            model.d()
        )));
    }
    for &x in u {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("u = {x} is not in (0, 1)")));
        }
    }
    let links = &model.links()[..k];
    let mut factors = vec![0.0; k];
    let mut total = 0.0;
    for (&v, &w) in quad.nodes().iter().zip(quad.weights()) {
        for ((f, link), &uj) in factors.iter_mut().zip(links).zip(u) {
            *f = link.density_unchecked(uj, v);
        }
        total += w * ordered_product(&mut factors);
    }
    Ok(total)
}
