//! Bivariate copulas coupling the two membership draws of a node pair.
//!
//! A copula is a joint CDF on the unit square with uniform margins. Pushing
//! its two coordinates through the stick intervals of two membership vectors
//! correlates the pair's communities while leaving each node's marginal
//! membership untouched.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{
    bivariate_normal_cdf, normal_cdf, normal_quantile, sample_exponential, sample_positive_stable,
    sample_standard_normal, sample_uniform_open,
};

/// Negative rectangle masses smaller than this are rounding noise.
pub const MASS_ROUNDOFF: f64 = 1e-12;

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;
const GUMBEL_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaFamily {
    Independence,
    Gumbel,
    Gaussian,
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CopulaFamily::Independence => "independence",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Gaussian => "gaussian",
        })
    }
}

/// Prior over a copula parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThetaPrior {
    /// `θ − 1 ~ Exponential(rate)`; Gumbel only.
    ShiftedExponential { rate: f64 },
    /// Uniform on `[lower, upper]`, which must sit inside the family domain.
    Uniform { lower: f64, upper: f64 },
}

/// A copula family with its current parameter and the settings used to
/// update that parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CopulaParts", into = "CopulaParts")]
pub struct Copula {
    family: CopulaFamily,
    theta: Option<f64>,
    prior: Option<ThetaPrior>,
    proposal_scale: f64,
}

impl Copula {
    pub fn independence() -> Self {
        Self { family: CopulaFamily::Independence, theta: None, prior: None, proposal_scale: 0.0 }
    }

    /// Gumbel copula, `θ ∈ [1, ∞)`. Default prior `θ − 1 ~ Exp(0.5)`.
    pub fn gumbel(theta: f64) -> Result<Self> {
        let copula = Self {
            family: CopulaFamily::Gumbel,
            theta: Some(theta),
            prior: Some(ThetaPrior::ShiftedExponential { rate: 0.5 }),
            proposal_scale: 0.2,
        };
        copula.validate()?;
        Ok(copula)
    }

    /// Gaussian copula with correlation `θ ∈ (−1, 1)`. Default prior uniform.
    pub fn gaussian(rho: f64) -> Result<Self> {
        let copula = Self {
            family: CopulaFamily::Gaussian,
            theta: Some(rho),
            prior: Some(ThetaPrior::Uniform { lower: -1.0, upper: 1.0 }),
            proposal_scale: 0.1,
        };
        copula.validate()?;
        Ok(copula)
    }

    /// Build from loose parts, as read from a configuration file.
    pub fn from_parts(
        family: CopulaFamily,
        theta: Option<f64>,
        prior: Option<ThetaPrior>,
        proposal_scale: Option<f64>,
    ) -> Result<Self> {
        let mut copula = match family {
            CopulaFamily::Independence => {
                if theta.is_some() || prior.is_some() {
                    return Err(Error::config("the independence copula takes no parameter"));
                }
                Self::independence()
            }
            CopulaFamily::Gumbel => Self::gumbel(theta.unwrap_or(1.0))?,
            CopulaFamily::Gaussian => Self::gaussian(theta.unwrap_or(0.0))?,
        };
        if let Some(prior) = prior {
            copula.prior = Some(prior);
        }
        if let Some(scale) = proposal_scale {
            copula.proposal_scale = scale;
        }
        copula.validate()?;
        Ok(copula)
    }

    pub fn with_prior(mut self, prior: ThetaPrior) -> Result<Self> {
        self.prior = Some(prior);
        self.validate()?;
        Ok(self)
    }

    pub fn with_proposal_scale(mut self, scale: f64) -> Result<Self> {
        self.proposal_scale = scale;
        self.validate()?;
        Ok(self)
    }

    /// Same family and settings, new parameter.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        let mut copula = self.clone();
        copula.theta = Some(theta);
        copula.validate()?;
        Ok(copula)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.family, self.theta) {
            (CopulaFamily::Independence, None) => {}
            (CopulaFamily::Independence, Some(_)) => {
                return Err(Error::config("the independence copula takes no parameter"))
            }
            (CopulaFamily::Gumbel, Some(t)) if t.is_finite() && t >= 1.0 => {}
            (CopulaFamily::Gaussian, Some(t)) if t > -1.0 && t < 1.0 => {}
            (family, theta) => {
                return Err(Error::config(format!("{family} copula parameter {theta:?} outside its domain")))
            }
        }
        if !(self.proposal_scale.is_finite() && self.proposal_scale >= 0.0) {
            return Err(Error::config(format!("proposal_scale must be >= 0, got {}", self.proposal_scale)));
        }
        match (self.family, self.prior) {
            (_, None) => Ok(()),
            (CopulaFamily::Independence, Some(_)) => {
                Err(Error::config("the independence copula takes no prior"))
            }
            (CopulaFamily::Gumbel, Some(ThetaPrior::ShiftedExponential { rate })) => {
                if rate.is_finite() && rate > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config(format!("exponential prior rate must be positive, got {rate}")))
                }
            }
            (CopulaFamily::Gaussian, Some(ThetaPrior::ShiftedExponential { .. })) => {
                Err(Error::config("shifted-exponential prior applies to the gumbel copula only"))
            }
            (family, Some(ThetaPrior::Uniform { lower, upper })) => {
                let (lo, hi) = match family {
                    CopulaFamily::Gumbel => (1.0, f64::INFINITY),
                    _ => (-1.0, 1.0),
                };
                if lower < upper && lower >= lo && upper <= hi && upper.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config(format!(
                        "uniform prior [{lower}, {upper}] must be a finite interval inside the {family} domain"
                    )))
                }
            }
        }
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn prior(&self) -> Option<ThetaPrior> {
        self.prior
    }

    pub fn proposal_scale(&self) -> f64 {
        self.proposal_scale
    }

    /// True when the parameter has a random-walk move at all.
    pub fn is_updatable(&self) -> bool {
        self.family != CopulaFamily::Independence && self.proposal_scale > 0.0
    }

    /// True when this copula is exactly the product copula `C(u, v) = uv`.
    pub fn is_independent(&self) -> bool {
        match self.family {
            CopulaFamily::Independence => true,
            CopulaFamily::Gumbel => self.theta == Some(1.0),
            CopulaFamily::Gaussian => self.theta == Some(0.0),
        }
    }

    /// Copula CDF `C(u, v)`.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("copula arguments must lie in [0, 1]², got ({u}, {v})")));
        }
        Ok(self.cdf_unchecked(u, v))
    }

    pub(crate) fn cdf_unchecked(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v;
        }
        if v >= 1.0 {
            return u;
        }
        match self.family {
            CopulaFamily::Independence => u * v,
            CopulaFamily::Gumbel => {
                let theta = self.theta.unwrap_or(1.0);
                gumbel_from_logs(-u.ln(), -v.ln(), theta)
            }
            CopulaFamily::Gaussian => {
                let rho = self.theta.unwrap_or(0.0);
                bivariate_normal_cdf(normal_quantile(u), normal_quantile(v), rho)
            }
        }
    }

    /// `C` on the grid `us × vs`, row-major in `us`. Each axis is transformed
    /// once, which is what makes the per-pair tables affordable.
    pub fn cdf_grid(&self, us: &[f64], vs: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.reserve(us.len() * vs.len());
        match self.family {
            CopulaFamily::Independence => {
                for &u in us {
                    out.extend(vs.iter().map(|&v| clamp_unit(u) * clamp_unit(v)));
                }
            }
            CopulaFamily::Gumbel => {
                let theta = self.theta.unwrap_or(1.0);
                let tv: Vec<f64> = vs.iter().map(|&v| -v.ln()).collect();
                for &u in us {
                    let a = -u.ln();
                    for (&v, &b) in vs.iter().zip(&tv) {
                        out.push(if u <= 0.0 || v <= 0.0 {
                            0.0
                        } else if u >= 1.0 {
                            v.min(1.0)
                        } else if v >= 1.0 {
                            u
                        } else {
                            gumbel_from_logs(a, b, theta)
                        });
                    }
                }
            }
            CopulaFamily::Gaussian => {
                let rho = self.theta.unwrap_or(0.0);
                let zv: Vec<f64> = vs.iter().map(|&v| normal_quantile(v)).collect();
                for &u in us {
                    let zu = normal_quantile(u);
                    for (&v, &z) in vs.iter().zip(&zv) {
                        out.push(if u <= 0.0 || v <= 0.0 {
                            0.0
                        } else if u >= 1.0 {
                            v.min(1.0)
                        } else if v >= 1.0 {
                            u
                        } else {
                            bivariate_normal_cdf(zu, z, rho)
                        });
                    }
                }
            }
        }
    }

    /// Probability the copula assigns to `[u_lo, u_hi] × [v_lo, v_hi]`.
    pub fn rectangle_mass(&self, u_lo: f64, u_hi: f64, v_lo: f64, v_hi: f64) -> Result<f64> {
        if !(0.0 <= u_lo && u_lo <= u_hi && u_hi <= 1.0 && 0.0 <= v_lo && v_lo <= v_hi && v_hi <= 1.0) {
            return Err(Error::domain(format!(
                "rectangle [{u_lo}, {u_hi}] × [{v_lo}, {v_hi}] is not inside the unit square"
            )));
        }
        let mass = self.cdf_unchecked(u_hi, v_hi) + self.cdf_unchecked(u_lo, v_lo)
            - self.cdf_unchecked(u_hi, v_lo)
            - self.cdf_unchecked(u_lo, v_hi);
        settle_mass(mass)
    }

    /// Log copula density `ln c(u, v)` on the open square.
    pub fn log_density(&self, u: f64, v: f64) -> f64 {
        if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
            return f64::NEG_INFINITY;
        }
        match self.family {
            CopulaFamily::Independence => 0.0,
            CopulaFamily::Gumbel => {
                let theta = self.theta.unwrap_or(1.0);
                if theta == 1.0 {
                    return 0.0;
                }
                let x = -u.ln();
                let y = -v.ln();
                let ln_a = gumbel_ln_norm(x, y, theta);
                let a = ln_a.exp();
                -a + (theta - 1.0) * (x.ln() + y.ln()) + x + y + (1.0 - 2.0 * theta) * ln_a
                    + (a + theta - 1.0).ln()
            }
            CopulaFamily::Gaussian => {
                let rho = self.theta.unwrap_or(0.0);
                let a = normal_quantile(u);
                let b = normal_quantile(v);
                let det = 1.0 - rho * rho;
                -0.5 * det.ln() - (rho * rho * (a * a + b * b) - 2.0 * rho * a * b) / (2.0 * det)
            }
        }
    }

    /// Draw `(u, v)` from the copula; both coordinates lie strictly inside `(0, 1)`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self.family {
            CopulaFamily::Independence => (sample_uniform_open(rng), sample_uniform_open(rng)),
            CopulaFamily::Gumbel => {
                let theta = self.theta.unwrap_or(1.0);
                if theta == 1.0 {
                    return (sample_uniform_open(rng), sample_uniform_open(rng));
                }
                // Marshall–Olkin: a positive stable frailty with Laplace
                // transform exp(−t^(1/θ)) mixes two unit exponentials.
                let alpha = 1.0 / theta;
                let frailty = sample_positive_stable(alpha, rng).expect("alpha in (0, 1)");
                let mut coord = || {
                    let e = sample_exponential(rng);
                    open_unit((-(e / frailty).powf(alpha)).exp())
                };
                let u = coord();
                let v = coord();
                (u, v)
            }
            CopulaFamily::Gaussian => {
                let rho = self.theta.unwrap_or(0.0);
                let z1 = sample_standard_normal(rng);
                let z2 = sample_standard_normal(rng);
                let y = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
                (open_unit(normal_cdf(z1)), open_unit(normal_cdf(y)))
            }
        }
    }

    /// Symmetric random-walk proposal on the unconstrained scale
    /// (`ln(θ − 1)` for Gumbel, `atanh θ` for Gaussian).
    pub fn propose_theta<R: Rng + ?Sized>(&self, current: f64, rng: &mut R) -> f64 {
        if self.proposal_scale == 0.0 || self.family == CopulaFamily::Independence {
            return current;
        }
        let step = self.proposal_scale * sample_standard_normal(rng);
        match self.family {
            CopulaFamily::Gumbel => 1.0 + ((current - 1.0).max(GUMBEL_FLOOR).ln() + step).exp(),
            CopulaFamily::Gaussian => (current.atanh() + step).tanh(),
            CopulaFamily::Independence => current,
        }
    }

    /// `ln |dθ/dφ|` for the proposal's unconstrained coordinate `φ`; needed in
    /// the acceptance ratio because the walk is symmetric in `φ`, not `θ`.
    pub fn log_jacobian(&self, theta: f64) -> f64 {
        match self.family {
            CopulaFamily::Gumbel => (theta - 1.0).max(GUMBEL_FLOOR).ln(),
            CopulaFamily::Gaussian => (1.0 - theta * theta).ln(),
            CopulaFamily::Independence => 0.0,
        }
    }

    /// Log prior density of `θ`; `-inf` outside the family domain or the
    /// prior's support.
    pub fn theta_log_prior(&self, theta: f64) -> f64 {
        let in_domain = match self.family {
            CopulaFamily::Independence => return 0.0,
            CopulaFamily::Gumbel => theta.is_finite() && theta >= 1.0,
            CopulaFamily::Gaussian => theta > -1.0 && theta < 1.0,
        };
        if !in_domain {
            return f64::NEG_INFINITY;
        }
        match self.prior {
            None => 0.0,
            Some(ThetaPrior::ShiftedExponential { rate }) => rate.ln() - rate * (theta - 1.0),
            Some(ThetaPrior::Uniform { lower, upper }) => {
                if (lower..=upper).contains(&theta) {
                    -(upper - lower).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

/// Flat, file-friendly form of a [`Copula`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaParts {
    pub family: CopulaFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<ThetaPrior>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal_scale: Option<f64>,
}

impl TryFrom<CopulaParts> for Copula {
    type Error = Error;

    fn try_from(parts: CopulaParts) -> Result<Self> {
        Copula::from_parts(parts.family, parts.theta, parts.prior, parts.proposal_scale)
    }
}

impl From<Copula> for CopulaParts {
    fn from(copula: Copula) -> Self {
        let parametric = copula.family != CopulaFamily::Independence;
        CopulaParts {
            family: copula.family,
            theta: copula.theta,
            prior: copula.prior,
            proposal_scale: parametric.then_some(copula.proposal_scale),
        }
    }
}

/// `exp(−(x^θ + y^θ)^{1/θ})` for `x = −ln u`, `y = −ln v`, factored through
/// the larger of the two so large `θ` neither underflows nor overflows.
fn gumbel_from_logs(x: f64, y: f64, theta: f64) -> f64 {
    (-gumbel_ln_norm(x, y, theta).exp()).exp()
}

/// `ln (x^θ + y^θ)^{1/θ}` for nonnegative `x`, `y`.
fn gumbel_ln_norm(x: f64, y: f64, theta: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == 0.0 {
        return f64::NEG_INFINITY;
    }
    hi.ln() + (lo / hi).powf(theta).ln_1p() / theta
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn open_unit(x: f64) -> f64 {
    x.clamp(f64::MIN_POSITIVE, BELOW_ONE)
}

/// Clamp tiny negative round-off to zero; anything more negative means the
/// caller's arithmetic is broken.
pub(crate) fn settle_mass(mass: f64) -> Result<f64> {
    if mass >= 0.0 {
        Ok(mass.min(1.0))
    } else if mass > -MASS_ROUNDOFF {
        Ok(0.0)
    } else {
        Err(Error::consistency(format!("negative rectangle mass {mass:e}")))
    }
}
