//! Intensity, detection and distance-error components composed by the
//! likelihoods.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::covariate::CovariateField;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Log-linear intensity coefficients: `log λ(s) = beta0 + x(s)·beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityParams {
    pub beta0: f64,
    pub beta: Vec<f64>,
}

impl IntensityParams {
    pub fn new(beta0: f64, beta: Vec<f64>) -> Self {
        Self { beta0, beta }
    }

    #[inline]
    pub fn log_intensity(&self, x: &[f64]) -> f64 {
        self.beta0 + x.iter().zip(&self.beta).map(|(a, b)| a * b).sum::<f64>()
    }
}

pub fn intensity(p: &Point, field: &CovariateField, ip: &IntensityParams) -> Result<f64> {
    if ip.beta.len() != field.n_covariates() {
        return Err(Error::invalid(format!(
            "intensity has {} coefficients but the field has {} covariates",
            ip.beta.len(),
            field.n_covariates()
        )));
    }
    let x = field.value_at(p)?;
    Ok(ip.log_intensity(&x).exp())
}

/// Probability of detecting an individual at a given distance from its
/// transect.
pub trait DetectionFunction {
    fn prob(&self, d: f64) -> f64;

    fn log_prob(&self, d: f64) -> f64 {
        self.prob(d).ln()
    }

    /// Distance beyond which detection is impossible.
    fn truncation(&self) -> f64;
}

/// Truncated half-normal detection `exp(-(d/sigma)^2)` for `d < w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    pub sigma: f64,
    pub w: f64,
}

impl DetectionParams {
    pub fn new(sigma: f64, w: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !(w > 0.0) {
            return Err(Error::invalid(format!(
                "detection needs sigma > 0 and w > 0, got sigma={sigma}, w={w}"
            )));
        }
        Ok(Self { sigma, w })
    }
}

impl DetectionFunction for DetectionParams {
    #[inline]
    fn prob(&self, d: f64) -> f64 {
        if d < self.w {
            (-(d / self.sigma).powi(2)).exp()
        } else {
            0.0
        }
    }

    #[inline]
    fn log_prob(&self, d: f64) -> f64 {
        if d < self.w {
            -(d / self.sigma).powi(2)
        } else {
            f64::NEG_INFINITY
        }
    }

    fn truncation(&self) -> f64 {
        self.w
    }
}

pub fn detection_prob(d: f64, dp: &DetectionParams) -> f64 {
    dp.prob(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorFamily {
    None,
    TruncatedNormal,
    Laplace,
}

/// How the error spread grows with the true distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadScaling {
    /// `sd = theta * d`
    #[default]
    ProportionalSd,
    /// `variance = theta * d`
    ProportionalVariance,
}

/// Conditional distribution of a recorded distance given the true one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceErrorParams {
    pub family: ErrorFamily,
    pub theta: f64,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub scaling: SpreadScaling,
}

impl DistanceErrorParams {
    pub fn new(family: ErrorFamily, theta: f64, lower: f64, upper: f64) -> Result<Self> {
        let ep = Self {
            family,
            theta,
            lower,
            upper,
            scaling: SpreadScaling::ProportionalSd,
        };
        ep.validate()?;
        Ok(ep)
    }

    pub fn with_scaling(mut self, scaling: SpreadScaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) {
            return Err(Error::invalid(format!(
                "distance error bounds need lower < upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        if self.family != ErrorFamily::None && !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::invalid(format!(
                "distance error spread theta must be positive, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Standard deviation of the recorded distance at true distance `d`.
    #[inline]
    pub fn spread(&self, d: f64) -> f64 {
        match self.scaling {
            SpreadScaling::ProportionalSd => self.theta * d,
            SpreadScaling::ProportionalVariance => (self.theta * d).sqrt(),
        }
    }

    /// Derivative of [`spread`](Self::spread) with respect to `d`.
    #[inline]
    pub(crate) fn spread_slope(&self, d: f64) -> f64 {
        match self.scaling {
            SpreadScaling::ProportionalSd => self.theta,
            SpreadScaling::ProportionalVariance => 0.5 * (self.theta / d).sqrt(),
        }
    }

    /// True distance at which the recorded distance `r` lies `s` standard
    /// deviations away, on the side given by `above` (`u > r`). `None` when
    /// no such distance exists.
    pub(crate) fn true_distance_at(&self, r: f64, s: f64, above: bool) -> Option<f64> {
        match self.scaling {
            SpreadScaling::ProportionalSd => {
                if above {
                    let den = 1.0 - self.theta * s;
                    (den > 0.0).then(|| r / den)
                } else {
                    Some(r / (1.0 + self.theta * s))
                }
            }
            SpreadScaling::ProportionalVariance => {
                // |u - r| = s sqrt(theta u); solve for t = sqrt(u)
                let a = s * self.theta.sqrt();
                let disc = (a * a + 4.0 * r).sqrt();
                let t = if above { 0.5 * (a + disc) } else { 0.5 * (disc - a) };
                Some(t * t)
            }
        }
    }

    /// Standardized distribution: normal or unit-variance Laplace.
    pub(crate) fn std_cdf(&self, z: f64) -> f64 {
        match self.family {
            ErrorFamily::TruncatedNormal | ErrorFamily::None => normal_cdf(z),
            ErrorFamily::Laplace => {
                if z < 0.0 {
                    0.5 * (SQRT_2 * z).exp()
                } else {
                    1.0 - 0.5 * (-SQRT_2 * z).exp()
                }
            }
        }
    }

    fn std_pdf(&self, z: f64) -> f64 {
        match self.family {
            ErrorFamily::TruncatedNormal | ErrorFamily::None => {
                (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
            }
            ErrorFamily::Laplace => (-SQRT_2 * z.abs()).exp() / SQRT_2,
        }
    }

    /// Probability that an untruncated recorded distance falls in
    /// `[lower, upper]` given the true distance.
    pub(crate) fn normalizer(&self, true_d: f64) -> f64 {
        let sd = self.spread(true_d);
        self.std_cdf((self.upper - true_d) / sd) - self.std_cdf((self.lower - true_d) / sd)
    }
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Density of a recorded distance given the true distance, renormalized to
/// `[lower, upper]`. Recorded values outside the bounds have density zero.
pub fn error_density(recorded: f64, true_d: f64, ep: &DistanceErrorParams) -> Result<f64> {
    ep.validate()?;
    if ep.family == ErrorFamily::None {
        return Err(Error::Degenerate(
            "the 'none' distance-error family has no density".into(),
        ));
    }
    if !(true_d > 0.0) {
        return Err(Error::Degenerate(format!(
            "error spread is zero at true distance {true_d}"
        )));
    }
    if recorded < ep.lower || recorded > ep.upper {
        return Ok(0.0);
    }
    let sd = ep.spread(true_d);
    let z = ep.normalizer(true_d);
    if z <= 0.0 {
        return Ok(0.0);
    }
    Ok(ep.std_pdf((recorded - true_d) / sd) / sd / z)
}
