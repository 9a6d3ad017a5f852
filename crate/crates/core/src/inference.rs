//! Maximum-likelihood fitting, Wald and bootstrap intervals, AIC, and
//! abundance prediction.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::covariate::{CovariateField, GridSpec, Raster};
use crate::error::{Error, Result};
use crate::geometry::{region_nodes, StudyRegion};
use crate::likelihood::{
    Dataset, LikelihoodContext, LoglikOptions, LoglikVariant, ModelParams, QuadratureScheme,
};
use crate::model::{DetectionParams, DistanceErrorParams, IntensityParams};
use crate::optim::{hessian, nelder_mead, spd_inverse, sym_sqrt, NelderMeadOptions};
use crate::par::Execution;

/// Two-sided 95% standard normal quantile.
pub const Z_975: f64 = 1.959964;

/// Maps between the optimizer's unconstrained vector and model parameters.
///
/// The full vector is `beta0, beta1..betap, log_sigma[, log_theta]`; any
/// entry may be held fixed, in which case it is left out of the free
/// vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamLayout {
    n_covariates: usize,
    w: f64,
    error: Option<DistanceErrorParams>,
    fixed: Vec<Option<f64>>,
}

impl ParamLayout {
    pub fn new(n_covariates: usize, w: f64, error: Option<DistanceErrorParams>) -> Self {
        let n = n_covariates + 2 + usize::from(error.is_some());
        Self {
            n_covariates,
            w,
            error,
            fixed: vec![None; n],
        }
    }

    /// Names of all parameters on the optimizer scale.
    pub fn full_names(&self) -> Vec<String> {
        let mut names = vec!["beta0".to_string()];
        names.extend((1..=self.n_covariates).map(|k| format!("beta{k}")));
        names.push("log_sigma".into());
        if self.error.is_some() {
            names.push("log_theta".into());
        }
        names
    }

    pub fn free_names(&self) -> Vec<String> {
        self.full_names()
            .into_iter()
            .zip(&self.fixed)
            .filter(|(_, f)| f.is_none())
            .map(|(n, _)| n)
            .collect()
    }

    pub fn n_free(&self) -> usize {
        self.fixed.iter().filter(|f| f.is_none()).count()
    }

    /// Holds a parameter at a value given on the natural scale (`sigma`
    /// and `theta` rather than their logs).
    pub fn fix(&mut self, name: &str, value: f64) -> Result<()> {
        let (key, v) = match name {
            "sigma" | "theta" => {
                if !(value > 0.0) {
                    return Err(Error::invalid(format!("fixed {name} must be positive, got {value}")));
                }
                (format!("log_{name}"), value.ln())
            }
            _ => (name.to_string(), value),
        };
        let Some(i) = self.full_names().iter().position(|n| *n == key) else {
            return Err(Error::invalid(format!("unknown parameter '{name}'")));
        };
        self.fixed[i] = Some(v);
        Ok(())
    }

    fn is_log(&self, full_index: usize) -> bool {
        full_index > self.n_covariates
    }

    fn free_indices(&self) -> Vec<usize> {
        (0..self.fixed.len()).filter(|&i| self.fixed[i].is_none()).collect()
    }

    fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut it = free.iter();
        self.fixed
            .iter()
            .map(|f| f.unwrap_or_else(|| *it.next().expect("free vector length")))
            .collect()
    }

    fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_indices().into_iter().map(|i| full[i]).collect()
    }

    pub fn to_model(&self, free: &[f64]) -> ModelParams {
        let full = self.expand(free);
        let p = self.n_covariates;
        ModelParams {
            intensity: IntensityParams::new(full[0], full[1..=p].to_vec()),
            detection: DetectionParams {
                sigma: full[p + 1].exp(),
                w: self.w,
            },
            error: self.error.map(|mut e| {
                e.theta = full[p + 2].exp();
                e
            }),
        }
    }

    pub fn from_model(&self, m: &ModelParams) -> Vec<f64> {
        let mut full = vec![m.intensity.beta0];
        full.extend_from_slice(&m.intensity.beta);
        full.push(m.detection.sigma.ln());
        if let Some(e) = m.error {
            full.push(e.theta.ln());
        }
        for (v, f) in full.iter_mut().zip(&self.fixed) {
            if let Some(f) = f {
                *v = *f;
            }
        }
        self.restrict(&full)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitControls {
    pub optimizer: NelderMeadOptions,
    /// Parameters held fixed, by natural-scale name (`beta0`, `beta1`,
    /// `sigma`, `theta`).
    pub fixed: Vec<(String, f64)>,
    pub quadrature: QuadratureScheme,
    pub options: LoglikOptions,
    /// Truncation distance `w`.
    pub truncation: f64,
    /// Error family, bounds and scaling for the distance-error variant;
    /// `theta` here is only the starting value.
    pub error: Option<DistanceErrorParams>,
}

impl FitControls {
    pub fn new(truncation: f64) -> Self {
        Self {
            optimizer: NelderMeadOptions::default(),
            fixed: Vec::new(),
            quadrature: QuadratureScheme::default(),
            options: LoglikOptions::default(),
            truncation,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub name: String,
    /// Natural-scale estimate (`sigma`, `theta` exponentiated).
    pub estimate: f64,
    /// Standard error on the optimizer scale.
    pub se: Option<f64>,
    /// 95% Wald interval on the natural scale.
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub variant: LoglikVariant,
    pub layout: ParamLayout,
    /// Free parameters on the optimizer scale.
    pub estimates: Vec<f64>,
    /// Inverse Hessian of the negative log-likelihood, if positive definite.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub params: Vec<ParamEstimate>,
    pub loglik: f64,
    pub aic: f64,
    pub k: usize,
    pub n: usize,
    pub converged: bool,
    pub n_evals: usize,
}

impl FitResult {
    pub fn model(&self) -> ModelParams {
        self.layout.to_model(&self.estimates)
    }

    pub fn param(&self, name: &str) -> Option<&ParamEstimate> {
        self.params.iter().find(|p| p.name == name)
    }

    fn covariance_matrix(&self) -> Option<DMatrix<f64>> {
        let c = self.covariance.as_ref()?;
        let k = c.len();
        Some(DMatrix::from_fn(k, k, |i, j| c[i][j]))
    }
}

/// `estimate ± z_{0.975} se`.
pub fn wald_ci(estimate: f64, se: f64) -> (f64, f64) {
    (estimate - Z_975 * se, estimate + Z_975 * se)
}

pub fn aic(loglik: f64, k: usize) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}

/// Starting values: `beta = 0`, `beta0 = log(n / ∫q)`, `sigma` half the
/// largest recorded distance, `theta = 0.1`.
pub fn default_init(ctx: &LikelihoodContext<'_>, layout: &ParamLayout) -> Vec<f64> {
    let data = ctx.data();
    let w = ctx.truncation();
    let dmax = data.max_distance().min(w);
    let sigma = if dmax > 0.0 { dmax / 2.0 } else { w / 2.0 };
    let det = DetectionParams { sigma, w };
    let area = ctx.region_quadrature().detection_area(&det).max(f64::MIN_POSITIVE);
    let beta0 = (data.n().max(1) as f64 / area).ln();
    let model = ModelParams {
        intensity: IntensityParams::new(beta0, vec![0.0; ctx.field().n_covariates()]),
        detection: det,
        error: layout.error.map(|mut e| {
            e.theta = 0.1;
            e
        }),
    };
    layout.from_model(&model)
}

/// Builds the likelihood and maximizes it.
pub fn fit(
    data: &Dataset,
    field: &CovariateField,
    variant: LoglikVariant,
    init: Option<&[f64]>,
    controls: &FitControls,
) -> Result<FitResult> {
    let ctx = LikelihoodContext::new(
        data,
        field,
        variant,
        controls.quadrature,
        controls.options,
        controls.truncation,
    )?;
    fit_context(&ctx, init, controls)
}

/// Maximizes a prepared likelihood. `init` is on the optimizer scale for
/// the free parameters.
pub fn fit_context(
    ctx: &LikelihoodContext<'_>,
    init: Option<&[f64]>,
    controls: &FitControls,
) -> Result<FitResult> {
    let error = match ctx.variant() {
        LoglikVariant::DistanceError => Some(controls.error.ok_or_else(|| {
            Error::invalid("distance-error fits need an error family and bounds")
        })?),
        _ => None,
    };
    if ctx.data().n() == 0 {
        return Err(Error::Degenerate("no detections; the intensity cannot be estimated".into()));
    }
    let mut layout = ParamLayout::new(ctx.field().n_covariates(), ctx.truncation(), error);
    for (name, v) in &controls.fixed {
        layout.fix(name, *v)?;
    }
    let x0 = match init {
        Some(x) => {
            if x.len() != layout.n_free() || x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "initial values must be {} finite numbers ({})",
                    layout.n_free(),
                    layout.free_names().join(", ")
                )));
            }
            x.to_vec()
        }
        None => default_init(ctx, &layout),
    };

    // Surface hard errors from the first evaluation rather than letting the
    // optimizer treat them as infeasible points.
    ctx.loglik(&layout.to_model(&x0))?;
    let nll = |x: &[f64]| match ctx.loglik(&layout.to_model(x)) {
        Ok(l) => -l.value(),
        Err(_) => f64::INFINITY,
    };
    let best = nelder_mead(nll, &x0, &controls.optimizer);
    if !best.f.is_finite() {
        return Err(Error::Numerical(
            "log-likelihood is infinite at every point the optimizer visited".into(),
        ));
    }
    let covariance = hessian(nll, &best.x).and_then(|h| spd_inverse(&h));
    let names = layout.free_names();
    let free = layout.free_indices();
    let params = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let log = layout.is_log(free[j]);
            let se = covariance.as_ref().map(|c| c[(j, j)].sqrt());
            let ci = se.map(|s| {
                let (lo, hi) = wald_ci(best.x[j], s);
                if log {
                    (lo.exp(), hi.exp())
                } else {
                    (lo, hi)
                }
            });
            ParamEstimate {
                name: name.strip_prefix("log_").unwrap_or(name).to_string(),
                estimate: if log { best.x[j].exp() } else { best.x[j] },
                se,
                ci,
            }
        })
        .collect();
    let k = layout.n_free();
    let loglik = -best.f;
    Ok(FitResult {
        variant: ctx.variant(),
        layout,
        estimates: best.x,
        covariance: covariance.map(|c| c.row_iter().map(|r| r.iter().copied().collect()).collect()),
        params,
        loglik,
        aic: aic(loglik, k),
        k,
        n: ctx.data().n(),
        converged: best.converged,
        n_evals: best.evals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// One row per draw.
    pub draws: Vec<Vec<f64>>,
    /// Percentile 95% interval per output dimension.
    pub ci: Vec<(f64, f64)>,
    pub b: usize,
}

/// Parametric bootstrap of a derived quantity: draws from the normal
/// approximation to the MLE's sampling distribution, maps each draw
/// through `g` and takes percentiles. Draw `i` uses its own random stream
/// of `seed`, so results do not depend on execution order.
pub fn bootstrap_derived<G>(fit: &FitResult, g: G, b: usize, seed: u64, exec: Execution) -> Result<BootstrapResult>
where
    G: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    if b < 100 {
        return Err(Error::invalid(format!("bootstrap needs at least 100 draws, got {b}")));
    }
    let cov = fit
        .covariance_matrix()
        .ok_or_else(|| Error::Numerical("fit has no covariance matrix; cannot bootstrap".into()))?;
    let root = sym_sqrt(&cov);
    let mean = DVector::from_column_slice(&fit.estimates);
    let k = mean.len();
    let draws = exec.map(b, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let z = DVector::from_iterator(k, (0..k).map(|_| StandardNormal.sample(&mut rng)));
        let theta = &mean + &root * z;
        g(theta.as_slice())
    });
    let dim = draws.first().map_or(0, Vec::len);
    if draws.iter().any(|d| d.len() != dim) {
        return Err(Error::invalid("derived quantity changed dimension between draws"));
    }
    let ci = (0..dim)
        .map(|j| {
            let mut col: Vec<f64> = draws.iter().map(|d| d[j]).collect();
            col.sort_by(f64::total_cmp);
            percentile_ci(&col)
        })
        .collect();
    Ok(BootstrapResult { draws, ci, b })
}

/// 2.5% and 97.5% order statistics of sorted values.
fn percentile_ci(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len();
    let lo = ((0.025 * n as f64).floor() as usize).min(n - 1);
    let hi = ((0.975 * n as f64).ceil() as usize).clamp(1, n) - 1;
    (sorted[lo], sorted[hi])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbundanceEstimate {
    pub estimate: f64,
    pub ci: Option<(f64, f64)>,
    pub b: usize,
}

/// Expected number of individuals in `sub_region`, `∫ λ`, at the MLE, with
/// a bootstrap interval when `b > 0`.
pub fn abundance_estimate(
    fit: &FitResult,
    field: &CovariateField,
    sub_region: &StudyRegion,
    region_q: usize,
    b: usize,
    seed: u64,
    exec: Execution,
) -> Result<AbundanceEstimate> {
    let nodes = region_nodes(sub_region, region_q)?;
    let p = field.n_covariates();
    let mut cov = Vec::with_capacity(nodes.len() * p);
    let mut buf = vec![0.0; p];
    for n in &nodes {
        field.value_into(&n.point, &mut buf)?;
        cov.extend_from_slice(&buf);
    }
    let layout = &fit.layout;
    let integral = |ip: &IntensityParams| -> f64 {
        nodes
            .iter()
            .zip(cov.chunks_exact(p))
            .map(|(n, x)| n.weight * ip.log_intensity(x).exp())
            .sum()
    };
    let estimate = integral(&fit.model().intensity);
    if !estimate.is_finite() {
        return Err(Error::NonFinite("abundance integral overflowed".into()));
    }
    let ci = if b > 0 {
        let boot = bootstrap_derived(fit, |x| vec![integral(&layout.to_model(x).intensity)], b, seed, exec)?;
        Some(boot.ci[0])
    } else {
        None
    };
    Ok(AbundanceEstimate { estimate, ci, b })
}

/// Intensity at the MLE at each cell centre of `grid`; cells where the
/// field has no data are left as nodata.
pub fn predict_surface(fit: &FitResult, field: &CovariateField, grid: GridSpec) -> Result<Raster> {
    let ip = fit.model().intensity;
    let mut buf = vec![0.0; field.n_covariates()];
    let mut values = Vec::with_capacity(grid.len());
    for row in 0..grid.nrows {
        for col in 0..grid.ncols {
            let c = grid.cell_center(row, col);
            match field.value_into(&c, &mut buf) {
                Ok(()) => values.push(ip.log_intensity(&buf).exp()),
                Err(Error::NoData { .. }) => values.push(f64::NAN),
                Err(e) => return Err(e),
            }
        }
    }
    Raster::new(grid, values)
}
