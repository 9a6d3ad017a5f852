//! Monte Carlo experiment: simulate individuals from an inhomogeneous
//! Poisson process on the unit square, thin them by detection from 16
//! point transects, and compare exact, surrogate and locus likelihoods by
//! the coverage of their 95% intervals for the covariate effect.

use std::borrow::Cow;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::covariate::{CovariateField, GridSpec, Interpolation, Raster, SurrogateSpec};
use crate::error::{Error, Result};
use crate::geometry::{perpendicular_distance, Point, StudyRegion, Transect};
use crate::inference::{default_init, fit_context, FitControls, FitResult, ParamLayout};
use crate::likelihood::{
    Dataset, DetectionRecord, LikelihoodContext, LoglikOptions, LoglikVariant, QuadratureScheme,
    RegionQuadrature,
};
use crate::model::{DetectionFunction, DetectionParams, IntensityParams};
use crate::par::Execution;

/// Standard-normal frequency pairs and uniform phases of the default field.
const FEATURES: [[f64; 3]; 40] = [
    [0.0012301533574825742, 0.2987455375084699, 5.830203364835209],
    [-0.2741378553622176, -0.8905918387572742, 3.4703696720770587],
    [-0.45467078517172255, -0.9916465549964624, 1.1344448054287666],
    [0.060143602597438485, 1.3402152455545335, 5.554693288326078],
    [-0.49220651855132963, -0.6204748998199404, 4.0311139117560435],
    [0.4898420501851982, 0.35688700816006075, 3.5794946949581643],
    [0.10541424899789856, -0.9304680447082047, 2.364286203241914],
    [-0.02925182246327349, 0.6953031944582878, 2.5821081907575194],
    [-1.344214547285082, -0.45761576104021817, 1.5047551023505747],
    [-1.901222739800844, -1.289537739784976, 0.23912098456951467],
    [-1.8417350377917323, -0.23509113107468127, 5.5054451409865806],
    [-1.2674464814437032, 0.2712643588217015, 2.938835626010251],
    [0.15675108662422516, -0.18693094462995438, 3.440893437394107],
    [-2.516759710820513, -0.5386928958466366, 2.024211774523456],
    [-0.048500945401071985, 0.11330898600330756, 4.720713697350363],
    [-1.5301357655053935, -0.47775327603393064, 0.15831660840852302],
    [-0.9785190780566395, -0.8088372394255993, 2.338509036130319],
    [1.0608986233860787, -0.8075346753318965, 0.1906965237428253],
    [-0.0325217049455206, 0.8843898673831739, 0.7721538509429268],
    [-0.583600432743302, -0.11170194958415963, 6.0767715825134045],
    [0.11046414324948059, 0.06378177425506196, 4.132832554617712],
    [-1.2250558264176934, 0.0761402303770081, 2.6905871603512113],
    [1.3588234217415376, -1.5471446781284823, 3.290756150803781],
    [0.8593826880215982, 0.11935402569658124, 5.484021995225233],
    [-0.6414703941072214, 2.000416546342423, 2.1627394054439173],
    [0.7622597120847118, -1.1992889021052233, 3.7089076268833403],
    [0.07451622877146342, 0.5766895836701853, 4.2957156093153035],
    [-0.1887821253507493, 0.682910267195206, 2.2331306217633324],
    [-0.06651732014941557, 0.6672475608343279, 3.261591983330766],
    [1.438522591656152, -0.6756622510056528, 4.808191114973239],
    [0.20313861038960904, -0.46330757653841514, 5.712542107257041],
    [0.12726841122583082, -1.18719452785014, 0.9491522860813241],
    [-0.5793015965026732, -0.1961959728044967, 5.864847011182533],
    [0.8987638721004078, 1.145222007454132, 0.03253977359937787],
    [-1.323527792484255, -0.7946423659870495, 4.731097187242171],
    [0.6469034225734218, -1.9924197841744944, 5.092690271324156],
    [-0.46316986495236695, -0.09728692567008902, 0.8593138792026999],
    [1.2570149772868198, 0.6894039005707556, 2.6320492645416116],
    [-0.32721342022219785, -0.3685758940999591, 5.122406267484387],
    [-0.25019540051792494, 1.5235294004561601, 0.08966852934231824],
];

/// Stationary rough surface on the unit square: a sum of 40 random cosine
/// features with frequencies `2π · frequency · z` for the fixed standard
/// normal draws `z` above, so its correlation length is about
/// `1 / (2π · frequency)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FourierField {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    /// Raster resolution used when sampling the surface.
    pub cell_size: f64,
}

impl Default for FourierField {
    fn default() -> Self {
        Self {
            offset: -1.0,
            amplitude: 1.2,
            frequency: 12.0,
            cell_size: 0.0025,
        }
    }
}

impl FourierField {
    pub fn value(&self, p: &Point) -> f64 {
        let k = 2.0 * std::f64::consts::PI * self.frequency;
        let s: f64 = FEATURES
            .iter()
            .map(|[zx, zy, ph]| (k * (zx * p.x + zy * p.y) + ph).cos())
            .sum();
        self.offset + self.amplitude * (2.0 / FEATURES.len() as f64).sqrt() * s
    }

    /// Samples the surface on cell centres covering the unit square.
    pub fn raster(&self) -> Result<Raster> {
        let n = (1.0 / self.cell_size).round() as usize;
        if n == 0 || ((n as f64) * self.cell_size - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "field cell size {} must divide the unit square",
                self.cell_size
            )));
        }
        let grid = GridSpec::new(Point::new(0.0, 0.0), self.cell_size, n, n)?;
        Ok(Raster::from_fn(grid, |p| self.value(&p)))
    }

    pub fn field(&self) -> Result<CovariateField> {
        Ok(CovariateField::single(self.raster()?, Interpolation::Bilinear))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// The lowest-covariate cells of an 8×8 grid of candidate sites.
    Convenience,
    /// Uniform in `[w, 1 - w]²`, rejecting sites within `2w` of another.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub field: FourierField,
    pub placement: Placement,
    pub n_transects: usize,
    pub true_params: IntensityParams,
    pub detection: DetectionParams,
    pub replicates: usize,
    pub seed: u64,
    /// Radius of the buffer-average surrogate (model 3).
    pub buffer_radius: f64,
    pub quadrature: QuadratureScheme,
    pub execution: Execution,
}

impl ScenarioSpec {
    /// Scenario 1 (`Convenience`) or 2 (`Random`) with the default design.
    pub fn standard(placement: Placement) -> Self {
        Self {
            field: FourierField::default(),
            placement,
            n_transects: 16,
            true_params: IntensityParams::new(9.0, vec![1.0]),
            detection: DetectionParams { sigma: 0.025, w: 0.06 },
            replicates: 250,
            seed: 2024,
            buffer_radius: 0.06,
            quadrature: QuadratureScheme {
                region_q: 160_000,
                locus_q: 64,
                error_q: 32,
            },
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.true_params.beta.len() != 1 {
            return Err(Error::invalid("the experiment uses exactly one covariate"));
        }
        if self.replicates == 0 || self.n_transects == 0 {
            return Err(Error::invalid("replicates and n_transects must be positive"));
        }
        if self.placement == Placement::Convenience && self.n_transects > 64 {
            return Err(Error::invalid("convenience placement has only 64 candidate sites"));
        }
        let w = self.detection.w;
        if !(w > 0.0 && w < 0.25) {
            return Err(Error::invalid(format!("truncation w={w} must be in (0, 0.25)")));
        }
        self.quadrature.validate()
    }
}

/// Convenience sites: candidate cell centres sorted by covariate value,
/// taking the lowest ones that keep a separation greater than `2w`.
pub fn convenience_sites(field: &CovariateField, n: usize, w: f64) -> Result<Vec<Point>> {
    let mut cands = Vec::with_capacity(64);
    for j in 0..8 {
        for i in 0..8 {
            let p = Point::new(0.0625 + 0.125 * i as f64, 0.0625 + 0.125 * j as f64);
            cands.push((field.value_at(&p)?[0], p));
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Point> = Vec::with_capacity(n);
    for (_, p) in cands {
        if out.iter().all(|q| q.distance(&p) > 2.0 * w) {
            out.push(p);
            if out.len() == n {
                return Ok(out);
            }
        }
    }
    Err(Error::invalid(format!("cannot place {n} separated convenience sites")))
}

pub fn random_sites(rng: &mut impl Rng, n: usize, w: f64) -> Result<Vec<Point>> {
    let mut out: Vec<Point> = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n {
        tries += 1;
        if tries > 1_000_000 {
            return Err(Error::invalid(format!("cannot place {n} separated random sites")));
        }
        let p = Point::new(rng.gen_range(w..1.0 - w), rng.gen_range(w..1.0 - w));
        if out.iter().all(|q| q.distance(&p) > 2.0 * w) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Inhomogeneous Poisson process on `region` by thinning a homogeneous one
/// on its bounding box.
pub fn simulate_ippp(
    field: &CovariateField,
    ip: &IntensityParams,
    region: &StudyRegion,
    seed: u64,
) -> Result<Vec<Point>> {
    simulate_ippp_with(field, ip, region, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn simulate_ippp_with(
    field: &CovariateField,
    ip: &IntensityParams,
    region: &StudyRegion,
    rng: &mut impl Rng,
) -> Result<Vec<Point>> {
    let log_max = ip.beta0 + field.max_linear(&ip.beta);
    let lmax = log_max.exp();
    if lmax == 0.0 {
        return Ok(Vec::new());
    }
    if !lmax.is_finite() {
        return Err(Error::NonFinite(format!("maximum intensity exp({log_max}) is not finite")));
    }
    let (lo, hi) = region.bbox();
    let mean = lmax * (hi.x - lo.x) * (hi.y - lo.y);
    let n = Poisson::new(mean)
        .map_err(|e| Error::Numerical(format!("Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let mut out = Vec::new();
    let mut buf = vec![0.0; field.n_covariates()];
    for _ in 0..n {
        let p = Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        let u: f64 = rng.gen();
        if !region.contains(&p) {
            continue;
        }
        field.value_into(&p, &mut buf)?;
        if u < (ip.log_intensity(&buf) - log_max).exp() {
            out.push(p);
        }
    }
    Ok(out)
}

/// Bernoulli detection of each individual from its nearest transect.
/// Records carry both the exact location and the recorded distance.
pub fn simulate_detection(
    points: &[Point],
    transects: &[Transect],
    dp: &DetectionParams,
    region: &StudyRegion,
    seed: u64,
) -> Result<Dataset> {
    simulate_detection_with(points, transects, dp, region, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn simulate_detection_with(
    points: &[Point],
    transects: &[Transect],
    dp: &DetectionParams,
    region: &StudyRegion,
    rng: &mut impl Rng,
) -> Result<Dataset> {
    if transects.is_empty() {
        return Err(Error::invalid("detection needs at least one transect"));
    }
    let mut records = Vec::new();
    for p in points {
        let (t, d) = transects
            .iter()
            .map(|t| (t, perpendicular_distance(p, t)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        let u: f64 = rng.gen();
        if u < dp.prob(d) {
            records.push(DetectionRecord::new(t.id(), d, Some(*p)));
        }
    }
    Dataset::new(records, transects.to_vec(), region.clone())
}

pub const MODEL_LABELS: [&str; 4] = ["exact", "transect_center", "buffer_average", "locus"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub beta1: f64,
    pub ci: Option<(f64, f64)>,
    pub converged: bool,
}

impl ModelOutcome {
    fn usable(&self) -> bool {
        self.converged && self.ci.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub n: usize,
    pub models: Vec<ModelOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub label: String,
    /// Share of usable replicates whose interval covers the true `beta1`.
    pub cp: f64,
    pub used: usize,
    /// Replicates dropped for non-convergence or a singular Hessian.
    pub excluded: usize,
    pub mean_beta1: f64,
    pub median_beta1: f64,
    pub mean_ci_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub placement: Placement,
    pub replicates: usize,
    pub true_beta1: f64,
    pub mean_n: f64,
    pub models: Vec<ModelSummary>,
    /// Mean interval length of the locus model over the exact model.
    pub efficiency: f64,
    pub per_replicate: Vec<ReplicateResult>,
}

/// Simulates one replicate and fits the four models to it.
pub fn run_replicate(spec: &ScenarioSpec, field: &CovariateField, replicate: usize) -> Result<ReplicateResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(replicate as u64);
    let w = spec.detection.w;
    let sites = match spec.placement {
        Placement::Convenience => convenience_sites(field, spec.n_transects, w)?,
        Placement::Random => random_sites(&mut rng, spec.n_transects, w)?,
    };
    let transects = sites
        .into_iter()
        .enumerate()
        .map(|(k, p)| Transect::point(format!("t{}", k + 1), p))
        .collect::<Result<Vec<_>>>()?;
    let region = StudyRegion::unit_square();
    let points = simulate_ippp_with(field, &spec.true_params, &region, &mut rng)?;
    let data = simulate_detection_with(&points, &transects, &spec.detection, &region, &mut rng)?;

    let options = LoglikOptions {
        execution: Execution::Sequential,
        ..Default::default()
    };
    let mut controls = FitControls::new(w);
    controls.quadrature = spec.quadrature;
    controls.options = options;
    let quad = RegionQuadrature::new(&data, field, spec.quadrature.region_q, w)?;
    let variants = [
        LoglikVariant::Exact,
        LoglikVariant::Surrogate { spec: SurrogateSpec::TransectCenter },
        LoglikVariant::Surrogate {
            spec: SurrogateSpec::BufferAverage { radius: spec.buffer_radius },
        },
        LoglikVariant::Locus,
    ];
    let mut models = Vec::with_capacity(4);
    for v in variants {
        let ctx = LikelihoodContext::with_region(&data, field, v, spec.quadrature, options, Cow::Borrowed(&quad))?;
        let init = default_init(&ctx, &ParamLayout::new(1, w, None));
        let outcome = match fit_context(&ctx, Some(&init), &controls) {
            Ok(f) => outcome_of(&f),
            Err(Error::Numerical(_)) => ModelOutcome {
                beta1: f64::NAN,
                ci: None,
                converged: false,
            },
            Err(e) => return Err(e),
        };
        models.push(outcome);
    }
    Ok(ReplicateResult {
        replicate,
        n: data.n(),
        models,
    })
}

fn outcome_of(f: &FitResult) -> ModelOutcome {
    let b = f.param("beta1").expect("beta1 is free");
    ModelOutcome {
        beta1: b.estimate,
        ci: b.ci,
        converged: f.converged,
    }
}

pub fn run_experiment(spec: &ScenarioSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let field = spec.field.field()?;
    let per_replicate = spec
        .execution
        .map(spec.replicates, |r| run_replicate(spec, &field, r))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(spec, per_replicate))
}

pub fn summarize(spec: &ScenarioSpec, per_replicate: Vec<ReplicateResult>) -> ExperimentReport {
    let truth = spec.true_params.beta[0];
    let n = per_replicate.len().max(1) as f64;
    let mean_n = per_replicate.iter().map(|r| r.n as f64).sum::<f64>() / n;
    let models: Vec<ModelSummary> = MODEL_LABELS
        .iter()
        .enumerate()
        .map(|(m, label)| {
            let used: Vec<&ModelOutcome> = per_replicate
                .iter()
                .map(|r| &r.models[m])
                .filter(|o| o.usable())
                .collect();
            let k = used.len().max(1) as f64;
            let covered = used
                .iter()
                .filter(|o| {
                    let (lo, hi) = o.ci.unwrap();
                    lo <= truth && truth <= hi
                })
                .count();
            let mut betas: Vec<f64> = used.iter().map(|o| o.beta1).collect();
            betas.sort_by(f64::total_cmp);
            ModelSummary {
                label: label.to_string(),
                cp: covered as f64 / k,
                used: used.len(),
                excluded: per_replicate.len() - used.len(),
                mean_beta1: betas.iter().sum::<f64>() / k,
                median_beta1: median(&betas),
                mean_ci_length: used
                    .iter()
                    .map(|o| {
                        let (lo, hi) = o.ci.unwrap();
                        hi - lo
                    })
                    .sum::<f64>()
                    / k,
            }
        })
        .collect();
    let efficiency = models[3].mean_ci_length / models[0].mean_ci_length;
    ExperimentReport {
        placement: spec.placement,
        replicates: per_replicate.len(),
        true_beta1: truth,
        mean_n,
        models,
        efficiency,
        per_replicate,
    }
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

impl ExperimentReport {
    /// One row per model: CP, estimates and interval length.
    pub fn summary_csv(&self) -> String {
        let mut s = String::from(
            "model,label,mean_n,cp,used,excluded,mean_beta1,median_beta1,mean_ci_length,efficiency\n",
        );
        for (m, row) in self.models.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                m + 1,
                row.label,
                self.mean_n,
                row.cp,
                row.used,
                row.excluded,
                row.mean_beta1,
                row.median_beta1,
                row.mean_ci_length,
                self.efficiency
            );
        }
        s
    }

    /// Long format: one row per replicate and model.
    pub fn replicates_csv(&self) -> String {
        let mut s = String::from("replicate,n,model,label,beta1,lower,upper,converged\n");
        for r in &self.per_replicate {
            for (m, o) in r.models.iter().enumerate() {
                let (lo, hi) = o.ci.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.replicate,
                    r.n,
                    m + 1,
                    MODEL_LABELS[m],
                    o.beta1,
                    lo,
                    hi,
                    o.converged
                );
            }
        }
        s
    }
}
