//! Command implementations behind the `distfit` binary.

pub mod config;
pub mod error;
pub mod io;
pub mod output;
pub mod report;

use std::path::{Path, PathBuf};

use distfit_core::inference::{abundance_estimate, bootstrap_derived, fit, predict_surface, FitResult};
use distfit_core::simulation::{
    convenience_sites, random_sites, run_experiment, simulate_detection_with, simulate_ippp_with, ScenarioSpec,
};
use distfit_core::{CovariateField, Dataset, DetectionParams, GridSpec, IntensityParams, StudyRegion, Transect};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use config::Config;
pub use error::CliError;
use output::{sha256_hex, OutputDir};
use report::{BootstrapSummary, FitReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fit,
    Simulate,
    Experiment,
    Predict,
    Abundance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Simulate => "simulate",
            Command::Experiment => "experiment",
            Command::Predict => "predict",
            Command::Abundance => "abundance",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
    pub set: Vec<String>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

/// Loads the configuration and executes one command, writing its artifacts
/// and a manifest into the output directory.
pub fn run(cmd: Command, args: &RunArgs) -> Result<(), CliError> {
    let mut cfg = Config::parse(&args.config, &args.set)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let hash = sha256_hex(serde_json::to_string(&cfg).expect("config serializes").as_bytes());
    cfg.finalize(&args.config)?;
    let mut out = OutputDir::create(&args.out)?;
    match cmd {
        Command::Fit => cmd_fit(&cfg, &mut out)?,
        Command::Simulate => cmd_simulate(&cfg, &mut out)?,
        Command::Experiment => cmd_experiment(&cfg, &mut out)?,
        Command::Predict => cmd_predict(&cfg, &mut out)?,
        Command::Abundance => cmd_abundance(&cfg, &mut out)?,
    }
    out.finish(cmd.name(), &hash, cfg.seed)
}

struct Inputs {
    data: Dataset,
    field: CovariateField,
}

fn load_inputs(cfg: &Config) -> Result<Inputs, CliError> {
    let region = io::load_region(cfg.require(&cfg.data.region, "data.region")?)?;
    let transects = io::load_transects(cfg.require(&cfg.data.transects, "data.transects")?, &region)?;
    let field = io::load_field(&cfg.data.rasters, cfg.data.interpolation)?;
    field
        .check_covers(&region)
        .map_err(|e| CliError::from_core("covariate rasters", e))?;
    let data = io::load_dataset(cfg.require(&cfg.data.observations, "data.observations")?, transects, region)?;
    Ok(Inputs { data, field })
}

fn fit_inputs(cfg: &Config, inp: &Inputs) -> Result<FitReport, CliError> {
    let controls = cfg.fit_controls()?;
    let variant = cfg.variant();
    let p = inp.field.n_covariates();
    let init = match &cfg.intensity {
        Some(ic) => {
            if ic.beta.len() != p {
                return Err(CliError::Config(format!(
                    "intensity.beta has {} values but there are {p} covariate rasters",
                    ic.beta.len()
                )));
            }
            let sigma = cfg.detection.sigma.unwrap_or(cfg.detection.w / 2.0);
            let mut x = vec![ic.beta0];
            x.extend_from_slice(&ic.beta);
            if !cfg.detection.fix_sigma {
                x.push(sigma.ln());
            }
            if let (Some(e), distfit_core::LoglikVariant::DistanceError) = (&cfg.distance_error, variant) {
                if !e.fix_theta {
                    x.push(e.theta.ln());
                }
            }
            Some(x)
        }
        None => None,
    };
    let f = fit(&inp.data, &inp.field, variant, init.as_deref(), &controls)
        .map_err(|e| CliError::from_core("fit", e))?;
    let bootstrap = if cfg.bootstrap.b > 0 && f.covariance.is_some() {
        let layout = f.layout.clone();
        let names: Vec<String> = f.params.iter().map(|p| p.name.clone()).collect();
        let b = bootstrap_derived(
            &f,
            |x| {
                let m = layout.to_model(x);
                let mut v = vec![m.intensity.beta0];
                v.extend(&m.intensity.beta);
                v.push(m.detection.sigma);
                if let Some(e) = m.error {
                    v.push(e.theta);
                }
                v
            },
            cfg.bootstrap.b,
            cfg.seed,
            cfg.execution(),
        )
        .map_err(|e| CliError::from_core("bootstrap", e))?;
        let all = ["beta0".to_string()]
            .into_iter()
            .chain((1..=p).map(|k| format!("beta{k}")))
            .chain(["sigma".to_string(), "theta".to_string()]);
        let ci = all
            .zip(&b.ci)
            .filter(|(n, _)| names.contains(n))
            .map(|(n, &(lo, hi))| (n, lo, hi))
            .collect();
        Some(BootstrapSummary {
            b: cfg.bootstrap.b,
            seed: cfg.seed,
            ci,
        })
    } else {
        None
    };
    Ok(FitReport {
        fit: f,
        n_transects: inp.data.transects().len(),
        covariates: inp.field.names().to_vec(),
        bootstrap,
    })
}

fn write_fit(out: &mut OutputDir, r: &FitReport) -> Result<(), CliError> {
    out.write("fit_report.txt", r.text().as_bytes())?;
    out.write_json("fit.json", r)?;
    out.write("detection_curve.csv", r.detection_curve_csv().as_bytes())?;
    if let Some(s) = r.error_density_csv() {
        out.write("error_density.csv", s.as_bytes())?;
    }
    Ok(())
}

fn cmd_fit(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let inp = load_inputs(cfg)?;
    let r = fit_inputs(cfg, &inp)?;
    write_fit(out, &r)
}

fn load_fit_json(path: &Path) -> Result<FitResult, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let r: FitReport =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(r.fit)
}

/// The fit named in the config, or a fresh one (whose outputs are written
/// alongside).
fn obtain_fit(
    cfg: &Config,
    saved: &Option<PathBuf>,
    out: &mut OutputDir,
) -> Result<(FitResult, CovariateField, StudyRegion), CliError> {
    match saved {
        Some(p) => {
            let f = load_fit_json(p)?;
            let field = io::load_field(&cfg.data.rasters, cfg.data.interpolation)?;
            if field.n_covariates() != f.layout.to_model(&f.estimates).intensity.beta.len() {
                return Err(CliError::Config(format!(
                    "{} was fitted with a different number of covariates",
                    p.display()
                )));
            }
            let region = io::load_region(cfg.require(&cfg.data.region, "data.region")?)?;
            Ok((f, field, region))
        }
        None => {
            let inp = load_inputs(cfg)?;
            let r = fit_inputs(cfg, &inp)?;
            write_fit(out, &r)?;
            let region = inp.data.region().clone();
            Ok((r.fit, inp.field, region))
        }
    }
}

fn cmd_predict(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let (f, field, _) = obtain_fit(cfg, &cfg.predict.fit, out)?;
    let grid = match &cfg.predict.grid {
        Some(g) => GridSpec::new(
            distfit_core::Point::new(g.xllcorner, g.yllcorner),
            g.cellsize,
            g.nrows,
            g.ncols,
        )
        .map_err(|e| CliError::Config(format!("predict.grid: {e}")))?,
        None => *field.grid(),
    };
    let surface = predict_surface(&f, &field, grid).map_err(|e| CliError::from_core("predict", e))?;
    out.write("intensity.asc", surface.to_esri_ascii().as_bytes())
}

#[derive(Serialize)]
struct AbundanceOut {
    estimate: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    b: usize,
    seed: u64,
    region_area: f64,
}

fn cmd_abundance(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let (f, field, region) = obtain_fit(cfg, &cfg.abundance.fit, out)?;
    let sub = match &cfg.abundance.region {
        Some(p) => io::load_region(p)?,
        None => region,
    };
    let b = if f.covariance.is_some() { cfg.bootstrap.b } else { 0 };
    let a = abundance_estimate(&f, &field, &sub, cfg.abundance.region_q, b, cfg.seed, cfg.execution())
        .map_err(|e| CliError::from_core("abundance", e))?;
    let o = AbundanceOut {
        estimate: a.estimate,
        lower: a.ci.map(|c| c.0),
        upper: a.ci.map(|c| c.1),
        b: a.b,
        seed: cfg.seed,
        region_area: sub.area(),
    };
    let mut text = format!("abundance: {:.6}\nregion area: {}\n", o.estimate, o.region_area);
    if let (Some(lo), Some(hi)) = (o.lower, o.upper) {
        text.push_str(&format!("bootstrap 95% interval: ({lo:.6}, {hi:.6}) from {b} draws\n"));
    }
    out.write("abundance.txt", text.as_bytes())?;
    out.write_json("abundance.json", &o)
}

fn cmd_simulate(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let sim = &cfg.simulation;
    let region = match &cfg.data.region {
        Some(p) => io::load_region(p)?,
        None => StudyRegion::unit_square(),
    };
    let field = if cfg.data.rasters.is_empty() {
        sim.field.field().map_err(|e| CliError::Config(format!("simulation.field: {e}")))?
    } else {
        io::load_field(&cfg.data.rasters, cfg.data.interpolation)?
    };
    let w = cfg.detection.w;
    let dp = DetectionParams::new(sim.sigma, w).map_err(|e| CliError::Config(format!("simulation: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let transects = match &cfg.data.transects {
        Some(p) => io::load_transects(p, &region)?,
        None => {
            let sites = match sim.placement {
                distfit_core::simulation::Placement::Convenience => convenience_sites(&field, sim.n_transects, w),
                distfit_core::simulation::Placement::Random => random_sites(&mut rng, sim.n_transects, w),
            }
            .map_err(|e| CliError::Config(format!("simulation: {e}")))?;
            sites
                .into_iter()
                .enumerate()
                .map(|(k, p)| Transect::point(format!("t{}", k + 1), p).expect("finite site"))
                .collect()
        }
    };
    let truth = IntensityParams::new(sim.beta0, vec![sim.beta1; field.n_covariates()]);
    let pts = simulate_ippp_with(&field, &truth, &region, &mut rng).map_err(|e| CliError::from_core("simulate", e))?;
    let data = simulate_detection_with(&pts, &transects, &dp, &region, &mut rng)
        .map_err(|e| CliError::from_core("simulate", e))?;
    out.write("observations.csv", io::observations_csv(&data).as_bytes())?;
    out.write("transects.csv", io::transects_csv(&transects).as_bytes())?;
    out.write("region.csv", io::region_csv(&region).as_bytes())?;
    for k in 0..field.n_covariates() {
        let name = format!("{}.asc", field.names()[k]);
        out.write(&name, field.layer(k).to_esri_ascii().as_bytes())?;
    }
    #[derive(Serialize)]
    struct Truth {
        beta0: f64,
        beta: Vec<f64>,
        sigma: f64,
        w: f64,
        individuals: usize,
        detections: usize,
    }
    out.write_json(
        "truth.json",
        &Truth {
            beta0: truth.beta0,
            beta: truth.beta.clone(),
            sigma: dp.sigma,
            w,
            individuals: pts.len(),
            detections: data.n(),
        },
    )
}

fn cmd_experiment(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let sim = &cfg.simulation;
    let spec = ScenarioSpec {
        field: sim.field,
        placement: sim.placement,
        n_transects: sim.n_transects,
        true_params: IntensityParams::new(sim.beta0, vec![sim.beta1]),
        detection: DetectionParams::new(sim.sigma, cfg.detection.w)
            .map_err(|e| CliError::Config(format!("simulation: {e}")))?,
        replicates: sim.replicates,
        seed: cfg.seed,
        buffer_radius: sim.buffer_radius,
        quadrature: cfg.quadrature,
        execution: cfg.execution(),
    };
    spec.validate().map_err(|e| CliError::Config(format!("simulation: {e}")))?;
    let report = run_experiment(&spec).map_err(|e| CliError::from_core("experiment", e))?;
    out.write("summary.csv", report.summary_csv().as_bytes())?;
    out.write("replicates.csv", report.replicates_csv().as_bytes())?;
    out.write_json("experiment.json", &report)
}
