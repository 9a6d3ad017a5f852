use std::fmt::Write as _;

use distfit_core::inference::FitResult;
use distfit_core::model::{error_density, DetectionFunction};
use serde::{Deserialize, Serialize};

/// Everything written to `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub fit: FitResult,
    pub n_transects: usize,
    pub covariates: Vec<String>,
    /// Percentile intervals of the natural-scale parameters.
    pub bootstrap: Option<BootstrapSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub b: usize,
    pub seed: u64,
    pub ci: Vec<(String, f64, f64)>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x:.6}"))
}

impl FitReport {
    pub fn text(&self) -> String {
        let f = &self.fit;
        let mut s = String::new();
        let variant = serde_json::to_value(f.variant).expect("variant serializes");
        let _ = writeln!(s, "model: {variant}");
        let _ = writeln!(s, "covariates: {}", self.covariates.join(", "));
        let _ = writeln!(s, "detections: {}", f.n);
        let _ = writeln!(s, "transects: {}", self.n_transects);
        let _ = writeln!(s, "log-likelihood: {:.6}", f.loglik);
        let _ = writeln!(s, "k: {}", f.k);
        let _ = writeln!(s, "AIC: {:.6}", f.aic);
        let _ = writeln!(s, "converged: {}", f.converged);
        let _ = writeln!(s, "evaluations: {}", f.n_evals);
        let _ = writeln!(s, "covariance: {}", if f.covariance.is_some() { "ok" } else { "singular" });
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<10} {:>14} {:>12} {:>14} {:>14}", "parameter", "estimate", "se", "wald_lower", "wald_upper");
        for p in &f.params {
            let (lo, hi) = p.ci.map_or((None, None), |(a, b)| (Some(a), Some(b)));
            let _ = writeln!(
                s,
                "{:<10} {:>14.6} {:>12} {:>14} {:>14}",
                p.name,
                p.estimate,
                opt(p.se),
                opt(lo),
                opt(hi)
            );
        }
        if f.params.iter().any(|p| p.name == "sigma" || p.name == "theta") {
            let _ = writeln!(s, "(se of sigma and theta is on the log scale)");
        }
        if let Some(b) = &self.bootstrap {
            let _ = writeln!(s);
            let _ = writeln!(s, "bootstrap percentile intervals (B = {}, seed = {})", b.b, b.seed);
            for (name, lo, hi) in &b.ci {
                let _ = writeln!(s, "{name:<10} {lo:>14.6} {hi:>14.6}");
            }
        }
        s
    }

    /// Fitted detection function on 101 points over `[0, w]`.
    pub fn detection_curve_csv(&self) -> String {
        let det = self.fit.model().detection;
        let mut s = String::from("distance,detection_prob\n");
        for k in 0..=100 {
            let d = det.w * k as f64 / 100.0;
            let _ = writeln!(s, "{d},{}", det.prob(d));
        }
        s
    }

    /// Fitted error density of the recorded distance at a few true
    /// distances, for distance-error fits.
    pub fn error_density_csv(&self) -> Option<String> {
        let m = self.fit.model();
        let ep = m.error?;
        let w = m.detection.w;
        let hi = ep.upper.min(2.0 * w);
        let mut s = String::from("true_distance,recorded_distance,density\n");
        for frac in [0.25, 0.5, 0.75] {
            let u = frac * w;
            for k in 0..=200 {
                let r = ep.lower + (hi - ep.lower) * k as f64 / 200.0;
                let d = error_density(r, u, &ep).ok()?;
                let _ = writeln!(s, "{u},{r},{d}");
            }
        }
        Some(s)
    }
}
