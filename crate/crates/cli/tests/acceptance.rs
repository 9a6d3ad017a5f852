//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the summary lines are always printed.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use distfit_core::geometry::{discretize_locus, locus};
use distfit_core::inference::{bootstrap_derived, fit, FitControls, Z_975};
use distfit_core::likelihood::{
    loglik_distance_error, loglik_exact, loglik_locus, loglik_surrogate, quadrature_integral, Domain,
};
use distfit_core::model::{DistanceErrorParams, ErrorFamily};
use distfit_core::simulation::{run_experiment, Placement, ScenarioSpec};
use distfit_core::{
    CovariateField, Dataset, DetectionParams, DetectionRecord, Execution, GridSpec, IntensityParams, Interpolation,
    LoglikVariant, Point, QuadratureScheme, Raster, StudyRegion, SurrogateSpec, Transect,
};
use statrs::distribution::{ContinuousCDF, Normal};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let only: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect())
        .unwrap_or_default();
    let criteria: [(usize, &str, fn() -> Outcome); 9] = [
        (1, "simulation scenario 1", || scenario(Placement::Convenience)),
        (2, "simulation scenario 2", || scenario(Placement::Random)),
        (3, "oracle equivalence", oracle_equivalence),
        (4, "reduction properties", reductions),
        (5, "closed-form MLE", closed_form),
        (6, "quadrature convergence", quadrature_convergence),
        (7, "bootstrap consistency", bootstrap_consistency),
        (8, "end-to-end fixture fit", end_to_end),
        (9, "locus vs distance-error estimates", structural_check),
    ];
    let mut failed = 0;
    for (k, name, f) in criteria {
        if !only.is_empty() && !only.contains(&k) {
            continue;
        }
        let t = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("criterion {k} PASS  {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("criterion {k} FAIL  {name}: {d} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- 1, 2

fn scenario(placement: Placement) -> Outcome {
    let spec = ScenarioSpec::standard(placement);
    let r = run_experiment(&spec).map_err(|e| e.to_string())?;
    let m = &r.models;
    let in_band = |v: f64, lo: f64, hi: f64| (lo..=hi).contains(&v);
    let ok = in_band(m[0].cp, 0.90, 0.99)
        && m[1].cp <= 0.05
        // the sign flip of the centre surrogate is a scenario 1 property
        && (placement != Placement::Convenience || m[1].median_beta1 < 0.0)
        && m[2].cp <= 0.50
        && in_band(m[3].cp, 0.90, 0.99)
        && in_band(r.efficiency, 1.3, 1.7);
    check(
        ok,
        format!(
            "B={} mean n={:.1} CP {:.3}/{:.3}/{:.3}/{:.3} median beta1 (model 2) {:.3} efficiency {:.3}",
            r.replicates, r.mean_n, m[0].cp, m[1].cp, m[2].cp, m[3].cp, m[1].median_beta1, r.efficiency
        ),
    )
}

// ---------------------------------------------------------------- oracles

/// Modified Bessel function `I0` by its power series.
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Toy design: a point transect and a vertical line transect far enough
/// apart that their detection zones do not overlap, under a covariate equal
/// to the x coordinate.
struct Toy {
    beta0: f64,
    beta1: f64,
    sigma: f64,
    w: f64,
    c: Point,
    x0: f64,
    y1: f64,
    y2: f64,
}

const TOY: Toy = Toy {
    beta0: 1.0,
    beta1: 1.5,
    sigma: 0.04,
    w: 0.2,
    c: Point { x: 0.3, y: 0.5 },
    x0: 0.75,
    y1: 0.35,
    y2: 0.65,
};

impl Toy {
    fn len(&self) -> f64 {
        self.y2 - self.y1
    }

    fn transects(&self) -> Vec<Transect> {
        vec![
            Transect::point("P", self.c).unwrap(),
            Transect::line("L", vec![Point::new(self.x0, self.y1), Point::new(self.x0, self.y2)]).unwrap(),
        ]
    }

    /// Three detections with locations; recorded distances are the true
    /// perpendicular distances.
    fn records(&self) -> Vec<DetectionRecord> {
        vec![
            DetectionRecord::new("P", 0.05, Some(Point::new(self.c.x + 0.03, self.c.y + 0.04))),
            DetectionRecord::new("P", 0.04, Some(Point::new(self.c.x - 0.024, self.c.y + 0.032))),
            DetectionRecord::new("L", 0.06, Some(Point::new(self.x0 + 0.06, 0.5))),
        ]
    }

    fn data(&self) -> Dataset {
        Dataset::new(self.records(), self.transects(), StudyRegion::unit_square()).unwrap()
    }

    fn ip(&self) -> IntensityParams {
        IntensityParams::new(self.beta0, vec![self.beta1])
    }

    fn dp(&self) -> DetectionParams {
        DetectionParams::new(self.sigma, self.w).unwrap()
    }

    fn log_q(&self, d: f64) -> f64 {
        -(d / self.sigma).powi(2)
    }

    fn lambda(&self, x: f64) -> f64 {
        (self.beta0 + self.beta1 * x).exp()
    }

    /// `∫ λ q` in closed form: Gaussian moment generating function over the
    /// disk and over the strip along the line.
    fn expected(&self) -> f64 {
        let (b, s) = (self.beta1, self.sigma);
        let mgf = (b * b * s * s / 4.0).exp();
        self.lambda(self.c.x) * mgf * PI * s * s + self.lambda(self.x0) * mgf * self.len() * s * PI.sqrt()
    }

    /// `∫_{L(u)} λ ds` for record `i`'s transect.
    fn locus_integral(&self, i: usize, u: f64) -> f64 {
        let b = self.beta1;
        if i < 2 {
            2.0 * PI * u * self.lambda(self.c.x) * bessel_i0(b * u)
        } else {
            self.len() * (self.lambda(self.x0 + u) + self.lambda(self.x0 - u))
        }
    }

    fn locus_length(&self, i: usize, u: f64) -> f64 {
        if i < 2 {
            2.0 * PI * u
        } else {
            2.0 * self.len()
        }
    }

    fn exact_oracle(&self) -> f64 {
        let terms: f64 = self
            .records()
            .iter()
            .map(|r| {
                let z = r.location.unwrap();
                self.beta0 + self.beta1 * z.x + self.log_q(r.distance)
            })
            .sum();
        terms - self.expected()
    }

    fn locus_oracle(&self) -> f64 {
        let terms: f64 = self
            .records()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let d = r.distance;
                self.log_q(d) + (self.locus_integral(i, d) / self.locus_length(i, d)).ln()
            })
            .sum();
        terms - self.expected()
    }

    /// Eq. 5 by a direct area integral around each transect: the numerator
    /// is `∫ f(r | d(s)) q(d(s)) λ(s) ds` over the detection zone, written in
    /// polar coordinates around the point and in (along, offset) coordinates
    /// around the line.
    fn error_oracle(&self, ep: &DistanceErrorParams) -> f64 {
        let density = |r: f64, u: f64| -> f64 {
            let sd = ep.theta * u;
            let nrm = Normal::new(0.0, 1.0).unwrap();
            let (pdf, cdf): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = match ep.family {
                ErrorFamily::Laplace => (
                    Box::new(|z: f64| (-(2f64.sqrt()) * z.abs()).exp() / 2f64.sqrt()),
                    Box::new(|z: f64| {
                        if z < 0.0 {
                            0.5 * (2f64.sqrt() * z).exp()
                        } else {
                            1.0 - 0.5 * (-(2f64.sqrt()) * z).exp()
                        }
                    }),
                ),
                _ => (
                    Box::new(move |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt()),
                    Box::new(move |z: f64| nrm.cdf(z)),
                ),
            };
            let z = cdf((ep.upper - u) / sd) - cdf((ep.lower - u) / sd);
            pdf((r - u) / sd) / sd / z
        };
        let n_rho = 20_000;
        let n_phi = 512;
        let mut terms = 0.0;
        for (i, rec) in self.records().iter().enumerate() {
            let r = rec.distance;
            let g = |u: f64| if u <= 0.0 { 0.0 } else { density(r, u) * self.log_q(u).exp() };
            let num = if i < 2 {
                // polar around the point: ∫ g(ρ) ∫ λ(c + ρ e(φ)) dφ ρ dρ
                let ring = |rho: f64| {
                    let h = 2.0 * PI / n_phi as f64;
                    (0..n_phi)
                        .map(|k| self.lambda(self.c.x + rho * (k as f64 * h).cos()))
                        .sum::<f64>()
                        * h
                        * rho
                };
                let f = |rho: f64| g(rho) * ring(rho);
                simpson(f, 0.0, r, n_rho) + simpson(f, r, self.w, n_rho)
            } else {
                // strip: ∫ along ∫ offset, on both sides
                let band = |u: f64| self.len() * (self.lambda(self.x0 + u) + self.lambda(self.x0 - u));
                let f = |u: f64| g(u) * band(u);
                simpson(f, 0.0, r, n_rho) + simpson(f, r, self.w, n_rho)
            };
            terms += (num / self.locus_length(i, r)).ln();
        }
        terms - self.expected()
    }
}

/// Covariate equal to the x coordinate, on a raster extending past the unit
/// square so bilinear interpolation is exact inside it.
fn linear_field() -> CovariateField {
    let g = GridSpec::new(Point::new(-0.5, -0.5), 0.01, 200, 200).unwrap();
    CovariateField::single(Raster::from_fn(g, |p| p.x), Interpolation::Bilinear)
}

fn value(l: distfit_core::Result<distfit_core::LogLik>) -> Result<f64, String> {
    l.map_err(|e| e.to_string())?.finite().ok_or_else(|| "log-likelihood is infeasible".to_string())
}

fn oracle_equivalence() -> Outcome {
    let t = TOY;
    let data = t.data();
    let field = linear_field();
    let quad = QuadratureScheme::default();
    let exact = value(loglik_exact(&data, &field, &t.ip(), &t.dp(), &quad))?;
    let loc = value(loglik_locus(&data, &field, &t.ip(), &t.dp(), &quad))?;
    let mut rows = vec![("exact", exact, t.exact_oracle(), 1e-6), ("locus", loc, t.locus_oracle(), 1e-6)];
    for (label, family) in [("error-normal", ErrorFamily::TruncatedNormal), ("error-laplace", ErrorFamily::Laplace)] {
        let ep = DistanceErrorParams::new(family, 0.1, 0.0, 0.3).unwrap();
        let v = value(loglik_distance_error(&data, &field, &t.ip(), &t.dp(), &ep, &quad))?;
        rows.push((label, v, t.error_oracle(&ep), 1e-4));
    }
    let ok = rows.iter().all(|&(_, v, o, tol)| (v - o).abs() <= tol);
    let detail = rows
        .iter()
        .map(|(l, v, o, tol)| format!("{l} |diff|={:.1e} (tol {tol:.0e})", (v - o).abs()))
        .collect::<Vec<_>>()
        .join(", ");
    check(ok, detail)
}

// ---------------------------------------------------------------- 4

fn reductions() -> Outcome {
    let t = TOY;
    let data = t.data();
    let quad = QuadratureScheme::default();
    let constant = CovariateField::constant(*linear_field().grid(), 0.7);
    let e3 = value(loglik_exact(&data, &constant, &t.ip(), &t.dp(), &quad))?;
    let e4 = value(loglik_locus(&data, &constant, &t.ip(), &t.dp(), &quad))?;

    let field = linear_field();
    let l4 = value(loglik_locus(&data, &field, &t.ip(), &t.dp(), &quad))?;
    let mut gaps = Vec::new();
    for family in [ErrorFamily::TruncatedNormal, ErrorFamily::Laplace] {
        let ep = DistanceErrorParams::new(family, 1e-4, 0.0, 0.3).unwrap();
        let l5 = value(loglik_distance_error(&data, &field, &t.ip(), &t.dp(), &ep, &quad))?;
        gaps.push((l5 - l4).abs());
    }
    let ok = (e4 - e3).abs() <= 1e-9 && gaps.iter().all(|g| *g <= 1e-3);
    check(
        ok,
        format!(
            "constant field |Eq4-Eq3|={:.1e}; theta=1e-4 |Eq5-Eq4| normal {:.1e}, laplace {:.1e}",
            (e4 - e3).abs(),
            gaps[0],
            gaps[1]
        ),
    )
}

// ---------------------------------------------------------------- 5, 7

/// Ten detections from a point transect whose detection function is
/// effectively 1 over the unit square, under a constant covariate with its
/// coefficient fixed at zero: `β̂0 = log n`.
fn homogeneous() -> (Dataset, CovariateField, FitControls) {
    let t = Transect::point("c", Point::new(0.5, 0.5)).unwrap();
    let records = (0..10)
        .map(|k| {
            let a = k as f64 * 0.6;
            let d = 0.03 * (k + 1) as f64;
            DetectionRecord::new("c", d, Some(Point::new(0.5 + d * a.cos(), 0.5 + d * a.sin())))
        })
        .collect();
    let data = Dataset::new(records, vec![t], StudyRegion::unit_square()).unwrap();
    let g = GridSpec::new(Point::new(0.0, 0.0), 0.1, 10, 10).unwrap();
    let field = CovariateField::constant(g, 0.0);
    let mut controls = FitControls::new(10.0);
    controls.fixed = vec![("beta1".into(), 0.0), ("sigma".into(), 1e9)];
    (data, field, controls)
}

fn closed_form() -> Outcome {
    let (data, field, controls) = homogeneous();
    let f = fit(&data, &field, LoglikVariant::Exact, None, &controls).map_err(|e| e.to_string())?;
    let b0 = f.param("beta0").ok_or("no beta0")?;
    let (lo, hi) = b0.ci.ok_or("no Wald interval")?;
    let target = 10f64.ln();
    let half = Z_975 / 10f64.sqrt();
    let (elo, ehi) = ((lo - (target - half)).abs(), (hi - (target + half)).abs());
    check(
        (b0.estimate - target).abs() <= 1e-4 && elo <= 1e-3 && ehi <= 1e-3,
        format!(
            "beta0={:.6} (log 10 = {target:.6}), Wald ({lo:.5}, {hi:.5}) vs ({:.5}, {:.5})",
            b0.estimate,
            target - half,
            target + half
        ),
    )
}

fn bootstrap_consistency() -> Outcome {
    let (data, field, controls) = homogeneous();
    let f = fit(&data, &field, LoglikVariant::Exact, None, &controls).map_err(|e| e.to_string())?;
    let (wlo, whi) = f.param("beta0").and_then(|p| p.ci).ok_or("no Wald interval")?;
    let b = 100_000;
    let g = |x: &[f64]| x.to_vec();
    let run = |exec| bootstrap_derived(&f, g, b, 20240601, exec).map_err(|e| e.to_string());
    let a = run(Execution::Sequential)?;
    let (plo, phi) = a.ci[0];
    let width = whi - wlo;
    let rel = ((phi - plo) - width).abs() / width;
    let ends = (plo - wlo).abs().max((phi - whi).abs()) / width;
    let again = run(Execution::Sequential)?;
    let par = run(Execution::Parallel)?;
    let bytes = |r: &distfit_core::inference::BootstrapResult| serde_json::to_vec(r).unwrap();
    let identical = bytes(&a) == bytes(&again) && bytes(&a) == bytes(&par);
    check(
        rel <= 0.02 && ends <= 0.02 && identical,
        format!(
            "B={b} percentile ({plo:.5}, {phi:.5}) vs Wald ({wlo:.5}, {whi:.5}): width diff {:.2}%, endpoint diff {:.2}% of width; reruns byte-identical: {identical}",
            100.0 * rel,
            100.0 * ends
        ),
    )
}

// ---------------------------------------------------------------- 6

/// Two Gaussian bumps, sampled on a fine raster.
fn smooth_field() -> CovariateField {
    let g = GridSpec::new(Point::new(0.0, 0.0), 0.005, 200, 200).unwrap();
    let bump = |p: Point, cx: f64, cy: f64, s: f64| (-((p.x - cx).powi(2) + (p.y - cy).powi(2)) / (2.0 * s * s)).exp();
    CovariateField::single(
        Raster::from_fn(g, |p| 1.5 * bump(p, 0.3, 0.35, 0.15) - bump(p, 0.7, 0.7, 0.2)),
        Interpolation::Bilinear,
    )
}

fn quadrature_convergence() -> Outcome {
    let region = StudyRegion::unit_square();
    let ts = vec![
        Transect::point("p1", Point::new(0.25, 0.3)).unwrap(),
        Transect::point("p2", Point::new(0.7, 0.75)).unwrap(),
        Transect::line("l1", vec![Point::new(0.15, 0.6), Point::new(0.5, 0.85)]).unwrap(),
        Transect::line("l2", vec![Point::new(0.55, 0.15), Point::new(0.85, 0.2), Point::new(0.9, 0.45)]).unwrap(),
    ];
    let at = |t: &Transect, d: f64, a: f64| -> Point {
        let v = t.vertices();
        match v.len() {
            1 => Point::new(v[0].x + d * a.cos(), v[0].y + d * a.sin()),
            _ => {
                let (p, q) = (v[0], v[1]);
                let (dx, dy) = (q.x - p.x, q.y - p.y);
                let n = (dx * dx + dy * dy).sqrt();
                let m = Point::new(p.x + a * dx, p.y + a * dy);
                Point::new(m.x - d * dy / n, m.y + d * dx / n)
            }
        }
    };
    let mut records = Vec::new();
    for (k, t) in ts.iter().enumerate() {
        for j in 0..4 {
            let d = 0.01 + 0.02 * j as f64 + 0.003 * k as f64;
            let a = if t.vertices().len() == 1 { 1.3 * j as f64 + k as f64 } else { 0.2 + 0.2 * j as f64 };
            records.push(DetectionRecord::new(t.id(), d, Some(at(t, d, a))));
        }
    }
    let data = Dataset::new(records, ts, region.clone()).map_err(|e| e.to_string())?;
    let field = smooth_field();
    let ip = IntensityParams::new(4.0, vec![1.0]);
    let dp = DetectionParams::new(0.05, 0.12).unwrap();
    let ep = DistanceErrorParams::new(ErrorFamily::TruncatedNormal, 0.15, 0.0, 0.2).unwrap();
    let ep_l = DistanceErrorParams::new(ErrorFamily::Laplace, 0.15, 0.0, 0.2).unwrap();
    let base = QuadratureScheme::default();
    let fine = QuadratureScheme {
        region_q: 2 * base.region_q,
        locus_q: 2 * base.locus_q,
        ..base
    };
    let evals = |q: &QuadratureScheme| -> Result<Vec<f64>, String> {
        Ok(vec![
            value(loglik_exact(&data, &field, &ip, &dp, q))?,
            value(loglik_locus(&data, &field, &ip, &dp, q))?,
            value(loglik_distance_error(&data, &field, &ip, &dp, &ep, q))?,
            value(loglik_distance_error(&data, &field, &ip, &dp, &ep_l, q))?,
            value(loglik_surrogate(&data, &field, &ip, &dp, &SurrogateSpec::TransectCenter, q))?,
            value(loglik_surrogate(&data, &field, &ip, &dp, &SurrogateSpec::BufferAverage { radius: 0.06 }, q))?,
        ])
    };
    let (a, b) = (evals(&base)?, evals(&fine)?);
    let changes: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
    let worst = changes.iter().copied().fold(0.0, f64::max);
    let listed = ["exact", "locus", "error-normal", "error-laplace", "centre", "buffer"]
        .iter()
        .zip(&changes)
        .map(|(l, c)| format!("{l} {c:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");

    // constant integrands
    let mut const_err: f64 = 0.0;
    for r in [region.clone(), StudyRegion::rectangle(0.1, 0.2, 0.7, 0.5).unwrap()] {
        for q in [2_500, 10_000, 160_000] {
            let v = quadrature_integral(|_| 2.5, Domain::Region(&r), q).map_err(|e| e.to_string())?;
            const_err = const_err.max((v - 2.5 * r.area()).abs());
        }
    }
    for (i, t) in data.transects().iter().enumerate() {
        for d in [0.02, 0.07, 0.11] {
            let l = locus(t, d, &region, true).map_err(|e| e.to_string())?;
            for q in [64, 128] {
                let v = quadrature_integral(|_| 2.5, Domain::Locus(&l), q).map_err(|e| e.to_string())?;
                const_err = const_err.max((v - 2.5 * l.total_length()).abs());
                let nodes = discretize_locus(&l, q).unwrap();
                let len: f64 = nodes.iter().map(|n| n.weight).sum();
                const_err = const_err.max((len - l.total_length()).abs());
            }
            // unclipped lengths: circle, or two parallels for the straight line
            if i < 3 {
                let l = locus(t, d, &region, false).map_err(|e| e.to_string())?;
                let full = if i < 2 { 2.0 * PI * d } else { 2.0 * t.length() };
                const_err = const_err.max((l.total_length() - full).abs());
            }
        }
    }
    check(
        worst < 1e-3 && const_err <= 1e-12,
        format!(
            "|change| when doubling region_q and locus_q: {listed}; constant integrands max error {const_err:.1e}"
        ),
    )
}

// ---------------------------------------------------------------- 8, 9

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/line").join(name)
}

fn distfit_fit(out: &Path, sets: &[&str]) -> Result<serde_json::Value, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_distfit"));
    cmd.arg("fit").arg("--config").arg(fixture("fit.toml")).arg("--out").arg(out);
    for s in sets {
        cmd.arg("--set").arg(s);
    }
    let o = cmd.output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("distfit fit {sets:?} failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let text = std::fs::read(out.join("fit.json")).map_err(|e| e.to_string())?;
    serde_json::from_slice(&text).map_err(|e| e.to_string())
}

fn param(report: &serde_json::Value, name: &str) -> Option<(f64, f64, f64)> {
    let p = report["fit"]["params"].as_array()?.iter().find(|p| p["name"] == name)?;
    Some((p["estimate"].as_f64()?, p["ci"][0].as_f64()?, p["ci"][1].as_f64()?))
}

fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let r = distfit_fit(&a, &[])?;
    distfit_fit(&b, &[])?;
    let text = std::fs::read_to_string(a.join("fit_report.txt")).map_err(|e| e.to_string())?;
    let has_report = ["beta0", "beta1", "sigma", "wald_lower", "wald_upper", "AIC:", "bootstrap percentile"]
        .iter()
        .all(|k| text.contains(k));
    let files = |d: &Path| -> Vec<(String, Vec<u8>)> {
        let mut v: Vec<_> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        v.sort();
        v
    };
    let identical = files(&a) == files(&b);
    let (b1, lo, hi) = param(&r, "beta1").ok_or("beta1 missing")?;
    let truth: serde_json::Value =
        serde_json::from_slice(&std::fs::read(fixture("truth.json")).unwrap()).map_err(|e| e.to_string())?;
    let true_b1 = truth["beta"][0].as_f64().ok_or("truth lacks beta")?;
    let aic = r["fit"]["aic"].as_f64().ok_or("aic missing")?;
    let s = distfit_fit(
        &tmp.path().join("s"),
        &["model.variant=\"surrogate\"", "model.surrogate={kind=\"transect_center\"}", "bootstrap.b=0"],
    )?;
    let aic_s = s["fit"]["aic"].as_f64().ok_or("aic missing")?;
    check(
        has_report && identical && lo < true_b1 && true_b1 < hi && aic < aic_s,
        format!(
            "Konza data not bundled; synthetic fixture: beta1={b1:.4} CI ({lo:.4}, {hi:.4}) covers {true_b1}, AIC {aic:.2} vs transect-centre surrogate {aic_s:.2} (gap {:.2}), report complete: {has_report}, rerun byte-identical: {identical}",
            aic_s - aic
        ),
    )
}

fn structural_check() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut est = Vec::new();
    for (label, sets) in [
        ("locus", vec!["bootstrap.b=0"]),
        (
            "normal",
            vec![
                "bootstrap.b=0",
                "model.variant=\"distance_error\"",
                "distance_error={family=\"truncated_normal\", lower=0.0, upper=0.12}",
            ],
        ),
        (
            "laplace",
            vec![
                "bootstrap.b=0",
                "model.variant=\"distance_error\"",
                "distance_error={family=\"laplace\", lower=0.0, upper=0.12}",
            ],
        ),
    ] {
        let r = distfit_fit(&tmp.path().join(label), &sets)?;
        let (b1, _, _) = param(&r, "beta1")
            .or_else(|| {
                let p = r["fit"]["params"].as_array()?.iter().find(|p| p["name"] == "beta1")?;
                Some((p["estimate"].as_f64()?, f64::NAN, f64::NAN))
            })
            .ok_or("beta1 missing")?;
        let theta = r["fit"]["params"]
            .as_array()
            .and_then(|ps| ps.iter().find(|p| p["name"] == "theta"))
            .and_then(|p| p["estimate"].as_f64());
        est.push((label, b1, theta));
    }
    let lo = est.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let hi = est.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let detail = est
        .iter()
        .map(|(l, b, th)| match th {
            Some(t) => format!("{l} {b:.5} (theta {t:.1e})"),
            None => format!("{l} {b:.5}"),
        })
        .collect::<Vec<_>>()
        .join(", ");
    check(hi - lo <= 0.002, format!("beta1 {detail}; spread {:.1e}", hi - lo))
}
