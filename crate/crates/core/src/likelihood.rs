//! Log-likelihoods for detections from a thinned inhomogeneous Poisson
//! process, with exact locations, with location uncertainty along the locus
//! of the recorded distance, and with additional error in the recorded
//! distance. Integrals are approximated on equally spaced quadrature nodes.
//!
//! All variants share the expected-count term `-∫_S λ(s) q(s) ds` and differ
//! in the per-record observation term:
//!
//! * exact: `log λ(z_i) + log q(z_i)`
//! * locus: `log q(d_i) + log(|L_i|^-1 ∫_{L_i} λ)`
//! * distance error: `log(|L_i|^-1 ∫ f(d_i | u) q(u) ∫_{L(u)} λ ds du)`
//! * surrogate: the exact term with `x(z_i)` replaced by a transect-level
//!   surrogate covariate.

use std::borrow::Cow;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use nalgebra::DMatrix;

use crate::covariate::{surrogate_value, CovariateField, SurrogateSpec};
use crate::error::{Error, Result};
use crate::geometry::{
    discretize_locus, distance_to_transect, locus, perpendicular_distance, region_grid, region_nodes, Locus, Point,
    StudyRegion, Transect,
};
use crate::model::{DetectionFunction, DetectionParams, DistanceErrorParams, ErrorFamily, IntensityParams};
use crate::par::Execution;

/// One detected individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub transect: String,
    /// Recorded distance from the transect.
    pub distance: f64,
    /// Exact location, when known.
    pub location: Option<Point>,
}

impl DetectionRecord {
    pub fn new(transect: impl Into<String>, distance: f64, location: Option<Point>) -> Self {
        Self {
            transect: transect.into(),
            distance,
            location,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<DetectionRecord>,
    record_transect: Vec<usize>,
    transects: Vec<Transect>,
    region: StudyRegion,
}

impl Dataset {
    pub fn new(
        records: Vec<DetectionRecord>,
        transects: Vec<Transect>,
        region: StudyRegion,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(transects.len());
        for (k, t) in transects.iter().enumerate() {
            if index.insert(t.id().to_string(), k).is_some() {
                return Err(Error::invalid(format!("duplicate transect id '{}'", t.id())));
            }
            if !t.within(&region) {
                return Err(Error::invalid(format!(
                    "transect '{}' lies outside the study region",
                    t.id()
                )));
            }
        }
        let mut record_transect = Vec::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            let Some(&k) = index.get(&r.transect) else {
                return Err(Error::invalid(format!(
                    "record {i} references unknown transect '{}'",
                    r.transect
                )));
            };
            if !(r.distance >= 0.0 && r.distance.is_finite()) {
                return Err(Error::invalid(format!(
                    "record {i} has invalid distance {}",
                    r.distance
                )));
            }
            if let Some(z) = r.location {
                if !z.is_finite() || !region.contains(&z) {
                    return Err(Error::invalid(format!(
                        "record {i} location ({}, {}) lies outside the study region",
                        z.x, z.y
                    )));
                }
            }
            record_transect.push(k);
        }
        Ok(Self {
            records,
            record_transect,
            transects,
            region,
        })
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[DetectionRecord] {
        &self.records
    }

    pub fn transects(&self) -> &[Transect] {
        &self.transects
    }

    pub fn region(&self) -> &StudyRegion {
        &self.region
    }

    pub fn transect_of(&self, record: usize) -> &Transect {
        &self.transects[self.record_transect[record]]
    }

    pub fn has_exact_locations(&self) -> bool {
        self.records.iter().all(|r| r.location.is_some())
    }

    pub fn max_distance(&self) -> f64 {
        self.records.iter().map(|r| r.distance).fold(0.0, f64::max)
    }

    /// Distance from `p` to the nearest transect.
    pub fn nearest_transect_distance(&self, p: &Point) -> f64 {
        self.transects
            .iter()
            .map(|t| perpendicular_distance(p, t))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Node counts for the region, locus and true-distance quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureScheme {
    pub region_q: usize,
    pub locus_q: usize,
    pub error_q: usize,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            region_q: 160_000,
            locus_q: 64,
            error_q: 32,
        }
    }
}

impl QuadratureScheme {
    pub fn validate(&self) -> Result<()> {
        if self.region_q < 2 || self.locus_q < 2 || self.error_q < 2 {
            return Err(Error::invalid(format!(
                "quadrature node counts must all be >= 2, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoglikVariant {
    Exact,
    Locus,
    DistanceError,
    Surrogate { spec: SurrogateSpec },
}

/// Which locus length normalizes the distance-error integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocusNormalization {
    /// `|L_i|` at the recorded distance.
    #[default]
    Recorded,
    /// `|L(u)|` at each candidate true distance.
    TrueDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoglikOptions {
    /// Clip loci to the study region.
    pub clip_loci: bool,
    pub normalization: LocusNormalization,
    pub execution: Execution,
}

impl Default for LoglikOptions {
    fn default() -> Self {
        Self {
            clip_loci: true,
            normalization: LocusNormalization::Recorded,
            execution: Execution::default(),
        }
    }
}

/// A log-likelihood value; `Infeasible` stands for `-∞` (some observation
/// has zero thinned intensity, or the expected count overflowed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogLik {
    Finite(f64),
    Infeasible { record: Option<usize> },
}

impl LogLik {
    pub fn value(&self) -> f64 {
        match self {
            LogLik::Finite(v) => *v,
            LogLik::Infeasible { .. } => f64::NEG_INFINITY,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, LogLik::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            LogLik::Finite(v) => Some(*v),
            LogLik::Infeasible { .. } => None,
        }
    }
}

/// Full parameter set for one likelihood evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub intensity: IntensityParams,
    pub detection: DetectionParams,
    pub error: Option<DistanceErrorParams>,
}

pub enum Domain<'a> {
    Region(&'a StudyRegion),
    Locus(&'a Locus),
}

/// `∫_A f ≈ Σ_q w_q f(s_q)` on equally spaced nodes.
pub fn quadrature_integral(f: impl Fn(&Point) -> f64, domain: Domain<'_>, q: usize) -> Result<f64> {
    let nodes = match domain {
        Domain::Region(r) => region_nodes(r, q)?,
        Domain::Locus(l) => discretize_locus(l, q)?,
    };
    // Neumaier summation: region grids reach 10^5 nodes or more
    let (mut sum, mut carry) = (0.0_f64, 0.0_f64);
    for n in &nodes {
        let v = f(&n.point);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!(
                "integrand is {v} at ({}, {})",
                n.point.x, n.point.y
            )));
        }
        let term = n.weight * v;
        let t = sum + term;
        carry += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    Ok(sum + carry)
}

/// Cells crossed by the edge of a detection zone are split into this many
/// sub-cells per side.
const EDGE_SUBDIVISION: usize = 8;

/// Region quadrature nodes that can contribute to `∫ λ q`: nodes at or
/// beyond the detection truncation distance from every transect are
/// dropped, since `q` vanishes there, and cells cut by the zone's edge are
/// refined.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionQuadrature {
    p: usize,
    cov: Vec<f64>,
    dist: Vec<f64>,
    weight: Vec<f64>,
    truncation: f64,
}

impl RegionQuadrature {
    pub fn new(data: &Dataset, field: &CovariateField, region_q: usize, truncation: f64) -> Result<Self> {
        let p = field.n_covariates();
        let (nodes, dx, dy) = region_grid(data.region(), region_q)?;
        let reach = 0.5 * dx.hypot(dy);
        let mut cov = Vec::new();
        let mut dist = Vec::new();
        let mut weight = Vec::new();
        let mut buf = vec![0.0; p];
        let mut push = |pt: &Point, d: f64, w: f64| -> Result<()> {
            field.value_into(pt, &mut buf)?;
            cov.extend_from_slice(&buf);
            dist.push(d);
            weight.push(w);
            Ok(())
        };
        for n in nodes {
            let c = n.point;
            let euclid = data
                .transects()
                .iter()
                .map(|t| distance_to_transect(&c, t))
                .fold(f64::INFINITY, f64::min);
            if euclid >= truncation + reach {
                continue;
            }
            let d = data.nearest_transect_distance(&c);
            let inside = d < truncation;
            let corners = [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)]
                .map(|(a, b)| Point::new(c.x + a * dx, c.y + b * dy));
            let straddles = (d - truncation).abs() < reach
                || corners.iter().any(|k| (data.nearest_transect_distance(k) < truncation) != inside);
            if !straddles {
                if inside {
                    push(&c, d, n.weight)?;
                }
                continue;
            }
            // the edge of the detection zone crosses this cell: refine it
            let m = EDGE_SUBDIVISION;
            let w = n.weight / (m * m) as f64;
            for j in 0..m {
                for i in 0..m {
                    let sp = Point::new(
                        c.x + ((i as f64 + 0.5) / m as f64 - 0.5) * dx,
                        c.y + ((j as f64 + 0.5) / m as f64 - 0.5) * dy,
                    );
                    let ds = data.nearest_transect_distance(&sp);
                    if ds < truncation && data.region().contains(&sp) {
                        push(&sp, ds, w)?;
                    }
                }
            }
        }
        Ok(Self {
            p,
            cov,
            dist,
            weight,
            truncation,
        })
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// Expected number of detections, `∫_S λ q`.
    pub fn expected_count(&self, ip: &IntensityParams, det: &impl DetectionFunction) -> f64 {
        let mut sum = 0.0;
        for ((x, &d), &w) in self.cov.chunks_exact(self.p.max(1)).zip(&self.dist).zip(&self.weight) {
            let lq = det.log_prob(d);
            if lq > f64::NEG_INFINITY {
                sum += w * (ip.log_intensity(&x[..self.p]) + lq).exp();
            }
        }
        sum
    }

    /// `∫_S q`, the detection-weighted area.
    pub fn detection_area(&self, det: &impl DetectionFunction) -> f64 {
        self.dist.iter().zip(&self.weight).map(|(&d, &w)| w * det.prob(d)).sum()
    }
}

#[derive(Debug, Clone)]
enum RecordTerm {
    /// Covariate vector and detection distance known up front.
    Fixed { cov: Vec<f64>, dist: f64 },
    /// Covariates at the locus nodes (row-major, `p` per node).
    Locus { cov: Vec<f64>, log_w: Vec<f64>, dist: f64 },
    /// Recorded distance with error; candidate loci are built per evaluation.
    Error { recorded: f64, transect: usize, log_len: f64 },
}

/// Likelihood with everything that does not depend on the parameters
/// precomputed: region nodes, locus nodes and their covariate values.
pub struct LikelihoodContext<'a> {
    data: &'a Dataset,
    field: &'a CovariateField,
    variant: LoglikVariant,
    quad: QuadratureScheme,
    options: LoglikOptions,
    region: Cow<'a, RegionQuadrature>,
    terms: Vec<RecordTerm>,
    /// Gauss-Legendre rule on `[-1, 1]` for each side of the recorded
    /// distance in the distance-error integral.
    gauss: Vec<(f64, f64)>,
}

impl<'a> LikelihoodContext<'a> {
    pub fn new(
        data: &'a Dataset,
        field: &'a CovariateField,
        variant: LoglikVariant,
        quad: QuadratureScheme,
        options: LoglikOptions,
        truncation: f64,
    ) -> Result<Self> {
        quad.validate()?;
        let region = RegionQuadrature::new(data, field, quad.region_q, truncation)?;
        Self::with_region(data, field, variant, quad, options, Cow::Owned(region))
    }

    /// Reuses a region quadrature built for the same dataset, field and
    /// truncation distance.
    pub fn with_region(
        data: &'a Dataset,
        field: &'a CovariateField,
        variant: LoglikVariant,
        quad: QuadratureScheme,
        options: LoglikOptions,
        region: Cow<'a, RegionQuadrature>,
    ) -> Result<Self> {
        quad.validate()?;
        let p = field.n_covariates();
        if region.p != p {
            return Err(Error::invalid("region quadrature was built for another field"));
        }
        let mut terms = Vec::with_capacity(data.n());
        let mut surrogates: HashMap<usize, Vec<f64>> = HashMap::new();
        for (i, rec) in data.records().iter().enumerate() {
            let tk = data.record_transect[i];
            let t = &data.transects()[tk];
            let term = match variant {
                LoglikVariant::Exact => {
                    let z = rec.location.ok_or(Error::MissingLocation { record: i })?;
                    RecordTerm::Fixed {
                        cov: field.value_at(&z)?,
                        dist: perpendicular_distance(&z, t),
                    }
                }
                LoglikVariant::Surrogate { spec } => {
                    let cov = match surrogates.get(&tk) {
                        Some(c) => c.clone(),
                        None => {
                            let c = surrogate_value(field, t, &spec, data.region())?;
                            surrogates.insert(tk, c.clone());
                            c
                        }
                    };
                    RecordTerm::Fixed {
                        cov,
                        dist: rec.distance,
                    }
                }
                LoglikVariant::Locus => locus_term(data, field, i, quad.locus_q, options.clip_loci)?,
                LoglikVariant::DistanceError => {
                    if rec.distance == 0.0 {
                        // zero spread on the transect itself: no error model
                        locus_term(data, field, i, quad.locus_q, options.clip_loci)?
                    } else {
                        let l = locus(t, rec.distance, data.region(), options.clip_loci)?;
                        RecordTerm::Error {
                            recorded: rec.distance,
                            transect: tk,
                            log_len: l.total_length().ln(),
                        }
                    }
                }
            };
            terms.push(term);
        }
        Ok(Self {
            data,
            field,
            variant,
            quad,
            options,
            region,
            terms,
            gauss: gauss_legendre((quad.error_q / 2).max(1)),
        })
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    pub fn field(&self) -> &CovariateField {
        self.field
    }

    pub fn variant(&self) -> LoglikVariant {
        self.variant
    }

    pub fn quadrature(&self) -> QuadratureScheme {
        self.quad
    }

    pub fn options(&self) -> LoglikOptions {
        self.options
    }

    pub fn region_quadrature(&self) -> &RegionQuadrature {
        &self.region
    }

    pub fn truncation(&self) -> f64 {
        self.region.truncation
    }

    fn check(&self, params: &ModelParams) -> Result<()> {
        if params.intensity.beta.len() != self.field.n_covariates() {
            return Err(Error::invalid(format!(
                "intensity has {} coefficients but the field has {} covariates",
                params.intensity.beta.len(),
                self.field.n_covariates()
            )));
        }
        if params.detection.w != self.region.truncation {
            return Err(Error::invalid(format!(
                "detection truncation {} differs from the quadrature's {}",
                params.detection.w, self.region.truncation
            )));
        }
        if self.variant == LoglikVariant::DistanceError {
            let ep = params
                .error
                .ok_or_else(|| Error::invalid("distance-error likelihood needs error parameters"))?;
            ep.validate()?;
            if ep.family == ErrorFamily::None {
                return Err(Error::invalid(
                    "distance-error likelihood needs a truncated_normal or laplace family",
                ));
            }
            for (i, rec) in self.data.records().iter().enumerate() {
                if rec.distance < ep.lower || rec.distance > ep.upper {
                    return Err(Error::invalid(format!(
                        "record {i} distance {} is outside the error bounds [{}, {}]",
                        rec.distance, ep.lower, ep.upper
                    )));
                }
            }
        }
        Ok(())
    }

    /// Observation term for each record; `None` marks a zero-likelihood
    /// record.
    pub fn record_terms(&self, params: &ModelParams) -> Result<Vec<Option<f64>>> {
        self.check(params)?;
        self.options
            .execution
            .map(self.terms.len(), |i| self.record_term(i, params))
            .into_iter()
            .collect()
    }

    pub fn loglik(&self, params: &ModelParams) -> Result<LogLik> {
        let terms = self.record_terms(params)?;
        let expected = self.region.expected_count(&params.intensity, &params.detection);
        if !expected.is_finite() {
            return Ok(LogLik::Infeasible { record: None });
        }
        let mut total = -expected;
        for (i, t) in terms.into_iter().enumerate() {
            match t {
                Some(v) => total += v,
                None => return Ok(LogLik::Infeasible { record: Some(i) }),
            }
        }
        if !total.is_finite() {
            return Ok(LogLik::Infeasible { record: None });
        }
        Ok(LogLik::Finite(total))
    }

    fn record_term(&self, i: usize, params: &ModelParams) -> Result<Option<f64>> {
        let p = self.field.n_covariates();
        let ip = &params.intensity;
        let dp = &params.detection;
        match &self.terms[i] {
            RecordTerm::Fixed { cov, dist } => {
                let lq = dp.log_prob(*dist);
                Ok((lq > f64::NEG_INFINITY).then(|| ip.log_intensity(cov) + lq))
            }
            RecordTerm::Locus { cov, log_w, dist } => {
                let lq = dp.log_prob(*dist);
                if lq == f64::NEG_INFINITY {
                    return Ok(None);
                }
                let etas: Vec<f64> = cov
                    .chunks_exact(p.max(1))
                    .zip(log_w)
                    .map(|(x, lw)| ip.log_intensity(&x[..p]) + lw)
                    .collect();
                Ok(Some(lq + log_sum_exp(&etas)))
            }
            RecordTerm::Error {
                recorded,
                transect,
                log_len,
            } => {
                let ep = params.error.as_ref().expect("checked");
                self.distance_error_term(i, *recorded, *transect, *log_len, ip, dp, ep)
            }
        }
    }

    /// `log(|L_i|^-1 ∫ f(r | u) q(u) ∫_{L(u)} λ ds du)`.
    ///
    /// The outer integral runs over the true distance `u` on each side of the
    /// recorded distance `r`, after changing variables to the standardized
    /// deviation `s = |r - u| / sd(u)`. In `s` the error density is a fixed
    /// smooth curve whatever the spread, and the Laplace kink at `u = r`
    /// sits on the interval end, so a Gauss-Legendre rule on each side stays
    /// accurate however small the error spread is.
    #[allow(clippy::too_many_arguments)]
    fn distance_error_term(
        &self,
        i: usize,
        r: f64,
        tk: usize,
        log_len: f64,
        ip: &IntensityParams,
        dp: &DetectionParams,
        ep: &DistanceErrorParams,
    ) -> Result<Option<f64>> {
        let t = &self.data.transects()[tk];
        let p = self.field.n_covariates();
        let umax = dp.w;
        // tail mass beyond the cap is below 1e-12 for both families
        let s_cap: f64 = match ep.family {
            ErrorFamily::Laplace => 20.0,
            _ => 7.5,
        };
        let mut buf = vec![0.0; p];
        let mut contributions = Vec::with_capacity(2 * self.gauss.len());
        let mut any_density = false;
        for above in [false, true] {
            // standardized-deviation range whose true distances lie in (0, umax)
            let s_at_umax = (umax - r).abs() / ep.spread(umax);
            let (s_a, s_b) = match (above, r < umax) {
                (true, true) => (0.0, s_cap.min(s_at_umax)),
                (true, false) => continue,
                (false, true) => (0.0, s_cap),
                (false, false) => (s_at_umax, s_cap),
            };
            if s_b <= s_a {
                continue;
            }
            let (mid, half) = (0.5 * (s_a + s_b), 0.5 * (s_b - s_a));
            for &(x, wt) in &self.gauss {
                let s = mid + half * x;
                let Some(u) = ep.true_distance_at(r, s, above) else {
                    continue;
                };
                if !(u > 0.0 && u < umax) {
                    continue;
                }
                let sd = ep.spread(u);
                let slope = ep.spread_slope(u);
                // s = |r - u| / sd(u); ds/du by the quotient rule
                let ds_du = if above {
                    (sd - (u - r) * slope) / (sd * sd)
                } else {
                    (-sd - (r - u) * slope) / (sd * sd)
                };
                let z = ep.normalizer(u);
                if !(z > 0.0) || ds_du == 0.0 {
                    continue;
                }
                any_density = true;
                let log_f_du =
                    (wt * half).ln() + log_std_pdf(ep.family, s) - ds_du.abs().ln() - sd.ln() - z.ln();
                let lq = dp.log_prob(u);
                if lq == f64::NEG_INFINITY {
                    continue;
                }
                let l = match locus(t, u, self.data.region(), self.options.clip_loci) {
                    Ok(l) => l,
                    Err(Error::EmptyLocus { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let nodes = discretize_locus(&l, self.quad.locus_q)?;
                let mut etas = Vec::with_capacity(nodes.len());
                for n in &nodes {
                    self.field.value_into(&n.point, &mut buf)?;
                    etas.push(ip.log_intensity(&buf) + n.weight.ln());
                }
                // log ∫_{L(u)} λ ds
                let integral = log_sum_exp(&etas);
                let inner = match self.options.normalization {
                    LocusNormalization::Recorded => integral,
                    LocusNormalization::TrueDistance => integral - l.total_length().ln(),
                };
                contributions.push(log_f_du + lq + inner);
            }
        }
        if !any_density {
            return Err(Error::DensityUnderflow { record: i });
        }
        if contributions.is_empty() {
            return Ok(None);
        }
        let total = log_sum_exp(&contributions);
        Ok(Some(match self.options.normalization {
            LocusNormalization::Recorded => total - log_len,
            LocusNormalization::TrueDistance => total,
        }))
    }
}

fn locus_term(
    data: &Dataset,
    field: &CovariateField,
    i: usize,
    locus_q: usize,
    clip: bool,
) -> Result<RecordTerm> {
    let rec = &data.records()[i];
    let l = locus(data.transect_of(i), rec.distance, data.region(), clip)?;
    let mut cov = Vec::new();
    let mut log_w = Vec::new();
    match &l {
        Locus::Point(p) => {
            cov.extend(field.value_at(p)?);
            log_w.push(0.0);
        }
        Locus::Curve { total_length, .. } => {
            let mut buf = vec![0.0; field.n_covariates()];
            for n in discretize_locus(&l, locus_q)? {
                field.value_into(&n.point, &mut buf)?;
                cov.extend_from_slice(&buf);
                log_w.push((n.weight / total_length).ln());
            }
        }
    }
    Ok(RecordTerm::Locus {
        cov,
        log_w,
        dist: rec.distance,
    })
}

/// Log density of the standardized (unit-variance) error family.
fn log_std_pdf(family: ErrorFamily, s: f64) -> f64 {
    use std::f64::consts::{PI, SQRT_2};
    match family {
        ErrorFamily::Laplace => -SQRT_2 * s.abs() - SQRT_2.ln(),
        _ => -0.5 * s * s - 0.5 * (2.0 * PI).ln(),
    }
}

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]` by the
/// Golub-Welsch eigenvalue method.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|j| (eig.eigenvalues[j], 2.0 * eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn one_shot(
    data: &Dataset,
    field: &CovariateField,
    variant: LoglikVariant,
    params: ModelParams,
    quad: &QuadratureScheme,
) -> Result<LogLik> {
    LikelihoodContext::new(
        data,
        field,
        variant,
        *quad,
        LoglikOptions::default(),
        params.detection.w,
    )?
    .loglik(&params)
}

/// Exact-location log-likelihood.
pub fn loglik_exact(
    data: &Dataset,
    field: &CovariateField,
    ip: &IntensityParams,
    dp: &DetectionParams,
    quad: &QuadratureScheme,
) -> Result<LogLik> {
    let params = ModelParams {
        intensity: ip.clone(),
        detection: *dp,
        error: None,
    };
    one_shot(data, field, LoglikVariant::Exact, params, quad)
}

/// Log-likelihood with locations known only up to the locus of the recorded
/// distance.
pub fn loglik_locus(
    data: &Dataset,
    field: &CovariateField,
    ip: &IntensityParams,
    dp: &DetectionParams,
    quad: &QuadratureScheme,
) -> Result<LogLik> {
    let params = ModelParams {
        intensity: ip.clone(),
        detection: *dp,
        error: None,
    };
    one_shot(data, field, LoglikVariant::Locus, params, quad)
}

/// Log-likelihood with unknown bearing and error in the recorded distance.
pub fn loglik_distance_error(
    data: &Dataset,
    field: &CovariateField,
    ip: &IntensityParams,
    dp: &DetectionParams,
    ep: &DistanceErrorParams,
    quad: &QuadratureScheme,
) -> Result<LogLik> {
    let params = ModelParams {
        intensity: ip.clone(),
        detection: *dp,
        error: Some(*ep),
    };
    one_shot(data, field, LoglikVariant::DistanceError, params, quad)
}

/// Exact-location likelihood with `x(z_i)` replaced by a surrogate value.
pub fn loglik_surrogate(
    data: &Dataset,
    field: &CovariateField,
    ip: &IntensityParams,
    dp: &DetectionParams,
    spec: &SurrogateSpec,
    quad: &QuadratureScheme,
) -> Result<LogLik> {
    let params = ModelParams {
        intensity: ip.clone(),
        detection: *dp,
        error: None,
    };
    one_shot(data, field, LoglikVariant::Surrogate { spec: *spec }, params, quad)
}
