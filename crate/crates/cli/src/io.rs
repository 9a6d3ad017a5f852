//! Input files: observations, transects, study region and rasters.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use distfit_core::wkt::{self, Wkt};
use distfit_core::{
    CovariateField, Dataset, DetectionRecord, Interpolation, Point, Raster, StudyRegion, Transect,
};

use crate::error::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes())
}

fn at(path: &Path, line: u64, field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{} line {line}, field '{field}': {msg}", path.display()))
}

fn headers(path: &Path, r: &mut csv::Reader<&[u8]>) -> Result<Vec<String>, CliError> {
    Ok(r.headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect())
}

fn number(path: &Path, line: u64, field: &str, raw: &str) -> Result<f64, CliError> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| at(path, line, field, format!("'{raw}' is not a finite number")))
}

/// A WKT `POLYGON`, or a CSV vertex list with header `x,y`.
pub fn load_region(path: &Path) -> Result<StudyRegion, CliError> {
    let text = read(path)?;
    let vertices = if text.trim_start().to_ascii_uppercase().starts_with("POLYGON") {
        match wkt::parse(&text) {
            Ok(Wkt::Polygon(v)) => v,
            Ok(_) => unreachable!("tag checked"),
            Err(e) => return Err(CliError::Data(format!("{}: {e}", path.display()))),
        }
    } else {
        let mut r = reader(&text);
        let h = headers(path, &mut r)?;
        if h != ["x", "y"] {
            return Err(CliError::Data(format!(
                "{}: region vertex list needs header 'x,y', found '{}'",
                path.display(),
                h.join(",")
            )));
        }
        let mut v = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i as u64 + 2;
            let rec = rec.map_err(|e| at(path, line, "x", e))?;
            v.push(Point::new(number(path, line, "x", &rec[0])?, number(path, line, "y", &rec[1])?));
        }
        v
    };
    StudyRegion::new(vertices).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// CSV with header `id,kind,geometry`; `kind` is `point` or `line` and must
/// agree with the WKT geometry.
pub fn load_transects(path: &Path, region: &StudyRegion) -> Result<Vec<Transect>, CliError> {
    let text = read(path)?;
    let mut r = reader(&text);
    let h = headers(path, &mut r)?;
    if h != ["id", "kind", "geometry"] {
        return Err(CliError::Data(format!(
            "{}: transects need header 'id,kind,geometry', found '{}'",
            path.display(),
            h.join(",")
        )));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| at(path, line, "id", e))?;
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(at(path, line, "id", "empty transect id"));
        }
        if !seen.insert(id.clone()) {
            return Err(at(path, line, "id", format!("duplicate transect id '{id}'")));
        }
        let geom = wkt::parse(&rec[2]).map_err(|e| at(path, line, "geometry", e))?;
        let t = match (rec[1].to_ascii_lowercase().as_str(), geom) {
            ("point", Wkt::Point(p)) => Transect::point(id.clone(), p),
            ("line", Wkt::LineString(v)) => Transect::line(id.clone(), v),
            (k @ ("point" | "line"), _) => {
                return Err(at(path, line, "geometry", format!("geometry does not match kind '{k}'")))
            }
            (k, _) => return Err(at(path, line, "kind", format!("unknown kind '{k}', expected point or line"))),
        }
        .map_err(|e| at(path, line, "geometry", e))?;
        if !t.within(region) {
            return Err(at(path, line, "geometry", format!("transect '{id}' lies outside the study region")));
        }
        out.push(t);
    }
    Ok(out)
}

/// CSV with header `transect_id,distance[,x,y]`.
pub fn load_dataset(obs: &Path, transects: Vec<Transect>, region: StudyRegion) -> Result<Dataset, CliError> {
    let text = read(obs)?;
    let mut r = reader(&text);
    let h = headers(obs, &mut r)?;
    let with_xy = match h.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["transect_id", "distance"] => false,
        ["transect_id", "distance", "x", "y"] => true,
        _ => {
            return Err(CliError::Data(format!(
                "{}: observations need header 'transect_id,distance[,x,y]', found '{}'",
                obs.display(),
                h.join(",")
            )))
        }
    };
    let ids: HashSet<&str> = transects.iter().map(|t| t.id()).collect();
    let mut records = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| at(obs, line, "transect_id", e))?;
        let id = &rec[0];
        if !ids.contains(id) {
            return Err(at(obs, line, "transect_id", format!("unknown transect id '{id}'")));
        }
        let d = number(obs, line, "distance", &rec[1])?;
        if d < 0.0 {
            return Err(at(obs, line, "distance", format!("negative distance {d}")));
        }
        let loc = if with_xy && !(rec[2].is_empty() && rec[3].is_empty()) {
            let p = Point::new(number(obs, line, "x", &rec[2])?, number(obs, line, "y", &rec[3])?);
            if !region.contains(&p) {
                return Err(at(obs, line, "x", format!("location ({}, {}) is outside the study region", p.x, p.y)));
            }
            Some(p)
        } else {
            None
        };
        records.push(DetectionRecord::new(id, d, loc));
    }
    Dataset::new(records, transects, region).map_err(|e| CliError::from_core(&obs.display().to_string(), e))
}

pub fn load_field(paths: &[std::path::PathBuf], interp: Interpolation) -> Result<CovariateField, CliError> {
    if paths.is_empty() {
        return Err(CliError::Config("data.rasters must list at least one covariate raster".into()));
    }
    let mut layers = Vec::new();
    for p in paths {
        let r = Raster::read_esri_ascii(&read(p)?).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        let name = p.file_stem().map_or("x".into(), |s| s.to_string_lossy().into_owned());
        layers.push((name, r));
    }
    CovariateField::new(layers, interp).map_err(|e| CliError::Data(e.to_string()))
}

pub fn observations_csv(data: &Dataset) -> String {
    let mut s = String::from("transect_id,distance,x,y\n");
    for r in data.records() {
        match r.location {
            Some(p) => writeln!(s, "{},{},{},{}", r.transect, r.distance, p.x, p.y),
            None => writeln!(s, "{},{},,", r.transect, r.distance),
        }
        .expect("string write");
    }
    s
}

pub fn transects_csv(ts: &[Transect]) -> String {
    let mut s = String::from("id,kind,geometry\n");
    for t in ts {
        let v = t.vertices();
        let (kind, geom) = if v.len() == 1 {
            ("point", format!("POINT ({} {})", v[0].x, v[0].y))
        } else {
            let pts: Vec<String> = v.iter().map(|p| format!("{} {}", p.x, p.y)).collect();
            ("line", format!("LINESTRING ({})", pts.join(", ")))
        };
        writeln!(s, "{},{kind},\"{geom}\"", t.id()).expect("string write");
    }
    s
}

pub fn region_csv(r: &StudyRegion) -> String {
    let mut s = String::from("x,y\n");
    for p in r.boundary() {
        writeln!(s, "{},{}", p.x, p.y).expect("string write");
    }
    s
}
