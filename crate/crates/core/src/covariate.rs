//! Gridded covariate fields and the surrogate-predictor constructions used by
//! the comparison models.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_to_transect, point_along, Point, StudyRegion, Transect, TransectGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Nearest,
    #[default]
    Bilinear,
}

/// Grid geometry shared by all layers of a field. Row 0 is the northern-most
/// row, matching ESRI ASCII ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Lower-left corner of the grid.
    pub origin: Point,
    pub cell_size: f64,
    pub nrows: usize,
    pub ncols: usize,
}

impl GridSpec {
    pub fn new(origin: Point, cell_size: f64, nrows: usize, ncols: usize) -> Result<Self> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::invalid(format!("cell size must be positive, got {cell_size}")));
        }
        if nrows == 0 || ncols == 0 {
            return Err(Error::invalid("grid needs at least one row and column"));
        }
        if !origin.is_finite() {
            return Err(Error::invalid("grid origin is not finite"));
        }
        Ok(Self {
            origin,
            cell_size,
            nrows,
            ncols,
        })
    }

    pub fn len(&self) -> usize {
        self.nrows * self.ncols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn upper_right(&self) -> Point {
        Point::new(
            self.origin.x + self.ncols as f64 * self.cell_size,
            self.origin.y + self.nrows as f64 * self.cell_size,
        )
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Point {
        Point::new(
            self.origin.x + (col as f64 + 0.5) * self.cell_size,
            self.origin.y + (self.nrows - row) as f64 * self.cell_size - 0.5 * self.cell_size,
        )
    }

    pub fn contains(&self, p: &Point) -> bool {
        let ur = self.upper_right();
        p.x >= self.origin.x && p.x <= ur.x && p.y >= self.origin.y && p.y <= ur.y
    }

    fn aligned(&self, other: &GridSpec) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && (self.cell_size - other.cell_size).abs() <= 1e-9 * self.cell_size
            && (self.origin.x - other.origin.x).abs() <= 1e-9 * self.cell_size
            && (self.origin.y - other.origin.y).abs() <= 1e-9 * self.cell_size
    }
}

/// A single-band raster. Missing cells are stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl Raster {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "raster expects {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn(grid: GridSpec, f: impl Fn(Point) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for r in 0..grid.nrows {
            for c in 0..grid.ncols {
                values.push(f(grid.cell_center(r, c)));
            }
        }
        Self { grid, values }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.ncols + col]
    }

    /// Parses an ESRI ASCII grid. `xllcenter`/`yllcenter` headers are
    /// converted to corner coordinates and NODATA cells become NaN.
    pub fn read_esri_ascii(text: &str) -> Result<Self> {
        let mut ncols = None;
        let mut nrows = None;
        let mut xll = None;
        let mut yll = None;
        let mut centered = (false, false);
        let mut cell = None;
        let mut nodata: Option<f64> = None;
        let mut lines = text.lines().enumerate().peekable();
        while let Some((_, line)) = lines.peek() {
            let mut it = line.split_whitespace();
            let Some(key) = it.next() else {
                lines.next();
                continue;
            };
            if !key.starts_with(|c: char| c.is_ascii_alphabetic()) {
                break;
            }
            let (lineno, _) = lines.next().expect("peeked");
            let value = it
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: header '{key}' has no value", lineno + 1)))?;
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad value '{v}' for '{key}'", lineno + 1)))
            };
            match key.to_ascii_lowercase().as_str() {
                "ncols" => ncols = Some(num(value)? as usize),
                "nrows" => nrows = Some(num(value)? as usize),
                "xllcorner" => xll = Some(num(value)?),
                "yllcorner" => yll = Some(num(value)?),
                "xllcenter" => {
                    xll = Some(num(value)?);
                    centered.0 = true;
                }
                "yllcenter" => {
                    yll = Some(num(value)?);
                    centered.1 = true;
                }
                "cellsize" => cell = Some(num(value)?),
                "nodata_value" => nodata = Some(num(value)?),
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown header key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        let missing = |k: &str| Error::Parse(format!("missing header '{k}'"));
        let ncols = ncols.ok_or_else(|| missing("ncols"))?;
        let nrows = nrows.ok_or_else(|| missing("nrows"))?;
        let cell = cell.ok_or_else(|| missing("cellsize"))?;
        let mut x0 = xll.ok_or_else(|| missing("xllcorner"))?;
        let mut y0 = yll.ok_or_else(|| missing("yllcorner"))?;
        if centered.0 {
            x0 -= 0.5 * cell;
        }
        if centered.1 {
            y0 -= 0.5 * cell;
        }
        let grid = GridSpec::new(Point::new(x0, y0), cell, nrows, ncols)?;
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, line) in lines {
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad cell value '{tok}'", lineno + 1)))?;
                values.push(if nodata == Some(v) { f64::NAN } else { v });
            }
        }
        if values.len() != grid.len() {
            return Err(Error::Parse(format!(
                "expected {} cell values, found {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Writes the raster as ESRI ASCII; NaN cells become `NODATA_value`.
    pub fn to_esri_ascii(&self) -> String {
        const NODATA: f64 = -9999.0;
        let g = &self.grid;
        let mut s = String::new();
        let _ = writeln!(s, "ncols {}", g.ncols);
        let _ = writeln!(s, "nrows {}", g.nrows);
        let _ = writeln!(s, "xllcorner {}", g.origin.x);
        let _ = writeln!(s, "yllcorner {}", g.origin.y);
        let _ = writeln!(s, "cellsize {}", g.cell_size);
        let _ = writeln!(s, "NODATA_value {NODATA}");
        for r in 0..g.nrows {
            let row: Vec<String> = (0..g.ncols)
                .map(|c| {
                    let v = self.get(r, c);
                    if v.is_nan() {
                        format!("{NODATA}")
                    } else {
                        format!("{v:e}")
                    }
                })
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// A stack of aligned rasters, one per covariate, with an interpolation rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateField {
    grid: GridSpec,
    names: Vec<String>,
    layers: Vec<Vec<f64>>,
    interpolation: Interpolation,
}

impl CovariateField {
    pub fn new(layers: Vec<(String, Raster)>, interpolation: Interpolation) -> Result<Self> {
        let Some(first) = layers.first() else {
            return Err(Error::invalid("covariate field needs at least one layer"));
        };
        let grid = first.1.grid;
        for (name, r) in &layers {
            if !grid.aligned(&r.grid) {
                return Err(Error::invalid(format!(
                    "covariate layer '{name}' is not aligned with '{}'",
                    first.0
                )));
            }
        }
        let (names, layers) = layers.into_iter().map(|(n, r)| (n, r.values)).unzip();
        Ok(Self {
            grid,
            names,
            layers,
            interpolation,
        })
    }

    pub fn single(raster: Raster, interpolation: Interpolation) -> Self {
        Self::new(vec![("x".to_string(), raster)], interpolation).expect("one layer is aligned")
    }

    /// A field equal to `value` everywhere on the grid.
    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self::single(Raster::from_fn(grid, |_| value), Interpolation::Bilinear)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_covariates(&self) -> usize {
        self.layers.len()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn layer(&self, k: usize) -> Raster {
        Raster {
            grid: self.grid,
            values: self.layers[k].clone(),
        }
    }

    /// Largest stored value of `beta · x` over grid cells. Both interpolation
    /// rules stay within the hull of cell values, so this bounds the linear
    /// predictor anywhere on the grid.
    pub fn max_linear(&self, beta: &[f64]) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                self.layers
                    .iter()
                    .zip(beta)
                    .map(|(l, b)| b * l[i])
                    .sum::<f64>()
            })
            .filter(|v| !v.is_nan())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Errors when a cell whose centre lies in `region` has no data.
    pub fn check_covers(&self, region: &StudyRegion) -> Result<()> {
        let (lo, hi) = region.bbox();
        if !self.grid.contains(&lo) || !self.grid.contains(&hi) {
            return Err(Error::invalid(
                "covariate grid does not cover the study region",
            ));
        }
        for r in 0..self.grid.nrows {
            for c in 0..self.grid.ncols {
                let i = r * self.grid.ncols + c;
                if self.layers.iter().any(|l| !l[i].is_finite()) {
                    let p = self.grid.cell_center(r, c);
                    if region.contains(&p) {
                        return Err(Error::NoData { x: p.x, y: p.y });
                    }
                }
            }
        }
        Ok(())
    }

    /// Covariate vector at `p` per the field's interpolation rule.
    pub fn value_at(&self, p: &Point) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.layers.len()];
        self.value_into(p, &mut out)?;
        Ok(out)
    }

    /// Writes the covariate vector at `p` into `out` without allocating.
    pub fn value_into(&self, p: &Point, out: &mut [f64]) -> Result<()> {
        let g = &self.grid;
        if !p.is_finite() || !g.contains(p) {
            return Err(Error::OutOfExtent { x: p.x, y: p.y });
        }
        // continuous column/row index measured from cell centres, row 0 at the top
        let fc = (p.x - g.origin.x) / g.cell_size - 0.5;
        let fr = (g.origin.y + g.nrows as f64 * g.cell_size - p.y) / g.cell_size - 0.5;
        match self.interpolation {
            Interpolation::Nearest => {
                let c = (fc.round().max(0.0) as usize).min(g.ncols - 1);
                let r = (fr.round().max(0.0) as usize).min(g.nrows - 1);
                let i = r * g.ncols + c;
                for (o, l) in out.iter_mut().zip(&self.layers) {
                    *o = l[i];
                }
            }
            Interpolation::Bilinear => {
                let fc = fc.clamp(0.0, (g.ncols - 1) as f64);
                let fr = fr.clamp(0.0, (g.nrows - 1) as f64);
                let c0 = (fc.floor() as usize).min(g.ncols.saturating_sub(2));
                let r0 = (fr.floor() as usize).min(g.nrows.saturating_sub(2));
                let c1 = (c0 + 1).min(g.ncols - 1);
                let r1 = (r0 + 1).min(g.nrows - 1);
                let tx = fc - c0 as f64;
                let ty = fr - r0 as f64;
                for (o, l) in out.iter_mut().zip(&self.layers) {
                    let v00 = l[r0 * g.ncols + c0];
                    let v01 = l[r0 * g.ncols + c1];
                    let v10 = l[r1 * g.ncols + c0];
                    let v11 = l[r1 * g.ncols + c1];
                    let top = v00 + tx * (v01 - v00);
                    let bottom = v10 + tx * (v11 - v10);
                    *o = top + ty * (bottom - top);
                }
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoData { x: p.x, y: p.y });
        }
        Ok(())
    }
}

/// How a per-individual covariate value is replaced when exact locations
/// are unknown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurrogateSpec {
    /// Value at the transect point, or at the polyline midpoint.
    TransectCenter,
    /// Mean over a lattice of points within `radius` of the transect,
    /// clipped to the study region. `radius = 0` on a line transect averages
    /// along the line itself.
    BufferAverage { radius: f64 },
}

impl SurrogateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SurrogateSpec::BufferAverage { radius } if !(radius >= 0.0 && radius.is_finite()) => Err(
                Error::invalid(format!("buffer radius must be non-negative, got {radius}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Surrogate covariate vector for all individuals detected from `t`.
pub fn surrogate_value(
    f: &CovariateField,
    t: &Transect,
    spec: &SurrogateSpec,
    region: &StudyRegion,
) -> Result<Vec<f64>> {
    spec.validate()?;
    match *spec {
        SurrogateSpec::TransectCenter => f.value_at(&t.midpoint()),
        SurrogateSpec::BufferAverage { radius: 0.0 } => match t.geometry() {
            TransectGeometry::Point(p) => f.value_at(p),
            TransectGeometry::Line(v) => {
                let step = f.grid().cell_size;
                let n = ((t.length() / step).ceil() as usize).max(1);
                let h = t.length() / n as f64;
                let pts = (0..n).map(|k| point_along(v, (k as f64 + 0.5) * h));
                mean_over(f, pts)
            }
        },
        SurrogateSpec::BufferAverage { radius } => {
            // Lattice anchored on the transect's first vertex so symmetric
            // buffers sample symmetrically.
            let h = f.grid().cell_size.min(radius / 4.0);
            let anchor = t.vertices()[0];
            let (mut lo, mut hi) = (anchor, anchor);
            for v in t.vertices() {
                lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
                hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
            }
            let i0 = ((lo.x - radius - anchor.x) / h).floor() as i64;
            let i1 = ((hi.x + radius - anchor.x) / h).ceil() as i64;
            let j0 = ((lo.y - radius - anchor.y) / h).floor() as i64;
            let j1 = ((hi.y + radius - anchor.y) / h).ceil() as i64;
            let pts = (j0..=j1).flat_map(move |j| {
                (i0..=i1).filter_map(move |i| {
                    let p = Point::new(anchor.x + i as f64 * h, anchor.y + j as f64 * h);
                    (distance_to_transect(&p, t) <= radius && region.contains(&p)).then_some(p)
                })
            });
            mean_over(f, pts)
        }
    }
}

fn mean_over(f: &CovariateField, pts: impl Iterator<Item = Point>) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; f.n_covariates()];
    let mut buf = vec![0.0; f.n_covariates()];
    let mut n = 0usize;
    for p in pts {
        f.value_into(&p, &mut buf)?;
        for (s, b) in sum.iter_mut().zip(&buf) {
            *s += b;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::invalid("surrogate buffer contains no sample points"));
    }
    Ok(sum.into_iter().map(|s| s / n as f64).collect())
}
