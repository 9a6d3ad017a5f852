//! Planar geometry: study regions, transects, perpendicular distances and the
//! locus of candidate locations consistent with a recorded distance.
//!
//! A point transect's locus at distance `d` is the circle of radius `d`
//! around it. A line transect's locus is the pair of polylines offset by
//! `±d`, with round joins on the outer side of each bend. Loci are
//! optionally clipped to the study region, in which case the total length is
//! the length of the retained pieces.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn sub(&self, o: &Point) -> (f64, f64) {
        (self.x - o.x, self.y - o.y)
    }

    fn lerp(&self, o: &Point, t: f64) -> Point {
        Point::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (dot(ap, ab) / len2).clamp(0.0, 1.0);
    p.distance(&a.lerp(b, t))
}

/// Parameter along `p0 + t (p1 - p0)` where it crosses segment `a`–`b`, if
/// it does so properly (parallel overlaps are ignored).
fn segment_crossing(p0: &Point, p1: &Point, a: &Point, b: &Point) -> Option<f64> {
    let r = p1.sub(p0);
    let s = b.sub(a);
    let denom = cross(r, s);
    if denom.abs() < EPS * (dot(r, r).sqrt() * dot(s, s).sqrt()).max(EPS) {
        return None;
    }
    let qp = a.sub(p0);
    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    if (-EPS..=1.0 + EPS).contains(&u) && (-EPS..=1.0 + EPS).contains(&t) {
        Some(t.clamp(0.0, 1.0))
    } else {
        None
    }
}

/// A simple polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRegion {
    boundary: Vec<Point>,
    area: f64,
}

impl StudyRegion {
    /// Builds a region from a vertex ring. A repeated closing vertex is
    /// dropped and clockwise rings are reversed.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::invalid("study region needs at least 3 vertices"));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("study region has non-finite vertex"));
        }
        let signed = shoelace(&vertices);
        if signed.abs() <= EPS {
            return Err(Error::invalid("study region has zero area"));
        }
        if signed < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if a == b {
                return Err(Error::invalid("study region has repeated vertex"));
            }
            for j in (i + 1)..n {
                // adjacent edges share a vertex
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(&a, &b, &c, &d) {
                    return Err(Error::invalid(format!(
                        "study region boundary self-intersects (edges {i} and {j})"
                    )));
                }
            }
        }
        Ok(Self {
            boundary: vertices,
            area: signed.abs(),
        })
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square is valid")
    }

    pub fn boundary(&self) -> &[Point] {
        &self.boundary
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.boundary {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.boundary.len();
        (0..n).map(move |i| (self.boundary[i], self.boundary[(i + 1) % n]))
    }

    /// Even-odd containment test; points on the boundary count as inside.
    pub fn contains(&self, p: &Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if point_segment_distance(p, &a, &b) <= 1e-12 {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the region boundary.
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, &a, &b))
            .fold(f64::INFINITY, f64::min)
    }
}

fn shoelace(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
}

fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let o = |p: &Point, q: &Point, r: &Point| cross(q.sub(p), r.sub(p));
    let (d1, d2, d3, d4) = (o(c, d, a), o(c, d, b), o(a, b, c), o(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: &Point, q: &Point, r: &Point| point_segment_distance(r, p, q) <= EPS;
    (d1 == 0.0 && on(c, d, a))
        || (d2 == 0.0 && on(c, d, b))
        || (d3 == 0.0 && on(a, b, c))
        || (d4 == 0.0 && on(a, b, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransectKind {
    Point,
    Line,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TransectGeometry {
    Point(Point),
    Line(Vec<Point>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transect {
    id: String,
    geometry: TransectGeometry,
    length: f64,
}

impl Transect {
    pub fn point(id: impl Into<String>, at: Point) -> Result<Self> {
        if !at.is_finite() {
            return Err(Error::invalid("point transect has non-finite coordinate"));
        }
        Ok(Self {
            id: id.into(),
            geometry: TransectGeometry::Point(at),
            length: 0.0,
        })
    }

    pub fn line(id: impl Into<String>, vertices: Vec<Point>) -> Result<Self> {
        let id = id.into();
        if vertices.len() < 2 {
            return Err(Error::invalid(format!(
                "line transect '{id}' needs at least 2 vertices"
            )));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid(format!(
                "line transect '{id}' has non-finite vertex"
            )));
        }
        let length: f64 = vertices.windows(2).map(|w| w[0].distance(&w[1])).sum();
        if length <= 0.0 {
            return Err(Error::invalid(format!(
                "line transect '{id}' has zero length"
            )));
        }
        Ok(Self {
            id,
            geometry: TransectGeometry::Line(vertices),
            length,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> TransectKind {
        match self.geometry {
            TransectGeometry::Point(_) => TransectKind::Point,
            TransectGeometry::Line(_) => TransectKind::Line,
        }
    }

    pub fn geometry(&self) -> &TransectGeometry {
        &self.geometry
    }

    /// Polyline length; zero for point transects.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn vertices(&self) -> &[Point] {
        match &self.geometry {
            TransectGeometry::Point(p) => std::slice::from_ref(p),
            TransectGeometry::Line(v) => v,
        }
    }

    /// The point half-way along the transect by arc length.
    pub fn midpoint(&self) -> Point {
        match &self.geometry {
            TransectGeometry::Point(p) => *p,
            TransectGeometry::Line(v) => point_along(v, 0.5 * self.length),
        }
    }

    pub fn within(&self, region: &StudyRegion) -> bool {
        self.vertices().iter().all(|p| region.contains(p))
    }
}

pub(crate) fn point_along(v: &[Point], mut s: f64) -> Point {
    for w in v.windows(2) {
        let len = w[0].distance(&w[1]);
        if s <= len {
            return w[0].lerp(&w[1], if len > 0.0 { s / len } else { 0.0 });
        }
        s -= len;
    }
    *v.last().expect("polyline is non-empty")
}

/// Detection distance from `p` to the transect: Euclidean distance for
/// point transects; for polylines, the minimum over segments, counting only
/// points whose projection does not fall beyond either end of the line.
/// Points past the ends are at infinite distance, so the detection zone is
/// the strip swept by the loci of [`locus`].
pub fn perpendicular_distance(p: &Point, t: &Transect) -> f64 {
    match &t.geometry {
        TransectGeometry::Point(c) => p.distance(c),
        TransectGeometry::Line(v) => {
            let last = v.len() - 2;
            let mut best = f64::INFINITY;
            for (k, w) in v.windows(2).enumerate() {
                let ab = w[1].sub(&w[0]);
                let len2 = dot(ab, ab);
                if len2 > 0.0 {
                    let u = dot(p.sub(&w[0]), ab) / len2;
                    if (k == 0 && u < 0.0) || (k == last && u > 1.0) {
                        continue;
                    }
                }
                best = best.min(point_segment_distance(p, &w[0], &w[1]));
            }
            best
        }
    }
}

/// Euclidean distance from `p` to the nearest point of the transect.
pub fn distance_to_transect(p: &Point, t: &Transect) -> f64 {
    match &t.geometry {
        TransectGeometry::Point(c) => p.distance(c),
        TransectGeometry::Line(v) => v
            .windows(2)
            .map(|w| point_segment_distance(p, &w[0], &w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// One piece of a locus curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocusPiece {
    Segment { a: Point, b: Point },
    /// Arc of `radius` around `center`, starting at angle `start` and
    /// sweeping by `sweep` radians (negative sweeps run clockwise).
    Arc {
        center: Point,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl LocusPiece {
    pub fn length(&self) -> f64 {
        match self {
            LocusPiece::Segment { a, b } => a.distance(b),
            LocusPiece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point at fraction `t ∈ [0, 1]` of the piece's arc length.
    pub fn at(&self, t: f64) -> Point {
        match self {
            LocusPiece::Segment { a, b } => a.lerp(b, t),
            LocusPiece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let phi = start + t * sweep;
                Point::new(center.x + radius * phi.cos(), center.y + radius * phi.sin())
            }
        }
    }

    fn sub(&self, t0: f64, t1: f64) -> LocusPiece {
        match *self {
            LocusPiece::Segment { .. } => LocusPiece::Segment {
                a: self.at(t0),
                b: self.at(t1),
            },
            LocusPiece::Arc {
                center,
                radius,
                start,
                sweep,
            } => LocusPiece::Arc {
                center,
                radius,
                start: start + t0 * sweep,
                sweep: (t1 - t0) * sweep,
            },
        }
    }

    /// Fractions along the piece where it crosses the edge `a`–`b`.
    fn crossings(&self, a: &Point, b: &Point, out: &mut Vec<f64>) {
        match *self {
            LocusPiece::Segment { a: p0, b: p1 } => {
                if let Some(t) = segment_crossing(&p0, &p1, a, b) {
                    out.push(t);
                }
            }
            LocusPiece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                // |a + u (b - a) - c|^2 = r^2
                let dvec = b.sub(a);
                let f = a.sub(&center);
                let qa = dot(dvec, dvec);
                if qa == 0.0 {
                    return;
                }
                let qb = 2.0 * dot(f, dvec);
                let qc = dot(f, f) - radius * radius;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc < 0.0 {
                    return;
                }
                let sq = disc.sqrt();
                for u in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
                    if !(-EPS..=1.0 + EPS).contains(&u) {
                        continue;
                    }
                    let p = a.lerp(b, u);
                    let phi = (p.y - center.y).atan2(p.x - center.x);
                    let mut rel = (phi - start) * sweep.signum();
                    rel = rel.rem_euclid(TAU);
                    let t = rel / sweep.abs();
                    if t <= 1.0 + EPS {
                        out.push(t.min(1.0));
                    }
                }
            }
        }
    }
}

/// The set of candidate locations at a fixed distance from a transect.
#[derive(Debug, Clone, PartialEq)]
pub enum Locus {
    /// Zero distance from a point transect: the transect point itself.
    Point(Point),
    Curve {
        pieces: Vec<LocusPiece>,
        total_length: f64,
    },
}

impl Locus {
    fn from_pieces(pieces: Vec<LocusPiece>) -> Self {
        let pieces: Vec<_> = pieces.into_iter().filter(|p| p.length() > 0.0).collect();
        let total_length = pieces.iter().map(LocusPiece::length).sum();
        Locus::Curve {
            pieces,
            total_length,
        }
    }

    pub fn total_length(&self) -> f64 {
        match self {
            Locus::Point(_) => 0.0,
            Locus::Curve { total_length, .. } => *total_length,
        }
    }

    pub fn pieces(&self) -> &[LocusPiece] {
        match self {
            Locus::Point(_) => &[],
            Locus::Curve { pieces, .. } => pieces,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Locus::Point(_))
    }

    fn clip(self, region: &StudyRegion) -> Self {
        match self {
            Locus::Point(p) => Locus::Point(p),
            Locus::Curve { pieces, .. } => {
                let mut kept = Vec::with_capacity(pieces.len());
                let mut ts = Vec::new();
                for piece in pieces {
                    ts.clear();
                    ts.push(0.0);
                    ts.push(1.0);
                    for (a, b) in region.edges() {
                        piece.crossings(&a, &b, &mut ts);
                    }
                    ts.sort_by(f64::total_cmp);
                    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
                    for w in ts.windows(2) {
                        if w[1] - w[0] <= 0.0 {
                            continue;
                        }
                        if region.contains(&piece.at(0.5 * (w[0] + w[1]))) {
                            kept.push(piece.sub(w[0], w[1]));
                        }
                    }
                }
                Locus::from_pieces(kept)
            }
        }
    }
}

/// Candidate locations at distance `d` from `t`, optionally clipped to the
/// study region. `d = 0` yields the transect geometry itself.
pub fn locus(t: &Transect, d: f64, region: &StudyRegion, clip: bool) -> Result<Locus> {
    if !d.is_finite() || d < 0.0 {
        return Err(Error::invalid(format!(
            "locus distance must be finite and non-negative, got {d}"
        )));
    }
    let raw = match &t.geometry {
        TransectGeometry::Point(c) if d == 0.0 => Locus::Point(*c),
        TransectGeometry::Point(c) => Locus::Curve {
            pieces: vec![LocusPiece::Arc {
                center: *c,
                radius: d,
                start: 0.0,
                sweep: TAU,
            }],
            total_length: TAU * d,
        },
        TransectGeometry::Line(v) if d == 0.0 => Locus::from_pieces(
            v.windows(2)
                .map(|w| LocusPiece::Segment { a: w[0], b: w[1] })
                .collect(),
        ),
        TransectGeometry::Line(v) => {
            let mut pieces = offset_polyline(v, d, 1.0);
            pieces.extend(offset_polyline(v, d, -1.0));
            Locus::from_pieces(pieces)
        }
    };
    let out = if clip { raw.clip(region) } else { raw };
    let empty = match &out {
        Locus::Point(p) => clip && !region.contains(p),
        Locus::Curve { total_length, .. } => *total_length <= 0.0,
    };
    if empty {
        return Err(Error::EmptyLocus {
            transect: t.id.clone(),
            distance: d,
        });
    }
    Ok(out)
}

/// One side of the offset curve of a polyline: `side = +1` is the left of the
/// direction of travel. Outer bends get round joins, inner bends are trimmed
/// to the intersection of the neighbouring offset segments.
fn offset_polyline(v: &[Point], d: f64, side: f64) -> Vec<LocusPiece> {
    let segs: Vec<(Point, Point, (f64, f64))> = v
        .windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| {
            let (dx, dy) = w[1].sub(&w[0]);
            let len = dx.hypot(dy);
            let dir = (dx / len, dy / len);
            let n = (-dir.1 * side * d, dir.0 * side * d);
            (
                Point::new(w[0].x + n.0, w[0].y + n.1),
                Point::new(w[1].x + n.0, w[1].y + n.1),
                dir,
            )
        })
        .collect();
    let mut starts: Vec<Point> = segs.iter().map(|s| s.0).collect();
    let mut ends: Vec<Point> = segs.iter().map(|s| s.1).collect();
    let mut joins: Vec<Option<LocusPiece>> = vec![None; segs.len()];
    for k in 0..segs.len().saturating_sub(1) {
        let (d0, d1) = (segs[k].2, segs[k + 1].2);
        let turn = cross(d0, d1).atan2(dot(d0, d1));
        if turn.abs() < 1e-12 {
            continue;
        }
        // Left turns put the left side on the inside of the bend.
        let inner = turn * side > 0.0;
        if inner {
            let (a0, a1) = (starts[k], ends[k]);
            let (b0, b1) = (starts[k + 1], ends[k + 1]);
            let r = a1.sub(&a0);
            let s = b1.sub(&b0);
            let denom = cross(r, s);
            if denom.abs() > EPS {
                let t = cross(b0.sub(&a0), s) / denom;
                let p = a0.lerp(&a1, t);
                ends[k] = p;
                starts[k + 1] = p;
            }
        } else {
            let vtx = segs[k].1;
            let center = Point::new(
                vtx.x - (-d0.1 * side * d),
                vtx.y - (d0.0 * side * d),
            );
            let start = (vtx.y - center.y).atan2(vtx.x - center.x);
            joins[k] = Some(LocusPiece::Arc {
                center,
                radius: d,
                start,
                sweep: turn,
            });
        }
    }
    let mut out = Vec::with_capacity(2 * segs.len());
    for k in 0..segs.len() {
        let (a, b) = (starts[k], ends[k]);
        // trimming can reverse very short segments; drop them
        if dot(b.sub(&a), segs[k].2) > 0.0 {
            out.push(LocusPiece::Segment { a, b });
        }
        if let Some(j) = joins[k] {
            out.push(j);
        }
    }
    out
}

/// A quadrature node on a locus or region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub point: Point,
    pub weight: f64,
}

/// `q` cells of equal arc length with a node at each cell midpoint, weighted
/// by the cell length. A cell that spans a gap between disconnected parts
/// of the locus (the two sides of a line, or pieces separated by clipping)
/// is split at the gap, each part getting its own midpoint node, so the
/// rule stays second order on every connected part. Weights sum to the
/// total length.
pub fn discretize_locus(l: &Locus, q: usize) -> Result<Vec<Node>> {
    if q < 2 {
        return Err(Error::invalid(format!(
            "locus discretization needs at least 2 nodes, got {q}"
        )));
    }
    match l {
        Locus::Point(p) => Ok(vec![
            Node {
                point: *p,
                weight: 0.0
            };
            q
        ]),
        Locus::Curve {
            pieces,
            total_length,
        } => {
            let h = total_length / q as f64;
            let tol = 1e-12 * total_length.max(1.0);
            let mut gaps = Vec::new();
            let mut acc = 0.0;
            for w in pieces.windows(2) {
                acc += w[0].length();
                if w[0].at(1.0).distance(&w[1].at(0.0)) > tol {
                    gaps.push(acc);
                }
            }
            let mut nodes = Vec::with_capacity(q + gaps.len());
            let mut piece = 0;
            let mut offset = 0.0;
            let mut at = |s: f64| -> Point {
                while piece + 1 < pieces.len() && s > offset + pieces[piece].length() {
                    offset += pieces[piece].length();
                    piece += 1;
                }
                let len = pieces[piece].length();
                pieces[piece].at(((s - offset) / len).clamp(0.0, 1.0))
            };
            let mut g = gaps.iter().copied().peekable();
            for k in 0..q {
                let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                let mut lo = a;
                while let Some(&gap) = g.peek() {
                    if gap >= b - tol {
                        break;
                    }
                    g.next();
                    if gap > lo + tol {
                        nodes.push(Node {
                            point: at(0.5 * (lo + gap)),
                            weight: gap - lo,
                        });
                        lo = gap;
                    }
                }
                let hi = if k + 1 == q { *total_length } else { b };
                nodes.push(Node {
                    point: at(0.5 * (lo + hi)),
                    weight: hi - lo,
                });
            }
            Ok(nodes)
        }
    }
}

/// Regular grid of cell-centred nodes over the region's bounding box with
/// roughly `q` cells; cells whose centre falls outside the polygon are
/// dropped. Each node carries its cell's area.
pub fn region_nodes(region: &StudyRegion, q: usize) -> Result<Vec<Node>> {
    Ok(region_grid(region, q)?.0)
}

/// [`region_nodes`] together with the cell width and height.
pub(crate) fn region_grid(region: &StudyRegion, q: usize) -> Result<(Vec<Node>, f64, f64)> {
    if q < 2 {
        return Err(Error::invalid(format!(
            "region quadrature needs at least 2 nodes, got {q}"
        )));
    }
    let (lo, hi) = region.bbox();
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    let spacing = (w * h / q as f64).sqrt();
    let nx = ((w / spacing).round() as usize).max(1);
    let ny = ((h / spacing).round() as usize).max(1);
    let (dx, dy) = (w / nx as f64, h / ny as f64);
    let cell = dx * dy;
    let mut nodes = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = lo.y + (j as f64 + 0.5) * dy;
        for i in 0..nx {
            let p = Point::new(lo.x + (i as f64 + 0.5) * dx, y);
            if region.contains(&p) {
                nodes.push(Node {
                    point: p,
                    weight: cell,
                });
            }
        }
    }
    if nodes.is_empty() {
        return Err(Error::invalid("region quadrature grid has no interior nodes"));
    }
    Ok((nodes, dx, dy))
}
