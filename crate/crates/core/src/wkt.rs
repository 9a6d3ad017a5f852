//! Reader for the WKT subset used by transect and region files:
//! `POINT`, `LINESTRING` and single-ring `POLYGON`.

use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq)]
pub enum Wkt {
    Point(Point),
    LineString(Vec<Point>),
    /// Outer ring only.
    Polygon(Vec<Point>),
}

pub fn parse(text: &str) -> Result<Wkt> {
    let s = text.trim();
    let open = s
        .find('(')
        .ok_or_else(|| Error::Parse(format!("expected '(' in WKT '{s}'")))?;
    let tag = s[..open].trim().to_ascii_uppercase();
    if !s.ends_with(')') {
        return Err(Error::Parse(format!("unbalanced parentheses in WKT '{s}'")));
    }
    let body = &s[open + 1..s.len() - 1];
    match tag.as_str() {
        "POINT" => {
            let pts = coords(body)?;
            match pts.as_slice() {
                [p] => Ok(Wkt::Point(*p)),
                _ => Err(Error::Parse(format!("POINT needs one coordinate pair, got '{body}'"))),
            }
        }
        "LINESTRING" => Ok(Wkt::LineString(coords(body)?)),
        "POLYGON" => {
            let inner = body.trim();
            if !inner.starts_with('(') || !inner.ends_with(')') {
                return Err(Error::Parse(format!("POLYGON ring must be parenthesized, got '{inner}'")));
            }
            let ring = &inner[1..inner.len() - 1];
            if ring.contains('(') || ring.contains(')') {
                return Err(Error::Parse("POLYGON holes are not supported".into()));
            }
            Ok(Wkt::Polygon(coords(ring)?))
        }
        "" => Err(Error::Parse(format!("missing geometry type in WKT '{s}'"))),
        other => Err(Error::Parse(format!("unsupported WKT geometry type '{other}'"))),
    }
}

fn coords(body: &str) -> Result<Vec<Point>> {
    body.split(',')
        .map(|pair| {
            let nums: Vec<&str> = pair.split_whitespace().collect();
            let [x, y] = nums.as_slice() else {
                return Err(Error::Parse(format!("expected 'x y', got '{}'", pair.trim())));
            };
            let parse = |v: &str| {
                v.parse::<f64>()
                    .ok()
                    .filter(|f| f.is_finite())
                    .ok_or_else(|| Error::Parse(format!("invalid coordinate '{v}'")))
            };
            Ok(Point::new(parse(x)?, parse(y)?))
        })
        .collect()
}
