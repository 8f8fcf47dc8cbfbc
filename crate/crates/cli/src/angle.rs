//! Numeric flag values: plain decimals or symbolic multiples of π.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("cannot parse `{0}` as an angle (expected e.g. `1.5`, `2pi`, `-pi/2`, `3*pi/4`)")]
pub struct AngleError(pub String);

fn normalize(s: &str) -> String {
    s.trim().replace(['−', '–'], "-").replace('π', "pi").to_ascii_lowercase()
}

/// Real number with the Unicode minus sign accepted.
pub fn parse_number(s: &str) -> Result<f64, AngleError> {
    let t = normalize(s);
    t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| AngleError(s.to_string()))
}

/// `1.25`, `pi`, `2pi`, `2*pi`, `-pi/2`, `3pi/4`, `0.5pi`, `π/3`.
pub fn parse_angle(s: &str) -> Result<f64, AngleError> {
    let t = normalize(s);
    let Some((coef, rest)) = t.split_once("pi") else {
        return parse_number(s);
    };
    let err = || AngleError(s.to_string());
    let coef = coef.trim().trim_end_matches('*').trim();
    let scale = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| err())?,
    };
    let rest = rest.trim();
    let den = if rest.is_empty() {
        1.0
    } else {
        let d = rest.strip_prefix('/').ok_or_else(err)?.trim();
        d.parse::<f64>().ok().filter(|d| *d != 0.0).ok_or_else(err)?
    };
    let v = scale * PI / den;
    v.is_finite().then_some(v).ok_or_else(err)
}

/// A comma-separated flag value, kept as one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

/// Comma-separated list of angles; whitespace around items is ignored.
pub fn parse_angle_list(s: &str) -> Result<List, AngleError> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
    if items.is_empty() {
        return Err(AngleError(s.to_string()));
    }
    items.into_iter().map(parse_angle).collect::<Result<_, _>>().map(List)
}

/// Comma-separated list of plain numbers.
pub fn parse_number_list(s: &str) -> Result<List, AngleError> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
    if items.is_empty() {
        return Err(AngleError(s.to_string()));
    }
    items.into_iter().map(parse_number).collect::<Result<_, _>>().map(List)
}
