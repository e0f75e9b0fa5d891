//! Angle arguments carry an explicit unit: `60deg`, `1.047rad`.

use std::f64::consts::PI;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    Degrees,
    Radians,
}

impl Unit {
    fn to_radians(self, value: f64) -> f64 {
        match self {
            Unit::Degrees => value.to_radians(),
            Unit::Radians => value,
        }
    }
}

fn split_unit(s: &str) -> (&str, Option<Unit>) {
    let s = s.trim();
    for (suffix, unit) in [
        ("deg", Unit::Degrees),
        ("°", Unit::Degrees),
        ("rad", Unit::Radians),
    ] {
        if let Some(number) = s.strip_suffix(suffix) {
            return (number.trim(), Some(unit));
        }
    }
    (s, None)
}

fn parse_number(s: &str) -> Result<f64> {
    let value: f64 = s.parse().with_context(|| format!("`{s}` is not a number"))?;
    if !value.is_finite() {
        bail!("`{s}` is not a finite number");
    }
    Ok(value)
}

fn parse_with_unit(s: &str, default: Option<Unit>) -> Result<f64> {
    let (number, unit) = split_unit(s);
    let unit = unit
        .or(default)
        .ok_or_else(|| anyhow!("angle `{s}` needs a unit suffix (`deg` or `rad`)"))?;
    Ok(unit.to_radians(parse_number(number)?))
}

/// Parses one angle into radians.
pub fn parse_angle(s: &str) -> Result<f64> {
    parse_with_unit(s, None)
}

/// Parses `start:stop:step<unit>` (each part may also carry its own unit)
/// into the inclusive list of angles in radians.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let (body, unit) = split_unit(s);
    let parts: Vec<&str> = body.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        bail!("sweep `{s}` must look like start:stop:step<unit>, e.g. 0:180:5deg");
    };
    let start = parse_with_unit(start, unit)?;
    let stop = parse_with_unit(stop, unit)?;
    let step = parse_with_unit(step, unit)?;
    if step <= 0.0 {
        bail!("sweep step must be positive");
    }
    if stop < start {
        bail!("sweep stop must not be below start");
    }
    let intervals = ((stop - start) / step + 1e-9).floor() as usize;
    if intervals > 1_000_000 {
        bail!("sweep `{s}` has too many points");
    }
    Ok((0..=intervals).map(|i| start + i as f64 * step).collect())
}

pub fn degrees(radians: f64) -> f64 {
    radians * 180.0 / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_required() {
        assert!((parse_angle("60deg").unwrap() - PI / 3.0).abs() < 1e-15);
        assert_eq!(parse_angle("1.5rad").unwrap(), 1.5);
        assert!(parse_angle("60").is_err());
        assert!(parse_angle("sixtydeg").is_err());
        assert!(parse_angle("NaNdeg").is_err());
    }

    #[test]
    fn sweep_points() {
        let v = parse_sweep("0:180:5deg").unwrap();
        assert_eq!(v.len(), 37);
        assert_eq!(v[0], 0.0);
        assert!((v[36] - PI).abs() < 1e-12);
        assert_eq!(parse_sweep("0deg:90deg:45deg").unwrap().len(), 3);
        assert!(parse_sweep("0:180deg").is_err());
        assert!(parse_sweep("0:180:0deg").is_err());
        assert!(parse_sweep("0:180:5").is_err());
    }
}
