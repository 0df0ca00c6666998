//! Short textual forms of weights and sets used on the command line.
//!
//! Weights: `g1`, `g2`, `g2-truncated`, `zero`, `power:ALPHA`,
//! `power:ALPHA:ball:R`, `power:ALPHA:cube:H`, `cyl:BETA:SPLIT`.
//!
//! Closed sets: `point`, `hyperplane`, `sphere[:R]`, `segment`, `ball[:R]`.
//! Compact sets: `ball[:R]`, `cube[:H]`, `annulus:R_IN:R_OUT`.

use logsob_core::capacity::CompactSetSpec;
use logsob_core::geometry::ClosedSetSpec;
use logsob_core::weight::{Region, WeightSpec};

use crate::Error;

fn number(s: &str, what: &str) -> Result<f64, Error> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Config(format!("{what}: '{s}' is not a number")))
}

fn checked<T>(v: T, validate: logsob_core::Result<()>) -> Result<T, Error> {
    validate.map_err(|e| Error::Hypothesis(e.to_string()))?;
    Ok(v)
}

pub fn parse_weight(s: &str, dim: usize, p: f64, r: Option<f64>) -> Result<WeightSpec, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let need_r = || r.ok_or_else(|| Error::Hypothesis(format!("weight '{s}' needs r: p < r <= p*")));
    let w = match parts.as_slice() {
        ["g1"] => WeightSpec::g1(dim, p, need_r()?),
        ["g2"] => WeightSpec::g2(dim, p, need_r()?),
        ["g2-truncated"] => WeightSpec::g2_truncated(dim, p, need_r()?),
        ["zero"] => WeightSpec::zero(),
        ["power", a] => WeightSpec::Power { alpha: number(a, "power exponent")? },
        ["power", a, "ball", r] => {
            WeightSpec::Power { alpha: number(a, "power exponent")? }.truncated(Region::Ball(number(r, "ball radius")?))
        }
        ["power", a, "cube", h] => {
            WeightSpec::Power { alpha: number(a, "power exponent")? }.truncated(Region::Cube(number(h, "cube half-width")?))
        }
        ["cyl", b, k] => WeightSpec::CylindricalPower {
            beta: number(b, "cylindrical exponent")?,
            split: k.parse().map_err(|_| Error::Config(format!("split '{k}' is not an integer")))?,
        },
        _ => return Err(Error::Config(format!("unknown weight '{s}'"))),
    };
    let v = w.validate(dim);
    checked(w, v)
}

pub fn parse_closed_set(s: &str, dim: usize) -> Result<ClosedSetSpec, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let origin = vec![0.0; dim];
    let e = match parts.as_slice() {
        ["point"] => ClosedSetSpec::point(dim),
        ["hyperplane"] if dim >= 1 => ClosedSetSpec::hyperplane(dim),
        ["sphere"] => ClosedSetSpec::unit_sphere(dim),
        ["sphere", r] => ClosedSetSpec::Sphere { center: origin, radius: number(r, "sphere radius")? },
        ["segment"] => ClosedSetSpec::segment(dim),
        ["ball"] => ClosedSetSpec::Ball { center: origin, radius: 1.0 },
        ["ball", r] => ClosedSetSpec::Ball { center: origin, radius: number(r, "ball radius")? },
        _ => return Err(Error::Config(format!("unknown closed set '{s}'"))),
    };
    let v = e.validate(dim);
    checked(e, v)
}

pub fn parse_compact_set(s: &str, dim: usize) -> Result<CompactSetSpec, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let f = match parts.as_slice() {
        ["ball"] => CompactSetSpec::ball(dim, 1.0),
        ["ball", r] => CompactSetSpec::ball(dim, number(r, "ball radius")?),
        ["cube"] => CompactSetSpec::cube(dim, 1.0),
        ["cube", h] => CompactSetSpec::cube(dim, number(h, "cube half-width")?),
        ["annulus", a, b] => CompactSetSpec::Annulus { r_in: number(a, "inner radius")?, r_out: number(b, "outer radius")? },
        _ => return Err(Error::Config(format!("unknown compact set '{s}' (ball, cube, annulus)"))),
    };
    let v = f.validate(dim);
    checked(f, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights() {
        assert_eq!(parse_weight("g1", 3, 2.0, Some(4.0)).unwrap(), WeightSpec::Power { alpha: 1.0 });
        assert!(parse_weight("g1", 3, 2.0, None).is_err());
        assert!(matches!(parse_weight("power:1:ball:2", 3, 2.0, None).unwrap(), WeightSpec::Truncated { .. }));
        assert!(parse_weight("power:x", 3, 2.0, None).is_err());
        assert!(parse_weight("nope", 3, 2.0, None).is_err());
    }

    #[test]
    fn sets() {
        assert_eq!(parse_closed_set("point", 3).unwrap(), ClosedSetSpec::point(3));
        assert!(parse_closed_set("sphere:-1", 3).is_err());
        assert!(matches!(parse_compact_set("annulus:0.5:1", 3).unwrap(), CompactSetSpec::Annulus { .. }));
        assert!(parse_compact_set("point", 3).is_err());
    }
}
