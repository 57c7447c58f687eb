//! JSON input formats and inline Young-function strings.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use twoweight_core::space::{build_space, MassSpec};
use twoweight_core::{
    Ball, FieldVector, LebesgueExponent, Metric, QuasiMetricSpace, SpaceSpec, WeightVector, YoungFunction,
};

use crate::InputError;

/// Space description as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceFile {
    Explicit {
        dist: Vec<Vec<f64>>,
        mass: Vec<f64>,
    },
    Grid {
        shape: Vec<usize>,
        #[serde(default = "default_metric")]
        metric: Metric,
        #[serde(default)]
        mass: Option<Vec<f64>>,
    },
    Points {
        points: Vec<Vec<f64>>,
        #[serde(default = "default_metric")]
        metric: Metric,
        #[serde(default)]
        mass: Option<Vec<f64>>,
        /// Raise every distance to this power (`> 1` gives a quasimetric).
        #[serde(default)]
        snowflake: Option<f64>,
    },
}

fn default_metric() -> Metric {
    Metric::L1
}

impl SpaceFile {
    pub fn build(&self) -> Result<QuasiMetricSpace, InputError> {
        let field = |e: twoweight_core::Error| InputError::new("space", e);
        match self {
            SpaceFile::Explicit { dist, mass } => build_space(&SpaceSpec::Explicit {
                dist: dist.clone(),
                mass: mass.clone(),
            })
            .map_err(field),
            SpaceFile::Grid { shape, metric, mass } => build_space(&SpaceSpec::Grid {
                shape: shape.clone(),
                metric: *metric,
                mass: mass.clone().map_or(MassSpec::Uniform, MassSpec::Values),
            })
            .map_err(field),
            SpaceFile::Points {
                points,
                metric,
                mass,
                snowflake,
            } => {
                let mass = mass.clone().unwrap_or_else(|| vec![1.0; points.len()]);
                if let Some(dim) = points.first().map(Vec::len) {
                    if points.iter().any(|p| p.len() != dim) {
                        return Err(InputError::new("space.points", "points must share one dimension"));
                    }
                }
                let base = QuasiMetricSpace::from_points(points, *metric, mass.clone()).map_err(field)?;
                match snowflake {
                    None => Ok(base),
                    Some(g) if !(g.is_finite() && *g > 0.0) => {
                        Err(InputError::new("space.snowflake", "exponent must be finite and positive"))
                    }
                    Some(g) => {
                        let n = base.len();
                        let dist = (0..n * n).map(|k| base.dist(k / n, k % n).powf(*g)).collect();
                        QuasiMetricSpace::new(dist, mass).map_err(field)
                    }
                }
            }
        }
    }
}

/// Weight as an explicit array or a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightFile {
    Values(Vec<f64>),
    Generator(WeightGenerator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightGenerator {
    Ones,
    /// `(d(center, y) + offset)^alpha`.
    Power {
        alpha: f64,
        center: usize,
        #[serde(default)]
        offset: f64,
    },
}

impl WeightFile {
    pub fn build(&self, space: &QuasiMetricSpace, field: &'static str) -> Result<WeightVector, InputError> {
        let w = match self {
            WeightFile::Values(v) => WeightVector::new(v.clone()),
            WeightFile::Generator(WeightGenerator::Ones) => Ok(WeightVector::ones(space.len())),
            WeightFile::Generator(WeightGenerator::Power { alpha, center, offset }) => {
                WeightVector::power(space, *alpha, *center, *offset)
            }
        }
        .map_err(|e| InputError::new(field, e))?;
        if w.len() != space.len() {
            return Err(InputError::new(
                field,
                format!("has length {}, expected {}", w.len(), space.len()),
            ));
        }
        Ok(w)
    }
}

pub fn field_vector(values: &[f64], space: &QuasiMetricSpace, field: &'static str) -> Result<FieldVector, InputError> {
    if values.len() != space.len() {
        return Err(InputError::new(
            field,
            format!("has length {}, expected {}", values.len(), space.len()),
        ));
    }
    FieldVector::new(values.to_vec()).map_err(|e| InputError::new(field, e))
}

/// Exponent token: a number, or a multiple of `p` or `p'` such as `2p'`.
fn exponent(token: &str, p: Option<LebesgueExponent>) -> Result<f64, String> {
    let token = token.trim();
    let (coef, base) = if let Some(c) = token.strip_suffix("p'") {
        (c, Some(true))
    } else if let Some(c) = token.strip_suffix('p') {
        (c, Some(false))
    } else {
        (token, None)
    };
    let Some(dual) = base else {
        return token.parse::<f64>().map_err(|_| format!("bad exponent `{token}`"));
    };
    let coef = if coef.is_empty() {
        1.0
    } else {
        coef.parse::<f64>().map_err(|_| format!("bad coefficient in `{token}`"))?
    };
    let p = p.ok_or_else(|| format!("`{token}` needs --p"))?;
    Ok(coef * if dual { p.conjugate() } else { p.p() })
}

/// Parses `power:s` or `powerlog:s:a`; exponents may be relative to `p`.
pub fn parse_phi(text: &str, p: Option<LebesgueExponent>) -> Result<YoungFunction, InputError> {
    let err = |m: String| InputError::new("phi", m);
    let parts: Vec<&str> = text.trim().split(':').collect();
    let phi = match parts.as_slice() {
        ["power", s] => YoungFunction::power(exponent(s, p).map_err(err)?),
        ["powerlog", s, a] => YoungFunction::power_log(
            exponent(s, p).map_err(err)?,
            a.trim().parse::<f64>().map_err(|_| err(format!("bad log exponent `{a}`")))?,
        ),
        _ => return Err(err(format!("expected power:s or powerlog:s:a, got `{text}`"))),
    };
    phi.map_err(|e| InputError::new("phi", e))
}

/// Inline phi string, or a file containing one (optionally as a JSON string).
pub fn load_phi(arg: &str, p: Option<LebesgueExponent>) -> Result<YoungFunction, InputError> {
    if arg.starts_with("power") {
        return parse_phi(arg, p);
    }
    let text = fs::read_to_string(arg).map_err(|e| InputError::new("phi", format!("{arg}: {e}")))?;
    let text = match serde_json::from_str::<String>(&text) {
        Ok(s) => s,
        Err(_) => text.trim().to_string(),
    };
    parse_phi(&text, p)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, field: &'static str) -> Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError::new(field, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError::new(field, format!("{}: {e}", path.display())))
}

/// `center:radius`, checked against the space size.
pub fn parse_ball(text: &str, space: &QuasiMetricSpace) -> Result<Ball, InputError> {
    let err = || InputError::new("base", format!("expected center:radius, got `{text}`"));
    let (c, r) = text.split_once(':').ok_or_else(err)?;
    let center: usize = c.trim().parse().map_err(|_| err())?;
    let radius: f64 = r.trim().parse().map_err(|_| err())?;
    if center >= space.len() || !(radius > 0.0) || !radius.is_finite() {
        return Err(InputError::new("base", "center out of range or radius not positive"));
    }
    Ok(Ball::new(center, radius))
}

/// The catalog ball of point 0 holding every point.
pub fn whole_space(space: &QuasiMetricSpace) -> Ball {
    space
        .canonical_balls()
        .iter()
        .find(|cb| cb.ball.center == 0 && cb.len == space.len())
        .map(|cb| cb.ball)
        .expect("every center has a ball holding the whole space")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> Option<LebesgueExponent> {
        Some(LebesgueExponent::new(2.0).unwrap())
    }

    #[test]
    fn phi_strings() {
        assert_eq!(parse_phi("power:2", None).unwrap(), YoungFunction::power(2.0).unwrap());
        assert_eq!(parse_phi("power:2p'", p2()).unwrap(), YoungFunction::power(4.0).unwrap());
        assert_eq!(
            parse_phi("powerlog:p':1", Some(LebesgueExponent::new(3.0).unwrap())).unwrap(),
            YoungFunction::power_log(1.5, 1.0).unwrap()
        );
        assert!(parse_phi("power:p'", None).is_err());
        assert!(parse_phi("cubic:3", None).is_err());
        assert!(parse_phi("powerlog:1:1", None).is_err());
    }

    #[test]
    fn space_files() {
        let line: SpaceFile = serde_json::from_str(r#"{"kind":"grid","shape":[4]}"#).unwrap();
        let s = line.build().unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(whole_space(&s).radius, 6.0);
        let snow: SpaceFile =
            serde_json::from_str(r#"{"kind":"points","points":[[0],[1],[2]],"snowflake":2}"#).unwrap();
        assert_eq!(snow.build().unwrap().dist(0, 2), 4.0);
        let bad: Result<SpaceFile, _> = serde_json::from_str(r#"{"kind":"grid","shape":[4],"extra":1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn weight_files() {
        let s = SpaceFile::Grid {
            shape: vec![3],
            metric: Metric::L1,
            mass: None,
        }
        .build()
        .unwrap();
        let w: WeightFile = serde_json::from_str("[1, 2, 3]").unwrap();
        assert_eq!(&*w.build(&s, "w").unwrap(), &[1.0, 2.0, 3.0]);
        let g: WeightFile = serde_json::from_str(r#"{"kind":"power","alpha":2,"center":0,"offset":1}"#).unwrap();
        assert_eq!(&*g.build(&s, "w").unwrap(), &[1.0, 4.0, 9.0]);
        let short: WeightFile = serde_json::from_str("[1, 2]").unwrap();
        assert!(short.build(&s, "w").is_err());
    }
}
