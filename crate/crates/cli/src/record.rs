//! JSON records emitted by the tool. Non-finite numbers are written as the
//! strings `"inf"`, `"-inf"` and `"nan"` so every record parses back to an
//! equal value.

use gwregion::ot::Mixture;
use gwregion::surface::{Evaluation, Quantity, Source, SurfaceRow};
use gwregion::verify::Check;
use gwregion::{Joint2x2, LogBase};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Serde adapter for `f64` that spells out non-finite values.
pub mod extended_f64 {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else if v.is_nan() {
            Repr::Text("nan".into())
        } else if v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("not a number: {other}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    /// The same encoding for optional values, with `null` for `None`.
    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.map(to_repr).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
        }
    }
}

/// Output of `gwregion eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub source: Source,
    pub which: Quantity,
    pub units: LogBase,
    pub alpha: f64,
    pub beta: f64,
    #[serde(with = "extended_f64::option")]
    pub value: Option<f64>,
    pub region: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coupling: Option<Joint2x2>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mixture: Option<Mixture>,
}

impl EvalRecord {
    pub fn new(source: Source, which: Quantity, alpha: f64, beta: f64, eval: Evaluation) -> Self {
        Self {
            units: source.units(),
            source,
            which,
            alpha,
            beta,
            value: eval.value,
            region: eval.region,
            coupling: eval.coupling,
            mixture: eval.mixture,
        }
    }
}

/// One grid point in a JSON sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowRecord {
    pub alpha: f64,
    pub beta: f64,
    #[serde(with = "extended_f64::option")]
    pub value: Option<f64>,
    pub region: String,
}

/// Output of `gwregion surface --format json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRecord {
    pub source: Source,
    pub which: Quantity,
    pub units: LogBase,
    pub rows: Vec<RowRecord>,
}

impl SurfaceRecord {
    pub fn new(source: Source, which: Quantity, rows: Vec<SurfaceRow>) -> Self {
        Self {
            units: source.units(),
            source,
            which,
            rows: rows
                .into_iter()
                .map(|r| RowRecord {
                    alpha: r.alpha,
                    beta: r.beta,
                    value: r.value,
                    region: r.region,
                })
                .collect(),
        }
    }
}

/// One verification check as written by `gwregion verify --json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub criterion: u8,
    pub name: String,
    pub samples: usize,
    #[serde(with = "extended_f64")]
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl From<&Check> for CheckRecord {
    fn from(c: &Check) -> Self {
        Self {
            criterion: c.criterion,
            name: c.name.clone(),
            samples: c.samples,
            max_deviation: c.max_deviation,
            tolerance: c.tolerance,
            passed: c.passed,
        }
    }
}

pub fn checks_json(checks: &[Check]) -> Vec<CheckRecord> {
    checks.iter().map(CheckRecord::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use gwregion::surface::evaluate;
    use gwregion::{DsbsSource, GaussianSource};

    fn round_trip<T: Serialize + for<'de> Deserialize<'de>>(x: &T) -> T {
        serde_json::from_str(&serde_json::to_string(x).unwrap()).unwrap()
    }

    #[test]
    fn eval_records_round_trip() {
        let dsbs = Source::Dsbs(DsbsSource::new(0.05).unwrap());
        let gauss = Source::Gaussian(GaussianSource::new(0.9).unwrap());
        let cases = [
            (dsbs, Quantity::ConvPhi, 0.6, 0.2),
            (dsbs, Quantity::PhiUpper, 0.3, 0.4),
            (dsbs, Quantity::Lower, 0.3, 0.01),
            (dsbs, Quantity::Lossy { d1: 0.1, d2: 0.2 }, 0.1, 0.1),
            (gauss, Quantity::Upper, 0.5, 0.5),
            (gauss, Quantity::PhiQ { q: -1.0 }, 0.5, 0.0),
        ];
        for (src, q, a, b) in cases {
            let rec = EvalRecord::new(src, q, a, b, evaluate(&src, &q, a, b).unwrap());
            assert_eq!(round_trip(&rec), rec);
        }
    }

    #[test]
    fn infinity_is_a_string() {
        let gauss = Source::Gaussian(GaussianSource::new(0.9).unwrap());
        let rec = EvalRecord::new(
            gauss,
            Quantity::Upper,
            0.5,
            0.5,
            evaluate(&gauss, &Quantity::Upper, 0.5, 0.5).unwrap(),
        );
        let text = serde_json::to_string(&rec).unwrap();
        assert!(text.contains(r#""value":"inf""#), "{text}");
    }
}
