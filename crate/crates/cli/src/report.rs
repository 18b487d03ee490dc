//! report.json: fixed schema, deterministic, round-trips field for field.

use std::fmt;

use esspec_core::applications::StellarReport;
use esspec_core::asymptotics::{LimitClass, Verdict};
use esspec_core::spectrum::SpectrumReport;
use esspec_core::IntervalSet;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::{ProblemConfig, SCHEMA_VERSION};

pub const CERTIFIED: &str = "certified-by-hypothesis-checks";
pub const NOT_CERTIFIED: &str = "not-certified";

/// A float that survives JSON: non-finite values become "inf", "-inf", "nan".
#[derive(Debug, Clone, Copy)]
pub struct Real(pub f64);

impl PartialEq for Real {
    fn eq(&self, other: &Real) -> bool {
        (self.0.is_nan() && other.0.is_nan()) || self.0 == other.0
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Real {
        Real(v)
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Real, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                Ok(Real(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                match v {
                    "inf" => Ok(Real(f64::INFINITY)),
                    "-inf" => Ok(Real(f64::NEG_INFINITY)),
                    "nan" => Ok(Real(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

pub type Intervals = Vec<[Real; 2]>;

pub fn intervals(set: &IntervalSet) -> Intervals {
    set.intervals()
        .iter()
        .map(|iv| [Real(iv.lo), Real(iv.hi)])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DInfinity {
    /// "finite", "plus_infinity", "minus_infinity" or "divergent".
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckJson {
    pub name: String,
    /// "pass", "fail" or "inconclusive".
    pub verdict: String,
    pub witness: Option<[Real; 2]>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assumptions {
    pub checks: Vec<CheckJson>,
    pub beta: Option<Real>,
    pub gamma: Option<Real>,
    pub realness_residual: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureJson {
    pub tag: String,
    pub admissible: Vec<String>,
    pub delta_minus: Real,
    pub delta_plus: Real,
    pub s_minus: Option<Real>,
    pub s_plus: Option<Real>,
    pub s: Option<Real>,
    pub predicted: Intervals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeJson {
    pub lambda: Real,
    /// [re, im]
    pub rho0: Option<[Real; 2]>,
    pub kappa0: Option<[Real; 2]>,
    pub dis: Option<Real>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StellarJson {
    pub n: Real,
    pub alpha: Real,
    pub radius: Real,
    pub predicted_rho0: [Real; 2],
    pub predicted_kappa0: [Real; 2],
    pub predicted_dis: Real,
    pub delta_max: Real,
    pub dis_deviation: Real,
    pub rho0_deviation: Real,
    pub probes: Vec<ProbeJson>,
}

/// Everything beyond the fixed top-level schema lives here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub route: String,
    pub window: [Real; 2],
    pub regular_uncertainty: Real,
    pub d_infinity_error: Real,
    pub edge_lo: bool,
    pub edge_hi: bool,
    pub discriminant_samples: usize,
    pub structure: Option<StructureJson>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stellar: Option<StellarJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub schema_version: u32,
    pub problem_echo: ProblemConfig,
    pub d_infinity: DInfinity,
    pub regular_part: Intervals,
    pub singular_part: Intervals,
    pub union: Intervals,
    pub unresolved_lambdas: Vec<Real>,
    pub assumptions: Assumptions,
    pub certification: String,
    pub diagnostics: Diagnostics,
}

fn opt(v: Option<f64>) -> Option<Real> {
    v.map(Real)
}

fn verdict_label(v: Verdict) -> &'static str {
    v.label()
}

impl ReportJson {
    pub fn from_spectrum(echo: &ProblemConfig, r: &SpectrumReport) -> ReportJson {
        let d = &r.d_infinity;
        let value = match d.class {
            LimitClass::Finite(z) => Some(Real(z.re)),
            _ => None,
        };
        let checks = r
            .assumptions
            .checks
            .iter()
            .map(|c| CheckJson {
                name: c.name.to_string(),
                verdict: verdict_label(c.verdict).to_string(),
                witness: c.witness.as_ref().map(|w| [Real(w.at), Real(w.value)]),
                detail: c.detail.clone(),
            })
            .collect();
        let structure = r.structure.as_ref().map(|s| StructureJson {
            tag: s.tag.to_string(),
            admissible: s.admissible.iter().map(|t| t.to_string()).collect(),
            delta_minus: Real(s.delta_minus),
            delta_plus: Real(s.delta_plus),
            s_minus: opt(s.s_minus),
            s_plus: opt(s.s_plus),
            s: opt(s.s),
            predicted: intervals(&s.predicted),
        });
        ReportJson {
            schema_version: SCHEMA_VERSION,
            problem_echo: echo.clone(),
            d_infinity: DInfinity {
                class: d.class.label().to_string(),
                value,
            },
            regular_part: intervals(&r.regular_part),
            singular_part: intervals(&r.singular_part),
            union: intervals(&r.union),
            unresolved_lambdas: r.unresolved_lambdas.iter().copied().map(Real).collect(),
            assumptions: Assumptions {
                checks,
                beta: opt(r.assumptions.beta),
                gamma: opt(r.assumptions.gamma),
                realness_residual: opt(r.assumptions.realness_residual),
            },
            certification: if r.certified() {
                CERTIFIED
            } else {
                NOT_CERTIFIED
            }
            .to_string(),
            diagnostics: Diagnostics {
                route: r.route.label().to_string(),
                window: [Real(r.window.lo), Real(r.window.hi)],
                regular_uncertainty: Real(r.regular_uncertainty),
                d_infinity_error: Real(d.error_estimate),
                edge_lo: r.edge_lo,
                edge_hi: r.edge_hi,
                discriminant_samples: r.discriminant_curve.len(),
                structure,
                notes: r.notes.clone(),
                stellar: None,
            },
        }
    }

    pub fn from_stellar(echo: &ProblemConfig, s: &StellarReport) -> ReportJson {
        let mut out = ReportJson::from_spectrum(echo, &s.spectrum);
        let c = |z: esspec_core::Complex64| [Real(z.re), Real(z.im)];
        out.diagnostics.stellar = Some(StellarJson {
            n: Real(s.n),
            alpha: Real(s.alpha),
            radius: Real(s.radius),
            predicted_rho0: c(s.predicted_rho0),
            predicted_kappa0: c(s.predicted_kappa0),
            predicted_dis: Real(s.predicted_dis),
            delta_max: Real(s.delta_max),
            dis_deviation: Real(s.dis_deviation()),
            rho0_deviation: Real(s.rho0_deviation()),
            probes: s
                .probes
                .iter()
                .map(|p| ProbeJson {
                    lambda: Real(p.lambda),
                    rho0: p.rho0.map(c),
                    kappa0: p.kappa0.map(c),
                    dis: opt(p.dis),
                    error: p.error.clone(),
                })
                .collect(),
        });
        out
    }

    pub fn certified(&self) -> bool {
        self.certification == CERTIFIED
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<ReportJson, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Round-trip-exact text for a float in CSV cells ("inf", "-inf", "nan" otherwise).
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite float")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_encodes_non_finite_as_strings() {
        let v = vec![
            Real(1.5),
            Real(f64::INFINITY),
            Real(f64::NEG_INFINITY),
            Real(f64::NAN),
        ];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[1.5,"inf","-inf","nan"]"#);
        let back: Vec<Real> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<Real>(r#""infinity""#).is_err());
    }

    #[test]
    fn csv_number_format() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1e-20), "1e-20");
        assert_eq!(fmt_f64(-2.0), "-2.0");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }
}
