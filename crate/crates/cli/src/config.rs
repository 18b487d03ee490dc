//! Problem configuration: strict JSON, `schema_version` required.
//!
//! Every error carries a JSON pointer to the offending field, both for
//! structural problems (wrong type, unknown key) and semantic ones (an
//! expression that does not parse, an unbound parameter, a bad window).

use std::collections::BTreeMap;

use esspec_core::applications::StellarModel;
use esspec_core::exprlang::{parse, Symbols};
use esspec_core::spectrum::{AnalysisOptions, Route};
use esspec_core::validate::ScanSettings;
use esspec_core::{Expr, HalfLineProblem, Interval, ProblemError, UnitIntervalProblem};
use serde::{Deserialize, Serialize};

use crate::gallery;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{pointer}: {message}")]
pub struct ConfigError {
    /// RFC 6901 pointer into the config document ("" is the whole document).
    pub pointer: String,
    pub message: String,
}

impl ConfigError {
    pub fn at(pointer: impl Into<String>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    HalfLine,
    UnitInterval,
    /// Polytropic stellar model; coefficients are generated, see [`StellarConfig`].
    Stellar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteName {
    Direct,
    Transformed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w2: Option<String>,
}

impl Coefficients {
    fn slot(&self, name: &str) -> Option<&String> {
        match name {
            "p" => self.p.as_ref(),
            "q" => self.q.as_ref(),
            "b" => self.b.as_ref(),
            "c" => self.c.as_ref(),
            "d" => self.d.as_ref(),
            "w1" => self.w1.as_ref(),
            "w2" => self.w2.as_ref(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// λ window [lo, hi].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Unit-interval problems only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<RouteName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_tol_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regular_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
    /// Number of samples in curves/delta.csv.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_per_unit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_margin: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StellarConfig {
    pub n: f64,
    /// Expression in `r`; default "5/3".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_c: Option<f64>,
    /// Expression in `r`; default "0".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buoyancy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Rows in curves/theta.csv.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Coefficients>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub analysis: AnalysisConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub validation: ValidationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stellar: Option<StellarConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gallery_id: Option<String>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Parse config text. Structural errors point at the offending field.
pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ProblemConfig = serde_path_to_error::deserialize(&mut *de).map_err(|e| {
        let pointer = pointer_of(e.path());
        let inner = e.into_inner();
        ConfigError::at(pointer, inner.to_string())
    })?;
    de.end().map_err(|e| ConfigError::at("", e.to_string()))?;
    Ok(cfg)
}

/// Fill a gallery-based config from its gallery entry: fields given in the
/// config override the entry's.
pub fn merge_gallery(cfg: ProblemConfig) -> Result<ProblemConfig, ConfigError> {
    let Some(id) = cfg.gallery_id.clone() else {
        return Ok(cfg);
    };
    let entry = gallery::find(&id)
        .ok_or_else(|| ConfigError::at("/gallery_id", format!("unknown gallery id `{id}`")))?;
    let mut base = entry.config();
    if cfg.domain.is_some() && cfg.domain != base.domain {
        return Err(ConfigError::at(
            "/domain",
            format!("gallery entry `{id}` has a different domain"),
        ));
    }
    if let Some(c) = cfg.coefficients {
        base.coefficients = Some(c);
    }
    for (k, v) in cfg.parameters {
        base.parameters.insert(k, v);
    }
    let a = cfg.analysis;
    let ba = &mut base.analysis;
    macro_rules! take {
        ($dst:expr, $src:expr) => {
            if $src.is_some() {
                $dst = $src;
            }
        };
    }
    take!(ba.window, a.window);
    take!(ba.route, a.route);
    take!(ba.grid_points, a.grid_points);
    take!(ba.endpoint_tol_rel, a.endpoint_tol_rel);
    take!(ba.regular_points, a.regular_points);
    take!(ba.finite_rel_tol, a.finite_rel_tol);
    take!(ba.probes, a.probes);
    take!(ba.curve_points, a.curve_points);
    let v = cfg.validation;
    take!(base.validation.t_list, v.t_list);
    take!(base.validation.n_per_unit, v.n_per_unit);
    take!(base.validation.gap_margin, v.gap_margin);
    if cfg.stellar.is_some() {
        base.stellar = cfg.stellar;
    }
    base.schema_version = cfg.schema_version;
    base.gallery_id = Some(id);
    Ok(base)
}

/// A config whose expressions parsed and whose options are in range.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ProblemConfig,
    pub problem: ResolvedProblem,
    pub options: AnalysisOptions,
    pub curve_points: usize,
}

#[derive(Debug, Clone)]
pub enum ResolvedProblem {
    HalfLine(HalfLineProblem),
    Unit {
        problem: UnitIntervalProblem,
        route: Route,
    },
    Stellar {
        model: StellarModel,
        table_points: usize,
    },
}

fn problem_error(e: ProblemError) -> ConfigError {
    let slot = match &e {
        ProblemError::Parse { slot, .. }
        | ProblemError::Diff { slot, .. }
        | ProblemError::SubstitutionOverflow { slot, .. } => *slot,
    };
    let message = match &e {
        ProblemError::Parse { source, .. } => source.to_string(),
        ProblemError::Diff { source, .. } => source.to_string(),
        other => other.to_string(),
    };
    ConfigError::at(format!("/coefficients/{slot}"), message)
}

fn positive(v: Option<f64>, pointer: &str) -> Result<Option<f64>, ConfigError> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(ConfigError::at(
            pointer,
            format!("must be finite and > 0, got {x}"),
        )),
        other => Ok(other),
    }
}

fn stellar_expr(
    src: &str,
    params: &BTreeMap<String, f64>,
    pointer: &str,
) -> Result<Expr, ConfigError> {
    let symbols = Symbols::new("r").with_parameters(params.keys().cloned());
    parse(src, &symbols)
        .map(|e| e.bind(params))
        .map_err(|e| ConfigError::at(pointer, e.to_string()))
}

/// Names a parameter may not take: constants, variables and functions.
const RESERVED: &[&str] = &[
    "e", "pi", "i", "t", "x", "r", "exp", "log", "ln", "sin", "cos", "sqrt", "abs", "conj",
];

/// Full semantic validation; gallery ids are merged first.
pub fn resolve(cfg: ProblemConfig) -> Result<Resolved, ConfigError> {
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(ConfigError::at(
            "/schema_version",
            format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            ),
        ));
    }
    let cfg = merge_gallery(cfg)?;
    let domain = cfg
        .domain
        .ok_or_else(|| ConfigError::at("/domain", "missing field `domain`"))?;
    for (k, v) in &cfg.parameters {
        if !v.is_finite() {
            return Err(ConfigError::at(
                format!("/parameters/{k}"),
                "must be finite",
            ));
        }
        if RESERVED.contains(&k.as_str()) {
            return Err(ConfigError::at(format!("/parameters/{k}"), "reserved name"));
        }
        let mut chars = k.chars();
        let ident = chars
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ident {
            return Err(ConfigError::at(
                format!("/parameters/{k}"),
                "not an identifier",
            ));
        }
    }

    let mut options = AnalysisOptions::default();
    let a = &cfg.analysis;
    if let Some([lo, hi]) = a.window {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ConfigError::at(
                "/analysis/window",
                format!("need finite lo < hi, got [{lo}, {hi}]"),
            ));
        }
        options.window = Some(Interval::new(lo, hi));
    }
    if let Some(g) = a.grid_points {
        if g < 8 {
            return Err(ConfigError::at("/analysis/grid_points", "must be ≥ 8"));
        }
        options.scan.grid_points = g;
    }
    if let Some(t) = positive(a.endpoint_tol_rel, "/analysis/endpoint_tol_rel")? {
        options.scan.endpoint_tol_rel = t;
    }
    if let Some(r) = a.regular_points {
        if r < 16 {
            return Err(ConfigError::at("/analysis/regular_points", "must be ≥ 16"));
        }
        options.regular.uniform_points = r;
    }
    if let Some(t) = positive(a.finite_rel_tol, "/analysis/finite_rel_tol")? {
        options.limits.finite_rel_tol = t;
    }
    if let Some(p) = a.probes {
        options.probes = p;
    }
    let curve_points = a.curve_points.unwrap_or(1001);
    if curve_points < 2 {
        return Err(ConfigError::at("/analysis/curve_points", "must be ≥ 2"));
    }
    if let Some(ts) = &cfg.validation.t_list {
        if ts.is_empty() {
            return Err(ConfigError::at("/validation/t_list", "must not be empty"));
        }
        for (i, t) in ts.iter().enumerate() {
            positive(Some(*t), &format!("/validation/t_list/{i}"))?;
        }
    }
    positive(cfg.validation.n_per_unit, "/validation/n_per_unit")?;
    if let Some(m) = cfg.validation.gap_margin {
        if !(m.is_finite() && m >= 0.0) {
            return Err(ConfigError::at(
                "/validation/gap_margin",
                "must be finite and ≥ 0",
            ));
        }
    }
    if a.route.is_some() && domain != Domain::UnitInterval {
        return Err(ConfigError::at(
            "/analysis/route",
            "route applies to unit_interval problems only",
        ));
    }

    let problem = match domain {
        Domain::HalfLine | Domain::UnitInterval => {
            let coeffs = cfg
                .coefficients
                .as_ref()
                .ok_or_else(|| ConfigError::at("/coefficients", "missing field `coefficients`"))?;
            let slots: &[&str] = if domain == Domain::HalfLine {
                &["p", "q", "b", "c", "d"]
            } else {
                &["p", "q", "b", "c", "d", "w1", "w2"]
            };
            let mut src = Vec::new();
            for s in slots {
                let text = coeffs.slot(s).ok_or_else(|| {
                    ConfigError::at(
                        format!("/coefficients/{s}"),
                        format!("missing coefficient `{s}`"),
                    )
                })?;
                src.push(text.as_str());
            }
            if domain == Domain::HalfLine {
                if coeffs.w1.is_some() || coeffs.w2.is_some() {
                    let s = if coeffs.w1.is_some() { "w1" } else { "w2" };
                    return Err(ConfigError::at(
                        format!("/coefficients/{s}"),
                        "weights apply to unit_interval problems only",
                    ));
                }
                let arr = [src[0], src[1], src[2], src[3], src[4]];
                ResolvedProblem::HalfLine(
                    HalfLineProblem::from_sources(arr, &cfg.parameters).map_err(problem_error)?,
                )
            } else {
                let arr = [src[0], src[1], src[2], src[3], src[4], src[5], src[6]];
                let problem = UnitIntervalProblem::from_sources(arr, &cfg.parameters)
                    .map_err(problem_error)?;
                let route = match a.route.unwrap_or(RouteName::Direct) {
                    RouteName::Direct => Route::UnitDirect,
                    RouteName::Transformed => Route::UnitTransformed,
                };
                ResolvedProblem::Unit { problem, route }
            }
        }
        Domain::Stellar => {
            if cfg.coefficients.is_some() {
                return Err(ConfigError::at(
                    "/coefficients",
                    "stellar problems generate their coefficients",
                ));
            }
            let s = cfg
                .stellar
                .as_ref()
                .ok_or_else(|| ConfigError::at("/stellar", "missing field `stellar`"))?;
            if !(s.n.is_finite() && s.n > 0.0 && s.n < 5.0) {
                return Err(ConfigError::at(
                    "/stellar/n",
                    "polytropic index must lie in (0, 5)",
                ));
            }
            let mut model = StellarModel::polytrope(s.n);
            if let Some(g) = &s.gamma1 {
                model.gamma1 = stellar_expr(g, &cfg.parameters, "/stellar/gamma1")?;
            }
            if let Some(b) = &s.buoyancy {
                model.buoyancy = stellar_expr(b, &cfg.parameters, "/stellar/buoyancy")?;
            }
            if let Some(c) = positive(s.c, "/stellar/c")? {
                model.c = c;
            }
            if let Some(v) = positive(s.p_c, "/stellar/p_c")? {
                model.p_c = v;
            }
            if let Some(v) = positive(s.rho_c, "/stellar/rho_c")? {
                model.rho_c = v;
            }
            if let Some(v) = positive(s.alpha, "/stellar/alpha")? {
                model.alpha = v;
            }
            if let Some(t) = s.tol {
                if !(t > 0.0 && t <= 1e-3) {
                    return Err(ConfigError::at("/stellar/tol", "must lie in (0, 1e-3]"));
                }
                model.tol = t;
            }
            let table_points = s.table_points.unwrap_or(1001);
            if table_points < 2 {
                return Err(ConfigError::at("/stellar/table_points", "must be ≥ 2"));
            }
            ResolvedProblem::Stellar {
                model,
                table_points,
            }
        }
    };
    if domain != Domain::Stellar && cfg.stellar.is_some() {
        return Err(ConfigError::at(
            "/stellar",
            "only valid with domain `stellar`",
        ));
    }
    Ok(Resolved {
        config: cfg,
        problem,
        options,
        curve_points,
    })
}

/// Validation settings from the config (defaults: T ∈ {25, 50, 100, 200}, 10 nodes per unit).
pub fn scan_settings(cfg: &ProblemConfig) -> ScanSettings {
    let mut s = ScanSettings::default();
    if let Some(t) = &cfg.validation.t_list {
        s.t_list = t.clone();
    }
    if let Some(n) = cfg.validation.n_per_unit {
        s.n_per_unit = n;
    }
    if let Some(m) = cfg.validation.gap_margin {
        s.gap_margin = m;
    }
    s
}

/// Parse and resolve in one go.
pub fn load_str(text: &str) -> Result<Resolved, ConfigError> {
    resolve(parse_config(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> String {
        r#"{"schema_version":1,"domain":"half_line",
            "coefficients":{"p":"1","q":"2","b":"1","c":"0","d":"0"}}"#
            .to_string()
    }

    #[test]
    fn minimal_config_resolves() {
        let r = load_str(&base()).unwrap();
        assert!(matches!(r.problem, ResolvedProblem::HalfLine(_)));
    }

    #[test]
    fn malformed_expression_points_at_slot() {
        let text = base().replace(r#""p":"1""#, r#""p":"1+*t""#);
        let e = load_str(&text).unwrap_err();
        assert_eq!(e.pointer, "/coefficients/p");
    }

    #[test]
    fn unbound_parameter_points_at_slot() {
        let text = base().replace(r#""q":"2""#, r#""q":"m^2""#);
        let e = load_str(&text).unwrap_err();
        assert_eq!(e.pointer, "/coefficients/q");
        let text = text.replace(
            r#""coefficients""#,
            r#""parameters":{"m":2},"coefficients""#,
        );
        assert!(load_str(&text).is_ok());
    }

    #[test]
    fn structural_errors_have_pointers() {
        let text = base().replace(
            r#""domain":"half_line","#,
            r#""domain":"half_line","analysis":{"window":[0,"x"]},"#,
        );
        assert_eq!(load_str(&text).unwrap_err().pointer, "/analysis/window/1");
        let text = base().replace(r#""schema_version":1,"#, "");
        let e = load_str(&text).unwrap_err();
        assert_eq!(e.pointer, "");
        assert!(e.message.contains("schema_version"));
        let text = base().replace(r#""c":"0""#, r#""c":"0","e":"1""#);
        assert_eq!(load_str(&text).unwrap_err().pointer, "/coefficients/e");
    }

    #[test]
    fn missing_weight_for_unit_interval() {
        let text = base().replace("half_line", "unit_interval");
        assert_eq!(load_str(&text).unwrap_err().pointer, "/coefficients/w1");
    }

    #[test]
    fn bad_window_and_version() {
        let text = base().replace(r#""domain""#, r#""analysis":{"window":[3,1]},"domain""#);
        assert_eq!(load_str(&text).unwrap_err().pointer, "/analysis/window");
        let text = base().replace(r#""schema_version":1"#, r#""schema_version":7"#);
        assert_eq!(load_str(&text).unwrap_err().pointer, "/schema_version");
    }

    #[test]
    fn reserved_parameter_names_are_rejected() {
        for name in ["pi", "x", "sin", "2a"] {
            let text = format!(
                r#"{{"schema_version":1,"gallery_id":"toroidal-bands","parameters":{{"{name}":2}}}}"#
            );
            let err = load_str(&text).unwrap_err();
            assert_eq!(err.pointer, format!("/parameters/{name}"));
        }
    }

    #[test]
    fn gallery_merge_overrides_parameters() {
        let r =
            load_str(r#"{"schema_version":1,"gallery_id":"toroidal-bands","parameters":{"m":2}}"#)
                .unwrap();
        assert_eq!(r.config.parameters["m"], 2.0);
        assert_eq!(r.config.parameters["omega"], 0.5);
        let e = load_str(r#"{"schema_version":1,"gallery_id":"nope"}"#).unwrap_err();
        assert_eq!(e.pointer, "/gallery_id");
    }
}
