//! The pipelines behind the subcommands, separated from argument parsing.

use std::path::Path;

use esspec_core::applications::{build_stellar_problem, stellar_essential_spectrum, StellarError};
use esspec_core::schur::{SchurSymbols, WeightedSchurSymbols};
use esspec_core::spectrum::Route;
use esspec_core::validate::{
    essential_window_scan, GrowthTable, GrowthVerdict, ValidateError, WindowKind,
};
use esspec_core::{
    analyze_half_line, analyze_unit_direct, analyze_unit_transformed, Executor, Interval,
    IntervalSet, ProblemError,
};

use crate::config::{load_str, scan_settings, ConfigError, Resolved, ResolvedProblem};
use crate::gallery::{self, Entry};
use crate::output::{self, write_atomic, IoError};
use crate::report::ReportJson;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error at {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Stellar(#[from] StellarError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
    #[error("{0}")]
    Unsupported(String),
}

/// Exit codes: 0 success, 1 error, 2 result produced but not certified.
pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_CERTIFIED: u8 = 2;

/// A finished analysis: the report plus its curve files (paths relative to the output dir).
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: ReportJson,
    pub files: Vec<(String, String)>,
}

impl Analysis {
    pub fn write(&self, outdir: &Path) -> Result<(), IoError> {
        write_atomic(
            &outdir.join("report.json"),
            self.report.to_json().as_bytes(),
        )?;
        for (name, text) in &self.files {
            write_atomic(&outdir.join(name), text.as_bytes())?;
        }
        Ok(())
    }

    pub fn exit_code(&self) -> u8 {
        if self.report.certified() {
            EXIT_OK
        } else {
            EXIT_NOT_CERTIFIED
        }
    }
}

pub fn read_config(path: &Path) -> Result<Resolved, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(load_str(&text)?)
}

pub fn run_analysis(res: &Resolved, exec: &impl Executor) -> Result<Analysis, RunError> {
    let echo = &res.config;
    let opts = &res.options;
    let n = res.curve_points;
    match &res.problem {
        ResolvedProblem::HalfLine(p) => {
            let r = analyze_half_line(p, opts, exec);
            let sym = SchurSymbols::new(p);
            Ok(Analysis {
                report: ReportJson::from_spectrum(echo, &r),
                files: vec![
                    (
                        "curves/discriminant.csv".into(),
                        output::discriminant_csv(&r.discriminant_curve),
                    ),
                    (
                        "curves/delta.csv".into(),
                        output::delta_csv_half_line(&sym, n),
                    ),
                ],
            })
        }
        ResolvedProblem::Unit { problem, route } => {
            let r = match route {
                Route::UnitTransformed => analyze_unit_transformed(problem, opts, exec)?,
                _ => analyze_unit_direct(problem, opts, exec),
            };
            let sym = WeightedSchurSymbols::new(problem);
            Ok(Analysis {
                report: ReportJson::from_spectrum(echo, &r),
                files: vec![
                    (
                        "curves/discriminant.csv".into(),
                        output::discriminant_csv(&r.discriminant_curve),
                    ),
                    ("curves/delta.csv".into(), output::delta_csv_unit(&sym, n)),
                ],
            })
        }
        ResolvedProblem::Stellar {
            model,
            table_points,
        } => {
            let built = build_stellar_problem(model)?;
            let s = stellar_essential_spectrum(model, opts, exec)?;
            let sym = WeightedSchurSymbols::new(&built.problem);
            Ok(Analysis {
                report: ReportJson::from_stellar(echo, &s),
                files: vec![
                    (
                        "curves/discriminant.csv".into(),
                        output::discriminant_csv(&s.spectrum.discriminant_curve),
                    ),
                    ("curves/delta.csv".into(), output::delta_csv_unit(&sym, n)),
                    (
                        "curves/theta.csv".into(),
                        output::theta_csv(&built.solution.table(*table_points)),
                    ),
                ],
            })
        }
    }
}

/// Truncation check of a half-line analysis: inside windows should grow, gap windows stay bounded.
pub fn run_validation(
    res: &Resolved,
    exec: &impl Executor,
) -> Result<(Analysis, GrowthTable), RunError> {
    let ResolvedProblem::HalfLine(problem) = &res.problem else {
        return Err(RunError::Unsupported(
            "validate works on half_line problems (the truncation lives on [0, T])".into(),
        ));
    };
    let analysis = run_analysis(res, exec)?;
    let r = &analysis.report;
    let view = Interval::new(r.diagnostics.window[0].0, r.diagnostics.window[1].0);
    // A piece cut off by the window edge continues beyond it.
    let d = &r.diagnostics;
    let predicted = IntervalSet::from_intervals(r.union.iter().map(|[a, b]| {
        let lo = if d.edge_lo && a.0 <= view.lo {
            f64::NEG_INFINITY
        } else {
            a.0
        };
        let hi = if d.edge_hi && b.0 >= view.hi {
            f64::INFINITY
        } else {
            b.0
        };
        Interval::new(lo, hi)
    }));
    let table =
        essential_window_scan(problem, &predicted, view, &scan_settings(&res.config), exec)?;
    Ok((analysis, table))
}

/// True when every inside window grows and every gap window stays bounded.
pub fn growth_consistent(table: &GrowthTable) -> bool {
    table.rows.iter().all(|row| match row.kind {
        WindowKind::Inside => row.verdict == GrowthVerdict::Grows,
        WindowKind::Gap => row.verdict == GrowthVerdict::Bounded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GalleryStatus {
    Pass,
    Fail,
    /// Expected failure (known conflict), and it did fail.
    XFail,
    /// Expected failure that passed: the expectation is stale.
    XPass,
    Error,
}

impl GalleryStatus {
    pub fn label(self) -> &'static str {
        match self {
            GalleryStatus::Pass => "pass",
            GalleryStatus::Fail => "FAIL",
            GalleryStatus::XFail => "xfail",
            GalleryStatus::XPass => "XPASS",
            GalleryStatus::Error => "ERROR",
        }
    }

    pub fn is_ok(self) -> bool {
        matches!(self, GalleryStatus::Pass | GalleryStatus::XFail)
    }
}

#[derive(Debug, Clone)]
pub struct GalleryRun {
    pub id: &'static str,
    pub status: GalleryStatus,
    pub detail: String,
    pub analysis: Option<Analysis>,
}

pub fn run_gallery_entry(entry: &'static Entry, exec: &impl Executor) -> GalleryRun {
    let fail = |detail: String| GalleryRun {
        id: entry.id,
        status: GalleryStatus::Error,
        detail,
        analysis: None,
    };
    let res = match crate::config::resolve(entry.config()) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let analysis = match run_analysis(&res, exec) {
        Ok(a) => a,
        Err(e) => return fail(e.to_string()),
    };
    let golden = entry.golden(&res.config.parameters);
    let outcome = gallery::check(&golden, &analysis.report);
    let status = match (outcome.passed, entry.xfail.is_some()) {
        (true, false) => GalleryStatus::Pass,
        (false, false) => GalleryStatus::Fail,
        (false, true) => GalleryStatus::XFail,
        (true, true) => GalleryStatus::XPass,
    };
    let detail = match (status, entry.xfail) {
        (GalleryStatus::XFail, Some(why)) => format!("{}; known: {why}", outcome.detail),
        _ => outcome.detail,
    };
    GalleryRun {
        id: entry.id,
        status,
        detail,
        analysis: Some(analysis),
    }
}

/// Run every entry; writes `<outdir>/<id>/...` and `<outdir>/summary.csv` when `outdir` is set.
pub fn run_all(outdir: Option<&Path>, exec: &impl Executor) -> Result<Vec<GalleryRun>, RunError> {
    let runs: Vec<GalleryRun> = gallery::ENTRIES
        .iter()
        .map(|e| run_gallery_entry(e, exec))
        .collect();
    if let Some(dir) = outdir {
        for r in &runs {
            if let Some(a) = &r.analysis {
                a.write(&dir.join(r.id))?;
            }
        }
        write_atomic(&dir.join("summary.csv"), summary_csv(&runs).as_bytes())?;
    }
    Ok(runs)
}

pub fn summary_csv(runs: &[GalleryRun]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["id", "status", "certification", "detail"])
        .expect("in-memory write");
    for r in runs {
        let cert = r
            .analysis
            .as_ref()
            .map_or("-", |a| a.report.certification.as_str());
        w.write_record([r.id, r.status.label(), cert, r.detail.as_str()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
