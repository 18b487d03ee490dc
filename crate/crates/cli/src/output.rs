//! Atomic file writes and the CSV curve formats.

use std::io::Write;
use std::path::{Path, PathBuf};

use esspec_core::schur::{SchurSymbols, WeightedSchurSymbols};
use esspec_core::spectrum::DisSample;
use esspec_core::validate::GrowthTable;

use crate::report::fmt_f64;

#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct IoError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

/// Write via a temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let wrap = |source| IoError {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(wrap)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(bytes).map_err(wrap)?;
    tmp.flush().map_err(wrap)?;
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn discriminant_csv(curve: &[DisSample]) -> String {
    csv_text(
        &[
            "lambda",
            "dis",
            "rho_over_pi_re",
            "kappa_over_pi_re",
            "status",
            "residual",
            "precision",
        ],
        curve.iter().map(|s| {
            vec![
                fmt_f64(s.lambda),
                fmt_f64(s.dis),
                fmt_f64(s.rho.re),
                fmt_f64(s.kappa.re),
                s.status.label().to_string(),
                fmt_f64(s.residual),
                fmt_f64(s.precision),
            ]
        }),
    )
}

/// Δ on t ∈ [0, 20].
pub fn delta_csv_half_line(sym: &SchurSymbols, points: usize) -> String {
    let m = points.max(2);
    csv_text(
        &["t", "delta"],
        (0..m).map(|k| {
            let t = 20.0 * k as f64 / (m - 1) as f64;
            vec![fmt_f64(t), fmt_f64(sym.eval_delta(t).unwrap_or(f64::NAN))]
        }),
    )
}

/// Δ̃ on x ∈ (0, 1].
pub fn delta_csv_unit(sym: &WeightedSchurSymbols, points: usize) -> String {
    let m = points.max(2);
    csv_text(
        &["x", "delta"],
        (1..=m).map(|k| {
            let x = k as f64 / m as f64;
            vec![fmt_f64(x), fmt_f64(sym.delta_t(x).unwrap_or(f64::NAN))]
        }),
    )
}

pub fn growth_csv(table: &GrowthTable) -> String {
    csv_text(
        &["window_lo", "window_hi", "T", "count", "verdict"],
        table.flat().into_iter().map(|(lo, hi, t, count, verdict)| {
            vec![
                fmt_f64(lo),
                fmt_f64(hi),
                fmt_f64(t),
                count.to_string(),
                verdict.to_string(),
            ]
        }),
    )
}

pub fn theta_csv(rows: &[(f64, f64, f64)]) -> String {
    csv_text(
        &["r", "theta", "theta_prime"],
        rows.iter()
            .map(|&(r, th, dth)| vec![fmt_f64(r), fmt_f64(th), fmt_f64(dth)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lf_terminated_with_header() {
        let s = theta_csv(&[(0.0, 1.0, 0.0), (0.5, 0.9, -0.1)]);
        assert_eq!(s, "r,theta,theta_prime\n0.0,1.0,0.0\n0.5,0.9,-0.1\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
