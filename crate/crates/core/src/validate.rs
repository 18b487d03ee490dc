//! Independent cross-check by truncation: discretize the quadratic form of
//! a half-line problem on [0, T] with Dirichlet conditions for y₁, count
//! eigenvalues below a shift from the inertia of a block LDLᴴ factorization,
//! and watch how window counts grow with T.
//!
//! Inside the essential spectrum the number of eigenvalues in a window grows
//! (roughly linearly) with T; in a gap it stays bounded. Spectral pollution is
//! a real hazard for this operator class, so verdicts are advisory.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::coefficients::HalfLineProblem;
use crate::exprlang::Tape;
use crate::interval::{Interval, IntervalSet};
use crate::spectrum::Executor;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidateError {
    #[error("coefficient evaluation failed at t = {at}: {message}")]
    EvaluationFailed { at: f64, message: String },
    #[error("grid too small: N = {0} (need N >= 16)")]
    GridTooSmall(usize),
    #[error("factorization breakdown at block {block} for shift {lambda}")]
    FactorizationBreakdown { block: usize, lambda: f64 },
}

/// Hermitian block-tridiagonal matrix of the truncated form, 2×2 blocks in
/// the interleaved ordering (y₁(t_i), y₂(t_i)), nodes t_i = i·h, i = 1..=N,
/// h = T/(N+1).
///
/// Row-major 2×2 blocks: `diag[i]` is block (i, i) and `lower[i]` is block
/// (i+1, i); block (i, i+1) is `lower[i]ᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    pub t_len: f64,
    pub n: usize,
    pub h: f64,
    pub diag: Vec<[[Complex64; 2]; 2]>,
    pub lower: Vec<[[Complex64; 2]; 2]>,
    /// Max row 1-norm, the scale for zero pivots.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InertiaCount {
    /// #eigenvalues < λ.
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Assemble the form
/// ∫ p|y₁′|² + q|y₁|² + 2Re(b y₁′ ȳ₂) + 2Re(c y₁ ȳ₂) + d|y₂|²
/// with y₁(0) = y₁(T) = 0: midpoint p in the second-difference stencil,
/// centered differences for y₁′ in the coupling, and unit mass.
pub fn assemble(
    problem: &HalfLineProblem,
    t_len: f64,
    n: usize,
) -> Result<DiscretizedOperator, ValidateError> {
    if n < 16 {
        return Err(ValidateError::GridTooSmall(n));
    }
    let tape = Tape::compile_many(&[
        problem.p.clone(),
        problem.q.clone(),
        problem.b.clone(),
        problem.c.clone(),
        problem.d.clone(),
    ]);
    let h = t_len / (n + 1) as f64;
    let mut out = [ZERO; 5];
    let eval = |t: f64, out: &mut [Complex64; 5]| -> Result<(), ValidateError> {
        tape.eval_into(t, out)
            .map_err(|e| ValidateError::EvaluationFailed {
                at: t,
                message: format!("{e}"),
            })
    };
    let p_mid: Vec<f64> = (0..=n)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            eval(t, &mut out).map(|_| out[0].re)
        })
        .collect::<Result<_, _>>()?;
    let mut q = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for i in 1..=n {
        eval(i as f64 * h, &mut out)?;
        q.push(out[1].re);
        b.push(out[2]);
        c.push(out[3]);
        d.push(out[4].re);
    }
    let h2 = h * h;
    let mut diag = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n {
        // Node i (0-based) is t_{i+1}; p_mid[i] sits at t_{i+1/2}.
        let a11 = Complex64::new((p_mid[i] + p_mid[i + 1]) / h2 + q[i], 0.0);
        diag.push([[a11, c[i].conj()], [c[i], Complex64::new(d[i], 0.0)]]);
    }
    for i in 0..n.saturating_sub(1) {
        // Block (i+1, i): rows (y₁_{i+1}, y₂_{i+1}), columns (y₁_i, y₂_i).
        // y₂_{i+1} sees −b_{i+1}/(2h)·y₁_i; y₁_{i+1} sees conj(b_i)/(2h)·y₂_i.
        let l11 = Complex64::new(-p_mid[i + 1] / h2, 0.0);
        let l12 = b[i].conj() / (2.0 * h);
        let l21 = -b[i + 1] / (2.0 * h);
        lower.push([[l11, l12], [l21, ZERO]]);
    }
    let mut op = DiscretizedOperator {
        t_len,
        n,
        h,
        diag,
        lower,
        scale: 0.0,
    };
    op.scale = op.row_norm_max();
    Ok(op)
}

fn adj(m: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

fn mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut r = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Eigenvalues (ascending) of a 2×2 Hermitian block.
fn eig2(m: &[[Complex64; 2]; 2]) -> (f64, f64) {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let z = m[0][1].norm();
    let mid = 0.5 * (a + d);
    let r = libm::hypot(0.5 * (a - d), z);
    let det = a * d - z * z;
    if mid >= 0.0 {
        let hi = mid + r;
        (if hi != 0.0 { det / hi } else { mid - r }, hi)
    } else {
        let lo = mid - r;
        (lo, if lo != 0.0 { det / lo } else { mid + r })
    }
}

impl DiscretizedOperator {
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Entry (r, c) of the full matrix.
    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        let (bi, ri) = (r / 2, r % 2);
        let (bj, cj) = (c / 2, c % 2);
        if bi == bj {
            self.diag[bi][ri][cj]
        } else if bi == bj + 1 {
            self.lower[bj][ri][cj]
        } else if bj == bi + 1 {
            self.lower[bi][cj][ri].conj()
        } else {
            ZERO
        }
    }

    fn row_norm_max(&self) -> f64 {
        let dim = self.dim();
        let mut m: f64 = 0.0;
        for r in 0..dim {
            let lo = r.saturating_sub(3);
            let hi = (r + 3).min(dim - 1);
            let s: f64 = (lo..=hi).map(|c| self.entry(r, c).norm()).sum();
            m = m.max(s);
        }
        m
    }

    /// Dense copy, row-major, for small-N checks.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let dim = self.dim();
        (0..dim)
            .map(|r| (0..dim).map(|c| self.entry(r, c)).collect())
            .collect()
    }

    /// Gershgorin interval containing all eigenvalues.
    pub fn gershgorin(&self) -> Interval {
        let dim = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..dim {
            let a = self.entry(r, r).re;
            let lo_c = r.saturating_sub(3);
            let hi_c = (r + 3).min(dim - 1);
            let rad: f64 = (lo_c..=hi_c)
                .filter(|c| *c != r)
                .map(|c| self.entry(r, c).norm())
                .sum();
            lo = lo.min(a - rad);
            hi = hi.max(a + rad);
        }
        Interval::new(lo, hi)
    }

    /// Inertia of M − λ from the block LDLᴴ factorization with 2×2 pivots
    /// D_1 = A_1 − λ, D_{i+1} = A_{i+1} − λ − L_i D_i⁻¹ L_iᴴ (Sylvester).
    pub fn inertia(&self, lambda: f64) -> Result<InertiaCount, ValidateError> {
        let tol = 1e-12 * self.scale.max(f64::MIN_POSITIVE);
        let mut count = InertiaCount {
            n_minus: 0,
            n_zero: 0,
            n_plus: 0,
        };
        let mut prev_inv: Option<[[Complex64; 2]; 2]> = None;
        for i in 0..self.n {
            let mut dblk = self.diag[i];
            dblk[0][0] -= lambda;
            dblk[1][1] -= lambda;
            if let Some(inv) = prev_inv {
                let l = &self.lower[i - 1];
                let s = mul(&mul(l, &inv), &adj(l));
                for r in 0..2 {
                    for c in 0..2 {
                        dblk[r][c] -= s[r][c];
                    }
                }
                // Keep the pivot exactly Hermitian.
                dblk[0][0].im = 0.0;
                dblk[1][1].im = 0.0;
                let off = 0.5 * (dblk[0][1] + dblk[1][0].conj());
                dblk[0][1] = off;
                dblk[1][0] = off.conj();
            }
            let (e1, e2) = eig2(&dblk);
            let mut zeros = 0;
            for e in [e1, e2] {
                if e.abs() < tol {
                    zeros += 1;
                    count.n_zero += 1;
                } else if e < 0.0 {
                    count.n_minus += 1;
                } else {
                    count.n_plus += 1;
                }
            }
            if i + 1 < self.n {
                if zeros > 0 {
                    return Err(ValidateError::FactorizationBreakdown { block: i, lambda });
                }
                let det = dblk[0][0] * dblk[1][1] - dblk[0][1] * dblk[1][0];
                prev_inv = Some([
                    [dblk[1][1] / det, -dblk[0][1] / det],
                    [-dblk[1][0] / det, dblk[0][0] / det],
                ]);
            }
        }
        Ok(count)
    }
}

pub fn inertia_count(op: &DiscretizedOperator, lambda: f64) -> Result<InertiaCount, ValidateError> {
    op.inertia(lambda)
}

/// [`inertia_count`], retrying at λ + k·1e-10·(1+|λ|), k = 1..=3, after a
/// breakdown. Returns the count and the shift actually used.
pub fn inertia_count_perturbed(
    op: &DiscretizedOperator,
    lambda: f64,
) -> Result<(InertiaCount, f64), ValidateError> {
    let mut last = None;
    for k in 0..4 {
        let l = lambda + k as f64 * 1e-10 * (1.0 + lambda.abs());
        match op.inertia(l) {
            Ok(c) => return Ok((c, l)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

// ---------------------------------------------------------------------------
// Window scan

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Inside,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthVerdict {
    Grows,
    Bounded,
    PollutionSuspect,
}

impl GrowthVerdict {
    pub fn label(self) -> &'static str {
        match self {
            GrowthVerdict::Grows => "grows",
            GrowthVerdict::Bounded => "bounded",
            GrowthVerdict::PollutionSuspect => "pollution-suspect",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRow {
    pub window: Interval,
    pub kind: WindowKind,
    /// Eigenvalue counts in [lo, hi) for each T.
    pub counts: Vec<usize>,
    /// Least-squares slope of counts against T.
    pub slope: f64,
    pub verdict: GrowthVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTable {
    pub t_list: Vec<f64>,
    pub rows: Vec<WindowRow>,
    /// Shifts that had to be perturbed after a factorization breakdown.
    pub perturbed: Vec<(f64, f64)>,
}

impl GrowthTable {
    /// (window_lo, window_hi, T, count, verdict) rows in table order.
    pub fn flat(&self) -> Vec<(f64, f64, f64, usize, &'static str)> {
        let mut out = Vec::new();
        for r in &self.rows {
            for (t, c) in self.t_list.iter().zip(&r.counts) {
                out.push((r.window.lo, r.window.hi, *t, *c, r.verdict.label()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub t_list: Vec<f64>,
    pub n_per_unit: f64,
    /// Gap windows keep this distance from the predicted set.
    pub gap_margin: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            t_list: vec![25.0, 50.0, 100.0, 200.0],
            n_per_unit: 10.0,
            gap_margin: 0.5,
        }
    }
}

/// Probe windows: three inside each bounded predicted interval of positive
/// width (width 1/6 of it, centred at 1/4, 1/2, 3/4), and three in the gaps of the
/// predicted set within `view`, kept `margin` away from it.
pub fn probe_windows(
    predicted: &IntervalSet,
    view: Interval,
    margin: f64,
) -> Vec<(Interval, WindowKind)> {
    let mut out = Vec::new();
    for iv in predicted.intervals() {
        if !iv.lo.is_finite() || !iv.hi.is_finite() || iv.width() <= 0.0 {
            continue;
        }
        let w = iv.width() / 6.0;
        for k in 1..=3 {
            let c = iv.lo + iv.width() * k as f64 / 4.0;
            out.push((Interval::new(c - 0.5 * w, c + 0.5 * w), WindowKind::Inside));
        }
    }
    let gaps: Vec<Interval> = predicted
        .gaps_in(view)
        .iter()
        .filter_map(|g| {
            let lo = if g.lo > view.lo || predicted.contains(g.lo) {
                g.lo + margin
            } else {
                g.lo
            };
            let hi = if g.hi < view.hi || predicted.contains(g.hi) {
                g.hi - margin
            } else {
                g.hi
            };
            (hi > lo).then(|| Interval::new(lo, hi))
        })
        .collect();
    if !gaps.is_empty() {
        let mut order: Vec<usize> = (0..gaps.len()).collect();
        order.sort_by(|a, b| gaps[*b].width().total_cmp(&gaps[*a].width()).then(a.cmp(b)));
        // One window in each of the (up to) three widest gaps; leftovers go
        // to the widest gap.
        let mut pieces = vec![0usize; gaps.len()];
        for &i in order.iter().take(3) {
            pieces[i] = 1;
        }
        pieces[order[0]] += 3usize.saturating_sub(order.len());
        let mut gap_windows = Vec::new();
        for (g, m) in gaps.iter().zip(&pieces) {
            for j in 0..*m {
                let a = g.lo + g.width() * j as f64 / *m as f64;
                let b = g.lo + g.width() * (j + 1) as f64 / *m as f64;
                gap_windows.push(Interval::new(a, b));
            }
        }
        gap_windows.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        out.extend(gap_windows.into_iter().map(|w| (w, WindowKind::Gap)));
    }
    out
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Window counts against truncation length. Slope ≥ 0.5·(median slope of
/// the inside windows) ⇒ "grows"; slope ≤ 0.05 ⇒ "bounded"; otherwise
/// "pollution-suspect".
pub fn essential_window_scan(
    problem: &HalfLineProblem,
    predicted: &IntervalSet,
    view: Interval,
    settings: &ScanSettings,
    exec: &impl Executor,
) -> Result<GrowthTable, ValidateError> {
    let windows = probe_windows(predicted, view, settings.gap_margin);
    let ops: Vec<DiscretizedOperator> = exec
        .map(settings.t_list.len(), |k| {
            let t = settings.t_list[k];
            let n = (libm::round(t * settings.n_per_unit) as usize).max(16);
            assemble(problem, t, n)
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    let mut shifts: Vec<f64> = windows.iter().flat_map(|(w, _)| [w.lo, w.hi]).collect();
    shifts.sort_by(f64::total_cmp);
    shifts.dedup();
    let jobs: Vec<(usize, f64)> = (0..ops.len())
        .flat_map(|o| shifts.iter().map(move |s| (o, *s)))
        .collect();
    let results = exec.map(jobs.len(), |j| {
        let (o, s) = jobs[j];
        inertia_count_perturbed(&ops[o], s)
    });
    let mut below = vec![vec![0usize; shifts.len()]; ops.len()];
    let mut perturbed = Vec::new();
    for (j, r) in results.into_iter().enumerate() {
        let (o, s) = jobs[j];
        let (c, used) = r?;
        if used != s {
            perturbed.push((s, used));
        }
        let idx = shifts.iter().position(|x| *x == s).unwrap();
        below[o][idx] = c.n_minus;
    }
    let at = |o: usize, s: f64| below[o][shifts.iter().position(|x| *x == s).unwrap()];
    let mut rows: Vec<WindowRow> = windows
        .iter()
        .map(|(w, kind)| {
            let counts: Vec<usize> = (0..ops.len()).map(|o| at(o, w.hi) - at(o, w.lo)).collect();
            let y: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
            WindowRow {
                window: *w,
                kind: *kind,
                slope: ls_slope(&settings.t_list, &y),
                counts,
                verdict: GrowthVerdict::PollutionSuspect,
            }
        })
        .collect();
    let mut inside: Vec<f64> = rows
        .iter()
        .filter(|r| r.kind == WindowKind::Inside)
        .map(|r| r.slope)
        .collect();
    inside.sort_by(f64::total_cmp);
    let median = if inside.is_empty() {
        f64::INFINITY
    } else if inside.len() % 2 == 1 {
        inside[inside.len() / 2]
    } else {
        0.5 * (inside[inside.len() / 2 - 1] + inside[inside.len() / 2])
    };
    for r in &mut rows {
        r.verdict = if r.slope <= 0.05 {
            GrowthVerdict::Bounded
        } else if r.slope >= 0.5 * median {
            GrowthVerdict::Grows
        } else {
            GrowthVerdict::PollutionSuspect
        };
    }
    Ok(GrowthTable {
        t_list: settings.t_list.clone(),
        rows,
        perturbed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Sequential;
    use alloc::collections::BTreeMap;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn half(src: [&str; 5]) -> HalfLineProblem {
        HalfLineProblem::from_sources(src, &BTreeMap::new()).unwrap()
    }

    fn dense_eigs(op: &DiscretizedOperator) -> Vec<f64> {
        let dim = op.dim();
        let m = DMatrix::from_fn(dim, dim, |r, c| {
            let z = op.entry(r, c);
            nalgebra::Complex::new(z.re, z.im)
        });
        let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn hermitian_by_construction() {
        let op = assemble(&half(["1+t", "2", "1+i*t", "exp(-t)", "t"]), 10.0, 32).unwrap();
        for r in 0..op.dim() {
            for c in 0..op.dim() {
                assert_eq!(op.entry(r, c), op.entry(c, r).conj());
            }
        }
    }

    #[test]
    fn decoupled_laplacian_counts() {
        let n = 63;
        let t = 8.0;
        let op = assemble(&half(["1", "0", "0", "0", "5"]), t, n).unwrap();
        let h = t / (n + 1) as f64;
        let lam = 2.5 * (core::f64::consts::PI / t).powi(2);
        let c = op.inertia(lam).unwrap();
        let lap = (1..=n)
            .filter(|k| {
                4.0 / (h * h)
                    * libm::pow(
                        libm::sin(*k as f64 * core::f64::consts::PI * h / (2.0 * t)),
                        2.0,
                    )
                    < lam
            })
            .count();
        assert_eq!(lap, 1);
        assert_eq!(c.n_minus, lap);
        let c = op.inertia(6.0).unwrap();
        assert_eq!(
            c.n_minus,
            n + (1..=n)
                .filter(|k| 4.0 / (h * h)
                    * libm::pow(
                        libm::sin(*k as f64 * core::f64::consts::PI * h / (2.0 * t)),
                        2.0
                    )
                    < 6.0)
                .count()
        );
    }

    #[test]
    fn gershgorin_extremes() {
        let op = assemble(&half(["1", "2", "1", "0", "0"]), 10.0, 40).unwrap();
        let g = op.gershgorin();
        let c = op.inertia(g.lo - 1.0).unwrap();
        assert_eq!((c.n_minus, c.n_zero, c.n_plus), (0, 0, 80));
        let c = op.inertia(g.hi + 1.0).unwrap();
        assert_eq!((c.n_minus, c.n_zero, c.n_plus), (80, 0, 0));
    }

    #[test]
    fn inertia_matches_dense() {
        for src in [
            ["1", "2", "1", "0", "0"],
            ["1", "0", "0", "0", "0"],
            ["2+sin(t)", "t/5", "1+i", "0.5*i", "1+t/4"],
        ] {
            let op = assemble(&half(src), 12.0, 100).unwrap();
            let eigs = dense_eigs(&op);
            for k in 0..60 {
                let lam = -3.0 + 0.17 * k as f64;
                let expect = eigs.iter().filter(|e| **e < lam).count();
                let (c, _) = inertia_count_perturbed(&op, lam).unwrap();
                assert_eq!(c.n_minus, expect, "src {src:?} lambda {lam}");
                assert_eq!(c.n_minus + c.n_zero + c.n_plus, op.dim());
            }
        }
    }

    #[test]
    fn constant_example_growth() {
        let p = half(["1", "2", "1", "0", "0"]);
        let predicted = IntervalSet::from_intervals([
            Interval::new(-1.0, 0.0),
            Interval::new(2.0, f64::INFINITY),
        ]);
        let table = essential_window_scan(
            &p,
            &predicted,
            Interval::new(-5.0, 5.0),
            &ScanSettings::default(),
            &Sequential,
        )
        .unwrap();
        assert_eq!(table.rows.len(), 6);
        assert_eq!(table.flat().len(), 24);
        for r in &table.rows {
            match r.kind {
                WindowKind::Inside => assert_eq!(r.verdict, GrowthVerdict::Grows, "{r:?}"),
                WindowKind::Gap => assert_eq!(r.verdict, GrowthVerdict::Bounded, "{r:?}"),
            }
        }
    }
}
