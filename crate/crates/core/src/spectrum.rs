//! Essential spectrum: regular part (closure of the range of Δ), singular part
//! (discriminant condition on limits of the Schur symbols), the structural
//! classifier for limit data, and the closed form for constant limits.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::asymptotics::{
    self, check_assumptions_b, check_assumptions_b_unit, estimate_from_samples, AssumptionReport,
    Check, Direction, LimitClass, LimitConfig, LimitError, LimitEstimate, Sample, Sampler, Verdict,
};
use crate::coefficients::{
    check_assumption_a, check_assumption_a_unit, transform_to_half_line, HalfLineProblem,
    ProblemError, SampleGrid, TailHint, UnitIntervalProblem, NODE_BUDGET,
};
use crate::interval::{Interval, IntervalSet};
use crate::schur::{SchurSymbols, SymbolError, WeightedSchurSymbols};

// ---------------------------------------------------------------------------
// Discriminant evaluation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisStatus {
    /// Dis(λ) ≥ 0.
    In,
    Out,
    /// Limits did not exist numerically at this λ.
    Unresolved,
    /// Unresolved, but within one grid step of an excluded point, where the
    /// symbols degenerate and the limits are ill-conditioned by construction.
    Indeterminate,
}

impl DisStatus {
    pub fn label(self) -> &'static str {
        match self {
            DisStatus::In => "in",
            DisStatus::Out => "out",
            DisStatus::Unresolved => "unresolved",
            DisStatus::Indeterminate => "indeterminate",
        }
    }
}

/// One probe of the discriminant.
///
/// For half-line problems `rho`, `kappa` are (ρ/π)∞ and (κ/π)∞; for the direct
/// unit-interval route they are ρ̃₀(λ) and κ̃₀(λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisSample {
    pub lambda: f64,
    pub dis: f64,
    pub rho: Complex64,
    pub kappa: Complex64,
    /// Half-line: max(|Im(ρ/π)∞|, |Im(κ/π)∞|, |((∂π/∂t)/π)∞|).
    /// Unit interval: |Im ρ̃₀ − (1 + lim W)|.
    pub residual: f64,
    /// Error estimate of the limits entering `residual`.
    pub precision: f64,
    pub status: DisStatus,
}

impl DisSample {
    fn unresolved(lambda: f64) -> DisSample {
        DisSample {
            lambda,
            dis: f64::NAN,
            rho: Complex64::new(f64::NAN, f64::NAN),
            kappa: Complex64::new(f64::NAN, f64::NAN),
            residual: f64::NAN,
            precision: f64::NAN,
            status: DisStatus::Unresolved,
        }
    }

    fn resolved(
        lambda: f64,
        dis: f64,
        rho: Complex64,
        kappa: Complex64,
        residual: (f64, f64),
    ) -> Self {
        DisSample {
            lambda,
            dis,
            rho,
            kappa,
            residual: residual.0,
            precision: residual.1,
            status: if dis >= 0.0 {
                DisStatus::In
            } else {
                DisStatus::Out
            },
        }
    }
}

/// A λ ↦ Dis(λ) evaluator.
pub trait Discriminant: Sync {
    fn probe(&self, lambda: f64) -> DisSample;
}

/// Dis(λ) = Re((ρ/π)∞)² − 4 Re((κ/π)∞) for a half-line problem.
pub struct HalfLineDiscriminant<'a> {
    pub sym: &'a SchurSymbols,
    pub cfg: &'a LimitConfig,
}

impl Discriminant for HalfLineDiscriminant<'_> {
    fn probe(&self, lambda: f64) -> DisSample {
        let Ok(l) = asymptotics::symbol_limits(self.sym, lambda, self.cfg) else {
            return DisSample::unresolved(lambda);
        };
        let dpi = l.dpi_over_pi.finite().map(|v| v.norm());
        if let (Some(r), Some(k)) = (l.rho_over_pi.finite(), l.kappa_over_pi.finite()) {
            let residual = r.im.abs().max(k.im.abs()).max(dpi.unwrap_or(f64::INFINITY));
            let precision = l
                .rho_over_pi
                .error_estimate
                .max(l.kappa_over_pi.error_estimate)
                .max(l.dpi_over_pi.error_estimate);
            return DisSample::resolved(
                lambda,
                r.re * r.re - 4.0 * k.re,
                r,
                k,
                (residual, precision),
            );
        }
        sign_only(lambda, &l.rho_over_pi, &l.kappa_over_pi, |r| r)
    }
}

/// Relative accuracy below which an inaccurate limit may still decide the sign of Dis.
pub const SIGN_ONLY_REL: f64 = 1e-3;

/// Fallback when a limit misses the finite tolerance (typically right next
/// to the regular part, where the symbols are ill-conditioned): the sample
/// is resolved only if the propagated error cannot flip the sign of Dis.
/// Such samples carry `residual = NaN`, so they take no part in the
/// realness checks.
fn sign_only(
    lambda: f64,
    rho: &LimitEstimate,
    kappa: &LimitEstimate,
    shift: impl Fn(Complex64) -> Complex64,
) -> DisSample {
    let (Some((r, er)), Some((k, ek))) = (
        rho.approximate(SIGN_ONLY_REL),
        kappa.approximate(SIGN_ONLY_REL),
    ) else {
        return DisSample::unresolved(lambda);
    };
    let s = shift(r);
    let dis = (s * s).re - 4.0 * k.re;
    let bound = 2.0 * s.norm() * er + er * er + 4.0 * ek;
    if dis.abs() > 10.0 * bound {
        DisSample::resolved(lambda, dis, r, k, (f64::NAN, f64::NAN))
    } else {
        DisSample::unresolved(lambda)
    }
}

/// Dis(λ) = Re((ρ̃₀ − i)²) − 4 Re κ̃₀ for a weighted unit-interval problem.
pub struct UnitDiscriminant<'a> {
    pub sym: &'a WeightedSchurSymbols,
    pub cfg: &'a LimitConfig,
    /// lim W(t), t → ∞, for the Im ρ̃₀ = 1 + lim W consistency residual.
    pub w_limit: Option<f64>,
}

impl Discriminant for UnitDiscriminant<'_> {
    fn probe(&self, lambda: f64) -> DisSample {
        let Ok(l) = asymptotics::boundary_limits(self.sym, lambda, self.cfg) else {
            return DisSample::unresolved(lambda);
        };
        let shift = |r: Complex64| r - Complex64::new(0.0, 1.0);
        if let (Some(r), Some(k)) = (l.rho0.finite(), l.kappa0.finite()) {
            let s = shift(r);
            let dis = (s * s).re - 4.0 * k.re;
            let residual = self.w_limit.map_or(f64::NAN, |w| (r.im - 1.0 - w).abs());
            return DisSample::resolved(lambda, dis, r, k, (residual, l.rho0.error_estimate));
        }
        sign_only(lambda, &l.rho0, &l.kappa0, shift)
    }
}

/// Dis(λ) on a half-line problem; fails if the limits do not exist.
pub fn discriminant(sym: &SchurSymbols, lambda: f64, cfg: &LimitConfig) -> Result<f64, LimitError> {
    let (r, k, _) = asymptotics::limit_pair(sym, lambda, cfg)?;
    let (r, k) = (r.finite().unwrap(), k.finite().unwrap());
    Ok(r.re * r.re - 4.0 * k.re)
}

/// Dis(λ) on a weighted unit-interval problem via the boundary limits at 0+.
pub fn discriminant_unit(
    sym: &WeightedSchurSymbols,
    lambda: f64,
    cfg: &LimitConfig,
) -> Result<f64, LimitError> {
    let (r, k) = asymptotics::boundary_pair(sym, lambda, cfg)?;
    let s = r - Complex64::new(0.0, 1.0);
    Ok((s * s).re - 4.0 * k.re)
}

/// Maps a job index range; implementations may run jobs in parallel but
/// must return results in index order.
pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..n).map(f).collect()
    }
}

// ---------------------------------------------------------------------------
// Singular part

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub grid_points: usize,
    /// Bisection stops at endpoint_tol_rel·(window width).
    pub endpoint_tol_rel: f64,
    /// Geometric approach points a + step·2^{-j}, j = 1..=levels, next to excluded points.
    pub approach_levels: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            grid_points: 512,
            endpoint_tol_rel: 1e-8,
            approach_levels: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularScan {
    pub set: IntervalSet,
    /// All probes, sorted by λ (grid, approach points and bisection midpoints).
    pub curve: Vec<DisSample>,
    pub unresolved: Vec<f64>,
    /// The condition still holds at the lower/upper window edge.
    pub edge_lo: bool,
    pub edge_hi: bool,
}

fn bisect(
    dis: &dyn Discriminant,
    mut inside: f64,
    mut outside: f64,
    tol: f64,
    log: &mut Vec<DisSample>,
) -> f64 {
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        let s = dis.probe(mid);
        log.push(s);
        match s.status {
            DisStatus::In => inside = mid,
            DisStatus::Out => outside = mid,
            DisStatus::Unresolved | DisStatus::Indeterminate => break,
        }
    }
    inside
}

/// {λ ∈ window ∖ excluded : Dis(λ) ≥ 0}, closed.
pub fn singular_part(
    dis: &dyn Discriminant,
    window: Interval,
    excluded: &IntervalSet,
    cfg: &ScanConfig,
    exec: &impl Executor,
) -> SingularScan {
    let width = window.width();
    let tol = cfg.endpoint_tol_rel * width;
    let n = cfg.grid_points.max(3);
    let step = width / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|k| window.lo + step * k as f64).collect();

    // Closed pieces of the window between excluded points; only their
    // interiors (plus non-excluded window edges) are probed.
    let pieces = excluded.gaps_in(window);
    let mut piece_points: Vec<Vec<f64>> = Vec::new();
    for piece in &pieces {
        let (a, b) = (piece.lo, piece.hi);
        let a_open = excluded.contains(a);
        let b_open = excluded.contains(b);
        let mut pts: Vec<f64> = grid
            .iter()
            .copied()
            .filter(|x| (*x > a || (*x == a && !a_open)) && (*x < b || (*x == b && !b_open)))
            .collect();
        let near = step.min(0.5 * (b - a));
        for j in 1..=cfg.approach_levels {
            let dj = near * libm::pow(2.0, -(j as f64));
            if a_open {
                pts.push(a + dj);
            }
            if b_open {
                pts.push(b - dj);
            }
        }
        if pts.len() < 3 && b > a {
            for k in 1..4 {
                pts.push(a + (b - a) * k as f64 / 4.0);
            }
        }
        pts.retain(|x| *x > a || (*x == a && !a_open));
        pts.retain(|x| *x < b || (*x == b && !b_open));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        piece_points.push(pts);
    }

    let all: Vec<f64> = piece_points.iter().flatten().copied().collect();
    let samples = exec.map(all.len(), |k| dis.probe(all[k]));
    let mut samples = samples;
    let mut offset = 0;
    for (piece, pts) in pieces.iter().zip(&piece_points) {
        let s = &mut samples[offset..offset + pts.len()];
        offset += pts.len();
        let zone = step.min(0.5 * piece.width());
        if excluded.contains(piece.lo) {
            for x in s.iter_mut() {
                if x.status != DisStatus::Unresolved || x.lambda - piece.lo >= zone {
                    break;
                }
                x.status = DisStatus::Indeterminate;
            }
        }
        if excluded.contains(piece.hi) {
            for x in s.iter_mut().rev() {
                if x.status != DisStatus::Unresolved || piece.hi - x.lambda >= zone {
                    break;
                }
                x.status = DisStatus::Indeterminate;
            }
        }
    }
    let mut curve = samples.clone();

    let mut out = Vec::new();
    offset = 0;
    for (piece, pts) in pieces.iter().zip(&piece_points) {
        let all = &samples[offset..offset + pts.len()];
        offset += pts.len();
        let s: Vec<DisSample> = all
            .iter()
            .filter(|x| x.status != DisStatus::Indeterminate)
            .copied()
            .collect();
        let mut k = 0;
        while k < s.len() {
            if s[k].status != DisStatus::In {
                k += 1;
                continue;
            }
            let run_start = k;
            while k + 1 < s.len() && s[k + 1].status == DisStatus::In {
                k += 1;
            }
            let run_end = k;
            let lo = if run_start == 0 {
                piece.lo
            } else if s[run_start - 1].status == DisStatus::Out {
                bisect(
                    dis,
                    s[run_start].lambda,
                    s[run_start - 1].lambda,
                    tol,
                    &mut curve,
                )
            } else {
                s[run_start].lambda
            };
            let hi = if run_end + 1 == s.len() {
                piece.hi
            } else if s[run_end + 1].status == DisStatus::Out {
                bisect(
                    dis,
                    s[run_end].lambda,
                    s[run_end + 1].lambda,
                    tol,
                    &mut curve,
                )
            } else {
                s[run_end].lambda
            };
            // Below bisection resolution an excluded neighbour cannot be
            // told apart from the endpoint (Dis often touches 0 there).
            let snap = 4.0 * tol;
            let lo = if excluded.contains(piece.lo) && lo - piece.lo <= snap {
                piece.lo
            } else {
                lo
            };
            let hi = if excluded.contains(piece.hi) && piece.hi - hi <= snap {
                piece.hi
            } else {
                hi
            };
            out.push(Interval::new(lo, hi));
            k += 1;
        }
    }

    curve.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let unresolved: Vec<f64> = curve
        .iter()
        .filter(|s| s.status == DisStatus::Unresolved)
        .map(|s| s.lambda)
        .collect();
    let set = IntervalSet::from_intervals(out);
    SingularScan {
        edge_lo: set.contains(window.lo),
        edge_hi: set.contains(window.hi),
        set,
        curve,
        unresolved,
    }
}

// ---------------------------------------------------------------------------
// Regular part

#[derive(Debug, Clone, PartialEq)]
pub struct RegularConfig {
    /// Uniform samples on [floor, floor + span] (half-line) or on (0, 1].
    pub uniform_points: usize,
    pub span: f64,
    /// Extra logarithmically spaced samples (x-grid for unit problems).
    pub log_points: usize,
    /// Samples with rounding-error estimate above trust·(1+|Δ|) are ignored.
    pub trust: f64,
}

impl Default for RegularConfig {
    fn default() -> Self {
        RegularConfig {
            uniform_points: 4097,
            span: 64.0,
            log_points: 2049,
            trust: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularPart {
    pub set: IntervalSet,
    /// Rounding-level uncertainty of the finite endpoints.
    pub uncertainty: f64,
    pub tail: Option<LimitEstimate>,
    pub samples_used: usize,
    pub samples_discarded: usize,
}

fn golden<F: Fn(f64) -> Option<f64>>(
    f: F,
    mut a: f64,
    mut b: f64,
    sign: f64,
) -> Option<(f64, f64)> {
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = sign * f(c)?;
    let mut fd = sign * f(d)?;
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sign * f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sign * f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Some((x, f(x)?))
}

fn range_of<F>(points: &[f64], f: &F, trust: f64, tail: Option<&LimitEstimate>) -> RegularPart
where
    F: Fn(f64) -> Result<(f64, f64), SymbolError>,
{
    let mut used = Vec::new();
    let mut discarded = 0;
    let mut unc: f64 = 0.0;
    for &x in points {
        match f(x) {
            Ok((v, e)) if v.is_finite() && e <= trust * (1.0 + v.abs()) => {
                used.push((x, v));
                unc = unc.max(e);
            }
            _ => discarded += 1,
        }
    }
    let trusted = |x: f64| match f(x) {
        Ok((v, e)) if v.is_finite() && e <= trust * (1.0 + v.abs()) => Some(v),
        _ => None,
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    if !used.is_empty() {
        let (imin, _) = used
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, (_, v))| if *v < acc.1 { (i, *v) } else { acc },
            );
        let (imax, _) = used
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, (_, v))| {
                if *v > acc.1 {
                    (i, *v)
                } else {
                    acc
                }
            });
        lo = used[imin].1;
        hi = used[imax].1;
        // Polish interior extrema.
        for (i, sign) in [(imin, 1.0), (imax, -1.0)] {
            if i > 0 && i + 1 < used.len() {
                if let Some((_, v)) = golden(trusted, used[i - 1].0, used[i + 1].0, sign) {
                    if sign > 0.0 {
                        lo = lo.min(v);
                    } else {
                        hi = hi.max(v);
                    }
                }
            }
        }
    }
    if let Some(t) = tail {
        match t.class {
            LimitClass::Finite(v) => {
                lo = lo.min(v.re);
                hi = hi.max(v.re);
                unc = unc.max(t.error_estimate);
            }
            LimitClass::PlusInfinity => hi = f64::INFINITY,
            LimitClass::MinusInfinity => lo = f64::NEG_INFINITY,
            LimitClass::Divergent => {}
        }
    }
    let set = if lo <= hi {
        IntervalSet::single(lo, hi)
    } else {
        IntervalSet::empty()
    };
    RegularPart {
        set,
        uncertainty: unc,
        tail: tail.cloned(),
        samples_used: used.len(),
        samples_discarded: discarded,
    }
}

fn delta_tail<F>(sampler: &Sampler, f: &F, cfg: &LimitConfig) -> Option<LimitEstimate>
where
    F: Fn(f64) -> Result<(f64, f64), SymbolError>,
{
    let samples: Vec<Result<Sample, String>> = sampler
        .args
        .iter()
        .map(|a| {
            f(*a)
                .map(|(v, e)| Sample {
                    value: Complex64::new(v, 0.0),
                    err: e,
                })
                .map_err(|e| format!("{e}"))
        })
        .collect();
    estimate_from_samples(&samples, sampler, cfg).ok()
}

/// Closure of Δ([floor, ∞)) for a half-line problem.
pub fn regular_part(sym: &SchurSymbols, cfg: &RegularConfig, limits: &LimitConfig) -> RegularPart {
    let f = |t: f64| sym.delta_with_error(t);
    let sampler = Sampler::new(Direction::TToInfinity, sym.tail, limits);
    let floor = sym.domain_floor;
    let n = cfg.uniform_points.max(2);
    let mut pts: Vec<f64> = (0..n)
        .map(|k| floor + cfg.span * k as f64 / (n - 1) as f64)
        .collect();
    pts.extend(sampler.args.iter().copied().filter(|t| *t > floor));
    pts.sort_by(f64::total_cmp);
    let tail = delta_tail(&sampler, &f, limits);
    range_of(&pts, &f, cfg.trust, tail.as_ref())
}

/// Closure of Δ̃((0,1]) for a weighted unit-interval problem.
pub fn regular_part_unit(
    sym: &WeightedSchurSymbols,
    cfg: &RegularConfig,
    limits: &LimitConfig,
) -> RegularPart {
    let f = |x: f64| sym.delta_with_error(x);
    let sampler = Sampler::new(Direction::XToZeroPlus, TailHint::Algebraic, limits);
    let n = cfg.uniform_points.max(2);
    let mut pts: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
    let m = cfg.log_points.max(2);
    let lmin = libm::log(limits.x_floor);
    pts.extend((0..m).map(|k| libm::exp(lmin * (1.0 - k as f64 / (m - 1) as f64))));
    pts.sort_by(f64::total_cmp);
    let tail = delta_tail(&sampler, &f, limits);
    range_of(&pts, &f, cfg.trust, tail.as_ref())
}

// ---------------------------------------------------------------------------
// Structure of the spectrum from limit data

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StructureInput {
    /// d∞ ∈ ℝ: limits p∞, (|b|²)∞, (Im bc̄)∞, q∞, (|c|²)∞.
    FiniteD {
        d_inf: f64,
        p_inf: f64,
        b2_inf: f64,
        im_bc_inf: f64,
        q_inf: f64,
        c2_inf: f64,
    },
    /// d∞ = ±∞: (p − |b|²/d)∞, (|b|²/d²)∞ (= (p/d)∞), (Im bc̄/d)∞,
    /// (q − |c|²/d)∞, (|c|²/d²)∞.
    InfiniteD {
        plus: bool,
        p_minus_b2_over_d: f64,
        b2_over_d2: f64,
        im_bc_over_d: f64,
        q_minus_c2_over_d: f64,
        c2_over_d2: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureClassification {
    pub tag: &'static str,
    /// All tags the theorem admits for this sign pattern (two in the
    /// d∞ ∈ ℝ, p∞ > 0 case: the root pattern of the cubic decides).
    pub admissible: Vec<&'static str>,
    pub delta_minus: f64,
    pub delta_plus: f64,
    pub s_minus: Option<f64>,
    pub s_plus: Option<f64>,
    pub s: Option<f64>,
    /// σ_ess (minus the indeterminate point d∞) predicted by the tag.
    pub predicted: IntervalSet,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StructureError {
    #[error("case undetermined: {what} = {value:e} is within tolerance of 0")]
    CaseUndetermined { what: &'static str, value: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}

pub const TAG_FIN_POS_THREE: &str = "[min{s−, δ−}, max{s+, δ+}] ∪ [s, ∞)";
pub const TAG_FIN_POS_ONE: &str = "[min{s, δ−}, ∞)";
pub const TAG_FIN_ZERO: &str = "(−∞, max{s−, δ+}] ∪ [s+, ∞)";
pub const TAG_PLUS_POS: &str = "[min{s−, δ−}, max{s+, δ+}]";
pub const TAG_PLUS_ZERO_POS: &str = "[min{s, δ−}, ∞)";
pub const TAG_PLUS_ZERO_NEG: &str = "(−∞, max{s, δ+}]";
pub const TAG_MINUS_POS: &str = "(−∞, max{s+, δ+}]";
pub const TAG_MINUS_ZERO: &str = "(−∞, δ+] ∪ [s, ∞)";

/// Values with |v| ≤ ZERO_TOL count as 0; ZERO_TOL < |v| < SIGN_TOL is undecidable.
pub const ZERO_TOL: f64 = 1e-10;
pub const SIGN_TOL: f64 = 1e-6;

fn sign_of(what: &'static str, v: f64) -> Result<i8, StructureError> {
    if v.abs() <= ZERO_TOL {
        Ok(0)
    } else if v.abs() < SIGN_TOL {
        Err(StructureError::CaseUndetermined { what, value: v })
    } else if v > 0.0 {
        Ok(1)
    } else {
        Ok(-1)
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

/// Real roots (sorted, with multiplicity collapsed) of a polynomial of degree ≤ 3
/// given by ascending coefficients.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    while c.len() > 1 && c.last().unwrap().abs() <= 1e-14 * scale {
        c.pop();
    }
    match c.len() {
        0 | 1 => Vec::new(),
        2 => vec![-c[0] / c[1]],
        3 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = b * b - 4.0 * a * cc;
            if disc < -1e-14 * (b * b).max((4.0 * a * cc).abs()) {
                return Vec::new();
            }
            let sq = libm::sqrt(disc.max(0.0));
            let q = -0.5 * (b + libm::copysign(sq, b));
            let mut r = if q == 0.0 {
                vec![0.0, 0.0]
            } else {
                vec![q / a, cc / q]
            };
            r.sort_by(f64::total_cmp);
            r.dedup();
            r
        }
        _ => {
            let c = &c[..4];
            let deriv = [c[1], 2.0 * c[2], 3.0 * c[3]];
            let crit = real_roots(&deriv);
            let bound = 1.0 + c[..3].iter().map(|v| (v / c[3]).abs()).fold(0.0, f64::max);
            let mut knots = vec![-bound];
            knots.extend(crit.iter().copied().filter(|x| x.abs() < bound));
            knots.push(bound);
            let mut roots: Vec<f64> = Vec::new();
            let tiny = 1e-12 * c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for w in knots.windows(2) {
                let (mut a, mut b) = (w[0], w[1]);
                let (fa, fb) = (poly_eval(c, a), poly_eval(c, b));
                if fa.abs() <= tiny {
                    roots.push(a);
                    continue;
                }
                if fa.signum() == fb.signum() {
                    continue;
                }
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m == a || m == b {
                        break;
                    }
                    if poly_eval(c, m).signum() == fa.signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            if poly_eval(c, *knots.last().unwrap()).abs() <= tiny {
                roots.push(*knots.last().unwrap());
            }
            roots.sort_by(f64::total_cmp);
            roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
            roots
        }
    }
}

/// Case analysis of the whole spectrum from limit data and δ± = inf/sup Δ.
pub fn classify_structure(
    input: &StructureInput,
    delta_minus: f64,
    delta_plus: f64,
) -> Result<StructureClassification, StructureError> {
    const INF: f64 = f64::INFINITY;
    let iv = |lo: f64, hi: f64| Interval::new(lo, hi);
    match *input {
        StructureInput::FiniteD {
            d_inf,
            p_inf,
            b2_inf,
            im_bc_inf,
            q_inf,
            c2_inf,
        } => {
            // F(λ) = Im(bc̄)² − ((q−λ)(d−λ) − |c|²)(p(d−λ) − |b|²) ≥ 0.
            let k1 = [q_inf * d_inf - c2_inf, -(q_inf + d_inf), 1.0];
            let k2 = [p_inf * d_inf - b2_inf, -p_inf];
            let prod = poly_mul(&k1, &k2);
            let mut f: Vec<f64> = prod.iter().map(|v| -v).collect();
            f[0] += im_bc_inf * im_bc_inf;
            let roots = real_roots(&f);
            match sign_of("p_inf", p_inf)? {
                1 => {
                    if roots.len() >= 3 {
                        let (sm, sp, s) = (roots[0], roots[1], roots[2]);
                        Ok(StructureClassification {
                            tag: TAG_FIN_POS_THREE,
                            admissible: vec![TAG_FIN_POS_THREE, TAG_FIN_POS_ONE],
                            delta_minus,
                            delta_plus,
                            s_minus: Some(sm),
                            s_plus: Some(sp),
                            s: Some(s),
                            predicted: IntervalSet::from_intervals([
                                iv(sm.min(delta_minus), sp.max(delta_plus)),
                                iv(s, INF),
                            ]),
                        })
                    } else {
                        let s = *roots.last().ok_or_else(|| {
                            StructureError::HypothesisViolated("cubic has no real root".into())
                        })?;
                        let (sm, sp) = if roots.len() == 2 {
                            (Some(roots[0]), Some(roots[0]))
                        } else {
                            (None, None)
                        };
                        let mut parts = vec![iv(s.min(delta_minus), INF)];
                        if let Some(r) = sm {
                            parts.push(iv(r, r));
                        }
                        Ok(StructureClassification {
                            tag: TAG_FIN_POS_ONE,
                            admissible: vec![TAG_FIN_POS_THREE, TAG_FIN_POS_ONE],
                            delta_minus,
                            delta_plus,
                            s_minus: sm,
                            s_plus: sp,
                            s: Some(s),
                            predicted: IntervalSet::from_intervals(parts),
                        })
                    }
                }
                0 => {
                    if roots.len() < 2 {
                        return Err(StructureError::HypothesisViolated(
                            "quadratic condition without two real roots".into(),
                        ));
                    }
                    let (sm, sp) = (roots[0], roots[roots.len() - 1]);
                    Ok(StructureClassification {
                        tag: TAG_FIN_ZERO,
                        admissible: vec![TAG_FIN_ZERO],
                        delta_minus,
                        delta_plus,
                        s_minus: Some(sm),
                        s_plus: Some(sp),
                        s: None,
                        predicted: IntervalSet::from_intervals([
                            iv(-INF, sm.max(delta_plus)),
                            iv(sp, INF),
                        ]),
                    })
                }
                _ => Err(StructureError::HypothesisViolated("p_inf < 0".into())),
            }
        }
        StructureInput::InfiniteD {
            plus,
            p_minus_b2_over_d: pp,
            b2_over_d2: bb,
            im_bc_over_d: ib,
            q_minus_c2_over_d: qq,
            c2_over_d2: cc,
        } => {
            // G(λ) = 4 Im² − 4 (P − λB)(Q − λ(1+C)) ≥ 0.
            let prod = poly_mul(&[pp, -bb], &[qq, -(1.0 + cc)]);
            let mut g: Vec<f64> = prod.iter().map(|v| -4.0 * v).collect();
            g[0] += 4.0 * ib * ib;
            let roots = real_roots(&g);
            let sb = sign_of("(p/d)_inf", bb)?;
            if sb > 0 {
                if roots.len() < 2 {
                    return Err(StructureError::HypothesisViolated(
                        "quadratic condition without two real roots".into(),
                    ));
                }
                let (sm, sp) = (roots[0], roots[roots.len() - 1]);
                let (tag, predicted) = if plus {
                    (
                        TAG_PLUS_POS,
                        IntervalSet::single(sm.min(delta_minus), sp.max(delta_plus)),
                    )
                } else {
                    (TAG_MINUS_POS, IntervalSet::single(-INF, sp.max(delta_plus)))
                };
                return Ok(StructureClassification {
                    tag,
                    admissible: vec![tag],
                    delta_minus,
                    delta_plus,
                    s_minus: Some(sm),
                    s_plus: Some(sp),
                    s: None,
                    predicted,
                });
            }
            if sb < 0 {
                return Err(StructureError::HypothesisViolated("(p/d)_inf < 0".into()));
            }
            let s = roots.first().copied();
            let sp = sign_of("(p - |b|^2/d)_inf", pp)?;
            let (tag, predicted) = match (plus, sp) {
                (true, 1) => (
                    TAG_PLUS_ZERO_POS,
                    s.map(|s| IntervalSet::single(s.min(delta_minus), INF)),
                ),
                (true, -1) => (
                    TAG_PLUS_ZERO_NEG,
                    s.map(|s| IntervalSet::single(-INF, s.max(delta_plus))),
                ),
                (false, _) => (
                    TAG_MINUS_ZERO,
                    s.map(|s| IntervalSet::from_intervals([iv(-INF, delta_plus), iv(s, INF)])),
                ),
                _ => {
                    return Err(StructureError::CaseUndetermined {
                        what: "(p - |b|^2/d)_inf",
                        value: pp,
                    })
                }
            };
            let predicted = predicted.ok_or_else(|| {
                StructureError::HypothesisViolated("linear condition is degenerate".into())
            })?;
            Ok(StructureClassification {
                tag,
                admissible: vec![tag],
                delta_minus,
                delta_plus,
                s_minus: None,
                s_plus: None,
                s,
                predicted,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Constant limits

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantLimitData {
    pub p: f64,
    pub q: f64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: f64,
}

impl ConstantLimitData {
    /// Δ∞ = d∞ − |b∞|²/p∞.
    pub fn delta_inf(&self) -> f64 {
        self.d - self.b.norm_sqr() / self.p
    }

    fn lambda_pm(&self, sign: f64) -> f64 {
        let mid = 0.5 * (self.q + self.d);
        let half = 0.5 * (self.q - self.d);
        mid + sign * libm::sqrt(half * half + self.c.norm_sqr())
    }

    /// Λ−∞, the smaller eigenvalue of [[q, c̄], [c, d]].
    pub fn lambda_minus(&self) -> f64 {
        self.lambda_pm(-1.0)
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda_pm(1.0)
    }
}

/// [δ−, δ+] ∪ [min{Δ∞, Λ−∞}, max{Δ∞, Λ−∞}] ∪ [Λ+∞, ∞) (the point d∞ is not removed).
pub fn constant_limit_spectrum(
    data: &ConstantLimitData,
    delta_minus: f64,
    delta_plus: f64,
) -> Result<IntervalSet, StructureError> {
    if !(data.p > 0.0) {
        return Err(StructureError::HypothesisViolated(format!(
            "p_inf = {} is not positive",
            data.p
        )));
    }
    let im = (data.b.conj() * data.c).im;
    if im.abs() > 1e-12 * (1.0 + data.b.norm() * data.c.norm()) {
        return Err(StructureError::HypothesisViolated(format!(
            "Im(conj(b) c) = {im}"
        )));
    }
    let di = data.delta_inf();
    let lm = data.lambda_minus();
    let lp = data.lambda_plus();
    debug_assert!(lp >= di - 1e-12 * (1.0 + di.abs()));
    Ok(IntervalSet::from_intervals([
        Interval::new(delta_minus, delta_plus),
        Interval::new(di.min(lm), di.max(lm)),
        Interval::new(lp, f64::INFINITY),
    ]))
}

// ---------------------------------------------------------------------------
// Pipelines

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    HalfLine,
    /// Boundary condition at x = 0+ on the weighted problem itself.
    UnitDirect,
    /// x = e^{-t}, then the half-line theorem.
    UnitTransformed,
}

impl Route {
    pub fn label(self) -> &'static str {
        match self {
            Route::HalfLine => "half_line",
            Route::UnitDirect => "unit_interval_direct",
            Route::UnitTransformed => "unit_interval_transformed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub window: Option<Interval>,
    pub scan: ScanConfig,
    pub limits: LimitConfig,
    pub regular: RegularConfig,
    /// Number of λ probes for the sampled boundedness checks.
    pub probes: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            window: None,
            scan: ScanConfig::default(),
            limits: LimitConfig::default(),
            regular: RegularConfig::default(),
            probes: 3,
        }
    }
}

pub const DEFAULT_WINDOW: Interval = Interval {
    lo: -100.0,
    hi: 100.0,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub route: Route,
    pub window: Interval,
    pub regular_part: IntervalSet,
    pub regular_uncertainty: f64,
    pub singular_part: IntervalSet,
    /// closure(regular ∪ singular), restricted to the window for the singular part.
    pub union: IntervalSet,
    /// d∞ (or d̃₀): an indeterminate point, never added to `union`.
    pub d_infinity: LimitEstimate,
    pub unresolved_lambdas: Vec<f64>,
    pub assumptions: AssumptionReport,
    pub discriminant_curve: Vec<DisSample>,
    pub edge_lo: bool,
    pub edge_hi: bool,
    pub structure: Option<StructureClassification>,
    pub notes: Vec<String>,
}

impl SpectrumReport {
    /// False when a sampled hypothesis check failed or some λ was unresolved.
    pub fn certified(&self) -> bool {
        !self.assumptions.any_fail() && self.unresolved_lambdas.is_empty()
    }
}

fn probes_for(regular: &IntervalSet, d_inf: Option<f64>, window: Interval, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut cands = Vec::new();
    if let Some(lo) = regular.inf().filter(|v| v.is_finite()) {
        cands.push(lo - 1.0);
    }
    if let Some(hi) = regular.sup().filter(|v| v.is_finite()) {
        cands.push(hi + 1.0);
    }
    for k in 1..=8 {
        cands.push(window.lo + window.width() * k as f64 / 9.0);
    }
    for c in cands {
        if out.len() >= n {
            break;
        }
        let near_d = d_inf.is_some_and(|d| (c - d).abs() < 1e-3);
        if !regular.contains(c) && !near_d && !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

fn excluded_set(regular: &IntervalSet, d_inf: &LimitEstimate) -> IntervalSet {
    match d_inf.class {
        LimitClass::Finite(v) => regular.union(&IntervalSet::single(v.re, v.re)),
        _ => regular.clone(),
    }
}

/// Worst realness/consistency residual over the probes. A residual counts as
/// a violation only beyond 1e-6 plus ten times the precision of the limits
/// it was computed from; the reported excess is that difference.
fn realness_checks(rep: &mut AssumptionReport, curve: &[DisSample], name: &'static str) {
    let worst = curve
        .iter()
        .filter(|s| s.residual.is_finite())
        .map(|s| (s.lambda, (s.residual - 10.0 * s.precision).max(0.0)))
        .fold(None, |acc: Option<(f64, f64)>, v| match acc {
            Some(a) if a.1 >= v.1 => Some(a),
            _ => Some(v),
        });
    if let Some((lam, r)) = worst {
        rep.realness_residual = Some(r);
        let fail = r > 1e-6;
        rep.push(Check {
            name,
            verdict: if fail { Verdict::Fail } else { Verdict::Pass },
            witness: fail.then_some(asymptotics::Witness { at: lam, value: r }),
            detail: format!("max residual {r:.3e}"),
        });
    }
}

fn unresolved_check(rep: &mut AssumptionReport, unresolved: &[f64]) {
    rep.push(Check {
        name: "C",
        verdict: if unresolved.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        witness: unresolved.first().map(|l| asymptotics::Witness {
            at: *l,
            value: f64::NAN,
        }),
        detail: format!("{} unresolved lambda values", unresolved.len()),
    });
}

/// Limit data for the structural classifier, when all needed limits exist.
pub fn structure_input(
    sym: &SchurSymbols,
    d_inf: &LimitEstimate,
    cfg: &LimitConfig,
) -> Option<StructureInput> {
    let sampler = Sampler::new(Direction::TToInfinity, sym.tail, cfg);
    let lim = |g: &dyn Fn(&crate::schur::Coeffs) -> f64| -> Option<f64> {
        let e =
            asymptotics::estimate_limit(|t| sym.coeffs(t).map(|c| g(&c)), &sampler, cfg).ok()?;
        e.finite().map(|v| v.re)
    };
    match d_inf.class {
        LimitClass::Finite(d) => Some(StructureInput::FiniteD {
            d_inf: d.re,
            p_inf: lim(&|c| c.p)?,
            b2_inf: lim(&|c| c.b.norm_sqr())?,
            im_bc_inf: lim(&|c| (c.b * c.c.conj()).im)?,
            q_inf: lim(&|c| c.q)?,
            c2_inf: lim(&|c| c.c.norm_sqr())?,
        }),
        LimitClass::PlusInfinity | LimitClass::MinusInfinity => Some(StructureInput::InfiniteD {
            plus: d_inf.class == LimitClass::PlusInfinity,
            p_minus_b2_over_d: lim(&|c| c.p - c.b.norm_sqr() / c.d)?,
            b2_over_d2: lim(&|c| c.b.norm_sqr() / (c.d * c.d))?,
            im_bc_over_d: lim(&|c| (c.b * c.c.conj()).im / c.d)?,
            q_minus_c2_over_d: lim(&|c| c.q - c.c.norm_sqr() / c.d)?,
            c2_over_d2: lim(&|c| c.c.norm_sqr() / (c.d * c.d))?,
        }),
        LimitClass::Divergent => None,
    }
}

fn window_hint(
    sym: &SchurSymbols,
    d_inf: &LimitEstimate,
    regular: &IntervalSet,
    cfg: &LimitConfig,
) -> Option<Interval> {
    let LimitClass::Finite(d) = d_inf.class else {
        return None;
    };
    let sampler = Sampler::new(Direction::TToInfinity, sym.tail, cfg);
    let lim = |g: &dyn Fn(&crate::schur::Coeffs) -> Complex64| -> Option<Complex64> {
        asymptotics::estimate_limit(|t| sym.coeffs(t).map(|c| g(&c)), &sampler, cfg)
            .ok()?
            .finite()
    };
    let data = ConstantLimitData {
        p: lim(&|c| Complex64::new(c.p, 0.0))?.re,
        q: lim(&|c| Complex64::new(c.q, 0.0))?.re,
        b: lim(&|c| c.b)?,
        c: lim(&|c| c.c)?,
        d: d.re,
    };
    if !(data.p > 0.0) {
        return None;
    }
    let mut lo = data.lambda_minus().min(data.delta_inf());
    let mut hi = data.lambda_plus().max(data.delta_inf());
    if let (Some(a), Some(b)) = (regular.inf(), regular.sup()) {
        if a.is_finite() {
            lo = lo.min(a);
        }
        if b.is_finite() {
            hi = hi.max(b);
        }
    }
    Some(Interval::new(lo - 1.0, hi + 1.0))
}

fn d_limit(
    samples: &Sampler,
    cfg: &LimitConfig,
    f: &dyn Fn(f64) -> Result<f64, SymbolError>,
) -> LimitEstimate {
    asymptotics::estimate_limit(f, samples, cfg).unwrap_or(LimitEstimate {
        class: LimitClass::Divergent,
        error_estimate: f64::INFINITY,
        samples_used: 0,
        partials: Vec::new(),
        method: asymptotics::LimitMethod::None,
    })
}

/// The half-line theorem: regular ∪ {Dis ≥ 0}, with d∞ reported separately.
pub fn analyze_half_line(
    problem: &HalfLineProblem,
    opts: &AnalysisOptions,
    exec: &impl Executor,
) -> SpectrumReport {
    let sym = SchurSymbols::new(problem);
    analyze_symbols(&sym, problem, Route::HalfLine, opts, exec)
}

fn analyze_symbols(
    sym: &SchurSymbols,
    problem: &HalfLineProblem,
    route: Route,
    opts: &AnalysisOptions,
    exec: &impl Executor,
) -> SpectrumReport {
    let cfg = &opts.limits;
    let sampler = Sampler::new(Direction::TToInfinity, sym.tail, cfg);
    let d_inf = d_limit(&sampler, cfg, &|t| sym.coeffs(t).map(|c| c.d));
    let reg = regular_part(sym, &opts.regular, cfg);
    let hint = window_hint(sym, &d_inf, &reg.set, cfg);
    let window = opts.window.or(hint).unwrap_or(DEFAULT_WINDOW);

    let mut assumptions = AssumptionReport::default();
    let floor = problem.domain_floor;
    let a = check_assumption_a(
        problem,
        &SampleGrid::new(floor, floor + opts.regular.span, 1025),
    );
    assumptions.push(Check {
        name: "A",
        verdict: if a.pass { Verdict::Pass } else { Verdict::Fail },
        witness: a
            .violation
            .map(|(at, _, v)| asymptotics::Witness { at, value: v }),
        detail: format!("{} samples, {}", a.samples, a.note),
    });
    let probes = probes_for(
        &reg.set,
        d_inf.class.finite().map(|v| v.re),
        window,
        opts.probes,
    );
    let b = check_assumptions_b(sym, &probes, cfg);
    assumptions.beta = b.beta;
    assumptions.gamma = b.gamma;
    assumptions.checks.extend(b.checks);

    let excluded = excluded_set(&reg.set, &d_inf);
    let dis = HalfLineDiscriminant { sym, cfg };
    let scan = singular_part(&dis, window, &excluded, &opts.scan, exec);
    realness_checks(&mut assumptions, &scan.curve, "limit realness");
    unresolved_check(&mut assumptions, &scan.unresolved);

    let structure = structure_input(sym, &d_inf, cfg).and_then(|inp| {
        let (dm, dp) = (reg.set.inf()?, reg.set.sup()?);
        classify_structure(&inp, dm, dp).ok()
    });

    let mut notes = vec![String::from(
        "assumption verdicts are sampled, not proved; d_infinity is an indeterminate point",
    )];
    if route == Route::UnitTransformed {
        notes.push("computed on the half-line image x = exp(-t)".into());
    }
    SpectrumReport {
        route,
        window,
        union: reg.set.union(&scan.set),
        regular_part: reg.set,
        regular_uncertainty: reg.uncertainty,
        singular_part: scan.set,
        d_infinity: d_inf,
        unresolved_lambdas: scan.unresolved,
        assumptions,
        discriminant_curve: scan.curve,
        edge_lo: scan.edge_lo,
        edge_hi: scan.edge_hi,
        structure,
        notes,
    }
}

/// Half-line theorem applied to the image of a unit-interval problem.
pub fn analyze_unit_transformed(
    problem: &UnitIntervalProblem,
    opts: &AnalysisOptions,
    exec: &impl Executor,
) -> Result<SpectrumReport, ProblemError> {
    let h = transform_to_half_line(problem, NODE_BUDGET)?;
    let sym = SchurSymbols::new(&h);
    Ok(analyze_symbols(
        &sym,
        &h,
        Route::UnitTransformed,
        opts,
        exec,
    ))
}

/// The unit-interval theorem: regular part from Δ̃, singular part from
/// Re((ρ̃₀ − i)²) − 4 Re κ̃₀ ≥ 0.
pub fn analyze_unit_direct(
    problem: &UnitIntervalProblem,
    opts: &AnalysisOptions,
    exec: &impl Executor,
) -> SpectrumReport {
    let cfg = &opts.limits;
    let sym = WeightedSchurSymbols::new(problem);
    let sampler = Sampler::new(Direction::XToZeroPlus, TailHint::Algebraic, cfg);
    let d0 = d_limit(&sampler, cfg, &|x| sym.coeffs(x).map(|c| c.base.d));
    let reg = regular_part_unit(&sym, &opts.regular, cfg);
    let window = opts.window.unwrap_or(DEFAULT_WINDOW);

    let mut assumptions = AssumptionReport::default();
    let xf = cfg.x_floor.max(1e-6);
    let a = check_assumption_a_unit(problem, &SampleGrid::new(xf, 1.0, 1025));
    assumptions.push(Check {
        name: "A",
        verdict: if a.pass { Verdict::Pass } else { Verdict::Fail },
        witness: a
            .violation
            .map(|(at, _, v)| asymptotics::Witness { at, value: v }),
        detail: format!("{} samples, {}", a.samples, a.note),
    });
    let probes = probes_for(
        &reg.set,
        d0.class.finite().map(|v| v.re),
        window,
        opts.probes,
    );
    let b = check_assumptions_b_unit(&sym, &probes, cfg);
    assumptions.beta = b.beta;
    assumptions.gamma = b.gamma;
    assumptions.checks.extend(b.checks);

    let w_limit = asymptotics::weight_limits(&sym, cfg)
        .ok()
        .and_then(|(w, _)| w.finite().map(|v| v.re));
    let excluded = excluded_set(&reg.set, &d0);
    let dis = UnitDiscriminant {
        sym: &sym,
        cfg,
        w_limit,
    };
    let scan = singular_part(&dis, window, &excluded, &opts.scan, exec);
    realness_checks(&mut assumptions, &scan.curve, "Im rho0 = 1 + lim W");
    unresolved_check(&mut assumptions, &scan.unresolved);

    SpectrumReport {
        route: Route::UnitDirect,
        window,
        union: reg.set.union(&scan.set),
        regular_part: reg.set,
        regular_uncertainty: reg.uncertainty,
        singular_part: scan.set,
        d_infinity: d0,
        unresolved_lambdas: scan.unresolved,
        assumptions,
        discriminant_curve: scan.curve,
        edge_lo: scan.edge_lo,
        edge_hi: scan.edge_hi,
        structure: None,
        notes: vec![String::from(
            "assumption verdicts are sampled, not proved; d_0 is an indeterminate point",
        )],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;

    fn half(src: [&str; 5]) -> HalfLineProblem {
        HalfLineProblem::from_sources(src, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn decoupled_discriminant() {
        let sym = SchurSymbols::new(&half(["1", "0", "0", "0", "0"]));
        let cfg = LimitConfig::default();
        assert!((discriminant(&sym, -1.0, &cfg).unwrap() + 4.0).abs() < 1e-12);
        assert!((discriminant(&sym, 1.0, &cfg).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_closed_form() {
        let data = ConstantLimitData {
            p: 1.0,
            q: 2.0,
            b: Complex64::new(1.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: 0.0,
        };
        let s = constant_limit_spectrum(&data, -1.0, -1.0).unwrap();
        assert_eq!(
            s,
            IntervalSet::from_intervals([
                Interval::new(-1.0, 0.0),
                Interval::new(2.0, f64::INFINITY)
            ])
        );
        // q∞ = d∞ gives one interval.
        let one = ConstantLimitData { q: 0.0, ..data };
        let s = constant_limit_spectrum(&one, -1.0, -1.0).unwrap();
        assert_eq!(s.len(), 1);
        let dec = ConstantLimitData {
            b: Complex64::new(0.0, 0.0),
            q: 0.0,
            ..data
        };
        let s = constant_limit_spectrum(&dec, 0.0, 0.0).unwrap();
        assert_eq!(s, IntervalSet::single(0.0, f64::INFINITY));
        let bad = ConstantLimitData {
            b: Complex64::new(0.0, 1.0),
            c: Complex64::new(1.0, 0.0),
            ..data
        };
        assert!(constant_limit_spectrum(&bad, 0.0, 0.0).is_err());
    }

    #[test]
    fn cubic_roots() {
        // λ(λ−2)(λ+1) = λ³ − λ² − 2λ
        let r = real_roots(&[0.0, -2.0, -1.0, 1.0]);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-1.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(real_roots(&[1.0, 0.0, 1.0]).len(), 0);
        let r = real_roots(&[-1.0, 1.0, 0.0, 1.0]);
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn classifier_tags() {
        let c = classify_structure(
            &StructureInput::InfiniteD {
                plus: false,
                p_minus_b2_over_d: 1.0,
                b2_over_d2: 0.5,
                im_bc_over_d: 0.0,
                q_minus_c2_over_d: 0.0,
                c2_over_d2: 0.0,
            },
            f64::NEG_INFINITY,
            0.0,
        )
        .unwrap();
        assert_eq!(c.tag, "(−∞, max{s+, δ+}]");
        let c = classify_structure(
            &StructureInput::FiniteD {
                d_inf: 0.0,
                p_inf: 0.0,
                b2_inf: 1.0,
                im_bc_inf: 0.0,
                q_inf: 1.0,
                c2_inf: 0.0,
            },
            f64::NEG_INFINITY,
            0.0,
        )
        .unwrap();
        assert_eq!(c.tag, "(−∞, max{s−, δ+}] ∪ [s+, ∞)");
        let c = classify_structure(
            &StructureInput::InfiniteD {
                plus: true,
                p_minus_b2_over_d: 1.0,
                b2_over_d2: 0.0,
                im_bc_over_d: 0.0,
                q_minus_c2_over_d: 0.0,
                c2_over_d2: 0.0,
            },
            1.0,
            2.0,
        )
        .unwrap();
        assert_eq!(c.tag, "[min{s, δ−}, ∞)");
        assert!(matches!(
            classify_structure(
                &StructureInput::InfiniteD {
                    plus: true,
                    p_minus_b2_over_d: 1.0,
                    b2_over_d2: 1e-8,
                    im_bc_over_d: 0.0,
                    q_minus_c2_over_d: 0.0,
                    c2_over_d2: 0.0,
                },
                1.0,
                2.0,
            ),
            Err(StructureError::CaseUndetermined { .. })
        ));
    }

    #[test]
    fn constant_example_pipeline() {
        let p = half(["1", "2", "1", "0", "0"]);
        let opts = AnalysisOptions {
            window: Some(Interval::new(-5.0, 5.0)),
            ..AnalysisOptions::default()
        };
        let rep = analyze_half_line(&p, &opts, &Sequential);
        let expect =
            IntervalSet::from_intervals([Interval::new(-1.0, 0.0), Interval::new(2.0, 5.0)]);
        assert!(rep.union.hausdorff(&expect) < 1e-6, "{}", rep.union);
        let st = rep.structure.unwrap();
        assert_eq!(st.tag, TAG_FIN_POS_THREE);
    }
}
