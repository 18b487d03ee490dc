//! Numerical limits on geometric sample sequences, and sampled checks of the
//! boundedness/limit hypotheses.
//!
//! A limit is estimated from `f` sampled at t_k = t₀·2^k (t → ∞) or
//! x_k = x₀·2^{-k} (x → 0+). Candidate extrapolants are the raw samples, up to
//! three Aitken Δ² sweeps, and polynomial (Neville/Richardson) and rational
//! (Bulirsch–Stoer) extrapolation to h = 0 in a few scale variables h. Every candidate is scored by the spread of
//! three consecutive values; the best-scoring one wins.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Display;
use num_complex::Complex64;

use crate::coefficients::TailHint;
use crate::schur::{SchurSymbols, SymbolValues, WeightedSchurSymbols};

#[derive(Debug, Clone, PartialEq)]
pub struct LimitConfig {
    pub t0: f64,
    pub ratio: f64,
    pub scales: usize,
    pub x0: f64,
    pub x_floor: f64,
    /// finite(v) requires error ≤ finite_rel_tol·(1+|v|).
    pub finite_rel_tol: f64,
    /// ±∞ requires monotone growth and |f| above this at the last 4 scales
    /// (or non-decaying increments, which catches logarithmic growth).
    pub infinite_threshold: f64,
    /// Samples whose rounding-error estimate exceeds trust_rel_tol·(1+|v|)
    /// end the sequence.
    pub trust_rel_tol: f64,
    pub aitken_sweeps: usize,
    pub max_degree: usize,
    pub min_samples: usize,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            t0: 4.0,
            ratio: 2.0,
            scales: 27,
            x0: 0.25,
            x_floor: 1e-9,
            finite_rel_tol: 1e-7,
            infinite_threshold: 1e6,
            trust_rel_tol: 1e-6,
            aitken_sweeps: 3,
            max_degree: 8,
            min_samples: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    TToInfinity,
    XToZeroPlus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitClass {
    Finite(Complex64),
    PlusInfinity,
    MinusInfinity,
    Divergent,
}

impl LimitClass {
    pub fn finite(&self) -> Option<Complex64> {
        match self {
            LimitClass::Finite(v) => Some(*v),
            _ => None,
        }
    }

    /// Extended-real view: finite real part, ±∞, or None when divergent.
    pub fn extended_real(&self) -> Option<f64> {
        match self {
            LimitClass::Finite(v) => Some(v.re),
            LimitClass::PlusInfinity => Some(f64::INFINITY),
            LimitClass::MinusInfinity => Some(f64::NEG_INFINITY),
            LimitClass::Divergent => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LimitClass::Finite(_) => "finite",
            LimitClass::PlusInfinity => "plus_infinity",
            LimitClass::MinusInfinity => "minus_infinity",
            LimitClass::Divergent => "divergent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMethod {
    Raw,
    Aitken(u8),
    /// Polynomial extrapolation in scale family `family` with `degree`.
    Richardson {
        family: u8,
        degree: u8,
    },
    /// Bulirsch–Stoer rational extrapolation in scale family `family`.
    Rational {
        family: u8,
        degree: u8,
    },
    Growth,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub class: LimitClass,
    pub error_estimate: f64,
    pub samples_used: usize,
    /// The three consecutive extrapolants that were compared.
    pub partials: Vec<Complex64>,
    pub method: LimitMethod,
}

impl LimitEstimate {
    pub fn finite(&self) -> Option<Complex64> {
        self.class.finite()
    }

    /// Best candidate value with its error estimate, accepted when the error
    /// is at most `rel·(1+|v|)`. Finite limits always qualify; divergent
    /// estimates qualify when their best extrapolant is merely less accurate
    /// than the finite-classification tolerance.
    pub fn approximate(&self, rel: f64) -> Option<(Complex64, f64)> {
        match self.class {
            LimitClass::Finite(v) => Some((v, self.error_estimate)),
            LimitClass::Divergent => {
                let v = *self.partials.get(2)?;
                (self.error_estimate <= rel * (1.0 + v.norm())).then_some((v, self.error_estimate))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LimitError {
    #[error("evaluation failed at sample {k} (argument {arg}): {message}")]
    EvaluationFailed { k: usize, arg: f64, message: String },
    #[error("limit of {which} does not exist ({class})")]
    Divergent {
        which: &'static str,
        class: &'static str,
    },
}

/// One sampled value with an absolute rounding-error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub value: Complex64,
    pub err: f64,
}

impl From<Complex64> for Sample {
    fn from(value: Complex64) -> Self {
        Sample { value, err: 0.0 }
    }
}

impl From<f64> for Sample {
    fn from(v: f64) -> Self {
        Sample {
            value: Complex64::new(v, 0.0),
            err: 0.0,
        }
    }
}

/// Sample arguments plus scale variables h (→ 0 along the sequence).
#[derive(Debug, Clone, PartialEq)]
pub struct Sampler {
    pub args: Vec<f64>,
    pub families: Vec<Vec<f64>>,
}

fn x_sequence(cfg: &LimitConfig) -> Vec<f64> {
    let mut xs = Vec::new();
    let mut x = cfg.x0;
    while x >= cfg.x_floor && xs.len() < 200 {
        xs.push(x);
        x /= cfg.ratio;
    }
    xs
}

impl Sampler {
    pub fn new(direction: Direction, tail: TailHint, cfg: &LimitConfig) -> Sampler {
        match (direction, tail) {
            (Direction::TToInfinity, TailHint::Algebraic) => {
                let args: Vec<f64> = (0..cfg.scales)
                    .map(|k| cfg.t0 * libm::pow(cfg.ratio, k as f64))
                    .collect();
                let inv = args.iter().map(|t| 1.0 / t).collect();
                let exp = args.iter().map(|t| libm::exp(-t)).collect();
                Sampler {
                    args,
                    families: alloc::vec![inv, exp],
                }
            }
            (Direction::TToInfinity, TailHint::FromUnitInterval) => {
                let xs = x_sequence(cfg);
                let args: Vec<f64> = xs.iter().map(|x| -libm::log(*x)).collect();
                let inv = args.iter().map(|t| 1.0 / t).collect();
                Sampler {
                    args,
                    families: alloc::vec![xs, inv],
                }
            }
            (Direction::XToZeroPlus, _) => {
                let xs = x_sequence(cfg);
                let inv_log = xs.iter().map(|x| -1.0 / libm::log(*x)).collect();
                Sampler {
                    args: xs.clone(),
                    families: alloc::vec![xs, inv_log],
                }
            }
        }
    }
}

/// Estimate lim f along the sampler's sequence.
pub fn estimate_limit<F, S, E>(
    mut f: F,
    sampler: &Sampler,
    cfg: &LimitConfig,
) -> Result<LimitEstimate, LimitError>
where
    F: FnMut(f64) -> Result<S, E>,
    S: Into<Sample>,
    E: Display,
{
    let samples: Vec<Result<Sample, String>> = sampler
        .args
        .iter()
        .map(|a| f(*a).map(Into::into).map_err(|e| format!("{e}")))
        .collect();
    estimate_from_samples(&samples, sampler, cfg)
}

fn spread(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (a - b).norm().max((b - c).norm()).max((a - c).norm())
}

struct Candidate {
    value: Complex64,
    err: f64,
    method: LimitMethod,
    partials: [Complex64; 3],
}

fn consider(
    best: &mut Option<Candidate>,
    seq: &[Option<Complex64>],
    e: usize,
    method: LimitMethod,
) {
    if e < 2 {
        return;
    }
    let (Some(a), Some(b), Some(c)) = (seq[e - 2], seq[e - 1], seq[e]) else {
        return;
    };
    let err = spread(a, b, c);
    if !err.is_finite() || !c.re.is_finite() || !c.im.is_finite() {
        return;
    }
    if best.as_ref().is_none_or(|bc| err < bc.err) {
        *best = Some(Candidate {
            value: c,
            err,
            method,
            partials: [a, b, c],
        });
    }
}

fn aitken(seq: &[Option<Complex64>]) -> Vec<Option<Complex64>> {
    if seq.len() < 3 {
        return Vec::new();
    }
    (0..seq.len() - 2)
        .map(|k| {
            let (a, b, c) = (seq[k]?, seq[k + 1]?, seq[k + 2]?);
            let d1 = b - a;
            let d2 = c - b;
            let den = d2 - d1;
            // Only contracting sequences: Aitken on a diverging geometric
            // sequence returns its "antilimit".
            if den.norm() == 0.0 || !(d2.norm() < d1.norm()) {
                return None;
            }
            Some(c - d2 * d2 / den)
        })
        .collect()
}

/// Value at h = 0 of the polynomial through (h_i, y_i).
fn neville_at_zero(h: &[f64], y: &[Complex64]) -> Option<Complex64> {
    let n = h.len();
    for i in 0..n {
        for j in i + 1..n {
            if h[i] == h[j] {
                return None;
            }
        }
    }
    let mut p: Vec<Complex64> = y.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            let (hi, hj) = (h[i], h[i + m]);
            p[i] = (p[i + 1] * hi - p[i] * hj) / (hi - hj);
        }
    }
    Some(p[0])
}

/// Value at h = 0 of the diagonal rational interpolant through (h, y)
/// (Bulirsch–Stoer tableau); `None` on a vanishing denominator.
fn rational_at_zero(h: &[f64], y: &[Complex64]) -> Option<Complex64> {
    let n = h.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut prev2: Vec<Complex64> = vec![zero; n];
    let mut prev: Vec<Complex64> = y.to_vec();
    for k in 1..n {
        let mut cur = vec![zero; n];
        for i in k..n {
            let diff = prev[i] - prev[i - 1];
            let inner = prev[i] - prev2[i - 1];
            if inner == zero {
                if diff == zero {
                    cur[i] = prev[i];
                    continue;
                }
                return None;
            }
            let den = (Complex64::new(1.0, 0.0) - diff / inner) * (h[i - k] / h[i]) - 1.0;
            if den == zero {
                return None;
            }
            cur[i] = prev[i] + diff / den;
        }
        prev2 = prev;
        prev = cur;
    }
    let v = prev[n - 1];
    (v.re.is_finite() && v.im.is_finite()).then_some(v)
}

/// Core estimator on precomputed samples (`Err` entries end the sequence).
pub fn estimate_from_samples(
    samples: &[Result<Sample, String>],
    sampler: &Sampler,
    cfg: &LimitConfig,
) -> Result<LimitEstimate, LimitError> {
    let mut seq: Vec<Complex64> = Vec::new();
    let mut overflow: Option<f64> = None;
    for (k, s) in samples.iter().enumerate() {
        match s {
            Err(message) => {
                if k < cfg.min_samples {
                    return Err(LimitError::EvaluationFailed {
                        k,
                        arg: sampler.args[k],
                        message: message.clone(),
                    });
                }
                break;
            }
            Ok(s) => {
                let v = s.value;
                if !(v.re.is_finite() && v.im.is_finite()) {
                    if v.re.is_infinite() && !v.im.is_nan() {
                        overflow = Some(v.re);
                    } else if k < cfg.min_samples.min(3) {
                        return Err(LimitError::EvaluationFailed {
                            k,
                            arg: sampler.args[k],
                            message: "non-finite value".into(),
                        });
                    }
                    break;
                }
                let trusted = s.err <= cfg.trust_rel_tol * (1.0 + v.norm());
                if !trusted && seq.len() >= 3 {
                    break;
                }
                seq.push(v);
            }
        }
    }
    let n = seq.len();

    let mut best: Option<Candidate> = None;
    let raw: Vec<Option<Complex64>> = seq.iter().copied().map(Some).collect();
    for e in 2..n {
        consider(&mut best, &raw, e, LimitMethod::Raw);
    }
    let mut cur = raw.clone();
    for sweep in 1..=cfg.aitken_sweeps {
        cur = aitken(&cur);
        for e in 2..cur.len() {
            consider(&mut best, &cur, e, LimitMethod::Aitken(sweep as u8));
        }
    }
    for (fi, h) in sampler.families.iter().enumerate() {
        for m in 1..=cfg.max_degree {
            let ext: Vec<Option<Complex64>> = (0..n)
                .map(|e| {
                    if e < m {
                        None
                    } else {
                        neville_at_zero(&h[e - m..=e], &seq[e - m..=e])
                    }
                })
                .collect();
            for e in m + 2..n {
                consider(
                    &mut best,
                    &ext,
                    e,
                    LimitMethod::Richardson {
                        family: fi as u8,
                        degree: m as u8,
                    },
                );
            }
            let rat: Vec<Option<Complex64>> = (0..n)
                .map(|e| {
                    if e < m {
                        None
                    } else {
                        rational_at_zero(&h[e - m..=e], &seq[e - m..=e])
                    }
                })
                .collect();
            for e in m + 2..n {
                consider(
                    &mut best,
                    &rat,
                    e,
                    LimitMethod::Rational {
                        family: fi as u8,
                        degree: m as u8,
                    },
                );
            }
        }
    }

    if let Some(c) = &best {
        if c.err <= cfg.finite_rel_tol * (1.0 + c.value.norm()) {
            return Ok(LimitEstimate {
                class: LimitClass::Finite(c.value),
                error_estimate: c.err,
                samples_used: n,
                partials: c.partials.to_vec(),
                method: c.method,
            });
        }
    }

    if let Some(class) = growth(&seq, overflow, cfg) {
        return Ok(LimitEstimate {
            class,
            error_estimate: 0.0,
            samples_used: n,
            partials: seq[n.saturating_sub(3)..].to_vec(),
            method: LimitMethod::Growth,
        });
    }

    Ok(LimitEstimate {
        class: LimitClass::Divergent,
        error_estimate: best.as_ref().map_or(f64::INFINITY, |c| c.err),
        samples_used: n,
        partials: best.map_or_else(Vec::new, |c| c.partials.to_vec()),
        method: LimitMethod::None,
    })
}

fn growth(seq: &[Complex64], overflow: Option<f64>, cfg: &LimitConfig) -> Option<LimitClass> {
    let mut v: Vec<f64> = Vec::new();
    for z in seq {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            return None;
        }
        v.push(z.re);
    }
    if let Some(inf) = overflow {
        v.push(inf);
    }
    let n = v.len();
    if n < 4 {
        return None;
    }
    let tail = &v[n - 4..];
    for sign in [1.0, -1.0] {
        let monotone = tail.windows(2).all(|w| sign * (w[1] - w[0]) > 0.0);
        if !monotone {
            continue;
        }
        let large = tail.iter().all(|x| sign * x > cfg.infinite_threshold);
        let inc: Vec<f64> = tail.windows(2).map(|w| sign * (w[1] - w[0])).collect();
        let non_decaying = inc.windows(2).all(|w| w[1] >= 0.999 * w[0]);
        if large || non_decaying {
            return Some(if sign > 0.0 {
                LimitClass::PlusInfinity
            } else {
                LimitClass::MinusInfinity
            });
        }
    }
    None
}

fn symbol_samples<F>(args: &[f64], mut f: F) -> Vec<Result<SymbolValues, String>>
where
    F: FnMut(f64) -> Result<SymbolValues, crate::schur::SymbolError>,
{
    args.iter()
        .map(|a| f(*a).map_err(|e| format!("{e}")))
        .collect()
}

fn project<G>(vals: &[Result<SymbolValues, String>], g: G) -> Vec<Result<Sample, String>>
where
    G: Fn(&SymbolValues) -> (Complex64, f64),
{
    vals.iter()
        .map(|v| {
            v.as_ref().map_err(Clone::clone).map(|v| {
                let (value, err) = g(v);
                Sample { value, err }
            })
        })
        .collect()
}

/// (ρ/π)∞, (κ/π)∞ and ((∂π/∂t)/π)∞ at one λ.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolLimits {
    pub rho_over_pi: LimitEstimate,
    pub kappa_over_pi: LimitEstimate,
    pub dpi_over_pi: LimitEstimate,
}

impl SymbolLimits {
    /// max(|Im(ρ/π)∞|, |Im(κ/π)∞|) when both are finite.
    pub fn realness_residual(&self) -> Option<f64> {
        let r = self.rho_over_pi.finite()?;
        let k = self.kappa_over_pi.finite()?;
        Some(r.im.abs().max(k.im.abs()))
    }
}

pub fn symbol_limits(
    sym: &SchurSymbols,
    lambda: f64,
    cfg: &LimitConfig,
) -> Result<SymbolLimits, LimitError> {
    let sampler = Sampler::new(Direction::TToInfinity, sym.tail, cfg);
    let vals = symbol_samples(&sampler.args, |t| sym.values(t, lambda));
    Ok(SymbolLimits {
        rho_over_pi: estimate_from_samples(&project(&vals, |v| v.rho_over_pi()), &sampler, cfg)?,
        kappa_over_pi: estimate_from_samples(
            &project(&vals, |v| v.kappa_over_pi()),
            &sampler,
            cfg,
        )?,
        dpi_over_pi: estimate_from_samples(&project(&vals, |v| v.dpi_over_pi()), &sampler, cfg)?,
    })
}

/// The pair ((ρ/π)∞, (κ/π)∞); fails if either limit is not finite.
pub fn limit_pair(
    sym: &SchurSymbols,
    lambda: f64,
    cfg: &LimitConfig,
) -> Result<(LimitEstimate, LimitEstimate, f64), LimitError> {
    let l = symbol_limits(sym, lambda, cfg)?;
    require_finite("rho/pi", &l.rho_over_pi)?;
    require_finite("kappa/pi", &l.kappa_over_pi)?;
    let residual = l.realness_residual().unwrap_or(f64::INFINITY);
    Ok((l.rho_over_pi, l.kappa_over_pi, residual))
}

fn require_finite(which: &'static str, e: &LimitEstimate) -> Result<(), LimitError> {
    match e.class {
        LimitClass::Finite(_) => Ok(()),
        c => Err(LimitError::Divergent {
            which,
            class: c.label(),
        }),
    }
}

/// ρ̃₀(λ) = lim xρ̃/π̃ and κ̃₀(λ) = lim x²κ̃/π̃ as x → 0+.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLimits {
    pub rho0: LimitEstimate,
    pub kappa0: LimitEstimate,
}

pub fn boundary_limits(
    sym: &WeightedSchurSymbols,
    lambda: f64,
    cfg: &LimitConfig,
) -> Result<BoundaryLimits, LimitError> {
    let sampler = Sampler::new(Direction::XToZeroPlus, TailHint::Algebraic, cfg);
    let vals: Vec<_> = sampler
        .args
        .iter()
        .map(|x| sym.scaled(*x, lambda).map_err(|e| format!("{e}")))
        .collect();
    let rho: Vec<_> = vals
        .iter()
        .map(|v| {
            v.as_ref().map_err(Clone::clone).map(|s| Sample {
                value: s.rho,
                err: s.rho_err,
            })
        })
        .collect();
    let kappa: Vec<_> = vals
        .iter()
        .map(|v| {
            v.as_ref().map_err(Clone::clone).map(|s| Sample {
                value: s.kappa,
                err: s.kappa_err,
            })
        })
        .collect();
    Ok(BoundaryLimits {
        rho0: estimate_from_samples(&rho, &sampler, cfg)?,
        kappa0: estimate_from_samples(&kappa, &sampler, cfg)?,
    })
}

/// Like [`boundary_limits`] but fails unless both limits are finite.
pub fn boundary_pair(
    sym: &WeightedSchurSymbols,
    lambda: f64,
    cfg: &LimitConfig,
) -> Result<(Complex64, Complex64), LimitError> {
    let l = boundary_limits(sym, lambda, cfg)?;
    require_finite("x*rho/pi", &l.rho0)?;
    require_finite("x^2*kappa/pi", &l.kappa0)?;
    Ok((l.rho0.finite().unwrap(), l.kappa0.finite().unwrap()))
}

/// lim W(t) and lim W′(t) as t → ∞.
pub fn weight_limits(
    sym: &WeightedSchurSymbols,
    cfg: &LimitConfig,
) -> Result<(LimitEstimate, LimitEstimate), LimitError> {
    let sampler = Sampler::new(Direction::TToInfinity, TailHint::FromUnitInterval, cfg);
    let w = estimate_limit(|t| sym.big_w(t), &sampler, cfg)?;
    let dw = estimate_limit(|t| sym.big_w_prime(t), &sampler, cfg)?;
    Ok((w, dw))
}

// ---------------------------------------------------------------------------
// Sampled hypothesis checks.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// No violation found on the samples.
    Pass,
    /// A witness sample violates the condition.
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub at: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssumptionReport {
    pub checks: Vec<Check>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// Largest |Im| of the symbol limits seen during the λ scan.
    pub realness_residual: Option<f64>,
}

impl AssumptionReport {
    pub fn any_fail(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }
}

/// Strictly increasing, and either grown by more than `factor` or with
/// increments that do not decay (each at least 0.99 of the previous one, with
/// a total rise above 1e-3 relative), which on geometric scales is
/// logarithmic or faster growth.
fn growing(tail: &[f64], factor: f64) -> bool {
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    if !increasing {
        return false;
    }
    let n = tail.len();
    let grown = tail[n - 1] > factor * tail[0].max(f64::MIN_POSITIVE);
    let steady = tail[n - 1] - tail[0] > 1e-3 * tail[n - 1].abs()
        && tail.windows(3).all(|w| w[2] - w[1] >= 0.99 * (w[1] - w[0]));
    grown || steady
}

/// Unbounded-trend detector on magnitudes sampled along a tail sequence.
///
/// Each sample carries an absolute rounding-error estimate; the sequence is cut
/// at the first sample whose value is not trustworthy (error above 1e-3 of
/// the magnitude), so cancellation noise is not mistaken for a blow-up.
fn bounded_trend(name: &'static str, args: &[f64], mags: &[Option<(f64, f64)>]) -> Check {
    let mut v: Vec<f64> = Vec::new();
    for (k, m) in mags.iter().enumerate() {
        match m {
            Some((x, e)) if x.is_finite() && (*e == 0.0 || *e <= 1e-3 * x.abs()) => v.push(*x),
            _ if k >= 3 => break,
            _ => {
                return Check {
                    name,
                    verdict: Verdict::Inconclusive,
                    witness: Some(Witness {
                        at: args[k],
                        value: m.map_or(f64::NAN, |m| m.0),
                    }),
                    detail: "no trustworthy samples on the tail".into(),
                }
            }
        }
    }
    let n = v.len();
    if n >= 6 {
        let tail = &v[n - 6..];
        if growing(tail, 10.0) {
            return Check {
                name,
                verdict: Verdict::Fail,
                witness: Some(Witness {
                    at: args[n - 1],
                    value: v[n - 1],
                }),
                detail: format!(
                    "grows from {:.3e} to {:.3e} over the last 6 scales",
                    tail[0], tail[5]
                ),
            };
        }
    }
    let max = v.iter().cloned().fold(0.0, f64::max);
    Check {
        name,
        verdict: Verdict::Pass,
        witness: None,
        detail: format!("max {max:.3e} over {n} tail samples"),
    }
}

/// |g| ≤ β(|d|+1) on samples: returns (β, check), β the sampled supremum of
/// the ratio. Fails on a non-finite ratio or on a ratio that keeps growing
/// (see [`growing`], with factor 2): a
/// bounded ratio, however it is distributed, satisfies the bound.
fn coupling_bound(name: &'static str, args: &[f64], g: &[f64], d: &[f64]) -> (f64, Check) {
    let ratios: Vec<f64> = g
        .iter()
        .zip(d)
        .map(|(gi, di)| gi / (di.abs() + 1.0))
        .collect();
    let (imax, rmax) =
        ratios.iter().enumerate().fold(
            (0, 0.0),
            |acc, (i, r)| if !(*r <= acc.1) { (i, *r) } else { acc },
        );
    let n = ratios.len();
    let trend = n >= 6 && growing(&ratios[n - 6..], 2.0);
    let fail = trend || !rmax.is_finite();
    let check = Check {
        name,
        verdict: if fail { Verdict::Fail } else { Verdict::Pass },
        witness: fail.then(|| Witness {
            at: args[if trend { n - 1 } else { imax }],
            value: ratios[if trend { n - 1 } else { imax }],
        }),
        detail: if trend {
            format!(
                "ratio keeps growing (to {:.3e}); no constant bounds it",
                ratios[n - 1]
            )
        } else {
            format!("sampled constant {rmax:.3e}")
        },
    };
    (rmax, check)
}

/// (B1), (B2), (B3a), (B3b) sampled on a half-line problem.
pub fn check_assumptions_b(
    sym: &SchurSymbols,
    probes: &[f64],
    cfg: &LimitConfig,
) -> AssumptionReport {
    let mut rep = AssumptionReport::default();
    let sampler = Sampler::new(Direction::TToInfinity, sym.tail, cfg);
    let d_lim = estimate_limit(|t| sym.coeffs(t).map(|c| c.d), &sampler, cfg);
    rep.push(match &d_lim {
        Ok(e) if e.class != LimitClass::Divergent => Check {
            name: "B1",
            verdict: Verdict::Pass,
            witness: None,
            detail: format!("d_inf {}", e.class.label()),
        },
        Ok(e) => Check {
            name: "B1",
            verdict: Verdict::Fail,
            witness: e.partials.last().map(|v| Witness {
                at: *sampler.args.last().unwrap(),
                value: v.re,
            }),
            detail: "limit of d does not exist".into(),
        },
        Err(err) => Check {
            name: "B1",
            verdict: Verdict::Inconclusive,
            witness: None,
            detail: format!("{err}"),
        },
    });

    let floor = sym.domain_floor;
    let mut args: Vec<f64> = (0..64).map(|k| floor + 0.25 * k as f64).collect();
    args.extend(sampler.args.iter().copied().filter(|t| *t > floor + 16.0));
    let mut ok_args = Vec::new();
    let (mut bs, mut cs, mut ds) = (Vec::new(), Vec::new(), Vec::new());
    for t in &args {
        if let Ok(co) = sym.coeffs(*t) {
            if co.b.norm().is_finite() && co.c.norm().is_finite() && co.d.is_finite() {
                ok_args.push(*t);
                bs.push(co.b.norm());
                cs.push(co.c.norm());
                ds.push(co.d);
            }
        }
    }
    let (beta, cb) = coupling_bound("B2 (b)", &ok_args, &bs, &ds);
    let (gamma, cc) = coupling_bound("B2 (c)", &ok_args, &cs, &ds);
    rep.beta = Some(beta);
    rep.gamma = Some(gamma);
    rep.push(cb);
    rep.push(cc);

    for &lam in probes {
        let vals: Vec<_> = sampler
            .args
            .iter()
            .map(|t| sym.values(*t, lam).ok())
            .collect();
        let mag = |f: &dyn Fn(&SymbolValues) -> (f64, f64)| -> Vec<Option<(f64, f64)>> {
            vals.iter().map(|v| v.as_ref().map(f)).collect()
        };
        let a = bounded_trend("B3a", &sampler.args, &mag(&|v| (v.pi.abs(), v.pi_err)));
        let b1 = bounded_trend(
            "B3b",
            &sampler.args,
            &mag(&|v| (1.0 / v.pi.abs(), v.pi_err / (v.pi * v.pi))),
        );
        let b2 = bounded_trend("B3b", &sampler.args, &mag(&|v| (v.rho.norm(), v.rho_err)));
        let b3 = bounded_trend(
            "B3b",
            &sampler.args,
            &mag(&|v| (v.kappa.norm(), v.kappa_err)),
        );
        rep.push(annotate(a, lam));
        rep.push(annotate(worst([b1, b2, b3]), lam));
    }
    rep
}

fn annotate(mut c: Check, lambda: f64) -> Check {
    c.detail = format!("lambda={lambda}: {}", c.detail);
    c
}

fn worst<const N: usize>(checks: [Check; N]) -> Check {
    let mut it = checks.into_iter();
    let mut w = it.next().unwrap();
    for c in it {
        let rank = |v: Verdict| match v {
            Verdict::Fail => 2,
            Verdict::Inconclusive => 1,
            Verdict::Pass => 0,
        };
        if rank(c.verdict) > rank(w.verdict) {
            w = c;
        }
    }
    w
}

/// The x → 0+ analogues (B̃1)–(B̃3b) and (C̃2) for a weighted problem.
pub fn check_assumptions_b_unit(
    sym: &WeightedSchurSymbols,
    probes: &[f64],
    cfg: &LimitConfig,
) -> AssumptionReport {
    let mut rep = AssumptionReport::default();
    let sampler = Sampler::new(Direction::XToZeroPlus, TailHint::Algebraic, cfg);
    let d0 = estimate_limit(|x| sym.coeffs(x).map(|c| c.base.d), &sampler, cfg);
    rep.push(match &d0 {
        Ok(e) if e.class != LimitClass::Divergent => Check {
            name: "B1",
            verdict: Verdict::Pass,
            witness: None,
            detail: format!("d_0 {}", e.class.label()),
        },
        Ok(_) => Check {
            name: "B1",
            verdict: Verdict::Fail,
            witness: None,
            detail: "limit of d at 0+ does not exist".into(),
        },
        Err(err) => Check {
            name: "B1",
            verdict: Verdict::Inconclusive,
            witness: None,
            detail: format!("{err}"),
        },
    });

    let mut args: Vec<f64> = (1..=40).map(|k| k as f64 / 40.0).collect();
    args.extend(sampler.args.iter().copied().filter(|x| *x < 0.025));
    let mut ok_args = Vec::new();
    let (mut bs, mut cs, mut ds) = (Vec::new(), Vec::new(), Vec::new());
    for x in &args {
        if let Ok(co) = sym.coeffs(*x) {
            let co = co.base;
            if co.b.norm().is_finite() && co.c.norm().is_finite() && co.d.is_finite() {
                ok_args.push(*x);
                bs.push(co.b.norm() / x);
                cs.push(co.c.norm());
                ds.push(co.d);
            }
        }
    }
    let (beta, cb) = coupling_bound("B2 (b)", &ok_args, &bs, &ds);
    let (gamma, cc) = coupling_bound("B2 (c)", &ok_args, &cs, &ds);
    rep.beta = Some(beta);
    rep.gamma = Some(gamma);
    rep.push(cb);
    rep.push(cc);

    for &lam in probes {
        let xs = &sampler.args;
        let vals: Vec<_> = xs.iter().map(|x| sym.values(*x, lam).ok()).collect();
        let mag = |f: &dyn Fn(f64, &SymbolValues) -> (f64, f64)| -> Vec<Option<(f64, f64)>> {
            xs.iter()
                .zip(&vals)
                .map(|(x, v)| v.as_ref().map(|v| f(*x, v)))
                .collect()
        };
        let a = bounded_trend(
            "B3a",
            xs,
            &mag(&|x, v| (v.pi.abs() / (x * x), v.pi_err / (x * x))),
        );
        let b1 = bounded_trend(
            "B3b",
            xs,
            &mag(&|x, v| (x * x / v.pi.abs(), x * x * v.pi_err / (v.pi * v.pi))),
        );
        let b2 = bounded_trend("B3b", xs, &mag(&|x, v| (v.rho.norm() / x, v.rho_err / x)));
        let b3 = bounded_trend("B3b", xs, &mag(&|_, v| (v.kappa.norm(), v.kappa_err)));
        rep.push(annotate(a, lam));
        rep.push(annotate(worst([b1, b2, b3]), lam));
    }

    let c2 = estimate_limit(
        |x| sym.coeffs(x).map(|c| x * x * c.d2w / c.w),
        &sampler,
        cfg,
    );
    rep.push(match c2 {
        Ok(e) if e.finite().is_some() => Check {
            name: "C2",
            verdict: Verdict::Pass,
            witness: None,
            detail: format!("lim x^2 w''/w = {:.6e}", e.finite().unwrap().re),
        },
        Ok(e) => Check {
            name: "C2",
            verdict: Verdict::Fail,
            witness: None,
            detail: format!("lim x^2 w''/w is {}", e.class.label()),
        },
        Err(err) => Check {
            name: "C2",
            verdict: Verdict::Inconclusive,
            witness: None,
            detail: format!("{err}"),
        },
    });
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::HalfLineProblem;
    use alloc::collections::BTreeMap;

    fn t_sampler() -> Sampler {
        Sampler::new(
            Direction::TToInfinity,
            TailHint::Algebraic,
            &LimitConfig::default(),
        )
    }

    fn x_sampler() -> Sampler {
        Sampler::new(
            Direction::XToZeroPlus,
            TailHint::Algebraic,
            &LimitConfig::default(),
        )
    }

    fn est<F: Fn(f64) -> f64>(f: F, s: &Sampler) -> LimitEstimate {
        estimate_limit(|t| Ok::<f64, &str>(f(t)), s, &LimitConfig::default()).unwrap()
    }

    #[test]
    fn rational_limit() {
        let e = est(|t| (2.0 * t * t + 1.0) / (t * t + 3.0), &t_sampler());
        let v = e.finite().unwrap();
        assert!((v.re - 2.0).abs() <= 1e-8, "{e:?}");
        assert!(e.error_estimate <= 1e-8);
    }

    #[test]
    fn blow_up_and_oscillation() {
        let e = est(|x| 4.0 * (1.0 + x * x) / (x * x), &x_sampler());
        assert_eq!(e.class, LimitClass::PlusInfinity);
        let e = est(libm::sin, &t_sampler());
        assert_eq!(e.class, LimitClass::Divergent);
        let e = est(libm::log, &x_sampler());
        assert_eq!(e.class, LimitClass::MinusInfinity);
        let e = est(|t| -t * t, &t_sampler());
        assert_eq!(e.class, LimitClass::MinusInfinity);
    }

    #[test]
    fn slow_logarithmic_tail() {
        // 1 + 1/L + 1/L² with L = -ln x: only the 1/L family can extrapolate.
        let e = est(
            |x| {
                let l = -libm::log(x);
                1.0 + 1.0 / l + 1.0 / (l * l)
            },
            &x_sampler(),
        );
        assert!((e.finite().unwrap().re - 1.0).abs() < 1e-8, "{e:?}");
    }

    #[test]
    fn aitken_does_not_return_antilimits() {
        // s_k = 3 + 2^k: Aitken's antilimit would be 3.
        let s = t_sampler();
        let e = est(|t| 3.0 + t, &s);
        assert_eq!(e.class, LimitClass::PlusInfinity);
    }

    #[test]
    fn consistent_garbage_is_not_trusted() {
        // A sample flagged as noisy ends the sequence.
        let s = x_sampler();
        let cfg = LimitConfig::default();
        let e = estimate_limit(
            |x| {
                Ok::<Sample, &str>(if x < 1e-4 {
                    Sample {
                        value: Complex64::new(0.0, 0.0),
                        err: 1.0,
                    }
                } else {
                    Sample {
                        value: Complex64::new(4.0 + x, 0.0),
                        err: 1e-15,
                    }
                })
            },
            &s,
            &cfg,
        )
        .unwrap();
        assert!((e.finite().unwrap().re - 4.0).abs() < 1e-10);
    }

    #[test]
    fn constant_coefficient_pair() {
        let p = HalfLineProblem::from_sources(["1", "0", "1", "0", "0"], &BTreeMap::new()).unwrap();
        let sym = SchurSymbols::new(&p);
        let (r, k, res) = limit_pair(&sym, -2.0, &LimitConfig::default()).unwrap();
        assert!(r.finite().unwrap().norm() < 1e-12);
        assert!((k.finite().unwrap().re - 4.0).abs() < 1e-12);
        assert!(res <= 1e-12);
        // Oracle: direct evaluation far out.
        let v = sym.values(1e8, -2.0).unwrap();
        assert!((v.kappa_over_pi().0.re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn decoupled_checks_pass() {
        let p = HalfLineProblem::from_sources(["1", "0", "0", "0", "2"], &BTreeMap::new()).unwrap();
        let sym = SchurSymbols::new(&p);
        let rep = check_assumptions_b(&sym, &[-1.0, 0.5], &LimitConfig::default());
        assert!(!rep.any_fail(), "{rep:?}");
    }
}
