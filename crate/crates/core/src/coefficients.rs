//! Problem models: the half-line system and the weighted unit-interval system,
//! plus the substitution `x = e^{-t}` mapping the latter onto the former.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::exprlang::{self, differentiate, parse, Expr, Symbols};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("coefficient `{slot}`: {source}")]
    Parse {
        slot: &'static str,
        source: exprlang::ParseError,
    },
    #[error("coefficient `{slot}`: {source}")]
    Diff {
        slot: &'static str,
        source: exprlang::DiffError,
    },
    #[error("coefficient `{slot}` grew to {nodes} nodes (budget {budget})")]
    SubstitutionOverflow {
        slot: &'static str,
        nodes: usize,
        budget: usize,
    },
}

/// How the tail t → ∞ should be sampled when estimating limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailHint {
    /// Geometric t-grid; tails algebraic in 1/t.
    #[default]
    Algebraic,
    /// The problem came from (0,1] via `t = -ln x`: sample geometrically in x.
    FromUnitInterval,
}

/// Coefficients of the half-line operator with first derivatives.
#[derive(Debug, Clone)]
pub struct HalfLineProblem {
    pub p: Expr,
    pub q: Expr,
    pub b: Expr,
    pub c: Expr,
    pub d: Expr,
    pub dp: Expr,
    pub db: Expr,
    pub dc: Expr,
    pub dd: Expr,
    pub domain_floor: f64,
    pub tail: TailHint,
}

fn deriv(slot: &'static str, e: &Expr) -> Result<Expr, ProblemError> {
    differentiate(e, 1).map_err(|source| ProblemError::Diff { slot, source })
}

fn parse_slot(
    slot: &'static str,
    src: &str,
    symbols: &Symbols,
    params: &BTreeMap<String, f64>,
) -> Result<Expr, ProblemError> {
    parse(src, symbols)
        .map(|e| e.bind(params))
        .map_err(|source| ProblemError::Parse { slot, source })
}

fn symbols(var: &str, params: &BTreeMap<String, f64>) -> Symbols {
    Symbols::new(var).with_parameters(params.keys().cloned())
}

impl HalfLineProblem {
    /// Build from coefficient expressions; derivatives are symbolic.
    pub fn new(p: Expr, q: Expr, b: Expr, c: Expr, d: Expr) -> Result<Self, ProblemError> {
        Ok(HalfLineProblem {
            dp: deriv("p", &p)?,
            db: deriv("b", &b)?,
            dc: deriv("c", &c)?,
            dd: deriv("d", &d)?,
            p,
            q,
            b,
            c,
            d,
            domain_floor: 0.0,
            tail: TailHint::Algebraic,
        })
    }

    /// Parse `[p, q, b, c, d]` in the variable `t`.
    pub fn from_sources(
        src: [&str; 5],
        params: &BTreeMap<String, f64>,
    ) -> Result<Self, ProblemError> {
        let s = symbols("t", params);
        let names = ["p", "q", "b", "c", "d"];
        let mut e: Vec<Expr> = Vec::new();
        for (slot, text) in names.iter().zip(src) {
            e.push(parse_slot(slot, text, &s, params)?);
        }
        HalfLineProblem::new(
            e[0].clone(),
            e[1].clone(),
            e[2].clone(),
            e[3].clone(),
            e[4].clone(),
        )
    }

    /// Replace symbolic derivatives by user-supplied ones (`None` keeps the symbolic one).
    pub fn with_derivatives(
        mut self,
        dp: Option<Expr>,
        db: Option<Expr>,
        dc: Option<Expr>,
        dd: Option<Expr>,
    ) -> Self {
        if let Some(v) = dp {
            self.dp = v;
        }
        if let Some(v) = db {
            self.db = v;
        }
        if let Some(v) = dc {
            self.dc = v;
        }
        if let Some(v) = dd {
            self.dd = v;
        }
        self
    }

    pub fn with_domain_floor(mut self, floor: f64) -> Self {
        self.domain_floor = floor;
        self
    }
}

/// Coefficients of the weighted operator on (0,1], singular at x = 0.
#[derive(Debug, Clone)]
pub struct UnitIntervalProblem {
    pub p: Expr,
    pub q: Expr,
    pub b: Expr,
    pub c: Expr,
    pub d: Expr,
    pub w1: Expr,
    pub w2: Expr,
    pub w: Expr,
    pub dp: Expr,
    pub db: Expr,
    pub dc: Expr,
    pub dd: Expr,
    pub dw1: Expr,
    pub dw2: Expr,
    pub d2w2: Expr,
    pub dw: Expr,
    pub d2w: Expr,
}

impl UnitIntervalProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: Expr,
        q: Expr,
        b: Expr,
        c: Expr,
        d: Expr,
        w1: Expr,
        w2: Expr,
    ) -> Result<Self, ProblemError> {
        let w = Expr::mul(&w1, &w2);
        let dw = deriv("w", &w)?;
        let dw2 = deriv("w2", &w2)?;
        Ok(UnitIntervalProblem {
            dp: deriv("p", &p)?,
            db: deriv("b", &b)?,
            dc: deriv("c", &c)?,
            dd: deriv("d", &d)?,
            dw1: deriv("w1", &w1)?,
            d2w2: deriv("w2", &dw2)?,
            d2w: deriv("w", &dw)?,
            dw2,
            dw,
            p,
            q,
            b,
            c,
            d,
            w1,
            w2,
            w,
        })
    }

    /// Parse `[p, q, b, c, d, w1, w2]` in the variable `x`.
    pub fn from_sources(
        src: [&str; 7],
        params: &BTreeMap<String, f64>,
    ) -> Result<Self, ProblemError> {
        let s = symbols("x", params);
        let names = ["p", "q", "b", "c", "d", "w1", "w2"];
        let mut e: Vec<Expr> = Vec::new();
        for (slot, text) in names.iter().zip(src) {
            e.push(parse_slot(slot, text, &s, params)?);
        }
        UnitIntervalProblem::new(
            e[0].clone(),
            e[1].clone(),
            e[2].clone(),
            e[3].clone(),
            e[4].clone(),
            e[5].clone(),
            e[6].clone(),
        )
    }
}

/// Default node budget for substituted expressions.
pub const NODE_BUDGET: usize = 200_000;

/// Map a unit-interval problem to the half-line by `x = e^{-t}`.
///
/// p(t) = e^{2t}(w₂/w₁)p̃, b = −e^t b̃, c = c̃ − ½(e^t + w′/w)b̃, d = d̃, and
/// q = q̃ − (ψ̂/w₁)(p̃ (w₂/ψ̂)′)′ with ψ̂ = √(xw): conjugating the second-order
/// block by the unitary map leaves this potential term behind (it vanishes
/// when w₂/√(xw) is constant). Everything on the right is evaluated at
/// e^{-t}; derivatives come from differentiating the substituted trees.
pub fn transform_to_half_line(
    u: &UnitIntervalProblem,
    budget: usize,
) -> Result<HalfLineProblem, ProblemError> {
    let t = Expr::var("t");
    let x = Expr::neg(&t).exp();
    let et = t.exp();
    let e2t = t.scale(2.0).exp();
    let sub = |e: &Expr| e.substitute(&x);

    let ratio = Expr::div(&sub(&u.w2), &sub(&u.w1));
    let bt = sub(&u.b);
    let p = Expr::mul(&Expr::mul(&e2t, &ratio), &sub(&u.p));
    let xv = Expr::var("x");
    let root = Expr::mul(&xv, &u.w).sqrt();
    let h = Expr::div(&u.w2, &root);
    let inner = Expr::mul(&u.p, &deriv("w2", &h)?);
    let corr = Expr::div(&Expr::mul(&root, &deriv("p", &inner)?), &u.w1);
    let q = sub(&Expr::sub(&u.q, &corr));
    let b = Expr::neg(&Expr::mul(&et, &bt));
    let log_w = Expr::div(&sub(&u.dw), &sub(&u.w));
    let c = Expr::sub(
        &sub(&u.c),
        &Expr::mul(&Expr::add(&et, &log_w).scale(0.5), &bt),
    );
    let d = sub(&u.d);

    let out = HalfLineProblem {
        tail: TailHint::FromUnitInterval,
        ..HalfLineProblem::new(p, q, b, c, d)?
    };
    for (slot, e) in [
        ("p", &out.p),
        ("q", &out.q),
        ("b", &out.b),
        ("c", &out.c),
        ("d", &out.d),
        ("p'", &out.dp),
        ("b'", &out.db),
        ("c'", &out.dc),
        ("d'", &out.dd),
    ] {
        let nodes = e.node_count();
        if nodes > budget {
            return Err(ProblemError::SubstitutionOverflow {
                slot,
                nodes,
                budget,
            });
        }
    }
    Ok(out)
}

/// Uniform sampling grid `[lo, hi]` with `n` points (both ends included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl SampleGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        SampleGrid {
            lo,
            hi,
            n: n.max(1),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n;
        (0..n).map(move |k| {
            if n == 1 {
                self.lo
            } else {
                self.lo + (self.hi - self.lo) * (k as f64) / ((n - 1) as f64)
            }
        })
    }
}

/// Sampled positivity check. Never a proof: see `note`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionVerdict {
    pub pass: bool,
    /// First failing sample: (point, offending function, value).
    pub violation: Option<(f64, &'static str, f64)>,
    pub samples: usize,
    pub note: &'static str,
}

pub const SAMPLED_NOTE: &str = "sampled, not proved";

fn scan(grid: &SampleGrid, checks: &[(&'static str, &Expr, bool)]) -> AssumptionVerdict {
    let tapes: Vec<_> = checks
        .iter()
        .map(|(n, e, pos)| (*n, exprlang::Tape::compile(e), *pos))
        .collect();
    let mut samples = 0;
    for t in grid.points() {
        samples += 1;
        for (name, tape, positive) in &tapes {
            let v = match tape.eval(t) {
                Ok(v) => v,
                Err(_) => {
                    return AssumptionVerdict {
                        pass: false,
                        violation: Some((t, name, f64::NAN)),
                        samples,
                        note: SAMPLED_NOTE,
                    }
                }
            };
            let not_real = v.im.abs() > 1e-12 * (1.0 + v.re.abs());
            if not_real || (*positive && !(v.re > 0.0)) || !v.re.is_finite() {
                return AssumptionVerdict {
                    pass: false,
                    violation: Some((t, name, v.re)),
                    samples,
                    note: SAMPLED_NOTE,
                };
            }
        }
    }
    AssumptionVerdict {
        pass: true,
        violation: None,
        samples,
        note: SAMPLED_NOTE,
    }
}

/// p > 0 and p, q, d real on the grid.
pub fn check_assumption_a(problem: &HalfLineProblem, grid: &SampleGrid) -> AssumptionVerdict {
    scan(
        grid,
        &[
            ("p", &problem.p, true),
            ("q", &problem.q, false),
            ("d", &problem.d, false),
        ],
    )
}

/// p̃ > 0, w > 0 and p̃, q̃, d̃, w₁, w₂ real on the grid (which must avoid x = 0).
pub fn check_assumption_a_unit(
    problem: &UnitIntervalProblem,
    grid: &SampleGrid,
) -> AssumptionVerdict {
    scan(
        grid,
        &[
            ("p", &problem.p, true),
            ("w", &problem.w, true),
            ("w1", &problem.w1, true),
            ("q", &problem.q, false),
            ("d", &problem.d, false),
        ],
    )
}
