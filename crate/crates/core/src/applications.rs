//! Polytropic stars: the Lane–Emden function and the stellar pulsation
//! operator on the inner piece (0, 1] of the radial domain.
//!
//! The coefficients are built from the model exactly as defined:
//!
//! p₁ = Γ₁p/ϱ, q₁ = ((4−3Γ₁)p)′/(rϱ) + (p₁(r²√ϱ)′)′/(r²√ϱ),
//! p₂ = cΓ₁p/(rϱ), q₂ = p₂(A − ½(r²ϱ)′/(r²ϱ)), p₃ = c²Γ₁p/(r²ϱ),
//!
//! with p = p_c θⁿ⁺¹, ϱ = ϱ_c θⁿ. The operator entries −∂p₂ + q₂ / ∂p₂ + q₂
//! match `b∂ + c` / `−∂b̄ + c̄` with b̃ = −p₂, c̃ = q₂ (w₁ = w₂ = 1). A purely
//! imaginary coupling (b̃ = i p₂, c̃ = −i q₂) gives the same π̃, ρ̃, κ̃ since
//! only |b̃|², |c̃|² and b̄c̃ enter.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::asymptotics::{self, LimitConfig};
use crate::coefficients::{ProblemError, UnitIntervalProblem};
use crate::exprlang::{differentiate, EvalError, Expr, Tabulated};
use crate::interval::Interval;
use crate::schur::WeightedSchurSymbols;
use crate::spectrum::{analyze_unit_direct, AnalysisOptions, Executor, SpectrumReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LaneEmdenError {
    #[error("polytropic index {0} outside (0, 5)")]
    InvalidIndex(f64),
    #[error("unit length must be positive, got {0}")]
    InvalidUnitLength(f64),
    #[error("tolerance must be in (0, 1e-3], got {0}")]
    InvalidTolerance(f64),
    #[error("no zero of theta found below r = {cap}")]
    NoZeroFound { cap: f64 },
    #[error("step size underflow at r = {at}")]
    StepUnderflow { at: f64 },
}

/// Lane–Emden function θ on [0, R]: a series near the centre, then quintic
/// Hermite interpolation between integration knots (values, first
/// derivatives, and second derivatives from the ODE itself).
#[derive(Debug, Clone, PartialEq)]
pub struct LaneEmdenSolution {
    pub n: f64,
    pub alpha: f64,
    pub tol: f64,
    /// First zero R.
    pub radius: f64,
    /// End of the series region.
    pub r_series: f64,
    /// Knots (r, θ, θ′), increasing in r, first at `r_series`, last at R.
    knots: Vec<(f64, f64, f64)>,
}

const CUT_FRAC: f64 = 1e-3;
/// Residual checkpoints stay this fraction of R away from the surface, where
/// θⁿ (n < 1) has unbounded derivatives.
const CHECK_MARGIN: f64 = 1e-2;

fn rhs(r: f64, th: f64, dth: f64, n: f64, a2: f64) -> f64 {
    // θⁿ only while θ > 0.
    let src = if th > 0.0 { libm::pow(th, n) } else { 0.0 };
    -2.0 * dth / r - src / a2
}

fn rk4(r: f64, y: (f64, f64), h: f64, n: f64, a2: f64) -> (f64, f64) {
    let f = |r: f64, y: (f64, f64)| (y.1, rhs(r, y.0, y.1, n, a2));
    let k1 = f(r, y);
    let k2 = f(r + 0.5 * h, (y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1));
    let k3 = f(r + 0.5 * h, (y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1));
    let k4 = f(r + h, (y.0 + h * k3.0, y.1 + h * k3.1));
    (
        y.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Integrate θ″ + (2/r)θ′ = −θⁿ/α², θ(0) = 1, θ′(0) = 0 up to the first zero.
///
/// Series start θ = 1 − ξ²/6 + nξ⁴/120 − n(8n−5)ξ⁶/15120 (ξ = r/α) up to
/// where the next term drops below `tol`, then RK4 with step-halving error
/// control (local error ≤ tol·h), graded toward the surface (h ≤ 0.05·min(1, n) × the
/// estimated distance −θ/θ′). Steps that would cross θ = 0 are rejected and
/// halved. R comes from a Newton step once the distance is below √tol, or
/// once halving has bracketed it to width `tol`.
pub fn solve_lane_emden(n: f64, alpha: f64, tol: f64) -> Result<LaneEmdenSolution, LaneEmdenError> {
    if !(n > 0.0 && n < 5.0) {
        return Err(LaneEmdenError::InvalidIndex(n));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(LaneEmdenError::InvalidUnitLength(alpha));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(LaneEmdenError::InvalidTolerance(tol));
    }
    let a2 = alpha * alpha;
    let c8 = (n * (122.0 * n * n - 183.0 * n + 70.0) / 3_265_920.0).abs();
    let xi0 = if c8 > 0.0 {
        libm::pow(tol / c8, 0.125).min(0.5)
    } else {
        0.5
    };
    let r0 = xi0 * alpha;
    let s = series(n, alpha, r0);
    let mut knots = vec![(r0, s[0], s[1])];
    let cap = 1e4 * alpha;
    let mut r = r0;
    let mut y = (s[0], s[1]);
    let mut h = 0.01 * alpha;
    let mut closing = false;
    let mut h_regular = h;
    // Low indices lose smoothness faster toward the surface.
    let grade = 0.05 * n.clamp(0.1, 1.0);
    loop {
        if r > cap {
            return Err(LaneEmdenError::NoZeroFound { cap });
        }
        if h < f64::EPSILON * r * 4.0 {
            return Err(LaneEmdenError::StepUnderflow { at: r });
        }
        let full = rk4(r, y, h, n, a2);
        let half = rk4(r, y, 0.5 * h, n, a2);
        let two = rk4(r + 0.5 * h, half, 0.5 * h, n, a2);
        if full.0 <= 0.0 || half.0 <= 0.0 || two.0 <= 0.0 {
            closing = true;
            h *= 0.5;
            if h < tol {
                return Ok(finish(n, alpha, tol, r0, r, y, h_regular, knots));
            }
            continue;
        }
        let err = (two.0 - full.0).abs().max((two.1 - full.1).abs()) / 15.0;
        let next = (
            two.0 + (two.0 - full.0) / 15.0,
            two.1 + (two.1 - full.1) / 15.0,
        );
        if err > tol * h {
            let f = 0.9 * libm::pow(tol * h / err, 0.25);
            h *= f.clamp(0.1, 0.5);
            // θⁿ with n < 1 is not smooth at the surface; close to it the
            // error estimate is meaningless and a Newton step is enough.
            if h < tol && -y.0 / y.1 < libm::sqrt(tol) {
                return Ok(finish(n, alpha, tol, r0, r, y, h_regular, knots));
            }
            continue;
        }
        if next.0 <= 0.0 {
            h *= 0.5;
            continue;
        }
        r += h;
        y = next;
        knots.push((r, y.0, y.1));
        // Distance to the surface; the mesh is graded toward it so the
        // interpolant resolves the loss of smoothness of θⁿ there.
        let dist = if y.1 < 0.0 { -y.0 / y.1 } else { f64::INFINITY };
        if dist < libm::sqrt(tol) {
            return Ok(finish(n, alpha, tol, r0, r, y, h_regular, knots));
        }
        if !closing {
            h_regular = h;
            let grow = if err > 0.0 {
                0.9 * libm::pow(tol * h / err, 0.25)
            } else {
                2.0
            };
            h *= grow.clamp(0.5, 2.0);
            h = h.min(0.02 * alpha).min(grade * dist);
        }
    }
}

/// R from one Newton step at r (θ(r) ≈ 0). Knots placed while closing in
/// are too close together for the interpolant; drop those within
/// `CUT_FRAC·h_regular` of R.
#[allow(clippy::too_many_arguments)]
fn finish(
    n: f64,
    alpha: f64,
    tol: f64,
    r0: f64,
    r: f64,
    y: (f64, f64),
    h_regular: f64,
    mut knots: Vec<(f64, f64, f64)>,
) -> LaneEmdenSolution {
    let radius = r - y.0 / y.1;
    let slope = y.1 + (radius - r) * rhs(r, y.0, y.1, n, alpha * alpha);
    let cut = radius - CUT_FRAC * h_regular;
    while knots.len() > 1 && knots.last().unwrap().0 > cut {
        knots.pop();
    }
    knots.push((radius, 0.0, slope));
    LaneEmdenSolution {
        n,
        alpha,
        tol,
        radius,
        r_series: r0,
        knots,
    }
}

/// θ and derivatives up to order 3 from the central series.
fn series(n: f64, alpha: f64, r: f64) -> [f64; 4] {
    let x = r / alpha;
    let c2 = -1.0 / 6.0;
    let c4 = n / 120.0;
    let c6 = -n * (8.0 * n - 5.0) / 15120.0;
    let c8 = n * (122.0 * n * n - 183.0 * n + 70.0) / 3_265_920.0;
    let x2 = x * x;
    let v = 1.0 + x2 * (c2 + x2 * (c4 + x2 * (c6 + x2 * c8)));
    let d1 = x * (2.0 * c2 + x2 * (4.0 * c4 + x2 * (6.0 * c6 + x2 * 8.0 * c8)));
    let d2 = 2.0 * c2 + x2 * (12.0 * c4 + x2 * (30.0 * c6 + x2 * 56.0 * c8));
    let d3 = x * (24.0 * c4 + x2 * (120.0 * c6 + x2 * 336.0 * c8));
    [
        v,
        d1 / alpha,
        d2 / (alpha * alpha),
        d3 / (alpha * alpha * alpha),
    ]
}

impl LaneEmdenSolution {
    pub fn knots(&self) -> &[(f64, f64, f64)] {
        &self.knots
    }

    fn second_from_ode(&self, r: f64, th: f64, dth: f64) -> f64 {
        rhs(r, th, dth, self.n, self.alpha * self.alpha)
    }

    /// Quintic Hermite polynomial of the segment containing r, in the
    /// local coordinate s = (r − r_k)/h: coefficients a₀..a₅ and h.
    fn segment(&self, r: f64) -> ([f64; 6], f64, f64) {
        let k = match self.knots.binary_search_by(|kn| kn.0.total_cmp(&r)) {
            Ok(i) => i.min(self.knots.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.knots.len() - 2),
        };
        let (r0, y0, d0) = self.knots[k];
        let (r1, y1, d1) = self.knots[k + 1];
        let h = r1 - r0;
        let s0 = self.second_from_ode(r0, y0, d0);
        let s1 = self.second_from_ode(r1, y1, d1);
        let a0 = y0;
        let a1 = h * d0;
        let a2 = 0.5 * h * h * s0;
        let yy = y1 - (a0 + a1 + a2);
        let dd = h * d1 - (a1 + 2.0 * a2);
        let ss = h * h * s1 - 2.0 * a2;
        let a3 = 10.0 * yy - 4.0 * dd + 0.5 * ss;
        let a4 = -15.0 * yy + 7.0 * dd - ss;
        let a5 = 6.0 * yy - 3.0 * dd + 0.5 * ss;
        ([a0, a1, a2, a3, a4, a5], r0, h)
    }

    /// k-th derivative (k ≤ 3) of the interpolant.
    fn interp(&self, k: usize, r: f64) -> f64 {
        let (a, r0, h) = self.segment(r);
        let s = (r - r0) / h;
        // d^k/ds^k of Σ a_j s^j.
        let mut acc = 0.0;
        for j in (k..6).rev() {
            let mut f = 1.0;
            for m in 0..k {
                f *= (j - m) as f64;
            }
            acc = acc * s + f * a[j];
        }
        acc / libm::pow(h, k as f64)
    }

    fn check_domain(&self, r: f64) -> Result<(), EvalError> {
        if r >= 0.0 && r <= self.radius {
            Ok(())
        } else {
            Err(EvalError::Domain {
                op: "theta",
                arg: Complex64::new(r, 0.0),
            })
        }
    }

    pub fn theta(&self, r: f64) -> Result<f64, EvalError> {
        self.derivative(0, r)
    }

    pub fn theta_prime(&self, r: f64) -> Result<f64, EvalError> {
        self.derivative(1, r)
    }

    /// θ, θ′ from the interpolant; θ″ and θ‴ from the ODE (and its
    /// derivative) evaluated on them.
    pub fn derivative(&self, order: u8, r: f64) -> Result<f64, EvalError> {
        self.check_domain(r)?;
        if r <= self.r_series {
            return match order {
                0..=3 => Ok(series(self.n, self.alpha, r)[order as usize]),
                _ => Err(EvalError::TableOrder {
                    name: String::from("theta"),
                    order,
                }),
            };
        }
        let th = self.interp(0, r);
        let d1 = self.interp(1, r);
        let a2 = self.alpha * self.alpha;
        match order {
            0 => Ok(th),
            1 => Ok(d1),
            2 => Ok(self.second_from_ode(r, th, d1)),
            3 => {
                let d2 = self.second_from_ode(r, th, d1);
                let src = if th > 0.0 {
                    self.n * libm::pow(th, self.n - 1.0) * d1
                } else {
                    0.0
                };
                Ok(2.0 * d1 / (r * r) - 2.0 * d2 / r - src / a2)
            }
            _ => Err(EvalError::TableOrder {
                name: String::from("theta"),
                order,
            }),
        }
    }

    /// Segment midpoints in (0, (1 − CHECK_MARGIN)·R]: interior checkpoints.
    fn checkpoints(&self) -> impl Iterator<Item = f64> + '_ {
        let hi = (1.0 - CHECK_MARGIN) * self.radius;
        self.knots
            .windows(2)
            .map(|w| 0.5 * (w[0].0 + w[1].0))
            .filter(move |r| *r <= hi)
    }

    /// Max over interior checkpoints of |θ″ + (2/r)θ′ + θⁿ/α²| with θ″ the
    /// interpolant's own second derivative.
    pub fn max_ode_residual(&self) -> f64 {
        let a2 = self.alpha * self.alpha;
        self.checkpoints()
            .map(|r| {
                let th = self.interp(0, r);
                let res = self.interp(2, r)
                    + 2.0 * self.interp(1, r) / r
                    + libm::pow(th.max(0.0), self.n) / a2;
                res.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Max over interior checkpoints of |(r²θ′)′ + r²θⁿ/α²| using the
    /// interpolant.
    pub fn max_flux_residual(&self) -> f64 {
        let a2 = self.alpha * self.alpha;
        self.checkpoints()
            .map(|r| {
                let th = self.interp(0, r);
                let flux = 2.0 * r * self.interp(1, r) + r * r * self.interp(2, r);
                (flux + r * r * libm::pow(th.max(0.0), self.n) / a2).abs()
            })
            .fold(0.0, f64::max)
    }

    /// (r, θ, θ′) on a uniform grid of `points` over [0, R].
    pub fn table(&self, points: usize) -> Vec<(f64, f64, f64)> {
        let m = points.max(2) - 1;
        (0..=m)
            .map(|k| {
                let r = self.radius * k as f64 / m as f64;
                (
                    r,
                    self.theta(r).unwrap_or(0.0),
                    self.theta_prime(r).unwrap_or(0.0),
                )
            })
            .collect()
    }
}

/// Expression-language view of a solution.
#[derive(Clone)]
pub struct ThetaTable(pub Arc<LaneEmdenSolution>);

impl fmt::Debug for ThetaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "theta[n={}]", self.0.n)
    }
}

impl Tabulated for ThetaTable {
    fn name(&self) -> &str {
        "theta"
    }

    fn max_order(&self) -> u8 {
        3
    }

    fn eval(&self, order: u8, x: f64) -> Result<f64, EvalError> {
        self.0.derivative(order, x)
    }
}

// ---------------------------------------------------------------------------
// Stellar model

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StellarError {
    #[error(transparent)]
    LaneEmden(#[from] LaneEmdenError),
    #[error("model invariant violated: {0}")]
    ModelInvariantViolated(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Polytropic equilibrium model. `gamma1` and `buoyancy` are expressions in
/// the radial variable (whatever its name; it is substituted).
#[derive(Debug, Clone)]
pub struct StellarModel {
    pub n: f64,
    pub gamma1: Expr,
    pub c: f64,
    pub p_c: f64,
    pub rho_c: f64,
    pub buoyancy: Expr,
    pub alpha: f64,
    pub tol: f64,
}

impl StellarModel {
    /// Γ₁ ≡ 5/3, c = √3, p_c = ϱ_c = 1, A ≡ 0, α = 1.
    pub fn polytrope(n: f64) -> StellarModel {
        StellarModel {
            n,
            gamma1: Expr::constant(5.0 / 3.0),
            c: libm::sqrt(3.0),
            p_c: 1.0,
            rho_c: 1.0,
            buoyancy: Expr::constant(0.0),
            alpha: 1.0,
            tol: 1e-12,
        }
    }
}

/// The stellar operator on (0, 1] together with its ingredients.
#[derive(Debug, Clone)]
pub struct StellarProblem {
    pub solution: Arc<LaneEmdenSolution>,
    pub problem: UnitIntervalProblem,
    pub p1: Expr,
    pub q1: Expr,
    pub p2: Expr,
    pub q2: Expr,
    pub p3: Expr,
    pub gamma1: Expr,
    /// Γ₁(0).
    pub gamma1_center: f64,
}

fn eval_re(e: &Expr, x: f64) -> Result<f64, String> {
    e.eval(x).map(|z| z.re).map_err(|err| format!("{err}"))
}

fn diff(e: &Expr) -> Result<Expr, StellarError> {
    differentiate(e, 1).map_err(|source| {
        StellarError::Problem(ProblemError::Diff {
            slot: "stellar",
            source,
        })
    })
}

/// Solve Lane–Emden and assemble the coefficients on (0, 1].
pub fn build_stellar_problem(model: &StellarModel) -> Result<StellarProblem, StellarError> {
    let bad = |m: String| Err(StellarError::ModelInvariantViolated(m));
    if !(model.c >= libm::sqrt(3.0) * (1.0 - 1e-12)) {
        return bad(format!("c = {} < sqrt(3)", model.c));
    }
    if !(model.p_c > 0.0 && model.rho_c > 0.0) {
        return bad(format!(
            "central pressure/density must be positive ({}, {})",
            model.p_c, model.rho_c
        ));
    }
    let sol = Arc::new(solve_lane_emden(model.n, model.alpha, model.tol)?);
    if sol.radius <= 1.0 {
        return bad(format!(
            "stellar radius {} <= 1: the split point r = 1 is not interior",
            sol.radius
        ));
    }
    let x = Expr::var("x");
    let gamma = model.gamma1.substitute(&x);
    let buoy = model.buoyancy.substitute(&x);
    let dgamma = diff(&gamma)?;
    for k in 0..=1000 {
        let r = sol.radius * k as f64 / 1000.0;
        match eval_re(&gamma, r) {
            Ok(g) if g > 0.0 && g.is_finite() => {}
            Ok(g) => return bad(format!("Gamma1({r}) = {g} is not positive")),
            Err(e) => return bad(format!("Gamma1({r}): {e}")),
        }
    }
    for r in [0.0, sol.radius] {
        let g = eval_re(&dgamma, r).map_err(StellarError::ModelInvariantViolated)?;
        if g.abs() > 1e-8 {
            return bad(format!(
                "Gamma1'({r}) = {g}; Gamma1 must be constant near 0 and R"
            ));
        }
    }
    let gamma1_center = eval_re(&gamma, 0.0).map_err(StellarError::ModelInvariantViolated)?;

    let theta = Expr::table(Arc::new(ThetaTable(sol.clone())), x.clone());
    let n = Expr::constant(model.n);
    let one = Expr::constant(1.0);
    let p = Expr::mul(
        &Expr::constant(model.p_c),
        &Expr::pow(&theta, &Expr::add(&n, &one)),
    );
    let rho = Expr::mul(&Expr::constant(model.rho_c), &Expr::pow(&theta, &n));
    let x2 = Expr::powi(&x, 2);
    let gp = Expr::mul(&gamma, &p);
    let p1 = Expr::div(&gp, &rho);
    let four_m = Expr::sub(&Expr::constant(4.0), &gamma.scale(3.0));
    let q1a = Expr::div(&diff(&Expr::mul(&four_m, &p))?, &Expr::mul(&x, &rho));
    let root = Expr::mul(&x2, &rho.sqrt());
    let q1b = Expr::div(&diff(&Expr::mul(&p1, &diff(&root)?))?, &root);
    let q1 = Expr::add(&q1a, &q1b);
    let p2 = Expr::div(&gp.scale(model.c), &Expr::mul(&x, &rho));
    let x2rho = Expr::mul(&x2, &rho);
    let log_der = Expr::div(&diff(&x2rho)?, &x2rho);
    let q2 = Expr::mul(&p2, &Expr::sub(&buoy, &log_der.scale(0.5)));
    let p3 = Expr::div(&gp.scale(model.c * model.c), &x2rho);

    let problem = UnitIntervalProblem::new(
        p1.clone(),
        q1.clone(),
        Expr::neg(&p2),
        q2.clone(),
        p3.clone(),
        one.clone(),
        one,
    )?;
    for r in [1e-3, 0.5, 1.0] {
        let v = eval_re(&p1, r).map_err(StellarError::ModelInvariantViolated)?;
        if !(v > 0.0) {
            return bad(format!("p1({r}) = {v} is not positive"));
        }
    }
    Ok(StellarProblem {
        solution: sol,
        problem,
        p1,
        q1,
        p2,
        q2,
        p3,
        gamma1: gamma,
        gamma1_center,
    })
}

/// Boundary limits at one λ next to the closed-form values claimed for
/// polytropes: ρ̃₀ = 2i, κ̃₀ = c²(1 − i(n+1)/Γ₁(0)), Dis = −1 − 4c².
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProbe {
    pub lambda: f64,
    pub rho0: Option<Complex64>,
    pub kappa0: Option<Complex64>,
    pub dis: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct StellarReport {
    pub spectrum: SpectrumReport,
    pub radius: f64,
    pub alpha: f64,
    pub n: f64,
    pub probes: Vec<BoundaryProbe>,
    pub predicted_rho0: Complex64,
    pub predicted_kappa0: Complex64,
    pub predicted_dis: f64,
    /// max |Δ̃| over a 1000-point grid in (0, 1].
    pub delta_max: f64,
}

impl StellarReport {
    /// Largest |Dis(λ) − (−1 − 4c²)| over the probes (∞ if any failed).
    pub fn dis_deviation(&self) -> f64 {
        self.probes
            .iter()
            .map(|p| {
                p.dis
                    .map_or(f64::INFINITY, |d| (d - self.predicted_dis).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn rho0_deviation(&self) -> f64 {
        self.probes
            .iter()
            .map(|p| {
                p.rho0
                    .map_or(f64::INFINITY, |r| (r - self.predicted_rho0).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// ±{0.25, 0.5, …, 128}: twenty shifts away from the regular part {0}.
pub fn stellar_probe_lambdas() -> Vec<f64> {
    let mut out: Vec<f64> = (0..10)
        .map(|k| -0.25 * libm::pow(2.0, (9 - k) as f64))
        .collect();
    out.extend((0..10).map(|k| 0.25 * libm::pow(2.0, k as f64)));
    out
}

pub const STELLAR_WINDOW: Interval = Interval {
    lo: -20.0,
    hi: 20.0,
};

/// Essential spectrum of the inner piece (0, 1]. The outer piece (1, R),
/// singular at the surface, is not covered.
pub fn stellar_essential_spectrum(
    model: &StellarModel,
    opts: &AnalysisOptions,
    exec: &impl Executor,
) -> Result<StellarReport, StellarError> {
    let built = build_stellar_problem(model)?;
    let mut opts = opts.clone();
    if opts.window.is_none() {
        opts.window = Some(STELLAR_WINDOW);
    }
    let mut spectrum = analyze_unit_direct(&built.problem, &opts, exec);
    spectrum.notes.push(String::from(
        "covers the inner piece (0,1] only; the surface singularity at r = R is not treated",
    ));
    let sym = WeightedSchurSymbols::new(&built.problem);
    let probes = boundary_probes(&sym, &stellar_probe_lambdas(), &opts.limits, exec);
    let c2 = model.c * model.c;
    let delta_max = (1..=1000)
        .map(|k| {
            sym.delta_t(k as f64 / 1000.0)
                .map_or(f64::INFINITY, f64::abs)
        })
        .fold(0.0, f64::max);
    Ok(StellarReport {
        spectrum,
        radius: built.solution.radius,
        alpha: model.alpha,
        n: model.n,
        probes,
        predicted_rho0: Complex64::new(0.0, 2.0),
        predicted_kappa0: Complex64::new(c2, -c2 * (model.n + 1.0) / built.gamma1_center),
        predicted_dis: -1.0 - 4.0 * c2,
        delta_max,
    })
}

pub fn boundary_probes(
    sym: &WeightedSchurSymbols,
    lambdas: &[f64],
    cfg: &LimitConfig,
    exec: &impl Executor,
) -> Vec<BoundaryProbe> {
    exec.map(lambdas.len(), |k| {
        let lambda = lambdas[k];
        match asymptotics::boundary_pair(sym, lambda, cfg) {
            Ok((r, kap)) => {
                let s = r - Complex64::new(0.0, 1.0);
                BoundaryProbe {
                    lambda,
                    rho0: Some(r),
                    kappa0: Some(kap),
                    dis: Some((s * s).re - 4.0 * kap.re),
                    error: None,
                }
            }
            Err(e) => BoundaryProbe {
                lambda,
                rho0: None,
                kappa0: None,
                dis: None,
                error: Some(format!("{e}")),
            },
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Sequential;
    use core::f64::consts::PI;

    #[test]
    fn n1_matches_sinc() {
        let s = solve_lane_emden(1.0, 1.0, 1e-10).unwrap();
        assert!((s.radius - PI).abs() < 1e-8, "{}", s.radius);
        for k in 1..60 {
            let r = PI * k as f64 / 60.0;
            let exact = libm::sin(r) / r;
            let dexact = (r * libm::cos(r) - libm::sin(r)) / (r * r);
            assert!((s.theta(r).unwrap() - exact).abs() < 1e-9, "r {r}");
            assert!((s.theta_prime(r).unwrap() - dexact).abs() < 1e-8, "r {r}");
        }
    }

    #[test]
    fn unit_length_scales_radius() {
        let s = solve_lane_emden(1.0, 0.5, 1e-10).unwrap();
        assert!((s.radius - 0.5 * PI).abs() < 1e-8);
    }

    #[test]
    fn small_index_limit() {
        let s = solve_lane_emden(1e-9, 1.0, 1e-10).unwrap();
        assert!((s.radius - libm::sqrt(6.0)).abs() < 1e-5, "{}", s.radius);
    }

    #[test]
    fn n3_against_tighter_run() {
        let coarse = solve_lane_emden(3.0, 1.0, 1e-9).unwrap();
        let fine = solve_lane_emden(3.0, 1.0, 1e-11).unwrap();
        assert!((coarse.radius - fine.radius).abs() < 1e-6);
        assert!((coarse.radius - 6.8968).abs() < 1e-3, "{}", coarse.radius);
    }

    #[test]
    fn residuals_and_centre() {
        for n in [0.2, 0.5, 1.0, 1.5, 3.0, 4.5] {
            let s = solve_lane_emden(n, 1.0, 1e-10).unwrap();
            assert!(
                s.max_ode_residual() <= 1e-8,
                "n {n}: {}",
                s.max_ode_residual()
            );
            assert!(
                s.max_flux_residual() <= 1e-8,
                "n {n}: {}",
                s.max_flux_residual()
            );
            assert!((s.theta(0.0).unwrap() - 1.0).abs() < 1e-15);
            for r in [1e-3, 1e-5] {
                let d = s.theta_prime(r).unwrap();
                assert!((r * r * d).abs() < 1e-6 && (r * d).abs() < 1e-3);
            }
            assert!(s.knots().iter().rev().skip(1).all(|k| k.1 > 0.0));
            assert_eq!(s.theta(s.radius).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_index() {
        assert_eq!(
            solve_lane_emden(5.0, 1.0, 1e-10),
            Err(LaneEmdenError::InvalidIndex(5.0))
        );
        assert!(matches!(
            solve_lane_emden(1.0, 0.0, 1e-10),
            Err(LaneEmdenError::InvalidUnitLength(_))
        ));
    }

    #[test]
    fn coefficient_identities() {
        let b = build_stellar_problem(&StellarModel::polytrope(1.0)).unwrap();
        let sym = WeightedSchurSymbols::new(&b.problem);
        for r in [0.1, 0.5, 0.9] {
            assert!(sym.delta_t(r).unwrap().abs() < 1e-10);
        }
        // π̃(r, λ) = λΓ₁p r²/(λr²ϱ − c²Γ₁p), coded by hand with θ = sin r / r.
        let r = 0.5;
        let th = libm::sin(r) / r;
        let (g, c2) = (5.0 / 3.0, 3.0);
        let (p, rho) = (th * th, th);
        let lam = 1.0;
        let display = lam * g * p * r * r / (lam * r * r * rho - c2 * g * p);
        let got = sym.pi_t(r, lam).unwrap();
        assert!(
            (got - display).abs() <= 1e-9 * display.abs(),
            "{got} vs {display}"
        );
    }

    #[test]
    fn invariants_checked() {
        let mut m = StellarModel::polytrope(1.0);
        m.c = 1.0;
        assert!(matches!(
            build_stellar_problem(&m),
            Err(StellarError::ModelInvariantViolated(_))
        ));
        let mut m = StellarModel::polytrope(1.0);
        m.gamma1 = Expr::add(&Expr::constant(1.5), &Expr::var("r").scale(0.1));
        assert!(matches!(
            build_stellar_problem(&m),
            Err(StellarError::ModelInvariantViolated(_))
        ));
    }

    #[test]
    fn probes_run() {
        let b = build_stellar_problem(&StellarModel::polytrope(1.0)).unwrap();
        let sym = WeightedSchurSymbols::new(&b.problem);
        let probes = boundary_probes(&sym, &[-4.0, 2.0], &LimitConfig::default(), &Sequential);
        for p in &probes {
            let r = p.rho0.expect("rho0");
            assert!((r - Complex64::new(0.0, 2.0)).norm() < 1e-4, "{p:?}");
        }
    }
}
