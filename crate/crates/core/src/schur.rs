//! Schur-complement symbols π, ρ, κ and the function Δ.
//!
//! Every evaluation also returns a first-order rounding-error estimate so that
//! limit estimation can discard samples drowned by cancellation.

use num_complex::Complex64;

use crate::coefficients::{HalfLineProblem, TailHint, UnitIntervalProblem};
use crate::exprlang::{EvalError, Expr, Tape};

const EPS: f64 = f64::EPSILON;

/// Relative distance |d − λ| < tol_switch·(1+|λ|) below which π is evaluated
/// through p(Δ−λ)/(d−λ).
pub const TOL_SWITCH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolError {
    #[error("d(t) = λ at t = {at} (λ = {lambda})")]
    PoleAtLambda { at: f64, lambda: f64 },
    #[error("p = {p} ≤ 0 at {at}")]
    NonpositiveP { at: f64, p: f64 },
    #[error("evaluation at {at}: {source}")]
    Eval { at: f64, source: EvalError },
}

/// Coefficient values (and first derivatives) at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coeffs {
    pub p: f64,
    pub dp: f64,
    pub q: f64,
    pub b: Complex64,
    pub db: Complex64,
    pub c: Complex64,
    pub dc: Complex64,
    pub d: f64,
    pub dd: f64,
}

/// π, ∂π, ρ, κ at one (point, λ), with rounding-error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolValues {
    pub pi: f64,
    pub dpi: f64,
    pub rho: Complex64,
    pub kappa: Complex64,
    pub pi_err: f64,
    pub dpi_err: f64,
    pub rho_err: f64,
    pub kappa_err: f64,
    /// π was evaluated in the p(Δ−λ)/(d−λ) form.
    pub pole_form: bool,
}

impl SymbolValues {
    /// ρ/π and its absolute error estimate.
    pub fn rho_over_pi(&self) -> (Complex64, f64) {
        quotient(self.rho, self.rho_err, self.pi, self.pi_err)
    }

    pub fn kappa_over_pi(&self) -> (Complex64, f64) {
        quotient(self.kappa, self.kappa_err, self.pi, self.pi_err)
    }

    pub fn dpi_over_pi(&self) -> (Complex64, f64) {
        quotient(
            Complex64::new(self.dpi, 0.0),
            self.dpi_err,
            self.pi,
            self.pi_err,
        )
    }
}

fn quotient(num: Complex64, num_err: f64, den: f64, den_err: f64) -> (Complex64, f64) {
    let v = num / den;
    let err = v.norm() * den_err / den.abs() + num_err / den.abs();
    (v, if err.is_nan() { f64::INFINITY } else { err })
}

fn cval(v: Complex64) -> f64 {
    v.re
}

fn eval_err(at: f64) -> impl Fn(EvalError) -> SymbolError {
    move |source| SymbolError::Eval { at, source }
}

/// Core formulas shared by the plain and weighted symbols.
///
/// `pw` is the weighted leading coefficient (w₂/w₁)p (= p when unweighted) and
/// `dpw` its derivative; `extra_rho` multiplies π in the imaginary part of ρ
/// (w′/w), `extra_kappa` is the weight contribution to κ.
#[allow(clippy::too_many_arguments)]
fn symbols_at(
    at: f64,
    lambda: f64,
    pw: f64,
    dpw: f64,
    co: &Coeffs,
    log_dw: f64,
    extra_kappa: Complex64,
    extra_kappa_err: f64,
) -> Result<SymbolValues, SymbolError> {
    let dl = co.d - lambda;
    if dl == 0.0 {
        return Err(SymbolError::PoleAtLambda { at, lambda });
    }
    let b2 = co.b.norm_sqr();
    let pole_form = dl.abs() < TOL_SWITCH * (1.0 + lambda.abs()) && pw > 0.0;
    let pi = if pole_form {
        pw * ((co.d - b2 / pw) - lambda) / dl
    } else {
        pw - b2 / dl
    };
    let pi_err = 4.0 * EPS * (pw.abs() + b2 / dl.abs());

    let re_bdb = (co.b.conj() * co.db).re;
    let dpi = dpw - 2.0 * re_bdb / dl + b2 * co.dd / (dl * dl);
    let dpi_err = 4.0
        * EPS
        * (dpw.abs() + 2.0 * co.b.norm() * co.db.norm() / dl.abs() + b2 * co.dd.abs() / (dl * dl));

    let im_part = dpi + log_dw * pi;
    let rho = Complex64::new(-2.0 * (co.b * co.c.conj()).im / dl, im_part);
    let rho_err = 8.0 * EPS * co.b.norm() * co.c.norm() / dl.abs()
        + dpi_err
        + log_dw.abs() * (pi_err + EPS * pi.abs());

    let bc = co.b.conj() * co.c;
    let g = bc / dl;
    let dg = (co.db.conj() * co.c + co.b.conj() * co.dc) / dl - bc * co.dd / (dl * dl);
    let kappa =
        Complex64::new(co.q - lambda, 0.0) - co.c.norm_sqr() / dl + log_dw * g + dg + extra_kappa;
    let kappa_err = 4.0
        * EPS
        * (co.q.abs()
            + lambda.abs()
            + co.c.norm_sqr() / dl.abs()
            + log_dw.abs() * g.norm()
            + (co.db.norm() * co.c.norm() + co.b.norm() * co.dc.norm()) / dl.abs()
            + bc.norm() * co.dd.abs() / (dl * dl))
        + extra_kappa_err;

    Ok(SymbolValues {
        pi,
        dpi,
        rho,
        kappa,
        pi_err,
        dpi_err,
        rho_err,
        kappa_err,
        pole_form,
    })
}

/// Symbols of a half-line problem.
#[derive(Debug, Clone)]
pub struct SchurSymbols {
    tape: Tape,
    pub domain_floor: f64,
    pub tail: TailHint,
}

impl SchurSymbols {
    pub fn new(problem: &HalfLineProblem) -> Self {
        let pr = problem;
        let exprs: [Expr; 9] = [
            pr.p.clone(),
            pr.dp.clone(),
            pr.q.clone(),
            pr.b.clone(),
            pr.db.clone(),
            pr.c.clone(),
            pr.dc.clone(),
            pr.d.clone(),
            pr.dd.clone(),
        ];
        SchurSymbols {
            tape: Tape::compile_many(&exprs),
            domain_floor: pr.domain_floor,
            tail: pr.tail,
        }
    }

    pub fn coeffs(&self, t: f64) -> Result<Coeffs, SymbolError> {
        let mut v = [Complex64::new(0.0, 0.0); 9];
        self.tape.eval_into(t, &mut v).map_err(eval_err(t))?;
        Ok(Coeffs {
            p: cval(v[0]),
            dp: cval(v[1]),
            q: cval(v[2]),
            b: v[3],
            db: v[4],
            c: v[5],
            dc: v[6],
            d: cval(v[7]),
            dd: cval(v[8]),
        })
    }

    pub fn values(&self, t: f64, lambda: f64) -> Result<SymbolValues, SymbolError> {
        let co = self.coeffs(t)?;
        symbols_at(
            t,
            lambda,
            co.p,
            co.dp,
            &co,
            0.0,
            Complex64::new(0.0, 0.0),
            0.0,
        )
    }

    pub fn eval_pi(&self, t: f64, lambda: f64) -> Result<f64, SymbolError> {
        Ok(self.values(t, lambda)?.pi)
    }

    pub fn eval_rho(&self, t: f64, lambda: f64) -> Result<Complex64, SymbolError> {
        Ok(self.values(t, lambda)?.rho)
    }

    pub fn eval_kappa(&self, t: f64, lambda: f64) -> Result<Complex64, SymbolError> {
        Ok(self.values(t, lambda)?.kappa)
    }

    pub fn eval_delta(&self, t: f64) -> Result<f64, SymbolError> {
        Ok(self.delta_with_error(t)?.0)
    }

    /// Δ(t) = d − |b|²/p and a rounding-error estimate of that subtraction.
    pub fn delta_with_error(&self, t: f64) -> Result<(f64, f64), SymbolError> {
        let co = self.coeffs(t)?;
        delta_of(t, co.p, co.d, co.b)
    }
}

fn delta_of(at: f64, p: f64, d: f64, b: Complex64) -> Result<(f64, f64), SymbolError> {
    if !(p > 0.0) {
        return Err(SymbolError::NonpositiveP { at, p });
    }
    let s = b.norm_sqr() / p;
    Ok((d - s, 4.0 * EPS * (d.abs() + s)))
}

/// Weighted coefficient values at one x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedCoeffs {
    pub base: Coeffs,
    pub w1: f64,
    pub dw1: f64,
    pub w2: f64,
    pub dw2: f64,
    pub d2w2: f64,
    pub w: f64,
    pub dw: f64,
    pub d2w: f64,
}

/// Tilde symbols of a weighted unit-interval problem (variable x ∈ (0,1]).
#[derive(Debug, Clone)]
pub struct WeightedSchurSymbols {
    tape: Tape,
}

impl WeightedSchurSymbols {
    pub fn new(u: &UnitIntervalProblem) -> Self {
        let exprs: [Expr; 17] = [
            u.p.clone(),
            u.dp.clone(),
            u.q.clone(),
            u.b.clone(),
            u.db.clone(),
            u.c.clone(),
            u.dc.clone(),
            u.d.clone(),
            u.dd.clone(),
            u.w1.clone(),
            u.dw1.clone(),
            u.w2.clone(),
            u.dw2.clone(),
            u.d2w2.clone(),
            u.w.clone(),
            u.dw.clone(),
            u.d2w.clone(),
        ];
        WeightedSchurSymbols {
            tape: Tape::compile_many(&exprs),
        }
    }

    pub fn coeffs(&self, x: f64) -> Result<WeightedCoeffs, SymbolError> {
        let mut v = [Complex64::new(0.0, 0.0); 17];
        self.tape.eval_into(x, &mut v).map_err(eval_err(x))?;
        Ok(WeightedCoeffs {
            base: Coeffs {
                p: cval(v[0]),
                dp: cval(v[1]),
                q: cval(v[2]),
                b: v[3],
                db: v[4],
                c: v[5],
                dc: v[6],
                d: cval(v[7]),
                dd: cval(v[8]),
            },
            w1: cval(v[9]),
            dw1: cval(v[10]),
            w2: cval(v[11]),
            dw2: cval(v[12]),
            d2w2: cval(v[13]),
            w: cval(v[14]),
            dw: cval(v[15]),
            d2w: cval(v[16]),
        })
    }

    /// π̃, ρ̃, κ̃ at (x, λ).
    pub fn values(&self, x: f64, lambda: f64) -> Result<SymbolValues, SymbolError> {
        let wc = self.coeffs(x)?;
        let co = &wc.base;
        let r = wc.w2 / wc.w1;
        let dr = (wc.dw2 * wc.w1 - wc.w2 * wc.dw1) / (wc.w1 * wc.w1);
        let pw = r * co.p;
        let dpw = dr * co.p + r * co.dp;
        let log_dw = wc.dw / wc.w;
        let pw2 = co.dp * wc.dw2 + co.p * wc.d2w2;
        let extra = Complex64::new(-pw2 / wc.w1, 0.0);
        let extra_err =
            4.0 * EPS * (co.dp * wc.dw2).abs().max((co.p * wc.d2w2).abs()) / wc.w1.abs();
        symbols_at(x, lambda, pw, dpw, co, log_dw, extra, extra_err)
    }

    pub fn pi_t(&self, x: f64, lambda: f64) -> Result<f64, SymbolError> {
        Ok(self.values(x, lambda)?.pi)
    }

    pub fn rho_t(&self, x: f64, lambda: f64) -> Result<Complex64, SymbolError> {
        Ok(self.values(x, lambda)?.rho)
    }

    pub fn kappa_t(&self, x: f64, lambda: f64) -> Result<Complex64, SymbolError> {
        Ok(self.values(x, lambda)?.kappa)
    }

    /// Δ̃(x) = d̃ − (w₁/w₂)|b̃|²/p̃ with a rounding-error estimate.
    pub fn delta_with_error(&self, x: f64) -> Result<(f64, f64), SymbolError> {
        let wc = self.coeffs(x)?;
        delta_of(x, wc.w2 / wc.w1 * wc.base.p, wc.base.d, wc.base.b)
    }

    pub fn delta_t(&self, x: f64) -> Result<f64, SymbolError> {
        Ok(self.delta_with_error(x)?.0)
    }

    /// (xρ̃/π̃, x²κ̃/π̃) with absolute error estimates.
    pub fn scaled(&self, x: f64, lambda: f64) -> Result<ScaledSymbols, SymbolError> {
        let v = self.values(x, lambda)?;
        let (r, re) = v.rho_over_pi();
        let (k, ke) = v.kappa_over_pi();
        Ok(ScaledSymbols {
            rho: r * x,
            rho_err: re * x,
            kappa: k * (x * x),
            kappa_err: ke * x * x,
        })
    }

    /// W(t) = 1 + e^{-t} w′(e^{-t})/w(e^{-t}).
    pub fn big_w(&self, t: f64) -> Result<f64, SymbolError> {
        let x = libm::exp(-t);
        let wc = self.coeffs(x)?;
        Ok(1.0 + x * wc.dw / wc.w)
    }

    /// dW/dt.
    pub fn big_w_prime(&self, t: f64) -> Result<f64, SymbolError> {
        let x = libm::exp(-t);
        let wc = self.coeffs(x)?;
        let l = wc.dw / wc.w;
        Ok(-x * (l + x * (wc.d2w / wc.w - l * l)))
    }

    /// ψ(t) = sqrt(e^{-t} w(e^{-t})).
    pub fn psi(&self, t: f64) -> Result<f64, SymbolError> {
        let x = libm::exp(-t);
        let wc = self.coeffs(x)?;
        Ok(libm::sqrt(x * wc.w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSymbols {
    pub rho: Complex64,
    pub rho_err: f64,
    pub kappa: Complex64,
    pub kappa_err: f64,
}
