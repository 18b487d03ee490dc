use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_complex::{Complex64, ComplexFloat};

use super::{BinaryOp, EvalError, Expr, Node, Tabulated, UnaryOp};

#[derive(Debug, Clone)]
enum Instr {
    Const(Complex64),
    Var,
    Param(String),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
    Pow(usize, usize),
    Table(Arc<dyn Tabulated>, u8, usize),
}

/// A linearized expression DAG: each shared node is evaluated once.
///
/// A tape may hold several outputs that share subexpressions.
#[derive(Debug, Clone)]
pub struct Tape {
    code: Vec<Instr>,
    outputs: Vec<usize>,
}

impl Tape {
    pub fn compile(expr: &Expr) -> Tape {
        Tape::compile_many(core::slice::from_ref(expr))
    }

    pub fn compile_many(exprs: &[Expr]) -> Tape {
        let mut code = Vec::new();
        let mut memo = BTreeMap::new();
        let outputs = exprs
            .iter()
            .map(|e| emit(e, &mut code, &mut memo))
            .collect();
        Tape { code, outputs }
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Value of the first output.
    pub fn eval(&self, point: f64) -> Result<Complex64, EvalError> {
        let mut out = [Complex64::new(0.0, 0.0)];
        let mut regs = Vec::with_capacity(self.code.len());
        self.run(point, &mut regs)?;
        out[0] = regs[self.outputs[0]];
        Ok(out[0])
    }

    /// Evaluate all outputs into `out` (length ≥ `n_outputs`).
    pub fn eval_into(&self, point: f64, out: &mut [Complex64]) -> Result<(), EvalError> {
        let mut regs = Vec::with_capacity(self.code.len());
        self.run(point, &mut regs)?;
        for (slot, &r) in out.iter_mut().zip(&self.outputs) {
            *slot = regs[r];
        }
        Ok(())
    }

    fn run(&self, x: f64, regs: &mut Vec<Complex64>) -> Result<(), EvalError> {
        regs.clear();
        for ins in &self.code {
            let v = match ins {
                Instr::Const(c) => *c,
                Instr::Var => Complex64::new(x, 0.0),
                Instr::Param(name) => return Err(EvalError::UnboundParameter(name.clone())),
                Instr::Unary(op, a) => unary(*op, regs[*a])?,
                Instr::Binary(op, a, b) => binary(*op, regs[*a], regs[*b])?,
                Instr::Pow(a, b) => pow(regs[*a], regs[*b])?,
                Instr::Table(t, order, a) => {
                    let arg = regs[*a];
                    if arg.im != 0.0 {
                        return Err(EvalError::Domain { op: "table", arg });
                    }
                    Complex64::new(t.eval(*order, arg.re)?, 0.0)
                }
            };
            regs.push(v);
        }
        Ok(())
    }
}

fn emit(e: &Expr, code: &mut Vec<Instr>, memo: &mut BTreeMap<usize, usize>) -> usize {
    if let Some(&r) = memo.get(&e.key()) {
        return r;
    }
    let ins = match e.node() {
        Node::Const(v) => Instr::Const(Complex64::new(*v, 0.0)),
        Node::Named(c) => Instr::Const(c.value()),
        Node::Var(_) => Instr::Var,
        Node::Param(n) => Instr::Param(n.clone()),
        Node::Unary(op, a) => Instr::Unary(*op, emit(a, code, memo)),
        Node::Binary(op, a, b) => {
            let ra = emit(a, code, memo);
            let rb = emit(b, code, memo);
            Instr::Binary(*op, ra, rb)
        }
        Node::Pow(a, b) => {
            let ra = emit(a, code, memo);
            let rb = emit(b, code, memo);
            Instr::Pow(ra, rb)
        }
        Node::Table { table, order, arg } => {
            Instr::Table(table.clone(), *order, emit(arg, code, memo))
        }
    };
    code.push(ins);
    let r = code.len() - 1;
    memo.insert(e.key(), r);
    r
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn domain(op: &'static str, arg: Complex64) -> EvalError {
    EvalError::Domain { op, arg }
}

// Real inputs take real code paths so that real results are exact
// (zero imaginary part, same rounding as plain f64 arithmetic).

fn unary(op: UnaryOp, a: Complex64) -> Result<Complex64, EvalError> {
    let is_real = a.im == 0.0;
    Ok(match op {
        UnaryOp::Neg => -a,
        UnaryOp::Conj => a.conj(),
        UnaryOp::Abs => real(if is_real { libm::fabs(a.re) } else { a.norm() }),
        UnaryOp::Exp if is_real => real(libm::exp(a.re)),
        UnaryOp::Exp => a.exp(),
        UnaryOp::Sin if is_real => real(libm::sin(a.re)),
        UnaryOp::Sin => a.sin(),
        UnaryOp::Cos if is_real => real(libm::cos(a.re)),
        UnaryOp::Cos => a.cos(),
        UnaryOp::Log if is_real => {
            if a.re > 0.0 {
                real(libm::log(a.re))
            } else {
                return Err(domain("log", a));
            }
        }
        UnaryOp::Log => a.ln(),
        UnaryOp::Sqrt if is_real => {
            if a.re >= 0.0 {
                real(libm::sqrt(a.re))
            } else {
                return Err(domain("sqrt", a));
            }
        }
        UnaryOp::Sqrt => a.sqrt(),
    })
}

fn binary(op: BinaryOp, a: Complex64, b: Complex64) -> Result<Complex64, EvalError> {
    let both_real = a.im == 0.0 && b.im == 0.0;
    Ok(match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul if both_real => real(a.re * b.re),
        BinaryOp::Mul => a * b,
        BinaryOp::Div => {
            if b.re == 0.0 && b.im == 0.0 {
                return Err(domain("division", a));
            }
            if both_real {
                real(a.re / b.re)
            } else if b.im == 0.0 {
                Complex64::new(a.re / b.re, a.im / b.re)
            } else {
                a / b
            }
        }
    })
}

fn pow(a: Complex64, k: Complex64) -> Result<Complex64, EvalError> {
    if k.im != 0.0 {
        return Err(domain("pow exponent", k));
    }
    let k = k.re;
    let integer = k == libm::trunc(k);
    if a.re == 0.0 && a.im == 0.0 {
        return if k > 0.0 {
            Ok(real(0.0))
        } else if k == 0.0 {
            Ok(real(1.0))
        } else {
            Err(domain("0^negative", a))
        };
    }
    if a.im == 0.0 {
        if a.re > 0.0 || integer {
            return Ok(real(libm::pow(a.re, k)));
        }
        return Err(domain("pow of negative base", a));
    }
    if integer && libm::fabs(k) <= i32::MAX as f64 {
        return Ok(a.powi(k as i32));
    }
    Err(domain("pow of complex base", a))
}
