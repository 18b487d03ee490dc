//! A small expression language for coefficient functions.
//!
//! Expressions are immutable DAGs (`Arc`-shared nodes) in one real variable with
//! complex values. Derivatives are produced symbolically; evaluation goes through
//! a compiled [`Tape`] that visits each shared node once.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

mod diff;
mod eval;
mod parse;
mod print;

pub use diff::{differentiate, differentiate_strict};
pub use eval::Tape;
pub use parse::{parse, Symbols};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NamedConst {
    E,
    Pi,
    I,
}

impl NamedConst {
    pub fn value(self) -> Complex64 {
        match self {
            NamedConst::E => Complex64::new(core::f64::consts::E, 0.0),
            NamedConst::Pi => Complex64::new(core::f64::consts::PI, 0.0),
            NamedConst::I => Complex64::new(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
    /// Complex conjugate; mostly produced by differentiation of `abs`.
    Conj,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
            UnaryOp::Conj => "conj",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// A real function of one real argument known through a table (e.g. an ODE
/// solution), with derivatives up to `max_order`.
pub trait Tabulated: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn max_order(&self) -> u8;
    fn eval(&self, order: u8, x: f64) -> Result<f64, EvalError>;
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Named(NamedConst),
    Var(String),
    Param(String),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
    /// `base ^ exponent`; the exponent never depends on the variable.
    Pow(Expr, Expr),
    Table {
        table: Arc<dyn Tabulated>,
        order: u8,
        arg: Expr,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}", .expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error: {op} at argument {arg}")]
    Domain { op: &'static str, arg: Complex64 },
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("table `{name}` cannot evaluate derivative order {order}")]
    TableOrder { name: String, order: u8 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffError {
    #[error("`{0}` is not differentiable in strict mode")]
    NonDifferentiable(&'static str),
    #[error("table `{name}` has no derivative of order {order}")]
    TableOrder { name: String, order: u8 },
}

/// Shared, immutable expression node.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

impl Expr {
    pub fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(v: f64) -> Expr {
        Expr::from_node(Node::Const(v))
    }

    pub fn var(name: &str) -> Expr {
        Expr::from_node(Node::Var(name.into()))
    }

    pub fn param(name: &str) -> Expr {
        Expr::from_node(Node::Param(name.into()))
    }

    pub fn imag_unit() -> Expr {
        Expr::from_node(Node::Named(NamedConst::I))
    }

    pub fn table(table: Arc<dyn Tabulated>, arg: Expr) -> Expr {
        Expr::from_node(Node::Table {
            table,
            order: 0,
            arg,
        })
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    // Folding constructors: used by differentiation, substitution and builders.
    // The parser builds raw nodes so that parse trees mirror the source.

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x + y),
            (Some(0.0), _) => b.clone(),
            (_, Some(0.0)) => a.clone(),
            _ => Expr::from_node(Node::Binary(BinaryOp::Add, a.clone(), b.clone())),
        }
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x - y),
            (Some(0.0), _) => Expr::neg(b),
            (_, Some(0.0)) => a.clone(),
            _ => Expr::from_node(Node::Binary(BinaryOp::Sub, a.clone(), b.clone())),
        }
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x * y),
            (Some(0.0), _) => Expr::constant(0.0),
            (_, Some(0.0)) => Expr::constant(0.0),
            (Some(1.0), _) => b.clone(),
            (_, Some(1.0)) => a.clone(),
            (Some(-1.0), _) => Expr::neg(b),
            (_, Some(-1.0)) => Expr::neg(a),
            _ => Expr::from_node(Node::Binary(BinaryOp::Mul, a.clone(), b.clone())),
        }
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
            (Some(0.0), _) => Expr::constant(0.0),
            (_, Some(1.0)) => a.clone(),
            _ => Expr::from_node(Node::Binary(BinaryOp::Div, a.clone(), b.clone())),
        }
    }

    pub fn neg(a: &Expr) -> Expr {
        match a.node() {
            Node::Const(x) => Expr::constant(-x),
            Node::Unary(UnaryOp::Neg, inner) => inner.clone(),
            _ => Expr::from_node(Node::Unary(UnaryOp::Neg, a.clone())),
        }
    }

    pub fn unary(op: UnaryOp, a: &Expr) -> Expr {
        if op == UnaryOp::Neg {
            return Expr::neg(a);
        }
        if let Some(x) = a.as_const() {
            let folded = match op {
                UnaryOp::Exp => Some(libm::exp(x)),
                UnaryOp::Sin => Some(libm::sin(x)),
                UnaryOp::Cos => Some(libm::cos(x)),
                UnaryOp::Abs => Some(libm::fabs(x)),
                UnaryOp::Conj => Some(x),
                UnaryOp::Log if x > 0.0 => Some(libm::log(x)),
                UnaryOp::Sqrt if x >= 0.0 => Some(libm::sqrt(x)),
                _ => None,
            };
            if let Some(v) = folded {
                return Expr::constant(v);
            }
        }
        Expr::from_node(Node::Unary(op, a.clone()))
    }

    pub fn pow(a: &Expr, exponent: &Expr) -> Expr {
        match exponent.as_const() {
            Some(0.0) => Expr::constant(1.0),
            Some(1.0) => a.clone(),
            _ => match (a.as_const(), exponent.as_const()) {
                (Some(x), Some(k)) if x > 0.0 || k == libm::trunc(k) && x != 0.0 => {
                    Expr::constant(libm::pow(x, k))
                }
                _ => Expr::from_node(Node::Pow(a.clone(), exponent.clone())),
            },
        }
    }

    pub fn powi(a: &Expr, k: i32) -> Expr {
        Expr::pow(a, &Expr::constant(k as f64))
    }

    pub fn exp(&self) -> Expr {
        Expr::unary(UnaryOp::Exp, self)
    }
    pub fn ln(&self) -> Expr {
        Expr::unary(UnaryOp::Log, self)
    }
    pub fn sqrt(&self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self)
    }
    pub fn conj(&self) -> Expr {
        Expr::unary(UnaryOp::Conj, self)
    }

    /// `|z|²` written as `z·conj(z)`.
    pub fn abs2(&self) -> Expr {
        Expr::mul(self, &self.conj())
    }

    pub fn scale(&self, k: f64) -> Expr {
        Expr::mul(&Expr::constant(k), self)
    }

    /// True if the variable occurs anywhere below this node.
    pub fn depends_on_var(&self) -> bool {
        let mut memo = BTreeMap::new();
        self.depends_memo(&mut memo)
    }

    fn depends_memo(&self, memo: &mut BTreeMap<usize, bool>) -> bool {
        if let Some(v) = memo.get(&self.key()) {
            return *v;
        }
        let v = match self.node() {
            Node::Const(_) | Node::Named(_) | Node::Param(_) => false,
            Node::Var(_) => true,
            Node::Unary(_, a) => a.depends_memo(memo),
            Node::Binary(_, a, b) | Node::Pow(a, b) => a.depends_memo(memo) || b.depends_memo(memo),
            Node::Table { arg, .. } => arg.depends_memo(memo),
        };
        memo.insert(self.key(), v);
        v
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.key()) {
                continue;
            }
            match e.node() {
                Node::Unary(_, a) => stack.push(a.clone()),
                Node::Binary(_, a, b) | Node::Pow(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Node::Table { arg, .. } => stack.push(arg.clone()),
                _ => {}
            }
        }
        seen.len()
    }

    /// Names of all parameters referenced by the expression.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.key()) {
                continue;
            }
            match e.node() {
                Node::Param(name) => {
                    out.insert(name.clone());
                }
                Node::Unary(_, a) => stack.push(a.clone()),
                Node::Binary(_, a, b) | Node::Pow(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Node::Table { arg, .. } => stack.push(arg.clone()),
                _ => {}
            }
        }
        out
    }

    /// Replace every occurrence of the variable by `replacement`, sharing
    /// structure (the replacement is inserted once, referenced many times).
    pub fn substitute(&self, replacement: &Expr) -> Expr {
        let mut memo = BTreeMap::new();
        self.rewrite(&mut memo, &mut |node| match node {
            Node::Var(_) => Some(replacement.clone()),
            _ => None,
        })
    }

    /// Replace bound parameters by constants; unknown parameters stay symbolic.
    pub fn bind(&self, params: &BTreeMap<String, f64>) -> Expr {
        let mut memo = BTreeMap::new();
        self.rewrite(&mut memo, &mut |node| match node {
            Node::Param(name) => params.get(name).map(|v| Expr::constant(*v)),
            _ => None,
        })
    }

    fn rewrite(
        &self,
        memo: &mut BTreeMap<usize, Expr>,
        leaf: &mut dyn FnMut(&Node) -> Option<Expr>,
    ) -> Expr {
        if let Some(e) = memo.get(&self.key()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) | Node::Named(_) | Node::Var(_) | Node::Param(_) => {
                leaf(self.node()).unwrap_or_else(|| self.clone())
            }
            Node::Unary(op, a) => {
                let a2 = a.rewrite(memo, leaf);
                if a2.key() == a.key() {
                    self.clone()
                } else {
                    Expr::unary(*op, &a2)
                }
            }
            Node::Binary(op, a, b) => {
                let a2 = a.rewrite(memo, leaf);
                let b2 = b.rewrite(memo, leaf);
                if a2.key() == a.key() && b2.key() == b.key() {
                    self.clone()
                } else {
                    match op {
                        BinaryOp::Add => Expr::add(&a2, &b2),
                        BinaryOp::Sub => Expr::sub(&a2, &b2),
                        BinaryOp::Mul => Expr::mul(&a2, &b2),
                        BinaryOp::Div => Expr::div(&a2, &b2),
                    }
                }
            }
            Node::Pow(a, b) => {
                let a2 = a.rewrite(memo, leaf);
                let b2 = b.rewrite(memo, leaf);
                if a2.key() == a.key() && b2.key() == b.key() {
                    self.clone()
                } else {
                    Expr::pow(&a2, &b2)
                }
            }
            Node::Table { table, order, arg } => {
                let a2 = arg.rewrite(memo, leaf);
                if a2.key() == arg.key() {
                    self.clone()
                } else {
                    Expr::from_node(Node::Table {
                        table: table.clone(),
                        order: *order,
                        arg: a2,
                    })
                }
            }
        };
        memo.insert(self.key(), out.clone());
        out
    }

    /// Compile and evaluate once. Prefer [`Tape`] for repeated evaluation.
    pub fn eval(&self, point: f64) -> Result<Complex64, EvalError> {
        Tape::compile(self).eval(point)
    }
}

/// Evaluate `expr` at `point` with parameter values taken from `params`.
pub fn evaluate(
    expr: &Expr,
    point: f64,
    params: &BTreeMap<String, f64>,
) -> Result<Complex64, EvalError> {
    expr.bind(params).eval(point)
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $ctor:ident) => {
        impl core::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(self, rhs)
            }
        }
        impl core::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$ctor(&self, &rhs)
            }
        }
        impl core::ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$ctor(self, &Expr::constant(rhs))
            }
        }
        impl core::ops::$trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(&Expr::constant(self), rhs)
            }
        }
    };
}

impl_binop!(Add, add, add);
impl_binop!(Sub, sub, sub);
impl_binop!(Mul, mul, mul);
impl_binop!(Div, div, div);

impl core::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
