use alloc::collections::BTreeMap;
use alloc::string::ToString;

use super::{BinaryOp, DiffError, Expr, Node, UnaryOp};

/// Symbolic derivative of the given order (≥ 1) with respect to the variable.
///
/// `abs(u)` is differentiated as `(conj(u)·u' + u·conj(u'))/(2|u|)`, which is
/// `sign(u)·u'` for real `u` and is undefined (division by zero) at `u = 0`.
pub fn differentiate(e: &Expr, order: u32) -> Result<Expr, DiffError> {
    nth(e, order, false)
}

/// Like [`differentiate`] but refuses to differentiate through `abs`.
pub fn differentiate_strict(e: &Expr, order: u32) -> Result<Expr, DiffError> {
    nth(e, order, true)
}

fn nth(e: &Expr, order: u32, strict: bool) -> Result<Expr, DiffError> {
    let mut cur = e.clone();
    for _ in 0..order {
        let mut memo = BTreeMap::new();
        cur = d(&cur, strict, &mut memo)?;
    }
    Ok(cur)
}

fn d(e: &Expr, strict: bool, memo: &mut BTreeMap<usize, Expr>) -> Result<Expr, DiffError> {
    if let Some(v) = memo.get(&e.key()) {
        return Ok(v.clone());
    }
    let zero = Expr::constant(0.0);
    let out = match e.node() {
        Node::Const(_) | Node::Named(_) | Node::Param(_) => zero,
        Node::Var(_) => Expr::constant(1.0),
        Node::Unary(op, u) => {
            let du = d(u, strict, memo)?;
            if du.as_const() == Some(0.0) {
                zero
            } else {
                match op {
                    UnaryOp::Neg => Expr::neg(&du),
                    UnaryOp::Conj => du.conj(),
                    UnaryOp::Exp => Expr::mul(e, &du),
                    UnaryOp::Log => Expr::div(&du, u),
                    UnaryOp::Sin => Expr::mul(&Expr::unary(UnaryOp::Cos, u), &du),
                    UnaryOp::Cos => Expr::neg(&Expr::mul(&Expr::unary(UnaryOp::Sin, u), &du)),
                    UnaryOp::Sqrt => Expr::div(&du, &e.scale(2.0)),
                    UnaryOp::Abs => {
                        if strict {
                            return Err(DiffError::NonDifferentiable("abs"));
                        }
                        let num = Expr::add(&Expr::mul(&u.conj(), &du), &Expr::mul(u, &du.conj()));
                        Expr::div(&num, &e.scale(2.0))
                    }
                }
            }
        }
        Node::Binary(op, a, b) => {
            let da = d(a, strict, memo)?;
            let db = d(b, strict, memo)?;
            match op {
                BinaryOp::Add => Expr::add(&da, &db),
                BinaryOp::Sub => Expr::sub(&da, &db),
                BinaryOp::Mul => Expr::add(&Expr::mul(&da, b), &Expr::mul(a, &db)),
                BinaryOp::Div => {
                    // a'/b − a·b'/b²
                    let first = Expr::div(&da, b);
                    if db.as_const() == Some(0.0) {
                        first
                    } else {
                        let second = Expr::div(&Expr::mul(a, &db), &Expr::powi(b, 2));
                        Expr::sub(&first, &second)
                    }
                }
            }
        }
        Node::Pow(u, k) => {
            let du = d(u, strict, memo)?;
            if du.as_const() == Some(0.0) {
                zero
            } else {
                let km1 = Expr::sub(k, &Expr::constant(1.0));
                Expr::mul(&Expr::mul(k, &Expr::pow(u, &km1)), &du)
            }
        }
        Node::Table { table, order, arg } => {
            let da = d(arg, strict, memo)?;
            if da.as_const() == Some(0.0) {
                zero
            } else {
                let next = order + 1;
                if next > table.max_order() {
                    return Err(DiffError::TableOrder {
                        name: table.name().to_string(),
                        order: next,
                    });
                }
                let dt = Expr::from_node(Node::Table {
                    table: table.clone(),
                    order: next,
                    arg: arg.clone(),
                });
                Expr::mul(&dt, &da)
            }
        }
    };
    memo.insert(e.key(), out.clone());
    Ok(out)
}
