use alloc::format;
use alloc::string::String;
use core::fmt;

use super::{BinaryOp, Expr, NamedConst, Node, UnaryOp};

// Binding strength: sum 1, product 2, negation 3, power 4, atom 5.
fn render(e: &Expr) -> (String, u8) {
    match e.node() {
        Node::Const(v) => {
            if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                (format!("(-{:?})", -v), 5)
            } else {
                (format!("{v:?}"), 5)
            }
        }
        Node::Named(c) => (
            match c {
                NamedConst::E => "e",
                NamedConst::Pi => "pi",
                NamedConst::I => "i",
            }
            .into(),
            5,
        ),
        Node::Var(n) | Node::Param(n) => (n.clone(), 5),
        Node::Unary(UnaryOp::Neg, a) => (format!("-{}", wrap(a, 3)), 3),
        Node::Unary(op, a) => (format!("{}({})", op.name(), render(a).0), 5),
        Node::Binary(op, a, b) => {
            let (sym, prec) = match op {
                BinaryOp::Add => ("+", 1),
                BinaryOp::Sub => ("-", 1),
                BinaryOp::Mul => ("*", 2),
                BinaryOp::Div => ("/", 2),
            };
            let rhs_min = if prec == 1 { 2 } else { 3 };
            (
                format!("{} {sym} {}", wrap(a, prec), wrap(b, rhs_min)),
                prec,
            )
        }
        Node::Pow(a, b) => (format!("{}^{}", wrap(a, 5), wrap(b, 3)), 4),
        Node::Table { table, order, arg } => {
            let primes: String = (0..*order).map(|_| '\'').collect();
            (format!("{}{primes}({})", table.name(), render(arg).0), 5)
        }
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let (s, p) = render(e);
    if p >= min {
        s
    } else {
        format!("({s})")
    }
}

/// Prints re-parseable source (tabulated nodes excepted) with minimal parentheses.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self).0)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Symbols};
    use alloc::string::ToString;

    #[test]
    fn minimal_parentheses() {
        let s = Symbols::new("x");
        for (src, out) in [
            ("-x^2*log(x/e)", "-x^2.0 * log(x / e)"),
            ("a - (b + c)", "a - (b + c)"),
            ("(a - b) + c", "a - b + c"),
            ("(x^2)^3", "(x^2.0)^3.0"),
            ("2^-a", "2.0^-a"),
            ("-(x + 1)", "-(x + 1.0)"),
        ] {
            let s = s.clone().with_parameters(["a", "b", "c"]);
            assert_eq!(parse(src, &s).unwrap().to_string(), out);
        }
    }
}
