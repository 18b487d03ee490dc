use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;

use super::{BinaryOp, Expr, NamedConst, Node, ParseError, UnaryOp};

/// Names visible to the parser: the single variable and the parameter names.
#[derive(Debug, Clone)]
pub struct Symbols {
    pub variable: String,
    pub parameters: BTreeSet<String>,
}

impl Symbols {
    pub fn new(variable: &str) -> Symbols {
        Symbols {
            variable: variable.into(),
            parameters: BTreeSet::new(),
        }
    }

    pub fn with_parameters<I, S>(mut self, names: I) -> Symbols
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.parameters.extend(names.into_iter().map(Into::into));
        self
    }
}

const ATOM: &[&str] = &["number", "identifier", "(", "-"];
const OPERATOR: &[&str] = &["+", "-", "*", "/", "^", ")", "end of input"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(u8),
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
    symbols: &'a Symbols,
}

/// Parse `source` with the standard precedence `^` > unary `-` > `* /` > `+ -`.
pub fn parse(source: &str, symbols: &Symbols) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: source,
        pos: 0,
        tok: Tok::End,
        tok_start: 0,
        symbols,
    };
    p.advance()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.syntax(OPERATOR));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn syntax(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.tok_start,
            expected: expected.to_vec(),
        }
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            let mut i = self.pos;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &self.src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                expected: vec!["number"],
            })?;
            self.pos = i;
            self.tok = Tok::Num(v);
            return Ok(());
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            let mut i = self.pos;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            self.pos = i;
            self.tok = Tok::Ident(self.src[start..i].to_string());
            return Ok(());
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Sym(c);
            return Ok(());
        }
        Err(ParseError::Syntax {
            offset: self.pos,
            expected: ATOM.to_vec(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym(b'+') => BinaryOp::Add,
                Tok::Sym(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::from_node(Node::Binary(op, lhs, rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym(b'*') => BinaryOp::Mul,
                Tok::Sym(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Expr::from_node(Node::Binary(op, lhs, rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.tok {
            Tok::Sym(b'-') => {
                self.advance()?;
                let inner = self.unary()?;
                Ok(Expr::from_node(Node::Unary(UnaryOp::Neg, inner)))
            }
            Tok::Sym(b'+') => {
                self.advance()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok != Tok::Sym(b'^') {
            return Ok(base);
        }
        self.advance()?;
        let exp_start = self.tok_start;
        // Right associative; the exponent may carry its own unary minus.
        let exponent = self.unary()?;
        if exponent.depends_on_var() {
            return Err(ParseError::Syntax {
                offset: exp_start,
                expected: vec!["exponent independent of the variable"],
            });
        }
        Ok(Expr::from_node(Node::Pow(base, exponent)))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::constant(v))
            }
            Tok::Sym(b'(') => {
                self.advance()?;
                let e = self.expr()?;
                if self.tok != Tok::Sym(b')') {
                    return Err(self.syntax(&[")"]));
                }
                self.advance()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let start = self.tok_start;
                self.advance()?;
                if let Some(op) = function(&name) {
                    if self.tok != Tok::Sym(b'(') {
                        return Err(self.syntax(&["("]));
                    }
                    self.advance()?;
                    let arg = self.expr()?;
                    if self.tok != Tok::Sym(b')') {
                        return Err(self.syntax(&[")"]));
                    }
                    self.advance()?;
                    return Ok(Expr::from_node(Node::Unary(op, arg)));
                }
                let node = match name.as_str() {
                    "e" => Node::Named(NamedConst::E),
                    "pi" => Node::Named(NamedConst::Pi),
                    "i" => Node::Named(NamedConst::I),
                    n if n == self.symbols.variable => Node::Var(name.clone()),
                    n if self.symbols.parameters.contains(n) => Node::Param(name.clone()),
                    _ => {
                        return Err(ParseError::UnknownIdentifier {
                            name,
                            offset: start,
                        })
                    }
                };
                Ok(Expr::from_node(node))
            }
            _ => Err(self.syntax(ATOM)),
        }
    }
}

fn function(name: &str) -> Option<UnaryOp> {
    Some(match name {
        "exp" => UnaryOp::Exp,
        "log" | "ln" => UnaryOp::Log,
        "sin" => UnaryOp::Sin,
        "cos" => UnaryOp::Cos,
        "sqrt" => UnaryOp::Sqrt,
        "abs" => UnaryOp::Abs,
        "conj" => UnaryOp::Conj,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn shape(e: &Expr) -> String {
        match e.node() {
            Node::Const(v) => format!("{v}"),
            Node::Named(NamedConst::E) => "E".into(),
            Node::Named(NamedConst::Pi) => "Pi".into(),
            Node::Named(NamedConst::I) => "I".into(),
            Node::Var(n) => format!("Var {n}"),
            Node::Param(n) => format!("Param {n}"),
            Node::Unary(op, a) => {
                let name = match op {
                    UnaryOp::Neg => "Neg",
                    UnaryOp::Log => "Log",
                    _ => op.name(),
                };
                format!("{name}({})", shape(a))
            }
            Node::Binary(op, a, b) => {
                let name = match op {
                    BinaryOp::Add => "Add",
                    BinaryOp::Sub => "Sub",
                    BinaryOp::Mul => "Mul",
                    BinaryOp::Div => "Div",
                };
                format!("{name}({}, {})", shape(a), shape(b))
            }
            Node::Pow(a, b) => format!("Pow({}, {})", shape(a), shape(b)),
            Node::Table { .. } => "Table".into(),
        }
    }

    #[test]
    fn precedence_trees() {
        let t = Symbols::new("t");
        assert_eq!(
            shape(&parse("t^2 + 1", &t).unwrap()),
            "Add(Pow(Var t, 2), 1)"
        );
        let x = Symbols::new("x");
        assert_eq!(
            shape(&parse("-x^2*log(x/e)", &x).unwrap()),
            "Mul(Neg(Pow(Var x, 2)), Log(Div(Var x, E)))"
        );
        assert_eq!(shape(&parse("2^3^2", &t).unwrap()), "Pow(2, Pow(3, 2))");
        assert_eq!(
            shape(&parse("2^-t*0+1", &x.clone().with_parameters(["t"])).unwrap()),
            "Add(Mul(Pow(2, Neg(Param t)), 0), 1)"
        );
        assert_eq!(shape(&parse("1-2-3", &t).unwrap()), "Sub(Sub(1, 2), 3)");
    }

    #[test]
    fn error_offsets() {
        let t = Symbols::new("t");
        match parse("sin(", &t) {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse("t + foo", &t) {
            Err(ParseError::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "foo");
                assert_eq!(offset, 4);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse("2^t", &t).is_err());
        assert!(parse("(t", &t).is_err());
        assert!(parse("t t", &t).is_err());
        assert!(parse("sin t", &t).is_err());
        assert_eq!(parse("1 $", &t).unwrap_err().offset(), 2);
    }

    #[test]
    fn numbers() {
        let t = Symbols::new("t");
        assert_eq!(parse("1.5e-3", &t).unwrap().as_const(), Some(1.5e-3));
        assert_eq!(parse(".25", &t).unwrap().as_const(), Some(0.25));
        assert_eq!(parse("2E+2", &t).unwrap().as_const(), Some(200.0));
    }
}
