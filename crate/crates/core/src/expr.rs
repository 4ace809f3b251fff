//! A small textual language for operator expressions.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor (('*' | '⊗' | "ox") factor)*
//! factor := atom ["'"] ["^" int]
//! atom   := number | 'i' | name | wordstring | '(' expr ')'
//! ```
//!
//! `*` and tensor products share one precedence level and associate to the
//! left. Names are `I X Y Z`, `sigma[1..3]`, `H = (X+Z)/√2`, `CNOT` (control
//! on the left site) and the matrix units `E00 E01 E10 E11`. A word string is
//! a run of two or more letters from `IXYZ`, such as `IXZZX`. Whitespace is
//! ignored. Error positions are 1-based character offsets.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{AlgebraSpec, OperatorSum, PauliWord};

/// Parenthesis nesting limit.
const MAX_DEPTH: usize = 200;

/// Largest exponent accepted by `^`.
pub const MAX_POWER: u32 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Non-negative real literal.
    Number(f64),
    /// The imaginary unit `i`.
    ImagUnit,
    /// `I`, `X`, `Y`, `Z`, `H`, `CNOT`, `E00` … `E11`.
    Name(String),
    /// `sigma[k]`, `k ∈ {1, 2, 3}`.
    Sigma(u8),
    /// Multi-site letter word such as `IXZZX`.
    Word(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Tensor(Box<Expr>, Box<Expr>),
    Adjoint(Box<Expr>),
    Power(Box<Expr>, u32),
    Paren(Box<Expr>),
}

pub const NAMES: [&str; 10] = ["I", "X", "Y", "Z", "H", "CNOT", "E00", "E01", "E10", "E11"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Tensor,
    Quote,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    End,
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        position,
        message: message.into(),
    }
}

/// Tokens paired with their 1-based start position.
fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '⊗' => Some(Tok::Tensor),
            '\'' => Some(Tok::Quote),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, pos));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| syntax(pos, format!("malformed number `{s}`")))?;
            out.push((Tok::Number(v), pos));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if s == "ox" {
                out.push((Tok::Tensor, pos));
            } else {
                out.push((Tok::Ident(s), pos));
            }
        } else {
            return Err(syntax(pos, format!("unexpected character `{c}`")));
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = if *self.peek() == Tok::Minus {
            self.bump();
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Tensor => {
                    self.bump();
                    lhs = Expr::Tensor(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        if *self.peek() == Tok::Quote {
            self.bump();
            e = Expr::Adjoint(Box::new(e));
        }
        if *self.peek() == Tok::Caret {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Tok::Number(v) if v.fract() == 0.0 && v <= u32::MAX as f64 => {
                    e = Expr::Power(Box::new(e), v as u32);
                }
                _ => return Err(syntax(pos, "expected a non-negative integer exponent")),
            }
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Number(v) => Ok(Expr::Number(v)),
            Tok::LParen => {
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return Err(syntax(pos, "parentheses nested too deeply"));
                }
                let inner = self.expr()?;
                self.depth -= 1;
                let close = self.pos();
                match self.bump() {
                    Tok::RParen => Ok(Expr::Paren(Box::new(inner))),
                    _ => Err(syntax(close, "expected `)`")),
                }
            }
            Tok::Ident(name) => self.named(name, pos),
            Tok::End => Err(syntax(pos, "unexpected end of input")),
            other => Err(syntax(pos, format!("unexpected {}", describe(&other)))),
        }
    }

    fn named(&mut self, name: String, pos: usize) -> Result<Expr> {
        if name == "i" {
            return Ok(Expr::ImagUnit);
        }
        if name == "sigma" {
            let open = self.pos();
            if self.bump() != Tok::LBracket {
                return Err(syntax(open, "expected `[` after sigma"));
            }
            let idx_pos = self.pos();
            let k = match self.bump() {
                Tok::Number(v) if v == 1.0 || v == 2.0 || v == 3.0 => v as u8,
                _ => return Err(syntax(idx_pos, "sigma index must be 1, 2 or 3")),
            };
            let close = self.pos();
            if self.bump() != Tok::RBracket {
                return Err(syntax(close, "expected `]`"));
            }
            return Ok(Expr::Sigma(k));
        }
        if NAMES.contains(&name.as_str()) {
            return Ok(Expr::Name(name));
        }
        if name.len() >= 2 && name.chars().all(|c| "IXYZ".contains(c)) {
            return Ok(Expr::Word(name));
        }
        let _ = pos;
        Err(Error::UnknownName(name))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Number(v) => format!("number {v}"),
        Tok::Ident(s) => format!("name `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Tensor => "tensor operator".into(),
        Tok::Quote => "`'`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses `text`; the algebra is fixed only at evaluation.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        depth: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        let pos = p.pos();
        let t = p.peek().clone();
        return Err(syntax(pos, format!("unexpected {}", describe(&t))));
    }
    Ok(e)
}

impl fmt::Display for Expr {
    /// ASCII form that parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::ImagUnit => f.write_str("i"),
            Expr::Name(n) | Expr::Word(n) => f.write_str(n),
            Expr::Sigma(k) => write!(f, "sigma[{k}]"),
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Add(a, b) => write!(f, "{a} + {b}"),
            Expr::Sub(a, b) => write!(f, "{a} - {b}"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Tensor(a, b) => write!(f, "{a} ox {b}"),
            Expr::Adjoint(e) => write!(f, "{e}'"),
            Expr::Power(e, k) => write!(f, "{e}^{k}"),
            Expr::Paren(e) => write!(f, "({e})"),
        }
    }
}

/// Intermediate value: scalars carry no algebra until combined.
#[derive(Debug, Clone)]
enum Value {
    Scalar(Complex64),
    Op(OperatorSum),
}

fn qubit() -> AlgebraSpec {
    AlgebraSpec::qubits(1).expect("one qubit")
}

fn letters(s: &str) -> Result<OperatorSum> {
    Ok(PauliWord::from_letters(s)?.to_sum())
}

fn combo(terms: &[(&str, Complex64)]) -> Result<OperatorSum> {
    let mut acc: Option<OperatorSum> = None;
    for (w, c) in terms {
        let t = letters(w)?.scale(*c);
        acc = Some(match acc {
            None => t,
            Some(a) => a.add(&t)?,
        });
    }
    Ok(acc.expect("nonempty"))
}

fn named_operator(name: &str) -> Result<OperatorSum> {
    let r = |x: f64| Complex64::new(x, 0.0);
    let half = r(0.5);
    let ihalf = Complex64::new(0.0, 0.5);
    match name {
        "I" | "X" | "Y" | "Z" => letters(name),
        "H" => combo(&[("X", r(FRAC_1_SQRT_2)), ("Z", r(FRAC_1_SQRT_2))]),
        "CNOT" => combo(&[("II", half), ("ZI", half), ("IX", half), ("ZX", -half)]),
        "E00" => combo(&[("I", half), ("Z", half)]),
        "E11" => combo(&[("I", half), ("Z", -half)]),
        "E01" => combo(&[("X", half), ("Y", ihalf)]),
        "E10" => combo(&[("X", half), ("Y", -ihalf)]),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

fn lift(v: Value, spec: AlgebraSpec) -> OperatorSum {
    match v {
        Value::Scalar(c) => OperatorSum::scalar(spec, c),
        Value::Op(o) => o,
    }
}

fn power(base: &OperatorSum, mut k: u32) -> Result<OperatorSum> {
    let mut acc = OperatorSum::identity(base.spec());
    let mut sq = base.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(&sq)?;
        }
        k >>= 1;
        if k > 0 {
            sq = sq.mul(&sq)?;
        }
    }
    Ok(acc)
}

fn eval(e: &Expr) -> Result<Value> {
    Ok(match e {
        Expr::Number(v) => Value::Scalar(Complex64::new(*v, 0.0)),
        Expr::ImagUnit => Value::Scalar(Complex64::new(0.0, 1.0)),
        Expr::Name(n) => Value::Op(named_operator(n)?),
        Expr::Sigma(k) => Value::Op(named_operator(["X", "Y", "Z"][(*k as usize).clamp(1, 3) - 1])?),
        Expr::Word(w) => Value::Op(letters(w)?),
        Expr::Paren(inner) => eval(inner)?,
        Expr::Neg(inner) => match eval(inner)? {
            Value::Scalar(c) => Value::Scalar(-c),
            Value::Op(o) => Value::Op(o.scale(Complex64::new(-1.0, 0.0))),
        },
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let sign = if matches!(e, Expr::Add(..)) { 1.0 } else { -1.0 };
            match (eval(a)?, eval(b)?) {
                (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x + y * sign),
                (x, y) => {
                    let spec = match (&x, &y) {
                        (Value::Op(o), _) | (_, Value::Op(o)) => o.spec(),
                        _ => unreachable!(),
                    };
                    let (x, y) = (lift(x, spec), lift(y, spec));
                    Value::Op(x.add(&y.scale(Complex64::new(sign, 0.0)))?)
                }
            }
        }
        Expr::Mul(a, b) => match (eval(a)?, eval(b)?) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
            (Value::Scalar(c), Value::Op(o)) | (Value::Op(o), Value::Scalar(c)) => Value::Op(o.scale(c)),
            (Value::Op(x), Value::Op(y)) => Value::Op(x.mul(&y)?),
        },
        Expr::Tensor(a, b) => match (eval(a)?, eval(b)?) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
            (Value::Scalar(c), Value::Op(o)) | (Value::Op(o), Value::Scalar(c)) => Value::Op(o.scale(c)),
            (Value::Op(x), Value::Op(y)) => Value::Op(x.tensor(&y)?),
        },
        Expr::Adjoint(inner) => match eval(inner)? {
            Value::Scalar(c) => Value::Scalar(c.conj()),
            Value::Op(o) => Value::Op(o.adjoint()),
        },
        Expr::Power(inner, k) => {
            if *k > MAX_POWER {
                return Err(Error::Domain(format!("exponent {k} exceeds {MAX_POWER}")));
            }
            match eval(inner)? {
                Value::Scalar(c) => Value::Scalar(c.powu(*k)),
                Value::Op(o) => Value::Op(power(&o, *k)?),
            }
        }
    })
}

/// Evaluates to an operator sum. A bare scalar needs `spec`; otherwise the
/// algebra is inferred and, when `spec` is given, must match it.
pub fn eval_expr(e: &Expr, spec: Option<AlgebraSpec>) -> Result<OperatorSum> {
    match (eval(e)?, spec) {
        (Value::Scalar(c), Some(s)) => Ok(OperatorSum::scalar(s, c)),
        (Value::Scalar(c), None) => Ok(OperatorSum::scalar(qubit(), c)),
        (Value::Op(o), Some(s)) if o.spec() != s => Err(Error::SpecMismatch {
            left: s,
            right: o.spec(),
        }),
        (Value::Op(o), _) => Ok(o),
    }
}

/// Parses and evaluates in one step.
pub fn evaluate(text: &str, spec: Option<AlgebraSpec>) -> Result<OperatorSum> {
    eval_expr(&parse_expr(text)?, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseOperator;
    use crate::pauli::WordKey;

    fn dense(text: &str) -> DenseOperator {
        evaluate(text, None).unwrap().to_dense().unwrap()
    }

    #[test]
    fn i_times_y_is_minus_xz() {
        let v = evaluate("i*Y", None).unwrap();
        let (c, w) = v.as_single_word().unwrap();
        assert_eq!(w.key(), &WordKey { x: vec![1], z: vec![1] });
        assert!((c * w.phase() - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tensor_block_structure() {
        let m = dense("(I+Z) ox X");
        assert_eq!(m.dim(), 4);
        let x = dense("X").scale_real(2.0);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m[(i, j + 2)], Complex64::new(0.0, 0.0));
                assert_eq!(m[(i + 2, j)], Complex64::new(0.0, 0.0));
                assert_eq!(m[(i + 2, j + 2)], Complex64::new(0.0, 0.0));
                assert_eq!(m[(i, j)], x[(i, j)]);
            }
        }
        assert_eq!(dense("(I+Z) ⊗ X"), m);
    }

    #[test]
    fn syntax_positions() {
        let err = parse_expr("X**Z").unwrap_err();
        assert_eq!(err.position(), Some(3));
        assert_eq!(parse_expr("(X + Z").unwrap_err().position(), Some(7));
        assert_eq!(parse_expr("X $ Z").unwrap_err().position(), Some(3));
        assert_eq!(parse_expr("").unwrap_err().position(), Some(1));
        assert!(matches!(parse_expr("Q"), Err(Error::UnknownName(_))));
        assert!(matches!(parse_expr("sigma[4]"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn commutator_is_minus_two_i_y() {
        let lhs = dense("X*Z - Z*X");
        let rhs = dense("Y").scale(Complex64::new(0.0, -2.0));
        assert!(lhs.distance(&rhs) < 1e-14);
    }

    #[test]
    fn projector_and_hadamard() {
        let p = dense("0.5*(I+Z)");
        assert!((&p * &p).distance(&p) < 1e-15);
        assert!(dense("H*Z*H").distance(&dense("X")) < 1e-15);
        assert!(dense("X*H").distance(&dense("H*Z")) < 1e-15);
    }

    #[test]
    fn xyz_is_i() {
        let v = evaluate("X*Y*Z", None).unwrap();
        assert!(v.approx_eq(&OperatorSum::scalar(qubit(), Complex64::new(0.0, 1.0)), 1e-15));
    }

    #[test]
    fn aliases_match_dense() {
        assert!(dense("CNOT").distance(&crate::composite::cnot()) < 1e-15);
        assert!(dense("H").distance(&crate::composite::hadamard()) < 1e-15);
        for (name, i, j) in [("E00", 0, 0), ("E01", 0, 1), ("E10", 1, 0), ("E11", 1, 1)] {
            assert!(dense(name).distance(&DenseOperator::matrix_unit(2, i, j)) < 1e-15);
        }
        assert_eq!(dense("sigma[2]"), dense("Y"));
        assert_eq!(dense("IXZZX"), dense("I ox X ox Z ox Z ox X"));
    }

    #[test]
    fn adjoint_power_and_negation() {
        assert!(dense("(i*X)'").distance(&dense("X").scale(Complex64::new(0.0, -1.0))) < 1e-15);
        assert!(dense("(X+Z)^2").distance(&DenseOperator::identity(2).scale_real(2.0)) < 1e-14);
        assert!(dense("X^0").distance(&DenseOperator::identity(2)) < 1e-15);
        assert!(dense("-X + X").frobenius_norm() < 1e-15);
        assert!(matches!(evaluate("X^5000", None), Err(Error::Domain(_))));
    }

    #[test]
    fn spec_checks() {
        assert!(matches!(evaluate("X + XX", None), Err(Error::SpecMismatch { .. })));
        let two = AlgebraSpec::qubits(2).unwrap();
        assert!(matches!(evaluate("X", Some(two)), Err(Error::SpecMismatch { .. })));
        assert_eq!(evaluate("2", Some(two)).unwrap(), OperatorSum::scalar(two, Complex64::new(2.0, 0.0)));
    }

    #[test]
    fn printing_round_trips() {
        for text in ["X*Z - Z*X", "0.5*(I+Z)", "(I + Z) ox X", "-i*Y'^3", "sigma[1] ⊗ IXZ", "H*Z*H + 2.25"] {
            let e = parse_expr(text).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
            assert!(e.to_string().is_ascii());
        }
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let text = format!("{}X{}", "(".repeat(5000), ")".repeat(5000));
        assert!(matches!(parse_expr(&text), Err(Error::Syntax { .. })));
    }
}
