//! A small expression language over chart coordinates `x1..xn`.
//!
//! Grammar (standard precedence, `^` takes an integer exponent):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' exponent)?
//! exponent:= ['-' | '+'] integer | '(' ['-' | '+'] integer ')'
//! primary := number | 'x'k | 'pi' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | log | sqrt | atan
//! ```

use std::fmt;

use super::taylor::{Func, Shape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn syntax(column: usize, message: impl Into<String>) -> Error {
    Error::Syntax { column, message: message.into() }
}

impl Lexer {
    fn new(text: &str) -> Result<Self> {
        let chars: Vec<char> = text.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s.parse().map_err(|_| syntax(col, format!("malformed number '{s}'")))?;
                if !v.is_finite() {
                    return Err(syntax(col, format!("number '{s}' is not finite")));
                }
                toks.push((Tok::Num(v), col));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
            } else if "+-*/^()".contains(c) {
                toks.push((Tok::Op(c), col));
                i += 1;
            } else {
                return Err(syntax(col, format!("unexpected character '{c}'")));
            }
        }
        toks.push((Tok::End, chars.len() + 1));
        Ok(Self { toks })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    nvars: Option<usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> Error {
        match self.peek() {
            Tok::End => syntax(self.col(), "unexpected end of input"),
            Tok::Num(v) => syntax(self.col(), format!("unexpected number {v}")),
            Tok::Ident(s) => syntax(self.col(), format!("unexpected identifier '{s}'")),
            Tok::Op(c) => syntax(self.col(), format!("unexpected '{c}'")),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            match self.peek() {
                Tok::End => Err(syntax(self.col(), format!("expected '{c}' before end of input"))),
                _ => Err(syntax(self.col(), format!("expected '{c}'"))),
            }
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let paren = *self.peek() == Tok::Op('(');
        if paren {
            self.bump();
        }
        let mut sign = 1i64;
        match self.peek() {
            Tok::Op('-') => {
                sign = -1;
                self.bump();
            }
            Tok::Op('+') => {
                self.bump();
            }
            _ => {}
        }
        let col = self.col();
        let k = match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= 64.0 => sign * v as i64,
            Tok::Num(_) => return Err(syntax(col, "exponent must be an integer of magnitude at most 64")),
            _ => {
                self.pos -= 1;
                return Err(syntax(col, "exponent must be an integer literal"));
            }
        };
        if paren {
            self.expect(')')?;
        }
        Ok(Expr::Pow(Box::new(base), k as i32))
    }

    fn primary(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(f, Box::new(e)));
                }
                if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    let ok = idx >= 1 && self.nvars.map_or(true, |n| idx <= n) && !name[1..].starts_with('0');
                    if ok {
                        return Ok(Expr::Var(idx - 1));
                    }
                }
                Err(syntax(col, format!("unknown identifier '{name}'")))
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parses `text`, accepting coordinates `x1..x{nvars}` (any index when `nvars` is `None`).
pub fn parse_expr(text: &str, nvars: Option<usize>) -> Result<Expr> {
    let lexer = Lexer::new(text)?;
    let mut p = Parser { toks: lexer.toks, pos: 0, nvars };
    if *p.peek() == Tok::End {
        return Err(syntax(1, "empty expression"));
    }
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected());
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_expr(s, None)
    }
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    /// One more than the largest coordinate index used.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Program::compile(self).eval(x)
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.prec() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "({v:?})")
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, 4)
            }
            Expr::Add(a, b) => {
                write_child(f, a, 1)?;
                f.write_str(" + ")?;
                write_child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_child(f, a, 1)?;
                f.write_str(" - ")?;
                write_child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_child(f, a, 2)?;
                f.write_str("*")?;
                write_child(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_child(f, a, 2)?;
                f.write_str("/")?;
                write_child(f, b, 3)
            }
            Expr::Pow(a, k) => {
                write_child(f, a, 5)?;
                if *k < 0 {
                    write!(f, "^({k})")
                } else {
                    write!(f, "^{k}")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Powi(i32),
    Call(Func),
}

/// An expression compiled to postfix form for repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    depth: usize,
    arity: usize,
}

impl Program {
    pub fn compile(e: &Expr) -> Program {
        fn emit(e: &Expr, ops: &mut Vec<Op>) {
            match e {
                Expr::Num(v) => ops.push(Op::Const(*v)),
                Expr::Var(i) => ops.push(Op::Var(*i)),
                Expr::Neg(a) => {
                    emit(a, ops);
                    ops.push(Op::Neg);
                }
                Expr::Pow(a, k) => {
                    emit(a, ops);
                    ops.push(Op::Powi(*k));
                }
                Expr::Call(f, a) => {
                    emit(a, ops);
                    ops.push(Op::Call(*f));
                }
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(match e {
                        Expr::Add(..) => Op::Add,
                        Expr::Sub(..) => Op::Sub,
                        Expr::Mul(..) => Op::Mul,
                        _ => Op::Div,
                    });
                }
            }
        }
        let mut ops = Vec::new();
        emit(e, &mut ops);
        let (mut d, mut depth) = (0usize, 0usize);
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => d += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div => d -= 1,
                _ => {}
            }
            depth = depth.max(d);
        }
        Program { ops, depth, arity: e.arity() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// True when the program is the literal `0`.
    pub fn is_zero(&self) -> bool {
        self.ops == [Op::Const(0.0)]
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut stack = Vec::with_capacity(self.depth);
        self.eval_with(x, &mut stack)
    }

    pub fn eval_with(&self, x: &[f64], stack: &mut Vec<f64>) -> Result<f64> {
        if x.len() < self.arity {
            return Err(Error::DimensionMismatch { expected: self.arity, got: x.len() });
        }
        stack.clear();
        for op in &self.ops {
            match *op {
                Op::Const(c) => stack.push(c),
                Op::Var(i) => stack.push(x[i]),
                Op::Neg => {
                    let a = stack.last_mut().expect("stack");
                    *a = -*a;
                }
                Op::Powi(k) => {
                    let a = stack.last_mut().expect("stack");
                    if k < 0 && a.abs() < super::taylor::DIV_EPS {
                        return Err(Error::NonSmoothPoint(format!("negative power of {a:e}")));
                    }
                    *a = a.powi(k);
                }
                Op::Call(f) => {
                    let a = stack.last_mut().expect("stack");
                    *a = f.eval(*a)?;
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    let b = stack.pop().expect("stack");
                    let a = stack.last_mut().expect("stack");
                    match op {
                        Op::Add => *a += b,
                        Op::Sub => *a -= b,
                        Op::Mul => *a *= b,
                        _ => {
                            if b.abs() < super::taylor::DIV_EPS {
                                return Err(Error::NonSmoothPoint(format!("division by {b:e}")));
                            }
                            *a /= b
                        }
                    }
                }
            }
        }
        Ok(stack[0])
    }

    /// Taylor block of the expression at `x` in the given shape, written to `out`.
    /// `work` is scratch space reused across calls.
    pub fn taylor_with(&self, x: &[f64], shape: Shape, work: &mut Vec<f64>, out: &mut [f64]) -> Result<()> {
        if x.len() != shape.n || x.len() < self.arity {
            return Err(Error::DimensionMismatch { expected: shape.n.max(self.arity), got: x.len() });
        }
        let len = shape.len();
        work.clear();
        work.resize((self.depth + 1) * len, 0.0);
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::Const(c) => {
                    shape.constant(c, &mut work[sp * len..(sp + 1) * len]);
                    sp += 1;
                }
                Op::Var(i) => {
                    shape.variable(x[i], i, &mut work[sp * len..(sp + 1) * len]);
                    sp += 1;
                }
                Op::Neg | Op::Powi(_) | Op::Call(_) => {
                    let (lo, hi) = work.split_at_mut(sp * len);
                    let a = &lo[(sp - 1) * len..];
                    let o = &mut hi[..len];
                    match *op {
                        Op::Neg => shape.neg(a, o),
                        Op::Powi(k) => shape.powi(a, k, o)?,
                        Op::Call(f) => shape.func(f, a, o)?,
                        _ => unreachable!(),
                    }
                    lo[(sp - 1) * len..].copy_from_slice(&hi[..len]);
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    let (lo, hi) = work.split_at_mut(sp * len);
                    let (a, b) = lo[(sp - 2) * len..].split_at(len);
                    let o = &mut hi[..len];
                    match *op {
                        Op::Add => shape.add(a, b, o),
                        Op::Sub => shape.sub(a, b, o),
                        Op::Mul => shape.mul(a, b, o),
                        _ => {
                            let mut r = vec![0.0; len];
                            shape.recip(b, &mut r)?;
                            shape.mul(a, &r, o);
                        }
                    }
                    lo[(sp - 2) * len..(sp - 1) * len].copy_from_slice(&hi[..len]);
                    sp -= 1;
                }
            }
        }
        out.copy_from_slice(&work[..len]);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_precedence() {
        let e = parse_expr("x1^2 + sin(x2)", Some(2)).unwrap();
        assert_eq!(
            e,
            Expr::Add(
                Box::new(Expr::Pow(Box::new(Expr::Var(0)), 2)),
                Box::new(Expr::Call(Func::Sin, Box::new(Expr::Var(1))))
            )
        );
        assert_eq!(parse_expr("-x1^2", None).unwrap().eval(&[3.0]).unwrap(), -9.0);
        assert_eq!(parse_expr("2-3-4", None).unwrap().eval(&[]).unwrap(), -5.0);
        assert_eq!(parse_expr("8/2/2", None).unwrap().eval(&[]).unwrap(), 2.0);
        assert_eq!(parse_expr("x1^-2", None).unwrap().eval(&[2.0]).unwrap(), 0.25);
        assert_eq!(parse_expr("x1^(-1)", None).unwrap().eval(&[4.0]).unwrap(), 0.25);
        assert_eq!(parse_expr("1.5e2", None).unwrap().eval(&[]).unwrap(), 150.0);
    }

    #[test]
    fn sphere_factor() {
        let e = parse_expr("4/(1 + x1^2 + x2^2)^2", Some(2)).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 4.0);
        assert_eq!(e.eval(&[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn dangling_operator_column() {
        assert_eq!(
            parse_expr("x1 +", Some(2)),
            Err(Error::Syntax { column: 5, message: "unexpected end of input".into() })
        );
    }

    #[test]
    fn rejections() {
        for (text, col) in [("x3", 1), ("y + 1", 1), ("x1 $ 2", 4), ("(x1", 4), ("x1^x2", 4), ("x1^1.5", 4), ("", 1), ("x0", 1), ("sin x1", 5)] {
            match parse_expr(text, Some(2)) {
                Err(Error::Syntax { column, .. }) => assert_eq!(column, col, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn pretty_print_round_trip() {
        for text in ["-(x1 - x2)*3", "x1 - (x2 - 1)", "(x1 + 1)^3/x2", "-x1^2", "--x1", "exp(-x1)*atan(x2/2)", "x1/(x2*x1)", "(-x1)^2", "x1*-x2"] {
            let e = parse_expr(text, None).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_expr(&printed, None).unwrap(), e, "{text} -> {printed}");
        }
    }

    #[test]
    fn taylor_of_product() {
        let p = Program::compile(&parse_expr("x1*x2", Some(2)).unwrap());
        let s = Shape::new(2, 2);
        let mut out = vec![0.0; s.len()];
        p.taylor_with(&[1.0, 2.0], s, &mut Vec::new(), &mut out).unwrap();
        assert_eq!(out, vec![2.0, 2.0, 1.0, 0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let p = Program::compile(&parse_expr("3.5", Some(2)).unwrap());
        let s = Shape::new(2, 3);
        let mut out = vec![1.0; s.len()];
        p.taylor_with(&[0.3, 0.1], s, &mut Vec::new(), &mut out).unwrap();
        assert_eq!(out[0], 3.5);
        assert!(out[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn division_by_zero_is_nonsmooth() {
        let p = Program::compile(&parse_expr("1/x1", Some(1)).unwrap());
        assert!(matches!(p.eval(&[0.0]), Err(Error::NonSmoothPoint(_))));
        let s = Shape::new(1, 1);
        let mut out = vec![0.0; 2];
        assert!(matches!(p.taylor_with(&[0.0], s, &mut Vec::new(), &mut out), Err(Error::NonSmoothPoint(_))));
    }
}
