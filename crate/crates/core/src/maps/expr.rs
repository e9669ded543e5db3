//! Arithmetic expressions over `x`, `y`, `t`.
//!
//! ```text
//! map     = expr "," expr "," expr
//! expr    = term { ("+" | "-") term }
//! term    = unary { ("*" | "/") unary }
//! unary   = ("+" | "-") unary | power
//! power   = atom [ "^" unary ]            (right associative)
//! atom    = number | "x" | "y" | "t" | "pi" | func "(" expr ")" | "(" expr ")"
//! func    = "sin" | "cos" | "exp" | "log" | "sqrt" | "abs"
//! ```

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn eval(self, a: f64) -> f64 {
        match self {
            Func::Sin => libm::sin(a),
            Func::Cos => libm::cos(a),
            Func::Exp => libm::exp(a),
            Func::Log => libm::log(a),
            Func::Sqrt => libm::sqrt(a),
            Func::Abs => libm::fabs(a),
        }
    }
}

/// Expression tree. Variables are indexed 0 = x, 1 = y, 2 = t.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(f64),
    Var(u8),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn eval(&self, v: [f64; 3]) -> f64 {
        match self {
            Node::Num(c) => *c,
            Node::Var(i) => v[*i as usize],
            Node::Neg(a) => -a.eval(v),
            Node::Add(a, b) => a.eval(v) + b.eval(v),
            Node::Sub(a, b) => a.eval(v) - b.eval(v),
            Node::Mul(a, b) => a.eval(v) * b.eval(v),
            Node::Div(a, b) => a.eval(v) / b.eval(v),
            Node::Pow(a, b) => pow(a.eval(v), b.eval(v)),
            Node::Call(f, a) => f.eval(a.eval(v)),
        }
    }

    pub fn uses(&self, var: u8) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) | Node::Call(_, a) => a.uses(var),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.uses(var) || b.uses(var)
            }
        }
    }

    fn is_const(&self) -> bool {
        !(0..3).any(|v| self.uses(v))
    }

    /// Symbolic partial derivative with light constant folding.
    pub fn derivative(&self, var: u8) -> Node {
        use Node::*;
        match self {
            Num(_) => Num(0.0),
            Var(i) => Num(if *i == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.derivative(var)),
            Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Mul(a, b) => add(mul(a.derivative(var), (**b).clone()), mul((**a).clone(), b.derivative(var))),
            Div(a, b) => div(
                sub(mul(a.derivative(var), (**b).clone()), mul((**a).clone(), b.derivative(var))),
                mul((**b).clone(), (**b).clone()),
            ),
            Pow(a, b) => {
                if !b.uses(var) {
                    // d(a^c) = c a^(c−1) a'
                    let c = (**b).clone();
                    let cm1 = sub(c.clone(), Num(1.0));
                    mul(mul(c, pow_node((**a).clone(), cm1)), a.derivative(var))
                } else {
                    // d(a^b) = a^b (b' log a + b a'/a)
                    let inner = add(
                        mul(b.derivative(var), Call(Func::Log, a.clone())),
                        div(mul((**b).clone(), a.derivative(var)), (**a).clone()),
                    );
                    mul(self.clone(), inner)
                }
            }
            Call(f, a) => {
                let da = a.derivative(var);
                let outer = match f {
                    Func::Sin => Call(Func::Cos, a.clone()),
                    Func::Cos => neg(Call(Func::Sin, a.clone())),
                    Func::Exp => self.clone(),
                    Func::Log => div(Num(1.0), (**a).clone()),
                    Func::Sqrt => div(Num(0.5), self.clone()),
                    Func::Abs => div((**a).clone(), self.clone()),
                };
                mul(outer, da)
            }
        }
    }
}

/// `a^b` with exact small integer powers so that e.g. `x^2` at negative `x` is finite.
fn pow(a: f64, b: f64) -> f64 {
    if b == libm::trunc(b) && libm::fabs(b) <= 64.0 {
        let n = b as i32;
        let mut r = 1.0;
        for _ in 0..n.unsigned_abs() {
            r *= a;
        }
        if n < 0 {
            1.0 / r
        } else {
            r
        }
    } else {
        libm::pow(a, b)
    }
}

fn folded(n: Node) -> Node {
    if n.is_const() {
        if let Node::Num(_) = n {
            return n;
        }
        return Node::Num(n.eval([0.0; 3]));
    }
    n
}

fn is_num(n: &Node, c: f64) -> bool {
    matches!(n, Node::Num(v) if *v == c)
}

fn neg(a: Node) -> Node {
    folded(Node::Neg(Box::new(a)))
}

fn add(a: Node, b: Node) -> Node {
    if is_num(&a, 0.0) {
        return b;
    }
    if is_num(&b, 0.0) {
        return a;
    }
    folded(Node::Add(Box::new(a), Box::new(b)))
}

fn sub(a: Node, b: Node) -> Node {
    if is_num(&b, 0.0) {
        return a;
    }
    if is_num(&a, 0.0) {
        return neg(b);
    }
    folded(Node::Sub(Box::new(a), Box::new(b)))
}

fn mul(a: Node, b: Node) -> Node {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        return Node::Num(0.0);
    }
    if is_num(&a, 1.0) {
        return b;
    }
    if is_num(&b, 1.0) {
        return a;
    }
    folded(Node::Mul(Box::new(a), Box::new(b)))
}

fn div(a: Node, b: Node) -> Node {
    if is_num(&a, 0.0) {
        return Node::Num(0.0);
    }
    if is_num(&b, 1.0) {
        return a;
    }
    folded(Node::Div(Box::new(a), Box::new(b)))
}

fn pow_node(a: Node, b: Node) -> Node {
    if is_num(&b, 1.0) {
        return a;
    }
    if is_num(&b, 0.0) {
        return Node::Num(1.0);
    }
    folded(Node::Pow(Box::new(a), Box::new(b)))
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(c) => write!(f, "{c:?}"),
            Node::Var(i) => f.write_str(["x", "y", "t"][*i as usize]),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Node::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

/// A parsed expression that remembers its source text (serialized as that text).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Expr {
    src: String,
    node: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser::new(src);
        let node = p.expr()?;
        p.expect_end()?;
        Ok(Expr { src: src.to_string(), node })
    }

    /// Parse an expression restricted to the single variable `x`.
    pub fn parse_in_x(src: &str) -> Result<Self> {
        let e = Expr::parse(src)?;
        for (v, name) in [(1u8, "y"), (2u8, "t")] {
            if e.node.uses(v) {
                let offset = src.find(name).unwrap_or(0);
                return Err(Error::UnknownName { name: name.to_string(), offset });
            }
        }
        Ok(e)
    }

    pub fn from_node(node: Node) -> Self {
        Expr { src: node.to_string(), node }
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    #[inline]
    pub fn eval(&self, v: [f64; 3]) -> f64 {
        self.node.eval(v)
    }

    pub fn derivative(&self, var: u8) -> Expr {
        Expr::from_node(self.node.derivative(var))
    }
}

impl TryFrom<String> for Expr {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Expr::parse(&s)
    }
}

impl From<Expr> for String {
    fn from(e: Expr) -> String {
        e.src
    }
}

/// Parse `"fx, fy, ft"`.
pub fn parse_triple(src: &str) -> Result<[Expr; 3]> {
    let mut p = Parser::new(src);
    let mut out: Vec<Expr> = Vec::with_capacity(3);
    for k in 0..3 {
        let start = p.pos;
        let node = p.expr()?;
        let end = p.pos;
        out.push(Expr { src: src[start..end].trim().to_string(), node });
        if k < 2 {
            p.expect_byte(b',', "`,`")?;
        }
    }
    p.expect_end()?;
    let [a, b, c]: [Expr; 3] = out.try_into().map_err(|_| Error::invalid("three expressions"))?;
    Ok([a, b, c])
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, bytes: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn err(&self, expected: &str) -> Error {
        Error::Parse { offset: self.pos, expected: expected.to_string() }
    }

    fn expect_byte(&mut self, b: u8, what: &str) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.err("end of input")),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_byte(b')', "`)`")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(self.err("expression")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let b = self.bytes;
        let mut i = self.pos;
        while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
            i += 1;
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            if j < b.len() && b[j].is_ascii_digit() {
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        match self.src[start..i].parse::<f64>() {
            Ok(v) => {
                self.pos = i;
                Ok(Node::Num(v))
            }
            Err(_) => Err(self.err("number")),
        }
    }

    fn ident(&mut self) -> Result<Node> {
        let start = self.pos;
        let b = self.bytes;
        let mut i = self.pos;
        while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
            i += 1;
        }
        let name = &self.src[start..i];
        self.pos = i;
        match name {
            "x" => return Ok(Node::Var(0)),
            "y" => return Ok(Node::Var(1)),
            "t" => return Ok(Node::Var(2)),
            "pi" => return Ok(Node::Num(core::f64::consts::PI)),
            _ => {}
        }
        match Func::from_name(name) {
            Some(f) => {
                self.expect_byte(b'(', "`(` after function name")?;
                let arg = self.expr()?;
                self.expect_byte(b')', "`)`")?;
                Ok(Node::Call(f, Box::new(arg)))
            }
            None => Err(Error::UnknownName { name: name.to_string(), offset: start }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, v: [f64; 3]) -> f64 {
        Expr::parse(s).unwrap().eval(v)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2*3", [0.0; 3]), 7.0);
        assert_eq!(ev("2^3^2", [0.0; 3]), 512.0);
        assert_eq!(ev("-x^2", [3.0, 0.0, 0.0]), -9.0);
        assert_eq!(ev("2^-1", [0.0; 3]), 0.5);
        assert_eq!(ev("(x - y) / t", [5.0, 1.0, 2.0]), 2.0);
        assert_eq!(ev("1.5e2 + .5", [0.0; 3]), 150.5);
        assert!((ev("sqrt(abs(-4)) + log(exp(1)) + sin(0) + cos(0)", [0.0; 3]) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse_triple("x, y, ").unwrap_err(), Error::Parse { offset: 6, expected: "expression".into() });
        assert_eq!(
            Expr::parse("x + foo").unwrap_err(),
            Error::UnknownName { name: "foo".into(), offset: 4 }
        );
        assert!(matches!(Expr::parse("(x"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(Expr::parse("x y"), Err(Error::Parse { offset: 2, .. })));
        assert!(Expr::parse_in_x("x + t").is_err());
    }

    #[test]
    fn derivatives_match_central_differences() {
        let cases = ["x^3 - 2*x*y + t", "sin(x*y) * exp(t)", "sqrt(x^2 + y^2 + 1) / (1 + t^2)", "x^y", "log(abs(x) + 2)"];
        let p = [0.7, 1.3, -0.4];
        for s in cases {
            let e = Expr::parse(s).unwrap();
            for var in 0..3u8 {
                let d = e.derivative(var).eval(p);
                let h = 1e-6;
                let (mut a, mut b) = (p, p);
                a[var as usize] += h;
                b[var as usize] -= h;
                let fd = (e.eval(a) - e.eval(b)) / (2.0 * h);
                assert!((d - fd).abs() < 1e-7 * (1.0 + d.abs()), "{s} d/d{var}: {d} vs {fd}");
            }
        }
    }

    #[test]
    fn triple_sources_are_trimmed() {
        let [a, b, c] = parse_triple(" 2*x ,2*y, 4*t").unwrap();
        assert_eq!((a.source(), b.source(), c.source()), ("2*x", "2*y", "4*t"));
    }
}
