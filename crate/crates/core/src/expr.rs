//! Expression trees in `z` and `conj(z)` with exact Wirtinger calculus.
//!
//! Text syntax (prefix, functional):
//!
//! ```text
//! expr   := number | name | name "(" expr ("," expr)* ")"
//! number := decimal literal, optionally signed, e.g. 2, -0.5, 1e-3
//! names  := z | zbar | i | pi | e | S            (S alone means S(z))
//! calls  := add(a,b,..) sub(a,b) mul(a,b,..) div(a,b) neg(a) pow(a,n)
//!           exp(a) log(a) sqrt(a) conj(a) abs2(a) S(a) c(re,im)
//!           mobius(a,b,c,d,x)       (a*x+b)/(c*x+d) with constant a..d
//! ```
//!
//! `S(w) = exp(-(1+w)/(1-w))` is the atomic inner function. `log` is the
//! principal branch with its cut on the negative real axis; `sqrt(a)` is
//! sugar for `exp(mul(0.5, log(a)))`.

use std::fmt;
use std::ops;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::PolyZZbar;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexExpr(Arc<Node>);

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(C),
    Z,
    ConjZ,
    Add(ComplexExpr, ComplexExpr),
    Sub(ComplexExpr, ComplexExpr),
    Mul(ComplexExpr, ComplexExpr),
    Div(ComplexExpr, ComplexExpr),
    Neg(ComplexExpr),
    Powi(ComplexExpr, i32),
    Exp(ComplexExpr),
    Log(ComplexExpr),
    Conj(ComplexExpr),
    /// `(a*arg + b) / (c*arg + d)`
    Mobius { a: C, b: C, c: C, d: C, arg: ComplexExpr },
    /// `S(arg)` with `S(w) = exp(-(1+w)/(1-w))`
    Atomic(ComplexExpr),
    Poly(Arc<PolyZZbar>),
}

impl fmt::Debug for ComplexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn wrap(n: Node) -> ComplexExpr {
    ComplexExpr(Arc::new(n))
}

impl ComplexExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: C) -> Self {
        wrap(Node::Const(c))
    }

    pub fn real(x: f64) -> Self {
        Self::constant(C::new(x, 0.0))
    }

    pub fn z() -> Self {
        wrap(Node::Z)
    }

    pub fn zbar() -> Self {
        wrap(Node::ConjZ)
    }

    /// The atomic inner function `S(z)`.
    pub fn s() -> Self {
        Self::z().atomic()
    }

    pub fn poly(p: PolyZZbar) -> Self {
        if p.coeffs().iter().all(|c| *c == ZERO) {
            return Self::constant(ZERO);
        }
        wrap(Node::Poly(Arc::new(p)))
    }

    pub fn as_const(&self) -> Option<C> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, v: C) -> bool {
        self.as_const() == Some(v)
    }

    pub fn add(&self, o: &Self) -> Self {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Self::constant(a + b),
            (Some(a), _) if a == ZERO => o.clone(),
            (_, Some(b)) if b == ZERO => self.clone(),
            _ => wrap(Node::Add(self.clone(), o.clone())),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Self::constant(a - b),
            (Some(a), _) if a == ZERO => o.neg(),
            (_, Some(b)) if b == ZERO => self.clone(),
            _ => wrap(Node::Sub(self.clone(), o.clone())),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Self::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == ZERO => Self::constant(ZERO),
            (Some(a), _) if a == ONE => o.clone(),
            (_, Some(b)) if b == ONE => self.clone(),
            _ => wrap(Node::Mul(self.clone(), o.clone())),
        }
    }

    pub fn div(&self, o: &Self) -> Self {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) if b != ZERO => Self::constant(a / b),
            (Some(a), _) if a == ZERO => Self::constant(ZERO),
            (_, Some(b)) if b == ONE => self.clone(),
            _ => wrap(Node::Div(self.clone(), o.clone())),
        }
    }

    pub fn neg(&self) -> Self {
        match self.node() {
            Node::Const(c) => Self::constant(-*c),
            Node::Neg(inner) => inner.clone(),
            _ => wrap(Node::Neg(self.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        match (n, self.as_const()) {
            (0, _) => Self::constant(ONE),
            (1, _) => self.clone(),
            (_, Some(c)) if !(c == ZERO && n < 0) => Self::constant(c.powi(n)),
            _ => wrap(Node::Powi(self.clone(), n)),
        }
    }

    pub fn exp(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.exp()),
            None => wrap(Node::Exp(self.clone())),
        }
    }

    pub fn log(&self) -> Self {
        match self.as_const() {
            Some(c) if c != ZERO => Self::constant(c.ln()),
            _ => wrap(Node::Log(self.clone())),
        }
    }

    pub fn sqrt(&self) -> Self {
        self.log().mul(&Self::real(0.5)).exp()
    }

    pub fn conj(&self) -> Self {
        match self.node() {
            Node::Const(c) => Self::constant(c.conj()),
            Node::Z => Self::zbar(),
            Node::ConjZ => Self::z(),
            Node::Conj(inner) => inner.clone(),
            _ => wrap(Node::Conj(self.clone())),
        }
    }

    /// `self * conj(self)`
    pub fn abs2(&self) -> Self {
        self.mul(&self.conj())
    }

    pub fn mobius(&self, a: C, b: C, c: C, d: C) -> Self {
        wrap(Node::Mobius { a, b, c, d, arg: self.clone() })
    }

    /// `S(self)`
    pub fn atomic(&self) -> Self {
        wrap(Node::Atomic(self.clone()))
    }

    /// True when the tree contains neither `conj(z)` nor conjugation nor a
    /// polynomial with conj terms. Such trees are holomorphic off their poles.
    pub fn is_conj_free(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Z => true,
            Node::ConjZ | Node::Conj(_) => false,
            Node::Poly(p) => p.is_holomorphic(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.is_conj_free() && b.is_conj_free()
            }
            Node::Neg(a) | Node::Powi(a, _) | Node::Exp(a) | Node::Log(a) | Node::Atomic(a) => {
                a.is_conj_free()
            }
            Node::Mobius { arg, .. } => arg.is_conj_free(),
        }
    }

    pub fn depth(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Z | Node::ConjZ | Node::Poly(_) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.depth().max(b.depth())
            }
            Node::Neg(a)
            | Node::Powi(a, _)
            | Node::Exp(a)
            | Node::Log(a)
            | Node::Conj(a)
            | Node::Atomic(a)
            | Node::Mobius { arg: a, .. } => 1 + a.depth(),
        }
    }

    pub fn eval(&self, z: C) -> Result<C> {
        let v = match self.node() {
            Node::Const(c) => *c,
            Node::Z => z,
            Node::ConjZ => z.conj(),
            Node::Add(a, b) => a.eval(z)? + b.eval(z)?,
            Node::Sub(a, b) => a.eval(z)? - b.eval(z)?,
            Node::Mul(a, b) => a.eval(z)? * b.eval(z)?,
            Node::Div(a, b) => {
                let den = b.eval(z)?;
                if den == ZERO {
                    return Err(self.pole(z));
                }
                a.eval(z)? / den
            }
            Node::Neg(a) => -a.eval(z)?,
            Node::Powi(a, n) => {
                let base = a.eval(z)?;
                if base == ZERO && *n < 0 {
                    return Err(self.pole(z));
                }
                base.powi(*n)
            }
            Node::Exp(a) => a.eval(z)?.exp(),
            Node::Log(a) => {
                let w = a.eval(z)?;
                if w == ZERO {
                    return Err(self.pole(z));
                }
                principal_log(w)
            }
            Node::Conj(a) => a.eval(z)?.conj(),
            Node::Mobius { a, b, c, d, arg } => {
                let w = arg.eval(z)?;
                let den = c * w + d;
                if den == ZERO {
                    return Err(self.pole(z));
                }
                (a * w + b) / den
            }
            Node::Atomic(a) => {
                let w = a.eval(z)?;
                if w == ONE {
                    return Err(self.pole(z));
                }
                atomic_inner(w)
            }
            Node::Poly(p) => p.eval(z),
        };
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(self.pole(z));
        }
        Ok(v)
    }

    fn pole(&self, z: C) -> Error {
        let mut s = self.to_string();
        if s.len() > 120 {
            let cut = (0..=117).rev().find(|&i| s.is_char_boundary(i)).unwrap_or(0);
            s.truncate(cut);
            s.push_str("...");
        }
        Error::Pole { z, subtree: s }
    }

    /// Holomorphic Wirtinger derivative `(d/dx - i d/dy) / 2`.
    pub fn d(&self) -> Self {
        self.wirtinger(false)
    }

    /// Anti-holomorphic Wirtinger derivative `(d/dx + i d/dy) / 2`.
    pub fn dbar(&self) -> Self {
        self.wirtinger(true)
    }

    /// Real partial derivative in x: `d + dbar`.
    pub fn dx(&self) -> Self {
        self.d().add(&self.dbar())
    }

    /// Real partial derivative in y: `i (d - dbar)`.
    pub fn dy(&self) -> Self {
        Self::constant(C::new(0.0, 1.0)).mul(&self.d().sub(&self.dbar()))
    }

    fn wirtinger(&self, bar: bool) -> Self {
        let zero = || Self::constant(ZERO);
        let one = || Self::constant(ONE);
        match self.node() {
            Node::Const(_) => zero(),
            Node::Z => {
                if bar {
                    zero()
                } else {
                    one()
                }
            }
            Node::ConjZ => {
                if bar {
                    one()
                } else {
                    zero()
                }
            }
            Node::Add(a, b) => a.wirtinger(bar).add(&b.wirtinger(bar)),
            Node::Sub(a, b) => a.wirtinger(bar).sub(&b.wirtinger(bar)),
            Node::Mul(a, b) => a.wirtinger(bar).mul(b).add(&a.mul(&b.wirtinger(bar))),
            Node::Div(a, b) => {
                let da = a.wirtinger(bar);
                let db = b.wirtinger(bar);
                if db.is_const(ZERO) {
                    return da.div(b);
                }
                da.mul(b).sub(&a.mul(&db)).div(&b.powi(2))
            }
            Node::Neg(a) => a.wirtinger(bar).neg(),
            Node::Powi(a, n) => Self::real(*n as f64)
                .mul(&a.powi(n - 1))
                .mul(&a.wirtinger(bar)),
            Node::Exp(a) => self.mul(&a.wirtinger(bar)),
            Node::Log(a) => a.wirtinger(bar).div(a),
            Node::Conj(a) => a.wirtinger(!bar).conj(),
            Node::Mobius { a, b, c, d, arg } => {
                let inner = arg.wirtinger(bar);
                if inner.is_const(ZERO) {
                    return zero();
                }
                let det = Self::constant(a * d - b * c);
                let den = Self::constant(*c).mul(arg).add(&Self::constant(*d));
                det.div(&den.powi(2)).mul(&inner)
            }
            Node::Atomic(a) => {
                let inner = a.wirtinger(bar);
                if inner.is_const(ZERO) {
                    return zero();
                }
                let factor = Self::real(-2.0).div(&one().sub(a).powi(2));
                self.mul(&factor).mul(&inner)
            }
            Node::Poly(p) => {
                if bar {
                    Self::poly(p.dbar())
                } else {
                    Self::poly(p.d())
                }
            }
        }
    }

    /// Parse the prefix syntax described in the module docs.
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { src, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}

pub fn principal_log(w: C) -> C {
    C::new(w.norm().ln(), w.im.atan2(w.re))
}

/// `S(w) = exp(-(1+w)/(1-w))`
pub fn atomic_inner(w: C) -> C {
    (-(ONE + w) / (ONE - w)).exp()
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl ops::$tr for ComplexExpr {
            type Output = ComplexExpr;
            fn $m(self, o: ComplexExpr) -> ComplexExpr {
                ComplexExpr::$m(&self, &o)
            }
        }
        impl ops::$tr<&ComplexExpr> for &ComplexExpr {
            type Output = ComplexExpr;
            fn $m(self, o: &ComplexExpr) -> ComplexExpr {
                ComplexExpr::$m(self, o)
            }
        }
        impl ops::$tr<f64> for ComplexExpr {
            type Output = ComplexExpr;
            fn $m(self, o: f64) -> ComplexExpr {
                ComplexExpr::$m(&self, &ComplexExpr::real(o))
            }
        }
        impl ops::$tr<ComplexExpr> for f64 {
            type Output = ComplexExpr;
            fn $m(self, o: ComplexExpr) -> ComplexExpr {
                ComplexExpr::$m(&ComplexExpr::real(self), &o)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl ops::Neg for ComplexExpr {
    type Output = ComplexExpr;
    fn neg(self) -> ComplexExpr {
        ComplexExpr::neg(&self)
    }
}

fn fmt_const(c: C) -> String {
    if c.im == 0.0 {
        format!("{:?}", c.re)
    } else {
        format!("c({:?},{:?})", c.re, c.im)
    }
}

impl fmt::Display for ComplexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{}", fmt_const(*c)),
            Node::Z => write!(f, "z"),
            Node::ConjZ => write!(f, "zbar"),
            Node::Add(a, b) => write!(f, "add({a},{b})"),
            Node::Sub(a, b) => write!(f, "sub({a},{b})"),
            Node::Mul(a, b) => write!(f, "mul({a},{b})"),
            Node::Div(a, b) => write!(f, "div({a},{b})"),
            Node::Neg(a) => write!(f, "neg({a})"),
            Node::Powi(a, n) => write!(f, "pow({a},{n})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Log(a) => write!(f, "log({a})"),
            Node::Conj(a) => write!(f, "conj({a})"),
            Node::Mobius { a, b, c, d, arg } => write!(
                f,
                "mobius({},{},{},{},{arg})",
                fmt_const(*a),
                fmt_const(*b),
                fmt_const(*c),
                fmt_const(*d)
            ),
            Node::Atomic(a) => write!(f, "S({a})"),
            Node::Poly(p) => write!(f, "poly<deg {}>", p.degree()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while let Some(ch) = self.peek() {
            if ch.is_whitespace() {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        if self.eat(ch) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{ch}'")))
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
            i += 1;
        }
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'-' || bytes[j] == b'+') {
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
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = i;
                Ok(v)
            }
            Err(_) => Err(Error::Parse { pos: start, msg: format!("bad number `{text}`") }),
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while let Some(ch) = self.peek() {
            if ch.is_ascii_alphanumeric() || ch == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_string()
    }

    fn expr(&mut self) -> Result<ComplexExpr> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(ch) if ch.is_ascii_digit() || ch == '.' || ch == '-' || ch == '+' => {
                Ok(ComplexExpr::real(self.number()?))
            }
            Some(ch) if ch.is_ascii_alphabetic() => {
                let name = self.ident();
                self.skip_ws();
                if self.peek() == Some('(') {
                    self.pos += 1;
                    self.call(&name, start)
                } else {
                    self.atom(&name, start)
                }
            }
            Some(ch) => Err(self.err(&format!("unexpected character '{ch}'"))),
        }
    }

    fn atom(&self, name: &str, start: usize) -> Result<ComplexExpr> {
        Ok(match name {
            "z" => ComplexExpr::z(),
            "zbar" => ComplexExpr::zbar(),
            "i" => ComplexExpr::constant(C::new(0.0, 1.0)),
            "pi" => ComplexExpr::real(std::f64::consts::PI),
            "e" => ComplexExpr::real(std::f64::consts::E),
            "S" => ComplexExpr::s(),
            _ => return Err(Error::Parse { pos: start, msg: format!("unknown name `{name}`") }),
        })
    }

    fn args(&mut self) -> Result<Vec<(usize, ComplexExpr)>> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let at = self.pos;
            out.push((at, self.expr()?));
            if self.eat(',') {
                continue;
            }
            self.expect(')')?;
            return Ok(out);
        }
    }

    fn call(&mut self, name: &str, start: usize) -> Result<ComplexExpr> {
        let args = self.args()?;
        let arity = |lo: usize, hi: usize| -> Result<()> {
            if args.len() < lo || args.len() > hi {
                Err(Error::Parse {
                    pos: start,
                    msg: format!("`{name}` takes {} argument(s), got {}", arity_text(lo, hi), args.len()),
                })
            } else {
                Ok(())
            }
        };
        let constant = |k: usize| -> Result<C> {
            let (at, e) = &args[k];
            e.as_const()
                .ok_or_else(|| Error::Parse { pos: *at, msg: "expected a constant".into() })
        };
        let e = |k: usize| args[k].1.clone();
        Ok(match name {
            "add" | "mul" => {
                arity(2, usize::MAX)?;
                let mut acc = e(0);
                for (_, x) in &args[1..] {
                    acc = if name == "add" { acc.add(x) } else { acc.mul(x) };
                }
                acc
            }
            "sub" => {
                arity(2, 2)?;
                e(0).sub(&e(1))
            }
            "div" => {
                arity(2, 2)?;
                e(0).div(&e(1))
            }
            "neg" => {
                arity(1, 1)?;
                e(0).neg()
            }
            "pow" => {
                arity(2, 2)?;
                let n = constant(1)?;
                if n.im != 0.0 || n.re.fract() != 0.0 || n.re.abs() > i32::MAX as f64 {
                    return Err(Error::Parse { pos: args[1].0, msg: "exponent must be an integer".into() });
                }
                e(0).powi(n.re as i32)
            }
            "exp" => {
                arity(1, 1)?;
                e(0).exp()
            }
            "log" => {
                arity(1, 1)?;
                e(0).log()
            }
            "sqrt" => {
                arity(1, 1)?;
                e(0).sqrt()
            }
            "conj" => {
                arity(1, 1)?;
                e(0).conj()
            }
            "abs2" => {
                arity(1, 1)?;
                e(0).abs2()
            }
            "S" => {
                arity(1, 1)?;
                e(0).atomic()
            }
            "c" => {
                arity(2, 2)?;
                let re = constant(0)?;
                let im = constant(1)?;
                if re.im != 0.0 || im.im != 0.0 {
                    return Err(Error::Parse { pos: start, msg: "c(re, im) takes real parts".into() });
                }
                ComplexExpr::constant(C::new(re.re, im.re))
            }
            "mobius" => {
                arity(5, 5)?;
                let (a, b, c, d) = (constant(0)?, constant(1)?, constant(2)?, constant(3)?);
                if a * d - b * c == ZERO {
                    return Err(Error::Parse { pos: start, msg: "degenerate Mobius map".into() });
                }
                e(4).mobius(a, b, c, d)
            }
            _ => return Err(Error::Parse { pos: start, msg: format!("unknown function `{name}`") }),
        })
    }
}

fn arity_text(lo: usize, hi: usize) -> String {
    if lo == hi {
        lo.to_string()
    } else if hi == usize::MAX {
        format!("at least {lo}")
    } else {
        format!("{lo}..{hi}")
    }
}

/// Samples along rays `z0 + r * dir` for decreasing radii.
#[derive(Clone, Debug)]
pub struct DirectionalProbe {
    pub z0: C,
    pub directions: Vec<C>,
    pub radii: Vec<f64>,
    /// `samples[d][k]` is the value at `z0 + radii[k] * directions[d]`.
    pub samples: Vec<Vec<Option<C>>>,
    pub annotations: Vec<String>,
    /// Last defined sample along each direction.
    pub tails: Vec<Option<C>>,
    /// Largest pairwise distance among the last `TAIL_LEN` samples.
    pub tail_spreads: Vec<f64>,
    pub tolerance: f64,
    pub limits_disagree: bool,
}

const TAIL_LEN: usize = 3;

impl DirectionalProbe {
    /// Largest distance between two directional tails.
    pub fn tail_gap(&self) -> f64 {
        let t: Vec<C> = self.tails.iter().flatten().copied().collect();
        let mut gap: f64 = 0.0;
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                gap = gap.max((t[i] - t[j]).norm());
            }
        }
        gap
    }
}

/// Probe a function along rays. Points where `f` fails are skipped and
/// annotated.
pub fn directional_limit_probe<F>(
    f: F,
    z0: C,
    directions: &[C],
    radii: &[f64],
    tolerance: f64,
) -> Result<DirectionalProbe>
where
    F: Fn(C) -> Result<C>,
{
    if directions.is_empty() || radii.is_empty() {
        return Err(Error::InvalidArgument("probe needs directions and radii".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|r| *r <= 0.0) {
        return Err(Error::InvalidArgument("radii must be positive and strictly decreasing".into()));
    }
    if directions.iter().any(|d| (d.norm() - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidArgument("directions must be unit complex numbers".into()));
    }
    let mut samples = Vec::with_capacity(directions.len());
    let mut annotations = Vec::new();
    for dir in directions {
        let mut row = Vec::with_capacity(radii.len());
        for &r in radii {
            let z = z0 + dir * r;
            match f(z) {
                Ok(v) => row.push(Some(v)),
                Err(e) => {
                    annotations.push(format!("skipped {z}: {e}"));
                    row.push(None);
                }
            }
        }
        samples.push(row);
    }
    let mut tails = Vec::new();
    let mut tail_spreads = Vec::new();
    for row in &samples {
        let tail: Vec<C> = row.iter().rev().flatten().take(TAIL_LEN).copied().collect();
        tails.push(tail.first().copied());
        let mut spread: f64 = 0.0;
        for i in 0..tail.len() {
            for j in i + 1..tail.len() {
                spread = spread.max((tail[i] - tail[j]).norm());
            }
        }
        tail_spreads.push(if tail.is_empty() { f64::INFINITY } else { spread });
    }
    let mut disagree = false;
    for i in 0..tails.len() {
        for j in i + 1..tails.len() {
            if let (Some(a), Some(b)) = (tails[i], tails[j]) {
                if (a - b).norm() > tolerance
                    && tail_spreads[i] <= tolerance
                    && tail_spreads[j] <= tolerance
                {
                    disagree = true;
                }
            }
        }
    }
    Ok(DirectionalProbe {
        z0,
        directions: directions.to_vec(),
        radii: radii.to_vec(),
        samples,
        annotations,
        tails,
        tail_spreads,
        tolerance,
        limits_disagree: disagree,
    })
}

pub fn directional_limit_probe_expr(
    expr: &ComplexExpr,
    z0: C,
    directions: &[C],
    radii: &[f64],
    tolerance: f64,
) -> Result<DirectionalProbe> {
    directional_limit_probe(|z| expr.eval(z), z0, directions, radii, tolerance)
}
