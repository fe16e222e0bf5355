//! Truncated Taylor arithmetic for holomorphic expression trees.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{ComplexExpr, Node};

type C = Complex64;

/// Coefficients `c[k]` of `sum c[k] t^k`, truncated at a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub c: Vec<C>,
}

impl Series {
    pub fn constant(v: C, order: usize) -> Self {
        let mut c = vec![C::new(0.0, 0.0); order + 1];
        c[0] = v;
        Series { c }
    }

    /// The series of `x + t`.
    pub fn variable(x: C, order: usize) -> Self {
        let mut s = Self::constant(x, order);
        if order >= 1 {
            s.c[1] = C::new(1.0, 0.0);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// `k!` times the coefficient of `t^k`.
    pub fn derivative(&self, k: usize) -> C {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.c[k] * f
    }

    fn map2(&self, o: &Self, f: impl Fn(C, C) -> C) -> Self {
        Series { c: self.c.iter().zip(&o.c).map(|(a, b)| f(*a, *b)).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.map2(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.map2(o, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        Series { c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, s: C) -> Self {
        Series { c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.c.len();
        let mut c = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Series { c }
    }

    pub fn recip(&self) -> Option<Self> {
        let a0 = self.c[0];
        if a0 == C::new(0.0, 0.0) {
            return None;
        }
        let n = self.c.len();
        let mut r = vec![C::new(0.0, 0.0); n];
        r[0] = C::new(1.0, 0.0) / a0;
        for k in 1..n {
            let mut s = C::new(0.0, 0.0);
            for j in 1..=k {
                s += self.c[j] * r[k - j];
            }
            r[k] = -s / a0;
        }
        Some(Series { c: r })
    }

    pub fn powi(&self, n: i32) -> Option<Self> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Series::constant(C::new(1.0, 0.0), self.order());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            e >>= 1;
        }
        Some(acc)
    }

    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut e = vec![C::new(0.0, 0.0); n];
        e[0] = self.c[0].exp();
        for k in 1..n {
            let mut s = C::new(0.0, 0.0);
            for j in 1..=k {
                s += self.c[j] * e[k - j] * j as f64;
            }
            e[k] = s / k as f64;
        }
        Series { c: e }
    }

    /// Principal logarithm; `None` when the constant term vanishes.
    pub fn log(&self) -> Option<Self> {
        let a0 = self.c[0];
        if a0 == C::new(0.0, 0.0) {
            return None;
        }
        let n = self.c.len();
        let mut l = vec![C::new(0.0, 0.0); n];
        l[0] = crate::expr::principal_log(a0);
        for k in 1..n {
            let mut s = self.c[k] * k as f64;
            for j in 1..k {
                s -= l[j] * self.c[k - j] * j as f64;
            }
            l[k] = s / (a0 * k as f64);
        }
        Some(Series { c: l })
    }
}

/// Evaluate `expr` with `z` replaced by the series `arg`.
pub fn eval_series(expr: &ComplexExpr, arg: &Series) -> Result<Series> {
    let order = arg.order();
    let pole = |what: &str| Error::Pole { z: arg.c[0], subtree: format!("{what} in {expr}") };
    Ok(match expr.node() {
        Node::Const(v) => Series::constant(*v, order),
        Node::Z => arg.clone(),
        Node::ConjZ | Node::Conj(_) => {
            return Err(Error::InvalidArgument(format!(
                "Taylor arithmetic needs a holomorphic tree, got `{expr}`"
            )))
        }
        Node::Add(a, b) => eval_series(a, arg)?.add(&eval_series(b, arg)?),
        Node::Sub(a, b) => eval_series(a, arg)?.sub(&eval_series(b, arg)?),
        Node::Mul(a, b) => eval_series(a, arg)?.mul(&eval_series(b, arg)?),
        Node::Div(a, b) => {
            let r = eval_series(b, arg)?.recip().ok_or_else(|| pole("division"))?;
            eval_series(a, arg)?.mul(&r)
        }
        Node::Neg(a) => eval_series(a, arg)?.neg(),
        Node::Powi(a, n) => eval_series(a, arg)?.powi(*n).ok_or_else(|| pole("negative power"))?,
        Node::Exp(a) => eval_series(a, arg)?.exp(),
        Node::Log(a) => eval_series(a, arg)?.log().ok_or_else(|| pole("log"))?,
        Node::Mobius { a, b, c, d, arg: inner } => {
            let w = eval_series(inner, arg)?;
            let num = w.scale(*a).add(&Series::constant(*b, order));
            let den = w.scale(*c).add(&Series::constant(*d, order));
            num.mul(&den.recip().ok_or_else(|| pole("Mobius"))?)
        }
        Node::Atomic(inner) => {
            let w = eval_series(inner, arg)?;
            let one = Series::constant(C::new(1.0, 0.0), order);
            let den = one.sub(&w).recip().ok_or_else(|| pole("atomic inner"))?;
            one.add(&w).mul(&den).neg().exp()
        }
        Node::Poly(p) => {
            if !p.is_holomorphic() {
                return Err(Error::InvalidArgument(
                    "Taylor arithmetic needs a holomorphic polynomial".into(),
                ));
            }
            let w = arg
                .sub(&Series::constant(p.center(), order))
                .scale(C::new(1.0 / p.scale(), 0.0));
            let mut acc = Series::constant(C::new(0.0, 0.0), order);
            for a in (0..=p.degree()).rev() {
                acc = acc.mul(&w).add(&Series::constant(p.coeff(a, 0), order));
            }
            acc
        }
    })
}

/// Derivatives `f(x), f'(x), ..., f^(n)(x)` of a holomorphic tree.
pub fn derivatives(expr: &ComplexExpr, x: C, n: usize) -> Result<Vec<C>> {
    let s = eval_series(expr, &Series::variable(x, n))?;
    Ok((0..=n).map(|k| s.derivative(k)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_log_roundtrip() {
        let x = Series::variable(C::new(0.3, 0.2), 8);
        let y = x.exp().log().unwrap();
        for (a, b) in x.c.iter().zip(&y.c) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn derivatives_of_power() {
        let e = ComplexExpr::parse("pow(z,5)").unwrap();
        let d = derivatives(&e, C::new(2.0, 0.0), 6).unwrap();
        let want = [32.0, 80.0, 160.0, 240.0, 240.0, 120.0, 0.0];
        for (a, b) in d.iter().zip(want) {
            assert!((a - C::new(b, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn derivatives_of_inverse() {
        let e = ComplexExpr::parse("div(1, sub(2, z))").unwrap();
        let d = derivatives(&e, C::new(0.0, 0.0), 5).unwrap();
        let mut f = 1.0;
        for (k, v) in d.iter().enumerate() {
            if k > 0 {
                f *= k as f64;
            }
            assert!((v.re - f / 2f64.powi(k as i32 + 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn conj_rejected() {
        let e = ComplexExpr::parse("zbar").unwrap();
        assert!(derivatives(&e, C::new(0.0, 0.0), 2).is_err());
    }
}
