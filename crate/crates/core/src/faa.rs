//! Faa di Bruno's formula over ordered multi-indices (integer partitions).

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::ComplexExpr;
use crate::taylor::{eval_series, Series};

type C = Complex64;

/// Largest supported order; coefficients are exact `u128` values.
pub const MAX_ORDER: usize = 20;

/// Non-increasing tuple of positive integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedMultiIndex(Vec<usize>);

impl OrderedMultiIndex {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!("{parts:?} is not a non-increasing tuple of positive integers")));
        }
        Ok(OrderedMultiIndex(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// `|k|`.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of times `i` appears.
    pub fn repetition(&self, i: usize) -> usize {
        self.0.iter().filter(|&&p| p == i).count()
    }
}

impl fmt::Display for OrderedMultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if n > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order {n} exceeds the supported maximum {MAX_ORDER}")));
    }
    Ok(())
}

/// All ordered multi-indices with `|k| = n`, lexicographically descending.
pub fn enumerate(n: usize) -> Result<Vec<OrderedMultiIndex>> {
    check_order(n)?;
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<OrderedMultiIndex>) {
        if rest == 0 {
            out.push(OrderedMultiIndex(cur.clone()));
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    Ok(out)
}

fn factorial(n: usize) -> Result<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k)).ok_or_else(|| Error::Numerical(format!("{n}! overflows")))
}

/// `C^n_k = n! / (k_1! ... k_j! * prod_i n(k, i)!)`.
pub fn coefficient(n: usize, k: &OrderedMultiIndex) -> Result<u128> {
    check_order(n)?;
    if k.total() != n {
        return Err(Error::InvalidArgument(format!("|{k}| = {} differs from n = {n}", k.total())));
    }
    let mut den = 1u128;
    for &p in k.parts() {
        den = den.checked_mul(factorial(p)?).ok_or_else(|| Error::Numerical("coefficient overflows".into()))?;
    }
    let mut last = 0;
    for &p in k.parts() {
        if p != last {
            den = den
                .checked_mul(factorial(k.repetition(p))?)
                .ok_or_else(|| Error::Numerical("coefficient overflows".into()))?;
            last = p;
        }
    }
    let num = factorial(n)?;
    if num % den != 0 {
        return Err(Error::Numerical(format!("C^{n}_{k} is not an integer")));
    }
    Ok(num / den)
}

pub fn coefficient_table(n: usize) -> Result<Vec<(OrderedMultiIndex, u128)>> {
    enumerate(n)?
        .into_iter()
        .map(|k| {
            let c = coefficient(n, &k)?;
            Ok((k, c))
        })
        .collect()
}

/// `(f o g)^(n)(x)` from `f_derivs[j-1] = f^(j)(g(x))` and
/// `g_derivs[i-1] = g^(i)(x)`.
pub fn compose_derivative(f_derivs: &[C], g_derivs: &[C], n: usize) -> Result<C> {
    check_order(n)?;
    if f_derivs.len() < n || g_derivs.len() < n {
        return Err(Error::InvalidArgument(format!("need {n} derivatives of each function")));
    }
    let mut total = C::new(0.0, 0.0);
    for (k, c) in coefficient_table(n)? {
        let gk: C = k.parts().iter().map(|&p| g_derivs[p - 1]).product();
        total += f_derivs[k.len() - 1] * gk * c as f64;
    }
    Ok(total)
}

/// `(f o g)^(n)(x)` by truncated Taylor arithmetic through both trees.
pub fn taylor_oracle(f: &ComplexExpr, g: &ComplexExpr, x: C, n: usize) -> Result<C> {
    let inner = eval_series(g, &Series::variable(x, n))?;
    Ok(eval_series(f, &inner)?.derivative(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_four() {
        let got: Vec<String> = enumerate(4).unwrap().iter().map(|k| k.to_string()).collect();
        assert_eq!(got, ["(4)", "(3,1)", "(2,2)", "(2,1,1)", "(1,1,1,1)"]);
        let k = |v: Vec<usize>| OrderedMultiIndex::new(v).unwrap();
        assert_eq!(coefficient(4, &k(vec![2, 1, 1])).unwrap(), 6);
        assert_eq!(coefficient(4, &k(vec![2, 2])).unwrap(), 3);
        assert!(coefficient(4, &k(vec![2, 1])).is_err());
        assert!(enumerate(0).is_err());
        assert!(enumerate(21).is_err());
    }
}
