//! Polynomials in z and conj(z).

use num_complex::Complex64;

/// A polynomial `sum c_ab * w^a * conj(w)^b` over `a + b <= degree`, in the
/// affinely rescaled variable `w = (z - center) / scale`.
///
/// The rescaling keeps the monomials of order one on the fitting domain; the
/// polynomial space is the same as that of plain `z^a conj(z)^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyZZbar {
    degree: usize,
    center: Complex64,
    scale: f64,
    coeffs: Vec<Complex64>,
}

pub fn monomial_count(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

fn index(a: usize, b: usize) -> usize {
    let t = a + b;
    t * (t + 1) / 2 + b
}

impl PolyZZbar {
    /// Monomial exponents `(a, b)` in storage order.
    pub fn monomials(degree: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(monomial_count(degree));
        for t in 0..=degree {
            for b in 0..=t {
                out.push((t - b, b));
            }
        }
        out
    }

    pub fn zero(degree: usize, center: Complex64, scale: f64) -> Self {
        Self::new(degree, center, scale, vec![Complex64::new(0.0, 0.0); monomial_count(degree)])
    }

    pub fn new(degree: usize, center: Complex64, scale: f64, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), monomial_count(degree), "coefficient table size");
        assert!(scale > 0.0 && scale.is_finite(), "scale must be positive");
        PolyZZbar { degree, center, scale, coeffs }
    }

    /// Plain polynomial in `z` and `conj(z)` (center 0, scale 1).
    pub fn standard(degree: usize, coeffs: Vec<Complex64>) -> Self {
        Self::new(degree, Complex64::new(0.0, 0.0), 1.0, coeffs)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, a: usize, b: usize) -> Complex64 {
        if a + b > self.degree {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[index(a, b)]
    }

    pub fn set_coeff(&mut self, a: usize, b: usize, c: Complex64) {
        self.coeffs[index(a, b)] = c;
    }

    pub fn is_holomorphic(&self) -> bool {
        Self::monomials(self.degree)
            .iter()
            .zip(&self.coeffs)
            .all(|(&(_, b), c)| b == 0 || *c == Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let w = (z - self.center) / self.scale;
        let wb = w.conj();
        let d = self.degree;
        let mut pw = vec![Complex64::new(1.0, 0.0); d + 1];
        let mut pwb = vec![Complex64::new(1.0, 0.0); d + 1];
        for k in 1..=d {
            pw[k] = pw[k - 1] * w;
            pwb[k] = pwb[k - 1] * wb;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for t in 0..=d {
            for b in 0..=t {
                acc += self.coeffs[index(t - b, b)] * pw[t - b] * pwb[b];
            }
        }
        acc
    }

    /// Holomorphic Wirtinger derivative.
    pub fn d(&self) -> Self {
        self.differentiate(false)
    }

    /// Anti-holomorphic Wirtinger derivative.
    pub fn dbar(&self) -> Self {
        self.differentiate(true)
    }

    fn differentiate(&self, bar: bool) -> Self {
        let nd = self.degree.saturating_sub(1);
        let mut out = Self::zero(nd, self.center, self.scale);
        if self.degree == 0 {
            return out;
        }
        for (a, b) in Self::monomials(self.degree) {
            let c = self.coeff(a, b);
            if bar && b > 0 {
                out.set_coeff(a, b - 1, c * (b as f64) / self.scale);
            } else if !bar && a > 0 {
                out.set_coeff(a - 1, b, c * (a as f64) / self.scale);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_matches_monomial_sum() {
        let mut p = PolyZZbar::zero(3, c(0.5, -0.25), 2.0);
        p.set_coeff(2, 1, c(1.0, 2.0));
        p.set_coeff(0, 3, c(-0.5, 0.0));
        p.set_coeff(0, 0, c(0.0, 1.0));
        let z = c(0.3, 0.7);
        let w = (z - c(0.5, -0.25)) / 2.0;
        let want = c(1.0, 2.0) * w * w * w.conj() - 0.5 * w.conj().powi(3) + c(0.0, 1.0);
        assert!((p.eval(z) - want).norm() < 1e-14);
    }

    #[test]
    fn derivatives_of_abs_square() {
        let mut p = PolyZZbar::zero(2, c(0.0, 0.0), 1.0);
        p.set_coeff(1, 1, c(1.0, 0.0));
        let z = c(0.4, -1.1);
        assert!((p.dbar().eval(z) - z).norm() < 1e-15);
        assert!((p.d().eval(z) - z.conj()).norm() < 1e-15);
        assert!(!p.is_holomorphic());
        assert!(p.d().d().eval(z).norm() < 1e-15);
    }
}
