//! Smooth Bezout identities `sum x_j f_j = 1` on a compact set, by
//! polynomial approximation of `conj(f_j)/|f|^2` and by a partition of unity,
//! plus generalized division for functions vanishing near the common zeros.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::cauchy::domain_mask;
use crate::domain::{CompactDomain, RegionMask};
use crate::error::{Error, Result};
use crate::expr::ComplexExpr;
use crate::field::{NodeSet, SampledField};
use crate::parallel::{map_range, Execution};
use crate::poly::{monomial_count, PolyZZbar};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Nodes where `sum |f_j|` is at most this count as common zeros.
pub const ZERO_TOL: f64 = 1e-12;

/// Largest number of nodes used to set up a least-squares fit.
const FIT_SAMPLES: usize = 16_000;

#[derive(Clone, Debug)]
pub struct BezoutProblem {
    pub f: Vec<ComplexExpr>,
    mask: Arc<RegionMask>,
    samples: Vec<SampledField>,
    delta: f64,
    exec: Execution,
}

impl BezoutProblem {
    pub fn new(domain: &CompactDomain, f: Vec<ComplexExpr>, h: f64, exec: Execution) -> Result<Self> {
        Self::on_mask(domain_mask(domain, h)?, f, exec)
    }

    pub fn on_mask(mask: Arc<RegionMask>, f: Vec<ComplexExpr>, exec: Execution) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidArgument("need at least one function".into()));
        }
        let samples = f
            .iter()
            .map(|e| SampledField::from_fn(mask.clone(), NodeSet::Inside, exec, |_, z| e.eval(z)))
            .collect::<Result<Vec<_>>>()?;
        let delta = mask
            .inside_nodes()
            .into_iter()
            .map(|i| samples.iter().map(|s| s.values()[i].norm()).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        Ok(BezoutProblem { f, mask, samples, delta, exec })
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn mask(&self) -> &Arc<RegionMask> {
        &self.mask
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    /// Measured `min sum_j |f_j|` over Inside nodes.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn samples(&self) -> &[SampledField] {
        &self.samples
    }

    /// Grid sup norms `||f_j||`.
    pub fn sup_norms(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.max_abs()).collect()
    }

    fn abs_sum(&self, idx: usize) -> f64 {
        self.samples.iter().map(|s| s.values()[idx].norm()).sum()
    }

    fn common_zero_nodes(&self) -> Vec<C> {
        let g = self.mask.grid();
        self.mask.inside_nodes().into_iter().filter(|&i| self.abs_sum(i) <= ZERO_TOL).map(|i| g.point(i)).collect()
    }

    /// Max over Inside nodes of `|sum_j x_j f_j - target|`.
    pub fn residual(&self, x: &[SampledField], target: impl Fn(usize) -> C) -> f64 {
        self.mask
            .inside_nodes()
            .into_iter()
            .map(|i| {
                let s: C = x.iter().zip(&self.samples).map(|(a, f)| a.values()[i] * f.values()[i]).sum();
                (s - target(i)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// `q_j = conj(f_j) / sum_k |f_k|^2` on Inside nodes.
pub fn q_fields(p: &BezoutProblem) -> Result<Vec<SampledField>> {
    let zeros = p.common_zero_nodes();
    if !zeros.is_empty() {
        return Err(Error::precondition("the functions have a common zero (delta = 0)", zeros));
    }
    (0..p.n())
        .map(|j| {
            let fj = &p.samples[j];
            fj.map(|i, v| {
                let n2: f64 = p.samples.iter().map(|s| s.values()[i].norm_sqr()).sum();
                v.conj() / n2
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct PolyFit {
    pub poly: PolyZZbar,
    /// Max node error over every defined node of the fitted field.
    pub sup_error: f64,
}

/// Least-squares fit of `q` by a polynomial in `z, conj(z)` of the given
/// degree. Succeeds iff the measured sup error is at most `target_sup`.
pub fn weierstrass_fit(q: &SampledField, degree: usize, target_sup: f64) -> Result<PolyFit> {
    let fit = least_squares_fit(q, degree)?;
    if fit.sup_error > target_sup {
        return Err(Error::IncreaseDegree { degree, sup: fit.sup_error, target: target_sup });
    }
    Ok(fit)
}

/// Least-squares fit without a tolerance check.
pub fn least_squares_fit(q: &SampledField, degree: usize) -> Result<PolyFit> {
    let nodes = q.defined_nodes();
    let m = monomial_count(degree);
    if nodes.len() < m {
        return Err(Error::InvalidArgument(format!(
            "fit of degree {degree} needs {m} defined nodes, field has {}",
            nodes.len()
        )));
    }
    let g = *q.mask().grid();
    let pts: Vec<C> = nodes.iter().map(|&i| g.point(i)).collect();
    let (lo, hi) = pts.iter().fold((pts[0], pts[0]), |(lo, hi), z| {
        (C::new(lo.re.min(z.re), lo.im.min(z.im)), C::new(hi.re.max(z.re), hi.im.max(z.im)))
    });
    let center = (lo + hi) / 2.0;
    let scale = pts.iter().map(|z| (z - center).norm()).fold(0.0, f64::max).max(g.h);

    let stride = nodes.len().div_ceil(FIT_SAMPLES).max(1);
    let rows: Vec<usize> = (0..nodes.len()).step_by(stride).collect();
    let rows = if rows.len() < m { (0..nodes.len()).collect() } else { rows };
    let exps = PolyZZbar::monomials(degree);
    let basis = |z: C| -> Vec<C> {
        let w = (z - center) / scale;
        let wb = w.conj();
        exps.iter().map(|&(a, b)| w.powu(a as u32) * wb.powu(b as u32)).collect()
    };
    let mut a = DMatrix::<C>::zeros(rows.len(), m);
    let mut rhs = DVector::<C>::zeros(rows.len());
    for (r, &k) in rows.iter().enumerate() {
        for (col, v) in basis(pts[k]).into_iter().enumerate() {
            a[(r, col)] = v;
        }
        rhs[r] = q.values()[nodes[k]];
    }
    let qr = a.qr();
    let rmat = qr.r();
    let diag: Vec<f64> = (0..m).map(|i| rmat[(i, i)].norm()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    if dmax == 0.0 || diag.iter().any(|d| *d <= 1e-12 * dmax) {
        return Err(Error::RankDeficient { degree });
    }
    let qtb = qr.q().adjoint() * rhs;
    let coef = rmat.solve_upper_triangular(&qtb).ok_or(Error::RankDeficient { degree })?;
    let poly = PolyZZbar::new(degree, center, scale, coef.iter().cloned().collect());
    let sup_error = nodes.iter().zip(&pts).map(|(&i, &z)| (poly.eval(z) - q.values()[i]).norm()).fold(0.0, f64::max);
    Ok(PolyFit { poly, sup_error })
}

#[derive(Clone, Debug)]
pub struct PolyBezout {
    /// `x_j = p_j / sum_k p_k f_k`.
    pub x: Vec<ComplexExpr>,
    pub p: Vec<PolyZZbar>,
    pub degree: usize,
    /// The fit tolerance `1 / (2 sum ||f_j||)`.
    pub tolerance: f64,
    pub fit_errors: Vec<f64>,
    pub min_denominator: f64,
    pub residual: f64,
}

/// The polynomial route: raise the degree until every `q_j` is fitted to
/// `1 / (2 sum ||f_j||)`, then normalize.
pub fn bezout_poly(p: &BezoutProblem, max_degree: usize) -> Result<PolyBezout> {
    let q = q_fields(p)?;
    let tolerance = 1.0 / (2.0 * p.sup_norms().iter().sum::<f64>());
    let mut last = None;
    let mut found = None;
    for d in 0..=max_degree {
        let fits = match q.iter().map(|qj| least_squares_fit(qj, d)).collect::<Result<Vec<_>>>() {
            Ok(f) => f,
            Err(Error::RankDeficient { .. }) if d > 0 => break,
            Err(e) => return Err(e),
        };
        let worst = fits.iter().map(|f| f.sup_error).fold(0.0, f64::max);
        last = Some((d, worst));
        if worst <= tolerance {
            found = Some((d, fits));
            break;
        }
    }
    let (degree, fits) = match found {
        Some(f) => f,
        None => {
            let (degree, sup) = last.unwrap_or((0, f64::INFINITY));
            return Err(Error::IncreaseDegree { degree, sup, target: tolerance });
        }
    };
    let polys: Vec<PolyZZbar> = fits.iter().map(|f| f.poly.clone()).collect();
    let pe: Vec<ComplexExpr> = polys.iter().cloned().map(ComplexExpr::poly).collect();
    let den = pe.iter().zip(&p.f).fold(ComplexExpr::real(0.0), |acc, (pj, fj)| acc + pj * fj);
    let g = *p.mask.grid();
    let inside = p.mask.inside_nodes();
    let den_vals = map_range(p.exec, inside.len(), |k| {
        let i = inside[k];
        polys.iter().zip(&p.samples).map(|(pj, fj)| pj.eval(g.point(i)) * fj.values()[i]).sum::<C>()
    });
    let min_denominator = den_vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if min_denominator < 0.5 {
        let bad: Vec<C> =
            inside.iter().zip(&den_vals).filter(|(_, v)| v.norm() < 0.5).map(|(&i, _)| g.point(i)).collect();
        return Err(Error::precondition("|sum p_k f_k| < 1/2 although every fit met its tolerance", bad));
    }
    let x: Vec<ComplexExpr> = pe.iter().map(|pj| pj / &den).collect();
    let xs = x
        .iter()
        .map(|e| SampledField::from_fn(p.mask.clone(), NodeSet::Inside, p.exec, |_, z| e.eval(z)))
        .collect::<Result<Vec<_>>>()?;
    let residual = p.residual(&xs, |_| C::new(1.0, 0.0));
    Ok(PolyBezout { x, p: polys, degree, tolerance, fit_errors: fits.iter().map(|f| f.sup_error).collect(), min_denominator, residual })
}

/// `C^2` quintic smoothstep: 0 for `t <= 1/3`, 1 for `t >= 2/3`.
pub fn eta(t: f64) -> f64 {
    let s = (3.0 * t - 1.0).clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

/// `alpha_j = beta_j / sum_k beta_k` with `beta_j = eta(|f_j| / epsilon)`.
/// `epsilon` defaults to `delta / (2n)`.
pub fn partition_of_unity(p: &BezoutProblem, epsilon: Option<f64>) -> Result<Vec<SampledField>> {
    let eps = epsilon.unwrap_or(p.delta / (2.0 * p.n() as f64));
    partition_on(p, eps, |_| false)
}

fn partition_on(p: &BezoutProblem, eps: f64, skip: impl Fn(usize) -> bool + Sync) -> Result<Vec<SampledField>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    let n = p.n();
    let g = *p.mask.grid();
    let len = g.len();
    let betas: Vec<Option<Vec<f64>>> = map_range(p.exec, len, |i| {
        if !p.mask.is_inside(i) || skip(i) {
            return None;
        }
        Some(p.samples.iter().map(|s| eta(s.values()[i].norm() / eps)).collect())
    });
    let bad: Vec<C> = betas
        .iter()
        .enumerate()
        .filter(|(_, b)| b.as_ref().is_some_and(|b| b.iter().sum::<f64>() == 0.0))
        .map(|(i, _)| g.point(i))
        .collect();
    if !bad.is_empty() {
        return Err(Error::precondition(format!("no f_j exceeds epsilon/3 = {:.3e}", eps / 3.0), bad));
    }
    (0..n)
        .map(|j| {
            let mut vals = vec![ZERO; len];
            let mut defined = vec![false; len];
            for (i, b) in betas.iter().enumerate() {
                if p.mask.is_inside(i) {
                    defined[i] = true;
                    if let Some(b) = b {
                        vals[i] = C::new(b[j] / b.iter().sum::<f64>(), 0.0);
                    }
                }
            }
            SampledField::from_parts(p.mask.clone(), vals, defined)
        })
        .collect()
}

/// `x_j = alpha_j / f_j`, zero off the support of `alpha_j`.
pub fn bezout_pou(p: &BezoutProblem, epsilon: Option<f64>) -> Result<Vec<SampledField>> {
    let alpha = partition_of_unity(p, epsilon)?;
    divide_partition(p, &alpha, |_| C::new(1.0, 0.0))
}

fn divide_partition(p: &BezoutProblem, alpha: &[SampledField], f: impl Fn(usize) -> C) -> Result<Vec<SampledField>> {
    alpha
        .iter()
        .zip(&p.samples)
        .map(|(a, fj)| a.map(|i, v| if v == ZERO { ZERO } else { f(i) * v / fj.values()[i] }))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralizedDivision {
    #[serde(skip)]
    pub g: Vec<SampledField>,
    pub epsilon: f64,
    pub small_nodes: usize,
    pub vanish_nodes: usize,
    pub residual: f64,
}

/// `g_j` with `sum g_j f_j = f`, for `f` vanishing within `vanish_radius` of
/// the small set `{sum |f_j| <= epsilon}`. `epsilon` defaults to
/// `1e-8 * max sum |f_j|`.
pub fn generalized_division(
    f: &ComplexExpr,
    p: &BezoutProblem,
    vanish_radius: f64,
    epsilon: Option<f64>,
) -> Result<GeneralizedDivision> {
    let g = *p.mask.grid();
    let inside = p.mask.inside_nodes();
    let max_sum = inside.iter().map(|&i| p.abs_sum(i)).fold(0.0, f64::max);
    let eps = epsilon.unwrap_or(1e-8 * max_sum);
    let small: Vec<C> = inside.iter().filter(|&&i| p.abs_sum(i) <= eps).map(|&i| g.point(i)).collect();
    let fv = SampledField::from_fn(p.mask.clone(), NodeSet::Inside, p.exec, |_, z| f.eval(z))?;
    let in_v: Vec<bool> = map_range(p.exec, g.len(), |i| {
        p.mask.is_inside(i) && {
            let z = g.point(i);
            small.iter().any(|s| (z - s).norm() <= vanish_radius)
        }
    });
    let offending: Vec<C> =
        (0..g.len()).filter(|&i| in_v[i] && fv.values()[i].norm() > ZERO_TOL).map(|i| g.point(i)).collect();
    if !offending.is_empty() {
        return Err(Error::precondition("f does not vanish near the common small set", offending));
    }
    let eps_p = 3.0 * eps / (2.0 * p.n() as f64);
    let alpha = partition_on(p, eps_p, |i| in_v[i])?;
    let gs = divide_partition(p, &alpha, |i| fv.values()[i])?;
    let residual = p.residual(&gs, |i| fv.values()[i]);
    Ok(GeneralizedDivision {
        g: gs,
        epsilon: eps,
        small_nodes: small.len(),
        vanish_nodes: in_v.iter().filter(|&&v| v).count(),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_is_a_smoothstep() {
        assert_eq!(eta(0.0), 0.0);
        assert_eq!(eta(1.0 / 3.0), 0.0);
        assert_eq!(eta(2.0 / 3.0), 1.0);
        assert_eq!(eta(5.0), 1.0);
        assert!((eta(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singleton_constant() {
        let d = CompactDomain::unit_disk();
        let p = BezoutProblem::new(&d, vec![ComplexExpr::real(2.0)], 0.1, Execution::Sequential).unwrap();
        let q = q_fields(&p).unwrap();
        for i in q[0].defined_nodes() {
            assert!((q[0].values()[i] - 0.5).norm() < 1e-15);
        }
        let a = partition_of_unity(&p, None).unwrap();
        assert!(a[0].defined_nodes().iter().all(|&i| a[0].values()[i] == C::new(1.0, 0.0)));
    }
}
