//! The Koszul correction: from a smooth solution `x` of `sum x_j f_j = G`,
//! build the antisymmetric matrix `F`, solve `dbar H = F` (optionally
//! weighted by `g^4`) entrywise with the Pompeiu transform, and assemble the
//! holomorphic solution `u = w x - f H`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::bezout::{bezout_poly, BezoutProblem};
use crate::cauchy::{dbar_deviation, pompeiu_field_with, ser_slope, DbarReport, PompeiuPlan, QuadratureConfig};
use crate::domain::RegionMask;
use crate::error::{Error, Result};
use crate::expr::ComplexExpr;
use crate::field::{dbar_fd, NodeSet, SampledField};
use crate::parallel::map_range;
use crate::study::{loglog_slope, Slope};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Relative level below which `sum |f_j|` counts as zero for zero-extension.
pub const SMALL_SET_LEVEL: f64 = 1e-8;

/// Antisymmetric `n x n` matrix of fields; only `j < k` is stored.
#[derive(Clone, Debug)]
pub struct AntisymMatrixField {
    n: usize,
    upper: Vec<SampledField>,
}

fn upper_pos(n: usize, j: usize, k: usize) -> usize {
    j * n - j * (j + 1) / 2 + (k - j - 1)
}

impl AntisymMatrixField {
    pub fn from_upper(n: usize, upper: Vec<SampledField>) -> Result<Self> {
        if n == 0 || upper.len() != n * (n - 1) / 2 {
            return Err(Error::InvalidArgument(format!("{n}x{n} antisymmetric matrix needs {} entries", n * (n.max(1) - 1) / 2)));
        }
        Ok(AntisymMatrixField { n, upper })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries in order (0,1), (0,2), ..., (1,2), ...
    pub fn upper(&self) -> &[SampledField] {
        &self.upper
    }

    /// The stored field for `j < k`.
    pub fn entry(&self, j: usize, k: usize) -> &SampledField {
        assert!(j < k && k < self.n);
        &self.upper[upper_pos(self.n, j, k)]
    }

    /// Entry `(j, k)` at node `idx`.
    pub fn value(&self, j: usize, k: usize, idx: usize) -> C {
        match j.cmp(&k) {
            std::cmp::Ordering::Equal => ZERO,
            std::cmp::Ordering::Less => self.entry(j, k).values()[idx],
            std::cmp::Ordering::Greater => -self.entry(k, j).values()[idx],
        }
    }
}

/// The function data of a correction run, sampled on one mask.
struct Sampled {
    mask: Arc<RegionMask>,
    f: Vec<Vec<C>>,
    small: Vec<bool>,
}

impl Sampled {
    fn new(mask: Arc<RegionMask>, f: &[ComplexExpr], cfg: &QuadratureConfig) -> Result<Self> {
        let len = mask.grid().len();
        let g = *mask.grid();
        let f = f
            .iter()
            .map(|e| {
                crate::parallel::try_map_range(cfg.execution, len, |i| {
                    if mask.is_inside(i) {
                        e.eval(g.point(i))
                    } else {
                        Ok(ZERO)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sums: Vec<f64> = (0..len).map(|i| f.iter().map(|v| v[i].norm()).sum()).collect();
        let max = sums.iter().cloned().fold(0.0, f64::max);
        let small = (0..len).map(|i| mask.is_inside(i) && sums[i] <= SMALL_SET_LEVEL * max).collect();
        Ok(Sampled { mask, f, small })
    }

    fn abs_sum(&self, i: usize) -> f64 {
        self.f.iter().map(|v| v[i].norm()).sum()
    }

    /// Evaluate `e` on Inside nodes; poles on the small set become zero.
    fn eval(&self, e: &ComplexExpr, cfg: &QuadratureConfig) -> Result<Vec<C>> {
        let g = *self.mask.grid();
        crate::parallel::try_map_range(cfg.execution, g.len(), |i| {
            if !self.mask.is_inside(i) {
                return Ok(ZERO);
            }
            match e.eval(g.point(i)) {
                Ok(v) => Ok(v),
                Err(Error::Pole { .. }) if self.small[i] => Ok(ZERO),
                Err(err) => Err(err),
            }
        })
    }

    fn field(&self, v: Vec<C>) -> Result<SampledField> {
        let defined = (0..v.len()).map(|i| self.mask.is_inside(i)).collect();
        SampledField::from_parts(self.mask.clone(), v, defined)
    }
}

/// `F_jk = (dbar x_k conj(f_j) - dbar x_j conj(f_k)) / |f|^2`, using the
/// symbolic `dbar` of each `x_j`. Zero on the small set of `f`.
pub fn koszul_f(x: &[ComplexExpr], f: &[ComplexExpr], mask: Arc<RegionMask>, cfg: &QuadratureConfig) -> Result<AntisymMatrixField> {
    let s = Sampled::new(mask, f, cfg)?;
    let zeros: Vec<C> = (0..s.small.len()).filter(|&i| s.small[i]).map(|i| s.mask.grid().point(i)).collect();
    if !zeros.is_empty() {
        return Err(Error::precondition("|f| vanishes at a node", zeros));
    }
    koszul_weighted(&s, x, None, cfg)
}

fn koszul_weighted(s: &Sampled, x: &[ComplexExpr], weight: Option<&[C]>, cfg: &QuadratureConfig) -> Result<AntisymMatrixField> {
    let n = s.f.len();
    if x.len() != n {
        return Err(Error::InvalidArgument("x and f differ in length".into()));
    }
    let dbx = x.iter().map(|e| s.eval(&e.dbar(), cfg)).collect::<Result<Vec<_>>>()?;
    let len = s.mask.grid().len();
    let mut upper = Vec::with_capacity(n * (n.max(1) - 1) / 2);
    for j in 0..n {
        for k in j + 1..n {
            let v = map_range(cfg.execution, len, |i| {
                if !s.mask.is_inside(i) || s.small[i] {
                    return ZERO;
                }
                let n2: f64 = s.f.iter().map(|v| v[i].norm_sqr()).sum();
                let w = weight.map_or(C::new(1.0, 0.0), |w| w[i]);
                (dbx[k][i] * s.f[j][i].conj() - dbx[j][i] * s.f[k][i].conj()) / n2 * w
            });
            upper.push(s.field(v)?);
        }
    }
    AntisymMatrixField::from_upper(n, upper)
}

/// `H_jk = pompeiu(F_jk)` with the `dbar` residual of each entry.
pub fn solve_dbar_matrix(f: &AntisymMatrixField, cfg: &QuadratureConfig) -> Result<(AntisymMatrixField, Vec<DbarReport>)> {
    let mut upper = Vec::with_capacity(f.upper.len());
    let mut reports = Vec::with_capacity(f.upper.len());
    if let Some(first) = f.upper.first() {
        let plan = PompeiuPlan::new(first.mask().grid(), cfg)?;
        for e in &f.upper {
            let h = if e.defined_nodes().iter().all(|&i| e.values()[i] == ZERO) {
                SampledField::zeros(e.mask().clone(), NodeSet::Inside)
            } else {
                pompeiu_field_with(&plan, e)?
            };
            reports.push(dbar_deviation(&h, |i| e.values()[i], cfg)?);
            upper.push(h);
        }
    }
    Ok((AntisymMatrixField::from_upper(f.n, upper)?, reports))
}

#[derive(Clone, Debug)]
pub struct CoronaSolution {
    pub u: Vec<SampledField>,
    /// Max Inside-node `|sum u_j f_j - target|`.
    pub residual_sup: f64,
    /// Max margin-shrunk `|dbar_fd(u_j)|`.
    pub dbar_sup: f64,
    /// The same quantity for the uncorrected `w x`.
    pub dbar_sup_x: f64,
    /// Max Inside-node `|f H f^t|`.
    pub antisym_sup: f64,
    pub h_reports: Vec<DbarReport>,
    pub h: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoronaSummary {
    pub h: f64,
    pub residual_sup: f64,
    pub dbar_sup: f64,
    pub dbar_sup_x: f64,
    pub antisym_sup: f64,
}

impl CoronaSolution {
    pub fn summary(&self) -> CoronaSummary {
        CoronaSummary {
            h: self.h,
            residual_sup: self.residual_sup,
            dbar_sup: self.dbar_sup,
            dbar_sup_x: self.dbar_sup_x,
            antisym_sup: self.antisym_sup,
        }
    }
}

fn shrunk_max(field: &SampledField, cfg: &QuadratureConfig) -> Result<f64> {
    let d = dbar_fd(field)?;
    let nodes = field.mask().shrunk_interior(cfg.margin_cells, cfg.margin_dist);
    Ok(d.max_abs_on(&nodes))
}

/// Assemble `u_k = w x_k - sum_j f_j H_jk` where `dbar H = F w`, and
/// measure it against `target`.
fn correct(
    s: &Sampled,
    x: &[ComplexExpr],
    weight: Option<&ComplexExpr>,
    target: &ComplexExpr,
    zero_extend: bool,
    cfg: &QuadratureConfig,
) -> Result<CoronaSolution> {
    let n = s.f.len();
    let w = weight.map(|e| s.eval(e, cfg)).transpose()?;
    let fmat = koszul_weighted(s, x, w.as_deref(), cfg)?;
    let (hmat, h_reports) = solve_dbar_matrix(&fmat, cfg)?;
    let xv = x.iter().map(|e| s.eval(e, cfg)).collect::<Result<Vec<_>>>()?;
    let len = s.mask.grid().len();
    let wx: Vec<Vec<C>> = xv
        .iter()
        .map(|xk| (0..len).map(|i| w.as_ref().map_or(C::new(1.0, 0.0), |w| w[i]) * xk[i]).collect())
        .collect();
    let mut u = Vec::with_capacity(n);
    for k in 0..n {
        let v = map_range(cfg.execution, len, |i| {
            if !s.mask.is_inside(i) || (zero_extend && s.small[i]) {
                return ZERO;
            }
            let fh: C = (0..n).map(|j| s.f[j][i] * hmat.value(j, k, i)).sum();
            wx[k][i] - fh
        });
        u.push(s.field(v)?);
    }
    let tv = s.eval(target, cfg)?;
    let inside = s.mask.inside_nodes();
    let residual_sup = inside
        .iter()
        .map(|&i| ((0..n).map(|k| u[k].values()[i] * s.f[k][i]).sum::<C>() - tv[i]).norm())
        .fold(0.0, f64::max);
    let antisym_sup = inside
        .iter()
        .map(|&i| {
            let mut acc = ZERO;
            for j in 0..n {
                for k in 0..n {
                    acc += s.f[j][i] * hmat.value(j, k, i) * s.f[k][i];
                }
            }
            acc.norm()
        })
        .fold(0.0, f64::max);
    let mut dbar_sup: f64 = 0.0;
    let mut dbar_sup_x: f64 = 0.0;
    for k in 0..n {
        dbar_sup = dbar_sup.max(shrunk_max(&u[k], cfg)?);
        dbar_sup_x = dbar_sup_x.max(shrunk_max(&s.field(wx[k].clone())?, cfg)?);
    }
    Ok(CoronaSolution { u, residual_sup, dbar_sup, dbar_sup_x, antisym_sup, h_reports, h: s.mask.h() })
}

/// Corona solution with target 1, from the polynomial Bezout route.
pub fn corona_solve(p: &BezoutProblem, max_degree: usize, cfg: &QuadratureConfig) -> Result<CoronaSolution> {
    let b = bezout_poly(p, max_degree)?;
    corona_from_x(p.mask().clone(), &p.f, &b.x, cfg)
}

/// Corona correction of a given smooth solution `x` of `sum x_j f_j = 1`.
pub fn corona_from_x(mask: Arc<RegionMask>, f: &[ComplexExpr], x: &[ComplexExpr], cfg: &QuadratureConfig) -> Result<CoronaSolution> {
    let s = Sampled::new(mask, f, cfg)?;
    let zeros: Vec<C> = (0..s.small.len()).filter(|&i| s.small[i]).map(|i| s.mask.grid().point(i)).collect();
    if !zeros.is_empty() {
        return Err(Error::precondition("the functions have a common zero", zeros));
    }
    correct(&s, x, None, &ComplexExpr::real(1.0), false, cfg)
}

fn check_dominated(s: &Sampled, g: &[C]) -> Result<()> {
    let gr = s.mask.grid();
    let bad: Vec<C> = s
        .mask
        .inside_nodes()
        .into_iter()
        .filter(|&i| g[i].norm() > s.abs_sum(i) * (1.0 + 1e-12) + 1e-300)
        .map(|i| gr.point(i))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::precondition("|g| <= sum |f_j| fails", bad))
    }
}

/// Solutions with target `g^5` (isolated common zeros) or `g^6` (general
/// case, zero-extended on the small set of `f`), given smooth `x` with
/// `sum x_j f_j = g`.
pub fn g_power_solve(
    g: &ComplexExpr,
    f: &[ComplexExpr],
    x: &[ComplexExpr],
    isolated_zeros: bool,
    mask: Arc<RegionMask>,
    cfg: &QuadratureConfig,
) -> Result<CoronaSolution> {
    let s = Sampled::new(mask, f, cfg)?;
    let gv = s.eval(g, cfg)?;
    check_dominated(&s, &gv)?;
    let xv = x.iter().map(|e| s.eval(e, cfg)).collect::<Result<Vec<_>>>()?;
    let gr = s.mask.grid();
    let bad: Vec<C> = s
        .mask
        .inside_nodes()
        .into_iter()
        .filter(|&i| !s.small[i] && ((0..f.len()).map(|k| xv[k][i] * s.f[k][i]).sum::<C>() - gv[i]).norm() > 1e-10)
        .map(|i| gr.point(i))
        .collect();
    if !bad.is_empty() {
        return Err(Error::precondition("sum x_j f_j = g fails", bad));
    }
    let g4 = g.powi(4);
    if isolated_zeros {
        correct(&s, x, Some(&g4), &g.powi(5), false, cfg)
    } else {
        let gx: Vec<ComplexExpr> = x.iter().map(|e| g * e).collect();
        correct(&s, &gx, Some(&g4), &g.powi(6), true, cfg)
    }
}

/// Target `g^12` under `|sum h_j f_j| >= sum |f_j|^2` and `|g| <= sum |f_j|`:
/// `k = g^8 / h`, `x_j = k h_j`, then the `g^4`-weighted correction.
pub fn g12_solve(
    g: &ComplexExpr,
    f: &[ComplexExpr],
    hs: &[ComplexExpr],
    mask: Arc<RegionMask>,
    cfg: &QuadratureConfig,
) -> Result<CoronaSolution> {
    if hs.len() != f.len() {
        return Err(Error::InvalidArgument("h and f differ in length".into()));
    }
    let s = Sampled::new(mask, f, cfg)?;
    let gv = s.eval(g, cfg)?;
    check_dominated(&s, &gv)?;
    let hsum = hs.iter().zip(f).fold(ComplexExpr::real(0.0), |acc, (h, fj)| acc + h * fj);
    let hv = s.eval(&hsum, cfg)?;
    let gr = s.mask.grid();
    let bad: Vec<C> = s
        .mask
        .inside_nodes()
        .into_iter()
        .filter(|&i| {
            let f2: f64 = s.f.iter().map(|v| v[i].norm_sqr()).sum();
            hv[i].norm() < f2 * (1.0 - 1e-12)
        })
        .map(|i| gr.point(i))
        .collect();
    if !bad.is_empty() {
        return Err(Error::precondition("|sum h_j f_j| >= sum |f_j|^2 fails", bad));
    }
    let zero_h: Vec<C> =
        s.mask.inside_nodes().into_iter().filter(|&i| hv[i] == ZERO && !s.small[i]).map(|i| gr.point(i)).collect();
    if !zero_h.is_empty() {
        return Err(Error::precondition("sum h_j f_j vanishes off the zero set of f", zero_h));
    }
    let k = g.powi(8).div(&hsum);
    let x: Vec<ComplexExpr> = hs.iter().map(|h| &k * h).collect();
    correct(&s, &x, Some(&g.powi(4)), &g.powi(12), false, cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoronaStudy {
    pub levels: Vec<CoronaSummary>,
    #[serde(serialize_with = "ser_slope")]
    pub dbar_slope: Slope,
}

/// Run `solve` at each spacing and fit the convergence slope of `dbar_sup`.
pub fn corona_study(hs: &[f64], mut solve: impl FnMut(f64) -> Result<CoronaSolution>) -> Result<CoronaStudy> {
    let mut levels = Vec::with_capacity(hs.len());
    for &h in hs {
        levels.push(solve(h)?.summary());
    }
    let d: Vec<f64> = levels.iter().map(|l| l.dbar_sup).collect();
    let dbar_slope = loglog_slope(hs, &d, 1e-12)?;
    Ok(CoronaStudy { levels, dbar_slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_positions() {
        let n = 4;
        let mut seen = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                seen.push(upper_pos(n, j, k));
            }
        }
        assert_eq!(seen, (0..6).collect::<Vec<_>>());
    }
}
