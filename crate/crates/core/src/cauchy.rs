//! The Pompeiu transform `u(z) = -(1/pi) ∫∫_K f(w)/(w - z) dσ(w)`.
//!
//! Every Inside node carries a square cell of side `h`. Far cells use the
//! midpoint rule, near cells the closed-form integral of the kernel over the
//! square. On the mask's own nodes the sum is a discrete convolution and is
//! evaluated with zero-padded FFTs; arbitrary targets use direct summation.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::domain::{build_mask, CompactDomain, GridSpec, RegionMask};
use crate::error::{Error, Result};
use crate::expr::ComplexExpr;
use crate::field::{dbar_fd, NodeSet, SampledField};
use crate::parallel::{for_each_chunk_mut, for_each_mut, map_range, Execution};
use crate::study::{loglog_slope, Slope};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CellRule {
    /// Midpoint rule everywhere except the cell containing the target.
    Midpoint,
    /// Exact cell integrals within `near_radius_cells`.
    #[default]
    ExactKernelCell,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub near_radius_cells: usize,
    pub cell_rule: CellRule,
    /// Verification skips nodes closer than `max(margin_cells*h, margin_dist)`
    /// to a non-Interior node.
    pub margin_cells: usize,
    pub margin_dist: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            near_radius_cells: 3,
            cell_rule: CellRule::ExactKernelCell,
            margin_cells: 3,
            margin_dist: 0.125,
            execution: Execution::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.near_radius_cells < 1 {
            return Err(Error::InvalidArgument("near_radius_cells must be at least 1".into()));
        }
        if !(self.margin_dist >= 0.0) {
            return Err(Error::InvalidArgument("margin_dist must be non-negative".into()));
        }
        Ok(())
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.execution = exec;
        self
    }
}

/// `ζ log ζ` with the argument taken in the closed quadrant given by
/// `lower_left` (third quadrant uses `[-pi, -pi/2]`).
fn zeta_log_zeta(x: f64, y: f64, third_quadrant: bool) -> C {
    let x = x + 0.0;
    let y = y + 0.0;
    if x == 0.0 && y == 0.0 {
        return ZERO;
    }
    let mut arg = y.atan2(x);
    if third_quadrant && arg > 0.0 {
        arg = -PI;
    }
    let zeta = C::new(x, y);
    zeta * C::new(0.5 * (x * x + y * y).ln(), arg)
}

/// `∫∫ dx dy / (x + iy)` over a rectangle inside one closed quadrant.
fn quadrant_integral(x1: f64, x2: f64, y1: f64, y2: f64) -> C {
    if x1 == x2 || y1 == y2 {
        return ZERO;
    }
    let third = x2 <= 0.0 && y2 <= 0.0;
    let g = |x, y| zeta_log_zeta(x, y, third) * C::new(0.0, -1.0);
    g(x2, y2) - g(x1, y2) - g(x2, y1) + g(x1, y1)
}

fn split_at_zero(a: f64, b: f64) -> Vec<(f64, f64)> {
    if a < 0.0 && b > 0.0 {
        vec![(a, 0.0), (0.0, b)]
    } else {
        vec![(a, b)]
    }
}

/// `∫∫_R dσ(w) / (w - z)` over the axis-aligned rectangle `R = [lo, hi]`.
/// Finite for every `z`, including points inside or on the edge of `R`.
pub fn rect_kernel_integral(z: C, lo: C, hi: C) -> C {
    let a = lo - z;
    let b = hi - z;
    let mut s = ZERO;
    for (x1, x2) in split_at_zero(a.re, b.re) {
        for &(y1, y2) in &split_at_zero(a.im, b.im) {
            s += quadrant_integral(x1, x2, y1, y2);
        }
    }
    s
}

/// `∫∫ dσ(w) / (w - z)` over the square cell of side `h` centred at `center`.
pub fn cell_kernel_integral(center: C, h: f64, z: C) -> C {
    let d = C::new(0.5 * h, 0.5 * h);
    rect_kernel_integral(z, center - d, center + d)
}

/// Weight of the cell centred at `w` for target `z`: the value of
/// `-(1/pi) ∫_cell dσ/(w' - z)` under the configured rule.
fn cell_weight(w: C, z: C, h: f64, cfg: &QuadratureConfig) -> C {
    let d = w - z;
    let in_cell = d.re.abs() <= 0.5 * h && d.im.abs() <= 0.5 * h;
    let near = match cfg.cell_rule {
        CellRule::Midpoint => in_cell,
        CellRule::ExactKernelCell => in_cell || d.norm() <= cfg.near_radius_cells as f64 * h,
    };
    if near {
        cell_kernel_integral(w, h, z) * (-1.0 / PI)
    } else {
        (-h * h / PI) / d
    }
}

fn check_field(f: &SampledField) -> Result<()> {
    if f.defined_count() == 0 {
        return Err(Error::Domain("the integrand has no Inside nodes".into()));
    }
    Ok(())
}

/// Direct summation at arbitrary targets. Cost is `targets x nodes`.
pub fn pompeiu(f: &SampledField, targets: &[C], cfg: &QuadratureConfig) -> Result<Vec<C>> {
    cfg.validate()?;
    check_field(f)?;
    let g = *f.mask().grid();
    let src: Vec<(C, C)> = f.defined_nodes().into_iter().map(|i| (g.point(i), f.values()[i])).collect();
    let h = g.h;
    Ok(map_range(cfg.execution, targets.len(), |t| {
        let z = targets[t];
        src.iter().map(|&(w, v)| v * cell_weight(w, z, h, cfg)).sum()
    }))
}

/// Smallest `n >= m` whose prime factors are all in {2, 3, 5, 7}.
pub fn smooth_size(m: usize) -> usize {
    let mut n = m.max(1);
    loop {
        let mut k = n;
        for p in [2, 3, 5, 7] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return n;
        }
        n += 1;
    }
}

/// Precomputed kernel spectrum for one grid. Reusable across integrands on
/// that grid.
pub struct PompeiuPlan {
    grid: GridSpec,
    cfg: QuadratureConfig,
    p: usize,
    q: usize,
    kernel_hat: Vec<C>,
    fwd: [Arc<dyn Fft<f64>>; 2],
    inv: [Arc<dyn Fft<f64>>; 2],
}

impl std::fmt::Debug for PompeiuPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PompeiuPlan").field("grid", &self.grid).field("p", &self.p).field("q", &self.q).finish()
    }
}

impl PompeiuPlan {
    pub fn new(grid: &GridSpec, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let p = smooth_size(2 * grid.nx - 1);
        let q = smooth_size(2 * grid.ny - 1);
        let mut planner = FftPlanner::new();
        let fwd = [planner.plan_fft_forward(p), planner.plan_fft_forward(q)];
        let inv = [planner.plan_fft_inverse(p), planner.plan_fft_inverse(q)];
        let h = grid.h;
        let (nx, ny) = (grid.nx as isize, grid.ny as isize);
        // W[e] = weight of the source at offset -e from the target.
        let mut kernel = map_range(cfg.execution, p * q, |k| {
            let (a, b) = ((k % p) as isize, (k / p) as isize);
            let ex = if a < nx { a } else { a - p as isize };
            let ey = if b < ny { b } else { b - q as isize };
            if ex <= -nx || ey <= -ny {
                return ZERO;
            }
            let w = C::new(-ex as f64 * h, -ey as f64 * h);
            cell_weight(w, ZERO, h, cfg)
        });
        let mut plan = PompeiuPlan { grid: *grid, cfg: *cfg, p, q, kernel_hat: Vec::new(), fwd, inv };
        plan.fft2(&mut kernel, false);
        plan.kernel_hat = kernel;
        Ok(plan)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn fft2(&self, data: &mut Vec<C>, inverse: bool) {
        let (p, q) = (self.p, self.q);
        let plans = if inverse { &self.inv } else { &self.fwd };
        let exec = self.cfg.execution;
        let rows = |d: &mut [C], fft: &Arc<dyn Fft<f64>>, len: usize| {
            for_each_chunk_mut(exec, d, len * 8, |c| fft.process(c));
        };
        rows(data, &plans[0], p);
        let mut t = transpose(data, p, q, exec);
        rows(&mut t, &plans[1], q);
        *data = transpose(&t, q, p, exec);
    }

    /// Values of the transform at every node of the grid, Exterior included.
    pub fn apply(&self, f: &SampledField) -> Result<Vec<C>> {
        if f.mask().grid() != &self.grid {
            return Err(Error::InvalidArgument("field grid differs from the plan grid".into()));
        }
        check_field(f)?;
        let (p, q) = (self.p, self.q);
        let g = self.grid;
        let mut buf = vec![ZERO; p * q];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let idx = g.index(i, j);
                if f.defined()[idx] {
                    buf[j * p + i] = f.values()[idx];
                }
            }
        }
        self.fft2(&mut buf, false);
        let kh = &self.kernel_hat;
        for_each_mut(self.cfg.execution, &mut buf, |i, a| *a *= kh[i]);
        self.fft2(&mut buf, true);
        let scale = 1.0 / (p * q) as f64;
        Ok(map_range(self.cfg.execution, g.len(), |idx| {
            let (i, j) = g.ij(idx);
            buf[j * p + i] * scale
        }))
    }
}

fn transpose(data: &[C], cols: usize, rows: usize, exec: Execution) -> Vec<C> {
    // data is rows x cols (row-major); result is cols x rows.
    map_range(exec, cols * rows, |k| {
        let (r, c) = (k % rows, k / rows);
        data[r * cols + c]
    })
}

/// The transform at every node of `f`'s grid.
pub fn pompeiu_on_grid(f: &SampledField, cfg: &QuadratureConfig) -> Result<Vec<C>> {
    PompeiuPlan::new(f.mask().grid(), cfg)?.apply(f)
}

/// The transform sampled on the Inside nodes of `f`'s mask.
pub fn pompeiu_field(f: &SampledField, cfg: &QuadratureConfig) -> Result<SampledField> {
    pompeiu_field_with(&PompeiuPlan::new(f.mask().grid(), cfg)?, f)
}

pub fn pompeiu_field_with(plan: &PompeiuPlan, f: &SampledField) -> Result<SampledField> {
    let all = plan.apply(f)?;
    let mask = f.mask().clone();
    let defined: Vec<bool> = (0..all.len()).map(|i| mask.is_inside(i)).collect();
    let values = all.into_iter().zip(&defined).map(|(v, d)| if *d { v } else { ZERO }).collect();
    SampledField::from_parts(mask, values, defined)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DbarReport {
    pub h: f64,
    /// Max `|dbar_fd(u) - f|` over the checked nodes.
    pub max_dev: f64,
    pub checked_nodes: usize,
}

/// Max `|dbar_fd(u) - want|` over Interior nodes outside the margin.
pub fn dbar_deviation(u: &SampledField, want: impl Fn(usize) -> C, cfg: &QuadratureConfig) -> Result<DbarReport> {
    let d = dbar_fd(u)?;
    let mask = u.mask();
    let nodes: Vec<usize> = mask
        .shrunk_interior(cfg.margin_cells, cfg.margin_dist)
        .into_iter()
        .filter(|&i| d.defined()[i])
        .collect();
    if nodes.is_empty() {
        return Err(Error::Domain(format!("no nodes left after the verification margin at h = {}", mask.h())));
    }
    let max_dev = nodes.iter().map(|&i| (d.values()[i] - want(i)).norm()).fold(0.0, f64::max);
    Ok(DbarReport { h: mask.h(), max_dev, checked_nodes: nodes.len() })
}

/// Solve `dbar u = f` by the transform and measure the discrete residual.
pub fn verify_dbar_solution(f: &SampledField, cfg: &QuadratureConfig) -> Result<DbarReport> {
    let u = pompeiu_field(f, cfg)?;
    dbar_deviation(&u, |i| f.values()[i], cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DbarStudy {
    pub levels: Vec<DbarReport>,
    #[serde(serialize_with = "ser_slope")]
    pub slope: Slope,
}

pub(crate) fn ser_slope<S: serde::Serializer>(s: &Slope, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match s {
        Slope::Exact => ser.serialize_str("exact"),
        Slope::Value(v) => ser.serialize_f64(*v),
    }
}

/// Mask of `domain` at spacing `h` with a two-cell margin.
pub fn domain_mask(domain: &CompactDomain, h: f64) -> Result<Arc<RegionMask>> {
    Ok(Arc::new(build_mask(domain, &GridSpec::covering(domain, h, 2)?)?))
}

/// [`verify_dbar_solution`] for `f` on each level of `hs`, with the fitted
/// convergence slope.
pub fn dbar_study(domain: &CompactDomain, f: &ComplexExpr, hs: &[f64], cfg: &QuadratureConfig) -> Result<DbarStudy> {
    let mut levels = Vec::with_capacity(hs.len());
    for &h in hs {
        let mask = domain_mask(domain, h)?;
        let field = SampledField::from_fn(mask, NodeSet::Inside, cfg.execution, |_, z| f.eval(z))?;
        levels.push(verify_dbar_solution(&field, cfg)?);
    }
    let devs: Vec<f64> = levels.iter().map(|r| r.max_dev).collect();
    let slope = loglog_slope(hs, &devs, 1e-12)?;
    Ok(DbarStudy { levels, slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(1033), 1050);
        assert_eq!(smooth_size(11), 12);
        assert_eq!(smooth_size(1), 1);
    }

    #[test]
    fn fft_matches_direct_sum() {
        let d = CompactDomain::unit_disk();
        let mask = domain_mask(&d, 1.0 / 16.0).unwrap();
        let e = ComplexExpr::parse("add(zbar, mul(z, z))").unwrap();
        for rule in [CellRule::Midpoint, CellRule::ExactKernelCell] {
            let cfg = QuadratureConfig { cell_rule: rule, ..Default::default() };
            let f = SampledField::from_expr(mask.clone(), &e, cfg.execution).unwrap();
            let fast = pompeiu_on_grid(&f, &cfg).unwrap();
            let pts: Vec<C> = (0..mask.grid().len()).map(|i| mask.grid().point(i)).collect();
            let slow = pompeiu(&f, &pts, &cfg).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn empty_field_is_rejected() {
        let d = CompactDomain::unit_disk();
        let mask = domain_mask(&d, 0.25).unwrap();
        let n = mask.grid().len();
        let f = SampledField::from_parts(mask, vec![ZERO; n], vec![false; n]).unwrap();
        assert!(pompeiu(&f, &[ZERO], &QuadratureConfig::default()).is_err());
    }
}
