//! Interior grid geodesics, local L-connectivity probes, boundary Taylor
//! remainders and the disk-chain difference quotients.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::{build_mask_window, CompactDomain, GridSpec, NodeClass, RegionMask};
use crate::error::{Error, Result};
use crate::expr::ComplexExpr;
use crate::parallel::{map_range, Execution};
use crate::study::{loglog_slope, Slope};
use crate::taylor::derivatives;

type C = Complex64;

#[derive(Clone, Debug, Serialize)]
pub struct PathResult {
    pub z: C,
    pub z0: C,
    /// Grid nodes from the node of `z` to the last node before `z0`.
    #[serde(skip)]
    pub nodes: Vec<usize>,
    pub length: f64,
    pub ratio: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Item {
    dist: f64,
    idx: usize,
}

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on (dist, idx)
        o.dist.total_cmp(&self.dist).then_with(|| o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Multi-source Dijkstra over Interior nodes with 8-neighbour Euclidean
/// edges. Returns distances and predecessors.
fn dijkstra(mask: &RegionMask, sources: &[(usize, f64)], stop: impl Fn(usize, f64) -> bool) -> (Vec<f64>, Vec<usize>) {
    let g = mask.grid();
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut prev = vec![usize::MAX; g.len()];
    let mut heap = BinaryHeap::new();
    for &(s, d0) in sources {
        if d0 < dist[s] {
            dist[s] = d0;
            heap.push(Item { dist: d0, idx: s });
        }
    }
    while let Some(Item { dist: d, idx }) = heap.pop() {
        if d > dist[idx] {
            continue;
        }
        if stop(idx, d) {
            break;
        }
        for (n, w) in g.neighbors8(idx) {
            if mask.class(n) != NodeClass::Interior {
                continue;
            }
            let nd = d + w;
            if nd < dist[n] || (nd == dist[n] && idx < prev[n]) {
                dist[n] = nd;
                prev[n] = idx;
                heap.push(Item { dist: nd, idx: n });
            }
        }
    }
    (dist, prev)
}

/// Shortest path from `z` to `z0` through Interior nodes.
///
/// `z` must snap to an Interior node. If `z0` snaps to an Interior node the
/// path ends there; otherwise it ends at an Interior neighbour of the
/// nearest Boundary node, and a final straight hop reaches `z0`.
pub fn interior_shortest_path(mask: &RegionMask, z: C, z0: C) -> Result<PathResult> {
    let g = *mask.grid();
    let src = g.nearest(z).filter(|&i| mask.is_interior(i)).ok_or_else(|| {
        Error::InvalidArgument(format!("start point {z} does not snap to an Interior node"))
    })?;
    let targets: Vec<usize> = match g.nearest(z0) {
        Some(t) if mask.is_interior(t) => vec![t],
        _ => {
            let b = (0..g.len())
                .filter(|&i| mask.class(i) == NodeClass::Boundary)
                .min_by(|&a, &b| (g.point(a) - z0).norm().total_cmp(&(g.point(b) - z0).norm()).then(a.cmp(&b)))
                .ok_or_else(|| Error::Domain("mask has no Boundary nodes".into()))?;
            g.neighbors8(b).map(|(n, _)| n).filter(|&n| mask.is_interior(n)).collect()
        }
    };
    let is_target = |i: usize| targets.contains(&i);
    let best = std::cell::Cell::new(f64::INFINITY);
    let (dist, prev) = dijkstra(mask, &[(src, (z - g.point(src)).norm())], |i, d| {
        if is_target(i) {
            best.set(best.get().min(d + (g.point(i) - z0).norm()));
        }
        d >= best.get()
    });
    let end = targets
        .iter()
        .copied()
        .filter(|&t| dist[t].is_finite())
        .min_by(|&a, &b| {
            (dist[a] + (g.point(a) - z0).norm()).total_cmp(&(dist[b] + (g.point(b) - z0).norm())).then(a.cmp(&b))
        })
        .ok_or_else(|| Error::Disconnected(format!("no Interior path from {z} to {z0} at h = {}", g.h)))?;
    let mut nodes = vec![end];
    while let Some(&last) = nodes.last() {
        if last == src {
            break;
        }
        nodes.push(prev[last]);
    }
    nodes.reverse();
    let length = dist[end] + (g.point(end) - z0).norm();
    let ratio = length / (z - z0).norm();
    Ok(PathResult { z, z0, nodes, length, ratio })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleResult {
    pub scale: f64,
    pub h: f64,
    pub samples: usize,
    /// `None` when no sample landed on an Interior node.
    pub max_ratio: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LProbeReport {
    pub z0: C,
    pub scales: Vec<ScaleResult>,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug)]
pub struct LProbeConfig {
    pub samples_per_scale: usize,
    /// Grid cells per unit of scale: `h = r / cells_per_scale`.
    pub cells_per_scale: f64,
    pub execution: Execution,
}

impl Default for LProbeConfig {
    fn default() -> Self {
        LProbeConfig { samples_per_scale: 256, cells_per_scale: 500.0, execution: Execution::default() }
    }
}

pub const DEFAULT_SCALES: [f64; 3] = [0.2, 0.1, 0.05];

/// Ratio growth per scale step for a "growing" verdict.
pub const GROWTH: f64 = 1.5;
/// Max relative spread for a "bounded" verdict.
pub const SPREAD: f64 = 0.2;

/// Classify a sequence of max ratios taken at decreasing scales.
pub fn verdict(ratios: &[f64]) -> Verdict {
    if ratios.len() < 2 {
        return Verdict::Inconclusive;
    }
    if ratios.windows(2).all(|w| w[1] >= GROWTH * w[0]) {
        return Verdict::Growing;
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    if hi <= (1.0 + SPREAD) * lo {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    }
}

/// Probe local L-connectivity at the boundary point `z0`.
///
/// For each scale `r` a window of half-side `1.2 r` around `z0` is
/// rasterized with `h = r / cells_per_scale`. Points `z = z0 + r e^{i phi}`
/// are joined through Interior nodes to the ball `|y - z0| <= r/2`, closed by
/// the segment `y -> z0`; the reported ratio is that length over `r`.
pub fn l_probe(domain: &CompactDomain, z0: C, scales: &[f64], cfg: &LProbeConfig) -> Result<LProbeReport> {
    if scales.is_empty() || scales.windows(2).any(|w| w[1] >= w[0]) || scales.iter().any(|s| *s <= 0.0) {
        return Err(Error::InvalidArgument("scales must be positive and strictly decreasing".into()));
    }
    let mut out = Vec::with_capacity(scales.len());
    for &r in scales {
        let h = r / cfg.cells_per_scale;
        let half = C::new(1.2 * r, 1.2 * r);
        let grid = GridSpec::aligned_box(z0 - half, z0 + half, h, 1)?;
        let mask = build_mask_window(domain, &grid, cfg.execution)?;
        let sources: Vec<(usize, f64)> = mask
            .interior_nodes()
            .into_iter()
            .filter_map(|i| {
                let d = (grid.point(i) - z0).norm();
                (d <= 0.5 * r).then_some((i, d))
            })
            .collect();
        let samples: Vec<(C, usize)> = (0..cfg.samples_per_scale)
            .filter_map(|k| {
                let z = z0 + C::from_polar(r, 2.0 * PI * k as f64 / cfg.samples_per_scale as f64);
                grid.nearest(z).filter(|&i| mask.is_interior(i)).map(|i| (z, i))
            })
            .collect();
        if samples.is_empty() {
            out.push(ScaleResult { scale: r, h, samples: 0, max_ratio: None, note: Some("no Interior samples".into()) });
            continue;
        }
        if sources.is_empty() {
            return Err(Error::Disconnected(format!("no Interior nodes within {} of {z0}", 0.5 * r)));
        }
        let (dist, _) = dijkstra(&mask, &sources, |_, _| false);
        let ratios: Vec<f64> = samples.iter().map(|&(z, i)| (dist[i] + (z - grid.point(i)).norm()) / r).collect();
        if ratios.iter().any(|v| !v.is_finite()) {
            return Err(Error::Disconnected(format!(
                "points at distance {r} from {z0} cannot reach the ball of radius {} at h = {h}",
                0.5 * r
            )));
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        out.push(ScaleResult { scale: r, h, samples: samples.len(), max_ratio: Some(max), note: None });
    }
    let ratios: Vec<f64> = out.iter().filter_map(|s| s.max_ratio).collect();
    Ok(LProbeReport { z0, verdict: verdict(&ratios), scales: out })
}

#[derive(Clone, Debug, Serialize)]
pub struct RemainderFit {
    pub j: usize,
    pub threshold: f64,
    #[serde(serialize_with = "crate::cauchy::ser_slope")]
    pub slope: Slope,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaylorReport {
    pub z0: C,
    pub m: usize,
    pub radii: Vec<f64>,
    pub fits: Vec<RemainderFit>,
    /// Slope of `|f'(z0) - (f(z) - f(z0))/(z - z0)|` against `r`, when `m >= 1`.
    #[serde(serialize_with = "ser_opt_slope")]
    pub quotient_slope: Option<Slope>,
}

fn ser_opt_slope<S: serde::Serializer>(s: &Option<Slope>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match s {
        None => ser.serialize_none(),
        Some(v) => crate::cauchy::ser_slope(v, ser),
    }
}

impl TaylorReport {
    pub fn pass(&self) -> bool {
        self.fits.iter().all(|f| f.pass)
    }
}

/// Derivatives `f, f', ..., f^(m)` at `z0`, taking radial limits from inside
/// the domain when `z0` is a singular point of the expression.
fn boundary_derivatives(f: &ComplexExpr, z0: C, m: usize, domain: &CompactDomain) -> Result<Vec<C>> {
    match derivatives(f, z0, m) {
        Ok(d) if d.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => return Ok(d),
        Ok(_) | Err(Error::Pole { .. }) => {}
        Err(e) => return Err(e),
    }
    let dir = (0..64)
        .map(|k| C::from_polar(1.0, 2.0 * PI * k as f64 / 64.0))
        .filter(|d| domain.contains(z0 + d * 1e-2) && domain.contains(z0 + d * 1e-4))
        .max_by(|a, b| {
            let depth = |d: &C| (1..=8).filter(|s| domain.contains(z0 + d * (1e-2 * *s as f64))).count();
            depth(a).cmp(&depth(b))
        })
        .ok_or_else(|| Error::Domain(format!("no direction into the domain at {z0}")))?;
    let rhos: Vec<f64> = (1..=6).map(|k| 10f64.powi(-2 * k)).collect();
    let vals = rhos.iter().map(|&rho| derivatives(f, z0 + dir * rho, m)).collect::<Result<Vec<_>>>()?;
    for j in 0..=m {
        let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1][j] - w[0][j]).norm()).collect();
        let last = *vals.last().map(|v| &v[j]).unwrap();
        let shrinking = diffs.windows(2).all(|w| w[1] <= w[0]) && *diffs.last().unwrap() <= 1e-3 * last.norm().max(1.0);
        if !shrinking || !last.re.is_finite() {
            return Err(Error::Numerical(format!("derivative extension undefined: f^({j}) has no limit at {z0}")));
        }
    }
    Ok(vals.last().unwrap().clone())
}

/// Fit the decay of the Taylor remainders `R_m^(j)` at `z0` over geometric
/// radii; PASS per `j` when the slope is at least `(m - j) - 0.2`.
pub fn taylor_remainder_fit(f: &ComplexExpr, z0: C, m: usize, domain: &CompactDomain) -> Result<TaylorReport> {
    if !f.is_conj_free() {
        return Err(Error::InvalidArgument(format!("`{f}` is not holomorphic as an expression")));
    }
    let d0 = boundary_derivatives(f, z0, m, domain)?;
    let radii: Vec<f64> = (0..8).map(|k| 0.25 * 0.5f64.powi(k)).collect();
    let angles = 64;
    let mut rem = vec![vec![0.0f64; radii.len()]; m + 1];
    let mut quot = vec![0.0f64; radii.len()];
    for (ri, &r) in radii.iter().enumerate() {
        let mut any = false;
        for k in 0..angles {
            let dz = C::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / angles as f64);
            let z = z0 + dz;
            if !domain.contains(z) {
                continue;
            }
            let dv = match derivatives(f, z, m) {
                Ok(v) => v,
                Err(Error::Pole { .. }) => continue,
                Err(e) => return Err(e),
            };
            any = true;
            for j in 0..=m {
                let mut p = C::new(0.0, 0.0);
                let mut fact = 1.0;
                let mut pw = C::new(1.0, 0.0);
                for i in 0..=m - j {
                    if i > 0 {
                        fact *= i as f64;
                        pw *= dz;
                    }
                    p += d0[j + i] * pw / fact;
                }
                rem[j][ri] = rem[j][ri].max((dv[j] - p).norm());
            }
            if m >= 1 {
                quot[ri] = quot[ri].max((d0[1] - (dv[0] - d0[0]) / dz).norm());
            }
        }
        if !any {
            return Err(Error::Domain(format!("no samples inside the domain at radius {r} around {z0}")));
        }
    }
    let floor = 1e-12 * d0.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let fits = (0..=m)
        .map(|j| {
            let slope = loglog_slope(&radii, &rem[j], floor)?;
            let threshold = (m - j) as f64 - 0.2;
            Ok(RemainderFit { j, threshold, slope, pass: slope.at_least(threshold) })
        })
        .collect::<Result<Vec<_>>>()?;
    let quotient_slope = if m >= 1 { Some(loglog_slope(&radii, &quot, floor)?) } else { None };
    Ok(TaylorReport { z0, m, radii, fits, quotient_slope })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientRow {
    pub n: usize,
    pub quotient: f64,
    /// `f'` on the interior of `D_n`, where `f` is constant.
    pub interior_derivative: f64,
}

/// Difference quotients `(f(1/n) - f(0)) / (1/n)` for `f = 1/sqrt(n)` on
/// `D_n` and `f = 0` on `D_0`, for `n = 3..count+2`.
pub fn disk_chain_quotient_demo(count: usize) -> Result<Vec<QuotientRow>> {
    if count < 3 {
        return Err(Error::InvalidArgument("count must be at least 3".into()));
    }
    let domain = CompactDomain::DiskChain { count };
    let f0 = 0.0;
    let rows: Vec<QuotientRow> = (3..count + 3)
        .map(|n| {
            let x = 1.0 / n as f64;
            debug_assert!(domain.contains(C::new(x, 0.0)) && domain.contains(C::new(0.0, 0.0)));
            let fx = 1.0 / (n as f64).sqrt();
            let e = ComplexExpr::real(fx);
            let interior_derivative = e.d().as_const().map_or(f64::NAN, |c| c.norm());
            QuotientRow { n, quotient: (fx - f0) * n as f64, interior_derivative }
        })
        .collect();
    if rows.windows(2).any(|w| w[1].quotient <= w[0].quotient) {
        return Err(Error::Numerical("difference quotients are not increasing".into()));
    }
    Ok(rows)
}

/// Maximum path ratio over a batch of start points, in parallel.
pub fn max_ratio(mask: &RegionMask, starts: &[C], z0: C, exec: Execution) -> Result<f64> {
    let r = map_range(exec, starts.len(), |k| interior_shortest_path(mask, starts[k], z0).map(|p| p.ratio));
    r.into_iter().try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict(&[1.0, 1.1, 1.05]), Verdict::Bounded);
        assert_eq!(verdict(&[2.0, 3.1, 4.7]), Verdict::Growing);
        assert_eq!(verdict(&[2.0, 2.6, 3.0]), Verdict::Inconclusive);
        assert_eq!(verdict(&[2.0]), Verdict::Inconclusive);
    }

    #[test]
    fn square_roots() {
        let rows = disk_chain_quotient_demo(8).unwrap();
        assert_eq!(rows[1].quotient, 2.0);
        assert_eq!(rows[6].quotient, 3.0);
    }
}
