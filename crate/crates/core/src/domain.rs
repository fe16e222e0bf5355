//! Compact planar sets, their rasterization onto uniform grids and node
//! classification.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::{map_range, Execution};

type C = Complex64;

/// Relative slack used by membership tests of closed sets.
const CLOSED_TOL: f64 = 1e-12;

fn default_teeth() -> usize {
    6
}
fn default_height() -> f64 {
    1.0
}
fn default_base_height() -> f64 {
    0.25
}
fn default_width_ratio() -> f64 {
    0.5
}
fn default_theta_max() -> f64 {
    16.0 * PI
}
fn default_thickness() -> f64 {
    0.5
}

/// A compact subset of the plane given analytically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompactDomain {
    Disk {
        center: C,
        radius: f64,
    },
    Union {
        parts: Vec<CompactDomain>,
    },
    /// `r_in <= |z| <= r_out`, `|arg z| <= half_angle`.
    AnnulusSector {
        r_in: f64,
        r_out: f64,
        half_angle: f64,
    },
    /// `{0}` together with the sectors `S_n`, `n = 1..=count`, where
    /// `S_n = {2^-(2n+1) <= |z| <= 2^-2n, |arg z| <= pi/4}`.
    SectorChain {
        count: usize,
    },
    /// `D_0 = {|z+1| <= 1}` together with `D_n = {|z - 1/n| <= 1/n^3}` for
    /// `n = 3..count+2`.
    DiskChain {
        count: usize,
    },
    /// A base bar `[0, 1 + w_1] x [-base_height, 0]` carrying teeth
    /// `[1/n - w_n, 1/n + w_n] x [0, height]`, `n = 1..=teeth`, with
    /// `w_n = width_ratio * (1/n - 1/(n+1)) / 2`.
    Comb {
        #[serde(default = "default_teeth")]
        teeth: usize,
        #[serde(default = "default_height")]
        height: f64,
        #[serde(default = "default_base_height")]
        base_height: f64,
        #[serde(default = "default_width_ratio")]
        width_ratio: f64,
    },
    /// `1/(theta+1) <= r <= 1/theta` for `pi <= theta <= theta_max`, in polar
    /// coordinates with the angle unwrapped.
    InnerSpiral {
        #[serde(default = "default_theta_max")]
        theta_max: f64,
    },
    /// Chain of thick half circles of radii `1/n`, `n = 1..=count`,
    /// alternating between the upper and lower half plane. Each band has
    /// half-width `thickness * (1/n - 1/(n+1)) / 2`.
    HalfCircleSpiral {
        count: usize,
        #[serde(default = "default_thickness")]
        thickness: f64,
    },
    /// Closed polygon (even-odd rule), vertices in order.
    Polygon {
        vertices: Vec<C>,
    },
}

impl CompactDomain {
    pub fn disk(center: C, radius: f64) -> Self {
        CompactDomain::Disk { center, radius }
    }

    pub fn unit_disk() -> Self {
        Self::disk(C::new(0.0, 0.0), 1.0)
    }

    pub fn comb(teeth: usize) -> Self {
        CompactDomain::Comb {
            teeth,
            height: default_height(),
            base_height: default_base_height(),
            width_ratio: default_width_ratio(),
        }
    }

    pub fn inner_spiral() -> Self {
        CompactDomain::InnerSpiral { theta_max: default_theta_max() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Domain(m.to_string()));
        match self {
            CompactDomain::Disk { radius, center } => {
                if !(*radius > 0.0) || !radius.is_finite() || !center.re.is_finite() || !center.im.is_finite() {
                    return bad("disk radius must be positive and finite");
                }
            }
            CompactDomain::Union { parts } => {
                if parts.is_empty() {
                    return bad("union of zero parts");
                }
                for p in parts {
                    p.validate()?;
                }
            }
            CompactDomain::AnnulusSector { r_in, r_out, half_angle } => {
                if !(*r_in >= 0.0 && r_out > r_in && *half_angle > 0.0 && *half_angle <= PI) {
                    return bad("annulus sector needs 0 <= r_in < r_out and 0 < half_angle <= pi");
                }
            }
            CompactDomain::SectorChain { count } | CompactDomain::DiskChain { count } => {
                if *count == 0 || *count > 30 {
                    return bad("chain count must be in 1..=30");
                }
            }
            CompactDomain::Comb { teeth, height, base_height, width_ratio } => {
                if *teeth == 0 || !(*height > 0.0) || !(*base_height > 0.0) || !(*width_ratio > 0.0 && *width_ratio < 1.0) {
                    return bad("comb needs teeth >= 1, positive heights and 0 < width_ratio < 1");
                }
            }
            CompactDomain::InnerSpiral { theta_max } => {
                if !(*theta_max > PI) || !theta_max.is_finite() {
                    return bad("inner spiral needs theta_max > pi");
                }
            }
            CompactDomain::HalfCircleSpiral { count, thickness } => {
                if *count == 0 || !(*thickness > 0.0 && *thickness < 1.0) {
                    return bad("half-circle spiral needs count >= 1 and 0 < thickness < 1");
                }
            }
            CompactDomain::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return bad("polygon needs at least 3 vertices");
                }
                if polygon_area(vertices) == 0.0 {
                    return bad("polygon has zero area");
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (C, C) {
        match self {
            CompactDomain::Disk { center, radius } => {
                (center - C::new(*radius, *radius), center + C::new(*radius, *radius))
            }
            CompactDomain::Union { parts } => {
                let mut lo = C::new(f64::INFINITY, f64::INFINITY);
                let mut hi = C::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for p in parts {
                    let (a, b) = p.bounding_box();
                    lo = C::new(lo.re.min(a.re), lo.im.min(a.im));
                    hi = C::new(hi.re.max(b.re), hi.im.max(b.im));
                }
                (lo, hi)
            }
            CompactDomain::AnnulusSector { r_out, .. } => {
                (C::new(-r_out, -r_out), C::new(*r_out, *r_out))
            }
            CompactDomain::SectorChain { .. } => {
                let r = 0.25;
                (C::new(0.0, -r * FRAC_PI_4.sin()), C::new(r, r * FRAC_PI_4.sin()))
            }
            CompactDomain::DiskChain { .. } => {
                let r3 = 1.0 / 3.0 + 1.0 / 27.0;
                (C::new(-2.0, -1.0), C::new(r3, 1.0))
            }
            CompactDomain::Comb { height, base_height, .. } => {
                let (_, w1) = self.comb_tooth(1);
                (C::new(0.0, -base_height), C::new(1.0 + w1, *height))
            }
            CompactDomain::InnerSpiral { .. } => {
                let r = 1.0 / PI;
                (C::new(-r, -r), C::new(r, r))
            }
            CompactDomain::HalfCircleSpiral { .. } => {
                let mut lo = C::new(f64::INFINITY, f64::INFINITY);
                let mut hi = C::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for band in self.half_circle_bands() {
                    let r = band.radius + band.half_width;
                    lo = C::new(lo.re.min(band.center - r), lo.im.min(if band.upper { 0.0 } else { -r }));
                    hi = C::new(hi.re.max(band.center + r), hi.im.max(if band.upper { r } else { 0.0 }));
                }
                (lo, hi)
            }
            CompactDomain::Polygon { vertices } => {
                let mut lo = C::new(f64::INFINITY, f64::INFINITY);
                let mut hi = C::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo = C::new(lo.re.min(v.re), lo.im.min(v.im));
                    hi = C::new(hi.re.max(v.re), hi.im.max(v.im));
                }
                (lo, hi)
            }
        }
    }

    /// Membership in the closed set.
    pub fn contains(&self, z: C) -> bool {
        match self {
            CompactDomain::SectorChain { .. } if z == C::new(0.0, 0.0) => true,
            _ => self.contains_raster(z),
        }
    }

    /// Membership used for rasterization: isolated tagged points are left out.
    pub fn contains_raster(&self, z: C) -> bool {
        match self {
            CompactDomain::Disk { center, radius } => (z - center).norm() <= radius * (1.0 + CLOSED_TOL),
            CompactDomain::Union { parts } => parts.iter().any(|p| p.contains_raster(z)),
            CompactDomain::AnnulusSector { r_in, r_out, half_angle } => {
                in_annulus_sector(z, *r_in, *r_out, *half_angle)
            }
            CompactDomain::SectorChain { count } => {
                (1..=*count).any(|n| in_annulus_sector(z, sector_inner(n), sector_outer(n), FRAC_PI_4))
            }
            CompactDomain::DiskChain { count } => {
                if (z + 1.0).norm() <= 1.0 + CLOSED_TOL {
                    return true;
                }
                (3..count + 3).any(|n| {
                    let nf = n as f64;
                    (z - 1.0 / nf).norm() <= (1.0 + CLOSED_TOL) / (nf * nf * nf)
                })
            }
            CompactDomain::Comb { teeth, height, base_height, .. } => {
                let (_, w1) = self.comb_tooth(1);
                let tol = CLOSED_TOL;
                if z.re >= -tol && z.re <= 1.0 + w1 + tol && z.im >= -base_height - tol && z.im <= tol {
                    return true;
                }
                if z.im < -tol || z.im > height + tol {
                    return false;
                }
                (1..=*teeth).any(|n| {
                    let (x, w) = self.comb_tooth(n);
                    (z.re - x).abs() <= w * (1.0 + tol) + tol
                })
            }
            CompactDomain::InnerSpiral { theta_max } => {
                let r = z.norm();
                if r == 0.0 {
                    return false;
                }
                let mut phi = z.im.atan2(z.re);
                if phi < 0.0 {
                    phi += 2.0 * PI;
                }
                let mut theta = phi;
                while theta < PI - CLOSED_TOL {
                    theta += 2.0 * PI;
                }
                while theta <= theta_max * (1.0 + CLOSED_TOL) {
                    let t = theta.clamp(PI, *theta_max);
                    if r >= (1.0 - CLOSED_TOL) / (t + 1.0) && r <= (1.0 + CLOSED_TOL) / t {
                        return true;
                    }
                    theta += 2.0 * PI;
                }
                false
            }
            CompactDomain::HalfCircleSpiral { .. } => self.half_circle_bands().iter().any(|b| {
                let side = if b.upper { z.im >= -CLOSED_TOL } else { z.im <= CLOSED_TOL };
                let d = (z - b.center).norm();
                side && (d - b.radius).abs() <= b.half_width * (1.0 + CLOSED_TOL)
            }),
            CompactDomain::Polygon { vertices } => point_in_polygon(z, vertices),
        }
    }

    /// Isolated or limit points of K that the raster cannot see but that
    /// probes must address exactly.
    pub fn tagged_points(&self) -> Vec<C> {
        match self {
            CompactDomain::SectorChain { .. } | CompactDomain::InnerSpiral { .. } => vec![C::new(0.0, 0.0)],
            CompactDomain::HalfCircleSpiral { .. } => {
                let bands = self.half_circle_bands();
                let last = bands.last().expect("validated");
                let end = if last.upper { last.center - last.radius } else { last.center + last.radius };
                vec![C::new(end, 0.0)]
            }
            CompactDomain::Union { parts } => parts.iter().flat_map(|p| p.tagged_points()).collect(),
            _ => Vec::new(),
        }
    }

    /// Analytic area where available.
    pub fn area(&self) -> Option<f64> {
        match self {
            CompactDomain::Disk { radius, .. } => Some(PI * radius * radius),
            CompactDomain::AnnulusSector { r_in, r_out, half_angle } => {
                Some(half_angle * (r_out * r_out - r_in * r_in))
            }
            CompactDomain::Polygon { vertices } => Some(polygon_area(vertices).abs()),
            CompactDomain::DiskChain { count } => {
                let mut a = PI;
                for n in 3..count + 3 {
                    a += PI / (n as f64).powi(6);
                }
                Some(a)
            }
            CompactDomain::SectorChain { count } => Some(
                (1..=*count)
                    .map(|n| FRAC_PI_4 * (sector_outer(n).powi(2) - sector_inner(n).powi(2)))
                    .sum(),
            ),
            _ => None,
        }
    }

    /// Sample points on the analytic boundary with roughly the given spacing.
    pub fn boundary_points(&self, spacing: f64) -> Vec<C> {
        let mut out = Vec::new();
        match self {
            CompactDomain::Disk { center, radius } => push_arc(&mut out, *center, *radius, 0.0, 2.0 * PI, spacing),
            CompactDomain::Union { parts } => {
                for p in parts {
                    out.extend(p.boundary_points(spacing));
                }
            }
            CompactDomain::AnnulusSector { r_in, r_out, half_angle } => {
                push_sector_edges(&mut out, *r_in, *r_out, *half_angle, spacing)
            }
            CompactDomain::SectorChain { count } => {
                for n in 1..=*count {
                    let s = spacing.min(sector_inner(n) / 8.0);
                    push_sector_edges(&mut out, sector_inner(n), sector_outer(n), FRAC_PI_4, s);
                }
                out.push(C::new(0.0, 0.0));
            }
            CompactDomain::DiskChain { count } => {
                push_arc(&mut out, C::new(-1.0, 0.0), 1.0, 0.0, 2.0 * PI, spacing);
                for n in 3..count + 3 {
                    let nf = n as f64;
                    let r = 1.0 / (nf * nf * nf);
                    push_arc(&mut out, C::new(1.0 / nf, 0.0), r, 0.0, 2.0 * PI, spacing.min(r / 8.0));
                }
            }
            CompactDomain::Comb { .. } | CompactDomain::Polygon { .. } => {
                for (a, b) in self.edges() {
                    push_segment(&mut out, a, b, spacing);
                }
            }
            CompactDomain::InnerSpiral { theta_max } => {
                let mut theta = PI;
                while theta <= *theta_max {
                    out.push(C::from_polar(1.0 / theta, theta));
                    out.push(C::from_polar(1.0 / (theta + 1.0), theta));
                    theta += (spacing * theta * theta).min(0.05);
                }
                push_segment(&mut out, C::from_polar(1.0 / (PI + 1.0), PI), C::from_polar(1.0 / PI, PI), spacing);
                out.push(C::new(0.0, 0.0));
            }
            CompactDomain::HalfCircleSpiral { .. } => {
                for b in self.half_circle_bands() {
                    let (lo, hi) = if b.upper { (0.0, PI) } else { (PI, 2.0 * PI) };
                    for r in [b.radius - b.half_width, b.radius + b.half_width] {
                        push_arc(&mut out, C::new(b.center, 0.0), r, lo, hi, spacing);
                    }
                }
            }
        }
        out
    }

    fn edges(&self) -> Vec<(C, C)> {
        let rect = |x0: f64, y0: f64, x1: f64, y1: f64| {
            let p = [C::new(x0, y0), C::new(x1, y0), C::new(x1, y1), C::new(x0, y1)];
            (0..4).map(|k| (p[k], p[(k + 1) % 4])).collect::<Vec<_>>()
        };
        match self {
            CompactDomain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).map(|k| (vertices[k], vertices[(k + 1) % n])).collect()
            }
            CompactDomain::Comb { teeth, height, base_height, .. } => {
                let (_, w1) = self.comb_tooth(1);
                let mut e = rect(0.0, -base_height, 1.0 + w1, 0.0);
                for n in 1..=*teeth {
                    let (x, w) = self.comb_tooth(n);
                    e.extend(rect(x - w, 0.0, x + w, *height));
                }
                e
            }
            _ => Vec::new(),
        }
    }

    /// Center and half-width of comb tooth `n`.
    pub fn comb_tooth(&self, n: usize) -> (f64, f64) {
        match self {
            CompactDomain::Comb { width_ratio, .. } => {
                let x = 1.0 / n as f64;
                let next = 1.0 / (n + 1) as f64;
                (x, width_ratio * (x - next) / 2.0)
            }
            _ => panic!("comb_tooth on a non-comb domain"),
        }
    }

    fn half_circle_bands(&self) -> Vec<HalfBand> {
        let CompactDomain::HalfCircleSpiral { count, thickness } = self else {
            return Vec::new();
        };
        let mut bands = Vec::with_capacity(*count);
        // The first band runs from 1 to -1 over the upper half plane; each
        // later band starts where the previous one ended.
        let mut start = 1.0;
        for n in 1..=*count {
            let radius = 1.0 / n as f64;
            let upper = n % 2 == 1;
            let center = if upper { start - radius } else { start + radius };
            let half_width = thickness * (radius - 1.0 / (n + 1) as f64) / 2.0;
            bands.push(HalfBand { center, radius, half_width, upper });
            start = if upper { center - radius } else { center + radius };
        }
        bands
    }
}

struct HalfBand {
    center: f64,
    radius: f64,
    half_width: f64,
    upper: bool,
}

pub fn sector_inner(n: usize) -> f64 {
    0.5f64.powi(2 * n as i32 + 1)
}

pub fn sector_outer(n: usize) -> f64 {
    0.5f64.powi(2 * n as i32)
}

/// Upper right corner `C_n` of sector `S_n`.
pub fn sector_corner(n: usize) -> C {
    C::from_polar(sector_outer(n), FRAC_PI_4)
}

fn in_annulus_sector(z: C, r_in: f64, r_out: f64, half_angle: f64) -> bool {
    let r = z.norm();
    if r < r_in * (1.0 - CLOSED_TOL) || r > r_out * (1.0 + CLOSED_TOL) {
        return false;
    }
    if r == 0.0 {
        return true;
    }
    z.im.atan2(z.re).abs() <= half_angle + CLOSED_TOL
}

fn polygon_area(v: &[C]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for k in 0..n {
        let a = v[k];
        let b = v[(k + 1) % n];
        s += a.re * b.im - b.re * a.im;
    }
    s / 2.0
}

fn point_in_polygon(z: C, v: &[C]) -> bool {
    let n = v.len();
    let mut inside = false;
    for k in 0..n {
        let a = v[k];
        let b = v[(k + 1) % n];
        // Closed set: points on an edge belong to the polygon.
        let ab = b - a;
        let az = z - a;
        let cross = ab.re * az.im - ab.im * az.re;
        let len2 = ab.norm_sqr();
        if cross.abs() <= CLOSED_TOL * len2.max(1e-300).sqrt() * (1.0 + az.norm()) {
            let t = (az.re * ab.re + az.im * ab.im) / len2;
            if (-CLOSED_TOL..=1.0 + CLOSED_TOL).contains(&t) {
                return true;
            }
        }
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn push_arc(out: &mut Vec<C>, center: C, r: f64, t0: f64, t1: f64, spacing: f64) {
    let n = ((r * (t1 - t0) / spacing).ceil() as usize).max(8);
    for k in 0..=n {
        let t = t0 + (t1 - t0) * k as f64 / n as f64;
        out.push(center + C::from_polar(r, t));
    }
}

fn push_segment(out: &mut Vec<C>, a: C, b: C, spacing: f64) {
    let n = (((b - a).norm() / spacing).ceil() as usize).max(1);
    for k in 0..=n {
        out.push(a + (b - a) * (k as f64 / n as f64));
    }
}

fn push_sector_edges(out: &mut Vec<C>, r_in: f64, r_out: f64, half: f64, spacing: f64) {
    push_arc(out, C::new(0.0, 0.0), r_out, -half, half, spacing);
    if r_in > 0.0 {
        push_arc(out, C::new(0.0, 0.0), r_in, -half, half, spacing);
    }
    for s in [-half, half] {
        push_segment(out, C::from_polar(r_in, s), C::from_polar(r_out, s), spacing);
    }
}

/// Uniform node grid. Node `(i, j)` sits at `origin + h*i + h*j*1i` and has
/// linear index `j*nx + i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub origin: C,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin: C, h: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument("grid needs h > 0 and nx, ny >= 1".into()));
        }
        Ok(GridSpec { origin, h, nx, ny })
    }

    /// Grid aligned to integer multiples of `h`, covering the domain's
    /// bounding box with `margin` extra cells on each side.
    pub fn covering(domain: &CompactDomain, h: f64, margin: usize) -> Result<Self> {
        domain.validate()?;
        let (lo, hi) = domain.bounding_box();
        Self::aligned_box(lo, hi, h, margin)
    }

    /// Aligned grid over an arbitrary box.
    pub fn aligned_box(lo: C, hi: C, h: f64, margin: usize) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidArgument("grid spacing must be positive".into()));
        }
        let m = margin as f64;
        let i0 = (lo.re / h).floor() - m;
        let j0 = (lo.im / h).floor() - m;
        let i1 = (hi.re / h).ceil() + m;
        let j1 = (hi.im / h).ceil() + m;
        let nx = (i1 - i0) as usize + 1;
        let ny = (j1 - j0) as usize + 1;
        if nx.saturating_mul(ny) > 200_000_000 {
            return Err(Error::InvalidArgument(format!("grid of {nx}x{ny} nodes is too large")));
        }
        GridSpec::new(C::new(i0 * h, j0 * h), h, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn point(&self, idx: usize) -> C {
        let (i, j) = self.ij(idx);
        self.origin + C::new(i as f64 * self.h, j as f64 * self.h)
    }

    /// Nearest node to `z`, if `z` lies within half a cell of the grid.
    pub fn nearest(&self, z: C) -> Option<usize> {
        let fi = ((z.re - self.origin.re) / self.h).round();
        let fj = ((z.im - self.origin.im) / self.h).round();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some(self.index(fi as usize, fj as usize))
    }

    /// True if the box `[lo, hi]` lies inside the grid with at least one
    /// cell to spare on each side.
    pub fn covers(&self, lo: C, hi: C) -> bool {
        let top = self.origin + C::new((self.nx - 1) as f64 * self.h, (self.ny - 1) as f64 * self.h);
        let eps = 1e-9 * self.h;
        lo.re >= self.origin.re + self.h - eps
            && lo.im >= self.origin.im + self.h - eps
            && hi.re <= top.re - self.h + eps
            && hi.im <= top.im - self.h + eps
    }

    /// Linear indices of the (up to) 8 neighbours.
    pub fn neighbors8(&self, idx: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (i, j) = self.ij(idx);
        const OFF: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
        OFF.iter().filter_map(move |&(di, dj)| {
            let ni = i as isize + di;
            let nj = j as isize + dj;
            if ni < 0 || nj < 0 || ni >= self.nx as isize || nj >= self.ny as isize {
                return None;
            }
            let w = if di != 0 && dj != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
            Some((self.index(ni as usize, nj as usize), w * self.h))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Exterior,
    /// Inside with all 8 neighbours inside.
    Interior,
    /// Inside but not interior.
    Boundary,
}

impl NodeClass {
    pub fn is_inside(self) -> bool {
        self != NodeClass::Exterior
    }

    fn to_char(self) -> char {
        match self {
            NodeClass::Exterior => 'E',
            NodeClass::Interior => 'I',
            NodeClass::Boundary => 'B',
        }
    }
}

/// A tagged exact point of K and its nearest grid node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaggedPoint {
    pub point: C,
    pub node: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionMask {
    grid: GridSpec,
    class: Vec<NodeClass>,
    tagged: Vec<TaggedPoint>,
}

impl RegionMask {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn class(&self, idx: usize) -> NodeClass {
        self.class[idx]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    pub fn tagged(&self) -> &[TaggedPoint] {
        &self.tagged
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.class[idx].is_inside()
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.class[idx] == NodeClass::Interior
    }

    pub fn count(&self, c: NodeClass) -> usize {
        self.class.iter().filter(|&&k| k == c).count()
    }

    pub fn inside_count(&self) -> usize {
        self.class.iter().filter(|k| k.is_inside()).count()
    }

    pub fn inside_nodes(&self) -> Vec<usize> {
        (0..self.class.len()).filter(|&i| self.is_inside(i)).collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.class.len()).filter(|&i| self.is_interior(i)).collect()
    }

    /// Exact Euclidean distance from every node to the nearest node that is
    /// not Interior (infinite if there is none).
    pub fn distance_to_non_interior(&self) -> Vec<f64> {
        let sites: Vec<bool> = self.class.iter().map(|&c| c != NodeClass::Interior).collect();
        let d2 = edt_squared(&sites, self.grid.nx, self.grid.ny);
        d2.into_iter().map(|v| v.sqrt() * self.grid.h).collect()
    }

    /// Interior nodes at distance at least `max(cells*h, dist)` from every
    /// non-interior node.
    pub fn shrunk_interior(&self, cells: usize, dist: f64) -> Vec<usize> {
        let m = (cells as f64 * self.grid.h).max(dist);
        let d = self.distance_to_non_interior();
        (0..self.class.len())
            .filter(|&i| self.class[i] == NodeClass::Interior && d[i] >= m * (1.0 - 1e-12))
            .collect()
    }

    /// Text dump: header `nx ny h origin_re origin_im`, then `ny` rows of
    /// `nx` characters in order of increasing y. `E` exterior, `I` interior,
    /// `B` boundary, `N` the node nearest a tagged isolated point.
    pub fn dump(&self) -> String {
        let g = &self.grid;
        let mut s = String::with_capacity(g.len() + g.ny + 64);
        let _ = writeln!(s, "{} {} {:?} {:?} {:?}", g.nx, g.ny, g.h, g.origin.re, g.origin.im);
        let tagged: Vec<usize> = self.tagged.iter().filter_map(|t| t.node).collect();
        for j in 0..g.ny {
            for i in 0..g.nx {
                let idx = g.index(i, j);
                s.push(if tagged.contains(&idx) { 'N' } else { self.class[idx].to_char() });
            }
            s.push('\n');
        }
        s
    }

    /// Parse a dump produced by [`RegionMask::dump`]. `N` nodes come back as
    /// tagged points at their node position.
    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::InvalidArgument("empty mask dump".into()))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        let bad = |m: &str| Error::InvalidArgument(format!("mask dump: {m}"));
        if f.len() != 5 {
            return Err(bad("header needs 5 fields"));
        }
        let nx: usize = f[0].parse().map_err(|_| bad("nx"))?;
        let ny: usize = f[1].parse().map_err(|_| bad("ny"))?;
        let h: f64 = f[2].parse().map_err(|_| bad("h"))?;
        let ore: f64 = f[3].parse().map_err(|_| bad("origin_re"))?;
        let oim: f64 = f[4].parse().map_err(|_| bad("origin_im"))?;
        let grid = GridSpec::new(C::new(ore, oim), h, nx, ny)?;
        let mut class = Vec::with_capacity(grid.len());
        let mut tagged = Vec::new();
        for j in 0..ny {
            let row = lines.next().ok_or_else(|| bad("missing row"))?;
            if row.chars().count() != nx {
                return Err(bad(&format!("row {j} has wrong length")));
            }
            for (i, ch) in row.chars().enumerate() {
                class.push(match ch {
                    'E' => NodeClass::Exterior,
                    'I' => NodeClass::Interior,
                    'B' => NodeClass::Boundary,
                    'N' => {
                        let idx = grid.index(i, j);
                        tagged.push(TaggedPoint { point: grid.point(idx), node: Some(idx) });
                        NodeClass::Exterior
                    }
                    _ => return Err(bad(&format!("unknown class '{ch}'"))),
                });
            }
        }
        Ok(RegionMask { grid, class, tagged })
    }
}

/// Rasterize `domain` on `grid`. The grid must cover the bounding box.
pub fn build_mask(domain: &CompactDomain, grid: &GridSpec) -> Result<RegionMask> {
    domain.validate()?;
    let (lo, hi) = domain.bounding_box();
    if !grid.covers(lo, hi) {
        return Err(Error::InvalidArgument("grid does not cover the bounding box with a cell of margin".into()));
    }
    let mask = build_mask_window(domain, grid, Execution::default())?;
    if mask.count(NodeClass::Interior) == 0 {
        return Err(Error::Domain(format!(
            "grid too coarse: no Interior nodes at h = {} ({} Inside nodes)",
            grid.h,
            mask.inside_count()
        )));
    }
    Ok(mask)
}

/// Rasterize `domain` on a grid that may cover only part of it. Nodes at
/// the grid edge have missing neighbours and are never Interior.
pub fn build_mask_window(domain: &CompactDomain, grid: &GridSpec, exec: Execution) -> Result<RegionMask> {
    domain.validate()?;
    let inside: Vec<bool> = map_range(exec, grid.len(), |idx| domain.contains_raster(grid.point(idx)));
    let class = map_range(exec, grid.len(), |idx| {
        if !inside[idx] {
            return NodeClass::Exterior;
        }
        let (i, j) = grid.ij(idx);
        if i == 0 || j == 0 || i + 1 == grid.nx || j + 1 == grid.ny {
            return NodeClass::Boundary;
        }
        if grid.neighbors8(idx).all(|(n, _)| inside[n]) {
            NodeClass::Interior
        } else {
            NodeClass::Boundary
        }
    });
    let tagged = domain
        .tagged_points()
        .into_iter()
        .map(|p| TaggedPoint { point: p, node: grid.nearest(p) })
        .collect();
    Ok(RegionMask { grid: *grid, class, tagged })
}

/// Connected components of Inside nodes under 4-connectivity.
#[derive(Clone, Debug, PartialEq)]
pub struct Components {
    /// Component label per node, `None` for Exterior nodes.
    pub labels: Vec<Option<u32>>,
    /// Node count per component, indexed by label.
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

/// Labels are assigned in order of each component's first node in scan order.
pub fn connected_components(mask: &RegionMask) -> Components {
    let g = mask.grid();
    let mut labels = vec![None; g.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..g.len() {
        if !mask.is_inside(start) || labels[start].is_some() {
            continue;
        }
        let label = sizes.len() as u32;
        labels[start] = Some(label);
        queue.push_back(start);
        let mut size = 0;
        while let Some(idx) = queue.pop_front() {
            size += 1;
            let (i, j) = g.ij(idx);
            let mut visit = |n: usize| {
                if mask.is_inside(n) && labels[n].is_none() {
                    labels[n] = Some(label);
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(idx - 1);
            }
            if i + 1 < g.nx {
                visit(idx + 1);
            }
            if j > 0 {
                visit(idx - g.nx);
            }
            if j + 1 < g.ny {
                visit(idx + g.nx);
            }
        }
        sizes.push(size);
    }
    Components { labels, sizes }
}

/// Squared Euclidean distance transform in cell units (Felzenszwalb and
/// Huttenlocher). `sites[idx]` marks the zero set.
fn edt_squared(sites: &[bool], nx: usize, ny: usize) -> Vec<f64> {
    let inf = 1e20;
    let mut d: Vec<f64> = sites.iter().map(|&s| if s { 0.0 } else { inf }).collect();
    let mut f = vec![0.0; nx.max(ny)];
    let mut out = vec![0.0; nx.max(ny)];
    let mut v = vec![0usize; nx.max(ny)];
    let mut z = vec![0.0; nx.max(ny) + 1];
    for i in 0..nx {
        for j in 0..ny {
            f[j] = d[j * nx + i];
        }
        edt_1d(&f[..ny], &mut out[..ny], &mut v, &mut z);
        for j in 0..ny {
            d[j * nx + i] = out[j];
        }
    }
    for j in 0..ny {
        f[..nx].copy_from_slice(&d[j * nx..(j + 1) * nx]);
        edt_1d(&f[..nx], &mut out[..nx], &mut v, &mut z);
        d[j * nx..(j + 1) * nx].copy_from_slice(&out[..nx]);
    }
    d
}

fn edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn disk_interior_area_at_h_001() {
        let d = CompactDomain::unit_disk();
        let g = GridSpec::covering(&d, 0.01, 2).unwrap();
        let m = build_mask(&d, &g).unwrap();
        let inside = m.inside_count() as f64 * 1e-4;
        assert!((inside - PI).abs() <= 0.05, "inside area {inside}");
        assert_eq!(connected_components(&m).count(), 1);
    }

    #[test]
    fn empty_polygon_rejected() {
        let d = CompactDomain::Polygon { vertices: vec![] };
        assert!(GridSpec::covering(&d, 0.1, 2).is_err());
        let g = GridSpec::new(c(-1.0, -1.0), 0.1, 20, 20).unwrap();
        assert!(build_mask(&d, &g).is_err());
    }

    #[test]
    fn too_coarse_grid_is_diagnosed() {
        let d = CompactDomain::disk(c(0.0, 0.0), 0.1);
        let g = GridSpec::covering(&d, 0.09, 2).unwrap();
        assert!(matches!(build_mask(&d, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn two_disjoint_disks() {
        let d = CompactDomain::Union {
            parts: vec![CompactDomain::disk(c(-1.0, 0.0), 0.5), CompactDomain::disk(c(1.0, 0.0), 0.5)],
        };
        let g = GridSpec::covering(&d, 0.05, 2).unwrap();
        let m = build_mask(&d, &g).unwrap();
        assert_eq!(connected_components(&m).count(), 2);
    }

    #[test]
    fn sector_chain_components_and_tag() {
        let d = CompactDomain::SectorChain { count: 4 };
        assert!(d.contains(c(0.0, 0.0)));
        assert!(!d.contains_raster(c(0.0, 0.0)));
        let g = GridSpec::covering(&d, 2.0e-4, 2).unwrap();
        let m = build_mask(&d, &g).unwrap();
        assert_eq!(connected_components(&m).count(), 4);
        assert_eq!(m.tagged().len(), 1);
        assert!(d.contains(sector_corner(2)));
        assert!(d.contains(sector_corner(2).conj()));
    }

    #[test]
    fn boundary_nodes_hug_the_circle() {
        let d = CompactDomain::unit_disk();
        let g = GridSpec::covering(&d, 1.0 / 64.0, 2).unwrap();
        let m = build_mask(&d, &g).unwrap();
        for idx in 0..g.len() {
            if m.class(idx) == NodeClass::Boundary {
                assert!((g.point(idx).norm() - 1.0).abs() <= g.h * 2f64.sqrt());
            }
        }
    }

    #[test]
    fn dump_roundtrip() {
        let d = CompactDomain::SectorChain { count: 2 };
        let g = GridSpec::covering(&d, 1.0 / 128.0, 2).unwrap();
        let m = build_mask(&d, &g).unwrap();
        let text = m.dump();
        let first = text.lines().next().unwrap();
        assert_eq!(first.split_whitespace().count(), 5);
        assert!(text.contains('N'));
        let back = RegionMask::from_dump(&text).unwrap();
        assert_eq!(back.grid(), m.grid());
        assert_eq!(back.dump(), text);
    }

    #[test]
    fn edt_matches_brute_force() {
        let d = CompactDomain::AnnulusSector { r_in: 0.3, r_out: 1.0, half_angle: 2.0 };
        let g = GridSpec::covering(&d, 1.0 / 16.0, 2).unwrap();
        let m = build_mask(&d, &g).unwrap();
        let dist = m.distance_to_non_interior();
        let sites: Vec<usize> = (0..g.len()).filter(|&i| !m.is_interior(i)).collect();
        for idx in 0..g.len() {
            let p = g.point(idx);
            let brute = sites.iter().map(|&s| (g.point(s) - p).norm()).fold(f64::INFINITY, f64::min);
            assert!((brute - dist[idx]).abs() < 1e-9, "{idx}");
        }
    }

    #[test]
    fn domain_config_roundtrip() {
        let text = "kind = \"disk\"\ncenter = [0.5, -0.25]\nradius = 2.0\n";
        let d: CompactDomain = toml::from_str(text).unwrap();
        assert_eq!(d, CompactDomain::disk(c(0.5, -0.25), 2.0));
        let comb: CompactDomain = toml::from_str("kind = \"comb\"\nteeth = 4\n").unwrap();
        assert_eq!(comb, CompactDomain::Comb { teeth: 4, height: 1.0, base_height: 0.25, width_ratio: 0.5 });
        let back: CompactDomain = toml::from_str(&toml::to_string(&comb).unwrap()).unwrap();
        assert_eq!(back, comb);
    }

    #[test]
    fn spiral_membership() {
        let d = CompactDomain::inner_spiral();
        for theta in [PI, 4.0, 10.0, 30.0, 50.0] {
            let r = 0.5 * (1.0 / theta + 1.0 / (theta + 1.0));
            assert!(d.contains(C::from_polar(r, theta)), "{theta}");
            assert!(!d.contains(C::from_polar(1.02 / theta, theta)));
        }
        assert!(!d.contains(c(0.0, 0.0)));
        assert_eq!(d.tagged_points(), vec![c(0.0, 0.0)]);
    }

    #[test]
    fn half_circle_spiral_is_connected() {
        let d = CompactDomain::HalfCircleSpiral { count: 5, thickness: 0.5 };
        let g = GridSpec::covering(&d, 1.0 / 400.0, 2).unwrap();
        let m = build_mask(&d, &g).unwrap();
        assert_eq!(connected_components(&m).count(), 1);
    }
}
