//! Division by a generator with zero-extension on its zero set, numerical
//! smoothness certificates for the quotient, derivative bounds,
//! multi-generator division and the counterexample battery.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::{domain_mask, ser_slope};
use crate::domain::{sector_corner, sector_inner, sector_outer, CompactDomain, RegionMask};
use crate::error::{Error, Result};
use crate::expr::{directional_limit_probe, ComplexExpr};
use crate::field::{NodeSet, SampledField};
use crate::parallel::{map_range, Execution};
use crate::study::{loglog_slope, ratio_stable, Slope};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// `Z(g)` on a grid is `{|g| <= ZERO_LEVEL * max |g|}`.
pub const ZERO_LEVEL: f64 = 1e-12;
/// Probe verdicts: PASS when the extrapolated spread is at most this
/// fraction of the scale.
pub const PASS_FRACTION: f64 = 0.05;
/// FAIL when the extrapolated spread is at least this fraction of the scale.
pub const FAIL_FRACTION: f64 = 0.5;
/// Probe radii in units of the level spacing.
pub const PROBE_RADII: [f64; 3] = [8.0, 16.0, 32.0];
/// Relative slack when checking measured inequalities such as `|f| <= |g|`.
pub const INEQUALITY_SLACK: f64 = 1e-9;
/// A zero cluster with more nodes than this is not treated as isolated.
pub const MAX_CLUSTER_NODES: usize = 16;
/// Minimum log-log slope of first derivatives approaching the zero set.
pub const GRADIENT_DECAY_SLOPE: f64 = 0.8;

/// The divisor: a closed-form expression or the piecewise-constant
/// function equal to `conj(C_n)` on sector `S_n` and `0` at the origin.
#[derive(Clone, Debug)]
pub enum Generator {
    Expr(ComplexExpr),
    SectorCornerConj,
}

impl Generator {
    pub fn parse(src: &str) -> Result<Self> {
        if src.trim() == "sector_corner_conj" {
            Ok(Generator::SectorCornerConj)
        } else {
            ComplexExpr::parse(src).map(Generator::Expr)
        }
    }

    pub fn eval(&self, z: C) -> Result<C> {
        match self {
            Generator::Expr(e) => e.eval(z),
            Generator::SectorCornerConj => sector_corner_conj(z),
        }
    }

    pub fn is_holomorphic(&self) -> bool {
        match self {
            Generator::Expr(e) => e.is_conj_free(),
            Generator::SectorCornerConj => true,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Expr(e) => write!(f, "{e}"),
            Generator::SectorCornerConj => f.write_str("sector_corner_conj"),
        }
    }
}

/// `conj(C_n)` for `z` in `S_n`, `0` at the origin.
pub fn sector_corner_conj(z: C) -> Result<C> {
    if z == ZERO {
        return Ok(ZERO);
    }
    let r = z.norm();
    let tol = 1e-9;
    if z.arg().abs() <= FRAC_PI_4 * (1.0 + tol) {
        let n0 = (-r.log2() / 2.0).floor().max(1.0) as usize;
        for n in [n0.saturating_sub(1).max(1), n0, n0 + 1] {
            if r >= sector_inner(n) * (1.0 - tol) && r <= sector_outer(n) * (1.0 + tol) {
                return Ok(sector_corner(n).conj());
            }
        }
    }
    Err(Error::Domain(format!("{z} lies in no sector")))
}

/// `num / den`, set to zero where `|den| <= tol`.
#[derive(Clone, Debug)]
struct Extended {
    num: ComplexExpr,
    den: Generator,
    tol: f64,
}

#[derive(Clone, Debug)]
enum Term {
    Full(ComplexExpr),
    /// Numerator over a locally constant denominator.
    OverSector(ComplexExpr),
}

impl Term {
    fn d(&self) -> Term {
        match self {
            Term::Full(e) => Term::Full(e.d()),
            Term::OverSector(e) => Term::OverSector(e.d()),
        }
    }

    fn dbar(&self) -> Term {
        match self {
            Term::Full(e) => Term::Full(e.dbar()),
            Term::OverSector(e) => Term::OverSector(e.dbar()),
        }
    }

    fn eval(&self, z: C) -> Result<C> {
        match self {
            Term::Full(e) => e.eval(z),
            Term::OverSector(e) => Ok(e.eval(z)? / sector_corner_conj(z)?),
        }
    }
}

impl Extended {
    fn value(&self, z: C) -> Result<C> {
        let d = self.den.eval(z)?;
        if d.norm() <= self.tol {
            return Ok(ZERO);
        }
        Ok(self.num.eval(z)? / d)
    }

    fn in_zero_set(&self, z: C) -> bool {
        self.den.eval(z).is_ok_and(|d| d.norm() <= self.tol)
    }

    fn term(&self) -> Term {
        match &self.den {
            Generator::Expr(d) => Term::Full(self.num.div(d)),
            Generator::SectorCornerConj => Term::OverSector(self.num.clone()),
        }
    }
}

/// Quantity examined by a continuity probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Value,
    /// Central difference in `x`.
    Dx,
    /// Central difference in `y`.
    Dy,
    /// Symbolic `d/dz`.
    D,
    Dbar,
    DDbar,
    DbarDbar,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Value => "h",
            Quantity::Dx => "Dx h",
            Quantity::Dy => "Dy h",
            Quantity::D => "d h",
            Quantity::Dbar => "dbar h",
            Quantity::DDbar => "d dbar h",
            Quantity::DbarDbar => "dbar dbar h",
        })
    }
}

/// Evaluator for one quantity of an extended quotient.
struct Sampler {
    ext: Extended,
    q: Quantity,
    term: Option<Term>,
}

impl Sampler {
    fn new(ext: &Extended, q: Quantity) -> Self {
        let t = ext.term();
        let term = match q {
            Quantity::Value | Quantity::Dx | Quantity::Dy => None,
            Quantity::D => Some(t.d()),
            Quantity::Dbar => Some(t.dbar()),
            Quantity::DDbar => Some(t.dbar().d()),
            Quantity::DbarDbar => Some(t.dbar().dbar()),
        };
        Sampler { ext: ext.clone(), q, term }
    }

    /// `None` for points where the quantity is undefined or not finite.
    fn sample(&self, z: C, z0: C, h: f64) -> Option<C> {
        let v = match self.q {
            Quantity::Value => self.ext.value(z).ok()?,
            Quantity::Dx | Quantity::Dy => {
                if self.ext.in_zero_set(z) {
                    return None;
                }
                let e = if self.q == Quantity::Dx { C::new(1.0, 0.0) } else { I };
                let step = 1e-3 * h.min((z - z0).norm());
                let a = self.ext.value(z + e * step).ok()?;
                let b = self.ext.value(z - e * step).ok()?;
                (a - b) / (2.0 * step)
            }
            _ => {
                if self.ext.in_zero_set(z) {
                    return None;
                }
                self.term.as_ref().expect("symbolic quantity").eval(z).ok()?
            }
        };
        (v.re.is_finite() && v.im.is_finite()).then_some(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    fn combine(all: impl IntoIterator<Item = Outcome>) -> Outcome {
        let mut out = Outcome::Pass;
        for o in all {
            match o {
                Outcome::Fail => return Outcome::Fail,
                Outcome::Inconclusive => out = Outcome::Inconclusive,
                Outcome::Pass => {}
            }
        }
        out
    }

    fn across_levels(levels: &[Outcome]) -> Outcome {
        if levels.iter().all(|o| *o == Outcome::Pass) {
            Outcome::Pass
        } else if levels.iter().all(|o| *o == Outcome::Fail) {
            Outcome::Fail
        } else {
            Outcome::Inconclusive
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Smoothness class claimed for a quotient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassClaim {
    C0,
    A0,
    C1,
    A1,
    Dbar1,
}

impl ClassClaim {
    fn quantities(self) -> &'static [Quantity] {
        match self {
            ClassClaim::C0 | ClassClaim::A0 => &[Quantity::Value],
            ClassClaim::C1 => &[Quantity::Value, Quantity::Dx, Quantity::Dy],
            ClassClaim::A1 => &[Quantity::Value, Quantity::D],
            ClassClaim::Dbar1 => {
                &[Quantity::Value, Quantity::D, Quantity::Dbar, Quantity::DDbar, Quantity::DbarDbar]
            }
        }
    }

    fn holomorphic(self) -> bool {
        matches!(self, ClassClaim::A0 | ClassClaim::A1)
    }
}

impl FromStr for ClassClaim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c0" => Ok(ClassClaim::C0),
            "a0" => Ok(ClassClaim::A0),
            "c1" => Ok(ClassClaim::C1),
            "a1" => Ok(ClassClaim::A1),
            "dbar1" => Ok(ClassClaim::Dbar1),
            _ => Err(Error::InvalidArgument(format!("unknown class `{s}` (expected C0, A0, C1, A1 or Dbar1)"))),
        }
    }
}

impl fmt::Display for ClassClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Grid and probe parameters shared by the certificate operations.
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    /// Spacings at which each probe runs; the radii scale with them.
    pub levels: Vec<f64>,
    /// Spacing of the mask used to locate the zero set and check
    /// inequalities.
    pub detect_h: f64,
    /// Spacing of the coarse mask supplying the global magnitude of each
    /// probed quantity.
    pub scale_h: f64,
    pub execution: Execution,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { levels: vec![1.0 / 256.0, 1.0 / 512.0], detect_h: 1.0 / 256.0, scale_h: 1.0 / 64.0, execution: Execution::default() }
    }
}

impl ProbeConfig {
    fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.iter().any(|h| *h <= 0.0) || self.levels.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("probe levels must be positive and strictly decreasing".into()));
        }
        if self.detect_h <= 0.0 || self.scale_h <= 0.0 {
            return Err(Error::InvalidArgument("grid spacings must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeLevel {
    pub h: f64,
    pub radii: [f64; 3],
    /// Diameter of the value set on `B(z0, r) ∩ K` per radius.
    pub osc: [f64; 3],
    /// `max(0, 2 osc(r1) - osc(r2))`, the oscillation extrapolated to `r = 0`.
    pub spread: f64,
    /// Largest magnitude of the quantity over the domain samples.
    pub scale: f64,
    pub samples: usize,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeEvidence {
    pub quantity: Quantity,
    pub label: String,
    pub center: C,
    pub levels: Vec<ProbeLevel>,
    pub outcome: Outcome,
    pub note: Option<String>,
}

/// Sample points around `z0` up to radius `r`: a polar lattice with
/// uniform and geometric radii, analytic boundary points and `z0`.
fn probe_points(domain: &CompactDomain, z0: C, r: f64, h: f64) -> Vec<C> {
    let angles = 96;
    let mut radii: Vec<f64> = (1..=24).map(|k| r * k as f64 / 24.0).collect();
    radii.extend((1..=24).map(|j| r * 0.5f64.powf(j as f64 / 2.0)));
    let mut pts = Vec::with_capacity(radii.len() * angles + 64);
    for rho in radii {
        for a in 0..angles {
            let z = z0 + C::from_polar(rho, 2.0 * PI * (a as f64 + 0.25) / angles as f64);
            if domain.contains(z) {
                pts.push(z);
            }
        }
    }
    pts.extend(domain.boundary_points(h / 4.0).into_iter().filter(|z| (z - z0).norm() <= r));
    if domain.contains(z0) {
        pts.push(z0);
    }
    pts
}

/// Diameter of a planar point set, from the widths of 90 projections.
fn diameter(vals: &[C]) -> f64 {
    if vals.len() < 2 {
        return 0.0;
    }
    (0..90)
        .map(|k| {
            let d = C::from_polar(1.0, PI * k as f64 / 90.0).conj();
            let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let p = (v * d).re;
                (lo.min(p), hi.max(p))
            });
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn classify(spread: f64, scale: f64) -> Outcome {
    if spread <= PASS_FRACTION * scale || scale == 0.0 {
        Outcome::Pass
    } else if spread >= FAIL_FRACTION * scale {
        Outcome::Fail
    } else {
        Outcome::Inconclusive
    }
}

struct ProbeContext<'a> {
    domain: &'a CompactDomain,
    scale_points: Vec<C>,
    cfg: &'a ProbeConfig,
}

impl<'a> ProbeContext<'a> {
    fn new(domain: &'a CompactDomain, cfg: &'a ProbeConfig) -> Result<Self> {
        let mask = domain_mask(domain, cfg.scale_h)?;
        let g = mask.grid();
        let mut scale_points: Vec<C> = mask.inside_nodes().into_iter().map(|i| g.point(i)).collect();
        scale_points.extend(domain.boundary_points(cfg.scale_h));
        Ok(ProbeContext { domain, scale_points, cfg })
    }

    fn probe(&self, ext: &Extended, q: Quantity, label: &str, z0: C) -> ProbeEvidence {
        let s = Sampler::new(ext, q);
        let exec = self.cfg.execution;
        let mut levels = Vec::with_capacity(self.cfg.levels.len());
        for &h in &self.cfg.levels {
            let radii = PROBE_RADII.map(|k| k * h);
            let pts = probe_points(self.domain, z0, radii[2], h);
            let vals = map_range(exec, pts.len(), |k| s.sample(pts[k], z0, h));
            let local: Vec<(f64, C)> =
                pts.iter().zip(&vals).filter_map(|(z, v)| v.map(|v| ((z - z0).norm(), v))).collect();
            let osc = radii.map(|r| {
                let inside: Vec<C> = local.iter().filter(|(d, _)| *d <= r).map(|(_, v)| *v).collect();
                diameter(&inside)
            });
            let far = map_range(exec, self.scale_points.len(), |k| s.sample(self.scale_points[k], z0, h));
            let scale = local.iter().map(|(_, v)| v.norm()).chain(far.iter().flatten().map(|v| v.norm())).fold(0.0, f64::max);
            let spread = (2.0 * osc[0] - osc[1]).max(0.0);
            levels.push(ProbeLevel { h, radii, osc, spread, scale, samples: local.len(), outcome: classify(spread, scale) });
        }
        let outcome = Outcome::across_levels(&levels.iter().map(|l| l.outcome).collect::<Vec<_>>());
        ProbeEvidence { quantity: q, label: label.to_string(), center: z0, levels, outcome, note: None }
    }

    /// Largest central-difference gradient on annuli `r/2 < |z - z0| <= r`
    /// for the probe radii at the finest level, with its log-log slope.
    fn gradient_decay(&self, ext: &Extended, z0: C) -> Result<DecayFit> {
        let h = *self.cfg.levels.last().expect("validated");
        let radii: Vec<f64> = PROBE_RADII.iter().rev().map(|k| k * h).collect();
        let pts = probe_points(self.domain, z0, radii[0], h);
        let sx = Sampler::new(ext, Quantity::Dx);
        let sy = Sampler::new(ext, Quantity::Dy);
        let grads = map_range(self.cfg.execution, pts.len(), |k| {
            match (sx.sample(pts[k], z0, h), sy.sample(pts[k], z0, h)) {
                (Some(a), Some(b)) => Some(a.norm().max(b.norm())),
                _ => None,
            }
        });
        let maxima: Vec<f64> = radii
            .iter()
            .map(|&r| {
                pts.iter()
                    .zip(&grads)
                    .filter(|(z, _)| {
                        let d = (*z - z0).norm();
                        d > 0.5 * r && d <= r
                    })
                    .filter_map(|(_, g)| *g)
                    .fold(0.0, f64::max)
            })
            .collect();
        let slope = loglog_slope(&radii, &maxima, 1e-12)?;
        Ok(DecayFit { center: z0, radii, maxima, pass: slope.at_least(GRADIENT_DECAY_SLOPE), slope })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub center: C,
    pub radii: Vec<f64>,
    pub maxima: Vec<f64>,
    #[serde(serialize_with = "ser_slope")]
    pub slope: Slope,
    pub pass: bool,
}

/// Zero set of a denominator on a detection mask.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroSet {
    pub tol: f64,
    /// One representative per cluster, plus tagged points in the zero set.
    pub centers: Vec<C>,
    pub largest_cluster: usize,
    #[serde(skip)]
    pub nodes: Vec<usize>,
}

impl ZeroSet {
    pub fn is_discrete(&self) -> bool {
        self.largest_cluster <= MAX_CLUSTER_NODES
    }
}

fn zero_set(den: &Generator, mask: &RegionMask, domain: &CompactDomain, exec: Execution) -> Result<ZeroSet> {
    let g = mask.grid();
    let vals: Vec<Option<f64>> = map_range(exec, g.len(), |i| {
        if mask.is_inside(i) {
            den.eval(g.point(i)).ok().map(|v| v.norm())
        } else {
            None
        }
    });
    let max = vals.iter().flatten().cloned().fold(0.0, f64::max);
    let tol = ZERO_LEVEL * max;
    let small: Vec<bool> = vals.iter().map(|v| v.is_some_and(|v| v <= tol)).collect();
    let mut seen = vec![false; g.len()];
    let mut centers = Vec::new();
    let mut nodes = Vec::new();
    let mut largest = 0;
    for start in 0..g.len() {
        if !small[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut cluster = Vec::new();
        while let Some(i) = queue.pop_front() {
            cluster.push(i);
            for (n, _) in g.neighbors8(i) {
                if small[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        largest = largest.max(cluster.len());
        let best = *cluster
            .iter()
            .min_by(|&&a, &&b| vals[a].unwrap().total_cmp(&vals[b].unwrap()).then(a.cmp(&b)))
            .expect("non-empty");
        centers.push(g.point(best));
        nodes.extend(cluster);
    }
    for t in domain.tagged_points() {
        let hit = den.eval(t).is_ok_and(|v| v.norm() <= tol);
        if hit && centers.iter().all(|c| (c - t).norm() > 2.0 * g.h) {
            centers.push(t);
        }
    }
    Ok(ZeroSet { tol, centers, largest_cluster: largest, nodes })
}

/// Check `lhs(z) <= rhs(z)` on Inside nodes where both evaluate, with
/// relative slack.
fn check_inequality(
    mask: &RegionMask,
    exec: Execution,
    what: &str,
    pair: impl Fn(C) -> Result<(f64, f64)> + Sync,
) -> Result<()> {
    let g = mask.grid();
    let vals = map_range(exec, g.len(), |i| if mask.is_inside(i) { pair(g.point(i)).ok() } else { None });
    let scale = vals.iter().flatten().map(|(_, r)| *r).fold(0.0, f64::max);
    let mut bad: Vec<(f64, C)> = vals
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let (l, r) = (*v)?;
            let excess = l - r * (1.0 + INEQUALITY_SLACK) - ZERO_LEVEL * scale;
            (excess > 0.0).then_some((excess, g.point(i)))
        })
        .collect();
    if bad.is_empty() {
        return Ok(());
    }
    bad.sort_by(|a, b| b.0.total_cmp(&a.0));
    Err(Error::precondition(what, bad.into_iter().map(|(_, z)| z).collect()))
}

/// The quotient field `h = f^N / g` with `h = 0` on `Z(g)`.
#[derive(Clone, Debug)]
pub struct Division {
    pub h: SampledField,
    pub power: u32,
    pub zero_set: ZeroSet,
    /// `max |f| / |g|` off the zero set.
    pub max_ratio: f64,
}

/// Divide `f^N` by `g` on the Inside nodes of `mask`.
///
/// Requires `|f| <= |g|` on every Inside node off the zero set; nodes where
/// `f` has a pole count only if they lie in `Z(g)`, where `h` is zero.
pub fn divide(f: &ComplexExpr, g: &Generator, power: u32, mask: Arc<RegionMask>, domain: &CompactDomain, exec: Execution) -> Result<Division> {
    if power == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let zs = zero_set(g, &mask, domain, exec)?;
    let tol = zs.tol;
    check_inequality(&mask, exec, "|f| <= |g|", |z| {
        let gv = g.eval(z)?;
        if gv.norm() <= tol {
            return Ok((0.0, 0.0));
        }
        Ok((f.eval(z)?.norm(), gv.norm()))
    })?;
    let h = SampledField::from_fn(mask.clone(), NodeSet::Inside, exec, |_, z| {
        let gv = g.eval(z)?;
        if gv.norm() <= tol {
            return Ok(ZERO);
        }
        Ok(f.eval(z)?.powu(power) / gv)
    })?;
    let grid = mask.grid();
    let max_ratio = h
        .defined_nodes()
        .into_iter()
        .filter_map(|i| {
            let z = grid.point(i);
            let gv = g.eval(z).ok()?;
            (gv.norm() > tol).then(|| f.eval(z).ok().map(|fv| fv.norm() / gv.norm())).flatten()
        })
        .fold(0.0, f64::max);
    Ok(Division { h, power, zero_set: zs, max_ratio })
}

#[derive(Clone, Debug, Serialize)]
pub struct HolomorphyCheck {
    pub max_dbar: f64,
    pub scale: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisionCertificate {
    pub f: String,
    pub g: String,
    pub power: u32,
    pub class: ClassClaim,
    pub centers: Vec<C>,
    pub evidence: Vec<ProbeEvidence>,
    /// Decay of `|h|` towards each zero: slope of the annulus maxima.
    pub value_decay: Vec<Option<f64>>,
    pub holomorphy: Option<HolomorphyCheck>,
    pub outcome: Outcome,
    pub notes: Vec<String>,
}

impl DivisionCertificate {
    pub fn render(&self) -> String {
        let mut s = format!(
            "f = {}\ng = {}\npower = {}\nclass = {}\noutcome = {}\n",
            self.f, self.g, self.power, self.class, self.outcome
        );
        for e in &self.evidence {
            s.push_str(&format!("probe {} at {:.6}{:+.6}i: {}", e.label, e.center.re, e.center.im, e.outcome));
            for l in &e.levels {
                s.push_str(&format!(" [h={:.3e} spread={:.3e} scale={:.3e}]", l.h, l.spread, l.scale));
            }
            s.push('\n');
        }
        if let Some(hc) = &self.holomorphy {
            s.push_str(&format!("holomorphy: max |dbar h| = {:.3e} ({})\n", hc.max_dbar, if hc.pass { "PASS" } else { "FAIL" }));
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

fn value_decay(ctx: &ProbeContext, ext: &Extended, z0: C) -> Option<f64> {
    let h = *ctx.cfg.levels.last()?;
    let radii: Vec<f64> = PROBE_RADII.iter().rev().map(|k| k * h).collect();
    let pts = probe_points(ctx.domain, z0, radii[0], h);
    let maxima: Vec<f64> = radii
        .iter()
        .map(|&r| {
            pts.iter()
                .filter(|z| {
                    let d = (*z - z0).norm();
                    d > 0.5 * r && d <= r
                })
                .filter_map(|z| ext.value(*z).ok())
                .map(|v| v.norm())
                .fold(0.0, f64::max)
        })
        .collect();
    if maxima.iter().any(|m| *m == 0.0) {
        return None;
    }
    match loglog_slope(&radii, &maxima, 0.0).ok()? {
        Slope::Value(s) => Some(s),
        Slope::Exact => None,
    }
}

/// Certify the claimed class of `h = f^N / g` by continuity probes of the
/// relevant quantities around each point of `Z(g)`.
pub fn certify_class(
    f: &ComplexExpr,
    g: &Generator,
    power: u32,
    domain: &CompactDomain,
    class: ClassClaim,
    cfg: &ProbeConfig,
) -> Result<DivisionCertificate> {
    cfg.validate()?;
    let mask = domain_mask(domain, cfg.detect_h)?;
    let div = divide(f, g, power, mask, domain, cfg.execution)?;
    let ext = Extended { num: f.powi(power as i32), den: g.clone(), tol: div.zero_set.tol };
    let ctx = ProbeContext::new(domain, cfg)?;
    let mut notes = Vec::new();
    let mut evidence = Vec::new();
    for &z0 in &div.zero_set.centers {
        for &q in class.quantities() {
            let mut e = ctx.probe(&ext, q, &q.to_string(), z0);
            if !div.zero_set.is_discrete() {
                e.outcome = Outcome::Inconclusive;
                e.note = Some("zero set is not discrete".into());
            }
            evidence.push(e);
        }
    }
    if div.zero_set.centers.is_empty() {
        notes.push("g has no zeros on K; the quotient is as smooth as f and g".into());
    }
    if !div.zero_set.is_discrete() {
        notes.push(format!("zero set has a cluster of {} nodes; probes are inconclusive there", div.zero_set.largest_cluster));
    }
    let value_decay = div.zero_set.centers.iter().map(|&z0| value_decay(&ctx, &ext, z0)).collect();
    let holomorphy = if class.holomorphic() {
        Some(holomorphy_check(&ctx, &ext, f, g, &div.zero_set.centers))
    } else {
        None
    };
    let mut outcome = Outcome::combine(evidence.iter().map(|e| e.outcome));
    if holomorphy.as_ref().is_some_and(|h| !h.pass) {
        outcome = Outcome::Fail;
    }
    Ok(DivisionCertificate {
        f: f.to_string(),
        g: g.to_string(),
        power,
        class,
        centers: div.zero_set.centers.clone(),
        evidence,
        value_decay,
        holomorphy,
        outcome,
        notes,
    })
}

fn holomorphy_check(ctx: &ProbeContext, ext: &Extended, f: &ComplexExpr, g: &Generator, centers: &[C]) -> HolomorphyCheck {
    if !f.is_conj_free() || !g.is_holomorphic() {
        return HolomorphyCheck { max_dbar: f64::INFINITY, scale: 0.0, pass: false };
    }
    let dbar = Sampler::new(ext, Quantity::Dbar);
    let value = Sampler::new(ext, Quantity::Value);
    let h = *ctx.cfg.levels.last().expect("validated");
    let mut pts = ctx.scale_points.clone();
    for &c in centers {
        pts.extend(probe_points(ctx.domain, c, PROBE_RADII[2] * h, h));
    }
    let z0 = centers.first().copied().unwrap_or(ZERO);
    let both = map_range(ctx.cfg.execution, pts.len(), |k| {
        (dbar.sample(pts[k], z0, h).map(|v| v.norm()), value.sample(pts[k], z0, h).map(|v| v.norm()))
    });
    let max_dbar = both.iter().filter_map(|b| b.0).fold(0.0, f64::max);
    let scale = both.iter().filter_map(|b| b.1).fold(0.0, f64::max);
    HolomorphyCheck { max_dbar, scale, pass: max_dbar <= 1e-8 * scale.max(1.0) }
}

/// Which derivatives enter a bound scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// Symbolic complex derivatives; `f` and `g` must be holomorphic.
    Holomorphic,
    /// Central-difference mixed partials `(d/dx)^j1 (d/dy)^j2`, `j1 + j2 = n`.
    Smooth,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundLevel {
    pub h: f64,
    pub constant: f64,
    pub worst: C,
    pub nodes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundScan {
    pub m: usize,
    pub n: usize,
    pub variant: BoundVariant,
    /// `f` and `g` were divided by this factor so that `max |g| <= 1`.
    pub rescale: f64,
    pub levels: Vec<BoundLevel>,
    pub stable: bool,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central-difference `(d/dx)^jx (d/dy)^jy q(z)` with step `s`.
fn mixed_partial(q: &impl Fn(C) -> Result<C>, z: C, jx: usize, jy: usize, s: f64) -> Result<C> {
    let mut acc = ZERO;
    for a in 0..=jx {
        for b in 0..=jy {
            let w = binomial(jx, a) * binomial(jy, b) * if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            let p = z + C::new((jx as f64 / 2.0 - a as f64) * s, (jy as f64 / 2.0 - b as f64) * s);
            acc += q(p)? * w;
        }
    }
    Ok(acc / s.powi((jx + jy) as i32))
}

/// Estimate `C` in `|(f^(m+2)/g)^(n)| <= C |g|^(m+1-n)` on the shrunk
/// Interior off `Z(g)` at each spacing in `hs`.
pub fn derivative_bound_scan(
    f: &ComplexExpr,
    g: &ComplexExpr,
    m: usize,
    n: usize,
    domain: &CompactDomain,
    variant: BoundVariant,
    hs: &[f64],
    exec: Execution,
) -> Result<BoundScan> {
    if n > m + 1 {
        return Err(Error::InvalidArgument(format!("derivative order {n} exceeds m + 1 = {}", m + 1)));
    }
    if hs.len() < 2 || hs.windows(2).any(|w| w[1] >= w[0]) || hs.iter().any(|h| *h <= 0.0) {
        return Err(Error::InvalidArgument("need at least two strictly decreasing spacings".into()));
    }
    if variant == BoundVariant::Holomorphic && !(f.is_conj_free() && g.is_conj_free()) {
        return Err(Error::InvalidArgument(
            "symbolic complex derivative unavailable: f and g must be holomorphic expressions".into(),
        ));
    }
    let coarse = domain_mask(domain, hs[0])?;
    let gen = Generator::Expr(g.clone());
    let zs = zero_set(&gen, &coarse, domain, exec)?;
    check_inequality(&coarse, exec, "|f| <= |g|", |z| {
        let gv = g.eval(z)?;
        if gv.norm() <= zs.tol {
            return Ok((0.0, 0.0));
        }
        Ok((f.eval(z)?.norm(), gv.norm()))
    })?;
    let gmax = zs.tol / ZERO_LEVEL;
    let rescale = gmax.max(1.0);
    let k = ComplexExpr::real(1.0 / rescale);
    let (fs, gs) = (f.mul(&k), g.mul(&k));
    let quotient = fs.powi(m as i32 + 2).div(&gs);
    let mut dq = quotient.clone();
    for _ in 0..n {
        dq = dq.d();
    }
    let tol = zs.tol / rescale;
    let exponent = (m + 1 - n) as i32;
    let mut levels = Vec::with_capacity(hs.len());
    for &h in hs {
        let mask = domain_mask(domain, h)?;
        let grid = *mask.grid();
        let nodes = mask.shrunk_interior(n + 1, 0.0);
        let q = |z: C| -> Result<C> {
            let gv = gs.eval(z)?;
            if gv.norm() <= tol {
                return Err(Error::Numerical("stencil touches the zero set".into()));
            }
            Ok(fs.eval(z)?.powi(m as i32 + 2) / gv)
        };
        let ratios = map_range(exec, nodes.len(), |k| -> Option<f64> {
            let z = grid.point(nodes[k]);
            let gv = gs.eval(z).ok()?;
            if gv.norm() <= tol {
                return None;
            }
            let d = match variant {
                BoundVariant::Holomorphic => dq.eval(z).ok()?.norm(),
                BoundVariant::Smooth => (0..=n)
                    .map(|jx| mixed_partial(&q, z, jx, n - jx, h).map(|v| v.norm()))
                    .collect::<Result<Vec<_>>>()
                    .ok()?
                    .into_iter()
                    .fold(0.0, f64::max),
            };
            let r = d / gv.norm().powi(exponent);
            r.is_finite().then_some(r)
        });
        let (best, worst) = ratios
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.map(|r| (r, k)))
            .fold((0.0, None), |(b, w), (r, k)| if r > b { (r, Some(k)) } else { (b, w) });
        let count = ratios.iter().flatten().count();
        if count == 0 {
            return Err(Error::Domain(format!("no Interior nodes off Z(g) at h = {h}")));
        }
        levels.push(BoundLevel { h, constant: best, worst: worst.map_or(ZERO, |k| grid.point(nodes[k])), nodes: count });
    }
    let l = levels.len();
    let stable = ratio_stable(levels[l - 2].constant, levels[l - 1].constant);
    Ok(BoundScan { m, n, variant, rescale, levels, stable })
}

fn sum_abs2(fs: &[ComplexExpr]) -> ComplexExpr {
    fs.iter().skip(1).fold(fs[0].abs2(), |acc, f| acc.add(&f.abs2()))
}

/// `g_j = h^2 conj(f_j) / sum |f_k|^2`, zero on the common zero set.
#[derive(Clone, Debug)]
pub struct MultiDivision {
    pub g: Vec<SampledField>,
    /// `max_j max |h conj(f_j) / sum |f_k|^2|`.
    pub q_max: f64,
    /// `max |sum g_j f_j - h^2|` off the common zero set.
    pub residual: f64,
    pub zero_nodes: usize,
}

impl MultiDivision {
    pub fn bound_holds(&self) -> bool {
        self.q_max <= self.g.len() as f64 + 1e-6
    }
}

fn node_values(exprs: &[ComplexExpr], mask: &RegionMask, exec: Execution) -> Result<Vec<Vec<C>>> {
    let g = mask.grid();
    let nodes = mask.inside_nodes();
    exprs
        .iter()
        .map(|e| map_range(exec, nodes.len(), |k| e.eval(g.point(nodes[k]))).into_iter().collect::<Result<Vec<_>>>())
        .collect()
}

fn check_sum_bound(h: &[C], fv: &[Vec<C>], mask: &RegionMask) -> Result<Vec<f64>> {
    let sums: Vec<f64> = (0..h.len()).map(|k| fv.iter().map(|f| f[k].norm()).sum()).collect();
    let scale = sums.iter().cloned().fold(0.0, f64::max);
    let nodes = mask.inside_nodes();
    let mut bad: Vec<(f64, C)> = (0..h.len())
        .filter_map(|k| {
            let excess = h[k].norm() - sums[k] * (1.0 + INEQUALITY_SLACK) - ZERO_LEVEL * scale;
            (excess > 0.0).then(|| (excess, mask.grid().point(nodes[k])))
        })
        .collect();
    if !bad.is_empty() {
        bad.sort_by(|a, b| b.0.total_cmp(&a.0));
        return Err(Error::precondition("|h| <= sum |f_j|", bad.into_iter().map(|(_, z)| z).collect()));
    }
    Ok(sums)
}

/// Continuous solution of `sum g_j f_j = h^2` on the Inside nodes.
pub fn multi_division_continuous(h: &ComplexExpr, f: &[ComplexExpr], mask: Arc<RegionMask>, exec: Execution) -> Result<MultiDivision> {
    if f.is_empty() {
        return Err(Error::InvalidArgument("need at least one generator".into()));
    }
    let hv = node_values(std::slice::from_ref(h), &mask, exec)?.remove(0);
    let fv = node_values(f, &mask, exec)?;
    let sums = check_sum_bound(&hv, &fv, &mask)?;
    let scale = sums.iter().cloned().fold(0.0, f64::max);
    let tol = (ZERO_LEVEL * scale).powi(2);
    let len = hv.len();
    let s2: Vec<f64> = (0..len).map(|k| fv.iter().map(|f| f[k].norm_sqr()).sum()).collect();
    let zero: Vec<bool> = s2.iter().map(|v| *v <= tol).collect();
    let q: Vec<Vec<C>> = fv
        .iter()
        .map(|fj| (0..len).map(|k| if zero[k] { ZERO } else { hv[k] * fj[k].conj() / s2[k] }).collect())
        .collect();
    let q_max = q.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let gj: Vec<Vec<C>> = q.iter().map(|qj| (0..len).map(|k| hv[k] * qj[k]).collect()).collect();
    let residual = (0..len)
        .filter(|&k| !zero[k])
        .map(|k| ((0..f.len()).map(|j| gj[j][k] * fv[j][k]).sum::<C>() - hv[k] * hv[k]).norm())
        .fold(0.0, f64::max);
    let nodes = mask.inside_nodes();
    let len_all = mask.grid().len();
    let g = gj
        .into_iter()
        .map(|vals| {
            let mut full = vec![ZERO; len_all];
            let mut defined = vec![false; len_all];
            for (k, &i) in nodes.iter().enumerate() {
                full[i] = vals[k];
                defined[i] = true;
            }
            SampledField::from_parts(mask.clone(), full, defined)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiDivision { g, q_max, residual, zero_nodes: zero.iter().filter(|z| **z).count() })
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiC1 {
    pub power: u32,
    /// `max |sum q_j f_j - h^N|` off the common zero set.
    pub residual: f64,
    /// `max |D q_j| / |f|` per level.
    pub gradient_bound: Vec<(f64, f64)>,
    pub stable: bool,
    pub centers: Vec<C>,
    pub probes: Vec<ProbeEvidence>,
    pub outcome: Outcome,
}

/// Solution `q_j = conj(f_j) h^N / sum |f_k|^2` of `sum q_j f_j = h^N`
/// with C¹ evidence: the gradient bound `|D q_j| <= C |f|` across levels
/// and continuity probes of the central-difference gradient at the common
/// zeros.
pub fn multi_division_power(
    h: &ComplexExpr,
    f: &[ComplexExpr],
    power: u32,
    domain: &CompactDomain,
    bound_levels: &[f64],
    cfg: &ProbeConfig,
) -> Result<MultiC1> {
    cfg.validate()?;
    if f.is_empty() || power == 0 {
        return Err(Error::InvalidArgument("need at least one generator and a positive power".into()));
    }
    if bound_levels.len() < 2 || bound_levels.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("need at least two strictly decreasing bound levels".into()));
    }
    let exec = cfg.execution;
    let den = Generator::Expr(sum_abs2(f));
    let detect = domain_mask(domain, cfg.detect_h)?;
    let hv = node_values(std::slice::from_ref(h), &detect, exec)?.remove(0);
    let fv = node_values(f, &detect, exec)?;
    check_sum_bound(&hv, &fv, &detect)?;
    let zs = zero_set(&den, &detect, domain, exec)?;
    if !zs.is_discrete() {
        return Err(Error::precondition(
            format!("common zero set is not discrete (cluster of {} nodes)", zs.largest_cluster),
            zs.centers.clone(),
        ));
    }
    let hn = h.powi(power as i32);
    let exts: Vec<Extended> =
        f.iter().map(|fj| Extended { num: hn.mul(&fj.conj()), den: den.clone(), tol: zs.tol }).collect();
    let mut residual: f64 = 0.0;
    let mut gradient_bound = Vec::with_capacity(bound_levels.len());
    for &lh in bound_levels {
        let mask = domain_mask(domain, lh)?;
        let grid = *mask.grid();
        let nodes = mask.shrunk_interior(1, 0.0);
        let per = map_range(exec, nodes.len(), |k| -> Result<(f64, f64)> {
            let z = grid.point(nodes[k]);
            let s2 = den.eval(z)?;
            if s2.norm() <= zs.tol {
                return Ok((0.0, 0.0));
            }
            let mut sum = ZERO;
            let mut grad: f64 = 0.0;
            for (j, e) in exts.iter().enumerate() {
                sum += e.value(z)? * f[j].eval(z)?;
                for dir in [C::new(lh, 0.0), C::new(0.0, lh)] {
                    grad = grad.max(((e.value(z + dir)? - e.value(z - dir)?) / (2.0 * lh)).norm());
                }
            }
            let res = (sum - hn.eval(z)?).norm();
            Ok((res, grad / s2.re.sqrt()))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        residual = residual.max(per.iter().map(|p| p.0).fold(0.0, f64::max));
        gradient_bound.push((lh, per.iter().map(|p| p.1).fold(0.0, f64::max)));
    }
    let l = gradient_bound.len();
    let stable = ratio_stable(gradient_bound[l - 2].1, gradient_bound[l - 1].1);
    let ctx = ProbeContext::new(domain, cfg)?;
    let mut probes = Vec::new();
    for &z0 in &zs.centers {
        for (j, e) in exts.iter().enumerate() {
            for q in [Quantity::Dx, Quantity::Dy] {
                probes.push(ctx.probe(e, q, &format!("{q} of q_{}", j + 1), z0));
            }
        }
    }
    let mut outcome = Outcome::combine(probes.iter().map(|p| p.outcome));
    if outcome == Outcome::Pass && !(stable && residual <= 1e-10) {
        outcome = Outcome::Inconclusive;
    }
    Ok(MultiC1 { power, residual, gradient_bound, stable, centers: zs.centers, probes, outcome })
}

/// [`multi_division_power`] with the power 3 that yields C¹ solutions.
pub fn multi_division_c1(h: &ComplexExpr, f: &[ComplexExpr], domain: &CompactDomain, cfg: &ProbeConfig) -> Result<MultiC1> {
    multi_division_power(h, f, 3, domain, &[1.0 / 128.0, 1.0 / 256.0], cfg)
}

/// Hypothesis tying the numerator to the generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionHypothesis {
    /// `|g| <= |f|`, paired with power 4.
    Linear,
    /// `|g|^2 <= |f|`, paired with power 7.
    Square,
}

impl ExtensionHypothesis {
    pub fn for_power(power: u32) -> Self {
        if power >= 7 {
            ExtensionHypothesis::Square
        } else {
            ExtensionHypothesis::Linear
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExtensionReport {
    pub power: u32,
    pub hypothesis: ExtensionHypothesis,
    pub field: SampledField,
    pub centers: Vec<C>,
    pub probes: Vec<ProbeEvidence>,
    pub decay: Vec<DecayFit>,
    pub outcome: Outcome,
}

/// The zero-extended field `g^power / |f|^2` with C¹ evidence at the zeros
/// of `|f|`: continuity probes of its gradient and the decay of the
/// gradient towards each zero.
pub fn quotient_extension_lemma(
    g: &ComplexExpr,
    f: &[ComplexExpr],
    power: u32,
    hypothesis: ExtensionHypothesis,
    domain: &CompactDomain,
    cfg: &ProbeConfig,
) -> Result<ExtensionReport> {
    cfg.validate()?;
    if f.is_empty() || power == 0 {
        return Err(Error::InvalidArgument("need at least one generator and a positive power".into()));
    }
    let exec = cfg.execution;
    let den = Generator::Expr(sum_abs2(f));
    let mask = domain_mask(domain, cfg.detect_h)?;
    let modulus = |z: C| -> Result<f64> { Ok(den.eval(z)?.re.max(0.0).sqrt()) };
    match hypothesis {
        ExtensionHypothesis::Linear => check_inequality(&mask, exec, "|g| <= |f|", |z| Ok((g.eval(z)?.norm(), modulus(z)?)))?,
        ExtensionHypothesis::Square => {
            check_inequality(&mask, exec, "|g|^2 <= |f|", |z| Ok((g.eval(z)?.norm_sqr(), modulus(z)?)))?
        }
    }
    let zs = zero_set(&den, &mask, domain, exec)?;
    if !zs.is_discrete() {
        return Err(Error::precondition(
            format!("zeros of |f| are not isolated (cluster of {} nodes)", zs.largest_cluster),
            zs.centers.clone(),
        ));
    }
    let ext = Extended { num: g.powi(power as i32), den, tol: zs.tol };
    let field = SampledField::from_fn(mask, NodeSet::Inside, exec, |_, z| ext.value(z))?;
    let ctx = ProbeContext::new(domain, cfg)?;
    let mut probes = Vec::new();
    let mut decay = Vec::new();
    for &z0 in &zs.centers {
        for q in [Quantity::Value, Quantity::Dx, Quantity::Dy] {
            probes.push(ctx.probe(&ext, q, &q.to_string(), z0));
        }
        decay.push(ctx.gradient_decay(&ext, z0)?);
    }
    let mut outcome = Outcome::combine(probes.iter().map(|p| p.outcome));
    if decay.iter().any(|d| !d.pass) && outcome == Outcome::Pass {
        outcome = Outcome::Fail;
    }
    Ok(ExtensionReport { power, hypothesis, field, centers: zs.centers, probes, decay, outcome })
}

/// One sharpness case: `f^N` is divisible in the
/// claimed class at `power` but not at `power - 1`.
#[derive(Clone, Debug)]
pub struct SharpnessItem {
    pub label: &'static str,
    pub class: ClassClaim,
    pub f: ComplexExpr,
    pub g: Generator,
    pub domain: CompactDomain,
    pub power: u32,
    pub levels: Vec<f64>,
}

fn parse(s: &str) -> ComplexExpr {
    ComplexExpr::parse(s).expect("built-in expression")
}

pub const SECTOR_COUNT: usize = 8;

/// The six division counterexamples.
pub fn sharpness_items() -> Vec<SharpnessItem> {
    let disk = CompactDomain::unit_disk();
    let std = ProbeConfig::default().levels;
    let s_f = parse("mul(sub(1, z), S)");
    let s_g = parse("sub(1, z)");
    let cube = parse("pow(sub(1, z), 3)");
    vec![
        SharpnessItem { label: "a", class: ClassClaim::C0, f: s_f.clone(), g: Generator::Expr(s_g.clone()), domain: disk.clone(), power: 2, levels: std.clone() },
        SharpnessItem { label: "b", class: ClassClaim::C1, f: parse("z"), g: Generator::Expr(parse("conj(z)")), domain: disk.clone(), power: 3, levels: std.clone() },
        SharpnessItem { label: "c", class: ClassClaim::A0, f: s_f, g: Generator::Expr(s_g), domain: disk.clone(), power: 2, levels: std.clone() },
        SharpnessItem {
            label: "d",
            class: ClassClaim::A1,
            f: parse("z"),
            g: Generator::SectorCornerConj,
            domain: CompactDomain::SectorChain { count: SECTOR_COUNT },
            power: 3,
            levels: vec![0.5f64.powi(11), 0.5f64.powi(12)],
        },
        SharpnessItem { label: "e", class: ClassClaim::A1, f: parse("mul(pow(sub(1, z), 3), S)"), g: Generator::Expr(cube), domain: disk.clone(), power: 2, levels: std.clone() },
        SharpnessItem { label: "f", class: ClassClaim::Dbar1, f: parse("z"), g: Generator::Expr(parse("conj(z)")), domain: disk, power: 4, levels: std },
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessRow {
    pub label: String,
    pub class: String,
    pub power: u32,
    pub at_power: Outcome,
    pub below: Outcome,
    /// Tails of the derivative along the two sector edges, at the power
    /// below and at the stated power.
    pub directional: Option<[[C; 2]; 2]>,
    pub pass: bool,
}

/// Tails of `(z^N / g)'` along `e^{±i pi/4}` through the sector corners.
pub fn sector_tails(power: u32) -> Result<[C; 2]> {
    let radii: Vec<f64> = (1..=SECTOR_COUNT).map(sector_outer).collect();
    let num = ComplexExpr::z().powi(power as i32).d();
    let dirs = [C::from_polar(1.0, FRAC_PI_4), C::from_polar(1.0, -FRAC_PI_4)];
    let p = directional_limit_probe(|z| Ok(num.eval(z)? / sector_corner_conj(z)?), ZERO, &dirs, &radii, 0.1)?;
    match (p.tails[0], p.tails[1]) {
        (Some(a), Some(b)) => Ok([a, b]),
        _ => Err(Error::Numerical("directional probe found no samples".into())),
    }
}

pub fn run_sharpness_item(item: &SharpnessItem, cfg: &ProbeConfig) -> Result<SharpnessRow> {
    let cfg = ProbeConfig { levels: item.levels.clone(), ..cfg.clone() };
    let at = certify_class(&item.f, &item.g, item.power, &item.domain, item.class, &cfg)?;
    let below = certify_class(&item.f, &item.g, item.power - 1, &item.domain, item.class, &cfg)?;
    let mut pass = at.outcome == Outcome::Pass && below.outcome == Outcome::Fail;
    let directional = if matches!(item.g, Generator::SectorCornerConj) {
        let lo = sector_tails(item.power - 1)?;
        let hi = sector_tails(item.power)?;
        pass &= (lo[0] - lo[1]).norm() > 0.1 && (hi[0] - hi[1]).norm() <= 0.1;
        Some([lo, hi])
    } else {
        None
    };
    Ok(SharpnessRow {
        label: item.label.to_string(),
        class: item.class.to_string(),
        power: item.power,
        at_power: at.outcome,
        below: below.outcome,
        directional,
        pass,
    })
}

/// The six division items followed by the extension-lemma pair and the
/// multi-generator C¹ pair.
pub fn sharpness_battery(cfg: &ProbeConfig) -> Result<Vec<SharpnessRow>> {
    let mut rows = sharpness_items().iter().map(|it| run_sharpness_item(it, cfg)).collect::<Result<Vec<_>>>()?;
    let disk = CompactDomain::unit_disk();
    let (z, zb) = (ComplexExpr::z(), parse("conj(z)"));
    let hi = quotient_extension_lemma(&z, std::slice::from_ref(&zb), 4, ExtensionHypothesis::Linear, &disk, cfg)?;
    let lo = quotient_extension_lemma(&z, std::slice::from_ref(&zb), 3, ExtensionHypothesis::Linear, &disk, cfg)?;
    rows.push(SharpnessRow {
        label: "g^4/|f|^2".into(),
        class: "C1".into(),
        power: 4,
        at_power: hi.outcome,
        below: lo.outcome,
        directional: None,
        pass: hi.outcome == Outcome::Pass && lo.outcome == Outcome::Fail,
    });
    let hi = multi_division_power(&z, std::slice::from_ref(&zb), 3, &disk, &[1.0 / 128.0, 1.0 / 256.0], cfg)?;
    let lo = multi_division_power(&z, std::slice::from_ref(&zb), 2, &disk, &[1.0 / 128.0, 1.0 / 256.0], cfg)?;
    rows.push(SharpnessRow {
        label: "h^N multi".into(),
        class: "C1".into(),
        power: 3,
        at_power: hi.outcome,
        below: lo.outcome,
        directional: None,
        pass: hi.outcome == Outcome::Pass && lo.outcome == Outcome::Fail,
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_conjugate() {
        let c2 = sector_corner(2);
        assert_eq!(sector_corner_conj(c2).unwrap(), c2.conj());
        assert_eq!(sector_corner_conj(c2.conj()).unwrap(), c2.conj());
        assert_eq!(sector_corner_conj(C::new(0.2, 0.0)).unwrap(), sector_corner(1).conj());
        assert!(sector_corner_conj(C::new(0.1, 0.0)).is_err());
        assert!(sector_corner_conj(C::new(0.0, 0.2)).is_err());
    }

    #[test]
    fn diameter_of_square() {
        let v = [C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 1.0), C::new(0.0, 1.0)];
        assert!((diameter(&v) - 2f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn mixed_partial_of_polynomial() {
        let q = |z: C| -> Result<C> { Ok(C::new(z.re * z.re * z.im, 0.0)) };
        let v = mixed_partial(&q, C::new(0.3, 0.2), 2, 1, 1e-2).unwrap();
        assert!((v.re - 2.0).abs() < 1e-6);
    }
}
