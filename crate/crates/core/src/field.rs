//! Complex values sampled on the nodes of a region mask, and discrete
//! Wirtinger operators.

use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::RegionMask;
use crate::error::{Error, Result};
use crate::expr::ComplexExpr;
use crate::parallel::{map_range, try_map_range, Execution};

type C = Complex64;

/// Which nodes of a mask carry values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeSet {
    Inside,
    Interior,
}

impl NodeSet {
    fn contains(self, mask: &RegionMask, idx: usize) -> bool {
        match self {
            NodeSet::Inside => mask.is_inside(idx),
            NodeSet::Interior => mask.is_interior(idx),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SampledField {
    mask: Arc<RegionMask>,
    values: Vec<C>,
    defined: Vec<bool>,
}

impl SampledField {
    /// Build from per-node values. Undefined nodes must hold zero; values
    /// must be finite.
    pub fn from_parts(mask: Arc<RegionMask>, values: Vec<C>, defined: Vec<bool>) -> Result<Self> {
        let n = mask.grid().len();
        if values.len() != n || defined.len() != n {
            return Err(Error::InvalidArgument("field length does not match the grid".into()));
        }
        for (idx, v) in values.iter().enumerate() {
            if defined[idx] && !mask.is_inside(idx) {
                return Err(Error::InvalidArgument("field defined on an Exterior node".into()));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Numerical(format!("non-finite value at {}", mask.grid().point(idx))));
            }
        }
        Ok(SampledField { mask, values, defined })
    }

    pub fn zeros(mask: Arc<RegionMask>, nodes: NodeSet) -> Self {
        let n = mask.grid().len();
        let defined = (0..n).map(|i| nodes.contains(&mask, i)).collect();
        SampledField { mask, values: vec![C::new(0.0, 0.0); n], defined }
    }

    /// Sample `f` at the chosen nodes.
    pub fn from_fn<F>(mask: Arc<RegionMask>, nodes: NodeSet, exec: Execution, f: F) -> Result<Self>
    where
        F: Fn(usize, C) -> Result<C> + Sync + Send,
    {
        let g = *mask.grid();
        let m = &mask;
        let values = try_map_range(exec, g.len(), |idx| {
            if nodes.contains(m, idx) {
                f(idx, g.point(idx))
            } else {
                Ok(C::new(0.0, 0.0))
            }
        })?;
        let defined = (0..g.len()).map(|i| nodes.contains(&mask, i)).collect();
        Self::from_parts(mask, values, defined)
    }

    pub fn from_expr(mask: Arc<RegionMask>, expr: &ComplexExpr, exec: Execution) -> Result<Self> {
        Self::from_fn(mask, NodeSet::Inside, exec, |_, z| expr.eval(z))
    }

    pub fn mask(&self) -> &Arc<RegionMask> {
        &self.mask
    }

    pub fn h(&self) -> f64 {
        self.mask.h()
    }

    pub fn get(&self, idx: usize) -> Option<C> {
        if self.defined[idx] {
            Some(self.values[idx])
        } else {
            None
        }
    }

    /// Raw node values (zero where undefined).
    pub fn values(&self) -> &[C] {
        &self.values
    }

    pub fn defined(&self) -> &[bool] {
        &self.defined
    }

    pub fn defined_nodes(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.defined[i]).collect()
    }

    pub fn defined_count(&self) -> usize {
        self.defined.iter().filter(|&&d| d).count()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().zip(&self.defined).filter(|(_, d)| **d).map(|(v, _)| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus over the listed nodes that are defined.
    pub fn max_abs_on(&self, nodes: &[usize]) -> f64 {
        nodes.iter().filter_map(|&i| self.get(i)).map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise combination on the nodes where both fields are defined.
    pub fn zip_with(&self, other: &SampledField, f: impl Fn(C, C) -> C) -> Result<SampledField> {
        if !Arc::ptr_eq(&self.mask, &other.mask) && self.mask.grid() != other.mask.grid() {
            return Err(Error::InvalidArgument("fields live on different grids".into()));
        }
        let n = self.values.len();
        let defined: Vec<bool> = (0..n).map(|i| self.defined[i] && other.defined[i]).collect();
        let values = (0..n)
            .map(|i| if defined[i] { f(self.values[i], other.values[i]) } else { C::new(0.0, 0.0) })
            .collect();
        Self::from_parts(self.mask.clone(), values, defined)
    }

    pub fn map(&self, f: impl Fn(usize, C) -> C) -> Result<SampledField> {
        let values = (0..self.values.len())
            .map(|i| if self.defined[i] { f(i, self.values[i]) } else { C::new(0.0, 0.0) })
            .collect();
        Self::from_parts(self.mask.clone(), values, self.defined.clone())
    }

    /// Restrict to the given node set.
    pub fn restrict(&self, nodes: NodeSet) -> SampledField {
        let n = self.values.len();
        let defined: Vec<bool> = (0..n).map(|i| self.defined[i] && nodes.contains(&self.mask, i)).collect();
        let values = (0..n).map(|i| if defined[i] { self.values[i] } else { C::new(0.0, 0.0) }).collect();
        SampledField { mask: self.mask.clone(), values, defined }
    }
}

#[derive(Clone, Copy)]
enum Wirtinger {
    D,
    Dbar,
}

/// Central-difference partials at node `idx`, if both neighbours along each
/// axis are defined.
fn central(f: &SampledField, idx: usize) -> Option<(C, C)> {
    let g = f.mask.grid();
    let (i, j) = g.ij(idx);
    if i == 0 || j == 0 || i + 1 >= g.nx || j + 1 >= g.ny {
        return None;
    }
    let e = f.get(idx + 1)?;
    let w = f.get(idx - 1)?;
    let n = f.get(idx + g.nx)?;
    let s = f.get(idx - g.nx)?;
    let h2 = 2.0 * g.h;
    Some(((e - w) / h2, (n - s) / h2))
}

/// One-dimensional derivative along an axis with the best stencil available.
fn axis_derivative(f: &SampledField, idx: usize, stride: isize, pos: usize, len: usize) -> C {
    let h = f.mask.grid().h;
    let at = |k: isize| -> Option<C> {
        let p = pos as isize + k;
        if p < 0 || p >= len as isize {
            return None;
        }
        f.get((idx as isize + k * stride) as usize)
    };
    let c0 = f.values[idx];
    match (at(-1), at(1)) {
        (Some(m), Some(p)) => (p - m) / (2.0 * h),
        (None, Some(p)) => match at(2) {
            Some(p2) => (-3.0 * c0 + 4.0 * p - p2) / (2.0 * h),
            None => (p - c0) / h,
        },
        (Some(m), None) => match at(-2) {
            Some(m2) => (3.0 * c0 - 4.0 * m + m2) / (2.0 * h),
            None => (c0 - m) / h,
        },
        (None, None) => C::new(0.0, 0.0),
    }
}

fn combine(kind: Wirtinger, fx: C, fy: C) -> C {
    let i = C::new(0.0, 1.0);
    match kind {
        Wirtinger::D => (fx - i * fy) / 2.0,
        Wirtinger::Dbar => (fx + i * fy) / 2.0,
    }
}

fn interior_operator(f: &SampledField, kind: Wirtinger) -> Result<SampledField> {
    let mask = f.mask.clone();
    if mask.interior_nodes().is_empty() {
        return Err(Error::Domain("no Interior nodes for the discrete derivative".into()));
    }
    let n = mask.grid().len();
    let pairs: Vec<Option<C>> = map_range(Execution::default(), n, |idx| {
        if !mask.is_interior(idx) {
            return None;
        }
        central(f, idx).map(|(fx, fy)| combine(kind, fx, fy))
    });
    let defined: Vec<bool> = pairs.iter().map(|p| p.is_some()).collect();
    let values = pairs.into_iter().map(|p| p.unwrap_or_default()).collect();
    SampledField::from_parts(mask, values, defined)
}

/// Discrete `dbar = (d/dx + i d/dy)/2` by central differences on Interior
/// nodes whose four axis neighbours carry values.
pub fn dbar_fd(f: &SampledField) -> Result<SampledField> {
    interior_operator(f, Wirtinger::Dbar)
}

/// Discrete `d = (d/dx - i d/dy)/2`, same stencil as [`dbar_fd`].
pub fn d_fd(f: &SampledField) -> Result<SampledField> {
    interior_operator(f, Wirtinger::D)
}

/// Discrete `dbar` on every defined node: central differences where
/// possible, second-order one-sided stencils next to the edge of the
/// support, first-order ones where only one neighbour exists.
pub fn dbar_fd_full(f: &SampledField) -> Result<SampledField> {
    let g = *f.mask.grid();
    let values = map_range(Execution::default(), g.len(), |idx| {
        if !f.defined[idx] {
            return C::new(0.0, 0.0);
        }
        let (i, j) = g.ij(idx);
        let fx = axis_derivative(f, idx, 1, i, g.nx);
        let fy = axis_derivative(f, idx, g.nx as isize, j, g.ny);
        combine(Wirtinger::Dbar, fx, fy)
    });
    SampledField::from_parts(f.mask.clone(), values, f.defined.clone())
}
