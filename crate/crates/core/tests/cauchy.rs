use dbar_core::cauchy::{
    cell_kernel_integral, dbar_study, domain_mask, pompeiu, pompeiu_field, pompeiu_on_grid, verify_dbar_solution,
    QuadratureConfig,
};
use dbar_core::domain::{build_mask, CompactDomain, GridSpec};
use dbar_core::expr::ComplexExpr;
use dbar_core::field::{dbar_fd, NodeSet, SampledField};
use dbar_core::study::Slope;
use dbar_core::{Execution, C64};
use proptest::prelude::*;
use std::sync::Arc;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Tanh-sinh quadrature on [a, b]; tolerates integrable endpoint singularities.
fn tanh_sinh<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> C64 {
    let half = 0.5 * (b - a);
    let pi2 = std::f64::consts::FRAC_PI_2;
    let mut step: f64 = 0.5;
    let mut prev: Option<C64> = None;
    loop {
        let n = (4.0 / step).ceil() as i64;
        let mut sum = c(0.0, 0.0);
        for k in -n..=n {
            let t = k as f64 * step;
            let u = pi2 * t.sinh();
            let w = pi2 * t.cosh() / (u.cosh() * u.cosh());
            // distance from the nearer endpoint, computed without cancellation
            let gap = half * 2.0 / ((2.0 * u.abs()).exp() + 1.0);
            if gap == 0.0 || !w.is_finite() {
                continue;
            }
            let x = if u >= 0.0 { b - gap } else { a + gap };
            sum += f(x) * w;
        }
        let val = sum * (half * step);
        if let Some(p) = prev {
            if (val - p).norm() <= 1e-15 * val.norm().max(1e-300) || step < 1e-3 {
                return val;
            }
        }
        prev = Some(val);
        step /= 2.0;
    }
}

/// Cell integral of 1/(w - z): analytic in y, tanh-sinh in x, with the x
/// range split where the integrand has its log singularity.
fn cell_oracle(center: C64, h: f64, z: C64) -> C64 {
    let (x1, x2) = (center.re - h / 2.0 - z.re, center.re + h / 2.0 - z.re);
    let (t1, t2) = (center.im - h / 2.0 - z.im, center.im + h / 2.0 - z.im);
    let inner = |a: f64| -> C64 {
        let re = (t2 / a).atan() - (t1 / a).atan();
        let im = -0.5 * ((a * a + t2 * t2) / (a * a + t1 * t1)).ln();
        c(re, im)
    };
    let mut cuts = vec![x1];
    if x1 < 0.0 && x2 > 0.0 {
        cuts.push(0.0);
    }
    cuts.push(x2);
    cuts.windows(2).map(|w| tanh_sinh(&inner, w[0], w[1])).sum()
}

#[test]
fn closed_form_cell_integral_matches_quadrature() {
    let h = 0.01;
    let center = c(0.3, -0.2);
    let targets = [
        center,
        center + c(h / 2.0, h / 2.0),
        center + c(-h / 2.0, h / 2.0),
        center + c(-h / 2.0, -h / 2.0),
        center + c(0.6 * h, 0.0),
        center + c(0.0, -0.6 * h),
        center + c(0.6 * h, 0.6 * h),
        center + c(0.17 * h, -0.31 * h),
        center + c(2.5 * h, -1.1 * h),
    ];
    for z in targets {
        let got = cell_kernel_integral(center, h, z);
        let want = cell_oracle(center, h, z);
        assert!((got - want).norm() <= 1e-10 * h.max(want.norm()), "z = {z}: {got} vs {want}");
    }
}

#[test]
fn zero_integrand_gives_zero() {
    let d = CompactDomain::unit_disk();
    let mask = domain_mask(&d, 1.0 / 32.0).unwrap();
    let f = SampledField::zeros(mask, NodeSet::Inside);
    let u = pompeiu(&f, &[c(0.0, 0.0), c(2.0, 1.0), c(0.5, 0.5)], &QuadratureConfig::default()).unwrap();
    assert!(u.iter().all(|v| v.norm() == 0.0));
}

fn disk_transform_error(f: &str, want: impl Fn(C64) -> C64, h: f64) -> f64 {
    let d = CompactDomain::unit_disk();
    let mask = domain_mask(&d, h).unwrap();
    let e = ComplexExpr::parse(f).unwrap();
    let field = SampledField::from_expr(mask.clone(), &e, Execution::Parallel).unwrap();
    let u = pompeiu_on_grid(&field, &QuadratureConfig::default()).unwrap();
    let g = mask.grid();
    (0..g.len())
        .filter(|&i| mask.is_inside(i))
        .map(|i| (u[i] - want(g.point(i))).norm())
        .fold(0.0, f64::max)
}

#[test]
fn constant_on_disk_gives_conjugate() {
    let h = 1.0 / 256.0;
    let err = disk_transform_error("1", |z| if z.norm() <= 1.0 { z.conj() } else { 1.0 / z }, h);
    assert!(err <= 5.0 * h, "err {err}");
}

#[test]
fn conjugate_on_disk_gives_half_square() {
    let h = 1.0 / 256.0;
    let err = disk_transform_error("zbar", |z| z.conj() * z.conj() / 2.0, h);
    assert!(err <= 5.0 * h, "err {err}");
}

#[test]
fn exterior_values_are_holomorphic_and_decay() {
    let d = CompactDomain::unit_disk();
    let mask = domain_mask(&d, 1.0 / 64.0).unwrap();
    let e = ComplexExpr::parse("add(1, mul(z, zbar))").unwrap();
    let f = SampledField::from_expr(mask.clone(), &e, Execution::Parallel).unwrap();
    let cfg = QuadratureConfig::default();
    let fmax = f.max_abs();
    // auxiliary grid on a ring outside the disk
    let aux = GridSpec::aligned_box(c(-2.0, -2.0), c(2.0, 2.0), 1.0 / 32.0, 0).unwrap();
    let pts: Vec<C64> = (0..aux.len()).map(|i| aux.point(i)).collect();
    let u = pompeiu(&f, &pts, &cfg).unwrap();
    let hx = aux.h;
    let mut worst: f64 = 0.0;
    for idx in 0..aux.len() {
        let z = aux.point(idx);
        let (i, j) = aux.ij(idx);
        if !(1.3..=1.8).contains(&z.norm()) || i == 0 || j == 0 || i + 1 == aux.nx || j + 1 == aux.ny {
            continue;
        }
        let fx = (u[idx + 1] - u[idx - 1]) / (2.0 * hx);
        let fy = (u[idx + aux.nx] - u[idx - aux.nx]) / (2.0 * hx);
        worst = worst.max(((fx + c(0.0, 1.0) * fy) / 2.0).norm());
        let bound = d.area().unwrap() / std::f64::consts::PI * fmax / (z.norm() - 1.0);
        assert!(u[idx].norm() <= bound, "decay at {z}");
    }
    assert!(worst <= 1.0 * mask.h(), "dbar outside {worst}");
}

#[test]
fn dbar_residual_converges_for_constant_and_conjugate() {
    let d = CompactDomain::unit_disk();
    let cfg = QuadratureConfig::default();
    let hs = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    for f in ["1", "zbar"] {
        let s = dbar_study(&d, &ComplexExpr::parse(f).unwrap(), &hs, &cfg).unwrap();
        assert!(s.slope.at_least(0.9), "{f}: slope {} levels {:?}", s.slope, s.levels);
    }
    let zero = dbar_study(&d, &ComplexExpr::real(0.0), &hs, &cfg).unwrap();
    assert_eq!(zero.slope, Slope::Exact);
    assert!(zero.levels.iter().all(|l| l.max_dev == 0.0));
}

#[test]
fn dbar_fd_second_order_on_exp_conj() {
    let d = CompactDomain::unit_disk();
    let e = ComplexExpr::parse("exp(zbar)").unwrap();
    let want = e.dbar();
    let mut errs = Vec::new();
    let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    for h in hs {
        let mask = domain_mask(&d, h).unwrap();
        let f = SampledField::from_expr(mask.clone(), &e, Execution::Parallel).unwrap();
        let df = dbar_fd(&f).unwrap();
        let err = df
            .defined_nodes()
            .into_iter()
            .map(|i| (df.values()[i] - want.eval(mask.grid().point(i)).unwrap()).norm())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    let s = dbar_core::study::loglog_slope(&hs, &errs, 1e-12).unwrap();
    assert!(s.at_least(1.9), "slope {s}");
}

#[test]
fn sequential_and_parallel_agree() {
    let d = CompactDomain::disk(c(0.2, 0.1), 0.7);
    let mask = Arc::new(build_mask(&d, &GridSpec::covering(&d, 1.0 / 40.0, 2).unwrap()).unwrap());
    let e = ComplexExpr::parse("mul(exp(z), zbar)").unwrap();
    let f = SampledField::from_expr(mask, &e, Execution::Sequential).unwrap();
    let a = pompeiu_field(&f, &QuadratureConfig::default().with_execution(Execution::Sequential)).unwrap();
    let b = pompeiu_field(&f, &QuadratureConfig::default().with_execution(Execution::Parallel)).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).norm() <= 1e-13);
    }
    let r = verify_dbar_solution(&f, &QuadratureConfig { margin_dist: 0.1, ..Default::default() }).unwrap();
    assert!(r.checked_nodes > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_is_linear(ar in -2.0..2.0f64, ai in -2.0..2.0f64, br in -2.0..2.0f64, bi in -2.0..2.0f64,
                           tr in -1.5..1.5f64, ti in -1.5..1.5f64) {
        let d = CompactDomain::unit_disk();
        let mask = domain_mask(&d, 1.0 / 16.0).unwrap();
        let fe = ComplexExpr::parse("mul(z, zbar)").unwrap();
        let ge = ComplexExpr::parse("exp(z)").unwrap();
        let f = SampledField::from_expr(mask.clone(), &fe, Execution::Parallel).unwrap();
        let g = SampledField::from_expr(mask.clone(), &ge, Execution::Parallel).unwrap();
        let (alpha, beta) = (c(ar, ai), c(br, bi));
        let comb = f.zip_with(&g, |x, y| alpha * x + beta * y).unwrap();
        let cfg = QuadratureConfig::default();
        let t = [c(tr, ti)];
        let uf = pompeiu(&f, &t, &cfg).unwrap()[0];
        let ug = pompeiu(&g, &t, &cfg).unwrap()[0];
        let uc = pompeiu(&comb, &t, &cfg).unwrap()[0];
        let want = alpha * uf + beta * ug;
        prop_assert!((uc - want).norm() <= 1e-12 * want.norm().max(1.0));
    }

    #[test]
    fn cell_integral_is_translation_invariant(x in -0.5..0.5f64, y in -0.5..0.5f64, s in -3.0..3.0f64) {
        let h = 0.05;
        let a = cell_kernel_integral(c(0.0, 0.0), h, c(x * h, y * h));
        let b = cell_kernel_integral(c(s, -s), h, c(s + x * h, -s + y * h));
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(h));
    }
}
