use std::sync::Arc;

use dbar_core::bezout::BezoutProblem;
use dbar_core::cauchy::{domain_mask, QuadratureConfig};
use dbar_core::corona::{
    corona_from_x, corona_solve, corona_study, g12_solve, g_power_solve, koszul_f, solve_dbar_matrix,
    AntisymMatrixField,
};
use dbar_core::domain::{build_mask, CompactDomain, GridSpec};
use dbar_core::expr::ComplexExpr;
use dbar_core::field::{NodeSet, SampledField};
use dbar_core::{Error, Execution, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn e(s: &str) -> ComplexExpr {
    ComplexExpr::parse(s).unwrap()
}

fn es(v: &[&str]) -> Vec<ComplexExpr> {
    v.iter().map(|s| e(s)).collect()
}

fn disk() -> CompactDomain {
    CompactDomain::unit_disk()
}

const G5_X: [&str; 2] = ["div(1, add(1, mul(z, zbar)))", "div(zbar, add(1, mul(z, zbar)))"];

#[test]
fn holomorphic_x_gives_zero_matrix() {
    let mask = domain_mask(&disk(), 1.0 / 32.0).unwrap();
    let cfg = QuadratureConfig::default();
    let f = koszul_f(&es(&["1", "z"]), &es(&["sub(1,z)", "add(2,z)"]), mask.clone(), &cfg).unwrap();
    assert!(f.entry(0, 1).max_abs() == 0.0);
    let f1 = koszul_f(&es(&["1"]), &es(&["add(2,z)"]), mask, &cfg).unwrap();
    assert!(f1.upper().is_empty());
}

#[test]
fn koszul_entry_matches_hand_evaluation() {
    // hand derivatives: dbar x1 = -z/(1+|z|^2)^2, dbar x2 = 1/(1+|z|^2)^2
    let hand = |z: C64| {
        let q = 1.0 + z.norm_sqr();
        let d1 = -z / (q * q);
        let d2 = C64::new(1.0 / (q * q), 0.0);
        let f1 = z * z;
        let f2 = z * z * z;
        (d2 * f1.conj() - d1 * f2.conj()) / (f1.norm_sqr() + f2.norm_sqr())
    };
    assert!((hand(C64::new(0.5, 0.0)) - 2.56).norm() < 1e-12);
    // shifted grid so that no node sits on the common zero
    let h = 1.0 / 64.0;
    let grid = GridSpec::new(C64::new(-1.1 + h / 2.0, -1.1 + h / 3.0), h, 142, 142).unwrap();
    let mask = Arc::new(build_mask(&disk(), &grid).unwrap());
    let f = koszul_f(&es(&G5_X), &es(&["pow(z,2)", "pow(z,3)"]), mask.clone(), &QuadratureConfig::default()).unwrap();
    for i in mask.inside_nodes() {
        let z = grid.point(i);
        let want = hand(z);
        assert!((f.entry(0, 1).values()[i] - want).norm() <= 1e-9 * want.norm().max(1.0), "{z}");
        assert_eq!(f.value(1, 0, i), -f.value(0, 1, i));
    }
    let on_grid = domain_mask(&disk(), h).unwrap();
    assert!(matches!(
        koszul_f(&es(&G5_X), &es(&["pow(z,2)", "pow(z,3)"]), on_grid, &QuadratureConfig::default()),
        Err(Error::Precondition { .. })
    ));
}

#[test]
fn matrix_solve_of_constant_entry() {
    let h = 1.0 / 128.0;
    let mask = domain_mask(&disk(), h).unwrap();
    let one = SampledField::from_expr(mask.clone(), &ComplexExpr::real(1.0), Execution::Parallel).unwrap();
    let f = AntisymMatrixField::from_upper(2, vec![one]).unwrap();
    let (hm, rep) = solve_dbar_matrix(&f, &QuadratureConfig::default()).unwrap();
    let g = *mask.grid();
    for i in mask.inside_nodes() {
        assert!((hm.entry(0, 1).values()[i] - g.point(i).conj()).norm() <= 5.0 * h);
    }
    assert!(rep[0].max_dev < 0.05);

    let zero = SampledField::zeros(mask, NodeSet::Inside);
    let (hz, _) = solve_dbar_matrix(&AntisymMatrixField::from_upper(2, vec![zero]).unwrap(), &QuadratureConfig::default())
        .unwrap();
    assert_eq!(hz.entry(0, 1).max_abs(), 0.0);
}

#[test]
fn corona_for_exact_certificate_pair() {
    let cfg = QuadratureConfig::default();
    let hs = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let f = es(&["sub(1,z)", "z"]);
    let study = corona_study(&hs, |h| {
        let p = BezoutProblem::new(&disk(), f.clone(), h, Execution::Parallel)?;
        corona_solve(&p, 16, &cfg)
    })
    .unwrap();
    let last = study.levels.last().unwrap();
    assert!(last.residual_sup <= 1e-6, "{:?}", study);
    assert!(last.dbar_sup <= 1e-3, "{:?}", study);
    assert!(study.dbar_slope.at_least(0.9), "{:?}", study);
    for l in &study.levels {
        assert!(l.dbar_sup <= l.dbar_sup_x);
        assert!(l.antisym_sup <= 1e-12);
    }
}

#[test]
fn corona_for_squared_pair() {
    let cfg = QuadratureConfig::default();
    let hs = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let f = es(&["pow(z,2)", "pow(sub(1,z),2)"]);
    let study = corona_study(&hs, |h| {
        let p = BezoutProblem::new(&disk(), f.clone(), h, Execution::Parallel)?;
        corona_solve(&p, 24, &cfg)
    })
    .unwrap();
    let last = study.levels.last().unwrap();
    assert!(last.residual_sup <= 1e-6, "{:?}", study);
    assert!(study.dbar_slope.at_least(0.9), "{:?}", study);
    for l in &study.levels {
        assert!(l.dbar_sup <= l.dbar_sup_x, "{:?}", study);
    }
}

#[test]
fn corona_rejects_interior_zero() {
    let p = BezoutProblem::new(&disk(), es(&["z"]), 1.0 / 32.0, Execution::Parallel).unwrap();
    assert!(matches!(corona_solve(&p, 4, &QuadratureConfig::default()), Err(Error::Precondition { .. })));
}

#[test]
fn g5_pipeline() {
    let cfg = QuadratureConfig::default();
    let f = es(&["pow(z,2)", "pow(z,3)"]);
    let x = es(&G5_X);
    // symbolic identity sum x_j f_j = z^2 at random points
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let s: C64 = x.iter().zip(&f).map(|(a, b)| a.eval(z).unwrap() * b.eval(z).unwrap()).sum();
        assert!((s - z * z).norm() <= 1e-13);
    }
    let hs = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let study = corona_study(&hs, |h| g_power_solve(&ComplexExpr::z().powi(2), &f, &x, true, domain_mask(&disk(), h)?, &cfg))
        .unwrap();
    let last = study.levels.last().unwrap();
    assert!(last.residual_sup <= 1e-5, "{study:?}");
    assert!(study.dbar_slope.at_least(0.9), "{study:?}");

    let g6 = g_power_solve(&ComplexExpr::z().powi(2), &f, &x, false, domain_mask(&disk(), 1.0 / 64.0).unwrap(), &cfg)
        .unwrap();
    assert!(g6.residual_sup <= 1e-5);
}

#[test]
fn g5_with_holomorphic_x_needs_no_correction() {
    let mask = domain_mask(&disk(), 1.0 / 64.0).unwrap();
    let f = es(&["pow(z,2)", "pow(z,3)"]);
    let s = g_power_solve(&e("pow(z,2)"), &f, &es(&["1", "0"]), true, mask.clone(), &QuadratureConfig::default()).unwrap();
    assert!(s.residual_sup <= 1e-12);
    let g = *mask.grid();
    for i in mask.inside_nodes() {
        let z = g.point(i);
        assert!((s.u[0].values()[i] - z.powu(8)).norm() <= 1e-12);
        assert_eq!(s.u[1].values()[i].norm(), 0.0);
    }
    let err = g_power_solve(&e("mul(2, pow(z,2))"), &f, &es(&["2", "0"]), true, mask, &QuadratureConfig::default());
    assert!(matches!(err, Err(Error::Precondition { .. })));
}

#[test]
fn g12_pipeline() {
    let cfg = QuadratureConfig::default();
    let f = es(&["pow(z,2)", "pow(z,3)"]);
    let h = es(&["pow(zbar,2)", "pow(zbar,3)"]);
    let s = g12_solve(&e("pow(z,2)"), &f, &h, domain_mask(&disk(), 1.0 / 256.0).unwrap(), &cfg).unwrap();
    assert!(s.residual_sup <= 1e-5, "{:?}", s.summary());

    let single = g12_solve(&e("add(2,z)"), &es(&["add(2,z)"]), &es(&["add(2,zbar)"]), domain_mask(&disk(), 1.0 / 32.0).unwrap(), &cfg)
        .unwrap();
    assert!(single.residual_sup <= 1e-8);

    let zero = g12_solve(&e("pow(z,2)"), &f, &es(&["0", "0"]), domain_mask(&disk(), 1.0 / 32.0).unwrap(), &cfg);
    assert!(matches!(zero, Err(Error::Precondition { .. })));
}

#[test]
fn continuous_cancellation_is_exact() {
    // dbar x_k - sum_j f_j F_jk vanishes when sum x_j f_j is constant
    let f = es(&["add(2, z)", "mul(z, sub(1, z))"]);
    let x0 = e("div(add(2, zbar), add(mul(add(2, z), add(2, zbar)), mul(mul(z, sub(1, z)), mul(zbar, sub(1, zbar)))))");
    let x1 = e("div(mul(zbar, sub(1, zbar)), add(mul(add(2, z), add(2, zbar)), mul(mul(z, sub(1, z)), mul(zbar, sub(1, zbar)))))");
    let x = [x0, x1];
    let n2 = f[0].abs2() + f[1].abs2();
    let fm = |j: usize, k: usize| (x[k].dbar() * f[j].conj() - x[j].dbar() * f[k].conj()).div(&n2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        for k in 0..2 {
            let corr: C64 = (0..2).map(|j| f[j].eval(z).unwrap() * fm(j, k).eval(z).unwrap()).sum();
            let d = x[k].dbar().eval(z).unwrap();
            assert!((d - corr).norm() <= 1e-12 * d.norm().max(1.0));
        }
    }
    let mask = domain_mask(&disk(), 1.0 / 32.0).unwrap();
    let s = corona_from_x(mask, &f, &x, &QuadratureConfig::default()).unwrap();
    assert!(s.residual_sup <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn antisymmetric_corrections_preserve_the_identity(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3;
        let mask = domain_mask(&disk(), 1.0 / 16.0).unwrap();
        let len = mask.grid().len();
        let mut upper = Vec::new();
        for _ in 0..n * (n - 1) / 2 {
            let v: Vec<C64> = (0..len)
                .map(|i| if mask.is_inside(i) { C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) } else { C64::new(0.0, 0.0) })
                .collect();
            let d = (0..len).map(|i| mask.is_inside(i)).collect();
            upper.push(SampledField::from_parts(mask.clone(), v, d).unwrap());
        }
        let hm = AntisymMatrixField::from_upper(n, upper).unwrap();
        for i in mask.inside_nodes() {
            let f: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
            let x: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
            let xf: C64 = x.iter().zip(&f).map(|(a, b)| a * b).sum();
            let mut uf = C64::new(0.0, 0.0);
            for k in 0..n {
                let fh: C64 = (0..n).map(|j| f[j] * hm.value(j, k, i)).sum();
                uf += (x[k] - fh) * f[k];
            }
            prop_assert!((uf - xf).norm() <= 1e-12 * xf.norm().max(1.0) * 10.0);
        }
    }
}
