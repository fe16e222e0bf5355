//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::time::Instant;

use dbar_core::bezout::{bezout_poly, bezout_pou, BezoutProblem};
use dbar_core::cauchy::{dbar_study, domain_mask, pompeiu_on_grid, QuadratureConfig};
use dbar_core::corona::{corona_solve, corona_study, g12_solve, g_power_solve};
use dbar_core::division::{
    derivative_bound_scan, multi_division_c1, multi_division_continuous, multi_division_power, sharpness_battery,
    BoundVariant, Outcome, ProbeConfig,
};
use dbar_core::domain::CompactDomain;
use dbar_core::expr::ComplexExpr;
use dbar_core::faa::{coefficient_table, compose_derivative, enumerate};
use dbar_core::field::SampledField;
use dbar_core::geometry::{disk_chain_quotient_demo, l_probe, taylor_remainder_fit, LProbeConfig, Verdict, DEFAULT_SCALES};
use dbar_core::taylor::derivatives;
use dbar_core::{Execution, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LADDER: [f64; 3] = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];

type Checks = Vec<(bool, String)>;

fn e(s: &str) -> ComplexExpr {
    ComplexExpr::parse(s).unwrap()
}

fn es(v: &[&str]) -> Vec<ComplexExpr> {
    v.iter().map(|s| e(s)).collect()
}

fn disk() -> CompactDomain {
    CompactDomain::unit_disk()
}

fn check(out: &mut Checks, ok: bool, msg: String) {
    out.push((ok, msg));
}

fn dbar_solver() -> Result<Checks> {
    let mut out = Checks::new();
    let cfg = QuadratureConfig::default();
    for f in ["1", "zbar", "mul(z, zbar)"] {
        let s = dbar_study(&disk(), &e(f), &LADDER, &cfg)?;
        let devs: Vec<f64> = s.levels.iter().map(|l| l.max_dev).collect();
        let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
        check(&mut out, decreasing && s.slope.at_least(0.9), format!("f = {f}: slope {} devs {:?}", s.slope, devs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()));
    }
    let closed: [(&str, fn(C64) -> C64); 2] = [("1", |z| z.conj()), ("zbar", |z| z.conj() * z.conj() / 2.0)];
    for (f, want) in closed {
        for h in LADDER {
            let mask = domain_mask(&disk(), h)?;
            let field = SampledField::from_expr(mask.clone(), &e(f), Execution::Parallel)?;
            let u = pompeiu_on_grid(&field, &cfg)?;
            let g = mask.grid();
            let err = mask.inside_nodes().into_iter().map(|i| (u[i] - want(g.point(i))).norm()).fold(0.0, f64::max);
            check(&mut out, err <= 5.0 * h, format!("closed form for f = {f}, h = {h}: {err:.2e} vs {:.2e}", 5.0 * h));
        }
    }
    Ok(out)
}

fn corona_pipeline() -> Result<Checks> {
    let mut out = Checks::new();
    let cfg = QuadratureConfig::default();
    for (f, deg) in [(["sub(1,z)", "z"], 16), (["pow(z,2)", "pow(sub(1,z),2)"], 24)] {
        let fs = es(&f);
        let s = corona_study(&LADDER, |h| corona_solve(&BezoutProblem::new(&disk(), fs.clone(), h, Execution::Parallel)?, deg, &cfg))?;
        let last = s.levels.last().unwrap();
        let anti = s.levels.iter().map(|l| l.antisym_sup).fold(0.0, f64::max);
        let ok = last.residual_sup <= 1e-6 && last.dbar_sup <= 1e-3 && s.dbar_slope.at_least(0.9) && anti <= 1e-12;
        check(
            &mut out,
            ok,
            format!(
                "f = ({}, {}): residual {:.1e}, dbar {:.4e}, slope {}, fHf^t {:.1e}",
                f[0], f[1], last.residual_sup, last.dbar_sup, s.dbar_slope, anti
            ),
        );
    }
    Ok(out)
}

fn g_power_pipelines() -> Result<Checks> {
    let mut out = Checks::new();
    let cfg = QuadratureConfig::default();
    let f = es(&["pow(z,2)", "pow(z,3)"]);
    let x = es(&["div(1, add(1, mul(z, zbar)))", "div(zbar, add(1, mul(z, zbar)))"]);
    let g = e("pow(z,2)");
    let s = corona_study(&LADDER, |h| g_power_solve(&g, &f, &x, true, domain_mask(&disk(), h)?, &cfg))?;
    let last = s.levels.last().unwrap();
    let ok = last.residual_sup <= 1e-5 && last.dbar_sup <= 1e-3 && s.dbar_slope.at_least(0.9);
    check(
        &mut out,
        ok,
        format!("target z^10: residual {:.1e}, dbar {:.1e}, slope {}", last.residual_sup, last.dbar_sup, s.dbar_slope),
    );
    let hs = es(&["pow(zbar,2)", "pow(zbar,3)"]);
    let s = g12_solve(&g, &f, &hs, domain_mask(&disk(), 1.0 / 256.0)?, &cfg)?;
    check(&mut out, s.residual_sup <= 1e-5, format!("target z^24: residual {:.1e}", s.residual_sup));
    Ok(out)
}

fn bezout_routes() -> Result<Checks> {
    let mut out = Checks::new();
    for f in [&["z", "sub(1,z)"][..], &["pow(z,2)", "pow(sub(1,z),2)"][..]] {
        let p = BezoutProblem::new(&disk(), es(f), 1.0 / 64.0, Execution::Parallel)?;
        let b = bezout_poly(&p, 24)?;
        let fit_ok = b.fit_errors.iter().all(|&x| x <= b.tolerance);
        check(
            &mut out,
            b.residual <= 1e-10 && (!fit_ok || b.min_denominator >= 0.5),
            format!("polynomial route {f:?}: degree {}, residual {:.1e}, min denominator {:.3}", b.degree, b.residual, b.min_denominator),
        );
        let x = bezout_pou(&p, None)?;
        let r = p.residual(&x, |_| C64::new(1.0, 0.0));
        check(&mut out, r <= 1e-10, format!("partition route {f:?}: residual {r:.1e}"));
    }
    Ok(out)
}

fn division_sharpness() -> Result<Checks> {
    let rows = sharpness_battery(&ProbeConfig::default())?;
    Ok(rows
        .iter()
        .map(|r| {
            (
                r.pass,
                format!("item {} ({}, N = {}): {} at N, {} at N-1", r.label, r.class, r.power, r.at_power, r.below),
            )
        })
        .collect())
}

fn derivative_bounds() -> Result<Checks> {
    let mut out = Checks::new();
    let hs = [1.0 / 64.0, 1.0 / 128.0];
    let cases = [
        ("z", "z", 0, 0, BoundVariant::Holomorphic),
        ("pow(z,2)", "z", 1, 1, BoundVariant::Holomorphic),
        ("mul(sub(1, z), S)", "sub(1, z)", 0, 0, BoundVariant::Holomorphic),
        ("zbar", "z", 1, 1, BoundVariant::Smooth),
    ];
    for (f, g, m, n, v) in cases {
        let s = derivative_bound_scan(&e(f), &e(g), m, n, &disk(), v, &hs, Execution::Parallel)?;
        let cs: Vec<f64> = s.levels.iter().map(|l| l.constant).collect();
        let ratio = cs[1] / cs[0];
        let ok = cs.iter().all(|c| c.is_finite()) && (0.5..=2.0).contains(&ratio) && s.stable;
        check(&mut out, ok, format!("(f, g, m, n) = ({f}, {g}, {m}, {n}): C {cs:.4?}"));
    }
    Ok(out)
}

fn multi_generator() -> Result<Checks> {
    let mut out = Checks::new();
    let cfg = ProbeConfig::default();
    for fs in [&["z"][..], &["z", "sub(1, z)"][..]] {
        let r = multi_division_continuous(&e("z"), &es(fs), domain_mask(&disk(), 1.0 / 256.0)?, Execution::Parallel)?;
        let bound = fs.len() as f64 + 1e-6;
        check(
            &mut out,
            r.q_max <= bound && r.residual <= 1e-10,
            format!("h^2 with f = {fs:?}: max |q| {:.4} (bound {bound}), residual {:.1e}", r.q_max, r.residual),
        );
        let c1 = multi_division_c1(&e("z"), &es(fs), &disk(), &cfg)?;
        check(
            &mut out,
            c1.outcome == Outcome::Pass && c1.stable && c1.residual <= 1e-10,
            format!("h^3 with f = {fs:?}: {}, gradient bound {:?}", c1.outcome, c1.gradient_bound),
        );
    }
    let lo = multi_division_power(&e("z"), &es(&["zbar"]), 2, &disk(), &[1.0 / 128.0, 1.0 / 256.0], &cfg)?;
    check(&mut out, lo.outcome == Outcome::Fail, format!("h^2 with (z, zbar) in C^1: {}", lo.outcome));
    Ok(out)
}

fn bell(n: usize) -> u128 {
    // B_{n+1} = sum_k C(n, k) B_k
    let mut b = vec![1u128];
    for m in 0..n {
        let mut binom = 1u128;
        let mut s = 0u128;
        for (k, bk) in b.iter().enumerate() {
            s += binom * bk;
            binom = binom * (m - k) as u128 / (k + 1) as u128;
        }
        b.push(s);
    }
    b[n]
}

fn partition_count(n: usize) -> usize {
    let mut p = vec![0usize; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for t in part..=n {
            p[t] += p[t - part];
        }
    }
    p[n]
}

fn faa_di_bruno() -> Result<Checks> {
    let mut out = Checks::new();
    let outer = ["exp(z)", "div(1, sub(3, z))", "log(add(4, z))", "pow(add(1, z), 5)"];
    let inner = ["pow(z,2)", "add(mul(c(0.3,0.1), pow(z,3)), z)", "div(z, add(2, z))", "exp(mul(0.5, z))"];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let f = e(outer[rng.random_range(0..outer.len())]);
        let g = e(inner[rng.random_range(0..inner.len())]);
        let n = rng.random_range(1..=12);
        let x = C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let gd = derivatives(&g, x, n)?;
        let fd = derivatives(&f, gd[0], n)?;
        let a = compose_derivative(&fd[1..], &gd[1..], n)?;
        let b = dbar_core::faa::taylor_oracle(&f, &g, x, n)?;
        worst = worst.max((a - b).norm() / b.norm().max(1e-300));
    }
    check(&mut out, worst <= 1e-10, format!("200 random composites: worst relative error {worst:.1e}"));
    let mut sums_ok = bell(4) == 15 && bell(5) == 52;
    let mut counts_ok = true;
    for n in 1..=12 {
        let s: u128 = coefficient_table(n)?.iter().map(|(_, c)| c).sum();
        sums_ok &= s == bell(n);
        counts_ok &= enumerate(n)?.len() == partition_count(n);
    }
    check(&mut out, sums_ok, "coefficient sums equal Bell numbers for n <= 12".into());
    check(&mut out, counts_ok, "index counts equal p(n) for n <= 12".into());
    Ok(out)
}

fn geometry() -> Result<Checks> {
    let mut out = Checks::new();
    for (name, d, z0, want) in [
        ("disk", CompactDomain::unit_disk(), C64::new(1.0, 0.0), Verdict::Bounded),
        ("inner_spiral", CompactDomain::inner_spiral(), C64::new(0.0, 0.0), Verdict::Growing),
    ] {
        for cells in [500.0, 800.0] {
            let cfg = LProbeConfig { cells_per_scale: cells, ..Default::default() };
            let r = l_probe(&d, z0, &DEFAULT_SCALES, &cfg)?;
            let ratios: Vec<Option<f64>> = r.scales.iter().map(|s| s.max_ratio).collect();
            check(&mut out, r.verdict == want, format!("{name} at {cells} cells per scale: {} {ratios:.2?}", r.verdict));
        }
    }
    let rows = disk_chain_quotient_demo(8)?;
    let exact = rows.iter().all(|r| (r.quotient - (r.n as f64).sqrt()).abs() <= 1e-15 * r.quotient)
        && rows.iter().map(|r| r.n).eq(3..=10)
        && rows[1].quotient == 2.0
        && rows[6].quotient == 3.0;
    check(&mut out, exact, "disk chain quotients equal sqrt(n) for n = 3..10".into());
    for (f, z0, m, d) in [
        ("exp(z)", C64::new(1.0, 0.0), 2, CompactDomain::disk(C64::new(0.0, 0.0), 1.5)),
        ("div(1, sub(3, z))", C64::new(1.0, 0.0), 2, CompactDomain::unit_disk()),
        ("add(pow(z,2), mul(3, z))", C64::new(1.0, 0.0), 2, CompactDomain::unit_disk()),
    ] {
        let r = taylor_remainder_fit(&e(f), z0, m, &d)?;
        let slopes: Vec<String> = r.fits.iter().map(|f| f.slope.to_string()).collect();
        check(&mut out, r.pass(), format!("Taylor remainders of {f}, m = {m}: slopes {slopes:?}"));
    }
    Ok(out)
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Result<Checks>); 9] = [
        ("dbar solver identity", dbar_solver),
        ("corona pipeline", corona_pipeline),
        ("g^5 and g^12 pipelines", g_power_pipelines),
        ("Bezout constructions", bezout_routes),
        ("division powers and sharpness", division_sharpness),
        ("derivative bounds", derivative_bounds),
        ("multi-generator division", multi_generator),
        ("Faa di Bruno", faa_di_bruno),
        ("L-connectivity and Taylor", geometry),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let checks = run().unwrap_or_else(|err| vec![(false, format!("error: {err}"))]);
        let pass = checks.iter().all(|c| c.0);
        println!("criterion {}: {} {name} ({:.1} s)", k + 1, if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
        for (ok, msg) in &checks {
            println!("    [{}] {msg}", if *ok { "ok" } else { "x" });
        }
        if !pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
