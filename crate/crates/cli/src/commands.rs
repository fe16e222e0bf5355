use std::path::Path;
use std::str::FromStr;

use dbar_core::bezout::{bezout_poly, bezout_pou, BezoutProblem};
use dbar_core::cauchy::{dbar_study, domain_mask, pompeiu, pompeiu_on_grid, verify_dbar_solution, QuadratureConfig};
use dbar_core::corona::{corona_solve, g12_solve, g_power_solve, CoronaSolution};
use dbar_core::division::{
    certify_class, derivative_bound_scan, sharpness_battery, BoundVariant, ClassClaim, Generator, ProbeConfig,
};
use dbar_core::domain::{connected_components, CompactDomain, NodeClass};
use dbar_core::expr::ComplexExpr;
use dbar_core::faa::{coefficient_table, compose_derivative, enumerate, taylor_oracle};
use dbar_core::field::SampledField;
use dbar_core::geometry::{disk_chain_quotient_demo, l_probe, taylor_remainder_fit, LProbeConfig, DEFAULT_SCALES};
use dbar_core::study::{loglog_slope, Slope};
use dbar_core::taylor::derivatives;
use dbar_core::{Execution, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::*;
use crate::config::{self, ladder, parse_point, parse_spacing, resolve_domain, split_list, ExperimentConfig};
use crate::report::{csv_string, num, Output, RunReport};
use crate::CliError;

pub struct Ctx {
    pub cfg: ExperimentConfig,
    pub out: Output,
    pub levels: Option<usize>,
    pub exec: Execution,
}

impl Ctx {
    fn domain(&self, flag: &Option<String>) -> Result<CompactDomain, CliError> {
        match flag {
            Some(s) => resolve_domain(s),
            None => Ok(self.cfg.domain()),
        }
    }

    fn ladder(&self, flag: &Option<String>) -> Result<Vec<f64>, CliError> {
        match flag {
            Some(s) => split_list(s).iter().map(|v| parse_spacing(v)).collect::<Result<Vec<_>, _>>().and_then(|hs| ladder(&hs, self.levels)),
            None => ladder(&self.cfg.grid.h, self.levels),
        }
    }

    fn quadrature(&self) -> QuadratureConfig {
        self.cfg.quadrature.with_execution(self.exec)
    }

    fn probe(&self, levels: &Option<Vec<f64>>) -> ProbeConfig {
        let mut p = ProbeConfig { execution: self.exec, ..Default::default() };
        if let Some(l) = levels {
            p.levels = l.clone();
        }
        p
    }
}

fn m<T>(context: &str, r: dbar_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Module { context: context.into(), source })
}

fn required<T: Clone>(flag: &Option<T>, cfg: &Option<T>, what: &str) -> Result<T, CliError> {
    flag.clone().or_else(|| cfg.clone()).ok_or_else(|| CliError::Config(format!("missing {what}")))
}

fn list(flag: &Option<String>, cfg: &[String]) -> Vec<String> {
    match flag {
        Some(s) => split_list(s),
        None => cfg.to_vec(),
    }
}

fn slope_str(s: Slope) -> String {
    s.to_string()
}

/// Refinement slope. A single level has none; two levels are rejected.
fn study_slope(hs: &[f64], values: &[f64]) -> Result<Option<Slope>, CliError> {
    match hs.len() {
        1 => Ok(None),
        _ => m("refinement study", loglog_slope(hs, values, 1e-12)).map(Some),
    }
}

fn complex_cols(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

pub fn domains(ctx: &Ctx, a: &DomainsArgs) -> Result<RunReport, CliError> {
    let domain = ctx.domain(&a.domain)?;
    let h = match &a.h {
        Some(s) => parse_spacing(s)?,
        None => *ctx.ladder(&None)?.last().unwrap(),
    };
    let mask = m("mask", domain_mask(&domain, h))?;
    let mut r = RunReport::new("domains");
    let count = |c| mask.count(c) as f64;
    r.level(&[
        ("h", h),
        ("interior", count(NodeClass::Interior)),
        ("boundary", count(NodeClass::Boundary)),
        ("exterior", count(NodeClass::Exterior)),
        ("area_estimate", mask.inside_count() as f64 * h * h),
        ("components", connected_components(&mask).count() as f64),
    ]);
    let tagged: Vec<[f64; 2]> = mask.tagged().iter().map(|t| [t.point.re, t.point.im]).collect();
    r.data = serde_json::json!({ "domain": domain, "area": domain.area(), "tagged": tagged });
    ctx.out.text("mask.txt", &mask.dump())?;
    let rows: Vec<Vec<String>> = [NodeClass::Interior, NodeClass::Boundary, NodeClass::Exterior]
        .iter()
        .map(|&c| vec![format!("{c:?}").to_lowercase(), mask.count(c).to_string()])
        .collect();
    ctx.out.csv("classes.csv", &["class", "count"], &rows)?;
    Ok(r)
}

fn read_targets(path: &str) -> Result<Vec<C64>, CliError> {
    let mut rd = csv::Reader::from_path(Path::new(path)).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    let mut out = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{path}: {e}")))?;
        let field = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError::Config(format!("{path}: row {}: expected numeric re,im", k + 1)))
        };
        out.push(C64::new(field(0)?, field(1)?));
    }
    Ok(out)
}

pub fn cauchy(ctx: &Ctx, a: &CauchyArgs) -> Result<RunReport, CliError> {
    let c = &ctx.cfg.cauchy;
    let domain = ctx.domain(&a.domain)?;
    let f = config::expr("f", &required(&a.f, &c.f, "cauchy.f")?)?;
    let hs = ctx.ladder(&a.h)?;
    let q = ctx.quadrature();
    let mut r = RunReport::new("cauchy");
    let reports = if hs.len() >= 2 {
        let s = m("dbar study", dbar_study(&domain, &f, &hs, &q))?;
        r.slopes.insert("max_dev".into(), slope_str(s.slope));
        if let Some(min) = c.accept.min_slope {
            r.check("min_slope", s.slope.at_least(min), format!("slope {} vs {min}", s.slope));
        }
        s.levels
    } else {
        let mask = m("mask", domain_mask(&domain, hs[0]))?;
        let field = m("sampling f", SampledField::from_expr(mask, &f, ctx.exec))?;
        vec![m("dbar check", verify_dbar_solution(&field, &q))?]
    };
    for l in &reports {
        r.level(&[("h", l.h), ("max_dev", l.max_dev), ("checked_nodes", l.checked_nodes as f64)]);
    }
    let last = reports.last().unwrap();
    if let Some(max) = c.accept.max_dev {
        r.check("max_dev", last.max_dev <= max, format!("{:.3e} vs {max:.3e}", last.max_dev));
    }
    let rows: Vec<Vec<String>> =
        reports.iter().map(|l| vec![num(l.h), num(l.max_dev), l.checked_nodes.to_string()]).collect();
    ctx.out.csv("verification.csv", &["h", "max_dev", "checked_nodes"], &rows)?;

    if ctx.out.enabled() {
        let mask = m("mask", domain_mask(&domain, *hs.last().unwrap()))?;
        let field = m("sampling f", SampledField::from_expr(mask.clone(), &f, ctx.exec))?;
        let targets = a.targets.clone().or_else(|| c.targets.clone()).unwrap_or_else(|| "grid".into());
        let (pts, vals) = if targets == "grid" {
            let u = m("transform", pompeiu_on_grid(&field, &q))?;
            let nodes = mask.inside_nodes();
            (nodes.iter().map(|&i| mask.grid().point(i)).collect::<Vec<_>>(), nodes.iter().map(|&i| u[i]).collect())
        } else {
            let pts = read_targets(&targets)?;
            let u = m("transform", pompeiu(&field, &pts, &q))?;
            (pts, u)
        };
        let rows: Vec<Vec<String>> = pts
            .iter()
            .zip(&vals)
            .map(|(z, u)| complex_cols(*z).into_iter().chain(complex_cols(*u)).collect())
            .collect();
        ctx.out.csv("transform.csv", &["target_re", "target_im", "u_re", "u_im"], &rows)?;
    }
    Ok(r)
}

fn field_rows(fields: &[&SampledField]) -> Vec<Vec<String>> {
    let mask = fields[0].mask();
    mask.inside_nodes()
        .into_iter()
        .map(|i| {
            let mut row: Vec<String> = complex_cols(mask.grid().point(i)).into();
            for f in fields {
                row.extend(complex_cols(f.values()[i]));
            }
            row
        })
        .collect()
}

fn field_header(prefix: &str, n: usize) -> Vec<String> {
    let mut h = vec!["re".to_string(), "im".to_string()];
    for k in 1..=n {
        h.push(format!("{prefix}{k}_re"));
        h.push(format!("{prefix}{k}_im"));
    }
    h
}

pub fn bezout(ctx: &Ctx, a: &BezoutArgs) -> Result<RunReport, CliError> {
    let c = &ctx.cfg.bezout;
    let domain = ctx.domain(&a.domain)?;
    let f = config::exprs("f", &list(&a.f, &c.f))?;
    if f.is_empty() {
        return Err(CliError::Config("missing bezout.f".into()));
    }
    let h = match &a.h {
        Some(s) => parse_spacing(s)?,
        None => *ctx.ladder(&None)?.last().unwrap(),
    };
    let method = a.method.clone().or_else(|| c.method.clone()).unwrap_or_else(|| "poly".into());
    let degree = a.degree.or(c.degree).unwrap_or(24);
    let p = m("Bezout problem", BezoutProblem::new(&domain, f, h, ctx.exec))?;
    let mut r = RunReport::new("bezout");
    let (x, row): (Vec<SampledField>, Vec<String>) = match method.as_str() {
        "poly" => {
            let b = m("polynomial route", bezout_poly(&p, degree))?;
            let worst = b.fit_errors.iter().cloned().fold(0.0, f64::max);
            r.level(&[("h", h), ("degree", b.degree as f64), ("residual", b.residual), ("min_denominator", b.min_denominator)]);
            r.check("min_denominator", b.min_denominator >= 0.5, format!("{:.4} vs 0.5", b.min_denominator));
            let fields = b
                .x
                .iter()
                .map(|e| SampledField::from_expr(p.mask().clone(), e, ctx.exec))
                .collect::<dbar_core::Result<Vec<_>>>();
            let row = vec![
                method.clone(),
                num(h),
                b.degree.to_string(),
                num(b.residual),
                num(b.min_denominator),
                num(b.tolerance),
                num(worst),
            ];
            (m("sampling x", fields)?, row)
        }
        "pou" => {
            let x = m("partition route", bezout_pou(&p, c.epsilon))?;
            let res = p.residual(&x, |_| C64::new(1.0, 0.0));
            r.level(&[("h", h), ("residual", res)]);
            let row = vec![method.clone(), num(h), String::new(), num(res), String::new(), String::new(), String::new()];
            (x, row)
        }
        other => return Err(CliError::Config(format!("unknown method `{other}` (expected poly or pou)"))),
    };
    let residual = p.residual(&x, |_| C64::new(1.0, 0.0));
    let max = c.accept.max_residual.unwrap_or(1e-10);
    r.check("residual", residual <= max, format!("{residual:.3e} vs {max:.1e}"));
    ctx.out.csv(
        "bezout.csv",
        &["method", "h", "degree", "residual", "min_denominator", "tolerance", "max_fit_error"],
        &[row],
    )?;
    if c.dump_fields || a.dump_fields {
        let refs: Vec<&SampledField> = x.iter().collect();
        let header = field_header("x", x.len());
        let hdr: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        ctx.out.csv("fields.csv", &hdr, &field_rows(&refs))?;
    }
    Ok(r)
}

pub fn corona(ctx: &Ctx, a: &CoronaArgs) -> Result<RunReport, CliError> {
    let c = &ctx.cfg.corona;
    let domain = ctx.domain(&a.domain)?;
    let f = config::exprs("f", &list(&a.f, &c.f))?;
    if f.is_empty() {
        return Err(CliError::Config("missing corona.f".into()));
    }
    let target = a.target.clone().or_else(|| c.target.clone()).unwrap_or_else(|| "one".into());
    let hs = ctx.ladder(&a.h)?;
    let q = ctx.quadrature();
    let degree = a.max_degree.or(c.max_degree).unwrap_or(24);
    let g = || -> Result<ComplexExpr, CliError> { config::expr("g", &required(&a.g, &c.g, "corona.g")?) };
    let solve: Box<dyn Fn(f64) -> Result<CoronaSolution, CliError>> = match target.as_str() {
        "one" => Box::new(|h| {
            let p = m("Bezout problem", BezoutProblem::new(&domain, f.clone(), h, ctx.exec))?;
            m("corona", corona_solve(&p, degree, &q))
        }),
        "g5" | "g6" => {
            let g = g()?;
            let x = config::exprs("x", &list(&a.x, &c.x))?;
            let isolated = target == "g5";
            Box::new(move |h| m(&target, g_power_solve(&g, &f, &x, isolated, m("mask", domain_mask(&domain, h))?, &q)))
        }
        "g12" => {
            let g = g()?;
            let hl = config::exprs("h_list", &list(&a.h_list, &c.h_list))?;
            Box::new(move |h| m("g12", g12_solve(&g, &f, &hl, m("mask", domain_mask(&domain, h))?, &q)))
        }
        other => return Err(CliError::Config(format!("unknown target `{other}` (expected one, g5, g6 or g12)"))),
    };
    let mut r = RunReport::new("corona");
    let mut rows = Vec::new();
    let mut last = None;
    for &h in &hs {
        let s = solve(h)?;
        r.level(&[
            ("h", h),
            ("residual_sup", s.residual_sup),
            ("dbar_sup", s.dbar_sup),
            ("dbar_sup_x", s.dbar_sup_x),
            ("antisym_sup", s.antisym_sup),
        ]);
        rows.push(vec![num(h), num(s.residual_sup), num(s.dbar_sup), num(s.dbar_sup_x), num(s.antisym_sup)]);
        last = Some(s);
    }
    let last = last.unwrap();
    let dbar: Vec<f64> = r.levels.iter().map(|l| l["dbar_sup"]).collect();
    let slope = study_slope(&hs, &dbar)?;
    if let Some(s) = slope {
        r.slopes.insert("dbar_sup".into(), slope_str(s));
    }
    let anti = r.levels.iter().map(|l| l["antisym_sup"]).fold(0.0, f64::max);
    r.check("antisymmetry", anti <= 1e-12, format!("max |f H f^t| = {anti:.3e}"));
    let acc = c.accept;
    if let Some(max) = acc.max_residual {
        r.check("max_residual", last.residual_sup <= max, format!("{:.3e} vs {max:.1e}", last.residual_sup));
    }
    if let Some(max) = acc.max_dbar {
        r.check("max_dbar", last.dbar_sup <= max, format!("{:.3e} vs {max:.1e}", last.dbar_sup));
    }
    if let Some(min) = acc.min_slope {
        match slope {
            Some(s) => r.check("min_slope", s.at_least(min), format!("{s} vs {min}")),
            None => r.check("min_slope", false, "needs at least 3 levels".into()),
        }
    }
    ctx.out.csv("corona.csv", &["h", "residual_sup", "dbar_sup", "dbar_sup_x", "antisym_sup"], &rows)?;
    if c.dump_fields || a.dump_fields {
        let refs: Vec<&SampledField> = last.u.iter().collect();
        let header = field_header("u", refs.len());
        let hdr: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        ctx.out.csv("fields.csv", &hdr, &field_rows(&refs))?;
    }
    Ok(r)
}

pub fn divide(ctx: &Ctx, a: &DivideArgs) -> Result<RunReport, CliError> {
    let c = &ctx.cfg.divide;
    let domain = ctx.domain(&a.domain)?;
    let fsrc = required(&a.f, &c.f, "divide.f")?;
    let gsrc = required(&a.g, &c.g, "divide.g")?;
    let f = config::expr("f", &fsrc)?;
    let g = Generator::parse(&gsrc).map_err(|e| CliError::Config(format!("g = \"{gsrc}\": {e}")))?;
    let power = required(&a.power, &c.power, "divide.power")?;
    let class_src = required(&a.class, &c.class, "divide.class")?;
    let class = ClassClaim::from_str(&class_src).map_err(|e| CliError::Config(e.to_string()))?;
    let pcfg = ctx.probe(&c.probe_h);
    let cert = m("certificate", certify_class(&f, &g, power, &domain, class, &pcfg))?;
    let mut r = RunReport::new("divide");
    ctx.out.text("certificate.txt", &cert.render())?;
    let mut rows = Vec::new();
    for e in &cert.evidence {
        for l in &e.levels {
            for (rad, osc) in l.radii.iter().zip(&l.osc) {
                rows.push(vec![
                    e.label.clone(),
                    e.quantity.to_string(),
                    num(e.center.re),
                    num(e.center.im),
                    num(l.h),
                    num(*rad),
                    num(*osc),
                    num(l.spread),
                    num(l.scale),
                    l.outcome.to_string(),
                ]);
            }
        }
    }
    ctx.out.csv(
        "probes.csv",
        &["label", "quantity", "center_re", "center_im", "h", "radius", "osc", "spread", "scale", "outcome"],
        &rows,
    )?;
    let expect = a.expect.clone().or_else(|| c.expect.clone());
    if let Some(want) = expect {
        let got = cert.outcome.to_string();
        r.check("outcome", got.eq_ignore_ascii_case(&want), format!("{got} (expected {})", want.to_uppercase()));
    }
    let mut data = serde_json::json!({ "certificate": cert });
    if let Some(b) = &c.bound {
        let Generator::Expr(ge) = &g else {
            return Err(CliError::Config("divide.bound needs an expression generator".into()));
        };
        let variant = match b.variant.as_str() {
            "holomorphic" => BoundVariant::Holomorphic,
            "smooth" => BoundVariant::Smooth,
            v => return Err(CliError::Config(format!("unknown bound variant `{v}`"))),
        };
        let hs = ctx.ladder(&None)?;
        let scan = m("derivative bound", derivative_bound_scan(&f, ge, b.m, b.n, &domain, variant, &hs, ctx.exec))?;
        let rows: Vec<Vec<String>> = scan
            .levels
            .iter()
            .map(|l| vec![num(l.h), num(l.constant), num(l.worst.re), num(l.worst.im), l.nodes.to_string()])
            .collect();
        ctx.out.csv("bounds.csv", &["h", "constant", "worst_re", "worst_im", "nodes"], &rows)?;
        for l in &scan.levels {
            r.level(&[("h", l.h), ("bound_constant", l.constant)]);
        }
        let cs: Vec<String> = scan.levels.iter().map(|l| format!("{:.4}", l.constant)).collect();
        r.check("bound_stable", scan.stable, format!("C per level {cs:?}"));
        data["bound"] = serde_json::to_value(&scan).map_err(|e| CliError::Io(e.to_string()))?;
    }
    print!("{}", cert.render());
    r.data = data;
    Ok(r)
}

pub fn sharpness(ctx: &Ctx) -> Result<RunReport, CliError> {
    let pcfg = ctx.probe(&ctx.cfg.sharpness.probe_h);
    let rows = m("sharpness battery", sharpness_battery(&pcfg))?;
    let mut r = RunReport::new("sharpness");
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|s| {
            vec![
                s.label.clone(),
                s.class.to_string(),
                s.power.to_string(),
                s.at_power.to_string(),
                s.below.to_string(),
                if s.pass { "PASS" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    let header = ["label", "class", "power", "at_power", "below", "result"];
    print!("{}", csv_string(&header, &table)?);
    ctx.out.csv("sharpness.csv", &header, &table)?;
    for s in &rows {
        r.check(&format!("item {}", s.label), s.pass, format!("{} at N = {}, {} at N - 1", s.at_power, s.power, s.below));
    }
    r.data = serde_json::to_value(&rows).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(r)
}

fn bell(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 1..n {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            let l = *next.last().unwrap();
            next.push(l + v);
        }
        row = next;
    }
    *row.last().unwrap()
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

const OUTER: [&str; 5] = ["exp(z)", "div(1, sub(3, z))", "log(add(4, z))", "pow(add(1, z), 5)", "mul(exp(z), sub(2, z))"];
const INNER: [&str; 4] = ["pow(z,2)", "add(mul(c(0.3,0.1), pow(z,3)), z)", "div(z, add(2, z))", "exp(mul(0.5, z))"];

pub fn faa(ctx: &Ctx, a: &FaaArgs) -> Result<RunReport, CliError> {
    let c = &ctx.cfg.faa;
    let n = a.n.or(c.n);
    let verify = a.verify || c.verify;
    if n.is_none() && !verify {
        return Err(CliError::Config("faa needs --n or --verify".into()));
    }
    let mut r = RunReport::new("faa");
    if let Some(n) = n {
        let table = m("coefficient table", coefficient_table(n))?;
        let rows: Vec<Vec<String>> = table.iter().map(|(k, c)| vec![k.to_string(), c.to_string()]).collect();
        print!("{}", csv_string(&["k", "coefficient"], &rows)?);
        ctx.out.csv("coefficients.csv", &["k", "coefficient"], &rows)?;
    }
    if verify {
        let samples = c.samples.unwrap_or(200);
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed.unwrap_or(2024));
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let f = config::expr("outer", OUTER[rng.random_range(0..OUTER.len())])?;
            let g = config::expr("inner", INNER[rng.random_range(0..INNER.len())])?;
            let n = rng.random_range(1..=12);
            let x = C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            let gd = m("derivatives", derivatives(&g, x, n))?;
            let fd = m("derivatives", derivatives(&f, gd[0], n))?;
            let lhs = m("composition", compose_derivative(&fd[1..], &gd[1..], n))?;
            let rhs = m("oracle", taylor_oracle(&f, &g, x, n))?;
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1e-300));
        }
        r.check("taylor_oracle", worst <= 1e-10, format!("{samples} composites, worst relative error {worst:.2e}"));
        let mut bell_ok = true;
        let mut count_ok = true;
        for n in 1..=12 {
            let s: u128 = m("coefficient table", coefficient_table(n))?.iter().map(|(_, c)| c).sum();
            bell_ok &= s == bell(n);
            count_ok &= m("enumeration", enumerate(n))?.len() == partition_count(n);
        }
        r.check("bell_numbers", bell_ok, "coefficient sums for n <= 12".into());
        r.check("partition_counts", count_ok, "index counts for n <= 12".into());
    }
    Ok(r)
}

pub fn lconn(ctx: &Ctx, a: &LconnArgs) -> Result<RunReport, CliError> {
    let c = &ctx.cfg.lconn;
    let domain = ctx.domain(&a.domain)?;
    let z0 = match &a.z0 {
        Some(s) => parse_point(s)?,
        None => c.z0.ok_or_else(|| CliError::Config("missing lconn.z0".into()))?,
    };
    let scales = c.scales.clone().unwrap_or_else(|| DEFAULT_SCALES.to_vec());
    let mut pc = LProbeConfig { execution: ctx.exec, ..Default::default() };
    if let Some(s) = c.samples_per_scale {
        pc.samples_per_scale = s;
    }
    if let Some(s) = c.cells_per_scale {
        pc.cells_per_scale = s;
    }
    let rep = m("L-connectivity probe", l_probe(&domain, z0, &scales, &pc))?;
    let mut r = RunReport::new("lconn");
    let rows: Vec<Vec<String>> = rep
        .scales
        .iter()
        .map(|s| vec![num(s.scale), s.max_ratio.map(num).unwrap_or_default(), rep.verdict.to_string()])
        .collect();
    ctx.out.csv("lconn.csv", &["scale", "max_ratio", "verdict"], &rows)?;
    for s in &rep.scales {
        if let Some(q) = s.max_ratio {
            r.level(&[("scale", s.scale), ("h", s.h), ("max_ratio", q)]);
        }
    }
    if let Some(want) = a.expect.clone().or_else(|| c.expect.clone()) {
        let got = rep.verdict.to_string();
        r.check("verdict", got.eq_ignore_ascii_case(&want), format!("{got} (expected {want})"));
    }
    r.data = serde_json::to_value(&rep).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(r)
}

pub fn taylor(ctx: &Ctx, a: &TaylorArgs) -> Result<RunReport, CliError> {
    let c = &ctx.cfg.taylor;
    let domain = ctx.domain(&a.domain)?;
    let f = config::expr("f", &required(&a.f, &c.f, "taylor.f")?)?;
    let z0 = match &a.z0 {
        Some(s) => parse_point(s)?,
        None => c.z0.ok_or_else(|| CliError::Config("missing taylor.z0".into()))?,
    };
    let order = a.m.or(c.m).unwrap_or(1);
    let rep = m("Taylor remainder fit", taylor_remainder_fit(&f, z0, order, &domain))?;
    let mut r = RunReport::new("taylor");
    let mut rows: Vec<Vec<String>> = rep
        .fits
        .iter()
        .map(|fit| vec![fit.j.to_string(), fit.slope.to_string(), num(fit.threshold), fit.pass.to_string()])
        .collect();
    if let Some(q) = rep.quotient_slope {
        rows.push(vec!["quotient".into(), q.to_string(), "0.8".into(), q.at_least(0.8).to_string()]);
    }
    for fit in &rep.fits {
        r.slopes.insert(format!("remainder_{}", fit.j), fit.slope.to_string());
    }
    ctx.out.csv("taylor.csv", &["j", "slope", "threshold", "pass"], &rows)?;
    r.check("remainder_slopes", rep.pass(), format!("m = {order} at {z0}"));
    if let Some(count) = a.quotient_demo.or(c.quotient_demo) {
        let q = m("disk chain quotients", disk_chain_quotient_demo(count))?;
        let rows: Vec<Vec<String>> =
            q.iter().map(|row| vec![row.n.to_string(), num(row.quotient), num(row.interior_derivative)]).collect();
        ctx.out.csv("quotients.csv", &["n", "quotient", "interior_derivative"], &rows)?;
        let exact = q.iter().all(|row| (row.quotient - (row.n as f64).sqrt()).abs() <= 1e-15 * row.quotient);
        r.check("disk_chain_quotients", exact, format!("sqrt(n) for n = 3..{}", count + 2));
    }
    r.data = serde_json::to_value(&rep).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(r)
}

