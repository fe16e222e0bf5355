use dbar_core::expr::ComplexExpr;
use dbar_core::faa::{coefficient, coefficient_table, compose_derivative, enumerate, taylor_oracle, OrderedMultiIndex};
use dbar_core::taylor::derivatives;
use dbar_core::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bell numbers via the Aitken triangle.
fn bell(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 1..n {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    *row.last().unwrap()
}

/// Partition counts by dynamic programming over part sizes.
fn partitions(n: usize) -> usize {
    let mut p = vec![0usize; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for t in part..=n {
            p[t] += p[t - part];
        }
    }
    p[n]
}

/// Brute force: all compositions of n, sorted and deduplicated.
fn brute_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << (n - 1)) {
        let mut parts = Vec::new();
        let mut cur = 1;
        for b in 0..n - 1 {
            if mask & (1 << b) != 0 {
                parts.push(cur);
                cur = 1;
            } else {
                cur += 1;
            }
        }
        parts.push(cur);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        out.push(parts);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out.dedup();
    out
}

#[test]
fn enumeration_matches_brute_force_and_counts() {
    assert_eq!(enumerate(1).unwrap(), vec![OrderedMultiIndex::new(vec![1]).unwrap()]);
    for n in 1..=12 {
        let got: Vec<Vec<usize>> = enumerate(n).unwrap().iter().map(|k| k.parts().to_vec()).collect();
        assert_eq!(got, brute_partitions(n), "n = {n}");
    }
    assert_eq!(enumerate(10).unwrap().len(), 42);
    for n in 1..=20 {
        assert_eq!(enumerate(n).unwrap().len(), partitions(n));
    }
}

#[test]
fn third_order_coefficients() {
    let t = coefficient_table(3).unwrap();
    let got: Vec<(String, u128)> = t.iter().map(|(k, c)| (k.to_string(), *c)).collect();
    assert_eq!(got, [("(3)".to_string(), 1), ("(2,1)".to_string(), 3), ("(1,1,1)".to_string(), 1)]);
    assert_eq!(coefficient(1, &OrderedMultiIndex::new(vec![1]).unwrap()).unwrap(), 1);
}

#[test]
fn coefficient_sums_are_bell_numbers() {
    assert_eq!(bell(4), 15);
    assert_eq!(bell(5), 52);
    for n in 1..=20 {
        let s: u128 = coefficient_table(n).unwrap().iter().map(|(_, c)| c).sum();
        assert_eq!(s, bell(n), "n = {n}");
    }
}

#[test]
fn exp_of_square() {
    let f = ComplexExpr::parse("exp(z)").unwrap();
    let g = ComplexExpr::parse("pow(z,2)").unwrap();
    let x = C64::new(1.0, 0.0);
    for n in [3, 4] {
        let fd = derivatives(&f, g.eval(x).unwrap(), n).unwrap();
        let gd = derivatives(&g, x, n).unwrap();
        let a = compose_derivative(&fd[1..], &gd[1..], n).unwrap();
        let b = taylor_oracle(&f, &g, x, n).unwrap();
        assert!((a - b).norm() <= 1e-12 * b.norm());
    }
    // exp(x^2)''' at 1 = (12x + 8x^3) e at x = 1
    let want = 20.0 * std::f64::consts::E;
    assert!((taylor_oracle(&f, &g, x, 3).unwrap().re - want).abs() < 1e-12 * want);
    assert!((taylor_oracle(&f, &g, x, 0).unwrap() - f.eval(g.eval(x).unwrap()).unwrap()).norm() < 1e-15);
    let id = ComplexExpr::z();
    assert!((taylor_oracle(&id, &g, x, 2).unwrap() - 2.0).norm() < 1e-15);
}

#[test]
fn linear_inner_function() {
    let fd: Vec<C64> = (1..=6).map(|j| C64::new(j as f64, -1.0)).collect();
    let gd = [C64::new(0.5, 2.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    let v = compose_derivative(&fd, &gd, 6).unwrap();
    assert!((v - fd[5] * gd[0].powu(6)).norm() < 1e-12);
    assert!(compose_derivative(&fd[..3], &gd, 6).is_err());
}

const OUTER: [&str; 5] = ["exp(z)", "div(1, sub(3, z))", "log(add(4, z))", "pow(add(1, z), 5)", "mul(exp(z), sub(2, z))"];
const INNER: [&str; 4] = ["pow(z,2)", "add(mul(c(0.3,0.1), pow(z,3)), z)", "div(z, add(2, z))", "exp(mul(0.5, z))"];

#[test]
fn random_composites_match_taylor_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let f = ComplexExpr::parse(OUTER[rng.random_range(0..OUTER.len())]).unwrap();
        let g = ComplexExpr::parse(INNER[rng.random_range(0..INNER.len())]).unwrap();
        let n = rng.random_range(1..=12);
        let x = C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let gd = derivatives(&g, x, n).unwrap();
        let fd = derivatives(&f, gd[0], n).unwrap();
        let a = compose_derivative(&fd[1..], &gd[1..], n).unwrap();
        let b = taylor_oracle(&f, &g, x, n).unwrap();
        assert!((a - b).norm() <= 1e-10 * b.norm().max(1e-300), "{f} o {g} at {x}, n = {n}: {a} vs {b}");
    }
}

proptest! {
    #[test]
    fn coefficients_are_positive_and_indices_ordered(n in 1usize..=20) {
        for (k, c) in coefficient_table(n).unwrap() {
            prop_assert!(c >= 1);
            prop_assert_eq!(k.total(), n);
            prop_assert!(k.parts().windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
