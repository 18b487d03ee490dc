use std::collections::BTreeMap;

use esspec_core::exprlang::{differentiate, parse, Symbols};
use esspec_core::schur::SchurSymbols;
use esspec_core::validate::assemble;
use esspec_core::{Expr, HalfLineProblem, Interval, IntervalSet};
use nalgebra::{Complex, DMatrix, SymmetricEigen};
use proptest::prelude::*;

/// Expression sources that are smooth and pole-free on [-1, 1].
fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        (-3i32..=3).prop_map(|k| format!("({k})")),
        (1u32..=9).prop_map(|k| format!("0.{k}")),
        Just("pi".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / (2 + ({b})^2))")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            inner.clone().prop_map(|a| format!("log(1 + ({a})^2)")),
            (inner, 2u32..=3).prop_map(|(a, k)| format!("({a})^{k}")),
        ]
    })
}

fn x_expr(src: &str) -> Expr {
    parse(src, &Symbols::new("x")).unwrap_or_else(|e| panic!("{src}: {e}"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivative_matches_richardson_difference(src in smooth_expr(), x in -0.9..0.9f64) {
        let f = x_expr(&src);
        let df = differentiate(&f, 1).unwrap();
        let exact = df.eval(x).unwrap();
        let g = |h: f64| (f.eval(x + h).unwrap() - f.eval(x - h).unwrap()) / (2.0 * h);
        let (h1, h2) = (1e-3, 5e-4);
        // Richardson removes the h² term.
        let rich = (g(h2) * 4.0 - g(h1)) / 3.0;
        let scale = 1.0 + exact.norm() + f.eval(x).unwrap().norm() * 1e-3;
        prop_assert!((rich - exact).norm() <= 1e-5 * scale, "{src} at {x}: {exact} vs {rich}");
    }

    #[test]
    fn display_reparses_to_the_same_function(src in smooth_expr(), x in -1.0..1.0f64) {
        let f = x_expr(&src);
        let printed = f.to_string();
        let g = x_expr(&printed);
        let (a, b) = (f.eval(x).unwrap(), g.eval(x).unwrap());
        prop_assert!((a - b).norm() <= 1e-13 * (1.0 + a.norm()), "{src} -> {printed}");
    }

    #[test]
    fn second_derivative_is_derivative_of_first(src in smooth_expr(), x in -0.9..0.9f64) {
        let f = x_expr(&src);
        let d2 = differentiate(&f, 2).unwrap().eval(x).unwrap();
        let d1d1 = differentiate(&differentiate(&f, 1).unwrap(), 1).unwrap().eval(x).unwrap();
        prop_assert!((d2 - d1d1).norm() <= 1e-12 * (1.0 + d2.norm()));
    }
}

fn interval_list() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(
        (-10.0..10.0f64, 0.0..3.0f64).prop_map(|(a, w)| (a, a + w)),
        0..6,
    )
}

fn to_set(v: &[(f64, f64)]) -> IntervalSet {
    IntervalSet::from_intervals(v.iter().map(|&(a, b)| Interval::new(a, b)))
}

proptest! {
    #[test]
    fn interval_sets_are_normalised(v in interval_list()) {
        let s = to_set(&v);
        for w in s.intervals().windows(2) {
            prop_assert!(w[0].hi < w[1].lo, "{s}");
        }
        for &(a, b) in &v {
            prop_assert!(s.contains(a) && s.contains(b) && s.contains(0.5 * (a + b)));
        }
    }

    #[test]
    fn union_commutes_and_contains_both(a in interval_list(), b in interval_list(), x in -12.0..12.0f64) {
        let (sa, sb) = (to_set(&a), to_set(&b));
        let u = sa.union(&sb);
        prop_assert_eq!(&u, &sb.union(&sa));
        prop_assert_eq!(u.contains(x), sa.contains(x) || sb.contains(x));
    }

    #[test]
    fn hausdorff_is_a_metric(a in interval_list(), b in interval_list()) {
        let (sa, sb) = (to_set(&a), to_set(&b));
        prop_assume!(!sa.is_empty() && !sb.is_empty());
        prop_assert_eq!(sa.hausdorff(&sa), 0.0);
        prop_assert_eq!(sa.hausdorff(&sb), sb.hausdorff(&sa));
        for iv in sa.intervals() {
            prop_assert!(sb.distance(iv.lo) <= sa.hausdorff(&sb));
        }
    }

    #[test]
    fn gaps_cover_the_complement(v in interval_list(), x in -20.0..20.0f64) {
        let s = to_set(&v);
        let w = Interval::new(-20.0, 20.0);
        let gaps = s.gaps_in(w);
        let in_gap = gaps.iter().any(|g| g.lo < x && x < g.hi);
        prop_assert_eq!(in_gap, !s.contains(x) && x > w.lo && x < w.hi);
        let total: f64 = gaps.iter().map(Interval::width).sum();
        prop_assert!((total + s.measure_in(w) - w.width()).abs() < 1e-9);
    }
}

fn constant_problem(p: f64, q: f64, b: f64, c: f64, d: f64) -> HalfLineProblem {
    HalfLineProblem::new(
        Expr::constant(p),
        Expr::constant(q),
        Expr::constant(b),
        Expr::constant(c),
        Expr::constant(d),
    )
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (
        0.5..2.0f64,
        -2.0..3.0f64,
        -1.5..1.5f64,
        -1.0..1.0f64,
        -2.0..2.0f64,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncated_form_is_hermitian_and_inertia_matches_dense(
        (p, q, b, c, d) in coeffs(),
        t_len in 2.0..10.0f64,
        lambda in -4.0..6.0f64,
    ) {
        let op = assemble(&constant_problem(p, q, b, c, d), t_len, 24).unwrap();
        let n = op.dim();
        let m = DMatrix::from_fn(n, n, |r, k| {
            let z = op.entry(r, k);
            Complex::new(z.re, z.im)
        });
        for r in 0..n {
            for k in 0..n {
                prop_assert_eq!(m[(r, k)], m[(k, r)].conj());
            }
        }
        let eig = SymmetricEigen::new(m).eigenvalues;
        prop_assume!(eig.iter().all(|e| (e - lambda).abs() > 1e-8));
        let below = eig.iter().filter(|&&e| e < lambda).count();
        let count = op.inertia(lambda).unwrap();
        prop_assert_eq!(count.n_minus, below);
        prop_assert_eq!(count.n_minus + count.n_zero + count.n_plus, n);
    }

    #[test]
    fn inertia_is_monotone_in_the_shift(
        (p, q, b, c, d) in coeffs(),
        l1 in -4.0..6.0f64,
        dl in 0.0..3.0f64,
    ) {
        let op = assemble(&constant_problem(p, q, b, c, d), 6.0, 40).unwrap();
        let lo = op.inertia(l1).unwrap().n_minus;
        let hi = op.inertia(l1 + dl).unwrap().n_minus;
        prop_assert!(lo <= hi);
        let g = op.gershgorin();
        prop_assert_eq!(op.inertia(g.lo - 1.0).unwrap().n_minus, 0);
        prop_assert_eq!(op.inertia(g.hi + 1.0).unwrap().n_minus, op.dim());
    }

    #[test]
    fn schur_complement_identities(
        (p, q, b, c, d) in coeffs(),
        lambda in -5.0..5.0f64,
        lambda0 in -5.0..5.0f64,
    ) {
        prop_assume!((d - lambda).abs() > 1e-2 && (d - lambda0).abs() > 1e-2);
        let prob = HalfLineProblem::from_sources(
            [&format!("{p}*(1+1/(1+t))"), &q.to_string(), &format!("{b}+sin(t)/(2+t)"), &c.to_string(), &d.to_string()],
            &BTreeMap::new(),
        )
        .unwrap();
        let sym = SchurSymbols::new(&prob);
        let t = 1.7;
        let k = sym.coeffs(t).unwrap();
        let b2 = k.b.norm_sqr();
        let pi = sym.eval_pi(t, lambda).unwrap();
        let pi0 = sym.eval_pi(t, lambda0).unwrap();
        let delta = sym.eval_delta(t).unwrap();
        let scale = k.p.abs() + b2 / (k.d - lambda).abs();
        prop_assert!((delta - (k.d - b2 / k.p)).abs() <= 1e-13 * (1.0 + delta.abs() + b2 / k.p));
        prop_assert!((pi - k.p * (delta - lambda) / (k.d - lambda)).abs() <= 1e-12 * scale);
        let rhs = (lambda0 - lambda) * b2 / ((k.d - lambda) * (k.d - lambda0));
        let scale0 = scale + k.p.abs() + b2 / (k.d - lambda0).abs();
        prop_assert!(((pi - pi0) - rhs).abs() <= 1e-12 * scale0);
    }
}

#[test]
fn documented_parse_errors() {
    let s = Symbols::new("x");
    for (src, msg) in [
        (
            "sin(",
            "syntax error at byte 4: expected number | identifier | ( | -",
        ),
        (
            "1 +* 2",
            "syntax error at byte 3: expected number | identifier | ( | -",
        ),
        ("foo + 1", "unknown identifier `foo` at byte 0"),
    ] {
        assert_eq!(parse(src, &s).unwrap_err().to_string(), msg);
    }
    // -x^2 is -(x^2), 2^3^2 is 2^(3^2)
    assert_eq!(x_expr("-x^2").eval(3.0).unwrap().re, -9.0);
    assert_eq!(x_expr("2^3^2").eval(0.0).unwrap().re, 512.0);
    assert_eq!(x_expr("2^-1").eval(0.0).unwrap().re, 0.5);
}
