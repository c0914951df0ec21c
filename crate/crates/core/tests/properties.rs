//! Property suites against oracles written independently of the crate.

use proptest::prelude::*;

use sharpmax_core::constants::r_of_alpha;
use sharpmax_core::maxop::maximal_at;
use sharpmax_core::PiecewiseLinearFn;

/// A random general nonnegative PLF on a few nodes, zero at both ends.
fn plf() -> impl Strategy<Value = PiecewiseLinearFn> {
    (3usize..20)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-3.0f64..3.0, n),
                prop::collection::vec(0.0f64..2.0, n),
            )
        })
        .prop_filter_map("need distinct breakpoints", |(mut xs, mut ys)| {
            xs.sort_by(|a, b| a.total_cmp(b));
            xs.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            if xs.len() < 3 {
                return None;
            }
            ys.truncate(xs.len());
            ys[0] = 0.0;
            let last = xs.len() - 1;
            ys[last] = 0.0;
            let peak = (0..ys.len()).max_by(|&a, &b| ys[a].total_cmp(&ys[b]))?;
            PiecewiseLinearFn::new(xs, ys, peak).ok()
        })
}

fn linear_at(xs: &[f64], ys: &[f64], i: usize, x: f64) -> f64 {
    ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i])
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(
    g: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `|f|^p`, segment by segment.
fn oracle_norm_p(f: &PiecewiseLinearFn, p: f64) -> f64 {
    let (xs, ys) = (f.breakpoints(), f.values());
    let mut total = 0.0;
    for i in 0..xs.len() - 1 {
        let (a, b) = (xs[i], xs[i + 1]);
        if b <= a {
            continue;
        }
        let g = |x: f64| linear_at(xs, ys, i, x).abs().powf(p);
        let (fa, fm, fb) = (g(a), g(0.5 * (a + b)), g(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson(&g, a, b, fa, fm, fb, whole, 1e-14, 40);
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn integral_is_additive(f in plf(), a in -4.0f64..4.0, b in -4.0f64..4.0, c in -4.0f64..4.0) {
        let whole = f.integral(a, c);
        let split = f.integral(a, b) + f.integral(b, c);
        let scale = f.integral(-5.0, 5.0).max(1e-300);
        prop_assert!((whole - split).abs() <= 1e-12 * scale);
    }

    #[test]
    fn lp_norm_matches_adaptive_quadrature(f in plf(), k in 0usize..3) {
        let p = [1.5, 2.0, 3.0][k];
        let got = f.lp_norm_p(p).unwrap().value;
        let want = oracle_norm_p(&f, p);
        prop_assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn l1_norm_is_the_integral(f in plf()) {
        let (lo, hi) = f.support();
        let one = f.lp_norm_p(1.0).unwrap().value;
        let int = f.integral(lo - 1.0, hi + 1.0);
        prop_assert!((one - int).abs() <= 1e-12 * int);
    }

    #[test]
    fn norm_and_operator_scale(f in plf(), c in 0.01f64..100.0, x in -4.0f64..4.0) {
        let g = f.scaled(c).unwrap();
        let n1 = f.lp_norm_p(2.0).unwrap().norm();
        let n2 = g.lp_norm_p(2.0).unwrap().norm();
        prop_assert!((n2 - c * n1).abs() <= 1e-12 * c * n1);
        let m1 = maximal_at(&f, x).g;
        let m2 = maximal_at(&g, x).g;
        prop_assert!((m2 - c * m1).abs() <= 1e-12 * (c * m1).max(1e-300));
    }

    #[test]
    fn operator_is_sublinear(f in plf(), g in plf(), x in -4.0f64..4.0) {
        let h = f.sum(&g).unwrap();
        let lhs = maximal_at(&h, x).g;
        let rhs = maximal_at(&f, x).g + maximal_at(&g, x).g;
        prop_assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
    }

    #[test]
    fn operator_dominates_the_function_and_its_averages(f in plf(), x in -4.0f64..4.0, t in 1e-3f64..5.0) {
        let m = maximal_at(&f, x).g;
        prop_assert!(m >= f.eval_mid(x) - 1e-12);
        let avg = f.integral(x - t, x + t) / (2.0 * t);
        prop_assert!(m >= avg - 1e-12 * avg.max(1.0));
    }

    #[test]
    fn r_closed_form_matches_composition(alpha in 0.55f64..0.99, p in 1.1f64..10.0) {
        // Direct route from the definitions, without the cancellation guards.
        let rho = ((1.0 - alpha) / alpha).powf(1.0 / (p - 1.0));
        let beta = (1.0 - rho) / (1.0 + rho);
        let lo = alpha * (1.0 - beta).powf(p);
        let hi = (1.0 - alpha) * (1.0 + beta).powf(p);
        let direct = (lo - hi) + p * beta * (lo + hi);
        let got = r_of_alpha(alpha, p).unwrap();
        prop_assert!((got.r - direct).abs() <= 1e-12 * (lo + hi));
        prop_assert!((got.closed_form - direct).abs() <= 1e-12 * (lo + hi));
    }
}
