//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Expected values come from closed forms or from oracles written here,
//! independently of the crate's own evaluation paths.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sharpmax_core::constants::alpha0_of_p;
use sharpmax_core::constants::{c_p, c_p_by_maximization, certify_lemma6, h_value, tau_of_p};
use sharpmax_core::funcrep::{random_peak_shaped, random_unimodal, GeneratorConfig};
use sharpmax_core::maxop::{
    maximal_at, maximal_profile, power_fixed_point_ratio, sharpness_family, structural_checks,
    weak_type_ratio, SharpnessConfig,
};
use sharpmax_core::variational::{compute_chain, mixed_partial_bracket, VariationalConfig};
use sharpmax_core::{GridSpec, PiecewiseLinearFn};

type Criterion = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn tent() -> PiecewiseLinearFn {
    PiecewiseLinearFn::new(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], 1).unwrap()
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn closed_forms_at_two() -> Outcome {
    let start = Instant::now();
    let tau = tau_of_p(2.0, 1e-12).unwrap();
    let c = c_p(2.0, 1e-12).unwrap();
    let by_root = h_value(2.0, tau).unwrap();
    let by_max = c_p_by_maximization(2.0).unwrap();
    let elapsed = start.elapsed();
    let tau_err = (tau - 2.0 / 3f64.sqrt()).abs();
    let c_err = (c - 3f64.powf(0.75) / 2f64.sqrt()).abs();
    let routes = (by_root - by_max).abs();
    outcome(
        tau_err <= 1e-12 && c_err <= 1e-12 && routes <= 1e-10 && within(elapsed, 1.0),
        format!(
            "tau err {tau_err:.1e}, c_2 err {c_err:.1e}, routes differ by {routes:.1e}, {:.3}s",
            elapsed.as_secs_f64()
        ),
    )
}

const P_SET: [f64; 6] = [1.1, 1.5, 2.0, 3.0, 5.0, 10.0];

fn coefficient_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut at_two = 0.0;
    for &p in &P_SET {
        match certify_lemma6(p, 1e-9, 100) {
            Ok((rec, _)) => {
                worst = worst.max(rec.cross_check_gap);
                if p == 2.0 {
                    at_two = rec.r_at_alpha0;
                }
            }
            Err(_) => ok = false,
        }
    }
    let want = 2.0 / (3.0 * 3f64.sqrt());
    ok &= worst <= 1e-9 && (at_two - want).abs() <= 1e-12;
    outcome(
        ok,
        format!("max |r(alpha0) - c_p^-p| = {worst:.1e}; p=2: r(alpha0) = {at_two:.7}"),
    )
}

fn alpha_sweep() -> Outcome {
    let mut ok = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_offset: f64 = 0.0;
    for &p in &P_SET {
        match certify_lemma6(p, 1e-12, 10_000) {
            Ok((rec, sweep)) => {
                worst_excess = worst_excess.max(sweep.max_r - rec.r_at_alpha0);
                worst_offset = worst_offset.max((sweep.argmax_alpha - rec.alpha0).abs() / sweep.step());
            }
            Err(e) => {
                ok = false;
                println!("    p = {p}: {e}");
            }
        }
    }
    outcome(
        ok && worst_excess <= 1e-12 && worst_offset <= 1.0,
        format!(
            "max_grid r - r(alpha0) = {worst_excess:.1e}; argmax within {worst_offset:.2} steps of alpha0"
        ),
    )
}

fn power_fixed_point() -> Outcome {
    let mut ok = true;
    let mut spread_max: f64 = 0.0;
    let mut err_max: f64 = 0.0;
    for &p in &[1.5, 2.0, 3.0] {
        let c = c_p(p, 1e-12).unwrap();
        let vals: Vec<f64> = [0.25, 1.0, 4.0]
            .iter()
            .map(|&x| power_fixed_point_ratio(p, x).unwrap())
            .collect();
        let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
        let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
        spread_max = spread_max.max(hi - lo);
        err_max = err_max.max(vals.iter().map(|v| (v - c).abs()).fold(0.0, f64::max));
        ok &= hi - lo <= 1e-10 && vals.iter().all(|v| (v - c).abs() <= 1e-9);
    }
    outcome(
        ok,
        format!("spread {spread_max:.1e}, |value - c_p| <= {err_max:.1e}"),
    )
}

/// Exact integral of the interpolant over `[a, b]`, segment by segment.
fn oracle_window_integral(xs: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..xs.len() - 1 {
        let (x0, x1) = (xs[i], xs[i + 1]);
        if x1 <= x0 {
            continue;
        }
        let (lo, hi) = (a.max(x0), b.min(x1));
        if hi <= lo {
            continue;
        }
        let at = |x: f64| ys[i] + (ys[i + 1] - ys[i]) * (x - x0) / (x1 - x0);
        total += 0.5 * (at(lo) + at(hi)) * (hi - lo);
    }
    total
}

fn oracle_value(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] || x >= xs[xs.len() - 1] {
        return 0.0;
    }
    let j = xs.partition_point(|&b| b <= x);
    let (x0, x1) = (xs[j - 1], xs[j]);
    ys[j - 1] + (ys[j] - ys[j - 1]) * (x - x0) / (x1 - x0)
}

/// `sup_t` of the window average by a dense radius scan followed by
/// golden-section refinement around the best scanned radius.
fn oracle_maximal(xs: &[f64], ys: &[f64], x: f64, n_scan: usize) -> f64 {
    let reach = (xs[0] - x).abs().max((xs[xs.len() - 1] - x).abs()) * 1.5;
    let avg = |t: f64| oracle_window_integral(xs, ys, x - t, x + t) / (2.0 * t);
    let step = reach / n_scan as f64;
    let (mut best_k, mut best) = (1, avg(step));
    for k in 2..=n_scan {
        let v = avg(k as f64 * step);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let (mut a, mut b) = ((best_k as f64 - 1.0) * step, (best_k as f64 + 1.0) * step);
    a = a.max(1e-300);
    let g = 0.618_033_988_749_894_8;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (avg(c), avg(d));
    for _ in 0..200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = avg(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = avg(d);
        }
    }
    best.max(fc).max(fd).max(oracle_value(xs, ys, x))
}

fn random_plf(seed: u64) -> PiecewiseLinearFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..30);
    let mut xs: Vec<f64> = (0..n + 2).map(|_| rng.gen_range(-2.0..2.0)).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    let mut ys: Vec<f64> = xs.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
    ys[0] = 0.0;
    *ys.last_mut().unwrap() = 0.0;
    let peak = (0..ys.len()).max_by(|&a, &b| ys[a].total_cmp(&ys[b])).unwrap();
    PiecewiseLinearFn::new(xs, ys, peak).unwrap()
}

fn maximal_operator_oracles() -> Outcome {
    let start = Instant::now();
    let t = maximal_at(&tent(), 2.0);
    let s7 = 7f64.sqrt();
    let tent_g = (t.g - (3.0 - s7) / 2.0).abs();
    let tent_d = (t.delta - s7).abs();

    let eps = 1e-4;
    let ind = PiecewiseLinearFn::new(
        vec![-1.0 - eps, -1.0, 1.0, 1.0 + eps],
        vec![0.0, 1.0, 1.0, 0.0],
        1,
    )
    .unwrap();
    let ind_err = [1.5, 2.0, 5.0]
        .iter()
        .map(|&x: &f64| (maximal_at(&ind, x).g - 1.0 / (1.0 + x.abs())).abs())
        .fold(0.0, f64::max);

    let brute = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let f = random_plf(1000 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10)
                .map(|_| {
                    let x = rng.gen_range(-3.0..3.0);
                    let exact = maximal_at(&f, x).g;
                    let oracle = oracle_maximal(f.breakpoints(), f.values(), x, 100_000);
                    (exact - oracle).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        tent_g <= 1e-10 && tent_d <= 1e-8 && ind_err <= 1e-3 && brute <= 1e-9 && within(elapsed, 60.0),
        format!(
            "tent g err {tent_g:.1e}, delta err {tent_d:.1e}; ramp indicator err {ind_err:.1e}; \
             brute force max diff {brute:.1e} over 500 centres; {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

struct Structure {
    seed: u64,
    avg: f64,
    margin: f64,
    shaped: bool,
}

fn structure_corpus(seeds: std::ops::Range<u64>, cfg: &GeneratorConfig) -> Vec<Structure> {
    seeds
        .into_par_iter()
        .map(|seed| {
            let f = random_peak_shaped(seed, cfg).unwrap();
            let prof = maximal_profile(&f, &GridSpec::default()).unwrap();
            let rep = structural_checks(&f, &prof);
            Structure {
                seed,
                avg: rep.lemma1_avg_residual / rep.scale,
                margin: rep.s_slope_margin,
                shaped: rep.mf_peakshape.is_peak_shaped,
            }
        })
        .collect()
}

/// The structure lemmas assume a continuous f; the corpus is the default
/// generator with the peak jump switched off. Functions with a jump are
/// reported separately: there the best window is anchored at the jump on
/// part of the high side, where s' = 1 exactly.
fn structural_suite() -> Outcome {
    let continuous = GeneratorConfig {
        jump_probability: 0.0,
        ..GeneratorConfig::default()
    };
    let rows = structure_corpus(0..100, &continuous);
    let avg = rows.iter().map(|r| r.avg).fold(0.0, f64::max);
    let margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let shaped = rows.iter().filter(|r| r.shaped).count();
    for r in rows
        .iter()
        .filter(|r| !(r.avg <= 1e-9 && r.margin > 0.0 && r.shaped))
    {
        println!(
            "    seed {}: avg {:.1e}, s' - 1 >= {:.2e}, peak-shaped {}",
            r.seed, r.avg, r.margin, r.shaped
        );
    }

    let jumps = GeneratorConfig {
        jump_probability: 1.0,
        ..GeneratorConfig::default()
    };
    let jrows = structure_corpus(0..100, &jumps);
    let javg = jrows.iter().map(|r| r.avg).fold(0.0, f64::max);
    let jmargin = jrows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let jshaped = jrows.iter().filter(|r| r.shaped).count();
    let anchored = jrows.iter().filter(|r| r.margin <= 1e-9).count();
    println!(
        "    with a peak jump (not asserted): avg residual / scale <= {javg:.1e}, min s' - 1 = {jmargin:.1e} \
         ({anchored}/100 with s' = 1 somewhere), {jshaped}/100 profiles peak-shaped"
    );

    outcome(
        avg <= 1e-9 && margin > 0.0 && shaped == rows.len(),
        format!(
            "100 continuous functions: avg residual / scale <= {avg:.1e}, min s' - 1 = {margin:.2e}, {shaped}/100 profiles peak-shaped"
        ),
    )
}

fn norm_inequality() -> Outcome {
    let start = Instant::now();
    let ps = [1.5, 2.0, 3.0];
    let cs: Vec<f64> = ps.iter().map(|&p| c_p(p, 1e-12).unwrap()).collect();
    let worst = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let f = random_peak_shaped(10_000 + seed, &GeneratorConfig::default()).unwrap();
            let prof = maximal_profile(&f, &GridSpec::default()).unwrap();
            ps.iter()
                .zip(&cs)
                .map(|(&p, &c)| {
                    let ratio =
                        (prof.g_norm_p(p).unwrap().total() / f.lp_norm_p(p).unwrap().value).powf(1.0 / p);
                    ratio / c
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    let c2 = cs[1];
    let rows = sharpness_family(&SharpnessConfig::default()).unwrap();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let monotone = ratios.windows(2).all(|w| w[1] >= w[0]);
    let last = *ratios.last().unwrap();
    let below = ratios.iter().all(|&r| r <= c2 * (1.0 + 1e-6));
    let elapsed = start.elapsed();
    outcome(
        worst <= 1.0 + 1e-6 && monotone && below && last >= 0.98 * c2 && within(elapsed, 300.0),
        format!(
            "random: max ratio / c_p = {worst:.4}; family ratio / c_2 = [{}], {:.1}s",
            ratios
                .iter()
                .map(|r| format!("{:.4}", r / c2))
                .collect::<Vec<_>>()
                .join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn chain_functions() -> Vec<(String, PiecewiseLinearFn)> {
    let mut fs = vec![("tent".to_string(), tent())];
    for seed in 0..5u64 {
        fs.push((
            format!("seed {seed}"),
            random_peak_shaped(seed, &GeneratorConfig::default()).unwrap(),
        ));
    }
    fs
}

fn variational_chain() -> Outcome {
    let cfg = VariationalConfig::new(2.0, alpha0_of_p(2.0).unwrap()).unwrap();
    let mut ok = true;
    let (mut is_gap, mut is0_gap, mut raw_random): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut tent_raw = 0.0;
    let mut tent_inner = 0.0;
    for (name, f) in chain_functions() {
        let prof = maximal_profile(&f, &GridSpec::default()).unwrap();
        let rep = compute_chain(&f, &prof, &cfg).unwrap();
        is_gap = is_gap.max(rep.i_s_rel_gap.abs());
        is0_gap = is0_gap.max(rep.i_s0_rel_gap_bounded.abs());
        if name == "tent" {
            tent_raw = rep.i_s0_rel_gap;
            tent_inner = rep.boundary_terms[0];
        } else {
            raw_random = raw_random.max(rep.i_s0_rel_gap.abs());
        }
        let pass = rep.i_s_rel_gap.abs() <= cfg.budget
            && rep.i_s0_rel_gap_bounded.abs() <= cfg.budget
            && rep.chain_margin >= -cfg.budget * rep.f_norm_p;
        if !pass {
            println!("    {name}: {:?}", rep.failures());
        }
        ok &= pass;
    }
    ok &= raw_random <= cfg.budget;
    outcome(
        ok,
        format!(
            "|I(s)/||f||^p - 1| <= {is_gap:.1e}; |I(s0) - r||g||^p - boundary| / r||g||^p <= {is0_gap:.1e}; \
             random without boundary terms <= {raw_random:.1e}; tent without boundary terms {tent_raw:.2} \
             (inner boundary term {tent_inner:.3})"
        ),
    )
}

fn euler_lagrange_exactness() -> Outcome {
    let mut configs: Vec<(String, PiecewiseLinearFn, f64)> =
        chain_functions().into_iter().map(|(n, f)| (n, f, 2.0)).collect();
    configs.push((
        "seed 7, p = 3".to_string(),
        random_peak_shaped(7, &GeneratorConfig::default()).unwrap(),
        3.0,
    ));
    let (mut el, mut gap, mut bracket): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    for (_, f, p) in &configs {
        let cfg = VariationalConfig::new(*p, alpha0_of_p(*p).unwrap()).unwrap();
        let prof = maximal_profile(f, &GridSpec::default()).unwrap();
        let rep = compute_chain(f, &prof, &cfg).unwrap();
        el = el.max(rep.el_residual_max);
        gap = gap.min(rep.pointwise_gap_min);
        if *p == 2.0 {
            bracket = bracket.max(mixed_partial_bracket(cfg.alpha, *p).unwrap().abs());
        }
    }
    outcome(
        el <= 1e-9 && gap >= -1e-10 && bracket <= 1e-15,
        format!(
            "EL residual / scale <= {el:.1e}; min gap / scale = {gap:.1e}; bracket at p = 2: {bracket:.1e}"
        ),
    )
}

fn weak_type() -> Outcome {
    let mut fs = vec![tent()];
    for seed in 0..20u64 {
        fs.push(random_unimodal(seed, &GeneratorConfig::default()).unwrap());
    }
    let results: Vec<(f64, f64)> = fs
        .par_iter()
        .map(|f| {
            let prof = maximal_profile(f, &GridSpec::default()).unwrap();
            let top = f.max_value();
            let lambdas: Vec<f64> = (0..13)
                .map(|k| top * 10f64.powf(-3.0 + 0.25 * k as f64))
                .collect();
            let rows = weak_type_ratio(f, &prof, &lambdas).unwrap();
            let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
            let at_small = weak_type_ratio(f, &prof, &[1e-3]).unwrap()[0].ratio;
            (worst, at_small)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let tent_small = results[0].1;
    outcome(
        worst <= 1.0 + 1e-6 && tent_small >= 0.95,
        format!("max ratio {worst:.6} over 21 functions x 13 levels; tent at lambda = 1e-3: {tent_small:.4}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("constants at p = 2", closed_forms_at_two),
        ("r(alpha0) = c_p^-p", coefficient_identity),
        ("alpha sweep", alpha_sweep),
        ("power fixed point", power_fixed_point),
        ("maximal operator oracles", maximal_operator_oracles),
        ("structure of Mf", structural_suite),
        ("norm inequality and sharpness", norm_inequality),
        ("variational chain", variational_chain),
        ("Euler-Lagrange exactness", euler_lagrange_exactness),
        ("weak type p = 1", weak_type),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}  {name}: {}", i + 1, out.detail);
        failed += usize::from(!out.pass);
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
