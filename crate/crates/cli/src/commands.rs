use std::fs;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use sharpmax_core::constants::{alpha0_of_p, c_p, certify_lemma6};
use sharpmax_core::funcrep::{random_peak_shaped, random_unimodal};
use sharpmax_core::maxop::{
    maximal_profile, sharpness_family, structural_checks, weak_type_ratio, SharpnessConfig, SharpnessRow,
    WeakTypeRow,
};
use sharpmax_core::numfmt::{csv_row, sig17};
use sharpmax_core::{
    ConstantsRecord, Error, GeneratorConfig, GridSpec, PiecewiseLinearFn, StructuralCheckReport,
    VariationalConfig, VariationalReport,
};

use crate::{Common, Failure, Format};

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn emit(c: &Common, text: &str) -> Outcome {
    match &c.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| usage(format!("cannot write output: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn reject(c: &Common, what: &str, flags: &[(&str, bool)]) -> Outcome {
    match flags.iter().find(|f| f.1) {
        Some((name, _)) => Err(usage(format!("--{name} has no meaning for {what}"))),
        None => Ok(()),
    }
    .and_then(|_| match c.tol {
        Some(t) if !(t > 0.0) || !t.is_finite() => Err(usage(format!("--tol {t} must be positive"))),
        _ => Ok(()),
    })
}

fn single_p(c: &Common, default: f64) -> Result<f64, Failure> {
    let p = match c.p.as_slice() {
        [] => default,
        [p] => *p,
        _ => return Err(usage("this subcommand takes a single --p")),
    };
    if !(p > 1.0) || !p.is_finite() {
        return Err(usage(format!("p = {p} must be a finite number above 1")));
    }
    Ok(p)
}

fn grid(c: &Common) -> Result<GridSpec, Failure> {
    let Some(text) = &c.grid else {
        return Ok(GridSpec::default());
    };
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || usage(format!("--grid expects n,inner,outer, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let n = parts[0].parse().map_err(|_| bad())?;
    let inner = parts[1].parse().map_err(|_| bad())?;
    let outer = parts[2].parse().map_err(|_| bad())?;
    Ok(GridSpec::Geometric { n, inner, outer })
}

pub fn tent() -> PiecewiseLinearFn {
    PiecewiseLinearFn::new(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], 1).expect("tent is valid")
}

/// The `--fn` input, or the tent when none is given.
fn input_function(c: &Common) -> Result<(String, PiecewiseLinearFn), Failure> {
    match &c.function {
        None => Ok(("tent".into(), tent())),
        Some(path) if path.as_os_str() == "tent" => Ok(("tent".into(), tent())),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let f = PiecewiseLinearFn::from_json_str(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Ok((path.display().to_string(), f))
        }
    }
}

/// `--fn` when given; otherwise `count` generated functions from `--seed`
/// (default 0); otherwise the tent.
fn functions(
    c: &Common,
    count: usize,
    generate: fn(u64, &GeneratorConfig) -> sharpmax_core::Result<PiecewiseLinearFn>,
) -> Result<Vec<(String, PiecewiseLinearFn)>, Failure> {
    if count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    if c.function.is_some() {
        if count > 1 || c.seed.is_some() {
            return Err(usage("--fn cannot be combined with --seed or --count"));
        }
        return Ok(vec![input_function(c)?]);
    }
    if c.seed.is_none() && count == 1 {
        return Ok(vec![("tent".into(), tent())]);
    }
    let first = c.seed.unwrap_or(0);
    (0..count as u64)
        .map(|k| {
            let seed = first + k;
            let f = generate(seed, &GeneratorConfig::default())?;
            Ok((format!("seed={seed}"), f))
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct ConstantsRow {
    #[serde(flatten)]
    record: ConstantsRecord,
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_f64")]
    argmax_alpha: f64,
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_f64")]
    max_r: f64,
    alpha_grid: usize,
}

pub fn constants(c: &Common, alpha_grid: usize) -> Outcome {
    reject(
        c,
        "constants",
        &[
            ("fn", c.function.is_some()),
            ("seed", c.seed.is_some()),
            ("grid", c.grid.is_some()),
        ],
    )?;
    let ps = if c.p.is_empty() { vec![2.0] } else { c.p.clone() };
    if let Some(bad) = ps.iter().find(|&&p| !(p > 1.0) || !p.is_finite()) {
        return Err(usage(format!("p = {bad} must be a finite number above 1")));
    }
    if alpha_grid == 0 {
        return Err(usage("--alpha-grid must be at least 1"));
    }
    let tol = c.tol.unwrap_or(1e-10);
    let results: Vec<_> = ps
        .par_iter()
        .map(|&p| (p, certify_lemma6(p, tol, alpha_grid)))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (p, res) in results {
        match res {
            Ok((record, sweep)) => rows.push(ConstantsRow {
                record,
                argmax_alpha: sweep.argmax_alpha,
                max_r: sweep.max_r,
                alpha_grid,
            }),
            Err(Error::CheckFailed(m)) => failures.push(format!("p = {p}: {m}")),
            Err(e) => return Err(e.into()),
        }
    }
    let text = match c.format {
        Format::Csv => {
            let mut s = format!("{},argmax_alpha,max_r\n", ConstantsRecord::CSV_HEADER);
            for r in &rows {
                s.push_str(&format!(
                    "{},{}\n",
                    r.record.csv_row(),
                    csv_row(&[r.argmax_alpha, r.max_r])
                ));
            }
            s
        }
        Format::Json => to_json(&rows)?,
    };
    emit(c, &text)?;
    for r in &rows {
        eprintln!(
            "p = {}: c_p = {:.10}, |r(alpha0) - c_p^-p| = {:.2e}",
            r.record.p, r.record.c_p, r.record.cross_check_gap
        );
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join("; ")))
    }
}

#[derive(Serialize)]
struct ProfileColumns<'a> {
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_vec")]
    x: &'a [f64],
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_vec")]
    g: &'a [f64],
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_vec")]
    delta: &'a [f64],
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_vec")]
    s: &'a [f64],
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_vec")]
    gprime: &'a [f64],
}

#[derive(Serialize)]
struct MaxfnOutput<'a> {
    function: String,
    checks: &'a StructuralCheckReport,
    profile: ProfileColumns<'a>,
}

pub fn maxfn(c: &Common, require_peak: bool, points: &[f64]) -> Outcome {
    reject(c, "maxfn", &[("seed", c.seed.is_some())])?;
    let (name, f) = input_function(c)?;
    let shape = f.is_peak_shaped(1e-12);
    if require_peak && !shape.is_peak_shaped {
        return Err(usage(format!(
            "{name} is not peak-shaped (convexity violation {:e})",
            shape.max_convexity_violation
        )));
    }
    let spec = if points.is_empty() {
        grid(c)?
    } else if c.grid.is_some() {
        return Err(usage("--points and --grid are exclusive"));
    } else {
        GridSpec::Explicit(points.to_vec())
    };
    let prof = maximal_profile(&f, &spec)?;
    let rep = structural_checks(&f, &prof);
    let tol = c.tol.unwrap_or(1e-9);

    let text = match c.format {
        Format::Csv => prof.to_csv(),
        Format::Json => to_json(&MaxfnOutput {
            function: name.clone(),
            checks: &rep,
            profile: ProfileColumns {
                x: &prof.xs,
                g: &prof.g,
                delta: &prof.delta,
                s: &prof.s,
                gprime: &prof.gprime,
            },
        })?,
    };
    emit(c, &text)?;
    eprintln!(
        "{name}: {} points, mean-identity residual {:.2e}, min s' - 1 = {:.2e}, Mf peak-shaped: {}",
        prof.len(),
        rep.lemma1_avg_residual,
        rep.s_slope_margin,
        rep.mf_peakshape.is_peak_shaped
    );

    let mut failures = Vec::new();
    if !(rep.lemma1_avg_residual <= tol * rep.scale) {
        failures.push(format!(
            "mean-identity residual {:e} exceeds {:e}",
            rep.lemma1_avg_residual,
            tol * rep.scale
        ));
    }
    // Linear stretches (the tent near its peak) give s' = 1 exactly.
    if !(rep.s_slope_margin >= -tol) {
        failures.push(format!("discrete s' falls below 1 by {:e}", -rep.s_slope_margin));
    }
    if !rep.mf_peakshape.is_peak_shaped {
        failures.push("the sampled Mf is not peak-shaped".into());
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join("; ")))
    }
}

#[derive(Serialize)]
struct SharpnessOutput<'a> {
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_f64")]
    p: f64,
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_f64")]
    c_p: f64,
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_f64")]
    band: f64,
    rows: &'a [SharpnessRow],
}

pub fn sharpness(c: &Common, caps: &[f64], band: f64, n_points: usize) -> Outcome {
    reject(
        c,
        "sharpness",
        &[
            ("fn", c.function.is_some()),
            ("seed", c.seed.is_some()),
            ("grid", c.grid.is_some()),
        ],
    )?;
    let p = single_p(c, 2.0)?;
    if caps.len() < 3 {
        return Err(usage(format!(
            "the family needs at least 3 caps, got {}",
            caps.len()
        )));
    }
    if !(band > 0.0 && band < 1.0) {
        return Err(usage(format!("--band {band} must lie in (0, 1)")));
    }
    let cfg = SharpnessConfig {
        p,
        caps: caps.to_vec(),
        n_points,
        ..SharpnessConfig::default()
    };
    let rows = sharpness_family(&cfg)?;
    let cp = c_p(p, 1e-12)?;
    let tol = c.tol.unwrap_or(1e-6);

    let text = match c.format {
        Format::Csv => {
            let mut s = String::from("cap,ratio,ratio_over_c_p,f_norm_p,g_norm_p,grid_points\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{}\n",
                    csv_row(&[r.cap, r.ratio, r.ratio / cp, r.f_norm_p, r.g_norm_p]),
                    r.grid_points
                ));
            }
            s
        }
        Format::Json => to_json(&SharpnessOutput {
            p,
            c_p: cp,
            band,
            rows: &rows,
        })?,
    };
    emit(c, &text)?;
    let last = rows.last().map_or(0.0, |r| r.ratio);
    eprintln!("p = {p}: final ratio {last:.7} = {:.4} c_p", last / cp);

    let mut failures = Vec::new();
    if let Some(w) = rows.windows(2).find(|w| w[1].ratio < w[0].ratio) {
        failures.push(format!(
            "ratio decreases from cap {} to cap {}",
            sig17(w[0].cap),
            sig17(w[1].cap)
        ));
    }
    if let Some(r) = rows.iter().find(|r| r.ratio > cp * (1.0 + tol)) {
        failures.push(format!(
            "ratio {} at cap {} exceeds c_p",
            sig17(r.ratio),
            sig17(r.cap)
        ));
    }
    if !(last >= (1.0 - band) * cp) {
        failures.push(format!("final ratio {} is below (1 - {band}) c_p", sig17(last)));
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join("; ")))
    }
}

#[derive(Serialize)]
struct NamedReport<'a> {
    function: &'a str,
    failures: Vec<String>,
    report: &'a VariationalReport,
}

pub fn variational(c: &Common, count: usize) -> Outcome {
    let p = single_p(c, 2.0)?;
    let alpha = if c.alpha == "auto" {
        alpha0_of_p(p)?
    } else {
        c.alpha
            .parse::<f64>()
            .map_err(|_| usage(format!("--alpha expects a number or auto, got {:?}", c.alpha)))?
    };
    let mut cfg = VariationalConfig::new(p, alpha)?;
    if let Some(t) = c.tol {
        cfg = cfg.with_budget(t)?;
    }
    let spec = grid(c)?;
    let fs = functions(c, count, random_peak_shaped)?;
    let reports = fs
        .par_iter()
        .map(|(_, f)| {
            let prof = maximal_profile(f, &spec)?;
            sharpmax_core::variational::compute_chain(f, &prof, &cfg)
        })
        .collect::<sharpmax_core::Result<Vec<_>>>()?;

    let text = match c.format {
        Format::Csv => {
            let mut s = String::from(
                "function,i_s,i_s0,f_norm_p,r_g_norm,i_s_rel_gap,i_s0_rel_gap,i_s0_rel_gap_bounded,\
                 chain_margin,el_residual_max,pointwise_gap_min,pass\n",
            );
            for ((name, _), r) in fs.iter().zip(&reports) {
                s.push_str(&format!(
                    "{},{},{}\n",
                    csv_field(name),
                    csv_row(&[
                        r.i_s,
                        r.i_s0,
                        r.f_norm_p,
                        r.r_g_norm,
                        r.i_s_rel_gap,
                        r.i_s0_rel_gap,
                        r.i_s0_rel_gap_bounded,
                        r.chain_margin,
                        r.el_residual_max,
                        r.pointwise_gap_min,
                    ]),
                    r.failures().is_empty()
                ));
            }
            s
        }
        Format::Json => {
            let named: Vec<NamedReport> = fs
                .iter()
                .zip(&reports)
                .map(|((name, _), r)| NamedReport {
                    function: name,
                    failures: r.failures(),
                    report: r,
                })
                .collect();
            to_json(&named)?
        }
    };
    emit(c, &text)?;

    let mut failures = Vec::new();
    for ((name, _), r) in fs.iter().zip(&reports) {
        eprintln!(
            "{name}: I(s) gap {:.2e}, I(s0) gap {:.2e} raw / {:.2e} with boundary terms, EL {:.1e}",
            r.i_s_rel_gap, r.i_s0_rel_gap, r.i_s0_rel_gap_bounded, r.el_residual_max
        );
        let f = r.failures();
        if !f.is_empty() {
            failures.push(format!("{name}: {}", f.join("; ")));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join(" | ")))
    }
}

#[derive(Serialize)]
struct WeakOutput<'a> {
    function: &'a str,
    #[serde(serialize_with = "sharpmax_core::numfmt::ser_f64")]
    max_ratio: f64,
    rows: &'a [WeakTypeRow],
}

pub fn weaktype(c: &Common, lambdas: &[f64], count: usize) -> Outcome {
    if !c.p.is_empty() && c.p != [1.0] {
        return Err(usage("the weak-type check is the case p = 1"));
    }
    let spec = grid(c)?;
    let fs = functions(c, count, random_unimodal)?;
    let tables = fs
        .par_iter()
        .map(|(_, f)| {
            let levels: Vec<f64> = if lambdas.is_empty() {
                (0..13)
                    .map(|k| f.max_value() * 10f64.powf(-3.0 + 0.25 * k as f64))
                    .collect()
            } else {
                lambdas.to_vec()
            };
            let prof = maximal_profile(f, &spec)?;
            weak_type_ratio(f, &prof, &levels)
        })
        .collect::<sharpmax_core::Result<Vec<_>>>()?;
    let tol = c.tol.unwrap_or(1e-6);
    let max_of = |rows: &[WeakTypeRow]| rows.iter().map(|r| r.ratio).fold(0.0, f64::max);

    let text = match c.format {
        Format::Csv => {
            let mut s = String::from("function,lambda,measure,ratio\n");
            for ((name, _), rows) in fs.iter().zip(&tables) {
                for r in rows {
                    s.push_str(&format!(
                        "{},{}\n",
                        csv_field(name),
                        csv_row(&[r.lambda, r.measure, r.ratio])
                    ));
                }
            }
            s
        }
        Format::Json => {
            let out: Vec<WeakOutput> = fs
                .iter()
                .zip(&tables)
                .map(|((name, _), rows)| WeakOutput {
                    function: name,
                    max_ratio: max_of(rows),
                    rows,
                })
                .collect();
            to_json(&out)?
        }
    };
    emit(c, &text)?;

    let sup = tables.iter().map(|t| max_of(t)).fold(0.0, f64::max);
    eprintln!("largest ratio observed: {sup:.9}");
    let bad: Vec<String> = fs
        .iter()
        .zip(&tables)
        .filter(|(_, t)| max_of(t) > 1.0 + tol)
        .map(|((name, _), t)| format!("{name}: ratio {}", sig17(max_of(t))))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "weak-type ratio above 1: {}",
            bad.join("; ")
        )))
    }
}
