use serde::Serialize;

use super::{maximal_at, MaximalProfile};
use crate::error::{invalid, Result};
use crate::funcrep::PiecewiseLinearFn;
use crate::solve::bisect_boundary;

/// One level of the distribution function of `Mf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakTypeRow {
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub lambda: f64,
    /// Measure of `{Mf > lambda}`.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub measure: f64,
    /// `lambda * measure / ||f||_1`.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub ratio: f64,
}

/// `lambda * |{Mf > lambda}| / ||f||_1` for each level.
///
/// The level set is located from sign changes of `g - lambda` along the
/// profile samples (extended outward by doubling when the outermost sample
/// is still above the level), and each crossing is refined by bisection on
/// the exact `Mf`. For unimodal `f` the set is a single interval.
pub fn weak_type_ratio(
    f: &PiecewiseLinearFn,
    prof: &MaximalProfile,
    lambdas: &[f64],
) -> Result<Vec<WeakTypeRow>> {
    if let Some(bad) = lambdas.iter().find(|&&l| !(l > 0.0) || !l.is_finite()) {
        return Err(invalid(format!("level lambda = {bad} must be positive")));
    }
    if prof.is_empty() {
        return Err(invalid("empty profile"));
    }
    let mass = f.lp_norm_p(1.0)?.value;
    let fmax = f.max_value();
    lambdas
        .iter()
        .map(|&lambda| {
            let measure = if lambda >= fmax {
                0.0
            } else {
                level_set_measure(f, prof, lambda)
            };
            Ok(WeakTypeRow {
                lambda,
                measure,
                ratio: lambda * measure / mass,
            })
        })
        .collect()
}

fn level_set_measure(f: &PiecewiseLinearFn, prof: &MaximalProfile, lambda: f64) -> f64 {
    let above = |x: f64| maximal_at(f, x).g > lambda;
    let mut xs = prof.xs.clone();
    let mut inside: Vec<bool> = prof.g.iter().map(|&g| g > lambda).collect();

    let c = prof.center;
    let step_out = |x: f64| c + 2.0 * (x - c);
    while inside[0] {
        let x = step_out(xs[0]);
        inside.insert(0, above(x));
        xs.insert(0, x);
    }
    while *inside.last().unwrap() {
        let x = step_out(*xs.last().unwrap());
        inside.push(above(x));
        xs.push(x);
    }

    let mut measure = 0.0;
    let mut entered = None;
    for i in 0..xs.len() - 1 {
        match (inside[i], inside[i + 1]) {
            (false, true) => {
                entered = Some(bisect_boundary(|x| !above(x), xs[i], xs[i + 1], 200));
            }
            (true, false) => {
                let exit = bisect_boundary(above, xs[i], xs[i + 1], 200);
                if let Some(start) = entered.take() {
                    measure += exit - start;
                }
            }
            _ => {}
        }
    }
    measure
}
