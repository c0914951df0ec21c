use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use super::{maximal_at_with_tol, MaximalPoint, TIE_TOL};
use crate::error::{invalid, Result};
use crate::funcrep::{peak_shape_of_samples, PeakShapeReport, PiecewiseLinearFn, Side};
use crate::numfmt::csv_row;

/// Abscissas at which a profile samples `Mf`.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `n` points per side at distances `R*inner .. R*outer` from the peak,
    /// geometrically spaced, where `R` is the support radius.
    Geometric { n: usize, inner: f64, outer: f64 },
    /// Explicit abscissas; none may coincide with the peak.
    Explicit(Vec<f64>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Geometric {
            n: 400,
            inner: 1e-6,
            outer: 1e3,
        }
    }
}

impl GridSpec {
    fn abscissas(&self, center: f64, radius: f64) -> Result<Vec<f64>> {
        match self {
            GridSpec::Geometric { n, inner, outer } => {
                if *n < 2 || !(*inner > 0.0) || !(outer > inner) || !outer.is_finite() {
                    return Err(invalid(format!(
                        "geometric grid needs n >= 2 and 0 < inner < outer (got {n}, {inner}, {outer})"
                    )));
                }
                let (lo, hi) = ((radius * inner).ln(), (radius * outer).ln());
                let step = (hi - lo) / (*n - 1) as f64;
                let dists: Vec<f64> = (0..*n).map(|k| (lo + step * k as f64).exp()).collect();
                let mut xs: Vec<f64> = dists.iter().rev().map(|d| center - d).collect();
                xs.extend(dists.iter().map(|d| center + d));
                Ok(xs)
            }
            GridSpec::Explicit(points) => {
                if points.is_empty() {
                    return Err(invalid("explicit grid is empty"));
                }
                if let Some(bad) = points.iter().find(|&&x| x == center || !x.is_finite()) {
                    return Err(invalid(format!("grid point {bad} is the peak or not finite")));
                }
                let mut xs = points.clone();
                xs.sort_by(|a, b| a.total_cmp(b));
                xs.dedup();
                Ok(xs)
            }
        }
    }
}

/// Samples of `g = Mf`, the optimal radius `delta`, the signed radius `s`
/// (`+delta` right of the peak, `-delta` left of it) and `g'`, sorted by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalProfile {
    pub center: f64,
    pub support_radius: f64,
    pub xs: Vec<f64>,
    pub g: Vec<f64>,
    pub delta: Vec<f64>,
    pub s: Vec<f64>,
    pub gprime: Vec<f64>,
    /// `Mf` at the peak itself (not part of the grid).
    pub g_center: f64,
    pub grid: GridSpec,
    pub tie_tol: f64,
}

/// Builds the profile point by point (in parallel; order is preserved).
///
/// `g'` comes from the envelope identity `g'(x) = (f(x+delta) - f(x-delta)) / (2 delta)`,
/// exact at exact maximisers, rather than from differencing `g`. See
/// [`endpoint_values`] for windows ending on the peak jump.
pub fn maximal_profile(f: &PiecewiseLinearFn, grid: &GridSpec) -> Result<MaximalProfile> {
    let center = f.peak_location();
    let radius = f.support_radius();
    let xs = grid.abscissas(center, radius)?;
    let points: Vec<MaximalPoint> = xs
        .par_iter()
        .map(|&x| maximal_at_with_tol(f, x, TIE_TOL))
        .collect();
    let g: Vec<f64> = points.iter().map(|m| m.g).collect();
    let delta: Vec<f64> = points.iter().map(|m| m.delta).collect();
    let s = xs
        .iter()
        .zip(&delta)
        .map(|(&x, &d)| if x > center { d } else { -d })
        .collect();
    let gprime = (0..xs.len())
        .map(|i| {
            let (right, left) = endpoint_values(f, xs[i], delta[i], g[i]);
            (right - left) / (2.0 * delta[i])
        })
        .collect();
    Ok(MaximalProfile {
        center,
        support_radius: radius,
        xs,
        g,
        delta,
        s,
        gprime,
        g_center: maximal_at_with_tol(f, center, TIE_TOL).g,
        grid: grid.clone(),
        tie_tol: TIE_TOL,
    })
}

/// `L^p` integral of `g` split into its pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileNorm {
    /// Trapezoid rule in `ln|x - c|` over the sampled range.
    pub body: f64,
    /// Between the peak and the innermost samples, `g` held at its innermost value.
    pub inner: f64,
    /// Beyond the outermost samples, extrapolated with `g ~ 1/|x - c|`.
    pub tail: f64,
}

impl ProfileNorm {
    pub fn total(&self) -> f64 {
        self.body + self.inner + self.tail
    }
}

impl MaximalProfile {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Index ranges of the samples left and right of the peak.
    pub fn sides(&self) -> (Range<usize>, Range<usize>) {
        let split = self.xs.partition_point(|&x| x < self.center);
        (0..split, split..self.xs.len())
    }

    /// Integral of `g^p` over the line. In the tail `g` decays like the
    /// reciprocal distance, so the extrapolation needs `p > 1`.
    pub fn g_norm_p(&self, p: f64) -> Result<ProfileNorm> {
        if !(p > 1.0) {
            return Err(invalid(format!("profile norm needs p > 1, got {p}")));
        }
        let (left, right) = self.sides();
        let mut out = ProfileNorm {
            body: 0.0,
            inner: 0.0,
            tail: 0.0,
        };
        for range in [left, right] {
            if range.is_empty() {
                continue;
            }
            let mut side: Vec<(f64, f64)> = range
                .map(|i| ((self.xs[i] - self.center).abs(), self.g[i].powf(p)))
                .collect();
            side.sort_by(|a, b| a.0.total_cmp(&b.0));
            out.body += side
                .windows(2)
                .map(|w| 0.5 * (w[0].1 * w[0].0 + w[1].1 * w[1].0) * (w[1].0 / w[0].0).ln())
                .sum::<f64>();
            let (r0, v0) = side[0];
            let (rn, vn) = side[side.len() - 1];
            out.inner += v0 * r0;
            out.tail += vn * rn / (p - 1.0);
        }
        Ok(out)
    }

    /// Profile CSV: header `x,g,delta,s,gprime`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,g,delta,s,gprime\n");
        for i in 0..self.len() {
            out.push_str(&csv_row(&[
                self.xs[i],
                self.g[i],
                self.delta[i],
                self.s[i],
                self.gprime[i],
            ]));
            out.push('\n');
        }
        out
    }
}

/// Second-order derivative estimate on a nonuniform grid; one-sided
/// secants at the two ends.
pub fn grid_derivative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                (ys[1] - ys[0]) / (xs[1] - xs[0])
            } else if i == n - 1 {
                (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2])
            } else {
                let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
                let left = (ys[i] - ys[i - 1]) / h0;
                let right = (ys[i + 1] - ys[i]) / h1;
                (h1 * left + h0 * right) / (h0 + h1)
            }
        })
        .collect()
}

/// Consequences of the structure lemmas, measured on a profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralCheckReport {
    /// max distance of g from (f(x+delta) + f(x-delta))/2. Where a window
    /// endpoint sits on the peak jump, any one-sided limit is admissible.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub lemma1_avg_residual: f64,
    /// max |g' - centred difference of g| over interior samples.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub lemma1_slope_residual: f64,
    /// min over same-side neighbours of the discrete s' minus 1.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub s_slope_margin: f64,
    /// min of delta(x) - |x - c|.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub delta_margin: f64,
    /// Peak-shape verdict for the sampled g (tolerance relative to its steepest slope).
    pub mf_peakshape: PeakShapeReport,
    /// max f; the natural scale of the residuals above.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub scale: f64,
    /// Distances of x - s(x) at the outermost samples from the opposite
    /// support endpoints (left sample, right sample).
    #[serde(serialize_with = "crate::numfmt::ser_vec")]
    pub endpoint_gaps: Vec<f64>,
}

/// Relative tolerance for the sampled peak-shape test on `g`.
pub const PROFILE_CONVEXITY_RTOL: f64 = 1e-8;

/// Values of `f` at the window ends `x + delta` and `x - delta`. An end on
/// the peak jump takes the value the first-order condition
/// `g = (f(x+delta) + f(x-delta)) / 2` assigns it, clamped to the jump.
pub fn endpoint_values(f: &PiecewiseLinearFn, x: f64, delta: f64, g: f64) -> (f64, f64) {
    let (rl, rh) = one_sided_limits(f, x + delta);
    let (ll, lh) = one_sided_limits(f, x - delta);
    if rl < rh {
        ((2.0 * g - ll).clamp(rl, rh), ll)
    } else if ll < lh {
        (rl, (2.0 * g - rl).clamp(ll, lh))
    } else {
        (rl, ll)
    }
}

/// Range of the one-sided limits of `f` at `e`, snapping `e` onto a
/// breakpoint it misses only by rounding.
fn one_sided_limits(f: &PiecewiseLinearFn, e: f64) -> (f64, f64) {
    let bs = f.breakpoints();
    let j = bs.partition_point(|&b| b < e);
    let e = [j.wrapping_sub(1), j]
        .iter()
        .filter_map(|&k| bs.get(k))
        .find(|&&b| (b - e).abs() <= 1e-13 * b.abs().max(1.0))
        .copied()
        .unwrap_or(e);
    let (a, b) = (f.eval_side(e, Side::Left), f.eval_side(e, Side::Right));
    (a.min(b), a.max(b))
}

pub fn structural_checks(f: &PiecewiseLinearFn, prof: &MaximalProfile) -> StructuralCheckReport {
    let n = prof.len();
    let mut avg = 0.0_f64;
    let mut delta_margin = f64::INFINITY;
    for i in 0..n {
        let (x, d) = (prof.xs[i], prof.delta[i]);
        let (r_lo, r_hi) = one_sided_limits(f, x + d);
        let (l_lo, l_hi) = one_sided_limits(f, x - d);
        let (lo, hi) = (0.5 * (r_lo + l_lo), 0.5 * (r_hi + l_hi));
        avg = avg.max((lo - prof.g[i]).max(prof.g[i] - hi).max(0.0));
        delta_margin = delta_margin.min(d - (x - prof.center).abs());
    }

    let (left, right) = prof.sides();
    let mut slope_res = 0.0_f64;
    let mut margin = f64::INFINITY;
    for range in [left.clone(), right.clone()] {
        let xs = &prof.xs[range.clone()];
        let dg = grid_derivative(xs, &prof.g[range.clone()]);
        let interior = dg.len().saturating_sub(1);
        for (k, d) in dg.iter().enumerate().take(interior).skip(1) {
            slope_res = slope_res.max((d - prof.gprime[range.start + k]).abs());
        }
        for k in range.start..range.end.saturating_sub(1) {
            let ds = (prof.s[k + 1] - prof.s[k]) / (prof.xs[k + 1] - prof.xs[k]);
            margin = margin.min(ds - 1.0);
        }
    }

    let steepest = prof
        .xs
        .windows(2)
        .zip(prof.g.windows(2))
        .map(|(x, g)| ((g[1] - g[0]) / (x[1] - x[0])).abs())
        .fold(0.0, f64::max);
    let mf_peakshape = if left.is_empty() || right.is_empty() {
        let last = n.saturating_sub(1);
        let idx = if left.is_empty() { 0 } else { last };
        peak_shape_of_samples(&prof.xs, &prof.g, idx, idx, PROFILE_CONVEXITY_RTOL * steepest)
    } else {
        peak_shape_of_samples(
            &prof.xs,
            &prof.g,
            left.end - 1,
            right.start,
            PROFILE_CONVEXITY_RTOL * steepest,
        )
    };

    let (lo, hi) = f.support();
    let mut endpoint_gaps = Vec::new();
    if !left.is_empty() {
        let i = left.start;
        endpoint_gaps.push(((prof.xs[i] - prof.s[i]) - hi).abs());
    }
    if !right.is_empty() {
        let i = right.end - 1;
        endpoint_gaps.push(((prof.xs[i] - prof.s[i]) - lo).abs());
    }

    StructuralCheckReport {
        lemma1_avg_residual: avg,
        lemma1_slope_residual: slope_res,
        s_slope_margin: margin,
        delta_margin,
        mf_peakshape,
        scale: f.max_value(),
        endpoint_gaps,
    }
}
