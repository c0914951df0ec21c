//! The centered maximal operator `Mf(x) = sup_t (1/2t) ∫_{x-t}^{x+t} f`.
//!
//! For a piecewise-linear `f` the window average `xi_x(t)` is evaluated in
//! closed form. The radius axis splits into cells at the radii where `x+t`
//! or `x-t` meets a breakpoint. Inside a cell the window mass is a
//! quadratic `A(t)` and `xi' = (t A' - A) / (2 t^2)` has a numerator whose
//! derivative is `t A''`, of fixed sign on the cell. So each cell holds at
//! most one stationary point, found in closed form, and the supremum is
//! the largest of finitely many candidates.

mod profile;
mod sharpness;
mod weak;

pub use profile::{
    endpoint_values, grid_derivative, maximal_profile, structural_checks, GridSpec, MaximalProfile,
    ProfileNorm, StructuralCheckReport,
};
pub use sharpness::{sharpness_family, sharpness_grid, SharpnessConfig, SharpnessRow};
pub use weak::{weak_type_ratio, WeakTypeRow};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::funcrep::{PiecewiseLinearFn, Side};
use crate::solve::{expand_until_decreasing, golden_max};

/// Relative tolerance within which two window averages count as a tie.
/// Ties resolve to the larger radius. Kept at a few ulps: near a steep
/// peak a looser tie admits a cell endpoint next to a sharp maximum.
pub const TIE_TOL: f64 = 8.0 * f64::EPSILON;

/// `xi_x(t)`, the average of `f` over `[x-t, x+t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowAverage {
    pub x: f64,
    pub t: f64,
    pub value: f64,
}

/// `Mf(x)` together with the largest maximising radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaximalPoint {
    pub g: f64,
    pub delta: f64,
}

/// Window average at radius `t >= 0`; at `t = 0` the mean of the
/// one-sided limits of `f` at `x`.
pub fn xi(f: &PiecewiseLinearFn, x: f64, t: f64) -> Result<WindowAverage> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("radius t = {t} must be >= 0")));
    }
    let value = if t == 0.0 {
        f.eval_mid(x)
    } else {
        f.integral(x - t, x + t) / (2.0 * t)
    };
    Ok(WindowAverage { x, t, value })
}

/// Mass share below which a window's mass is accumulated locally.
const NARROW_SHARE: f64 = 1e-6;

pub fn maximal_at(f: &PiecewiseLinearFn, x: f64) -> MaximalPoint {
    maximal_at_with_tol(f, x, TIE_TOL)
}

/// Exact `Mf(x)` and `delta(x) = max B_x` with an explicit tie tolerance.
pub fn maximal_at_with_tol(f: &PiecewiseLinearFn, x: f64, tie_tol: f64) -> MaximalPoint {
    let mut events: Vec<f64> = f
        .breakpoints()
        .iter()
        .map(|&b| (b - x).abs())
        .filter(|&t| t > 0.0)
        .collect();
    events.sort_by(|a, b| a.total_cmp(b));
    events.dedup();

    let top = f.max_value();
    let mass = f.integral(f.support().0, f.support().1);
    let mut candidates = Vec::with_capacity(2 * events.len() + 1);
    candidates.push((0.0, f.eval_mid(x)));
    let (mut t0, mut a0) = (0.0_f64, 0.0_f64);
    for &t1 in &events {
        // On (t0, t1): A'(t) = L0 + m (t - t0). The pieces are located at
        // the cell midpoint; x -+ t0 itself may round across a breakpoint.
        let tm = 0.5 * (t0 + t1);
        let (vr, kr) = f.segment_at(x + tm, Side::Right);
        let (vl, kl) = f.segment_at(x - tm, Side::Left);
        let l0 = vr - kr * (tm - t0) + vl + kl * (tm - t0);
        let m = kr - kl;
        if m != 0.0 {
            // t A' - A = 0  <=>  t^2 = t0^2 - 2 (t0 L0 - A0) / m
            let tt = t0 * t0 - 2.0 * (t0 * l0 - a0) / m;
            if tt > t0 * t0 {
                let ts = tt.sqrt();
                // t0 L0 - A0 is a difference of terms of size A0, so the
                // root carries an absolute error of about eps A0 / (|m| t0).
                // A root that close to t0 is the t0 candidate itself.
                let slack =
                    4.0 * f64::EPSILON * ((t0 * l0).abs() + a0.abs()) / (m.abs() * t0.max(f64::MIN_POSITIVE));
                if ts > t0 * (1.0 + 4.0 * f64::EPSILON) + slack && ts < t1 {
                    let u = ts - t0;
                    let a = a0 + l0 * u + 0.5 * m * u * u;
                    candidates.push((ts, a / (2.0 * ts)));
                }
            }
        }
        // Windows holding a tiny share of the mass: accumulate from the
        // local quadratic, since differencing prefix sums loses everything
        // on a window of width ~1e-16. Otherwise the prefix sums, which stay
        // exact where x -+ t is too coarse to resolve the breakpoints.
        let a1 = if 2.0 * t1 * top <= NARROW_SHARE * mass {
            let u = t1 - t0;
            a0 + u * (l0 + 0.5 * m * u)
        } else {
            f.integral(x - t1, x + t1)
        };
        candidates.push((t1, a1 / (2.0 * t1)));
        t0 = t1;
        a0 = a1;
    }
    // Past the last event the window holds all the mass and xi decays
    // like 1/t, so the last event closes the search.

    let g = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let floor = g - tie_tol * g.abs();
    let delta = candidates
        .iter()
        .filter(|c| c.1 >= floor)
        .map(|c| c.0)
        .fold(0.0, f64::max);
    MaximalPoint { g, delta }
}

/// Window average of `|u|^(-1/p)` over `[x-t, x+t]`, in closed form.
///
/// With `r = |x|` and `a = (p-1)/p` the window mass is
/// `((r+t)^a - (r-t)^a)/a` while the window misses the origin and
/// `((r+t)^a + (t-r)^a)/a` once it contains it.
pub fn power_window_average(p: f64, x: f64, t: f64) -> f64 {
    let a = (p - 1.0) / p;
    let r = x.abs();
    let mass = if t <= r {
        ((r + t).powf(a) - (r - t).powf(a)) / a
    } else {
        ((r + t).powf(a) + (t - r).powf(a)) / a
    };
    mass / (2.0 * t)
}

/// `sup_t xi_x(t) * |x|^(1/p)` for `f = |u|^(-1/p)`, maximising directly in
/// the radius. Equal to `c_p` for every `x != 0`.
pub fn power_fixed_point_ratio(p: f64, x: f64) -> Result<f64> {
    if !(p > 1.0) || x == 0.0 || !x.is_finite() {
        return Err(invalid(format!(
            "need p > 1 and finite x != 0 (p = {p}, x = {x})"
        )));
    }
    let r = x.abs();
    // Windows inside one side average a convex function, so xi is
    // nondecreasing on (0, r]; the supremum lies beyond r.
    let objective = |t: f64| power_window_average(p, x, t);
    let hi = expand_until_decreasing(objective, r, 2.0 * r, 200)?;
    let (_, best) = golden_max(objective, r, hi, 1e-14 * r);
    Ok(best * r.powf(1.0 / p))
}
