//! Compactly supported, nonnegative piecewise-linear functions.
//!
//! A [`PiecewiseLinearFn`] is the concrete stand-in for the functions the
//! maximal operator acts on. It is zero outside its first and last
//! breakpoint and may jump at exactly one abscissa, the declared peak,
//! encoded by repeating that abscissa with two values.
//!
//! Window integrals are exact up to rounding: a prefix antiderivative is
//! stored per breakpoint, anchored at the peak so that windows near the
//! peak never subtract two large numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numfmt::sig17;

/// Which one-sided limit to take at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFn {
    xs: Vec<f64>,
    ys: Vec<f64>,
    peak_index: usize,
    // Both indices of the peak abscissa; equal unless the peak is a jump.
    peak_lo: usize,
    peak_hi: usize,
    // prefix[i] = integral of f from the peak to xs[i] (negative left of it).
    prefix: Vec<f64>,
}

/// Verdict of the discrete "convex on each side of the peak" test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakShapeReport {
    pub is_peak_shaped: bool,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub peak_location: f64,
    /// Most negative slope increment on either side; 0 if none.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub max_convexity_violation: f64,
    pub positivity_ok: bool,
}

/// `value` is the integral of `|f|^p`; [`NormValue::norm`] takes the root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue {
    pub p: f64,
    pub value: f64,
}

impl NormValue {
    pub fn norm(&self) -> f64 {
        self.value.powf(1.0 / self.p)
    }
}

/// Wire format shared by the CLI: `{"breakpoints":[..],"values":[..],"peak_index":k}`.
#[derive(Debug, Deserialize)]
struct FunctionJson {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    peak_index: usize,
}

impl PiecewiseLinearFn {
    /// Validates and builds a function from breakpoints and values.
    ///
    /// Breakpoints must increase strictly except for one optional repeated
    /// abscissa, which must be the peak; `peak_index` may name either copy.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, peak_index: usize) -> Result<Self> {
        let n = breakpoints.len();
        if n != values.len() {
            return Err(invalid(format!("{} breakpoints but {} values", n, values.len())));
        }
        if n < 3 {
            return Err(invalid("at least 3 breakpoints are required"));
        }
        if peak_index >= n {
            return Err(invalid(format!("peak_index {peak_index} out of range")));
        }
        if let Some(bad) = breakpoints.iter().chain(values.iter()).find(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite entry {bad}")));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(invalid(format!("negative value {v} at index {i}")));
        }
        if values[0] != 0.0 || values[n - 1] != 0.0 {
            return Err(invalid("values at the first and last breakpoint must be 0"));
        }
        let mut repeat = None;
        for i in 0..n - 1 {
            if breakpoints[i + 1] < breakpoints[i] {
                return Err(invalid(format!("breakpoints not sorted at index {}", i + 1)));
            }
            if breakpoints[i + 1] == breakpoints[i] {
                if repeat.is_some() {
                    return Err(invalid("more than one repeated abscissa"));
                }
                repeat = Some(i);
            }
        }
        let (peak_lo, peak_hi) = match repeat {
            Some(i) if peak_index == i || peak_index == i + 1 => (i, i + 1),
            Some(i) => {
                return Err(invalid(format!(
                    "jump at x = {} is not at the declared peak",
                    breakpoints[i]
                )))
            }
            None => (peak_index, peak_index),
        };
        if repeat == Some(0) || repeat == Some(n - 2) {
            return Err(invalid("the peak cannot sit on a support endpoint"));
        }

        let mut prefix = vec![0.0; n];
        for i in (0..peak_lo).rev() {
            let w = breakpoints[i + 1] - breakpoints[i];
            prefix[i] = prefix[i + 1] - 0.5 * w * (values[i] + values[i + 1]);
        }
        for i in peak_lo + 1..n {
            let w = breakpoints[i] - breakpoints[i - 1];
            prefix[i] = prefix[i - 1] + 0.5 * w * (values[i - 1] + values[i]);
        }

        Ok(Self {
            xs: breakpoints,
            ys: values,
            peak_index,
            peak_lo,
            peak_hi,
            prefix,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: FunctionJson = serde_json::from_str(text)?;
        Self::new(raw.breakpoints, raw.values, raw.peak_index)
    }

    /// Serialises to the wire format with 17 significant digits.
    pub fn to_json_string(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|&x| sig17(x)).collect::<Vec<_>>().join(",");
        format!(
            "{{\"breakpoints\":[{}],\"values\":[{}],\"peak_index\":{}}}",
            join(&self.xs),
            join(&self.ys),
            self.peak_index
        )
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn peak_index(&self) -> usize {
        self.peak_index
    }

    /// Indices of the left and right copy of the peak abscissa.
    pub fn peak_indices(&self) -> (usize, usize) {
        (self.peak_lo, self.peak_hi)
    }

    pub fn peak_location(&self) -> f64 {
        self.xs[self.peak_lo]
    }

    pub fn has_jump(&self) -> bool {
        self.peak_lo != self.peak_hi
    }

    pub fn support(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Largest distance from the peak to a support endpoint.
    pub fn support_radius(&self) -> f64 {
        let (lo, hi) = self.support();
        let c = self.peak_location();
        (c - lo).max(hi - c)
    }

    pub fn max_value(&self) -> f64 {
        self.ys.iter().cloned().fold(0.0, f64::max)
    }

    /// Value and slope of the linear piece adjacent to `x` on `side`.
    /// Outside the support both are 0.
    pub fn segment_at(&self, x: f64, side: Side) -> (f64, f64) {
        let n = self.xs.len();
        let idx = match side {
            Side::Right => self.xs.partition_point(|&b| b <= x),
            Side::Left => self.xs.partition_point(|&b| b < x),
        };
        if idx == 0 || idx == n {
            return (0.0, 0.0);
        }
        let (x0, x1) = (self.xs[idx - 1], self.xs[idx]);
        let (y0, y1) = (self.ys[idx - 1], self.ys[idx]);
        let slope = (y1 - y0) / (x1 - x0);
        // Interpolate from the nearer node.
        let v = if x - x0 <= x1 - x {
            y0 + slope * (x - x0)
        } else {
            y1 - slope * (x1 - x)
        };
        (v, slope)
    }

    pub fn eval_side(&self, x: f64, side: Side) -> f64 {
        self.segment_at(x, side).0
    }

    /// Right-continuous evaluation; differs from the left limit only at the
    /// peak jump.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_side(x, Side::Right)
    }

    /// Mean of the two one-sided limits.
    pub fn eval_mid(&self, x: f64) -> f64 {
        0.5 * (self.eval_side(x, Side::Left) + self.eval_side(x, Side::Right))
    }

    /// Integral of `f` from the peak to `x`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.prefix[0];
        }
        if x >= self.xs[n - 1] {
            return self.prefix[n - 1];
        }
        let idx = self.xs.partition_point(|&b| b <= x);
        let (i, j) = (idx - 1, idx);
        let (x0, x1) = (self.xs[i], self.xs[j]);
        let (y0, y1) = (self.ys[i], self.ys[j]);
        let slope = (y1 - y0) / (x1 - x0);
        if j <= self.peak_lo {
            // Left of the peak: anchor at the right node, nearer the peak.
            let w = x1 - x;
            self.prefix[j] - w * (y1 - 0.5 * slope * w)
        } else {
            let w = x - x0;
            self.prefix[i] + w * (y0 + 0.5 * slope * w)
        }
    }

    /// Exact integral over `[a, b]` (oriented: swaps sign if `a > b`).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.antiderivative(b) - self.antiderivative(a)
    }

    /// Integral of `f^p` over the line, exact per segment.
    pub fn lp_norm_p(&self, p: f64) -> Result<NormValue> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(invalid(format!("exponent p = {p} must be >= 1")));
        }
        let value = self
            .xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| segment_power_integral(x[1] - x[0], y[0], y[1], p))
            .sum();
        Ok(NormValue { p, value })
    }

    /// Discrete convexity test on each side of the declared peak.
    pub fn is_peak_shaped(&self, tol_convexity: f64) -> PeakShapeReport {
        peak_shape_of_samples(&self.xs, &self.ys, self.peak_lo, self.peak_hi, tol_convexity)
    }

    /// `c * f` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(invalid(format!("scale {c} must be positive")));
        }
        Self::new(
            self.xs.clone(),
            self.ys.iter().map(|&y| c * y).collect(),
            self.peak_index,
        )
    }

    /// Pointwise sum. Both functions must be continuous or jump at the same
    /// abscissa; the result's peak is placed at its largest value.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        let jump_at = match (self.has_jump(), other.has_jump()) {
            (false, false) => None,
            (true, false) => Some(self.peak_location()),
            (false, true) => Some(other.peak_location()),
            (true, true) if self.peak_location() == other.peak_location() => Some(self.peak_location()),
            _ => return Err(invalid("sum of functions with jumps at different abscissas")),
        };
        let mut grid: Vec<f64> = self.xs.iter().chain(other.xs.iter()).cloned().collect();
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        let mut xs = Vec::with_capacity(grid.len() + 1);
        let mut ys = Vec::with_capacity(grid.len() + 1);
        let mut peak = 0;
        for &x in &grid {
            if Some(x) == jump_at {
                xs.push(x);
                ys.push(self.eval_side(x, Side::Left) + other.eval_side(x, Side::Left));
                peak = xs.len() - 1;
                xs.push(x);
                ys.push(self.eval_side(x, Side::Right) + other.eval_side(x, Side::Right));
            } else {
                xs.push(x);
                ys.push(self.eval(x) + other.eval(x));
            }
        }
        if jump_at.is_none() {
            peak = ys
                .iter()
                .enumerate()
                .fold(0, |best, (i, &y)| if y > ys[best] { i } else { best });
        }
        Self::new(xs, ys, peak)
    }
}

/// Integral of `v(x)^p` over one linear piece of width `w`.
fn segment_power_integral(w: f64, v0: f64, v1: f64, p: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let hi = v0.max(v1);
    if hi == 0.0 {
        return 0.0;
    }
    if (v1 - v0).abs() > 1e-3 * hi {
        w * (v1.powf(p + 1.0) - v0.powf(p + 1.0)) / ((p + 1.0) * (v1 - v0))
    } else {
        // Nearly flat piece: the difference quotient cancels, use
        // five-point Gauss–Legendre on the smooth integrand instead.
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let mid = 0.5 * (v0 + v1);
        let half = 0.5 * (v1 - v0);
        0.5 * w
            * NODES
                .iter()
                .zip(WEIGHTS.iter())
                .map(|(&t, &wt)| wt * (mid + half * t).powf(p))
                .sum::<f64>()
    }
}

/// Peak-shape test on sampled data `(xs, ys)` whose peak occupies indices
/// `peak_lo..=peak_hi`. Slopes must be nondecreasing left to right on
/// `[0, peak_lo]` and on `[peak_hi, n)`, up to `tol_convexity`.
pub fn peak_shape_of_samples(
    xs: &[f64],
    ys: &[f64],
    peak_lo: usize,
    peak_hi: usize,
    tol_convexity: f64,
) -> PeakShapeReport {
    fn worst_increment(xs: &[f64], ys: &[f64]) -> f64 {
        let slopes: Vec<f64> = xs
            .windows(2)
            .zip(ys.windows(2))
            .filter(|(x, _)| x[1] > x[0])
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect();
        slopes.windows(2).map(|s| s[1] - s[0]).fold(0.0, f64::min)
    }
    let left = worst_increment(&xs[..=peak_lo], &ys[..=peak_lo]);
    let right = worst_increment(&xs[peak_hi..], &ys[peak_hi..]);
    let violation = left.min(right);
    let positivity_ok = ys.iter().all(|&y| y >= 0.0);
    PeakShapeReport {
        is_peak_shaped: positivity_ok && violation >= -tol_convexity,
        peak_location: xs[peak_lo],
        max_convexity_violation: violation,
        positivity_ok,
    }
}

/// Parameters for the random function generators.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Breakpoints on each side of the peak, not counting the peak.
    pub breakpoints_per_side: usize,
    /// Range for the distance from the peak to each support endpoint.
    pub support_radius: (f64, f64),
    pub peak_height: (f64, f64),
    /// Innermost breakpoint distance relative to the side's radius.
    /// Small values make the peak "spiky": windows around any point
    /// farther than this from the peak see a kink.
    pub inner_width_ratio: f64,
    /// The peak is placed uniformly in `[-peak_offset, peak_offset]`.
    pub peak_offset: f64,
    /// Probability of a jump at the peak.
    pub jump_probability: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            breakpoints_per_side: 12,
            support_radius: (0.5, 2.0),
            peak_height: (0.5, 2.0),
            inner_width_ratio: 1e-8,
            peak_offset: 0.5,
            jump_probability: 0.25,
        }
    }
}

impl GeneratorConfig {
    fn validate(&self) -> Result<()> {
        let ok_range = |(lo, hi): (f64, f64)| lo > 0.0 && hi >= lo && hi.is_finite();
        if self.breakpoints_per_side == 0 {
            return Err(invalid("breakpoints_per_side must be at least 1"));
        }
        if !ok_range(self.support_radius) || !ok_range(self.peak_height) {
            return Err(invalid("support_radius and peak_height need 0 < lo <= hi"));
        }
        if !(self.inner_width_ratio > 0.0 && self.inner_width_ratio < 1.0) {
            return Err(invalid("inner_width_ratio must lie in (0, 1)"));
        }
        if !(self.peak_offset >= 0.0) || !(0.0..=1.0).contains(&self.jump_probability) {
            return Err(invalid("peak_offset must be >= 0 and jump_probability in [0, 1]"));
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Distances from the peak to one side's breakpoints: log-stratified from
/// `radius * inner` to exactly `radius`.
fn side_offsets(rng: &mut ChaCha8Rng, radius: f64, n: usize, inner: f64) -> Vec<f64> {
    if n == 1 {
        return vec![radius];
    }
    let lo = (radius * inner).ln();
    let hi = radius.ln();
    let step = (hi - lo) / (n - 1) as f64;
    let mut d: Vec<f64> = (0..n)
        .map(|k| {
            let jitter = if k + 1 < n { rng.gen_range(-0.3..0.3) } else { 0.0 };
            (lo + step * (k as f64 + jitter)).exp()
        })
        .collect();
    d[n - 1] = radius;
    d
}

/// Values at `offsets` of a convex decreasing profile falling from `height`
/// to 0: slope magnitudes decay outward like a power of the distance.
fn convex_side_values(rng: &mut ChaCha8Rng, offsets: &[f64], height: f64) -> Vec<f64> {
    let kappa = rng.gen_range(0.5..0.95);
    let mut damp = 1.0;
    let mut prev = 0.0;
    let drops: Vec<f64> = offsets
        .iter()
        .map(|&d| {
            damp *= 1.0 - 0.3 * rng.gen::<f64>();
            let mid = 0.5 * (prev + d);
            let w = d - prev;
            prev = d;
            mid.powf(-kappa) * damp * w
        })
        .collect();
    let total: f64 = drops.iter().sum();
    let mut acc = 0.0;
    let mut vals: Vec<f64> = drops
        .iter()
        .map(|&dr| {
            acc += dr;
            height * (1.0 - acc / total)
        })
        .collect();
    *vals.last_mut().unwrap() = 0.0;
    vals
}

fn assemble(
    center: f64,
    left_off: &[f64],
    left_vals: &[f64],
    right_off: &[f64],
    right_vals: &[f64],
    peak: (f64, f64),
) -> Result<PiecewiseLinearFn> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (d, v) in left_off.iter().zip(left_vals).rev() {
        xs.push(center - d);
        ys.push(*v);
    }
    let peak_index = xs.len();
    xs.push(center);
    ys.push(peak.0);
    if peak.1 != peak.0 {
        xs.push(center);
        ys.push(peak.1);
    }
    for (d, v) in right_off.iter().zip(right_vals) {
        xs.push(center + d);
        ys.push(*v);
    }
    PiecewiseLinearFn::new(xs, ys, peak_index)
}

/// A random peak-shaped function, deterministic in `seed`.
///
/// Each side is built outward from the peak with slope magnitudes that
/// shrink at every breakpoint, so the result is convex on both sides by
/// construction and passes [`PiecewiseLinearFn::is_peak_shaped`] with zero
/// tolerance.
pub fn random_peak_shaped(seed: u64, cfg: &GeneratorConfig) -> Result<PiecewiseLinearFn> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = uniform(&mut rng, (-cfg.peak_offset, cfg.peak_offset));
    let h_left = uniform(&mut rng, cfg.peak_height);
    let h_right = if rng.gen::<f64>() < cfg.jump_probability {
        uniform(&mut rng, cfg.peak_height)
    } else {
        h_left
    };
    let n = cfg.breakpoints_per_side;
    let r_left = uniform(&mut rng, cfg.support_radius);
    let r_right = uniform(&mut rng, cfg.support_radius);
    let left_off = side_offsets(&mut rng, r_left, n, cfg.inner_width_ratio);
    let right_off = side_offsets(&mut rng, r_right, n, cfg.inner_width_ratio);
    let left_vals = convex_side_values(&mut rng, &left_off, h_left);
    let right_vals = convex_side_values(&mut rng, &right_off, h_right);
    assemble(
        center,
        &left_off,
        &left_vals,
        &right_off,
        &right_vals,
        (h_left, h_right),
    )
}

/// A random unimodal function: nondecreasing up to the peak and
/// nonincreasing after it, with no convexity constraint.
pub fn random_unimodal(seed: u64, cfg: &GeneratorConfig) -> Result<PiecewiseLinearFn> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = uniform(&mut rng, (-cfg.peak_offset, cfg.peak_offset));
    let h_left = uniform(&mut rng, cfg.peak_height);
    let h_right = if rng.gen::<f64>() < cfg.jump_probability {
        uniform(&mut rng, cfg.peak_height)
    } else {
        h_left
    };
    let n = cfg.breakpoints_per_side;
    let side = |rng: &mut ChaCha8Rng, h: f64| {
        let radius = uniform(rng, cfg.support_radius);
        let mut off: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..1.0) * radius).collect();
        off.sort_by(|a, b| a.partial_cmp(b).unwrap());
        off.dedup();
        *off.last_mut().unwrap() = radius;
        let mut vals: Vec<f64> = (0..off.len()).map(|_| h * rng.gen::<f64>()).collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        *vals.last_mut().unwrap() = 0.0;
        (off, vals)
    };
    let (left_off, left_vals) = side(&mut rng, h_left);
    let (right_off, right_vals) = side(&mut rng, h_right);
    assemble(
        center,
        &left_off,
        &left_vals,
        &right_off,
        &right_vals,
        (h_left, h_right),
    )
}

/// Piecewise-linear member of the class approximating `|x|^(-1/p)`.
///
/// Nodes sit on a symmetric base-10 geometric grid of `n_points` abscissas
/// per side, from `cap^-p` (where the power equals `cap`) out to
/// `cap^(p*p)` (where it has dropped to `cap^-p`). The tail closes along
/// the tangent of the power at the last node, reaching 0 at `(1+p)` times
/// that node, and the peak value at 0 doubles the innermost chord slope.
/// Both closures keep each side convex.
pub fn truncated_power(p: f64, cap: f64, n_points: usize) -> Result<PiecewiseLinearFn> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid(format!("p = {p} must exceed 1")));
    }
    if !(cap > 1.0) || !cap.is_finite() {
        return Err(invalid(format!("cap = {cap} must exceed 1")));
    }
    if n_points < 16 {
        return Err(invalid("n_points must be at least 16"));
    }
    let e_lo = -p * cap.log10();
    let e_hi = p * p * cap.log10();
    let span = e_hi - e_lo;
    let last = (n_points - 1) as f64;
    let nodes: Vec<f64> = (0..n_points)
        .map(|k| 10f64.powf(e_lo + span * k as f64 / last))
        .collect();
    let vals: Vec<f64> = nodes.iter().map(|&r| r.powf(-1.0 / p)).collect();
    let r_end = (1.0 + p) * nodes[n_points - 1];
    let peak = vals[0] + 2.0 * (vals[0] - vals[1]) * nodes[0] / (nodes[1] - nodes[0]);

    let mut off = nodes.clone();
    off.push(r_end);
    let mut side_vals = vals;
    side_vals.push(0.0);
    assemble(0.0, &off, &side_vals, &off, &side_vals, (peak, peak))
}

impl std::str::FromStr for PiecewiseLinearFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_json_str(s)
    }
}
