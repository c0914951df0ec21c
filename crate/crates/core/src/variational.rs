//! The variational functional behind the lower-bound chain.
//!
//! With `g = Mf` and weight `alpha` in `(1/2, 1)`,
//!
//! ```text
//! F(x, y, z) = alpha (g + g' y)^p (z + 1) + (1 - alpha) (g - g' y)^p (z - 1),
//! I(phi)     = integral of F(x, phi(x), phi'(x)) dx.
//! ```
//!
//! The signed radius `s` gives `I(s) = ||f||_p^p` by a change of variables,
//! and `s0 = -beta g / g'` solves the Euler–Lagrange equation exactly, with
//! `I(s0) = r(alpha) ||g||_p^p` up to boundary terms. Pointwise convexity of
//! `F` in `y` gives `I(s) >= I(s0)`, hence `||g||_p^p <= ||f||_p^p / r(alpha)`.
//!
//! `I` is improper at the peak and at infinity; here it is integrated over an
//! explicit window `[c-d, c-a] U [c+a, c+d]` around the peak `c`, and the
//! boundary terms `gamma2 [g^p s0]` at the window edges are reported
//! alongside.

use std::ops::Range;

use serde::Serialize;

use crate::constants::{beta_of_alpha, r_of_alpha};
use crate::error::{invalid, Error, Result};
use crate::funcrep::PiecewiseLinearFn;
use crate::maxop::{endpoint_values, grid_derivative, MaximalProfile};
use crate::numfmt::csv_row;

/// Default relative quadrature budget.
pub const DEFAULT_BUDGET: f64 = 5e-3;

/// `g + g'y` or `g - g'y` may come out slightly negative where `f`
/// vanishes (far tail, `y = s`): there `x - delta` is a difference of two
/// numbers of size `|x|` and `g` is small. Within this relative slack such a
/// point is taken to lie on the edge of the strip.
pub const DOMAIN_RTOL: f64 = 1e-8;

/// `|g'| <= GPRIME_FLOOR * g / R` excludes a node from `s0`.
pub const GPRIME_FLOOR: f64 = 1e-14;

/// Tolerance of the Euler–Lagrange residual at `s0`, relative to its scale.
pub const EL_RTOL: f64 = 1e-9;

/// Tolerance of the pointwise convexity gap, relative to its scale.
pub const GAP_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationalConfig {
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub p: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub alpha: f64,
    /// Inner and outer window distances from the peak; `None` uses the
    /// full extent of the profile grid.
    pub window: Option<(f64, f64)>,
    /// Relative tolerance for the quadrature identities.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub budget: f64,
}

impl VariationalConfig {
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        beta_of_alpha(alpha, p)?;
        Ok(VariationalConfig {
            p,
            alpha,
            window: None,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_window(mut self, inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(invalid(format!("window needs 0 < a < d, got ({inner}, {outer})")));
        }
        self.window = Some((inner, outer));
        Ok(self)
    }

    pub fn with_budget(mut self, budget: f64) -> Result<Self> {
        if !(budget > 0.0) {
            return Err(invalid("budget must be positive"));
        }
        self.budget = budget;
        Ok(self)
    }
}

fn legs(gx: f64, gpx: f64, y: f64) -> Result<(f64, f64)> {
    let a = gx + gpx * y;
    let b = gx - gpx * y;
    let slack = DOMAIN_RTOL * (gx + (gpx * y).abs());
    if !(gx > 0.0) || !a.is_finite() || !b.is_finite() || a < -slack || b < -slack {
        return Err(Error::Domain {
            x: f64::NAN,
            y,
            g: gx,
            gprime: gpx,
        });
    }
    Ok((a.max(0.0), b.max(0.0)))
}

fn at(x: f64, e: Error) -> Error {
    match e {
        Error::Domain { y, g, gprime, .. } => Error::Domain { x, y, g, gprime },
        other => other,
    }
}

/// `F(x, y, z)` from the local values `g(x)`, `g'(x)`.
pub fn f_eval(gx: f64, gpx: f64, cfg: &VariationalConfig, y: f64, z: f64) -> Result<f64> {
    let (a, b) = legs(gx, gpx, y)?;
    let p = cfg.p;
    Ok(cfg.alpha * a.powf(p) * (z + 1.0) + (1.0 - cfg.alpha) * b.powf(p) * (z - 1.0))
}

/// `F` and its closed-form partials in `y` and `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FPartials {
    pub value: f64,
    pub dy: f64,
    pub dz: f64,
    pub dydz: f64,
}

pub fn f_partials(gx: f64, gpx: f64, cfg: &VariationalConfig, y: f64, z: f64) -> Result<FPartials> {
    let (a, b) = legs(gx, gpx, y)?;
    let (p, al) = (cfg.p, cfg.alpha);
    let (ap1, bp1) = (a.powf(p - 1.0), b.powf(p - 1.0));
    Ok(FPartials {
        value: al * a.powf(p) * (z + 1.0) + (1.0 - al) * b.powf(p) * (z - 1.0),
        dy: p * gpx * (al * ap1 * (z + 1.0) - (1.0 - al) * bp1 * (z - 1.0)),
        dz: al * a.powf(p) + (1.0 - al) * b.powf(p),
        dydz: p * gpx * (al * ap1 - (1.0 - al) * bp1),
    })
}

/// `alpha (1-beta)^(p-1) - (1-alpha) (1+beta)^(p-1)`, which vanishes by the
/// choice of `beta`; it is the mixed partial of `F` at `y = s0` divided by
/// `p g' g^(p-1)`.
pub fn mixed_partial_bracket(alpha: f64, p: f64) -> Result<f64> {
    let beta = beta_of_alpha(alpha, p)?;
    Ok(alpha * (1.0 - beta).powf(p - 1.0) - (1.0 - alpha) * (1.0 + beta).powf(p - 1.0))
}

/// `s0 = -beta g / g'` on the profile grid. Nodes where `g'` is too small
/// to divide by are listed in `excluded` and carry NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct S0Profile {
    pub beta: f64,
    pub values: Vec<f64>,
    pub excluded: Vec<usize>,
}

pub fn s0_of(prof: &MaximalProfile, alpha: f64, p: f64) -> Result<S0Profile> {
    let beta = beta_of_alpha(alpha, p)?;
    let mut excluded = Vec::new();
    let values = (0..prof.len())
        .map(|i| {
            let (g, gp) = (prof.g[i], prof.gprime[i]);
            if gp.abs() <= GPRIME_FLOOR * g / prof.support_radius {
                excluded.push(i);
                f64::NAN
            } else {
                -beta * g / gp
            }
        })
        .collect();
    Ok(S0Profile {
        beta,
        values,
        excluded,
    })
}

/// Index ranges of the left and right samples inside the window.
pub fn window_ranges(prof: &MaximalProfile, cfg: &VariationalConfig) -> [Range<usize>; 2] {
    let (left, right) = prof.sides();
    let inside = |i: usize| match cfg.window {
        None => true,
        Some((a, d)) => {
            let r = (prof.xs[i] - prof.center).abs();
            r >= a && r <= d
        }
    };
    [left, right].map(|range| {
        let kept: Vec<usize> = range.filter(|&i| inside(i)).collect();
        match (kept.first(), kept.last()) {
            (Some(&lo), Some(&hi)) => lo..hi + 1,
            _ => 0..0,
        }
    })
}

/// Grid derivative computed separately on each side of the peak.
pub fn side_derivative(prof: &MaximalProfile, ys: &[f64]) -> Vec<f64> {
    let (left, right) = prof.sides();
    let mut out = grid_derivative(&prof.xs[left.clone()], &ys[left]);
    out.extend(grid_derivative(&prof.xs[right.clone()], &ys[right]));
    out
}

/// Window value of `I(phi)`.
///
/// Each cell contributes the trapezoid rule for `F` with `phi'` replaced by
/// the secant of `phi` over the cell:
/// `alpha <A^p> (dx + dphi) + (1-alpha) <B^p> (dphi - dx)` with
/// `A = g + g' phi`, `B = g - g' phi` and `<.>` the endpoint mean. For
/// `phi = s` this is the trapezoid rule of `integral f^p du` in the
/// variables `u = x +- s(x)`, so no nodal derivative of `phi` enters.
pub fn functional_i(prof: &MaximalProfile, phi: &[f64], cfg: &VariationalConfig) -> Result<f64> {
    if phi.len() != prof.len() {
        return Err(invalid(format!(
            "phi has {} samples, profile has {}",
            phi.len(),
            prof.len()
        )));
    }
    let (plus, minus) = stieltjes_sums(prof, phi, cfg.p, window_ranges(prof, cfg))?;
    Ok(cfg.alpha * plus + (1.0 - cfg.alpha) * minus)
}

fn stieltjes_sums(
    prof: &MaximalProfile,
    phi: &[f64],
    p: f64,
    ranges: [Range<usize>; 2],
) -> Result<(f64, f64)> {
    let mut plus = 0.0;
    let mut minus = 0.0;
    for range in ranges {
        let mut prev: Option<(usize, f64, f64)> = None;
        for i in range {
            let (a, b) = legs(prof.g[i], prof.gprime[i], phi[i]).map_err(|e| at(prof.xs[i], e))?;
            let (ap, bp) = (a.powf(p), b.powf(p));
            if let Some((j, apj, bpj)) = prev {
                let dx = prof.xs[i] - prof.xs[j];
                let dphi = phi[i] - phi[j];
                plus += 0.5 * (ap + apj) * (dx + dphi);
                minus += 0.5 * (bp + bpj) * (dphi - dx);
            }
            prev = Some((i, ap, bp));
        }
    }
    Ok((plus, minus))
}

/// The two change-of-variable integrals over the whole profile grid,
/// `integral (g + g's)^p (s' + 1)` and `integral (g - g's)^p (s' - 1)`, each of
/// which should reproduce `||f||_p^p`, and the pointwise residual of
/// `f(x +- s) = g +- g's` relative to `max f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChangeOfVariables {
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub plus: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub minus: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub f_norm_p: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub pointwise_residual: f64,
}

pub fn check_change_of_variables(
    f: &PiecewiseLinearFn,
    prof: &MaximalProfile,
    p: f64,
) -> Result<ChangeOfVariables> {
    let f_norm_p = f.lp_norm_p(p)?.value;
    let (left, right) = prof.sides();
    let (plus, minus) = stieltjes_sums(prof, &prof.s, p, [left, right])?;
    let pointwise_residual = (0..prof.len())
        .map(|i| {
            let (x, s, g, gp) = (prof.xs[i], prof.s[i], prof.g[i], prof.gprime[i]);
            let (right, left) = endpoint_values(f, x, prof.delta[i], g);
            let (at_plus, at_minus) = if s >= 0.0 { (right, left) } else { (left, right) };
            (at_plus - (g + gp * s))
                .abs()
                .max((at_minus - (g - gp * s)).abs())
        })
        .fold(0.0, f64::max)
        / f.max_value();
    Ok(ChangeOfVariables {
        plus,
        minus,
        f_norm_p,
        pointwise_residual,
    })
}

/// Euler–Lagrange residuals with their rounding scales.
#[derive(Debug, Clone, PartialEq)]
pub struct ElResiduals {
    pub values: Vec<f64>,
    pub scales: Vec<f64>,
}

impl ElResiduals {
    /// `max |R| / scale`, with `0/0` read as 0.
    pub fn max_relative(&self) -> f64 {
        relative_extreme(&self.values, &self.scales, |v| v.abs(), f64::max, 0.0)
    }
}

fn relative_extreme(
    values: &[f64],
    scales: &[f64],
    key: impl Fn(f64) -> f64,
    pick: impl Fn(f64, f64) -> f64,
    init: f64,
) -> f64 {
    values.iter().zip(scales).fold(init, |acc, (&v, &s)| {
        let rel = if s > 0.0 {
            key(v) / s
        } else if v == 0.0 {
            0.0
        } else {
            key(v) * f64::INFINITY
        };
        pick(acc, rel)
    })
}

/// Reduced Euler–Lagrange residual
/// `R = p g'' phi [alpha A^(p-1) - (1-alpha) B^(p-1)]`, `A, B = g +- g' phi`.
///
/// Expanding `dF/dy - d/dx dF/dz` with `dF/dy = p g' [alpha A^(p-1) (z+1) -
/// (1-alpha) B^(p-1) (z-1)]` and `dF/dz = alpha A^p + (1-alpha) B^p`, every
/// `phi'` and `g'` term cancels and what remains is exactly `-R`. The common
/// factor `p` multiplies both bracket terms; only then does the bracket
/// vanish at `s0`. `g''` is the side-wise grid derivative of `g'`.
pub fn el_residual(prof: &MaximalProfile, phi: &[f64], cfg: &VariationalConfig) -> Result<ElResiduals> {
    if phi.len() != prof.len() {
        return Err(invalid("phi and profile lengths differ"));
    }
    let g2 = side_derivative(prof, &prof.gprime);
    let (p, al) = (cfg.p, cfg.alpha);
    let mut values = Vec::with_capacity(prof.len());
    let mut scales = Vec::with_capacity(prof.len());
    for i in 0..prof.len() {
        let (a, b) = legs(prof.g[i], prof.gprime[i], phi[i]).map_err(|e| at(prof.xs[i], e))?;
        let (ta, tb) = (al * a.powf(p - 1.0), (1.0 - al) * b.powf(p - 1.0));
        let pre = p * g2[i] * phi[i];
        values.push(pre * (ta - tb));
        scales.push(pre.abs() * (ta + tb));
    }
    Ok(ElResiduals { values, scales })
}

/// Pointwise convexity gaps at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseGaps {
    /// `[F(s, s') - F(s0, s0')] - [dF/dy (s - s0) + dF/dz (s' - s0')]`, the
    /// partials taken at `(s0, s0')`.
    pub gaps: Vec<f64>,
    /// `2^p g^p (|s'| + |s0'| + 2)`, a bound on the size of each term.
    pub scales: Vec<f64>,
    /// `|d2F/dydz (s0)| / (p |g'| (alpha A^(p-1) + (1-alpha) B^(p-1)))`.
    pub mixed_relative: Vec<f64>,
    /// The scalar bracket from [`mixed_partial_bracket`].
    pub bracket: f64,
    pub s_prime: Vec<f64>,
    pub s0_prime: Vec<f64>,
}

impl PointwiseGaps {
    pub fn min_relative(&self) -> f64 {
        relative_extreme(&self.gaps, &self.scales, |v| v, f64::min, f64::INFINITY)
    }

    pub fn mixed_max(&self) -> f64 {
        self.mixed_relative.iter().copied().fold(0.0, f64::max)
    }
}

/// Convexity of `F` in `y` for `z >= 1`, linearity in `z` and the constancy
/// of `dF/dy` in `z` at `y = s0` together give `gap >= 0` wherever `s' >= 1`.
pub fn check_pointwise_convexity(
    prof: &MaximalProfile,
    s0: &S0Profile,
    cfg: &VariationalConfig,
) -> Result<PointwiseGaps> {
    let s_prime = side_derivative(prof, &prof.s);
    let s0_prime = side_derivative(prof, &s0.values);
    let p = cfg.p;
    let mut gaps = Vec::with_capacity(prof.len());
    let mut scales = Vec::with_capacity(prof.len());
    let mut mixed_relative = Vec::with_capacity(prof.len());
    for i in 0..prof.len() {
        let (x, g, gp) = (prof.xs[i], prof.g[i], prof.gprime[i]);
        let (s, sp, z0, zp0) = (prof.s[i], s_prime[i], s0.values[i], s0_prime[i]);
        let at0 = f_partials(g, gp, cfg, z0, zp0).map_err(|e| at(x, e))?;
        let fs = f_eval(g, gp, cfg, s, sp).map_err(|e| at(x, e))?;
        gaps.push(fs - at0.value - at0.dy * (s - z0) - at0.dz * (sp - zp0));
        scales.push(2f64.powf(p) * g.powf(p) * (sp.abs() + zp0.abs() + 2.0));
        let (a, b) = legs(g, gp, z0)?;
        let denom = p * gp.abs() * (cfg.alpha * a.powf(p - 1.0) + (1.0 - cfg.alpha) * b.powf(p - 1.0));
        mixed_relative.push(if denom > 0.0 { at0.dydz.abs() / denom } else { 0.0 });
    }
    Ok(PointwiseGaps {
        gaps,
        scales,
        mixed_relative,
        bracket: mixed_partial_bracket(cfg.alpha, p)?,
        s_prime,
        s0_prime,
    })
}

/// Per-node output row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalPoint {
    pub x: f64,
    pub s: f64,
    pub s0: f64,
    pub f_at_s: f64,
    pub f_at_s0: f64,
    pub gap: f64,
    pub el_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalReport {
    pub config: VariationalConfig,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub beta: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub gamma1: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub gamma2: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub r: f64,
    /// Distances from the peak actually spanned by the window nodes.
    #[serde(serialize_with = "crate::numfmt::ser_vec")]
    pub window: Vec<f64>,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub i_s: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub i_s0: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub f_norm_p: f64,
    /// `||g||_p^p` over the window (trapezoid on the nodes).
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub g_norm_p: f64,
    /// `||g||_p^p` over the line, with inner and tail extrapolation.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub g_norm_p_full: f64,
    /// `r(alpha) ||g||_p^p` over the window.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub r_g_norm: f64,
    /// `gamma2 [g^p s0]` at the inner and at the outer window edges, summed
    /// over both sides; `I(s0) = r ||g||_p^p + inner + outer` exactly.
    #[serde(serialize_with = "crate::numfmt::ser_vec")]
    pub boundary_terms: Vec<f64>,
    /// `(I(s) - ||f||_p^p) / ||f||_p^p`.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub i_s_rel_gap: f64,
    /// `(I(s0) - r ||g||_p^p) / (r ||g||_p^p)`, boundary terms not removed.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub i_s0_rel_gap: f64,
    /// As above with the boundary terms removed from `I(s0)`.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub i_s0_rel_gap_bounded: f64,
    /// `I(s) - I(s0)`.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub chain_margin: f64,
    /// `(||g||_p / ||f||_p)` using the full-line norm of `g`.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub norm_ratio: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub el_residual_max: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub pointwise_gap_min: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub mixed_partial_max: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub bracket: f64,
    pub change_of_variables: ChangeOfVariables,
    /// Minimum discrete `s'` over the window, which must be at least 1.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub s_prime_min: f64,
    #[serde(skip)]
    pub points: Vec<VariationalPoint>,
}

impl VariationalReport {
    /// The chain checks, each against its own tolerance.
    pub fn failures(&self) -> Vec<String> {
        let b = self.config.budget;
        let mut out = Vec::new();
        if !(self.i_s_rel_gap.abs() <= b) {
            out.push(format!(
                "I(s) vs ||f||^p: relative gap {:e} exceeds {b:e}",
                self.i_s_rel_gap
            ));
        }
        if !(self.i_s0_rel_gap_bounded.abs() <= b) {
            out.push(format!(
                "I(s0) vs r ||g||^p + boundary terms: relative gap {:e} exceeds {b:e}",
                self.i_s0_rel_gap_bounded
            ));
        }
        if !(self.chain_margin >= -b * self.f_norm_p) {
            out.push(format!(
                "I(s) = {} is below I(s0) = {} by more than the budget",
                self.i_s, self.i_s0
            ));
        }
        if !(self.el_residual_max <= EL_RTOL) {
            out.push(format!(
                "Euler-Lagrange residual at s0 {:e} exceeds {EL_RTOL:e}",
                self.el_residual_max
            ));
        }
        if !(self.pointwise_gap_min >= -GAP_RTOL) {
            out.push(format!(
                "pointwise gap {:e} below {:e}",
                self.pointwise_gap_min, -GAP_RTOL
            ));
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let failures = self.failures();
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::CheckFailed(failures.join("; ")))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub const CSV_HEADER: &'static str = "x,s,s0,F_at_s,F_at_s0,gap,el_residual";

    pub fn points_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for pt in &self.points {
            out.push_str(&csv_row(&[
                pt.x,
                pt.s,
                pt.s0,
                pt.f_at_s,
                pt.f_at_s0,
                pt.gap,
                pt.el_residual,
            ]));
            out.push('\n');
        }
        out
    }
}

/// Computes every quantity of the chain without judging it.
pub fn compute_chain(
    f: &PiecewiseLinearFn,
    prof: &MaximalProfile,
    cfg: &VariationalConfig,
) -> Result<VariationalReport> {
    let shape = f.is_peak_shaped(1e-12);
    if !shape.is_peak_shaped {
        return Err(invalid(format!(
            "the chain needs a peak-shaped function (convexity violation {:e})",
            shape.max_convexity_violation
        )));
    }
    let ranges = window_ranges(prof, cfg);
    if ranges.iter().any(|r| r.len() < 3) {
        return Err(invalid("the window must hold at least three nodes on each side"));
    }
    let (p, alpha) = (cfg.p, cfg.alpha);
    let coeffs = r_of_alpha(alpha, p)?;
    let s0 = s0_of(prof, alpha, p)?;
    if let Some(&i) = s0
        .excluded
        .iter()
        .find(|&&i| ranges.iter().any(|r| r.contains(&i)))
    {
        return Err(Error::CheckFailed(format!(
            "g' vanishes at x = {} inside the window; s0 is undefined there",
            prof.xs[i]
        )));
    }
    let in_window = |i: usize| ranges.iter().any(|r| r.contains(&i));

    let i_s = functional_i(prof, &prof.s, cfg)?;
    let i_s0 = functional_i(prof, &s0.values, cfg)?;
    let f_norm_p = f.lp_norm_p(p)?.value;
    let g_norm_p: f64 = ranges
        .iter()
        .map(|r| {
            (r.start..r.end - 1)
                .map(|i| 0.5 * (prof.g[i].powf(p) + prof.g[i + 1].powf(p)) * (prof.xs[i + 1] - prof.xs[i]))
                .sum::<f64>()
        })
        .sum();
    let g_norm_p_full = prof.g_norm_p(p)?.total();
    let r_g_norm = coeffs.r * g_norm_p;

    let edge = |i: usize| coeffs.gamma2 * prof.g[i].powf(p) * s0.values[i];
    let [left, right] = ranges.clone();
    let inner = edge(left.end - 1) - edge(right.start);
    let outer = edge(right.end - 1) - edge(left.start);

    let el = el_residual(prof, &s0.values, cfg)?;
    let gaps = check_pointwise_convexity(prof, &s0, cfg)?;
    let idx: Vec<usize> = (0..prof.len()).filter(|&i| in_window(i)).collect();
    let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let el_w = ElResiduals {
        values: pick(&el.values),
        scales: pick(&el.scales),
    };
    let gap_min = relative_extreme(
        &pick(&gaps.gaps),
        &pick(&gaps.scales),
        |v| v,
        f64::min,
        f64::INFINITY,
    );
    let mixed_max = pick(&gaps.mixed_relative).into_iter().fold(0.0, f64::max);
    let s_prime_min = pick(&gaps.s_prime).into_iter().fold(f64::INFINITY, f64::min);

    let points = idx
        .iter()
        .map(|&i| {
            let (g, gp) = (prof.g[i], prof.gprime[i]);
            Ok(VariationalPoint {
                x: prof.xs[i],
                s: prof.s[i],
                s0: s0.values[i],
                f_at_s: f_eval(g, gp, cfg, prof.s[i], gaps.s_prime[i]).map_err(|e| at(prof.xs[i], e))?,
                f_at_s0: f_eval(g, gp, cfg, s0.values[i], gaps.s0_prime[i]).map_err(|e| at(prof.xs[i], e))?,
                gap: gaps.gaps[i],
                el_residual: el.values[i],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let dist = |i: usize| (prof.xs[i] - prof.center).abs();
    let window = vec![
        dist(left.end - 1).min(dist(right.start)),
        dist(left.start).max(dist(right.end - 1)),
    ];
    Ok(VariationalReport {
        config: *cfg,
        beta: coeffs.beta,
        gamma1: coeffs.gamma1,
        gamma2: coeffs.gamma2,
        r: coeffs.r,
        window,
        i_s,
        i_s0,
        f_norm_p,
        g_norm_p,
        g_norm_p_full,
        r_g_norm,
        boundary_terms: vec![inner, outer],
        i_s_rel_gap: (i_s - f_norm_p) / f_norm_p,
        i_s0_rel_gap: (i_s0 - r_g_norm) / r_g_norm,
        i_s0_rel_gap_bounded: (i_s0 - inner - outer - r_g_norm) / r_g_norm,
        chain_margin: i_s - i_s0,
        norm_ratio: (g_norm_p_full / f_norm_p).powf(1.0 / p),
        el_residual_max: el_w.max_relative(),
        pointwise_gap_min: gap_min,
        mixed_partial_max: mixed_max,
        bracket: gaps.bracket,
        change_of_variables: check_change_of_variables(f, prof, p)?,
        s_prime_min,
        points,
    })
}

/// [`compute_chain`] followed by [`VariationalReport::check`].
pub fn certify_chain(
    f: &PiecewiseLinearFn,
    prof: &MaximalProfile,
    cfg: &VariationalConfig,
) -> Result<VariationalReport> {
    let report = compute_chain(f, prof, cfg)?;
    report.check()?;
    Ok(report)
}
