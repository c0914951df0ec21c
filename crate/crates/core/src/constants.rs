//! The sharp constant `c_p` and the scalars of the variational argument.
//!
//! `c_p` is the maximum over `t > 1` of
//!
//! ```text
//! h(t) = ((t+1)^a + (t-1)^a) / (2 a t),   a = (p-1)/p,
//! ```
//!
//! which is the eigenvalue of the maximal operator on `|x|^(-1/p)`. The
//! maximiser `tau` is the unique root in `(1, p)` of
//! `((p+tau)/(p-tau))^p = (tau+1)/(tau-1)`. Both characterisations are
//! computed and required to agree.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numfmt::csv_row;
use crate::solve::{brent_root, expand_until_decreasing, golden_max};

/// Default tolerance for scalar constants.
pub const DEFAULT_TOL: f64 = 1e-12;

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("exponent p = {p} must lie in (1, inf)")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.5 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha = {alpha} must lie in (1/2, 1)")))
    }
}

fn h_raw(p: f64, t: f64) -> f64 {
    let a = (p - 1.0) / p;
    ((t + 1.0).powf(a) + (t - 1.0).powf(a)) / (2.0 * a * t)
}

/// `h(t)` for `t > 1`.
pub fn h_value(p: f64, t: f64) -> Result<f64> {
    check_p(p)?;
    if !(t > 1.0) || !t.is_finite() {
        return Err(invalid(format!("h is defined for t > 1, got {t}")));
    }
    Ok(h_raw(p, t))
}

/// Log form of the critical-radius equation,
/// `G(tau) = p ln((p+tau)/(p-tau)) - ln((tau+1)/(tau-1))`.
/// Increasing on `(1, p)` from `-inf` to `+inf`.
pub fn tau_equation_residual(p: f64, tau: f64) -> f64 {
    p * ((p + tau) / (p - tau)).ln() - ((tau + 1.0) / (tau - 1.0)).ln()
}

/// The unique root of [`tau_equation_residual`] in `(1, p)`, solved until
/// `|G| <= tol` or the bracket reaches machine resolution.
pub fn tau_of_p(p: f64, tol: f64) -> Result<f64> {
    check_p(p)?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let mut eps = (p - 1.0) * 1e-9;
    let (lo, hi) = loop {
        let (lo, hi) = (1.0 + eps, p - eps);
        if tau_equation_residual(p, lo) < 0.0 && tau_equation_residual(p, hi) > 0.0 {
            break (lo, hi);
        }
        eps *= 1e-3;
        if eps < f64::EPSILON * p {
            return Err(Error::NoBracket {
                lo,
                hi,
                flo: tau_equation_residual(p, lo),
                fhi: tau_equation_residual(p, hi),
            });
        }
    };
    brent_root(|t| tau_equation_residual(p, t), lo, hi, 0.0, tol, 500)
}

/// `c_p` by direct golden-section maximisation of `h`, with the upper end
/// of the bracket pushed out until `h` has turned down.
pub fn c_p_by_maximization(p: f64) -> Result<f64> {
    check_p(p)?;
    // h'(1+) is infinite, so the maximiser is interior to (1, hi).
    let hi = expand_until_decreasing(|t| h_raw(p, t), 1.0, 2.0, 200)?;
    let (_, best) = golden_max(|t| h_raw(p, t), 1.0, hi, 1e-13);
    Ok(best)
}

/// `c_p = h(tau_p)`, cross-checked against [`c_p_by_maximization`]; the two
/// must agree to `10 * tol`.
pub fn c_p(p: f64, tol: f64) -> Result<f64> {
    let tau = tau_of_p(p, tol)?;
    let by_root = h_raw(p, tau);
    let by_max = c_p_by_maximization(p)?;
    if (by_root - by_max).abs() > 10.0 * tol {
        return Err(Error::Inconsistent {
            what: "c_p (root of the tau equation vs maximisation of h)",
            a: by_root,
            b: by_max,
            tol: 10.0 * tol,
        });
    }
    Ok(by_root)
}

/// `beta(alpha) = (A - B)/(A + B)` with `A = alpha^(1/(p-1))`,
/// `B = (1-alpha)^(1/(p-1))`, computed through the ratio `B/A`.
pub fn beta_of_alpha(alpha: f64, p: f64) -> Result<f64> {
    let (rho, one_minus_rho) = rho_of_alpha(alpha, p)?;
    Ok(one_minus_rho / (1.0 + rho))
}

/// `rho = B/A = ((1-alpha)/alpha)^(1/(p-1))` and `1 - rho`, the latter
/// without cancellation near `alpha = 1/2`.
fn rho_of_alpha(alpha: f64, p: f64) -> Result<(f64, f64)> {
    check_p(p)?;
    check_alpha(alpha)?;
    let log_rho = (-(2.0 * alpha - 1.0) / alpha).ln_1p() / (p - 1.0);
    Ok((log_rho.exp(), -log_rho.exp_m1()))
}

/// `alpha0 = (p+tau)^(p-1) / ((p+tau)^(p-1) + (p-tau)^(p-1))`.
pub fn alpha0_of_p(p: f64) -> Result<f64> {
    let tau = tau_of_p(p, DEFAULT_TOL)?;
    Ok(1.0 / (1.0 + ((p - tau) / (p + tau)).powf(p - 1.0)))
}

/// `r(alpha)` and the pieces it is assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RValue {
    /// `gamma1 + p beta gamma2`.
    pub r: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta: f64,
    /// The closed form `2^p (p-1) alpha (1-alpha) (A - B) / (A + B)^p`.
    pub closed_form: f64,
}

/// Agreement demanded between the two expressions for `r`, relative to
/// the size of the summands.
pub const R_AGREEMENT_RTOL: f64 = 1e-12;

/// `r(alpha)` two ways: from `gamma1, gamma2` and in closed form. A
/// disagreement beyond [`R_AGREEMENT_RTOL`] is an error.
pub fn r_of_alpha(alpha: f64, p: f64) -> Result<RValue> {
    // 1 -+ beta through rho = B/A, so that neither side cancels.
    let (rho, one_minus_rho) = rho_of_alpha(alpha, p)?;
    let beta = one_minus_rho / (1.0 + rho);
    let lo = alpha * (2.0 * rho / (1.0 + rho)).powf(p);
    let hi = (1.0 - alpha) * (2.0 / (1.0 + rho)).powf(p);
    let gamma1 = lo - hi;
    let gamma2 = lo + hi;
    let r = gamma1 + p * beta * gamma2;

    // With A - B = A (1 - rho), A + B = A (1 + rho) and A^(p-1) = alpha.
    let closed_form = 2f64.powf(p) * (p - 1.0) * (1.0 - alpha) * one_minus_rho / (1.0 + rho).powf(p);

    // The composition subtracts two terms of size gamma2, so agreement is
    // judged against gamma2 rather than against r itself.
    let scale = gamma2 + p * beta * gamma2 + closed_form.abs();
    if (r - closed_form).abs() > R_AGREEMENT_RTOL * scale {
        return Err(Error::Inconsistent {
            what: "r(alpha) (gamma composition vs closed form)",
            a: r,
            b: closed_form,
            tol: R_AGREEMENT_RTOL * scale,
        });
    }
    Ok(RValue {
        r,
        gamma1,
        gamma2,
        beta,
        closed_form,
    })
}

/// Per-exponent record of the constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsRecord {
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub p: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub tau: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub c_p: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub alpha0: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub beta0: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub r_at_alpha0: f64,
    /// `|r(alpha0) - c_p^(-p)|`.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub cross_check_gap: f64,
}

impl ConstantsRecord {
    pub const CSV_HEADER: &'static str = "p,tau,c_p,alpha0,beta0,r_alpha0,gap";

    pub fn csv_row(&self) -> String {
        csv_row(&[
            self.p,
            self.tau,
            self.c_p,
            self.alpha0,
            self.beta0,
            self.r_at_alpha0,
            self.cross_check_gap,
        ])
    }
}

/// `r` tabulated on an open grid in `(1/2, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSweep {
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub p: f64,
    #[serde(serialize_with = "crate::numfmt::ser_vec")]
    pub alphas: Vec<f64>,
    #[serde(serialize_with = "crate::numfmt::ser_vec")]
    pub r_values: Vec<f64>,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub argmax_alpha: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub max_r: f64,
}

impl AlphaSweep {
    pub fn step(&self) -> f64 {
        0.5 / (self.alphas.len() + 1) as f64
    }
}

pub fn alpha_sweep(p: f64, grid_size: usize) -> Result<AlphaSweep> {
    if grid_size == 0 {
        return Err(invalid("alpha grid must have at least one point"));
    }
    let step = 0.5 / (grid_size + 1) as f64;
    let alphas: Vec<f64> = (1..=grid_size).map(|i| 0.5 + step * i as f64).collect();
    let r_values = alphas
        .iter()
        .map(|&a| r_of_alpha(a, p).map(|r| r.r))
        .collect::<Result<Vec<_>>>()?;
    let (best, &max_r) = r_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    Ok(AlphaSweep {
        p,
        argmax_alpha: alphas[best],
        max_r,
        alphas,
        r_values,
    })
}

/// Builds the record for `p` and certifies `r(alpha0) = c_p^(-p)` to
/// `tol`, together with `r(alpha) <= r(alpha0) + tol` and
/// `|argmax - alpha0| <= step` on an `alpha_grid_size`-point sweep.
pub fn certify_lemma6(p: f64, tol: f64, alpha_grid_size: usize) -> Result<(ConstantsRecord, AlphaSweep)> {
    let tau = tau_of_p(p, tol)?;
    let c = c_p(p, tol)?;
    let alpha0 = 1.0 / (1.0 + ((p - tau) / (p + tau)).powf(p - 1.0));
    let at0 = r_of_alpha(alpha0, p)?;
    let record = ConstantsRecord {
        p,
        tau,
        c_p: c,
        alpha0,
        beta0: at0.beta,
        r_at_alpha0: at0.r,
        cross_check_gap: (at0.r - c.powf(-p)).abs(),
    };
    if record.cross_check_gap > tol {
        return Err(Error::CheckFailed(format!(
            "p = {p}: |r(alpha0) - c_p^-p| = {:e} exceeds {tol:e}",
            record.cross_check_gap
        )));
    }
    let sweep = alpha_sweep(p, alpha_grid_size)?;
    if let Some((a, r)) = sweep
        .alphas
        .iter()
        .zip(&sweep.r_values)
        .find(|(_, &r)| r > at0.r + tol)
    {
        return Err(Error::CheckFailed(format!(
            "p = {p}: r({a}) = {r} exceeds r(alpha0) = {} by more than {tol:e}",
            at0.r
        )));
    }
    if (sweep.argmax_alpha - alpha0).abs() > sweep.step() {
        return Err(Error::CheckFailed(format!(
            "p = {p}: grid argmax {} is more than one step from alpha0 = {alpha0}",
            sweep.argmax_alpha
        )));
    }
    Ok((record, sweep))
}
