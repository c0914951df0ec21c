use serde::Serialize;

use super::{maximal_profile, GridSpec};
use crate::error::{invalid, Result};
use crate::funcrep::{truncated_power, PiecewiseLinearFn};

/// Settings for the truncated-power family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessConfig {
    pub p: f64,
    pub caps: Vec<f64>,
    /// Interpolation nodes per side of each family member.
    pub n_points: usize,
    /// Profile samples per decade of distance from the peak.
    pub per_decade: f64,
    /// Outer end of the profile grid, in support radii.
    pub outer: f64,
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        SharpnessConfig {
            p: 2.0,
            caps: vec![1e1, 1e2, 1e3, 1e4],
            n_points: 256,
            per_decade: 20.0,
            outer: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpnessRow {
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub cap: f64,
    /// `||Mf||_p / ||f||_p`.
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub ratio: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub f_norm_p: f64,
    #[serde(serialize_with = "crate::numfmt::ser_f64")]
    pub g_norm_p: f64,
    pub grid_points: usize,
}

/// Profile grid for a member of the family. The member is flat at height
/// `cap` for `|x| < cap^-p` and reaches out to `cap^(p^2)`, so the grid
/// starts a hundredfold inside the flat part and runs to `outer` support
/// radii at a fixed density per decade.
pub fn sharpness_grid(f: &PiecewiseLinearFn, cfg: &SharpnessConfig, cap: f64) -> Result<GridSpec> {
    if !(cfg.per_decade >= 1.0) || !(cfg.outer > 1.0) {
        return Err(invalid("sharpness grid needs per_decade >= 1 and outer > 1"));
    }
    let inner = 1e-2 * cap.powf(-cfg.p) / f.support_radius();
    let decades = (cfg.outer / inner).log10();
    let n = (decades * cfg.per_decade).ceil() as usize;
    Ok(GridSpec::Geometric {
        n: n.max(16),
        inner,
        outer: cfg.outer,
    })
}

/// Norm ratios along the family, in the order of `cfg.caps`.
pub fn sharpness_family(cfg: &SharpnessConfig) -> Result<Vec<SharpnessRow>> {
    if cfg.caps.is_empty() {
        return Err(invalid("no caps given"));
    }
    cfg.caps
        .iter()
        .map(|&cap| {
            let f = truncated_power(cfg.p, cap, cfg.n_points)?;
            let grid = sharpness_grid(&f, cfg, cap)?;
            let prof = maximal_profile(&f, &grid)?;
            let f_norm_p = f.lp_norm_p(cfg.p)?.value;
            let g_norm_p = prof.g_norm_p(cfg.p)?.total();
            Ok(SharpnessRow {
                cap,
                ratio: (g_norm_p / f_norm_p).powf(1.0 / cfg.p),
                f_norm_p,
                g_norm_p,
                grid_points: prof.len(),
            })
        })
        .collect()
}
