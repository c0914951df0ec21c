//! Centered Hardy–Littlewood maximal operator on the line, specialised to
//! compactly supported piecewise-linear "peak-shaped" functions.
//!
//! The crate is organised bottom-up:
//!
//! * [`funcrep`]: piecewise-linear functions, exact integrals and `L^p`
//!   norms, the peak-shape test, and deterministic generators.
//! * [`maxop`]: exact evaluation of `Mf(x)` and the optimal radius, maximal
//!   profiles, structural checks and the weak-type distribution ratio.
//! * [`constants`]: the sharp constant `c_p`, the critical radius `tau`,
//!   the optimal weight `alpha0` and the coefficient `r(alpha)`.
//! * [`variational`]: the integrand `F`, the functional `I`, the extremal
//!   `s0`, Euler–Lagrange residuals and the lower-bound chain.
//!
//! [`solve`] holds the scalar root finder and golden-section search used by
//! the others, and [`numfmt`] the 17-significant-digit output format.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod funcrep;
pub mod maxop;
pub mod numfmt;
pub mod solve;
pub mod variational;

pub use constants::{AlphaSweep, ConstantsRecord};
pub use error::{Error, Result};
pub use funcrep::{GeneratorConfig, NormValue, PeakShapeReport, PiecewiseLinearFn, Side};
pub use maxop::{GridSpec, MaximalPoint, MaximalProfile, StructuralCheckReport, WindowAverage};
pub use variational::{VariationalConfig, VariationalReport};
