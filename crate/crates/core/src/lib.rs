//! Numerics for polynomial lemniscates `{z : |p(z)| = 1}`.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arclength;
pub mod battery;
pub mod calibration;
pub mod conformal;
pub mod error;
pub mod export;
pub mod inequality;
pub mod json;
pub mod measure;
pub mod poly;
pub mod quad;
pub mod region;
pub mod roots;
pub mod search;
pub mod suites;
pub mod trace;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use poly::{family, CoeffPoly, CriticalSpec, Family, NormBundle, Normalized};
pub use quad::{Estimate, QuadratureBudget};
pub use roots::{CircleSection, RootSet};
