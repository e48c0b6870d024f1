//! Verification engine for gradient Ricci soliton geometry.
//!
//! Metrics and potentials are given in closed form (see [`expr`]) or as a
//! numerically integrated profile (see [`zoo::bryant`]); every curvature
//! quantity is computed on truncated Taylor jets so that covariant
//! derivatives are exact up to rounding.

pub mod jet;
pub mod expr;
pub mod tensor;
pub mod report;
pub mod metricfile;
pub mod fuzz;
pub mod oracle;
pub mod curvature;
pub mod soliton;
pub mod sampling;
pub mod zoo;
pub mod quad;
