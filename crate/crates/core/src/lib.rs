//! Newton's method with convergence radii and error bounds derived from a scalar majorant.
//!
//! A scalar majorant `f` controls how fast `F'` may vary around a root `x*`.
//! From `f` alone this crate computes the convergence radius `r`, the
//! uniqueness radius `σ`, the scalar sequence `t_k` that bounds the Newton
//! errors, and then checks those bounds against actual Newton runs.
//!
//! ```
//! use majorant_newton::{holder_model, compute_radii, HolderParams, RootFindOptions};
//!
//! let model = holder_model(HolderParams::new(1.0, 1.0).unwrap());
//! let radii = compute_radii(&model, 10.0, &RootFindOptions::default()).unwrap();
//! assert!((radii.r - 2.0 / 3.0).abs() < 1e-10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod density;
pub mod error;
pub mod families;
pub mod linalg;
pub mod newton;
pub mod registry;
pub mod scalar;

pub use certify::{certify, CertificationReport, CertifyOptions, CheckResult, Violation};
pub use density::{LipschitzDensity, PolySegment};
pub use error::{Error, Result};
pub use families::{
    check_condition_h, example_model, generalized_model, generalized_model_with_condition_h, holder_model,
    holder_radii, lipschitz_radius, HolderParams,
};
pub use linalg::{banach_inverse_bound, operator_norm, PivotedLu};
pub use newton::{newton_solve, worst_case_instance, Jacobian, NewtonOptions, NewtonTrace, Problem, SolveStatus};
pub use registry::{MajorantSpec, ResolvedMajorant};
pub use scalar::{
    a_priori_bound, compute_nu, compute_radii, compute_rho, compute_sigma, scalar_sequence, MajorantModel, RadiiReport,
    RootFindOptions, ScalarTrace, SequenceOptions,
};
