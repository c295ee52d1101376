//! Developable surface patches spanned between two rational B-spline curves.
//!
//! The second boundary curve is reparametrised by a function `T(t)` chosen so
//! that the ruled surface `(1 - v) c(t) + v d(T(t))` has zero Gaussian
//! curvature. At each `t` the admissible values of `T` are the real roots of a
//! univariate polynomial, so the whole construction reduces to root isolation
//! followed by branch continuation.
//!
//! * [`curves`] evaluates the boundary curves and classifies the pair.
//! * [`condition`] assembles the developability polynomial and the
//!   monotonicity test.
//! * [`roots`] isolates roots and traces reparametrisation branches.
//! * [`patch`] builds, verifies, tessellates and unrolls the surface.
//! * [`cli`] drives the pipeline from curve files.

// tolerance checks are written `!(x <= tol)` so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod condition;
pub mod curves;
pub mod interp;
pub mod patch;
mod poly;
pub mod roots;

pub use condition::{
    condition_polynomial, curvature_signature, degree_bound, reparam_derivative, triple_product,
    ConditionPolynomial, CurvatureSignature,
};
pub use curves::{classify_pair, BezierSpan, ControlPoint, CurvePairClassification, NurbsCurve, Point3};
pub use patch::{DevelopablePatch, FundamentalForms, PlanarDevelopment};
pub use roots::{isolate_roots, trace_branches, ReparamBranch, RootSet};
