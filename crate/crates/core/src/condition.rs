//! The developability condition in `T` at fixed `t`.
//!
//! A ruled surface `(1 - v) c(t) + v d(T(t))` is developable exactly when
//! `det(c'(t), d'(T), d(T) - c(t))` vanishes along the reparametrisation.
//! For a fixed `t` the `c` terms are constant vectors and the determinant is
//! a rational function of `T`; clearing the weight denominator leaves a
//! polynomial of degree at most `2n - 2` (or `n - 1` for polynomial curves in
//! parallel planes).

use thiserror::Error;

use crate::curves::{BezierSpan, CurvePairClassification, NurbsCurve, Point3};
use crate::poly;

/// Coefficients whose normalised magnitude falls below this are dropped, and
/// a polynomial with nothing left is flagged degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;
/// Relative magnitude above which a coefficient counts toward the observed degree.
pub const DEGREE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionError {
    #[error("T' denominator vanishes at t = {t}, T = {tau} (|det| = {denominator:e})")]
    SingularDerivative { t: f64, tau: f64, denominator: f64 },
}

fn det3(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    a.dot(&b.cross(c))
}

/// `det(c'(t), d'(T), d(T) - c(t))`, with derivatives of `d` taken in `T`.
pub fn triple_product(c: &NurbsCurve, d: &NurbsCurve, t: f64, tau: f64) -> f64 {
    let cj = c.jet_unchecked(t.clamp(0.0, 1.0));
    let dj = d.jet_unchecked(tau.clamp(0.0, 1.0));
    det3(&cj.d1, &dj.d1, &(dj.point - cj.point))
}

/// Triple product divided by `1 + |c'| |d'| |d - c|`.
pub fn normalised_residual(c: &NurbsCurve, d: &NurbsCurve, t: f64, tau: f64) -> f64 {
    let cj = c.jet_unchecked(t.clamp(0.0, 1.0));
    let dj = d.jet_unchecked(tau.clamp(0.0, 1.0));
    let r = dj.point - cj.point;
    det3(&cj.d1, &dj.d1, &r).abs() / (1.0 + cj.d1.norm() * dj.d1.norm() * r.norm())
}

/// Unit normal of the ruled surface along the ruling from `c(t)` to `d(T)`,
/// taken at the `c` end. `None` when the ruling is tangent to `c`.
pub fn ruling_normal_at(c: &NurbsCurve, d: &NurbsCurve, t: f64, tau: f64) -> Option<Point3> {
    let cj = c.jet_unchecked(t.clamp(0.0, 1.0));
    let r = d.jet_unchecked(tau.clamp(0.0, 1.0)).point - cj.point;
    let n = cj.d1.cross(&r);
    let norm = n.norm();
    (norm > 1e-12 * cj.d1.norm() * r.norm() && norm > 0.0).then(|| n / norm)
}

/// The developability condition at one `t`, restricted to one Bézier span of
/// `d`. Coefficients are in the power basis of the span's local parameter
/// `s`, with `T = start + s (end - start)`; for a single-span `d` the two
/// coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionPolynomial {
    coefficients: Vec<f64>,
    t_value: f64,
    scale: f64,
    span: (f64, f64),
    degenerate: bool,
}

impl ConditionPolynomial {
    pub(crate) fn from_raw(raw: Vec<f64>, reference: f64, t_value: f64, span: (f64, f64)) -> Self {
        let reference = if reference > 0.0 { reference } else { 1.0 };
        let mut coefficients = raw;
        while coefficients
            .last()
            .is_some_and(|a| a.abs() <= DEGENERATE_TOL * reference)
        {
            coefficients.pop();
        }
        let max = coefficients.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        if coefficients.is_empty() || max <= DEGENERATE_TOL * reference {
            return Self {
                coefficients: Vec::new(),
                t_value,
                scale: reference,
                span,
                degenerate: true,
            };
        }
        coefficients.iter_mut().for_each(|a| *a /= max);
        Self {
            coefficients,
            t_value,
            scale: max,
            span,
            degenerate: false,
        }
    }

    /// Normalised coefficients, `max |a_k| = 1` unless degenerate (then empty).
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn t_value(&self) -> f64 {
        self.t_value
    }

    /// Magnitude the raw coefficients were divided by.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `(start, end)` of the span of `d` in the global parameter.
    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    /// Every `T` satisfies the condition (coplanar boundary data).
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Highest power whose coefficient exceeds [`DEGREE_TOL`] after
    /// normalisation; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.iter().rposition(|a| a.abs() > DEGREE_TOL)
    }

    pub fn eval_local(&self, s: f64) -> f64 {
        poly::eval(&self.coefficients, s)
    }

    pub fn to_global(&self, s: f64) -> f64 {
        self.span.0 + s * (self.span.1 - self.span.0)
    }

    pub fn to_local(&self, tau: f64) -> f64 {
        (tau - self.span.0) / (self.span.1 - self.span.0)
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.eval_local(self.to_local(tau))
    }
}

/// Assembles the condition polynomial for a Bézier span of `d`.
///
/// With `d = D / w` in homogeneous form, multiplying the triple product by
/// `w^3` and dividing by the common factor `w` gives
///
/// ```text
/// p = c'·(D' × D) - w D'·(c × c') + w' D·(c × c')
/// ```
///
/// which equals `w² (end - start)` times the triple product, a positive
/// multiple. The leading `s^(2n-1)` terms cancel identically.
pub fn condition_polynomial(c: &NurbsCurve, d: &BezierSpan, t: f64) -> ConditionPolynomial {
    let cj = c.jet_unchecked(t.clamp(0.0, 1.0));
    let cp = cj.d1;
    let m = cj.point.cross(&cp);

    let h = d.power_coefficients();
    let comp = |i: usize| -> Vec<f64> { h.iter().map(|v| v[i]).collect() };
    let dx = [comp(0), comp(1), comp(2)];
    let w = comp(3);
    let dpx = [
        poly::derivative(&dx[0]),
        poly::derivative(&dx[1]),
        poly::derivative(&dx[2]),
    ];
    let wp = poly::derivative(&w);

    let mut p = Vec::new();
    // c'·(D' × D)
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let cross_i = {
            let mut q = poly::mul(&dpx[j], &dx[k]);
            poly::add_scaled(&mut q, &poly::mul(&dpx[k], &dx[j]), -1.0);
            q
        };
        poly::add_scaled(&mut p, &cross_i, cp[i]);
    }
    let mut dp_dot_m = Vec::new();
    let mut d_dot_m = Vec::new();
    for i in 0..3 {
        poly::add_scaled(&mut dp_dot_m, &dpx[i], m[i]);
        poly::add_scaled(&mut d_dot_m, &dx[i], m[i]);
    }
    poly::add_scaled(&mut p, &poly::mul(&w, &dp_dot_m), -1.0);
    poly::add_scaled(&mut p, &poly::mul(&wp, &d_dot_m), 1.0);

    let sum_norm = |vs: &[Point3]| vs.iter().map(|v| v.norm()).sum::<f64>();
    let d_terms: Vec<Point3> = h.iter().map(|v| v.xyz()).collect();
    let dp_terms: Vec<Point3> = (0..dpx[0].len())
        .map(|k| Point3::new(dpx[0][k], dpx[1][k], dpx[2][k]))
        .collect();
    let w_norm: f64 = w.iter().map(|a| a.abs()).sum();
    let wp_norm: f64 = wp.iter().map(|a| a.abs()).sum();
    let reference = cp.norm()
        * (sum_norm(&dp_terms) + wp_norm * cj.point.norm())
        * (sum_norm(&d_terms) + w_norm * cj.point.norm());

    ConditionPolynomial::from_raw(p, reference, t, (d.start, d.end))
}

/// Condition polynomials for every Bézier span of `d`.
pub fn condition_polynomials(
    c: &NurbsCurve,
    d_spans: &[BezierSpan],
    t: f64,
) -> Vec<ConditionPolynomial> {
    d_spans
        .iter()
        .map(|span| condition_polynomial(c, span, t))
        .collect()
}

/// Slope of the reparametrisation at a solution point:
/// `det(c'', d', d - c) / det(d'', c', d - c)`.
pub fn reparam_derivative(
    c: &NurbsCurve,
    d: &NurbsCurve,
    t: f64,
    tau: f64,
) -> Result<f64, ConditionError> {
    let cj = c.jet_unchecked(t.clamp(0.0, 1.0));
    let dj = d.jet_unchecked(tau.clamp(0.0, 1.0));
    let r = dj.point - cj.point;
    let num = det3(&cj.d2, &dj.d1, &r);
    let den = det3(&dj.d2, &cj.d1, &r);
    let den_scale = (cj.d1.norm() + dj.d1.norm() + cj.d2.norm() + dj.d2.norm())
        * cj.d1.norm().max(dj.d1.norm())
        * r.norm();
    let slope = num / den;
    if den.abs() <= 1e-10 * den_scale || !slope.is_finite() || slope.abs() > 1e8 {
        return Err(ConditionError::SingularDerivative {
            t,
            tau,
            denominator: den.abs(),
        });
    }
    Ok(slope)
}

/// Signs of the normal curvatures of both boundary curves at the ends of a ruling.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CurvatureSignature {
    pub t_value: f64,
    pub tau: f64,
    pub sign_c: i8,
    pub sign_d: i8,
    pub compatible: bool,
}

impl CurvatureSignature {
    pub fn has_zero(&self) -> bool {
        self.sign_c == 0 || self.sign_d == 0
    }
}

pub fn curvature_signature(
    c: &NurbsCurve,
    d: &NurbsCurve,
    t: f64,
    tau: f64,
    normal: &Point3,
) -> CurvatureSignature {
    let c2 = c.jet_unchecked(t.clamp(0.0, 1.0)).d2;
    let d2 = d.jet_unchecked(tau.clamp(0.0, 1.0)).d2;
    let tol = 1e-9 * (1.0 + c2.norm() + d2.norm());
    let sign = |x: f64| -> i8 {
        if x.abs() < tol {
            0
        } else if x > 0.0 {
            1
        } else {
            -1
        }
    };
    let sign_c = sign(c2.dot(normal));
    let sign_d = sign(d2.dot(normal));
    CurvatureSignature {
        t_value: t,
        tau,
        sign_c,
        sign_d,
        compatible: sign_c == sign_d && sign_c != 0,
    }
}

/// Maximum degree of the condition polynomial for a classified pair.
pub fn degree_bound(classification: &CurvePairClassification) -> usize {
    let n = classification.effective_degree;
    if classification.both_polynomial && classification.planar_parallel {
        n.saturating_sub(1)
    } else {
        (2 * n).saturating_sub(2)
    }
}
