//! Real roots of the condition polynomial and continuation of those roots
//! into reparametrisation branches `T(t)`.
//!
//! Roots on `[0, 1]` are isolated by Bernstein subdivision: the number of
//! sign changes of the Bernstein coefficients over an interval bounds the
//! number of roots inside it (Descartes' rule), with 0 and 1 exact. Isolated
//! brackets are refined by bisection and polished with Newton steps.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::condition::{
    self, condition_polynomials, curvature_signature, normalised_residual, reparam_derivative,
    ConditionPolynomial, CurvatureSignature,
};
use crate::curves::{BezierSpan, NurbsCurve};
use crate::interp::{HermiteCubic, InterpError};
use crate::poly;

/// Values of the normalised polynomial at most this large count as zeros at
/// the interval ends.
const END_TOL: f64 = 1e-13;
/// Clusters narrower than this are reported as a single (multiple) root.
const CLUSTER_WIDTH: f64 = 1e-12;
const MERGE_TOL: f64 = 1e-10;
const MULTIPLE_TOL: f64 = 1e-8;
/// Narrowest sample interval the interpolant refinement will still split.
const MIN_INTERVAL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("condition polynomial at t = {t} vanishes identically")]
    Degenerate { t: f64 },
    #[error("need at least 2 parameter samples, got {0}")]
    TooFewSamples(usize),
    #[error("parameter samples must be strictly increasing within [0, 1]")]
    BadSamples,
}

/// Real roots of a condition polynomial in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    pub t_value: f64,
    pub roots: Vec<f64>,
    /// Per root: derivative of the normalised polynomial below tolerance.
    pub multiple: Vec<bool>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Roots of `p` in the global parameter range of its span.
pub fn isolate_roots(p: &ConditionPolynomial) -> Result<RootSet, RootError> {
    if p.is_degenerate() {
        return Err(RootError::Degenerate { t: p.t_value() });
    }
    let found = unit_interval_roots(p.coefficients());
    Ok(RootSet {
        t_value: p.t_value(),
        roots: found.iter().map(|&(s, _)| p.to_global(s)).collect(),
        multiple: found.iter().map(|&(_, m)| m).collect(),
    })
}

/// Roots in `[0, 1]` of a power-basis polynomial, with multiplicity flags.
pub fn unit_interval_roots(coeffs: &[f64]) -> Vec<(f64, bool)> {
    let mut p = normalised(coeffs);
    if p.len() <= 1 {
        return Vec::new();
    }
    let original = p.clone();
    let mut found: Vec<(f64, bool)> = Vec::new();

    let mut at_zero = 0;
    while p.len() > 1 && p[0].abs() <= END_TOL {
        p.remove(0);
        p = normalised(&p);
        at_zero += 1;
    }
    let mut at_one = 0;
    while p.len() > 1 && poly::eval(&p, 1.0).abs() <= END_TOL {
        p = normalised(&deflate_at_one(&p));
        at_one += 1;
    }
    if at_zero > 0 {
        found.push((0.0, at_zero > 1));
    }
    if at_one > 0 {
        found.push((1.0, at_one > 1));
    }

    if p.len() > 1 {
        let bern = poly::to_bernstein(&p);
        let mut brackets = Vec::new();
        let mut clusters = Vec::new();
        subdivide(&p, &bern, 0.0, 1.0, 0, &mut brackets, &mut clusters);
        let dp = poly::derivative(&p);
        for (lo, hi) in brackets {
            let r = refine(&p, &dp, lo, hi);
            found.push((r, poly::eval(&dp, r).abs() < MULTIPLE_TOL));
        }
        for mid in clusters {
            if poly::eval(&p, mid).abs() <= 1e-10 {
                found.push((mid, true));
            }
        }
        // even-multiplicity roots may show no sign change at all; catch them
        // as critical points where p itself vanishes
        if p.len() > 2 {
            for (x, _) in unit_interval_roots(&dp) {
                let isolated = found.iter().all(|r| (r.0 - x).abs() > 1e-6);
                if isolated && poly::eval(&p, x).abs() <= END_TOL * 10.0 {
                    found.push((x, true));
                }
            }
        }
    }

    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(found.len());
    for (r, m) in found {
        match merged.last_mut() {
            Some(last) if r - last.0 <= MERGE_TOL => {
                last.1 = true;
                if poly::eval(&original, r).abs() < poly::eval(&original, last.0).abs()
                    && last.0 != 0.0
                    && last.0 != 1.0
                {
                    last.0 = r;
                }
            }
            _ => merged.push((r, m)),
        }
    }
    merged
}

fn normalised(coeffs: &[f64]) -> Vec<f64> {
    let mut p = coeffs.to_vec();
    while p.last().is_some_and(|&a| a == 0.0) {
        p.pop();
    }
    let max = p.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    if max > 0.0 {
        p.iter_mut().for_each(|a| *a /= max);
    }
    p
}

/// Quotient of `p` by `(s - 1)`, remainder discarded.
fn deflate_at_one(p: &[f64]) -> Vec<f64> {
    let n = p.len() - 1;
    let mut q = vec![0.0; n];
    q[n - 1] = p[n];
    for k in (1..n).rev() {
        q[k - 1] = p[k] + q[k];
    }
    q
}

fn sign_variations(b: &[f64]) -> usize {
    let mut count = 0;
    let mut prev = 0.0;
    for &x in b {
        if x == 0.0 {
            continue;
        }
        if prev != 0.0 && (x > 0.0) != (prev > 0.0) {
            count += 1;
        }
        prev = x;
    }
    count
}

fn subdivide(
    p: &[f64],
    bern: &[f64],
    lo: f64,
    width: f64,
    depth: usize,
    brackets: &mut Vec<(f64, f64)>,
    clusters: &mut Vec<f64>,
) {
    match sign_variations(bern) {
        0 => {}
        1 => brackets.push((lo, lo + width)),
        _ if width < CLUSTER_WIDTH || depth > 80 => clusters.push(lo + 0.5 * width),
        _ => {
            // split away from (near-)roots so no sub-interval starts on a zero
            let lambda = [0.5, 0.4375, 0.5625, 0.375, 0.625]
                .into_iter()
                .max_by(|&a, &b| {
                    let fa = poly::eval(p, lo + a * width).abs();
                    let fb = poly::eval(p, lo + b * width).abs();
                    fa.total_cmp(&fb).then(b.total_cmp(&a))
                })
                .unwrap();
            let (left, right) = poly::split_bernstein(bern, lambda);
            subdivide(p, &left, lo, width * lambda, depth + 1, brackets, clusters);
            subdivide(
                p,
                &right,
                lo + width * lambda,
                width * (1.0 - lambda),
                depth + 1,
                brackets,
                clusters,
            );
        }
    }
}

fn refine(p: &[f64], dp: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = poly::eval(p, lo);
    let fhi = poly::eval(p, hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    if flo.signum() == fhi.signum() {
        // root indistinguishable from an end of the bracket
        return if flo.abs() <= fhi.abs() { lo } else { hi };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = poly::eval(p, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mut x = if flo.abs() <= poly::eval(p, hi).abs() { lo } else { hi };
    for _ in 0..3 {
        let fx = poly::eval(p, x);
        let dfx = poly::eval(dp, x);
        if dfx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        if next.is_finite() && (lo..=hi).contains(&next) && poly::eval(p, next).abs() < fx.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Tuning of [`trace_branches_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    /// Maximum number of midpoint-insertion passes.
    pub refine_levels: usize,
    /// A jump in `T` larger than this between neighbouring samples triggers refinement.
    pub jump_threshold: f64,
    pub window_factor: f64,
    pub window_floor: f64,
    /// Samples are inserted until the branch interpolant has a normalised
    /// residual at most this large at every interval midpoint.
    pub interp_tol: f64,
    /// Maximum number of interpolant refinement passes.
    pub interp_levels: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            refine_levels: 4,
            jump_threshold: 0.05,
            window_factor: 3.0,
            window_floor: 1e-6,
            interp_tol: 1e-11,
            interp_levels: 12,
        }
    }
}

/// Default number of uniform `t` samples.
pub const DEFAULT_SAMPLES: usize = 257;

pub fn uniform_samples(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSample {
    pub t: f64,
    /// The reparametrised parameter `T(t)`.
    pub tau: f64,
    /// Estimate of `T'(t)`.
    pub slope: f64,
    /// The slope formula was singular here and a secant estimate was used.
    pub secant: bool,
}

/// A continuous solution curve `T(t)` sampled at increasing `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReparamBranch {
    samples: Vec<BranchSample>,
    signatures: Vec<CurvatureSignature>,
    monotone: bool,
    curvature_compatible: bool,
    zero_sign_samples: usize,
    max_residual: f64,
}

impl ReparamBranch {
    /// Annotates raw `(t, T, T')` samples against the boundary curves. A
    /// `None` slope is replaced by a secant estimate from the neighbours.
    pub fn from_samples(
        c: &NurbsCurve,
        d: &NurbsCurve,
        raw: &[(f64, f64, Option<f64>)],
    ) -> Result<Self, RootError> {
        if raw.len() < 2 {
            return Err(RootError::TooFewSamples(raw.len()));
        }
        if raw.windows(2).any(|w| w[1].0 <= w[0].0)
            || raw
                .iter()
                .any(|s| !(0.0..=1.0).contains(&s.0) || !(0.0..=1.0).contains(&s.1))
        {
            return Err(RootError::BadSamples);
        }
        let n = raw.len();
        let secant_at = |i: usize| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (raw[b].1 - raw[a].1) / (raw[b].0 - raw[a].0)
        };
        let samples: Vec<BranchSample> = raw
            .iter()
            .enumerate()
            .map(|(i, &(t, tau, slope))| BranchSample {
                t,
                tau,
                slope: slope.unwrap_or_else(|| secant_at(i)),
                secant: slope.is_none(),
            })
            .collect();

        let signatures: Vec<CurvatureSignature> = samples
            .iter()
            .map(|s| match condition::ruling_normal_at(c, d, s.t, s.tau) {
                Some(n) => curvature_signature(c, d, s.t, s.tau, &n),
                None => CurvatureSignature {
                    t_value: s.t,
                    tau: s.tau,
                    sign_c: 0,
                    sign_d: 0,
                    compatible: false,
                },
            })
            .collect();

        Ok(Self {
            monotone: samples.windows(2).all(|w| w[1].tau > w[0].tau),
            curvature_compatible: signatures.iter().all(|s| s.compatible),
            zero_sign_samples: signatures.iter().filter(|s| s.has_zero()).count(),
            max_residual: samples
                .iter()
                .map(|s| normalised_residual(c, d, s.t, s.tau))
                .fold(0.0, f64::max),
            samples,
            signatures,
        })
    }

    pub fn samples(&self) -> &[BranchSample] {
        &self.samples
    }

    /// Hermite cubic through the samples with their slope estimates,
    /// slope-limited to stay monotone when the branch is.
    pub fn interpolant(&self) -> Result<HermiteCubic, InterpError> {
        let xs: Vec<f64> = self.samples.iter().map(|s| s.t).collect();
        let ys: Vec<f64> = self.samples.iter().map(|s| s.tau).collect();
        let slopes = self.derivative_estimates();
        if self.monotone {
            HermiteCubic::monotone(xs, ys, slopes)
        } else {
            HermiteCubic::new(xs, ys, slopes)
        }
    }

    pub fn derivative_estimates(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.slope).collect()
    }

    pub fn signatures(&self) -> &[CurvatureSignature] {
        &self.signatures
    }

    pub fn monotone(&self) -> bool {
        self.monotone
    }

    pub fn curvature_compatible(&self) -> bool {
        self.curvature_compatible
    }

    /// Samples where a normal curvature sign was classified as zero.
    pub fn zero_sign_samples(&self) -> usize {
        self.zero_sign_samples
    }

    /// Samples whose slope came from the secant fallback.
    pub fn secant_samples(&self) -> usize {
        self.samples.iter().filter(|s| s.secant).count()
    }

    /// Largest normalised triple-product residual over the samples.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    pub fn tau_range(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.tau), hi.max(s.tau))
            })
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    tau: f64,
    slope: Option<f64>,
}

#[derive(Debug, Clone)]
struct SampleSolution {
    t: f64,
    candidates: Vec<Candidate>,
}

fn solve_sample(c: &NurbsCurve, d: &NurbsCurve, spans: &[BezierSpan], t: f64) -> SampleSolution {
    let mut taus: Vec<f64> = Vec::new();
    for p in condition_polynomials(c, spans, t) {
        match isolate_roots(&p) {
            Ok(set) => taus.extend(set.roots),
            // coplanar data: every T works on this span, keep T = t
            Err(_) => {
                let (a, b) = p.span();
                if (a..=b).contains(&t) {
                    taus.push(t);
                }
            }
        }
    }
    taus.sort_by(f64::total_cmp);
    taus.dedup_by(|b, a| (*b - *a).abs() <= 1e-9);
    SampleSolution {
        t,
        candidates: taus
            .into_iter()
            .map(|tau| Candidate {
                tau,
                slope: reparam_derivative(c, d, t, tau).ok(),
            })
            .collect(),
    }
}

fn needs_refinement(a: &SampleSolution, b: &SampleSolution, jump: f64) -> bool {
    if a.candidates.len() != b.candidates.len() {
        return true;
    }
    let far = |x: &SampleSolution, y: &SampleSolution| {
        x.candidates.iter().any(|p| {
            y.candidates
                .iter()
                .map(|q| (q.tau - p.tau).abs())
                .fold(f64::INFINITY, f64::min)
                > jump
        })
    };
    far(a, b) || far(b, a)
}

#[derive(Debug)]
struct OpenBranch {
    raw: Vec<(f64, f64, Option<f64>)>,
}

impl OpenBranch {
    fn prediction(&self, t: f64, opts: &TraceOptions) -> (f64, f64) {
        let &(t0, tau0, slope) = self.raw.last().unwrap();
        let dt = t - t0;
        let secant = (self.raw.len() >= 2).then(|| {
            let (t1, tau1, _) = self.raw[self.raw.len() - 2];
            (tau0 - tau1) / (t0 - t1)
        });
        match slope.or(secant) {
            Some(s) => {
                let step = (s * dt).abs().max(secant.map_or(0.0, |q| (q * dt).abs()));
                (tau0 + s * dt, opts.window_factor * step + opts.window_floor)
            }
            None => (tau0, opts.jump_threshold + opts.window_floor),
        }
    }
}

/// Bisects intervals where the interpolated branch misses the condition,
/// adding the root closest to the interpolant's prediction.
fn refine_interpolant(
    c: &NurbsCurve,
    d: &NurbsCurve,
    spans: &[BezierSpan],
    mut raw: Vec<(f64, f64, Option<f64>)>,
    opts: &TraceOptions,
) -> Result<ReparamBranch, RootError> {
    let mut branch = ReparamBranch::from_samples(c, d, &raw)?;
    // intervals known not to improve, by left end
    let mut settled: Vec<f64> = Vec::new();
    for _ in 0..opts.interp_levels {
        let Ok(h) = branch.interpolant() else { break };
        let inserts: Vec<(f64, f64, Option<f64>)> = raw
            .par_windows(2)
            .filter_map(|w| {
                let (t0, tau0, _) = w[0];
                let (t1, tau1, _) = w[1];
                let mid = 0.5 * (t0 + t1);
                if t1 - t0 < MIN_INTERVAL || settled.contains(&t0) {
                    return None;
                }
                let pred = h.eval(mid);
                if normalised_residual(c, d, mid, pred.clamp(0.0, 1.0)) <= opts.interp_tol {
                    return None;
                }
                let window = (tau1 - tau0).abs() + opts.window_floor;
                solve_sample(c, d, spans, mid)
                    .candidates
                    .into_iter()
                    .map(|cand| ((cand.tau - pred).abs(), cand))
                    .filter(|(dist, _)| *dist <= window)
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, cand)| (mid, cand.tau, cand.slope))
                    .or(Some((mid, f64::NAN, None)))
            })
            .collect();
        if inserts.is_empty() {
            break;
        }
        for ins in inserts {
            if ins.1.is_nan() {
                // no root continues the branch here; leave the interval alone
                let left = raw.iter().rev().find(|s| s.0 < ins.0).map(|s| s.0);
                settled.extend(left);
            } else {
                raw.push(ins);
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let updated = ReparamBranch::from_samples(c, d, &raw)?;
        if updated.monotone != branch.monotone {
            // refinement must not reclassify the branch; keep what was traced
            break;
        }
        branch = updated;
    }
    Ok(branch)
}

/// Traces every branch of solutions `T(t)` with default options.
pub fn trace_branches(
    c: &NurbsCurve,
    d: &NurbsCurve,
    t_samples: &[f64],
) -> Result<Vec<ReparamBranch>, RootError> {
    trace_branches_with(c, d, t_samples, &TraceOptions::default())
}

/// Solves the condition at every sample (in parallel), refines the sampling
/// where roots jump or appear, then links roots of consecutive samples into
/// branches by predicted nearest-neighbour matching.
///
/// Branches are ordered monotone first, then curvature-compatible, then by
/// length of `T` range, then by starting point.
pub fn trace_branches_with(
    c: &NurbsCurve,
    d: &NurbsCurve,
    t_samples: &[f64],
    opts: &TraceOptions,
) -> Result<Vec<ReparamBranch>, RootError> {
    if t_samples.len() < 2 {
        return Err(RootError::TooFewSamples(t_samples.len()));
    }
    if t_samples.windows(2).any(|w| w[1] <= w[0])
        || t_samples.iter().any(|t| !(0.0..=1.0).contains(t))
    {
        return Err(RootError::BadSamples);
    }
    let spans = d.bezier_spans();
    let mut sols: Vec<SampleSolution> = t_samples
        .par_iter()
        .map(|&t| solve_sample(c, d, &spans, t))
        .collect();

    for _ in 0..opts.refine_levels {
        let mids: Vec<f64> = sols
            .windows(2)
            .filter(|w| needs_refinement(&w[0], &w[1], opts.jump_threshold))
            .map(|w| 0.5 * (w[0].t + w[1].t))
            .filter(|&m| m > 0.0 && m < 1.0)
            .collect();
        if mids.is_empty() {
            break;
        }
        let extra: Vec<SampleSolution> = mids
            .par_iter()
            .map(|&t| solve_sample(c, d, &spans, t))
            .collect();
        sols.extend(extra);
        sols.sort_by(|a, b| a.t.total_cmp(&b.t));
        sols.dedup_by(|b, a| b.t == a.t);
    }

    let mut open: Vec<OpenBranch> = Vec::new();
    let mut closed: Vec<OpenBranch> = Vec::new();
    for sol in &sols {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (bi, branch) in open.iter().enumerate() {
            let (pred, window) = branch.prediction(sol.t, opts);
            for (ci, cand) in sol.candidates.iter().enumerate() {
                let dist = (cand.tau - pred).abs();
                if dist <= window {
                    pairs.push((dist, bi, ci));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut branch_taken = vec![false; open.len()];
        let mut cand_taken = vec![false; sol.candidates.len()];
        for (_, bi, ci) in pairs {
            if branch_taken[bi] || cand_taken[ci] {
                continue;
            }
            branch_taken[bi] = true;
            cand_taken[ci] = true;
            let cand = sol.candidates[ci];
            open[bi].raw.push((sol.t, cand.tau, cand.slope));
        }
        let mut still_open = Vec::with_capacity(open.len());
        for (bi, branch) in open.into_iter().enumerate() {
            if branch_taken[bi] {
                still_open.push(branch);
            } else {
                closed.push(branch);
            }
        }
        open = still_open;
        for (ci, cand) in sol.candidates.iter().enumerate() {
            if !cand_taken[ci] {
                open.push(OpenBranch {
                    raw: vec![(sol.t, cand.tau, cand.slope)],
                });
            }
        }
    }
    closed.extend(open);

    let mut branches: Vec<ReparamBranch> = closed
        .into_iter()
        .filter(|b| b.raw.len() >= 2)
        .map(|b| refine_interpolant(c, d, &spans, b.raw, opts))
        .collect::<Result<_, _>>()?;
    branches.sort_by(|a, b| {
        let len = |x: &ReparamBranch| {
            let (lo, hi) = x.tau_range();
            hi - lo
        };
        b.monotone
            .cmp(&a.monotone)
            .then(b.curvature_compatible.cmp(&a.curvature_compatible))
            .then(len(b).total_cmp(&len(a)))
            .then(a.samples[0].t.total_cmp(&b.samples[0].t))
            .then(a.samples[0].tau.total_cmp(&b.samples[0].tau))
    });
    Ok(branches)
}
