mod common;

use common::{p, rng};
use devpatch::condition::normalised_residual;
use devpatch::roots::{trace_branches_with, uniform_samples, unit_interval_roots, TraceOptions};
use devpatch::{trace_branches, ReparamBranch};
use proptest::prelude::*;

fn from_roots(roots: &[f64], lead: f64) -> Vec<f64> {
    let mut c = vec![lead];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (k, a) in c.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= r * a;
        }
        c = next;
    }
    c
}

fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn finds_exactly_the_roots_inside(
        inside in prop::collection::vec(0.02f64..0.98, 0..5),
        outside in prop::collection::vec(prop_oneof![-3.0f64..-0.05, 1.05f64..4.0], 0..3),
        complex in prop::option::of((0.0f64..1.0, 0.01f64..1.0)),
        lead in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
    ) {
        let mut inside = inside;
        inside.sort_by(f64::total_cmp);
        prop_assume!(inside.windows(2).all(|w| w[1] - w[0] > 1e-2));
        let mut all = inside.clone();
        all.extend(&outside);
        let mut coeffs = from_roots(&all, lead);
        if let Some((re, im)) = complex {
            // times (x - re)^2 + im^2
            let q = [re * re + im * im, -2.0 * re, 1.0];
            let mut next = vec![0.0; coeffs.len() + 2];
            for (i, a) in coeffs.iter().enumerate() {
                for (j, b) in q.iter().enumerate() {
                    next[i + j] += a * b;
                }
            }
            coeffs = next;
        }
        let found = unit_interval_roots(&coeffs);
        prop_assert_eq!(found.len(), inside.len(), "{:?} vs {:?}", found, inside);
        for ((r, multiple), want) in found.iter().zip(&inside) {
            prop_assert!((r - want).abs() < 1e-9, "{r} vs {want}");
            prop_assert!(!multiple);
        }
    }

    #[test]
    fn root_count_parity_matches_end_signs(coeffs in prop::collection::vec(-1.0f64..1.0, 2..7)) {
        let (f0, f1) = (eval(&coeffs, 0.0), eval(&coeffs, 1.0));
        prop_assume!(f0.abs() > 1e-6 && f1.abs() > 1e-6);
        let found = unit_interval_roots(&coeffs);
        prop_assume!(found.iter().all(|&(_, m)| !m));
        prop_assert_eq!(found.len() % 2 == 1, (f0 > 0.0) != (f1 > 0.0));
        for &(r, _) in &found {
            let scale: f64 = coeffs.iter().map(|a| a.abs()).fold(0.0, f64::max);
            prop_assert!(eval(&coeffs, r).abs() <= 1e-10 * scale);
        }
    }
}

fn check_branch(c: &devpatch::NurbsCurve, d: &devpatch::NurbsCurve, b: &ReparamBranch) {
    let s = b.samples();
    assert!(s.len() >= 2);
    assert!(s.windows(2).all(|w| w[1].t > w[0].t));
    for q in s {
        assert!((0.0..=1.0).contains(&q.tau));
        assert!(normalised_residual(c, d, q.t, q.tau) <= 1e-10, "t = {}", q.t);
    }
    let increasing = s.windows(2).all(|w| w[1].tau > w[0].tau);
    if b.monotone() {
        assert!(increasing);
    }
    assert!(b.max_residual() <= 1e-10);
}

#[test]
fn branches_of_random_pairs_satisfy_the_condition() {
    for seed in 0..12 {
        let mut r = rng(seed);
        let (c, d) = common::random_pair(&mut r);
        let branches = trace_branches(&c, &d, &uniform_samples(129)).unwrap();
        for b in &branches {
            check_branch(&c, &d, b);
        }
    }
}

#[test]
fn tracing_is_deterministic() {
    let mut r = rng(99);
    let (c, d) = common::random_pair(&mut r);
    let samples = uniform_samples(129);
    let a = trace_branches(&c, &d, &samples).unwrap();
    for _ in 0..3 {
        assert_eq!(trace_branches(&c, &d, &samples).unwrap(), a);
    }
}

#[test]
fn cylinder_has_the_identity_branch() {
    let (c, d) = common::cylinder_pair();
    let branches = trace_branches(&c, &d, &uniform_samples(65)).unwrap();
    assert_eq!(branches.len(), 1);
    let b = &branches[0];
    assert!(b.monotone());
    assert!(b.curvature_compatible());
    assert_eq!(b.t_range(), (0.0, 1.0));
    for q in b.samples() {
        assert!((q.tau - q.t).abs() <= 1e-9);
        assert!((q.slope - 1.0).abs() <= 1e-6);
        assert!(!q.secant);
    }
}

#[test]
fn mirrored_pair_regresses() {
    let c = common::arch();
    let d = c.map_positions(|q| p(q.x, -q.y + 0.2, 1.0));
    let branches = trace_branches(&c, &d, &uniform_samples(129)).unwrap();
    assert!(!branches.is_empty());
    for b in &branches {
        check_branch(&c, &d, b);
        assert!(!b.monotone());
        assert!(!b.curvature_compatible());
    }
}

#[test]
fn coarse_sampling_is_refined_onto_the_same_branch() {
    let (c, d) = common::cone_pair();
    let opts = TraceOptions::default();
    let coarse = trace_branches_with(&c, &d, &uniform_samples(5), &opts).unwrap();
    assert_eq!(coarse.len(), 1);
    for q in coarse[0].samples() {
        assert!((q.tau - q.t).abs() < 1e-9);
    }
}

#[test]
fn rejects_bad_samples() {
    let (c, d) = common::cylinder_pair();
    assert!(trace_branches(&c, &d, &[0.5]).is_err());
    assert!(trace_branches(&c, &d, &[0.5, 0.2]).is_err());
    assert!(trace_branches(&c, &d, &[0.0, 1.5]).is_err());
    assert!(ReparamBranch::from_samples(&c, &d, &[(0.0, 0.0, None)]).is_err());
}

#[test]
fn secant_fallback_fills_missing_slopes() {
    let (c, d) = common::cylinder_pair();
    let raw: Vec<(f64, f64, Option<f64>)> =
        uniform_samples(11).into_iter().map(|t| (t, t, None)).collect();
    let b = ReparamBranch::from_samples(&c, &d, &raw).unwrap();
    assert!(b.monotone());
    for q in b.samples() {
        assert!((q.slope - 1.0).abs() < 1e-6);
    }
}

#[test]
fn interpolated_branch_meets_the_refinement_target() {
    let c = common::arch();
    let d = c.map_positions(|q| p(1.4 * q.x + 0.2, 0.7 * q.y - 0.1, 1.5));
    let opts = TraceOptions::default();
    let b = &trace_branches_with(&c, &d, &uniform_samples(33), &opts).unwrap()[0];
    assert!(b.monotone());
    let h = b.interpolant().unwrap();
    for w in b.samples().windows(2) {
        let m = 0.5 * (w[0].t + w[1].t);
        assert!(normalised_residual(&c, &d, m, h.eval(m)) <= opts.interp_tol);
    }
    let coarse = TraceOptions { interp_levels: 0, ..TraceOptions::default() };
    let raw = &trace_branches_with(&c, &d, &uniform_samples(33), &coarse).unwrap()[0];
    assert!(raw.samples().len() < b.samples().len());
}
