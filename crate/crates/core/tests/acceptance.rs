//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! line per criterion and exits non-zero if any fails.

mod common;

use common::{grid_roots, p, rng};
use devpatch::condition::condition_polynomials;
use devpatch::patch::{
    fundamental_forms, gaussian_curvature_profile, residual_profile, unroll, DerivativeMode,
    RawRuledSurface, UnrollOptions,
};
use devpatch::roots::uniform_samples;
use devpatch::{
    classify_pair, condition_polynomial, degree_bound, isolate_roots, reparam_derivative,
    trace_branches, triple_product, BezierSpan, DevelopablePatch, NurbsCurve, Point3,
    ReparamBranch,
};
use rand::Rng;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

type Verdict = (bool, String);

fn degree_bound_generic() -> Verdict {
    let start = Instant::now();
    let mut worst = 0;
    let mut at_four = 0;
    let mut bound_ok = true;
    for seed in 0..10 {
        let mut r = rng(1000 + seed);
        let (c, d) = common::random_pair(&mut r);
        bound_ok &= degree_bound(&classify_pair(&c, &d, 1e-9)) == 4;
        let span = BezierSpan::whole(&d).unwrap();
        let mut pair_max = 0;
        for k in 0..20 {
            let t = k as f64 / 19.0;
            pair_max = pair_max.max(condition_polynomial(&c, &span, t).degree().unwrap_or(0));
        }
        worst = worst.max(pair_max);
        at_four += usize::from(pair_max == 4);
    }
    let secs = start.elapsed().as_secs_f64();
    (
        bound_ok && worst <= 4 && at_four >= 1 && secs < 1.0,
        format!("max degree {worst}, {at_four}/10 pairs reach 4, {secs:.3} s"),
    )
}

fn degree_bound_planar_parallel() -> Verdict {
    let start = Instant::now();
    let mut worst = 0;
    let mut classified = true;
    for seed in 0..10 {
        let mut r = rng(2000 + seed);
        let c = common::random_planar_cubic(&mut r, 0.0);
        let height = r.gen_range(0.5..3.0);
        let d = common::random_planar_cubic(&mut r, height);
        let k = classify_pair(&c, &d, 1e-9);
        classified &= k.planar_parallel && degree_bound(&k) == 2;
        let span = BezierSpan::whole(&d).unwrap();
        for i in 0..20 {
            let t = i as f64 / 19.0;
            worst = worst.max(condition_polynomial(&c, &span, t).degree().unwrap_or(0));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        classified && worst <= 2 && secs < 1.0,
        format!("max degree {worst}, classified planar-parallel: {classified}, {secs:.3} s"),
    )
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut total_roots = 0;
    let mut worst = 0.0_f64;
    for seed in 0..50 {
        let mut r = rng(3000 + seed);
        let (c, d) = if seed % 2 == 0 {
            common::random_pair(&mut r)
        } else {
            (
                common::random_rational_cubic(&mut r, p(0.0, 0.0, 0.0)),
                common::random_rational_cubic(&mut r, p(0.0, 0.0, 3.0)),
            )
        };
        let t = r.gen_range(0.0..1.0);
        let found = isolate_roots(&condition_polynomial(&c, &BezierSpan::whole(&d).unwrap(), t))
            .unwrap()
            .roots;
        let oracle = grid_roots(|tau| triple_product(&c, &d, t, tau), 0.0, 1.0, 4096);
        total_roots += oracle.len();
        if found.len() != oracle.len() {
            mismatches += 1;
            continue;
        }
        for (a, b) in found.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        mismatches == 0 && worst <= 1e-8 && secs < 10.0,
        format!(
            "{total_roots} oracle roots, {mismatches} count mismatches, max deviation {worst:.1e}, {secs:.3} s"
        ),
    )
}

fn cylinders() -> Vec<(NurbsCurve, NurbsCurve)> {
    let mut pairs = vec![common::cylinder_pair()];
    let q = common::quarter_circle();
    pairs.push((q.clone(), q.map_positions(|x| x + p(-0.2, 0.1, 2.0))));
    let mut r = rng(4000);
    for _ in 0..3 {
        let c = common::random_arch(&mut r);
        let e = p(r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5), r.gen_range(0.5..2.0));
        pairs.push((c.clone(), c.map_positions(|x| x + e)));
    }
    pairs
}

fn cylinder_reconstruction() -> Verdict {
    let mut ok = true;
    let (mut dev, mut k_max, mut slope_dev) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut counts = Vec::new();
    for (c, d) in cylinders() {
        let branches = trace_branches(&c, &d, &uniform_samples(257)).unwrap();
        let monotone: Vec<&ReparamBranch> = branches.iter().filter(|b| b.monotone()).collect();
        counts.push(monotone.len());
        if monotone.len() != 1 {
            ok = false;
            continue;
        }
        let b = monotone[0];
        for s in b.samples() {
            dev = dev.max((s.tau - s.t).abs());
            match reparam_derivative(&c, &d, s.t, s.tau) {
                Ok(v) => slope_dev = slope_dev.max((v - 1.0).abs()),
                Err(_) => slope_dev = f64::INFINITY,
            }
        }
        let patch = DevelopablePatch::new(c, d, b.clone()).unwrap();
        let profile = gaussian_curvature_profile(&patch, 65, 9).unwrap();
        ok &= profile.masked == 0;
        k_max = k_max.max(profile.max_abs_normalised);
    }
    (
        ok && dev <= 1e-9 && k_max <= 1e-8 && slope_dev <= 1e-6,
        format!(
            "monotone branches per pair {counts:?}, max |T-t| {dev:.1e}, max |K| {k_max:.1e}, max |T'-1| {slope_dev:.1e}"
        ),
    )
}

fn no_elliptic_points() -> Verdict {
    let (mut positive, mut worst_rel, mut samples) = (0, 0.0_f64, 0);
    for seed in 0..20 {
        let mut r = rng(5000 + seed);
        let (c, d) = if seed % 2 == 0 {
            common::random_pair(&mut r)
        } else {
            (
                common::random_rational_cubic(&mut r, p(0.0, 0.0, 0.0)),
                common::random_rational_cubic(&mut r, p(0.0, 0.0, 3.0)),
            )
        };
        let surface = RawRuledSurface { c: c.clone(), d: d.clone() };
        for _ in 0..50 {
            let (t, v) = (r.gen_range(0.0..1.0), r.gen_range(0.0..1.0));
            let Ok(f) = fundamental_forms(&surface, t, v, DerivativeMode::Analytic) else {
                continue;
            };
            samples += 1;
            let (cj, dj) = (c.jet(t).unwrap(), d.jet(t).unwrap());
            let twist = dj.d1 - cj.d1;
            let scale = twist.norm_squared();
            let det_b = f.b.determinant();
            if det_b > 1e-12 * scale {
                positive += 1;
            }
            let nu = (cj.d1 * (1.0 - v) + dj.d1 * v)
                .cross(&(dj.point - cj.point))
                .normalize();
            let want = -twist.dot(&nu).powi(2);
            worst_rel = worst_rel.max((det_b - want).abs() / want.abs().max(1e-12 * scale));
        }
    }
    (
        samples == 1000 && positive == 0 && worst_rel <= 1e-9,
        format!("{samples} samples, {positive} with det B > 0, max relative gap {worst_rel:.1e}"),
    )
}

/// Convex arch `c` in `z = 0` and `d = diag(sx, sy) c + offset` in `z = h`.
fn scaled_pairs(mirrored: bool, seed: u64) -> Vec<(NurbsCurve, NurbsCurve)> {
    let mut r = rng(seed);
    (0..10)
        .map(|_| {
            let c = common::random_arch(&mut r);
            let sx = r.gen_range(0.6..1.6);
            let sy = r.gen_range(0.5..1.5) * if mirrored { -1.0 } else { 1.0 };
            let off = p(r.gen_range(-0.3..0.3), r.gen_range(-0.3..0.3), r.gen_range(1.0..2.0));
            let d = c.map_positions(|q| p(sx * q.x, sy * q.y, 0.0) + off);
            (c, d)
        })
        .collect()
}

fn monotonicity_matches_signature() -> Verdict {
    let mut evaluated = [0usize; 2];
    let mut skipped = 0;
    let mut disagreements = 0;
    for (g, mirrored) in [false, true].into_iter().enumerate() {
        for (c, d) in scaled_pairs(mirrored, 6000 + g as u64) {
            for b in trace_branches(&c, &d, &uniform_samples(257)).unwrap() {
                if b.zero_sign_samples() > 0 {
                    skipped += 1;
                    continue;
                }
                evaluated[g] += 1;
                if b.monotone() != b.curvature_compatible() {
                    disagreements += 1;
                }
            }
        }
    }
    (
        disagreements == 0 && evaluated[0] >= 10 && evaluated[1] >= 10,
        format!(
            "{} compatible-group and {} mirrored-group branches checked, {skipped} with zero signs skipped, {disagreements} disagreements",
            evaluated[0], evaluated[1]
        ),
    )
}

fn verdict_consistency() -> Verdict {
    let mut cases: Vec<DevelopablePatch> = Vec::new();
    let mut pairs = cylinders();
    pairs.push(common::cone_pair());
    pairs.extend(scaled_pairs(false, 6000));
    pairs.extend(scaled_pairs(true, 6001));
    for seed in 0..6 {
        pairs.push(common::random_pair(&mut rng(7000 + seed)));
    }
    for (c, d) in &pairs {
        for b in trace_branches(c, d, &uniform_samples(257)).unwrap() {
            if let Ok(patch) = DevelopablePatch::new(c.clone(), d.clone(), b) {
                cases.push(patch);
            }
        }
    }
    let solved = cases.len();
    // the identity reparametrisation on generic pairs gives non-developable controls
    for seed in 0..6 {
        let (c, d) = common::random_pair(&mut rng(7100 + seed));
        let raw: Vec<(f64, f64, Option<f64>)> =
            uniform_samples(65).into_iter().map(|t| (t, t, None)).collect();
        let b = ReparamBranch::from_samples(&c, &d, &raw).unwrap();
        cases.push(DevelopablePatch::new(c, d, b).unwrap());
    }

    let (mut agree, mut both_flat, mut both_curved) = (0, 0, 0);
    let mut failures = Vec::new();
    for (i, patch) in cases.iter().enumerate() {
        let residual = residual_profile(patch, 257);
        let k = gaussian_curvature_profile(patch, 65, 9)
            .map(|prof| prof.max_abs_normalised)
            .unwrap_or(f64::INFINITY);
        let (a, b) = (residual <= 1e-8, k <= 1e-8);
        if a == b {
            agree += 1;
            both_flat += usize::from(a);
            both_curved += usize::from(!a);
        } else {
            failures.push(format!("#{i}: residual {residual:.1e}, K {k:.1e}"));
        }
    }
    let total = cases.len();
    let mut detail = format!(
        "{agree}/{total} agree ({solved} solved branches + {} controls; {both_flat} flat, {both_curved} curved)",
        total - solved
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; disagreements: {}", failures.join(", ")));
    }
    (agree == total && both_flat > 0 && both_curved > 0, detail)
}

fn solved(c: NurbsCurve, d: NurbsCurve) -> Option<DevelopablePatch> {
    let b = trace_branches(&c, &d, &uniform_samples(257))
        .ok()?
        .into_iter()
        .find(|b| b.monotone())?;
    DevelopablePatch::new(c, d, b).ok()
}

fn unroll_isometry() -> Verdict {
    let opts = UnrollOptions::default();
    let (mut edge, mut area, mut apex_gap) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut ok = true;
    for (c, d) in cylinders() {
        match solved(c, d).map(|p| unroll(&p, 65, 9, &opts)) {
            Some(Ok(dev)) => {
                edge = edge.max(dev.metrics.edge_length_error);
                area = area.max(dev.metrics.area_error);
            }
            _ => ok = false,
        }
    }
    let mut cones = vec![common::cone_pair()];
    let mut r = rng(8000);
    for _ in 0..3 {
        let c = common::random_arch(&mut r);
        let apex = p(r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5), r.gen_range(1.5..3.0));
        let s = r.gen_range(0.3..0.7);
        cones.push((c.clone(), c.map_positions(|q| apex + (q - apex) * s)));
    }
    for (c, d) in cones {
        match solved(c, d).map(|p| unroll(&p, 65, 9, &opts)) {
            Some(Ok(dev)) => {
                edge = edge.max(dev.metrics.edge_length_error);
                area = area.max(dev.metrics.area_error);
                match dev.ruling_concurrency() {
                    Some(conc) => apex_gap = apex_gap.max(conc.max_distance_normalised),
                    None => ok = false,
                }
            }
            _ => ok = false,
        }
    }
    (
        ok && edge <= 1e-6 && area <= 1e-6 && apex_gap <= 1e-5,
        format!("max edge error {edge:.1e}, max area error {area:.1e}, max apex gap {apex_gap:.1e}"),
    )
}

fn c2_spline(pts: &[Point3], interior: &[f64]) -> NurbsCurve {
    let mut knots = vec![0.0; 4];
    knots.extend_from_slice(interior);
    knots.extend([1.0; 4]);
    NurbsCurve::from_parts(3, knots, pts, None).unwrap()
}

fn arc_points(rx: f64, ry: f64, a0: f64, a1: f64, n: usize, z: f64) -> Vec<Point3> {
    (0..n)
        .map(|i| {
            let a = (a0 + (a1 - a0) * i as f64 / (n - 1) as f64).to_radians();
            p(rx * a.cos(), ry * a.sin(), z)
        })
        .collect()
}

/// Root of the condition at `t` closest to `guess`.
fn solve_at(c: &NurbsCurve, d: &NurbsCurve, t: f64, guess: f64) -> f64 {
    condition_polynomials(c, &d.bezier_spans(), t)
        .iter()
        .flat_map(|q| isolate_roots(q).map(|r| r.roots).unwrap_or_default())
        .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()))
        .expect("a root near the branch")
}

fn regularity_at_joins() -> Verdict {
    let c = c2_spline(&arc_points(1.0, 1.0, 200.0, 340.0, 7, 0.0), &[0.25, 0.5, 0.75]);
    let d = c2_spline(&arc_points(1.5, 0.8, 185.0, 355.0, 7, 1.0), &[0.3, 0.45, 0.8]);
    let Some(patch) = solved(c.clone(), d.clone()) else {
        return (false, "no monotone branch".into());
    };
    let (lo, hi) = patch.branch().t_range();
    let h = 1e-3;
    let margin = 5.0 * h;

    let mut joins: Vec<f64> = [0.25, 0.5, 0.75].into_iter().filter(|t| *t > lo + margin && *t < hi - margin).collect();
    for knot in [0.3, 0.45, 0.8] {
        // t where the branch crosses a knot of d
        let (mut a, mut b) = (lo, hi);
        if (patch.reparam(a) - knot) * (patch.reparam(b) - knot) > 0.0 {
            continue;
        }
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if (patch.reparam(a) - knot) * (patch.reparam(m) - knot) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let tj = solve_t_for_knot(&c, &d, 0.5 * (a + b), knot, &patch);
        if tj > lo + margin && tj < hi - margin {
            joins.push(tj);
        }
    }

    let mut worst_ratio = 0.0_f64;
    let mut lines = Vec::new();
    for &tj in &joins {
        let taus: Vec<f64> = (-4..=4)
            .map(|k| {
                let t = tj + k as f64 * h;
                solve_at(&c, &d, t, patch.reparam(t))
            })
            .collect();
        let dd: Vec<f64> = taus.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        // dd[3] ends and dd[4] starts at the join
        let jump = (dd[4] - dd[3]).abs();
        let noise = (0..dd.len() - 1)
            .filter(|&k| k != 3)
            .map(|k| (dd[k + 1] - dd[k]).abs())
            .fold(0.0, f64::max);
        let ratio = jump / noise.max(1e-15);
        worst_ratio = worst_ratio.max(ratio);
        lines.push(format!("t={tj:.4} jump/noise={ratio:.2}"));
    }
    (
        joins.len() >= 4 && worst_ratio <= 10.0,
        format!("{} joins checked ({})", joins.len(), lines.join(", ")),
    )
}

/// Refines the `t` at which `T(t)` equals `knot` using exact roots near `t0`.
fn solve_t_for_knot(c: &NurbsCurve, d: &NurbsCurve, t0: f64, knot: f64, patch: &DevelopablePatch) -> f64 {
    let (mut a, mut b) = (t0 - 1e-3, t0 + 1e-3);
    let f = |t: f64| solve_at(c, d, t, patch.reparam(t)) - knot;
    if f(a) * f(b) > 0.0 {
        return t0;
    }
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if f(a) * f(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("degree bound, generic cubics", degree_bound_generic),
        ("degree bound, planar-parallel cubics", degree_bound_planar_parallel),
        ("roots match bisection oracle", oracle_equivalence),
        ("cylinder reconstruction", cylinder_reconstruction),
        ("no elliptic points on ruled patches", no_elliptic_points),
        ("monotonicity matches curvature signs", monotonicity_matches_signature),
        ("residual and curvature verdicts agree", verdict_consistency),
        ("unroll isometry, cylinders and cones", unroll_isometry),
        ("reparametrisation slope continuous at joins", regularity_at_joins),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let (pass, detail) = match panic::catch_unwind(AssertUnwindSafe(run)) {
            Ok(v) => v,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        failed += usize::from(!pass);
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
