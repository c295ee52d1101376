#![allow(dead_code)]

use devpatch::{NurbsCurve, Point3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn p(x: f64, y: f64, z: f64) -> Point3 {
    Point3::new(x, y, z)
}

pub fn random_point<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Point3 {
    p(rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi))
}

/// Random space cubic with control points in `[-1, 1]^3 + offset`.
pub fn random_cubic<R: Rng>(rng: &mut R, offset: Point3) -> NurbsCurve {
    let pts: Vec<Point3> = (0..4).map(|_| random_point(rng, -1.0, 1.0) + offset).collect();
    NurbsCurve::bezier(&pts).unwrap()
}

pub fn random_rational_cubic<R: Rng>(rng: &mut R, offset: Point3) -> NurbsCurve {
    let pts: Vec<Point3> = (0..4).map(|_| random_point(rng, -1.0, 1.0) + offset).collect();
    let w: Vec<f64> = (0..4).map(|_| rng.gen_range(0.5..2.0)).collect();
    NurbsCurve::rational_bezier(&pts, &w).unwrap()
}

/// Random planar cubic lying in the plane `z = height`.
pub fn random_planar_cubic<R: Rng>(rng: &mut R, height: f64) -> NurbsCurve {
    let pts: Vec<Point3> = (0..4)
        .map(|_| p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), height))
        .collect();
    NurbsCurve::bezier(&pts).unwrap()
}

/// A pair of random space cubics, `d` lifted well above `c`.
pub fn random_pair<R: Rng>(rng: &mut R) -> (NurbsCurve, NurbsCurve) {
    (random_cubic(rng, p(0.0, 0.0, 0.0)), random_cubic(rng, p(0.0, 0.0, 3.0)))
}

/// Convex planar arch from `(-1, 0, 0)` to `(1, 0, 0)` bulging towards `+y`.
pub fn arch() -> NurbsCurve {
    NurbsCurve::bezier(&[
        p(-1.0, 0.0, 0.0),
        p(-0.6, 1.0, 0.0),
        p(0.5, 1.2, 0.0),
        p(1.0, 0.0, 0.0),
    ])
    .unwrap()
}

pub fn random_arch<R: Rng>(rng: &mut R) -> NurbsCurve {
    NurbsCurve::bezier(&[
        p(-1.0, 0.0, 0.0),
        p(rng.gen_range(-0.9..-0.3), rng.gen_range(0.6..1.4), 0.0),
        p(rng.gen_range(0.3..0.9), rng.gen_range(0.6..1.4), 0.0),
        p(1.0, 0.0, 0.0),
    ])
    .unwrap()
}

/// `d = c + offset`: a general cylinder with `T(t) = t`.
pub fn cylinder_pair() -> (NurbsCurve, NurbsCurve) {
    let c = arch();
    let d = c.map_positions(|q| q + p(0.3, -0.2, 1.5));
    (c, d)
}

pub const CONE_APEX: [f64; 3] = [0.1, 0.4, 2.0];

/// `d` is `c` shrunk by half towards [`CONE_APEX`]: rulings meet at the apex.
pub fn cone_pair() -> (NurbsCurve, NurbsCurve) {
    let c = arch();
    let apex = Point3::from(CONE_APEX);
    let d = c.map_positions(|q| apex + (q - apex) * 0.5);
    (c, d)
}

/// Rational quadratic quarter circle of radius 1 in `z = 0`.
pub fn quarter_circle() -> NurbsCurve {
    let w = std::f64::consts::FRAC_1_SQRT_2;
    NurbsCurve::rational_bezier(
        &[p(1.0, 0.0, 0.0), p(1.0, 1.0, 0.0), p(0.0, 1.0, 0.0)],
        &[1.0, w, 1.0],
    )
    .unwrap()
}

/// Real roots of `f` on `[lo, hi]` by sign changes on `n` cells, then bisection.
pub fn grid_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..n {
        if fs[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if fs[i] * fs[i + 1] < 0.0 {
            let (mut a, mut b, fa) = (xs[i], xs[i + 1], fs[i]);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (fm > 0.0) == (fa > 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    if fs[n] == 0.0 {
        roots.push(xs[n]);
    }
    roots
}

pub fn det3(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    a.dot(&b.cross(c))
}
