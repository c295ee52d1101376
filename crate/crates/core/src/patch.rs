//! The reparametrised ruled surface `(1 - v) c(t) + v d(T(t))`: evaluation,
//! differential-geometric checks, tessellation and planar development.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::condition::normalised_residual;
use crate::curves::{bbox_diagonal, NurbsCurve, Point3};
use crate::interp::{HermiteCubic, InterpError};
use crate::roots::ReparamBranch;

pub type Point2 = Vector2<f64>;

const RANGE_SLACK: f64 = 1e-12;
/// Finite-difference step; the Richardson companion uses twice this.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PatchError {
    #[error("t = {t} outside branch range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("v = {0} outside [0, 1]")]
    RulingParameter(f64),
    #[error("ruling is tangent to the boundary at t = {t}")]
    SingularRuling { t: f64 },
    #[error("degenerate metric at (t, v) = ({t}, {v})")]
    SingularMetric { t: f64, v: f64 },
    #[error("branch is not monotone; rulings overlap in a regression area")]
    NotMonotone,
    #[error("patch is not developable: max normalised |K| = {max_k:e} exceeds {tol:e}")]
    NotDevelopable { max_k: f64, tol: f64 },
    #[error("grid needs at least 2 x 2 samples, got {nt} x {nv}")]
    Grid { nt: usize, nv: usize },
    #[error("interpolating branch: {0}")]
    Interp(#[from] InterpError),
}

/// First and second partial derivatives of a surface parametrisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub point: Point3,
    pub bt: Point3,
    pub bv: Point3,
    pub btt: Point3,
    pub btv: Point3,
    pub bvv: Point3,
}

/// A surface swept by segments `v ↦ b(t, v)`, `v ∈ [0, 1]`.
pub trait RuledSurface: Sync {
    fn t_range(&self) -> (f64, f64);
    /// Point without range checks (end pieces are extended polynomially).
    fn point(&self, t: f64, v: f64) -> Point3;
    fn partials(&self, t: f64, v: f64) -> Partials;
}

/// `(1 - v) c(t) + v d(t)` with no reparametrisation.
#[derive(Debug, Clone)]
pub struct RawRuledSurface {
    pub c: NurbsCurve,
    pub d: NurbsCurve,
}

impl RuledSurface for RawRuledSurface {
    fn t_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn point(&self, t: f64, v: f64) -> Point3 {
        self.c.jet_unchecked(t).point * (1.0 - v) + self.d.jet_unchecked(t).point * v
    }

    fn partials(&self, t: f64, v: f64) -> Partials {
        let c = self.c.jet_unchecked(t);
        let d = self.d.jet_unchecked(t);
        Partials {
            point: c.point * (1.0 - v) + d.point * v,
            bt: c.d1 * (1.0 - v) + d.d1 * v,
            bv: d.point - c.point,
            btt: c.d2 * (1.0 - v) + d.d2 * v,
            btv: d.d1 - c.d1,
            bvv: Point3::zeros(),
        }
    }
}

/// Boundary curves, a solution branch and the interpolated `T(t)`.
#[derive(Debug, Clone)]
pub struct DevelopablePatch {
    c: NurbsCurve,
    d: NurbsCurve,
    branch: ReparamBranch,
    interpolant: HermiteCubic,
}

impl DevelopablePatch {
    /// Interpolates the branch with [`ReparamBranch::interpolant`].
    pub fn new(c: NurbsCurve, d: NurbsCurve, branch: ReparamBranch) -> Result<Self, PatchError> {
        let interpolant = branch.interpolant()?;
        Ok(Self {
            c,
            d,
            branch,
            interpolant,
        })
    }

    pub fn curve_c(&self) -> &NurbsCurve {
        &self.c
    }

    pub fn curve_d(&self) -> &NurbsCurve {
        &self.d
    }

    pub fn branch(&self) -> &ReparamBranch {
        &self.branch
    }

    pub fn interpolant(&self) -> &HermiteCubic {
        &self.interpolant
    }

    /// Interpolated `T(t)`.
    pub fn reparam(&self, t: f64) -> f64 {
        self.interpolant.eval(t)
    }

    fn check_t(&self, t: f64) -> Result<f64, PatchError> {
        let (lo, hi) = self.branch.t_range();
        if t.is_nan() || t < lo - RANGE_SLACK || t > hi + RANGE_SLACK {
            return Err(PatchError::OutOfRange { t, lo, hi });
        }
        Ok(t.clamp(lo, hi))
    }

    pub fn surface_point(&self, t: f64, v: f64) -> Result<Point3, PatchError> {
        let t = self.check_t(t)?;
        if !(0.0..=1.0).contains(&v) {
            return Err(PatchError::RulingParameter(v));
        }
        Ok(self.point(t, v))
    }

    /// Unit normal `b_t × b_v` at the `c` end of the ruling through `t`.
    pub fn ruling_normal(&self, t: f64) -> Result<Point3, PatchError> {
        self.normal_at(t, 0.0)
    }

    /// Unit normal `b_t × b_v` at `(t, v)`.
    pub fn normal_at(&self, t: f64, v: f64) -> Result<Point3, PatchError> {
        let t = self.check_t(t)?;
        let p = self.partials(t, v);
        let n = p.bt.cross(&p.bv);
        let norm = n.norm();
        if !(norm > 1e-12 * p.bt.norm() * p.bv.norm()) {
            return Err(PatchError::SingularRuling { t });
        }
        Ok(n / norm)
    }

    /// Angle between the normals at both ends of the ruling through `t`.
    pub fn normal_deviation(&self, t: f64) -> Result<f64, PatchError> {
        let a = self.normal_at(t, 0.0)?;
        let b = self.normal_at(t, 1.0)?;
        Ok(a.cross(&b).norm().atan2(a.dot(&b)))
    }
}

impl RuledSurface for DevelopablePatch {
    fn t_range(&self) -> (f64, f64) {
        self.branch.t_range()
    }

    fn point(&self, t: f64, v: f64) -> Point3 {
        let tau = self.interpolant.eval(t);
        self.c.jet_unchecked(t).point * (1.0 - v) + self.d.jet_unchecked(tau).point * v
    }

    fn partials(&self, t: f64, v: f64) -> Partials {
        let [tau, dtau, ddtau] = self.interpolant.eval_with_derivatives(t);
        let c = self.c.jet_unchecked(t);
        let d = self.d.jet_unchecked(tau);
        let gt = d.d1 * dtau;
        let gtt = d.d2 * (dtau * dtau) + d.d1 * ddtau;
        Partials {
            point: c.point * (1.0 - v) + d.point * v,
            bt: c.d1 * (1.0 - v) + gt * v,
            bv: d.point - c.point,
            btt: c.d2 * (1.0 - v) + gtt * v,
            btv: gt - c.d1,
            bvv: Point3::zeros(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// First form `g`, second form `b`, Gaussian curvature `k = det b / det g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalForms {
    pub g: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub k: f64,
    pub normal: Point3,
}

fn finite_difference_partials<S: RuledSurface + ?Sized>(s: &S, t: f64, v: f64) -> Partials {
    let stencil = |h: f64| {
        let p = |dt: f64, dv: f64| s.point(t + dt, v + dv);
        let c = p(0.0, 0.0);
        let bt = (p(h, 0.0) - p(-h, 0.0)) / (2.0 * h);
        let bv = (p(0.0, h) - p(0.0, -h)) / (2.0 * h);
        let btt = (p(h, 0.0) - c * 2.0 + p(-h, 0.0)) / (h * h);
        let bvv = (p(0.0, h) - c * 2.0 + p(0.0, -h)) / (h * h);
        let btv = (p(h, h) - p(h, -h) - p(-h, h) + p(-h, -h)) / (4.0 * h * h);
        [bt, bv, btt, btv, bvv]
    };
    let fine = stencil(FD_STEP);
    let coarse = stencil(2.0 * FD_STEP);
    let r = |i: usize| (fine[i] * 4.0 - coarse[i]) / 3.0;
    Partials {
        point: s.point(t, v),
        bt: r(0),
        bv: r(1),
        btt: r(2),
        btv: r(3),
        bvv: r(4),
    }
}

pub fn fundamental_forms<S: RuledSurface + ?Sized>(
    surface: &S,
    t: f64,
    v: f64,
    mode: DerivativeMode,
) -> Result<FundamentalForms, PatchError> {
    let p = match mode {
        DerivativeMode::Analytic => surface.partials(t, v),
        DerivativeMode::FiniteDifference => finite_difference_partials(surface, t, v),
    };
    forms_from_partials(&p).ok_or(PatchError::SingularMetric { t, v })
}

fn forms_from_partials(p: &Partials) -> Option<FundamentalForms> {
    let n = p.bt.cross(&p.bv);
    let norm = n.norm();
    let scale = p.bt.norm() * p.bv.norm();
    if !(norm > 1e-12 * scale) {
        return None;
    }
    let normal = n / norm;
    let g = Matrix2::new(
        p.bt.dot(&p.bt),
        p.bt.dot(&p.bv),
        p.bt.dot(&p.bv),
        p.bv.dot(&p.bv),
    );
    let btv = p.btv.dot(&normal);
    let b = Matrix2::new(p.btt.dot(&normal), btv, btv, p.bvv.dot(&normal));
    let det_g = g.determinant();
    if !(det_g > 0.0) {
        return None;
    }
    Some(FundamentalForms {
        g,
        b,
        k: b.determinant() / det_g,
        normal,
    })
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Gaussian curvature sampled on a `nt × nv` parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureProfile {
    pub nt: usize,
    pub nv: usize,
    pub t_values: Vec<f64>,
    pub v_values: Vec<f64>,
    /// Row-major by `t`; `None` where the metric is singular.
    pub values: Vec<Option<f64>>,
    pub masked: usize,
    /// Bounding-box diagonal of the sampled points.
    pub diagonal: f64,
    /// `max |K|` times the squared diagonal.
    pub max_abs_normalised: f64,
    /// `min K` times the squared diagonal.
    pub min_normalised: f64,
}

impl CurvatureProfile {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.nv + j]
    }
}

pub fn gaussian_curvature_profile<S: RuledSurface + ?Sized>(
    surface: &S,
    nt: usize,
    nv: usize,
) -> Result<CurvatureProfile, PatchError> {
    if nt < 2 || nv < 2 {
        return Err(PatchError::Grid { nt, nv });
    }
    let (lo, hi) = surface.t_range();
    let t_values = grid(lo, hi, nt);
    let v_values = grid(0.0, 1.0, nv);
    let cells: Vec<(Point3, Option<f64>)> = t_values
        .par_iter()
        .flat_map_iter(|&t| {
            v_values.iter().map(move |&v| {
                let p = surface.partials(t, v);
                (p.point, forms_from_partials(&p).map(|f| f.k))
            })
        })
        .collect();
    let diagonal = bbox_diagonal(cells.iter().map(|c| c.0));
    let values: Vec<Option<f64>> = cells.into_iter().map(|c| c.1).collect();
    let scale = diagonal * diagonal;
    let present = values.iter().flatten();
    let max_abs_normalised = present.clone().fold(0.0_f64, |m, k| m.max(k.abs())) * scale;
    let min_normalised = present.fold(f64::INFINITY, |m, &k| m.min(k)) * scale;
    Ok(CurvatureProfile {
        nt,
        nv,
        masked: values.iter().filter(|k| k.is_none()).count(),
        t_values,
        v_values,
        values,
        diagonal,
        max_abs_normalised,
        min_normalised: if min_normalised.is_finite() {
            min_normalised
        } else {
            0.0
        },
    })
}

/// Largest normalised triple-product residual of the interpolated branch on
/// `nt` uniform parameters.
pub fn residual_profile(patch: &DevelopablePatch, nt: usize) -> f64 {
    let (lo, hi) = patch.branch.t_range();
    grid(lo, hi, nt.max(2))
        .par_iter()
        .map(|&t| normalised_residual(&patch.c, &patch.d, t, patch.reparam(t)))
        .reduce(|| 0.0, f64::max)
}

/// Triangle mesh over a parameter grid; vertex `i * nv + j` sits at `(t_i, v_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub nt: usize,
    pub nv: usize,
    pub vertices: Vec<Point3>,
    pub params: Vec<(f64, f64)>,
    pub triangles: Vec<[usize; 3]>,
}

/// Two triangles per grid cell, wound so their normals follow `b_t × b_v`.
pub fn grid_triangles(nt: usize, nv: usize) -> Vec<[usize; 3]> {
    let mut tris = Vec::with_capacity(2 * (nt - 1) * (nv - 1));
    for i in 0..nt - 1 {
        for j in 0..nv - 1 {
            let a = i * nv + j;
            let b = (i + 1) * nv + j;
            let c = (i + 1) * nv + j + 1;
            let d = i * nv + j + 1;
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    tris
}

pub fn tessellate<S: RuledSurface + ?Sized>(
    surface: &S,
    nt: usize,
    nv: usize,
) -> Result<TriMesh, PatchError> {
    if nt < 2 || nv < 2 {
        return Err(PatchError::Grid { nt, nv });
    }
    let (lo, hi) = surface.t_range();
    let ts = grid(lo, hi, nt);
    let vs = grid(0.0, 1.0, nv);
    let params: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| vs.iter().map(move |&v| (t, v)))
        .collect();
    let vertices = params
        .par_iter()
        .map(|&(t, v)| surface.point(t, v))
        .collect();
    Ok(TriMesh {
        nt,
        nv,
        vertices,
        params,
        triangles: grid_triangles(nt, nv),
    })
}

impl TriMesh {
    pub fn to_obj(&self) -> String {
        let mut out = String::from("# devpatch\n");
        for p in &self.vertices {
            out.push_str(&format!("v {} {} {}\n", p.x, p.y, p.z));
        }
        write_faces(&mut out, &self.triangles);
        out
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }
}

fn write_faces(out: &mut String, tris: &[[usize; 3]]) {
    for t in tris {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
}

/// Isometry measurements of a development against the 3D tessellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnrollMetrics {
    /// Largest relative edge-length change over all mesh edges.
    pub edge_length_error: f64,
    /// Relative change of total triangle area.
    pub area_error: f64,
    /// Relative change of the boundary polyline lengths (worst of both).
    pub boundary_length_error: f64,
    /// Relative gap between the 2D boundary polylines and the quadrature
    /// arc lengths of the 3D boundary curves (worst of both).
    pub arc_length_error: f64,
    /// Max normalised |K| found by the developability check.
    pub max_curvature: f64,
}

/// A patch laid flat: vertex `i * nv + j` corresponds to `(t_i, v_j)`, the
/// first ruling lies on the positive y-axis starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDevelopment {
    pub nt: usize,
    pub nv: usize,
    pub vertices: Vec<Point2>,
    pub params: Vec<(f64, f64)>,
    pub metrics: UnrollMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnrollOptions {
    /// Max normalised |K| accepted as developable.
    pub curvature_tol: f64,
}

impl Default for UnrollOptions {
    fn default() -> Self {
        Self {
            curvature_tol: 1e-6,
        }
    }
}

/// Third vertex of a triangle in the plane, given the 2D image of the edge
/// `a → b`; the triangle `(a, b, c)` is wound counter-clockwise.
fn place(a2: Point2, b2: Point2, a3: Point3, b3: Point3, c3: Point3) -> Point2 {
    let e = (b3 - a3).normalize();
    let rel = c3 - a3;
    let x = rel.dot(&e);
    let y = (rel - e * x).norm();
    let u = (b2 - a2).normalize();
    let perp = Point2::new(-u.y, u.x);
    a2 + u * x + perp * y
}

/// Flattens the patch ruling by ruling. Each grid cell is split along the
/// same diagonal as [`tessellate`]; both triangles keep their side lengths,
/// so rulings, boundary chords and their mutual angles carry over exactly.
/// Drift from non-planar cells accumulates and is reported, not corrected.
pub fn unroll(
    patch: &DevelopablePatch,
    nt: usize,
    nv: usize,
    opts: &UnrollOptions,
) -> Result<PlanarDevelopment, PatchError> {
    if nt < 2 || nv < 2 {
        return Err(PatchError::Grid { nt, nv });
    }
    if !patch.branch.monotone() {
        return Err(PatchError::NotMonotone);
    }
    let profile = gaussian_curvature_profile(patch, nt, nv)?;
    if profile.masked > 0 || !(profile.max_abs_normalised <= opts.curvature_tol) {
        return Err(PatchError::NotDevelopable {
            max_k: profile.max_abs_normalised,
            tol: opts.curvature_tol,
        });
    }

    let mesh = tessellate(patch, nt, nv)?;
    let lower = |i: usize| mesh.vertices[i * nv];
    let upper = |i: usize| mesh.vertices[i * nv + nv - 1];

    let mut p2 = vec![Point2::zeros(); nt];
    let mut q2 = vec![Point2::zeros(); nt];
    q2[0] = Point2::new(0.0, (upper(0) - lower(0)).norm());
    for i in 0..nt - 1 {
        q2[i + 1] = place(q2[i], p2[i], upper(i), lower(i), upper(i + 1));
        p2[i + 1] = place(q2[i + 1], p2[i], upper(i + 1), lower(i), lower(i + 1));
    }

    let mut vertices = Vec::with_capacity(nt * nv);
    for i in 0..nt {
        for &(_, v) in &mesh.params[i * nv..(i + 1) * nv] {
            vertices.push(p2[i] * (1.0 - v) + q2[i] * v);
        }
    }

    let metrics = isometry_metrics(patch, &mesh, &vertices, profile.max_abs_normalised);
    Ok(PlanarDevelopment {
        nt,
        nv,
        vertices,
        params: mesh.params,
        metrics,
    })
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn isometry_metrics(
    patch: &DevelopablePatch,
    mesh: &TriMesh,
    flat: &[Point2],
    max_curvature: f64,
) -> UnrollMetrics {
    let (nt, nv) = (mesh.nt, mesh.nv);
    let mut edges = Vec::new();
    for &[a, b, c] in &mesh.triangles {
        edges.extend([(a, b), (b, c), (c, a)]);
    }
    let edge_length_error = edges
        .iter()
        .map(|&(a, b)| {
            relative(
                (flat[a] - flat[b]).norm(),
                (mesh.vertices[a] - mesh.vertices[b]).norm(),
            )
        })
        .fold(0.0, f64::max);

    let area3 = mesh.area();
    let area2: f64 = mesh
        .triangles
        .iter()
        .map(|&[a, b, c]| {
            let (u, w) = (flat[b] - flat[a], flat[c] - flat[a]);
            0.5 * (u.x * w.y - u.y * w.x).abs()
        })
        .sum();

    let polyline = |j: usize| -> (f64, f64) {
        (0..nt - 1).fold((0.0, 0.0), |(l2, l3), i| {
            let (a, b) = (i * nv + j, (i + 1) * nv + j);
            (
                l2 + (flat[b] - flat[a]).norm(),
                l3 + (mesh.vertices[b] - mesh.vertices[a]).norm(),
            )
        })
    };
    let (c2, c3) = polyline(0);
    let (d2, d3) = polyline(nv - 1);

    let (t0, t1) = patch.branch.t_range();
    let arc_c = arc_length(&patch.c, t0, t1);
    let (tau0, tau1) = (patch.reparam(t0), patch.reparam(t1));
    let arc_d = arc_length(&patch.d, tau0.min(tau1), tau0.max(tau1));

    UnrollMetrics {
        edge_length_error,
        area_error: relative(area2, area3),
        boundary_length_error: relative(c2, c3).max(relative(d2, d3)),
        arc_length_error: relative(c2, arc_c).max(relative(d2, arc_d)),
        max_curvature,
    }
}

/// Arc length of a curve over `[a, b]` by composite 5-point Gauss–Legendre.
pub fn arc_length(curve: &NurbsCurve, a: f64, b: f64) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    const PANELS: usize = 512;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * h;
            NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(x, w)| w * curve.jet_unchecked(mid + 0.5 * h * x).d1.norm())
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// Where the unrolled rulings, extended as lines, come closest to meeting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RulingConcurrency {
    pub apex: [f64; 2],
    /// Largest distance of a ruling line from the apex over the 2D
    /// bounding-box diagonal.
    pub max_distance_normalised: f64,
}

impl PlanarDevelopment {
    pub fn vertex(&self, i: usize, j: usize) -> Point2 {
        self.vertices[i * self.nv + j]
    }

    /// Least-squares intersection of the ruling lines; `None` when they are
    /// (numerically) parallel.
    pub fn ruling_concurrency(&self) -> Option<RulingConcurrency> {
        let lines: Vec<(Point2, Point2)> = (0..self.nt)
            .map(|i| {
                let p = self.vertex(i, 0);
                (p, (self.vertex(i, self.nv - 1) - p).normalize())
            })
            .collect();
        let mut a = Matrix2::zeros();
        let mut rhs = Point2::zeros();
        for (p, u) in &lines {
            let proj = Matrix2::identity() - u * u.transpose();
            a += proj;
            rhs += proj * p;
        }
        let eig = a.symmetric_eigen();
        let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        if lo <= 1e-10 * hi {
            return None;
        }
        let apex = a.lu().solve(&rhs)?;
        let diag = {
            let (mut lo, mut hi) = (Point2::repeat(f64::INFINITY), Point2::repeat(f64::NEG_INFINITY));
            for v in &self.vertices {
                lo = lo.inf(v);
                hi = hi.sup(v);
            }
            (hi - lo).norm()
        };
        let max_distance = lines
            .iter()
            .map(|(p, u)| {
                let r = apex - p;
                (r.x * u.y - r.y * u.x).abs()
            })
            .fold(0.0, f64::max);
        Some(RulingConcurrency {
            apex: [apex.x, apex.y],
            max_distance_normalised: max_distance / diag,
        })
    }

    pub fn to_obj(&self) -> String {
        let mut out = String::from("# devpatch\n");
        for p in &self.vertices {
            out.push_str(&format!("v {} {} 0\n", p.x, p.y));
        }
        write_faces(&mut out, &grid_triangles(self.nt, self.nv));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,v,x,y\n");
        for (p, (t, v)) in self.vertices.iter().zip(&self.params) {
            out.push_str(&format!("{t},{v},{},{}\n", p.x, p.y));
        }
        out
    }
}
