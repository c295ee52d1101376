//! Rational B-spline (NURBS) curves.
//!
//! Curves are stored in clamped form with the knot vector rescaled to the
//! unit interval on construction, so every curve is parametrised over
//! `[0, 1]`. Evaluation runs on the homogeneous (weighted) control points and
//! projects back with the quotient rule, which gives exact first and second
//! derivatives for rational curves.

use nalgebra::{Matrix3, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point3 = Vector3<f64>;

/// Slack accepted at the ends of the unit domain before reporting an error.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("parameter {t} outside curve domain [0, 1]")]
    OutOfDomain { t: f64 },
    #[error("unsupported derivative order {0}; expected 1 or 2")]
    UnsupportedOrder(usize),
    #[error("invalid curve: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPoint {
    pub position: Point3,
    pub weight: f64,
}

impl ControlPoint {
    pub fn new(position: Point3, weight: f64) -> Self {
        Self { position, weight }
    }

    pub fn unit(position: Point3) -> Self {
        Self::new(position, 1.0)
    }

    fn homogeneous(&self) -> Vector4<f64> {
        let p = self.position * self.weight;
        Vector4::new(p.x, p.y, p.z, self.weight)
    }

    fn from_homogeneous(h: &Vector4<f64>) -> Self {
        Self {
            position: Point3::new(h.x / h.w, h.y / h.w, h.z / h.w),
            weight: h.w,
        }
    }
}

/// Position and first two parametric derivatives at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveJet {
    pub point: Point3,
    pub d1: Point3,
    pub d2: Point3,
}

/// A clamped rational B-spline curve over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NurbsCurve {
    degree: usize,
    knots: Vec<f64>,
    points: Vec<ControlPoint>,
}

impl NurbsCurve {
    /// Builds a curve, validating the knot vector and rescaling it to `[0, 1]`.
    pub fn new(
        degree: usize,
        knots: Vec<f64>,
        points: Vec<ControlPoint>,
    ) -> Result<Self, CurveError> {
        if degree == 0 {
            return Err(CurveError::Invalid("degree must be at least 1".into()));
        }
        if points.len() < degree + 1 {
            return Err(CurveError::Invalid(format!(
                "degree {degree} needs at least {} control points, got {}",
                degree + 1,
                points.len()
            )));
        }
        if knots.len() != points.len() + degree + 1 {
            return Err(CurveError::Invalid(format!(
                "expected {} knots for {} control points of degree {degree}, got {}",
                points.len() + degree + 1,
                points.len(),
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(CurveError::Invalid("knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(CurveError::Invalid("knots must be non-decreasing".into()));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if last <= first {
            return Err(CurveError::Invalid("knot vector spans an empty domain".into()));
        }
        let clamped_start = knots[..=degree].iter().all(|&k| k == first);
        let clamped_end = knots[knots.len() - degree - 1..].iter().all(|&k| k == last);
        if !clamped_start || !clamped_end {
            return Err(CurveError::Invalid(format!(
                "knot vector must be clamped (end multiplicity {})",
                degree + 1
            )));
        }
        let interior = &knots[degree + 1..knots.len() - degree - 1];
        let mut run = 1;
        for w in interior.windows(2) {
            run = if w[0] == w[1] { run + 1 } else { 1 };
            if run > degree {
                return Err(CurveError::Invalid(
                    "interior knot multiplicity exceeds the degree".into(),
                ));
            }
        }
        for (i, cp) in points.iter().enumerate() {
            if !(cp.weight.is_finite() && cp.weight > 0.0) {
                return Err(CurveError::Invalid(format!(
                    "weight {} of control point {i} must be positive and finite",
                    cp.weight
                )));
            }
            if cp.position.iter().any(|x| !x.is_finite()) {
                return Err(CurveError::Invalid(format!(
                    "control point {i} has non-finite coordinates"
                )));
            }
        }

        let span = last - first;
        let mut knots: Vec<f64> = knots.iter().map(|k| (k - first) / span).collect();
        let n = knots.len();
        for k in &mut knots[..=degree] {
            *k = 0.0;
        }
        for k in &mut knots[n - degree - 1..] {
            *k = 1.0;
        }
        Ok(Self {
            degree,
            knots,
            points,
        })
    }

    /// Builds a curve from bare positions and optional weights (default all 1).
    pub fn from_parts(
        degree: usize,
        knots: Vec<f64>,
        positions: &[Point3],
        weights: Option<&[f64]>,
    ) -> Result<Self, CurveError> {
        if let Some(w) = weights {
            if w.len() != positions.len() {
                return Err(CurveError::Invalid(format!(
                    "{} weights given for {} control points",
                    w.len(),
                    positions.len()
                )));
            }
        }
        let points = positions
            .iter()
            .enumerate()
            .map(|(i, &p)| ControlPoint::new(p, weights.map_or(1.0, |w| w[i])))
            .collect();
        Self::new(degree, knots, points)
    }

    /// Polynomial Bézier curve of degree `positions.len() - 1`.
    pub fn bezier(positions: &[Point3]) -> Result<Self, CurveError> {
        Self::rational_bezier(positions, &vec![1.0; positions.len()])
    }

    pub fn rational_bezier(positions: &[Point3], weights: &[f64]) -> Result<Self, CurveError> {
        if positions.len() < 2 {
            return Err(CurveError::Invalid("a Bézier curve needs at least 2 points".into()));
        }
        let degree = positions.len() - 1;
        let mut knots = vec![0.0; degree + 1];
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::from_parts(degree, knots, positions, Some(weights))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn control_points(&self) -> &[ControlPoint] {
        &self.points
    }

    pub fn positions(&self) -> impl Iterator<Item = Point3> + '_ {
        self.points.iter().map(|p| p.position)
    }

    pub fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    /// True when every weight equals the first one (relative tolerance 1e-12).
    pub fn is_polynomial(&self) -> bool {
        let w0 = self.points[0].weight;
        self.points
            .iter()
            .all(|p| (p.weight - w0).abs() <= 1e-12 * w0)
    }

    /// True for a single polynomial piece (no interior knots).
    pub fn is_single_span(&self) -> bool {
        self.points.len() == self.degree + 1
    }

    /// Same knots and weights, control positions mapped through `f`.
    pub fn map_positions(&self, f: impl Fn(Point3) -> Point3) -> Self {
        Self {
            degree: self.degree,
            knots: self.knots.clone(),
            points: self
                .points
                .iter()
                .map(|cp| ControlPoint::new(f(cp.position), cp.weight))
                .collect(),
        }
    }

    /// Diagonal of the axis-aligned bounding box of the control points.
    pub fn control_bbox_diagonal(&self) -> f64 {
        bbox_diagonal(self.positions())
    }

    pub fn evaluate(&self, t: f64) -> Result<Point3, CurveError> {
        let t = check_domain(t)?;
        Ok(self.jet_unchecked(t).point)
    }

    pub fn derivative(&self, t: f64, order: usize) -> Result<Point3, CurveError> {
        if !(1..=2).contains(&order) {
            return Err(CurveError::UnsupportedOrder(order));
        }
        let t = check_domain(t)?;
        let jet = self.jet_unchecked(t);
        Ok(if order == 1 { jet.d1 } else { jet.d2 })
    }

    pub fn jet(&self, t: f64) -> Result<CurveJet, CurveError> {
        let t = check_domain(t)?;
        Ok(self.jet_unchecked(t))
    }

    /// Jet without a domain check. Parameters outside `[0, 1]` extrapolate the
    /// end pieces polynomially, which finite-difference stencils rely on.
    pub(crate) fn jet_unchecked(&self, t: f64) -> CurveJet {
        let span = self.find_span(t);
        let ders = basis_derivatives(&self.knots, span, t, self.degree);
        let mut a = [Vector4::zeros(); 3];
        for (j, basis) in ders.iter().enumerate() {
            let pw = self.points[span - self.degree + j].homogeneous();
            for k in 0..3 {
                a[k] += pw * basis[k];
            }
        }
        let w0 = a[0].w;
        let w1 = a[1].w;
        let w2 = a[2].w;
        let point = a[0].xyz() / w0;
        let d1 = (a[1].xyz() - point * w1) / w0;
        let d2 = (a[2].xyz() - d1 * (2.0 * w1) - point * w2) / w0;
        CurveJet { point, d1, d2 }
    }

    fn find_span(&self, t: f64) -> usize {
        let n = self.points.len() - 1;
        let p = self.degree;
        if t >= self.knots[n + 1] {
            return n;
        }
        if t <= self.knots[p] {
            return p;
        }
        // last index with knots[i] <= t, restricted to [p, n]
        let idx = self.knots.partition_point(|&k| k <= t) - 1;
        idx.clamp(p, n)
    }

    fn homogeneous_points(&self) -> Vec<Vector4<f64>> {
        self.points.iter().map(ControlPoint::homogeneous).collect()
    }

    /// Splits the curve into its Bézier pieces by inserting every interior knot
    /// up to full multiplicity.
    pub fn bezier_spans(&self) -> Vec<BezierSpan> {
        let p = self.degree;
        let mut knots = self.knots.clone();
        let mut pts = self.homogeneous_points();

        let mut distinct: Vec<f64> = self.knots[p + 1..self.knots.len() - p - 1].to_vec();
        distinct.dedup();
        for &u in &distinct {
            let mult = knots.iter().filter(|&&k| k == u).count();
            for _ in mult..p {
                insert_knot(p, &mut knots, &mut pts, u);
            }
        }

        let mut breaks = vec![0.0];
        breaks.extend(distinct.iter().copied());
        breaks.push(1.0);
        breaks
            .windows(2)
            .enumerate()
            .map(|(j, w)| {
                let local: Vec<ControlPoint> = pts[j * p..=j * p + p]
                    .iter()
                    .map(ControlPoint::from_homogeneous)
                    .collect();
                let mut k = vec![0.0; p + 1];
                k.extend(std::iter::repeat_n(1.0, p + 1));
                BezierSpan {
                    start: w[0],
                    end: w[1],
                    curve: NurbsCurve {
                        degree: p,
                        knots: k,
                        points: local,
                    },
                }
            })
            .collect()
    }
}

/// Single-span piece of a curve: `curve` is parametrised over `[0, 1]` and
/// covers the parent interval `[start, end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierSpan {
    pub start: f64,
    pub end: f64,
    pub curve: NurbsCurve,
}

impl BezierSpan {
    /// The span of an already single-span curve.
    pub fn whole(curve: &NurbsCurve) -> Option<Self> {
        curve.is_single_span().then(|| Self {
            start: 0.0,
            end: 1.0,
            curve: curve.clone(),
        })
    }

    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    pub fn to_local(&self, t: f64) -> f64 {
        (t - self.start) / self.width()
    }

    pub fn to_global(&self, s: f64) -> f64 {
        self.start + s * self.width()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    /// Homogeneous control points converted to the power basis in the local
    /// parameter: entry `k` multiplies `s^k`.
    pub fn power_coefficients(&self) -> Vec<Vector4<f64>> {
        let pts = self.curve.homogeneous_points();
        let n = pts.len() - 1;
        (0..=n)
            .map(|k| {
                let mut acc = Vector4::zeros();
                for (i, p) in pts.iter().enumerate().take(k + 1) {
                    let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += p * (sign * binomial(k, i));
                }
                acc * binomial(n, k)
            })
            .collect()
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_domain(t: f64) -> Result<f64, CurveError> {
    if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&t) {
        return Err(CurveError::OutOfDomain { t });
    }
    Ok(t.clamp(0.0, 1.0))
}

pub(crate) fn bbox_diagonal(points: impl Iterator<Item = Point3>) -> f64 {
    let mut lo = Point3::repeat(f64::INFINITY);
    let mut hi = Point3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    }
    if lo.x > hi.x {
        return 0.0;
    }
    (hi - lo).norm()
}

/// Boehm single knot insertion on homogeneous control points.
fn insert_knot(p: usize, knots: &mut Vec<f64>, pts: &mut Vec<Vector4<f64>>, u: f64) {
    let n = pts.len() - 1;
    let k = (knots.partition_point(|&x| x <= u) - 1).clamp(p, n);
    let mut q = Vec::with_capacity(pts.len() + 1);
    q.extend_from_slice(&pts[..=k - p]);
    for i in k - p + 1..=k {
        let alpha = (u - knots[i]) / (knots[i + p] - knots[i]);
        q.push(pts[i] * alpha + pts[i - 1] * (1.0 - alpha));
    }
    q.extend_from_slice(&pts[k..]);
    knots.insert(k + 1, u);
    *pts = q;
}

/// Non-zero basis functions on `span` and their first two derivatives,
/// indexed `[basis][order]`.
fn basis_derivatives(knots: &[f64], span: usize, t: f64, p: usize) -> Vec<[f64; 3]> {
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let max_order = p.min(2);
    let mut ders = vec![[0.0; 3]; p + 1];
    for (j, d) in ders.iter_mut().enumerate() {
        d[0] = ndu[j][p];
    }
    let pi = p as isize;
    for r in 0..=pi {
        let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=max_order as isize {
            let mut d = 0.0;
            let rk = r - k;
            let pk = pi - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[(pk + 1) as usize][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk as usize];
            }
            let j1 = if rk >= -1 { 1 } else { -rk };
            let j2 = if r - 1 <= pk { k - 1 } else { pi - r };
            for j in j1..=j2 {
                let (ju, ku) = (j as usize, (rk + j) as usize);
                a[s2][ju] = (a[s1][ju] - a[s1][ju - 1]) / ndu[(pk + 1) as usize][ku];
                d += a[s2][ju] * ndu[ku][pk as usize];
            }
            if r <= pk {
                let ku = k as usize;
                a[s2][ku] = -a[s1][ku - 1] / ndu[(pk + 1) as usize][r as usize];
                d += a[s2][ku] * ndu[r as usize][pk as usize];
            }
            ders[r as usize][k as usize] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=max_order {
        for d in ders.iter_mut() {
            d[k] *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

/// Structural relation between two boundary curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePairClassification {
    pub both_polynomial: bool,
    pub planar_parallel: bool,
    pub common_plane_normal: Option<[f64; 3]>,
    pub effective_degree: usize,
}

/// Default planarity tolerance, relative to the joint bounding-box diagonal.
pub const PLANARITY_TOL: f64 = 1e-9;

/// Classifies a curve pair: polynomial or rational, and whether both control
/// polygons lie in parallel planes. Planarity is read off the control points,
/// which contain the curve by the convex hull property.
pub fn classify_pair(c: &NurbsCurve, d: &NurbsCurve, tol: f64) -> CurvePairClassification {
    let cp: Vec<Point3> = c.positions().collect();
    let dp: Vec<Point3> = d.positions().collect();
    let diag = bbox_diagonal(cp.iter().chain(dp.iter()).copied());
    let abs_tol = tol * diag.max(f64::MIN_POSITIVE);

    let mut candidates = Vec::new();
    let c_fit = PlaneFit::new(&cp);
    let d_fit = PlaneFit::new(&dp);
    candidates.extend(c_fit.normal);
    candidates.extend(d_fit.normal);
    if let (Some(a), Some(b)) = (c_fit.direction, d_fit.direction) {
        let n = a.cross(&b);
        if n.norm() > 1e-12 {
            candidates.push(n.normalize());
        }
    }
    if let Some(a) = c_fit.direction.or(d_fit.direction) {
        candidates.push(any_perpendicular(&a));
    }
    if candidates.is_empty() {
        candidates.push(Point3::z());
    }

    let flat = |pts: &[Point3], n: &Point3| {
        let h0 = pts[0].dot(n);
        pts.iter().all(|p| (p.dot(n) - h0).abs() <= abs_tol)
    };
    let normal = candidates
        .into_iter()
        .find(|n| flat(&cp, n) && flat(&dp, n))
        .map(canonical_orientation);

    CurvePairClassification {
        both_polynomial: c.is_polynomial() && d.is_polynomial(),
        planar_parallel: normal.is_some(),
        common_plane_normal: normal.map(|n| [n.x, n.y, n.z]),
        effective_degree: c.degree().max(d.degree()),
    }
}

struct PlaneFit {
    /// Plane normal when the points span exactly a plane.
    normal: Option<Point3>,
    /// Line direction when the points are collinear.
    direction: Option<Point3>,
}

impl PlaneFit {
    fn new(pts: &[Point3]) -> Self {
        let centroid = pts.iter().sum::<Point3>() / pts.len() as f64;
        let mut cov = Matrix3::zeros();
        for p in pts {
            let q = p - centroid;
            cov += q * q.transpose();
        }
        let eig = cov.symmetric_eigen();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let largest = eig.eigenvalues[order[2]];
        if largest <= 0.0 {
            return Self {
                normal: None,
                direction: None,
            };
        }
        let middle = eig.eigenvalues[order[1]];
        let column = |i: usize| eig.eigenvectors.column(i).into_owned();
        if middle <= 1e-24 * largest {
            Self {
                normal: None,
                direction: Some(column(order[2])),
            }
        } else {
            Self {
                normal: Some(column(order[0])),
                direction: None,
            }
        }
    }
}

fn any_perpendicular(a: &Point3) -> Point3 {
    let helper = if a.x.abs() < 0.9 { Point3::x() } else { Point3::y() };
    a.cross(&helper).normalize()
}

/// Sign-normalises a unit vector so its largest component is positive.
fn canonical_orientation(n: Point3) -> Point3 {
    let imax = n.iamax();
    if n[imax] < 0.0 {
        -n
    } else {
        n
    }
}

/// On-disk curve description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub points: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl TryFrom<CurveFile> for NurbsCurve {
    type Error = CurveError;

    fn try_from(file: CurveFile) -> Result<Self, CurveError> {
        let positions: Vec<Point3> = file.points.iter().map(|p| Point3::from(*p)).collect();
        NurbsCurve::from_parts(file.degree, file.knots, &positions, file.weights.as_deref())
    }
}

impl From<&NurbsCurve> for CurveFile {
    fn from(curve: &NurbsCurve) -> Self {
        let weights: Vec<f64> = curve.points.iter().map(|p| p.weight).collect();
        CurveFile {
            degree: curve.degree,
            knots: curve.knots.clone(),
            points: curve.points.iter().map(|p| p.position.into()).collect(),
            weights: (!weights.iter().all(|&w| w == 1.0)).then_some(weights),
        }
    }
}

impl NurbsCurve {
    pub fn from_json(text: &str) -> Result<Self, CurveError> {
        let file: CurveFile = serde_json::from_str(text)
            .map_err(|e| CurveError::Invalid(format!("malformed curve JSON: {e}")))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CurveFile::from(self)).expect("curve serialises")
    }
}
