//! Upper half-plane model of the hyperbolic plane: points, Möbius
//! isometries, oriented geodesic lines, common perpendiculars and the
//! orientation sign used for "directly orthogonal" arcs.
//!
//! The plane carries the standard orientation dx∧dy.

use std::fmt;

/// Tolerance for geometric identities.
pub const GEOM_TOL: f64 = 1e-9;
/// Tolerance for matrix normalization.
pub const NORM_TOL: f64 = 1e-12;

/// Euclidean vector in model coordinates.
pub type Vec2 = [f64; 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("point must lie in the upper half-plane (got y = {0})")]
    NotInHalfPlane(f64),
    #[error("matrix determinant {0} is not positive")]
    BadDeterminant(f64),
    #[error("element is not hyperbolic (|trace| = {0})")]
    NotHyperbolic(f64),
    #[error("geodesic endpoints coincide")]
    DegenerateLine,
    #[error("lines have identical endpoint sets")]
    IdenticalLines,
    #[error("tangent vector is degenerate")]
    DegenerateTangent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, GeomError> {
        if y > 0.0 && y.is_finite() && x.is_finite() {
            Ok(HPoint { x, y })
        } else {
            Err(GeomError::NotInHalfPlane(y))
        }
    }

    /// The point i.
    pub fn i() -> Self {
        HPoint { x: 0.0, y: 1.0 }
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A point on the boundary circle R ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ideal {
    Finite(f64),
    Infinity,
}

impl Ideal {
    /// Closeness on the boundary: relative for finite values, with large
    /// magnitudes treated as near ∞.
    pub fn close_to(&self, other: &Ideal) -> bool {
        match (*self, *other) {
            (Ideal::Infinity, Ideal::Infinity) => true,
            (Ideal::Infinity, Ideal::Finite(x)) | (Ideal::Finite(x), Ideal::Infinity) => {
                x.abs() > 1.0 / GEOM_TOL
            }
            (Ideal::Finite(a), Ideal::Finite(b)) => {
                (a - b).abs() <= GEOM_TOL * (1.0 + a.abs().max(b.abs()))
            }
        }
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ideal::Finite(x) => write!(f, "{x}"),
            Ideal::Infinity => write!(f, "inf"),
        }
    }
}

/// Element of PSL2(R), stored with determinant 1 and canonical sign
/// (first entry of magnitude above `NORM_TOL` is positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Isometry {
    /// Builds an isometry from any matrix of positive determinant,
    /// rescaling to determinant 1.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, GeomError> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(GeomError::BadDeterminant(det));
        }
        let s = det.sqrt();
        Ok(Isometry { a: a / s, b: b / s, c: c / s, d: d / s }.canonical())
    }

    pub fn identity() -> Self {
        Isometry { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// Diagonal element translating along the imaginary axis by `t`.
    pub fn translation(t: f64) -> Self {
        Isometry { a: (t / 2.0).exp(), b: 0.0, c: 0.0, d: (-t / 2.0).exp() }
    }

    /// Counter-clockwise rotation about i by angle `theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Isometry { a: c, b: s, c: -s, d: c }.canonical()
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn canonical(self) -> Self {
        let first = self.entries().into_iter().find(|x| x.abs() > NORM_TOL).unwrap_or(1.0);
        if first < 0.0 {
            Isometry { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            self
        }
    }

    /// Rescales to determinant exactly 1 (up to rounding).
    pub fn renormalized(self) -> Self {
        let s = self.det().sqrt();
        Isometry { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }.canonical()
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, o: &Isometry) -> Isometry {
        Isometry {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .canonical()
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { a: self.d, b: -self.b, c: -self.c, d: self.a }.canonical()
    }

    /// Integer power; negative exponents use the inverse.
    pub fn pow(&self, n: i64) -> Isometry {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut acc = Isometry::identity();
        for _ in 0..n.unsigned_abs() {
            acc = acc.compose(&base);
        }
        acc
    }

    /// Entrywise distance in PSL2, minimized over the sign ambiguity.
    pub fn matrix_distance(&self, o: &Isometry) -> f64 {
        let p = self.entries();
        let q = o.entries();
        let plus = (0..4).map(|k| (p[k] - q[k]).abs()).fold(0.0, f64::max);
        let minus = (0..4).map(|k| (p[k] + q[k]).abs()).fold(0.0, f64::max);
        plus.min(minus)
    }

    pub fn apply_ideal(&self, x: Ideal) -> Ideal {
        match x {
            Ideal::Infinity => {
                if self.c == 0.0 {
                    Ideal::Infinity
                } else {
                    Ideal::Finite(self.a / self.c)
                }
            }
            Ideal::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    Ideal::Infinity
                } else {
                    Ideal::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// Pushes a tangent vector at `z` forward by the derivative 1/(cz+d)².
    pub fn push_tangent(&self, z: HPoint, v: Vec2) -> Vec2 {
        let (re, im) = (self.c * z.x + self.d, self.c * z.y);
        // (re + i im)^2
        let (sr, si) = (re * re - im * im, 2.0 * re * im);
        let n = sr * sr + si * si;
        let (ir, ii) = (sr / n, -si / n);
        [v[0] * ir - v[1] * ii, v[0] * ii + v[1] * ir]
    }

    pub fn apply_line(&self, l: &GeodesicLine) -> GeodesicLine {
        GeodesicLine { p_minus: self.apply_ideal(l.p_minus), p_plus: self.apply_ideal(l.p_plus) }
    }
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Oriented complete geodesic, running from `p_minus` to `p_plus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicLine {
    pub p_minus: Ideal,
    pub p_plus: Ideal,
}

impl GeodesicLine {
    pub fn new(p_minus: Ideal, p_plus: Ideal) -> Result<Self, GeomError> {
        if p_minus == p_plus {
            return Err(GeomError::DegenerateLine);
        }
        Ok(GeodesicLine { p_minus, p_plus })
    }

    pub fn reversed(&self) -> Self {
        GeodesicLine { p_minus: self.p_plus, p_plus: self.p_minus }
    }

    /// Same endpoint set (orientation ignored), within tolerance.
    pub fn same_endpoints(&self, o: &GeodesicLine) -> bool {
        (self.p_minus.close_to(&o.p_minus) && self.p_plus.close_to(&o.p_plus))
            || (self.p_minus.close_to(&o.p_plus) && self.p_plus.close_to(&o.p_minus))
    }

    /// Unit tangent of the oriented line at a point `p` lying on it.
    pub fn tangent_at(&self, p: HPoint) -> Vec2 {
        direction_to_ideal(p, self.p_plus)
    }

    /// An isometry S of determinant 1 with S(p_minus) = 0 and S(p_plus) = ∞,
    /// so the line becomes the upward imaginary axis.
    pub fn standard_frame(&self) -> Isometry {
        let m = match (self.p_minus, self.p_plus) {
            (Ideal::Finite(a), Ideal::Finite(b)) => {
                if a > b {
                    let s = (a - b).sqrt();
                    Isometry { a: 1.0 / s, b: -a / s, c: 1.0 / s, d: -b / s }
                } else {
                    let s = (b - a).sqrt();
                    Isometry { a: -1.0 / s, b: a / s, c: 1.0 / s, d: -b / s }
                }
            }
            (Ideal::Finite(a), Ideal::Infinity) => Isometry { a: 1.0, b: -a, c: 0.0, d: 1.0 },
            (Ideal::Infinity, Ideal::Finite(b)) => Isometry { a: 0.0, b: -1.0, c: 1.0, d: -b },
            (Ideal::Infinity, Ideal::Infinity) => Isometry::identity(),
        };
        m.canonical()
    }

    /// Signed arclength coordinate of a point on the line: the height
    /// logarithm in the standard frame.
    pub fn coordinate(&self, frame: &Isometry, p: HPoint) -> f64 {
        mobius_apply(frame, p).y.ln()
    }
}

impl fmt::Display for GeodesicLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} -> {})", self.p_minus, self.p_plus)
    }
}

/// A tangent vector based at a point of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: HPoint,
    pub dir: Vec2,
}

/// Common perpendicular between two disjoint geodesic lines.
/// `dir1` leaves `foot1` toward `foot2`; `dir2` is the arrival direction
/// at `foot2`, pointing away from `foot1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerpSegment {
    pub length: f64,
    pub foot1: HPoint,
    pub foot2: HPoint,
    pub dir1: Vec2,
    pub dir2: Vec2,
}

/// Orthogonal projection of a point onto a line. `dir_at_foot` points from
/// the foot toward the point and is `None` when the point lies on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub length: f64,
    pub foot: HPoint,
    pub dir_at_foot: Option<Vec2>,
}

pub fn mobius_apply(g: &Isometry, z: HPoint) -> HPoint {
    let (dr, di) = (g.c * z.x + g.d, g.c * z.y);
    let n = dr * dr + di * di;
    let (nr, ni) = (g.a * z.x + g.b, g.a * z.y);
    HPoint { x: (nr * dr + ni * di) / n, y: z.y * g.det() / n }
}

pub fn dist(p: HPoint, q: HPoint) -> f64 {
    let e = (p.x - q.x).hypot(p.y - q.y);
    2.0 * (e / (2.0 * (p.y * q.y).sqrt())).asinh()
}

/// dist(o, g·o).
pub fn displacement(g: &Isometry, o: HPoint) -> f64 {
    dist(o, mobius_apply(g, o))
}

fn normalize(v: Vec2) -> Vec2 {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Unit tangent at `p` of the geodesic toward the point `q`.
pub fn direction_to_point(p: HPoint, q: HPoint) -> Vec2 {
    // z ↦ (z - p.x)/p.y is a Euclidean similarity sending p to i; the
    // geodesic from i to u+iv has initial direction ∝ (2u, u²+v²-1).
    let u = (q.x - p.x) / p.y;
    let v = q.y / p.y;
    normalize([2.0 * u, u * u + (v - 1.0) * (v + 1.0)])
}

/// Unit tangent at `p` of the geodesic ray toward an ideal point.
pub fn direction_to_ideal(p: HPoint, x: Ideal) -> Vec2 {
    match x {
        Ideal::Infinity => [0.0, 1.0],
        Ideal::Finite(x) => {
            let u = (x - p.x) / p.y;
            normalize([2.0 * u, u * u - 1.0])
        }
    }
}

/// Fixed geodesic of a hyperbolic element, oriented from the repelling to
/// the attracting fixed point.
pub fn axis(g: &Isometry) -> Result<GeodesicLine, GeomError> {
    let tr = g.trace();
    if tr.abs() <= 2.0 {
        return Err(GeomError::NotHyperbolic(tr.abs()));
    }
    // Products of generators leave rounding noise in c where the exact
    // axis ends at ∞; snapping keeps its lifts accurate.
    let scale = g.a.abs().max(g.b.abs()).max(g.d.abs()).max(1.0);
    if g.c.abs() <= 1e-13 * scale {
        let fin = Ideal::Finite(g.b / (g.d - g.a));
        return Ok(if g.a.abs() > g.d.abs() {
            GeodesicLine { p_minus: fin, p_plus: Ideal::Infinity }
        } else {
            GeodesicLine { p_minus: Ideal::Infinity, p_plus: fin }
        });
    }
    // Roots of c z² + (d - a) z - b = 0, computed without cancellation.
    let bq = g.d - g.a;
    let disc = (tr * tr - 4.0).sqrt();
    let sg = if bq >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (bq + sg * disc);
    let r1 = q / g.c;
    let r2 = -g.b / q;
    let attracting = |z: f64| (g.c * z + g.d).abs() > 1.0;
    let (rep, att) = if attracting(r1) { (r2, r1) } else { (r1, r2) };
    Ok(GeodesicLine { p_minus: Ideal::Finite(rep), p_plus: Ideal::Finite(att) })
}

pub fn translation_length(g: &Isometry) -> Result<f64, GeomError> {
    let t = g.trace().abs();
    if t <= 2.0 {
        return Err(GeomError::NotHyperbolic(t));
    }
    Ok(2.0 * (t / 2.0).acosh())
}

/// Cross ratio ((a1-a2)(b1-b2))/((a1-b2)(b1-a2)) with factors involving ∞
/// cancelled. Evaluates bit-identically when the two lines are swapped.
fn cross_ratio(l1: &GeodesicLine, l2: &GeodesicLine) -> f64 {
    let diff = |u: Ideal, v: Ideal| match (u, v) {
        (Ideal::Finite(x), Ideal::Finite(y)) => Some(x - y),
        _ => None,
    };
    let f = [
        diff(l1.p_minus, l2.p_minus),
        diff(l1.p_plus, l2.p_plus),
        diff(l1.p_minus, l2.p_plus),
        diff(l1.p_plus, l2.p_minus),
    ];
    let num = f[0].unwrap_or(1.0) * f[1].unwrap_or(1.0);
    let den = f[2].unwrap_or(1.0) * f[3].unwrap_or(1.0);
    num / den
}

pub fn common_perpendicular(
    l1: &GeodesicLine,
    l2: &GeodesicLine,
) -> Result<Option<PerpSegment>, GeomError> {
    if l1.same_endpoints(l2) {
        return Err(GeomError::IdenticalLines);
    }
    let shares = [l2.p_minus, l2.p_plus]
        .iter()
        .any(|p| p.close_to(&l1.p_minus) || p.close_to(&l1.p_plus));
    if shares {
        return Ok(None);
    }
    let cr = cross_ratio(l1, l2);
    if !(cr > 0.0) || !cr.is_finite() {
        return Ok(None);
    }
    let r = cr.min(1.0 / cr);
    let length = 2.0 * r.sqrt().atanh();
    if !(length > GEOM_TOL) || !length.is_finite() {
        return Ok(None);
    }
    let s = l1.standard_frame();
    let s_inv = s.inverse();
    let (x1, x2) = match (s.apply_ideal(l2.p_minus), s.apply_ideal(l2.p_plus)) {
        (Ideal::Finite(x1), Ideal::Finite(x2)) => (x1, x2),
        _ => return Ok(None),
    };
    if x1 * x2 <= 0.0 {
        return Ok(None);
    }
    let rho2 = x1 * x2;
    let fx = 2.0 * x1 * x2 / (x1 + x2);
    let fy = (rho2 - fx * fx).max(0.0).sqrt();
    let foot1 = mobius_apply(&s_inv, HPoint { x: 0.0, y: rho2.sqrt() });
    let foot2 = mobius_apply(&s_inv, HPoint { x: fx, y: fy });
    let dir1 = direction_to_point(foot1, foot2);
    let back = direction_to_point(foot2, foot1);
    Ok(Some(PerpSegment { length, foot1, foot2, dir1, dir2: [-back[0], -back[1]] }))
}

pub fn point_to_line(p: HPoint, l: &GeodesicLine) -> Projection {
    let s = l.standard_frame();
    let z = mobius_apply(&s, p);
    let length = (z.x.abs() / z.y).asinh();
    let foot = mobius_apply(&s.inverse(), HPoint { x: 0.0, y: z.x.hypot(z.y) });
    let dir_at_foot = if length < NORM_TOL { None } else { Some(direction_to_point(foot, p)) };
    Projection { length, foot, dir_at_foot }
}

/// Sign of det[v | tangent of L] at the base point of `v`: +1 iff
/// (v, L') is a positively oriented frame.
pub fn side_sign(l: &GeodesicLine, v: &TangentVector) -> Result<i8, GeomError> {
    let n = v.dir[0].hypot(v.dir[1]);
    if !(n >= NORM_TOL) {
        return Err(GeomError::DegenerateTangent);
    }
    let t = l.tangent_at(v.base);
    let det = v.dir[0] * t[1] - v.dir[1] * t[0];
    Ok(if det >= 0.0 { 1 } else { -1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> HPoint {
        HPoint::new(x, y).unwrap()
    }

    fn line(a: f64, b: f64) -> GeodesicLine {
        GeodesicLine::new(Ideal::Finite(a), Ideal::Finite(b)).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn mobius_examples() {
        let z = mobius_apply(&Isometry::identity(), pt(0.0, 1.0));
        assert_eq!(z, pt(0.0, 1.0));
        let z = mobius_apply(&Isometry::new(1.0, 1.0, 0.0, 1.0).unwrap(), pt(0.0, 1.0));
        assert!(close(z.x, 1.0, 1e-15) && close(z.y, 1.0, 1e-15));
        let z = mobius_apply(&Isometry::new(0.0, -1.0, 1.0, 0.0).unwrap(), pt(0.0, 2.0));
        assert!(close(z.x, 0.0, 1e-15) && close(z.y, 0.5, 1e-15));
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist(pt(0.0, 1.0), pt(0.0, 1.0)), 0.0);
        assert!(close(dist(pt(0.0, 1.0), pt(0.0, 4.0)), 4f64.ln(), 1e-14));
        assert!(close(dist(pt(0.0, 1.0), pt(1.0, 1.0)), 1.5f64.acosh(), 1e-14));
        assert!(close(1.5f64.acosh(), 0.962424, 1e-6));
    }

    #[test]
    fn dist_matches_shooting_oracle() {
        // Independent oracle: length of the Euclidean-circle arc through
        // both points, integrated numerically with ds = |dz|/y.
        let (p, q) = (pt(0.0, 1.0), pt(1.0, 1.0));
        let c = 0.5;
        let r = (p.x - c).hypot(p.y);
        let (t0, t1) = ((p.y).atan2(p.x - c), (q.y).atan2(q.x - c));
        let n = 200_000;
        let mut s = 0.0;
        for k in 0..n {
            let t = t0 + (t1 - t0) * (k as f64 + 0.5) / n as f64;
            s += r * (t1 - t0).abs() / n as f64 / (r * t.sin());
        }
        assert!(close(s, dist(p, q), 1e-8));
    }

    #[test]
    fn axis_examples() {
        let g = Isometry::new(2.0, 0.0, 0.0, 0.5).unwrap();
        let l = axis(&g).unwrap();
        assert_eq!(l, GeodesicLine { p_minus: Ideal::Finite(0.0), p_plus: Ideal::Infinity });
        let g = Isometry::new(0.5, 0.0, 0.0, 2.0).unwrap();
        let l = axis(&g).unwrap();
        assert_eq!(l, GeodesicLine { p_minus: Ideal::Infinity, p_plus: Ideal::Finite(0.0) });
        let g = Isometry::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(axis(&g), Err(GeomError::NotHyperbolic(_))));
    }

    #[test]
    fn translation_length_examples() {
        let g = Isometry::new(2.0, 0.0, 0.0, 0.5).unwrap();
        assert!(close(translation_length(&g).unwrap(), 4f64.ln(), 1e-14));
        assert!(translation_length(&Isometry::identity()).is_err());
        let g = Isometry::new(3.0, 0.0, 0.0, 1.0 / 3.0).unwrap();
        assert!(close(translation_length(&g).unwrap(), 9f64.ln(), 1e-14));
    }

    #[test]
    fn perpendicular_examples() {
        let p = common_perpendicular(&line(-1.0, 1.0), &line(-3.0, 3.0)).unwrap().unwrap();
        assert!(close(p.length, 3f64.ln(), 1e-12));
        assert!(close(p.foot1.x, 0.0, 1e-12) && close(p.foot1.y, 1.0, 1e-12));
        assert!(close(p.foot2.x, 0.0, 1e-12) && close(p.foot2.y, 3.0, 1e-12));
        let up = GeodesicLine::new(Ideal::Finite(0.0), Ideal::Infinity).unwrap();
        assert_eq!(common_perpendicular(&up, &line(-1.0, 1.0)).unwrap(), None);
        assert_eq!(common_perpendicular(&up, &line(0.0, 5.0)).unwrap(), None);
        assert_eq!(common_perpendicular(&up, &up.reversed()), Err(GeomError::IdenticalLines));
    }

    #[test]
    fn projection_examples() {
        let up = GeodesicLine::new(Ideal::Finite(0.0), Ideal::Infinity).unwrap();
        let pr = point_to_line(pt(0.0, 2.0), &up);
        assert_eq!(pr.length, 0.0);
        assert!(close(pr.foot.y, 2.0, 1e-15));
        assert!(pr.dir_at_foot.is_none());

        let pr = point_to_line(pt(0.0, 2.0), &line(-1.0, 1.0));
        assert!(close(pr.length, 2f64.ln(), 1e-12));
        assert!(close(pr.foot.x, 0.0, 1e-12) && close(pr.foot.y, 1.0, 1e-12));
        let d = pr.dir_at_foot.unwrap();
        assert!(close(d[0], 0.0, 1e-12) && close(d[1], 1.0, 1e-12));

        let pr = point_to_line(pt(1.0, 1.0), &up);
        assert!(close(pr.length, 1f64.asinh(), 1e-12));
        assert!(close(pr.foot.x, 0.0, 1e-12) && close(pr.foot.y, 2f64.sqrt(), 1e-12));
        let d = pr.dir_at_foot.unwrap();
        assert!(d[0] > 0.0);
    }

    #[test]
    fn projection_matches_minimization_oracle() {
        // Independent oracle: golden-section minimization of the distance
        // over the arclength parameter of the semicircle (-1, 1).
        let p = pt(0.7, 0.4);
        let on_line = |t: f64| pt(t.tanh(), 1.0 / t.cosh());
        let (mut lo, mut hi) = (-20.0f64, 20.0f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if dist(p, on_line(m1)) < dist(p, on_line(m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let best = on_line(0.5 * (lo + hi));
        let pr = point_to_line(p, &line(-1.0, 1.0));
        assert!(close(pr.length, dist(p, best), 1e-9));
        assert!(close(pr.foot.x, best.x, 1e-6) && close(pr.foot.y, best.y, 1e-6));
    }

    #[test]
    fn side_sign_examples() {
        let up = GeodesicLine::new(Ideal::Finite(0.0), Ideal::Infinity).unwrap();
        let at = |dir| TangentVector { base: HPoint::i(), dir };
        assert_eq!(side_sign(&up, &at([-1.0, 0.0])).unwrap(), -1);
        assert_eq!(side_sign(&up, &at([1.0, 0.0])).unwrap(), 1);
        assert_eq!(side_sign(&up, &at([0.0, 0.0])), Err(GeomError::DegenerateTangent));
    }

    fn arb_isometry() -> impl Strategy<Value = Isometry> {
        (0.0..std::f64::consts::TAU, -3.0..3.0f64, 0.0..std::f64::consts::TAU).prop_map(
            |(t1, s, t2)| {
                Isometry::rotation(t1)
                    .compose(&Isometry::translation(s))
                    .compose(&Isometry::rotation(t2))
            },
        )
    }

    fn arb_point() -> impl Strategy<Value = HPoint> {
        (-3.0..3.0f64, 0.1..4.0f64).prop_map(|(x, y)| pt(x, y))
    }

    fn arb_line() -> impl Strategy<Value = GeodesicLine> {
        (-5.0..5.0f64, 0.05..5.0f64, any::<bool>()).prop_map(|(a, w, flip)| {
            let l = line(a, a + w);
            if flip {
                l.reversed()
            } else {
                l
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn distance_is_isometry_invariant(g in arb_isometry(), p in arb_point(), q in arb_point()) {
            let d0 = dist(p, q);
            let d1 = dist(mobius_apply(&g, p), mobius_apply(&g, q));
            prop_assert!((d0 - d1).abs() <= 1e-9 * (1.0 + d0));
        }
    }

    proptest! {
        #[test]
        fn triangle_inequality(p in arb_point(), q in arb_point(), r in arb_point()) {
            prop_assert!(dist(p, r) <= dist(p, q) + dist(q, r) + 1e-12);
            prop_assert_eq!(dist(p, q), dist(q, p));
        }

        #[test]
        fn perpendicular_is_symmetric(l1 in arb_line(), l2 in arb_line()) {
            if let (Ok(a), Ok(b)) = (common_perpendicular(&l1, &l2), common_perpendicular(&l2, &l1)) {
                prop_assert_eq!(a.is_some(), b.is_some());
                if let (Some(a), Some(b)) = (a, b) {
                    prop_assert_eq!(a.length, b.length);
                    prop_assert!(dist(a.foot1, b.foot2) < 1e-8);
                    prop_assert!(dist(a.foot2, b.foot1) < 1e-8);
                }
            }
        }

        #[test]
        fn perpendicular_is_orthogonal(l1 in arb_line(), l2 in arb_line()) {
            if let Ok(Some(p)) = common_perpendicular(&l1, &l2) {
                prop_assume!(p.length > 1e-3 && p.length < 8.0);
                prop_assert!((dist(p.foot1, p.foot2) - p.length).abs() < 1e-9);
                let t1 = l1.tangent_at(p.foot1);
                let t2 = l2.tangent_at(p.foot2);
                prop_assert!((t1[0] * p.dir1[0] + t1[1] * p.dir1[1]).abs() < 1e-9);
                prop_assert!((t2[0] * p.dir2[0] + t2[1] * p.dir2[1]).abs() < 1e-9);
            }
        }

        #[test]
        fn translation_length_is_min_displacement(g in arb_isometry(), t in -2.0..2.0f64) {
            prop_assume!(g.trace().abs() > 2.05);
            let l = axis(&g).unwrap();
            let s = l.standard_frame().inverse();
            let z = mobius_apply(&s, pt(0.0, t.exp()));
            let tl = translation_length(&g).unwrap();
            prop_assert!((dist(z, mobius_apply(&g, z)) - tl).abs() < 1e-9 * (1.0 + tl));
            // g moves points of its axis toward p_plus.
            let gz = mobius_apply(&s.inverse(), mobius_apply(&g, z));
            prop_assert!(gz.y > t.exp());
        }

        #[test]
        fn side_sign_is_isometry_invariant(g in arb_isometry(), l in arb_line(), t in -2.0..2.0f64, left in any::<bool>()) {
            let s = l.standard_frame().inverse();
            let base = mobius_apply(&s, pt(0.0, t.exp()));
            let tan = l.tangent_at(base);
            let v = if left { [-tan[1], tan[0]] } else { [tan[1], -tan[0]] };
            let before = side_sign(&l, &TangentVector { base, dir: v }).unwrap();
            let gl = g.apply_line(&l);
            let moved = TangentVector { base: mobius_apply(&g, base), dir: g.push_tangent(base, v) };
            prop_assert_eq!(before, side_sign(&gl, &moved).unwrap());
            prop_assert_eq!(before, if left { -1 } else { 1 });
        }
    }
}
