//! Plane-geometry primitives shared by the front-tracking and planning modules:
//! vectors, polygon measures, convex hulls, intersection tests, and enclosing discs.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// A point or displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product `self × o`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction; `None` for (near-)zero input.
    pub fn unit(self) -> Option<Vec2> {
        let n = self.norm();
        if n < 1e-300 {
            None
        } else {
            Some(self / n)
        }
    }

    /// Counterclockwise rotation by 90 degrees (the left normal of a direction).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Signed area of the polygon with the given vertices (shoelace formula).
/// Positive for counterclockwise orientation.
pub fn polygon_signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        acc += a.cross(b);
    }
    0.5 * acc
}

/// Length of the polyline through the vertices; the closing edge is included
/// when `closed` is set.
pub fn polyline_length(pts: &[Vec2], closed: bool) -> f64 {
    let n = pts.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n - 1 {
        acc += pts[i].dist(pts[i + 1]);
    }
    if closed {
        acc += pts[n - 1].dist(pts[0]);
    }
    acc
}

/// Centroid of the polygon vertices (vertex average, adequate for seeding
/// searches; not the area centroid).
pub fn vertex_centroid(pts: &[Vec2]) -> Vec2 {
    let mut c = Vec2::ZERO;
    for &p in pts {
        c = c + p;
    }
    c / (pts.len().max(1) as f64)
}

/// Signed curvature of the circumscribed circle through three consecutive
/// vertices (Menger curvature). Positive when the triple turns left, which on a
/// counterclockwise curve means the enclosed set is locally convex. Collinear
/// triples (within 1e-12 of zero area) report zero.
pub fn signed_curvature_triple(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let ab = b - a;
    let bc = c - b;
    let ac = c - a;
    let denom = ab.norm() * bc.norm() * ac.norm();
    if denom < 1e-300 {
        return 0.0;
    }
    let twice_area = ab.cross(bc);
    if twice_area.abs() / denom < 1e-12 {
        return 0.0;
    }
    2.0 * twice_area / denom
}

/// Center and radius of the circle through three non-collinear points.
pub fn circumcircle(a: Vec2, b: Vec2, c: Vec2) -> Option<(Vec2, f64)> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d.abs() < 1e-300 {
        return None;
    }
    let a2 = a.norm2();
    let b2 = b.norm2();
    let c2 = c.norm2();
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let center = Vec2::new(ux, uy);
    Some((center, center.dist(a)))
}

/// Convex hull of a point set in counterclockwise order (monotone chain).
/// Collinear points on the hull boundary are dropped.
pub fn convex_hull(pts: &[Vec2]) -> Vec<Vec2> {
    let mut p: Vec<Vec2> = pts.to_vec();
    p.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    p.dedup_by(|a, b| a.dist(*b) < 1e-12);
    let n = p.len();
    if n < 3 {
        return p;
    }
    let turns_right = |chain: &[Vec2], pt: Vec2| {
        let a = chain[chain.len() - 2];
        let b = chain[chain.len() - 1];
        (b - a).cross(pt - a) <= 1e-12
    };
    let mut lower: Vec<Vec2> = Vec::new();
    for &pt in &p {
        while lower.len() >= 2 && turns_right(&lower, pt) {
            lower.pop();
        }
        lower.push(pt);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for &pt in p.iter().rev() {
        while upper.len() >= 2 && turns_right(&upper, pt) {
            upper.pop();
        }
        upper.push(pt);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Distance from `p` to the segment `[a, b]`.
pub fn dist_point_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 < 1e-300 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Closest point on the segment `[a, b]` to `p`.
pub fn project_point_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 < 1e-300 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Whether open segments `(a,b)` and `(c,d)` properly cross (shared endpoints
/// do not count).
pub fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// Intersection point of the (infinite) lines through `a,b` and `c,d`.
pub fn line_intersection(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> Option<Vec2> {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    if denom.abs() < 1e-300 {
        return None;
    }
    let t = (c - a).cross(s) / denom;
    Some(a + r * t)
}

/// Self-intersection test for a closed or open polyline. Non-adjacent segment
/// pairs are compared after an x-interval sweep prunes distant pairs.
pub fn polyline_self_intersects(pts: &[Vec2], closed: bool) -> bool {
    let n = pts.len();
    if n < 4 {
        return false;
    }
    let m = if closed { n } else { n - 1 };
    // Segment i spans pts[i] to pts[(i+1) % n].
    let seg = |i: usize| (pts[i], pts[(i + 1) % n]);
    let mut order: Vec<usize> = (0..m).collect();
    let min_x = |i: usize| {
        let (a, b) = seg(i);
        a.x.min(b.x)
    };
    let max_x = |i: usize| {
        let (a, b) = seg(i);
        a.x.max(b.x)
    };
    order.sort_by(|&i, &j| min_x(i).partial_cmp(&min_x(j)).unwrap());
    for (idx, &i) in order.iter().enumerate() {
        let hi = max_x(i);
        for &j in order.iter().skip(idx + 1) {
            if min_x(j) > hi {
                break;
            }
            let adjacent = (i + 1) % m == j || (j + 1) % m == i || i == j;
            if adjacent {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_cross(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Crossing-number point-in-polygon test (boundary points count as inside).
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if dist_point_segment(p, poly[i], poly[(i + 1) % n]) < 1e-12 {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x_cross = pi.x + (p.y - pi.y) / (pj.y - pi.y) * (pj.x - pi.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Smallest disc enclosing all points: Welzl's move-to-front algorithm run in
/// input order (deterministic; no randomization so repeated runs are
/// byte-stable downstream).
pub fn smallest_enclosing_disc(pts: &[Vec2]) -> (Vec2, f64) {
    fn disc2(a: Vec2, b: Vec2) -> (Vec2, f64) {
        let c = (a + b) * 0.5;
        (c, c.dist(a))
    }
    fn in_disc(p: Vec2, d: (Vec2, f64)) -> bool {
        p.dist(d.0) <= d.1 * (1.0 + 1e-10) + 1e-14
    }
    let mut pts: Vec<Vec2> = pts.to_vec();
    if pts.is_empty() {
        return (Vec2::ZERO, 0.0);
    }
    if pts.len() == 1 {
        return (pts[0], 0.0);
    }
    let mut d = disc2(pts[0], pts[1]);
    for i in 2..pts.len() {
        if in_disc(pts[i], d) {
            continue;
        }
        // pts[i] is on the boundary of the new disc.
        d = disc2(pts[0], pts[i]);
        for j in 1..i {
            if in_disc(pts[j], d) {
                continue;
            }
            d = disc2(pts[i], pts[j]);
            for k in 0..j {
                if in_disc(pts[k], d) {
                    continue;
                }
                d = circumcircle(pts[i], pts[j], pts[k])
                    .unwrap_or_else(|| disc2(pts[i], pts[k]));
            }
        }
        pts.swap(0, i);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn circle(n: usize, r: f64, c: Vec2) -> Vec<Vec2> {
        (0..n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                c + Vec2::new(th.cos(), th.sin()) * r
            })
            .collect()
    }

    #[test]
    fn shoelace_unit_square() {
        let sq = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert_relative_eq!(polygon_signed_area(&sq), 1.0);
        assert_relative_eq!(polyline_length(&sq, true), 4.0);
    }

    #[test]
    fn circle_measures_converge() {
        let c = circle(512, 1.0, Vec2::ZERO);
        assert_relative_eq!(polygon_signed_area(&c), std::f64::consts::PI, epsilon = 1e-3);
        assert_relative_eq!(
            polyline_length(&c, true),
            2.0 * std::f64::consts::PI,
            epsilon = 1e-3
        );
    }

    #[test]
    fn menger_curvature_of_circle_triples() {
        let c = circle(256, 2.0, Vec2::new(0.3, -0.7));
        for i in 1..255 {
            let k = signed_curvature_triple(c[i - 1], c[i], c[i + 1]);
            assert_relative_eq!(k, 0.5, epsilon = 1e-6);
        }
    }

    #[test]
    fn curvature_sign_flips_with_orientation() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(1.0, 0.0);
        let c = Vec2::new(2.0, 1.0);
        assert!(signed_curvature_triple(a, b, c) > 0.0);
        assert!(signed_curvature_triple(c, b, a) < 0.0);
    }

    #[test]
    fn collinear_triple_reports_zero() {
        let k = signed_curvature_triple(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(2.0, 2.0),
        );
        assert_eq!(k, 0.0);
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let mut pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ];
        for i in 0..20 {
            let t = i as f64 / 20.0;
            pts.push(Vec2::new(0.5 + t, 0.5 + 0.8 * t));
        }
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert_relative_eq!(polygon_signed_area(&hull), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn self_intersection_detects_bowtie() {
        let bowtie = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(polyline_self_intersects(&bowtie, true));
        let square = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(!polyline_self_intersects(&square, true));
    }

    #[test]
    fn point_in_polygon_square() {
        let sq = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(point_in_polygon(Vec2::new(0.5, 0.5), &sq));
        assert!(point_in_polygon(Vec2::new(0.0, 0.5), &sq));
        assert!(!point_in_polygon(Vec2::new(1.5, 0.5), &sq));
    }

    #[test]
    fn enclosing_disc_of_circle_samples() {
        let c = circle(128, 3.0, Vec2::new(1.0, 2.0));
        let (center, r) = smallest_enclosing_disc(&c);
        assert_relative_eq!(center.x, 1.0, epsilon = 1e-6);
        assert_relative_eq!(center.y, 2.0, epsilon = 1e-6);
        assert_relative_eq!(r, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn enclosing_disc_of_two_points() {
        let (c, r) = smallest_enclosing_disc(&[Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)]);
        assert_relative_eq!(c.norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(r, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn circumcircle_radius() {
        let (c, r) = circumcircle(
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.0, 0.0),
        )
        .unwrap();
        assert_relative_eq!(c.norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(r, 1.0, epsilon = 1e-12);
    }
}
