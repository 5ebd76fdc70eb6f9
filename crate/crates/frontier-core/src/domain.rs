//! Island domains: the bounded windows inside which constrained control takes
//! place. A domain is a disc centered at the origin or a simple
//! counterclockwise polygon; its boundary carries an arclength parameter used
//! to attach open front curves.

use crate::geom::{
    dist_point_segment, point_in_polygon, polygon_signed_area, polyline_length,
    polyline_self_intersects, project_point_segment, Vec2,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("invalid domain: {0}")]
    Invalid(String),
}

/// A bounded planar window ("island") for constrained control problems.
#[derive(Debug, Clone)]
pub enum Domain {
    /// Disc of the given radius centered at the origin.
    Disc { radius: f64 },
    /// Simple polygon with counterclockwise vertices.
    Polygon { pts: Vec<Vec2> },
}

impl Domain {
    pub fn disc(radius: f64) -> Result<Domain, DomainError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(DomainError::Invalid(format!("disc radius {radius} must be positive")));
        }
        Ok(Domain::Disc { radius })
    }

    pub fn polygon(pts: Vec<Vec2>) -> Result<Domain, DomainError> {
        if pts.len() < 3 {
            return Err(DomainError::Invalid("polygon needs at least 3 vertices".into()));
        }
        if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(DomainError::Invalid("polygon has non-finite vertices".into()));
        }
        if polyline_self_intersects(&pts, true) {
            return Err(DomainError::Invalid("polygon is self-intersecting".into()));
        }
        let area = polygon_signed_area(&pts);
        if area <= 0.0 {
            return Err(DomainError::Invalid(format!(
                "polygon must be counterclockwise with positive area (signed area {area})"
            )));
        }
        Ok(Domain::Polygon { pts })
    }

    /// Regular-polygon approximation of an axis-aligned ellipse with the
    /// given semi-axes, sampled at uniform parameter angles.
    pub fn ellipse_polygon(a: f64, b: f64, n: usize) -> Result<Domain, DomainError> {
        if !(a > 0.0 && b > 0.0) {
            return Err(DomainError::Invalid("ellipse semi-axes must be positive".into()));
        }
        let n = n.max(8);
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Vec2::new(a * t.cos(), b * t.sin())
            })
            .collect();
        Domain::polygon(pts)
    }

    pub fn area(&self) -> f64 {
        match self {
            Domain::Disc { radius } => std::f64::consts::PI * radius * radius,
            Domain::Polygon { pts } => polygon_signed_area(pts),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Domain::Disc { radius } => 2.0 * std::f64::consts::PI * radius,
            Domain::Polygon { pts } => polyline_length(pts, true),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Disc { radius } => 2.0 * radius,
            Domain::Polygon { pts } => {
                let mut best: f64 = 0.0;
                for (i, p) in pts.iter().enumerate() {
                    for q in pts.iter().skip(i + 1) {
                        best = best.max(p.dist(*q));
                    }
                }
                best
            }
        }
    }

    /// Whether every interior angle turns left (counterclockwise convexity).
    pub fn is_convex(&self) -> bool {
        match self {
            Domain::Disc { .. } => true,
            Domain::Polygon { pts } => {
                let n = pts.len();
                (0..n).all(|i| {
                    let a = pts[i];
                    let b = pts[(i + 1) % n];
                    let c = pts[(i + 2) % n];
                    (b - a).cross(c - b) >= -1e-12 * (b - a).norm() * (c - b).norm()
                })
            }
        }
    }

    /// Signed distance to the boundary: positive inside, negative outside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match self {
            Domain::Disc { radius } => radius - p.norm(),
            Domain::Polygon { pts } => {
                let n = pts.len();
                let mut d = f64::INFINITY;
                for i in 0..n {
                    d = d.min(dist_point_segment(p, pts[i], pts[(i + 1) % n]));
                }
                if point_in_polygon(p, pts) {
                    d
                } else {
                    -d
                }
            }
        }
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        self.signed_distance(p) >= -tol
    }

    /// Nearest boundary point and its arclength parameter.
    pub fn project(&self, p: Vec2) -> (Vec2, f64) {
        match self {
            Domain::Disc { radius } => {
                let u = p.unit().unwrap_or(Vec2::new(1.0, 0.0));
                let q = u * *radius;
                let mut ang = q.y.atan2(q.x);
                if ang < 0.0 {
                    ang += 2.0 * std::f64::consts::PI;
                }
                (q, radius * ang)
            }
            Domain::Polygon { pts } => {
                let n = pts.len();
                let mut best = (f64::INFINITY, Vec2::ZERO, 0.0);
                let mut s0 = 0.0;
                for i in 0..n {
                    let (a, b) = (pts[i], pts[(i + 1) % n]);
                    let q = project_point_segment(p, a, b);
                    let d = p.dist(q);
                    if d < best.0 {
                        best = (d, q, s0 + a.dist(q));
                    }
                    s0 += a.dist(b);
                }
                (best.1, best.2)
            }
        }
    }

    /// Boundary point at the given arclength parameter (wrapped).
    pub fn point_at(&self, s: f64) -> Vec2 {
        let per = self.perimeter();
        let s = s.rem_euclid(per);
        match self {
            Domain::Disc { radius } => {
                let ang = s / radius;
                Vec2::new(radius * ang.cos(), radius * ang.sin())
            }
            Domain::Polygon { pts } => {
                let n = pts.len();
                let mut acc = 0.0;
                for i in 0..n {
                    let (a, b) = (pts[i], pts[(i + 1) % n]);
                    let el = a.dist(b);
                    if s <= acc + el || i == n - 1 {
                        let t = if el > 0.0 { (s - acc) / el } else { 0.0 };
                        return a.lerp(b, t.clamp(0.0, 1.0));
                    }
                    acc += el;
                }
                pts[0]
            }
        }
    }

    /// Unit tangent of the counterclockwise boundary at the given parameter.
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        match self {
            Domain::Disc { radius } => {
                let ang = s.rem_euclid(self.perimeter()) / radius;
                Vec2::new(-ang.sin(), ang.cos())
            }
            Domain::Polygon { pts } => {
                let per = self.perimeter();
                let s = s.rem_euclid(per);
                let n = pts.len();
                let mut acc = 0.0;
                for i in 0..n {
                    let (a, b) = (pts[i], pts[(i + 1) % n]);
                    let el = a.dist(b);
                    if s <= acc + el || i == n - 1 {
                        return (b - a).unit().unwrap_or(Vec2::new(1.0, 0.0));
                    }
                    acc += el;
                }
                Vec2::new(1.0, 0.0)
            }
        }
    }

    /// Boundary sampled counterclockwise from parameter `s0` to `s1`
    /// (wrapping forward), with spacing at most `h`. Both endpoints included.
    pub fn boundary_arc(&self, s0: f64, s1: f64, h: f64) -> Vec<Vec2> {
        let per = self.perimeter();
        let mut span = (s1 - s0).rem_euclid(per);
        if span == 0.0 {
            span = per;
        }
        match self {
            Domain::Disc { .. } => {
                let n = ((span / h).ceil() as usize).max(1);
                (0..=n).map(|i| self.point_at(s0 + span * i as f64 / n as f64)).collect()
            }
            Domain::Polygon { pts } => {
                // Walk edges so polygon corners are reproduced exactly.
                let mut out = vec![self.point_at(s0)];
                let n = pts.len();
                // Vertex parameters.
                let mut vs = Vec::with_capacity(n + 1);
                let mut acc = 0.0;
                for i in 0..n {
                    vs.push(acc);
                    acc += pts[i].dist(pts[(i + 1) % n]);
                }
                let s0m = s0.rem_euclid(per);
                let mut corners: Vec<f64> = vs
                    .iter()
                    .map(|&v| (v - s0m).rem_euclid(per))
                    .filter(|&d| d > 1e-12 && d < span - 1e-12)
                    .collect();
                corners.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut stops = corners;
                stops.push(span);
                let mut prev = 0.0;
                for stop in stops {
                    let seg = stop - prev;
                    let k = ((seg / h).ceil() as usize).max(1);
                    for j in 1..=k {
                        out.push(self.point_at(s0 + prev + seg * j as f64 / k as f64));
                    }
                    prev = stop;
                }
                out
            }
        }
    }

    /// Closed boundary polyline sampled with spacing at most `h`
    /// (counterclockwise, no repeated closing point).
    pub fn boundary_polyline(&self, h: f64) -> Vec<Vec2> {
        let mut pts = self.boundary_arc(0.0, self.perimeter(), h);
        pts.pop();
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_square() -> Domain {
        Domain::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn disc_measures() {
        let d = Domain::disc(2.0).unwrap();
        assert!((d.area() - 4.0 * PI).abs() < 1e-12);
        assert!((d.perimeter() - 4.0 * PI).abs() < 1e-12);
        assert!((d.diameter() - 4.0).abs() < 1e-12);
        assert!(d.contains(Vec2::new(1.9, 0.0), 0.0));
        assert!(!d.contains(Vec2::new(2.1, 0.0), 0.0));
        let (q, s) = d.project(Vec2::new(0.0, -3.0));
        assert!((q - Vec2::new(0.0, -2.0)).norm() < 1e-12);
        assert!((d.point_at(s) - q).norm() < 1e-9);
    }

    #[test]
    fn square_measures_and_param() {
        let sq = unit_square();
        assert!((sq.area() - 1.0).abs() < 1e-12);
        assert!((sq.perimeter() - 4.0).abs() < 1e-12);
        assert!((sq.diameter() - 2f64.sqrt()).abs() < 1e-12);
        assert!(sq.is_convex());
        // Parameter walks the edges counterclockwise from the first vertex.
        assert!((sq.point_at(0.5) - Vec2::new(0.5, 0.0)).norm() < 1e-12);
        assert!((sq.point_at(1.5) - Vec2::new(1.0, 0.5)).norm() < 1e-12);
        assert!((sq.point_at(4.25) - Vec2::new(0.25, 0.0)).norm() < 1e-12);
        let (q, s) = sq.project(Vec2::new(0.5, -1.0));
        assert!((q - Vec2::new(0.5, 0.0)).norm() < 1e-12);
        assert!((s - 0.5).abs() < 1e-12);
        assert!((sq.signed_distance(Vec2::new(0.5, 0.25)) - 0.25).abs() < 1e-12);
        assert!((sq.signed_distance(Vec2::new(0.5, -0.25)) + 0.25).abs() < 1e-12);
    }

    #[test]
    fn clockwise_polygon_rejected() {
        let err = Domain::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ])
        .unwrap_err();
        assert!(matches!(err, DomainError::Invalid(_)));
    }

    #[test]
    fn boundary_arc_wraps_and_keeps_corners() {
        let sq = unit_square();
        // Arc from the middle of the bottom edge around vertex (1,0) to the
        // middle of the right edge.
        let arc = sq.boundary_arc(0.5, 1.5, 0.3);
        assert!((arc[0] - Vec2::new(0.5, 0.0)).norm() < 1e-12);
        assert!((arc[arc.len() - 1] - Vec2::new(1.0, 0.5)).norm() < 1e-12);
        assert!(arc.iter().any(|p| (*p - Vec2::new(1.0, 0.0)).norm() < 1e-12));
        // Wrapping arc crossing parameter 0.
        let arc = sq.boundary_arc(3.5, 0.5, 0.3);
        assert!((arc[0] - Vec2::new(0.0, 0.5)).norm() < 1e-12);
        assert!((arc[arc.len() - 1] - Vec2::new(0.5, 0.0)).norm() < 1e-12);
        let len: f64 = arc.windows(2).map(|w| w[0].dist(w[1])).sum();
        assert!((len - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ellipse_polygon_measures() {
        let e = Domain::ellipse_polygon(2.0, 1.0, 512).unwrap();
        // Exact ellipse area is 2π; the inscribed polygon is slightly smaller.
        assert!((e.area() - 2.0 * PI).abs() < 1e-3);
        assert!(e.is_convex());
        assert!((e.diameter() - 4.0).abs() < 1e-3);
    }
}
