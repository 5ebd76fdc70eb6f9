//! Cut invariants and slicing strategies on island domains.
//!
//! Feasibility of eradicating a set confined to a window `V` under a boundary
//! budget `M` is bracketed by two geometric quantities. `kappa(V)` is the
//! supremum over area fractions of the minimal length of a cut that meets the
//! window boundary perpendicularly and severs the prescribed fraction; a
//! budget below it cannot even hold the narrowest waist against regrowth.
//! `K(V)` is the smallest, over sweep directions, of the largest straight
//! cross-section a slicing sweep must traverse; a budget above it suffices by
//! sweeping. This module computes both invariants with witnesses, issues
//! feasibility verdicts, builds and verifies slicing sweeps (including the
//! perpendicular circular-arc sweep of an elliptical window and the symmetric
//! arc plan for isosceles triangles), and integrates slicing costs.

use crate::domain::Domain;
use crate::effort::EffortTable;
use crate::front::{FrontCurve, FrontError, SpeedField, Trajectory};
use crate::geom::{
    dist_point_segment, line_intersection, point_in_polygon, polygon_signed_area,
    polyline_length, segments_cross, Vec2,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstrainedError {
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("trajectory is not a nested decreasing family (violation near t = {time})")]
    NotNested { time: f64 },
    #[error("not an isosceles triangle: {0}")]
    NotIsosceles(String),
    #[error(transparent)]
    Front(#[from] FrontError),
}

/// Feasibility verdict for a confined set under budget `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Eradicable,
    NotEradicable,
    Indeterminate,
}

/// Cut invariants of a window: the minimal perpendicular-cut length per area
/// fraction, its supremum `kappa`, the directional sweep bound `big_k` with
/// its witness direction, and (when a budget between the two is supplied) the
/// fraction at which the witness sweep stalls.
#[derive(Debug, Clone)]
pub struct CutInvariants {
    pub lambda_grid: Vec<f64>,
    /// Minimal cut length at each grid fraction; NaN where the enumerated
    /// cut family has no member realizing that fraction.
    pub kappa_values: Vec<f64>,
    pub kappa: f64,
    pub big_k: f64,
    /// Sweep direction (radians) witnessing `big_k`.
    pub sweep_direction: f64,
    pub witness: String,
    /// Remaining-area fraction at which the witness sweep stalls, present
    /// only when the supplied budget lies strictly between kappa and big_k.
    pub lambda_star: Option<f64>,
}

/// Outcome of a slicing sweep: finished in time `time`, or stalled with the
/// given remaining-area fraction and absolute stuck area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepOutcome {
    Completed { time: f64 },
    Stalled { lambda_star: f64, stuck_area: f64 },
}

/// A slicing sweep: a human-readable description of the slicing function,
/// the remaining-area fraction over time, the recorded trajectory, and the
/// outcome.
#[derive(Debug, Clone)]
pub struct SweepStrategy {
    pub description: String,
    pub lambda_of_t: Vec<(f64, f64)>,
    pub trajectory: Trajectory,
    pub outcome: SweepOutcome,
}

/// How a trajectory fails the two saturated-optimality conditions, if it does.
#[derive(Debug, Clone, PartialEq)]
pub enum DidoVerdict {
    Optimal,
    AreaBalanceViolated { residual: f64, time: f64 },
    CutNotMinimal { excess: f64, time: f64, fraction: f64 },
}

/// Verification report for a confined trajectory: worst normalized defect of
/// the saturated area balance, worst excess of the cut length over the
/// minimal cut at the same fraction, and the verdict.
#[derive(Debug, Clone)]
pub struct DidoReport {
    pub budget: f64,
    pub area_balance: f64,
    pub worst_excess: f64,
    pub verdict: DidoVerdict,
}

const A2_TOL: f64 = 1e-2;
const OPC_TOL: f64 = 1e-2;
/// Slicing sweeps report a stall once the area decline rate stays above
/// `-STALL_RATE` for `STALL_RUN` consecutive steps.
const STALL_RATE: f64 = 1e-6;
const STALL_RUN: usize = 10;

// ---------------------------------------------------------------------------
// Minimal perpendicular cuts
// ---------------------------------------------------------------------------

/// Area of the lens cut from a disc of radius `r` (centered at the origin) by
/// a circle of radius `rho` crossing it at right angles. The orthogonality
/// constraint fixes the center distance at `sqrt(r^2 + rho^2)`, and the lens
/// area reduces to the closed form below, increasing from 0 to half the disc.
fn disc_lens_area(r: f64, rho: f64) -> f64 {
    let d = r.hypot(rho);
    r * r * (r / d).acos() + rho * rho * (rho / d).acos() - r * rho
}

/// Length of the orthogonal-circle arc inside the disc.
fn disc_lens_cut(r: f64, rho: f64) -> f64 {
    2.0 * rho * (r / rho).atan()
}

/// Area of `poly` intersected with the half-plane `x . n <= c`.
fn clipped_area(pts: &[Vec2], n: Vec2, c: f64) -> f64 {
    let m = pts.len();
    let mut out: Vec<Vec2> = Vec::with_capacity(m + 4);
    for i in 0..m {
        let a = pts[i];
        let b = pts[(i + 1) % m];
        let da = a.dot(n) - c;
        let db = b.dot(n) - c;
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            out.push(a.lerp(b, da / (da - db)));
        }
    }
    if out.len() < 3 {
        0.0
    } else {
        polygon_signed_area(&out).max(0.0)
    }
}

fn convex_polygon_pts(v: &Domain) -> Result<&[Vec2], ConstrainedError> {
    match v {
        Domain::Disc { .. } => unreachable!("disc handled by caller"),
        Domain::Polygon { pts } => {
            if !v.is_convex() {
                return Err(ConstrainedError::UnsupportedShape(
                    "cut invariants require a convex window".into(),
                ));
            }
            Ok(pts)
        }
    }
}

/// Interior angle and adjacent edge lengths at vertex `i` of a convex
/// counterclockwise polygon.
fn vertex_wedge(pts: &[Vec2], i: usize) -> Option<(f64, f64, f64)> {
    let n = pts.len();
    let prev = pts[(i + n - 1) % n];
    let cur = pts[i];
    let next = pts[(i + 1) % n];
    let t_in = (cur - prev).unit()?;
    let t_out = (next - cur).unit()?;
    let turn = t_in.cross(t_out).atan2(t_in.dot(t_out));
    let theta = std::f64::consts::PI - turn;
    if !(theta > 1e-9 && theta < std::f64::consts::PI - 1e-9) {
        return None;
    }
    Some((theta, cur.dist(prev), cur.dist(next)))
}

/// Corner-sector candidates: a circular arc centered at a vertex meets both
/// adjacent edges radially, hence perpendicularly. Valid while the arc feet
/// stay on those edges and every other edge keeps its distance.
fn sector_candidates(pts: &[Vec2], targets: &[f64], scale: f64, best: &mut f64) {
    let n = pts.len();
    for i in 0..n {
        let Some((theta, len_in, len_out)) = vertex_wedge(pts, i) else {
            continue;
        };
        // Farthest radius before the arc leaves the window through a
        // non-adjacent edge.
        let mut rho_max = len_in.min(len_out);
        for j in 0..n {
            if j == i || j == (i + n - 1) % n {
                continue;
            }
            rho_max = rho_max.min(dist_point_segment(pts[i], pts[j], pts[(j + 1) % n]));
        }
        for &a in targets {
            let rho = (2.0 * a / theta).sqrt();
            if rho <= rho_max + 1e-9 * scale {
                *best = best.min(theta * rho);
            }
        }
    }
}

/// Perpendicular straight chords between a pair of exactly antiparallel
/// edges. The chord length equals the line distance regardless of position;
/// the position window is where both feet lie on their segments, and the
/// candidate applies if the requested area is realized inside that window.
fn parallel_chord_candidates(pts: &[Vec2], targets: &[f64], total: f64, best: &mut f64) {
    let n = pts.len();
    for i in 0..n {
        let ti = match (pts[(i + 1) % n] - pts[i]).unit() {
            Some(t) => t,
            None => continue,
        };
        let len_i = pts[i].dist(pts[(i + 1) % n]);
        for j in i + 1..n {
            let tj = match (pts[(j + 1) % n] - pts[j]).unit() {
                Some(t) => t,
                None => continue,
            };
            if ti.cross(tj).abs() > 1e-9 || ti.dot(tj) >= 0.0 {
                continue;
            }
            let len_j = pts[j].dist(pts[(j + 1) % n]);
            let span = (pts[j] - pts[i]).dot(ti.perp()).abs();
            if span <= 1e-12 {
                continue;
            }
            let proj = (pts[j] - pts[i]).dot(ti);
            let u_lo = (proj - len_j).max(0.0);
            let u_hi = proj.min(len_i);
            if u_hi < u_lo - 1e-12 {
                continue;
            }
            let base = pts[i].dot(ti);
            let a_lo = clipped_area(pts, ti, base + u_lo);
            let a_hi = clipped_area(pts, ti, base + u_hi);
            let (amin, amax) = (a_lo.min(a_hi), a_lo.max(a_hi));
            for &a in targets {
                if (a >= amin - 1e-12 && a <= amax + 1e-12)
                    || (total - a >= amin - 1e-12 && total - a <= amax + 1e-12)
                {
                    *best = best.min(span);
                }
            }
        }
    }
}

/// An arc perpendicular to two straight edges must be centered where their
/// lines cross, because a radius meeting an edge perpendicularly to the arc
/// lies along that edge's line. This enumerates arcs over non-adjacent,
/// non-parallel edge pairs; the cut region is bounded by the arc and the
/// boundary chain on the center's side.
fn pair_arc_candidates(pts: &[Vec2], targets: &[f64], scale: f64, best: &mut f64) {
    let n = pts.len();
    if n < 4 {
        return;
    }
    for i in 0..n {
        for j in i + 1..n {
            // Skip adjacent pairs (covered exactly by corner sectors).
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            pair_arc_one(pts, i, j, targets, scale, best);
        }
    }
}

fn angle_diff(to: f64, from: f64) -> f64 {
    let mut d = to - from;
    while d > std::f64::consts::PI {
        d -= 2.0 * std::f64::consts::PI;
    }
    while d <= -std::f64::consts::PI {
        d += 2.0 * std::f64::consts::PI;
    }
    d
}

fn pair_arc_one(pts: &[Vec2], i: usize, j: usize, targets: &[f64], scale: f64, best: &mut f64) {
    let n = pts.len();
    let (ai, bi) = (pts[i], pts[(i + 1) % n]);
    let (aj, bj) = (pts[j], pts[(j + 1) % n]);
    let Some(ti) = (bi - ai).unit() else { return };
    let Some(tj) = (bj - aj).unit() else { return };
    let Some(c) = line_intersection(ai, bi, aj, bj) else {
        return; // parallel: handled by the chord family
    };
    if c.dist(pts[0]) > 1e4 * scale {
        return; // nearly parallel: the intersection is too distant for stable feet
    }
    // Radius ranges where a foot at distance rho from the center lies on each
    // segment, for either direction along the edge line.
    let range_on = |a: Vec2, b: Vec2, t: Vec2| -> [(f64, f64); 2] {
        let pa = (a - c).dot(t);
        let pb = (b - c).dot(t);
        let (lo, hi) = (pa.min(pb), pa.max(pb));
        [(lo.max(0.0), hi.max(0.0)), ((-hi).max(0.0), (-lo).max(0.0))]
    };
    let ri = range_on(ai, bi, ti);
    let rj = range_on(aj, bj, tj);
    for (si, &(ilo, ihi)) in [1.0, -1.0].iter().zip(ri.iter()).map(|(s, r)| (*s, r)) {
        if ihi <= ilo + 1e-12 * scale {
            continue;
        }
        for (sj, &(jlo, jhi)) in [1.0, -1.0].iter().zip(rj.iter()).map(|(s, r)| (*s, r)) {
            let lo = ilo.max(jlo).max(1e-9 * scale);
            let hi = ihi.min(jhi);
            if hi <= lo + 1e-12 * scale {
                continue;
            }
            let di = ti * si;
            let dj = tj * sj;
            let phi_i = di.y.atan2(di.x);
            let phi_j = dj.y.atan2(dj.x);
            let dphi = angle_diff(phi_j, phi_i);
            if dphi.abs() < 1e-9 {
                continue;
            }
            let area_of = |rho: f64| pair_arc_region(pts, i, j, c, rho, phi_i, dphi, scale);
            let (alo, ahi) = (area_of(lo), area_of(hi));
            let (amin, amax) = (alo.min(ahi), alo.max(ahi));
            for &a in targets {
                if a < amin - 1e-12 || a > amax + 1e-12 {
                    continue;
                }
                // The region area is monotone in the radius; bisect to the
                // requested area.
                let (mut rlo, mut rhi) = if alo <= ahi { (lo, hi) } else { (hi, lo) };
                for _ in 0..48 {
                    let mid = 0.5 * (rlo + rhi);
                    if area_of(mid) < a {
                        rlo = mid;
                    } else {
                        rhi = mid;
                    }
                }
                let rho = 0.5 * (rlo + rhi);
                if pair_arc_inside(pts, c, rho, phi_i, dphi, scale) {
                    *best = best.min(rho * dphi.abs());
                }
            }
        }
    }
}

/// Area of the region bounded by the pair arc and the boundary chain on the
/// center's side.
fn pair_arc_region(
    pts: &[Vec2],
    i: usize,
    j: usize,
    c: Vec2,
    rho: f64,
    phi_i: f64,
    dphi: f64,
    _scale: f64,
) -> f64 {
    let n = pts.len();
    let mut region: Vec<Vec2> = Vec::with_capacity(n + 26);
    // Arc from the foot on edge i to the foot on edge j, the short way.
    let k = 24;
    for s in 0..=k {
        let phi = phi_i + dphi * s as f64 / k as f64;
        region.push(c + Vec2::new(phi.cos(), phi.sin()) * rho);
    }
    // Boundary chain from edge j back to edge i: choose the side nearer the
    // center (the side the cut encloses).
    let fwd: Vec<Vec2> = {
        let mut out = Vec::new();
        let mut idx = (j + 1) % n;
        loop {
            out.push(pts[idx]);
            if idx == i {
                break;
            }
            idx = (idx + 1) % n;
        }
        out
    };
    let bwd: Vec<Vec2> = {
        let mut out = Vec::new();
        let mut idx = j;
        loop {
            out.push(pts[idx]);
            if idx == (i + 1) % n {
                break;
            }
            idx = (idx + n - 1) % n;
        }
        out
    };
    let far = |chain: &[Vec2]| {
        chain.iter().map(|p| p.dist(c)).fold(0.0f64, f64::max)
    };
    let chain = if far(&fwd) <= far(&bwd) { fwd } else { bwd };
    region.extend(chain);
    polygon_signed_area(&region).abs()
}

fn pair_arc_inside(pts: &[Vec2], c: Vec2, rho: f64, phi_i: f64, dphi: f64, scale: f64) -> bool {
    let n = pts.len();
    let k = 9;
    for s in 1..k {
        let phi = phi_i + dphi * s as f64 / k as f64;
        let p = c + Vec2::new(phi.cos(), phi.sin()) * rho;
        if !point_in_polygon(p, pts) {
            let mut d = f64::INFINITY;
            for e in 0..n {
                d = d.min(dist_point_segment(p, pts[e], pts[(e + 1) % n]));
            }
            if d > 1e-7 * scale {
                return false;
            }
        }
    }
    true
}

fn kappa_lambda_inner(v: &Domain, lambda: f64) -> Result<Option<f64>, ConstrainedError> {
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(ConstrainedError::InvalidInput(format!(
            "area fraction {lambda} must lie in [0, 1]"
        )));
    }
    let f = lambda.min(1.0 - lambda);
    if f <= 1e-12 {
        return Ok(Some(0.0));
    }
    match v {
        Domain::Disc { radius } => {
            let r = *radius;
            if 0.5 - f <= 1e-9 {
                return Ok(Some(2.0 * r)); // the diameter chord
            }
            let target = f * std::f64::consts::PI * r * r;
            let mut hi = r;
            while disc_lens_area(r, hi) < target && hi < 1e9 * r {
                hi *= 2.0;
            }
            let mut lo = 1e-9 * r;
            for _ in 0..90 {
                let mid = 0.5 * (lo + hi);
                if disc_lens_area(r, mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(Some(disc_lens_cut(r, 0.5 * (lo + hi))))
        }
        Domain::Polygon { .. } => {
            let pts = convex_polygon_pts(v)?;
            let total = polygon_signed_area(pts);
            let scale = 1.0 + v.diameter();
            let targets = [f * total];
            let mut best = f64::INFINITY;
            sector_candidates(pts, &targets, scale, &mut best);
            parallel_chord_candidates(pts, &targets, total, &mut best);
            pair_arc_candidates(pts, &targets, scale, &mut best);
            Ok(best.is_finite().then_some(best))
        }
    }
}

/// Minimal length of a cut severing the area fraction `lambda` of the window
/// while meeting its boundary perpendicularly at both ends. The enumerated
/// family consists of straight chords between antiparallel edges, circular
/// arcs centered at vertices (corner sectors) or at the crossing of two edge
/// lines, and — for a disc — arcs of orthogonally crossing circles, which are
/// exact. Complementary fractions give the same cut, so the value is
/// symmetric about one half.
pub fn kappa_lambda(v: &Domain, lambda: f64) -> Result<f64, ConstrainedError> {
    kappa_lambda_inner(v, lambda)?.ok_or_else(|| {
        ConstrainedError::UnsupportedShape(format!(
            "no perpendicular cut in the enumerated family realizes area fraction {lambda}"
        ))
    })
}

/// Supremum of `kappa_lambda` over area fractions: a 101-point grid scan
/// refined by golden-section search around the best grid point. Fractions the
/// cut family cannot realize are skipped.
pub fn kappa(v: &Domain) -> Result<f64, ConstrainedError> {
    if let Domain::Polygon { .. } = v {
        let _ = convex_polygon_pts(v)?; // reject non-convex windows up front
    }
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut best = (0.0f64, 0.0f64);
    for &l in &grid {
        if let Some(val) = kappa_lambda_inner(v, l)? {
            if val > best.1 {
                best = (l, val);
            }
        }
    }
    let lo = (best.0 - 0.01).max(0.0);
    let hi = (best.0 + 0.01).min(1.0);
    let eval = |l: f64| kappa_lambda_inner(v, l).ok().flatten().unwrap_or(f64::NEG_INFINITY);
    let (_, refined) = golden_max(eval, lo, hi, 70);
    Ok(best.1.max(refined))
}

pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, fc.max(fd))
}

// ---------------------------------------------------------------------------
// Directional sweep bound
// ---------------------------------------------------------------------------

/// Longest chord of a convex polygon in direction `w`. The chord length is a
/// concave piecewise-linear function of the transverse offset, so the
/// maximum is attained on a chord through a vertex.
fn max_chord(pts: &[Vec2], w: Vec2) -> f64 {
    let n = pts.len();
    let mut best = 0.0f64;
    for p in pts {
        let mut t_min = f64::INFINITY;
        let mut t_max = f64::NEG_INFINITY;
        for e in 0..n {
            let (a, b) = (pts[e], pts[(e + 1) % n]);
            let denom = w.cross(b - a);
            if denom.abs() < 1e-14 {
                continue;
            }
            let t = (a - *p).cross(b - a) / denom;
            let s = (a - *p).cross(w) / denom;
            if (-1e-9..=1.0 + 1e-9).contains(&s) {
                t_min = t_min.min(t);
                t_max = t_max.max(t);
            }
        }
        if t_max > t_min {
            best = best.max(t_max - t_min);
        }
    }
    best
}

/// The sweep bound and its witness direction: the smallest, over sweep
/// directions, of the largest slice a straight sweep perpendicular to that
/// direction must cross. Found by a direction grid scan with golden-section
/// refinement.
pub fn big_k_witness(v: &Domain) -> Result<(f64, f64), ConstrainedError> {
    match v {
        Domain::Disc { radius } => Ok((2.0 * radius, 0.0)),
        Domain::Polygon { .. } => {
            let pts = convex_polygon_pts(v)?;
            let width = |phi: f64| {
                let u = Vec2::new(phi.cos(), phi.sin());
                max_chord(pts, u.perp())
            };
            let m = 720;
            let mut best = (0usize, f64::INFINITY);
            for k in 0..m {
                let w = width(std::f64::consts::PI * k as f64 / m as f64);
                if w < best.1 {
                    best = (k, w);
                }
            }
            let step = std::f64::consts::PI / m as f64;
            let lo = best.0 as f64 * step - step;
            let hi = best.0 as f64 * step + step;
            let (phi, neg) = golden_max(|p| -width(p), lo, hi, 80);
            let val = (-neg).min(best.1);
            Ok((val, phi.rem_euclid(std::f64::consts::PI)))
        }
    }
}

/// The directional sweep bound `K(V)`.
pub fn big_k(v: &Domain) -> Result<f64, ConstrainedError> {
    big_k_witness(v).map(|(k, _)| k)
}

/// Feasibility verdict: a budget above `K(V)` suffices (sweep), one below
/// `kappa(V)` cannot hold the narrowest waist, and the band between is not
/// decided by these invariants.
pub fn erad_verdict(v: &Domain, m: f64) -> Result<Verdict, ConstrainedError> {
    if !m.is_finite() || m <= 0.0 {
        return Err(ConstrainedError::InvalidInput(format!("budget {m} must be positive")));
    }
    let k = kappa(v)?;
    let big = big_k(v)?;
    Ok(if m > big {
        Verdict::Eradicable
    } else if m < k {
        Verdict::NotEradicable
    } else {
        Verdict::Indeterminate
    })
}

/// Length of the straight slice `{x . u = s}` across the window, where `u`
/// points along the sweep direction `angle`.
pub fn cross_section_length(v: &Domain, angle: f64, s: f64) -> Result<f64, ConstrainedError> {
    let u = Vec2::new(angle.cos(), angle.sin());
    match v {
        Domain::Disc { radius } => {
            let r = *radius;
            Ok(if s.abs() >= r { 0.0 } else { 2.0 * (r * r - s * s).sqrt() })
        }
        Domain::Polygon { .. } => {
            let pts = convex_polygon_pts(v)?;
            Ok(slice_span(pts, u, s).map_or(0.0, |(lo, hi)| hi - lo))
        }
    }
}

/// Transverse extent of the slice `{x . u = s}` through a convex polygon, as
/// an interval along `u.perp()`; `None` when the slice misses the polygon.
fn slice_span(pts: &[Vec2], u: Vec2, s: f64) -> Option<(f64, f64)> {
    let w = u.perp();
    let n = pts.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for e in 0..n {
        let (a, b) = (pts[e], pts[(e + 1) % n]);
        let (da, db) = (a.dot(u) - s, b.dot(u) - s);
        if (da <= 0.0 && db <= 0.0) || (da >= 0.0 && db >= 0.0) {
            // Touching endpoints still count via the adjacent edge.
            if da != 0.0 && db != 0.0 {
                continue;
            }
        }
        let t = if (da - db).abs() < 1e-300 { 0.0 } else { da / (da - db) };
        let p = a.lerp(b, t.clamp(0.0, 1.0));
        let c = p.dot(w);
        lo = lo.min(c);
        hi = hi.max(c);
    }
    (hi > lo + 1e-15).then_some((lo, hi))
}

fn region_area_ge(v: &Domain, u: Vec2, s: f64) -> f64 {
    match v {
        Domain::Disc { radius } => {
            let r = *radius;
            if s <= -r {
                std::f64::consts::PI * r * r
            } else if s >= r {
                0.0
            } else {
                r * r * (s / r).acos() - s * (r * r - s * s).sqrt()
            }
        }
        Domain::Polygon { pts } => clipped_area(pts, u * -1.0, -s),
    }
}

fn support_interval(v: &Domain, u: Vec2) -> (f64, f64) {
    match v {
        Domain::Disc { radius } => (-radius, *radius),
        Domain::Polygon { pts } => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in pts {
                let d = p.dot(u);
                lo = lo.min(d);
                hi = hi.max(d);
            }
            (lo, hi)
        }
    }
}

/// Sampled straight slice as an attached front curve, oriented so the
/// remaining region `{x . u >= s}` lies on its left.
fn slice_curve(v: &Domain, u: Vec2, s: f64, h0: f64) -> Result<Option<FrontCurve>, FrontError> {
    let w = u.perp();
    let (lo, hi) = match v {
        Domain::Disc { radius } => {
            let r = *radius;
            if s.abs() >= r {
                return Ok(None);
            }
            let half = (r * r - s * s).sqrt();
            (-half, half)
        }
        Domain::Polygon { pts } => match slice_span(pts, u, s) {
            Some(span) => span,
            None => return Ok(None),
        },
    };
    if hi - lo <= 1e-9 * (1.0 + v.diameter()) {
        return Ok(None);
    }
    let p_hi = u * s + w * hi;
    let p_lo = u * s + w * lo;
    let count = (((hi - lo) / h0).ceil() as usize).clamp(8, 512);
    let pts: Vec<Vec2> = (0..=count).map(|k| p_hi.lerp(p_lo, k as f64 / count as f64)).collect();
    FrontCurve::attached_from(pts, v, h0).map(Some)
}

// ---------------------------------------------------------------------------
// Slicing sweeps
// ---------------------------------------------------------------------------

/// Straight slicing sweep along the given direction: the region
/// `{x . u >= s}` remains, the slice advances so the uniform boundary speed
/// exhausts the budget, and the area obeys `dA/dt = slice - m`. Stalls are
/// reported when the decline rate stays above `-1e-6` for ten consecutive
/// steps.
pub fn directional_sweep(
    v: &Domain,
    m: f64,
    angle: f64,
    max_records: usize,
) -> Result<SweepStrategy, ConstrainedError> {
    if !m.is_finite() || m <= 0.0 {
        return Err(ConstrainedError::InvalidInput(format!("budget {m} must be positive")));
    }
    if let Domain::Polygon { .. } = v {
        let _ = convex_polygon_pts(v)?;
    }
    let u = Vec2::new(angle.cos(), angle.sin());
    let (s_lo, s_hi) = support_interval(v, u);
    let span = s_hi - s_lo;
    let total = v.area();
    let e = EffortTable::basic();
    let h0 = v.perimeter() / 256.0;
    let records = max_records.max(16);
    let record_drop = total / records as f64;

    let slice = |s: f64| cross_section_length(v, angle, s).unwrap_or(0.0);
    let rate = |s: f64| -> f64 {
        let l = slice(s);
        if l <= 1e-12 {
            f64::INFINITY
        } else {
            ((m - l) / l).max(0.0)
        }
    };

    let mut traj = Trajectory::new();
    let mut lambda_of_t = Vec::new();
    let mut s = s_lo + 1e-4 * span;
    let mut t = 0.0f64;
    let dt = total / (m * 1500.0);
    let ds_cap = span / 3000.0;
    let mut slow: usize = 0;
    let mut last_recorded = f64::INFINITY;
    let mut outcome = None;

    let record =
        |s: f64, t: f64, traj: &mut Trajectory, lam: &mut Vec<(f64, f64)>| -> Result<(), ConstrainedError> {
            if let Some(curve) = slice_curve(v, u, s, h0)? {
                let len = polyline_length(&curve.pts, false);
                let nv = curve.pts.len();
                let beta = m / len.max(1e-12) - 1.0;
                let field = SpeedField::uniform(nv, beta, &e);
                let rem = region_area_ge(v, u, s);
                traj.record(t, curve, field, &e, Some(v))?;
                lam.push((t, rem / total));
            }
            Ok(())
        };

    for _ in 0..500_000 {
        let l = slice(s);
        let rem = region_area_ge(v, u, s);
        if last_recorded - rem >= record_drop {
            record(s, t, &mut traj, &mut lambda_of_t)?;
            last_recorded = rem;
        }
        if rem <= 1e-4 * total || s >= s_hi - 1e-12 * span {
            let tail = if m > l { rem / (m - l) } else { 0.0 };
            outcome = Some(SweepOutcome::Completed { time: t + tail });
            break;
        }
        if m - l <= STALL_RATE {
            slow += 1;
            if slow >= STALL_RUN {
                record(s, t, &mut traj, &mut lambda_of_t)?;
                outcome = Some(SweepOutcome::Stalled { lambda_star: rem / total, stuck_area: rem });
                break;
            }
            t += dt;
            continue;
        }
        slow = 0;
        // Midpoint advance of ds/dt = (m - slice)/slice, capped so the slice
        // profile is always resolved; time is charged pro-rata for capped
        // steps (they occur where slices are short and times negligible).
        let r1 = rate(s);
        let ds1 = (r1 * dt).min(ds_cap);
        let r2 = rate(s + 0.5 * ds1);
        if !r2.is_finite() {
            s += ds_cap;
            continue;
        }
        let ds = (r2 * dt).min(ds_cap);
        if r2 > 0.0 {
            t += ds / r2;
        } else {
            t += dt;
        }
        s += ds;
    }

    let outcome = outcome.unwrap_or(SweepOutcome::Stalled {
        lambda_star: region_area_ge(v, u, s) / total,
        stuck_area: region_area_ge(v, u, s),
    });
    if let SweepOutcome::Completed { time } = outcome {
        let nv = 0;
        let field = SpeedField::uniform(nv, 0.0, &e);
        let empty = FrontCurve { pts: Vec::new(), closure: crate::front::Closure::Closed, labels: None, h0 };
        traj.record(time, empty, field, &e, Some(v))?;
        lambda_of_t.push((time, 0.0));
    }
    Ok(SweepStrategy {
        description: format!(
            "straight slices perpendicular to the direction {angle:.6} rad, advanced so the \
             uniform slice speed exhausts the budget {m}"
        ),
        lambda_of_t,
        trajectory: traj,
        outcome,
    })
}

/// The witness slicing sweep: straight slices perpendicular to the direction
/// realizing `big_k`, advanced to exhaust the budget.
pub fn sweep_strategy(v: &Domain, m: f64) -> Result<SweepStrategy, ConstrainedError> {
    let (_, phi) = big_k_witness(v)?;
    directional_sweep(v, m, phi, 420)
}

/// Cut invariants with witnesses; when a budget strictly inside
/// `(kappa, big_k)` is supplied, also the fraction at which the witness
/// sweep first meets a slice as long as the budget.
pub fn cut_invariants(v: &Domain, m: Option<f64>) -> Result<CutInvariants, ConstrainedError> {
    if let Domain::Polygon { .. } = v {
        let _ = convex_polygon_pts(v)?;
    }
    let lambda_grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut kappa_values = Vec::with_capacity(lambda_grid.len());
    for &l in &lambda_grid {
        kappa_values.push(kappa_lambda_inner(v, l)?.unwrap_or(f64::NAN));
    }
    let kap = kappa(v)?;
    let (big, phi) = big_k_witness(v)?;
    let mut lambda_star = None;
    if let Some(m) = m {
        if m > kap && m < big {
            let u = Vec2::new(phi.cos(), phi.sin());
            let (s_lo, s_hi) = support_interval(v, u);
            // First slice along the sweep at least as long as the budget.
            let mut lo = s_lo;
            let mut hi = s_hi;
            let too_long = |s: f64| cross_section_length(v, phi, s).unwrap_or(0.0) >= m;
            if too_long(lo) {
                lambda_star = Some(1.0);
            } else {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if too_long(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                lambda_star = Some(region_area_ge(v, u, 0.5 * (lo + hi)) / v.area());
            }
        }
    }
    Ok(CutInvariants {
        lambda_grid,
        kappa_values,
        kappa: kap,
        big_k: big,
        sweep_direction: phi,
        witness: format!(
            "straight sweep along the direction {phi:.6} rad; slices perpendicular to it never \
             exceed {big:.9}"
        ),
        lambda_star,
    })
}

// ---------------------------------------------------------------------------
// Optimality verification and slicing cost
// ---------------------------------------------------------------------------

/// Verify the two saturated-optimality conditions on a confined trajectory:
/// the saturated area balance `dA/dt = cut - M` (with `M` the largest
/// recorded effort) against centered differences, and minimality of each
/// recorded cut against the perpendicular cut family at the same area
/// fraction. Fractions the family cannot realize, and the extreme tails
/// where both sides vanish, are skipped.
pub fn check_dido_optimality(traj: &Trajectory, v: &Domain) -> Result<DidoReport, ConstrainedError> {
    let n = traj.times.len();
    if n < 3 {
        return Err(ConstrainedError::InvalidInput(
            "optimality verification needs at least three samples".into(),
        ));
    }
    let total = v.area();
    let budget = traj
        .efforts
        .iter()
        .zip(&traj.curves)
        .filter(|(_, c)| !c.is_empty())
        .map(|(e, _)| *e)
        .fold(0.0f64, f64::max);
    if budget <= 0.0 {
        return Err(ConstrainedError::InvalidInput("trajectory records no effort".into()));
    }

    let mut worst_balance = 0.0f64;
    let mut balance_hit: Option<f64> = None;
    for k in 1..n - 1 {
        if traj.curves[k - 1].is_empty() || traj.curves[k].is_empty() || traj.curves[k + 1].is_empty()
        {
            continue;
        }
        let span = traj.times[k + 1] - traj.times[k - 1];
        if span <= 0.0 {
            continue;
        }
        let da = (traj.areas[k + 1] - traj.areas[k - 1]) / span;
        let res = (da - (traj.perimeters[k] - budget)).abs() / budget;
        if res > worst_balance {
            worst_balance = res;
            if res > A2_TOL && balance_hit.is_none() {
                balance_hit = Some(traj.times[k]);
            }
        }
        if res > A2_TOL && balance_hit.is_none() {
            balance_hit = Some(traj.times[k]);
        }
    }

    let mut worst_excess = f64::NEG_INFINITY;
    let mut excess_hit: Option<(f64, f64)> = None;
    let stride = (n / 96).max(1);
    for k in (0..n).step_by(stride) {
        if traj.curves[k].is_empty() {
            continue;
        }
        let frac = (traj.areas[k] / total).clamp(0.0, 1.0);
        if !(5e-3..=1.0 - 5e-3).contains(&frac) {
            continue;
        }
        let Some(min_cut) = kappa_lambda_inner(v, frac)? else {
            continue;
        };
        let excess = traj.perimeters[k] - min_cut;
        if excess > worst_excess {
            worst_excess = excess;
            if excess > OPC_TOL && excess_hit.is_none() {
                excess_hit = Some((traj.times[k], frac));
            }
        }
        if excess > OPC_TOL && excess_hit.is_none() {
            excess_hit = Some((traj.times[k], frac));
        }
    }
    let worst_excess = if worst_excess.is_finite() { worst_excess } else { 0.0 };

    let verdict = if let Some(time) = balance_hit {
        DidoVerdict::AreaBalanceViolated { residual: worst_balance, time }
    } else if let Some((time, fraction)) = excess_hit {
        DidoVerdict::CutNotMinimal { excess: worst_excess, time, fraction }
    } else {
        DidoVerdict::Optimal
    };
    Ok(DidoReport { budget, area_balance: worst_balance, worst_excess, verdict })
}

/// Total cut length integrated against enclosed area over a nested
/// decreasing family: the cost of slicing the window along the family. The
/// integral is taken directly in the area variable, which coincides with
/// time integration once the family is parameterized so area equals time.
pub fn slicing_cost(traj: &Trajectory) -> Result<f64, ConstrainedError> {
    let n = traj.times.len();
    if n < 2 {
        return Err(ConstrainedError::InvalidInput(
            "slicing cost needs at least two samples".into(),
        ));
    }
    let scale = traj.areas.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
    for k in 0..n - 1 {
        if traj.areas[k + 1] > traj.areas[k] + 1e-9 * scale {
            return Err(ConstrainedError::NotNested { time: traj.times[k + 1] });
        }
        let (a, b) = (&traj.curves[k], &traj.curves[k + 1]);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        // Relative boundaries of nested regions never cross transversally.
        let (pa, pb) = (&a.pts, &b.pts);
        let closed_a = a.is_closed();
        let closed_b = b.is_closed();
        let ea = if closed_a { pa.len() } else { pa.len() - 1 };
        let eb = if closed_b { pb.len() } else { pb.len() - 1 };
        for i in 0..ea {
            let (s1, s2) = (pa[i], pa[(i + 1) % pa.len()]);
            for j in 0..eb {
                let (t1, t2) = (pb[j], pb[(j + 1) % pb.len()]);
                if segments_cross(s1, s2, t1, t2) {
                    return Err(ConstrainedError::NotNested { time: traj.times[k + 1] });
                }
            }
        }
    }
    let mut cost = 0.0;
    for k in 0..n - 1 {
        cost += 0.5 * (traj.perimeters[k] + traj.perimeters[k + 1])
            * (traj.areas[k] - traj.areas[k + 1]);
    }
    Ok(cost)
}

// ---------------------------------------------------------------------------
// Perpendicular-arc sweep of an elliptical window
// ---------------------------------------------------------------------------

/// Sweep an elliptical window by circular arcs that cross the ellipse
/// perpendicularly at both ends. Such an arc through the boundary point
/// `(a cos mu, b sin mu)` is centered on the major axis at `(a / cos mu, 0)`,
/// because perpendicular crossing forces the radius at the endpoint to be
/// tangent to the ellipse. The family sweeps from the left tip to the right
/// tip; arcs advance so the uniform speed exhausts the budget `m`.
/// Returns the polygonal window used and the recorded sweep.
pub fn ellipse_arc_sweep(
    a: f64,
    b: f64,
    m: f64,
    levels: usize,
) -> Result<(Domain, SweepStrategy), ConstrainedError> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(ConstrainedError::InvalidInput("semi-axes must be positive".into()));
    }
    if !m.is_finite() || m <= 0.0 {
        return Err(ConstrainedError::InvalidInput(format!("budget {m} must be positive")));
    }
    let v = Domain::ellipse_polygon(a, b, 96)
        .map_err(|e| ConstrainedError::InvalidInput(e.to_string()))?;
    let total = v.area();
    let e = EffortTable::basic();
    let h0 = v.perimeter() / 256.0;
    let levels = levels.clamp(32, 4000);
    let mu_lo = 0.22;
    let mu_hi = std::f64::consts::PI - 0.22;

    let mut traj = Trajectory::new();
    let mut lambda_of_t = Vec::new();
    let mut prev: Option<(f64, f64)> = None; // (area, cut length)
    let mut t = 0.0f64;
    for k in 0..levels {
        let mu = mu_hi + (mu_lo - mu_hi) * k as f64 / (levels - 1) as f64;
        let curve = if mu.cos().abs() < 1e-3 {
            // Degenerate center at infinity: the straight minor-axis chord.
            let x = a * mu.cos();
            let y = b * (1.0 - (x / a) * (x / a)).max(0.0).sqrt();
            let count = ((2.0 * y / h0).ceil() as usize).clamp(8, 512);
            let pts: Vec<Vec2> = (0..=count)
                .map(|i| Vec2::new(x, y - 2.0 * y * i as f64 / count as f64))
                .collect();
            FrontCurve::attached_from(pts, &v, h0)?
        } else {
            let p_top = Vec2::new(a * mu.cos(), b * mu.sin());
            let c = Vec2::new(a / mu.cos(), 0.0);
            let rho = p_top.dist(c);
            let phi_top = (p_top.y - c.y).atan2(p_top.x - c.x);
            let phi_bot = -phi_top;
            let dphi = angle_diff(phi_bot, phi_top);
            let count = ((rho * dphi.abs() / h0).ceil() as usize).clamp(24, 700);
            let pts: Vec<Vec2> = (0..=count)
                .map(|i| {
                    let phi = phi_top + dphi * i as f64 / count as f64;
                    c + Vec2::new(phi.cos(), phi.sin()) * rho
                })
                .collect();
            FrontCurve::attached_from(pts, &v, h0)?
        };
        let (area, len) = curve.area_perimeter(Some(&v))?;
        if len >= m - 1e-6 {
            return Err(ConstrainedError::InvalidInput(format!(
                "budget {m} does not exceed the largest arc length {len:.6}"
            )));
        }
        if let Some((pa, pl)) = prev {
            let mid = 0.5 * (pl + len);
            t += (pa - area) / (m - mid);
        }
        let beta = m / len.max(1e-12) - 1.0;
        let field = SpeedField::uniform(curve.pts.len(), beta, &e);
        traj.record(t, curve, field, &e, Some(&v))?;
        lambda_of_t.push((t, area / total));
        prev = Some((area, len));
    }
    let (last_area, last_len) = prev.unwrap();
    let time = t + last_area / (m - 0.5 * last_len);
    let empty = FrontCurve {
        pts: Vec::new(),
        closure: crate::front::Closure::Closed,
        labels: None,
        h0,
    };
    traj.record(time, empty, SpeedField::uniform(0, 0.0, &e), &e, Some(&v))?;
    lambda_of_t.push((time, 0.0));
    let strategy = SweepStrategy {
        description: format!(
            "circular arcs crossing the ellipse ({a} x {b}) perpendicularly, centered on the \
             major axis, swept tip to tip under budget {m}"
        ),
        lambda_of_t,
        trajectory: traj,
        outcome: SweepOutcome::Completed { time },
    };
    Ok((v, strategy))
}

// ---------------------------------------------------------------------------
// Isosceles arc plan
// ---------------------------------------------------------------------------

/// The symmetric arc plan for an isosceles triangular window. The plan
/// clears one base corner with a growing corner sector, walks an arc
/// tangent to the symmetry axis up the equal side until the moving boundary
/// is the full axis segment (the largest uncontrolled cross-section the plan
/// ever exposes), then mirrors both stages on the other half. Every arc
/// meets the window boundary perpendicularly, and the front advances so the
/// uniform speed exhausts the budget.
pub fn isosceles_plan(v: &Domain, m: f64) -> Result<SweepStrategy, ConstrainedError> {
    if !m.is_finite() || m <= 0.0 {
        return Err(ConstrainedError::InvalidInput(format!("budget {m} must be positive")));
    }
    let pts = match v {
        Domain::Polygon { pts } if pts.len() == 3 => pts.clone(),
        _ => {
            return Err(ConstrainedError::NotIsosceles(
                "the window must be a triangle".into(),
            ))
        }
    };
    let scale = v.perimeter();
    // Apex: the vertex where the two equal sides meet.
    let mut apex = None;
    for i in 0..3 {
        let (li, lo_) = (
            pts[i].dist(pts[(i + 2) % 3]),
            pts[i].dist(pts[(i + 1) % 3]),
        );
        if (li - lo_).abs() <= 1e-9 * scale {
            apex = Some(i);
            break;
        }
    }
    let Some(ai) = apex else {
        return Err(ConstrainedError::NotIsosceles(
            "no vertex joins two equal sides".into(),
        ));
    };
    let p = pts[ai];
    let b1 = pts[(ai + 1) % 3];
    let b2 = pts[(ai + 2) % 3];
    let w = b1.dist(b2);
    let ex = (b2 - b1).unit().ok_or_else(|| {
        ConstrainedError::NotIsosceles("degenerate base".into())
    })?;
    let mut ey = ex.perp();
    if (p - b1).dot(ey) < 0.0 {
        ey = ey * -1.0;
    }
    let height = (p - b1).dot(ey);
    if height <= 1e-12 * scale {
        return Err(ConstrainedError::NotIsosceles("degenerate height".into()));
    }
    let alpha = (height).atan2(0.5 * w); // base angle at b1 and b2
    let to_world = |q: Vec2| b1 + ex * q.x + ey * q.y;
    let mirror = |q: Vec2| Vec2::new(w - q.x, q.y);
    let arc_samples = 128;
    let h0 = w / 64.0;
    let e = EffortTable::basic();

    // Stage 1 curve at sector radius rho: the corner arc at the local origin
    // from the equal side (angle alpha) to the base (angle 0), traversed so
    // the remaining region lies on its left.
    let stage1 = |rho: f64| -> Vec<Vec2> {
        (0..=arc_samples)
            .map(|k| {
                let phi = alpha * (1.0 - k as f64 / arc_samples as f64);
                Vec2::new(phi.cos(), phi.sin()) * rho
            })
            .collect()
    };
    // Stage 2 curve at arc radius r: an arc of opening alpha centered on the
    // equal side, tangent to the axis, continued straight down the axis to
    // the base. Traversed side-to-base so the remaining region lies left.
    // At r = 0 the arc has collapsed onto the apex and the curve is the full
    // axis segment.
    let stage2 = |r: f64| -> Vec<Vec2> {
        let mut out: Vec<Vec2> = Vec::with_capacity(arc_samples + 70);
        if r > 1e-12 * w {
            let q = (0.5 * w - r) / alpha.cos();
            let center = Vec2::new(alpha.cos(), alpha.sin()) * q;
            for k in 0..=arc_samples {
                let phi = alpha * (1.0 - k as f64 / arc_samples as f64);
                out.push(center + Vec2::new(phi.cos(), phi.sin()) * r);
            }
        } else {
            out.push(Vec2::new(0.5 * w, height));
        }
        // Axis segment from the tangency point straight down to the base.
        let top = *out.last().unwrap();
        if top.y > 1e-12 * w {
            let steps = ((top.y / h0).ceil() as usize).max(1);
            for k in 1..=steps {
                out.push(Vec2::new(top.x, top.y * (1.0 - k as f64 / steps as f64)));
            }
        }
        out
    };

    let grid = 140usize;
    // The first few sector configurations are trimmed: where the cut is
    // vanishingly short, finite differencing of the area balance against a
    // vanishing normalizer is meaningless. Their sweep time is restored by
    // closed-form quadrature below, so the total duration is unaffected.
    let trim = 6usize;
    let d_rho = 0.5 * w / grid as f64;
    let rho_start = d_rho * trim as f64;
    if m <= alpha * 0.5 * w {
        // The budget cannot even drive the largest corner sector; the plan
        // jams with everything still in place.
        return Ok(SweepStrategy {
            description: "isosceles arc plan jammed at the first stage".into(),
            lambda_of_t: vec![(0.0, 1.0)],
            trajectory: Trajectory::new(),
            outcome: SweepOutcome::Stalled { lambda_star: 1.0, stuck_area: v.area() },
        });
    }
    let mut configs: Vec<Vec<Vec2>> = Vec::with_capacity(4 * grid + 4);
    // Stage 1: sector radius rho_start -> w/2.
    for j in trim..=grid {
        configs.push(stage1(d_rho * j as f64));
    }
    // Stage 2: arc radius w/2 -> 0 (the final config is the axis segment).
    for k in 1..=grid {
        configs.push(stage2((0.5 * w - d_rho * k as f64).max(0.0)));
    }
    // Stages 3 and 4: mirror images of stages 2 and 1 at reversed parameter
    // order. The mirror alone flips which side of the curve is enclosed,
    // which is exactly what the right half needs. Each junction
    // configuration is pushed exactly once so the sequence pairs off
    // symmetrically around the central axis configuration.
    for k in 1..grid {
        configs.push(stage2(d_rho * k as f64).into_iter().map(mirror).collect());
    }
    for j in (trim..=grid).rev() {
        configs.push(stage1(d_rho * j as f64).into_iter().map(mirror).collect());
    }

    // Time across a trimmed corner neighborhood: dz/dt = m - sqrt(2 alpha z)
    // in the removed area z, integrated by midpoint quadrature.
    let z_head = 0.5 * alpha * rho_start * rho_start;
    let fine = 4000;
    let mut t_head = 0.0;
    for i in 0..fine {
        let z0 = z_head * i as f64 / fine as f64;
        let z1 = z_head * (i + 1) as f64 / fine as f64;
        let l_mid = (2.0 * alpha * 0.5 * (z0 + z1)).sqrt();
        t_head += (z1 - z0) / (m - l_mid);
    }

    let mut traj = Trajectory::new();
    let mut lambda_of_t = Vec::new();
    let total = v.area();
    let mut t = t_head;
    let mut prev: Option<(f64, f64)> = None;
    let mut stalled = None;
    for cfg in &configs {
        let world: Vec<Vec2> = cfg.iter().map(|&q| to_world(q)).collect();
        let curve = FrontCurve::attached_from(world, v, h0)?;
        let (area, len) = curve.area_perimeter(Some(v))?;
        if len >= m - STALL_RATE {
            stalled = Some((t, area));
            break;
        }
        if let Some((pa, pl)) = prev {
            let mid = 0.5 * (pl + len);
            t += (pa - area).max(0.0) / (m - mid);
        }
        let beta = m / len.max(1e-12) - 1.0;
        let field = SpeedField::uniform(curve.pts.len(), beta, &e);
        traj.record(t, curve, field, &e, Some(v))?;
        lambda_of_t.push((t, area / total));
        prev = Some((area, len));
    }
    let outcome = if let Some((_, area)) = stalled {
        SweepOutcome::Stalled { lambda_star: area / total, stuck_area: area }
    } else {
        // The mirrored corner neighborhood costs exactly the head time again.
        let time = t + t_head;
        let empty = FrontCurve {
            pts: Vec::new(),
            closure: crate::front::Closure::Closed,
            labels: None,
            h0,
        };
        traj.record(time, empty, SpeedField::uniform(0, 0.0, &e), &e, Some(v))?;
        lambda_of_t.push((time, 0.0));
        SweepOutcome::Completed { time }
    };
    Ok(SweepStrategy {
        description: format!(
            "corner sector, axis-tangent side arc, and their mirror images about the symmetry \
             axis of the isosceles window, swept under budget {m}"
        ),
        lambda_of_t,
        trajectory: traj,
        outcome,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn equilateral() -> Domain {
        Domain::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.5, 3.0f64.sqrt() / 2.0),
        ])
        .unwrap()
    }

    fn unit_square() -> Domain {
        Domain::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    fn rect_2x1() -> Domain {
        Domain::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn disc_cuts_peak_at_the_diameter() {
        let v = Domain::disc(1.0).unwrap();
        assert_relative_eq!(kappa_lambda(&v, 0.5).unwrap(), 2.0, epsilon = 1e-12);
        let k03 = kappa_lambda(&v, 0.3).unwrap();
        let k07 = kappa_lambda(&v, 0.7).unwrap();
        assert_relative_eq!(k03, k07, epsilon = 1e-12);
        assert!(k03 < 2.0);
        // Below-half cuts grow monotonically toward the diameter.
        let mut last = 0.0;
        for i in 1..=10 {
            let k = kappa_lambda(&v, 0.05 * i as f64).unwrap();
            assert!(k > last);
            last = k;
        }
        assert_relative_eq!(kappa(&v).unwrap(), 2.0, epsilon = 1e-9);
        assert_eq!(kappa_lambda(&v, 0.0).unwrap(), 0.0);
        assert_eq!(kappa_lambda(&v, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn square_cut_profile_and_supremum() {
        let v = unit_square();
        // Quarter fraction: the corner quarter-circle beats the unit chord.
        let expect = (std::f64::consts::PI / 4.0).sqrt();
        assert_relative_eq!(kappa_lambda(&v, 0.25).unwrap(), expect, epsilon = 1e-9);
        assert_relative_eq!(kappa_lambda(&v, 0.75).unwrap(), expect, epsilon = 1e-9);
        // Half fraction: the straight mid-chord wins.
        assert_relative_eq!(kappa_lambda(&v, 0.5).unwrap(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(kappa(&v).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn triangle_half_cut_is_the_corner_arc_length() {
        let v = equilateral();
        // At half area the corner sector has radius sqrt(3 sqrt(3) / (4 pi));
        // the cut length is that radius times the pi/3 opening angle.
        let radius = (3.0 * 3.0f64.sqrt() / (4.0 * std::f64::consts::PI)).sqrt();
        let k = kappa_lambda(&v, 0.5).unwrap();
        assert_relative_eq!(k, radius * std::f64::consts::FRAC_PI_3, epsilon = 1e-12);
        assert_relative_eq!(k, 0.6733868435442991, epsilon = 1e-9);
        assert_relative_eq!(kappa(&v).unwrap(), 0.6733868435442991, epsilon = 1e-6);
    }

    #[test]
    fn sweep_bounds_and_witnesses() {
        let (k_tri, phi_tri) = big_k_witness(&equilateral()).unwrap();
        assert_relative_eq!(k_tri, 3.0f64.sqrt() / 2.0, epsilon = 1e-6);
        // The witness sweep runs parallel to a side (three equivalent optima).
        let m = std::f64::consts::FRAC_PI_3;
        let r = phi_tri.rem_euclid(m).min(m - phi_tri.rem_euclid(m));
        assert!(r < 1e-3, "witness direction {phi_tri} is not along a side");
        assert_relative_eq!(big_k(&rect_2x1()).unwrap(), 1.0, epsilon = 1e-6);
        assert_relative_eq!(big_k(&unit_square()).unwrap(), 1.0, epsilon = 1e-6);
        assert_relative_eq!(big_k(&Domain::disc(1.0).unwrap()).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn waist_never_exceeds_sweep_bound() {
        for v in [
            Domain::disc(1.0).unwrap(),
            equilateral(),
            unit_square(),
            rect_2x1(),
        ] {
            let k = kappa(&v).unwrap();
            let big = big_k(&v).unwrap();
            assert!(k <= big + 1e-9, "kappa {k} exceeds K {big}");
        }
    }

    #[test]
    fn verdicts_bracket_the_budget() {
        let disc = Domain::disc(1.0).unwrap();
        assert_eq!(erad_verdict(&disc, 2.1).unwrap(), Verdict::Eradicable);
        assert_eq!(erad_verdict(&disc, 1.9).unwrap(), Verdict::NotEradicable);
        let tri = equilateral();
        assert_eq!(erad_verdict(&tri, 0.9).unwrap(), Verdict::Eradicable);
        assert_eq!(erad_verdict(&tri, 0.7).unwrap(), Verdict::Indeterminate);
    }

    #[test]
    fn triangle_witness_sweep_matches_quadrature() {
        let v = equilateral();
        let strat = sweep_strategy(&v, 1.0).unwrap();
        let SweepOutcome::Completed { time } = strat.outcome else {
            panic!("sweep should complete: {:?}", strat.outcome);
        };
        // Independent quadrature of dt = slice/(m - slice) ds along the
        // witness direction.
        let (_, phi) = big_k_witness(&v).unwrap();
        let u = Vec2::new(phi.cos(), phi.sin());
        let (s_lo, s_hi) = support_interval(&v, u);
        let n = 40_000;
        let mut t_quad = 0.0;
        for i in 0..n {
            let s0 = s_lo + (s_hi - s_lo) * i as f64 / n as f64;
            let s1 = s_lo + (s_hi - s_lo) * (i + 1) as f64 / n as f64;
            let f = |s: f64| {
                let l = cross_section_length(&v, phi, s).unwrap();
                l / (1.0 - l)
            };
            t_quad += 0.5 * (f(s0) + f(s1)) * (s1 - s0);
        }
        assert!(
            (time - t_quad).abs() <= 0.02 * t_quad,
            "sweep time {time} vs quadrature {t_quad}"
        );
        assert_relative_eq!(time, 1.3210956, epsilon = 2e-2);
        assert!(crate::front::is_nested(&strat.trajectory, Some(&v)));
    }

    #[test]
    fn disc_sweep_stalls_at_the_budget_slice() {
        let v = Domain::disc(1.0).unwrap();
        let strat = sweep_strategy(&v, 1.9).unwrap();
        let SweepOutcome::Stalled { lambda_star, stuck_area } = strat.outcome else {
            panic!("sweep should stall: {:?}", strat.outcome);
        };
        // The slice reaches 1.9 where 2 sqrt(1 - s^2) = 1.9; the remaining
        // fraction there is 0.6955.
        assert_relative_eq!(lambda_star, 0.695509, epsilon = 5e-3);
        assert_relative_eq!(stuck_area, 0.695509 * std::f64::consts::PI, epsilon = 2e-2);
    }

    #[test]
    fn huge_budget_sweep_time_is_area_over_budget() {
        let v = Domain::disc(1.0).unwrap();
        let strat = sweep_strategy(&v, 100.0).unwrap();
        let SweepOutcome::Completed { time } = strat.outcome else {
            panic!("sweep should complete: {:?}", strat.outcome);
        };
        let linear = v.area() / 100.0;
        assert!(
            (time - linear).abs() <= 0.05 * linear,
            "time {time} vs area/budget {linear}"
        );
    }

    #[test]
    fn invariants_report_the_stall_fraction_in_the_gap() {
        let tri = equilateral();
        let inv = cut_invariants(&tri, Some(0.7)).unwrap();
        assert_eq!(inv.lambda_grid.len(), 101);
        assert_relative_eq!(inv.kappa, 0.6733868435442991, epsilon = 1e-6);
        assert_relative_eq!(inv.big_k, 3.0f64.sqrt() / 2.0, epsilon = 1e-6);
        // Budget 0.7 sits between the invariants; the witness sweep jams
        // where a slice reaches 0.7.
        let lam = inv.lambda_star.expect("budget lies in the gap");
        assert_relative_eq!(lam, 0.67332, epsilon = 5e-3);
        // Outside the gap no stall fraction is reported.
        assert!(cut_invariants(&tri, Some(0.9)).unwrap().lambda_star.is_none());
        assert!(cut_invariants(&Domain::disc(1.0).unwrap(), Some(1.9))
            .unwrap()
            .lambda_star
            .is_none());
    }

    #[test]
    fn circular_window_arc_sweep_is_verified_optimal() {
        let (v, strat) = ellipse_arc_sweep(1.0, 1.0, 2.5, 380).unwrap();
        assert!(crate::front::is_nested(&strat.trajectory, Some(&v)));
        let report = check_dido_optimality(&strat.trajectory, &v).unwrap();
        assert_relative_eq!(report.budget, 2.5, epsilon = 1e-9);
        assert!(
            report.area_balance <= 1e-2,
            "area balance {}",
            report.area_balance
        );
        assert!(
            report.worst_excess <= 1e-2,
            "cut excess {}",
            report.worst_excess
        );
        assert_eq!(report.verdict, DidoVerdict::Optimal);
    }

    #[test]
    fn elliptical_window_arc_sweep_is_verified_optimal() {
        let (v, strat) = ellipse_arc_sweep(2.0, 1.0, 2.5, 380).unwrap();
        assert!(crate::front::is_nested(&strat.trajectory, Some(&v)));
        let report = check_dido_optimality(&strat.trajectory, &v).unwrap();
        assert!(
            report.area_balance <= 1e-2,
            "area balance {}",
            report.area_balance
        );
        assert!(
            report.worst_excess <= 1e-2,
            "cut excess {}",
            report.worst_excess
        );
        assert_eq!(report.verdict, DidoVerdict::Optimal);
    }

    #[test]
    fn straight_sweep_parallel_to_a_side_is_not_cut_minimal() {
        // Horizontal slices sweeping down from the apex: saturated, so the
        // area balance holds, but the mid-level chord exceeds the corner-arc
        // cut at the same fraction.
        let v = equilateral();
        let strat = directional_sweep(&v, 1.05, -std::f64::consts::FRAC_PI_2, 420).unwrap();
        assert!(matches!(strat.outcome, SweepOutcome::Completed { .. }));
        let report = check_dido_optimality(&strat.trajectory, &v).unwrap();
        assert!(report.area_balance <= 1e-2, "area balance {}", report.area_balance);
        assert!(
            report.worst_excess > 1e-2,
            "expected a cut excess, got {}",
            report.worst_excess
        );
        assert!(matches!(report.verdict, DidoVerdict::CutNotMinimal { .. }));
    }

    #[test]
    fn slicing_cost_prefers_corner_arcs_over_straight_chords() {
        let v = equilateral();
        let e = EffortTable::basic();
        let total = v.area();
        let alpha = std::f64::consts::FRAC_PI_3;
        let sqrt3 = 3.0f64.sqrt();
        // Matched removed-area grid for both families.
        let z_grid: Vec<f64> = (0..=60).map(|k| 0.01 + (0.34 - 0.01) * k as f64 / 60.0).collect();
        let build = |curves: Vec<Vec<Vec2>>| -> Trajectory {
            let mut traj = Trajectory::new();
            for (k, pts) in curves.into_iter().enumerate() {
                let c = FrontCurve::attached_from(pts, &v, 0.02).unwrap();
                let nv = c.pts.len();
                traj.record(k as f64, c, SpeedField::uniform(nv, 0.0, &e), &e, Some(&v)).unwrap();
            }
            traj
        };
        // Corner sectors at the origin vertex.
        let sectors: Vec<Vec<Vec2>> = z_grid
            .iter()
            .map(|&z| {
                let rho = (2.0 * z / alpha).sqrt();
                (0..=96)
                    .map(|k| {
                        let phi = alpha * (1.0 - k as f64 / 96.0);
                        Vec2::new(phi.cos(), phi.sin()) * rho
                    })
                    .collect()
            })
            .collect();
        // Vertical chords removing the same areas from the left.
        let chords: Vec<Vec<Vec2>> = z_grid
            .iter()
            .map(|&z| {
                let s = if z <= sqrt3 / 8.0 {
                    (2.0 * z / sqrt3).sqrt()
                } else {
                    1.0 - (2.0 * (total - z) / sqrt3).sqrt()
                };
                let top = if s <= 0.5 { sqrt3 * s } else { sqrt3 * (1.0 - s) };
                (0..=64)
                    .map(|k| Vec2::new(s, top * (1.0 - k as f64 / 64.0)))
                    .collect()
            })
            .collect();
        let cost_arcs = slicing_cost(&build(sectors)).unwrap();
        let cost_chords = slicing_cost(&build(chords)).unwrap();
        assert!(
            cost_arcs < cost_chords - 0.01,
            "arc cost {cost_arcs} should beat chord cost {cost_chords}"
        );
        // Both stay above the minimal-cut integral over the same area range.
        let mut lower = 0.0;
        for k in 0..z_grid.len() - 1 {
            let z_mid = 0.5 * (z_grid[k] + z_grid[k + 1]);
            let frac = 1.0 - z_mid / total;
            lower += kappa_lambda(&v, frac).unwrap() * (z_grid[k + 1] - z_grid[k]);
        }
        assert!(cost_arcs >= lower - 1e-3);
        assert!(cost_chords >= lower - 1e-3);
    }

    #[test]
    fn disc_arc_family_cost_equals_kappa_integral() {
        let (v, strat) = ellipse_arc_sweep(1.0, 1.0, 2.5, 380).unwrap();
        let cost = slicing_cost(&strat.trajectory).unwrap();
        // The family realizes the minimal cut at every fraction, so its cost
        // is the integral of the minimal cut against area.
        let disc = Domain::disc(1.0).unwrap();
        let total = v.area();
        let mut quad = 0.0;
        let n = 400;
        for k in 0..n {
            let f0 = k as f64 / n as f64;
            let f1 = (k + 1) as f64 / n as f64;
            let mid = kappa_lambda(&disc, 0.5 * (f0 + f1)).unwrap();
            quad += mid * (f1 - f0) * total;
        }
        assert!(
            (cost - quad).abs() <= 0.01 * quad,
            "cost {cost} vs cut integral {quad}"
        );
    }

    #[test]
    fn slicing_cost_rejects_growing_families() {
        let v = Domain::disc(1.0).unwrap();
        let e = EffortTable::basic();
        let mut traj = Trajectory::new();
        for (k, s) in [0.5f64, -0.5].iter().enumerate() {
            let c = slice_curve(&v, Vec2::new(1.0, 0.0), *s, 0.05).unwrap().unwrap();
            let nv = c.pts.len();
            traj.record(k as f64, c, SpeedField::uniform(nv, 0.0, &e), &e, Some(&v)).unwrap();
        }
        match slicing_cost(&traj) {
            Err(ConstrainedError::NotNested { .. }) => {}
            other => panic!("expected NotNested, got {other:?}"),
        }
    }

    #[test]
    fn isosceles_plan_sweeps_symmetrically() {
        let v = equilateral();
        let strat = isosceles_plan(&v, 1.0).unwrap();
        let SweepOutcome::Completed { time } = strat.outcome else {
            panic!("plan should complete: {:?}", strat.outcome);
        };
        assert_relative_eq!(time, 0.9198467, epsilon = 2e-3);
        let traj = &strat.trajectory;
        assert!(crate::front::is_nested(traj, Some(&v)));
        // Saturation: every recorded effort equals the budget.
        for (eff, c) in traj.efforts.iter().zip(&traj.curves) {
            if !c.is_empty() {
                assert_relative_eq!(*eff, 1.0, epsilon = 1e-9);
            }
        }
        // The discrete saturated area balance holds across the plan.
        let res = crate::front::area_balance_residual(traj);
        assert!(res <= 1e-2, "area balance residual {res}");
        // Mirror symmetry: the k-th configuration and its counterpart from
        // the other end are reflections about the axis.
        let pts = match &v {
            Domain::Polygon { pts } => pts.clone(),
            _ => unreachable!(),
        };
        let (b1, b2) = (pts[1], pts[2]);
        let ex = (b2 - b1).unit().unwrap();
        let reflect = |q: Vec2| {
            let d = q - b1;
            let x = d.dot(ex);
            let y = d.dot(ex.perp());
            b1 + ex * (b1.dist(b2) - x) + ex.perp() * y
        };
        let n_curves = traj.curves.iter().filter(|c| !c.is_empty()).count();
        let mut worst = 0.0f64;
        for k in 0..n_curves {
            let a = &traj.curves[k];
            let b = &traj.curves[n_curves - 1 - k];
            assert_eq!(a.pts.len(), b.pts.len());
            for (pa, pb) in a.pts.iter().zip(&b.pts) {
                worst = worst.max(reflect(*pa).dist(*pb));
            }
        }
        assert!(worst <= 1e-6, "mirror defect {worst}");
        // Every curve meets the window boundary perpendicularly, except
        // where it leaves through a corner: there the tangent is undefined
        // and any direction inside the normal cone is admissible.
        let mut worst_angle = 0.0f64;
        for c in traj.curves.iter().filter(|c| !c.is_empty()) {
            for (end, dir) in [
                (c.pts[0], (c.pts[1] - c.pts[0]).unit().unwrap()),
                (
                    *c.pts.last().unwrap(),
                    (c.pts[c.pts.len() - 1] - c.pts[c.pts.len() - 2]).unit().unwrap(),
                ),
            ] {
                if pts.iter().any(|vx| vx.dist(end) < 1e-9) {
                    continue;
                }
                let (_, s) = v.project(end);
                let tang = v.tangent_at(s);
                worst_angle = worst_angle.max(dir.dot(tang).abs().asin());
            }
        }
        assert!(worst_angle <= 1e-2, "meeting angle defect {worst_angle} rad");
    }

    #[test]
    fn isosceles_plan_rejects_other_shapes() {
        let scalene = Domain::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.3, 0.0),
            Vec2::new(0.2, 0.7),
        ])
        .unwrap();
        assert!(matches!(
            isosceles_plan(&scalene, 1.0),
            Err(ConstrainedError::NotIsosceles(_))
        ));
        assert!(matches!(
            isosceles_plan(&unit_square(), 1.0),
            Err(ConstrainedError::NotIsosceles(_))
        ));
        let tri = equilateral();
        assert!(matches!(
            isosceles_plan(&tri, -1.0),
            Err(ConstrainedError::InvalidInput(_))
        ));
    }

    #[test]
    fn nonconvex_windows_are_rejected() {
        let hook = Domain::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(1.0, 0.5),
            Vec2::new(0.0, 2.0),
        ])
        .unwrap();
        assert!(matches!(
            kappa(&hook),
            Err(ConstrainedError::UnsupportedShape(_))
        ));
        assert!(matches!(
            big_k(&hook),
            Err(ConstrainedError::UnsupportedShape(_))
        ));
    }
}
