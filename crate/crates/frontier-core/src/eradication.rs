//! Minimum-time eradication planning in the free plane under a total effort
//! budget: feasibility screening, the exact disc solution, and a discrete
//! planner for convex initial sets whose control concentrates on equal-radius
//! circular arcs at the points of maximum boundary curvature.

use std::f64::consts::PI;

use crate::effort::EffortTable;
use crate::front::{total_effort, FrontCurve, FrontError, SpeedField, Trajectory, EPS_AREA};
use crate::geom::{
    convex_hull, line_intersection, polygon_signed_area, polyline_length,
    smallest_enclosing_disc, Vec2,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EradError {
    #[error("budget {budget} is not above the sustaining level {needed}")]
    InfeasibleBudget { budget: f64, needed: f64 },
    #[error("arc-radius bisection failed at t={time}: removable area {removable} < target {target}")]
    RadiusBisectionFailed { time: f64, removable: f64, target: f64 },
    #[error("set lost convexity at t={time} (min signed curvature {min_curvature})")]
    ConvexityLost { time: f64, min_curvature: f64 },
    #[error("plan stalled at t={time} with area {area} remaining")]
    Stalled { time: f64, area: f64 },
    #[error(transparent)]
    Front(#[from] FrontError),
}

/// Feasibility screen: a budget above the convex-hull perimeter suffices;
/// below that the screen is inconclusive, not negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Unknown,
}

/// Sufficient condition for eradication: the budget exceeds the perimeter of
/// the convex hull of the initial set.
pub fn feasible(omega0: &FrontCurve, m: f64) -> Feasibility {
    let hull = convex_hull(&omega0.pts);
    if hull.len() >= 3 && polyline_length(&hull, true) < m {
        Feasibility::Feasible
    } else {
        Feasibility::Unknown
    }
}

/// Exact minimum eradication time for a disc of radius `r0` under budget `m`:
/// the radius obeys dR/dt = 1 - m/(2πR), giving
/// T = c·ln(c/(c - r0)) - r0 with c = m/(2π).
pub fn disc_min_time(r0: f64, m: f64) -> Result<f64, EradError> {
    if r0 <= 0.0 {
        return Ok(0.0);
    }
    let needed = 2.0 * PI * r0;
    if m <= needed {
        return Err(EradError::InfeasibleBudget { budget: m, needed });
    }
    let c = m / (2.0 * PI);
    Ok(c * (c / (c - r0)).ln() - r0)
}

/// A budget-saturating eradication plan for a convex set: at each recorded
/// time the control is active on equal-radius circular arcs covering the
/// maximum-curvature portions of the boundary, and free growth (β = -1)
/// holds elsewhere.
#[derive(Debug, Clone)]
pub struct BudgetedPlan {
    pub budget: f64,
    /// Common active-arc radius at each recorded time.
    pub radius_series: Vec<f64>,
    /// Per recorded time, which vertices of the recorded curve are active
    /// (β > -1).
    pub active_masks: Vec<Vec<bool>>,
    /// Number of contiguous active arcs at each recorded time.
    pub n_active_arcs: Vec<usize>,
    pub trajectory: Trajectory,
    /// Total time to empty, including the analytic terminal phase.
    pub eradication_time: Option<f64>,
    /// Enclosing-disc radius at the switch to the analytic terminal phase.
    pub terminal_radius: f64,
    /// Duration of the analytic terminal phase.
    pub terminal_time: f64,
}

/// Contiguous runs of `true` in circular order, as (start index, length).
pub fn active_runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let n = mask.len();
    if n == 0 {
        return Vec::new();
    }
    if mask.iter().all(|&b| b) {
        return vec![(0, n)];
    }
    let mut runs = Vec::new();
    for i in 0..n {
        if mask[i] && !mask[(i + n - 1) % n] {
            let mut len = 0;
            while mask[(i + len) % n] {
                len += 1;
            }
            runs.push((i, len));
        }
    }
    runs
}

/// Radius of each active arc, measured from the curve as the reciprocal mean
/// curvature over the run's interior vertices. Runs too short to measure are
/// skipped.
pub fn arc_radii(curve: &FrontCurve, mask: &[bool]) -> Vec<f64> {
    let curv = curve.curvature();
    let mut out = Vec::new();
    for (start, len) in active_runs(mask) {
        if len < 4 {
            continue;
        }
        let n = curve.pts.len();
        // Interior of the run only: junction vertices mix arc and free data.
        let mut vals: Vec<f64> =
            (1..len - 1).map(|j| curv[(start + j) % n]).filter(|k| *k > 1e-9).collect();
        if vals.len() >= 2 {
            // Median curvature: run ends can include junction vertices whose
            // three-point curvature mixes the arc with the adjacent free
            // boundary, and those would bias a mean.
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mid = vals.len() / 2;
            let med = if vals.len() % 2 == 1 {
                vals[mid]
            } else {
                0.5 * (vals[mid - 1] + vals[mid])
            };
            out.push(1.0 / med);
        }
    }
    out
}

/// Collapse consecutive vertices closer than `tol` (including across the
/// closing edge).
fn dedupe_closed(pts: Vec<Vec2>, tol: f64) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().map(|q| q.dist(p) > tol).unwrap_or(true) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(*out.last().unwrap()) <= tol {
        out.pop();
    }
    out
}

/// Outward offset of a convex counterclockwise polygon by `d`, rounding each
/// vertex with an arc sampled at roughly `spacing`.
fn dilate_convex(pts: &[Vec2], d: f64, spacing: f64) -> Vec<Vec2> {
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let pts = dedupe_closed(pts.to_vec(), 1e-12 * (1.0 + scale));
    let n = pts.len();
    let mut out = Vec::with_capacity(n * 2);
    for i in 0..n {
        let prev = pts[(i + n - 1) % n];
        let cur = pts[i];
        let next = pts[(i + 1) % n];
        let (tp, tn) = match ((cur - prev).unit(), (next - cur).unit()) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => (a, a),
            (None, Some(b)) => (b, b),
            (None, None) => continue,
        };
        // Outward normal of a CCW polygon is the right-hand perpendicular.
        let np = -tp.perp();
        let nn = -tn.perp();
        let theta = tp.cross(tn).atan2(tp.dot(tn));
        if theta > 1e-9 && theta * d >= 0.5 * spacing {
            // Genuine corner sweep: sample the offset arc.
            out.push(cur + np * d);
            let k = ((theta * d / spacing.max(1e-9)).ceil() as usize).clamp(1, 1024);
            for j in 1..=k {
                out.push(cur + np.rotate(theta * j as f64 / k as f64) * d);
            }
        } else {
            // Smooth vertex: one mitered offset point keeps the count stable.
            let bis = (np + nn).unit().unwrap_or(nn);
            let cosphi = bis.dot(nn).clamp(0.25, 1.0);
            out.push(cur + bis * (d / cosphi));
        }
    }
    dedupe_closed(out, 1e-12 * (1.0 + scale + d))
}

/// Inward offset of a convex counterclockwise polygon, with provenance: which
/// input half-plane carries each surviving edge.
struct Erosion {
    /// Inward-shifted edge half-planes (outward normal, offset): inside is
    /// x·n <= c. Collinear edge chains contribute one plane.
    planes: Vec<(Vec2, f64)>,
    /// The eroded polygon, counterclockwise.
    poly: Vec<Vec2>,
    /// For each eroded edge (poly[i] -> poly[i+1]), the index into `planes`
    /// it lies on; `usize::MAX` when unidentified.
    edge_plane: Vec<usize>,
}

/// Clip a convex counterclockwise polygon by every edge's inward-shifted
/// half-plane and record which plane each surviving edge lies on. `None` when
/// the erosion is empty.
fn erode_planes(pts: &[Vec2], r: f64) -> Option<Erosion> {
    let n = pts.len();
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let plane_tol = 1e-9 * (1.0 + scale + r);
    // Keep side: x·n_out <= c.
    let mut planes: Vec<(Vec2, f64)> = Vec::with_capacity(n);
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let Some(t) = (b - a).unit() else { continue };
        let n_out = -t.perp();
        let c = a.dot(n_out) - r;
        if let Some(&(pn, pc)) = planes.last() {
            if pn.dot(n_out) > 1.0 - 1e-12 && (pc - c).abs() < plane_tol {
                continue;
            }
        }
        planes.push((n_out, c));
    }
    if planes.len() >= 2 {
        let (n0, c0) = planes[0];
        let (nl, cl) = *planes.last().unwrap();
        if n0.dot(nl) > 1.0 - 1e-12 && (c0 - cl).abs() < plane_tol {
            planes.pop();
        }
    }
    let mut poly: Vec<Vec2> = pts.to_vec();
    for &(n_out, c) in &planes {
        let mut clipped: Vec<Vec2> = Vec::with_capacity(poly.len() + 1);
        let m = poly.len();
        for j in 0..m {
            let p = poly[j];
            let q = poly[(j + 1) % m];
            let dp = p.dot(n_out) - c;
            let dq = q.dot(n_out) - c;
            if dp <= 0.0 {
                clipped.push(p);
            }
            if (dp < 0.0) != (dq < 0.0) && (dq - dp).abs() > 0.0 {
                let t = dp / (dp - dq);
                clipped.push(p.lerp(q, t.clamp(0.0, 1.0)));
            }
        }
        poly = clipped;
        if poly.len() < 3 {
            return None;
        }
    }
    let poly = dedupe_closed(poly, 1e-10 * (1.0 + scale));
    if poly.len() < 3 || polygon_signed_area(&poly) <= 0.0 {
        return None;
    }
    let m = poly.len();
    let fit_tol = 1e-6 * (1.0 + scale + r);
    let edge_plane = (0..m)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % m];
            let mid = (a + b) * 0.5;
            let Some(t) = (b - a).unit() else { return usize::MAX };
            let n_e = -t.perp();
            planes
                .iter()
                .enumerate()
                .filter(|(_, (pn, pc))| {
                    pn.dot(n_e) > 1.0 - 1e-6 && (mid.dot(*pn) - pc).abs() < fit_tol
                })
                .min_by(|(_, (pa, ca)), (_, (pb, cb))| {
                    let da = (mid.dot(*pa) - ca).abs();
                    let db = (mid.dot(*pb) - cb).abs();
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(idx, _)| idx)
                .unwrap_or(usize::MAX)
        })
        .collect();
    Some(Erosion { planes, poly, edge_plane })
}

/// Inward offset of a convex counterclockwise polygon by `r`. `None` when the
/// erosion is empty.
fn erode_convex(pts: &[Vec2], r: f64) -> Option<Vec<Vec2>> {
    erode_planes(pts, r).map(|e| e.poly)
}

/// Turn angle above which a corner of the eroded polygon counts as a genuine
/// corner for the opening (gets a radius arc); below it, a corner is treated
/// as a sampling artifact of smooth boundary and the inward offset is
/// inverted exactly instead.
const OPEN_CORNER_ANGLE: f64 = 0.35;

/// Morphological opening (erode then dilate by `r`) of a convex polygon;
/// returns the removed area and the opened polygon.
///
/// Corners of the eroded polygon are rounded with sampled radius-`r` arcs
/// when they turn sharply or were formed by merging non-adjacent half-planes
/// (a genuine truncation). Sampling-scale corners between originally adjacent
/// half-planes are instead inverted through the wedge, which restores the
/// original boundary there bit-for-bit — untouched portions survive the round
/// trip exactly, keeping realized speeds clean on the inactive part.
fn opening_removed(pts: &[Vec2], r: f64, spacing: f64) -> (f64, Option<Vec<Vec2>>) {
    let area = polygon_signed_area(pts);
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let Some(er) = erode_planes(pts, r) else {
        return (area, None);
    };
    let np = er.planes.len();
    let m = er.poly.len();
    let mut out: Vec<Vec2> = Vec::with_capacity(m * 2);
    for i in 0..m {
        let v = er.poly[i];
        let pe_in = er.edge_plane[(i + m - 1) % m];
        let pe_out = er.edge_plane[i];
        if pe_in == usize::MAX || pe_out == usize::MAX {
            continue;
        }
        let n_in = er.planes[pe_in].0;
        let n_out = er.planes[pe_out].0;
        let turn = n_in.cross(n_out).atan2(n_in.dot(n_out));
        let adjacent = (pe_out + np - pe_in) % np == 1;
        if adjacent && turn.abs() <= OPEN_CORNER_ANGLE {
            // Sampling-scale wedge: invert the inward offset exactly.
            let bis = (n_in + n_out).unit().unwrap_or(n_out);
            let cosphi = bis.dot(n_out).clamp(0.05, 1.0);
            out.push(v + bis * (r / cosphi));
        } else {
            // Genuine corner: round with a sampled radius-`r` arc.
            let sweep = turn.max(0.0);
            let k = ((sweep * r / spacing.max(1e-9)).ceil() as usize).clamp(1, 4096);
            for j in 0..=k {
                out.push(v + n_in.rotate(sweep * j as f64 / k as f64) * r);
            }
        }
    }
    let opened = dedupe_closed(out, 1e-12 * (1.0 + scale + r));
    if opened.len() < 3 {
        return (area, None);
    }
    let removed = area - polygon_signed_area(&opened);
    (removed.max(0.0), Some(opened))
}

/// Signed displacement along `dir` from `p` to the polygon boundary:
/// the intersection of the line through `p` in direction `dir` with the
/// closed polyline, closest to `p`.
fn ray_offset_to_polyline(p: Vec2, dir: Vec2, poly: &[Vec2]) -> Option<f64> {
    let n = poly.len();
    let far = p + dir;
    let mut best: Option<f64> = None;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if let Some(q) = line_intersection(p, far, a, b) {
            let ab = b - a;
            let len2 = ab.norm2();
            let u = if len2 > 0.0 { (q - a).dot(ab) / len2 } else { -1.0 };
            if (-1e-9..=1.0 + 1e-9).contains(&u) {
                let s = (q - p).dot(dir);
                if best.map(|bv: f64| s.abs() < bv.abs()).unwrap_or(true) {
                    best = Some(s);
                }
            }
        }
    }
    best
}

/// Like `ray_offset_to_polyline`, but first scans a small window of edges
/// around `hint` (hits advance nearly monotonically along both curves during
/// a step) and only falls back to the full scan on a miss. Returns the
/// displacement and the edge index it was found on.
fn ray_offset_hinted(p: Vec2, dir: Vec2, poly: &[Vec2], hint: usize) -> Option<(f64, usize)> {
    let n = poly.len();
    if n >= 24 {
        let far = p + dir;
        let mut best: Option<(f64, usize)> = None;
        for off in 0..16usize {
            let i = (hint + n + off - 4) % n;
            let a = poly[i];
            let b = poly[(i + 1) % n];
            if let Some(q) = line_intersection(p, far, a, b) {
                let ab = b - a;
                let len2 = ab.norm2();
                let u = if len2 > 0.0 { (q - a).dot(ab) / len2 } else { -1.0 };
                if (-1e-9..=1.0 + 1e-9).contains(&u) {
                    let s = (q - p).dot(dir);
                    if best.map(|(bv, _)| s.abs() < bv.abs()).unwrap_or(true) {
                        best = Some((s, i));
                    }
                }
            }
        }
        if best.is_some() {
            return best;
        }
    }
    let far = p + dir;
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if let Some(q) = line_intersection(p, far, a, b) {
            let ab = b - a;
            let len2 = ab.norm2();
            let u = if len2 > 0.0 { (q - a).dot(ab) / len2 } else { -1.0 };
            if (-1e-9..=1.0 + 1e-9).contains(&u) {
                let s = (q - p).dot(dir);
                if best.map(|(bv, _)| s.abs() < bv.abs()).unwrap_or(true) {
                    best = Some((s, i));
                }
            }
        }
    }
    best
}

/// Insert evenly spaced collinear points so no edge exceeds `max_len`.
/// Area-exact and curvature-neutral, unlike resampling.
fn subdivide_edges(pts: &[Vec2], max_len: f64) -> Vec<Vec2> {
    let n = pts.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        out.push(a);
        let len = a.dist(b);
        if len > max_len {
            let k = (len / max_len).ceil() as usize;
            for j in 1..k {
                out.push(a.lerp(b, j as f64 / k as f64));
            }
        }
    }
    out
}

/// Outward unit normals of a closed counterclockwise polyline.
fn outward_normals(pts: &[Vec2]) -> Vec<Vec2> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let prev = pts[(i + n - 1) % n];
            let next = pts[(i + 1) % n];
            let tp = (pts[i] - prev).unit().unwrap_or(Vec2::new(1.0, 0.0));
            let tn = (next - pts[i]).unit().unwrap_or(tp);
            (-(tp + tn).perp()).unit().unwrap_or(-tn.perp())
        })
        .collect()
}

/// One fully evaluated candidate step shape: the scalar that produced it, its
/// boundary, the realized per-vertex speeds from the current curve, and the
/// effort those speeds cost.
struct StepChoice {
    x: f64,
    pts: Vec<Vec2>,
    betas: Vec<f64>,
    effort: f64,
}

/// Realized per-vertex speeds from `current` to a candidate next boundary
/// (signed displacement along the outward normal over `dt`, negated so inward
/// motion is positive), and the effort they cost.
fn realized_speeds(
    current: &FrontCurve,
    normals: &[Vec2],
    next_pts: &[Vec2],
    dt: f64,
    e: &EffortTable,
) -> (Vec<f64>, f64) {
    let mut betas = Vec::with_capacity(current.pts.len());
    let mut hint = 0usize;
    for (i, &p) in current.pts.iter().enumerate() {
        match ray_offset_hinted(p, normals[i], next_pts, hint) {
            Some((tau, at)) => {
                betas.push(-tau / dt);
                hint = at;
            }
            None => betas.push(-1.0),
        }
    }
    let field = SpeedField::new(betas.clone(), e);
    let effort = total_effort(current, &field, e).unwrap_or(f64::INFINITY);
    (betas, effort)
}

/// Solve the step's scalar (opening radius or erosion depth) so the realized
/// effort of the step equals the budget `m`: bracket around `x0`, then bisect
/// on effort, which grows monotonically with the scalar. Returns the
/// evaluated candidate closest to the budget.
fn refine_to_budget(
    current: &FrontCurve,
    normals: &[Vec2],
    dt: f64,
    m: f64,
    e: &EffortTable,
    x0: f64,
    build: &mut dyn FnMut(f64) -> Option<Vec<Vec2>>,
) -> Option<StepChoice> {
    let tol = 1e-3 * m;
    let eval = |x: f64, build: &mut dyn FnMut(f64) -> Option<Vec<Vec2>>| -> Option<StepChoice> {
        let pts = build(x)?;
        let (betas, effort) = realized_speeds(current, normals, &pts, dt, e);
        Some(StepChoice { x, pts, betas, effort })
    };
    let first = eval(x0, build)?;
    if (first.effort - m).abs() <= tol {
        return Some(first);
    }
    // Bracket the budget. A build failure (empty erosion) reads as infinite
    // effort: a valid upper end of the bracket, never a returnable candidate.
    let mut lo_x;
    let mut hi_x;
    let mut best = first;
    if best.effort > m {
        hi_x = best.x;
        lo_x = best.x;
        let mut found = false;
        for _ in 0..20 {
            lo_x *= 0.7;
            if let Some(c) = eval(lo_x, build) {
                let below = c.effort < m;
                if (c.effort - m).abs() < (best.effort - m).abs() {
                    best = c;
                }
                if below {
                    found = true;
                    break;
                }
            }
        }
        if !found {
            lo_x = 0.0;
        }
    } else {
        lo_x = best.x;
        hi_x = best.x;
        let mut found = false;
        for _ in 0..20 {
            hi_x *= 1.3;
            match eval(hi_x, build) {
                Some(c) => {
                    let above = c.effort > m;
                    if (c.effort - m).abs() < (best.effort - m).abs() {
                        best = c;
                    }
                    if above {
                        found = true;
                        break;
                    }
                }
                None => {
                    found = true;
                    break;
                }
            }
        }
        if !found {
            return Some(best);
        }
    }
    for _ in 0..40 {
        if hi_x - lo_x <= 1e-12 * (1.0 + hi_x) {
            break;
        }
        let mid = 0.5 * (lo_x + hi_x);
        match eval(mid, build) {
            Some(c) => {
                let err = (c.effort - m).abs();
                let above = c.effort > m;
                if err < (best.effort - m).abs() {
                    best = c;
                }
                if err <= tol {
                    break;
                }
                if above {
                    hi_x = mid;
                } else {
                    lo_x = mid;
                }
            }
            None => hi_x = mid,
        }
    }
    Some(best)
}

/// Plan eradication of a convex set under budget `m` with step `dt`.
///
/// Each step grows the whole boundary freely by `dt`, then replaces the
/// highest-curvature boundary portions with circular arcs of one common
/// radius (a morphological opening); the radius is solved by bisection so the
/// realized speeds of the step cost exactly the budget. When no opening
/// radius can meter out the step's removal (the constant-curvature, disc-like
/// regime, where an opening removes nothing until it removes everything), the
/// whole boundary activates and the set shrinks uniformly at the
/// budget-exhausting depth instead. A tiny remainder is finished analytically
/// as its smallest enclosing disc.
pub fn plan_convex(omega0: &FrontCurve, m: f64, dt: f64) -> Result<BudgetedPlan, EradError> {
    if omega0.pts.len() < 3 {
        return Err(EradError::Front(FrontError::InvalidCurve(
            "planning needs a closed curve with at least 3 vertices".into(),
        )));
    }
    let hull = convex_hull(&omega0.pts);
    let hull_perimeter = polyline_length(&hull, true);
    if hull_perimeter >= m {
        return Err(EradError::InfeasibleBudget { budget: m, needed: hull_perimeter });
    }
    // Convexity precondition on the supplied curve.
    {
        let curv = omega0.curvature();
        let min_c = curv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_c < -1e-3 {
            return Err(EradError::ConvexityLost { time: 0.0, min_curvature: min_c });
        }
    }
    let e = EffortTable::basic();
    let h0 = omega0.h0;
    let mut current = FrontCurve {
        pts: hull.clone(),
        closure: crate::front::Closure::Closed,
        labels: None,
        h0,
    }
    .resample()
    .with_arclength_labels();

    let mut plan = BudgetedPlan {
        budget: m,
        radius_series: Vec::new(),
        active_masks: Vec::new(),
        n_active_arcs: Vec::new(),
        trajectory: Trajectory::new(),
        eradication_time: None,
        terminal_radius: 0.0,
        terminal_time: 0.0,
    };

    let mut t = 0.0;
    let max_steps = ((60.0 / dt) as usize).max(1000);
    let spacing = 0.5 * h0;
    // The terminal switch must fire while one step's quota m·dt is still
    // comfortably removable from the remnant.
    let terminal_area = (100.0 * EPS_AREA).max(3.0 * m * dt);

    for _ in 0..max_steps {
        let (area, perimeter) = current.area_perimeter(None)?;
        if area <= terminal_area {
            // Analytic terminal phase on the smallest enclosing disc.
            let (_, rf) = smallest_enclosing_disc(&current.pts);
            let tail = disc_min_time(rf, m)?;
            let beta_end = m / perimeter.max(1e-12) - 1.0;
            let nv = current.pts.len();
            plan.radius_series.push(rf);
            plan.active_masks.push(vec![true; nv]);
            plan.n_active_arcs.push(1);
            plan.trajectory.record(
                t,
                current.clone(),
                SpeedField::uniform(nv, beta_end, &e),
                &e,
                None,
            )?;
            plan.trajectory.record(
                t + tail,
                FrontCurve::empty(h0),
                SpeedField { betas: Vec::new(), efforts: Vec::new() },
                &e,
                None,
            )?;
            plan.radius_series.push(0.0);
            plan.active_masks.push(Vec::new());
            plan.n_active_arcs.push(0);
            plan.terminal_radius = rf;
            plan.terminal_time = tail;
            plan.eradication_time = Some(t + tail);
            break;
        }
        if perimeter >= m {
            return Err(EradError::Stalled { time: t, area });
        }

        // Free growth of the entire boundary.
        let grown = dilate_convex(&current.pts, dt, spacing);
        let grown_area = polygon_signed_area(&grown);
        let target = m * dt;
        let normals = outward_normals(&current.pts);
        // Every candidate gets the same finish: collinear subdivision keeps
        // the spacing band satisfied without resampling (which would inscribe
        // the polygon in itself and bleed area); a true resample happens only
        // if the band is still violated.
        let finalize = |p: Vec<Vec2>| -> Vec<Vec2> {
            let cand = FrontCurve {
                pts: subdivide_edges(&p, 2.0 * h0),
                closure: crate::front::Closure::Closed,
                labels: None,
                h0,
            };
            if cand.spacing_ok() { cand.pts } else { cand.resample().pts }
        };

        // Screen the regime on removable area, then solve the step's scalar
        // so the realized effort equals the budget.
        let r_hi = {
            let (c0, r0) = smallest_enclosing_disc(&grown);
            let _ = c0;
            r0 * 1.01
        };
        let (removable, _) = opening_removed(&grown, r_hi, spacing);
        let mut choice: Option<StepChoice> = None;
        let mut r_step = 0.0;
        if removable >= 0.95 * target {
            let (mut lo, mut hi) = (0.0f64, r_hi);
            for _ in 0..60 {
                if hi - lo <= 1e-8 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let (rem, _) = opening_removed(&grown, mid, spacing);
                if rem < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (rem, _) = opening_removed(&grown, hi, spacing);
            if rem >= 0.95 * target && rem <= 2.0 * target {
                let mut build = |x: f64| -> Option<Vec<Vec2>> {
                    let (_, opened) = opening_removed(&grown, x, spacing);
                    opened.map(&finalize)
                };
                if let Some(c) = refine_to_budget(&current, &normals, dt, m, &e, hi, &mut build) {
                    r_step = c.x;
                    choice = Some(c);
                }
            }
        }
        if choice.is_none() {
            // Constant-curvature regime: the opening cannot meter out the
            // removal (it removes nothing until it removes everything), so the
            // whole boundary activates and the set shrinks uniformly.
            let p_grown = polyline_length(&grown, true);
            let mut delta_hi = (2.0 * target / p_grown).min(0.45 * grown_area / p_grown);
            while erode_convex(&grown, delta_hi).is_none() && delta_hi > 1e-12 {
                delta_hi *= 0.5;
            }
            let removed_hi = grown_area
                - erode_convex(&grown, delta_hi).map(|p| polygon_signed_area(&p)).unwrap_or(0.0);
            if removed_hi < target {
                return Err(EradError::RadiusBisectionFailed {
                    time: t,
                    removable: removed_hi,
                    target,
                });
            }
            let (mut lo, mut hi) = (0.0f64, delta_hi);
            for _ in 0..60 {
                if hi - lo <= 1e-12 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let rem = grown_area
                    - erode_convex(&grown, mid).map(|p| polygon_signed_area(&p)).unwrap_or(0.0);
                if rem < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut build =
                |x: f64| -> Option<Vec<Vec2>> { erode_convex(&grown, x).map(&finalize) };
            let c = refine_to_budget(&current, &normals, dt, m, &e, hi, &mut build).ok_or(
                EradError::RadiusBisectionFailed { time: t, removable: removed_hi, target },
            )?;
            r_step = polyline_length(&c.pts, true) / (2.0 * PI);
            choice = Some(c);
        }
        let StepChoice { pts: next_pts, betas, .. } = choice.expect("a step shape was produced");

        // Convexity audit on the accepted shape.
        {
            let probe = FrontCurve {
                pts: next_pts.clone(),
                closure: crate::front::Closure::Closed,
                labels: None,
                h0,
            };
            let curv = probe.curvature();
            let min_c = curv.iter().cloned().fold(f64::INFINITY, f64::min);
            if min_c < -1e-3 {
                return Err(EradError::ConvexityLost { time: t + dt, min_curvature: min_c });
            }
        }
        let next = FrontCurve {
            pts: next_pts,
            closure: crate::front::Closure::Closed,
            labels: None,
            h0,
        };

        let mask: Vec<bool> = betas.iter().map(|&b| b > -1.0 + 1e-3).collect();
        let n_arcs = active_runs(&mask).len();
        let field = SpeedField::new(betas, &e);
        plan.radius_series.push(r_step);
        plan.active_masks.push(mask);
        plan.n_active_arcs.push(n_arcs);
        plan.trajectory.record(t, current.clone(), field, &e, None)?;

        // Labels for the next curve: pull back along its own normals.
        let mut next = next;
        {
            let nn = outward_normals(&next.pts);
            let mut labels = Vec::with_capacity(next.pts.len());
            for (i, &p) in next.pts.iter().enumerate() {
                let lab = ray_offset_to_polyline(p, nn[i], &current.pts)
                    .and_then(|s| label_at_point(&current, p + nn[i] * s))
                    .unwrap_or(0.0);
                labels.push(lab);
            }
            next.labels = Some(labels);
        }
        current = next;
        t += dt;
    }
    if plan.eradication_time.is_none() {
        let (area, _) = current.area_perimeter(None)?;
        return Err(EradError::Stalled { time: t, area });
    }
    Ok(plan)
}

/// Label of the closed labeled polyline at the point nearest `q`.
fn label_at_point(curve: &FrontCurve, q: Vec2) -> Option<f64> {
    let labels = curve.labels.as_ref()?;
    let n = curve.pts.len();
    let (mut bi, mut bu, mut bd) = (0usize, 0.0f64, f64::INFINITY);
    for i in 0..n {
        let a = curve.pts[i];
        let b = curve.pts[(i + 1) % n];
        let ab = b - a;
        let len2 = ab.norm2();
        let u = if len2 > 0.0 { ((q - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let d = q.dist(a.lerp(b, u));
        if d < bd {
            bd = d;
            bi = i;
            bu = u;
        }
    }
    let la = labels[bi];
    let mut lb = labels[(bi + 1) % n];
    if lb < la {
        lb += 1.0;
    }
    Some((la + bu * (lb - la)).rem_euclid(1.0))
}

/// Exact saturated disc plan as a recorded trajectory: concentric circles
/// with the uniform field that spends the whole budget on the sampled
/// boundary, β(t) = m/P(t) - 1. The radius law is kept consistent with the
/// sampled polygon's own area and perimeter, so dA/dt = P - m holds exactly
/// on the records; it converges to dR/dt = 1 - m/(2πR) as the sampling
/// refines.
pub fn disc_saturated_trajectory(
    r0: f64,
    m: f64,
    n_vertices: usize,
    dt: f64,
) -> Result<Trajectory, EradError> {
    if m <= 2.0 * PI * r0 {
        return Err(EradError::InfeasibleBudget { budget: m, needed: 2.0 * PI * r0 });
    }
    let e = EffortTable::basic();
    let n = n_vertices.max(8);
    // Inscribed n-gon coefficients: area = ca·R², perimeter = cp·R.
    let ca = 0.5 * n as f64 * (2.0 * PI / n as f64).sin();
    let cp = 2.0 * n as f64 * (PI / n as f64).sin();
    let mut traj = Trajectory::new();
    let mut r = r0;
    let mut t = 0.0;
    // Stop while one step still resolves the shrink rate: near extinction
    // |dR/dt| ~ m/(2·ca·R) blows up and fixed-dt samples of A(t) stop being
    // smooth on the step scale.
    let r_min = (0.02 * r0).max((m * dt / (0.2 * ca)).sqrt());
    while r > r_min {
        let curve = FrontCurve::circle(Vec2::ZERO, r, n).with_arclength_labels();
        let beta = m / (cp * r) - 1.0;
        traj.record(t, curve, SpeedField::uniform(n, beta, &e), &e, None)?;
        // One RK4 step of dA/dt = P - m on A = ca·R²: dR/dt = (cp·R - m)/(2·ca·R).
        let f = |r: f64| (cp * r - m) / (2.0 * ca * r);
        let k1 = f(r);
        let k2 = f(r + 0.5 * dt * k1);
        let k3 = f(r + 0.5 * dt * k2);
        let k4 = f(r + dt * k3);
        r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
    }
    let r_end = r.max(1e-4);
    let curve = FrontCurve::circle(Vec2::ZERO, r_end, n).with_arclength_labels();
    let beta = m / (cp * r_end) - 1.0;
    traj.record(t, curve, SpeedField::uniform(n, beta, &e), &e, None)?;
    Ok(traj)
}

/// A deliberately wasteful disc plan: free growth (β = -1, zero effort) for
/// `t_free`, then the saturated shrink under budget `m`. Used as a negative
/// control for optimality checks.
pub fn disc_split_trajectory(
    r0: f64,
    t_free: f64,
    m: f64,
    n_vertices: usize,
    dt: f64,
) -> Result<Trajectory, EradError> {
    let r1 = r0 + t_free;
    if m <= 2.0 * PI * r1 {
        return Err(EradError::InfeasibleBudget { budget: m, needed: 2.0 * PI * r1 });
    }
    let e = EffortTable::basic();
    let mut traj = Trajectory::new();
    let mut t = 0.0;
    let steps_free = (t_free / dt).round() as usize;
    for _ in 0..steps_free {
        let r = r0 + t;
        let curve = FrontCurve::circle(Vec2::ZERO, r, n_vertices).with_arclength_labels();
        traj.record(t, curve, SpeedField::uniform(n_vertices, -1.0, &e), &e, None)?;
        t += dt;
    }
    let tail = disc_saturated_trajectory(r0 + t, m, n_vertices, dt)?;
    for k in 0..tail.times.len() {
        traj.times.push(t + tail.times[k]);
        traj.curves.push(tail.curves[k].clone());
        traj.fields.push(tail.fields[k].clone());
        traj.areas.push(tail.areas[k]);
        traj.perimeters.push(tail.perimeters[k]);
        traj.efforts.push(tail.efforts[k]);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::front::area_balance_residual;

    #[test]
    fn disc_time_closed_form_and_quadrature() {
        let t = disc_min_time(1.0, 4.0 * PI).unwrap();
        assert!((t - (2.0 * (2.0f64).ln() - 1.0)).abs() < 1e-12, "T = {t}");
        // Cross-check by Simpson quadrature of dT = dR/(m/(2πR) - 1).
        let c = 2.0;
        let f = |r: f64| r / (c - r);
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let quad = s * h / 3.0;
        assert!((t - quad).abs() < 1e-8, "quadrature {quad} vs {t}");
    }

    #[test]
    fn disc_time_requires_budget_above_sustaining() {
        assert!(matches!(
            disc_min_time(1.0, 2.0 * PI),
            Err(EradError::InfeasibleBudget { .. })
        ));
        assert_eq!(disc_min_time(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn disc_time_large_budget_matches_area_rate() {
        // T·m approaches the initial area as the budget dominates.
        let tm100 = disc_min_time(1.0, 100.0).unwrap() * 100.0;
        let tm1000 = disc_min_time(1.0, 1000.0).unwrap() * 1000.0;
        assert!((tm100 - PI).abs() / PI < 0.05, "T·m at 100: {tm100}");
        assert!((tm1000 - PI).abs() < (tm100 - PI).abs());
    }

    #[test]
    fn feasibility_uses_the_convex_hull() {
        let disc = FrontCurve::circle(Vec2::ZERO, 1.0, 256);
        assert_eq!(feasible(&disc, 7.0), Feasibility::Feasible);
        assert_eq!(feasible(&disc, 6.0), Feasibility::Unknown);
        // L-shape: own perimeter 8, hull perimeter 6 + sqrt(2) ≈ 7.41.
        let l = FrontCurve::closed_from(
            vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(2.0, 0.0),
                Vec2::new(2.0, 1.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(1.0, 2.0),
                Vec2::new(0.0, 2.0),
            ],
            0.1,
        )
        .unwrap();
        assert_eq!(feasible(&l, 7.5), Feasibility::Feasible);
        assert_eq!(feasible(&l, 7.3), Feasibility::Unknown);
    }

    #[test]
    fn saturated_disc_trajectory_is_consistent() {
        let m = 4.0 * PI;
        let traj = disc_saturated_trajectory(1.0, m, 128, 1e-3).unwrap();
        for k in 0..traj.times.len() {
            assert!((traj.efforts[k] - m).abs() / m < 1e-2, "effort {}", traj.efforts[k]);
        }
        assert!(area_balance_residual(&traj) < 1e-2);
        // The radius history must land on the closed-form time law.
        let t_half = traj
            .times
            .iter()
            .zip(&traj.areas)
            .find(|(_, a)| **a <= PI * 0.25)
            .map(|(t, _)| *t)
            .unwrap();
        let exact = disc_min_time(1.0, m).unwrap() - disc_min_time(0.5, m).unwrap();
        assert!((t_half - exact).abs() < 5e-3, "half-radius time {t_half} vs {exact}");
    }

    #[test]
    fn split_disc_trajectory_wastes_the_free_phase() {
        let m = 4.0 * PI;
        let traj = disc_split_trajectory(1.0, 0.25, m, 96, 1e-3).unwrap();
        let k_free = (0.25 / 1e-3) as usize - 1;
        assert!(traj.efforts[k_free].abs() < 1e-9);
        assert!(traj.areas[k_free] > traj.areas[0]);
        let last = *traj.efforts.last().unwrap();
        assert!((last - m).abs() / m < 1e-2);
    }

    #[test]
    fn planned_disc_matches_exact_time() {
        let m = 4.0 * PI;
        let c = FrontCurve::circle(Vec2::ZERO, 1.0, 200);
        let plan = plan_convex(&c, m, 1e-3).unwrap();
        let t = plan.eradication_time.unwrap();
        let exact = disc_min_time(1.0, m).unwrap();
        assert!((t - exact).abs() / exact < 1e-2, "planned {t} vs exact {exact}");
        // Disc symmetry: the whole boundary stays active with r(t) = R(t).
        assert!(plan.active_masks[0].iter().all(|&b| b));
        assert_eq!(plan.n_active_arcs[0], 1);
        assert!((plan.radius_series[0] - 1.0).abs() < 2e-2, "r {}", plan.radius_series[0]);
        for k in 0..plan.trajectory.times.len() - 1 {
            let eff = plan.trajectory.efforts[k];
            assert!((eff - m).abs() / m < 1e-2, "effort {eff} at step {k}");
        }
    }

    #[test]
    fn planned_rectangle_activates_four_equal_corner_arcs() {
        let m = 12.0;
        let h0 = 0.02;
        let mut pts = Vec::new();
        let steps = |a: Vec2, b: Vec2, out: &mut Vec<Vec2>| {
            let k = ((b - a).norm() / h0).round() as usize;
            for i in 0..k {
                out.push(a.lerp(b, i as f64 / k as f64));
            }
        };
        steps(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), &mut pts);
        steps(Vec2::new(2.0, 0.0), Vec2::new(2.0, 1.0), &mut pts);
        steps(Vec2::new(2.0, 1.0), Vec2::new(0.0, 1.0), &mut pts);
        steps(Vec2::new(0.0, 1.0), Vec2::new(0.0, 0.0), &mut pts);
        let c = FrontCurve::closed_from(pts, h0).unwrap();
        let plan = plan_convex(&c, m, 2e-3).unwrap();
        // Early in the plan the active set is the four corner arcs, all of
        // one radius.
        let k = 4;
        assert_eq!(plan.n_active_arcs[k], 4, "active arcs: {}", plan.n_active_arcs[k]);
        let radii = arc_radii(&plan.trajectory.curves[k], &plan.active_masks[k]);
        assert_eq!(radii.len(), 4);
        let rmax = radii.iter().cloned().fold(f64::MIN, f64::max);
        let rmin = radii.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            (rmax - rmin) / rmax < 1e-2,
            "corner radii spread: {rmin}..{rmax}"
        );
        let eff = plan.trajectory.efforts[k];
        assert!((eff - m).abs() / m < 1e-2, "effort {eff}");
        assert!(plan.eradication_time.is_some());
    }

    #[test]
    fn planned_ellipse_activates_high_curvature_ends_first() {
        let m = 12.0;
        let n = 220;
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                Vec2::new(2.0 * t.cos(), t.sin())
            })
            .collect();
        let h0 = polyline_length(&pts, true) / n as f64;
        let c = FrontCurve::closed_from(pts, h0).unwrap();
        let plan = plan_convex(&c, m, 2e-3).unwrap();
        // First recorded step with partial activation.
        let k = (0..plan.active_masks.len())
            .find(|&k| {
                let runs = active_runs(&plan.active_masks[k]);
                !runs.is_empty() && runs.iter().map(|r| r.1).sum::<usize>() < plan.active_masks[k].len()
            })
            .expect("partial activation occurs");
        let runs = active_runs(&plan.active_masks[k]);
        assert_eq!(runs.len(), 2, "two high-curvature ends");
        for (start, len) in runs {
            let nv = plan.trajectory.curves[k].pts.len();
            let mid = plan.trajectory.curves[k].pts[(start + len / 2) % nv];
            let ang = mid.y.atan2(mid.x);
            let to_axis = ang.abs().min((PI - ang.abs()).abs());
            assert!(to_axis < 5.0_f64.to_radians(), "arc midpoint angle {ang}");
        }
        let t12 = plan.eradication_time.unwrap();
        let plan_more = plan_convex(&c, 14.0, 2e-3).unwrap();
        assert!(plan_more.eradication_time.unwrap() < t12);
    }
}
