//! Phase-plane analysis of controlled traveling waves.
//!
//! The uncontrolled wave profile solves the second-order system
//! `U' = P`, `P' = -beta P - f(U)` connecting the saddle `(0,0)` to the
//! saddle `(1,0)` in the `(U, P)` plane. Control enters as a removal rate
//! concentrated where the trajectory rides the curve `P = sqrt(U f(U))`,
//! and its total size is a line integral of an explicit 1-form along the
//! path. This module computes minimal speeds by manifold shooting, builds
//! the three-segment cost-minimizing path for a prescribed speed, evaluates
//! path costs, and cross-checks cost differences through the curl of the
//! cost form.

use crate::numerics::adaptive_simpson;
use crate::ode::{integrate_dp45, rk4_step, OdeOptions, StopReason};
use crate::reaction::ReactionTerm;

/// Offset used to seed manifold integrations off the saddle points.
const SEED_EPS: f64 = 1e-6;
/// Below this the wave slope is treated as having collapsed onto `P = 0`.
const P_FLOOR: f64 = 1e-9;
/// Budget for the traversal parameter of a single manifold run.
const S_MAX: f64 = 5000.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhaseError {
    /// No sign change of the matching residual on the speed bracket, or a
    /// manifold run failed to reach its section.
    #[error("manifold shooting failed to bracket or refine the matching condition")]
    ShootingFailed,
    /// `sqrt(U f(U))` requested where `f(U) < 0`.
    #[error("negative radicand in the saturation curve at U = {u}")]
    NegativeRadicand { u: f64 },
    /// A manifold continued past its junction re-crosses the saturation
    /// curve between the interior zero and 1, so the three-segment
    /// construction is not known to be optimal.
    #[error("manifold re-crosses the saturation curve at {crossings:?}")]
    HypothesisViolated { crossings: Vec<(f64, f64)> },
    /// The interior equilibrium is a stable node at this speed: the wave
    /// slope collapses before reaching the interior zero and the optimal
    /// profile splits into two separate waves.
    #[error("wave profile degenerates through the interior node at speed {beta}")]
    DegenerateNode { beta: f64 },
    /// A path enters `U = 0` off the manifold slope, making the cost
    /// integral divergent.
    #[error("cost integrand is non-integrable near U = {u}")]
    SingularIntegrand { u: f64 },
    /// Two compared paths cross too many times for a reliable region
    /// decomposition.
    #[error("compared paths cross {crossings} times; region decomposition refused")]
    RegionDegenerate { crossings: usize },
    /// Requested speed is below the minimal uncontrolled speed.
    #[error("speed {beta} is below the minimal wave speed {beta_star}")]
    SpeedBelowMinimum { beta: f64, beta_star: f64 },
    /// A path fails the admissibility layout (endpoints, monotone U, P >= 0).
    #[error("path is not admissible: {0}")]
    NotAdmissible(String),
    /// The slope vanishes strictly inside the profile, so the spatial
    /// coordinate integral diverges and no single profile exists.
    #[error("profile map is non-integrable: slope vanishes at U = {u}")]
    NonIntegrable { u: f64 },
    /// Reconstructed feedback control dips below zero.
    #[error("reconstructed control is negative ({alpha:.3e}) at U = {u}")]
    NegativeControl { u: f64, alpha: f64 },
}

/// Saturation curve `P*(U) = sqrt(U f(U))`, defined where `f >= 0`.
pub fn pstar(f: &ReactionTerm, u: f64) -> Result<f64, PhaseError> {
    let v = f.f(u);
    if v < -1e-14 {
        return Err(PhaseError::NegativeRadicand { u });
    }
    Ok((u * v).max(0.0).sqrt())
}

/// Positive eigenvalue of the saddle at `(0, 0)`.
fn mu_unstable(fp0: f64, beta: f64) -> f64 {
    (-beta + (beta * beta - 4.0 * fp0).sqrt()) / 2.0
}

/// Negative eigenvalue of the saddle at `(1, 0)`.
fn mu_stable(fp1: f64, beta: f64) -> f64 {
    (-beta - (beta * beta - 4.0 * fp1).sqrt()) / 2.0
}

fn rhs<'a>(f: &'a ReactionTerm, beta: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + 'a {
    move |_s, y| [y[1], -beta * y[1] - f.f(y[0])]
}

/// Value of the unstable manifold of `(0,0)` on the section `U = u_section`,
/// or 0 if the slope collapses first. `None` if the run never resolves.
fn unstable_at_section(f: &ReactionTerm, beta: f64, u_section: f64) -> Option<f64> {
    let mu = mu_unstable(f.fp(0.0), beta);
    let y0 = [SEED_EPS, SEED_EPS * mu];
    let sec = move |_s: f64, y: &[f64; 2]| y[0] - u_section;
    let floor = move |_s: f64, y: &[f64; 2]| y[1] - P_FLOOR;
    let opts = OdeOptions { h_max: 0.1, ..OdeOptions::default() };
    let run = integrate_dp45(&rhs(f, beta), 0.0, y0, S_MAX, &[&sec, &floor], &opts);
    match run.stop {
        StopReason::EventHit(0) => Some(run.last().1[1]),
        StopReason::EventHit(_) => Some(0.0),
        _ => None,
    }
}

/// Value of the stable manifold of `(1,0)` on the section `U = u_section`,
/// found by integrating backward. At strongly negative speeds the backward
/// trajectory converges into the interior equilibrium instead of crossing
/// the section; the section value is then its limit, 0.
fn stable_at_section(f: &ReactionTerm, beta: f64, u_section: f64) -> Option<f64> {
    let mu = mu_stable(f.fp(1.0), beta);
    let y0 = [1.0 - SEED_EPS, SEED_EPS * mu.abs()];
    let sec = move |_s: f64, y: &[f64; 2]| y[0] - u_section;
    let floor = move |_s: f64, y: &[f64; 2]| y[1] - P_FLOOR;
    let opts = OdeOptions { h_max: 0.1, ..OdeOptions::default() };
    let run = integrate_dp45(&rhs(f, beta), 0.0, y0, -S_MAX, &[&sec, &floor], &opts);
    let (_, y_end) = run.last();
    match run.stop {
        StopReason::EventHit(0) => Some(y_end[1]),
        StopReason::EventHit(_) => {
            // Slope collapsed while homing in on the equilibrium.
            ((y_end[0] - u_section).abs() < 1e-3).then_some(0.0)
        }
        _ => {
            let near_node = (y_end[0] - u_section).abs() < 1e-3 && y_end[1] < 1e-3;
            near_node.then_some(0.0)
        }
    }
}

/// Minimal speed of uncontrolled waves, by bisection on the mismatch of the
/// two saddle manifolds across the section `U = u*`.
///
/// The mismatch decreases in the speed; the root is refined until the
/// matching residual is below 1e-8. Fails with `ShootingFailed` when no
/// sign change exists on `[-10, 10]`.
pub fn min_speed(f: &ReactionTerm) -> Result<f64, PhaseError> {
    let us = f.u_star();
    let residual = |beta: f64| -> Option<f64> {
        let pu = unstable_at_section(f, beta, us)?;
        let ps = stable_at_section(f, beta, us)?;
        Some(pu - ps)
    };
    let (mut lo, mut hi) = (-10.0, 10.0);
    let glo = residual(lo).ok_or(PhaseError::ShootingFailed)?;
    let ghi = residual(hi).ok_or(PhaseError::ShootingFailed)?;
    if glo <= 0.0 || ghi >= 0.0 {
        return Err(PhaseError::ShootingFailed);
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..100 {
        mid = 0.5 * (lo + hi);
        let gm = residual(mid).ok_or(PhaseError::ShootingFailed)?;
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let g = residual(mid).ok_or(PhaseError::ShootingFailed)?;
    if g.abs() > 1e-8 {
        return Err(PhaseError::ShootingFailed);
    }
    Ok(mid)
}

/// Which piece of a phase path a vertex range belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    UnstableManifold,
    PstarArc,
    StableManifold,
}

impl SegmentKind {
    pub fn label(self) -> &'static str {
        match self {
            SegmentKind::UnstableManifold => "unstable-manifold",
            SegmentKind::PstarArc => "pstar-arc",
            SegmentKind::StableManifold => "stable-manifold",
        }
    }
}

/// Inclusive vertex range `[start, end]` of one path segment.
#[derive(Debug, Clone, Copy)]
pub struct SegmentSpan {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
}

/// A polyline in the `(U, P)` half-plane from `(0,0)` to `(1,0)` with
/// labeled segments and the junction points where control switches on/off.
#[derive(Debug, Clone)]
pub struct PhasePath {
    /// `(U, P)` vertices; `U` nondecreasing, `P >= 0`.
    pub vertices: Vec<(f64, f64)>,
    pub segments: Vec<SegmentSpan>,
    /// Speed this path was built for.
    pub beta: f64,
    /// Where the path leaves the unstable manifold onto the saturation curve.
    pub junction_a: (f64, f64),
    /// Where the path leaves the saturation curve onto the stable manifold.
    pub junction_b: (f64, f64),
}

impl PhasePath {
    pub fn segment(&self, kind: SegmentKind) -> Option<&SegmentSpan> {
        self.segments.iter().find(|s| s.kind == kind)
    }

    /// Vertices of one segment (inclusive of its junction endpoints).
    pub fn segment_vertices(&self, kind: SegmentKind) -> &[(f64, f64)] {
        match self.segment(kind) {
            Some(s) => &self.vertices[s.start..=s.end],
            None => &[],
        }
    }

    /// Basic admissibility layout check.
    pub fn validate(&self) -> Result<(), PhaseError> {
        let first = self.vertices.first().copied().unwrap_or((f64::NAN, 0.0));
        let last = self.vertices.last().copied().unwrap_or((f64::NAN, 0.0));
        if first.0.abs() > 1e-9 || first.1.abs() > 1e-9 {
            return Err(PhaseError::NotAdmissible(format!(
                "path must start at (0,0), got ({:.3e},{:.3e})",
                first.0, first.1
            )));
        }
        if (last.0 - 1.0).abs() > 1e-9 || last.1.abs() > 1e-9 {
            return Err(PhaseError::NotAdmissible(format!(
                "path must end at (1,0), got ({},{:.3e})",
                last.0, last.1
            )));
        }
        for w in self.vertices.windows(2) {
            if w[1].0 < w[0].0 - 1e-12 {
                return Err(PhaseError::NotAdmissible(format!(
                    "U must be nondecreasing, got {} after {}",
                    w[1].0, w[0].0
                )));
            }
        }
        if let Some(&(u, p)) = self.vertices.iter().find(|&&(_, p)| p < -1e-12) {
            return Err(PhaseError::NotAdmissible(format!(
                "P must stay nonnegative, got P = {p:.3e} at U = {u}"
            )));
        }
        Ok(())
    }
}

struct ManifoldRun {
    states: Vec<(f64, f64)>,
    stop: StopReason,
}

/// Unstable manifold from the origin, stopped at the saturation curve or
/// at slope collapse. Dense output for path assembly.
fn run_unstable(f: &ReactionTerm, beta: f64) -> ManifoldRun {
    let mu = mu_unstable(f.fp(0.0), beta);
    let y0 = [SEED_EPS, SEED_EPS * mu];
    let sat = move |_s: f64, y: &[f64; 2]| y[1] * y[1] - y[0] * f.f(y[0]);
    let floor = move |_s: f64, y: &[f64; 2]| y[1] - P_FLOOR;
    let opts = OdeOptions { h_max: 0.02, ..OdeOptions::default() };
    let run = integrate_dp45(&rhs(f, beta), 0.0, y0, S_MAX, &[&sat, &floor], &opts);
    ManifoldRun {
        states: run.ys.iter().map(|y| (y[0], y[1])).collect(),
        stop: run.stop,
    }
}

/// Stable manifold into `(1, 0)`, integrated backward and stopped at the
/// saturation curve. States are returned in backward order (from near
/// `(1,0)` toward the junction).
fn run_stable(f: &ReactionTerm, beta: f64) -> ManifoldRun {
    let mu = mu_stable(f.fp(1.0), beta);
    let y0 = [1.0 - SEED_EPS, SEED_EPS * mu.abs()];
    let sat = move |_s: f64, y: &[f64; 2]| y[1] * y[1] - y[0] * f.f(y[0]);
    let guard = {
        let us = f.u_star();
        move |_s: f64, y: &[f64; 2]| y[0] - (us - 1e-9)
    };
    let opts = OdeOptions { h_max: 0.02, ..OdeOptions::default() };
    let run = integrate_dp45(&rhs(f, beta), 0.0, y0, -S_MAX, &[&sat, &guard], &opts);
    ManifoldRun {
        states: run.ys.iter().map(|y| (y[0], y[1])).collect(),
        stop: run.stop,
    }
}

/// Record re-crossings of the saturation curve by the trajectory continued
/// from `start`, integrating in direction `dir` (+1 forward, -1 backward).
fn continuation_crossings(
    f: &ReactionTerm,
    beta: f64,
    start: (f64, f64),
    dir: f64,
) -> Vec<(f64, f64)> {
    let sys = rhs(f, beta);
    // Step off the curve before arming the crossing event.
    let mut y = [start.0, start.1];
    let mut s = 0.0;
    for _ in 0..8 {
        y = rk4_step(&sys, s, &y, dir * 1e-4);
        s += dir * 1e-4;
    }
    let us = f.u_star();
    let mut crossings = Vec::new();
    for _ in 0..10 {
        let sat = move |_s: f64, y: &[f64; 2]| y[1] * y[1] - y[0] * f.f(y[0]);
        let floor = move |_s: f64, y: &[f64; 2]| y[1] - P_FLOOR;
        let hi = move |_s: f64, y: &[f64; 2]| y[0] - (1.0 - 1e-6);
        let lo = move |_s: f64, y: &[f64; 2]| y[0] - (us + 1e-6);
        let cap = move |_s: f64, y: &[f64; 2]| y[1] - 10.0;
        let opts = OdeOptions { h_max: 0.05, ..OdeOptions::default() };
        let run = integrate_dp45(
            &sys,
            s,
            y,
            s + dir * S_MAX,
            &[&sat, &floor, &hi, &lo, &cap],
            &opts,
        );
        let (se, ye) = run.last();
        match run.stop {
            StopReason::EventHit(0) => {
                if ye[1] > P_FLOOR && ye[0] > us + 1e-6 && ye[0] < 1.0 - 1e-6 {
                    crossings.push((ye[0], ye[1]));
                }
                s = se;
                y = ye;
                for _ in 0..8 {
                    y = rk4_step(&sys, s, &y, dir * 1e-4);
                    s += dir * 1e-4;
                }
            }
            _ => break,
        }
    }
    crossings
}

/// Sample the saturation curve between two junction abscissae.
///
/// Near the interior zero the curve has a square-root profile, so the
/// samples are graded through `U = u* + t^2`; away from it the spacing is
/// uniform and at most 1e-3.
fn sample_saturation_arc(f: &ReactionTerm, ua: f64, ub: f64) -> Vec<(f64, f64)> {
    let us = f.u_star();
    let mut pts = Vec::new();
    if ua <= us + 1e-6 {
        let t0 = (ua - us).max(0.0).sqrt();
        let t1 = (ub - us).sqrt();
        let n = 800;
        for i in 0..=n {
            let t = t0 + (t1 - t0) * i as f64 / n as f64;
            let u = (us + t * t).min(ub);
            let p = (u * f.f(u)).max(0.0).sqrt();
            pts.push((u, p));
        }
    } else {
        let n = ((ub - ua) / 1e-3).ceil().max(64.0) as usize;
        for i in 0..=n {
            let u = ua + (ub - ua) * i as f64 / n as f64;
            let p = (u * f.f(u)).max(0.0).sqrt();
            pts.push((u, p));
        }
    }
    pts
}

/// Assemble a three-segment path from its pieces.
fn assemble_path(
    beta: f64,
    unstable: Vec<(f64, f64)>,
    arc_interior: Vec<(f64, f64)>,
    stable_backward: Vec<(f64, f64)>,
    junction_a: (f64, f64),
    junction_b: (f64, f64),
) -> PhasePath {
    let mut vertices = vec![(0.0, 0.0)];
    vertices.extend(unstable);
    let ia = vertices.len() - 1;
    vertices.extend(arc_interior);
    let has_arc = vertices.len() > ia + 1 || junction_b.0 > junction_a.0 + 1e-9;
    if has_arc && (junction_b.0 - vertices[vertices.len() - 1].0) > 1e-12 {
        vertices.push(junction_b);
    }
    let ib = vertices.len() - 1;
    let mut st = stable_backward;
    st.reverse();
    // Drop the junction duplicate if the backward run starts at B exactly.
    if let Some(&first) = st.first() {
        if (first.0 - vertices[ib].0).abs() < 1e-12 && (first.1 - vertices[ib].1).abs() < 1e-12 {
            st.remove(0);
        }
    }
    vertices.extend(st);
    vertices.push((1.0, 0.0));
    let last = vertices.len() - 1;
    // Enforce exact monotonicity against event-refinement jitter.
    for i in 1..vertices.len() {
        if vertices[i].0 < vertices[i - 1].0 {
            vertices[i].0 = vertices[i - 1].0;
        }
        if vertices[i].1 < 0.0 {
            vertices[i].1 = 0.0;
        }
    }
    let segments = vec![
        SegmentSpan { kind: SegmentKind::UnstableManifold, start: 0, end: ia },
        SegmentSpan { kind: SegmentKind::PstarArc, start: ia, end: ib },
        SegmentSpan { kind: SegmentKind::StableManifold, start: ib, end: last },
    ];
    PhasePath { vertices, segments, beta, junction_a, junction_b }
}

/// Build the cost-minimizing path at speed `beta`: ride the unstable
/// manifold to the saturation curve, follow the curve, and leave along the
/// stable manifold into `(1, 0)`.
///
/// At the minimal speed the two manifolds meet the curve at the same point
/// and the middle segment is empty (zero cost). Above the node threshold
/// the slope collapses before the interior zero and `DegenerateNode` is
/// returned. If either manifold, continued past its junction, meets the
/// saturation curve again between the interior zero and 1, the construction
/// is rejected with `HypothesisViolated` and the re-crossing points are
/// reported for diagnosis.
pub fn optimal_path(f: &ReactionTerm, beta: f64) -> Result<PhasePath, PhaseError> {
    let beta_star = f.beta_star()?;
    if beta < beta_star - 1e-9 {
        return Err(PhaseError::SpeedBelowMinimum { beta, beta_star });
    }

    let un = run_unstable(f, beta);
    let a = match un.stop {
        StopReason::EventHit(0) => *un.states.last().unwrap(),
        StopReason::EventHit(_) => {
            return Err(PhaseError::DegenerateNode { beta });
        }
        _ => return Err(PhaseError::ShootingFailed),
    };

    let st = run_stable(f, beta);
    let b = match st.stop {
        StopReason::EventHit(0) => *st.states.last().unwrap(),
        _ => return Err(PhaseError::ShootingFailed),
    };

    if b.0 < a.0 - 1e-6 {
        return Err(PhaseError::HypothesisViolated { crossings: vec![a, b] });
    }

    let mut crossings = continuation_crossings(f, beta, a, 1.0);
    crossings.extend(continuation_crossings(f, beta, b, -1.0));
    if !crossings.is_empty() {
        return Err(PhaseError::HypothesisViolated { crossings });
    }

    let arc_interior = if b.0 - a.0 > 1e-9 {
        let pts = sample_saturation_arc(f, a.0, b.0);
        // Keep strictly interior samples; junctions come from the manifolds.
        pts.into_iter()
            .filter(|&(u, _)| u > a.0 + 1e-12 && u < b.0 - 1e-12)
            .collect()
    } else {
        Vec::new()
    };

    let path = assemble_path(beta, un.states, arc_interior, st.states, a, b);
    path.validate()?;
    Ok(path)
}

/// Path through the degenerate node: unstable manifold into `(u*, 0)`, the
/// full saturation curve from the interior zero, then the stable manifold.
/// Its cost is the (non-attained) infimum of admissible costs when the
/// interior equilibrium is a node.
pub(crate) fn degenerate_infimum_path(
    f: &ReactionTerm,
    beta: f64,
) -> Result<PhasePath, PhaseError> {
    let us = f.u_star();
    let un = run_unstable(f, beta);
    let mut unstable = un.states;
    match un.stop {
        StopReason::EventHit(1) => unstable.push((us, 0.0)),
        _ => return Err(PhaseError::ShootingFailed),
    }
    let st = run_stable(f, beta);
    let b = match st.stop {
        StopReason::EventHit(0) => *st.states.last().unwrap(),
        _ => return Err(PhaseError::ShootingFailed),
    };
    let arc_interior: Vec<(f64, f64)> = sample_saturation_arc(f, us, b.0)
        .into_iter()
        .filter(|&(u, _)| u > us + 1e-12 && u < b.0 - 1e-12)
        .collect();
    let path = assemble_path(beta, unstable, arc_interior, st.states, (us, 0.0), b);
    path.validate()?;
    Ok(path)
}

/// Line-integral cost of an admissible path at speed `beta`.
///
/// The cost form is `[f/(U P) + beta/U] dU + dP/U`. Along either manifold
/// the form vanishes identically (those pieces are uncontrolled), and the
/// singular factor `1/U` at the left endpoint cancels exactly when the path
/// enters the origin along the unstable eigendirection; a path entering at
/// any other slope has divergent cost and is rejected with
/// `SingularIntegrand`.
pub fn path_cost(path: &PhasePath, f: &ReactionTerm, beta: f64) -> Result<f64, PhaseError> {
    path.validate()?;
    let verts = &path.vertices;
    let mut total = 0.0;
    for i in 0..verts.len() - 1 {
        let (u1, p1) = verts[i];
        let (u2, p2) = verts[i + 1];
        let du = u2 - u1;
        let dp = p2 - p1;
        if i == 0 {
            // Edge out of the origin: regularized against the eigen-slope.
            if du <= 0.0 || p2 <= 0.0 {
                return Err(PhaseError::SingularIntegrand { u: 0.0 });
            }
            let c = p2 / u2;
            let fp0 = f.fp(0.0);
            let k = fp0 / c + beta + c;
            if k.abs() > 1e-3 {
                return Err(PhaseError::SingularIntegrand { u: 0.0 });
            }
            let mut g = |u: f64| (f.f(u) - fp0 * u) / (c * u * u);
            total += adaptive_simpson(&mut g, u2 * 1e-6, u2, 1e-12);
            continue;
        }
        if u1 <= 0.0 {
            return Err(PhaseError::SingularIntegrand { u: u1 });
        }
        // Exact chord contributions of the beta/U and dP/U parts.
        if du.abs() > 0.0 {
            let lr = (du / u1).ln_1p();
            total += beta * lr + dp * lr / du;
        } else {
            total += dp / u1;
        }
        // Reaction part f/(U P) dU by adaptive quadrature along the chord.
        if du.abs() > 0.0 {
            let mut g = |t: f64| {
                let tt = t.clamp(1e-9, 1.0 - 1e-9);
                let u = u1 + tt * du;
                let p = (p1 + tt * dp).max(1e-300);
                f.f(u) / (u * p) * du
            };
            let tol = 1e-13 + 1e-10 * du.abs();
            total += adaptive_simpson(&mut g, 0.0, 1.0, tol);
        }
    }
    Ok(total)
}

/// Both evaluations of a cost difference `I(path1) - I(path2)`.
#[derive(Debug, Clone, Copy)]
pub struct StokesReport {
    /// Difference of the two line integrals.
    pub direct: f64,
    /// Area integral of the curl of the cost form over the region between
    /// the paths, evaluated through an exact antiderivative in `P`.
    pub via_area: f64,
    /// How many times the paths cross.
    pub crossings: usize,
}

/// Piecewise-linear evaluation of `P` along a path as a graph over `U`.
fn path_p_at(verts: &[(f64, f64)], u: f64) -> f64 {
    let n = verts.len();
    if u <= verts[0].0 {
        return verts[0].1;
    }
    if u >= verts[n - 1].0 {
        return verts[n - 1].1;
    }
    let mut lo = 0usize;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if verts[mid].0 <= u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (ua, pa) = verts[lo];
    let (ub, pb) = verts[hi];
    if ub <= ua {
        return 0.5 * (pa + pb);
    }
    pa + (pb - pa) * (u - ua) / (ub - ua)
}

/// Evaluate `I(path1) - I(path2)` two ways: directly as line integrals and
/// as the area integral of the curl `f/(U P^2) - 1/U^2` over the region
/// enclosed by the two paths (integrated exactly in `P` through the
/// antiderivative `-f/(U P) - P/U^2`).
///
/// Paths must share the standard endpoints and be built for the same speed.
/// Refuses with `RegionDegenerate` when the paths cross more than 8 times.
pub fn stokes_compare(
    path1: &PhasePath,
    path2: &PhasePath,
    f: &ReactionTerm,
    beta: f64,
) -> Result<StokesReport, PhaseError> {
    path1.validate()?;
    path2.validate()?;

    // Count transversal crossings on a fine abscissa grid.
    let n_scan = 4001;
    let mut crossings = 0usize;
    let mut prev_sign = 0i8;
    for i in 0..n_scan {
        let u = i as f64 / (n_scan - 1) as f64;
        let d = path_p_at(&path1.vertices, u) - path_p_at(&path2.vertices, u);
        let s = if d > 1e-12 {
            1
        } else if d < -1e-12 {
            -1
        } else {
            0
        };
        if s != 0 {
            if prev_sign != 0 && s != prev_sign {
                crossings += 1;
            }
            prev_sign = s;
        }
    }
    if crossings > 8 {
        return Err(PhaseError::RegionDegenerate { crossings });
    }

    let direct = path_cost(path1, f, beta)? - path_cost(path2, f, beta)?;

    // Antiderivative of the curl in P.
    let w = |u: f64, p: f64| -> f64 {
        let pp = p.max(1e-300);
        -f.f(u) / (u * pp) - p / (u * u)
    };
    let g = |u: f64| {
        let uu = u.clamp(1e-9, 1.0 - 1e-9);
        let p1 = path_p_at(&path1.vertices, uu);
        let p2 = path_p_at(&path2.vertices, uu);
        if (p1 - p2).abs() < 1e-300 {
            0.0
        } else {
            -(w(uu, p1) - w(uu, p2))
        }
    };
    // Composite Simpson over the common span; the integrand vanishes where
    // the paths share their manifold sections, including both endpoints.
    let m = 8192;
    let h = 1.0 / m as f64;
    let mut via_area = g(0.0) + g(1.0);
    for i in 1..m {
        let coeff = if i % 2 == 1 { 4.0 } else { 2.0 };
        via_area += coeff * g(i as f64 * h);
    }
    via_area *= h / 3.0;

    Ok(StokesReport { direct, via_area, crossings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::{validate_reaction, ReactionSpec};
    use approx::assert_relative_eq;

    fn cubic(a: f64) -> ReactionTerm {
        validate_reaction(ReactionSpec::Cubic { a }).unwrap()
    }

    #[test]
    fn min_speed_matches_closed_form() {
        // For the cubic the minimal speed is -(1 - 2a)/sqrt(2).
        for &a in &[0.2, 0.3, 0.4] {
            let f = cubic(a);
            let expect = -(1.0 - 2.0 * a) / 2f64.sqrt();
            let got = min_speed(&f).unwrap();
            assert_relative_eq!(got, expect, epsilon = 1e-6);
        }
    }

    #[test]
    fn min_speed_increases_with_interior_zero() {
        let b2 = min_speed(&cubic(0.2)).unwrap();
        let b3 = min_speed(&cubic(0.3)).unwrap();
        let b4 = min_speed(&cubic(0.4)).unwrap();
        assert!(b2 < b3 && b3 < b4);
    }

    #[test]
    fn symmetric_cubic_has_zero_min_speed() {
        let f = cubic(0.5);
        assert!(min_speed(&f).unwrap().abs() < 1e-6);
    }

    #[test]
    fn saturation_curve_value() {
        let f = cubic(0.3);
        let p = pstar(&f, 0.7).unwrap();
        assert_relative_eq!(p, 0.24248711305964282, epsilon = 1e-12);
        assert!(pstar(&f, 0.1).is_err());
    }

    #[test]
    fn minimal_speed_path_has_empty_arc_at_known_junction() {
        // At the minimal speed the path is the single heteroclinic
        // connection; for the cubic it meets the saturation curve exactly
        // at U = (1 + 2a)/3, where both junctions coincide.
        let a = 0.3;
        let f = cubic(a);
        let bs = f.beta_star().unwrap();
        let path = optimal_path(&f, bs).unwrap();
        let expect_u = (1.0 + 2.0 * a) / 3.0;
        assert!((path.junction_a.0 - expect_u).abs() < 1e-4);
        assert!((path.junction_b.0 - expect_u).abs() < 1e-4);
        assert!((path.junction_b.0 - path.junction_a.0).abs() < 1e-5);
        let cost = path_cost(&path, &f, bs).unwrap();
        assert!(cost.abs() < 1e-5, "heteroclinic cost should vanish, got {cost}");
    }

    #[test]
    fn positive_speed_path_structure() {
        let f = cubic(0.3);
        let path = optimal_path(&f, 0.0).unwrap();
        // Three labeled segments in order.
        assert_eq!(path.segments.len(), 3);
        assert_eq!(path.segments[0].kind.label(), "unstable-manifold");
        assert_eq!(path.segments[1].kind.label(), "pstar-arc");
        assert_eq!(path.segments[2].kind.label(), "stable-manifold");
        // Junctions sit on the saturation curve.
        let (ua, pa) = path.junction_a;
        let (ub, pb) = path.junction_b;
        assert!(ua > f.u_star() && ub < 1.0 && ua < ub);
        assert!((pa - pstar(&f, ua).unwrap()).abs() < 1e-8);
        assert!((pb - pstar(&f, ub).unwrap()).abs() < 1e-8);
        // Arc vertices stay on the curve.
        for &(u, p) in path.segment_vertices(SegmentKind::PstarArc) {
            assert!((p - pstar(&f, u).unwrap()).abs() < 1e-9);
        }
        // Cost is strictly positive above the minimal speed.
        let cost = path_cost(&path, &f, 0.0).unwrap();
        assert!(cost > 1e-3, "expected positive cost, got {cost}");
    }

    #[test]
    fn node_speed_detected_as_degenerate() {
        let f = cubic(0.3);
        // Node threshold is 2 sqrt(0.21) ~ 0.9165.
        let err = optimal_path(&f, 2.0).unwrap_err();
        assert!(matches!(err, PhaseError::DegenerateNode { .. }));
    }

    #[test]
    fn degenerate_infimum_path_costs_finite() {
        let f = cubic(0.3);
        let path = degenerate_infimum_path(&f, 2.0).unwrap();
        assert!((path.junction_a.0 - f.u_star()).abs() < 1e-9);
        let cost = path_cost(&path, &f, 2.0).unwrap();
        assert!(cost.is_finite() && cost > 0.0);
    }

    #[test]
    fn below_minimal_speed_rejected() {
        let f = cubic(0.3);
        let err = optimal_path(&f, -2.0).unwrap_err();
        assert!(matches!(err, PhaseError::SpeedBelowMinimum { .. }));
    }

    #[test]
    fn stokes_two_routes_agree() {
        let f = cubic(0.3);
        let beta = 0.0;
        let opt = optimal_path(&f, beta).unwrap();
        // Compare against a lifted copy of the middle segment.
        let mut other = opt.clone();
        let arc = other.segment(SegmentKind::PstarArc).copied().unwrap();
        let (ua, ub) = (other.vertices[arc.start].0, other.vertices[arc.end].0);
        for v in &mut other.vertices[arc.start + 1..arc.end] {
            let s = ((v.0 - ua) / (ub - ua) * std::f64::consts::PI).sin();
            v.1 += 0.05 * s;
        }
        let rep = stokes_compare(&other, &opt, &f, beta).unwrap();
        let scale = rep.direct.abs().max(rep.via_area.abs()).max(1e-9);
        assert!(
            (rep.direct - rep.via_area).abs() <= 1e-4 * scale.max(1.0),
            "direct {} vs area {}",
            rep.direct,
            rep.via_area
        );
        // Lifting the middle segment off the saturation curve must not
        // reduce the cost.
        assert!(rep.direct > 0.0);
    }

    #[test]
    fn curl_sign_characterizes_saturation_region() {
        // The curl f/(U P^2) - 1/U^2 is positive exactly below the
        // saturation curve.
        let f = cubic(0.3);
        let omega = |u: f64, p: f64| f.f(u) / (u * p * p) - 1.0 / (u * u);
        for i in 1..20 {
            let u = f.u_star() + (1.0 - f.u_star()) * i as f64 / 20.0;
            let ps = pstar(&f, u).unwrap();
            if ps > 1e-6 {
                assert!(omega(u, 0.5 * ps) > 0.0);
                assert!(omega(u, 1.5 * ps) < 0.0);
            }
        }
    }
}
