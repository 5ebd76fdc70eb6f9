//! Reconstruction of traveling profiles and feedback controls from phase
//! paths: invert `x(u) = int du/P` for the spatial profile, and read the
//! control off the path where it departs from the uncontrolled dynamics.

use crate::phase::{PhaseError, PhasePath, SegmentKind};
use crate::reaction::ReactionTerm;

/// Profile truncation window: the exponential tails are cut where `U`
/// leaves `[TAIL, 1 - TAIL]`.
const TAIL: f64 = 1e-4;

/// A reconstructed traveling wave: the spatial profile `x -> U(x)` (with
/// `U(0)` at the interior zero), and optionally the feedback control
/// `U -> alpha(U)` with its active interval and total cost.
#[derive(Debug, Clone)]
pub struct ControlProfile {
    /// Uniform spatial grid (truncated to the profile window).
    pub xs: Vec<f64>,
    /// Profile values `U(x)`, strictly increasing.
    pub us: Vec<f64>,
    /// Abscissae in `U` where the control is sampled (empty when only the
    /// profile was requested).
    pub control_u: Vec<f64>,
    /// Control values `alpha(U) >= 0` at `control_u`.
    pub control_alpha: Vec<f64>,
    /// Interval of `U` on which the control is active.
    pub support: Option<(f64, f64)>,
    /// Total cost `int alpha dx` of the reconstructed control.
    pub total_cost: Option<f64>,
}

/// Spatial coordinates of every path vertex inside the truncation window,
/// anchored so `x = 0` at the interior zero `u_star`.
///
/// Per edge the path is linear in `U`, so the increment has the closed form
/// `ln(P2/P1)/m` with `m` the edge slope (or `dU/P` for level edges).
fn vertex_coordinates(
    path: &PhasePath,
    u_star: f64,
) -> Result<(Vec<f64>, Vec<(f64, f64)>), PhaseError> {
    let verts: Vec<(f64, f64)> = path
        .vertices
        .iter()
        .copied()
        .filter(|&(u, _)| u >= TAIL && u <= 1.0 - TAIL)
        .collect();
    if verts.len() < 2 {
        return Err(PhaseError::NotAdmissible(
            "path has no vertices inside the profile window".into(),
        ));
    }
    for &(u, p) in &verts {
        if p <= 1e-12 {
            return Err(PhaseError::NonIntegrable { u });
        }
    }
    let mut xs = vec![0.0];
    for w in verts.windows(2) {
        let (u1, p1) = w[0];
        let (u2, p2) = w[1];
        let du = u2 - u1;
        let dx = if du <= 0.0 {
            0.0
        } else {
            let m = (p2 - p1) / du;
            if m.abs() * du > 1e-12 * p1 {
                (p2 / p1).ln() / m
            } else {
                2.0 * du / (p1 + p2)
            }
        };
        xs.push(xs.last().unwrap() + dx);
    }
    // Anchor x = 0 where U crosses u_star.
    let mut shift = None;
    for (i, w) in verts.windows(2).enumerate() {
        if w[0].0 <= u_star && u_star <= w[1].0 {
            let (u1, p1) = w[0];
            let du = w[1].0 - u1;
            let part = if du <= 0.0 {
                0.0
            } else {
                let m = (w[1].1 - p1) / du;
                let pu = p1 + m * (u_star - u1);
                if m.abs() * du > 1e-12 * p1 {
                    (pu / p1).ln() / m
                } else {
                    2.0 * (u_star - u1) / (p1 + pu)
                }
            };
            shift = Some(xs[i] + part);
            break;
        }
    }
    let shift = shift.ok_or(PhaseError::NotAdmissible(
        "path does not cross the interior zero".into(),
    ))?;
    for x in &mut xs {
        *x -= shift;
    }
    Ok((xs, verts))
}

/// Reconstruct the spatial profile `U(x)` of a phase path on a uniform
/// grid of 2001 points, tails truncated at `U = 1e-4` and `1 - 1e-4`.
pub fn reconstruct_profile(
    path: &PhasePath,
    f: &ReactionTerm,
) -> Result<ControlProfile, PhaseError> {
    path.validate()?;
    let (vx, verts) = vertex_coordinates(path, f.u_star())?;
    let n = 2001;
    let x_lo = vx[0];
    let x_hi = *vx.last().unwrap();
    let mut xs = Vec::with_capacity(n);
    let mut us = Vec::with_capacity(n);
    let mut seg = 0usize;
    for i in 0..n {
        let x = x_lo + (x_hi - x_lo) * i as f64 / (n - 1) as f64;
        while seg + 2 < vx.len() && vx[seg + 1] < x {
            seg += 1;
        }
        let (u1, p1) = verts[seg];
        let (u2, p2) = verts[seg + 1];
        let du = u2 - u1;
        let u = if du <= 0.0 {
            u1
        } else {
            let m = (p2 - p1) / du;
            let dx = x - vx[seg];
            // Invert the per-edge closed form for x(u).
            if m.abs() * du > 1e-12 * p1 {
                u1 + (p1 / m) * ((m * dx).exp() - 1.0)
            } else {
                u1 + p1 * dx
            }
        };
        xs.push(x);
        us.push(u.clamp(u1.min(u2), u1.max(u2)));
    }
    Ok(ControlProfile {
        xs,
        us,
        control_u: Vec::new(),
        control_alpha: Vec::new(),
        support: None,
        total_cost: None,
    })
}

/// Reconstruct profile and feedback control together.
///
/// The control is zero along the manifold segments by construction; along
/// the middle segment it is read off the path as
/// `alpha = (P P' + beta P + f)/U` with `P'` by centered differences on
/// the vertices. Fails with `NegativeControl` if the reconstruction dips
/// below `-1e-8`.
pub fn reconstruct_control(
    path: &PhasePath,
    f: &ReactionTerm,
    beta: f64,
) -> Result<ControlProfile, PhaseError> {
    let mut out = reconstruct_profile(path, f)?;
    let verts = &path.vertices;
    let arc = path.segment(SegmentKind::PstarArc);
    let (lo, hi) = match arc {
        Some(s) => (s.start, s.end),
        None => (0, 0),
    };

    let has_arc = hi > lo;
    let mut control_u = Vec::new();
    let mut control_alpha = Vec::new();
    for (i, &(u, p)) in verts.iter().enumerate() {
        let alpha = if has_arc && (i == lo || i == hi) && p > 1e-9 {
            // One-sided limit from the middle segment, where the slope
            // follows the saturation curve exactly.
            let slope = (f.f(u) + u * f.fp(u)) / (2.0 * p);
            (p * slope + beta * p + f.f(u)) / u
        } else if has_arc && i > lo && i < hi {
            let (ua, pa) = verts[i - 1];
            let (ub, pb) = verts[i + 1];
            let du = ub - ua;
            if du <= 1e-14 || u <= 0.0 {
                0.0
            } else {
                let slope = (pb - pa) / du;
                (p * slope + beta * p + f.f(u)) / u
            }
        } else {
            0.0
        };
        if alpha < -1e-8 {
            return Err(PhaseError::NegativeControl { u, alpha });
        }
        control_u.push(u);
        control_alpha.push(alpha.max(0.0));
    }

    // Total cost int alpha dx = int alpha / P dU over the active interval.
    let mut total = 0.0;
    for i in lo..hi {
        let (u1, p1) = verts[i];
        let (u2, p2) = verts[i + 1];
        let du = u2 - u1;
        if du <= 0.0 {
            continue;
        }
        let a1 = control_alpha[i];
        let a2 = control_alpha[i + 1];
        let g1 = if p1 > 1e-12 { a1 / p1 } else { 0.0 };
        let g2 = if p2 > 1e-12 { a2 / p2 } else { 0.0 };
        total += 0.5 * (g1 + g2) * du;
    }

    out.support = Some((path.junction_a.0, path.junction_b.0));
    out.total_cost = Some(total);
    out.control_u = control_u;
    out.control_alpha = control_alpha;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{optimal_path, path_cost};
    use crate::reaction::{validate_reaction, ReactionSpec};

    #[test]
    fn symmetric_term_gives_odd_profile() {
        // For a = 1/2 the minimal speed is zero and the uncontrolled wave
        // is symmetric about the interior zero: U(x) + U(-x) = 1.
        let f = validate_reaction(ReactionSpec::Cubic { a: 0.5 }).unwrap();
        let bs = f.beta_star().unwrap();
        let path = optimal_path(&f, bs).unwrap();
        let prof = reconstruct_profile(&path, &f).unwrap();
        let n = prof.xs.len();
        let eval = |x: f64| -> f64 {
            // xs is uniform and increasing.
            let lo = prof.xs[0];
            let hi = prof.xs[n - 1];
            let t = ((x - lo) / (hi - lo) * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
            let i = (t as usize).min(n - 2);
            let frac = t - i as f64;
            prof.us[i] * (1.0 - frac) + prof.us[i + 1] * frac
        };
        for k in 0..50 {
            let x = -5.0 + 10.0 * k as f64 / 49.0;
            if x >= prof.xs[0] && -x >= prof.xs[0] && x <= prof.xs[n - 1] && -x <= prof.xs[n - 1] {
                let s = eval(x) + eval(-x);
                assert!((s - 1.0).abs() < 1e-5, "U(x)+U(-x) = {s} at x = {x}");
            }
        }
    }

    #[test]
    fn minimal_speed_profile_matches_closed_form() {
        // At the minimal speed of the cubic the profile is the classical
        // front 1/(1 + exp(-x/sqrt(2))) up to translation.
        let a = 0.3;
        let f = validate_reaction(ReactionSpec::Cubic { a }).unwrap();
        let bs = f.beta_star().unwrap();
        let path = optimal_path(&f, bs).unwrap();
        let prof = reconstruct_profile(&path, &f).unwrap();
        // Align so the closed form passes through (0, a) like the
        // reconstruction does.
        let shift = 2f64.sqrt() * ((1.0 - a) / a).ln();
        let mut worst: f64 = 0.0;
        for (&x, &u) in prof.xs.iter().zip(&prof.us) {
            let expect = 1.0 / (1.0 + (-(x - shift) / 2f64.sqrt()).exp());
            worst = worst.max((u - expect).abs());
        }
        assert!(worst < 1e-4, "sup deviation {worst} from the closed-form front");
    }

    #[test]
    fn control_cost_matches_path_cost() {
        let f = validate_reaction(ReactionSpec::Cubic { a: 0.3 }).unwrap();
        let beta = 0.0;
        let path = optimal_path(&f, beta).unwrap();
        let rec = reconstruct_control(&path, &f, beta).unwrap();
        let line = path_cost(&path, &f, beta).unwrap();
        let total = rec.total_cost.unwrap();
        assert!(
            (total - line).abs() <= 1e-4 * line.max(1.0),
            "control integral {total} vs line integral {line}"
        );
        // Control vanishes outside the active interval and is nonnegative.
        let (ulo, uhi) = rec.support.unwrap();
        for (&u, &al) in rec.control_u.iter().zip(&rec.control_alpha) {
            assert!(al >= 0.0);
            if u < ulo - 1e-9 || u > uhi + 1e-9 {
                assert_eq!(al, 0.0, "control must vanish off [{ulo}, {uhi}], got {al} at {u}");
            }
        }
        assert!(ulo > f.u_star() && uhi < 1.0 && ulo < uhi);
    }

    #[test]
    fn degenerate_path_profile_rejected() {
        let f = validate_reaction(ReactionSpec::Cubic { a: 0.3 }).unwrap();
        let path = crate::phase::degenerate_infimum_path(&f, 1.2).unwrap();
        let err = reconstruct_profile(&path, &f).unwrap_err();
        assert!(matches!(err, PhaseError::NonIntegrable { .. }));
    }
}
