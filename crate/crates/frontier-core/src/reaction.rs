//! Bistable reaction terms: validated nonlinearities `f` on `[0, 1]` with
//! stable zeros at both endpoints and a single unstable interior zero. The
//! validated term carries its interior zero, the node threshold, and (computed
//! on first use) the minimal uncontrolled wave speed.

use std::sync::OnceLock;

use crate::numerics::MonotoneCubic;
use crate::phase::{min_speed, PhaseError};

/// How a reaction term is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum ReactionSpec {
    /// `f(u) = u (1 - u) (u - a)` with `a` strictly inside `(0, 1)`.
    Cubic { a: f64 },
    /// Knots `(u, f(u))` interpolated by a monotonicity-preserving cubic.
    Sampled { knots: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReactionError {
    #[error("reaction term is not bistable: {0}")]
    NotBistable(String),
    #[error("reaction term has no interior zero in (0,1)")]
    NoInteriorZero,
    #[error("reaction term has multiple interior zeros in (0,1)")]
    MultipleInteriorZeros,
    #[error("invalid sampled reaction data: {0}")]
    InvalidSamples(String),
}

/// A validated bistable reaction term.
#[derive(Debug, Clone)]
pub struct ReactionTerm {
    spec: ReactionSpec,
    interp: Option<MonotoneCubic>,
    u_star: f64,
    beta_star_star: f64,
    beta_star: OnceLock<Result<f64, PhaseError>>,
}

impl ReactionTerm {
    /// `f(u)`.
    pub fn f(&self, u: f64) -> f64 {
        match &self.spec {
            ReactionSpec::Cubic { a } => u * (1.0 - u) * (u - a),
            ReactionSpec::Sampled { .. } => self.interp.as_ref().unwrap().eval(u),
        }
    }

    /// `f'(u)`.
    pub fn fp(&self, u: f64) -> f64 {
        match &self.spec {
            ReactionSpec::Cubic { a } => -3.0 * u * u + 2.0 * (1.0 + a) * u - a,
            ReactionSpec::Sampled { .. } => self.interp.as_ref().unwrap().deriv(u),
        }
    }

    /// The interior zero `u*` of `f` in `(0, 1)`.
    pub fn u_star(&self) -> f64 {
        self.u_star
    }

    /// Node threshold `2 sqrt(f'(u*))`: above this speed the interior
    /// equilibrium of the traveling-wave phase system becomes a stable node
    /// and optimal profiles split.
    pub fn beta_star_star(&self) -> f64 {
        self.beta_star_star
    }

    /// Minimal uncontrolled traveling-wave speed, computed by manifold
    /// shooting on first call and cached.
    pub fn beta_star(&self) -> Result<f64, PhaseError> {
        self.beta_star
            .get_or_init(|| min_speed(self))
            .clone()
    }

    pub fn spec(&self) -> &ReactionSpec {
        &self.spec
    }
}

/// Validate a reaction specification and build the term.
///
/// Requirements: `f(0) = f(1) = 0` (within 1e-12), `f'(0) < 0`, `f'(1) < 0`,
/// exactly one interior sign change at `u*` with `f'(u*) > 0`, `f < 0` on
/// `(0, u*)` and `f > 0` on `(u*, 1)`.
pub fn validate_reaction(spec: ReactionSpec) -> Result<ReactionTerm, ReactionError> {
    let (interp, raw_f, raw_fp): (
        Option<MonotoneCubic>,
        Box<dyn Fn(f64) -> f64>,
        Box<dyn Fn(f64) -> f64>,
    ) = match &spec {
        ReactionSpec::Cubic { a } => {
            let a = *a;
            if !a.is_finite() {
                return Err(ReactionError::NotBistable("cubic parameter not finite".into()));
            }
            (
                None,
                Box::new(move |u: f64| u * (1.0 - u) * (u - a)),
                Box::new(move |u: f64| -3.0 * u * u + 2.0 * (1.0 + a) * u - a),
            )
        }
        ReactionSpec::Sampled { knots } => {
            if knots.len() < 4 {
                return Err(ReactionError::InvalidSamples(
                    "need at least 4 knots".into(),
                ));
            }
            let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
            let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
            if xs.first().map(|&x| x != 0.0).unwrap_or(true)
                || xs.last().map(|&x| x != 1.0).unwrap_or(true)
            {
                return Err(ReactionError::InvalidSamples(
                    "knots must span exactly [0, 1]".into(),
                ));
            }
            let mc = MonotoneCubic::new(xs, ys).ok_or_else(|| {
                ReactionError::InvalidSamples("knot abscissae must be strictly increasing".into())
            })?;
            let mc2 = mc.clone();
            let mc3 = mc.clone();
            (
                Some(mc),
                Box::new(move |u: f64| mc2.eval(u)),
                Box::new(move |u: f64| mc3.deriv(u)),
            )
        }
    };

    if raw_f(0.0).abs() > 1e-12 || raw_f(1.0).abs() > 1e-12 {
        return Err(ReactionError::InvalidSamples(format!(
            "f must vanish at both endpoints (f(0)={:.3e}, f(1)={:.3e})",
            raw_f(0.0),
            raw_f(1.0)
        )));
    }
    let fp0 = raw_fp(0.0);
    if fp0 >= 0.0 {
        return Err(ReactionError::NotBistable(format!(
            "f'(0) = {fp0:.6} must be negative"
        )));
    }

    // Locate interior sign changes on a fine grid.
    let n = 4096;
    let mut crossings: Vec<(f64, f64)> = Vec::new();
    let mut prev_u = 1.0 / n as f64;
    let mut prev_v = raw_f(prev_u);
    for i in 2..n {
        let u = i as f64 / n as f64;
        let v = raw_f(u);
        if prev_v < 0.0 && v >= 0.0 || prev_v > 0.0 && v <= 0.0 {
            crossings.push((prev_u, u));
        }
        prev_u = u;
        prev_v = v;
    }
    if crossings.is_empty() {
        return Err(ReactionError::NoInteriorZero);
    }
    if crossings.len() > 1 {
        return Err(ReactionError::MultipleInteriorZeros);
    }
    let fp1 = raw_fp(1.0);
    if fp1 >= 0.0 {
        return Err(ReactionError::NotBistable(format!(
            "f'(1) = {fp1:.6} must be negative"
        )));
    }
    let (lo, hi) = crossings[0];
    let u_star = crate::numerics::bisect_root(&mut |u| raw_f(u), lo, hi, 1e-14)
        .ok_or(ReactionError::NoInteriorZero)?;

    let fps = raw_fp(u_star);
    if fps <= 0.0 {
        return Err(ReactionError::NotBistable(format!(
            "f'(u*) = {fps:.6} must be positive at the interior zero"
        )));
    }
    // Confirm the sign pattern away from the zero.
    for i in 1..n {
        let u = i as f64 / n as f64;
        let v = raw_f(u);
        if u < u_star - 1e-6 && v > 1e-12 {
            return Err(ReactionError::NotBistable(format!(
                "f({u:.4}) = {v:.3e} should be negative below the interior zero"
            )));
        }
        if u > u_star + 1e-6 && v < -1e-12 {
            return Err(ReactionError::NotBistable(format!(
                "f({u:.4}) = {v:.3e} should be positive above the interior zero"
            )));
        }
    }

    Ok(ReactionTerm {
        spec,
        interp,
        u_star,
        beta_star_star: 2.0 * fps.sqrt(),
        beta_star: OnceLock::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_a03_validates() {
        let f = validate_reaction(ReactionSpec::Cubic { a: 0.3 }).unwrap();
        assert_relative_eq!(f.u_star(), 0.3, epsilon = 1e-10);
        assert_relative_eq!(f.fp(0.3), 0.21, epsilon = 1e-12);
        assert_relative_eq!(f.beta_star_star(), 2.0 * 0.21f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn logistic_samples_rejected() {
        // u(1-u) sampled: f'(0) > 0, not bistable.
        let knots: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let u = i as f64 / 20.0;
                (u, u * (1.0 - u))
            })
            .collect();
        let err = validate_reaction(ReactionSpec::Sampled { knots }).unwrap_err();
        assert!(matches!(err, ReactionError::NotBistable(_)));
    }

    #[test]
    fn sampled_cubic_recovers_interior_zero() {
        let knots: Vec<(f64, f64)> = (0..=40)
            .map(|i| {
                let u = i as f64 / 40.0;
                (u, u * (1.0 - u) * (u - 0.35))
            })
            .collect();
        let f = validate_reaction(ReactionSpec::Sampled { knots }).unwrap();
        assert_relative_eq!(f.u_star(), 0.35, epsilon = 1e-3);
    }

    #[test]
    fn cubic_out_of_range_rejected() {
        assert!(validate_reaction(ReactionSpec::Cubic { a: -0.2 }).is_err());
        assert!(validate_reaction(ReactionSpec::Cubic { a: 1.4 }).is_err());
    }

    #[test]
    fn double_well_rejected_as_multiple_zeros() {
        // sin(3*pi*u)-flavored sample with three interior crossings.
        let knots: Vec<(f64, f64)> = (0..=60)
            .map(|i| {
                let u = i as f64 / 60.0;
                (u, -(3.0 * std::f64::consts::PI * u).sin() * 0.1)
            })
            .collect();
        let err = validate_reaction(ReactionSpec::Sampled { knots }).unwrap_err();
        assert!(matches!(err, ReactionError::MultipleInteriorZeros));
    }
}
