//! Adjoint-based verification of boundary-control trajectories.
//!
//! A candidate trajectory is checked against the first-order necessary
//! conditions for minimizing total cost: the running and terminal area
//! charges plus a convex charge on the boundary effort. The scalar adjoint
//! `Y(t, xi)` — the marginal cost per unit of area released at the marker
//! `xi` at time `t` — solves a linear terminal-value problem along each
//! marker path; a multiplier `lambda(t)` prices effort; and the pointwise
//! minimum principle requires the realized speed at each marker to minimize
//! `lambda E(beta) - Y beta`. The module also integrates the area
//! sensitivity of a released patch and checks the shadow-price identity
//! that ties the two together.

use crate::effort::EffortTable;
use crate::front::Trajectory;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimalityError {
    #[error("trajectory carries no marker paths; extract markers first")]
    MissingMarkers,
    #[error("effort function is not usably differentiable at the realized speed (t = {time}, marker {label})")]
    NonDifferentiableEffort { time: f64, label: f64 },
    #[error("no active markers at t = {time}; the multiplier is undefined there")]
    NoActiveMarkers { time: f64 },
    #[error("marker {label} is not active at t = {time}")]
    InactiveMarker { time: f64, label: f64 },
    #[error("realized speed at t = {time}, marker {label} lies below the admissible range")]
    InadmissibleSpeed { time: f64, label: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Convex charge on the total boundary effort.
#[derive(Debug, Clone, PartialEq)]
pub enum EffortCost {
    /// Hard effort cap: no smooth charge, the multiplier is recovered from
    /// the active part of the boundary, where interior minimization forces
    /// the adjoint to equal it.
    Budget,
    /// Smooth charge `phi(s) = s^exponent` with exponent >= 1, so
    /// `lambda(t)` is its derivative at the realized total effort.
    Power { exponent: f64 },
}

/// Cost weights: running area charge, terminal area charge, and the effort
/// charge model.
#[derive(Debug, Clone, PartialEq)]
pub struct CostWeights {
    /// Cost per unit area per unit time while a region persists.
    pub kappa1: f64,
    /// Cost per unit area remaining at the final time.
    pub kappa2: f64,
    pub phi: EffortCost,
}

impl CostWeights {
    pub fn budget(kappa1: f64, kappa2: f64) -> CostWeights {
        CostWeights { kappa1, kappa2, phi: EffortCost::Budget }
    }

    pub fn power(kappa1: f64, kappa2: f64, exponent: f64) -> CostWeights {
        CostWeights { kappa1, kappa2, phi: EffortCost::Power { exponent } }
    }

    fn validate(&self) -> Result<(), OptimalityError> {
        if !(self.kappa1.is_finite() && self.kappa1 >= 0.0)
            || !(self.kappa2.is_finite() && self.kappa2 >= 0.0)
        {
            return Err(OptimalityError::InvalidInput(
                "area weights must be finite and nonnegative".into(),
            ));
        }
        if let EffortCost::Power { exponent } = self.phi {
            if !(exponent.is_finite() && exponent >= 1.0) {
                return Err(OptimalityError::InvalidInput(
                    "effort charge exponent must be >= 1 for convexity".into(),
                ));
            }
        }
        Ok(())
    }
}

/// The adjoint state along a trajectory: per-marker cost-per-area values
/// `y[time][marker]`, the multiplier series, and the curvature and speed
/// samples the equations were driven by. The grid covers the trajectory up
/// to its last nonempty configuration.
#[derive(Debug, Clone)]
pub struct AdjointField {
    pub labels: Vec<f64>,
    pub times: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    /// Multiplier at each time; NaN where no marker is active under the
    /// hard-cap model.
    pub lambda: Vec<f64>,
    pub omega: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub active: Vec<Vec<bool>>,
}

/// Consistency report for a trajectory against the necessary conditions.
#[derive(Debug, Clone)]
pub struct OptimalityReport {
    pub max_pmp_residual: f64,
    pub shadow_price_error: f64,
    pub cc_dispersion: f64,
}

/// Classification margin for "actively controlled": a marker counts as
/// active when its realized speed clears the free speed by this fraction
/// of the unit-speed effort scale. Discrete planners restore free boundary
/// portions only to within a geometric error that realized-speed
/// measurement amplifies by 1/dt (observed up to ~0.07 at dt = 2e-3);
/// metered control effort in budget strategies sits well above the margin.
const ACTIVE_MARGIN: f64 = 0.1;

/// Admissibility slack below the free speed: discrete normal-offset
/// measurements overshoot free growth by at most a few 1e-4 (chords of the
/// offset are measured instead of the offset itself); anything deeper than
/// this slack is inadmissible data.
const SPEED_SLACK: f64 = 1e-3;

/// Indices usable for marker analysis: the trajectory up to its last
/// nonempty configuration. Empty configurations may only trail.
fn effective_len(traj: &Trajectory) -> Result<usize, OptimalityError> {
    let n = traj.curves.len();
    let n_eff = match traj.curves.iter().position(|c| c.is_empty()) {
        Some(k) => {
            if traj.curves[k..].iter().any(|c| !c.is_empty()) {
                return Err(OptimalityError::InvalidInput(
                    "empty configurations may only appear at the end of a trajectory".into(),
                ));
            }
            k
        }
        None => n,
    };
    if n_eff < 2 {
        return Err(OptimalityError::InvalidInput(
            "adjoint analysis needs at least two nonempty configurations".into(),
        ));
    }
    Ok(n_eff)
}

/// Drift coefficient of the adjoint equation at one sample:
/// `(beta - E/E') omega`. The effort model's kink at the free speed uses
/// the one-sided slope, so free markers are integrated through; speeds
/// within the admissibility slack below the free speed are clamped to it
/// (they are discrete measurements of a free boundary).
fn adjoint_coeff(
    beta: f64,
    omega: f64,
    e: &EffortTable,
    time: f64,
    label: f64,
) -> Result<f64, OptimalityError> {
    if beta < e.beta_star() - SPEED_SLACK {
        return Err(OptimalityError::InadmissibleSpeed { time, label });
    }
    let b = beta.max(e.beta_star());
    let d = e.deriv(b);
    if !d.is_finite() || d <= 0.0 {
        return Err(OptimalityError::NonDifferentiableEffort { time, label });
    }
    Ok((b - e.eval(b) / d) * omega)
}

/// One Runge-Kutta step of the scalar linear problem
/// `y' = a(t) y + c` with the coefficient interpolated linearly between the
/// endpoint samples `(t0, a0)` and `(t1, a1)`; `h = t1 - t0` may be
/// negative for backward integration.
fn rk4_linear(y0: f64, a0: f64, a1: f64, h: f64, c: f64) -> f64 {
    let a_mid = 0.5 * (a0 + a1);
    let k1 = a0 * y0 + c;
    let k2 = a_mid * (y0 + 0.5 * h * k1) + c;
    let k3 = a_mid * (y0 + 0.5 * h * k2) + c;
    let k4 = a1 * (y0 + h * k3) + c;
    y0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Solve the per-marker adjoint terminal-value problems backward along the
/// trajectory: `Y_t = (beta - E/E') omega Y - kappa1`, `Y(T) = kappa2`.
/// For the basic effort model the drift reduces to `-omega Y` at every
/// marker, active or free. The multiplier series is filled according to the
/// effort charge model (see [`multiplier`]); under the hard cap, times with
/// no active marker carry NaN.
pub fn adjoint_solve(
    traj: &Trajectory,
    e: &EffortTable,
    w: &CostWeights,
) -> Result<AdjointField, OptimalityError> {
    w.validate()?;
    let markers = traj.markers.as_ref().ok_or(OptimalityError::MissingMarkers)?;
    let n_eff = effective_len(traj)?;
    let labels = markers.labels.clone();
    let nm = labels.len();
    if nm == 0 {
        return Err(OptimalityError::MissingMarkers);
    }
    let times: Vec<f64> = traj.times[..n_eff].to_vec();
    let beta: Vec<Vec<f64>> = markers.betas[..n_eff].to_vec();
    let omega: Vec<Vec<f64>> = markers.omegas[..n_eff].to_vec();

    // Drift samples, validated once.
    let mut a = vec![vec![0.0f64; nm]; n_eff];
    for k in 0..n_eff {
        for i in 0..nm {
            a[k][i] = adjoint_coeff(beta[k][i], omega[k][i], e, times[k], labels[i])?;
        }
    }

    let mut y = vec![vec![0.0f64; nm]; n_eff];
    y[n_eff - 1] = vec![w.kappa2; nm];
    for k in (1..n_eff).rev() {
        let h = times[k - 1] - times[k];
        for i in 0..nm {
            y[k - 1][i] = rk4_linear(y[k][i], a[k][i], a[k - 1][i], h, -w.kappa1);
        }
    }

    let active: Vec<Vec<bool>> = beta
        .iter()
        .map(|row| row.iter().map(|&b| b > e.beta_star() + ACTIVE_MARGIN).collect())
        .collect();
    let lambda = lambda_series(traj, &y, &active, w, n_eff);
    Ok(AdjointField { labels, times, y, lambda, omega, beta, active })
}

fn lambda_series(
    traj: &Trajectory,
    y: &[Vec<f64>],
    active: &[Vec<bool>],
    w: &CostWeights,
    n_eff: usize,
) -> Vec<f64> {
    match w.phi {
        EffortCost::Power { exponent } => traj.efforts[..n_eff]
            .iter()
            .map(|&s| {
                if exponent == 1.0 {
                    1.0
                } else {
                    exponent * s.max(0.0).powf(exponent - 1.0)
                }
            })
            .collect(),
        EffortCost::Budget => (0..n_eff)
            .map(|k| {
                let mut sum = 0.0;
                let mut count = 0usize;
                for (yi, act) in y[k].iter().zip(&active[k]) {
                    if *act {
                        sum += yi;
                        count += 1;
                    }
                }
                if count == 0 {
                    f64::NAN
                } else {
                    sum / count as f64
                }
            })
            .collect(),
    }
}

/// The multiplier series pricing effort. For a smooth power charge it is
/// the derivative of the charge at the realized total effort. Under the
/// hard cap it is recovered as the average adjoint value over active
/// markers, where interior minimization forces the adjoint to be constant
/// and equal to it; a time with no active marker is an error because the
/// multiplier is undefined there.
pub fn multiplier(
    traj: &Trajectory,
    e: &EffortTable,
    w: &CostWeights,
) -> Result<Vec<f64>, OptimalityError> {
    let adj = adjoint_solve(traj, e, w)?;
    if let Some(k) = adj.lambda.iter().position(|l| l.is_nan()) {
        return Err(OptimalityError::NoActiveMarkers { time: adj.times[k] });
    }
    Ok(adj.lambda)
}

/// Per-sample minimum-principle residuals `[time][marker]`: how far the
/// realized speed is from minimizing `lambda E(beta) - Y beta` over
/// admissible speeds, normalized by `lambda E(1) + |Y|`. Entries are NaN
/// where the multiplier is undefined and at inadmissible data points
/// (realized speed below the admissible range — reported, never scored).
/// The minimization scans 2001 speeds from the free speed to two beyond
/// the largest realized speed, then refines the best bracket by golden
/// section.
pub fn pmp_residuals(
    traj: &Trajectory,
    adj: &AdjointField,
    e: &EffortTable,
) -> Result<Vec<Vec<f64>>, OptimalityError> {
    let n = adj.times.len();
    let nm = adj.labels.len();
    if traj.times.len() < n {
        return Err(OptimalityError::InvalidInput(
            "adjoint field does not match the trajectory".into(),
        ));
    }
    let lo = e.beta_star();
    let beta_max = adj
        .beta
        .iter()
        .flat_map(|row| row.iter())
        .cloned()
        .fold(lo, f64::max);
    let hi = beta_max + 2.0;
    let grid: Vec<f64> = (0..2001).map(|j| lo + (hi - lo) * j as f64 / 2000.0).collect();

    let mut out = vec![vec![f64::NAN; nm]; n];
    for k in 0..n {
        let lam = adj.lambda[k];
        if lam.is_nan() {
            continue;
        }
        for i in 0..nm {
            let yv = adj.y[k][i];
            let g = |b: f64| lam * e.eval(b) - yv * b;
            let mut best_j = 0;
            let mut best = f64::INFINITY;
            for (j, &b) in grid.iter().enumerate() {
                let v = g(b);
                if v < best {
                    best = v;
                    best_j = j;
                }
            }
            let bracket_lo = grid[best_j.saturating_sub(1)];
            let bracket_hi = grid[(best_j + 1).min(grid.len() - 1)];
            let (_, refined) =
                crate::constrained::golden_max(|b| -g(b), bracket_lo, bracket_hi, 60);
            let minimum = best.min(-refined);
            let denom = lam * e.eval(1.0) + yv.abs();
            if denom <= 1e-12 {
                continue;
            }
            let b_real = adj.beta[k][i];
            if b_real < lo - SPEED_SLACK {
                // Inadmissible data point: left unscored (NaN), visible in
                // the exported per-marker table.
                continue;
            }
            out[k][i] = (g(b_real.max(lo)) - minimum).max(0.0) / denom;
        }
    }
    Ok(out)
}

/// Largest normalized minimum-principle residual over all samples.
pub fn pmp_residual(
    traj: &Trajectory,
    adj: &AdjointField,
    e: &EffortTable,
) -> Result<f64, OptimalityError> {
    let table = pmp_residuals(traj, adj, e)?;
    Ok(table
        .iter()
        .flat_map(|row| row.iter())
        .cloned()
        .filter(|r| !r.is_nan())
        .fold(0.0, f64::max))
}

/// Forward sensitivity of the area released at marker `xi` at time `tau`:
/// integrates `dA/dt = [E/E' - beta] omega A` from `A(tau) = 1` to the end
/// of the trajectory. Returns one value per time sample; entries before
/// `tau` are NaN. The marker must be active at `tau`.
pub fn area_sensitivity(
    traj: &Trajectory,
    tau: f64,
    xi: usize,
    e: &EffortTable,
) -> Result<Vec<f64>, OptimalityError> {
    let markers = traj.markers.as_ref().ok_or(OptimalityError::MissingMarkers)?;
    let n_eff = effective_len(traj)?;
    if xi >= markers.labels.len() {
        return Err(OptimalityError::InvalidInput(format!(
            "marker index {xi} out of range"
        )));
    }
    let label = markers.labels[xi];
    let times = &traj.times[..n_eff];
    let k0 = times
        .iter()
        .position(|&t| t >= tau - 1e-12)
        .ok_or_else(|| OptimalityError::InvalidInput(format!("time {tau} beyond the trajectory")))?;
    if markers.betas[k0][xi] <= e.beta_star() + ACTIVE_MARGIN {
        return Err(OptimalityError::InactiveMarker { time: times[k0], label });
    }
    // Growth coefficient: the negative of the adjoint drift coefficient.
    let mut b = vec![0.0f64; n_eff];
    for k in 0..n_eff {
        b[k] = -adjoint_coeff(markers.betas[k][xi], markers.omegas[k][xi], e, times[k], label)?;
    }
    let mut out = vec![f64::NAN; n_eff];
    out[k0] = 1.0;
    for k in k0 + 1..n_eff {
        let h = times[k] - times[k - 1];
        out[k] = rk4_linear(out[k - 1], b[k - 1], b[k], h, 0.0);
    }
    Ok(out)
}

/// Worst relative defect of the shadow-price identity
/// `Y(tau, xi) = integral of kappa1 A + kappa2 A(T)` over a sample of
/// release times and markers. The identity couples the adjoint and the area
/// sensitivity through the product rule, so it holds on any trajectory along
/// which both equations are integrated consistently.
pub fn shadow_price_error(
    traj: &Trajectory,
    e: &EffortTable,
    w: &CostWeights,
) -> Result<f64, OptimalityError> {
    let adj = adjoint_solve(traj, e, w)?;
    let n = adj.times.len();
    let nm = adj.labels.len();
    let t_stride = (n / 12).max(1);
    let m_stride = (nm / 8).max(1);
    let mut worst = 0.0f64;
    for k0 in (0..n - 1).step_by(t_stride) {
        for i in (0..nm).step_by(m_stride) {
            if !adj.active[k0][i] {
                continue;
            }
            let a = area_sensitivity(traj, adj.times[k0], i, e)?;
            let mut integral = 0.0;
            for k in k0..n - 1 {
                integral +=
                    0.5 * (a[k] + a[k + 1]) * (adj.times[k + 1] - adj.times[k]) * w.kappa1;
            }
            let rhs = integral + w.kappa2 * a[n - 1];
            let lhs = adj.y[k0][i];
            let denom = lhs.abs().max(w.kappa2).max(1e-12);
            worst = worst.max((lhs - rhs).abs() / denom);
        }
    }
    Ok(worst)
}

/// Largest relative spread of the adjoint over active markers at any time:
/// the computable content of "the adjoint is constant along the actively
/// controlled part of the boundary". Times with fewer than two active
/// markers contribute nothing.
pub fn cc_dispersion(adj: &AdjointField) -> f64 {
    let mut worst = 0.0f64;
    for (row, act) in adj.y.iter().zip(&adj.active) {
        let vals: Vec<f64> = row
            .iter()
            .zip(act)
            .filter_map(|(y, a)| a.then_some(*y))
            .collect();
        if vals.len() < 2 {
            continue;
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        if mean.abs() <= 1e-12 {
            continue;
        }
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
        worst = worst.max(var.sqrt() / mean.abs());
    }
    worst
}

/// Full consistency report: minimum-principle residual, shadow-price
/// defect, and adjoint dispersion over active markers.
pub fn verify_optimality(
    traj: &Trajectory,
    e: &EffortTable,
    w: &CostWeights,
) -> Result<OptimalityReport, OptimalityError> {
    let adj = adjoint_solve(traj, e, w)?;
    Ok(OptimalityReport {
        max_pmp_residual: pmp_residual(traj, &adj, e)?,
        shadow_price_error: shadow_price_error(traj, e, w)?,
        cc_dispersion: cc_dispersion(&adj),
    })
}
