//! Direct 1-D simulation of the controlled reaction-diffusion equation
//! `u_t = f(u) + u_xx - alpha(u) u`, used to validate the traveling-wave
//! predictions: a wave started from a reconstructed profile should move at
//! the prescribed speed while the running control integral matches the
//! tabulated effort.
//!
//! Diffusion is treated implicitly (tridiagonal solve per step), reaction
//! and control explicitly; ends are pinned to the initial data.

use crate::numerics::{ls_slope, solve_tridiagonal};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PdeError {
    /// Time step too large for the explicit reaction part.
    #[error("time step {tau} exceeds the stability bound {bound} for grid step {h}")]
    UnstableStep { tau: f64, h: f64, bound: f64 },
    /// State left the physically meaningful range.
    #[error("state blew up at t = {t}: range [{umin}, {umax}]")]
    BlowUp { t: f64, umin: f64, umax: f64 },
    /// No level crossing found to track.
    #[error("no front crossing the tracked level at t = {t}")]
    NoFront { t: f64 },
}

#[derive(Debug, Clone)]
pub struct WaveSimOptions {
    /// Half-length `L` of the spatial domain `[-L, L]`.
    pub domain_half_length: f64,
    /// Spatial grid step.
    pub grid_step: f64,
    /// Time step; must satisfy `tau <= h^2/4`.
    pub time_step: f64,
    /// Final time.
    pub horizon: f64,
    /// Record every this-many steps.
    pub snapshot_stride: usize,
}

impl Default for WaveSimOptions {
    fn default() -> Self {
        let h = 0.05;
        WaveSimOptions {
            domain_half_length: 40.0,
            grid_step: h,
            time_step: h * h / 4.0,
            horizon: 60.0,
            snapshot_stride: 100,
        }
    }
}

/// Recorded evolution of a controlled wave simulation.
#[derive(Debug, Clone)]
pub struct WaveSeries {
    /// Recorded times.
    pub times: Vec<f64>,
    /// Tracked-level front position at each recorded time.
    pub front_positions: Vec<f64>,
    /// Control integral `int alpha(u(x,t)) dx` at each recorded time.
    pub instantaneous_costs: Vec<f64>,
    /// Spatial grid.
    pub xs: Vec<f64>,
    /// Final state `u(x, T)`.
    pub final_state: Vec<f64>,
    /// Least-squares front speed over the second half of the run.
    pub measured_speed: f64,
    /// Time-averaged control integral over the second half of the run.
    pub realized_cost: f64,
}

/// Leftmost crossing of `level` by linear interpolation, or `None`.
fn front_position(xs: &[f64], u: &[f64], level: f64) -> Option<f64> {
    for i in 0..u.len() - 1 {
        let (a, b) = (u[i] - level, u[i + 1] - level);
        if a == 0.0 {
            return Some(xs[i]);
        }
        if a * b < 0.0 {
            let t = a / (a - b);
            return Some(xs[i] + t * (xs[i + 1] - xs[i]));
        }
    }
    None
}

/// Run the controlled reaction-diffusion equation and track the front.
///
/// `f` is the reaction, `alpha` the feedback control (by state value),
/// `initial` the starting profile, and `level` the state value whose
/// crossing defines the front position.
pub fn simulate_wave(
    f: &dyn Fn(f64) -> f64,
    alpha: &dyn Fn(f64) -> f64,
    initial: &dyn Fn(f64) -> f64,
    level: f64,
    opts: &WaveSimOptions,
) -> Result<WaveSeries, PdeError> {
    let h = opts.grid_step;
    let tau = opts.time_step;
    let bound = h * h / 4.0;
    if tau > bound * (1.0 + 1e-12) {
        return Err(PdeError::UnstableStep { tau, h, bound });
    }
    let l = opts.domain_half_length;
    let n = (2.0 * l / h).round() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|i| -l + i as f64 * h).collect();
    let mut u: Vec<f64> = xs.iter().map(|&x| initial(x)).collect();
    let (left_pin, right_pin) = (u[0], u[n - 1]);

    // Implicit-diffusion system (I - tau D) with pinned ends.
    let r = tau / (h * h);
    let mut lower = vec![-r; n];
    let mut diag = vec![1.0 + 2.0 * r; n];
    let mut upper = vec![-r; n];
    diag[0] = 1.0;
    upper[0] = 0.0;
    diag[n - 1] = 1.0;
    lower[n - 1] = 0.0;

    let steps = (opts.horizon / tau).round() as usize;
    let stride = opts.snapshot_stride.max(1);
    let mut times = Vec::new();
    let mut fronts = Vec::new();
    let mut costs = Vec::new();
    let mut rhs = vec![0.0; n];

    let record = |t: f64,
                  u: &[f64],
                  times: &mut Vec<f64>,
                  fronts: &mut Vec<f64>,
                  costs: &mut Vec<f64>|
     -> Result<(), PdeError> {
        let fp = front_position(&xs, u, level).ok_or(PdeError::NoFront { t })?;
        let mut cost = 0.0;
        for i in 0..n - 1 {
            cost += 0.5 * (alpha(u[i]) + alpha(u[i + 1])) * h;
        }
        times.push(t);
        fronts.push(fp);
        costs.push(cost);
        Ok(())
    };

    record(0.0, &u, &mut times, &mut fronts, &mut costs)?;
    for step in 1..=steps {
        let t = step as f64 * tau;
        // Explicit reaction and control.
        for i in 1..n - 1 {
            let v = u[i];
            rhs[i] = v + tau * (f(v) - alpha(v) * v);
        }
        rhs[0] = left_pin;
        rhs[n - 1] = right_pin;
        u = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        // Range guard and conservative clipping.
        let mut umin = f64::INFINITY;
        let mut umax = f64::NEG_INFINITY;
        for v in &u {
            umin = umin.min(*v);
            umax = umax.max(*v);
        }
        if umin < -0.1 || umax > 1.1 {
            return Err(PdeError::BlowUp { t, umin, umax });
        }
        if umin < -1e-6 || umax > 1.0 + 1e-6 {
            return Err(PdeError::BlowUp { t, umin, umax });
        }
        for v in &mut u {
            *v = v.clamp(0.0, 1.0);
        }
        if step % stride == 0 || step == steps {
            record(t, &u, &mut times, &mut fronts, &mut costs)?;
        }
    }

    // Measurements over the second half of the run.
    let t_half = opts.horizon / 2.0;
    let tail: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= t_half).collect();
    let (measured_speed, realized_cost) = if tail.len() >= 2 {
        let ts: Vec<f64> = tail.iter().map(|&i| times[i]).collect();
        let fs: Vec<f64> = tail.iter().map(|&i| fronts[i]).collect();
        let cs: Vec<f64> = tail.iter().map(|&i| costs[i]).collect();
        let speed = ls_slope(&ts, &fs);
        let mut avg = 0.0;
        for i in 0..ts.len() - 1 {
            avg += 0.5 * (cs[i] + cs[i + 1]) * (ts[i + 1] - ts[i]);
        }
        avg /= ts[ts.len() - 1] - ts[0];
        (speed, avg)
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(WaveSeries {
        times,
        front_positions: fronts,
        instantaneous_costs: costs,
        xs,
        final_state: u,
        measured_speed,
        realized_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oversized_step_rejected() {
        let opts = WaveSimOptions { time_step: 0.01, grid_step: 0.05, ..Default::default() };
        let err = simulate_wave(&|_| 0.0, &|_| 0.0, &|x| if x < 0.0 { 1.0 } else { 0.0 }, 0.5, &opts)
            .unwrap_err();
        assert!(matches!(err, PdeError::UnstableStep { .. }));
    }

    #[test]
    fn pure_diffusion_front_stays_put() {
        // With no reaction and no control a symmetric step spreads but its
        // midlevel crossing stays at the origin.
        let opts = WaveSimOptions {
            domain_half_length: 20.0,
            horizon: 5.0,
            ..Default::default()
        };
        let init = |x: f64| 1.0 / (1.0 + (x / 0.5).exp());
        let out = simulate_wave(&|_| 0.0, &|_| 0.0, &init, 0.5, &opts).unwrap();
        assert!(out.measured_speed.abs() < 1e-6);
        assert!(out.realized_cost.abs() < 1e-12);
        for (&t, &fp) in out.times.iter().zip(&out.front_positions) {
            assert!(fp.abs() < 1e-6, "front drifted to {fp} at t = {t}");
        }
    }

    #[test]
    fn no_front_detected() {
        let opts = WaveSimOptions {
            domain_half_length: 10.0,
            horizon: 0.01,
            ..Default::default()
        };
        let err = simulate_wave(&|_| 0.0, &|_| 0.0, &|_| 0.2, 0.5, &opts).unwrap_err();
        assert!(matches!(err, PdeError::NoFront { .. }));
    }

    #[test]
    fn controlled_wave_matches_predicted_speed_and_cost() {
        // Drive the wave faster than the minimal speed with the feedback
        // control reconstructed from the optimal phase path; the realized
        // speed and running cost must match the phase-plane predictions.
        use crate::phase::{optimal_path, path_cost};
        use crate::profile::{reconstruct_control, reconstruct_profile};
        use crate::reaction::{validate_reaction, ReactionSpec};

        let f = validate_reaction(ReactionSpec::Cubic { a: 0.3 }).unwrap();
        let beta = 0.5;
        let path = optimal_path(&f, beta).unwrap();
        let predicted_cost = path_cost(&path, &f, beta).unwrap();
        assert!((predicted_cost - 1.235494218841).abs() < 2e-4);

        let prof = reconstruct_profile(&path, &f).unwrap();
        let ctrl = reconstruct_control(&path, &f, beta).unwrap();
        let (xs, us) = (prof.xs.clone(), prof.us.clone());
        let init = move |x: f64| crate::numerics::lerp_sorted(&xs, &us, x);
        let (cu, ca) = (ctrl.control_u.clone(), ctrl.control_alpha.clone());
        let (lo, hi) = ctrl.support.unwrap();
        let alpha = move |u: f64| {
            if u <= lo || u >= hi {
                0.0
            } else {
                crate::numerics::lerp_sorted(&cu, &ca, u)
            }
        };
        let fr = |u: f64| f.f(u);
        let out = simulate_wave(&fr, &alpha, &init, f.u_star(), &WaveSimOptions::default())
            .unwrap();
        assert!(
            (out.measured_speed - beta).abs() < 2e-2,
            "realized speed {} vs target {}",
            out.measured_speed,
            beta
        );
        assert!(
            (out.realized_cost - predicted_cost).abs() < 1e-2 * predicted_cost,
            "realized cost {} vs predicted {}",
            out.realized_cost,
            predicted_cost
        );
    }

    #[test]
    fn uncontrolled_cubic_wave_speed() {
        // Without control the front must travel at the minimal wave speed.
        use crate::phase::optimal_path;
        use crate::profile::reconstruct_profile;
        use crate::reaction::{validate_reaction, ReactionSpec};

        let f = validate_reaction(ReactionSpec::Cubic { a: 0.3 }).unwrap();
        let bs = f.beta_star().unwrap();
        let path = optimal_path(&f, bs).unwrap();
        let prof = reconstruct_profile(&path, &f).unwrap();
        let xs = prof.xs.clone();
        let us = prof.us.clone();
        let init = move |x: f64| crate::numerics::lerp_sorted(&xs, &us, x);
        let opts = WaveSimOptions {
            domain_half_length: 30.0,
            horizon: 30.0,
            ..Default::default()
        };
        let fr = |u: f64| f.f(u);
        let out = simulate_wave(&fr, &|_| 0.0, &init, f.u_star(), &opts).unwrap();
        assert!(
            (out.measured_speed - bs).abs() < 5e-3,
            "measured {} vs minimal speed {}",
            out.measured_speed,
            bs
        );
    }
}
