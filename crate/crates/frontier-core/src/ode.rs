//! Small ODE toolbox: a classic fixed-step RK4 and an adaptive Dormand–Prince
//! 4(5) integrator with sign-change event detection. Events are refined by
//! bisection with re-integration over the bracketing step, so reported crossing
//! states are accurate to the integrator's own tolerance rather than to an
//! interpolant's.

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let k1 = f(t, y);
    let mut y2 = *y;
    for i in 0..N {
        y2[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = f(t + 0.5 * h, &y2);
    for i in 0..N {
        y2[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = f(t + 0.5 * h, &y2);
    for i in 0..N {
        y2[i] = y[i] + h * k3[i];
    }
    let k4 = f(t + h, &y2);
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Absolute tolerance of the embedded error estimate.
    pub atol: f64,
    /// Relative tolerance of the embedded error estimate.
    pub rtol: f64,
    /// Initial step magnitude.
    pub h_init: f64,
    /// Largest permitted step magnitude.
    pub h_max: f64,
    /// Hard cap on accepted steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            atol: 1e-10,
            rtol: 1e-10,
            h_init: 1e-3,
            h_max: 0.1,
            max_steps: 2_000_000,
        }
    }
}

/// Why the integration loop returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// An event function changed sign; the index identifies which one. The
    /// final recorded state sits on the refined crossing.
    EventHit(usize),
    /// Integrated through to `t_end` without any event firing.
    ReachedEnd,
    /// Step control drove the step below the representable scale.
    StepUnderflow,
    /// `max_steps` accepted steps were taken.
    MaxStepsExceeded,
}

#[derive(Debug, Clone)]
pub struct OdeResult<const N: usize> {
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    pub stop: StopReason,
}

impl<const N: usize> OdeResult<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.ts.last().unwrap(), *self.ys.last().unwrap())
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dp45_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], f64) {
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, y);
    for s in 0..6 {
        let mut ys = *y;
        for i in 0..N {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(s + 1) {
                acc += A[s][j] * kj[i];
            }
            ys[i] = y[i] + h * acc;
        }
        k[s + 1] = f(t + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = 0.0f64;
    for i in 0..N {
        let mut acc5 = 0.0;
        let mut acc_err = 0.0;
        for (j, kj) in k.iter().enumerate() {
            acc5 += B5[j] * kj[i];
            acc_err += (B5[j] - B4[j]) * kj[i];
        }
        y5[i] = y[i] + h * acc5;
        err = err.max((h * acc_err).abs());
    }
    (y5, err)
}

/// Integrate `y' = f(t, y)` from `(t0, y0)` toward `t_end` (either direction),
/// stopping early when any event function changes sign along the solution.
/// Accepted states are recorded; the terminal state of an event stop is refined
/// to a time bracket of width ~1e-12·(1+|t|).
pub fn integrate_dp45<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    events: &[&dyn Fn(f64, &[f64; N]) -> f64],
    opts: &OdeOptions,
) -> OdeResult<N> {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut ts = vec![t0];
    let mut ys = vec![y0];
    let mut t = t0;
    let mut y = y0;
    let mut g_prev: Vec<f64> = events.iter().map(|g| g(t, &y)).collect();
    let mut h = opts.h_init.min(opts.h_max).min((t_end - t0).abs()).max(1e-14);
    let mut steps = 0usize;

    while (t_end - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            return OdeResult {
                ts,
                ys,
                stop: StopReason::MaxStepsExceeded,
            };
        }
        let h_signed = dir * h.min((t_end - t).abs());
        let (y_new, err) = dp45_step(f, t, &y, h_signed);
        let mut scale = opts.atol;
        for i in 0..N {
            scale = scale.max(opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs()));
        }
        let ratio = err / scale;
        if ratio <= 1.0 {
            let t_new = t + h_signed;
            // Event check on the accepted step.
            for (ei, g) in events.iter().enumerate() {
                let g_new = g(t_new, &y_new);
                if g_prev[ei] != 0.0 && g_prev[ei] * g_new <= 0.0 {
                    let (tc, yc) = refine_event(f, t, &y, t_new, g_prev[ei], *g);
                    ts.push(tc);
                    ys.push(yc);
                    return OdeResult {
                        ts,
                        ys,
                        stop: StopReason::EventHit(ei),
                    };
                }
            }
            t = t_new;
            y = y_new;
            for (ei, g) in events.iter().enumerate() {
                g_prev[ei] = g(t, &y);
            }
            ts.push(t);
            ys.push(y);
            steps += 1;
        }
        let grow = if ratio > 0.0 {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * grow).min(opts.h_max);
        if h < 1e-14 * (1.0 + t.abs()) {
            return OdeResult {
                ts,
                ys,
                stop: StopReason::StepUnderflow,
            };
        }
    }
    OdeResult {
        ts,
        ys,
        stop: StopReason::ReachedEnd,
    }
}

/// Bisection refinement of an event crossing inside one accepted step.
/// Sub-interval states are produced by re-integration (a single RK4 step per
/// probe), so the bracket endpoints stay on the true solution to high order.
fn refine_event<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    mut ta: f64,
    ya0: &[f64; N],
    mut tb: f64,
    ga0: f64,
    g: &dyn Fn(f64, &[f64; N]) -> f64,
) -> (f64, [f64; N]) {
    let mut ya = *ya0;
    let mut ga = ga0;
    let mut yb = rk4_step(f, ta, &ya, tb - ta);
    for _ in 0..80 {
        if (tb - ta).abs() <= 1e-12 * (1.0 + ta.abs()) {
            break;
        }
        let tm = 0.5 * (ta + tb);
        let ym = rk4_step(f, ta, &ya, tm - ta);
        let gm = g(tm, &ym);
        if ga * gm <= 0.0 && ga != 0.0 {
            tb = tm;
            yb = ym;
        } else {
            ta = tm;
            ya = ym;
            ga = gm;
        }
    }
    (tb, yb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dp45_exponential_decay() {
        let f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let r = integrate_dp45(&f, 0.0, [1.0], 2.0, &[], &OdeOptions::default());
        assert_eq!(r.stop, StopReason::ReachedEnd);
        let (_, y) = r.last();
        assert_relative_eq!(y[0], (-2.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn dp45_harmonic_oscillator_energy() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let r = integrate_dp45(&f, 0.0, [1.0, 0.0], 20.0, &[], &OdeOptions::default());
        let (_, y) = r.last();
        let e = y[0] * y[0] + y[1] * y[1];
        assert_relative_eq!(e, 1.0, epsilon = 1e-8);
        assert_relative_eq!(y[0], 20f64.cos(), epsilon = 1e-7);
    }

    #[test]
    fn event_stops_on_crossing() {
        // y' = 1, event at y = 0.5 starting from 0: crossing at t = 0.5 exactly.
        let f = |_t: f64, _y: &[f64; 1]| [1.0];
        let ev = |_t: f64, y: &[f64; 1]| y[0] - 0.5;
        let r = integrate_dp45(&f, 0.0, [0.0], 2.0, &[&ev], &OdeOptions::default());
        assert_eq!(r.stop, StopReason::EventHit(0));
        let (t, y) = r.last();
        assert_relative_eq!(t, 0.5, epsilon = 1e-10);
        assert_relative_eq!(y[0], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn event_refinement_on_oscillator() {
        // First zero of cos(t) is at pi/2.
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let ev = |_t: f64, y: &[f64; 2]| y[0];
        let r = integrate_dp45(&f, 0.0, [1.0, 0.0], 10.0, &[&ev], &OdeOptions::default());
        assert_eq!(r.stop, StopReason::EventHit(0));
        let (t, _) = r.last();
        assert_relative_eq!(t, std::f64::consts::FRAC_PI_2, epsilon = 1e-9);
    }

    #[test]
    fn backward_integration() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let r = integrate_dp45(&f, 1.0, [1.0], 0.0, &[], &OdeOptions::default());
        let (t, y) = r.last();
        assert_relative_eq!(t, 0.0);
        assert_relative_eq!(y[0], (-1.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn rk4_order() {
        let f = |t: f64, _y: &[f64; 1]| [t.cos()];
        let mut y = [0.0];
        let n = 100;
        let h = 1.0 / n as f64;
        for i in 0..n {
            y = rk4_step(&f, i as f64 * h, &y, h);
        }
        assert_relative_eq!(y[0], 1.0f64.sin(), epsilon = 1e-10);
    }
}
