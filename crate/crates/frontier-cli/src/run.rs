//! Scenario pipelines: one runner per scenario kind, each emitting its
//! artifacts through an [`ArtifactSet`](crate::artifacts::ArtifactSet).

use crate::artifacts::{fmt_f, frame_indices, svg_frame, view_window, ArtifactSet};
use crate::scenario::{Kind, Scenario, SchemaError, ShapeCfg};
use frontier_core::numerics::lerp_sorted;
use frontier_core::{
    check_dido_optimality, cut_invariants, disc_saturated_trajectory, disc_split_trajectory,
    effort_function, ellipse_arc_sweep, erad_verdict, evolve_step, optimal_path, path_cost,
    plan_convex, pmp_residuals, reconstruct_control, reconstruct_profile, simulate_wave,
    slicing_cost, validate_reaction, verify_optimality, ConstrainedError, CostWeights, Domain,
    DomainError, DidoVerdict, EffortTable, EradError, FrontCurve, FrontError, OptimalityError,
    PdeError, PhaseError, ReactionError, ReactionSpec, SpeedField, SweepOutcome, Trajectory,
    Vec2, Verdict, WaveSimOptions,
};
use serde_json::{json, Value};
use std::path::Path;

/// What a run can fail with: a schema/range violation (exit 2) or a
/// computation/data error (exit 3).
#[derive(Debug)]
pub enum AppError {
    Schema(SchemaError),
    Compute { message: String },
}

impl From<SchemaError> for AppError {
    fn from(e: SchemaError) -> AppError {
        AppError::Schema(e)
    }
}

macro_rules! compute_from {
    ($($t:ty),* $(,)?) => {$(
        impl From<$t> for AppError {
            fn from(e: $t) -> AppError {
                AppError::Compute { message: e.to_string() }
            }
        }
    )*}
}

compute_from!(
    ReactionError,
    PhaseError,
    PdeError,
    FrontError,
    EradError,
    ConstrainedError,
    OptimalityError,
    DomainError,
    std::io::Error,
);

/// JSON value for a float; non-finite values serialize as null.
fn json_f(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

// ---------------------------------------------------------------------------
// Shape resolution
// ---------------------------------------------------------------------------

fn ellipse_points(a: f64, b: f64, center: Vec2, n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            center + Vec2::new(a * t.cos(), b * t.sin())
        })
        .collect()
}

fn triangle_points(side: f64) -> Vec<Vec2> {
    vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(side, 0.0),
        Vec2::new(0.5 * side, 0.5 * 3.0_f64.sqrt() * side),
    ]
}

fn rectangle_points(w: f64, h: f64) -> Vec<Vec2> {
    vec![Vec2::new(0.0, 0.0), Vec2::new(w, 0.0), Vec2::new(w, h), Vec2::new(0.0, h)]
}

fn shape_center(s: &ShapeCfg) -> Vec2 {
    s.center.map(|c| Vec2::new(c[0], c[1])).unwrap_or(Vec2::ZERO)
}

fn closed_from_points(pts: Vec<Vec2>) -> Result<FrontCurve, AppError> {
    let mut perim = 0.0;
    for i in 0..pts.len() {
        perim += pts[i].dist(pts[(i + 1) % pts.len()]);
    }
    let h0 = perim / pts.len() as f64;
    Ok(FrontCurve::closed_from(pts, h0)?)
}

/// Build the initial front curve for an `initial_set` section.
fn shape_to_curve(s: &ShapeCfg) -> Result<FrontCurve, AppError> {
    match s.shape.as_str() {
        "disc" => {
            let r = s.radius.unwrap();
            let n = s.vertices.unwrap_or(256);
            Ok(FrontCurve::circle(shape_center(s), r, n))
        }
        "ellipse" => {
            let (a, b) = (s.a.unwrap(), s.b.unwrap());
            let n = s.vertices.unwrap_or(240);
            closed_from_points(ellipse_points(a, b, shape_center(s), n))
        }
        "triangle" => closed_from_points(triangle_points(s.side.unwrap())),
        "rectangle" => closed_from_points(rectangle_points(s.width.unwrap(), s.height.unwrap())),
        "polygon" => {
            let pts = s.points.as_ref().unwrap().iter().map(|p| Vec2::new(p[0], p[1])).collect();
            closed_from_points(pts)
        }
        other => unreachable!("validated shape {other}"),
    }
}

/// Build the confinement region for a `domain` section.
fn shape_to_domain(s: &ShapeCfg) -> Result<Domain, AppError> {
    match s.shape.as_str() {
        "disc" => Ok(Domain::disc(s.radius.unwrap())?),
        "ellipse" => {
            let n = s.vertices.unwrap_or(96);
            Ok(Domain::ellipse_polygon(s.a.unwrap(), s.b.unwrap(), n)?)
        }
        "triangle" => Ok(Domain::polygon(triangle_points(s.side.unwrap()))?),
        "rectangle" => {
            Ok(Domain::polygon(rectangle_points(s.width.unwrap(), s.height.unwrap()))?)
        }
        "polygon" => {
            let pts = s.points.as_ref().unwrap().iter().map(|p| Vec2::new(p[0], p[1])).collect();
            Ok(Domain::polygon(pts)?)
        }
        other => unreachable!("validated shape {other}"),
    }
}

fn shape_summary(s: &ShapeCfg) -> Value {
    match s.shape.as_str() {
        "disc" => json!({"shape": "disc", "radius": json_f(s.radius.unwrap())}),
        "ellipse" => {
            json!({"shape": "ellipse", "a": json_f(s.a.unwrap()), "b": json_f(s.b.unwrap())})
        }
        "triangle" => json!({"shape": "triangle", "side": json_f(s.side.unwrap())}),
        "rectangle" => json!({
            "shape": "rectangle",
            "width": json_f(s.width.unwrap()),
            "height": json_f(s.height.unwrap()),
        }),
        "polygon" => json!({"shape": "polygon", "points": s.points.as_ref().unwrap().len()}),
        other => unreachable!("validated shape {other}"),
    }
}

fn reaction_summary(sc: &Scenario) -> Value {
    let r = sc.reaction.as_ref().unwrap();
    match r.kind.as_str() {
        "cubic" => json!({"type": "cubic", "a": json_f(r.a.unwrap())}),
        _ => json!({"type": "sampled", "knots": r.knots.as_ref().unwrap().len()}),
    }
}

fn reaction_spec(sc: &Scenario) -> ReactionSpec {
    let r = sc.reaction.as_ref().unwrap();
    match r.kind.as_str() {
        "cubic" => ReactionSpec::Cubic { a: r.a.unwrap() },
        _ => ReactionSpec::Sampled {
            knots: r.knots.as_ref().unwrap().iter().map(|k| (k[0], k[1])).collect(),
        },
    }
}

// ---------------------------------------------------------------------------
// Trajectory artifacts shared by evolve/eradicate
// ---------------------------------------------------------------------------

fn write_frames(
    set: &mut ArtifactSet,
    traj: &Trajectory,
    max_frames: usize,
) -> Result<(), AppError> {
    if traj.curves.is_empty() {
        return Ok(());
    }
    let window = view_window(&traj.curves[0].pts);
    for idx in frame_indices(traj.times.len(), max_frames) {
        let caption = format!("t = {:.4}", traj.times[idx]);
        let svg = svg_frame(&traj.curves[idx], window, &caption);
        set.write_str(&format!("frames/frame_{idx:05}.svg"), &svg)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

fn run_effort(sc: &Scenario, set: &mut ArtifactSet) -> Result<Value, AppError> {
    let f = validate_reaction(reaction_spec(sc))?;
    let num = sc.numerics();
    let beta_star = f.beta_star()?;
    let grid: Vec<f64> = match num.grid_points {
        Some(n) => {
            let hi = num.beta_max.unwrap_or(0.8);
            if hi <= beta_star {
                return Err(AppError::Compute {
                    message: format!(
                        "speed grid upper end {hi} does not exceed the minimal speed {beta_star}"
                    ),
                });
            }
            (0..n)
                .map(|i| beta_star + (hi - beta_star) * i as f64 / (n - 1) as f64)
                .collect()
        }
        None => frontier_core::default_speed_grid(&f)?,
    };
    let table = effort_function(&f, &grid)?;
    let rows = table.rows().expect("tabulated effort table has rows");

    let mut csv = String::from("beta,effort,attained\n");
    for (beta, effort, attained) in &rows {
        csv.push_str(&format!("{},{},{}\n", fmt_f(*beta), fmt_f(*effort), attained));
    }
    set.write_str("effort_table.csv", &csv)?;

    let violations = table.validate();
    let report = json!({
        "schema_version": 1,
        "kind": "effort",
        "reaction": reaction_summary(sc),
        "beta_star": json_f(beta_star),
        "node_threshold": json_f(f.beta_star_star()),
        "u_star": json_f(f.u_star()),
        "grid_points": rows.len(),
        "effort_at_zero": json_f(table.eval(0.0)),
        "invariant_violations": violations,
    });
    set.write_json("report.json", &report)?;
    Ok(report)
}

fn run_wave(sc: &Scenario, set: &mut ArtifactSet) -> Result<Value, AppError> {
    let f = validate_reaction(reaction_spec(sc))?;
    let num = sc.numerics();
    let beta_star = f.beta_star()?;
    let beta = num.beta.unwrap_or(0.0);

    let path = optimal_path(&f, beta)?;
    let predicted_cost = path_cost(&path, &f, beta)?;
    let prof = reconstruct_profile(&path, &f)?;
    let ctrl = reconstruct_control(&path, &f, beta)?;

    let (xs, us) = (prof.xs.clone(), prof.us.clone());
    let init = move |x: f64| lerp_sorted(&xs, &us, x);
    let alpha: Box<dyn Fn(f64) -> f64> = match ctrl.support {
        Some((lo, hi)) => {
            let (cu, ca) = (ctrl.control_u.clone(), ctrl.control_alpha.clone());
            Box::new(move |u: f64| {
                if u <= lo || u >= hi {
                    0.0
                } else {
                    lerp_sorted(&cu, &ca, u)
                }
            })
        }
        None => Box::new(|_| 0.0),
    };

    let defaults = WaveSimOptions::default();
    let grid_step = num.grid_step.unwrap_or(defaults.grid_step);
    let opts = WaveSimOptions {
        domain_half_length: num.domain_half_length.unwrap_or(defaults.domain_half_length),
        grid_step,
        time_step: num.dt.unwrap_or(0.25 * grid_step * grid_step),
        horizon: num.horizon.unwrap_or(defaults.horizon),
        ..defaults
    };
    let fr = |u: f64| f.f(u);
    let series = simulate_wave(&fr, &*alpha, &init, f.u_star(), &opts)?;

    let mut csv = String::from("t,front_position,instantaneous_cost\n");
    for k in 0..series.times.len() {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f(series.times[k]),
            fmt_f(series.front_positions[k]),
            fmt_f(series.instantaneous_costs[k])
        ));
    }
    set.write_str("wave.csv", &csv)?;

    let mut csv = String::from("x,u\n");
    for k in 0..series.xs.len() {
        csv.push_str(&format!("{},{}\n", fmt_f(series.xs[k]), fmt_f(series.final_state[k])));
    }
    set.write_str("profile.csv", &csv)?;

    let report = json!({
        "schema_version": 1,
        "kind": "wave",
        "reaction": reaction_summary(sc),
        "beta_star": json_f(beta_star),
        "target_beta": json_f(beta),
        "predicted_cost": json_f(predicted_cost),
        "measured_speed": json_f(series.measured_speed),
        "realized_cost": json_f(series.realized_cost),
        "horizon": json_f(opts.horizon),
        "grid_step": json_f(opts.grid_step),
        "domain_half_length": json_f(opts.domain_half_length),
    });
    set.write_json("report.json", &report)?;
    Ok(report)
}

fn run_evolve(sc: &Scenario, set: &mut ArtifactSet) -> Result<Value, AppError> {
    let num = sc.numerics();
    let dt = num.dt.unwrap_or(1e-3);
    let steps = num.steps.unwrap_or(200);
    let beta = num.beta.unwrap_or(0.0);
    let dom = match &sc.domain {
        Some(s) => Some(shape_to_domain(s)?),
        None => None,
    };
    let e = EffortTable::basic();

    let mut traj = Trajectory::new();
    let mut cur = shape_to_curve(sc.initial_set.as_ref().unwrap())?;
    for k in 0..=steps {
        let field = SpeedField::uniform(cur.pts.len(), beta, &e);
        traj.record(k as f64 * dt, cur.clone(), field.clone(), &e, dom.as_ref())?;
        if cur.is_empty() || k == steps {
            break;
        }
        cur = evolve_step(&cur, &field, dt, dom.as_ref())?;
    }

    let mut csv = String::from("t,area,perimeter,effort\n");
    for k in 0..traj.times.len() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f(traj.times[k]),
            fmt_f(traj.areas[k]),
            fmt_f(traj.perimeters[k]),
            fmt_f(traj.efforts[k])
        ));
    }
    set.write_str("trajectory.csv", &csv)?;
    write_frames(set, &traj, num.frames.unwrap_or(24))?;

    let n = traj.times.len();
    let report = json!({
        "schema_version": 1,
        "kind": "evolve",
        "initial_set": shape_summary(sc.initial_set.as_ref().unwrap()),
        "beta": json_f(beta),
        "dt": json_f(dt),
        "records": n,
        "initial_area": json_f(traj.areas[0]),
        "final_time": json_f(traj.times[n - 1]),
        "final_area": json_f(traj.areas[n - 1]),
        "final_perimeter": json_f(traj.perimeters[n - 1]),
    });
    set.write_json("report.json", &report)?;
    Ok(report)
}

fn run_eradicate(sc: &Scenario, set: &mut ArtifactSet) -> Result<Value, AppError> {
    let num = sc.numerics();
    let dt = num.dt.unwrap_or(1e-3);
    let budget = sc.budget.unwrap();
    let curve = shape_to_curve(sc.initial_set.as_ref().unwrap())?;
    let plan = plan_convex(&curve, budget, dt)?;
    let traj = &plan.trajectory;

    let mut csv = String::from("t,area,perimeter,effort,active_radius,active_arcs\n");
    for k in 0..traj.times.len() {
        let radius = plan.radius_series.get(k).copied().unwrap_or(f64::NAN);
        let arcs = plan.n_active_arcs.get(k).copied().unwrap_or(0);
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f(traj.times[k]),
            fmt_f(traj.areas[k]),
            fmt_f(traj.perimeters[k]),
            fmt_f(traj.efforts[k]),
            fmt_f(radius),
            arcs
        ));
    }
    set.write_str("trajectory.csv", &csv)?;
    write_frames(set, traj, num.frames.unwrap_or(24))?;

    let n = traj.times.len();
    let report = json!({
        "schema_version": 1,
        "kind": "eradicate",
        "initial_set": shape_summary(sc.initial_set.as_ref().unwrap()),
        "budget": json_f(budget),
        "dt": json_f(dt),
        "records": n,
        "initial_area": json_f(traj.areas[0]),
        "eradication_time": plan.eradication_time.map(json_f).unwrap_or(Value::Null),
        "terminal_radius": json_f(plan.terminal_radius),
        "terminal_time": json_f(plan.terminal_time),
        "final_area": json_f(traj.areas[n - 1]),
    });
    set.write_json("report.json", &report)?;
    Ok(report)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Eradicable => "eradicable",
        Verdict::NotEradicable => "not_eradicable",
        Verdict::Indeterminate => "indeterminate",
    }
}

fn run_constrained(sc: &Scenario, set: &mut ArtifactSet) -> Result<Value, AppError> {
    let budget = sc.budget.unwrap();
    let v = shape_to_domain(sc.domain.as_ref().unwrap())?;
    let inv = cut_invariants(&v, Some(budget))?;
    let verdict = erad_verdict(&v, budget)?;

    let mut csv = String::from("lambda,min_cut_length\n");
    for k in 0..inv.lambda_grid.len() {
        csv.push_str(&format!(
            "{},{}\n",
            fmt_f(inv.lambda_grid[k]),
            fmt_f(inv.kappa_values[k])
        ));
    }
    set.write_str("invariants.csv", &csv)?;

    let report = json!({
        "schema_version": 1,
        "kind": "constrained",
        "domain": shape_summary(sc.domain.as_ref().unwrap()),
        "budget": json_f(budget),
        "kappa": json_f(inv.kappa),
        "big_k": json_f(inv.big_k),
        "verdict": verdict_name(verdict),
        "sweep_direction": json_f(inv.sweep_direction),
        "witness": inv.witness,
        "lambda_star": inv.lambda_star.map(json_f).unwrap_or(Value::Null),
    });
    set.write_json("verdict.json", &report)?;
    Ok(report)
}

fn build_verify_trajectory(sc: &Scenario, dt: f64) -> Result<Trajectory, AppError> {
    let strat = sc.strategy.as_ref().unwrap();
    let shape = sc.initial_set.as_ref().unwrap();
    let budget = sc.budget.unwrap();
    match strat.kind.as_str() {
        "saturated" => {
            let r = shape.radius.unwrap();
            let n = shape.vertices.unwrap_or(256);
            Ok(disc_saturated_trajectory(r, budget, n, dt)?)
        }
        "split" => {
            let r = shape.radius.unwrap();
            let n = shape.vertices.unwrap_or(128);
            Ok(disc_split_trajectory(r, strat.free_time.unwrap(), budget, n, dt)?)
        }
        "plan" => {
            let curve = shape_to_curve(shape)?;
            Ok(plan_convex(&curve, budget, dt)?.trajectory)
        }
        other => unreachable!("validated strategy {other}"),
    }
}

fn run_verify(sc: &Scenario, set: &mut ArtifactSet) -> Result<Value, AppError> {
    let num = sc.numerics();
    let dt = num.dt.unwrap_or(1e-3);
    let nm = num.markers.unwrap_or(16);
    let strat = sc.strategy.as_ref().unwrap();

    let weights = match &sc.weights {
        None => CostWeights::budget(0.0, 1.0),
        Some(w) => match w.effort_cost.as_deref() {
            Some("power") => CostWeights::power(w.kappa1, w.kappa2, w.exponent.unwrap()),
            _ => CostWeights::budget(w.kappa1, w.kappa2),
        },
    };

    let mut traj = build_verify_trajectory(sc, dt)?;
    let labels: Vec<f64> = (0..nm).map(|i| i as f64 / nm as f64).collect();
    traj.extract_markers(&labels)?;

    let e = EffortTable::basic();
    let adj = frontier_core::adjoint_solve(&traj, &e, &weights)?;
    let residuals = pmp_residuals(&traj, &adj, &e)?;
    let report_stats = verify_optimality(&traj, &e, &weights)?;

    let mut csv = String::from("t,xi,Y,omega,beta,residual\n");
    for k in 0..adj.times.len() {
        for i in 0..adj.labels.len() {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_f(adj.times[k]),
                fmt_f(adj.labels[i]),
                fmt_f(adj.y[k][i]),
                fmt_f(adj.omega[k][i]),
                fmt_f(adj.beta[k][i]),
                fmt_f(residuals[k][i])
            ));
        }
    }
    set.write_str("markers.csv", &csv)?;

    let effort_cost = match weights.phi {
        frontier_core::EffortCost::Budget => json!("budget"),
        frontier_core::EffortCost::Power { exponent } => {
            json!({"power": json_f(exponent)})
        }
    };
    let report = json!({
        "schema_version": 1,
        "kind": "verify",
        "initial_set": shape_summary(sc.initial_set.as_ref().unwrap()),
        "strategy": strat.kind,
        "budget": json_f(sc.budget.unwrap()),
        "weights": {
            "kappa1": json_f(weights.kappa1),
            "kappa2": json_f(weights.kappa2),
            "effort_cost": effort_cost,
        },
        "markers": nm,
        "dt": json_f(dt),
        "max_pmp_residual": json_f(report_stats.max_pmp_residual),
        "shadow_price_error": json_f(report_stats.shadow_price_error),
        "cc_dispersion": json_f(report_stats.cc_dispersion),
    });
    set.write_json("report.json", &report)?;
    Ok(report)
}

fn run_slice(sc: &Scenario, set: &mut ArtifactSet) -> Result<Value, AppError> {
    let num = sc.numerics();
    let budget = sc.budget.unwrap();
    let shape = sc.domain.as_ref().unwrap();
    let (a, b) = match shape.shape.as_str() {
        "disc" => (shape.radius.unwrap(), shape.radius.unwrap()),
        _ => (shape.a.unwrap(), shape.b.unwrap()),
    };
    let levels = num.levels.unwrap_or(380);
    let (v, strat) = ellipse_arc_sweep(a, b, budget, levels)?;
    let dido = check_dido_optimality(&strat.trajectory, &v)?;
    let cost = slicing_cost(&strat.trajectory)?;

    let mut csv = String::from("t,remaining_fraction\n");
    for (t, lam) in &strat.lambda_of_t {
        csv.push_str(&format!("{},{}\n", fmt_f(*t), fmt_f(*lam)));
    }
    set.write_str("sweep.csv", &csv)?;

    let verdict = match &dido.verdict {
        DidoVerdict::Optimal => json!("optimal"),
        DidoVerdict::AreaBalanceViolated { residual, time } => json!({
            "area_balance_violated": {"residual": json_f(*residual), "time": json_f(*time)}
        }),
        DidoVerdict::CutNotMinimal { excess, time, fraction } => json!({
            "cut_not_minimal": {
                "excess": json_f(*excess),
                "time": json_f(*time),
                "fraction": json_f(*fraction),
            }
        }),
    };
    let outcome = match strat.outcome {
        SweepOutcome::Completed { time } => json!({"completed": {"time": json_f(time)}}),
        SweepOutcome::Stalled { lambda_star, stuck_area } => json!({
            "stalled": {
                "lambda_star": json_f(lambda_star),
                "stuck_area": json_f(stuck_area),
            }
        }),
    };
    let report = json!({
        "schema_version": 1,
        "kind": "slice",
        "domain": shape_summary(shape),
        "budget": json_f(dido.budget),
        "area_balance": json_f(dido.area_balance),
        "worst_excess": json_f(dido.worst_excess),
        "verdict": verdict,
        "slicing_cost": json_f(cost),
        "outcome": outcome,
        "description": strat.description,
    });
    set.write_json("report.json", &report)?;
    Ok(report)
}

/// Run a validated scenario, writing artifacts and the manifest into
/// `out_dir`.
pub fn execute(sc: &Scenario, out_dir: &Path, quiet: bool) -> Result<(), AppError> {
    let mut set = ArtifactSet::create(out_dir)?;
    match sc.kind {
        Kind::Effort => run_effort(sc, &mut set)?,
        Kind::Wave => run_wave(sc, &mut set)?,
        Kind::Evolve => run_evolve(sc, &mut set)?,
        Kind::Eradicate => run_eradicate(sc, &mut set)?,
        Kind::Constrained => run_constrained(sc, &mut set)?,
        Kind::Verify => run_verify(sc, &mut set)?,
        Kind::Slice => run_slice(sc, &mut set)?,
    };
    set.finish(quiet)?;
    Ok(())
}
