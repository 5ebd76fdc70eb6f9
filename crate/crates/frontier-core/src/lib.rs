//! Algorithms for boundary-controlled moving sets.
//!
//! A region held by an invasive state is pushed back by controlling the
//! inward normal speed of its boundary, at a running cost ("effort") that
//! grows with the speed demanded. This crate provides the building blocks
//! for planning and verifying such controls:
//!
//! - traveling-wave analysis of the 1-D reaction model, producing the
//!   effort-vs-speed function from phase-plane shooting ([`reaction`],
//!   [`phase`], [`effort`], [`profile`]);
//! - direct PDE simulation to validate the wave predictions ([`pde`]);
//! - planar front tracking under normal-speed fields ([`front`]) and
//!   minimum-time eradication planning in the free plane ([`eradication`]);
//! - cut invariants and eradication verdicts for control confined to a
//!   bounded window ([`constrained`]);
//! - adjoint-based optimality verification of planned trajectories
//!   ([`optimality`]).

pub mod constrained;
pub mod domain;
pub mod front;
pub mod geom;
pub mod numerics;
pub mod ode;
pub mod optimality;
pub mod pde;
pub mod effort;
pub mod eradication;
pub mod phase;
pub mod profile;
pub mod reaction;

pub use constrained::{
    big_k, big_k_witness, check_dido_optimality, cross_section_length, cut_invariants,
    directional_sweep, erad_verdict, ellipse_arc_sweep, isosceles_plan, kappa, kappa_lambda,
    slicing_cost, sweep_strategy, ConstrainedError, CutInvariants, DidoReport, DidoVerdict,
    SweepOutcome, SweepStrategy, Verdict,
};
pub use domain::{Domain, DomainError};
pub use front::{
    area_balance_residual, evolve_step, is_nested, marker_orthogonality_residual, speed_integral,
    total_effort, Closure, FrontCurve, FrontError, MarkerSeries, SpeedField, Trajectory, EPS_AREA,
};
pub use geom::Vec2;
pub use optimality::{
    adjoint_solve, area_sensitivity, cc_dispersion, multiplier, pmp_residual, pmp_residuals,
    shadow_price_error, verify_optimality, AdjointField, CostWeights, EffortCost,
    OptimalityError, OptimalityReport,
};
pub use pde::{simulate_wave, PdeError, WaveSeries, WaveSimOptions};
pub use phase::{min_speed, optimal_path, path_cost, pstar, stokes_compare};
pub use phase::{PhaseError, PhasePath, SegmentKind, SegmentSpan, StokesReport};
pub use effort::{default_speed_grid, effort_function, EffortTable};
pub use eradication::{
    active_runs, arc_radii, disc_min_time, disc_saturated_trajectory, disc_split_trajectory,
    feasible, plan_convex, BudgetedPlan, EradError, Feasibility,
};
pub use profile::{reconstruct_control, reconstruct_profile, ControlProfile};
pub use reaction::{validate_reaction, ReactionError, ReactionSpec, ReactionTerm};
