//! Scenario file schema and validation.
//!
//! A scenario is a JSON document with a `schema_version`, a `kind` selecting
//! the pipeline, and a handful of optional sections (reaction, shapes,
//! budget, weights, strategy, numerics). Unknown fields and unknown
//! enumerated values are rejected with the offending field path, and every
//! range check needed by a pipeline runs here so that `validate` can vet a
//! file without computing anything.

use serde::Deserialize;
use std::fmt;

/// A schema or range violation, carrying the offending field path when known.
#[derive(Debug, Clone)]
pub struct SchemaError {
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(path) => write!(f, "{}: {}", path, self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for SchemaError {}

fn err(field: &str, message: impl Into<String>) -> SchemaError {
    SchemaError { field: Some(field.to_string()), message: message.into() }
}

/// The pipeline a scenario drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Effort,
    Wave,
    Evolve,
    Eradicate,
    Constrained,
    Verify,
    Slice,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Effort => "effort",
            Kind::Wave => "wave",
            Kind::Evolve => "evolve",
            Kind::Eradicate => "eradicate",
            Kind::Constrained => "constrained",
            Kind::Verify => "verify",
            Kind::Slice => "slice",
        }
    }
}

/// Reaction term description: `{"type":"cubic","a":0.3}` or
/// `{"type":"sampled","knots":[[u,f],...]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionCfg {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub knots: Option<Vec<[f64; 2]>>,
}

/// A planar shape used for confinement regions and initial sets.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeCfg {
    pub shape: String,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub side: Option<f64>,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub height: Option<f64>,
    #[serde(default)]
    pub center: Option<[f64; 2]>,
    #[serde(default)]
    pub points: Option<Vec<[f64; 2]>>,
    /// Vertex count when a curved outline is sampled as a polygon.
    #[serde(default)]
    pub vertices: Option<usize>,
}

/// Running/terminal cost weights and the effort-cost model.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsCfg {
    pub kappa1: f64,
    pub kappa2: f64,
    /// `"budget"` (hard-constrained effort) or `"power"` (penalized effort).
    #[serde(default)]
    pub effort_cost: Option<String>,
    /// Exponent of the power penalty; required with `"power"`.
    #[serde(default)]
    pub exponent: Option<f64>,
}

/// Control strategy to synthesize for verification.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyCfg {
    #[serde(rename = "type")]
    pub kind: String,
    /// Duration of the initial uncontrolled phase (split strategy only).
    #[serde(default)]
    pub free_time: Option<f64>,
}

/// Numerical parameters; every field is optional and each pipeline applies
/// its own defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsCfg {
    /// Time step for curve evolution and adjoint integration.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Number of speed samples in an effort table.
    #[serde(default)]
    pub grid_points: Option<usize>,
    /// Target (or uniform) normal speed.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Upper end of the tabulated speed range.
    #[serde(default)]
    pub beta_max: Option<f64>,
    /// Number of evolution steps.
    #[serde(default)]
    pub steps: Option<usize>,
    /// Simulated time horizon.
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Half-length of the one-dimensional simulation interval.
    #[serde(default)]
    pub domain_half_length: Option<f64>,
    /// Spatial grid step of the one-dimensional simulation.
    #[serde(default)]
    pub grid_step: Option<f64>,
    /// Number of area-fraction levels in a slicing sweep.
    #[serde(default)]
    pub levels: Option<usize>,
    /// Number of boundary markers tracked for verification.
    #[serde(default)]
    pub markers: Option<usize>,
    /// Maximum number of rendered frames.
    #[serde(default)]
    pub frames: Option<usize>,
}

/// A parsed scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub kind: Kind,
    #[serde(default)]
    pub reaction: Option<ReactionCfg>,
    #[serde(default)]
    pub domain: Option<ShapeCfg>,
    #[serde(default)]
    pub initial_set: Option<ShapeCfg>,
    #[serde(default)]
    pub budget: Option<f64>,
    #[serde(default)]
    pub weights: Option<WeightsCfg>,
    #[serde(default)]
    pub strategy: Option<StrategyCfg>,
    #[serde(default)]
    pub numerics: Option<NumericsCfg>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

/// Parse a scenario document, reporting the field path on failure.
pub fn parse_scenario(text: &str) -> Result<Scenario, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    match serde_path_to_error::deserialize::<_, Scenario>(de) {
        Ok(sc) => Ok(sc),
        Err(e) => {
            let path = e.path().to_string();
            let field = if path == "." { None } else { Some(path) };
            let message = e.into_inner().to_string();
            // serde_json appends "at line .. column .." which is noise for a
            // path-addressed report.
            let message = match message.find(" at line ") {
                Some(idx) => message[..idx].to_string(),
                None => message,
            };
            Err(SchemaError { field, message })
        }
    }
}

fn finite(v: f64) -> bool {
    v.is_finite()
}

fn check_reaction(r: &ReactionCfg, path: &str) -> Result<(), SchemaError> {
    match r.kind.as_str() {
        "cubic" => {
            if r.knots.is_some() {
                return Err(err(
                    &format!("{path}.knots"),
                    "knots are only valid with the sampled reaction type",
                ));
            }
            let a = r
                .a
                .ok_or_else(|| err(&format!("{path}.a"), "cubic reaction needs the threshold a"))?;
            if !finite(a) || !(0.0 < a && a < 1.0) {
                return Err(err(
                    &format!("{path}.a"),
                    format!("threshold must lie strictly between 0 and 1, got {a}"),
                ));
            }
        }
        "sampled" => {
            if r.a.is_some() {
                return Err(err(
                    &format!("{path}.a"),
                    "a is only valid with the cubic reaction type",
                ));
            }
            let knots = r.knots.as_ref().ok_or_else(|| {
                err(&format!("{path}.knots"), "sampled reaction needs knots [[u,f],...]")
            })?;
            if knots.len() < 3 {
                return Err(err(
                    &format!("{path}.knots"),
                    format!("need at least 3 knots, got {}", knots.len()),
                ));
            }
            for (i, k) in knots.iter().enumerate() {
                if !finite(k[0]) || !finite(k[1]) {
                    return Err(err(
                        &format!("{path}.knots[{i}]"),
                        "knot coordinates must be finite",
                    ));
                }
            }
        }
        other => {
            return Err(err(
                &format!("{path}.type"),
                format!("unknown reaction type `{other}`, expected `cubic` or `sampled`"),
            ));
        }
    }
    Ok(())
}

fn require_pos(v: Option<f64>, path: &str, what: &str) -> Result<f64, SchemaError> {
    let v = v.ok_or_else(|| err(path, format!("{what} is required")))?;
    if !finite(v) || v <= 0.0 {
        return Err(err(path, format!("{what} must be a positive finite number, got {v}")));
    }
    Ok(v)
}

fn check_shape(s: &ShapeCfg, path: &str) -> Result<(), SchemaError> {
    if let Some(n) = s.vertices {
        if n < 8 {
            return Err(err(&format!("{path}.vertices"), format!("need at least 8, got {n}")));
        }
        if n > 100_000 {
            return Err(err(&format!("{path}.vertices"), format!("at most 100000, got {n}")));
        }
    }
    if let Some(c) = s.center {
        if !finite(c[0]) || !finite(c[1]) {
            return Err(err(&format!("{path}.center"), "center must be finite"));
        }
    }
    let forbid = |cond: bool, f: &str| -> Result<(), SchemaError> {
        if cond {
            Err(err(
                &format!("{path}.{f}"),
                format!("{f} is not valid for shape `{}`", s.shape),
            ))
        } else {
            Ok(())
        }
    };
    match s.shape.as_str() {
        "disc" => {
            require_pos(s.radius, &format!("{path}.radius"), "radius")?;
            forbid(s.a.is_some(), "a")?;
            forbid(s.b.is_some(), "b")?;
            forbid(s.side.is_some(), "side")?;
            forbid(s.width.is_some(), "width")?;
            forbid(s.height.is_some(), "height")?;
            forbid(s.points.is_some(), "points")?;
        }
        "ellipse" => {
            require_pos(s.a, &format!("{path}.a"), "semi-axis a")?;
            require_pos(s.b, &format!("{path}.b"), "semi-axis b")?;
            forbid(s.radius.is_some(), "radius")?;
            forbid(s.side.is_some(), "side")?;
            forbid(s.width.is_some(), "width")?;
            forbid(s.height.is_some(), "height")?;
            forbid(s.points.is_some(), "points")?;
        }
        "triangle" => {
            require_pos(s.side, &format!("{path}.side"), "side")?;
            forbid(s.radius.is_some(), "radius")?;
            forbid(s.a.is_some(), "a")?;
            forbid(s.b.is_some(), "b")?;
            forbid(s.width.is_some(), "width")?;
            forbid(s.height.is_some(), "height")?;
            forbid(s.points.is_some(), "points")?;
            forbid(s.vertices.is_some(), "vertices")?;
        }
        "rectangle" => {
            require_pos(s.width, &format!("{path}.width"), "width")?;
            require_pos(s.height, &format!("{path}.height"), "height")?;
            forbid(s.radius.is_some(), "radius")?;
            forbid(s.a.is_some(), "a")?;
            forbid(s.b.is_some(), "b")?;
            forbid(s.side.is_some(), "side")?;
            forbid(s.points.is_some(), "points")?;
            forbid(s.vertices.is_some(), "vertices")?;
        }
        "polygon" => {
            let pts = s
                .points
                .as_ref()
                .ok_or_else(|| err(&format!("{path}.points"), "polygon needs points"))?;
            if pts.len() < 3 {
                return Err(err(
                    &format!("{path}.points"),
                    format!("need at least 3 points, got {}", pts.len()),
                ));
            }
            for (i, p) in pts.iter().enumerate() {
                if !finite(p[0]) || !finite(p[1]) {
                    return Err(err(
                        &format!("{path}.points[{i}]"),
                        "point coordinates must be finite",
                    ));
                }
            }
            forbid(s.radius.is_some(), "radius")?;
            forbid(s.a.is_some(), "a")?;
            forbid(s.b.is_some(), "b")?;
            forbid(s.side.is_some(), "side")?;
            forbid(s.width.is_some(), "width")?;
            forbid(s.height.is_some(), "height")?;
            forbid(s.vertices.is_some(), "vertices")?;
            forbid(s.center.is_some(), "center")?;
        }
        other => {
            return Err(err(
                &format!("{path}.shape"),
                format!(
                    "unknown shape `{other}`, expected one of `disc`, `ellipse`, `triangle`, \
                     `rectangle`, `polygon`"
                ),
            ));
        }
    }
    Ok(())
}

fn check_weights(w: &WeightsCfg) -> Result<(), SchemaError> {
    if !finite(w.kappa1) || w.kappa1 < 0.0 {
        return Err(err("weights.kappa1", "running weight must be finite and nonnegative"));
    }
    if !finite(w.kappa2) || w.kappa2 < 0.0 {
        return Err(err("weights.kappa2", "terminal weight must be finite and nonnegative"));
    }
    match w.effort_cost.as_deref() {
        None | Some("budget") => {
            if w.exponent.is_some() {
                return Err(err(
                    "weights.exponent",
                    "exponent is only valid with the power effort cost",
                ));
            }
        }
        Some("power") => {
            let p = w.exponent.ok_or_else(|| {
                err("weights.exponent", "power effort cost needs an exponent")
            })?;
            if !finite(p) || p < 1.0 {
                return Err(err("weights.exponent", format!("exponent must be >= 1, got {p}")));
            }
        }
        Some(other) => {
            return Err(err(
                "weights.effort_cost",
                format!("unknown effort cost `{other}`, expected `budget` or `power`"),
            ));
        }
    }
    Ok(())
}

fn check_strategy(s: &StrategyCfg) -> Result<(), SchemaError> {
    match s.kind.as_str() {
        "saturated" | "plan" => {
            if s.free_time.is_some() {
                return Err(err(
                    "strategy.free_time",
                    "free_time is only valid with the split strategy",
                ));
            }
        }
        "split" => {
            let t = s.free_time.ok_or_else(|| {
                err("strategy.free_time", "split strategy needs free_time")
            })?;
            if !finite(t) || t <= 0.0 {
                return Err(err(
                    "strategy.free_time",
                    format!("free_time must be a positive finite number, got {t}"),
                ));
            }
        }
        other => {
            return Err(err(
                "strategy.type",
                format!(
                    "unknown strategy `{other}`, expected one of `saturated`, `split`, `plan`"
                ),
            ));
        }
    }
    Ok(())
}

fn check_numerics(n: &NumericsCfg) -> Result<(), SchemaError> {
    if let Some(dt) = n.dt {
        if !finite(dt) || dt <= 0.0 || dt > 1.0 {
            return Err(err("numerics.dt", format!("dt must lie in (0, 1], got {dt}")));
        }
    }
    if let Some(g) = n.grid_points {
        if !(2..=10_000).contains(&g) {
            return Err(err("numerics.grid_points", format!("must lie in [2, 10000], got {g}")));
        }
    }
    if let Some(b) = n.beta {
        if !finite(b) || b < -1.0 {
            return Err(err("numerics.beta", format!("speed must be finite and >= -1, got {b}")));
        }
    }
    if let Some(b) = n.beta_max {
        if !finite(b) {
            return Err(err("numerics.beta_max", "must be finite"));
        }
    }
    if let Some(s) = n.steps {
        if !(1..=2_000_000).contains(&s) {
            return Err(err("numerics.steps", format!("must lie in [1, 2000000], got {s}")));
        }
    }
    if let Some(h) = n.horizon {
        if !finite(h) || h <= 0.0 {
            return Err(err("numerics.horizon", "must be a positive finite number"));
        }
    }
    if let Some(l) = n.domain_half_length {
        if !finite(l) || l <= 0.0 {
            return Err(err("numerics.domain_half_length", "must be a positive finite number"));
        }
    }
    if let Some(h) = n.grid_step {
        if !finite(h) || h <= 0.0 {
            return Err(err("numerics.grid_step", "must be a positive finite number"));
        }
    }
    if let Some(l) = n.levels {
        if !(8..=100_000).contains(&l) {
            return Err(err("numerics.levels", format!("must lie in [8, 100000], got {l}")));
        }
    }
    if let Some(m) = n.markers {
        if !(2..=10_000).contains(&m) {
            return Err(err("numerics.markers", format!("must lie in [2, 10000], got {m}")));
        }
    }
    if let Some(f) = n.frames {
        if !(1..=10_000).contains(&f) {
            return Err(err("numerics.frames", format!("must lie in [1, 10000], got {f}")));
        }
    }
    Ok(())
}

impl Scenario {
    /// Full schema and range check. Nothing is computed: a scenario that
    /// passes here can still fail at run time (e.g. an infeasible budget),
    /// which is reported as a compute error, not a schema error.
    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.schema_version != 1 {
            return Err(err(
                "schema_version",
                format!("unsupported schema version {}, expected 1", self.schema_version),
            ));
        }
        if let Some(r) = &self.reaction {
            check_reaction(r, "reaction")?;
        }
        if let Some(d) = &self.domain {
            check_shape(d, "domain")?;
        }
        if let Some(s) = &self.initial_set {
            check_shape(s, "initial_set")?;
        }
        if let Some(m) = self.budget {
            if !finite(m) || m <= 0.0 {
                return Err(err(
                    "budget",
                    format!("budget must be a positive finite number, got {m}"),
                ));
            }
        }
        if let Some(w) = &self.weights {
            check_weights(w)?;
        }
        if let Some(s) = &self.strategy {
            check_strategy(s)?;
        }
        if let Some(n) = &self.numerics {
            check_numerics(n)?;
        }

        let require = |present: bool, f: &str| -> Result<(), SchemaError> {
            if present {
                Ok(())
            } else {
                Err(err(f, format!("{} scenarios require the {f} section", self.kind.name())))
            }
        };
        let forbid = |present: bool, f: &str| -> Result<(), SchemaError> {
            if present {
                Err(err(f, format!("{f} is not valid in {} scenarios", self.kind.name())))
            } else {
                Ok(())
            }
        };

        match self.kind {
            Kind::Effort => {
                require(self.reaction.is_some(), "reaction")?;
                forbid(self.domain.is_some(), "domain")?;
                forbid(self.initial_set.is_some(), "initial_set")?;
                forbid(self.budget.is_some(), "budget")?;
                forbid(self.weights.is_some(), "weights")?;
                forbid(self.strategy.is_some(), "strategy")?;
            }
            Kind::Wave => {
                require(self.reaction.is_some(), "reaction")?;
                forbid(self.domain.is_some(), "domain")?;
                forbid(self.initial_set.is_some(), "initial_set")?;
                forbid(self.budget.is_some(), "budget")?;
                forbid(self.weights.is_some(), "weights")?;
                forbid(self.strategy.is_some(), "strategy")?;
            }
            Kind::Evolve => {
                require(self.initial_set.is_some(), "initial_set")?;
                forbid(self.reaction.is_some(), "reaction")?;
                forbid(self.budget.is_some(), "budget")?;
                forbid(self.weights.is_some(), "weights")?;
                forbid(self.strategy.is_some(), "strategy")?;
            }
            Kind::Eradicate => {
                require(self.initial_set.is_some(), "initial_set")?;
                require(self.budget.is_some(), "budget")?;
                forbid(self.reaction.is_some(), "reaction")?;
                forbid(self.domain.is_some(), "domain")?;
                forbid(self.weights.is_some(), "weights")?;
                forbid(self.strategy.is_some(), "strategy")?;
            }
            Kind::Constrained => {
                require(self.domain.is_some(), "domain")?;
                require(self.budget.is_some(), "budget")?;
                forbid(self.reaction.is_some(), "reaction")?;
                forbid(self.initial_set.is_some(), "initial_set")?;
                forbid(self.weights.is_some(), "weights")?;
                forbid(self.strategy.is_some(), "strategy")?;
            }
            Kind::Verify => {
                require(self.initial_set.is_some(), "initial_set")?;
                require(self.budget.is_some(), "budget")?;
                require(self.strategy.is_some(), "strategy")?;
                forbid(self.reaction.is_some(), "reaction")?;
                forbid(self.domain.is_some(), "domain")?;
                let strat = self.strategy.as_ref().unwrap();
                if matches!(strat.kind.as_str(), "saturated" | "split") {
                    let shape = &self.initial_set.as_ref().unwrap().shape;
                    if shape != "disc" {
                        return Err(err(
                            "initial_set.shape",
                            format!("the {} strategy needs a disc initial set", strat.kind),
                        ));
                    }
                }
            }
            Kind::Slice => {
                require(self.domain.is_some(), "domain")?;
                require(self.budget.is_some(), "budget")?;
                forbid(self.reaction.is_some(), "reaction")?;
                forbid(self.initial_set.is_some(), "initial_set")?;
                forbid(self.weights.is_some(), "weights")?;
                forbid(self.strategy.is_some(), "strategy")?;
                let shape = &self.domain.as_ref().unwrap().shape;
                if shape != "disc" && shape != "ellipse" {
                    return Err(err(
                        "domain.shape",
                        "slicing sweeps are defined for disc and ellipse regions",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn numerics(&self) -> NumericsCfg {
        self.numerics.clone().unwrap_or_default()
    }
}
