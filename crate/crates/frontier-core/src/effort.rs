//! The effort function: minimal total control needed to sustain a wave of
//! prescribed speed, tabulated over a speed grid or given in closed form
//! for the basic saturated model `E(beta) = max(0, 1 + beta)`.

use crate::numerics::chebyshev_lobatto;
use crate::phase::{degenerate_infimum_path, optimal_path, path_cost, PhaseError};
use crate::reaction::ReactionTerm;

#[derive(Debug, Clone)]
enum Model {
    Basic,
    Tabulated {
        betas: Vec<f64>,
        efforts: Vec<f64>,
        attained: Vec<bool>,
        beta_star: f64,
    },
}

/// Map from inward boundary speed to the effort per unit length required to
/// sustain it. Zero at and below the free speed `beta_star`.
#[derive(Debug, Clone)]
pub struct EffortTable {
    model: Model,
}

impl EffortTable {
    /// The basic saturated model `E(beta) = max(0, 1 + beta)`: free speed
    /// -1, unit slope above it.
    pub fn basic() -> Self {
        EffortTable { model: Model::Basic }
    }

    /// Build from tabulated samples. `betas` must be strictly increasing;
    /// rows at or below `beta_star` must tabulate zero effort.
    pub fn from_samples(
        betas: Vec<f64>,
        efforts: Vec<f64>,
        attained: Vec<bool>,
        beta_star: f64,
    ) -> Self {
        assert_eq!(betas.len(), efforts.len());
        assert_eq!(betas.len(), attained.len());
        assert!(betas.windows(2).all(|w| w[1] > w[0]));
        EffortTable { model: Model::Tabulated { betas, efforts, attained, beta_star } }
    }

    pub fn is_basic(&self) -> bool {
        matches!(self.model, Model::Basic)
    }

    /// Speed below which no effort is needed.
    pub fn beta_star(&self) -> f64 {
        match &self.model {
            Model::Basic => -1.0,
            Model::Tabulated { beta_star, .. } => *beta_star,
        }
    }

    /// `E(beta)`, by piecewise-linear interpolation for tabulated models
    /// (linear extrapolation with the final slope beyond the grid).
    pub fn eval(&self, beta: f64) -> f64 {
        match &self.model {
            Model::Basic => (1.0 + beta).max(0.0),
            Model::Tabulated { betas, efforts, beta_star, .. } => {
                if beta <= *beta_star {
                    return 0.0;
                }
                let n = betas.len();
                if n == 0 {
                    return 0.0;
                }
                if beta <= betas[0] {
                    // Between the free speed and the first knot.
                    let span = betas[0] - beta_star;
                    if span <= 0.0 {
                        return efforts[0];
                    }
                    return efforts[0] * (beta - beta_star) / span;
                }
                if beta >= betas[n - 1] {
                    if n == 1 {
                        return efforts[0];
                    }
                    let slope =
                        (efforts[n - 1] - efforts[n - 2]) / (betas[n - 1] - betas[n - 2]);
                    return efforts[n - 1] + slope * (beta - betas[n - 1]);
                }
                let mut lo = 0;
                let mut hi = n - 1;
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if betas[mid] <= beta {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t = (beta - betas[lo]) / (betas[hi] - betas[lo]);
                efforts[lo] + t * (efforts[hi] - efforts[lo])
            }
        }
    }

    /// `E'(beta)`; the right-hand slope at kinks, zero below the free speed.
    pub fn deriv(&self, beta: f64) -> f64 {
        match &self.model {
            Model::Basic => {
                if beta >= -1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Model::Tabulated { betas, efforts, beta_star, .. } => {
                if beta < *beta_star {
                    return 0.0;
                }
                let n = betas.len();
                if n < 2 {
                    return 0.0;
                }
                if beta < betas[0] {
                    let span = betas[0] - beta_star;
                    return if span > 0.0 { efforts[0] / span } else { 0.0 };
                }
                let mut lo = 0;
                let mut hi = n - 1;
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if betas[mid] <= beta {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (efforts[hi] - efforts[lo]) / (betas[hi] - betas[lo])
            }
        }
    }

    /// Tabulated rows `(beta, effort, attained)`; `None` for the basic model.
    pub fn rows(&self) -> Option<Vec<(f64, f64, bool)>> {
        match &self.model {
            Model::Basic => None,
            Model::Tabulated { betas, efforts, attained, .. } => Some(
                betas
                    .iter()
                    .zip(efforts)
                    .zip(attained)
                    .map(|((&b, &e), &a)| (b, e, a))
                    .collect(),
            ),
        }
    }

    /// Check the structural invariants expected of an effort function:
    /// zero at and below the free speed, nondecreasing, convex (secant
    /// slopes nondecreasing within 1e-9), positive tangent intercept
    /// `E - beta E' >= 0` for positive speeds, and sublinear growth
    /// `E(beta) <= beta E(1)` for `beta >= 1`. Returns a description of
    /// every violated invariant.
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let (betas, efforts) = match &self.model {
            Model::Basic => return bad,
            Model::Tabulated { betas, efforts, .. } => (betas, efforts),
        };
        let bs = self.beta_star();
        for (&b, &e) in betas.iter().zip(efforts) {
            if b <= bs + 1e-12 && e.abs() > 1e-9 {
                bad.push(format!("E({b}) = {e:.3e} should vanish at or below the free speed"));
            }
        }
        for w in efforts.windows(2) {
            if w[1] < w[0] - 1e-9 {
                bad.push(format!("effort decreases from {:.6} to {:.6}", w[0], w[1]));
                break;
            }
        }
        let slopes: Vec<f64> = betas
            .windows(2)
            .zip(efforts.windows(2))
            .map(|(b, e)| (e[1] - e[0]) / (b[1] - b[0]))
            .collect();
        for (i, w) in slopes.windows(2).enumerate() {
            if w[1] - w[0] < -1e-9 {
                bad.push(format!(
                    "convexity fails on [{:.4}, {:.4}]: secant slope drops {:.6} -> {:.6}",
                    betas[i], betas[i + 2], w[0], w[1]
                ));
            }
        }
        for i in 1..betas.len() {
            if betas[i] > 0.0 {
                let intercept = efforts[i] - betas[i] * slopes[i - 1];
                if intercept < -1e-9 {
                    bad.push(format!(
                        "tangent intercept E - beta E' = {intercept:.3e} < 0 at beta = {:.4}",
                        betas[i]
                    ));
                }
            }
        }
        let e1 = self.eval(1.0);
        for (&b, &e) in betas.iter().zip(efforts) {
            if b >= 1.0 && e > b * e1 + 1e-9 {
                bad.push(format!(
                    "sublinearity fails at beta = {b:.4}: E = {e:.6} > beta*E(1) = {:.6}",
                    b * e1
                ));
            }
        }
        bad
    }
}

/// Default tabulation grid: 64 Chebyshev-spaced speeds on
/// `[beta_star, beta_star + 4]`.
pub fn default_speed_grid(f: &ReactionTerm) -> Result<Vec<f64>, PhaseError> {
    let bs = f.beta_star()?;
    Ok(chebyshev_lobatto(bs, bs + 4.0, 64))
}

/// Tabulate the effort function of a reaction term over a speed grid.
///
/// Each entry is the minimal total control sustaining a wave at that speed.
/// Above the node threshold the infimum is not attained by any single
/// profile (the wave splits in two); those rows tabulate the infimum and
/// are flagged unattained.
pub fn effort_function(f: &ReactionTerm, betas: &[f64]) -> Result<EffortTable, PhaseError> {
    let bs = f.beta_star()?;
    let mut grid: Vec<f64> = betas.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let mut efforts = Vec::with_capacity(grid.len());
    let mut attained = Vec::with_capacity(grid.len());
    for &beta in &grid {
        if beta <= bs + 1e-12 {
            if beta < bs - 1e-9 {
                return Err(PhaseError::SpeedBelowMinimum { beta, beta_star: bs });
            }
            efforts.push(0.0);
            attained.push(true);
            continue;
        }
        match optimal_path(f, beta) {
            Ok(path) => {
                efforts.push(path_cost(&path, f, beta)?);
                attained.push(true);
            }
            Err(PhaseError::DegenerateNode { .. }) => {
                let path = degenerate_infimum_path(f, beta)?;
                efforts.push(path_cost(&path, f, beta)?);
                attained.push(false);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(EffortTable::from_samples(grid, efforts, attained, bs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::{validate_reaction, ReactionSpec};
    use approx::assert_relative_eq;

    #[test]
    fn basic_model_closed_form() {
        let e = EffortTable::basic();
        assert_eq!(e.eval(-2.0), 0.0);
        assert_eq!(e.eval(-1.0), 0.0);
        assert_relative_eq!(e.eval(0.0), 1.0);
        assert_relative_eq!(e.eval(3.0), 4.0);
        assert_eq!(e.deriv(-1.0), 1.0, "right-hand slope at the kink");
        assert_eq!(e.deriv(-1.5), 0.0);
        assert!(e.validate().is_empty());
    }

    #[test]
    fn cubic_table_monotone_with_zero_at_free_speed() {
        let f = validate_reaction(ReactionSpec::Cubic { a: 0.3 }).unwrap();
        let bs = f.beta_star().unwrap();
        let grid: Vec<f64> = (0..20)
            .map(|i| bs + (0.8 - bs) * i as f64 / 19.0)
            .collect();
        let table = effort_function(&f, &grid).unwrap();
        let rows = table.rows().unwrap();
        assert_eq!(rows.len(), 20);
        assert!(rows[0].1.abs() < 1e-9, "zero effort at the free speed");
        assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9), "nondecreasing");
        assert!(rows.iter().all(|r| r.2), "all speeds below the node threshold attained");
        // Spot anchor: effort at speed 0 for this term.
        assert_relative_eq!(table.eval(0.0), 0.44620, epsilon = 2e-4);
    }

    #[test]
    fn unattained_rows_above_node_threshold() {
        let f = validate_reaction(ReactionSpec::Cubic { a: 0.3 }).unwrap();
        let bss = f.beta_star_star();
        let table = effort_function(&f, &[bss + 0.1, bss + 0.5]).unwrap();
        let rows = table.rows().unwrap();
        assert!(rows.iter().all(|r| !r.2), "rows above the threshold are infima only");
        assert!(rows[1].1 > rows[0].1);
    }

    #[test]
    fn default_grid_spans_four_units() {
        let f = validate_reaction(ReactionSpec::Cubic { a: 0.3 }).unwrap();
        let g = default_speed_grid(&f).unwrap();
        let bs = f.beta_star().unwrap();
        assert_eq!(g.len(), 64);
        assert_relative_eq!(g[0], bs, epsilon = 1e-12);
        assert_relative_eq!(g[63], bs + 4.0, epsilon = 1e-12);
    }

    #[test]
    fn interpolation_tracks_fresh_evaluation() {
        let f = validate_reaction(ReactionSpec::Cubic { a: 0.3 }).unwrap();
        let bs = f.beta_star().unwrap();
        let grid: Vec<f64> = (0..33).map(|i| bs + 0.9 * i as f64 / 32.0).collect();
        let table = effort_function(&f, &grid).unwrap();
        // Off-knot query agrees with a direct computation to interpolation
        // accuracy.
        let beta = 0.33;
        let path = optimal_path(&f, beta).unwrap();
        let direct = path_cost(&path, &f, beta).unwrap();
        assert_relative_eq!(table.eval(beta), direct, epsilon = 1e-3);
    }
}
