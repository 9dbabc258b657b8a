use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Game, StrategyProfile, Structure};
use crate::solver::{flow_from, EquilibriumResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentResult {
    pub equilibrium: EquilibriumResult,
    /// ‖J‖ at the start and after every accepted step.
    pub field_norms: Vec<f64>,
}

/// Explicit Euler integration of ṡ = J(s) projected onto s ≥ 0, with each
/// step halved until ‖J‖ decreases. Stops when the KKT residual reaches
/// `tol`; `horizon` caps the number of steps.
pub fn integrate_adjustment(
    s0: &StrategyProfile,
    g: &Structure,
    game: &Game,
    step: f64,
    horizon: usize,
    tol: f64,
) -> Result<AdjustmentResult> {
    if s0.n() != g.n() {
        return Err(Error::InvalidInput(format!(
            "profile has {} players, structure has {}",
            s0.n(),
            g.n()
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {step}")));
    }
    for i in 0..g.n() {
        for j in 0..g.n() {
            if i != j && !g.has_edge(i, j) && s0.get(i, j) != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "initial effort s[{i}][{j}] = {} on a pair without a contest",
                    s0.get(i, j)
                )));
            }
        }
    }
    let mut field_norms = Vec::new();
    let equilibrium = flow_from(g, game, s0, tol, horizon, step, &mut field_norms)?;
    Ok(AdjustmentResult {
        equilibrium,
        field_norms,
    })
}
