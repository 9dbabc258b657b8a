use serde::{Deserialize, Serialize};

use super::{CostSpec, TechnologySpec};
use crate::error::{Error, Result};

/// Draw parameter `r` and prize size `T` of every pairwise contest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContestParams {
    pub r: f64,
    #[serde(rename = "T")]
    pub transfer: f64,
}

impl Default for ContestParams {
    fn default() -> Self {
        ContestParams {
            r: 0.0,
            transfer: 1.0,
        }
    }
}

impl ContestParams {
    pub fn new(r: f64, transfer: f64) -> Result<Self> {
        let p = ContestParams { r, transfer };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "draw parameter r must be finite and >= 0, got {}",
                self.r
            )));
        }
        if !(self.transfer.is_finite() && self.transfer > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transfer T must be finite and > 0, got {}",
                self.transfer
            )));
        }
        Ok(())
    }
}

/// Multiplies one player's cost by `1 + epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostShock {
    pub player: usize,
    pub epsilon: f64,
}

/// All primitives of the contest game except the structure.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Game {
    pub tech: TechnologySpec,
    pub cost: CostSpec,
    pub params: ContestParams,
    pub shock: Option<CostShock>,
}

impl Game {
    pub fn new(tech: TechnologySpec, cost: CostSpec, params: ContestParams) -> Result<Self> {
        params.validate()?;
        Ok(Game {
            tech,
            cost,
            params,
            shock: None,
        })
    }

    /// φ(x) = x, c(x) = x², r = 0, T = 1.
    pub fn benchmark() -> Self {
        Game::default()
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.params.r = r;
        self
    }

    pub fn with_transfer(mut self, t: f64) -> Self {
        self.params.transfer = t;
        self
    }

    pub fn with_cost(mut self, cost: CostSpec) -> Self {
        self.cost = cost;
        self
    }

    pub fn with_tech(mut self, tech: TechnologySpec) -> Self {
        self.tech = tech;
        self
    }

    pub fn with_shock(mut self, player: usize, epsilon: f64) -> Self {
        self.shock = Some(CostShock { player, epsilon });
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if let Some(s) = self.shock {
            if !(s.epsilon.is_finite() && s.epsilon > -1.0) {
                return Err(Error::InvalidParameter(format!(
                    "cost shock must exceed -1, got {}",
                    s.epsilon
                )));
            }
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        self.params.r
    }

    pub fn transfer(&self) -> f64 {
        self.params.transfer
    }

    /// Multiplier applied to player `i`'s cost.
    pub fn cost_multiplier(&self, i: usize) -> f64 {
        match self.shock {
            Some(s) if s.player == i => 1.0 + s.epsilon,
            _ => 1.0,
        }
    }

    pub fn cost_of(&self, i: usize, w: f64) -> f64 {
        self.cost_multiplier(i) * self.cost.value(w)
    }

    pub fn marginal_cost_of(&self, i: usize, w: f64) -> f64 {
        self.cost_multiplier(i) * self.cost.d1(w)
    }

    /// Expected revenue T·(φ(x) − φ(y))/(φ(x) + φ(y) + r); zero on a
    /// contest nobody enters when r = 0.
    pub fn revenue(&self, x: f64, y: f64) -> f64 {
        let px = self.tech.value(x);
        let py = self.tech.value(y);
        let k = px + py + self.params.r;
        if k == 0.0 {
            return 0.0;
        }
        self.params.transfer * (px - py) / k
    }

    /// ∂R/∂x; `None` at the r = 0, x = y = 0 singularity.
    pub fn marginal(&self, x: f64, y: f64) -> Option<f64> {
        let r = self.params.r;
        let py = self.tech.value(y);
        let k = r + self.tech.value(x) + py;
        if k == 0.0 {
            return None;
        }
        let num = r + 2.0 * py;
        if num == 0.0 {
            return Some(0.0);
        }
        Some(self.params.transfer * num * self.tech.d1(x) / (k * k))
    }

    /// Marginal with the singularity read as an unbounded incentive to enter.
    pub(crate) fn marginal_or_inf(&self, x: f64, y: f64) -> f64 {
        self.marginal(x, y).unwrap_or(f64::INFINITY)
    }

    /// ∂²R/∂x².
    pub(crate) fn marginal_dx(&self, x: f64, y: f64) -> f64 {
        let r = self.params.r;
        let py = self.tech.value(y);
        let k = r + self.tech.value(x) + py;
        let num = r + 2.0 * py;
        if k == 0.0 || num == 0.0 {
            return 0.0;
        }
        let d1 = self.tech.d1(x);
        self.params.transfer * num * (self.tech.d2(x) / (k * k) - 2.0 * d1 * d1 / (k * k * k))
    }

    /// ∂²R/∂x∂y.
    pub(crate) fn marginal_dy(&self, x: f64, y: f64) -> f64 {
        let r = self.params.r;
        let px = self.tech.value(x);
        let py = self.tech.value(y);
        let k = r + px + py;
        if k == 0.0 {
            return 0.0;
        }
        2.0 * self.params.transfer * self.tech.d1(x) * self.tech.d1(y) * (px - py) / (k * k * k)
    }
}

/// Expected revenue of the side investing `s_ij` against `s_ji`.
pub fn contest_revenue(s_ij: f64, s_ji: f64, params: &ContestParams, tech: &TechnologySpec) -> Result<f64> {
    for (name, v) in [("s_ij", s_ij), ("s_ji", s_ji)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "{name} must be finite and >= 0, got {v}"
            )));
        }
    }
    params.validate()?;
    let g = Game {
        tech: *tech,
        cost: CostSpec::quadratic(),
        params: *params,
        shock: None,
    };
    Ok(g.revenue(s_ij, s_ji))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn revenue_examples() {
        let p = ContestParams::default();
        let id = TechnologySpec::identity();
        assert_eq!(contest_revenue(0.4, 0.4, &p, &id).unwrap(), 0.0);
        assert_eq!(contest_revenue(1.0, 0.0, &p, &id).unwrap(), 1.0);
        assert_eq!(contest_revenue(0.0, 0.0, &p, &id).unwrap(), 0.0);
        let v = contest_revenue(0.327, 0.146, &p, &id).unwrap();
        assert!((v - 0.181 / 0.473).abs() < 1e-15);
        assert!((v - 0.38266).abs() < 1e-5);
        assert!(contest_revenue(-1.0, 0.0, &p, &id).is_err());
        assert!(contest_revenue(f64::NAN, 0.0, &p, &id).is_err());
    }

    #[test]
    fn marginal_singularity_flagged() {
        let g = Game::benchmark();
        assert!(g.marginal(0.0, 0.0).is_none());
        assert!(g.with_r(0.5).marginal(0.0, 0.0).is_some());
    }

    #[test]
    fn second_derivatives_match_finite_differences() {
        let g = Game::benchmark()
            .with_r(0.3)
            .with_transfer(1.7)
            .with_tech(TechnologySpec::power(1.2, 0.6).unwrap());
        for &(x, y) in &[(0.2, 0.5), (1.0, 0.3), (0.05, 2.0)] {
            let h = 1e-6;
            let dx = (g.marginal(x + h, y).unwrap() - g.marginal(x - h, y).unwrap()) / (2.0 * h);
            let dy = (g.marginal(x, y + h).unwrap() - g.marginal(x, y - h).unwrap()) / (2.0 * h);
            assert!((dx - g.marginal_dx(x, y)).abs() < 1e-6 * dx.abs().max(1.0));
            assert!((dy - g.marginal_dy(x, y)).abs() < 1e-6 * dy.abs().max(1.0));
            let m = (g.revenue(x + h, y) - g.revenue(x - h, y)) / (2.0 * h);
            assert!((m - g.marginal(x, y).unwrap()).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn revenue_antisymmetric(a in 0.0f64..10.0, b in 0.0f64..10.0, r in 0.0f64..3.0, beta in 0.1f64..=1.0) {
            let p = ContestParams::new(r, 1.0).unwrap();
            let t = TechnologySpec::power(1.0, beta).unwrap();
            let x = contest_revenue(a, b, &p, &t).unwrap();
            let y = contest_revenue(b, a, &p, &t).unwrap();
            prop_assert!((x + y).abs() < 1e-12);
        }

        #[test]
        fn win_probabilities_bounded(a in 0.0f64..10.0, b in 0.0f64..10.0, r in 0.0f64..3.0) {
            let t = TechnologySpec::identity();
            let k = t.value(a) + t.value(b) + r;
            prop_assume!(k > 0.0);
            let win = t.value(a) / k;
            let lose = t.value(b) / k;
            prop_assert!((0.0..=1.0).contains(&win));
            prop_assert!(win + lose <= 1.0 + 1e-15);
            if r == 0.0 {
                prop_assert!((win + lose - 1.0).abs() < 1e-15);
            }
        }
    }
}
