//! Best deviation of one player who keeps some contests and opens others
//! against targets that fight back.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::model::Game;
use crate::numeric;
use crate::solver::anticipated_reply_scaled;
use crate::solver::system::best_response_block;

pub(crate) struct NewTarget {
    pub player: usize,
    pub total: f64,
    pub cost_mult: f64,
}

pub(crate) struct DeviationProblem<'a> {
    pub game: &'a Game,
    pub cost_mult: f64,
    /// Contests kept, with the opponent's effort held fixed.
    pub kept: Vec<(usize, f64)>,
    pub new: Vec<NewTarget>,
    pub grid_points: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct DeviationOutcome {
    pub payoff: f64,
    pub kept_efforts: Vec<f64>,
    pub new_efforts: Vec<f64>,
    pub replies: Vec<f64>,
}

impl DeviationProblem<'_> {
    fn reply(&self, x: f64, t: &NewTarget) -> Result<f64> {
        anticipated_reply_scaled(x, t.total, self.game, t.cost_mult)
    }

    fn payoff(&self, kept: &[f64], new: &[f64], replies: &[f64]) -> f64 {
        let g = self.game;
        let mut rev = 0.0;
        let mut w = 0.0;
        for (&(_, y), &x) in self.kept.iter().zip(kept) {
            rev += g.revenue(x, y);
            w += x;
        }
        for (&x, &y) in new.iter().zip(replies) {
            rev += g.revenue(x, y);
            w += x;
        }
        rev - self.cost_mult * g.cost.value(w)
    }

    pub fn solve(&self) -> Result<DeviationOutcome> {
        let g = self.game;
        let opp: Vec<f64> = self.kept.iter().map(|&(_, y)| y).collect();
        let ones = vec![1.0; opp.len()];
        let mut kept = best_response_block(g, self.cost_mult, &opp, &ones, 0.0, 0.0);
        let mut new = vec![0.0; self.new.len()];
        let mut replies = vec![0.0; self.new.len()];
        for (k, t) in self.new.iter().enumerate() {
            replies[k] = self.reply(0.0, t)?;
        }
        let mut best = self.payoff(&kept, &new, &replies);
        if self.new.is_empty() {
            return Ok(DeviationOutcome {
                payoff: best,
                kept_efforts: kept,
                new_efforts: new,
                replies,
            });
        }
        let failed = Cell::new(None);
        for _ in 0..200 {
            for (l, t) in self.new.iter().enumerate() {
                let rest: f64 = kept.iter().sum::<f64>() + new.iter().sum::<f64>() - new[l];
                let base_cost = self.cost_mult * g.cost.value(rest);
                let cap = g.cost.value_inverse(g.cost.value(rest) + 2.0 * g.transfer() / self.cost_mult) - rest;
                let f = |x: f64| match self.reply(x, t) {
                    Ok(y) => g.revenue(x, y) - (self.cost_mult * g.cost.value(rest + x) - base_cost),
                    Err(e) => {
                        failed.set(Some(e));
                        f64::NEG_INFINITY
                    }
                };
                let (x, _) = numeric::grid_max(f, cap.max(1e-9), self.grid_points);
                if let Some(e) = failed.take() {
                    return Err(e);
                }
                new[l] = x;
                replies[l] = self.reply(x, t)?;
            }
            let extra: f64 = new.iter().sum();
            kept = best_response_block(g, self.cost_mult, &opp, &ones, extra, kept.iter().sum());
            let p = self.payoff(&kept, &new, &replies);
            let done = p - best <= 1e-15 * best.abs().max(1.0);
            best = best.max(p);
            if done {
                break;
            }
        }
        let payoff = self.payoff(&kept, &new, &replies);
        if !payoff.is_finite() {
            return Err(Error::NonConvergence {
                method: "deviation search".into(),
                iterations: 200,
                residual: f64::NAN,
            });
        }
        Ok(DeviationOutcome {
            payoff,
            kept_efforts: kept,
            new_efforts: new,
            replies,
        })
    }
}
