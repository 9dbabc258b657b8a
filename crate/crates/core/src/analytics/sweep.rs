use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::value::contest_value;
use crate::error::{Error, Result};
use crate::model::{payoffs, Game, Scenario, Structure};
use crate::parallel::pool;
use crate::solver::system::best_response_block;
use crate::solver::{solve_bipartite, solve_equilibrium, solve_partition, EquilibriumResult, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Draw parameter r.
    R,
    /// Transfer T.
    T,
    /// Cost multiplier m in c ↦ m·c.
    CostScale,
    /// Victim-class size v in B(n−v, v).
    PartitionV,
    /// Opponent effort along the first contest's best-reply curves.
    BrCurve,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::R => "r",
            SweepKind::T => "T",
            SweepKind::CostScale => "cost_scale",
            SweepKind::PartitionV => "partition_v",
            SweepKind::BrCurve => "br_curve",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "r" => SweepKind::R,
            "T" | "t" => SweepKind::T,
            "cost_scale" => SweepKind::CostScale,
            "partition_v" => SweepKind::PartitionV,
            "br_curve" => SweepKind::BrCurve,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown sweep kind '{s}' (r, T, cost_scale, partition_v, br_curve)"
                )))
            }
        })
    }
}

/// One grid point. Fields that a sweep kind does not produce stay `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepRecord {
    pub value: f64,
    /// Dense row-major efforts.
    pub efforts: Option<Vec<Vec<f64>>>,
    pub totals: Option<Vec<f64>>,
    pub w_star: Option<f64>,
    pub payoffs: Option<Vec<f64>>,
    /// s_ij and s_ji of the probe contest (first edge, or attacker/victim pair).
    pub probe_s_ij: Option<f64>,
    pub probe_s_ji: Option<f64>,
    pub attacker_payoff: Option<f64>,
    pub deviation_payoff: Option<f64>,
    pub f: Option<f64>,
    /// i's best reply when j plays `value`, and j's when i plays `value`.
    pub br_i: Option<f64>,
    pub br_j: Option<f64>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(value: f64, e: Error) -> Self {
        SweepRecord {
            value,
            error: Some(e.to_string()),
            ..Default::default()
        }
    }

    pub fn probe_total(&self) -> Option<f64> {
        Some(self.probe_s_ij? + self.probe_s_ji?)
    }
}

/// Flat CSV row of a record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub w_star: Option<f64>,
    pub probe_s_ij: Option<f64>,
    pub probe_s_ji: Option<f64>,
    pub probe_total: Option<f64>,
    pub attacker_payoff: Option<f64>,
    pub deviation_payoff: Option<f64>,
    pub f: Option<f64>,
    pub br_i: Option<f64>,
    pub br_j: Option<f64>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: SweepKind,
    pub grid: Vec<f64>,
    pub probe: Option<(usize, usize)>,
    pub records: Vec<SweepRecord>,
}

impl SweepTable {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.records
            .iter()
            .map(|r| SweepRow {
                value: r.value,
                w_star: r.w_star,
                probe_s_ij: r.probe_s_ij,
                probe_s_ji: r.probe_s_ji,
                probe_total: r.probe_total(),
                attacker_payoff: r.attacker_payoff,
                deviation_payoff: r.deviation_payoff,
                f: r.f,
                br_i: r.br_i,
                br_j: r.br_j,
                residual: r.residual,
                error: r.error.clone(),
            })
            .collect()
    }

    /// Column of a successful field, in grid order; failed points are skipped.
    pub fn column(&self, pick: impl Fn(&SweepRecord) -> Option<f64>) -> Vec<f64> {
        self.records.iter().filter_map(pick).collect()
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }
}

fn strictly_monotone(grid: &[f64]) -> bool {
    grid.windows(2).all(|w| w[0] < w[1]) || grid.windows(2).all(|w| w[0] > w[1])
}

fn solve_scenario(sc: &Scenario, g: &Structure, game: &Game, opts: &SolveOptions) -> Result<EquilibriumResult> {
    match &sc.partition_sizes {
        Some(p) => solve_partition(p, game, opts),
        None => solve_equilibrium(g, game, opts),
    }
}

fn equilibrium_record(value: f64, eq: &EquilibriumResult, game: &Game, probe: Option<(usize, usize)>) -> Result<SweepRecord> {
    let pi = payoffs(&eq.profile, game);
    Ok(SweepRecord {
        value,
        efforts: Some(eq.profile.rows()),
        totals: Some(eq.totals.clone()),
        w_star: Some(eq.totals.iter().sum()),
        payoffs: Some(pi),
        probe_s_ij: probe.map(|(i, j)| eq.profile.get(i, j)),
        probe_s_ji: probe.map(|(i, j)| eq.profile.get(j, i)),
        residual: Some(eq.residual),
        ..Default::default()
    })
}

fn parameter_game(kind: SweepKind, base: &Game, x: f64) -> Result<Game> {
    let g = match kind {
        SweepKind::R => base.with_r(x),
        SweepKind::T => base.with_transfer(x),
        SweepKind::CostScale => base.with_cost(base.cost.scaled(x)?),
        _ => *base,
    };
    g.validate()?;
    Ok(g)
}

/// Re-solves the scenario at each grid point. Points run concurrently and
/// per-point failures are recorded in the record rather than aborting.
pub fn sweep(kind: SweepKind, grid: &[f64], scenario: &Scenario, opts: &SolveOptions) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) || !strictly_monotone(grid) {
        return Err(Error::InvalidInput("sweep grid must be finite and strictly monotone".into()));
    }
    scenario.validate()?;
    let base = scenario.game()?;
    let g = scenario.structure()?;
    let probe = match kind {
        SweepKind::PartitionV => None,
        _ => g.edges().next(),
    };
    if kind == SweepKind::BrCurve && probe.is_none() {
        return Err(Error::InvalidInput("best-reply sweep needs at least one contest".into()));
    }
    let at_base = match kind {
        SweepKind::BrCurve => Some(solve_scenario(scenario, &g, &base, opts)?),
        _ => None,
    };
    let point = |x: f64| -> Result<SweepRecord> {
        match kind {
            SweepKind::R | SweepKind::T | SweepKind::CostScale => {
                let game = parameter_game(kind, &base, x)?;
                let eq = solve_scenario(scenario, &g, &game, opts)?;
                equilibrium_record(x, &eq, &game, probe)
            }
            SweepKind::PartitionV => partition_point(scenario.n, x, &base, opts.tol),
            SweepKind::BrCurve => {
                let eq = at_base.as_ref().expect("base equilibrium");
                let (i, j) = probe.expect("probe contest");
                if x < 0.0 {
                    return Err(Error::InvalidInput(format!("effort must be >= 0, got {x}")));
                }
                let reply = |me: usize, other: usize| {
                    let rest = eq.profile.total(me) - eq.profile.get(me, other);
                    let hint = eq.profile.get(me, other);
                    best_response_block(&base, base.cost_multiplier(me), &[x], &[1.0], rest, hint)[0]
                };
                let mut rec = equilibrium_record(x, eq, &base, probe)?;
                rec.br_i = Some(reply(i, j));
                rec.br_j = Some(reply(j, i));
                Ok(rec)
            }
        }
    };
    let records = pool().install(|| {
        grid.par_iter()
            .map(|&x| point(x).unwrap_or_else(|e| SweepRecord::failed(x, e)))
            .collect()
    });
    Ok(SweepTable {
        parameter: kind,
        grid: grid.to_vec(),
        probe,
        records,
    })
}

/// Attacker payoff in B(n−v, v) and its payoff after dropping one victim.
fn partition_point(n: usize, v: f64, game: &Game, tol: f64) -> Result<SweepRecord> {
    let a = n as f64 - v;
    if !(v >= 1.0 && a > 0.0) {
        return Err(Error::InvalidParameter(format!("need 1 <= v < n, got v = {v}, n = {n}")));
    }
    let eq = solve_bipartite(a, v, game, tol.min(1e-12))?;
    let (x, y) = (eq.attacker_effort, eq.victim_effort);
    let attacker = v * game.revenue(x, y) - game.cost.value(v * x);
    let deviation = contest_value(v - 1.0, y, game)?;
    let full = contest_value(v, y, game)?;
    Ok(SweepRecord {
        value: v,
        totals: Some(vec![eq.attacker_total(), eq.victim_total()]),
        w_star: Some(eq.total_spending()),
        probe_s_ij: Some(x),
        probe_s_ji: Some(y),
        attacker_payoff: Some(attacker),
        deviation_payoff: Some(deviation),
        f: Some(deviation - full),
        ..Default::default()
    })
}
