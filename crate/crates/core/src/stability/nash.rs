use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Concept, DeviationCertificate, DeviationKind, StabilityReport, Verdict};
use crate::error::Result;
use crate::model::{payoff_unchecked, Game, StrategyProfile};
use crate::parallel::pool;
use crate::solver::system::best_response_block;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictedStructure {
    Empty,
    Complete,
}

/// Entry condition at an unlinked pair: the marginal revenue of a first unit
/// of effort, T·φ′(0)/r, against the marginal cost c′(0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryPredicate {
    pub marginal_at_zero: f64,
    pub marginal_cost_at_zero: f64,
    /// Only this structure can be Nash stable.
    pub predicts: PredictedStructure,
    /// Set when r = 0: entry is always profitable and the comparison is trivial.
    pub degenerate: bool,
}

pub fn entry_predicate(game: &Game) -> EntryPredicate {
    let r = game.r();
    let d0 = game.tech.d1(0.0);
    let m0 = if r == 0.0 {
        f64::INFINITY
    } else {
        game.transfer() * d0 / r
    };
    let c0 = game.cost.d1(0.0);
    EntryPredicate {
        marginal_at_zero: m0,
        marginal_cost_at_zero: c0,
        predicts: if m0 <= c0 {
            PredictedStructure::Empty
        } else {
            PredictedStructure::Complete
        },
        degenerate: r == 0.0,
    }
}

fn row_with(s: &StrategyProfile, i: usize, row: &[f64]) -> StrategyProfile {
    let mut t = s.clone();
    for (j, &x) in row.iter().enumerate() {
        if j != i {
            t.set(i, j, x);
        }
    }
    t
}

/// Best response of `i` over the given targets, other rows fixed.
fn best_row(s: &StrategyProfile, i: usize, targets: &[usize], game: &Game) -> Vec<f64> {
    let opp: Vec<f64> = targets.iter().map(|&j| s.get(j, i)).collect();
    let ones = vec![1.0; targets.len()];
    let x = best_response_block(game, game.cost_multiplier(i), &opp, &ones, 0.0, s.total(i));
    let mut row = vec![0.0; s.n()];
    for (k, &j) in targets.iter().enumerate() {
        row[j] = x[k];
    }
    row
}

/// No player gains by re-optimising her whole row against every other
/// player, all other efforts fixed.
pub fn check_nash(s: &StrategyProfile, game: &Game, tol: f64) -> Result<StabilityReport> {
    game.validate()?;
    let n = s.n();
    let g = s.induced_structure();
    let found: Vec<Option<DeviationCertificate>> = pool().install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let targets: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                let row = best_row(s, i, &targets, game);
                let before = payoff_unchecked(i, s, game);
                let after = payoff_unchecked(i, &row_with(s, i, &row), game);
                (after - before > tol).then(|| DeviationCertificate {
                    kind: DeviationKind::Unilateral,
                    deviators: vec![i],
                    removed_links: Vec::new(),
                    added: vec![targets.iter().copied().filter(|&j| !g.has_edge(i, j) && row[j] > 0.0).collect()],
                    rows: vec![row],
                    replies: vec![Vec::new()],
                    payoff_before: vec![before],
                    payoff_after: vec![after],
                })
            })
            .collect()
    });
    let certificate = found.into_iter().flatten().next();
    Ok(StabilityReport {
        concept: Concept::Nash,
        verdict: if certificate.is_some() {
            Verdict::Unstable
        } else {
            Verdict::Stable
        },
        certificate,
        search_family: None,
        predicate: Some(entry_predicate(game)),
        note: None,
    })
}

/// Nash stability plus: no linked pair both gains strictly from ending
/// their contest, either keeping all other efforts or re-optimising their
/// remaining contests.
pub fn check_strong_pairwise(s: &StrategyProfile, game: &Game, tol: f64) -> Result<StabilityReport> {
    let nash = check_nash(s, game, tol)?;
    let predicate = nash.predicate;
    if !nash.is_stable() {
        return Ok(StabilityReport {
            concept: Concept::StrongPairwise,
            note: Some("fails the Nash prerequisite".into()),
            ..nash
        });
    }
    let g = s.induced_structure();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let found: Vec<Option<DeviationCertificate>> = pool().install(|| {
        edges
            .par_iter()
            .map(|&(i, j)| {
                let before = [payoff_unchecked(i, s, game), payoff_unchecked(j, s, game)];
                let mut severed = s.clone();
                severed.set(i, j, 0.0);
                severed.set(j, i, 0.0);
                let plain = [severed.row(i).to_vec(), severed.row(j).to_vec()];
                let keep_i: Vec<usize> = g.neighbors(i).iter().copied().filter(|&k| k != j).collect();
                let keep_j: Vec<usize> = g.neighbors(j).iter().copied().filter(|&k| k != i).collect();
                let reopt = [best_row(&severed, i, &keep_i, game), best_row(&severed, j, &keep_j, game)];
                for rows in [plain, reopt] {
                    let mut t = row_with(s, i, &rows[0]);
                    t = row_with(&t, j, &rows[1]);
                    let after = [payoff_unchecked(i, &t, game), payoff_unchecked(j, &t, game)];
                    if after[0] - before[0] > tol && after[1] - before[1] > tol {
                        let [ri, rj] = rows;
                        return Some(DeviationCertificate {
                            kind: DeviationKind::Bilateral,
                            deviators: vec![i, j],
                            removed_links: vec![(i, j)],
                            added: vec![Vec::new(), Vec::new()],
                            rows: vec![ri, rj],
                            replies: vec![Vec::new(), Vec::new()],
                            payoff_before: before.to_vec(),
                            payoff_after: after.to_vec(),
                        });
                    }
                }
                None
            })
            .collect()
    });
    let certificate = found.into_iter().flatten().next();
    Ok(StabilityReport {
        concept: Concept::StrongPairwise,
        verdict: if certificate.is_some() {
            Verdict::Unstable
        } else {
            Verdict::Stable
        },
        certificate,
        search_family: None,
        predicate,
        note: None,
    })
}
