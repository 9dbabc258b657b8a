use std::collections::BTreeMap;

use rayon::prelude::*;

use super::deviation::{DeviationOutcome, DeviationProblem, NewTarget};
use super::{Concept, DeviationCertificate, DeviationKind, Reply, StabilityReport, Verdict};
use crate::error::Result;
use crate::model::{payoff_unchecked, Game, StrategyProfile, Structure};
use crate::parallel::pool;
use crate::solver::{solve_equilibrium, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Gains below this are treated as zero.
    pub tol: f64,
    /// Non-neighbour count up to which every subset is searched.
    pub exhaustive_limit: usize,
    /// Number of distinct target-strength multisets searched exhaustively
    /// even beyond `exhaustive_limit`.
    pub multiset_limit: usize,
    /// Grid resolution of the one-dimensional search against a replying target.
    pub grid_points: usize,
    pub solve: SolveOptions,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            tol: 1e-9,
            exhaustive_limit: 12,
            multiset_limit: 4096,
            grid_points: 80,
            solve: SolveOptions::default(),
        }
    }
}

/// Candidate sets of new targets for one player. Targets with equal
/// equilibrium totals and cost are interchangeable, so only one subset per
/// multiset of strengths is generated. Returns `false` when the family had
/// to fall back to weakest-first chains.
fn candidate_sets(fi: &[usize], w: &[f64], game: &Game, cfg: &SearchConfig) -> (Vec<Vec<usize>>, bool) {
    let mut groups: BTreeMap<(i64, u64), Vec<usize>> = BTreeMap::new();
    for &j in fi {
        let key = ((w[j] * 1e9).round() as i64, game.cost_multiplier(j).to_bits());
        groups.entry(key).or_default().push(j);
    }
    let groups: Vec<Vec<usize>> = groups.into_values().collect();
    let count = groups
        .iter()
        .try_fold(1usize, |acc, g| acc.checked_mul(g.len() + 1))
        .unwrap_or(usize::MAX);
    if fi.len() <= cfg.exhaustive_limit || count <= cfg.multiset_limit {
        let mut out = Vec::with_capacity(count);
        let mut digits = vec![0usize; groups.len()];
        loop {
            let set: Vec<usize> = groups
                .iter()
                .zip(&digits)
                .flat_map(|(g, &c)| g[..c].iter().copied())
                .collect();
            out.push(set);
            let mut k = 0;
            loop {
                if k == digits.len() {
                    return (out, true);
                }
                digits[k] += 1;
                if digits[k] <= groups[k].len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
        }
    }
    let mut order = fi.to_vec();
    order.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(a.cmp(&b)));
    ((0..=order.len()).map(|t| order[..t].to_vec()).collect(), false)
}

struct BestDeviation {
    targets: Vec<NewTargetRecord>,
    kept: Vec<usize>,
    outcome: DeviationOutcome,
}

struct NewTargetRecord {
    player: usize,
}

fn best_deviation(
    i: usize,
    kept: Vec<usize>,
    fi: &[usize],
    s: &StrategyProfile,
    w: &[f64],
    game: &Game,
    cfg: &SearchConfig,
) -> Result<(BestDeviation, bool)> {
    let (sets, exhaustive) = candidate_sets(fi, w, game, cfg);
    let kept_pairs: Vec<(usize, f64)> = kept.iter().map(|&k| (k, s.get(k, i))).collect();
    let mut best: Option<BestDeviation> = None;
    for set in sets {
        let problem = DeviationProblem {
            game,
            cost_mult: game.cost_multiplier(i),
            kept: kept_pairs.clone(),
            new: set
                .iter()
                .map(|&j| NewTarget {
                    player: j,
                    total: w[j],
                    cost_mult: game.cost_multiplier(j),
                })
                .collect(),
            grid_points: cfg.grid_points,
        };
        let outcome = problem.solve()?;
        if best.as_ref().is_none_or(|b| outcome.payoff > b.outcome.payoff) {
            best = Some(BestDeviation {
                targets: problem.new.iter().map(|t| NewTargetRecord { player: t.player }).collect(),
                kept: kept.clone(),
                outcome,
            });
        }
    }
    Ok((best.expect("candidate family contains the empty set"), exhaustive))
}

fn record(i: usize, n: usize, dev: &BestDeviation) -> (Vec<usize>, Vec<f64>, Vec<Reply>) {
    let mut row = vec![0.0; n];
    for (k, &j) in dev.kept.iter().enumerate() {
        row[j] = dev.outcome.kept_efforts[k];
    }
    let mut added = Vec::new();
    let mut replies = Vec::new();
    for (k, t) in dev.targets.iter().enumerate() {
        let (x, y) = (dev.outcome.new_efforts[k], dev.outcome.replies[k]);
        row[t.player] = x;
        if x > 0.0 || y > 0.0 {
            added.push(t.player);
            replies.push(Reply {
                target: t.player,
                effort: y,
            });
        }
    }
    debug_assert_eq!(row[i], 0.0);
    (added, row, replies)
}

fn family_note(all_exhaustive: bool, cfg: &SearchConfig) -> String {
    if all_exhaustive {
        "exhaustive: every set of new targets, up to interchangeable equal-strength targets".into()
    } else {
        format!(
            "mixed: exhaustive up to equal-strength targets where a player has at most {} non-neighbours \
             or at most {} strength multisets; weakest-first chains otherwise",
            cfg.exhaustive_limit, cfg.multiset_limit
        )
    }
}

/// Most profitable unilateral deviation of `i` if it gains more than the
/// tolerance, plus whether the search family was exhaustive.
fn unilateral_certificate(
    i: usize,
    s: &StrategyProfile,
    gs: &Structure,
    w: &[f64],
    base: &[f64],
    game: &Game,
    cfg: &SearchConfig,
) -> Result<(Option<DeviationCertificate>, bool)> {
    let (dev, exh) = best_deviation(i, gs.neighbors(i).to_vec(), &gs.non_neighbors(i), s, w, game, cfg)?;
    if dev.outcome.payoff - base[i] <= cfg.tol {
        return Ok((None, exh));
    }
    let (added, row, replies) = record(i, s.n(), &dev);
    Ok((
        Some(DeviationCertificate {
            kind: DeviationKind::Unilateral,
            deviators: vec![i],
            removed_links: Vec::new(),
            added: vec![added],
            rows: vec![row],
            replies: vec![replies],
            payoff_before: vec![base[i]],
            payoff_after: vec![dev.outcome.payoff],
        }),
        exh,
    ))
}

/// Joint deletion of contest `ij`, with optional new links on both sides
/// when `rewire` is set. Once the contest is closed neither deviator's
/// payoff depends on the other's row, so the two sides are optimised apart.
#[allow(clippy::too_many_arguments)]
fn bilateral_certificate(
    i: usize,
    j: usize,
    s: &StrategyProfile,
    gs: &Structure,
    w: &[f64],
    base: &[f64],
    game: &Game,
    cfg: &SearchConfig,
    rewire: bool,
) -> Result<Option<DeviationCertificate>> {
    let n = s.n();
    let side = |a: usize, b: usize| {
        let kept: Vec<usize> = gs.neighbors(a).iter().copied().filter(|&k| k != b).collect();
        let fresh = if rewire { gs.non_neighbors(a) } else { Vec::new() };
        best_deviation(a, kept, &fresh, s, w, game, cfg).map(|x| x.0)
    };
    let di = side(i, j)?;
    let dj = side(j, i)?;
    let gi = di.outcome.payoff - base[i];
    let gj = dj.outcome.payoff - base[j];
    if !(gi >= -cfg.tol && gj >= -cfg.tol && gi.max(gj) > cfg.tol) {
        return Ok(None);
    }
    let (ai, ri, pi) = record(i, n, &di);
    let (aj, rj, pj) = record(j, n, &dj);
    Ok(Some(DeviationCertificate {
        kind: DeviationKind::Bilateral,
        deviators: vec![i, j],
        removed_links: vec![(i, j)],
        added: vec![ai, aj],
        rows: vec![ri, rj],
        replies: vec![pi, pj],
        payoff_before: vec![base[i], base[j]],
        payoff_after: vec![di.outcome.payoff, dj.outcome.payoff],
    }))
}

/// First profitable revision available to the pair `{i, j}` at equilibrium
/// profile `s`, checked in the order: plain deletion of their contest,
/// deletion combined with new links, `i`'s unilateral additions, `j`'s
/// unilateral additions. Within each step the best deviation is taken.
pub(crate) fn pair_revision(
    i: usize,
    j: usize,
    s: &StrategyProfile,
    game: &Game,
    cfg: &SearchConfig,
) -> Result<Option<DeviationCertificate>> {
    let gs = s.induced_structure();
    let w = s.totals();
    let base: Vec<f64> = (0..s.n()).map(|k| payoff_unchecked(k, s, game)).collect();
    if gs.has_edge(i, j) {
        for rewire in [false, true] {
            if let Some(c) = bilateral_certificate(i, j, s, &gs, &w, &base, game, cfg, rewire)? {
                return Ok(Some(c));
            }
        }
    }
    for k in [i, j] {
        if let (Some(c), _) = unilateral_certificate(k, s, &gs, &w, &base, game, cfg)? {
            if !c.added[0].is_empty() {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

/// Limited-farsighted pairwise stability of structure `g`.
///
/// Solves the equilibrium of `g`, then searches unilateral deviations (new
/// targets reply optimally given their equilibrium totals) and bilateral
/// link deletions combined with new links. The verdict is sound relative to
/// the searched family named in the report.
pub fn check_lfps(g: &Structure, game: &Game, cfg: &SearchConfig) -> Result<StabilityReport> {
    game.validate()?;
    let eq = match solve_equilibrium(g, game, &cfg.solve) {
        Ok(eq) => eq,
        Err(e) => {
            return Ok(StabilityReport {
                concept: Concept::Lfps,
                verdict: Verdict::Inconclusive,
                certificate: None,
                search_family: None,
                predicate: None,
                note: Some(format!("equilibrium solve failed: {e}")),
            })
        }
    };
    let s = eq.profile;
    check_lfps_at(&s, game, cfg)
}

/// Limited-farsighted pairwise stability of the structure induced by an
/// equilibrium profile `s`.
pub(crate) fn check_lfps_at(s: &StrategyProfile, game: &Game, cfg: &SearchConfig) -> Result<StabilityReport> {
    let n = s.n();
    let w = s.totals();
    let gs = s.induced_structure();
    let base: Vec<f64> = (0..n).map(|i| payoff_unchecked(i, s, game)).collect();
    let inconclusive = |e: crate::Error, family: Option<String>| StabilityReport {
        concept: Concept::Lfps,
        verdict: Verdict::Inconclusive,
        certificate: None,
        search_family: family,
        predicate: None,
        note: Some(format!("deviation search failed: {e}")),
    };

    // Condition (U).
    let unilateral: Vec<Result<(Option<DeviationCertificate>, bool)>> = pool().install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| unilateral_certificate(i, s, &gs, &w, &base, game, cfg))
            .collect()
    });
    let mut all_exhaustive = true;
    let mut cert = None;
    for res in unilateral {
        let (c, exh) = match res {
            Ok(x) => x,
            Err(e) => return Ok(inconclusive(e, None)),
        };
        all_exhaustive &= exh;
        if cert.is_none() {
            cert = c;
        }
    }
    if cert.is_some() {
        return Ok(StabilityReport {
            concept: Concept::Lfps,
            verdict: Verdict::Unstable,
            certificate: cert,
            search_family: Some(family_note(all_exhaustive, cfg)),
            predicate: None,
            note: Some("condition (U) violated".into()),
        });
    }

    // Condition (B).
    let edges: Vec<(usize, usize)> = gs.edges().collect();
    let bilateral: Vec<Result<Option<DeviationCertificate>>> = pool().install(|| {
        edges
            .par_iter()
            .map(|&(i, j)| bilateral_certificate(i, j, s, &gs, &w, &base, game, cfg, true))
            .collect()
    });
    let mut cert = None;
    for res in bilateral {
        match res {
            Ok(c) => {
                if cert.is_none() {
                    cert = c;
                }
            }
            Err(e) => return Ok(inconclusive(e, Some(family_note(all_exhaustive, cfg)))),
        }
    }
    let unstable = cert.is_some();
    Ok(StabilityReport {
        concept: Concept::Lfps,
        verdict: if unstable { Verdict::Unstable } else { Verdict::Stable },
        certificate: cert,
        search_family: Some(family_note(all_exhaustive, cfg)),
        predicate: None,
        note: unstable.then(|| "condition (B) violated".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolveOptions;

    #[test]
    fn candidate_sets_deduplicate_equal_strengths() {
        let w = [0.5, 0.5, 0.5, 1.0, 2.0];
        let game = Game::benchmark();
        let (sets, exh) = candidate_sets(&[0, 1, 2, 3], &w, &game, &SearchConfig::default());
        assert!(exh);
        // Four multisets of the equal targets times two choices for target 3.
        assert_eq!(sets.len(), 8);
        assert!(sets.contains(&Vec::new()));
    }

    #[test]
    fn candidate_sets_fall_back_to_chains() {
        let w: Vec<f64> = (0..20).map(|k| 1.0 + k as f64).collect();
        let fi: Vec<usize> = (0..20).collect();
        let (sets, exh) = candidate_sets(&fi, &w, &Game::benchmark(), &SearchConfig::default());
        assert!(!exh);
        assert_eq!(sets.len(), 21);
        assert_eq!(sets[2], vec![0, 1]);
    }

    #[test]
    fn star_on_three_unstable() {
        let game = Game::benchmark();
        let g = Structure::complete_bipartite(2, 1);
        let rep = check_lfps(&g, &game, &SearchConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Unstable);
        let s = solve_equilibrium(&g, &game, &SolveOptions::default()).unwrap().profile;
        assert!(rep.certificate.unwrap().replay_error(&s, &game) < 1e-9);
    }

    #[test]
    fn star_on_four_stable() {
        let rep = check_lfps(&Structure::complete_bipartite(3, 1), &Game::benchmark(), &SearchConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Stable, "{rep:?}");
        assert!(rep.search_family.unwrap().starts_with("exhaustive"));
    }

    #[test]
    fn complete_three_unstable_by_deletion() {
        let g = Structure::complete(3);
        let game = Game::benchmark();
        let rep = check_lfps(&g, &game, &SearchConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Unstable);
        let c = rep.certificate.unwrap();
        assert_eq!(c.kind, DeviationKind::Bilateral);
        let s = solve_equilibrium(&g, &game, &SolveOptions::default()).unwrap().profile;
        assert!(c.replay_error(&s, &game) < 1e-9);
    }

    #[test]
    fn empty_stable_at_zero_draw() {
        let rep = check_lfps(&Structure::empty(4), &Game::benchmark(), &SearchConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Stable);
    }
}
