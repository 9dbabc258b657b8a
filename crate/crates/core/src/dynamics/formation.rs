use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Game, Structure};
use crate::parallel::pool;
use crate::solver::{solve_equilibrium, EquilibriumResult};
use crate::stability::{pair_revision, DeviationCertificate, DeviationKind, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    /// A full sweep over all pairs finds no revision.
    Settled,
    BudgetExhausted,
    /// An equilibrium or deviation solve failed; the trajectory stops there.
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionEvent {
    pub pair: (usize, usize),
    /// `None` when the drawn pair had no profitable revision.
    pub kind: Option<DeviationKind>,
    pub deviators: Vec<usize>,
    pub removed: Vec<(usize, usize)>,
    pub added: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub period: usize,
    /// Absent for the initial state.
    pub event: Option<RevisionEvent>,
    pub edges: Vec<(usize, usize)>,
    pub efforts: Vec<Vec<f64>>,
    pub totals: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n: usize,
    pub seed: u64,
    pub records: Vec<PeriodRecord>,
    pub status: TerminalStatus,
    pub error: Option<String>,
}

impl Trajectory {
    pub fn final_structure(&self) -> Structure {
        let last = self.records.last().expect("trajectory has an initial state");
        Structure::new(self.n, &last.edges).expect("recorded edges are valid")
    }

    /// Periods in which the structure changed.
    pub fn revisions(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.event.as_ref().is_some_and(|e| e.kind.is_some()))
            .count()
    }

    /// Period of the last record.
    pub fn periods(&self) -> usize {
        self.records.last().map_or(0, |r| r.period)
    }

    /// One JSON object per period.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

fn record(period: usize, event: Option<RevisionEvent>, g: &Structure, eq: &EquilibriumResult) -> PeriodRecord {
    PeriodRecord {
        period,
        event,
        edges: g.edges().collect(),
        efforts: eq.profile.rows(),
        totals: eq.totals.clone(),
        residual: eq.residual,
    }
}

/// Structure after applying a revision certificate to `g`.
fn revised(g: &Structure, cert: &DeviationCertificate) -> (Structure, Vec<(usize, usize)>) {
    let mut out = g.clone();
    for &(i, j) in &cert.removed_links {
        out = out.without_edge(i, j);
    }
    let mut added = Vec::new();
    for (k, &i) in cert.deviators.iter().enumerate() {
        for &t in &cert.added[k] {
            if !out.has_edge(i, t) {
                out = out.with_edge(i, t);
                added.push((i.min(t), i.max(t)));
            }
        }
    }
    (out, added)
}

/// Pair revision that changes the structure, if any.
fn structural_revision(
    i: usize,
    j: usize,
    g: &Structure,
    eq: &EquilibriumResult,
    game: &Game,
    cfg: &SearchConfig,
) -> Result<Option<(Structure, RevisionEvent)>> {
    let Some(cert) = pair_revision(i, j, &eq.profile, game, cfg)? else {
        return Ok(None);
    };
    let (next, added) = revised(g, &cert);
    if next == *g {
        return Ok(None);
    }
    Ok(Some((
        next,
        RevisionEvent {
            pair: (i, j),
            kind: Some(cert.kind),
            deviators: cert.deviators.clone(),
            removed: cert.removed_links.clone(),
            added,
        },
    )))
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Whether no pair has a structural revision.
fn settled(g: &Structure, eq: &EquilibriumResult, game: &Game, cfg: &SearchConfig) -> Result<bool> {
    let pairs = all_pairs(g.n());
    let found: Vec<Result<bool>> = pool().install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| structural_revision(i, j, g, eq, game, cfg).map(|r| r.is_some()))
            .collect()
    });
    for f in found {
        if f? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Random pair revisions starting from `g0`.
///
/// Each period draws an unordered pair uniformly. The pair checks, in
/// order, plainly deleting their contest, deleting it while opening new
/// contests on either side, then the first player's unilateral additions,
/// then the second's; the first profitable revision is applied and the
/// equilibrium re-solved. The
/// run stops as soon as a deterministic sweep over every pair finds no
/// revision, or after `periods` draws.
pub fn simulate_formation(g0: &Structure, game: &Game, periods: usize, seed: u64, cfg: &SearchConfig) -> Result<Trajectory> {
    if periods == 0 {
        return Err(Error::InvalidParameter("periods must be >= 1".into()));
    }
    let n = g0.n();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 players, got {n}")));
    }
    game.validate()?;
    let pairs = all_pairs(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traj = Trajectory {
        n,
        seed,
        records: Vec::new(),
        status: TerminalStatus::BudgetExhausted,
        error: None,
    };
    let abort = |mut t: Trajectory, e: Error| {
        t.status = TerminalStatus::Aborted;
        t.error = Some(e.to_string());
        t
    };
    let mut eq = match solve_equilibrium(g0, game, &cfg.solve) {
        Ok(eq) => eq,
        Err(e) => return Ok(abort(traj, e)),
    };
    let mut g = eq.profile.induced_structure();
    traj.records.push(record(0, None, &g, &eq));
    match settled(&g, &eq, game, cfg) {
        Ok(true) => {
            traj.status = TerminalStatus::Settled;
            return Ok(traj);
        }
        Ok(false) => {}
        Err(e) => return Ok(abort(traj, e)),
    }
    for period in 1..=periods {
        let (i, j) = pairs[rng.random_range(0..pairs.len())];
        let rev = match structural_revision(i, j, &g, &eq, game, cfg) {
            Ok(r) => r,
            Err(e) => return Ok(abort(traj, e)),
        };
        let Some((next, event)) = rev else {
            let idle = RevisionEvent {
                pair: (i, j),
                kind: None,
                deviators: Vec::new(),
                removed: Vec::new(),
                added: Vec::new(),
            };
            traj.records.push(record(period, Some(idle), &g, &eq));
            continue;
        };
        eq = match solve_equilibrium(&next, game, &cfg.solve) {
            Ok(eq) => eq,
            Err(e) => return Ok(abort(traj, e)),
        };
        g = eq.profile.induced_structure();
        traj.records.push(record(period, Some(event), &g, &eq));
        match settled(&g, &eq, game, cfg) {
            Ok(true) => {
                traj.status = TerminalStatus::Settled;
                return Ok(traj);
            }
            Ok(false) => {}
            Err(e) => return Ok(abort(traj, e)),
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_bipartite_settles_at_once() {
        let g = Structure::complete_bipartite(10, 2);
        let t = simulate_formation(&g, &Game::benchmark(), 5, 1, &SearchConfig::default()).unwrap();
        assert_eq!(t.status, TerminalStatus::Settled);
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.final_structure(), g);
    }

    #[test]
    fn empty_three_stays_empty() {
        let g = Structure::empty(3);
        let t = simulate_formation(&g, &Game::benchmark(), 5, 7, &SearchConfig::default()).unwrap();
        assert_eq!(t.status, TerminalStatus::Settled);
        assert!(t.final_structure().is_empty());
    }

    #[test]
    fn complete_three_ends_empty() {
        let g = Structure::complete(3);
        for seed in 0..20 {
            let t = simulate_formation(&g, &Game::benchmark(), 200, seed, &SearchConfig::default()).unwrap();
            assert_eq!(t.status, TerminalStatus::Settled, "seed {seed}");
            assert!(t.final_structure().is_empty());
            // Every structural change revises a single pair.
            for r in t.records.iter().skip(1) {
                let e = r.event.as_ref().unwrap();
                assert!(e.removed.len() + e.added.len() <= 3);
            }
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let g = Structure::complete(4);
        let cfg = SearchConfig::default();
        let a = simulate_formation(&g, &Game::benchmark(), 6, 42, &cfg).unwrap();
        let b = simulate_formation(&g, &Game::benchmark(), 6, 42, &cfg).unwrap();
        assert_eq!(a.to_json_lines(), b.to_json_lines());
    }

    #[test]
    fn zero_periods_rejected() {
        assert!(simulate_formation(&Structure::empty(3), &Game::benchmark(), 0, 0, &SearchConfig::default()).is_err());
    }
}
