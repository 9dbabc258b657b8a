use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{payoffs, Game, Structure};
use crate::solver::{solve_equilibrium, SolveOptions};

/// Largest population for the farsighted search.
pub const MAX_FARSIGHTED_N: usize = 4;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Representative of the isomorphism class of `g`: the relabelling with the
/// smallest edge mask.
pub fn canonical_form(g: &Structure) -> Structure {
    let n = g.n();
    let mask = permutations(n)
        .iter()
        .map(|p| g.permuted(p).edge_mask())
        .min()
        .unwrap_or(0);
    Structure::from_edge_mask(n, mask)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarsightedClass {
    pub edges: Vec<(usize, usize)>,
    /// Equilibrium payoffs on the representative.
    pub payoffs: Vec<f64>,
    /// Representatives (by index into the report) reachable by an improving path.
    pub reachable: Vec<usize>,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarsightedReport {
    pub n: usize,
    pub classes: Vec<FarsightedClass>,
}

impl FarsightedReport {
    pub fn stable_structures(&self) -> Vec<Structure> {
        self.classes
            .iter()
            .filter(|c| c.stable)
            .map(|c| Structure::new(self.n, &c.edges).expect("valid representative"))
            .collect()
    }
}

/// One step of an improving path: the next structure and who must gain.
struct Move {
    next: u64,
    /// `(i, None)` for a unilateral addition, `(i, Some(j))` for deletion of `ij`.
    movers: (usize, Option<usize>),
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0..1u32 << items.len())
        .map(|b| (0..items.len()).filter(|k| b >> k & 1 == 1).map(|k| items[k]).collect())
        .collect()
}

fn moves(g: &Structure) -> Vec<Move> {
    let n = g.n();
    let mut out = Vec::new();
    for i in 0..n {
        for set in subsets(&g.non_neighbors(i)).into_iter().skip(1) {
            let mut h = g.clone();
            for l in set {
                h = h.with_edge(i, l);
            }
            out.push(Move {
                next: h.edge_mask(),
                movers: (i, None),
            });
        }
    }
    for (i, j) in g.edges() {
        let cut = g.without_edge(i, j);
        let free = |a: usize, b: usize| -> Vec<usize> { cut.non_neighbors(a).into_iter().filter(|&l| l != b).collect() };
        let (fi, fj) = (free(i, j), free(j, i));
        for li in subsets(&fi) {
            for lj in subsets(&fj) {
                let mut h = cut.clone();
                for &l in &li {
                    h = h.with_edge(i, l);
                }
                for &l in &lj {
                    h = h.with_edge(j, l);
                }
                out.push(Move {
                    next: h.edge_mask(),
                    movers: (i, Some(j)),
                });
            }
        }
    }
    out
}

/// Structures with no farsightedly improving path, up to isomorphism.
///
/// A path step either adds links of one player, who must end strictly better
/// off at the path's last structure, or deletes a link and adds links of
/// its two ends, one of whom ends strictly better off and the other weakly.
/// Payoffs are equilibrium payoffs; gains within `tol` count as zero.
pub fn farsighted_stable_set(n: usize, game: &Game, opts: &SolveOptions, tol: f64) -> Result<FarsightedReport> {
    if !(2..=MAX_FARSIGHTED_N).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "farsighted search supports 2 <= n <= {MAX_FARSIGHTED_N}, got {n}"
        )));
    }
    game.validate()?;
    let count = 1u64 << (n * (n - 1) / 2);
    let graphs: Vec<Structure> = (0..count).map(|m| Structure::from_edge_mask(n, m)).collect();
    let mut pi = Vec::with_capacity(graphs.len());
    for g in &graphs {
        let eq = solve_equilibrium(g, game, opts)?;
        pi.push(payoffs(&eq.profile, game));
    }
    let all_moves: Vec<Vec<Move>> = graphs.iter().map(moves).collect();
    let gains = |from: usize, to: usize, i: usize| pi[to][i] - pi[from][i];
    // reach[g][k]: some improving path runs from g to k.
    let mut reach = vec![vec![false; graphs.len()]; graphs.len()];
    for k in 0..graphs.len() {
        let allowed = |g: usize, m: &Move| match m.movers {
            (i, None) => gains(g, k, i) > tol,
            (i, Some(j)) => {
                (gains(g, k, i) > tol && gains(g, k, j) >= -tol) || (gains(g, k, j) > tol && gains(g, k, i) >= -tol)
            }
        };
        let mut hits = vec![false; graphs.len()];
        loop {
            let mut changed = false;
            for g in 0..graphs.len() {
                if hits[g] {
                    continue;
                }
                if all_moves[g]
                    .iter()
                    .any(|m| allowed(g, m) && (m.next as usize == k || hits[m.next as usize]))
                {
                    hits[g] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for g in 0..graphs.len() {
            reach[g][k] = hits[g];
        }
    }
    let canon: Vec<u64> = graphs.iter().map(|g| canonical_form(g).edge_mask()).collect();
    let mut index: BTreeMap<u64, usize> = BTreeMap::new();
    for &c in &canon {
        let len = index.len();
        index.entry(c).or_insert(len);
    }
    let mut reps: Vec<u64> = index.keys().copied().collect();
    reps.sort_by_key(|&m| (m.count_ones(), m));
    let position: BTreeMap<u64, usize> = reps.iter().enumerate().map(|(k, &m)| (m, k)).collect();
    let classes = reps
        .iter()
        .map(|&m| {
            let g = m as usize;
            let mut reachable: Vec<usize> = (0..graphs.len())
                .filter(|&k| reach[g][k])
                .map(|k| position[&canon[k]])
                .collect();
            reachable.sort_unstable();
            reachable.dedup();
            FarsightedClass {
                edges: graphs[g].edges().collect(),
                payoffs: pi[g].clone(),
                stable: reachable.is_empty(),
                reachable,
            }
        })
        .collect();
    Ok(FarsightedReport { n, classes })
}
