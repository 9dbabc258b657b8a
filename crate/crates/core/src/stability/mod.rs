//! Stability of contest structures: Nash, strong pairwise and
//! limited-farsighted pairwise stability, plus the strength-class partition.

mod deviation;
mod lfps;
mod nash;
mod partition;

use serde::{Deserialize, Serialize};

use crate::model::{payoff_unchecked, Game, StrategyProfile};

pub use lfps::{check_lfps, SearchConfig};
pub(crate) use lfps::pair_revision;
pub use nash::{check_nash, check_strong_pairwise, entry_predicate, EntryPredicate, PredictedStructure};
pub use partition::{classify_partition, validate_mpartite, ClassPartition, MpartiteVerdict, PartitionClass, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Concept {
    Nash,
    StrongPairwise,
    Lfps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    /// The checked profile fails and no structure can pass under these primitives.
    NonexistentByTheory,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    Unilateral,
    Bilateral,
}

/// Replies of a newly attacked player to one deviator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub target: usize,
    pub effort: f64,
}

/// A profitable deviation, replayable against the profile it deviates from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationCertificate {
    pub kind: DeviationKind,
    pub deviators: Vec<usize>,
    pub removed_links: Vec<(usize, usize)>,
    /// New targets of each deviator.
    pub added: Vec<Vec<usize>>,
    /// Full effort row of each deviator after the deviation.
    pub rows: Vec<Vec<f64>>,
    /// Anticipated replies of the new targets, per deviator.
    pub replies: Vec<Vec<Reply>>,
    pub payoff_before: Vec<f64>,
    pub payoff_after: Vec<f64>,
}

impl DeviationCertificate {
    /// Profile after the deviation: deviator rows replaced, replies written
    /// into the targets' entries against the deviator.
    pub fn deviated_profile(&self, base: &StrategyProfile) -> StrategyProfile {
        let mut s = base.clone();
        for (k, &i) in self.deviators.iter().enumerate() {
            for (j, &x) in self.rows[k].iter().enumerate() {
                if j != i {
                    s.set(i, j, x);
                }
            }
            for rep in &self.replies[k] {
                s.set(rep.target, i, rep.effort);
            }
        }
        s
    }

    /// Re-evaluates the deviators' payoffs from scratch.
    pub fn replay(&self, base: &StrategyProfile, game: &Game) -> (Vec<f64>, Vec<f64>) {
        let dev = self.deviated_profile(base);
        let before = self.deviators.iter().map(|&i| payoff_unchecked(i, base, game)).collect();
        let after = self.deviators.iter().map(|&i| payoff_unchecked(i, &dev, game)).collect();
        (before, after)
    }

    /// Largest discrepancy between recorded and replayed payoffs.
    pub fn replay_error(&self, base: &StrategyProfile, game: &Game) -> f64 {
        let (b, a) = self.replay(base, game);
        b.iter()
            .zip(&self.payoff_before)
            .chain(a.iter().zip(&self.payoff_after))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn gains(&self) -> Vec<f64> {
        self.payoff_after
            .iter()
            .zip(&self.payoff_before)
            .map(|(a, b)| a - b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub concept: Concept,
    pub verdict: Verdict,
    pub certificate: Option<DeviationCertificate>,
    /// Deviation family searched; stable verdicts are sound relative to it.
    pub search_family: Option<String>,
    pub predicate: Option<EntryPredicate>,
    pub note: Option<String>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.verdict == Verdict::Stable
    }
}
