use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Structure;
use crate::solver::EquilibriumResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Every opponent is in a weaker class (larger total effort).
    Attacker,
    /// Opponents in both weaker and stronger classes.
    Hybrid,
    /// Every opponent is in a stronger class (smaller total effort).
    Victim,
    /// No contests.
    Isolated,
    /// Fights at least one equally strong player and no hybrid pattern.
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionClass {
    pub total: f64,
    pub members: Vec<usize>,
}

/// Players grouped by equilibrium total effort in ascending order, so the
/// strongest class (smallest total) comes first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPartition {
    pub classes: Vec<PartitionClass>,
    pub roles: Vec<Role>,
    pub tolerance: f64,
}

impl ClassPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.members.len()).collect()
    }

    /// Class index of every player.
    pub fn labels(&self) -> Vec<usize> {
        let n = self.roles.len();
        let mut out = vec![0; n];
        for (k, c) in self.classes.iter().enumerate() {
            for &i in &c.members {
                out[i] = k;
            }
        }
        out
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()) + 1e-14
}

/// Groups players into strength classes and assigns roles.
pub fn classify_partition(eq: &EquilibriumResult, tol_rel: f64) -> Result<ClassPartition> {
    if !(tol_rel.is_finite() && tol_rel >= 0.0) {
        return Err(Error::InvalidParameter(format!("grouping tolerance must be >= 0, got {tol_rel}")));
    }
    let w = &eq.totals;
    let n = w.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(a.cmp(&b)));
    let mut classes: Vec<PartitionClass> = Vec::new();
    for &i in &order {
        match classes.last_mut() {
            Some(c) if close(w[*c.members.last().unwrap()], w[i], tol_rel) => {
                if !close(w[c.members[0]], w[i], tol_rel) {
                    return Err(Error::AmbiguousPartition(format!(
                        "totals {} and {} are chained within tolerance {tol_rel} but differ beyond it",
                        w[c.members[0]], w[i]
                    )));
                }
                c.members.push(i);
            }
            _ => classes.push(PartitionClass {
                total: w[i],
                members: vec![i],
            }),
        }
    }
    for c in &mut classes {
        c.total = c.members.iter().map(|&i| w[i]).sum::<f64>() / c.members.len() as f64;
        c.members.sort_unstable();
    }
    let mut label = vec![0usize; n];
    for (k, c) in classes.iter().enumerate() {
        for &i in &c.members {
            label[i] = k;
        }
    }
    let g = eq.profile.induced_structure();
    let roles = (0..n)
        .map(|i| {
            let nb = g.neighbors(i);
            if nb.is_empty() {
                return Role::Isolated;
            }
            let stronger = nb.iter().any(|&j| label[j] < label[i]);
            let weaker = nb.iter().any(|&j| label[j] > label[i]);
            let equal = nb.iter().any(|&j| label[j] == label[i]);
            match (weaker, stronger, equal) {
                (true, true, _) => Role::Hybrid,
                (true, false, false) => Role::Attacker,
                (false, true, false) => Role::Victim,
                _ => Role::Unassigned,
            }
        })
        .collect();
    Ok(ClassPartition {
        classes,
        roles,
        tolerance: tol_rel,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpartiteVerdict {
    pub passes: bool,
    pub violations: Vec<String>,
}

/// Whether `g` is complete multipartite over the strength classes with
/// strictly shrinking class sizes, one attacker class and one victim class.
/// The empty structure passes.
pub fn validate_mpartite(p: &ClassPartition, g: &Structure) -> MpartiteVerdict {
    let mut violations = Vec::new();
    if g.is_empty() {
        return MpartiteVerdict {
            passes: true,
            violations,
        };
    }
    let label = p.labels();
    let n = g.n();
    let mut intra = 0;
    let mut missing = 0;
    for i in 0..n {
        for j in i + 1..n {
            let same = label[i] == label[j];
            let linked = g.has_edge(i, j);
            if same && linked {
                intra += 1;
            }
            if !same && !linked {
                missing += 1;
            }
        }
    }
    if intra > 0 {
        violations.push(format!("{intra} contest(s) inside a strength class"));
    }
    if missing > 0 {
        violations.push(format!("{missing} pair(s) in different classes without a contest"));
    }
    let sizes = p.sizes();
    if sizes.windows(2).any(|s| s[0] <= s[1]) {
        violations.push(format!("class sizes {sizes:?} are not strictly decreasing"));
    }
    let m = p.classes.len();
    let all = |k: usize, role: Role| p.classes[k].members.iter().all(|&i| p.roles[i] == role);
    let attacker_classes = (0..m)
        .filter(|&k| p.classes[k].members.iter().any(|&i| p.roles[i] == Role::Attacker))
        .count();
    let victim_classes = (0..m)
        .filter(|&k| p.classes[k].members.iter().any(|&i| p.roles[i] == Role::Victim))
        .count();
    if !(attacker_classes == 1 && all(0, Role::Attacker)) {
        violations.push("first class is not the unique class of attackers".into());
    }
    if !(victim_classes == 1 && all(m - 1, Role::Victim)) {
        violations.push("last class is not the unique class of victims".into());
    }
    MpartiteVerdict {
        passes: violations.is_empty(),
        violations,
    }
}
