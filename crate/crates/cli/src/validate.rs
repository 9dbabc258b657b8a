//! Invariant suite behind `contestnet validate`.

use std::fmt;

use anyhow::Result;
use serde::Serialize;

use contestnet::model::{payoffs, Game, Scenario, Structure};
use contestnet::solver::{solve_equilibrium, EquilibriumResult, Method, SolveOptions};
use contestnet::stability::{
    check_lfps, check_nash, check_strong_pairwise, classify_partition, validate_mpartite, SearchConfig, StabilityReport,
};

use crate::commands::solve_scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The property does not apply to this scenario.
    Skip,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    KktResidual,
    Support,
    StrengthOrdering,
    MethodAgreement,
    SeedUniqueness,
    WelfareIdentity,
    JsonReplay,
    PartitionReduction,
    NestedNeighborhoods,
    WeakestTargets,
    CertificateReplay,
    LfpsIsMultipartite,
    SpsImpliesNash,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub property: Property,
    pub status: Status,
    pub detail: String,
}

fn check(property: Property, ok: bool, detail: String) -> Check {
    Check {
        property,
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn skip(property: Property, why: &str) -> Check {
    Check {
        property,
        status: Status::Skip,
        detail: why.to_string(),
    }
}

/// Largest gap between two equilibria, or the solver error.
fn agreement(a: &EquilibriumResult, other: contestnet::Result<EquilibriumResult>) -> std::result::Result<f64, String> {
    other.map(|b| a.profile.max_abs_diff(&b.profile)).map_err(|e| e.to_string())
}

fn agreement_check(property: Property, eq: &EquilibriumResult, runs: Vec<(String, contestnet::Result<EquilibriumResult>)>) -> Check {
    let mut worst = 0.0f64;
    for (label, run) in runs {
        match agreement(eq, run) {
            Ok(d) => worst = worst.max(d),
            Err(e) => return check(property, false, format!("{label}: {e}")),
        }
    }
    check(property, worst <= 1e-6, format!("max |Δs| = {worst:.3e}"))
}

/// A strictly smaller neighbourhood means strictly lower total spending.
fn nested(g: &Structure, w: &[f64]) -> Option<String> {
    let n = g.n();
    for i in 0..n {
        for j in 0..n {
            let (ni, nj) = (g.neighbors(i), g.neighbors(j));
            if i != j && ni.len() < nj.len() && ni.iter().all(|k| nj.contains(k)) && w[i] >= w[j] {
                return Some(format!("N_{i} inside N_{j} but w_{i} = {} >= w_{j} = {}", w[i], w[j]));
            }
        }
    }
    None
}

/// A player who fights a weaker j also fights every k at least as weak as j.
fn weakest_targets(g: &Structure, w: &[f64], tol: f64) -> Option<String> {
    let n = g.n();
    for i in 0..n {
        for &j in g.neighbors(i) {
            if w[i] >= w[j] - tol {
                continue;
            }
            for k in 0..n {
                if k != i && k != j && w[k] >= w[j] - tol && !g.has_edge(i, k) {
                    return Some(format!("{i} fights {j} but not the weaker {k}"));
                }
            }
        }
    }
    None
}

fn certificate_error(r: &StabilityReport, eq: &EquilibriumResult, game: &Game) -> f64 {
    r.certificate.as_ref().map_or(0.0, |c| c.replay_error(&eq.profile, game))
}

pub fn run_all(sc: &Scenario, opts: &SolveOptions, cfg: &SearchConfig) -> Result<Vec<Check>> {
    let game = sc.game()?;
    let g = sc.structure()?;
    let eq = solve_scenario(sc, opts)?;
    let n = sc.n;
    let w = &eq.totals;
    let mut out = Vec::new();

    out.push(check(
        Property::KktResidual,
        eq.residual <= opts.tol,
        format!("residual {:.3e} (tol {:.1e})", eq.residual, opts.tol),
    ));

    let stray = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| i != j && !g.has_edge(i, j) && eq.profile.get(i, j) != 0.0);
    out.push(match stray {
        Some((i, j)) => check(Property::Support, false, format!("s[{i}][{j}] = {} without a contest", eq.profile.get(i, j))),
        None => check(Property::Support, true, "efforts only on contests".into()),
    });

    // In an interior contest the side with the lower marginal cost invests more.
    let mut worst = 0.0f64;
    for l in eq.links.iter().filter(|l| l.interior) {
        let (i, j) = (l.i, l.j);
        let gap = game.marginal_cost_of(i, w[i]) - game.marginal_cost_of(j, w[j]);
        let diff = eq.profile.get(i, j) - eq.profile.get(j, i);
        if gap.abs() > 1e-7 {
            worst = worst.max(gap.signum() * diff);
        }
    }
    out.push(check(
        Property::StrengthOrdering,
        worst <= 1e-8,
        format!("largest reversed gap {worst:.3e}"),
    ));

    let methods = [Method::Newton, Method::BestResponse, Method::GradientFlow];
    out.push(agreement_check(
        Property::MethodAgreement,
        &eq,
        methods
            .iter()
            .map(|&m| (m.to_string(), solve_equilibrium(&g, &game, &opts.with_method(m))))
            .collect(),
    ));

    out.push(agreement_check(
        Property::SeedUniqueness,
        &eq,
        (0..5u64)
            .map(|s| (format!("seed {s}"), solve_equilibrium(&g, &game, &opts.with_seed(s))))
            .collect(),
    ));

    // Transfers cancel, so total payoff is minus total cost.
    let pi = payoffs(&eq.profile, &game);
    let total_pi: f64 = pi.iter().sum();
    let total_cost: f64 = (0..n).map(|i| game.cost_of(i, w[i])).sum();
    let gap = (total_pi + total_cost).abs();
    out.push(check(
        Property::WelfareIdentity,
        gap <= 1e-9 * (1.0 + total_cost.abs()),
        format!("|Σπ + Σc| = {gap:.3e}"),
    ));

    let replayed: EquilibriumResult = serde_json::from_str(&serde_json::to_string(&eq)?)?;
    let gap = payoffs(&replayed.profile, &game)
        .iter()
        .zip(&pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(check(Property::JsonReplay, gap <= 1e-9, format!("max payoff drift {gap:.3e}")));

    out.push(match &sc.partition_sizes {
        Some(_) => match solve_equilibrium(&g, &game, opts) {
            Ok(full) => {
                let d = full.profile.max_abs_diff(&eq.profile);
                check(Property::PartitionReduction, d <= 1e-8, format!("max |Δs| = {d:.3e}"))
            }
            Err(e) => check(Property::PartitionReduction, false, e.to_string()),
        },
        None => skip(Property::PartitionReduction, "scenario lists explicit edges"),
    });

    // The three concepts are checked on the structure the equilibrium induces.
    let nash = check_nash(&eq.profile, &game, cfg.tol)?;
    let sps = check_strong_pairwise(&eq.profile, &game, cfg.tol)?;
    let lfps = check_lfps(&eq.profile.induced_structure(), &game, cfg)?;

    out.push(match nested(&eq.profile.induced_structure(), w) {
        Some(v) => check(Property::NestedNeighborhoods, false, v),
        None => check(Property::NestedNeighborhoods, true, "totals increase with neighbourhoods".into()),
    });

    out.push(if lfps.is_stable() {
        match weakest_targets(&eq.profile.induced_structure(), w, 1e-9) {
            Some(v) => check(Property::WeakestTargets, false, v),
            None => check(Property::WeakestTargets, true, "attackers fight every weaker player".into()),
        }
    } else {
        skip(Property::WeakestTargets, "structure is not limited-farsighted stable")
    });

    let err = [&nash, &sps]
        .iter()
        .map(|r| certificate_error(r, &eq, &game))
        .chain(std::iter::once(lfps.certificate.as_ref().map_or(0.0, |c| {
            // LFPS certificates deviate from the re-solved equilibrium the search started from.
            solve_equilibrium(&eq.profile.induced_structure(), &game, &cfg.solve)
                .map_or(f64::INFINITY, |base| c.replay_error(&base.profile, &game))
        })))
        .fold(0.0, f64::max);
    out.push(check(Property::CertificateReplay, err <= 1e-9, format!("max replay error {err:.3e}")));

    out.push(if lfps.is_stable() {
        let verdict = classify_partition(&eq, 1e-6).map(|p| validate_mpartite(&p, &eq.profile.induced_structure()));
        match verdict {
            Ok(v) => check(Property::LfpsIsMultipartite, v.passes, v.violations.join("; ")),
            Err(e) => check(Property::LfpsIsMultipartite, false, e.to_string()),
        }
    } else {
        skip(Property::LfpsIsMultipartite, "structure is not limited-farsighted stable")
    });

    out.push(if sps.is_stable() {
        check(Property::SpsImpliesNash, nash.is_stable(), format!("nash verdict {:?}", nash.verdict))
    } else {
        skip(Property::SpsImpliesNash, "structure is not strongly pairwise stable")
    });

    Ok(out)
}
