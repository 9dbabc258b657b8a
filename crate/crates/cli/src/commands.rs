use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use contestnet::analytics::{
    bipartite_threshold, cost_shock_derivatives, effort_derivatives_r, sweep, RDerivatives, ShockDerivatives,
    ShockedRole, SweepKind,
};
use contestnet::dynamics::{farsighted_stable_set, simulate_formation};
use contestnet::model::{payoffs, Game, Scenario, Structure};
use contestnet::solver::{solve_bipartite, solve_equilibrium, solve_partition, EquilibriumResult, Method, SolveOptions};
use contestnet::stability::{
    check_lfps, check_nash, check_strong_pairwise, classify_partition, validate_mpartite, SearchConfig, StabilityReport,
};
use contestnet::Error;

use crate::output::{self, num, opt};
use crate::validate;
use crate::{Cli, Command, Format, GameArgs, SearchArgs, SolveArgs};

/// Exit status for an error that escaped a command.
pub fn failure_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::NonConvergence { .. }
            | Error::Bracketing(_)
            | Error::Singular { .. }
            | Error::NonInterior(_)
            | Error::AmbiguousPartition(_),
        ) => 2,
        _ => 1,
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

impl SolveArgs {
    pub fn options(&self) -> Result<SolveOptions> {
        let method: Method = self.method.parse()?;
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("--tol must be positive, got {}", self.tol)).into());
        }
        let mut o = SolveOptions::default().with_method(method).with_tol(self.tol);
        o.seed = self.seed;
        Ok(o)
    }
}

impl SearchArgs {
    pub fn config(&self, solve: SolveOptions) -> SearchConfig {
        SearchConfig {
            tol: self.search_tol,
            exhaustive_limit: self.exhaustive_limit,
            multiset_limit: self.multiset_limit,
            grid_points: self.grid_points,
            solve,
        }
    }
}

impl GameArgs {
    fn game(&self) -> Result<Game> {
        let mut g = match &self.scenario {
            Some(p) => load_scenario(p)?.game()?,
            None => Game::benchmark(),
        };
        if let Some(r) = self.r {
            g = g.with_r(r);
        }
        if let Some(t) = self.transfer {
            g = g.with_transfer(t);
        }
        g.validate()?;
        Ok(g)
    }
}

/// Equilibrium of a scenario, using the class reduction for multipartite ones.
pub fn solve_scenario(sc: &Scenario, opts: &SolveOptions) -> Result<EquilibriumResult> {
    let game = sc.game()?;
    Ok(match &sc.partition_sizes {
        Some(p) => solve_partition(p, &game, opts)?,
        None => solve_equilibrium(&sc.structure()?, &game, opts)?,
    })
}

#[derive(Serialize)]
struct SolveOut<'a> {
    n: usize,
    method: Method,
    residual: f64,
    iterations: usize,
    efforts: Vec<Vec<f64>>,
    totals: &'a [f64],
    payoffs: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

/// CSV rows `i,j,s_ij` for both directions of every contest, row-major.
fn effort_csv(eq: &EquilibriumResult, g: &Structure) -> Result<String> {
    let n = g.n();
    let mut rows = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && g.has_edge(i, j) {
                rows.push(vec![i.to_string(), j.to_string(), num(eq.profile.get(i, j))]);
            }
        }
    }
    output::csv(&["i", "j", "s_ij"], &rows)
}

fn parse_role(s: &str) -> Result<ShockedRole> {
    match s {
        "attacker" => Ok(ShockedRole::Attacker),
        "victim" => Ok(ShockedRole::Victim),
        other => Err(Error::InvalidInput(format!("unknown role {other:?}, expected attacker or victim")).into()),
    }
}

fn grid(values: Option<Vec<f64>>, from: Option<f64>, to: Option<f64>, points: Option<usize>) -> Result<Vec<f64>> {
    if let Some(v) = values {
        return Ok(v);
    }
    let (Some(a), Some(b), Some(k)) = (from, to, points) else {
        bail!(Error::InvalidInput("give --values or all of --from, --to, --points".into()));
    };
    if k < 2 {
        bail!(Error::InvalidParameter(format!("--points must be at least 2, got {k}")));
    }
    Ok((0..k).map(|t| a + (b - a) * t as f64 / (k - 1) as f64).collect())
}

fn stability_csv(r: &StabilityReport) -> Result<String> {
    let verdict = serde_json::to_value(r.verdict)?;
    let (dev, gains) = match &r.certificate {
        Some(c) => (
            c.deviators.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "),
            c.gains().into_iter().map(num).collect::<Vec<_>>().join(" "),
        ),
        None => (String::new(), String::new()),
    };
    let concept = serde_json::to_value(r.concept)?;
    output::csv(
        &["concept", "verdict", "deviators", "gains"],
        &[vec![
            concept.as_str().unwrap_or_default().to_string(),
            verdict.as_str().unwrap_or_default().to_string(),
            dev,
            gains,
        ]],
    )
}

pub fn check_concept(concept: &str, eq: &EquilibriumResult, g: &Structure, game: &Game, cfg: &SearchConfig) -> Result<StabilityReport> {
    Ok(match concept {
        "nash" => check_nash(&eq.profile, game, cfg.tol)?,
        "sps" | "strong_pairwise" => check_strong_pairwise(&eq.profile, game, cfg.tol)?,
        "lfps" => check_lfps(g, game, cfg)?,
        other => bail!(Error::InvalidInput(format!("unknown concept {other:?}, expected nash, sps or lfps"))),
    })
}

#[derive(Serialize)]
struct ShockOut {
    a: usize,
    v: usize,
    role: ShockedRole,
    attacker_effort: f64,
    victim_effort: f64,
    shock: ShockDerivatives,
    r_derivatives: RDerivatives,
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let fmt = cli.format;
    let out = cli.output.as_deref();
    let text = match cli.command {
        Command::Solve { scenario, solve } => {
            let sc = load_scenario(&scenario)?;
            let eq = solve_scenario(&sc, &solve.options()?)?;
            let g = sc.structure()?;
            match fmt {
                Format::Csv => effort_csv(&eq, &g)?,
                Format::Json => output::json(&SolveOut {
                    n: sc.n,
                    method: eq.method,
                    residual: eq.residual,
                    iterations: eq.iterations,
                    efforts: eq.profile.rows(),
                    totals: &eq.totals,
                    payoffs: payoffs(&eq.profile, &sc.game()?),
                    edges: g.edges().collect(),
                })?,
            }
        }
        Command::Stability {
            scenario,
            concept,
            solve,
            search,
        } => {
            let sc = load_scenario(&scenario)?;
            let opts = solve.options()?;
            let cfg = search.config(opts);
            let game = sc.game()?;
            let g = sc.structure()?;
            let eq = solve_scenario(&sc, &opts)?;
            let report = check_concept(&concept, &eq, &g, &game, &cfg)?;
            match fmt {
                Format::Csv => stability_csv(&report)?,
                Format::Json => output::json(&report)?,
            }
        }
        Command::Classify {
            scenario,
            group_tol,
            solve,
        } => {
            let sc = load_scenario(&scenario)?;
            let eq = solve_scenario(&sc, &solve.options()?)?;
            let part = classify_partition(&eq, group_tol)?;
            let verdict = validate_mpartite(&part, &sc.structure()?);
            match fmt {
                Format::Csv => {
                    let labels = part.labels();
                    let rows: Vec<Vec<String>> = (0..sc.n)
                        .map(|i| {
                            let role = serde_json::to_value(part.roles[i]).expect("roles serialize");
                            vec![
                                i.to_string(),
                                num(eq.totals[i]),
                                labels[i].to_string(),
                                role.as_str().unwrap_or_default().to_string(),
                            ]
                        })
                        .collect();
                    output::csv(&["player", "total", "class", "role"], &rows)?
                }
                Format::Json => output::json(&serde_json::json!({ "partition": part, "mpartite": verdict }))?,
            }
        }
        Command::Threshold { n, tol, game } => {
            let rep = bipartite_threshold(n, &game.game()?, tol)?;
            match fmt {
                Format::Csv => output::csv(
                    &["n", "v_star", "v_star_at_bracket_end", "max_stable_v", "bracket_lo", "bracket_hi"],
                    &[vec![
                        rep.n.to_string(),
                        opt(rep.v_star),
                        rep.v_star_at_bracket_end.to_string(),
                        rep.max_stable_v.map(|v| v.to_string()).unwrap_or_default(),
                        num(rep.bracket.0),
                        num(rep.bracket.1),
                    ]],
                )?,
                Format::Json => output::json(&rep)?,
            }
        }
        Command::Sweep {
            scenario,
            kind,
            values,
            from,
            to,
            points,
            solve,
        } => {
            let sc = load_scenario(&scenario)?;
            let kind: SweepKind = kind.parse()?;
            let table = sweep(kind, &grid(values, from, to, points)?, &sc, &solve.options()?)?;
            match fmt {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for row in table.rows() {
                        w.serialize(row)?;
                    }
                    String::from_utf8(w.into_inner()?)?
                }
                Format::Json => output::json(&table)?,
            }
        }
        Command::Shock { a, v, role, game } => {
            let game = game.game()?;
            let role = parse_role(&role)?;
            let shock = cost_shock_derivatives(a, v, role, &game)?;
            let eq = solve_bipartite(a as f64, v as f64, &game, 1e-13)?;
            let rd = effort_derivatives_r(&eq, &game)?;
            let res = ShockOut {
                a,
                v,
                role,
                attacker_effort: eq.attacker_effort,
                victim_effort: eq.victim_effort,
                shock,
                r_derivatives: rd,
            };
            match fmt {
                Format::Csv => output::csv(
                    &[
                        "a",
                        "v",
                        "d_shocked",
                        "d_same_class",
                        "d_other_class",
                        "d_total_spending",
                        "dx_dr",
                        "dy_dr",
                        "dtotal_dr",
                    ],
                    &[vec![
                        a.to_string(),
                        v.to_string(),
                        num(shock.shocked),
                        opt(shock.same_class),
                        num(shock.other_class),
                        num(shock.total_spending),
                        num(rd.attacker_effort),
                        num(rd.victim_effort),
                        num(rd.total_spending),
                    ]],
                )?,
                Format::Json => output::json(&res)?,
            }
        }
        Command::Simulate {
            scenario,
            periods,
            seed,
            search,
        } => {
            let sc = load_scenario(&scenario)?;
            let cfg = search.config(SolveOptions::default());
            let t = simulate_formation(&sc.structure()?, &sc.game()?, periods, seed, &cfg)?;
            let status = serde_json::to_value(t.status)?;
            eprintln!(
                "status: {} after {} periods, {} revisions, final edges {}",
                status.as_str().unwrap_or_default(),
                t.periods(),
                t.revisions(),
                t.final_structure().edge_count()
            );
            if let Some(e) = &t.error {
                eprintln!("aborted: {e}");
            }
            let text = match fmt {
                Format::Json => t.to_json_lines(),
                Format::Csv => {
                    let rows: Vec<Vec<String>> = t
                        .records
                        .iter()
                        .map(|r| {
                            let (pair, kind) = match &r.event {
                                Some(e) => (
                                    format!("{} {}", e.pair.0, e.pair.1),
                                    e.kind
                                        .map(|k| serde_json::to_value(k).expect("kinds serialize").as_str().unwrap_or_default().to_string())
                                        .unwrap_or_else(|| "none".into()),
                                ),
                                None => (String::new(), String::new()),
                            };
                            let edges = r.edges.iter().map(|(i, j)| format!("{i}-{j}")).collect::<Vec<_>>().join(" ");
                            vec![r.period.to_string(), pair, kind, edges, num(r.residual)]
                        })
                        .collect();
                    output::csv(&["period", "pair", "kind", "edges", "residual"], &rows)?
                }
            };
            output::emit(&text, out)?;
            return Ok(if t.error.is_some() { ExitCode::from(2) } else { ExitCode::SUCCESS });
        }
        Command::Farsighted { n, tol, game } => {
            let rep = farsighted_stable_set(n, &game.game()?, &SolveOptions::default(), tol)?;
            match fmt {
                Format::Csv => {
                    let rows: Vec<Vec<String>> = rep
                        .classes
                        .iter()
                        .enumerate()
                        .map(|(k, c)| {
                            vec![
                                k.to_string(),
                                c.edges.iter().map(|(i, j)| format!("{i}-{j}")).collect::<Vec<_>>().join(" "),
                                c.stable.to_string(),
                                c.reachable.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" "),
                            ]
                        })
                        .collect();
                    output::csv(&["class", "edges", "stable", "reachable"], &rows)?
                }
                Format::Json => output::json(&rep)?,
            }
        }
        Command::Validate { scenario, solve, search } => {
            let sc = load_scenario(&scenario)?;
            let opts = solve.options()?;
            let checks = validate::run_all(&sc, &opts, &search.config(opts))?;
            let text = match fmt {
                Format::Json => output::json(&checks)?,
                Format::Csv => {
                    let rows: Vec<Vec<String>> = checks
                        .iter()
                        .map(|c| vec![c.property.to_string(), c.status.label().to_string(), c.detail.clone()])
                        .collect();
                    output::csv(&["property", "status", "detail"], &rows)?
                }
            };
            output::emit(&text, out)?;
            let failed = checks.iter().any(|c| c.status == validate::Status::Fail);
            return Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS });
        }
    };
    output::emit(&text, out)?;
    Ok(ExitCode::SUCCESS)
}
