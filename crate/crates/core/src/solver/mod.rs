//! Equilibrium of the contest game on a fixed structure.

mod methods;
pub(crate) mod system;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{class_labels, Game, StrategyProfile, Structure};
use crate::numeric;
use methods::Outcome;
pub(crate) use system::ContestSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Newton,
    BestResponse,
    GradientFlow,
    Auto,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Newton => "newton",
            Method::BestResponse => "best_response",
            Method::GradientFlow => "gradient_flow",
            Method::Auto => "auto",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newton" => Ok(Method::Newton),
            "best_response" | "best-response" => Ok(Method::BestResponse),
            "gradient_flow" | "gradient-flow" => Ok(Method::GradientFlow),
            "auto" => Ok(Method::Auto),
            other => Err(Error::InvalidInput(format!("unknown method tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    /// Bound on the KKT residual, in marginal-payoff units.
    pub tol: f64,
    /// Random initial point when set; a symmetric heuristic otherwise.
    pub seed: Option<u64>,
    pub max_newton_iter: usize,
    pub max_sweeps: usize,
    pub max_flow_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Auto,
            tol: 1e-10,
            seed: None,
            max_newton_iter: 1_000,
            max_sweeps: 10_000,
            max_flow_steps: 2_000_000,
        }
    }
}

impl SolveOptions {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Whether both sides of a contest invest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkStatus {
    pub i: usize,
    pub j: usize,
    pub interior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub profile: StrategyProfile,
    pub totals: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
    pub links: Vec<LinkStatus>,
}

impl EquilibriumResult {
    fn build(profile: StrategyProfile, g: &Structure, out: &Outcome, method: Method) -> Self {
        let links = g
            .edges()
            .map(|(i, j)| LinkStatus {
                i,
                j,
                interior: profile.get(i, j) > 0.0 && profile.get(j, i) > 0.0,
            })
            .collect();
        EquilibriumResult {
            totals: profile.totals(),
            profile,
            residual: out.residual,
            iterations: out.iterations,
            method,
            links,
        }
    }

    pub fn all_interior(&self) -> bool {
        self.links.iter().all(|l| l.interior)
    }

    /// CSV rows `i,j,s_ij` for every positive effort.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,s_ij\n");
        let n = self.profile.n();
        for i in 0..n {
            for j in 0..n {
                let v = self.profile.get(i, j);
                if v > 0.0 {
                    out.push_str(&format!("{i},{j},{v:.16e}\n"));
                }
            }
        }
        out
    }
}

fn validate_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")))
    }
}

fn initial_point(sys: &ContestSystem, seed: Option<u64>) -> Vec<f64> {
    let base = sys.heuristic_start();
    match seed {
        None => base,
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            base.iter()
                .map(|&x| {
                    let scale = if x > 0.0 { x } else { 0.1 };
                    scale * rng.random_range(0.2..3.0)
                })
                .collect()
        }
    }
}

/// Number of unknowns up to which `auto` starts from Newton.
const NEWTON_LIMIT: usize = 600;

fn run(sys: &ContestSystem, z0: &[f64], opts: &SolveOptions) -> Result<(Outcome, Method)> {
    let tol = opts.tol;
    match opts.method {
        Method::Newton => methods::newton(sys, z0, tol, opts.max_newton_iter).map(|o| (o, Method::Newton)),
        Method::BestResponse => {
            methods::best_response(sys, z0, tol, opts.max_sweeps).map(|o| (o, Method::BestResponse))
        }
        Method::GradientFlow => methods::gradient_flow(sys, z0, tol, opts.max_flow_steps, 0.05, None)
            .map(|o| (o, Method::GradientFlow)),
        Method::Auto => {
            if sys.len() <= NEWTON_LIMIT {
                if let Ok(o) = methods::newton(sys, z0, tol, opts.max_newton_iter) {
                    return Ok((o, Method::Newton));
                }
            }
            match methods::best_response(sys, z0, tol, opts.max_sweeps) {
                Ok(o) => Ok((o, Method::BestResponse)),
                Err(e) => {
                    if sys.len() <= NEWTON_LIMIT {
                        methods::gradient_flow(sys, z0, tol, opts.max_flow_steps, 0.05, None)
                            .map(|o| (o, Method::GradientFlow))
                    } else {
                        Err(e)
                    }
                }
            }
        }
    }
}

/// Equilibrium efforts on structure `g`.
pub fn solve_equilibrium(g: &Structure, game: &Game, opts: &SolveOptions) -> Result<EquilibriumResult> {
    validate_tol(opts.tol)?;
    game.validate()?;
    if let Some(s) = game.shock {
        if s.player >= g.n() {
            return Err(Error::IndexOutOfRange { index: s.player, n: g.n() });
        }
    }
    let sys = ContestSystem::full(g, game);
    if sys.len() == 0 {
        let out = Outcome {
            z: Vec::new(),
            iterations: 0,
            residual: 0.0,
        };
        return Ok(EquilibriumResult::build(StrategyProfile::zeros(g.n()), g, &out, opts.method));
    }
    let z0 = initial_point(&sys, opts.seed);
    let (out, method) = run(&sys, &z0, opts)?;
    let labels: Vec<usize> = (0..g.n()).collect();
    let profile = sys.expand(&out.z, &labels, g);
    Ok(EquilibriumResult::build(profile, g, &out, method))
}

/// Projected gradient flow on `g` started from `s0`; `trace` receives the
/// field norm after every accepted step.
pub(crate) fn flow_from(
    g: &Structure,
    game: &Game,
    s0: &StrategyProfile,
    tol: f64,
    max_steps: usize,
    h0: f64,
    trace: &mut Vec<f64>,
) -> Result<EquilibriumResult> {
    validate_tol(tol)?;
    game.validate()?;
    let sys = ContestSystem::full(g, game);
    let z0: Vec<f64> = sys.vars.iter().map(|v| s0.get(v.owner, v.target)).collect();
    let out = if sys.len() == 0 {
        Outcome {
            z: Vec::new(),
            iterations: 0,
            residual: 0.0,
        }
    } else {
        methods::gradient_flow(&sys, &z0, tol, max_steps, h0, Some(trace))?
    };
    let labels: Vec<usize> = (0..g.n()).collect();
    let profile = sys.expand(&out.z, &labels, g);
    Ok(EquilibriumResult::build(profile, g, &out, Method::GradientFlow))
}

/// Equilibrium on the complete multipartite structure with the given class
/// sizes, solved with one unknown per ordered pair of classes.
pub fn solve_partition(sizes: &[usize], game: &Game, opts: &SolveOptions) -> Result<EquilibriumResult> {
    validate_tol(opts.tol)?;
    game.validate()?;
    if sizes.contains(&0) {
        return Err(Error::InvalidInput("partition classes must be nonempty".into()));
    }
    let g = Structure::complete_multipartite(sizes);
    if game.shock.is_some() {
        return solve_equilibrium(&g, game, opts);
    }
    let m = sizes.len();
    let links: Vec<(usize, usize)> = (0..m).flat_map(|c| (c + 1..m).map(move |d| (c, d))).collect();
    let fsizes: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let sys = ContestSystem::quotient(&fsizes, vec![1.0; m], &links, game);
    let labels = class_labels(sizes);
    if sys.len() == 0 {
        let out = Outcome {
            z: Vec::new(),
            iterations: 0,
            residual: 0.0,
        };
        return Ok(EquilibriumResult::build(StrategyProfile::zeros(g.n()), &g, &out, opts.method));
    }
    let z0 = initial_point(&sys, opts.seed);
    let (out, method) = run(&sys, &z0, opts)?;
    let profile = sys.expand(&out.z, &labels, &g);
    Ok(EquilibriumResult::build(profile, &g, &out, method))
}

/// Per-contest efforts on a complete bipartite structure with `a` attackers
/// and `v` victims; sizes may be fractional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipartiteEquilibrium {
    pub a: f64,
    pub v: f64,
    pub attacker_effort: f64,
    pub victim_effort: f64,
}

impl BipartiteEquilibrium {
    pub fn attacker_total(&self) -> f64 {
        self.v * self.attacker_effort
    }

    pub fn victim_total(&self) -> f64 {
        self.a * self.victim_effort
    }

    /// Total spending a·w_attacker + v·w_victim.
    pub fn total_spending(&self) -> f64 {
        self.a * self.attacker_total() + self.v * self.victim_total()
    }

    /// Reads the efforts of attacker 0 against victim `a` from a full solve
    /// laid out as `Structure::complete_bipartite(a, v)`.
    pub fn from_result(eq: &EquilibriumResult, a: usize, v: usize) -> Self {
        BipartiteEquilibrium {
            a: a as f64,
            v: v as f64,
            attacker_effort: eq.profile.get(0, a),
            victim_effort: eq.profile.get(a, 0),
        }
    }
}

/// Two-class reduced solve of the complete bipartite structure.
pub fn solve_bipartite(a: f64, v: f64, game: &Game, tol: f64) -> Result<BipartiteEquilibrium> {
    validate_tol(tol)?;
    game.validate()?;
    if !(a.is_finite() && v.is_finite() && a > 0.0 && v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "class sizes must be positive, got a = {a}, v = {v}"
        )));
    }
    let sys = ContestSystem::quotient(&[a, v], vec![1.0, 1.0], &[(0, 1)], game);
    let z0 = sys.heuristic_start();
    let out = methods::newton(&sys, &z0, tol, 1_000)
        .or_else(|_| methods::best_response(&sys, &z0, tol, 10_000))?;
    Ok(BipartiteEquilibrium {
        a,
        v,
        attacker_effort: out.z[0],
        victim_effort: out.z[1],
    })
}

/// Closed-form per-contest efforts on a complete bipartite structure for
/// φ(x) = x, c(x) = (2/α)x^α and r = 0.
pub fn closed_form_bipartite(a: f64, v: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(a >= 1.0 && v >= 1.0 && a.is_finite() && v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "class sizes must be >= 1, got a = {a}, v = {v}"
        )));
    }
    if !(alpha >= 2.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("cost exponent must be >= 2, got {alpha}")));
    }
    let p = (alpha - 1.0) / alpha;
    let ap = a.powf(p);
    let vp = v.powf(p);
    let common = (ap + vp).powf(-2.0 / alpha) * (a * v).powf(-p * p);
    Ok((ap * common, vp * common))
}

/// Effort with which a defender holding total `w_defender` answers an
/// attack of size `s_attack`.
pub fn anticipated_reply(s_attack: f64, w_defender: f64, game: &Game) -> Result<f64> {
    anticipated_reply_scaled(s_attack, w_defender, game, 1.0)
}

pub(crate) fn anticipated_reply_scaled(s_attack: f64, w_defender: f64, game: &Game, mult: f64) -> Result<f64> {
    for (name, v) in [("s_attack", s_attack), ("w_defender", w_defender)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let r = game.r();
    if r == 0.0 && s_attack == 0.0 {
        return Ok(0.0);
    }
    let mc = |x: f64| mult * game.cost.d1(w_defender + x);
    let m0 = game.marginal_or_inf(0.0, s_attack);
    if m0 <= mc(0.0) {
        return Ok(0.0);
    }
    let f = |x: f64| game.marginal_or_inf(x, s_attack) - mc(x);
    let start = s_attack.max(1e-3);
    let mut x = numeric::root_decreasing(f, 0.0, start, 1e-15)?;
    // One Newton polish step, kept only if it improves the residual.
    let fx = f(x);
    let dfx = game.marginal_dx(x, s_attack) - mult * game.cost.d2(w_defender + x);
    if dfx < 0.0 {
        let y = x - fx / dfx;
        if y > 0.0 && f(y).abs() < fx.abs() {
            x = y;
        }
    }
    Ok(x)
}

/// Best response of player `i` on the edges of `g`, holding all other
/// entries of `s` fixed. Returns the full row.
pub fn best_response_row(i: usize, s: &StrategyProfile, g: &Structure, game: &Game) -> Result<Vec<f64>> {
    s.check_index(i)?;
    if g.n() != s.n() {
        return Err(Error::InvalidInput("structure and profile sizes differ".into()));
    }
    let targets = g.neighbors(i);
    let opp: Vec<f64> = targets.iter().map(|&j| s.get(j, i)).collect();
    let weights = vec![1.0; targets.len()];
    let x = system::best_response_block(game, game.cost_multiplier(i), &opp, &weights, 0.0, s.total(i));
    let mut row = vec![0.0; s.n()];
    for (k, &j) in targets.iter().enumerate() {
        row[j] = x[k];
    }
    Ok(row)
}

/// Equilibrium totals for linear technology from the interior closed form
/// of pairwise efforts, s_ij = 2Tμ_j/(μ_i + μ_j)² − r/(2λ) with
/// μ_i = (1 + ε_i)c′(w_i), iterated to a fixed point in `w`.
pub fn w_fixed_point(g: &Structure, game: &Game) -> Result<Vec<f64>> {
    game.validate()?;
    if !game.tech.is_linear() {
        return Err(Error::InvalidParameter("total-effort system needs linear technology".into()));
    }
    let n = g.n();
    if g.is_empty() {
        return Ok(vec![0.0; n]);
    }
    let lam = game.tech.scale();
    let t = game.transfer();
    let shift = game.r() / (2.0 * lam);
    let map = |w: &[f64]| -> Vec<f64> {
        let mu: Vec<f64> = (0..n).map(|i| game.marginal_cost_of(i, w[i])).collect();
        (0..n)
            .map(|i| {
                g.neighbors(i)
                    .iter()
                    .map(|&j| 2.0 * t * mu[j] / (mu[i] + mu[j]).powi(2) - shift)
                    .sum()
            })
            .collect()
    };
    let sys = ContestSystem::full(g, game);
    let mut w = sys.totals(&sys.heuristic_start());
    for x in &mut w {
        *x = x.max(1e-3);
    }
    let resid = |w: &[f64]| -> f64 {
        map(w).iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let mut theta = 1.0;
    let mut prev = resid(&w);
    for _ in 0..200_000 {
        if prev <= 1e-15 {
            break;
        }
        let f = map(&w);
        let trial: Vec<f64> = w
            .iter()
            .zip(&f)
            .map(|(&a, &b)| ((1.0 - theta) * a + theta * b).max(1e-300))
            .collect();
        let rt = resid(&trial);
        if rt < prev {
            w = trial;
            prev = rt;
            theta = (theta * 1.1).min(1.0);
        } else {
            theta *= 0.5;
            if theta < 1e-12 {
                break;
            }
        }
    }
    if prev > 1e-12 {
        return Err(Error::NonConvergence {
            method: "w_fixed_point".into(),
            iterations: 200_000,
            residual: prev,
        });
    }
    Ok(w)
}

#[cfg(test)]
mod tests;
