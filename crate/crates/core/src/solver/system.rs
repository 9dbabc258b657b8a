//! First-order system shared by all equilibrium methods.
//!
//! Unknowns are directed efforts `z_e` of an owner class against a target
//! class. A class stands for `size` identical players; a variable of class
//! `o` against class `d` is played against `weight` opponents. With one
//! class per player this is the full game; complete multipartite structures
//! collapse to one variable per ordered pair of classes.

use nalgebra::{DMatrix, DVector};

use crate::model::{Game, StrategyProfile, Structure};
use crate::numeric;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Var {
    pub owner: usize,
    pub target: usize,
    pub weight: f64,
    pub rev: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct ContestSystem {
    pub game: Game,
    pub cost_mult: Vec<f64>,
    pub vars: Vec<Var>,
    pub by_owner: Vec<Vec<usize>>,
}

impl ContestSystem {
    /// One class per player, one variable per directed edge.
    pub fn full(g: &Structure, game: &Game) -> Self {
        let n = g.n();
        let mut vars = Vec::with_capacity(2 * g.edge_count());
        for (i, j) in g.edges() {
            let k = vars.len();
            vars.push(Var {
                owner: i,
                target: j,
                weight: 1.0,
                rev: k + 1,
            });
            vars.push(Var {
                owner: j,
                target: i,
                weight: 1.0,
                rev: k,
            });
        }
        let cost_mult = (0..n).map(|i| game.cost_multiplier(i)).collect();
        Self::assemble(*game, cost_mult, vars)
    }

    /// Classes of (possibly fractional) sizes; `links` lists unordered class
    /// pairs in contest, `(c, c)` meaning members of `c` fight each other.
    pub fn quotient(sizes: &[f64], cost_mult: Vec<f64>, links: &[(usize, usize)], game: &Game) -> Self {
        let mut vars = Vec::new();
        for &(c, d) in links {
            let k = vars.len();
            if c == d {
                vars.push(Var {
                    owner: c,
                    target: c,
                    weight: sizes[c] - 1.0,
                    rev: k,
                });
            } else {
                vars.push(Var {
                    owner: c,
                    target: d,
                    weight: sizes[d],
                    rev: k + 1,
                });
                vars.push(Var {
                    owner: d,
                    target: c,
                    weight: sizes[c],
                    rev: k,
                });
            }
        }
        Self::assemble(*game, cost_mult, vars)
    }

    fn assemble(game: Game, cost_mult: Vec<f64>, vars: Vec<Var>) -> Self {
        let mut by_owner = vec![Vec::new(); cost_mult.len()];
        for (e, v) in vars.iter().enumerate() {
            by_owner[v.owner].push(e);
        }
        ContestSystem {
            game,
            cost_mult,
            vars,
            by_owner,
        }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn classes(&self) -> usize {
        self.cost_mult.len()
    }

    pub fn totals(&self, z: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.classes()];
        for (e, v) in self.vars.iter().enumerate() {
            w[v.owner] += v.weight * z[e];
        }
        w
    }

    fn mc(&self, o: usize, w: f64) -> f64 {
        self.cost_mult[o] * self.game.cost.d1(w)
    }

    fn mc2(&self, o: usize, w: f64) -> f64 {
        self.cost_mult[o] * self.game.cost.d2(w)
    }

    /// Marginal payoff of each variable; `+∞` at the r = 0 singularity.
    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let w = self.totals(z);
        self.vars
            .iter()
            .enumerate()
            .map(|(e, v)| self.game.marginal_or_inf(z[e], z[v.rev]) - self.mc(v.owner, w[v.owner]))
            .collect()
    }

    /// Per-variable complementarity violation.
    pub fn kkt_terms(&self, z: &[f64], grad: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(grad)
            .map(|(&x, &g)| if x > 0.0 { g.abs() } else { g.max(0.0) })
            .collect()
    }

    pub fn kkt_residual(&self, z: &[f64]) -> f64 {
        let g = self.gradient(z);
        self.kkt_terms(z, &g).into_iter().fold(0.0, f64::max)
    }

    /// Projected gradient field: zero where the variable sits at the bound
    /// and the gradient pushes outward.
    pub fn projected_field(&self, z: &[f64]) -> Vec<f64> {
        let g = self.gradient(z);
        z.iter()
            .zip(g)
            .map(|(&x, g)| if x <= 0.0 && g < 0.0 { 0.0 } else { g })
            .collect()
    }

    pub fn jacobian(&self, z: &[f64]) -> DMatrix<f64> {
        let m = self.len();
        let w = self.totals(z);
        let mut jac = DMatrix::zeros(m, m);
        for (e, v) in self.vars.iter().enumerate() {
            let c2 = self.mc2(v.owner, w[v.owner]);
            for &f in &self.by_owner[v.owner] {
                jac[(e, f)] -= c2 * self.vars[f].weight;
            }
            let (x, y) = (z[e], z[v.rev]);
            jac[(e, e)] += self.game.marginal_dx(x, y);
            jac[(e, v.rev)] += self.game.marginal_dy(x, y);
        }
        jac
    }

    /// Whether the marginal at zero effort is unbounded, so iterates must
    /// stay strictly positive.
    pub fn interior_barrier(&self) -> bool {
        self.game.tech.d1(0.0).is_infinite()
    }

    /// Symmetric starting point: each variable solves the first-order
    /// condition of an equal-effort contest with the owner's full load.
    pub fn heuristic_start(&self) -> Vec<f64> {
        let game = &self.game;
        let t = game.transfer();
        let r = game.r();
        let mut load = vec![0.0; self.classes()];
        for v in &self.vars {
            load[v.owner] += v.weight;
        }
        self.vars
            .iter()
            .map(|v| {
                let d = load[v.owner].max(1e-12);
                let mult = self.cost_mult[v.owner];
                let f = |x: f64| {
                    let k = r + 2.0 * game.tech.value(x);
                    t * game.tech.d1(x) / k - mult * game.cost.d1(d * x)
                };
                if r > 0.0 && f(0.0) <= 0.0 {
                    return 0.0;
                }
                numeric::root_decreasing(f, 0.0, 0.5, 1e-14).unwrap_or(0.1)
            })
            .collect()
    }

    /// Exact best response of class `o`'s variables to the current values of
    /// the opposing variables, plus `extra` spending fixed elsewhere.
    pub fn best_response_owner(&self, o: usize, z: &[f64], extra: f64) -> Vec<f64> {
        let idx = &self.by_owner[o];
        if idx.is_empty() {
            return Vec::new();
        }
        let opp: Vec<f64> = idx.iter().map(|&e| z[self.vars[e].rev]).collect();
        let weights: Vec<f64> = idx.iter().map(|&e| self.vars[e].weight).collect();
        let mult = self.cost_mult[o];
        best_response_block(&self.game, mult, &opp, &weights, extra, idx.iter().map(|&e| z[e]).sum())
    }

    /// Expands a solution to a player-level profile, given each player's class.
    pub fn expand(&self, z: &[f64], labels: &[usize], g: &Structure) -> StrategyProfile {
        let c = self.classes();
        let mut lookup = vec![None; c * c];
        for (e, v) in self.vars.iter().enumerate() {
            lookup[v.owner * c + v.target] = Some(e);
        }
        let n = labels.len();
        let mut s = StrategyProfile::zeros(n);
        for (i, j) in g.edges() {
            let (a, b) = (labels[i], labels[j]);
            if let Some(e) = lookup[a * c + b] {
                s.set(i, j, z[e]);
            }
            if let Some(e) = lookup[b * c + a] {
                s.set(j, i, z[e]);
            }
        }
        s
    }
}

/// Effort `x ≥ 0` with marginal revenue `mu` against an opponent at `y`.
pub(crate) fn invert_marginal(game: &Game, y: f64, mu: f64) -> f64 {
    let r = game.r();
    let t = game.transfer();
    let tech = &game.tech;
    let py = tech.value(y);
    let num = r + 2.0 * py;
    if num == 0.0 {
        // Opponent absent and no draws: any positive effort wins outright.
        return SINGULAR_ENTRY;
    }
    if mu <= 0.0 {
        return f64::INFINITY;
    }
    let m0 = game.marginal_or_inf(0.0, y);
    if m0 <= mu {
        return 0.0;
    }
    if tech.is_linear() {
        let lam = tech.scale();
        let k = (t * lam * num / mu).sqrt();
        return ((k - r - lam * y) / lam).max(0.0);
    }
    let f = |x: f64| game.marginal_or_inf(x, y) - mu;
    let start = y.max(1e-6);
    numeric::root_decreasing(f, 0.0, start, 1e-16).unwrap_or(0.0)
}

/// Stand-in for an infinitesimal winning effort against an absent opponent.
pub(crate) const SINGULAR_ENTRY: f64 = 1e-12;

/// Concave block best response: efforts against opponents `opp` (each
/// counted `weights` times) with `extra` spending fixed, cost scaled by `mult`.
pub(crate) fn best_response_block(
    game: &Game,
    mult: f64,
    opp: &[f64],
    weights: &[f64],
    extra: f64,
    hint: f64,
) -> Vec<f64> {
    let mu = |w: f64| mult * game.cost.d1(w + extra);
    let supply = |w: f64| -> f64 {
        let m = mu(w);
        opp.iter()
            .zip(weights)
            .map(|(&y, &wt)| wt * invert_marginal(game, y, m))
            .sum()
    };
    let at_zero = supply(0.0);
    if at_zero <= 0.0 {
        return vec![0.0; opp.len()];
    }
    let g = |w: f64| supply(w) - w;
    let start = if hint > 0.0 { hint } else { 0.5 };
    let w = numeric::root_decreasing(g, 0.0, start, 1e-16).unwrap_or(start);
    let m = mu(w);
    opp.iter().map(|&y| invert_marginal(game, y, m)).collect()
}

/// Lower-bound-aware trial point `z + t·d`.
pub(crate) fn project_step(z: &[f64], d: &[f64], t: f64, barrier: bool) -> Vec<f64> {
    z.iter()
        .zip(d)
        .map(|(&x, &dx)| {
            let y = x + t * dx;
            if y >= 0.0 {
                y
            } else if barrier {
                0.1 * x
            } else {
                0.0
            }
        })
        .collect()
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn as_vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
