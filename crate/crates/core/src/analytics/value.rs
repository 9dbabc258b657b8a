use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ContestParams, CostSpec, Game, TechnologySpec};
use crate::solver::solve_bipartite;
use crate::solver::system::best_response_block;

/// Best value of fighting `v` identical opponents who each invest `s`:
/// max over x ≥ 0 of v·R(x, s) − c(v·x) under the game's technology and
/// transfer. With no draws and `s = 0` this is the supremum `v·T`.
pub fn contest_value(v: f64, s: f64, game: &Game) -> Result<f64> {
    if !(v.is_finite() && v >= 0.0 && s.is_finite() && s >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "opponent count and effort must be finite and >= 0, got v = {v}, s = {s}"
        )));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    if game.r() == 0.0 && s == 0.0 {
        return Ok(v * game.transfer());
    }
    let x = best_response_block(game, 1.0, &[s], &[v], 0.0, s)[0];
    Ok(v * game.revenue(x, s) - game.cost.value(v * x))
}

/// `contest_value` for φ(x) = x and T = 1.
pub fn deviation_value_h(v: f64, s: f64, r: f64, cost: &CostSpec) -> Result<f64> {
    let game = Game::new(TechnologySpec::identity(), *cost, ContestParams::new(r, 1.0)?)?;
    contest_value(v, s, &game)
}

/// Gain of an attacker in B(a, v) from ending one contest with a victim,
/// with victims' efforts held at equilibrium: h(v−1, s̄) − h(v, s̄). Class
/// sizes may be fractional.
pub fn attacker_link_benefit_f(a: f64, v: f64, game: &Game) -> Result<f64> {
    if !(v >= 1.0 && a > 0.0 && a.is_finite() && v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need a > 0 and v >= 1, got a = {a}, v = {v}"
        )));
    }
    let eq = solve_bipartite(a, v, game, 1e-13)?;
    let s = eq.victim_effort;
    Ok(contest_value(v - 1.0, s, game)? - contest_value(v, s, game)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n: usize,
    /// Largest victim-class size (continuous) keeping B(n−v, v) stable
    /// against link deletion; `None` when even v = 1 fails.
    pub v_star: Option<f64>,
    /// Set when f stays negative over the whole bracket, so `v_star` is the
    /// bracket's upper end.
    pub v_star_at_bracket_end: bool,
    /// Greatest integer v < n/2 with f(n−v, v) < −tol.
    pub max_stable_v: Option<usize>,
    pub bracket: (f64, f64),
}

/// Sign change of v ↦ f(n−v, v) over [1, n/2 − n/(2√5)], by bisection.
pub fn bipartite_threshold(n: usize, game: &Game, tol: f64) -> Result<ThresholdReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let nf = n as f64;
    let f = |v: f64| attacker_link_benefit_f(nf - v, v, game);
    let upper = nf / 2.0 - nf / (2.0 * 5f64.sqrt());
    let bracket = (1.0, upper.max(1.0));
    let mut max_stable_v = None;
    for v in 1..n {
        if 2 * v >= n {
            break;
        }
        if f(v as f64)? < -tol {
            max_stable_v = Some(v);
        } else {
            break;
        }
    }
    let f_lo = f(1.0)?;
    if f_lo >= -tol {
        return Ok(ThresholdReport {
            n,
            v_star: None,
            v_star_at_bracket_end: false,
            max_stable_v,
            bracket,
        });
    }
    let f_hi = f(bracket.1)?;
    if f_hi < -tol {
        return Ok(ThresholdReport {
            n,
            v_star: Some(bracket.1),
            v_star_at_bracket_end: true,
            max_stable_v,
            bracket,
        });
    }
    let (mut lo, mut hi) = bracket;
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdReport {
        n,
        v_star: Some(0.5 * (lo + hi)),
        v_star_at_bracket_end: false,
        max_stable_v,
        bracket,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::closed_form_bipartite;

    fn quad() -> CostSpec {
        CostSpec::quadratic()
    }

    #[test]
    fn h_examples() {
        assert_eq!(deviation_value_h(0.0, 0.3, 0.2, &quad()).unwrap(), 0.0);
        let (x, y) = closed_form_bipartite(3.0, 1.0, 2.0).unwrap();
        let h = deviation_value_h(1.0, y, 0.0, &quad()).unwrap();
        assert!((h - ((x - y) / (x + y) - x * x)).abs() < 1e-12);
        assert!((h - 0.035898).abs() < 1e-6);
        let (_, y2) = closed_form_bipartite(2.0, 1.0, 2.0).unwrap();
        assert!((y2 - 0.34830).abs() < 1e-4);
        assert!((deviation_value_h(1.0, y2, 0.0, &quad()).unwrap() + 0.07106).abs() < 5e-5);
    }

    #[test]
    fn h_maximiser_is_global() {
        // Brute-force grid oracle.
        for &(v, s, r) in &[(2.0, 0.2, 0.0), (3.0, 0.05, 0.3), (1.0, 0.5, 1.0)] {
            let h = deviation_value_h(v, s, r, &quad()).unwrap();
            let best = (0..=200_000)
                .map(|k| {
                    let x = k as f64 * 1e-5;
                    v * (x - s) / (x + s + r) - (v * x).powi(2)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(h >= best - 1e-12 && h <= best + 1e-8);
        }
    }

    #[test]
    fn f_examples() {
        let g = Game::benchmark();
        let f3 = attacker_link_benefit_f(3.0, 1.0, &g).unwrap();
        assert!((f3 + 0.035898).abs() < 1e-6);
        let (_, y) = closed_form_bipartite(3.0, 1.0, 2.0).unwrap();
        assert!((f3 + deviation_value_h(1.0, y, 0.0, &quad()).unwrap()).abs() < 1e-9);
        let f2 = attacker_link_benefit_f(2.0, 1.0, &g).unwrap();
        assert!((f2 - 0.07106).abs() < 5e-5);
    }

    #[test]
    fn thresholds() {
        let g = Game::benchmark();
        let t3 = bipartite_threshold(3, &g, 1e-12).unwrap();
        assert_eq!(t3.v_star, None);
        assert_eq!(t3.max_stable_v, None);
        let t4 = bipartite_threshold(4, &g, 1e-12).unwrap();
        assert!(t4.v_star.unwrap() >= 1.0);
        assert_eq!(t4.max_stable_v, Some(1));
        let t12 = bipartite_threshold(12, &g, 1e-12).unwrap();
        let v = t12.v_star.unwrap();
        assert!((2.0..=12.0 / 2.0 - 12.0 / (2.0 * 5f64.sqrt())).contains(&v), "{v}");
        assert!(t12.max_stable_v.unwrap() >= 2);
    }
}
