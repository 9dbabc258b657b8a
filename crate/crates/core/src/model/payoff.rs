use super::{Game, StrategyProfile};
use crate::error::{Error, Result};

/// π_i = Σ_j R(s_ij, s_ji) − c(w_i).
pub fn payoff(i: usize, s: &StrategyProfile, game: &Game) -> Result<f64> {
    s.check_index(i)?;
    Ok(payoff_unchecked(i, s, game))
}

pub(crate) fn payoff_unchecked(i: usize, s: &StrategyProfile, game: &Game) -> f64 {
    let n = s.n();
    let mut rev = 0.0;
    let mut w = 0.0;
    for j in 0..n {
        if j == i {
            continue;
        }
        let (x, y) = (s.get(i, j), s.get(j, i));
        w += x;
        if x + y > 0.0 {
            rev += game.revenue(x, y);
        }
    }
    rev - game.cost_of(i, w)
}

/// Payoffs of all players.
pub fn payoffs(s: &StrategyProfile, game: &Game) -> Vec<f64> {
    (0..s.n()).map(|i| payoff_unchecked(i, s, game)).collect()
}

/// ∂π_i/∂s_ij for every `j`; the entry for `j = i` is zero.
pub fn payoff_gradient(i: usize, s: &StrategyProfile, game: &Game) -> Result<Vec<f64>> {
    s.check_index(i)?;
    let n = s.n();
    let mc = game.marginal_cost_of(i, s.total(i));
    let mut g = vec![0.0; n];
    for (j, gj) in g.iter_mut().enumerate() {
        if j == i {
            continue;
        }
        let m = game
            .marginal(s.get(i, j), s.get(j, i))
            .ok_or(Error::Singular { i, j })?;
        *gj = m - mc;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CostSpec, TechnologySpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn families() -> Vec<Game> {
        let mut out = Vec::new();
        for tech in [
            TechnologySpec::identity(),
            TechnologySpec::linear(2.0).unwrap(),
            TechnologySpec::power(1.0, 0.5).unwrap(),
        ] {
            for cost in [
                CostSpec::quadratic(),
                CostSpec::new(0.5, 1.0, 3.0).unwrap(),
                CostSpec::normalized_power(1.5).unwrap(),
            ] {
                for r in [0.0, 0.2] {
                    out.push(Game::benchmark().with_tech(tech).with_cost(cost).with_r(r));
                }
            }
        }
        out
    }

    fn random_profile(rng: &mut ChaCha8Rng, n: usize) -> StrategyProfile {
        let mut s = StrategyProfile::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s.set(i, j, rng.random_range(0.05..1.5));
                }
            }
        }
        s
    }

    #[test]
    fn payoff_examples() {
        let g = Game::benchmark();
        for i in 0..4 {
            assert_eq!(payoff(i, &StrategyProfile::zeros(4), &g).unwrap(), 0.0);
        }
        let x = 1.0 / (2.0 * 2f64.sqrt());
        let mut s = StrategyProfile::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    s.set(i, j, x);
                }
            }
        }
        assert!((payoff(0, &s, &g).unwrap() + 0.5).abs() < 1e-14);
        assert!(payoff(3, &s, &g).is_err());

        let mut b = StrategyProfile::zeros(12);
        for i in 0..10 {
            for j in 10..12 {
                b.set(i, j, 0.327);
                b.set(j, i, 0.146);
            }
        }
        let expected = 2.0 * (0.181 / 0.473) - (2.0f64 * 0.327).powi(2);
        assert!((payoff(0, &b, &g).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.3377).abs() < 1e-4);
    }

    #[test]
    fn gradient_examples() {
        let mut s = StrategyProfile::zeros(3);
        s.set(1, 2, 0.4);
        let g = Game::benchmark().with_r(1.0);
        let grad = payoff_gradient(0, &s, &g).unwrap();
        assert!((grad[1] - 1.0).abs() < 1e-15);
        assert!(matches!(
            payoff_gradient(0, &s, &Game::benchmark()),
            Err(Error::Singular { i: 0, j: 1 })
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for game in families() {
            for _ in 0..100 {
                let n = rng.random_range(2..6);
                let s = random_profile(&mut rng, n);
                let i = rng.random_range(0..n);
                let grad = payoff_gradient(i, &s, &game).unwrap();
                for j in (0..n).filter(|&j| j != i) {
                    let h = 1e-6 * s.get(i, j);
                    let mut up = s.clone();
                    up.set(i, j, s.get(i, j) + h);
                    let mut dn = s.clone();
                    dn.set(i, j, s.get(i, j) - h);
                    let num = (payoff(i, &up, &game).unwrap() - payoff(i, &dn, &game).unwrap()) / (2.0 * h);
                    let err = (num - grad[j]).abs() / grad[j].abs().max(1e-2);
                    assert!(err <= 1e-6, "{game:?}: {num} vs {}", grad[j]);
                }
            }
        }
    }

    #[test]
    fn concave_in_own_row_convex_in_opponents() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for game in families() {
            for _ in 0..20 {
                let n = 4;
                let s = random_profile(&mut rng, n);
                let i = 0;
                let h = 1e-4;
                // Own-row Hessian from gradient differences.
                let others: Vec<usize> = (1..n).collect();
                let mut hess = nalgebra::DMatrix::zeros(n - 1, n - 1);
                for (b, &k) in others.iter().enumerate() {
                    let mut up = s.clone();
                    up.set(i, k, s.get(i, k) + h);
                    let mut dn = s.clone();
                    dn.set(i, k, s.get(i, k) - h);
                    let gu = payoff_gradient(i, &up, &game).unwrap();
                    let gd = payoff_gradient(i, &dn, &game).unwrap();
                    for (a, &j) in others.iter().enumerate() {
                        hess[(a, b)] = (gu[j] - gd[j]) / (2.0 * h);
                    }
                }
                let sym = (&hess + hess.transpose()) * 0.5;
                let eig = sym.symmetric_eigenvalues();
                assert!(eig.iter().all(|&e| e <= 1e-6), "{eig:?}");
                // Convex in each opposing entry.
                for j in 1..n {
                    let f = |v: f64| {
                        let mut t = s.clone();
                        t.set(j, i, v);
                        payoff(i, &t, &game).unwrap()
                    };
                    let y = s.get(j, i);
                    let second = f(y + h) - 2.0 * f(y) + f(y - h);
                    assert!(second >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn welfare_is_minus_total_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let game = Game::benchmark().with_r(0.1);
        for _ in 0..20 {
            let s = random_profile(&mut rng, 5);
            let welfare: f64 = payoffs(&s, &game).iter().sum();
            let cost: f64 = (0..5).map(|i| game.cost.value(s.total(i))).sum();
            assert!((welfare + cost).abs() < 1e-12);
        }
    }
}
