use proptest::prelude::*;

use contestnet::analytics::{attacker_link_benefit_f, contest_value, deviation_value_h, total_spending_sign_condition};
use contestnet::dynamics::canonical_form;
use contestnet::model::{CostSpec, Game, Structure};
use contestnet::solver::{solve_bipartite, solve_equilibrium, SolveOptions};
use contestnet::stability::{
    check_lfps, check_nash, check_strong_pairwise, classify_partition, validate_mpartite, SearchConfig,
};

/// All four-player structures up to relabelling, plus a few larger ones.
fn corpus() -> Vec<Structure> {
    let mut masks: Vec<u64> = (0..64u64).map(|m| canonical_form(&Structure::from_edge_mask(4, m)).edge_mask()).collect();
    masks.sort_unstable();
    masks.dedup();
    let mut out: Vec<Structure> = masks.into_iter().map(|m| Structure::from_edge_mask(4, m)).collect();
    out.extend([
        Structure::complete_bipartite(10, 2),
        Structure::complete_bipartite(5, 1),
        Structure::complete_multipartite(&[3, 2, 1]),
        Structure::complete(5),
        Structure::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap(),
    ]);
    out
}

fn games() -> Vec<Game> {
    vec![
        Game::benchmark(),
        Game::benchmark().with_r(0.05),
        Game::benchmark().with_cost(CostSpec::new(0.0, 1.0, 3.0).unwrap()),
    ]
}

/// A player who fights a weaker j also fights every other k at least as weak.
fn attackers_reach_weakest(g: &Structure, w: &[f64]) -> bool {
    let n = g.n();
    (0..n).all(|i| {
        g.neighbors(i).iter().filter(|&&j| w[i] < w[j] - 1e-9).all(|&j| {
            (0..n)
                .filter(|&k| k != i && k != j && w[k] >= w[j] - 1e-9)
                .all(|k| g.has_edge(i, k))
        })
    })
}

#[test]
fn refinement_chain_and_stable_structure_shape() {
    let cfg = SearchConfig::default();
    let mut lfps_stable = 0;
    for game in games() {
        for g in corpus() {
            let eq = solve_equilibrium(&g, &game, &SolveOptions::default()).unwrap();
            let nash = check_nash(&eq.profile, &game, 1e-9).unwrap();
            let sps = check_strong_pairwise(&eq.profile, &game, 1e-9).unwrap();
            if sps.is_stable() {
                assert!(nash.is_stable(), "{g:?}");
            }
            for c in [&nash.certificate, &sps.certificate].into_iter().flatten() {
                assert!(c.replay_error(&eq.profile, &game) < 1e-9);
            }
            let lfps = check_lfps(&g, &game, &cfg).unwrap();
            if let Some(c) = &lfps.certificate {
                assert!(c.replay_error(&eq.profile, &game) < 1e-9);
            }
            if lfps.is_stable() {
                lfps_stable += 1;
                let part = classify_partition(&eq, 1e-6).unwrap();
                let v = validate_mpartite(&part, &eq.profile.induced_structure());
                assert!(v.passes, "{g:?}: {:?}", v.violations);
                assert!(attackers_reach_weakest(&eq.profile.induced_structure(), &eq.totals), "{g:?}");
            }
        }
    }
    assert!(lfps_stable >= 3);
}

#[test]
fn lfps_on_bipartite_follows_sign_of_f() {
    let game = Game::benchmark();
    let cfg = SearchConfig::default();
    for n in 4..=12usize {
        for v in 1..=n / 2 {
            let a = n - v;
            let f = attacker_link_benefit_f(a as f64, v as f64, &game).unwrap();
            let stable = check_lfps(&Structure::complete_bipartite(a, v), &game, &cfg).unwrap().is_stable();
            assert_eq!(stable, f < 0.0, "B({a},{v}): f = {f}");
        }
    }
}

#[test]
fn f_with_one_victim_is_minus_h() {
    for a in [2.0, 3.0, 10.0, 35.0] {
        for r in [0.0, 0.02] {
            let game = Game::benchmark().with_r(r);
            let s = solve_bipartite(a, 1.0, &game, 1e-13).unwrap().victim_effort;
            let f = attacker_link_benefit_f(a, 1.0, &game).unwrap();
            let h = deviation_value_h(1.0, s, r, &CostSpec::quadratic()).unwrap();
            assert!((f + h).abs() < 1e-12, "a = {a}, r = {r}");
            assert_eq!(contest_value(0.0, s, &game).unwrap(), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sign_inequality_persists_for_steeper_costs(a in 1usize..80, v in 1usize..12) {
        let (a, v) = (a as f64, v as f64);
        let at = |alpha: f64| {
            let game = Game::benchmark().with_cost(CostSpec::new(0.0, 1.0, alpha).unwrap());
            total_spending_sign_condition(a, v, &game).unwrap().predicts_increase
        };
        if at(2.0) {
            for alpha in [2.5, 3.0, 4.0] {
                prop_assert!(at(alpha), "a = {}, v = {}, alpha = {}", a, v, alpha);
            }
        }
    }

    #[test]
    fn strong_pairwise_implies_nash_on_random_structures(mask in 0u64..1024, r in 0.0f64..0.3) {
        let g = Structure::from_edge_mask(5, mask);
        let game = Game::benchmark().with_r(r);
        let eq = solve_equilibrium(&g, &game, &SolveOptions::default()).unwrap();
        let sps = check_strong_pairwise(&eq.profile, &game, 1e-9).unwrap();
        if sps.is_stable() {
            prop_assert!(check_nash(&eq.profile, &game, 1e-9).unwrap().is_stable());
        }
    }
}
