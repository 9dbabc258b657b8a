use super::*;
use crate::model::{CostSpec, TechnologySpec};
use proptest::prelude::*;

fn opts(method: Method) -> SolveOptions {
    SolveOptions::default().with_method(method)
}

const METHODS: [Method; 3] = [Method::Newton, Method::BestResponse, Method::GradientFlow];

#[test]
fn empty_structure_gives_zero_profile() {
    let eq = solve_equilibrium(&Structure::empty(4), &Game::benchmark(), &SolveOptions::default()).unwrap();
    assert_eq!(eq.profile, StrategyProfile::zeros(4));
}

#[test]
fn complete_three_symmetric() {
    let x = 1.0 / (2.0 * 2f64.sqrt());
    for m in METHODS {
        let eq = solve_equilibrium(&Structure::complete(3), &Game::benchmark(), &opts(m)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((eq.profile.get(i, j) - x).abs() < 1e-9, "{m}");
                }
            }
        }
        assert!(eq.residual <= 1e-10);
    }
}

#[test]
fn bipartite_ten_two() {
    let g = Structure::complete_bipartite(10, 2);
    let (cx, cy) = closed_form_bipartite(10.0, 2.0, 2.0).unwrap();
    for m in METHODS {
        let eq = solve_equilibrium(&g, &Game::benchmark(), &opts(m)).unwrap();
        assert!((eq.profile.get(0, 10) - cx).abs() < 1e-9, "{m}");
        assert!((eq.profile.get(10, 0) - cy).abs() < 1e-9, "{m}");
    }
    // Attacker FOC 2y/(x+y)² = c′(2x), victim FOC 2x/(x+y)² = c′(10y).
    let k = (cx + cy).powi(2);
    assert!((cy / k - 2.0 * cx).abs() < 1e-12 && (cx / k - 10.0 * cy).abs() < 1e-12);
    assert!((cx - 0.326746).abs() < 1e-6 && (cy - 0.146125).abs() < 1e-6);
    assert!((cx - 0.327).abs() < 5e-4 && (cy - 0.146).abs() < 5e-4);
}

#[test]
fn closed_form_examples() {
    let (x, y) = closed_form_bipartite(1.0, 1.0, 2.0).unwrap();
    assert!((x - 0.5).abs() < 1e-15 && (y - 0.5).abs() < 1e-15);
    let (x, y) = closed_form_bipartite(3.0, 1.0, 2.0).unwrap();
    assert!((x - 0.48172).abs() < 5e-6 && (y - 0.27812).abs() < 5e-6);
    let alpha = 3.0;
    let (x, y) = closed_form_bipartite(5.0, 2.0, alpha).unwrap();
    assert!((y - (2.0f64 / 5.0).powf((alpha - 1.0) / alpha) * x).abs() < 1e-15);
    assert!(closed_form_bipartite(2.0, 1.0, 1.5).is_err());
}

#[test]
fn methods_agree_on_irregular_structure() {
    let g = Structure::new(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5), (0, 5)]).unwrap();
    for game in [
        Game::benchmark(),
        Game::benchmark().with_r(0.3).with_tech(TechnologySpec::power(1.0, 0.5).unwrap()),
        Game::benchmark().with_cost(CostSpec::new(0.2, 1.0, 3.0).unwrap()).with_r(0.05),
    ] {
        let sols: Vec<_> = METHODS
            .iter()
            .map(|&m| solve_equilibrium(&g, &game, &opts(m)).unwrap())
            .collect();
        for a in &sols {
            for b in &sols {
                assert!(a.profile.max_abs_diff(&b.profile) <= 1e-9);
            }
        }
    }
}

#[test]
fn boundary_equilibrium_when_entry_unprofitable() {
    // Marginal at zero T·φ′(0)/r = 0.5 below c′(0) = 1: nobody fights.
    let game = Game::benchmark().with_r(2.0).with_cost(CostSpec::new(1.0, 1.0, 2.0).unwrap());
    for m in METHODS {
        let eq = solve_equilibrium(&Structure::complete(4), &game, &opts(m)).unwrap();
        assert!(eq.profile.totals().iter().all(|&w| w == 0.0), "{m}");
    }
}

#[test]
fn random_initial_points_reach_one_profile() {
    let g = Structure::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]).unwrap();
    let game = Game::benchmark().with_r(0.1);
    for m in METHODS {
        let base = solve_equilibrium(&g, &game, &opts(m)).unwrap();
        for seed in 0..10 {
            let eq = solve_equilibrium(&g, &game, &opts(m).with_seed(seed)).unwrap();
            assert!(eq.profile.max_abs_diff(&base.profile) < 1e-6);
        }
    }
}

#[test]
fn partition_reduction_matches_full_solve() {
    for sizes in [vec![3, 1], vec![4, 2, 1], vec![5, 3, 2], vec![1, 1, 1, 1]] {
        for game in [Game::benchmark(), Game::benchmark().with_r(0.2).with_transfer(2.0)] {
            let red = solve_partition(&sizes, &game, &SolveOptions::default()).unwrap();
            let g = Structure::complete_multipartite(&sizes);
            let full = solve_equilibrium(&g, &game, &SolveOptions::default()).unwrap();
            assert!(red.profile.max_abs_diff(&full.profile) <= 1e-8, "{sizes:?}");
        }
    }
}

#[test]
fn reduced_bipartite_matches_closed_form() {
    for (a, v) in [(1.0, 1.0), (3.0, 1.0), (10.0, 2.0), (20.0, 5.0)] {
        for alpha in [2.0, 3.0] {
            let game = Game::benchmark().with_cost(CostSpec::normalized_power(alpha).unwrap());
            let b = solve_bipartite(a, v, &game, 1e-12).unwrap();
            let (x, y) = closed_form_bipartite(a, v, alpha).unwrap();
            assert!((b.attacker_effort - x).abs() < 1e-10);
            assert!((b.victim_effort - y).abs() < 1e-10);
        }
    }
}

#[test]
fn closed_form_holds_for_any_linear_scale_without_draws() {
    let game = Game::benchmark().with_tech(TechnologySpec::linear(3.7).unwrap());
    let b = solve_bipartite(4.0, 2.0, &game, 1e-12).unwrap();
    let (x, y) = closed_form_bipartite(4.0, 2.0, 2.0).unwrap();
    assert!((b.attacker_effort - x).abs() < 1e-10 && (b.victim_effort - y).abs() < 1e-10);
}

#[test]
fn anticipated_reply_examples() {
    let g = Game::benchmark();
    let x = anticipated_reply(1.0, 0.0, &g).unwrap();
    assert!((x * (1.0 + x).powi(2) - 1.0).abs() < 1e-12);
    assert!((x - 0.46557).abs() < 5e-6);
    assert!((anticipated_reply(0.5, 0.0, &g).unwrap() - 0.5).abs() < 1e-12);
    let blocked = Game::benchmark().with_r(2.0).with_cost(CostSpec::new(1.0, 1.0, 2.0).unwrap());
    assert_eq!(anticipated_reply(0.0, 0.3, &blocked).unwrap(), 0.0);
    assert!(anticipated_reply(-1.0, 0.0, &g).is_err());
}

#[test]
fn best_response_row_examples() {
    let g = Structure::complete(2);
    let mut s = StrategyProfile::zeros(2);
    s.set(1, 0, 0.5);
    let row = best_response_row(0, &s, &g, &Game::benchmark()).unwrap();
    assert!((row[1] - 0.5).abs() < 1e-12);

    let blocked = Game::benchmark().with_r(5.0).with_cost(CostSpec::new(1.0, 1.0, 2.0).unwrap());
    let zero = best_response_row(0, &StrategyProfile::zeros(2), &g, &blocked).unwrap();
    assert_eq!(zero, vec![0.0, 0.0]);

    let eq = solve_equilibrium(&Structure::complete_bipartite(3, 2), &Game::benchmark(), &SolveOptions::default())
        .unwrap();
    for i in 0..5 {
        let row = best_response_row(i, &eq.profile, &Structure::complete_bipartite(3, 2), &Game::benchmark()).unwrap();
        for (j, &x) in row.iter().enumerate() {
            assert!((x - eq.profile.get(i, j)).abs() < 1e-9);
        }
    }
}

#[test]
fn w_fixed_point_examples() {
    let game = Game::benchmark();
    assert_eq!(w_fixed_point(&Structure::empty(3), &game).unwrap(), vec![0.0; 3]);
    let w = w_fixed_point(&Structure::complete_bipartite(3, 1), &game).unwrap();
    assert!((w[0] - 0.48172).abs() < 5e-6 && (w[3] - 0.83436).abs() < 5e-6);
    let mu = |x: f64| 2.0 * x;
    assert!((2.0 * mu(w[3]) / (mu(w[0]) + mu(w[3])).powi(2) - w[0]).abs() < 1e-12);
    let w = w_fixed_point(&Structure::complete_bipartite(10, 2), &game).unwrap();
    assert!((w[0] - 0.653491).abs() < 1e-6 && (w[11] - 1.461251).abs() < 1e-6);
}

#[test]
fn w_fixed_point_matches_row_sums() {
    let g = Structure::new(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)]).unwrap();
    for game in [
        Game::benchmark(),
        Game::benchmark().with_r(0.01).with_tech(TechnologySpec::linear(2.0).unwrap()),
        Game::benchmark().with_shock(2, 0.3).with_transfer(1.5),
    ] {
        let w = w_fixed_point(&g, &game).unwrap();
        let eq = solve_equilibrium(&g, &game, &SolveOptions::default()).unwrap();
        assert!(eq.all_interior());
        for i in 0..6 {
            assert!((w[i] - eq.totals[i]).abs() < 1e-8);
        }
    }
}

#[test]
fn interiority_with_unbounded_marginal_or_small_r() {
    let g = Structure::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 2)]).unwrap();
    for game in [
        Game::benchmark().with_r(0.5).with_tech(TechnologySpec::power(1.0, 0.6).unwrap()),
        Game::benchmark().with_r(1e-3),
    ] {
        let eq = solve_equilibrium(&g, &game, &SolveOptions::default()).unwrap();
        assert!(eq.all_interior());
    }
}

#[test]
fn invalid_inputs_rejected() {
    let g = Structure::complete(3);
    assert!(solve_equilibrium(&g, &Game::benchmark(), &SolveOptions::default().with_tol(0.0)).is_err());
    assert!("bogus".parse::<Method>().is_err());
    assert_eq!("gradient_flow".parse::<Method>().unwrap(), Method::GradientFlow);
}

#[test]
fn nested_neighborhoods_order_totals() {
    // N_0 = {2} ⊊ N_1 = {2, 3}.
    let g = Structure::new(5, &[(0, 2), (1, 2), (1, 3), (3, 4), (2, 4)]).unwrap();
    let eq = solve_equilibrium(&g, &Game::benchmark(), &SolveOptions::default()).unwrap();
    assert!(eq.totals[0] < eq.totals[1]);
}

fn random_structure(n: usize, mask: u64) -> Structure {
    let pairs = n * (n - 1) / 2;
    Structure::from_edge_mask(n, mask & ((1u64 << pairs) - 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn strength_ordering(n in 3usize..7, mask in any::<u64>(), r in 0.0f64..0.5) {
        let g = random_structure(n, mask);
        let game = Game::benchmark().with_r(r);
        let eq = solve_equilibrium(&g, &game, &SolveOptions::default()).unwrap();
        prop_assert!(eq.residual <= 1e-10);
        for (i, j) in g.edges() {
            let (wi, wj) = (eq.totals[i], eq.totals[j]);
            let (sij, sji) = (eq.profile.get(i, j), eq.profile.get(j, i));
            if (wi - wj).abs() <= 1e-9 {
                prop_assert!((sij - sji).abs() <= 1e-7);
            } else if wi > wj {
                prop_assert!(sij < sji + 1e-12);
            } else {
                prop_assert!(sji < sij + 1e-12);
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && !g.has_edge(i, j) {
                    prop_assert_eq!(eq.profile.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn nested_neighborhoods_random(n in 4usize..7, mask in any::<u64>()) {
        let g = random_structure(n, mask);
        let eq = solve_equilibrium(&g, &Game::benchmark(), &SolveOptions::default()).unwrap();
        for i in 0..n {
            for j in 0..n {
                let ni = g.neighbors(i);
                let nj = g.neighbors(j);
                if i != j && !ni.is_empty() && ni.len() < nj.len() && ni.iter().all(|k| nj.contains(k)) {
                    prop_assert!(eq.totals[i] < eq.totals[j]);
                }
            }
        }
    }
}
