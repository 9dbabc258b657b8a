use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Game;
use crate::solver::{solve_bipartite, BipartiteEquilibrium};

/// Sign test for dw*/dr at r → 0 under linear technology and power cost,
/// as a comparison `lhs > rhs ⇔ dw*/dr > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignCondition {
    pub lhs: f64,
    pub rhs: f64,
    pub predicts_increase: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RDerivatives {
    /// d s_ij / dr for attacker i against victim j.
    pub attacker_effort: f64,
    /// d s_ji / dr.
    pub victim_effort: f64,
    /// d w* / dr with w* the sum of all totals.
    pub total_spending: f64,
    pub sign_condition: Option<SignCondition>,
}

/// The r → 0 sign test for c ∝ x^α, α ≥ 2, φ linear. Returns `None`
/// outside that family.
pub fn total_spending_sign_condition(a: f64, v: f64, game: &Game) -> Option<SignCondition> {
    let alpha = game.cost.exponent();
    if !game.tech.is_linear() || game.cost.linear_coefficient() != 0.0 || alpha < 2.0 {
        return None;
    }
    let p = (alpha - 1.0) / alpha;
    let am = a.powf(alpha - 1.0);
    let vm = v.powf(alpha - 1.0);
    let lhs = (am - 3.0 * vm) + (v / a).powf(p) * (vm - 3.0 * am);
    let rhs = 2.0 / (alpha - 1.0) * (a.powf(p) + v.powf(p)) * v.powf((alpha - 1.0).powi(2) / alpha);
    Some(SignCondition {
        lhs,
        rhs,
        predicts_increase: lhs > rhs,
    })
}

/// Derivatives of the bipartite equilibrium efforts with respect to r,
/// from the implicit-function theorem applied to both first-order
/// conditions at the solved equilibrium.
pub fn effort_derivatives_r(eq: &BipartiteEquilibrium, game: &Game) -> Result<RDerivatives> {
    let (x, y) = (eq.attacker_effort, eq.victim_effort);
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::NonInterior(format!(
            "bipartite efforts ({x:e}, {y:e}) are not both positive"
        )));
    }
    let (a, v) = (eq.a, eq.v);
    let t = game.transfer();
    let r = game.r();
    let tech = &game.tech;
    let (px, py) = (tech.value(x), tech.value(y));
    let (d1x, d1y) = (tech.d1(x), tech.d1(y));
    let k = r + px + py;
    let c2a = game.cost.d2(v * x);
    let c2v = game.cost.d2(a * y);
    // F_A = m(x; y) − c′(v x), F_V = m(y; x) − c′(a y).
    let fa_x = game.marginal_dx(x, y) - v * c2a;
    let fa_y = game.marginal_dy(x, y);
    let fv_x = game.marginal_dy(y, x);
    let fv_y = game.marginal_dx(y, x) - a * c2v;
    let fa_r = t * d1x * (1.0 / (k * k) - 2.0 * (r + 2.0 * py) / (k * k * k));
    let fv_r = t * d1y * (1.0 / (k * k) - 2.0 * (r + 2.0 * px) / (k * k * k));
    let jac = Matrix2::new(fa_x, fa_y, fv_x, fv_y);
    let d = jac
        .lu()
        .solve(&Vector2::new(-fa_r, -fv_r))
        .ok_or_else(|| Error::NonInterior("singular first-order system".into()))?;
    Ok(RDerivatives {
        attacker_effort: d[0],
        victim_effort: d[1],
        total_spending: a * v * (d[0] + d[1]),
        sign_condition: total_spending_sign_condition(a, v, game),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockedRole {
    Attacker,
    Victim,
}

/// Responses of equilibrium totals to a marginal increase in one player's
/// cost multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockDerivatives {
    pub shocked: f64,
    /// Another member of the shocked player's class; `None` if the class is
    /// a singleton.
    pub same_class: Option<f64>,
    pub other_class: f64,
    pub total_spending: f64,
}

/// Derivatives of equilibrium totals in B(a, v) with respect to a cost
/// shock ε on one player, at ε = 0. Uses the interior pairwise closed
/// form s_pq = 2Tμ_q/(μ_p + μ_q)² − r/(2λ), μ = (1+ε)c′(w), differentiated
/// into a 3×3 linear system in the shocked, same-class and other-class totals.
pub fn cost_shock_derivatives(a: usize, v: usize, role: ShockedRole, game: &Game) -> Result<ShockDerivatives> {
    if !game.tech.is_linear() {
        return Err(Error::InvalidParameter("cost-shock statics need linear technology".into()));
    }
    if a == 0 || v == 0 {
        return Err(Error::InvalidParameter("class sizes must be >= 1".into()));
    }
    let base = Game { shock: None, ..*game };
    let eq = solve_bipartite(a as f64, v as f64, &base, 1e-13)?;
    if !(eq.attacker_effort > 0.0 && eq.victim_effort > 0.0) {
        return Err(Error::NonInterior("bipartite equilibrium is not interior".into()));
    }
    let (m_own, m_oth, w_own, w_oth) = match role {
        ShockedRole::Attacker => (a as f64, v as f64, eq.attacker_total(), eq.victim_total()),
        ShockedRole::Victim => (v as f64, a as f64, eq.victim_total(), eq.attacker_total()),
    };
    let t = base.transfer();
    let mu_own = base.cost.d1(w_own);
    let mu_oth = base.cost.d1(w_oth);
    let c2_own = base.cost.d2(w_own);
    let c2_oth = base.cost.d2(w_oth);
    let s3 = (mu_own + mu_oth).powi(3);
    // Partials of F(μ_p, μ_q) = 2Tμ_q/(μ_p+μ_q)².
    let fp = |q: f64| -4.0 * t * q / s3;
    let fq = |p: f64, q: f64| 2.0 * t * (p - q) / s3;
    let (fp_o, fq_o) = (fp(mu_oth), fq(mu_own, mu_oth));
    let (fp_t, fq_t) = (fp(mu_own), fq(mu_oth, mu_own));
    let diag = 1.0 - m_oth * fp_o * c2_own;
    let m = Matrix3::new(
        diag,
        0.0,
        -m_oth * fq_o * c2_oth,
        0.0,
        diag,
        -m_oth * fq_o * c2_oth,
        -fq_t * c2_own,
        -(m_own - 1.0) * fq_t * c2_own,
        1.0 - m_own * fp_t * c2_oth,
    );
    let rhs = Vector3::new(m_oth * fp_o * mu_own, 0.0, fq_t * mu_own);
    let d = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NonInterior("singular shock system".into()))?;
    Ok(ShockDerivatives {
        shocked: d[0],
        same_class: (m_own > 1.0).then_some(d[1]),
        other_class: d[2],
        total_spending: d[0] + (m_own - 1.0) * d[1] + m_oth * d[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CostSpec, Structure, TechnologySpec};
    use crate::solver::{solve_equilibrium, SolveOptions};

    /// Printed closed form for the r-derivatives, valid for linear φ.
    fn omega_form(a: f64, v: f64, x: f64, y: f64, r: f64, lam: f64, cost: &CostSpec) -> (f64, f64) {
        let (px, py, d1) = (lam * x, lam * y, lam);
        let c1 = cost.d2(v * x);
        let c2 = cost.d2(a * y);
        let k = r + px + py;
        let om = (c1 * k * k * v) * (a * c2 * k.powi(3) + (r + 2.0 * px) * 2.0 * d1 * d1)
            + 2.0 * d1 * d1 * (a * c2 * k * k * r + 2.0 * a * c2 * k * k * py + 2.0 * d1 * d1 * k);
        let dx = -d1 * (2.0 * k * d1 * d1 + (-px + 3.0 * py + r) * (a * k * k * c2)) / om;
        let dy = -d1 * (2.0 * k * d1 * d1 + (3.0 * px - py + r) * (v * k * k * c1)) / om;
        (dx, dy)
    }

    #[test]
    fn matches_printed_form_for_linear_technology() {
        for (a, v, alpha, lam) in [(4.0, 1.0, 2.0, 1.0), (10.0, 2.0, 3.0, 2.0), (5.0, 2.0, 2.5, 0.5)] {
            let cost = CostSpec::normalized_power(alpha).unwrap();
            let game = Game::benchmark()
                .with_r(0.01)
                .with_cost(cost)
                .with_tech(TechnologySpec::linear(lam).unwrap());
            let eq = solve_bipartite(a, v, &game, 1e-13).unwrap();
            let d = effort_derivatives_r(&eq, &game).unwrap();
            let (dx, dy) = omega_form(a, v, eq.attacker_effort, eq.victim_effort, 0.01, lam, &cost);
            assert!((d.attacker_effort - dx).abs() < 1e-9 * dx.abs().max(1.0));
            assert!((d.victim_effort - dy).abs() < 1e-9 * dy.abs().max(1.0));
        }
    }

    #[test]
    fn matches_finite_differences_for_power_technology() {
        let base = Game::benchmark()
            .with_tech(TechnologySpec::power(1.0, 0.6).unwrap())
            .with_transfer(1.3);
        for (a, v, r) in [(4.0, 1.0, 0.05), (10.0, 2.0, 0.1)] {
            let game = base.with_r(r);
            let eq = solve_bipartite(a, v, &game, 1e-13).unwrap();
            let d = effort_derivatives_r(&eq, &game).unwrap();
            let h = 1e-5;
            let up = solve_bipartite(a, v, &base.with_r(r + h), 1e-14).unwrap();
            let dn = solve_bipartite(a, v, &base.with_r(r - h), 1e-14).unwrap();
            let fx = (up.attacker_effort - dn.attacker_effort) / (2.0 * h);
            let fy = (up.victim_effort - dn.victim_effort) / (2.0 * h);
            assert!((d.attacker_effort - fx).abs() < 1e-6 * fx.abs());
            assert!((d.victim_effort - fy).abs() < 1e-6 * fy.abs());
        }
    }

    #[test]
    fn sign_condition_examples() {
        let g = Game::benchmark();
        let c35 = total_spending_sign_condition(35.0, 1.0, &g).unwrap();
        assert!(c35.predicts_increase);
        assert!((c35.lhs - 14.42).abs() < 0.01 && (c35.rhs - 13.83).abs() < 0.01);
        let c4 = total_spending_sign_condition(4.0, 1.0, &g).unwrap();
        assert!(!c4.predicts_increase);
        assert!((c4.lhs + 4.5).abs() < 1e-12 && (c4.rhs - 6.0).abs() < 1e-12);
        assert!(total_spending_sign_condition(4.0, 1.0, &g.with_tech(TechnologySpec::power(1.0, 0.5).unwrap())).is_none());
    }

    #[test]
    fn non_interior_rejected() {
        let eq = BipartiteEquilibrium {
            a: 2.0,
            v: 1.0,
            attacker_effort: 0.3,
            victim_effort: 0.0,
        };
        assert!(matches!(effort_derivatives_r(&eq, &Game::benchmark()), Err(Error::NonInterior(_))));
    }

    #[test]
    fn cost_shock_matches_finite_differences() {
        let game = Game::benchmark();
        for (a, v) in [(5, 2), (10, 2), (35, 1)] {
            let g = Structure::complete_bipartite(a, v);
            for (role, k, same, other) in [
                (ShockedRole::Attacker, 0, 1, a),
                (ShockedRole::Victim, a, a + 1, 0),
            ] {
                let d = cost_shock_derivatives(a, v, role, &game).unwrap();
                let eps = 1e-6;
                let opts = SolveOptions::default().with_tol(1e-14).with_method(crate::solver::Method::Newton);
                let up = solve_equilibrium(&g, &game.with_shock(k, eps), &opts).unwrap().totals;
                let dn = solve_equilibrium(&g, &game.with_shock(k, -eps), &opts).unwrap().totals;
                let fd = |i: usize| (up[i] - dn[i]) / (2.0 * eps);
                let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
                assert!(rel(d.shocked, fd(k)) < 1e-3);
                if let Some(s) = d.same_class {
                    assert!(rel(s, fd(same)) < 1e-3, "{a},{v},{role:?}: {s} vs {}", fd(same));
                }
                assert!(rel(d.other_class, fd(other)) < 1e-3);
                let total: f64 = (0..a + v).map(fd).sum();
                assert!(rel(d.total_spending, total) < 1e-3);
                assert!(d.total_spending < 0.0);
            }
        }
    }

    #[test]
    fn cost_shock_signs() {
        let d = cost_shock_derivatives(5, 2, ShockedRole::Attacker, &Game::benchmark()).unwrap();
        assert!(d.shocked < 0.0 && d.same_class.unwrap() < 0.0 && d.other_class > 0.0);
        let d = cost_shock_derivatives(5, 2, ShockedRole::Victim, &Game::benchmark()).unwrap();
        assert!(d.shocked < 0.0 && d.same_class.unwrap() < 0.0 && d.other_class < 0.0);
    }
}
