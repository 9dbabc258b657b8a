//! Newton, best-response and gradient-flow iterations on a [`ContestSystem`].

use nalgebra::DMatrix;

use super::system::{as_vector, norm2, project_step, ContestSystem};
use crate::error::{Error, Result};

pub(crate) struct Outcome {
    pub z: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Replaces both sides of an unentered r = 0 contest by `fill`, where the
/// marginal is undefined.
fn lift_singular(sys: &ContestSystem, z: &mut [f64], fill: &[f64]) {
    if sys.game.r() > 0.0 {
        return;
    }
    for (e, v) in sys.vars.iter().enumerate() {
        if z[e] <= 0.0 && z[v.rev] <= 0.0 {
            z[e] = fill[e].max(1e-6);
            z[v.rev] = fill[v.rev].max(1e-6);
        }
    }
}

fn merit(sys: &ContestSystem, z: &[f64]) -> f64 {
    let g = sys.gradient(z);
    sys.kkt_terms(z, &g).iter().map(|t| t * t).sum()
}

/// Damped active-set Newton on the complementarity system.
pub(crate) fn newton(sys: &ContestSystem, z0: &[f64], tol: f64, max_iter: usize) -> Result<Outcome> {
    let m = sys.len();
    let barrier = sys.interior_barrier();
    let fill = sys.heuristic_start();
    let mut z: Vec<f64> = z0.iter().map(|x| x.max(0.0)).collect();
    lift_singular(sys, &mut z, &fill);
    let mut best = f64::INFINITY;
    for it in 0..max_iter {
        let g = sys.gradient(&z);
        let terms = sys.kkt_terms(&z, &g);
        let res = terms.iter().copied().fold(0.0, f64::max);
        best = best.min(res);
        if res <= tol {
            return Ok(Outcome {
                z,
                iterations: it,
                residual: res,
            });
        }
        let free: Vec<usize> = (0..m).filter(|&e| z[e] > 0.0 || g[e] > 0.0).collect();
        let jac = sys.jacobian(&z);
        let k = free.len();
        let sub = DMatrix::from_fn(k, k, |a, b| jac[(free[a], free[b])]);
        let rhs = -as_vector(&free.iter().map(|&e| g[e]).collect::<Vec<_>>());
        let step = sub.lu().solve(&rhs).ok_or_else(|| Error::NonConvergence {
            method: "newton".into(),
            iterations: it,
            residual: best,
        })?;
        let mut d = vec![0.0; m];
        for (a, &e) in free.iter().enumerate() {
            d[e] = step[a];
        }
        let m0: f64 = terms.iter().map(|t| t * t).sum();
        let mut t = 1.0;
        let mut accepted = None;
        let mut fallback = None;
        for _ in 0..=30 {
            let mut zt = project_step(&z, &d, t, barrier);
            lift_singular(sys, &mut zt, &fill);
            let mt = merit(sys, &zt);
            if mt <= (1.0 - 1e-4 * t) * m0 {
                accepted = Some(zt);
                break;
            }
            if mt < m0 && fallback.is_none() {
                fallback = Some(zt);
            }
            t *= 0.5;
        }
        match accepted.or(fallback) {
            Some(zt) => z = zt,
            None => {
                return Err(Error::NonConvergence {
                    method: "newton".into(),
                    iterations: it,
                    residual: best,
                })
            }
        }
    }
    let res = sys.kkt_residual(&z);
    if res <= tol {
        return Ok(Outcome {
            z,
            iterations: max_iter,
            residual: res,
        });
    }
    Err(Error::NonConvergence {
        method: "newton".into(),
        iterations: max_iter,
        residual: best.min(res),
    })
}

/// Gauss–Seidel sweeps of exact best responses, relaxed when the residual
/// stops falling.
pub(crate) fn best_response(sys: &ContestSystem, z0: &[f64], tol: f64, max_sweeps: usize) -> Result<Outcome> {
    let mut z: Vec<f64> = z0.iter().map(|x| x.max(0.0)).collect();
    let mut theta: f64 = 1.0;
    let mut prev = f64::INFINITY;
    let mut best = f64::INFINITY;
    for sweep in 0..max_sweeps {
        for o in 0..sys.classes() {
            let br = sys.best_response_owner(o, &z, 0.0);
            for (k, &e) in sys.by_owner[o].iter().enumerate() {
                z[e] = if theta < 1.0 {
                    (1.0 - theta) * z[e] + theta * br[k]
                } else {
                    br[k]
                };
            }
        }
        let res = sys.kkt_residual(&z);
        best = best.min(res);
        if res <= tol {
            return Ok(Outcome {
                z,
                iterations: sweep + 1,
                residual: res,
            });
        }
        if res > prev {
            theta = (theta * 0.7).max(0.1);
        }
        prev = res;
    }
    Err(Error::NonConvergence {
        method: "best_response".into(),
        iterations: max_sweeps,
        residual: best,
    })
}

/// Projected explicit Euler on ż = ∇π, accepting a step only when the norm
/// of the projected field drops.
pub(crate) fn gradient_flow(
    sys: &ContestSystem,
    z0: &[f64],
    tol: f64,
    max_steps: usize,
    h0: f64,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<Outcome> {
    let barrier = sys.interior_barrier();
    let fill = sys.heuristic_start();
    let mut z: Vec<f64> = z0.iter().map(|x| x.max(0.0)).collect();
    lift_singular(sys, &mut z, &fill);
    let mut f = sys.projected_field(&z);
    let mut nrm = norm2(&f);
    if let Some(t) = trace.as_deref_mut() {
        t.push(nrm);
    }
    let mut h = h0;
    let mut best = f64::INFINITY;
    for step in 0..max_steps {
        let res = sys.kkt_residual(&z);
        best = best.min(res);
        if res <= tol {
            return Ok(Outcome {
                z,
                iterations: step,
                residual: res,
            });
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut zt = project_step(&z, &f, h, barrier);
            lift_singular(sys, &mut zt, &fill);
            let ft = sys.projected_field(&zt);
            let nt = norm2(&ft);
            if nt < nrm {
                z = zt;
                f = ft;
                nrm = nt;
                h *= 1.2;
                accepted = true;
                break;
            }
            h *= 0.5;
        }
        if !accepted {
            break;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(nrm);
        }
    }
    let res = sys.kkt_residual(&z);
    if res <= tol {
        return Ok(Outcome {
            z,
            iterations: max_steps,
            residual: res,
        });
    }
    Err(Error::NonConvergence {
        method: "gradient_flow".into(),
        iterations: max_steps,
        residual: best.min(res),
    })
}
