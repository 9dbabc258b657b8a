//! Scalar root finding and maximisation.

use crate::error::{Error, Result};

/// Brent's method on a bracket with `f(lo)` and `f(hi)` of opposite sign.
pub(crate) fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::Bracketing(format!(
            "f({a:e}) = {fa:e} and f({b:e}) = {fb:e} do not bracket a root"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let rr = fb / fc;
                p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::Bracketing(format!("f({b:e}) is NaN")));
        }
    }
    Ok(b)
}

/// Root of a decreasing function on `(lo, ∞)` that is positive just above
/// `lo`. The bracket is grown outward from `start`; `f(lo)` is never evaluated.
pub(crate) fn root_decreasing<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    start: f64,
    xtol: f64,
) -> Result<f64> {
    let mut hi = if start > lo { start } else { lo + 1.0 };
    let mut fh = f(hi);
    let mut a = lo;
    let b;
    if fh > 0.0 {
        let mut n = 0;
        while fh > 0.0 {
            a = hi;
            hi = lo + 2.0 * (hi - lo);
            fh = f(hi);
            n += 1;
            if n > 2000 || !hi.is_finite() {
                return Err(Error::Bracketing(format!("no sign change found above {lo:e}")));
            }
        }
        b = hi;
    } else {
        if fh == 0.0 {
            return Ok(hi);
        }
        let mut mid = hi;
        let mut n = 0;
        loop {
            let prev = mid;
            mid = lo + 0.5 * (mid - lo);
            n += 1;
            if mid <= lo || n > 2000 {
                return Ok(lo);
            }
            let fm = f(mid);
            if fm > 0.0 {
                a = mid;
                b = prev;
                break;
            }
            if fm == 0.0 {
                return Ok(mid);
            }
        }
    }
    brent(f, a, b, xtol, 500)
}

/// Golden-section maximisation of a unimodal function on `[a, b]`.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..300 {
        if (b - a).abs() <= xtol * (1.0 + x1.abs()) {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Global maximisation over `[0, hi]`: dense logarithmic grid, then
/// golden-section refinement around the best grid point.
pub(crate) fn grid_max<F: FnMut(f64) -> f64>(mut f: F, hi: f64, points: usize) -> (f64, f64) {
    let mut xs = Vec::with_capacity(points + 2);
    xs.push(0.0);
    let lmin = (hi * 1e-10).ln();
    let lmax = hi.ln();
    for k in 0..=points {
        let t = k as f64 / points as f64;
        xs.push((lmin + t * (lmax - lmin)).exp());
    }
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = 0;
    for (k, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = k;
        }
    }
    let lo = if best == 0 { 0.0 } else { xs[best - 1] };
    let up = if best + 1 < xs.len() { xs[best + 1] } else { xs[best] };
    let (x, v) = golden_max(&mut f, lo, up, 1e-13);
    if v >= vals[best] {
        (x, v)
    } else {
        (xs[best], vals[best])
    }
}
