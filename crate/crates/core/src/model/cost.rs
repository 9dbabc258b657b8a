use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Effort cost c(x) = κ₁·x + κ₂·x^α with κ₁ ≥ 0, κ₂ > 0, α > 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCost", into = "RawCost")]
pub struct CostSpec {
    linear: f64,
    scale: f64,
    exponent: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCost {
    #[serde(default)]
    k1: f64,
    k2: f64,
    alpha: f64,
}

impl TryFrom<RawCost> for CostSpec {
    type Error = Error;

    fn try_from(raw: RawCost) -> Result<Self> {
        CostSpec::new(raw.k1, raw.k2, raw.alpha)
    }
}

impl From<CostSpec> for RawCost {
    fn from(c: CostSpec) -> Self {
        RawCost {
            k1: c.linear,
            k2: c.scale,
            alpha: c.exponent,
        }
    }
}

impl Default for CostSpec {
    fn default() -> Self {
        CostSpec::quadratic()
    }
}

impl CostSpec {
    pub fn new(k1: f64, k2: f64, alpha: f64) -> Result<Self> {
        if !(k1.is_finite() && k1 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "linear cost coefficient must be finite and >= 0, got {k1}"
            )));
        }
        if !(k2.is_finite() && k2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power cost coefficient must be finite and > 0, got {k2}"
            )));
        }
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cost exponent must be > 1, got {alpha}"
            )));
        }
        Ok(CostSpec {
            linear: k1,
            scale: k2,
            exponent: alpha,
        })
    }

    /// c(x) = x².
    pub fn quadratic() -> Self {
        CostSpec {
            linear: 0.0,
            scale: 1.0,
            exponent: 2.0,
        }
    }

    /// c(x) = (2/α)·x^α, whose marginal is 2x^(α−1).
    pub fn normalized_power(alpha: f64) -> Result<Self> {
        CostSpec::new(0.0, 2.0 / alpha, alpha)
    }

    pub fn linear_coefficient(&self) -> f64 {
        self.linear
    }

    pub fn power_coefficient(&self) -> f64 {
        self.scale
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// The same cost multiplied by `m > 0`.
    pub fn scaled(&self, m: f64) -> Result<Self> {
        CostSpec::new(self.linear * m, self.scale * m, self.exponent)
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.linear * x + self.scale * x.powf(self.exponent)
    }

    pub fn d1(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.linear + if self.exponent < 1.0 { f64::INFINITY } else { 0.0 };
        }
        self.linear + self.scale * self.exponent * x.powf(self.exponent - 1.0)
    }

    /// c″(x); at zero this is infinite for α < 2 and zero for α > 2.
    pub fn d2(&self, x: f64) -> f64 {
        let a = self.exponent;
        if x <= 0.0 {
            return if a < 2.0 {
                f64::INFINITY
            } else if a == 2.0 {
                2.0 * self.scale
            } else {
                0.0
            };
        }
        self.scale * a * (a - 1.0) * x.powf(a - 2.0)
    }

    /// Solves c′(x) = μ for x ≥ 0 (zero when μ ≤ c′(0)).
    pub fn marginal_inverse(&self, mu: f64) -> f64 {
        if mu <= self.linear {
            return 0.0;
        }
        ((mu - self.linear) / (self.scale * self.exponent)).powf(1.0 / (self.exponent - 1.0))
    }

    /// Solves c(x) = y for x ≥ 0.
    pub fn value_inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.value(hi) < y {
            hi *= 2.0;
        }
        crate::numeric::brent(|x| self.value(x) - y, 0.0, hi, 1e-15 * hi, 200).unwrap_or(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_coefficients() {
        assert!(CostSpec::new(-1.0, 1.0, 2.0).is_err());
        assert!(CostSpec::new(0.0, 0.0, 2.0).is_err());
        assert!(CostSpec::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn normalized_power_marginal() {
        for alpha in [1.5, 2.0, 3.0] {
            let c = CostSpec::normalized_power(alpha).unwrap();
            for x in [0.1, 0.7, 2.0] {
                assert!((c.d1(x) - 2.0 * x.powf(alpha - 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_and_inverses() {
        let c = CostSpec::new(0.3, 1.7, 2.6).unwrap();
        assert_eq!(c.value(0.0), 0.0);
        assert_eq!(c.d1(0.0), 0.3);
        for x in [0.01, 0.5, 1.0, 4.0] {
            let h = 1e-6 * x;
            let num = (c.value(x + h) - c.value(x - h)) / (2.0 * h);
            assert!((num - c.d1(x)).abs() < 1e-6 * c.d1(x));
            let num2 = (c.d1(x + h) - c.d1(x - h)) / (2.0 * h);
            assert!((num2 - c.d2(x)).abs() < 1e-6 * c.d2(x));
            assert!((c.marginal_inverse(c.d1(x)) - x).abs() < 1e-12 * x.max(1.0));
            assert!((c.value_inverse(c.value(x)) - x).abs() < 1e-10);
        }
    }
}
