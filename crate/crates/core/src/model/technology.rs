use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TechnologyKind {
    Linear,
    Power,
}

/// Contest technology φ(x) = λ·x^β with β ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTechnology", into = "RawTechnology")]
pub struct TechnologySpec {
    kind: TechnologyKind,
    scale: f64,
    exponent: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTechnology {
    kind: TechnologyKind,
    #[serde(default = "one")]
    lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawTechnology> for TechnologySpec {
    type Error = Error;

    fn try_from(raw: RawTechnology) -> Result<Self> {
        match raw.kind {
            TechnologyKind::Linear => {
                if let Some(b) = raw.beta {
                    if b != 1.0 {
                        return Err(Error::InvalidParameter(format!(
                            "linear technology has beta = 1, got {b}"
                        )));
                    }
                }
                TechnologySpec::linear(raw.lambda)
            }
            TechnologyKind::Power => {
                let beta = raw.beta.ok_or_else(|| {
                    Error::InvalidParameter("power technology needs beta".into())
                })?;
                TechnologySpec::power(raw.lambda, beta)
            }
        }
    }
}

impl From<TechnologySpec> for RawTechnology {
    fn from(t: TechnologySpec) -> Self {
        RawTechnology {
            kind: t.kind,
            lambda: t.scale,
            beta: match t.kind {
                TechnologyKind::Linear => None,
                TechnologyKind::Power => Some(t.exponent),
            },
        }
    }
}

impl Default for TechnologySpec {
    fn default() -> Self {
        TechnologySpec::identity()
    }
}

impl TechnologySpec {
    /// φ(x) = x.
    pub fn identity() -> Self {
        TechnologySpec {
            kind: TechnologyKind::Linear,
            scale: 1.0,
            exponent: 1.0,
        }
    }

    pub fn linear(lambda: f64) -> Result<Self> {
        check_scale(lambda)?;
        Ok(TechnologySpec {
            kind: TechnologyKind::Linear,
            scale: lambda,
            exponent: 1.0,
        })
    }

    pub fn power(lambda: f64, beta: f64) -> Result<Self> {
        check_scale(lambda)?;
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "technology exponent must lie in (0, 1], got {beta}"
            )));
        }
        Ok(TechnologySpec {
            kind: TechnologyKind::Power,
            scale: lambda,
            exponent: beta,
        })
    }

    pub fn kind(&self) -> TechnologyKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// True when φ is linear (including the power kind with β = 1).
    pub fn is_linear(&self) -> bool {
        self.exponent == 1.0
    }

    pub fn value(&self, x: f64) -> f64 {
        if self.is_linear() {
            self.scale * x
        } else if x <= 0.0 {
            0.0
        } else {
            self.scale * x.powf(self.exponent)
        }
    }

    /// φ′(x); infinite at zero when β < 1.
    pub fn d1(&self, x: f64) -> f64 {
        if self.is_linear() {
            self.scale
        } else if x <= 0.0 {
            f64::INFINITY
        } else {
            self.scale * self.exponent * x.powf(self.exponent - 1.0)
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        if self.is_linear() {
            0.0
        } else if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            let b = self.exponent;
            self.scale * b * (b - 1.0) * x.powf(b - 2.0)
        }
    }
}

fn check_scale(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "technology scale must be positive and finite, got {lambda}"
        )))
    }
}
