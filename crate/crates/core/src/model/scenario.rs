use serde::{Deserialize, Serialize};

use super::{ContestParams, CostShock, CostSpec, Game, Structure, TechnologySpec};
use crate::error::{Error, Result};

/// File description of a game and its structure.
///
/// Either `edges` or `partition_sizes` (complete multipartite shorthand) is
/// given; players are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub phi: TechnologySpec,
    #[serde(default)]
    pub cost: CostSpec,
    #[serde(default)]
    pub r: f64,
    #[serde(rename = "T", default = "unit")]
    pub transfer: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shock: Option<CostShock>,
}

fn unit() -> f64 {
    1.0
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.edges, &self.partition_sizes) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidInput(
                    "give either edges or partition_sizes, not both".into(),
                ))
            }
            (None, Some(p)) => {
                let total: usize = p.iter().sum();
                if total != self.n {
                    return Err(Error::InvalidInput(format!(
                        "partition sizes sum to {total}, expected n = {}",
                        self.n
                    )));
                }
                if p.contains(&0) {
                    return Err(Error::InvalidInput("partition classes must be nonempty".into()));
                }
            }
            _ => {}
        }
        self.structure()?;
        let g = self.game()?;
        if let Some(s) = g.shock {
            if s.player >= self.n {
                return Err(Error::IndexOutOfRange {
                    index: s.player,
                    n: self.n,
                });
            }
        }
        g.validate()
    }

    pub fn game(&self) -> Result<Game> {
        let mut g = Game::new(self.phi, self.cost, ContestParams::new(self.r, self.transfer)?)?;
        g.shock = self.shock;
        Ok(g)
    }

    /// Structure described by the scenario; no edges means the empty structure.
    pub fn structure(&self) -> Result<Structure> {
        if let Some(p) = &self.partition_sizes {
            return Ok(Structure::complete_multipartite(p));
        }
        Structure::new(self.n, self.edges.as_deref().unwrap_or(&[]))
    }
}
