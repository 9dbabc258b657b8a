//! Game primitives: technology, cost, contest parameters, structures, effort
//! profiles and payoffs.

mod cost;
mod game;
mod payoff;
mod profile;
mod scenario;
mod structure;
mod technology;

pub use cost::CostSpec;
pub use game::{contest_revenue, ContestParams, CostShock, Game};
pub use payoff::{payoff, payoff_gradient, payoffs};
pub(crate) use payoff::payoff_unchecked;
pub use profile::{induced_structure, StrategyProfile};
pub use scenario::Scenario;
pub use structure::{class_labels, Structure};
pub use technology::{TechnologyKind, TechnologySpec};
