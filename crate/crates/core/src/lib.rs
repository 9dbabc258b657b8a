//! Bilateral Tullock contests played on networks.
//!
//! Players choose how much effort to put into each pairwise contest; a contest
//! exists whenever at least one side invests. The crate computes the unique
//! equilibrium of the contest game on a fixed structure, checks three
//! stability notions for the structure itself (Nash, strong pairwise and
//! limited-farsighted pairwise stability), evaluates comparative statics on
//! complete bipartite structures and simulates the network-formation dynamics.
//!
//! ```
//! use contestnet::model::{Game, Structure};
//! use contestnet::solver::{solve_equilibrium, SolveOptions};
//!
//! let game = Game::benchmark();
//! let star = Structure::complete_bipartite(3, 1);
//! let eq = solve_equilibrium(&star, &game, &SolveOptions::default()).unwrap();
//! assert!((eq.profile.get(0, 3) - 0.48172).abs() < 1e-5);
//! ```

pub mod analytics;
pub mod dynamics;
pub mod error;
pub mod model;
pub(crate) mod numeric;
pub(crate) mod parallel;
pub mod solver;
pub mod stability;

pub use error::{Error, Result};
