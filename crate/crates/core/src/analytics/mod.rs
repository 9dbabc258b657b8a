//! Value functions of the bipartite stability argument, comparative
//! statics and parameter sweeps.

mod statics;
mod sweep;
mod value;

pub use statics::{
    cost_shock_derivatives, effort_derivatives_r, total_spending_sign_condition, RDerivatives, ShockDerivatives,
    ShockedRole, SignCondition,
};
pub use sweep::{sweep, SweepKind, SweepRecord, SweepRow, SweepTable};
pub use value::{attacker_link_benefit_f, bipartite_threshold, contest_value, deviation_value_h, ThresholdReport};
