//! Dynamic processes: projected gradient adjustment of efforts, random pair
//! revisions of the structure, and farsighted improving paths on tiny
//! populations.

mod adjustment;
mod farsighted;
mod formation;

pub use adjustment::{integrate_adjustment, AdjustmentResult};
pub use farsighted::{canonical_form, farsighted_stable_set, FarsightedClass, FarsightedReport, MAX_FARSIGHTED_N};
pub use formation::{simulate_formation, PeriodRecord, RevisionEvent, TerminalStatus, Trajectory};
