//! Process discovery with the Alpha+++ algorithm.
//!
//! The pipeline works on [`EventLog`]s (multisets of activity sequences) and
//! produces [`AcceptingPetriNet`]s:
//!
//! ```text
//! EventLog > augment > repair (problematic activities, loop/skip τ) > advising DFG
//!          > Cnd₀ > balance > local fitness > maximal > net > place replay
//! ```
//!
//! The classical Alpha algorithm is available as a baseline through
//! [`discover_alpha_classic`].

pub mod activity;
mod bitset;
pub mod candidates;
pub mod dfg;
pub mod discovery;
pub mod error;
pub mod log;
pub mod petri;
pub mod repair;

pub use activity::{Activity, Trace};
pub use candidates::PlaceCandidate;
pub use dfg::{DfThreshold, Dfg, ThresholdMode};
pub use discovery::{
    discover_alpha_classic, discover_alphappp, preset, DiscoveryConfig, StageReport, PRESET_NAMES,
};
pub use error::{Error, Result};
pub use log::{ActivityMultiset, CsvMapping, EventLog, LogStats, VariantFilter};
pub use petri::{AcceptingPetriNet, Marking, PetriNet, PlaceId, TransitionId};
pub use repair::RepairReport;
