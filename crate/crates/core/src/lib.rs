//! Coding theorem method toolkit: enumerate or sample small Turing
//! machines, turn their output frequencies into complexity estimates for
//! short strings, and analyse human randomness judgments with them.

pub mod analysis;
pub mod distribution;
pub mod enumeration;
pub mod error;
pub mod measures;
pub mod pattern;
pub mod query;
pub mod stats;
pub mod tm;

pub use distribution::{build_dataset, complete, CompletedCounts, FrequencyDataset, KTable};
pub use enumeration::{calibrate_cutoff, run_campaign, CampaignConfig, Mode, Probe, RawCounts};
pub use error::{CtmError, Result};
pub use pattern::{canonicalize, canonicalize_str, PatternKey};
pub use query::{acss, bayes, likelihood_d, local_complexity, ComplexitySource, TableSet};
pub use tm::{decode, encode, run, MachineIndex, RunOutcome, SpaceSpec, TransitionTable};
