//! Campaign orchestration: configuration, seeded trials, stopping rule and
//! result files.

mod campaign;
mod config;
mod seeds;
mod spectrum;
mod trial;

pub use campaign::{run_campaign, run_point, write_outputs, write_psd, PointOutcome, StopRule};
pub use config::{CampaignConfig, ChannelProfileConfig, Engine, GridPoint, ScSettings};
pub use seeds::{mix64, stream, trial_seed, Purpose};
pub use spectrum::{transmit_spectra, SpectraComparison};
pub use trial::{simulate_trial, LinkConfig, LinkSimulator, TrialResult};
