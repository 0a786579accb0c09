pub mod config;
pub mod run;
pub mod sweep;

pub use config::{CarrierChoice, ExperimentConfig, GateDuration, PairRule};
pub use run::*;
pub use sweep::{run_sweep, sweep_csv, write_sweep, SweepAxis, SweepRow, SWEEP_FILE};
