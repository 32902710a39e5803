//! Configuration, run registry, file formats and the command-line runner
//! around `gmns-core`.

pub mod checks;
pub mod config;
pub mod error;
pub mod io;
pub mod output;
pub mod registry;
pub mod run;
pub mod runner;

pub use config::{parse_config, Experiment, Mode, RunConfig};
pub use error::{exit, AppError, AppResult};
pub use registry::{Registry, RunRecord};
pub use run::{default_out_dir, run_experiment, RunOutcome};
pub use runner::RayonRunner;
