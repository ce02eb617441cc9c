//! Run orchestration: TOML configuration, named presets, experiment drivers
//! and deterministic CSV/JSON output.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{parse_config, InitialVariable, Mode, RunConfig};
pub use presets::{preset, Preset};
pub use run::{
    convergence_study, output_root, run_convergence, run_experiment, verify_lemmas, RunManifest,
};

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "NLFP_OUTPUT_ROOT";
