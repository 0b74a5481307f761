//! Command-line front end for the two-component bosonic Josephson
//! junction simulator: named scenario presets, config-file driven runs,
//! interaction-strength sweeps and tabular output for plotting.

pub mod acceptance;
pub mod emit;
pub mod scenario;

pub use emit::{emit, OutputFormat};
pub use scenario::{
    preset, resolve_initial_state, run_scenario, InitialStateSpec, ScenarioConfig,
    ScenarioResults,
};
