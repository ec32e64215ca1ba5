//! Configuration, phase-diagram orchestration and result files behind the `hfujita` binary.

pub mod checks;
pub mod config;
pub mod output;
pub mod run;
pub mod sweep;

pub use config::{hash_text, InitialData, LambdaScale, RunConfig, DEFAULT_AMPLITUDE};
pub use output::{create_run_dir, run_dir_name, run_manifest, sweep_manifest, write_run, write_sweep};
pub use run::{
    default_hardy_q, fujita_exponent, global_threshold, hardy_threshold, in_open_gap, initial_shape, run_cell,
    run_single, CellRun, CellVerdict, PhaseCell,
};
pub use sweep::{emit_plotdata, run_sweep, sweep_csv, sweep_inversions, SWEEP_HEADER};
