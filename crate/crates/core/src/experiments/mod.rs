//! Configuration, scenario orchestration and flat-file export.

mod config;
mod darkstate;
mod output;
mod scenario;
mod sweep;
mod verify;

pub use config::{ScenarioConfig, Solver, KEYS};
pub use darkstate::{darkstate_table, DARKSTATE_COLUMNS};
pub use output::{format_value, write_metadata, Table};
pub use scenario::{pulse_table, run_scenario, ScenarioOutput, METRIC_COLUMNS, POPULATION_COLUMNS, PULSE_COLUMNS};
pub use sweep::{run_sweep, SweepResult, SweepRow, SweepSpec, SWEEP_COLUMNS};
pub use verify::{
    binomial_sd, charge_commutator, dark_state_nullity, matrix_element_error, verify, Check, CheckStatus, VerifyReport,
    NULLITY_SAMPLES,
};

/// Stated in every metadata file.
pub const FIDELITY_NOTE: &str = "F_cond (success-sector conditioned) is the comparator for the >90% fidelity claim; \
F_uncond = sqrt(P); F_cond is empty when the success-sector weight is below 1e-12";
