use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use super::config::{ScenarioConfig, Solver};
use super::output::{write_metadata, Table};
use super::FIDELITY_NOTE;
use crate::dynamics::{
    evolve_lindblad_observed, evolve_schrodinger_observed, run_mcwf_ensemble, EnsembleOptions,
};
use crate::error::Result;
use crate::model::Model;
use crate::observables::{Metrics, SampleRow};

pub const POPULATION_COLUMNS: [&str; 11] = [
    "t", "pop_A", "pop_B", "pop_C", "pop_D", "pop_E", "pop_F", "pop_G", "pop_H", "leakage", "dark_overlap",
];
pub const PULSE_COLUMNS: [&str; 4] = ["t", "omega", "g1", "g2"];
pub const METRIC_COLUMNS: [&str; 7] = ["P", "stderr_P", "F_uncond", "F_cond", "sector_weight", "leakage", "Q"];

/// Result of one scenario run, ready to be written.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub config: ScenarioConfig,
    pub pulses: Table,
    pub populations: Table,
    pub metrics: Metrics,
    /// Statistical error of P (zero for deterministic solvers).
    pub stderr_p: f64,
    /// Total number of quantum jumps (MCWF only).
    pub total_jumps: Option<usize>,
    pub warnings: Vec<String>,
    pub wall_time: Duration,
}

fn population_row(t: f64, row: &SampleRow) -> Vec<Option<f64>> {
    let mut v = vec![Some(t)];
    v.extend(row.populations.iter().map(|&p| Some(p)));
    v.push(Some(row.leakage));
    v.push(row.dark_overlap);
    v
}

pub fn pulse_table(model: &Model, times: &[f64]) -> Result<Table> {
    let mut table = Table::new(&PULSE_COLUMNS);
    for &t in times {
        let (omega, g1, g2) = model.couplings(t);
        table.push(vec![Some(t), Some(omega), Some(g1), Some(g2)])?;
    }
    Ok(table)
}

/// Runs the configured solver from |A⟩ and collects the pulse series, the
/// population series and the final metrics. `workers` only affects MCWF.
pub fn run_scenario(config: &ScenarioConfig, workers: Option<usize>) -> Result<ScenarioOutput> {
    let start = Instant::now();
    let model = config.model()?;
    let space = model.space();
    let basis = model.named_basis();
    let grid = &config.grid;
    let times = grid.output_times();
    let pulses = pulse_table(&model, &times)?;
    let mut populations = Table::new(&POPULATION_COLUMNS);
    let mut warnings = Vec::new();
    let mut sample_error = None;

    let (metrics, stderr_p, total_jumps) = match config.solver {
        Solver::Schrodinger => {
            let mut last = None;
            evolve_schrodinger_observed(&model, grid, &config.integrator, &model.initial_state(), |t, psi| {
                let dark = model.dark_state_global(t).ok();
                let r = SampleRow::for_state(psi, space, basis, dark.as_ref())
                    .and_then(|row| populations.push(population_row(t, &row)));
                if let Err(e) = r {
                    sample_error.get_or_insert(e);
                }
                last = Some(psi.clone());
            })?;
            let last = last.expect("at least one sample").normalized();
            (Metrics::evaluate(&last, space, basis)?, 0.0, None)
        }
        Solver::Lindblad => {
            let report = evolve_lindblad_observed(&model, grid, &config.integrator, &model.initial_state().outer(), |t, rho| {
                let dark = model.dark_state_global(t).ok();
                let r = SampleRow::for_density(rho, space, basis, dark.as_ref())
                    .and_then(|row| populations.push(population_row(t, &row)));
                if let Err(e) = r {
                    sample_error.get_or_insert(e);
                }
            })?;
            warnings.extend(report.warnings);
            (Metrics::evaluate(&report.final_state, space, basis)?, 0.0, None)
        }
        Solver::Mcwf => {
            let options = EnsembleOptions {
                workers,
                keep_final_density: true,
            };
            let ens = run_mcwf_ensemble(
                &model,
                grid,
                &config.integrator,
                &model.initial_state(),
                config.n_trajectories,
                config.master_seed,
                options,
            )?;
            for (k, &t) in ens.times.iter().enumerate() {
                let row = SampleRow {
                    populations: ens.mean_populations[k],
                    leakage: ens.mean_leakage[k],
                    dark_overlap: ens.mean_dark_overlap[k],
                };
                populations.push(population_row(t, &row))?;
            }
            let rho = ens.final_density.as_ref().expect("requested");
            let mut metrics = Metrics::evaluate(rho, space, basis)?;
            let (p, se) = ens.final_success();
            metrics.success_probability = p;
            (metrics, se, Some(ens.jump_counts.iter().sum()))
        }
    };
    if let Some(e) = sample_error {
        return Err(e);
    }

    Ok(ScenarioOutput {
        config: config.clone(),
        pulses,
        populations,
        metrics,
        stderr_p,
        total_jumps,
        warnings,
        wall_time: start.elapsed(),
    })
}

impl ScenarioOutput {
    pub fn metrics_table(&self) -> Result<Table> {
        let m = &self.metrics;
        let mut table = Table::new(&METRIC_COLUMNS);
        table.push(vec![
            Some(m.success_probability),
            Some(self.stderr_p),
            Some(m.fidelity_unconditional),
            m.fidelity_conditional,
            Some(m.success_sector_weight),
            Some(m.leakage),
            Some(m.q_expectation),
        ])?;
        Ok(table)
    }

    /// Writes `pulses.csv`, `populations.csv`, `metrics.csv` and
    /// `metadata.txt` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path, command: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let header = self.config.to_text();
        let files = [
            ("pulses.csv", self.pulses.clone()),
            ("populations.csv", self.populations.clone()),
            ("metrics.csv", self.metrics_table()?),
        ];
        let mut written = Vec::new();
        for (name, table) in files {
            let path = dir.join(name);
            table.write(&path, &header)?;
            written.push(path);
        }
        let mut facts = vec![
            ("command", command.to_string()),
            ("solver", self.config.solver.to_string()),
            ("master_seed", self.config.master_seed.to_string()),
            ("kappa_over_g0", self.config.kappa_over_g0().to_string()),
            ("fidelity_note", FIDELITY_NOTE.to_string()),
        ];
        if let Some(j) = self.total_jumps {
            facts.push(("total_jumps", j.to_string()));
        }
        for w in &self.warnings {
            facts.push(("warning", w.clone()));
        }
        write_metadata(dir, &facts, &header, self.wall_time)?;
        written.push(dir.join("metadata.txt"));
        Ok(written)
    }
}
