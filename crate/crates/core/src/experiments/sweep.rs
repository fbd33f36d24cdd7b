use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{ScenarioConfig, Solver};
use super::output::{write_metadata, Table};
use super::FIDELITY_NOTE;
use crate::dynamics::{derive_seed, evolve_lindblad, run_mcwf_ensemble, EnsembleOptions};
use crate::error::{Error, Result};
use crate::observables::Metrics;

pub const SWEEP_COLUMNS: [&str; 5] = ["kappa_over_g0", "P", "stderr_P", "F_cond", "F_uncond"];

/// Grid of κ/g₀ ratios for the decay sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub ratios: Vec<f64>,
    pub trajectories_per_point: usize,
}

impl SweepSpec {
    /// `n` ratios log-spaced over [lo, hi].
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        let (a, b) = (lo.ln(), hi.ln());
        (0..n)
            .map(|i| {
                if i == 0 {
                    lo
                } else if i == n - 1 {
                    hi
                } else {
                    (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    }

    /// 15 log-spaced ratios from 0.01 to 1.
    pub fn default_ratios() -> Vec<f64> {
        Self::log_spaced(0.01, 1.0, 15)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one ratio".into()));
        }
        if self.ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidConfig("sweep ratios must be positive and finite".into()));
        }
        if self.ratios.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("sweep ratios must be strictly increasing".into()));
        }
        if self.trajectories_per_point < 1 {
            return Err(Error::InvalidConfig("trajectories per point must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub kappa_over_g0: f64,
    pub success_probability: f64,
    pub stderr: f64,
    /// `None` when the success sector is empty to numerical precision.
    pub fidelity_conditional: Option<f64>,
    pub fidelity_unconditional: f64,
    pub sector_weight: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: ScenarioConfig,
    pub rows: Vec<SweepRow>,
    pub wall_time: Duration,
}

fn run_point(config: &ScenarioConfig, index: usize, ratio: f64, workers: Option<usize>) -> Result<SweepRow> {
    let mut point = config.clone();
    point.kappa_ratio = Some(ratio);
    let model = point.model()?;
    let (space, basis) = (model.space(), model.named_basis());
    let psi0 = model.initial_state();
    let (metrics, stderr) = match config.solver {
        Solver::Lindblad => {
            let (_, report) = evolve_lindblad(&model, &point.grid, &point.integrator, &psi0.outer())?;
            (Metrics::evaluate(&report.final_state, space, basis)?, 0.0)
        }
        Solver::Mcwf => {
            let options = EnsembleOptions {
                workers,
                keep_final_density: true,
            };
            let seed = derive_seed(config.master_seed, index as u64);
            let ens = run_mcwf_ensemble(&model, &point.grid, &point.integrator, &psi0, point.n_trajectories, seed, options)?;
            let mut metrics = Metrics::evaluate(ens.final_density.as_ref().expect("requested"), space, basis)?;
            let (p, se) = ens.final_success();
            metrics.success_probability = p;
            (metrics, se)
        }
        Solver::Schrodinger => unreachable!("rejected by run_sweep"),
    };
    Ok(SweepRow {
        kappa_over_g0: ratio,
        success_probability: metrics.success_probability,
        stderr,
        fidelity_conditional: metrics.fidelity_conditional,
        fidelity_unconditional: metrics.fidelity_unconditional,
        sector_weight: metrics.success_sector_weight,
    })
}

/// Final P and F for every ratio of `config.sweep_ratios`, in input order.
/// MCWF point `i` uses master seed `derive_seed(master_seed, i)`.
pub fn run_sweep(config: &ScenarioConfig, workers: Option<usize>) -> Result<SweepResult> {
    let start = Instant::now();
    config.validate()?;
    let spec = config.sweep_spec();
    if config.solver == Solver::Schrodinger {
        return Err(Error::InvalidConfig("sweep needs a dissipative solver (lindblad or mcwf)".into()));
    }
    let rows = match config.solver {
        // Dense points are independent; run them side by side.
        Solver::Lindblad => {
            let run = || -> Result<Vec<SweepRow>> {
                spec.ratios
                    .par_iter()
                    .enumerate()
                    .map(|(i, &r)| run_point(config, i, r, None))
                    .collect()
            };
            match workers {
                Some(w) => rayon::ThreadPoolBuilder::new()
                    .num_threads(w.max(1))
                    .build()
                    .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?
                    .install(run)?,
                None => run()?,
            }
        }
        _ => spec
            .ratios
            .iter()
            .enumerate()
            .map(|(i, &r)| run_point(config, i, r, workers))
            .collect::<Result<_>>()?,
    };
    Ok(SweepResult {
        config: config.clone(),
        rows,
        wall_time: start.elapsed(),
    })
}

impl SweepResult {
    pub fn table(&self) -> Result<Table> {
        let mut table = Table::new(&SWEEP_COLUMNS);
        for r in &self.rows {
            table.push(vec![
                Some(r.kappa_over_g0),
                Some(r.success_probability),
                Some(r.stderr),
                r.fidelity_conditional,
                Some(r.fidelity_unconditional),
            ])?;
        }
        Ok(table)
    }

    /// Writes `sweep.csv` and `metadata.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let header = self.config.to_text();
        let path = dir.join("sweep.csv");
        self.table()?.write(&path, &header)?;
        let facts = [
            ("command", "sweep".to_string()),
            ("solver", self.config.solver.to_string()),
            ("master_seed", self.config.master_seed.to_string()),
            ("fidelity_note", FIDELITY_NOTE.to_string()),
            (
                "grid_note",
                "kappa/g0 grid is a stand-in; the published sweep resolution is unknown".to_string(),
            ),
        ];
        write_metadata(dir, &facts, &header, self.wall_time)?;
        Ok(vec![path, dir.join("metadata.txt")])
    }
}
