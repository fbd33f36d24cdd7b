#![allow(dead_code)]

use std::fs;
use std::path::Path;

use epr_cqed::dynamics::{
    derive_seed, evolve_lindblad, evolve_schrodinger, run_mcwf_trajectory, IntegratorConfig, TimeGrid,
};
use epr_cqed::experiments::{run_scenario, run_sweep, ScenarioConfig};
use epr_cqed::hilbert::{BasisConfiguration, DensityMatrix, HilbertSpace, Level, StateVector};
use epr_cqed::model::{Model, PhysicalParams, PulseSchedule};
use epr_cqed::observables::{expectation_q, populations_named};
use rayon::prelude::*;

/// Photon-number decay: all couplings off, one photon in c1+.
pub struct Decay {
    pub kappa: f64,
    pub model: Model,
    pub grid: TimeGrid,
    pub initial: StateVector,
}

impl Decay {
    pub fn new(kappa: f64) -> Self {
        let space = HilbertSpace::new(1).unwrap();
        let initial = space
            .basis_state(&BasisConfiguration::new(Level::G, [1, 0, 0, 0]))
            .unwrap();
        let params = PhysicalParams {
            kappa,
            ..PhysicalParams::default()
        };
        let model = Model::with_schedule(space, params, PulseSchedule::constant(0.0, 0.0, 0.0)).unwrap();
        Self {
            kappa,
            model,
            grid: TimeGrid::new(0.0, 40.0, 4000, 100).unwrap(),
            initial,
        }
    }

    pub fn exact(&self, t: f64) -> f64 {
        (-2.0 * self.kappa * t).exp()
    }

    /// max_t |⟨n⟩_dense(t) − e^{−2κt}|
    pub fn dense_error(&self) -> f64 {
        let n = self.model.space().photon_numbers();
        let (samples, _) = evolve_lindblad(
            &self.model,
            &self.grid,
            &IntegratorConfig::default(),
            &self.initial.outer(),
        )
        .unwrap();
        samples
            .iter()
            .map(|s| {
                let mean: f64 = s.state.diagonal().iter().zip(&n).map(|(p, n)| p * n).sum();
                (mean - self.exact(s.t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// First jump time of each trajectory (`None` if it never jumped) and
    /// the photon number seen at every output time.
    pub fn trajectories(&self, n: usize, master_seed: u64) -> Vec<(Option<f64>, Vec<f64>)> {
        let photons = self.model.space().photon_numbers();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let rec = run_mcwf_trajectory(
                    &self.model,
                    &self.grid,
                    &IntegratorConfig::default(),
                    &self.initial,
                    derive_seed(master_seed, i as u64),
                )
                .unwrap();
                let counts = rec
                    .samples
                    .iter()
                    .map(|s| s.state.as_slice().iter().zip(&photons).map(|(a, n)| a.norm_sqr() * n).sum())
                    .collect();
                (rec.jump_events.first().map(|j| j.time), counts)
            })
            .collect()
    }
}

/// Largest |mean − exact| / SE over the output times. Each trajectory
/// holds 0 or 1 photon, so SE = √(p(1 − p)/n) with p = e^{−2κt}.
pub fn decay_mcwf_z(decay: &Decay, runs: &[(Option<f64>, Vec<f64>)]) -> f64 {
    let n = runs.len() as f64;
    let times = decay.grid.output_times();
    let mut worst: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let mean = runs.iter().map(|(_, c)| c[k]).sum::<f64>() / n;
        let p = decay.exact(t);
        let se = (p * (1.0 - p) / n).sqrt();
        let diff = (mean - p).abs();
        let z = if se > 0.0 { diff / se } else if diff < 1e-12 { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
    }
    worst
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value sqrt(−ln(α/2)/2)/√n.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub fn protocol(kappa_ratio: f64) -> (Model, TimeGrid, IntegratorConfig) {
    let mut config = ScenarioConfig::default();
    config.kappa_ratio = Some(kappa_ratio);
    (config.model().unwrap(), config.grid, config.integrator)
}

/// Largest |‖ψ(t)‖² − 1| of the closed protocol.
pub fn schrodinger_norm_drift() -> f64 {
    let (model, grid, integrator) = protocol(0.0);
    evolve_schrodinger(&model, &grid, &integrator, &model.initial_state())
        .unwrap()
        .iter()
        .map(|s| (s.state.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Largest |tr ρ(t) − 1| of the damped protocol.
pub fn lindblad_trace_drift(kappa_ratio: f64) -> f64 {
    let (model, grid, integrator) = protocol(kappa_ratio);
    let (samples, _) = evolve_lindblad(&model, &grid, &integrator, &model.initial_state().outer()).unwrap();
    samples
        .iter()
        .map(|s| (s.state.trace().re - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Largest |⟨Q⟩(t) − (Q₀ − jumps before t)| over `n` damped trajectories,
/// together with the total jump count.
pub fn charge_per_jump(kappa_ratio: f64, n: usize, master_seed: u64) -> (f64, usize) {
    let (model, grid, integrator) = protocol(kappa_ratio);
    let initial = model.initial_state();
    let q0 = expectation_q(&initial, model.space());
    (0..n)
        .into_par_iter()
        .map(|i| {
            let rec =
                run_mcwf_trajectory(&model, &grid, &integrator, &initial, derive_seed(master_seed, i as u64)).unwrap();
            let err = rec
                .samples
                .iter()
                .map(|s| {
                    let jumps = rec.jump_events.iter().filter(|j| j.time <= s.t).count();
                    (expectation_q(&s.state, model.space()) - (q0 - jumps as f64)).abs()
                })
                .fold(0.0, f64::max);
            (err, rec.jump_events.len())
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1))
}

fn final_named(model: &Model, grid: &TimeGrid, integrator: &IntegratorConfig) -> [f64; 8] {
    let samples = evolve_schrodinger(model, grid, integrator, &model.initial_state()).unwrap();
    populations_named(&samples.last().unwrap().state, model.named_basis()).unwrap()
}

fn final_named_dense(model: &Model, grid: &TimeGrid, integrator: &IntegratorConfig) -> [f64; 8] {
    let (_, report) = evolve_lindblad(model, grid, integrator, &model.initial_state().outer()).unwrap();
    let rho: &DensityMatrix = &report.final_state;
    populations_named(rho, model.named_basis()).unwrap()
}

/// Largest change of the final named populations when the RK4 step is
/// halved, for the closed protocol and the damped one at `kappa_ratio`.
pub fn step_halving(kappa_ratio: f64) -> f64 {
    let (closed, grid, integrator) = protocol(0.0);
    let (damped, _, _) = protocol(kappa_ratio);
    let fine = grid.refined();
    let diff = |a: [f64; 8], b: [f64; 8]| a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    diff(final_named(&closed, &grid, &integrator), final_named(&closed, &fine, &integrator)).max(diff(
        final_named_dense(&damped, &grid, &integrator),
        final_named_dense(&damped, &fine, &integrator),
    ))
}

/// Writes an MCWF scenario and an MCWF sweep for each worker count and
/// returns the names of data files whose bytes differ between runs.
pub fn determinism_mismatches(dir: &Path, workers: &[usize]) -> Vec<String> {
    let mut config = ScenarioConfig::default();
    config.kappa_ratio = Some(0.1);
    config.solver = epr_cqed::experiments::Solver::Mcwf;
    config.n_trajectories = 64;
    config.master_seed = 17;
    config.sweep_ratios = vec![0.01, 0.1, 1.0];

    let mut dirs = Vec::new();
    for &w in workers {
        let d = dir.join(format!("w{w}"));
        run_scenario(&config, Some(w)).unwrap().write(&d, "mcwf").unwrap();
        run_sweep(&config, Some(w)).unwrap().write(&d).unwrap();
        dirs.push(d);
    }
    let mut mismatches = Vec::new();
    for name in ["populations.csv", "pulses.csv", "metrics.csv", "sweep.csv"] {
        let reference = fs::read(dirs[0].join(name)).unwrap();
        for d in &dirs[1..] {
            if fs::read(d.join(name)).unwrap() != reference {
                mismatches.push(format!("{name} ({})", d.display()));
            }
        }
    }
    mismatches
}
