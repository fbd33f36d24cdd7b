//! Monte Carlo wave-function unravelling of the cavity-damped master
//! equation.
//!
//! Between jumps the unnormalized state follows H_eff = H − iκ Σ a†a. A
//! uniform threshold r is drawn; when ‖ψ‖² falls below r inside a grid step
//! the crossing time is located by bisection, a mode m is chosen with
//! probability ∝ ‖a_m ψ‖², and ψ → a_m ψ / ‖a_m ψ‖ with a fresh threshold.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::generator::{state_support, Generator};
use super::integrator::Stepper;
use super::{IntegratorConfig, Sample, TimeGrid};
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, Mode, StateVector};
use crate::model::Model;
use crate::observables::SampleRow;

/// Resolution of the bisection that locates a jump inside a step.
pub const JUMP_TIME_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub jump_events: Vec<JumpEvent>,
    /// Normalized states at the output times.
    pub samples: Vec<Sample<StateVector>>,
}

/// SplitMix64 finalizer applied to `master + index·φ`; gives each trajectory
/// an independent, order-free seed.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum()
}

/// Runs one trajectory on `generator` coordinates. `on_sample` receives the
/// normalized state at every output time; the final normalized state is
/// returned.
fn propagate<F>(
    generator: &Generator,
    grid: &TimeGrid,
    config: &IntegratorConfig,
    initial: &[C64],
    seed: u64,
    events: &mut Vec<JumpEvent>,
    mut on_sample: F,
) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64]),
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stepper = Stepper::new(*config, initial.len());
    let mut rhs = |t: f64, x: &[C64], out: &mut [C64]| generator.schrodinger_rhs(t, x, out, true);

    let mut psi = initial.to_vec();
    let n0 = norm_sqr(&psi).sqrt();
    psi.iter_mut().for_each(|a| *a /= n0);
    let mut threshold: f64 = rng.random();
    let mut trial = psi.clone();
    let mut jumped = vec![C64::new(0.0, 0.0); psi.len()];

    let emit = |psi: &[C64], t: f64, on_sample: &mut F| {
        let n = norm_sqr(psi).sqrt();
        let normalized: Vec<C64> = psi.iter().map(|a| a / n).collect();
        on_sample(t, &normalized);
    };

    emit(&psi, grid.time(0), &mut on_sample);
    for k in 0..grid.n_steps {
        let t_next = grid.time(k + 1);
        let mut t = grid.time(k);
        loop {
            trial.copy_from_slice(&psi);
            stepper.advance(&mut rhs, t, t_next, &mut trial)?;
            if norm_sqr(&trial) >= threshold {
                psi.copy_from_slice(&trial);
                break;
            }

            // ‖ψ‖² crosses the threshold inside (t, t_next]: bisect on the
            // elapsed time, keeping ‖ψ(t + lo)‖² ≥ r > ‖ψ(t + hi)‖².
            let (mut lo, mut hi) = (0.0, t_next - t);
            while hi - lo > JUMP_TIME_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                trial.copy_from_slice(&psi);
                stepper.advance(&mut rhs, t, t + mid, &mut trial)?;
                if norm_sqr(&trial) >= threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t_jump = if hi >= t_next - t { t_next } else { t + hi };
            trial.copy_from_slice(&psi);
            stepper.advance(&mut rhs, t, t_jump, &mut trial)?;

            let weights: Vec<f64> = generator.jumps.iter().map(|j| j.weight(&trial)).collect();
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) {
                return Err(Error::VanishingJumpWeights { t: t_jump });
            }
            let pick = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = weights.len() - 1;
            for (m, w) in weights.iter().enumerate() {
                acc += w;
                if pick < acc {
                    chosen = m;
                    break;
                }
            }
            let jump = &generator.jumps[chosen];
            jump.apply(&trial, &mut jumped);
            let n = norm_sqr(&jumped).sqrt();
            for (p, j) in psi.iter_mut().zip(&jumped) {
                *p = j / n;
            }
            events.push(JumpEvent {
                time: t_jump,
                mode: jump.mode,
            });
            threshold = rng.random();
            t = t_jump;
            if t >= t_next {
                break;
            }
        }
        if grid.is_output(k + 1) {
            emit(&psi, t_next, &mut on_sample);
        }
    }
    let n = norm_sqr(&psi).sqrt();
    Ok(psi.into_iter().map(|a| a / n).collect())
}

/// A single quantum trajectory, fully determined by `seed`.
pub fn run_mcwf_trajectory(
    model: &Model,
    grid: &TimeGrid,
    config: &IntegratorConfig,
    initial: &StateVector,
    seed: u64,
) -> Result<TrajectoryRecord> {
    grid.validate()?;
    config.validate()?;
    initial.check_dim(model.space().dim())?;
    let generator = Generator::new(model, &state_support(initial), config.restrict_to_reachable);
    let mut jump_events = Vec::new();
    let mut samples = Vec::new();
    propagate(
        &generator,
        grid,
        config,
        &generator.reduce_state(initial),
        seed,
        &mut jump_events,
        |t, x| {
            samples.push(Sample {
                t,
                state: generator.embed_state(x),
            })
        },
    )?;
    Ok(TrajectoryRecord {
        seed,
        jump_events,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EnsembleOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Also accumulate the trajectory-averaged final density matrix.
    pub keep_final_density: bool,
}

/// Trajectory-averaged observables.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub times: Vec<f64>,
    /// Mean populations of |A⟩…|H⟩ per output time.
    pub mean_populations: Vec<[f64; 8]>,
    /// Standard error of those means.
    pub stderr_populations: Vec<[f64; 8]>,
    pub mean_leakage: Vec<f64>,
    /// `None` where the global dark state is undefined.
    pub mean_dark_overlap: Vec<Option<f64>>,
    /// Number of jumps in each trajectory, by trajectory index.
    pub jump_counts: Vec<usize>,
    pub final_density: Option<DensityMatrix>,
}

impl EnsembleResult {
    /// Mean and standard error of the final |E⟩ population.
    pub fn final_success(&self) -> (f64, f64) {
        let e = crate::model::NamedLabel::E.index();
        (
            self.mean_populations.last().map_or(0.0, |p| p[e]),
            self.stderr_populations.last().map_or(0.0, |p| p[e]),
        )
    }
}

struct TrajectorySummary {
    rows: Vec<SampleRow>,
    final_state: Vec<C64>,
    jumps: usize,
}

/// Pairwise summation; the result depends only on the order of `values`.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&squares) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Averages `n_trajectories` trajectories seeded by
/// [`derive_seed`]`(master_seed, index)`. Results are identical for any
/// number of workers.
pub fn run_mcwf_ensemble(
    model: &Model,
    grid: &TimeGrid,
    config: &IntegratorConfig,
    initial: &StateVector,
    n_trajectories: usize,
    master_seed: u64,
    options: EnsembleOptions,
) -> Result<EnsembleResult> {
    if n_trajectories < 1 {
        return Err(Error::InvalidConfig("n_trajectories must be >= 1".into()));
    }
    grid.validate()?;
    config.validate()?;
    initial.check_dim(model.space().dim())?;

    let space = model.space();
    let basis = model.named_basis();
    let generator = Generator::new(model, &state_support(initial), config.restrict_to_reachable);
    let start = generator.reduce_state(initial);
    let times = grid.output_times();
    let darks: Vec<Option<StateVector>> = times.iter().map(|&t| model.dark_state_global(t).ok()).collect();

    let run_one = |index: usize| -> Result<TrajectorySummary> {
        let mut events = Vec::new();
        let mut rows = Vec::with_capacity(times.len());
        let mut sample_error = None;
        let final_state = propagate(
            &generator,
            grid,
            config,
            &start,
            derive_seed(master_seed, index as u64),
            &mut events,
            |_, x| {
                let psi = generator.embed_state(x);
                match SampleRow::for_state(&psi, space, basis, darks[rows.len()].as_ref()) {
                    Ok(row) => rows.push(row),
                    Err(e) => sample_error = Some(e),
                }
            },
        )?;
        if let Some(e) = sample_error {
            return Err(e);
        }
        Ok(TrajectorySummary {
            rows,
            final_state,
            jumps: events.len(),
        })
    };

    let collect = || -> Result<Vec<TrajectorySummary>> { (0..n_trajectories).into_par_iter().map(run_one).collect() };
    let summaries = match options.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?
            .install(collect)?,
        None => collect()?,
    };

    let n_times = times.len();
    let mut mean_populations = Vec::with_capacity(n_times);
    let mut stderr_populations = Vec::with_capacity(n_times);
    let mut mean_leakage = Vec::with_capacity(n_times);
    let mut mean_dark_overlap = Vec::with_capacity(n_times);
    let mut column = vec![0.0; n_trajectories];
    for k in 0..n_times {
        let mut means = [0.0; 8];
        let mut errs = [0.0; 8];
        for s in 0..8 {
            for (slot, summary) in column.iter_mut().zip(&summaries) {
                *slot = summary.rows[k].populations[s];
            }
            (means[s], errs[s]) = mean_and_stderr(&column);
        }
        mean_populations.push(means);
        stderr_populations.push(errs);

        for (slot, summary) in column.iter_mut().zip(&summaries) {
            *slot = summary.rows[k].leakage;
        }
        mean_leakage.push(mean_and_stderr(&column).0);

        let overlap = if darks[k].is_some() {
            for (slot, summary) in column.iter_mut().zip(&summaries) {
                *slot = summary.rows[k].dark_overlap.unwrap_or(0.0);
            }
            Some(mean_and_stderr(&column).0)
        } else {
            None
        };
        mean_dark_overlap.push(overlap);
    }

    let final_density = options.keep_final_density.then(|| {
        let n = generator.dim();
        let mut elements = vec![C64::new(0.0, 0.0); n * n];
        let mut re = vec![0.0; n_trajectories];
        let mut im = vec![0.0; n_trajectories];
        for r in 0..n {
            for c in 0..n {
                for (i, summary) in summaries.iter().enumerate() {
                    let v = summary.final_state[r] * summary.final_state[c].conj();
                    re[i] = v.re;
                    im[i] = v.im;
                }
                let nt = n_trajectories as f64;
                elements[r * n + c] = C64::new(pairwise_sum(&re) / nt, pairwise_sum(&im) / nt);
            }
        }
        generator.embed_density(&elements)
    });

    Ok(EnsembleResult {
        n_trajectories,
        master_seed,
        times,
        mean_populations,
        stderr_populations,
        mean_leakage,
        mean_dark_overlap,
        jump_counts: summaries.iter().map(|s| s.jumps).collect(),
        final_density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_schrodinger;
    use crate::hilbert::HilbertSpace;
    use crate::model::PhysicalParams;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let seeds: Vec<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        let unique: std::collections::HashSet<_> = seeds.iter().collect();
        assert_eq!(unique.len(), seeds.len());
        assert_eq!(derive_seed(42, 7), seeds[7]);
        assert_ne!(derive_seed(43, 0), derive_seed(42, 0));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_exact_values() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&v), v.iter().sum::<f64>());
        assert_eq!(mean_and_stderr(&[2.0]), (2.0, 0.0));
    }

    #[test]
    fn closed_system_trajectory_has_no_jumps() {
        let model = Model::new(HilbertSpace::new(1).unwrap(), PhysicalParams::default()).unwrap();
        let grid = TimeGrid::new(-6.0, 16.0, 1000, 100).unwrap();
        let config = IntegratorConfig::default();
        let psi0 = model.initial_state();
        let traj = run_mcwf_trajectory(&model, &grid, &config, &psi0, 3).unwrap();
        assert!(traj.jump_events.is_empty());
        let pure = evolve_schrodinger(&model, &grid, &config, &psi0).unwrap();
        for (a, b) in traj.samples.iter().zip(&pure) {
            let b = b.state.clone().normalized();
            for i in 0..b.dim() {
                assert!((a.state[i] - b[i]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn single_trajectory_ensemble_reduces_to_record() {
        let params = PhysicalParams {
            kappa: 0.5,
            ..Default::default()
        };
        let model = Model::new(HilbertSpace::new(1).unwrap(), params).unwrap();
        let grid = TimeGrid::new(-6.0, 16.0, 1000, 100).unwrap();
        let config = IntegratorConfig::default();
        let psi0 = model.initial_state();
        let seed = derive_seed(11, 0);
        let traj = run_mcwf_trajectory(&model, &grid, &config, &psi0, seed).unwrap();
        let ens = run_mcwf_ensemble(&model, &grid, &config, &psi0, 1, 11, EnsembleOptions::default()).unwrap();
        let basis = model.named_basis();
        for (k, s) in traj.samples.iter().enumerate() {
            let pops = crate::observables::populations_named(&s.state, basis).unwrap();
            assert_eq!(pops, ens.mean_populations[k]);
            assert_eq!(ens.stderr_populations[k], [0.0; 8]);
        }
        assert_eq!(ens.jump_counts, vec![traj.jump_events.len()]);
    }

    #[test]
    fn zero_trajectories_rejected() {
        let model = Model::new(HilbertSpace::new(1).unwrap(), PhysicalParams::default()).unwrap();
        let r = run_mcwf_ensemble(
            &model,
            &TimeGrid::default(),
            &IntegratorConfig::default(),
            &model.initial_state(),
            0,
            1,
            EnsembleOptions::default(),
        );
        assert!(r.is_err());
    }
}
