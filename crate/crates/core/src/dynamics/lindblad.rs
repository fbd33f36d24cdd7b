use num_complex::Complex64 as C64;

use super::generator::{density_support, Generator};
use super::integrator::Stepper;
use super::{IntegratorConfig, Sample, TimeGrid};
use crate::error::{Error, Result};
use crate::hilbert::hermitize_slice;
use crate::hilbert::DensityMatrix;
use crate::model::Model;

/// Eigenvalues below this are reported as positivity violations.
pub const NEGATIVITY_WARNING: f64 = -1e-6;

/// Diagnostics collected along a master-equation solve.
#[derive(Debug, Clone)]
pub struct LindbladReport {
    pub final_state: DensityMatrix,
    /// Largest |tr ρ(t) − tr ρ(t₀)| over the output times.
    pub max_trace_drift: f64,
    /// Smallest eigenvalue seen at any output time.
    pub min_eigenvalue: f64,
    pub warnings: Vec<String>,
}

/// Integrates dρ/dt = −i[H, ρ] + κ Σ_modes (2aρa† − a†aρ − ρa†a) and returns
/// ρ at every output time together with the solve diagnostics.
pub fn evolve_lindblad(
    model: &Model,
    grid: &TimeGrid,
    config: &IntegratorConfig,
    initial: &DensityMatrix,
) -> Result<(Vec<Sample<DensityMatrix>>, LindbladReport)> {
    let mut samples = Vec::new();
    let report = evolve_lindblad_observed(model, grid, config, initial, |t, rho| {
        samples.push(Sample { t, state: rho.clone() });
    })?;
    Ok((samples, report))
}

pub fn evolve_lindblad_observed<F>(
    model: &Model,
    grid: &TimeGrid,
    config: &IntegratorConfig,
    initial: &DensityMatrix,
    mut observer: F,
) -> Result<LindbladReport>
where
    F: FnMut(f64, &DensityMatrix),
{
    grid.validate()?;
    config.validate()?;
    let full_dim = model.space().dim();
    if initial.dim() != full_dim {
        return Err(Error::DimensionMismatch {
            expected: full_dim,
            found: initial.dim(),
        });
    }

    let generator = Generator::new(model, &density_support(initial), config.restrict_to_reachable);
    let n = generator.dim();
    let mut rho = generator.reduce_density(initial);
    let mut scratch = vec![C64::new(0.0, 0.0); rho.len()];
    let mut stepper = Stepper::new(*config, rho.len());
    let mut rhs = |t: f64, x: &[C64], out: &mut [C64]| generator.lindblad_rhs(t, x, out, &mut scratch);

    let trace = |x: &[C64]| (0..n).map(|i| x[i * n + i].re).sum::<f64>();
    let trace0 = trace(&rho);
    let mut max_trace_drift: f64 = 0.0;
    let mut min_eigenvalue = f64::INFINITY;
    let mut warnings = Vec::new();
    let mut inspect = |t: f64, x: &[C64], observer: &mut F| {
        let embedded = generator.embed_density(x);
        max_trace_drift = max_trace_drift.max((trace(x) - trace0).abs());
        let reduced = DensityMatrix::from_elements(n, x.to_vec()).expect("square");
        let mut lowest = reduced.min_eigenvalue();
        if n < full_dim {
            // Unreachable states carry exact zeros.
            lowest = lowest.min(0.0);
        }
        if lowest < NEGATIVITY_WARNING {
            warnings.push(format!("eigenvalue {lowest:e} below {NEGATIVITY_WARNING:e} at t = {t}"));
        }
        min_eigenvalue = min_eigenvalue.min(lowest);
        observer(t, &embedded);
    };

    inspect(grid.time(0), &rho, &mut observer);
    for k in 0..grid.n_steps {
        stepper.advance(&mut rhs, grid.time(k), grid.time(k + 1), &mut rho)?;
        hermitize_slice(n, &mut rho);
        if grid.is_output(k + 1) {
            inspect(grid.time(k + 1), &rho, &mut observer);
        }
    }
    drop(inspect);

    Ok(LindbladReport {
        final_state: generator.embed_density(&rho),
        max_trace_drift,
        min_eigenvalue,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_schrodinger;
    use crate::hilbert::{BasisConfiguration, HilbertSpace, Level, Mode};
    use crate::model::{PhysicalParams, PulseSchedule};

    #[test]
    fn closed_limit_matches_schrodinger() {
        let model = Model::new(HilbertSpace::new(1).unwrap(), PhysicalParams::default()).unwrap();
        let grid = TimeGrid::new(-6.0, 16.0, 2000, 200).unwrap();
        let config = IntegratorConfig::default();
        let psi0 = model.initial_state();
        let pure = evolve_schrodinger(&model, &grid, &config, &psi0).unwrap();
        let (mixed, report) = evolve_lindblad(&model, &grid, &config, &psi0.outer()).unwrap();
        for (p, m) in pure.iter().zip(&mixed) {
            let outer = p.state.outer();
            for (a, b) in outer.as_slice().iter().zip(m.state.as_slice()) {
                assert!((a - b).norm() < 1e-6);
            }
        }
        assert!(report.max_trace_drift < 1e-7);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn single_photon_amplitude_damping() {
        let kappa = 0.35;
        let params = PhysicalParams {
            kappa,
            ..Default::default()
        };
        let model = Model::with_schedule(HilbertSpace::new(1).unwrap(), params, PulseSchedule::constant(0.0, 0.0, 0.0)).unwrap();
        let space = model.space();
        let one = space.basis_state(&BasisConfiguration::new(Level::G, [1, 0, 0, 0])).unwrap();
        let number = space.number(Mode::Cavity1Plus);
        let grid = TimeGrid::new(0.0, 5.0, 1000, 100).unwrap();
        let (samples, report) = evolve_lindblad(&model, &grid, &IntegratorConfig::default(), &one.outer()).unwrap();
        for s in samples {
            let n: f64 = number.triplets().map(|(r, c, v)| (v * s.state.get(c, r)).re).sum();
            assert!((n - (-2.0 * kappa * s.t).exp()).abs() < 1e-6);
        }
        assert!(report.max_trace_drift < 1e-12);
    }
}
