use super::generator::{state_support, Generator};
use super::integrator::Stepper;
use super::{IntegratorConfig, Sample, TimeGrid};
use crate::error::Result;
use crate::hilbert::StateVector;
use crate::model::Model;

/// Integrates i dψ/dt = H(t) ψ and returns ψ at every output time.
pub fn evolve_schrodinger(
    model: &Model,
    grid: &TimeGrid,
    config: &IntegratorConfig,
    initial: &StateVector,
) -> Result<Vec<Sample<StateVector>>> {
    let mut samples = Vec::new();
    evolve_schrodinger_observed(model, grid, config, initial, |t, psi| {
        samples.push(Sample { t, state: psi.clone() });
    })?;
    Ok(samples)
}

/// Like [`evolve_schrodinger`] but hands each sampled state to `observer`
/// instead of collecting them.
pub fn evolve_schrodinger_observed<F>(
    model: &Model,
    grid: &TimeGrid,
    config: &IntegratorConfig,
    initial: &StateVector,
    mut observer: F,
) -> Result<()>
where
    F: FnMut(f64, &StateVector),
{
    grid.validate()?;
    config.validate()?;
    initial.check_dim(model.space().dim())?;

    let generator = Generator::new(model, &state_support(initial), config.restrict_to_reachable);
    let mut psi = generator.reduce_state(initial);
    let mut stepper = Stepper::new(*config, psi.len());
    let mut rhs = |t: f64, x: &[_], out: &mut [_]| generator.schrodinger_rhs(t, x, out, false);

    observer(grid.time(0), &generator.embed_state(&psi));
    for k in 0..grid.n_steps {
        stepper.advance(&mut rhs, grid.time(k), grid.time(k + 1), &mut psi)?;
        if config.renormalize_each_step {
            let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                psi.iter_mut().for_each(|a| *a /= norm);
            }
        }
        if grid.is_output(k + 1) {
            observer(grid.time(k + 1), &generator.embed_state(&psi));
        }
    }
    Ok(())
}
