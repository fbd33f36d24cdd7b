//! Quantities reported by the simulations: named-state populations, success
//! probability, EPR fidelity and diagnostics.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, HilbertSpace, StateVector};
use crate::model::{NamedLabel, NamedManifoldBasis};

/// Minimum success-sector weight for a defined conditional fidelity.
pub const MIN_SECTOR_WEIGHT: f64 = 1e-12;

/// Read-only access shared by pure states and density matrices.
pub trait QuantumState {
    fn dim(&self) -> usize;

    /// Weight of basis state `index` (|ψᵢ|² or ρᵢᵢ).
    fn basis_population(&self, index: usize) -> f64;

    /// ⟨x|·|x⟩ for a vector given by its nonzero components.
    fn projector_expectation(&self, components: &[(usize, C64)]) -> f64;
}

impl QuantumState for StateVector {
    fn dim(&self) -> usize {
        StateVector::dim(self)
    }

    fn basis_population(&self, index: usize) -> f64 {
        self[index].norm_sqr()
    }

    fn projector_expectation(&self, components: &[(usize, C64)]) -> f64 {
        components.iter().map(|&(i, a)| a.conj() * self[i]).sum::<C64>().norm_sqr()
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn basis_population(&self, index: usize) -> f64 {
        self.get(index, index).re
    }

    fn projector_expectation(&self, components: &[(usize, C64)]) -> f64 {
        self.expectation_sparse(components)
    }
}

fn check_dim(state: &impl QuantumState, dim: usize) -> Result<()> {
    if state.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state.dim(),
        });
    }
    Ok(())
}

/// Populations of |A⟩…|H⟩.
pub fn populations_named(state: &impl QuantumState, basis: &NamedManifoldBasis) -> Result<[f64; 8]> {
    check_dim(state, basis.dim())?;
    Ok(NamedLabel::ALL.map(|l| state.projector_expectation(&basis.state(l).components)))
}

/// P = ⟨E|ρ|E⟩.
pub fn success_probability(state: &impl QuantumState, basis: &NamedManifoldBasis) -> Result<f64> {
    check_dim(state, basis.dim())?;
    Ok(state.projector_expectation(&basis.state(NamedLabel::E).components))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityMode {
    /// F = √⟨E|ρ|E⟩.
    Unconditional,
    /// F computed after projecting onto |g⟩ ⊗ (one photon per cavity) and
    /// renormalizing.
    Conditional,
}

impl FromStr for FidelityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unconditional" => Ok(FidelityMode::Unconditional),
            "conditional" => Ok(FidelityMode::Conditional),
            other => Err(Error::InvalidConfig(format!("unknown fidelity mode `{other}`"))),
        }
    }
}

impl fmt::Display for FidelityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FidelityMode::Unconditional => "unconditional",
            FidelityMode::Conditional => "conditional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fidelity {
    pub value: f64,
    /// Trace of the projected state (1 for the unconditional mode).
    pub weight: f64,
}

/// Amplitude fidelity with the EPR state |E⟩.
pub fn fidelity_epr(
    state: &impl QuantumState,
    space: &HilbertSpace,
    basis: &NamedManifoldBasis,
    mode: FidelityMode,
) -> Result<Fidelity> {
    check_dim(state, basis.dim())?;
    let p = success_probability(state, basis)?.max(0.0);
    match mode {
        FidelityMode::Unconditional => Ok(Fidelity {
            value: p.sqrt().min(1.0),
            weight: 1.0,
        }),
        FidelityMode::Conditional => {
            let weight = success_sector_weight(state, space);
            if weight < MIN_SECTOR_WEIGHT {
                return Err(Error::UndefinedFidelity { weight });
            }
            Ok(Fidelity {
                value: (p / weight).sqrt().min(1.0),
                weight,
            })
        }
    }
}

/// Population of |g⟩ with exactly one photon in each cavity.
pub fn success_sector_weight(state: &impl QuantumState, space: &HilbertSpace) -> f64 {
    NamedManifoldBasis::success_sector(space)
        .into_iter()
        .map(|i| state.basis_population(i))
        .sum()
}

/// Population of configurations with any mode at the photon cutoff.
pub fn truncation_leakage(state: &impl QuantumState, space: &HilbertSpace) -> f64 {
    space
        .configurations()
        .enumerate()
        .filter(|(_, c)| c.occupation.contains(&space.n_max()))
        .map(|(i, _)| state.basis_population(i))
        .sum()
}

/// |⟨D|ψ⟩|².
pub fn dark_state_overlap(state: &StateVector, dark: &StateVector) -> f64 {
    dark.inner(state).norm_sqr()
}

/// ⟨Q⟩ with Q = photon number − 1[atom ∈ {a, b}].
pub fn expectation_q(state: &impl QuantumState, space: &HilbertSpace) -> f64 {
    space
        .configurations()
        .enumerate()
        .map(|(i, c)| c.charge() as f64 * state.basis_population(i))
        .sum()
}

/// End-of-run figures of merit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub success_probability: f64,
    pub fidelity_unconditional: f64,
    /// `None` when the success sector is (numerically) empty.
    pub fidelity_conditional: Option<f64>,
    pub success_sector_weight: f64,
    pub leakage: f64,
    pub q_expectation: f64,
}

impl Metrics {
    pub fn evaluate(state: &impl QuantumState, space: &HilbertSpace, basis: &NamedManifoldBasis) -> Result<Self> {
        let unconditional = fidelity_epr(state, space, basis, FidelityMode::Unconditional)?;
        let conditional = match fidelity_epr(state, space, basis, FidelityMode::Conditional) {
            Ok(f) => Some(f.value),
            Err(Error::UndefinedFidelity { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            success_probability: success_probability(state, basis)?,
            fidelity_unconditional: unconditional.value,
            fidelity_conditional: conditional,
            success_sector_weight: success_sector_weight(state, space),
            leakage: truncation_leakage(state, space),
            q_expectation: expectation_q(state, space),
        })
    }
}

/// Per-sample columns of the populations output: eight named populations,
/// truncation leakage and dark-state overlap (pure states only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRow {
    pub populations: [f64; 8],
    pub leakage: f64,
    pub dark_overlap: Option<f64>,
}

impl SampleRow {
    pub fn for_state(
        psi: &StateVector,
        space: &HilbertSpace,
        basis: &NamedManifoldBasis,
        dark: Option<&StateVector>,
    ) -> Result<Self> {
        let norm = psi.norm_sqr();
        let normalized;
        let psi = if norm > 0.0 && (norm - 1.0).abs() > 1e-12 {
            normalized = psi.clone().normalized();
            &normalized
        } else {
            psi
        };
        Ok(Self {
            populations: populations_named(psi, basis)?,
            leakage: truncation_leakage(psi, space),
            dark_overlap: dark.map(|d| dark_state_overlap(psi, d)),
        })
    }

    /// For mixed states the dark-state overlap is ⟨D|ρ|D⟩.
    pub fn for_density(
        rho: &DensityMatrix,
        space: &HilbertSpace,
        basis: &NamedManifoldBasis,
        dark: Option<&StateVector>,
    ) -> Result<Self> {
        Ok(Self {
            populations: populations_named(rho, basis)?,
            leakage: truncation_leakage(rho, space),
            dark_overlap: dark.map(|d| rho.expectation(d)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{BasisConfiguration, Level};
    use NamedLabel::*;

    fn setup(n_max: usize) -> (HilbertSpace, NamedManifoldBasis) {
        let space = HilbertSpace::new(n_max).unwrap();
        let basis = NamedManifoldBasis::new(&space);
        (space, basis)
    }

    #[test]
    fn populations_of_basis_and_superposition() {
        let (_, basis) = setup(2);
        let pops = populations_named(&basis.vector(A), &basis).unwrap();
        assert_eq!(pops, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = basis.vector(A).scaled(C64::new(h, 0.0)).add(&basis.vector(E).scaled(C64::new(h, 0.0)));
        let pops = populations_named(&psi, &basis).unwrap();
        assert!((pops[0] - 0.5).abs() < 1e-15 && (pops[4] - 0.5).abs() < 1e-15);
        let rho_pops = populations_named(&psi.outer(), &basis).unwrap();
        for (a, b) in pops.iter().zip(&rho_pops) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(populations_named(&StateVector::zeros(3), &basis).is_err());
    }

    #[test]
    fn fidelity_of_target_state() {
        let (space, basis) = setup(2);
        let rho = basis.vector(E).outer();
        assert!((success_probability(&rho, &basis).unwrap() - 1.0).abs() < 1e-15);
        for mode in [FidelityMode::Unconditional, FidelityMode::Conditional] {
            let f = fidelity_epr(&rho, &space, &basis, mode).unwrap();
            assert!((f.value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn conditional_fidelity_renormalizes() {
        let (space, basis) = setup(1);
        // Half in |E⟩, half in the photon-free ground state.
        let vac = space.basis_state(&BasisConfiguration::new(Level::G, [0; 4])).unwrap();
        let mut rho = basis.vector(E).outer();
        rho.scale(0.5);
        rho.add_scaled(&vac.outer(), 0.5);
        let f = fidelity_epr(&rho, &space, &basis, FidelityMode::Conditional).unwrap();
        assert!((f.value - 1.0).abs() < 1e-15);
        assert!((f.weight - 0.5).abs() < 1e-15);
        let u = fidelity_epr(&rho, &space, &basis, FidelityMode::Unconditional).unwrap();
        assert!((u.value - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn conditional_fidelity_undefined_on_empty_sector() {
        let (space, basis) = setup(2);
        let vac = space.basis_state(&BasisConfiguration::new(Level::G, [0; 4])).unwrap();
        let err = fidelity_epr(&vac.outer(), &space, &basis, FidelityMode::Conditional).unwrap_err();
        assert!(matches!(err, Error::UndefinedFidelity { .. }));
        let m = Metrics::evaluate(&vac, &space, &basis).unwrap();
        assert_eq!(m.fidelity_conditional, None);
    }

    #[test]
    fn leakage_counts_cutoff_population() {
        let (space, basis) = setup(2);
        assert_eq!(truncation_leakage(&basis.vector(A), &space), 0.0);
        let (space1, basis1) = setup(1);
        assert!((truncation_leakage(&basis1.vector(A), &space1) - 1.0).abs() < 1e-15);
        let top = space.basis_state(&BasisConfiguration::new(Level::A, [0, 2, 0, 0])).unwrap();
        assert_eq!(truncation_leakage(&top, &space), 1.0);
    }

    #[test]
    fn charge_expectations() {
        let (space, basis) = setup(2);
        assert!((expectation_q(&basis.vector(A), &space) - 2.0).abs() < 1e-15);
        assert!((expectation_q(&basis.vector(C), &space) - 2.0).abs() < 1e-15);
        let one_lost = space.basis_state(&BasisConfiguration::new(Level::G, [0, 0, 1, 0])).unwrap();
        assert_eq!(expectation_q(&one_lost, &space), 1.0);
    }

    #[test]
    fn dark_overlap_bounds() {
        let (_, basis) = setup(1);
        let a = basis.vector(A);
        assert!((dark_state_overlap(&a, &a) - 1.0).abs() < 1e-15);
        assert_eq!(dark_state_overlap(&a, &basis.vector(E)), 0.0);
    }
}
