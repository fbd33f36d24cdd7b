//! Physics of the two-cavity tripod scheme: pulse envelopes, the interaction
//! Hamiltonian, the named eight-state manifold and its dark states.
//!
//! All rates are in units of Γ and all times in units of Γ⁻¹.

mod basis;
mod dark;
mod hamiltonian;
mod pulses;

pub use basis::{NamedLabel, NamedManifoldBasis, NamedState};
pub use dark::{mixing_angles, DarkStateAngles};
pub use hamiltonian::{HamiltonianTerms, ManifoldTable};
pub use pulses::{PulseKind, PulseSchedule, PulseShape};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, SparseOperator, StateVector};

/// Coupling strengths, widths and rates of the protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Peak pump Rabi frequency Ω₀.
    pub omega0: f64,
    /// Peak vacuum Rabi coupling of cavity 1.
    pub g10: f64,
    /// Peak vacuum Rabi coupling of cavity 2.
    pub g20: f64,
    /// Gaussian width of the pump.
    pub tau_p: f64,
    /// Gaussian width of both cavity couplings.
    pub tau_c: f64,
    /// Offset between consecutive pulse centers.
    pub delta_t: f64,
    /// Common detuning Δ (two-photon resonance is built in).
    pub detuning: f64,
    /// Cavity field decay rate κ; photon number decays at 2κ.
    pub kappa: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            omega0: 50.0,
            g10: 10.0,
            g20: 10.0,
            tau_p: 2.5,
            tau_c: 2.5,
            delta_t: 4.5,
            detuning: 0.0,
            kappa: 0.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("omega0", self.omega0),
            ("g10", self.g10),
            ("g20", self.g20),
            ("tau_p", self.tau_p),
            ("tau_c", self.tau_c),
            ("delta_t", self.delta_t),
            ("detuning", self.detuning),
            ("kappa", self.kappa),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("{name} must be finite")));
        }
        for (name, v) in [("tau_p", self.tau_p), ("tau_c", self.tau_c)] {
            if v <= 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [("omega0", self.omega0), ("g10", self.g10), ("g20", self.g20), ("kappa", self.kappa)] {
            if v < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Reference coupling g₀ used for κ/g₀ ratios.
    pub fn g0(&self) -> f64 {
        self.g10
    }
}

/// A fully specified protocol: space, parameters, pulses and the
/// precomputed operator pieces needed to evaluate H(t).
#[derive(Debug, Clone)]
pub struct Model {
    space: HilbertSpace,
    params: PhysicalParams,
    schedule: PulseSchedule,
    terms: HamiltonianTerms,
    basis: NamedManifoldBasis,
}

impl Model {
    pub fn new(space: HilbertSpace, params: PhysicalParams) -> Result<Self> {
        let schedule = PulseSchedule::gaussian(&params);
        Self::with_schedule(space, params, schedule)
    }

    pub fn with_schedule(space: HilbertSpace, params: PhysicalParams, schedule: PulseSchedule) -> Result<Self> {
        params.validate()?;
        let terms = HamiltonianTerms::new(&space);
        let basis = NamedManifoldBasis::new(&space);
        Ok(Self {
            space,
            params,
            schedule,
            terms,
            basis,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn schedule(&self) -> &PulseSchedule {
        &self.schedule
    }

    pub fn terms(&self) -> &HamiltonianTerms {
        &self.terms
    }

    pub fn named_basis(&self) -> &NamedManifoldBasis {
        &self.basis
    }

    pub fn pulse_value(&self, which: PulseKind, t: f64) -> f64 {
        self.schedule.value(which, t)
    }

    /// Couplings (Ω, g₁, g₂) at time t.
    pub fn couplings(&self, t: f64) -> (f64, f64, f64) {
        self.schedule.couplings(t)
    }

    /// H(t) = Δσ_ee + Ω(σ_eg + σ_ge) + Σᵢ gᵢ(a†ᵢ₊σ_ae + a†ᵢ₋σ_be + h.c.).
    pub fn hamiltonian(&self, t: f64) -> SparseOperator {
        let (omega, g1, g2) = self.couplings(t);
        self.terms.assemble(self.params.detuning, omega, g1, g2)
    }

    /// H(t) − iκ Σ a†a, the no-jump generator of the trajectory method.
    pub fn effective_hamiltonian(&self, t: f64) -> SparseOperator {
        let (omega, g1, g2) = self.couplings(t);
        self.terms.assemble_effective(self.params.detuning, omega, g1, g2, self.params.kappa)
    }

    /// ⟨X|H(t)|Y⟩ over the named states A…H.
    pub fn manifold_matrix_elements(&self, t: f64) -> ManifoldTable {
        ManifoldTable::compute(&self.hamiltonian(t), &self.basis)
    }

    pub fn mixing_angles(&self, t: f64) -> DarkStateAngles {
        let (omega, g1, g2) = self.couplings(t);
        mixing_angles(omega, g1, g2)
    }

    pub fn dark_state_stage1(&self, t: f64) -> Result<StateVector> {
        let (omega, g1, _) = self.couplings(t);
        dark::stage1(&self.basis, omega, g1).ok_or(Error::UndefinedAngle { t })
    }

    pub fn dark_state_stage2(&self, t: f64) -> Result<StateVector> {
        let (omega, _, g2) = self.couplings(t);
        dark::stage2(&self.basis, omega, g2).ok_or(Error::UndefinedAngle { t })
    }

    pub fn dark_state_global(&self, t: f64) -> Result<StateVector> {
        let (omega, g1, g2) = self.couplings(t);
        dark::global(&self.basis, omega, g1, g2).ok_or(Error::UndefinedAngle { t })
    }

    /// Initial protocol state |A⟩ = |g⟩|00⟩₁|11⟩₂.
    pub fn initial_state(&self) -> StateVector {
        self.basis.vector(NamedLabel::A)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        PhysicalParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_widths_and_rates() {
        let p = PhysicalParams {
            tau_c: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = PhysicalParams {
            kappa: -1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = PhysicalParams {
            omega0: f64::NAN,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
