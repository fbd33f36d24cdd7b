use num_complex::Complex64 as C64;

use super::basis::{NamedLabel, NamedManifoldBasis};
use crate::hilbert::{HilbertSpace, Level, Mode, SparseOperator};

/// Time-independent operator pieces of the interaction Hamiltonian.
///
/// H(t) = Δ·`detuning` + Ω(t)·`pump` + g₁(t)·`cavity1` + g₂(t)·`cavity2`,
/// each piece already Hermitian.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    pub detuning: SparseOperator,
    pub pump: SparseOperator,
    pub cavity1: SparseOperator,
    pub cavity2: SparseOperator,
    /// Total photon number, diagonal.
    pub photon_number: Vec<f64>,
}

impl HamiltonianTerms {
    pub fn new(space: &HilbertSpace) -> Self {
        let detuning = space.atomic_transition(Level::E, Level::E);
        let eg = space.atomic_transition(Level::E, Level::G);
        let pump = eg.add(&eg.adjoint());

        let cavity = |plus: Mode, minus: Mode| {
            let emit_plus = space.creation(plus).matmul(&space.atomic_transition(Level::A, Level::E));
            let emit_minus = space.creation(minus).matmul(&space.atomic_transition(Level::B, Level::E));
            let emit = emit_plus.add(&emit_minus);
            emit.add(&emit.adjoint())
        };

        Self {
            detuning,
            pump,
            cavity1: cavity(Mode::Cavity1Plus, Mode::Cavity1Minus),
            cavity2: cavity(Mode::Cavity2Plus, Mode::Cavity2Minus),
            photon_number: space.photon_numbers(),
        }
    }

    pub fn dim(&self) -> usize {
        self.pump.dim()
    }

    pub fn assemble(&self, detuning: f64, omega: f64, g1: f64, g2: f64) -> SparseOperator {
        let r = |x: f64| C64::new(x, 0.0);
        self.detuning
            .scale(r(detuning))
            .add(&self.pump.scale(r(omega)))
            .add(&self.cavity1.scale(r(g1)))
            .add(&self.cavity2.scale(r(g2)))
    }

    pub fn assemble_effective(&self, detuning: f64, omega: f64, g1: f64, g2: f64, kappa: f64) -> SparseOperator {
        let damping: Vec<C64> = self.photon_number.iter().map(|&n| C64::new(0.0, -kappa * n)).collect();
        self.assemble(detuning, omega, g1, g2).add(&SparseOperator::diagonal(&damping))
    }
}

/// 8×8 matrix of ⟨X|H|Y⟩ over the named states, rows/columns in A…H order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldTable(pub [[C64; 8]; 8]);

impl ManifoldTable {
    pub fn compute(h: &SparseOperator, basis: &NamedManifoldBasis) -> Self {
        let mut table = [[C64::new(0.0, 0.0); 8]; 8];
        for x in NamedLabel::ALL {
            for y in NamedLabel::ALL {
                let bra = basis.state(x);
                let ket = basis.state(y);
                let mut acc = C64::new(0.0, 0.0);
                for &(r, xr) in &bra.components {
                    for &(c, yc) in &ket.components {
                        acc += xr.conj() * h.get(r, c) * yc;
                    }
                }
                table[x.index()][y.index()] = acc;
            }
        }
        Self(table)
    }

    pub fn get(&self, bra: NamedLabel, ket: NamedLabel) -> C64 {
        self.0[bra.index()][ket.index()]
    }
}
