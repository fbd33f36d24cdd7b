//! Time-dependent generators restricted to the reachable subspace.
//!
//! Starting from the support of the initial state, the coherent couplings
//! and the photon-loss jumps only ever populate a closed set of basis
//! states. Evolving on that set is exact and much cheaper than the full
//! space (92 of 324 states for the protocol at n_max = 2).

use std::collections::VecDeque;

use num_complex::Complex64 as C64;

use crate::hilbert::{DensityMatrix, Mode, SparseOperator, StateVector};
use crate::model::Model;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Lowering operator of one mode in reduced coordinates: each entry maps a
/// source index to a destination index with amplitude √n.
#[derive(Debug, Clone)]
pub(crate) struct Jump {
    pub mode: Mode,
    pub map: Vec<(usize, usize, f64)>,
}

impl Jump {
    /// out = a · x
    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|v| *v = ZERO);
        for &(src, dst, amp) in &self.map {
            out[dst] += x[src] * amp;
        }
    }

    /// ‖a x‖²
    pub fn weight(&self, x: &[C64]) -> f64 {
        // Each destination has at most one source, so no cross terms.
        self.map.iter().map(|&(src, _, amp)| amp * amp * x[src].norm_sqr()).sum()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Generator<'m> {
    model: &'m Model,
    /// Reduced position → full basis index.
    pub indices: Vec<usize>,
    detuning: SparseOperator,
    pump: SparseOperator,
    cavity1: SparseOperator,
    cavity2: SparseOperator,
    photon_number: Vec<f64>,
    pub jumps: Vec<Jump>,
}

impl<'m> Generator<'m> {
    /// `support` lists full-space indices carrying initial weight. With
    /// `restrict` false the generator spans the whole space.
    pub fn new(model: &'m Model, support: &[usize], restrict: bool) -> Self {
        let space = model.space();
        let terms = model.terms();
        let dim = space.dim();
        let kappa = model.params().kappa;

        let indices: Vec<usize> = if restrict {
            let mut active: Vec<&SparseOperator> = Vec::new();
            let schedule = model.schedule();
            if model.params().detuning != 0.0 {
                active.push(&terms.detuning);
            }
            if !schedule.pump.is_identically_zero() {
                active.push(&terms.pump);
            }
            if !schedule.g1.is_identically_zero() {
                active.push(&terms.cavity1);
            }
            if !schedule.g2.is_identically_zero() {
                active.push(&terms.cavity2);
            }
            let lowering: Vec<SparseOperator> = if kappa > 0.0 {
                Mode::ALL.iter().map(|&m| space.annihilation(m)).collect()
            } else {
                Vec::new()
            };
            active.extend(lowering.iter());
            closure(dim, support, &active)
        } else {
            (0..dim).collect()
        };

        let mut position = vec![usize::MAX; dim];
        for (k, &i) in indices.iter().enumerate() {
            position[i] = k;
        }

        let jumps = if kappa > 0.0 {
            Mode::ALL
                .iter()
                .map(|&mode| {
                    let map = space
                        .annihilation(mode)
                        .triplets()
                        .filter(|&(_, col, _)| position[col] != usize::MAX)
                        .map(|(row, col, v)| {
                            debug_assert!(position[row] != usize::MAX, "reachable set not closed under jumps");
                            (position[col], position[row], v.re)
                        })
                        .collect();
                    Jump { mode, map }
                })
                .collect()
        } else {
            Vec::new()
        };

        Self {
            model,
            detuning: terms.detuning.restrict(&indices),
            pump: terms.pump.restrict(&indices),
            cavity1: terms.cavity1.restrict(&indices),
            cavity2: terms.cavity2.restrict(&indices),
            photon_number: indices.iter().map(|&i| terms.photon_number[i]).collect(),
            jumps,
            indices,
        }
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn kappa(&self) -> f64 {
        self.model.params().kappa
    }

    fn coefficients(&self, t: f64) -> [C64; 4] {
        let (omega, g1, g2) = self.model.couplings(t);
        [self.model.params().detuning, omega, g1, g2].map(|x| C64::new(x, 0.0))
    }

    /// out = −i H(t) x, plus −κ N x when `damped`.
    pub fn schrodinger_rhs(&self, t: f64, x: &[C64], out: &mut [C64], damped: bool) {
        let minus_i = C64::new(0.0, -1.0);
        out.iter_mut().for_each(|v| *v = ZERO);
        let ops = [&self.detuning, &self.pump, &self.cavity1, &self.cavity2];
        for (op, coef) in ops.into_iter().zip(self.coefficients(t)) {
            if coef != ZERO {
                op.apply_add(minus_i * coef, x, out);
            }
        }
        let kappa = self.kappa();
        if damped && kappa > 0.0 {
            for ((o, xi), n) in out.iter_mut().zip(x).zip(&self.photon_number) {
                *o -= xi * (kappa * n);
            }
        }
    }

    /// Right-hand side of the master equation for a row-major reduced ρ:
    /// Y + Y† + 2κ Σ a ρ a† with Y = −i H_eff ρ.
    pub fn lindblad_rhs(&self, t: f64, rho: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        let n = self.dim();
        let minus_i = C64::new(0.0, -1.0);
        scratch.iter_mut().for_each(|v| *v = ZERO);
        let ops = [&self.detuning, &self.pump, &self.cavity1, &self.cavity2];
        for (op, coef) in ops.into_iter().zip(self.coefficients(t)) {
            if coef != ZERO {
                op.apply_add_dense(minus_i * coef, rho, scratch);
            }
        }
        let kappa = self.kappa();
        if kappa > 0.0 {
            for (r, &nr) in self.photon_number.iter().enumerate() {
                if nr != 0.0 {
                    let f = kappa * nr;
                    for (s, v) in scratch[r * n..(r + 1) * n].iter_mut().zip(&rho[r * n..(r + 1) * n]) {
                        *s -= v * f;
                    }
                }
            }
        }
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] = scratch[r * n + c] + scratch[c * n + r].conj();
            }
        }
        if kappa > 0.0 {
            let rate = 2.0 * kappa;
            for jump in &self.jumps {
                for &(sr, dr, ar) in &jump.map {
                    let row = &rho[sr * n..(sr + 1) * n];
                    let dst = &mut out[dr * n..(dr + 1) * n];
                    let f = rate * ar;
                    for &(sc, dc, ac) in &jump.map {
                        dst[dc] += row[sc] * (f * ac);
                    }
                }
            }
        }
    }

    pub fn reduce_state(&self, psi: &StateVector) -> Vec<C64> {
        self.indices.iter().map(|&i| psi[i]).collect()
    }

    pub fn embed_state(&self, x: &[C64]) -> StateVector {
        let mut psi = StateVector::zeros(self.model.space().dim());
        for (&i, &v) in self.indices.iter().zip(x) {
            psi[i] = v;
        }
        psi
    }

    pub fn reduce_density(&self, rho: &DensityMatrix) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.dim() * self.dim());
        for &r in &self.indices {
            for &c in &self.indices {
                out.push(rho.get(r, c));
            }
        }
        out
    }

    pub fn embed_density(&self, x: &[C64]) -> DensityMatrix {
        let full = self.model.space().dim();
        let n = self.dim();
        let mut elements = vec![ZERO; full * full];
        for (a, &r) in self.indices.iter().enumerate() {
            for (b, &c) in self.indices.iter().enumerate() {
                elements[r * full + c] = x[a * n + b];
            }
        }
        DensityMatrix::from_elements(full, elements).expect("square by construction")
    }
}

/// Smallest index set containing `seed` and closed under the sparsity
/// patterns of `ops` (applied as maps column → row).
fn closure(dim: usize, seed: &[usize], ops: &[&SparseOperator]) -> Vec<usize> {
    let transposed: Vec<SparseOperator> = ops.iter().map(|op| op.adjoint()).collect();
    let mut seen = vec![false; dim];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &i in seed {
        if !seen[i] {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(col) = queue.pop_front() {
        for op in &transposed {
            for (row, _) in op.row(col) {
                if !seen[row] {
                    seen[row] = true;
                    queue.push_back(row);
                }
            }
        }
    }
    (0..dim).filter(|&i| seen[i]).collect()
}

pub(crate) fn state_support(psi: &StateVector) -> Vec<usize> {
    (0..psi.dim()).filter(|&i| psi[i] != ZERO).collect()
}

pub(crate) fn density_support(rho: &DensityMatrix) -> Vec<usize> {
    let n = rho.dim();
    (0..n)
        .filter(|&i| (0..n).any(|j| rho.get(i, j) != ZERO || rho.get(j, i) != ZERO))
        .collect()
}
