use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Complex amplitude vector on the composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            amplitudes: vec![C64::new(0.0, 0.0); dim],
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut s = Self::zeros(dim);
        s.amplitudes[index] = C64::new(1.0, 0.0);
        s
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm. A zero vector is left untouched.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_amplitudes(self.amplitudes.iter().map(|a| a * factor).collect())
    }

    pub fn add(&self, other: &StateVector) -> Self {
        Self::from_amplitudes(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a + b).collect())
    }

    /// Multiplies by the global phase that makes the first component whose
    /// magnitude exceeds `tol` (among `indices`, in order) real and positive.
    pub fn fix_phase(&mut self, indices: &[usize], tol: f64) {
        if let Some(&k) = indices.iter().find(|&&k| self.amplitudes[k].norm() > tol) {
            let phase = self.amplitudes[k].conj() / self.amplitudes[k].norm();
            self.amplitudes.iter_mut().for_each(|a| *a *= phase);
        }
    }

    pub fn outer(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for StateVector {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.amplitudes[i]
    }
}

impl IndexMut<usize> for StateVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.amplitudes[i]
    }
}

/// Dense `dim × dim` density matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    elements: Vec<C64>,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            elements: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let dim = state.dim();
        let a = state.as_slice();
        let mut elements = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                elements.push(a[r] * a[c].conj());
            }
        }
        Self { dim, elements }
    }

    pub fn from_elements(dim: usize, elements: Vec<C64>) -> Result<Self> {
        if elements.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: elements.len(),
            });
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.elements[r * self.dim + c]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.elements
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.elements
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// ⟨x|ρ|x⟩ for a vector given by its nonzero components.
    pub fn expectation_sparse(&self, components: &[(usize, C64)]) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for &(r, xr) in components {
            for &(c, xc) in components {
                acc += xr.conj() * self.get(r, c) * xc;
            }
        }
        acc.re
    }

    pub fn expectation(&self, x: &StateVector) -> f64 {
        let n = self.dim;
        let xs = x.as_slice();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..n {
            if xs[r] == C64::new(0.0, 0.0) {
                continue;
            }
            let row = &self.elements[r * n..(r + 1) * n];
            let inner: C64 = row.iter().zip(xs).map(|(m, v)| m * v).sum();
            acc += xs[r].conj() * inner;
        }
        acc.re
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Replaces ρ by (ρ + ρ†)/2.
    pub fn hermitize(&mut self) {
        hermitize_slice(self.dim, &mut self.elements);
    }

    pub fn add_scaled(&mut self, other: &DensityMatrix, factor: f64) {
        for (a, b) in self.elements.iter_mut().zip(&other.elements) {
            *a += b * factor;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.elements.iter_mut().for_each(|a| *a *= factor);
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let m = DMatrix::from_fn(n, n, |r, c| self.get(r, c));
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

pub(crate) fn hermitize_slice(n: usize, m: &mut [C64]) {
    for r in 0..n {
        m[r * n + r].im = 0.0;
        for c in (r + 1)..n {
            let avg = (m[r * n + c] + m[c * n + r].conj()) * 0.5;
            m[r * n + c] = avg;
            m[c * n + r] = avg.conj();
        }
    }
}
