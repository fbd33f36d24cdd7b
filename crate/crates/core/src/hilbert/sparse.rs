use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::StateVector;

/// Square complex matrix in compressed sparse row form.
///
/// Assembly sums duplicate `(row, col)` entries and drops exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOperator {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut merged: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}x{dim}");
            *merged.entry((r, c)).or_default() += v;
        }
        let mut row_ptr = vec![0; dim + 1];
        let mut col_idx = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for ((r, c), v) in merged {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (r, c, v * factor)))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let triplets = (0..self.dim).flat_map(|r| {
            self.row(r)
                .flat_map(move |(k, a)| other.row(k).map(move |(c, b)| (r, c, a * b)))
                .collect::<Vec<_>>()
        });
        Self::from_triplets(self.dim, triplets)
    }

    /// `out = self · x`.
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *slot = acc;
        }
    }

    /// `out += factor · self · x`.
    pub fn apply_add(&self, factor: C64, x: &[C64], out: &mut [C64]) {
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *slot += factor * acc;
        }
    }

    /// `out += factor · self · m` for a row-major `dim × dim` matrix `m`.
    pub fn apply_add_dense(&self, factor: C64, m: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for r in 0..n {
            let dst = &mut out[r * n..(r + 1) * n];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let coef = factor * self.values[k];
                let src = &m[self.col_idx[k] * n..(self.col_idx[k] + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += coef * s;
                }
            }
        }
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(state.as_slice(), &mut out);
        StateVector::from_amplitudes(out)
    }

    /// Restriction to the rows and columns listed in `indices` (in that order).
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut position = vec![usize::MAX; self.dim];
        for (new, &old) in indices.iter().enumerate() {
            position[old] = new;
        }
        let triplets = indices.iter().enumerate().flat_map(|(new_r, &old_r)| {
            let position = &position;
            self.row(old_r)
                .filter(move |(c, _)| position[*c] != usize::MAX)
                .map(move |(c, v)| (new_r, position[c], v))
        });
        Self::from_triplets(indices.len(), triplets.collect::<Vec<_>>())
    }

    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let mut dense = vec![vec![C64::new(0.0, 0.0); self.dim]; self.dim];
        for (r, c, v) in self.triplets() {
            dense[r][c] = v;
        }
        dense
    }

    /// Largest absolute row sum; an upper bound on the spectral norm for
    /// Hermitian operators.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.sub(other).triplets().all(|(_, _, v)| v.norm() <= tol)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }
}
