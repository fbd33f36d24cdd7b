//! Truncated composite Hilbert space of a tripod atom and four cavity modes.
//!
//! Basis states are ordered atom-major, then by mode occupation in the
//! declared mode order with the last mode varying fastest:
//!
//! ```text
//! index = atom * (n_max+1)^4 + n[c1+] * (n_max+1)^3 + n[c1-] * (n_max+1)^2
//!       + n[c2+] * (n_max+1) + n[c2-]
//! ```
//!
//! with atoms ordered `g, a, b, e`. Column meanings of every state dump rely
//! on this ordering, so it must not change.

mod sparse;
mod state;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

pub use sparse::SparseOperator;
pub use state::{DensityMatrix, StateVector};
pub(crate) use state::hermitize_slice;

use crate::error::{Error, Result};

/// Atomic level of the tripod atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    G,
    A,
    B,
    E,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::G, Level::A, Level::B, Level::E];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g" => Ok(Level::G),
            "a" => Ok(Level::A),
            "b" => Ok(Level::B),
            "e" => Ok(Level::E),
            other => Err(Error::UnknownLevel(other.to_string())),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Level::G => "g",
            Level::A => "a",
            Level::B => "b",
            Level::E => "e",
        };
        f.write_str(s)
    }
}

/// Cavity mode: cavity index and circular polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Cavity1Plus,
    Cavity1Minus,
    Cavity2Plus,
    Cavity2Minus,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::Cavity1Plus,
        Mode::Cavity1Minus,
        Mode::Cavity2Plus,
        Mode::Cavity2Minus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// 1 or 2.
    pub fn cavity(self) -> usize {
        match self {
            Mode::Cavity1Plus | Mode::Cavity1Minus => 1,
            Mode::Cavity2Plus | Mode::Cavity2Minus => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Cavity1Plus => "c1+",
            Mode::Cavity1Minus => "c1-",
            Mode::Cavity2Plus => "c2+",
            Mode::Cavity2Minus => "c2-",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "c1+" | "cavity1+" | "cavity1-sigma+" => Ok(Mode::Cavity1Plus),
            "c1-" | "cavity1-" | "cavity1-sigma-" => Ok(Mode::Cavity1Minus),
            "c2+" | "cavity2+" | "cavity2-sigma+" => Ok(Mode::Cavity2Plus),
            "c2-" | "cavity2-" | "cavity2-sigma-" => Ok(Mode::Cavity2Minus),
            other => Err(Error::UnknownMode(other.to_string())),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A product basis state: atomic level plus photon count per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisConfiguration {
    pub atom: Level,
    /// Photon counts in `Mode::ALL` order.
    pub occupation: [usize; 4],
}

impl BasisConfiguration {
    pub fn new(atom: Level, occupation: [usize; 4]) -> Self {
        Self { atom, occupation }
    }

    pub fn photons(&self) -> usize {
        self.occupation.iter().sum()
    }

    pub fn photons_in_cavity(&self, cavity: usize) -> usize {
        match cavity {
            1 => self.occupation[0] + self.occupation[1],
            2 => self.occupation[2] + self.occupation[3],
            _ => 0,
        }
    }

    /// Excitation charge: photon number minus one when the atom sits in a
    /// metastable level. Conserved by the coherent coupling.
    pub fn charge(&self) -> i64 {
        let shelved = matches!(self.atom, Level::A | Level::B) as i64;
        self.photons() as i64 - shelved
    }
}

impl fmt::Display for BasisConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.occupation;
        write!(f, "|{};{}{},{}{}>", self.atom, n[0], n[1], n[2], n[3])
    }
}

/// Composite space {g,a,b,e} ⊗ four bosonic modes truncated at `n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    n_max: usize,
    base: usize,
    dim: usize,
}

impl HilbertSpace {
    pub const ATOM_DIM: usize = 4;
    pub const MODES: [Mode; 4] = Mode::ALL;

    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidCutoff(n_max));
        }
        let base = n_max + 1;
        Ok(Self {
            n_max,
            base,
            dim: Self::ATOM_DIM * base.pow(4),
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn mode_stride(&self, mode: Mode) -> usize {
        self.base.pow(3 - mode.index() as u32)
    }

    pub fn index_of(&self, config: &BasisConfiguration) -> Result<usize> {
        let mut index = config.atom.index();
        for &n in &config.occupation {
            if n > self.n_max {
                return Err(Error::OccupationOutOfRange {
                    occupation: n,
                    n_max: self.n_max,
                });
            }
            index = index * self.base + n;
        }
        Ok(index)
    }

    pub fn state_of(&self, index: usize) -> Result<BasisConfiguration> {
        if index >= self.dim {
            return Err(Error::IndexOutOfRange {
                index,
                dim: self.dim,
            });
        }
        Ok(self.config_unchecked(index))
    }

    fn config_unchecked(&self, mut index: usize) -> BasisConfiguration {
        let mut occupation = [0; 4];
        for slot in occupation.iter_mut().rev() {
            *slot = index % self.base;
            index /= self.base;
        }
        BasisConfiguration {
            atom: Level::ALL[index],
            occupation,
        }
    }

    /// All basis configurations in index order.
    pub fn configurations(&self) -> impl Iterator<Item = BasisConfiguration> + '_ {
        (0..self.dim).map(|i| self.config_unchecked(i))
    }

    /// Bosonic lowering operator on `mode`, identity on everything else.
    pub fn annihilation(&self, mode: Mode) -> SparseOperator {
        let stride = self.mode_stride(mode);
        let triplets = self.configurations().enumerate().filter_map(|(col, cfg)| {
            let n = cfg.occupation[mode.index()];
            (n > 0).then(|| (col - stride, col, C64::new((n as f64).sqrt(), 0.0)))
        });
        SparseOperator::from_triplets(self.dim, triplets)
    }

    /// Truncated raising operator; the top Fock level maps to zero.
    pub fn creation(&self, mode: Mode) -> SparseOperator {
        self.annihilation(mode).adjoint()
    }

    pub fn number(&self, mode: Mode) -> SparseOperator {
        let triplets = self.configurations().enumerate().filter_map(|(i, cfg)| {
            let n = cfg.occupation[mode.index()];
            (n > 0).then(|| (i, i, C64::new(n as f64, 0.0)))
        });
        SparseOperator::from_triplets(self.dim, triplets)
    }

    /// |upper⟩⟨lower| on the atom, identity on the modes.
    pub fn atomic_transition(&self, upper: Level, lower: Level) -> SparseOperator {
        let block = self.base.pow(4);
        let shift = |level: Level| level.index() * block;
        let triplets =
            (0..block).map(|photons| (shift(upper) + photons, shift(lower) + photons, C64::new(1.0, 0.0)));
        SparseOperator::from_triplets(self.dim, triplets)
    }

    /// Diagonal of the total photon number.
    pub fn photon_numbers(&self) -> Vec<f64> {
        self.configurations().map(|c| c.photons() as f64).collect()
    }

    /// Diagonal of the excitation charge Q.
    pub fn charges(&self) -> Vec<f64> {
        self.configurations().map(|c| c.charge() as f64).collect()
    }

    pub fn basis_state(&self, config: &BasisConfiguration) -> Result<StateVector> {
        let index = self.index_of(config)?;
        Ok(StateVector::basis(self.dim, index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn dimensions() {
        assert_eq!(HilbertSpace::new(1).unwrap().dim(), 64);
        assert_eq!(HilbertSpace::new(2).unwrap().dim(), 324);
        assert!(matches!(HilbertSpace::new(0), Err(Error::InvalidCutoff(0))));
    }

    #[test]
    fn index_round_trip_exhaustive() {
        let space = HilbertSpace::new(1).unwrap();
        for i in 0..space.dim() {
            let cfg = space.state_of(i).unwrap();
            assert_eq!(space.index_of(&cfg).unwrap(), i);
        }
        let vacuum = BasisConfiguration::new(Level::G, [0; 4]);
        assert_eq!(space.index_of(&vacuum).unwrap(), 0);
        assert!(space.state_of(64).is_err());
        let over = BasisConfiguration::new(Level::G, [0, 2, 0, 0]);
        assert!(matches!(
            space.index_of(&over),
            Err(Error::OccupationOutOfRange { occupation: 2, n_max: 1 })
        ));
    }

    #[test]
    fn ordering_is_atom_major() {
        let space = HilbertSpace::new(2).unwrap();
        let cfg = space.state_of(81).unwrap();
        assert_eq!(cfg, BasisConfiguration::new(Level::A, [0; 4]));
        let cfg = space.state_of(1).unwrap();
        assert_eq!(cfg.occupation, [0, 0, 0, 1]);
    }

    #[test]
    fn mode_labels() {
        assert_eq!("c2-".parse::<Mode>().unwrap(), Mode::Cavity2Minus);
        assert!(matches!("c3+".parse::<Mode>(), Err(Error::UnknownMode(_))));
        assert!("x".parse::<Level>().is_err());
    }

    #[test]
    fn ladder_action() {
        let space = HilbertSpace::new(2).unwrap();
        let mode = Mode::Cavity1Minus;
        let a = space.annihilation(mode);
        let vac = space.basis_state(&BasisConfiguration::new(Level::G, [0; 4])).unwrap();
        assert!(a.apply(&vac).norm_sqr() == 0.0);

        let one = space.basis_state(&BasisConfiguration::new(Level::B, [0, 1, 0, 0])).unwrap();
        let raised = a.adjoint().apply(&one);
        let two = space.index_of(&BasisConfiguration::new(Level::B, [0, 2, 0, 0])).unwrap();
        assert!(close(raised[two], C64::new(2f64.sqrt(), 0.0)));
        assert!((raised.norm_sqr() - 2.0).abs() < 1e-14);

        let n = a.adjoint().matmul(&a);
        assert!(close(one.inner(&n.apply(&one)), C64::new(1.0, 0.0)));
    }

    #[test]
    fn creation_truncates_at_cutoff() {
        let space = HilbertSpace::new(1).unwrap();
        let top = space.basis_state(&BasisConfiguration::new(Level::E, [0, 0, 1, 0])).unwrap();
        let out = space.creation(Mode::Cavity2Plus).apply(&top);
        assert_eq!(out.norm_sqr(), 0.0);
    }

    #[test]
    fn atomic_transitions() {
        let space = HilbertSpace::new(1).unwrap();
        let eg = space.atomic_transition(Level::E, Level::G);
        let g = space.basis_state(&BasisConfiguration::new(Level::G, [1, 0, 0, 1])).unwrap();
        let e = space.basis_state(&BasisConfiguration::new(Level::E, [1, 0, 0, 1])).unwrap();
        assert_eq!(eg.apply(&g), e);
        let a = space.basis_state(&BasisConfiguration::new(Level::A, [1, 0, 0, 1])).unwrap();
        assert_eq!(eg.apply(&a).norm_sqr(), 0.0);
        let ee = space.atomic_transition(Level::E, Level::E);
        assert!(ee.matmul(&ee).approx_eq(&ee, 0.0));
    }

    #[test]
    fn canonical_commutator_below_cutoff() {
        let space = HilbertSpace::new(2).unwrap();
        for mode in Mode::ALL {
            let a = space.annihilation(mode);
            let ad = a.adjoint();
            let comm = a.matmul(&ad).sub(&ad.matmul(&a));
            for (i, cfg) in space.configurations().enumerate() {
                let n = cfg.occupation[mode.index()];
                let diag = comm.get(i, i);
                let expected = if n < space.n_max() { 1.0 } else { -(n as f64) };
                assert!(close(diag, C64::new(expected, 0.0)), "{cfg} {diag}");
            }
            // Off-diagonal part of the commutator vanishes.
            for (r, c, v) in comm.triplets() {
                assert!(r == c || v.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn distinct_modes_commute() {
        let space = HilbertSpace::new(2).unwrap();
        for m1 in Mode::ALL {
            for m2 in Mode::ALL {
                if m1 == m2 {
                    continue;
                }
                let a = space.annihilation(m1);
                let b = space.creation(m2);
                let ab = a.matmul(&b);
                let ba = b.matmul(&a);
                assert!(ab.approx_eq(&ba, 0.0));
            }
        }
    }

    #[test]
    fn charge_of_named_configurations() {
        let a = BasisConfiguration::new(Level::G, [0, 0, 1, 1]);
        assert_eq!(a.charge(), 2);
        let c = BasisConfiguration::new(Level::A, [1, 0, 1, 1]);
        assert_eq!(c.charge(), 2);
    }
}
