use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{BasisConfiguration, HilbertSpace, Level, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedLabel {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

impl NamedLabel {
    pub const ALL: [NamedLabel; 8] = [
        NamedLabel::A,
        NamedLabel::B,
        NamedLabel::C,
        NamedLabel::D,
        NamedLabel::E,
        NamedLabel::F,
        NamedLabel::G,
        NamedLabel::H,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        (b'A' + self as u8) as char
    }
}

impl fmt::Display for NamedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for NamedLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        NamedLabel::ALL
            .into_iter()
            .find(|l| l.to_string() == upper)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown named state `{s}`")))
    }
}

/// A named manifold state stored by its nonzero components.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedState {
    pub label: NamedLabel,
    pub components: Vec<(usize, C64)>,
}

/// The eight states |A⟩…|H⟩ of the one-photon-in-cavity-1 manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedManifoldBasis {
    dim: usize,
    states: Vec<NamedState>,
}

impl NamedManifoldBasis {
    pub fn new(space: &HilbertSpace) -> Self {
        let idx = |atom: Level, occ: [usize; 4]| {
            space
                .index_of(&BasisConfiguration::new(atom, occ))
                .expect("named states need n_max >= 1")
        };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = |i: usize, j: usize| vec![(i, C64::new(h, 0.0)), (j, C64::new(h, 0.0))];
        let minus = |i: usize, j: usize| vec![(i, C64::new(h, 0.0)), (j, C64::new(-h, 0.0))];

        // Cavity 2 holding one photon per polarization.
        let both2 = [0, 0, 1, 1];
        // |10⟩₁|01⟩₂ and |01⟩₁|10⟩₂.
        let cross_pm = [1, 0, 0, 1];
        let cross_mp = [0, 1, 1, 0];
        let a_emitted = idx(Level::A, [1, 0, 1, 1]);
        let b_emitted = idx(Level::B, [0, 1, 1, 1]);

        let comps = [
            vec![(idx(Level::G, both2), C64::new(1.0, 0.0))],
            vec![(idx(Level::E, both2), C64::new(1.0, 0.0))],
            plus(a_emitted, b_emitted),
            plus(idx(Level::E, cross_pm), idx(Level::E, cross_mp)),
            plus(idx(Level::G, cross_pm), idx(Level::G, cross_mp)),
            minus(a_emitted, b_emitted),
            minus(idx(Level::E, cross_pm), idx(Level::E, cross_mp)),
            minus(idx(Level::G, cross_pm), idx(Level::G, cross_mp)),
        ];
        let states = NamedLabel::ALL
            .into_iter()
            .zip(comps)
            .map(|(label, components)| NamedState { label, components })
            .collect();
        Self {
            dim: space.dim(),
            states,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, label: NamedLabel) -> &NamedState {
        &self.states[label.index()]
    }

    pub fn states(&self) -> &[NamedState] {
        &self.states
    }

    pub fn vector(&self, label: NamedLabel) -> StateVector {
        let mut v = StateVector::zeros(self.dim);
        for &(i, a) in &self.state(label).components {
            v[i] = a;
        }
        v
    }

    /// ⟨label|ψ⟩
    pub fn amplitude(&self, label: NamedLabel, psi: &StateVector) -> C64 {
        self.state(label).components.iter().map(|&(i, a)| a.conj() * psi[i]).sum()
    }

    /// Indices of the configurations |g⟩ ⊗ (one photon in each cavity).
    pub fn success_sector(space: &HilbertSpace) -> Vec<usize> {
        space
            .configurations()
            .enumerate()
            .filter(|(_, c)| c.atom == Level::G && c.photons_in_cavity(1) == 1 && c.photons_in_cavity(2) == 1)
            .map(|(i, _)| i)
            .collect()
    }
}
