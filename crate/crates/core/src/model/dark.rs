use num_complex::Complex64 as C64;

use super::basis::{NamedLabel, NamedManifoldBasis};
use crate::hilbert::StateVector;

/// Mixing angles of the stage and global dark states, each in [0, π/2].
///
/// An angle is `None` when both of its defining couplings vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkStateAngles {
    /// tan θ = Ω / (√2 g₁)
    pub theta: Option<f64>,
    /// tan β = Ω / g₂
    pub beta: Option<f64>,
    /// tan γ = g₂ / Ω
    pub gamma: Option<f64>,
    /// tan ϑ = √2 g₁ / √(Ω² + g₂²)
    pub vartheta: Option<f64>,
}

fn angle(numerator: f64, denominator: f64) -> Option<f64> {
    if numerator == 0.0 && denominator == 0.0 {
        None
    } else {
        Some(numerator.atan2(denominator))
    }
}

pub fn mixing_angles(omega: f64, g1: f64, g2: f64) -> DarkStateAngles {
    let g1_tilde = 2f64.sqrt() * g1;
    DarkStateAngles {
        theta: angle(omega, g1_tilde),
        beta: angle(omega, g2),
        gamma: angle(g2, omega),
        vartheta: angle(g1_tilde, omega.hypot(g2)),
    }
}

/// Normalized combination of named states, phase-fixed so that the first of
/// A, C with a nonzero coefficient is positive.
fn combine(basis: &NamedManifoldBasis, coords: &[(NamedLabel, f64)]) -> Option<StateVector> {
    let norm = coords.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let sign = coords
        .iter()
        .filter(|(l, _)| matches!(l, NamedLabel::A | NamedLabel::C))
        .map(|&(_, c)| c)
        .find(|&c| c != 0.0)
        .map_or(1.0, f64::signum);
    let mut v = StateVector::zeros(basis.dim());
    for &(label, c) in coords {
        for &(i, a) in &basis.state(label).components {
            v[i] += a * C64::new(sign * c / norm, 0.0);
        }
    }
    Some(v)
}

/// cos θ |A⟩ − sin θ |C⟩ (the stage-1 dark state up to the fixed phase).
pub(super) fn stage1(basis: &NamedManifoldBasis, omega: f64, g1: f64) -> Option<StateVector> {
    let g1_tilde = 2f64.sqrt() * g1;
    combine(basis, &[(NamedLabel::A, g1_tilde), (NamedLabel::C, -omega)])
}

/// sin β |C⟩ − cos β |E⟩.
pub(super) fn stage2(basis: &NamedManifoldBasis, omega: f64, g2: f64) -> Option<StateVector> {
    combine(basis, &[(NamedLabel::C, omega), (NamedLabel::E, -g2)])
}

/// sin ϑ |A⟩ − cos γ cos ϑ |C⟩ + sin γ cos ϑ |E⟩ ∝ √2g₁|A⟩ − Ω|C⟩ + g₂|E⟩.
pub(super) fn global(basis: &NamedManifoldBasis, omega: f64, g1: f64, g2: f64) -> Option<StateVector> {
    let g1_tilde = 2f64.sqrt() * g1;
    combine(
        basis,
        &[(NamedLabel::A, g1_tilde), (NamedLabel::C, -omega), (NamedLabel::E, g2)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::hilbert::HilbertSpace;
    use crate::model::{Model, PhysicalParams, PulseSchedule};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;
    use NamedLabel::*;

    fn constant_model(omega: f64, g1: f64, g2: f64) -> Model {
        Model::with_schedule(
            HilbertSpace::new(2).unwrap(),
            PhysicalParams::default(),
            PulseSchedule::constant(omega, g1, g2),
        )
        .unwrap()
    }

    fn phase_free_overlap(a: &StateVector, b: &StateVector) -> f64 {
        a.inner(b).norm()
    }

    #[test]
    fn angle_conventions() {
        let angles = mixing_angles(3.0, 0.0, 0.0);
        assert_eq!(angles.theta, Some(FRAC_PI_2));
        assert_eq!(angles.beta, Some(FRAC_PI_2));
        assert_eq!(angles.gamma, Some(0.0));
        assert_eq!(angles.vartheta, Some(0.0));
        let angles = mixing_angles(0.0, 1.0, 0.0);
        assert_eq!(angles.gamma, None);
        assert_eq!(angles.beta, None);
        assert_eq!(angles.vartheta, Some(FRAC_PI_2));
    }

    #[test]
    fn stage1_limits() {
        let m = constant_model(0.0, 2.0, 0.0);
        let basis = m.named_basis();
        assert_eq!(m.dark_state_stage1(0.0).unwrap(), basis.vector(A));
        let m = constant_model(2.0, 0.0, 0.0);
        assert_eq!(m.dark_state_stage1(0.0).unwrap(), basis.vector(C));
        let m = constant_model(0.0, 0.0, 1.0);
        assert!(matches!(m.dark_state_stage1(0.0), Err(Error::UndefinedAngle { .. })));
    }

    #[test]
    fn stage2_limits() {
        let m = constant_model(2.0, 0.0, 0.0);
        let basis = m.named_basis();
        assert_eq!(m.dark_state_stage2(0.0).unwrap(), basis.vector(C));
        let m = constant_model(0.0, 0.0, 3.0);
        assert_eq!(m.dark_state_stage2(0.0).unwrap(), basis.vector(E).scaled(C64::new(-1.0, 0.0)));
    }

    #[test]
    fn stage_dark_states_are_annihilated() {
        // Stage 1 with Ω = √2 g₁ and cavity 2 switched off.
        let g1 = 3.0;
        let omega = 2f64.sqrt() * g1;
        let m = constant_model(omega, g1, 0.0);
        let d = m.dark_state_stage1(0.0).unwrap();
        assert!(m.hamiltonian(0.0).apply(&d).norm() < 1e-13);

        for (omega, g2) in [(1.0, 2.5), (7.3, 0.4), (10.0, 10.0)] {
            let m = constant_model(omega, 0.0, g2);
            let d = m.dark_state_stage2(0.0).unwrap();
            assert!(m.hamiltonian(0.0).apply(&d).norm() < 1e-13);
        }
    }

    #[test]
    fn global_dark_state_limits() {
        let m = constant_model(0.0, 4.0, 0.0);
        assert_eq!(m.dark_state_global(0.0).unwrap(), m.named_basis().vector(A));
        let m = constant_model(1e-3, 0.0, 50.0);
        let d = m.dark_state_global(0.0).unwrap();
        assert!(phase_free_overlap(&d, &m.named_basis().vector(E)) > 1.0 - 1e-6);
        let m = constant_model(0.0, 0.0, 0.0);
        assert!(m.dark_state_global(0.0).is_err());
    }

    #[test]
    fn global_reduces_to_stage_states() {
        for (omega, g) in [(1.0, 2.0), (5.0, 0.3)] {
            let m = constant_model(omega, g, 0.0);
            assert!(phase_free_overlap(&m.dark_state_global(0.0).unwrap(), &m.dark_state_stage1(0.0).unwrap()) > 1.0 - 1e-14);
            let m = constant_model(omega, 0.0, g);
            assert!(phase_free_overlap(&m.dark_state_global(0.0).unwrap(), &m.dark_state_stage2(0.0).unwrap()) > 1.0 - 1e-14);
        }
    }

    #[test]
    fn global_matches_angle_formula() {
        let m = Model::new(HilbertSpace::new(2).unwrap(), PhysicalParams::default()).unwrap();
        let basis = m.named_basis();
        for t in [-2.0, 1.0, 4.5, 8.0, 11.0] {
            let a = m.mixing_angles(t);
            let (gamma, vt) = (a.gamma.unwrap(), a.vartheta.unwrap());
            let expected = basis
                .vector(A)
                .scaled(C64::new(vt.sin(), 0.0))
                .add(&basis.vector(C).scaled(C64::new(-gamma.cos() * vt.cos(), 0.0)))
                .add(&basis.vector(E).scaled(C64::new(gamma.sin() * vt.cos(), 0.0)));
            let d = m.dark_state_global(t).unwrap();
            for i in 0..d.dim() {
                assert!((d[i] - expected[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn global_nullity_at_random_times() {
        let m = Model::new(HilbertSpace::new(2).unwrap(), PhysicalParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t = rng.random_range(-6.0..16.0);
            let h = m.hamiltonian(t);
            let d = m.dark_state_global(t).unwrap();
            assert!(h.apply(&d).norm() < 1e-10 * h.norm_inf(), "t = {t}");
        }
    }

    /// Independent route: diagonalize the {A..E} block of the manifold table
    /// and compare the zero-eigenvalue eigenvector with the closed form.
    #[test]
    fn global_matches_eigendecomposition() {
        let m = Model::new(HilbertSpace::new(2).unwrap(), PhysicalParams::default()).unwrap();
        for t in [-1.0, 2.0, 4.5, 7.0, 10.0] {
            let table = m.manifold_matrix_elements(t);
            let block = DMatrix::from_fn(5, 5, |r, c| table.0[r][c].re);
            let eig = block.symmetric_eigen();
            let (k, _) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .unwrap();
            assert!(eig.eigenvalues[k].abs() < 1e-10);
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            if v[0] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let d = m.dark_state_global(t).unwrap();
            let basis = m.named_basis();
            for (label, expected) in NamedLabel::ALL[..5].iter().zip(&v) {
                assert!((basis.amplitude(*label, &d).re - expected).abs() < 1e-10, "t={t} {label}");
            }
        }
    }
}
