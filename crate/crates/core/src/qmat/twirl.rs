//! Symmetrizing maps on two-qubit states that leave all planar statistics intact.

use super::operator::{kron, Operator};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!(
            "twirl acts on two-qubit states, got dim {}",
            rho.dim()
        )));
    }
    Ok(())
}

pub fn sigma_yy() -> Operator {
    let y = Operator::pauli_y();
    kron(&y, &y)
}

/// ½(ρ + (σy⊗σy) ρ (σy⊗σy)). Flipping both outcomes of every planar
/// measurement is the same as conjugating by σy⊗σy.
pub fn y_twirl(rho: &DensityMatrix) -> Result<DensityMatrix> {
    require_two_qubits(rho)?;
    let yy = sigma_yy();
    let flipped = &(&yy * rho.operator()) * &yy;
    let avg = (&flipped + rho.operator()).scale_real(0.5);
    Ok(DensityMatrix::from_operator_unchecked(avg.hermitize()))
}

/// ½(ρ + ρ*), conjugation in the computational basis.
pub fn real_twirl(rho: &DensityMatrix) -> Result<DensityMatrix> {
    require_two_qubits(rho)?;
    let avg = (&rho.operator().conj() + rho.operator()).scale_real(0.5);
    Ok(DensityMatrix::from_operator_unchecked(avg.hermitize()))
}

/// Largest entry of [ρ, σy⊗σy].
pub fn yy_commutator_norm(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let yy = sigma_yy();
    let lhs = &yy * rho.operator();
    let rhs = rho.operator() * &yy;
    Ok(lhs.max_abs_diff(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::bell::BellDiagonalSpectrum;
    use crate::qmat::measure::{chsh_value, correlator, marginals, PlanarMeasurement};
    use crate::qmat::random::random_density_matrix;
    use crate::qmat::state::PureState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    #[test]
    fn bell_diagonal_is_fixed() {
        let rho = BellDiagonalSpectrum::new(0.4, 0.1, 0.3, 0.2)
            .unwrap()
            .state();
        assert!(
            y_twirl(&rho)
                .unwrap()
                .operator()
                .max_abs_diff(rho.operator())
                < 1e-15
        );
        assert!(
            real_twirl(&rho)
                .unwrap()
                .operator()
                .max_abs_diff(rho.operator())
                < 1e-15
        );
    }

    #[test]
    fn y_twirl_of_00() {
        let rho = DensityMatrix::from_pure(&PureState::basis(4, 0));
        let out = y_twirl(&rho).unwrap();
        let mut expected = Operator::zeros(4);
        expected.set(0, 0, 0.5.into());
        expected.set(3, 3, 0.5.into());
        assert!(out.operator().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn twirls_preserve_planar_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let rho = random_density_matrix(&mut rng, 4);
            let ty = y_twirl(&rho).unwrap();
            let tr = real_twirl(&rho).unwrap();
            assert!(yy_commutator_norm(&ty).unwrap() < 1e-14);
            assert!(tr.operator().is_real(1e-16));
            for _ in 0..4 {
                let a = PlanarMeasurement::new(rng.gen_range(0.0..TAU));
                let b = PlanarMeasurement::new(rng.gen_range(0.0..TAU));
                let c = correlator(&rho, a, b).unwrap();
                assert!((correlator(&ty, a, b).unwrap() - c).abs() < 1e-14);
                assert!((correlator(&tr, a, b).unwrap() - c).abs() < 1e-14);
                let (ma, mb) = marginals(&rho, a, b).unwrap();
                let (ra, rb) = marginals(&tr, a, b).unwrap();
                assert!((ra - ma).abs() < 1e-14 && (rb - mb).abs() < 1e-14);
                // the y-twirl kills planar marginals
                let (ya, yb) = marginals(&ty, a, b).unwrap();
                assert!(ya.abs() < 1e-14 && yb.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn twirls_are_idempotent_and_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let rho = random_density_matrix(&mut rng, 4);
            for twirl in [y_twirl, real_twirl] {
                let once = twirl(&rho).unwrap();
                let twice = twirl(&once).unwrap();
                assert!(twice.operator().max_abs_diff(once.operator()) < 1e-15);
                assert!((once.operator().trace().re - 1.0).abs() < 1e-14);
                assert!(*once.eigenvalues().last().unwrap() > -1e-12);
            }
        }
    }

    #[test]
    fn chained_twirls_preserve_chsh() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let rho = random_density_matrix(&mut rng, 4);
            let m: Vec<_> = (0..4)
                .map(|_| PlanarMeasurement::new(rng.gen_range(0.0..TAU)))
                .collect();
            let both = real_twirl(&y_twirl(&rho).unwrap()).unwrap();
            let before = chsh_value(&rho, m[0], m[1], m[2], m[3]).unwrap();
            let after = chsh_value(&both, m[0], m[1], m[2], m[3]).unwrap();
            assert!((before - after).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_wrong_dimension() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(y_twirl(&rho).is_err());
        assert!(real_twirl(&rho).is_err());
    }
}
