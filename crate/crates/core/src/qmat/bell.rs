//! Bell basis and Bell-diagonal two-qubit states.
//!
//! The basis order used throughout is {Φ+, Ψ−, Φ−, Ψ+}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{Operator, ZERO};
use super::state::{DensityMatrix, CLAMP_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PsiMinus,
    PhiMinus,
    PsiPlus,
}

impl BellState {
    pub const ORDERED: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PsiMinus,
        BellState::PhiMinus,
        BellState::PsiPlus,
    ];

    /// Amplitudes over |00⟩, |01⟩, |10⟩, |11⟩.
    pub fn amplitudes(self) -> [Complex64; 4] {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            BellState::PhiPlus => [h, ZERO, ZERO, h],
            BellState::PhiMinus => [h, ZERO, ZERO, -h],
            BellState::PsiPlus => [ZERO, h, h, ZERO],
            BellState::PsiMinus => [ZERO, h, -h, ZERO],
        }
    }
}

pub fn bell_projector(state: BellState) -> Operator {
    Operator::projector(&state.amplitudes())
}

/// Weights (λΦ+, λΨ−, λΦ−, λΨ+) of a Bell-diagonal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalSpectrum {
    pub phi_plus: f64,
    pub psi_minus: f64,
    pub phi_minus: f64,
    pub psi_plus: f64,
}

impl BellDiagonalSpectrum {
    pub fn new(phi_plus: f64, psi_minus: f64, phi_minus: f64, psi_plus: f64) -> Result<Self> {
        let weights = [phi_plus, psi_minus, phi_minus, psi_plus];
        if let Some(&bad) = weights
            .iter()
            .find(|&&w| !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&w))
        {
            return Err(Error::Probability { value: bad });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > CLAMP_TOL {
            return Err(Error::InvalidArgument(format!(
                "Bell-diagonal weights sum to {sum}"
            )));
        }
        let [a, b, c, d] = weights.map(|w| w.clamp(0.0, 1.0));
        Ok(Self {
            phi_plus: a,
            psi_minus: b,
            phi_minus: c,
            psi_plus: d,
        })
    }

    pub fn from_array(w: [f64; 4]) -> Result<Self> {
        Self::new(w[0], w[1], w[2], w[3])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.phi_plus, self.psi_minus, self.phi_minus, self.psi_plus]
    }

    /// λΦ+ ≥ λΨ− and λΦ+ ≥ λΦ− ≥ λΨ+.
    pub fn is_canonical(&self) -> bool {
        self.phi_plus >= self.psi_minus
            && self.phi_plus >= self.phi_minus
            && self.phi_minus >= self.psi_plus
    }

    /// Arrange four weights into canonical order: the largest goes to Φ+,
    /// `psi_minus_pick` (0..3) selects which of the remaining three becomes
    /// Ψ−, and the last two fill Φ− ≥ Ψ+.
    pub fn canonical_from(weights: [f64; 4], psi_minus_pick: usize) -> Result<Self> {
        let mut sorted = weights;
        sorted.sort_by(|a, b| b.total_cmp(a));
        let rest = [sorted[1], sorted[2], sorted[3]];
        let pick = psi_minus_pick % 3;
        let mut others: Vec<f64> = rest
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pick)
            .map(|(_, &w)| w)
            .collect();
        others.sort_by(|a, b| b.total_cmp(a));
        Self::new(sorted[0], rest[pick], others[0], others[1])
    }

    pub fn state(&self) -> DensityMatrix {
        let mut op = Operator::zeros(4);
        for (w, b) in self.as_array().iter().zip(BellState::ORDERED) {
            op = &op + &bell_projector(b).scale_real(*w);
        }
        DensityMatrix::from_operator_unchecked(op.hermitize())
    }
}

/// Weights ⟨B_k|ρ|B_k⟩ of ρ in the Bell basis (exact spectrum only for Bell-diagonal ρ).
pub fn bell_weights(rho: &DensityMatrix) -> Result<[f64; 4]> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!(
            "Bell basis requires a two-qubit state, got dim {}",
            rho.dim()
        )));
    }
    let mut out = [0.0; 4];
    for (slot, b) in out.iter_mut().zip(BellState::ORDERED) {
        *slot = rho.expectation(&bell_projector(b))?;
    }
    Ok(out)
}

/// Largest deviation of ρ from being diagonal in the Bell basis.
pub fn bell_off_diagonal(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Dimension("Bell basis requires dim 4".into()));
    }
    let basis = BellState::ORDERED.map(|b| b.amplitudes().to_vec());
    let in_bell = rho.operator().compress(&basis)?;
    let mut dev: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                dev = dev.max(in_bell.get(i, j).norm());
            }
        }
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_states_are_orthonormal() {
        for a in BellState::ORDERED {
            for b in BellState::ORDERED {
                let ip = super::super::operator::inner(&a.amplitudes(), &b.amplitudes());
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip.re - expected).abs() < 1e-15 && ip.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn spectrum_validation() {
        assert!(BellDiagonalSpectrum::new(0.5, 0.5, 0.1, 0.0).is_err());
        assert!(BellDiagonalSpectrum::new(1.2, -0.2, 0.0, 0.0).is_err());
        let s = BellDiagonalSpectrum::new(0.4, 0.1, 0.3, 0.2).unwrap();
        assert!(s.is_canonical());
        assert!(!BellDiagonalSpectrum::new(0.1, 0.4, 0.3, 0.2)
            .unwrap()
            .is_canonical());
    }

    #[test]
    fn canonical_ordering_holds_for_every_pick() {
        for pick in 0..3 {
            let s = BellDiagonalSpectrum::canonical_from([0.1, 0.2, 0.3, 0.4], pick).unwrap();
            assert!(s.is_canonical(), "{s:?}");
            assert_eq!(s.phi_plus, 0.4);
        }
    }

    #[test]
    fn state_recovers_weights() {
        let s = BellDiagonalSpectrum::new(0.4, 0.1, 0.3, 0.2).unwrap();
        let rho = s.state();
        let w = bell_weights(&rho).unwrap();
        for (a, b) in w.iter().zip(s.as_array()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(bell_off_diagonal(&rho).unwrap() < 1e-15);
        let mut eig = rho.eigenvalues();
        eig.sort_by(|a, b| b.total_cmp(a));
        assert!((eig[0] - 0.4).abs() < 1e-14 && (eig[3] - 0.1).abs() < 1e-14);
    }
}
