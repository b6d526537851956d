//! Eve's optimal collective attack and the exact Holevo quantity χ(B1:E).
//!
//! The attack distributes ρ_AB(S) = (1+C)/2 · P_Φ+ + (1−C)/2 · P_Φ− with
//! C = √((S/2)² − 1), sets B1 = σz, B2 = σx, and A1,2 at angles ±atan(C) in
//! the (x, z) plane. A0 is σz followed by a classical channel that replaces
//! the outcome with a fair coin with probability 2Q.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{holevo_bound, TSIRELSON, TSIRELSON_TOL};
use crate::error::{Error, Result};
use crate::qmat::state::{check_probability, partial_trace};
use crate::qmat::{
    bell_projector, born_probabilities, chsh_value, eigh, joint_probabilities, marginals, purify,
    von_neumann_entropy, BellDiagonalSpectrum, BellState, DensityMatrix, Operator,
    PlanarMeasurement,
};

/// C = √((S/2)² − 1), clamped to [0, 1].
pub fn concurrence_for_chsh(chsh: f64) -> f64 {
    ((chsh / 2.0).powi(2) - 1.0).max(0.0).sqrt().min(1.0)
}

/// Bell-diagonal state with weights ((1+C)/2, 0, (1−C)/2, 0).
pub fn attack_spectrum(chsh: f64) -> Result<BellDiagonalSpectrum> {
    check_chsh_range(chsh)?;
    let c = concurrence_for_chsh(chsh);
    BellDiagonalSpectrum::new((1.0 + c) / 2.0, 0.0, (1.0 - c) / 2.0, 0.0)
}

/// ρ_AB(S)
pub fn attack_state(chsh: f64) -> Result<DensityMatrix> {
    check_chsh_range(chsh)?;
    let c = concurrence_for_chsh(chsh);
    let op = &bell_projector(BellState::PhiPlus).scale_real((1.0 + c) / 2.0)
        + &bell_projector(BellState::PhiMinus).scale_real((1.0 - c) / 2.0);
    DensityMatrix::new(op)
}

fn check_chsh_range(chsh: f64) -> Result<()> {
    if !(chsh > 2.0 && chsh <= TSIRELSON + TSIRELSON_TOL) {
        return Err(Error::InvalidArgument(format!(
            "attack requires 2 < S <= 2*sqrt(2), got {chsh}"
        )));
    }
    Ok(())
}

/// With probability `flip_to_random_prob` the A0 outcome is replaced by a fair coin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A0NoiseChannel {
    pub flip_to_random_prob: f64,
}

impl A0NoiseChannel {
    pub fn for_qber(qber: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&qber) {
            return Err(Error::InvalidArgument(format!(
                "QBER {qber} outside [0, 0.5]"
            )));
        }
        Ok(Self {
            flip_to_random_prob: (2.0 * qber).min(1.0),
        })
    }

    /// Push a joint (σz, b) outcome table through the channel on Alice's side.
    pub fn apply(&self, table: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let keep = 1.0 - self.flip_to_random_prob;
        let p_b = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
        let mut out = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                out[a][b] = keep * table[a][b] + self.flip_to_random_prob * 0.5 * p_b[b];
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub target_s: f64,
    pub target_q: f64,
    pub rho_ab: DensityMatrix,
    pub a1: PlanarMeasurement,
    pub a2: PlanarMeasurement,
    pub b1: PlanarMeasurement,
    pub b2: PlanarMeasurement,
    pub a0_channel: A0NoiseChannel,
}

pub fn build_optimal_attack(chsh: f64, qber: f64) -> Result<AttackSpec> {
    let rho_ab = attack_state(chsh)?;
    let c = concurrence_for_chsh(chsh);
    let angle = c.atan();
    Ok(AttackSpec {
        target_s: chsh,
        target_q: qber,
        rho_ab,
        a1: PlanarMeasurement::new(angle),
        a2: PlanarMeasurement::new(-angle),
        b1: PlanarMeasurement::sigma_z(),
        b2: PlanarMeasurement::sigma_x(),
        a0_channel: A0NoiseChannel::for_qber(qber)?,
    })
}

impl AttackSpec {
    pub fn chsh(&self) -> Result<f64> {
        chsh_value(&self.rho_ab, self.a1, self.a2, self.b1, self.b2)
    }

    /// Joint table of (a0, b) with A0 realized as σz then the noise channel.
    pub fn key_table(&self, b: PlanarMeasurement) -> Result<[[f64; 2]; 2]> {
        let raw = joint_probabilities(&self.rho_ab, PlanarMeasurement::sigma_z(), b)?;
        Ok(self.a0_channel.apply(raw))
    }

    /// prob(a0 ≠ b1)
    pub fn qber(&self) -> Result<f64> {
        let t = self.key_table(self.b1)?;
        Ok(t[0][1] + t[1][0])
    }

    /// Check both type invariants; returns (CHSH deviation, spectrum deviation).
    pub fn invariant_deviations(&self) -> Result<(f64, f64)> {
        let chsh_dev = (self.chsh()? - self.target_s).abs();
        let expected = attack_state(self.target_s)?;
        let spec_dev = self.rho_ab.operator().max_abs_diff(expected.operator());
        Ok((chsh_dev, spec_dev))
    }
}

/// χ(B1:E) = S(ρ_E) − Σ_b p(b) S(ρ_{E|b}), with Eve holding the canonical
/// purification of `rho_ab`.
pub fn holevo_exact(rho_ab: &DensityMatrix, b1: PlanarMeasurement) -> Result<f64> {
    if rho_ab.dim() != 4 {
        return Err(Error::Dimension(format!(
            "holevo_exact expects a two-qubit state, got dim {}",
            rho_ab.dim()
        )));
    }
    let psi = purify(rho_ab);
    let rho_e = partial_trace(&DensityMatrix::from_pure(&psi), &[2, 2, 4], &[2])?;
    let table = born_probabilities(&psi, PlanarMeasurement::sigma_z(), b1)?;
    let conditional: f64 = table
        .eve_given_bob
        .iter()
        .zip(table.bob_marginal)
        .filter_map(|(state, p)| state.as_ref().map(|s| p * von_neumann_entropy(s)))
        .sum();
    Ok((von_neumann_entropy(&rho_e) - conditional).max(0.0))
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(
            "concurrence needs a two-qubit state".into(),
        ));
    }
    let yy = crate::qmat::twirl::sigma_yy();
    let tilde = &(&yy * &rho.operator().conj()) * &yy;
    let spectral = eigh(rho.operator())?;
    let mut sqrt_rho = Operator::zeros(4);
    for k in 0..4 {
        let w = spectral.values[k].max(0.0).sqrt();
        let v = spectral.vector(k);
        sqrt_rho = &sqrt_rho + &Operator::projector(&v).scale(Complex64::new(w, 0.0));
    }
    let m = &(&sqrt_rho * &tilde) * &sqrt_rho;
    let mut r: Vec<f64> = eigh(&m.hermitize())?
        .values
        .iter()
        .map(|w| w.max(0.0).sqrt())
        .collect();
    r.sort_by(|a, b| b.total_cmp(a));
    Ok((r[0] - r[1] - r[2] - r[3]).max(0.0))
}

pub const SATURATION_TOL: f64 = 1e-9;
pub const MARGINAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationPoint {
    pub s: f64,
    pub chsh_reproduced: f64,
    pub holevo_exact: f64,
    pub holevo_bound: f64,
    pub max_marginal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub points: Vec<SaturationPoint>,
    pub max_chsh_deviation: f64,
    pub max_holevo_deviation: f64,
    pub max_marginal: f64,
    pub passed: bool,
}

/// Build the attack at each S, and compare its exact Holevo quantity with F(S).
pub fn verify_saturation(s_grid: &[f64]) -> Result<SaturationReport> {
    use rayon::prelude::*;

    let points = s_grid
        .par_iter()
        .map(|&s| -> Result<SaturationPoint> {
            let attack = build_optimal_attack(s, 0.0)?;
            let chsh = attack.chsh()?;
            let exact = holevo_exact(&attack.rho_ab, attack.b1)?;
            let bound = holevo_bound(s)?;
            let mut max_marginal: f64 = 0.0;
            for a in [attack.a1, attack.a2, PlanarMeasurement::sigma_z()] {
                for b in [attack.b1, attack.b2] {
                    let (ma, mb) = marginals(&attack.rho_ab, a, b)?;
                    max_marginal = max_marginal.max(ma.abs()).max(mb.abs());
                }
            }
            Ok(SaturationPoint {
                s,
                chsh_reproduced: chsh,
                holevo_exact: exact,
                holevo_bound: bound,
                max_marginal,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let max_chsh_deviation = points
        .iter()
        .map(|p| (p.chsh_reproduced - p.s).abs())
        .fold(0.0, f64::max);
    let max_holevo_deviation = points
        .iter()
        .map(|p| (p.holevo_exact - p.holevo_bound).abs())
        .fold(0.0, f64::max);
    let max_marginal = points.iter().map(|p| p.max_marginal).fold(0.0, f64::max);
    let passed = max_chsh_deviation <= SATURATION_TOL
        && max_holevo_deviation <= SATURATION_TOL
        && max_marginal <= MARGINAL_TOL;
    Ok(SaturationReport {
        points,
        max_chsh_deviation,
        max_holevo_deviation,
        max_marginal,
        passed,
    })
}

/// Probability that the noisy A0 disagrees with B1 on ρ_AB(S).
pub fn induced_qber(attack: &AttackSpec) -> Result<f64> {
    check_probability(attack.qber()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::chi_lambda_upper;
    use crate::qmat::bell::bell_weights;
    use crate::qmat::random::{random_density_matrix, random_simplex};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, TAU};

    #[test]
    fn maximal_violation_attack() {
        let attack = build_optimal_attack(TSIRELSON, 0.0).unwrap();
        let phi = bell_projector(BellState::PhiPlus);
        assert!(attack.rho_ab.operator().max_abs_diff(&phi) < 1e-15);
        assert!((attack.a1.angle() - FRAC_PI_4).abs() < 1e-15);
        assert!((attack.a2.angle() - (TAU - FRAC_PI_4)).abs() < 1e-15);
        assert!((attack.chsh().unwrap() - TSIRELSON).abs() < 1e-14);
        assert_eq!(attack.qber().unwrap(), 0.0);
    }

    #[test]
    fn near_local_bound_attack() {
        let attack = build_optimal_attack(2.0 + 1e-14, 0.0).unwrap();
        let expected = (&bell_projector(BellState::PhiPlus) + &bell_projector(BellState::PhiMinus))
            .scale_real(0.5);
        assert!(attack.rho_ab.operator().max_abs_diff(&expected) < 1e-6);
        assert!(attack.a1.angle() < 1e-6);
        assert!(attack.a2.angle() > TAU - 1e-6);
    }

    #[test]
    fn attack_reproduces_targets() {
        let attack = build_optimal_attack(2.5, 0.03).unwrap();
        assert!((attack.chsh().unwrap() - 2.5).abs() < 1e-9);
        assert!((attack.qber().unwrap() - 0.03).abs() < 1e-14);
        let (chsh_dev, spec_dev) = attack.invariant_deviations().unwrap();
        assert!(chsh_dev < 1e-9 && spec_dev < 1e-10);
        let w = bell_weights(&attack.rho_ab).unwrap();
        let c = concurrence_for_chsh(2.5);
        assert!((w[0] - (1.0 + c) / 2.0).abs() < 1e-12 && w[1].abs() < 1e-12);
        assert!((w[2] - (1.0 - c) / 2.0).abs() < 1e-12 && w[3].abs() < 1e-12);
    }

    #[test]
    fn attack_rejects_out_of_range() {
        assert!(build_optimal_attack(2.0, 0.0).is_err());
        assert!(build_optimal_attack(2.9, 0.0).is_err());
        assert!(build_optimal_attack(2.5, 0.6).is_err());
    }

    #[test]
    fn spectrum_matches_eigendecomposition() {
        for s in [2.1, 2.4, 2.7] {
            let c = concurrence_for_chsh(s);
            let w = attack_state(s).unwrap().eigenvalues();
            assert!((w[0] - (1.0 + c) / 2.0).abs() < 1e-12);
            assert!((w[1] - (1.0 - c) / 2.0).abs() < 1e-12);
            assert!(w[2].abs() < 1e-12 && w[3].abs() < 1e-12);
        }
    }

    #[test]
    fn concurrence_equals_gap() {
        for s in [2.1, 2.5, 2.8] {
            let c = concurrence(&attack_state(s).unwrap()).unwrap();
            assert!((c - concurrence_for_chsh(s)).abs() < 1e-7, "{c}");
        }
    }

    #[test]
    fn holevo_of_pure_and_mixed() {
        let phi = DensityMatrix::new(bell_projector(BellState::PhiPlus)).unwrap();
        assert!(holevo_exact(&phi, PlanarMeasurement::sigma_z()).unwrap() < 1e-12);
        // Eve purifies I/4 with a maximally entangled partner and learns Bob's bit.
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((holevo_exact(&mixed, PlanarMeasurement::sigma_z()).unwrap() - 1.0).abs() < 1e-12);
        assert!((holevo_exact(&mixed, PlanarMeasurement::new(1.1)).unwrap() - 1.0).abs() < 1e-12);
        let product = DensityMatrix::from_pure(&crate::qmat::PureState::basis(4, 1));
        assert!(holevo_exact(&product, PlanarMeasurement::new(0.4)).unwrap() < 1e-12);
    }

    #[test]
    fn holevo_saturates_bound() {
        for s in [2.05, 2.2, 2.5, 2.7, TSIRELSON] {
            let chi =
                holevo_exact(&attack_state(s).unwrap(), PlanarMeasurement::sigma_z()).unwrap();
            assert!((chi - holevo_bound(s).unwrap()).abs() < 1e-9, "S = {s}");
        }
    }

    #[test]
    fn holevo_within_range_for_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let rho = random_density_matrix(&mut rng, 4);
            let chi = holevo_exact(&rho, PlanarMeasurement::new(rng.gen_range(0.0..TAU))).unwrap();
            assert!((0.0..=2.0).contains(&chi));
        }
    }

    #[test]
    fn bell_diagonal_equality_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..300 {
            let w: [f64; 4] = random_simplex(&mut rng);
            let spec = BellDiagonalSpectrum::canonical_from(w, rng.gen_range(0..3)).unwrap();
            let rho = spec.state();
            let upper = chi_lambda_upper(&spec);
            let at_z = holevo_exact(&rho, PlanarMeasurement::sigma_z()).unwrap();
            assert!((at_z - upper).abs() < 1e-9, "{spec:?}");
            let tilted =
                holevo_exact(&rho, PlanarMeasurement::new(rng.gen_range(0.0..TAU))).unwrap();
            assert!(tilted <= upper + 1e-9);
        }
        // strict inequality away from σz on a generic spectrum
        let spec = BellDiagonalSpectrum::new(0.4, 0.1, 0.3, 0.2).unwrap();
        let tilted = holevo_exact(&spec.state(), PlanarMeasurement::new(0.7)).unwrap();
        assert!(tilted < chi_lambda_upper(&spec) - 1e-3);
    }

    #[test]
    fn saturation_grid() {
        let grid = [2.1, 2.3, 2.5, 2.7, TSIRELSON];
        let report = verify_saturation(&grid).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.max_holevo_deviation < 1e-9);
        assert_eq!(report.points.len(), grid.len());
    }

    #[test]
    fn saturation_near_local_bound() {
        let eps = 1e-6;
        let report = verify_saturation(&[2.0 + eps]).unwrap();
        let chi = report.points[0].holevo_exact;
        // C ≈ √ε, so χ = h((1+C)/2) ≈ 1 − C²/(2 ln 2)
        assert!((chi - 1.0).abs() < 1e-4, "{chi}");
        assert!(chi >= holevo_bound(2.1).unwrap());
    }

    #[test]
    fn a0_channel_induces_qber() {
        for q in [0.0, 0.01, 0.05, 0.25, 0.5] {
            let attack = build_optimal_attack(2.6, q).unwrap();
            assert!((induced_qber(&attack).unwrap() - q).abs() < 1e-14);
            let t = attack.key_table(attack.b2).unwrap();
            let a0_mean = t[0][0] + t[0][1] - t[1][0] - t[1][1];
            assert!(a0_mean.abs() < 1e-14);
        }
    }

    #[test]
    fn spec_serializes() {
        let attack = build_optimal_attack(2.5, 0.05).unwrap();
        let js = serde_json::to_value(&attack).unwrap();
        assert_eq!(js["rho_ab"]["dim"], 4);
        assert_eq!(js["b1"], 0.0);
        assert_eq!(js["a0_channel"]["flip_to_random_prob"], 0.1);
        let back: AttackSpec = serde_json::from_value(js).unwrap();
        assert_eq!(back, attack);
    }
}
