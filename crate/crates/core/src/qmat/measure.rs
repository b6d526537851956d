//! Planar qubit measurements, correlators, CHSH and Born-rule statistics.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{kron, Operator};
use super::state::{partial_trace_op, DensityMatrix, PureState};
use crate::error::{Error, Result};

/// Dichotomic qubit observable cos(φ)σz + sin(φ)σx.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlanarMeasurement {
    angle: f64,
}

impl PlanarMeasurement {
    /// The angle is reduced to [0, 2π).
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        Self { angle: a }
    }

    pub fn sigma_z() -> Self {
        Self::new(0.0)
    }

    pub fn sigma_x() -> Self {
        Self::new(std::f64::consts::FRAC_PI_2)
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Bloch vector (x, z).
    pub fn bloch(&self) -> (f64, f64) {
        (self.angle.sin(), self.angle.cos())
    }

    pub fn observable(&self) -> Operator {
        observable(*self)
    }

    /// Eigenprojector (I + s·M)/2 for outcome s = ±1.
    pub fn projector(&self, outcome: Outcome) -> Operator {
        let id = Operator::identity(2);
        let m = self.observable().scale_real(outcome.sign());
        (&id + &m).scale_real(0.5)
    }
}

pub fn observable(m: PlanarMeasurement) -> Operator {
    let (s, c) = m.angle.sin_cos();
    Operator::from_real_rows(&[&[c, s], &[s, -c]]).expect("2x2")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!(
            "expected a two-qubit state (dim 4), got dim {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// ⟨a ⊗ b⟩ = tr(ρ · A⊗B)
pub fn correlator(rho: &DensityMatrix, a: PlanarMeasurement, b: PlanarMeasurement) -> Result<f64> {
    require_two_qubits(rho)?;
    rho.expectation(&kron(&a.observable(), &b.observable()))
}

/// (⟨A⊗I⟩, ⟨I⊗B⟩)
pub fn marginals(
    rho: &DensityMatrix,
    a: PlanarMeasurement,
    b: PlanarMeasurement,
) -> Result<(f64, f64)> {
    require_two_qubits(rho)?;
    let id = Operator::identity(2);
    Ok((
        rho.expectation(&kron(&a.observable(), &id))?,
        rho.expectation(&kron(&id, &b.observable()))?,
    ))
}

/// ⟨a1b1⟩ + ⟨a1b2⟩ + ⟨a2b1⟩ − ⟨a2b2⟩
pub fn chsh_value(
    rho: &DensityMatrix,
    a1: PlanarMeasurement,
    a2: PlanarMeasurement,
    b1: PlanarMeasurement,
    b2: PlanarMeasurement,
) -> Result<f64> {
    Ok(
        correlator(rho, a1, b1)? + correlator(rho, a1, b2)? + correlator(rho, a2, b1)?
            - correlator(rho, a2, b2)?,
    )
}

/// Joint outcome table for planar measurements on A and B of a two-qubit state,
/// indexed `[a_outcome][b_outcome]` with + first.
pub fn joint_probabilities(
    rho: &DensityMatrix,
    a: PlanarMeasurement,
    b: PlanarMeasurement,
) -> Result<[[f64; 2]; 2]> {
    require_two_qubits(rho)?;
    let mut table = [[0.0; 2]; 2];
    for oa in Outcome::BOTH {
        for ob in Outcome::BOTH {
            let proj = kron(&a.projector(oa), &b.projector(ob));
            table[oa.index()][ob.index()] = rho.expectation(&proj)?.max(0.0);
        }
    }
    Ok(table)
}

/// Born statistics of planar measurements on A and B of a tripartite pure state
/// over A ⊗ B ⊗ E, with Eve's states conditioned on Bob's outcome.
#[derive(Debug, Clone)]
pub struct BornTable {
    /// `joint[a][b]`, + first.
    pub joint: [[f64; 2]; 2],
    /// p(b)
    pub bob_marginal: [f64; 2],
    /// ρ_{E|b}; `None` for a zero-probability branch.
    pub eve_given_bob: [Option<DensityMatrix>; 2],
    pub eve_dim: usize,
}

const ZERO_BRANCH: f64 = 1e-14;

pub fn born_probabilities(
    psi: &PureState,
    a: PlanarMeasurement,
    b: PlanarMeasurement,
) -> Result<BornTable> {
    if psi.dim() % 4 != 0 || psi.dim() < 4 {
        return Err(Error::Dimension(format!(
            "state of dim {} does not factor as 2 x 2 x d_E",
            psi.dim()
        )));
    }
    let eve_dim = psi.dim() / 4;
    let id_e = Operator::identity(eve_dim);
    let id_a = Operator::identity(2);

    let mut joint = [[0.0; 2]; 2];
    for oa in Outcome::BOTH {
        for ob in Outcome::BOTH {
            let proj = kron(&kron(&a.projector(oa), &b.projector(ob)), &id_e);
            let phi = proj.apply(psi.amplitudes())?;
            joint[oa.index()][ob.index()] = super::operator::norm(&phi).powi(2);
        }
    }

    let total: f64 = joint.iter().flatten().sum();
    let bob_marginal = [
        (joint[0][0] + joint[1][0]) / total,
        (joint[0][1] + joint[1][1]) / total,
    ];

    let mut eve_given_bob: [Option<DensityMatrix>; 2] = [None, None];
    for ob in Outcome::BOTH {
        let p = bob_marginal[ob.index()];
        if p <= ZERO_BRANCH {
            continue;
        }
        let proj = kron(&kron(&id_a, &b.projector(ob)), &id_e);
        let phi = proj.apply(psi.amplitudes())?;
        let unnormalized = Operator::projector(&phi);
        let reduced = partial_trace_op(&unnormalized, &[2, 2, eve_dim], &[2])?;
        let scale = 1.0 / reduced.trace().re;
        eve_given_bob[ob.index()] = Some(DensityMatrix::from_operator_unchecked(
            reduced.scale(Complex64::new(scale, 0.0)).hermitize(),
        ));
    }

    Ok(BornTable {
        joint,
        bob_marginal,
        eve_given_bob,
        eve_dim,
    })
}
