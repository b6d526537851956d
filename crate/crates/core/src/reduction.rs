//! Simultaneous block diagonalization of two dichotomic observables into
//! 1×1 and 2×2 blocks, and the resulting decomposition of a two-setting
//! bipartite strategy into a convex mixture of qubit strategies.
//!
//! The blocks come from the spectral structure of the unitary U = A1·A2.
//! Its eigenvalues e^{±iθ} pair up; for an eigenvector v with θ ∈ (0, π),
//! A1·v is an eigenvector for e^{−iθ} and span{v, A1·v} is invariant under
//! both observables. In the frame e0 = (v + A1v)/√2, e1 = −i(v − A1v)/√2
//! the restrictions read A1 = σz and A2 = cos θ σz + sin θ σx. Eigenvalues
//! at θ ∈ {0, π} mark subspaces where the observables commute; those are
//! split into rank-1 blocks by diagonalizing A1 there.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::operator::{inner, kron, norm, I, ZERO};
use crate::qmat::{chsh_value, eigh, DensityMatrix, Operator, PlanarMeasurement};

/// Phase tolerance (radians) used to separate θ ∈ {0, π} from proper 2×2 blocks.
pub const DEFAULT_ANGLE_TOL: f64 = 1e-8;
/// Tolerance on A² = I.
pub const DICHOTOMIC_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-10;
const ZERO_WEIGHT: f64 = 1e-14;
/// Gap in cos θ below which eigenvalues of Re(A1A2) are treated as one group
/// before the finer split.
const COARSE_TOL: f64 = 1e-3;

/// Hermitian operator with eigenvalues ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicObservable {
    op: Operator,
}

impl DichotomicObservable {
    pub fn new(op: Operator) -> Result<Self> {
        let deviation = op.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let op = op.hermitize();
        let deviation = (&(&op * &op) - &Operator::identity(op.dim())).frobenius_norm();
        if deviation > DICHOTOMIC_TOL {
            return Err(Error::NotDichotomic { deviation });
        }
        Ok(Self { op })
    }

    pub fn from_planar(m: PlanarMeasurement) -> Self {
        Self { op: m.observable() }
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

impl<'de> Deserialize<'de> for DichotomicObservable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let op = Operator::deserialize(d)?;
        DichotomicObservable::new(op).map_err(serde::de::Error::custom)
    }
}

impl Serialize for DichotomicObservable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.op.serialize(s)
    }
}

/// One invariant subspace of the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    /// Orthonormal frame (one or two vectors of length d).
    pub basis: Vec<Vec<Complex64>>,
    /// θ ∈ [0, π]; 0 or π for rank-1 blocks.
    pub phase: f64,
    /// Bloch vectors (x, y, z) of the restricted observables in `basis`.
    /// For rank-1 blocks only z is set, to the scalar value of the observable.
    pub bloch: [[f64; 3]; 2],
}

impl Block {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn projector(&self) -> Operator {
        let d = self.basis[0].len();
        self.basis
            .iter()
            .fold(Operator::zeros(d), |acc, v| &acc + &Operator::projector(v))
    }

    /// Planar qubit observables representing (A1, A2) on this block.
    ///
    /// Rank-2 blocks use their frame directly. A rank-1 block is embedded as
    /// the σz eigenstate whose outcome matches A1 (so A1 ↦ σz), with A2 ↦ ±σz.
    pub fn qubit_settings(&self) -> (PlanarMeasurement, PlanarMeasurement) {
        if self.rank() == 2 {
            let angle = |b: [f64; 3]| b[0].atan2(b[2]);
            (
                PlanarMeasurement::new(angle(self.bloch[0])),
                PlanarMeasurement::new(angle(self.bloch[1])),
            )
        } else {
            let same = self.bloch[0][2] * self.bloch[1][2] > 0.0;
            (
                PlanarMeasurement::sigma_z(),
                PlanarMeasurement::new(if same { 0.0 } else { PI }),
            )
        }
    }

    /// Isometry from the block into a qubit: columns are the images of the
    /// block basis vectors.
    fn qubit_embedding(&self) -> Vec<[Complex64; 2]> {
        let one = Complex64::new(1.0, 0.0);
        if self.rank() == 2 {
            vec![[one, ZERO], [ZERO, one]]
        } else if self.bloch[0][2] > 0.0 {
            vec![[one, ZERO]]
        } else {
            vec![[ZERO, one]]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub dim: usize,
    pub blocks: Vec<Block>,
    /// Eigenphases of A1·A2 in (−π, π], one per eigenvector.
    pub eigen_phases: Vec<f64>,
    /// max ‖U v − e^{iθ} v‖ over the eigenvectors found.
    pub unitarity_residual: f64,
    /// Largest |y| component of any rank-2 Bloch vector; zero when every block is planar.
    pub planarity_residual: f64,
}

impl BlockDecomposition {
    pub fn projectors(&self) -> Vec<Operator> {
        self.blocks.iter().map(Block::projector).collect()
    }

    /// max |Σ P_c − I|
    pub fn completeness_deviation(&self) -> f64 {
        let sum = self
            .projectors()
            .iter()
            .fold(Operator::zeros(self.dim), |acc, p| &acc + p);
        sum.max_abs_diff(&Operator::identity(self.dim))
    }

    /// max |⟨u|w⟩| over basis vectors of distinct blocks, and of
    /// ⟨u|w⟩ − δ within a block.
    pub fn orthogonality_deviation(&self) -> f64 {
        let vectors: Vec<(usize, &Vec<Complex64>)> = self
            .blocks
            .iter()
            .enumerate()
            .flat_map(|(c, b)| b.basis.iter().map(move |v| (c, v)))
            .collect();
        let mut dev: f64 = 0.0;
        for (i, (_, u)) in vectors.iter().enumerate() {
            for (j, (_, w)) in vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((inner(u, w) - Complex64::new(target, 0.0)).norm());
            }
        }
        dev
    }

    /// p_c = tr(ρ P_c) for a state on the same space.
    pub fn weights(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "state of dim {} for blocks on dim {}",
                rho.dim(),
                self.dim
            )));
        }
        self.blocks
            .iter()
            .map(|b| {
                b.basis
                    .iter()
                    .map(|v| Ok(inner(v, &rho.operator().apply(v)?).re))
                    .sum()
            })
            .collect()
    }

    /// Block angles θ of the rank-2 blocks, sorted.
    pub fn block_angles(&self) -> Vec<f64> {
        let mut angles: Vec<f64> = self
            .blocks
            .iter()
            .filter(|b| b.rank() == 2)
            .map(|b| b.phase)
            .collect();
        angles.sort_by(f64::total_cmp);
        angles
    }

    /// Largest mismatch between the eigenphase multiset and its negation.
    pub fn conjugate_pairing_deviation(&self) -> f64 {
        let wrap = |x: f64| if x <= -PI + 1e-12 { x + 2.0 * PI } else { x };
        let mut phases: Vec<f64> = self.eigen_phases.iter().map(|&p| wrap(p)).collect();
        let mut negated: Vec<f64> = self.eigen_phases.iter().map(|&p| wrap(-p)).collect();
        phases.sort_by(f64::total_cmp);
        negated.sort_by(f64::total_cmp);
        phases
            .iter()
            .zip(&negated)
            .map(|(a, b)| {
                let d = (a - b).abs();
                d.min(2.0 * PI - d)
            })
            .fold(0.0, f64::max)
    }

    pub fn report(&self) -> BlockReport {
        BlockReport {
            dim: self.dim,
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockSummary {
                    rank: b.rank(),
                    phase: b.phase,
                    bloch_a1: b.bloch[0],
                    bloch_a2: b.bloch[1],
                })
                .collect(),
            eigen_phases: self.eigen_phases.clone(),
            completeness_deviation: self.completeness_deviation(),
            orthogonality_deviation: self.orthogonality_deviation(),
            unitarity_residual: self.unitarity_residual,
            conjugate_pairing_deviation: self.conjugate_pairing_deviation(),
            pinching_deviation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub rank: usize,
    pub phase: f64,
    pub bloch_a1: [f64; 3],
    pub bloch_a2: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub dim: usize,
    pub blocks: Vec<BlockSummary>,
    pub eigen_phases: Vec<f64>,
    pub completeness_deviation: f64,
    pub orthogonality_deviation: f64,
    pub unitarity_residual: f64,
    pub conjugate_pairing_deviation: f64,
    pub pinching_deviation: Option<f64>,
}

pub fn jordan_blocks(
    a1: &DichotomicObservable,
    a2: &DichotomicObservable,
) -> Result<BlockDecomposition> {
    jordan_blocks_with_tol(a1, a2, DEFAULT_ANGLE_TOL)
}

pub fn jordan_blocks_with_tol(
    a1: &DichotomicObservable,
    a2: &DichotomicObservable,
    angle_tol: f64,
) -> Result<BlockDecomposition> {
    if a1.dim() != a2.dim() {
        return Err(Error::Dimension(format!(
            "observables act on dims {} and {}",
            a1.dim(),
            a2.dim()
        )));
    }
    let d = a1.dim();
    let (op1, op2) = (a1.operator(), a2.operator());
    let u = op1 * op2;
    let u_dag = u.adjoint();
    // U is normal, so its real and imaginary parts commute.
    let re_part = (&u + &u_dag).scale_real(0.5);
    let im_part = (&u - &u_dag).scale(Complex64::new(0.0, -0.5));

    let re_eig = eigh(&re_part.hermitize())?;
    let coarse = cluster_indices(&re_eig.values, COARSE_TOL);

    let mut blocks = Vec::with_capacity(d);
    let mut eigen_phases = Vec::with_capacity(d);
    let mut unitarity_residual: f64 = 0.0;
    let mut planarity_residual: f64 = 0.0;

    for cluster in coarse {
        let frame: Vec<Vec<Complex64>> = cluster.iter().map(|&k| re_eig.vector(k)).collect();
        // cos θ is flat near θ ∈ {0, π} and sin θ near π/2, so split first
        // by whichever varies faster across this cluster
        let mean_cos =
            cluster.iter().map(|&k| re_eig.values[k]).sum::<f64>() / cluster.len() as f64;
        let vectors = if mean_cos.abs() > FRAC_1_SQRT_2 {
            split_two_stage(&frame, &im_part, &re_part, angle_tol)?
        } else {
            split_two_stage(&frame, &re_part, &im_part, angle_tol)?
        };

        let mut commuting = [Vec::new(), Vec::new()];
        let mut positive = Vec::new();
        let mut negative = 0usize;
        for v in vectors {
            let uv = u.apply(&v)?;
            let rayleigh = inner(&v, &uv);
            let theta = rayleigh.arg();
            let residual = uv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - Complex64::from_polar(1.0, theta) * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            unitarity_residual = unitarity_residual.max(residual);
            eigen_phases.push(theta);

            let sin = theta.sin();
            if sin.abs() <= angle_tol {
                commuting[usize::from(theta.cos() < 0.0)].push(v);
            } else if sin > 0.0 {
                positive.push((v, theta));
            } else {
                negative += 1;
            }
        }
        if positive.len() != negative {
            return Err(Error::Verification(format!(
                "eigenphases of A1*A2 do not pair up: {} with positive and {} with negative phase",
                positive.len(),
                negative
            )));
        }

        for (v, theta) in positive {
            let w = op1.apply(&v)?;
            let e0: Vec<Complex64> = v
                .iter()
                .zip(&w)
                .map(|(a, b)| (a + b) * FRAC_1_SQRT_2)
                .collect();
            let e1: Vec<Complex64> = v
                .iter()
                .zip(&w)
                .map(|(a, b)| -I * (a - b) * FRAC_1_SQRT_2)
                .collect();
            let basis = vec![e0, e1];
            let bloch = [
                bloch_vector(&op1.compress(&basis)?),
                bloch_vector(&op2.compress(&basis)?),
            ];
            planarity_residual = planarity_residual
                .max(bloch[0][1].abs())
                .max(bloch[1][1].abs());
            blocks.push(Block {
                basis,
                phase: theta.abs(),
                bloch,
            });
        }

        for commuting in commuting.iter().filter(|c| !c.is_empty()) {
            let a1_restricted = op1.compress(commuting)?.hermitize();
            let a1_eig = eigh(&a1_restricted)?;
            for k in 0..commuting.len() {
                let v = lift(commuting, &a1_eig.vector(k));
                let s1 = inner(&v, &op1.apply(&v)?).re;
                let s2 = inner(&v, &op2.apply(&v)?).re;
                let phase = if s1 * s2 >= 0.0 { 0.0 } else { PI };
                blocks.push(Block {
                    basis: vec![v],
                    phase,
                    bloch: [[0.0, 0.0, s1.signum()], [0.0, 0.0, s2.signum()]],
                });
            }
        }
    }

    Ok(BlockDecomposition {
        dim: d,
        blocks,
        eigen_phases,
        unitarity_residual,
        planarity_residual,
    })
}

/// Eigenvectors of `first` restricted to `frame`, with each degenerate group
/// (within `tol`) further diagonalized by `second`.
fn split_two_stage(
    frame: &[Vec<Complex64>],
    first: &Operator,
    second: &Operator,
    tol: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let outer = eigh(&first.compress(frame)?.hermitize())?;
    let mut out = Vec::with_capacity(frame.len());
    for group in cluster_indices(&outer.values, tol) {
        let sub: Vec<Vec<Complex64>> = group
            .iter()
            .map(|&k| lift(frame, &outer.vector(k)))
            .collect();
        if sub.len() == 1 {
            out.extend(sub);
            continue;
        }
        let inner_eig = eigh(&second.compress(&sub)?.hermitize())?;
        out.extend((0..sub.len()).map(|k| lift(&sub, &inner_eig.vector(k))));
    }
    Ok(out)
}

/// Group indices of a descending sequence whose consecutive gaps are ≤ tol.
fn cluster_indices(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (k, &value) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(last) if (values[*last.last().unwrap()] - value).abs() <= tol => last.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    clusters
}

/// Σ_k coeffs[k] · frame[k]
fn lift(frame: &[Vec<Complex64>], coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = frame[0].len();
    let mut out = vec![ZERO; d];
    for (v, &c) in frame.iter().zip(coeffs) {
        for (o, &x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    let n = norm(&out);
    out.into_iter().map(|z| z / n).collect()
}

/// (x, y, z) with M = m0·I + x σx + y σy + z σz.
fn bloch_vector(m: &Operator) -> [f64; 3] {
    let off = m.get(0, 1);
    [off.re, -off.im, 0.5 * (m.get(0, 0).re - m.get(1, 1).re)]
}

/// Largest Frobenius distance between A_j and Σ_c P_c A_j P_c.
pub fn verify_pinching(
    a1: &DichotomicObservable,
    a2: &DichotomicObservable,
    decomposition: &BlockDecomposition,
) -> f64 {
    let projectors = decomposition.projectors();
    [a1, a2]
        .iter()
        .map(|a| {
            let pinched = projectors.iter().fold(Operator::zeros(a.dim()), |acc, p| {
                &acc + &(&(p * a.operator()) * p)
            });
            (&pinched - a.operator()).frobenius_norm()
        })
        .fold(0.0, f64::max)
}

/// One term of the qubit mixture produced by [`reduce_strategy`].
#[derive(Debug, Clone, PartialEq)]
pub struct QubitStrategy {
    pub weight: f64,
    pub alice_block: usize,
    pub bob_block: usize,
    pub state: DensityMatrix,
    pub a1: PlanarMeasurement,
    pub a2: PlanarMeasurement,
    pub b1: PlanarMeasurement,
    pub b2: PlanarMeasurement,
    pub chsh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMixture {
    pub alice: BlockDecomposition,
    pub bob: BlockDecomposition,
    pub terms: Vec<QubitStrategy>,
    /// CHSH value of the original strategy.
    pub global_chsh: f64,
    /// Σ p · CHSH over the qubit terms.
    pub weighted_chsh: f64,
    pub total_weight: f64,
}

/// ⟨a1b1⟩ + ⟨a1b2⟩ + ⟨a2b1⟩ − ⟨a2b2⟩ for arbitrary observables on A ⊗ B.
pub fn chsh_general(
    rho: &DensityMatrix,
    a1: &Operator,
    a2: &Operator,
    b1: &Operator,
    b2: &Operator,
) -> Result<f64> {
    if a1.dim() * b1.dim() != rho.dim() {
        return Err(Error::Dimension(format!(
            "observables on {}x{} do not match state of dim {}",
            a1.dim(),
            b1.dim(),
            rho.dim()
        )));
    }
    let e = |a: &Operator, b: &Operator| rho.expectation(&kron(a, b));
    Ok(e(a1, b1)? + e(a1, b2)? + e(a2, b1)? - e(a2, b2)?)
}

pub fn reduce_strategy(
    rho: &DensityMatrix,
    a1: &DichotomicObservable,
    a2: &DichotomicObservable,
    b1: &DichotomicObservable,
    b2: &DichotomicObservable,
) -> Result<StrategyMixture> {
    let (da, db) = (a1.dim(), b1.dim());
    if a2.dim() != da || b2.dim() != db || da * db != rho.dim() {
        return Err(Error::Dimension(format!(
            "state of dim {} does not factor as {da} x {db}",
            rho.dim()
        )));
    }
    let alice = jordan_blocks(a1, a2)?;
    let bob = jordan_blocks(b1, b2)?;

    // ρ expressed in the product of the two block frames.
    let frame = |dec: &BlockDecomposition| -> (Operator, Vec<usize>) {
        let mut w = Operator::zeros(dec.dim);
        let mut offsets = Vec::with_capacity(dec.blocks.len());
        let mut col = 0;
        for b in &dec.blocks {
            offsets.push(col);
            for v in &b.basis {
                for (r, &z) in v.iter().enumerate() {
                    w.set(r, col, z);
                }
                col += 1;
            }
        }
        (w, offsets)
    };
    let (wa, off_a) = frame(&alice);
    let (wb, off_b) = frame(&bob);
    let w = kron(&wa, &wb);
    let in_frame = &(&w.adjoint() * rho.operator()) * &w;

    let mut terms = Vec::new();
    for (ca, block_a) in alice.blocks.iter().enumerate() {
        for (cb, block_b) in bob.blocks.iter().enumerate() {
            let (ra, rb) = (block_a.rank(), block_b.rank());
            let index = |i: usize, j: usize| (off_a[ca] + i) * db + off_b[cb] + j;

            let mut weight = 0.0;
            for i in 0..ra {
                for j in 0..rb {
                    weight += in_frame.get(index(i, j), index(i, j)).re;
                }
            }
            if weight <= ZERO_WEIGHT {
                continue;
            }

            let emb_a = block_a.qubit_embedding();
            let emb_b = block_b.qubit_embedding();
            let mut two_qubit = Operator::zeros(4);
            for i in 0..ra {
                for j in 0..rb {
                    for k in 0..ra {
                        for l in 0..rb {
                            let amp = in_frame.get(index(i, j), index(k, l)) / weight;
                            for (x, y) in (0..2).flat_map(|x| (0..2).map(move |y| (x, y))) {
                                let left = emb_a[i][x] * emb_b[j][y];
                                if left == ZERO {
                                    continue;
                                }
                                for (u, t) in (0..2).flat_map(|u| (0..2).map(move |t| (u, t))) {
                                    let right = (emb_a[k][u] * emb_b[l][t]).conj();
                                    if right == ZERO {
                                        continue;
                                    }
                                    let cur = two_qubit.get(2 * x + y, 2 * u + t);
                                    two_qubit.set(2 * x + y, 2 * u + t, cur + left * amp * right);
                                }
                            }
                        }
                    }
                }
            }
            let state = DensityMatrix::new(two_qubit)?;
            let (qa1, qa2) = block_a.qubit_settings();
            let (qb1, qb2) = block_b.qubit_settings();
            let chsh = chsh_value(&state, qa1, qa2, qb1, qb2)?;
            terms.push(QubitStrategy {
                weight,
                alice_block: ca,
                bob_block: cb,
                state,
                a1: qa1,
                a2: qa2,
                b1: qb1,
                b2: qb2,
                chsh,
            });
        }
    }

    let global_chsh = chsh_general(
        rho,
        a1.operator(),
        a2.operator(),
        b1.operator(),
        b2.operator(),
    )?;
    let weighted_chsh = terms.iter().map(|t| t.weight * t.chsh).sum();
    let total_weight = terms.iter().map(|t| t.weight).sum();
    Ok(StrategyMixture {
        alice,
        bob,
        terms,
        global_chsh,
        weighted_chsh,
        total_weight,
    })
}

/// Direct sum of planar qubit pairs (A1 = σz, A2 at angle θ) and rank-1
/// pairs of fixed signs, conjugated by `unitary`: V (⊕ blocks) V†.
pub fn planted_pair(
    angles: &[f64],
    scalars: &[(f64, f64)],
    unitary: &Operator,
) -> Result<(DichotomicObservable, DichotomicObservable)> {
    let d = 2 * angles.len() + scalars.len();
    if unitary.dim() != d {
        return Err(Error::Dimension(format!(
            "unitary of dim {} for a direct sum of dim {d}",
            unitary.dim()
        )));
    }
    let mut a1 = Operator::zeros(d);
    let mut a2 = Operator::zeros(d);
    for (k, &theta) in angles.iter().enumerate() {
        let (i, j) = (2 * k, 2 * k + 1);
        let m1 = PlanarMeasurement::sigma_z().observable();
        let m2 = observable_at(theta);
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let (row, col) = ([i, j][r], [i, j][c]);
            a1.set(row, col, m1.get(r, c));
            a2.set(row, col, m2.get(r, c));
        }
    }
    for (k, &(s1, s2)) in scalars.iter().enumerate() {
        let idx = 2 * angles.len() + k;
        a1.set(idx, idx, Complex64::new(s1.signum(), 0.0));
        a2.set(idx, idx, Complex64::new(s2.signum(), 0.0));
    }
    let conj = |a: &Operator| &(unitary * a) * &unitary.adjoint();
    Ok((
        DichotomicObservable::new(conj(&a1))?,
        DichotomicObservable::new(conj(&a2))?,
    ))
}

fn observable_at(theta: f64) -> Operator {
    let (s, c) = theta.sin_cos();
    Operator::from_real_rows(&[&[c, s], &[s, -c]]).expect("2x2")
}

/// Sorted planted angles against sorted recovered angles.
pub fn angle_mismatch(planted: &[f64], recovered: &[f64]) -> Option<f64> {
    if planted.len() != recovered.len() {
        return None;
    }
    let mut p = planted.to_vec();
    p.sort_by(f64::total_cmp);
    let mut r = recovered.to_vec();
    r.sort_by(f64::total_cmp);
    Some(
        p.iter()
            .zip(&r)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
    )
}
