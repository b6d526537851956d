//! Density matrices, pure states, entropies and purification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigh::{eigh, eigvalsh};
use super::operator::{kron_vec, norm, Operator, ZERO};
use crate::error::{Error, Result};

/// Hermiticity, trace and positivity tolerance applied when validating input.
pub const VALIDATION_TOL: f64 = 1e-10;
/// Probabilities this far outside [0, 1] are clamped silently.
pub const CLAMP_TOL: f64 = 1e-12;

/// Positive, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermiticity_deviation();
        if herm > VALIDATION_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let trace = op.trace();
        if (trace.re - 1.0).abs() > VALIDATION_TOL || trace.im.abs() > VALIDATION_TOL {
            return Err(Error::InvalidState(format!("trace {trace} != 1")));
        }
        let op = op.hermitize();
        let min_eig = eigvalsh(&op)?.last().copied().unwrap_or(0.0);
        if min_eig < -VALIDATION_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { op })
    }

    /// Normalize a positive operator by its trace.
    pub fn from_unnormalized(op: Operator) -> Result<Self> {
        let trace = op.trace().re;
        if trace <= 0.0 {
            return Err(Error::InvalidState("non-positive trace".into()));
        }
        Self::new(op.scale_real(1.0 / trace))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            op: Operator::projector(psi.amplitudes()),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Convex combination Σ p_k ρ_k; weights must be a probability vector.
    pub fn mixture(terms: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = terms
            .first()
            .map(|(_, r)| r.dim())
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let mut acc = Operator::zeros(dim);
        for (p, rho) in terms {
            if rho.dim() != dim {
                return Err(Error::Dimension("mixture of unequal dimensions".into()));
            }
            check_probability(*p)?;
            acc = &acc + &rho.op.scale_real(*p);
        }
        Self::new(acc)
    }

    /// Σ p_k |ψ_k⟩⟨ψ_k|. Positive by construction, so no spectrum check.
    pub fn from_pure_mixture(terms: &[(f64, &PureState)]) -> Result<Self> {
        let dim = terms
            .first()
            .map(|(_, psi)| psi.dim())
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let mut acc = Operator::zeros(dim);
        let mut total = 0.0;
        for (p, psi) in terms {
            if psi.dim() != dim {
                return Err(Error::Dimension("mixture of unequal dimensions".into()));
            }
            let p = check_probability(*p)?;
            total += p;
            acc = &acc + &Operator::projector(psi.amplitudes()).scale_real(p);
        }
        if (total - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidState(format!(
                "mixture weights sum to {total}"
            )));
        }
        Ok(Self {
            op: acc.hermitize(),
        })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    /// tr(ρ X)
    pub fn expectation(&self, observable: &Operator) -> Result<f64> {
        Ok(self.op.trace_product(observable)?.re)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self {
            op: super::operator::kron(&self.op, &other.op),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.op).expect("density matrix is Hermitian")
    }

    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self { op }
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.op.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let op = Operator::deserialize(d)?;
        DensityMatrix::new(op).map_err(serde::de::Error::custom)
    }
}

/// Unit vector in C^d.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Dimension("empty state vector".into()));
        }
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("state norm {n} != 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|z| z / n).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        Self {
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }
}

pub fn check_probability(p: f64) -> Result<f64> {
    if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&p) || p.is_nan() {
        return Err(Error::Probability { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// h(p) = −p log₂ p − (1−p) log₂(1−p)
pub fn binary_entropy(p: f64) -> Result<f64> {
    let p = check_probability(p)?;
    Ok(plogp(p) + plogp(1.0 - p))
}

/// Shannon entropy in bits; negative entries are treated as zero.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| plogp(p.clamp(0.0, 1.0))).sum()
}

/// −tr ρ log₂ ρ, eigenvalues clamped to [0, 1].
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let dim = rho.dim() as f64;
    shannon_entropy(&rho.eigenvalues()).clamp(0.0, dim.log2())
}

/// Canonical purification Σ √wᵢ |vᵢ⟩ ⊗ |i⟩, the environment as the second factor.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let d = rho.dim();
    let spectrum = eigh(rho.operator()).expect("density matrix is Hermitian");
    let mut amplitudes = vec![ZERO; d * d];
    for (i, &w) in spectrum.values.iter().enumerate() {
        let weight = w.max(0.0).sqrt();
        if weight == 0.0 {
            continue;
        }
        for s in 0..d {
            amplitudes[s * d + i] += spectrum.vectors.get(s, i) * weight;
        }
    }
    // Clamping tiny negative eigenvalues can shift the norm by ~1e-16.
    PureState::normalized(amplitudes).expect("purification of a unit-trace state")
}

/// Reduce `rho` (on ⊗ dims, first factor most significant) to the subsystems in `keep`.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let reduced = partial_trace_op(rho.operator(), dims, keep)?;
    Ok(DensityMatrix::from_operator_unchecked(reduced.hermitize()))
}

pub fn partial_trace_op(op: &Operator, dims: &[usize], keep: &[usize]) -> Result<Operator> {
    let total: usize = dims.iter().product();
    if total != op.dim() {
        return Err(Error::Dimension(format!(
            "subsystem dims {dims:?} multiply to {total}, operator has dim {}",
            op.dim()
        )));
    }
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set is empty".into()));
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "keep index out of range for {} subsystems",
            dims.len()
        )));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        kept[k] = true;
    }

    let out_dim: usize = dims
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(d, _)| d)
        .product();
    let traced_dim = total / out_dim;

    // Split a full index into (kept index, traced index).
    let split = |mut index: usize| -> (usize, usize) {
        let (mut k_idx, mut t_idx) = (0, 0);
        let (mut k_mul, mut t_mul) = (1, 1);
        for (s, &d) in dims.iter().enumerate().rev() {
            let digit = index % d;
            index /= d;
            if kept[s] {
                k_idx += digit * k_mul;
                k_mul *= d;
            } else {
                t_idx += digit * t_mul;
                t_mul *= d;
            }
        }
        (k_idx, t_idx)
    };

    let table: Vec<(usize, usize)> = (0..total).map(split).collect();
    let mut by_traced: Vec<Vec<(usize, usize)>> = vec![Vec::new(); traced_dim];
    for (full, &(k, t)) in table.iter().enumerate() {
        by_traced[t].push((full, k));
    }

    let mut out = Operator::zeros(out_dim);
    for group in &by_traced {
        for &(row, kr) in group {
            for &(col, kc) in group {
                let cur = out.get(kr, kc);
                out.set(kr, kc, cur + op.get(row, col));
            }
        }
    }
    Ok(out)
}

/// Marginal of |ψ⟩⟨ψ| on the kept subsystems.
pub fn reduced_state(psi: &PureState, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace(&DensityMatrix::from_pure(psi), dims, keep)
}
