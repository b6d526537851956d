//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Each rotation first removes the phase of the pivot element with a diagonal
//! unitary, then applies the real symmetric Jacobi rotation that annihilates
//! it. Sweeps continue until the off-diagonal mass is negligible relative to
//! the Frobenius norm of the input.

use num_complex::Complex64;

use super::operator::{Operator, ONE, ZERO};
use crate::error::{Error, Result};

/// Hermiticity tolerance accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone)]
pub struct Eigh {
    /// Sorted in descending order.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: Operator,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// V diag(w) V†
    pub fn reconstruct(&self) -> Operator {
        let n = self.values.len();
        let mut out = Operator::zeros(n);
        for k in 0..n {
            let w = self.values[k];
            for i in 0..n {
                let vik = self.vectors.get(i, k) * w;
                for j in 0..n {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + vik * self.vectors.get(j, k).conj());
                }
            }
        }
        out
    }
}

pub fn eigh(op: &Operator) -> Result<Eigh> {
    let deviation = op.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = op.dim();
    let mut a = op.hermitize();
    let mut v = Operator::identity(n);

    let scale = a.frobenius_norm();
    let threshold = (f64::EPSILON * scale).powi(2).max(f64::MIN_POSITIVE);

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_mass(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_mass(&a) > threshold {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).re.total_cmp(&a.get(i, i).re));
    let values = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = Operator::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok(Eigh { values, vectors })
}

/// Eigenvalues only, descending.
pub fn eigvalsh(op: &Operator) -> Result<Vec<f64>> {
    eigh(op).map(|e| e.values)
}

fn off_diagonal_mass(a: &Operator) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a.get(i, j).norm_sqr();
            }
        }
    }
    acc
}

fn rotate(a: &mut Operator, v: &mut Operator, p: usize, q: usize) {
    let apq = a.get(p, q);
    let magnitude = apq.norm();
    if magnitude == 0.0 {
        return;
    }
    let phase = apq / magnitude;
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;

    let theta = (aqq - app) / (2.0 * magnitude);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = D R with D = diag(1, e^{-iφ}) on (p, q) and R the real rotation.
    let j_pp = Complex64::new(c, 0.0);
    let j_pq = Complex64::new(s, 0.0);
    let j_qp = -phase.conj() * s;
    let j_qq = phase.conj() * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * j_pp + akq * j_qp);
        a.set(k, q, akp * j_pq + akq * j_qq);
    }
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, j_pp.conj() * apk + j_qp.conj() * aqk);
        a.set(q, k, j_pq.conj() * apk + j_qq.conj() * aqk);
    }
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);
    a.set(p, p, Complex64::new(a.get(p, p).re, 0.0));
    a.set(q, q, Complex64::new(a.get(q, q).re, 0.0));

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * j_pp + vkq * j_qp);
        v.set(k, q, vkp * j_pq + vkq * j_qq);
    }
}

/// max |V†V − I|
pub fn orthonormality_deviation(vectors: &Operator) -> f64 {
    let gram = &vectors.adjoint() * vectors;
    let n = vectors.dim();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((gram.get(i, j) - target).norm());
        }
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pauli_z_spectrum() {
        let e = eigh(&Operator::pauli_z()).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        assert!((e.vector(0)[0].norm() - 1.0).abs() < 1e-15);
        assert!((e.vector(1)[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum_has_hadamard_columns() {
        let e = eigh(&Operator::pauli_x()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..2 {
            for r in 0..2 {
                assert!((e.vectors.get(r, k).norm() - h).abs() < 1e-14);
            }
        }
        let plus = e.vector(0);
        assert!((plus[0] - plus[1]).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let op = Operator::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(eigh(&op), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn degenerate_spectrum() {
        let e = eigh(&Operator::identity(5)).unwrap();
        assert!(e.values.iter().all(|&w| (w - 1.0).abs() < 1e-15));
        assert!(orthonormality_deviation(&e.vectors) < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=16 {
            for _ in 0..8 {
                let h = random_hermitian(&mut rng, dim);
                let e = eigh(&h).unwrap();
                assert!(
                    (&e.reconstruct() - &h).frobenius_norm() <= 1e-10,
                    "reconstruction failed for dim {dim}"
                );
                assert!(orthonormality_deviation(&e.vectors) <= 1e-10);
                assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }
}
