//! Random operators and states for sweeps and construct-then-recover checks.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::operator::{inner, Operator};
use super::state::{DensityMatrix, PureState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let mut op = Operator::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            op.set(i, j, gaussian(rng));
        }
    }
    op.hermitize()
}

/// Haar-random unitary via Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while columns.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
        // two passes keep the basis orthonormal to machine precision
        for _ in 0..2 {
            for c in &columns {
                let overlap = inner(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= overlap * ci;
                }
            }
        }
        let n = super::operator::norm(&v);
        if n < 1e-8 {
            continue;
        }
        columns.push(v.into_iter().map(|z| z / n).collect());
    }
    let mut u = Operator::zeros(dim);
    for (j, c) in columns.iter().enumerate() {
        for (i, &z) in c.iter().enumerate() {
            u.set(i, j, z);
        }
    }
    u
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    let v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    PureState::normalized(v).expect("Gaussian vector is nonzero")
}

pub fn random_product_state<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    random_pure_state(rng, 2).tensor(&random_pure_state(rng, 2))
}

/// Full-rank random state G G† / tr(G G†) with G complex Gaussian.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let mut g = Operator::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            g.set(i, j, gaussian(rng));
        }
    }
    let ggd = &g * &g.adjoint();
    DensityMatrix::from_unnormalized(ggd.hermitize()).expect("G G† is positive")
}

/// Flat-Dirichlet weights on the probability simplex.
pub fn random_simplex<R: Rng + ?Sized, const N: usize>(rng: &mut R) -> [f64; N] {
    let mut w = [0.0; N];
    for x in w.iter_mut() {
        let u: f64 = rng.gen();
        *x = -(1.0 - u).ln();
    }
    let total: f64 = w.iter().sum();
    w.map(|x| x / total)
}
