//! Seeded random instances: Haar unitaries and Gaussian states/matrices.

use crate::numerics::{c64, ComplexMatrix};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut Rng) -> Complex64 {
    c64(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// Haar-distributed unitary: QR of a complex Gaussian with the phases of R's
/// diagonal folded back into Q.
pub fn haar_unitary(rng: &mut Rng, dim: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    let (q, r) = g.qr().unpack();
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let col = q.column(j) * ph;
        q.set_column(j, &col);
    }
    q
}

pub fn random_state(rng: &mut Rng, n_qubits: usize) -> Vec<Complex64> {
    let dim = 1usize << n_qubits;
    let v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Random matrix of the given rank: W_K·diag(σ)·V_K† with σ uniform in (0.1, 1].
pub fn random_rank_matrix(rng: &mut Rng, dim: usize, rank: usize) -> ComplexMatrix {
    use rand::Rng as _;
    let w = haar_unitary(rng, dim);
    let v = haar_unitary(rng, dim);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for k in 0..rank {
        let s: f64 = rng.random_range(0.1..=1.0);
        m += w.column(k) * v.column(k).adjoint() * c64(s, 0.0);
    }
    m
}
