//! Seeded generators for random vectors and matrices.
//!
//! ChaCha8 keeps streams identical across platforms, which the
//! byte-for-byte reproducibility of reports depends on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrices::TruncMatrix;
use crate::scalar::C64;
use crate::sequences::SeqVector;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real and imaginary parts uniform on `[-1, 1)`.
pub fn random_c64<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Dense random vector supported on `1..=dim`.
pub fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> SeqVector<C64> {
    let dense: Vec<C64> = (0..dim).map(|_| random_c64(rng)).collect();
    SeqVector::from_dense(&dense)
}

pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize) -> TruncMatrix<C64> {
    TruncMatrix::from_fn(dim, |_, _| random_c64(rng))
}

/// Random vector normalized to unit `l2` norm.
pub fn random_unit_vector<R: Rng>(rng: &mut R, dim: usize) -> SeqVector<C64> {
    let v = random_vector(rng, dim);
    let norm = crate::sequences::seq_norm(&v, 0);
    v.scale(&C64::new(1.0 / norm, 0.0))
}
