//! Truncated operator matrices and the weighted norm and seminorm families.
//!
//! A [`TruncMatrix`] is the finite section `(<x e_j, e_i>)_{i,j <= T}` of an
//! operator. Indices are 1-based in the public API, matching `e_1, e_2, ...`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{Scalar, C64};
use crate::sequences::{pairing, seq_norm, SeqError, SeqVector};
use crate::weights::{WeightError, WeightFamily, WeightKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error(transparent)]
    Support(#[from] SeqError),
    #[error("weight family {0} does not define a matrix norm")]
    InvalidFamily(WeightKind),
    #[error("the bounded set is empty")]
    EmptyBoundedSet,
    #[error("matrix rows must all have length {expected}, row {row} has {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error(transparent)]
    Weight(#[from] WeightError),
}

#[derive(Clone, PartialEq)]
pub struct TruncMatrix<S = C64> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> fmt::Debug for TruncMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncMatrix")
            .field("dim", &self.dim)
            .field("data", &self.data)
            .finish()
    }
}

impl<S: Scalar> TruncMatrix<S> {
    pub fn zeros(dim: usize) -> Self {
        TruncMatrix {
            dim,
            data: vec![S::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = S::one();
        }
        m
    }

    /// The matrix unit `e_{ij}`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.set(i, j, S::one());
        m
    }

    /// Entries from `f(i, j)`, called in row-major order with 1-based indices.
    pub fn from_fn<F: FnMut(usize, usize) -> S>(dim: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 1..=dim {
            for j in 1..=dim {
                data.push(f(i, j));
            }
        }
        TruncMatrix { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, MatrixError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(MatrixError::Ragged {
                    row: r + 1,
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(TruncMatrix { dim, data })
    }

    /// Row-major entries; `data.len()` must be a perfect square.
    pub fn from_row_major(dim: usize, data: Vec<S>) -> Result<Self, MatrixError> {
        if data.len() != dim * dim {
            return Err(MatrixError::DimMismatch {
                left: dim * dim,
                right: data.len(),
            });
        }
        Ok(TruncMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[(i - 1) * self.dim + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        let dim = self.dim;
        self.data[(i - 1) * dim + (j - 1)] = value;
    }

    /// `((i, j), x_ij)` in row-major order.
    pub fn indexed(&self) -> impl Iterator<Item = ((usize, usize), &S)> {
        let dim = self.dim;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| ((k / dim + 1, k % dim + 1), v))
    }

    fn check_dim(&self, other: &Self) -> Result<(), MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() - b.clone()))
    }

    pub fn scale(&self, lambda: &S) -> Self {
        self.map(|v| lambda.clone() * v.clone())
    }

    pub fn map<T: Scalar, F: Fn(&S) -> T>(&self, f: F) -> TruncMatrix<T> {
        TruncMatrix {
            dim: self.dim,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn zip_with<F: Fn(&S, &S) -> S>(&self, other: &Self, f: F) -> Self {
        TruncMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Matrix product `x y`.
    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        mat_mul(self, other)
    }

    pub fn adjoint(&self) -> Self {
        adjoint(self)
    }

    /// `x xi`, the action on a vector supported in `1..=dim`.
    pub fn apply(&self, xi: &SeqVector<S>) -> Result<SeqVector<S>, MatrixError> {
        xi.check_support(self.dim)?;
        let dim = self.dim;
        let mut out = vec![S::zero(); dim];
        for (j, v) in xi.iter() {
            for (i, slot) in out.iter_mut().enumerate() {
                let x = &self.data[i * dim + (j - 1)];
                if !x.is_zero() {
                    *slot = slot.clone() + x.clone() * v.clone();
                }
            }
        }
        Ok(SeqVector::from_dense(&out))
    }

    pub fn diagonal(&self) -> SeqVector<S> {
        let dense: Vec<S> = (1..=self.dim).map(|k| self.get(k, k).clone()).collect();
        SeqVector::from_dense(&dense)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, MatrixError> {
        self.check_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).modulus())
            .fold(0.0, f64::max))
    }

    /// Embeds into a larger truncation, padding with zeros.
    pub fn embed(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        let mut out = Self::zeros(dim);
        for ((i, j), v) in self.indexed() {
            out.set(i, j, v.clone());
        }
        out
    }
}

/// Product of two truncations.
pub fn mat_mul<S: Scalar>(x: &TruncMatrix<S>, y: &TruncMatrix<S>) -> Result<TruncMatrix<S>, MatrixError> {
    x.check_dim(y)?;
    let dim = x.dim;
    let mut data = vec![S::zero(); dim * dim];
    for i in 0..dim {
        let row = &mut data[i * dim..(i + 1) * dim];
        for k in 0..dim {
            let a = &x.data[i * dim + k];
            if a.is_zero() {
                continue;
            }
            let y_row = &y.data[k * dim..(k + 1) * dim];
            for (slot, b) in row.iter_mut().zip(y_row) {
                *slot = slot.clone() + a.clone() * b.clone();
            }
        }
    }
    Ok(TruncMatrix { dim, data })
}

/// Conjugate transpose.
pub fn adjoint<S: Scalar>(x: &TruncMatrix<S>) -> TruncMatrix<S> {
    TruncMatrix::from_fn(x.dim, |i, j| x.get(j, i).conj())
}

/// The matrix of `zeta -> <zeta, eta> xi`, entries `xi_i conj(eta_j)`.
pub fn rank_one<S: Scalar>(xi: &SeqVector<S>, eta: &SeqVector<S>, dim: usize) -> Result<TruncMatrix<S>, MatrixError> {
    let a = xi.to_dense(dim)?;
    let b = eta.to_dense(dim)?;
    Ok(TruncMatrix::from_fn(dim, |i, j| a[i - 1].clone() * b[j - 1].conj()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NormP {
    One,
    Two,
    Inf,
}

impl FromStr for NormP {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(NormP::One),
            "2" => Ok(NormP::Two),
            "inf" | "sup" | "oo" => Ok(NormP::Inf),
            other => Err(format!("unknown norm exponent `{other}`, expected 1, 2 or inf")),
        }
    }
}

/// Weights `w(i, j; N, n)` for `i, j <= dim`, precomputed for repeated norms.
#[derive(Clone, Debug)]
pub struct WeightTable {
    dim: usize,
    values: Vec<f64>,
}

impl WeightTable {
    pub fn new(family: &WeightFamily, dim: usize, outer: u32, inner: u32) -> Result<Self, MatrixError> {
        check_matrix_family(family.kind)?;
        let mut values = Vec::with_capacity(dim * dim);
        for i in 1..=dim {
            for j in 1..=dim {
                values.push(family.eval_f64(i, j, outer, inner)?);
            }
        }
        Ok(WeightTable { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i - 1) * self.dim + (j - 1)]
    }
}

fn check_matrix_family(kind: WeightKind) -> Result<(), MatrixError> {
    match kind {
        WeightKind::A | WeightKind::B | WeightKind::BPrime | WeightKind::D | WeightKind::Kinf => Ok(()),
        other => Err(MatrixError::InvalidFamily(other)),
    }
}

/// `||x||_{N,n,p} = (sum_{i,j} (|x_ij| w(i,j;N,n))^p)^(1/p)`, with the
/// supremum for `p = inf`.
pub fn matrix_norm_p<S: Scalar>(
    x: &TruncMatrix<S>,
    family: &WeightFamily,
    outer: u32,
    inner: u32,
    p: NormP,
) -> Result<f64, MatrixError> {
    let table = WeightTable::new(family, x.dim, outer, inner)?;
    weighted_norm(x, &table, p)
}

/// [`matrix_norm_p`] against a precomputed table.
pub fn weighted_norm<S: Scalar>(x: &TruncMatrix<S>, table: &WeightTable, p: NormP) -> Result<f64, MatrixError> {
    if table.dim != x.dim {
        return Err(MatrixError::DimMismatch {
            left: x.dim,
            right: table.dim,
        });
    }
    let moduli: Vec<f64> = x.data.iter().map(Scalar::modulus).collect();
    weighted_norm_moduli(&moduli, table, p)
}

/// [`weighted_norm`] from precomputed row-major moduli `|x_ij|`.
pub fn weighted_norm_moduli(moduli: &[f64], table: &WeightTable, p: NormP) -> Result<f64, MatrixError> {
    if moduli.len() != table.values.len() {
        return Err(MatrixError::DimMismatch {
            left: moduli.len(),
            right: table.values.len(),
        });
    }
    let terms = moduli.iter().zip(&table.values).map(|(m, w)| m * w);
    Ok(match p {
        NormP::One => terms.sum(),
        NormP::Two => terms.map(|t| t * t).sum::<f64>().sqrt(),
        NormP::Inf => terms.fold(0.0, f64::max),
    })
}

/// A bounded subset of `s`, represented by finitely many vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedSet<S = C64> {
    pub vectors: Vec<SeqVector<S>>,
}

impl<S: Scalar> BoundedSet<S> {
    pub fn new(vectors: Vec<SeqVector<S>>) -> Self {
        BoundedSet { vectors }
    }

    fn check(&self, dim: usize) -> Result<(), MatrixError> {
        if self.vectors.is_empty() {
            return Err(MatrixError::EmptyBoundedSet);
        }
        for v in &self.vectors {
            v.check_support(dim)?;
        }
        Ok(())
    }
}

/// `p_{n,B}(x) = max{ sup_B |x xi|_n, sup_B |x* xi|_n }`.
pub fn seminorm_p<S: Scalar>(x: &TruncMatrix<S>, n: u32, set: &BoundedSet<S>) -> Result<f64, MatrixError> {
    set.check(x.dim)?;
    let x_star = adjoint(x);
    let level = n as i32;
    let mut best = 0.0f64;
    for xi in &set.vectors {
        best = best.max(seq_norm(&x.apply(xi)?, level));
        best = best.max(seq_norm(&x_star.apply(xi)?, level));
    }
    Ok(best)
}

/// The point of the polar ball `{|xi|_{-n} <= 1}` maximizing `|<zeta, xi>|`:
/// `xi_j = j^(2n) zeta_j / |zeta|_n`. Zero when `zeta = 0`.
pub fn polar_maximizer(zeta: &SeqVector<C64>, n: u32) -> SeqVector<C64> {
    let norm = seq_norm(zeta, n as i32);
    if norm == 0.0 {
        return SeqVector::zero();
    }
    let two_n = 2 * n as i32;
    SeqVector::from_entries(
        zeta.iter()
            .map(|(j, v)| (j, v * ((j as f64).powi(two_n) / norm))),
    )
    .expect("indices are positive")
}

/// `q_{n,B}(x) = max{ sup_B |x xi|_n, sup_{|xi|_{-n} <= 1} sup_{eta in B} |<eta, x xi>| }`.
///
/// The supremum over the polar ball is attained on the truncation: for each
/// `eta` the maximizer is [`polar_maximizer`] of `x* eta`, and the value is
/// evaluated as `|<eta, x xi*>|` directly.
pub fn seminorm_q(x: &TruncMatrix<C64>, n: u32, set: &BoundedSet<C64>) -> Result<f64, MatrixError> {
    set.check(x.dim)?;
    let x_star = adjoint(x);
    let level = n as i32;
    let mut primal = 0.0f64;
    let mut dual = 0.0f64;
    for eta in &set.vectors {
        primal = primal.max(seq_norm(&x.apply(eta)?, level));
        let maximizer = polar_maximizer(&x_star.apply(eta)?, n);
        dual = dual.max(pairing(eta, &x.apply(&maximizer)?).norm());
    }
    Ok(primal.max(dual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, random_vector, seeded_rng};
    use crate::scalar::CRat;
    use crate::weights::WeightKind;
    use num::rational::BigRational;
    use num::traits::{One, Zero};

    fn unit(dim: usize, i: usize, j: usize) -> TruncMatrix<C64> {
        TruncMatrix::unit(dim, i, j)
    }

    fn triple_loop(x: &TruncMatrix<C64>, y: &TruncMatrix<C64>) -> TruncMatrix<C64> {
        let t = x.dim();
        TruncMatrix::from_fn(t, |i, j| {
            let mut acc = C64::zero();
            for k in 1..=t {
                acc += x.get(i, k) * y.get(k, j);
            }
            acc
        })
    }

    #[test]
    fn unit_calculus() {
        let p = mat_mul(&unit(3, 1, 2), &unit(3, 2, 1)).unwrap();
        assert_eq!(p, unit(3, 1, 1));
        assert_eq!(adjoint(&unit(3, 1, 2)), unit(3, 2, 1));
        let mut rng = seeded_rng(1);
        let x = random_matrix(&mut rng, 5);
        assert_eq!(mat_mul(&x, &TruncMatrix::identity(5)).unwrap(), x);
        assert!(matches!(
            mat_mul(&x, &TruncMatrix::identity(4)),
            Err(MatrixError::DimMismatch { left: 5, right: 4 })
        ));
    }

    #[test]
    fn product_matches_triple_loop() {
        let mut rng = seeded_rng(2);
        let x = random_matrix(&mut rng, 8);
        let y = random_matrix(&mut rng, 8);
        let d = mat_mul(&x, &y).unwrap().max_abs_diff(&triple_loop(&x, &y)).unwrap();
        assert!(d <= 1e-12);
    }

    #[test]
    fn hermitian_is_self_adjoint() {
        let mut rng = seeded_rng(3);
        let x = random_matrix(&mut rng, 6);
        let h = x.add(&adjoint(&x)).unwrap();
        assert_eq!(adjoint(&h), h);
    }

    #[test]
    fn adjoint_moves_across_pairing() {
        let mut rng = seeded_rng(4);
        for _ in 0..20 {
            let x = random_matrix(&mut rng, 7);
            let xi = random_vector(&mut rng, 7);
            let eta = random_vector(&mut rng, 7);
            let lhs = pairing(&x.apply(&xi).unwrap(), &eta);
            let rhs = pairing(&xi, &adjoint(&x).apply(&eta).unwrap());
            assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn rank_one_examples() {
        let e1 = SeqVector::<C64>::unit(1);
        assert_eq!(rank_one(&e1, &e1, 3).unwrap(), unit(3, 1, 1));
        let mut rng = seeded_rng(5);
        let xi = random_vector(&mut rng, 6);
        let applied = rank_one(&xi, &e1, 6).unwrap().apply(&e1).unwrap();
        assert_eq!(applied, xi);
        for _ in 0..20 {
            let xi = random_vector(&mut rng, 6);
            let eta = random_vector(&mut rng, 6);
            let zeta = random_vector(&mut rng, 6);
            let lhs = rank_one(&xi, &eta, 6).unwrap().apply(&zeta).unwrap();
            let rhs = xi.scale(&pairing(&zeta, &eta));
            for j in 1..=6 {
                assert!((lhs.get(j) - rhs.get(j)).norm() <= 1e-12);
            }
        }
        let far = SeqVector::<C64>::unit(9);
        assert!(matches!(rank_one(&far, &e1, 4), Err(MatrixError::Support(_))));
    }

    #[test]
    fn rank_one_is_exact_over_rationals() {
        let half = BigRational::new(1.into(), 2.into());
        let xi = SeqVector::<CRat>::from_dense(&[CRat::new(half.clone(), half.clone()), CRat::one()]);
        let eta = SeqVector::<CRat>::from_dense(&[CRat::one(), CRat::new(BigRational::zero(), half)]);
        let m = rank_one(&xi, &eta, 2).unwrap();
        let zeta = SeqVector::<CRat>::from_dense(&[CRat::from_int(3), CRat::from_int(-2)]);
        assert_eq!(m.apply(&zeta).unwrap(), xi.scale(&pairing(&zeta, &eta)));
    }

    #[test]
    fn matrix_norm_examples() {
        let a = WeightFamily::new(WeightKind::A);
        for k in 1..=6usize {
            for (outer, inner) in [(0, 0), (3, 1), (1, 4), (2, 2)] {
                let v = matrix_norm_p(&unit(6, k, k), &a, outer, inner, NormP::Inf).unwrap();
                let expected = (k as f64).powi(outer as i32 - inner as i32);
                assert_eq!(v, expected);
            }
        }
        assert_eq!(matrix_norm_p(&unit(3, 1, 2), &a, 3, 0, NormP::One).unwrap(), 8.0);
        assert!(matches!(
            matrix_norm_p(&unit(3, 1, 2), &WeightFamily::new(WeightKind::SeqS), 0, 0, NormP::One),
            Err(MatrixError::InvalidFamily(WeightKind::SeqS))
        ));
    }

    #[test]
    fn matrix_norm_matches_entrywise_sum() {
        let mut rng = seeded_rng(6);
        let x = random_matrix(&mut rng, 10);
        for kind in [WeightKind::A, WeightKind::B, WeightKind::BPrime, WeightKind::D, WeightKind::Kinf] {
            let fam = WeightFamily::new(kind);
            let (outer, inner) = (2, 1);
            let mut direct = 0.0;
            for i in 1..=10usize {
                for j in 1..=10usize {
                    let w = match kind {
                        WeightKind::A => ((i as f64).powi(2) / j as f64).max((j as f64).powi(2) / i as f64),
                        WeightKind::B => (i as f64).powi(2) / j as f64,
                        WeightKind::BPrime => (j as f64).powi(2) / i as f64,
                        WeightKind::D => ((j as f64).powi(3) / i as f64).max((i as f64).powi(3) / j as f64),
                        _ => (i as f64 * j as f64).powi(2),
                    };
                    direct += x.get(i, j).norm() * w;
                }
            }
            let v = matrix_norm_p(&x, &fam, outer, inner, NormP::One).unwrap();
            assert!((v - direct).abs() <= 1e-12 * direct, "{kind}");
        }
    }

    #[test]
    fn matrix_norm_monotone_in_truncation() {
        let mut rng = seeded_rng(8);
        let big = random_matrix(&mut rng, 12);
        let a = WeightFamily::new(WeightKind::A);
        let mut last = [0.0; 3];
        for t in 1..=12 {
            let x = TruncMatrix::from_fn(t, |i, j| *big.get(i, j));
            for (slot, p) in [NormP::One, NormP::Two, NormP::Inf].into_iter().enumerate() {
                let v = matrix_norm_p(&x, &a, 2, 1, p).unwrap();
                assert!(v >= last[slot]);
                last[slot] = v;
            }
        }
    }

    #[test]
    fn lp_equivalence_on_random_matrices() {
        let c = crate::weights::NUCLEARITY_LIMIT;
        let mut rng = seeded_rng(9);
        let a = WeightFamily::new(WeightKind::A);
        for _ in 0..10 {
            let x = random_matrix(&mut rng, 16);
            for outer in 0..=3 {
                for inner in 0..=3 {
                    let inf = matrix_norm_p(&x, &a, outer, inner, NormP::Inf).unwrap();
                    let one = matrix_norm_p(&x, &a, outer, inner, NormP::One).unwrap();
                    assert!(inf <= one * (1.0 + 1e-10));
                    let lhs = matrix_norm_p(&x, &a, outer, inner + 2, NormP::One).unwrap();
                    let rhs = matrix_norm_p(&x, &a, outer + 2, inner, NormP::Inf).unwrap();
                    assert!(lhs <= c * rhs * (1.0 + 1e-10));
                }
            }
        }
    }

    #[test]
    fn seminorm_examples() {
        let b1 = BoundedSet::new(vec![SeqVector::unit(1)]);
        let b2 = BoundedSet::new(vec![SeqVector::unit(2)]);
        for n in 0..4 {
            assert_eq!(seminorm_p(&unit(3, 1, 1), n, &b1).unwrap(), 1.0);
            assert_eq!(seminorm_p(&unit(3, 1, 2), n, &b2).unwrap(), 1.0);
        }
        assert_eq!(seminorm_q(&unit(3, 1, 2), 1, &b2).unwrap(), 1.0);
        let mut rng = seeded_rng(10);
        let x = random_matrix(&mut rng, 5);
        let zero_set = BoundedSet::new(vec![SeqVector::zero()]);
        assert_eq!(seminorm_q(&x, 2, &zero_set).unwrap(), 0.0);
        assert_eq!(seminorm_p(&x, 2, &zero_set).unwrap(), 0.0);
        assert_eq!(
            seminorm_p(&x, 2, &BoundedSet::new(vec![])),
            Err(MatrixError::EmptyBoundedSet)
        );
    }

    #[test]
    fn seminorm_p_is_brute_force_max() {
        let mut rng = seeded_rng(11);
        let x = random_matrix(&mut rng, 8);
        let vectors: Vec<_> = (0..5).map(|_| random_vector(&mut rng, 8)).collect();
        let set = BoundedSet::new(vectors.clone());
        let x_star = adjoint(&x);
        let mut evaluations = Vec::new();
        for v in &vectors {
            evaluations.push(seq_norm(&triple_loop_apply(&x, v), 2));
            evaluations.push(seq_norm(&triple_loop_apply(&x_star, v), 2));
        }
        assert_eq!(evaluations.len(), 10);
        let brute = evaluations.into_iter().fold(0.0, f64::max);
        let p = seminorm_p(&x, 2, &set).unwrap();
        assert!((p - brute).abs() <= 1e-12 * brute);
    }

    fn triple_loop_apply(x: &TruncMatrix<C64>, v: &SeqVector<C64>) -> SeqVector<C64> {
        let t = x.dim();
        let dense: Vec<C64> = (1..=t)
            .map(|i| (1..=t).map(|j| x.get(i, j) * v.get(j)).sum())
            .collect();
        SeqVector::from_dense(&dense)
    }

    #[test]
    fn polar_maximizer_is_feasible_and_dominates() {
        let mut rng = seeded_rng(12);
        for n in 0..4u32 {
            let zeta = random_vector(&mut rng, 9);
            let xi = polar_maximizer(&zeta, n);
            assert!((seq_norm(&xi, -(n as i32)) - 1.0).abs() < 1e-12);
            let best = pairing(&zeta, &xi).norm();
            assert!((best - seq_norm(&zeta, n as i32)).abs() <= 1e-12 * best);
            // random feasible points never beat it
            for _ in 0..50 {
                let r = random_vector(&mut rng, 9);
                let r = r.scale(&C64::new(1.0 / seq_norm(&r, -(n as i32)), 0.0));
                assert!(pairing(&zeta, &r).norm() <= best * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn p_equals_q_on_random_triples() {
        let mut rng = seeded_rng(13);
        for _ in 0..40 {
            let x = random_matrix(&mut rng, 10);
            let set = BoundedSet::new((0..3).map(|_| random_vector(&mut rng, 10)).collect());
            let n = rand::Rng::gen_range(&mut rng, 0..5u32);
            let p = seminorm_p(&x, n, &set).unwrap();
            let q = seminorm_q(&x, n, &set).unwrap();
            assert!((p - q).abs() <= 1e-10 * (1.0 + p));
        }
    }

    #[test]
    fn unit_decomposition_reconstructs() {
        let mut rng = seeded_rng(14);
        let x = random_matrix(&mut rng, 6);
        let mut sum = TruncMatrix::<C64>::zeros(6);
        for ((i, j), v) in x.indexed() {
            let e = rank_one(&SeqVector::unit(i), &SeqVector::unit(j), 6).unwrap();
            sum = sum.add(&e.scale(v)).unwrap();
        }
        assert_eq!(sum, x);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(dim: usize) -> impl Strategy<Value = TruncMatrix<C64>> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
                TruncMatrix::from_row_major(dim, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap()
            })
        }

        fn set(dim: usize) -> impl Strategy<Value = BoundedSet<C64>> {
            proptest::collection::vec(
                proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim),
                1..4,
            )
            .prop_map(|vs| {
                BoundedSet::new(
                    vs.into_iter()
                        .map(|v| SeqVector::from_dense(&v.into_iter().map(|(a, b)| C64::new(a, b)).collect::<Vec<_>>()))
                        .collect(),
                )
            })
        }

        proptest! {
            #[test]
            fn double_adjoint(x in matrix(5)) {
                prop_assert_eq!(adjoint(&adjoint(&x)), x);
            }

            #[test]
            fn adjoint_reverses_products(x in matrix(4), y in matrix(4)) {
                let lhs = adjoint(&mat_mul(&x, &y).unwrap());
                let rhs = mat_mul(&adjoint(&y), &adjoint(&x)).unwrap();
                prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
            }

            #[test]
            fn seminorms_are_seminorms(x in matrix(5), y in matrix(5), b in set(5), n in 0u32..4, lambda in -3.0f64..3.0) {
                for f in [seminorm_p::<C64> as fn(&TruncMatrix<C64>, u32, &BoundedSet<C64>) -> Result<f64, MatrixError>, seminorm_q] {
                    let sx = f(&x, n, &b).unwrap();
                    let sy = f(&y, n, &b).unwrap();
                    let sum = f(&x.add(&y).unwrap(), n, &b).unwrap();
                    prop_assert!(sum <= (sx + sy) * (1.0 + 1e-12) + 1e-12);
                    let scaled = f(&x.scale(&C64::new(lambda, 0.0)), n, &b).unwrap();
                    prop_assert!((scaled - lambda.abs() * sx).abs() <= 1e-10 * (1.0 + sx));
                }
            }

            #[test]
            fn p_equals_q(x in matrix(6), b in set(6), n in 0u32..5) {
                let p = seminorm_p(&x, n, &b).unwrap();
                let q = seminorm_q(&x, n, &b).unwrap();
                prop_assert!((p - q).abs() <= 1e-10 * (1.0 + p));
            }
        }
    }
}
