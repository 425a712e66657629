//! Finitely supported sequences with the gradings of `s` and `s'`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Scalar, C64};
use crate::weights::{WeightFamily, WeightKind};

/// `pi / sqrt(6) = (sum_j j^-2)^(1/2)`.
pub const BASEL_ROOT: f64 = 1.282_549_830_161_864;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("sequence indices start at 1")]
    ZeroIndex,
    #[error("index {index} lies outside the truncation 1..={dim}")]
    SupportExceeds { index: usize, dim: usize },
}

/// Which space the vector is meant to live in. Informational only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ambient {
    #[default]
    #[serde(rename = "s")]
    S,
    #[serde(rename = "s_prime")]
    SPrime,
}

/// A finitely supported sequence `(xi_j)_{j >= 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeqVector<S = C64> {
    entries: BTreeMap<usize, S>,
    pub ambient: Ambient,
}

impl<S: Scalar> Default for SeqVector<S> {
    fn default() -> Self {
        SeqVector {
            entries: BTreeMap::new(),
            ambient: Ambient::S,
        }
    }
}

impl<S: Scalar> SeqVector<S> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The canonical unit vector `e_k`.
    pub fn unit(k: usize) -> Self {
        assert!(k >= 1, "sequence indices start at 1");
        let mut v = Self::zero();
        v.entries.insert(k, S::one());
        v
    }

    pub fn from_entries<I: IntoIterator<Item = (usize, S)>>(entries: I) -> Result<Self, SeqError> {
        let mut v = Self::zero();
        for (j, value) in entries {
            v.set(j, value)?;
        }
        Ok(v)
    }

    /// `dense[0]` becomes the entry at index 1.
    pub fn from_dense(dense: &[S]) -> Self {
        let mut v = Self::zero();
        for (k, value) in dense.iter().enumerate() {
            if !value.is_zero() {
                v.entries.insert(k + 1, value.clone());
            }
        }
        v
    }

    pub fn with_ambient(mut self, ambient: Ambient) -> Self {
        self.ambient = ambient;
        self
    }

    pub fn set(&mut self, j: usize, value: S) -> Result<(), SeqError> {
        if j == 0 {
            return Err(SeqError::ZeroIndex);
        }
        if value.is_zero() {
            self.entries.remove(&j);
        } else {
            self.entries.insert(j, value);
        }
        Ok(())
    }

    pub fn get(&self, j: usize) -> S {
        self.entries.get(&j).cloned().unwrap_or_else(S::zero)
    }

    /// Nonzero entries in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &S)> {
        self.entries.iter().map(|(j, v)| (*j, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| v.is_zero())
    }

    /// Largest index carrying a nonzero entry, 0 for the zero vector.
    pub fn support_max(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn check_support(&self, dim: usize) -> Result<(), SeqError> {
        match self.support_max() {
            index if index > dim => Err(SeqError::SupportExceeds { index, dim }),
            _ => Ok(()),
        }
    }

    pub fn to_dense(&self, dim: usize) -> Result<Vec<S>, SeqError> {
        self.check_support(dim)?;
        let mut out = vec![S::zero(); dim];
        for (j, v) in self.iter() {
            out[j - 1] = v.clone();
        }
        Ok(out)
    }

    pub fn scale(&self, lambda: &S) -> Self {
        Self::from_entries_unchecked(self.iter().map(|(j, v)| (j, lambda.clone() * v.clone())), self.ambient)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, v) in other.iter() {
            let sum = out.get(j) + v.clone();
            out.set(j, sum).expect("index is positive");
        }
        out
    }

    /// Entrywise product, the multiplication of `s'` as an algebra.
    pub fn hadamard(&self, other: &Self) -> Self {
        Self::from_entries_unchecked(
            self.iter().map(|(j, v)| (j, v.clone() * other.get(j))),
            self.ambient,
        )
    }

    pub fn conj(&self) -> Self {
        Self::from_entries_unchecked(self.iter().map(|(j, v)| (j, v.conj())), self.ambient)
    }

    pub fn map<T: Scalar, F: Fn(&S) -> T>(&self, f: F) -> SeqVector<T> {
        SeqVector::<T>::from_entries_unchecked(self.iter().map(|(j, v)| (j, f(v))), self.ambient)
    }

    fn from_entries_unchecked<I: IntoIterator<Item = (usize, S)>>(entries: I, ambient: Ambient) -> Self {
        let entries = entries.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        SeqVector { entries, ambient }
    }
}

/// Weight `j^n` for `n >= 0`, `j^n` through the `s'` family for `n < 0`.
fn grading_weight(j: usize, n: i32) -> f64 {
    let (kind, level) = if n >= 0 {
        (WeightKind::SeqS, n as u32)
    } else {
        (WeightKind::SeqSPrime, n.unsigned_abs())
    };
    WeightFamily::new(kind)
        .with_level_cap(u32::MAX)
        .eval_f64(j, 1, 0, level)
        .expect("positive index and uncapped level")
}

/// `|xi|_n = (sum_j |xi_j|^2 j^(2n))^(1/2)` for any integer `n`.
pub fn seq_norm<S: Scalar>(xi: &SeqVector<S>, n: i32) -> f64 {
    xi.iter()
        .map(|(j, v)| {
            let t = v.modulus() * grading_weight(j, n);
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

/// `<eta, xi> = sum_j eta_j conj(xi_j)`, conjugate-linear in the second slot.
pub fn pairing<S: Scalar>(eta: &SeqVector<S>, xi: &SeqVector<S>) -> S {
    let mut acc = S::zero();
    for (j, v) in eta.iter() {
        if let Some(w) = xi.entries.get(&j) {
            acc = acc + v.clone() * w.conj();
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SandwichTriple {
    /// `|xi|_{-m}`
    pub lhs: f64,
    /// `sum_j |xi_j| j^-m`
    pub mid: f64,
    /// `(pi / sqrt 6) |xi|_{-m+1}`
    pub rhs: f64,
    pub ordered: bool,
}

/// Relative slack allowed when comparing the three sides.
pub const SANDWICH_TOL: f64 = 1e-12;

/// `|xi|_{-m} <= sum_j |xi_j| j^-m <= (pi/sqrt 6) |xi|_{-m+1}`.
pub fn diag_sandwich_check<S: Scalar>(xi: &SeqVector<S>, m: u32) -> SandwichTriple {
    let m = m as i32;
    let lhs = seq_norm(xi, -m);
    let mid: f64 = xi.iter().map(|(j, v)| v.modulus() * grading_weight(j, -m)).sum();
    let rhs = BASEL_ROOT * seq_norm(xi, 1 - m);
    let ordered = lhs <= mid * (1.0 + SANDWICH_TOL) && mid <= rhs * (1.0 + SANDWICH_TOL);
    SandwichTriple {
        lhs,
        mid,
        rhs,
        ordered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_vector, seeded_rng};
    use num::traits::{One, Zero};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn basel_root_constant() {
        let expected = std::f64::consts::PI / 6f64.sqrt();
        assert!((BASEL_ROOT - expected).abs() < 1e-15);
    }

    #[test]
    fn unit_vector_norms() {
        let e1 = SeqVector::<C64>::unit(1);
        for n in -5..=5 {
            assert_eq!(seq_norm(&e1, n), 1.0);
        }
        for k in 1..=9usize {
            let ek = SeqVector::<C64>::unit(k);
            for n in -3..=3 {
                let expected = (k as f64).powi(n);
                assert!((seq_norm(&ek, n) - expected).abs() <= 1e-15 * expected);
            }
        }
        assert_eq!(seq_norm(&SeqVector::<C64>::zero(), 3), 0.0);
    }

    #[test]
    fn geometric_vector_norm() {
        let xi = SeqVector::from_dense(&(1..=64).map(|j| c(0.5f64.powi(j))).collect::<Vec<_>>());
        // oracle: partial geometric series, summed directly
        let direct: f64 = (1..=64).map(|j| 0.25f64.powi(j)).sum::<f64>().sqrt();
        assert!((seq_norm(&xi, 0) - direct).abs() < 1e-15);
        assert!((seq_norm(&xi, 0) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pairing_examples() {
        let e3 = SeqVector::<C64>::unit(3);
        let e4 = SeqVector::<C64>::unit(4);
        assert_eq!(pairing(&e3, &e3), C64::one());
        assert_eq!(pairing(&e3, &e4), C64::zero());
        let ones = SeqVector::from_dense(&[C64::one(); 10]);
        assert_eq!(pairing(&ones, &e3), C64::one());
        // conjugate-linear in the second slot
        let z = C64::new(0.0, 1.0);
        assert_eq!(pairing(&e3, &e3.scale(&z)), C64::new(0.0, -1.0));
        assert_eq!(pairing(&e3.scale(&z), &e3), z);
    }

    #[test]
    fn pairing_cauchy_schwarz_across_grading() {
        let mut rng = seeded_rng(7);
        for _ in 0..50 {
            let eta = random_vector(&mut rng, 20);
            let xi = random_vector(&mut rng, 20);
            let p = pairing(&eta, &xi).norm();
            for n in 0..=8 {
                let bound = seq_norm(&eta, n) * seq_norm(&xi, -n);
                assert!(p <= bound * (1.0 + 1e-12), "n={n}");
            }
        }
    }

    #[test]
    fn sandwich_examples() {
        for k in [1usize, 2, 7] {
            let t = diag_sandwich_check(&SeqVector::<C64>::unit(k), 2);
            let kk = k as f64;
            assert!((t.lhs - kk.powi(-2)).abs() < 1e-15);
            assert!((t.mid - kk.powi(-2)).abs() < 1e-15);
            assert!((t.rhs - BASEL_ROOT / kk).abs() < 1e-15);
            assert!(t.ordered);
        }
        let ones = SeqVector::from_dense(&vec![C64::one(); 100]);
        let t = diag_sandwich_check(&ones, 2);
        let direct: f64 = (1..=100).map(|j| 1.0 / (j as f64 * j as f64)).sum();
        assert!((t.mid - direct).abs() < 1e-13);
        assert!(t.ordered);
        let z = diag_sandwich_check(&SeqVector::<C64>::zero(), 3);
        assert_eq!((z.lhs, z.mid, z.rhs), (0.0, 0.0, 0.0));
        assert!(z.ordered);
    }

    #[test]
    fn support_and_indices() {
        let mut v = SeqVector::<C64>::zero();
        assert_eq!(v.set(0, C64::one()), Err(SeqError::ZeroIndex));
        v.set(5, C64::one()).unwrap();
        assert_eq!(v.support_max(), 5);
        assert!(v.to_dense(4).is_err());
        assert_eq!(v.to_dense(5).unwrap()[4], C64::one());
        v.set(5, C64::zero()).unwrap();
        assert!(v.is_zero());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vector() -> impl Strategy<Value = SeqVector<C64>> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..24)
                .prop_map(|v| SeqVector::from_dense(&v.into_iter().map(|(a, b)| C64::new(a, b)).collect::<Vec<_>>()))
        }

        proptest! {
            #[test]
            fn grading_is_monotone(xi in vector(), n in -6i32..6) {
                prop_assert!(seq_norm(&xi, n) <= seq_norm(&xi, n + 1) * (1.0 + 1e-14));
            }

            #[test]
            fn sandwich_orders(xi in vector(), m in 1u32..=8) {
                prop_assert!(diag_sandwich_check(&xi, m).ordered);
            }

            #[test]
            fn cauchy_schwarz(eta in vector(), xi in vector(), n in 0i32..=8) {
                let p = pairing(&eta, &xi).norm();
                prop_assert!(p <= seq_norm(&eta, n) * seq_norm(&xi, -n) * (1.0 + 1e-12));
            }
        }
    }
}
