//! The merge projection onto equal pairs and the matrix-unit probe.

use num::rational::Ratio;
use serde::Serialize;

use crate::matrices::TruncMatrix;
use crate::scalar::{Scalar, C64};
use crate::sequences::SeqVector;
use crate::weights::{Weight, WeightFamily, WeightKind};

use super::MultiplierError;

fn check_dims<S: Scalar>(x: &TruncMatrix<S>, y: &TruncMatrix<S>) -> Result<(), MultiplierError> {
    if x.dim() != y.dim() {
        return Err(MultiplierError::DimMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(())
}

/// `x` on and above the diagonal, `y` strictly below.
pub fn merge_upper_lower<S: Scalar>(x: &TruncMatrix<S>, y: &TruncMatrix<S>) -> Result<TruncMatrix<S>, MultiplierError> {
    check_dims(x, y)?;
    Ok(TruncMatrix::from_fn(x.dim(), |i, j| {
        if i <= j {
            x.get(i, j).clone()
        } else {
            y.get(i, j).clone()
        }
    }))
}

/// `P(x, y) = (M(x, y), M(x, y))`.
pub fn merge_projection<S: Scalar>(
    x: &TruncMatrix<S>,
    y: &TruncMatrix<S>,
) -> Result<(TruncMatrix<S>, TruncMatrix<S>), MultiplierError> {
    let m = merge_upper_lower(x, y)?;
    Ok((m.clone(), m))
}

#[derive(Clone, Debug, Serialize)]
pub struct QProbe {
    pub k: usize,
    pub outer: u32,
    pub inner: u32,
    /// `||e_kk||_{N,n,inf}` as an exact ratio `(numer, denom)`.
    pub norm_exact: (u128, u128),
    pub norm: f64,
    /// The norm equals `1/k`.
    pub matches_reciprocal: bool,
    /// `(I - e_kk) e_k = 0`, so `I - e_kk` has no inverse.
    pub annihilates_e_k: bool,
}

/// `||e_kk||_{N,n,inf} = a_{kk;N,n}`: the single nonzero entry carries the norm.
pub fn unit_sup_norm(k: usize, outer: u32, inner: u32) -> Result<Ratio<u128>, MultiplierError> {
    let w = WeightFamily::new(WeightKind::A)
        .with_level_cap(u32::MAX)
        .eval(k, k, outer, inner)?;
    match w {
        Weight::Exact(r) => Ok(r),
        Weight::Float(_) => unreachable!("A weights are exact"),
    }
}

/// `(I - e_kk) xi = xi - xi_k e_k`.
pub fn identity_minus_unit_apply<S: Scalar>(k: usize, xi: &SeqVector<S>) -> SeqVector<S> {
    let mut out = xi.clone();
    out.set(k, S::zero()).expect("k >= 1");
    out
}

/// Illustrates that `I - e_kk -> I` in every seminorm `(N, N + 1)` while no
/// `I - e_kk` is invertible: the invertible group is not open.
pub fn q_algebra_probe(k: usize, outer: u32) -> Result<QProbe, MultiplierError> {
    if k == 0 {
        return Err(MultiplierError::ZeroIndex);
    }
    let inner = outer + 1;
    let exact = unit_sup_norm(k, outer, inner)?;
    let ek = SeqVector::<C64>::unit(k);
    Ok(QProbe {
        k,
        outer,
        inner,
        norm_exact: (*exact.numer(), *exact.denom()),
        norm: crate::weights::ratio_to_f64(&exact),
        matches_reciprocal: exact == Ratio::new(1, k as u128),
        annihilates_e_k: identity_minus_unit_apply(k, &ek).is_zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{matrix_norm_p, NormP};
    use crate::random::{random_matrix, seeded_rng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn merge_examples() {
        let ones = TruncMatrix::from_fn(4, |_, _| c(1.0));
        let twos = TruncMatrix::from_fn(4, |_, _| c(2.0));
        let m = merge_upper_lower(&ones, &twos).unwrap();
        for ((i, j), v) in m.indexed() {
            assert_eq!(*v, if i <= j { c(1.0) } else { c(2.0) });
        }
        let (a, b) = merge_projection(&ones, &ones).unwrap();
        assert_eq!((a, b), (ones.clone(), ones));
    }

    #[test]
    fn merge_projection_is_idempotent() {
        let mut rng = seeded_rng(13);
        for _ in 0..5 {
            let x = random_matrix(&mut rng, 7);
            let y = random_matrix(&mut rng, 7);
            let p = merge_projection(&x, &y).unwrap();
            assert_eq!(merge_projection(&p.0, &p.1).unwrap(), p);
            assert_eq!(p.0, p.1);
        }
        assert!(merge_upper_lower(&random_matrix(&mut rng, 2), &random_matrix(&mut rng, 3)).is_err());
    }

    #[test]
    fn probe_values() {
        let p = q_algebra_probe(10, 0).unwrap();
        assert_eq!(p.norm_exact, (1, 10));
        assert!(p.matches_reciprocal && p.annihilates_e_k);
        assert_eq!(q_algebra_probe(1, 3).unwrap().norm, 1.0);
        assert!(q_algebra_probe(0, 0).is_err());
    }

    #[test]
    fn sparse_norm_matches_dense() {
        for k in 1..=12 {
            for outer in 0..=3 {
                for inner in 0..=4 {
                    let x = TruncMatrix::<C64>::unit(k, k, k);
                    let dense = matrix_norm_p(&x, &WeightFamily::new(WeightKind::A), outer, inner, NormP::Inf).unwrap();
                    let exact = unit_sup_norm(k, outer, inner).unwrap();
                    assert_eq!(dense, crate::weights::ratio_to_f64(&exact));
                    // k^(N - n)
                    let kk = k as u128;
                    let expected = if outer >= inner {
                        Ratio::from_integer(kk.pow(outer - inner))
                    } else {
                        Ratio::new(1, kk.pow(inner - outer))
                    };
                    assert_eq!(exact, expected);
                }
            }
        }
    }

    #[test]
    fn dense_annihilation() {
        let t = 9;
        for k in 1..=t {
            let m = TruncMatrix::<C64>::identity(t)
                .sub(&TruncMatrix::unit(t, k, k))
                .unwrap();
            assert!(m.apply(&SeqVector::unit(k)).unwrap().is_zero());
        }
    }
}
