//! Double centralizers `(L, R)` with `x L(y) = R(x) y` at truncation scale.

use std::fmt;
use std::sync::Arc;

use crate::matrices::{rank_one, MatrixError, TruncMatrix};
use crate::scalar::{Scalar, C64};
use crate::sequences::{seq_norm, SeqVector};

use super::MultiplierError;

/// Tolerance on `|e|_0 - 1` for reconstruction vectors.
pub const UNIT_TOL: f64 = 1e-10;

pub type MatrixMap<S> = Arc<dyn Fn(&TruncMatrix<S>) -> TruncMatrix<S> + Send + Sync>;

/// A pair of maps on `T x T` matrices, optionally tagged with the matrix it
/// was built from.
#[derive(Clone)]
pub struct CentralizerPair<S: Scalar = C64> {
    left: MatrixMap<S>,
    right: MatrixMap<S>,
    dim: usize,
    tag: Option<TruncMatrix<S>>,
}

impl<S: Scalar> fmt::Debug for CentralizerPair<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CentralizerPair")
            .field("dim", &self.dim)
            .field("tag", &self.tag)
            .finish_non_exhaustive()
    }
}

impl<S: Scalar + 'static> CentralizerPair<S> {
    pub fn new(dim: usize, left: MatrixMap<S>, right: MatrixMap<S>) -> Self {
        CentralizerPair {
            left,
            right,
            dim,
            tag: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tag(&self) -> Option<&TruncMatrix<S>> {
        self.tag.as_ref()
    }

    fn check(&self, y: &TruncMatrix<S>) -> Result<(), MultiplierError> {
        if y.dim() != self.dim {
            return Err(MultiplierError::DimMismatch {
                left: self.dim,
                right: y.dim(),
            });
        }
        Ok(())
    }

    pub fn left(&self, y: &TruncMatrix<S>) -> Result<TruncMatrix<S>, MultiplierError> {
        self.check(y)?;
        Ok((self.left)(y))
    }

    pub fn right(&self, y: &TruncMatrix<S>) -> Result<TruncMatrix<S>, MultiplierError> {
        self.check(y)?;
        Ok((self.right)(y))
    }
}

fn mul_unchecked<S: Scalar>(a: &TruncMatrix<S>, b: &TruncMatrix<S>) -> TruncMatrix<S> {
    a.mul(b).expect("dimensions checked by the pair")
}

/// `rho(u) = (y -> u y, y -> y u)`.
pub fn make_centralizer<S: Scalar + 'static>(u: &TruncMatrix<S>) -> CentralizerPair<S> {
    let (ul, ur) = (u.clone(), u.clone());
    CentralizerPair {
        left: Arc::new(move |y| mul_unchecked(&ul, y)),
        right: Arc::new(move |y| mul_unchecked(y, &ur)),
        dim: u.dim(),
        tag: Some(u.clone()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CentralizerOp<S = C64> {
    Add,
    Scale(S),
    Mul,
    Star,
}

/// Pair algebra: `(L1 + L2, R1 + R2)`, `(a L, a R)`, `(L1 L2, R2 R1)` and
/// `(R*, L*)` with `T*(x) = T(x*)*`. Unary operations ignore `p2`.
pub fn centralizer_ops<S: Scalar + 'static>(
    p1: &CentralizerPair<S>,
    p2: &CentralizerPair<S>,
    op: CentralizerOp<S>,
) -> Result<CentralizerPair<S>, MultiplierError> {
    let binary = matches!(op, CentralizerOp::Add | CentralizerOp::Mul);
    if binary && p1.dim != p2.dim {
        return Err(MultiplierError::DimMismatch {
            left: p1.dim,
            right: p2.dim,
        });
    }
    let (l1, r1) = (p1.left.clone(), p1.right.clone());
    let (l2, r2) = (p2.left.clone(), p2.right.clone());
    let dim = p1.dim;
    let pair = match op {
        CentralizerOp::Add => CentralizerPair {
            left: Arc::new(move |y| l1(y).add(&l2(y)).expect("equal dims")),
            right: Arc::new(move |y| r1(y).add(&r2(y)).expect("equal dims")),
            dim,
            tag: match (&p1.tag, &p2.tag) {
                (Some(a), Some(b)) => Some(a.add(b)?),
                _ => None,
            },
        },
        CentralizerOp::Scale(a) => {
            let (al, ar) = (a.clone(), a.clone());
            CentralizerPair {
                left: Arc::new(move |y| l1(y).scale(&al)),
                right: Arc::new(move |y| r1(y).scale(&ar)),
                dim,
                tag: p1.tag.as_ref().map(|t| t.scale(&a)),
            }
        }
        CentralizerOp::Mul => CentralizerPair {
            left: Arc::new(move |y| l1(&l2(y))),
            right: Arc::new(move |y| r2(&r1(y))),
            dim,
            tag: match (&p1.tag, &p2.tag) {
                (Some(a), Some(b)) => Some(a.mul(b)?),
                _ => None,
            },
        },
        CentralizerOp::Star => CentralizerPair {
            left: Arc::new(move |y| r1(&y.adjoint()).adjoint()),
            right: Arc::new(move |y| l1(&y.adjoint()).adjoint()),
            dim,
            tag: p1.tag.as_ref().map(TruncMatrix::adjoint),
        },
    };
    Ok(pair)
}

/// Matrix units `e_ij`, the basis on which pairs are compared.
pub fn unit_basis<S: Scalar>(dim: usize) -> Vec<TruncMatrix<S>> {
    let mut out = Vec::with_capacity(dim * dim);
    for i in 1..=dim {
        for j in 1..=dim {
            out.push(TruncMatrix::unit(dim, i, j));
        }
    }
    out
}

/// `max |L1(y) - L2(y)|, |R1(y) - R2(y)|` over the probes.
pub fn pair_residual(
    p: &CentralizerPair<C64>,
    q: &CentralizerPair<C64>,
    probes: &[TruncMatrix<C64>],
) -> Result<f64, MultiplierError> {
    let mut worst = 0.0f64;
    for y in probes {
        worst = worst.max(p.left(y)?.max_abs_diff(&q.left(y)?)?);
        worst = worst.max(p.right(y)?.max_abs_diff(&q.right(y)?)?);
    }
    Ok(worst)
}

/// Exact pair equality on the probes.
pub fn pairs_agree<S: Scalar + 'static>(
    p: &CentralizerPair<S>,
    q: &CentralizerPair<S>,
    probes: &[TruncMatrix<S>],
) -> Result<bool, MultiplierError> {
    for y in probes {
        if p.left(y)? != q.left(y)? || p.right(y)? != q.right(y)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `max_{x, y} max |x L(y) - R(x) y|` over all probe pairs.
pub fn law_residual(
    p: &CentralizerPair<C64>,
    xs: &[TruncMatrix<C64>],
    ys: &[TruncMatrix<C64>],
) -> Result<f64, MultiplierError> {
    let mut worst = 0.0f64;
    for (x, y) in xs.iter().zip(ys) {
        let lhs = x.mul(&p.left(y)?)?;
        let rhs = p.right(x)?.mul(y)?;
        worst = worst.max(lhs.max_abs_diff(&rhs)?);
    }
    Ok(worst)
}

fn check_unit<S: Scalar>(e: &SeqVector<S>, dim: usize) -> Result<(), MultiplierError> {
    e.check_support(dim).map_err(MatrixError::from)?;
    let norm = seq_norm(e, 0);
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(MultiplierError::NotUnit { norm });
    }
    Ok(())
}

/// `u xi = L(xi (x) e)(e)` column by column.
pub fn reconstruct<S: Scalar + 'static>(
    p: &CentralizerPair<S>,
    e: &SeqVector<S>,
) -> Result<TruncMatrix<S>, MultiplierError> {
    let dim = p.dim;
    check_unit(e, dim)?;
    let mut columns = Vec::with_capacity(dim);
    for k in 1..=dim {
        let xi = SeqVector::unit(k);
        let image = p.left(&rank_one(&xi, e, dim)?)?.apply(e)?;
        columns.push(image.to_dense(dim).map_err(MatrixError::from)?);
    }
    Ok(TruncMatrix::from_fn(dim, |i, j| columns[j - 1][i - 1].clone()))
}

/// `u* eta = (R(e (x) eta))*(e)` column by column.
pub fn reconstruct_adjoint<S: Scalar + 'static>(
    p: &CentralizerPair<S>,
    e: &SeqVector<S>,
) -> Result<TruncMatrix<S>, MultiplierError> {
    let dim = p.dim;
    check_unit(e, dim)?;
    let mut columns = Vec::with_capacity(dim);
    for k in 1..=dim {
        let eta = SeqVector::unit(k);
        let image = p.right(&rank_one(e, &eta, dim)?)?.adjoint().apply(e)?;
        columns.push(image.to_dense(dim).map_err(MatrixError::from)?);
    }
    Ok(TruncMatrix::from_fn(dim, |i, j| columns[j - 1][i - 1].clone()))
}

/// A basis index `k` with `u (e_k (x) e_k) != 0`, or `None` exactly when
/// `u = 0`: rank-one projections separate points.
pub fn essential_ideal_witness<S: Scalar>(u: &TruncMatrix<S>) -> Result<Option<usize>, MultiplierError> {
    let dim = u.dim();
    for k in 1..=dim {
        let e = SeqVector::unit(k);
        if !u.mul(&rank_one(&e, &e, dim)?)?.is_zero() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
