//! The diagonal subalgebra: projection, embedding and inversion.

use num::rational::Ratio;
use num::traits::{One, Signed, Zero};
use serde::Serialize;

use crate::matrices::{matrix_norm_p, MatrixError, NormP, TruncMatrix};
use crate::membership::envelope::{q, q_to_f64};
use crate::membership::{
    AffineWitness, BoundNorm, Certificate, EnvelopeMatrix, EnvelopeTerm, Growth, Ray, Refutation,
    Region, Space, DEFAULT_CERT_CAP, Q,
};
use crate::scalar::{Scalar, C64};
use crate::sequences::SeqVector;
use crate::weights::{ratio_to_f64, WeightFamily, WeightKind};

use super::MultiplierError;

/// A diagonal matrix, given by finitely many entries or by one diagonal
/// envelope term `c j^e rho^j` read as the exact entry size.
#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum DiagonalElement<S: Scalar = C64> {
    Finite { dim: usize, entries: SeqVector<S> },
    Envelope(EnvelopeTerm),
}

impl<S: Scalar> DiagonalElement<S> {
    pub fn finite(dim: usize, entries: SeqVector<S>) -> Result<Self, MultiplierError> {
        entries.check_support(dim).map_err(MatrixError::from)?;
        Ok(DiagonalElement::Finite { dim, entries })
    }

    /// Requires exactly one `band(0)` term and no patch.
    pub fn from_envelope(x: &EnvelopeMatrix) -> Result<Self, MultiplierError> {
        match x.terms.as_slice() {
            [t] if t.region == Region::Band(0) && x.patch.is_empty() => {
                Ok(DiagonalElement::Envelope(t.clone()))
            }
            _ => Err(MultiplierError::NotDiagonal),
        }
    }

    pub fn to_matrix(&self) -> Option<TruncMatrix<S>> {
        match self {
            DiagonalElement::Finite { dim, entries } => Some(diag_matrix(entries, *dim)),
            DiagonalElement::Envelope(_) => None,
        }
    }
}

fn diag_matrix<S: Scalar>(xi: &SeqVector<S>, dim: usize) -> TruncMatrix<S> {
    TruncMatrix::from_fn(dim, |i, j| if i == j { xi.get(i) } else { S::zero() })
}

/// `pi x = sum_j e_jj x e_jj`.
pub fn project<S: Scalar>(x: &TruncMatrix<S>) -> TruncMatrix<S> {
    TruncMatrix::from_fn(x.dim(), |i, j| if i == j { x.get(i, j).clone() } else { S::zero() })
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelNorms {
    pub outer: u32,
    pub inner: u32,
    pub before: f64,
    pub after: f64,
}

#[derive(Clone, Debug)]
pub struct Projection<S: Scalar = C64> {
    pub diagonal: DiagonalElement<S>,
    pub idempotent: bool,
    /// `||x||` and `||pi x||` in the `l1` norm for each level pair.
    pub norms: Vec<LevelNorms>,
}

impl<S: Scalar> Projection<S> {
    /// `||pi x|| <= ||x|| (1 + rel_tol)` at every level pair.
    pub fn contracts(&self, rel_tol: f64) -> bool {
        self.norms.iter().all(|n| n.after <= n.before * (1.0 + rel_tol))
    }
}

/// Projects and reports the `l1` norms at `(N, n) in {0..=level_max}^2`.
pub fn diag_project<S: Scalar>(
    x: &TruncMatrix<S>,
    family: &WeightFamily,
    level_max: u32,
) -> Result<Projection<S>, MultiplierError> {
    let px = project(x);
    let idempotent = project(&px) == px;
    let mut norms = Vec::new();
    for outer in 0..=level_max {
        for inner in family.kind.min_inner_level()..=level_max {
            norms.push(LevelNorms {
                outer,
                inner,
                before: matrix_norm_p(x, family, outer, inner, NormP::One)?,
                after: matrix_norm_p(&px, family, outer, inner, NormP::One)?,
            });
        }
    }
    Ok(Projection {
        diagonal: DiagonalElement::Finite {
            dim: x.dim(),
            entries: x.diagonal(),
        },
        idempotent,
        norms,
    })
}

#[derive(Clone, Debug)]
pub struct Embedding<S: Scalar = C64> {
    pub matrix: TruncMatrix<S>,
    /// `sum_j |xi_j| j^(N - n)` with the power taken exactly.
    pub closed_form: f64,
    /// `||phi xi||_{N,n,1}` from the weight family `A`.
    pub norm: f64,
}

/// `j^(N - n)` as an exact ratio.
fn diag_power(j: usize, outer: u32, inner: u32) -> f64 {
    let j = j as u128;
    let r = if outer >= inner {
        Ratio::from_integer(j.pow(outer - inner))
    } else {
        Ratio::new(1, j.pow(inner - outer))
    };
    ratio_to_f64(&r)
}

/// `phi xi = sum_j xi_j e_jj` with its norm at `(N, n)`.
pub fn diag_embed<S: Scalar>(
    xi: &SeqVector<S>,
    dim: usize,
    outer: u32,
    inner: u32,
) -> Result<Embedding<S>, MultiplierError> {
    xi.check_support(dim).map_err(MatrixError::from)?;
    let matrix = diag_matrix(xi, dim);
    let closed_form = (1..=dim)
        .map(|j| xi.get(j).modulus() * diag_power(j, outer, inner))
        .sum();
    let norm = matrix_norm_p(&matrix, &WeightFamily::new(WeightKind::A), outer, inner, NormP::One)?;
    Ok(Embedding {
        matrix,
        closed_form,
        norm,
    })
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Inversion<S: Scalar = C64> {
    Invertible {
        inverse: DiagonalElement<S>,
        /// Membership of the inverse in the diagonal algebra, for envelopes.
        certificate: Option<Certificate>,
    },
    /// Some diagonal entry vanishes.
    NotInvertible { index: usize },
    /// Invertible entrywise but the inverse leaves the algebra.
    NotInvertibleInAlgebra { refutation: Refutation },
}

/// `sum_j j^-s <= 1 + 1/(s - 1)`.
fn zeta_bound(s: &Q) -> f64 {
    q_to_f64(&(Q::one() + (s - Q::one()).recip()))
}

pub fn diag_invert<S: Scalar>(x: &DiagonalElement<S>) -> Inversion<S> {
    match x {
        DiagonalElement::Finite { dim, entries } => {
            let mut inv = SeqVector::zero();
            for j in 1..=*dim {
                match entries.get(j).recip() {
                    Some(r) => inv.set(j, r).expect("nonzero index"),
                    None => return Inversion::NotInvertible { index: j },
                }
            }
            Inversion::Invertible {
                inverse: DiagonalElement::Finite {
                    dim: *dim,
                    entries: inv,
                },
                certificate: None,
            }
        }
        DiagonalElement::Envelope(t) => invert_envelope(t),
    }
}

fn invert_envelope<S: Scalar>(t: &EnvelopeTerm) -> Inversion<S> {
    if t.decays() {
        return Inversion::NotInvertibleInAlgebra {
            refutation: Refutation {
                space: Space::MS,
                level: 0,
                ray: Ray::Diagonal,
                growth: Growth::Exponential { base: t.rho.recip() },
            },
        };
    }
    // inverse c^-1 j^-e; sum_j j^(N - n - e) converges iff n >= N + floor(1 - e) + 1
    let e = &t.gamma + &t.delta;
    let need = (Q::one() - &e).floor() + Q::one();
    let offset = if need.is_positive() {
        u32::try_from(need.to_integer()).expect("offset exceeds u32")
    } else {
        0
    };
    let s = q(offset as i64) + &e;
    let bound = q_to_f64(&t.c.recip()) * zeta_bound(&s) * (1.0 + 1e-12);
    let inverse = EnvelopeTerm {
        c: t.c.recip(),
        gamma: -e,
        delta: Q::zero(),
        rho: Q::one(),
        region: Region::Band(0),
    };
    Inversion::Invertible {
        inverse: DiagonalElement::Envelope(inverse),
        certificate: Some(Certificate {
            space: Space::MS,
            witness: AffineWitness { slope: 1, offset },
            norm: BoundNorm::L1,
            bounds: vec![bound; DEFAULT_CERT_CAP as usize + 1],
        }),
    }
}

/// Least-squares slope of `ln(|1/x_tt| A(t,t;N,n))` against `ln t` on the
/// grid, for an envelope diagonal; the check that a refutation's
/// exponential growth beats the polynomial weights.
pub fn reciprocal_growth_slope(t: &EnvelopeTerm, outer: u32, inner: u32, grid: &[usize]) -> f64 {
    let term = crate::membership::envelope::FloatTerm::from(t);
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .map(|&k| {
            let lk = (k as f64).ln();
            let ln_entry = term.ln_value(lk, k);
            (lk, -ln_entry + (outer as f64 - inner as f64) * lk)
        })
        .unzip();
    crate::membership::oracle::ls_slope(&xs, &ys)
}
