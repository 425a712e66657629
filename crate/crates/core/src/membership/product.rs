//! Sound envelope for products: `sum_k X_ik Y_kj <= E_ij`.
//!
//! Term pairs are bounded case by case:
//! * band x band: `k` ranges over at most `2 min(w1, w2) + 1` indices and all
//!   of `i, j, k` lie within `W = w1 + w2` of each other, so each monomial
//!   moves by at most `(1 + W)^|exponent|`;
//! * band x cone: the band pins `k` near one outer index, giving one term per
//!   half-region;
//! * cone x cone: `m^g M^d <= (pq)^s` with `s = max((g + d)/2, d)` separates
//!   the indices and leaves the inner sum `sum_k k^(s1 + s2) r^k`, bounded by
//!   `1 + 1/(s - 1)` or by a polylogarithm in closed form.
//!
//! Patches are folded into one decaying term first.

#![allow(clippy::result_large_err)]

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};
use thiserror::Error;

use super::envelope::{format_q, q, EnvelopeMatrix, EnvelopeTerm, Region, Q};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error(
    "bound not derivable: sum over k of k^{} * ({})^k diverges for {left} times {right}",
    format_q(.inner_exponent),
    format_q(.inner_base)
)]
pub struct NotDerivable {
    pub left: EnvelopeTerm,
    pub right: EnvelopeTerm,
    pub inner_exponent: Q,
    pub inner_base: Q,
}

fn pow_q(base: &Q, e: i64) -> Q {
    let e = i32::try_from(e).expect("exponent out of range");
    base.pow(e)
}

fn abs_weight(t: &EnvelopeTerm) -> Q {
    t.gamma.abs() + t.delta.abs()
}

fn ceil_i64(x: &Q) -> i64 {
    i64::try_from(x.ceil().to_integer()).expect("exponent out of range")
}

/// Eulerian numbers `A(e, 0..e)`.
fn eulerian_row(e: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for n in 2..=e {
        let mut next = vec![BigInt::zero(); n];
        for m in 0..n {
            let left = if m >= 1 { &row[m - 1] * BigInt::from(n - m) } else { BigInt::zero() };
            let right = if m < row.len() { &row[m] * BigInt::from(m + 1) } else { BigInt::zero() };
            next[m] = left + right;
        }
        row = next;
    }
    row
}

/// `sum_{k>=1} k^e r^k` for an integer `e >= 1` and `0 < r < 1`.
pub fn polylog_neg(e: usize, r: &Q) -> Q {
    let poly = eulerian_row(e)
        .into_iter()
        .enumerate()
        .fold(Q::zero(), |acc, (m, a)| acc + Q::from_integer(a) * pow_q(r, m as i64));
    r * poly / pow_q(&(Q::one() - r), e as i64 + 1)
}

/// Rational upper bound on `sum_{k>=1} k^e r^k`, or `None` if it diverges.
pub fn inner_sum_bound(e: &Q, r: &Q) -> Option<Q> {
    let zeta_bound = if *e < q(-1) {
        let s = -e;
        Some(Q::one() + (s - Q::one()).recip())
    } else {
        None
    };
    if r.is_one() {
        return zeta_bound;
    }
    let geometric = if e.is_positive() {
        polylog_neg(ceil_i64(e) as usize, r)
    } else {
        r / (Q::one() - r)
    };
    Some(match zeta_bound {
        Some(z) if z < geometric => z,
        _ => geometric,
    })
}

/// Smallest dyadic `k / 2^20` with square at least `x`, for `0 < x <= 1`.
pub fn sqrt_upper(x: &Q) -> Q {
    if x.is_one() {
        return Q::one();
    }
    let scale: i64 = 1 << 20;
    let f = super::envelope::q_to_f64(x).sqrt();
    let mut k = (f * scale as f64).floor() as i64;
    let den = Q::from_integer(BigInt::from(scale));
    loop {
        let cand = Q::from_integer(BigInt::from(k)) / &den;
        if &(&cand * &cand) >= x {
            return if cand > Q::one() { Q::one() } else { cand };
        }
        k += 1;
    }
}

/// `max(patch) * 2^(max patch index) * 2^-M`, which dominates the patch.
fn patch_term(x: &EnvelopeMatrix) -> Option<EnvelopeTerm> {
    let pmax = x.patch.values().max()?.clone();
    if pmax.is_zero() {
        return None;
    }
    let reach = x.patch.keys().map(|&(i, j)| i.max(j)).max()?;
    let two = q(2);
    Some(EnvelopeTerm {
        c: pmax * pow_q(&two, reach as i64),
        gamma: Q::zero(),
        delta: Q::zero(),
        rho: two.recip(),
        region: Region::Full,
    })
}

fn all_terms(x: &EnvelopeMatrix) -> Vec<EnvelopeTerm> {
    let mut terms = x.terms.clone();
    terms.extend(patch_term(x));
    terms
}

fn term(c: Q, gamma: Q, delta: Q, rho: Q, region: Region) -> EnvelopeTerm {
    EnvelopeTerm {
        c,
        gamma,
        delta,
        rho,
        region,
    }
}

/// Region for a half-region term that is only needed near the diagonal.
fn narrowed(region: Region, restrict: bool, w: u64) -> Option<Region> {
    match (restrict, w) {
        (false, _) => Some(region),
        (true, 0) => None,
        (true, w) => Some(Region::Band(w)),
    }
}

fn band_band(a: &EnvelopeTerm, b: &EnvelopeTerm, w1: u64, w2: u64) -> Vec<EnvelopeTerm> {
    let w = w1 + w2;
    let count = q(2 * w1.min(w2) as i64 + 1);
    let spread = pow_q(&q(1 + w as i64), ceil_i64(&(abs_weight(a) + abs_weight(b))));
    let rho = &a.rho * &b.rho;
    let shift = pow_q(&rho, -(w as i64));
    vec![term(
        &a.c * &b.c * count * spread * shift,
        &a.gamma + &b.gamma,
        &a.delta + &b.delta,
        rho,
        Region::Band(w),
    )]
}

/// Band on the left pins `k` near `i`.
fn band_cone(a: &EnvelopeTerm, b: &EnvelopeTerm, w: u64) -> Vec<EnvelopeTerm> {
    let count = q(2 * w as i64 + 1);
    let spread = pow_q(&q(1 + w as i64), ceil_i64(&(abs_weight(a) + abs_weight(b))));
    let c = &a.c * &b.c * count * spread * pow_q(&b.rho, -(w as i64));
    let lift = &a.gamma + &a.delta;
    let mut out = Vec::new();
    if let Some(r) = narrowed(Region::Upper, b.region == Region::Lower, w) {
        out.push(term(c.clone(), &b.gamma + &lift, b.delta.clone(), b.rho.clone(), r));
    }
    if let Some(r) = narrowed(Region::Lower, b.region == Region::Upper, w) {
        out.push(term(c, b.gamma.clone(), &b.delta + &lift, &a.rho * &b.rho, r));
    }
    out
}

/// Band on the right pins `k` near `j`.
fn cone_band(a: &EnvelopeTerm, b: &EnvelopeTerm, w: u64) -> Vec<EnvelopeTerm> {
    let count = q(2 * w as i64 + 1);
    let spread = pow_q(&q(1 + w as i64), ceil_i64(&(abs_weight(a) + abs_weight(b))));
    let c = &a.c * &b.c * count * spread * pow_q(&a.rho, -(w as i64));
    let lift = &b.gamma + &b.delta;
    let mut out = Vec::new();
    if let Some(r) = narrowed(Region::Upper, a.region == Region::Lower, w) {
        out.push(term(c.clone(), a.gamma.clone(), &a.delta + &lift, &a.rho * &b.rho, r));
    }
    if let Some(r) = narrowed(Region::Lower, a.region == Region::Upper, w) {
        out.push(term(c, &a.gamma + &lift, a.delta.clone(), a.rho.clone(), r));
    }
    out
}

fn separable_exponent(t: &EnvelopeTerm) -> Q {
    let mid = (&t.gamma + &t.delta) / q(2);
    if mid > t.delta {
        mid
    } else {
        t.delta.clone()
    }
}

fn cone_cone(a: &EnvelopeTerm, b: &EnvelopeTerm) -> Result<Vec<EnvelopeTerm>, NotDerivable> {
    let (s1, s2) = (separable_exponent(a), separable_exponent(b));
    let (r1, r2) = (sqrt_upper(&a.rho), sqrt_upper(&b.rho));
    let e = &s1 + &s2;
    let r = &r1 * &r2;
    let sum = inner_sum_bound(&e, &r).ok_or_else(|| NotDerivable {
        left: a.clone(),
        right: b.clone(),
        inner_exponent: e.clone(),
        inner_base: r.clone(),
    })?;
    let c = &a.c * &b.c * sum;
    let want_upper = !(a.region == Region::Lower && b.region == Region::Lower);
    let want_lower = !(a.region == Region::Upper && b.region == Region::Upper);
    if want_upper && want_lower && s1 == s2 && r1 == r2 {
        return Ok(vec![term(c, s1, s2, r1, Region::Full)]);
    }
    let mut out = Vec::new();
    if want_upper {
        out.push(term(c.clone(), s1.clone(), s2.clone(), r2, Region::Upper));
    }
    if want_lower {
        out.push(term(c, s2, s1, r1, Region::Lower));
    }
    Ok(out)
}

fn pair_bound(a: &EnvelopeTerm, b: &EnvelopeTerm) -> Result<Vec<EnvelopeTerm>, NotDerivable> {
    Ok(match (a.region, b.region) {
        (Region::Band(w1), Region::Band(w2)) => band_band(a, b, w1, w2),
        (Region::Band(w), _) => band_cone(a, b, w),
        (_, Region::Band(w)) => cone_band(a, b, w),
        _ => cone_cone(a, b)?,
    })
}

/// Envelope `E` with `sum_k X_ik Y_kj <= E_ij` for all `i, j`.
pub fn envelope_product_bound(
    x: &EnvelopeMatrix,
    y: &EnvelopeMatrix,
) -> Result<EnvelopeMatrix, NotDerivable> {
    let left = all_terms(x);
    let right = all_terms(y);
    let mut terms = Vec::new();
    for a in &left {
        for b in &right {
            terms.extend(pair_bound(a, b)?);
        }
    }
    Ok(EnvelopeMatrix {
        terms,
        patch: Default::default(),
    })
}

pub fn envelope_adjoint(x: &EnvelopeMatrix) -> EnvelopeMatrix {
    x.adjoint()
}
