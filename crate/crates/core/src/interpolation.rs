//! Three-level interpolation estimate for the weights `A`.
//!
//! With `A(i,j;N,n) = max^N min^-n`,
//!
//! ```text
//! A(K,k)^(1-t) A(N,n)^t / A(M,m) = max^alpha * min^-beta,
//! alpha = (1-t)K + tN - M,   beta = (1-t)k + tn - m,
//! ```
//!
//! so the estimate holds with `C = 1` iff `alpha <= 0 <= beta`.

use num::traits::{One, Signed, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::membership::envelope::{format_q, q, q_to_f64, Q};
use crate::membership::oracle::ls_slope;
use crate::weights::{ln_weight, WeightKind};

pub const DEFAULT_PROBE_GRID: [usize; 4] = [10, 100, 1_000, 10_000];
pub const RATIO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("theta must lie in (0, 1), got {0}")]
    ThetaRange(String),
    #[error("theta = {theta} is below theta0 = {theta0}: (1-theta)K + theta N = {lhs} exceeds M = {m_level}")]
    ThetaBelowThreshold {
        theta: String,
        theta0: String,
        lhs: String,
        m_level: u32,
    },
    #[error("parameters violate {0}")]
    Invariant(String),
    #[error("probe needs K > M >= N, got N={n_level}, M={m_level}, K={k_level}")]
    LevelOrder { n_level: u32, m_level: u32, k_level: u32 },
    #[error("probe needs theta <= (K-M)/(K-N) = {bound}, got {theta}")]
    ThetaTooLarge { theta: String, bound: String },
    #[error("grid needs at least 2 sizes, each at least 2, strictly increasing")]
    Grid,
}

mod q_str {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }
}

/// Outer levels `N < M < K`, inner levels `n, m, k`, exponents `theta0 <= theta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpParams {
    #[serde(rename = "N")]
    pub outer_n: u32,
    #[serde(rename = "M")]
    pub outer_m: u32,
    #[serde(rename = "K")]
    pub outer_k: u32,
    #[serde(rename = "n")]
    pub inner_n: u32,
    #[serde(rename = "m")]
    pub inner_m: u32,
    #[serde(rename = "k")]
    pub inner_k: u32,
    #[serde(with = "q_str")]
    pub theta0: Q,
    #[serde(with = "q_str")]
    pub theta: Q,
    #[serde(rename = "C")]
    pub c: f64,
}

impl InterpParams {
    /// `alpha = (1-theta)K + theta N - M`.
    pub fn max_exponent(&self) -> Q {
        let t = &self.theta;
        (Q::one() - t) * q(self.outer_k as i64) + t * q(self.outer_n as i64) - q(self.outer_m as i64)
    }

    /// `beta = (1-theta)k + theta n - m`.
    pub fn min_exponent(&self) -> Q {
        let t = &self.theta;
        (Q::one() - t) * q(self.inner_k as i64) + t * q(self.inner_n as i64) - q(self.inner_m as i64)
    }

    pub fn validate(&self) -> Result<(), InterpError> {
        let unit = |x: &Q| x.is_positive() && *x < Q::one();
        if !unit(&self.theta) {
            return Err(InterpError::ThetaRange(format_q(&self.theta)));
        }
        if !unit(&self.theta0) {
            return Err(InterpError::ThetaRange(format_q(&self.theta0)));
        }
        let checks = [
            (self.outer_m == self.outer_n + 1, "M = N + 1"),
            (self.inner_n == 1, "n = 1"),
            (
                (Q::one() - &self.theta0) * q(self.outer_k as i64) + &self.theta0 * q(self.outer_n as i64)
                    <= q(self.outer_m as i64),
                "(1-theta0)K + N theta0 <= M",
            ),
            (self.theta >= self.theta0, "theta >= theta0"),
            (!self.min_exponent().is_negative(), "(1-theta)k + n theta >= m"),
            (self.c > 0.0, "C > 0"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(InterpError::Invariant(what.to_string()));
            }
        }
        Ok(())
    }
}

pub fn theta_threshold(outer_n: u32, outer_k: u32) -> Q {
    let half = Q::new(1.into(), 2.into());
    let outer_m = outer_n + 1;
    if outer_k > outer_m {
        let t = Q::new(
            (outer_k - outer_m).into(),
            (outer_k - outer_n).into(),
        );
        if t > half {
            t
        } else {
            half
        }
    } else {
        half
    }
}

pub fn choose_params(outer_n: u32, outer_k: u32, inner_m: u32, theta: Q) -> Result<InterpParams, InterpError> {
    if !(theta.is_positive() && theta < Q::one()) {
        return Err(InterpError::ThetaRange(format_q(&theta)));
    }
    let outer_m = outer_n + 1;
    let theta0 = theta_threshold(outer_n, outer_k);
    if theta < theta0 {
        let lhs = (Q::one() - &theta) * q(outer_k as i64) + &theta * q(outer_n as i64);
        return Err(InterpError::ThetaBelowThreshold {
            theta: format_q(&theta),
            theta0: format_q(&theta0),
            lhs: format_q(&lhs),
            m_level: outer_m,
        });
    }
    // smallest k >= 0 with (1-theta)k + theta >= m
    let need = (q(inner_m as i64) - &theta) / (Q::one() - &theta);
    let inner_k = if need.is_positive() {
        need.ceil().to_integer().to_u32().expect("k fits in u32")
    } else {
        0
    };
    let p = InterpParams {
        outer_n,
        outer_m,
        outer_k,
        inner_n: 1,
        inner_m,
        inner_k,
        theta0,
        theta,
        c: 1.0,
    };
    p.validate()?;
    Ok(p)
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub params: InterpParams,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "maxRatio")]
    pub max_ratio: f64,
    pub argmax: (usize, usize),
    /// Largest `|ln ratio - (alpha ln max - beta ln min)|` on the cross-check rows.
    #[serde(rename = "factorizationError")]
    pub factorization_error: f64,
    pub pass: bool,
}

/// Rows on which the closed-form factorization is checked against direct
/// weight evaluation: all rows up to 64, then a geometric ladder, then `T`.
fn check_rows(t: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = (1..=t.min(64)).collect();
    let mut x = 64.0f64;
    while (x as usize) < t {
        x *= 1.5;
        rows.push((x.ceil() as usize).min(t));
    }
    rows.push(t);
    rows.dedup();
    rows
}

/// `max_{i,j <= T} ratio`, without validating the parameters.
pub fn ratio_sweep(p: &InterpParams, t: usize) -> EstimateReport {
    let alpha = q_to_f64(&p.max_exponent());
    let beta = q_to_f64(&p.min_exponent());
    let ln: Vec<f64> = (0..=t).map(|k| if k == 0 { 0.0 } else { (k as f64).ln() }).collect();

    // ratio is symmetric in (i, j); scan min = i <= j = max
    let mut best = f64::NEG_INFINITY;
    let mut argmax = (1, 1);
    for i in 1..=t {
        let row = -beta * ln[i];
        for (j, lj) in ln.iter().enumerate().skip(i) {
            let v = alpha * lj + row;
            if v > best {
                best = v;
                argmax = (i, j);
            }
        }
    }

    let theta = q_to_f64(&p.theta);
    let lw = |i: usize, j: usize, outer: u32, inner: u32| {
        ln_weight(WeightKind::A, ln[i], ln[j], outer as f64, inner as f64)
    };
    let mut factorization_error = 0.0f64;
    for i in check_rows(t) {
        for j in 1..=t {
            let direct = (1.0 - theta) * lw(i, j, p.outer_k, p.inner_k) + theta * lw(i, j, p.outer_n, p.inner_n)
                - lw(i, j, p.outer_m, p.inner_m);
            let (lo, hi) = (i.min(j), i.max(j));
            let closed = alpha * ln[hi] - beta * ln[lo];
            factorization_error = factorization_error.max((direct - closed).abs() / (1.0 + closed.abs()));
        }
    }
    let max_ratio = best.exp();
    EstimateReport {
        params: p.clone(),
        t,
        max_ratio,
        argmax,
        factorization_error,
        pass: max_ratio <= p.c * (1.0 + RATIO_TOL) && factorization_error <= RATIO_TOL,
    }
}

pub fn verify_estimate(p: &InterpParams, t: usize) -> Result<EstimateReport, InterpError> {
    p.validate()?;
    if t == 0 {
        return Err(InterpError::Grid);
    }
    Ok(ratio_sweep(p, t))
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    #[serde(rename = "N")]
    pub outer_n: u32,
    #[serde(rename = "M")]
    pub outer_m: u32,
    #[serde(rename = "K")]
    pub outer_k: u32,
    #[serde(with = "q_str")]
    pub theta: Q,
    pub grid: Vec<usize>,
    #[serde(rename = "analyticExponent", with = "q_str")]
    pub analytic_exponent: Q,
    pub slope: f64,
    pub pass: bool,
}

/// Along `(1, t)` the ratio is `t^alpha` whatever the inner levels, so no
/// choice of `k` or `C` repairs it when `alpha > 0`.
pub fn small_theta_probe(
    outer_n: u32,
    outer_m: u32,
    outer_k: u32,
    theta: Q,
    grid: &[usize],
) -> Result<ProbeReport, InterpError> {
    if !(outer_k > outer_m && outer_m >= outer_n) {
        return Err(InterpError::LevelOrder {
            n_level: outer_n,
            m_level: outer_m,
            k_level: outer_k,
        });
    }
    if !(theta.is_positive() && theta < Q::one()) {
        return Err(InterpError::ThetaRange(format_q(&theta)));
    }
    let bound = Q::new((outer_k - outer_m).into(), (outer_k - outer_n).into());
    if theta > bound {
        return Err(InterpError::ThetaTooLarge {
            theta: format_q(&theta),
            bound: format_q(&bound),
        });
    }
    if grid.len() < 2 || grid[0] < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(InterpError::Grid);
    }
    let th = q_to_f64(&theta);
    // inner levels are inert on this ray; any fixed values do
    let (k_in, n_in, m_in) = (7.0, 1.0, 3.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .map(|&t| {
            let lt = (t as f64).ln();
            let lw = |outer: u32, inner: f64| ln_weight(WeightKind::A, 0.0, lt, outer as f64, inner);
            (lt, (1.0 - th) * lw(outer_k, k_in) + th * lw(outer_n, n_in) - lw(outer_m, m_in))
        })
        .unzip();
    let slope = ls_slope(&xs, &ys);
    let analytic = (Q::one() - &theta) * q(outer_k as i64) + &theta * q(outer_n as i64) - q(outer_m as i64);
    let pass = (slope - q_to_f64(&analytic)).abs() <= 0.05;
    Ok(ProbeReport {
        outer_n,
        outer_m,
        outer_k,
        theta,
        grid: grid.to_vec(),
        analytic_exponent: analytic,
        slope,
        pass,
    })
}
