//! Numeric growth oracle: log-log slope of weighted envelope sups.
//!
//! Full boxes `[1, T]^2` are too large at `T = 4096`, so the box sup is taken
//! over a sampled index set: every index up to `dense_limit`, a geometric
//! ladder above it, the grid sizes themselves, every index within the widest
//! band of each sample, and the patch positions. The terms are monotone
//! between ladder points up to a factor `ratio^|exponent|`, which moves the
//! slope by far less than the decision thresholds.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use super::decide::Ray;
use super::envelope::{q_to_f64, EnvelopeMatrix, FloatTerm};
use crate::weights::{ln_weight, WeightFamily};

pub const DEFAULT_GRID: [usize; 5] = [16, 64, 256, 1024, 4096];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleConfig {
    pub grid: Vec<usize>,
    pub bounded_max: f64,
    pub unbounded_min: f64,
    pub dense_limit: usize,
    pub ladder_ratio: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid: DEFAULT_GRID.to_vec(),
            bounded_max: 0.1,
            unbounded_min: 0.25,
            dense_limit: 64,
            ladder_ratio: 1.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("grid needs at least 4 sizes, got {0}")]
    GridTooSmall(usize),
    #[error("grid sizes must be strictly increasing and start at 2 or more")]
    GridNotIncreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Probe {
    /// Sup over `[1, T]^2`.
    Box,
    /// Value at the ray point with parameter `T`.
    Ray(Ray),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub sizes: Vec<usize>,
    /// `ln` of the probed value per size; `-inf` when the envelope vanishes there.
    pub log_values: Vec<f64>,
    pub slope: f64,
    pub verdict: Verdict,
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

struct LnEnvelope {
    terms: Vec<FloatTerm>,
    patch: std::collections::BTreeMap<(usize, usize), f64>,
}

impl LnEnvelope {
    fn new(x: &EnvelopeMatrix) -> Self {
        LnEnvelope {
            terms: x.terms.iter().map(FloatTerm::from).collect(),
            patch: x
                .patch
                .iter()
                .map(|(&k, v)| (k, q_to_f64(v).ln()))
                .collect(),
        }
    }

    fn ln_at(&self, i: usize, j: usize) -> f64 {
        let ln_min = (i.min(j) as f64).ln();
        let max = i.max(j);
        let logs: Vec<f64> = self
            .terms
            .iter()
            .filter(|t| t.region.contains(i, j))
            .map(|t| t.ln_value(ln_min, max))
            .collect();
        let mut total = match logs.iter().copied().fold(f64::NEG_INFINITY, f64::max) {
            top if top == f64::NEG_INFINITY => top,
            top => top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln(),
        };
        if let Some(&p) = self.patch.get(&(i, j)) {
            total = total.max(p);
        }
        total
    }
}

fn sample_indices(cfg: &OracleConfig, t_max: usize, patch_idx: &[usize]) -> Vec<usize> {
    let mut set = BTreeSet::new();
    for k in 1..=cfg.dense_limit.min(t_max) {
        set.insert(k);
    }
    let mut x = cfg.dense_limit.max(1) as f64;
    while (x as usize) < t_max {
        x *= cfg.ladder_ratio;
        set.insert((x.ceil() as usize).min(t_max));
    }
    for &t in &cfg.grid {
        set.insert(t);
    }
    set.extend(patch_idx.iter().copied().filter(|&k| k <= t_max));
    set.into_iter().collect()
}

fn validate(cfg: &OracleConfig) -> Result<(), OracleError> {
    if cfg.grid.len() < 4 {
        return Err(OracleError::GridTooSmall(cfg.grid.len()));
    }
    if cfg.grid[0] < 2 || cfg.grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(OracleError::GridNotIncreasing);
    }
    Ok(())
}

pub fn growth_oracle(
    x: &EnvelopeMatrix,
    family: &WeightFamily,
    outer: u32,
    inner: u32,
    probe: Probe,
    cfg: &OracleConfig,
) -> Result<OracleReport, OracleError> {
    validate(cfg)?;
    let env = LnEnvelope::new(x);
    let kind = family.kind;
    let (no, ni) = (outer as f64, inner as f64);
    let weighted = |i: usize, j: usize| {
        let e = env.ln_at(i, j);
        if e == f64::NEG_INFINITY {
            e
        } else {
            e + ln_weight(kind, (i as f64).ln(), (j as f64).ln(), no, ni)
        }
    };

    let log_values: Vec<f64> = match probe {
        Probe::Ray(ray) => cfg
            .grid
            .iter()
            .map(|&t| {
                let (i, j) = ray.point(t);
                weighted(i, j)
            })
            .collect(),
        Probe::Box => {
            let t_max = *cfg.grid.last().unwrap();
            let band = x.max_band_width();
            let patch_idx: Vec<usize> = x.patch.keys().flat_map(|&(i, j)| [i, j]).collect();
            let idx = sample_indices(cfg, t_max, &patch_idx);
            let mut best = vec![f64::NEG_INFINITY; cfg.grid.len()];
            let bucket = |i: usize, j: usize| cfg.grid.iter().position(|&t| i.max(j) <= t);
            let mut visit = |i: usize, j: usize| {
                if let Some(b) = bucket(i, j) {
                    let v = weighted(i, j);
                    if v > best[b] {
                        best[b] = v;
                    }
                }
            };
            for &i in &idx {
                for &j in &idx {
                    visit(i, j);
                }
                let reach = band as usize + 1;
                for d in 1..=reach {
                    visit(i, i + d);
                    visit(i + d, i);
                    if i > d {
                        visit(i, i - d);
                        visit(i - d, i);
                    }
                }
            }
            for &(i, j) in x.patch.keys() {
                visit(i, j);
            }
            // sup over [1,T]^2 is cumulative in T
            for b in 1..best.len() {
                best[b] = best[b].max(best[b - 1]);
            }
            best
        }
    };

    let points: Vec<(f64, f64)> = cfg
        .grid
        .iter()
        .zip(&log_values)
        .filter(|(_, v)| v.is_finite())
        .map(|(&t, &v)| ((t as f64).ln(), v))
        .collect();
    // fewer than two finite points: nothing grows
    let slope = if points.len() < 2 {
        0.0
    } else {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        ls_slope(&xs, &ys)
    };
    let verdict = if slope <= cfg.bounded_max {
        Verdict::Bounded
    } else if slope >= cfg.unbounded_min {
        Verdict::Unbounded
    } else {
        Verdict::Inconclusive
    };
    Ok(OracleReport {
        sizes: cfg.grid.clone(),
        log_values,
        slope,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightKind;

    fn oracle(env: &str, kind: WeightKind, outer: u32, inner: u32, probe: Probe) -> OracleReport {
        let x = EnvelopeMatrix::parse(env).unwrap();
        let fam = WeightFamily::new(kind);
        growth_oracle(&x, &fam, outer, inner, probe, &OracleConfig::default()).unwrap()
    }

    #[test]
    fn identity_examples() {
        let r = oracle("identity", WeightKind::A, 2, 2, Probe::Box);
        assert!(r.slope.abs() < 1e-12, "{}", r.slope);
        assert_eq!(r.verdict, Verdict::Bounded);
        let r = oracle("identity", WeightKind::A, 2, 1, Probe::Box);
        assert!((r.slope - 1.0).abs() < 1e-9, "{}", r.slope);
        assert_eq!(r.verdict, Verdict::Unbounded);
    }

    #[test]
    fn diag_j5_with_kinf() {
        let r = oracle("diag:j^5", WeightKind::Kinf, 1, 0, Probe::Box);
        assert!((r.slope - 7.0).abs() < 1e-9, "{}", r.slope);
    }

    #[test]
    fn box_sup_matches_dense_scan() {
        // dense scan oracle at T = 256 for a mixed envelope
        let src = "term(min^-2, max^1, upper) + term(c=3, min^1, max^-4, lower) + diag:j^2 + patch(7,3)=50";
        let x = EnvelopeMatrix::parse(src).unwrap();
        let fam = WeightFamily::new(WeightKind::A);
        let cfg = OracleConfig {
            grid: vec![16, 32, 64, 128, 256],
            dense_limit: 256,
            ..OracleConfig::default()
        };
        let r = growth_oracle(&x, &fam, 1, 2, Probe::Box, &cfg).unwrap();
        for (k, &t) in cfg.grid.iter().enumerate() {
            let mut sup = 0.0f64;
            for i in 1..=t {
                for j in 1..=t {
                    let w = fam.eval_f64(i, j, 1, 2).unwrap();
                    sup = sup.max(x.value(i, j) * w);
                }
            }
            assert!((r.log_values[k] - sup.ln()).abs() < 1e-9, "T={t}");
        }
    }

    #[test]
    fn ray_probe() {
        let r = oracle("term(min^-3, max^-3)", WeightKind::A, 4, 16, Probe::Ray(Ray::FirstColumn));
        assert!((r.slope - 1.0).abs() < 1e-9);
        let r = oracle("term(rho=1/2)", WeightKind::Kinf, 3, 0, Probe::Ray(Ray::Diagonal));
        assert!(r.slope < -100.0);
    }

    #[test]
    fn empty_and_patch_only() {
        let r = oracle("zero", WeightKind::A, 3, 0, Probe::Box);
        assert_eq!(r.slope, 0.0);
        let r = oracle("patch(100,2)=1", WeightKind::A, 1, 0, Probe::Box);
        assert!(r.slope.is_finite());
        assert!(r.log_values[0] == f64::NEG_INFINITY);
        assert!((r.log_values[4] - 100f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn small_grids_are_rejected() {
        let x = EnvelopeMatrix::identity();
        let fam = WeightFamily::new(WeightKind::A);
        let cfg = OracleConfig {
            grid: vec![16, 64, 256],
            ..OracleConfig::default()
        };
        assert_eq!(
            growth_oracle(&x, &fam, 0, 0, Probe::Box, &cfg),
            Err(OracleError::GridTooSmall(3))
        );
        let cfg = OracleConfig {
            grid: vec![16, 64, 64, 256],
            ..OracleConfig::default()
        };
        assert!(growth_oracle(&x, &fam, 0, 0, Probe::Box, &cfg).is_err());
    }
}
