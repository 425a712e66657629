//! Köthe PLB weight families on `N x N` and the one-index sequence weights.
//!
//! Every weighted norm in the crate evaluates its weights through
//! [`WeightFamily`]. Integer-exponent kinds are evaluated exactly as
//! `Ratio<u128>`; kind [`WeightKind::D`] carries the fractional exponent
//! `1/n` and is evaluated in `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::rational::Ratio;
use serde::Serialize;
use thiserror::Error;

pub type ExactWeight = Ratio<u128>;

/// Default cap on the levels `N` and `n`.
pub const DEFAULT_LEVEL_CAP: u32 = 64;

/// `sum_{i,j >= 1} (ij)^-2`.
pub const NUCLEARITY_LIMIT: f64 = std::f64::consts::PI
    * std::f64::consts::PI
    * std::f64::consts::PI
    * std::f64::consts::PI
    / 36.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum WeightKind {
    /// `i^N / j^n`, the matrices of continuous operators on `s`.
    B,
    /// `j^N / i^n`, the matrices of continuous operators on `s'`.
    BPrime,
    /// `max{i^N / j^n, j^N / i^n}`.
    A,
    /// `max{j^(N+1/n) / i^n, i^(N+1/n) / j^n}`, defined for `n >= 1`.
    D,
    /// `i^N j^N`, rapidly decreasing matrices.
    Kinf,
    /// `j^n`, grading of `s`.
    SeqS,
    /// `j^-n`, grading of `s'`.
    SeqSPrime,
}

impl WeightKind {
    pub const ALL: [WeightKind; 7] = [
        WeightKind::B,
        WeightKind::BPrime,
        WeightKind::A,
        WeightKind::D,
        WeightKind::Kinf,
        WeightKind::SeqS,
        WeightKind::SeqSPrime,
    ];

    /// One-index kinds ignore `j` and the outer level.
    pub fn is_sequence(self) -> bool {
        matches!(self, WeightKind::SeqS | WeightKind::SeqSPrime)
    }

    pub fn min_inner_level(self) -> u32 {
        if self == WeightKind::D {
            1
        } else {
            0
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightKind::B => "B",
            WeightKind::BPrime => "Bprime",
            WeightKind::A => "A",
            WeightKind::D => "D",
            WeightKind::Kinf => "Kinf",
            WeightKind::SeqS => "SeqS",
            WeightKind::SeqSPrime => "SeqSprime",
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "b" => Ok(WeightKind::B),
            "bprime" | "b'" | "b_prime" => Ok(WeightKind::BPrime),
            "a" => Ok(WeightKind::A),
            "d" => Ok(WeightKind::D),
            "kinf" | "k" => Ok(WeightKind::Kinf),
            "seqs" | "s" => Ok(WeightKind::SeqS),
            "seqsprime" | "sprime" | "s'" => Ok(WeightKind::SeqSPrime),
            other => Err(format!("unknown weight family `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("indices must be positive, got i={i}, j={j}")]
    NonPositiveIndex { i: usize, j: usize },
    #[error("family D is undefined at inner level n = 0")]
    ZeroInnerLevel,
    #[error("level {level} exceeds the cap {cap}")]
    LevelCap { level: u32, cap: u32 },
    #[error("exact weight overflows at (i={i}, j={j}, N={outer}, n={inner})")]
    Overflow {
        i: usize,
        j: usize,
        outer: u32,
        inner: u32,
    },
    #[error("shift {shift:?} is not defined for family {kind}")]
    ShiftMismatch { kind: WeightKind, shift: Shift },
}

/// A weight value: exact where the exponents are integers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    Exact(ExactWeight),
    Float(f64),
}

impl Weight {
    pub fn to_f64(&self) -> f64 {
        match self {
            Weight::Exact(r) => ratio_to_f64(r),
            Weight::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<ExactWeight> {
        match self {
            Weight::Exact(r) => Some(*r),
            Weight::Float(_) => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Weight::Exact(r) => *r.numer() > 0,
            Weight::Float(x) => *x > 0.0,
        }
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Weight::Exact(a), Weight::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

/// Correctly rounded when numerator and denominator are below 2^53,
/// within a few ulps otherwise.
pub fn ratio_to_f64(r: &ExactWeight) -> f64 {
    if *r.denom() == 1 {
        *r.numer() as f64
    } else {
        *r.numer() as f64 / *r.denom() as f64
    }
}

fn checked_pow(base: usize, exp: u32) -> Option<u128> {
    (base as u128).checked_pow(exp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightFamily {
    pub kind: WeightKind,
    pub level_cap: u32,
}

impl From<WeightKind> for WeightFamily {
    fn from(kind: WeightKind) -> Self {
        WeightFamily::new(kind)
    }
}

impl WeightFamily {
    pub fn new(kind: WeightKind) -> Self {
        WeightFamily {
            kind,
            level_cap: DEFAULT_LEVEL_CAP,
        }
    }

    pub fn with_level_cap(mut self, cap: u32) -> Self {
        self.level_cap = cap;
        self
    }

    fn validate(&self, i: usize, j: usize, outer: u32, inner: u32) -> Result<(), WeightError> {
        if i == 0 || j == 0 {
            return Err(WeightError::NonPositiveIndex { i, j });
        }
        for level in [outer, inner] {
            if level > self.level_cap {
                return Err(WeightError::LevelCap {
                    level,
                    cap: self.level_cap,
                });
            }
        }
        if self.kind == WeightKind::D && inner == 0 {
            return Err(WeightError::ZeroInnerLevel);
        }
        Ok(())
    }

    /// `w(i, j; N, n)`. One-index kinds read the sequence index from `i`
    /// and the level from `n`.
    pub fn eval(&self, i: usize, j: usize, outer: u32, inner: u32) -> Result<Weight, WeightError> {
        self.validate(i, j, outer, inner)?;
        let overflow = WeightError::Overflow {
            i,
            j,
            outer,
            inner,
        };
        let frac = |num: usize, num_exp: u32, den: usize, den_exp: u32| {
            match (checked_pow(num, num_exp), checked_pow(den, den_exp)) {
                (Some(a), Some(b)) => Ok(Ratio::new(a, b)),
                _ => Err(overflow.clone()),
            }
        };
        let value = match self.kind {
            WeightKind::B => Weight::Exact(frac(i, outer, j, inner)?),
            WeightKind::BPrime => Weight::Exact(frac(j, outer, i, inner)?),
            WeightKind::A => {
                let b = frac(i, outer, j, inner)?;
                let b_prime = frac(j, outer, i, inner)?;
                Weight::Exact(b.max(b_prime))
            }
            WeightKind::Kinf => {
                let a = checked_pow(i, outer).ok_or_else(|| overflow.clone())?;
                let b = checked_pow(j, outer).ok_or_else(|| overflow.clone())?;
                Weight::Exact(Ratio::from_integer(
                    a.checked_mul(b).ok_or_else(|| overflow.clone())?,
                ))
            }
            WeightKind::SeqS => Weight::Exact(frac(i, inner, 1, 0)?),
            WeightKind::SeqSPrime => Weight::Exact(frac(1, 0, i, inner)?),
            WeightKind::D => {
                if inner == 1 {
                    // 1/n is an integer here, so D coincides with an exact A-type value.
                    let lo = frac(j, outer + 1, i, 1)?;
                    let hi = frac(i, outer + 1, j, 1)?;
                    Weight::Exact(lo.max(hi))
                } else {
                    Weight::Float(d_float(i as f64, j as f64, outer, inner))
                }
            }
        };
        Ok(value)
    }

    /// One-index weight `c_{index, level}` for the sequence kinds.
    pub fn eval_seq(&self, index: usize, level: u32) -> Result<Weight, WeightError> {
        self.eval(index, 1, 0, level)
    }

    /// The weight as `f64`, exact when the exact value fits, otherwise from the
    /// logarithmic closed form.
    pub fn eval_f64(&self, i: usize, j: usize, outer: u32, inner: u32) -> Result<f64, WeightError> {
        match self.eval(i, j, outer, inner) {
            Ok(w) => Ok(w.to_f64()),
            Err(WeightError::Overflow { .. }) => Ok(self.ln_eval(i, j, outer, inner)?.exp()),
            Err(e) => Err(e),
        }
    }

    /// `ln w(i, j; N, n)`. Never overflows.
    pub fn ln_eval(&self, i: usize, j: usize, outer: u32, inner: u32) -> Result<f64, WeightError> {
        self.validate(i, j, outer, inner)?;
        Ok(ln_weight(
            self.kind,
            (i as f64).ln(),
            (j as f64).ln(),
            outer as f64,
            inner as f64,
        ))
    }
}

fn d_float(i: f64, j: f64, outer: u32, inner: u32) -> f64 {
    let frac_exp = 1.0 / inner as f64;
    let n = inner as i32;
    let o = outer as i32;
    let lo = j.powi(o) * j.powf(frac_exp) / i.powi(n);
    let hi = i.powi(o) * i.powf(frac_exp) / j.powi(n);
    lo.max(hi)
}

/// Logarithm of the closed form, with levels as floats. No validation.
pub(crate) fn ln_weight(kind: WeightKind, ln_i: f64, ln_j: f64, outer: f64, inner: f64) -> f64 {
    match kind {
        WeightKind::B => outer * ln_i - inner * ln_j,
        WeightKind::BPrime => outer * ln_j - inner * ln_i,
        WeightKind::A => (outer * ln_i - inner * ln_j).max(outer * ln_j - inner * ln_i),
        WeightKind::D => {
            let e = outer + 1.0 / inner;
            (e * ln_j - inner * ln_i).max(e * ln_i - inner * ln_j)
        }
        WeightKind::Kinf => outer * (ln_i + ln_j),
        WeightKind::SeqS => inner * ln_i,
        WeightKind::SeqSPrime => -inner * ln_i,
    }
}

/// A finite grid of `(i, j, N, n)` tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub i_max: usize,
    pub j_max: usize,
    pub outer_max: u32,
    pub inner_max: u32,
}

impl Grid {
    pub fn square(index_max: usize, level_max: u32) -> Self {
        Grid {
            i_max: index_max,
            j_max: index_max,
            outer_max: level_max,
            inner_max: level_max,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    NotPositive,
    /// `w(N, n+1) > w(N, n)`.
    InnerIncrease,
    /// `w(N, n) > w(N+1, n)`.
    OuterDecrease,
    /// `A(N, n) <= D(N, n)` fails.
    BelowLower,
    /// `D(N, n) <= A(N+1, n)` fails.
    AboveUpper,
    Eval(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub outer: u32,
    pub inner: u32,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize, outer: u32, inner: u32) -> bool {
        self.violations
            .iter()
            .any(|v| (v.i, v.j, v.outer, v.inner) == (i, j, outer, inner))
    }
}

/// Positivity and the monotonicity axiom
/// `w(N, n+1) <= w(N, n) <= w(N+1, n)` for an arbitrary 4-indexed weight.
///
/// Comparisons are made only between tuples inside the grid. Violations are
/// listed in `(i, j, N, n)` lexicographic order.
pub fn scan_koethe<F>(grid: &Grid, inner_min: u32, weight: F) -> VerificationReport
where
    F: Fn(usize, usize, u32, u32) -> Result<Weight, WeightError>,
{
    let mut report = VerificationReport::default();
    let levels_n = (grid.inner_max + 1).saturating_sub(inner_min) as usize;
    let levels_outer = grid.outer_max as usize + 1;
    for i in 1..=grid.i_max {
        for j in 1..=grid.j_max {
            let mut table: Vec<Result<Weight, WeightError>> = Vec::with_capacity(levels_outer * levels_n);
            for outer in 0..=grid.outer_max {
                for inner in inner_min..=grid.inner_max {
                    table.push(weight(i, j, outer, inner));
                }
            }
            let at = |outer: u32, inner: u32| &table[outer as usize * levels_n + (inner - inner_min) as usize];
            for outer in 0..=grid.outer_max {
                for inner in inner_min..=grid.inner_max {
                    report.checked += 1;
                    let mut push = |kind| {
                        report.violations.push(Violation {
                            i,
                            j,
                            outer,
                            inner,
                            kind,
                        })
                    };
                    let w = match at(outer, inner) {
                        Ok(w) => *w,
                        Err(e) => {
                            push(ViolationKind::Eval(e.to_string()));
                            continue;
                        }
                    };
                    if !w.is_positive() {
                        push(ViolationKind::NotPositive);
                    }
                    if inner < grid.inner_max {
                        if let Ok(next) = at(outer, inner + 1) {
                            if matches!(next.partial_cmp(&w), Some(Ordering::Greater) | None) {
                                push(ViolationKind::InnerIncrease);
                            }
                        }
                    }
                    if outer < grid.outer_max {
                        if let Ok(up) = at(outer + 1, inner) {
                            if matches!(w.partial_cmp(up), Some(Ordering::Greater) | None) {
                                push(ViolationKind::OuterDecrease);
                            }
                        }
                    }
                }
            }
        }
    }
    report
}

/// Checks positivity and monotonicity of `family` on `grid`.
///
/// One-index kinds are checked in the analogous form `c_{j, n+1} <= c_{j, n}`
/// with `j` running over `1..=grid.i_max`.
pub fn check_koethe_axioms(family: &WeightFamily, grid: &Grid) -> VerificationReport {
    if family.kind.is_sequence() {
        let seq_grid = Grid {
            i_max: grid.i_max,
            j_max: 1,
            outer_max: 0,
            inner_max: grid.inner_max,
        };
        return scan_koethe(&seq_grid, 0, |i, _, _, n| family.eval_seq(i, n));
    }
    scan_koethe(grid, family.kind.min_inner_level(), |i, j, outer, inner| {
        family.eval(i, j, outer, inner)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Shift {
    /// `D(N, n+1) / D(N, n)`.
    InnerStep,
    /// `A(N, n+2) / A(N+2, n)`.
    PaperShift,
}

impl FromStr for Shift {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inner_step" | "inner-step" | "inner" => Ok(Shift::InnerStep),
            "paper_shift" | "paper-shift" | "shift2" => Ok(Shift::PaperShift),
            other => Err(format!("unknown shift `{other}`")),
        }
    }
}

/// Ratio of weights between two levels, the quantity controlling
/// compactness of the linking maps.
pub fn compactness_ratio(
    family: &WeightFamily,
    i: usize,
    j: usize,
    outer: u32,
    inner: u32,
    shift: Shift,
) -> Result<Weight, WeightError> {
    match (family.kind, shift) {
        (WeightKind::D, Shift::InnerStep) => {
            let num = family.eval(i, j, outer, inner + 1)?;
            let den = family.eval(i, j, outer, inner)?;
            match (num, den) {
                (Weight::Exact(a), Weight::Exact(b)) => Ok(Weight::Exact(a / b)),
                (a, b) => Ok(Weight::Float(a.to_f64() / b.to_f64())),
            }
        }
        (WeightKind::A, Shift::PaperShift) => {
            let num = family.eval(i, j, outer, inner + 2)?;
            let den = family.eval(i, j, outer + 2, inner)?;
            match (num, den) {
                (Weight::Exact(a), Weight::Exact(b)) => Ok(Weight::Exact(a / b)),
                (a, b) => Ok(Weight::Float(a.to_f64() / b.to_f64())),
            }
        }
        (kind, shift) => Err(WeightError::ShiftMismatch { kind, shift }),
    }
}

/// `(min{i,j} * max{i,j}^(1/(n(n+1))))^-1`.
pub fn inner_step_closed_form(i: usize, j: usize, inner: u32) -> f64 {
    let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
    let n = inner as f64;
    1.0 / (lo * hi.powf(1.0 / (n * (n + 1.0))))
}

/// `(ij)^-2`, exactly.
pub fn paper_shift_closed_form(i: usize, j: usize) -> ExactWeight {
    let ij = (i as u128) * (j as u128);
    Ratio::new(1, ij * ij)
}

/// `sum_{i,j <= t} (ij)^-2`, summed as the square of `sum_{k <= t} k^-2`
/// from the smallest term up.
pub fn nuclearity_sum(t: usize) -> f64 {
    let row: f64 = (1..=t).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum();
    row * row
}

/// Pointwise `A(N, n) <= D(N, n) <= A(N+1, n)` for `n >= 1`.
pub fn sandwich_check(grid: &Grid) -> VerificationReport {
    let a = WeightFamily::new(WeightKind::A);
    let d = WeightFamily::new(WeightKind::D);
    let mut report = VerificationReport::default();
    for i in 1..=grid.i_max {
        for j in 1..=grid.j_max {
            for outer in 0..=grid.outer_max {
                for inner in 1..=grid.inner_max {
                    report.checked += 1;
                    let triple = sandwich_triple(&a, &d, i, j, outer, inner);
                    let kind = match triple {
                        Err(e) => Some(ViolationKind::Eval(e.to_string())),
                        Ok((lo, mid, hi)) => {
                            if lo.partial_cmp(&mid) == Some(Ordering::Greater) {
                                Some(ViolationKind::BelowLower)
                            } else if mid.partial_cmp(&hi) == Some(Ordering::Greater) {
                                Some(ViolationKind::AboveUpper)
                            } else {
                                None
                            }
                        }
                    };
                    if let Some(kind) = kind {
                        report.violations.push(Violation {
                            i,
                            j,
                            outer,
                            inner,
                            kind,
                        });
                    }
                }
            }
        }
    }
    report
}

/// `(A(N, n), D(N, n), A(N+1, n))`.
pub fn sandwich_triple(
    a: &WeightFamily,
    d: &WeightFamily,
    i: usize,
    j: usize,
    outer: u32,
    inner: u32,
) -> Result<(Weight, Weight, Weight), WeightError> {
    Ok((
        a.eval(i, j, outer, inner)?,
        d.eval(i, j, outer, inner)?,
        a.eval(i, j, outer + 1, inner)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(kind: WeightKind) -> WeightFamily {
        WeightFamily::new(kind)
    }

    fn exact(n: u128, d: u128) -> Weight {
        Weight::Exact(Ratio::new(n, d))
    }

    #[test]
    fn eval_examples() {
        assert_eq!(fam(WeightKind::A).eval(2, 3, 1, 0).unwrap(), exact(3, 1));
        for outer in 0..5 {
            for inner in 0..5 {
                assert_eq!(fam(WeightKind::B).eval(1, 1, outer, inner).unwrap(), exact(1, 1));
            }
        }
        assert_eq!(fam(WeightKind::D).eval(2, 2, 0, 1).unwrap().to_f64(), 1.0);
        assert_eq!(fam(WeightKind::BPrime).eval(2, 3, 2, 1).unwrap(), exact(9, 2));
        assert_eq!(fam(WeightKind::Kinf).eval(2, 3, 2, 7).unwrap(), exact(36, 1));
        assert_eq!(fam(WeightKind::SeqS).eval_seq(3, 2).unwrap(), exact(9, 1));
        assert_eq!(fam(WeightKind::SeqSPrime).eval_seq(3, 2).unwrap(), exact(1, 9));
    }

    #[test]
    fn eval_errors() {
        assert_eq!(
            fam(WeightKind::D).eval(2, 2, 0, 0),
            Err(WeightError::ZeroInnerLevel)
        );
        assert!(matches!(
            fam(WeightKind::A).eval(0, 2, 0, 0),
            Err(WeightError::NonPositiveIndex { .. })
        ));
        assert!(matches!(
            fam(WeightKind::A).eval(1, 2, 65, 0),
            Err(WeightError::LevelCap { level: 65, cap: 64 })
        ));
        assert!(matches!(
            fam(WeightKind::A).with_level_cap(4).eval(1, 2, 0, 5),
            Err(WeightError::LevelCap { .. })
        ));
        assert!(matches!(
            fam(WeightKind::B).eval(10_000, 2, 64, 0),
            Err(WeightError::Overflow { .. })
        ));
    }

    #[test]
    fn eval_f64_falls_back_past_overflow() {
        let a = fam(WeightKind::A);
        let x = a.eval_f64(10_000, 1, 40, 0).unwrap();
        let expected = 1e160;
        assert!((x / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_max_identity_for_a() {
        let a = fam(WeightKind::A);
        for i in 1..=40usize {
            for j in 1..=40usize {
                for outer in 0..=6 {
                    for inner in 0..=6 {
                        let (lo, hi) = (i.min(j), i.max(j));
                        let expected = Ratio::new(
                            (hi as u128).pow(outer),
                            (lo as u128).pow(inner),
                        );
                        assert_eq!(a.eval(i, j, outer, inner).unwrap(), Weight::Exact(expected));
                    }
                }
            }
        }
    }

    #[test]
    fn koethe_axioms_hold_for_plb_kinds() {
        let grid = Grid::square(30, 6);
        for kind in [WeightKind::B, WeightKind::BPrime, WeightKind::A, WeightKind::D, WeightKind::Kinf] {
            let report = check_koethe_axioms(&fam(kind), &grid);
            assert!(report.pass(), "{kind}: {:?}", &report.violations[..1]);
            assert!(report.checked > 0);
        }
        assert!(check_koethe_axioms(&fam(WeightKind::SeqSPrime), &grid).pass());
        // j^n grows in n: the projective grading of s is not an LB-type matrix.
        assert!(!check_koethe_axioms(&fam(WeightKind::SeqS), &grid).pass());
    }

    #[test]
    fn swapped_levels_are_caught() {
        // w(i,j;N,n) := i^n / j^N
        let corrupted = |i: usize, j: usize, outer: u32, inner: u32| {
            Ok(Weight::Exact(Ratio::new(
                (i as u128).pow(inner),
                (j as u128).pow(outer),
            )))
        };
        let report = scan_koethe(&Grid::square(100, 6), 0, corrupted);
        assert!(!report.pass());
        assert!(report.contains(2, 1, 0, 1));
        // brute-force oracle: (2,1,N,n) violates inner monotonicity for every n < 6
        let v = report
            .violations
            .iter()
            .find(|v| (v.i, v.j, v.outer, v.inner) == (2, 1, 0, 1))
            .unwrap();
        assert_eq!(v.kind, ViolationKind::InnerIncrease);
        // and (1,1,*,*) is constant, hence clean
        assert!(!report.violations.iter().any(|v| v.i == 1 && v.j == 1));
    }

    #[test]
    fn compactness_ratio_examples() {
        let a = fam(WeightKind::A);
        let d = fam(WeightKind::D);
        assert_eq!(
            compactness_ratio(&a, 3, 4, 0, 0, Shift::PaperShift).unwrap(),
            exact(1, 144)
        );
        for outer in 0..4 {
            let r = compactness_ratio(&d, 1, 1, outer, 1, Shift::InnerStep).unwrap();
            assert_eq!(r.to_f64(), 1.0);
        }
        let r = compactness_ratio(&d, 2, 8, 3, 2, Shift::InnerStep).unwrap().to_f64();
        let expected = 1.0 / (2.0 * 8f64.powf(1.0 / 6.0));
        assert!((r / expected - 1.0).abs() < 1e-12);
        assert!(matches!(
            compactness_ratio(&a, 1, 1, 0, 1, Shift::InnerStep),
            Err(WeightError::ShiftMismatch { .. })
        ));
        assert!(matches!(
            compactness_ratio(&d, 1, 1, 0, 1, Shift::PaperShift),
            Err(WeightError::ShiftMismatch { .. })
        ));
    }

    #[test]
    fn compactness_ratio_matches_closed_forms() {
        let a = fam(WeightKind::A);
        let d = fam(WeightKind::D);
        for i in 1..=25 {
            for j in 1..=25 {
                for outer in 0..=4 {
                    for inner in 0..=4 {
                        let r = compactness_ratio(&a, i, j, outer, inner, Shift::PaperShift).unwrap();
                        assert_eq!(r, Weight::Exact(paper_shift_closed_form(i, j)));
                        if inner >= 1 {
                            let r = compactness_ratio(&d, i, j, outer, inner, Shift::InnerStep)
                                .unwrap()
                                .to_f64();
                            let c = inner_step_closed_form(i, j, inner);
                            assert!((r / c - 1.0).abs() <= 1e-12, "{i} {j} {outer} {inner}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nuclearity_small_cases() {
        assert_eq!(nuclearity_sum(1), 1.0);
        assert_eq!(nuclearity_sum(2), 1.5625);
        let mut last = 0.0;
        for t in 1..200 {
            let s = nuclearity_sum(t);
            assert!(s >= last);
            last = s;
        }
    }

    #[test]
    fn nuclearity_matches_direct_double_sum() {
        for t in [1usize, 7, 50, 300] {
            let mut direct = 0.0;
            for i in 1..=t {
                for j in 1..=t {
                    let ij = (i * j) as f64;
                    direct += 1.0 / (ij * ij);
                }
            }
            assert!((nuclearity_sum(t) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn nuclearity_gap_follows_row_tail() {
        // pi^2/6 - sum_{k<=T} k^-2 <= 1/T, hence the double-sum gap is at most (pi^2/3)/T.
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        for t in [2usize, 10, 100, 1000, 2000, 5000] {
            let gap = NUCLEARITY_LIMIT - nuclearity_sum(t);
            assert!(gap > 0.0);
            assert!(gap <= 2.0 * zeta2 / t as f64, "T={t}: gap {gap}");
        }
        // the gap at T=2000 is 1.644e-3; it does not reach 1e-3 until T > 3290
        let gap = NUCLEARITY_LIMIT - nuclearity_sum(2000);
        assert!((gap - 1.6442730268e-3).abs() < 1e-9);
        assert!(NUCLEARITY_LIMIT - nuclearity_sum(3300) < 1e-3);
    }

    #[test]
    fn sandwich_examples() {
        let report = sandwich_check(&Grid {
            i_max: 40,
            j_max: 40,
            outer_max: 5,
            inner_max: 5,
        });
        assert!(report.pass());
        let a = fam(WeightKind::A);
        let d = fam(WeightKind::D);
        let (lo, mid, hi) = sandwich_triple(&a, &d, 1, 1, 0, 1).unwrap();
        assert_eq!((lo.to_f64(), mid.to_f64(), hi.to_f64()), (1.0, 1.0, 1.0));
        // (i=1, j=10, N=0, n=1): A = max{1/10, 1} = 1, D = max{10, 1/10} = 10, A(N+1) = 10
        let (lo, mid, hi) = sandwich_triple(&a, &d, 1, 10, 0, 1).unwrap();
        assert_eq!(lo, exact(1, 1));
        assert_eq!(mid, exact(10, 1));
        assert_eq!(hi, exact(10, 1));
        // n = 2: D = 10^(1/2)
        let (lo, mid, hi) = sandwich_triple(&a, &d, 1, 10, 0, 2).unwrap();
        assert_eq!(lo, exact(1, 1));
        assert!((mid.to_f64() - 10f64.sqrt()).abs() < 1e-14);
        assert_eq!(hi, exact(10, 1));
    }

    #[test]
    fn ln_eval_agrees_with_exact() {
        for kind in WeightKind::ALL {
            let f = fam(kind);
            for i in 1..=12 {
                for j in 1..=12 {
                    for outer in 0..=4 {
                        for inner in kind.min_inner_level()..=4 {
                            let w = f.eval(i, j, outer, inner).unwrap().to_f64();
                            let l = f.ln_eval(i, j, outer, inner).unwrap();
                            assert!((l - w.ln()).abs() < 1e-12, "{kind} {i} {j} {outer} {inner}");
                        }
                    }
                }
            }
        }
    }
}
