//! The acceptance battery as a single deterministic report.
//!
//! Each check records what it measured and, on failure, the offending
//! tuples. Nothing time-dependent goes into the report, so a fixed seed
//! gives identical bytes.

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::interpolation::{choose_params, small_theta_probe, theta_threshold, verify_estimate, DEFAULT_PROBE_GRID};
use crate::matrices::{seminorm_p, seminorm_q, weighted_norm_moduli, BoundedSet, NormP, TruncMatrix, WeightTable};
use crate::membership::envelope::{q, q_frac, Q};
use crate::membership::{audit_case, audit_decision, curated_suite, decide_membership, Decision, EnvelopeMatrix, OracleConfig};
use crate::multiplier::{
    centralizer_ops, diag_embed, diag_invert, diag_project, make_centralizer, pair_residual, q_algebra_probe,
    reconstruct, CentralizerOp, DiagonalElement, Inversion,
};
use crate::random::{random_c64, random_matrix, random_vector, seeded_rng};
use crate::report::to_canonical_json;
use crate::scalar::C64;
use crate::sequences::SeqVector;
use crate::weights::{
    check_koethe_axioms, compactness_ratio, inner_step_closed_form, nuclearity_sum, paper_shift_closed_form,
    ratio_to_f64, sandwich_check, Grid, Shift, WeightFamily, WeightKind, NUCLEARITY_LIMIT,
};

/// Failing tuples kept per check.
pub const MAX_LISTED: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub measured: Value,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(seed: u64, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        SuiteReport { seed, checks, pass }
    }
}

struct Violations {
    count: usize,
    listed: Vec<String>,
}

impl Violations {
    fn new() -> Self {
        Violations {
            count: 0,
            listed: Vec::new(),
        }
    }

    fn push(&mut self, what: impl FnOnce() -> String) {
        self.count += 1;
        if self.listed.len() < MAX_LISTED {
            self.listed.push(what());
        }
    }

    fn into_check(self, id: u32, name: &str, measured: Value) -> Check {
        Check {
            id,
            name: name.into(),
            pass: self.count == 0,
            measured,
            violations: self.listed,
        }
    }
}

fn seed_for(seed: u64, id: u32) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(id as u64)
}

pub const NUCLEARITY_T: usize = 2000;
pub const NUCLEARITY_TOL: f64 = 1e-3;

pub fn check_nuclearity() -> Check {
    let sum = nuclearity_sum(NUCLEARITY_T);
    let gap = (sum - NUCLEARITY_LIMIT).abs();
    let mut v = Violations::new();
    if gap > NUCLEARITY_TOL {
        v.push(|| format!("T={NUCLEARITY_T}: |sum - target| = {gap:.6e} > {NUCLEARITY_TOL:e}"));
    }
    v.into_check(
        1,
        "nuclearity constant",
        json!({"T": NUCLEARITY_T, "sum": sum, "target": NUCLEARITY_LIMIT, "gap": gap, "tol": NUCLEARITY_TOL}),
    )
}

pub fn check_lp_equivalence(seed: u64, samples: usize) -> Check {
    const DIM: usize = 64;
    const LEVEL: u32 = 4;
    const TOL: f64 = 1e-10;
    let fam = WeightFamily::new(WeightKind::A);
    let tables: Vec<Vec<WeightTable>> = (0..=LEVEL + 2)
        .map(|outer| {
            (0..=LEVEL + 2)
                .map(|inner| WeightTable::new(&fam, DIM, outer, inner).expect("A is a matrix family"))
                .collect()
        })
        .collect();
    let mut rng = seeded_rng(seed_for(seed, 2));
    let mut v = Violations::new();
    let mut worst_first = 0.0f64;
    let mut worst_second = 0.0f64;
    for s in 0..samples {
        let x = random_matrix(&mut rng, DIM);
        let moduli: Vec<f64> = x.entries().iter().map(|z| z.norm()).collect();
        for outer in 0..=LEVEL {
            for inner in 0..=LEVEL {
                let at = |o: u32, n: u32, p| weighted_norm_moduli(&moduli, &tables[o as usize][n as usize], p).expect("dims");
                let sup = at(outer, inner, NormP::Inf);
                let one = at(outer, inner, NormP::One);
                let shifted = at(outer, inner + 2, NormP::One);
                let bound = NUCLEARITY_LIMIT * at(outer + 2, inner, NormP::Inf);
                worst_first = worst_first.max(sup / one);
                worst_second = worst_second.max(shifted / bound);
                if sup > one * (1.0 + TOL) {
                    v.push(|| format!("sample {s}, N={outer}, n={inner}: sup {sup} > l1 {one}"));
                }
                if shifted > bound * (1.0 + TOL) {
                    v.push(|| format!("sample {s}, N={outer}, n={inner}: {shifted} > {bound}"));
                }
            }
        }
    }
    v.into_check(
        2,
        "lp equivalence",
        json!({"samples": samples, "T": DIM, "levelMax": LEVEL, "maxSupOverL1": worst_first, "maxShiftedRatio": worst_second}),
    )
}

pub fn check_seminorm_identity(seed: u64, samples: usize) -> Check {
    const DIM: usize = 12;
    let mut rng = seeded_rng(seed_for(seed, 3));
    let mut v = Violations::new();
    let mut worst = 0.0f64;
    for s in 0..samples {
        let x = random_matrix(&mut rng, DIM);
        let size = rng.gen_range(1..=4);
        let set = BoundedSet::new((0..size).map(|_| random_vector(&mut rng, DIM)).collect());
        let n = rng.gen_range(0..=4u32);
        let p = seminorm_p(&x, n, &set).expect("dims");
        let qv = seminorm_q(&x, n, &set).expect("dims");
        let rel = (p - qv).abs() / (1.0 + p.max(qv));
        worst = worst.max(rel);
        if rel > 1e-10 {
            v.push(|| format!("sample {s}, n={n}: p={p}, q={qv}"));
        }
    }
    v.into_check(
        3,
        "p = q seminorm identity",
        json!({"samples": samples, "T": DIM, "maxRelativeGap": worst}),
    )
}

/// Largest relative errors of the two compactness ratios against their
/// closed forms, with the failing tuples.
fn ratio_scan(index_max: usize, level_max: u32) -> (f64, f64, Vec<String>) {
    let mut failures = Vec::new();
    let d = WeightFamily::new(WeightKind::D);
    let a = WeightFamily::new(WeightKind::A);
    let mut worst_inner = 0.0f64;
    let mut worst_shift = 0.0f64;
    for i in 1..=index_max {
        for j in 1..=index_max {
            let exact_shift = ratio_to_f64(&paper_shift_closed_form(i, j));
            for outer in 0..=level_max {
                for inner in 1..=level_max {
                    let got = compactness_ratio(&d, i, j, outer, inner, Shift::InnerStep)
                        .expect("D inner step")
                        .to_f64();
                    let want = inner_step_closed_form(i, j, inner);
                    let rel = (got - want).abs() / want;
                    worst_inner = worst_inner.max(rel);
                    if rel > 1e-12 {
                        failures.push(format!("inner step at (i={i}, j={j}, N={outer}, n={inner}): {got} vs {want}"));
                    }
                }
                for inner in 0..=level_max {
                    let got = compactness_ratio(&a, i, j, outer, inner, Shift::PaperShift)
                        .expect("A shift")
                        .to_f64();
                    let rel = (got - exact_shift).abs() / exact_shift;
                    worst_shift = worst_shift.max(rel);
                    if rel > 1e-12 {
                        failures.push(format!("shift at (i={i}, j={j}, N={outer}, n={inner}): {got} vs {exact_shift}"));
                    }
                }
            }
        }
    }
    (worst_inner, worst_shift, failures)
}

pub fn check_koethe(index_max: usize, level_max: u32) -> Check {
    let grid = Grid::square(index_max, level_max);
    let mut v = Violations::new();
    let mut checked = 0usize;
    let kinds = [WeightKind::B, WeightKind::BPrime, WeightKind::A, WeightKind::D];
    // one thread per family; results are joined in the fixed order above
    let (reports, sandwich, ratios) = std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| scope.spawn(move || check_koethe_axioms(&WeightFamily::new(kind), &grid)))
            .collect();
        let sandwich = scope.spawn(|| sandwich_check(&grid));
        let ratios = scope.spawn(|| ratio_scan(index_max, level_max));
        let reports: Vec<_> = handles.into_iter().map(|h| h.join().expect("scan thread")).collect();
        (
            reports,
            sandwich.join().expect("sandwich thread"),
            ratios.join().expect("ratio thread"),
        )
    });
    for (kind, r) in kinds.into_iter().zip(reports) {
        checked += r.checked;
        for viol in r.violations {
            v.push(|| format!("{kind} at (i={}, j={}, N={}, n={}): {:?}", viol.i, viol.j, viol.outer, viol.inner, viol.kind));
        }
    }
    let (worst_inner, worst_shift, ratio_failures) = ratios;
    for msg in ratio_failures {
        v.push(|| msg);
    }
    for viol in &sandwich.violations {
        v.push(|| format!("sandwich at (i={}, j={}, N={}, n={}): {:?}", viol.i, viol.j, viol.outer, viol.inner, viol.kind));
    }
    let count = v.count;
    v.into_check(
        4,
        "Koethe axioms and closed-form ratios",
        json!({
            "indexMax": index_max,
            "levelMax": level_max,
            "axiomTuples": checked,
            "sandwichTuples": sandwich.checked,
            "maxInnerStepRelErr": worst_inner,
            "maxShiftRelErr": worst_shift,
            "violationCount": count,
        }),
    )
}

/// Relative residuals between the pair operations on `make_centralizer(u)`,
/// `make_centralizer(w)` and the pair of the corresponding matrix.
pub fn homomorphism_residuals(
    u: &TruncMatrix<C64>,
    w: &TruncMatrix<C64>,
    a: C64,
    probes: &[TruncMatrix<C64>],
) -> Vec<(&'static str, f64)> {
    let pu = make_centralizer(u);
    let pw = make_centralizer(w);
    let cases: [(&str, CentralizerOp<C64>, TruncMatrix<C64>); 4] = [
        ("add", CentralizerOp::Add, u.add(w).expect("dims")),
        ("scale", CentralizerOp::Scale(a), u.scale(&a)),
        ("mul", CentralizerOp::Mul, u.mul(w).expect("dims")),
        ("star", CentralizerOp::Star, u.adjoint()),
    ];
    cases
        .into_iter()
        .map(|(name, op, image)| {
            let lhs = centralizer_ops(&pu, &pw, op).expect("dims");
            let rhs = make_centralizer(&image);
            let scale = probes
                .iter()
                .map(|y| 1.0 + image.mul(y).expect("dims").max_abs())
                .fold(0.0, f64::max);
            (name, pair_residual(&lhs, &rhs, probes).expect("dims") / scale)
        })
        .collect()
}

pub fn check_centralizers(seed: u64, samples: usize) -> Check {
    const DIM: usize = 32;
    const TOL: f64 = 1e-12;
    let mut rng = seeded_rng(seed_for(seed, 5));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let units = [
        SeqVector::unit(1),
        SeqVector::from_entries([(1, C64::new(r, 0.0)), (2, C64::new(r, 0.0))]).expect("positive indices"),
    ];
    let mut v = Violations::new();
    let mut worst_round = 0.0f64;
    let mut worst_hom = 0.0f64;
    for s in 0..samples {
        let u = random_matrix(&mut rng, DIM);
        let w = random_matrix(&mut rng, DIM);
        let probes = [random_matrix(&mut rng, DIM), random_matrix(&mut rng, DIM)];
        let a = random_c64(&mut rng);
        let pu = make_centralizer(&u);
        for (k, e) in units.iter().enumerate() {
            let back = reconstruct(&pu, e).expect("unit vector");
            let err = back.max_abs_diff(&u).expect("dims");
            worst_round = worst_round.max(err);
            if err > TOL {
                v.push(|| format!("sample {s}, e#{k}: reconstruction error {err:e}"));
            }
        }
        for (name, res) in homomorphism_residuals(&u, &w, a, &probes) {
            worst_hom = worst_hom.max(res);
            if res > TOL {
                v.push(|| format!("sample {s}, {name}: relative residual {res:e}"));
            }
        }
    }
    v.into_check(
        5,
        "centralizer round trip",
        json!({"samples": samples, "T": DIM, "maxReconstructionError": worst_round, "maxHomomorphismResidual": worst_hom}),
    )
}

pub fn check_membership() -> Check {
    let cfg = OracleConfig::default();
    let mut v = Violations::new();
    let suite = curated_suite();
    let mut members = 0usize;
    for (name, x) in &suite {
        match audit_case(name, x, &cfg) {
            Ok(case) => {
                members += case.checks.iter().filter(|c| decide_membership(x, c.space).is_member()).count();
                for c in case.checks.iter().filter(|c| !c.pass) {
                    v.push(|| format!("{name} in {}: extreme slope {}", c.space.name(), c.extreme_slope));
                }
                for msg in &case.inclusion_violations {
                    v.push(|| format!("{name}: {msg}"));
                }
            }
            Err(e) => v.push(|| format!("{name}: {e}")),
        }
    }
    v.into_check(
        6,
        "membership soundness",
        json!({"cases": suite.len(), "decisions": suite.len() * 4, "memberDecisions": members}),
    )
}

pub fn check_diagonal(seed: u64, samples: usize) -> Check {
    const DIM: usize = 12;
    const LEVEL: u32 = 4;
    let mut rng = seeded_rng(seed_for(seed, 7));
    let fam = WeightFamily::new(WeightKind::A);
    let mut v = Violations::new();
    let mut embeds = 0usize;
    for s in 0..samples {
        let x = random_matrix(&mut rng, DIM);
        let p = diag_project(&x, &fam, LEVEL).expect("A family");
        if !p.idempotent || !p.contracts(1e-12) {
            v.push(|| format!("sample {s}: idempotent={}, contracts={}", p.idempotent, p.contracts(1e-12)));
        }
        let xi = random_vector(&mut rng, DIM);
        for outer in 0..=LEVEL {
            for inner in 0..=LEVEL {
                let e = diag_embed(&xi, DIM, outer, inner).expect("support");
                embeds += 1;
                if e.closed_form != e.norm {
                    v.push(|| format!("sample {s}, N={outer}, n={inner}: {} != {}", e.closed_form, e.norm));
                }
            }
        }
    }
    let diag_j = EnvelopeMatrix::parse("diag:j").expect("literal");
    let witness = match diag_invert::<C64>(&DiagonalElement::from_envelope(&diag_j).expect("diagonal")) {
        Inversion::Invertible {
            inverse: DiagonalElement::Envelope(t),
            certificate: Some(cert),
        } => {
            let inv = EnvelopeMatrix::single(t);
            let audit = audit_decision(&inv, &Decision::Member(cert.clone()), &OracleConfig::default());
            if !matches!(audit, Ok(ref a) if a.pass) {
                v.push(|| "inverse of diag(j) fails its certificate audit".into());
            }
            cert.witness.to_string()
        }
        other => {
            v.push(|| format!("diag(j) not certified invertible: {other:?}"));
            String::new()
        }
    };
    if witness != "n(N)=N+1" {
        v.push(|| format!("diag(j) witness `{witness}`, expected n(N)=N+1"));
    }
    let decaying = EnvelopeMatrix::parse("diag:2^-j").expect("literal");
    let rejected = matches!(
        diag_invert::<C64>(&DiagonalElement::from_envelope(&decaying).expect("diagonal")),
        Inversion::NotInvertibleInAlgebra { .. }
    );
    if !rejected {
        v.push(|| "diag(2^-j) was not rejected".into());
    }
    v.into_check(
        7,
        "diagonal subalgebra",
        json!({"samples": samples, "T": DIM, "embeddings": embeds, "inverseWitness": witness, "decayingRejected": rejected}),
    )
}

/// Twenty `(N, K, m, theta)` tuples covering `K <= M` and `K > M`, with
/// `theta` at and above the threshold.
pub fn interpolation_tuples() -> Vec<(u32, u32, u32, Q)> {
    let mut out = Vec::new();
    for (idx, (n, k, m)) in [
        (0, 3, 5),
        (0, 1, 2),
        (0, 2, 0),
        (1, 4, 3),
        (1, 7, 6),
        (2, 1, 4),
        (2, 9, 1),
        (3, 5, 8),
        (4, 12, 2),
        (5, 6, 10),
    ]
    .into_iter()
    .enumerate()
    {
        let t0 = theta_threshold(n, k);
        out.push((n, k, m, t0.clone()));
        let step = q_frac(1 + idx as i64 % 3, 4);
        out.push((n, k, m, &t0 + (q(1) - &t0) * step));
    }
    out
}

pub const INTERP_T: usize = 10_000;

pub fn check_interpolation(t: usize) -> Check {
    let mut v = Violations::new();
    let mut worst = 0.0f64;
    let tuples = interpolation_tuples();
    for (n, k, m, theta) in &tuples {
        match choose_params(*n, *k, *m, theta.clone()).and_then(|p| verify_estimate(&p, t)) {
            Ok(r) => {
                worst = worst.max(r.max_ratio);
                if !r.pass {
                    v.push(|| format!("N={n}, K={k}, m={m}, theta={theta}: max ratio {} at {:?}", r.max_ratio, r.argmax));
                }
            }
            Err(e) => v.push(|| format!("N={n}, K={k}, m={m}, theta={theta}: {e}")),
        }
    }
    let mut slopes = Vec::new();
    for (n, mm, k, theta) in [(0, 1, 3, q_frac(1, 4)), (0, 1, 3, q_frac(2, 3)), (1, 2, 10, q_frac(1, 10))] {
        match small_theta_probe(n, mm, k, theta.clone(), &DEFAULT_PROBE_GRID) {
            Ok(r) => {
                slopes.push(json!({"N": n, "M": mm, "K": k, "theta": theta.to_string(), "exponent": r.analytic_exponent.to_string(), "slope": r.slope}));
                if !r.pass {
                    v.push(|| format!("probe N={n}, M={mm}, K={k}: slope {} vs {}", r.slope, r.analytic_exponent));
                }
            }
            Err(e) => v.push(|| format!("probe N={n}, M={mm}, K={k}: {e}")),
        }
    }
    v.into_check(
        8,
        "interpolation estimate",
        json!({"tuples": tuples.len(), "T": t, "maxRatio": worst, "probes": slopes}),
    )
}

pub fn check_non_q(k_max: usize, level_max: u32) -> Check {
    let mut v = Violations::new();
    let mut probes = 0usize;
    for k in 1..=k_max {
        for outer in 0..=level_max {
            probes += 1;
            match q_algebra_probe(k, outer) {
                Ok(p) if p.matches_reciprocal && p.annihilates_e_k => {}
                Ok(p) => v.push(|| format!("k={k}, N={outer}: norm {:?}, annihilates={}", p.norm_exact, p.annihilates_e_k)),
                Err(e) => v.push(|| format!("k={k}, N={outer}: {e}")),
            }
        }
    }
    v.into_check(
        9,
        "non-Q-algebra demonstration",
        json!({"kMax": k_max, "levelMax": level_max, "probes": probes}),
    )
}

fn seeded_checks(seed: u64, scale: &Scale) -> Vec<Check> {
    vec![
        check_lp_equivalence(seed, scale.lp_samples),
        check_seminorm_identity(seed, scale.seminorm_samples),
        check_centralizers(seed, scale.centralizer_samples),
        check_diagonal(seed, scale.diagonal_samples),
    ]
}

/// Reruns the seeded checks and compares their serialized bytes.
pub fn check_determinism(seed: u64, scale: &Scale, first: &[Check]) -> Check {
    let again = seeded_checks(seed, scale);
    let mut v = Violations::new();
    let a = to_canonical_json(first);
    let b = to_canonical_json(&again);
    if a != b {
        let at = a.bytes().zip(b.bytes()).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
        v.push(|| format!("seeded checks differ at byte {at}"));
    }
    v.into_check(
        10,
        "determinism",
        json!({"seed": seed, "comparedBytes": a.len()}),
    )
}

/// Sample counts; [`Scale::FULL`] matches the acceptance criteria.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scale {
    pub lp_samples: usize,
    pub seminorm_samples: usize,
    pub koethe_index: usize,
    pub koethe_level: u32,
    pub centralizer_samples: usize,
    pub diagonal_samples: usize,
    pub interp_t: usize,
    pub nonq_k: usize,
    pub nonq_level: u32,
}

impl Scale {
    pub const FULL: Scale = Scale {
        lp_samples: 1000,
        seminorm_samples: 200,
        koethe_index: 200,
        koethe_level: 6,
        centralizer_samples: 50,
        diagonal_samples: 200,
        interp_t: INTERP_T,
        nonq_k: 1000,
        nonq_level: 4,
    };
}

pub fn run_suite(seed: u64) -> SuiteReport {
    run_suite_scaled(seed, &Scale::FULL)
}

pub fn run_suite_scaled(seed: u64, scale: &Scale) -> SuiteReport {
    let seeded = seeded_checks(seed, scale);
    let determinism = check_determinism(seed, scale, &seeded);
    let mut seeded = seeded.into_iter();
    let mut next = || seeded.next().expect("four seeded checks");
    let checks = vec![
        check_nuclearity(),
        next(),
        next(),
        check_koethe(scale.koethe_index, scale.koethe_level),
        next(),
        check_membership(),
        next(),
        check_interpolation(scale.interp_t),
        check_non_q(scale.nonq_k, scale.nonq_level),
        determinism,
    ];
    SuiteReport::new(seed, checks)
}
