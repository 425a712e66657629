//! Command-line front end.
//!
//! Every command writes one JSON document (or CSV / text on request) to
//! stdout. Exit codes: 0 when every assertion in the report holds, 1 when
//! one fails, 2 for invalid input.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::interpolation::{choose_params, small_theta_probe, verify_estimate, DEFAULT_PROBE_GRID};
use crate::io::{matrix_to_csv, matrix_to_json, read_bounded_set, read_matrix, read_vector, vector_to_json};
use crate::matrices::{matrix_norm_p, seminorm_p, seminorm_q, NormP, TruncMatrix};
use crate::membership::envelope::{format_q, parse_q, Q};
use crate::membership::{
    decide_membership, growth_oracle, Certificate, Decision, EnvelopeMatrix, OracleConfig, Probe, Ray, Refutation,
    Space,
};
use crate::multiplier::{
    diag_embed, diag_invert, diag_project, essential_ideal_witness, law_residual, make_centralizer,
    merge_projection, q_algebra_probe, reconstruct, reconstruct_adjoint, DiagonalElement, Inversion,
};
use crate::multiplier::diagonal::LevelNorms;
use crate::random::{random_c64, random_matrix, seeded_rng, SeededRng};
use crate::report::to_canonical_json;
use crate::scalar::C64;
use crate::sequences::SeqVector;
use crate::suite::{homomorphism_residuals, run_suite};
use crate::weights::{
    check_koethe_axioms, compactness_ratio, inner_step_closed_form, nuclearity_sum, paper_shift_closed_form,
    ratio_to_f64, Grid, Shift, Violation, WeightFamily, WeightKind, NUCLEARITY_LIMIT,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Violations listed in full before truncation.
const LISTED: usize = 50;

#[derive(Parser, Debug)]
#[command(name = "ncschwartz", version, about = "Weighted matrix algebras: norms, membership, multipliers")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Truncation size; each command documents its default.
    #[arg(long = "T", global = true, env = "NCS_T")]
    pub t: Option<usize>,
    /// Largest outer level N scanned.
    #[arg(long = "N-max", global = true, env = "NCS_N_MAX")]
    pub outer_max: Option<u32>,
    /// Largest inner level n scanned.
    #[arg(long = "n-max", global = true, env = "NCS_n_MAX")]
    pub inner_max: Option<u32>,
    #[arg(long, global = true, env = "NCS_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Overrides the command's tolerance.
    #[arg(long, global = true, env = "NCS_TOL")]
    pub tol: Option<f64>,
    #[arg(long, global = true, env = "NCS_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Matrix input, JSON or `.csv`.
    #[arg(long, global = true, env = "NCS_INPUT")]
    pub input: Option<PathBuf>,
    /// MS, Ls, Lsprime or S; all four when omitted.
    #[arg(long, global = true, env = "NCS_SPACE")]
    pub space: Option<String>,
    /// Weight family: A, B, Bprime, D, Kinf, SeqS, SeqSprime.
    #[arg(long, global = true, env = "NCS_FAMILY", default_value = "A")]
    pub family: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Koethe weights.
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Weighted norms and seminorms of a matrix.
    #[command(subcommand)]
    Norm(NormCmd),
    /// Membership of envelope matrices.
    #[command(subcommand)]
    Member(MemberCmd),
    /// Double centralizers.
    #[command(subcommand)]
    Centralizer(CentralizerCmd),
    /// The diagonal subalgebra.
    #[command(subcommand)]
    Diag(DiagCmd),
    /// Upper part of --input, strict lower part of --other.
    Merge {
        #[arg(long)]
        other: PathBuf,
    },
    /// Three-level interpolation estimate.
    #[command(subcommand)]
    Interp(InterpCmd),
    /// Demonstrations.
    #[command(subcommand)]
    Demo(DemoCmd),
    /// The full acceptance battery.
    Suite,
}

#[derive(Subcommand, Debug)]
pub enum WeightsCmd {
    /// One weight value.
    Eval {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long = "N")]
        outer: u32,
        #[arg(long = "n")]
        inner: u32,
    },
    /// Positivity and monotonicity on [1,T]^2 x [0,N-max] x [0,n-max] (T=50, levels 6).
    Check,
    /// Compactness ratios against their closed forms (T=50, levels 6, tol 1e-12).
    Ratios {
        #[arg(long, value_enum, default_value_t = ShiftArg::Paper)]
        shift: ShiftArg,
    },
    /// sum_{i,j<=T} (ij)^-2 against pi^4/36 (T=2000, tol 1e-3).
    Nuclearity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShiftArg {
    /// D(N,n+1)/D(N,n)
    Inner,
    /// A(N,n+2)/A(N+2,n)
    Paper,
}

#[derive(Subcommand, Debug)]
pub enum NormCmd {
    /// ||x||_{N,n,p} of --input.
    Matrix {
        #[arg(long = "N")]
        outer: u32,
        #[arg(long = "n")]
        inner: u32,
        /// 1, 2 or inf.
        #[arg(long, default_value = "inf")]
        p: String,
    },
    /// Both seminorm forms of --input on a bounded set (tol 1e-10).
    Seminorm {
        #[arg(long)]
        set: PathBuf,
        #[arg(long = "n")]
        inner: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum MemberCmd {
    /// Certificate or refutation for each space.
    Decide {
        #[arg(long)]
        envelope: String,
    },
    /// Empirical growth of the weighted envelope.
    Oracle {
        #[arg(long)]
        envelope: String,
        #[arg(long = "N")]
        outer: u32,
        #[arg(long = "n")]
        inner: u32,
        #[arg(long, value_enum, default_value_t = ProbeArg::Box)]
        probe: ProbeArg,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProbeArg {
    Box,
    FirstColumn,
    FirstRow,
    Diagonal,
}

#[derive(Subcommand, Debug)]
pub enum CentralizerCmd {
    /// x L(y) = R(x) y for the pair of --input or a random matrix (T=8, tol 1e-12).
    Law,
    /// Rebuild u from its pair with e_1 and (e_1+e_2)/sqrt2 (T=32, tol 1e-12).
    Roundtrip,
    /// Pair operations against matrix operations (T=16, tol 1e-12).
    Algebra,
}

#[derive(Subcommand, Debug)]
pub enum DiagCmd {
    /// Diagonal part of --input and its l1 norms up to N-max = n-max (4).
    Project,
    /// Diagonal matrix of a vector and its l1 norm.
    Embed {
        #[arg(long)]
        vector: PathBuf,
        #[arg(long = "N")]
        outer: u32,
        #[arg(long = "n")]
        inner: u32,
    },
    /// Inverse of a diagonal envelope, or of the diagonal of --input.
    Invert {
        #[arg(long)]
        envelope: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum InterpCmd {
    /// Chosen parameters and the grid maximum of the ratio (T=10000).
    Verify {
        #[arg(long = "N")]
        outer_n: u32,
        #[arg(long = "K")]
        outer_k: u32,
        #[arg(long = "m")]
        inner_m: u32,
        #[arg(long)]
        theta: String,
    },
    /// Growth along (1,t) below the threshold.
    Probe {
        #[arg(long = "N")]
        outer_n: u32,
        #[arg(long = "M")]
        outer_m: u32,
        #[arg(long = "K")]
        outer_k: u32,
        #[arg(long)]
        theta: String,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
    },
}

#[derive(Subcommand, Debug)]
pub enum DemoCmd {
    /// ||e_kk||_{N,N+1,inf} = 1/k while I - e_kk kills e_k.
    Nonq {
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long = "N", default_value_t = 0)]
        outer: u32,
    },
}

/// A rendered report and whether its assertions held.
pub struct Outcome {
    pub json: String,
    pub pass: bool,
    pub csv: Option<String>,
}

impl Outcome {
    fn new<T: Serialize>(report: &T, pass: bool) -> Self {
        Outcome {
            json: to_canonical_json(report),
            pass,
            csv: None,
        }
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad<E: std::fmt::Display>(e: E) -> InputError {
    InputError(e.to_string())
}

type CliResult = Result<Outcome, InputError>;

impl GlobalOpts {
    fn family(&self) -> Result<WeightFamily, InputError> {
        Ok(WeightFamily::new(self.family.parse::<WeightKind>().map_err(bad)?))
    }

    fn spaces(&self) -> Result<Vec<Space>, InputError> {
        match &self.space {
            Some(s) => Ok(vec![s.parse().map_err(bad)?]),
            None => Ok(Space::ALL.to_vec()),
        }
    }

    fn input_matrix(&self) -> Result<TruncMatrix<C64>, InputError> {
        let path = self.input.as_ref().ok_or_else(|| InputError("--input is required".into()))?;
        read_matrix(path).map_err(bad)
    }

    fn tol(&self, default: f64) -> Result<f64, InputError> {
        match self.tol {
            Some(t) if t.is_nan() || t < 0.0 => Err(InputError(format!("--tol must be non-negative, got {t}"))),
            Some(t) => Ok(t),
            None => Ok(default),
        }
    }

    fn size(&self, default: usize) -> Result<usize, InputError> {
        match self.t {
            Some(0) => Err(InputError("--T must be positive".into())),
            Some(t) => Ok(t),
            None => Ok(default),
        }
    }
}

fn envelope(s: &str) -> Result<EnvelopeMatrix, InputError> {
    EnvelopeMatrix::parse(s).map_err(|e| InputError(format!("envelope `{s}`: {e}")))
}

fn rational(s: &str) -> Result<Q, InputError> {
    parse_q(s).map_err(|e| InputError(format!("`{s}`: {e}")))
}

fn list_violations(vs: &[Violation]) -> Vec<String> {
    vs.iter()
        .take(LISTED)
        .map(|v| format!("(i={}, j={}, N={}, n={}): {:?}", v.i, v.j, v.outer, v.inner, v.kind))
        .collect()
}

fn weights(g: &GlobalOpts, cmd: &WeightsCmd) -> CliResult {
    match cmd {
        WeightsCmd::Eval { i, j, outer, inner } => {
            let fam = g.family()?.with_level_cap(u32::MAX);
            let w = fam.eval(*i, *j, *outer, *inner).map_err(bad)?;
            #[derive(Serialize)]
            struct R {
                family: String,
                i: usize,
                j: usize,
                #[serde(rename = "N")]
                outer: u32,
                #[serde(rename = "n")]
                inner: u32,
                value: f64,
                exact: Option<String>,
            }
            let r = R {
                family: fam.kind.to_string(),
                i: *i,
                j: *j,
                outer: *outer,
                inner: *inner,
                value: w.to_f64(),
                exact: w.exact().map(|e| e.to_string()),
            };
            Ok(Outcome::new(&r, true))
        }
        WeightsCmd::Check => {
            let fam = g.family()?;
            let grid = Grid {
                i_max: g.size(50)?,
                j_max: g.size(50)?,
                outer_max: g.outer_max.unwrap_or(6),
                inner_max: g.inner_max.unwrap_or(6),
            };
            let r = check_koethe_axioms(&fam, &grid);
            #[derive(Serialize)]
            struct R {
                family: String,
                grid: Grid,
                checked: usize,
                #[serde(rename = "violationCount")]
                violation_count: usize,
                violations: Vec<String>,
                pass: bool,
            }
            let out = R {
                family: fam.kind.to_string(),
                grid,
                checked: r.checked,
                violation_count: r.violations.len(),
                violations: list_violations(&r.violations),
                pass: r.pass(),
            };
            Ok(Outcome::new(&out, out.pass))
        }
        WeightsCmd::Ratios { shift } => {
            let t = g.size(50)?;
            let outer_max = g.outer_max.unwrap_or(6);
            let inner_max = g.inner_max.unwrap_or(6);
            let tol = g.tol(1e-12)?;
            let (kind, shift, inner_min) = match shift {
                ShiftArg::Inner => (WeightKind::D, Shift::InnerStep, 1),
                ShiftArg::Paper => (WeightKind::A, Shift::PaperShift, 0),
            };
            let fam = WeightFamily::new(kind);
            let mut worst = (0.0f64, (1, 1, 0, inner_min));
            for i in 1..=t {
                for j in 1..=t {
                    for outer in 0..=outer_max {
                        for inner in inner_min..=inner_max {
                            let got = compactness_ratio(&fam, i, j, outer, inner, shift).map_err(bad)?.to_f64();
                            let want = match shift {
                                Shift::InnerStep => inner_step_closed_form(i, j, inner),
                                Shift::PaperShift => ratio_to_f64(&paper_shift_closed_form(i, j)),
                            };
                            let rel = (got - want).abs() / want;
                            if rel > worst.0 {
                                worst = (rel, (i, j, outer, inner));
                            }
                        }
                    }
                }
            }
            #[derive(Serialize)]
            struct R {
                family: String,
                shift: Shift,
                #[serde(rename = "T")]
                t: usize,
                #[serde(rename = "maxRelErr")]
                max_rel_err: f64,
                /// `(i, j, N, n)` of the largest error.
                worst: (usize, usize, u32, u32),
                tol: f64,
                pass: bool,
            }
            let r = R {
                family: kind.to_string(),
                shift,
                t,
                max_rel_err: worst.0,
                worst: worst.1,
                tol,
                pass: worst.0 <= tol,
            };
            Ok(Outcome::new(&r, r.pass))
        }
        WeightsCmd::Nuclearity => {
            let t = g.size(2000)?;
            let tol = g.tol(1e-3)?;
            let sum = nuclearity_sum(t);
            #[derive(Serialize)]
            struct R {
                #[serde(rename = "T")]
                t: usize,
                sum: f64,
                target: f64,
                gap: f64,
                tol: f64,
                pass: bool,
            }
            let gap = (sum - NUCLEARITY_LIMIT).abs();
            let r = R {
                t,
                sum,
                target: NUCLEARITY_LIMIT,
                gap,
                tol,
                pass: gap <= tol,
            };
            Ok(Outcome::new(&r, r.pass))
        }
    }
}

fn norm(g: &GlobalOpts, cmd: &NormCmd) -> CliResult {
    let x = g.input_matrix()?;
    match cmd {
        NormCmd::Matrix { outer, inner, p } => {
            let fam = g.family()?;
            let np: NormP = p.parse().map_err(bad)?;
            let value = matrix_norm_p(&x, &fam, *outer, *inner, np).map_err(bad)?;
            #[derive(Serialize)]
            struct R {
                family: String,
                #[serde(rename = "T")]
                t: usize,
                #[serde(rename = "N")]
                outer: u32,
                #[serde(rename = "n")]
                inner: u32,
                p: NormP,
                norm: f64,
            }
            let r = R {
                family: fam.kind.to_string(),
                t: x.dim(),
                outer: *outer,
                inner: *inner,
                p: np,
                norm: value,
            };
            Ok(Outcome::new(&r, true))
        }
        NormCmd::Seminorm { set, inner } => {
            let b = read_bounded_set(set).map_err(bad)?;
            let tol = g.tol(1e-10)?;
            let p = seminorm_p(&x, *inner, &b).map_err(bad)?;
            let q = seminorm_q(&x, *inner, &b).map_err(bad)?;
            #[derive(Serialize)]
            struct R {
                #[serde(rename = "n")]
                inner: u32,
                p: f64,
                q: f64,
                gap: f64,
                tol: f64,
                pass: bool,
            }
            let gap = (p - q).abs();
            let r = R {
                inner: *inner,
                p,
                q,
                gap,
                tol,
                pass: gap <= tol * (1.0 + p.max(q)),
            };
            Ok(Outcome::new(&r, r.pass))
        }
    }
}

#[derive(Serialize)]
struct SpaceDecision {
    space: Space,
    member: bool,
    witness: Option<String>,
    summary: String,
    detail: Decision,
}

fn member(g: &GlobalOpts, cmd: &MemberCmd) -> CliResult {
    match cmd {
        MemberCmd::Decide { envelope: lit } => {
            let x = envelope(lit)?;
            let decisions: Vec<SpaceDecision> = g
                .spaces()?
                .into_iter()
                .map(|space| {
                    let d = decide_membership(&x, space);
                    SpaceDecision {
                        space,
                        member: d.is_member(),
                        witness: d.certificate().map(|c: &Certificate| c.witness.to_string()),
                        summary: d.to_string(),
                        detail: d,
                    }
                })
                .collect();
            #[derive(Serialize)]
            struct R {
                envelope: String,
                decisions: Vec<SpaceDecision>,
            }
            Ok(Outcome::new(
                &R {
                    envelope: x.to_string(),
                    decisions,
                },
                true,
            ))
        }
        MemberCmd::Oracle {
            envelope: lit,
            outer,
            inner,
            probe,
        } => {
            let x = envelope(lit)?;
            let fam = match &g.space {
                Some(s) => s.parse::<Space>().map_err(bad)?.family(),
                None => g.family()?.with_level_cap(u32::MAX),
            };
            let probe = match probe {
                ProbeArg::Box => Probe::Box,
                ProbeArg::FirstColumn => Probe::Ray(Ray::FirstColumn),
                ProbeArg::FirstRow => Probe::Ray(Ray::FirstRow),
                ProbeArg::Diagonal => Probe::Ray(Ray::Diagonal),
            };
            let mut cfg = OracleConfig::default();
            if let Some(t) = g.t {
                cfg.grid.retain(|&s| s < t);
                cfg.grid.push(t);
            }
            let r = growth_oracle(&x, &fam, *outer, *inner, probe, &cfg).map_err(bad)?;
            #[derive(Serialize)]
            struct R<T> {
                envelope: String,
                family: String,
                #[serde(rename = "N")]
                outer: u32,
                #[serde(rename = "n")]
                inner: u32,
                probe: Probe,
                report: T,
            }
            Ok(Outcome::new(
                &R {
                    envelope: x.to_string(),
                    family: fam.kind.to_string(),
                    outer: *outer,
                    inner: *inner,
                    probe,
                    report: r,
                },
                true,
            ))
        }
    }
}

/// `--input`, or a seeded random matrix of size `--T`.
fn subject(g: &GlobalOpts, rng: &mut SeededRng, default_t: usize) -> Result<(TruncMatrix<C64>, &'static str), InputError> {
    if g.input.is_some() {
        Ok((g.input_matrix()?, "input"))
    } else {
        Ok((random_matrix(rng, g.size(default_t)?), "random"))
    }
}

fn centralizer(g: &GlobalOpts, cmd: &CentralizerCmd) -> CliResult {
    let mut rng = seeded_rng(g.seed);
    let tol = g.tol(1e-12)?;
    match cmd {
        CentralizerCmd::Law => {
            let (u, source) = subject(g, &mut rng, 8)?;
            let dim = u.dim();
            let xs: Vec<_> = (0..8).map(|_| random_matrix(&mut rng, dim)).collect();
            let ys: Vec<_> = (0..8).map(|_| random_matrix(&mut rng, dim)).collect();
            let p = make_centralizer(&u);
            let residual = law_residual(&p, &xs, &ys).map_err(bad)?;
            let mut scale = 1.0f64;
            for (x, y) in xs.iter().zip(&ys) {
                scale = scale.max(1.0 + x.mul(&u).and_then(|xu| xu.mul(y)).map_err(bad)?.max_abs());
            }
            #[derive(Serialize)]
            struct R {
                #[serde(rename = "T")]
                t: usize,
                source: &'static str,
                #[serde(rename = "lawResidual")]
                law_residual: f64,
                relative: f64,
                #[serde(rename = "essentialWitness")]
                essential_witness: Option<String>,
                tol: f64,
                pass: bool,
            }
            let relative = residual / scale;
            let r = R {
                t: dim,
                source,
                law_residual: residual,
                relative,
                essential_witness: essential_ideal_witness(&u)
                    .map_err(bad)?
                    .map(|k| format!("e_{k} (x) e_{k}")),
                tol,
                pass: relative <= tol,
            };
            Ok(Outcome::new(&r, r.pass))
        }
        CentralizerCmd::Roundtrip => {
            let (u, source) = subject(g, &mut rng, 32)?;
            let dim = u.dim();
            let p = make_centralizer(&u);
            let mut units = vec![("e_1", SeqVector::unit(1))];
            if dim >= 2 {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                units.push((
                    "(e_1+e_2)/sqrt2",
                    SeqVector::from_entries([(1, C64::new(r, 0.0)), (2, C64::new(r, 0.0))]).map_err(bad)?,
                ));
            }
            #[derive(Serialize)]
            struct Row {
                e: &'static str,
                matrix: f64,
                adjoint: f64,
            }
            let mut rows = Vec::new();
            for (name, e) in &units {
                rows.push(Row {
                    e: name,
                    matrix: reconstruct(&p, e).map_err(bad)?.max_abs_diff(&u).map_err(bad)?,
                    adjoint: reconstruct_adjoint(&p, e)
                        .map_err(bad)?
                        .max_abs_diff(&u.adjoint())
                        .map_err(bad)?,
                });
            }
            #[derive(Serialize)]
            struct R {
                #[serde(rename = "T")]
                t: usize,
                source: &'static str,
                residuals: Vec<Row>,
                tol: f64,
                pass: bool,
            }
            let pass = rows.iter().all(|r| r.matrix <= tol && r.adjoint <= tol);
            Ok(Outcome::new(
                &R {
                    t: dim,
                    source,
                    residuals: rows,
                    tol,
                    pass,
                },
                pass,
            ))
        }
        CentralizerCmd::Algebra => {
            let (u, source) = subject(g, &mut rng, 16)?;
            let dim = u.dim();
            let w = random_matrix(&mut rng, dim);
            let a = random_c64(&mut rng);
            let probes: Vec<_> = (0..4).map(|_| random_matrix(&mut rng, dim)).collect();
            #[derive(Serialize)]
            struct Row {
                op: &'static str,
                residual: f64,
            }
            let rows: Vec<Row> = homomorphism_residuals(&u, &w, a, &probes)
                .into_iter()
                .map(|(op, residual)| Row { op, residual })
                .collect();
            #[derive(Serialize)]
            struct R {
                #[serde(rename = "T")]
                t: usize,
                source: &'static str,
                residuals: Vec<Row>,
                tol: f64,
                pass: bool,
            }
            let pass = rows.iter().all(|r| r.residual <= tol);
            Ok(Outcome::new(
                &R {
                    t: dim,
                    source,
                    residuals: rows,
                    tol,
                    pass,
                },
                pass,
            ))
        }
    }
}

#[derive(Serialize)]
struct InversionReport {
    status: &'static str,
    inverse: Option<Value>,
    witness: Option<String>,
    certificate: Option<Certificate>,
    index: Option<usize>,
    refutation: Option<Refutation>,
}

fn inversion_report(inv: Inversion<C64>) -> InversionReport {
    let mut r = InversionReport {
        status: "",
        inverse: None,
        witness: None,
        certificate: None,
        index: None,
        refutation: None,
    };
    match inv {
        Inversion::Invertible { inverse, certificate } => {
            r.status = "invertible";
            r.inverse = Some(match inverse {
                DiagonalElement::Finite { entries, .. } => vector_to_json(&entries),
                DiagonalElement::Envelope(t) => Value::String(EnvelopeMatrix::single(t).to_string()),
            });
            r.witness = certificate.as_ref().map(|c| c.witness.to_string());
            r.certificate = certificate;
        }
        Inversion::NotInvertible { index } => {
            r.status = "notInvertible";
            r.index = Some(index);
        }
        Inversion::NotInvertibleInAlgebra { refutation } => {
            r.status = "notInvertibleInAlgebra";
            r.refutation = Some(refutation);
        }
    }
    r
}

fn diag(g: &GlobalOpts, cmd: &DiagCmd) -> CliResult {
    match cmd {
        DiagCmd::Project => {
            let x = g.input_matrix()?;
            let level = g.outer_max.or(g.inner_max).unwrap_or(4);
            let tol = g.tol(1e-12)?;
            let p = diag_project(&x, &g.family()?, level).map_err(bad)?;
            let matrix = p.diagonal.to_matrix().expect("finite projection");
            #[derive(Serialize)]
            struct R<'a> {
                #[serde(rename = "T")]
                t: usize,
                idempotent: bool,
                contracts: bool,
                norms: &'a [LevelNorms],
                diagonal: Value,
                tol: f64,
                pass: bool,
            }
            let contracts = p.contracts(tol);
            let r = R {
                t: x.dim(),
                idempotent: p.idempotent,
                contracts,
                norms: &p.norms,
                diagonal: vector_to_json(&x.diagonal()),
                tol,
                pass: p.idempotent && contracts,
            };
            Ok(Outcome::new(&r, r.pass).with_csv(matrix_to_csv(&matrix)))
        }
        DiagCmd::Embed { vector, outer, inner } => {
            let xi = read_vector(vector).map_err(bad)?;
            let dim = g.size(xi.support_max().max(1))?;
            let e = diag_embed(&xi, dim, *outer, *inner).map_err(bad)?;
            #[derive(Serialize)]
            struct R {
                #[serde(rename = "T")]
                t: usize,
                #[serde(rename = "N")]
                outer: u32,
                #[serde(rename = "n")]
                inner: u32,
                #[serde(rename = "closedForm")]
                closed_form: f64,
                norm: f64,
                pass: bool,
            }
            let r = R {
                t: dim,
                outer: *outer,
                inner: *inner,
                closed_form: e.closed_form,
                norm: e.norm,
                pass: e.closed_form == e.norm,
            };
            Ok(Outcome::new(&r, r.pass).with_csv(matrix_to_csv(&e.matrix)))
        }
        DiagCmd::Invert { envelope: lit } => {
            let element = match lit {
                Some(s) => DiagonalElement::from_envelope(&envelope(s)?).map_err(bad)?,
                None => {
                    let x = g.input_matrix()?;
                    DiagonalElement::finite(x.dim(), x.diagonal()).map_err(bad)?
                }
            };
            Ok(Outcome::new(&inversion_report(diag_invert(&element)), true))
        }
    }
}

fn merge(g: &GlobalOpts, other: &std::path::Path) -> CliResult {
    let x = g.input_matrix()?;
    let y = read_matrix(other).map_err(bad)?;
    let (m, _) = merge_projection(&x, &y).map_err(bad)?;
    let idempotent = merge_projection(&m, &m).map_err(bad)?.0 == m;
    #[derive(Serialize)]
    struct R {
        #[serde(rename = "T")]
        t: usize,
        idempotent: bool,
        merged: Value,
        pass: bool,
    }
    let r = R {
        t: m.dim(),
        idempotent,
        merged: matrix_to_json(&m),
        pass: idempotent,
    };
    Ok(Outcome::new(&r, r.pass).with_csv(matrix_to_csv(&m)))
}

fn interp(g: &GlobalOpts, cmd: &InterpCmd) -> CliResult {
    match cmd {
        InterpCmd::Verify {
            outer_n,
            outer_k,
            inner_m,
            theta,
        } => {
            let p = choose_params(*outer_n, *outer_k, *inner_m, rational(theta)?).map_err(bad)?;
            let r = verify_estimate(&p, g.size(crate::suite::INTERP_T)?).map_err(bad)?;
            Ok(Outcome::new(&r, r.pass))
        }
        InterpCmd::Probe {
            outer_n,
            outer_m,
            outer_k,
            theta,
            grid,
        } => {
            let grid = grid.clone().unwrap_or_else(|| DEFAULT_PROBE_GRID.to_vec());
            let r = small_theta_probe(*outer_n, *outer_m, *outer_k, rational(theta)?, &grid).map_err(bad)?;
            Ok(Outcome::new(&r, r.pass))
        }
    }
}

fn demo(cmd: &DemoCmd) -> CliResult {
    match cmd {
        DemoCmd::Nonq { k, outer } => {
            let p = q_algebra_probe(*k, *outer).map_err(bad)?;
            #[derive(Serialize)]
            struct R {
                k: usize,
                #[serde(rename = "N")]
                outer: u32,
                #[serde(rename = "n")]
                inner: u32,
                seminorm: f64,
                exact: String,
                #[serde(rename = "singularWitness")]
                singular_witness: String,
                pass: bool,
            }
            let (num, den) = p.norm_exact;
            let pass = p.matches_reciprocal && p.annihilates_e_k;
            let r = R {
                k: p.k,
                outer: p.outer,
                inner: p.inner,
                seminorm: p.norm,
                exact: format_q(&Q::new(num.into(), den.into())),
                singular_witness: format!("e_{}", p.k),
                pass,
            };
            Ok(Outcome::new(&r, pass))
        }
    }
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> CliResult {
    let g = &cli.global;
    match &cli.command {
        Command::Weights(c) => weights(g, c),
        Command::Norm(c) => norm(g, c),
        Command::Member(c) => member(g, c),
        Command::Centralizer(c) => centralizer(g, c),
        Command::Diag(c) => diag(g, c),
        Command::Merge { other } => merge(g, other),
        Command::Interp(c) => interp(g, c),
        Command::Demo(c) => demo(c),
        Command::Suite => {
            let r = run_suite(g.seed);
            Ok(Outcome::new(&r, r.pass))
        }
    }
}

/// `path: value` lines for the leaves of a JSON document.
pub fn flatten_text(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&p, x, out);
                }
            }
            Value::Array(a) if !a.is_empty() => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            leaf => {
                out.push_str(prefix);
                out.push_str(": ");
                match leaf {
                    Value::String(s) => out.push_str(s),
                    other => out.push_str(&other.to_string()),
                }
                out.push('\n');
            }
        }
    }
    let mut out = String::new();
    walk("", v, &mut out);
    out
}

/// Renders the outcome in the requested format; `Err` when the format does
/// not apply to this command.
pub fn render(outcome: &Outcome, format: Format) -> Result<String, InputError> {
    match format {
        Format::Json => Ok(outcome.json.clone()),
        Format::Text => {
            let v: Value = serde_json::from_str(&outcome.json).map_err(bad)?;
            Ok(flatten_text(&v))
        }
        Format::Csv => outcome
            .csv
            .clone()
            .ok_or_else(|| InputError("csv output is only available for matrix results".into())),
    }
}

/// Parses `args`, runs, prints, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli).and_then(|o| render(&o, cli.global.format).map(|s| (s, o.pass))) {
        Ok((text, pass)) => {
            print!("{text}");
            if pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
