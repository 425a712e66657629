//! Growth envelopes and membership in the four matrix spaces.

pub mod audit;
pub mod decide;
pub mod envelope;
pub mod oracle;
mod parse;
pub mod product;

pub use audit::{audit_case, audit_decision, curated_suite, CaseAudit, SoundnessCheck};
pub use decide::{
    decide_membership, decide_membership_with_cap, sup_bound, AffineWitness, BoundNorm, Certificate,
    Decision, Growth, Ray, Refutation, Space, DEFAULT_CERT_CAP,
};
pub use envelope::{parse_q, EnvelopeError, EnvelopeMatrix, EnvelopeTerm, Region, Q};
pub use oracle::{growth_oracle, OracleConfig, OracleError, OracleReport, Probe, Verdict};
pub use product::{envelope_adjoint, envelope_product_bound, NotDerivable};
