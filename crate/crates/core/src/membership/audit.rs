//! Curated envelopes and numeric cross-checks of the decision procedure.

use serde::Serialize;

use super::decide::{decide_membership, Decision, Space};
use super::envelope::EnvelopeMatrix;
use super::oracle::{growth_oracle, OracleConfig, OracleError, Probe};

/// Inner levels swept when checking a refutation.
pub const REFUTATION_INNER_MAX: u32 = 16;

/// Every case is attained: the matrix with exactly these entries realizes it.
pub const CURATED: [(&str, &str); 34] = [
    ("identity", "identity"),
    ("diag j^5", "diag:j^5"),
    ("diag j^-2", "diag:j^-2"),
    ("diag j", "diag:j^1"),
    ("diag j^-1/2", "diag:j^-1/2"),
    ("diag j^7/2", "diag:j^7/2"),
    ("diag 2^-j", "diag:2^-j"),
    ("full (ij)^-3", "term(min^-3, max^-3)"),
    ("full (ij)^-5/2", "term(min^-5/2, max^-5/2)"),
    ("full 2^-max", "term(rho=1/2)"),
    ("full ones", "term(min^0, max^0)"),
    ("full (min/max)^2", "term(min^2, max^-2)"),
    ("full min^-4 max^-1", "term(min^-4, max^-1)"),
    ("full 3 min^2 max 3^-max", "term(c=3, min^2, max^1, rho=1/3)"),
    ("full min max^-2 3^-max", "term(min^1, max^-2, rho=1/3)"),
    ("upper max^-2", "term(max^-2, upper)"),
    ("upper min^3 max^-5", "term(min^3, max^-5, upper)"),
    ("upper max^3", "term(max^3, upper)"),
    ("upper (ij)^-1 2^-max", "term(min^-1, max^-1, rho=1/2, upper)"),
    ("lower min^-2 max^-4", "term(min^-2, max^-4, lower)"),
    ("lower min max^-3", "term(min^1, max^-3, lower)"),
    ("lower max^-2", "term(max^-2, lower)"),
    ("band 2 ones", "term(band=2)"),
    ("band 1 min max", "term(min^1, max^1, band=1)"),
    ("band 3 min^-1", "term(min^-1, band=3)"),
    ("band 1 j^-3 with patch", "term(min^-3, band=1) + patch(5,1)=10"),
    ("band 2 4^-max", "term(max^2, rho=1/4, band=2)"),
    ("upper/lower split", "term(max^-1, upper) + term(min^-1, lower)"),
    ("diag j^2 plus (ij)^-2", "diag:j^2 + term(min^-2, max^-2)"),
    ("identity with far patch", "identity + patch(3,7)=100"),
    ("matrix unit e12", "patch(1,2)=1"),
    ("upper max^-6 lower max^-1", "term(max^-6, upper) + term(max^-1, lower)"),
    ("lower min^-3 max^2", "term(min^-3, max^2, lower)"),
    ("full max^-5", "term(max^-5)"),
];

pub fn curated_suite() -> Vec<(&'static str, EnvelopeMatrix)> {
    CURATED
        .iter()
        .map(|&(name, lit)| (name, EnvelopeMatrix::parse(lit).expect("curated literal")))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SoundnessCheck {
    pub space: Space,
    pub decision: String,
    /// Largest box slope for a certificate, smallest ray slope for a refutation.
    pub extreme_slope: f64,
    /// Certificate: sampled sup never exceeds the stated bound.
    pub bound_holds: bool,
    pub pass: bool,
}

/// Runs the oracle against a decision: box probes at `(N, n(N))` for a
/// certificate, ray probes at the failing level for every `n <= 16` for a
/// refutation.
pub fn audit_decision(
    x: &EnvelopeMatrix,
    decision: &Decision,
    cfg: &OracleConfig,
) -> Result<SoundnessCheck, OracleError> {
    match decision {
        Decision::Member(cert) => {
            let family = cert.space.family();
            let mut worst = f64::NEG_INFINITY;
            let mut bound_holds = true;
            for outer in 0..=cert.cap() {
                let inner = cert.witness.eval(outer);
                let rep = growth_oracle(x, &family, outer, inner, Probe::Box, cfg)?;
                worst = worst.max(rep.slope);
                let bound = cert.bound(outer).unwrap_or(f64::INFINITY);
                let top = rep.log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if top > bound.ln() + 1e-9 {
                    bound_holds = false;
                }
            }
            Ok(SoundnessCheck {
                space: cert.space,
                decision: decision.to_string(),
                extreme_slope: worst,
                bound_holds,
                pass: bound_holds && worst <= cfg.bounded_max,
            })
        }
        Decision::NotMember(r) => {
            let family = r.space.family();
            let mut least = f64::INFINITY;
            for inner in 0..=REFUTATION_INNER_MAX {
                let rep = growth_oracle(x, &family, r.level, inner, Probe::Ray(r.ray), cfg)?;
                least = least.min(rep.slope);
            }
            Ok(SoundnessCheck {
                space: r.space,
                decision: decision.to_string(),
                extreme_slope: least,
                bound_holds: true,
                pass: least >= r.growth.exponent_f64() - 0.1,
            })
        }
    }
}

/// Inclusions `S -> MS -> Ls, Lsprime` that the decisions contradict.
pub fn inclusion_violations(decisions: &[(Space, bool)]) -> Vec<String> {
    let member = |s: Space| decisions.iter().any(|&(t, m)| t == s && m);
    let mut out = Vec::new();
    let chain = [
        (Space::S, Space::MS),
        (Space::S, Space::Ls),
        (Space::S, Space::Lsprime),
        (Space::MS, Space::Ls),
        (Space::MS, Space::Lsprime),
    ];
    for (small, big) in chain {
        if member(small) && !member(big) {
            out.push(format!("member of {small} but not of {big}"));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseAudit {
    pub name: String,
    pub envelope: String,
    pub checks: Vec<SoundnessCheck>,
    pub inclusion_violations: Vec<String>,
    pub pass: bool,
}

pub fn audit_case(name: &str, x: &EnvelopeMatrix, cfg: &OracleConfig) -> Result<CaseAudit, OracleError> {
    let mut checks = Vec::new();
    let mut memberships = Vec::new();
    for space in Space::ALL {
        let d = decide_membership(x, space);
        memberships.push((space, d.is_member()));
        checks.push(audit_decision(x, &d, cfg)?);
    }
    let inclusion_violations = inclusion_violations(&memberships);
    let pass = inclusion_violations.is_empty() && checks.iter().all(|c| c.pass);
    Ok(CaseAudit {
        name: name.to_string(),
        envelope: x.to_string(),
        checks,
        inclusion_violations,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curated_suite_parses_and_is_large_enough() {
        let suite = curated_suite();
        assert!(suite.len() >= 30);
        let mut names: Vec<_> = suite.iter().map(|(n, _)| *n).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), suite.len());
    }

    #[test]
    fn curated_cases_cover_both_outcomes() {
        let suite = curated_suite();
        let mut members = 0;
        let mut refuted = 0;
        for (_, x) in &suite {
            for space in Space::ALL {
                if decide_membership(x, space).is_member() {
                    members += 1;
                } else {
                    refuted += 1;
                }
            }
        }
        assert!(members >= 40 && refuted >= 30, "{members} {refuted}");
    }

    #[test]
    fn spot_audits() {
        let cfg = OracleConfig::default();
        for (name, lit) in [("diag j^5", "diag:j^5"), ("full (ij)^-3", "term(min^-3, max^-3)")] {
            let x = EnvelopeMatrix::parse(lit).unwrap();
            let a = audit_case(name, &x, &cfg).unwrap();
            assert!(a.pass, "{a:#?}");
        }
    }

    #[test]
    fn full_curated_audit() {
        let cfg = OracleConfig::default();
        let failures: Vec<CaseAudit> = curated_suite()
            .iter()
            .map(|(name, x)| audit_case(name, x, &cfg).unwrap())
            .filter(|a| !a.pass)
            .collect();
        assert!(failures.is_empty(), "{failures:#?}");
    }

    #[test]
    fn inclusion_detection() {
        let v = inclusion_violations(&[
            (Space::S, true),
            (Space::MS, true),
            (Space::Ls, false),
            (Space::Lsprime, true),
        ]);
        assert_eq!(v.len(), 2);
    }
}
