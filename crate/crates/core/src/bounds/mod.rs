//! Entropy certificates: coupling strength, the region-entropy bound, its
//! closed-form consequences for fitted heat capacities, and the
//! groundspace trace-norm bound.

pub mod coupling;
pub mod lemma;
pub mod pepo;
pub mod prop;

use serde::{Deserialize, Serialize};

pub use coupling::{coupling_strength, CouplingMode, CouplingStrength};
pub use lemma::{lemma2_check, solve_tc, summarize_region, EnergyCurve, Lemma2Check, RegionSummary, SpectralCurve};
pub use pepo::{pepo_bound, PepoBoundParams, PepoFit};
pub use prop::{prop1_certify, prop1_constant, BoundCertificate, CertificateInputs, ThermalModel};

/// Outcome of one checked inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    HypothesisNotMet,
    Fails,
    /// One side of the inequality was not available.
    NotMeasured,
}

impl Verdict {
    /// `lhs ≤ rhs` up to `tol·max(1, |rhs|)`, provided the hypothesis holds.
    pub fn compare(hypothesis: bool, lhs: f64, rhs: f64, tol: f64) -> Verdict {
        if !hypothesis {
            Verdict::HypothesisNotMet
        } else if lhs <= rhs + tol * rhs.abs().max(1.0) {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    /// Worst of several verdicts; `NotMeasured` never dominates.
    pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Holds;
        for v in verdicts {
            out = match (out, v) {
                (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
                (Verdict::HypothesisNotMet, _) | (_, Verdict::HypothesisNotMet) => Verdict::HypothesisNotMet,
                _ => Verdict::Holds,
            };
        }
        out
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::HypothesisNotMet => "hypothesis-not-met",
            Verdict::Fails => "fails",
            Verdict::NotMeasured => "not-measured",
        })
    }
}
