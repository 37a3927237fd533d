//! Dividing certificates with their verification and conversions.
//! Bounded search for the dividing depth, plus harnesses that check rank
//! laws on exact small values.
//!
//! "Divides" is witnessed at finite scale: a [`DividingWitness`] exhibits a
//! family of distinct conjugates of the anchor over the base, indiscernible
//! for quantifier-free formulas, whose instances are k-inconsistent. Only
//! backends with infinite models accept such witnesses, since only there
//! does a finite family extend to an infinite indiscernible one.

mod atoms;
mod certificates;
mod convert;
mod document;
pub mod harness;
mod search;
mod witness;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{LogicError, Violation};
use crate::theories::TheoryError;

pub use atoms::{atomic_alphabet, qf_type_of};
pub use certificates::{
    verify_chain_certificate, verify_inp_certificate, verify_sequence_certificate,
    verify_tree_certificate, ChainCertificate, ChainStep, InpCertificate, InpRow,
    SequenceCertificate, SequenceEntry, TreeCertificate, TreeLevel, TreeNode,
};
pub use convert::{
    chain_to_sequence, inp_to_tree, product_concat, sequence_to_chain, tree_branch_to_sequence,
};
pub use document::{Certificate, CertificateDocument, CERTIFICATE_SCHEMA};
pub use search::{grow_tree, search_rank, RankReport, SearchBounds, SearchStats, REPORT_SCHEMA};
pub use witness::{check_k_inconsistent, verify_dividing_witness, DividingWitness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("invalid type: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidType(Vec<Violation>),
    #[error("the type is inconsistent")]
    InconsistentType,
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("family of size {size} is too small for {k}-inconsistency")]
    FamilyTooSmall { size: usize, k: usize },
    #[error("rows have different widths")]
    Ragged,
    #[error("base mismatch: expected {{{}}}, found {{{}}}", .expected.join(","), .found.join(","))]
    BaseMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("level {level}: {detail}")]
    ConversionPrecondition { level: usize, detail: String },
    #[error("step {step}: {detail}")]
    NoExtractableWitness { step: usize, detail: String },
    #[error("invalid branch: {0}")]
    InvalidBranch(String),
    #[error("certificate does not verify: {0}")]
    Unverified(String),
}

/// Why a certificate failed verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCode {
    Structural,
    FiniteTheory,
    FamilyTooSmall,
    KOutOfRange,
    NotConjugate,
    RepeatedMember,
    NotIndiscernible,
    NotKInconsistent,
    FormulaMismatch,
    BaseMismatch,
    InconsistentBranch,
    MissingNode,
    Ragged,
    NotMonotone,
    IncompleteFragment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub code: FailureCode,
    /// Where in the certificate, e.g. `entry 1` or `node [0,2]`.
    pub at: String,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let code = serde_json::to_value(self.code).expect("codes serialize");
        write!(
            f,
            "{}: {} ({})",
            self.at,
            code.as_str().unwrap_or("?"),
            self.detail
        )
    }
}

/// Outcome of verifying a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Verdict {
    pub failures: Vec<Failure>,
}

impl Verdict {
    pub fn ok() -> Self {
        Verdict::default()
    }

    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn codes(&self) -> Vec<FailureCode> {
        self.failures.iter().map(|f| f.code).collect()
    }

    fn fail(&mut self, code: FailureCode, at: impl Into<String>, detail: impl Into<String>) {
        self.failures.push(Failure {
            code,
            at: at.into(),
            detail: detail.into(),
        });
    }

    /// Adds `other`'s failures, prefixing their locations.
    fn absorb(&mut self, prefix: &str, other: Verdict) {
        for mut f in other.failures {
            f.at = if f.at.is_empty() {
                prefix.to_string()
            } else {
                format!("{prefix}, {}", f.at)
            };
            self.failures.push(f);
        }
    }
}
