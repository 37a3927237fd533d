use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::theories::TheoryOracle;

use super::certificates::{
    verify_chain_certificate, verify_inp_certificate, verify_sequence_certificate,
    verify_tree_certificate, ChainCertificate, InpCertificate, SequenceCertificate,
    TreeCertificate,
};
use super::Verdict;

pub const CERTIFICATE_SCHEMA: &str = "ddrank/certificate/v1";

/// Any of the four certificate kinds, tagged by `"kind"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Sequence(SequenceCertificate),
    Tree(TreeCertificate),
    Inp(InpCertificate),
    Chain(ChainCertificate),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Sequence(_) => "sequence",
            Certificate::Tree(_) => "tree",
            Certificate::Inp(_) => "inp",
            Certificate::Chain(_) => "chain",
        }
    }

    /// Entries, levels, rows or steps.
    pub fn depth(&self) -> usize {
        match self {
            Certificate::Sequence(c) => c.entries.len(),
            Certificate::Tree(c) => c.depth,
            Certificate::Inp(c) => c.rows.len(),
            Certificate::Chain(c) => c.steps.len(),
        }
    }

    pub fn verify<T: TheoryOracle>(&self, oracle: &T) -> Verdict {
        match self {
            Certificate::Sequence(c) => verify_sequence_certificate(oracle, c),
            Certificate::Tree(c) => verify_tree_certificate(oracle, c),
            Certificate::Inp(c) => verify_inp_certificate(oracle, c),
            Certificate::Chain(c) => verify_chain_certificate(oracle, c),
        }
    }

    pub fn rename_params(&self, map: &std::collections::BTreeMap<String, String>) -> Self {
        match self {
            Certificate::Sequence(c) => Certificate::Sequence(c.rename_params(map)),
            Certificate::Tree(c) => Certificate::Tree(c.rename_params(map)),
            Certificate::Inp(c) => Certificate::Inp(c.rename_params(map)),
            Certificate::Chain(c) => Certificate::Chain(c.rename_params(map)),
        }
    }
}

/// A certificate file: the certificate and, optionally, the theory whose
/// parameters it mentions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDocument {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<Value>,
    pub certificate: Certificate,
}

impl CertificateDocument {
    pub fn new(certificate: Certificate, theory: Option<Value>) -> Self {
        CertificateDocument {
            schema: CERTIFICATE_SCHEMA.to_string(),
            theory,
            certificate,
        }
    }

    /// Parses a document, rejecting other schema versions.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: CertificateDocument = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if doc.schema != CERTIFICATE_SCHEMA {
            return Err(format!(
                "unsupported schema '{}', expected '{CERTIFICATE_SCHEMA}'",
                doc.schema
            ));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }
}
