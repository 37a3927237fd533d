use std::collections::BTreeSet;

use itertools::Itertools;

use crate::logic::{instantiate, PartialType};
use crate::theories::{advance, TheoryOracle};

use super::certificates::{
    verify_chain_certificate, verify_sequence_certificate, ChainCertificate, ChainStep,
    InpCertificate, SequenceCertificate, SequenceEntry, TreeCertificate, TreeLevel, TreeNode,
};
use super::witness::{indiscernible, DividingWitness};
use super::{RankError, Verdict};

fn unverified(v: &Verdict) -> RankError {
    RankError::Unverified(v.failures.iter().map(ToString::to_string).join("; "))
}

/// Copies row `j` of the pattern to every node of level `j`.
pub fn inp_to_tree(c: &InpCertificate) -> Result<TreeCertificate, RankError> {
    let width = c.rows.first().map_or(0, |r| r.params.len());
    if c.rows.iter().any(|r| r.params.len() != width) {
        return Err(RankError::Ragged);
    }
    let mut nodes = Vec::new();
    for (level, row) in c.rows.iter().enumerate() {
        let mut s = vec![0usize; level];
        loop {
            nodes.push(TreeNode {
                path: s.clone(),
                children: row.params.clone(),
            });
            if level == 0 || !advance(&mut s, width) {
                break;
            }
        }
    }
    Ok(TreeCertificate {
        ty: c.ty.clone(),
        depth: c.rows.len(),
        width,
        levels: c
            .rows
            .iter()
            .map(|r| TreeLevel {
                formula: r.formula.clone(),
                k: r.k,
            })
            .collect(),
        nodes,
    })
}

/// Reads the dividing sequence along `branch` (one child index per level).
///
/// The siblings at each level must be distinct and indiscernible over the
/// type's base together with the parameters chosen above them; otherwise
/// their family is no dividing witness and the level is reported.
pub fn tree_branch_to_sequence<T: TheoryOracle>(
    oracle: &T,
    t: &TreeCertificate,
    branch: &[usize],
) -> Result<SequenceCertificate, RankError> {
    if branch.len() != t.depth || branch.iter().any(|&i| i >= t.width) {
        return Err(RankError::InvalidBranch(format!(
            "{branch:?} is not a branch of a depth-{} width-{} tree",
            t.depth, t.width
        )));
    }
    if t.levels.len() != t.depth {
        return Err(RankError::InvalidBranch(
            "levels do not match the depth".into(),
        ));
    }
    let mut base = t.ty.base.clone();
    let mut entries = Vec::with_capacity(t.depth);
    for (level, &i) in branch.iter().enumerate() {
        let node = t
            .node(&branch[..level])
            .ok_or_else(|| RankError::ConversionPrecondition {
                level,
                detail: format!("node {:?} is missing", &branch[..level]),
            })?;
        if node.children.len() != t.width {
            return Err(RankError::Ragged);
        }
        let chosen = &node.children[i];
        let precondition = |detail: &str| RankError::ConversionPrecondition {
            level,
            detail: detail.to_string(),
        };
        if node.children.iter().duplicates().next().is_some() {
            return Err(precondition("siblings repeat a tuple"));
        }
        if let Some(j) = node
            .children
            .iter()
            .position(|c| !oracle.same_type_over(c, chosen, &base))
        {
            return Err(precondition(&format!(
                "sibling {j} is not conjugate to sibling {i} over the prefix"
            )));
        }
        if !indiscernible(oracle, &node.children, &base) {
            return Err(precondition(
                "siblings are not indiscernible over the prefix",
            ));
        }
        let lv = &t.levels[level];
        entries.push(SequenceEntry {
            formula: lv.formula.clone(),
            params: chosen.clone(),
            witness: DividingWitness {
                formula: lv.formula.clone(),
                anchor: chosen.clone(),
                base: base.clone(),
                family: node.children.clone(),
                k: lv.k,
            },
        });
        base.extend(chosen.iter().cloned());
    }
    Ok(SequenceCertificate {
        ty: t.ty.clone(),
        entries,
    })
}

/// Step `i` adds `φ_i(x, a_i)` and enlarges the base to `A ∪ a_{≤i}`.
pub fn sequence_to_chain(c: &SequenceCertificate) -> Result<ChainCertificate, RankError> {
    let mut base = c.ty.base.clone();
    let mut steps = Vec::with_capacity(c.entries.len());
    for e in &c.entries {
        let instance = instantiate(&e.formula, &e.params)?;
        base.extend(e.params.iter().cloned());
        steps.push(ChainStep {
            formulas: instance.conjuncts().into_iter().cloned().collect(),
            base: base.clone(),
            witness: e.witness.clone(),
        });
    }
    Ok(ChainCertificate {
        ty: c.ty.clone(),
        steps,
        complete_fragment: false,
    })
}

/// Extracts a dividing sequence from a verified chain: entry `i` is the
/// witnessed formula of step `i` at its anchor, which must lie in `A_i`.
/// The witness family stays valid over the smaller base `A ∪ a_{<i}`.
pub fn chain_to_sequence<T: TheoryOracle>(
    oracle: &T,
    c: &ChainCertificate,
) -> Result<SequenceCertificate, RankError> {
    let verdict = verify_chain_certificate(oracle, c);
    if !verdict.is_valid() {
        return Err(unverified(&verdict));
    }
    let mut base = c.ty.base.clone();
    let mut entries = Vec::with_capacity(c.steps.len());
    for (step, s) in c.steps.iter().enumerate() {
        let w = &s.witness;
        if let Some(p) = w.anchor.iter().find(|p| !s.base.contains(*p)) {
            return Err(RankError::NoExtractableWitness {
                step,
                detail: format!("anchor parameter '{p}' lies outside the step's base"),
            });
        }
        entries.push(SequenceEntry {
            formula: w.formula.clone(),
            params: w.anchor.clone(),
            witness: DividingWitness {
                base: base.clone(),
                ..w.clone()
            },
        });
        base.extend(w.anchor.iter().cloned());
    }
    let out = SequenceCertificate {
        ty: c.ty.clone(),
        entries,
    };
    let verdict = verify_sequence_certificate(oracle, &out);
    if !verdict.is_valid() {
        return Err(unverified(&verdict));
    }
    Ok(out)
}

/// Concatenates a sequence for `S(x)` over `A` with one for `T(y)` over `A`
/// together with the parameters of the first, giving a sequence for the
/// product type `S(x) ∪ T(y)` over `A`. `T`'s variables are shifted past
/// `S`'s.
pub fn product_concat<T: TheoryOracle>(
    oracle: &T,
    s: &SequenceCertificate,
    t: &SequenceCertificate,
) -> Result<SequenceCertificate, RankError> {
    let expected = s.base_before(s.entries.len());
    if t.ty.base != expected {
        return Err(RankError::BaseMismatch {
            expected: expected.into_iter().collect(),
            found: t.ty.base.iter().cloned().collect(),
        });
    }
    let outside: BTreeSet<String> =
        t.ty.formulas
            .iter()
            .flat_map(|f| f.params())
            .filter(|p| !s.ty.base.contains(*p))
            .map(str::to_string)
            .collect();
    if !outside.is_empty() {
        return Err(RankError::BaseMismatch {
            expected: s.ty.base.iter().cloned().collect(),
            found: outside.into_iter().collect(),
        });
    }
    let m = s.ty.tuple_length;
    let mut formulas = s.ty.formulas.clone();
    formulas.extend(t.ty.formulas.iter().map(|f| f.shift_vars(m)));
    let ty = PartialType {
        tuple_length: m + t.ty.tuple_length,
        formulas,
        base: s.ty.base.clone(),
    };
    let mut entries = s.entries.clone();
    entries.extend(t.entries.iter().map(|e| {
        let formula = e.formula.shift_vars(m);
        SequenceEntry {
            formula: formula.clone(),
            params: e.params.clone(),
            witness: DividingWitness {
                formula,
                ..e.witness.clone()
            },
        }
    }));
    let out = SequenceCertificate { ty, entries };
    let verdict = verify_sequence_certificate(oracle, &out);
    if !verdict.is_valid() {
        return Err(unverified(&verdict));
    }
    Ok(out)
}
