use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::logic::{instantiate, Formula};
use crate::theories::TheoryOracle;

use super::{FailureCode, RankError, Verdict};

/// Evidence that `formula(x, anchor)` divides over `base`: a family of
/// conjugates of `anchor` over `base` whose instances are k-inconsistent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DividingWitness {
    /// Template; slot `y<i>` is filled by the `i`-th parameter of a tuple.
    pub formula: Formula,
    pub anchor: Vec<String>,
    pub base: BTreeSet<String>,
    pub family: Vec<Vec<String>>,
    pub k: usize,
}

impl DividingWitness {
    pub fn instance(&self) -> Result<Formula, RankError> {
        Ok(instantiate(&self.formula, &self.anchor)?)
    }

    pub fn width(&self) -> usize {
        self.family.len()
    }
}

/// Number of free variables a set of formulas needs.
pub(crate) fn tuple_length_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> usize {
    formulas
        .into_iter()
        .filter_map(|f| f.vars().last().copied())
        .max()
        .map_or(1, |m| m + 1)
}

/// Whether every `k` of the instances `formula(x, c)`, `c` in `family`, are
/// jointly inconsistent.
pub fn check_k_inconsistent<T: TheoryOracle>(
    oracle: &T,
    formula: &Formula,
    family: &[Vec<String>],
    k: usize,
) -> Result<bool, RankError> {
    if k == 0 || family.len() < k {
        return Err(RankError::FamilyTooSmall {
            size: family.len(),
            k,
        });
    }
    let instances = family
        .iter()
        .map(|c| instantiate(formula, c))
        .collect::<Result<Vec<_>, _>>()?;
    let n = tuple_length_of([formula]);
    for subset in instances.iter().cloned().combinations(k) {
        if oracle.consistent(&subset, n)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks `family` for quantifier-free indiscernibility over `base`: every
/// increasing subsequence of length `m` has the type of the first `m`
/// members, for `m` up to the largest relation arity (at least 2), which
/// covers every atomic formula.
pub(crate) fn indiscernible<T: TheoryOracle>(
    oracle: &T,
    family: &[Vec<String>],
    base: &BTreeSet<String>,
) -> bool {
    let max_arity = oracle
        .signature()
        .relations()
        .map(|(_, a)| a)
        .max()
        .unwrap_or(0)
        .max(2);
    for m in 1..=max_arity.min(family.len()) {
        let reference: Vec<String> = family[..m].concat();
        for idx in (0..family.len()).combinations(m) {
            let tuple: Vec<String> = idx.iter().flat_map(|&i| family[i].clone()).collect();
            if !oracle.same_type_over(&tuple, &reference, base) {
                return false;
            }
        }
    }
    true
}

/// Verifies a witness, collecting every failed condition.
pub fn verify_dividing_witness<T: TheoryOracle>(oracle: &T, w: &DividingWitness) -> Verdict {
    let mut v = Verdict::ok();
    let slots = w.formula.slot_count();
    if let Some(bad) = w.formula.check_signature(oracle.signature()).err() {
        v.fail(FailureCode::Structural, "", bad.to_string());
        return v;
    }
    let tuples = std::iter::once(&w.anchor).chain(&w.family);
    for t in tuples {
        if t.len() != slots {
            v.fail(
                FailureCode::Structural,
                "",
                format!(
                    "tuple of length {} for a template with {slots} slots",
                    t.len()
                ),
            );
            return v;
        }
    }
    let unknown: Vec<&String> = w
        .anchor
        .iter()
        .chain(w.family.iter().flatten())
        .chain(&w.base)
        .filter(|p| !oracle.has_parameter(p))
        .collect();
    if let Some(p) = unknown.first() {
        v.fail(
            FailureCode::Structural,
            "",
            format!("unknown parameter '{p}'"),
        );
        return v;
    }
    if !oracle.admits_infinite_families() {
        v.fail(
            FailureCode::FiniteTheory,
            "",
            "a finite structure has no infinite families of conjugates",
        );
    }
    if w.k < 2 {
        v.fail(
            FailureCode::KOutOfRange,
            "",
            format!("k = {} (must be at least 2)", w.k),
        );
        return v;
    }
    if w.family.len() < w.k {
        v.fail(
            FailureCode::FamilyTooSmall,
            "",
            format!("{} members for k = {}", w.family.len(), w.k),
        );
        return v;
    }
    for (j, c) in w.family.iter().enumerate() {
        if !oracle.same_type_over(c, &w.anchor, &w.base) {
            v.fail(
                FailureCode::NotConjugate,
                format!("member {j}"),
                format!(
                    "({}) is not conjugate to the anchor over the base",
                    c.join(",")
                ),
            );
        }
    }
    if w.family.iter().duplicates().next().is_some() {
        v.fail(
            FailureCode::RepeatedMember,
            "",
            "the family repeats a tuple",
        );
    } else if v.is_valid() && !indiscernible(oracle, &w.family, &w.base) {
        v.fail(
            FailureCode::NotIndiscernible,
            "",
            "the family is not indiscernible over the base",
        );
    }
    match check_k_inconsistent(oracle, &w.formula, &w.family, w.k) {
        Ok(true) => {}
        Ok(false) => v.fail(
            FailureCode::NotKInconsistent,
            "",
            format!("some {} instances are jointly consistent", w.k),
        ),
        Err(e) => v.fail(FailureCode::Structural, "", e.to_string()),
    }
    v
}
