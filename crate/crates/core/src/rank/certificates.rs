use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::logic::{instantiate, validate_type, Formula, PartialType};
use crate::theories::{advance, TheoryOracle};

use super::atoms::atoms_over;
use super::witness::{check_k_inconsistent, verify_dividing_witness, DividingWitness};
use super::{FailureCode, Verdict};

/// Branch failures reported before giving up on listing them.
const MAX_BRANCH_REPORTS: usize = 4;

/// A dividing sequence in `ty`: each entry's instance divides over the base
/// of `ty` together with the parameters of the earlier entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceCertificate {
    #[serde(rename = "type")]
    pub ty: PartialType,
    pub entries: Vec<SequenceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub formula: Formula,
    pub params: Vec<String>,
    pub witness: DividingWitness,
}

impl SequenceCertificate {
    pub fn empty(ty: PartialType) -> Self {
        SequenceCertificate {
            ty,
            entries: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    /// Base of entry `i`: the type's base and the parameters of entries
    /// before `i`.
    pub fn base_before(&self, i: usize) -> BTreeSet<String> {
        let mut base = self.ty.base.clone();
        for e in &self.entries[..i] {
            base.extend(e.params.iter().cloned());
        }
        base
    }

    /// The type together with every entry's instance.
    pub fn branch(&self) -> Result<Vec<Formula>, super::RankError> {
        let mut out = self.ty.formulas.clone();
        for e in &self.entries {
            out.push(instantiate(&e.formula, &e.params)?);
        }
        Ok(out)
    }

    pub fn rename_params(&self, map: &BTreeMap<String, String>) -> Self {
        SequenceCertificate {
            ty: self.ty.rename_params(map),
            entries: self
                .entries
                .iter()
                .map(|e| SequenceEntry {
                    formula: e.formula.rename_params(map),
                    params: rename_vec(&e.params, map),
                    witness: rename_witness(&e.witness, map),
                })
                .collect(),
        }
    }
}

pub(crate) fn rename_vec(v: &[String], map: &BTreeMap<String, String>) -> Vec<String> {
    v.iter()
        .map(|p| map.get(p).cloned().unwrap_or_else(|| p.clone()))
        .collect()
}

pub(crate) fn rename_witness(
    w: &DividingWitness,
    map: &BTreeMap<String, String>,
) -> DividingWitness {
    DividingWitness {
        formula: w.formula.rename_params(map),
        anchor: rename_vec(&w.anchor, map),
        base: rename_vec(&w.base.iter().cloned().collect::<Vec<_>>(), map)
            .into_iter()
            .collect(),
        family: w.family.iter().map(|c| rename_vec(c, map)).collect(),
        k: w.k,
    }
}

/// A dividing tree of finite depth and width: the node at path `s` lists
/// the parameters `a_{s,i}` of its `width` children.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeCertificate {
    #[serde(rename = "type")]
    pub ty: PartialType,
    pub depth: usize,
    pub width: usize,
    pub levels: Vec<TreeLevel>,
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeLevel {
    pub formula: Formula,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub path: Vec<usize>,
    pub children: Vec<Vec<String>>,
}

impl TreeCertificate {
    pub fn node(&self, path: &[usize]) -> Option<&TreeNode> {
        self.nodes.iter().find(|n| n.path == path)
    }

    pub fn rename_params(&self, map: &BTreeMap<String, String>) -> Self {
        TreeCertificate {
            ty: self.ty.rename_params(map),
            depth: self.depth,
            width: self.width,
            levels: self
                .levels
                .iter()
                .map(|l| TreeLevel {
                    formula: l.formula.rename_params(map),
                    k: l.k,
                })
                .collect(),
            nodes: self
                .nodes
                .iter()
                .map(|n| TreeNode {
                    path: n.path.clone(),
                    children: n.children.iter().map(|c| rename_vec(c, map)).collect(),
                })
                .collect(),
        }
    }
}

/// An inp-pattern: one parameter row per level, shared by every node of
/// that level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InpCertificate {
    #[serde(rename = "type")]
    pub ty: PartialType,
    pub rows: Vec<InpRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InpRow {
    pub formula: Formula,
    pub k: usize,
    pub params: Vec<Vec<String>>,
}

impl InpCertificate {
    pub fn rename_params(&self, map: &BTreeMap<String, String>) -> Self {
        InpCertificate {
            ty: self.ty.rename_params(map),
            rows: self
                .rows
                .iter()
                .map(|r| InpRow {
                    formula: r.formula.rename_params(map),
                    k: r.k,
                    params: r.params.iter().map(|c| rename_vec(c, map)).collect(),
                })
                .collect(),
        }
    }
}

/// A dividing chain of partial types: step `i` adds `formulas` to the type
/// and enlarges the base to `base`; its witness shows that the added
/// formulas divide over the previous base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainCertificate {
    #[serde(rename = "type")]
    pub ty: PartialType,
    pub steps: Vec<ChainStep>,
    /// Also require each type in the chain to decide every atomic formula
    /// over its base.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub complete_fragment: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub formulas: Vec<Formula>,
    pub base: BTreeSet<String>,
    pub witness: DividingWitness,
}

impl ChainCertificate {
    /// `p_i`: the type with the formulas of steps `0..=i`.
    pub fn type_at(&self, i: usize) -> PartialType {
        let mut p = self.ty.clone();
        for s in &self.steps[..=i] {
            p.formulas.extend(s.formulas.iter().cloned());
        }
        p.base = self.steps[i].base.clone();
        p
    }

    /// `A_{<i}`.
    pub fn base_before(&self, i: usize) -> &BTreeSet<String> {
        if i == 0 {
            &self.ty.base
        } else {
            &self.steps[i - 1].base
        }
    }

    pub fn rename_params(&self, map: &BTreeMap<String, String>) -> Self {
        ChainCertificate {
            ty: self.ty.rename_params(map),
            steps: self
                .steps
                .iter()
                .map(|s| ChainStep {
                    formulas: s.formulas.iter().map(|f| f.rename_params(map)).collect(),
                    base: rename_vec(&s.base.iter().cloned().collect::<Vec<_>>(), map)
                        .into_iter()
                        .collect(),
                    witness: rename_witness(&s.witness, map),
                })
                .collect(),
            complete_fragment: self.complete_fragment,
        }
    }
}

fn check_type<T: TheoryOracle>(oracle: &T, ty: &PartialType, v: &mut Verdict) -> bool {
    let before = v.failures.len();
    for violation in validate_type(ty, oracle.signature()) {
        v.fail(FailureCode::Structural, "type", violation.to_string());
    }
    for p in &ty.base {
        if !oracle.has_parameter(p) {
            v.fail(
                FailureCode::Structural,
                "type",
                format!("unknown parameter '{p}'"),
            );
        }
    }
    v.failures.len() == before
}

fn check_consistent<T: TheoryOracle>(
    oracle: &T,
    formulas: &[Formula],
    n: usize,
    at: String,
    v: &mut Verdict,
) -> bool {
    match oracle.consistent(formulas, n) {
        Ok(true) => true,
        Ok(false) => {
            v.fail(
                FailureCode::InconsistentBranch,
                at,
                "the branch is inconsistent",
            );
            false
        }
        Err(e) => {
            v.fail(FailureCode::Structural, at, e.to_string());
            false
        }
    }
}

pub fn verify_sequence_certificate<T: TheoryOracle>(
    oracle: &T,
    c: &SequenceCertificate,
) -> Verdict {
    let mut v = Verdict::ok();
    if !check_type(oracle, &c.ty, &mut v) {
        return v;
    }
    for (i, e) in c.entries.iter().enumerate() {
        let at = format!("entry {i}");
        if e.witness.formula != e.formula || e.witness.anchor != e.params {
            v.fail(
                FailureCode::FormulaMismatch,
                at.clone(),
                "the witness is for a different instance",
            );
        }
        let expected = c.base_before(i);
        if e.witness.base != expected {
            v.fail(
                FailureCode::BaseMismatch,
                at.clone(),
                format!(
                    "witness base {{{}}}, expected {{{}}}",
                    join(&e.witness.base),
                    join(&expected)
                ),
            );
        }
        v.absorb(&at, verify_dividing_witness(oracle, &e.witness));
    }
    match c.branch() {
        Ok(branch) => {
            check_consistent(oracle, &branch, c.ty.tuple_length, "branch".into(), &mut v);
        }
        Err(e) => v.fail(FailureCode::Structural, "branch", e.to_string()),
    }
    v
}

fn join<'a>(s: impl IntoIterator<Item = &'a String>) -> String {
    s.into_iter()
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join(",")
}

fn check_family<T: TheoryOracle>(
    oracle: &T,
    formula: &Formula,
    family: &[Vec<String>],
    k: usize,
    width: usize,
    at: &str,
    v: &mut Verdict,
) {
    if k < 2 || k > width {
        v.fail(
            FailureCode::KOutOfRange,
            at,
            format!("k = {k} with width {width}"),
        );
        return;
    }
    match check_k_inconsistent(oracle, formula, family, k) {
        Ok(true) => {}
        Ok(false) => v.fail(
            FailureCode::NotKInconsistent,
            at,
            format!("some {k} instances are jointly consistent"),
        ),
        Err(e) => v.fail(FailureCode::Structural, at, e.to_string()),
    }
}

/// Checks that every `f` in `width^depth` gives a consistent branch, where
/// `instance(j, f)` is the level-`j` formula along `f`.
fn check_branches<T: TheoryOracle>(
    oracle: &T,
    ty: &PartialType,
    depth: usize,
    width: usize,
    mut instance: impl FnMut(usize, &[usize]) -> Option<Formula>,
    v: &mut Verdict,
) {
    let mut f = vec![0usize; depth];
    let mut reported = 0;
    loop {
        let mut branch = ty.formulas.clone();
        let mut complete = true;
        for j in 0..depth {
            match instance(j, &f) {
                Some(phi) => branch.push(phi),
                None => complete = false,
            }
        }
        if complete
            && !check_consistent(oracle, &branch, ty.tuple_length, format!("branch {f:?}"), v)
        {
            reported += 1;
            if reported >= MAX_BRANCH_REPORTS {
                return;
            }
        }
        if depth == 0 || width == 0 || !advance(&mut f, width) {
            return;
        }
    }
}

pub fn verify_tree_certificate<T: TheoryOracle>(oracle: &T, t: &TreeCertificate) -> Verdict {
    let mut v = Verdict::ok();
    if !check_type(oracle, &t.ty, &mut v) {
        return v;
    }
    if t.levels.len() != t.depth {
        v.fail(
            FailureCode::Structural,
            "levels",
            format!("{} levels for depth {}", t.levels.len(), t.depth),
        );
        return v;
    }
    if t.depth > 0 && !oracle.admits_infinite_families() {
        v.fail(
            FailureCode::FiniteTheory,
            "",
            "a finite structure has no infinite sibling families",
        );
    }
    let mut by_path: BTreeMap<&[usize], &TreeNode> = BTreeMap::new();
    for n in &t.nodes {
        let in_range = n.path.len() < t.depth && n.path.iter().all(|&i| i < t.width);
        if !in_range || by_path.insert(&n.path, n).is_some() {
            v.fail(
                FailureCode::Structural,
                format!("node {:?}", n.path),
                "node outside the tree or listed twice",
            );
        }
    }
    // Every internal node must be present with `width` children.
    for level in 0..t.depth {
        let mut s = vec![0usize; level];
        loop {
            let at = format!("node {s:?}");
            match by_path.get(s.as_slice()) {
                None => v.fail(FailureCode::MissingNode, at, "missing"),
                Some(n) if n.children.len() != t.width => v.fail(
                    FailureCode::Ragged,
                    at,
                    format!("{} children for width {}", n.children.len(), t.width),
                ),
                Some(n) => {
                    let lv = &t.levels[level];
                    check_family(oracle, &lv.formula, &n.children, lv.k, t.width, &at, &mut v);
                }
            }
            if level == 0 || !advance(&mut s, t.width) {
                break;
            }
        }
    }
    if !v.is_valid() {
        return v;
    }
    check_branches(
        oracle,
        &t.ty,
        t.depth,
        t.width,
        |j, f| {
            let node = by_path.get(&f[..j])?;
            instantiate(&t.levels[j].formula, &node.children[f[j]]).ok()
        },
        &mut v,
    );
    v
}

pub fn verify_inp_certificate<T: TheoryOracle>(oracle: &T, c: &InpCertificate) -> Verdict {
    let mut v = Verdict::ok();
    if !check_type(oracle, &c.ty, &mut v) {
        return v;
    }
    let width = c.rows.first().map_or(0, |r| r.params.len());
    if c.rows.iter().any(|r| r.params.len() != width) {
        v.fail(FailureCode::Ragged, "rows", "rows have different widths");
        return v;
    }
    if !c.rows.is_empty() && !oracle.admits_infinite_families() {
        v.fail(
            FailureCode::FiniteTheory,
            "",
            "a finite structure has no infinite rows of conjugates",
        );
    }
    for (j, r) in c.rows.iter().enumerate() {
        check_family(
            oracle,
            &r.formula,
            &r.params,
            r.k,
            width,
            &format!("row {j}"),
            &mut v,
        );
    }
    if !v.is_valid() {
        return v;
    }
    check_branches(
        oracle,
        &c.ty,
        c.rows.len(),
        width,
        |j, f| instantiate(&c.rows[j].formula, &c.rows[j].params[f[j]]).ok(),
        &mut v,
    );
    v
}

fn sorted_conjuncts(formulas: &[Formula]) -> Vec<&Formula> {
    let mut out: Vec<&Formula> = formulas.iter().flat_map(Formula::conjuncts).collect();
    out.sort();
    out
}

pub fn verify_chain_certificate<T: TheoryOracle>(oracle: &T, c: &ChainCertificate) -> Verdict {
    let mut v = Verdict::ok();
    if !check_type(oracle, &c.ty, &mut v) {
        return v;
    }
    let mut all = c.ty.formulas.clone();
    for (i, s) in c.steps.iter().enumerate() {
        let at = format!("step {i}");
        let before = c.base_before(i);
        if !before.is_subset(&s.base) {
            v.fail(FailureCode::NotMonotone, at.clone(), "the base shrinks");
        }
        if let Some(p) = s.base.iter().find(|p| !oracle.has_parameter(p)) {
            v.fail(
                FailureCode::Structural,
                at.clone(),
                format!("unknown parameter '{p}'"),
            );
        }
        if s.formulas.is_empty() {
            v.fail(FailureCode::Structural, at.clone(), "no new formulas");
        }
        for f in &s.formulas {
            if !f.slots().is_empty() {
                v.fail(
                    FailureCode::Structural,
                    at.clone(),
                    format!("{f} has slots"),
                );
            }
            if let Some(p) = f.params().into_iter().find(|p| !s.base.contains(*p)) {
                v.fail(
                    FailureCode::BaseMismatch,
                    at.clone(),
                    format!("{f} uses '{p}', outside the step's base"),
                );
            }
        }
        if s.witness.base != *before {
            v.fail(
                FailureCode::BaseMismatch,
                at.clone(),
                format!(
                    "witness base {{{}}}, expected {{{}}}",
                    join(&s.witness.base),
                    join(before)
                ),
            );
        }
        match s.witness.instance() {
            Ok(inst) => {
                if sorted_conjuncts(std::slice::from_ref(&inst)) != sorted_conjuncts(&s.formulas) {
                    v.fail(
                        FailureCode::FormulaMismatch,
                        at.clone(),
                        "the witness instance is not the conjunction of the new formulas",
                    );
                }
            }
            Err(e) => v.fail(FailureCode::Structural, at.clone(), e.to_string()),
        }
        v.absorb(&at, verify_dividing_witness(oracle, &s.witness));
        all.extend(s.formulas.iter().cloned());
    }
    if !v.is_valid() {
        return v;
    }
    if !check_consistent(oracle, &all, c.ty.tuple_length, "chain".into(), &mut v) {
        return v;
    }
    if c.complete_fragment {
        for i in 0..c.steps.len() {
            let p = c.type_at(i);
            if let Some(atom) = undecided_atom(oracle, &p) {
                v.fail(
                    FailureCode::IncompleteFragment,
                    format!("step {i}"),
                    format!("the type does not decide {atom}"),
                );
            }
        }
    }
    v
}

/// An atomic formula over `p.base` that `p` leaves open, if any.
fn undecided_atom<T: TheoryOracle>(oracle: &T, p: &PartialType) -> Option<Formula> {
    let base: Vec<String> = p.base.iter().cloned().collect();
    for atom in atoms_over(oracle, p.tuple_length, &base) {
        let mut with = p.formulas.clone();
        with.push(atom.clone());
        let mut without = p.formulas.clone();
        without.push(Formula::not(atom.clone()));
        let both = oracle.consistent(&with, p.tuple_length).unwrap_or(false)
            && oracle.consistent(&without, p.tuple_length).unwrap_or(false);
        if both {
            return Some(atom);
        }
    }
    None
}
