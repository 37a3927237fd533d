use std::collections::BTreeSet;

use log::{debug, info};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::logic::{instantiate, render_formula, validate_type, Formula, PartialType};
use crate::ordinals::ExtOrdinal;
use crate::theories::{realize_choice, TheoryError, TheoryOracle};

use super::certificates::{
    verify_sequence_certificate, SequenceCertificate, SequenceEntry, TreeCertificate, TreeLevel,
    TreeNode,
};
use super::witness::{check_k_inconsistent, DividingWitness};
use super::RankError;

pub const REPORT_SCHEMA: &str = "ddrank/report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub depth: usize,
    pub width: usize,
    /// Fresh parameters allowed along one search path, counting anchors
    /// and witness families.
    pub param_budget: usize,
    /// Only try this k instead of every k in `2..=width`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_k: Option<usize>,
}

impl SearchBounds {
    pub fn new(depth: usize, width: usize, param_budget: usize) -> Self {
        SearchBounds {
            depth,
            width,
            param_budget,
            fixed_k: None,
        }
    }

    fn check(&self) -> Result<(), RankError> {
        let bad = |m: String| Err(RankError::InvalidBounds(m));
        if self.depth == 0 || self.param_budget == 0 {
            return bad("depth and parameter budget must be positive".into());
        }
        if self.width < 2 {
            return bad(format!("width {} leaves no room for k >= 2", self.width));
        }
        match self.fixed_k {
            Some(k) if k < 2 || k > self.width => {
                bad(format!("k = {k} outside 2..={}", self.width))
            }
            _ => Ok(()),
        }
    }

    fn ks(&self) -> std::ops::RangeInclusive<usize> {
        match self.fixed_k {
            Some(k) => k..=k,
            None => 2..=self.width,
        }
    }
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds::new(4, 4, 64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub rounds: usize,
    pub nodes: u64,
    pub witness_checks: u64,
}

/// Outcome of [`search_rank`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub schema: String,
    /// `d₊` for the depth `d` of the attached certificate.
    pub certified_lower: ExtOrdinal,
    pub bounds: SearchBounds,
    pub alphabet: Vec<String>,
    #[serde(rename = "type")]
    pub ty: PartialType,
    /// The canonical enumeration decided every depth it attempted.
    pub exhausted: bool,
    /// Some path hit the parameter budget in the deciding round.
    pub truncated: bool,
    pub exact_value: Option<usize>,
    pub certificate: SequenceCertificate,
    /// The theory extended by the certificate's fresh parameters.
    pub theory: Value,
    pub stats: SearchStats,
}

/// Anchors for a template with `slots` slots, one per quantifier-free type
/// over `base`: slot `i` ranges over the element choices relative to the
/// base and slots `0..i`. Fresh elements are realized in the returned
/// oracle.
pub(crate) fn canonical_anchors<T: TheoryOracle>(
    oracle: &T,
    base: &BTreeSet<String>,
    slots: usize,
) -> Result<Vec<(T, Vec<String>)>, TheoryError> {
    let mut partial = vec![(oracle.clone(), Vec::new())];
    for _ in 0..slots {
        let mut next = Vec::new();
        for (o, anchor) in partial {
            let mut known: Vec<String> = base.iter().cloned().collect();
            for a in &anchor {
                if !known.contains(a) {
                    known.push(a.clone());
                }
            }
            for choice in o.element_choices(&known) {
                let (o2, name) = realize_choice(&o, &choice)?;
                let mut a2: Vec<String> = anchor.clone();
                a2.push(name);
                next.push((o2, a2));
            }
        }
        partial = next;
    }
    Ok(partial)
}

fn check_alphabet<T: TheoryOracle>(
    oracle: &T,
    p: &PartialType,
    alphabet: &[Formula],
) -> Result<(), RankError> {
    if alphabet.is_empty() {
        return Err(RankError::InvalidAlphabet("empty".into()));
    }
    for f in alphabet {
        f.check_signature(oracle.signature())?;
        let bad = |why: &str| Err(RankError::InvalidAlphabet(format!("{f}: {why}")));
        if f.slot_count() == 0 {
            return bad("no slots");
        }
        if f.slots().len() != f.slot_count() {
            return bad("slots are not numbered from y0 without gaps");
        }
        if f.vars().iter().any(|&v| v >= p.tuple_length) {
            return bad("variable beyond the tuple");
        }
        if f.params().iter().any(|q| !p.base.contains(*q)) {
            return bad("parameter outside the base");
        }
    }
    Ok(())
}

fn check_type<T: TheoryOracle>(oracle: &T, p: &PartialType) -> Result<(), RankError> {
    let violations = validate_type(p, oracle.signature());
    if !violations.is_empty() {
        return Err(RankError::InvalidType(violations));
    }
    if let Some(q) = p.base.iter().find(|q| !oracle.has_parameter(q)) {
        return Err(TheoryError::UnknownParameter(q.clone()).into());
    }
    if !oracle.consistent(&p.formulas, p.tuple_length)? {
        return Err(RankError::InconsistentType);
    }
    Ok(())
}

struct Searcher<'a> {
    p: &'a PartialType,
    alphabet: &'a [Formula],
    bounds: SearchBounds,
    initial: usize,
    truncated: bool,
    stats: SearchStats,
}

/// A point of the search: the theory so far, the base `A ∪ a_{<i}`, the
/// branch `p ∪ {φ_j(x,a_j) : j<i}` and the entries.
struct State<T> {
    oracle: T,
    base: BTreeSet<String>,
    branch: Vec<Formula>,
    entries: Vec<SequenceEntry>,
}

impl Searcher<'_> {
    fn over_budget<T: TheoryOracle>(&mut self, oracle: &T) -> bool {
        let over = oracle.parameters().len() - self.initial > self.bounds.param_budget;
        self.truncated |= over;
        over
    }

    /// Smallest k for which the family's instances are k-inconsistent.
    fn dividing_k<T: TheoryOracle>(
        &mut self,
        oracle: &T,
        template: &Formula,
        family: &[Vec<String>],
    ) -> Result<Option<usize>, RankError> {
        for k in self.bounds.ks() {
            self.stats.witness_checks += 1;
            if check_k_inconsistent(oracle, template, family, k)? {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// Depth-first search for `remaining` more entries.
    fn extend<T: TheoryOracle>(
        &mut self,
        state: State<T>,
        remaining: usize,
    ) -> Result<Option<State<T>>, RankError> {
        if remaining == 0 {
            return Ok(Some(state));
        }
        self.stats.nodes += 1;
        let width = self.bounds.width;
        for template in self.alphabet {
            let anchors = canonical_anchors(&state.oracle, &state.base, template.slot_count())?;
            for (oracle, anchor) in anchors {
                // An anchor inside the base has only itself as a conjugate.
                if anchor.iter().all(|a| state.base.contains(a)) || self.over_budget(&oracle) {
                    continue;
                }
                let instance = instantiate(template, &anchor)?;
                let mut branch = state.branch.clone();
                branch.push(instance);
                if !oracle.consistent(&branch, self.p.tuple_length)? {
                    continue;
                }
                let (oracle, copies) =
                    oracle.independent_copies(&anchor, &state.base, width - 1)?;
                if self.over_budget(&oracle) {
                    continue;
                }
                let mut family = vec![anchor.clone()];
                family.extend(copies);
                let Some(k) = self.dividing_k(&oracle, template, &family)? else {
                    continue;
                };
                let mut entries = state.entries.clone();
                entries.push(SequenceEntry {
                    formula: template.clone(),
                    params: anchor.clone(),
                    witness: DividingWitness {
                        formula: template.clone(),
                        anchor: anchor.clone(),
                        base: state.base.clone(),
                        family,
                        k,
                    },
                });
                let mut base = state.base.clone();
                base.extend(anchor);
                let next = State {
                    oracle,
                    base,
                    branch,
                    entries,
                };
                if let Some(done) = self.extend(next, remaining - 1)? {
                    return Ok(Some(done));
                }
            }
        }
        Ok(None)
    }
}

/// Iterative-deepening search for the deepest dividing sequence in `p`
/// whose formulas come from `alphabet`.
///
/// Anchors are enumerated one per quantifier-free type over the current
/// base and witness families are independent copies, so a round that
/// fails without hitting the budget shows no deeper sequence exists
/// within the alphabet and width; the report then carries `exact_value`.
pub fn search_rank<T: TheoryOracle>(
    oracle: &T,
    p: &PartialType,
    alphabet: &[Formula],
    bounds: SearchBounds,
) -> Result<RankReport, RankError> {
    bounds.check()?;
    check_type(oracle, p)?;
    check_alphabet(oracle, p, alphabet)?;

    let mut searcher = Searcher {
        p,
        alphabet,
        bounds,
        initial: oracle.parameters().len(),
        truncated: false,
        stats: SearchStats::default(),
    };
    let root = || State {
        oracle: oracle.clone(),
        base: p.base.clone(),
        branch: p.formulas.clone(),
        entries: Vec::new(),
    };
    let mut best = root();
    let mut exhausted = true;
    let mut truncated = false;
    if oracle.admits_infinite_families() {
        for d in 1..=bounds.depth {
            searcher.stats.rounds += 1;
            searcher.truncated = false;
            match searcher.extend(root(), d)? {
                Some(found) => {
                    debug!("depth {d}: found");
                    best = found;
                }
                None => {
                    debug!("depth {d}: none (truncated: {})", searcher.truncated);
                    truncated = searcher.truncated;
                    exhausted = !truncated;
                    break;
                }
            }
        }
    }
    let depth = best.entries.len();
    let certificate = SequenceCertificate {
        ty: p.clone(),
        entries: best.entries,
    };
    let verdict = verify_sequence_certificate(&best.oracle, &certificate);
    if !verdict.is_valid() {
        let reasons: Vec<String> = verdict.failures.iter().map(ToString::to_string).collect();
        return Err(RankError::Unverified(reasons.join("; ")));
    }
    let exact_value = (exhausted && depth < bounds.depth).then_some(depth);
    info!("certified depth {depth}, exact {exact_value:?}, truncated {truncated}");
    Ok(RankReport {
        schema: REPORT_SCHEMA.to_string(),
        certified_lower: ExtOrdinal::finite(depth as u64),
        bounds,
        alphabet: alphabet.iter().map(render_formula).collect(),
        ty: p.clone(),
        exhausted,
        truncated,
        exact_value,
        certificate,
        theory: best.oracle.to_config().to_json(),
        stats: searcher.stats,
    })
}

/// Grows a tree of the given width whose level `j` uses the formula and k
/// of entry `j` of `seq`. Each node's children are independent copies over
/// the base and the parameters above it, so sibling families satisfy the
/// precondition of [`super::tree_branch_to_sequence`]. Returns the
/// extended theory with the tree, or `None` if some node has no family.
pub fn grow_tree<T: TheoryOracle>(
    oracle: &T,
    seq: &SequenceCertificate,
    width: usize,
) -> Result<Option<(T, TreeCertificate)>, RankError> {
    if width < 2 {
        return Err(RankError::InvalidBounds(format!("width {width}")));
    }
    let levels: Vec<TreeLevel> = seq
        .entries
        .iter()
        .map(|e| TreeLevel {
            formula: e.formula.clone(),
            k: e.witness.k,
        })
        .collect();
    let mut grower = Grower {
        levels: &levels,
        width,
        n: seq.ty.tuple_length,
        nodes: Vec::new(),
    };
    let grown = grower.grow(
        oracle.clone(),
        &seq.ty.base,
        &seq.ty.formulas,
        &mut Vec::new(),
    )?;
    Ok(grown.map(|o| {
        let mut nodes = grower.nodes;
        nodes.sort_by(|a, b| (a.path.len(), &a.path).cmp(&(b.path.len(), &b.path)));
        let tree = TreeCertificate {
            ty: seq.ty.clone(),
            depth: levels.len(),
            width,
            levels: levels.clone(),
            nodes,
        };
        (o, tree)
    }))
}

struct Grower<'a> {
    levels: &'a [TreeLevel],
    width: usize,
    n: usize,
    nodes: Vec<TreeNode>,
}

impl Grower<'_> {
    fn grow<T: TheoryOracle>(
        &mut self,
        oracle: T,
        base: &BTreeSet<String>,
        branch: &[Formula],
        path: &mut Vec<usize>,
    ) -> Result<Option<T>, RankError> {
        let Some(level) = self.levels.get(path.len()) else {
            return Ok(Some(oracle));
        };
        let template = &level.formula;
        'anchor: for (o, anchor) in canonical_anchors(&oracle, base, template.slot_count())? {
            if anchor.iter().all(|a| base.contains(a)) {
                continue;
            }
            let (mut o, copies) = o.independent_copies(&anchor, base, self.width - 1)?;
            let mut family = vec![anchor];
            family.extend(copies);
            if !check_k_inconsistent(&o, template, &family, level.k)? {
                continue;
            }
            let mut branches = Vec::with_capacity(self.width);
            for c in &family {
                let mut b = branch.to_vec();
                b.push(instantiate(template, c)?);
                if !o.consistent(&b, self.n)? {
                    continue 'anchor;
                }
                branches.push(b);
            }
            let mark = self.nodes.len();
            for (i, (c, b)) in family.iter().zip(&branches).enumerate() {
                let mut child_base = base.clone();
                child_base.extend(c.iter().cloned());
                path.push(i);
                let grown = self.grow(o.clone(), &child_base, b, path)?;
                path.pop();
                match grown {
                    Some(next) => o = next,
                    None => {
                        self.nodes.truncate(mark);
                        continue 'anchor;
                    }
                }
            }
            self.nodes.push(TreeNode {
                path: path.clone(),
                children: family,
            });
            return Ok(Some(o));
        }
        Ok(None)
    }
}
