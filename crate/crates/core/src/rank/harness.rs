//! Seeded checks of rank laws on exactly computed small values. Each
//! [`HarnessKind`] names one law.
//!
//! Instances are generated sequentially from the seed and evaluated in
//! parallel; results are collected in instance order, so for a given
//! theory a report depends only on the seed and the bounds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::logic::{render_formula, Formula, PartialType};
use crate::ordinals::ExtOrdinal;
use crate::theories::{realize_choice, ElementChoice, TheoryOracle};

use super::atoms::{atomic_alphabet, atoms_over, qf_type_of};
use super::search::{canonical_anchors, search_rank, SearchBounds};
use super::RankError;

pub const HARNESS_SCHEMA: &str = "ddrank/harness/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarnessKind {
    /// `DD(a/A)₊ +̂ DD(b/Aa)₊ ≤ DD(ab/A)₊ ≤ DD(a/A)₊ ⊕̂ DD(b/Aa)₊`.
    Lascar,
    /// `DD(p ∨ q) = max(DD(p), DD(q))`.
    Disjunction,
    /// `DD(p)` is the largest depth among the completions of `p` over `A`.
    CompletionSup,
}

impl HarnessKind {
    pub fn name(self) -> &'static str {
        match self {
            HarnessKind::Lascar => "lascar",
            HarnessKind::Disjunction => "disjunction",
            HarnessKind::CompletionSup => "completion_sup",
        }
    }

    /// Search bounds used unless the caller overrides them.
    pub fn default_bounds(self) -> SearchBounds {
        match self {
            HarnessKind::Lascar => SearchBounds::new(5, 4, 64),
            HarnessKind::Disjunction | HarnessKind::CompletionSup => SearchBounds::new(3, 4, 64),
        }
    }
}

impl fmt::Display for HarnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HarnessKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lascar" => Ok(HarnessKind::Lascar),
            "disjunction" => Ok(HarnessKind::Disjunction),
            "completion_sup" => Ok(HarnessKind::CompletionSup),
            other => Err(format!("unknown harness '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub instances: usize,
    pub seed: u64,
    pub bounds: SearchBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// Some rank was not determined exactly within the bounds.
    Inconclusive,
}

/// One inequality or equation between computed ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub law: String,
    pub lhs: ExtOrdinal,
    pub rhs: ExtOrdinal,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub instance: Value,
    /// Exact ranks by name; `null` when the search was not exhaustive.
    pub ranks: BTreeMap<String, Option<usize>>,
    pub checks: Vec<Check>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub schema: String,
    pub kind: HarnessKind,
    pub theory: Value,
    pub seed: u64,
    pub bounds: SearchBounds,
    pub instances: Vec<InstanceRecord>,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

impl HarnessReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

pub fn run_harness<T: TheoryOracle>(
    kind: HarnessKind,
    oracle: &T,
    config: &HarnessConfig,
) -> Result<HarnessReport, RankError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let records = match kind {
        HarnessKind::Lascar => {
            let inst: Vec<_> = (0..config.instances)
                .map(|_| lascar_instance(oracle, &mut rng))
                .collect::<Result<_, _>>()?;
            evaluate(&inst, |(o, a, b, base)| {
                lascar_check(o, a, b, base, config.bounds)
            })?
        }
        HarnessKind::Disjunction => {
            let inst: Vec<_> = (0..config.instances)
                .map(|_| disjunction_instance(oracle, &mut rng))
                .collect::<Result<_, _>>()?;
            evaluate(&inst, |(o, p, q)| disjunction_check(o, p, q, config.bounds))?
        }
        HarnessKind::CompletionSup => {
            let inst: Vec<_> = (0..config.instances)
                .map(|_| {
                    let (o, base) = random_base(oracle, &mut rng)?;
                    let p = random_literals(&o, &base, &mut rng)?;
                    Ok::<_, RankError>((o, p))
                })
                .collect::<Result<_, _>>()?;
            evaluate(&inst, |(o, p)| completion_sup_check(o, p, config.bounds))?
        }
    };
    let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count();
    Ok(HarnessReport {
        schema: HARNESS_SCHEMA.to_string(),
        kind,
        theory: oracle.to_config().to_json(),
        seed: config.seed,
        bounds: config.bounds,
        passed: count(Outcome::Pass),
        failed: count(Outcome::Fail),
        inconclusive: count(Outcome::Inconclusive),
        instances: records,
    })
}

fn evaluate<I: Sync>(
    instances: &[I],
    check: impl Fn(&I) -> Result<InstanceRecord, RankError> + Sync,
) -> Result<Vec<InstanceRecord>, RankError> {
    let mut records = instances
        .par_iter()
        .map(&check)
        .collect::<Result<Vec<_>, _>>()?;
    for (i, r) in records.iter_mut().enumerate() {
        r.index = i;
    }
    Ok(records)
}

/// The exact rank of `p` over the atomic alphabet, if the search decides it.
pub fn exact_rank<T: TheoryOracle>(
    oracle: &T,
    p: &PartialType,
    bounds: SearchBounds,
) -> Result<Option<usize>, RankError> {
    let alphabet = atomic_alphabet(oracle, p.tuple_length);
    Ok(search_rank(oracle, p, &alphabet, bounds)?.exact_value)
}

fn record(
    instance: Value,
    ranks: BTreeMap<String, Option<usize>>,
    checks: Vec<Check>,
) -> InstanceRecord {
    let outcome = if ranks.values().any(Option::is_none) {
        Outcome::Inconclusive
    } else if checks.iter().all(|c| c.holds) {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    InstanceRecord {
        index: 0,
        instance,
        ranks,
        checks,
        outcome,
    }
}

fn check(
    law: &str,
    lhs: ExtOrdinal,
    rhs: ExtOrdinal,
    holds: impl Fn(&ExtOrdinal, &ExtOrdinal) -> bool,
) -> Check {
    Check {
        law: law.to_string(),
        holds: holds(&lhs, &rhs),
        lhs,
        rhs,
    }
}

fn fin(n: usize) -> ExtOrdinal {
    ExtOrdinal::finite(n as u64)
}

fn describe_type(p: &PartialType) -> Value {
    json!({
        "formulas": p.formulas.iter().map(render_formula).collect::<Vec<_>>(),
        "base": p.base,
    })
}

/// Compares `DD(ab/A)`, `DD(a/A)` and `DD(b/Aa)` for the elements `a`, `b`.
pub fn lascar_check<T: TheoryOracle>(
    oracle: &T,
    a: &str,
    b: &str,
    base: &BTreeSet<String>,
    bounds: SearchBounds,
) -> Result<InstanceRecord, RankError> {
    let (a, b) = (a.to_string(), b.to_string());
    let ab = qf_type_of(oracle, &[a.clone(), b.clone()], base);
    let pa = qf_type_of(oracle, std::slice::from_ref(&a), base);
    let mut base_a = base.clone();
    base_a.insert(a.clone());
    let pb = qf_type_of(oracle, std::slice::from_ref(&b), &base_a);
    let ranks = BTreeMap::from([
        ("ab/A".to_string(), exact_rank(oracle, &ab, bounds)?),
        ("a/A".to_string(), exact_rank(oracle, &pa, bounds)?),
        ("b/Aa".to_string(), exact_rank(oracle, &pb, bounds)?),
    ]);
    let mut checks = Vec::new();
    if let (Some(dab), Some(da), Some(db)) = (ranks["ab/A"], ranks["a/A"], ranks["b/Aa"]) {
        checks.push(check(
            "DD(ab/A) <= DD(a/A) (o^) DD(b/Aa)",
            fin(dab),
            fin(da).hat_oplus(&fin(db)),
            |l, r| l <= r,
        ));
        checks.push(check(
            "DD(a/A) (+^) DD(b/Aa) <= DD(ab/A)",
            fin(da).hat_plus(&fin(db)),
            fin(dab),
            |l, r| l <= r,
        ));
    }
    let instance = json!({ "a": a, "b": b, "base": base, "type_ab": describe_type(&ab) });
    Ok(record(instance, ranks, checks))
}

/// Checks `DD(p ∨ q) = max(DD(p), DD(q))` for one-variable types over a
/// common base, with `p ∨ q` a single disjunction.
pub fn disjunction_check<T: TheoryOracle>(
    oracle: &T,
    p: &PartialType,
    q: &PartialType,
    bounds: SearchBounds,
) -> Result<InstanceRecord, RankError> {
    let conj =
        |t: &PartialType| Formula::conjunction(t.formulas.iter().cloned()).expect("non-empty");
    let pq = PartialType {
        tuple_length: p.tuple_length,
        formulas: vec![Formula::or(conj(p), conj(q))],
        base: p.base.clone(),
    };
    let ranks = BTreeMap::from([
        ("p".to_string(), exact_rank(oracle, p, bounds)?),
        ("q".to_string(), exact_rank(oracle, q, bounds)?),
        ("p|q".to_string(), exact_rank(oracle, &pq, bounds)?),
    ]);
    let mut checks = Vec::new();
    if let (Some(dp), Some(dq), Some(dpq)) = (ranks["p"], ranks["q"], ranks["p|q"]) {
        checks.push(check(
            "DD(p|q) = max(DD(p), DD(q))",
            fin(dpq),
            fin(dp.max(dq)),
            |l, r| l == r,
        ));
    }
    let instance = json!({ "p": describe_type(p), "q": describe_type(q) });
    Ok(record(instance, ranks, checks))
}

/// Checks that `DD(p)` is the largest rank of a completion of `p` over its
/// base, one completion per quantifier-free type of a realization.
pub fn completion_sup_check<T: TheoryOracle>(
    oracle: &T,
    p: &PartialType,
    bounds: SearchBounds,
) -> Result<InstanceRecord, RankError> {
    let mut ranks = BTreeMap::from([("p".to_string(), exact_rank(oracle, p, bounds)?)]);
    let mut completions = Vec::new();
    for (o, tuple) in canonical_anchors(oracle, &p.base, p.tuple_length)? {
        let satisfied = p.formulas.iter().all(|f| {
            f.bind_vars(&tuple)
                .eval_closed(&mut |r, args| o.holds(r, args), &mut |x, y| x == y)
        });
        if !satisfied {
            continue;
        }
        let c = qf_type_of(&o, &tuple, &p.base);
        let name = format!("c{}", completions.len());
        ranks.insert(name, exact_rank(&o, &c, bounds)?);
        completions.push(describe_type(&c));
    }
    let mut checks = Vec::new();
    let values: Option<Vec<usize>> = ranks.values().copied().collect();
    if let (Some(_), Some(dp)) = (values, ranks["p"]) {
        let sup = (0..completions.len())
            .filter_map(|i| ranks[&format!("c{i}")])
            .max()
            .unwrap_or(0);
        checks.push(check("DD(p) = max DD(c)", fin(dp), fin(sup), |l, r| l == r));
    }
    let instance = json!({ "p": describe_type(p), "completions": completions });
    Ok(record(instance, ranks, checks))
}

/// Adds two to four random fresh parameters and picks a base of at most
/// two of the resulting parameters.
fn random_base<T: TheoryOracle>(
    oracle: &T,
    rng: &mut ChaCha8Rng,
) -> Result<(T, Vec<String>), RankError> {
    let mut o = oracle.clone();
    let mut pool = o.parameters();
    for _ in 0..rng.gen_range(2..=4) {
        let fresh: Vec<ElementChoice> = o
            .element_choices(&pool)
            .into_iter()
            .filter(|c| matches!(c, ElementChoice::Fresh(_)))
            .collect();
        let Some(choice) = fresh.choose(rng) else {
            break;
        };
        let (next, name) = realize_choice(&o, choice)?;
        o = next;
        pool.push(name);
    }
    let size = rng.gen_range(0..=2.min(pool.len()));
    let base = pool.choose_multiple(rng, size).cloned().collect();
    Ok((o, base))
}

fn lascar_instance<T: TheoryOracle>(
    oracle: &T,
    rng: &mut ChaCha8Rng,
) -> Result<(T, String, String, BTreeSet<String>), RankError> {
    let (o, mut base) = random_base(oracle, rng)?;
    let pool = o.parameters();
    // Keep two elements outside the base.
    while pool.len() - base.len() < 2 && !base.is_empty() {
        base.pop();
    }
    let base: BTreeSet<String> = base.into_iter().collect();
    let outside: Vec<&String> = pool.iter().filter(|p| !base.contains(*p)).collect();
    let pair: Vec<&&String> = outside.choose_multiple(rng, 2).collect();
    if pair.len() < 2 {
        return Err(RankError::InvalidBounds(
            "the theory has fewer than two elements".into(),
        ));
    }
    Ok((o, pair[0].to_string(), pair[1].to_string(), base))
}

/// One to two random literals in `x0` over `base` that are jointly
/// consistent.
fn random_literals<T: TheoryOracle>(
    oracle: &T,
    base: &[String],
    rng: &mut ChaCha8Rng,
) -> Result<PartialType, RankError> {
    let atoms = atoms_over(oracle, 1, base);
    let base_set: BTreeSet<String> = base.iter().cloned().collect();
    if atoms.is_empty() {
        return Ok(PartialType {
            base: base_set,
            ..PartialType::trivial(1)
        });
    }
    loop {
        let count = rng.gen_range(1..=2);
        let formulas: Vec<Formula> = (0..count)
            .map(|_| {
                let atom = atoms.choose(rng).expect("atoms exist").clone();
                if rng.gen_bool(0.5) {
                    atom
                } else {
                    Formula::not(atom)
                }
            })
            .collect();
        if oracle.consistent(&formulas, 1)? {
            return Ok(PartialType {
                tuple_length: 1,
                formulas,
                base: base_set,
            });
        }
    }
}

fn disjunction_instance<T: TheoryOracle>(
    oracle: &T,
    rng: &mut ChaCha8Rng,
) -> Result<(T, PartialType, PartialType), RankError> {
    let (o, base) = random_base(oracle, rng)?;
    let p = random_literals(&o, &base, rng)?;
    let q = random_literals(&o, &base, rng)?;
    Ok((o, p, q))
}
