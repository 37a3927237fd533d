//! Decidable theory backends.
//!
//! A backend stands in for a monster model: it owns a finite parameter
//! space (named elements with their facts), decides consistency of finite
//! sets of quantifier-free formulas instantiated with those parameters, and
//! can always produce new parameters realizing any quantifier-free type over
//! the existing ones (except [`FiniteStructure`], whose universe is fixed).
//!
//! Distinct parameter names always denote distinct elements.

mod equivalence;
mod finite;
mod pure_set;
mod random_graph;
mod solve;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::logic::{is_param_name, Formula, Signature};

pub use equivalence::EquivalenceConfig;
pub use equivalence::EquivalenceRelation;
pub use finite::{Axiom, FiniteConfig, FiniteStructure, RelationTable};
pub use pure_set::PureInfiniteSet;
pub use pure_set::PureSetConfig;
pub use random_graph::RandomGraph;
pub use random_graph::RandomGraphConfig;

/// Schema id written into theory documents.
pub const THEORY_SCHEMA: &str = "ddrank/theory/v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("invalid theory config: {0}")]
    Config(String),
    #[error("invalid formula set: {0}")]
    Structural(String),
    #[error("unknown parameter '{0}'")]
    UnknownParameter(String),
    #[error("the finite universe of size {size} has no room for new elements")]
    FiniteExhausted { size: usize },
    #[error("fresh-parameter request does not fit this backend: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    FiniteStructure,
    PureInfiniteSet,
    EquivalenceRelation,
    RandomGraph,
}

/// Constraints on a requested fresh parameter, relative to existing ones.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FreshSpec {
    /// A new point with no relations (pure set).
    Plain,
    /// A point in a class of its own (equivalence relation).
    NewClass,
    /// A point in the class of the named parameter (equivalence relation).
    SameClassAs(String),
    /// A vertex adjacent to exactly these parameters (random graph).
    Neighbors(BTreeSet<String>),
}

/// One quantifier-free type of a new element over a known set: either one
/// of the known parameters, or something fresh.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementChoice {
    Existing(String),
    Fresh(FreshSpec),
}

/// The interface every backend implements.
///
/// All operations take `&self`; growing the parameter space returns an
/// extended copy, so oracles can be shared freely between search workers.
pub trait TheoryOracle: Clone + Debug + Send + Sync {
    fn kind(&self) -> BackendKind;

    fn signature(&self) -> &Signature;

    /// All parameter names, in a fixed order.
    fn parameters(&self) -> Vec<String>;

    fn has_parameter(&self, name: &str) -> bool;

    /// Truth of `rel(args)` for parameters `args`.
    fn holds(&self, rel: &str, args: &[&str]) -> bool;

    /// Whether some tuple realizes all `formulas` (instances: free
    /// variables `x0 … x(tuple_length-1)` and parameters, no slots).
    fn consistent(&self, formulas: &[Formula], tuple_length: usize) -> Result<bool, TheoryError>;

    /// Whether `t1` and `t2` satisfy the same quantifier-free formulas with
    /// parameters from `base`.
    fn same_type_over(&self, t1: &[String], t2: &[String], base: &BTreeSet<String>) -> bool {
        generic_same_type_over(self, t1, t2, base)
    }

    /// Adds `count` parameters satisfying `spec`, returning their names.
    fn fresh_parameters(
        &self,
        spec: &FreshSpec,
        count: usize,
    ) -> Result<(Self, Vec<String>), TheoryError>;

    /// Every quantifier-free type of a single element over `known`, up to
    /// equivalence, in a fixed order.
    fn element_choices(&self, known: &[String]) -> Vec<ElementChoice>;

    /// `count` tuples with the same type as `tuple` over `base`, pairwise
    /// independent over `base`. Each copy reuses the base elements of
    /// `tuple` and is fresh elsewhere; any two copies stand in the same
    /// relation, so the family is indiscernible over `base`.
    fn independent_copies(
        &self,
        tuple: &[String],
        base: &BTreeSet<String>,
        count: usize,
    ) -> Result<(Self, Vec<Vec<String>>), TheoryError>;

    /// Whether the theory has infinite models, so that finite families of
    /// distinct conjugates extend to infinite indiscernible ones.
    fn admits_infinite_families(&self) -> bool {
        true
    }

    /// Relations whose truth does not depend on argument order.
    fn is_symmetric(&self, rel: &str) -> bool;

    fn to_config(&self) -> TheoryConfig;

    /// Applies an injective renaming to the parameter space. Names missing
    /// from `map` are kept.
    fn rename(&self, map: &BTreeMap<String, String>) -> Result<Self, TheoryError>;
}

/// Realizes a single fresh element given by `choice`, if needed.
pub fn realize_choice<T: TheoryOracle>(
    theory: &T,
    choice: &ElementChoice,
) -> Result<(T, String), TheoryError> {
    match choice {
        ElementChoice::Existing(name) => Ok((theory.clone(), name.clone())),
        ElementChoice::Fresh(spec) => {
            let (next, mut names) = theory.fresh_parameters(spec, 1)?;
            Ok((next, names.pop().expect("one fresh name")))
        }
    }
}

/// Partial-isomorphism check through [`TheoryOracle::holds`].
pub fn generic_same_type_over<T: TheoryOracle>(
    theory: &T,
    t1: &[String],
    t2: &[String],
    base: &BTreeSet<String>,
) -> bool {
    if t1.len() != t2.len() {
        return false;
    }
    // Equality pattern, inside the tuples and against the base.
    for i in 0..t1.len() {
        if base.contains(&t1[i]) != base.contains(&t2[i]) {
            return false;
        }
        if base.contains(&t1[i]) && t1[i] != t2[i] {
            return false;
        }
        for j in 0..i {
            if (t1[i] == t1[j]) != (t2[i] == t2[j]) {
                return false;
            }
        }
    }
    // Relations over base ∪ tuple, for argument lists touching the tuple.
    let base: Vec<&str> = base.iter().map(String::as_str).collect();
    let n = t1.len();
    for (rel, arity) in theory.signature().relations() {
        let points = base.len() + n;
        let mut idx = vec![0usize; arity];
        loop {
            if idx.iter().any(|&i| i >= base.len()) {
                let pick = |t: &'_ [String], i: usize| -> String {
                    if i < base.len() {
                        base[i].to_string()
                    } else {
                        t[i - base.len()].clone()
                    }
                };
                let a1: Vec<String> = idx.iter().map(|&i| pick(t1, i)).collect();
                let a2: Vec<String> = idx.iter().map(|&i| pick(t2, i)).collect();
                let r1: Vec<&str> = a1.iter().map(String::as_str).collect();
                let r2: Vec<&str> = a2.iter().map(String::as_str).collect();
                if theory.holds(rel, &r1) != theory.holds(rel, &r2) {
                    return false;
                }
            }
            if !advance(&mut idx, points) {
                break;
            }
        }
    }
    true
}

/// Odometer increment over `[0, radix)^len`; false after the last tuple.
pub(crate) fn advance(idx: &mut [usize], radix: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// First name `n<k>` (k from `*counter`) not already taken.
pub(crate) fn next_fresh_name(counter: &mut usize, taken: impl Fn(&str) -> bool) -> String {
    loop {
        let name = format!("n{counter}");
        *counter += 1;
        if !taken(&name) {
            return name;
        }
    }
}

pub(crate) fn check_param_names<'a>(
    names: impl IntoIterator<Item = &'a String>,
) -> Result<(), TheoryError> {
    let mut seen = BTreeSet::new();
    for name in names {
        if !is_param_name(name) {
            return Err(TheoryError::Config(format!(
                "'{name}' is not a valid parameter name"
            )));
        }
        if !seen.insert(name) {
            return Err(TheoryError::Config(format!(
                "parameter '{name}' declared twice"
            )));
        }
    }
    Ok(())
}

/// Renames through `map`, rejecting collisions.
pub(crate) fn rename_all(
    names: impl IntoIterator<Item = String>,
    map: &BTreeMap<String, String>,
) -> Result<Vec<String>, TheoryError> {
    let out: Vec<String> = names
        .into_iter()
        .map(|n| map.get(&n).cloned().unwrap_or(n))
        .collect();
    check_param_names(out.iter()).map_err(|e| match e {
        TheoryError::Config(m) => TheoryError::Config(format!("renaming is not injective: {m}")),
        other => other,
    })?;
    Ok(out)
}

pub(crate) fn renamed(name: &str, map: &BTreeMap<String, String>) -> String {
    map.get(name).cloned().unwrap_or_else(|| name.to_string())
}

/// Backend payloads of a theory document, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TheoryConfig {
    FiniteStructure(finite::FiniteConfig),
    PureInfiniteSet(pure_set::PureSetConfig),
    EquivalenceRelation(equivalence::EquivalenceConfig),
    RandomGraph(random_graph::RandomGraphConfig),
}

impl TheoryConfig {
    /// JSON document with the schema id.
    pub fn to_json(&self) -> Value {
        let mut value = serde_json::to_value(self).expect("configs serialize");
        if let Value::Object(map) = &mut value {
            map.insert("schema".into(), Value::String(THEORY_SCHEMA.into()));
        }
        value
    }

    pub fn from_json(value: &Value) -> Result<Self, TheoryError> {
        let mut value = value.clone();
        if let Value::Object(map) = &mut value {
            match map.remove("schema") {
                None => {}
                Some(Value::String(s)) if s == THEORY_SCHEMA => {}
                Some(other) => {
                    return Err(TheoryError::Config(format!(
                        "unsupported schema {other}, expected \"{THEORY_SCHEMA}\""
                    )))
                }
            }
        }
        serde_json::from_value(value).map_err(|e| TheoryError::Config(e.to_string()))
    }
}

/// Any bundled backend.
#[derive(Debug, Clone)]
pub enum AnyTheory {
    Finite(FiniteStructure),
    PureSet(PureInfiniteSet),
    Equivalence(EquivalenceRelation),
    RandomGraph(RandomGraph),
}

/// Builds and validates an oracle from its config.
pub fn load_theory(config: &TheoryConfig) -> Result<AnyTheory, TheoryError> {
    Ok(match config {
        TheoryConfig::FiniteStructure(c) => AnyTheory::Finite(FiniteStructure::from_config(c)?),
        TheoryConfig::PureInfiniteSet(c) => AnyTheory::PureSet(PureInfiniteSet::from_config(c)?),
        TheoryConfig::EquivalenceRelation(c) => {
            AnyTheory::Equivalence(EquivalenceRelation::from_config(c)?)
        }
        TheoryConfig::RandomGraph(c) => AnyTheory::RandomGraph(RandomGraph::from_config(c)?),
    })
}

/// Parses a theory document (JSON text) and loads it.
pub fn load_theory_json(text: &str) -> Result<AnyTheory, TheoryError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| TheoryError::Config(e.to_string()))?;
    load_theory(&TheoryConfig::from_json(&value)?)
}

/// Names accepted by [`builtin_theory`].
pub const BUILTIN_THEORIES: [&str; 4] = ["pure_set", "eq_rel", "random_graph", "finite"];

/// The bundled example theories, all with an empty parameter space except
/// `finite`: universe `{0,1,2}` with `E` the equivalence with classes
/// `{0,1}` and `{2}`.
pub fn builtin_theory(name: &str) -> Option<AnyTheory> {
    Some(match name {
        "pure_set" => AnyTheory::PureSet(PureInfiniteSet::new()),
        "eq_rel" => AnyTheory::Equivalence(EquivalenceRelation::new()),
        "random_graph" => AnyTheory::RandomGraph(RandomGraph::new()),
        "finite" => AnyTheory::Finite(FiniteStructure::small_equivalence()),
        _ => return None,
    })
}

macro_rules! dispatch {
    ($self:ident, $t:ident => $e:expr) => {
        match $self {
            AnyTheory::Finite($t) => $e,
            AnyTheory::PureSet($t) => $e,
            AnyTheory::Equivalence($t) => $e,
            AnyTheory::RandomGraph($t) => $e,
        }
    };
}

macro_rules! dispatch_wrap {
    ($self:ident, $t:ident => $e:expr) => {
        match $self {
            AnyTheory::Finite($t) => $e.map(|(x, y)| (AnyTheory::Finite(x), y)),
            AnyTheory::PureSet($t) => $e.map(|(x, y)| (AnyTheory::PureSet(x), y)),
            AnyTheory::Equivalence($t) => $e.map(|(x, y)| (AnyTheory::Equivalence(x), y)),
            AnyTheory::RandomGraph($t) => $e.map(|(x, y)| (AnyTheory::RandomGraph(x), y)),
        }
    };
}

impl TheoryOracle for AnyTheory {
    fn kind(&self) -> BackendKind {
        dispatch!(self, t => t.kind())
    }

    fn signature(&self) -> &Signature {
        dispatch!(self, t => t.signature())
    }

    fn parameters(&self) -> Vec<String> {
        dispatch!(self, t => t.parameters())
    }

    fn has_parameter(&self, name: &str) -> bool {
        dispatch!(self, t => t.has_parameter(name))
    }

    fn holds(&self, rel: &str, args: &[&str]) -> bool {
        dispatch!(self, t => t.holds(rel, args))
    }

    fn consistent(&self, formulas: &[Formula], tuple_length: usize) -> Result<bool, TheoryError> {
        dispatch!(self, t => t.consistent(formulas, tuple_length))
    }

    fn same_type_over(&self, t1: &[String], t2: &[String], base: &BTreeSet<String>) -> bool {
        dispatch!(self, t => t.same_type_over(t1, t2, base))
    }

    fn fresh_parameters(
        &self,
        spec: &FreshSpec,
        count: usize,
    ) -> Result<(Self, Vec<String>), TheoryError> {
        dispatch_wrap!(self, t => t.fresh_parameters(spec, count))
    }

    fn element_choices(&self, known: &[String]) -> Vec<ElementChoice> {
        dispatch!(self, t => t.element_choices(known))
    }

    fn independent_copies(
        &self,
        tuple: &[String],
        base: &BTreeSet<String>,
        count: usize,
    ) -> Result<(Self, Vec<Vec<String>>), TheoryError> {
        dispatch_wrap!(self, t => t.independent_copies(tuple, base, count))
    }

    fn admits_infinite_families(&self) -> bool {
        dispatch!(self, t => t.admits_infinite_families())
    }

    fn is_symmetric(&self, rel: &str) -> bool {
        dispatch!(self, t => t.is_symmetric(rel))
    }

    fn to_config(&self) -> TheoryConfig {
        dispatch!(self, t => t.to_config())
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Result<Self, TheoryError> {
        Ok(match self {
            AnyTheory::Finite(t) => AnyTheory::Finite(t.rename(map)?),
            AnyTheory::PureSet(t) => AnyTheory::PureSet(t.rename(map)?),
            AnyTheory::Equivalence(t) => AnyTheory::Equivalence(t.rename(map)?),
            AnyTheory::RandomGraph(t) => AnyTheory::RandomGraph(t.rename(map)?),
        })
    }
}
