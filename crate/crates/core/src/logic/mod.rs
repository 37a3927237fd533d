//! Quantifier-free relational formulas.
//!
//! A [`Formula`] speaks about a designated tuple of free variables
//! `x0, x1, …`, named parameters (elements of a theory's parameter space),
//! and abstract parameter slots `y0, y1, …`. Slots only appear in formula
//! templates such as `E(x0,y0)`; [`substitute`] turns a template into an
//! instance by assigning parameter names to its slots.

mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use parser::parse_formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown relation symbol '{name}'")]
    UnknownRelation { name: String },
    #[error("relation '{name}' has arity {expected}, used with {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("slot y{0} has no assigned parameter")]
    UnassignedSlot(usize),
    #[error("invalid term '{0}'")]
    InvalidTerm(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
}

/// Relation symbols with their arities. Equality is always available and
/// is not listed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct Signature {
    relations: BTreeMap<String, usize>,
}

impl Signature {
    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn new<I, S>(relations: I) -> Result<Self, LogicError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out = BTreeMap::new();
        for (name, arity) in relations {
            let name = name.into();
            if !is_identifier(&name) || is_reserved(&name) {
                return Err(LogicError::InvalidSignature(format!(
                    "'{name}' is not a valid relation name"
                )));
            }
            if arity == 0 {
                return Err(LogicError::InvalidSignature(format!(
                    "relation '{name}' must have positive arity"
                )));
            }
            if out.insert(name.clone(), arity).is_some() {
                return Err(LogicError::InvalidSignature(format!(
                    "relation '{name}' declared twice"
                )));
            }
        }
        Ok(Signature { relations: out })
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, usize>::deserialize(d)?;
        Signature::new(raw).map_err(serde::de::Error::custom)
    }
}

/// A term: a free variable `x<k>`, a slot `y<k>`, or a named parameter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(usize),
    Slot(usize),
    Param(String),
}

impl Term {
    pub fn param(name: impl Into<String>) -> Term {
        Term::Param(name.into())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::Slot(i) => write!(f, "y{i}"),
            Term::Param(p) => f.write_str(p),
        }
    }
}

impl FromStr for Term {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(i) = indexed(s, 'x') {
            return Ok(Term::Var(i));
        }
        if let Some(i) = indexed(s, 'y') {
            return Ok(Term::Slot(i));
        }
        if is_param_name(s) {
            Ok(Term::Param(s.to_string()))
        } else {
            Err(LogicError::InvalidTerm(s.to_string()))
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// `x<k>` / `y<k>` with a canonical decimal index.
fn indexed(s: &str, prefix: char) -> Option<usize> {
    let digits = s.strip_prefix(prefix)?;
    let canonical = digits == "0" || (!digits.starts_with('0') && !digits.is_empty());
    if canonical && digits.bytes().all(|b| b.is_ascii_digit()) {
        digits.parse().ok()
    } else {
        None
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Names of the form `x<digits>` / `y<digits>` are reserved for variables
/// and slots, even when not canonical (`x01`).
fn is_reserved(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('x' | 'y'))
        && !s[1..].is_empty()
        && chars.all(|c| c.is_ascii_digit())
}

/// Whether `s` can name a parameter: ASCII alphanumerics or underscores, not
/// reserved for variables or slots.
pub fn is_param_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !is_reserved(s)
}

/// Quantifier-free formula AST.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Atom { rel: String, args: Vec<Term> },
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: impl Into<String>, args: Vec<Term>) -> Formula {
        Formula::Atom {
            rel: rel.into(),
            args,
        }
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `None` for an empty input.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(parts: I) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    /// Flattens nested conjunctions into their conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            other => vec![other],
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.visit_terms(&mut |t| out.push(t));
        out
    }

    fn visit_terms<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        match self {
            Formula::Atom { args, .. } => args.iter().for_each(f),
            Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(inner) => inner.visit_terms(f),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
        }
    }

    /// Rebuilds the formula with every term passed through `f`.
    pub fn map_terms<E>(&self, f: &mut impl FnMut(&Term) -> Result<Term, E>) -> Result<Formula, E> {
        Ok(match self {
            Formula::Atom { rel, args } => Formula::Atom {
                rel: rel.clone(),
                args: args.iter().map(&mut *f).collect::<Result<_, _>>()?,
            },
            Formula::Eq(a, b) => Formula::Eq(f(a)?, f(b)?),
            Formula::Not(inner) => Formula::not(inner.map_terms(f)?),
            Formula::And(a, b) => Formula::and(a.map_terms(f)?, b.map_terms(f)?),
            Formula::Or(a, b) => Formula::or(a.map_terms(f)?, b.map_terms(f)?),
        })
    }

    fn map_infallible(&self, mut f: impl FnMut(&Term) -> Term) -> Formula {
        self.map_terms(&mut |t| Ok::<_, std::convert::Infallible>(f(t)))
            .unwrap_or_else(|e| match e {})
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        self.terms()
            .into_iter()
            .filter_map(|t| match t {
                Term::Var(i) => Some(*i),
                _ => None,
            })
            .collect()
    }

    pub fn slots(&self) -> BTreeSet<usize> {
        self.terms()
            .into_iter()
            .filter_map(|t| match t {
                Term::Slot(i) => Some(*i),
                _ => None,
            })
            .collect()
    }

    pub fn params(&self) -> BTreeSet<&str> {
        self.terms()
            .into_iter()
            .filter_map(|t| match t {
                Term::Param(p) => Some(p.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Number of slots a template needs: one more than the largest slot.
    pub fn slot_count(&self) -> usize {
        self.slots().last().map_or(0, |m| m + 1)
    }

    /// Adds `offset` to every variable index.
    pub fn shift_vars(&self, offset: usize) -> Formula {
        self.map_infallible(|t| match t {
            Term::Var(i) => Term::Var(i + offset),
            other => other.clone(),
        })
    }

    /// Renames parameters through `map`; unmapped names are kept.
    pub fn rename_params(&self, map: &BTreeMap<String, String>) -> Formula {
        self.map_infallible(|t| match t {
            Term::Param(p) => Term::Param(map.get(p).cloned().unwrap_or_else(|| p.clone())),
            other => other.clone(),
        })
    }

    /// Checks relation symbols and arities against `sig`.
    pub fn check_signature(&self, sig: &Signature) -> Result<(), LogicError> {
        match self {
            Formula::Atom { rel, args } => match sig.arity(rel) {
                None => Err(LogicError::UnknownRelation { name: rel.clone() }),
                Some(expected) if expected != args.len() => Err(LogicError::ArityMismatch {
                    name: rel.clone(),
                    expected,
                    found: args.len(),
                }),
                Some(_) => Ok(()),
            },
            Formula::Eq(..) => Ok(()),
            Formula::Not(inner) => inner.check_signature(sig),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.check_signature(sig)?;
                b.check_signature(sig)
            }
        }
    }

    /// Evaluates a formula without variables or slots, given the truth of
    /// atoms and equality between parameters.
    pub fn eval_closed(
        &self,
        atom: &mut impl FnMut(&str, &[&str]) -> bool,
        eq: &mut impl FnMut(&str, &str) -> bool,
    ) -> bool {
        fn name(t: &Term) -> &str {
            match t {
                Term::Param(p) => p,
                other => panic!("closed evaluation met a free term {other}"),
            }
        }
        match self {
            Formula::Atom { rel, args } => {
                let names: Vec<&str> = args.iter().map(name).collect();
                atom(rel, &names)
            }
            Formula::Eq(a, b) => eq(name(a), name(b)),
            Formula::Not(inner) => !inner.eval_closed(atom, eq),
            Formula::And(a, b) => a.eval_closed(atom, eq) && b.eval_closed(atom, eq),
            Formula::Or(a, b) => a.eval_closed(atom, eq) || b.eval_closed(atom, eq),
        }
    }

    /// Replaces variable `x<i>` by the parameter `values[i]`.
    pub fn bind_vars(&self, values: &[String]) -> Formula {
        self.map_infallible(|t| match t {
            Term::Var(i) => Term::Param(values[*i].clone()),
            other => other.clone(),
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

/// Renders a formula in the text grammar. Nested binary connectives are
/// parenthesized, so the output parses back to the same tree.
pub fn render_formula(f: &Formula) -> String {
    let mut out = String::new();
    render_into(f, false, &mut out);
    out
}

fn render_into(f: &Formula, nested: bool, out: &mut String) {
    use std::fmt::Write;
    match f {
        Formula::Atom { rel, args } => {
            out.push_str(rel);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{a}");
            }
            out.push(')');
        }
        Formula::Eq(a, b) => {
            let _ = write!(out, "{a} = {b}");
        }
        Formula::Not(inner) => {
            out.push('!');
            if let Formula::Eq(a, b) = inner.as_ref() {
                let _ = write!(out, "({a} = {b})");
            } else {
                render_into(inner, true, out);
            }
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let op = if matches!(f, Formula::And(..)) {
                " & "
            } else {
                " | "
            };
            if nested {
                out.push('(');
            }
            render_into(a, true, out);
            out.push_str(op);
            render_into(b, true, out);
            if nested {
                out.push(')');
            }
        }
    }
}

/// Replaces slots by the parameters assigned to them. Every slot in `f`
/// must be assigned.
pub fn substitute(
    f: &Formula,
    assignment: &BTreeMap<usize, String>,
) -> Result<Formula, LogicError> {
    f.map_terms(&mut |t| match t {
        Term::Slot(i) => assignment
            .get(i)
            .map(|p| Term::Param(p.clone()))
            .ok_or(LogicError::UnassignedSlot(*i)),
        other => Ok(other.clone()),
    })
}

/// Like [`substitute`], leaving unassigned slots in place.
pub fn substitute_partial(f: &Formula, assignment: &BTreeMap<usize, String>) -> Formula {
    f.map_infallible(|t| match t {
        Term::Slot(i) => assignment
            .get(i)
            .map_or_else(|| t.clone(), |p| Term::Param(p.clone())),
        other => other.clone(),
    })
}

/// Instantiates a template with slot `y<i>` taking `anchor[i]`.
pub fn instantiate(f: &Formula, anchor: &[String]) -> Result<Formula, LogicError> {
    let assignment = anchor.iter().cloned().enumerate().collect();
    substitute(f, &assignment)
}

/// A finite set of formulas in the free tuple `x0 … x(n-1)` over the
/// parameter set `base`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialType {
    pub tuple_length: usize,
    pub formulas: Vec<Formula>,
    #[serde(default)]
    pub base: BTreeSet<String>,
}

impl PartialType {
    pub fn new(
        tuple_length: usize,
        formulas: Vec<Formula>,
        base: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        PartialType {
            tuple_length,
            formulas,
            base: base.into_iter().map(Into::into).collect(),
        }
    }

    /// `{x0 = x0, …}`: the type with no information.
    pub fn trivial(tuple_length: usize) -> Self {
        let formulas = (0..tuple_length)
            .map(|i| Formula::eq(Term::Var(i), Term::Var(i)))
            .collect();
        PartialType::new(tuple_length, formulas, Vec::<String>::new())
    }

    /// Parses each formula of a textual type description.
    pub fn parse(
        tuple_length: usize,
        formulas: &[&str],
        base: &[&str],
        sig: &Signature,
    ) -> Result<Self, LogicError> {
        let formulas = formulas
            .iter()
            .map(|s| parse_formula(s, sig))
            .collect::<Result<_, _>>()?;
        Ok(PartialType::new(
            tuple_length,
            formulas,
            base.iter().copied(),
        ))
    }

    pub fn rename_params(&self, map: &BTreeMap<String, String>) -> PartialType {
        PartialType {
            tuple_length: self.tuple_length,
            formulas: self.formulas.iter().map(|f| f.rename_params(map)).collect(),
            base: self
                .base
                .iter()
                .map(|p| map.get(p).cloned().unwrap_or_else(|| p.clone()))
                .collect(),
        }
    }
}

/// A formula as written in input files: either text in the formula
/// grammar or the JSON AST.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormulaInput {
    Text(String),
    Ast(Formula),
}

impl FormulaInput {
    pub fn resolve(&self, sig: &Signature) -> Result<Formula, LogicError> {
        match self {
            FormulaInput::Text(text) => parse_formula(text, sig),
            FormulaInput::Ast(f) => {
                f.check_signature(sig)?;
                Ok(f.clone())
            }
        }
    }
}

/// A [`PartialType`] whose formulas may still be text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeInput {
    pub tuple_length: usize,
    pub formulas: Vec<FormulaInput>,
    #[serde(default)]
    pub base: BTreeSet<String>,
}

impl TypeInput {
    pub fn resolve(&self, sig: &Signature) -> Result<PartialType, LogicError> {
        Ok(PartialType {
            tuple_length: self.tuple_length,
            formulas: self
                .formulas
                .iter()
                .map(|f| f.resolve(sig))
                .collect::<Result<_, _>>()?,
            base: self.base.clone(),
        })
    }
}

/// One way a [`PartialType`] can fail validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Violation {
    EmptyTuple,
    UnknownRelation {
        formula: usize,
        name: String,
    },
    ArityMismatch {
        formula: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    VariableOutOfRange {
        formula: usize,
        index: usize,
    },
    UndeclaredParameter {
        formula: usize,
        name: String,
    },
    SlotInType {
        formula: usize,
        index: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTuple => write!(f, "tuple length must be positive"),
            Violation::UnknownRelation { formula, name } => {
                write!(f, "formula {formula}: unknown relation '{name}'")
            }
            Violation::ArityMismatch {
                formula,
                name,
                expected,
                found,
            } => write!(
                f,
                "formula {formula}: '{name}' has arity {expected}, used with {found}"
            ),
            Violation::VariableOutOfRange { formula, index } => {
                write!(f, "formula {formula}: x{index} is outside the tuple")
            }
            Violation::UndeclaredParameter { formula, name } => {
                write!(
                    f,
                    "formula {formula}: parameter '{name}' is not in the base"
                )
            }
            Violation::SlotInType { formula, index } => {
                write!(f, "formula {formula}: slot y{index} in a type")
            }
        }
    }
}

/// Lists every invariant of `p` that fails; empty when `p` is well formed.
pub fn validate_type(p: &PartialType, sig: &Signature) -> Vec<Violation> {
    let mut out = Vec::new();
    if p.tuple_length == 0 {
        out.push(Violation::EmptyTuple);
    }
    for (i, f) in p.formulas.iter().enumerate() {
        match f.check_signature(sig) {
            Err(LogicError::UnknownRelation { name }) => {
                out.push(Violation::UnknownRelation { formula: i, name })
            }
            Err(LogicError::ArityMismatch {
                name,
                expected,
                found,
            }) => out.push(Violation::ArityMismatch {
                formula: i,
                name,
                expected,
                found,
            }),
            _ => {}
        }
        for index in f.vars() {
            if index >= p.tuple_length {
                out.push(Violation::VariableOutOfRange { formula: i, index });
            }
        }
        for index in f.slots() {
            out.push(Violation::SlotInType { formula: i, index });
        }
        for name in f.params() {
            if !p.base.contains(name) {
                out.push(Violation::UndeclaredParameter {
                    formula: i,
                    name: name.to_string(),
                });
            }
        }
    }
    out
}
