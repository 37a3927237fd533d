use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::logic::{Formula, Signature};

use super::solve::{any_labelling, any_pattern, eval, new_index, validate};
use super::{
    check_param_names, next_fresh_name, renamed, BackendKind, ElementChoice, FreshSpec,
    TheoryConfig, TheoryError, TheoryOracle,
};

/// An equivalence relation `E` with infinitely many classes, all infinite.
/// Each parameter carries the label of its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceRelation {
    signature: Signature,
    class_of: BTreeMap<String, String>,
    counter: usize,
    class_counter: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    /// Parameter name to class label.
    #[serde(default)]
    pub parameters: BTreeMap<String, String>,
}

impl Default for EquivalenceRelation {
    fn default() -> Self {
        EquivalenceRelation::new()
    }
}

impl EquivalenceRelation {
    pub fn new() -> Self {
        EquivalenceRelation {
            signature: Signature::new([("E", 2)]).expect("valid signature"),
            class_of: BTreeMap::new(),
            counter: 0,
            class_counter: 0,
        }
    }

    /// Parameters with their class labels.
    pub fn with_classes<I, A, B>(pairs: I) -> Result<Self, TheoryError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut parameters = BTreeMap::new();
        for (name, label) in pairs {
            let name = name.into();
            if parameters.insert(name.clone(), label.into()).is_some() {
                return Err(TheoryError::Config(format!(
                    "parameter '{name}' declared twice"
                )));
            }
        }
        EquivalenceRelation::from_config(&EquivalenceConfig { parameters })
    }

    pub fn from_config(config: &EquivalenceConfig) -> Result<Self, TheoryError> {
        check_param_names(config.parameters.keys())?;
        if let Some((name, _)) = config.parameters.iter().find(|(_, l)| l.is_empty()) {
            return Err(TheoryError::Config(format!(
                "parameter '{name}' has an empty class label"
            )));
        }
        Ok(EquivalenceRelation {
            class_of: config.parameters.clone(),
            ..EquivalenceRelation::new()
        })
    }

    pub fn class_of(&self, name: &str) -> Option<&str> {
        self.class_of.get(name).map(String::as_str)
    }

    fn fresh_label(&mut self) -> String {
        let used: BTreeSet<&String> = self.class_of.values().collect();
        loop {
            let label = format!("k{}", self.class_counter);
            self.class_counter += 1;
            if !used.contains(&label) {
                return label;
            }
        }
    }

    fn add(&mut self, label: String) -> String {
        let name = next_fresh_name(&mut self.counter, |n| self.class_of.contains_key(n));
        self.class_of.insert(name.clone(), label);
        name
    }
}

impl TheoryOracle for EquivalenceRelation {
    fn kind(&self) -> BackendKind {
        BackendKind::EquivalenceRelation
    }

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn parameters(&self) -> Vec<String> {
        self.class_of.keys().cloned().collect()
    }

    fn has_parameter(&self, name: &str) -> bool {
        self.class_of.contains_key(name)
    }

    fn holds(&self, rel: &str, args: &[&str]) -> bool {
        match (rel, args) {
            ("E", [a, b]) => {
                let (ca, cb) = (self.class_of.get(*a), self.class_of.get(*b));
                ca.is_some() && ca == cb
            }
            _ => false,
        }
    }

    fn consistent(&self, formulas: &[Formula], tuple_length: usize) -> Result<bool, TheoryError> {
        let mentioned = validate(self, formulas, tuple_length)?;
        let labels: Vec<&String> = mentioned
            .iter()
            .map(|p| &self.class_of[p])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let label_index = |p: &str| labels.iter().position(|l| *l == &self.class_of[p]);
        Ok(any_pattern(
            formulas,
            tuple_length,
            &mentioned,
            |bound, fresh| {
                any_labelling(fresh, labels.len(), |choice| {
                    let class = |e: &str| match new_index(e) {
                        Some(j) => choice[j],
                        None => Ok(label_index(e).expect("mentioned parameter")),
                    };
                    bound
                        .iter()
                        .all(|f| eval(f, &mut |_, args| class(args[0]) == class(args[1])))
                })
            },
        ))
    }

    fn fresh_parameters(
        &self,
        spec: &FreshSpec,
        count: usize,
    ) -> Result<(Self, Vec<String>), TheoryError> {
        let mut next = self.clone();
        let mut names = Vec::with_capacity(count);
        for _ in 0..count {
            let label = match spec {
                FreshSpec::NewClass => next.fresh_label(),
                FreshSpec::SameClassAs(p) => self
                    .class_of
                    .get(p)
                    .cloned()
                    .ok_or_else(|| TheoryError::UnknownParameter(p.clone()))?,
                other => {
                    return Err(TheoryError::InvalidSpec(format!(
                        "{other:?} in an equivalence relation"
                    )))
                }
            };
            names.push(next.add(label));
        }
        Ok((next, names))
    }

    fn element_choices(&self, known: &[String]) -> Vec<ElementChoice> {
        let mut out: Vec<ElementChoice> =
            known.iter().cloned().map(ElementChoice::Existing).collect();
        let mut seen = BTreeSet::new();
        for k in known {
            if let Some(label) = self.class_of.get(k) {
                if seen.insert(label) {
                    out.push(ElementChoice::Fresh(FreshSpec::SameClassAs(k.clone())));
                }
            }
        }
        out.push(ElementChoice::Fresh(FreshSpec::NewClass));
        out
    }

    fn independent_copies(
        &self,
        tuple: &[String],
        base: &BTreeSet<String>,
        count: usize,
    ) -> Result<(Self, Vec<Vec<String>>), TheoryError> {
        for e in tuple {
            if !self.has_parameter(e) {
                return Err(TheoryError::UnknownParameter(e.clone()));
            }
        }
        let base_labels: BTreeSet<&String> =
            base.iter().filter_map(|b| self.class_of.get(b)).collect();
        let mut theory = self.clone();
        let mut copies = Vec::with_capacity(count);
        for _ in 0..count {
            let mut image: BTreeMap<&str, String> = BTreeMap::new();
            // Old class label to the label used by this copy.
            let mut relabel: BTreeMap<&str, String> = BTreeMap::new();
            let mut copy = Vec::with_capacity(tuple.len());
            for e in tuple {
                if base.contains(e) {
                    copy.push(e.clone());
                    continue;
                }
                if let Some(c) = image.get(e.as_str()) {
                    copy.push(c.clone());
                    continue;
                }
                let old = &self.class_of[e];
                let label = if base_labels.contains(old) {
                    old.clone()
                } else if let Some(l) = relabel.get(old.as_str()) {
                    l.clone()
                } else {
                    let l = theory.fresh_label();
                    relabel.insert(old, l.clone());
                    l
                };
                let c = theory.add(label);
                image.insert(e, c.clone());
                copy.push(c);
            }
            copies.push(copy);
        }
        Ok((theory, copies))
    }

    fn is_symmetric(&self, rel: &str) -> bool {
        rel == "E"
    }

    fn to_config(&self) -> TheoryConfig {
        TheoryConfig::EquivalenceRelation(EquivalenceConfig {
            parameters: self.class_of.clone(),
        })
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Result<Self, TheoryError> {
        super::rename_all(self.parameters(), map)?;
        Ok(EquivalenceRelation {
            class_of: self
                .class_of
                .iter()
                .map(|(n, l)| (renamed(n, map), l.clone()))
                .collect(),
            ..self.clone()
        })
    }
}
