use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::logic::{Formula, Signature};

use super::solve::{any_pattern, eval, validate};
use super::{
    check_param_names, next_fresh_name, rename_all, BackendKind, ElementChoice, FreshSpec,
    TheoryConfig, TheoryError, TheoryOracle,
};

/// An infinite set with equality only.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PureInfiniteSet {
    signature: Signature,
    params: BTreeSet<String>,
    counter: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PureSetConfig {
    #[serde(default)]
    pub parameters: Vec<String>,
}

impl PureInfiniteSet {
    pub fn new() -> Self {
        PureInfiniteSet::default()
    }

    pub fn with_parameters<I: IntoIterator<Item = S>, S: Into<String>>(
        names: I,
    ) -> Result<Self, TheoryError> {
        PureInfiniteSet::from_config(&PureSetConfig {
            parameters: names.into_iter().map(Into::into).collect(),
        })
    }

    pub fn from_config(config: &PureSetConfig) -> Result<Self, TheoryError> {
        check_param_names(&config.parameters)?;
        Ok(PureInfiniteSet {
            signature: Signature::empty(),
            params: config.parameters.iter().cloned().collect(),
            counter: 0,
        })
    }
}

impl TheoryOracle for PureInfiniteSet {
    fn kind(&self) -> BackendKind {
        BackendKind::PureInfiniteSet
    }

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn parameters(&self) -> Vec<String> {
        self.params.iter().cloned().collect()
    }

    fn has_parameter(&self, name: &str) -> bool {
        self.params.contains(name)
    }

    fn holds(&self, _rel: &str, _args: &[&str]) -> bool {
        false
    }

    fn consistent(&self, formulas: &[Formula], tuple_length: usize) -> Result<bool, TheoryError> {
        let mentioned = validate(self, formulas, tuple_length)?;
        Ok(any_pattern(
            formulas,
            tuple_length,
            &mentioned,
            |bound, _| bound.iter().all(|f| eval(f, &mut |_, _| false)),
        ))
    }

    fn fresh_parameters(
        &self,
        spec: &FreshSpec,
        count: usize,
    ) -> Result<(Self, Vec<String>), TheoryError> {
        if *spec != FreshSpec::Plain {
            return Err(TheoryError::InvalidSpec(format!("{spec:?} in a pure set")));
        }
        let mut next = self.clone();
        let mut names = Vec::with_capacity(count);
        for _ in 0..count {
            let name = next_fresh_name(&mut next.counter, |n| next.params.contains(n));
            next.params.insert(name.clone());
            names.push(name);
        }
        Ok((next, names))
    }

    fn element_choices(&self, known: &[String]) -> Vec<ElementChoice> {
        known
            .iter()
            .cloned()
            .map(ElementChoice::Existing)
            .chain([ElementChoice::Fresh(FreshSpec::Plain)])
            .collect()
    }

    fn independent_copies(
        &self,
        tuple: &[String],
        base: &BTreeSet<String>,
        count: usize,
    ) -> Result<(Self, Vec<Vec<String>>), TheoryError> {
        let mut theory = self.clone();
        let mut copies = Vec::with_capacity(count);
        for _ in 0..count {
            let mut image: BTreeMap<&str, String> = BTreeMap::new();
            let mut copy = Vec::with_capacity(tuple.len());
            for e in tuple {
                if !self.has_parameter(e) {
                    return Err(TheoryError::UnknownParameter(e.clone()));
                }
                if base.contains(e) {
                    copy.push(e.clone());
                } else if let Some(c) = image.get(e.as_str()) {
                    copy.push(c.clone());
                } else {
                    let (next, mut names) = theory.fresh_parameters(&FreshSpec::Plain, 1)?;
                    theory = next;
                    let c = names.pop().expect("one name");
                    image.insert(e, c.clone());
                    copy.push(c);
                }
            }
            copies.push(copy);
        }
        Ok((theory, copies))
    }

    fn is_symmetric(&self, _rel: &str) -> bool {
        false
    }

    fn to_config(&self) -> TheoryConfig {
        TheoryConfig::PureInfiniteSet(PureSetConfig {
            parameters: self.parameters(),
        })
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Result<Self, TheoryError> {
        Ok(PureInfiniteSet {
            signature: self.signature.clone(),
            params: rename_all(self.parameters(), map)?.into_iter().collect(),
            counter: self.counter,
        })
    }
}
