use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::logic::{Formula, Signature};

use super::solve::{any_pattern, eval, new_index, validate};
use super::{
    check_param_names, next_fresh_name, rename_all, renamed, BackendKind, ElementChoice, FreshSpec,
    TheoryConfig, TheoryError, TheoryOracle,
};

/// The random graph: a symmetric irreflexive `R` in which every finite
/// configuration of adjacencies to finitely many vertices is realized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomGraph {
    signature: Signature,
    vertices: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
    counter: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGraphConfig {
    #[serde(default)]
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Default for RandomGraph {
    fn default() -> Self {
        RandomGraph::new()
    }
}

impl RandomGraph {
    pub fn new() -> Self {
        RandomGraph {
            signature: Signature::new([("R", 2)]).expect("valid signature"),
            vertices: BTreeSet::new(),
            edges: BTreeSet::new(),
            counter: 0,
        }
    }

    pub fn from_config(config: &RandomGraphConfig) -> Result<Self, TheoryError> {
        check_param_names(&config.vertices)?;
        let vertices: BTreeSet<String> = config.vertices.iter().cloned().collect();
        let mut edges = BTreeSet::new();
        for (a, b) in &config.edges {
            for v in [a, b] {
                if !vertices.contains(v) {
                    return Err(TheoryError::Config(format!(
                        "edge endpoint '{v}' is not a vertex"
                    )));
                }
            }
            if a == b {
                return Err(TheoryError::Config(format!("loop at '{a}'")));
            }
            edges.insert(key(a, b));
        }
        Ok(RandomGraph {
            vertices,
            edges,
            ..RandomGraph::new()
        })
    }

    pub fn adjacent(&self, a: &str, b: &str) -> bool {
        a != b && self.edges.contains(&key(a, b))
    }

    fn add(&mut self, neighbors: &BTreeSet<String>) -> String {
        let name = next_fresh_name(&mut self.counter, |n| self.vertices.contains(n));
        self.vertices.insert(name.clone());
        for b in neighbors {
            self.edges.insert(key(&name, b));
        }
        name
    }
}

impl TheoryOracle for RandomGraph {
    fn kind(&self) -> BackendKind {
        BackendKind::RandomGraph
    }

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn parameters(&self) -> Vec<String> {
        self.vertices.iter().cloned().collect()
    }

    fn has_parameter(&self, name: &str) -> bool {
        self.vertices.contains(name)
    }

    fn holds(&self, rel: &str, args: &[&str]) -> bool {
        matches!((rel, args), ("R", [a, b]) if self.adjacent(a, b))
    }

    fn consistent(&self, formulas: &[Formula], tuple_length: usize) -> Result<bool, TheoryError> {
        let mentioned = validate(self, formulas, tuple_length)?;
        Ok(any_pattern(
            formulas,
            tuple_length,
            &mentioned,
            |bound, _| {
                // Adjacencies involving a new element are free; collect the ones
                // the formulas ask about.
                let mut free: Vec<(String, String)> = Vec::new();
                for f in bound {
                    eval(f, &mut |_, args| {
                        let (a, b) = (args[0], args[1]);
                        if a != b && (new_index(a).is_some() || new_index(b).is_some()) {
                            let k = key(a, b);
                            if !free.contains(&k) {
                                free.push(k);
                            }
                        }
                        false
                    });
                }
                assert!(free.len() < 32, "too many free adjacencies");
                (0u64..1 << free.len()).any(|mask| {
                    bound.iter().all(|f| {
                        eval(f, &mut |_, args| {
                            let (a, b) = (args[0], args[1]);
                            if a == b {
                                return false;
                            }
                            match free.iter().position(|k| *k == key(a, b)) {
                                Some(i) => mask >> i & 1 == 1,
                                None => self.adjacent(a, b),
                            }
                        })
                    })
                })
            },
        ))
    }

    fn fresh_parameters(
        &self,
        spec: &FreshSpec,
        count: usize,
    ) -> Result<(Self, Vec<String>), TheoryError> {
        let FreshSpec::Neighbors(neighbors) = spec else {
            return Err(TheoryError::InvalidSpec(format!(
                "{spec:?} in a random graph"
            )));
        };
        if let Some(v) = neighbors.iter().find(|v| !self.vertices.contains(*v)) {
            return Err(TheoryError::UnknownParameter(v.clone()));
        }
        let mut next = self.clone();
        let names = (0..count).map(|_| next.add(neighbors)).collect();
        Ok((next, names))
    }

    fn element_choices(&self, known: &[String]) -> Vec<ElementChoice> {
        let mut out: Vec<ElementChoice> =
            known.iter().cloned().map(ElementChoice::Existing).collect();
        assert!(
            known.len() < 24,
            "too many known vertices to enumerate neighborhoods"
        );
        for mask in 0u32..1 << known.len() {
            let set = known
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, v)| v.clone())
                .collect();
            out.push(ElementChoice::Fresh(FreshSpec::Neighbors(set)));
        }
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
        let mut theory = self.clone();
        let mut copies = Vec::with_capacity(count);
        for _ in 0..count {
            let mut image: BTreeMap<&str, String> = BTreeMap::new();
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
                let mut neighbors: BTreeSet<String> = base
                    .iter()
                    .filter(|b| self.adjacent(e, b))
                    .cloned()
                    .collect();
                neighbors.extend(
                    image
                        .iter()
                        .filter(|(old, _)| self.adjacent(e, old))
                        .map(|(_, new)| new.clone()),
                );
                let c = theory.add(&neighbors);
                image.insert(e, c.clone());
                copy.push(c);
            }
            copies.push(copy);
        }
        Ok((theory, copies))
    }

    fn is_symmetric(&self, rel: &str) -> bool {
        rel == "R"
    }

    fn to_config(&self) -> TheoryConfig {
        TheoryConfig::RandomGraph(RandomGraphConfig {
            vertices: self.parameters(),
            edges: self.edges.iter().cloned().collect(),
        })
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Result<Self, TheoryError> {
        Ok(RandomGraph {
            vertices: rename_all(self.parameters(), map)?.into_iter().collect(),
            edges: self
                .edges
                .iter()
                .map(|(a, b)| key(&renamed(a, map), &renamed(b, map)))
                .collect(),
            ..self.clone()
        })
    }
}
