use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::logic::{Formula, Signature};

use super::solve::{eval, validate};
use super::{
    advance, check_param_names, rename_all, renamed, BackendKind, ElementChoice, FreshSpec,
    TheoryConfig, TheoryError, TheoryOracle,
};

/// A finite structure: every element is a named parameter, and formulas are
/// evaluated by brute force over the universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    signature: Signature,
    universe: Vec<String>,
    relations: BTreeMap<String, RelationTable>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Reflexive,
    Irreflexive,
    Symmetric,
    Transitive,
    Equivalence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationTable {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<String>>,
    /// Properties the table must satisfy; checked at load.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axioms: Vec<Axiom>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteConfig {
    pub universe: Vec<String>,
    #[serde(default)]
    pub relations: BTreeMap<String, RelationTable>,
}

impl RelationTable {
    fn check_axiom(
        &self,
        name: &str,
        axiom: Axiom,
        universe: &[String],
    ) -> Result<(), TheoryError> {
        let fail = |what: &str| {
            Err(TheoryError::Config(format!(
                "relation '{name}' is not {what}"
            )))
        };
        if self.arity != 2 {
            return fail("binary, as its axioms require");
        }
        let has = |a: &String, b: &String| self.tuples.contains(&vec![a.clone(), b.clone()]);
        match axiom {
            Axiom::Reflexive if !universe.iter().all(|a| has(a, a)) => fail("reflexive"),
            Axiom::Irreflexive if universe.iter().any(|a| has(a, a)) => fail("irreflexive"),
            Axiom::Symmetric if !self.tuples.iter().all(|t| has(&t[1], &t[0])) => fail("symmetric"),
            Axiom::Transitive => {
                for t in &self.tuples {
                    for c in universe {
                        if has(&t[1], c) && !has(&t[0], c) {
                            return fail("transitive");
                        }
                    }
                }
                Ok(())
            }
            Axiom::Equivalence => [Axiom::Reflexive, Axiom::Symmetric, Axiom::Transitive]
                .into_iter()
                .try_for_each(|a| self.check_axiom(name, a, universe)),
            _ => Ok(()),
        }
    }

    fn is_symmetric(&self) -> bool {
        self.arity == 2
            && self
                .tuples
                .iter()
                .all(|t| self.tuples.contains(&vec![t[1].clone(), t[0].clone()]))
    }
}

impl FiniteStructure {
    pub fn from_config(config: &FiniteConfig) -> Result<Self, TheoryError> {
        check_param_names(&config.universe)?;
        if config.universe.is_empty() {
            return Err(TheoryError::Config("the universe must be nonempty".into()));
        }
        let members: BTreeSet<&String> = config.universe.iter().collect();
        for (name, table) in &config.relations {
            for t in &table.tuples {
                if t.len() != table.arity {
                    return Err(TheoryError::Config(format!(
                        "relation '{name}' has arity {} but lists a tuple of length {}",
                        table.arity,
                        t.len()
                    )));
                }
                if let Some(e) = t.iter().find(|e| !members.contains(e)) {
                    return Err(TheoryError::Config(format!(
                        "relation '{name}' mentions '{e}', which is not in the universe"
                    )));
                }
            }
            for axiom in &table.axioms {
                table.check_axiom(name, *axiom, &config.universe)?;
            }
        }
        let signature = Signature::new(config.relations.iter().map(|(n, t)| (n.clone(), t.arity)))
            .map_err(|e| TheoryError::Config(e.to_string()))?;
        Ok(FiniteStructure {
            signature,
            universe: config.universe.clone(),
            relations: config.relations.clone(),
        })
    }

    /// Universe `{0,1,2}` with `E` the equivalence whose classes are
    /// `{0,1}` and `{2}`.
    pub fn small_equivalence() -> Self {
        let pairs = [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1"), ("2", "2")];
        let table = RelationTable {
            arity: 2,
            tuples: pairs
                .iter()
                .map(|(a, b)| vec![a.to_string(), b.to_string()])
                .collect(),
            axioms: vec![Axiom::Equivalence],
        };
        FiniteStructure::from_config(&FiniteConfig {
            universe: ["0", "1", "2"].map(String::from).to_vec(),
            relations: BTreeMap::from([("E".to_string(), table)]),
        })
        .expect("valid structure")
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }
}

impl TheoryOracle for FiniteStructure {
    fn kind(&self) -> BackendKind {
        BackendKind::FiniteStructure
    }

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn parameters(&self) -> Vec<String> {
        self.universe.clone()
    }

    fn has_parameter(&self, name: &str) -> bool {
        self.universe.iter().any(|e| e == name)
    }

    fn holds(&self, rel: &str, args: &[&str]) -> bool {
        self.relations.get(rel).is_some_and(|t| {
            t.tuples
                .contains(&args.iter().map(|a| a.to_string()).collect::<Vec<_>>())
        })
    }

    fn consistent(&self, formulas: &[Formula], tuple_length: usize) -> Result<bool, TheoryError> {
        validate(self, formulas, tuple_length)?;
        let size = self.universe.len();
        let mut idx = vec![0usize; tuple_length];
        loop {
            let values: Vec<String> = idx.iter().map(|&i| self.universe[i].clone()).collect();
            if formulas
                .iter()
                .all(|f| eval(&f.bind_vars(&values), &mut |r, a| self.holds(r, a)))
            {
                return Ok(true);
            }
            if !advance(&mut idx, size) {
                return Ok(false);
            }
        }
    }

    fn fresh_parameters(
        &self,
        _spec: &FreshSpec,
        count: usize,
    ) -> Result<(Self, Vec<String>), TheoryError> {
        if count == 0 {
            return Ok((self.clone(), Vec::new()));
        }
        Err(TheoryError::FiniteExhausted {
            size: self.universe.len(),
        })
    }

    fn element_choices(&self, _known: &[String]) -> Vec<ElementChoice> {
        self.universe
            .iter()
            .cloned()
            .map(ElementChoice::Existing)
            .collect()
    }

    fn independent_copies(
        &self,
        tuple: &[String],
        base: &BTreeSet<String>,
        count: usize,
    ) -> Result<(Self, Vec<Vec<String>>), TheoryError> {
        if count == 0 || tuple.iter().all(|e| base.contains(e)) {
            return Ok((self.clone(), vec![tuple.to_vec(); count]));
        }
        Err(TheoryError::FiniteExhausted {
            size: self.universe.len(),
        })
    }

    fn admits_infinite_families(&self) -> bool {
        false
    }

    fn is_symmetric(&self, rel: &str) -> bool {
        self.relations
            .get(rel)
            .is_some_and(RelationTable::is_symmetric)
    }

    fn to_config(&self) -> TheoryConfig {
        TheoryConfig::FiniteStructure(FiniteConfig {
            universe: self.universe.clone(),
            relations: self.relations.clone(),
        })
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Result<Self, TheoryError> {
        Ok(FiniteStructure {
            signature: self.signature.clone(),
            universe: rename_all(self.universe.clone(), map)?,
            relations: self
                .relations
                .iter()
                .map(|(name, t)| {
                    let tuples = t
                        .tuples
                        .iter()
                        .map(|tuple| tuple.iter().map(|e| renamed(e, map)).collect())
                        .collect();
                    (
                        name.clone(),
                        RelationTable {
                            tuples,
                            ..t.clone()
                        },
                    )
                })
                .collect(),
        })
    }
}
