//! Closed-form ranks for the bundled backends, computed from the
//! realization rather than by search.
//!
//! Each backend is supersimple of finite rank and the rank of a tuple is
//! the sum over its elements, in order, of the rank of each element over
//! the base and the earlier elements: 0 for a known element; in the
//! equivalence relation 1 for a new element of a known class and 2 for a
//! new class; 1 for any new element of the pure set or the random graph.
//! Finite structures have rank 0 throughout.

use std::collections::BTreeSet;

use ddrank::theories::{BackendKind, TheoryOracle};

pub fn closed_form_rank<T: TheoryOracle>(
    t: &T,
    tuple: &[String],
    base: &BTreeSet<String>,
) -> usize {
    let mut known: Vec<String> = base.iter().cloned().collect();
    let mut total = 0;
    for e in tuple {
        if known.contains(e) {
            continue;
        }
        total += match t.kind() {
            BackendKind::FiniteStructure => 0,
            BackendKind::PureInfiniteSet | BackendKind::RandomGraph => 1,
            BackendKind::EquivalenceRelation => {
                if known.iter().any(|k| t.holds("E", &[e, k])) {
                    1
                } else {
                    2
                }
            }
        };
        known.push(e.clone());
    }
    total
}
