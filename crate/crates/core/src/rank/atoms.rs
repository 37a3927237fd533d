use std::collections::BTreeSet;

use crate::logic::{Formula, PartialType, Term};
use crate::theories::{advance, TheoryOracle};

/// Argument lists of length `arity` over `terms`, in odometer order.
fn tuples(terms: &[Term], arity: usize) -> Vec<Vec<Term>> {
    if terms.is_empty() && arity > 0 {
        return Vec::new();
    }
    let mut idx = vec![0usize; arity];
    let mut out = Vec::new();
    loop {
        out.push(idx.iter().map(|&i| terms[i].clone()).collect());
        if arity == 0 || !advance(&mut idx, terms.len()) {
            return out;
        }
    }
}

/// Every atomic formula in the variables `x0 … x(n-1)` with parameters from
/// `base` that mentions at least one variable. Symmetric binary relations
/// contribute one atom per unordered pair.
pub(crate) fn atoms_over<T: TheoryOracle>(oracle: &T, n: usize, base: &[String]) -> Vec<Formula> {
    let terms: Vec<Term> = (0..n)
        .map(Term::Var)
        .chain(base.iter().map(|p| Term::Param(p.clone())))
        .collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (rel, arity) in oracle.signature().relations() {
        for mut args in tuples(&terms, arity) {
            if !args.iter().any(|t| matches!(t, Term::Var(_))) {
                continue;
            }
            if arity == 2 && oracle.is_symmetric(rel) {
                args.sort();
            }
            let atom = Formula::atom(rel, args);
            if seen.insert(atom.clone()) {
                out.push(atom);
            }
        }
    }
    for i in 0..n {
        for t in &terms[i + 1..] {
            out.push(Formula::eq(Term::Var(i), t.clone()));
        }
    }
    out
}

/// The complete quantifier-free type of `tuple` over `base`, as literals.
pub fn qf_type_of<T: TheoryOracle>(
    oracle: &T,
    tuple: &[String],
    base: &BTreeSet<String>,
) -> PartialType {
    let base_list: Vec<String> = base.iter().cloned().collect();
    let formulas = atoms_over(oracle, tuple.len(), &base_list)
        .into_iter()
        .map(|atom| {
            let closed = atom.bind_vars(tuple);
            let holds =
                closed.eval_closed(&mut |r, args| oracle.holds(r, args), &mut |a, b| a == b);
            if holds {
                atom
            } else {
                Formula::not(atom)
            }
        })
        .collect();
    PartialType {
        tuple_length: tuple.len(),
        formulas,
        base: base.clone(),
    }
}

/// Templates for the atomic alphabet: every relation applied to variables
/// and slots with at least one of each, slots numbered by first
/// occurrence, followed by `x<i> = y0`.
pub fn atomic_alphabet<T: TheoryOracle>(oracle: &T, n: usize) -> Vec<Formula> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (rel, arity) in oracle.signature().relations() {
        let terms: Vec<Term> = (0..n)
            .map(Term::Var)
            .chain((0..arity).map(Term::Slot))
            .collect();
        for mut args in tuples(&terms, arity) {
            let has_var = args.iter().any(|t| matches!(t, Term::Var(_)));
            let has_slot = args.iter().any(|t| matches!(t, Term::Slot(_)));
            if !has_var || !has_slot {
                continue;
            }
            if arity == 2 && oracle.is_symmetric(rel) {
                args.sort();
            }
            renumber_slots(&mut args);
            let template = Formula::atom(rel, args);
            if seen.insert(template.clone()) {
                out.push(template);
            }
        }
    }
    for i in 0..n {
        out.push(Formula::eq(Term::Var(i), Term::Slot(0)));
    }
    out
}

fn renumber_slots(args: &mut [Term]) {
    let mut order: Vec<usize> = Vec::new();
    for t in args.iter_mut() {
        if let Term::Slot(s) = t {
            let pos = match order.iter().position(|o| o == s) {
                Some(p) => p,
                None => {
                    order.push(*s);
                    order.len() - 1
                }
            };
            *s = pos;
        }
    }
}
