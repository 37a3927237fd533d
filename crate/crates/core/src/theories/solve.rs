//! Shared machinery for deciding consistency: every realization of the free
//! tuple either coincides with a mentioned parameter or is a new element,
//! so it suffices to try each equality pattern and let the backend decide
//! the facts about the new elements.

use crate::logic::{Formula, Term};

use super::{TheoryError, TheoryOracle};

/// Placeholder names for new elements; `#` never occurs in parameter names.
pub(crate) fn new_name(j: usize) -> String {
    format!("#{j}")
}

pub(crate) fn new_index(name: &str) -> Option<usize> {
    name.strip_prefix('#').and_then(|d| d.parse().ok())
}

/// Checks that `formulas` are instances over `theory` and returns the
/// parameters they mention, sorted.
pub(crate) fn validate<T: TheoryOracle>(
    theory: &T,
    formulas: &[Formula],
    tuple_length: usize,
) -> Result<Vec<String>, TheoryError> {
    let mut mentioned = std::collections::BTreeSet::new();
    for f in formulas {
        f.check_signature(theory.signature())
            .map_err(|e| TheoryError::Structural(format!("{f}: {e}")))?;
        for t in f.terms() {
            match t {
                Term::Var(i) if *i >= tuple_length => {
                    return Err(TheoryError::Structural(format!(
                        "{f}: x{i} is outside a tuple of length {tuple_length}"
                    )))
                }
                Term::Var(_) => {}
                Term::Slot(i) => {
                    return Err(TheoryError::Structural(format!(
                        "{f}: unassigned slot y{i}"
                    )))
                }
                Term::Param(p) => {
                    if !theory.has_parameter(p) {
                        return Err(TheoryError::UnknownParameter(p.clone()));
                    }
                    mentioned.insert(p.clone());
                }
            }
        }
    }
    Ok(mentioned.into_iter().collect())
}

/// Calls `check` with the formulas bound under each equality pattern of the
/// free tuple (each variable is a mentioned parameter or one of the new
/// elements `#0, #1, …`) and the number of new elements; stops at the first
/// `true`.
pub(crate) fn any_pattern(
    formulas: &[Formula],
    tuple_length: usize,
    mentioned: &[String],
    mut check: impl FnMut(&[Formula], usize) -> bool,
) -> bool {
    fn go(
        formulas: &[Formula],
        n: usize,
        mentioned: &[String],
        assign: &mut Vec<String>,
        fresh: usize,
        check: &mut impl FnMut(&[Formula], usize) -> bool,
    ) -> bool {
        if assign.len() == n {
            let bound: Vec<Formula> = formulas.iter().map(|f| f.bind_vars(assign)).collect();
            return check(&bound, fresh);
        }
        for m in mentioned {
            assign.push(m.clone());
            let hit = go(formulas, n, mentioned, assign, fresh, check);
            assign.pop();
            if hit {
                return true;
            }
        }
        for j in 0..=fresh {
            assign.push(new_name(j));
            let hit = go(formulas, n, mentioned, assign, fresh.max(j + 1), check);
            assign.pop();
            if hit {
                return true;
            }
        }
        false
    }
    go(
        formulas,
        tuple_length,
        mentioned,
        &mut Vec::new(),
        0,
        &mut check,
    )
}

/// Restricted-growth enumeration: calls `f` with every labelling of `count`
/// new elements by either one of `existing` labels (`Ok(i)`) or a new label
/// (`Err(j)`, numbered in order of first use). Stops at the first `true`.
pub(crate) fn any_labelling(
    count: usize,
    existing: usize,
    mut f: impl FnMut(&[Result<usize, usize>]) -> bool,
) -> bool {
    fn go(
        count: usize,
        existing: usize,
        acc: &mut Vec<Result<usize, usize>>,
        used: usize,
        f: &mut impl FnMut(&[Result<usize, usize>]) -> bool,
    ) -> bool {
        if acc.len() == count {
            return f(acc);
        }
        let choices = (0..existing).map(Ok).chain((0..=used).map(Err));
        for c in choices {
            let next_used = match c {
                Err(j) => used.max(j + 1),
                Ok(_) => used,
            };
            acc.push(c);
            let hit = go(count, existing, acc, next_used, f);
            acc.pop();
            if hit {
                return true;
            }
        }
        false
    }
    go(count, existing, &mut Vec::new(), 0, &mut f)
}

/// Closed evaluation where equality is name identity (unique names).
pub(crate) fn eval(f: &Formula, atom: &mut impl FnMut(&str, &[&str]) -> bool) -> bool {
    f.eval_closed(atom, &mut |a, b| a == b)
}
