//! Independent consistency deciders used to cross-check the backends.

use ddrank::logic::{Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T {
    Var(usize),
    Param(usize),
}

/// A literal: equality or a binary relation, positive or negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lit {
    Eq(T, T, bool),
    Rel(T, T, bool),
}

fn term(t: T, params: &[&str]) -> Term {
    match t {
        T::Var(i) => Term::Var(i),
        T::Param(i) => Term::param(params[i]),
    }
}

impl Lit {
    pub fn to_formula(self, rel: &str, params: &[&str]) -> Formula {
        let (f, pos) = match self {
            Lit::Eq(a, b, pos) => (Formula::eq(term(a, params), term(b, params)), pos),
            Lit::Rel(a, b, pos) => (
                Formula::atom(rel, vec![term(a, params), term(b, params)]),
                pos,
            ),
        };
        if pos {
            f
        } else {
            Formula::not(f)
        }
    }
}

/// Nodes: variables first, then parameters.
struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

fn node(t: T, vars: usize) -> usize {
    match t {
        T::Var(i) => i,
        T::Param(i) => vars + i,
    }
}

/// Classes after merging positive equalities, or `None` when two distinct
/// parameters end up equal or a disequality is violated.
fn propagate(lits: &[Lit], vars: usize, params: usize) -> Option<UnionFind> {
    let mut uf = UnionFind::new(vars + params);
    for l in lits {
        if let Lit::Eq(a, b, true) = l {
            uf.union(node(*a, vars), node(*b, vars));
        }
    }
    for i in 0..params {
        for j in 0..i {
            if uf.find(vars + i) == uf.find(vars + j) {
                return None;
            }
        }
    }
    for l in lits {
        if let Lit::Eq(a, b, false) = l {
            if uf.find(node(*a, vars)) == uf.find(node(*b, vars)) {
                return None;
            }
        }
    }
    Some(uf)
}

pub fn union_find_consistent(lits: &[Lit], vars: usize) -> bool {
    assert!(lits.iter().all(|l| matches!(l, Lit::Eq(..))));
    propagate(lits, vars, 8).is_some()
}

/// Consistency of graph literals: after equality propagation, no loop is
/// demanded, no pair is required both adjacent and not, and pairs of
/// parameters agree with the known edges. Classes left unmerged are taken
/// distinct, which only removes constraints.
pub fn graph_literals_consistent(
    lits: &[Lit],
    vars: usize,
    edges: &dyn Fn(usize, usize) -> bool,
) -> bool {
    let params = 8;
    let Some(mut uf) = propagate(lits, vars, params) else {
        return false;
    };
    let param_of =
        |uf: &mut UnionFind, root: usize| (0..params).find(|&i| uf.find(vars + i) == root);
    let mut demands: Vec<((usize, usize), bool)> = Vec::new();
    for l in lits {
        if let Lit::Rel(a, b, pos) = *l {
            let (ra, rb) = (uf.find(node(a, vars)), uf.find(node(b, vars)));
            if ra == rb {
                if pos {
                    return false;
                }
                continue;
            }
            if let (Some(pa), Some(pb)) = (param_of(&mut uf, ra), param_of(&mut uf, rb)) {
                if edges(pa, pb) != pos {
                    return false;
                }
            }
            let key = (ra.min(rb), ra.max(rb));
            if demands.iter().any(|(k, p)| *k == key && *p != pos) {
                return false;
            }
            demands.push((key, pos));
        }
    }
    true
}

/// Brute force over a finite piece of the model with infinitely many
/// infinite classes: every parameter class plus `vars` spare classes, each
/// padded with `vars` anonymous elements.
pub fn equivalence_brute_force(lits: &[Lit], vars: usize, param_class: &[usize]) -> bool {
    let classes = param_class.iter().max().map_or(0, |m| m + 1) + vars;
    // Element = (class, id); parameters are (class, 100 + index).
    let mut elements: Vec<(usize, usize)> = Vec::new();
    for c in 0..classes {
        for k in 0..vars {
            elements.push((c, k));
        }
    }
    for (i, c) in param_class.iter().enumerate() {
        elements.push((*c, 100 + i));
    }
    let value = |t: T, assign: &[(usize, usize)]| match t {
        T::Var(i) => assign[i],
        T::Param(i) => (param_class[i], 100 + i),
    };
    let mut assign = vec![elements[0]; vars];
    let total = elements.len().pow(vars as u32);
    (0..total).any(|mut code| {
        for slot in assign.iter_mut() {
            *slot = elements[code % elements.len()];
            code /= elements.len();
        }
        lits.iter().all(|l| match *l {
            Lit::Eq(a, b, pos) => (value(a, &assign) == value(b, &assign)) == pos,
            Lit::Rel(a, b, pos) => (value(a, &assign).0 == value(b, &assign).0) == pos,
        })
    })
}

/// Direct recursive evaluation over a finite universe (binary relation
/// given by `rel` on element indices).
pub fn naive_finite(
    formulas: &[Formula],
    vars: usize,
    names: &[&str],
    rel: &dyn Fn(usize, usize) -> bool,
) -> bool {
    fn index(t: &Term, assign: &[usize], names: &[&str]) -> usize {
        match t {
            Term::Var(i) => assign[*i],
            Term::Param(p) => names.iter().position(|n| n == p).unwrap(),
            Term::Slot(_) => unreachable!(),
        }
    }
    fn eval(f: &Formula, a: &[usize], names: &[&str], rel: &dyn Fn(usize, usize) -> bool) -> bool {
        match f {
            Formula::Atom { args, .. } => rel(index(&args[0], a, names), index(&args[1], a, names)),
            Formula::Eq(x, y) => index(x, a, names) == index(y, a, names),
            Formula::Not(g) => !eval(g, a, names, rel),
            Formula::And(g, h) => eval(g, a, names, rel) && eval(h, a, names, rel),
            Formula::Or(g, h) => eval(g, a, names, rel) || eval(h, a, names, rel),
        }
    }
    let n = names.len();
    (0..n.pow(vars as u32)).any(|mut code| {
        let assign: Vec<usize> = (0..vars)
            .map(|_| {
                let v = code % n;
                code /= n;
                v
            })
            .collect();
        formulas.iter().all(|f| eval(f, &assign, names, rel))
    })
}
