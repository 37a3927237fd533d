mod common;

use std::collections::{BTreeMap, BTreeSet};

use ddrank::logic::{parse_formula, Formula, PartialType, Term};
use ddrank::rank::harness::{
    exact_rank, lascar_check, run_harness, HarnessConfig, HarnessKind, Outcome,
};
use ddrank::rank::{
    atomic_alphabet, chain_to_sequence, check_k_inconsistent, grow_tree, inp_to_tree,
    product_concat, qf_type_of, search_rank, sequence_to_chain, tree_branch_to_sequence,
    verify_chain_certificate, verify_dividing_witness, verify_inp_certificate,
    verify_sequence_certificate, verify_tree_certificate, Certificate, CertificateDocument,
    DividingWitness, FailureCode, InpCertificate, InpRow, RankError, SearchBounds,
    SequenceCertificate, SequenceEntry, TreeCertificate, TreeLevel, TreeNode,
};
use ddrank::theories::{
    builtin_theory, load_theory, AnyTheory, ElementChoice, EquivalenceRelation, FiniteStructure,
    PureInfiniteSet, RandomGraph, TheoryConfig, TheoryOracle,
};
use proptest::prelude::*;

use common::rank_oracle::closed_form_rank;

fn f<T: TheoryOracle>(t: &T, text: &str) -> Formula {
    parse_formula(text, t.signature()).unwrap()
}

fn tuple(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn tuples(v: &[&str]) -> Vec<Vec<String>> {
    v.iter().map(|s| vec![s.to_string()]).collect()
}

fn set(v: &[&str]) -> BTreeSet<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn witness<T: TheoryOracle>(
    t: &T,
    formula: &str,
    anchor: &str,
    base: &[&str],
    family: &[&str],
    k: usize,
) -> DividingWitness {
    DividingWitness {
        formula: f(t, formula),
        anchor: tuple(&[anchor]),
        base: set(base),
        family: tuples(family),
        k,
    }
}

fn exact<T: TheoryOracle>(
    t: &T,
    p: &PartialType,
    alphabet: &[&str],
    depth: usize,
) -> Option<usize> {
    let alphabet: Vec<Formula> = alphabet.iter().map(|s| f(t, s)).collect();
    search_rank(t, p, &alphabet, SearchBounds::new(depth, 4, 64))
        .unwrap()
        .exact_value
}

fn theory_of(report_theory: &serde_json::Value) -> AnyTheory {
    load_theory(&TheoryConfig::from_json(report_theory).unwrap()).unwrap()
}

/// Pure set with `a0 … a(n-1)`.
fn pure(n: usize) -> PureInfiniteSet {
    PureInfiniteSet::with_parameters((0..n).map(|i| format!("a{i}"))).unwrap()
}

/// Equivalence relation: `c0 … c3` in classes `k0 … k3`, `b0 … b3` in the
/// class of `c0`.
fn eq_fixture() -> EquivalenceRelation {
    let mut pairs: Vec<(String, String)> =
        (0..4).map(|i| (format!("c{i}"), format!("k{i}"))).collect();
    pairs.extend((0..4).map(|i| (format!("b{i}"), "k0".to_string())));
    EquivalenceRelation::with_classes(pairs).unwrap()
}

/// The depth-2 sequence `E(x0,c0)`, `x0 = b0` in the equivalence relation.
fn eq_sequence(t: &EquivalenceRelation) -> SequenceCertificate {
    SequenceCertificate {
        ty: PartialType::trivial(1),
        entries: vec![
            SequenceEntry {
                formula: f(t, "E(x0,y0)"),
                params: tuple(&["c0"]),
                witness: witness(t, "E(x0,y0)", "c0", &[], &["c0", "c1", "c2", "c3"], 2),
            },
            SequenceEntry {
                formula: f(t, "x0 = y0"),
                params: tuple(&["b0"]),
                witness: witness(t, "x0 = y0", "b0", &["c0"], &["b0", "b1", "b2", "b3"], 2),
            },
        ],
    }
}

#[test]
fn k_inconsistency_examples() {
    let t = pure(3);
    let phi = f(&t, "x0 = y0");
    assert!(check_k_inconsistent(&t, &phi, &tuples(&["a0", "a1", "a2"]), 2).unwrap());

    let eq = eq_fixture();
    let e = f(&eq, "E(x0,y0)");
    assert!(!check_k_inconsistent(&eq, &e, &tuples(&["b0", "b1", "b2"]), 2).unwrap());
    assert!(check_k_inconsistent(&eq, &e, &tuples(&["c0", "c1", "c2", "c3"]), 2).unwrap());
    assert!(matches!(
        check_k_inconsistent(&eq, &e, &tuples(&["c0"]), 2),
        Err(RankError::FamilyTooSmall { size: 1, k: 2 })
    ));
}

#[test]
fn witness_examples() {
    let t = pure(4);
    let w = witness(&t, "x0 = y0", "a0", &[], &["a1", "a2", "a3"], 2);
    assert!(verify_dividing_witness(&t, &w).is_valid());
    // Over {a0} the anchor is fixed: every other point fails conjugacy.
    let fixed = witness(&t, "x0 = y0", "a0", &["a0"], &["a1", "a2", "a3"], 2);
    assert!(verify_dividing_witness(&t, &fixed)
        .codes()
        .contains(&FailureCode::NotConjugate));

    let eq = eq_fixture();
    let classes = witness(&eq, "E(x0,y0)", "c0", &[], &["c0", "c1", "c2", "c3"], 2);
    assert!(verify_dividing_witness(&eq, &classes).is_valid());
    let repeated = witness(&eq, "E(x0,y0)", "c0", &[], &["c0", "c1", "c1"], 2);
    assert!(verify_dividing_witness(&eq, &repeated)
        .codes()
        .contains(&FailureCode::RepeatedMember));
    let small = witness(&eq, "E(x0,y0)", "c0", &[], &["c0", "c1"], 3);
    assert_eq!(
        verify_dividing_witness(&eq, &small).codes(),
        vec![FailureCode::FamilyTooSmall]
    );

    let fin = FiniteStructure::small_equivalence();
    let w = witness(&fin, "x0 = y0", "0", &[], &["0", "1", "2"], 2);
    assert!(verify_dividing_witness(&fin, &w)
        .codes()
        .contains(&FailureCode::FiniteTheory));
}

#[test]
fn indiscernibility_is_required() {
    // Pairwise conjugate over the empty base, but c0 E b0 while c1, c2 are
    // in classes of their own.
    let eq = eq_fixture();
    let w = witness(&eq, "x0 = y0", "c1", &[], &["c0", "b0", "c1", "c2"], 2);
    assert_eq!(
        verify_dividing_witness(&eq, &w).codes(),
        vec![FailureCode::NotIndiscernible]
    );
}

#[test]
fn sequence_examples() {
    let t = pure(1);
    let empty = SequenceCertificate::empty(PartialType::trivial(1));
    assert!(verify_sequence_certificate(&t, &empty).is_valid());

    let eq = eq_fixture();
    let seq = eq_sequence(&eq);
    assert!(verify_sequence_certificate(&eq, &seq).is_valid());

    let mut wrong_class = seq.clone();
    wrong_class.entries[1].witness.family = tuples(&["b0", "c1", "c2", "c3"]);
    assert!(verify_sequence_certificate(&eq, &wrong_class)
        .codes()
        .contains(&FailureCode::NotConjugate));

    let mut wrong_base = seq.clone();
    wrong_base.entries[1].witness.base = BTreeSet::new();
    let v = verify_sequence_certificate(&eq, &wrong_base);
    assert!(v.codes().contains(&FailureCode::BaseMismatch));
    assert!(v.failures.iter().any(|x| x.at.starts_with("entry 1")));
}

fn pure_tree(t: &PureInfiniteSet, children: &[&str]) -> TreeCertificate {
    TreeCertificate {
        ty: PartialType::trivial(1),
        depth: 1,
        width: children.len(),
        levels: vec![TreeLevel {
            formula: f(t, "x0 = y0"),
            k: 2,
        }],
        nodes: vec![TreeNode {
            path: vec![],
            children: tuples(children),
        }],
    }
}

#[test]
fn tree_examples() {
    let t = pure(4);
    assert!(verify_tree_certificate(&t, &pure_tree(&t, &["a0", "a1", "a2"])).is_valid());
    assert!(
        verify_tree_certificate(&t, &pure_tree(&t, &["a0", "a1", "a1"]))
            .codes()
            .contains(&FailureCode::NotKInconsistent)
    );

    // Depth 2 with x0 = y0 at both levels: the second level contradicts
    // the first.
    let mut deep = pure_tree(&t, &["a0", "a1"]);
    deep.depth = 2;
    deep.levels.push(deep.levels[0].clone());
    for i in 0..2 {
        deep.nodes.push(TreeNode {
            path: vec![i],
            children: tuples(&["a2", "a3"]),
        });
    }
    assert!(verify_tree_certificate(&t, &deep)
        .codes()
        .contains(&FailureCode::InconsistentBranch));

    let mut missing = deep.clone();
    missing.nodes.pop();
    assert!(verify_tree_certificate(&t, &missing)
        .codes()
        .contains(&FailureCode::MissingNode));
}

#[test]
fn inp_examples() {
    let t = pure(4);
    let row = InpCertificate {
        ty: PartialType::trivial(1),
        rows: vec![InpRow {
            formula: f(&t, "x0 = y0"),
            k: 2,
            params: tuples(&["a0", "a1", "a2"]),
        }],
    };
    let tree = inp_to_tree(&row).unwrap();
    assert_eq!(tree, pure_tree(&t, &["a0", "a1", "a2"]));
    assert_eq!(
        verify_inp_certificate(&t, &row).is_valid(),
        verify_tree_certificate(&t, &tree).is_valid()
    );

    let mut big_k = row.clone();
    big_k.rows[0].k = 4;
    assert_eq!(
        verify_inp_certificate(&t, &big_k).codes(),
        vec![FailureCode::KOutOfRange]
    );

    let mut ragged = row.clone();
    ragged.rows.push(InpRow {
        formula: f(&t, "x0 = y0"),
        k: 2,
        params: tuples(&["a0"]),
    });
    assert_eq!(
        verify_inp_certificate(&t, &ragged).codes(),
        vec![FailureCode::Ragged]
    );
    assert_eq!(inp_to_tree(&ragged), Err(RankError::Ragged));

    // Two rows over two classes: no point lies in every class, so the
    // column choices are not all consistent.
    let eq = eq_fixture();
    let two = InpCertificate {
        ty: PartialType::trivial(1),
        rows: vec![
            InpRow {
                formula: f(&eq, "E(x0,y0)"),
                k: 2,
                params: tuples(&["c1", "c2"]),
            },
            InpRow {
                formula: f(&eq, "x0 = y0"),
                k: 2,
                params: tuples(&["b0", "b1"]),
            },
        ],
    };
    let tree = inp_to_tree(&two).unwrap();
    assert_eq!(
        tree.node(&[0]).unwrap().children,
        tree.node(&[1]).unwrap().children
    );
    assert!(!verify_inp_certificate(&eq, &two).is_valid());
    assert!(!verify_tree_certificate(&eq, &tree).is_valid());

    // Two independent coordinates of a pair give a genuine 2-row pattern.
    let pair = InpCertificate {
        ty: PartialType::trivial(2),
        rows: vec![
            InpRow {
                formula: f(&t, "x0 = y0"),
                k: 2,
                params: tuples(&["a0", "a1"]),
            },
            InpRow {
                formula: f(&t, "x1 = y0"),
                k: 2,
                params: tuples(&["a2", "a3"]),
            },
        ],
    };
    assert!(verify_inp_certificate(&t, &pair).is_valid());
    assert!(verify_tree_certificate(&t, &inp_to_tree(&pair).unwrap()).is_valid());
}

#[test]
fn branch_extraction_examples() {
    let t = pure(4);
    let tree = pure_tree(&t, &["a0", "a1", "a2"]);
    for i in 0..3 {
        let seq = tree_branch_to_sequence(&t, &tree, &[i]).unwrap();
        assert_eq!(seq.depth(), 1);
        assert!(verify_sequence_certificate(&t, &seq).is_valid());
    }

    let eq = eq_fixture();
    let mixed = TreeCertificate {
        ty: PartialType::trivial(1),
        depth: 1,
        width: 3,
        levels: vec![TreeLevel {
            formula: f(&eq, "x0 = y0"),
            k: 2,
        }],
        nodes: vec![TreeNode {
            path: vec![],
            children: tuples(&["c0", "b1", "c1"]),
        }],
    };
    assert!(matches!(
        tree_branch_to_sequence(&eq, &mixed, &[0]),
        Err(RankError::ConversionPrecondition { level: 0, .. })
    ));
    assert!(matches!(
        tree_branch_to_sequence(&eq, &mixed, &[5]),
        Err(RankError::InvalidBranch(_))
    ));

    let seq = eq_sequence(&eq);
    let (grown, tree) = grow_tree(&eq, &seq, 3).unwrap().unwrap();
    assert!(verify_tree_certificate(&grown, &tree).is_valid());
    let seq2 = tree_branch_to_sequence(&grown, &tree, &[2, 1]).unwrap();
    assert_eq!(seq2.depth(), 2);
    assert!(verify_sequence_certificate(&grown, &seq2).is_valid());
}

#[test]
fn chain_examples() {
    let eq = eq_fixture();
    let empty = SequenceCertificate::empty(PartialType::trivial(1));
    let chain = sequence_to_chain(&empty).unwrap();
    assert!(chain.steps.is_empty());
    assert_eq!(chain_to_sequence(&eq, &chain).unwrap(), empty);

    let seq = eq_sequence(&eq);
    let chain = sequence_to_chain(&seq).unwrap();
    assert_eq!(chain.steps.len(), 2);
    assert_eq!(chain.steps[0].formulas, vec![f(&eq, "E(x0,c0)")]);
    assert_eq!(chain.steps[1].base, set(&["c0", "b0"]));
    assert!(verify_chain_certificate(&eq, &chain).is_valid());
    assert_eq!(chain_to_sequence(&eq, &chain).unwrap(), seq);

    let mut inconsistent = chain.clone();
    inconsistent.ty.formulas.push(f(&eq, "!(x0 = x0)"));
    assert!(verify_chain_certificate(&eq, &inconsistent)
        .codes()
        .contains(&FailureCode::InconsistentBranch));
    assert!(matches!(
        chain_to_sequence(&eq, &inconsistent),
        Err(RankError::Unverified(_))
    ));

    let mut shrinking = chain.clone();
    shrinking.steps[1].base = BTreeSet::new();
    assert!(verify_chain_certificate(&eq, &shrinking)
        .codes()
        .contains(&FailureCode::NotMonotone));

    // After the second step the type is complete over {c0, b0}; after the
    // first it leaves x0 = c0 open.
    let mut complete = chain.clone();
    complete.complete_fragment = true;
    let v = verify_chain_certificate(&eq, &complete);
    assert_eq!(v.codes(), vec![FailureCode::IncompleteFragment]);
    assert_eq!(v.failures[0].at, "step 0");
}

#[test]
fn search_examples() {
    let trivial = PartialType::trivial(1);
    assert_eq!(
        exact(&PureInfiniteSet::new(), &trivial, &["x0 = y0"], 3),
        Some(1)
    );
    let eq = EquivalenceRelation::new();
    assert_eq!(exact(&eq, &trivial, &["E(x0,y0)", "x0 = y0"], 4), Some(2));
    assert_eq!(
        exact(&RandomGraph::new(), &trivial, &["R(x0,y0)", "x0 = y0"], 3),
        Some(1)
    );
    let fin = FiniteStructure::small_equivalence();
    assert_eq!(exact(&fin, &trivial, &["E(x0,y0)", "x0 = y0"], 4), Some(0));

    let pair = PartialType::parse(2, &["E(x0,x1)", "!(x0 = x1)"], &[], eq.signature()).unwrap();
    let report = search_rank(
        &eq,
        &pair,
        &atomic_alphabet(&eq, 2),
        SearchBounds::new(4, 4, 64),
    )
    .unwrap();
    assert_eq!(report.exact_value, Some(3));
    assert_eq!(report.certified_lower.to_string(), "3+");
    let theory = theory_of(&report.theory);
    assert!(verify_sequence_certificate(&theory, &report.certificate).is_valid());
}

#[test]
fn search_bound_and_budget() {
    let eq = EquivalenceRelation::new();
    let trivial = PartialType::trivial(1);
    let alphabet = atomic_alphabet(&eq, 1);
    // The bound is attained: no exact value.
    let r = search_rank(&eq, &trivial, &alphabet, SearchBounds::new(2, 4, 64)).unwrap();
    assert_eq!((r.certificate.depth(), r.exact_value), (2, None));

    let r = search_rank(&eq, &trivial, &alphabet, SearchBounds::new(4, 4, 1)).unwrap();
    assert!(r.truncated && !r.exhausted);
    assert_eq!((r.certificate.depth(), r.exact_value), (0, None));

    // Local rank: a single template with a fixed k.
    let mut bounds = SearchBounds::new(4, 4, 64);
    bounds.fixed_k = Some(2);
    let e = [f(&eq, "E(x0,y0)")];
    assert_eq!(
        search_rank(&eq, &trivial, &e, bounds).unwrap().exact_value,
        Some(1)
    );

    assert!(matches!(
        search_rank(&eq, &trivial, &[], bounds),
        Err(RankError::InvalidAlphabet(_))
    ));
    assert!(matches!(
        search_rank(&eq, &trivial, &e, SearchBounds::new(0, 4, 4)),
        Err(RankError::InvalidBounds(_))
    ));
    let bad = PartialType::parse(1, &["!(x0 = x0)"], &[], eq.signature()).unwrap();
    assert_eq!(
        search_rank(&eq, &bad, &e, bounds).unwrap_err(),
        RankError::InconsistentType
    );
}

#[test]
fn atomic_alphabet_shape() {
    let render = |v: Vec<Formula>| v.iter().map(ToString::to_string).collect::<Vec<_>>();
    let eq = EquivalenceRelation::new();
    assert_eq!(render(atomic_alphabet(&eq, 1)), ["E(x0,y0)", "x0 = y0"]);
    assert_eq!(
        render(atomic_alphabet(&eq, 2)),
        ["E(x0,y0)", "E(x1,y0)", "x0 = y0", "x1 = y0"]
    );
    assert_eq!(
        render(atomic_alphabet(&PureInfiniteSet::new(), 1)),
        ["x0 = y0"]
    );
    assert_eq!(
        render(atomic_alphabet(&RandomGraph::new(), 1)),
        ["R(x0,y0)", "x0 = y0"]
    );
}

fn search_over<T: TheoryOracle>(t: &T, p: &PartialType) -> (AnyTheory, SequenceCertificate) {
    let r = search_rank(
        t,
        p,
        &atomic_alphabet(t, p.tuple_length),
        SearchBounds::new(3, 4, 64),
    )
    .unwrap();
    (theory_of(&r.theory), r.certificate)
}

#[test]
fn product_examples() {
    // S = T = {x = x} in the pure set.
    let (t1, s) = search_over(&PureInfiniteSet::new(), &PartialType::trivial(1));
    let t_type = PartialType {
        base: s.base_before(1),
        ..PartialType::trivial(1)
    };
    let (t2, t) = search_over(&t1, &t_type);
    let product = product_concat(&t2, &s, &t).unwrap();
    assert_eq!((product.depth(), product.ty.tuple_length), (2, 2));
    assert_eq!(product.entries[1].formula.to_string(), "x1 = y0");

    // A point of a new class (depth 2) followed by a point (depth 1 over
    // the first one's parameters, whatever its class).
    let (e1, s) = search_over(&EquivalenceRelation::new(), &PartialType::trivial(1));
    assert_eq!(s.depth(), 2);
    let base = s.base_before(2);
    let c0 = s.entries[0].params[0].clone();
    let in_class = PartialType {
        tuple_length: 1,
        formulas: vec![Formula::atom("E", vec![Term::Var(0), Term::Param(c0)])],
        base: base.clone(),
    };
    let (e2, t) = search_over(&e1, &in_class);
    assert_eq!(t.depth(), 1);
    // T's type mentions a parameter outside S's base.
    assert!(matches!(
        product_concat(&e2, &s, &t),
        Err(RankError::BaseMismatch { .. })
    ));
    let (e2, t) = search_over(
        &e1,
        &PartialType {
            base,
            ..PartialType::trivial(1)
        },
    );
    let product = product_concat(&e2, &s, &t).unwrap();
    assert_eq!(product.depth(), 2 + t.depth());

    let mismatched = SequenceCertificate::empty(PartialType::trivial(1));
    assert!(matches!(
        product_concat(&e2, &s, &mismatched),
        Err(RankError::BaseMismatch { .. })
    ));
}

#[test]
fn lascar_examples() {
    let bounds = SearchBounds::new(5, 4, 64);
    let eq = EquivalenceRelation::with_classes([("a", "k0"), ("b", "k0")]).unwrap();
    let r = lascar_check(&eq, "a", "b", &BTreeSet::new(), bounds).unwrap();
    assert_eq!(r.ranks["ab/A"], Some(3));
    assert_eq!(r.ranks["a/A"], Some(2));
    assert_eq!(r.ranks["b/Aa"], Some(1));
    assert_eq!(r.outcome, Outcome::Pass);

    let fin = FiniteStructure::small_equivalence();
    let r = lascar_check(&fin, "0", "2", &BTreeSet::new(), bounds).unwrap();
    assert!(r.ranks.values().all(|v| *v == Some(0)));
    assert_eq!(r.outcome, Outcome::Pass);
}

#[test]
fn certificate_documents_round_trip() {
    let eq = eq_fixture();
    let doc = CertificateDocument::new(
        Certificate::Sequence(eq_sequence(&eq)),
        Some(eq.to_config().to_json()),
    );
    let text = doc.to_json();
    let back = CertificateDocument::from_json(&text).unwrap();
    assert_eq!(back, doc);
    assert_eq!(back.certificate.kind(), "sequence");
    assert!(back.certificate.verify(&eq).is_valid());
    let wrong = text.replace("ddrank/certificate/v1", "ddrank/certificate/v0");
    assert!(CertificateDocument::from_json(&wrong).is_err());
}

#[test]
fn harness_reports_are_reproducible() {
    let eq = builtin_theory("eq_rel").unwrap();
    for kind in [
        HarnessKind::Lascar,
        HarnessKind::Disjunction,
        HarnessKind::CompletionSup,
    ] {
        let cfg = HarnessConfig {
            instances: 6,
            seed: 11,
            bounds: kind.default_bounds(),
        };
        let a = run_harness(kind, &eq, &cfg).unwrap();
        let b = run_harness(kind, &eq, &cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!((a.failed, a.inconclusive), (0, 0));
    }
}

/// A bundled theory grown by fresh elements chosen by `picks`, with a base
/// and a tuple drawn from its parameters.
fn instance(
    backend: usize,
    picks: &[usize],
    base_mask: u8,
    tuple_picks: &[usize],
) -> (AnyTheory, Vec<String>, BTreeSet<String>) {
    let name = ["pure_set", "eq_rel", "random_graph", "finite"][backend];
    let mut t = builtin_theory(name).unwrap();
    let mut pool = t.parameters();
    for &p in picks {
        let fresh: Vec<ElementChoice> = t
            .element_choices(&pool)
            .into_iter()
            .filter(|c| matches!(c, ElementChoice::Fresh(_)))
            .collect();
        let Some(ElementChoice::Fresh(spec)) = fresh.get(p % fresh.len().max(1)) else {
            break;
        };
        let (next, mut names) = t.fresh_parameters(spec, 1).unwrap();
        t = next;
        pool.push(names.pop().unwrap());
    }
    let base: BTreeSet<String> = pool
        .iter()
        .enumerate()
        .filter(|(i, _)| base_mask >> i & 1 == 1)
        .map(|(_, p)| p.clone())
        .take(2)
        .collect();
    let tuple = tuple_picks
        .iter()
        .map(|&i| pool[i % pool.len()].clone())
        .collect();
    (t, tuple, base)
}

fn instances() -> impl Strategy<Value = (AnyTheory, Vec<String>, BTreeSet<String>)> {
    (
        0..4usize,
        prop::collection::vec(0..8usize, 2..5),
        any::<u8>(),
        prop::collection::vec(0..8usize, 1..=2),
    )
        .prop_map(|(b, picks, mask, tp)| instance(b, &picks, mask, &tp))
}

/// Renames every parameter of `t` to `r<i>`, with `i` a permutation drawn
/// from `order`.
fn shuffled_renaming(t: &AnyTheory, order: &[usize]) -> BTreeMap<String, String> {
    let params = t.parameters();
    let mut targets: Vec<usize> = (0..params.len()).collect();
    for (i, &o) in order.iter().enumerate() {
        if !targets.is_empty() {
            let n = targets.len();
            targets.swap(i % n, o % n);
        }
    }
    params
        .into_iter()
        .zip(targets)
        .map(|(p, i)| (p, format!("r{i}")))
        .collect()
}

/// Every element of `[0, width)^depth`.
fn all_branches(depth: usize, width: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|b| {
                (0..width).map(move |i| {
                    let mut b = b.clone();
                    b.push(i);
                    b
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_ranks_match_closed_form((t, tuple, base) in instances()) {
        let p = qf_type_of(&t, &tuple, &base);
        let got = exact_rank(&t, &p, SearchBounds::new(5, 4, 64)).unwrap();
        prop_assert_eq!(got, Some(closed_form_rank(&t, &tuple, &base)));
    }

    #[test]
    fn reports_respect_their_invariants((t, tuple, base) in instances(), depth in 1..4usize) {
        let p = qf_type_of(&t, &tuple, &base);
        let alphabet = atomic_alphabet(&t, p.tuple_length);
        let r = search_rank(&t, &p, &alphabet, SearchBounds::new(depth, 3, 64)).unwrap();
        if let Some(v) = r.exact_value {
            prop_assert!(r.exhausted);
            prop_assert_eq!(r.certificate.depth(), v);
            prop_assert!(v < depth);
        }
        prop_assert!(!r.certified_lower.to_string().ends_with('-'));
        prop_assert!(verify_sequence_certificate(&theory_of(&r.theory), &r.certificate).is_valid());
    }

    #[test]
    fn conversions_preserve_verification((t, tuple, base) in instances(), width in 2..4usize) {
        let p = qf_type_of(&t, &tuple, &base);
        let (_, seq) = search_over(&t, &p);
        let (grown, tree) = grow_tree(&t, &seq, width).unwrap().expect("a tree exists");
        prop_assert!(verify_tree_certificate(&grown, &tree).is_valid());
        for branch in all_branches(tree.depth, width) {
            let seq = tree_branch_to_sequence(&grown, &tree, &branch).unwrap();
            prop_assert!(verify_sequence_certificate(&grown, &seq).is_valid());
            let chain = sequence_to_chain(&seq).unwrap();
            prop_assert!(verify_chain_certificate(&grown, &chain).is_valid());
            let back = chain_to_sequence(&grown, &chain).unwrap();
            prop_assert_eq!(back.depth(), tree.depth);
            prop_assert!(verify_sequence_certificate(&grown, &back).is_valid());
        }
    }

    #[test]
    fn renaming_preserves_verdicts(
        (t, tuple, base) in instances(),
        order in prop::collection::vec(any::<usize>(), 0..12),
        mutation in 0..4usize,
    ) {
        let p = qf_type_of(&t, &tuple, &base);
        let (ext, mut cert) = search_over(&t, &p);
        if let Some(e) = cert.entries.first_mut() {
            match mutation {
                0 => e.witness.k = e.witness.family.len() + 1,
                1 => {
                    let first = e.witness.family[0].clone();
                    e.witness.family.push(first);
                }
                2 => e.witness.base = e.witness.family.concat().into_iter().collect(),
                _ => {}
            }
        }
        let map = shuffled_renaming(&ext, &order);
        let renamed = ext.rename(&map).unwrap();
        let before = verify_sequence_certificate(&ext, &cert).codes();
        let after = verify_sequence_certificate(&renamed, &cert.rename_params(&map)).codes();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn repeated_members_never_verify((t, tuple, base) in instances(), dup in 0..3usize) {
        let p = qf_type_of(&t, &tuple, &base);
        let (ext, cert) = search_over(&t, &p);
        for e in &cert.entries {
            let mut w = e.witness.clone();
            let copy = w.family[dup % w.family.len()].clone();
            w.family.push(copy);
            prop_assert!(!verify_dividing_witness(&ext, &w).is_valid());
        }
    }

    #[test]
    fn adding_formulas_never_raises_the_rank((t, tuple, base) in instances(), extra in 0..64usize) {
        let p = qf_type_of(&t, &tuple, &base);
        prop_assume!(!p.formulas.is_empty());
        let q = PartialType {
            formulas: vec![p.formulas[extra % p.formulas.len()].clone()],
            ..p.clone()
        };
        let bounds = SearchBounds::new(5, 4, 64);
        let dp = exact_rank(&t, &p, bounds).unwrap().unwrap();
        let dq = exact_rank(&t, &q, bounds).unwrap().unwrap();
        prop_assert!(dp <= dq);
    }

    #[test]
    fn disjunction_takes_the_maximum(backend in 0..4usize, seed in any::<u64>()) {
        let name = ["pure_set", "eq_rel", "random_graph", "finite"][backend];
        let t = builtin_theory(name).unwrap();
        let cfg = HarnessConfig {
            instances: 3,
            seed,
            bounds: HarnessKind::Disjunction.default_bounds(),
        };
        let r = run_harness(HarnessKind::Disjunction, &t, &cfg).unwrap();
        prop_assert_eq!((r.failed, r.inconclusive), (0, 0));
    }
}
