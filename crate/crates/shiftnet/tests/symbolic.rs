use std::collections::BTreeMap;

use proptest::prelude::*;
use shiftnet::symbolic::{
    apply_vs, char_word, read_dod, shift_dot, substitute, Alphabet, Dod, DottedSequence, DottedWord, Rule, Symbol,
    SymbolicError, VersatileShift,
};

fn rewrite_example() -> VersatileShift {
    let alphabet = Alphabet::new(char_word("_adenorw"), Some(Symbol::blank())).unwrap();
    let mut rules = BTreeMap::new();
    rules.insert(
        DottedWord::parse("o.r").unwrap(),
        Rule::new(DottedWord::parse("a.n").unwrap(), 0),
    );
    rules.insert(
        DottedWord::parse("a.n").unwrap(),
        Rule::new(DottedWord::parse("on.dere").unwrap(), 1),
    );
    VersatileShift::new(alphabet, Dod::new(-2, 1).unwrap(), rules).unwrap()
}

#[test]
fn rewrite_trace() {
    let vs = rewrite_example();
    let s1 = apply_vs(&vs, &DottedSequence::parse("wo.rd").unwrap()).unwrap();
    assert_eq!(s1, DottedSequence::parse("wa.nd").unwrap());
    let s2 = apply_vs(&vs, &s1).unwrap();
    assert_eq!(s2, DottedSequence::parse("wo.ndered").unwrap());
    assert!(matches!(apply_vs(&vs, &s2), Err(SymbolicError::NoRule(_))));
}

#[test]
fn substitution_examples() {
    let dod = Dod::new(-2, 1).unwrap();
    let s = DottedSequence::parse("wo.rd").unwrap();
    assert_eq!(
        substitute(&s, dod, &DottedWord::parse("a.n").unwrap()),
        DottedSequence::parse("wa.nd").unwrap()
    );
    let s = DottedSequence::parse("wa.nd").unwrap();
    assert_eq!(
        substitute(&s, dod, &DottedWord::parse("on.dere").unwrap()),
        DottedSequence::parse("won.dered").unwrap()
    );
    assert_eq!(substitute(&s, dod, &read_dod(&s, dod)), s);
}

#[test]
fn dod_shapes() {
    assert!(Dod::new(1, 1).is_err());
    assert!(Dod::new(-1, 0).is_err());
    let d = Dod::new(-3, 2).unwrap();
    assert_eq!((d.left_len(), d.right_len()), (2, 2));
}

#[test]
fn shift_pulling_unknown_context_is_rejected() {
    let alphabet = Alphabet::new(char_word("_ab"), Some(Symbol::blank())).unwrap();
    let mut rules = BTreeMap::new();
    rules.insert(
        DottedWord::parse("a.b").unwrap(),
        Rule::new(DottedWord::parse("a.b").unwrap(), 2),
    );
    let err = VersatileShift::new(alphabet, Dod::new(-2, 1).unwrap(), rules).unwrap_err();
    assert!(matches!(err, SymbolicError::InvalidShift { .. }));
}

#[test]
fn alphabet_invariants() {
    assert!(Alphabet::new(vec![], None).is_err());
    assert!(Alphabet::new(char_word("aa"), None).is_err());
    assert!(Alphabet::new(char_word("ab"), Some(Symbol::blank())).is_err());
}

fn side() -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec(prop::sample::select(char_word("_abc")), 0..6)
}

fn sequence() -> impl Strategy<Value = DottedSequence> {
    (side(), side()).prop_map(|(l, r)| DottedSequence::new(l, r, Symbol::blank(), Symbol::blank()))
}

proptest! {
    #[test]
    fn shifts_compose(s in sequence(), a in -4i64..5, b in -4i64..5) {
        prop_assert_eq!(shift_dot(&shift_dot(&s, a), b), shift_dot(&s, a + b));
        prop_assert_eq!(shift_dot(&shift_dot(&s, a), -a), s.clone());
        prop_assert_eq!(shift_dot(&s, 0), s);
    }

    #[test]
    fn substitution_is_read_back(s in sequence(), l in side(), r in side(), kl in -3i64..0, kr in 0i64..3) {
        prop_assume!(kl < -1 || kr > 0);
        let dod = Dod::new(kl, kr).unwrap();
        let mut l = l;
        let mut r = r;
        l.resize(dod.left_len(), Symbol::new("a"));
        r.resize(dod.right_len(), Symbol::new("b"));
        let v = DottedWord::new(l, r);
        prop_assert_eq!(read_dod(&substitute(&s, dod, &v), dod), v);
    }

    #[test]
    fn canonical_form_ignores_trailing_fill(l in side(), r in side(), extra in 0usize..4) {
        let a = DottedSequence::new(l.clone(), r.clone(), Symbol::blank(), Symbol::blank());
        let mut l2 = l;
        let mut r2 = r;
        l2.extend(std::iter::repeat_n(Symbol::blank(), extra));
        r2.extend(std::iter::repeat_n(Symbol::blank(), extra));
        let b = DottedSequence::new(l2, r2, Symbol::blank(), Symbol::blank());
        prop_assert_eq!(&a, &b);
        let again = DottedSequence::new(b.left().to_vec(), b.right().to_vec(), Symbol::blank(), Symbol::blank());
        prop_assert_eq!(again, b);
    }

    #[test]
    fn apply_is_deterministic(s in sequence()) {
        let vs = rewrite_example();
        let alt = DottedSequence::new(
            s.left_padded(s.left().len() + 2),
            s.right_padded(s.right().len() + 1),
            Symbol::blank(),
            Symbol::blank(),
        );
        prop_assert_eq!(apply_vs(&vs, &s), apply_vs(&vs, &alt));
    }
}
