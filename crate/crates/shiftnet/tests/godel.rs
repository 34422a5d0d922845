use num_bigint::BigInt;
use proptest::prelude::*;
use shiftnet::godel::{
    decode, decode_word, godelize, godelize_refined, pop_code, push_code, ratio, AxisEncoding, Code, GammaMap,
    GodelError, Rational, RefinedGammaMap,
};
use shiftnet::symbolic::{char_word, word, Symbol};

/// Series summation, term by term.
fn series(w: &[Symbol], g: &GammaMap) -> Rational {
    let base = BigInt::from(g.base());
    let mut acc = Rational::from_integer(0.into());
    for (k, s) in w.iter().enumerate() {
        let digit = BigInt::from(g.index(s).unwrap());
        acc += Rational::new(digit, base.pow(k as u32 + 1));
    }
    acc
}

fn map(symbols: &str) -> GammaMap {
    GammaMap::new(char_word(symbols)).unwrap()
}

#[test]
fn worked_codes() {
    let g = map("_ab");
    assert_eq!(godelize(&char_word("abba"), &g).unwrap().value(), &ratio(52, 81));
    assert_eq!(godelize(&[], &g).unwrap(), Code::zero());
    let lohi = GammaMap::new(word("<lo> <hi>")).unwrap();
    assert_eq!(godelize(&word("<hi>"), &lohi).unwrap().value(), &ratio(1, 2));
    assert_eq!(
        decode(&Code::new(ratio(1, 2)).unwrap(), &lohi, 1).unwrap(),
        word("<hi>")
    );
    assert_eq!(
        decode(&Code::new(ratio(52, 81)).unwrap(), &g, 4).unwrap(),
        char_word("abba")
    );
    assert_eq!(decode(&Code::zero(), &g, 3).unwrap(), char_word("___"));
}

#[test]
fn pop_and_push_examples() {
    let g = map("_ab");
    let c = godelize(&char_word("abba"), &g).unwrap();
    assert_eq!(
        pop_code(&c, &char_word("a"), &g).unwrap(),
        godelize(&char_word("bba"), &g).unwrap()
    );
    assert_eq!(push_code(&c, &[], &g).unwrap(), c);
    assert_eq!(pop_code(&c, &char_word("b"), &g), Err(GodelError::DigitMismatch));
    let t = map("_adnorw");
    let rd = godelize(&char_word("rd"), &t).unwrap();
    assert_eq!(
        push_code(&rd, &char_word("o"), &t).unwrap(),
        godelize(&char_word("ord"), &t).unwrap()
    );
}

#[test]
fn refined_examples() {
    let strategy = RefinedGammaMap::new(map("xyz"), map("_os")).unwrap();
    let w = char_word("xs");
    assert_eq!(godelize_refined(&char_word("x"), &strategy).unwrap(), Code::zero());
    assert_eq!(
        godelize_refined(&char_word("z"), &strategy).unwrap().value(),
        &ratio(2, 3)
    );
    assert_eq!(
        godelize_refined(&char_word("ys"), &strategy).unwrap().value(),
        &(ratio(1, 3) + ratio(2, 9))
    );
    let e = AxisEncoding::Refined(strategy);
    let c = e.encode(&w).unwrap();
    assert_eq!(e.decode(&c, 8).unwrap(), w);
}

#[test]
fn map_invariants() {
    assert!(matches!(GammaMap::new(char_word("a_")), Err(GodelError::BlankNotZero)));
    assert!(GammaMap::new(vec![]).is_err());
    let pairs = [(Symbol::new("a"), 0), (Symbol::new("b"), 2)];
    assert!(GammaMap::from_pairs(&pairs).is_err());
    assert!(Code::new(ratio(3, 2)).is_err());
}

#[test]
fn exhaustive_round_trip_short_words() {
    let g = map("abc");
    let alphabet = char_word("abc");
    let mut words: Vec<Vec<Symbol>> = vec![vec![]];
    for len in 1..=6 {
        let mut next = Vec::new();
        for w in words.iter().filter(|w| w.len() == len - 1) {
            for s in &alphabet {
                let mut v = w.clone();
                v.push(s.clone());
                next.push(v);
            }
        }
        words.extend(next);
    }
    assert_eq!(words.len(), (0..=6).map(|k| 3usize.pow(k)).sum::<usize>());
    for w in &words {
        let c = godelize(w, &g).unwrap();
        assert_eq!(c.value(), &series(w, &g));
        assert_eq!(decode(&c, &g, w.len()).unwrap(), *w);
    }
}

fn alphabet_and_word(max_base: usize, max_len: usize) -> impl Strategy<Value = (GammaMap, Vec<Symbol>)> {
    (1..=max_base).prop_flat_map(move |n| {
        let symbols: Vec<Symbol> = (0..n).map(|i| Symbol::new(&format!("s{i}"))).collect();
        let g = GammaMap::new(symbols.clone()).unwrap();
        (
            Just(g),
            prop::collection::vec(prop::sample::select(symbols), 0..=max_len),
        )
    })
}

proptest! {
    #[test]
    fn code_matches_series((g, w) in alphabet_and_word(5, 10)) {
        let c = godelize(&w, &g).unwrap();
        prop_assert_eq!(c.value(), &series(&w, &g));
        prop_assert_eq!(decode(&c, &g, w.len()).unwrap(), w);
    }

    #[test]
    fn pop_push_are_affine((g, w) in alphabet_and_word(5, 10), split in 0usize..11) {
        let k = split.min(w.len());
        let (prefix, rest) = w.split_at(k);
        let c = godelize(&w, &g).unwrap();
        let popped = pop_code(&c, prefix, &g).unwrap();
        prop_assert_eq!(&popped, &godelize(rest, &g).unwrap());
        prop_assert_eq!(push_code(&popped, prefix, &g).unwrap(), c);
    }

    #[test]
    fn prefixes_stay_in_their_cylinder((g, w) in alphabet_and_word(5, 8), k in 0usize..9) {
        let k = k.min(w.len());
        let lo = godelize(&w[..k], &g).unwrap().into_value();
        let span = Rational::new(1.into(), BigInt::from(g.base()).pow(k as u32));
        let c = godelize(&w, &g).unwrap().into_value();
        prop_assert!(lo <= c && c < lo + span || g.base() == 1);
    }

    #[test]
    fn canonical_words_have_distinct_codes((g, a) in alphabet_and_word(4, 6), b_seed in any::<u64>()) {
        let symbols = g.symbols().to_vec();
        let mut b: Vec<Symbol> = (0..(b_seed % 7) as usize)
            .map(|i| symbols[((b_seed >> (i * 3)) as usize) % symbols.len()].clone())
            .collect();
        let mut a = a;
        let zero = g.zero_symbol().clone();
        while a.last() == Some(&zero) { a.pop(); }
        while b.last() == Some(&zero) { b.pop(); }
        let same = godelize(&a, &g).unwrap() == godelize(&b, &g).unwrap();
        prop_assert_eq!(same, a == b);
        prop_assert_eq!(decode_word(&godelize(&a, &g).unwrap(), &g, 8).unwrap(), a);
    }
}
