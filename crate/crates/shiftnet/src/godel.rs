//! Exact Gödel codes for one-sided words and symbologram coordinates.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::symbolic::{DottedSequence, Symbol};

pub type Rational = BigRational;

/// Exact rational from integer parts.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub(crate) fn pow(base: usize, exp: usize) -> Rational {
    Rational::from_integer(BigInt::from(base).pow(exp as u32))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GodelError {
    #[error("symbol `{0}` has no gamma index")]
    UnknownSymbol(Symbol),
    #[error("gamma map is empty")]
    Empty,
    #[error("duplicate symbol `{0}` in gamma map")]
    Duplicate(Symbol),
    #[error("gamma indices must be contiguous from zero")]
    NonContiguous,
    #[error("blank must carry gamma index 0")]
    BlankNotZero,
    #[error("state and tape symbols overlap on `{0}`")]
    Overlap(Symbol),
    #[error("word does not start with a state symbol")]
    MalformedWord,
    #[error("code {0} is not representable in the given base within {1} digits")]
    NonRepresentable(Rational, usize),
    #[error("code {0} lies outside [0, 1]")]
    OutOfRange(Rational),
    #[error("popped word disagrees with the leading digits of the code")]
    DigitMismatch,
}

/// Exact code in `[0, 1]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Code(Rational);

impl Code {
    pub fn new(value: Rational) -> Result<Self, GodelError> {
        if value.is_negative() || value > Rational::one() {
            return Err(GodelError::OutOfRange(value));
        }
        Ok(Code(value))
    }

    pub fn zero() -> Self {
        Code(Rational::zero())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_value(self) -> Rational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Code({})", self.0)
    }
}

/// Bijection from an alphabet onto `0..g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaMap {
    symbols: Vec<Symbol>,
    index: HashMap<Symbol, usize>,
}

impl GammaMap {
    /// Symbols listed in index order.
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, GodelError> {
        if symbols.is_empty() {
            return Err(GodelError::Empty);
        }
        let mut index = HashMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(GodelError::Duplicate(s.clone()));
            }
        }
        if let Some(&i) = index.get(&Symbol::blank()) {
            if i != 0 {
                return Err(GodelError::BlankNotZero);
            }
        }
        Ok(GammaMap { symbols, index })
    }

    /// Builds from explicit `(symbol, index)` pairs.
    pub fn from_pairs(pairs: &[(Symbol, usize)]) -> Result<Self, GodelError> {
        let mut slots: Vec<Option<Symbol>> = vec![None; pairs.len()];
        for (s, i) in pairs {
            match slots.get_mut(*i) {
                Some(slot @ None) => *slot = Some(s.clone()),
                Some(Some(_)) | None => return Err(GodelError::NonContiguous),
            }
        }
        let symbols = slots
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(GodelError::NonContiguous)?;
        GammaMap::new(symbols)
    }

    pub fn base(&self) -> usize {
        self.symbols.len()
    }

    pub fn index(&self, s: &Symbol) -> Result<usize, GodelError> {
        self.index
            .get(s)
            .copied()
            .ok_or_else(|| GodelError::UnknownSymbol(s.clone()))
    }

    pub fn symbol(&self, i: usize) -> Option<&Symbol> {
        self.symbols.get(i)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// The symbol with index 0, used as fill.
    pub fn zero_symbol(&self) -> &Symbol {
        &self.symbols[0]
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.index.contains_key(s)
    }
}

/// Gödel code of a finite word (equivalently its zero-padded continuation).
pub fn godelize(w: &[Symbol], g: &GammaMap) -> Result<Code, GodelError> {
    Ok(Code(plain_value(w, g)?))
}

fn plain_value(w: &[Symbol], g: &GammaMap) -> Result<Rational, GodelError> {
    let base = BigInt::from(g.base());
    let mut num = BigInt::zero();
    for s in w {
        num = num * &base + BigInt::from(g.index(s)?);
    }
    Ok(Rational::new(num, base.pow(w.len() as u32)))
}

/// First `n` symbols of the word encoded by `c`.
pub fn decode(c: &Code, g: &GammaMap, n: usize) -> Result<Vec<Symbol>, GodelError> {
    let (digits, rest) = digits(c.value(), g.base(), n);
    if !rest.is_zero() {
        return Err(GodelError::NonRepresentable(c.value().clone(), n));
    }
    Ok(digits.into_iter().map(|d| g.symbols[d].clone()).collect())
}

/// Shortest word encoded by `c` (no trailing zero symbols).
pub fn decode_word(c: &Code, g: &GammaMap, max_len: usize) -> Result<Vec<Symbol>, GodelError> {
    let mut w = decode(c, g, max_len)?;
    while w.last() == Some(g.zero_symbol()) {
        w.pop();
    }
    Ok(w)
}

fn digits(v: &Rational, base: usize, n: usize) -> (Vec<usize>, Rational) {
    let b = int(base as i64);
    let mut rest = v.clone();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        if rest.is_zero() {
            out.push(0);
            continue;
        }
        rest *= &b;
        let d = rest.floor();
        rest -= &d;
        let d = d.to_integer().to_usize().unwrap_or(base - 1).min(base - 1);
        out.push(d);
    }
    (out, rest)
}

/// Removes `popped` from the front of the encoded word.
pub fn pop_code(c: &Code, popped: &[Symbol], g: &GammaMap) -> Result<Code, GodelError> {
    let p = popped.len();
    let (lead, _) = digits(c.value(), g.base(), p);
    for (d, s) in lead.iter().zip(popped) {
        if *d != g.index(s)? {
            return Err(GodelError::DigitMismatch);
        }
    }
    let mut v = c.value() * pow(g.base(), p);
    for (i, s) in popped.iter().enumerate() {
        v -= int(g.index(s)? as i64) * pow(g.base(), p - i - 1);
    }
    Ok(Code(v))
}

/// Prepends `pushed` to the encoded word.
pub fn push_code(c: &Code, pushed: &[Symbol], g: &GammaMap) -> Result<Code, GodelError> {
    let r = pushed.len();
    let mut v = c.value() / pow(g.base(), r);
    for (i, s) in pushed.iter().enumerate() {
        v += int(g.index(s)? as i64) / pow(g.base(), i + 1);
    }
    Ok(Code(v))
}

/// Separate enumerations for a leading state and the tape symbols after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinedGammaMap {
    states: GammaMap,
    tape: GammaMap,
}

impl RefinedGammaMap {
    pub fn new(states: GammaMap, tape: GammaMap) -> Result<Self, GodelError> {
        for s in states.symbols() {
            if tape.contains(s) {
                return Err(GodelError::Overlap(s.clone()));
            }
        }
        Ok(RefinedGammaMap { states, tape })
    }

    pub fn states(&self) -> &GammaMap {
        &self.states
    }

    pub fn tape(&self) -> &GammaMap {
        &self.tape
    }
}

/// Refined code: the state selects a `1/n_q` band, the tape refines it.
pub fn godelize_refined(w: &[Symbol], g: &RefinedGammaMap) -> Result<Code, GodelError> {
    let (q, rest) = w.split_first().ok_or(GodelError::MalformedWord)?;
    if !g.states.contains(q) {
        return Err(GodelError::MalformedWord);
    }
    let nq = int(g.states.base() as i64);
    Ok(Code(
        (int(g.states.index(q)? as i64) + plain_value(rest, &g.tape)?) / nq,
    ))
}

/// How one side of a dotted sequence is turned into a code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxisEncoding {
    Plain(GammaMap),
    Refined(RefinedGammaMap),
}

impl AxisEncoding {
    /// Code of a side word. On a refined axis a word without a leading state
    /// is coded by its tape part alone.
    pub fn encode(&self, w: &[Symbol]) -> Result<Code, GodelError> {
        match self {
            AxisEncoding::Plain(g) => godelize(w, g),
            AxisEncoding::Refined(r) => match w.first() {
                Some(q) if r.states.contains(q) => godelize_refined(w, r),
                _ => godelize(w, &r.tape),
            },
        }
    }

    /// Code offset contributed by a known prefix.
    pub fn offset(&self, prefix: &[Symbol]) -> Result<Rational, GodelError> {
        Ok(self.encode(prefix)?.into_value())
    }

    /// Weight of the code of whatever follows `prefix`.
    pub fn scale(&self, prefix: &[Symbol]) -> Rational {
        match self {
            AxisEncoding::Plain(g) => Rational::one() / pow(g.base(), prefix.len()),
            AxisEncoding::Refined(r) => match prefix.first() {
                Some(q) if r.states.contains(q) => {
                    Rational::one() / (int(r.states.base() as i64) * pow(r.tape.base(), prefix.len() - 1))
                }
                _ => Rational::one() / pow(r.tape.base(), prefix.len()),
            },
        }
    }

    /// Code interval `[lo, hi)` of all words starting with `prefix`.
    pub fn cylinder(&self, prefix: &[Symbol]) -> Result<(Rational, Rational), GodelError> {
        let lo = self.offset(prefix)?;
        let hi = &lo + self.scale(prefix);
        Ok((lo, hi))
    }

    /// Fill symbol of the tail (index 0 of the tape enumeration).
    pub fn fill(&self) -> &Symbol {
        match self {
            AxisEncoding::Plain(g) => g.zero_symbol(),
            AxisEncoding::Refined(r) => r.tape.zero_symbol(),
        }
    }

    pub fn tail_map(&self) -> &GammaMap {
        match self {
            AxisEncoding::Plain(g) => g,
            AxisEncoding::Refined(r) => &r.tape,
        }
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        match self {
            AxisEncoding::Plain(g) => g.contains(s),
            AxisEncoding::Refined(r) => r.states.contains(s) || r.tape.contains(s),
        }
    }

    /// Shortest side word with the given code. Refined axes always decode a
    /// leading state.
    pub fn decode(&self, c: &Code, max_len: usize) -> Result<Vec<Symbol>, GodelError> {
        match self {
            AxisEncoding::Plain(g) => decode_word(c, g, max_len),
            AxisEncoding::Refined(r) => {
                let nq = r.states.base();
                let scaled = c.value() * int(nq as i64);
                let q = scaled.floor();
                let qi = q.to_integer().to_usize().unwrap_or(nq);
                let state = r
                    .states
                    .symbol(qi)
                    .ok_or_else(|| GodelError::NonRepresentable(c.value().clone(), max_len))?
                    .clone();
                let rest = Code(scaled - q);
                let mut w = vec![state];
                w.extend(decode_word(&rest, &r.tape, max_len)?);
                Ok(w)
            }
        }
    }
}

/// Symbologram point of a dotted sequence.
pub fn godelize_dotted(s: &DottedSequence, gx: &AxisEncoding, gy: &AxisEncoding) -> Result<(Code, Code), GodelError> {
    Ok((gx.encode(s.left())?, gy.encode(s.right())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{char_word, word};

    fn abba_map() -> GammaMap {
        GammaMap::new(char_word("_ab")).unwrap()
    }

    #[test]
    fn abba_code() {
        let c = godelize(&char_word("abba"), &abba_map()).unwrap();
        assert_eq!(c.value(), &ratio(52, 81));
        assert_eq!(decode(&c, &abba_map(), 4).unwrap(), char_word("abba"));
    }

    #[test]
    fn empty_word_is_zero() {
        assert_eq!(godelize(&[], &abba_map()).unwrap(), Code::zero());
        assert_eq!(decode(&Code::zero(), &abba_map(), 3).unwrap(), char_word("___"));
    }

    #[test]
    fn hi_symbol_is_one_half() {
        let g = GammaMap::new(word("<lo> <hi>")).unwrap();
        let c = godelize(&word("<hi>"), &g).unwrap();
        assert_eq!(c.value(), &ratio(1, 2));
        assert_eq!(decode(&c, &g, 1).unwrap(), word("<hi>"));
    }

    #[test]
    fn non_representable_detected() {
        let c = Code::new(ratio(1, 5)).unwrap();
        assert!(matches!(
            decode(&c, &abba_map(), 4),
            Err(GodelError::NonRepresentable(..))
        ));
    }

    #[test]
    fn pop_and_push() {
        let g = abba_map();
        let c = godelize(&char_word("abba"), &g).unwrap();
        let popped = pop_code(&c, &char_word("a"), &g).unwrap();
        assert_eq!(popped, godelize(&char_word("bba"), &g).unwrap());
        assert_eq!(push_code(&popped, &char_word("a"), &g).unwrap(), c);
        assert_eq!(push_code(&c, &[], &g).unwrap(), c);
        assert_eq!(pop_code(&c, &char_word("b"), &g), Err(GodelError::DigitMismatch));
        let rd = GammaMap::new(char_word("_dor")).unwrap();
        let c = godelize(&char_word("rd"), &rd).unwrap();
        assert_eq!(
            push_code(&c, &char_word("o"), &rd).unwrap(),
            godelize(&char_word("ord"), &rd).unwrap()
        );
    }

    #[test]
    fn refined_code_examples() {
        let states = GammaMap::new(word("s-o o-s repair")).unwrap();
        let parse = GammaMap::new(word("_ o s")).unwrap();
        let r = RefinedGammaMap::new(states, parse).unwrap();
        assert_eq!(godelize_refined(&word("s-o"), &r).unwrap(), Code::zero());
        assert_eq!(godelize_refined(&word("repair _ _"), &r).unwrap().value(), &ratio(2, 3));
        assert_eq!(
            godelize_refined(&word("o-s s"), &r).unwrap().value(),
            &(ratio(1, 3) + ratio(2, 9))
        );
        assert_eq!(godelize_refined(&word("o s"), &r), Err(GodelError::MalformedWord));
    }

    #[test]
    fn refined_decode_round_trip() {
        let states = GammaMap::new(word("q0 q1 q2")).unwrap();
        let tape = GammaMap::new(word("_ a b")).unwrap();
        let enc = AxisEncoding::Refined(RefinedGammaMap::new(states, tape).unwrap());
        let w = word("q1 b a _ b");
        let c = enc.encode(&w).unwrap();
        assert_eq!(enc.decode(&c, 20).unwrap(), w);
    }

    #[test]
    fn cylinder_contains_extensions() {
        let g = AxisEncoding::Plain(abba_map());
        let (lo, hi) = g.cylinder(&char_word("ab")).unwrap();
        let c = g.encode(&char_word("abba")).unwrap();
        assert!(c.value() >= &lo && c.value() < &hi);
    }

    #[test]
    fn blank_must_be_zero() {
        assert_eq!(GammaMap::new(char_word("a_")).unwrap_err(), GodelError::BlankNotZero);
        assert!(GammaMap::from_pairs(&[(Symbol::new("a"), 0), (Symbol::new("b"), 2)]).is_err());
    }
}
