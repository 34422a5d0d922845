//! Dotted sequences, the dot shift and versatile shifts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Name of the conventional blank symbol.
pub const BLANK: &str = "_";

/// A single alphabet symbol. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn blank() -> Self {
        Symbol::new(BLANK)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_blank(&self) -> bool {
        &*self.0 == BLANK
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Builds a word from whitespace separated tokens.
pub fn word(tokens: &str) -> Vec<Symbol> {
    tokens.split_whitespace().map(Symbol::new).collect()
}

/// Builds a word treating every character as a symbol.
pub fn char_word(text: &str) -> Vec<Symbol> {
    text.chars().map(|c| Symbol::new(&c.to_string())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("duplicate symbol `{0}` in alphabet")]
    DuplicateSymbol(Symbol),
    #[error("blank `{0}` is not a member of the alphabet")]
    BlankNotInAlphabet(Symbol),
    #[error("invalid domain of dependence ({k_l}, {k_r})")]
    InvalidDod { k_l: i64, k_r: i64 },
    #[error("rule key {key} does not fit the domain of dependence")]
    KeyShape { key: DottedWord },
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(Symbol),
    #[error("no rule for dotted word {0}")]
    NoRule(DottedWord),
    #[error("rule {key} shifts by {shift} but only {available} replaced symbols can cross the dot")]
    InvalidShift {
        key: DottedWord,
        shift: i64,
        available: usize,
    },
    #[error("cannot parse dotted text `{0}`")]
    Malformed(String),
}

/// Finite alphabet with an optional blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<Symbol>,
    blank: Option<Symbol>,
}

impl Alphabet {
    pub fn new(symbols: Vec<Symbol>, blank: Option<Symbol>) -> Result<Self, SymbolicError> {
        if symbols.is_empty() {
            return Err(SymbolicError::EmptyAlphabet);
        }
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if !seen.insert(s.clone()) {
                return Err(SymbolicError::DuplicateSymbol(s.clone()));
            }
        }
        if let Some(b) = &blank {
            if !seen.contains(b) {
                return Err(SymbolicError::BlankNotInAlphabet(b.clone()));
            }
        }
        Ok(Alphabet { symbols, blank })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn blank(&self) -> Option<&Symbol> {
        self.blank.as_ref()
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.symbols.contains(s)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// A finite dotted word `v1.v2`; both halves are stored nearest-dot-first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DottedWord {
    pub left: Vec<Symbol>,
    pub right: Vec<Symbol>,
}

impl DottedWord {
    pub fn new(left: Vec<Symbol>, right: Vec<Symbol>) -> Self {
        DottedWord { left, right }
    }

    /// Builds from the natural reading order, `left` written left to right.
    pub fn natural(left: &[Symbol], right: &[Symbol]) -> Self {
        DottedWord {
            left: left.iter().rev().cloned().collect(),
            right: right.to_vec(),
        }
    }

    /// Parses `"a b . c"` (tokens) or `"ab.c"` (characters, when there is no whitespace).
    pub fn parse(text: &str) -> Result<Self, SymbolicError> {
        let (l, r) = split_dotted(text)?;
        Ok(DottedWord::natural(&l, &r))
    }
}

impl fmt::Display for DottedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let natural: Vec<Symbol> = self.left.iter().rev().cloned().collect();
        write_dotted(f, &natural, &self.right)
    }
}

impl fmt::Debug for DottedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DottedWord({self})")
    }
}

fn write_dotted(f: &mut fmt::Formatter<'_>, left: &[Symbol], right: &[Symbol]) -> fmt::Result {
    let compact = left.iter().chain(right).all(|s| s.as_str().chars().count() == 1);
    if compact {
        for s in left {
            write!(f, "{s}")?;
        }
        f.write_str(".")?;
        for s in right {
            write!(f, "{s}")?;
        }
        Ok(())
    } else {
        let l: Vec<&str> = left.iter().map(Symbol::as_str).collect();
        let r: Vec<&str> = right.iter().map(Symbol::as_str).collect();
        let mut parts = Vec::new();
        if !l.is_empty() {
            parts.push(l.join(" "));
        }
        parts.push(".".to_string());
        if !r.is_empty() {
            parts.push(r.join(" "));
        }
        f.write_str(&parts.join(" "))
    }
}

fn split_dotted(text: &str) -> Result<(Vec<Symbol>, Vec<Symbol>), SymbolicError> {
    let text = text.trim();
    if text.split_whitespace().count() > 1 {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let dots: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == ".")
            .map(|(i, _)| i)
            .collect();
        if dots.len() != 1 {
            return Err(SymbolicError::Malformed(text.to_string()));
        }
        let d = dots[0];
        let l = tokens[..d].iter().map(|t| Symbol::new(t)).collect();
        let r = tokens[d + 1..].iter().map(|t| Symbol::new(t)).collect();
        Ok((l, r))
    } else {
        let mut parts = text.splitn(2, '.');
        let l = parts.next().unwrap_or("");
        let r = parts.next().ok_or_else(|| SymbolicError::Malformed(text.to_string()))?;
        if r.contains('.') {
            return Err(SymbolicError::Malformed(text.to_string()));
        }
        Ok((char_word(l), char_word(r)))
    }
}

/// A two-sided sequence around a dot, finitely represented with blank fill.
///
/// `left` holds the symbols left of the dot nearest-first, `right` those right
/// of it. Beyond the stored words each side continues with its fill symbol.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DottedSequence {
    left: Vec<Symbol>,
    right: Vec<Symbol>,
    fill_left: Symbol,
    fill_right: Symbol,
}

impl DottedSequence {
    pub fn new(left: Vec<Symbol>, right: Vec<Symbol>, fill_left: Symbol, fill_right: Symbol) -> Self {
        let mut s = DottedSequence {
            left,
            right,
            fill_left,
            fill_right,
        };
        s.canonicalize();
        s
    }

    /// Blank-filled sequence from a natural-order left part.
    pub fn natural(left: &[Symbol], right: &[Symbol]) -> Self {
        DottedSequence::new(
            left.iter().rev().cloned().collect(),
            right.to_vec(),
            Symbol::blank(),
            Symbol::blank(),
        )
    }

    /// Parses dotted text with blank fill on both sides.
    pub fn parse(text: &str) -> Result<Self, SymbolicError> {
        let (l, r) = split_dotted(text)?;
        Ok(DottedSequence::natural(&l, &r))
    }

    pub fn with_fills(mut self, fill_left: Symbol, fill_right: Symbol) -> Self {
        self.fill_left = fill_left;
        self.fill_right = fill_right;
        self.canonicalize();
        self
    }

    fn canonicalize(&mut self) {
        while self.left.last() == Some(&self.fill_left) {
            self.left.pop();
        }
        while self.right.last() == Some(&self.fill_right) {
            self.right.pop();
        }
    }

    /// Left side nearest-first (the reversed left half).
    pub fn left(&self) -> &[Symbol] {
        &self.left
    }

    pub fn right(&self) -> &[Symbol] {
        &self.right
    }

    pub fn fill_left(&self) -> &Symbol {
        &self.fill_left
    }

    pub fn fill_right(&self) -> &Symbol {
        &self.fill_right
    }

    /// Symbol at a cell index; index 0 is right of the dot, -1 left of it.
    pub fn at(&self, index: i64) -> &Symbol {
        if index >= 0 {
            self.right.get(index as usize).unwrap_or(&self.fill_right)
        } else {
            self.left.get((-index - 1) as usize).unwrap_or(&self.fill_left)
        }
    }

    /// Left side padded with fill to at least `n` symbols.
    pub fn left_padded(&self, n: usize) -> Vec<Symbol> {
        pad(&self.left, n, &self.fill_left)
    }

    pub fn right_padded(&self, n: usize) -> Vec<Symbol> {
        pad(&self.right, n, &self.fill_right)
    }
}

fn pad(w: &[Symbol], n: usize, fill: &Symbol) -> Vec<Symbol> {
    let mut out = w.to_vec();
    while out.len() < n {
        out.push(fill.clone());
    }
    out
}

impl fmt::Display for DottedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let natural: Vec<Symbol> = self.left.iter().rev().cloned().collect();
        write_dotted(f, &natural, &self.right)
    }
}

impl fmt::Debug for DottedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DottedSequence({self})")
    }
}

/// Domain of dependence: the open cell interval `(k_l, k_r)` around the dot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dod {
    k_l: i64,
    k_r: i64,
}

impl Dod {
    pub fn new(k_l: i64, k_r: i64) -> Result<Self, SymbolicError> {
        if k_l > -1 || k_r < 0 || (k_l == -1 && k_r == 0) {
            return Err(SymbolicError::InvalidDod { k_l, k_r });
        }
        Ok(Dod { k_l, k_r })
    }

    pub fn k_l(&self) -> i64 {
        self.k_l
    }

    pub fn k_r(&self) -> i64 {
        self.k_r
    }

    /// Number of cells left of the dot.
    pub fn left_len(&self) -> usize {
        (-self.k_l - 1) as usize
    }

    /// Number of cells right of the dot.
    pub fn right_len(&self) -> usize {
        self.k_r as usize
    }
}

/// Moves the dot `f` places to the left (negative `f` moves it right).
pub fn shift_dot(s: &DottedSequence, f: i64) -> DottedSequence {
    let mut left = s.left.clone();
    let mut right = s.right.clone();
    if f > 0 {
        for _ in 0..f {
            let sym = if left.is_empty() {
                s.fill_left.clone()
            } else {
                left.remove(0)
            };
            right.insert(0, sym);
        }
    } else {
        for _ in 0..(-f) {
            let sym = if right.is_empty() {
                s.fill_right.clone()
            } else {
                right.remove(0)
            };
            left.insert(0, sym);
        }
    }
    DottedSequence::new(left, right, s.fill_left.clone(), s.fill_right.clone())
}

/// Reads the dotted word occupying the domain of dependence.
pub fn read_dod(s: &DottedSequence, dod: Dod) -> DottedWord {
    DottedWord {
        left: (0..dod.left_len()).map(|k| s.at(-(k as i64) - 1).clone()).collect(),
        right: (0..dod.right_len()).map(|k| s.at(k as i64).clone()).collect(),
    }
}

/// Replaces the domain-of-dependence content of `s` with `replacement`.
pub fn substitute(s: &DottedSequence, dod: Dod, replacement: &DottedWord) -> DottedSequence {
    let left_rest: Vec<Symbol> = s.left.iter().skip(dod.left_len()).cloned().collect();
    let right_rest: Vec<Symbol> = s.right.iter().skip(dod.right_len()).cloned().collect();
    let mut left = replacement.left.clone();
    left.extend(left_rest);
    let mut right = replacement.right.clone();
    right.extend(right_rest);
    DottedSequence::new(left, right, s.fill_left.clone(), s.fill_right.clone())
}

/// Replacement word plus the dot shift applied after substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub replacement: DottedWord,
    pub shift: i64,
}

impl Rule {
    pub fn new(replacement: DottedWord, shift: i64) -> Self {
        Rule { replacement, shift }
    }

    /// The known word around the dot once substitution and shift are done.
    ///
    /// Only meaningful for rules that pass the shift-validity check.
    pub fn settled(&self) -> DottedWord {
        let mut left = self.replacement.left.clone();
        let mut right = self.replacement.right.clone();
        if self.shift > 0 {
            let moved: Vec<Symbol> = left.drain(..self.shift as usize).collect();
            let mut r: Vec<Symbol> = moved.into_iter().rev().collect();
            r.extend(right);
            right = r;
        } else if self.shift < 0 {
            let moved: Vec<Symbol> = right.drain(..(-self.shift) as usize).collect();
            let mut l: Vec<Symbol> = moved.into_iter().rev().collect();
            l.extend(left);
            left = l;
        }
        DottedWord { left, right }
    }

    fn check_shift(&self, key: &DottedWord) -> Result<(), SymbolicError> {
        let available = if self.shift >= 0 {
            self.replacement.left.len()
        } else {
            self.replacement.right.len()
        };
        if self.shift.unsigned_abs() as usize > available {
            return Err(SymbolicError::InvalidShift {
                key: key.clone(),
                shift: self.shift,
                available,
            });
        }
        Ok(())
    }
}

/// A versatile shift: a domain of dependence plus a finite rewrite table.
///
/// `left_domain[k]` lists the symbols that may occupy cell `-(k+1)` and
/// `right_domain[k]` those for cell `k`; they default to the whole alphabet
/// and determine the cells of the derived partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersatileShift {
    alphabet: Alphabet,
    dod: Dod,
    rules: BTreeMap<DottedWord, Rule>,
    left_domain: Vec<Vec<Symbol>>,
    right_domain: Vec<Vec<Symbol>>,
}

impl VersatileShift {
    pub fn new(alphabet: Alphabet, dod: Dod, rules: BTreeMap<DottedWord, Rule>) -> Result<Self, SymbolicError> {
        let left_domain = vec![alphabet.symbols().to_vec(); dod.left_len()];
        let right_domain = vec![alphabet.symbols().to_vec(); dod.right_len()];
        Self::with_domains(alphabet, dod, rules, left_domain, right_domain)
    }

    pub fn with_domains(
        alphabet: Alphabet,
        dod: Dod,
        rules: BTreeMap<DottedWord, Rule>,
        left_domain: Vec<Vec<Symbol>>,
        right_domain: Vec<Vec<Symbol>>,
    ) -> Result<Self, SymbolicError> {
        let known = |s: &Symbol| -> Result<(), SymbolicError> {
            if alphabet.contains(s) {
                Ok(())
            } else {
                Err(SymbolicError::UnknownSymbol(s.clone()))
            }
        };
        for (key, rule) in &rules {
            if key.left.len() != dod.left_len() || key.right.len() != dod.right_len() {
                return Err(SymbolicError::KeyShape { key: key.clone() });
            }
            for s in key
                .left
                .iter()
                .chain(&key.right)
                .chain(&rule.replacement.left)
                .chain(&rule.replacement.right)
            {
                known(s)?;
            }
            rule.check_shift(key)?;
        }
        if left_domain.len() != dod.left_len() || right_domain.len() != dod.right_len() {
            return Err(SymbolicError::InvalidDod {
                k_l: dod.k_l(),
                k_r: dod.k_r(),
            });
        }
        for s in left_domain.iter().chain(&right_domain).flatten() {
            known(s)?;
        }
        Ok(VersatileShift {
            alphabet,
            dod,
            rules,
            left_domain,
            right_domain,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dod(&self) -> Dod {
        self.dod
    }

    pub fn rules(&self) -> &BTreeMap<DottedWord, Rule> {
        &self.rules
    }

    pub fn rule(&self, key: &DottedWord) -> Option<&Rule> {
        self.rules.get(key)
    }

    pub fn left_domain(&self) -> &[Vec<Symbol>] {
        &self.left_domain
    }

    pub fn right_domain(&self) -> &[Vec<Symbol>] {
        &self.right_domain
    }

    /// Adds an identity rule for every domain word that has no rule yet.
    pub fn completed_with_identity(mut self) -> Self {
        for key in domain_words(&self.left_domain).into_iter().flat_map(|l| {
            domain_words(&self.right_domain)
                .into_iter()
                .map(move |r| DottedWord::new(l.clone(), r))
        }) {
            self.rules.entry(key.clone()).or_insert_with(|| Rule::new(key, 0));
        }
        self
    }
}

/// All words obtained by picking one symbol per slot, in slot order.
pub fn domain_words(slots: &[Vec<Symbol>]) -> Vec<Vec<Symbol>> {
    let mut out: Vec<Vec<Symbol>> = vec![Vec::new()];
    for slot in slots {
        let mut next = Vec::with_capacity(out.len() * slot.len());
        for prefix in &out {
            for s in slot {
                let mut w = prefix.clone();
                w.push(s.clone());
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// One versatile-shift step: substitute the matched rule, then shift the dot.
pub fn apply_vs(vs: &VersatileShift, s: &DottedSequence) -> Result<DottedSequence, SymbolicError> {
    let key = read_dod(s, vs.dod);
    let rule = vs.rules.get(&key).ok_or_else(|| SymbolicError::NoRule(key.clone()))?;
    Ok(shift_dot(&substitute(s, vs.dod, &rule.replacement), rule.shift))
}
