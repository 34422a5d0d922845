//! Machine definitions, direct simulators, configuration layouts and
//! compilation to versatile shifts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::godel::{AxisEncoding, GammaMap, GodelError, RefinedGammaMap};
use crate::symbolic::{Alphabet, Dod, DottedSequence, DottedWord, Rule, Symbol, SymbolicError, VersatileShift};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("unknown state `{0}`")]
    UnknownState(Symbol),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(Symbol),
    #[error("duplicate symbol `{0}`")]
    Duplicate(Symbol),
    #[error("the blank symbol cannot be used as {0}")]
    BlankMisuse(&'static str),
    #[error("nondeterministic transitions for state `{state}` with top `{top}`")]
    NondeterministicMachine { state: Symbol, top: Symbol },
    #[error("halting state `{0}` has outgoing transitions")]
    HaltingStateHasTransition(Symbol),
    #[error("grammar is left-recursive through `{0}`")]
    LeftRecursiveGrammar(Symbol),
    #[error("grammar needs two rules for `{nonterminal}` on lookahead `{lookahead}`")]
    AmbiguousGrammar { nonterminal: Symbol, lookahead: Symbol },
    #[error("configuration does not match the layout: {0}")]
    MalformedConfiguration(String),
    #[error("configuration kind does not match the machine")]
    KindMismatch,
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Godel(#[from] GodelError),
}

/// Why a direct simulation step did not produce a successor.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("no transition for state `{state}` reading `{symbol}`")]
    UndefinedTransition { state: Symbol, symbol: Symbol },
    #[error("input exhausted")]
    EmptyInput,
    #[error("machine halted")]
    Halted,
    #[error("configuration kind does not match the machine")]
    KindMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Fsm,
    Pda,
    Tdr,
    Tm,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Fsm => "fsm",
            Kind::Pda => "pda",
            Kind::Tdr => "tdr",
            Kind::Tm => "tm",
        })
    }
}

fn distinct(symbols: &[Symbol]) -> Result<BTreeSet<Symbol>, AutomatonError> {
    let mut set = BTreeSet::new();
    for s in symbols {
        if !set.insert(s.clone()) {
            return Err(AutomatonError::Duplicate(s.clone()));
        }
    }
    Ok(set)
}

fn no_blank(symbols: &[Symbol], what: &'static str) -> Result<(), AutomatonError> {
    if symbols.iter().any(Symbol::is_blank) {
        Err(AutomatonError::BlankMisuse(what))
    } else {
        Ok(())
    }
}

fn strip_blanks(w: &mut Vec<Symbol>) {
    while w.last().is_some_and(Symbol::is_blank) {
        w.pop();
    }
}

fn with_blank(symbols: &[Symbol]) -> Vec<Symbol> {
    let mut out = vec![Symbol::blank()];
    out.extend(symbols.iter().filter(|s| !s.is_blank()).cloned());
    out
}

fn alphabet_of(groups: &[&[Symbol]]) -> Result<Alphabet, SymbolicError> {
    let mut seen = BTreeSet::new();
    let mut all = Vec::new();
    for s in std::iter::once(&Symbol::blank()).chain(groups.iter().flat_map(|g| g.iter())) {
        if seen.insert(s.clone()) {
            all.push(s.clone());
        }
    }
    Alphabet::new(all, Some(Symbol::blank()))
}

fn malformed(msg: impl Into<String>) -> AutomatonError {
    AutomatonError::MalformedConfiguration(msg.into())
}

// ---------------------------------------------------------------------------
// Finite-state machines

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fsm {
    states: Vec<Symbol>,
    inputs: Vec<Symbol>,
    start: Symbol,
    accepting: BTreeSet<Symbol>,
    delta: BTreeMap<(Symbol, Symbol), Symbol>,
    fill: Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FsmConfig {
    pub state: Symbol,
    pub input: Vec<Symbol>,
}

impl Fsm {
    pub fn new(
        states: Vec<Symbol>,
        inputs: Vec<Symbol>,
        start: Symbol,
        accepting: Vec<Symbol>,
        delta: BTreeMap<(Symbol, Symbol), Symbol>,
    ) -> Result<Self, AutomatonError> {
        let qs = distinct(&states)?;
        let ts = distinct(&inputs)?;
        no_blank(&states, "a state")?;
        no_blank(&inputs, "an input symbol")?;
        if let Some(s) = qs.intersection(&ts).next() {
            return Err(AutomatonError::Duplicate(s.clone()));
        }
        if !qs.contains(&start) {
            return Err(AutomatonError::UnknownState(start));
        }
        for q in &accepting {
            if !qs.contains(q) {
                return Err(AutomatonError::UnknownState(q.clone()));
            }
        }
        for ((q, d), q2) in &delta {
            for s in [q, q2] {
                if !qs.contains(s) {
                    return Err(AutomatonError::UnknownState(s.clone()));
                }
            }
            if !ts.contains(d) {
                return Err(AutomatonError::UnknownSymbol(d.clone()));
            }
        }
        Ok(Fsm {
            states,
            inputs,
            start,
            accepting: accepting.into_iter().collect(),
            delta,
            fill: Symbol::blank(),
        })
    }

    /// Uses an input symbol as the fill of exhausted input instead of the blank.
    pub fn with_fill(mut self, fill: Symbol) -> Result<Self, AutomatonError> {
        if !fill.is_blank() && !self.inputs.contains(&fill) {
            return Err(AutomatonError::UnknownSymbol(fill));
        }
        self.fill = fill;
        Ok(self)
    }

    pub fn states(&self) -> &[Symbol] {
        &self.states
    }

    pub fn inputs(&self) -> &[Symbol] {
        &self.inputs
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }

    pub fn accepting(&self) -> &BTreeSet<Symbol> {
        &self.accepting
    }

    pub fn delta(&self) -> &BTreeMap<(Symbol, Symbol), Symbol> {
        &self.delta
    }

    pub fn fill(&self) -> &Symbol {
        &self.fill
    }

    pub fn transition(&self, q: &Symbol, d: &Symbol) -> Option<&Symbol> {
        self.delta.get(&(q.clone(), d.clone()))
    }

    pub fn initial(&self, mut input: Vec<Symbol>) -> FsmConfig {
        while input.last() == Some(&self.fill) {
            input.pop();
        }
        FsmConfig {
            state: self.start.clone(),
            input,
        }
    }

    /// With a non-blank fill, exhausted input keeps reading the fill symbol.
    pub fn step(&self, c: &FsmConfig) -> Result<FsmConfig, StepError> {
        let (d, rest) = match c.input.split_first() {
            Some((d, rest)) => (d.clone(), rest.to_vec()),
            None if !self.fill.is_blank() => (self.fill.clone(), vec![]),
            None => return Err(StepError::EmptyInput),
        };
        let next = self
            .transition(&c.state, &d)
            .ok_or_else(|| StepError::UndefinedTransition {
                state: c.state.clone(),
                symbol: d.clone(),
            })?;
        let mut input = rest;
        while input.last() == Some(&self.fill) {
            input.pop();
        }
        Ok(FsmConfig {
            state: next.clone(),
            input,
        })
    }

    pub fn accepts(&self, input: &[Symbol]) -> bool {
        let mut state = self.start.clone();
        for d in input {
            match self.transition(&state, d) {
                Some(q) => state = q.clone(),
                None => return false,
            }
        }
        self.accepting.contains(&state)
    }

    /// Symbols that can sit right of the dot, fill first.
    fn right_symbols(&self) -> Vec<Symbol> {
        if self.fill.is_blank() {
            with_blank(&self.inputs)
        } else {
            let mut out = vec![self.fill.clone()];
            out.extend(self.inputs.iter().filter(|s| **s != self.fill).cloned());
            out
        }
    }

    pub fn default_encodings(&self) -> Result<(AxisEncoding, AxisEncoding), AutomatonError> {
        let x = RefinedGammaMap::new(
            GammaMap::new(self.states.clone())?,
            GammaMap::new(vec![Symbol::blank()])?,
        )?;
        Ok((
            AxisEncoding::Refined(x),
            AxisEncoding::Plain(GammaMap::new(self.right_symbols())?),
        ))
    }

    pub fn encode(&self, c: &FsmConfig) -> DottedSequence {
        DottedSequence::new(
            vec![c.state.clone()],
            c.input.clone(),
            Symbol::blank(),
            self.fill.clone(),
        )
    }

    pub fn decode(&self, s: &DottedSequence) -> Result<FsmConfig, AutomatonError> {
        match s.left() {
            [q] if self.states.contains(q) => {}
            _ => return Err(malformed(format!("expected a single state left of the dot in {s}"))),
        }
        for d in s.right() {
            if !self.inputs.contains(d) {
                return Err(malformed(format!("`{d}` is not an input symbol")));
            }
        }
        if s.fill_right() != &self.fill {
            return Err(malformed("input fill does not match the machine"));
        }
        Ok(FsmConfig {
            state: s.left()[0].clone(),
            input: s.right().to_vec(),
        })
    }

    /// One rule `q.d -> q'.` per transition, no dot shift.
    pub fn to_vs(&self) -> Result<VersatileShift, AutomatonError> {
        let alphabet = alphabet_of(&[&self.states, &self.inputs])?;
        let rules = self
            .delta
            .iter()
            .map(|((q, d), q2)| {
                (
                    DottedWord::new(vec![q.clone()], vec![d.clone()]),
                    Rule::new(DottedWord::new(vec![q2.clone()], vec![]), 0),
                )
            })
            .collect();
        Ok(VersatileShift::with_domains(
            alphabet,
            Dod::new(-2, 1)?,
            rules,
            vec![self.states.clone()],
            vec![self.right_symbols()],
        )?)
    }
}

// ---------------------------------------------------------------------------
// Push-down automata

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StackOp {
    Pop,
    Push(Symbol),
}

/// Transition key: state, input symbol (`None` for an ε-move) and top of stack.
/// The blank as top means an empty stack; the blank as input means exhausted input.
pub type PdaKey = (Symbol, Option<Symbol>, Symbol);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pda {
    states: Vec<Symbol>,
    stack_alphabet: Vec<Symbol>,
    inputs: Vec<Symbol>,
    start: Symbol,
    accepting: BTreeSet<Symbol>,
    delta: BTreeMap<PdaKey, (Symbol, StackOp)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PdaConfig {
    pub state: Symbol,
    /// Top of stack first.
    pub stack: Vec<Symbol>,
    pub input: Vec<Symbol>,
}

impl PdaConfig {
    pub fn new(state: Symbol, mut stack: Vec<Symbol>, input: Vec<Symbol>) -> Self {
        strip_blanks(&mut stack);
        PdaConfig { state, stack, input }
    }
}

impl Pda {
    pub fn new(
        states: Vec<Symbol>,
        stack_alphabet: Vec<Symbol>,
        inputs: Vec<Symbol>,
        start: Symbol,
        accepting: Vec<Symbol>,
        delta: BTreeMap<PdaKey, (Symbol, StackOp)>,
    ) -> Result<Self, AutomatonError> {
        let qs = distinct(&states)?;
        let ns = distinct(&stack_alphabet)?;
        let ts = distinct(&inputs)?;
        no_blank(&states, "a state")?;
        no_blank(&stack_alphabet, "a stack symbol")?;
        no_blank(&inputs, "an input symbol")?;
        if let Some(s) = qs.intersection(&ns).chain(qs.intersection(&ts)).next() {
            return Err(AutomatonError::Duplicate(s.clone()));
        }
        if !qs.contains(&start) {
            return Err(AutomatonError::UnknownState(start));
        }
        for q in &accepting {
            if !qs.contains(q) {
                return Err(AutomatonError::UnknownState(q.clone()));
            }
        }
        let stack_ok = |s: &Symbol| s.is_blank() || ns.contains(s);
        for ((q, k, top), (q2, op)) in &delta {
            for s in [q, q2] {
                if !qs.contains(s) {
                    return Err(AutomatonError::UnknownState(s.clone()));
                }
            }
            if let Some(k) = k {
                if !k.is_blank() && !ts.contains(k) {
                    return Err(AutomatonError::UnknownSymbol(k.clone()));
                }
            }
            if !stack_ok(top) {
                return Err(AutomatonError::UnknownSymbol(top.clone()));
            }
            if let StackOp::Push(x) = op {
                if !stack_ok(x) {
                    return Err(AutomatonError::UnknownSymbol(x.clone()));
                }
            }
            if k.is_some() && delta.contains_key(&(q.clone(), None, top.clone())) {
                return Err(AutomatonError::NondeterministicMachine {
                    state: q.clone(),
                    top: top.clone(),
                });
            }
        }
        Ok(Pda {
            states,
            stack_alphabet,
            inputs,
            start,
            accepting: accepting.into_iter().collect(),
            delta,
        })
    }

    pub fn states(&self) -> &[Symbol] {
        &self.states
    }

    pub fn stack_alphabet(&self) -> &[Symbol] {
        &self.stack_alphabet
    }

    pub fn inputs(&self) -> &[Symbol] {
        &self.inputs
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }

    pub fn accepting(&self) -> &BTreeSet<Symbol> {
        &self.accepting
    }

    pub fn delta(&self) -> &BTreeMap<PdaKey, (Symbol, StackOp)> {
        &self.delta
    }

    pub fn initial(&self, input: Vec<Symbol>) -> PdaConfig {
        PdaConfig::new(self.start.clone(), vec![], input)
    }

    /// Accepting once no move applies: by empty stack when there are no
    /// accepting states, otherwise by final state; input must be exhausted.
    pub fn is_accepting(&self, c: &PdaConfig) -> bool {
        c.input.is_empty()
            && if self.accepting.is_empty() {
                c.stack.is_empty()
            } else {
                self.accepting.contains(&c.state)
            }
    }

    pub fn step(&self, c: &PdaConfig) -> Result<PdaConfig, StepError> {
        let top = c.stack.first().cloned().unwrap_or_else(Symbol::blank);
        let k = c.input.first().cloned().unwrap_or_else(Symbol::blank);
        let (entry, consumes) = match self.delta.get(&(c.state.clone(), None, top.clone())) {
            Some(e) => (e, false),
            None => match self.delta.get(&(c.state.clone(), Some(k.clone()), top.clone())) {
                Some(e) => (e, true),
                None if self.is_accepting(c) => return Err(StepError::Halted),
                None => {
                    return Err(StepError::UndefinedTransition {
                        state: c.state.clone(),
                        symbol: k,
                    })
                }
            },
        };
        let (q2, op) = entry;
        let mut stack = c.stack.clone();
        match op {
            StackOp::Pop => {
                if !stack.is_empty() {
                    stack.remove(0);
                }
            }
            StackOp::Push(x) => stack.insert(0, x.clone()),
        }
        let input = if consumes && !c.input.is_empty() {
            c.input[1..].to_vec()
        } else {
            c.input.clone()
        };
        Ok(PdaConfig::new(q2.clone(), stack, input))
    }

    pub fn default_encodings(&self) -> Result<(AxisEncoding, AxisEncoding), AutomatonError> {
        let x = RefinedGammaMap::new(
            GammaMap::new(self.states.clone())?,
            GammaMap::new(with_blank(&self.stack_alphabet))?,
        )?;
        Ok((
            AxisEncoding::Refined(x),
            AxisEncoding::Plain(GammaMap::new(with_blank(&self.inputs))?),
        ))
    }

    pub fn encode(&self, c: &PdaConfig) -> DottedSequence {
        let mut left = vec![c.state.clone()];
        left.extend(c.stack.iter().cloned());
        DottedSequence::new(left, c.input.clone(), Symbol::blank(), Symbol::blank())
    }

    pub fn decode(&self, s: &DottedSequence) -> Result<PdaConfig, AutomatonError> {
        let (q, stack) = s.left().split_first().ok_or_else(|| malformed("missing state"))?;
        if !self.states.contains(q) {
            return Err(malformed(format!("`{q}` is not a state")));
        }
        for x in stack {
            if !x.is_blank() && !self.stack_alphabet.contains(x) {
                return Err(malformed(format!("`{x}` is not a stack symbol")));
            }
        }
        for d in s.right() {
            if !self.inputs.contains(d) {
                return Err(malformed(format!("`{d}` is not an input symbol")));
            }
        }
        Ok(PdaConfig::new(q.clone(), stack.to_vec(), s.right().to_vec()))
    }

    /// Pop: `s0 q . k -> q' .`; push: `s0 q . k -> s0 x q' .`. ε-moves are
    /// expanded over every symbol at index 0, which is re-emitted.
    pub fn to_vs(&self) -> Result<VersatileShift, AutomatonError> {
        let alphabet = alphabet_of(&[&self.states, &self.stack_alphabet, &self.inputs])?;
        let lookaheads = with_blank(&self.inputs);
        let mut rules = BTreeMap::new();
        for ((q, k, top), (q2, op)) in &self.delta {
            let left = match op {
                StackOp::Pop => vec![q2.clone()],
                StackOp::Push(x) => vec![q2.clone(), x.clone(), top.clone()],
            };
            let key_left = vec![q.clone(), top.clone()];
            match k {
                Some(k) => {
                    rules.insert(
                        DottedWord::new(key_left, vec![k.clone()]),
                        Rule::new(DottedWord::new(left, vec![]), 0),
                    );
                }
                None => {
                    for a in &lookaheads {
                        rules.insert(
                            DottedWord::new(key_left.clone(), vec![a.clone()]),
                            Rule::new(DottedWord::new(left.clone(), vec![a.clone()]), 0),
                        );
                    }
                }
            }
        }
        Ok(VersatileShift::with_domains(
            alphabet,
            Dod::new(-3, 1)?,
            rules,
            vec![self.states.clone(), with_blank(&self.stack_alphabet)],
            vec![lookaheads],
        )?)
    }
}

// ---------------------------------------------------------------------------
// Context-free grammars and top-down recognizers

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    nonterminals: Vec<Symbol>,
    terminals: Vec<Symbol>,
    rules: Vec<(Symbol, Vec<Symbol>)>,
    start: Symbol,
}

impl Cfg {
    pub fn new(
        nonterminals: Vec<Symbol>,
        terminals: Vec<Symbol>,
        rules: Vec<(Symbol, Vec<Symbol>)>,
        start: Symbol,
    ) -> Result<Self, AutomatonError> {
        let ns = distinct(&nonterminals)?;
        let ts = distinct(&terminals)?;
        no_blank(&nonterminals, "a nonterminal")?;
        no_blank(&terminals, "a terminal")?;
        if let Some(s) = ns.intersection(&ts).next() {
            return Err(AutomatonError::Duplicate(s.clone()));
        }
        if !ns.contains(&start) {
            return Err(AutomatonError::UnknownSymbol(start));
        }
        for (x, w) in &rules {
            if !ns.contains(x) {
                return Err(AutomatonError::UnknownSymbol(x.clone()));
            }
            for s in w {
                if !ns.contains(s) && !ts.contains(s) {
                    return Err(AutomatonError::UnknownSymbol(s.clone()));
                }
            }
        }
        let g = Cfg {
            nonterminals,
            terminals,
            rules,
            start,
        };
        g.check_left_recursion()?;
        Ok(g)
    }

    pub fn nonterminals(&self) -> &[Symbol] {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &[Symbol] {
        &self.terminals
    }

    pub fn rules(&self) -> &[(Symbol, Vec<Symbol>)] {
        &self.rules
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }

    pub fn is_nonterminal(&self, s: &Symbol) -> bool {
        self.nonterminals.contains(s)
    }

    fn nullable(&self) -> BTreeSet<Symbol> {
        let mut set = BTreeSet::new();
        loop {
            let before = set.len();
            for (x, w) in &self.rules {
                if w.iter().all(|s| set.contains(s)) {
                    set.insert(x.clone());
                }
            }
            if set.len() == before {
                return set;
            }
        }
    }

    fn check_left_recursion(&self) -> Result<(), AutomatonError> {
        let nullable = self.nullable();
        // Edge X -> Y when Y can appear leftmost in a derivation step from X.
        let mut edges: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
        for (x, w) in &self.rules {
            for s in w {
                if self.is_nonterminal(s) {
                    edges.entry(x.clone()).or_default().insert(s.clone());
                }
                if !nullable.contains(s) {
                    break;
                }
            }
        }
        for x in &self.nonterminals {
            let mut seen = BTreeSet::new();
            let mut todo: Vec<Symbol> = edges.get(x).into_iter().flatten().cloned().collect();
            while let Some(y) = todo.pop() {
                if &y == x {
                    return Err(AutomatonError::LeftRecursiveGrammar(x.clone()));
                }
                if seen.insert(y.clone()) {
                    todo.extend(edges.get(&y).into_iter().flatten().cloned());
                }
            }
        }
        Ok(())
    }

    fn first_sets(&self, nullable: &BTreeSet<Symbol>) -> BTreeMap<Symbol, BTreeSet<Symbol>> {
        let mut first: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
        loop {
            let mut changed = false;
            for (x, w) in &self.rules {
                let f = self.first_of(w, &first, nullable);
                let entry = first.entry(x.clone()).or_default();
                for a in f {
                    changed |= entry.insert(a);
                }
            }
            if !changed {
                return first;
            }
        }
    }

    fn first_of(
        &self,
        w: &[Symbol],
        first: &BTreeMap<Symbol, BTreeSet<Symbol>>,
        nullable: &BTreeSet<Symbol>,
    ) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for s in w {
            if self.is_nonterminal(s) {
                out.extend(first.get(s).into_iter().flatten().cloned());
                if !nullable.contains(s) {
                    break;
                }
            } else {
                out.insert(s.clone());
                break;
            }
        }
        out
    }

    fn follow_sets(
        &self,
        first: &BTreeMap<Symbol, BTreeSet<Symbol>>,
        nullable: &BTreeSet<Symbol>,
    ) -> BTreeMap<Symbol, BTreeSet<Symbol>> {
        let mut follow: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
        follow.entry(self.start.clone()).or_default().insert(Symbol::blank());
        loop {
            let mut changed = false;
            for (x, w) in &self.rules {
                for (i, s) in w.iter().enumerate() {
                    if !self.is_nonterminal(s) {
                        continue;
                    }
                    let rest = &w[i + 1..];
                    let mut add = self.first_of(rest, first, nullable);
                    if rest.iter().all(|r| nullable.contains(r)) {
                        add.extend(follow.get(x).into_iter().flatten().cloned());
                    }
                    let entry = follow.entry(s.clone()).or_default();
                    for a in add {
                        changed |= entry.insert(a);
                    }
                }
            }
            if !changed {
                return follow;
            }
        }
    }
}

/// Single-state recognizer derived from a grammar. A nonterminal with one
/// rule expands on every lookahead; several rules are told apart by lookahead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tdr {
    grammar: Cfg,
    table: BTreeMap<(Symbol, Symbol), usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TdrConfig {
    /// Top of stack first.
    pub stack: Vec<Symbol>,
    pub input: Vec<Symbol>,
}

impl TdrConfig {
    pub fn new(mut stack: Vec<Symbol>, input: Vec<Symbol>) -> Self {
        strip_blanks(&mut stack);
        TdrConfig { stack, input }
    }
}

/// Builds the recognizer, rejecting grammars that need more than one token
/// of lookahead to pick a rule.
pub fn tdr_from_cfg(g: Cfg) -> Result<Tdr, AutomatonError> {
    let nullable = g.nullable();
    let first = g.first_sets(&nullable);
    let follow = g.follow_sets(&first, &nullable);
    let lookaheads = with_blank(&g.terminals);
    let mut table = BTreeMap::new();
    for x in &g.nonterminals {
        let own: Vec<usize> = (0..g.rules.len()).filter(|&i| &g.rules[i].0 == x).collect();
        if own.len() == 1 {
            for a in &lookaheads {
                table.insert((x.clone(), a.clone()), own[0]);
            }
            continue;
        }
        for &i in &own {
            let w = &g.rules[i].1;
            let mut la = g.first_of(w, &first, &nullable);
            if w.iter().all(|s| nullable.contains(s)) {
                la.extend(follow.get(x).into_iter().flatten().cloned());
            }
            for a in la {
                if table.insert((x.clone(), a.clone()), i).is_some() {
                    return Err(AutomatonError::AmbiguousGrammar {
                        nonterminal: x.clone(),
                        lookahead: a,
                    });
                }
            }
        }
    }
    Ok(Tdr { grammar: g, table })
}

impl Tdr {
    pub fn grammar(&self) -> &Cfg {
        &self.grammar
    }

    pub fn initial(&self, input: Vec<Symbol>) -> TdrConfig {
        TdrConfig::new(vec![self.grammar.start.clone()], input)
    }

    pub fn expansion(&self, x: &Symbol, lookahead: &Symbol) -> Option<&[Symbol]> {
        self.table
            .get(&(x.clone(), lookahead.clone()))
            .map(|&i| self.grammar.rules[i].1.as_slice())
    }

    pub fn step(&self, c: &TdrConfig) -> Result<TdrConfig, StepError> {
        let a = c.input.first().cloned().unwrap_or_else(Symbol::blank);
        let Some(top) = c.stack.first() else {
            return if c.input.is_empty() {
                Err(StepError::Halted)
            } else {
                Err(StepError::UndefinedTransition {
                    state: Symbol::blank(),
                    symbol: a,
                })
            };
        };
        if self.grammar.is_nonterminal(top) {
            let w = self.expansion(top, &a).ok_or_else(|| StepError::UndefinedTransition {
                state: top.clone(),
                symbol: a.clone(),
            })?;
            let mut stack = w.to_vec();
            stack.extend(c.stack[1..].iter().cloned());
            Ok(TdrConfig::new(stack, c.input.clone()))
        } else if !top.is_blank() && *top == a {
            Ok(TdrConfig::new(c.stack[1..].to_vec(), c.input[1..].to_vec()))
        } else {
            Err(StepError::UndefinedTransition {
                state: top.clone(),
                symbol: a,
            })
        }
    }

    pub fn accepts(&self, input: &[Symbol], max_steps: usize) -> bool {
        let mut c = self.initial(input.to_vec());
        for _ in 0..max_steps {
            match self.step(&c) {
                Ok(n) => c = n,
                Err(StepError::Halted) => return true,
                Err(_) => return false,
            }
        }
        false
    }

    fn stack_symbols(&self) -> Vec<Symbol> {
        let mut v = with_blank(&self.grammar.terminals);
        v.extend(self.grammar.nonterminals.iter().cloned());
        v
    }

    pub fn default_encodings(&self) -> Result<(AxisEncoding, AxisEncoding), AutomatonError> {
        Ok((
            AxisEncoding::Plain(GammaMap::new(self.stack_symbols())?),
            AxisEncoding::Plain(GammaMap::new(with_blank(&self.grammar.terminals))?),
        ))
    }

    pub fn encode(&self, c: &TdrConfig) -> DottedSequence {
        DottedSequence::new(c.stack.clone(), c.input.clone(), Symbol::blank(), Symbol::blank())
    }

    pub fn decode(&self, s: &DottedSequence) -> Result<TdrConfig, AutomatonError> {
        let g = &self.grammar;
        for x in s.left() {
            if !x.is_blank() && !g.is_nonterminal(x) && !g.terminals.contains(x) {
                return Err(malformed(format!("`{x}` is not a grammar symbol")));
            }
        }
        for d in s.right() {
            if !g.terminals.contains(d) {
                return Err(malformed(format!("`{d}` is not a terminal")));
            }
        }
        Ok(TdrConfig::new(s.left().to_vec(), s.right().to_vec()))
    }

    /// Match rules `a.a -> .` and expansions `X.a -> w.a` (lookahead kept).
    pub fn to_vs(&self) -> Result<VersatileShift, AutomatonError> {
        let g = &self.grammar;
        let alphabet = alphabet_of(&[&g.terminals, &g.nonterminals])?;
        let mut rules = BTreeMap::new();
        for a in &g.terminals {
            rules.insert(
                DottedWord::new(vec![a.clone()], vec![a.clone()]),
                Rule::new(DottedWord::new(vec![], vec![]), 0),
            );
        }
        for ((x, a), &i) in &self.table {
            rules.insert(
                DottedWord::new(vec![x.clone()], vec![a.clone()]),
                Rule::new(DottedWord::new(g.rules[i].1.clone(), vec![a.clone()]), 0),
            );
        }
        Ok(VersatileShift::with_domains(
            alphabet,
            Dod::new(-2, 1)?,
            rules,
            vec![self.stack_symbols()],
            vec![with_blank(&g.terminals)],
        )?)
    }
}

// ---------------------------------------------------------------------------
// Turing machines

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    L,
    R,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tm {
    states: Vec<Symbol>,
    tape: Vec<Symbol>,
    inputs: Vec<Symbol>,
    start: Symbol,
    halting: BTreeSet<Symbol>,
    delta: BTreeMap<(Symbol, Symbol), (Symbol, Symbol, Move)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TmConfig {
    pub state: Symbol,
    /// Cells left of the head, nearest first.
    pub left: Vec<Symbol>,
    /// The head cell followed by the cells to its right.
    pub right: Vec<Symbol>,
}

impl TmConfig {
    pub fn new(state: Symbol, mut left: Vec<Symbol>, mut right: Vec<Symbol>) -> Self {
        strip_blanks(&mut left);
        strip_blanks(&mut right);
        TmConfig { state, left, right }
    }
}

impl Tm {
    /// `tape` must contain the blank; `inputs` must not.
    pub fn new(
        states: Vec<Symbol>,
        tape: Vec<Symbol>,
        inputs: Vec<Symbol>,
        start: Symbol,
        halting: Vec<Symbol>,
        delta: BTreeMap<(Symbol, Symbol), (Symbol, Symbol, Move)>,
    ) -> Result<Self, AutomatonError> {
        let qs = distinct(&states)?;
        let ns = distinct(&tape)?;
        distinct(&inputs)?;
        no_blank(&states, "a state")?;
        no_blank(&inputs, "an input symbol")?;
        if !ns.contains(&Symbol::blank()) {
            return Err(AutomatonError::UnknownSymbol(Symbol::blank()));
        }
        if let Some(s) = qs.intersection(&ns).next() {
            return Err(AutomatonError::Duplicate(s.clone()));
        }
        for t in &inputs {
            if !ns.contains(t) {
                return Err(AutomatonError::UnknownSymbol(t.clone()));
            }
        }
        if !qs.contains(&start) {
            return Err(AutomatonError::UnknownState(start));
        }
        for q in &halting {
            if !qs.contains(q) {
                return Err(AutomatonError::UnknownState(q.clone()));
            }
        }
        for ((q, d), (q2, d2, _)) in &delta {
            for s in [q, q2] {
                if !qs.contains(s) {
                    return Err(AutomatonError::UnknownState(s.clone()));
                }
            }
            for s in [d, d2] {
                if !ns.contains(s) {
                    return Err(AutomatonError::UnknownSymbol(s.clone()));
                }
            }
            if halting.contains(q) {
                return Err(AutomatonError::HaltingStateHasTransition(q.clone()));
            }
        }
        Ok(Tm {
            states,
            tape,
            inputs,
            start,
            halting: halting.into_iter().collect(),
            delta,
        })
    }

    pub fn states(&self) -> &[Symbol] {
        &self.states
    }

    pub fn tape_alphabet(&self) -> &[Symbol] {
        &self.tape
    }

    pub fn inputs(&self) -> &[Symbol] {
        &self.inputs
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }

    pub fn halting(&self) -> &BTreeSet<Symbol> {
        &self.halting
    }

    pub fn delta(&self) -> &BTreeMap<(Symbol, Symbol), (Symbol, Symbol, Move)> {
        &self.delta
    }

    pub fn initial(&self, input: Vec<Symbol>) -> TmConfig {
        TmConfig::new(self.start.clone(), vec![], input)
    }

    pub fn step(&self, c: &TmConfig) -> Result<TmConfig, StepError> {
        if self.halting.contains(&c.state) {
            return Err(StepError::Halted);
        }
        let d0 = c.right.first().cloned().unwrap_or_else(Symbol::blank);
        let (q2, d2, m) =
            self.delta
                .get(&(c.state.clone(), d0.clone()))
                .ok_or_else(|| StepError::UndefinedTransition {
                    state: c.state.clone(),
                    symbol: d0,
                })?;
        let mut left = c.left.clone();
        let mut right = c.right.clone();
        if right.is_empty() {
            right.push(Symbol::blank());
        }
        right[0] = d2.clone();
        match m {
            Move::R => {
                let moved = right.remove(0);
                left.insert(0, moved);
            }
            Move::L => {
                let moved = if left.is_empty() {
                    Symbol::blank()
                } else {
                    left.remove(0)
                };
                right.insert(0, moved);
            }
        }
        Ok(TmConfig::new(q2.clone(), left, right))
    }

    fn tape_order(&self) -> Vec<Symbol> {
        with_blank(&self.tape)
    }

    pub fn default_encodings(&self) -> Result<(AxisEncoding, AxisEncoding), AutomatonError> {
        let tape = GammaMap::new(self.tape_order())?;
        Ok((
            AxisEncoding::Refined(RefinedGammaMap::new(GammaMap::new(self.states.clone())?, tape.clone())?),
            AxisEncoding::Plain(tape),
        ))
    }

    pub fn encode(&self, c: &TmConfig) -> DottedSequence {
        let mut left = vec![c.state.clone()];
        left.extend(c.left.iter().cloned());
        DottedSequence::new(left, c.right.clone(), Symbol::blank(), Symbol::blank())
    }

    pub fn decode(&self, s: &DottedSequence) -> Result<TmConfig, AutomatonError> {
        let (q, left) = s.left().split_first().ok_or_else(|| malformed("missing state"))?;
        if !self.states.contains(q) {
            return Err(malformed(format!("`{q}` is not a state")));
        }
        for d in left.iter().chain(s.right()) {
            if !self.tape.contains(d) {
                return Err(malformed(format!("`{d}` is not a tape symbol")));
            }
        }
        Ok(TmConfig::new(q.clone(), left.to_vec(), s.right().to_vec()))
    }

    /// Moore-style rules over every left neighbour. With `identity_halts`
    /// each halting state gets identity rules so halting becomes a fixed point.
    pub fn to_vs(&self, identity_halts: bool) -> Result<VersatileShift, AutomatonError> {
        let alphabet = alphabet_of(&[&self.states, &self.tape])?;
        let mut rules = BTreeMap::new();
        let tape = self.tape_order();
        for ((q, d0), (q2, d2, m)) in &self.delta {
            for dl in &tape {
                let key = DottedWord::new(vec![q.clone(), dl.clone()], vec![d0.clone()]);
                let rule = match m {
                    Move::R => Rule::new(DottedWord::new(vec![d2.clone(), dl.clone()], vec![q2.clone()]), -1),
                    Move::L => Rule::new(DottedWord::new(vec![dl.clone(), q2.clone()], vec![d2.clone()]), 1),
                };
                rules.insert(key, rule);
            }
        }
        if identity_halts {
            for q in &self.halting {
                for dl in &tape {
                    for d0 in &tape {
                        let key = DottedWord::new(vec![q.clone(), dl.clone()], vec![d0.clone()]);
                        rules.insert(key.clone(), Rule::new(key, 0));
                    }
                }
            }
        }
        Ok(VersatileShift::with_domains(
            alphabet,
            Dod::new(-3, 1)?,
            rules,
            vec![self.states.clone(), tape.clone()],
            vec![tape],
        )?)
    }
}

// ---------------------------------------------------------------------------
// Uniform access

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Machine {
    Fsm(Fsm),
    Pda(Pda),
    Tdr(Tdr),
    Tm(Tm),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MachineConfiguration {
    Fsm(FsmConfig),
    Pda(PdaConfig),
    Tdr(TdrConfig),
    Tm(TmConfig),
}

impl MachineConfiguration {
    pub fn kind(&self) -> Kind {
        match self {
            MachineConfiguration::Fsm(_) => Kind::Fsm,
            MachineConfiguration::Pda(_) => Kind::Pda,
            MachineConfiguration::Tdr(_) => Kind::Tdr,
            MachineConfiguration::Tm(_) => Kind::Tm,
        }
    }
}

impl Machine {
    pub fn kind(&self) -> Kind {
        match self {
            Machine::Fsm(_) => Kind::Fsm,
            Machine::Pda(_) => Kind::Pda,
            Machine::Tdr(_) => Kind::Tdr,
            Machine::Tm(_) => Kind::Tm,
        }
    }

    pub fn initial(&self, input: Vec<Symbol>) -> MachineConfiguration {
        match self {
            Machine::Fsm(m) => MachineConfiguration::Fsm(m.initial(input)),
            Machine::Pda(m) => MachineConfiguration::Pda(m.initial(input)),
            Machine::Tdr(m) => MachineConfiguration::Tdr(m.initial(input)),
            Machine::Tm(m) => MachineConfiguration::Tm(m.initial(input)),
        }
    }

    pub fn step(&self, c: &MachineConfiguration) -> Result<MachineConfiguration, StepError> {
        match (self, c) {
            (Machine::Fsm(m), MachineConfiguration::Fsm(c)) => m.step(c).map(MachineConfiguration::Fsm),
            (Machine::Pda(m), MachineConfiguration::Pda(c)) => m.step(c).map(MachineConfiguration::Pda),
            (Machine::Tdr(m), MachineConfiguration::Tdr(c)) => m.step(c).map(MachineConfiguration::Tdr),
            (Machine::Tm(m), MachineConfiguration::Tm(c)) => m.step(c).map(MachineConfiguration::Tm),
            _ => Err(StepError::KindMismatch),
        }
    }

    /// Compiles to a versatile shift; halting TM states become identity
    /// rules when `identity_halts` is set.
    pub fn to_vs(&self, identity_halts: bool) -> Result<VersatileShift, AutomatonError> {
        match self {
            Machine::Fsm(m) => m.to_vs(),
            Machine::Pda(m) => m.to_vs(),
            Machine::Tdr(m) => m.to_vs(),
            Machine::Tm(m) => m.to_vs(identity_halts),
        }
    }

    pub fn default_encodings(&self) -> Result<(AxisEncoding, AxisEncoding), AutomatonError> {
        match self {
            Machine::Fsm(m) => m.default_encodings(),
            Machine::Pda(m) => m.default_encodings(),
            Machine::Tdr(m) => m.default_encodings(),
            Machine::Tm(m) => m.default_encodings(),
        }
    }

    pub fn encode(&self, c: &MachineConfiguration) -> Result<DottedSequence, AutomatonError> {
        encode_configuration(self, c)
    }

    pub fn decode(&self, s: &DottedSequence) -> Result<MachineConfiguration, AutomatonError> {
        decode_configuration(self, s)
    }
}

pub fn encode_configuration(m: &Machine, c: &MachineConfiguration) -> Result<DottedSequence, AutomatonError> {
    match (m, c) {
        (Machine::Fsm(m), MachineConfiguration::Fsm(c)) => Ok(m.encode(c)),
        (Machine::Pda(m), MachineConfiguration::Pda(c)) => Ok(m.encode(c)),
        (Machine::Tdr(m), MachineConfiguration::Tdr(c)) => Ok(m.encode(c)),
        (Machine::Tm(m), MachineConfiguration::Tm(c)) => Ok(m.encode(c)),
        _ => Err(AutomatonError::KindMismatch),
    }
}

pub fn decode_configuration(m: &Machine, s: &DottedSequence) -> Result<MachineConfiguration, AutomatonError> {
    Ok(match m {
        Machine::Fsm(m) => MachineConfiguration::Fsm(m.decode(s)?),
        Machine::Pda(m) => MachineConfiguration::Pda(m.decode(s)?),
        Machine::Tdr(m) => MachineConfiguration::Tdr(m.decode(s)?),
        Machine::Tm(m) => MachineConfiguration::Tm(m.decode(s)?),
    })
}

pub fn step_fsm(m: &Fsm, c: &FsmConfig) -> Result<FsmConfig, StepError> {
    m.step(c)
}

pub fn step_pda(m: &Pda, c: &PdaConfig) -> Result<PdaConfig, StepError> {
    m.step(c)
}

pub fn step_tdr(m: &Tdr, c: &TdrConfig) -> Result<TdrConfig, StepError> {
    m.step(c)
}

pub fn step_tm(m: &Tm, c: &TmConfig) -> Result<TmConfig, StepError> {
    m.step(c)
}

pub fn fsm_to_vs(m: &Fsm) -> Result<VersatileShift, AutomatonError> {
    m.to_vs()
}

pub fn pda_to_vs(m: &Pda) -> Result<VersatileShift, AutomatonError> {
    m.to_vs()
}

pub fn tdr_to_vs(m: &Tdr) -> Result<VersatileShift, AutomatonError> {
    m.to_vs()
}

pub fn tm_to_vs(m: &Tm) -> Result<VersatileShift, AutomatonError> {
    m.to_vs(false)
}

// ---------------------------------------------------------------------------
// Bundled machines

/// The four-state gait generator: `<lo>` walks 1,3,2,4 and `<hi>` gallops 1,2,3,4.
pub fn cpg_fsm() -> Fsm {
    let s = Symbol::new;
    let mut delta = BTreeMap::new();
    for (q, lo, hi) in [
        ("q1", "q3", "q2"),
        ("q2", "q4", "q3"),
        ("q3", "q2", "q4"),
        ("q4", "q1", "q1"),
    ] {
        delta.insert((s(q), s("<lo>")), s(lo));
        delta.insert((s(q), s("<hi>")), s(hi));
    }
    Fsm::new(
        vec![s("q1"), s("q2"), s("q3"), s("q4")],
        vec![s("<lo>"), s("<hi>")],
        s("q1"),
        vec![],
        delta,
    )
    .and_then(|m| m.with_fill(s("<lo>")))
    .expect("gait generator is well formed")
}

/// The two-rule machine of the worked tape trace:
/// `(q0, o) -> (q1, a, R)` and `(q1, r) -> (q1, n, L)`.
pub fn word_tm() -> Tm {
    let s = Symbol::new;
    let mut delta = BTreeMap::new();
    delta.insert((s("q0"), s("o")), (s("q1"), s("a"), Move::R));
    delta.insert((s("q1"), s("r")), (s("q1"), s("n"), Move::L));
    let tape: Vec<Symbol> = ["_", "a", "d", "n", "o", "r", "w"].into_iter().map(s).collect();
    Tm::new(
        vec![s("q0"), s("q1")],
        tape,
        ["a", "d", "n", "o", "r", "w"].into_iter().map(s).collect(),
        s("q0"),
        vec![],
        delta,
    )
    .expect("worked machine is well formed")
}

/// Balanced round and square brackets.
pub fn bracket_grammar() -> Cfg {
    let s = Symbol::new;
    Cfg::new(
        vec![s("S")],
        vec![s("("), s(")"), s("["), s("]")],
        vec![
            (s("S"), vec![s("("), s("S"), s(")")]),
            (s("S"), vec![s("["), s("S"), s("]")]),
            (s("S"), vec![]),
        ],
        s("S"),
    )
    .expect("bracket grammar is well formed")
}
