//! Turning spec documents into machines, shifts and networks, and back.

use std::collections::BTreeMap;

use shiftnet::automata::{tdr_from_cfg, AutomatonError, Cfg, Fsm, Machine, Move, Pda, StackOp, Tm};
use shiftnet::godel::{AxisEncoding, GammaMap, GodelError, RefinedGammaMap};
use shiftnet::interactive::{build_ian, ComponentSpec, IanError, InteractiveNetwork, StageSpec, Tape};
use shiftnet::nda::{Nda, NdaError};
use shiftnet::rann::Network;
use shiftnet::symbolic::{Alphabet, Dod, DottedWord, Rule, Symbol, SymbolicError, VersatileShift};
use thiserror::Error;

use crate::document::{Document, Entry};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error("unknown spec type `{0}`")]
    UnknownType(String),
    #[error("field `{key}`: cannot read `{value}`")]
    Malformed { key: String, value: String },
    #[error("component `{0}` has no `begin` block")]
    MissingBlock(String),
    #[error("nested spec of component `{0}` is interactive")]
    NestedInteractive(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Godel(#[from] GodelError),
    #[error(transparent)]
    Nda(#[from] NdaError),
    #[error(transparent)]
    Interactive(#[from] IanError),
}

fn malformed(key: &str, value: &str) -> SpecError {
    SpecError::Malformed {
        key: key.to_string(),
        value: value.to_string(),
    }
}

fn symbols(value: &str) -> Vec<Symbol> {
    value.split_whitespace().map(Symbol::new).collect()
}

fn join(s: &[Symbol]) -> String {
    s.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
}

fn required<'a>(doc: &'a Document, key: &'static str) -> Result<&'a str, SpecError> {
    doc.get(key).ok_or(SpecError::Missing(key))
}

fn one_symbol(doc: &Document, key: &'static str) -> Result<Symbol, SpecError> {
    let v = required(doc, key)?;
    match symbols(v).as_slice() {
        [s] => Ok(s.clone()),
        _ => Err(malformed(key, v)),
    }
}

/// `input_alphabet`, or `alphabet` as a shorter alias.
fn input_alphabet(doc: &Document) -> Result<Vec<Symbol>, SpecError> {
    doc.get("input_alphabet")
        .or_else(|| doc.get("alphabet"))
        .map(symbols)
        .ok_or(SpecError::Missing("input_alphabet"))
}

fn optional_list(doc: &Document, key: &str) -> Vec<Symbol> {
    doc.get(key).map(symbols).unwrap_or_default()
}

/// `_=0 a=1 b=2`
pub fn parse_gamma(value: &str) -> Result<GammaMap, SpecError> {
    let mut pairs = Vec::new();
    for tok in value.split_whitespace() {
        let (s, i) = tok.rsplit_once('=').ok_or_else(|| malformed("gamma", value))?;
        let i: usize = i.parse().map_err(|_| malformed("gamma", value))?;
        pairs.push((Symbol::new(s), i));
    }
    Ok(GammaMap::from_pairs(&pairs)?)
}

pub fn render_gamma(g: &GammaMap) -> String {
    g.symbols()
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{s}={i}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `plain _=0 a=1` or `refined q0=0 q1=1 / _=0 a=1`
pub fn parse_tape_encoding(value: &str) -> Result<AxisEncoding, SpecError> {
    let (kind, rest) = value
        .trim()
        .split_once(char::is_whitespace)
        .ok_or_else(|| malformed("tape", value))?;
    match kind {
        "plain" => Ok(AxisEncoding::Plain(parse_gamma(rest)?)),
        "refined" => {
            let (states, tape) = rest.split_once('/').ok_or_else(|| malformed("tape", value))?;
            Ok(AxisEncoding::Refined(RefinedGammaMap::new(
                parse_gamma(states)?,
                parse_gamma(tape)?,
            )?))
        }
        _ => Err(malformed("tape", value)),
    }
}

pub fn render_tape_encoding(e: &AxisEncoding) -> String {
    match e {
        AxisEncoding::Plain(g) => format!("plain {}", render_gamma(g)),
        AxisEncoding::Refined(r) => format!("refined {} / {}", render_gamma(r.states()), render_gamma(r.tape())),
    }
}

fn axis_override(doc: &Document, axis: &str) -> Result<Option<AxisEncoding>, SpecError> {
    let Some(tape) = doc.get(&format!("gamma_{axis}")) else {
        return Ok(None);
    };
    let tape = parse_gamma(tape)?;
    Ok(Some(match doc.get(&format!("gamma_{axis}_states")) {
        Some(states) => AxisEncoding::Refined(RefinedGammaMap::new(parse_gamma(states)?, tape)?),
        None => AxisEncoding::Plain(tape),
    }))
}

fn write_axis(doc: &mut Document, axis: &str, e: &AxisEncoding) {
    match e {
        AxisEncoding::Plain(g) => {
            doc.field(&format!("gamma_{axis}"), render_gamma(g));
        }
        AxisEncoding::Refined(r) => {
            doc.field(&format!("gamma_{axis}_states"), render_gamma(r.states()));
            doc.field(&format!("gamma_{axis}"), render_gamma(r.tape()));
        }
    }
}

fn parse_machine(doc: &Document, kind: &str) -> Result<Machine, SpecError> {
    match kind {
        "fsm" => {
            let mut delta = BTreeMap::new();
            for t in doc.all("transition") {
                let (lhs, rhs) = t.split_once("->").ok_or_else(|| malformed("transition", t))?;
                match (symbols(lhs).as_slice(), symbols(rhs).as_slice()) {
                    ([q, d], [q2]) => {
                        delta.insert((q.clone(), d.clone()), q2.clone());
                    }
                    _ => return Err(malformed("transition", t)),
                }
            }
            let mut m = Fsm::new(
                symbols(required(doc, "states")?),
                input_alphabet(doc)?,
                one_symbol(doc, "start")?,
                optional_list(doc, "accept"),
                delta,
            )?;
            if doc.get("fill").is_some() {
                m = m.with_fill(one_symbol(doc, "fill")?)?;
            }
            Ok(Machine::Fsm(m))
        }
        "pda" => {
            let mut delta = BTreeMap::new();
            for t in doc.all("transition") {
                let (lhs, rhs) = t.split_once("->").ok_or_else(|| malformed("transition", t))?;
                let (q, a, top) = match symbols(lhs).as_slice() {
                    [q, a, top] => (q.clone(), a.clone(), top.clone()),
                    _ => return Err(malformed("transition", t)),
                };
                let a = if a.as_str() == "-" { None } else { Some(a) };
                let (q2, op) = match symbols(rhs).as_slice() {
                    [q2, op] if op.as_str() == "pop" => (q2.clone(), StackOp::Pop),
                    [q2, op, x] if op.as_str() == "push" => (q2.clone(), StackOp::Push(x.clone())),
                    _ => return Err(malformed("transition", t)),
                };
                delta.insert((q, a, top), (q2, op));
            }
            Ok(Machine::Pda(Pda::new(
                symbols(required(doc, "states")?),
                symbols(required(doc, "stack_alphabet")?),
                input_alphabet(doc)?,
                one_symbol(doc, "start")?,
                optional_list(doc, "accept"),
                delta,
            )?))
        }
        "cfg" => {
            let mut rules = Vec::new();
            for r in doc.all("rule") {
                let (lhs, rhs) = r.split_once("->").ok_or_else(|| malformed("rule", r))?;
                match symbols(lhs).as_slice() {
                    [x] => rules.push((x.clone(), symbols(rhs))),
                    _ => return Err(malformed("rule", r)),
                }
            }
            let g = Cfg::new(
                symbols(required(doc, "nonterminals")?),
                symbols(required(doc, "terminals")?),
                rules,
                one_symbol(doc, "start")?,
            )?;
            Ok(Machine::Tdr(tdr_from_cfg(g)?))
        }
        "tm" => {
            let mut delta = BTreeMap::new();
            for t in doc.all("transition") {
                let (lhs, rhs) = t.split_once("->").ok_or_else(|| malformed("transition", t))?;
                match (symbols(lhs).as_slice(), symbols(rhs).as_slice()) {
                    ([q, d], [q2, d2, m]) => {
                        let m = match m.as_str() {
                            "L" => Move::L,
                            "R" => Move::R,
                            _ => return Err(malformed("transition", t)),
                        };
                        delta.insert((q.clone(), d.clone()), (q2.clone(), d2.clone(), m));
                    }
                    _ => return Err(malformed("transition", t)),
                }
            }
            Ok(Machine::Tm(Tm::new(
                symbols(required(doc, "states")?),
                symbols(required(doc, "tape_alphabet")?),
                input_alphabet(doc)?,
                one_symbol(doc, "start")?,
                optional_list(doc, "halt"),
                delta,
            )?))
        }
        other => Err(SpecError::UnknownType(other.to_string())),
    }
}

/// A spec document describing `m` with its default encodings.
pub fn machine_document(m: &Machine) -> Document {
    let mut d = Document::default();
    match m {
        Machine::Fsm(f) => {
            d.field("type", "fsm");
            d.field("states", join(f.states()));
            d.field("alphabet", join(f.inputs()));
            if !f.fill().is_blank() {
                d.field("fill", f.fill().as_str());
            }
            d.field("start", f.start().as_str());
            d.field("accept", join(&f.accepting().iter().cloned().collect::<Vec<_>>()));
            for ((q, a), q2) in f.delta() {
                d.field("transition", format!("{q} {a} -> {q2}"));
            }
        }
        Machine::Pda(p) => {
            d.field("type", "pda");
            d.field("states", join(p.states()));
            d.field("stack_alphabet", join(p.stack_alphabet()));
            d.field("input_alphabet", join(p.inputs()));
            d.field("start", p.start().as_str());
            d.field("accept", join(&p.accepting().iter().cloned().collect::<Vec<_>>()));
            for ((q, a, top), (q2, op)) in p.delta() {
                let a = a.as_ref().map(Symbol::as_str).unwrap_or("-");
                let op = match op {
                    StackOp::Pop => "pop".to_string(),
                    StackOp::Push(x) => format!("push {x}"),
                };
                d.field("transition", format!("{q} {a} {top} -> {q2} {op}"));
            }
        }
        Machine::Tdr(t) => {
            let g = t.grammar();
            d.field("type", "cfg");
            d.field("nonterminals", join(g.nonterminals()));
            d.field("terminals", join(g.terminals()));
            d.field("start", g.start().as_str());
            for (x, rhs) in g.rules() {
                d.field("rule", format!("{x} -> {}", join(rhs)).trim_end().to_string());
            }
        }
        Machine::Tm(t) => {
            d.field("type", "tm");
            d.field("states", join(t.states()));
            d.field("tape_alphabet", join(t.tape_alphabet()));
            d.field("input_alphabet", join(t.inputs()));
            d.field("start", t.start().as_str());
            d.field("halt", join(&t.halting().iter().cloned().collect::<Vec<_>>()));
            for ((q, a), (q2, b, m)) in t.delta() {
                let m = match m {
                    Move::L => "L",
                    Move::R => "R",
                };
                d.field("transition", format!("{q} {a} -> {q2} {b} {m}"));
            }
        }
    }
    d
}

fn parse_dotted_word(key: &str, text: &str) -> Result<DottedWord, SpecError> {
    DottedWord::parse(text).map_err(|_| malformed(key, text))
}

fn parse_vs(doc: &Document) -> Result<VersatileShift, SpecError> {
    let syms = symbols(required(doc, "alphabet")?);
    let blank = Symbol::blank();
    let alphabet = Alphabet::new(syms.clone(), syms.contains(&blank).then_some(blank))?;
    let dod_text = required(doc, "dod")?;
    let dod = match dod_text
        .split_whitespace()
        .map(str::parse::<i64>)
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(v) if v.len() == 2 => Dod::new(v[0], v[1])?,
        _ => return Err(malformed("dod", dod_text)),
    };
    let mut rules = BTreeMap::new();
    for r in doc.all("rule") {
        let (key, rest) = r.split_once("->").ok_or_else(|| malformed("rule", r))?;
        let (replacement, shift) = match rest.split_once(" shift ") {
            Some((w, f)) => (w, f.trim().parse::<i64>().map_err(|_| malformed("rule", r))?),
            None => (rest, 0),
        };
        rules.insert(
            parse_dotted_word("rule", key)?,
            Rule::new(parse_dotted_word("rule", replacement)?, shift),
        );
    }
    Ok(VersatileShift::new(alphabet, dod, rules)?)
}

fn render_vs(d: &mut Document, vs: &VersatileShift) {
    d.field("alphabet", join(vs.alphabet().symbols()));
    d.field("dod", format!("{} {}", vs.dod().k_l(), vs.dod().k_r()));
    for (key, rule) in vs.rules() {
        if rule.shift == 0 {
            d.field("rule", format!("{key} -> {}", rule.replacement));
        } else {
            d.field("rule", format!("{key} -> {} shift {}", rule.replacement, rule.shift));
        }
    }
    let full = vs.alphabet().symbols();
    let narrowed = |slots: &[Vec<Symbol>]| slots.iter().any(|s| s.as_slice() != full);
    if narrowed(vs.left_domain()) || narrowed(vs.right_domain()) {
        for s in vs.left_domain() {
            d.field("domain_left", join(s));
        }
        for s in vs.right_domain() {
            d.field("domain_right", join(s));
        }
    }
}

/// Domain overrides and identity completion shared by every compiled shift.
fn adjust_vs(doc: &Document, vs: VersatileShift) -> Result<VersatileShift, SpecError> {
    let left: Vec<Vec<Symbol>> = doc.all("domain_left").map(symbols).collect();
    let right: Vec<Vec<Symbol>> = doc.all("domain_right").map(symbols).collect();
    let vs = if left.is_empty() && right.is_empty() {
        vs
    } else {
        let left = if left.is_empty() {
            vs.left_domain().to_vec()
        } else {
            left
        };
        let right = if right.is_empty() {
            vs.right_domain().to_vec()
        } else {
            right
        };
        VersatileShift::with_domains(vs.alphabet().clone(), vs.dod(), vs.rules().clone(), left, right)?
    };
    match doc.get("complete") {
        None => Ok(vs),
        Some("identity") => Ok(vs.completed_with_identity()),
        Some(v) => Err(malformed("complete", v)),
    }
}

fn default_plain(symbols: &[Symbol]) -> Result<AxisEncoding, SpecError> {
    let mut order = Vec::new();
    let blank = Symbol::blank();
    if symbols.contains(&blank) {
        order.push(blank.clone());
    }
    order.extend(symbols.iter().filter(|s| **s != blank).cloned());
    Ok(AxisEncoding::Plain(GammaMap::new(order)?))
}

/// A machine or shift compiled down to its network.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub machine: Option<Machine>,
    pub vs: VersatileShift,
    pub gx: AxisEncoding,
    pub gy: AxisEncoding,
    pub nda: Nda,
    pub network: Network,
}

impl Bundle {
    pub fn summary(&self) -> Summary {
        let (m, n) = self.nda.dims();
        Summary {
            kind: match &self.machine {
                Some(m) => m.kind().to_string(),
                None => "VS".to_string(),
            },
            rules: self.vs.rules().len(),
            x_cells: m,
            y_cells: n,
            defined_cells: self.nda.defined_cells(),
            h: self.network.h().to_string(),
            units: self.network.unit_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub kind: String,
    pub rules: usize,
    pub x_cells: usize,
    pub y_cells: usize,
    pub defined_cells: usize,
    pub h: String,
    pub units: usize,
}

#[derive(Debug, Clone)]
pub enum Program {
    Single(Box<Bundle>),
    Interactive(InteractiveNetwork),
}

fn single_vs(
    doc: &Document,
    kind: &str,
) -> Result<(Option<Machine>, VersatileShift, AxisEncoding, AxisEncoding), SpecError> {
    let (machine, vs, gx, gy) = if kind == "vs" {
        let vs = parse_vs(doc)?;
        let g = default_plain(vs.alphabet().symbols())?;
        (None, vs, g.clone(), g)
    } else {
        let m = parse_machine(doc, kind)?;
        let vs = m.to_vs(true)?;
        let (gx, gy) = m.default_encodings()?;
        (Some(m), vs, gx, gy)
    };
    let gx = axis_override(doc, "x")?.unwrap_or(gx);
    let gy = axis_override(doc, "y")?.unwrap_or(gy);
    Ok((machine, adjust_vs(doc, vs)?, gx, gy))
}

fn compile_single(doc: &Document, kind: &str) -> Result<Bundle, SpecError> {
    let (machine, vs, gx, gy) = single_vs(doc, kind)?;
    let nda = Nda::from_vs(&vs, &gx, &gy)?;
    let network = Network::from_nda(&nda);
    Ok(Bundle {
        machine,
        vs,
        gx,
        gy,
        nda,
        network,
    })
}

fn compile_interactive(doc: &Document) -> Result<InteractiveNetwork, SpecError> {
    let mut tapes = Vec::new();
    let mut stages: Vec<StageSpec> = Vec::new();
    let mut entries = doc.entries.iter().peekable();
    while let Some(e) = entries.next() {
        let Entry::Field { key, value } = e else {
            return Err(malformed("begin", "block without a component"));
        };
        match key.as_str() {
            "type" => {}
            "tape" => {
                let (name, enc) = value
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| malformed("tape", value))?;
                tapes.push(Tape {
                    name: name.to_string(),
                    encoding: parse_tape_encoding(enc)?,
                });
            }
            "stage" => stages.push(StageSpec::default()),
            "gate" => {
                let (tape, state) = value.split_once(':').ok_or_else(|| malformed("gate", value))?;
                let last = stages
                    .last_mut()
                    .and_then(|s| s.components.last_mut())
                    .ok_or_else(|| malformed("gate", value))?;
                last.gated_by = Some((tape.trim().to_string(), Symbol::new(state.trim())));
            }
            "component" => {
                let mut words = value.split_whitespace();
                let name = words.next().ok_or_else(|| malformed("component", value))?.to_string();
                let (mut x, mut y, mut writes, mut gate) = (None, None, "xy", None);
                for w in words {
                    match w.split_once('=') {
                        Some(("x", t)) => x = Some(t.to_string()),
                        Some(("y", t)) => y = Some(t.to_string()),
                        Some(("writes", t)) if matches!(t, "x" | "y" | "xy") => writes = t,
                        Some(("gate", g)) => {
                            let (tape, state) = g.split_once(':').ok_or_else(|| malformed("component", value))?;
                            gate = Some((tape.to_string(), Symbol::new(state)));
                        }
                        _ => return Err(malformed("component", value)),
                    }
                }
                let Some(Entry::Block(inner)) = entries.next() else {
                    return Err(SpecError::MissingBlock(name));
                };
                let kind = required(inner, "type")?;
                if kind == "interactive" {
                    return Err(SpecError::NestedInteractive(name));
                }
                let (_, vs, _, _) = single_vs(inner, kind)?;
                if stages.is_empty() {
                    stages.push(StageSpec::default());
                }
                stages.last_mut().expect("stage").components.push(ComponentSpec {
                    name,
                    vs,
                    x_tape: x.ok_or(SpecError::Missing("x"))?,
                    y_tape: y.ok_or(SpecError::Missing("y"))?,
                    writes_x: writes.contains('x'),
                    writes_y: writes.contains('y'),
                    gated_by: gate,
                });
            }
            other => return Err(malformed(other, value)),
        }
    }
    Ok(build_ian(tapes, stages)?)
}

pub fn compile_document(doc: &Document) -> Result<Program, SpecError> {
    match required(doc, "type")? {
        "interactive" => Ok(Program::Interactive(compile_interactive(doc)?)),
        kind @ ("fsm" | "pda" | "cfg" | "tm" | "vs") => Ok(Program::Single(Box::new(compile_single(doc, kind)?))),
        other => Err(SpecError::UnknownType(other.to_string())),
    }
}

/// Only the machine description, ignoring overrides.
pub fn document_machine(doc: &Document) -> Result<Machine, SpecError> {
    parse_machine(doc, required(doc, "type")?)
}

/// A spec document for a bare shift with plain encodings.
pub fn vs_document(vs: &VersatileShift, gx: &AxisEncoding, gy: &AxisEncoding) -> Document {
    let mut d = Document::default();
    d.field("type", "vs");
    render_vs(&mut d, vs);
    write_axis(&mut d, "x", gx);
    write_axis(&mut d, "y", gy);
    d
}
