//! Coupled automata networks: configuration layers, gated components and
//! the garden-path parser.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::automata::{tdr_from_cfg, AutomatonError, Cfg, Fsm, Pda, StackOp};
use crate::godel::{int, AxisEncoding, Code, GammaMap, GodelError, Rational, RefinedGammaMap};
use crate::nda::{Nda, NdaError};
use crate::observables::{amari_mean, synth_erp, ErpPoint};
use crate::rann::{heaviside, required_h, Network, NetworkError};
use crate::symbolic::{
    apply_vs, word, Alphabet, Dod, DottedSequence, DottedWord, Rule, Symbol, SymbolicError, VersatileShift,
};
use crate::Execution;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IanError {
    #[error("unknown tape `{0}`")]
    UnknownTape(String),
    #[error("duplicate tape `{0}`")]
    DuplicateTape(String),
    #[error("components `{first}` and `{second}` both write tape `{tape}`")]
    WriteConflict {
        tape: String,
        first: String,
        second: String,
    },
    #[error("gated components `{first}` and `{second}` share an activation interval")]
    UngatedOverlap { first: String, second: String },
    #[error("component `{component}` reads and writes through the same tape `{tape}`")]
    SameTape { component: String, tape: String },
    #[error("gate of `{component}` uses `{state}`, which is not a state of tape `{tape}`")]
    BadGate {
        component: String,
        tape: String,
        state: Symbol,
    },
    #[error("component `{component}`: {source}")]
    Component { component: String, source: NetworkError },
    #[error("component `{component}`: {source}")]
    Symbolic { component: String, source: SymbolicError },
    #[error("component `{component}`: {source}")]
    Compile { component: String, source: NdaError },
    #[error("network and symbolic simulation disagree after pass {0}")]
    Divergence(usize),
    #[error(transparent)]
    Godel(#[from] GodelError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// One coded side of a sub-sequence, e.g. the stack side of the parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tape {
    pub name: String,
    pub encoding: AxisEncoding,
}

/// A versatile shift reading two tapes and writing some of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSpec {
    pub name: String,
    pub vs: VersatileShift,
    pub x_tape: String,
    pub y_tape: String,
    pub writes_x: bool,
    pub writes_y: bool,
    /// Tape and state that switch this component on.
    pub gated_by: Option<(String, Symbol)>,
}

/// Components placed between two consecutive configuration layers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StageSpec {
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub vs: VersatileShift,
    pub nda: Nda,
    pub network: Network,
    pub x_tape: usize,
    pub y_tape: usize,
    pub writes_x: bool,
    pub writes_y: bool,
}

/// Branch selection over whole components, driven by one tape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub tape: usize,
    /// Sorted activation thresholds with their component and state.
    pub slots: Vec<(Rational, usize, Symbol)>,
    pub h: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub members: Vec<usize>,
    pub gate: Option<Gate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractiveNetwork {
    tapes: Vec<Tape>,
    components: Vec<Component>,
    stages: Vec<Stage>,
}

/// Everything computed during one pass through the layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pass {
    /// Configuration layers 1..=k, each with one code per tape.
    pub layers: Vec<Vec<Rational>>,
    /// Branch-selection and LTL activations of every component.
    pub components: Vec<Vec<Rational>>,
    /// Gate unit activations per stage (empty when ungated).
    pub gates: Vec<Vec<Rational>>,
    /// Enabled gated component per stage.
    pub active: Vec<Option<usize>>,
}

impl Pass {
    /// Codes fed back into the first layer.
    pub fn output(&self) -> &[Rational] {
        self.layers.last().expect("at least one layer")
    }

    /// All unit activations except the bias, layers first.
    pub fn activations(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.layers.iter().flatten().cloned().collect();
        v.extend(self.components.iter().flatten().cloned());
        v.extend(self.gates.iter().flatten().cloned());
        v
    }
}

fn tape_index(tapes: &[Tape], name: &str) -> Result<usize, IanError> {
    tapes
        .iter()
        .position(|t| t.name == name)
        .ok_or_else(|| IanError::UnknownTape(name.to_string()))
}

pub fn build_ian(tapes: Vec<Tape>, stages: Vec<StageSpec>) -> Result<InteractiveNetwork, IanError> {
    for (i, t) in tapes.iter().enumerate() {
        if tapes[..i].iter().any(|u| u.name == t.name) {
            return Err(IanError::DuplicateTape(t.name.clone()));
        }
    }
    let mut components = Vec::new();
    let mut built = Vec::new();
    for spec in stages {
        let mut members = Vec::new();
        let mut gate_tape = None;
        let mut slots = Vec::new();
        let mut writers: BTreeMap<usize, String> = BTreeMap::new();
        let mut gated_writers: BTreeMap<usize, String> = BTreeMap::new();
        let mut ndas = Vec::new();
        for c in &spec.components {
            let x = tape_index(&tapes, &c.x_tape)?;
            let y = tape_index(&tapes, &c.y_tape)?;
            if x == y {
                return Err(IanError::SameTape {
                    component: c.name.clone(),
                    tape: c.x_tape.clone(),
                });
            }
            let nda =
                Nda::from_vs(&c.vs, &tapes[x].encoding, &tapes[y].encoding).map_err(|source| IanError::Compile {
                    component: c.name.clone(),
                    source,
                })?;
            let written: Vec<usize> = [(c.writes_x, x), (c.writes_y, y)]
                .into_iter()
                .filter_map(|(w, t)| w.then_some(t))
                .collect();
            let index = components.len() + ndas.len();
            match &c.gated_by {
                None => {
                    for t in written {
                        if let Some(first) = writers.insert(t, c.name.clone()).or(gated_writers.get(&t).cloned()) {
                            return Err(IanError::WriteConflict {
                                tape: tapes[t].name.clone(),
                                first,
                                second: c.name.clone(),
                            });
                        }
                    }
                }
                Some((tape, state)) => {
                    let g = tape_index(&tapes, tape)?;
                    if gate_tape.is_some_and(|t| t != g) {
                        return Err(IanError::BadGate {
                            component: c.name.clone(),
                            tape: tape.clone(),
                            state: state.clone(),
                        });
                    }
                    gate_tape = Some(g);
                    let enc = &tapes[g].encoding;
                    let AxisEncoding::Refined(r) = enc else {
                        return Err(IanError::BadGate {
                            component: c.name.clone(),
                            tape: tape.clone(),
                            state: state.clone(),
                        });
                    };
                    if !r.states().contains(state) {
                        return Err(IanError::BadGate {
                            component: c.name.clone(),
                            tape: tape.clone(),
                            state: state.clone(),
                        });
                    }
                    let lo = enc.offset(std::slice::from_ref(state))?;
                    slots.push((lo, index, state.clone()));
                    for t in written {
                        if let Some(first) = writers.get(&t) {
                            return Err(IanError::WriteConflict {
                                tape: tapes[t].name.clone(),
                                first: first.clone(),
                                second: c.name.clone(),
                            });
                        }
                        gated_writers.insert(t, c.name.clone());
                    }
                }
            }
            members.push(index);
            ndas.push((c, x, y, nda));
        }
        slots.sort_by(|a, b| a.0.cmp(&b.0));
        for w in slots.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(IanError::UngatedOverlap {
                    first: ndas[w[0].1 - components.len()].0.name.clone(),
                    second: ndas[w[1].1 - components.len()].0.name.clone(),
                });
            }
        }
        let gated: Vec<usize> = slots.iter().map(|s| s.1 - components.len()).collect();
        let common_h = gated
            .iter()
            .map(|&k| required_h(&ndas[k].3))
            .max()
            .unwrap_or_else(|| int(2));
        for (k, (c, x, y, nda)) in ndas.into_iter().enumerate() {
            let network = if gated.contains(&k) {
                Network::with_h(&nda, common_h.clone())
            } else {
                Network::from_nda(&nda)
            };
            components.push(Component {
                name: c.name.clone(),
                vs: c.vs.clone(),
                nda,
                network,
                x_tape: x,
                y_tape: y,
                writes_x: c.writes_x,
                writes_y: c.writes_y,
            });
        }
        let gate = gate_tape.map(|tape| Gate {
            tape,
            slots,
            h: common_h,
        });
        built.push(Stage { members, gate });
    }
    Ok(InteractiveNetwork {
        tapes,
        components,
        stages: built,
    })
}

impl InteractiveNetwork {
    pub fn tapes(&self) -> &[Tape] {
        &self.tapes
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn tape(&self, name: &str) -> Option<usize> {
        self.tapes.iter().position(|t| t.name == name)
    }

    pub fn component(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    /// Number of configuration layers.
    pub fn layer_count(&self) -> usize {
        self.stages.len() + 1
    }

    /// Layer units, component BSL and LTL units, gate units and one bias.
    pub fn unit_count(&self) -> usize {
        let comps: usize = self.components.iter().map(|c| c.network.unit_count() - 3).sum();
        let gates: usize = self
            .stages
            .iter()
            .filter_map(|s| s.gate.as_ref())
            .map(|g| g.slots.len())
            .sum();
        self.layer_count() * self.tapes.len() + comps + gates + 1
    }

    pub fn encode_tapes(&self, words: &[Vec<Symbol>]) -> Result<Vec<Rational>, IanError> {
        words
            .iter()
            .zip(&self.tapes)
            .map(|(w, t)| Ok(t.encoding.encode(w)?.into_value()))
            .collect()
    }

    pub fn decode_tapes(&self, codes: &[Rational], max_len: usize) -> Result<Vec<Vec<Symbol>>, IanError> {
        codes
            .iter()
            .zip(&self.tapes)
            .map(|(c, t)| Ok(t.encoding.decode(&Code::new(c.clone())?, max_len)?))
            .collect()
    }

    /// One pass from the first layer through every stage.
    pub fn step(&self, first: &[Rational]) -> Result<Pass, IanError> {
        let mut layers = vec![first.to_vec()];
        let mut comp_values = vec![Vec::new(); self.components.len()];
        let mut gates = Vec::new();
        let mut active = Vec::new();
        for stage in &self.stages {
            let current = layers.last().expect("layers start non-empty").clone();
            let mut next = current.clone();
            let mut sums: BTreeMap<usize, Rational> = BTreeMap::new();
            let (gate_values, enabled) = match &stage.gate {
                Some(g) => {
                    let v = &current[g.tape];
                    let b: Vec<Rational> = g.slots.iter().map(|(t, _, _)| heaviside(&(v - t))).collect();
                    let enabled = (0..b.len()).rev().find(|&k| b[k].is_one()).map(|k| g.slots[k].1);
                    (b, enabled)
                }
                None => (Vec::new(), None),
            };
            for &ci in &stage.members {
                let c = &self.components[ci];
                let net = &c.network;
                let mut values = vec![Rational::zero(); net.unit_count()];
                values[0] = current[c.x_tape].clone();
                values[1] = current[c.y_tape].clone();
                let bias = net.bias_unit();
                values[bias] = Rational::one();
                net.bsl_stage(&mut values);
                let gated = stage
                    .gate
                    .as_ref()
                    .and_then(|g| g.slots.iter().position(|s| s.1 == ci).map(|k| (g, k)));
                let extra = gated.map(|(g, k)| {
                    let half = &g.h / int(2);
                    let mut e = -half.clone();
                    if gate_values[k].is_one() {
                        e += &half;
                    }
                    if k + 1 < gate_values.len() && gate_values[k + 1].is_one() {
                        e -= &half;
                    }
                    e
                });
                if gated.is_none() || enabled == Some(ci) {
                    net.check_selection(&values).map_err(|source| IanError::Component {
                        component: c.name.clone(),
                        source,
                    })?;
                }
                net.ltl_stage(&mut values, extra.as_ref());
                let (x, y) = net.mcl_output(&values);
                if c.writes_x {
                    *sums.entry(c.x_tape).or_insert_with(Rational::zero) += x;
                }
                if c.writes_y {
                    *sums.entry(c.y_tape).or_insert_with(Rational::zero) += y;
                }
                comp_values[ci] = values[2..bias].to_vec();
            }
            for (t, v) in sums {
                next[t] = v;
            }
            gates.push(gate_values);
            active.push(enabled);
            layers.push(next);
        }
        Ok(Pass {
            layers,
            components: comp_values,
            gates,
            active,
        })
    }
}

/// Tape words after a pass, with the enabled component of each stage.
pub type SymbolicPass = (Vec<Vec<Symbol>>, Vec<Option<usize>>);

/// Symbol-level co-simulation of an interactive network through its
/// components' shifts.
pub fn symbolic_pass(net: &InteractiveNetwork, words: &[Vec<Symbol>]) -> Result<SymbolicPass, IanError> {
    let mut current = words.to_vec();
    let mut active = Vec::new();
    for stage in &net.stages {
        let mut next = current.clone();
        let enabled = stage.gate.as_ref().and_then(|g| {
            let head = current[g.tape].first()?;
            g.slots.iter().find(|s| &s.2 == head).map(|s| s.1)
        });
        for &ci in &stage.members {
            let gated = stage.gate.as_ref().is_some_and(|g| g.slots.iter().any(|s| s.1 == ci));
            if gated && enabled != Some(ci) {
                continue;
            }
            let c = &net.components[ci];
            let fx = net.tapes[c.x_tape].encoding.fill().clone();
            let fy = net.tapes[c.y_tape].encoding.fill().clone();
            let s = DottedSequence::new(current[c.x_tape].clone(), current[c.y_tape].clone(), fx, fy);
            let out = apply_vs(&c.vs, &s).map_err(|source| IanError::Symbolic {
                component: c.name.clone(),
                source,
            })?;
            if c.writes_x {
                next[c.x_tape] = out.left().to_vec();
            }
            if c.writes_y {
                next[c.y_tape] = out.right().to_vec();
            }
        }
        active.push(enabled);
        current = next;
    }
    Ok((current, active))
}

// ---------------------------------------------------------------------------
// Garden-path parser

pub const STRATEGY: &str = "strategy";
pub const DIAGNOSIS: &str = "diagnosis";
pub const PARSE: &str = "parse";
pub const INPUT: &str = "input";

fn syms(names: &[&str]) -> Vec<Symbol> {
    names.iter().map(|s| Symbol::new(s)).collect()
}

/// Parser components get an identity rule wherever they are undefined, so a
/// stuck parse stays put instead of stopping the network.
fn parser_tdr(rhs: &str, parse_symbols: &[Symbol]) -> Result<VersatileShift, IanError> {
    let s = Symbol::new;
    let g = Cfg::new(vec![s("S")], vec![s("o"), s("s")], vec![(s("S"), word(rhs))], s("S"))?;
    let vs = tdr_from_cfg(g)?.to_vs()?;
    let vs = VersatileShift::with_domains(
        vs.alphabet().clone(),
        vs.dod(),
        vs.rules().clone(),
        vs.left_domain().to_vec(),
        vec![parse_symbols.to_vec()],
    )
    .map_err(AutomatonError::from)?;
    Ok(vs.completed_with_identity())
}

/// Swaps the two symbols nearest the dot on the stack side, from `s` over
/// `o` to `o` over `s`, whatever the lookahead.
fn repair_vs(parse_symbols: &[Symbol]) -> Result<VersatileShift, IanError> {
    let alphabet = Alphabet::new(parse_symbols.to_vec(), Some(Symbol::blank())).map_err(AutomatonError::from)?;
    let mut rules = BTreeMap::new();
    for w in parse_symbols {
        rules.insert(
            DottedWord::new(word("s o"), vec![w.clone()]),
            Rule::new(DottedWord::new(word("o s"), vec![w.clone()]), 0),
        );
    }
    let vs = VersatileShift::with_domains(
        alphabet,
        Dod::new(-3, 1).map_err(AutomatonError::from)?,
        rules,
        vec![parse_symbols.to_vec(), parse_symbols.to_vec()],
        vec![parse_symbols.to_vec()],
    )
    .map_err(AutomatonError::from)?;
    Ok(vs.completed_with_identity())
}

/// Compares the parse symbol just produced with the one before it,
/// always pushing the new one.
pub fn diagnosis_pda() -> Pda {
    let states = syms(&["idle", "parsing", "error"]);
    let stack = syms(&["o", "s"]);
    let inputs = syms(&["S", "o", "s"]);
    let seen = syms(&["_", "o", "s"]);
    let mut delta = BTreeMap::new();
    for q in &states {
        for top in &seen {
            for k in &seen {
                let next = if top.is_blank() && k.is_blank() {
                    "idle"
                } else if top == k {
                    "error"
                } else {
                    "parsing"
                };
                delta.insert(
                    (q.clone(), Some(k.clone()), top.clone()),
                    (Symbol::new(next), StackOp::Push(k.clone())),
                );
            }
        }
    }
    Pda::new(states, stack, inputs, Symbol::new("idle"), vec![], delta).expect("diagnosis automaton is well formed")
}

/// Picks the parsing strategy from the diagnosis state.
pub fn strategy_fsm() -> Fsm {
    let s = Symbol::new;
    let table = [
        ("s-o", "idle", "s-o"),
        ("s-o", "parsing", "s-o"),
        ("s-o", "error", "repair"),
        ("o-s", "idle", "s-o"),
        ("o-s", "parsing", "o-s"),
        ("o-s", "error", "o-s"),
        ("repair", "idle", "s-o"),
        ("repair", "parsing", "o-s"),
        ("repair", "error", "o-s"),
    ];
    let delta = table.iter().map(|(q, d, q2)| ((s(q), s(d)), s(q2))).collect();
    Fsm::new(
        syms(&["s-o", "o-s", "repair"]),
        syms(&["idle", "parsing", "error"]),
        s("s-o"),
        vec![],
        delta,
    )
    .expect("strategy automaton is well formed")
}

/// The garden-path network with its tape indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GardenPath {
    pub network: InteractiveNetwork,
    pub strategy: usize,
    pub diagnosis: usize,
    pub parse: usize,
    pub input: usize,
}

/// Outcome of presenting one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceRun {
    /// Tape contents after each pass, starting with the presented state.
    pub words: Vec<Vec<Vec<Symbol>>>,
    pub passes: Vec<Pass>,
    /// Pass after which stack and input were both empty.
    pub accepted_after: Option<usize>,
    pub diagnosis_errors: usize,
    pub repairs: usize,
}

pub fn garden_path_network() -> GardenPath {
    build_garden_path().expect("garden-path network is well formed")
}

fn build_garden_path() -> Result<GardenPath, IanError> {
    let parse_symbols = syms(&["_", "S", "o", "s"]);
    let parse_map = GammaMap::new(parse_symbols.clone())?;
    let stack_map = GammaMap::new(syms(&["_", "o", "s"]))?;
    let diagnosis = RefinedGammaMap::new(GammaMap::new(syms(&["idle", "parsing", "error"]))?, stack_map)?;
    let strategy = RefinedGammaMap::new(
        GammaMap::new(syms(&["s-o", "o-s", "repair"]))?,
        GammaMap::new(syms(&["_"]))?,
    )?;
    let tapes = vec![
        Tape {
            name: STRATEGY.into(),
            encoding: AxisEncoding::Refined(strategy),
        },
        Tape {
            name: DIAGNOSIS.into(),
            encoding: AxisEncoding::Refined(diagnosis),
        },
        Tape {
            name: PARSE.into(),
            encoding: AxisEncoding::Plain(parse_map.clone()),
        },
        Tape {
            name: INPUT.into(),
            encoding: AxisEncoding::Plain(parse_map),
        },
    ];
    let parser = |name: &str, vs: VersatileShift, state: &str| ComponentSpec {
        name: name.into(),
        vs,
        x_tape: PARSE.into(),
        y_tape: INPUT.into(),
        writes_x: true,
        writes_y: true,
        gated_by: Some((STRATEGY.into(), Symbol::new(state))),
    };
    let parse_stage = StageSpec {
        components: vec![
            parser("s-o", parser_tdr("s o", &parse_symbols)?, "s-o"),
            parser("o-s", parser_tdr("o s", &parse_symbols)?, "o-s"),
            parser("repair", repair_vs(&parse_symbols)?, "repair"),
        ],
    };
    let strategy_machine = strategy_fsm();
    let strategy_vs = {
        let vs = strategy_machine.to_vs()?;
        VersatileShift::with_domains(
            vs.alphabet().clone(),
            vs.dod(),
            vs.rules().clone(),
            vs.left_domain().to_vec(),
            vec![strategy_machine.inputs().to_vec()],
        )
        .map_err(AutomatonError::from)?
    };
    let diagnosis_stage = StageSpec {
        components: vec![ComponentSpec {
            name: "diagnosis".into(),
            vs: diagnosis_pda().to_vs()?,
            x_tape: DIAGNOSIS.into(),
            y_tape: PARSE.into(),
            writes_x: true,
            writes_y: false,
            gated_by: None,
        }],
    };
    let strategy_stage = StageSpec {
        components: vec![ComponentSpec {
            name: "strategy".into(),
            vs: strategy_vs,
            x_tape: STRATEGY.into(),
            y_tape: DIAGNOSIS.into(),
            writes_x: true,
            writes_y: false,
            gated_by: None,
        }],
    };
    let network = build_ian(tapes, vec![parse_stage, diagnosis_stage, strategy_stage])?;
    Ok(GardenPath {
        strategy: network.tape(STRATEGY).expect("tape exists"),
        diagnosis: network.tape(DIAGNOSIS).expect("tape exists"),
        parse: network.tape(PARSE).expect("tape exists"),
        input: network.tape(INPUT).expect("tape exists"),
        network,
    })
}

impl GardenPath {
    /// Looks up the four garden-path tapes by name in any network that has them.
    pub fn from_network(network: InteractiveNetwork) -> Option<Self> {
        Some(GardenPath {
            strategy: network.tape(STRATEGY)?,
            diagnosis: network.tape(DIAGNOSIS)?,
            parse: network.tape(PARSE)?,
            input: network.tape(INPUT)?,
            network,
        })
    }

    /// Tape words with every tape at rest.
    pub fn rest_words(&self) -> Vec<Vec<Symbol>> {
        self.network
            .decode_tapes(&self.rest_codes(), 1)
            .expect("zero codes decode on every tape")
    }

    pub fn rest_codes(&self) -> Vec<Rational> {
        vec![Rational::zero(); self.network.tapes.len()]
    }

    /// Rest tapes with a sentence such as `S.os` on the parse and input tapes.
    pub fn present(&self, stimulus: &DottedSequence) -> Vec<Vec<Symbol>> {
        let mut w = self.rest_words();
        w[self.parse] = stimulus.left().to_vec();
        w[self.input] = stimulus.right().to_vec();
        w
    }

    fn repair_index(&self) -> usize {
        self.network.component("repair").expect("repair component")
    }

    /// Runs a sentence to acceptance, checking the network against the
    /// symbolic co-simulation after every pass.
    pub fn run_sentence(&self, stimulus: &DottedSequence, max_passes: usize) -> Result<SentenceRun, IanError> {
        let error = Symbol::new("error");
        let repair = self.repair_index();
        let mut words = self.present(stimulus);
        let mut codes = self.network.encode_tapes(&words)?;
        let mut run = SentenceRun {
            words: vec![words.clone()],
            passes: Vec::new(),
            accepted_after: None,
            diagnosis_errors: 0,
            repairs: 0,
        };
        for k in 1..=max_passes {
            let pass = self.network.step(&codes)?;
            let (next, active) = symbolic_pass(&self.network, &words)?;
            if active != pass.active || self.network.encode_tapes(&next)? != pass.output() {
                return Err(IanError::Divergence(k));
            }
            if next[self.diagnosis].first() == Some(&error) {
                run.diagnosis_errors += 1;
            }
            if pass.active.contains(&Some(repair)) {
                run.repairs += 1;
            }
            codes = pass.output().to_vec();
            words = next;
            run.words.push(words.clone());
            run.passes.push(pass);
            if words[self.parse].is_empty() && words[self.input].is_empty() {
                run.accepted_after = Some(k);
                break;
            }
        }
        Ok(run)
    }

    /// Mean activation per time step over `n_trials` presentations of a
    /// sentence at step `onset`, each with random tails of `tail_length`
    /// symbols. Once the sentence is consumed the tapes are reset to rest.
    #[allow(clippy::too_many_arguments)]
    pub fn erp(
        &self,
        stimulus: &DottedSequence,
        n_trials: usize,
        tail_length: usize,
        seed: u64,
        steps: usize,
        onset: usize,
        exec: Execution,
    ) -> Result<Vec<ErpPoint>, (usize, IanError)> {
        let stack_tail = syms(&["_", "o", "s"]);
        let input_tail = syms(&["_", "S", "o", "s"]);
        synth_erp(n_trials, seed, steps, exec, |_, rng| {
            let parse_enc = &self.network.tapes[self.parse].encoding;
            let input_enc = &self.network.tapes[self.input].encoding;
            let (extended, _, _) = crate::observables::random_compatible_init(
                stimulus,
                tail_length,
                &stack_tail,
                &input_tail,
                parse_enc,
                input_enc,
                rng,
            )?;
            let tail_l = extended.left()[stimulus.left().len().min(extended.left().len())..].to_vec();
            let tail_r = extended.right()[stimulus.right().len().min(extended.right().len())..].to_vec();
            let done = (
                parse_enc.encode(&tail_l)?.into_value(),
                input_enc.encode(&tail_r)?.into_value(),
            );
            let rest = self.rest_codes();
            let mut codes = rest.clone();
            let mut series = Vec::with_capacity(steps);
            let mut last = self.network.step(&codes)?;
            for t in 0..steps {
                if t == onset {
                    let presented = self.present(&extended);
                    codes = self.network.encode_tapes(&presented)?;
                }
                let mut values = last.activations();
                let width = codes.len();
                values[..width].clone_from_slice(&codes);
                series.push(amari_mean(&values, None));
                last = self.network.step(&codes)?;
                codes = last.output().to_vec();
                if t >= onset && codes[self.parse] == done.0 && codes[self.input] == done.1 {
                    codes = rest.clone();
                }
            }
            Ok(series)
        })
    }
}
