//! Random machines and configurations for property suites and benchmarks.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{
    tdr_from_cfg, Cfg, Fsm, FsmConfig, Kind, Machine, MachineConfiguration, Move, Pda, PdaConfig, StackOp, Tdr,
    TdrConfig, Tm, TmConfig,
};
use crate::symbolic::Symbol;

fn names(prefix: &str, n: usize) -> Vec<Symbol> {
    (0..n).map(|i| Symbol::new(&format!("{prefix}{i}"))).collect()
}

fn pick<R: Rng>(rng: &mut R, from: &[Symbol]) -> Symbol {
    from.choose(rng).expect("non-empty choice").clone()
}

fn random_word<R: Rng>(rng: &mut R, from: &[Symbol], max_len: usize) -> Vec<Symbol> {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| pick(rng, from)).collect()
}

/// Up to 5 states and 3 input symbols; about one transition in eight is missing.
pub fn random_fsm<R: Rng>(rng: &mut R) -> Fsm {
    let states = names("q", rng.random_range(1..=5));
    let inputs = names("a", rng.random_range(1..=3));
    let mut delta = BTreeMap::new();
    for q in &states {
        for d in &inputs {
            if rng.random_bool(0.875) {
                delta.insert((q.clone(), d.clone()), pick(rng, &states));
            }
        }
    }
    let accepting = states.iter().filter(|_| rng.random_bool(0.4)).cloned().collect();
    Fsm::new(states.clone(), inputs, states[0].clone(), accepting, delta).expect("generated machine is valid")
}

/// Up to 4 states, 3 stack symbols and 3 input symbols.
pub fn random_pda<R: Rng>(rng: &mut R) -> Pda {
    let states = names("q", rng.random_range(1..=4));
    let stack = names("X", rng.random_range(1..=3));
    let inputs = names("a", rng.random_range(1..=3));
    let mut tops = vec![Symbol::blank()];
    tops.extend(stack.iter().cloned());
    let mut lookaheads = tops[..1].to_vec();
    lookaheads.extend(inputs.iter().cloned());
    let op = |rng: &mut R| {
        if rng.random_bool(0.45) {
            StackOp::Pop
        } else if rng.random_bool(0.1) {
            StackOp::Push(Symbol::blank())
        } else {
            StackOp::Push(pick(rng, &stack))
        }
    };
    let mut delta = BTreeMap::new();
    for q in &states {
        for t in &tops {
            if rng.random_bool(0.15) {
                let o = op(rng);
                delta.insert((q.clone(), None, t.clone()), (pick(rng, &states), o));
                continue;
            }
            for k in &lookaheads {
                if rng.random_bool(0.8) {
                    let o = op(rng);
                    delta.insert((q.clone(), Some(k.clone()), t.clone()), (pick(rng, &states), o));
                }
            }
        }
    }
    let accepting = states.iter().filter(|_| rng.random_bool(0.3)).cloned().collect();
    Pda::new(states.clone(), stack, inputs, states[0].clone(), accepting, delta).expect("generated machine is valid")
}

/// Recognizer of a random grammar with at most 4 rules that needs one
/// token of lookahead and is not left-recursive.
pub fn random_tdr<R: Rng>(rng: &mut R) -> Tdr {
    loop {
        let nts = names("N", rng.random_range(1..=2));
        let ts = names("t", rng.random_range(1..=3));
        let mut all = nts.clone();
        all.extend(ts.iter().cloned());
        let n_rules = rng.random_range(nts.len()..=4);
        let mut rules = Vec::new();
        for i in 0..n_rules {
            let lhs = if i < nts.len() { nts[i].clone() } else { pick(rng, &nts) };
            rules.push((lhs, random_word(rng, &all, 3)));
        }
        let Ok(g) = Cfg::new(nts.clone(), ts, rules, nts[0].clone()) else {
            continue;
        };
        if let Ok(t) = tdr_from_cfg(g) {
            return t;
        }
    }
}

/// Up to 4 states and a tape alphabet of at most 3 symbols, blank included.
pub fn random_tm<R: Rng>(rng: &mut R) -> Tm {
    let states = names("q", rng.random_range(1..=4));
    let mut tape = vec![Symbol::blank()];
    tape.extend(names("d", rng.random_range(1..=2)));
    let halting: Vec<Symbol> = if states.len() > 1 && rng.random_bool(0.5) {
        vec![states[states.len() - 1].clone()]
    } else {
        vec![]
    };
    let mut delta = BTreeMap::new();
    for q in states.iter().filter(|q| !halting.contains(q)) {
        for d in &tape {
            if rng.random_bool(0.9) {
                let m = if rng.random_bool(0.5) { Move::L } else { Move::R };
                delta.insert((q.clone(), d.clone()), (pick(rng, &states), pick(rng, &tape), m));
            }
        }
    }
    Tm::new(
        states.clone(),
        tape.clone(),
        tape[1..].to_vec(),
        states[0].clone(),
        halting,
        delta,
    )
    .expect("generated machine is valid")
}

/// A machine with `n_states` states and `n_symbols` tape symbols, blank
/// included, with every transition defined.
pub fn shaped_tm<R: Rng>(n_states: usize, n_symbols: usize, rng: &mut R) -> Tm {
    let states = names("q", n_states);
    let mut tape = vec![Symbol::blank()];
    tape.extend(names("d", n_symbols - 1));
    let mut delta = BTreeMap::new();
    for q in &states {
        for d in &tape {
            let m = if rng.random_bool(0.5) { Move::L } else { Move::R };
            delta.insert((q.clone(), d.clone()), (pick(rng, &states), pick(rng, &tape), m));
        }
    }
    Tm::new(
        states.clone(),
        tape.clone(),
        tape[1..].to_vec(),
        states[0].clone(),
        vec![],
        delta,
    )
    .expect("generated machine is valid")
}

pub fn random_machine<R: Rng>(kind: Kind, rng: &mut R) -> Machine {
    match kind {
        Kind::Fsm => Machine::Fsm(random_fsm(rng)),
        Kind::Pda => Machine::Pda(random_pda(rng)),
        Kind::Tdr => Machine::Tdr(random_tdr(rng)),
        Kind::Tm => Machine::Tm(random_tm(rng)),
    }
}

/// Any well-formed configuration, not only those reachable from the start.
pub fn random_config<R: Rng>(m: &Machine, rng: &mut R) -> MachineConfiguration {
    match m {
        Machine::Fsm(f) => MachineConfiguration::Fsm(FsmConfig {
            state: pick(rng, f.states()),
            input: random_word(rng, f.inputs(), 6),
        }),
        Machine::Pda(p) => MachineConfiguration::Pda(PdaConfig::new(
            pick(rng, p.states()),
            random_word(rng, p.stack_alphabet(), 4),
            random_word(rng, p.inputs(), 6),
        )),
        Machine::Tdr(t) => {
            let g = t.grammar();
            let mut syms = g.terminals().to_vec();
            syms.extend(g.nonterminals().iter().cloned());
            let stack = if rng.random_bool(0.3) {
                vec![g.start().clone()]
            } else {
                random_word(rng, &syms, 4)
            };
            MachineConfiguration::Tdr(TdrConfig::new(stack, random_word(rng, g.terminals(), 6)))
        }
        Machine::Tm(t) => MachineConfiguration::Tm(TmConfig::new(
            pick(rng, t.states()),
            random_word(rng, t.tape_alphabet(), 4),
            random_word(rng, t.tape_alphabet(), 4),
        )),
    }
}

/// A reproducible batch of machines of one kind.
pub fn machine_suite(kind: Kind, count: usize, seed: u64) -> Vec<Machine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_machine(kind, &mut rng)).collect()
}
