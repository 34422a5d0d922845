//! Bundled spec documents.

use shiftnet::automata::{bracket_grammar, cpg_fsm, tdr_from_cfg, word_tm, Cfg, Machine};
use shiftnet::interactive::{diagnosis_pda, garden_path_network, strategy_fsm, DIAGNOSIS, INPUT, PARSE, STRATEGY};
use shiftnet::symbolic::{word, Symbol};

use crate::document::Document;
use crate::spec::{machine_document, render_tape_encoding};

pub const NAMES: &[&str] = &["cpg", "garden-path", "word-tm", "brackets"];

pub fn example(name: &str) -> Option<Document> {
    match name {
        "cpg" => Some(machine_document(&Machine::Fsm(cpg_fsm()))),
        "word-tm" => Some(machine_document(&Machine::Tm(word_tm()))),
        "brackets" => Some(machine_document(&Machine::Tdr(
            tdr_from_cfg(bracket_grammar()).expect("bracket grammar is LL(1)"),
        ))),
        "garden-path" => Some(garden_path_document()),
        _ => None,
    }
}

fn parser_block(rhs: &str) -> Document {
    let s = Symbol::new;
    let g = Cfg::new(vec![s("S")], vec![s("o"), s("s")], vec![(s("S"), word(rhs))], s("S"))
        .expect("parser grammar is well formed");
    let mut d = machine_document(&Machine::Tdr(tdr_from_cfg(g).expect("parser grammar is LL(1)")));
    d.field("domain_right", "_ S o s");
    d.field("complete", "identity");
    d
}

fn repair_block() -> Document {
    let mut d = Document::default();
    d.field("type", "vs");
    d.field("alphabet", "_ S o s");
    d.field("dod", "-3 1");
    for w in ["_", "S", "o", "s"] {
        d.field("rule", format!("o s . {w} -> s o . {w}"));
    }
    d.field("domain_left", "_ S o s");
    d.field("domain_left", "_ S o s");
    d.field("domain_right", "_ S o s");
    d.field("complete", "identity");
    d
}

/// The garden-path parser written out as an interactive spec.
pub fn garden_path_document() -> Document {
    let gp = garden_path_network();
    let mut d = Document::default();
    d.field("type", "interactive");
    for t in gp.network.tapes() {
        d.field("tape", format!("{} {}", t.name, render_tape_encoding(&t.encoding)));
    }
    d.field("stage", "");
    for (name, block) in [
        ("s-o", parser_block("s o")),
        ("o-s", parser_block("o s")),
        ("repair", repair_block()),
    ] {
        d.field("component", format!("{name} x={PARSE} y={INPUT} writes=xy"));
        d.block(block);
        d.field("gate", format!("{STRATEGY}:{name}"));
    }
    d.field("stage", "");
    d.field("component", format!("diagnosis x={DIAGNOSIS} y={PARSE} writes=x"));
    d.block(machine_document(&Machine::Pda(diagnosis_pda())));
    d.field("stage", "");
    d.field("component", format!("strategy x={STRATEGY} y={DIAGNOSIS} writes=x"));
    let mut strategy = machine_document(&Machine::Fsm(strategy_fsm()));
    strategy.field("domain_right", "idle parsing error");
    d.block(strategy);
    d
}
