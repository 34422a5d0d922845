//! One line per acceptance criterion, with timings against their budgets.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftnet::automata::{cpg_fsm, word_tm, Kind, Machine, TmConfig};
use shiftnet::godel::{decode, godelize, int, pop_code, push_code, ratio, GammaMap, Rational};
use shiftnet::interactive::garden_path_network;
use shiftnet::random::{machine_suite, random_config, random_machine, shaped_tm};
use shiftnet::rann::{check_compiled, Compiled};
use shiftnet::symbolic::{
    apply_vs, char_word, Alphabet, Dod, DottedSequence, DottedWord, Rule, Symbol, VersatileShift,
};
use shiftnet::{par_map, Execution};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn vs_trace() -> Outcome {
    let alphabet = Alphabet::new(char_word("_adenorw"), Some(Symbol::blank())).map_err(|e| e.to_string())?;
    let mut rules = BTreeMap::new();
    let w = |t: &str| DottedWord::parse(t).unwrap();
    rules.insert(w("o.r"), Rule::new(w("a.n"), 0));
    rules.insert(w("a.n"), Rule::new(w("on.dere"), 1));
    let vs = VersatileShift::new(alphabet, Dod::new(-2, 1).unwrap(), rules).map_err(|e| e.to_string())?;
    let s0 = DottedSequence::parse("wo.rd").unwrap();
    let s1 = apply_vs(&vs, &s0).map_err(|e| e.to_string())?;
    let s2 = apply_vs(&vs, &s1).map_err(|e| e.to_string())?;
    ensure(s1 == DottedSequence::parse("wa.nd").unwrap(), || {
        format!("first step gave {s1}")
    })?;
    ensure(s2 == DottedSequence::parse("wo.ndered").unwrap(), || {
        format!("second step gave {s2}")
    })?;
    Ok(format!("{s0} -> {s1} -> {s2}"))
}

fn tm_trace() -> Outcome {
    let tm = word_tm();
    let expected = ["w q0 . o r d", "w a q1 . r d", "w q1 . a n d"];
    let c = Compiled::new(Machine::Tm(tm.clone()))?;
    let mut conf = TmConfig::new(Symbol::new("q0"), char_word("w"), char_word("ord"));
    let mut seq = tm.encode(&conf);
    let (mut x, mut y) = c.nda.encode(&seq).map_err(|e| e.to_string())?;
    let mut st = c.network.init_state(&x, &y).map_err(|e| e.to_string())?;
    for (k, want) in expected.iter().enumerate() {
        let at_net = c.nda.decode(st.x(), st.y(), 8).map_err(|e| e.to_string())?;
        let at_nda = c.nda.decode(&x, &y, 8).map_err(|e| e.to_string())?;
        for (stage, got) in [
            ("machine", tm.encode(&conf).to_string()),
            ("shift", seq.to_string()),
            ("map", at_nda.to_string()),
            ("network", at_net.to_string()),
        ] {
            ensure(got == *want, || format!("{stage} at step {k}: {got}, expected {want}"))?;
        }
        ensure((st.x(), st.y()) == (&x, &y), || {
            format!("network and map codes differ at step {k}")
        })?;
        if k + 1 < expected.len() {
            conf = tm.step(&conf).map_err(|e| e.to_string())?;
            seq = apply_vs(&c.vs, &seq).map_err(|e| e.to_string())?;
            (x, y) = c.nda.step(&x, &y).map_err(|e| e.to_string())?;
            st = c.network.step(&st).map_err(|e| e.to_string())?;
        }
    }
    Ok(expected.join(" -> "))
}

fn commutativity() -> Outcome {
    let mut checked = 0;
    for (k, kind) in [Kind::Fsm, Kind::Pda, Kind::Tdr, Kind::Tm].into_iter().enumerate() {
        let machines: Vec<(usize, Machine)> = machine_suite(kind, 50, 1000 + k as u64)
            .into_iter()
            .enumerate()
            .collect();
        let reports = par_map(Execution::Parallel, &machines, |(i, m)| {
            let c = Compiled::new(m.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(*i as u64);
            for _ in 0..20 {
                let conf = random_config(m, &mut rng);
                let r = check_compiled(&c, &conf, 10);
                if let Some(d) = r.divergence {
                    return Err(format!(
                        "{kind:?} diverged at step {} ({}): {}",
                        d.step, d.stage, d.detail
                    ));
                }
            }
            Ok(20)
        });
        for r in reports {
            checked += r?;
        }
    }
    Ok(format!(
        "{checked} configurations, 4 kinds x 50 machines, 10 steps each"
    ))
}

fn unit_counts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut found = Vec::new();
    for (nq, ns, want) in [(7, 4, 259), (6, 4, 223)] {
        let c = Compiled::new(Machine::Tm(shaped_tm(nq, ns, &mut rng)))?;
        let got = c.network.unit_count();
        ensure(got == want, || format!("{nq}x{ns}: {got} units, expected {want}"))?;
        found.push(format!("{nq}x{ns} -> {got}"));
    }
    Ok(found.join(", "))
}

fn gait_bifurcation() -> Outcome {
    let c = Compiled::new(Machine::Fsm(cpg_fsm()))?;
    let state_of = |x: &Rational| -> Result<String, String> {
        let i = c
            .nda
            .x_axis()
            .locate(x)
            .ok_or_else(|| format!("x = {x} outside the partition"))?;
        Ok(c.nda.x_axis().words[i][0].as_str().to_owned())
    };
    let (x0, _) = c
        .nda
        .encode(&DottedSequence::parse("q1 .").unwrap())
        .map_err(|e| e.to_string())?;
    let walk = ["q1", "q3", "q2", "q4", "q1"];
    let gallop = ["q1", "q2", "q3", "q4", "q1"];
    let half = ratio(1, 2);
    let mut switch_at = None;
    for k in 0..=100 {
        let v = ratio(k, 100);
        let mut st = c.network.init_state(&x0, &v).map_err(|e| e.to_string())?;
        let mut cycle = vec![state_of(st.x())?];
        for _ in 0..4 {
            st = c
                .network
                .macro_step(&st, [None, Some(&v)])
                .map_err(|e| e.to_string())?
                .after_mcl;
            cycle.push(state_of(st.x())?);
        }
        let want = if v < half { walk } else { gallop };
        ensure(cycle == want, || format!("override {v}: {cycle:?}, expected {want:?}"))?;
        if v >= half && switch_at.is_none() {
            switch_at = Some(v);
        }
    }
    let below = ratio(499_999, 1_000_000);
    let mut st = c.network.init_state(&x0, &below).map_err(|e| e.to_string())?;
    st = c
        .network
        .macro_step(&st, [None, Some(&below)])
        .map_err(|e| e.to_string())?
        .after_mcl;
    ensure(state_of(st.x())? == "q3", || "just below 1/2 does not walk".into())?;
    ensure(switch_at == Some(half), || format!("switch at {switch_at:?}"))?;
    Ok(format!(
        "walk below 1/2, gallop from 1/2 over 101 points; {} units by the unit-count formula (a 22 or 24 unit figure is not asserted)",
        c.network.unit_count()
    ))
}

fn garden_path() -> Outcome {
    let gp = garden_path_network();
    let so = gp
        .run_sentence(&DottedSequence::parse("S.so").unwrap(), 20)
        .map_err(|e| e.to_string())?;
    let os = gp
        .run_sentence(&DottedSequence::parse("S.os").unwrap(), 20)
        .map_err(|e| e.to_string())?;
    let (Some(a), Some(b)) = (so.accepted_after, os.accepted_after) else {
        return Err("a sentence was not accepted".into());
    };
    ensure(so.diagnosis_errors == 0 && so.repairs == 0, || {
        format!("S.so: {} errors, {} repairs", so.diagnosis_errors, so.repairs)
    })?;
    ensure(os.diagnosis_errors >= 1 && os.repairs == 1, || {
        format!("S.os: {} errors, {} repairs", os.diagnosis_errors, os.repairs)
    })?;
    ensure(b > a, || format!("S.os took {b} passes, S.so {a}"))?;
    Ok(format!(
        "S.so accepted after {a} passes, S.os after {b} with {} error(s) and 1 repair; {} units (a 266 unit figure is not asserted)",
        os.diagnosis_errors,
        gp.network.unit_count()
    ))
}

fn synth_erp() -> Outcome {
    let gp = garden_path_network();
    let (trials, tail, seed, steps, onset) = (100, 6, 1, 14, 2);
    let os_stim = DottedSequence::parse("S.os").unwrap();
    let run = gp.run_sentence(&os_stim, 20).map_err(|e| e.to_string())?;
    let repair = gp.network.component("repair").expect("repair component");
    let repair_pass = run
        .passes
        .iter()
        .position(|p| p.active.contains(&Some(repair)))
        .ok_or("no repair pass")?;
    let repair_step = onset + repair_pass + 1;
    let erp = |stim: &str| {
        gp.erp(
            &DottedSequence::parse(stim).unwrap(),
            trials,
            tail,
            seed,
            steps,
            onset,
            Execution::Parallel,
        )
        .map_err(|(k, e)| format!("trial {k}: {e}"))
    };
    let so = erp("S.so")?;
    let os = erp("S.os")?;
    let rest = so[0].mean.clone();
    ensure(os[0].mean == rest, || {
        "conditions start from different rest values".into()
    })?;
    let window = (repair_step..steps).take_while(|&t| os[t].mean > so[t].mean).count();
    ensure(window >= 1, || {
        format!("no divergence at the repair step t = {repair_step}")
    })?;
    for (name, series) in [("s-o", &so), ("o-s", &os)] {
        let last = &series[steps - 1].mean;
        ensure(*last == rest, || format!("{name} ends at {last}, rest is {rest}"))?;
    }
    Ok(format!(
        "o-s above s-o for t = {}..{} from the repair step; both return to rest",
        repair_step,
        repair_step + window - 1
    ))
}

fn series(w: &[Symbol], g: &GammaMap) -> Rational {
    let base = BigInt::from(g.base());
    w.iter().enumerate().fold(Rational::zero(), |acc, (k, s)| {
        acc + Rational::new(BigInt::from(g.index(s).unwrap()), base.pow(k as u32 + 1))
    })
}

fn codec() -> Outcome {
    let g = GammaMap::new(char_word("abc")).map_err(|e| e.to_string())?;
    let alphabet = char_word("abc");
    let mut frontier: Vec<Vec<Symbol>> = vec![vec![]];
    let mut exhaustive = 0;
    for len in 0..=6 {
        for w in &frontier {
            let c = godelize(w, &g).map_err(|e| e.to_string())?;
            ensure(c.value() == &series(w, &g), || format!("code of {w:?}"))?;
            ensure(decode(&c, &g, len).map_err(|e| e.to_string())? == *w, || {
                format!("round trip of {w:?}")
            })?;
            exhaustive += 1;
        }
        frontier = frontier
            .iter()
            .flat_map(|w| alphabet.iter().map(move |s| [w.clone(), vec![s.clone()]].concat()))
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let n = rng.random_range(4..=12);
        let symbols: Vec<Symbol> = (0..n).map(|i| Symbol::new(&format!("s{i}"))).collect();
        let g = GammaMap::new(symbols.clone()).map_err(|e| e.to_string())?;
        let len = rng.random_range(0..=12);
        let w: Vec<Symbol> = (0..len).map(|_| symbols.choose(&mut rng).unwrap().clone()).collect();
        let c = godelize(&w, &g).map_err(|e| e.to_string())?;
        ensure(c.value() == &series(&w, &g), || format!("code of {w:?}"))?;
        ensure(decode(&c, &g, len).map_err(|e| e.to_string())? == w, || {
            format!("round trip of {w:?}")
        })?;
        let k = rng.random_range(0..=len);
        let popped = pop_code(&c, &w[..k], &g).map_err(|e| e.to_string())?;
        ensure(popped.value() == &series(&w[k..], &g), || {
            format!("pop of {k} from {w:?}")
        })?;
        let pushed = push_code(&popped, &w[..k], &g).map_err(|e| e.to_string())?;
        ensure(pushed == c, || format!("push of {k} onto {w:?}"))?;
    }
    Ok(format!(
        "{exhaustive} exhaustive words, 1000 random round trips, 1000 pop/push pairs"
    ))
}

fn branch_selection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut compiled = vec![Compiled::new(Machine::Fsm(cpg_fsm()))?];
    for kind in [Kind::Fsm, Kind::Pda, Kind::Tdr, Kind::Tm] {
        for _ in 0..5 {
            compiled.push(Compiled::new(random_machine(kind, &mut rng))?);
        }
    }
    let mut states = 0;
    while states < 1000 {
        let c = compiled.choose(&mut rng).unwrap();
        let net = &c.network;
        let (m, n) = net.dims();
        let (i, j) = (rng.random_range(0..m), rng.random_range(0..n));
        if !net.is_defined(i, j) {
            continue;
        }
        let point = |iv: &shiftnet::nda::Interval, rng: &mut ChaCha8Rng| {
            let t = ratio(rng.random_range(0..1000), 1000);
            &iv.lo + (&iv.hi - &iv.lo) * t
        };
        let x = point(&c.nda.x_intervals()[i], &mut rng);
        let y = point(&c.nda.y_intervals()[j], &mut rng);
        let st = net.init_state(&x, &y).map_err(|e| e.to_string())?;
        let step = net.macro_step(&st, [None, None]).map_err(|e| e.to_string())?;
        let bsl = step.after_bsl.values();
        for (a, b) in (1..m)
            .map(|k| (net.bsl_x_unit(k - 1), net.bsl_x_unit(k)))
            .chain((1..n).map(|k| (net.bsl_y_unit(k - 1), net.bsl_y_unit(k))))
        {
            ensure(bsl[b] <= bsl[a], || format!("BSL not monotone at ({x}, {y})"))?;
        }
        let (half, h) = (net.h() / int(2), net.h().clone());
        let mut full = 0;
        let mut live = 0;
        for p in 0..m {
            for q in 0..n {
                let b = net.gate_sum(bsl, p, q);
                ensure(b.is_zero() || b == half || b == h, || format!("gate sum {b}"))?;
                if b == h {
                    full += 1;
                    ensure((p, q) == (i, j), || {
                        format!("gate opens ({p}, {q}), point lies in ({i}, {j})")
                    })?;
                }
                let u = net.ltl_unit(p, q);
                let ltl = step.after_ltl.values();
                if (p, q) != (i, j) && (!ltl[u].is_zero() || !ltl[u + 1].is_zero()) {
                    live += 1;
                }
            }
        }
        ensure(full == 1, || format!("{full} gates open at ({x}, {y})"))?;
        ensure(live == 0, || {
            format!("{live} unselected LTL pairs active at ({x}, {y})")
        })?;
        ensure(step.after_mcl.x() <= &Rational::one(), || {
            "MCL left the unit square".into()
        })?;
        states += 1;
    }
    Ok(format!("{states} states over {} networks", compiled.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("shift worked trace", Duration::from_millis(1), vs_trace),
        ("tape machine trace at four stages", Duration::from_millis(10), tm_trace),
        ("commutativity suite", Duration::from_secs(60), commutativity),
        ("unit counts", Duration::from_secs(1), unit_counts),
        ("gait bifurcation", Duration::from_secs(1), gait_bifurcation),
        ("garden-path behavior", Duration::from_secs(1), garden_path),
        ("synthetic ERP", Duration::from_secs(30), synth_erp),
        ("code properties", Duration::from_secs(10), codec),
        ("branch selection invariants", Duration::from_secs(10), branch_selection),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let (verdict, detail) = match outcome {
            Ok(d) if took <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("over budget: {d}")),
            Err(e) => ("FAIL", e),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("{verdict} {} {name} [{took:.2?} / {budget:?}]: {detail}", k + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
