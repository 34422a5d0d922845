use std::collections::BTreeMap;

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftnet::automata::{cpg_fsm, word_tm, Kind, Machine, MachineConfiguration, StepError};
use shiftnet::godel::{int, ratio, AxisEncoding, GammaMap, Rational};
use shiftnet::nda::Nda;
use shiftnet::random::{random_config, random_machine, shaped_tm};
use shiftnet::rann::{required_h, Compiled, HaltReason, Halting, Layer, Network, NetworkError};
use shiftnet::symbolic::{word, Alphabet, Dod, DottedWord, Rule, Symbol, VersatileShift};

fn formula(m: usize, n: usize) -> usize {
    2 + m + n + 2 * m * n + 1
}

fn compiled(m: Machine) -> Compiled {
    Compiled::new(m).unwrap()
}

#[test]
fn unit_counts() {
    let c = compiled(Machine::Fsm(cpg_fsm()));
    assert_eq!(c.network.unit_count(), 25);
    assert_eq!(c.network.h(), &int(4));
    let c = compiled(Machine::Tm(word_tm()));
    assert_eq!(c.network.unit_count(), 220);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert_eq!(
        compiled(Machine::Tm(shaped_tm(7, 4, &mut rng))).network.unit_count(),
        259
    );
    assert_eq!(
        compiled(Machine::Tm(shaped_tm(6, 4, &mut rng))).network.unit_count(),
        223
    );
}

#[test]
fn smallest_network() {
    let s = Symbol::new;
    let alphabet = Alphabet::new(vec![s("_"), s("a")], Some(Symbol::blank())).unwrap();
    let mut rules = BTreeMap::new();
    rules.insert(
        DottedWord::parse("a.a").unwrap(),
        Rule::new(DottedWord::parse("a.a").unwrap(), 0),
    );
    let vs = VersatileShift::with_domains(
        alphabet,
        Dod::new(-2, 1).unwrap(),
        rules,
        vec![vec![s("a")]],
        vec![vec![s("a")]],
    )
    .unwrap();
    let g = AxisEncoding::Plain(GammaMap::new(vec![s("_"), s("a")]).unwrap());
    let nda = Nda::from_vs(&vs, &g, &g).unwrap();
    let net = Network::from_nda(&nda);
    assert_eq!(net.dims(), (1, 1));
    assert_eq!(net.unit_count(), 7);
    assert_eq!(net.unit_count(), formula(1, 1));
}

#[test]
fn unit_count_follows_partition() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for kind in [Kind::Fsm, Kind::Pda, Kind::Tdr, Kind::Tm] {
        for _ in 0..10 {
            let c = compiled(random_machine(kind, &mut rng));
            let (m, n) = c.nda.dims();
            assert_eq!(c.network.dims(), (m, n));
            assert_eq!(c.network.unit_count(), formula(m, n));
            assert!(c.network.h() >= &int(2));
            assert_eq!(c.network.h(), &required_h(&c.nda));
        }
    }
}

fn layer_of(net: &Network, u: usize) -> Layer {
    net.units()[u].layer
}

/// Which layers may feed which.
fn allowed(to: Layer, from: Layer) -> bool {
    use Layer::*;
    matches!(
        (to, from),
        (BslX, MclX | Bias)
            | (BslY, MclY | Bias)
            | (LtlX, MclX | Bias | BslX | BslY)
            | (LtlY, MclY | Bias | BslX | BslY)
            | (MclX, LtlX)
            | (MclY, LtlY)
    )
}

#[test]
fn weight_discipline() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut nets: Vec<Network> = vec![compiled(Machine::Fsm(cpg_fsm())).network];
    for kind in [Kind::Pda, Kind::Tdr, Kind::Tm] {
        nets.push(compiled(random_machine(kind, &mut rng)).network);
    }
    for net in &nets {
        let w = net.weight_matrix();
        let half = net.h() / int(2);
        for (to, row) in w.iter().enumerate() {
            for (from, v) in row.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let (lt, lf) = (layer_of(net, to), layer_of(net, from));
                assert!(allowed(lt, lf), "{lf} -> {lt}");
                if matches!(lf, Layer::BslX | Layer::BslY) {
                    assert!(*v == half || *v == -half.clone());
                }
                if matches!(lt, Layer::MclX | Layer::MclY) || matches!(lt, Layer::BslX | Layer::BslY) && from < 2 {
                    assert!(v.is_one());
                }
            }
        }
        assert!(net.incoming(net.bias_unit()).is_empty());
    }
}

fn random_point<R: Rng>(rng: &mut R) -> Rational {
    let den: i64 = rng.random_range(1..=200);
    ratio(rng.random_range(0..=den), den)
}

/// Gating, selection and silence checks at one point.
fn check_point(c: &Compiled, x: &Rational, y: &Rational) {
    let net = &c.network;
    let st = net.init_state(x, y).unwrap();
    let mut values = st.0.clone();
    net.bsl_stage(&mut values);
    let (m, n) = net.dims();
    for i in 1..m {
        assert!(values[net.bsl_x_unit(i)] <= values[net.bsl_x_unit(i - 1)]);
    }
    for j in 1..n {
        assert!(values[net.bsl_y_unit(j)] <= values[net.bsl_y_unit(j - 1)]);
    }
    let (half, h) = (net.h() / int(2), net.h().clone());
    let mut full = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let b = net.gate_sum(&values, i, j);
            assert!(b.is_zero() || b == half || b == h, "gate sum {b}");
            if b == h {
                full.push((i, j));
            }
        }
    }
    let cell = c.nda.switch(x, y).unwrap();
    assert_eq!(full, vec![cell]);
    assert_eq!(net.selected_cell(&values), Some(cell));
    let result = net.macro_step(&st, [None, None]);
    if !net.is_defined(cell.0, cell.1) {
        assert!(matches!(result, Err(NetworkError::NoActiveBranch(_))));
        return;
    }
    let step = result.unwrap();
    let active: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let u = net.ltl_unit(i, j);
            !step.after_ltl.0[u].is_zero() || !step.after_ltl.0[u + 1].is_zero()
        })
        .collect();
    assert!(active.iter().all(|&p| p == cell), "{active:?}");
    let expected = c.nda.step(x, y).unwrap();
    assert_eq!((step.after_mcl.x().clone(), step.after_mcl.y().clone()), expected);
}

#[test]
fn gating_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let nets: Vec<Compiled> = [Kind::Fsm, Kind::Pda, Kind::Tdr, Kind::Tm]
        .into_iter()
        .flat_map(|k| (0..3).map(move |_| k))
        .map(|k| compiled(random_machine(k, &mut rng)))
        .chain([compiled(Machine::Fsm(cpg_fsm()))])
        .collect();
    for c in &nets {
        for _ in 0..80 {
            let (x, y) = (random_point(&mut rng), random_point(&mut rng));
            check_point(c, &x, &y);
        }
    }
}

#[test]
fn halting_conditions() {
    let c = compiled(Machine::Fsm(cpg_fsm()));
    let net = &c.network;
    let (x, y) = c
        .nda
        .encode(&c.machine.encode(&c.machine.initial(word("<lo> <hi> <lo>"))).unwrap())
        .unwrap();
    let run = net
        .run(net.init_state(&x, &y).unwrap(), &Halting::MaxSteps(3), 10)
        .unwrap();
    assert_eq!((run.steps.len(), run.reason), (3, HaltReason::MaxSteps));
    let (orbit, _) = c.nda.orbit(x.clone(), y.clone(), 2);
    assert!(orbit[0] != orbit[2] && orbit[1] != orbit[2]);
    let target = orbit[2].clone();
    let stop = Halting::Homunculus(Box::new(move |st| (st.x(), st.y()) == (&target.0, &target.1)));
    let run = net.run(net.init_state(&x, &y).unwrap(), &stop, 10).unwrap();
    assert_eq!((run.steps.len(), run.reason), (2, HaltReason::Predicate));
    assert!(matches!(
        net.run(net.init_state(&x, &y).unwrap(), &Halting::FixedPoint, 5),
        Err(NetworkError::MaxStepsExceeded(5))
    ));
    assert!(net.init_state(&ratio(-1, 2), &y).is_err());
}

#[test]
fn fixed_point_halting_at_a_halting_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let mut halted = 0;
    for _ in 0..200 {
        let Machine::Tm(tm) = random_machine(Kind::Tm, &mut rng) else {
            unreachable!()
        };
        if tm.halting().is_empty() {
            continue;
        }
        let c = compiled(Machine::Tm(tm.clone()));
        let conf = random_config(&c.machine, &mut rng);
        let (x, y) = c.nda.encode(&c.machine.encode(&conf).unwrap()).unwrap();
        let Ok(run) = c
            .network
            .run(c.network.init_state(&x, &y).unwrap(), &Halting::FixedPoint, 30)
        else {
            continue;
        };
        assert_eq!(run.reason, HaltReason::FixedPoint);
        let end = c.nda.decode(run.last().x(), run.last().y(), 64).unwrap();
        let MachineConfiguration::Tm(end) = c.machine.decode(&end).unwrap() else {
            unreachable!()
        };
        assert!(tm.halting().contains(&end.state));
        assert_eq!(tm.step(&end), Err(StepError::Halted));
        halted += 1;
    }
    assert!(halted >= 10, "{halted}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn network_agrees_with_map(seed in any::<u64>(), k in 0usize..4) {
        let kind = [Kind::Fsm, Kind::Pda, Kind::Tdr, Kind::Tm][k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = compiled(random_machine(kind, &mut rng));
        for _ in 0..5 {
            let (x, y) = (random_point(&mut rng), random_point(&mut rng));
            if c.nda.switch(&x, &y).is_ok() {
                check_point(&c, &x, &y);
            }
        }
        prop_assert!(c.network.h() >= &Rational::one());
    }
}
