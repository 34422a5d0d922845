use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use rand::Rng;
use shiftnet::godel::{int, ratio, AxisEncoding, GammaMap, Rational};
use shiftnet::interactive::garden_path_network;
use shiftnet::observables::{amari_mean, harmony, random_compatible_init, synth_erp, trial_rng};
use shiftnet::symbolic::{word, DottedSequence};
use shiftnet::Execution;

fn rationals(max_len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-20i64..21, 1i64..9).prop_map(|(n, d)| ratio(n, d)), 1..max_len)
}

#[test]
fn amari_examples() {
    let v = vec![ratio(1, 2), ratio(1, 4), int(1)];
    assert_eq!(amari_mean(&v, None), ratio(7, 12));
    assert_eq!(amari_mean(&v, Some(2)), ratio(3, 8));
    assert_eq!(amari_mean(&[], None), Rational::zero());
}

#[test]
fn harmony_example() {
    let w = vec![vec![int(0), int(2)], vec![int(-1), int(0)]];
    assert_eq!(harmony(&[int(1), int(3)], &w), int(3));
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[test]
fn trial_statistics() {
    let draws = |k: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Result<Vec<Rational>, ()> {
        Ok((0..4)
            .map(|t| ratio(rng.random_range(0..100) + (k + t) as i64, 7))
            .collect())
    };
    let points = synth_erp(12, 5, 4, Execution::Sequential, draws).unwrap();
    for p in &points {
        let column: Vec<Rational> = (0..12)
            .map(|k| draws(k, &mut trial_rng(5, k)).unwrap()[p.step].clone())
            .collect();
        let mean = column.iter().fold(Rational::zero(), |a, b| a + b) / int(12);
        assert_eq!(p.mean, mean);
        let floats: Vec<f64> = column.iter().map(|r| r.to_f64().unwrap()).collect();
        assert!((p.std - sample_std(&floats)).abs() < 1e-9);
    }
    assert_eq!(synth_erp(12, 5, 4, Execution::Parallel, draws).unwrap(), points);
    let single = synth_erp(1, 5, 4, Execution::Sequential, draws).unwrap();
    assert!(single.iter().all(|p| p.std == 0.0));
    let short = synth_erp(2, 5, 6, Execution::Sequential, |_, _| Ok::<_, ()>(vec![int(1), int(2)])).unwrap();
    assert_eq!(short.last().unwrap().mean, int(2));
    let failing = synth_erp(3, 5, 2, Execution::Sequential, |k, _| {
        if k == 1 {
            Err("bad")
        } else {
            Ok(vec![])
        }
    });
    assert_eq!(failing.unwrap_err(), (1, "bad"));
}

#[test]
fn compatible_init_extends_the_stimulus() {
    let g = AxisEncoding::Plain(GammaMap::new(word("_ S o s")).unwrap());
    let stim = DottedSequence::parse("S.os").unwrap();
    let mut rng = trial_rng(3, 0);
    let (ext, x, y) = random_compatible_init(&stim, 5, &word("o s"), &word("S s"), &g, &g, &mut rng).unwrap();
    assert_eq!(&ext.left()[..1], stim.left());
    assert_eq!(&ext.right()[..2], stim.right());
    assert_eq!((ext.left().len(), ext.right().len()), (6, 7));
    assert!(x.value() >= &ratio(1, 4) && x.value() < &ratio(1, 2));
    assert!(y.value() >= &ratio(11, 16) && y.value() < &ratio(3, 4));
}

#[test]
fn garden_path_erp_without_tails() {
    let gp = garden_path_network();
    let stim = DottedSequence::parse("S.os").unwrap();
    let a = gp.erp(&stim, 4, 0, 9, 12, 2, Execution::Sequential).unwrap();
    let b = gp.erp(&stim, 4, 0, 9, 12, 2, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|p| p.std == 0.0));
    assert_eq!(a[0].mean, a[1].mean);
    assert_ne!(a[2].mean, a[0].mean);
    assert_eq!(a.last().unwrap().mean, a[0].mean);
}

#[test]
fn garden_path_erp_is_reproducible() {
    let gp = garden_path_network();
    let stim = DottedSequence::parse("S.so").unwrap();
    let a = gp.erp(&stim, 6, 4, 1, 10, 2, Execution::Sequential).unwrap();
    let b = gp.erp(&stim, 6, 4, 1, 10, 2, Execution::Sequential).unwrap();
    let c = gp.erp(&stim, 6, 4, 2, 10, 2, Execution::Sequential).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.len(), 10);
    assert!(gp
        .erp(&stim, 1, 4, 1, 10, 2, Execution::Sequential)
        .unwrap()
        .iter()
        .all(|p| p.std == 0.0));
}

proptest! {
    #[test]
    fn amari_ignores_order(v in rationals(12), rot in 0usize..12) {
        let mut w = v.clone();
        w.rotate_left(rot % v.len());
        w.reverse();
        prop_assert_eq!(amari_mean(&v, None), amari_mean(&w, None));
    }

    #[test]
    fn amari_is_affine(v in rationals(12), a in -5i64..6, b in -5i64..6) {
        let w: Vec<Rational> = v.iter().map(|x| x * int(a) + int(b)).collect();
        prop_assert_eq!(amari_mean(&w, None), amari_mean(&v, None) * int(a) + int(b));
    }

    #[test]
    fn amari_exclusion_drops_one_unit(v in rationals(12), k in 0usize..12) {
        let k = k % v.len();
        let mut rest = v.clone();
        rest.remove(k);
        prop_assert_eq!(amari_mean(&v, Some(k)), amari_mean(&rest, None));
    }

    #[test]
    fn harmony_matches_double_sum(v in rationals(6), seed in any::<u64>()) {
        let n = v.len();
        let w: Vec<Vec<Rational>> = (0..n)
            .map(|i| (0..n).map(|j| int(((seed >> ((i * n + j) % 60)) % 7) as i64 - 3)).collect())
            .collect();
        let mut expected = Rational::zero();
        for i in 0..n {
            for j in 0..n {
                expected += &v[i] * &w[i][j] * &v[j];
            }
        }
        prop_assert_eq!(harmony(&v, &w), expected);
    }
}
