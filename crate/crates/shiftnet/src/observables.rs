//! Scalar observables over network activations and trial averaging.

use num_traits::{ToPrimitive, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::godel::{godelize_dotted, AxisEncoding, Code, GodelError, Rational};
use crate::symbolic::{DottedSequence, Symbol};
use crate::{par_map, Execution};

/// Mean activation, skipping the unit at `exclude` (normally the bias).
pub fn amari_mean(values: &[Rational], exclude: Option<usize>) -> Rational {
    let mut sum = Rational::zero();
    let mut count = 0i64;
    for (i, v) in values.iter().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        sum += v;
        count += 1;
    }
    if count == 0 {
        sum
    } else {
        sum / Rational::from_integer(count.into())
    }
}

/// Quadratic form `Σ u_i w_ij u_j` with `weights[i][j]`.
pub fn harmony(values: &[Rational], weights: &[Vec<Rational>]) -> Rational {
    let mut acc = Rational::zero();
    for (i, row) in weights.iter().enumerate() {
        if values[i].is_zero() {
            continue;
        }
        let mut inner = Rational::zero();
        for (j, w) in row.iter().enumerate() {
            if !w.is_zero() && !values[j].is_zero() {
                inner += w * &values[j];
            }
        }
        acc += &values[i] * inner;
    }
    acc
}

/// Extends a stimulus with random tails beyond its known symbols and
/// returns the extended sequence with its codes.
pub fn random_compatible_init<R: Rng>(
    stimulus: &DottedSequence,
    tail_length: usize,
    left_tail: &[Symbol],
    right_tail: &[Symbol],
    gx: &AxisEncoding,
    gy: &AxisEncoding,
    rng: &mut R,
) -> Result<(DottedSequence, Code, Code), GodelError> {
    let mut left = stimulus.left().to_vec();
    let mut right = stimulus.right().to_vec();
    for _ in 0..tail_length {
        if let Some(s) = left_tail.choose(rng) {
            left.push(s.clone());
        }
        if let Some(s) = right_tail.choose(rng) {
            right.push(s.clone());
        }
    }
    let s = DottedSequence::new(left, right, gx.fill().clone(), gy.fill().clone());
    let (x, y) = godelize_dotted(&s, gx, gy)?;
    Ok((s, x, y))
}

/// Trial-averaged value of one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ErpPoint {
    pub step: usize,
    pub mean: Rational,
    /// Sample standard deviation; zero for a single trial.
    pub std: f64,
}

/// The generator for trial `k` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Runs `n_trials` trials, each yielding one observable value per step, and
/// aggregates them step by step. Short trials are padded with their last value.
pub fn synth_erp<E, F>(
    n_trials: usize,
    seed: u64,
    steps: usize,
    exec: Execution,
    trial: F,
) -> Result<Vec<ErpPoint>, (usize, E)>
where
    E: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Vec<Rational>, E> + Sync + Send,
{
    let ids: Vec<usize> = (0..n_trials).collect();
    let runs = par_map(exec, &ids, |&k| {
        let mut rng = trial_rng(seed, k);
        trial(k, &mut rng).map_err(|e| (k, e))
    });
    let mut series = Vec::with_capacity(n_trials);
    for r in runs {
        let mut s = r?;
        if let Some(last) = s.last().cloned() {
            s.resize(steps, last);
        }
        s.truncate(steps);
        series.push(s);
    }
    Ok((0..steps)
        .map(|t| {
            let column: Vec<&Rational> = series.iter().filter_map(|s| s.get(t)).collect();
            aggregate(t, &column)
        })
        .collect())
}

fn aggregate(step: usize, column: &[&Rational]) -> ErpPoint {
    let n = column.len();
    if n == 0 {
        return ErpPoint {
            step,
            mean: Rational::zero(),
            std: 0.0,
        };
    }
    let mut sum = Rational::zero();
    for v in column {
        sum += *v;
    }
    let mean = sum / Rational::from_integer((n as i64).into());
    let std = if n < 2 {
        0.0
    } else {
        let mut ss = Rational::zero();
        for v in column {
            let d = *v - &mean;
            ss += &d * &d;
        }
        let var = ss / Rational::from_integer(((n - 1) as i64).into());
        var.to_f64().unwrap_or(f64::NAN).sqrt()
    };
    ErpPoint { step, mean, std }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::godel::{int, ratio, GammaMap};
    use crate::symbolic::char_word;

    #[test]
    fn mean_of_single_unit() {
        let v = vec![int(1), int(0), int(0), int(0)];
        assert_eq!(amari_mean(&v, None), ratio(1, 4));
        assert_eq!(amari_mean(&v, Some(3)), ratio(1, 3));
        assert_eq!(amari_mean(&[int(0), int(0), int(0)], None), int(0));
    }

    #[test]
    fn harmony_of_pair() {
        let w = vec![vec![int(0), int(3)], vec![int(5), int(0)]];
        assert_eq!(harmony(&[int(1), int(1)], &w), int(8));
        assert_eq!(harmony(&[int(0), int(0)], &w), int(0));
    }

    #[test]
    fn zero_tail_keeps_code() {
        let g = AxisEncoding::Plain(GammaMap::new(char_word("_ab")).unwrap());
        let s = DottedSequence::parse("a.b").unwrap();
        let mut rng = trial_rng(1, 0);
        let (s2, x, y) = random_compatible_init(&s, 0, &char_word("ab"), &char_word("ab"), &g, &g, &mut rng).unwrap();
        assert_eq!(s2, s);
        let (x0, y0) = godelize_dotted(&s, &g, &g).unwrap();
        assert_eq!((x, y), (x0, y0));
    }

    #[test]
    fn single_trial_has_zero_spread() {
        let erp = synth_erp::<(), _>(1, 9, 4, Execution::Sequential, |_, _| Ok(vec![int(1), int(2)])).unwrap();
        assert_eq!(erp.len(), 4);
        assert!(erp.iter().all(|p| p.std == 0.0));
        assert_eq!(erp[3].mean, int(2));
    }
}
