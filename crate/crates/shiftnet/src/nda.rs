//! Piecewise-affine maps on a rectangular partition of the unit square.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::godel::{godelize_dotted, AxisEncoding, Code, GodelError, Rational};
use crate::symbolic::{
    apply_vs, domain_words, DottedSequence, DottedWord, Rule, Symbol, SymbolicError, VersatileShift,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NdaError {
    #[error("cylinders of `{0}` and `{1}` overlap")]
    OverlappingPrefixes(String, String),
    #[error("point {0} lies in no cell")]
    NoCell(Point),
    #[error("cell ({row}, {col}) has no branch")]
    UndefinedBranch { row: usize, col: usize },
    #[error("branch for `{0}` disagrees with the symbolic step")]
    BranchMismatch(DottedWord),
    #[error("branch for `{0}` leaves the unit square")]
    ImageOutOfRange(DottedWord),
    #[error(transparent)]
    Godel(#[from] GodelError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// A point of the unit square, boxed to keep error values small.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point(pub Box<(Rational, Rational)>);

impl Point {
    pub fn new(x: &Rational, y: &Rational) -> Self {
        Point(Box::new((x.clone(), y.clone())))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0 .0, self.0 .1)
    }
}

/// Half-open interval `[lo, hi)`, closed at 1 when `hi` is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && (v < &self.hi || (v == &self.hi && self.hi.is_one()))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let close = if self.hi.is_one() { ']' } else { ')' };
        write!(f, "[{}, {}{close}", self.lo, self.hi)
    }
}

/// `(x, y) -> (a_x + λ_x x, a_y + λ_y y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap2D {
    pub offset_x: Rational,
    pub offset_y: Rational,
    pub slope_x: Rational,
    pub slope_y: Rational,
}

impl AffineMap2D {
    pub fn identity() -> Self {
        AffineMap2D {
            offset_x: Rational::zero(),
            offset_y: Rational::zero(),
            slope_x: Rational::one(),
            slope_y: Rational::one(),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn apply(&self, x: &Rational, y: &Rational) -> (Rational, Rational) {
        (&self.offset_x + &self.slope_x * x, &self.offset_y + &self.slope_y * y)
    }
}

/// One axis of the partition: cells sorted by lower bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub encoding: AxisEncoding,
    pub intervals: Vec<Interval>,
    /// DoD content of each cell, nearest-dot-first.
    pub words: Vec<Vec<Symbol>>,
}

impl Axis {
    fn build(encoding: &AxisEncoding, slots: &[Vec<Symbol>]) -> Result<Self, NdaError> {
        let mut cells = Vec::new();
        for w in domain_words(slots) {
            let (lo, hi) = encoding.cylinder(&w)?;
            cells.push((Interval { lo, hi }, w));
        }
        cells.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
        for pair in cells.windows(2) {
            if pair[1].0.lo < pair[0].0.hi {
                return Err(NdaError::OverlappingPrefixes(render(&pair[0].1), render(&pair[1].1)));
            }
        }
        let (intervals, words) = cells.into_iter().unzip();
        Ok(Axis {
            encoding: encoding.clone(),
            intervals,
            words,
        })
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Index of the interval holding `v`.
    pub fn locate(&self, v: &Rational) -> Option<usize> {
        let i = self.intervals.partition_point(|iv| &iv.lo <= v);
        (i > 0 && self.intervals[i - 1].contains(v)).then(|| i - 1)
    }

    /// Lower bounds, used as branch-selection thresholds.
    pub fn thresholds(&self) -> Vec<Rational> {
        self.intervals.iter().map(|iv| iv.lo.clone()).collect()
    }

    fn index_of(&self, w: &[Symbol]) -> Option<usize> {
        self.words.iter().position(|x| x == w)
    }
}

fn render(w: &[Symbol]) -> String {
    w.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
}

/// Nonlinear dynamical automaton compiled from a versatile shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nda {
    x_axis: Axis,
    y_axis: Axis,
    branches: Vec<Option<AffineMap2D>>,
    labels: Vec<DottedWord>,
}

/// Per-axis map carrying the code of `key ++ tail` to that of `settled ++ tail`.
fn axis_branch(enc: &AxisEncoding, key: &[Symbol], settled: &[Symbol]) -> Result<(Rational, Rational), GodelError> {
    let slope = enc.scale(settled) / enc.scale(key);
    let offset = enc.offset(settled)? - &slope * enc.offset(key)?;
    Ok((offset, slope))
}

/// Affine map of one rule, built from the pop of the key, the push of the
/// replacement and the dot shift.
pub fn compile_branch(
    rule: &Rule,
    key: &DottedWord,
    gx: &AxisEncoding,
    gy: &AxisEncoding,
) -> Result<AffineMap2D, NdaError> {
    let settled = rule.settled();
    let (offset_x, slope_x) = axis_branch(gx, &key.left, &settled.left)?;
    let (offset_y, slope_y) = axis_branch(gy, &key.right, &settled.right)?;
    Ok(AffineMap2D {
        offset_x,
        offset_y,
        slope_x,
        slope_y,
    })
}

/// The partition of a shift's domain under the given encodings.
pub fn build_partition(vs: &VersatileShift, gx: &AxisEncoding, gy: &AxisEncoding) -> Result<(Axis, Axis), NdaError> {
    Ok((Axis::build(gx, vs.left_domain())?, Axis::build(gy, vs.right_domain())?))
}

pub fn vs_to_nda(vs: &VersatileShift, gx: &AxisEncoding, gy: &AxisEncoding) -> Result<Nda, NdaError> {
    Nda::from_vs(vs, gx, gy)
}

impl Nda {
    pub fn from_vs(vs: &VersatileShift, gx: &AxisEncoding, gy: &AxisEncoding) -> Result<Self, NdaError> {
        let (x_axis, y_axis) = build_partition(vs, gx, gy)?;
        let (m, n) = (x_axis.len(), y_axis.len());
        let mut branches = vec![None; m * n];
        let mut labels = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                labels.push(DottedWord::new(x_axis.words[i].clone(), y_axis.words[j].clone()));
            }
        }
        for (key, rule) in vs.rules() {
            let (Some(i), Some(j)) = (x_axis.index_of(&key.left), y_axis.index_of(&key.right)) else {
                continue;
            };
            let branch = compile_branch(rule, key, gx, gy)?;
            spot_check(vs, key, &branch, gx, gy)?;
            branches[i * n + j] = Some(branch);
        }
        Ok(Nda {
            x_axis,
            y_axis,
            branches,
            labels,
        })
    }

    pub fn x_axis(&self) -> &Axis {
        &self.x_axis
    }

    pub fn y_axis(&self) -> &Axis {
        &self.y_axis
    }

    pub fn x_intervals(&self) -> &[Interval] {
        &self.x_axis.intervals
    }

    pub fn y_intervals(&self) -> &[Interval] {
        &self.y_axis.intervals
    }

    /// `(m, n)`: number of x and y intervals.
    pub fn dims(&self) -> (usize, usize) {
        (self.x_axis.len(), self.y_axis.len())
    }

    pub fn branch(&self, row: usize, col: usize) -> Option<&AffineMap2D> {
        self.branches[row * self.y_axis.len() + col].as_ref()
    }

    pub fn label(&self, row: usize, col: usize) -> &DottedWord {
        &self.labels[row * self.y_axis.len() + col]
    }

    pub fn defined_cells(&self) -> usize {
        self.branches.iter().filter(|b| b.is_some()).count()
    }

    pub fn encode(&self, s: &DottedSequence) -> Result<(Rational, Rational), NdaError> {
        let (x, y) = godelize_dotted(s, &self.x_axis.encoding, &self.y_axis.encoding)?;
        Ok((x.into_value(), y.into_value()))
    }

    /// Shortest dotted sequence with the given codes; sides carry the
    /// encodings' fill symbols.
    pub fn decode(&self, x: &Rational, y: &Rational, max_len: usize) -> Result<DottedSequence, NdaError> {
        let left = self.x_axis.encoding.decode(&Code::new(x.clone())?, max_len)?;
        let right = self.y_axis.encoding.decode(&Code::new(y.clone())?, max_len)?;
        Ok(DottedSequence::new(
            left,
            right,
            self.x_axis.encoding.fill().clone(),
            self.y_axis.encoding.fill().clone(),
        ))
    }

    pub fn switch(&self, x: &Rational, y: &Rational) -> Result<(usize, usize), NdaError> {
        match (self.x_axis.locate(x), self.y_axis.locate(y)) {
            (Some(i), Some(j)) => Ok((i, j)),
            _ => Err(NdaError::NoCell(Point::new(x, y))),
        }
    }

    pub fn step(&self, x: &Rational, y: &Rational) -> Result<(Rational, Rational), NdaError> {
        let (row, col) = self.switch(x, y)?;
        let b = self.branch(row, col).ok_or(NdaError::UndefinedBranch { row, col })?;
        Ok(b.apply(x, y))
    }

    /// Iterates up to `steps` times, stopping early on the first error.
    pub fn orbit(&self, x: Rational, y: Rational, steps: usize) -> (Vec<(Rational, Rational)>, Option<NdaError>) {
        let mut out = vec![(x, y)];
        for _ in 0..steps {
            let (x, y) = out.last().expect("orbit is non-empty");
            match self.step(x, y) {
                Ok(p) => out.push(p),
                Err(e) => return (out, Some(e)),
            }
        }
        (out, None)
    }

    /// Largest `a + λ` over all defined branches and both axes.
    pub fn max_branch_top(&self) -> Option<Rational> {
        self.branches
            .iter()
            .flatten()
            .flat_map(|b| [&b.offset_x + &b.slope_x, &b.offset_y + &b.slope_y])
            .max()
    }
}

pub fn switch(nda: &Nda, x: &Rational, y: &Rational) -> Result<(usize, usize), NdaError> {
    nda.switch(x, y)
}

pub fn step_nda(nda: &Nda, x: &Rational, y: &Rational) -> Result<(Rational, Rational), NdaError> {
    nda.step(x, y)
}

/// Corners of the cell must land in the unit square, and sample sequences
/// in the cell must agree with the symbolic step.
fn spot_check(
    vs: &VersatileShift,
    key: &DottedWord,
    branch: &AffineMap2D,
    gx: &AxisEncoding,
    gy: &AxisEncoding,
) -> Result<(), NdaError> {
    let (xlo, xhi) = gx.cylinder(&key.left)?;
    let (ylo, yhi) = gy.cylinder(&key.right)?;
    let unit = |v: &Rational| !v.is_negative() && v <= &Rational::one();
    for x in [&xlo, &xhi] {
        for y in [&ylo, &yhi] {
            let (x2, y2) = branch.apply(x, y);
            if !unit(&x2) || !unit(&y2) {
                return Err(NdaError::ImageOutOfRange(key.clone()));
            }
        }
    }
    let tails_x = sample_tails(gx);
    let tails_y = sample_tails(gy);
    for tx in &tails_x {
        for ty in &tails_y {
            let mut left = key.left.clone();
            left.extend(tx.iter().cloned());
            let mut right = key.right.clone();
            right.extend(ty.iter().cloned());
            let s = DottedSequence::new(left, right, gx.fill().clone(), gy.fill().clone());
            let image = apply_vs(vs, &s)?;
            let (x, y) = godelize_dotted(&s, gx, gy)?;
            let (x2, y2) = godelize_dotted(&image, gx, gy)?;
            if branch.apply(x.value(), y.value()) != (x2.into_value(), y2.into_value()) {
                return Err(NdaError::BranchMismatch(key.clone()));
            }
        }
    }
    Ok(())
}

/// The empty tail and a two-symbol tail using the largest tail digits.
fn sample_tails(enc: &AxisEncoding) -> Vec<Vec<Symbol>> {
    let syms = enc.tail_map().symbols();
    let mut tails = vec![vec![]];
    if syms.len() > 1 {
        let last = syms[syms.len() - 1].clone();
        let first = syms[1].clone();
        tails.push(vec![last, first]);
    }
    tails
}
