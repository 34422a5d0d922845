//! Three-layer rational-weight recurrent networks built from an NDA.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::automata::{AutomatonError, Machine, MachineConfiguration, StepError};
use crate::godel::{int, Rational};
use crate::nda::{Interval, Nda, NdaError, Point};
use crate::symbolic::{apply_vs, SymbolicError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("no branch is active for {0}")]
    NoActiveBranch(Point),
    #[error("activation {0} is outside [0, 1]")]
    OutOfRange(Rational),
    #[error("halting condition not met within {0} steps")]
    MaxStepsExceeded(usize),
    #[error(transparent)]
    Nda(#[from] NdaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    MclX,
    MclY,
    BslX,
    BslY,
    LtlX,
    LtlY,
    Bias,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::MclX => "mcl_x",
            Layer::MclY => "mcl_y",
            Layer::BslX => "bsl_x",
            Layer::BslY => "bsl_y",
            Layer::LtlX => "ltl_x",
            Layer::LtlY => "ltl_y",
            Layer::Bias => "bias",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Heaviside,
    Ramp,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub layer: Layer,
    pub activation: Activation,
    /// Interval index for branch-selection units, `(row, col)` for LTL units.
    pub cell: Option<(usize, usize)>,
}

pub const MCL_X: usize = 0;
pub const MCL_Y: usize = 1;

/// Compiled network. Weights are kept as incoming lists; `weight_matrix`
/// expands them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    units: Vec<Unit>,
    incoming: Vec<Vec<(usize, Rational)>>,
    h: Rational,
    m: usize,
    n: usize,
    defined: Vec<bool>,
    x_cells: Vec<Interval>,
    y_cells: Vec<Interval>,
}

/// Activation of every unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkState(pub Vec<Rational>);

impl NetworkState {
    pub fn x(&self) -> &Rational {
        &self.0[MCL_X]
    }

    pub fn y(&self) -> &Rational {
        &self.0[MCL_Y]
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }
}

/// Values after each of the three stages of a macro step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroStep {
    pub after_bsl: NetworkState,
    pub after_ltl: NetworkState,
    pub after_mcl: NetworkState,
}

pub fn heaviside(v: &Rational) -> Rational {
    if v.is_negative() {
        Rational::zero()
    } else {
        Rational::one()
    }
}

pub fn ramp(v: Rational) -> Rational {
    if v.is_negative() {
        Rational::zero()
    } else {
        v
    }
}

/// Smallest gating constant that keeps unselected LTL units silent.
pub fn required_h(nda: &Nda) -> Rational {
    let top = nda.max_branch_top().unwrap_or_else(Rational::zero);
    let h = int(2) * if top.is_negative() { Rational::zero() } else { top };
    h.max(int(2))
}

pub fn nda_to_rann(nda: &Nda) -> Network {
    Network::from_nda(nda)
}

impl Network {
    pub fn from_nda(nda: &Nda) -> Self {
        Self::with_h(nda, required_h(nda))
    }

    /// Builds with a given gating constant, which must be at least `required_h`.
    pub fn with_h(nda: &Nda, h: Rational) -> Self {
        let (m, n) = nda.dims();
        let half = &h / int(2);
        let mut units = vec![
            Unit {
                layer: Layer::MclX,
                activation: Activation::Ramp,
                cell: None,
            },
            Unit {
                layer: Layer::MclY,
                activation: Activation::Ramp,
                cell: None,
            },
        ];
        for i in 0..m {
            units.push(Unit {
                layer: Layer::BslX,
                activation: Activation::Heaviside,
                cell: Some((i, 0)),
            });
        }
        for j in 0..n {
            units.push(Unit {
                layer: Layer::BslY,
                activation: Activation::Heaviside,
                cell: Some((0, j)),
            });
        }
        for i in 0..m {
            for j in 0..n {
                for layer in [Layer::LtlX, Layer::LtlY] {
                    units.push(Unit {
                        layer,
                        activation: Activation::Ramp,
                        cell: Some((i, j)),
                    });
                }
            }
        }
        units.push(Unit {
            layer: Layer::Bias,
            activation: Activation::Constant,
            cell: None,
        });
        let bias = units.len() - 1;
        let bx = |i: usize| 2 + i;
        let by = |j: usize| 2 + m + j;
        let ltl = |i: usize, j: usize| 2 + m + n + 2 * (i * n + j);

        let mut incoming: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); units.len()];
        for (i, t) in nda.x_axis().thresholds().into_iter().enumerate() {
            incoming[bx(i)] = vec![(MCL_X, Rational::one()), (bias, -t)];
        }
        for (j, t) in nda.y_axis().thresholds().into_iter().enumerate() {
            incoming[by(j)] = vec![(MCL_Y, Rational::one()), (bias, -t)];
        }
        let mut defined = vec![false; m * n];
        for i in 0..m {
            for j in 0..n {
                let Some(b) = nda.branch(i, j) else { continue };
                defined[i * n + j] = true;
                let mut gate = vec![(bx(i), half.clone()), (by(j), half.clone())];
                if i + 1 < m {
                    gate.push((bx(i + 1), -half.clone()));
                }
                if j + 1 < n {
                    gate.push((by(j + 1), -half.clone()));
                }
                let mut tx = vec![(MCL_X, b.slope_x.clone()), (bias, &b.offset_x - &h)];
                tx.extend(gate.iter().cloned());
                let mut ty = vec![(MCL_Y, b.slope_y.clone()), (bias, &b.offset_y - &h)];
                ty.extend(gate);
                incoming[ltl(i, j)] = tx;
                incoming[ltl(i, j) + 1] = ty;
                incoming[MCL_X].push((ltl(i, j), Rational::one()));
                incoming[MCL_Y].push((ltl(i, j) + 1, Rational::one()));
            }
        }
        Network {
            units,
            incoming,
            h,
            m,
            n,
            defined,
            x_cells: nda.x_intervals().to_vec(),
            y_cells: nda.y_intervals().to_vec(),
        }
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn h(&self) -> &Rational {
        &self.h
    }

    /// `(m, n)`: number of x and y branch-selection units.
    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn bias_unit(&self) -> usize {
        self.units.len() - 1
    }

    pub fn bsl_x_unit(&self, i: usize) -> usize {
        2 + i
    }

    pub fn bsl_y_unit(&self, j: usize) -> usize {
        2 + self.m + j
    }

    /// Index of the x unit of the LTL pair for cell `(i, j)`; the y unit follows it.
    pub fn ltl_unit(&self, i: usize, j: usize) -> usize {
        2 + self.m + self.n + 2 * (i * self.n + j)
    }

    pub fn is_defined(&self, i: usize, j: usize) -> bool {
        self.defined[i * self.n + j]
    }

    pub fn incoming(&self, unit: usize) -> &[(usize, Rational)] {
        &self.incoming[unit]
    }

    /// Dense matrix, `w[to][from]`.
    pub fn weight_matrix(&self) -> Vec<Vec<Rational>> {
        let k = self.units.len();
        let mut w = vec![vec![Rational::zero(); k]; k];
        for (to, ins) in self.incoming.iter().enumerate() {
            for (from, v) in ins {
                w[to][*from] += v;
            }
        }
        w
    }

    fn net_input(&self, unit: usize, values: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (from, w) in &self.incoming[unit] {
            let a = &values[*from];
            if a.is_zero() {
                continue;
            }
            if a.is_one() {
                acc += w;
            } else {
                acc += w * a;
            }
        }
        acc
    }

    pub fn init_state(&self, x: &Rational, y: &Rational) -> Result<NetworkState, NetworkError> {
        for v in [x, y] {
            if v.is_negative() || v > &Rational::one() {
                return Err(NetworkError::OutOfRange(v.clone()));
            }
        }
        let mut values = vec![Rational::zero(); self.units.len()];
        values[MCL_X] = x.clone();
        values[MCL_Y] = y.clone();
        let bias = self.bias_unit();
        values[bias] = Rational::one();
        Ok(NetworkState(values))
    }

    /// Branch-selection stage: thresholds on the MCL values.
    pub fn bsl_stage(&self, values: &mut [Rational]) {
        for u in 2..2 + self.m + self.n {
            values[u] = heaviside(&self.net_input(u, values));
        }
    }

    /// Gating input reaching the LTL pair of `(i, j)` from the BSL.
    pub fn gate_sum(&self, values: &[Rational], i: usize, j: usize) -> Rational {
        let half = &self.h / int(2);
        let on = |u: usize| values[u].is_one();
        let mut b = Rational::zero();
        if on(self.bsl_x_unit(i)) && !(i + 1 < self.m && on(self.bsl_x_unit(i + 1))) {
            b += &half;
        }
        if on(self.bsl_y_unit(j)) && !(j + 1 < self.n && on(self.bsl_y_unit(j + 1))) {
            b += &half;
        }
        b
    }

    /// The cell singled out by the branch-selection values.
    pub fn selected_cell(&self, values: &[Rational]) -> Option<(usize, usize)> {
        let row = (0..self.m).rev().find(|&i| values[self.bsl_x_unit(i)].is_one())?;
        let col = (0..self.n).rev().find(|&j| values[self.bsl_y_unit(j)].is_one())?;
        Some((row, col))
    }

    /// LTL stage; `extra` is added to the net input of every defined LTL
    /// unit (used by external gating).
    pub fn ltl_stage(&self, values: &mut [Rational], extra: Option<&Rational>) {
        for i in 0..self.m {
            for j in 0..self.n {
                let u = self.ltl_unit(i, j);
                for k in [u, u + 1] {
                    let mut net = self.net_input(k, values);
                    if self.defined[i * self.n + j] {
                        if let Some(e) = extra {
                            net += e;
                        }
                    }
                    values[k] = ramp(net);
                }
            }
        }
    }

    /// Sum of the LTL outputs per axis, without writing them back.
    pub fn mcl_output(&self, values: &[Rational]) -> (Rational, Rational) {
        (ramp(self.net_input(MCL_X, values)), ramp(self.net_input(MCL_Y, values)))
    }

    pub fn mcl_stage(&self, values: &mut [Rational]) {
        let (x, y) = self.mcl_output(values);
        values[MCL_X] = x;
        values[MCL_Y] = y;
    }

    /// Whether `(x, y)` lies in the cell the gating would select.
    pub fn check_selection(&self, values: &[Rational]) -> Result<(), NetworkError> {
        let (x, y) = (&values[MCL_X], &values[MCL_Y]);
        let fail = || NetworkError::NoActiveBranch(Point::new(x, y));
        let (i, j) = self.selected_cell(values).ok_or_else(fail)?;
        if !self.x_cells[i].contains(x) || !self.y_cells[j].contains(y) || !self.is_defined(i, j) {
            return Err(fail());
        }
        Ok(())
    }

    /// One machine step: optional MCL overrides, then BSL, LTL and MCL.
    pub fn macro_step(&self, st: &NetworkState, overrides: [Option<&Rational>; 2]) -> Result<MacroStep, NetworkError> {
        let mut values = st.0.clone();
        for (unit, o) in [MCL_X, MCL_Y].into_iter().zip(overrides) {
            if let Some(v) = o {
                values[unit] = v.clone();
            }
        }
        self.bsl_stage(&mut values);
        self.check_selection(&values)?;
        let after_bsl = NetworkState(values.clone());
        self.ltl_stage(&mut values, None);
        let after_ltl = NetworkState(values.clone());
        self.mcl_stage(&mut values);
        Ok(MacroStep {
            after_bsl,
            after_ltl,
            after_mcl: NetworkState(values),
        })
    }

    pub fn step(&self, st: &NetworkState) -> Result<NetworkState, NetworkError> {
        Ok(self.macro_step(st, [None, None])?.after_mcl)
    }

    /// Iterates until the halting condition fires. `cap` bounds the run for
    /// the fixed-point and predicate conditions.
    pub fn run(&self, init: NetworkState, halting: &Halting, cap: usize) -> Result<Run, NetworkError> {
        let mut steps = Vec::new();
        let mut current = init.clone();
        loop {
            if let Halting::MaxSteps(n) = halting {
                if steps.len() >= *n {
                    return Ok(Run {
                        init,
                        steps,
                        reason: HaltReason::MaxSteps,
                    });
                }
            } else if steps.len() >= cap {
                return Err(NetworkError::MaxStepsExceeded(cap));
            }
            if let Halting::Homunculus(p) = halting {
                if p(&current) {
                    return Ok(Run {
                        init,
                        steps,
                        reason: HaltReason::Predicate,
                    });
                }
            }
            let next = self.macro_step(&current, [None, None])?;
            let fixed = next.after_mcl.x() == current.x() && next.after_mcl.y() == current.y();
            current = next.after_mcl.clone();
            steps.push(next);
            if fixed && matches!(halting, Halting::FixedPoint) {
                return Ok(Run {
                    init,
                    steps,
                    reason: HaltReason::FixedPoint,
                });
            }
        }
    }
}

pub enum Halting {
    FixedPoint,
    Homunculus(Box<dyn Fn(&NetworkState) -> bool + Send + Sync>),
    MaxSteps(usize),
}

impl fmt::Debug for Halting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Halting::FixedPoint => f.write_str("FixedPoint"),
            Halting::Homunculus(_) => f.write_str("Homunculus(..)"),
            Halting::MaxSteps(n) => write!(f, "MaxSteps({n})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    FixedPoint,
    Predicate,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub init: NetworkState,
    pub steps: Vec<MacroStep>,
    pub reason: HaltReason,
}

impl Run {
    pub fn last(&self) -> &NetworkState {
        self.steps.last().map(|s| &s.after_mcl).unwrap_or(&self.init)
    }
}

// ---------------------------------------------------------------------------
// Commutativity

/// Where and how the four simulations first disagreed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub step: usize,
    pub stage: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutativityReport {
    /// Steps on which all four simulations produced matching successors.
    pub steps: usize,
    /// Set when all four agreed that the machine stopped.
    pub stopped: Option<String>,
    pub divergence: Option<Divergence>,
}

impl CommutativityReport {
    pub fn is_ok(&self) -> bool {
        self.divergence.is_none()
    }
}

#[derive(Debug, Error)]
enum CompileError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Nda(#[from] NdaError),
}

/// A machine compiled through every stage.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub machine: Machine,
    pub vs: crate::symbolic::VersatileShift,
    pub nda: Nda,
    pub network: Network,
}

impl Compiled {
    pub fn new(machine: Machine) -> Result<Self, String> {
        Self::build(machine).map_err(|e| e.to_string())
    }

    fn build(machine: Machine) -> Result<Self, CompileError> {
        let vs = machine.to_vs(true)?;
        let (gx, gy) = machine.default_encodings()?;
        let nda = Nda::from_vs(&vs, &gx, &gy)?;
        let network = Network::from_nda(&nda);
        Ok(Compiled {
            machine,
            vs,
            nda,
            network,
        })
    }
}

fn diverge(step: usize, stage: &'static str, detail: impl Into<String>) -> CommutativityReport {
    CommutativityReport {
        steps: step,
        stopped: None,
        divergence: Some(Divergence {
            step,
            stage,
            detail: detail.into(),
        }),
    }
}

/// Runs the symbolic machine, its shift, its NDA and its network side by side.
pub fn check_commutativity(machine: &Machine, config: &MachineConfiguration, n_steps: usize) -> CommutativityReport {
    match Compiled::new(machine.clone()) {
        Ok(c) => check_compiled(&c, config, n_steps),
        Err(e) => diverge(0, "compile", e),
    }
}

pub fn check_compiled(c: &Compiled, config: &MachineConfiguration, n_steps: usize) -> CommutativityReport {
    let machine = &c.machine;
    let mut conf = config.clone();
    let mut seq = match machine.encode(&conf) {
        Ok(s) => s,
        Err(e) => return diverge(0, "encode", e.to_string()),
    };
    let (mut x, mut y) = match c.nda.encode(&seq) {
        Ok(p) => p,
        Err(e) => return diverge(0, "godel", e.to_string()),
    };
    let mut state = match c.network.init_state(&x, &y) {
        Ok(s) => s,
        Err(e) => return diverge(0, "network", e.to_string()),
    };
    for step in 0..n_steps {
        let sym = machine.step(&conf);
        let shifted = apply_vs(&c.vs, &seq);
        let mapped = c.nda.step(&x, &y);
        let fired = c.network.step(&state);
        match sym {
            Ok(next) => {
                let expected = match machine.encode(&next) {
                    Ok(s) => s,
                    Err(e) => return diverge(step, "encode", e.to_string()),
                };
                let shifted = match shifted {
                    Ok(s) if s == expected => s,
                    Ok(s) => return diverge(step, "vs", format!("expected {expected}, shift gave {s}")),
                    Err(e) => return diverge(step, "vs", e.to_string()),
                };
                let point = match c.nda.encode(&shifted) {
                    Ok(p) => p,
                    Err(e) => return diverge(step, "godel", e.to_string()),
                };
                match mapped {
                    Ok(p) if p == point => {}
                    Ok(p) => return diverge(step, "nda", format!("expected {point:?}, map gave {p:?}")),
                    Err(e) => return diverge(step, "nda", e.to_string()),
                }
                let fired = match fired {
                    Ok(s) if (s.x(), s.y()) == (&point.0, &point.1) => s,
                    Ok(s) => {
                        return diverge(
                            step,
                            "network",
                            format!("expected {point:?}, network gave ({}, {})", s.x(), s.y()),
                        )
                    }
                    Err(e) => return diverge(step, "network", e.to_string()),
                };
                let max_len = expected.left().len().max(expected.right().len()) + 1;
                match c.nda.decode(fired.x(), fired.y(), max_len) {
                    Ok(d) if d == shifted => {}
                    Ok(d) => return diverge(step, "decode", format!("decoded {d}, expected {shifted}")),
                    Err(e) => return diverge(step, "decode", e.to_string()),
                }
                conf = next;
                seq = shifted;
                (x, y) = point;
                state = fired;
            }
            Err(StepError::KindMismatch) => return diverge(step, "symbolic", "configuration kind mismatch"),
            Err(stop) => {
                let vs_stops = match &shifted {
                    Err(SymbolicError::NoRule(_)) => true,
                    Ok(s) => s == &seq,
                    Err(_) => false,
                };
                let nda_stops = match &mapped {
                    Err(NdaError::UndefinedBranch { .. }) => true,
                    Ok(p) => p == &(x.clone(), y.clone()),
                    Err(_) => false,
                };
                let net_stops = match &fired {
                    Err(NetworkError::NoActiveBranch(_)) => true,
                    Ok(s) => (s.x(), s.y()) == (&x, &y),
                    Err(_) => false,
                };
                if !vs_stops {
                    return diverge(
                        step,
                        "vs",
                        format!("machine stopped ({stop}) but shift gave {shifted:?}"),
                    );
                }
                if !nda_stops {
                    return diverge(step, "nda", format!("machine stopped ({stop}) but map gave {mapped:?}"));
                }
                if !net_stops {
                    return diverge(
                        step,
                        "network",
                        format!("machine stopped ({stop}) but network gave {fired:?}"),
                    );
                }
                return CommutativityReport {
                    steps: step,
                    stopped: Some(stop.to_string()),
                    divergence: None,
                };
            }
        }
    }
    CommutativityReport {
        steps: n_steps,
        stopped: None,
        divergence: None,
    }
}
