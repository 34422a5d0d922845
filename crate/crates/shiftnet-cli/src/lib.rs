//! Command-line front end: compile specs, run and trace networks, check
//! them against their symbolic machines and synthesize ERPs.

pub mod document;
pub mod examples;
pub mod spec;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::Signed;
use shiftnet::godel::Rational;
use shiftnet::interactive::{GardenPath, IanError, InteractiveNetwork};
use shiftnet::nda::Nda;
use shiftnet::rann::{check_compiled, Compiled, NetworkError, NetworkState};
use shiftnet::symbolic::{apply_vs, DottedSequence};
use shiftnet::Execution;
use thiserror::Error;

use crate::document::{parse_document, render_document};
use crate::spec::{compile_document, vs_document, Bundle, Program};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Rejected(_) => 1,
            CliError::Divergence(_) => 2,
            CliError::Input(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "shiftnet",
    version,
    about = "Compile automata to rational-weight networks and run them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Summary,
    Vs,
    Spec,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a spec and describe the resulting network.
    Compile {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "summary")]
        emit: Emit,
        /// Same as `--emit summary`.
        #[arg(long, conflicts_with = "emit")]
        summary: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate the network from an initial configuration and write CSV.
    Run {
        spec: PathBuf,
        /// Dotted initial configuration, e.g. `q1 . <lo>` or `S.os`.
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// `fixed-point`, `max` or `predicate:<cell label>`; the predicate stops
        /// once the selected cell carries that label.
        #[arg(long, default_value = "fixed-point")]
        halting: String,
        /// Overrides the y unit with `n` evenly spaced values `lo:hi:n`.
        #[arg(long)]
        stimulus_ramp: Option<String>,
        #[arg(long, default_value_t = 6)]
        precision: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Like `run`, but writes every unit after every stage.
    Trace {
        spec: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 6)]
        precision: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs symbolic, shift, map and network side by side.
    Check {
        spec: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Trial-averaged mean activation of an interactive parser network.
    Erp {
        spec: PathBuf,
        /// Comma-separated dotted sentences.
        #[arg(long, default_value = "S.so,S.os")]
        conditions: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        tail_length: usize,
        #[arg(long, default_value_t = 14)]
        steps: usize,
        #[arg(long, default_value_t = 2)]
        onset: usize,
        #[arg(long)]
        sequential: bool,
        #[arg(long, default_value_t = 6)]
        precision: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prints a bundled spec.
    Example {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(examples::NAMES))]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exact decimal rounding of a rational, half away from zero.
pub fn decimal(r: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (r * Rational::from_integer(scale)).round().to_integer();
    let negative = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{s}", "0".repeat(digits + 1 - s.len()));
        }
        s.insert(s.len() - digits, '.');
    }
    if negative {
        s.insert(0, '-');
    }
    s
}

fn parse_rational(text: &str) -> Result<Rational, CliError> {
    let t = text.trim();
    if let Some((int, frac)) = t.split_once('.') {
        let digits = format!("{int}{frac}");
        let n = BigInt::from_str(&digits).map_err(|_| CliError::Input(format!("not a number: `{text}`")))?;
        return Ok(Rational::new(n, BigInt::from(10u32).pow(frac.len() as u32)));
    }
    Rational::from_str(t).map_err(|_| CliError::Input(format!("not a number: `{text}`")))
}

/// `lo:hi:n` into `n` evenly spaced values.
pub fn parse_ramp(text: &str) -> Result<Vec<Rational>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(CliError::Input(format!("ramp must be lo:hi:n, got `{text}`")));
    };
    let lo = parse_rational(lo)?;
    let hi = parse_rational(hi)?;
    let n: usize = n
        .parse()
        .map_err(|_| CliError::Input(format!("ramp count must be an integer, got `{n}`")))?;
    Ok(match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| &lo + (&hi - &lo) * Rational::new(BigInt::from(k), BigInt::from(n - 1)))
            .collect(),
    })
}

fn load(path: &Path) -> Result<Program, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let doc = parse_document(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    compile_document(&doc).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn sink<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match out {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(stdout),
    })
}

fn dotted(text: &str) -> Result<DottedSequence, CliError> {
    DottedSequence::parse(text).map_err(|e| CliError::Input(format!("input `{text}`: {e}")))
}

fn bundle_input(b: &Bundle, text: &str) -> Result<(Rational, Rational), CliError> {
    let s = dotted(text)?.with_fills(b.gx.fill().clone(), b.gy.fill().clone());
    b.nda
        .encode(&s)
        .map_err(|e| CliError::Input(format!("input `{text}`: {e}")))
}

fn decoded(nda: &Nda, x: &Rational, y: &Rational) -> String {
    nda.decode(x, y, 16).map(|s| s.to_string()).unwrap_or_default()
}

fn garden_path(net: InteractiveNetwork) -> Result<GardenPath, CliError> {
    GardenPath::from_network(net)
        .ok_or_else(|| CliError::Input("interactive spec needs strategy, diagnosis, parse and input tapes".into()))
}

fn ian_error(e: IanError) -> CliError {
    match e {
        IanError::Divergence(_) => CliError::Divergence(e.to_string()),
        IanError::Component { .. } => CliError::Rejected(e.to_string()),
        other => CliError::Internal(other.to_string()),
    }
}

enum Stop {
    FixedPoint,
    MaxSteps,
    Cell(String),
}

fn parse_halting(text: &str) -> Result<Stop, CliError> {
    match text {
        "fixed-point" => Ok(Stop::FixedPoint),
        "max" => Ok(Stop::MaxSteps),
        _ => match text.strip_prefix("predicate:") {
            Some(label) => Ok(Stop::Cell(dotted(label)?.to_string())),
            None => Err(CliError::Input(format!("unknown halting condition `{text}`"))),
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn run_single(
    b: &Bundle,
    input: &str,
    steps: usize,
    halting: &str,
    ramp: Option<&str>,
    precision: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let stop = parse_halting(halting)?;
    let ramp = ramp.map(parse_ramp).transpose()?;
    let steps = ramp.as_ref().map_or(steps, Vec::len);
    let (x, y) = bundle_input(b, input)?;
    let mut state = b
        .network
        .init_state(&x, &y)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "step",
        "stimulus",
        "x",
        "y",
        "x_decimal",
        "y_decimal",
        "cell",
        "configuration",
    ])?;
    let record =
        |w: &mut csv::Writer<&mut dyn Write>, t: usize, stim: &str, st: &NetworkState| -> Result<(), CliError> {
            let cell = b
                .nda
                .switch(st.x(), st.y())
                .map(|(i, j)| b.nda.label(i, j).to_string())
                .unwrap_or_default();
            w.write_record([
                t.to_string(),
                stim.to_string(),
                st.x().to_string(),
                st.y().to_string(),
                decimal(st.x(), precision),
                decimal(st.y(), precision),
                cell,
                decoded(&b.nda, st.x(), st.y()),
            ])?;
            Ok(())
        };
    record(&mut w, 0, "", &state)?;
    let mut outcome = Ok(());
    let mut halted = false;
    for t in 0..steps {
        if let Stop::Cell(label) = &stop {
            let here = b
                .nda
                .switch(state.x(), state.y())
                .map(|(i, j)| b.nda.label(i, j).to_string());
            if here.as_deref() == Ok(label.as_str()) {
                halted = true;
                break;
            }
        }
        let stim = ramp.as_ref().map(|r| &r[t]);
        match b.network.macro_step(&state, [None, stim]) {
            Ok(m) => {
                let fixed = m.after_mcl.x() == state.x() && m.after_mcl.y() == state.y();
                state = m.after_mcl;
                record(
                    &mut w,
                    t + 1,
                    &stim.map(|s| decimal(s, precision)).unwrap_or_default(),
                    &state,
                )?;
                if fixed && matches!(stop, Stop::FixedPoint) && ramp.is_none() {
                    halted = true;
                    break;
                }
            }
            Err(e @ NetworkError::NoActiveBranch(_)) => {
                outcome = Err(CliError::Rejected(e.to_string()));
                halted = true;
                break;
            }
            Err(e) => return Err(CliError::Internal(e.to_string())),
        }
    }
    w.flush()?;
    if !halted && !matches!(stop, Stop::MaxSteps) && ramp.is_none() {
        eprintln!("halting condition not met within {steps} steps");
    }
    outcome
}

fn run_interactive(net: InteractiveNetwork, input: &str, steps: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let gp = garden_path(net)?;
    let run = gp.run_sentence(&dotted(input)?, steps).map_err(ian_error)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["pass".to_string()];
    header.extend(gp.network.tapes().iter().map(|t| t.name.clone()));
    header.push("active".into());
    w.write_record(&header)?;
    for (k, words) in run.words.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(
            words
                .iter()
                .map(|ws| ws.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" ")),
        );
        let active = match k {
            0 => String::new(),
            _ => run.passes[k - 1]
                .active
                .iter()
                .flatten()
                .map(|&c| gp.network.components()[c].name.clone())
                .collect::<Vec<_>>()
                .join(" "),
        };
        row.push(active);
        w.write_record(&row)?;
    }
    w.flush()?;
    match run.accepted_after {
        Some(_) => Ok(()),
        None => Err(CliError::Rejected(format!(
            "`{input}` not accepted within {steps} passes"
        ))),
    }
}

fn trace(b: &Bundle, input: &str, steps: usize, precision: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let (x, y) = bundle_input(b, input)?;
    let mut state = b
        .network
        .init_state(&x, &y)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "stage", "unit", "layer", "value", "decimal"])?;
    let units = b.network.units();
    let emit =
        |w: &mut csv::Writer<&mut dyn Write>, t: usize, stage: &str, st: &NetworkState| -> Result<(), CliError> {
            for (u, v) in st.values().iter().enumerate() {
                w.write_record([
                    t.to_string(),
                    stage.to_string(),
                    u.to_string(),
                    units[u].layer.to_string(),
                    v.to_string(),
                    decimal(v, precision),
                ])?;
            }
            Ok(())
        };
    emit(&mut w, 0, "init", &state)?;
    for t in 1..=steps {
        match b.network.macro_step(&state, [None, None]) {
            Ok(m) => {
                emit(&mut w, t, "bsl", &m.after_bsl)?;
                emit(&mut w, t, "ltl", &m.after_ltl)?;
                emit(&mut w, t, "mcl", &m.after_mcl)?;
                state = m.after_mcl;
            }
            Err(e @ NetworkError::NoActiveBranch(_)) => {
                w.flush()?;
                return Err(CliError::Rejected(e.to_string()));
            }
            Err(e) => return Err(CliError::Internal(e.to_string())),
        }
    }
    w.flush()?;
    Ok(())
}

/// Shift, map and network agree for a bare shift.
fn check_vs(b: &Bundle, input: &str, steps: usize) -> Result<String, CliError> {
    let mut seq = dotted(input)?.with_fills(b.gx.fill().clone(), b.gy.fill().clone());
    let (mut x, mut y) = bundle_input(b, input)?;
    let mut state = b
        .network
        .init_state(&x, &y)
        .map_err(|e| CliError::Input(e.to_string()))?;
    for t in 0..steps {
        let shifted = apply_vs(&b.vs, &seq);
        let mapped = b.nda.step(&x, &y);
        let fired = b.network.step(&state);
        match (shifted, mapped, fired) {
            (Ok(s), Ok((x2, y2)), Ok(st)) => {
                let coded = b.nda.encode(&s).map_err(|e| CliError::Internal(e.to_string()))?;
                if coded != (x2.clone(), y2.clone()) || (st.x(), st.y()) != (&x2, &y2) {
                    return Err(CliError::Divergence(format!("step {}", t + 1)));
                }
                seq = s;
                x = x2;
                y = y2;
                state = st;
            }
            (Err(_), Err(_), Err(_)) => return Ok(format!("agreed for {t} steps, all stopped at `{seq}`")),
            _ => return Err(CliError::Divergence(format!("step {}: stop disagreement", t + 1))),
        }
    }
    Ok(format!("agreed for {steps} steps"))
}

fn check(program: Program, input: &str, steps: usize, out: &mut dyn Write) -> Result<(), CliError> {
    match program {
        Program::Single(b) => {
            let Some(machine) = b.machine.clone() else {
                let msg = check_vs(&b, input, steps)?;
                writeln!(out, "ok: {msg}")?;
                return Ok(());
            };
            let seq = dotted(input)?.with_fills(b.gx.fill().clone(), b.gy.fill().clone());
            let config = machine
                .decode(&seq)
                .map_err(|e| CliError::Input(format!("input `{input}`: {e}")))?;
            let compiled = Compiled {
                machine,
                vs: b.vs,
                nda: b.nda,
                network: b.network,
            };
            let report = check_compiled(&compiled, &config, steps);
            match report.divergence {
                Some(d) => Err(CliError::Divergence(format!(
                    "step {} at {}: {}",
                    d.step, d.stage, d.detail
                ))),
                None => {
                    match report.stopped {
                        Some(s) => writeln!(out, "ok: agreed for {} steps, stopped: {s}", report.steps)?,
                        None => writeln!(out, "ok: agreed for {} steps", report.steps)?,
                    }
                    Ok(())
                }
            }
        }
        Program::Interactive(net) => {
            let gp = garden_path(net)?;
            let run = gp.run_sentence(&dotted(input)?, steps).map_err(ian_error)?;
            writeln!(
                out,
                "ok: {} passes agreed, accepted after {:?}, {} errors, {} repairs",
                run.passes.len(),
                run.accepted_after,
                run.diagnosis_errors,
                run.repairs
            )?;
            Ok(())
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Compile {
            spec,
            emit,
            summary,
            out,
        } => {
            let emit = if summary { Emit::Summary } else { emit };
            let program = load(&spec)?;
            let mut o = sink(&out, stdout)?;
            match (emit, program) {
                (Emit::Summary, Program::Single(b)) => {
                    let s = b.summary();
                    write!(
                        o,
                        "kind: {}\nrules: {}\ncells: {} x {}\ndefined: {}\nh: {}\nunits: {}\n",
                        s.kind, s.rules, s.x_cells, s.y_cells, s.defined_cells, s.h, s.units
                    )?;
                }
                (Emit::Summary, Program::Interactive(n)) => {
                    write!(
                        o,
                        "kind: interactive\ntapes: {}\ncomponents: {}\nlayers: {}\nunits: {}\n",
                        n.tapes().len(),
                        n.components().len(),
                        n.layer_count(),
                        n.unit_count()
                    )?;
                }
                (Emit::Vs, Program::Single(b)) => {
                    o.write_all(render_document(&vs_document(&b.vs, &b.gx, &b.gy)).as_bytes())?;
                }
                (Emit::Vs, Program::Interactive(_)) => {
                    return Err(CliError::Input("an interactive spec has no single shift".into()));
                }
                (Emit::Spec, _) => {
                    let text = fs::read_to_string(&spec)?;
                    let doc = parse_document(&text).map_err(|e| CliError::Input(e.to_string()))?;
                    o.write_all(render_document(&doc).as_bytes())?;
                }
            }
            Ok(())
        }
        Command::Run {
            spec,
            input,
            steps,
            halting,
            stimulus_ramp,
            precision,
            out,
        } => {
            let program = load(&spec)?;
            let mut o = sink(&out, stdout)?;
            match program {
                Program::Single(b) => {
                    run_single(&b, &input, steps, &halting, stimulus_ramp.as_deref(), precision, &mut o)
                }
                Program::Interactive(n) => run_interactive(n, &input, steps, &mut o),
            }
        }
        Command::Trace {
            spec,
            input,
            steps,
            precision,
            out,
        } => match load(&spec)? {
            Program::Single(b) => trace(&b, &input, steps, precision, &mut sink(&out, stdout)?),
            Program::Interactive(_) => Err(CliError::Input("trace needs a single-machine spec".into())),
        },
        Command::Check { spec, input, steps } => check(load(&spec)?, &input, steps, stdout),
        Command::Erp {
            spec,
            conditions,
            trials,
            seed,
            tail_length,
            steps,
            onset,
            sequential,
            precision,
            out,
        } => {
            let Program::Interactive(net) = load(&spec)? else {
                return Err(CliError::Input("erp needs an interactive spec".into()));
            };
            let gp = garden_path(net)?;
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let mut o = sink(&out, stdout)?;
            let mut w = csv::Writer::from_writer(&mut o);
            w.write_record(["step", "mean", "std", "condition"])?;
            for cond in conditions.split(',').map(str::trim).filter(|c| !c.is_empty()) {
                let stimulus = dotted(cond)?;
                let erp = gp
                    .erp(&stimulus, trials, tail_length, seed, steps, onset, exec)
                    .map_err(|(k, e)| CliError::Internal(format!("trial {k}: {e}")))?;
                for p in erp {
                    w.write_record([
                        p.step.to_string(),
                        decimal(&p.mean, precision),
                        format!("{:.*}", precision, p.std),
                        cond.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(())
        }
        Command::Example { name, out } => {
            let doc = examples::example(&name).ok_or_else(|| CliError::Input(format!("no example `{name}`")))?;
            sink(&out, stdout)?.write_all(render_document(&doc).as_bytes())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn decimals_round_half_away() {
        assert_eq!(decimal(&Rational::new(1.into(), 3.into()), 4), "0.3333");
        assert_eq!(decimal(&Rational::new(2.into(), 3.into()), 2), "0.67");
        assert_eq!(decimal(&Rational::new((-1).into(), 8.into()), 2), "-0.13");
        assert_eq!(decimal(&Rational::new(5.into(), 1.into()), 0), "5");
        assert_eq!(decimal(&Rational::zero(), 3), "0.000");
    }

    #[test]
    fn ramps_are_even() {
        let r = parse_ramp("0:1:5").unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r[1], Rational::new(1.into(), 4.into()));
        assert_eq!(
            parse_ramp("0.5:0.5:1").unwrap(),
            vec![Rational::new(1.into(), 2.into())]
        );
        assert!(parse_ramp("0:1").is_err());
    }
}
