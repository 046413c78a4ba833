//! `fraccrn` command line: compile circuits, simulate networks, evaluate
//! single units and train the molecular perceptron.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! failure (the integrator gave up, or an output decayed to nothing).

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fraccrn::compiler::{build_sigmoid, build_unit, Negation};
use fraccrn::numfmt::fmt17;
use fraccrn::simulator::integrate_from;
use fraccrn::trainer::{train_with, TrainError};
use fraccrn::{
    compile_with, decode_output, fanout_transform, golden, Circuit, CompileError, CompileOptions, Network, Rates,
    SimConfig, SimError, State, UnitKind,
};

pub use config::{parse_config, ConfigError};

/// Convergence band reported by `train`.
pub const CONVERGED_TOL: f64 = 0.01;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) | SimError::UnknownNet(_) | SimError::UnknownSpecies(_) => {
                CliError::Usage(e.to_string())
            }
            SimError::StiffnessFailure { .. } | SimError::ZeroTotal(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Sim(s) => s.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fraccrn", version, about = "Fractional-coded chemical reaction networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a circuit description into a reaction network.
    Compile(CompileArgs),
    /// Compile one unit (or the sigmoid block), simulate it and compare with the ideal value.
    #[command(allow_negative_numbers = true)]
    Eval(EvalArgs),
    /// Integrate a reaction network and write its trajectory as CSV.
    Simulate(SimulateArgs),
    /// Train the perceptron described by a config file.
    Train(TrainArgs),
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct RateArgs {
    #[arg(long, value_name = "K")]
    pub slow_rate: Option<f64>,
    #[arg(long, value_name = "K")]
    pub fast_rate: Option<f64>,
}

impl RateArgs {
    fn apply(&self, base: Rates) -> Result<Rates, CliError> {
        Rates::new(self.slow_rate.unwrap_or(base.slow), self.fast_rate.unwrap_or(base.fast))
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    fn is_set(&self) -> bool {
        self.slow_rate.is_some() || self.fast_rate.is_some()
    }
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    pub circuit: PathBuf,
    /// Write the network here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Encoding total for inputs and constants.
    #[arg(long, default_value_t = 1.0)]
    pub total: f64,
    #[command(flatten)]
    pub rates: RateArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// multu, nmultu, multb, nmultb, mux, scalerM, copyK or sigmoid.
    pub kind: String,
    pub values: Vec<f64>,
    /// Time limit per phase.
    #[arg(long, default_value_t = 1000.0)]
    pub t_max: f64,
    #[command(flatten)]
    pub rates: RateArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub network: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sample interval; without it only the initial and final states are written.
    #[arg(long, value_name = "DT")]
    pub record_every: Option<f64>,
    /// Time limit per phase.
    #[arg(long, default_value_t = 1000.0)]
    pub t_max: f64,
    /// Run every reaction from t = 0 instead of phase by phase.
    #[arg(long)]
    pub monolithic: bool,
    #[command(flatten)]
    pub rates: RateArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "MODE")]
    pub negation: Option<Negation>,
    /// Run every configured epoch even after convergence.
    #[arg(long)]
    pub no_early_stop: bool,
    #[command(flatten)]
    pub rates: RateArgs,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

/// Write `text` to `path`, or to `stdout` when no path is given.
fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.to_owned(), source }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn say(w: &mut dyn Write, msg: std::fmt::Arguments) {
    // a closed stderr/stdout is not worth failing the run for
    let _ = w.write_fmt(msg);
    let _ = w.write_all(b"\n");
}

pub fn cmd_compile(args: &CompileArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let circuit = Circuit::parse_text(&read(&args.circuit)?)?;
    let opts = CompileOptions { total: args.total, rates: args.rates.apply(Rates::default())? };
    let cc = compile_with(&fanout_transform(&circuit)?, &opts)?;
    emit(args.out.as_deref(), &cc.network.emit_text(), out)?;
    let log: &mut dyn Write = if args.out.is_some() { &mut *out } else { &mut *err };
    say(log, format_args!("species: {}", cc.network.species_count()));
    say(log, format_args!("reactions: {}", cc.network.reactions().len()));
    say(log, format_args!("phases: {}", cc.network.max_phase() + 1));
    Ok(())
}

/// Decoded CRN value and ideal value for every output.
pub fn eval_outputs(args: &EvalArgs) -> Result<Vec<(String, f64, f64)>, CliError> {
    let (circuit, ideal): (Circuit, Vec<f64>) = if args.kind == "sigmoid" {
        let [x] = args.values[..] else {
            return Err(CliError::Usage(format!("sigmoid takes 1 input, got {}", args.values.len())));
        };
        let g = golden::sigmoid_poly(x).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut c = build_sigmoid();
        c.set_value("x", x)?;
        (c, vec![g])
    } else {
        let kind: UnitKind = args.kind.parse()?;
        let c = build_unit(kind, &args.values)?;
        let g = golden::unit(kind, &args.values).map_err(|e| CliError::Usage(e.to_string()))?;
        (c, vec![g; kind.output_arity()])
    };
    let opts = CompileOptions { total: 1.0, rates: args.rates.apply(Rates::default())? };
    let cc = compile_with(&fanout_transform(&circuit)?, &opts)?;
    let cfg = SimConfig { t_max: args.t_max, ..SimConfig::default() };
    let (_, state, _) = integrate_from(&cc.network, &State::initial(&cc.network), &cfg)?;
    cc.outputs
        .iter()
        .zip(ideal)
        .map(|((label, _), g)| Ok((label.to_string(), decode_output(&cc, &state, label.as_str())?, g)))
        .collect()
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    for (label, crn, g) in eval_outputs(args)? {
        say(out, format_args!("{label} crn={} golden={} abs_err={:.3e}", fmt17(crn), fmt17(g), (crn - g).abs()));
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut net = Network::parse_text(&read(&args.network)?).map_err(|e| CliError::Usage(e.to_string()))?;
    if args.rates.is_set() {
        net = net.with_rates(args.rates.apply(Rates::default())?);
    }
    let cfg = SimConfig {
        t_max: args.t_max,
        record_every: args.record_every,
        staged: !args.monolithic,
        ..SimConfig::default()
    };
    let (traj, last, report) = integrate_from(&net, &State::initial(&net), &cfg)?;
    emit(args.out.as_deref(), &traj.to_csv(), out)?;
    let log: &mut dyn Write = if args.out.is_some() { &mut *out } else { &mut *err };
    say(log, format_args!("rows: {}", traj.len()));
    say(log, format_args!("final time: {}", fmt17(last.t)));
    say(log, format_args!("steps: {} accepted, {} rejected", report.steps.accepted, report.steps.rejected));
    say(log, format_args!("steady state: {}", if report.all_steady() { "yes" } else { "no (time limit)" }));
    Ok(())
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let path = &args.config;
    let mut cfg = parse_config(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(n) = args.negation {
        cfg.negation = n;
    }
    if args.no_early_stop {
        cfg.early_stop = false;
    }
    cfg.rates = args.rates.apply(cfg.rates)?;
    let total = cfg.epochs;
    let log = train_with(&cfg, |r| {
        if r.epoch % 100 == 0 {
            say(err, format_args!("epoch {}/{total}: y' = {}", r.epoch, fmt17(r.y_crn)));
        }
    })?;
    emit(args.out.as_deref(), &log.to_csv(), out)?;
    let summary: &mut dyn Write = if args.out.is_some() { &mut *out } else { &mut *err };
    let last = log.final_record().expect("at least one epoch");
    say(summary, format_args!("epochs run: {}", last.epoch));
    say(summary, format_args!("target d': {}", fmt17(log.dprime)));
    say(summary, format_args!("final y': {}", fmt17(last.y_crn)));
    say(summary, format_args!("final |y' - d'|: {:.3e}", (last.y_crn - log.dprime).abs()));
    match log.converged_at(CONVERGED_TOL) {
        Some(e) => say(summary, format_args!("converged (|y' - d'| <= {CONVERGED_TOL}) at epoch {e}")),
        None => say(summary, format_args!("not converged to within {CONVERGED_TOL}")),
    }
    Ok(())
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Compile(a) => cmd_compile(a, out, err),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Simulate(a) => cmd_simulate(a, out, err),
        Command::Train(a) => cmd_train(a, out, err),
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            say(err, format_args!("error: {e}"));
            e.exit_code()
        }
    }
}
