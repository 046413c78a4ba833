//! Epoch-by-epoch training of the molecular perceptron.
//!
//! One epoch compiles the whole forward + backward circuit with the current
//! weights as constants, runs it to completion, and decodes `y'` and the
//! updated weights. The host carries the weights into the next epoch by
//! re-encoding them at total 1; no molecular delay element is modelled.

use thiserror::Error;

use crate::compiler::builders::{delta_w_into, inner_product_into, sigmoid_into, weight_update_into};
use crate::compiler::{compile_with, fanout_transform, Circuit, CompileError, CompileOptions, Negation, Operand};
use crate::crn::Rates;
use crate::fraccode::{Value, DEFAULT_TOTAL};
use crate::golden::{self, GoldenError};
use crate::numfmt::fmt17;
use crate::simulator::{decode_output, integrate_from, SimConfig, SimError, SimReport, State, Trajectory};

/// Stop once the CRN output is this close to the target (unless disabled).
pub const EARLY_STOP_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Golden(#[from] GoldenError),
}

/// Desired output, either raw or already remapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Desired(f64),
    DesiredPrime(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronConfig {
    /// Inputs, bias last (`x_N = 1`).
    pub x: Vec<f64>,
    pub w0: Vec<f64>,
    pub target: Target,
    pub epochs: usize,
    pub sim: SimConfig,
    pub rates: Rates,
    pub negation: Negation,
    pub early_stop: bool,
}

impl PerceptronConfig {
    /// Defaults for everything except the data.
    pub fn new(x: Vec<f64>, w0: Vec<f64>, target: Target, epochs: usize) -> Self {
        PerceptronConfig {
            x,
            w0,
            target,
            epochs,
            sim: SimConfig::default(),
            rates: Rates::default(),
            negation: Negation::default(),
            early_stop: true,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn dprime(&self) -> Result<f64, TrainError> {
        match self.target {
            Target::Desired(d) => Ok(golden::dprime(d, self.n())?),
            Target::DesiredPrime(p) if (0.0..=1.0).contains(&p) => Ok(p),
            Target::DesiredPrime(p) => Err(TrainError::Config(format!("desired_prime {p} is outside [0, 1]"))),
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if self.x.is_empty() {
            return bad("at least one input is required".into());
        }
        if self.w0.len() != self.x.len() {
            return bad(format!("{} inputs but {} weights", self.x.len(), self.w0.len()));
        }
        for (name, v) in self.x.iter().map(|v| ("input", v)).chain(self.w0.iter().map(|v| ("weight", v))) {
            if !(-1.0..=1.0).contains(v) {
                return bad(format!("{name} {v} is outside [-1, 1]"));
            }
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        self.sim.validate()?;
        self.dprime()?;
        Ok(())
    }
}

fn weight_net(i: usize) -> String {
    format!("w{i}")
}

fn new_weight_net(i: usize) -> String {
    format!("w_new{i}")
}

/// Forward pass, weight-change block and one update block per weight,
/// fanned out. Inputs `x1..xN`, constants `w1..wN` and `dprime`; outputs
/// `y` and `w_new1..w_newN`.
pub fn build_perceptron_circuit(cfg: &PerceptronConfig) -> Result<Circuit, TrainError> {
    cfg.validate()?;
    let mut c = build_forward(cfg)?;
    let y = c.output_net("y").expect("forward output").clone();
    let xs: Vec<Operand> = (1..=cfg.n()).map(|i| Operand::from(crate::NetId::new(format!("x{i}")).unwrap())).collect();
    let dprime = c.constant("dprime", Value::bipolar(cfg.dprime()?).map_err(CompileError::from)?)?;
    let nets = delta_w_into(&mut c, &y, &dprime, &xs, cfg.negation, "bp_")?;
    for (i, dw) in nets.dw.iter().enumerate() {
        let w = crate::NetId::new(weight_net(i + 1)).unwrap();
        let out = weight_update_into(&mut c, (&w).into(), dw.into(), &format!("up{}_", i + 1), &new_weight_net(i + 1))?;
        c.mark_output(&out)?;
    }
    Ok(fanout_transform(&c)?)
}

/// Inference only: inner product and sigmoid, output `y` (not fanned out).
pub fn build_forward(cfg: &PerceptronConfig) -> Result<Circuit, TrainError> {
    let mut c = Circuit::new();
    let bip = |v: f64| Value::bipolar(v).map_err(CompileError::from);
    let mut xs = Vec::new();
    for (i, v) in cfg.x.iter().enumerate() {
        xs.push(Operand::from(c.input(&format!("x{}", i + 1), bip(*v)?)?));
    }
    let mut ws = Vec::new();
    for (i, v) in cfg.w0.iter().enumerate() {
        ws.push(Operand::from(c.constant(&weight_net(i + 1), bip(*v)?)?));
    }
    let u = inner_product_into(&mut c, &xs, &ws, "u")?;
    let y = sigmoid_into(&mut c, (&u).into(), "sg_", "y")?;
    c.mark_output(&y)?;
    Ok(c)
}

/// Outcome of one simulated epoch.
#[derive(Debug, Clone)]
pub struct EpochRun {
    pub y: f64,
    pub w_new: Vec<f64>,
    pub trajectory: Trajectory,
    pub report: SimReport,
}

/// A compiled-once perceptron whose weights are swapped in per epoch.
#[derive(Debug, Clone)]
pub struct Perceptron {
    cfg: PerceptronConfig,
    circuit: Circuit,
}

impl Perceptron {
    pub fn new(cfg: &PerceptronConfig) -> Result<Self, TrainError> {
        Ok(Perceptron { circuit: build_perceptron_circuit(cfg)?, cfg: cfg.clone() })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn run_epoch(&mut self, w: &[f64]) -> Result<EpochRun, TrainError> {
        if w.len() != self.cfg.n() {
            return Err(TrainError::Config(format!("{} weights for {} inputs", w.len(), self.cfg.n())));
        }
        for (i, v) in w.iter().enumerate() {
            self.circuit.set_value(&weight_net(i + 1), *v)?;
        }
        let opts = CompileOptions { total: DEFAULT_TOTAL, rates: self.cfg.rates };
        let cc = compile_with(&self.circuit, &opts)?;
        let (trajectory, last, report) = integrate_from(&cc.network, &State::initial(&cc.network), &self.cfg.sim)?;
        let y = decode_output(&cc, &last, "y")?;
        let w_new = (1..=w.len())
            .map(|i| decode_output(&cc, &last, &new_weight_net(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EpochRun { y, w_new, trajectory, report })
    }
}

/// Simulate one epoch with weights `w`.
pub fn run_epoch(cfg: &PerceptronConfig, w: &[f64]) -> Result<EpochRun, TrainError> {
    Perceptron::new(cfg)?.run_epoch(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub y_crn: f64,
    pub y_golden: f64,
    /// Weights after this epoch's update.
    pub w_crn: Vec<f64>,
    pub w_golden: Vec<f64>,
    pub loss_crn: f64,
    pub loss_golden: f64,
    pub max_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    pub config: PerceptronConfig,
    pub dprime: f64,
    pub records: Vec<EpochRecord>,
}

impl TrainingLog {
    pub fn final_record(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    /// First epoch whose CRN output is within `tol` of the target.
    pub fn converged_at(&self, tol: f64) -> Option<usize> {
        self.records.iter().find(|r| (r.y_crn - self.dprime).abs() <= tol).map(|r| r.epoch)
    }

    pub fn to_csv(&self) -> String {
        let n = self.config.n();
        let mut cols = vec!["epoch".to_string(), "y_crn".into(), "y_golden".into(), "loss_crn".into(), "loss_golden".into()];
        cols.extend((1..=n).map(|i| format!("w{i}_crn")));
        cols.extend((1..=n).map(|i| format!("w{i}_golden")));
        cols.push("max_drift".into());
        let mut out = cols.join(",");
        out.push('\n');
        for r in &self.records {
            let mut row = vec![r.epoch.to_string()];
            row.extend([r.y_crn, r.y_golden, r.loss_crn, r.loss_golden].map(fmt17));
            row.extend(r.w_crn.iter().chain(&r.w_golden).copied().map(fmt17));
            row.push(fmt17(r.max_drift));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Train for `cfg.epochs` epochs, logging the golden model alongside.
pub fn train(cfg: &PerceptronConfig) -> Result<TrainingLog, TrainError> {
    train_with(cfg, |_| {})
}

/// [`train`] with a callback after every epoch.
pub fn train_with(cfg: &PerceptronConfig, mut on_epoch: impl FnMut(&EpochRecord)) -> Result<TrainingLog, TrainError> {
    let dprime = cfg.dprime()?;
    let mut perceptron = Perceptron::new(cfg)?;
    let mut w_crn = cfg.w0.clone();
    let mut w_golden = cfg.w0.clone();
    let mut records = Vec::new();
    for epoch in 1..=cfg.epochs {
        let g = golden::golden_epoch(&cfg.x, &w_golden, dprime)?;
        let run = perceptron.run_epoch(&w_crn)?;
        w_crn = run.w_new;
        w_golden = g.w_next;
        let max_drift = w_crn.iter().zip(&w_golden).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let record = EpochRecord {
            epoch,
            y_crn: run.y,
            y_golden: g.y,
            w_crn: w_crn.clone(),
            w_golden: w_golden.clone(),
            loss_crn: golden::loss(run.y, dprime),
            loss_golden: g.loss,
            max_drift,
        };
        on_epoch(&record);
        records.push(record);
        if cfg.early_stop && (run.y - dprime).abs() < EARLY_STOP_TOL {
            break;
        }
    }
    Ok(TrainingLog { config: cfg.clone(), dprime, records })
}
