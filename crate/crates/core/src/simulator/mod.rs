//! Deterministic mass-action kinetics.
//!
//! Networks produced by the compiler tag each reaction with a phase (the
//! depth of its unit). With [`SimConfig::staged`] set, phase `p` reactions
//! are switched on only after phase `p - 1` has settled, so every unit sees
//! its inputs fully formed before it starts consuming them. Each phase runs
//! until steady state or `t_max`, whichever comes first. Untagged networks
//! have a single phase, for which both modes coincide.

mod dopri;
mod kinetics;

use indexmap::IndexMap;
use thiserror::Error;

use crate::compiler::CompiledCrn;
use crate::crn::{Network, SpeciesId};
use crate::fraccode::{decode, RailPair};
use crate::numfmt::fmt17;

pub use dopri::StepStats;
use dopri::{Dopri, PhaseEnd, Recorder};
use kinetics::Kinetics;

/// Rail totals at or below this are treated as a dead net.
pub const DEAD_TOTAL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
    #[error("step size underflow at t = {t}")]
    StiffnessFailure { t: f64 },
    #[error("net `{0}` has no molecules left")]
    ZeroTotal(String),
    #[error("net `{0}` is not part of the compiled network")]
    UnknownNet(String),
    #[error("species `{0}` is not in the state")]
    UnknownSpecies(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Time limit; per phase when staged.
    pub t_max: f64,
    pub ss_tol: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub record_every: Option<f64>,
    pub staged: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { t_max: 1000.0, ss_tol: 1e-9, rel_tol: 1e-8, abs_tol: 1e-12, record_every: None, staged: true }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SimError::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("t_max", self.t_max)?;
        positive("ss_tol", self.ss_tol)?;
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        if let Some(dt) = self.record_every {
            positive("record_every", dt)?;
        }
        if self.rel_tol >= 1.0 {
            return Err(SimError::InvalidConfig(format!("rel_tol must be < 1, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

/// Concentrations at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub conc: IndexMap<SpeciesId, f64>,
}

impl State {
    pub fn initial(net: &Network) -> Self {
        Self::from_vec(net, 0.0, &net.initial_vector())
    }

    fn from_vec(net: &Network, t: f64, c: &[f64]) -> Self {
        State { t, conc: net.species().cloned().zip(c.iter().copied()).collect() }
    }

    pub fn get(&self, species: &str) -> Option<f64> {
        self.conc.iter().find(|(s, _)| s.as_str() == species).map(|(_, c)| *c)
    }

    fn to_vec(&self, net: &Network) -> Result<Vec<f64>, SimError> {
        net.species()
            .map(|s| self.conc.get(s).copied().ok_or_else(|| SimError::UnknownSpecies(s.to_string())))
            .collect()
    }
}

/// Recorded states in increasing time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `t,<species...>` header, one row per state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        if let Some(first) = self.states.first() {
            for s in first.conc.keys() {
                out.push(',');
                out.push_str(s.as_str());
            }
        }
        out.push('\n');
        for st in &self.states {
            out.push_str(&fmt17(st.t));
            for c in st.conc.values() {
                out.push(',');
                out.push_str(&fmt17(*c));
            }
            out.push('\n');
        }
        out
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimReport {
    /// `(phase, end time, reached steady state)`; a single entry with phase
    /// `None` in monolithic mode.
    pub phases: Vec<(Option<u32>, f64, bool)>,
    pub steps: StepStats,
}

impl SimReport {
    pub fn all_steady(&self) -> bool {
        self.phases.iter().all(|p| p.2)
    }
}

/// Mass-action `dc/dt` for every species (all phases active).
pub fn derivatives(net: &Network, s: &State) -> Result<IndexMap<SpeciesId, f64>, SimError> {
    let c = s.to_vec(net)?;
    let mut out = vec![0.0; c.len()];
    Kinetics::new(net).eval(&c, &mut out);
    Ok(net.species().cloned().zip(out).collect())
}

pub fn integrate(net: &Network, cfg: &SimConfig) -> Result<(Trajectory, State), SimError> {
    integrate_from(net, &State::initial(net), cfg).map(|(tr, st, _)| (tr, st))
}

/// Integrate from an arbitrary starting state and report step statistics.
pub fn integrate_from(net: &Network, start: &State, cfg: &SimConfig) -> Result<(Trajectory, State, SimReport), SimError> {
    cfg.validate()?;
    let mut y = start.to_vec(net)?;
    if let Some(s) = y.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(SimError::InvalidConfig(format!("initial concentration of `{}` is {}", net.species().nth(s).unwrap(), y[s])));
    }
    let mut t = start.t;
    let mut kin = Kinetics::new(net);
    let mut stepper = Dopri::new(y.len());
    let mut states = vec![State::from_vec(net, t, &y)];
    let mut sink = |tt: f64, c: &[f64]| states.push(State::from_vec(net, tt, c));
    let mut rec = Recorder {
        every: cfg.record_every,
        next: cfg.record_every.map_or(0, |dt| (t / dt).floor() as u64 + 1),
        sink: &mut sink,
    };
    let mut report = SimReport::default();

    let phases: Vec<Option<u32>> = if cfg.staged { (0..=net.max_phase()).map(Some).collect() } else { vec![None] };
    let mut prev_active = usize::MAX;
    for phase in phases {
        kin.activate(phase);
        if kin.active_count() == prev_active {
            continue;
        }
        prev_active = kin.active_count();
        let t_end = t + cfg.t_max;
        let end = stepper.run(&kin, &mut y, &mut t, t_end, cfg, &mut rec)?;
        report.phases.push((phase, t, end == PhaseEnd::Steady));
    }
    report.steps = stepper.stats;
    let last = State::from_vec(net, t, &y);
    if states.last().is_none_or(|s| s.t < t) {
        states.push(last.clone());
    }
    Ok((Trajectory { states }, last, report))
}

/// Decode a net (or output label) of a compiled circuit from a state.
pub fn decode_output(cc: &CompiledCrn, s: &State, net: &str) -> Result<f64, SimError> {
    let (_, rails, format) = cc.lookup(net).ok_or_else(|| SimError::UnknownNet(net.to_string()))?;
    let get = |sp: &SpeciesId| s.conc.get(sp).copied().ok_or_else(|| SimError::UnknownSpecies(sp.to_string()));
    let (c0, c1) = (get(&rails.zero)?, get(&rails.one)?);
    if c0 + c1 <= DEAD_TOTAL {
        return Err(SimError::ZeroTotal(net.to_string()));
    }
    let pair = RailPair::new(c0.max(0.0), c1.max(0.0)).map_err(|_| SimError::ZeroTotal(net.to_string()))?;
    decode(pair, format).map_err(|_| SimError::ZeroTotal(net.to_string()))
}
