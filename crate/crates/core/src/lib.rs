//! Fractional-coded molecular arithmetic: a circuit-to-CRN compiler, a
//! mass-action kinetics simulator, an exact golden model and a trainer for
//! a single-neuron perceptron whose forward and backward passes are both
//! carried out by chemical reactions.

pub mod compiler;
pub mod crn;
pub mod fraccode;
pub mod golden;
pub mod numfmt;
pub mod simulator;
pub mod trainer;

pub use compiler::{compile, compile_with, fanout_transform, Circuit, CompileError, CompileOptions, CompiledCrn, NetId, UnitKind};
pub use crn::{CrnError, Network, Rates, Reaction, SpeciesId};
pub use fraccode::{decode, encode, Format, FracError, RailPair, Value};
pub use golden::{golden_epoch, golden_train, GoldenEpoch, GoldenError};
pub use simulator::{decode_output, integrate, SimConfig, SimError, State, Trajectory};
pub use trainer::{train, EpochRecord, PerceptronConfig, TrainError, TrainingLog};
