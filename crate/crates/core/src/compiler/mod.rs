//! Lowering of fractional-coded arithmetic circuits to reaction networks.
//!
//! A [`Circuit`] is a DAG of units over named nets. [`fanout_transform`]
//! gives every net a single consumer by inserting copy units, and
//! [`compile`] instantiates each unit's reaction template over one rail pair
//! per net. The builders in [`builders`] assemble the perceptron blocks.

pub mod builders;
mod circuit;
mod fanout;
mod lower;
mod units;

use thiserror::Error;

use crate::crn::CrnError;
use crate::fraccode::{FracError, Format};

pub use builders::{
    build_delta_w, build_delta_w_with, build_inner_product, build_sigmoid, build_unit, build_weight_update,
    DeltaWNets, Negation,
};
pub use circuit::{Circuit, Evaluation, NetDecl, NetId, NetOrigin, Operand, Unit};
pub use fanout::fanout_transform;
pub use lower::{compile, compile_with, CompileOptions, CompiledCrn};
pub use units::{unit_reactions, Rails, UnitKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("{kind} takes {expected} input(s) and {expected_out} output(s), got {got} and {got_out}")]
    ArityMismatch {
        kind: UnitKind,
        expected: usize,
        got: usize,
        expected_out: usize,
        got_out: usize,
    },
    #[error("{unit}: net `{net}` is {found}, expected {expected}")]
    FormatMismatch { unit: String, net: String, expected: Format, found: Format },
    #[error("{unit}: `{net}` can only negate bipolar nets")]
    NegatedUnipolar { unit: String, net: String },
    #[error("{unit} is starved: `{net}` supplies total {available} but {required} is required")]
    InsufficientTotals { unit: String, net: String, available: f64, required: f64 },
    #[error("circuit has a cycle through `{0}`")]
    Cycle(String),
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("net `{0}` is declared twice")]
    DuplicateNet(String),
    #[error("net `{0}` has several producers; only product units may share an output")]
    MultipleProducers(String),
    #[error("net `{0}` is never produced")]
    NoProducer(String),
    #[error("net `{0}` has {1} consumers; run fanout_transform first")]
    FanoutRequired(String, usize),
    #[error("invalid net name `{0}`")]
    BadName(String),
    #[error("unknown unit kind `{0}`")]
    UnknownKind(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("circuit is empty")]
    Empty,
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    Crn(#[from] CrnError),
}
