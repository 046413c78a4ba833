//! Fractional coding of real values as a pair of concentrations.
//!
//! A value is carried by two species, the 0-molecule and the 1-molecule.
//! Unipolar values live in `[0, 1]` and decode as `c1 / (c0 + c1)`; bipolar
//! values live in `[-1, 1]` and decode as `(c1 - c0) / (c0 + c1)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Rail-pair total used when nothing else is specified.
pub const DEFAULT_TOTAL: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("value {value} is outside the {format} range")]
    OutOfRange { value: f64, format: Format },
    #[error("rail-pair total must be positive, got {0}")]
    NonpositiveTotal(f64),
    #[error("rail pair has zero total concentration")]
    ZeroTotal,
    #[error("negative rail concentration ({0})")]
    NegativeRail(f64),
    #[error("unknown format `{0}` (expected `unipolar` or `bipolar`)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Unipolar,
    Bipolar,
}

impl Format {
    /// Inclusive range of representable values.
    pub fn range(self) -> (f64, f64) {
        match self {
            Format::Unipolar => (0.0, 1.0),
            Format::Bipolar => (-1.0, 1.0),
        }
    }

    pub fn contains(self, v: f64) -> bool {
        let (lo, hi) = self.range();
        v >= lo && v <= hi
    }

    /// Clamp `v` into the format range.
    pub fn clamp(self, v: f64) -> f64 {
        let (lo, hi) = self.range();
        v.clamp(lo, hi)
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Unipolar => "unipolar",
            Format::Bipolar => "bipolar",
        })
    }
}

impl FromStr for Format {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unipolar" | "u" => Ok(Format::Unipolar),
            "bipolar" | "b" => Ok(Format::Bipolar),
            other => Err(FracError::UnknownFormat(other.to_string())),
        }
    }
}

/// A real value tagged with the coding it must be representable in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Value {
    v: f64,
    format: Format,
}

impl Value {
    pub fn new(v: f64, format: Format) -> Result<Self, FracError> {
        if !v.is_finite() || !format.contains(v) {
            return Err(FracError::OutOfRange { value: v, format });
        }
        Ok(Value { v, format })
    }

    pub fn unipolar(v: f64) -> Result<Self, FracError> {
        Value::new(v, Format::Unipolar)
    }

    pub fn bipolar(v: f64) -> Result<Self, FracError> {
        Value::new(v, Format::Bipolar)
    }

    pub fn get(self) -> f64 {
        self.v
    }

    pub fn format(self) -> Format {
        self.format
    }
}

/// Concentrations of the 0-molecule (`c0`) and 1-molecule (`c1`) of one value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RailPair {
    pub c0: f64,
    pub c1: f64,
}

impl RailPair {
    pub fn new(c0: f64, c1: f64) -> Result<Self, FracError> {
        for c in [c0, c1] {
            if c < 0.0 || c.is_nan() {
                return Err(FracError::NegativeRail(c));
            }
        }
        Ok(RailPair { c0, c1 })
    }

    pub fn total(&self) -> f64 {
        self.c0 + self.c1
    }

    /// The pair with rails exchanged; negates a bipolar value.
    pub fn swapped(self) -> Self {
        RailPair { c0: self.c1, c1: self.c0 }
    }
}

/// Encode `v` into a rail pair whose rails sum to `total`.
pub fn encode(v: Value, total: f64) -> Result<RailPair, FracError> {
    if !(total.is_finite() && total > 0.0) {
        return Err(FracError::NonpositiveTotal(total));
    }
    let c1 = match v.format {
        Format::Unipolar => v.v * total,
        Format::Bipolar => (1.0 + v.v) / 2.0 * total,
    };
    // c0 from the complementary fraction rather than `total - c1` so that
    // both rails carry the same rounding.
    let c0 = match v.format {
        Format::Unipolar => (1.0 - v.v) * total,
        Format::Bipolar => (1.0 - v.v) / 2.0 * total,
    };
    Ok(RailPair { c0, c1 })
}

/// Decode a rail pair under `format`. The result is clamped to the format
/// range to absorb last-bit rounding.
pub fn decode(r: RailPair, format: Format) -> Result<f64, FracError> {
    let total = r.c0 + r.c1;
    if total.is_nan() || total <= 0.0 {
        return Err(FracError::ZeroTotal);
    }
    let v = match format {
        Format::Unipolar => r.c1 / total,
        Format::Bipolar => (r.c1 - r.c0) / total,
    };
    Ok(format.clamp(v))
}
