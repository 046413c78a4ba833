use std::fmt;
use std::str::FromStr;

use super::CompileError;
use crate::crn::{RateKind, Rates, Reaction, SpeciesId};
use crate::fraccode::Format;

/// Arithmetic unit kinds and their reaction templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitKind {
    /// Unipolar product `z = x y`.
    MultU,
    /// Unipolar `z = 1 - x y`.
    NMultU,
    /// Bipolar product `z = x y`.
    MultB,
    /// Bipolar `z = -x y`.
    NMultB,
    /// Scaled addition `z = (1 - s) x + s y` with unipolar select `s`.
    Mux,
    /// Bipolar `y = clamp(M x, -1, 1)`.
    Scaler(u32),
    /// `k` copies of the input value.
    Copy(usize),
}

impl UnitKind {
    pub fn input_arity(self) -> usize {
        match self {
            UnitKind::MultU | UnitKind::NMultU | UnitKind::MultB | UnitKind::NMultB => 2,
            UnitKind::Mux => 3,
            UnitKind::Scaler(_) | UnitKind::Copy(_) => 1,
        }
    }

    pub fn output_arity(self) -> usize {
        match self {
            UnitKind::Copy(k) => k,
            _ => 1,
        }
    }

    /// Product units may write into a shared output rail pair.
    pub fn is_product(self) -> bool {
        matches!(self, UnitKind::MultU | UnitKind::NMultU | UnitKind::MultB | UnitKind::NMultB)
    }

    pub fn is_valid(self) -> bool {
        match self {
            UnitKind::Scaler(m) => m >= 1,
            UnitKind::Copy(k) => k >= 2,
            _ => true,
        }
    }

    /// Required input formats; `None` means "same as the data inputs".
    pub(crate) fn input_formats(self) -> Vec<Option<Format>> {
        match self {
            UnitKind::MultU | UnitKind::NMultU => vec![Some(Format::Unipolar); 2],
            UnitKind::MultB | UnitKind::NMultB => vec![Some(Format::Bipolar); 2],
            UnitKind::Mux => vec![None, None, Some(Format::Unipolar)],
            UnitKind::Scaler(_) => vec![Some(Format::Bipolar)],
            UnitKind::Copy(_) => vec![None],
        }
    }

    /// Output format given the format of the first input.
    pub(crate) fn output_format(self, first_input: Format) -> Format {
        match self {
            UnitKind::MultU | UnitKind::NMultU => Format::Unipolar,
            UnitKind::MultB | UnitKind::NMultB | UnitKind::Scaler(_) => Format::Bipolar,
            UnitKind::Mux | UnitKind::Copy(_) => first_input,
        }
    }

    /// The value the unit's output decodes to once its reactions complete.
    pub fn contract(self, inputs: &[f64]) -> f64 {
        match self {
            UnitKind::MultU | UnitKind::MultB => inputs[0] * inputs[1],
            UnitKind::NMultU => 1.0 - inputs[0] * inputs[1],
            UnitKind::NMultB => -(inputs[0] * inputs[1]),
            UnitKind::Mux => {
                let (x, y, s) = (inputs[0], inputs[1], inputs[2]);
                (1.0 - s) * x + s * y
            }
            UnitKind::Scaler(m) => (m as f64 * inputs[0]).clamp(-1.0, 1.0),
            UnitKind::Copy(_) => inputs[0],
        }
    }
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitKind::MultU => f.write_str("multu"),
            UnitKind::NMultU => f.write_str("nmultu"),
            UnitKind::MultB => f.write_str("multb"),
            UnitKind::NMultB => f.write_str("nmultb"),
            UnitKind::Mux => f.write_str("mux"),
            UnitKind::Scaler(m) => write!(f, "scaler{m}"),
            UnitKind::Copy(k) => write!(f, "copy{k}"),
        }
    }
}

impl FromStr for UnitKind {
    type Err = CompileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || CompileError::UnknownKind(s.to_string());
        let kind = match s {
            "multu" => UnitKind::MultU,
            "nmultu" => UnitKind::NMultU,
            "multb" => UnitKind::MultB,
            "nmultb" => UnitKind::NMultB,
            "mux" => UnitKind::Mux,
            _ => {
                if let Some(m) = s.strip_prefix("scaler") {
                    UnitKind::Scaler(m.parse().map_err(|_| unknown())?)
                } else if let Some(k) = s.strip_prefix("copy") {
                    UnitKind::Copy(k.parse().map_err(|_| unknown())?)
                } else {
                    return Err(unknown());
                }
            }
        };
        if kind.is_valid() {
            Ok(kind)
        } else {
            Err(unknown())
        }
    }
}

/// The 0-molecule and 1-molecule species of one net.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rails {
    pub zero: SpeciesId,
    pub one: SpeciesId,
}

impl Rails {
    pub fn new(zero: SpeciesId, one: SpeciesId) -> Self {
        Rails { zero, one }
    }

    /// Rails of net `name`: `name_0` and `name_1`.
    pub fn for_net(name: &str) -> Self {
        Rails {
            zero: SpeciesId::new(format!("{name}_0")).expect("net names are identifiers"),
            one: SpeciesId::new(format!("{name}_1")).expect("net names are identifiers"),
        }
    }

    pub fn swapped(&self) -> Self {
        Rails { zero: self.one.clone(), one: self.zero.clone() }
    }

    /// Scaler annihilation partners: `minus().zero` cancels `zero`.
    pub fn minus(&self) -> Self {
        let m = |s: &SpeciesId| SpeciesId::new(format!("{s}m")).expect("identifier");
        Rails { zero: m(&self.zero), one: m(&self.one) }
    }
}

fn rx(reactants: [&SpeciesId; 2], product: &SpeciesId, rates: Rates) -> Reaction {
    Reaction::new(
        vec![reactants[0].clone(), reactants[1].clone()],
        vec![(product.clone(), 1)],
        rates.class(RateKind::Slow),
    )
    .expect("template reactions are well formed")
}

/// Reaction template of `kind` over the given input and output rails.
///
/// Scaler units additionally use the [`Rails::minus`] species of their output.
pub fn unit_reactions(
    kind: UnitKind,
    inputs: &[Rails],
    outputs: &[Rails],
    rates: Rates,
) -> Result<Vec<Reaction>, CompileError> {
    if inputs.len() != kind.input_arity() || outputs.len() != kind.output_arity() || !kind.is_valid() {
        return Err(CompileError::ArityMismatch {
            kind,
            expected: kind.input_arity(),
            got: inputs.len(),
            expected_out: kind.output_arity(),
            got_out: outputs.len(),
        });
    }
    let z = &outputs[0];
    let out = match kind {
        UnitKind::MultU | UnitKind::NMultU => {
            let (x, y) = (&inputs[0], &inputs[1]);
            // NMult routes the same four collisions to the opposite rail.
            let (hi, lo) = if kind == UnitKind::MultU { (&z.one, &z.zero) } else { (&z.zero, &z.one) };
            vec![
                rx([&x.one, &y.one], hi, rates),
                rx([&x.one, &y.zero], lo, rates),
                rx([&x.zero, &y.one], lo, rates),
                rx([&x.zero, &y.zero], lo, rates),
            ]
        }
        UnitKind::MultB | UnitKind::NMultB => {
            let (x, y) = (&inputs[0], &inputs[1]);
            let (same, diff) = if kind == UnitKind::MultB { (&z.one, &z.zero) } else { (&z.zero, &z.one) };
            vec![
                rx([&x.one, &y.one], same, rates),
                rx([&x.zero, &y.zero], same, rates),
                rx([&x.one, &y.zero], diff, rates),
                rx([&x.zero, &y.one], diff, rates),
            ]
        }
        UnitKind::Mux => {
            let (x, y, s) = (&inputs[0], &inputs[1], &inputs[2]);
            vec![
                rx([&x.one, &s.zero], &z.one, rates),
                rx([&x.zero, &s.zero], &z.zero, rates),
                rx([&y.one, &s.one], &z.one, rates),
                rx([&y.zero, &s.one], &z.zero, rates),
            ]
        }
        UnitKind::Scaler(m) => {
            let x = &inputs[0];
            let minus = z.minus();
            let (up, down) = (m as i64 + 1, m as i64 - 1);
            let slow = rates.class(RateKind::Slow);
            let fast = rates.class(RateKind::Fast);
            let leg = |src: &SpeciesId, plus: &SpeciesId, opposite_minus: &SpeciesId| {
                Reaction::new(
                    vec![src.clone()],
                    vec![(plus.clone(), up), (opposite_minus.clone(), down)],
                    slow,
                )
                .expect("scaler leg")
            };
            let annihilate = |a: &SpeciesId, b: &SpeciesId| {
                Reaction::new(vec![a.clone(), b.clone()], vec![], fast).expect("annihilation")
            };
            vec![
                leg(&x.zero, &z.zero, &minus.one),
                leg(&x.one, &z.one, &minus.zero),
                annihilate(&z.zero, &minus.zero),
                annihilate(&z.one, &minus.one),
            ]
        }
        UnitKind::Copy(_) => {
            let x = &inputs[0];
            let fan = |src: &SpeciesId, pick: fn(&Rails) -> &SpeciesId| {
                let products = outputs.iter().map(|o| (pick(o).clone(), 1)).collect();
                Reaction::new(vec![src.clone()], products, rates.class(RateKind::Slow)).expect("copy")
            };
            vec![fan(&x.zero, |r| &r.zero), fan(&x.one, |r| &r.one)]
        }
    };
    Ok(out)
}
