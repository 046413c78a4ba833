//! Circuit blocks of the trainable perceptron.
//!
//! The `*_into` functions add a block to an existing circuit and return the
//! nets it produces; the `build_*` functions wrap one block into a
//! standalone circuit whose inputs and constants start at 0 (set them with
//! [`Circuit::set_value`]).

use std::str::FromStr;

use super::circuit::{Circuit, NetId, Operand};
use super::{CompileError, UnitKind};
use crate::fraccode::{Format, Value};

/// Coefficients of the Horner-form sigmoid, as bipolar constants.
pub const SIGMOID_NEG_ONE_SIXTIETH: f64 = -1.0 / 60.0;
pub const SIGMOID_ONE_SIXTH: f64 = 1.0 / 6.0;

/// How the delta-w block realizes `-y'` and `-y'^2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Negation {
    /// Read the net with swapped rails; no reactions.
    #[default]
    RailSwap,
    /// A bipolar NMult unit against a constant 1.
    NMult,
}

impl FromStr for Negation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "railswap" => Ok(Negation::RailSwap),
            "nmult" => Ok(Negation::NMult),
            other => Err(format!("unknown negation mode `{other}` (expected railswap or nmult)")),
        }
    }
}

impl std::fmt::Display for Negation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Negation::RailSwap => "railswap",
            Negation::NMult => "nmult",
        })
    }
}

fn bipolar(v: f64) -> Value {
    Value::bipolar(v).expect("in-range constant")
}

fn half_select(c: &mut Circuit, name: &str) -> Result<NetId, CompileError> {
    c.constant(name, Value::unipolar(0.5).expect("in range"))
}

/// `(1/N) sum w_i x_i` as `N` bipolar products sharing the output rails.
pub fn inner_product_into(
    c: &mut Circuit,
    xs: &[Operand],
    ws: &[Operand],
    out: &str,
) -> Result<NetId, CompileError> {
    assert_eq!(xs.len(), ws.len(), "inner product operands differ in length");
    assert!(!xs.is_empty(), "inner product needs at least one term");
    let mut y = None;
    for (x, w) in xs.iter().zip(ws) {
        y = Some(c.unit(UnitKind::MultB, vec![x.clone(), w.clone()], out)?);
    }
    Ok(y.expect("non-empty"))
}

/// Horner-form sigmoid `1/2 + x/4 - x^3/48 + x^5/480` from 7 units:
///
/// ```text
/// x2 = x * x                  b = x2 * (-1/60)
/// c  = mux(1/6, b; 1/2)       d = x2 * c
/// e  = mux(-1, d; 1/2)        f = -(x * e)
/// y  = mux(1, f; 1/2)
/// ```
///
/// Net names are prefixed with `prefix`; the result is `out`.
pub fn sigmoid_into(c: &mut Circuit, x: Operand, prefix: &str, out: &str) -> Result<NetId, CompileError> {
    let p = |s: &str| format!("{prefix}{s}");
    let k60 = c.constant(&p("k60"), bipolar(SIGMOID_NEG_ONE_SIXTIETH))?;
    let k6 = c.constant(&p("k6"), bipolar(SIGMOID_ONE_SIXTH))?;
    let kneg1 = c.constant(&p("kneg1"), bipolar(-1.0))?;
    let kpos1 = c.constant(&p("kpos1"), bipolar(1.0))?;
    let s1 = half_select(c, &p("s1"))?;
    let s2 = half_select(c, &p("s2"))?;
    let s3 = half_select(c, &p("s3"))?;

    let x2 = c.unit(UnitKind::MultB, vec![x.clone(), x.clone()], &p("x2"))?;
    let b = c.unit(UnitKind::MultB, vec![(&x2).into(), (&k60).into()], &p("b"))?;
    let cc = c.unit(UnitKind::Mux, vec![(&k6).into(), (&b).into(), (&s1).into()], &p("c"))?;
    let d = c.unit(UnitKind::MultB, vec![(&x2).into(), (&cc).into()], &p("d"))?;
    let e = c.unit(UnitKind::Mux, vec![(&kneg1).into(), (&d).into(), (&s2).into()], &p("e"))?;
    let f = c.unit(UnitKind::NMultB, vec![x, (&e).into()], &p("f"))?;
    c.unit(UnitKind::Mux, vec![(&kpos1).into(), (&f).into(), (&s3).into()], out)
}

/// Nets of the delta-w block. `n1` and `n4` are operands because rail-swap
/// negation does not create a net.
#[derive(Debug, Clone)]
pub struct DeltaWNets {
    pub n1: Operand,
    pub n2: NetId,
    pub n3: NetId,
    pub n4: Operand,
    pub n5: NetId,
    pub n6: NetId,
    pub dw: Vec<NetId>,
}

fn negate(c: &mut Circuit, x: &NetId, negation: Negation, name: &str) -> Result<Operand, CompileError> {
    match negation {
        Negation::RailSwap => Ok(Operand::neg(x)),
        Negation::NMult => {
            let one = c.constant(&format!("{name}_one"), bipolar(1.0))?;
            Ok(c.unit(UnitKind::NMultB, vec![x.into(), (&one).into()], name)?.into())
        }
    }
}

/// `dw_i = (1/2)(d' - y') (1/2)(y' - y'^2) x_i` through the internal nodes
///
/// ```text
/// n1 = -y'            n2 = (d' + n1) / 2      n3 = y'^2
/// n4 = -n3            n5 = (y' + n4) / 2      n6 = n2 n5
/// dw_i = n6 x_i
/// ```
pub fn delta_w_into(
    c: &mut Circuit,
    y: &NetId,
    dprime: &NetId,
    xs: &[Operand],
    negation: Negation,
    prefix: &str,
) -> Result<DeltaWNets, CompileError> {
    let p = |s: &str| format!("{prefix}{s}");
    let s_n2 = half_select(c, &p("s_n2"))?;
    let s_n5 = half_select(c, &p("s_n5"))?;

    let n1 = negate(c, y, negation, &p("n1"))?;
    let n2 = c.unit(UnitKind::Mux, vec![dprime.into(), n1.clone(), (&s_n2).into()], &p("n2"))?;
    let n3 = c.unit(UnitKind::MultB, vec![y.into(), y.into()], &p("n3"))?;
    let n4 = negate(c, &n3, negation, &p("n4"))?;
    let n5 = c.unit(UnitKind::Mux, vec![y.into(), n4.clone(), (&s_n5).into()], &p("n5"))?;
    let n6 = c.unit(UnitKind::MultB, vec![(&n2).into(), (&n5).into()], &p("n6"))?;
    let dw = xs
        .iter()
        .enumerate()
        .map(|(i, x)| c.unit(UnitKind::MultB, vec![(&n6).into(), x.clone()], &p(&format!("dw{}", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DeltaWNets { n1, n2, n3, n4, n5, n6, dw })
}

/// `w_new = clamp(w + dw, -1, 1)` as a half mux followed by a scaler with M = 2.
pub fn weight_update_into(
    c: &mut Circuit,
    w: Operand,
    dw: Operand,
    prefix: &str,
    out: &str,
) -> Result<NetId, CompileError> {
    let s = half_select(c, &format!("{prefix}s"))?;
    let m = c.unit(UnitKind::Mux, vec![w, dw, (&s).into()], &format!("{prefix}m"))?;
    c.unit(UnitKind::Scaler(2), vec![(&m).into()], out)
}

fn zero() -> Value {
    bipolar(0.0)
}

/// One unit over fresh inputs `x`, `y` (binary), `x`, `y`, `s` (mux) or `x`
/// (scaler, copy). Products of unipolar kinds take unipolar inputs; the mux
/// and copy carry bipolar data. Outputs are labelled `z`, or `z1..zk` for a
/// copy.
pub fn build_unit(kind: UnitKind, inputs: &[f64]) -> Result<Circuit, CompileError> {
    if !kind.is_valid() {
        return Err(CompileError::UnknownKind(kind.to_string()));
    }
    if inputs.len() != kind.input_arity() {
        return Err(CompileError::ArityMismatch {
            kind,
            expected: kind.input_arity(),
            got: inputs.len(),
            expected_out: kind.output_arity(),
            got_out: kind.output_arity(),
        });
    }
    let names = ["x", "y", "s"];
    let mut c = Circuit::new();
    let mut ops = Vec::new();
    for (i, (v, want)) in inputs.iter().zip(kind.input_formats()).enumerate() {
        let format = want.unwrap_or(Format::Bipolar);
        ops.push(Operand::from(c.input(names[i], Value::new(*v, format)?)?));
    }
    if let UnitKind::Copy(k) = kind {
        let outs: Vec<String> = (1..=k).map(|j| format!("z{j}")).collect();
        let outs: Vec<&str> = outs.iter().map(String::as_str).collect();
        for id in c.add_unit(kind, ops, &outs)? {
            c.mark_output(&id)?;
        }
    } else {
        let z = c.unit(kind, ops, "z")?;
        c.mark_output(&z)?;
    }
    Ok(c)
}

/// Inputs `x1..xN`, `w1..wN`; output `y`.
pub fn build_inner_product(n: usize) -> Circuit {
    assert!(n >= 1, "inner product needs N >= 1");
    let mut c = Circuit::new();
    let xs: Vec<Operand> = (1..=n).map(|i| c.input(&format!("x{i}"), zero()).unwrap().into()).collect();
    let ws: Vec<Operand> = (1..=n).map(|i| c.input(&format!("w{i}"), zero()).unwrap().into()).collect();
    let y = inner_product_into(&mut c, &xs, &ws, "y").unwrap();
    c.mark_output(&y).unwrap();
    c
}

/// Input `x`; output `y`.
pub fn build_sigmoid() -> Circuit {
    let mut c = Circuit::new();
    let x = c.input("x", zero()).unwrap();
    let y = sigmoid_into(&mut c, (&x).into(), "", "y").unwrap();
    c.mark_output(&y).unwrap();
    c
}

/// Inputs `y` (the forward output) and `x1..xN`, constant `dprime`;
/// outputs `dw1..dwN`. Uses rail-swap negation.
pub fn build_delta_w(n: usize) -> Circuit {
    build_delta_w_with(n, Negation::RailSwap)
}

pub fn build_delta_w_with(n: usize, negation: Negation) -> Circuit {
    assert!(n >= 1, "delta-w needs N >= 1");
    let mut c = Circuit::new();
    let y = c.input("y", zero()).unwrap();
    let dprime = c.constant("dprime", zero()).unwrap();
    let xs: Vec<Operand> = (1..=n).map(|i| c.input(&format!("x{i}"), zero()).unwrap().into()).collect();
    let nets = delta_w_into(&mut c, &y, &dprime, &xs, negation, "").unwrap();
    for dw in &nets.dw {
        c.mark_output(dw).unwrap();
    }
    c
}

/// Inputs `w`, `dw`; output `w_new`.
pub fn build_weight_update() -> Circuit {
    let mut c = Circuit::new();
    let w = c.input("w", zero()).unwrap();
    let dw = c.input("dw", zero()).unwrap();
    let out = weight_update_into(&mut c, (&w).into(), (&dw).into(), "", "w_new").unwrap();
    c.mark_output(&out).unwrap();
    c
}
