use std::collections::VecDeque;
use std::fmt;

use indexmap::IndexMap;

use super::{CompileError, UnitKind};
use crate::crn::is_identifier;
use crate::fraccode::{Format, Value};
use crate::numfmt::fmt17;

/// Name of a wire in a circuit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetId(String);

impl NetId {
    pub fn new(name: impl Into<String>) -> Result<Self, CompileError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(NetId(name))
        } else {
            Err(CompileError::BadName(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&NetId> for NetId {
    fn from(n: &NetId) -> Self {
        n.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NetOrigin {
    Input(Value),
    Const(Value),
    Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetDecl {
    pub origin: NetOrigin,
    /// Encoding total for inputs and constants; the compile-wide total
    /// applies when unset.
    pub total: Option<f64>,
}

impl NetDecl {
    pub fn value(&self) -> Option<Value> {
        match self.origin {
            NetOrigin::Input(v) | NetOrigin::Const(v) => Some(v),
            NetOrigin::Internal => None,
        }
    }
}

/// A unit input: a net, optionally read with its rails swapped, which
/// negates a bipolar value at no reaction cost.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Operand {
    pub net: NetId,
    pub negated: bool,
}

impl Operand {
    pub fn neg(net: &NetId) -> Self {
        Operand { net: net.clone(), negated: true }
    }
}

impl From<&NetId> for Operand {
    fn from(net: &NetId) -> Self {
        Operand { net: net.clone(), negated: false }
    }
}

impl From<NetId> for Operand {
    fn from(net: NetId) -> Self {
        Operand { net, negated: false }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~{}", self.net)
        } else {
            write!(f, "{}", self.net)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub kind: UnitKind,
    pub inputs: Vec<Operand>,
    pub outputs: Vec<NetId>,
}

impl Unit {
    pub(crate) fn label(&self, index: usize) -> String {
        let outs: Vec<&str> = self.outputs.iter().map(NetId::as_str).collect();
        format!("unit #{index} ({} -> {})", self.kind, outs.join(" "))
    }
}

/// Dataflow circuit of arithmetic units.
///
/// Nets are declared as inputs, constants, or implicitly as unit outputs.
/// Several product units may write into the same output net, whose value is
/// then the total-weighted mean of their contracts; every other net has a
/// single producer. Outputs are `(label, net)` pairs so that a label keeps
/// naming the observed value after fan-out redirects it to a copy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    pub(crate) nets: IndexMap<NetId, NetDecl>,
    pub(crate) units: Vec<Unit>,
    pub(crate) outputs: Vec<(NetId, NetId)>,
}

/// Structural facts derived from a circuit.
#[derive(Debug, Clone)]
pub(crate) struct Analysis {
    pub formats: IndexMap<NetId, Format>,
    pub producers: IndexMap<NetId, Vec<usize>>,
    /// `(unit, port)` pairs reading each net.
    pub consumers: IndexMap<NetId, Vec<(usize, usize)>>,
    pub order: Vec<usize>,
    /// 0 for units fed only by inputs and constants.
    pub depth: Vec<u32>,
}

/// Ideal (contract-level) value and total of every net.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub values: IndexMap<NetId, f64>,
    pub totals: IndexMap<NetId, f64>,
}

impl Evaluation {
    pub fn value(&self, net: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n.as_str() == net).map(|(_, v)| *v)
    }
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    fn declare(&mut self, name: &str, origin: NetOrigin, total: Option<f64>) -> Result<NetId, CompileError> {
        let id = NetId::new(name)?;
        if self.nets.contains_key(&id) {
            return Err(CompileError::DuplicateNet(name.to_string()));
        }
        if let Some(t) = total {
            if !(t.is_finite() && t > 0.0) {
                return Err(crate::fraccode::FracError::NonpositiveTotal(t).into());
            }
        }
        self.nets.insert(id.clone(), NetDecl { origin, total });
        Ok(id)
    }

    pub fn input(&mut self, name: &str, v: Value) -> Result<NetId, CompileError> {
        self.declare(name, NetOrigin::Input(v), None)
    }

    pub fn constant(&mut self, name: &str, v: Value) -> Result<NetId, CompileError> {
        self.declare(name, NetOrigin::Const(v), None)
    }

    /// Declare an input or constant with its own encoding total.
    pub fn source_with_total(
        &mut self,
        name: &str,
        v: Value,
        constant: bool,
        total: f64,
    ) -> Result<NetId, CompileError> {
        let origin = if constant { NetOrigin::Const(v) } else { NetOrigin::Input(v) };
        self.declare(name, origin, Some(total))
    }

    /// Replace the value of an input or constant, keeping its format.
    pub fn set_value(&mut self, name: &str, v: f64) -> Result<(), CompileError> {
        let decl = self
            .nets
            .iter_mut()
            .find(|(n, _)| n.as_str() == name)
            .map(|(_, d)| d)
            .ok_or_else(|| CompileError::UnknownNet(name.to_string()))?;
        decl.origin = match decl.origin {
            NetOrigin::Input(old) => NetOrigin::Input(Value::new(v, old.format())?),
            NetOrigin::Const(old) => NetOrigin::Const(Value::new(v, old.format())?),
            NetOrigin::Internal => return Err(CompileError::UnknownNet(name.to_string())),
        };
        Ok(())
    }

    /// Add a unit. Output nets are created on first use; naming an existing
    /// internal net as output makes it a shared output.
    pub fn add_unit(
        &mut self,
        kind: UnitKind,
        inputs: Vec<Operand>,
        outputs: &[&str],
    ) -> Result<Vec<NetId>, CompileError> {
        if !kind.is_valid() || inputs.len() != kind.input_arity() || outputs.len() != kind.output_arity() {
            return Err(CompileError::ArityMismatch {
                kind,
                expected: kind.input_arity(),
                got: inputs.len(),
                expected_out: kind.output_arity(),
                got_out: outputs.len(),
            });
        }
        let mut ids = Vec::with_capacity(outputs.len());
        for name in outputs {
            let id = NetId::new(*name)?;
            match self.nets.get(&id) {
                None => {
                    self.nets.insert(id.clone(), NetDecl { origin: NetOrigin::Internal, total: None });
                }
                Some(d) if d.origin == NetOrigin::Internal => {}
                Some(_) => return Err(CompileError::DuplicateNet(name.to_string())),
            }
            ids.push(id);
        }
        self.units.push(Unit { kind, inputs, outputs: ids.clone() });
        Ok(ids)
    }

    /// Single-output convenience wrapper around [`Circuit::add_unit`].
    pub fn unit(&mut self, kind: UnitKind, inputs: Vec<Operand>, output: &str) -> Result<NetId, CompileError> {
        Ok(self.add_unit(kind, inputs, &[output])?.remove(0))
    }

    pub fn mark_output(&mut self, net: &NetId) -> Result<(), CompileError> {
        if !self.nets.contains_key(net) {
            return Err(CompileError::UnknownNet(net.to_string()));
        }
        self.outputs.push((net.clone(), net.clone()));
        Ok(())
    }

    pub fn nets(&self) -> impl Iterator<Item = (&NetId, &NetDecl)> {
        self.nets.iter()
    }

    pub fn net(&self, name: &str) -> Option<&NetDecl> {
        self.nets.iter().find(|(n, _)| n.as_str() == name).map(|(_, d)| d)
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    /// Output labels and the nets that carry them.
    pub fn outputs(&self) -> &[(NetId, NetId)] {
        &self.outputs
    }

    /// Net observed for output `label`.
    pub fn output_net(&self, label: &str) -> Option<&NetId> {
        self.outputs.iter().find(|(l, _)| l.as_str() == label).map(|(_, n)| n)
    }

    /// Units excluding fan-out copies.
    pub fn count_units(&self, pred: impl Fn(UnitKind) -> bool) -> usize {
        self.units.iter().filter(|u| pred(u.kind)).count()
    }

    pub(crate) fn analyze(&self) -> Result<Analysis, CompileError> {
        let mut producers: IndexMap<NetId, Vec<usize>> = IndexMap::new();
        let mut consumers: IndexMap<NetId, Vec<(usize, usize)>> = IndexMap::new();
        for id in self.nets.keys() {
            producers.insert(id.clone(), Vec::new());
            consumers.insert(id.clone(), Vec::new());
        }
        for (ui, u) in self.units.iter().enumerate() {
            for (port, op) in u.inputs.iter().enumerate() {
                consumers
                    .get_mut(&op.net)
                    .ok_or_else(|| CompileError::UnknownNet(op.net.to_string()))?
                    .push((ui, port));
            }
            for out in &u.outputs {
                producers.get_mut(out).expect("outputs are declared").push(ui);
            }
        }
        for (id, decl) in &self.nets {
            let prods = &producers[id];
            if decl.origin == NetOrigin::Internal && prods.is_empty() {
                return Err(CompileError::NoProducer(id.to_string()));
            }
            if prods.len() > 1 {
                let first = self.units[prods[0]].kind;
                let compatible = prods.iter().all(|&p| {
                    let k = self.units[p].kind;
                    k.is_product() && k.output_format(Format::Bipolar) == first.output_format(Format::Bipolar)
                });
                if !compatible {
                    return Err(CompileError::MultipleProducers(id.to_string()));
                }
            }
        }

        // Kahn's algorithm over units; a unit is ready once every producer
        // of every input net has run.
        let mut pending: Vec<usize> = self
            .units
            .iter()
            .map(|u| u.inputs.iter().map(|op| producers[&op.net].len()).sum())
            .collect();
        let mut ready: VecDeque<usize> = (0..self.units.len()).filter(|&u| pending[u] == 0).collect();
        let mut order = Vec::with_capacity(self.units.len());
        let mut depth = vec![0u32; self.units.len()];
        while let Some(u) = ready.pop_front() {
            order.push(u);
            for out in &self.units[u].outputs {
                for &(consumer, _) in &consumers[out] {
                    depth[consumer] = depth[consumer].max(depth[u] + 1);
                    pending[consumer] -= 1;
                    if pending[consumer] == 0 {
                        ready.push_back(consumer);
                    }
                }
            }
        }
        if order.len() != self.units.len() {
            let stuck = (0..self.units.len()).find(|u| pending[*u] > 0).expect("some unit is stuck");
            return Err(CompileError::Cycle(self.units[stuck].outputs[0].to_string()));
        }

        let mut formats: IndexMap<NetId, Format> = IndexMap::new();
        for (id, decl) in &self.nets {
            if let Some(v) = decl.value() {
                formats.insert(id.clone(), v.format());
            }
        }
        for &ui in &order {
            let u = &self.units[ui];
            let label = || u.label(ui);
            let fmt_of = |op: &Operand| formats[&op.net];
            let data_format = fmt_of(&u.inputs[0]);
            for (op, want) in u.inputs.iter().zip(u.kind.input_formats()) {
                let found = fmt_of(op);
                let expected = want.unwrap_or(data_format);
                if found != expected {
                    return Err(CompileError::FormatMismatch {
                        unit: label(),
                        net: op.net.to_string(),
                        expected,
                        found,
                    });
                }
                if op.negated && found != Format::Bipolar {
                    return Err(CompileError::NegatedUnipolar { unit: label(), net: op.net.to_string() });
                }
            }
            let out_format = u.kind.output_format(data_format);
            for out in &u.outputs {
                match formats.get(out) {
                    Some(&f) if f != out_format => {
                        return Err(CompileError::FormatMismatch {
                            unit: label(),
                            net: out.to_string(),
                            expected: f,
                            found: out_format,
                        })
                    }
                    _ => {
                        formats.insert(out.clone(), out_format);
                    }
                }
            }
        }
        Ok(Analysis { formats, producers, consumers, order, depth })
    }

    /// Check structure and formats without compiling.
    pub fn validate(&self) -> Result<(), CompileError> {
        self.analyze().map(|_| ())
    }

    /// Evaluate every net from the unit contracts and propagate totals.
    ///
    /// Totals follow the accounting used by the compiler: products keep the
    /// smaller input total, a mux keeps its select total, a scaler doubles
    /// its input total and each copy keeps the input total. Shared product
    /// outputs sum their producers' totals and average their values.
    pub fn evaluate(&self, total: f64) -> Result<Evaluation, CompileError> {
        let analysis = self.analyze()?;
        self.evaluate_with(&analysis, total)
    }

    pub(crate) fn evaluate_with(&self, analysis: &Analysis, total: f64) -> Result<Evaluation, CompileError> {
        let mut values: IndexMap<NetId, f64> = IndexMap::new();
        let mut totals: IndexMap<NetId, f64> = IndexMap::new();
        for (id, decl) in &self.nets {
            if let Some(v) = decl.value() {
                values.insert(id.clone(), v.get());
                totals.insert(id.clone(), decl.total.unwrap_or(total));
            }
        }
        // Shared outputs accumulate weighted sums until every producer ran.
        let mut partial: IndexMap<NetId, (f64, f64, usize)> = IndexMap::new();
        for &ui in &analysis.order {
            let u = &self.units[ui];
            let ins: Vec<f64> = u
                .inputs
                .iter()
                .map(|op| if op.negated { -values[&op.net] } else { values[&op.net] })
                .collect();
            let in_totals: Vec<f64> = u.inputs.iter().map(|op| totals[&op.net]).collect();
            let value = u.kind.contract(&ins);
            let out_total = match u.kind {
                UnitKind::Mux => {
                    let (s, s_total) = (ins[2], in_totals[2]);
                    for (port, need) in [(0, (1.0 - s) * s_total), (1, s * s_total)] {
                        if in_totals[port] < need * (1.0 - 1e-12) {
                            return Err(CompileError::InsufficientTotals {
                                unit: u.label(ui),
                                net: u.inputs[port].net.to_string(),
                                available: in_totals[port],
                                required: need,
                            });
                        }
                    }
                    s_total
                }
                UnitKind::Scaler(_) => 2.0 * in_totals[0],
                UnitKind::Copy(_) => in_totals[0],
                _ => in_totals[0].min(in_totals[1]),
            };
            for out in &u.outputs {
                let n_producers = analysis.producers[out].len();
                if n_producers == 1 {
                    values.insert(out.clone(), value);
                    totals.insert(out.clone(), out_total);
                    continue;
                }
                let entry = partial.entry(out.clone()).or_insert((0.0, 0.0, 0));
                entry.0 += out_total * value;
                entry.1 += out_total;
                entry.2 += 1;
                if entry.2 == n_producers {
                    let (weighted, sum, _) = *entry;
                    values.insert(out.clone(), weighted / sum);
                    totals.insert(out.clone(), sum);
                }
            }
        }
        Ok(Evaluation { values, totals })
    }

    /// Line-oriented description, parseable by [`Circuit::parse_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, decl) in &self.nets {
            let (word, v) = match decl.origin {
                NetOrigin::Input(v) => ("input", v),
                NetOrigin::Const(v) => ("const", v),
                NetOrigin::Internal => continue,
            };
            out.push_str(&format!("{word} {id} {} {}", v.format(), fmt17(v.get())));
            if let Some(t) = decl.total {
                out.push_str(&format!(" {}", fmt17(t)));
            }
            out.push('\n');
        }
        for u in &self.units {
            let ins: Vec<String> = u.inputs.iter().map(Operand::to_string).collect();
            let outs: Vec<&str> = u.outputs.iter().map(NetId::as_str).collect();
            out.push_str(&format!("unit {} {} -> {}\n", u.kind, ins.join(" "), outs.join(" ")));
        }
        for (label, net) in &self.outputs {
            if label == net {
                out.push_str(&format!("output {net}\n"));
            } else {
                out.push_str(&format!("output {net} as {label}\n"));
            }
        }
        out
    }

    /// Parse the circuit description format:
    ///
    /// ```text
    /// input <net> <format> <value> [total]
    /// const <net> <format> <value> [total]
    /// unit <kind> <in...> -> <out...>      # `~net` reads a negated net
    /// output <net> [as <label>]
    /// ```
    pub fn parse_text(src: &str) -> Result<Circuit, CompileError> {
        let mut c = Circuit::new();
        let mut pending_outputs = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line_no = i + 1;
            let perr = |message: String| CompileError::Parse { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let with_line = |e: CompileError| perr(e.to_string());
            match words[0] {
                "input" | "const" => {
                    let (name, format, value, total) = match words.as_slice() {
                        [_, n, f, v] => (*n, *f, *v, None),
                        [_, n, f, v, t] => (*n, *f, *v, Some(*t)),
                        _ => return Err(perr(format!("expected `{} <net> <format> <value> [total]`", words[0]))),
                    };
                    let format: Format = format.parse().map_err(|e: crate::fraccode::FracError| perr(e.to_string()))?;
                    let value: f64 = value.parse().map_err(|_| perr(format!("invalid value `{value}`")))?;
                    let value = Value::new(value, format).map_err(|e| perr(e.to_string()))?;
                    let constant = words[0] == "const";
                    match total {
                        None if constant => c.constant(name, value),
                        None => c.input(name, value),
                        Some(t) => {
                            let t: f64 = t.parse().map_err(|_| perr(format!("invalid total `{t}`")))?;
                            c.source_with_total(name, value, constant, t)
                        }
                    }
                    .map_err(with_line)?;
                }
                "unit" => {
                    let arrow = words
                        .iter()
                        .position(|w| *w == "->")
                        .ok_or_else(|| perr("expected `->` in unit line".into()))?;
                    if arrow < 2 {
                        return Err(perr("missing unit kind".into()));
                    }
                    let kind: UnitKind = words[1].parse().map_err(with_line)?;
                    let inputs = words[2..arrow]
                        .iter()
                        .map(|w| {
                            let (negated, name) = match w.strip_prefix('~') {
                                Some(n) => (true, n),
                                None => (false, *w),
                            };
                            NetId::new(name).map(|net| Operand { net, negated })
                        })
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(with_line)?;
                    c.add_unit(kind, inputs, &words[arrow + 1..]).map_err(with_line)?;
                }
                "output" => {
                    let (net, label) = match words.as_slice() {
                        [_, n] => (*n, *n),
                        [_, n, "as", l] => (*n, *l),
                        _ => return Err(perr("expected `output <net> [as <label>]`".into())),
                    };
                    let net = NetId::new(net).map_err(with_line)?;
                    let label = NetId::new(label).map_err(with_line)?;
                    pending_outputs.push((line_no, label, net));
                }
                other => return Err(perr(format!("unknown directive `{other}`"))),
            }
        }
        for (line, label, net) in pending_outputs {
            if !c.nets.contains_key(&net) {
                return Err(CompileError::Parse { line, message: format!("unknown net `{net}`") });
            }
            c.outputs.push((label, net));
        }
        if c.nets.is_empty() {
            return Err(CompileError::Empty);
        }
        c.validate()?;
        Ok(c)
    }
}
