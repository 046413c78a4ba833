use indexmap::IndexMap;

use super::circuit::{Circuit, Evaluation, NetId};
use super::units::{unit_reactions, Rails};
use super::CompileError;
use crate::crn::{Network, Rates};
use crate::fraccode::{encode, Format, DEFAULT_TOTAL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    /// Rail-pair total for inputs and constants without their own total.
    pub total: f64,
    pub rates: Rates,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { total: DEFAULT_TOTAL, rates: Rates::default() }
    }
}

/// A circuit lowered to a reaction network.
#[derive(Debug, Clone)]
pub struct CompiledCrn {
    pub network: Network,
    /// Rail species and format of every net.
    pub railmap: IndexMap<NetId, (Rails, Format)>,
    /// Output labels and their observed nets.
    pub outputs: Vec<(NetId, NetId)>,
    /// Contract-level values and totals the kinetics should reproduce.
    pub expected: Evaluation,
}

impl CompiledCrn {
    /// Resolve an output label or net name to its rails and format.
    pub fn lookup(&self, name: &str) -> Option<(&NetId, &Rails, Format)> {
        let net = self
            .outputs
            .iter()
            .find(|(label, _)| label.as_str() == name)
            .map(|(_, n)| n.as_str())
            .unwrap_or(name);
        self.railmap
            .iter()
            .find(|(n, _)| n.as_str() == net)
            .map(|(n, (rails, f))| (n, rails, *f))
    }

    /// Ideal value of an output label or net.
    pub fn expected_value(&self, name: &str) -> Option<f64> {
        let (net, _, _) = self.lookup(name)?;
        self.expected.values.get(net).copied()
    }
}

/// Compile with default rates and the given rail-pair total.
pub fn compile(c: &Circuit, total: f64) -> Result<CompiledCrn, CompileError> {
    compile_with(c, &CompileOptions { total, ..CompileOptions::default() })
}

/// Lower a fanned-out circuit to a network.
///
/// Each net gets rails `<net>_0` / `<net>_1`; inputs and constants are
/// initialized by encoding their value at their total. Reactions of a unit
/// at depth `d` (longest path from the sources) are placed in phase `d`.
pub fn compile_with(c: &Circuit, opts: &CompileOptions) -> Result<CompiledCrn, CompileError> {
    if !(opts.total.is_finite() && opts.total > 0.0) {
        return Err(crate::fraccode::FracError::NonpositiveTotal(opts.total).into());
    }
    let analysis = c.analyze()?;
    for (net, consumers) in &analysis.consumers {
        let observed = c.outputs.iter().filter(|(_, n)| n == net).count();
        let k = consumers.len() + observed;
        if k > 1 {
            return Err(CompileError::FanoutRequired(net.to_string(), k));
        }
    }
    let expected = c.evaluate_with(&analysis, opts.total)?;

    let mut network = Network::new();
    let mut railmap = IndexMap::new();
    for (id, decl) in &c.nets {
        let rails = Rails::for_net(id.as_str());
        network.declare(&rails.zero);
        network.declare(&rails.one);
        if let Some(v) = decl.value() {
            let pair = encode(v, decl.total.unwrap_or(opts.total))?;
            network.set_initial(&rails.zero, pair.c0)?;
            network.set_initial(&rails.one, pair.c1)?;
        }
        railmap.insert(id.clone(), (rails, analysis.formats[id]));
    }
    for &ui in &analysis.order {
        let u = &c.units[ui];
        let inputs: Vec<Rails> = u
            .inputs
            .iter()
            .map(|op| {
                let rails = &railmap[&op.net].0;
                if op.negated {
                    rails.swapped()
                } else {
                    rails.clone()
                }
            })
            .collect();
        let outputs: Vec<Rails> = u.outputs.iter().map(|n| railmap[n].0.clone()).collect();
        for r in unit_reactions(u.kind, &inputs, &outputs, opts.rates)? {
            network.add_reaction(r.in_phase(analysis.depth[ui]));
        }
    }
    Ok(CompiledCrn { network, railmap, outputs: c.outputs.clone(), expected })
}
