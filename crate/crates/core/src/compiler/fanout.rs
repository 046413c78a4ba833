use super::circuit::{Circuit, NetId, Unit};
use super::{CompileError, UnitKind};

/// Give every net at most one consumer.
///
/// A net read at `k > 1` sites (unit input ports plus output labels) gets a
/// `Copy(k)` unit; each site is rewired to its own copy. Negated reads stay
/// negated on the copy. Decoded semantics are unchanged.
pub fn fanout_transform(c: &Circuit) -> Result<Circuit, CompileError> {
    let analysis = c.analyze()?;
    let mut out = c.clone();

    for (net, consumers) in &analysis.consumers {
        let label_sites: Vec<usize> = out
            .outputs
            .iter()
            .enumerate()
            .filter(|(_, (_, n))| n == net)
            .map(|(i, _)| i)
            .collect();
        let k = consumers.len() + label_sites.len();
        if k < 2 {
            continue;
        }
        let copies: Vec<NetId> = (1..=k).map(|j| fresh_name(&out, net, j)).collect();
        for id in &copies {
            out.nets.insert(id.clone(), super::NetDecl { origin: super::NetOrigin::Internal, total: None });
        }
        let mut next = copies.iter();
        for &(unit, port) in consumers {
            out.units[unit].inputs[port].net = next.next().expect("k copies").clone();
        }
        for i in label_sites {
            out.outputs[i].1 = next.next().expect("k copies").clone();
        }
        out.units.push(Unit {
            kind: UnitKind::Copy(k),
            inputs: vec![net.into()],
            outputs: copies,
        });
    }
    Ok(out)
}

fn fresh_name(c: &Circuit, net: &NetId, j: usize) -> NetId {
    let mut name = format!("{net}_c{j}");
    while c.nets.keys().any(|n| n.as_str() == name) {
        name.push('_');
    }
    NetId::new(name).expect("derived from an identifier")
}
