use fraccrn::compiler::builders::{delta_w_into, sigmoid_into};
use fraccrn::compiler::{
    build_sigmoid, build_unit, compile, fanout_transform, Circuit, Negation, NetId, Operand, UnitKind,
};
use fraccrn::crn::Network;
use fraccrn::golden;
use fraccrn::trainer::{build_perceptron_circuit, PerceptronConfig, Target};
use fraccrn::Value;
use proptest::prelude::*;

fn outputs(c: &Circuit) -> Vec<(String, f64)> {
    let e = c.evaluate(1.0).unwrap();
    c.outputs()
        .iter()
        .map(|(label, net)| (label.to_string(), e.value(net.as_str()).unwrap()))
        .collect()
}

/// A random DAG: each step adds one unit reading earlier nets, with
/// repeats allowed so that fan-out is frequent.
fn random_circuit(inputs: &[f64], steps: &[(u8, usize, usize, bool)]) -> Circuit {
    let mut c = Circuit::new();
    let mut nets: Vec<NetId> = inputs
        .iter()
        .enumerate()
        .map(|(i, v)| c.input(&format!("in{i}"), Value::bipolar(*v).unwrap()).unwrap())
        .collect();
    for (i, &(kind, a, b, neg)) in steps.iter().enumerate() {
        let pick = |k: usize, neg: bool| {
            let n = &nets[k % nets.len()];
            if neg { Operand::neg(n) } else { Operand::from(n) }
        };
        let name = format!("n{i}");
        let out = match kind % 4 {
            0 => c.unit(UnitKind::MultB, vec![pick(a, neg), pick(b, false)], &name),
            1 => c.unit(UnitKind::NMultB, vec![pick(a, false), pick(b, neg)], &name),
            2 => {
                let s = c.constant(&format!("s{i}"), Value::unipolar(0.5).unwrap()).unwrap();
                c.unit(UnitKind::Mux, vec![pick(a, neg), pick(b, false), (&s).into()], &name)
            }
            _ => c.unit(UnitKind::Scaler(2), vec![pick(a, neg)], &name),
        }
        .unwrap();
        nets.push(out);
    }
    // observe the last net and one earlier net, which may also be consumed
    c.mark_output(nets.last().unwrap()).unwrap();
    let early = nets[nets.len() / 2].clone();
    if &early != nets.last().unwrap() {
        c.mark_output(&early).unwrap();
    }
    c
}

proptest! {
    #[test]
    fn fanout_preserves_semantics(
        inputs in proptest::collection::vec(-1.0f64..=1.0, 1..4),
        steps in proptest::collection::vec((any::<u8>(), any::<usize>(), any::<usize>(), any::<bool>()), 1..12),
    ) {
        let c = random_circuit(&inputs, &steps);
        let f = fanout_transform(&c).unwrap();
        prop_assert_eq!(outputs(&c), outputs(&f));
        // every net now has at most one reader
        compile(&f, 1.0).unwrap();
        prop_assert_eq!(fanout_transform(&f).unwrap(), f);
    }

    #[test]
    fn golden_epoch_equals_ideal_circuit(
        x in proptest::collection::vec(-1.0f64..=1.0, 1..6),
        w in proptest::collection::vec(-1.0f64..=1.0, 6),
        d in -1.0f64..=1.0,
        nmult in any::<bool>(),
    ) {
        let w = w[..x.len()].to_vec();
        let mut cfg = PerceptronConfig::new(x.clone(), w.clone(), Target::DesiredPrime(d.abs()), 1);
        cfg.negation = if nmult { Negation::NMult } else { Negation::RailSwap };
        let c = build_perceptron_circuit(&cfg).unwrap();
        let g = golden::golden_epoch(&x, &w, d.abs()).unwrap();
        let vals = outputs(&c);
        prop_assert_eq!(vals[0].1, g.y);
        for (i, wn) in g.w_next.iter().enumerate() {
            prop_assert_eq!(vals[i + 1].1, *wn);
        }
    }

    #[test]
    fn delta_w_nodes_match_trace(y in 0.0f64..=1.0, d in 0.0f64..=1.0, x in proptest::collection::vec(-1.0f64..=1.0, 1..5)) {
        let mut c = Circuit::new();
        let yn = c.input("y", Value::bipolar(y).unwrap()).unwrap();
        let dn = c.constant("dp", Value::bipolar(d).unwrap()).unwrap();
        let xs: Vec<Operand> = x.iter().enumerate().map(|(i, v)| c.input(&format!("x{i}"), Value::bipolar(*v).unwrap()).unwrap().into()).collect();
        let nets = delta_w_into(&mut c, &yn, &dn, &xs, Negation::RailSwap, "").unwrap();
        let e = fanout_transform(&c).unwrap().evaluate(1.0).unwrap();
        let t = golden::delta_w(y, d, &x);
        prop_assert_eq!(e.value(nets.n2.as_str()).unwrap(), t.n2);
        prop_assert_eq!(e.value(nets.n5.as_str()).unwrap(), t.n5);
        prop_assert_eq!(e.value(nets.n6.as_str()).unwrap(), t.n6);
        for (net, dw) in nets.dw.iter().zip(&t.dw) {
            prop_assert_eq!(e.value(net.as_str()).unwrap(), *dw);
        }
    }

    #[test]
    fn sigmoid_block_equals_golden(x in -1.0f64..=1.0) {
        let mut c = build_sigmoid();
        c.set_value("x", x).unwrap();
        prop_assert_eq!(outputs(&c)[0].1, golden::sigmoid_poly(x).unwrap());
    }
}

#[test]
fn sigmoid_inside_a_larger_circuit_uses_prefixed_nets() {
    let mut c = Circuit::new();
    let a = c.input("a", Value::bipolar(0.3).unwrap()).unwrap();
    let y1 = sigmoid_into(&mut c, (&a).into(), "p_", "y1").unwrap();
    let y2 = sigmoid_into(&mut c, Operand::neg(&a), "q_", "y2").unwrap();
    c.mark_output(&y1).unwrap();
    c.mark_output(&y2).unwrap();
    let v = outputs(&fanout_transform(&c).unwrap());
    assert_eq!(v[0].1 + v[1].1, 1.0);
    assert!(c.nets().any(|(n, _)| n.as_str() == "p_x2"));
}

#[test]
fn circuit_text_round_trips() {
    let cfg = PerceptronConfig::new(vec![0.0, -0.6, 0.4, 1.0], vec![0.6, -0.1, 0.4, -0.4], Target::Desired(0.835), 1);
    for negation in [Negation::RailSwap, Negation::NMult] {
        let c = build_perceptron_circuit(&PerceptronConfig { negation, ..cfg.clone() }).unwrap();
        let text = c.to_text();
        assert_eq!(Circuit::parse_text(&text).unwrap(), c);
    }
}

#[test]
fn compiled_network_text_round_trips() {
    let c = build_perceptron_circuit(&PerceptronConfig::new(vec![0.5, 1.0], vec![-0.3, 0.9], Target::DesiredPrime(0.7), 1))
        .unwrap();
    let cc = compile(&c, 1.0).unwrap();
    let text = cc.network.emit_text();
    let back = Network::parse_text(&text).unwrap();
    assert_eq!(back, cc.network);
    assert_eq!(back.emit_text(), text);
}

#[test]
fn reaction_counts_per_unit() {
    let count = |kind, v: &[f64]| compile(&build_unit(kind, v).unwrap(), 1.0).unwrap().network.reactions().len();
    assert_eq!(count(UnitKind::MultB, &[0.1, 0.2]), 4);
    assert_eq!(count(UnitKind::NMultU, &[0.1, 0.2]), 4);
    assert_eq!(count(UnitKind::Mux, &[0.1, 0.2, 0.5]), 4);
    assert_eq!(count(UnitKind::Scaler(2), &[0.1]), 4);
    assert_eq!(count(UnitKind::Copy(3), &[0.1]), 2);
}

#[test]
fn sigmoid_phases_follow_unit_depth() {
    let cc = compile(&fanout_transform(&build_sigmoid()).unwrap(), 1.0).unwrap();
    // copy, x*x, copy of x2, b, c, d, e, f, y
    assert_eq!(cc.network.max_phase(), 8);
    assert!(cc.network.reactions().iter().any(|r| r.phase() == 0));
}

#[test]
fn starved_mux_is_rejected() {
    let c = Circuit::parse_text(
        "input x bipolar 0.2 0.1\ninput y bipolar 0.4\nconst s unipolar 0.5\nunit mux x y s -> z\noutput z\n",
    )
    .unwrap();
    assert!(matches!(compile(&c, 1.0), Err(fraccrn::CompileError::InsufficientTotals { .. })));
}
