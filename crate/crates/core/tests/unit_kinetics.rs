//! Kinetic behaviour of single compiled units against independent contracts.

use fraccrn::compiler::{build_unit, compile, compile_with, Circuit, CompileOptions, UnitKind};
use fraccrn::crn::{RateKind, Rates};
use fraccrn::fraccode::{decode, Format, RailPair};
use fraccrn::simulator::{decode_output, integrate, SimConfig, State};
use fraccrn::CompiledCrn;
use proptest::prelude::*;

fn oracle(kind: UnitKind, v: &[f64]) -> f64 {
    match kind {
        UnitKind::MultU | UnitKind::MultB => v[0] * v[1],
        UnitKind::NMultU => 1.0 - v[0] * v[1],
        UnitKind::NMultB => -v[0] * v[1],
        UnitKind::Mux => (1.0 - v[2]) * v[0] + v[2] * v[1],
        UnitKind::Scaler(m) => (m as f64 * v[0]).clamp(-1.0, 1.0),
        UnitKind::Copy(_) => v[0],
    }
}

fn run(c: &Circuit, cfg: &SimConfig) -> (CompiledCrn, State, fraccrn::simulator::Trajectory) {
    let cc = compile(c, 1.0).unwrap();
    let (tr, last) = integrate(&cc.network, cfg).unwrap();
    (cc, last, tr)
}

fn rail_total(s: &State, net: &str) -> f64 {
    s.get(&format!("{net}_0")).unwrap() + s.get(&format!("{net}_1")).unwrap()
}

fn decode_at(s: &State, net: &str, f: Format) -> f64 {
    let pair = RailPair::new(s.get(&format!("{net}_0")).unwrap(), s.get(&format!("{net}_1")).unwrap()).unwrap();
    decode(pair, f).unwrap()
}

const BIP: std::ops::RangeInclusive<f64> = -1.0..=1.0;
const UNI: std::ops::RangeInclusive<f64> = 0.0..=1.0;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bipolar_products_match(x in BIP, y in BIP, negated in any::<bool>()) {
        let kind = if negated { UnitKind::NMultB } else { UnitKind::MultB };
        let (cc, last, _) = run(&build_unit(kind, &[x, y]).unwrap(), &SimConfig::default());
        prop_assert!((decode_output(&cc, &last, "z").unwrap() - oracle(kind, &[x, y])).abs() < 1e-3);
    }

    #[test]
    fn unipolar_products_match(x in UNI, y in UNI, negated in any::<bool>()) {
        let kind = if negated { UnitKind::NMultU } else { UnitKind::MultU };
        let (cc, last, _) = run(&build_unit(kind, &[x, y]).unwrap(), &SimConfig::default());
        prop_assert!((decode_output(&cc, &last, "z").unwrap() - oracle(kind, &[x, y])).abs() < 1e-3);
    }

    #[test]
    fn mux_matches(x in BIP, y in BIP, s in UNI) {
        let (cc, last, _) = run(&build_unit(UnitKind::Mux, &[x, y, s]).unwrap(), &SimConfig::default());
        prop_assert!((decode_output(&cc, &last, "z").unwrap() - oracle(UnitKind::Mux, &[x, y, s])).abs() < 1e-3);
    }

    #[test]
    fn scaler_matches(x in BIP, m in 1u32..=4) {
        let kind = UnitKind::Scaler(m);
        let (cc, last, _) = run(&build_unit(kind, &[x]).unwrap(), &SimConfig::default());
        prop_assert!((decode_output(&cc, &last, "z").unwrap() - oracle(kind, &[x])).abs() < 1e-3);
    }

    #[test]
    fn copies_match(x in BIP, k in 2usize..=4) {
        let (cc, last, _) = run(&build_unit(UnitKind::Copy(k), &[x]).unwrap(), &SimConfig::default());
        for j in 1..=k {
            let out = decode_output(&cc, &last, &format!("z{j}")).unwrap();
            prop_assert!((out - x).abs() < 1e-3);
        }
    }

    /// Both rails of each input are consumed at the same relative speed, so
    /// the product is already correct while the reaction is still running.
    #[test]
    fn product_ratio_is_invariant_along_the_trajectory(x in BIP, y in BIP, negated in any::<bool>()) {
        let kind = if negated { UnitKind::NMultB } else { UnitKind::MultB };
        let cfg = SimConfig { t_max: 50.0, record_every: Some(0.25), ..SimConfig::default() };
        let (_, _, tr) = run(&build_unit(kind, &[x, y]).unwrap(), &cfg);
        for s in tr.states.iter().filter(|s| rail_total(s, "z") > 1e-6) {
            prop_assert!((decode_at(s, "z", Format::Bipolar) - oracle(kind, &[x, y])).abs() < 1e-4, "t = {}", s.t);
        }
    }

    #[test]
    fn half_mux_ratio_is_invariant_along_the_trajectory(x in BIP, y in BIP) {
        let cfg = SimConfig { t_max: 50.0, record_every: Some(0.25), ..SimConfig::default() };
        let (_, _, tr) = run(&build_unit(UnitKind::Mux, &[x, y, 0.5]).unwrap(), &cfg);
        for s in tr.states.iter().filter(|s| rail_total(s, "z") > 1e-6) {
            prop_assert!((decode_at(s, "z", Format::Bipolar) - oracle(UnitKind::Mux, &[x, y, 0.5])).abs() < 1e-4);
        }
    }

    #[test]
    fn conservation_along_the_trajectory(x in BIP, y in BIP, s in UNI) {
        let cfg = SimConfig { t_max: 30.0, record_every: Some(0.5), ..SimConfig::default() };
        // every product reaction turns one x and one y into one z
        let (_, _, tr) = run(&build_unit(UnitKind::MultB, &[x, y]).unwrap(), &cfg);
        for st in &tr.states {
            prop_assert!((rail_total(st, "x") + rail_total(st, "z") - 1.0).abs() < 1e-9);
            prop_assert!((rail_total(st, "y") + rail_total(st, "z") - 1.0).abs() < 1e-9);
        }
        // every mux reaction turns one data molecule and one select into one z
        let (_, _, tr) = run(&build_unit(UnitKind::Mux, &[x, y, s]).unwrap(), &cfg);
        for st in &tr.states {
            prop_assert!((rail_total(st, "s") + rail_total(st, "z") - 1.0).abs() < 1e-9);
            prop_assert!((rail_total(st, "x") + rail_total(st, "y") + rail_total(st, "z") - 2.0).abs() < 1e-9);
        }
    }
}

#[test]
fn limiting_input_is_consumed_monotonically() {
    let cfg = SimConfig { t_max: 200.0, record_every: Some(0.5), ..SimConfig::default() };
    for kind in [UnitKind::MultB, UnitKind::NMultB, UnitKind::MultU, UnitKind::NMultU] {
        let v = if matches!(kind, UnitKind::MultU | UnitKind::NMultU) { [0.3, 0.8] } else { [0.6, -0.5] };
        let (_, _, tr) = run(&build_unit(kind, &v).unwrap(), &cfg);
        for w in tr.states.windows(2) {
            assert!(rail_total(&w[1], "x") <= rail_total(&w[0], "x") + 1e-15, "{kind}");
        }
    }
    let (_, _, tr) = run(&build_unit(UnitKind::Mux, &[0.2, -0.7, 0.3]).unwrap(), &cfg);
    for w in tr.states.windows(2) {
        assert!(rail_total(&w[1], "s") <= rail_total(&w[0], "s") + 1e-15);
    }
}

#[test]
fn limiting_input_completes_when_its_partner_is_in_excess() {
    for kind in [UnitKind::MultB, UnitKind::NMultB] {
        let mut c = Circuit::new();
        let x = c.input("x", fraccrn::Value::bipolar(0.6).unwrap()).unwrap();
        let y = c.source_with_total("y", fraccrn::Value::bipolar(-0.5).unwrap(), false, 2.0).unwrap();
        let z = c.unit(kind, vec![(&x).into(), (&y).into()], "z").unwrap();
        c.mark_output(&z).unwrap();
        let (cc, last, _) = run(&c, &SimConfig::default());
        assert!(rail_total(&last, "x") < 1e-6);
        assert!((decode_output(&cc, &last, "z").unwrap() - oracle(kind, &[0.6, -0.5])).abs() < 1e-6);
    }
    // a select with both data inputs in excess runs out exponentially
    let (_, last, _) = run(&build_unit(UnitKind::Mux, &[0.2, -0.7, 0.5]).unwrap(), &SimConfig::default());
    assert!(rail_total(&last, "s") < 1e-6);
}

#[test]
fn scaler_saturates_exactly() {
    for (x, want) in [(0.7, 1.0), (-0.6, -1.0), (1.0, 1.0), (-1.0, -1.0), (0.5, 1.0)] {
        let (cc, last, _) = run(&build_unit(UnitKind::Scaler(2), &[x]).unwrap(), &SimConfig::default());
        assert!((decode_output(&cc, &last, "z").unwrap() - want).abs() < 1e-3, "x = {x}");
    }
}

#[test]
fn scaler_rails_follow_the_amplification_algebra() {
    // (c0, c1) = (0.35, 0.65) encodes 0.3; the output keeps 0.4 of rail 0 and 1.6 of rail 1
    let (cc, last, _) = run(&build_unit(UnitKind::Scaler(2), &[0.3]).unwrap(), &SimConfig::default());
    assert!((last.get("z_0").unwrap() - 0.4).abs() < 1e-6);
    assert!((last.get("z_1").unwrap() - 1.6).abs() < 1e-6);
    assert!((decode_output(&cc, &last, "z").unwrap() - 0.6).abs() < 1e-6);
}

fn sample_circuits() -> Vec<(Circuit, &'static str)> {
    let mut out = Vec::new();
    for x in [-0.9, -0.3, 0.35, 0.8] {
        out.push((build_unit(UnitKind::Scaler(2), &[x]).unwrap(), "z"));
        out.push((build_unit(UnitKind::MultB, &[x, 0.7]).unwrap(), "z"));
        out.push((build_unit(UnitKind::Mux, &[x, -0.2, 0.5]).unwrap(), "z"));
        let mut s = fraccrn::compiler::build_sigmoid();
        s.set_value("x", x).unwrap();
        out.push((fraccrn::fanout_transform(&s).unwrap(), "y"));
    }
    out
}

#[test]
fn faster_annihilation_barely_moves_outputs() {
    for (c, out) in sample_circuits() {
        let cc = compile(&c, 1.0).unwrap();
        let fast = compile_with(&c, &CompileOptions { total: 1.0, rates: Rates::new(1.0, 10_000.0).unwrap() }).unwrap();
        assert_eq!(fast.network, cc.network.scale_rates(RateKind::Fast, 10.0));
        let cfg = SimConfig::default();
        let a = decode_output(&cc, &integrate(&cc.network, &cfg).unwrap().1, out).unwrap();
        let b = decode_output(&fast, &integrate(&fast.network, &cfg).unwrap().1, out).unwrap();
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    }
}

#[test]
fn tighter_tolerance_barely_moves_outputs() {
    for (c, out) in sample_circuits() {
        let cc = compile(&c, 1.0).unwrap();
        let loose = SimConfig::default();
        let tight = SimConfig { rel_tol: loose.rel_tol / 10.0, ..loose };
        let a = decode_output(&cc, &integrate(&cc.network, &loose).unwrap().1, out).unwrap();
        let b = decode_output(&cc, &integrate(&cc.network, &tight).unwrap().1, out).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn trajectories_are_strictly_increasing_and_nonnegative() {
    let mut c = fraccrn::compiler::build_sigmoid();
    c.set_value("x", -0.8).unwrap();
    let cc = compile(&fraccrn::fanout_transform(&c).unwrap(), 1.0).unwrap();
    let cfg = SimConfig { t_max: 40.0, record_every: Some(1.5), ..SimConfig::default() };
    let (tr, last) = integrate(&cc.network, &cfg).unwrap();
    assert!(tr.len() > 10);
    for w in tr.states.windows(2) {
        assert!(w[1].t > w[0].t);
    }
    assert!(tr.states.iter().all(|s| s.conc.values().all(|c| *c >= 0.0)));
    assert_eq!(tr.states.last().unwrap(), &last);
    let csv = tr.to_csv();
    assert_eq!(csv.lines().count(), tr.len() + 1);
    assert!(csv.starts_with("t,x_0,x_1,"));
}

#[test]
fn single_phase_networks_ignore_staging() {
    let cc = compile(&build_unit(UnitKind::MultB, &[0.6, -0.5]).unwrap(), 1.0).unwrap();
    let staged = integrate(&cc.network, &SimConfig::default()).unwrap().1;
    let flat = integrate(&cc.network, &SimConfig { staged: false, ..SimConfig::default() }).unwrap().1;
    assert_eq!(staged, flat);
}

#[test]
fn same_input_same_bits() {
    let mut c = fraccrn::compiler::build_sigmoid();
    c.set_value("x", 0.45).unwrap();
    let cc = compile(&fraccrn::fanout_transform(&c).unwrap(), 1.0).unwrap();
    let a = integrate(&cc.network, &SimConfig::default()).unwrap();
    let b = integrate(&cc.network, &SimConfig::default()).unwrap();
    assert_eq!(a, b);
}
