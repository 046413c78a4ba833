//! Workloads shared by the kinetics benchmarks.

use fraccrn::compiler::{build_sigmoid, compile, fanout_transform};
use fraccrn::trainer::{PerceptronConfig, Target};
use fraccrn::CompiledCrn;

/// The sigmoid block compiled at input `x`.
pub fn sigmoid_crn(x: f64) -> CompiledCrn {
    let mut c = build_sigmoid();
    c.set_value("x", x).expect("x is an input");
    compile(&fanout_transform(&c).expect("valid circuit"), 1.0).expect("compiles")
}

/// First-epoch configuration of the three-input-plus-bias experiment.
pub fn dataset1_config() -> PerceptronConfig {
    let mut cfg = PerceptronConfig::new(
        vec![0.0, -0.6, 0.4, 1.0],
        vec![0.6, -0.1, 0.4, -0.4],
        Target::Desired(0.835),
        1,
    );
    cfg.sim.t_max = 50.0;
    cfg
}
