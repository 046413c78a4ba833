//! Dormand–Prince 5(4) with PI step control and a nonnegativity guard.

use super::kinetics::Kinetics;
use super::{SimConfig, SimError};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Exponentially decaying species would otherwise end up subnormal, which
/// is both meaningless and very slow; small negatives go the same way.
const FLUSH_BELOW: f64 = 1e-100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PhaseEnd {
    Steady,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
}

/// Record times `j * every`, j = 1, 2, ...
pub(crate) struct Recorder<'a> {
    pub every: Option<f64>,
    pub next: u64,
    pub sink: &'a mut dyn FnMut(f64, &[f64]),
}

impl Recorder<'_> {
    fn next_time(&self) -> f64 {
        match self.every {
            Some(dt) => self.next as f64 * dt,
            None => f64::INFINITY,
        }
    }
}

pub(crate) struct Dopri {
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    pub stats: StepStats,
}

impl Dopri {
    pub fn new(n: usize) -> Self {
        Dopri {
            k: std::array::from_fn(|_| vec![0.0; n]),
            ytmp: vec![0.0; n],
            ynew: vec![0.0; n],
            stats: StepStats::default(),
        }
    }

    fn steady(f: &[f64], y: &[f64], ss_tol: f64) -> bool {
        let rate = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = y.iter().fold(1.0f64, |m, v| m.max(*v));
        rate < ss_tol * scale
    }

    fn initial_step(&mut self, kin: &Kinetics, y: &[f64], cfg: &SimConfig) -> f64 {
        let sc = |v: f64| cfg.abs_tol + cfg.rel_tol * v.abs();
        let norm = |v: &[f64], y: &[f64]| v.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max(a.abs() / sc(*b)));
        let d0 = norm(y, y);
        let d1 = norm(&self.k[0], y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        for ((t, yi), ki) in self.ytmp.iter_mut().zip(y).zip(&self.k[0]) {
            *t = yi + h0 * ki;
        }
        kin.eval(&self.ytmp, &mut self.k[1]);
        let d2 = self.k[1].iter().zip(&self.k[0]).zip(y).fold(0.0f64, |m, ((a, b), c)| m.max((a - b).abs() / sc(*c)))
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1)
    }

    /// Integrate from `*t` until steady state or `t_end`, whichever first.
    pub fn run(
        &mut self,
        kin: &Kinetics,
        y: &mut [f64],
        t: &mut f64,
        t_end: f64,
        cfg: &SimConfig,
        rec: &mut Recorder<'_>,
    ) -> Result<PhaseEnd, SimError> {
        let n = y.len();
        kin.eval(y, &mut self.k[0]);
        if Self::steady(&self.k[0], y, cfg.ss_tol) {
            return Ok(PhaseEnd::Steady);
        }
        let mut h = self.initial_step(kin, y, cfg);
        let mut err_old = 1e-4f64;
        let mut last_rejected = false;

        loop {
            if *t >= t_end {
                return Ok(PhaseEnd::TimeLimit);
            }
            let target = t_end.min(rec.next_time());
            let (hh, clamped) = if *t + h >= target { (target - *t, true) } else { (h, false) };

            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let ytmp = &mut self.ytmp;
            for i in 0..n {
                ytmp[i] = y[i] + hh * A21 * k1[i];
            }
            kin.eval(ytmp, k2);
            for i in 0..n {
                ytmp[i] = y[i] + hh * (A31 * k1[i] + A32 * k2[i]);
            }
            kin.eval(ytmp, k3);
            for i in 0..n {
                ytmp[i] = y[i] + hh * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            kin.eval(ytmp, k4);
            for i in 0..n {
                ytmp[i] = y[i] + hh * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            kin.eval(ytmp, k5);
            for i in 0..n {
                ytmp[i] = y[i] + hh * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            kin.eval(ytmp, k6);
            let ynew = &mut self.ynew;
            for i in 0..n {
                ynew[i] = y[i] + hh * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            kin.eval(ynew, k7);

            let mut err = 0.0f64;
            let mut negative = false;
            for i in 0..n {
                let e = hh * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(ynew[i].abs());
                err = err.max(e.abs() / sc);
                negative |= ynew[i] < -cfg.abs_tol;
            }
            if !err.is_finite() {
                err = f64::INFINITY;
            }

            if err <= 1.0 && !negative {
                self.stats.accepted += 1;
                *t = if clamped { target } else { *t + hh };
                for (yi, v) in y.iter_mut().zip(ynew.iter()) {
                    *yi = if *v < FLUSH_BELOW { 0.0 } else { *v };
                }
                std::mem::swap(k1, k7);
                let mut fac = SAFETY * err.max(1e-10).powf(-ALPHA) * err_old.powf(BETA);
                fac = fac.clamp(FAC_MIN, FAC_MAX);
                if last_rejected {
                    fac = fac.min(1.0);
                }
                err_old = err.max(1e-4);
                last_rejected = false;
                h = if clamped { h.max(hh * fac) } else { hh * fac };
                if clamped && *t == rec.next_time() {
                    (rec.sink)(*t, y);
                    rec.next += 1;
                }
                if Self::steady(k1, y, cfg.ss_tol) {
                    return Ok(PhaseEnd::Steady);
                }
            } else {
                self.stats.rejected += 1;
                let fac = if err <= 1.0 { 0.5 } else { (SAFETY * err.powf(-ALPHA)).clamp(FAC_MIN, 1.0) };
                h = hh * fac;
                last_rejected = true;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(SimError::StiffnessFailure { t: *t });
                }
            }
        }
    }
}
