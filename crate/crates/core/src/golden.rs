//! Reference arithmetic for the perceptron.
//!
//! Every function here performs the same floating-point operations, in the
//! same order, as the ideal evaluation of the corresponding circuit, so the
//! two agree bit for bit. Kinetics error can then be measured against this
//! model without approximation error in the way.

use thiserror::Error;

use crate::compiler::UnitKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GoldenError {
    #[error("{what} = {value} is outside [-1, 1]")]
    OutOfRange { what: String, value: f64 },
    #[error("desired output {0} must lie strictly inside (0, 1)")]
    Domain(f64),
    #[error("{0}")]
    Shape(String),
}

fn check_bipolar(what: impl FnOnce() -> String, value: f64) -> Result<(), GoldenError> {
    if (-1.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(GoldenError::OutOfRange { what: what(), value })
    }
}

fn half_mux(a: f64, b: f64) -> f64 {
    (1.0 - 0.5) * a + 0.5 * b
}

/// `1/2 + x/4 - x^3/48 + x^5/480` in the nested form the circuit computes.
pub fn sigmoid_poly(x: f64) -> Result<f64, GoldenError> {
    check_bipolar(|| "sigmoid input".into(), x)?;
    let x2 = x * x;
    let b = x2 * (-1.0 / 60.0);
    let c = half_mux(1.0 / 6.0, b);
    let d = x2 * c;
    let e = half_mux(-1.0, d);
    let f = -(x * e);
    Ok(half_mux(1.0, f))
}

/// `clamp(M x, -1, 1)`.
pub fn scaler_clip(x: f64, m: f64) -> f64 {
    (m * x).clamp(-1.0, 1.0)
}

/// Desired output remapped through the inverse sigmoid and the `1/N` scale:
/// `1 / (1 + (d / (1 - d))^(-1/N))`.
pub fn dprime(d: f64, n: usize) -> Result<f64, GoldenError> {
    if !(d > 0.0 && d < 1.0) {
        return Err(GoldenError::Domain(d));
    }
    if n == 0 {
        return Err(GoldenError::Shape("N must be at least 1".into()));
    }
    Ok(1.0 / (1.0 + (d / (1.0 - d)).powf(-1.0 / n as f64)))
}

/// Ideal output of a single unit: the products, `1 - xy` for the unipolar
/// NMult, `(1 - s) x + s y` for the mux, the clamped scaler and the copy.
pub fn unit(kind: UnitKind, inputs: &[f64]) -> Result<f64, GoldenError> {
    if inputs.len() != kind.input_arity() {
        return Err(GoldenError::Shape(format!("{kind} takes {} inputs, got {}", kind.input_arity(), inputs.len())));
    }
    let v = inputs;
    Ok(match kind {
        UnitKind::MultU | UnitKind::MultB => v[0] * v[1],
        UnitKind::NMultU => 1.0 - v[0] * v[1],
        UnitKind::NMultB => -(v[0] * v[1]),
        UnitKind::Mux => (1.0 - v[2]) * v[0] + v[2] * v[1],
        UnitKind::Scaler(m) => scaler_clip(v[0], f64::from(m)),
        UnitKind::Copy(_) => v[0],
    })
}

/// `E = (y' - d')^2 / 2`.
pub fn loss(y: f64, dprime: f64) -> f64 {
    0.5 * (y - dprime) * (y - dprime)
}

/// Internal nodes of the weight-change block.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaWTrace {
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n4: f64,
    pub n5: f64,
    pub n6: f64,
    pub dw: Vec<f64>,
}

/// `dw_i = (1/2)(d' - y')(1/2)(y' - y'^2) x_i`, node by node.
pub fn delta_w(y: f64, dprime: f64, x: &[f64]) -> DeltaWTrace {
    let n1 = -y;
    let n2 = half_mux(dprime, n1);
    let n3 = y * y;
    let n4 = -n3;
    let n5 = half_mux(y, n4);
    let n6 = n2 * n5;
    let dw = x.iter().map(|xi| n6 * xi).collect();
    DeltaWTrace { n1, n2, n3, n4, n5, n6, dw }
}

/// `(1/N) sum w_i x_i`, summed in index order.
pub fn inner_product(x: &[f64], w: &[f64]) -> f64 {
    let sum = x.iter().zip(w).fold(0.0, |acc, (xi, wi)| acc + 1.0 * (xi * wi));
    sum / x.len() as f64
}

/// One training epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenEpoch {
    pub u: f64,
    pub y: f64,
    pub loss: f64,
    pub trace: DeltaWTrace,
    pub w_next: Vec<f64>,
}

pub fn golden_epoch(x: &[f64], w: &[f64], dprime: f64) -> Result<GoldenEpoch, GoldenError> {
    if x.len() != w.len() || x.is_empty() {
        return Err(GoldenError::Shape(format!("{} inputs but {} weights", x.len(), w.len())));
    }
    for (i, (xi, wi)) in x.iter().zip(w).enumerate() {
        check_bipolar(|| format!("x{}", i + 1), *xi)?;
        check_bipolar(|| format!("w{}", i + 1), *wi)?;
    }
    check_bipolar(|| "d'".into(), dprime)?;
    let u = inner_product(x, w);
    let y = sigmoid_poly(u)?;
    let trace = delta_w(y, dprime, x);
    let w_next = w.iter().zip(&trace.dw).map(|(wi, dwi)| scaler_clip(half_mux(*wi, *dwi), 2.0)).collect();
    Ok(GoldenEpoch { u, y, loss: loss(y, dprime), trace, w_next })
}

/// Repeat [`golden_epoch`] on the same sample, threading the weights.
pub fn golden_train(x: &[f64], w0: &[f64], dprime: f64, epochs: usize) -> Result<Vec<GoldenEpoch>, GoldenError> {
    if epochs == 0 {
        return Err(GoldenError::Shape("epochs must be at least 1".into()));
    }
    let mut w = w0.to_vec();
    let mut out = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let e = golden_epoch(x, &w, dprime)?;
        w.clone_from(&e.w_next);
        out.push(e);
    }
    Ok(out)
}

/// First epoch (1-based) whose output is within `tol` of `dprime`.
pub fn epochs_to_converge(log: &[GoldenEpoch], dprime: f64, tol: f64) -> Option<usize> {
    log.iter().position(|e| (e.y - dprime).abs() <= tol).map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    const X: [f64; 4] = [0.0, -0.6, 0.4, 1.0];
    const W0: [f64; 4] = [0.6, -0.1, 0.4, -0.4];

    fn true_sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    fn rat(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap()
    }

    fn rat_int(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn to_f64(r: &BigRational) -> f64 {
        // 40 decimal digits are plenty to compare at 1e-15
        let scale = BigInt::from(10).pow(40);
        let q = (r.numer() * &scale) / r.denom();
        q.to_string().parse::<f64>().unwrap() / 1e40
    }

    #[test]
    fn sigmoid_examples() {
        assert_eq!(sigmoid_poly(0.0).unwrap(), 0.5);
        assert!((sigmoid_poly(1.0).unwrap() - 0.73125).abs() < 1e-15);
        assert!((sigmoid_poly(-1.0).unwrap() - 0.26875).abs() < 1e-15);
        assert!(matches!(sigmoid_poly(1.5), Err(GoldenError::OutOfRange { .. })));
        assert!(sigmoid_poly(f64::NAN).is_err());
    }

    #[test]
    fn sigmoid_tracks_the_true_sigmoid() {
        let worst = (0..=2000)
            .map(|i| -1.0 + i as f64 / 1000.0)
            .map(|x| (sigmoid_poly(x).unwrap() - true_sigmoid(x)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 2e-4, "worst gap {worst}");
        assert!(worst > 1.9e-4, "gap at the ends should be about 1.9e-4");
    }

    #[test]
    fn sigmoid_matches_exact_polynomial() {
        for i in 0..=40 {
            let x = -1.0 + i as f64 / 20.0;
            let r = rat(x);
            let exact = rat_int(1, 2) + &r / rat_int(4, 1) - r.pow(3) / rat_int(48, 1) + r.pow(5) / rat_int(480, 1);
            assert!((sigmoid_poly(x).unwrap() - to_f64(&exact)).abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn unit_examples() {
        assert!((unit(UnitKind::MultB, &[0.6, -0.5]).unwrap() + 0.3).abs() < 1e-16);
        assert_eq!(unit(UnitKind::NMultU, &[0.5, 0.5]).unwrap(), 0.75);
        assert_eq!(unit(UnitKind::Mux, &[0.2, -0.6, 0.25]).unwrap(), 0.75 * 0.2 - 0.25 * 0.6);
        assert_eq!(unit(UnitKind::Scaler(2), &[0.7]).unwrap(), 1.0);
        assert_eq!(unit(UnitKind::Copy(3), &[-0.4]).unwrap(), -0.4);
        assert!(unit(UnitKind::MultB, &[0.1]).is_err());
    }

    #[test]
    fn scaler_clip_examples() {
        assert_eq!(scaler_clip(0.3, 2.0), 0.6);
        assert_eq!(scaler_clip(0.7, 2.0), 1.0);
        assert_eq!(scaler_clip(-0.6, 2.0), -1.0);
    }

    #[test]
    fn dprime_examples() {
        assert!((dprime(0.835, 4).unwrap() - 0.6).abs() < 5e-4);
        assert!((dprime(0.309, 4).unwrap() - 0.45).abs() < 5e-4);
        assert_eq!(dprime(0.835, 4).unwrap(), 0.5999775489010538);
        assert_eq!(dprime(0.309, 4).unwrap(), 0.4498690905045296);
        for n in 1..8 {
            assert_eq!(dprime(0.5, n).unwrap(), 0.5);
        }
        assert!(matches!(dprime(1.0, 4), Err(GoldenError::Domain(_))));
        assert!(matches!(dprime(0.0, 4), Err(GoldenError::Domain(_))));
    }

    #[test]
    fn dprime_inverts_scaled_sigmoid() {
        // sigma(N * logit(d')) = d
        for &d in &[0.1, 0.309, 0.5, 0.835, 0.99] {
            let p = dprime(d, 4).unwrap();
            let logit = (p / (1.0 - p)).ln();
            assert!((true_sigmoid(4.0 * logit) - d).abs() < 1e-12);
        }
    }

    #[test]
    fn first_epoch_of_dataset_one() {
        let e = golden_epoch(&X, &W0, 0.6).unwrap();
        assert_eq!(e.u, -0.045);
        assert!((e.y - 0.4887519).abs() < 1e-7);
        assert!((e.trace.dw[3] - 0.0069494).abs() < 1e-7);
        assert!((e.w_next[3] + 0.3930506).abs() < 1e-7);

        let e = golden_epoch(&X, &W0, dprime(0.835, 4).unwrap()).unwrap();
        assert_eq!(e.y, 0.4887518980530664);
        assert!((e.trace.dw[3] - 0.006948085116296231).abs() < 1e-17);
        assert!((e.w_next[3] + 0.3930519148837038).abs() < 1e-16);
    }

    #[test]
    fn first_epoch_exact_rational() {
        let d = 0.6;
        let e = golden_epoch(&X, &W0, d).unwrap();
        let n = rat_int(X.len() as i64, 1);
        let u = X.iter().zip(&W0).fold(rat_int(0, 1), |acc, (x, w)| acc + rat(*x) * rat(*w)) / n;
        let y = rat_int(1, 2) + &u / rat_int(4, 1) - u.pow(3) / rat_int(48, 1) + u.pow(5) / rat_int(480, 1);
        let half = rat_int(1, 2);
        let n6 = &half * (rat(d) - &y) * &half * (&y - &y * &y);
        for i in 0..4 {
            let dw = &n6 * rat(X[i]);
            let w_next = rat(W0[i]) + &dw;
            assert!((e.trace.dw[i] - to_f64(&dw)).abs() < 1e-16);
            assert!((e.w_next[i] - to_f64(&w_next)).abs() < 1e-15);
        }
        assert!((e.u - to_f64(&u)).abs() < 1e-17);
        assert!((e.y - to_f64(&y)).abs() < 1e-15);
    }

    #[test]
    fn trivial_epochs() {
        let zero = [0.0; 4];
        let e = golden_epoch(&zero, &W0, 0.6).unwrap();
        assert_eq!((e.u, e.y), (0.0, 0.5));
        assert!(e.trace.dw.iter().all(|d| *d == 0.0));
        assert_eq!(e.w_next, W0.to_vec());

        let y = golden_epoch(&X, &W0, 0.6).unwrap().y;
        let fixed = golden_epoch(&X, &W0, y).unwrap();
        assert_eq!(fixed.w_next, W0.to_vec());
        assert_eq!(fixed.loss, 0.0);

        let one = golden_train(&X, &W0, 0.6, 1).unwrap();
        assert_eq!(one, vec![golden_epoch(&X, &W0, 0.6).unwrap()]);
        assert!(golden_train(&X, &W0, 0.6, 0).is_err());
        assert!(golden_epoch(&X, &W0[..3], 0.6).is_err());
        assert!(golden_epoch(&[1.2, 0.0, 0.0, 1.0], &W0, 0.6).is_err());
    }

    #[test]
    fn saturation_clamps_weights() {
        let e = golden_epoch(&[1.0], &[1.0], -1.0).unwrap();
        assert!(e.trace.dw[0] < 0.0);
        let e = golden_epoch(&[1.0], &[1.0], 1.0).unwrap();
        assert!(e.trace.dw[0] > 0.0);
        assert_eq!(e.w_next[0], 1.0);
    }

    fn fd_check(x: &[f64], w: &[f64], d: f64, f: impl Fn(f64) -> f64, tol: f64) {
        let n = x.len() as f64;
        let energy = |w: &[f64]| {
            let y = f(inner_product(x, w));
            0.5 * (y - d) * (y - d)
        };
        let y = f(inner_product(x, w));
        for i in 0..x.len() {
            if x[i] == 0.0 {
                continue;
            }
            let h = 1e-5;
            let mut wp = w.to_vec();
            let mut wm = w.to_vec();
            wp[i] += h;
            wm[i] -= h;
            let grad = (energy(&wp) - energy(&wm)) / (2.0 * h);
            let rule = 0.5 * (d - y) * 0.5 * (y - y * y) * x[i];
            let target = -(n / 4.0) * grad;
            assert!(((rule - target) / target).abs() < tol, "i={i}: rule {rule} vs fd {target}");
        }
    }

    #[test]
    fn update_rule_is_scaled_gradient_descent() {
        // y(1-y) is the derivative of the logistic function; the polynomial
        // only reproduces it near the origin, where the data sits
        let poly = |u: f64| sigmoid_poly(u).unwrap();
        fd_check(&X, &W0, 0.6, poly, 1e-6);
        fd_check(&X, &W0, 0.45, poly, 1e-6);
        fd_check(&[0.5, -0.3, 1.0], &[0.2, 0.4, -0.1], 0.7, poly, 1e-6);
        // with the logistic function itself the identity is exact everywhere
        fd_check(&X, &[1.0, -1.0, 1.0, 1.0], 0.2, true_sigmoid, 1e-6);
        fd_check(&[1.0, 1.0], &[0.9, 0.8], 0.1, true_sigmoid, 1e-6);
    }

    #[test]
    fn training_converges_on_both_datasets() {
        for (d, expect) in [(0.835, 420), (0.309, 231)] {
            let p = dprime(d, 4).unwrap();
            let log = golden_train(&X, &W0, p, 2000).unwrap();
            assert_eq!(epochs_to_converge(&log, p, 0.01), Some(expect), "d = {d}");
            for pair in log.windows(2) {
                assert!(pair[1].loss <= pair[0].loss + 1e-12);
                assert!((pair[1].y - p).abs() <= (pair[0].y - p).abs() + 1e-12);
            }
            for e in &log {
                assert!(e.w_next.iter().all(|w| (-1.0..=1.0).contains(w)));
            }
        }
    }

    #[test]
    fn second_dataset_drives_weights_down_on_positive_inputs() {
        let p = dprime(0.309, 4).unwrap();
        let e = golden_epoch(&X, &W0, p).unwrap();
        assert!(e.y > p);
        assert!(e.trace.dw[3] < 0.0);
        assert!(e.trace.dw[1] > 0.0, "negative input flips the sign again");
    }

    proptest! {
        #[test]
        fn sigmoid_is_point_symmetric(x in -1.0f64..=1.0) {
            prop_assert_eq!(sigmoid_poly(x).unwrap() + sigmoid_poly(-x).unwrap(), 1.0);
        }

        #[test]
        fn update_rule_near_the_origin(
            x in proptest::collection::vec(prop_oneof![-1.0f64..=-0.1, 0.1f64..=1.0], 4),
            w in proptest::collection::vec(-0.2f64..=0.2, 4),
            d in 0.0f64..=0.3,
        ) {
            fd_check(&x, &w, d, |u| sigmoid_poly(u).unwrap(), 1e-6);
        }

        #[test]
        fn trace_stays_in_range(
            x in proptest::collection::vec(-1.0f64..=1.0, 1..6),
            w in proptest::collection::vec(-1.0f64..=1.0, 6),
            d in -1.0f64..=1.0,
        ) {
            let w = &w[..x.len()];
            let e = golden_epoch(&x, w, d).unwrap();
            prop_assert!(e.u.abs() <= 1.0);
            prop_assert!((0.0..=1.0).contains(&e.y));
            prop_assert!(e.loss >= 0.0);
            prop_assert!(e.trace.n2.abs() <= 1.0 && e.trace.n5.abs() <= 1.0);
            prop_assert!(e.trace.dw.iter().all(|v| v.abs() <= 1.0));
            prop_assert!(e.w_next.iter().all(|v| v.abs() <= 1.0));
        }
    }
}
