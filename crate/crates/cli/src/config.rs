//! Flat `key = value` run configuration.
//!
//! ```text
//! # dataset 1
//! n = 4
//! inputs = 0, -0.6, 0.4
//! weights = 0.6, -0.1, 0.4
//! bias = -0.4
//! desired = 0.835
//! epochs = 500
//! ```
//!
//! `inputs`/`weights` hold the non-bias entries when `bias` is given (the
//! bias input `x_N = 1` is appended), or all `n` entries when it is not.

use std::collections::HashMap;

use fraccrn::compiler::Negation;
use fraccrn::trainer::{PerceptronConfig, Target};
use fraccrn::Rates;

const KEYS: &[&str] = &[
    "n",
    "inputs",
    "weights",
    "bias",
    "desired",
    "desired_prime",
    "epochs",
    "slow_rate",
    "fast_rate",
    "t_max",
    "ss_tol",
    "negation",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, message: message.into() })
}

fn number(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(line, format!("{key}: '{v}' is not a finite number")),
    }
}

fn list(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| number(line, key, s.trim())).collect()
}

pub fn parse_config(src: &str) -> Result<PerceptronConfig, ConfigError> {
    let mut kv: HashMap<&str, (usize, &str)> = HashMap::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let Some((k, v)) = text.split_once('=') else {
            return err(line, format!("expected key = value, got '{text}'"));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return err(line, format!("unknown key '{k}'"));
        }
        if kv.insert(k, (line, v)).is_some() {
            return err(line, format!("duplicate key '{k}'"));
        }
    }
    let get = |k: &str| kv.get(k).copied();
    let end = src.lines().count().max(1);
    let need = |k: &str| get(k).ok_or_else(|| ConfigError { line: end, message: format!("missing key '{k}'") });

    let (li, vi) = need("inputs")?;
    let (lw, vw) = need("weights")?;
    let mut x = list(li, "inputs", vi)?;
    let mut w = list(lw, "weights", vw)?;
    if let Some((lb, vb)) = get("bias") {
        x.push(1.0);
        w.push(number(lb, "bias", vb)?);
    }
    if x.len() != w.len() {
        return err(lw, format!("{} inputs but {} weights", x.len(), w.len()));
    }
    if let Some((ln, vn)) = get("n") {
        match vn.parse::<usize>() {
            Ok(n) if n == x.len() => {}
            Ok(n) => return err(ln, format!("n = {n} but {} inputs were given (bias included)", x.len())),
            Err(_) => return err(ln, format!("n: '{vn}' is not a count")),
        }
    }

    let target = match (get("desired"), get("desired_prime")) {
        (Some((l, v)), None) => Target::Desired(number(l, "desired", v)?),
        (None, Some((l, v))) => Target::DesiredPrime(number(l, "desired_prime", v)?),
        (Some((l, _)), Some(_)) => return err(l, "give either desired or desired_prime, not both"),
        (None, None) => return err(end, "missing key 'desired' (or 'desired_prime')"),
    };
    let epochs = match get("epochs") {
        Some((l, v)) => v.parse::<usize>().or_else(|_| err(l, format!("epochs: '{v}' is not a count")))?,
        None => 1,
    };

    let mut cfg = PerceptronConfig::new(x, w, target, epochs);
    let mut rates = Rates::default();
    if let Some((l, v)) = get("slow_rate") {
        rates.slow = number(l, "slow_rate", v)?;
    }
    if let Some((l, v)) = get("fast_rate") {
        rates.fast = number(l, "fast_rate", v)?;
    }
    cfg.rates = Rates::new(rates.slow, rates.fast).or_else(|e| err(end, e.to_string()))?;
    if let Some((l, v)) = get("t_max") {
        cfg.sim.t_max = number(l, "t_max", v)?;
    }
    if let Some((l, v)) = get("ss_tol") {
        cfg.sim.ss_tol = number(l, "ss_tol", v)?;
    }
    if let Some((l, v)) = get("negation") {
        cfg.negation = v.parse::<Negation>().or_else(|_| err(l, format!("negation must be railswap or nmult, got '{v}'")))?;
    }
    cfg.validate().or_else(|e| err(end, e.to_string()))?;
    Ok(cfg)
}
