//! Line-oriented text form of a [`Network`].
//!
//! ```text
//! crn v1
//! species: X0 X1 Y0 Y1 Z0 Z1
//! reactions:
//!   X1 + Y1 ->{1} Z1
//!   X0 ->{1} 3 Y0p + Y1m @2
//!   Y0p + Y0m ->{1000:fast} ∅ @2
//! initial:
//!   X1 = 0.80000000000000004
//! ```
//!
//! Sections are omitted when empty, so the empty network is the header line
//! alone. `#` starts a comment. Numbers are written with 17 significant
//! digits; parsing restores them exactly.

use thiserror::Error;

use super::{CrnError, Network, RateClass, RateKind, Reaction, SpeciesId};
use crate::numfmt::fmt17;

const HEADER: &str = "crn v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

pub(super) fn emit(net: &Network) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    if net.species.is_empty() {
        return out;
    }
    out.push_str("species:");
    for s in net.species.keys() {
        out.push(' ');
        out.push_str(s.as_str());
    }
    out.push('\n');
    if !net.reactions.is_empty() {
        out.push_str("reactions:\n");
        for r in &net.reactions {
            out.push_str("  ");
            out.push_str(&emit_reaction(r));
            out.push('\n');
        }
    }
    let nonzero: Vec<_> = net.species.iter().filter(|(_, c)| **c != 0.0).collect();
    if !nonzero.is_empty() {
        out.push_str("initial:\n");
        for (s, c) in nonzero {
            out.push_str(&format!("  {s} = {}\n", fmt17(*c)));
        }
    }
    out
}

fn emit_reaction(r: &Reaction) -> String {
    let lhs: Vec<&str> = r.reactants.iter().map(SpeciesId::as_str).collect();
    let rhs = if r.products.is_empty() {
        "∅".to_string()
    } else {
        r.products
            .iter()
            .map(|(s, c)| if *c == 1 { s.to_string() } else { format!("{c} {s}") })
            .collect::<Vec<_>>()
            .join(" + ")
    };
    let rate = match r.rate.kind {
        RateKind::Slow => fmt17(r.rate.constant),
        RateKind::Fast => format!("{}:fast", fmt17(r.rate.constant)),
    };
    let mut line = format!("{} ->{{{rate}}} {rhs}", lhs.join(" + "));
    if r.phase > 0 {
        line.push_str(&format!(" @{}", r.phase));
    }
    line
}

#[derive(PartialEq)]
enum Section {
    Start,
    Species,
    Reactions,
    Initial,
}

pub(super) fn parse(src: &str) -> Result<Network, ParseError> {
    let mut net = Network::new();
    let mut section = Section::Start;
    let mut seen_header = false;

    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| ParseError { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(err(format!("expected `{HEADER}` header, found `{line}`")));
            }
            seen_header = true;
            continue;
        }
        if let Some(rest) = line.strip_prefix("species:") {
            section = Section::Species;
            for name in rest.split_whitespace() {
                net.declare(&species(name).map_err(err)?);
            }
            continue;
        }
        match line {
            "reactions:" => {
                section = Section::Reactions;
                continue;
            }
            "initial:" => {
                section = Section::Initial;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Reactions => {
                let r = parse_reaction(line).map_err(err)?;
                net.add_reaction(r);
            }
            Section::Initial => {
                let (name, value) =
                    line.split_once('=').ok_or_else(|| err("expected `species = value`".into()))?;
                let s = species(name.trim()).map_err(err)?;
                let c = number(value.trim()).map_err(err)?;
                net.set_initial(&s, c).map_err(|e| err(e.to_string()))?;
            }
            Section::Start | Section::Species => {
                return Err(err(format!("unexpected line `{line}` outside a section")));
            }
        }
    }
    if !seen_header {
        return Err(ParseError { line: 1, message: format!("missing `{HEADER}` header") });
    }
    Ok(net)
}

fn species(name: &str) -> Result<SpeciesId, String> {
    SpeciesId::new(name).map_err(|e| e.to_string())
}

fn number(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("invalid number `{s}`"))
}

fn parse_reaction(line: &str) -> Result<Reaction, String> {
    let (body, phase) = match line.rsplit_once('@') {
        Some((body, p)) => {
            let p = p.trim().parse::<u32>().map_err(|_| format!("invalid phase `{}`", p.trim()))?;
            (body.trim(), p)
        }
        None => (line, 0),
    };
    let (lhs, rest) = body.split_once("->{").ok_or("expected `->{rate}`")?;
    let (rate, rhs) = rest.split_once('}').ok_or("unterminated rate annotation")?;
    let rate = parse_rate(rate.trim())?;

    let mut reactants = Vec::new();
    for (s, c) in parse_side(lhs)? {
        for _ in 0..c {
            reactants.push(s.clone());
        }
        if reactants.len() > 2 {
            break;
        }
    }
    let products = parse_side(rhs)?;
    Reaction::new(reactants, products, rate)
        .map(|r| r.in_phase(phase))
        .map_err(|e: CrnError| e.to_string())
}

fn parse_rate(s: &str) -> Result<RateClass, String> {
    let (k, kind) = match s.split_once(':') {
        Some((k, "fast")) => (k, RateKind::Fast),
        Some((k, "slow")) => (k, RateKind::Slow),
        Some((_, other)) => return Err(format!("unknown rate class `{other}`")),
        None => (s, RateKind::Slow),
    };
    RateClass::new(kind, number(k.trim())?).map_err(|e| e.to_string())
}

fn parse_side(side: &str) -> Result<Vec<(SpeciesId, i64)>, String> {
    let side = side.trim();
    if side == "∅" || side == "0" || side.is_empty() {
        return Ok(Vec::new());
    }
    side.split('+')
        .map(|term| {
            let parts: Vec<&str> = term.split_whitespace().collect();
            match parts.as_slice() {
                [name] => Ok((species(name)?, 1)),
                [coef, name] => {
                    let c = coef.parse::<i64>().map_err(|_| format!("invalid coefficient `{coef}`"))?;
                    Ok((species(name)?, c))
                }
                _ => Err(format!("malformed term `{}`", term.trim())),
            }
        })
        .collect()
}
