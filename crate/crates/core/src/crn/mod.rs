//! Abstract chemical reaction networks.
//!
//! Reactions have one or two reactants, nonnegative integer product
//! stoichiometry and a rate constant tagged slow or fast. An empty product
//! list is annihilation to nothing.
//!
//! Every reaction also carries a `phase`. Phase 0 reactions are active from
//! the start of a simulation; a reaction in phase `p > 0` is released once
//! phase `p - 1` has settled (see [`crate::simulator`]). Networks written by
//! hand usually leave everything in phase 0.

mod text;

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

pub use text::ParseError;

/// Default rate constant of computation reactions.
pub const DEFAULT_SLOW_RATE: f64 = 1.0;
/// Default rate constant of annihilation reactions.
pub const DEFAULT_FAST_RATE: f64 = 1000.0;
/// Minimum ratio between the slowest fast and the fastest slow constant.
pub const MIN_RATE_SEPARATION: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrnError {
    #[error("reaction has {0} reactants; at most two are allowed")]
    TooManyReactants(usize),
    #[error("reaction has no reactants")]
    NoReactants,
    #[error("negative stoichiometric coefficient {coef} for `{species}`")]
    NegativeStoichiometry { species: String, coef: i64 },
    #[error("rate constant must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("invalid species name `{0}`")]
    BadSpecies(String),
    #[error("negative initial concentration {value} for `{species}`")]
    NegativeConcentration { species: String, value: f64 },
    #[error("fast rate {fast} is less than {MIN_RATE_SEPARATION}x the slow rate {slow}")]
    RateSeparation { slow: f64, fast: f64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Name of a molecular species.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpeciesId(String);

impl SpeciesId {
    /// Identifiers are ASCII `[A-Za-z_][A-Za-z0-9_]*`.
    pub fn new(name: impl Into<String>) -> Result<Self, CrnError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(SpeciesId(name))
        } else {
            Err(CrnError::BadSpecies(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for SpeciesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for SpeciesId {
    type Err = CrnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SpeciesId::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateKind {
    Slow,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateClass {
    pub kind: RateKind,
    pub constant: f64,
}

impl RateClass {
    pub fn new(kind: RateKind, constant: f64) -> Result<Self, CrnError> {
        if !(constant.is_finite() && constant > 0.0) {
            return Err(CrnError::BadRate(constant));
        }
        Ok(RateClass { kind, constant })
    }

    pub fn slow(constant: f64) -> Result<Self, CrnError> {
        RateClass::new(RateKind::Slow, constant)
    }

    pub fn fast(constant: f64) -> Result<Self, CrnError> {
        RateClass::new(RateKind::Fast, constant)
    }
}

impl Default for RateClass {
    fn default() -> Self {
        RateClass { kind: RateKind::Slow, constant: DEFAULT_SLOW_RATE }
    }
}

/// Slow and fast rate constants used when instantiating templates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub slow: f64,
    pub fast: f64,
}

impl Rates {
    pub fn new(slow: f64, fast: f64) -> Result<Self, CrnError> {
        RateClass::slow(slow)?;
        RateClass::fast(fast)?;
        if fast < MIN_RATE_SEPARATION * slow {
            return Err(CrnError::RateSeparation { slow, fast });
        }
        Ok(Rates { slow, fast })
    }

    pub fn class(&self, kind: RateKind) -> RateClass {
        match kind {
            RateKind::Slow => RateClass { kind, constant: self.slow },
            RateKind::Fast => RateClass { kind, constant: self.fast },
        }
    }
}

impl Default for Rates {
    fn default() -> Self {
        Rates { slow: DEFAULT_SLOW_RATE, fast: DEFAULT_FAST_RATE }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    reactants: Vec<SpeciesId>,
    products: Vec<(SpeciesId, u32)>,
    rate: RateClass,
    phase: u32,
}

impl Reaction {
    /// Build a reaction. Repeated product entries are summed and zero
    /// coefficients dropped.
    pub fn new(
        reactants: Vec<SpeciesId>,
        products: Vec<(SpeciesId, i64)>,
        rate: RateClass,
    ) -> Result<Self, CrnError> {
        match reactants.len() {
            0 => return Err(CrnError::NoReactants),
            1 | 2 => {}
            n => return Err(CrnError::TooManyReactants(n)),
        }
        RateClass::new(rate.kind, rate.constant)?;
        let mut merged: Vec<(SpeciesId, u32)> = Vec::with_capacity(products.len());
        for (species, coef) in products {
            if coef < 0 {
                return Err(CrnError::NegativeStoichiometry { species: species.0, coef });
            }
            let coef = u32::try_from(coef).map_err(|_| CrnError::NegativeStoichiometry {
                species: species.0.clone(),
                coef,
            })?;
            if coef == 0 {
                continue;
            }
            match merged.iter_mut().find(|(s, _)| *s == species) {
                Some((_, c)) => *c += coef,
                None => merged.push((species, coef)),
            }
        }
        let mut reactants = reactants;
        reactants.sort();
        Ok(Reaction { reactants, products: merged, rate, phase: 0 })
    }

    pub fn in_phase(mut self, phase: u32) -> Self {
        self.phase = phase;
        self
    }

    /// Reactant multiset, sorted by name.
    pub fn reactants(&self) -> &[SpeciesId] {
        &self.reactants
    }

    pub fn products(&self) -> &[(SpeciesId, u32)] {
        &self.products
    }

    pub fn rate(&self) -> RateClass {
        self.rate
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn is_annihilation(&self) -> bool {
        self.products.is_empty()
    }

    fn species(&self) -> impl Iterator<Item = &SpeciesId> {
        self.reactants.iter().chain(self.products.iter().map(|(s, _)| s))
    }
}

/// Species with initial concentrations plus an ordered reaction list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Network {
    species: IndexMap<SpeciesId, f64>,
    reactions: Vec<Reaction>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register `s` with concentration 0 if it is not yet known; returns its index.
    pub fn declare(&mut self, s: &SpeciesId) -> usize {
        match self.species.get_index_of(s) {
            Some(i) => i,
            None => {
                self.species.insert(s.clone(), 0.0);
                self.species.len() - 1
            }
        }
    }

    pub fn set_initial(&mut self, s: &SpeciesId, c: f64) -> Result<(), CrnError> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(CrnError::NegativeConcentration { species: s.0.clone(), value: c });
        }
        let i = self.declare(s);
        self.species[i] = c;
        Ok(())
    }

    /// Append a reaction, auto-registering any species it mentions.
    pub fn add_reaction(&mut self, r: Reaction) {
        for s in r.species() {
            self.declare(s);
        }
        self.reactions.push(r);
    }

    /// Species union, reactions of `self` then `other`, initial
    /// concentrations summed per species.
    pub fn merge(&self, other: &Network) -> Network {
        let mut out = self.clone();
        for (s, c) in &other.species {
            let i = out.declare(s);
            out.species[i] += *c;
        }
        out.reactions.extend(other.reactions.iter().cloned());
        out
    }

    pub fn species(&self) -> impl ExactSizeIterator<Item = &SpeciesId> {
        self.species.keys()
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn index_of(&self, s: &SpeciesId) -> Option<usize> {
        self.species.get_index_of(s)
    }

    pub fn contains(&self, s: &SpeciesId) -> bool {
        self.species.contains_key(s)
    }

    pub fn initial(&self, s: &SpeciesId) -> Option<f64> {
        self.species.get(s).copied()
    }

    /// Initial concentrations in species order.
    pub fn initial_vector(&self) -> Vec<f64> {
        self.species.values().copied().collect()
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    /// Highest phase present (0 for an empty network).
    pub fn max_phase(&self) -> u32 {
        self.reactions.iter().map(|r| r.phase).max().unwrap_or(0)
    }

    /// Copy with every rate constant replaced by `rates` according to its class.
    pub fn with_rates(&self, rates: Rates) -> Network {
        let mut out = self.clone();
        for r in &mut out.reactions {
            r.rate = rates.class(r.rate.kind);
        }
        out
    }

    /// Copy with the constants of one rate class multiplied by `factor`.
    pub fn scale_rates(&self, kind: RateKind, factor: f64) -> Network {
        let mut out = self.clone();
        for r in out.reactions.iter_mut().filter(|r| r.rate.kind == kind) {
            r.rate.constant *= factor;
        }
        out
    }

    /// Check the slow/fast separation over the rate constants actually present.
    pub fn check_rate_separation(&self) -> Result<(), CrnError> {
        let max_slow = self.extreme_rate(RateKind::Slow, f64::max);
        let min_fast = self.extreme_rate(RateKind::Fast, f64::min);
        match (max_slow, min_fast) {
            (Some(slow), Some(fast)) if fast < MIN_RATE_SEPARATION * slow => {
                Err(CrnError::RateSeparation { slow, fast })
            }
            _ => Ok(()),
        }
    }

    fn extreme_rate(&self, kind: RateKind, pick: fn(f64, f64) -> f64) -> Option<f64> {
        self.reactions
            .iter()
            .filter(|r| r.rate.kind == kind)
            .map(|r| r.rate.constant)
            .reduce(pick)
    }

    pub fn emit_text(&self) -> String {
        text::emit(self)
    }

    pub fn parse_text(src: &str) -> Result<Network, CrnError> {
        Ok(text::parse(src)?)
    }
}
