//! Exhaustive replay of the equality cases for three topologies.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::config::FixedPointConfig;
use super::enumerate::{enumerate_configs, BoltBounds, EnumerationBounds, DEFAULT_CAP};
use super::phi::phi_values;
use crate::{Error, Result, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// `S⁴ ∖ S¹`: χ = 2, signature 0, e = 0.
    Kerr,
    /// `ℂP² ∖ pt`: χ = 2, signature 1, e = 1.
    TaubBolt,
    /// `ℂP² ∖ S¹`: χ = 3, signature 1, e = 0.
    ChenTeo,
}

impl Topology {
    /// `(χ, signature, e)`.
    pub fn invariants(self) -> (i64, i64, i64) {
        match self {
            Topology::Kerr => (2, 0, 0),
            Topology::TaubBolt => (2, 1, 1),
            Topology::ChenTeo => (3, 1, 0),
        }
    }

    /// Sides on which equality is asserted.
    pub fn constrained_sides(self) -> &'static [Side] {
        match self {
            Topology::Kerr | Topology::TaubBolt => &Side::BOTH,
            Topology::ChenTeo => &[Side::Minus],
        }
    }
}

impl FromStr for Topology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kerr" => Ok(Topology::Kerr),
            "taubbolt" | "taub-bolt" => Ok(Topology::TaubBolt),
            "chenteo" | "chen-teo" => Ok(Topology::ChenTeo),
            other => Err(Error::Config(format!("unknown topology {other:?}; expected kerr, taubbolt or chenteo"))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Kerr => "kerr",
            Topology::TaubBolt => "taubbolt",
            Topology::ChenTeo => "chenteo",
        })
    }
}

/// Status of `Φ` on one side of an admissible configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiStatus {
    /// `Φ = 0`.
    Equality,
    /// `Φ < 0`: incompatible with `Φ ≥ 0`, so not realized by an instanton
    /// that fails to be half-flat.
    Excluded,
    /// `Φ > 0` on a constrained side.
    Counterexample,
    /// Side without a claim.
    Unconstrained,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseEntry {
    pub config: String,
    pub n_nuts: usize,
    pub n_bolts: usize,
    /// `[Φ⁺, Φ⁻]` as exact fractions.
    pub phi: [String; 2],
    pub status: [PhiStatus; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub topology: Topology,
    pub chi: i64,
    pub sign: i64,
    pub e: i64,
    pub w_max: u32,
    pub n_max: usize,
    pub bolts: BoltBounds,
    pub admissible: usize,
    pub equality: usize,
    pub excluded: usize,
    pub counterexamples: Vec<CaseEntry>,
    /// Three-nut configurations with `b > a` sorted by the pattern
    /// `{+,b,a+b},{+,a,a+b},{−,a,b}` (chenteo only).
    pub three_nut_patterns: Option<PatternCount>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<CaseEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternCount {
    pub matching: usize,
    pub other: usize,
}

/// Whether three nuts read `{+,b,a+b},{+,a,a+b},{−,a,b}` for coprime
/// `0 < a < b`.
pub fn matches_chen_teo_pattern(config: &FixedPointConfig) -> bool {
    if config.nuts.len() != 3 {
        return false;
    }
    let neg: Vec<_> = config.nuts.iter().filter(|n| n.epsilon < 0).collect();
    let pos: Vec<_> = config.nuts.iter().filter(|n| n.epsilon > 0).collect();
    if neg.len() != 1 || pos.len() != 2 {
        return false;
    }
    let (a, b) = (neg[0].w1, neg[0].w2);
    if a >= b || a.gcd(&b) != 1 {
        return false;
    }
    let mut got: Vec<[u32; 2]> = pos.iter().map(|n| n.weights()).collect();
    got.sort();
    let mut want = vec![[a, a + b], [b, a + b]];
    want.sort();
    got == want
}

fn status(phi: &BigRational, constrained: bool) -> PhiStatus {
    if !constrained {
        PhiStatus::Unconstrained
    } else if phi.is_zero() {
        PhiStatus::Equality
    } else if phi.is_negative() {
        PhiStatus::Excluded
    } else {
        PhiStatus::Counterexample
    }
}

pub fn case_analysis(topology: Topology, w_max: u32, n_max: usize, bolts: BoltBounds) -> Result<CaseReport> {
    let (chi, sign, e) = topology.invariants();
    let bounds = EnumerationBounds { chi, sign, e, n_max, w_max, bolts: bolts.clone(), cap: DEFAULT_CAP };
    let en = enumerate_configs(&bounds)?;
    let constrained = topology.constrained_sides();
    let mut entries = Vec::with_capacity(en.configs.len());
    let mut patterns = PatternCount { matching: 0, other: 0 };
    for config in &en.configs {
        let phi = phi_values(config);
        let st = Side::BOTH.map(|s| status(&phi[s.index()], constrained.contains(&s)));
        if topology == Topology::ChenTeo && config.nuts.len() == 3 && config.bolts.is_empty() {
            // w = a + b > 2 leaves out a = b = 1
            if config.max_weight() > 2 {
                if matches_chen_teo_pattern(config) {
                    patterns.matching += 1;
                } else {
                    patterns.other += 1;
                }
            }
        }
        entries.push(CaseEntry {
            config: config.to_string(),
            n_nuts: config.nuts.len(),
            n_bolts: config.bolts.len(),
            phi: [phi[0].to_string(), phi[1].to_string()],
            status: st,
        });
    }
    let on_constrained = |want: PhiStatus| {
        entries.iter().filter(|en| constrained.iter().all(|s| en.status[s.index()] == want)).count()
    };
    let equality = on_constrained(PhiStatus::Equality);
    let excluded = entries.iter().filter(|en| en.status.contains(&PhiStatus::Excluded)).count();
    let counterexamples: Vec<CaseEntry> =
        entries.iter().filter(|en| en.status.contains(&PhiStatus::Counterexample)).cloned().collect();
    Ok(CaseReport {
        topology,
        chi,
        sign,
        e,
        w_max,
        n_max,
        bolts,
        admissible: entries.len(),
        equality,
        excluded,
        pass: counterexamples.is_empty(),
        counterexamples,
        three_nut_patterns: (topology == Topology::ChenTeo).then_some(patterns),
        entries,
    })
}
