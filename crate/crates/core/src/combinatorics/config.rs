//! Fixed-point data: nuts, bolts and whole configurations.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Orientation `ε` and weights `w¹ ≤ w²` of a nut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NutData {
    pub epsilon: i8,
    pub w1: u32,
    pub w2: u32,
}

impl NutData {
    /// Validated nut; the weights are stored in increasing order.
    pub fn new(epsilon: i8, a: u32, b: u32) -> Result<Self> {
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::Config(format!("nut orientation must be ±1, got {epsilon}")));
        }
        if a == 0 || b == 0 {
            return Err(Error::Config(format!("nut weights must be positive, got ({a}, {b})")));
        }
        if a.gcd(&b) != 1 {
            return Err(Error::Config(format!("nut weights must be coprime, got ({a}, {b})")));
        }
        Ok(NutData { epsilon, w1: a.min(b), w2: a.max(b) })
    }

    pub fn weights(&self) -> [u32; 2] {
        [self.w1, self.w2]
    }

    /// The weight other than `w`, if `w` is a weight of this nut.
    pub fn other_weight(&self, w: u32) -> Option<u32> {
        if self.w1 == w {
            Some(self.w2)
        } else if self.w2 == w {
            Some(self.w1)
        } else {
            None
        }
    }
}

impl fmt::Display for NutData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", if self.epsilon > 0 { "+" } else { "-" }, self.w1, self.w2)
    }
}

impl FromStr for NutData {
    type Err = Error;
    /// Parses `+,1,2` or `{-,3,4}`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('{').trim_end_matches('}');
        let parts: Vec<&str> = t.split(',').map(str::trim).collect();
        let bad = || Error::Config(format!("cannot parse nut {s:?}; expected e.g. +,1,2"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let eps = match parts[0] {
            "+" | "+1" | "1" => 1,
            "-" | "-1" => -1,
            _ => return Err(bad()),
        };
        let a = parts[1].parse().map_err(|_| bad())?;
        let b = parts[2].parse().map_err(|_| bad())?;
        NutData::new(eps, a, b)
    }
}

/// Euler characteristic and self-intersection number of a bolt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoltData {
    pub euler_char: i64,
    pub self_intersection: i64,
}

impl BoltData {
    pub fn new(euler_char: i64, self_intersection: i64) -> Result<Self> {
        if euler_char % 2 != 0 || euler_char > 2 {
            return Err(Error::Config(format!("bolt Euler characteristic must be even and ≤ 2, got {euler_char}")));
        }
        Ok(BoltData { euler_char, self_intersection })
    }
}

impl fmt::Display for BoltData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B(χ={},B·B={})", self.euler_char, self.self_intersection)
    }
}

/// Nuts, bolts and the Euler number `e` of the circle bundle at infinity,
/// kept in canonical (sorted) order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FixedPointConfig {
    pub nuts: Vec<NutData>,
    pub bolts: Vec<BoltData>,
    pub e: i64,
}

pub fn sgn(x: i64) -> i64 {
    x.signum()
}

impl FixedPointConfig {
    pub fn new(mut nuts: Vec<NutData>, mut bolts: Vec<BoltData>, e: i64) -> Self {
        nuts.sort();
        bolts.sort();
        FixedPointConfig { nuts, bolts, e }
    }

    pub fn nuts_only(nuts: Vec<NutData>, e: i64) -> Self {
        Self::new(nuts, Vec::new(), e)
    }

    pub fn n_nuts(&self) -> usize {
        self.nuts.len()
    }

    /// `χ[M] = n_nuts + Σ χ[B]`.
    pub fn euler_characteristic(&self) -> i64 {
        self.nuts.len() as i64 + self.bolts.iter().map(|b| b.euler_char).sum::<i64>()
    }

    /// `Σ ε(P) + sgn(e)`.
    pub fn signature(&self) -> i64 {
        self.nuts.iter().map(|n| n.epsilon as i64).sum::<i64>() + sgn(self.e)
    }

    /// `e − Σ B·B`.
    pub fn bolt_defect(&self) -> i64 {
        self.e - self.bolts.iter().map(|b| b.self_intersection).sum::<i64>()
    }

    /// Largest nut weight, or 1 without nuts.
    pub fn max_weight(&self) -> u32 {
        self.nuts.iter().map(|n| n.w2).max().unwrap_or(1)
    }
}

impl fmt::Display for FixedPointConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.nuts.iter().map(|n| n.to_string()).collect();
        parts.extend(self.bolts.iter().map(|b| b.to_string()));
        if parts.is_empty() {
            parts.push("∅".into());
        }
        write!(f, "{} e={}", parts.join(" "), self.e)
    }
}
