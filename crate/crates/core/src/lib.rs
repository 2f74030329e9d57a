//! Numerical and exact verification toolkit for circle-symmetric ALF
//! gravitational instantons.
//!
//! The numerical side evaluates Killing-field concomitants on explicit
//! metrics with truncated Taylor arithmetic ([`jet`]) and checks tensor,
//! divergence, charge and boundary-balance identities.  The exact side
//! ([`combinatorics`]) replays fixed-point bookkeeping with arbitrary
//! precision integers.

pub mod cli;
pub mod combinatorics;
pub mod concomitants;
pub mod curvature;
pub mod error;
pub mod flux;
pub mod identities;
pub mod jet;
pub mod metrics;
pub mod quotient;
pub mod tensor;
pub mod tolerances;

pub use error::{Error, Result};

use serde::Serialize;

/// Duality label: self-dual (`Plus`) or anti-self-dual (`Minus`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Plus => 0,
            Side::Minus => 1,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Side::Plus => "+",
            Side::Minus => "-",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "sd" => Ok(Side::Plus),
            "-" | "minus" | "asd" => Ok(Side::Minus),
            other => Err(Error::Config(format!("side must be + or -, got {other:?}"))),
        }
    }
}
