//! The nut contributions `Z±` and the quantities `Φ±`.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::config::{FixedPointConfig, NutData};
use crate::Side;

fn frac(n: i64, d: u32) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `Z±(P) = ±ε/a + 1/b` for weights `a ≤ b`.
pub fn z_value(nut: &NutData, side: Side) -> BigRational {
    let s = side.sign() as i64 * nut.epsilon as i64;
    frac(s, nut.w1) + frac(1, nut.w2)
}

/// `Φ± = −2/w + χ[M] − n_nuts + Σ Z±(Pᵢ)`, with `w` the largest weight
/// (1 without nuts), indexed by [`Side::index`].
pub fn phi_values(config: &FixedPointConfig) -> [BigRational; 2] {
    let w = config.max_weight();
    let base = frac(-2, w) + BigRational::from_integer(BigInt::from(config.euler_characteristic() - config.n_nuts() as i64));
    Side::BOTH.map(|side| config.nuts.iter().fold(base.clone(), |acc, n| acc + z_value(n, side)))
}
