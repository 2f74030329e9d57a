//! The fixed-point signature formula as an identity in the variable `g`.

use num_bigint::BigInt;
use serde::Serialize;

use super::config::{sgn, FixedPointConfig, NutData};
use super::poly::{IntPolynomial, IntRationalFunction};

/// `ε (g^{w¹}+1)(g^{w²}+1) / ((g^{w¹}−1)(g^{w²}−1))`.
pub fn nut_term(nut: &NutData) -> IntRationalFunction {
    let mut num = IntPolynomial::constant(nut.epsilon as i64);
    num.mul_binomial(nut.w1 as usize, 1);
    num.mul_binomial(nut.w2 as usize, 1);
    let mut den = IntPolynomial::one();
    den.mul_binomial(nut.w1 as usize, -1);
    den.mul_binomial(nut.w2 as usize, -1);
    IntRationalFunction::new(num, den)
}

/// `4g / (g − 1)²`.
pub fn bolt_kernel() -> IntRationalFunction {
    let mut den = IntPolynomial::one();
    den.mul_binomial(1, -1);
    den.mul_binomial(1, -1);
    IntRationalFunction::new(IntPolynomial::monomial(1, 4), den)
}

/// Right-hand side `Σ ε (g^{w¹}+1)(g^{w²}+1)/((g^{w¹}−1)(g^{w²}−1))
/// + 4g/(g−1)² (e − Σ B·B) + sgn(e)` in canonical form.
pub fn g_signature_rhs(config: &FixedPointConfig) -> IntRationalFunction {
    let mut acc = IntRationalFunction::constant(sgn(config.e));
    for nut in &config.nuts {
        acc = &acc + &nut_term(nut);
    }
    let c = config.bolt_defect();
    if c != 0 {
        let k = &bolt_kernel() * &IntRationalFunction::constant(c);
        acc = &acc + &k;
    }
    acc
}

/// Outcome of the identity test: the numerator left after clearing all
/// denominators; the identity holds iff it is the zero polynomial.
#[derive(Debug, Clone, Serialize)]
pub struct SignatureCertificate {
    pub holds: bool,
    pub claimed_sign: i64,
    /// Degree of the cleared denominator `∏(g^{wⁱ} − 1)·(g − 1)²`.
    pub denominator_degree: usize,
    /// Residual numerator, printed; `"0"` when the identity holds.
    pub residual: String,
}

/// Residual numerator of `rhs − claimed_sign` after multiplying by
/// `∏_P (g^{w¹}−1)(g^{w²}−1) · (g−1)²`.
pub fn signature_residual(config: &FixedPointConfig, claimed_sign: i64) -> (IntPolynomial, usize) {
    let factors: Vec<(usize, usize)> = config.nuts.iter().map(|n| (n.w1 as usize, n.w2 as usize)).collect();
    let den_degree = factors.iter().map(|(a, b)| a + b).sum::<usize>() + 2;
    let cleared = |skip: Option<usize>, start: IntPolynomial, with_square: bool| {
        let mut p = start;
        for (j, &(a, b)) in factors.iter().enumerate() {
            if Some(j) != skip {
                p.mul_binomial(a, -1);
                p.mul_binomial(b, -1);
            }
        }
        if with_square {
            p.mul_binomial(1, -1);
            p.mul_binomial(1, -1);
        }
        p
    };
    let mut total = IntPolynomial::zero();
    for (i, nut) in config.nuts.iter().enumerate() {
        let mut start = IntPolynomial::constant(nut.epsilon as i64);
        start.mul_binomial(factors[i].0, 1);
        start.mul_binomial(factors[i].1, 1);
        total = total + cleared(Some(i), start, true);
    }
    let c = config.bolt_defect();
    if c != 0 {
        total = total + cleared(None, IntPolynomial::monomial(1, 4 * c), false);
    }
    let k = sgn(config.e) - claimed_sign;
    if k != 0 {
        total = total + cleared(None, IntPolynomial::constant(k), true);
    }
    (total, den_degree)
}

pub fn check_signature_identity(config: &FixedPointConfig, claimed_sign: i64) -> SignatureCertificate {
    let (res, den_degree) = signature_residual(config, claimed_sign);
    SignatureCertificate {
        holds: res.is_zero(),
        claimed_sign,
        denominator_degree: den_degree,
        residual: res.to_string(),
    }
}

/// `Σ ε + sgn(e)`, the value of the right-hand side at `g = 0`.
pub fn rhs_at_zero(config: &FixedPointConfig) -> BigInt {
    BigInt::from(config.signature())
}
