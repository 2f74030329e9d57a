//! Dense integer polynomials in one variable `g` and their quotients.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Polynomial with arbitrary-precision integer coefficients, lowest degree
/// first, without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Self::from_coeffs(vec![BigInt::from(c)])
    }

    /// `c · g^degree`.
    pub fn monomial(degree: usize, c: i64) -> Self {
        let mut v = vec![BigInt::zero(); degree + 1];
        v[degree] = BigInt::from(c);
        Self::from_coeffs(v)
    }

    /// `g^w + sign`.
    pub fn binomial(w: usize, sign: i64) -> Self {
        Self::monomial(w, 1) + Self::constant(sign)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// Multiplies in place by `g^w + sign`; linear in the degree.
    pub fn mul_binomial(&mut self, w: usize, sign: i64) {
        if self.is_zero() {
            return;
        }
        let n = self.coeffs.len();
        let mut out = vec![BigInt::zero(); n + w];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k + w] += c;
            if sign != 0 {
                out[k] += c * sign;
            }
        }
        *self = Self::from_coeffs(out);
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Greatest common divisor of the coefficients (non-negative).
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    /// The polynomial divided by its content, with positive leading
    /// coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = self.content();
        if self.leading().is_negative() {
            c = -c;
        }
        Self::from_coeffs(self.coeffs.iter().map(|x| x / &c).collect())
    }

    /// Pseudo-remainder `lc(d)^{k} · self mod d`.
    pub fn pseudo_rem(&self, d: &Self) -> Self {
        let dd = d.degree().expect("division by the zero polynomial");
        let lc = d.leading();
        let mut r = self.clone();
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let lr = r.leading();
            let shift = rd - dd;
            let mut next: Vec<BigInt> = r.coeffs.iter().map(|c| c * &lc).collect();
            for (k, c) in d.coeffs.iter().enumerate() {
                next[k + shift] -= c * &lr;
            }
            r = Self::from_coeffs(next);
        }
        r
    }

    /// Primitive greatest common divisor with positive leading coefficient.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive_part();
            a = b;
            b = r;
        }
        a
    }

    /// Exact quotient `self / d`; `None` unless `d` divides `self` in ℤ[g].
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let dd = d.degree()?;
        let lc = d.leading();
        let mut r = self.clone();
        let mut q = vec![BigInt::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = r.degree() {
            if rd < dd {
                return None;
            }
            let (quot, rem) = r.leading().div_rem(&lc);
            if !rem.is_zero() {
                return None;
            }
            let shift = rd - dd;
            let mut next = r.coeffs.clone();
            for (k, c) in d.coeffs.iter().enumerate() {
                next[k + shift] -= c * &quot;
            }
            q[shift] = quot;
            r = Self::from_coeffs(next);
        }
        Some(Self::from_coeffs(q))
    }

    pub fn eval(&self, g: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * g + BigRational::from_integer(c.clone());
        }
        acc
    }
}

impl std::ops::Add for IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut v = self.coeffs;
        v.resize(n, BigInt::zero());
        for (k, c) in rhs.coeffs.into_iter().enumerate() {
            v[k] += c;
        }
        Self::from_coeffs(v)
    }
}

impl std::ops::Neg for IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> Self {
        Self::from_coeffs(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl std::ops::Sub for IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl std::ops::Mul for &IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, rhs: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return IntPolynomial::zero();
        }
        let mut v = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        IntPolynomial::from_coeffs(v)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let unit = mag.is_one();
            match k {
                0 => write!(f, "{mag}")?,
                1 if unit => write!(f, "g")?,
                1 => write!(f, "{mag}g")?,
                _ if unit => write!(f, "g^{k}")?,
                _ => write!(f, "{mag}g^{k}")?,
            }
        }
        Ok(())
    }
}

/// Quotient of integer polynomials in canonical form: numerator and
/// denominator coprime, denominator with positive leading coefficient and
/// content coprime to the numerator's content. The zero function is `0/1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntRationalFunction {
    num: IntPolynomial,
    den: IntPolynomial,
}

impl IntRationalFunction {
    pub fn new(num: IntPolynomial, den: IntPolynomial) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return IntRationalFunction { num, den: IntPolynomial::one() };
        }
        let g = num.gcd(&den);
        let mut num = num.div_exact(&g).expect("gcd divides numerator");
        let mut den = den.div_exact(&g).expect("gcd divides denominator");
        if den.leading().is_negative() {
            num = -num;
            den = -den;
        }
        let (cn, cd) = (num.content(), den.content());
        let ratio = BigRational::new(cn.clone(), cd.clone());
        let num = IntPolynomial::from_coeffs(num.coeffs.iter().map(|c| c / &cn * ratio.numer()).collect());
        let den = IntPolynomial::from_coeffs(den.coeffs.iter().map(|c| c / &cd * ratio.denom()).collect());
        IntRationalFunction { num, den }
    }

    pub fn from_polynomial(p: IntPolynomial) -> Self {
        Self::new(p, IntPolynomial::one())
    }

    pub fn constant(c: i64) -> Self {
        Self::from_polynomial(IntPolynomial::constant(c))
    }

    pub fn numerator(&self) -> &IntPolynomial {
        &self.num
    }

    pub fn denominator(&self) -> &IntPolynomial {
        &self.den
    }

    /// The value when the function is constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => Some(BigRational::zero()),
            (Some(0), Some(0)) => Some(BigRational::new(self.num.leading(), self.den.leading())),
            _ => None,
        }
    }

    /// Value at `g`; `None` at a pole.
    pub fn eval(&self, g: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(g);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(g) / d)
    }
}

impl std::ops::Add for &IntRationalFunction {
    type Output = IntRationalFunction;
    fn add(self, rhs: &IntRationalFunction) -> IntRationalFunction {
        IntRationalFunction::new(&self.num * &rhs.den + &rhs.num * &self.den, &self.den * &rhs.den)
    }
}

impl std::ops::Sub for &IntRationalFunction {
    type Output = IntRationalFunction;
    fn sub(self, rhs: &IntRationalFunction) -> IntRationalFunction {
        IntRationalFunction::new(&self.num * &rhs.den - &rhs.num * &self.den, &self.den * &rhs.den)
    }
}

impl std::ops::Mul for &IntRationalFunction {
    type Output = IntRationalFunction;
    fn mul(self, rhs: &IntRationalFunction) -> IntRationalFunction {
        IntRationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl fmt::Display for IntRationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == IntPolynomial::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}
