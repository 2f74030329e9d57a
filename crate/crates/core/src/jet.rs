//! Truncated multivariate Taylor arithmetic in four chart variables.
//!
//! A [`Jet`] of order `K` stores the Taylor coefficients `c_α` of a scalar
//! field around a chart point, `f(x0 + h) = Σ_{|α| ≤ K} c_α h^α`.  Every
//! arithmetic operation and analytic function is exact up to truncation at
//! degree `K`; operands of different order combine at the smaller order.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use thiserror::Error;

/// Number of chart variables.
pub const DIM: usize = 4;

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("jet order {0} exceeds the supported maximum {MAX_ORDER}")]
    OrderTooLarge(usize),
    #[error("division by a jet with zero constant term")]
    ZeroDivision,
    #[error("square root or fractional power of a jet with non-positive constant term {0}")]
    NonPositiveRoot(f64),
    #[error("logarithm of a jet with non-positive constant term {0}")]
    LogDomain(f64),
    #[error("cannot differentiate an order-0 jet")]
    OrderExhausted,
}

/// Multi-index bookkeeping shared by all jets.
struct Indexing {
    /// Multi-indices sorted by total degree, then lexicographically.
    exps: Vec<[u8; DIM]>,
    /// `count[k]` = number of multi-indices with degree ≤ k.
    count: [usize; MAX_ORDER + 2],
    /// `raise[i][μ]` = index of `exps[i] + e_μ`, or `usize::MAX` past the maximum order.
    raise: Vec<[usize; DIM]>,
}

fn indexing() -> &'static Indexing {
    static CELL: OnceLock<Indexing> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut exps = Vec::new();
        let mut count = [0usize; MAX_ORDER + 2];
        for deg in 0..=MAX_ORDER {
            let mut level = Vec::new();
            for a in 0..=deg {
                for b in 0..=deg - a {
                    for c in 0..=deg - a - b {
                        let d = deg - a - b - c;
                        level.push([a as u8, b as u8, c as u8, d as u8]);
                    }
                }
            }
            level.sort_by(|x, y| y.cmp(x));
            exps.extend(level);
            count[deg] = exps.len();
        }
        count[MAX_ORDER + 1] = exps.len();
        let lookup = |e: &[u8; DIM]| exps.iter().position(|x| x == e);
        let raise = exps
            .iter()
            .map(|e| {
                let mut out = [usize::MAX; DIM];
                for (mu, slot) in out.iter_mut().enumerate() {
                    let mut f = *e;
                    f[mu] += 1;
                    if let Some(i) = lookup(&f) {
                        *slot = i;
                    }
                }
                out
            })
            .collect();
        Indexing { exps, count, raise }
    })
}

/// Products `(i, j, k)` with `exps[i] + exps[j] = exps[k]` and degree ≤ order.
fn product_table(order: usize) -> &'static [(u16, u16, u16)] {
    static CELLS: [OnceLock<Vec<(u16, u16, u16)>>; MAX_ORDER + 1] =
        [const { OnceLock::new() }; MAX_ORDER + 1];
    CELLS[order].get_or_init(|| {
        let ix = indexing();
        let n = ix.count[order];
        let mut table = Vec::new();
        for k in 0..n {
            let ek = ix.exps[k];
            for i in 0..n {
                let ei = ix.exps[i];
                if (0..DIM).all(|m| ei[m] <= ek[m]) {
                    let mut ej = ek;
                    for m in 0..DIM {
                        ej[m] -= ei[m];
                    }
                    let j = ix.exps[..n].iter().position(|x| *x == ej).expect("index");
                    table.push((i as u16, j as u16, k as u16));
                }
            }
        }
        table
    })
}

/// Number of Taylor coefficients of a jet of the given order.
pub fn coefficient_count(order: usize) -> usize {
    indexing().count[order]
}

/// Truncated Taylor expansion of a scalar field in four variables.
#[derive(Clone, PartialEq)]
pub struct Jet {
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    /// The constant jet `value` at the given order.
    pub fn constant(order: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut coeffs = vec![0.0; coefficient_count(order)];
        coeffs[0] = value;
        Jet { order, coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(order, 0.0)
    }

    /// The coordinate function `x^μ` expanded around `value`.
    pub fn variable(order: usize, mu: usize, value: f64) -> Self {
        let mut j = Self::constant(order, value);
        if order >= 1 {
            j.coeffs[1 + mu] = 1.0;
        }
        j
    }

    /// Builds a jet from raw coefficients in the canonical multi-index order.
    pub fn from_coeffs(order: usize, coeffs: Vec<f64>) -> Result<Self, JetError> {
        if order > MAX_ORDER {
            return Err(JetError::OrderTooLarge(order));
        }
        let n = coefficient_count(order);
        let mut coeffs = coeffs;
        coeffs.resize(n, 0.0);
        Ok(Jet { order, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Degree-0 coefficient, the field value at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Multi-indices matching [`Jet::coeffs`] entry by entry.
    pub fn multi_indices(order: usize) -> &'static [[u8; DIM]] {
        &indexing().exps[..coefficient_count(order)]
    }

    /// Taylor coefficient of `h^α`; zero beyond the truncation order.
    pub fn coeff(&self, alpha: [u8; DIM]) -> f64 {
        let deg: usize = alpha.iter().map(|&a| a as usize).sum();
        if deg > self.order {
            return 0.0;
        }
        let ix = indexing();
        let lo = if deg == 0 { 0 } else { ix.count[deg - 1] };
        ix.exps[lo..ix.count[deg]]
            .iter()
            .position(|e| *e == alpha)
            .map(|p| self.coeffs[lo + p])
            .unwrap_or(0.0)
    }

    /// The partial derivative `∂_μ f(x0)` (degree-1 coefficient).
    pub fn gradient_value(&self, mu: usize) -> f64 {
        if self.order == 0 {
            return f64::NAN;
        }
        self.coeffs[1 + mu]
    }

    /// Restriction to a lower order.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet {
            order,
            coeffs: self.coeffs[..coefficient_count(order)].to_vec(),
        }
    }

    /// Partial derivative `∂_μ`, a jet of order `K − 1`.
    ///
    /// # Panics
    /// Panics on an order-0 jet; use [`Jet::try_d`] for a checked version.
    pub fn d(&self, mu: usize) -> Self {
        self.try_d(mu).expect("derivative of an order-0 jet")
    }

    pub fn try_d(&self, mu: usize) -> Result<Self, JetError> {
        if self.order == 0 {
            return Err(JetError::OrderExhausted);
        }
        let ix = indexing();
        let order = self.order - 1;
        let n = coefficient_count(order);
        let coeffs = (0..n)
            .map(|i| {
                let up = ix.raise[i][mu];
                (ix.exps[i][mu] as f64 + 1.0) * self.coeffs[up]
            })
            .collect();
        Ok(Jet { order, coeffs })
    }

    /// Reconstructs a potential from its gradient jets by coefficient
    /// matching: the result `f` has `f(x0) = value` and `∂_μ f = grad[μ]`.
    /// When the gradient is not closed the lowest variable carrying each
    /// multi-index decides the coefficient.
    pub fn integrate_gradient(value: f64, grad: &[Jet; DIM]) -> Self {
        let order = grad.iter().map(|g| g.order).min().unwrap_or(0) + 1;
        let ix = indexing();
        let n = coefficient_count(order);
        let mut coeffs = vec![0.0; n];
        coeffs[0] = value;
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            let e = ix.exps[k];
            let mu = (0..DIM).find(|&m| e[m] > 0).expect("nonzero multi-index");
            let mut lower = e;
            lower[mu] -= 1;
            *c = grad[mu].coeff(lower) / e[mu] as f64;
        }
        Jet { order, coeffs }
    }

    fn binary(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let order = self.order.min(other.order);
        let n = coefficient_count(order);
        let coeffs = (0..n).map(|i| f(self.coeffs[i], other.coeffs[i])).collect();
        Jet { order, coeffs }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut coeffs = vec![0.0; coefficient_count(order)];
        for &(i, j, k) in product_table(order) {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Jet { order, coeffs }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Composition `φ(f)` given the univariate Taylor coefficients of `φ`
    /// at `f(x0)`: `φ(f(x0) + t) = Σ_k taylor[k] t^k`.
    pub fn compose(&self, taylor: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let top = self.order.min(taylor.len().saturating_sub(1));
        let mut acc = Jet::constant(self.order, taylor[top]);
        for k in (0..top).rev() {
            acc = acc.mul_jet(&h);
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let mut t = Vec::with_capacity(self.order + 1);
        let mut c = 1.0 / a;
        for _ in 0..=self.order {
            t.push(c);
            c *= -1.0 / a;
        }
        self.compose(&t)
    }

    pub fn try_recip(&self) -> Result<Jet, JetError> {
        if self.value() == 0.0 {
            return Err(JetError::ZeroDivision);
        }
        Ok(self.recip())
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut t = Vec::with_capacity(self.order + 1);
        let mut c = e;
        for k in 0..=self.order {
            if k > 0 {
                c /= k as f64;
            }
            t.push(c);
        }
        self.compose(&t)
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        let mut t = vec![a.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(sign / (k as f64 * a.powi(k as i32)));
        }
        self.compose(&t)
    }

    pub fn try_ln(&self) -> Result<Jet, JetError> {
        if self.value() <= 0.0 {
            return Err(JetError::LogDomain(self.value()));
        }
        Ok(self.ln())
    }

    /// Real power `f^p` via the binomial series around `f(x0)`.
    pub fn powf(&self, p: f64) -> Jet {
        let a = self.value();
        let mut t = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                binom *= (p - (k as f64 - 1.0)) / k as f64;
            }
            t.push(binom * a.powf(p - k as f64));
        }
        self.compose(&t)
    }

    pub fn try_powf(&self, p: f64) -> Result<Jet, JetError> {
        if self.value() <= 0.0 {
            return Err(JetError::NonPositiveRoot(self.value()));
        }
        Ok(self.powf(p))
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn try_sqrt(&self) -> Result<Jet, JetError> {
        self.try_powf(0.5)
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, n: i32) -> Jet {
        let base = if n < 0 { self.recip() } else { self.clone() };
        let mut acc = Jet::constant(self.order, 1.0);
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul_jet(&base);
        }
        acc
    }

    pub fn sin(&self) -> Jet {
        self.compose(&trig_taylor(self.value(), self.order, 0))
    }

    pub fn cos(&self) -> Jet {
        self.compose(&trig_taylor(self.value(), self.order, 1))
    }

    pub fn atan(&self) -> Jet {
        let a = self.value();
        let k = self.order;
        // series of 1 / (1 + (a + t)^2), then integrated termwise
        let q = [1.0 + a * a, 2.0 * a, 1.0];
        let mut inv = vec![0.0; k.max(1)];
        inv[0] = 1.0 / q[0];
        for n in 1..inv.len() {
            let mut s = 0.0;
            for (j, qj) in q.iter().enumerate().skip(1) {
                if j <= n {
                    s += qj * inv[n - j];
                }
            }
            inv[n] = -s / q[0];
        }
        let mut t = vec![a.atan()];
        for n in 1..=k {
            t.push(inv[n - 1] / n as f64);
        }
        self.compose(&t)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

fn trig_taylor(a: f64, order: usize, shift: usize) -> Vec<f64> {
    let (s, c) = a.sin_cos();
    let cycle = [s, c, -s, -c];
    let mut fact = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            cycle[(k + shift) % 4] / fact
        })
        .collect()
}

/// The four coordinate jets `x^μ` expanded around `point`.
pub fn jet_lift(point: [f64; DIM], order: usize) -> Result<[Jet; DIM], JetError> {
    if order > MAX_ORDER {
        return Err(JetError::OrderTooLarge(order));
    }
    Ok(std::array::from_fn(|mu| Jet::variable(order, mu, point[mu])))
}

macro_rules! jet_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.binary(b, |x, y| x + y));
jet_binop!(Sub, sub, |a, b| a.binary(b, |x, y| x - y));
jet_binop!(Mul, mul, |a, b| a.mul_jet(b));
jet_binop!(Div, div, |a, b| a.mul_jet(&b.recip()));

macro_rules! jet_scalar_op {
    ($tr:ident, $m:ident, $jf:expr, $fj:expr) => {
        impl $tr<f64> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                let f: fn(&Jet, f64) -> Jet = $jf;
                f(self, rhs)
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<&Jet> for f64 {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                let f: fn(f64, &Jet) -> Jet = $fj;
                f(self, rhs)
            }
        }
        impl $tr<Jet> for f64 {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

jet_scalar_op!(
    Add,
    add,
    |a, s| {
        let mut r = a.clone();
        r.coeffs[0] += s;
        r
    },
    |s, a| {
        let mut r = a.clone();
        r.coeffs[0] += s;
        r
    }
);
jet_scalar_op!(
    Sub,
    sub,
    |a, s| {
        let mut r = a.clone();
        r.coeffs[0] -= s;
        r
    },
    |s, a| {
        let mut r = a.scale(-1.0);
        r.coeffs[0] += s;
        r
    }
);
jet_scalar_op!(Mul, mul, |a, s| a.scale(s), |s, a| a.scale(s));
jet_scalar_op!(Div, div, |a, s| a.scale(1.0 / s), |s, a| a.recip().scale(s));

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.order < self.order {
            *self = self.truncate(rhs.order);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if rhs.order < self.order {
            *self = self.truncate(rhs.order);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self -= &rhs;
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        for c in &mut self.coeffs {
            *c *= rhs;
        }
    }
}

/// Sum of products `Σ a_i b_i`, accumulated in place.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let order = a.iter().chain(b).map(Jet::order).min().unwrap_or(0);
    let mut acc = Jet::zero(order);
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_jet_has_unit_linear_part() {
        let x = jet_lift([0.0; 4], 2).unwrap();
        assert_eq!(x[0].value(), 0.0);
        assert_eq!(x[0].coeff([1, 0, 0, 0]), 1.0);
        assert_eq!(x[0].coeff([0, 1, 0, 0]), 0.0);
        assert!(x[0].coeffs()[5..].iter().all(|c| *c == 0.0));
    }

    #[test]
    fn product_of_coordinates() {
        let x = jet_lift([2.0, 3.0, 0.0, 0.0], 2).unwrap();
        let f = &x[0] * &x[1];
        assert_eq!(f.value(), 6.0);
        assert_eq!(f.gradient_value(0), 3.0);
        assert_eq!(f.coeff([1, 1, 0, 0]), 1.0);
    }

    #[test]
    fn sqrt_series_of_one_plus_x() {
        let x = jet_lift([0.0; 4], 3).unwrap();
        let f = (1.0 + &x[0]).sqrt();
        let expect = [1.0, 0.5, -0.125, 0.0625];
        for (k, e) in expect.iter().enumerate() {
            assert!((f.coeff([k as u8, 0, 0, 0]) - e).abs() < 1e-15);
        }
    }

    #[test]
    fn coefficient_counts() {
        assert_eq!(coefficient_count(0), 1);
        assert_eq!(coefficient_count(1), 5);
        assert_eq!(coefficient_count(2), 15);
        assert_eq!(coefficient_count(4), 70);
    }

    #[test]
    fn derivative_lowers_order() {
        let x = jet_lift([1.0, 2.0, 0.5, 0.0], 3).unwrap();
        let f = &x[0] * &x[0] * &x[1];
        let d0 = f.d(0);
        assert_eq!(d0.order(), 2);
        assert!((d0.value() - 4.0).abs() < 1e-15);
        assert!((d0.coeff([1, 0, 0, 0]) - 2.0 * 2.0).abs() < 1e-15);
        assert!(Jet::constant(0, 1.0).try_d(0).is_err());
    }

    #[test]
    fn checked_domains() {
        let z = Jet::constant(2, 0.0);
        assert_eq!(z.try_recip(), Err(JetError::ZeroDivision));
        assert!(Jet::constant(2, -1.0).try_sqrt().is_err());
        assert!(Jet::constant(2, 0.0).try_ln().is_err());
    }
}
