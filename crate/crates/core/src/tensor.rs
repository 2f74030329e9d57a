//! Chart-basis tensors with jet or plain real components.

use crate::jet::{Jet, DIM};
use serde::Serialize;

/// Numbers of covariant (lower) and contravariant (upper) slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Valence {
    pub covariant: usize,
    pub contravariant: usize,
}

impl Valence {
    pub const fn lower(n: usize) -> Self {
        Valence { covariant: n, contravariant: 0 }
    }

    pub const fn upper(n: usize) -> Self {
        Valence { covariant: 0, contravariant: n }
    }

    pub fn rank(&self) -> usize {
        self.covariant + self.contravariant
    }
}

/// Components of a tensor in the coordinate basis of a named chart,
/// stored row-major with the covariant slots first.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue<T = Jet> {
    pub valence: Valence,
    pub comps: Vec<T>,
    pub chart_id: String,
}

#[inline]
pub fn flat_index(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * DIM + i)
}

#[inline]
pub const fn i2(a: usize, b: usize) -> usize {
    a * DIM + b
}

#[inline]
pub const fn i3(a: usize, b: usize, c: usize) -> usize {
    (a * DIM + b) * DIM + c
}

#[inline]
pub const fn i4(a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * DIM + b) * DIM + c) * DIM + d
}

impl<T: Clone> TensorValue<T> {
    pub fn from_fn(valence: Valence, chart_id: &str, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let rank = valence.rank();
        let n = DIM.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut comps = Vec::with_capacity(n);
        for flat in 0..n {
            let mut rem = flat;
            for slot in (0..rank).rev() {
                idx[slot] = rem % DIM;
                rem /= DIM;
            }
            comps.push(f(&idx));
        }
        TensorValue { valence, comps, chart_id: chart_id.to_string() }
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.comps[flat_index(idx)]
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> TensorValue<U> {
        TensorValue {
            valence: self.valence,
            comps: self.comps.iter().map(f).collect(),
            chart_id: self.chart_id.clone(),
        }
    }
}

impl TensorValue<Jet> {
    /// Degree-0 values of every component.
    pub fn values(&self) -> TensorValue<f64> {
        self.map(Jet::value)
    }

    /// Builds a symmetric 2-tensor from its upper triangle; the lower
    /// triangle is a copy, so symmetry holds exactly.
    pub fn symmetric2(chart_id: &str, upper: impl Fn(usize, usize) -> Jet) -> Self {
        let mut comps: Vec<Option<Jet>> = vec![None; DIM * DIM];
        for a in 0..DIM {
            for b in a..DIM {
                let v = upper(a, b);
                comps[i2(b, a)] = Some(v.clone());
                comps[i2(a, b)] = Some(v);
            }
        }
        TensorValue {
            valence: Valence::lower(2),
            comps: comps.into_iter().map(|c| c.expect("filled")).collect(),
            chart_id: chart_id.to_string(),
        }
    }

    /// Builds an antisymmetric 2-tensor from its strict upper triangle; the
    /// diagonal is zero and the lower triangle the exact negation.
    pub fn antisymmetric2(chart_id: &str, order: usize, upper: impl Fn(usize, usize) -> Jet) -> Self {
        let mut comps = vec![Jet::zero(order); DIM * DIM];
        for a in 0..DIM {
            for b in a + 1..DIM {
                let v = upper(a, b);
                comps[i2(b, a)] = -&v;
                comps[i2(a, b)] = v;
            }
        }
        TensorValue { valence: Valence::lower(2), comps, chart_id: chart_id.to_string() }
    }
}

impl TensorValue<f64> {
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Largest |T_ab + T_ba| relative to the largest component, for real 2-tensors.
pub fn antisymmetry_defect(t: &[f64]) -> f64 {
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for a in 0..DIM {
        for b in 0..DIM {
            defect = defect.max((t[i2(a, b)] + t[i2(b, a)]).abs());
            scale = scale.max(t[i2(a, b)].abs());
        }
    }
    if scale == 0.0 {
        defect
    } else {
        defect / scale
    }
}

/// Result of inverting a 4×4 jet matrix.
pub struct JetInverse {
    pub inverse: Vec<Jet>,
    pub det: Jet,
}

/// Gauss–Jordan inversion of a row-major 4×4 jet matrix, pivoting on the
/// degree-0 magnitude.  Returns `None` when a pivot value is below `tol`.
pub fn invert4(m: &[Jet], tol: f64) -> Option<JetInverse> {
    let order = m.iter().map(Jet::order).min().unwrap_or(0);
    let mut a: Vec<Jet> = m.to_vec();
    let mut inv: Vec<Jet> = (0..DIM * DIM)
        .map(|k| Jet::constant(order, if k / DIM == k % DIM { 1.0 } else { 0.0 }))
        .collect();
    let mut det = Jet::constant(order, 1.0);
    for col in 0..DIM {
        let pivot = (col..DIM)
            .max_by(|&x, &y| a[i2(x, col)].value().abs().total_cmp(&a[i2(y, col)].value().abs()))
            .expect("nonempty");
        if a[i2(pivot, col)].value().abs() < tol {
            return None;
        }
        if pivot != col {
            for k in 0..DIM {
                a.swap(i2(pivot, k), i2(col, k));
                inv.swap(i2(pivot, k), i2(col, k));
            }
            det = -det;
        }
        let p = a[i2(col, col)].clone();
        det = &det * &p;
        let pr = p.recip();
        for k in 0..DIM {
            a[i2(col, k)] = &a[i2(col, k)] * &pr;
            inv[i2(col, k)] = &inv[i2(col, k)] * &pr;
        }
        for row in 0..DIM {
            if row == col {
                continue;
            }
            let f = a[i2(row, col)].clone();
            if f.max_abs() == 0.0 {
                continue;
            }
            for k in 0..DIM {
                let da = &f * &a[i2(col, k)];
                a[i2(row, k)] -= &da;
                let di = &f * &inv[i2(col, k)];
                inv[i2(row, k)] -= &di;
            }
        }
    }
    Some(JetInverse { inverse: inv, det })
}

/// Sign of the permutation (a, b, c, d) of (0, 1, 2, 3); zero on repeats.
pub fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let p = [a, b, c, d];
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] == p[j] {
                return 0.0;
            }
        }
    }
    let mut inversions = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
