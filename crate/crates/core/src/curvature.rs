//! Metric → Christoffel → Riemann → Ricci → Weyl → SD/ASD split, all in jets.
//!
//! Conventions: `R_abc^d ω_d = (∇_a∇_b − ∇_b∇_a) ω_c`, `R_ac = R_abc^b`,
//! `ε_abcd = o·√det g·[abcd]` with the chart orientation `o = ±1`.  The
//! Christoffel array is indexed `[a][b][c]` for `Γ^a_bc`.

use crate::error::{Error, Result};
use crate::jet::{Jet, DIM};
use crate::tensor::{i2, i3, i4, invert4, levi_civita, TensorValue, Valence};
use crate::tolerances::DET_TOL;
use crate::Side;

/// Curvature data of a metric at one chart point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub order: usize,
    pub orientation: f64,
    pub g: TensorValue,
    pub g_inv: TensorValue,
    pub sqrt_det: Jet,
    /// `Γ^a_bc` at order K−1.
    pub christoffel: TensorValue,
    pub riemann: TensorValue,
    pub ricci: TensorValue,
    pub scalar: Jet,
    pub eps: TensorValue,
    pub eps_up: TensorValue,
    /// `ε_ab^cd`.
    pub eps_mixed: TensorValue,
    pub weyl: TensorValue,
    /// `[W⁺, W⁻]`, duality taken on the second index pair.
    pub weyl_sd: [TensorValue; 2],
    /// `[I⁺, I⁻]`.
    pub i_pm: [TensorValue; 2],
}

/// The pair `(e, f)`, `e < f`, complementary to `{a, b}` in `{0,1,2,3}`.
fn complement(a: usize, b: usize) -> (usize, usize) {
    let mut rest = (0..DIM).filter(|&k| k != a && k != b);
    let e = rest.next().expect("complement");
    let f = rest.next().expect("complement");
    (e, f)
}

/// Computes the full curvature bundle at `point` with jets of order `order`
/// (curvature carried at order `order − 2`).
pub fn curvature(
    metric_fn: &dyn Fn(&[Jet; DIM]) -> TensorValue,
    point: [f64; DIM],
    order: usize,
    orientation: f64,
) -> Result<CurvatureBundle> {
    if order < 3 {
        return Err(Error::ContractViolation(format!(
            "curvature needs jet order ≥ 3, got {order}"
        )));
    }
    let x = crate::jet::jet_lift(point, order)?;
    let g = metric_fn(&x);
    let chart = g.chart_id.clone();
    let inv = invert4(&g.comps, DET_TOL).ok_or(Error::DegenerateMetric { det: 0.0 })?;
    let det = inv.det;
    if det.value().abs() < DET_TOL {
        return Err(Error::DegenerateMetric { det: det.value() });
    }
    if det.value() < 0.0 {
        return Err(Error::ContractViolation(format!(
            "metric is not positive definite: det g = {}",
            det.value()
        )));
    }
    let sqrt_det = det.sqrt();
    let g_inv = TensorValue { valence: Valence::upper(2), comps: inv.inverse, chart_id: chart.clone() };

    // ∂_c g_ab, order K−1
    let dg: Vec<Jet> = (0..DIM * DIM * DIM)
        .map(|k| g.comps[k % (DIM * DIM)].d(k / (DIM * DIM)))
        .collect();
    let dgi = |c: usize, a: usize, b: usize| &dg[c * DIM * DIM + i2(a, b)];
    let km1 = order - 1;
    let mut gamma = vec![Jet::zero(km1); DIM * DIM * DIM];
    for b in 0..DIM {
        for c in b..DIM {
            let lower: Vec<Jet> = (0..DIM)
                .map(|d| (dgi(b, d, c) + dgi(c, d, b) - dgi(d, b, c)).scale(0.5))
                .collect();
            for a in 0..DIM {
                let mut s = Jet::zero(km1);
                for (d, l) in lower.iter().enumerate() {
                    s += &g_inv.comps[i2(a, d)] * l;
                }
                gamma[i3(a, c, b)] = s.clone();
                gamma[i3(a, b, c)] = s;
            }
        }
    }
    let christoffel = TensorValue {
        valence: Valence { covariant: 2, contravariant: 1 },
        comps: gamma,
        chart_id: chart.clone(),
    };
    let gm = &christoffel.comps;

    // R_abc^d for a < b
    let km2 = order - 2;
    let mut r_up = vec![Jet::zero(km2); DIM * DIM * DIM * DIM];
    for a in 0..DIM {
        for b in a + 1..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let mut s = gm[i3(d, a, c)].d(b) - gm[i3(d, b, c)].d(a);
                    for e in 0..DIM {
                        s += &gm[i3(e, a, c)] * &gm[i3(d, b, e)];
                        s -= &gm[i3(e, b, c)] * &gm[i3(d, a, e)];
                    }
                    r_up[i4(b, a, c, d)] = -&s;
                    r_up[i4(a, b, c, d)] = s;
                }
            }
        }
    }
    let mut riem = vec![Jet::zero(km2); DIM.pow(4)];
    for a in 0..DIM {
        for b in 0..DIM {
            if a == b {
                continue;
            }
            for c in 0..DIM {
                for d in 0..DIM {
                    let mut s = Jet::zero(km2);
                    for e in 0..DIM {
                        s += &r_up[i4(a, b, c, e)] * &g.comps[i2(e, d)];
                    }
                    riem[i4(a, b, c, d)] = s;
                }
            }
        }
    }
    let mut ric = vec![Jet::zero(km2); DIM * DIM];
    for a in 0..DIM {
        for c in 0..DIM {
            let mut s = Jet::zero(km2);
            for b in 0..DIM {
                s += &r_up[i4(a, b, c, b)];
            }
            ric[i2(a, c)] = s;
        }
    }
    let mut scalar = Jet::zero(km2);
    for a in 0..DIM {
        for c in 0..DIM {
            scalar += &g_inv.comps[i2(a, c)] * &ric[i2(a, c)];
        }
    }

    let gc = &g.comps;
    let mut weyl = vec![Jet::zero(km2); DIM.pow(4)];
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let ricci_part = &gc[i2(a, c)] * &ric[i2(d, b)] - &gc[i2(a, d)] * &ric[i2(c, b)]
                        - &gc[i2(b, c)] * &ric[i2(d, a)]
                        + &gc[i2(b, d)] * &ric[i2(c, a)];
                    let scalar_part = (&gc[i2(a, c)] * &gc[i2(d, b)] - &gc[i2(a, d)] * &gc[i2(c, b)]) * &scalar;
                    weyl[i4(a, b, c, d)] =
                        &riem[i4(a, b, c, d)] - ricci_part.scale(0.5) + scalar_part.scale(1.0 / 6.0);
                }
            }
        }
    }

    let o = orientation;
    let eps = TensorValue::from_fn(Valence::lower(4), &chart, |i| {
        sqrt_det.scale(o * levi_civita(i[0], i[1], i[2], i[3]))
    });
    let inv_sqrt = sqrt_det.recip();
    let eps_up = TensorValue::from_fn(Valence::upper(4), &chart, |i| {
        inv_sqrt.scale(o * levi_civita(i[0], i[1], i[2], i[3]))
    });
    let gi = &g_inv.comps;
    let eps_mixed = TensorValue::from_fn(Valence { covariant: 2, contravariant: 2 }, &chart, |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        if a == b || c == d {
            return Jet::zero(order);
        }
        let (e, f) = complement(a, b);
        let w = o * levi_civita(a, b, e, f);
        let m = &gi[i2(c, e)] * &gi[i2(d, f)] - &gi[i2(c, f)] * &gi[i2(d, e)];
        (&m * &sqrt_det).scale(w)
    });

    let weyl_sd = [Side::Plus, Side::Minus].map(|side| {
        let s = side.sign();
        TensorValue::from_fn(Valence::lower(4), &chart, |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let mut acc = weyl[i4(a, b, c, d)].clone();
            if c != d {
                let mut dual = Jet::zero(km2);
                for e in 0..DIM {
                    for f in e + 1..DIM {
                        dual += &eps_mixed.comps[i4(c, d, e, f)] * &weyl[i4(a, b, e, f)];
                    }
                }
                acc += dual.scale(s);
            }
            acc
        })
    });
    let i_pm = [Side::Plus, Side::Minus].map(|side| {
        let s = side.sign();
        TensorValue::from_fn(Valence::lower(4), &chart, |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            (&gc[i2(a, c)] * &gc[i2(b, d)] - &gc[i2(a, d)] * &gc[i2(b, c)] + eps.comps[i4(a, b, c, d)].scale(s))
                .scale(0.25)
        })
    });

    Ok(CurvatureBundle {
        order,
        orientation,
        riemann: TensorValue { valence: Valence::lower(4), comps: riem, chart_id: chart.clone() },
        ricci: TensorValue { valence: Valence::lower(2), comps: ric, chart_id: chart.clone() },
        weyl: TensorValue { valence: Valence::lower(4), comps: weyl, chart_id: chart.clone() },
        g,
        g_inv,
        sqrt_det,
        christoffel,
        scalar,
        eps,
        eps_up,
        eps_mixed,
        weyl_sd,
        i_pm,
    })
}

impl CurvatureBundle {
    /// Hodge dual `½ ε_ab^cd X_cd` of a two-form.
    pub fn dual(&self, x: &TensorValue) -> TensorValue {
        let order = x.comps.iter().map(Jet::order).min().unwrap_or(0).min(self.order - 1);
        TensorValue::antisymmetric2(&x.chart_id, order, |a, b| {
            let mut s = Jet::zero(order);
            for c in 0..DIM {
                for d in c + 1..DIM {
                    s += &self.eps_mixed.comps[i4(a, b, c, d)] * &x.comps[i2(c, d)];
                }
            }
            s
        })
    }

    /// `∂_a f` as a covector.
    pub fn grad(&self, f: &Jet) -> [Jet; DIM] {
        std::array::from_fn(|a| f.d(a))
    }

    /// `g^ab V_b`.
    pub fn raise(&self, v: &[Jet]) -> [Jet; DIM] {
        std::array::from_fn(|a| {
            let mut s = Jet::zero(v[0].order());
            for (b, vb) in v.iter().enumerate() {
                s += &self.g_inv.comps[i2(a, b)] * vb;
            }
            s
        })
    }

    /// `g_ab V^b`.
    pub fn lower(&self, v: &[Jet]) -> [Jet; DIM] {
        std::array::from_fn(|a| {
            let mut s = Jet::zero(v[0].order());
            for (b, vb) in v.iter().enumerate() {
                s += &self.g.comps[i2(a, b)] * vb;
            }
            s
        })
    }

    /// `∇_a V^a = ∂_a V^a + Γ^a_ab V^b`.
    pub fn divergence(&self, v_up: &[Jet]) -> Jet {
        let order = v_up[0].order() - 1;
        let mut s = Jet::zero(order);
        for a in 0..DIM {
            s += v_up[a].d(a);
            for b in 0..DIM {
                s += &self.christoffel.comps[i3(a, a, b)] * &v_up[b];
            }
        }
        s
    }

    /// `g^ab (∂_a∂_b f − Γ^c_ab ∂_c f)`.
    pub fn laplacian(&self, f: &Jet) -> Jet {
        let df = self.grad(f);
        let order = f.order() - 2;
        let mut s = Jet::zero(order);
        for a in 0..DIM {
            for b in 0..DIM {
                let mut h = df[b].d(a);
                for (c, dfc) in df.iter().enumerate() {
                    h -= &self.christoffel.comps[i3(c, a, b)] * dfc;
                }
                s += &self.g_inv.comps[i2(a, b)] * &h;
            }
        }
        s
    }

    /// `∇_c X_ab` of a two-form, indexed `[c][a][b]`.
    pub fn cov_deriv_2form(&self, x: &TensorValue) -> Vec<Jet> {
        let gm = &self.christoffel.comps;
        (0..DIM * DIM * DIM)
            .map(|k| {
                let (c, a, b) = (k / 16, (k / 4) % 4, k % 4);
                let mut s = x.comps[i2(a, b)].d(c);
                for e in 0..DIM {
                    s -= &gm[i3(e, c, a)] * &x.comps[i2(e, b)];
                    s -= &gm[i3(e, c, b)] * &x.comps[i2(a, e)];
                }
                s
            })
            .collect()
    }

    /// `∂_a V_b − ∂_b V_a`, indexed `[a][b]`.
    pub fn curl(&self, v: &[Jet]) -> Vec<Jet> {
        (0..DIM * DIM).map(|k| v[k % 4].d(k / 4) - v[k / 4].d(k % 4)).collect()
    }
}

/// SD (`Side::Plus`) or ASD projection `X ± ½ε_ab^cd X_cd`; the input must be
/// antisymmetric to within 1e−12 relative.
pub fn sd_project(two_form: &TensorValue, bundle: &CurvatureBundle, side: Side) -> Result<TensorValue> {
    let defect = crate::tensor::antisymmetry_defect(&two_form.values().comps);
    if defect > 1e-12 {
        return Err(Error::ContractViolation(format!(
            "sd_project needs an antisymmetric two-form, defect {defect:e}"
        )));
    }
    let dual = bundle.dual(two_form);
    let s = side.sign();
    let order = dual.comps[0].order();
    Ok(TensorValue::antisymmetric2(&two_form.chart_id, order, |a, b| {
        &two_form.comps[i2(a, b)] + dual.comps[i2(a, b)].scale(s)
    }))
}

/// Max over components of |T|, for degree-0 values of a jet tensor.
pub fn norm_inf(t: &TensorValue) -> f64 {
    t.comps.iter().fold(0.0, |m, c| m.max(c.value().abs()))
}

/// `T_abcd T^abcd` at degree 0 for a covariant 4-tensor.
pub fn square4(t: &[f64], g_inv: &[f64]) -> f64 {
    let up = raise_all4(t, g_inv);
    t.iter().zip(&up).map(|(a, b)| a * b).sum()
}

/// Raises every index of a covariant 4-tensor given as degree-0 values.
pub fn raise_all4(t: &[f64], gi: &[f64]) -> Vec<f64> {
    let mut cur = t.to_vec();
    for slot in 0..4 {
        let mut next = vec![0.0; 256];
        let stride = 4usize.pow(3 - slot as u32);
        for (k, out) in next.iter_mut().enumerate() {
            let idx = (k / stride) % 4;
            let base = k - idx * stride;
            let mut s = 0.0;
            for e in 0..4 {
                s += gi[i2(idx, e)] * cur[base + e * stride];
            }
            *out = s;
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(x: &[Jet; 4]) -> TensorValue {
        let k = x[0].order();
        TensorValue::symmetric2("flat", |a, b| Jet::constant(k, if a == b { 1.0 } else { 0.0 }))
    }

    #[test]
    fn flat_space_has_no_curvature() {
        let b = curvature(&flat, [0.3, 1.0, 2.0, -1.0], 4, 1.0).unwrap();
        assert!(norm_inf(&b.riemann) < 1e-12);
        assert!(norm_inf(&b.weyl) < 1e-12);
    }

    #[test]
    fn partly_contracted_volume_forms_on_flat_space() {
        let b = curvature(&flat, [0.0; 4], 3, 1.0).unwrap();
        // ε_abcd ε^cd_fh = −2 g_ah g_bf + 2 g_af g_bh, and ε^cd_fh = ε_fh^cd
        let contract = |a: usize, bb: usize, f: usize, h: usize| {
            let mut s = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    s += b.eps.comps[i4(a, bb, c, d)].value() * b.eps_mixed.comps[i4(f, h, c, d)].value();
                }
            }
            s
        };
        assert!((contract(0, 1, 0, 1) - 2.0).abs() < 1e-14);
        assert!((contract(0, 1, 1, 0) + 2.0).abs() < 1e-14);
        assert!(contract(0, 1, 2, 3).abs() < 1e-14);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let degenerate = |x: &[Jet; 4]| {
            let k = x[0].order();
            TensorValue::symmetric2("bad", |a, b| Jet::constant(k, if a == b && a > 0 { 1.0 } else { 0.0 }))
        };
        assert!(matches!(curvature(&degenerate, [0.0; 4], 3, 1.0), Err(Error::DegenerateMetric { .. })));
    }
}
