//! Killing-field concomitants: λ, F, F±, σ±, μ, ν, twist, Ernst potentials,
//! Mars–Simon objects, currents and the vector fields Ψ±.

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{sd_project, square4, CurvatureBundle};
use crate::error::{Error, Result};
use crate::jet::{Jet, DIM};
use crate::metrics::{neville_at_zero, sample_points, KillingFrame, MetricModel, PetrovType};
use crate::tensor::{i2, i3, i4, TensorValue, Valence};
use crate::tolerances::{MARS_SIMON_FLOOR, PETROV_DEGENERACY, PETROV_S2_SPREAD, PETROV_S_OVER_W};
use crate::Side;

/// Nodes and weights of a Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(n).expect("degree ≥ 2").as_node_weight_pairs().to_vec()
}

/// Composite Gauss–Legendre integral over `[a, b]` with `panels` equal panels.
pub fn composite_gl(f: &mut dyn FnMut(f64) -> Result<f64>, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> Result<f64> {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for &(x, w) in rule {
            total += 0.5 * h * w * f(mid + 0.5 * h * x)?;
        }
    }
    Ok(total)
}

/// Integral with panel doubling until two successive estimates agree to
/// `tol`, or to a few ulps of the estimate when that is larger. When the
/// integrand carries roundoff noise the differences stop shrinking; the
/// estimate is then accepted once they have stalled below `1e-9` relative.
pub fn integrate_adaptive(f: &mut dyn FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    let rule = gauss_legendre(16);
    let mut panels = 1;
    let mut prev = composite_gl(f, a, b, panels, &rule)?;
    let mut last_diff = f64::INFINITY;
    while panels < 256 {
        panels *= 2;
        let next = composite_gl(f, a, b, panels, &rule)?;
        let diff = (next - prev).abs();
        if diff <= tol.max(1e-14 * next.abs()) {
            return Ok(next);
        }
        if diff > 0.5 * last_diff && diff <= 1e-9 * next.abs().max(tol) {
            return Ok(next);
        }
        last_diff = diff;
        prev = next;
    }
    Err(Error::Calibration(format!("quadrature on [{a}, {b}] did not settle below {tol:e}")))
}

/// Anchoring data for the Ernst and twist potentials of one model.
#[derive(Debug, Clone, Serialize)]
pub struct ErnstCalibration {
    pub metric: String,
    /// Radius splitting the finite radial integral from the tail.
    pub r_ref: f64,
    /// `∫_{r_ref}^∞ ω_r dr` on the equator.
    pub tail: f64,
    /// `[b⁺, b⁻]` in `E± = 1 + b±/r + …`.
    pub b: [f64; 2],
    /// Extrapolation residual of the `b±` fit.
    pub fit_residual: [f64; 2],
    /// Constant added to the twist potential; zero for the normalized one.
    pub twist_offset: f64,
}

impl ErnstCalibration {
    pub fn b(&self, side: Side) -> f64 {
        self.b[side.index()]
    }

    /// Same calibration with `ω` shifted by a constant, which keeps
    /// `∇E± = σ±` but gives up `E± → 1` at infinity.
    pub fn with_twist_offset(mut self, offset: f64) -> Self {
        self.twist_offset = offset;
        self
    }
}

fn twist_component(model: &MetricModel, r: f64, theta: f64, comp: usize) -> Result<f64> {
    let kf = KillingFrame::at(model, [0.0, r, theta, 0.0])?;
    Ok(kf.twist(model.killing())[comp])
}

/// `∫_r^∞ ω_r(r', π/2) dr'` by the substitution `t = 1/r'`.
fn radial_tail(model: &MetricModel, r: f64) -> Result<f64> {
    let scale = model.scale;
    integrate_adaptive(
        &mut |t| Ok(twist_component(model, 1.0 / t, PI / 2.0, 1)? / (t * t)),
        0.0,
        1.0 / r,
        1e-15 * scale,
    )
}

/// Calibrates the twist and Ernst potentials: anchors `ω → 0` at infinity
/// and extracts `b±` from `r² σ±_r → −b±` on the equator.
pub fn ernst_calibrate(model: &MetricModel) -> Result<ErnstCalibration> {
    let r_ref = model.domain.r_outer;
    let tail = radial_tail(model, r_ref)?;
    let mut b = [0.0; 2];
    let mut fit_residual = [0.0; 2];
    let radii: Vec<f64> = (0..6).map(|k| 100.0 * model.scale * 2f64.powi(k)).collect();
    for side in Side::BOTH {
        let mut ts = Vec::new();
        let mut ys = Vec::new();
        for &r in &radii {
            let kf = KillingFrame::at(model, [0.0, r, PI / 2.0, 0.0])?;
            let x = crate::jet::jet_lift([0.0, r, PI / 2.0, 0.0], 1)?;
            let dlam = model.metric(&x).comps[0].gradient_value(1) * model.killing_scale.powi(2);
            let sigma_r = dlam + side.sign() * kf.twist(model.killing())[1];
            ts.push(1.0 / r);
            ys.push(r * r * sigma_r);
        }
        let (lim, res) = neville_at_zero(&ts, &ys);
        if res > 1e-6 * lim.abs().max(model.scale) {
            return Err(Error::Calibration(format!(
                "tail fit of r²σ_r on side {} did not converge (residual {res:e})",
                side.symbol()
            )));
        }
        b[side.index()] = if lim.abs() < 1e-9 * model.scale { 0.0 } else { -lim };
        fit_residual[side.index()] = res;
    }
    Ok(ErnstCalibration { metric: model.name.clone(), r_ref, tail, b, fit_residual, twist_offset: 0.0 })
}

/// Twist potential `ω(r, θ)` normalized to vanish at infinity: radial
/// integral on the equator from infinity, then along the θ-circle.
pub fn twist_potential(model: &MetricModel, cal: &ErnstCalibration, r: f64, theta: f64) -> Result<f64> {
    let s = model.scale;
    let radial = if r >= cal.r_ref {
        radial_tail(model, r)?
    } else {
        let inner = integrate_adaptive(
            &mut |u| {
                let rr = u.exp();
                Ok(rr * twist_component(model, rr, PI / 2.0, 1)?)
            },
            r.ln(),
            cal.r_ref.ln(),
            1e-15 * s,
        )?;
        inner + cal.tail
    };
    let angular = integrate_adaptive(&mut |th| twist_component(model, r, th, 2), PI / 2.0, theta, 1e-15 * s)?;
    Ok(-radial + angular)
}

/// Same potential along the other path: θ-circle at `r_ref`, then radially.
pub fn twist_potential_alt(model: &MetricModel, cal: &ErnstCalibration, r: f64, theta: f64) -> Result<f64> {
    let s = model.scale;
    let angular = integrate_adaptive(&mut |th| twist_component(model, cal.r_ref, th, 2), PI / 2.0, theta, 1e-15 * s)?;
    let radial = integrate_adaptive(&mut |rr| twist_component(model, rr, theta, 1), cal.r_ref, r, 1e-15 * s)?;
    Ok(-cal.tail + angular + radial)
}

/// Mars–Simon objects of one side at degree 0, plus the jet `s²` and `Γ`.
#[derive(Debug, Clone)]
pub struct MarsSimon {
    /// `S±_abcd`.
    pub s: Vec<f64>,
    pub s_sq: f64,
    /// `(F±S±)² = F^ab S^ef_ab F^cd S_efcd`.
    pub fs_sq: f64,
    /// `s±² = (F±)² / (1 − E±)⁴`.
    pub ms_scalar: Jet,
    /// `Γ±_a`.
    pub gamma: [Jet; DIM],
    /// `P±_abc`.
    pub p: Vec<f64>,
    pub p_sq: f64,
}

#[derive(Debug, Clone)]
pub struct SideFields {
    pub side: Side,
    /// `F±_ab`.
    pub f: TensorValue,
    /// `(F±)²`.
    pub f2: Jet,
    /// `σ±_a`.
    pub sigma: [Jet; DIM],
    /// `E±`.
    pub ernst: Jet,
    /// `None` when `(F±)²` lies below the Mars–Simon floor.
    pub mars_simon: Option<MarsSimon>,
    pub floor: f64,
}

/// All concomitants at one chart point.
#[derive(Debug, Clone)]
pub struct Concomitants {
    pub point: [f64; DIM],
    pub order: usize,
    pub bundle: CurvatureBundle,
    pub xi: [f64; DIM],
    pub xi_lower: [Jet; DIM],
    pub lambda: Jet,
    /// `F_ab = ∇_a ξ_b`.
    pub f: TensorValue,
    pub mu: Jet,
    pub nu: Jet,
    /// `ω_a`.
    pub twist_form: [Jet; DIM],
    /// `ω`.
    pub twist: Jet,
    pub sides: [SideFields; 2],
    pub j_t: [Jet; DIM],
    pub j_d: [Jet; DIM],
    pub j_e: [Jet; DIM],
}

/// `X^ab` from `X_ab`.
pub fn raise2(b: &CurvatureBundle, x: &TensorValue) -> TensorValue {
    let gi = &b.g_inv.comps;
    let order = x.comps[0].order().min(b.order);
    let mut half = vec![Jet::zero(order); 16];
    for a in 0..DIM {
        for d in 0..DIM {
            let mut s = Jet::zero(order);
            for c in 0..DIM {
                s += &gi[i2(a, c)] * &x.comps[i2(c, d)];
            }
            half[i2(a, d)] = s;
        }
    }
    TensorValue::from_fn(Valence::upper(2), &x.chart_id, |i| {
        let mut s = Jet::zero(order);
        for d in 0..DIM {
            s += &half[i2(i[0], d)] * &gi[i2(i[1], d)];
        }
        s
    })
}

/// Full contraction `X_ab Y^ab`.
pub fn contract2(x: &TensorValue, y_up: &TensorValue) -> Jet {
    let order = x.comps[0].order().min(y_up.comps[0].order());
    let mut s = Jet::zero(order);
    for k in 0..16 {
        s += &x.comps[k] * &y_up.comps[k];
    }
    s
}

fn vec_combine(terms: &[(&Jet, &[Jet; DIM])]) -> [Jet; DIM] {
    std::array::from_fn(|a| {
        let mut acc: Option<Jet> = None;
        for (c, v) in terms {
            let t = *c * &v[a];
            acc = Some(match acc {
                None => t,
                Some(s) => s + t,
            });
        }
        acc.expect("nonempty")
    })
}

/// Computes every concomitant at `point` with jets of order `order ≥ 4`
/// (order 3 suffices for values without second derivatives of derived fields).
pub fn concomitants_at(model: &MetricModel, point: [f64; DIM], order: usize, cal: &ErnstCalibration) -> Result<Concomitants> {
    let inner = || -> Result<Concomitants> {
        let b = model.curvature(point, order)?;
        let xi = model.killing();
        let xi_lower: [Jet; DIM] = std::array::from_fn(|a| b.g.comps[i2(a, 0)].scale(xi[0]));
        let lambda = xi_lower[0].scale(xi[0]);
        if lambda.value() <= 0.0 {
            return Err(Error::FixedPoint { lambda: lambda.value() });
        }
        let dxi: Vec<Jet> = (0..16).map(|k| xi_lower[k % 4].d(k / 4)).collect();
        let km1 = order - 1;
        let f = TensorValue::antisymmetric2(model.chart_id(), km1, |a, c| (&dxi[i2(a, c)] - &dxi[i2(c, a)]).scale(0.5));
        let f_up = raise2(&b, &f);
        let mu = contract2(&f, &f_up).scale(0.5);
        let dual_f = b.dual(&f);
        let nu = contract2(&dual_f, &f_up).scale(0.5);
        // ω_a = ε_abcd ξ^b F^cd = 2 ε_a0cd ξ^0 F^cd summed over c < d
        let twist_form: [Jet; DIM] = std::array::from_fn(|a| {
            let mut s = Jet::zero(km1);
            for c in 0..DIM {
                for d in c + 1..DIM {
                    let e = &b.eps.comps[i4(a, 0, c, d)];
                    if e.value() != 0.0 {
                        s += e * &f_up.comps[i2(c, d)];
                    }
                }
            }
            s.scale(2.0 * xi[0])
        });
        let omega0 = twist_potential(model, cal, point[1], point[2])? + cal.twist_offset;
        let twist = Jet::integrate_gradient(omega0, &twist_form);
        let r = point[1];
        let mut sides_vec = Vec::with_capacity(2);
        let ernst: [Jet; 2] = [&lambda + &twist, &lambda - &twist];
        for side in Side::BOTH {
            let fpm = sd_project(&f, &b, side)?;
            let fpm_up = raise2(&b, &fpm);
            let f2 = contract2(&fpm, &fpm_up);
            let sigma: [Jet; DIM] = std::array::from_fn(|a| fpm.comps[i2(a, 0)].scale(2.0 * xi[0]));
            let e = ernst[side.index()].clone();
            let e_opp = ernst[side.opposite().index()].clone();
            let bb = cal.b(side).abs().max(model.scale);
            let floor = MARS_SIMON_FLOOR * bb * bb / r.powi(4);
            let mars_simon = if f2.value() > floor {
                Some(mars_simon(&b, side, &fpm, &fpm_up, &f2, &sigma, &e, &e_opp, &lambda, &xi_lower, xi))
            } else {
                None
            };
            sides_vec.push(SideFields { side, f: fpm, f2, sigma, ernst: e, mars_simon, floor });
        }
        let sides: [SideFields; 2] = [sides_vec.remove(0), sides_vec.remove(0)];
        let (sp, sm) = (&sides[0].sigma, &sides[1].sigma);
        let (ep, em) = (&sides[0].ernst, &sides[1].ernst);
        let inv2l2 = (&lambda * &lambda).recip().scale(0.5);
        let j_t = vec_combine(&[(&inv2l2, sm), (&(-&inv2l2), sp)]);
        let j_d = vec_combine(&[(&(ep * &inv2l2), sm), (&(em * &inv2l2), sp)]);
        let j_e = vec_combine(&[(&(ep * ep * &inv2l2), sm), (&(-(em * em * &inv2l2)), sp)]);
        Ok(Concomitants {
            point,
            order,
            bundle: b,
            xi,
            xi_lower,
            lambda,
            f,
            mu,
            nu,
            twist_form,
            twist,
            sides,
            j_t,
            j_d,
            j_e,
        })
    };
    inner().map_err(|e| e.at(point))
}

#[allow(clippy::too_many_arguments)]
fn mars_simon(
    b: &CurvatureBundle,
    side: Side,
    fpm: &TensorValue,
    fpm_up: &TensorValue,
    f2: &Jet,
    sigma: &[Jet; DIM],
    e: &Jet,
    e_opp: &Jet,
    lambda: &Jet,
    xi_lower: &[Jet; DIM],
    xi: [f64; DIM],
) -> MarsSimon {
    let k = side.index();
    let w: Vec<f64> = b.weyl_sd[k].comps.iter().map(Jet::value).collect();
    let ip: Vec<f64> = b.i_pm[k].comps.iter().map(Jet::value).collect();
    let fv: Vec<f64> = fpm.comps.iter().map(Jet::value).collect();
    let fu: Vec<f64> = fpm_up.comps.iter().map(Jet::value).collect();
    let f2v = f2.value();
    let one_minus_e = 1.0 - e.value();
    let s: Vec<f64> = (0..256)
        .map(|n| {
            let (a, bb, c, d) = (n / 64, (n / 16) % 4, (n / 4) % 4, n % 4);
            w[n] - 6.0 * (fv[i2(a, bb)] * fv[i2(c, d)] - f2v * ip[n] / 3.0) / one_minus_e
        })
        .collect();
    let gi: Vec<f64> = b.g_inv.comps.iter().map(Jet::value).collect();
    let s_sq = square4(&s, &gi);
    // T_ef = S_efab F^ab
    let t: Vec<f64> = (0..16)
        .map(|ef| (0..16).map(|ab| s[ef * 16 + ab] * fu[ab]).sum())
        .collect();
    let t_up = raise_pair(&t, &gi);
    let fs_sq: f64 = t.iter().zip(&t_up).map(|(x, y)| x * y).sum();

    let ms_scalar = f2 * &(1.0 - e).powi(-4);
    let gamma: [Jet; DIM] = {
        let coef = (1.0 + e_opp) * ((1.0 - e) * lambda).recip();
        std::array::from_fn(|a| &coef * &sigma[a])
    };

    // P_abc = γ_a[b W_c]efk ξ^e F^fk + 4 ξ^e ξ^f W_eaf[b σ_c]
    let lam = lambda.value();
    let xl: Vec<f64> = xi_lower.iter().map(Jet::value).collect();
    let gv: Vec<f64> = b.g.comps.iter().map(Jet::value).collect();
    let sig: Vec<f64> = sigma.iter().map(Jet::value).collect();
    let gam = |a: usize, c: usize| lam * gv[i2(a, c)] - xl[a] * xl[c];
    // Wxf_c = W_cefk ξ^e F^fk
    let wxf: Vec<f64> = (0..4)
        .map(|c| {
            let mut acc = 0.0;
            for f in 0..4 {
                for kk in 0..4 {
                    acc += w[i4(c, 0, f, kk)] * xi[0] * fu[i2(f, kk)];
                }
            }
            acc
        })
        .collect();
    let xwx = |a: usize, bb: usize| w[i4(0, a, 0, bb)] * xi[0] * xi[0];
    let p: Vec<f64> = (0..64)
        .map(|n| {
            let (a, bb, c) = (n / 16, (n / 4) % 4, n % 4);
            0.5 * (gam(a, bb) * wxf[c] - gam(a, c) * wxf[bb]) + 2.0 * (xwx(a, bb) * sig[c] - xwx(a, c) * sig[bb])
        })
        .collect();
    let p_up: Vec<f64> = (0..64)
        .map(|n| {
            let (a, bb, c) = (n / 16, (n / 4) % 4, n % 4);
            let mut acc = 0.0;
            for x in 0..4 {
                for y in 0..4 {
                    for z in 0..4 {
                        acc += gi[i2(a, x)] * gi[i2(bb, y)] * gi[i2(c, z)] * p[i3(x, y, z)];
                    }
                }
            }
            acc
        })
        .collect();
    let p_sq = p.iter().zip(&p_up).map(|(x, y)| x * y).sum();
    MarsSimon { s, s_sq, fs_sq, ms_scalar, gamma, p, p_sq }
}

/// Raises both indices of a real 2-tensor.
pub fn raise_pair(t: &[f64], gi: &[f64]) -> Vec<f64> {
    (0..16)
        .map(|k| {
            let (a, b) = (k / 4, k % 4);
            let mut s = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    s += gi[i2(a, c)] * gi[i2(b, d)] * t[i2(c, d)];
                }
            }
            s
        })
        .collect()
}

impl Concomitants {
    pub fn side(&self, side: Side) -> &SideFields {
        &self.sides[side.index()]
    }

    /// `J±_a = (±(1 ∓ E⁺)² σ⁻_a ∓ (1 ± E⁻)² σ⁺_a) / (2λ²)`.
    pub fn j_pm(&self, side: Side) -> [Jet; DIM] {
        let s = side.sign();
        let ep = &self.sides[0].ernst;
        let em = &self.sides[1].ernst;
        let inv = (&self.lambda * &self.lambda).recip().scale(0.5);
        let a = (1.0 - ep.scale(s)).powi(2) * &inv;
        let c = (1.0 + em.scale(s)).powi(2) * &inv;
        let (sp, sm) = (&self.sides[0].sigma, &self.sides[1].sigma);
        std::array::from_fn(|k| (&a * &sm[k] - &c * &sp[k]).scale(s))
    }

    /// `(1 + E∓)(1 − E±) / λ`.
    pub fn ernst_weight(&self, side: Side) -> Jet {
        let e = &self.side(side).ernst;
        let eo = &self.side(side.opposite()).ernst;
        (1.0 + eo) * (1.0 - e) * self.lambda.recip()
    }

    /// `|s±|^β`, when the Mars–Simon objects exist.
    pub fn abs_s_pow(&self, side: Side, beta: f64) -> Option<Jet> {
        self.side(side).mars_simon.as_ref().map(|ms| ms.ms_scalar.powf(0.5 * beta))
    }

    /// `V±(β)` at degree 0.
    pub fn potential(&self, side: Side, beta: f64) -> Option<f64> {
        let sf = self.side(side);
        sf.mars_simon.as_ref().map(|ms| {
            let f2 = sf.f2.value();
            beta * self.lambda.value() * (f2 * ms.s_sq + (beta - 2.0) * ms.fs_sq) / (4.0 * f2 * f2)
        })
    }

    /// Covector `Ψ±^(β)_a = ½ J±_a |s|^β + ½(1 + E∓)(1 − E±)/λ ∂_a |s|^β`.
    pub fn psi(&self, side: Side, beta: f64) -> Option<[Jet; DIM]> {
        let sb = self.abs_s_pow(side, beta)?;
        let j = self.j_pm(side);
        let w = self.ernst_weight(side).scale(0.5);
        Some(std::array::from_fn(|a| (&j[a] * &sb).scale(0.5) + &w * &sb.d(a)))
    }
}

/// Quotient scalars `(w⁺, w⁻, Θ, k⁺⁴, k⁻⁴)` as jets.
#[derive(Debug, Clone)]
pub struct QuotientValues {
    pub w: [Jet; 2],
    pub theta: Jet,
    pub k4: [Jet; 2],
}

/// `w± = (1 − E±)/(1 + E±)`, `Θ = 1 − w⁺w⁻`, `k±⁴ = λ⁻¹ g^ab ∂_a w± ∂_b w±`.
pub fn quotient_scalars(c: &Concomitants) -> Result<QuotientValues> {
    let (ep, em) = (c.sides[0].ernst.value(), c.sides[1].ernst.value());
    if ep.abs() >= 1.0 || em.abs() >= 1.0 {
        return Err(Error::NormalizationViolation { e_plus: ep, e_minus: em }.at(c.point));
    }
    let w: [Jet; 2] = std::array::from_fn(|k| {
        let e = &c.sides[k].ernst;
        (1.0 - e) / (1.0 + e)
    });
    let theta = 1.0 - &w[0] * &w[1];
    let lam_inv = c.lambda.recip();
    let k4: [Jet; 2] = std::array::from_fn(|k| {
        let dw = c.bundle.grad(&w[k]);
        let up = c.bundle.raise(&dw);
        let mut s = Jet::zero(up[0].order());
        for a in 0..DIM {
            s += &dw[a] * &up[a];
        }
        s * &lam_inv
    });
    Ok(QuotientValues { w, theta, k4 })
}

/// Petrov verdict for one duality side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PetrovVerdict {
    HalfFlat,
    TypeD,
    General,
    Inconsistent,
}

impl PetrovVerdict {
    pub fn matches(self, declared: PetrovType) -> bool {
        matches!(
            (self, declared),
            (PetrovVerdict::HalfFlat, PetrovType::HalfFlat)
                | (PetrovVerdict::TypeD, PetrovType::TypeD)
                | (PetrovVerdict::General, PetrovType::General)
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PetrovReport {
    pub side: Side,
    pub verdict: PetrovVerdict,
    pub points: usize,
    /// Largest `‖S±‖/‖W±‖`.
    pub max_s_over_w: f64,
    /// Standard deviation of `s±²` over its mean.
    pub s2_spread: f64,
    /// Largest eigenvalue non-degeneracy `1 − 6 (tr M³)² / (tr M²)³`.
    pub max_degeneracy: f64,
    /// Largest `‖W±‖` relative to `‖W‖`.
    pub max_weyl_fraction: f64,
}

/// Classifies the Weyl tensor of one side from three criteria: vanishing of
/// S±, constancy of s±², and a repeated eigenvalue of W± on Λ².
pub fn petrov_classify(cons: &[Concomitants], side: Side) -> Result<PetrovReport> {
    if cons.len() < 20 {
        return Err(Error::Classification(format!("need ≥ 20 points, got {}", cons.len())));
    }
    let mut max_s_over_w = 0.0f64;
    let mut max_deg = 0.0f64;
    let mut max_wfrac = 0.0f64;
    let mut s2 = Vec::new();
    let mut singular = 0;
    for c in cons {
        let k = side.index();
        let b = &c.bundle;
        let gi: Vec<f64> = b.g_inv.comps.iter().map(Jet::value).collect();
        let w: Vec<f64> = b.weyl_sd[k].comps.iter().map(Jet::value).collect();
        let wfull: Vec<f64> = b.weyl.comps.iter().map(Jet::value).collect();
        let w_sq = square4(&w, &gi);
        let wfull_sq = square4(&wfull, &gi).max(1e-300);
        let frac = (w_sq / (4.0 * wfull_sq)).max(0.0).sqrt();
        max_wfrac = max_wfrac.max(frac);
        if frac < 1e-7 {
            continue;
        }
        max_deg = max_deg.max(weyl_degeneracy(&w, &gi));
        match &c.side(side).mars_simon {
            Some(ms) => {
                max_s_over_w = max_s_over_w.max((ms.s_sq.max(0.0) / w_sq).sqrt());
                s2.push(ms.ms_scalar.value());
            }
            None => singular += 1,
        }
    }
    let half_flat = max_wfrac < 1e-7;
    let spread = if s2.is_empty() {
        0.0
    } else {
        let mean = s2.iter().sum::<f64>() / s2.len() as f64;
        let var = s2.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / s2.len() as f64;
        var.sqrt() / mean.abs().max(1e-300)
    };
    let verdict = if half_flat {
        PetrovVerdict::HalfFlat
    } else if singular > 0 && s2.is_empty() {
        PetrovVerdict::Inconsistent
    } else {
        let c1 = max_s_over_w < PETROV_S_OVER_W;
        let c2 = spread < PETROV_S2_SPREAD;
        let c3 = max_deg < PETROV_DEGENERACY;
        match (c1, c2, c3) {
            (true, true, true) => PetrovVerdict::TypeD,
            (false, false, false) => PetrovVerdict::General,
            _ => PetrovVerdict::Inconsistent,
        }
    };
    Ok(PetrovReport {
        side,
        verdict,
        points: cons.len(),
        max_s_over_w,
        s2_spread: spread,
        max_degeneracy: max_deg,
        max_weyl_fraction: max_wfrac,
    })
}

/// Classifies both sides of `model` from `n_points` seeded sample points.
pub fn petrov_survey(model: &MetricModel, n_points: usize, seed: u64) -> Result<[PetrovReport; 2]> {
    let cal = ernst_calibrate(model)?;
    let points = sample_points(model, n_points, seed, 0.05)?;
    let cons: Vec<Concomitants> = points.par_iter().map(|&p| concomitants_at(model, p, 3, &cal)).collect::<Result<_>>()?;
    Ok([petrov_classify(&cons, Side::Plus)?, petrov_classify(&cons, Side::Minus)?])
}

/// `1 − 6 (tr M³)² / (tr M²)³` for the operator `M` of a (A)SD Weyl tensor
/// on two-forms; zero exactly when two eigenvalues coincide.
pub fn weyl_degeneracy(w: &[f64], gi: &[f64]) -> f64 {
    // M^ab_cd with index pairs raised on the left
    let up = raise_first_pair(w, gi);
    let tr2: f64 = (0..256)
        .map(|n| {
            let (a, b, c, d) = (n / 64, (n / 16) % 4, (n / 4) % 4, n % 4);
            up[i4(a, b, c, d)] * up[i4(c, d, a, b)]
        })
        .sum::<f64>()
        * 0.25;
    let mut tr3 = 0.0;
    for ab in 0..16 {
        for cd in 0..16 {
            let x = up[ab * 16 + cd];
            if x == 0.0 {
                continue;
            }
            for ef in 0..16 {
                tr3 += x * up[cd * 16 + ef] * up[ef * 16 + ab];
            }
        }
    }
    tr3 *= 0.125;
    if tr2 <= 0.0 {
        return 0.0;
    }
    (1.0 - 6.0 * tr3 * tr3 / tr2.powi(3)).abs()
}

fn raise_first_pair(w: &[f64], gi: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 256];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut s = 0.0;
                    for e in 0..4 {
                        for f in 0..4 {
                            s += gi[i2(a, e)] * gi[i2(b, f)] * w[i4(e, f, c, d)];
                        }
                    }
                    out[i4(a, b, c, d)] = s;
                }
            }
        }
    }
    out
}
