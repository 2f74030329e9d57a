//! Closed-form instanton metrics with Killing field, chart domain and
//! declared fixed-point metadata.
//!
//! Every chart uses coordinates `(x0, x1, x2, x3) = (τ, r, θ, φ)` with the
//! Killing field `ξ = ∂_τ`, already normalized so that `λ → 1` along the end.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::{curvature, CurvatureBundle};
use crate::error::{Error, Result};
use crate::jet::{Jet, DIM};
use crate::tensor::{i2, invert4, levi_civita, TensorValue};
use crate::tolerances::{CHART_MARGIN, DET_TOL, GATE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum MetricKind {
    Flat { length: f64 },
    Schwarzschild { m: f64 },
    Kerr { m: f64, a: f64 },
    TaubNut { n: f64 },
    TaubBolt { n: f64 },
}

/// Declared Petrov type of one duality side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PetrovType {
    HalfFlat,
    TypeD,
    General,
}

/// A component of the fixed-point set, located in the chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FixedPointLocus {
    /// Isolated fixed point at `(r, θ)`; `kappa` are the signed surface
    /// gravities with `|κ¹| ≥ |κ²|` and `ε = sgn(κ¹κ²)`.
    Nut { label: String, r: f64, theta: f64, kappa: [f64; 2] },
    /// Fixed two-surface `r = r_b`.
    Bolt { label: String, r: f64, kappa: f64, euler_char: i64, self_intersection: i64 },
}

impl FixedPointLocus {
    pub fn label(&self) -> &str {
        match self {
            FixedPointLocus::Nut { label, .. } | FixedPointLocus::Bolt { label, .. } => label,
        }
    }
}

/// Data of the end: orbifold Euler characteristic, orbit length, Euler number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryData {
    pub orbifold_euler: i64,
    pub length_at_infinity: f64,
    pub euler_number: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub fixed_points: Vec<FixedPointLocus>,
    pub boundary: BoundaryData,
    /// Declared Petrov type, `[+, −]`.
    pub petrov: [PetrovType; 2],
    pub hypersurface_orthogonal: bool,
}

/// Coordinate box of the chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartDomain {
    /// Radius of the innermost degeneracy (fixed points or origin).
    pub r_inner: f64,
    /// Outer sampling radius.
    pub r_outer: f64,
    pub margin: f64,
    /// Coordinate period of τ over a fundamental domain; φ has period 2π.
    pub tau_period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricModel {
    pub name: String,
    pub kind: MetricKind,
    pub parameters: BTreeMap<String, f64>,
    pub domain: ChartDomain,
    /// Orientation sign of the chart `(τ, r, θ, φ)`.
    pub orientation: f64,
    /// Constant `c` with `ξ = c ∂_τ`.
    pub killing_scale: f64,
    /// Length scale used for fits and floors (m or n).
    pub scale: f64,
    pub metadata: Metadata,
    /// Amplitude of the deliberate `g_ττ` corruption (0 for a clean model).
    pub perturbation: f64,
}

pub const METRIC_NAMES: [&str; 5] = ["flat", "schwarzschild", "kerr", "taub-nut", "taub-bolt"];

impl MetricModel {
    /// Builds a model from its name and parameter overrides; unknown
    /// parameter names are rejected.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "flat" => &["length"],
            "schwarzschild" => &["m"],
            "kerr" => &["m", "a"],
            "taub-nut" | "taub-bolt" => &["n"],
            other => return Err(Error::UnknownMetric(other.to_string())),
        };
        for key in params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!("metric {name} has no parameter {key:?}")));
            }
        }
        let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
        match name {
            "flat" => Self::flat(get("length", 2.0 * PI)),
            "schwarzschild" => Self::schwarzschild(get("m", 1.0)),
            "kerr" => Self::kerr(get("m", 1.0), get("a", 0.3)),
            "taub-nut" => Self::taub_nut(get("n", 1.0)),
            _ => Self::taub_bolt(get("n", 1.0)),
        }
    }

    fn base(name: &str, kind: MetricKind, params: &[(&str, f64)], domain: ChartDomain, scale: f64, metadata: Metadata) -> Self {
        MetricModel {
            name: name.to_string(),
            kind,
            parameters: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            domain,
            orientation: 1.0,
            killing_scale: 1.0,
            scale,
            metadata,
            perturbation: 0.0,
        }
    }

    /// Flat ℝ³ × S¹ with circle length `length`.
    pub fn flat(length: f64) -> Result<Self> {
        positive("length", length)?;
        Ok(Self::base(
            "flat",
            MetricKind::Flat { length },
            &[("length", length)],
            ChartDomain { r_inner: 0.0, r_outer: 40.0, margin: CHART_MARGIN, tau_period: length },
            1.0,
            Metadata {
                fixed_points: vec![],
                boundary: BoundaryData { orbifold_euler: 2, length_at_infinity: length, euler_number: 0 },
                petrov: [PetrovType::HalfFlat; 2],
                hypersurface_orthogonal: true,
            },
        ))
    }

    /// Euclidean Schwarzschild with mass `m`; bolt at r = 2m.
    pub fn schwarzschild(m: f64) -> Result<Self> {
        positive("m", m)?;
        let kappa = 1.0 / (4.0 * m);
        Ok(Self::base(
            "schwarzschild",
            MetricKind::Schwarzschild { m },
            &[("m", m)],
            ChartDomain { r_inner: 2.0 * m, r_outer: 40.0 * m, margin: CHART_MARGIN * m, tau_period: 2.0 * PI / kappa },
            m,
            Metadata {
                fixed_points: vec![FixedPointLocus::Bolt {
                    label: "bolt".into(),
                    r: 2.0 * m,
                    kappa,
                    euler_char: 2,
                    self_intersection: 0,
                }],
                boundary: BoundaryData { orbifold_euler: 2, length_at_infinity: 8.0 * PI * m, euler_number: 0 },
                petrov: [PetrovType::TypeD; 2],
                hypersurface_orthogonal: true,
            },
        ))
    }

    /// Euclidean Kerr with mass `m` and rotation `a`, `|a| < m`; nuts at
    /// `(r₊, 0)` and `(r₊, π)`.
    pub fn kerr(m: f64, a: f64) -> Result<Self> {
        positive("m", m)?;
        if a.abs() >= m || a == 0.0 {
            return Err(Error::Config(format!("kerr needs 0 < |a| < m, got a = {a}, m = {m}")));
        }
        let root = (m * m + a * a).sqrt();
        let r_plus = m + root;
        let kappa = root / (2.0 * m * r_plus);
        let omega = a / (2.0 * m * r_plus);
        Ok(Self::base(
            "kerr",
            MetricKind::Kerr { m, a },
            &[("a", a), ("m", m)],
            ChartDomain { r_inner: r_plus, r_outer: 40.0 * m, margin: CHART_MARGIN * m, tau_period: 2.0 * PI / kappa },
            m,
            Metadata {
                fixed_points: vec![
                    FixedPointLocus::Nut { label: "north".into(), r: r_plus, theta: 0.0, kappa: [kappa, omega] },
                    FixedPointLocus::Nut { label: "south".into(), r: r_plus, theta: PI, kappa: [kappa, -omega] },
                ],
                boundary: BoundaryData { orbifold_euler: 2, length_at_infinity: 2.0 * PI / kappa, euler_number: 0 },
                petrov: [PetrovType::TypeD; 2],
                hypersurface_orthogonal: false,
            },
        ))
    }

    /// Self-dual Taub–NUT with nut parameter `n`; the nut sits at r = n.
    pub fn taub_nut(n: f64) -> Result<Self> {
        positive("n", n)?;
        let kappa = 1.0 / (4.0 * n);
        Ok(Self::base(
            "taub-nut",
            MetricKind::TaubNut { n },
            &[("n", n)],
            ChartDomain { r_inner: n, r_outer: 40.0 * n, margin: CHART_MARGIN * n, tau_period: 8.0 * PI * n },
            n,
            Metadata {
                fixed_points: vec![FixedPointLocus::Nut {
                    label: "nut".into(),
                    r: n,
                    theta: PI / 3.0,
                    kappa: [kappa, kappa],
                }],
                boundary: BoundaryData { orbifold_euler: 2, length_at_infinity: 8.0 * PI * n, euler_number: 1 },
                petrov: [PetrovType::TypeD, PetrovType::HalfFlat],
                hypersurface_orthogonal: false,
            },
        ))
    }

    /// Taub-bolt with nut parameter `n` and mass `5n/4`; bolt at r = 2n.
    pub fn taub_bolt(n: f64) -> Result<Self> {
        positive("n", n)?;
        let kappa = 1.0 / (4.0 * n);
        Ok(Self::base(
            "taub-bolt",
            MetricKind::TaubBolt { n },
            &[("n", n)],
            ChartDomain { r_inner: 2.0 * n, r_outer: 40.0 * n, margin: CHART_MARGIN * n, tau_period: 8.0 * PI * n },
            n,
            Metadata {
                fixed_points: vec![FixedPointLocus::Bolt {
                    label: "bolt".into(),
                    r: 2.0 * n,
                    kappa,
                    euler_char: 2,
                    self_intersection: -1,
                }],
                boundary: BoundaryData { orbifold_euler: 2, length_at_infinity: 8.0 * PI * n, euler_number: -1 },
                petrov: [PetrovType::TypeD; 2],
                hypersurface_orthogonal: false,
            },
        ))
    }

    /// A copy with `g_ττ` perturbed by `δ (L/r)² sin²θ`, for mutation tests.
    /// The result bypasses the validation gate.
    pub fn perturbed(&self, delta: f64) -> Self {
        let mut m = self.clone();
        m.perturbation = delta;
        m.name = format!("{}+perturbed", self.name);
        m
    }

    pub fn chart_id(&self) -> &str {
        &self.name
    }

    /// Metric components `g_ab` at the jet point `x`.
    pub fn metric(&self, x: &[Jet; DIM]) -> TensorValue {
        let k = x[0].order();
        let zero = Jet::zero(k);
        let (r, th) = (&x[1], &x[2]);
        let (s, c) = (th.sin(), th.cos());
        let s2 = &s * &s;
        let mut comps: [[Jet; DIM]; DIM] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
        match self.kind {
            MetricKind::Flat { .. } => {
                comps[0][0] = Jet::constant(k, 1.0);
                comps[1][1] = Jet::constant(k, 1.0);
                comps[2][2] = r * r;
                comps[3][3] = &comps[2][2] * &s2;
            }
            MetricKind::Schwarzschild { m } => {
                let v = (r - 2.0 * m) * r.recip();
                comps[1][1] = v.recip();
                comps[0][0] = v;
                comps[2][2] = r * r;
                comps[3][3] = &comps[2][2] * &s2;
            }
            MetricKind::Kerr { m, a } => {
                let r2 = r * r;
                let root = (m * m + a * a).sqrt();
                let delta = (r - (m + root)) * (r - (m - root));
                let sigma = &r2 - (a * a) * (&c * &c);
                let si = sigma.recip();
                let mr2 = 2.0 * m * r;
                comps[0][0] = 1.0 - &mr2 * &si;
                comps[0][3] = -(a * &s2) * &mr2 * &si;
                let ra = &r2 - a * a;
                comps[3][3] = (&delta * (a * a) * &s2 * &s2 + &s2 * &ra * &ra) * &si;
                comps[1][1] = &sigma * &delta.recip();
                comps[2][2] = sigma;
            }
            MetricKind::TaubNut { n } => {
                let v = (r - n) / (r + n);
                let rr = r * r - n * n;
                comps[1][1] = v.recip();
                comps[3][3] = &rr * &s2 + (4.0 * n * n) * &v * &c * &c;
                comps[0][3] = (2.0 * n) * &v * &c;
                comps[0][0] = v;
                comps[2][2] = rr;
            }
            MetricKind::TaubBolt { n } => {
                let rr = r * r - n * n;
                let v = (r - 2.0 * n) * (r - 0.5 * n) / &rr;
                comps[1][1] = v.recip();
                comps[3][3] = &rr * &s2 + (4.0 * n * n) * &v * &c * &c;
                comps[0][3] = (2.0 * n) * &v * &c;
                comps[0][0] = v;
                comps[2][2] = rr;
            }
        }
        if self.perturbation != 0.0 {
            let l = self.scale;
            let bump = (self.perturbation * l * l) * &s2 * r.powi(-2);
            comps[0][0] += &bump;
        }
        TensorValue::symmetric2(self.chart_id(), |a, b| comps[a.min(b)][a.max(b)].clone())
    }

    /// Contravariant Killing vector `ξ^a` (constant in the chart).
    pub fn killing(&self) -> [f64; DIM] {
        [self.killing_scale, 0.0, 0.0, 0.0]
    }

    /// Curvature bundle at `point` with jet order `order`.
    pub fn curvature(&self, point: [f64; DIM], order: usize) -> Result<CurvatureBundle> {
        curvature(&|x| self.metric(x), point, order, self.orientation).map_err(|e| e.at(point))
    }

    /// `λ = g_ab ξ^a ξ^b` at a chart point.
    pub fn lambda(&self, point: [f64; DIM]) -> f64 {
        let x: [Jet; DIM] = std::array::from_fn(|mu| Jet::constant(0, point[mu]));
        let g = self.metric(&x);
        self.killing_scale * self.killing_scale * g.comps[0].value()
    }

    pub fn is_clean(&self) -> bool {
        self.perturbation == 0.0
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("parameter {name} must be positive, got {v}")))
    }
}

/// Degree-0 Killing two-form data at a point, from first metric derivatives only.
#[derive(Debug, Clone)]
pub struct KillingFrame {
    pub g: [f64; 16],
    pub g_inv: [f64; 16],
    pub sqrt_det: f64,
    /// `F_ab = ∇_a ξ_b`.
    pub f: [f64; 16],
    pub xi_lower: [f64; 4],
    pub lambda: f64,
    pub orientation: f64,
}

impl KillingFrame {
    pub fn at(model: &MetricModel, point: [f64; DIM]) -> Result<Self> {
        let x = crate::jet::jet_lift(point, 1)?;
        let gj = model.metric(&x);
        let inv = invert4(&gj.comps, DET_TOL).ok_or(Error::DegenerateMetric { det: 0.0 })?;
        let xi = model.killing();
        let g: [f64; 16] = std::array::from_fn(|k| gj.comps[k].value());
        let g_inv: [f64; 16] = std::array::from_fn(|k| inv.inverse[k].value());
        let xi_lower: [f64; 4] = std::array::from_fn(|a| (0..4).map(|b| g[i2(a, b)] * xi[b]).sum());
        let dxi = |a: usize, b: usize| -> f64 { (0..4).map(|c| gj.comps[i2(b, c)].gradient_value(a) * xi[c]).sum() };
        let f: [f64; 16] = std::array::from_fn(|k| 0.5 * (dxi(k / 4, k % 4) - dxi(k % 4, k / 4)));
        let lambda = (0..4).map(|a| xi_lower[a] * xi[a]).sum();
        Ok(KillingFrame {
            g,
            g_inv,
            sqrt_det: inv.det.value().sqrt(),
            f,
            xi_lower,
            lambda,
            orientation: model.orientation,
        })
    }

    pub fn raise2(&self, t: &[f64; 16]) -> [f64; 16] {
        let gi = &self.g_inv;
        std::array::from_fn(|k| {
            let (a, b) = (k / 4, k % 4);
            let mut s = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    s += gi[i2(a, c)] * gi[i2(b, d)] * t[i2(c, d)];
                }
            }
            s
        })
    }

    /// `μ = ½ F_ab F^ab`.
    pub fn mu(&self) -> f64 {
        let up = self.raise2(&self.f);
        0.5 * self.f.iter().zip(&up).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `ν = ¼ ε^abcd F_ab F_cd`.
    pub fn nu(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let e = levi_civita(a, b, c, d);
                        if e != 0.0 {
                            s += e * self.f[i2(a, b)] * self.f[i2(c, d)];
                        }
                    }
                }
            }
        }
        0.25 * self.orientation * s / self.sqrt_det
    }

    /// Twist one-form `ω_a = ε_abcd ξ^b F^cd`.
    pub fn twist(&self, xi: [f64; 4]) -> [f64; 4] {
        let up = self.raise2(&self.f);
        std::array::from_fn(|a| {
            let mut s = 0.0;
            for b in 0..4 {
                if xi[b] == 0.0 {
                    continue;
                }
                for c in 0..4 {
                    for d in 0..4 {
                        let e = levi_civita(a, b, c, d);
                        if e != 0.0 {
                            s += e * xi[b] * up[i2(c, d)];
                        }
                    }
                }
            }
            self.orientation * self.sqrt_det * s
        })
    }
}

/// Outcome of the self-validation gate.
#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub metric: String,
    pub points: usize,
    pub max_ricci: f64,
    pub max_killing: f64,
    pub radial_lambda: Vec<(f64, f64)>,
}

/// Ricci and Killing residuals at one point, each relative to the size of
/// the terms it is built from.
pub fn gate_residuals(model: &MetricModel, point: [f64; DIM]) -> Result<(f64, f64)> {
    let b = model.curvature(point, 3)?;
    let gamma_sq = b.christoffel.comps.iter().fold(0.0f64, |m, c| m.max(c.value().abs())).powi(2);
    let riem_scale = crate::curvature::norm_inf(&b.riemann).max(gamma_sq);
    let ric = crate::curvature::norm_inf(&b.ricci);
    let ricci_rel = if riem_scale == 0.0 { ric } else { ric / riem_scale };
    let xi = model.killing();
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for a in 0..DIM {
        for bb in 0..DIM {
            let mut sym = 0.0;
            let mut terms = 0.0f64;
            for c in 0..DIM {
                let da = b.g.comps[i2(bb, c)].gradient_value(a) * xi[c];
                let db = b.g.comps[i2(a, c)].gradient_value(bb) * xi[c];
                let mut gam = 0.0;
                for e in 0..DIM {
                    gam += b.christoffel.comps[crate::tensor::i3(e, a, bb)].value() * b.g.comps[i2(e, c)].value() * xi[c];
                }
                sym += 0.5 * (da + db) - gam;
                terms = terms.max(da.abs()).max(db.abs()).max(gam.abs());
            }
            defect = defect.max(sym.abs());
            scale = scale.max(terms);
        }
    }
    let killing_rel = if scale == 0.0 { defect } else { defect / scale };
    Ok((ricci_rel, killing_rel))
}

/// Runs the self-validation gate: Ricci-flatness and the Killing equation
/// at `points` sampled points, and λ < 1 increasing along a radial ray.
pub fn validate(model: &MetricModel, points: usize, seed: u64) -> Result<GateReport> {
    let pts = sample_points(model, points, seed, 0.05)?;
    let mut max_ricci = 0.0f64;
    let mut max_killing = 0.0f64;
    for p in &pts {
        let (r, k) = gate_residuals(model, *p)?;
        max_ricci = max_ricci.max(r);
        max_killing = max_killing.max(k);
    }
    let fail = |check: &str, residual: f64| Error::Catalogue { metric: model.name.clone(), check: check.into(), residual };
    if max_ricci > GATE_TOL {
        return Err(fail("Ricci", max_ricci));
    }
    if max_killing > GATE_TOL {
        return Err(fail("Killing", max_killing));
    }
    let mut radial = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for f in [10.0, 1e2, 1e3, 1e4] {
        let r = f * model.scale;
        let lam = model.lambda([0.0, r, PI / 3.0, 0.0]);
        radial.push((r, lam));
        let flat = matches!(model.kind, MetricKind::Flat { .. });
        if lam > 1.0 + 1e-15 || (!flat && (lam >= 1.0 || lam <= prev)) {
            return Err(fail("radial λ monotonicity", lam));
        }
        prev = lam;
    }
    Ok(GateReport { metric: model.name.clone(), points, max_ricci, max_killing, radial_lambda: radial })
}

/// The default catalogue, each model having passed its validation gate.
pub fn catalogue() -> Result<Vec<MetricModel>> {
    let models = vec![
        MetricModel::flat(2.0 * PI)?,
        MetricModel::schwarzschild(1.0)?,
        MetricModel::kerr(1.0, 0.3)?,
        MetricModel::taub_nut(1.0)?,
        MetricModel::taub_bolt(1.0)?,
    ];
    for m in &models {
        validate(m, 24, 0x5eed)?;
    }
    Ok(models)
}

/// Smallest radius on the equator where `λ ≥ λ_min`, by bisection.
fn equatorial_radius(model: &MetricModel, lambda_min: f64) -> Option<f64> {
    let lam = |r: f64| model.lambda([0.0, r, PI / 2.0, 0.0]);
    let d = model.domain;
    let mut lo = d.r_inner + d.margin;
    let mut hi = d.r_outer;
    if lam(hi) < lambda_min {
        return None;
    }
    if lam(lo) >= lambda_min {
        return Some(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lam(mid) >= lambda_min {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Deterministic, radially stratified sample points with `λ ≥ λ_min`.
pub fn sample_points(model: &MetricModel, count: usize, seed: u64, lambda_min: f64) -> Result<Vec<[f64; DIM]>> {
    if !(lambda_min > 0.0 && lambda_min < 1.0) {
        return Err(Error::Sampling(format!("λ_min must lie in (0, 1), got {lambda_min}")));
    }
    if count == 0 {
        return Ok(vec![]);
    }
    let d = model.domain;
    let r_lo = equatorial_radius(model, lambda_min)
        .ok_or_else(|| Error::Sampling(format!("no point of {} has λ ≥ {lambda_min}", model.name)))?;
    let r_hi = d.r_outer;
    if r_lo >= r_hi {
        return Err(Error::Sampling(format!("empty radial range for {}", model.name)));
    }
    let (c_hi, c_lo) = (d.margin.cos(), (PI - d.margin).cos());
    let ratio = r_hi / r_lo;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut found = None;
        for _ in 0..1000 {
            let u = (i as f64 + rng.gen::<f64>()) / count as f64;
            let r = r_lo * ratio.powf(u);
            let theta = (c_lo + (c_hi - c_lo) * rng.gen::<f64>()).acos();
            let tau = d.tau_period * rng.gen::<f64>();
            let phi = 2.0 * PI * rng.gen::<f64>();
            let p = [tau, r, theta, phi];
            if model.lambda(p) >= lambda_min {
                found = Some(p);
                break;
            }
        }
        out.push(found.ok_or_else(|| Error::Sampling(format!("stratum {i} of {} has no point with λ ≥ {lambda_min}", model.name)))?);
    }
    Ok(out)
}

/// Extracted surface gravities of a fixed-point component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceGravity {
    /// Signed `(κ¹, κ²)` with `|κ¹| ≥ |κ²|`, `κ¹ > 0`.
    Nut { kappa: [f64; 2] },
    Bolt { kappa: f64, nu_limit: f64 },
}

/// Chart point at distance parameter `s` along the approach ray to `locus`.
pub fn approach_point(locus: &FixedPointLocus, s: f64) -> [f64; DIM] {
    match locus {
        FixedPointLocus::Bolt { r, .. } => [0.0, r + s * s, PI / 3.0, 0.0],
        FixedPointLocus::Nut { r, theta, .. } => {
            if *theta == 0.0 || *theta == PI {
                let u = s * std::f64::consts::FRAC_1_SQRT_2;
                let th = if *theta == 0.0 { u } else { PI - u };
                [0.0, r + u * u, th, 0.0]
            } else {
                [0.0, r + s * s, *theta, 0.0]
            }
        }
    }
}

/// Neville extrapolation to `h = 0` of samples `(h_i, y_i)`; returns the
/// estimate and the difference to the estimate without the last sample.
pub fn neville_at_zero(h: &[f64], y: &[f64]) -> (f64, f64) {
    let n = h.len();
    let mut p = y.to_vec();
    let mut prev_top = p[0];
    let mut estimates = vec![y[0]];
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
        }
        prev_top = estimates[estimates.len() - 1];
        estimates.push(p[0]);
    }
    let best = p[0];
    (best, (best - prev_top).abs())
}

/// Limits of `μ` and `ν` at a fixed point by Neville extrapolation along
/// its approach ray, with the residual trace of the extrapolation.
pub fn invariant_limits(model: &MetricModel, locus: &FixedPointLocus) -> Result<(f64, f64, Vec<f64>)> {
    let s0 = 0.2 * model.scale.sqrt();
    let ss: Vec<f64> = (0..6).map(|k| s0 * (1.0 - 0.14 * k as f64)).collect();
    let mut hs = Vec::new();
    let mut mus = Vec::new();
    let mut nus = Vec::new();
    for &s in &ss {
        let kf = KillingFrame::at(model, approach_point(locus, s))?;
        hs.push(s * s);
        mus.push(kf.mu());
        nus.push(kf.nu());
    }
    let (mu, dmu) = neville_at_zero(&hs, &mus);
    let (nu, dnu) = neville_at_zero(&hs, &nus);
    let trace = vec![mu, dmu, nu, dnu];
    if dmu > 1e-7 * mu.abs() || dnu > 1e-7 * mu.abs() {
        return Err(Error::Extraction { locus: locus.label().to_string(), trace });
    }
    Ok((mu, nu, trace))
}

/// Surface gravities at a declared fixed-point component, extracted from
/// the limits `μ → κ₁² + κ₂²`, `ν → 2κ₁κ₂`, and cross-checked against the
/// declared metadata within 1e−6 relative.
pub fn surface_gravities(model: &MetricModel, locus: &FixedPointLocus) -> Result<SurfaceGravity> {
    if !model.metadata.fixed_points.contains(locus) {
        return Err(Error::ContractViolation(format!(
            "{} is not a declared fixed point of {}",
            locus.label(),
            model.name
        )));
    }
    let (mu, nu, trace) = invariant_limits(model, locus)?;
    let sp = (mu + nu).max(0.0).sqrt();
    let sm = (mu - nu).max(0.0).sqrt();
    let k1 = 0.5 * (sp + sm);
    let k2 = 0.5 * (sp - sm);
    let mismatch = |got: f64, want: f64| (got - want).abs() > 1e-6 * want.abs().max(1e-300);
    match locus {
        FixedPointLocus::Bolt { kappa, .. } => {
            let k = mu.sqrt();
            if mismatch(k, *kappa) || nu.abs() > 1e-8 * mu {
                return Err(Error::Extraction { locus: locus.label().into(), trace });
            }
            Ok(SurfaceGravity::Bolt { kappa: k, nu_limit: nu })
        }
        FixedPointLocus::Nut { kappa, .. } => {
            let off = |got: f64, want: f64| (got - want).abs() > 1e-6 * mu;
            if off(mu, kappa[0] * kappa[0] + kappa[1] * kappa[1]) || off(nu, 2.0 * kappa[0] * kappa[1]) {
                return Err(Error::Extraction { locus: locus.label().into(), trace: vec![mu, nu, k1, k2] });
            }
            Ok(SurfaceGravity::Nut { kappa: [k1, k2] })
        }
    }
}

/// Parses `key=value` lines (blank lines and `#` comments ignored).
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {line:?}", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_parameter_is_rejected() {
        let mut p = BTreeMap::new();
        p.insert("q".to_string(), 1.0);
        assert!(MetricModel::from_name("schwarzschild", &p).is_err());
        assert!(MetricModel::from_name("atiyah-hitchin", &BTreeMap::new()).is_err());
    }

    #[test]
    fn zero_count_gives_empty_sample() {
        let m = MetricModel::schwarzschild(1.0).unwrap();
        assert!(sample_points(&m, 0, 7, 0.1).unwrap().is_empty());
    }

    #[test]
    fn neville_recovers_polynomial() {
        let h = [0.4, 0.3, 0.2, 0.1];
        let y: Vec<f64> = h.iter().map(|x| 2.0 + 3.0 * x - x * x).collect();
        let (v, _) = neville_at_zero(&h, &y);
        assert!((v - 2.0).abs() < 1e-13);
    }
}
