//! Charges and boundary fluxes over level surfaces of `λ`, the flux at
//! infinity, and the global balance ledger.
//!
//! Every catalogued metric is invariant under both `∂τ` and `∂φ`, so a
//! surface is a curve in the `(r, θ)` half-plane times the `(τ, φ)` torus.
//! Fluxes are Gauss–Legendre sums along the curve times the torus area.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::concomitants::{concomitants_at, ernst_calibrate, gauss_legendre, ErnstCalibration};
use crate::jet::DIM;
use crate::metrics::{
    neville_at_zero, surface_gravities, FixedPointLocus, KillingFrame, MetricModel, PetrovType, SurfaceGravity,
};
use crate::tensor::i2;
use crate::{Error, Result, Side};

/// Jet order used when evaluating `Ψ±` on a surface.
const SURFACE_ORDER: usize = 3;
/// Jet order used for the bulk divergence estimate.
const BULK_ORDER: usize = 4;
/// Gauss–Legendre nodes along a surface profile.
pub const DEFAULT_NODES: usize = 48;
/// Relative tolerance of the closed-form balance.
pub const BALANCE_TOL: f64 = 1e-5;
/// Relative tolerance of an extrapolated charge against its closed form.
pub const CHARGE_REL_TOL: f64 = 1e-4;
/// Absolute tolerance of a charge whose closed form vanishes.
pub const CHARGE_ABS_TOL: f64 = 1e-6;
/// Exponent used for `Ψ±` in the boundary terms.
pub const PSI_BETA: f64 = 1.0;

/// One quadrature node on the profile curve `s ↦ (r(s), θ(s))`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeshNode {
    pub r: f64,
    pub theta: f64,
    pub dr: f64,
    pub dtheta: f64,
    pub weight: f64,
}

impl MeshNode {
    pub fn point(&self) -> [f64; DIM] {
        [0.0, self.r, self.theta, 0.0]
    }
}

/// Quadrature mesh on `{λ = ε}` around a fixed point, or on `{r = R}`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSurfaceMesh {
    /// `ε` for a level surface, `R` for a sphere at large radius.
    pub level: f64,
    pub at_infinity: bool,
    pub nodes: Vec<MeshNode>,
    /// Sign turning the raw coordinate flux into the flux along the chosen
    /// normal (toward the fixed point, or outward at infinity).
    pub orientation: f64,
    /// Area of the `(τ, φ)` torus in coordinates.
    pub fiber: f64,
}

fn lambda_at(model: &MetricModel, r: f64, theta: f64) -> f64 {
    model.lambda([0.0, r, theta, 0.0])
}

/// Smallest `t ∈ (0, ∞)` with `f(t) = level`, for `f` increasing from below
/// `level` at 0.
fn solve_increasing(f: impl Fn(f64) -> f64, level: f64, start: f64) -> Option<f64> {
    let mut lo = 0.0;
    let mut hi = start;
    let mut grow = 0;
    while !(f(hi) >= level) {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Nuts on the axis need a polar profile; every other locus of the
/// catalogue has `λ = λ(r)` nearby and a constant-`r` profile.
fn on_axis(locus: &FixedPointLocus) -> bool {
    matches!(locus, FixedPointLocus::Nut { theta, .. } if *theta == 0.0 || *theta == PI)
}

fn locus_radius(locus: &FixedPointLocus) -> f64 {
    match locus {
        FixedPointLocus::Bolt { r, .. } | FixedPointLocus::Nut { r, .. } => *r,
    }
}

impl LevelSurfaceMesh {
    /// Mesh of the component of `{λ = ε}` enclosing `locus`.
    pub fn around(model: &MetricModel, locus: &FixedPointLocus, eps: f64, n: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Meshing(format!("level ε = {eps} outside (0, 1)")));
        }
        let nodes = if on_axis(locus) { polar_profile(model, locus, eps, n)? } else { radial_profile(model, locus, eps, n)? };
        let mut mesh = LevelSurfaceMesh { level: eps, at_infinity: false, nodes, orientation: 1.0, fiber: fiber_area(model) };
        // Orient toward decreasing λ.
        let raw = mesh.raw_flux(model, |kf, _| Ok(grad_lambda(model, kf)))?;
        if raw == 0.0 || !raw.is_finite() {
            return Err(Error::Meshing(format!("degenerate normal on {{λ = {eps}}} at {}", locus.label())));
        }
        mesh.orientation = -raw.signum();
        Ok(mesh)
    }

    /// Mesh of the coordinate sphere `{r = R}`, oriented outward.
    pub fn sphere(model: &MetricModel, radius: f64, n: usize) -> Result<Self> {
        if radius <= model.domain.r_inner + model.domain.margin {
            return Err(Error::Meshing(format!("radius {radius} inside the chart boundary")));
        }
        let nodes = gauss_legendre(n)
            .into_iter()
            .map(|(x, w)| MeshNode { r: radius, theta: 0.5 * PI * (x + 1.0), dr: 0.0, dtheta: 1.0, weight: 0.5 * PI * w })
            .collect();
        Ok(LevelSurfaceMesh { level: radius, at_infinity: true, nodes, orientation: 1.0, fiber: fiber_area(model) })
    }

    /// Coordinate-free flux `∫ V^a n_a dμ` of the vector field returned by
    /// `field`, before orientation.
    fn raw_flux<F>(&self, model: &MetricModel, field: F) -> Result<f64>
    where
        F: Fn(&KillingFrame, usize) -> Result<[f64; DIM]> + Sync,
    {
        let parts: Result<Vec<f64>> = self
            .nodes
            .par_iter()
            .enumerate()
            .map(|(i, node)| {
                let p = node.point();
                let kf = KillingFrame::at(model, p).map_err(|e| e.at(p))?;
                let v = field(&kf, i).map_err(|e| e.at(p))?;
                Ok(node.weight * kf.sqrt_det * (v[1] * node.dtheta - v[2] * node.dr))
            })
            .collect();
        Ok(self.fiber * parts?.iter().sum::<f64>())
    }

    /// Oriented flux of the covector field returned by `field`.
    pub fn flux_of_covector<F>(&self, model: &MetricModel, field: F) -> Result<f64>
    where
        F: Fn(&KillingFrame, usize) -> Result<[f64; DIM]> + Sync,
    {
        let raw = self.raw_flux(model, |kf, i| {
            let x = field(kf, i)?;
            Ok(std::array::from_fn(|a| (0..DIM).map(|b| kf.g_inv[i2(a, b)] * x[b]).sum()))
        })?;
        Ok(self.orientation * raw)
    }

    /// Riemannian area of the surface.
    pub fn area(&self, model: &MetricModel) -> Result<f64> {
        let mut total = 0.0;
        for node in &self.nodes {
            let kf = KillingFrame::at(model, node.point())?;
            let g = |a: usize, b: usize| kf.g[i2(a, b)];
            let t = [1.0, 0.0, 0.0, 0.0];
            let s = [0.0, node.dr, node.dtheta, 0.0];
            let f = [0.0, 0.0, 0.0, 1.0];
            let basis = [t, s, f];
            let h: [[f64; 3]; 3] = std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let mut acc = 0.0;
                    for a in 0..DIM {
                        for b in 0..DIM {
                            acc += basis[i][a] * g(a, b) * basis[j][b];
                        }
                    }
                    acc
                })
            });
            let det = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
                + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
            total += node.weight * det.max(0.0).sqrt();
        }
        Ok(self.fiber * total)
    }
}

fn fiber_area(model: &MetricModel) -> f64 {
    model.domain.tau_period * 2.0 * PI
}

/// Contravariant components of `∇λ = 2 F_ab ξ^b`.
fn grad_lambda(model: &MetricModel, kf: &KillingFrame) -> [f64; DIM] {
    let xi = model.killing();
    let d: [f64; DIM] = std::array::from_fn(|a| 2.0 * (0..DIM).map(|b| kf.f[i2(a, b)] * xi[b]).sum::<f64>());
    std::array::from_fn(|a| (0..DIM).map(|b| kf.g_inv[i2(a, b)] * d[b]).sum())
}

fn radial_profile(model: &MetricModel, locus: &FixedPointLocus, eps: f64, n: usize) -> Result<Vec<MeshNode>> {
    let r0 = locus_radius(locus);
    let probe = |th: f64| solve_increasing(|t| lambda_at(model, r0 + t, th), eps, 0.01 * model.scale);
    let dr = probe(PI / 2.0).ok_or_else(|| Error::Meshing(format!("no level {eps} near {}", locus.label())))?;
    for th in [0.3, 2.0] {
        let lam = lambda_at(model, r0 + dr, th);
        if (lam - eps).abs() > 1e-10 * eps.max(1e-3) {
            return Err(Error::Meshing(format!(
                "level set {{λ = {eps}}} near {} is not a coordinate sphere (λ = {lam} at θ = {th})",
                locus.label()
            )));
        }
    }
    Ok(gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| MeshNode { r: r0 + dr, theta: 0.5 * PI * (x + 1.0), dr: 0.0, dtheta: 1.0, weight: 0.5 * PI * w })
        .collect())
}

/// Profile around a nut on the axis: rays in the `(x, y) = (a·√(r − r₀),
/// angle from the axis)` quarter plane, with `a` making the coordinates
/// locally isotropic. `ψ = 0` runs along the axis, `ψ = π/2` along `r = r₀`.
fn polar_profile(model: &MetricModel, locus: &FixedPointLocus, eps: f64, n: usize) -> Result<Vec<MeshNode>> {
    let FixedPointLocus::Nut { r: r0, theta: th0, .. } = *locus else {
        return Err(Error::Meshing("polar profile needs a nut".into()));
    };
    let north = th0 == 0.0;
    let tsign = if north { 1.0 } else { -1.0 };
    let u_probe = 1e-4 * model.scale.sqrt();
    let kf = KillingFrame::at(model, [0.0, r0 + u_probe * u_probe, PI / 4.0, 0.0])?;
    let a = (kf.g[i2(1, 1)] * 4.0 * u_probe * u_probe / kf.g[i2(2, 2)]).sqrt();
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::Meshing(format!("no isotropic scaling at {}", locus.label())));
    }
    let coords = |rho: f64, psi: f64| {
        let u = rho * psi.cos() / a;
        let y = rho * psi.sin();
        (r0 + u * u, th0 + tsign * y, u)
    };
    let mut nodes = Vec::with_capacity(n);
    for (x, w) in gauss_legendre(n) {
        let psi = 0.25 * PI * (x + 1.0);
        let lam_ray = |rho: f64| {
            let (r, th, _) = coords(rho, psi);
            lambda_at(model, r, th)
        };
        let rho = solve_increasing(lam_ray, eps, 1e-3)
            .filter(|&rho| rho * psi.sin() < 0.5 * PI)
            .ok_or_else(|| Error::Meshing(format!("ray ψ = {psi} misses {{λ = {eps}}} near {}", locus.label())))?;
        let (r, th, u) = coords(rho, psi);
        let kf = KillingFrame::at(model, [0.0, r, th, 0.0])?;
        let xi = model.killing();
        let dl: [f64; DIM] = std::array::from_fn(|k| 2.0 * (0..DIM).map(|b| kf.f[i2(k, b)] * xi[b]).sum::<f64>());
        let r_rho = 2.0 * u * psi.cos() / a;
        let r_psi = -2.0 * u * rho * psi.sin() / a;
        let t_rho = tsign * psi.sin();
        let t_psi = tsign * rho * psi.cos();
        let l_rho = dl[1] * r_rho + dl[2] * t_rho;
        let l_psi = dl[1] * r_psi + dl[2] * t_psi;
        if l_rho.abs() < 1e-300 {
            return Err(Error::Meshing(format!("level set tangent to ray ψ = {psi} near {}", locus.label())));
        }
        let rho_p = -l_psi / l_rho;
        nodes.push(MeshNode {
            r,
            theta: th,
            dr: r_rho * rho_p + r_psi,
            dtheta: t_rho * rho_p + t_psi,
            weight: 0.25 * PI * w,
        });
    }
    Ok(nodes)
}

/// Default level sequence around a fixed point: `ε₀, ε₀/2, ε₀/4` with
/// `ε₀ = 0.1`, shrunk on axis nuts so the level set separates from the
/// other fixed points.
pub fn default_levels(model: &MetricModel, locus: &FixedPointLocus) -> Vec<f64> {
    let mut e0: f64 = 0.1;
    if on_axis(locus) {
        let r0 = locus_radius(locus);
        e0 = e0.min(0.25 * lambda_at(model, r0, PI / 2.0));
    }
    vec![e0, 0.5 * e0, 0.25 * e0]
}

/// Default radii for the flux at infinity.
pub fn default_radii(model: &MetricModel) -> Vec<f64> {
    [1e2, 1e3, 1e4].iter().map(|r| r * model.scale).collect()
}

/// Values on a sequence of surfaces and their extrapolation.
#[derive(Debug, Clone, Serialize)]
pub struct Extrapolated {
    /// `ε` (or `R`) per surface.
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
    pub estimate: f64,
    pub error: f64,
}

fn extrapolate(levels: &[f64], values: Vec<f64>, h: impl Fn(f64) -> f64) -> Extrapolated {
    let hs: Vec<f64> = levels.iter().map(|&l| h(l)).collect();
    let (estimate, error) = if values.len() > 1 { neville_at_zero(&hs, &values) } else { (values[0], f64::NAN) };
    Extrapolated { levels: levels.to_vec(), values, estimate, error }
}

/// `N(K) = (1/8π) ∫ J_T · n`, with `J_T = −λ⁻² ω` and `n` toward `K`.
pub fn charge_on(model: &MetricModel, mesh: &LevelSurfaceMesh) -> Result<f64> {
    let xi = model.killing();
    let flux = mesh.flux_of_covector(model, |kf, _| {
        let om = kf.twist(xi);
        let l2 = kf.lambda * kf.lambda;
        Ok(std::array::from_fn(|a| -om[a] / l2))
    })?;
    Ok(flux / (8.0 * PI))
}

/// Flux of `Ψ±` (β = 1) through a mesh, both sides at once. A side whose
/// Mars–Simon objects are withheld at some node yields `None`.
pub fn psi_flux_on(model: &MetricModel, mesh: &LevelSurfaceMesh, cal: &ErnstCalibration) -> Result<[Option<f64>; 2]> {
    let per_node: Result<Vec<[Option<[f64; DIM]>; 2]>> = mesh
        .nodes
        .par_iter()
        .map(|node| {
            let p = node.point();
            let c = concomitants_at(model, p, SURFACE_ORDER, cal)?;
            Ok(Side::BOTH.map(|s| c.psi(s, PSI_BETA).map(|psi| std::array::from_fn(|a| psi[a].value()))))
        })
        .collect();
    let per_node = per_node?;
    let mut out = [None, None];
    for side in Side::BOTH {
        let k = side.index();
        if per_node.iter().any(|v| v[k].is_none()) {
            continue;
        }
        let lookup: Vec<[f64; DIM]> = per_node.iter().map(|v| v[k].unwrap()).collect();
        out[k] = Some(mesh.flux_of_covector(model, |_, i| Ok(lookup[i]))?);
    }
    Ok(out)
}

/// Closed-form targets at a fixed point from its surface gravities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FixedPointTargets {
    pub charge: f64,
    /// Boundary term of `Ψ±`, indexed by [`Side::index`].
    pub boundary: [f64; 2],
}

pub fn fixed_point_targets(locus: &FixedPointLocus, gravity: &SurfaceGravity) -> FixedPointTargets {
    match (locus, gravity) {
        (FixedPointLocus::Bolt { euler_char, self_intersection, .. }, SurfaceGravity::Bolt { kappa, .. }) => {
            let b = 4.0 * PI * PI * *euler_char as f64 / kappa.abs();
            FixedPointTargets { charge: -PI * *self_intersection as f64 / (2.0 * kappa * kappa), boundary: [b, b] }
        }
        (FixedPointLocus::Nut { .. }, SurfaceGravity::Nut { kappa }) => {
            let prod = kappa[0] * kappa[1];
            FixedPointTargets {
                charge: PI / (2.0 * prod),
                boundary: [
                    4.0 * PI * PI * (kappa[0] + kappa[1]).abs() / prod,
                    -4.0 * PI * PI * (kappa[0] - kappa[1]).abs() / prod,
                ],
            }
        }
        _ => unreachable!("surface gravity kind always matches the locus kind"),
    }
}

/// Charge and `Ψ±` boundary terms of one fixed point over a level sequence.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointFlux {
    pub label: String,
    pub kind: &'static str,
    pub gravity: SurfaceGravity,
    pub targets: FixedPointTargets,
    pub charge: Extrapolated,
    /// Per side; `None` on a side with withheld Mars–Simon objects.
    pub boundary: [Option<Extrapolated>; 2],
    pub areas: Vec<f64>,
}

pub fn fixed_point_flux(
    model: &MetricModel,
    locus: &FixedPointLocus,
    levels: &[f64],
    cal: &ErnstCalibration,
    n: usize,
) -> Result<FixedPointFlux> {
    if levels.is_empty() {
        return Err(Error::Meshing("empty level sequence".into()));
    }
    let gravity = surface_gravities(model, locus)?;
    let targets = fixed_point_targets(locus, &gravity);
    let mut charges = Vec::new();
    let mut psi: [Vec<Option<f64>>; 2] = [Vec::new(), Vec::new()];
    let mut areas = Vec::new();
    for &eps in levels {
        let mesh = LevelSurfaceMesh::around(model, locus, eps, n)?;
        charges.push(charge_on(model, &mesh)?);
        let p = psi_flux_on(model, &mesh, cal)?;
        psi[0].push(p[0]);
        psi[1].push(p[1]);
        areas.push(mesh.area(model)?);
    }
    let boundary = [0, 1].map(|k| {
        let vals: Option<Vec<f64>> = psi[k].iter().copied().collect();
        vals.map(|v| extrapolate(levels, v, f64::sqrt))
    });
    Ok(FixedPointFlux {
        label: locus.label().to_string(),
        kind: match locus {
            FixedPointLocus::Bolt { .. } => "bolt",
            FixedPointLocus::Nut { .. } => "nut",
        },
        gravity,
        targets,
        charge: extrapolate(levels, charges, f64::sqrt),
        boundary,
        areas,
    })
}

/// Charge of a fixed point, extrapolated over `levels`.
pub fn charge(model: &MetricModel, locus: &FixedPointLocus, levels: &[f64]) -> Result<Extrapolated> {
    let mut vals = Vec::new();
    for &eps in levels {
        let mesh = LevelSurfaceMesh::around(model, locus, eps, DEFAULT_NODES)?;
        vals.push(charge_on(model, &mesh)?);
    }
    Ok(extrapolate(levels, vals, f64::sqrt))
}

/// Boundary term of `Ψ±` at a fixed point, extrapolated over `levels`.
pub fn fixed_point_boundary_term(
    model: &MetricModel,
    locus: &FixedPointLocus,
    side: Side,
    levels: &[f64],
    cal: &ErnstCalibration,
) -> Result<Extrapolated> {
    let mut vals = Vec::new();
    for &eps in levels {
        let mesh = LevelSurfaceMesh::around(model, locus, eps, DEFAULT_NODES)?;
        let v = psi_flux_on(model, &mesh, cal)?[side.index()].ok_or_else(|| {
            Error::ContractViolation(format!("side {} of {} has withheld Mars–Simon fields", side.symbol(), model.name))
        })?;
        vals.push(v);
    }
    Ok(extrapolate(levels, vals, f64::sqrt))
}

/// Flux of `Ψ±` through `{r = R}` for increasing `R`, extrapolated in `1/R`.
pub fn infinity_term(model: &MetricModel, side: Side, radii: &[f64], cal: &ErnstCalibration) -> Result<Extrapolated> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("radii must be a non-empty increasing sequence".into()));
    }
    let mut vals = Vec::new();
    for &r in radii {
        let mesh = LevelSurfaceMesh::sphere(model, r, DEFAULT_NODES)?;
        let v = psi_flux_on(model, &mesh, cal)?[side.index()].ok_or_else(|| {
            Error::ContractViolation(format!("side {} of {} has withheld Mars–Simon fields", side.symbol(), model.name))
        })?;
        vals.push(v);
    }
    Ok(extrapolate(radii, vals, f64::recip))
}

/// `r² |Ψ±_a + r⁻² ∂_a r|` at `θ = π/3` for each radius.
pub fn psi_expansion_residuals(model: &MetricModel, side: Side, radii: &[f64], cal: &ErnstCalibration) -> Result<Vec<f64>> {
    radii
        .iter()
        .map(|&r| {
            let p = [0.0, r, PI / 3.0, 0.0];
            let c = concomitants_at(model, p, SURFACE_ORDER, cal)?;
            let psi = c.psi(side, PSI_BETA).ok_or_else(|| Error::ContractViolation("withheld Mars–Simon fields".into()))?;
            let mut d: [f64; DIM] = std::array::from_fn(|a| psi[a].value());
            d[1] += 1.0 / (r * r);
            let gi = &c.bundle.g_inv;
            let mut n2 = 0.0;
            for a in 0..DIM {
                for b in 0..DIM {
                    n2 += gi.comps[i2(a, b)].value() * d[a] * d[b];
                }
            }
            Ok(r * r * n2.sqrt())
        })
        .collect()
}

/// Approach of `F± = ((F±)²)^{1/2}` to its fixed-point value.
#[derive(Debug, Clone, Serialize)]
pub struct LimitCheck {
    pub label: String,
    pub side: Side,
    pub target: f64,
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log |F± − target|` against `log ε`.
    pub slope: f64,
}

/// Pointwise rewrite residual `Ψ± − (±(F±/2) J_T + ∇F±/(2λ))` along the
/// level sequence, with the norms of the two leading terms.
#[derive(Debug, Clone, Serialize)]
pub struct RewriteCheck {
    pub label: String,
    pub side: Side,
    pub levels: Vec<f64>,
    pub remainder: Vec<f64>,
    pub current_term: Vec<f64>,
    pub gradient_term: Vec<f64>,
}

fn probe_point(mesh: &LevelSurfaceMesh) -> [f64; DIM] {
    mesh.nodes[mesh.nodes.len() / 3].point()
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

pub fn fixed_point_limits(
    model: &MetricModel,
    locus: &FixedPointLocus,
    side: Side,
    levels: &[f64],
    cal: &ErnstCalibration,
) -> Result<(LimitCheck, RewriteCheck)> {
    let gravity = surface_gravities(model, locus)?;
    let target = match gravity {
        SurfaceGravity::Bolt { kappa, .. } => 2.0 * kappa.abs(),
        SurfaceGravity::Nut { kappa } => 2.0 * (kappa[0] + side.sign() * kappa[1]).abs(),
    };
    let s = side.sign();
    let mut values = Vec::new();
    let mut remainder = Vec::new();
    let mut current_term = Vec::new();
    let mut gradient_term = Vec::new();
    for &eps in levels {
        let mesh = LevelSurfaceMesh::around(model, locus, eps, DEFAULT_NODES)?;
        let p = probe_point(&mesh);
        let c = concomitants_at(model, p, SURFACE_ORDER, cal)?;
        let sf = c.side(side);
        let f = sf.f2.sqrt();
        values.push(f.value());
        let psi = c.psi(side, PSI_BETA).ok_or_else(|| Error::ContractViolation("withheld Mars–Simon fields".into()))?;
        let lam = c.lambda.value();
        let gi = &c.bundle.g_inv;
        let norm = |v: &[f64; DIM]| {
            let mut n2 = 0.0;
            for a in 0..DIM {
                for b in 0..DIM {
                    n2 += gi.comps[i2(a, b)].value() * v[a] * v[b];
                }
            }
            n2.sqrt()
        };
        let cur: [f64; DIM] = std::array::from_fn(|a| s * 0.5 * f.value() * c.j_t[a].value());
        let grad: [f64; DIM] = std::array::from_fn(|a| f.d(a).value() / (2.0 * lam));
        let rest: [f64; DIM] = std::array::from_fn(|a| psi[a].value() - cur[a] - grad[a]);
        remainder.push(norm(&rest));
        current_term.push(norm(&cur));
        gradient_term.push(norm(&grad));
    }
    let xs: Vec<f64> = levels.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| (v - target).abs().max(1e-300).ln()).collect();
    let label = locus.label().to_string();
    Ok((
        LimitCheck { label: label.clone(), side, target, levels: levels.to_vec(), values, slope: fit_slope(&xs, &ys) },
        RewriteCheck { label, side, levels: levels.to_vec(), remainder, current_term, gradient_term },
    ))
}

/// One boundary contribution in the balance.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryEntry {
    pub label: String,
    pub kind: &'static str,
    pub closed_form: f64,
    pub numeric: Option<f64>,
    pub numeric_error: Option<f64>,
}

/// Boundary bookkeeping of the global divergence identity for one side.
#[derive(Debug, Clone, Serialize)]
pub struct BalanceLedger {
    pub metric: String,
    pub parameters: std::collections::BTreeMap<String, f64>,
    pub side: Side,
    pub petrov: PetrovType,
    /// `ℓ∞ = 2π / max|κ¹|` from the extracted surface gravities.
    pub length_at_infinity: f64,
    pub declared_length_at_infinity: f64,
    pub orbifold_euler: i64,
    pub fixed_points: Vec<BoundaryEntry>,
    pub infinity: BoundaryEntry,
    /// Estimate of `∫ ∇·Ψ±` over the region between the surfaces.
    pub bulk_estimate: Option<f64>,
    /// `−2πℓ∞χ[O] + 4π²(Σχ[B]/|κ| ± Σε|κ¹ ± κ²|/|κ¹κ²|)`.
    pub closed_form_sum: f64,
    pub closed_form_scale: f64,
    /// `|closed_form_sum| / closed_form_scale`.
    pub imbalance: f64,
    /// `|Σ numeric boundary − bulk|`, relative to the same scale.
    pub numeric_imbalance: Option<f64>,
    pub tolerance: f64,
    /// `None` where the balance does not apply (half-flat side).
    pub pass: Option<bool>,
}

/// Balance ledger for one side of `model`.
pub fn global_balance(model: &MetricModel, side: Side) -> Result<BalanceLedger> {
    let cal = ernst_calibrate(model)?;
    let petrov = model.metadata.petrov[side.index()];
    let with_numerics = petrov != PetrovType::HalfFlat;
    let mut entries = Vec::new();
    let mut k_max: f64 = 0.0;
    for locus in &model.metadata.fixed_points {
        let levels = default_levels(model, locus);
        let gravity = surface_gravities(model, locus)?;
        k_max = k_max.max(match gravity {
            SurfaceGravity::Bolt { kappa, .. } => kappa.abs(),
            SurfaceGravity::Nut { kappa } => kappa[0].abs(),
        });
        let targets = fixed_point_targets(locus, &gravity);
        let (numeric, numeric_error) = if with_numerics {
            let e = fixed_point_boundary_term(model, locus, side, &levels, &cal)?;
            (Some(e.estimate), Some(e.error))
        } else {
            (None, None)
        };
        entries.push(BoundaryEntry {
            label: locus.label().to_string(),
            kind: match locus {
                FixedPointLocus::Bolt { .. } => "bolt",
                FixedPointLocus::Nut { .. } => "nut",
            },
            closed_form: targets.boundary[side.index()],
            numeric,
            numeric_error,
        });
    }
    let declared = model.metadata.boundary.length_at_infinity;
    let length = if k_max > 0.0 { 2.0 * PI / k_max } else { declared };
    let chi = model.metadata.boundary.orbifold_euler;
    let inf_closed = -2.0 * PI * length * chi as f64;
    let (inf_num, inf_err) = if with_numerics {
        let e = infinity_term(model, side, &default_radii(model), &cal)?;
        (Some(e.estimate), Some(e.error))
    } else {
        (None, None)
    };
    let infinity =
        BoundaryEntry { label: "infinity".into(), kind: "infinity", closed_form: inf_closed, numeric: inf_num, numeric_error: inf_err };
    let closed_form_sum = inf_closed + entries.iter().map(|e| e.closed_form).sum::<f64>();
    let closed_form_scale = entries.iter().map(|e| e.closed_form.abs()).fold(inf_closed.abs(), f64::max).max(1e-300);
    let imbalance = closed_form_sum.abs() / closed_form_scale;
    let bulk_estimate = if with_numerics { Some(bulk_divergence(model, side, &cal)?) } else { None };
    let numeric_imbalance = match (inf_num, bulk_estimate) {
        (Some(i), Some(b)) => {
            let total = i + entries.iter().map(|e| e.numeric.unwrap_or(0.0)).sum::<f64>();
            Some((total - b).abs() / closed_form_scale)
        }
        _ => None,
    };
    let pass = match petrov {
        PetrovType::HalfFlat => None,
        PetrovType::TypeD => Some(imbalance < BALANCE_TOL),
        PetrovType::General => Some(closed_form_sum >= -BALANCE_TOL * closed_form_scale),
    };
    Ok(BalanceLedger {
        metric: model.name.clone(),
        parameters: model.parameters.clone(),
        side,
        petrov,
        length_at_infinity: length,
        declared_length_at_infinity: declared,
        orbifold_euler: chi,
        fixed_points: entries,
        infinity,
        bulk_estimate,
        closed_form_sum,
        closed_form_scale,
        imbalance,
        numeric_imbalance,
        tolerance: BALANCE_TOL,
        pass,
    })
}

/// Tensor-product estimate of `∫ ∇·Ψ± dμ` over `r ∈ [r_in, R]`, where `r_in`
/// is the equatorial radius of the outermost default level; points with
/// `λ` below the smallest default level are treated as excised.
pub fn bulk_divergence(model: &MetricModel, side: Side, cal: &ErnstCalibration) -> Result<f64> {
    let eps_min = model
        .metadata
        .fixed_points
        .iter()
        .flat_map(|l| default_levels(model, l))
        .fold(0.1, f64::min);
    let r_in = model.domain.r_inner + model.domain.margin;
    let r_out = default_radii(model)[0];
    let rule = gauss_legendre(16);
    let (la, lb) = (r_in.ln(), r_out.ln());
    let mut pts = Vec::new();
    for &(x, wx) in &rule {
        let r = (0.5 * (la + lb) + 0.5 * (lb - la) * x).exp();
        let jr = 0.5 * (lb - la) * r;
        for &(y, wy) in &rule {
            let th = 0.5 * PI * (y + 1.0);
            pts.push((r, th, wx * wy * jr * 0.5 * PI));
        }
    }
    let parts: Result<Vec<f64>> = pts
        .par_iter()
        .map(|&(r, th, w)| {
            let p = [0.0, r, th, 0.0];
            if model.lambda(p) < eps_min {
                return Ok(0.0);
            }
            let c = concomitants_at(model, p, BULK_ORDER, cal)?;
            let Some(psi) = c.psi(side, PSI_BETA) else { return Ok(0.0) };
            let up = c.bundle.raise(&psi);
            Ok(w * c.bundle.sqrt_det.value() * c.bundle.divergence(&up).value())
        })
        .collect();
    Ok(fiber_area(model) * parts?.iter().sum::<f64>())
}

/// Charges of every fixed point of a model.
pub fn charges(model: &MetricModel) -> Result<Vec<FixedPointFlux>> {
    let cal = ernst_calibrate(model)?;
    model
        .metadata
        .fixed_points
        .iter()
        .map(|l| fixed_point_flux(model, l, &default_levels(model, l), &cal, DEFAULT_NODES))
        .collect()
}

/// Whether an extrapolated charge matches its closed form.
pub fn charge_agrees(estimate: f64, target: f64) -> bool {
    if target == 0.0 {
        estimate.abs() < CHARGE_ABS_TOL
    } else {
        ((estimate - target) / target).abs() < CHARGE_REL_TOL
    }
}
