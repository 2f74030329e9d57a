//! Orbit-space scalars pulled back to the manifold, and the orbit-space
//! divergence identity checked through the `∇_a V^a = λ D_μ V^μ` dictionary.

use serde::Serialize;

use crate::concomitants::{quotient_scalars, Concomitants};
use crate::identities::{find, run_suite, SuiteOptions, VerificationReport, ALPHAS};
use crate::jet::DIM;
use crate::metrics::MetricModel;
use crate::tensor::i2;
use crate::{Error, Result};

/// Degree-0 values of the quotient layer at one point.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientScalars {
    pub point: [f64; DIM],
    /// `γ_ab = λ g_ab − ξ_a ξ_b`.
    pub gamma: [f64; 16],
    /// `[w⁺, w⁻]`, `w± = (1 − E±)/(1 + E±)`.
    pub w: [f64; 2],
    /// `Θ = 1 − w⁺w⁻`.
    pub theta: f64,
    /// `A_a = ½(w⁺ ∂_a w⁻ − w⁻ ∂_a w⁺)`.
    pub a: [f64; DIM],
    /// `[k⁺⁴, k⁻⁴]`.
    pub k4: [f64; 2],
    /// `P±_abc` per side, when the Mars–Simon objects exist.
    pub p: [Option<Vec<f64>>; 2],
    /// `max_a |γ_ab ξ^b|`.
    pub gamma_xi: f64,
    /// `|A_a ξ^a|`.
    pub a_xi: f64,
}

pub fn quotient_bundle(c: &Concomitants) -> Result<QuotientScalars> {
    let q = quotient_scalars(c)?;
    let lam = c.lambda.value();
    let g = &c.bundle.g;
    let xl: [f64; DIM] = std::array::from_fn(|a| c.xi_lower[a].value());
    let gamma: [f64; 16] = std::array::from_fn(|k| lam * g.comps[k].value() - xl[k / 4] * xl[k % 4]);
    let gamma_xi = (0..DIM)
        .map(|a| (0..DIM).map(|b| gamma[i2(a, b)] * c.xi[b]).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let w = [q.w[0].value(), q.w[1].value()];
    let a: [f64; DIM] =
        std::array::from_fn(|k| 0.5 * (w[0] * q.w[1].gradient_value(k) - w[1] * q.w[0].gradient_value(k)));
    let a_xi = (0..DIM).map(|k| a[k] * c.xi[k]).sum::<f64>().abs();
    Ok(QuotientScalars {
        point: c.point,
        gamma,
        w,
        theta: q.theta.value(),
        a,
        k4: [q.k4[0].value(), q.k4[1].value()],
        p: [0, 1].map(|k| c.sides[k].mars_simon.as_ref().map(|ms| ms.p.clone())),
        gamma_xi,
        a_xi,
    })
}

/// Runs the orbit-space divergence identity for each `α` (`β = (α + 1)/2`).
pub fn ddkw_correspondence(model: &MetricModel, alphas: &[f64], opts: SuiteOptions) -> Result<Vec<VerificationReport>> {
    let mut suite = Vec::new();
    for &alpha in alphas {
        let id = format!("C.eq:ddkw:{}", alpha_label(alpha)?);
        suite.push(find(&id).ok_or_else(|| Error::Config(format!("no identity {id}")))?);
    }
    run_suite(model, &suite, opts)
}

fn alpha_label(alpha: f64) -> Result<String> {
    if ALPHAS.contains(&alpha) {
        Ok(format!("{alpha}"))
    } else {
        Err(Error::Config(format!("α must be one of {ALPHAS:?}, got {alpha}")))
    }
}
