use serde::Serialize;

use super::integrals::{check_p, MixtureIntegrals};
use crate::constants::{FunctionalConstants, Symbol};
use crate::error::{invalid_param, Result};
use crate::functional::Functional;
use crate::mc::Estimate;
use crate::sampling::{Density, SeededRng};

/// Conditional and unconditional parts of the limiting variance of
/// `(T - E T) / sqrt(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBreakdown {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub total: f64,
    pub mc_se: f64,
}

fn check_kind(kind: Functional, constants: &FunctionalConstants) -> Result<()> {
    if constants.kind != kind {
        return Err(invalid_param(format!(
            "constants were estimated for {} but the test uses {kind}",
            constants.kind
        )));
    }
    Ok(())
}

/// Weighted sum `a + Σ b_i x_i` with the standard errors of the `x_i` added
/// in quadrature.
fn affine(a: f64, terms: &[(f64, Estimate)]) -> Estimate {
    Estimate {
        value: a + terms.iter().map(|(b, e)| b * e.value).sum::<f64>(),
        se: terms.iter().map(|(b, e)| (b * e.se).powi(2)).sum::<f64>().sqrt(),
    }
}

/// `2 E T2↑ + 2 E T2↓ + 2 E T2+ + E Δ0+ + E Δ0↑`: each reciprocal pair
/// enters the covariance sum once per direction, so `E Δ0+` has weight one.
fn beta_reciprocal_once(constants: &FunctionalConstants) -> Result<Estimate> {
    Ok(affine(
        0.0,
        &[
            (2.0, constants.require(Symbol::ET2Up)?),
            (2.0, constants.require(Symbol::ET2Down)?),
            (2.0, constants.require(Symbol::ET2Mixed)?),
            (1.0, constants.require(Symbol::EDeltaPlus)?),
            (1.0, constants.require(Symbol::EDeltaUp)?),
        ],
    ))
}

/// Null conditional variance using the functional's specialized form:
/// `(r/2){Kpq + (p-q)^2 K^2 + p^2 Var Δ0↓ + pq E Δ0+}` for K-NN and
/// `(r/2){2r + E Δ0^2 (1 - 2r)}` for the symmetrized MST, with `r = 2pq`.
pub fn sigma1_null(kind: Functional, constants: &FunctionalConstants, p: f64) -> Result<Estimate> {
    check_p(p)?;
    check_kind(kind, constants)?;
    let q = 1.0 - p;
    let r = 2.0 * p * q;
    let c = r / 2.0;
    match kind {
        Functional::Knn(k) => {
            let k = k as f64;
            let var = constants.require(Symbol::VarDeltaDown)?;
            let recip = constants.require(Symbol::EDeltaPlus)?;
            let base = c * (k * p * q + (p - q).powi(2) * k * k);
            Ok(affine(base, &[(c * p * p, var), (c * p * q, recip)]))
        }
        Functional::Mst => {
            let sq = constants.require(Symbol::EDeltaSq)?;
            Ok(affine(c * 2.0 * r, &[(c * (1.0 - 2.0 * r), sq)]))
        }
    }
}

/// Null conditional variance from the general directed formula
/// `(r/4){2 E Δ0↑ + 4(q E T2↑ + p E T2↓) - r β}` with
/// `β = 2 E T2↑ + 2 E T2↓ + 2 E T2+ + E Δ0+ + E Δ0↑`. Agrees with
/// [`sigma1_null`] up to Monte Carlo error.
pub fn sigma1_null_general(constants: &FunctionalConstants, p: f64) -> Result<Estimate> {
    check_p(p)?;
    let q = 1.0 - p;
    let r = 2.0 * p * q;
    let up = constants.require(Symbol::EDeltaUp)?;
    let t_up = constants.require(Symbol::ET2Up)?;
    let t_down = constants.require(Symbol::ET2Down)?;
    let beta = beta_reciprocal_once(constants)?;
    let c = r / 4.0;
    // β shares terms with the others; treat them as independent for the SE
    Ok(affine(0.0, &[(2.0 * c, up), (4.0 * c * q, t_up), (4.0 * c * p, t_down), (-c * r, beta)]))
}

/// Conditional variance under `f != g`, from integrals already estimated:
/// `(r/4){2 E Δ0↑ ∫fg/φ + 4q E T2↑ ∫fg²/φ² + 4p E T2↓ ∫f²g/φ² - r β ∫f²g²/φ³}`.
pub fn sigma1_alternative_from(constants: &FunctionalConstants, ints: &MixtureIntegrals) -> Result<Estimate> {
    let p = ints.p;
    let q = 1.0 - p;
    let r = 2.0 * p * q;
    let up = constants.require(Symbol::EDeltaUp)?;
    let t_up = constants.require(Symbol::ET2Up)?;
    let t_down = constants.require(Symbol::ET2Down)?;
    let beta = beta_reciprocal_once(constants)?;
    let c = r / 4.0;
    // integral order: ∫fg/φ, ∫f²g/φ², ∫fg²/φ², ∫f²g²/φ³
    let coeffs =
        [c * 2.0 * up.value, c * 4.0 * p * t_down.value, c * 4.0 * q * t_up.value, -c * r * beta.value];
    let mc = ints.combination(coeffs);
    let const_var = (c * 2.0 * ints.fg_over_phi().value * up.se).powi(2)
        + (c * 4.0 * p * ints.f2g_over_phi2().value * t_down.se).powi(2)
        + (c * 4.0 * q * ints.fg2_over_phi2().value * t_up.se).powi(2)
        + (c * r * ints.f2g2_over_phi3().value * beta.se).powi(2);
    Ok(Estimate { value: mc.value, se: (mc.se * mc.se + const_var).sqrt() })
}

/// Conditional variance `σ1^2(f, g, p)` with the mixture integrals estimated
/// by importance sampling from `p f + q g`.
pub fn sigma1_alternative(
    kind: Functional,
    constants: &FunctionalConstants,
    f: &Density,
    g: &Density,
    p: f64,
    mc_n: usize,
    rng: &SeededRng,
) -> Result<Estimate> {
    check_kind(kind, constants)?;
    let ints = MixtureIntegrals::estimate(f, g, p, mc_n, rng)?;
    sigma1_alternative_from(constants, &ints)
}

/// Null conditional variance in the form commonly published:
/// `(r/2){Kpq + (p-q)^2 K^2 + q^2 Var Δ0↓}` for K-NN and
/// `(r/2){r + E Δ0^2 (1 - 2r)}` for the MST. It counts reciprocal edge
/// pairs twice and swaps the 2-star weights, and underestimates the
/// variance; kept for comparison only.
pub fn sigma1_null_published(kind: Functional, constants: &FunctionalConstants, p: f64) -> Result<Estimate> {
    check_p(p)?;
    check_kind(kind, constants)?;
    let q = 1.0 - p;
    let r = 2.0 * p * q;
    let c = r / 2.0;
    match kind {
        Functional::Knn(k) => {
            let k = k as f64;
            let var = constants.require(Symbol::VarDeltaDown)?;
            Ok(affine(c * (k * p * q + (p - q).powi(2) * k * k), &[(c * q * q, var)]))
        }
        Functional::Mst => {
            let sq = constants.require(Symbol::EDeltaSq)?;
            Ok(affine(c * r, &[(c * (1.0 - 2.0 * r), sq)]))
        }
    }
}

/// [`sigma1_null_published`] plus `r^2 K^2 / 4`.
pub fn sigma_null_total_knn_published(k: usize, constants: &FunctionalConstants, p: f64) -> Result<Estimate> {
    let s1 = sigma1_null_published(Functional::Knn(k), constants, p)?;
    let r = 2.0 * p * (1.0 - p);
    Ok(affine(r * r * (k * k) as f64 / 4.0, &[(1.0, s1)]))
}

pub fn sigma2_knn_from(k: usize, ints: &MixtureIntegrals) -> Estimate {
    let r = 2.0 * ints.p * (1.0 - ints.p);
    let c = r * r * (k * k) as f64 / 4.0;
    let i3 = ints.f2g2_over_phi3();
    Estimate { value: c * i3.value, se: c * i3.se }
}

/// `(r^2 K^2 / 4) ∫ f^2 g^2 / φ^3`, the K-NN variance of the conditional mean.
pub fn sigma2_knn(
    k: usize,
    f: &Density,
    g: &Density,
    p: f64,
    mc_n: usize,
    rng: &SeededRng,
) -> Result<Estimate> {
    if k == 0 {
        return Err(invalid_param("K must be >= 1"));
    }
    let ints = MixtureIntegrals::estimate(f, g, p, mc_n, rng)?;
    Ok(sigma2_knn_from(k, &ints))
}

/// Both K-NN variance components from one importance sample.
pub fn sigma_total_knn(
    k: usize,
    constants: &FunctionalConstants,
    f: &Density,
    g: &Density,
    p: f64,
    mc_n: usize,
    rng: &SeededRng,
) -> Result<VarianceBreakdown> {
    check_kind(Functional::Knn(k), constants)?;
    let ints = MixtureIntegrals::estimate(f, g, p, mc_n, rng)?;
    let s1 = sigma1_alternative_from(constants, &ints)?;
    let s2 = sigma2_knn_from(k, &ints);
    Ok(VarianceBreakdown {
        sigma1_sq: s1.value,
        sigma2_sq: s2.value,
        total: s1.value + s2.value,
        mc_se: (s1.se * s1.se + s2.se * s2.se).sqrt(),
    })
}

/// Null K-NN variance
/// `(r/2){K(K+1)pq + (p-q)^2 K^2 + p^2 Var Δ0↓ + pq E Δ0+}`.
pub fn sigma_null_total_knn(k: usize, constants: &FunctionalConstants, p: f64) -> Result<Estimate> {
    let s1 = sigma1_null(Functional::Knn(k), constants, p)?;
    let r = 2.0 * p * (1.0 - p);
    Ok(affine(r * r * (k * k) as f64 / 4.0, &[(1.0, s1)]))
}
