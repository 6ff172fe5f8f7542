//! Stability estimates, the uniform perturbation and `χ` predictions.

use super::{phi::phi_star, BlockGraphon};
use crate::qcore::OptimizerConfig;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Upper bounds on how far the coefficients of two graphons bounded by
/// `1 - ε` can differ, given `sup |W - W'| ≤ δ` off a set `S_δ` and the
/// `L²` distance `‖W - W'‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityBounds {
    /// For `|φ(μ,W) - φ(μ,W')|`: `ε⁻¹·min(δ + 2μ(S_δ), ‖W - W'‖_{L²(μ×μ)})`.
    pub a: f64,
    /// For `|φ_k(W) - φ_k(W')|`: `ε⁻¹·√k·‖W - W'‖_{L²}`; needs `k`.
    pub b: Option<f64>,
    /// For `|φ_k(W) - φ_k(W')|` and `|φ_*(W) - φ_*(W')|`: `ε⁻¹·(δ + 2λ(S_δ))`.
    pub c: f64,
}

pub fn stability_bound(eps: f64, delta: f64, mass_s_delta: f64, l2_dist: f64, k: Option<usize>) -> Result<StabilityBounds> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must lie in (0, 1)")));
    }
    for (name, v) in [("delta", delta), ("mass", mass_s_delta), ("l2 distance", l2_dist)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} = {v} must be nonnegative")));
        }
    }
    let c = (delta + 2.0 * mass_s_delta) / eps;
    Ok(StabilityBounds {
        a: c.min(l2_dist / eps),
        b: k.map(|k| (k as f64).sqrt() * l2_dist / eps),
        c,
    })
}

/// `p'_ij = (1 - ε')·p_ij + ε'`, i.e. `1 - p' = (1 - ε')(1 - p)`.
///
/// Every corner ratio of `Q(W')` at `z` equals that of `Q(W)` plus
/// `log(1/(1-ε'))·‖z‖`.
pub fn perturb(w: &BlockGraphon, eps: f64) -> Result<BlockGraphon> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must lie in [0, 1)")));
    }
    let p = w
        .p_rows()
        .iter()
        .map(|r| r.iter().map(|v| (1.0 - eps) * v + eps).collect())
        .collect();
    BlockGraphon::new(w.masses().to_vec(), p)
}

/// `coefficient · n / (2 ln n)`.
pub fn chi_from_coefficient(coefficient: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n = {n} must be at least 3")));
    }
    let n = n as f64;
    Ok(coefficient * n / (2.0 * n.ln()))
}

/// Predicted chromatic number `φ_*(W) · n / (2 ln n)` of `G(n, W)`.
pub fn chi_prediction(w: &BlockGraphon, n: usize, cfg: &OptimizerConfig) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n = {n} must be at least 3")));
    }
    chi_from_coefficient(phi_star(w, cfg)?.value, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn identical_graphons() {
        let b = stability_bound(0.5, 0.0, 0.0, 0.0, Some(3)).unwrap();
        assert_eq!((b.a, b.b, b.c), (0.0, Some(0.0), 0.0));
    }

    #[test]
    fn bound_formulas() {
        let b = stability_bound(0.25, 0.1, 0.05, 0.3, Some(4)).unwrap();
        assert!((b.c - 0.8).abs() < 1e-15);
        assert!((b.a - 0.8).abs() < 1e-15);
        assert!((b.b.unwrap() - 2.4).abs() < 1e-15);
        let b = stability_bound(0.5, 0.4, 0.0, 0.1, None).unwrap();
        assert!((b.a - 0.2).abs() < 1e-15);
        assert_eq!(b.b, None);
        assert!(stability_bound(1.0, 0.0, 0.0, 0.0, None).is_err());
        assert!(stability_bound(0.5, -0.1, 0.0, 0.0, None).is_err());
    }

    #[test]
    fn prediction_arithmetic() {
        let n = E * E;
        assert!((chi_from_coefficient(4.0, 7).unwrap() - 4.0 * 7.0 / (2.0 * 7f64.ln())).abs() < 1e-12);
        // With n = e², n / (2 ln n) = e² / 4.
        assert!((4.0 * n / (2.0 * n.ln()) - E * E).abs() < 1e-12);
        assert!(chi_from_coefficient(1.0, 2).is_err());
    }

    #[test]
    fn constant_prediction() {
        let p: f64 = 0.5;
        let w = BlockGraphon::constant(p).unwrap();
        let n = 1000;
        let want = (1.0 / (1.0 - p)).ln() * n as f64 / (2.0 * (n as f64).ln());
        assert!((chi_prediction(&w, n, &OptimizerConfig::default()).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn perturbation_keeps_masses() {
        let w = perturb(&BlockGraphon::figure_block(), 0.1).unwrap();
        assert_eq!(w.masses(), BlockGraphon::figure_block().masses());
        assert!((w.p(0, 0) - 0.55).abs() < 1e-15);
        assert!(perturb(&w, 1.0).is_err());
    }
}
