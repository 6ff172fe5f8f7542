//! The coefficients `φ(W)`, `φ(μ, W)`, `φ_*(W)` and strategy costs.

use super::{BlockGraphon, BlockMeasure, Decomposition, Part};
use crate::qcore::{nelder_mead, w_corner, w_star, w_value, CornerWitness, NelderMeadOptions, OptimizerConfig, VectorSystem};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Balanced coefficient `φ(W) = w(λ(S_1), …, λ(S_k))`, with its corner.
pub fn phi(w: &BlockGraphon) -> Result<CornerWitness> {
    w_corner(w.masses(), &w.q_matrix())
}

/// `φ(μ, W) = w(μ(S_1), …, μ(S_k))`.
pub fn phi_mu(mu: &BlockMeasure, w: &BlockGraphon) -> Result<f64> {
    if mu.k() != w.k() {
        return Err(Error::DimensionMismatch {
            expected: w.k(),
            got: mu.k(),
        });
    }
    w_value(mu.weights(), &w.q_matrix())
}

/// `Σ α_μ φ(μ, W)`, the coefficient of `n / (2 log n)` for the strategy.
pub fn strategy_cost(d: &Decomposition, w: &BlockGraphon) -> Result<f64> {
    d.validate_for(w)?;
    let q = w.q_matrix();
    d.parts()
        .iter()
        .map(|p| Ok(p.alpha * w_value(p.weights.weights(), &q)?))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiStar {
    pub value: f64,
    pub decomposition: Decomposition,
    pub system: VectorSystem,
}

/// `φ_*(W) = w_*(λ(S_1), …, λ(S_k))`, with the witness as a decomposition
/// (`α_t = ‖x⁽ᵗ⁾‖`, `μ_t = x⁽ᵗ⁾ / ‖x⁽ᵗ⁾‖`).
pub fn phi_star(w: &BlockGraphon, cfg: &OptimizerConfig) -> Result<PhiStar> {
    let system = w_star(w.masses(), &w.q_matrix(), cfg)?;
    let total: f64 = system.vectors.iter().flatten().sum();
    let parts = system
        .vectors
        .iter()
        .map(|v| {
            let alpha: f64 = v.iter().sum();
            Ok(Part {
                // Absorb the masses' own rounding so the alphas sum to 1.
                alpha: alpha / total,
                weights: BlockMeasure::normalized(v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhiStar {
        value: system.total_cost,
        decomposition: Decomposition::new(parts)?,
        system,
    })
}

/// The strategy that repeatedly colours with the cheapest measure on the
/// blocks still uncoloured, for as long as that measure fits.
///
/// The cheapest measure on a face is found by simplex search from every
/// sub-face barycentre, so the weights are accurate to about `1e-8`.
pub fn greedy_decomposition(w: &BlockGraphon) -> Result<Decomposition> {
    let q = w.q_matrix();
    let k = w.k();
    let mut remaining = w.masses().to_vec();
    let mut parts = Vec::new();
    while remaining.iter().any(|&r| r > 0.0) {
        let face: Vec<usize> = (0..k).filter(|&i| remaining[i] > 0.0).collect();
        let omega = cheapest_on_face(&q, &face, k);
        let alpha = face
            .iter()
            .filter(|&&i| omega[i] > 0.0)
            .map(|&i| remaining[i] / omega[i])
            .fold(f64::INFINITY, f64::min);
        for &i in &face {
            remaining[i] -= alpha * omega[i];
            if remaining[i] < 1e-9 * w.masses()[i] {
                remaining[i] = 0.0;
            }
        }
        parts.push((alpha, omega));
        if parts.len() > k {
            return Err(Error::InvalidDecomposition("greedy split did not terminate".into()));
        }
    }
    // Snapped remainders leave Σ α within 1e-9 of 1.
    let total: f64 = parts.iter().map(|p| p.0).sum();
    Decomposition::new(
        parts
            .into_iter()
            .map(|(alpha, omega)| {
                Ok(Part {
                    alpha: alpha / total,
                    weights: BlockMeasure::normalized(&omega)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    )
}

fn cheapest_on_face(q: &crate::qcore::QMatrix, face: &[usize], k: usize) -> Vec<f64> {
    let m = face.len();
    let embed = |theta: &[f64]| {
        // Softmax over the face with the last logit pinned at 0.
        let logits: Vec<f64> = (0..m).map(|j| if j + 1 == m { 0.0 } else { theta[j].clamp(-40.0, 40.0) }).collect();
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = logits.iter().map(|l| (l - top).exp()).sum();
        let mut omega = vec![0.0; k];
        for (j, &i) in face.iter().enumerate() {
            omega[i] = (logits[j] - top).exp() / total;
        }
        omega
    };
    let cost = |theta: &[f64]| w_value(&embed(theta), q).unwrap_or(f64::INFINITY);
    let opts = NelderMeadOptions {
        step: 1.0,
        stall_tolerance: 1e-14,
        ..Default::default()
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let subsets = if m <= 10 { (1u32..1 << m).collect::<Vec<_>>() } else { (0..m).map(|j| 1u32 << j).collect() };
    for s in subsets {
        // Barycentre of the sub-face s, written as logits relative to the last coordinate.
        let logit = |j: usize| if s >> j & 1 == 1 { 0.0 } else { -30.0 };
        let theta0: Vec<f64> = (0..m - 1).map(|j| logit(j) - logit(m - 1)).collect();
        let r = nelder_mead(cost, &theta0, &opts);
        if best.as_ref().is_none_or(|b| r.value < b.0 - 1e-13) {
            best = Some((r.value, r.x));
        }
    }
    let mut omega = embed(&best.unwrap().1);
    // Shares left over from the softmax tails are not part of the measure.
    for v in omega.iter_mut() {
        if *v < 1e-9 {
            *v = 0.0;
        }
    }
    let total: f64 = omega.iter().sum();
    omega.iter_mut().for_each(|v| *v /= total);
    omega
}

fn part(alpha: f64, weights: Vec<f64>) -> Part {
    Part {
        alpha,
        weights: BlockMeasure::new(weights).expect("valid weights"),
    }
}

/// The greedy strategy for [`BlockGraphon::figure_block`], in closed form:
/// all of block 1, then blocks 2 and 3 in ratio 2:1, then the rest of block 3.
pub fn figure_block_greedy_decomposition() -> Decomposition {
    Decomposition::new(vec![
        part(1.0 / 3.0, vec![1.0, 0.0, 0.0]),
        part(0.5, vec![0.0, 2.0 / 3.0, 1.0 / 3.0]),
        part(1.0 / 6.0, vec![0.0, 0.0, 1.0]),
    ])
    .expect("valid decomposition")
}

/// The optimal two-type strategy for [`BlockGraphon::figure_block`], in closed form.
pub fn figure_block_optimal_decomposition() -> Decomposition {
    let s3 = 3f64.sqrt();
    Decomposition::new(vec![
        part((s3 - 1.0) / 2.0, vec![(1.0 + s3) / 3.0, (2.0 - s3) / 3.0, 0.0]),
        part((3.0 - s3) / 2.0, vec![0.0, (6.0 - s3) / 9.0, (3.0 + s3) / 9.0]),
    ])
    .expect("valid decomposition")
}
