//! Closed forms for two families where the balanced strategy is optimal.
//!
//! Both families have a `Q` that is positive semidefinite on the zero-sum
//! hyperplane, so `φ_* = φ` and the maximising corner is a prefix of blocks.

use super::BlockGraphon;
use crate::{Error, Result};

fn q(p: f64) -> f64 {
    -(-p).ln_1p()
}

fn check_lengths(lengths: &[f64]) -> Result<()> {
    if lengths.is_empty() {
        return Err(Error::InvalidArgument("no interval lengths".into()));
    }
    if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidArgument("interval lengths must be positive".into()));
    }
    let total: f64 = lengths.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("interval lengths sum to {total}, not 1")));
    }
    if lengths.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("interval lengths must be sorted descending".into()));
    }
    Ok(())
}

fn check_p_vec(p_vec: &[f64], p: f64) -> Result<()> {
    if p_vec.is_empty() {
        return Err(Error::InvalidArgument("no diagonal probabilities".into()));
    }
    if p_vec.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::InvalidArgument("diagonal probabilities must lie in (0, 1)".into()));
    }
    if p_vec.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("diagonal probabilities must be sorted descending".into()));
    }
    let last = *p_vec.last().unwrap();
    if !(0.0..=last).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} must lie in [0, {last}]")));
    }
    Ok(())
}

/// Intervals of lengths `ℓ_1 ≥ … ≥ ℓ_k`, `p0` on diagonal blocks and `p ≤ p0` off them:
/// `max_i (Σ_{j≤i} ℓ_j² / Σ_{j≤i} ℓ_j)·log((1-p)/(1-p0)) + (Σ_{j≤i} ℓ_j)·log(1/(1-p))`.
pub fn closed_form_block1(lengths: &[f64], p: f64, p0: f64) -> Result<f64> {
    check_lengths(lengths)?;
    if !(0.0 < p && p <= p0 && p0 < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < p <= p0 < 1, got p = {p}, p0 = {p0}")));
    }
    let gap = q(p0) - q(p);
    let (mut sum, mut sq) = (0.0, 0.0);
    let mut best = f64::NEG_INFINITY;
    for &l in lengths {
        sum += l;
        sq += l * l;
        best = best.max(sq / sum * gap + sum * q(p));
    }
    Ok(best)
}

/// The graphon of [`closed_form_block1`].
pub fn block1_graphon(lengths: &[f64], p: f64, p0: f64) -> Result<BlockGraphon> {
    closed_form_block1(lengths, p, p0)?;
    let k = lengths.len();
    BlockGraphon::new(
        lengths.to_vec(),
        (0..k).map(|i| (0..k).map(|j| if i == j { p0 } else { p }).collect()).collect(),
    )
}

/// `k` equal intervals, `p_1 ≥ … ≥ p_k` on diagonal blocks and `p ≤ p_k` off them:
/// `max_i ((i-1)/k)·log(1/(1-p)) + (1/(ik))·Σ_{j≤i} log(1/(1-p_j))`.
pub fn closed_form_block2(p_vec: &[f64], p: f64) -> Result<f64> {
    check_p_vec(p_vec, p)?;
    let k = p_vec.len() as f64;
    let mut acc = 0.0;
    let mut best = f64::NEG_INFINITY;
    for (idx, &pj) in p_vec.iter().enumerate() {
        let i = (idx + 1) as f64;
        acc += q(pj);
        best = best.max((i - 1.0) / k * q(p) + acc / (i * k));
    }
    Ok(best)
}

/// The graphon of [`closed_form_block2`].
pub fn block2_graphon(p_vec: &[f64], p: f64) -> Result<BlockGraphon> {
    check_p_vec(p_vec, p)?;
    let k = p_vec.len();
    BlockGraphon::new(
        vec![1.0 / k as f64; k],
        (0..k).map(|i| (0..k).map(|j| if i == j { p_vec[i] } else { p }).collect()).collect(),
    )
}
