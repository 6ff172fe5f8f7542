//! Block approximations of general graphons and the paired-strip strategy.

use super::{phi::strategy_cost, BlockGraphon, BlockMeasure, Builtin, Decomposition, GeneralGraphon, Part};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

fn approximate(w: &GeneralGraphon, k: usize, upper: bool) -> Result<BlockGraphon> {
    w.validate()?;
    if k == 0 {
        return Err(Error::InvalidArgument("block count must be positive".into()));
    }
    if let Some(m) = w.grid_size() {
        if m < k {
            return Err(Error::InvalidArgument(format!("grid of size {m} is coarser than {k} blocks")));
        }
    }
    let p = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    let (lo, hi) = w.cell_extrema(a, b, k);
                    if upper {
                        hi
                    } else {
                        lo
                    }
                })
                .collect()
        })
        .collect();
    BlockGraphon::new(vec![1.0 / k as f64; k], p)
}

/// `k` equal blocks carrying the essential supremum of `W` over each cell.
pub fn block_upper(w: &GeneralGraphon, k: usize) -> Result<BlockGraphon> {
    approximate(w, k, true)
}

/// `k` equal blocks carrying the essential infimum of `W` over each cell.
pub fn block_lower(w: &GeneralGraphon, k: usize) -> Result<BlockGraphon> {
    approximate(w, k, false)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripDecomposition {
    /// Upper approximation of `W_L` on `2k + 1` equal strips.
    pub graphon: BlockGraphon,
    pub decomposition: Decomposition,
    pub cost: f64,
}

/// Pairs strip `i + 1` with its mirror strip `2k + 1 - i` (1-based, `i = 1..k`)
/// and gives the first strip a type of its own.
///
/// On every pair the upper approximation of `W_L` is exactly `W_R`, so the
/// cost is `(2k/(2k+1))·φ(W_R) + (1/(2k+1))·log 4`.
pub fn strip_decomposition_wl(k: usize) -> Result<StripDecomposition> {
    if k == 0 {
        return Err(Error::InvalidArgument("strip count must be positive".into()));
    }
    let n = 2 * k + 1;
    let graphon = block_upper(&GeneralGraphon::Builtin { name: Builtin::WL }, n)?;
    let nf = n as f64;
    let mut parts = Vec::with_capacity(k + 1);
    for i in 1..=k {
        let mut weights = vec![0.0; n];
        weights[i] = 0.5;
        weights[n - i] = 0.5;
        parts.push(Part {
            alpha: 2.0 / nf,
            weights: BlockMeasure::new(weights)?,
        });
    }
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    parts.push(Part {
        alpha: 1.0 / nf,
        weights: BlockMeasure::new(first)?,
    });
    let decomposition = Decomposition::new(parts)?;
    let cost = strategy_cost(&decomposition, &graphon)?;
    Ok(StripDecomposition {
        graphon,
        decomposition,
        cost,
    })
}
