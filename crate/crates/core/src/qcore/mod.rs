//! Optimisation over the weight matrix `Q`.
//!
//! For a symmetric nonnegative `k × k` matrix `Q` and `x ∈ R_+^k`:
//!
//! - `w(x)  = max_{0 ≤ y ≤ x} yᵀQy / ‖y‖` (with `0/0 := 0`), attained at a corner
//!   `y_i ∈ {0, x_i}`;
//! - `w_*(x) = inf Σ_t w(x⁽ᵗ⁾)` over finite systems with `Σ_t x⁽ᵗ⁾ = x`, attained
//!   by at most `k` vectors.
//!
//! `‖·‖` is the 1-norm throughout.

mod corner;
mod nelder_mead;
mod system;

pub use corner::{
    balanced_optimality_check, maximizing_corners, minimal_corner, projected_min_eigenvalue,
    pseudodefinite_check, w_corner, w_grid_oracle, w_value, CornerWitness, MAX_CORNER_K,
    PSD_TOLERANCE,
};
pub use nelder_mead::{minimize as nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use system::{
    reduce_system, system_cost, w_star, w_star_seeded, OptimizerConfig, VectorSystem, MAX_W_STAR_K,
};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::Deref;

/// Symmetric `k × k` matrix with nonnegative finite entries, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct QMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl QMatrix {
    /// Builds `Q` from its rows. Entries that differ from their transpose by
    /// more than `1e-12` (relative) are rejected; smaller gaps are averaged away.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::InvalidMatrix("matrix has no rows".into()));
        }
        let mut entries = Vec::with_capacity(k * k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidMatrix(format!("entry ({i},{j}) is not finite")));
                }
                if v < 0.0 {
                    return Err(Error::InvalidMatrix(format!("entry ({i},{j}) = {v} is negative")));
                }
            }
            entries.extend_from_slice(row);
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let (a, b) = (entries[i * k + j], entries[j * k + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidMatrix(format!(
                        "not symmetric: q[{i}][{j}] = {a} but q[{j}][{i}] = {b}"
                    )));
                }
                let m = 0.5 * (a + b);
                entries[i * k + j] = m;
                entries[j * k + i] = m;
            }
        }
        Ok(Self { k, entries })
    }

    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new((0..k).map(|i| (0..k).map(|j| f(i, j)).collect()).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|i| self.row(i).to_vec()).collect()
    }

    /// `q* = max_i q_ii`.
    pub fn q_star(&self) -> f64 {
        (0..self.k).map(|i| self.get(i, i)).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    /// `q̂(x) = Σ x_i q_ii / ‖x‖`, and `q*` for the zero vector.
    pub fn q_hat(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x.len())?;
        let norm: f64 = x.iter().sum();
        if norm == 0.0 {
            return Ok(self.q_star());
        }
        Ok(x.iter().enumerate().map(|(i, &xi)| xi * self.get(i, i)).sum::<f64>() / norm)
    }

    /// `yᵀQy` for an arbitrary real `y`.
    pub fn quadratic_form(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.k);
        let mut total = 0.0;
        for i in 0..self.k {
            if y[i] == 0.0 {
                continue;
            }
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.k {
                acc += row[j] * y[j];
            }
            total += y[i] * acc;
        }
        total
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn principal(&self, indices: &[usize]) -> QMatrix {
        let m = indices.len();
        let mut entries = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                entries.push(self.get(i, j));
            }
        }
        QMatrix { k: m, entries }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: len,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for QMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<QMatrix> for Vec<Vec<f64>> {
    fn from(q: QMatrix) -> Self {
        q.rows()
    }
}

/// A point of `R_+^k`: block masses, measure weights, or one vector of a system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        for (i, &v) in components.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidVector(format!(
                    "component {i} = {v} is not a nonnegative finite number"
                )));
            }
        }
        Ok(Self(components))
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    /// 1-norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * s).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(v: WeightVector) -> Self {
        v.0
    }
}

/// `yᵀQy / ‖y‖`, with the zero vector mapped to 0.
pub fn rayleigh_ratio(y: &[f64], q: &QMatrix) -> Result<f64> {
    q.check_len(y.len())?;
    if let Some(i) = y.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidVector(format!("component {i} = {} is not nonnegative", y[i])));
    }
    Ok(ratio_unchecked(y, q))
}

#[inline]
pub(crate) fn ratio_unchecked(y: &[f64], q: &QMatrix) -> f64 {
    let norm: f64 = y.iter().sum();
    if norm == 0.0 {
        return 0.0;
    }
    q.quadratic_form(y) / norm
}

/// Bounds on `w_*(x)`: `(q̂(x))² ‖x‖ / Σ_i q_ii ≤ w_*(x) ≤ q̂(x) ‖x‖`.
///
/// The lower bound needs `q* > 0`; it is reported as 0 otherwise.
pub fn w_star_bounds(x: &[f64], q: &QMatrix) -> Result<(f64, f64)> {
    let q_hat = q.q_hat(x)?;
    let norm: f64 = x.iter().sum();
    let upper = q_hat * norm;
    let trace = q.trace();
    let lower = if q.q_star() > 0.0 && trace > 0.0 {
        q_hat * q_hat * norm / trace
    } else {
        0.0
    };
    Ok((lower, upper))
}
