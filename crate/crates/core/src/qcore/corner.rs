//! Corner maximisers of `yᵀQy / ‖y‖` over the box `0 ≤ y ≤ x`.
//!
//! Supports are 0-based block indices, sorted ascending.

use super::{ratio_unchecked, QMatrix};
use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Most positive coordinates for which corners are enumerated (`2^m` of them).
pub const MAX_CORNER_K: usize = 25;

/// Eigenvalues at or above `-PSD_TOLERANCE` count as nonnegative.
pub const PSD_TOLERANCE: f64 = 1e-10;

const VALUE_TIE: f64 = 1e-12;
const NORM_TIE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerWitness {
    pub support: Vec<usize>,
    pub vector: Vec<f64>,
    pub value: f64,
}

impl CornerWitness {
    fn from_mask(mask: u32, active: &[usize], x: &[f64], q: &QMatrix) -> Self {
        let mut vector = vec![0.0; x.len()];
        let mut support = Vec::new();
        for (bit, &i) in active.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                vector[i] = x[i];
                support.push(i);
            }
        }
        let value = ratio_unchecked(&vector, q);
        Self {
            support,
            vector,
            value,
        }
    }

    pub fn norm(&self) -> f64 {
        self.vector.iter().sum()
    }
}

fn validate(x: &[f64], q: &QMatrix) -> Result<Vec<usize>> {
    q.check_len(x.len())?;
    if let Some(i) = x.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidVector(format!("component {i} = {} is not nonnegative", x[i])));
    }
    let active: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    // Zero coordinates never enter a corner, so only the positive ones count.
    if active.len() > MAX_CORNER_K {
        return Err(Error::TooLarge {
            k: active.len(),
            max: MAX_CORNER_K,
            what: "corner enumeration",
        });
    }
    Ok(active)
}

/// Visits every corner over the active coordinates as `(mask, yᵀQy, ‖y‖)`.
///
/// Depth-first with one `Qy` buffer per inclusion count, so rounding error
/// never accumulates along more than `k` additions.
fn for_each_corner(x: &[f64], q: &QMatrix, active: &[usize], mut visit: impl FnMut(u32, f64, f64)) {
    struct Walk<'a> {
        x: &'a [f64],
        q: &'a QMatrix,
        active: &'a [usize],
        // qy[c·k..(c+1)·k] is Q·y for the current corner with c coordinates on.
        qy: Vec<f64>,
    }

    fn rec(w: &mut Walk, level: usize, count: usize, mask: u32, quad: f64, norm: f64, visit: &mut dyn FnMut(u32, f64, f64)) {
        if level == w.active.len() {
            visit(mask, quad, norm);
            return;
        }
        rec(w, level + 1, count, mask, quad, norm, visit);

        let k = w.q.k();
        let i = w.active[level];
        let xi = w.x[i];
        let (head, tail) = w.qy.split_at_mut((count + 1) * k);
        let cur = &head[count * k..];
        let new_quad = quad + xi * (2.0 * cur[i] + xi * w.q.get(i, i));
        for ((n, c), r) in tail[..k].iter_mut().zip(cur).zip(w.q.row(i)) {
            *n = c + xi * r;
        }
        rec(w, level + 1, count + 1, mask | 1 << level, new_quad, norm + xi, visit);
    }

    let mut walk = Walk {
        x,
        q,
        active,
        qy: vec![0.0; (active.len() + 1) * q.k()],
    };
    rec(&mut walk, 0, 0, 0, 0.0, 0.0, &mut visit);
}

/// Reusable buffers for [`w_fast`].
#[derive(Default)]
pub(crate) struct Scratch {
    active: Vec<usize>,
    qy: Vec<f64>,
}

/// `w(y)` without a witness; `y` must be nonnegative with length `k ≤ 25`.
pub(crate) fn w_fast(y: &[f64], q: &QMatrix, scratch: &mut Scratch) -> f64 {
    fn rec(level: usize, count: usize, quad: f64, norm: f64, y: &[f64], q: &QMatrix, s: &mut Scratch, best: &mut f64) {
        if level == s.active.len() {
            if norm > 0.0 {
                let v = quad / norm;
                if v > *best {
                    *best = v;
                }
            }
            return;
        }
        rec(level + 1, count, quad, norm, y, q, s, best);
        let k = q.k();
        let i = s.active[level];
        let yi = y[i];
        let (head, tail) = s.qy.split_at_mut((count + 1) * k);
        let cur = &head[count * k..];
        let new_quad = quad + yi * (2.0 * cur[i] + yi * q.get(i, i));
        for ((n, c), r) in tail[..k].iter_mut().zip(cur).zip(q.row(i)) {
            *n = c + yi * r;
        }
        rec(level + 1, count + 1, new_quad, norm + yi, y, q, s, best);
    }

    scratch.active.clear();
    scratch.active.extend((0..y.len()).filter(|&i| y[i] > 0.0));
    let need = (scratch.active.len() + 1) * q.k();
    if scratch.qy.len() < need {
        scratch.qy.resize(need, 0.0);
    }
    scratch.qy[..q.k()].iter_mut().for_each(|v| *v = 0.0);
    let mut best = 0.0;
    rec(0, 0, 0.0, 0.0, y, q, scratch, &mut best);
    best
}

fn lex_support_less(a: u32, b: u32) -> bool {
    // Sorted supports compare lexicographically; a prefix is smaller.
    let mut a = a;
    let mut b = b;
    loop {
        match (a == 0, b == 0) {
            (true, true) => return false,
            (true, false) => return true,
            (false, true) => return false,
            _ => {}
        }
        let (ta, tb) = (a.trailing_zeros(), b.trailing_zeros());
        match ta.cmp(&tb) {
            Ordering::Less => return true,
            Ordering::Greater => return false,
            Ordering::Equal => {
                a &= a - 1;
                b &= b - 1;
            }
        }
    }
}

/// The maximising corner with the smallest norm, ties then broken by the
/// lexicographically smallest sorted support.
pub fn minimal_corner(x: &[f64], q: &QMatrix) -> Result<CornerWitness> {
    let active = validate(x, q)?;
    let mut best: Option<(u32, f64, f64)> = None;
    for_each_corner(x, q, &active, |mask, quad, norm| {
        let value = if norm > 0.0 { quad / norm } else { 0.0 };
        let better = match best {
            None => true,
            Some((bmask, bval, bnorm)) => {
                let tie = VALUE_TIE * bval.abs().max(value.abs()).max(f64::MIN_POSITIVE);
                if value > bval + tie {
                    true
                } else if value < bval - tie {
                    false
                } else {
                    let ntie = NORM_TIE * bnorm.max(norm);
                    if norm < bnorm - ntie {
                        true
                    } else if norm > bnorm + ntie {
                        false
                    } else {
                        lex_support_less(mask, bmask)
                    }
                }
            }
        };
        if better {
            best = Some((mask, value, norm));
        }
    });
    let (mask, _, _) = best.expect("the empty corner is always visited");
    Ok(CornerWitness::from_mask(mask, &active, x, q))
}

/// The corner attaining `w(x)`; the same witness as [`minimal_corner`].
pub fn w_corner(x: &[f64], q: &QMatrix) -> Result<CornerWitness> {
    minimal_corner(x, q)
}

/// `w(x)`.
pub fn w_value(x: &[f64], q: &QMatrix) -> Result<f64> {
    Ok(minimal_corner(x, q)?.value)
}

/// Every corner whose value is within `1e-12` (relative) of `w(x)`, ordered by
/// norm and then support.
pub fn maximizing_corners(x: &[f64], q: &QMatrix) -> Result<Vec<CornerWitness>> {
    let active = validate(x, q)?;
    let mut all = Vec::with_capacity(1 << active.len());
    for_each_corner(x, q, &active, |mask, quad, norm| {
        all.push((mask, if norm > 0.0 { quad / norm } else { 0.0 }, norm));
    });
    let max = all.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let tie = VALUE_TIE * max.abs().max(f64::MIN_POSITIVE);
    let mut out: Vec<_> = all.into_iter().filter(|c| c.1 >= max - tie).collect();
    out.sort_by(|a, b| {
        a.2.total_cmp(&b.2).then_with(|| {
            if lex_support_less(a.0, b.0) {
                Ordering::Less
            } else if lex_support_less(b.0, a.0) {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        })
    });
    Ok(out
        .into_iter()
        .map(|(mask, _, _)| CornerWitness::from_mask(mask, &active, x, q))
        .collect())
}

/// Brute-force `w(x)` over the grid `y_i = (j / resolution)·x_i`, for `k ≤ 4`.
///
/// Makes no use of the corner structure. The grid contains every corner, so
/// the result never exceeds `w(x)` and, since corners attain `w`, matches it
/// up to rounding at every resolution.
pub fn w_grid_oracle(x: &[f64], q: &QMatrix, resolution: usize) -> Result<f64> {
    q.check_len(x.len())?;
    let k = q.k();
    if k > 4 {
        return Err(Error::TooLarge {
            k,
            max: 4,
            what: "grid oracle",
        });
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidVector(format!("component {i} = {} is not nonnegative", x[i])));
    }
    let r = resolution as f64;
    let last = k - 1;
    let steps = resolution + 1;
    let outer: usize = steps.pow(last as u32);
    let mut y = vec![0.0; k];
    let mut best = 0.0f64;
    for idx in 0..outer {
        let mut rem = idx;
        for (i, yi) in y.iter_mut().enumerate().take(last) {
            *yi = (rem % steps) as f64 / r * x[i];
            rem /= steps;
        }
        y[last] = 0.0;
        // With the leading coordinates fixed, yᵀQy = a + 2bt + ct² and ‖y‖ = s + t.
        let a = q.quadratic_form(&y);
        let b: f64 = (0..last).map(|i| q.get(last, i) * y[i]).sum();
        let c = q.get(last, last);
        let s: f64 = y[..last].iter().sum();
        for j in 0..steps {
            let t = j as f64 / r * x[last];
            let norm = s + t;
            if norm > 0.0 {
                let v = (a + t * (2.0 * b + c * t)) / norm;
                if v > best {
                    best = v;
                }
            }
        }
    }
    Ok(best)
}

fn helmert_projection(q: &QMatrix, support: &[usize]) -> DMatrix<f64> {
    let m = support.len();
    // Columns j = 1..m-1: (1,..,1,-j,0,..)/sqrt(j(j+1)), an orthonormal basis
    // of the zero-sum hyperplane in R^m.
    let h = DMatrix::from_fn(m, m - 1, |i, col| {
        let j = col + 1;
        let scale = 1.0 / ((j * (j + 1)) as f64).sqrt();
        match i.cmp(&j) {
            Ordering::Less => scale,
            Ordering::Equal => -(j as f64) * scale,
            Ordering::Greater => 0.0,
        }
    });
    let qs = DMatrix::from_fn(m, m, |a, b| q.get(support[a], support[b]));
    let p = h.transpose() * qs * &h;
    // Symmetrise away rounding before the symmetric solver.
    (&p + p.transpose()) * 0.5
}

fn check_support(q: &QMatrix, support: &[usize]) -> Result<Vec<usize>> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&i| i >= q.k()) {
        return Err(Error::InvalidArgument(format!(
            "support index {bad} out of range for k = {}",
            q.k()
        )));
    }
    Ok(s)
}

/// Smallest eigenvalue of `Q` restricted to `support` and projected onto the
/// zero-sum hyperplane; `None` when the hyperplane is trivial (one index).
pub fn projected_min_eigenvalue(q: &QMatrix, support: &[usize]) -> Result<Option<f64>> {
    let s = check_support(q, support)?;
    if s.len() == 1 {
        return Ok(None);
    }
    let eig = SymmetricEigen::new(helmert_projection(q, &s));
    Ok(Some(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)))
}

/// Whether `yᵀQy ≥ 0` for every `y` supported on `support` with zero sum.
pub fn pseudodefinite_check(q: &QMatrix, support: &[usize]) -> Result<bool> {
    Ok(projected_min_eigenvalue(q, support)?.is_none_or(|e| e >= -PSD_TOLERANCE))
}

/// Whether the balanced strategy is optimal at `x`, i.e. `w(x) = w_*(x)`.
///
/// Decided by pseudodefiniteness on the support of the minimal maximising
/// corner. An empty minimal support means `w(x) = 0 = w_*(x)`.
pub fn balanced_optimality_check(x: &[f64], q: &QMatrix) -> Result<bool> {
    let corner = minimal_corner(x, q)?;
    if corner.support.is_empty() {
        return Ok(true);
    }
    pseudodefinite_check(q, &corner.support)
}
