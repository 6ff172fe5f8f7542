//! Block graphons, measure decompositions and the chromatic coefficients.
//!
//! A measure on `[0,1]` enters only through its block weights `(μ(S_i))_i`;
//! for a block graphon `φ(μ, W)` depends on nothing else.

mod approx;
mod closed_form;
mod phi;
mod stability;

pub use approx::{block_lower, block_upper, strip_decomposition_wl, StripDecomposition};
pub use closed_form::{block1_graphon, block2_graphon, closed_form_block1, closed_form_block2};
pub use phi::{
    figure_block_greedy_decomposition, figure_block_optimal_decomposition, greedy_decomposition, phi,
    phi_mu, phi_star, strategy_cost, PhiStar,
};
pub use stability::{chi_from_coefficient, chi_prediction, perturb, stability_bound, StabilityBounds};

use crate::qcore::QMatrix;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

const MASS_TOLERANCE: f64 = 1e-12;
const DECOMPOSITION_TOLERANCE: f64 = 1e-9;

/// `W = Σ p_ij 1_{S_i × S_j}` with `λ(S_i) = masses[i]`; blocks are
/// consecutive intervals of `[0,1]` in index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBlock", into = "RawBlock")]
pub struct BlockGraphon {
    masses: Vec<f64>,
    p: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    masses: Vec<f64>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
}

impl TryFrom<RawBlock> for BlockGraphon {
    type Error = Error;
    fn try_from(raw: RawBlock) -> Result<Self> {
        Self::new(raw.masses, raw.p)
    }
}

impl From<BlockGraphon> for RawBlock {
    fn from(w: BlockGraphon) -> Self {
        RawBlock {
            masses: w.masses,
            p: w.p,
        }
    }
}

impl BlockGraphon {
    pub fn new(masses: Vec<f64>, mut p: Vec<Vec<f64>>) -> Result<Self> {
        let k = masses.len();
        let invalid = |m: String| Err(Error::InvalidGraphon(m));
        if k == 0 {
            return invalid("no blocks".into());
        }
        if let Some(i) = masses.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
            return invalid(format!("mass {i} = {} is not positive", masses[i]));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return invalid(format!("masses sum to {total}, not 1"));
        }
        if p.len() != k || p.iter().any(|r| r.len() != k) {
            return invalid(format!("P must be {k} x {k}"));
        }
        for i in 0..k {
            for j in 0..k {
                let v = p[i][j];
                if !(0.0..1.0).contains(&v) {
                    return invalid(format!("P[{i}][{j}] = {v} is outside [0, 1)"));
                }
                if j > i {
                    let u = p[j][i];
                    if (u - v).abs() > 1e-12 {
                        return invalid(format!("P is not symmetric at ({i},{j}): {v} vs {u}"));
                    }
                    let m = 0.5 * (u + v);
                    p[i][j] = m;
                    p[j][i] = m;
                }
            }
        }
        Ok(Self { masses, p })
    }

    /// One block with edge probability `p`.
    pub fn constant(p: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![vec![p]])
    }

    /// Three blocks of mass 1/3 whose interplay makes mixed colour classes pay off.
    pub fn figure_block() -> Self {
        let t = 1.0 / 3.0;
        Self::new(
            vec![t, t, t],
            vec![vec![0.5, 0.5, 0.75], vec![0.5, 0.75, 0.5], vec![0.75, 0.5, 0.875]],
        )
        .expect("valid builtin")
    }

    /// Two halves: `3/4` on the first half squared, `1/2` elsewhere.
    pub fn w_r() -> Self {
        Self::new(vec![0.5, 0.5], vec![vec![0.75, 0.5], vec![0.5, 0.5]]).expect("valid builtin")
    }

    pub fn k(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    pub fn p_rows(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn min_p(&self) -> f64 {
        self.p.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_p(&self) -> f64 {
        self.p.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// `q_ij = log(1/(1 - p_ij))`.
    pub fn q_matrix(&self) -> QMatrix {
        QMatrix::from_fn(self.k(), |i, j| -(-self.p[i][j]).ln_1p()).expect("p < 1 gives a valid Q")
    }

    /// Right endpoints of the block intervals; the last is exactly 1.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        *out.last_mut().unwrap() = 1.0;
        out
    }

    /// Index of the block containing `u ∈ [0,1]`.
    pub fn block_of(&self, u: f64, cumulative: &[f64]) -> usize {
        cumulative.partition_point(|&c| c <= u).min(self.k() - 1)
    }
}

/// `q_ij = log(1/(1 - p_ij))` of a block graphon.
pub fn q_of(w: &BlockGraphon) -> QMatrix {
    w.q_matrix()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    #[serde(rename = "figure-block")]
    FigureBlock,
    /// `3/4` where `x + y ≤ 1`, `1/2` elsewhere.
    #[serde(rename = "W_L")]
    WL,
    #[serde(rename = "W_R")]
    WR,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::FigureBlock => "figure-block",
            Builtin::WL => "W_L",
            Builtin::WR => "W_R",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "figure-block" => Some(Builtin::FigureBlock),
            "W_L" => Some(Builtin::WL),
            "W_R" => Some(Builtin::WR),
            _ => None,
        }
    }
}

/// A graphon given by a rule rather than by blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneralGraphon {
    Constant { p: f64 },
    Builtin { name: Builtin },
    /// Piecewise constant on the uniform `m × m` grid.
    Grid { values: Vec<Vec<f64>> },
}

impl GeneralGraphon {
    /// Grid graphon from `f` evaluated at the cell midpoints.
    pub fn from_fn(m: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mid = |i: usize| (i as f64 + 0.5) / m as f64;
        let g = GeneralGraphon::Grid {
            values: (0..m).map(|i| (0..m).map(|j| f(mid(i), mid(j))).collect()).collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidGraphon(m));
        match self {
            GeneralGraphon::Constant { p } => {
                if !(0.0..1.0).contains(p) {
                    return invalid(format!("constant value {p} is outside [0, 1)"));
                }
            }
            GeneralGraphon::Builtin { .. } => {}
            GeneralGraphon::Grid { values } => {
                let m = values.len();
                if m == 0 || values.iter().any(|r| r.len() != m) {
                    return invalid("grid must be a nonempty square array".into());
                }
                for i in 0..m {
                    for j in 0..m {
                        let v = values[i][j];
                        if !(0.0..1.0).contains(&v) {
                            return invalid(format!("grid value ({i},{j}) = {v} is outside [0, 1)"));
                        }
                        if (v - values[j][i]).abs() > 1e-12 {
                            return invalid(format!("grid is not symmetric at ({i},{j})"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Essential infimum and supremum over the cell `[a/k,(a+1)/k) × [b/k,(b+1)/k)`.
    pub(crate) fn cell_extrema(&self, a: usize, b: usize, k: usize) -> (f64, f64) {
        match self {
            GeneralGraphon::Constant { p } => (*p, *p),
            GeneralGraphon::Builtin { name: Builtin::WL } => {
                // Corners (a+b)/k and (a+b+2)/k of x + y over the cell.
                let sup = if a + b < k { 0.75 } else { 0.5 };
                let inf = if a + b + 2 > k { 0.5 } else { 0.75 };
                (inf, sup)
            }
            GeneralGraphon::Builtin { name } => {
                let w = match name {
                    Builtin::FigureBlock => BlockGraphon::figure_block(),
                    _ => BlockGraphon::w_r(),
                };
                // Equal masses, so the builtin is a grid of its own size.
                grid_extrema(w.p_rows(), a, b, k)
            }
            GeneralGraphon::Grid { values } => grid_extrema(values, a, b, k),
        }
    }

    /// Resolution below which block approximations are refused (grids only).
    pub(crate) fn grid_size(&self) -> Option<usize> {
        match self {
            GeneralGraphon::Grid { values } => Some(values.len()),
            _ => None,
        }
    }
}

fn grid_extrema(values: &[Vec<f64>], a: usize, b: usize, k: usize) -> (f64, f64) {
    let m = values.len();
    // Grid cell i overlaps [a/k, (a+1)/k) in positive length iff i·k < (a+1)·m and (i+1)·k > a·m.
    let overlap = |a: usize| (0..m).filter(move |&i| i * k < (a + 1) * m && (i + 1) * k > a * m);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in overlap(a) {
        for j in overlap(b) {
            lo = lo.min(values[i][j]);
            hi = hi.max(values[i][j]);
        }
    }
    (lo, hi)
}

/// Block weights `(μ(S_i))_i` of a probability measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BlockMeasure(Vec<f64>);

impl BlockMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidVector("measure has no weights".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidVector(format!("weight {i} = {} is negative", weights[i])));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidVector(format!("weights sum to {total}, not 1")));
        }
        Ok(Self(weights))
    }

    /// Rescales a nonzero nonnegative vector to total mass 1.
    pub fn normalized(v: &[f64]) -> Result<Self> {
        let total: f64 = v.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidVector("cannot normalise a zero vector".into()));
        }
        Self::new(v.iter().map(|x| x / total).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for BlockMeasure {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BlockMeasure> for Vec<f64> {
    fn from(m: BlockMeasure) -> Self {
        m.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Part {
    pub alpha: f64,
    pub weights: BlockMeasure,
}

/// `λ = Σ α_μ μ`: a multi-type colouring strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDecomposition", into = "RawDecomposition")]
pub struct Decomposition {
    parts: Vec<Part>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecomposition {
    parts: Vec<Part>,
}

impl TryFrom<RawDecomposition> for Decomposition {
    type Error = Error;
    fn try_from(raw: RawDecomposition) -> Result<Self> {
        Self::new(raw.parts)
    }
}

impl From<Decomposition> for RawDecomposition {
    fn from(d: Decomposition) -> Self {
        RawDecomposition { parts: d.parts }
    }
}

impl Decomposition {
    /// Checks `α ∈ (0,1]`, `Σ α = 1` and a common block count.
    pub fn new(parts: Vec<Part>) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidDecomposition(m));
        if parts.is_empty() {
            return invalid("no parts".into());
        }
        let k = parts[0].weights.k();
        for (t, part) in parts.iter().enumerate() {
            if !(part.alpha > 0.0 && part.alpha <= 1.0 + MASS_TOLERANCE) {
                return invalid(format!("part {t} has alpha {} outside (0, 1]", part.alpha));
            }
            if part.weights.k() != k {
                return invalid(format!("part {t} has {} weights, expected {k}", part.weights.k()));
            }
        }
        let total: f64 = parts.iter().map(|p| p.alpha).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return invalid(format!("alphas sum to {total}, not 1"));
        }
        Ok(Self { parts })
    }

    /// The single-part strategy: the uniform measure itself.
    pub fn trivial(w: &BlockGraphon) -> Self {
        Self {
            parts: vec![Part {
                alpha: 1.0,
                weights: BlockMeasure(w.masses().to_vec()),
            }],
        }
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn k(&self) -> usize {
        self.parts[0].weights.k()
    }

    /// Checks `Σ α_μ μ(S_i) = λ(S_i)` to `1e-9` per block.
    pub fn validate_for(&self, w: &BlockGraphon) -> Result<()> {
        if self.k() != w.k() {
            return Err(Error::DimensionMismatch {
                expected: w.k(),
                got: self.k(),
            });
        }
        for (i, &mass) in w.masses().iter().enumerate() {
            let got: f64 = self.parts.iter().map(|p| p.alpha * p.weights.weights()[i]).sum();
            if (got - mass).abs() > DECOMPOSITION_TOLERANCE {
                return Err(Error::InvalidDecomposition(format!(
                    "block {i}: parts give mass {got}, graphon has {mass}"
                )));
            }
        }
        Ok(())
    }
}
