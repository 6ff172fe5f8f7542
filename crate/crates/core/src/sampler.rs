//! Samplers for `G(n, W)` and the stochastic block model.
//!
//! Latents come from stream [`rng::LATENTS`], row `i` of the upper triangle
//! from stream `EDGE_BASE + i`, and the type split from [`rng::SPLIT`], so the
//! graph does not depend on the number of threads.

use crate::graphon::{BlockGraphon, Decomposition};
use crate::rng::{self, stream};
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use std::io::{self, Write};

/// Largest vertex count accepted by the samplers.
pub const MAX_VERTICES: usize = 50_000;

/// Symmetric 0/1 matrix stored as full rows of 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_edge(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        iter_bits(self.row(i))
    }
}

/// Indices of the set bits of a word slice, ascending.
pub fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(w * 64 + b)
        })
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledGraph {
    pub n: usize,
    /// The `X_i`; absent for block-model graphs with fixed block sizes.
    pub latents: Option<Vec<f64>>,
    pub blocks: Vec<usize>,
    pub adjacency: BitMatrix,
    pub seed: u64,
}

impl SampledGraph {
    /// A graph from an explicit edge list, for tests and tools.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], blocks: Vec<usize>) -> Result<Self> {
        if blocks.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: blocks.len(),
            });
        }
        let mut adjacency = BitMatrix::new(n);
        for &(i, j) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidArgument(format!("bad edge ({i}, {j}) for n = {n}")));
            }
            adjacency.set_edge(i, j);
        }
        Ok(Self {
            n,
            latents: None,
            blocks,
            adjacency,
            seed: 0,
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::from_edges(n, &edges, vec![0; n]).expect("valid edges")
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edges(n, &[], vec![0; n]).expect("valid edges")
    }

    /// Number of vertices in each of `k` blocks.
    pub fn block_counts(&self, k: usize) -> Vec<usize> {
        let mut counts = vec![0; k];
        for &b in &self.blocks {
            counts[b] += 1;
        }
        counts
    }

    /// The subgraph on `vertices`, relabelled `0..vertices.len()` in order.
    pub fn induced(&self, vertices: &[usize]) -> SampledGraph {
        let m = vertices.len();
        let mut adjacency = BitMatrix::new(m);
        for (a, &u) in vertices.iter().enumerate() {
            for (b, &v) in vertices.iter().enumerate().skip(a + 1) {
                if self.adjacency.get(u, v) {
                    adjacency.set_edge(a, b);
                }
            }
        }
        SampledGraph {
            n: m,
            latents: self.latents.as_ref().map(|l| vertices.iter().map(|&v| l[v]).collect()),
            blocks: vertices.iter().map(|&v| self.blocks[v]).collect(),
            adjacency,
            seed: self.seed,
        }
    }

    /// Header `n <n> seed <seed>`, then one `i j` line per edge with `i < j`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n {} seed {}", self.n, self.seed)?;
        for i in 0..self.n {
            for j in self.adjacency.neighbours(i).filter(|&j| j > i) {
                writeln!(out, "{i} {j}")?;
            }
        }
        Ok(())
    }
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_VERTICES {
        return Err(Error::TooLarge {
            k: n,
            max: MAX_VERTICES,
            what: "vertex count",
        });
    }
    Ok(())
}

/// Upper-triangle edges, one independent stream per row.
fn sample_edges(n: usize, blocks: &[usize], p: &[Vec<f64>], seed: u64) -> BitMatrix {
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, rng::EDGE_BASE + i as u64);
            let pi = &p[blocks[i]];
            (i + 1..n).filter(|&j| rng.random::<f64>() < pi[blocks[j]]).collect()
        })
        .collect();
    let mut adjacency = BitMatrix::new(n);
    for (i, row) in rows.iter().enumerate() {
        for &j in row {
            adjacency.set_edge(i, j);
        }
    }
    adjacency
}

/// `G(n, W)`: uniform latents, edges independent with probability `W(X_i, X_j)`.
pub fn sample_gnw(n: usize, w: &BlockGraphon, seed: u64) -> Result<SampledGraph> {
    check_n(n)?;
    let mut rng = stream(seed, rng::LATENTS);
    let latents: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let cumulative = w.cumulative();
    let blocks: Vec<usize> = latents.iter().map(|&u| w.block_of(u, &cumulative)).collect();
    let adjacency = sample_edges(n, &blocks, w.p_rows(), seed);
    Ok(SampledGraph {
        n,
        latents: Some(latents),
        blocks,
        adjacency,
        seed,
    })
}

/// Block model with fixed block sizes (vertices of block 0 first), `p_ij ∈ [0, 1]`.
pub fn sample_sbm(sizes: &[usize], p: &[Vec<f64>], seed: u64) -> Result<SampledGraph> {
    let k = sizes.len();
    if p.len() != k || p.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidMatrix(format!("P must be {k} x {k}")));
    }
    for i in 0..k {
        for j in 0..k {
            if !(0.0..=1.0).contains(&p[i][j]) || p[i][j] != p[j][i] {
                return Err(Error::InvalidMatrix(format!("P[{i}][{j}] must be a symmetric probability")));
            }
        }
    }
    let n: usize = sizes.iter().sum();
    check_n(n)?;
    let blocks: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
    let adjacency = sample_edges(n, &blocks, p, seed);
    Ok(SampledGraph {
        n,
        latents: None,
        blocks,
        adjacency,
        seed,
    })
}

/// Assigns each vertex a type of `d`: a vertex in block `b` gets type `t`
/// with probability `α_t μ_t(S_b) / λ(S_b)`. Returns the vertex sets by type.
pub fn decomposition_split(g: &SampledGraph, d: &Decomposition, w: &BlockGraphon, seed: u64) -> Result<Vec<Vec<usize>>> {
    d.validate_for(w)?;
    let k = w.k();
    if let Some(&b) = g.blocks.iter().find(|&&b| b >= k) {
        return Err(Error::InvalidArgument(format!("vertex block {b} out of range for k = {k}")));
    }
    let parts = d.parts();
    // Cumulative posterior over types for each block.
    let posterior: Vec<Vec<f64>> = (0..k)
        .map(|b| {
            let share: Vec<f64> = parts.iter().map(|p| p.alpha * p.weights.weights()[b] / w.masses()[b]).collect();
            let mut acc = 0.0;
            let mut c: Vec<f64> = share
                .iter()
                .map(|s| {
                    acc += s;
                    acc
                })
                .collect();
            // The validated masses make acc = 1 up to 1e-9; the last type
            // present in block b absorbs the gap.
            let last = share.iter().rposition(|&s| s > 0.0).unwrap_or(share.len() - 1);
            c[last..].iter_mut().for_each(|v| *v = f64::INFINITY);
            c
        })
        .collect();
    let mut rng = stream(seed, rng::SPLIT);
    let mut out = vec![Vec::new(); parts.len()];
    for v in 0..g.n {
        let u: f64 = rng.random();
        let t = posterior[g.blocks[v]].partition_point(|&c| c <= u);
        out[t].push(v);
    }
    Ok(out)
}
