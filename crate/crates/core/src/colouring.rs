//! Colouring heuristics: DSATUR, balanced class extraction and the
//! multi-type strategies built on a measure decomposition.
//!
//! Colour counts are heuristic upper bounds on `χ`; nothing here is exact.

use crate::graphon::{phi_mu, BlockGraphon, BlockMeasure, Decomposition};
use crate::rng::{self, stream};
use crate::sampler::{decomposition_split, iter_bits, SampledGraph};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Colouring {
    pub assignment: Vec<usize>,
    pub num_colours: usize,
}

impl Colouring {
    /// Counts the distinct colours of `assignment`.
    pub fn new(assignment: Vec<usize>) -> Self {
        let mut seen = assignment.clone();
        seen.sort_unstable();
        seen.dedup();
        Self {
            num_colours: seen.len(),
            assignment,
        }
    }

    /// One `vertex colour` line per vertex.
    pub fn write_lines<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for (v, c) in self.assignment.iter().enumerate() {
            writeln!(out, "{v} {c}")?;
        }
        Ok(())
    }
}

/// Whether no edge joins two vertices of the same colour.
pub fn verify_colouring(g: &SampledGraph, c: &Colouring) -> bool {
    c.assignment.len() == g.n
        && (0..g.n).all(|i| g.adjacency.neighbours(i).all(|j| c.assignment[i] != c.assignment[j]))
}

/// DSATUR: colour the vertex seeing the most distinct colours next (ties:
/// larger degree, then smaller index) with its smallest free colour.
pub fn dsatur(g: &SampledGraph) -> Colouring {
    let n = g.n;
    let degree: Vec<usize> = (0..n).map(|v| g.adjacency.degree(v)).collect();
    let mut colour = vec![usize::MAX; n];
    // seen[v] is a growable bitset of colours adjacent to v.
    let mut seen: Vec<Vec<u64>> = vec![Vec::new(); n];
    let mut saturation = vec![0usize; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| colour[v] == usize::MAX)
            .max_by(|&a, &b| {
                saturation[a]
                    .cmp(&saturation[b])
                    .then(degree[a].cmp(&degree[b]))
                    .then(b.cmp(&a))
            })
            .expect("an uncoloured vertex remains");
        let c = first_free(&seen[v]);
        colour[v] = c;
        for u in g.adjacency.neighbours(v) {
            if colour[u] == usize::MAX {
                let word = c / 64;
                if seen[u].len() <= word {
                    seen[u].resize(word + 1, 0);
                }
                if seen[u][word] >> (c % 64) & 1 == 0 {
                    seen[u][word] |= 1 << (c % 64);
                    saturation[u] += 1;
                }
            }
        }
    }
    Colouring::new(colour)
}

fn first_free(bits: &[u64]) -> usize {
    bits.iter()
        .position(|&w| w != u64::MAX)
        .map(|i| i * 64 + (!bits[i]).trailing_zeros() as usize)
        .unwrap_or(bits.len() * 64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalancedConfig {
    /// Candidate classes built per colour; the largest is kept.
    pub restarts: usize,
    /// Extra vertices a block may contribute beyond its rounded quota.
    pub slack: usize,
    pub seed: u64,
}

impl Default for BalancedConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            slack: 1,
            seed: 0,
        }
    }
}

/// Colours `g` with independent sets whose block composition follows the
/// block masses of `w`.
pub fn balanced_colour(g: &SampledGraph, w: &BlockGraphon, cfg: &BalancedConfig) -> Result<Colouring> {
    let target = BlockMeasure::new(w.masses().to_vec())?;
    let mut rng = stream(cfg.seed, rng::COLOUR_BASE);
    let assignment = balanced_classes(g, &target, w, g.n, cfg, &mut rng)?;
    Ok(Colouring::new(assignment))
}

/// Greedy balanced colouring of `g` against `target`. Block `b` may hold
/// `round(ω_b·max(aim, size + 1)) + slack` vertices of a class, where the aim
/// is `2 ln n_ref / φ(target, W)`; a lone block is never capped.
fn balanced_classes(
    g: &SampledGraph,
    target: &BlockMeasure,
    w: &BlockGraphon,
    n_ref: usize,
    cfg: &BalancedConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let n = g.n;
    let k = w.k();
    if let Some(&b) = g.blocks.iter().find(|&&b| b >= k) {
        return Err(Error::InvalidArgument(format!("vertex block {b} out of range for k = {k}")));
    }
    let omega = target.weights();
    let phi = phi_mu(target, w)?;
    let aim = if phi > 0.0 && n_ref > 1 {
        2.0 * (n_ref as f64).ln() / phi
    } else {
        f64::INFINITY
    };
    let slack = cfg.slack as f64;

    let words = n.div_ceil(64);
    let mut block_mask = vec![vec![0u64; words]; k];
    for v in 0..n {
        block_mask[g.blocks[v]][v / 64] |= 1 << (v % 64);
    }
    let mut uncoloured = vec![0u64; words];
    for v in 0..n {
        uncoloured[v / 64] |= 1 << (v % 64);
    }
    let mut colour = vec![usize::MAX; n];
    let mut next_colour = 0;
    let mut remaining = n;
    let restarts = cfg.restarts.max(1);
    let mut candidates = vec![0u64; words];
    let mut scratch = vec![0u64; words];
    while remaining > 0 {
        let mut best: Vec<usize> = Vec::new();
        for _ in 0..restarts {
            candidates.copy_from_slice(&uncoloured);
            let class = extract_class(g, omega, aim, slack, &block_mask, &mut candidates, &mut scratch, rng);
            if class.len() > best.len() {
                best = class;
            }
        }
        for &v in &best {
            colour[v] = next_colour;
            uncoloured[v / 64] &= !(1 << (v % 64));
        }
        remaining -= best.len();
        next_colour += 1;
    }
    Ok(colour)
}

/// One independent set: repeatedly add a random candidate from the block
/// furthest behind its share, until every block is exhausted or full.
fn extract_class(
    g: &SampledGraph,
    omega: &[f64],
    aim: f64,
    slack: f64,
    block_mask: &[Vec<u64>],
    candidates: &mut [u64],
    scratch: &mut [u64],
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let k = omega.len();
    let mut count = vec![0usize; k];
    let mut open: Vec<bool> = (0..k).map(|b| omega[b] > 0.0 || has_any(candidates, &block_mask[b])).collect();
    let mut class = Vec::new();
    loop {
        // Blocks without target weight only join once the weighted ones close.
        let weighted_open = (0..k).any(|b| open[b] && omega[b] > 0.0);
        let pick = (0..k)
            .filter(|&b| open[b] && (omega[b] > 0.0 || !weighted_open))
            .min_by(|&a, &b| {
                let ra = count[a] as f64 / omega[a].max(f64::MIN_POSITIVE);
                let rb = count[b] as f64 / omega[b].max(f64::MIN_POSITIVE);
                ra.total_cmp(&rb).then(a.cmp(&b))
            });
        let Some(b) = pick else { break };
        for ((s, c), m) in scratch.iter_mut().zip(candidates.iter()).zip(&block_mask[b]) {
            *s = c & m;
        }
        let available: usize = scratch.iter().map(|w| w.count_ones() as usize).sum();
        let quota = (omega[b] * aim.max(class.len() as f64 + 1.0)).round() + slack;
        if available == 0 || count[b] as f64 >= quota {
            open[b] = false;
            continue;
        }
        let v = iter_bits(scratch).nth(rng.random_range(0..available)).expect("within count");
        class.push(v);
        count[b] += 1;
        candidates[v / 64] &= !(1 << (v % 64));
        for (c, row) in candidates.iter_mut().zip(g.adjacency.row(v)) {
            *c &= !row;
        }
    }
    class
}

fn has_any(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

/// Splits the vertices by type of `d`, colours each part with balanced
/// classes for its own measure, and uses disjoint palettes.
pub fn strategy_colour(
    g: &SampledGraph,
    d: &Decomposition,
    w: &BlockGraphon,
    cfg: &BalancedConfig,
) -> Result<(Colouring, Vec<usize>)> {
    let parts = decomposition_split(g, d, w, cfg.seed)?;
    let mut assignment = vec![usize::MAX; g.n];
    let mut offset = 0;
    let mut per_part = Vec::with_capacity(parts.len());
    for (t, (vertices, part)) in parts.iter().zip(d.parts()).enumerate() {
        let sub = g.induced(vertices);
        let mut rng = stream(cfg.seed, rng::COLOUR_BASE + t as u64);
        let local = balanced_classes(&sub, &part.weights, w, g.n, cfg, &mut rng)?;
        let used = local.iter().map(|c| c + 1).max().unwrap_or(0);
        for (&v, c) in vertices.iter().zip(local) {
            assignment[v] = offset + c;
        }
        offset += used;
        per_part.push(used);
    }
    Ok((Colouring::new(assignment), per_part))
}

/// Largest independent set found by randomised min-degree greedy over
/// `restarts` runs, and `⌈n / α̂⌉`.
///
/// `⌈n / α̂⌉` is only a heuristic estimate of a lower bound on `χ`: it is
/// rigorous when `α̂ ≥ α(G)`, which greedy search cannot certify.
pub fn independence_lower_bound(g: &SampledGraph, restarts: usize, seed: u64) -> (usize, usize) {
    let n = g.n;
    if n == 0 {
        return (0, 0);
    }
    let words = n.div_ceil(64);
    let mut best = 0;
    for r in 0..restarts.max(1) {
        let mut rng = stream(seed, rng::COLOUR_BASE + (1 << 24) + r as u64);
        let mut cand = vec![0u64; words];
        for v in 0..n {
            cand[v / 64] |= 1 << (v % 64);
        }
        let mut size = 0;
        loop {
            let mut low = usize::MAX;
            let mut ties = Vec::new();
            for v in iter_bits(&cand) {
                let d: usize = cand
                    .iter()
                    .zip(g.adjacency.row(v))
                    .map(|(c, r)| (c & r).count_ones() as usize)
                    .sum();
                if d < low {
                    low = d;
                    ties.clear();
                }
                if d == low {
                    ties.push(v);
                }
            }
            if ties.is_empty() {
                break;
            }
            let v = ties[rng.random_range(0..ties.len())];
            size += 1;
            cand[v / 64] &= !(1 << (v % 64));
            for (c, row) in cand.iter_mut().zip(g.adjacency.row(v)) {
                *c &= !row;
            }
        }
        best = best.max(size);
    }
    (best, n.div_ceil(best))
}
