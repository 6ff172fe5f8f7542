//! Minimal vector systems: `w_*(x) = inf Σ_t w(x⁽ᵗ⁾)` over `Σ_t x⁽ᵗ⁾ = x`.
//!
//! The search runs on `x / ‖x‖` restricted to its positive coordinates, which
//! is harmless because `w` is 1-homogeneous. Vector `t` takes the share
//! `σ_ti` of coordinate `i`, with `(σ_ti)_t` a softmax of free logits (the
//! last vector's logit pinned at zero), so every trial point sums to `x`
//! exactly. Candidates seeding the local search:
//!
//! - the one-vector system `{x}` (cost `w(x)`);
//! - the singleton split `{x_i e_i}` (cost `q̂(x)‖x‖`);
//! - caller-supplied systems, reduced to at most `m` vectors;
//! - for `m ≤ 3` positive coordinates, every pattern of distinct supports
//!   whose shared coordinates leave at most two free split parameters,
//!   each refined by grid search and a 1-D/2-D local solve;
//! - the best hard assignments of coordinates to vectors.
//!
//! Start 0 polishes the best candidate; further starts take the next
//! candidates, then Dirichlet-random shares. The winner gets a few more
//! local solves with shrinking steps. Each start draws from its own
//! random stream, so the outcome does not depend on thread scheduling.

use super::corner::{w_fast, w_value, Scratch};
use super::nelder_mead::{minimize, NelderMeadOptions};
use super::{w_star_bounds, QMatrix};
use crate::rng::{stream, MULTISTART_BASE};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest `k` accepted by [`w_star`].
pub const MAX_W_STAR_K: usize = 12;

const LOGIT_CAP: f64 = 40.0;
const SNAP: f64 = 1e-9;
const POLISH_ROUNDS: usize = 6;
const MAX_HARD_ASSIGNMENTS: usize = 50_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Number of local searches.
    pub multistart: usize,
    /// Simplex iterations per local search.
    pub max_iterations: usize,
    /// A search stops once its best value improved by less than
    /// `stall_tolerance` over `stall_iterations` iterations.
    pub stall_iterations: usize,
    pub stall_tolerance: f64,
    pub seed: u64,
    /// Enumerate support patterns when at most three coordinates are positive.
    pub exact_small_k: bool,
    /// Slack (relative to `max(1, upper bound)`) allowed in the final bracket check.
    pub bracket_tolerance: f64,
    /// Cap on the number of vectors; defaults to the number of positive coordinates.
    pub max_vectors: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            multistart: 64,
            max_iterations: 20_000,
            stall_iterations: 200,
            stall_tolerance: 1e-10,
            seed: 0,
            exact_small_k: true,
            bracket_tolerance: 1e-9,
            max_vectors: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("optimizer: {what}")));
        if self.multistart == 0 {
            return bad("multistart must be at least 1");
        }
        if self.max_iterations == 0 || self.stall_iterations == 0 {
            return bad("iteration limits must be positive");
        }
        if !(self.stall_tolerance >= 0.0 && self.stall_tolerance.is_finite()) {
            return bad("stall_tolerance must be a nonnegative number");
        }
        if !(self.bracket_tolerance >= 0.0 && self.bracket_tolerance.is_finite()) {
            return bad("bracket_tolerance must be a nonnegative number");
        }
        if self.max_vectors == Some(0) {
            return bad("max_vectors must be at least 1");
        }
        Ok(())
    }
}

/// Vectors summing to `target`, with the recomputed `Σ_t w(x⁽ᵗ⁾)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorSystem {
    pub vectors: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub total_cost: f64,
    /// Whether the support-pattern enumeration took part in the search.
    pub enumerated: bool,
}

impl VectorSystem {
    /// `(‖v‖, v / ‖v‖)` for each vector.
    pub fn types(&self) -> Vec<(f64, Vec<f64>)> {
        self.vectors
            .iter()
            .map(|v| {
                let n: f64 = v.iter().sum();
                (n, v.iter().map(|c| c / n).collect())
            })
            .collect()
    }

    /// Merges vectors with identical supports and recomputes the cost.
    pub fn merge_equal_supports(&self, q: &QMatrix) -> Result<VectorSystem> {
        let mut groups: Vec<(Vec<bool>, Vec<f64>)> = Vec::new();
        for v in &self.vectors {
            let support: Vec<bool> = v.iter().map(|&c| c > 0.0).collect();
            match groups.iter_mut().find(|(s, _)| *s == support) {
                Some((_, acc)) => acc.iter_mut().zip(v).for_each(|(a, b)| *a += b),
                None => groups.push((support, v.clone())),
            }
        }
        let vectors: Vec<Vec<f64>> = groups.into_iter().map(|(_, v)| v).collect();
        Ok(VectorSystem {
            total_cost: system_cost(&vectors, q)?,
            vectors,
            target: self.target.clone(),
            enumerated: self.enumerated,
        })
    }
}

/// `Σ_t w(v_t)`.
pub fn system_cost(vectors: &[Vec<f64>], q: &QMatrix) -> Result<f64> {
    vectors.iter().map(|v| w_value(v, q)).sum()
}

/// `w_*(x)` with a witness system of at most `k` vectors.
pub fn w_star(x: &[f64], q: &QMatrix, cfg: &OptimizerConfig) -> Result<VectorSystem> {
    w_star_seeded(x, q, cfg, &[])
}

/// [`w_star`] with extra candidate systems, each summing to `x`.
///
/// The result never costs more than the best seed (after reduction to at
/// most `k` vectors), which makes subadditivity checkable by construction.
pub fn w_star_seeded(x: &[f64], q: &QMatrix, cfg: &OptimizerConfig, seeds: &[Vec<Vec<f64>>]) -> Result<VectorSystem> {
    cfg.validate()?;
    q.check_len(x.len())?;
    if q.k() > MAX_W_STAR_K {
        return Err(Error::TooLarge {
            k: q.k(),
            max: MAX_W_STAR_K,
            what: "w_star",
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidVector(format!("component {i} = {} is not nonnegative", x[i])));
    }

    let norm: f64 = x.iter().sum();
    let active: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    if active.is_empty() {
        return Ok(VectorSystem {
            vectors: Vec::new(),
            target: x.to_vec(),
            total_cost: 0.0,
            enumerated: true,
        });
    }
    let m = active.len();
    let nvec = cfg.max_vectors.unwrap_or(m).min(m);
    let problem = Problem {
        q: q.principal(&active),
        x: active.iter().map(|&i| x[i] / norm).collect(),
        m,
        nvec,
    };

    let mut reduced_seeds = Vec::new();
    for (s, seed) in seeds.iter().enumerate() {
        let mut r = Vec::with_capacity(seed.len());
        for v in seed {
            q.check_len(v.len())?;
            if v.iter().enumerate().any(|(i, &c)| !(c >= 0.0) || (c > 0.0 && x[i] == 0.0)) {
                return Err(Error::InvalidArgument(format!("seed system {s} is not supported on x")));
            }
            r.push(active.iter().map(|&i| v[i] / norm).collect::<Vec<f64>>());
        }
        for (j, &xi) in problem.x.iter().enumerate() {
            let sum: f64 = r.iter().map(|v| v[j]).sum();
            if (sum - xi).abs() > 1e-9 * xi.max(1.0) {
                return Err(Error::InvalidArgument(format!("seed system {s} does not sum to x")));
            }
        }
        reduced_seeds.push(r);
    }

    let enumerated = cfg.exact_small_k && m <= 3;
    let best = problem.search(cfg, &reduced_seeds, enumerated);
    let best = problem.post_process(best);

    // Back to the original scale and coordinates.
    let mut vectors: Vec<Vec<f64>> = best
        .iter()
        .map(|v| {
            let mut full = vec![0.0; x.len()];
            for (j, &i) in active.iter().enumerate() {
                full[i] = v[j] * norm;
            }
            full
        })
        .collect();
    fix_sums(&mut vectors, x);
    let total_cost = system_cost(&vectors, q)?;

    let (lower, upper_split) = w_star_bounds(x, q)?;
    let w = w_value(x, q)?;
    let upper = if nvec == m { upper_split.min(w) } else { w };
    let tol = cfg.bracket_tolerance * upper.max(1.0);
    if total_cost < lower - tol || total_cost > upper + tol {
        return Err(Error::Bracketing(format!(
            "cost {total_cost} outside [{lower}, {upper}] for x = {x:?}"
        )));
    }
    Ok(VectorSystem {
        vectors,
        target: x.to_vec(),
        total_cost,
        enumerated,
    })
}

/// Carathéodory reduction: rewrites a system as at most `k` vectors without
/// increasing its cost (and without changing the sum).
pub fn reduce_system(vectors: &[Vec<f64>], q: &QMatrix) -> Result<Vec<Vec<f64>>> {
    for v in vectors {
        q.check_len(v.len())?;
    }
    let mut scratch = Scratch::default();
    Ok(caratheodory(vectors.to_vec(), q, &mut scratch))
}

fn caratheodory(vectors: Vec<Vec<f64>>, q: &QMatrix, scratch: &mut Scratch) -> Vec<Vec<f64>> {
    let dim = q.k();
    // Work with weights a_t and unit-norm types u_t; cost = Σ a_t w(u_t).
    let mut weights = Vec::new();
    let mut types = Vec::new();
    for v in vectors {
        let n: f64 = v.iter().sum();
        if n > 0.0 {
            weights.push(n);
            types.push(v.iter().map(|c| c / n).collect::<Vec<f64>>());
        }
    }
    while types.len() > dim {
        let c = null_vector(&types, dim);
        let costs: Vec<f64> = types.iter().map(|u| w_fast(u, q, scratch)).collect();
        let slope: f64 = c.iter().zip(&costs).map(|(a, b)| a * b).sum();
        let c: Vec<f64> = if slope > 0.0 { c.iter().map(|v| -v).collect() } else { c };
        // The entries of c sum to zero (types have unit norm), so some are negative.
        let (hit, step) = c
            .iter()
            .enumerate()
            .filter(|(_, &ct)| ct < 0.0)
            .map(|(t, &ct)| (t, weights[t] / -ct))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("null vector has a negative entry");
        for (w, ct) in weights.iter_mut().zip(&c) {
            *w = (*w + step * ct).max(0.0);
        }
        weights[hit] = 0.0;
        let keep: Vec<usize> = (0..types.len()).filter(|&t| weights[t] > 0.0).collect();
        types = keep.iter().map(|&t| types[t].clone()).collect();
        weights = keep.iter().map(|&t| weights[t]).collect();
    }
    types
        .into_iter()
        .zip(weights)
        .map(|(u, a)| u.into_iter().map(|c| c * a).collect())
        .collect()
}

/// A nonzero `c` with `Σ_t c_t u_t = 0`, for more vectors than dimensions.
fn null_vector(types: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let n = types.len();
    // a[i][t] = u_t[i]; reduced row echelon form with partial pivoting.
    let mut a: Vec<Vec<f64>> = (0..dim).map(|i| types.iter().map(|u| u[i]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == dim {
            break;
        }
        let (p, mag) = (row..dim)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if mag <= 1e-12 {
            continue;
        }
        a.swap(row, p);
        let pv = a[row][col];
        a[row].iter_mut().for_each(|v| *v /= pv);
        for r in 0..dim {
            if r != row {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..n {
                        a[r][c] -= f * a[row][c];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free = (0..n).find(|c| !pivots.contains(c)).expect("more columns than rows");
    let mut c = vec![0.0; n];
    c[free] = 1.0;
    for (r, &pc) in pivots.iter().enumerate() {
        c[pc] = -a[r][free];
    }
    c
}

/// Pushes rounding residue of each coordinate sum onto its largest entry.
fn fix_sums(vectors: &mut [Vec<f64>], x: &[f64]) {
    for i in 0..x.len() {
        let sum: f64 = vectors.iter().map(|v| v[i]).sum();
        if let Some(t) = (0..vectors.len()).max_by(|&a, &b| vectors[a][i].total_cmp(&vectors[b][i])) {
            vectors[t][i] = (vectors[t][i] + x[i] - sum).max(0.0);
        }
    }
}

/// The search on `x / ‖x‖` restricted to its positive coordinates.
struct Problem {
    q: QMatrix,
    x: Vec<f64>,
    m: usize,
    nvec: usize,
}

#[derive(Clone)]
struct Candidate {
    cost: f64,
    vectors: Vec<Vec<f64>>,
}

impl Problem {
    fn cost(&self, vectors: &[Vec<f64>], scratch: &mut Scratch) -> f64 {
        vectors.iter().map(|v| w_fast(v, &self.q, scratch)).sum()
    }

    fn candidate(&self, vectors: Vec<Vec<f64>>, scratch: &mut Scratch) -> Candidate {
        Candidate {
            cost: self.cost(&vectors, scratch),
            vectors,
        }
    }

    fn dims(&self) -> usize {
        (self.nvec - 1) * self.m
    }

    /// Writes the system for logits `theta` into `out` (`nvec` vectors).
    fn decode(&self, theta: &[f64], out: &mut [Vec<f64>]) {
        let (m, nvec) = (self.m, self.nvec);
        for i in 0..m {
            let logit = |t: usize| if t + 1 == nvec { 0.0 } else { theta[t * m + i].clamp(-LOGIT_CAP, LOGIT_CAP) };
            let top = (0..nvec).map(logit).fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = (0..nvec).map(|t| (logit(t) - top).exp()).sum();
            for (t, v) in out.iter_mut().enumerate() {
                v[i] = self.x[i] * (logit(t) - top).exp() / total;
            }
        }
    }

    /// Logits reproducing `vectors` (padded with zero vectors up to `nvec`).
    fn encode(&self, vectors: &[Vec<f64>]) -> Vec<f64> {
        let (m, nvec) = (self.m, self.nvec);
        let zero = vec![0.0; m];
        let slot = |t: usize| vectors.get(t).unwrap_or(&zero);
        let floor = (-LOGIT_CAP + 10.0).exp();
        let mut theta = vec![0.0; self.dims()];
        for i in 0..m {
            let share = |t: usize| (slot(t)[i] / self.x[i]).max(floor);
            let last = share(nvec - 1).ln();
            for t in 0..nvec - 1 {
                theta[t * m + i] = (share(t).ln() - last).clamp(-LOGIT_CAP, LOGIT_CAP);
            }
        }
        theta
    }

    fn search(&self, cfg: &OptimizerConfig, seeds: &[Vec<Vec<f64>>], enumerate: bool) -> Vec<Vec<f64>> {
        let mut scratch = Scratch::default();
        let mut candidates = vec![self.candidate(vec![self.x.clone()], &mut scratch)];
        if self.m == 1 {
            return candidates.pop().unwrap().vectors;
        }
        if self.nvec == self.m {
            let split = (0..self.m)
                .map(|i| {
                    let mut v = vec![0.0; self.m];
                    v[i] = self.x[i];
                    v
                })
                .collect();
            candidates.push(self.candidate(split, &mut scratch));
        }
        for seed in seeds {
            let reduced = caratheodory(seed.clone(), &self.q, &mut scratch);
            if reduced.len() <= self.nvec {
                candidates.push(self.candidate(reduced, &mut scratch));
            }
        }
        if enumerate {
            candidates.extend(self.support_patterns(&mut scratch));
        }
        candidates.extend(self.hard_assignments(&mut scratch, cfg.multistart));
        // Stable: equal costs keep generation order.
        candidates.sort_by(|a, b| a.cost.total_cmp(&b.cost));

        let opts = |step: f64| NelderMeadOptions {
            step,
            max_iterations: cfg.max_iterations,
            stall_iterations: cfg.stall_iterations,
            stall_tolerance: cfg.stall_tolerance,
            restarts: 2,
            bounds: None,
        };
        let from_candidates = candidates.len().min(cfg.multistart.div_ceil(2)).max(1);
        let results: Vec<Candidate> = (0..cfg.multistart)
            .into_par_iter()
            .map(|s| {
                let (theta0, step) = if s < from_candidates {
                    (self.encode(&candidates[s].vectors), if s == 0 { 0.3 } else { 1.0 })
                } else {
                    (self.random_start(cfg.seed, s as u64), 1.0)
                };
                let mut scratch = Scratch::default();
                let mut buf = vec![vec![0.0; self.m]; self.nvec];
                let r = minimize(
                    |theta: &[f64]| {
                        self.decode(theta, &mut buf);
                        self.cost(&buf, &mut scratch)
                    },
                    &theta0,
                    &opts(step),
                );
                let mut vectors = vec![vec![0.0; self.m]; self.nvec];
                self.decode(&r.x, &mut vectors);
                self.candidate(vectors, &mut scratch)
            })
            .collect();

        let mut best = candidates.swap_remove(0);
        for r in results {
            if r.cost < best.cost {
                best = r;
            }
        }
        self.polish(best, cfg, &opts)
    }

    /// Restarts the local search from the winner with shrinking steps; the
    /// simplex often stalls a little above the bottom of a kinked valley.
    fn polish(&self, mut best: Candidate, cfg: &OptimizerConfig, opts: &dyn Fn(f64) -> NelderMeadOptions) -> Vec<Vec<f64>> {
        let mut scratch = Scratch::default();
        let mut buf = vec![vec![0.0; self.m]; self.nvec];
        let mut step = 0.1;
        for _ in 0..POLISH_ROUNDS {
            let r = minimize(
                |theta: &[f64]| {
                    self.decode(theta, &mut buf);
                    self.cost(&buf, &mut scratch)
                },
                &self.encode(&best.vectors),
                &opts(step),
            );
            let mut vectors = vec![vec![0.0; self.m]; self.nvec];
            self.decode(&r.x, &mut vectors);
            let next = self.candidate(vectors, &mut scratch);
            let gain = best.cost - next.cost;
            if gain > 0.0 {
                best = next;
            }
            if gain <= cfg.stall_tolerance * 1e-3 * best.cost.abs().max(1e-300) {
                step *= 0.3;
            }
        }
        best.vectors
    }

    fn random_start(&self, seed: u64, start: u64) -> Vec<f64> {
        let mut rng = stream(seed, MULTISTART_BASE + start);
        let mut theta = vec![0.0; self.dims()];
        for i in 0..self.m {
            let g: Vec<f64> = (0..self.nvec).map(|_| rng.sample::<f64, _>(Exp1).max(1e-300)).collect();
            let last = g[self.nvec - 1].ln();
            for t in 0..self.nvec - 1 {
                theta[t * self.m + i] = (g[t].ln() - last).clamp(-LOGIT_CAP, LOGIT_CAP);
            }
        }
        theta
    }

    /// Each coordinate wholly in one vector; the best `limit` assignments,
    /// enumerated up to relabelling of vectors.
    fn hard_assignments(&self, scratch: &mut Scratch, limit: usize) -> Vec<Candidate> {
        let (m, nvec) = (self.m, self.nvec);
        let mut out = Vec::new();
        let mut labels = vec![0usize; m];
        let mut visited = 0;
        // Restricted growth strings: labels[i] ≤ 1 + max(labels[..i]).
        fn rec(
            p: &Problem,
            i: usize,
            used: usize,
            labels: &mut Vec<usize>,
            visited: &mut usize,
            out: &mut Vec<Candidate>,
            scratch: &mut Scratch,
        ) {
            if *visited >= MAX_HARD_ASSIGNMENTS {
                return;
            }
            if i == p.m {
                *visited += 1;
                let mut vectors = vec![vec![0.0; p.m]; used];
                for (j, &l) in labels.iter().enumerate() {
                    vectors[l][j] = p.x[j];
                }
                out.push(p.candidate(vectors, scratch));
                return;
            }
            for l in 0..(used + 1).min(p.nvec) {
                labels[i] = l;
                rec(p, i + 1, used.max(l + 1), labels, visited, out, scratch);
            }
        }
        if nvec > 1 {
            rec(self, 0, 0, &mut labels, &mut visited, &mut out, scratch);
        }
        out.sort_by(|a, b| a.cost.total_cmp(&b.cost));
        out.truncate(limit);
        out
    }

    /// Systems with distinct supports whose shared coordinates leave at most
    /// two free split parameters, each optimised over its parameters.
    fn support_patterns(&self, scratch: &mut Scratch) -> Vec<Candidate> {
        let m = self.m;
        let full = (1u32 << m) - 1;
        let subsets: Vec<u32> = (1..=full).collect();
        let mut out = Vec::new();
        let max_parts = self.nvec.min(m);
        let mut chosen = Vec::new();
        fn combos(from: usize, left: usize, subsets: &[u32], chosen: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
            if !chosen.is_empty() {
                visit(chosen);
            }
            if left == 0 {
                return;
            }
            for s in from..subsets.len() {
                chosen.push(subsets[s]);
                combos(s + 1, left - 1, subsets, chosen, visit);
                chosen.pop();
            }
        }
        combos(0, max_parts, &subsets, &mut chosen, &mut |pattern: &[u32]| {
            if pattern.iter().fold(0, |a, s| a | s) != full {
                return;
            }
            let counts: Vec<usize> = (0..m).map(|i| pattern.iter().filter(|&&s| s >> i & 1 == 1).count()).collect();
            let free: usize = counts.iter().map(|c| c - 1).sum();
            if free <= 2 {
                out.push(self.refine_pattern(pattern, &counts, free, scratch));
            }
        });
        out
    }

    fn pattern_system(&self, pattern: &[u32], counts: &[usize], params: &[f64]) -> Vec<Vec<f64>> {
        let mut vectors = vec![vec![0.0; self.m]; pattern.len()];
        let mut next = 0;
        for i in 0..self.m {
            let owners: Vec<usize> = (0..pattern.len()).filter(|&t| pattern[t] >> i & 1 == 1).collect();
            let shares: Vec<f64> = match counts[i] {
                1 => vec![1.0],
                2 => {
                    let s = params[next].clamp(0.0, 1.0);
                    next += 1;
                    vec![s, 1.0 - s]
                }
                _ => {
                    let (u, v) = (params[next].clamp(0.0, 1.0), params[next + 1].clamp(0.0, 1.0));
                    next += 2;
                    vec![u, (1.0 - u) * v, (1.0 - u) * (1.0 - v)]
                }
            };
            for (&t, s) in owners.iter().zip(shares) {
                vectors[t][i] = self.x[i] * s;
            }
        }
        vectors.retain(|v| v.iter().any(|&c| c > 0.0));
        vectors
    }

    fn refine_pattern(&self, pattern: &[u32], counts: &[usize], free: usize, scratch: &mut Scratch) -> Candidate {
        let eval = |p: &[f64], scratch: &mut Scratch| self.cost(&self.pattern_system(pattern, counts, p), scratch);
        let params = match free {
            0 => Vec::new(),
            1 => {
                const GRID: usize = 64;
                let h = 1.0 / GRID as f64;
                let (j, _) = (0..=GRID)
                    .map(|j| (j, eval(&[j as f64 * h], scratch)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                let lo = (j as f64 * h - h).max(0.0);
                let hi = (j as f64 * h + h).min(1.0);
                let s = golden_section(|s| eval(&[s], scratch), lo, hi, 1e-13);
                if eval(&[s], scratch) <= eval(&[j as f64 * h], scratch) {
                    vec![s]
                } else {
                    vec![j as f64 * h]
                }
            }
            _ => {
                const GRID: usize = 23;
                let h = 1.0 / GRID as f64;
                let mut best = (f64::INFINITY, [0.0, 0.0]);
                for a in 0..=GRID {
                    for b in 0..=GRID {
                        let p = [a as f64 * h, b as f64 * h];
                        let v = eval(&p, scratch);
                        if v < best.0 {
                            best = (v, p);
                        }
                    }
                }
                let opts = NelderMeadOptions {
                    step: h,
                    max_iterations: 5_000,
                    stall_iterations: 100,
                    stall_tolerance: 1e-15,
                    restarts: 2,
                    bounds: Some((vec![0.0, 0.0], vec![1.0, 1.0])),
                };
                let mut local = Scratch::default();
                let r = minimize(|p: &[f64]| eval(p, &mut local), &best.1, &opts);
                if r.value <= best.0 {
                    r.x
                } else {
                    best.1.to_vec()
                }
            }
        };
        self.candidate(self.pattern_system(pattern, counts, &params), scratch)
    }

    /// Snaps negligible shares, drops empty vectors, merges equal supports
    /// when that does not cost more, and caps the count at `m`.
    fn post_process(&self, vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let mut scratch = Scratch::default();
        let base = self.cost(&vectors, &mut scratch);
        let accept = |new: f64, old: f64| new <= old + 1e-10 * old.abs().max(1e-300);

        let mut snapped = vectors.clone();
        for i in 0..self.m {
            let owner = (0..snapped.len()).max_by(|&a, &b| snapped[a][i].total_cmp(&snapped[b][i])).unwrap();
            let mut moved = 0.0;
            for (t, v) in snapped.iter_mut().enumerate() {
                if t != owner && v[i] < SNAP * self.x[i] {
                    moved += v[i];
                    v[i] = 0.0;
                }
            }
            snapped[owner][i] += moved;
        }
        let mut current = if accept(self.cost(&snapped, &mut scratch), base) {
            snapped
        } else {
            vectors
        };
        current.retain(|v| v.iter().any(|&c| c > 0.0));

        let mut t = 0;
        while t < current.len() {
            let support = |v: &[f64]| v.iter().map(|&c| c > 0.0).collect::<Vec<bool>>();
            let st = support(&current[t]);
            let mut s = t + 1;
            while s < current.len() {
                if support(&current[s]) == st {
                    let mut trial = current.clone();
                    let other = trial.remove(s);
                    trial[t].iter_mut().zip(&other).for_each(|(a, b)| *a += b);
                    if accept(self.cost(&trial, &mut scratch), self.cost(&current, &mut scratch)) {
                        current = trial;
                        continue;
                    }
                }
                s += 1;
            }
            t += 1;
        }
        if current.len() > self.m {
            current = caratheodory(current, &self.q, &mut scratch);
        }
        current
    }
}

/// Minimises a function of one variable on `[lo, hi]`.
fn golden_section(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}
