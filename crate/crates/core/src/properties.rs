//! Randomised property suites over `w`, `w_*` and the graphon coefficients.
//!
//! Every trial draws its instance from its own stream, so a report depends
//! only on `(seed, trials)` and not on scheduling.

use crate::graphon::{perturb, phi, phi_mu, phi_star, stability_bound, BlockGraphon, BlockMeasure};
use crate::qcore::{
    maximizing_corners, pseudodefinite_check, rayleigh_ratio, w_grid_oracle, w_star, w_star_seeded, w_value, OptimizerConfig,
    QMatrix,
};
use crate::rng::{self, stream};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Suite names, in report order.
pub const SUITES: [&str; 10] = [
    "scaling",
    "monotonicity",
    "corner_attainment",
    "triangle",
    "nesting",
    "identity",
    "pseudodefinite_equality",
    "sandwich",
    "stability",
    "perturbation",
];

/// Slack for optimiser-vs-optimiser comparisons of `φ_*`.
const OPTIMIZER_SLACK: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub passed: bool,
    /// Message of the lowest-numbered failing trial.
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

/// Runs every suite with `trials` instances each; `trials = 0` gives an
/// empty report.
pub fn run_suites(seed: u64, trials: usize) -> Result<PropertyReport> {
    let suites = if trials == 0 {
        Vec::new()
    } else {
        SUITES.iter().map(|s| run_suite(s, seed, trials)).collect::<Result<Vec<_>>>()?
    };
    Ok(PropertyReport {
        seed,
        trials,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

/// Runs one named suite.
pub fn run_suite(name: &str, seed: u64, trials: usize) -> Result<SuiteReport> {
    let index = SUITES
        .iter()
        .position(|s| *s == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown property suite {name:?}")))?;
    let trial: fn(&mut ChaCha8Rng, u64) -> Outcome = match index {
        0 => scaling,
        1 => monotonicity,
        2 => corner_attainment,
        3 => triangle,
        4 => nesting,
        5 => identity,
        6 => pseudodefinite_equality,
        7 => sandwich,
        8 => stability,
        _ => perturbation,
    };
    let outcomes: Vec<Option<String>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let id = rng::PROPERTY_BASE + ((index as u64) << 24) + t as u64;
            let mut r = stream(seed, id);
            // Optimiser seeds are derived from the trial stream too.
            let opt_seed = r.random();
            match trial(&mut r, opt_seed) {
                Ok(()) => None,
                Err(msg) => Some(format!("trial {t}: {msg}")),
            }
        })
        .collect();
    let failures = outcomes.iter().flatten().count();
    Ok(SuiteReport {
        name: name.to_string(),
        trials,
        failures,
        passed: failures == 0,
        first_failure: outcomes.into_iter().flatten().next(),
    })
}

type Outcome = std::result::Result<(), String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{} error: {e}", e.kind()))
}

fn optimizer(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        seed,
        ..Default::default()
    }
}

fn random_q(r: &mut ChaCha8Rng, k: usize) -> QMatrix {
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = if r.random_bool(0.15) { 0.0 } else { r.random_range(0.0..2.0) };
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    QMatrix::new(m).expect("symmetric nonnegative")
}

fn random_x(r: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k)
        .map(|_| if r.random_bool(0.15) { 0.0 } else { r.random_range(0.01..1.0) })
        .collect()
}

fn random_measure(r: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k).map(|_| r.random_range(0.05..1.0)).collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

fn random_graphon(r: &mut ChaCha8Rng, k: usize, top: f64) -> BlockGraphon {
    let masses = random_measure(r, k);
    let mut p = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = r.random_range(0.0..top);
            p[i][j] = v;
            p[j][i] = v;
        }
    }
    let mut w = BlockGraphon::new(masses.clone(), p.clone());
    // Rounding can leave the masses a hair off 1; renormalise once more.
    if w.is_err() {
        let total: f64 = masses.iter().sum();
        w = BlockGraphon::new(masses.iter().map(|m| m / total).collect(), p);
    }
    w.expect("valid random graphon")
}

/// `w(sx) = s·w(x)` and the same for `w_*`.
fn scaling(r: &mut ChaCha8Rng, seed: u64) -> Outcome {
    let k = r.random_range(1..=4);
    let q = random_q(r, k);
    let x = random_x(r, k);
    let s: f64 = 10.0 * (1.0 - r.random::<f64>());
    let sx: Vec<f64> = x.iter().map(|v| s * v).collect();
    let (w1, ws) = (lift(w_value(&x, &q))?, lift(w_value(&sx, &q))?);
    check((ws - s * w1).abs() <= 1e-9 * (s * w1).max(1.0), || format!("w: {ws} vs {s}·{w1}"))?;
    let cfg = optimizer(seed);
    let c1 = lift(w_star(&x, &q, &cfg))?.total_cost;
    let cs = lift(w_star(&sx, &q, &cfg))?.total_cost;
    check((cs - s * c1).abs() <= 1e-9 * (s * c1).max(1.0), || format!("w_*: {cs} vs {s}·{c1}"))
}

/// `x' ≤ x` componentwise gives `w(x') ≤ w(x)`.
fn monotonicity(r: &mut ChaCha8Rng, _: u64) -> Outcome {
    let k = r.random_range(1..=8);
    let q = random_q(r, k);
    let x = random_x(r, k);
    let lower: Vec<f64> = x
        .iter()
        .map(|v| if r.random_bool(0.2) { 0.0 } else { v * r.random::<f64>() })
        .collect();
    let (a, b) = (lift(w_value(&lower, &q))?, lift(w_value(&x, &q))?);
    check(a <= b + 1e-12, || format!("w(x') = {a} > w(x) = {b}"))
}

/// No grid point beats the best corner, and corners are grid points.
fn corner_attainment(r: &mut ChaCha8Rng, _: u64) -> Outcome {
    let k = r.random_range(1..=3);
    let q = random_q(r, k);
    let x = random_x(r, k);
    let corner = lift(w_value(&x, &q))?;
    for res in [1, 2, 4, 8] {
        let grid = lift(w_grid_oracle(&x, &q, res))?;
        check(grid <= corner * (1.0 + 1e-12) + 1e-15, || format!("grid({res}) = {grid} > corner {corner}"))?;
        check((corner - grid).abs() <= 1e-12 * corner.max(1.0), || {
            format!("grid({res}) = {grid} misses corner {corner}")
        })?;
    }
    Ok(())
}

/// `w_*(x + x') ≤ w_*(x) + w_*(x')` once the optimiser is seeded with both witnesses.
fn triangle(r: &mut ChaCha8Rng, seed: u64) -> Outcome {
    let k = r.random_range(2..=4);
    let q = random_q(r, k);
    let (x, y) = (random_x(r, k), random_x(r, k));
    let cfg = optimizer(seed);
    let a = lift(w_star(&x, &q, &cfg))?;
    let b = lift(w_star(&y, &q, &cfg))?;
    let sum: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u + v).collect();
    let seedsys: Vec<Vec<f64>> = a.vectors.iter().chain(&b.vectors).cloned().collect();
    let c = lift(w_star_seeded(&sum, &q, &cfg, &[seedsys]))?;
    check(c.total_cost <= a.total_cost + b.total_cost + 1e-9, || {
        format!("w_*(x+x') = {} > {} + {}", c.total_cost, a.total_cost, b.total_cost)
    })
}

/// The componentwise minimum of two maximising corners also maximises,
/// unless it is zero. Integer entries make ties common.
fn nesting(r: &mut ChaCha8Rng, _: u64) -> Outcome {
    let k = r.random_range(2..=5);
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = r.random_range(0..=3) as f64;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    let q = lift(QMatrix::new(m))?;
    let x: Vec<f64> = (0..k).map(|_| r.random_range(1..=3) as f64).collect();
    let corners = lift(maximizing_corners(&x, &q))?;
    let best = lift(w_value(&x, &q))?;
    for a in &corners {
        for b in &corners {
            let meet: Vec<f64> = a.vector.iter().zip(&b.vector).map(|(u, v)| u.min(*v)).collect();
            // Disjoint maximisers have the zero vector as meet, whose ratio is 0 by convention.
            if meet.iter().all(|&v| v == 0.0) {
                continue;
            }
            let v = lift(rayleigh_ratio(&meet, &q))?;
            check(v >= best - 1e-12 * best.max(1.0), || {
                format!("meet of {:?} and {:?} has ratio {v} < {best}", a.support, b.support)
            })?;
        }
    }
    Ok(())
}

/// `r(z) + r(z') - r(z+z')` equals the weighted quadratic form of the
/// difference of the normalised vectors.
fn identity(r: &mut ChaCha8Rng, _: u64) -> Outcome {
    let k = r.random_range(1..=6);
    let q = random_q(r, k);
    let draw = |r: &mut ChaCha8Rng| loop {
        let v = random_x(r, k);
        if v.iter().any(|&c| c > 0.0) {
            break v;
        }
    };
    let (z, y) = (draw(r), draw(r));
    let (nz, ny): (f64, f64) = (z.iter().sum(), y.iter().sum());
    let diff: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a / nz - b / ny).collect();
    let lhs = nz * ny / (nz + ny) * q.quadratic_form(&diff);
    let sum: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a + b).collect();
    let terms = [lift(rayleigh_ratio(&z, &q))?, lift(rayleigh_ratio(&y, &q))?, lift(rayleigh_ratio(&sum, &q))?];
    let rhs = terms[0] + terms[1] - terms[2];
    // The right side cancels; measure against the size of its terms.
    let scale = terms.iter().fold(1e-300f64, |m, t| m.max(t.abs()));
    check((lhs - rhs).abs() <= 1e-10 * scale, || format!("{lhs} vs {rhs}"))
}

/// `Q = cJ + D + Σ vvᵀ` with nonnegative `v` is pseudodefinite, and then
/// `w_* = w`. Random matrices that pass the check are tested too.
fn pseudodefinite_equality(r: &mut ChaCha8Rng, seed: u64) -> Outcome {
    let k = r.random_range(1..=4);
    let q = if r.random_bool(0.75) {
        let c = r.random_range(0.0..1.0);
        let d: Vec<f64> = (0..k).map(|_| r.random_range(0.0..1.0)).collect();
        let vs: Vec<Vec<f64>> = (0..r.random_range(0..=2)).map(|_| random_x(r, k)).collect();
        let q = lift(QMatrix::from_fn(k, |i, j| {
            c + if i == j { d[i] } else { 0.0 } + vs.iter().map(|v| v[i] * v[j]).sum::<f64>()
        }))?;
        let full: Vec<usize> = (0..k).collect();
        check(lift(pseudodefinite_check(&q, &full))?, || "constructed matrix fails the check".into())?;
        q
    } else {
        let q = random_q(r, k);
        let full: Vec<usize> = (0..k).collect();
        if !lift(pseudodefinite_check(&q, &full))? {
            return Ok(());
        }
        q
    };
    let x = random_x(r, k);
    let w = lift(w_value(&x, &q))?;
    let s = lift(w_star(&x, &q, &optimizer(seed)))?.total_cost;
    check((s - w).abs() <= 1e-8, || format!("w_* = {s}, w = {w}"))
}

/// `log 1/(1-min p) ≤ φ_* ≤ φ ≤ log 1/(1-max p)`, and every `φ(μ, W)`
/// lies between the outer two.
fn sandwich(r: &mut ChaCha8Rng, seed: u64) -> Outcome {
    let k = r.random_range(1..=4);
    let w = random_graphon(r, k, 0.95);
    let lo = -(-w.min_p()).ln_1p();
    let hi = -(-w.max_p()).ln_1p();
    let balanced = lift(phi(&w))?.value;
    let star = lift(phi_star(&w, &optimizer(seed)))?.value;
    check(lo <= star + 1e-9, || format!("lower {lo} > φ_* {star}"))?;
    check(star <= balanced + 1e-9, || format!("φ_* {star} > φ {balanced}"))?;
    check(balanced <= hi + 1e-12, || format!("φ {balanced} > upper {hi}"))?;
    for _ in 0..4 {
        let mu = lift(BlockMeasure::new(random_measure(r, k)))?;
        let v = lift(phi_mu(&mu, &w))?;
        check(lo - 1e-12 <= v && v <= hi + 1e-12, || format!("φ(μ) = {v} outside [{lo}, {hi}]"))?;
    }
    Ok(())
}

/// The three stability bounds, on a graphon and a perturbation of it that
/// is small except on a random set of blocks.
fn stability(r: &mut ChaCha8Rng, seed: u64) -> Outcome {
    let k = r.random_range(1..=3);
    let w = random_graphon(r, k, 0.9);
    let bad: Vec<bool> = (0..k).map(|_| r.random_bool(0.3)).collect();
    let mut p = w.p_rows().to_vec();
    for i in 0..k {
        for j in i..k {
            let spread = if bad[i] || bad[j] { 0.5 } else { 0.05 };
            let v = (p[i][j] + r.random_range(-spread..spread)).clamp(0.0, 0.9);
            p[i][j] = v;
            p[j][i] = v;
        }
    }
    let w2 = lift(BlockGraphon::new(w.masses().to_vec(), p))?;
    let eps = 1.0 - w.max_p().max(w2.max_p());
    let diff = |i: usize, j: usize| (w.p(i, j) - w2.p(i, j)).abs();
    let delta = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .filter(|&(i, j)| !bad[i] && !bad[j])
        .map(|(i, j)| diff(i, j))
        .fold(0.0, f64::max);
    let mass = |m: &[f64]| (0..k).filter(|&i| bad[i]).map(|i| m[i]).sum::<f64>();
    let l2 = |m: &[f64]| {
        (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| m[i] * m[j] * diff(i, j).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let lambda = w.masses();
    for _ in 0..3 {
        let mu = random_measure(r, k);
        let b = lift(stability_bound(eps, delta, mass(&mu), l2(&mu), None))?;
        let mu = lift(BlockMeasure::new(mu))?;
        let gap = (lift(phi_mu(&mu, &w))? - lift(phi_mu(&mu, &w2))?).abs();
        check(gap <= b.a + 1e-12, || format!("|Δφ(μ)| = {gap} > {}", b.a))?;
    }
    let b = lift(stability_bound(eps, delta, mass(lambda), l2(lambda), Some(k)))?;
    let cfg = optimizer(seed);
    let gap = (lift(phi_star(&w, &cfg))?.value - lift(phi_star(&w2, &cfg))?.value).abs();
    let bb = b.b.expect("k given");
    check(gap <= bb + OPTIMIZER_SLACK, || format!("|Δφ_*| = {gap} > √k bound {bb}"))?;
    check(gap <= b.c + OPTIMIZER_SLACK, || format!("|Δφ_*| = {gap} > {}", b.c))
}

/// `p' = (1-ε')p + ε'` adds `c‖z‖` to every corner ratio, `c = log 1/(1-ε')`,
/// so `φ(μ)` grows by between `c‖z‖` and `c‖z'‖` for the two maximisers,
/// and by exactly `c` when the old maximiser is the whole of `μ`.
fn perturbation(r: &mut ChaCha8Rng, _: u64) -> Outcome {
    let k = r.random_range(1..=5);
    let w = random_graphon(r, k, 0.9);
    let e: f64 = r.random_range(0.0..0.5);
    let w2 = lift(perturb(&w, e))?;
    let c = -(-e).ln_1p();
    let (q, q2) = (w.q_matrix(), w2.q_matrix());
    let mu = random_measure(r, k);
    for mask in 1u32..1 << k {
        let z: Vec<f64> = (0..k).map(|i| if mask >> i & 1 == 1 { mu[i] } else { 0.0 }).collect();
        let norm: f64 = z.iter().sum();
        let shift = lift(rayleigh_ratio(&z, &q2))? - lift(rayleigh_ratio(&z, &q))?;
        check((shift - c * norm).abs() <= 1e-10, || format!("corner {mask:b}: shift {shift} vs {}", c * norm))?;
    }
    let before = lift(crate::qcore::minimal_corner(&mu, &q))?;
    let after = lift(crate::qcore::minimal_corner(&mu, &q2))?;
    let shift = after.value - before.value;
    check(shift >= c * before.norm() - 1e-10 && shift <= c * after.norm() + 1e-10, || {
        format!("φ shift {shift} outside [{}, {}]", c * before.norm(), c * after.norm())
    })?;
    // A full minimal maximiser dominates every other corner, and more so after the shift.
    if before.support.len() == k {
        check((shift - c).abs() <= 1e-10, || format!("full-support shift {shift} vs {c}"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_empty() {
        let r = run_suites(7, 0).unwrap();
        assert!(r.suites.is_empty() && r.passed);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", 0, 1).is_err());
    }

    #[test]
    fn cheap_suites_pass() {
        for name in ["monotonicity", "corner_attainment", "nesting", "identity", "perturbation"] {
            let r = run_suite(name, 3, 50).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn reports_are_deterministic() {
        assert_eq!(run_suite("identity", 5, 20).unwrap(), run_suite("identity", 5, 20).unwrap());
    }
}
