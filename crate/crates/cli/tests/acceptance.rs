//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use graphon_chroma::colouring::{dsatur, strategy_colour, BalancedConfig};
use graphon_chroma::graphon::*;
use graphon_chroma::properties::{run_suite, SUITES};
use graphon_chroma::qcore::{balanced_optimality_check, OptimizerConfig};
use graphon_chroma::rng::stream;
use graphon_chroma::sampler::sample_gnw;
use rand::Rng;
use std::f64::consts::LN_2;
use std::process::Command;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn optimum() -> f64 {
    2.0 * (5.0 + 3f64.sqrt()) / 9.0 * LN_2
}

fn within(limit: Duration, t: Instant) -> Result<Duration, String> {
    let e = t.elapsed();
    if e < limit {
        Ok(e)
    } else {
        Err(format!("took {e:.1?}, limit {limit:?}"))
    }
}

fn ac1() -> Check {
    let t = Instant::now();
    let w = BlockGraphon::figure_block();
    let s = phi_star(&w, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
    let err = (s.value - optimum()).abs();
    if err >= 1e-5 {
        return Err(format!("phi_star = {:.9}, off by {err:.2e}", s.value));
    }
    // The type holding block 0 mixes blocks 0 and 1 as 1 : r.
    let r_want = (3.0 * 3f64.sqrt() - 5.0) / 2.0;
    let first = s
        .decomposition
        .parts()
        .iter()
        .find(|p| p.weights.weights()[0] > 1e-6)
        .ok_or("no type uses block 0")?;
    let wt = first.weights.weights();
    let r = wt[1] / wt[0];
    if (r - r_want).abs() >= 1e-3 {
        return Err(format!("r = {r:.6}, want {r_want:.6}"));
    }
    let e = within(Duration::from_secs(30), t)?;
    Ok(format!("phi_star = {:.9} (|err| {err:.1e}), r = {r:.6}, {e:.1?}", s.value))
}

fn ac2() -> Check {
    let w = BlockGraphon::figure_block();
    let cases = [
        ("balanced", Decomposition::trivial(&w), 14.0 / 9.0 * LN_2),
        ("greedy", figure_block_greedy_decomposition(), 5.0 / 3.0 * LN_2),
        ("optimal", figure_block_optimal_decomposition(), optimum()),
    ];
    let mut worst = 0f64;
    for (name, d, want) in cases {
        let got = strategy_cost(&d, &w).map_err(|e| e.to_string())?;
        if (got - want).abs() >= 1e-9 {
            return Err(format!("{name}: {got:.12} vs {want:.12}"));
        }
        worst = worst.max((got - want).abs());
    }
    Ok(format!("max |err| {worst:.1e}"))
}

fn block1_instance(rng: &mut impl Rng) -> (Vec<f64>, f64, f64) {
    let k = rng.random_range(1..=5);
    let mut l: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = l.iter().sum();
    l.iter_mut().for_each(|x| *x /= total);
    let p0 = rng.random_range(0.05..0.95);
    let p = rng.random_range(0.01..=p0);
    (l, p, p0)
}

fn block2_instance(rng: &mut impl Rng) -> (Vec<f64>, f64) {
    let k = rng.random_range(1..=5);
    let mut pv: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95)).collect();
    pv.sort_by(|a, b| b.total_cmp(a));
    let p = rng.random_range(0.0..=pv[k - 1]);
    (pv, p)
}

/// Runs `f` on 50 block1 and 50 block2 instances.
fn families(mut f: impl FnMut(&str, &BlockGraphon, f64) -> Result<(), String>) -> Result<(), String> {
    let mut rng = stream(2024, 1);
    for i in 0..50 {
        let (l, p, p0) = block1_instance(&mut rng);
        let cf = closed_form_block1(&l, p, p0).map_err(|e| e.to_string())?;
        let w = block1_graphon(&l, p, p0).map_err(|e| e.to_string())?;
        f(&format!("block1 #{i} {l:?} p={p} p0={p0}"), &w, cf)?;
    }
    for i in 0..50 {
        let (pv, p) = block2_instance(&mut rng);
        let cf = closed_form_block2(&pv, p).map_err(|e| e.to_string())?;
        let w = block2_graphon(&pv, p).map_err(|e| e.to_string())?;
        f(&format!("block2 #{i} {pv:?} p={p}"), &w, cf)?;
    }
    Ok(())
}

fn ac3() -> Check {
    let t = Instant::now();
    let mut worst = 0f64;
    families(|label, w, cf| {
        let s = phi_star(w, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
        let err = (s.value - cf).abs();
        worst = worst.max(err);
        if err >= 1e-5 {
            return Err(format!("{label}: closed form {cf:.9}, phi_star {:.9}", s.value));
        }
        Ok(())
    })?;
    let e = within(Duration::from_secs(300), t)?;
    Ok(format!("100 instances, max |err| {worst:.1e}, {e:.1?}"))
}

fn ac4() -> Check {
    families(|label, w, _| match balanced_optimality_check(w.masses(), &w.q_matrix()) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("{label}: check returned false")),
        Err(e) => Err(format!("{label}: {e}")),
    })?;
    let fb = BlockGraphon::figure_block();
    if balanced_optimality_check(fb.masses(), &fb.q_matrix()).map_err(|e| e.to_string())? {
        return Err("figure-block: check returned true".into());
    }
    Ok("true on 100 family instances, false on figure-block".into())
}

fn ac5() -> Check {
    let target = 1.25 * LN_2;
    let mut gaps = Vec::new();
    for k in [2, 4, 8, 16] {
        let s = strip_decomposition_wl(k).map_err(|e| e.to_string())?;
        gaps.push(s.cost - target);
    }
    let shown = format!("gaps {:?}", gaps.iter().map(|g| format!("{g:.5}")).collect::<Vec<_>>());
    if gaps.iter().any(|&g| g <= 0.0) {
        return Err(format!("non-positive gap: {shown}"));
    }
    if gaps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(format!("not decreasing: {shown}"));
    }
    if gaps[3] >= 0.1 {
        return Err(format!("gap(16) too large: {shown}"));
    }
    Ok(shown)
}

fn ac6() -> Check {
    let t = Instant::now();
    let mut failed = Vec::new();
    for name in SUITES {
        let r = run_suite(name, 0, 200).map_err(|e| e.to_string())?;
        if !r.passed {
            failed.push(format!("{name}: {} failures, first {:?}", r.failures, r.first_failure));
        }
    }
    if failed.is_empty() {
        Ok(format!("{} suites x 200 trials, {:.1?}", SUITES.len(), t.elapsed()))
    } else {
        Err(failed.join("; "))
    }
}

fn ac7() -> Check {
    let t = Instant::now();
    let w = BlockGraphon::figure_block();
    let optimal = phi_star(&w, &OptimizerConfig::default()).map_err(|e| e.to_string())?.decomposition;
    let greedy = greedy_decomposition(&w).map_err(|e| e.to_string())?;
    let (mut sum_opt, mut sum_greedy) = (0usize, 0usize);
    for seed in 0..5 {
        let g = sample_gnw(4000, &w, seed).map_err(|e| e.to_string())?;
        let cfg = BalancedConfig { seed, ..Default::default() };
        sum_opt += strategy_colour(&g, &optimal, &w, &cfg).map_err(|e| e.to_string())?.0.num_colours;
        sum_greedy += strategy_colour(&g, &greedy, &w, &cfg).map_err(|e| e.to_string())?.0.num_colours;
    }
    let (mo, mg) = (sum_opt as f64 / 5.0, sum_greedy as f64 / 5.0);
    if mo >= mg {
        return Err(format!("optimal mean {mo} >= greedy mean {mg}"));
    }

    let n = 2000;
    let g = sample_gnw(n, &BlockGraphon::constant(0.5).map_err(|e| e.to_string())?, 0).map_err(|e| e.to_string())?;
    let ratio = dsatur(&g).num_colours as f64 / (LN_2 * n as f64 / (2.0 * (n as f64).ln()));
    if !(1.0..=2.5).contains(&ratio) {
        return Err(format!("dsatur ratio {ratio:.3} outside [1, 2.5]"));
    }

    // Bin(3000, 1/3) with delta = 0.1: each seed's three counts must lie in 1000 ± 100.
    for seed in 0..5 {
        let g = sample_gnw(3000, &w, seed).map_err(|e| e.to_string())?;
        let counts = g.block_counts(3);
        if counts.iter().any(|&c| (c as f64 - 1000.0).abs() > 100.0) {
            return Err(format!("seed {seed}: block counts {counts:?}"));
        }
    }
    let e = within(Duration::from_secs(600), t)?;
    Ok(format!("mean colours optimal {mo} < greedy {mg}; dsatur ratio {ratio:.3}; block counts ok; {e:.1?}"))
}

fn ac8() -> Check {
    let dir = std::env::temp_dir().join(format!("graphon-chroma-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let manifest = dir.join("run.json");
    std::fs::write(
        &manifest,
        r#"{"graphon":"figure-block","n":300,"seed":5,"seeds":[1,2],"trials":5,"suites":["scaling","sandwich"],
            "family":"block2","p_vec":[0.6,0.4],"p":0.2}"#,
    )
    .map_err(|e| e.to_string())?;
    let runs: &[&[&str]] = &[
        &["phi"],
        &["phistar"],
        &["closed-form"],
        &["simulate"],
        &["simulate", "--format", "json"],
        &["properties"],
        &["sample"],
        &["split"],
        &["colour", "--format", "csv"],
    ];
    for args in runs {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_graphon-chroma"))
                .args(*args)
                .arg("--config")
                .arg(&manifest)
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        if !a.status.success() {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stdout)));
        }
        if a.stdout != b.stdout || a.stdout.is_empty() {
            return Err(format!("{args:?}: output differs between runs"));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands byte-identical across reruns", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("AC1 figure-block optimum", ac1),
        ("AC2 strategy ladder", ac2),
        ("AC3 closed forms vs optimizer", ac3),
        ("AC4 balanced-optimality check", ac4),
        ("AC5 W_L strip decomposition", ac5),
        ("AC6 property suites", ac6),
        ("AC7 simulation cross-check", ac7),
        ("AC8 determinism", ac8),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
