use crate::config::{Family, Format, RunConfig};
use crate::output::{csv, fmt12, to_json, Output};
use crate::CliError;
use graphon_chroma::colouring::{balanced_colour, dsatur, strategy_colour, BalancedConfig, Colouring};
use graphon_chroma::graphon::*;
use graphon_chroma::properties::{run_suite, PropertyReport, SUITES};
use graphon_chroma::qcore::{balanced_optimality_check, w_star_bounds, OptimizerConfig};
use graphon_chroma::sampler::{decomposition_split, sample_gnw, sample_sbm, SampledGraph};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::path::Path;

pub const STRATEGIES: [&str; 4] = ["balanced", "greedy-decomp", "optimal-decomp", "dsatur"];

/// A command's output and whether everything it checked passed.
pub type Outcome = Result<(Output, bool), CliError>;

fn format(cfg: &RunConfig) -> Format {
    cfg.format.unwrap_or(Format::Json)
}

pub fn phi_cmd(cfg: &RunConfig) -> Outcome {
    let (name, w) = cfg.graphon()?;
    let c = phi(&w)?;
    let out = match format(cfg) {
        Format::Json => Output::Json(json!({
            "graphon": name,
            "phi": c.value,
            "coefficient_n_over_log_n": c.value / 2.0,
            "witness_support": c.support,
        })),
        Format::Csv => Output::Text(csv(
            &["graphon", "phi", "coefficient_n_over_log_n"],
            [vec![name, fmt12(c.value), fmt12(c.value / 2.0)]],
        )),
    };
    Ok((out, true))
}

pub fn phistar_cmd(cfg: &RunConfig) -> Outcome {
    let (name, w) = cfg.graphon()?;
    let opt = cfg.optimizer()?;
    let s = phi_star(&w, &opt)?;
    let q = w.q_matrix();
    let (lower, upper) = w_star_bounds(w.masses(), &q)?;
    let balanced = balanced_optimality_check(w.masses(), &q)?;
    let prediction = cfg.n.map(|n| chi_from_coefficient(s.value, n)).transpose()?;
    let out = match format(cfg) {
        Format::Json => Output::Json(json!({
            "graphon": name,
            "value": s.value,
            "coefficient_n_over_log_n": s.value / 2.0,
            "phi": phi(&w)?.value,
            "decomposition": to_json(&s.decomposition),
            "bounds": {"lower": lower, "upper": upper},
            "balanced_optimal": balanced,
            "prediction": prediction,
            "n": cfg.n,
        })),
        Format::Csv => Output::Text(csv(
            &["graphon", "value", "lower", "upper", "balanced_optimal"],
            [vec![name, fmt12(s.value), fmt12(lower), fmt12(upper), balanced.to_string()]],
        )),
    };
    Ok((out, true))
}

pub fn closed_form_cmd(cfg: &RunConfig) -> Outcome {
    let family = cfg.need(&cfg.family, "family")?;
    let p = cfg.need(&cfg.p, "p")?;
    let (name, value) = match family {
        Family::Block1 => ("block1", closed_form_block1(&cfg.need(&cfg.lengths, "lengths")?, p, cfg.need(&cfg.p0, "p0")?)?),
        Family::Block2 => ("block2", closed_form_block2(&cfg.need(&cfg.p_vec, "p-vec")?, p)?),
    };
    let out = match format(cfg) {
        Format::Json => Output::Json(json!({
            "family": name,
            "value": value,
            "coefficient_n_over_log_n": value / 2.0,
        })),
        Format::Csv => Output::Text(csv(&["family", "value"], [vec![name.to_string(), fmt12(value)]])),
    };
    Ok((out, true))
}

pub fn properties_cmd(cfg: &RunConfig) -> Outcome {
    let seed = cfg.seed.unwrap_or(0);
    let trials = cfg.trials.unwrap_or(200);
    let names: Vec<String> = cfg.suites.clone().unwrap_or_else(|| SUITES.iter().map(|s| s.to_string()).collect());
    let suites = if trials == 0 {
        Vec::new()
    } else {
        names.iter().map(|s| run_suite(s, seed, trials)).collect::<graphon_chroma::Result<Vec<_>>>()?
    };
    let report = PropertyReport {
        seed,
        trials,
        passed: suites.iter().all(|s| s.passed),
        suites,
    };
    let passed = report.passed;
    let out = match format(cfg) {
        Format::Json => Output::Json(to_json(&report)),
        Format::Csv => Output::Text(csv(
            &["suite", "trials", "failures", "passed"],
            report
                .suites
                .iter()
                .map(|s| vec![s.name.clone(), s.trials.to_string(), s.failures.to_string(), s.passed.to_string()]),
        )),
    };
    Ok((out, passed))
}

fn sample(cfg: &RunConfig, w: &BlockGraphon, seed: u64) -> Result<SampledGraph, CliError> {
    match &cfg.sizes {
        Some(sizes) => {
            if sizes.len() != w.k() {
                return Err(CliError::usage(format!("--sizes needs {} entries, one per block", w.k())));
            }
            Ok(sample_sbm(sizes, w.p_rows(), seed)?)
        }
        None => Ok(sample_gnw(cfg.need(&cfg.n, "n")?, w, seed)?),
    }
}

pub fn sample_cmd(cfg: &RunConfig) -> Outcome {
    let (_, w) = cfg.graphon()?;
    let seed = cfg.seed.unwrap_or(0);
    let g = sample(cfg, &w, seed)?;
    let out = match cfg.format {
        Some(Format::Json) => {
            let edges: Vec<[usize; 2]> = (0..g.n).flat_map(|i| g.adjacency.neighbours(i).filter(move |&j| j > i).map(move |j| [i, j])).collect();
            Output::Json(json!({"n": g.n, "seed": g.seed, "blocks": g.blocks, "latents": g.latents, "edges": edges}))
        }
        _ => {
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf).expect("writing to memory");
            Output::Text(String::from_utf8(buf).expect("ascii edge list"))
        }
    };
    Ok((out, true))
}

/// Named or file decomposition for `w`.
fn decomposition(spec: &str, w: &BlockGraphon, opt: &OptimizerConfig) -> Result<Decomposition, CliError> {
    Ok(match spec {
        "trivial" | "balanced" => Decomposition::trivial(w),
        "greedy" | "greedy-decomp" => greedy_decomposition(w)?,
        "optimal" | "optimal-decomp" => phi_star(w, opt)?.decomposition,
        path => {
            let p = Path::new(path);
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let d: Decomposition = serde_json::from_str(&text).map_err(|e| CliError::parse(p, e))?;
            d.validate_for(w)?;
            d
        }
    })
}

pub fn split_cmd(cfg: &RunConfig) -> Outcome {
    let (_, w) = cfg.graphon()?;
    let seed = cfg.seed.unwrap_or(0);
    let d = decomposition(cfg.decomposition.as_deref().unwrap_or("optimal"), &w, &cfg.optimizer()?)?;
    let g = sample(cfg, &w, seed)?;
    let parts = decomposition_split(&g, &d, &w, seed)?;
    let out = match format(cfg) {
        Format::Json => Output::Json(json!({
            "n": g.n,
            "seed": seed,
            "decomposition": to_json(&d),
            "parts": d.parts().iter().zip(&parts).map(|(p, v)| json!({
                "alpha": p.alpha,
                "weights": to_json(&p.weights),
                "size": v.len(),
                "vertices": v,
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut ty = vec![0; g.n];
            for (t, vs) in parts.iter().enumerate() {
                vs.iter().for_each(|&v| ty[v] = t);
            }
            Output::Text(csv(&["vertex", "type"], ty.iter().enumerate().map(|(v, t)| vec![v.to_string(), t.to_string()])))
        }
    };
    Ok((out, true))
}

/// Decompositions are computed once and shared across seeds.
struct Prepared {
    w: BlockGraphon,
    greedy: Option<Decomposition>,
    optimal: Decomposition,
    star: f64,
}

fn prepare(cfg: &RunConfig, strategies: &[String]) -> Result<Prepared, CliError> {
    if let Some(s) = strategies.iter().find(|s| !STRATEGIES.contains(&s.as_str())) {
        return Err(CliError::usage(format!("unknown strategy {s:?}; expected one of {}", STRATEGIES.join(", "))));
    }
    let (_, w) = cfg.graphon()?;
    let star = phi_star(&w, &cfg.optimizer()?)?;
    let greedy = if strategies.iter().any(|s| s == "greedy-decomp") { Some(greedy_decomposition(&w)?) } else { None };
    Ok(Prepared {
        w,
        greedy,
        optimal: star.decomposition,
        star: star.value,
    })
}

fn colour_with(p: &Prepared, strategy: &str, g: &SampledGraph, bc: &BalancedConfig) -> Result<Colouring, CliError> {
    Ok(match strategy {
        "balanced" => balanced_colour(g, &p.w, bc)?,
        "greedy-decomp" => strategy_colour(g, p.greedy.as_ref().expect("prepared"), &p.w, bc)?.0,
        "optimal-decomp" => strategy_colour(g, &p.optimal, &p.w, bc)?.0,
        _ => dsatur(g),
    })
}

#[derive(Serialize)]
struct Row {
    seed: u64,
    n: usize,
    strategy: String,
    colours_used: usize,
    prediction: f64,
    ratio: f64,
}

pub fn simulate_cmd(cfg: &RunConfig) -> Outcome {
    let strategies = cfg.strategies.clone().unwrap_or_else(|| STRATEGIES.iter().map(|s| s.to_string()).collect());
    let seeds = cfg.seeds.clone().unwrap_or_else(|| cfg.seed.map_or((0..5).collect(), |s| vec![s]));
    let p = prepare(cfg, &strategies)?;
    let restarts = cfg.restarts.unwrap_or(BalancedConfig::default().restarts);
    let per_seed: Vec<Vec<Row>> = seeds
        .par_iter()
        .map(|&seed| {
            let g = sample(cfg, &p.w, seed)?;
            let prediction = chi_from_coefficient(p.star, g.n)?;
            let bc = BalancedConfig { seed, restarts, ..Default::default() };
            strategies
                .iter()
                .map(|s| {
                    let c = colour_with(&p, s, &g, &bc)?;
                    Ok(Row {
                        seed,
                        n: g.n,
                        strategy: s.clone(),
                        colours_used: c.num_colours,
                        prediction,
                        ratio: c.num_colours as f64 / prediction,
                    })
                })
                .collect()
        })
        .collect::<Result<_, CliError>>()?;
    let rows: Vec<Row> = per_seed.into_iter().flatten().collect();
    let out = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => Output::Text(csv(
            &["seed", "n", "strategy", "colours_used", "prediction", "ratio"],
            rows.iter().map(|r| {
                vec![r.seed.to_string(), r.n.to_string(), r.strategy.clone(), r.colours_used.to_string(), fmt12(r.prediction), fmt12(r.ratio)]
            }),
        )),
        Format::Json => {
            let means: serde_json::Map<String, serde_json::Value> = strategies
                .iter()
                .map(|s| {
                    let xs: Vec<f64> = rows.iter().filter(|r| &r.strategy == s).map(|r| r.colours_used as f64).collect();
                    (s.clone(), json!(xs.iter().sum::<f64>() / xs.len() as f64))
                })
                .collect();
            Output::Json(json!({"phi_star": p.star, "rows": to_json(&rows), "mean_colours": means}))
        }
    };
    Ok((out, true))
}

pub fn colour_cmd(cfg: &RunConfig) -> Outcome {
    let strategies = cfg.strategies.clone().unwrap_or_else(|| vec!["optimal-decomp".into()]);
    let [strategy] = strategies.as_slice() else {
        return Err(CliError::usage("colour takes exactly one strategy".into()));
    };
    let p = prepare(cfg, &strategies)?;
    let seed = cfg.seed.unwrap_or(0);
    let g = sample(cfg, &p.w, seed)?;
    let bc = BalancedConfig {
        seed,
        restarts: cfg.restarts.unwrap_or(BalancedConfig::default().restarts),
        ..Default::default()
    };
    let c = colour_with(&p, strategy, &g, &bc)?;
    let out = match format(cfg) {
        Format::Json => Output::Json(json!({
            "n": g.n,
            "seed": seed,
            "strategy": strategy,
            "num_colours": c.num_colours,
            "prediction": chi_from_coefficient(p.star, g.n)?,
            "assignment": c.assignment,
        })),
        Format::Csv => {
            let mut buf = Vec::new();
            c.write_lines(&mut buf).expect("writing to memory");
            Output::Text(String::from_utf8(buf).expect("ascii lines"))
        }
    };
    Ok((out, true))
}
