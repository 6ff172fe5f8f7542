use graphon_chroma::graphon::*;
use graphon_chroma::qcore::{balanced_optimality_check, OptimizerConfig};
use proptest::prelude::*;
use std::f64::consts::LN_2;

fn sqrt3() -> f64 {
    3f64.sqrt()
}

#[test]
fn balanced_coefficients() {
    assert!((phi(&BlockGraphon::figure_block()).unwrap().value - 14.0 / 9.0 * LN_2).abs() < 1e-12);
    let wr = phi(&BlockGraphon::w_r()).unwrap();
    assert!((wr.value - 1.25 * LN_2).abs() < 1e-12);
    assert!((wr.value - 0.86643).abs() < 1e-5);
    assert!((phi(&BlockGraphon::constant(0.5).unwrap()).unwrap().value - LN_2).abs() < 1e-15);
}

#[test]
fn strategy_ladder_values() {
    let w = BlockGraphon::figure_block();
    let balanced = strategy_cost(&Decomposition::trivial(&w), &w).unwrap();
    let greedy = strategy_cost(&figure_block_greedy_decomposition(), &w).unwrap();
    let optimal = strategy_cost(&figure_block_optimal_decomposition(), &w).unwrap();
    assert!((balanced - 14.0 / 9.0 * LN_2).abs() < 1e-9);
    assert!((greedy - 5.0 / 3.0 * LN_2).abs() < 1e-9);
    assert!((optimal - 2.0 * (5.0 + sqrt3()) / 9.0 * LN_2).abs() < 1e-9);
    // As coefficients of n / log n: 0.52 < 0.54 < 0.58.
    assert!(optimal / 2.0 < balanced / 2.0 && balanced / 2.0 < greedy / 2.0);
    assert!(((balanced / 2.0) - 0.54).abs() < 0.01 && ((greedy / 2.0) - 0.58).abs() < 0.01 && ((optimal / 2.0) - 0.52).abs() < 0.01);
}

#[test]
fn optimal_value_on_figure_block() {
    let w = BlockGraphon::figure_block();
    let s = phi_star(&w, &OptimizerConfig::default()).unwrap();
    assert!((s.value - 2.0 * (5.0 + sqrt3()) / 9.0 * LN_2).abs() < 1e-5);
    s.decomposition.validate_for(&w).unwrap();
    assert!(!balanced_optimality_check(w.masses(), &w.q_matrix()).unwrap());
}

#[test]
fn right_half_graphon_is_balanced() {
    let w = BlockGraphon::w_r();
    let s = phi_star(&w, &OptimizerConfig::default()).unwrap();
    assert!((s.value - phi(&w).unwrap().value).abs() < 1e-8);
    assert!(balanced_optimality_check(w.masses(), &w.q_matrix()).unwrap());
}

/// `max_S (1/λ(S)) Σ_{i,j∈S} λ_i λ_j q_ij` over prefixes, straight from the definition.
fn prefix_oracle(masses: &[f64], p: impl Fn(usize, usize) -> f64) -> f64 {
    let k = masses.len();
    let q = |i, j| -(1.0 - p(i, j)).ln();
    (1..=k)
        .map(|m| {
            let norm: f64 = masses[..m].iter().sum();
            let s: f64 = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| masses[i] * masses[j] * q(i, j)).sum();
            s / norm
        })
        .fold(0.0, f64::max)
}

#[test]
fn closed_forms_on_fixed_instances() {
    let lengths = [0.5, 0.3, 0.2];
    let v = closed_form_block1(&lengths, 0.2, 0.6).unwrap();
    assert!((v - prefix_oracle(&lengths, |i, j| if i == j { 0.6 } else { 0.2 })).abs() < 1e-12);
    let w = block1_graphon(&lengths, 0.2, 0.6).unwrap();
    assert!((phi(&w).unwrap().value - v).abs() < 1e-12);
    assert!(balanced_optimality_check(w.masses(), &w.q_matrix()).unwrap());

    let pv = [0.8, 0.5, 0.4, 0.3];
    let v2 = closed_form_block2(&pv, 0.1).unwrap();
    assert!((v2 - prefix_oracle(&[0.25; 4], |i, j| if i == j { pv[i] } else { 0.1 })).abs() < 1e-12);
    let w2 = block2_graphon(&pv, 0.1).unwrap();
    assert!(balanced_optimality_check(w2.masses(), &w2.q_matrix()).unwrap());
    assert!((phi_star(&w2, &OptimizerConfig::default()).unwrap().value - v2).abs() < 1e-5);
}

#[test]
fn closed_form_argument_errors() {
    assert!(closed_form_block1(&[0.3, 0.7], 0.2, 0.5).is_err());
    assert!(closed_form_block1(&[0.7, 0.3], 0.6, 0.5).is_err());
    assert!(closed_form_block2(&[0.3, 0.5], 0.1).is_err());
    assert!(closed_form_block2(&[0.5, 0.3], 0.4).is_err());
}

#[test]
fn strip_costs() {
    let gap = |k: usize| strip_decomposition_wl(k).unwrap().cost - 1.25 * LN_2;
    let gaps: Vec<f64> = [2, 4, 8, 16].iter().map(|&k| gap(k)).collect();
    for (&k, g) in [2usize, 4, 8, 16].iter().zip(&gaps) {
        assert!((g - 0.75 * LN_2 / (2 * k + 1) as f64).abs() < 1e-12);
    }
    assert!(gaps.iter().all(|&g| g > 0.0));
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    assert!(gaps[3] < 0.1);
}

#[test]
fn wl_sandwiched_by_approximations() {
    let wl = GeneralGraphon::Builtin { name: Builtin::WL };
    for k in [2, 3, 5, 8] {
        let (lo, hi) = (block_lower(&wl, k).unwrap(), block_upper(&wl, k).unwrap());
        for a in 0..k {
            for b in 0..k {
                assert!(lo.p(a, b) <= hi.p(a, b));
            }
        }
        assert!(phi(&lo).unwrap().value <= phi(&hi).unwrap().value + 1e-12);
    }
}

#[test]
fn grid_approximations_bracket_cells() {
    let g = GeneralGraphon::from_fn(12, |x, y| 0.2 + 0.6 * (x * y)).unwrap();
    let GeneralGraphon::Grid { values } = &g else { unreachable!() };
    for k in [1, 2, 3, 4, 6] {
        let (lo, hi) = (block_lower(&g, k).unwrap(), block_upper(&g, k).unwrap());
        for i in 0..12 {
            for j in 0..12 {
                let (a, b) = (i * k / 12, j * k / 12);
                assert!(lo.p(a, b) <= values[i][j] && values[i][j] <= hi.p(a, b));
            }
        }
    }
}

#[test]
fn json_shapes() {
    let w: BlockGraphon = serde_json::from_str(r#"{"masses":[0.5,0.5],"P":[[0.75,0.5],[0.5,0.5]]}"#).unwrap();
    assert_eq!(w, BlockGraphon::w_r());
    assert!(serde_json::from_str::<BlockGraphon>(r#"{"masses":[0.5,0.5],"P":[[0.75,0.4],[0.5,0.5]]}"#).is_err());
    assert!(serde_json::from_str::<BlockGraphon>(r#"{"masses":[1.0],"P":[[0.5]],"extra":1}"#).is_err());
    let g: GeneralGraphon = serde_json::from_str(r#"{"kind":"grid","values":[[0.1,0.2],[0.2,0.3]]}"#).unwrap();
    assert!(matches!(g, GeneralGraphon::Grid { .. }));
    let d: Decomposition = serde_json::from_str(r#"{"parts":[{"alpha":0.25,"weights":[1,0]},{"alpha":0.75,"weights":[0.5,0.5]}]}"#).unwrap();
    let back: Decomposition = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(d, back);
    assert!(serde_json::from_str::<Decomposition>(r#"{"parts":[{"alpha":0.5,"weights":[1,0]}]}"#).is_err());
}

#[test]
fn predictions() {
    let c = BlockGraphon::constant(0.5).unwrap();
    let n = 1000;
    let want = LN_2 * n as f64 / (2.0 * (n as f64).ln());
    assert!((chi_prediction(&c, n, &OptimizerConfig::default()).unwrap() - want).abs() < 1e-9);
    let e2 = std::f64::consts::E.powi(2);
    assert!((chi_from_coefficient(4.0, e2.round() as usize).unwrap() - 4.0 * 7.0 / (2.0 * 7f64.ln())).abs() < 1e-12);
    assert!(chi_from_coefficient(1.0, 2).is_err());
}

fn graphon_strategy(max_k: usize) -> impl Strategy<Value = BlockGraphon> {
    (1..=max_k).prop_flat_map(|k| {
        (prop::collection::vec(0.05..1.0f64, k), prop::collection::vec(0.0..0.9f64, k * k)).prop_map(move |(m, p)| {
            let total: f64 = m.iter().sum();
            let masses: Vec<f64> = m.iter().map(|v| v / total).collect();
            let mut rows = vec![vec![0.0; k]; k];
            for i in 0..k {
                for j in i..k {
                    rows[i][j] = p[i * k + j];
                    rows[j][i] = p[i * k + j];
                }
            }
            BlockGraphon::new(masses.clone(), rows.clone())
                .or_else(|_| {
                    let t: f64 = masses.iter().sum();
                    BlockGraphon::new(masses.iter().map(|v| v / t).collect(), rows)
                })
                .unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn star_below_every_strategy(w in graphon_strategy(3), split in prop::collection::vec(0.05..0.95f64, 3)) {
        // Two types: a random share of each block goes to the first.
        let k = w.k();
        let m = w.masses();
        let first: Vec<f64> = (0..k).map(|i| m[i] * split[i]).collect();
        let a: f64 = first.iter().sum();
        let second: Vec<f64> = (0..k).map(|i| m[i] - first[i]).collect();
        let d = Decomposition::new(vec![
            Part { alpha: a, weights: BlockMeasure::normalized(&first).unwrap() },
            Part { alpha: 1.0 - a, weights: BlockMeasure::normalized(&second).unwrap() },
        ]).unwrap();
        let star = phi_star(&w, &OptimizerConfig::default()).unwrap().value;
        prop_assert!(star <= strategy_cost(&d, &w).unwrap() + 1e-6);
        prop_assert!(star <= phi(&w).unwrap().value + 1e-9);
    }

    #[test]
    fn monotone_in_edge_probabilities(w in graphon_strategy(3), bump in prop::collection::vec(0.0..0.09f64, 9)) {
        let k = w.k();
        let p: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| w.p(i, j) + bump[i.min(j) * 3 + i.max(j)]).collect())
            .collect();
        let w2 = BlockGraphon::new(w.masses().to_vec(), p).unwrap();
        prop_assert!(phi(&w).unwrap().value <= phi(&w2).unwrap().value + 1e-12);
        let cfg = OptimizerConfig::default();
        prop_assert!(phi_star(&w, &cfg).unwrap().value <= phi_star(&w2, &cfg).unwrap().value + 1e-6);
    }
}

proptest! {
    #[test]
    fn phi_mu_within_trivial_sandwich(w in graphon_strategy(5), raw in prop::collection::vec(0.0..1.0f64, 5)) {
        let mu: Vec<f64> = raw[..w.k()].iter().map(|v| v + 1e-3).collect();
        let mu = BlockMeasure::normalized(&mu).unwrap();
        let v = phi_mu(&mu, &w).unwrap();
        prop_assert!(-(1.0 - w.min_p()).ln() - 1e-12 <= v && v <= -(1.0 - w.max_p()).ln() + 1e-12);
    }

    #[test]
    fn perturbation_shift_bracket(w in graphon_strategy(4), e in 0.0..0.5f64) {
        let w2 = perturb(&w, e).unwrap();
        let c = -(1.0 - e).ln();
        let mu = BlockMeasure::new(w.masses().to_vec()).unwrap();
        let shift = phi_mu(&mu, &w2).unwrap() - phi_mu(&mu, &w).unwrap();
        prop_assert!(shift >= -1e-12 && shift <= c + 1e-10);
    }

    #[test]
    fn stability_bound_a_holds(w in graphon_strategy(3), noise in prop::collection::vec(-0.05..0.05f64, 9)) {
        let k = w.k();
        let p: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| (w.p(i, j) + noise[i.min(j) * 3 + i.max(j)]).clamp(0.0, 0.9)).collect())
            .collect();
        let w2 = BlockGraphon::new(w.masses().to_vec(), p).unwrap();
        let eps = 1.0 - w.max_p().max(w2.max_p());
        let m = w.masses();
        let d = |i: usize, j: usize| (w.p(i, j) - w2.p(i, j)).abs();
        let delta = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| d(i, j)).fold(0.0, f64::max);
        let l2 = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| m[i] * m[j] * d(i, j).powi(2)).sum::<f64>().sqrt();
        let b = stability_bound(eps, delta, 0.0, l2, Some(k)).unwrap();
        let mu = BlockMeasure::new(m.to_vec()).unwrap();
        let gap = (phi_mu(&mu, &w).unwrap() - phi_mu(&mu, &w2).unwrap()).abs();
        prop_assert!(gap <= b.a + 1e-12);
    }
}

#[test]
fn greedy_decomposition_reproduces_closed_form() {
    let w = BlockGraphon::figure_block();
    let d = greedy_decomposition(&w).unwrap();
    assert!((strategy_cost(&d, &w).unwrap() - 5.0 / 3.0 * LN_2).abs() < 1e-6);
}
