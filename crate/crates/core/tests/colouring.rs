use graphon_chroma::colouring::*;
use graphon_chroma::graphon::*;
use graphon_chroma::sampler::*;

fn scale(n: usize) -> f64 {
    n as f64 / (2.0 * (n as f64).ln())
}

/// Checks properness edge by edge, independently of `verify_colouring`.
fn proper(g: &SampledGraph, c: &Colouring) -> bool {
    (0..g.n).all(|i| (i + 1..g.n).all(|j| !g.adjacency.get(i, j) || c.assignment[i] != c.assignment[j]))
}

#[test]
fn dsatur_on_half_density_is_in_band() {
    let w = BlockGraphon::constant(0.5).unwrap();
    for seed in 0..5 {
        let g = sample_gnw(2000, &w, seed).unwrap();
        let c = dsatur(&g);
        assert!(verify_colouring(&g, &c) && proper(&g, &c));
        let ratio = c.num_colours as f64 / (std::f64::consts::LN_2 * scale(2000));
        assert!((1.0..=2.5).contains(&ratio), "seed {seed}: {ratio}");
    }
}

#[test]
fn balanced_on_figure_block_is_in_band() {
    let w = BlockGraphon::figure_block();
    let phi = phi(&w).unwrap().value;
    for seed in 0..5 {
        let g = sample_gnw(4000, &w, seed).unwrap();
        let c = balanced_colour(&g, &w, &BalancedConfig { seed, ..Default::default() }).unwrap();
        assert!(verify_colouring(&g, &c));
        let ratio = c.num_colours as f64 / (phi * scale(4000));
        assert!((0.8..=2.2).contains(&ratio), "seed {seed}: {ratio}");
    }
}

#[test]
fn optimal_strategy_beats_greedy() {
    let w = BlockGraphon::figure_block();
    let mut wins = 0;
    for seed in 0..5 {
        let g = sample_gnw(4000, &w, seed).unwrap();
        let cfg = BalancedConfig { seed, ..Default::default() };
        let (opt, per_opt) = strategy_colour(&g, &figure_block_optimal_decomposition(), &w, &cfg).unwrap();
        let (gr, per_gr) = strategy_colour(&g, &figure_block_greedy_decomposition(), &w, &cfg).unwrap();
        assert!(proper(&g, &opt) && proper(&g, &gr));
        assert_eq!(opt.num_colours, per_opt.iter().sum::<usize>());
        assert_eq!(gr.num_colours, per_gr.iter().sum::<usize>());
        wins += usize::from(opt.num_colours < gr.num_colours);
    }
    assert!(wins >= 4, "{wins}");
}

#[test]
fn trivial_strategy_equals_balanced() {
    let w = BlockGraphon::figure_block();
    let g = sample_gnw(600, &w, 3).unwrap();
    let cfg = BalancedConfig { seed: 3, ..Default::default() };
    let (s, _) = strategy_colour(&g, &Decomposition::trivial(&w), &w, &cfg).unwrap();
    assert_eq!(s, balanced_colour(&g, &w, &cfg).unwrap());
}

#[test]
fn constant_graphon_balanced_is_proper() {
    let w = BlockGraphon::constant(0.4).unwrap();
    let g = sample_gnw(800, &w, 2).unwrap();
    let c = balanced_colour(&g, &w, &BalancedConfig::default()).unwrap();
    assert!(proper(&g, &c));
}

#[test]
fn independence_number_in_band() {
    let w = BlockGraphon::constant(0.5).unwrap();
    let g = sample_gnw(2000, &w, 1).unwrap();
    let (alpha, bound) = independence_lower_bound(&g, 20, 1);
    let target = 2.0 * (2000f64).ln() / std::f64::consts::LN_2;
    assert!((0.5 * target..=1.1 * target).contains(&(alpha as f64)), "{alpha}");
    assert_eq!(bound, 2000usize.div_ceil(alpha));
}

#[test]
fn more_edges_never_fewer_dsatur_colours() {
    // Same seed: the denser sample contains the sparser one.
    for seed in 0..4 {
        let a = sample_gnw(400, &BlockGraphon::constant(0.2).unwrap(), seed).unwrap();
        let b = sample_gnw(400, &BlockGraphon::constant(0.5).unwrap(), seed).unwrap();
        assert!((0..400).all(|i| a.adjacency.neighbours(i).all(|j| b.adjacency.get(i, j))));
        assert!(dsatur(&a).num_colours <= dsatur(&b).num_colours);
    }
}

#[test]
fn seeded_runs_repeat() {
    let w = BlockGraphon::figure_block();
    let g = sample_gnw(500, &w, 6).unwrap();
    let cfg = BalancedConfig { seed: 6, ..Default::default() };
    let d = figure_block_optimal_decomposition();
    assert_eq!(strategy_colour(&g, &d, &w, &cfg).unwrap(), strategy_colour(&g, &d, &w, &cfg).unwrap());
    assert_eq!(dsatur(&g), dsatur(&g));
    assert_eq!(independence_lower_bound(&g, 5, 2), independence_lower_bound(&g, 5, 2));
}

#[test]
fn colour_lines() {
    let mut out = Vec::new();
    Colouring::new(vec![1, 0, 1]).write_lines(&mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "0 1\n1 0\n2 1\n");
}
