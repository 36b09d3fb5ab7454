use memcons_core::graph::{
    generate_graph, parse_edge_list, write_edge_list, Family, WeightedGraph,
};
use memcons_core::h2::{
    h2_gramian_bruteforce, h2_half_alpha, h2_lyapunov_oracle, h2_memoryless, h2_pure_memory,
    h2_table_ii,
};
use memcons_core::simulate::simulate_noise_free;
use memcons_core::stability::{
    consensus_check, jury_schur, max_root_modulus, spectral_radius, ModePolynomial, ProtocolParams,
};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::Complete),
        Just(Family::Star),
        Just(Family::Chain),
        Just(Family::RingLattice),
        Just(Family::BarabasiAlbert),
    ]
}

fn graph(n_max: usize) -> impl Strategy<Value = WeightedGraph> {
    (family(), 4..=n_max, 1..=2usize, any::<u64>())
        .prop_filter_map("invalid size", |(f, n, d, seed)| {
            generate_graph(f, n, Some(d), Some(d), Some(seed)).ok()
        })
}

fn weighted_graph(n_max: usize) -> impl Strategy<Value = WeightedGraph> {
    (graph(n_max), prop::collection::vec(0.2..3.0_f64, 64)).prop_map(|(g, ws)| {
        let mut out = WeightedGraph::empty(g.n()).unwrap();
        for (k, (i, j, _)) in g.edges().enumerate() {
            out.set_edge(i, j, ws[k % ws.len()]).unwrap();
        }
        out
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jury_matches_roots(theta in 1..=10usize, a in -1.4..1.4_f64, b in -1.4..1.4_f64) {
        let p = ModePolynomial::trinomial(theta, a, b).unwrap();
        let rho = max_root_modulus(&p).unwrap();
        prop_assume!((rho - 1.0).abs() > 1e-6);
        prop_assert_eq!(jury_schur(&p), rho < 1.0);
    }

    #[test]
    fn table_matches_lyapunov_on_weighted_graphs(
        g in weighted_graph(12), alpha in 0.05..0.95_f64, u in 0.02..0.98_f64, theta in 1..=8usize,
    ) {
        let spec = g.spectrum().unwrap();
        let p = ProtocolParams::new(alpha, u * spec.beta_bound(), theta).unwrap();
        prop_assert!(consensus_check(&spec, &p).unwrap());
        let t = h2_table_ii(&spec, &p).unwrap();
        let l = h2_lyapunov_oracle(&spec, &p).unwrap();
        prop_assert!(rel(t.value, l.value) < 1e-9, "{} vs {}", t.value, l.value);
        let sum: f64 = t.per_mode.iter().map(|m| m.contribution).sum();
        prop_assert!((sum - t.value).abs() <= 1e-12 * spec.n() as f64 * t.value.max(1.0));
        let mult: usize = t.per_mode.iter().map(|m| m.multiplicity).sum();
        prop_assert_eq!(mult, spec.n() - 1);
    }

    #[test]
    fn half_alpha_modes_are_at_least_one(g in graph(15), u in 0.01..0.99_f64, theta in 1..=12usize) {
        let spec = g.spectrum().unwrap();
        let r = h2_half_alpha(&spec, u * spec.beta_bound(), theta).unwrap();
        for m in &r.per_mode {
            prop_assert!(m.contribution >= m.multiplicity as f64 * (1.0 - 1e-12));
        }
    }

    #[test]
    fn pure_memory_equals_memoryless(g in graph(15), u in 0.01..0.99_f64, theta in 1..=12usize) {
        let spec = g.spectrum().unwrap();
        let beta = u * spec.beta_bound();
        let a = h2_pure_memory(&spec, beta, theta).unwrap().value;
        let b = h2_memoryless(&spec, beta).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * b);
        // the alpha = 0 protocol through the oracle agrees as well
        let p = ProtocolParams::new(0.0, beta, theta).unwrap();
        prop_assert!(rel(h2_lyapunov_oracle(&spec, &p).unwrap().value, b) < 1e-9);
    }

    #[test]
    fn deeper_stability_implies_shallower(
        g in weighted_graph(10), alpha in 0.0..=1.0_f64, u in 0.01..0.99_f64, theta in 1..=8usize,
    ) {
        let spec = g.spectrum().unwrap();
        let beta = u * spec.beta_bound();
        let deep = consensus_check(&spec, &ProtocolParams::new(alpha, beta, theta + 1).unwrap()).unwrap();
        let shallow = consensus_check(&spec, &ProtocolParams::new(alpha, beta, theta).unwrap()).unwrap();
        prop_assert!(!deep || shallow);
    }

    #[test]
    fn edge_list_round_trip(g in weighted_graph(12)) {
        let back = parse_edge_list(&write_edge_list(&g)).unwrap();
        prop_assert_eq!(back.n(), g.n());
        for (i, j, w) in g.edges() {
            prop_assert!((back.weight(i, j) - w).abs() <= 1e-15 * w);
        }
        prop_assert_eq!(back.edge_count(), g.edge_count());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn noise_free_decay_follows_schur(
        g in graph(8), alpha in 0.0..=1.0_f64, u in 0.05..1.6_f64, theta in 1..=4usize, seed in any::<u64>(),
    ) {
        let spec = g.spectrum().unwrap();
        let p = ProtocolParams::new(alpha, u * spec.beta_bound(), theta).unwrap();
        let rho = spectral_radius(&spec, &p).unwrap();
        prop_assume!((rho - 1.0).abs() > 0.02);
        let n = g.n();
        let hist: Vec<Vec<f64>> = (0..=theta)
            .map(|k| (0..n).map(|i| ((seed >> (i % 48)) as f64 + (k * n + i) as f64).sin()).collect())
            .collect();
        let traj = simulate_noise_free(&g, &p, &hist, 3000).unwrap();
        let (start, end) = (traj[0].max(1e-3), traj[3000]);
        if rho < 1.0 {
            prop_assert!(end < 1e-6 * start, "rho {rho}: {start} -> {end}");
        } else {
            prop_assert!(end > start || !end.is_finite(), "rho {rho}: {start} -> {end}");
        }
    }

    #[test]
    fn gramian_matches_lyapunov(g in weighted_graph(6), alpha in 0.05..0.95_f64, u in 0.05..0.9_f64, theta in 1..=3usize) {
        let spec = g.spectrum().unwrap();
        let p = ProtocolParams::new(alpha, u * spec.beta_bound(), theta).unwrap();
        let rho = spectral_radius(&spec, &p).unwrap();
        prop_assume!(rho < 0.97);
        let brute = h2_gramian_bruteforce(&g, &p, 4000).unwrap();
        let exact = h2_lyapunov_oracle(&spec, &p).unwrap().value;
        prop_assert!(brute.converged);
        prop_assert!(rel(brute.value, exact) < 1e-8, "{} vs {exact}", brute.value);
    }
}
