use proptest::prelude::*;
use rand::Rng;

use structctl::asymptotics::{residual, solve_fixed_point, unmatched_fraction, GenFunc, DEFAULT_TOL};
use structctl::dynamics::{integrate, OdeSpec};
use structctl::gen::{generate, rewire_preserving_degrees, GenSpec, Model};
use structctl::ingest::monte_carlo;
use structctl::matching::run_heuristic;
use structctl::*;

fn net_strategy(max_n: usize, max_edges: usize) -> impl Strategy<Value = BipartiteNet> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n), 0..=max_edges)
            .prop_map(move |e| BipartiteNet::from_directed_edges(n, &e).unwrap())
    })
}

const HEURISTICS: [Algo; 3] = [Algo::Greedy, Algo::Ks, Algo::Oks];

fn deg_sum(net: &BipartiteNet, side: Side) -> usize {
    net.degrees(side).iter().sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn removals_conserve_degree_sums(net in net_strategy(10, 30), order in prop::collection::vec((any::<bool>(), 0usize..10), 0..20)) {
        let mut g = net;
        for (left, v) in order {
            let v = v % g.n();
            g.remove_vertex(if left { Side::Left } else { Side::Right }, v);
            prop_assert_eq!(deg_sum(&g, Side::Left), g.edge_count());
            prop_assert_eq!(deg_sum(&g, Side::Right), g.edge_count());
        }
    }

    #[test]
    fn heuristics_are_valid_and_dominated(net in net_strategy(12, 30), seed in any::<u64>()) {
        let best = max_matching(&net);
        prop_assert!(validate_matching(&net, &best));
        prop_assert_eq!(best.len(), brute_force_max(&net).unwrap().len());
        for algo in HEURISTICS {
            let s = run_heuristic(algo, &net, &mut rng::seeded(seed), None).unwrap();
            prop_assert!(validate_matching(&net, &s.matching));
            prop_assert!(s.matching.len() <= best.len());
            prop_assert_eq!(s.unmatched_right(), net.n() - s.matching.len());
            prop_assert_eq!(s.unmatched_total, 2 * s.unmatched_right());
            prop_assert_eq!(s.phase1_unmatched + s.phase2_unmatched, s.unmatched_right());
            if algo != Algo::Greedy && !s.reached_phase2 {
                prop_assert_eq!(s.matching.len(), best.len());
            }
        }
    }

    #[test]
    fn control_config_decomposes_vertices(net in net_strategy(12, 30), seed in any::<u64>(), algo in 0usize..4) {
        let algo = [Algo::Greedy, Algo::Ks, Algo::Oks, Algo::Max][algo];
        let m = structctl::matching::run_matching(&net, algo, seed);
        let cfg = control_config(&net, &m).unwrap();
        let n = net.n();
        let mut seen = vec![0; n];
        for v in cfg.paths.iter().chain(&cfg.cycles).flatten() {
            seen[*v] += 1;
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(cfg.paths.len(), cfg.driver_vertices.len());
        prop_assert_eq!(cfg.driver_vertices.len(), n - m.len());
        prop_assert_eq!(cfg.num_controllers, (n - m.len()).max(1));
        prop_assert!((1..=n).contains(&cfg.num_controllers));
        prop_assert_eq!(cfg.b_structure.len(), cfg.driver_vertices.len() + cfg.cycles.len());
        prop_assert!(cfg.b_structure.len() <= n);
    }

    #[test]
    fn adding_an_edge_changes_max_matching_by_at_most_one(net in net_strategy(7, 14)) {
        let base = max_matching(&net).len();
        let edges: Vec<_> = net.edges().collect();
        for l in 0..net.n() {
            for r in 0..net.n() {
                if net.has_edge(l, r) {
                    continue;
                }
                let mut e = edges.clone();
                e.push((l, r));
                let bigger = max_matching(&BipartiteNet::from_bipartite_edges(net.n(), e).unwrap()).len();
                prop_assert!(bigger == base || bigger == base + 1);
            }
        }
    }

    #[test]
    fn generation_is_deterministic(model in 0usize..6, n in 1usize..300, lambda in 0.0f64..5.0, seed in any::<u64>()) {
        let model = [Model::ErDirected, Model::ErUndirected, Model::UfsDirected, Model::UfsUndirected, Model::DdDirected, Model::DdUndirected][model];
        let spec = match model {
            Model::DdDirected | Model::DdUndirected => GenSpec::dd(model, n, DegreeDist::poisson(lambda).unwrap(), seed),
            _ => GenSpec::new(model, n, lambda, seed),
        };
        // Infeasible fixed-size requests must fail the same way every time.
        let run = || generate(&spec).map(|g| g.edges().collect::<Vec<_>>()).map_err(|e| e.to_string());
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn rewiring_preserves_degrees(net in net_strategy(30, 80), seed in any::<u64>()) {
        let g = rewire_preserving_degrees(&net, seed);
        prop_assert_eq!(g.degrees(Side::Left), net.degrees(Side::Left));
        prop_assert_eq!(g.degrees(Side::Right), net.degrees(Side::Right));
    }

    #[test]
    fn configuration_model_edge_counts(n in 1usize..400, lambda in 0.0f64..4.0, seed in any::<u64>()) {
        let d = DegreeDist::poisson(lambda).unwrap();
        let undirected = generate(&GenSpec::dd(Model::DdUndirected, n, d.clone(), seed)).unwrap();
        let stubs = deg_sum(&undirected, Side::Left);
        // Each undirected edge gives two bipartite edges, self-loops one.
        let loops = undirected.edges().filter(|(l, r)| l == r).count();
        prop_assert_eq!((stubs - loops) % 2, 0);
        let directed = generate(&GenSpec::dd(Model::DdDirected, n, d, seed)).unwrap();
        prop_assert_eq!(deg_sum(&directed, Side::Left), directed.edge_count());
    }

    #[test]
    fn fixed_point_is_a_symmetric_root(weights in prop::collection::vec(0.0f64..1.0, 2..8)) {
        prop_assume!(weights[1..].iter().any(|&w| w > 1e-3));
        let d = DegreeDist::from_weights(weights).unwrap();
        let gf = GenFunc::new(d);
        let s = solve_fixed_point(&gf, &gf, DEFAULT_TOL).unwrap();
        prop_assert!(s.w.iter().all(|w| (-1e-12..=1.0 + 1e-12).contains(w)));
        prop_assert!((0.0..=1.0).contains(&s.u_star));
        prop_assert!(s.residual < DEFAULT_TOL);
        // Equal laws make the two pairs coincide: the mirrored vector is a solution with the same value.
        let mirrored = [s.w[2], s.w[1], s.w[2], s.w[1]];
        prop_assert!(residual(&gf, &gf, mirrored) < DEFAULT_TOL);
        prop_assert!((unmatched_fraction(&gf, &gf, mirrored) - s.u_star).abs() < 1e-8);
    }

    #[test]
    fn fixed_point_pairs_are_reflections(a in prop::collection::vec(0.0f64..1.0, 3..7)) {
        // Out-degrees on the two integers around the in-degree mean.
        let din = DegreeDist::from_weights(a).unwrap();
        prop_assume!(din.mean() > 0.2);
        let lo = din.mean().floor() as usize;
        let frac = din.mean() - lo as f64;
        let mut w = vec![0.0; lo + 2];
        w[lo] = 1.0 - frac;
        w[lo + 1] = frac;
        let (gin, gout) = (GenFunc::new(din), GenFunc::new(DegreeDist::from_weights(w).unwrap()));
        let s = solve_fixed_point(&gin, &gout, DEFAULT_TOL).unwrap();
        prop_assert!(s.residual < DEFAULT_TOL);
        prop_assert!((s.w[0] + s.w[1] - 1.0).abs() < 1e-15 && (s.w[2] + s.w[3] - 1.0).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&s.u_star));
    }
}

#[test]
fn unequal_laws_with_equal_means() {
    // In-degrees uniform on {1, 3}, out-degrees all 2.
    let gin = GenFunc::new(DegreeDist::from_weights(vec![0.0, 0.5, 0.0, 0.5]).unwrap());
    let gout = GenFunc::new(DegreeDist::point_mass(2));
    let s = solve_fixed_point(&gin, &gout, DEFAULT_TOL).unwrap();
    assert!(s.residual < DEFAULT_TOL);
    // Compare with exact matchings on a large configuration-model sample.
    let mut spec = GenSpec::new(Model::DdDirected, 20_000, 2.0, 5);
    spec.dist_in = Some(gin.base().clone());
    spec.dist_out = Some(gout.base().clone());
    let net = generate(&spec).unwrap();
    let frac = 1.0 - max_matching(&net).len() as f64 / 20_000.0;
    assert!((frac - s.u_star).abs() < 0.01, "{frac} vs {}", s.u_star);
}

#[test]
fn monte_carlo_ignores_thread_count() {
    let spec = GenSpec::new(Model::ErDirected, 3000, 2.0, 0);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo(&spec, Algo::Ks, 12, 99).unwrap().values)
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn ode_truncation_is_stable() {
    for algo in [Algo::Ks, Algo::Oks, Algo::Greedy] {
        let coarse = DegreeDist::poisson_with_tail(2.0, 1e-10).unwrap();
        let fine = DegreeDist::poisson_with_tail(2.0, 1e-14).unwrap();
        let a = integrate(&OdeSpec::new(algo, coarse.clone(), coarse).unwrap().with_eps(1e-10)).unwrap();
        let b = integrate(&OdeSpec::new(algo, fine.clone(), fine).unwrap().with_eps(1e-10)).unwrap();
        assert!((a.unmatched_fraction - b.unmatched_fraction).abs() <= 1e-6, "{algo:?}");
    }
}

#[test]
fn ode_invariants_along_trajectories() {
    for algo in [Algo::Ks, Algo::Oks, Algo::Greedy] {
        for lambda in [0.5, 2.0, 4.0] {
            let traj = integrate(&OdeSpec::poisson(algo, lambda).unwrap().with_eps(1e-10)).unwrap();
            for s in &traj.states {
                assert!((s.edge_mass_x() - s.edge_mass_y()).abs() <= 1e-6, "{algo:?} {lambda} t={}", s.t);
                assert!((s.vertex_mass_x() + s.x0() + s.t - 1.0).abs() <= 1e-6, "{algo:?} {lambda} t={}", s.t);
                assert!(s.x.iter().chain(&s.y).all(|&v| v >= -1e-9));
            }
        }
    }
}

#[test]
fn ode_matches_fixed_point_for_ks() {
    for lambda in [0.5, 1.0, 2.0, 4.0] {
        let d = DegreeDist::poisson_with_tail(lambda, 5e-13).unwrap();
        let u = solve_fixed_point(&GenFunc::new(d.clone()), &GenFunc::new(d.clone()), DEFAULT_TOL).unwrap().u_star;
        let traj = integrate(&OdeSpec::new(Algo::Ks, d.clone(), d).unwrap().with_eps(1e-10)).unwrap();
        assert!((traj.unmatched_fraction - u).abs() <= 1e-4, "λ={lambda}");
    }
}

#[test]
fn heuristic_runs_scale_near_linearly() {
    use std::time::Instant;
    let time = |n: usize| {
        let net = generate(&GenSpec::new(Model::ErDirected, n, 2.0, 1)).unwrap();
        (0..3)
            .map(|s| {
                let t = Instant::now();
                karp_sipser(&net, s);
                t.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let small = time(100_000);
    let large = time(1_000_000);
    // Ten times the vertices; allow the log factor and cache effects.
    assert!(large / small < 30.0, "{small} s -> {large} s");
}

#[test]
fn random_small_nets_hit_every_generator() {
    // Exact matching agrees with brute force across generators on tiny instances.
    let mut r = rng::seeded(8);
    for _ in 0..300 {
        let n = r.random_range(1..=8);
        let lambda = [0.5, 1.0, 2.0, 4.0][r.random_range(0..4)];
        let seed = r.random::<u64>();
        for model in [Model::ErDirected, Model::UfsUndirected, Model::DdDirected] {
            let spec = match model {
                Model::DdDirected => GenSpec::dd(model, n, DegreeDist::poisson(lambda).unwrap(), seed),
                _ => GenSpec::new(model, n, lambda, seed),
            };
            // Fixed-size models cannot place more edges than there are vertex pairs.
            let Ok(net) = generate(&spec) else {
                assert_eq!(model, Model::UfsUndirected);
                continue;
            };
            assert_eq!(max_matching(&net).len(), brute_force_max(&net).unwrap().len());
        }
    }
}
