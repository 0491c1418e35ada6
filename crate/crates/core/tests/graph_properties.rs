use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spgg::graph::*;
use spgg::verify::{complete_bipartite, cycle_graph, random_connected_graph};

fn torus_distance(w: usize, h: usize, a: usize, b: usize) -> usize {
    let (ax, ay, bx, by) = (a % w, a / w, b % w, b / w);
    let dx = ax.abs_diff(bx);
    let dy = ay.abs_diff(by);
    dx.min(w - dx) + dy.min(h - dy)
}

#[test]
fn torus_50_by_50_metrics() {
    let g = build_torus_grid(50, 50).unwrap();
    assert_eq!(g.vertex_count(), 2500);
    assert_eq!(g.edge_count(), 5000);
    assert!((0..2500).all(|v| g.degree(v) == 4));
    let m = compute_metrics(&g).unwrap();
    assert_eq!(m.diameter, 50);
    assert_eq!(m.min_degree, 4);
    assert!(m.is_bipartite());
    assert_eq!(m.odd_girth, None);
    for s in [0, 1, 777, 1234, 2499] {
        let d = bfs_distances(&g, s);
        for v in 0..2500 {
            assert_eq!(d[v], Some(torus_distance(50, 50, s, v)));
        }
    }
}

#[test]
fn small_tori_match_closed_form_for_all_pairs() {
    for (w, h) in [(3, 3), (3, 7), (4, 5), (5, 5), (6, 4)] {
        let g = build_torus_grid(w, h).unwrap();
        let mut diameter = 0;
        for s in 0..w * h {
            let d = bfs_distances(&g, s);
            for v in 0..w * h {
                let expected = torus_distance(w, h, s, v);
                assert_eq!(d[v], Some(expected));
                diameter = diameter.max(expected);
            }
        }
        let m = compute_metrics(&g).unwrap();
        assert_eq!(m.diameter, diameter, "{w}x{h}");
        let bipartite = w % 2 == 0 && h % 2 == 0;
        assert_eq!(m.is_bipartite(), bipartite, "{w}x{h}");
        // The shortest odd cycle wraps around an odd dimension.
        let odd = [w, h].into_iter().filter(|x| x % 2 == 1).min();
        assert_eq!(m.odd_girth, odd, "{w}x{h}");
    }
}

#[test]
fn random_regular_1000_10() {
    for seed in 0..3 {
        let g = sample_random_regular(1000, 10, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let n = g.vertex_count();
        assert!((990..=1000).contains(&n), "n = {n}");
        assert!((0..n).all(|v| g.degree(v) == 10));
        assert!(g.is_connected());
    }
}

#[test]
fn random_regular_is_reproducible() {
    let a = sample_random_regular(300, 6, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = sample_random_regular(300, 6, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
}

/// Odd girth from exact-length closed walks: the shortest odd closed walk is
/// always a cycle. Bit rows limit this to 64 vertices.
fn odd_girth_by_walks(g: &Network) -> Option<usize> {
    let n = g.vertex_count();
    assert!(n <= 64);
    let adj: Vec<u64> = (0..n).map(|v| g.neighbors(v).iter().fold(0u64, |acc, &w| acc | 1 << w)).collect();
    let mut walks = adj.clone();
    for len in 1..=2 * n + 1 {
        if len % 2 == 1 && (0..n).any(|v| walks[v] >> v & 1 == 1) {
            return Some(len);
        }
        walks = walks
            .iter()
            .map(|&reach| (0..n).filter(|&w| reach >> w & 1 == 1).fold(0u64, |acc, w| acc | adj[w]))
            .collect();
    }
    None
}

#[test]
fn odd_girth_lemma_on_random_non_bipartite_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(3..=60);
        let g = random_connected_graph(n, rng.gen_range(0.0..(5.0 / n as f64).min(1.0)), &mut rng);
        let m = compute_metrics(&g).unwrap();
        let oracle = odd_girth_by_walks(&g);
        assert_eq!(m.odd_girth, oracle);
        assert_eq!(m.is_bipartite(), oracle.is_none());
        if let Some(k) = oracle {
            assert!(k <= 2 * m.diameter + 1, "odd girth {k}, diameter {}", m.diameter);
            checked += 1;
        }
    }
}

#[test]
fn family_metrics() {
    let k = complete_bipartite(3, 5);
    let m = compute_metrics(&k).unwrap();
    assert_eq!((m.diameter, m.min_degree, m.odd_girth), (2, 3, None));
    let parts = m.bipartition.unwrap();
    let mut sizes = [parts.left.len(), parts.right.len()];
    sizes.sort();
    assert_eq!(sizes, [3, 5]);

    for n in 3..12 {
        let m = compute_metrics(&cycle_graph(n)).unwrap();
        assert_eq!(m.diameter, n / 2);
        assert_eq!(m.odd_girth, (n % 2 == 1).then_some(n));
    }
}

proptest! {
    #[test]
    fn edge_list_round_trip(n in 1usize..40, extra in 0.0f64..0.5, seed in any::<u64>()) {
        let g = random_connected_graph(n, extra, &mut ChaCha8Rng::seed_from_u64(seed));
        let text = g.to_edge_list();
        prop_assert_eq!(Network::parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn random_regular_degrees(n in 8usize..120, d in 3usize..7, seed in any::<u64>()) {
        prop_assume!(d < n);
        if let Ok(g) = sample_random_regular(n, d, &mut ChaCha8Rng::seed_from_u64(seed)) {
            prop_assert!(g.vertex_count() <= n);
            prop_assert!(g.vertex_count() > d);
            prop_assert!((0..g.vertex_count()).all(|v| g.degree(v) == d));
            prop_assert!(g.is_connected());
        }
    }

    #[test]
    fn diameter_is_max_eccentricity(n in 2usize..30, extra in 0.0f64..0.4, seed in any::<u64>()) {
        let g = random_connected_graph(n, extra, &mut ChaCha8Rng::seed_from_u64(seed));
        let ecc = (0..n).map(|s| bfs_distances(&g, s).into_iter().map(|d| d.unwrap()).max().unwrap());
        prop_assert_eq!(compute_metrics(&g).unwrap().diameter, ecc.max().unwrap());
    }
}
