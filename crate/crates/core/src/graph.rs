//! Undirected simple networks, the two experiment generators, and the
//! structural metrics (diameter, bipartition, odd girth, minimum degree).

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("network must have at least one vertex")]
    Empty,
    #[error("vertex {vertex} out of range for {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("network is disconnected")]
    Disconnected,
    #[error("torus dimensions must both be at least 3 (got {width}x{height})")]
    TorusTooSmall { width: usize, height: usize },
    #[error("random regular graph needs n > d >= 1 (got n={n}, d={d})")]
    InvalidRegular { n: usize, d: usize },
    #[error("no connected {d}-regular graph produced after {attempts} attempts")]
    GenerationFailed { d: usize, attempts: usize },
    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// An undirected simple graph stored as sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    adjacency: Vec<Vec<usize>>,
}

impl Network {
    /// Builds a network from an edge list, rejecting self-loops, duplicate
    /// edges (in either orientation) and out-of-range endpoints.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(GraphError::VertexOutOfRange { vertex: w, vertex_count });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        Ok(Self { adjacency })
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn min_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn is_connected(&self) -> bool {
        bfs_distances(self, 0).iter().all(|d| d.is_some())
    }

    pub fn ensure_connected(&self) -> Result<(), GraphError> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(GraphError::Disconnected)
        }
    }

    /// Serializes as `n m` followed by one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.vertex_count(), self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<(), GraphError> {
        w.write_all(self.to_edge_list().as_bytes())?;
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self, GraphError> {
        let mut lines = Vec::new();
        for line in r.lines() {
            lines.push(line?);
        }
        Self::parse_edge_list(&lines.join("\n"))
    }

    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut rows = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = rows.next().ok_or(GraphError::Parse {
            line: 1,
            message: "missing \"n m\" header".into(),
        })?;
        let (n, m) = parse_pair(line, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, row) in rows {
            edges.push(parse_pair(line, row)?);
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 1,
                message: format!("header declares {m} edges but {} were listed", edges.len()),
            });
        }
        Self::from_edges(n, &edges)
    }
}

fn parse_pair(line: usize, row: &str) -> Result<(usize, usize), GraphError> {
    let bad = |message: String| GraphError::Parse { line, message };
    let fields: Vec<&str> = row.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(bad(format!("expected two integers, found {:?}", row)));
    }
    let a = fields[0].parse().map_err(|e| bad(format!("{}: {e}", fields[0])))?;
    let b = fields[1].parse().map_err(|e| bad(format!("{}: {e}", fields[1])))?;
    Ok((a, b))
}

/// The `width x height` torus grid. Vertex `(i, j)` has index `j * width + i`.
pub fn build_torus_grid(width: usize, height: usize) -> Result<Network, GraphError> {
    if width < 3 || height < 3 {
        return Err(GraphError::TorusTooSmall { width, height });
    }
    let index = |i: usize, j: usize| j * width + i;
    let mut edges = Vec::with_capacity(2 * width * height);
    for j in 0..height {
        for i in 0..width {
            edges.push((index(i, j), index((i + 1) % width, j)));
            edges.push((index(i, j), index(i, (j + 1) % height)));
        }
    }
    Network::from_edges(width * height, &edges)
}

/// Limits for [`sample_random_regular_with`].
#[derive(Clone, Copy, Debug)]
pub struct RegularSamplerConfig {
    /// Full restarts allowed before giving up.
    pub max_restarts: usize,
    /// Consecutive rejected random pairs before the remaining valid pairs are
    /// enumerated exhaustively.
    pub pair_retries: usize,
    /// Maximum number of left-over vertices discarded per attempt; `None`
    /// uses `max(d, n / 100)`.
    pub discard_budget: Option<usize>,
}

impl Default for RegularSamplerConfig {
    fn default() -> Self {
        Self { max_restarts: 100, pair_retries: 64, discard_budget: None }
    }
}

/// Samples a connected simple `d`-regular graph on at most `n` vertices by
/// random pairing of deficient vertices, discarding left-overs.
pub fn sample_random_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Network, GraphError> {
    sample_random_regular_with(n, d, &RegularSamplerConfig::default(), rng)
}

pub fn sample_random_regular_with<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    config: &RegularSamplerConfig,
    rng: &mut R,
) -> Result<Network, GraphError> {
    if d == 0 || n <= d {
        return Err(GraphError::InvalidRegular { n, d });
    }
    let budget = config.discard_budget.unwrap_or_else(|| d.max(n / 100));
    let attempts = config.max_restarts.max(1);
    for _ in 0..attempts {
        if let Some(g) = pairing_attempt(n, d, budget, config.pair_retries, rng) {
            if g.is_connected() {
                return Ok(g);
            }
        }
    }
    Err(GraphError::GenerationFailed { d, attempts })
}

/// One pass of the pairing process. Returns `None` when the discard budget
/// is exhausted or too few vertices remain.
fn pairing_attempt<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    budget: usize,
    pair_retries: usize,
    rng: &mut R,
) -> Option<Network> {
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::with_capacity(d); n];
    let mut alive = vec![true; n];
    let mut alive_count = n;
    let mut discarded = 0;
    // Deficient vertices (alive, degree < d) in insertion order.
    let mut open: Vec<usize> = (0..n).collect();

    loop {
        // Pair until no admissible pair remains.
        loop {
            open.retain(|&v| alive[v] && adjacency[v].len() < d);
            if open.len() < 2 {
                break;
            }
            let mut chosen = None;
            for _ in 0..pair_retries {
                let a = open[rng.gen_range(0..open.len())];
                let b = open[rng.gen_range(0..open.len())];
                if a != b && !adjacency[a].contains(&b) {
                    chosen = Some((a, b));
                    break;
                }
            }
            if chosen.is_none() {
                let mut valid = Vec::new();
                for (i, &a) in open.iter().enumerate() {
                    for &b in &open[i + 1..] {
                        if !adjacency[a].contains(&b) {
                            valid.push((a, b));
                        }
                    }
                }
                if valid.is_empty() {
                    break;
                }
                chosen = Some(valid[rng.gen_range(0..valid.len())]);
            }
            let (a, b) = chosen.expect("pair chosen above");
            adjacency[a].push(b);
            adjacency[b].push(a);
        }

        if open.is_empty() {
            break;
        }
        // Left-overs: drop them and let their neighbors re-pair.
        let leftovers = std::mem::take(&mut open);
        discarded += leftovers.len();
        alive_count -= leftovers.len();
        if discarded > budget || alive_count <= d {
            return None;
        }
        for &v in &leftovers {
            alive[v] = false;
            for w in std::mem::take(&mut adjacency[v]) {
                adjacency[w].retain(|&x| x != v);
                if alive[w] {
                    open.push(w);
                }
            }
        }
        open.sort_unstable();
        open.dedup();
    }

    let mut relabel = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if alive[v] {
            relabel[v] = next;
            next += 1;
        }
    }
    let mut edges = Vec::with_capacity(next * d / 2);
    for u in (0..n).filter(|&u| alive[u]) {
        for &v in &adjacency[u] {
            if u < v {
                edges.push((relabel[u], relabel[v]));
            }
        }
    }
    Network::from_edges(next, &edges).ok()
}

/// A 2-coloring of a bipartite network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMetrics {
    pub diameter: usize,
    pub min_degree: usize,
    /// Present exactly when the network has no odd cycle.
    pub bipartition: Option<Bipartition>,
    /// Length of the shortest odd cycle; present exactly when non-bipartite.
    pub odd_girth: Option<usize>,
}

impl GraphMetrics {
    pub fn is_bipartite(&self) -> bool {
        self.bipartition.is_some()
    }
}

/// Breadth-first distances from `source`; `None` for unreachable vertices.
pub fn bfs_distances(g: &Network, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.vertex_count()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued vertices have a distance");
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Exact diameter, bipartition, odd girth and minimum degree of a connected
/// network. One BFS per vertex: the eccentricities give the diameter, and
/// every edge joining two vertices of equal depth closes an odd walk of
/// length `2 * depth + 1`; the minimum over all roots is the odd girth.
pub fn compute_metrics(g: &Network) -> Result<GraphMetrics, GraphError> {
    let n = g.vertex_count();
    let mut diameter = 0;
    let mut odd_girth: Option<usize> = None;
    for source in 0..n {
        let dist = bfs_distances(g, source);
        let mut depth = Vec::with_capacity(n);
        for d in &dist {
            depth.push(d.ok_or(GraphError::Disconnected)?);
        }
        diameter = diameter.max(depth.iter().copied().max().unwrap_or(0));
        for (u, v) in g.edges() {
            if depth[u] == depth[v] {
                let len = 2 * depth[u] + 1;
                odd_girth = Some(odd_girth.map_or(len, |best| best.min(len)));
            }
        }
    }

    let bipartition = if odd_girth.is_none() {
        let parity = bfs_distances(g, 0);
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for (v, d) in parity.iter().enumerate() {
            if d.expect("connected") % 2 == 0 {
                left.push(v);
            } else {
                right.push(v);
            }
        }
        Some(Bipartition { left, right })
    } else {
        None
    };

    Ok(GraphMetrics { diameter, min_degree: g.min_degree(), bipartition, odd_girth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cycle(n: usize) -> Network {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Network::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(matches!(Network::from_edges(3, &[(0, 0)]), Err(GraphError::SelfLoop(0))));
        assert!(matches!(
            Network::from_edges(3, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            Network::from_edges(3, &[(0, 3)]),
            Err(GraphError::VertexOutOfRange { vertex: 3, .. })
        ));
        assert!(matches!(Network::from_edges(0, &[]), Err(GraphError::Empty)));
    }

    #[test]
    fn small_torus() {
        let g = build_torus_grid(3, 3).unwrap();
        assert_eq!(g.vertex_count(), 9);
        assert!((0..9).all(|u| g.degree(u) == 4));
        assert_eq!(g.edge_count(), 18);
    }

    #[test]
    fn degenerate_torus_rejected() {
        assert!(matches!(build_torus_grid(2, 5), Err(GraphError::TorusTooSmall { .. })));
        assert!(build_torus_grid(5, 2).is_err());
    }

    #[test]
    fn triangle_metrics() {
        let m = compute_metrics(&cycle(3)).unwrap();
        assert_eq!(m.diameter, 1);
        assert_eq!(m.odd_girth, Some(3));
        assert!(m.bipartition.is_none());
    }

    #[test]
    fn six_cycle_metrics() {
        let m = compute_metrics(&cycle(6)).unwrap();
        assert_eq!(m.diameter, 3);
        assert_eq!(m.odd_girth, None);
        let b = m.bipartition.unwrap();
        assert_eq!(b.left, vec![0, 2, 4]);
        assert_eq!(b.right, vec![1, 3, 5]);
    }

    #[test]
    fn five_cycle_is_tight() {
        let m = compute_metrics(&cycle(5)).unwrap();
        assert_eq!(m.diameter, 2);
        assert_eq!(m.odd_girth, Some(5));
        assert!(m.odd_girth.unwrap() <= 2 * m.diameter + 1);
    }

    #[test]
    fn disconnected_metrics_rejected() {
        let g = Network::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(compute_metrics(&g), Err(GraphError::Disconnected)));
    }

    #[test]
    fn regular_k4_is_unique() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = sample_random_regular(4, 3, &mut rng).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn regular_rejects_bad_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            sample_random_regular(10, 10, &mut rng),
            Err(GraphError::InvalidRegular { .. })
        ));
        assert!(sample_random_regular(10, 0, &mut rng).is_err());
    }

    #[test]
    fn regular_generation_failure_reports_attempts() {
        // 3-regular on 5 vertices is impossible (odd degree sum) and the
        // zero discard budget forbids shrinking.
        let config = RegularSamplerConfig { max_restarts: 4, pair_retries: 8, discard_budget: Some(0) };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        match sample_random_regular_with(5, 3, &config, &mut rng) {
            Err(GraphError::GenerationFailed { attempts, .. }) => assert_eq!(attempts, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn edge_list_parse_errors() {
        assert!(Network::parse_edge_list("").is_err());
        assert!(Network::parse_edge_list("3 2\n0 1\n").is_err());
        assert!(Network::parse_edge_list("3 1\n0 x\n").is_err());
        let g = Network::parse_edge_list("3 2\n0 1\n1 2\n").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.to_edge_list(), "3 2\n0 1\n1 2\n");
    }
}
