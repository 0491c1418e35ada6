//! Randomized property suites over many seeded instances: contagion,
//! convergence bounds, model reduction, odd girth, bipartite oscillation and
//! agreement with the reference stepper.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    audit_convergence_bound, brute_force_reference_step, check_contagion, trace_reduction, AnalysisError,
};
use crate::dynamics::{self, AssignedDraws, RunOptions, TieBreakStream, UpdateRule};
use crate::experiments::derive_seed;
use crate::graph::{self, compute_metrics, Network};
use crate::model::{
    sample_initial_main, sample_initial_two_order, Behavior, Configuration, MainParams, ModelParams,
    TwoOrderBehavior, TwoOrderParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Contagion,
    Bounds,
    Reduction,
    Girth,
    Oscillation,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Contagion, Suite::Bounds, Suite::Reduction, Suite::Girth, Suite::Oscillation, Suite::Oracle];

    pub fn default_instances(self) -> usize {
        match self {
            Suite::Contagion => 200,
            Suite::Bounds => 100,
            Suite::Reduction => 100,
            Suite::Girth => 100,
            Suite::Oscillation => 20,
            Suite::Oracle => 1000,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Contagion => "contagion",
            Suite::Bounds => "bounds",
            Suite::Reduction => "reduction",
            Suite::Girth => "girth",
            Suite::Oscillation => "oscillation",
            Suite::Oracle => "oracle",
        }
    }

    pub fn run(self, seed: u64, instances: usize) -> SuiteReport {
        let outcomes = (0..instances)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[self as u64, i as u64]));
                let result = match self {
                    Suite::Contagion => contagion_instance(&mut rng),
                    Suite::Bounds => bounds_instance(&mut rng),
                    Suite::Reduction => reduction_instance(&mut rng),
                    Suite::Girth => girth_instance(&mut rng),
                    Suite::Oscillation => oscillation_instance(i, &mut rng),
                    Suite::Oracle => oracle_instance(&mut rng),
                };
                let (passed, detail) = match result {
                    Ok(detail) => (true, detail),
                    Err(detail) => (false, detail),
                };
                Outcome { instance: i, passed, detail }
            })
            .collect();
        SuiteReport { suite: self, outcomes }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|suite| suite.name() == s).ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub instance: usize,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: Suite,
    pub outcomes: Vec<Outcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| !o.passed).count()
    }

    /// One `suite,instance,passed,detail` line per instance.
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for o in &self.outcomes {
            writeln!(w, "{},{},{},{}", self.suite, o.instance, o.passed, o.detail)?;
        }
        Ok(())
    }
}

type InstanceResult = Result<String, String>;

/// Random spanning tree on `n` vertices plus each other pair with
/// probability `extra`.
pub fn random_connected_graph<R: Rng + ?Sized>(n: usize, extra: f64, rng: &mut R) -> Network {
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v));
        present[u][v] = true;
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u][v] && rng.gen_bool(extra) {
                edges.push((u, v));
            }
        }
    }
    Network::from_edges(n, &edges).expect("simple by construction")
}

pub fn complete_bipartite(left: usize, right: usize) -> Network {
    let edges: Vec<_> = (0..left).flat_map(|u| (left..left + right).map(move |v| (u, v))).collect();
    Network::from_edges(left + right, &edges).expect("simple by construction")
}

pub fn cycle_graph(n: usize) -> Network {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Network::from_edges(n, &edges).expect("n >= 3")
}

/// A connected graph with at most `max_n` vertices from one of several families.
pub fn mixed_family_graph<R: Rng + ?Sized>(max_n: usize, rng: &mut R) -> (String, Network) {
    loop {
        let (name, g) = match rng.gen_range(0..5) {
            0 => {
                let n = rng.gen_range(2..=max_n);
                let extra = rng.gen_range(0.0..(6.0 / n as f64).min(1.0));
                (format!("gnp-tree:{n}"), random_connected_graph(n, extra, rng))
            }
            1 => {
                let n = rng.gen_range(3..=max_n.max(3));
                (format!("cycle:{n}"), cycle_graph(n))
            }
            2 => {
                let side = ((max_n as f64).sqrt() as usize).max(3);
                let (w, h) = (rng.gen_range(3..=side), rng.gen_range(3..=side));
                (format!("torus:{w}x{h}"), graph::build_torus_grid(w, h).expect("w, h >= 3"))
            }
            3 => {
                let d = rng.gen_range(3..=6);
                let n = rng.gen_range(d + 1..=max_n.max(d + 1));
                match graph::sample_random_regular(n, d, rng) {
                    Ok(g) => (format!("regular:{n},{d}"), g),
                    Err(_) => continue,
                }
            }
            _ => {
                let a = rng.gen_range(1..=max_n / 2);
                let b = rng.gen_range(1..=(max_n - a).max(1));
                (format!("bipartite:{a},{b}"), complete_bipartite(a, b))
            }
        };
        if g.vertex_count() <= max_n {
            return (name, g);
        }
    }
}

/// Parameters with `e_h + rho_h < rho_d` by a clear margin.
fn contagion_params<R: Rng + ?Sized>(rng: &mut R) -> MainParams {
    let e_h = rng.gen_range(0.01..0.9);
    let rho_h = rng.gen_range(0.01..0.8);
    let rho_d = e_h + rho_h + rng.gen_range(0.01..0.5);
    MainParams { e_h, rho_h, rho_d }
}

/// Parameters satisfying `(1 - e_h) / delta < rho_h < rho_d - e_h` with margin.
fn convergent_params<R: Rng + ?Sized>(delta: usize, rng: &mut R) -> MainParams {
    let e_h = rng.gen_range(0.02..0.6);
    let lower = (1.0 - e_h) / delta as f64;
    let rho_h = lower * rng.gen_range(1.02..1.6);
    let rho_d = e_h + rho_h + rng.gen_range(0.01..0.4);
    MainParams { e_h, rho_h, rho_d }
}

fn as_main(c: &Configuration) -> &[Behavior] {
    match c {
        Configuration::Main(m) => m,
        Configuration::TwoOrder(_) => panic!("main-model configuration expected"),
    }
}

fn contagion_instance(rng: &mut ChaCha8Rng) -> InstanceResult {
    let (family, g) = mixed_family_graph(200, rng);
    let p = contagion_params(rng);
    let epsilon = rng.gen_range(0.005..0.3);
    let c0 = sample_initial_main(g.vertex_count(), epsilon, rng).map_err(|e| e.to_string())?;
    let trace = dynamics::run(
        &g,
        &Configuration::Main(c0),
        &ModelParams::Main(p),
        UpdateRule::MainGreedy,
        &mut TieBreakStream::from_seed(rng.gen()),
        RunOptions::exact(rng.gen_range(5..40)).with_snapshots(),
    )
    .map_err(|e| e.to_string())?;
    let snapshots = trace.snapshots.expect("recorded");
    for (t, pair) in snapshots.windows(2).enumerate() {
        match check_contagion(&g, as_main(&pair[0]), as_main(&pair[1]), &p) {
            Ok(true) => {}
            Ok(false) => return Err(format!("{family}: contagion broken at round {t} -> {}", t + 1)),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!("{family}: {} rounds", snapshots.len() - 1))
}

fn bounds_instance(rng: &mut ChaCha8Rng) -> InstanceResult {
    let (family, g) = mixed_family_graph(120, rng);
    let metrics = compute_metrics(&g).map_err(|e| e.to_string())?;
    if metrics.min_degree == 0 {
        return Ok(format!("{family}: single vertex, skipped"));
    }
    let p = convergent_params(metrics.min_degree, rng);
    let epsilon = rng.gen_range(0.01..0.3);
    let c0 = sample_initial_main(g.vertex_count(), epsilon, rng).map_err(|e| e.to_string())?;
    let rounds = 3 * metrics.diameter + 3;
    let trace = dynamics::run(
        &g,
        &Configuration::Main(c0.clone()),
        &ModelParams::Main(p),
        UpdateRule::MainGreedy,
        &mut TieBreakStream::from_seed(rng.gen()),
        RunOptions::exact(rounds),
    )
    .map_err(|e| e.to_string())?;
    let report = audit_convergence_bound(&metrics, &p, &trace, &c0).map_err(|e| e.to_string())?;
    let line = report.to_record(&family);
    if report.bound_applicable && !report.satisfied {
        Err(line)
    } else {
        Ok(line)
    }
}

fn random_two_order_params<R: Rng + ?Sized>(rng: &mut R) -> TwoOrderParams {
    let alpha2 = rng.gen_range(0.05..1.0);
    TwoOrderParams {
        alpha1: rng.gen_range(0.05..2.0),
        alpha2,
        beta1: rng.gen_range(0.05..1.0),
        beta2: alpha2 + rng.gen_range(0.01..1.0),
    }
}

fn reduction_instance(rng: &mut ChaCha8Rng) -> InstanceResult {
    let n = rng.gen_range(2..=12);
    let g = random_connected_graph(n, rng.gen_range(0.0..0.6), rng);
    let p = random_two_order_params(rng);
    let epsilon = rng.gen_range(0.1..0.95);
    let c0 = sample_initial_two_order(n, epsilon, rng).map_err(|e| e.to_string())?;
    let outcome = trace_reduction(&g, &c0, &p, rng.gen(), 20).map_err(|e: AnalysisError| e.to_string())?;
    if let Some(t) = outcome.first_mismatch {
        return Err(format!("n={n}: trajectories differ at round {t}"));
    }
    if outcome.private_cooperators_after_start > 0 {
        return Err(format!("n={n}: {} private cooperators after round 0", outcome.private_cooperators_after_start));
    }
    Ok(format!("n={n}: equal for 20 rounds"))
}

/// Shortest odd closed walk through any vertex, via BFS on the bipartite
/// double cover; equals the odd girth.
pub fn odd_girth_by_double_cover(g: &Network) -> Option<usize> {
    let n = g.vertex_count();
    let mut best: Option<usize> = None;
    for s in 0..n {
        let mut dist = vec![usize::MAX; 2 * n];
        let mut queue = VecDeque::new();
        dist[2 * s] = 0;
        queue.push_back(2 * s);
        while let Some(x) = queue.pop_front() {
            let (v, parity) = (x / 2, x % 2);
            for &w in g.neighbors(v) {
                let y = 2 * w + (1 - parity);
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        if dist[2 * s + 1] != usize::MAX {
            best = Some(best.map_or(dist[2 * s + 1], |b| b.min(dist[2 * s + 1])));
        }
    }
    best
}

fn girth_instance(rng: &mut ChaCha8Rng) -> InstanceResult {
    let n = rng.gen_range(3..=60);
    let mut g = random_connected_graph(n, rng.gen_range(0.0..(4.0 / n as f64)), rng);
    let mut metrics = compute_metrics(&g).map_err(|e| e.to_string())?;
    if let Some(parts) = &metrics.bipartition {
        // Join two same-side vertices to force an odd cycle.
        let side = if parts.left.len() >= 2 { &parts.left } else { &parts.right };
        let (a, b) = (side[0], side[1 + rng.gen_range(0..side.len() - 1)]);
        let mut edges: Vec<_> = g.edges().collect();
        edges.push((a, b));
        g = Network::from_edges(n, &edges).map_err(|e| e.to_string())?;
        metrics = compute_metrics(&g).map_err(|e| e.to_string())?;
    }
    let girth = metrics.odd_girth.ok_or("graph still bipartite")?;
    let oracle = odd_girth_by_double_cover(&g);
    if oracle != Some(girth) {
        return Err(format!("n={n}: odd girth {girth} but double cover gives {oracle:?}"));
    }
    if girth > 2 * metrics.diameter + 1 {
        return Err(format!("n={n}: odd girth {girth} > 2*{}+1", metrics.diameter));
    }
    Ok(format!("n={n}: odd girth {girth}, diameter {}", metrics.diameter))
}

/// `delta` hubs joined to every one of the other vertices; the hubs all
/// defect and the rest are non-defectors.
pub fn oscillation_setup<R: Rng + ?Sized>(delta: usize, others: usize, rng: &mut R) -> (Network, Vec<Behavior>) {
    let g = complete_bipartite(delta, others);
    let mut c0 = vec![Behavior::Defector; delta];
    c0.extend((0..others).map(|_| if rng.gen_bool(0.5) { Behavior::Cooperator } else { Behavior::Hypocritical }));
    (g, c0)
}

fn oscillation_instance(i: usize, rng: &mut ChaCha8Rng) -> InstanceResult {
    let delta = if i % 2 == 0 { 3 } else { 5 };
    let others = rng.gen_range(delta..=4 * delta);
    let (g, c0) = oscillation_setup(delta, others, rng);
    let p = convergent_params(delta, rng);
    let trace = dynamics::run(
        &g,
        &Configuration::Main(c0),
        &ModelParams::Main(p),
        UpdateRule::MainGreedy,
        &mut TieBreakStream::from_seed(rng.gen()),
        RunOptions::exact(50).with_snapshots(),
    )
    .map_err(|e| e.to_string())?;
    let s: Vec<&[Behavior]> = trace.snapshots.as_ref().expect("recorded").iter().map(as_main).collect();
    for (t, c) in s.iter().enumerate() {
        let all_defect = |side: &[Behavior]| side.iter().all(|b| b.is_defector());
        let none_defect = |side: &[Behavior]| side.iter().all(|b| !b.is_defector());
        let (hubs, rest) = c.split_at(delta);
        let ok = if t % 2 == 0 {
            all_defect(hubs) && none_defect(rest)
        } else {
            none_defect(hubs) && all_defect(rest)
        };
        if !ok {
            return Err(format!("delta={delta}: side pattern broken at round {t}"));
        }
    }
    for t in 1..s.len() - 2 {
        if s[t] != s[t + 2] || s[t] == s[t + 1] {
            return Err(format!("delta={delta}: period is not 2 at round {t}"));
        }
    }
    Ok(format!("delta={delta}, others={others}: period 2 for 50 rounds"))
}

/// Random parameters; dyadic values half of the time so that exact cost ties
/// occur and exercise tie-breaking.
fn oracle_params<R: Rng + ?Sized>(two_order: bool, rng: &mut R) -> ModelParams {
    let dyadic = rng.gen_bool(0.5);
    let mut value = |lo: f64, hi: f64| {
        if dyadic {
            rng.gen_range(1..=8) as f64 / 8.0
        } else {
            rng.gen_range(lo..hi)
        }
    };
    if two_order {
        ModelParams::TwoOrder(TwoOrderParams {
            alpha1: value(0.05, 2.0),
            alpha2: value(0.05, 1.0),
            beta1: value(0.05, 1.0),
            beta2: value(0.05, 1.0),
        })
    } else {
        ModelParams::Main(MainParams { e_h: value(0.0, 1.0), rho_h: value(0.0, 1.0), rho_d: value(0.0, 1.0) })
    }
}

fn oracle_instance(rng: &mut ChaCha8Rng) -> InstanceResult {
    let n = rng.gen_range(1..=12);
    let g = if n == 1 { Network::from_edges(1, &[]).expect("one vertex") } else {
        random_connected_graph(n, rng.gen_range(0.0..0.8), rng)
    };
    let rule = match rng.gen_range(0..4) {
        0 => UpdateRule::MainGreedy,
        1 => UpdateRule::MainNoisy { p_greedy: rng.gen_range(0.0..1.0) },
        2 => UpdateRule::MainNoHypocrisy,
        _ => UpdateRule::TwoOrderGreedy,
    };
    let params = oracle_params(rule.is_two_order(), rng);
    let c = if rule.is_two_order() {
        Configuration::TwoOrder((0..n).map(|_| TwoOrderBehavior::TIE_ORDER[rng.gen_range(0..4)]).collect())
    } else {
        Configuration::Main((0..n).map(|_| Behavior::TIE_ORDER[rng.gen_range(0..3)]).collect())
    };
    let draws = AssignedDraws::random(n, rng);
    let fast = dynamics::step(&g, &c, &params, rule, &mut draws.clone()).map_err(|e| e.to_string())?;
    let reference = brute_force_reference_step(&g, &c, &params, rule, &draws);
    if fast == reference {
        Ok(format!("n={n} rule={rule}"))
    } else {
        Err(format!("n={n} rule={rule}: {fast:?} != {reference:?}"))
    }
}
