//! Synchronous best-response dynamics.
//!
//! Every round, each player counts its punishing neighbors in the current
//! configuration, evaluates the cost of every available behavior, and adopts
//! a minimizer. All players read the same configuration; none sees another
//! player's new choice.
//!
//! # Random draws
//!
//! Draws come from a [`TieBreaker`] and are consumed per player in ascending
//! vertex order, rounds in order:
//!
//! 1. noisy rule only: one [`DrawKind::Noise`] draw, always. If it exceeds
//!    `p_greedy`, one [`DrawKind::Uniform`] draw picks uniformly among all
//!    available behaviors and the player is done;
//! 2. when the minimum cost is attained by more than one behavior, one
//!    [`DrawKind::Tie`] draw `r`. The tied behaviors are listed in tie-break
//!    order (cooperator, hypocritical, defector, private cooperator) and
//!    `[0, 1]` is split into equal consecutive closed-on-the-right intervals;
//!    the behavior whose interval contains `r` is adopted.
//!
//! No draw is consumed for an uncontested greedy decision.

use std::fmt;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::Network;
use crate::model::{
    cost_main, cost_two_order, Behavior, BehaviorCounts, Configuration, MainParams, ModelParams,
    TwoOrderBehavior, TwoOrderParams,
};

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("configuration has {config} entries but the network has {network} vertices")]
    LengthMismatch { config: usize, network: usize },
    #[error("update rule {rule} does not match the supplied {what}")]
    KindMismatch { rule: UpdateRule, what: &'static str },
    #[error("p_greedy must lie in [0, 1] (got {0})")]
    GreedyProbability(f64),
    #[error("max_rounds must be at least 1")]
    NoRounds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrawKind {
    Noise,
    Uniform,
    Tie,
}

/// Source of the uniform `[0, 1]` values that resolve ties and noise.
pub trait TieBreaker {
    fn draw(&mut self, vertex: usize, kind: DrawKind) -> f64;
}

/// Seeded stream of draws; ignores the vertex and kind and hands out values
/// in request order.
#[derive(Clone, Debug)]
pub struct TieBreakStream {
    rng: ChaCha8Rng,
}

impl TieBreakStream {
    pub fn from_seed(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl TieBreaker for TieBreakStream {
    fn draw(&mut self, _vertex: usize, _kind: DrawKind) -> f64 {
        self.rng.gen()
    }
}

/// Draws fixed in advance per player, for steppers that do not evaluate
/// players in index order.
#[derive(Clone, Debug, PartialEq)]
pub struct PlayerDraws {
    pub noise: f64,
    pub uniform: f64,
    pub tie: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssignedDraws(pub Vec<PlayerDraws>);

impl AssignedDraws {
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| PlayerDraws { noise: rng.gen(), uniform: rng.gen(), tie: rng.gen() }).collect())
    }
}

impl TieBreaker for AssignedDraws {
    fn draw(&mut self, vertex: usize, kind: DrawKind) -> f64 {
        let d = &self.0[vertex];
        match kind {
            DrawKind::Noise => d.noise,
            DrawKind::Uniform => d.uniform,
            DrawKind::Tie => d.tie,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UpdateRule {
    MainGreedy,
    /// Best response with probability `p_greedy`, otherwise a uniformly
    /// random behavior (which may coincide with the best response).
    MainNoisy { p_greedy: f64 },
    /// Only defection and cooperation are available.
    MainNoHypocrisy,
    TwoOrderGreedy,
}

impl UpdateRule {
    pub fn is_two_order(self) -> bool {
        matches!(self, UpdateRule::TwoOrderGreedy)
    }

    pub fn is_greedy(self) -> bool {
        !matches!(self, UpdateRule::MainNoisy { .. })
    }

    pub fn validate(self) -> Result<(), DynamicsError> {
        match self {
            UpdateRule::MainNoisy { p_greedy } if !(0.0..=1.0).contains(&p_greedy) => {
                Err(DynamicsError::GreedyProbability(p_greedy))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateRule::MainGreedy => f.write_str("greedy"),
            UpdateRule::MainNoisy { p_greedy } => write!(f, "noisy({p_greedy})"),
            UpdateRule::MainNoHypocrisy => f.write_str("no-hypocrisy"),
            UpdateRule::TwoOrderGreedy => f.write_str("two-order"),
        }
    }
}

const MAIN_NO_HYPOCRISY: [Behavior; 2] = [Behavior::Cooperator, Behavior::Defector];

/// Index into `m` tied options for draw `r`: option `i` owns `((i)/m, (i+1)/m]`
/// and option 0 also owns `r = 0`.
fn tie_index(r: f64, m: usize) -> usize {
    ((r * m as f64).ceil() as usize).saturating_sub(1).min(m - 1)
}

fn uniform_index(r: f64, m: usize) -> usize {
    ((r * m as f64).floor() as usize).min(m - 1)
}

fn punishing_neighbors(g: &Network, c: &Configuration, u: usize) -> usize {
    g.neighbors(u).iter().filter(|&&v| c.punishes(v)).count()
}

/// Best response among `options` (listed in tie-break order) with cost
/// function `cost`; consumes a tie draw only when the minimum is shared.
fn best_response<B: Copy, T: TieBreaker + ?Sized>(
    options: &[B],
    cost: impl Fn(B) -> f64,
    u: usize,
    ties: &mut T,
) -> B {
    debug_assert!(!options.is_empty() && options.len() <= 4);
    let mut tied = [options[0]; 4];
    let mut count = 0;
    let mut min = f64::INFINITY;
    for &b in options {
        let c = cost(b);
        if c < min {
            min = c;
            count = 0;
        }
        if c == min {
            tied[count] = b;
            count += 1;
        }
    }
    if count == 1 {
        tied[0]
    } else {
        tied[tie_index(ties.draw(u, DrawKind::Tie), count)]
    }
}

fn decide_main<T: TieBreaker + ?Sized>(
    g: &Network,
    config: &Configuration,
    p: &MainParams,
    rule: UpdateRule,
    u: usize,
    ties: &mut T,
) -> Behavior {
    let options: &[Behavior] = match rule {
        UpdateRule::MainNoHypocrisy => &MAIN_NO_HYPOCRISY,
        _ => &Behavior::TIE_ORDER,
    };
    if let UpdateRule::MainNoisy { p_greedy } = rule {
        if ties.draw(u, DrawKind::Noise) > p_greedy {
            return options[uniform_index(ties.draw(u, DrawKind::Uniform), options.len())];
        }
    }
    let k = punishing_neighbors(g, config, u);
    best_response(options, |b| cost_main(b, k, p), u, ties)
}

fn decide_two_order<T: TieBreaker + ?Sized>(
    g: &Network,
    config: &Configuration,
    p: &TwoOrderParams,
    u: usize,
    ties: &mut T,
) -> TwoOrderBehavior {
    let k2 = punishing_neighbors(g, config, u);
    best_response(&TwoOrderBehavior::TIE_ORDER, |b| cost_two_order(b, k2, p), u, ties)
}

fn check_inputs(
    g: &Network,
    c: &Configuration,
    params: &ModelParams,
    rule: UpdateRule,
) -> Result<(), DynamicsError> {
    rule.validate()?;
    if c.len() != g.vertex_count() {
        return Err(DynamicsError::LengthMismatch { config: c.len(), network: g.vertex_count() });
    }
    match (c, params, rule.is_two_order()) {
        (Configuration::Main(_), ModelParams::Main(_), false) => Ok(()),
        (Configuration::TwoOrder(_), ModelParams::TwoOrder(_), true) => Ok(()),
        (Configuration::Main(_), _, true) | (Configuration::TwoOrder(_), _, false) => {
            Err(DynamicsError::KindMismatch { rule, what: "configuration" })
        }
        _ => Err(DynamicsError::KindMismatch { rule, what: "parameters" }),
    }
}

/// Evaluates players in the given order. Output does not depend on the order
/// as long as the tie breaker's draws do not depend on request order.
fn step_in_order<T: TieBreaker + ?Sized>(
    g: &Network,
    c: &Configuration,
    params: &ModelParams,
    rule: UpdateRule,
    ties: &mut T,
    order: impl Iterator<Item = usize>,
) -> Configuration {
    match (c, params) {
        (Configuration::Main(current), ModelParams::Main(p)) => {
            let mut next = current.clone();
            for u in order {
                next[u] = decide_main(g, c, p, rule, u, ties);
            }
            Configuration::Main(next)
        }
        (Configuration::TwoOrder(current), ModelParams::TwoOrder(p)) => {
            let mut next = current.clone();
            for u in order {
                next[u] = decide_two_order(g, c, p, u, ties);
            }
            Configuration::TwoOrder(next)
        }
        _ => unreachable!("kinds checked by check_inputs"),
    }
}

/// One synchronous round.
pub fn step<T: TieBreaker + ?Sized>(
    g: &Network,
    c: &Configuration,
    params: &ModelParams,
    rule: UpdateRule,
    ties: &mut T,
) -> Result<Configuration, DynamicsError> {
    check_inputs(g, c, params, rule)?;
    Ok(step_in_order(g, c, params, rule, ties, 0..g.vertex_count()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    MaxRounds,
    /// The configuration at `round_reached` repeats in the next round.
    FixedPoint,
    /// The configurations at `round_reached` and `round_reached + 2` agree
    /// but differ from `round_reached + 1`.
    TwoCycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub max_rounds: usize,
    pub early_stop: bool,
    pub record_snapshots: bool,
}

impl RunOptions {
    pub fn exact(max_rounds: usize) -> Self {
        Self { max_rounds, early_stop: false, record_snapshots: false }
    }

    pub fn early_stop(max_rounds: usize) -> Self {
        Self { max_rounds, early_stop: true, record_snapshots: false }
    }

    pub fn with_snapshots(mut self) -> Self {
        self.record_snapshots = true;
        self
    }
}

/// Per-round behavior counts of one run, starting with round 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub counts: Vec<BehaviorCounts>,
    pub snapshots: Option<Vec<Configuration>>,
    pub round_reached: usize,
    pub termination: Termination,
    pub two_order: bool,
}

impl Trace {
    pub fn vertex_count(&self) -> usize {
        self.counts.first().map_or(0, BehaviorCounts::total)
    }

    pub fn last_round(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn final_counts(&self) -> BehaviorCounts {
        *self.counts.last().expect("a trace holds at least round 0")
    }

    pub fn csv_header(&self) -> &'static str {
        if self.two_order {
            "round,defectors,hypocritical,cooperators,private_cooperators"
        } else {
            "round,defectors,hypocritical,cooperators"
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for (round, c) in self.counts.iter().enumerate() {
            write!(w, "{round},{},{},{}", c.defectors, c.hypocritical, c.cooperators)?;
            if self.two_order {
                write!(w, ",{}", c.private_cooperators)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }
}

/// Iterates [`step`] from `c0` for up to `options.max_rounds` rounds.
///
/// With `early_stop`, the run halts as soon as the newest configuration
/// equals the previous one (fixed point) or the one before it (2-cycle).
pub fn run<T: TieBreaker + ?Sized>(
    g: &Network,
    c0: &Configuration,
    params: &ModelParams,
    rule: UpdateRule,
    ties: &mut T,
    options: RunOptions,
) -> Result<Trace, DynamicsError> {
    if options.max_rounds == 0 {
        return Err(DynamicsError::NoRounds);
    }
    check_inputs(g, c0, params, rule)?;

    let mut counts = vec![c0.counts()];
    let mut snapshots = options.record_snapshots.then(|| vec![c0.clone()]);
    let mut before_previous: Option<Configuration> = None;
    let mut previous = c0.clone();
    let mut termination = Termination::MaxRounds;
    let mut round_reached = options.max_rounds;

    for round in 1..=options.max_rounds {
        let next = step_in_order(g, &previous, params, rule, ties, 0..g.vertex_count());
        counts.push(next.counts());
        if let Some(s) = snapshots.as_mut() {
            s.push(next.clone());
        }
        if options.early_stop {
            if next == previous {
                termination = Termination::FixedPoint;
                round_reached = round - 1;
                break;
            }
            if before_previous.as_ref() == Some(&next) {
                termination = Termination::TwoCycle;
                round_reached = round - 2;
                break;
            }
        }
        before_previous = Some(std::mem::replace(&mut previous, next));
    }

    Ok(Trace { counts, snapshots, round_reached, termination, two_order: rule.is_two_order() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Behavior::{Cooperator as C, Defector as D, Hypocritical as H};
    use rand::seq::SliceRandom;

    fn triangle() -> Network {
        Network::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    const TRIANGLE_PARAMS: ModelParams = ModelParams::Main(MainParams { e_h: 0.2, rho_h: 0.5, rho_d: 0.8 });

    #[test]
    fn tie_intervals() {
        assert_eq!(tie_index(0.0, 2), 0);
        assert_eq!(tie_index(0.5, 2), 0);
        assert_eq!(tie_index(0.5000001, 2), 1);
        assert_eq!(tie_index(1.0, 2), 1);
        assert_eq!(tie_index(0.2, 3), 0);
        assert_eq!(tie_index(0.5, 3), 1);
        assert_eq!(tie_index(0.9, 3), 2);
        assert_eq!(tie_index(0.74, 4), 2);
        assert_eq!(uniform_index(0.0, 3), 0);
        assert_eq!(uniform_index(0.99, 3), 2);
        assert_eq!(uniform_index(1.0, 3), 2);
    }

    #[test]
    fn triangle_golden_steps() {
        // Hand evaluation: round 0 -> 1, vertex 0 sees no punisher (D: 0);
        // vertices 1, 2 see one (D 0.8, H 0.7, C 1). Round 1 -> 2, vertex 0
        // sees two (D 1.6, H 1.2, C 1), vertices 1, 2 one. Then all see two.
        let g = triangle();
        let mut ties = TieBreakStream::from_seed(0);
        let mut c = Configuration::Main(vec![C, D, D]);
        let expected = [vec![D, H, H], vec![C, H, H], vec![C, C, C], vec![C, C, C]];
        for want in expected {
            c = step(&g, &c, &TRIANGLE_PARAMS, UpdateRule::MainGreedy, &mut ties).unwrap();
            assert_eq!(c, Configuration::Main(want));
        }
    }

    #[test]
    fn all_defector_is_absorbing() {
        let g = triangle();
        let c = Configuration::Main(vec![D; 3]);
        let p = ModelParams::Main(MainParams { e_h: 0.01, rho_h: 0.01, rho_d: 5.0 });
        for rule in [UpdateRule::MainGreedy, UpdateRule::MainNoHypocrisy] {
            let next = step(&g, &c, &p, rule, &mut TieBreakStream::from_seed(1)).unwrap();
            assert_eq!(next, c);
        }
    }

    #[test]
    fn triangle_run_fixed_point() {
        let g = triangle();
        let c0 = Configuration::Main(vec![C, D, D]);
        let trace = run(
            &g,
            &c0,
            &TRIANGLE_PARAMS,
            UpdateRule::MainGreedy,
            &mut TieBreakStream::from_seed(0),
            RunOptions::early_stop(20),
        )
        .unwrap();
        assert_eq!(trace.termination, Termination::FixedPoint);
        assert_eq!(trace.round_reached, 3);
        let last = trace.final_counts();
        assert_eq!((last.defectors, last.hypocritical, last.cooperators), (0, 0, 3));
    }

    #[test]
    fn all_defector_run_stops_at_zero() {
        let g = triangle();
        let trace = run(
            &g,
            &Configuration::Main(vec![D; 3]),
            &TRIANGLE_PARAMS,
            UpdateRule::MainGreedy,
            &mut TieBreakStream::from_seed(0),
            RunOptions::early_stop(10),
        )
        .unwrap();
        assert_eq!(trace.termination, Termination::FixedPoint);
        assert_eq!(trace.round_reached, 0);
        assert!(trace.counts.iter().all(|c| c.defectors == 3));
    }

    #[test]
    fn exact_run_has_all_rounds() {
        let trace = run(
            &triangle(),
            &Configuration::Main(vec![C, D, D]),
            &TRIANGLE_PARAMS,
            UpdateRule::MainGreedy,
            &mut TieBreakStream::from_seed(0),
            RunOptions::exact(7).with_snapshots(),
        )
        .unwrap();
        assert_eq!(trace.counts.len(), 8);
        assert_eq!(trace.snapshots.as_ref().unwrap().len(), 8);
        assert_eq!(trace.termination, Termination::MaxRounds);
        assert_eq!(trace.round_reached, 7);
    }

    #[test]
    fn input_errors() {
        let g = triangle();
        let mut ties = TieBreakStream::from_seed(0);
        let short = Configuration::Main(vec![D; 2]);
        assert!(matches!(
            step(&g, &short, &TRIANGLE_PARAMS, UpdateRule::MainGreedy, &mut ties),
            Err(DynamicsError::LengthMismatch { config: 2, network: 3 })
        ));
        let c = Configuration::Main(vec![D; 3]);
        assert!(matches!(
            step(&g, &c, &TRIANGLE_PARAMS, UpdateRule::TwoOrderGreedy, &mut ties),
            Err(DynamicsError::KindMismatch { .. })
        ));
        let two = ModelParams::TwoOrder(TwoOrderParams { alpha1: 1.0, alpha2: 1.0, beta1: 1.0, beta2: 1.0 });
        assert!(matches!(
            step(&g, &c, &two, UpdateRule::MainGreedy, &mut ties),
            Err(DynamicsError::KindMismatch { what: "parameters", .. })
        ));
        assert!(matches!(
            step(&g, &c, &TRIANGLE_PARAMS, UpdateRule::MainNoisy { p_greedy: 1.5 }, &mut ties),
            Err(DynamicsError::GreedyProbability(_))
        ));
        assert_eq!(
            run(&g, &c, &TRIANGLE_PARAMS, UpdateRule::MainGreedy, &mut ties, RunOptions::exact(0)),
            Err(DynamicsError::NoRounds)
        );
    }

    #[test]
    fn evaluation_order_is_irrelevant() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let g = crate::graph::build_torus_grid(5, 4).unwrap();
        let p = ModelParams::Main(MainParams { e_h: 0.25, rho_h: 0.25, rho_d: 0.5 });
        for rule in [UpdateRule::MainGreedy, UpdateRule::MainNoisy { p_greedy: 0.7 }] {
            for _ in 0..50 {
                let c = Configuration::Main(
                    (0..g.vertex_count()).map(|_| Behavior::TIE_ORDER[rng.gen_range(0..3)]).collect(),
                );
                let draws = AssignedDraws::random(g.vertex_count(), &mut rng);
                let reference = step(&g, &c, &p, rule, &mut draws.clone()).unwrap();
                let mut order: Vec<usize> = (0..g.vertex_count()).collect();
                order.shuffle(&mut rng);
                let shuffled = step_in_order(&g, &c, &p, rule, &mut draws.clone(), order.into_iter());
                assert_eq!(reference, shuffled);
            }
        }
    }

    #[test]
    fn noisy_rule_with_certain_greed_matches_greedy() {
        let g = triangle();
        let c = Configuration::Main(vec![C, D, D]);
        let a = step(&g, &c, &TRIANGLE_PARAMS, UpdateRule::MainNoisy { p_greedy: 1.0 }, &mut TieBreakStream::from_seed(4));
        let b = step(&g, &c, &TRIANGLE_PARAMS, UpdateRule::MainGreedy, &mut TieBreakStream::from_seed(4));
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn trace_csv_layout() {
        let trace = run(
            &triangle(),
            &Configuration::TwoOrder(vec![TwoOrderBehavior::PRIVATE_COOPERATOR; 3]),
            &ModelParams::TwoOrder(TwoOrderParams { alpha1: 0.9, alpha2: 0.1, beta1: 0.23, beta2: 0.22 }),
            UpdateRule::TwoOrderGreedy,
            &mut TieBreakStream::from_seed(0),
            RunOptions::exact(1),
        )
        .unwrap();
        assert_eq!(
            trace.to_csv(),
            "round,defectors,hypocritical,cooperators,private_cooperators\n0,0,0,0,3\n1,3,0,0,0\n"
        );
    }
}
