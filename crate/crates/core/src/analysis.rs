//! Checks that tie simulation output to the convergence results: the
//! convergence round, the diameter-based bound audit, the contagion
//! identity for the non-defector set, the two-order to main-model
//! reduction, and a brute-force reference stepper.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::dynamics::{self, AssignedDraws, DynamicsError, TieBreakStream, Trace, UpdateRule};
use crate::graph::{GraphMetrics, Network};
use crate::model::{
    check_theorem1_conditions, map_configuration, map_two_order_params, Behavior, Configuration, MainParams,
    ModelParams, Theorem1Status, TwoOrderBehavior, TwoOrderParams,
};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("convergence conditions not satisfied ({0}); the bound makes no claim")]
    ConditionsNotMet(Theorem1Status),
    #[error("contagion requires e_h + rho_h < rho_d")]
    ContagionPrecondition,
    #[error("reduction requires alpha2 < beta2")]
    ReductionPrecondition,
    #[error("audit needs a greedy main-model trace")]
    WrongTraceKind,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// First round from which every player cooperates until the end of the trace.
pub fn convergence_round(t: &Trace) -> Option<usize> {
    let n = t.vertex_count();
    let mut first = None;
    for (round, c) in t.counts.iter().enumerate() {
        if c.cooperators == n {
            first.get_or_insert(round);
        } else {
            first = None;
        }
    }
    first
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    /// The initial configuration meets the hypothesis of the relevant bound:
    /// one non-defector anywhere (non-bipartite) or one on each side.
    pub bound_applicable: bool,
    pub bound: usize,
    pub converged_round: Option<usize>,
    pub satisfied: bool,
}

impl AuditReport {
    /// `instance_id,bound_applicable,bound,converged_round,satisfied`; the
    /// round field is empty when the run never converged.
    pub fn to_record(&self, instance_id: &str) -> String {
        format!(
            "{instance_id},{},{},{},{}",
            self.bound_applicable,
            self.bound,
            self.converged_round.map(|r| r.to_string()).unwrap_or_default(),
            self.satisfied
        )
    }
}

/// Compares a greedy main-model run with the round bound: `3 * diam + 1` on
/// non-bipartite networks, `diam + 1` on bipartite ones.
pub fn audit_convergence_bound(
    metrics: &GraphMetrics,
    params: &MainParams,
    t: &Trace,
    initial: &[Behavior],
) -> Result<AuditReport, AnalysisError> {
    if t.two_order {
        return Err(AnalysisError::WrongTraceKind);
    }
    let status = check_theorem1_conditions(params, metrics.min_degree);
    if status != Theorem1Status::Satisfied {
        return Err(AnalysisError::ConditionsNotMet(status));
    }
    let non_defector = |v: &usize| !initial[*v].is_defector();
    let (bound, bound_applicable) = match &metrics.bipartition {
        None => (3 * metrics.diameter + 1, initial.iter().any(|b| !b.is_defector())),
        Some(parts) => (
            metrics.diameter + 1,
            parts.left.iter().any(non_defector) && parts.right.iter().any(non_defector),
        ),
    };
    let converged_round = convergence_round(t);
    let satisfied = converged_round.is_some_and(|r| r <= bound);
    Ok(AuditReport { bound_applicable, bound, converged_round, satisfied })
}

fn non_defectors(c: &[Behavior]) -> BTreeSet<usize> {
    c.iter().enumerate().filter(|(_, b)| !b.is_defector()).map(|(v, _)| v).collect()
}

/// Whether the non-defectors of `next` are exactly the neighborhood of the
/// non-defectors of `current`.
pub fn check_contagion(
    g: &Network,
    current: &[Behavior],
    next: &[Behavior],
    params: &MainParams,
) -> Result<bool, AnalysisError> {
    if !(params.e_h + params.rho_h < params.rho_d) {
        return Err(AnalysisError::ContagionPrecondition);
    }
    let neighborhood: BTreeSet<usize> =
        non_defectors(current).iter().flat_map(|&u| g.neighbors(u).iter().copied()).collect();
    Ok(neighborhood == non_defectors(next))
}

/// Side-by-side trajectories of the two-order model and its mapped main model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionOutcome {
    /// First round `t >= 1` at which the trajectories differ.
    pub first_mismatch: Option<usize>,
    /// Private cooperators summed over rounds `1..=rounds`.
    pub private_cooperators_after_start: usize,
}

impl ReductionOutcome {
    pub fn equivalent(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Runs the two-order model from `c0` and the main model from the mapped
/// configuration with mapped parameters, both breaking ties with streams
/// seeded by `seed`, and compares them at every round `1..=rounds`. A
/// private cooperator never matches any main-model behavior.
pub fn trace_reduction(
    g: &Network,
    c0: &[TwoOrderBehavior],
    p: &TwoOrderParams,
    seed: u64,
    rounds: usize,
) -> Result<ReductionOutcome, AnalysisError> {
    if !(p.alpha2 < p.beta2) {
        return Err(AnalysisError::ReductionPrecondition);
    }
    let two_params = ModelParams::TwoOrder(*p);
    let main_params = ModelParams::Main(map_two_order_params(p));
    let mut two = Configuration::TwoOrder(c0.to_vec());
    let mut main = Configuration::Main(map_configuration(c0));
    let mut two_ties = TieBreakStream::from_seed(seed);
    let mut main_ties = TieBreakStream::from_seed(seed);
    let mut outcome = ReductionOutcome { first_mismatch: None, private_cooperators_after_start: 0 };

    for round in 1..=rounds {
        two = dynamics::step(g, &two, &two_params, UpdateRule::TwoOrderGreedy, &mut two_ties)?;
        main = dynamics::step(g, &main, &main_params, UpdateRule::MainGreedy, &mut main_ties)?;
        let (Configuration::TwoOrder(t), Configuration::Main(m)) = (&two, &main) else {
            unreachable!("step preserves the configuration kind")
        };
        outcome.private_cooperators_after_start += t.iter().filter(|b| b.is_private_cooperator()).count();
        let same = t.iter().zip(m).all(|(a, b)| a.as_main() == Some(*b));
        if !same && outcome.first_mismatch.is_none() {
            outcome.first_mismatch = Some(round);
        }
    }
    Ok(outcome)
}

pub fn check_reduction_equivalence(
    g: &Network,
    c0: &[TwoOrderBehavior],
    p: &TwoOrderParams,
    seed: u64,
    rounds: usize,
) -> Result<bool, AnalysisError> {
    Ok(trace_reduction(g, c0, p, seed, rounds)?.equivalent())
}

/// Reference stepper written straight from the cost definitions, sharing no
/// code with [`dynamics::step`]: neighbor counts come from a dense adjacency
/// matrix, every behavior's cost is written out, and the minimizers are found
/// by comparing every pair. Draws are read from `draws` per player.
pub fn brute_force_reference_step(
    g: &Network,
    c: &Configuration,
    params: &ModelParams,
    rule: UpdateRule,
    draws: &AssignedDraws,
) -> Configuration {
    let n = g.vertex_count();
    let mut adjacent = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        adjacent[u][v] = true;
        adjacent[v][u] = true;
    }
    let punishers = |u: usize| -> f64 {
        let mut k = 0.0;
        for v in 0..n {
            if adjacent[u][v] {
                let punishing = match c {
                    Configuration::Main(m) => m[v] != Behavior::Defector,
                    Configuration::TwoOrder(t) => t[v].chi2,
                };
                if punishing {
                    k += 1.0;
                }
            }
        }
        k
    };

    match (c, params) {
        (Configuration::Main(_), ModelParams::Main(p)) => {
            let mut options = vec![(Behavior::Cooperator, 0u8), (Behavior::Hypocritical, 1), (Behavior::Defector, 2)];
            if rule == UpdateRule::MainNoHypocrisy {
                options.retain(|(b, _)| *b != Behavior::Hypocritical);
            }
            let next = (0..n)
                .map(|u| {
                    let d = &draws.0[u];
                    if let UpdateRule::MainNoisy { p_greedy } = rule {
                        if d.noise > p_greedy {
                            return options[pick_uniform(d.uniform, options.len())].0;
                        }
                    }
                    let k = punishers(u);
                    let priced: Vec<(Behavior, u8, f64)> = options
                        .iter()
                        .map(|&(b, rank)| {
                            let cost = match b {
                                Behavior::Cooperator => 1.0,
                                Behavior::Hypocritical => p.e_h + p.rho_h * k,
                                Behavior::Defector => p.rho_d * k,
                            };
                            (b, rank, cost)
                        })
                        .collect();
                    choose(&priced, d.tie)
                })
                .collect();
            Configuration::Main(next)
        }
        (Configuration::TwoOrder(_), ModelParams::TwoOrder(p)) => {
            let options = [
                (TwoOrderBehavior::COOPERATOR, 0u8),
                (TwoOrderBehavior::HYPOCRITICAL, 1),
                (TwoOrderBehavior::DEFECTOR, 2),
                (TwoOrderBehavior::PRIVATE_COOPERATOR, 3),
            ];
            let next = (0..n)
                .map(|u| {
                    let k2 = punishers(u);
                    let priced: Vec<(TwoOrderBehavior, u8, f64)> = options
                        .iter()
                        .map(|&(b, rank)| {
                            let cost = if b == TwoOrderBehavior::COOPERATOR {
                                p.alpha1 + p.alpha2
                            } else if b == TwoOrderBehavior::DEFECTOR {
                                k2 * (p.beta1 + p.beta2)
                            } else if b == TwoOrderBehavior::HYPOCRITICAL {
                                p.alpha2 + k2 * p.beta1
                            } else {
                                p.alpha1 + k2 * p.beta2
                            };
                            (b, rank, cost)
                        })
                        .collect();
                    choose(&priced, draws.0[u].tie)
                })
                .collect();
            Configuration::TwoOrder(next)
        }
        _ => panic!("configuration and parameter kinds differ"),
    }
}

/// Minimizers by pairwise comparison, ordered by rank, then the one whose
/// interval `((i)/m, (i+1)/m]` contains `r`.
fn choose<B: Copy>(priced: &[(B, u8, f64)], r: f64) -> B {
    let mut minimizers: Vec<(u8, B)> = priced
        .iter()
        .filter(|(_, _, cost)| priced.iter().all(|(_, _, other)| cost <= other))
        .map(|&(b, rank, _)| (rank, b))
        .collect();
    minimizers.sort_by_key(|&(rank, _)| rank);
    if minimizers.len() == 1 {
        return minimizers[0].1;
    }
    let m = minimizers.len();
    for (i, &(_, b)) in minimizers.iter().enumerate() {
        if r * m as f64 <= (i + 1) as f64 {
            return b;
        }
    }
    minimizers[m - 1].1
}

fn pick_uniform(r: f64, m: usize) -> usize {
    (0..m).find(|&i| r * (m as f64) < (i + 1) as f64).unwrap_or(m - 1)
}
