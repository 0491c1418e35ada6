//! C ABI for `spgg`.
//!
//! Networks and traces are opaque handles created by `spgg_*` constructors
//! and released with the matching `*_free`. Every fallible function returns
//! an [`SpggStatus`]; on failure [`spgg_last_error`] describes the cause for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spgg::analysis::convergence_round;
use spgg::dynamics::{self, RunOptions, Termination, TieBreakStream, Trace, UpdateRule};
use spgg::experiments::{derive_seed, initial_configuration, TAG_INITIAL, TAG_TIES};
use spgg::graph::{self, compute_metrics, GraphError, Network};
use spgg::model::{self, Configuration, MainParams, ModelParams, Theorem1Status, Theorem2Status, TwoOrderParams};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpggStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGraph = 3,
    GenerationFailed = 4,
    OutOfRange = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpggBehavior {
    Defector = 0,
    Hypocritical = 1,
    Cooperator = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpggRule {
    Greedy = 0,
    /// Uses the `p_greedy` argument.
    Noisy = 1,
    NoHypocrisy = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpggTermination {
    MaxRounds = 0,
    FixedPoint = 1,
    TwoCycle = 2,
}

/// Condition classification. For the two-order model `TOO_LOW` means
/// `alpha1 >= delta * beta1` and `TOO_HIGH` means `alpha2 >= beta2`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpggConditions {
    Satisfied = 0,
    TooLow = 1,
    TooHigh = 2,
    BothViolated = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpggMainParams {
    pub e_h: f64,
    pub rho_h: f64,
    pub rho_d: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpggTwoOrderParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpggMetrics {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub diameter: usize,
    pub min_degree: usize,
    pub bipartite: bool,
    /// Zero when the network is bipartite.
    pub odd_girth: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpggCounts {
    pub defectors: usize,
    pub hypocritical: usize,
    pub cooperators: usize,
    pub private_cooperators: usize,
}

/// Opaque network handle.
pub struct SpggNetwork {
    inner: Network,
}

/// Opaque handle to the per-round counts of one run.
pub struct SpggTrace {
    inner: Trace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl ToString) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("nul bytes removed"));
}

fn fail(status: SpggStatus, message: impl ToString) -> SpggStatus {
    set_error(message);
    status
}

fn graph_status(e: GraphError) -> SpggStatus {
    let status = match e {
        GraphError::GenerationFailed { .. } => SpggStatus::GenerationFailed,
        _ => SpggStatus::InvalidGraph,
    };
    fail(status, e)
}

fn guard(f: impl FnOnce() -> SpggStatus) -> SpggStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == SpggStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => fail(SpggStatus::Panic, "internal panic"),
    }
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next `spgg_*` call on the same thread.
#[no_mangle]
pub extern "C" fn spgg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

unsafe fn write_network(out: *mut *mut SpggNetwork, g: Network) {
    *out = Box::into_raw(Box::new(SpggNetwork { inner: g }));
}

/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn spgg_network_torus(width: usize, height: usize, out: *mut *mut SpggNetwork) -> SpggStatus {
    guard(|| {
        if out.is_null() {
            return fail(SpggStatus::NullPointer, "out is null");
        }
        match graph::build_torus_grid(width, height) {
            Ok(g) => {
                write_network(out, g);
                SpggStatus::Ok
            }
            Err(e) => graph_status(e),
        }
    })
}

/// Random `degree`-regular network on at most `n` vertices.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn spgg_network_random_regular(
    n: usize,
    degree: usize,
    seed: u64,
    out: *mut *mut SpggNetwork,
) -> SpggStatus {
    guard(|| {
        if out.is_null() {
            return fail(SpggStatus::NullPointer, "out is null");
        }
        match graph::sample_random_regular(n, degree, &mut ChaCha8Rng::seed_from_u64(seed)) {
            Ok(g) => {
                write_network(out, g);
                SpggStatus::Ok
            }
            Err(e) => graph_status(e),
        }
    })
}

/// Parses the `n m` header plus `u v` lines format.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` valid writable storage.
#[no_mangle]
pub unsafe extern "C" fn spgg_network_from_edge_list(text: *const c_char, out: *mut *mut SpggNetwork) -> SpggStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "text or out is null");
        }
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(SpggStatus::InvalidArgument, "edge list is not UTF-8");
        };
        match Network::parse_edge_list(text) {
            Ok(g) => {
                write_network(out, g);
                SpggStatus::Ok
            }
            Err(e) => graph_status(e),
        }
    })
}

/// # Safety
/// `network` must come from an `spgg_network_*` constructor and not have
/// been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn spgg_network_free(network: *mut SpggNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}

/// # Safety
/// `network` must be a live handle and `out` valid writable storage.
#[no_mangle]
pub unsafe extern "C" fn spgg_network_metrics(network: *const SpggNetwork, out: *mut SpggMetrics) -> SpggStatus {
    guard(|| {
        if network.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "network or out is null");
        }
        let g = &(*network).inner;
        match compute_metrics(g) {
            Ok(m) => {
                *out = SpggMetrics {
                    vertex_count: g.vertex_count(),
                    edge_count: g.edge_count(),
                    diameter: m.diameter,
                    min_degree: m.min_degree,
                    bipartite: m.is_bipartite(),
                    odd_girth: m.odd_girth.unwrap_or(0),
                };
                SpggStatus::Ok
            }
            Err(e) => graph_status(e),
        }
    })
}

/// Degree of `vertex`.
///
/// # Safety
/// `network` must be a live handle and `out` valid writable storage.
#[no_mangle]
pub unsafe extern "C" fn spgg_network_degree(network: *const SpggNetwork, vertex: usize, out: *mut usize) -> SpggStatus {
    guard(|| {
        if network.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "network or out is null");
        }
        let g = &(*network).inner;
        if vertex >= g.vertex_count() {
            return fail(SpggStatus::OutOfRange, format!("vertex {vertex} out of range"));
        }
        *out = g.degree(vertex);
        SpggStatus::Ok
    })
}

fn main_params(p: &SpggMainParams) -> Result<MainParams, SpggStatus> {
    MainParams::new(p.e_h, p.rho_h, p.rho_d).map_err(|e| fail(SpggStatus::InvalidArgument, e))
}

fn two_order_params(p: &SpggTwoOrderParams) -> Result<TwoOrderParams, SpggStatus> {
    TwoOrderParams::new(p.alpha1, p.alpha2, p.beta1, p.beta2).map_err(|e| fail(SpggStatus::InvalidArgument, e))
}

fn main_rule(rule: SpggRule, p_greedy: f64) -> Result<UpdateRule, SpggStatus> {
    let r = match rule {
        SpggRule::Greedy => UpdateRule::MainGreedy,
        SpggRule::Noisy => UpdateRule::MainNoisy { p_greedy },
        SpggRule::NoHypocrisy => UpdateRule::MainNoHypocrisy,
    };
    r.validate().map_err(|e| fail(SpggStatus::InvalidArgument, e))?;
    Ok(r)
}

fn options(rounds: usize, early_stop: bool) -> Result<RunOptions, SpggStatus> {
    if rounds == 0 {
        return Err(fail(SpggStatus::InvalidArgument, "rounds must be positive"));
    }
    Ok(RunOptions { max_rounds: rounds, early_stop, record_snapshots: false })
}

unsafe fn finish_run(
    g: &Network,
    c0: Configuration,
    params: ModelParams,
    rule: UpdateRule,
    seed: u64,
    options: RunOptions,
    out: *mut *mut SpggTrace,
) -> SpggStatus {
    let mut ties = TieBreakStream::from_seed(derive_seed(seed, &[TAG_TIES]));
    match dynamics::run(g, &c0, &params, rule, &mut ties, options) {
        Ok(trace) => {
            *out = Box::into_raw(Box::new(SpggTrace { inner: trace }));
            SpggStatus::Ok
        }
        Err(e) => fail(SpggStatus::InvalidArgument, e),
    }
}

/// Samples an initial configuration and runs the main model. Seeding
/// matches `spgg simulate --seed`.
///
/// # Safety
/// `network` must be a live handle, `params` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spgg_simulate_main(
    network: *const SpggNetwork,
    params: *const SpggMainParams,
    rule: SpggRule,
    p_greedy: f64,
    epsilon: f64,
    seed: u64,
    rounds: usize,
    early_stop: bool,
    out: *mut *mut SpggTrace,
) -> SpggStatus {
    guard(|| {
        if network.is_null() || params.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "network, params or out is null");
        }
        let g = &(*network).inner;
        let prepared = (|| {
            let p = main_params(&*params)?;
            let rule = main_rule(rule, p_greedy)?;
            let options = options(rounds, early_stop)?;
            let c0 = initial_configuration(g.vertex_count(), epsilon, rule, derive_seed(seed, &[TAG_INITIAL]))
                .map_err(|e| fail(SpggStatus::InvalidArgument, e))?;
            Ok((p, rule, options, c0))
        })();
        match prepared {
            Ok((p, rule, options, c0)) => finish_run(g, c0, ModelParams::Main(p), rule, seed, options, out),
            Err(status) => status,
        }
    })
}

/// Samples an initial configuration and runs the two-order model.
///
/// # Safety
/// `network` must be a live handle, `params` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spgg_simulate_two_order(
    network: *const SpggNetwork,
    params: *const SpggTwoOrderParams,
    epsilon: f64,
    seed: u64,
    rounds: usize,
    early_stop: bool,
    out: *mut *mut SpggTrace,
) -> SpggStatus {
    guard(|| {
        if network.is_null() || params.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "network, params or out is null");
        }
        let g = &(*network).inner;
        let prepared = (|| {
            let p = two_order_params(&*params)?;
            let options = options(rounds, early_stop)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[TAG_INITIAL]));
            let c0 = model::sample_initial_two_order(g.vertex_count(), epsilon, &mut rng)
                .map_err(|e| fail(SpggStatus::InvalidArgument, e))?;
            Ok((p, options, c0))
        })();
        match prepared {
            Ok((p, options, c0)) => finish_run(
                g,
                Configuration::TwoOrder(c0),
                ModelParams::TwoOrder(p),
                UpdateRule::TwoOrderGreedy,
                seed,
                options,
                out,
            ),
            Err(status) => status,
        }
    })
}

/// # Safety
/// `trace` must come from an `spgg_simulate_*` call and not have been
/// freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn spgg_trace_free(trace: *mut SpggTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of recorded rounds, including round 0; zero for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spgg_trace_len(trace: *const SpggTrace) -> usize {
    if trace.is_null() {
        0
    } else {
        let t = &(*trace).inner;
        t.counts.len()
    }
}

/// # Safety
/// `trace` must be a live handle and `out` valid writable storage.
#[no_mangle]
pub unsafe extern "C" fn spgg_trace_counts(trace: *const SpggTrace, round: usize, out: *mut SpggCounts) -> SpggStatus {
    guard(|| {
        if trace.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "trace or out is null");
        }
        let t = &(*trace).inner;
        let Some(c) = t.counts.get(round) else {
            return fail(SpggStatus::OutOfRange, format!("round {round} was not recorded"));
        };
        *out = SpggCounts {
            defectors: c.defectors,
            hypocritical: c.hypocritical,
            cooperators: c.cooperators,
            private_cooperators: c.private_cooperators,
        };
        SpggStatus::Ok
    })
}

/// Writes the first round from which everyone cooperates and returns true,
/// or returns false if the run never settled on full cooperation.
///
/// # Safety
/// `trace` must be null or a live handle; `round` may be null.
#[no_mangle]
pub unsafe extern "C" fn spgg_trace_convergence_round(trace: *const SpggTrace, round: *mut usize) -> bool {
    if trace.is_null() {
        return false;
    }
    match convergence_round(&(*trace).inner) {
        Some(r) => {
            if !round.is_null() {
                *round = r;
            }
            true
        }
        None => false,
    }
}

/// Why the run stopped, and the round at which the cycle starts.
///
/// # Safety
/// `trace` must be a live handle and `round` valid writable storage or null.
#[no_mangle]
pub unsafe extern "C" fn spgg_trace_termination(
    trace: *const SpggTrace,
    out: *mut SpggTermination,
    round: *mut usize,
) -> SpggStatus {
    guard(|| {
        if trace.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "trace or out is null");
        }
        let t = &(*trace).inner;
        *out = match t.termination {
            Termination::MaxRounds => SpggTermination::MaxRounds,
            Termination::FixedPoint => SpggTermination::FixedPoint,
            Termination::TwoCycle => SpggTermination::TwoCycle,
        };
        if !round.is_null() {
            *round = t.round_reached;
        }
        SpggStatus::Ok
    })
}

/// Cost of `behavior` for a player with `k` non-defector neighbors.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spgg_cost_main(
    behavior: SpggBehavior,
    k: usize,
    params: *const SpggMainParams,
    out: *mut f64,
) -> SpggStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "params or out is null");
        }
        let p = match main_params(&*params) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let b = match behavior {
            SpggBehavior::Defector => model::Behavior::Defector,
            SpggBehavior::Hypocritical => model::Behavior::Hypocritical,
            SpggBehavior::Cooperator => model::Behavior::Cooperator,
        };
        *out = model::cost_main(b, k, &p);
        SpggStatus::Ok
    })
}

/// Classifies `(1 - e_h) / delta < rho_h < rho_d - e_h`.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spgg_check_main_conditions(
    params: *const SpggMainParams,
    delta: usize,
    out: *mut SpggConditions,
) -> SpggStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "params or out is null");
        }
        let p = match main_params(&*params) {
            Ok(p) => p,
            Err(status) => return status,
        };
        *out = match model::check_theorem1_conditions(&p, delta) {
            Theorem1Status::Satisfied => SpggConditions::Satisfied,
            Theorem1Status::PressureTooLow => SpggConditions::TooLow,
            Theorem1Status::PressureTooHigh => SpggConditions::TooHigh,
            Theorem1Status::BothViolated => SpggConditions::BothViolated,
        };
        SpggStatus::Ok
    })
}

/// Classifies `alpha2 < beta2` and `alpha1 < delta * beta1`.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spgg_check_two_order_conditions(
    params: *const SpggTwoOrderParams,
    delta: usize,
    out: *mut SpggConditions,
) -> SpggStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "params or out is null");
        }
        let p = match two_order_params(&*params) {
            Ok(p) => p,
            Err(status) => return status,
        };
        *out = match model::check_theorem2_conditions(&p, delta) {
            Theorem2Status::Satisfied => SpggConditions::Satisfied,
            Theorem2Status::ConditionIIFails => SpggConditions::TooLow,
            Theorem2Status::ConditionIFails => SpggConditions::TooHigh,
            Theorem2Status::BothFail => SpggConditions::BothViolated,
        };
        SpggStatus::Ok
    })
}

/// Main-model parameters equivalent to the two-order parameters.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spgg_map_two_order_params(
    params: *const SpggTwoOrderParams,
    out: *mut SpggMainParams,
) -> SpggStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return fail(SpggStatus::NullPointer, "params or out is null");
        }
        let p = match two_order_params(&*params) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let m = model::map_two_order_params(&p);
        *out = SpggMainParams { e_h: m.e_h, rho_h: m.rho_h, rho_d: m.rho_d };
        SpggStatus::Ok
    })
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn spgg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
