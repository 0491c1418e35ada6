//! The `spgg` command line: `generate`, `simulate`, `sweep` and `verify`.
//!
//! Exit status is 0 on success, 1 when a run or verification fails, and 2
//! for usage or configuration errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::convergence_round;
use crate::dynamics::{self, RunOptions, TieBreakStream, UpdateRule};
use crate::experiments::{derive_seed, initial_configuration, run_sweep, SweepSpec, TAG_INITIAL, TAG_NETWORK, TAG_TIES};
use crate::graph::{self, compute_metrics, GraphError, GraphMetrics, Network};
use crate::model::{
    check_theorem1_conditions, check_theorem2_conditions, sample_initial_two_order, Configuration, MainParams,
    ModelParams, Record, TwoOrderParams,
};
use crate::verify::Suite;

#[derive(Debug, Parser)]
#[command(name = "spgg", version, about = "Best-response public goods dynamics with hypocritical behavior")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a network and write it as an edge list.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Run the dynamics once and write the per-round trace as CSV.
    Simulate(SimulateArgs),
    /// Sweep (e_h, rho_h) and write a CSV and a PPM phase diagram.
    Sweep(SweepArgs),
    /// Run randomized property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenerateKind {
    /// Torus grid.
    Torus {
        width: usize,
        height: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Random regular graph by random pairing.
    Regular {
        n: usize,
        degree: usize,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Edge-list file.
    #[arg(long, conflicts_with_all = ["torus", "regular"])]
    pub graph: Option<PathBuf>,
    /// Torus as WIDTHxHEIGHT, e.g. 50x50.
    #[arg(long, conflicts_with = "regular")]
    pub torus: Option<String>,
    /// Random regular graph as N,DEGREE, e.g. 1000,10.
    #[arg(long)]
    pub regular: Option<String>,
    /// Flat key-value parameter file (JSON object or `key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub e_h: Option<f64>,
    #[arg(long)]
    pub rho_h: Option<f64>,
    #[arg(long)]
    pub rho_d: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub rounds: usize,
    /// Best-respond with probability P, otherwise pick uniformly.
    #[arg(long, value_name = "P", conflicts_with_all = ["no_hypocrisy", "two_order"])]
    pub noisy: Option<f64>,
    #[arg(long, conflicts_with = "two_order")]
    pub no_hypocrisy: bool,
    #[arg(long)]
    pub two_order: bool,
    /// Stop at a fixed point or 2-cycle.
    #[arg(long)]
    pub early_stop: bool,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub config: PathBuf,
    /// Output prefix; writes PREFIX.csv and PREFIX.ppm.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides master_seed from the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// contagion, bounds, reduction, girth, oscillation, oracle or all.
    pub suite: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub instances: Option<usize>,
    /// Write per-instance outcomes here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn failure(e: impl ToString) -> CliError {
    CliError::Failure(e.to_string())
}

fn io_failure(path: &Path, e: io::Error) -> CliError {
    CliError::Failure(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Failure(m) => eprintln!("failed: {m}"),
            }
            e.exit_code()
        }
    }
}

pub fn execute<W: Write>(cli: Cli, out: &mut W) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { kind } => generate(kind, out),
        Command::Simulate(args) => simulate(args, out),
        Command::Sweep(args) => sweep(args, out),
        Command::Verify(args) => verify(args, out),
    }
}

fn graph_error(e: GraphError) -> CliError {
    match e {
        GraphError::GenerationFailed { .. } | GraphError::Io(_) => failure(e),
        _ => usage(e),
    }
}

fn metrics_line(g: &Network, m: &GraphMetrics) -> String {
    format!(
        "network: n={} m={} min_degree={} diameter={} bipartite={} odd_girth={}",
        g.vertex_count(),
        g.edge_count(),
        m.min_degree,
        m.diameter,
        if m.is_bipartite() { "yes" } else { "no" },
        m.odd_girth.map_or("none".to_string(), |k| k.to_string())
    )
}

fn write_output(path: Option<&Path>, contents: &str, out: &mut impl Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| io_failure(p, e)),
        None => out.write_all(contents.as_bytes()).map_err(failure),
    }
}

fn generate<W: Write>(kind: GenerateKind, out: &mut W) -> Result<(), CliError> {
    let (g, path, effective) = match kind {
        GenerateKind::Torus { width, height, out } => {
            (graph::build_torus_grid(width, height).map_err(graph_error)?, out, format!("torus {width} {height}"))
        }
        GenerateKind::Regular { n, degree, seed, out } => {
            let g = graph::sample_random_regular(n, degree, &mut ChaCha8Rng::seed_from_u64(seed))
                .map_err(graph_error)?;
            (g, out, format!("regular {n} {degree} seed={seed}"))
        }
    };
    let metrics = compute_metrics(&g).map_err(graph_error)?;
    // With no output file the edge list goes to stdout, so keep the summary
    // on stderr.
    let summary = format!("effective: generate {effective}\n{}\n", metrics_line(&g, &metrics));
    match &path {
        Some(p) => {
            fs::write(p, g.to_edge_list()).map_err(|e| io_failure(p, e))?;
            out.write_all(summary.as_bytes()).map_err(failure)?;
        }
        None => {
            eprint!("{summary}");
            out.write_all(g.to_edge_list().as_bytes()).map_err(failure)?;
        }
    }
    Ok(())
}

fn parse_dims(text: &str, sep: char) -> Result<(usize, usize), CliError> {
    let (a, b) = text.split_once(sep).ok_or_else(|| usage(format!("expected A{sep}B, got {text:?}")))?;
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| usage(format!("{s:?}: {e}")));
    Ok((parse(a)?, parse(b)?))
}

fn load_record(path: Option<&PathBuf>) -> Result<Record, CliError> {
    match path {
        None => Ok(Record::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            text.parse().map_err(usage)
        }
    }
}

fn simulate<W: Write>(args: SimulateArgs, out: &mut W) -> Result<(), CliError> {
    let mut record = load_record(args.config.as_ref())?;
    let overrides = [
        ("e_h", args.e_h),
        ("rho_h", args.rho_h),
        ("rho_d", args.rho_d),
        ("alpha1", args.alpha1),
        ("alpha2", args.alpha2),
        ("beta1", args.beta1),
        ("beta2", args.beta2),
        ("epsilon", args.epsilon),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            record.set(key, v);
        }
    }
    let epsilon = record.number_or("epsilon", 0.01).map_err(usage)?;

    let (g, graph_desc) = if let Some(path) = &args.graph {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        (Network::parse_edge_list(&text).map_err(graph_error)?, format!("file:{}", path.display()))
    } else if let Some(t) = &args.torus {
        let (w, h) = parse_dims(t, 'x')?;
        (graph::build_torus_grid(w, h).map_err(graph_error)?, format!("torus:{w}x{h}"))
    } else if let Some(r) = &args.regular {
        let (n, d) = parse_dims(r, ',')?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(args.seed, &[TAG_NETWORK]));
        (graph::sample_random_regular(n, d, &mut rng).map_err(graph_error)?, format!("regular:{n},{d}"))
    } else {
        return Err(usage("one of --graph, --torus or --regular is required"));
    };
    g.ensure_connected().map_err(usage)?;
    let metrics = compute_metrics(&g).map_err(graph_error)?;

    let rule = if args.two_order {
        UpdateRule::TwoOrderGreedy
    } else if args.no_hypocrisy {
        UpdateRule::MainNoHypocrisy
    } else if let Some(p) = args.noisy {
        if !(0.0..=1.0).contains(&p) {
            return Err(usage(format!("--noisy expects a probability in [0, 1], got {p}")));
        }
        UpdateRule::MainNoisy { p_greedy: p }
    } else {
        UpdateRule::MainGreedy
    };

    let (params, initial, conditions, param_desc) = if args.two_order {
        let p = TwoOrderParams::from_record(&record).map_err(usage)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(args.seed, &[TAG_INITIAL]));
        let c0 = sample_initial_two_order(g.vertex_count(), epsilon, &mut rng).map_err(usage)?;
        let status = check_theorem2_conditions(&p, metrics.min_degree);
        let desc = format!("alpha1={} alpha2={} beta1={} beta2={}", p.alpha1, p.alpha2, p.beta1, p.beta2);
        (ModelParams::TwoOrder(p), Configuration::TwoOrder(c0), status.to_string(), desc)
    } else {
        let p = MainParams::from_record(&record).map_err(usage)?;
        let c0 = initial_configuration(g.vertex_count(), epsilon, rule, derive_seed(args.seed, &[TAG_INITIAL])).map_err(usage)?;
        let mut status = check_theorem1_conditions(&p, metrics.min_degree).to_string();
        if !p.in_regime() {
            status.push_str(" (warning: parameters outside 0<e_h<1, 0<rho_h<rho_d)");
        }
        let desc = format!("e_h={} rho_h={} rho_d={}", p.e_h, p.rho_h, p.rho_d);
        (ModelParams::Main(p), c0, status, desc)
    };

    let mut ties = TieBreakStream::from_seed(derive_seed(args.seed, &[TAG_TIES]));
    let options = RunOptions { max_rounds: args.rounds, early_stop: args.early_stop, record_snapshots: false };
    let trace = dynamics::run(&g, &initial, &params, rule, &mut ties, options).map_err(usage)?;

    let csv = trace.to_csv();
    match &args.out {
        Some(p) => fs::write(p, &csv).map_err(|e| io_failure(p, e))?,
        None => out.write_all(csv.as_bytes()).map_err(failure)?,
    }

    let converged = convergence_round(&trace);
    let summary = format!(
        "effective: simulate graph={graph_desc} {param_desc} epsilon={epsilon} rule={rule} seed={} rounds={} early_stop={}\n\
         {}\nconditions: {conditions}\nconverged: {}\ntermination: {:?} at round {}\n",
        args.seed,
        args.rounds,
        args.early_stop,
        metrics_line(&g, &metrics),
        converged.map_or("no".to_string(), |r| format!("yes (round {r})")),
        trace.termination,
        trace.round_reached,
    );
    if args.out.is_some() {
        out.write_all(summary.as_bytes()).map_err(failure)?;
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn sweep<W: Write>(args: SweepArgs, out: &mut W) -> Result<(), CliError> {
    let mut record = load_record(Some(&args.config))?;
    if let Some(seed) = args.seed {
        record.set("master_seed", seed);
    }
    let spec = SweepSpec::from_record(&record).map_err(usage)?;
    if args.workers == Some(0) {
        return Err(usage("--workers must be at least 1"));
    }
    let diagram = run_sweep(&spec, args.workers).map_err(failure)?;
    let csv_path = args.out.with_extension("csv");
    let ppm_path = args.out.with_extension("ppm");
    write_output(Some(&csv_path), &diagram.to_csv(), out)?;
    write_output(Some(&ppm_path), &diagram.render_ppm(), out)?;
    let effective = spec.to_record().to_string().lines().collect::<Vec<_>>().join(" ");
    writeln!(out, "effective: sweep {effective}").map_err(failure)?;
    writeln!(out, "wrote {} and {}", csv_path.display(), ppm_path.display()).map_err(failure)?;
    Ok(())
}

fn verify<W: Write>(args: VerifyArgs, out: &mut W) -> Result<(), CliError> {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse().map_err(usage)?]
    };
    writeln!(
        out,
        "effective: verify {} seed={} instances={}",
        args.suite,
        args.seed,
        args.instances.map_or("default".to_string(), |n| n.to_string())
    )
    .map_err(failure)?;
    let mut report = Vec::new();
    let mut failed = Vec::new();
    for suite in suites {
        let result = suite.run(args.seed, args.instances.unwrap_or(suite.default_instances()));
        result.write(&mut report).map_err(failure)?;
        let verdict = if result.passed() { "pass" } else { "FAIL" };
        writeln!(out, "{suite}: {verdict} ({} instances, {} failures)", result.outcomes.len(), result.failures())
            .map_err(failure)?;
        if !result.passed() {
            failed.push(suite.name());
        }
    }
    match &args.report {
        Some(p) => fs::write(p, &report).map_err(|e| io_failure(p, e))?,
        None => out.write_all(&report).map_err(failure)?,
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(failure(format!("suites failed: {}", failed.join(", "))))
    }
}
