//! Time-evolution runs and (E_h, rho_h) phase-diagram sweeps.

use std::fmt::Write as _;
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{self, DrawKind, DynamicsError, RunOptions, TieBreakStream, TieBreaker, Trace, UpdateRule};
use crate::graph::{self, GraphError, Network};
use crate::model::{
    sample_initial_main, sample_initial_no_hypocrisy, Configuration, MainParams, ModelError, ModelParams, Record,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetworkSpec {
    Torus { width: usize, height: usize },
    RandomRegular { n: usize, degree: usize },
}

impl NetworkSpec {
    /// The torus ignores `seed`.
    pub fn build(&self, seed: u64) -> Result<Network, GraphError> {
        match *self {
            NetworkSpec::Torus { width, height } => graph::build_torus_grid(width, height),
            NetworkSpec::RandomRegular { n, degree } => {
                graph::sample_random_regular(n, degree, &mut ChaCha8Rng::seed_from_u64(seed))
            }
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, NetworkSpec::RandomRegular { .. })
    }
}

/// Mixes `parts` into `master` (SplitMix64 finalizer per part) so that
/// nearby indices give unrelated seeds.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

pub const TAG_NETWORK: u64 = 1;
pub const TAG_INITIAL: u64 = 2;
pub const TAG_TIES: u64 = 3;

/// Initial configuration for a main-model rule; the hypocrisy-free rule
/// starts with cooperators only.
pub fn initial_configuration(
    n: usize,
    epsilon: f64,
    rule: UpdateRule,
    seed: u64,
) -> Result<Configuration, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = match rule {
        UpdateRule::MainNoHypocrisy => sample_initial_no_hypocrisy(n, epsilon, &mut rng)?,
        UpdateRule::TwoOrderGreedy => {
            return Err(ExperimentError::InvalidSpec("experiments run the main model".into()))
        }
        _ => sample_initial_main(n, epsilon, &mut rng)?,
    };
    Ok(Configuration::Main(c))
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub network: Network,
    pub initial: Configuration,
    pub trace: Trace,
}

/// A single main-model run of exactly `rounds` rounds, with network, initial
/// configuration and tie-breaking all derived from `seed`.
pub fn run_time_evolution(
    spec: &NetworkSpec,
    params: &MainParams,
    epsilon: f64,
    rule: UpdateRule,
    seed: u64,
    rounds: usize,
) -> Result<Evolution, ExperimentError> {
    let network = spec.build(derive_seed(seed, &[TAG_NETWORK]))?;
    let initial = initial_configuration(network.vertex_count(), epsilon, rule, derive_seed(seed, &[TAG_INITIAL]))?;
    let mut ties = TieBreakStream::from_seed(derive_seed(seed, &[TAG_TIES]));
    let trace = dynamics::run(
        &network,
        &initial,
        &ModelParams::Main(*params),
        rule,
        &mut ties,
        RunOptions::exact(rounds).with_snapshots(),
    )?;
    Ok(Evolution { network, initial, trace })
}

/// `count` inclusive, evenly spaced values from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub network: NetworkSpec,
    pub e_h_count: usize,
    pub e_h_range: (f64, f64),
    pub rho_h_count: usize,
    /// Defaults to `(0, rho_d)`.
    pub rho_h_range: (f64, f64),
    pub rho_d: f64,
    pub epsilon: f64,
    pub rounds: usize,
    pub repetitions: usize,
    pub rule: UpdateRule,
    pub master_seed: u64,
    /// Draw a new network for every repetition (random networks only).
    pub fresh_network_per_repetition: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidSpec(m.to_string()));
        if self.e_h_count == 0 || self.rho_h_count == 0 {
            return bad("value counts must be at least 1");
        }
        if self.rounds == 0 || self.repetitions == 0 {
            return bad("rounds and repetitions must be at least 1");
        }
        let (e_lo, e_hi) = self.e_h_range;
        if !(0.0 <= e_lo && e_lo <= e_hi && e_hi <= 1.0) {
            return bad("e_h range must lie within [0, 1]");
        }
        let (r_lo, r_hi) = self.rho_h_range;
        if !(0.0 <= r_lo && r_lo <= r_hi && r_hi <= self.rho_d) {
            return bad("rho_h range must lie within [0, rho_d]");
        }
        if !(self.rho_d.is_finite() && self.rho_d > 0.0) {
            return bad("rho_d must be positive");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        if self.rule.is_two_order() {
            return bad("sweeps run the main model");
        }
        if let UpdateRule::MainNoisy { p_greedy } = self.rule {
            if !(0.0..=1.0).contains(&p_greedy) {
                return bad("p_greedy must lie in [0, 1]");
            }
        }
        Ok(())
    }

    pub fn e_h_values(&self) -> Vec<f64> {
        linspace(self.e_h_range.0, self.e_h_range.1, self.e_h_count)
    }

    pub fn rho_h_values(&self) -> Vec<f64> {
        linspace(self.rho_h_range.0, self.rho_h_range.1, self.rho_h_count)
    }

    /// Reads a flat record. Keys: `network` (`torus` | `regular`), `width`,
    /// `height`, `n`, `degree`, `e_h_count`, `e_h_min`, `e_h_max`,
    /// `rho_h_count`, `rho_h_min`, `rho_h_max`, `rho_d`, `epsilon`, `rounds`,
    /// `repetitions`, `rule` (`greedy` | `noisy` | `no-hypocrisy`),
    /// `p_greedy`, `master_seed`, `fresh_network`.
    pub fn from_record(r: &Record) -> Result<Self, ExperimentError> {
        let req = |key: &'static str| -> Result<usize, ExperimentError> {
            r.parse::<usize>(key)?.ok_or(ExperimentError::Model(ModelError::MissingKey(key)))
        };
        let network = match r.get("network").unwrap_or("torus") {
            "torus" | "grid" => NetworkSpec::Torus { width: req("width")?, height: req("height")? },
            "regular" | "random-regular" => NetworkSpec::RandomRegular { n: req("n")?, degree: req("degree")? },
            other => return Err(ExperimentError::InvalidSpec(format!("unknown network {other:?}"))),
        };
        let rho_d = r.number("rho_d")?;
        let rule = match r.get("rule").unwrap_or("greedy") {
            "greedy" => UpdateRule::MainGreedy,
            "noisy" => UpdateRule::MainNoisy { p_greedy: r.number_or("p_greedy", 0.95)? },
            "no-hypocrisy" => UpdateRule::MainNoHypocrisy,
            other => return Err(ExperimentError::InvalidSpec(format!("unknown rule {other:?}"))),
        };
        let master_seed = r.parse::<u64>("master_seed")?.ok_or(ModelError::MissingKey("master_seed"))?;
        let spec = Self {
            network,
            e_h_count: req("e_h_count")?,
            e_h_range: (r.number_or("e_h_min", 0.0)?, r.number_or("e_h_max", 1.0)?),
            rho_h_count: req("rho_h_count")?,
            rho_h_range: (r.number_or("rho_h_min", 0.0)?, r.number_or("rho_h_max", rho_d)?),
            rho_d,
            epsilon: r.number_or("epsilon", 0.01)?,
            rounds: req("rounds")?,
            repetitions: req("repetitions")?,
            rule,
            master_seed,
            fresh_network_per_repetition: r.parse::<bool>("fresh_network")?.unwrap_or(false),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Effective configuration with every default resolved.
    pub fn to_record(&self) -> Record {
        let mut r = Record::default();
        match self.network {
            NetworkSpec::Torus { width, height } => {
                r.set("network", "torus");
                r.set("width", width);
                r.set("height", height);
            }
            NetworkSpec::RandomRegular { n, degree } => {
                r.set("network", "regular");
                r.set("n", n);
                r.set("degree", degree);
            }
        }
        r.set("e_h_count", self.e_h_count);
        r.set("e_h_min", self.e_h_range.0);
        r.set("e_h_max", self.e_h_range.1);
        r.set("rho_h_count", self.rho_h_count);
        r.set("rho_h_min", self.rho_h_range.0);
        r.set("rho_h_max", self.rho_h_range.1);
        r.set("rho_d", self.rho_d);
        r.set("epsilon", self.epsilon);
        r.set("rounds", self.rounds);
        r.set("repetitions", self.repetitions);
        match self.rule {
            UpdateRule::MainNoisy { p_greedy } => {
                r.set("rule", "noisy");
                r.set("p_greedy", p_greedy);
            }
            UpdateRule::MainNoHypocrisy => r.set("rule", "no-hypocrisy"),
            _ => r.set("rule", "greedy"),
        }
        r.set("master_seed", self.master_seed);
        r.set("fresh_network", self.fresh_network_per_repetition);
        r
    }
}

/// Time-averaged behavior proportions over an `(e_h, rho_h)` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDiagram {
    pub e_h_values: Vec<f64>,
    pub rho_h_values: Vec<f64>,
    /// `(defector, hypocritical, cooperator)` fractions, indexed
    /// `[e_h index * rho_h count + rho_h index]`.
    pub cells: Vec<[f64; 3]>,
}

impl PhaseDiagram {
    pub fn cell(&self, e_h_index: usize, rho_h_index: usize) -> [f64; 3] {
        self.cells[e_h_index * self.rho_h_values.len() + rho_h_index]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "e_h,rho_h,frac_defector,frac_hypocritical,frac_cooperator")?;
        for (i, e_h) in self.e_h_values.iter().enumerate() {
            for (j, rho_h) in self.rho_h_values.iter().enumerate() {
                let [d, h, c] = self.cell(i, j);
                writeln!(w, "{e_h},{rho_h},{d},{h},{c}")?;
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }

    /// Plain PPM (P3), one pixel per cell: red = defectors, green =
    /// cooperators, blue = hypocritical, each `round(255 * fraction)`.
    /// Columns follow increasing e_h left to right; rows follow increasing
    /// rho_h top to bottom.
    pub fn render_ppm(&self) -> String {
        let (w, h) = (self.e_h_values.len(), self.rho_h_values.len());
        let mut out = String::new();
        let _ = writeln!(out, "P3");
        let _ = writeln!(
            out,
            "# R=defector G=cooperator B=hypocritical; x: e_h {} -> {} (left to right); y: rho_h {} -> {} (top to bottom)",
            self.e_h_values.first().copied().unwrap_or(0.0),
            self.e_h_values.last().copied().unwrap_or(0.0),
            self.rho_h_values.first().copied().unwrap_or(0.0),
            self.rho_h_values.last().copied().unwrap_or(0.0),
        );
        let _ = writeln!(out, "{w} {h}");
        let _ = writeln!(out, "255");
        let channel = |f: f64| (255.0 * f).round().clamp(0.0, 255.0) as u8;
        for j in 0..h {
            let row: Vec<String> = (0..w)
                .map(|i| {
                    let [d, hyp, c] = self.cell(i, j);
                    format!("{} {} {}", channel(d), channel(c), channel(hyp))
                })
                .collect();
            let _ = writeln!(out, "{}", row.join("  "));
        }
        out
    }
}

/// Counts the draws handed out by the wrapped stream.
struct CountingTies<'a> {
    inner: &'a mut TieBreakStream,
    draws: usize,
}

impl TieBreaker for CountingTies<'_> {
    fn draw(&mut self, vertex: usize, kind: DrawKind) -> f64 {
        self.draws += 1;
        self.inner.draw(vertex, kind)
    }
}

/// Proportions after exactly `rounds` rounds of one repetition.
fn final_proportions(
    network: &Network,
    params: &MainParams,
    spec: &SweepSpec,
    seed: u64,
) -> Result<[f64; 3], ExperimentError> {
    let n = network.vertex_count();
    let params = ModelParams::Main(*params);
    let mut current = initial_configuration(n, spec.epsilon, spec.rule, derive_seed(seed, &[TAG_INITIAL]))?;
    let mut stream = TieBreakStream::from_seed(derive_seed(seed, &[TAG_TIES]));
    for _ in 0..spec.rounds {
        let mut ties = CountingTies { inner: &mut stream, draws: 0 };
        let next = dynamics::step(network, &current, &params, spec.rule, &mut ties)?;
        // A greedy round that repeats its input without consulting a single
        // draw will repeat forever.
        let frozen = ties.draws == 0 && next == current;
        current = next;
        if frozen {
            break;
        }
    }
    let c = current.counts();
    let n = n as f64;
    Ok([c.defectors as f64 / n, c.hypocritical as f64 / n, c.cooperators as f64 / n])
}

/// Runs every cell of the sweep. Cell `(i, j)`, repetition `r` uses seeds
/// derived from `(master_seed, i, j, r)`; random networks are derived from
/// `(master_seed, r)` when fresh per repetition and from `master_seed`
/// otherwise, so the result does not depend on `workers`.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<PhaseDiagram, ExperimentError> {
    spec.validate()?;
    let e_h_values = spec.e_h_values();
    let rho_h_values = spec.rho_h_values();

    let network_count = if spec.network.is_random() && spec.fresh_network_per_repetition { spec.repetitions } else { 1 };
    let networks: Vec<Network> = (0..network_count)
        .map(|r| spec.network.build(derive_seed(spec.master_seed, &[TAG_NETWORK, r as u64])))
        .collect::<Result<_, _>>()?;

    let cell_count = e_h_values.len() * rho_h_values.len();
    let compute = || -> Result<Vec<[f64; 3]>, ExperimentError> {
        (0..cell_count)
            .into_par_iter()
            .map(|cell| {
                let (i, j) = (cell / rho_h_values.len(), cell % rho_h_values.len());
                let params = MainParams { e_h: e_h_values[i], rho_h: rho_h_values[j], rho_d: spec.rho_d };
                let mut sum = [0.0; 3];
                for r in 0..spec.repetitions {
                    let network = &networks[r % networks.len()];
                    let seed = derive_seed(spec.master_seed, &[i as u64, j as u64, r as u64]);
                    let p = final_proportions(network, &params, spec, seed)?;
                    for k in 0..3 {
                        sum[k] += p[k];
                    }
                }
                Ok(sum.map(|s| s / spec.repetitions as f64))
            })
            .collect()
    };

    let cells = match workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| ExperimentError::Pool(e.to_string()))?
            .install(compute)?,
        None => compute()?,
    };
    Ok(PhaseDiagram { e_h_values, rho_h_values, cells })
}
