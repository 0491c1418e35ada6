//! Behaviors, cost functions, initial configurations and parameter
//! conditions for the main model and the two-order punishment model.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("epsilon must lie strictly between 0 and 1 (got {0})")]
    Epsilon(f64),
    #[error("parameter {name} must be finite and non-negative (got {value})")]
    Parameter { name: &'static str, value: f64 },
    #[error("parameter {name} must be strictly positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("missing key {0:?}")]
    MissingKey(&'static str),
    #[error("key {key:?}: cannot parse {value:?} as a number")]
    BadNumber { key: String, value: String },
    #[error("malformed record: {0}")]
    Record(String),
}

/// Main-model behaviors. The derived order is the tie-break order:
/// `Cooperator > Hypocritical > Defector`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Behavior {
    Defector,
    Hypocritical,
    Cooperator,
}

impl Behavior {
    /// All behaviors, highest tie-break priority first.
    pub const TIE_ORDER: [Behavior; 3] = [Behavior::Cooperator, Behavior::Hypocritical, Behavior::Defector];

    pub fn is_defector(self) -> bool {
        self == Behavior::Defector
    }
}

/// A two-order behavior: first-order cooperation (contributing) and
/// second-order cooperation (punishing non-cooperating neighbors).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TwoOrderBehavior {
    pub chi1: bool,
    pub chi2: bool,
}

impl TwoOrderBehavior {
    pub const COOPERATOR: Self = Self { chi1: true, chi2: true };
    pub const DEFECTOR: Self = Self { chi1: false, chi2: false };
    pub const HYPOCRITICAL: Self = Self { chi1: false, chi2: true };
    pub const PRIVATE_COOPERATOR: Self = Self { chi1: true, chi2: false };

    /// Tie-break order; private cooperation ranks below defection.
    pub const TIE_ORDER: [Self; 4] =
        [Self::COOPERATOR, Self::HYPOCRITICAL, Self::DEFECTOR, Self::PRIVATE_COOPERATOR];

    pub fn is_private_cooperator(self) -> bool {
        self == Self::PRIVATE_COOPERATOR
    }

    /// The matching main-model behavior, `None` for a private cooperator.
    pub fn as_main(self) -> Option<Behavior> {
        match (self.chi1, self.chi2) {
            (true, true) => Some(Behavior::Cooperator),
            (false, true) => Some(Behavior::Hypocritical),
            (false, false) => Some(Behavior::Defector),
            (true, false) => None,
        }
    }
}

impl From<Behavior> for TwoOrderBehavior {
    fn from(b: Behavior) -> Self {
        match b {
            Behavior::Cooperator => Self::COOPERATOR,
            Behavior::Hypocritical => Self::HYPOCRITICAL,
            Behavior::Defector => Self::DEFECTOR,
        }
    }
}

/// A behavior assignment for every vertex, in one of the two models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Configuration {
    Main(Vec<Behavior>),
    TwoOrder(Vec<TwoOrderBehavior>),
}

impl Configuration {
    pub fn len(&self) -> usize {
        match self {
            Configuration::Main(c) => c.len(),
            Configuration::TwoOrder(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> BehaviorCounts {
        let mut counts = BehaviorCounts::default();
        match self {
            Configuration::Main(c) => c.iter().for_each(|&b| counts.add(b.into())),
            Configuration::TwoOrder(c) => c.iter().for_each(|&b| counts.add(b)),
        }
        counts
    }

    /// Whether vertex `u` punishes its neighbors (non-defector in the main
    /// model, second-order cooperator in the two-order model).
    pub fn punishes(&self, u: usize) -> bool {
        match self {
            Configuration::Main(c) => !c[u].is_defector(),
            Configuration::TwoOrder(c) => c[u].chi2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BehaviorCounts {
    pub defectors: usize,
    pub hypocritical: usize,
    pub cooperators: usize,
    pub private_cooperators: usize,
}

impl BehaviorCounts {
    fn add(&mut self, b: TwoOrderBehavior) {
        match (b.chi1, b.chi2) {
            (true, true) => self.cooperators += 1,
            (false, true) => self.hypocritical += 1,
            (false, false) => self.defectors += 1,
            (true, false) => self.private_cooperators += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.defectors + self.hypocritical + self.cooperators + self.private_cooperators
    }
}

/// Main-model costs. Defector and cooperator energy costs are fixed at 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MainParams {
    pub e_h: f64,
    pub rho_h: f64,
    pub rho_d: f64,
}

impl MainParams {
    /// Accepts any finite non-negative values; see [`MainParams::in_regime`]
    /// for the stricter regime the convergence results assume.
    pub fn new(e_h: f64, rho_h: f64, rho_d: f64) -> Result<Self, ModelError> {
        for (name, value) in [("e_h", e_h), ("rho_h", rho_h), ("rho_d", rho_d)] {
            if !value.is_finite() || value < 0.0 {
                return Err(ModelError::Parameter { name, value });
            }
        }
        Ok(Self { e_h, rho_h, rho_d })
    }

    /// `0 < e_h < 1`, `rho_h > 0`, `rho_d > 0` and `rho_h < rho_d`.
    pub fn in_regime(&self) -> bool {
        self.e_h > 0.0 && self.e_h < 1.0 && self.rho_h > 0.0 && self.rho_d > 0.0 && self.rho_h < self.rho_d
    }

    pub fn from_record(record: &Record) -> Result<Self, ModelError> {
        Self::new(record.number("e_h")?, record.number("rho_h")?, record.number("rho_d")?)
    }

    pub fn to_record(&self) -> Record {
        Record::from_pairs([("e_h", self.e_h), ("rho_h", self.rho_h), ("rho_d", self.rho_d)])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoOrderParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl TwoOrderParams {
    pub fn new(alpha1: f64, alpha2: f64, beta1: f64, beta2: f64) -> Result<Self, ModelError> {
        for (name, value) in [("alpha1", alpha1), ("alpha2", alpha2), ("beta1", beta1), ("beta2", beta2)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        Ok(Self { alpha1, alpha2, beta1, beta2 })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            alpha1: self.alpha1 * factor,
            alpha2: self.alpha2 * factor,
            beta1: self.beta1 * factor,
            beta2: self.beta2 * factor,
        }
    }

    pub fn from_record(record: &Record) -> Result<Self, ModelError> {
        Self::new(
            record.number("alpha1")?,
            record.number("alpha2")?,
            record.number("beta1")?,
            record.number("beta2")?,
        )
    }

    pub fn to_record(&self) -> Record {
        Record::from_pairs([
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ])
    }
}

/// Parameters for either model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelParams {
    Main(MainParams),
    TwoOrder(TwoOrderParams),
}

/// Cost of behavior `b` for a player with `k` non-defector neighbors.
pub fn cost_main(b: Behavior, k: usize, p: &MainParams) -> f64 {
    let k = k as f64;
    match b {
        Behavior::Cooperator => 1.0,
        Behavior::Defector => p.rho_d * k,
        Behavior::Hypocritical => p.e_h + p.rho_h * k,
    }
}

/// Cost of a two-order behavior for a player with `k2` punishing neighbors.
pub fn cost_two_order(b: TwoOrderBehavior, k2: usize, p: &TwoOrderParams) -> f64 {
    let k2 = k2 as f64;
    match (b.chi1, b.chi2) {
        (true, true) => p.alpha1 + p.alpha2,
        (false, false) => k2 * (p.beta1 + p.beta2),
        (false, true) => p.alpha2 + k2 * p.beta1,
        (true, false) => p.alpha1 + k2 * p.beta2,
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), ModelError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(ModelError::Epsilon(epsilon))
    }
}

/// Each vertex independently: defector with probability `1 - epsilon`,
/// hypocritical or cooperator with probability `epsilon / 2` each.
pub fn sample_initial_main<R: Rng + ?Sized>(n: usize, epsilon: f64, rng: &mut R) -> Result<Vec<Behavior>, ModelError> {
    check_epsilon(epsilon)?;
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < 1.0 - epsilon {
                Behavior::Defector
            } else if u < 1.0 - epsilon / 2.0 {
                Behavior::Hypocritical
            } else {
                Behavior::Cooperator
            }
        })
        .collect())
}

/// Initial state when hypocrisy is unavailable: defector with probability
/// `1 - epsilon`, otherwise cooperator.
pub fn sample_initial_no_hypocrisy<R: Rng + ?Sized>(
    n: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<Vec<Behavior>, ModelError> {
    check_epsilon(epsilon)?;
    Ok((0..n)
        .map(|_| if rng.gen::<f64>() < 1.0 - epsilon { Behavior::Defector } else { Behavior::Cooperator })
        .collect())
}

/// Defector with probability `1 - epsilon`, otherwise one of cooperator,
/// hypocritical and private cooperator with probability `epsilon / 3` each.
pub fn sample_initial_two_order<R: Rng + ?Sized>(
    n: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<Vec<TwoOrderBehavior>, ModelError> {
    check_epsilon(epsilon)?;
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < 1.0 - epsilon {
                TwoOrderBehavior::DEFECTOR
            } else if u < 1.0 - 2.0 * epsilon / 3.0 {
                TwoOrderBehavior::COOPERATOR
            } else if u < 1.0 - epsilon / 3.0 {
                TwoOrderBehavior::HYPOCRITICAL
            } else {
                TwoOrderBehavior::PRIVATE_COOPERATOR
            }
        })
        .collect())
}

/// Main-model parameters whose costs are the two-order costs divided by
/// `alpha1 + alpha2`.
pub fn map_two_order_params(p: &TwoOrderParams) -> MainParams {
    let scale = p.alpha1 + p.alpha2;
    MainParams { e_h: p.alpha2 / scale, rho_h: p.beta1 / scale, rho_d: (p.beta1 + p.beta2) / scale }
}

/// Private cooperators become defectors; everything else is unchanged.
pub fn map_configuration(c: &[TwoOrderBehavior]) -> Vec<Behavior> {
    c.iter().map(|b| b.as_main().unwrap_or(Behavior::Defector)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem1Status {
    Satisfied,
    /// `rho_h <= (1 - e_h) / delta`: hypocrisy never escalates to cooperation.
    PressureTooLow,
    /// `rho_h >= rho_d - e_h`: defection beats hypocrisy next to a punisher.
    PressureTooHigh,
    BothViolated,
}

/// Classifies `(1 - e_h) / delta < rho_h < rho_d - e_h` for minimum degree `delta`.
pub fn check_theorem1_conditions(p: &MainParams, delta: usize) -> Theorem1Status {
    let lower_ok = (1.0 - p.e_h) / (delta as f64) < p.rho_h;
    let upper_ok = p.rho_h < p.rho_d - p.e_h;
    match (lower_ok, upper_ok) {
        (true, true) => Theorem1Status::Satisfied,
        (false, true) => Theorem1Status::PressureTooLow,
        (true, false) => Theorem1Status::PressureTooHigh,
        (false, false) => Theorem1Status::BothViolated,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem2Status {
    Satisfied,
    /// `alpha2 >= beta2`.
    ConditionIFails,
    /// `alpha1 >= delta * beta1`.
    ConditionIIFails,
    BothFail,
}

pub fn check_theorem2_conditions(p: &TwoOrderParams, delta: usize) -> Theorem2Status {
    let first = p.alpha2 < p.beta2;
    let second = p.alpha1 < delta as f64 * p.beta1;
    match (first, second) {
        (true, true) => Theorem2Status::Satisfied,
        (false, true) => Theorem2Status::ConditionIFails,
        (true, false) => Theorem2Status::ConditionIIFails,
        (false, false) => Theorem2Status::BothFail,
    }
}

impl fmt::Display for Theorem1Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Theorem2Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A flat key-value record of scalars.
///
/// Parsed from either a JSON object whose values are numbers, strings or
/// booleans, or from `key = value` lines (`#` starts a comment). Written
/// back as `key = value` lines in key order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record {
    entries: BTreeMap<String, String>,
}

impl Record {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self { entries: pairs.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn merge(&mut self, other: &Record) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn number(&self, key: &'static str) -> Result<f64, ModelError> {
        let value = self.get(key).ok_or(ModelError::MissingKey(key))?;
        value.parse().map_err(|_| ModelError::BadNumber { key: key.to_string(), value: value.to_string() })
    }

    pub fn number_or(&self, key: &'static str, default: f64) -> Result<f64, ModelError> {
        if self.get(key).is_some() {
            self.number(key)
        } else {
            Ok(default)
        }
    }

    pub fn parse<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ModelError> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| ModelError::BadNumber { key: key.to_string(), value: v.to_string() }))
            .transpose()
    }
}

impl FromStr for Record {
    type Err = ModelError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let trimmed = text.trim_start();
        let mut entries = BTreeMap::new();
        if trimmed.starts_with('{') {
            let value: serde_json::Value =
                serde_json::from_str(text).map_err(|e| ModelError::Record(e.to_string()))?;
            let object = value.as_object().ok_or_else(|| ModelError::Record("expected a JSON object".into()))?;
            for (k, v) in object {
                let scalar = match v {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Number(n) => n.to_string(),
                    serde_json::Value::Bool(b) => b.to_string(),
                    _ => return Err(ModelError::Record(format!("key {k:?} is not a scalar"))),
                };
                entries.insert(k.clone(), scalar);
            }
        } else {
            for (i, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .or_else(|| line.split_once(':'))
                    .ok_or_else(|| ModelError::Record(format!("line {}: expected key = value", i + 1)))?;
                entries.insert(k.trim().to_string(), v.trim().trim_matches('"').to_string());
            }
        }
        Ok(Self { entries })
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FIG1: MainParams = MainParams { e_h: 0.2, rho_h: 0.25, rho_d: 0.5 };
    const GRID_TWO_ORDER: TwoOrderParams = TwoOrderParams { alpha1: 0.9, alpha2: 0.1, beta1: 0.23, beta2: 0.22 };

    #[test]
    fn main_costs_from_two_stage_illustration() {
        assert_eq!(cost_main(Behavior::Defector, 1, &FIG1), 0.5);
        assert!((cost_main(Behavior::Hypocritical, 1, &FIG1) - 0.45).abs() < 1e-12);
        assert!((cost_main(Behavior::Hypocritical, 4, &FIG1) - 1.2).abs() < 1e-12);
        assert!(cost_main(Behavior::Hypocritical, 4, &FIG1) > cost_main(Behavior::Cooperator, 4, &FIG1));
        assert_eq!(cost_main(Behavior::Defector, 0, &MainParams { e_h: 0.7, rho_h: 3.0, rho_d: 9.0 }), 0.0);
    }

    #[test]
    fn two_order_costs() {
        let p = GRID_TWO_ORDER;
        for k in [0, 3, 17] {
            assert!((cost_two_order(TwoOrderBehavior::COOPERATOR, k, &p) - 1.0).abs() < 1e-12);
        }
        assert!((cost_two_order(TwoOrderBehavior::DEFECTOR, 2, &p) - 0.9).abs() < 1e-12);
        let private = cost_two_order(TwoOrderBehavior::PRIVATE_COOPERATOR, 1, &p);
        assert!((private - 1.12).abs() < 1e-12);
        assert!(private > cost_two_order(TwoOrderBehavior::COOPERATOR, 1, &p));
    }

    #[test]
    fn mapped_params_match_grid_experiment() {
        let m = map_two_order_params(&GRID_TWO_ORDER);
        assert!((m.e_h - 0.1).abs() < 1e-12);
        assert!((m.rho_h - 0.23).abs() < 1e-12);
        assert!((m.rho_d - 0.45).abs() < 1e-12);
        let s = map_two_order_params(&GRID_TWO_ORDER.scaled(7.0));
        assert!((s.e_h - m.e_h).abs() < 1e-12 && (s.rho_h - m.rho_h).abs() < 1e-12);
        assert!((s.rho_d - m.rho_d).abs() < 1e-12);
        let unit = map_two_order_params(&TwoOrderParams::new(1.0, 1.0, 1.0, 1.0).unwrap());
        assert_eq!(unit, MainParams { e_h: 0.5, rho_h: 0.5, rho_d: 1.0 });
    }

    #[test]
    fn configuration_mapping() {
        use TwoOrderBehavior as T;
        assert_eq!(map_configuration(&[T::PRIVATE_COOPERATOR; 4]), vec![Behavior::Defector; 4]);
        assert_eq!(map_configuration(&[T::COOPERATOR; 3]), vec![Behavior::Cooperator; 3]);
        let mut mixed = vec![T::DEFECTOR; 10];
        mixed.extend([T::HYPOCRITICAL; 5]);
        mixed.extend([T::COOPERATOR; 3]);
        mixed.extend([T::PRIVATE_COOPERATOR; 2]);
        let counts = Configuration::Main(map_configuration(&mixed)).counts();
        assert_eq!((counts.defectors, counts.hypocritical, counts.cooperators), (12, 5, 3));
    }

    #[test]
    fn theorem1_classification() {
        let p = |e_h, rho_h, rho_d| MainParams { e_h, rho_h, rho_d };
        assert_eq!(check_theorem1_conditions(&p(0.1, 0.23, 0.45), 4), Theorem1Status::Satisfied);
        assert_eq!(check_theorem1_conditions(&p(0.1, 0.11, 0.22), 10), Theorem1Status::Satisfied);
        assert_eq!(check_theorem1_conditions(&p(0.1, 0.05, 0.45), 4), Theorem1Status::PressureTooLow);
        assert_eq!(check_theorem1_conditions(&p(0.1, 0.40, 0.45), 4), Theorem1Status::PressureTooHigh);
        assert_eq!(check_theorem1_conditions(&p(0.1, 0.05, 0.1), 4), Theorem1Status::BothViolated);
        // Boundary: (1 - 0.5) / 4 = 0.125 exactly.
        assert_ne!(check_theorem1_conditions(&p(0.5, 0.125, 2.0), 4), Theorem1Status::Satisfied);
        // Upper boundary: rho_d - e_h = 0.25 exactly.
        assert_ne!(check_theorem1_conditions(&p(0.25, 0.25, 0.5), 100), Theorem1Status::Satisfied);
    }

    #[test]
    fn theorem2_classification() {
        assert_eq!(check_theorem2_conditions(&GRID_TWO_ORDER, 4), Theorem2Status::Satisfied);
        let p = |a, b, c, d| TwoOrderParams::new(a, b, c, d).unwrap();
        assert_eq!(check_theorem2_conditions(&p(1.0, 1.0, 1.0, 0.5), 10), Theorem2Status::ConditionIFails);
        assert_eq!(check_theorem2_conditions(&p(10.0, 0.1, 1.0, 1.0), 4), Theorem2Status::ConditionIIFails);
        assert_eq!(check_theorem2_conditions(&p(10.0, 2.0, 1.0, 1.0), 4), Theorem2Status::BothFail);
    }

    #[test]
    fn epsilon_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_initial_main(5, 0.0, &mut rng), Err(ModelError::Epsilon(0.0)));
        assert!(sample_initial_main(5, 1.0, &mut rng).is_err());
        assert!(sample_initial_two_order(5, -0.5, &mut rng).is_err());
        assert!(sample_initial_no_hypocrisy(5, 1.5, &mut rng).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_initial_main(2500, 0.01, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_initial_main(2500, 0.01, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        let a = sample_initial_two_order(1000, 0.01, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_initial_two_order(1000, 0.01, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn params_validation() {
        assert!(MainParams::new(0.0, 0.0, 0.45).is_ok());
        assert!(!MainParams::new(0.0, 0.0, 0.45).unwrap().in_regime());
        assert!(MainParams::new(0.1, 0.23, 0.45).unwrap().in_regime());
        assert!(MainParams::new(f64::NAN, 0.1, 0.2).is_err());
        assert!(MainParams::new(0.1, -0.1, 0.2).is_err());
        assert!(TwoOrderParams::new(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn record_formats() {
        let json: Record = r#"{"e_h": 0.1, "rho_h": 0.23, "rho_d": 0.45, "rule": "greedy"}"#.parse().unwrap();
        let kv: Record = "# grid\ne_h = 0.1\nrho_h=0.23\nrho_d = 0.45\nrule = greedy\n".parse().unwrap();
        assert_eq!(json, kv);
        assert_eq!(MainParams::from_record(&json).unwrap(), MainParams { e_h: 0.1, rho_h: 0.23, rho_d: 0.45 });
        let back: Record = GRID_TWO_ORDER.to_record().to_string().parse().unwrap();
        assert_eq!(TwoOrderParams::from_record(&back).unwrap(), GRID_TWO_ORDER);
        assert_eq!(MainParams::from_record(&Record::default()), Err(ModelError::MissingKey("e_h")));
        assert!("{\"a\": [1]}".parse::<Record>().is_err());
        assert!("no separator".parse::<Record>().is_err());
    }
}
