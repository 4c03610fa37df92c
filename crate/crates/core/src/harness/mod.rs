//! Randomized and constructed-example verification with margin statistics,
//! counterexample capture, probes and deterministic parallel execution.

pub mod checks;
pub mod probes;
pub mod sampling;
mod suites;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::algebra::AlgebraElement;
use crate::two_box::{ElementLiteral, TwoBoxError, TwoBoxPair};
use sampling::{sample_seed, stream_seed};

pub const DEFAULT_SEED: u64 = 0x6e63_7570;
pub const DEFAULT_SAMPLES: usize = 500;
pub const DEFAULT_TAO_BUDGET: usize = 100_000;
pub const MAX_COUNTEREXAMPLES: usize = 10;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("model `{spec}`: {source}")]
    Model { spec: String, source: TwoBoxError },
    #[error("{0}")]
    Setup(String),
}

/// A Lebesgue exponent in [1, ∞]. Serialized as a number, or "inf".
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const INF: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self, String> {
        if p.is_nan() || p < 1.0 {
            return Err(format!("exponent {p} is not in [1, inf]"));
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn reciprocal(self) -> f64 {
        1.0 / self.0
    }

    /// q with 1/p + 1/q = 1.
    pub fn conjugate(self) -> Exponent {
        if self.0 == 1.0 {
            Exponent::INF
        } else if self.0.is_infinite() {
            Exponent(1.0)
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "∞") {
            return Ok(Exponent::INF);
        }
        let v = match s.split_once('/') {
            Some((a, b)) => {
                let a: f64 = a.trim().parse().map_err(|_| format!("bad exponent `{s}`"))?;
                let b: f64 = b.trim().parse().map_err(|_| format!("bad exponent `{s}`"))?;
                a / b
            }
            None => s.parse().map_err(|_| format!("bad exponent `{s}`"))?,
        };
        Exponent::new(v)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Exponent::new(v).map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn e(p: f64) -> Exponent {
    Exponent(p)
}

pub fn default_hausdorff_young_grid() -> Vec<Exponent> {
    vec![e(2.0), e(2.5), e(3.0), e(4.0), e(8.0), Exponent::INF]
}

pub fn default_young_grid() -> Vec<[Exponent; 3]> {
    let inf = Exponent::INF;
    vec![
        [e(1.0), e(1.0), e(1.0)],
        [e(1.0), e(2.0), e(2.0)],
        [e(2.0), e(1.0), e(2.0)],
        [e(1.0), inf, inf],
        [inf, e(1.0), inf],
        [e(2.0), e(2.0), inf],
        [e(1.5), e(1.5), e(3.0)],
        [e(1.5), e(3.0), inf],
        [e(4.0 / 3.0), e(4.0 / 3.0), e(2.0)],
    ]
}

/// 1/p + 1/q = 1/r + 1.
pub fn young_triple_valid(t: &[Exponent; 3]) -> bool {
    (t[0].reciprocal() + t[1].reciprocal() - t[2].reciprocal() - 1.0).abs() <= 1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Plancherel, ℱ⁴ = id, ℱ⁻¹(x*) = ℱ(x)*, closed forms, Jones projections.
    pub plancherel: f64,
    /// Slack for every inequality margin.
    pub inequality: f64,
    /// Equality assertions: flatness, square relation, biunitary witnesses.
    pub equality: f64,
    /// Entropy bound slack and entropy equality on minimizers.
    pub entropy: f64,
    /// Equality at p = ∞ (and in the trace bound) for positive elements.
    pub positive_equality: f64,
    pub hausdorff_young_p2: f64,
    pub young_identity: f64,
    pub range_domination: f64,
    /// Integer rounding of support products.
    pub rank: f64,
    pub collinearity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            plancherel: 1e-10,
            inequality: 1e-9,
            equality: 1e-8,
            entropy: 1e-8,
            positive_equality: 1e-9,
            hausdorff_young_p2: 1e-9,
            young_identity: 1e-10,
            range_domination: 1e-7,
            rank: 1e-6,
            collinearity: 1e-9,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 10] = [
        "plancherel",
        "inequality",
        "equality",
        "entropy",
        "positive_equality",
        "hausdorff_young_p2",
        "young_identity",
        "range_domination",
        "rank",
        "collinearity",
    ];

    fn field(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "plancherel" => &mut self.plancherel,
            "inequality" => &mut self.inequality,
            "equality" => &mut self.equality,
            "entropy" => &mut self.entropy,
            "positive_equality" => &mut self.positive_equality,
            "hausdorff_young_p2" => &mut self.hausdorff_young_p2,
            "young_identity" => &mut self.young_identity,
            "range_domination" => &mut self.range_domination,
            "rank" => &mut self.rank,
            "collinearity" => &mut self.collinearity,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), HarnessError> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(HarnessError::Config(format!("tolerance {key} = {value} must be finite and ≥ 0")));
        }
        *self.field(key).ok_or_else(|| HarnessError::Config(format!("unknown tolerance `{key}`")))? = value;
        Ok(())
    }

    pub fn set_all(&mut self, value: f64) -> Result<(), HarnessError> {
        for k in Self::KEYS {
            self.set(k, value)?;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let mut t = *self;
        for k in Self::KEYS {
            let v = *t.field(k).expect("known key");
            t.set(k, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Structure,
    Inequalities,
    Uncertainty,
    Minimizers,
    Probes,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 5] =
        [SuiteKind::Structure, SuiteKind::Inequalities, SuiteKind::Uncertainty, SuiteKind::Minimizers, SuiteKind::Probes];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Structure => "structure",
            SuiteKind::Inequalities => "inequalities",
            SuiteKind::Uncertainty => "uncertainty",
            SuiteKind::Minimizers => "minimizers",
            SuiteKind::Probes => "probes",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SuiteKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| format!("unknown suite `{s}` (expected one of structure, inequalities, uncertainty, minimizers, probes)"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub models: Vec<String>,
    pub samples: usize,
    pub master_seed: u64,
    pub suites: Vec<SuiteKind>,
    pub hausdorff_young_grid: Vec<Exponent>,
    pub young_grid: Vec<[Exponent; 3]>,
    pub tolerances: Tolerances,
    /// Worker threads; 0 uses all cores.
    pub parallelism: usize,
    pub tao_budget: usize,
    pub record_timing: bool,
    pub output: OutputPaths,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            models: vec!["group:cyclic:6".into()],
            samples: DEFAULT_SAMPLES,
            master_seed: DEFAULT_SEED,
            suites: SuiteKind::ALL.to_vec(),
            hausdorff_young_grid: default_hausdorff_young_grid(),
            young_grid: default_young_grid(),
            tolerances: Tolerances::default(),
            parallelism: 0,
            tao_budget: DEFAULT_TAO_BUDGET,
            record_timing: false,
            output: OutputPaths::default(),
        }
    }
}

impl SuiteConfig {
    pub fn from_json_str(s: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.models.is_empty() {
            return bad("no models configured".into());
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.suites.is_empty() {
            return bad("no suites selected".into());
        }
        let g = &self.hausdorff_young_grid;
        if !g.contains(&e(2.0)) || !g.contains(&Exponent::INF) {
            return bad("the Hausdorff-Young grid must contain 2 and inf".into());
        }
        if self.young_grid.is_empty() {
            return bad("empty Young grid".into());
        }
        if let Some(t) = self.young_grid.iter().find(|t| !young_triple_valid(t)) {
            return bad(format!("invalid exponents ({}, {}, {}): 1/p + 1/q must equal 1/r + 1", t[0], t[1], t[2]));
        }
        if self.suites.contains(&SuiteKind::Probes) && self.tao_budget == 0 {
            return bad("tao_budget must be at least 1".into());
        }
        self.tolerances.validate()
    }

    fn pairs(&self) -> Result<Vec<TwoBoxPair>, HarnessError> {
        self.models
            .iter()
            .map(|m| TwoBoxPair::from_spec(m).map_err(|source| HarnessError::Model { spec: m.clone(), source }))
            .collect()
    }
}

fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(serialize_with = "ser_f64")]
    pub margin: f64,
    pub elements: Vec<ElementLiteral>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub range: &'static str,
    pub count: usize,
}

const BINS: [(&str, f64); 9] = [
    ("< -1e-6", -1e-6),
    ("[-1e-6, -1e-9)", -1e-9),
    ("[-1e-9, 0)", 0.0),
    ("[0, 1e-12)", 1e-12),
    ("[1e-12, 1e-9)", 1e-9),
    ("[1e-9, 1e-6)", 1e-6),
    ("[1e-6, 1e-3)", 1e-3),
    ("[1e-3, 1)", 1.0),
    (">= 1", f64::INFINITY),
];

fn bin_of(m: f64) -> usize {
    if m.is_nan() {
        return 0;
    }
    BINS.iter().position(|&(_, hi)| m < hi).unwrap_or(BINS.len() - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub suite: SuiteKind,
    pub samples: usize,
    #[serde(serialize_with = "ser_f64")]
    pub min_margin: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_violation: f64,
    pub tolerance: f64,
    pub histogram: Vec<HistogramBin>,
    pub counterexamples: Vec<Counterexample>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub name: String,
    pub findings: Value,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    pub model: String,
    pub delta: f64,
    pub delta0: f64,
    pub irreducible: bool,
    pub checks: Vec<CheckReport>,
    pub probes: Vec<ProbeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportHeader {
    pub tool: &'static str,
    pub version: &'static str,
    pub master_seed: u64,
    pub samples: usize,
    pub suites: Vec<SuiteKind>,
    pub hausdorff_young_grid: Vec<Exponent>,
    pub young_grid: Vec<[Exponent; 3]>,
    pub tolerances: Tolerances,
    pub notes: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub failed: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub header: ReportHeader,
    pub models: Vec<ModelReport>,
    pub summary: Summary,
}

/// One CSV row per check.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub model: String,
    pub suite: SuiteKind,
    pub name: String,
    pub samples: usize,
    pub min_margin: f64,
    pub max_violation: f64,
    pub tolerance: f64,
    pub verdict: &'static str,
}

pub const REPORT_NOTES: [&str; 4] = [
    "inequality checks use delta0: delta for group models, n0/sqrt(n) for spin and fixed-point models",
    "young_identity asserts ||1*1||_r = ||1||_p ||1||_q / delta with the loop parameter delta on every model",
    "hirschman_beckner is evaluated on y = x/||x||_2; the unnormalized form scales with ||x||_2^2, not ||x||_2",
    "probes report findings and never fail the suite; spin_young_constant compares the Hadamard constants 1/n0 and 1/n0^2 with matrix-trace norms",
];

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn checks(&self) -> impl Iterator<Item = (&str, &CheckReport)> {
        self.models.iter().flat_map(|m| m.checks.iter().map(move |c| (m.model.as_str(), c)))
    }

    pub fn find(&self, model: &str, check: &str) -> Option<&CheckReport> {
        self.checks().find(|(m, c)| *m == model && c.name == check).map(|(_, c)| c)
    }

    pub fn probe(&self, model: &str, name: &str) -> Option<&ProbeReport> {
        self.models.iter().find(|m| m.model == model)?.probes.iter().find(|p| p.name == name)
    }

    pub fn failures(&self) -> Vec<(&str, &CheckReport)> {
        self.checks().filter(|(_, c)| !c.passed).collect()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_rows(&self) -> Vec<CsvRow> {
        self.checks()
            .map(|(m, c)| CsvRow {
                model: m.to_string(),
                suite: c.suite,
                name: c.name.clone(),
                samples: c.samples,
                min_margin: c.min_margin,
                max_violation: c.max_violation,
                tolerance: c.tolerance,
                verdict: if c.passed { "pass" } else { "fail" },
            })
            .collect()
    }
}

/// Result of one sample: its margin and the elements to dump if it fails.
pub(crate) type SampleResult = Result<(f64, Vec<AlgebraElement>), String>;

pub(crate) struct Ctx<'a> {
    pub pair: &'a TwoBoxPair,
    pub cfg: &'a SuiteConfig,
}

impl Ctx<'_> {
    pub fn tol(&self) -> &Tolerances {
        &self.cfg.tolerances
    }

    pub fn stream(&self, name: &str) -> u64 {
        stream_seed(self.cfg.master_seed, &format!("{}/{}", self.pair.label(), name))
    }

    /// Run `count` independent samples in parallel and aggregate in index
    /// order. `seeded` records per-sample seeds in counterexamples.
    pub fn check<F>(&self, suite: SuiteKind, name: &str, tolerance: f64, count: usize, seeded: bool, f: F) -> CheckReport
    where
        F: Fn(u64, u64) -> SampleResult + Sync,
    {
        let start = Instant::now();
        let stream = self.stream(name);
        let outcomes: Vec<(f64, Option<Counterexample>)> = (0..count)
            .into_par_iter()
            .map(|i| {
                let seed = seeded.then(|| sample_seed(stream, i as u64));
                match f(stream, i as u64) {
                    Ok((margin, witnesses)) => {
                        // Adding +0.0 maps -0.0 to +0.0.
                        let margin = margin + 0.0;
                        let v = violation(margin);
                        let ce = (v > tolerance).then(|| Counterexample {
                            index: i,
                            seed,
                            margin,
                            elements: witnesses.iter().filter_map(|w| self.pair.to_literal(w).ok()).collect(),
                            error: None,
                        });
                        (margin, ce)
                    }
                    Err(error) => (
                        f64::NEG_INFINITY,
                        Some(Counterexample { index: i, seed, margin: f64::NEG_INFINITY, elements: vec![], error: Some(error) }),
                    ),
                }
            })
            .collect();
        let mut min_margin = f64::INFINITY;
        let mut max_violation = 0.0f64;
        let mut counts = [0usize; BINS.len()];
        let mut counterexamples = Vec::new();
        for (m, ce) in outcomes {
            min_margin = if m.is_nan() || min_margin.is_nan() { f64::NAN } else { min_margin.min(m) };
            max_violation = max_violation.max(violation(m));
            counts[bin_of(m)] += 1;
            if let Some(ce) = ce {
                if counterexamples.len() < MAX_COUNTEREXAMPLES {
                    counterexamples.push(ce);
                }
            }
        }
        CheckReport {
            name: name.to_string(),
            suite,
            samples: count,
            min_margin,
            max_violation,
            tolerance,
            histogram: BINS.iter().zip(counts).map(|(&(range, _), count)| HistogramBin { range, count }).collect(),
            counterexamples,
            passed: max_violation <= tolerance,
            wall_time_ms: self.cfg.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        }
    }
}

fn violation(margin: f64) -> f64 {
    if margin.is_nan() {
        f64::INFINITY
    } else {
        (-margin).max(0.0)
    }
}

/// Run every configured suite on every configured model.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, HarnessError> {
    cfg.validate()?;
    let pairs = cfg.pairs()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| HarnessError::Setup(e.to_string()))?;
    let models = pool.install(|| pairs.iter().map(|p| suites::run_model(&Ctx { pair: p, cfg })).collect::<Result<Vec<_>, _>>())?;
    let checks = models.iter().map(|m| m.checks.len()).sum();
    let failed = models.iter().flat_map(|m| &m.checks).filter(|c| !c.passed).count();
    Ok(SuiteReport {
        header: ReportHeader {
            tool: "ncup",
            version: env!("CARGO_PKG_VERSION"),
            master_seed: cfg.master_seed,
            samples: cfg.samples,
            suites: cfg.suites.clone(),
            hausdorff_young_grid: cfg.hausdorff_young_grid.clone(),
            young_grid: cfg.young_grid.clone(),
            tolerances: cfg.tolerances,
            notes: REPORT_NOTES.to_vec(),
        },
        models,
        summary: Summary { checks, failed, passed: failed == 0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_parsing_and_serde() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::INF);
        assert!(("4/3".parse::<Exponent>().unwrap().value() - 4.0 / 3.0).abs() < 1e-15);
        assert!("0.5".parse::<Exponent>().is_err());
        assert_eq!(e(1.0).conjugate(), Exponent::INF);
        assert_eq!(e(3.0).conjugate(), e(1.5));
        let js = serde_json::to_string(&vec![e(2.0), Exponent::INF]).unwrap();
        assert_eq!(js, "[2.0,\"inf\"]");
        let back: Vec<Exponent> = serde_json::from_str(&js).unwrap();
        assert_eq!(back, vec![e(2.0), Exponent::INF]);
        assert!(default_young_grid().iter().all(young_triple_valid));
    }

    #[test]
    fn config_validation() {
        let mut c = SuiteConfig::default();
        c.validate().unwrap();
        c.young_grid.push([e(2.0), e(2.0), e(2.0)]);
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        let mut c = SuiteConfig::default();
        c.hausdorff_young_grid.retain(|p| *p != Exponent::INF);
        assert!(c.validate().is_err());
        assert!(SuiteConfig::from_json_str(r#"{"samples": 3, "bogus": 1}"#).is_err());
        let c = SuiteConfig::from_json_str(r#"{"samples": 3, "young_grid": [[1, "inf", "inf"]]}"#).unwrap();
        assert_eq!(c.samples, 3);
        c.validate().unwrap();
        let mut t = Tolerances::default();
        t.set("rank", 0.5).unwrap();
        assert_eq!(t.rank, 0.5);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("rank", -1.0).is_err());
    }

    #[test]
    fn histogram_bins() {
        assert_eq!(bin_of(-1.0), 0);
        assert_eq!(bin_of(-1e-10), 2);
        assert_eq!(bin_of(0.0), 3);
        assert_eq!(bin_of(5.0), 8);
        assert_eq!(bin_of(f64::NAN), 0);
    }
}
