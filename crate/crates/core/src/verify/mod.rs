//! Property suites behind `lipfree verify`.
//!
//! Each suite runs a fixed list of checks for one module and returns a [`SuiteReport`]. Checks
//! are sorted by name, floating-point values are rendered with 17 significant digits, and all
//! randomness flows from one seeded ChaCha8 stream per suite, so equal `(seed, config)` pairs
//! give byte-identical reports.

mod lambda;
mod suites;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::basis_rd::CutoffSequence;
use crate::dyadic::Rational;
use crate::error::{Error, Result};
use crate::grid::{lattice_box, Point};
use crate::molecule::{Molecule, SpaceDescriptor};

pub use lambda::{lambda_tensor, lambda_window, product_bound, random_window_point, LambdaWindowStats};
pub use suites::{block_sign_ratio, greedy_blocks, partial_sum_ratio, representation_search, run_suite};

/// One pass/fail line.
#[derive(Clone, PartialEq, Debug)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
}

/// A measured quantity reported next to a reference value without a verdict.
#[derive(Clone, PartialEq, Debug)]
pub struct Observation {
    pub name: String,
    pub value: f64,
    pub reference: f64,
}

#[derive(Clone, PartialEq, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub config: Vec<(String, String)>,
    pub checks: Vec<CheckRecord>,
    pub observations: Vec<Observation>,
    pub passed: bool,
}

/// `v` with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl SuiteReport {
    fn new(suite: &str, cfg: &SuiteConfig, mut checks: Vec<CheckRecord>, mut observations: Vec<Observation>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        observations.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = checks.iter().all(|c| c.passed);
        SuiteReport { suite: suite.into(), seed: cfg.seed, config: cfg.echo(), checks, observations, passed }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "status": if c.passed { "pass" } else { "fail" },
                    "measured": fmt17(c.measured),
                    "bound": fmt17(c.bound),
                    "tolerance": fmt17(c.tolerance),
                })
            })
            .collect();
        let observations: Vec<Value> = self
            .observations
            .iter()
            .map(|o| json!({"name": o.name, "value": fmt17(o.value), "reference": fmt17(o.reference)}))
            .collect();
        let config: serde_json::Map<String, Value> =
            self.config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        json!({
            "suite": self.suite,
            "seed": self.seed,
            "config": config,
            "checks": checks,
            "observations": observations,
            "status": if self.passed { "pass" } else { "fail" },
        })
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: measured {} bound {} tol {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                fmt17(c.measured),
                fmt17(c.bound),
                fmt17(c.tolerance)
            )?;
        }
        for o in &self.observations {
            writeln!(f, "INFO {}: {} (reference {})", o.name, fmt17(o.value), fmt17(o.reference))?;
        }
        write!(f, "{} {}", self.suite, if self.passed { "passed" } else { "FAILED" })
    }
}

/// Accumulates check records.
#[derive(Default)]
pub(crate) struct Checks {
    pub records: Vec<CheckRecord>,
    pub observations: Vec<Observation>,
}

impl Checks {
    /// An exact check: passes iff there are no violations.
    pub fn exact(&mut self, name: impl Into<String>, violations: usize) {
        self.at_most(name, violations as f64, 0.0, 0.0);
    }

    pub fn at_most(&mut self, name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) {
        let passed = measured <= bound + tolerance;
        self.records.push(CheckRecord { name: name.into(), passed, measured, bound, tolerance });
    }

    pub fn observe(&mut self, name: impl Into<String>, value: f64, reference: f64) {
        self.observations.push(Observation { name: name.into(), value, reference });
    }

    pub fn fail(&mut self, name: impl Into<String>, err: &Error) {
        let name = format!("{}: {err}", name.into());
        self.records.push(CheckRecord { name, passed: false, measured: f64::NAN, bound: 0.0, tolerance: 0.0 });
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct SuiteConfig {
    pub d: usize,
    pub p: f64,
    pub seed: u64,
    pub depth: u32,
    pub k: CutoffSequence,
    /// Largest ground set for exact norms inside the suites (subset dynamic program).
    pub cap: usize,
    /// Sample mesh `2^-mesh_level` for the window and probe checks.
    pub mesh_level: u32,
    /// Random instances per check.
    pub samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            d: 1,
            p: 0.5,
            seed: 42,
            depth: 3,
            k: CutoffSequence::default(),
            cap: 12,
            mesh_level: 3,
            samples: 25,
        }
    }
}

impl SuiteConfig {
    fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("cap".into(), self.cap.to_string()),
            ("d".into(), self.d.to_string()),
            ("depth".into(), self.depth.to_string()),
            ("k".into(), self.k.to_string()),
            ("mesh".into(), format!("2^-{}", self.mesh_level)),
            ("p".into(), fmt17(self.p)),
            ("samples".into(), self.samples.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Suite {
    Lambda,
    Retraction,
    Projection,
    BasisCube,
    BasisRd,
    NormOracle,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] =
        [Suite::Lambda, Suite::Retraction, Suite::Projection, Suite::BasisCube, Suite::BasisRd, Suite::NormOracle];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Lambda => "lambda",
            Suite::Retraction => "retraction",
            Suite::Projection => "projection",
            Suite::BasisCube => "basis-cube",
            Suite::BasisRd => "basis-rd",
            Suite::NormOracle => "norm-oracle",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain([Suite::All].iter())
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// A small nonzero rational `a / b` with `|a| <= 6`, `b` in `{1, 2, 3, 4, 5, 7}`.
pub fn random_rational(rng: &mut impl Rng) -> Rational {
    let mut a: i64 = rng.gen_range(-6..=5);
    if a >= 0 {
        a += 1;
    }
    let b = *[1i64, 2, 3, 4, 5, 7].choose(rng).unwrap();
    Rational::new(a.into(), b.into())
}

/// A molecule with between 1 and `max_terms` distinct points drawn from `candidates`.
pub fn random_molecule(
    rng: &mut impl Rng,
    space: &SpaceDescriptor,
    candidates: &[Point],
    max_terms: usize,
) -> Result<Molecule> {
    let pool: Vec<&Point> = candidates.iter().filter(|x| *x != space.base()).collect();
    let count = rng.gen_range(1..=max_terms.min(pool.len()).max(1));
    let chosen = pool.choose_multiple(rng, count.min(pool.len()));
    Molecule::canonicalize(chosen.map(|x| ((*x).clone(), random_rational(rng))), space.clone())
}

/// Points of `2^-level Z^d` in `[-extent, extent]^d`.
pub fn lattice_window(d: usize, level: u32, extent: i64) -> Vec<Point> {
    let reach = extent << level;
    lattice_box(d, level, -reach, reach)
}
