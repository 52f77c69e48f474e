//! `lipfree`: norms, basis expansions, Lipschitz probes and property suites from the shell.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage or parse error,
//! 3 violated precondition.

use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lipfree::basis_cube;
use lipfree::basis_rd::{expand_rd, reconstruct_rd, CutoffSequence};
use lipfree::pnorm::{exact_norm_with, GroundSet, Metric, NormMethod, NormOptions};
use lipfree::retraction::{lipschitz_probe, Patch, ProbeConfig};
use lipfree::verify::{run_suite, Suite, SuiteConfig};
use lipfree::wire;
use lipfree::{Dyadic, Error, GridSpec, Point};

#[derive(Parser)]
#[command(name = "lipfree", version, about = "Exact computations in Lipschitz free p-spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Basis {
    Cube,
    Rd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ground {
    /// The support of the molecule plus the base point.
    Support,
    /// The point list of a finite-set space.
    Space,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Sup,
    L1,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Prufer,
    Dp,
}

#[derive(Subcommand)]
enum Command {
    /// Free p-norm of a molecule over a finite ground set.
    Norm {
        /// Molecule JSON file, or `-` for stdin.
        molecule: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, value_enum, default_value = "support")]
        ground: Ground,
        #[arg(long, value_enum, default_value = "sup")]
        metric: MetricArg,
        #[arg(long, value_enum, default_value = "prufer")]
        method: MethodArg,
        /// Largest ground set solved exactly; larger sets get bounds only.
        #[arg(long, default_value_t = 9)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Basis coefficients of a molecule.
    Expand {
        molecule: PathBuf,
        #[arg(long, value_enum)]
        basis: Basis,
        #[arg(long)]
        depth: u32,
        /// Cutoffs `k_-1,k_0,...` or a rule such as `linear:+2`.
        #[arg(long = "k-seq", default_value = "linear:+2")]
        k_seq: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The molecule with the given basis coefficients.
    Reconstruct {
        /// Coefficient JSON file, or `-` for stdin.
        coefficients: PathBuf,
        #[arg(long, value_enum)]
        basis: Basis,
        /// Dimension, when the input is a bare coefficient list.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long = "k-seq", default_value = "linear:+2")]
        k_seq: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lipschitz ratio of the lattice retraction on a cube patch.
    ProbeLipschitz {
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Sample mesh, a power of two such as `1/16`.
        #[arg(long, default_value = "1/16")]
        mesh: String,
        /// Unit cubes of the patch as `;`-separated integer corners, e.g. `0,0;0,1`.
        /// Defaults to four cubes (a row for d = 1, a 2x2 block for d = 2, one cube otherwise).
        #[arg(long)]
        cubes: Option<String>,
        #[arg(long, default_value_t = 1_000_000)]
        max_pairs: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite and emit its report.
    Verify {
        /// lambda, retraction, projection, basis-cube, basis-rd, norm-oracle or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long = "k-seq", default_value = "linear:+2")]
        k_seq: String,
        /// Largest ground set for exact norms inside the suites.
        #[arg(long, default_value_t = 12)]
        cap: usize,
        /// Sample mesh for the window and probe checks.
        #[arg(long, default_value = "1/8")]
        mesh: String,
        /// Random instances per check.
        #[arg(long, default_value_t = 25)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn read_json(path: &PathBuf) -> Result<Value, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("reading stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: invalid JSON: {e}", path.display())))
}

fn mesh_level(mesh: &str) -> Result<u32, Failure> {
    let m: Dyadic = mesh.parse()?;
    let grid = GridSpec::new(1, &m)?;
    let level = -grid.log2_mesh();
    u32::try_from(level).map_err(|_| Failure::Usage(format!("mesh {mesh} must be at most 1")))
}

fn cutoffs(s: &str) -> Result<CutoffSequence, Failure> {
    Ok(s.parse()?)
}

fn norm(molecule: &PathBuf, p: f64, ground: Ground, metric: MetricArg, method: MethodArg, cap: usize) -> Outcome {
    let loaded = wire::molecule_from_json(&read_json(molecule)?)?;
    let m = &loaded.molecule;
    let set = match ground {
        Ground::Support => GroundSet::from_support(m),
        Ground::Space => GroundSet::from_space(m)?,
    };
    let set = set.with_metric(match metric {
        MetricArg::Sup => Metric::Sup,
        MetricArg::L1 => Metric::L1,
    });
    let method = match method {
        MethodArg::Prufer => NormMethod::PruferEnumeration,
        MethodArg::Dp => NormMethod::SubsetDp,
    };
    let r = exact_norm_with(m, &set, p, &NormOptions { cap, method })?;
    let mut out = serde_json::to_value(&r).map_err(|e| Failure::Lib(Error::Internal(e.to_string())))?;
    let obj = out.as_object_mut().expect("struct serializes to an object");
    obj.insert("sandwich".into(), json!({"lower": r.lower_bound, "upper": r.value}));
    obj.insert("ground_size".into(), json!(set.len()));
    obj.insert("canonicalized".into(), json!(loaded.canonicalized));
    if !r.exact {
        obj.insert(
            "note".into(),
            json!(format!("ground set of {} points exceeds the cap of {cap}; value is an upper bound", set.len())),
        );
    }
    Ok((out, true))
}

fn expand(molecule: &PathBuf, basis: Basis, depth: u32, k_seq: &str) -> Outcome {
    let loaded = wire::molecule_from_json(&read_json(molecule)?)?;
    let m = &loaded.molecule;
    let coefficients = match basis {
        Basis::Cube => wire::cube_coefficients_to_json(&basis_cube::expand(m, depth)?),
        Basis::Rd => wire::rd_coefficients_to_json(&expand_rd(m, depth, &cutoffs(k_seq)?)?),
    };
    let mut out = json!({
        "basis": match basis { Basis::Cube => "cube", Basis::Rd => "rd" },
        "dim": m.dim(),
        "depth": depth,
        "coefficients": coefficients,
    });
    if let Basis::Rd = basis {
        out["k"] = json!(k_seq);
    }
    Ok((out, true))
}

fn reconstruct(path: &PathBuf, basis: Basis, d: Option<usize>, k_seq: &str) -> Outcome {
    let v = read_json(path)?;
    let dim = d
        .or_else(|| v.get("dim").and_then(Value::as_u64).map(|d| d as usize))
        .ok_or_else(|| Failure::Usage("dimension unknown: pass --d or an object with a \"dim\" field".into()))?;
    let m = match basis {
        Basis::Cube => basis_cube::reconstruct(&wire::cube_coefficients_from_json(&v, dim)?)?,
        Basis::Rd => {
            let k = match v.get("k").and_then(Value::as_str) {
                Some(s) => cutoffs(s)?,
                None => cutoffs(k_seq)?,
            };
            reconstruct_rd(&wire::rd_coefficients_from_json(&v, dim, &k)?)?
        }
    };
    Ok((wire::molecule_to_json(&m), true))
}

fn parse_cubes(s: &str, d: usize) -> Result<Vec<Vec<i64>>, Failure> {
    s.split(';')
        .map(|cube| {
            let w: Vec<i64> = cube
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::Usage(format!("bad cube corner {cube:?}: {e}")))?;
            if w.len() != d {
                return Err(Failure::Lib(Error::DimensionMismatch { expected: d, found: w.len() }));
            }
            Ok(w)
        })
        .collect()
}

fn probe(d: usize, cubes: Option<&str>, cfg: ProbeConfig) -> Outcome {
    let patch = match (cubes, d) {
        (Some(s), _) => Patch::new(GridSpec::dyadic(d, 0), parse_cubes(s, d)?, Point::origin(d))?,
        (None, 1 | 2) => Patch::standard(d)?,
        (None, _) => Patch::new(GridSpec::dyadic(d, 0), vec![vec![0; d]], Point::origin(d))?,
    };
    let r = lipschitz_probe(&patch, &cfg)?;
    let mut out = serde_json::to_value(&r).map_err(|e| Failure::Lib(Error::Internal(e.to_string())))?;
    out["within_envelope"] = json!(r.within_envelope());
    Ok((out, true))
}

fn run(cli: Cli) -> Result<(Value, bool, Option<PathBuf>), Failure> {
    let (value, ok, out) = match cli.command {
        Command::Norm { molecule, p, ground, metric, method, cap, out } => {
            let (v, ok) = norm(&molecule, p, ground, metric, method, cap)?;
            (v, ok, out)
        }
        Command::Expand { molecule, basis, depth, k_seq, out } => {
            let (v, ok) = expand(&molecule, basis, depth, &k_seq)?;
            (v, ok, out)
        }
        Command::Reconstruct { coefficients, basis, d, k_seq, out } => {
            let (v, ok) = reconstruct(&coefficients, basis, d, &k_seq)?;
            (v, ok, out)
        }
        Command::ProbeLipschitz { d, p, mesh, cubes, max_pairs, samples, seed, cap, out } => {
            let cfg = ProbeConfig { p, mesh_level: mesh_level(&mesh)?, max_pairs, samples, seed, cap };
            let (v, ok) = probe(d, cubes.as_deref(), cfg)?;
            (v, ok, out)
        }
        Command::Verify { suite, d, p, seed, depth, k_seq, cap, mesh, samples, out } => {
            let suite: Suite = suite.parse()?;
            let cfg = SuiteConfig { d, p, seed, depth, k: cutoffs(&k_seq)?, cap, mesh_level: mesh_level(&mesh)?, samples };
            let report = run_suite(suite, &cfg)?;
            for c in report.failures() {
                eprintln!("FAIL {}", c.name);
            }
            (report.to_json(), report.passed, out)
        }
    };
    Ok((value, ok, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((value, ok, out)) => {
            let text = serde_json::to_string_pretty(&value).expect("JSON values serialize") + "\n";
            match out {
                Some(path) => {
                    if let Err(e) = fs::write(&path, text) {
                        eprintln!("error: writing {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                e if e.is_input_error() => ExitCode::from(2),
                Error::Internal(_) => ExitCode::from(1),
                _ => ExitCode::from(3),
            }
        }
    }
}
