//! The `hadamard` command: property suites, width experiments, harmonic
//! relaxation and list conjugacy, with seeded runs and JSON/CSV/human
//! reports.
//!
//! [`run`] is the whole program; `main` only wires it to the process.

pub mod decode;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use hadamard::conjugacy::{
    orbit_bound_report, solve, ConjugacyInstance, GroupContext, RadiusPolicy, SearchConfig, Verdict,
};
use hadamard::equivariant::{convexity_report, EquivariantMap, GeodesicHomotopy};
use hadamard::groups::word::letter_from_rank;
use hadamard::groups::{Alphabet, RepKind, Representation, RepresentationSpec, Word};
use hadamard::harmonic::{
    estimate_width_constant, relax, stationarity_probe, RelaxationConfig, SamplerConfig,
};
use hadamard::spaces::{
    distance_convexity_gap, quadrilateral_defect, triangle_defect, MetricTree, Point, Space, TreeEdge,
};
use hadamard::Error;

pub const DEFAULT_SEED: u64 = 0xCA70;
/// Allowed violation of the comparison inequalities.
pub const CAT0_TOLERANCE: f64 = 1e-9;

pub mod exit {
    pub const OK: i32 = 0;
    pub const PROPERTY_FAILED: i32 = 1;
    pub const NOT_CONJUGATE: i32 = 3;
    pub const NOT_CONJUGATE_UP_TO: i32 = 4;
    pub const USAGE: i32 = 64;
    pub const DATA: i32 = 65;
    pub const NO_INPUT: i32 = 66;
    pub const SOFTWARE: i32 = 70;
    pub const BUDGET: i32 = 75;
    pub const CONFIG: i32 = 78;
}

const EXIT_CODES: &str = "\
Exit codes:
   0  success; `conjugacy solve`: Conjugate
   1  a checked property failed (check-cat0, convexity)
   3  conjugacy solve: NotConjugate (certified by the free-group oracle)
   4  conjugacy solve: NotConjugateUpTo (no conjugator within the radius)
  64  usage error
  65  malformed input data (words, points, JSON files)
  66  input file missing or unreadable
  70  computation error, including relaxation that did not converge
  75  search budget exceeded
  78  configuration or precondition error";

#[derive(Parser, Debug)]
#[command(
    name = "hadamard",
    version,
    about = "CAT(0) geometry, equivariant maps and list conjugacy",
    after_help = EXIT_CODES,
    arg_required_else_help = true
)]
struct Cli {
    /// Report format; JSON is canonical.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// RNG seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, default_value = "0xCA70", value_parser = parse_seed)]
    seed: u64,
    /// Worker threads for estimate-cstar and conjugacy search.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
    threads: u64,
    /// Record wall-clock time in reports (makes stdout non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Random triangle, quadrilateral and distance-convexity checks.
    #[command(name = "check-cat0")]
    CheckCat0(CheckArgs),
    /// Widths W∞ and W₂ of the geodesic homotopy between two maps.
    Width(WidthArgs),
    /// Length and energy along the geodesic homotopy between two maps.
    Convexity(ConvexityArgs),
    /// Relax a map to an equivariant harmonic map.
    Harmonic(HarmonicArgs),
    /// Sample the width constant W∞/(L(u)+L(v)) over random bouquet maps.
    #[command(name = "estimate-cstar")]
    EstimateCstar(EstimateArgs),
    /// Simultaneous conjugacy of word lists.
    #[command(subcommand)]
    Conjugacy(ConjugacyCommand),
    /// Orbit-metric side of the conjugator length bound.
    #[command(name = "orbit-report")]
    OrbitReport(OrbitArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Euclidean,
    Hyperbolic,
    Tree,
    Cayley,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TreePreset {
    Caterpillar,
    Spider,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Dimension of the Euclidean model.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Tree JSON file for the tree model.
    #[arg(long, conflicts_with = "preset")]
    tree: Option<PathBuf>,
    /// Built-in tree for the tree model.
    #[arg(long, value_enum, default_value_t = TreePreset::Caterpillar)]
    preset: TreePreset,
    /// Rank of the Cayley tree.
    #[arg(long, default_value_t = 2)]
    rank: u32,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Sampler spread; defaults to 4 letters on Cayley trees, 1 elsewhere.
    #[arg(long)]
    scale: Option<f64>,
}

#[derive(Args, Debug)]
struct WidthArgs {
    /// Map file of u.
    #[arg(long)]
    u: PathBuf,
    /// Map file of v.
    #[arg(long)]
    v: PathBuf,
    /// Simpson subintervals per edge (even).
    #[arg(long, default_value_t = 64)]
    k: usize,
}

#[derive(Args, Debug)]
struct ConvexityArgs {
    #[arg(long)]
    u: PathBuf,
    #[arg(long)]
    v: PathBuf,
    /// Number of equally spaced s values in [0, 1].
    #[arg(long, default_value_t = 11, value_parser = clap::value_parser!(u64).range(2..))]
    grid: u64,
}

#[derive(Args, Debug)]
struct HarmonicArgs {
    /// Map file of the starting map.
    #[arg(long)]
    map: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// Displacement tolerance per sweep.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Tolerance of the inner line searches.
    #[arg(long, default_value_t = 1e-12)]
    inner_tol: f64,
    /// Directions of the stationarity probe.
    #[arg(long, default_value_t = 16)]
    probe_directions: usize,
    #[arg(long, default_value_t = 1e-6)]
    probe_step: f64,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["rep", "free_rank"]))]
struct EstimateArgs {
    /// Representation JSON file.
    #[arg(long)]
    rep: Option<PathBuf>,
    /// Use the free group of this rank acting on its Cayley tree.
    #[arg(long)]
    free_rank: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    scale: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum ConjugacyCommand {
    /// Search for g with b_i = g⁻¹ a_i g for all i.
    Solve(SolveArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Policy {
    Incremental,
    Bound,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Rank (e.g. 2) or generator names (e.g. xy). A numeric rank takes the
    /// letters used by the words when they are not a..; defaults to the
    /// representation's alphabet.
    #[arg(long)]
    alphabet: Option<String>,
    /// Comma-separated words a_1,...,a_N.
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    /// Comma-separated words b_1,...,b_N.
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    #[arg(long, value_enum, default_value_t = Policy::Incremental)]
    policy: Policy,
    /// C⋆ of the linear bound (policy bound).
    #[arg(long)]
    cstar: Option<f64>,
    /// C of the linear bound (policy bound).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 10)]
    max_radius: u32,
    /// Maximum number of candidate conjugators.
    #[arg(long, default_value_t = 100_000_000)]
    budget: u64,
    /// Representation JSON: words are compared through it and the orbit
    /// bound is reported.
    #[arg(long)]
    rep: Option<PathBuf>,
    /// Basepoint for the orbit bound, as point JSON.
    #[arg(long, requires = "rep")]
    basepoint: Option<String>,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    /// Representation JSON file.
    #[arg(long)]
    rep: PathBuf,
    /// Basepoint as point JSON; defaults to the model's base point.
    #[arg(long)]
    basepoint: Option<String>,
    /// Explicit list a (otherwise random instances are generated).
    #[arg(long, requires = "b", allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, requires = "a", allow_hyphen_values = true)]
    b: Option<String>,
    /// Known conjugator for the explicit lists.
    #[arg(long, requires = "a")]
    g: Option<String>,
    /// Number of random instances.
    #[arg(long, default_value_t = 10)]
    instances: usize,
    /// List length N of random instances.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Maximal length of random a_i.
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    /// Maximal length of the random conjugator.
    #[arg(long, default_value_t = 3)]
    conj_len: usize,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

/// A failed run: exit code and message for stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::ModelMismatch { .. }
            | Error::InvalidPoint(_)
            | Error::Domain(_)
            | Error::InvalidTree(_)
            | Error::AlphabetMismatch { .. }
            | Error::WordParse { .. }
            | Error::InvalidIsometry(_)
            | Error::InvalidRepresentation(_)
            | Error::InvalidGraph(_)
            | Error::GraphMismatch
            | Error::Json(_) => exit::DATA,
            Error::Capability(_) | Error::Unconverged => exit::SOFTWARE,
            Error::BudgetExceeded { .. } => exit::BUDGET,
            Error::Config(_) | Error::Precondition(_) => exit::CONFIG,
        };
        Self::new(code, e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A rectangular table for CSV output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// One report document plus the exit code it implies.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub result: Value,
    pub table: Option<Table>,
    pub exit: i32,
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(exit::NO_INPUT, format!("cannot read {}: {e}", path.display())))
}

fn load_map(path: &Path) -> CliResult<EquivariantMap> {
    EquivariantMap::from_json(&read_file(path)?).map_err(|e| located(path, e))
}

fn located(path: &Path, e: Error) -> CliError {
    let inner = CliError::from(e);
    CliError::new(inner.code, format!("{}: {}", path.display(), inner.message))
}

fn load_rep(path: &Path) -> CliResult<Representation> {
    Representation::from_json(&read_file(path)?).map_err(|e| located(path, e))
}

fn parse_point(space: &Space, text: &str) -> CliResult<Point> {
    let p: Point = serde_json::from_str(text)
        .map_err(|e| CliError::new(exit::DATA, format!("invalid basepoint {text:?}: {e}")))?;
    Ok(space.check_point(&p)?)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

// ---------------------------------------------------------------------------
// check-cat0

/// Built-in trees with at most 20 edges and varied lengths.
pub fn preset_tree(preset: TreePreset) -> MetricTree {
    let mut edges = Vec::new();
    let n = match preset {
        TreePreset::Caterpillar => {
            // spine 0..5, two legs per spine vertex
            let spine = [1.0, 0.5, 2.0, 1.5, 0.75];
            for (i, len) in spine.iter().enumerate() {
                edges.push(TreeEdge { a: i, b: i + 1, len: *len });
            }
            let mut next = 6;
            for i in 0..6 {
                for j in 0..2 {
                    edges.push(TreeEdge { a: i, b: next, len: 0.3 + 0.2 * (2 * i + j) as f64 });
                    next += 1;
                }
            }
            next
        }
        TreePreset::Spider => {
            // four legs of three edges around vertex 0
            let mut next = 1;
            for leg in 0..4 {
                let mut prev = 0;
                for k in 0..3 {
                    edges.push(TreeEdge { a: prev, b: next, len: 0.25 * (leg + 1) as f64 + 0.5 * k as f64 });
                    prev = next;
                    next += 1;
                }
            }
            next
        }
    };
    MetricTree::new((0..n).map(|i| i.to_string()).collect(), edges).expect("preset trees are valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefectSummary {
    pub evaluations: u64,
    pub min: f64,
    pub max_abs: f64,
    /// Values below `−1e-9`.
    pub violations: u64,
}

impl DefectSummary {
    fn new() -> Self {
        Self {
            evaluations: 0,
            min: f64::INFINITY,
            max_abs: 0.0,
            violations: 0,
        }
    }

    fn add(&mut self, x: f64) {
        self.evaluations += 1;
        // NaN counts as a violation
        if x.is_nan() || x < -CAT0_TOLERANCE {
            self.violations += 1;
        }
        self.min = self.min.min(x);
        self.max_abs = self.max_abs.max(x.abs());
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cat0Summary {
    pub trials: usize,
    pub triangle: DefectSummary,
    pub quadrilateral: DefectSummary,
    pub convexity: DefectSummary,
    /// Flat models must attain equality in the triangle comparison.
    pub flat: bool,
    pub holds: bool,
}

/// `λ` values per triangle.
pub const TRIANGLE_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
/// `t` and `α` values per quadruple (25 pairs).
pub const QUAD_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Seeded comparison checks: each trial draws four points, evaluates the
/// triangle defect of `(P, Q, R)` on [`TRIANGLE_GRID`], and the quadrilateral
/// defect and distance-convexity gap of `(P, Q, R, S)` on [`QUAD_GRID`]².
pub fn cat0_suite(space: &Space, trials: usize, seed: u64, scale: f64) -> hadamard::Result<Cat0Summary> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Config(format!("scale {scale} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tri = DefectSummary::new();
    let mut quad = DefectSummary::new();
    let mut conv = DefectSummary::new();
    for _ in 0..trials {
        let pts: Vec<Point> = (0..4).map(|_| space.random_point(&mut rng, scale)).collect();
        let [p, q, r, s] = [&pts[0], &pts[1], &pts[2], &pts[3]];
        for &lambda in &TRIANGLE_GRID {
            tri.add(triangle_defect(space, p, q, r, lambda)?);
        }
        for &t in &QUAD_GRID {
            for &alpha in &QUAD_GRID {
                quad.add(quadrilateral_defect(space, p, q, r, s, t, alpha)?);
            }
            conv.add(distance_convexity_gap(space, p, q, r, s, t)?);
        }
    }
    let flat = matches!(space, Space::Euclidean { .. });
    let holds = tri.violations == 0
        && quad.violations == 0
        && conv.violations == 0
        && (!flat || tri.max_abs <= CAT0_TOLERANCE);
    Ok(Cat0Summary {
        trials,
        triangle: tri,
        quadrilateral: quad,
        convexity: conv,
        flat,
        holds,
    })
}

fn check_cat0(args: &CheckArgs, seed: u64) -> CliResult<Report> {
    let (space, tree_desc) = match args.model {
        Model::Euclidean => {
            if args.dim == 0 {
                return Err(CliError::new(exit::CONFIG, "--dim must be at least 1"));
            }
            (Space::euclidean(args.dim), Value::Null)
        }
        Model::Hyperbolic => (Space::Hyperbolic, Value::Null),
        Model::Tree => match &args.tree {
            Some(path) => {
                let t = MetricTree::from_json(&read_file(path)?).map_err(|e| located(path, e))?;
                (Space::tree(t), json!(path.display().to_string()))
            }
            None => (Space::tree(preset_tree(args.preset)), to_value(&args.preset)),
        },
        Model::Cayley => {
            if args.rank == 0 {
                return Err(CliError::new(exit::CONFIG, "--rank must be at least 1"));
            }
            (Space::cayley(args.rank), Value::Null)
        }
    };
    let scale = args.scale.unwrap_or_else(|| SamplerConfig::default_scale(&space));
    let summary = cat0_suite(&space, args.trials, seed, scale)?;
    let mut table = Table {
        header: ["check", "evaluations", "min", "max_abs", "violations"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    for (name, s) in [
        ("triangle", summary.triangle),
        ("quadrilateral", summary.quadrilateral),
        ("convexity", summary.convexity),
    ] {
        table.rows.push(vec![json!(name), json!(s.evaluations), json!(s.min), json!(s.max_abs), json!(s.violations)]);
    }
    Ok(Report {
        command: "check-cat0".into(),
        config: json!({
            "model": args.model,
            "space": space.describe(),
            "tree": tree_desc,
            "trials": args.trials,
            "scale": scale,
            "tolerance": CAT0_TOLERANCE,
            "triangle_lambdas": TRIANGLE_GRID,
            "quadrilateral_grid": QUAD_GRID,
        }),
        result: to_value(&summary),
        table: Some(table),
        exit: if summary.holds { exit::OK } else { exit::PROPERTY_FAILED },
    })
}

// ---------------------------------------------------------------------------
// width, convexity, harmonic

fn homotopy(u: &Path, v: &Path) -> CliResult<GeodesicHomotopy> {
    Ok(GeodesicHomotopy::new(load_map(u)?, load_map(v)?)?)
}

fn width(args: &WidthArgs) -> CliResult<Report> {
    let h = homotopy(&args.u, &args.v)?;
    let (lu, lv) = (h.u().length()?, h.v().length()?);
    let w_inf = h.width_inf()?;
    let w2 = h.width_2(args.k)?;
    let total = h.u().graph().total_length();
    let result = json!({
        "length_u": lu,
        "length_v": lv,
        "width_inf": w_inf,
        "width_2": w2,
        // W₂ ≤ W∞·(Σ len)^{1/2}
        "width_2_bound": w_inf * total.sqrt(),
        "ratio": if lu + lv > 0.0 { json!(w_inf / (lu + lv)) } else { Value::Null },
    });
    Ok(Report {
        command: "width".into(),
        config: json!({"u": args.u.display().to_string(), "v": args.v.display().to_string(), "k": args.k}),
        result,
        table: None,
        exit: exit::OK,
    })
}

fn convexity(args: &ConvexityArgs) -> CliResult<Report> {
    let h = homotopy(&args.u, &args.v)?;
    let n = args.grid as usize;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let rows = convexity_report(&h, &grid)?;
    let holds = rows.iter().all(|r| r.holds);
    let table = Table {
        header: ["s", "length", "energy", "length_bound", "energy_sqrt_bound", "holds"].map(String::from).to_vec(),
        rows: rows
            .iter()
            .map(|r| {
                vec![json!(r.s), json!(r.length), json!(r.energy), json!(r.length_bound), json!(r.energy_sqrt_bound), json!(r.holds)]
            })
            .collect(),
    };
    Ok(Report {
        command: "convexity".into(),
        config: json!({"u": args.u.display().to_string(), "v": args.v.display().to_string(), "grid": n}),
        result: json!({"rows": rows, "holds": holds}),
        table: Some(table),
        exit: if holds { exit::OK } else { exit::PROPERTY_FAILED },
    })
}

fn harmonic(args: &HarmonicArgs) -> CliResult<Report> {
    let u0 = load_map(&args.map)?;
    let cfg = RelaxationConfig {
        max_iterations: args.max_iterations,
        displacement_tolerance: args.tol,
        inner_tolerance: args.inner_tol,
    };
    cfg.validate()?;
    let r = relax(&u0, &cfg)?;
    let lengths = r.map.edge_lengths()?;
    let energies = r.map.edge_energies()?;
    // §3.3: L_I² = E_I · len_I on every edge
    let identity_residual = lengths
        .iter()
        .zip(&energies)
        .zip(r.map.graph().edges())
        .map(|((l, e), edge)| {
            let lhs = l * l;
            (lhs - e * edge.len).abs() / lhs.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    let probe = stationarity_probe(&r.map, args.probe_directions, args.probe_step)?;
    let table = Table {
        header: vec!["sweep".into(), "energy".into()],
        rows: r.energy_trace.iter().enumerate().map(|(i, e)| vec![json!(i), json!(e)]).collect(),
    };
    Ok(Report {
        command: "harmonic".into(),
        config: json!({"map": args.map.display().to_string(), "relaxation": cfg,
            "probe_directions": args.probe_directions, "probe_step": args.probe_step}),
        result: json!({
            "converged": r.converged,
            "iterations": r.iterations,
            "energy": r.energy,
            "length": r.length,
            "edge_lengths": lengths,
            "edge_energies": energies,
            "identity_residual": identity_residual,
            "stationarity_probe": probe,
            "energy_trace": r.energy_trace,
            "map": r.map.to_file(),
        }),
        table: Some(table),
        exit: if r.converged { exit::OK } else { exit::SOFTWARE },
    })
}

// ---------------------------------------------------------------------------
// estimate-cstar

fn estimate(args: &EstimateArgs, seed: u64, threads: usize) -> CliResult<Report> {
    let rho = match (&args.rep, args.free_rank) {
        (Some(path), _) => load_rep(path)?,
        (None, Some(rank)) => Representation::free_on_cayley_tree(rank)?,
        (None, None) => unreachable!("clap enforces the source group"),
    };
    let rho = Arc::new(rho);
    let cfg = SamplerConfig {
        seed,
        trials: args.trials,
        scale: args.scale.unwrap_or_else(|| SamplerConfig::default_scale(rho.space())),
        threads,
    };
    eprintln!("hadamard: estimate-cstar, {} trials on {}", cfg.trials, rho.space().describe());
    let est = estimate_width_constant(rho.clone(), &cfg)?;
    let finite = est.samples.iter().filter(|s| s.ratio.is_some_and(f64::is_finite)).count();
    let table = Table {
        header: ["trial", "length_u", "length_v", "width_inf", "ratio"].map(String::from).to_vec(),
        rows: est
            .samples
            .iter()
            .map(|s| vec![json!(s.trial), json!(s.length_u), json!(s.length_v), json!(s.width_inf), json!(s.ratio)])
            .collect(),
    };
    Ok(Report {
        command: "estimate-cstar".into(),
        config: json!({
            "representation": rho.spec(),
            "trials": cfg.trials,
            "scale": cfg.scale,
        }),
        result: json!({"c_hat": est.c_hat, "finite_ratios": finite, "samples": est.samples}),
        table: Some(table),
        exit: exit::OK,
    })
}

// ---------------------------------------------------------------------------
// conjugacy

/// Resolves `--alphabet`: explicit names, or a rank. With a rank, words in
/// `a, b, …` use the standard alphabet; words in `x, y, z` (rank ≤ 3) use
/// those letters; otherwise the distinct letters used, in order, padded
/// with the first unused letters.
pub fn resolve_alphabet(spec: &str, words: &[&str]) -> hadamard::Result<Alphabet> {
    let rank = match spec.trim().parse::<u32>() {
        Ok(r) => r,
        Err(_) => return Alphabet::named(spec.trim()),
    };
    let standard = Alphabet::from_spec(spec)?;
    let mut used: Vec<char> = words
        .iter()
        .flat_map(|w| w.chars())
        .filter(char::is_ascii_alphabetic)
        .map(|c| c.to_ascii_lowercase())
        .collect();
    used.sort_unstable();
    used.dedup();
    let names = standard.names();
    if used.iter().all(|c| names.contains(*c)) {
        return Ok(standard);
    }
    if rank <= 3 {
        let xyz: String = "xyz".chars().take(rank as usize).collect();
        if used.iter().all(|c| xyz.contains(*c)) {
            return Alphabet::named(&xyz);
        }
    }
    if used.len() > rank as usize {
        return Err(Error::Config(format!(
            "words use {} distinct generators but the alphabet has rank {rank}",
            used.len()
        )));
    }
    let mut letters = used;
    for c in 'a'..='z' {
        if letters.len() == rank as usize {
            break;
        }
        if !letters.contains(&c) {
            letters.push(c);
        }
    }
    letters.sort_unstable();
    Alphabet::named(&letters.into_iter().collect::<String>())
}

fn conjugacy_solve(args: &SolveArgs, threads: usize, timing: bool) -> CliResult<Report> {
    let rho = args.rep.as_deref().map(load_rep).transpose()?.map(Arc::new);
    let alphabet = match (&args.alphabet, &rho) {
        (Some(spec), None) => resolve_alphabet(spec, &[&args.a, &args.b])?,
        (Some(spec), Some(rho)) => {
            let named = resolve_alphabet(spec, &[&args.a, &args.b])?;
            if named.rank() != rho.rank() {
                return Err(Error::AlphabetMismatch { left: named.rank(), right: rho.rank() }.into());
            }
            rho.alphabet().clone()
        }
        (None, Some(rho)) => rho.alphabet().clone(),
        (None, None) => return Err(CliError::new(exit::USAGE, "conjugacy solve needs --alphabet or --rep")),
    };
    let a = alphabet.parse_list(&args.a)?;
    let b = alphabet.parse_list(&args.b)?;
    let context = match &rho {
        Some(r) if !(r.kind() == RepKind::FreeOnCayleyTree && is_standard_free(r.spec())) => {
            GroupContext::Image(r.clone())
        }
        _ => GroupContext::Free,
    };
    let inst = ConjugacyInstance::new(alphabet.clone(), context, a, b)?;
    let cfg = SearchConfig {
        policy: match args.policy {
            Policy::Incremental => RadiusPolicy::Incremental,
            Policy::Bound => RadiusPolicy::Bound { cstar: args.cstar, c: args.c },
        },
        max_radius: args.max_radius,
        budget: args.budget,
        threads,
    };
    let start = Instant::now();
    let mut cert = solve(&inst, &cfg)?;
    if timing {
        cert.stats.seconds = Some(start.elapsed().as_secs_f64());
    }
    let mut result = to_value(&cert.report(&alphabet));
    result["alphabet"] = json!(alphabet.names());
    if let Some(rho) = &rho {
        let y = match &args.basepoint {
            Some(text) => parse_point(rho.space(), text)?,
            None => rho.space().base_point(),
        };
        let orbit = orbit_bound_report(&inst, rho, &y, cert.conjugator())?;
        result["orbit_bound"] = to_value(&orbit);
    }
    let table = Table {
        header: ["index", "conjugate", "expected", "equal"].map(String::from).to_vec(),
        rows: cert
            .transcript
            .iter()
            .map(|t| vec![json!(t.index), json!(t.conjugate), json!(t.expected), json!(t.equal)])
            .collect(),
    };
    let exit = match cert.verdict {
        Verdict::Conjugate { .. } => exit::OK,
        Verdict::NotConjugate { .. } => exit::NOT_CONJUGATE,
        Verdict::NotConjugateUpTo { .. } => exit::NOT_CONJUGATE_UP_TO,
    };
    Ok(Report {
        command: "conjugacy solve".into(),
        config: json!({
            "alphabet": alphabet.names(),
            "a": args.a,
            "b": args.b,
            "search": cfg,
            "rep": args.rep.as_ref().map(|p| p.display().to_string()),
        }),
        result,
        table: Some(table),
        exit,
    })
}

fn is_standard_free(spec: &RepresentationSpec) -> bool {
    matches!(spec, RepresentationSpec::FreeOnCayleyTree { generators: None, .. })
}

// ---------------------------------------------------------------------------
// orbit-report

/// Uniform random reduced word of exactly `len` letters.
pub fn random_reduced_word<R: Rng + ?Sized>(rng: &mut R, rank: u32, len: usize) -> Word {
    let mut letters: Vec<i32> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = letter_from_rank(rng.random_range(0..2 * rank));
        if letters.last() != Some(&-l) {
            letters.push(l);
        }
    }
    Word::new(letters).expect("letters within rank")
}

fn orbit_report(args: &OrbitArgs, seed: u64) -> CliResult<Report> {
    let rho = load_rep(&args.rep)?;
    let alphabet = rho.alphabet().clone();
    let y = match &args.basepoint {
        Some(text) => parse_point(rho.space(), text)?,
        None => rho.space().base_point(),
    };
    let mut instances: Vec<(Vec<Word>, Vec<Word>, Option<Word>)> = Vec::new();
    if let (Some(a), Some(b)) = (&args.a, &args.b) {
        let g = args.g.as_deref().map(|g| alphabet.parse(g)).transpose()?;
        instances.push((alphabet.parse_list(a)?, alphabet.parse_list(b)?, g));
    } else {
        if args.n == 0 {
            return Err(CliError::new(exit::CONFIG, "--n must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..args.instances {
            let a: Vec<Word> = (0..args.n)
                .map(|_| {
                    let len = rng.random_range(1..=args.max_len.max(1));
                    random_reduced_word(&mut rng, rho.rank(), len)
                })
                .collect();
            let glen = rng.random_range(0..=args.conj_len);
            let g = random_reduced_word(&mut rng, rho.rank(), glen);
            let b = a.iter().map(|w| w.conjugate_by(&g)).collect();
            instances.push((a, b, Some(g)));
        }
    }
    let mut rows = Vec::new();
    let mut max_ratio: Option<f64> = None;
    for (i, (a, b, g)) in instances.into_iter().enumerate() {
        let fmt = |ws: &[Word]| ws.iter().map(|w| alphabet.format(w)).collect::<Vec<_>>().join(",");
        let row_a = fmt(&a);
        let row_b = fmt(&b);
        let inst = ConjugacyInstance::new(alphabet.clone(), GroupContext::Free, a, b)?;
        let r = orbit_bound_report(&inst, &rho, &y, g.as_ref())?;
        if let Some(x) = r.ratio {
            max_ratio = Some(max_ratio.map_or(x, |m| m.max(x)));
        }
        rows.push(json!({
            "index": i,
            "a": row_a,
            "b": row_b,
            "g": g.as_ref().map(|g| alphabet.format(g)),
            "orbit_sum": r.orbit_sum,
            "word_sum": r.word_sum,
            "conjugator_orbit": r.conjugator_orbit,
            "ratio": r.ratio,
        }));
    }
    let header: Vec<String> =
        ["index", "a", "b", "g", "orbit_sum", "word_sum", "conjugator_orbit", "ratio"].map(String::from).to_vec();
    let table = Table {
        rows: rows.iter().map(|r| header.iter().map(|h| r[h].clone()).collect()).collect(),
        header,
    };
    Ok(Report {
        command: "orbit-report".into(),
        config: json!({
            "representation": rho.spec(),
            "basepoint": y,
            "instances": args.instances,
            "n": args.n,
            "max_len": args.max_len,
            "conj_len": args.conj_len,
            "explicit": args.a.is_some(),
        }),
        result: json!({"rows": rows, "max_ratio": max_ratio}),
        table: Some(table),
        exit: exit::OK,
    })
}

// ---------------------------------------------------------------------------
// output

/// Scalars in CSV and human output: integers as is, floats with 17
/// significant digits.
fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap()),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `(path, scalar)` pairs of a JSON tree in document order.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

fn envelope(report: &Report, seed: u64) -> Value {
    json!({
        "tool": "hadamard",
        "version": env!("CARGO_PKG_VERSION"),
        "command": report.command,
        "seed": seed,
        "config": report.config,
        "result": report.result,
    })
}

/// Renders a report document.
pub fn render(report: &Report, seed: u64, format: Format) -> String {
    let mut s = String::new();
    match format {
        Format::Json => {
            s = serde_json::to_string_pretty(&envelope(report, seed)).expect("serializable");
            s.push('\n');
        }
        Format::Csv => {
            s.push_str(&format!("# tool: hadamard {}\n", env!("CARGO_PKG_VERSION")));
            s.push_str(&format!("# command: {}\n", report.command));
            s.push_str(&format!("# seed: {seed}\n"));
            s.push_str(&format!("# config: {}\n", report.config));
            match &report.table {
                Some(t) => {
                    s.push_str(&t.header.join(","));
                    s.push('\n');
                    for row in &t.rows {
                        let cells: Vec<String> = row.iter().map(|c| csv_field(&scalar(c))).collect();
                        s.push_str(&cells.join(","));
                        s.push('\n');
                    }
                }
                None => {
                    let mut pairs = Vec::new();
                    flatten("", &report.result, &mut pairs);
                    s.push_str("key,value\n");
                    for (k, v) in pairs {
                        s.push_str(&format!("{},{}\n", csv_field(&k), csv_field(&v)));
                    }
                }
            }
        }
        Format::Human => {
            s.push_str(&format!("hadamard {} {}\n", env!("CARGO_PKG_VERSION"), report.command));
            s.push_str(&format!("seed: {seed:#x}\n"));
            let mut pairs = Vec::new();
            flatten("config", &report.config, &mut pairs);
            flatten("result", &report.result, &mut pairs);
            let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in pairs {
                s.push_str(&format!("{k:<width$}  {v}\n"));
            }
        }
    }
    s
}

fn dispatch(cli: &Cli) -> CliResult<Report> {
    let threads = cli.threads as usize;
    match &cli.command {
        Command::CheckCat0(a) => check_cat0(a, cli.seed),
        Command::Width(a) => width(a),
        Command::Convexity(a) => convexity(a),
        Command::Harmonic(a) => harmonic(a),
        Command::EstimateCstar(a) => estimate(a, cli.seed, threads),
        Command::Conjugacy(ConjugacyCommand::Solve(a)) => conjugacy_solve(a, threads, cli.timing),
        Command::OrbitReport(a) => orbit_report(a, cli.seed),
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// writes one report to `out`. Diagnostics go to `err`. Returns the exit
/// code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                exit::USAGE
            } else {
                // --help and --version
                let _ = write!(out, "{text}");
                exit::OK
            };
        }
    };
    match dispatch(&cli) {
        Ok(report) => {
            if out.write_all(render(&report, cli.seed, cli.format).as_bytes()).is_err() {
                return exit::SOFTWARE;
            }
            report.exit
        }
        Err(e) => {
            let _ = writeln!(err, "hadamard: error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("hadamard").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn seeds_parse_in_hex_and_decimal() {
        assert_eq!(parse_seed("0xCA70"), Ok(DEFAULT_SEED));
        assert_eq!(parse_seed("51824"), Ok(DEFAULT_SEED));
        assert!(parse_seed("0xCAT0").is_err());
    }

    #[test]
    fn alphabet_resolution() {
        assert_eq!(resolve_alphabet("2", &["ab", "bA"]).unwrap().names(), "ab");
        assert_eq!(resolve_alphabet("2", &["xy,yX"]).unwrap().names(), "xy");
        assert_eq!(resolve_alphabet("2", &["q"]).unwrap().names(), "aq");
        assert_eq!(resolve_alphabet("uv", &["u"]).unwrap().names(), "uv");
        assert!(resolve_alphabet("1", &["xy"]).is_err());
    }

    #[test]
    fn flat_check_cat0_exits_zero() {
        let (code, out, _) = run_str(&["check-cat0", "--model", "euclidean", "--dim", "2", "--trials", "10"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["holds"], json!(true));
        assert!(v["result"]["triangle"]["max_abs"].as_f64().unwrap() <= 1e-9);
        assert_eq!(v["seed"], json!(DEFAULT_SEED));
    }

    #[test]
    fn conjugacy_identity_example() {
        let (code, out, _) = run_str(&["conjugacy", "solve", "--alphabet", "2", "--a", "x", "--b", "x"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["verdict"], json!("Conjugate"));
        assert_eq!(v["result"]["g"], json!(""));
        assert_eq!(v["result"]["stats"]["seconds"], Value::Null);
        let (code, _, _) = run_str(&["conjugacy", "solve", "--alphabet", "2", "--a", "x", "--b", "y"]);
        assert_eq!(code, exit::NOT_CONJUGATE);
    }

    #[test]
    fn usage_and_help_codes() {
        assert_eq!(run_str(&["frobnicate"]).0, exit::USAGE);
        assert_eq!(run_str(&[]).0, exit::USAGE);
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        for c in ["64", "65", "66", "70", "75", "78"] {
            assert!(out.contains(c), "help lacks exit code {c}");
        }
        assert_eq!(run_str(&["width", "--u", "/nonexistent/u.json", "--v", "/nonexistent/v.json"]).0, exit::NO_INPUT);
        assert_eq!(run_str(&["conjugacy", "solve", "--alphabet", "2", "--a", "x!", "--b", "x"]).0, exit::DATA);
        assert_eq!(
            run_str(&["conjugacy", "solve", "--alphabet", "2", "--a", "x", "--b", "x", "--policy", "bound"]).0,
            exit::CONFIG
        );
    }

    #[test]
    fn formats_render() {
        let args = ["check-cat0", "--model", "hyperbolic", "--trials", "5"];
        for f in ["csv", "human"] {
            let mut a = args.to_vec();
            a.extend(["--format", f]);
            let (code, out, _) = run_str(&a);
            assert_eq!(code, 0, "{out}");
            assert!(out.contains("triangle"));
        }
        let (_, csv, _) = run_str(&[&args[..], &["--format", "csv"]].concat());
        assert!(csv.lines().any(|l| l == "check,evaluations,min,max_abs,violations"));
    }
}
