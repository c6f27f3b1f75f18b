//! Command-line frontend. Every subcommand produces one JSON document
//! `{schema, command, inputs, results, diagnostics}`; grid-valued commands
//! can also be written as CSV.

mod output;

pub use output::{format_f64, to_csv, to_json};

pub use crate::interaction::parse_interaction;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bessel::{laplace_prefactor, log_z_bessel, w_n_numeric};
use crate::equivalence::{relative_entropy_rate, verify_gap};
use crate::error::{Error, Result};
use crate::interaction::{analyze, analyze_with, limiting_mixture, rate_function, FiniteMixture, Interaction};
use crate::model::{log_z_interior, LogReal, ModelPoint, PartitionTable, Region};
use crate::sampling::{estimate_observables, random_bounded_suite, Observable, RngState, SamplerSpec};
use crate::thermo::{
    ensemble_map, grand_entropy, inverse_map, legendre_inf_numeric, limiting_entropy, limiting_entropy_simplified,
    FieldParams,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "orthoplex", version, about = "Mean-field orthoplicial spin model toolkit")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for sampling; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Add wall-clock `runtime_ms` to the diagnostics.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// ln Z_n and s_n at a point.
    #[command(allow_negative_numbers = true)]
    Partition(PartitionArgs),
    /// Limiting entropies, ensemble map and Legendre duality residual.
    #[command(allow_negative_numbers = true)]
    Thermo(ThermoArgs),
    /// Monte Carlo estimates of basic observables.
    #[command(allow_negative_numbers = true)]
    Sample(SampleArgs),
    /// Empirical expectation gaps against the Pinsker bound.
    #[command(allow_negative_numbers = true)]
    Equivalence(EquivalenceArgs),
    /// Maximizers of psi, their types and weights, and the limit mixture.
    #[command(allow_negative_numbers = true)]
    Analyze(AnalyzeArgs),
    /// The rate function on a grid.
    #[command(allow_negative_numbers = true)]
    Rate(RateArgs),
    /// ln kappa_n([a, b]).
    #[command(name = "mixture-mass", allow_negative_numbers = true)]
    MixtureMass(MixtureMassArgs),
    /// Angular representation of Z_n against the direct sum.
    #[command(name = "bessel-check", allow_negative_numbers = true)]
    BesselCheck(BesselCheckArgs),
    /// W_n over a ladder of n against the limiting weight.
    #[command(name = "laplace-check", allow_negative_numbers = true)]
    LaplaceCheck(LaplaceCheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Partition(_) => "partition",
            Command::Thermo(_) => "thermo",
            Command::Sample(_) => "sample",
            Command::Equivalence(_) => "equivalence",
            Command::Analyze(_) => "analyze",
            Command::Rate(_) => "rate",
            Command::MixtureMass(_) => "mixture-mass",
            Command::BesselCheck(_) => "bessel-check",
            Command::LaplaceCheck(_) => "laplace-check",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PartitionArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub rho: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThermoArgs {
    #[arg(long, requires = "rho")]
    pub m: Option<f64>,
    #[arg(long, requires = "m")]
    pub rho: Option<f64>,
    #[arg(long, requires = "mu")]
    pub beta: Option<f64>,
    #[arg(long, requires = "beta")]
    pub mu: Option<f64>,
    /// Seed of the random restart in the Legendre minimization.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, requires = "rho", conflicts_with_all = ["beta", "mu"])]
    pub m: Option<f64>,
    #[arg(long, requires = "m")]
    pub rho: Option<f64>,
    #[arg(long, requires = "mu")]
    pub beta: Option<f64>,
    #[arg(long, requires = "beta")]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EquivalenceArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Size of the random bounded observable suite.
    #[arg(long, default_value_t = 20)]
    pub observables: usize,
    #[arg(long, default_value_t = 3)]
    pub max_arity: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InteractionArg {
    /// Interaction, e.g. `cw:betaJ=1,h=0`, `linear:beta=0.5`, `poly:0,1`, `expr:0.5*m^2`.
    #[arg(value_name = "G")]
    pub g: Option<String>,
    #[arg(long = "g", value_name = "G", conflicts_with = "g")]
    #[serde(skip)]
    pub g_flag: Option<String>,
}

impl InteractionArg {
    fn spec(&self) -> Result<String> {
        self.g
            .clone()
            .or_else(|| self.g_flag.clone())
            .ok_or_else(|| Error::InvalidArgument("an interaction is required".into()))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub interaction: InteractionArg,
    /// Maxima within this value of the largest count as global.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_value: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_sep: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RateArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub interaction: InteractionArg,
    #[arg(long, default_value_t = -1.0)]
    pub from: f64,
    #[arg(long, default_value_t = 1.0)]
    pub to: f64,
    #[arg(long, default_value_t = 65)]
    pub points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MixtureMassArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub interaction: InteractionArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BesselCheckArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,5,10,20,40")]
    pub n: Vec<usize>,
    /// Single point; without it a 5x5 interior grid is used.
    #[arg(long, requires = "rho")]
    pub m: Option<f64>,
    #[arg(long, requires = "m")]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LaplaceCheckArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub interaction: InteractionArg,
    /// Maximizer to integrate around; defaults to the largest one.
    #[arg(long)]
    pub m_star: Option<f64>,
    /// Half-width of the window; defaults to 0.9 of the distance to the
    /// boundary or halfway to the next maximizer.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
    pub ladder: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    tolerances: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Document {
    schema: u32,
    command: &'static str,
    inputs: Value,
    results: Value,
    diagnostics: Diagnostics,
}

#[derive(Debug, Serialize)]
struct ErrorDocument<'a> {
    schema: u32,
    command: &'a str,
    error: ErrorBody,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
}

/// Rendered output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub body: String,
    pub exit_code: i32,
}

struct Outcome {
    inputs: Value,
    results: Value,
    tolerances: BTreeMap<&'static str, f64>,
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn log_real_json(v: LogReal) -> Value {
    let x = v.value();
    json!({ "ln": v.ln(), "value": if x.is_finite() { Some(x) } else { None } })
}

/// Runs one configuration. Module errors become an error document with
/// exit code 1.
pub fn run(config: &RunConfig) -> RunOutput {
    let start = Instant::now();
    let name = config.command.name();
    let rendered = dispatch(&config.command).and_then(|o| {
        let runtime_ms = config.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        match config.format {
            Format::Json => to_json(&Document {
                schema: SCHEMA_VERSION,
                command: name,
                inputs: o.inputs,
                results: o.results,
                diagnostics: Diagnostics { tolerances: o.tolerances, runtime_ms },
            }),
            Format::Csv => match o.results.get("rows").and_then(Value::as_array) {
                Some(rows) => to_csv(rows),
                None => Err(Error::InvalidArgument(format!("{name} has no grid output; use --format json"))),
            },
        }
    });
    match rendered {
        Ok(body) => RunOutput { body, exit_code: 0 },
        Err(e) => RunOutput {
            body: to_json(&ErrorDocument {
                schema: SCHEMA_VERSION,
                command: name,
                error: ErrorBody { kind: e.kind(), message: e.to_string() },
            })
            .expect("error document serializes"),
            exit_code: 1,
        },
    }
}

/// Parses `args`, runs on a pool of `--threads` workers and writes the
/// document. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        pool = pool.num_threads(t);
    }
    let out = match pool.build() {
        Ok(p) => p.install(|| run(&config)),
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return 1;
        }
    };
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.body) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None => print!("{}", out.body),
    }
    out.exit_code
}

fn dispatch(command: &Command) -> Result<Outcome> {
    match command {
        Command::Partition(a) => partition(a),
        Command::Thermo(a) => thermo(a),
        Command::Sample(a) => sample(a),
        Command::Equivalence(a) => equivalence(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Rate(a) => rate(a),
        Command::MixtureMass(a) => mixture_mass(a),
        Command::BesselCheck(a) => bessel_check(a),
        Command::LaplaceCheck(a) => laplace_check(a),
    }
}

fn partition(a: &PartitionArgs) -> Result<Outcome> {
    let point = ModelPoint::new(a.m, a.rho)?;
    let table = PartitionTable::new(a.n)?;
    let t = point.totals(a.n);
    let lz = LogReal::from_ln(table.log_z_totals(t.magnetization, t.particles))?;
    Ok(Outcome {
        inputs: value(a),
        results: json!({
            "region": match point.region() { Region::Interior => "interior", Region::Boundary => "boundary" },
            "magnetization": t.magnetization,
            "particles": t.particles,
            "log_z": log_real_json(lz),
            "entropy_n": table.entropy(&point),
        }),
        tolerances: BTreeMap::from([("boundary_rel", crate::model::BOUNDARY_REL_TOL)]),
    })
}

fn thermo(a: &ThermoArgs) -> Result<Outcome> {
    let mut results = serde_json::Map::new();
    if let (Some(m), Some(rho)) = (a.m, a.rho) {
        let point = ModelPoint::interior(m, rho)?;
        let s = limiting_entropy(&point)?;
        let params = ensemble_map(&point)?;
        let leg = legendre_inf_numeric(&point, a.seed)?;
        results.insert(
            "point".into(),
            json!({
                "s": s,
                "s_simplified": limiting_entropy_simplified(&point)?,
                "ensemble_map": params,
                "f": grand_entropy(params.beta(), params.mu()),
                "legendre": leg,
                "duality_residual": (leg.value - s).abs(),
            }),
        );
    }
    if let (Some(beta), Some(mu)) = (a.beta, a.mu) {
        let params = FieldParams::new(beta, mu)?;
        let point = inverse_map(&params)?;
        results.insert(
            "fields".into(),
            json!({
                "f": grand_entropy(beta, mu),
                "inverse_map": { "m": point.m(), "rho": point.rho() },
                "positive_mass": params.positive_mass(),
            }),
        );
    }
    if results.is_empty() {
        return Err(Error::InvalidArgument("give --m/--rho, --beta/--mu, or both".into()));
    }
    Ok(Outcome {
        inputs: value(a),
        results: Value::Object(results),
        tolerances: BTreeMap::from([("legendre_x_tol", 1e-12)]),
    })
}

fn sampler_spec(n: usize, m: Option<f64>, rho: Option<f64>, beta: Option<f64>, mu: Option<f64>) -> Result<SamplerSpec> {
    match (m, rho, beta, mu) {
        (Some(m), Some(rho), None, None) => Ok(SamplerSpec::Microcanonical { n, m, rho }),
        (None, None, Some(beta), Some(mu)) => Ok(SamplerSpec::GrandCanonical { n, beta, mu }),
        _ => Err(Error::InvalidArgument("give either --m/--rho or --beta/--mu".into())),
    }
}

fn sample(a: &SampleArgs) -> Result<Outcome> {
    let spec = sampler_spec(a.n, a.m, a.rho, a.beta, a.mu)?;
    let n = a.n;
    let suite = vec![
        Observable::first_coordinate(),
        Observable::abs_first_coordinate(),
        Observable::new("phi_1^2", 1, f64::INFINITY, |x| x[0] * x[0])?,
        Observable::new("M/n", n, f64::INFINITY, move |x| x.iter().sum::<f64>() / n as f64)?,
        Observable::new("N/n", n, f64::INFINITY, move |x| x.iter().map(|v| v.abs()).sum::<f64>() / n as f64)?,
    ];
    let est = estimate_observables(&spec, &suite, a.samples, RngState::new(a.seed, 0))?;
    let estimates: Vec<Value> = suite
        .iter()
        .zip(&est)
        .map(|(o, e)| json!({ "observable": o.name(), "mean": e.mean, "stderr": e.stderr, "samples": e.samples }))
        .collect();
    Ok(Outcome {
        inputs: value(a),
        results: json!({ "sampler": spec, "estimates": estimates }),
        tolerances: BTreeMap::new(),
    })
}

fn equivalence(a: &EquivalenceArgs) -> Result<Outcome> {
    let point = ModelPoint::interior(a.m, a.rho)?;
    let suite = random_bounded_suite(a.observables, a.max_arity, a.seed)?;
    let report = verify_gap(a.n, &point, &suite, a.samples, RngState::new(a.seed, 0))?;
    let rate = relative_entropy_rate(a.n, &point, &report.params)?;
    Ok(Outcome {
        inputs: value(a),
        results: json!({ "relative_entropy_rate": rate, "report": report }),
        tolerances: BTreeMap::from([
            ("stderr_slack", crate::equivalence::STDERR_SLACK),
            ("radicand_clamp", crate::equivalence::RADICAND_CLAMP),
        ]),
    })
}

fn interaction_inputs(g: &Interaction, rest: Value) -> Value {
    let mut v = json!({ "g": g.to_string() });
    if let (Some(obj), Value::Object(extra)) = (v.as_object_mut(), rest) {
        obj.extend(extra);
    }
    v
}

fn analyze_cmd(a: &AnalyzeArgs) -> Result<Outcome> {
    let g = parse_interaction(&a.interaction.spec()?)?;
    let records = analyze_with(&g, a.tol_value, a.tol_sep)?;
    let mixture = limiting_mixture(&g)?;
    Ok(Outcome {
        inputs: interaction_inputs(&g, value(a)),
        results: json!({ "maximizers": records, "mixture": mixture }),
        tolerances: BTreeMap::from([("value", a.tol_value), ("separation", a.tol_sep)]),
    })
}

fn rate(a: &RateArgs) -> Result<Outcome> {
    let g = parse_interaction(&a.interaction.spec()?)?;
    if a.points < 2 || !(a.from < a.to) {
        return Err(Error::InvalidArgument("need --points >= 2 and --from < --to".into()));
    }
    let rows = (0..a.points)
        .map(|i| {
            let m = a.from + (a.to - a.from) * i as f64 / (a.points - 1) as f64;
            let r = rate_function(&g, m)?;
            Ok(json!({ "m": m, "rate": r, "finite": r.is_finite() }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome {
        inputs: interaction_inputs(&g, value(a)),
        results: json!({ "rows": rows }),
        tolerances: BTreeMap::new(),
    })
}

fn mixture_mass(a: &MixtureMassArgs) -> Result<Outcome> {
    let g = parse_interaction(&a.interaction.spec()?)?;
    let mix = FiniteMixture::new(g.clone(), a.n, a.rel_tol)?;
    let lm = mix.log_mass(a.a, a.b)?;
    Ok(Outcome {
        inputs: interaction_inputs(&g, value(a)),
        results: json!({
            "log_mass": lm,
            "mass": lm.exp(),
            "log_normalizer": mix.log_normalizer(),
            "scaled_log_mass": -lm / a.n as f64,
        }),
        tolerances: BTreeMap::from([("quadrature_rel", a.rel_tol)]),
    })
}

/// The 5x5 interior grid used by `bessel-check`.
pub fn bessel_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for rho in [0.5, 0.8, 1.0, 1.5, 2.0] {
        for frac in [-0.8, -0.4, 0.0, 0.4, 0.8] {
            out.push((frac * rho, rho));
        }
    }
    out
}

fn bessel_check(a: &BesselCheckArgs) -> Result<Outcome> {
    let points = match (a.m, a.rho) {
        (Some(m), Some(rho)) => vec![(m, rho)],
        _ => bessel_grid(),
    };
    let mut rows = Vec::new();
    for &n in &a.n {
        for &(m, rho) in &points {
            let p = ModelPoint::interior(m, rho)?;
            let exact = log_z_interior(n, &p)?.ln();
            let angular = log_z_bessel(n, &p)?.ln();
            rows.push(json!({
                "n": n, "m": m, "rho": rho,
                "log_z": exact, "log_z_bessel": angular,
                "rel_error": (angular - exact).exp_m1().abs(),
            }));
        }
    }
    let worst = rows.iter().filter_map(|r| r["rel_error"].as_f64()).fold(0.0, f64::max);
    Ok(Outcome {
        inputs: value(a),
        results: json!({ "max_rel_error": worst, "rows": rows }),
        tolerances: BTreeMap::from([("level_agreement", 1e-12)]),
    })
}

fn laplace_check(a: &LaplaceCheckArgs) -> Result<Outcome> {
    let g = parse_interaction(&a.interaction.spec()?)?;
    let records = analyze(&g)?;
    let rec = match a.m_star {
        Some(m) => records
            .iter()
            .find(|r| (r.m_star - m).abs() < 1e-6)
            .ok_or_else(|| Error::InvalidArgument(format!("{m} is not a global maximizer")))?,
        None => records.last().expect("analyze returns at least one maximizer"),
    };
    let delta = a.delta.unwrap_or_else(|| {
        let gap = records
            .iter()
            .filter(|r| r.m_star != rec.m_star)
            .map(|r| 0.5 * (r.m_star - rec.m_star).abs())
            .fold(1.0 - rec.m_star.abs(), f64::min);
        0.9 * gap
    });
    let rows = a
        .ladder
        .iter()
        .map(|&n| {
            let w_n = w_n_numeric(&g, rec.m_star, delta, n)?;
            Ok(json!({
                "n": n,
                "w_n": w_n,
                "ratio": w_n / rec.weight,
                "abs_error": (w_n / rec.weight - 1.0).abs(),
                "ln_prefactor": laplace_prefactor(n, rec.type_k)?.ln(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome {
        inputs: interaction_inputs(&g, value(a)),
        results: json!({
            "m_star": rec.m_star,
            "type_k": rec.type_k,
            "delta": delta,
            "weight": rec.weight,
            "rows": rows,
        }),
        tolerances: BTreeMap::from([("quadrature_rel", 1e-12)]),
    })
}
