//! `kenergy`: command-line access to the kenergy library. Every command
//! prints one JSON document holding its results and a `config` echo of the
//! resolved arguments.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kenergy::asymptotics::{log_samples, slope_fit, slope_integer, stability_scan};
use kenergy::catalog::{build_instance, builtin_names, write_instance, CatalogName, VarietyInstance};
use kenergy::chern::{closed_form_jet_top_chern, derive_jet_top_chern, ChernProfile};
use kenergy::energy::{
    build_pair_vectors, energy_via_formula, energy_via_pair, energy_via_recursion, minimize_energy,
    MinimizeOptions,
};
use kenergy::exactpoly::json::read_poly;
use kenergy::exactpoly::{format_rational, parse_rational};
use kenergy::invariants::{format_range, hyperdiscriminant_degree, mu_from_degrees, VarietyData};
use kenergy::numeric::{
    energy_quadrature, energy_slope, mu_quadrature, surface_integrals, CurvatureMethod, CurveChart,
    DetourPath, LinearPath, QuadraticPath, QuadratureSpec,
};
use kenergy::pairing::{fs_norm_sq_exact, log_fs_norm_sq, min_weight, GroupElement, OneParamSubgroup};
use kenergy::{Error, Result};
use nalgebra::DMatrix;
use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use output::{emit, Format};

#[derive(Parser, Serialize)]
#[command(
    name = "kenergy",
    version,
    about = "Higher K-energies of Bergman metrics from Chow forms and hyperdiscriminants",
    long_about = "Higher K-energies of Bergman metrics from Chow forms and hyperdiscriminants.\n\n\
        Every command prints a JSON document with its results and a `config` echo.\n\
        Exit codes: 0 success, 1 domain error (JSON error object on stdout), 2 usage error.\n\
        KENERGY_THREADS caps the number of worker threads."
)]
struct Cli {
    /// Output format; pretty and csv are derived from the JSON document.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Build catalog varieties and write their instance directories.
    #[command(subcommand)]
    Catalog(CatalogCmd),

    /// Degrees of the discriminants Δ^(n-i), i <= k, of a variety given by its
    /// normalized Chern numbers μ_i; also checks that the μ_i are recovered
    /// from those degrees.
    Degrees(DegreesArgs),

    /// Top Chern class of the first jet bundle of the Segre hyperplane bundle
    /// on X × CP^(n-k), derived from the jet sequence, compared with its
    /// closed form Σ (-1)^i (n-i+1) C(n-i, n-k) c_i ω^(n-i) ω_FS^(n-k).
    DeriveChern(ChernArgs),

    /// Factorial-weighted Fubini–Study norm Σ |c_α|² / α! of a polynomial file.
    Norm(NormArgs),

    /// Minimal weight min_α <column degrees of α, λ> of a polynomial under a
    /// diagonal one-parameter subgroup.
    Weight(WeightArgs),

    /// M_k(σ) as a signed combination of log-norm ratios of the Chow form and
    /// the hyperdiscriminants, evaluated by the closed formula, by the pair
    /// (v_k, w_k), and by the recursion in k.
    Energy(EnergyArgs),

    /// Integer slope A_k(λ) = w_λ(v_k) - w_λ(w_k) of M_k(λ(t)) against log|t|²,
    /// optionally with a least-squares fit of M_k along λ(t).
    Asymptotics(AsymptoticsArgs),

    /// A_k(λ) for every integer weight vector with Σ a_i = 0 and
    /// max |a_i| <= bound; M_k is bounded below along λ iff A_k(λ) <= 0.
    Scan(ScanArgs),

    /// Quadrature checks on rational curves: μ_1 and volume, Gauss–Bonnet,
    /// the analytic M_1 slope along λ(t), and independence of the path.
    Numeric(NumericArgs),

    /// Gradient descent of M_k over SL(N+1, C) from a seeded random start.
    Minimize(MinimizeArgs),
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
enum CatalogCmd {
    /// Write instance.json, chow.json and hyper_<i>.json for a catalog entry.
    Build {
        /// conic, twisted_cubic, rational_normal_curve(d), quadric_surface,
        /// quadric_hypersurface(n).
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in entries.
    List,
}

#[derive(Args, Serialize)]
struct DegreesArgs {
    /// Dimension of X.
    #[arg(long)]
    n: u32,
    /// Ambient CP^N; defaults to n + 1.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    ambient: Option<u32>,
    /// Degree of X.
    #[arg(long)]
    deg: u32,
    /// μ_0, …, μ_n as integers or p/q.
    #[arg(long, value_delimiter = ',')]
    mu: Vec<String>,
    #[arg(long)]
    k: u32,
    /// Dual defect δ(X).
    #[arg(long, default_value_t = 0)]
    delta: u32,
}

#[derive(Args, Serialize)]
struct ChernArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
}

#[derive(Args, Serialize)]
struct NormArgs {
    file: PathBuf,
}

#[derive(Args, Serialize)]
struct WeightArgs {
    /// Weights a_0, …, a_N with Σ a_i = 0.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Vec<i64>,
    file: PathBuf,
}

#[derive(Args, Serialize)]
struct InstanceArg {
    /// Instance directory, or a catalog name such as `conic`.
    #[arg(long)]
    instance: String,
    #[arg(long)]
    k: u32,
}

#[derive(Args, Serialize)]
struct EnergyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    inst: InstanceArg,
    /// Matrix file {"rows", "cols", "entries": [{"re", "im"}]}; identity if absent.
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Rescale σ to determinant 1.
    #[arg(long)]
    normalize: bool,
    /// Include the per-term breakdown of the closed formula.
    #[arg(long)]
    breakdown: bool,
}

#[derive(Args, Serialize)]
struct AsymptoticsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    inst: InstanceArg,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Vec<i64>,
    /// Sample grid hi:lo:count of |t| values, log-spaced.
    #[arg(long)]
    fit: Option<String>,
}

#[derive(Args, Serialize)]
struct ScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    inst: InstanceArg,
    #[arg(long)]
    bound: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Check {
    Mu,
    GaussBonnet,
    Slope,
    Path,
}

#[derive(Args, Serialize)]
struct NumericArgs {
    /// Instance directory or catalog name of a rational curve.
    #[arg(long)]
    instance: String,
    #[arg(long, value_enum)]
    check: Check,
    /// Diagonal weights: the one-parameter subgroup for `slope`, the
    /// generator diag(ξ) for `path`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "2,-1,-1")]
    xi: Vec<f64>,
    /// Sample grid hi:lo:count of |t| values for `slope`.
    #[arg(long, default_value = "1e-1:1e-4:4")]
    samples: String,
    /// Seed for random group elements (`gauss-bonnet`, `path`).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random σ for `gauss-bonnet`.
    #[arg(long, default_value_t = 5)]
    count: usize,
    /// Curvature by finite differences of log h instead of the Plücker formula.
    #[arg(long)]
    finite_differences: bool,
    #[arg(long, default_value_t = 32)]
    angular: usize,
    #[arg(long, default_value_t = 24)]
    time_nodes: usize,
}

#[derive(Args, Serialize)]
struct MinimizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    inst: InstanceArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    /// Spread of the random starting point around the identity.
    #[arg(long, default_value_t = 0.5)]
    scale: f64,
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

fn load_instance(s: &str) -> Result<VarietyInstance> {
    let p = Path::new(s);
    if p.is_dir() {
        return build_instance(&CatalogName::User(p.to_path_buf()));
    }
    let name: CatalogName = s.parse()?;
    build_instance(&name)
}

fn lambda(w: &[i64]) -> Result<OneParamSubgroup> {
    OneParamSubgroup::new(w.to_vec())
}

fn grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Invalid(format!("sample grid must be hi:lo:count, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let hi: f64 = parts[0].parse().map_err(|_| bad())?;
    let lo: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    log_samples(hi, lo, n)
}

/// Integers that fit in `i64` as JSON numbers, larger ones as strings.
fn big(v: &BigInt) -> Value {
    v.to_i64().map_or_else(|| json!(v.to_string()), |i| json!(i))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(o) => o,
        _ => unreachable!("results are objects"),
    }
}

fn run_catalog(cmd: &CatalogCmd) -> Result<Value> {
    match cmd {
        CatalogCmd::List => Ok(json!({
            "names": builtin_names().iter().map(|n| n.to_string()).collect::<Vec<_>>()
        })),
        CatalogCmd::Build { name, out } => {
            let inst = build_instance(&name.parse()?)?;
            write_instance(out, &inst)?;
            let mut terms = Map::new();
            terms.insert("chow".into(), json!(inst.discriminants.chow.len()));
            for (i, p) in &inst.discriminants.hyper {
                terms.insert(format!("hyper_{i}"), json!(p.len()));
            }
            Ok(json!({
                "name": inst.name,
                "n": inst.data.n,
                "N": inst.data.ambient,
                "d": inst.data.degree,
                "delta": inst.data.delta,
                "supportedK": inst.supported_k(),
                "terms": terms,
                "out": out,
            }))
        }
    }
}

fn run_degrees(a: &DegreesArgs) -> Result<Value> {
    let mu = a.mu.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
    let ambient = a.ambient.unwrap_or(a.n + 1);
    let profile = ChernProfile::new(a.n, mu.clone(), a.deg, ambient)?;
    let data = VarietyData::new(a.n, ambient, a.deg, profile, a.delta)?;
    let degree = hyperdiscriminant_degree(&data, a.k)?;
    let degs = data.dual_degrees(a.k)?;
    let back = mu_from_degrees(&degs, a.deg, a.n, a.k)?;
    Ok(json!({
        "degree": big(&degree),
        "dualDegrees": degs.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "formatRange": to_value(&format_range(&data)),
        "muRoundTrip": back == mu[a.k as usize],
        "muK": format_rational(&back),
    }))
}

fn run_chern(a: &ChernArgs) -> Result<Value> {
    let derived = derive_jet_top_chern(a.n, a.k)?;
    let closed = closed_form_jet_top_chern(a.n, a.k)?;
    let list = |c: &kenergy::chern::GradedClass| -> Result<Vec<Value>> {
        Ok(c.top_coefficients()?
            .iter()
            .map(|(i, q)| json!({"i": i, "coefficient": format_rational(q)}))
            .collect())
    };
    Ok(json!({
        "coefficients": list(&derived)?,
        "closedForm": list(&closed)?,
        "status": if derived == closed { "PASS" } else { "FAIL" },
    }))
}

fn run_norm(a: &NormArgs) -> Result<Value> {
    let p = read_poly(&a.file)?;
    Ok(json!({
        "normSq": format_rational(&fs_norm_sq_exact(&p)?),
        "logNormSq": log_fs_norm_sq(&p)?,
        "terms": p.len(),
    }))
}

fn run_weight(a: &WeightArgs) -> Result<Value> {
    let p = read_poly(&a.file)?;
    Ok(json!({"weight": min_weight(&lambda(&a.lambda)?, &p)?}))
}

fn read_sigma(path: &Option<PathBuf>, normalize: bool, size: usize) -> Result<GroupElement> {
    match path {
        None => Ok(GroupElement::identity(size)),
        Some(p) => GroupElement::from_json(&std::fs::read_to_string(p)?, normalize),
    }
}

fn run_energy(a: &EnergyArgs) -> Result<Value> {
    let inst = load_instance(&a.inst.instance)?;
    let k = a.inst.k;
    let sigma = read_sigma(&a.sigma, a.normalize, inst.ambient() as usize + 1)?;
    if sigma.size() != inst.ambient() as usize + 1 {
        return Err(Error::Invalid(format!(
            "σ must be {n}x{n} for this instance",
            n = inst.ambient() + 1
        )));
    }
    let b = energy_via_formula(&inst, &sigma, k)?;
    let pair = build_pair_vectors(&inst.data, k)?;
    let mut out = json!({
        "Mk": b.total,
        "viaPair": energy_via_pair(&inst, &sigma, k)?,
        "viaRecursion": energy_via_recursion(&inst, &sigma, k)?,
        "pair": {
            "v": pair.v.describe(inst.n()),
            "w": pair.w.describe(inst.n()),
            "degree": big(&pair.degree),
        },
    });
    if a.breakdown {
        out["breakdown"] = to_value(&b.contributions);
    }
    Ok(out)
}

fn run_asymptotics(a: &AsymptoticsArgs) -> Result<Value> {
    let inst = load_instance(&a.inst.instance)?;
    let l = lambda(&a.lambda)?;
    let ak = slope_integer(&inst, a.inst.k, &l)?;
    let mut out = json!({
        "Ak": big(&ak),
        "boundedBelow": ak.sign() != Sign::Plus,
    });
    if let Some(f) = &a.fit {
        let r = slope_fit(&inst, a.inst.k, &l, &grid(f)?)?;
        out["fit"] = json!({
            "slope": r.fit_slope,
            "residual": r.fit_residual,
            "offsetSpread": r.offset_spread,
        });
        out["table"] = Value::Array(
            r.samples
                .iter()
                .map(|(t, m)| json!({"t": t, "logT2": 2.0 * t.ln(), "Mk": m}))
                .collect(),
        );
    }
    Ok(out)
}

fn run_scan(a: &ScanArgs) -> Result<Value> {
    let inst = load_instance(&a.inst.instance)?;
    let r = stability_scan(&inst, a.inst.k, a.bound)?;
    Ok(to_value(&r))
}

fn spec_for(a: &NumericArgs) -> QuadratureSpec {
    QuadratureSpec {
        angular: a.angular,
        time_nodes: a.time_nodes,
        curvature: if a.finite_differences {
            CurvatureMethod::FiniteDifference
        } else {
            CurvatureMethod::Exact
        },
        ..Default::default()
    }
}

fn diag(v: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(v.len(), v.len(), |i, j| {
        Complex64::new(if i == j { v[i] } else { 0.0 }, 0.0)
    })
}

fn traceless(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let tr = m.trace() / n as f64;
    &m - DMatrix::identity(n, n) * tr
}

fn run_numeric(a: &NumericArgs) -> Result<Value> {
    let inst = load_instance(&a.instance)?;
    let chart = CurveChart::from_instance(&inst)?;
    let spec = spec_for(a);
    let size = inst.ambient() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    match a.check {
        Check::Mu => {
            let r = mu_quadrature(&chart, &spec)?;
            let expected = chart.mu1();
            Ok(json!({
                "volume": r.volume,
                "chern1": r.chern1,
                "mu1": r.mu1,
                "expectedMu1": expected,
                "pass": (r.mu1 - expected).abs() < 1e-5 && (r.volume - chart.degree() as f64).abs() < 1e-5,
            }))
        }
        Check::GaussBonnet => {
            let mut rows = Vec::new();
            for i in 0..a.count {
                let s = GroupElement::random(&mut rng, size, 0.5);
                let r = surface_integrals(&chart, s.matrix(), &spec)?;
                rows.push(json!({
                    "sample": i,
                    "chern1": r.chern1,
                    "volume": r.volume,
                    "minMetric": r.min_metric,
                }));
            }
            let pass = rows.iter().all(|r| (r["chern1"].as_f64().unwrap_or(f64::NAN) - 2.0).abs() < 1e-4);
            Ok(json!({"pass": pass, "table": rows}))
        }
        Check::Slope => {
            let w: Vec<i64> = a.xi.iter().map(|&x| x.round() as i64).collect();
            if w.iter().zip(&a.xi).any(|(&i, &x)| i as f64 != x) {
                return Err(Error::Invalid("slope weights must be integers".into()));
            }
            let l = lambda(&w)?;
            let ak = slope_integer(&inst, 1, &l)?;
            let akf = ak.to_f64().unwrap_or(f64::NAN);
            let r = energy_slope(&chart, &l, &grid(&a.samples)?, &spec)?;
            Ok(json!({
                "Ak": akf,
                "slope": r.slope,
                "residual": r.residual,
                "pass": (r.slope - akf).abs() <= 0.01 * akf.abs().max(1.0),
                "table": r.samples.iter().map(|(t, m)| json!({"t": t, "M1": m})).collect::<Vec<_>>(),
            }))
        }
        Check::Path => {
            if a.xi.len() != size {
                return Err(Error::Invalid(format!("--xi needs {size} entries")));
            }
            let xi = traceless(diag(&a.xi));
            let g = GroupElement::random(&mut rng, size, 0.4).matrix().clone();
            let eta = traceless(g - DMatrix::identity(size, size));
            let linear = energy_quadrature(&chart, &LinearPath::new(xi.clone())?, &spec)?;
            let quadratic = energy_quadrature(&chart, &QuadraticPath::new(xi.clone())?, &spec)?;
            let detour = energy_quadrature(&chart, &DetourPath::new(xi, eta)?, &spec)?;
            let spread = [quadratic, detour]
                .iter()
                .map(|v| (v - linear).abs())
                .fold(0.0, f64::max);
            Ok(json!({
                "linear": linear,
                "quadratic": quadratic,
                "detour": detour,
                "maxDifference": spread,
                "pass": spread < 1e-5,
            }))
        }
    }
}

fn run_minimize(a: &MinimizeArgs) -> Result<Value> {
    let inst = load_instance(&a.inst.instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let start = GroupElement::random(&mut rng, inst.ambient() as usize + 1, a.scale);
    let opts = MinimizeOptions {
        max_iters: a.iters,
        step: a.step,
        tol: a.tol,
        ..Default::default()
    };
    let r = minimize_energy(&inst, a.inst.k, &start, &opts)?;
    let first = r.trace.first().map(|t| t.energy);
    let last = r.trace.last().map(|t| t.energy);
    Ok(json!({
        "initialEnergy": first,
        "finalEnergy": last,
        "converged": r.converged,
        "iterations": r.trace.len().saturating_sub(1),
        "sigma": serde_json::from_str::<Value>(&r.sigma.to_json())?,
        "table": to_value(&r.trace),
    }))
}

fn dispatch(cmd: &Command) -> Result<Value> {
    match cmd {
        Command::Catalog(c) => run_catalog(c),
        Command::Degrees(a) => run_degrees(a),
        Command::DeriveChern(a) => run_chern(a),
        Command::Norm(a) => run_norm(a),
        Command::Weight(a) => run_weight(a),
        Command::Energy(a) => run_energy(a),
        Command::Asymptotics(a) => run_asymptotics(a),
        Command::Scan(a) => run_scan(a),
        Command::Numeric(a) => run_numeric(a),
        Command::Minimize(a) => run_minimize(a),
    }
}

fn threads() -> std::result::Result<Option<usize>, String> {
    match std::env::var("KENERGY_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("KENERGY_THREADS must be a positive integer, got {s:?}")),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = if cli.json { Format::Json } else { cli.format };
    let threads = match threads() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global pool is configured once");
    }
    let mut config = obj(to_value(&cli.command));
    config.insert("format".into(), to_value(&format));
    config.insert("threads".into(), json!(threads));

    let (mut doc, code) = match dispatch(&cli.command) {
        Ok(v) => (obj(v), ExitCode::SUCCESS),
        Err(e) => (
            obj(json!({"error": {"kind": e.kind(), "message": e.to_string()}})),
            ExitCode::from(1),
        ),
    };
    doc.insert("config".into(), Value::Object(config));
    emit(doc, format);
    code
}
