//! Command-line front end. Every successful run prints one JSON report
//! `{"version", "command", "inputs", "results"}`; failures print
//! `{"error": {"kind", "message", "position"?}}`.
//!
//! Exit codes: 0 success, 1 domain or input error, 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::channels::{
    analyze_kraus, analyze_superoperator, depolarizing, identity_channel, transpose_superoperator, KrausJson,
    KrausSet,
};
use crate::composite::bell_state;
use crate::dense::{DenseOperator, MatrixJson};
use crate::error::{Error, Result};
use crate::expr::{eval_expr, evaluate, parse_expr};
use crate::gns::gns_construct;
use crate::measurement::pvm_measure;
use crate::pauli::{AlgebraSpec, OperatorJson, OperatorSum, PauliWord};
use crate::shadows::{estimate, pauli_scheme, sample_shadows};
use crate::stabilizer::{build_code, character_on, distance_search, kl_check, weight_one_errors, StabilizerCode};
use crate::states::{bloch_sphere_state, bloch_vector, is_pure, purity, State, StateJson, STATE_TOL};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reported floats are rounded to this many decimals so that reports are
/// reproducible across platforms.
pub const REPORT_DECIMALS: usize = 12;

/// Largest register the shadows demo accepts.
pub const MAX_SHADOW_QUBITS: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "opwb", version, about = "Operator-algebra workbench emitting JSON reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an operator expression to its canonical Pauli sum.
    Paulimul(PaulimulArgs),
    /// State utilities.
    #[command(subcommand)]
    State(StateCommand),
    /// GNS construction for a state.
    Gns(GnsArgs),
    /// Projective measurement of an observable.
    Measure(MeasureArgs),
    /// Channel utilities.
    #[command(subcommand)]
    Channel(ChannelCommand),
    /// Stabilizer code utilities.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Classical-shadow utilities.
    #[command(subcommand)]
    Shadows(ShadowsCommand),
}

#[derive(Debug, Args, Serialize)]
struct PaulimulArgs {
    /// Expression such as "X*Y*Z" or "(I+Z) ox X".
    expr: String,
}

#[derive(Debug, Subcommand)]
enum StateCommand {
    /// Density, purity and Bloch data of a state.
    Report(StateReportArgs),
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
struct StateReportArgs {
    /// Density operator as an expression, e.g. "0.5*(I+Z)".
    #[arg(long)]
    expr: Option<String>,
    /// Polar and azimuthal angles of the vector state
    /// cos(θ/2)|0⟩ + i·sin(θ/2)·e^{iφ}|1⟩.
    #[arg(long, num_args = 2, value_names = ["THETA", "PHI"], allow_negative_numbers = true)]
    bloch: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
struct GnsArgs {
    /// Inline state JSON, a path to one, or a builtin:
    /// zero, one, plus, minus, mixed, bell.
    #[arg(long)]
    state: String,
}

#[derive(Debug, Args, Serialize)]
struct MeasureArgs {
    /// Inline state JSON, a path to one, or a builtin.
    #[arg(long)]
    state: String,
    /// Expression, or inline operator/matrix JSON.
    #[arg(long)]
    observable: String,
}

#[derive(Debug, Subcommand)]
enum ChannelCommand {
    /// Choi matrix, positivity and dilation data.
    Analyze(ChannelArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BuiltinChannel {
    Transpose,
    Identity,
    Depolarizing,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
struct ChannelSource {
    /// Kraus JSON file.
    #[arg(long)]
    kraus: Option<PathBuf>,
    #[arg(long, value_enum)]
    builtin: Option<BuiltinChannel>,
}

#[derive(Debug, Args, Serialize)]
struct ChannelArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: ChannelSource,
    /// Dimension for builtins.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Depolarizing probability.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
}

#[derive(Debug, Subcommand)]
enum CodeCommand {
    /// Knill-Laflamme check, character table and distance.
    Verify(CodeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ErrorSet {
    /// Identity plus every single-site Pauli.
    Weight1,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
struct CodeSource {
    /// rep2, rep3 or five_qubit.
    #[arg(long)]
    name: Option<String>,
    /// Code JSON file.
    #[arg(long)]
    generators: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CodeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: CodeSource,
    #[arg(long, value_enum, default_value_t = ErrorSet::Weight1)]
    errors: ErrorSet,
    /// Letter-weight bound for the distance search; defaults to n.
    #[arg(long)]
    max_weight: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum ShadowsCommand {
    /// Estimate single-site Pauli expectations from sampled shadows.
    Demo(ShadowArgs),
}

#[derive(Debug, Args, Serialize)]
struct ShadowArgs {
    #[arg(long, default_value_t = 1)]
    qubits: usize,
    #[arg(long, default_value_t = 10_000)]
    shots: usize,
    #[arg(long, default_value_t = 10)]
    batches: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Builtin state: zero, one, plus, minus, mixed, bell.
    #[arg(long, default_value = "zero")]
    state: String,
}

/// Code JSON: generators and alphabet as word strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeJson {
    #[serde(default)]
    pub name: Option<String>,
    pub generators: Vec<String>,
    #[serde(default)]
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub checks: Option<Vec<String>>,
    #[serde(default)]
    pub distance: Option<usize>,
}

/// Printed text and process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub stdout: String,
    pub code: i32,
}

/// Parses `argv` (program name first) and runs the command.
pub fn run_command<I, T>(argv: I) -> CommandOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return CommandOutput {
                    stdout: e.to_string(),
                    code: 0,
                };
            }
            let message = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return failure("usage", &message, None, 2);
        }
    };
    let (name, inputs, results) = match dispatch(cli.command) {
        Ok(r) => r,
        Err(e) => return failure(e.kind(), &e.to_string(), e.position(), 1),
    };
    let mut report = json!({
        "version": VERSION,
        "command": name,
        "inputs": inputs,
        "results": results,
    });
    round_floats(&mut report);
    CommandOutput {
        stdout: pretty(&report),
        code: 0,
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn failure(kind: &str, message: &str, position: Option<usize>, code: i32) -> CommandOutput {
    let mut err = Map::new();
    err.insert("kind".into(), json!(kind));
    err.insert("message".into(), json!(message));
    if let Some(p) = position {
        err.insert("position".into(), json!(p));
    }
    CommandOutput {
        stdout: pretty(&json!({ "error": err })),
        code,
    }
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            let r: f64 = format!("{x:.REPORT_DECIMALS$}").parse().expect("formatted float parses");
            // Collapses -0.0 to 0.0.
            *v = json!(r + 0.0);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn to_value<S: Serialize>(s: &S) -> Result<Value> {
    serde_json::to_value(s).map_err(|e| Error::Json(e.to_string()))
}

type Outcome = (&'static str, Value, Value);

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Paulimul(a) => Ok(("paulimul", to_value(&a)?, paulimul(&a)?)),
        Command::State(StateCommand::Report(a)) => Ok(("state report", to_value(&a)?, state_report(&a)?)),
        Command::Gns(a) => Ok(("gns", to_value(&a)?, gns(&a)?)),
        Command::Measure(a) => Ok(("measure", to_value(&a)?, measure(&a)?)),
        Command::Channel(ChannelCommand::Analyze(a)) => Ok(("channel analyze", to_value(&a)?, channel(&a)?)),
        Command::Code(CodeCommand::Verify(a)) => Ok(("code verify", to_value(&a)?, code_verify(&a)?)),
        Command::Shadows(ShadowsCommand::Demo(a)) => Ok(("shadows demo", to_value(&a)?, shadows_demo(&a)?)),
    }
}

fn paulimul(a: &PaulimulArgs) -> Result<Value> {
    let sum = evaluate(&a.expr, None)?;
    let spec = sum.spec();
    Ok(json!({
        "d": spec.d(),
        "n": spec.n(),
        "canonical": sum.to_string(),
        "operator": to_value(&sum.to_json())?,
    }))
}

/// Number of qubits when `dim` is a power of two.
fn qubit_spec(dim: usize) -> Option<AlgebraSpec> {
    if dim.is_power_of_two() && dim >= 2 {
        AlgebraSpec::qubits(dim.trailing_zeros() as usize).ok()
    } else {
        None
    }
}

fn builtin_state(name: &str) -> Option<Result<State>> {
    let q = |b: usize| State::fiducial(b);
    let plus_minus = |sign: f64| {
        let rho = DenseOperator::from_real_rows(&[&[0.5, 0.5 * sign], &[0.5 * sign, 0.5]]);
        State::with_spec(AlgebraSpec::qubits(1)?, rho)
    };
    Some(match name {
        "zero" => q(0),
        "one" => q(1),
        "plus" => plus_minus(1.0),
        "minus" => plus_minus(-1.0),
        "mixed" => State::maximally_mixed(2).and_then(|s| s.attach_spec(AlgebraSpec::qubits(1)?)),
        "bell" => bell_state(),
        _ => return None,
    })
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Unsupported(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
}

/// Builtin name, inline JSON or a file holding state JSON.
fn load_state(arg: &str) -> Result<State> {
    if let Some(s) = builtin_state(arg) {
        return s;
    }
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else if Path::new(arg).is_file() {
        read_file(Path::new(arg))?
    } else {
        return Err(Error::UnknownName(arg.to_string()));
    };
    let state = State::from_json(&parse_json::<StateJson>(&text)?)?;
    match qubit_spec(state.dim()) {
        Some(spec) => state.attach_spec(spec),
        None => Ok(state),
    }
}

fn state_summary(state: &State) -> Result<Value> {
    let mut out = json!({
        "dim": state.dim(),
        "density": to_value(&state.density().to_json())?,
        "trace": state.density().trace().re,
        "purity": purity(state),
        "pure": is_pure(state, STATE_TOL),
    });
    if state.dim() == 2 {
        let r = bloch_vector(state)?;
        out["bloch_vector"] = json!(r);
        out["bloch_length"] = json!((r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt());
    }
    Ok(out)
}

fn state_report(a: &StateReportArgs) -> Result<Value> {
    if let Some(text) = &a.expr {
        let sum = evaluate(text, None)?;
        let state = State::with_spec(sum.spec(), sum.to_dense()?)?;
        return state_summary(&state);
    }
    let angles = a.bloch.as_deref().unwrap_or_default();
    let (theta, phi) = (angles[0], angles[1]);
    let state = bloch_sphere_state(theta, phi)?;
    let mut out = state_summary(&state)?;
    let r = bloch_vector(&state)?;
    // The factor i in the amplitude rotates the azimuth by π/2.
    out["azimuth"] = json!(r[1].atan2(r[0]));
    out["convention"] = json!("amplitude i*e^{i*phi}: azimuth = phi + pi/2");
    Ok(out)
}

/// Single-site `X`, `Y`, `Z` words for every site of `spec`.
fn single_site_words(spec: AlgebraSpec) -> Result<Vec<PauliWord>> {
    let n = spec.n();
    let mut words = Vec::with_capacity(3 * n);
    for site in 0..n {
        for letter in ['X', 'Y', 'Z'] {
            let s: String = (0..n).map(|k| if k == site { letter } else { 'I' }).collect();
            words.push(PauliWord::from_letters(&s)?);
        }
    }
    Ok(words)
}

fn gns(a: &GnsArgs) -> Result<Value> {
    let state = load_state(&a.state)?;
    let space = gns_construct(&state)?;
    let named: Vec<(String, DenseOperator)> = match state.spec() {
        Some(spec) if spec.d() == 2 => single_site_words(spec)?
            .into_iter()
            .map(|w| Ok((w.label(), w.to_dense()?)))
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    to_value(&space.report(&named)?)
}

fn load_observable(arg: &str, state: &State) -> Result<DenseOperator> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        if let Ok(op) = serde_json::from_str::<OperatorJson>(trimmed) {
            return OperatorSum::from_json(&op)?.to_dense();
        }
        return DenseOperator::from_json(&parse_json::<MatrixJson>(trimmed)?);
    }
    let spec = state
        .spec()
        .or_else(|| qubit_spec(state.dim()))
        .ok_or_else(|| Error::Unsupported(format!("no qubit algebra for dimension {}", state.dim())))?;
    eval_expr(&parse_expr(arg)?, Some(spec))?.to_dense()
}

fn measure(a: &MeasureArgs) -> Result<Value> {
    let state = load_state(&a.state)?;
    let lambda = load_observable(&a.observable, &state)?;
    let out = pvm_measure(&state, &lambda)?;
    let records = out
        .records
        .iter()
        .map(|r| {
            Ok(json!({
                "outcome": r.outcome,
                "probability": r.probability,
                "post_state": r.post_state.as_ref().map(|s| to_value(&s.to_json())).transpose()?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mean: f64 = out.records.iter().map(|r| r.outcome * r.probability).sum();
    Ok(json!({
        "records": records,
        "expectation": mean,
        "unobserved": to_value(&out.unobserved.to_json())?,
    }))
}

fn channel(a: &ChannelArgs) -> Result<Value> {
    let analysis = match (a.source.builtin, &a.source.kraus) {
        (Some(BuiltinChannel::Transpose), _) => analyze_superoperator(&transpose_superoperator(a.dim), a.dim, a.dim)?,
        (Some(BuiltinChannel::Identity), _) => analyze_kraus(&identity_channel(a.dim)?)?,
        (Some(BuiltinChannel::Depolarizing), _) => analyze_kraus(&depolarizing(a.dim, a.p)?)?,
        (None, Some(path)) => analyze_kraus(&KrausSet::from_json(&parse_json::<KrausJson>(&read_file(path)?)?)?)?,
        (None, None) => return Err(Error::Empty("no channel given".into())),
    };
    to_value(&analysis)
}

fn words(labels: &[String]) -> Result<Vec<PauliWord>> {
    labels.iter().map(|s| PauliWord::from_letters(s)).collect()
}

fn load_code(a: &CodeArgs) -> Result<StabilizerCode> {
    match (&a.source.name, &a.source.generators) {
        (Some(name), _) => build_code(name),
        (None, Some(path)) => {
            let cj: CodeJson = parse_json(&read_file(path)?)?;
            let checks = cj.checks.as_deref().map(words).transpose()?;
            StabilizerCode::new(
                cj.name.as_deref().unwrap_or("custom"),
                &words(&cj.generators)?,
                &words(&cj.alphabet)?,
                checks,
                cj.distance,
            )
        }
        (None, None) => Err(Error::Empty("no code given".into())),
    }
}

fn code_verify(a: &CodeArgs) -> Result<Value> {
    let code = load_code(a)?;
    let spec = code.group().spec();
    let errors = match a.errors {
        ErrorSet::Weight1 => weight_one_errors(spec)?,
    };
    let dense: Vec<DenseOperator> = errors.iter().map(PauliWord::to_dense).collect::<Result<_>>()?;
    let kl = kl_check(&code, &dense)?;
    let table = errors
        .iter()
        .map(|e| {
            let ch = character_on(e, code.checks())?;
            Ok(json!({
                "error": e.label(),
                "signs": ch.signs(),
                "phases": ch.phases(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let bound = a.max_weight.unwrap_or(code.n());
    Ok(json!({
        "code": {
            "name": code.name(),
            "n": code.n(),
            "generators": code.group().generators().iter().map(PauliWord::label).collect::<Vec<_>>(),
            "checks": code.checks().iter().map(PauliWord::label).collect::<Vec<_>>(),
            "alphabet": code.alphabet().iter().map(PauliWord::label).collect::<Vec<_>>(),
        },
        "group_order": code.group().order(),
        "code_dimension": code.projector().trace().re.round() as usize,
        "kl_pass": kl.pass,
        "kl_scalar": kl.scalar,
        "nu_positive": kl.nu_positive,
        "kl_max_residual": kl.max_residual,
        "nu": to_value(&kl.nu.to_json())?,
        "character_table": table,
        "distance": to_value(&distance_search(&code, bound)?)?,
    }))
}

fn shadows_demo(a: &ShadowArgs) -> Result<Value> {
    if a.qubits == 0 || a.qubits > MAX_SHADOW_QUBITS {
        return Err(Error::Domain(format!("qubits must lie in 1..={MAX_SHADOW_QUBITS}")));
    }
    let base = builtin_state(&a.state).ok_or_else(|| Error::UnknownName(a.state.clone()))??;
    let state = match base.dim() {
        d if d == 1 << a.qubits => base,
        2 => {
            // Product of copies of the single-qubit builtin.
            let mut rho = base.density().clone();
            for _ in 1..a.qubits {
                rho = rho.kron(base.density())?;
            }
            State::with_spec(AlgebraSpec::qubits(a.qubits)?, rho)?
        }
        d => {
            return Err(Error::DimensionMismatch {
                expected: 1 << a.qubits,
                found: d,
            })
        }
    };
    let spec = AlgebraSpec::qubits(a.qubits)?;
    let observables = single_site_words(spec)?;
    let dense: Vec<DenseOperator> = observables.iter().map(PauliWord::to_dense).collect::<Result<_>>()?;
    let scheme = pauli_scheme(a.qubits)?;
    let shadows = sample_shadows(&scheme, &state, a.shots, a.seed)?;
    let estimates = estimate(&shadows, &dense, a.batches)?;
    let exact: Vec<f64> = dense.iter().map(|o| state.expect(o).map(|c| c.re)).collect::<Result<_>>()?;
    let errors: Vec<f64> = estimates.iter().zip(&exact).map(|(e, x)| (e - x).abs()).collect();
    Ok(json!({
        "observables": observables.iter().map(PauliWord::label).collect::<Vec<_>>(),
        "estimates": estimates,
        "exact_values": exact,
        "errors": errors,
        "max_error": errors.iter().cloned().fold(0.0, f64::max),
        "seed": a.seed,
    }))
}
