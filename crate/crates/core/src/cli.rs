//! The `hamlab` command line.
//!
//! Every successful command prints one JSON [`RunReport`] on stdout.
//! Exit codes: `decide` returns 0 for YES, 1 for NO and 4 for a promise
//! violation; `verify` returns 1 when a check fails. Errors exit with 2 (bad
//! input), 3 (solver failure) or 5 (dimension cap), with a message on stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::clock::{self, VerifierCircuit};
use crate::error::{HamError, Result};
use crate::ham::{LocalHamiltonian, Representation};
use crate::io::{self, DenseMatrixFile, HamiltonianFile, StateFile};
use crate::oracle::{AdversarialPolicy, Oracle, OracleTranscript, PromiseDecision, PromiseInstance, SpectralOracle, Verdict};
use crate::reductions::{self, QueryTree, TreeMode};
use crate::solvers;
use crate::spectral::{self, DoublingOperator, SpectralConfig};
use crate::verify::{self, Suite};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_PROMISE: i32 = 4;
pub const EXIT_CAP: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "hamlab", version, about = "Local Hamiltonian workbench")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest eigenvalues of a Hamiltonian.
    Spectrum(SpectrumArgs),
    /// Decide a promise problem.
    Decide(DecideArgs),
    /// Build a hardness Hamiltonian.
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// Compile a verifier circuit into a clock Hamiltonian.
    Compile(CompileArgs),
    /// Run a certification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReprArg {
    Auto,
    Dense,
    Sparse,
}

impl From<ReprArg> for Representation {
    fn from(r: ReprArg) -> Self {
        match r {
            ReprArg::Auto => Representation::Auto,
            ReprArg::Dense => Representation::Dense,
            ReprArg::Sparse => Representation::Sparse,
        }
    }
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Degeneracy tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = ReprArg::Auto)]
    representation: ReprArg,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Write the eigenvectors as little-endian (re, im) f64 pairs, one vector after another.
    #[arg(long)]
    vectors: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Problem {
    Lh,
    UniqueLh,
    ExactLh,
    Gap,
    GapDoubled,
    ApproxSim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleArg {
    Strict,
    Adversarial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AnswerArg {
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OperatorArg {
    Sum,
    Product,
}

#[derive(Debug, Args)]
struct DecideArgs {
    #[arg(value_enum)]
    problem: Problem,
    file: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Observable file for approx-sim.
    #[arg(long)]
    observable: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    alpha1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha2: Option<f64>,
    #[arg(long, value_enum, default_value_t = OperatorArg::Sum)]
    operator: OperatorArg,
    #[arg(long, value_enum, default_value_t = OracleArg::Strict)]
    oracle: OracleArg,
    /// Fixed answer of an adversarial oracle; seeded coin flips otherwise.
    #[arg(long, value_enum)]
    adversarial_answer: Option<AnswerArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the oracle transcript as JSON lines.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum ReduceCommand {
    /// Combine two instances into one EXACT-LH instance.
    Dqma {
        #[arg(long)]
        h1: PathBuf,
        #[arg(long)]
        h2: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Query-tree Hamiltonian `H_t` and its observable.
    QueryTree {
        tree: PathBuf,
        /// Level `t`; defaults to the tree depth.
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        permissive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        observable_out: Option<PathBuf>,
    },
    /// Spectral-gap hardness Hamiltonian `H_final`.
    GapHardness {
        tree: PathBuf,
        #[arg(long)]
        permissive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClockArg {
    Abstract,
    Unary,
}

#[derive(Debug, Args)]
struct CompileArgs {
    circuit: PathBuf,
    #[arg(long, value_enum, default_value_t = ClockArg::Abstract)]
    clock: ClockArg,
    /// Scales the `T^6` clock penalty.
    #[arg(long, default_value_t = 1.0)]
    penalty_multiplier: f64,
    /// Witness state file; adds the history state and its propagation residual.
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    cases: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub payload: Value,
    pub transcript: Option<OracleTranscript>,
    pub wall_time_ms: f64,
    pub seed: Option<u64>,
    pub tool_version: String,
}

/// Outcome of one invocation: exit code, stdout, stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(err: &HamError) -> i32 {
    match err {
        HamError::DimensionCap { .. } => EXIT_CAP,
        HamError::NonConvergence { .. } | HamError::DegenerateGround { .. } | HamError::EmptySubspace { .. } => {
            EXIT_SOLVER
        }
        _ => EXIT_SCHEMA,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SCHEMA } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Output {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let start = Instant::now();
    match dispatch(cli.command) {
        Ok((code, mut report)) => {
            report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            Output {
                code,
                stdout: serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
                stderr: String::new(),
            }
        }
        Err(e) => Output {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new(command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        Self { hasher }
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path)?;
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    fn param(&mut self, name: &str, value: impl std::fmt::Debug) {
        self.hasher.update(format!("{name}={value:?};").as_bytes());
    }

    fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

fn report(command: &str, inputs: Inputs, payload: Value, transcript: Option<OracleTranscript>, seed: Option<u64>) -> RunReport {
    RunReport {
        command: command.to_string(),
        inputs_digest: inputs.digest(),
        payload,
        transcript,
        wall_time_ms: 0.0,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn dispatch(command: Command) -> Result<(i32, RunReport)> {
    match command {
        Command::Spectrum(a) => cmd_spectrum(a).map(|r| (0, r)),
        Command::Decide(a) => cmd_decide(a),
        Command::Reduce(r) => cmd_reduce(r).map(|r| (0, r)),
        Command::Compile(a) => cmd_compile(a).map(|r| (0, r)),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("payload serializes")
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<RunReport> {
    let mut inputs = Inputs::new("spectrum");
    let h = io::hamiltonian_from_json(&inputs.read(&a.file)?)?;
    inputs.param("k", a.k);
    inputs.param("tol", a.tol);
    inputs.param("representation", a.representation);
    inputs.param("seed", a.seed);
    let cfg = SpectralConfig {
        representation: a.representation.into(),
        seed: a.seed,
        degeneracy_tol: a.tol,
        ..SpectralConfig::default()
    };
    let k = a.k.min(h.dim()?);
    let spec = spectral::lowest_k_with(&h, k, &cfg)?;
    if let Some(path) = &a.vectors {
        std::fs::write(path, spec.basis_sidecar())?;
    }
    Ok(report("spectrum", inputs, to_value(&spec), None, Some(a.seed)))
}

fn need(name: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| HamError::InvalidParameter(format!("--{name} is required for this problem")))
}

fn decision_exit(v: Verdict) -> i32 {
    match v {
        Verdict::Yes => EXIT_YES,
        Verdict::No => EXIT_NO,
        Verdict::PromiseViolated => EXIT_PROMISE,
    }
}

fn cmd_decide(a: DecideArgs) -> Result<(i32, RunReport)> {
    let mut inputs = Inputs::new("decide");
    let h = io::hamiltonian_from_json(&inputs.read(&a.file)?)?;
    for (name, v) in [
        ("a", a.a),
        ("b", a.b),
        ("epsilon", a.epsilon),
        ("delta", a.delta),
        ("alpha1", a.alpha1),
        ("alpha2", a.alpha2),
    ] {
        inputs.param(name, v);
    }
    inputs.param("problem", a.problem);
    inputs.param("operator", a.operator);
    inputs.param("oracle", a.oracle);
    inputs.param("answer", a.adversarial_answer);
    inputs.param("seed", a.seed);

    let policy = match (a.oracle, a.adversarial_answer) {
        (OracleArg::Strict, _) => AdversarialPolicy::Strict,
        (OracleArg::Adversarial, Some(AnswerArg::Yes)) => AdversarialPolicy::Fixed(true),
        (OracleArg::Adversarial, Some(AnswerArg::No)) => AdversarialPolicy::Fixed(false),
        (OracleArg::Adversarial, None) => AdversarialPolicy::Seeded(a.seed),
    };
    let mut oracle = SpectralOracle::new(policy);
    let operator = match a.operator {
        OperatorArg::Sum => DoublingOperator::Sum,
        OperatorArg::Product => DoublingOperator::Product,
    };
    let decision: PromiseDecision = match a.problem {
        Problem::Lh | Problem::UniqueLh => {
            let (lo, hi) = (need("a", a.a)?, need("b", a.b)?);
            let instance = if a.problem == Problem::Lh {
                PromiseInstance::Lh { hamiltonian: h, a: lo, b: hi }
            } else {
                PromiseInstance::UniqueLh { hamiltonian: h, a: lo, b: hi }
            };
            oracle.record(&instance)?.decision
        }
        Problem::ExactLh => solvers::decide_exact_lh(
            &h,
            need("a", a.a)?,
            need("epsilon", a.epsilon)?,
            need("delta", a.delta)?,
            &mut oracle,
        )?,
        Problem::Gap => solvers::decide_spectral_gap_direct(&h, need("epsilon", a.epsilon)?)?,
        Problem::GapDoubled => solvers::decide_spectral_gap_doubled(&h, need("epsilon", a.epsilon)?, operator, &mut oracle)?,
        Problem::ApproxSim => {
            let path = a
                .observable
                .as_ref()
                .ok_or_else(|| HamError::InvalidParameter("--observable is required for approx-sim".into()))?;
            let obs = io::hamiltonian_from_json(&inputs.read(path)?)?;
            solvers::decide_approx_simulation(
                &h,
                &obs,
                need("alpha1", a.alpha1)?,
                need("alpha2", a.alpha2)?,
                need("epsilon", a.epsilon)?,
                &mut oracle,
            )?
        }
    };
    let transcript = oracle.into_transcript();
    if let Some(path) = &a.transcript {
        std::fs::write(path, transcript.to_jsonl())?;
    }
    let payload = json!({
        "decision": decision.value,
        "queries": transcript.query_count(),
        "witness_info": decision.witness_info,
    });
    Ok((
        decision_exit(decision.value),
        report("decide", inputs, payload, Some(transcript), Some(a.seed)),
    ))
}

fn emit_hamiltonian(h: &LocalHamiltonian, out: &Option<PathBuf>) -> Result<Value> {
    match out {
        Some(path) => {
            std::fs::write(path, io::hamiltonian_to_json(h))?;
            Ok(json!({ "path": path, "n": h.n(), "terms": h.terms().len(), "locality": h.locality() }))
        }
        None => Ok(to_value(&HamiltonianFile::from(h))),
    }
}

fn tree_mode(permissive: bool) -> TreeMode {
    if permissive {
        TreeMode::Permissive
    } else {
        TreeMode::Strict
    }
}

fn cmd_reduce(r: ReduceCommand) -> Result<RunReport> {
    match r {
        ReduceCommand::Dqma { h1, h2, epsilon, out } => {
            let mut inputs = Inputs::new("reduce dqma");
            let h1 = io::hamiltonian_from_json(&inputs.read(&h1)?)?;
            let h2 = io::hamiltonian_from_json(&inputs.read(&h2)?)?;
            inputs.param("epsilon", epsilon);
            let h = reductions::dqma_combine(&h1, &h2, epsilon)?;
            let cert = reductions::dqma_certificate(&h)?;
            let payload = json!({
                "hamiltonian": emit_hamiltonian(&h, &out)?,
                "certificate": cert,
                "exact_lh": { "a": 4.5 * epsilon, "epsilon": epsilon / 2.0, "delta": epsilon },
            });
            Ok(report("reduce dqma", inputs, payload, None, None))
        }
        ReduceCommand::QueryTree {
            tree,
            level,
            permissive,
            out,
            observable_out,
        } => {
            let mut inputs = Inputs::new("reduce query-tree");
            let tree = QueryTree::from_json(&inputs.read(&tree)?, tree_mode(permissive))?;
            let t = level.unwrap_or(tree.depth());
            inputs.param("level", t);
            inputs.param("permissive", permissive);
            let h = reductions::query_tree_hamiltonian(&tree, t)?;
            let observable = reductions::query_tree_observable(&tree)?;
            let cert = reductions::sector_certificate(&tree, t)?;
            let obs_value = match &observable_out {
                Some(path) => {
                    std::fs::write(path, io::hamiltonian_to_json(&observable))?;
                    json!({ "path": path })
                }
                None => to_value(&HamiltonianFile::from(&observable)),
            };
            let payload = json!({
                "hamiltonian": emit_hamiltonian(&h, &out)?,
                "observable": if t == tree.depth() { obs_value } else { Value::Null },
                "machine_output": tree.machine_output()?,
                "certificate": cert,
            });
            Ok(report("reduce query-tree", inputs, payload, None, None))
        }
        ReduceCommand::GapHardness { tree, permissive, out } => {
            let mut inputs = Inputs::new("reduce gap-hardness");
            let tree = QueryTree::from_json(&inputs.read(&tree)?, tree_mode(permissive))?;
            inputs.param("permissive", permissive);
            let h = reductions::gap_hardness_hamiltonian(&tree)?;
            let cert = reductions::gap_hardness_certificate(&tree)?;
            let payload = json!({
                "hamiltonian": emit_hamiltonian(&h, &out)?,
                "certificate": cert,
            });
            Ok(report("reduce gap-hardness", inputs, payload, None, None))
        }
    }
}

fn cmd_compile(a: CompileArgs) -> Result<RunReport> {
    let mut inputs = Inputs::new("compile");
    let circuit = VerifierCircuit::from_json(&inputs.read(&a.circuit)?)?;
    inputs.param("clock", a.clock);
    inputs.param("penalty_multiplier", a.penalty_multiplier);
    let witness = match &a.history {
        Some(path) => {
            let f: StateFile = serde_json::from_str(&inputs.read(path)?)?;
            Some(f.to_vector())
        }
        None => None,
    };
    let abs = clock::compile_abstract(&circuit)?;
    let mut payload = match a.clock {
        ClockArg::Abstract => {
            let total = abs.total();
            if let Some(path) = &a.out {
                std::fs::write(path, serde_json::to_string(&DenseMatrixFile::from(&total))?)?;
            }
            json!({
                "clock": "abstract",
                "dim": abs.dim(),
                "h_in": DenseMatrixFile::from(&abs.h_in),
                "h_out": DenseMatrixFile::from(&abs.h_out),
                "h_prop": DenseMatrixFile::from(&abs.h_prop),
                "total": DenseMatrixFile::from(&total),
            })
        }
        ClockArg::Unary => {
            let unary = clock::compile_unary(&circuit, a.penalty_multiplier)?;
            let total = unary.total()?;
            json!({
                "clock": "unary",
                "n": unary.n(),
                "penalty": unary.penalty,
                "h_in": HamiltonianFile::from(&unary.h_in),
                "h_out": HamiltonianFile::from(&unary.h_out),
                "h_prop": HamiltonianFile::from(&unary.h_prop),
                "h_clock": HamiltonianFile::from(&unary.h_clock),
                "total": emit_hamiltonian(&total, &a.out)?,
            })
        }
    };
    if let Some(w) = witness {
        let hist = clock::history_state(&circuit, &w)?;
        let residual = clock::prop_residual(&abs, &hist);
        let state = match a.clock {
            ClockArg::Abstract => hist,
            ClockArg::Unary => clock::compile_unary(&circuit, a.penalty_multiplier)?.isometry() * hist,
        };
        payload["history"] = json!({
            "state": StateFile::from_vector(&state),
            "prop_residual": residual,
            "acceptance_probability": circuit.acceptance_probability(&w)?,
        });
    }
    Ok(report("compile", inputs, payload, None, None))
}

fn cmd_verify(a: VerifyArgs) -> Result<(i32, RunReport)> {
    let suite: Suite = a.suite.parse()?;
    let mut inputs = Inputs::new("verify");
    inputs.param("suite", suite.name());
    inputs.param("cases", a.cases);
    inputs.param("seed", a.seed);
    let result = verify::run_suite(suite, a.seed, a.cases)?;
    if let Some(path) = &a.csv {
        std::fs::write(path, result.to_csv()?)?;
    }
    let code = if result.passed { 0 } else { 1 };
    Ok((code, report("verify", inputs, to_value(&result), None, Some(a.seed))))
}
