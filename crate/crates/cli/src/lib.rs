//! `acornlab` command line: every experiment as a seeded subcommand that
//! emits a deterministic JSON (or CSV) report.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use acornlab::commit::{self, HarnessAdversary, HarnessMode, HarnessParams};
use acornlab::pipeline::{self, SimulationConfig};
use acornlab::qcore::{RandomSource, StateVector};
use acornlab::realitytest::{self, AccessMode};
use acornlab::{acorn, purify, reflect, schurweyl};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "acornlab", version, about = "Seeded experiments on commit-and-reveal query simulation")]
pub struct Cli {
    /// Root seed; every trial derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Add wall_time_ms to the report (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Acorn circuit against the closed-form conditional-sample mixture.
    AcornVerify(AcornArgs),
    /// Approximate-reflection error versus copies, with copy calibration.
    ReflectSweep(ReflectArgs),
    /// Block structure of the Schur transform.
    SchurVerify(SchurArgs),
    /// Purification channel against its mixture formula and sampling.
    PurifyVerify(PurifyArgs),
    /// Copy-based simulation of a query circuit against exact execution.
    PipelineSim(PipelineArgs),
    /// Reality testing experiments.
    Reality(RealityArgs),
    /// EPR commitment experiments.
    Commit(CommitArgs),
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').map(|x| x.trim().parse::<T>().map_err(|_| format!("bad list entry {x:?}"))).collect()
}

#[derive(Debug, Args)]
pub struct AcornArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// θ draws for the Monte Carlo mixture check; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub mc_draws: usize,
    #[arg(long, default_value_t = 200)]
    pub resamples: usize,
}

#[derive(Debug, Args)]
pub struct ReflectArgs {
    #[arg(long, value_parser = parse_list::<f64>, default_value = "0.05")]
    pub delta_list: Vec<Vec<f64>>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, value_parser = parse_list::<usize>, default_value = "16,32,64,128,256")]
    pub ns: Vec<Vec<usize>>,
    #[arg(long, default_value_t = 5)]
    pub instances: usize,
    #[arg(long, default_value_t = reflect::DEFAULT_COPY_CONSTANT)]
    pub c: f64,
}

#[derive(Debug, Args)]
pub struct SchurArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct PurifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 0)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub shape_draws: usize,
    #[arg(long, default_value_t = 200)]
    pub resamples: usize,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Circuit in the LAYOUT/GATE/ORACLE/KEEP text format; defaults to the
    /// FORWARD, H, INVERSE probe on a 4-level ancilla and a qubit.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 200)]
    pub seeds: usize,
    #[arg(long, default_value_t = pipeline::simulate::DEFAULT_C0)]
    pub c0: f64,
    /// Rank of the random target state.
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RealityExperiment {
    /// Phase states against Haar states.
    Distinguish,
    /// Swap test, transpose test and closeness identity on random states.
    Exact,
    /// Optimal copies-only success across dimensions.
    HelstromGap,
    /// Mean of real(ψ) over Haar states.
    HaarMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RealityMode {
    Conjugate,
    Sample,
}

#[derive(Debug, Args)]
pub struct RealityArgs {
    #[arg(long, value_enum, default_value_t = RealityExperiment::Distinguish)]
    pub experiment: RealityExperiment,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = RealityMode::Conjugate)]
    pub mode: RealityMode,
    /// Copies for sample access and the Helstrom sweep.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, value_parser = parse_list::<usize>, default_value = "4,8,16,32")]
    pub dims: Vec<Vec<usize>>,
    /// Haar states for the mean, random states for the exact checks.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommitExperiment {
    Hiding,
    Attack,
    Projector,
    Distinguish,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdversaryArg {
    ConjugateAccess,
    ForwardOnly,
}

#[derive(Debug, Args)]
pub struct CommitArgs {
    #[arg(long, value_enum)]
    pub experiment: CommitExperiment,
    #[arg(long, default_value_t = 32)]
    pub d: usize,
    /// Dimensions for the hiding check.
    #[arg(long, value_parser = parse_list::<usize>, default_value = "2,4,8,16")]
    pub dims: Vec<Vec<usize>>,
    /// Dimensions for the distinguishing-advantage sweep.
    #[arg(long, value_parser = parse_list::<usize>, default_value = "4,8,16,32")]
    pub sweep_dims: Vec<Vec<usize>>,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub t: usize,
    #[arg(long, default_value_t = 50)]
    pub draws: usize,
    #[arg(long, default_value_t = 32)]
    pub ell: usize,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = AdversaryArg::ConjugateAccess)]
    pub adversary: AdversaryArg,
}

#[derive(Debug, Serialize)]
pub struct ExperimentReport {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub results: Vec<Value>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, String> {
    serde_json::to_value(x).map_err(|e| e.to_string())
}

fn first<T: Clone>(v: &[Vec<T>]) -> Vec<T> {
    v.iter().flatten().cloned().collect()
}

fn params(pairs: Vec<(&str, Value)>) -> BTreeMap<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

type Outcome = Result<(BTreeMap<String, Value>, Vec<Value>, bool), String>;

fn run_acorn(a: &AcornArgs, rng: &RandomSource) -> Outcome {
    let report = acorn::verify(a.n, a.d, a.trials, rng).map_err(|e| e.to_string())?;
    let mut pass = report.pass;
    let mut results = vec![to_value(&report)?];
    if a.mc_draws > 0 {
        let mut r = rng.child(u64::MAX);
        let psi = StateVector::from_amplitudes("psi", r.haar_state(a.d).iter().copied().collect()).map_err(|e| e.to_string())?;
        let mc = acorn::monte_carlo_check(&psi, a.n, a.mc_draws, a.resamples, &mut r).map_err(|e| e.to_string())?;
        pass &= mc.pass;
        results.push(json!({ "monte_carlo": to_value(&mc)? }));
    }
    let p = params(vec![
        ("n", json!(a.n)),
        ("d", json!(a.d)),
        ("trials", json!(a.trials)),
        ("mc_draws", json!(a.mc_draws)),
        ("resamples", json!(a.resamples)),
    ]);
    Ok((p, results, pass))
}

fn run_reflect(a: &ReflectArgs, rng: &RandomSource) -> Outcome {
    let (deltas, ns) = (first(&a.delta_list), first(&a.ns));
    let mut results = Vec::new();
    let mut pass = true;
    for &delta in &deltas {
        let s = reflect::sweep(a.d, &ns, a.instances, delta, a.c, rng).map_err(|e| e.to_string())?;
        pass &= s.pass;
        results.push(to_value(&s)?);
    }
    let p = params(vec![
        ("delta_list", json!(deltas)),
        ("d", json!(a.d)),
        ("ns", json!(ns)),
        ("instances", json!(a.instances)),
        ("c", json!(a.c)),
    ]);
    Ok((p, results, pass))
}

fn run_schur(a: &SchurArgs, rng: &RandomSource) -> Outcome {
    let r = schurweyl::verify(a.n, a.d, a.samples, &mut rng.child(0)).map_err(|e| e.to_string())?;
    let p = params(vec![("n", json!(a.n)), ("d", json!(a.d)), ("samples", json!(a.samples))]);
    Ok((p, vec![to_value(&r)?], r.pass))
}

fn run_purify(a: &PurifyArgs, rng: &RandomSource) -> Outcome {
    let opts = purify::VerifyOptions { mc_samples: a.mc_samples, shape_draws: a.shape_draws, resamples: a.resamples };
    let r = purify::verify(a.n, a.d, a.r, &opts, &mut rng.child(0)).map_err(|e| e.to_string())?;
    let p = params(vec![
        ("n", json!(a.n)),
        ("d", json!(a.d)),
        ("r", json!(a.r)),
        ("mc_samples", json!(a.mc_samples)),
        ("shape_draws", json!(a.shape_draws)),
        ("resamples", json!(a.resamples)),
    ]);
    Ok((p, vec![to_value(&r)?], r.pass))
}

fn run_pipeline(a: &PipelineArgs, rng: &RandomSource) -> Outcome {
    let circuit = match &a.circuit {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            pipeline::parse_circuit(&text).map_err(|e| e.to_string())?
        }
        None => pipeline::probe_circuit(4).map_err(|e| e.to_string())?,
    };
    let d = circuit
        .steps()
        .iter()
        .find_map(|s| match s {
            pipeline::Step::Oracle { targets, .. } => targets.last().map(|&b| circuit.layout().dims()[b]),
            _ => None,
        })
        .ok_or("circuit has no oracle calls")?;
    let sigma = purify::random_density(d, a.rank.min(d), &mut rng.child(u64::MAX));
    let input = StateVector::basis(circuit.layout().clone(), 0).map_err(|e| e.to_string())?;
    let cfg = SimulationConfig { c0: a.c0, eps: a.eps };
    let r = pipeline::paired_comparison(&circuit, &input, &sigma, &cfg, a.seeds, rng).map_err(|e| e.to_string())?;
    let p = params(vec![
        ("circuit", json!(pipeline::write_circuit(&circuit))),
        ("eps", json!(a.eps)),
        ("seeds", json!(a.seeds)),
        ("c0", json!(a.c0)),
        ("rank", json!(a.rank)),
    ]);
    Ok((p, vec![to_value(&r)?], r.pass))
}

#[derive(Debug, Serialize)]
struct ExactRealityChecks {
    samples: usize,
    d: usize,
    max_swap_test_error: f64,
    max_transpose_test_error: f64,
    max_closeness_error: f64,
    /// Worst-case chance that the two-shot rule accepts a state with
    /// real(ψ) below the far threshold.
    far_acceptance_bound: f64,
    pass: bool,
}

fn exact_reality(d: usize, samples: usize, rng: &RandomSource) -> Result<ExactRealityChecks, String> {
    let (mut swap, mut trans, mut close) = (0.0f64, 0.0f64, 0.0f64);
    for s in 0..samples {
        let mut r = rng.child(s as u64);
        let psi = r.haar_state(d);
        let real = realitytest::real_measure(&psi);
        let oracle = realitytest::pure_state_oracle(&psi).map_err(|e| e.to_string())?;
        let p0 = realitytest::swap_test_probability(&oracle).map_err(|e| e.to_string())?;
        swap = swap.max((p0 - 0.5 - 0.5 * real).abs());
        let t = realitytest::transpose_test_reality(&oracle).map_err(|e| e.to_string())?;
        trans = trans.max((t - real).abs());
        let c = realitytest::closeness_check(&psi);
        close = close.max((c.max_real_overlap - c.predicted).abs());
    }
    let far = 1.0 - realitytest::two_shot_far_probability(realitytest::FAR_THRESHOLD);
    let tol = realitytest::EXACT_TOLERANCE;
    Ok(ExactRealityChecks {
        samples,
        d,
        max_swap_test_error: swap,
        max_transpose_test_error: trans,
        max_closeness_error: close,
        far_acceptance_bound: far,
        pass: swap <= tol && trans <= tol && close <= tol && far <= 1.0 - realitytest::TESTER_SUCCESS,
    })
}

fn run_reality(a: &RealityArgs, rng: &RandomSource) -> Outcome {
    let mut p = params(vec![("experiment", to_value(&format!("{:?}", a.experiment).to_lowercase())?)]);
    let (results, pass) = match a.experiment {
        RealityExperiment::Distinguish => {
            let mode = match a.mode {
                RealityMode::Conjugate => AccessMode::Conjugate,
                RealityMode::Sample => AccessMode::Sample { copies: a.copies },
            };
            let r = realitytest::phase_vs_haar_experiment(a.d, mode, a.trials, rng).map_err(|e| e.to_string())?;
            let pass = match mode {
                AccessMode::Conjugate => r.success_rate >= realitytest::DISTINGUISHER_SUCCESS,
                AccessMode::Sample { .. } => r.success_rate <= realitytest::SAMPLE_ACCESS_CEILING,
            };
            p.insert("d".into(), json!(a.d));
            p.insert("mode".into(), json!(format!("{:?}", a.mode).to_lowercase()));
            p.insert("copies".into(), json!(a.copies));
            p.insert("trials".into(), json!(a.trials));
            (vec![to_value(&r)?], pass)
        }
        RealityExperiment::Exact => {
            let r = exact_reality(a.d, a.samples, rng)?;
            p.insert("d".into(), json!(a.d));
            p.insert("samples".into(), json!(a.samples));
            let pass = r.pass;
            (vec![to_value(&r)?], pass)
        }
        RealityExperiment::HelstromGap => {
            let dims = first(&a.dims);
            let r = realitytest::helstrom_gap_sweep(&dims, a.copies).map_err(|e| e.to_string())?;
            p.insert("dims".into(), json!(dims));
            p.insert("copies".into(), json!(a.copies));
            let pass = r.monotone;
            (vec![to_value(&r)?], pass)
        }
        RealityExperiment::HaarMean => {
            let r = realitytest::haar_mean_real(a.d, a.samples, rng);
            p.insert("d".into(), json!(a.d));
            p.insert("samples".into(), json!(a.samples));
            let pass = r.within_3sigma_reference;
            (vec![to_value(&r)?], pass)
        }
    };
    Ok((p, results, pass))
}

fn run_commit(a: &CommitArgs, rng: &RandomSource) -> Outcome {
    let mut p = params(vec![("experiment", json!(format!("{:?}", a.experiment).to_lowercase()))]);
    let err = |e: acornlab::Error| e.to_string();
    let (results, pass) = match a.experiment {
        CommitExperiment::Hiding => {
            let dims = first(&a.dims);
            let r = commit::hiding_experiment(&dims, a.samples, rng).map_err(err)?;
            p.insert("dims".into(), json!(dims));
            p.insert("samples".into(), json!(a.samples));
            let pass = r.pass;
            (vec![to_value(&r)?], pass)
        }
        CommitExperiment::Attack => {
            let r = commit::attack_experiment(a.d, a.samples, rng).map_err(err)?;
            p.insert("d".into(), json!(a.d));
            p.insert("samples".into(), json!(a.samples));
            let pass = r.pass;
            (vec![to_value(&r)?], pass)
        }
        CommitExperiment::Projector => {
            let r = commit::projector_experiment(a.d, a.t, a.draws, rng).map_err(err)?;
            p.insert("d".into(), json!(a.d));
            p.insert("t".into(), json!(a.t));
            p.insert("draws".into(), json!(a.draws));
            let pass = r.pass;
            (vec![to_value(&r)?], pass)
        }
        CommitExperiment::Distinguish => {
            let adv = match a.adversary {
                AdversaryArg::ConjugateAccess => HarnessAdversary::ConjugateAccess,
                AdversaryArg::ForwardOnly => HarnessAdversary::ForwardOnly,
            };
            let hp = HarnessParams { d: a.d, ell: a.ell, t: a.t, q: a.q, exact_oracles: false };
            let ind = commit::swap_distinguish_harness(&hp, HarnessMode::Independent, adv, a.trials, rng).map_err(err)?;
            let dims = first(&a.sweep_dims);
            let sweep = commit::advantage_sweep(&dims, a.ell, a.t, a.q, adv, a.trials, rng).map_err(err)?;
            p.insert("d".into(), json!(a.d));
            p.insert("sweep_dims".into(), json!(dims));
            p.insert("ell".into(), json!(a.ell));
            p.insert("t".into(), json!(a.t));
            p.insert("q".into(), json!(a.q));
            p.insert("trials".into(), json!(a.trials));
            p.insert("adversary".into(), to_value(&adv)?);
            let pass = ind.empirical_pass_rate <= INDEPENDENT_PASS_CEILING && sweep.non_increasing_in_d;
            (vec![to_value(&ind)?, to_value(&sweep)?], pass)
        }
    };
    Ok((p, results, pass))
}

/// Ceiling on the pass rate of the final check when the second oracle is
/// independent of the first.
pub const INDEPENDENT_PASS_CEILING: f64 = 0.15;

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::AcornVerify(_) => "acorn-verify",
        Command::ReflectSweep(_) => "reflect-sweep",
        Command::SchurVerify(_) => "schur-verify",
        Command::PurifyVerify(_) => "purify-verify",
        Command::PipelineSim(_) => "pipeline-sim",
        Command::Reality(_) => "reality",
        Command::Commit(_) => "commit",
    }
}

/// Runs the parsed command and builds its report.
pub fn execute(cli: &Cli) -> Result<ExperimentReport, String> {
    let start = Instant::now();
    let rng = RandomSource::new(cli.seed);
    let (params, results, pass) = match &cli.command {
        Command::AcornVerify(a) => run_acorn(a, &rng),
        Command::ReflectSweep(a) => run_reflect(a, &rng),
        Command::SchurVerify(a) => run_schur(a, &rng),
        Command::PurifyVerify(a) => run_purify(a, &rng),
        Command::PipelineSim(a) => run_pipeline(a, &rng),
        Command::Reality(a) => run_reality(a, &rng),
        Command::Commit(a) => run_commit(a, &rng),
    }?;
    Ok(ExperimentReport {
        command: command_name(&cli.command).to_string(),
        params,
        seed: cli.seed,
        results,
        pass,
        wall_time_ms: cli.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, f64, Option<f64>)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                let ci = if matches!(k.as_str(), "success_rate" | "empirical_pass_rate") {
                    m.get("ci95").and_then(Value::as_f64)
                } else {
                    None
                };
                match (x, ci) {
                    (Value::Number(n), Some(c)) => rows.push((key, n.as_f64().unwrap_or(f64::NAN), Some(c))),
                    _ => flatten(&key, x, rows),
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, rows);
            }
        }
        Value::Number(n) => rows.push((prefix.to_string(), n.as_f64().unwrap_or(f64::NAN), None)),
        Value::Bool(b) => rows.push((prefix.to_string(), if *b { 1.0 } else { 0.0 }, None)),
        _ => {}
    }
}

/// Columns `param, metric, value, ci_low, ci_high`; `param` holds the
/// command's parameters as `k=v` pairs.
pub fn to_csv(r: &ExperimentReport) -> String {
    let param = r
        .params
        .iter()
        .filter(|(_, v)| !v.is_string() || v.as_str().is_some_and(|s| !s.contains('\n')))
        .map(|(k, v)| format!("{k}={}", v.to_string().replace('"', "")))
        .collect::<Vec<_>>()
        .join(";");
    let mut out = String::from("param,metric,value,ci_low,ci_high\n");
    for (i, res) in r.results.iter().enumerate() {
        let mut rows = Vec::new();
        flatten(&format!("results[{i}]"), res, &mut rows);
        for (metric, value, ci) in rows {
            let (lo, hi) = ci.map_or((String::new(), String::new()), |c| ((value - c).to_string(), (value + c).to_string()));
            out.push_str(&format!("\"{param}\",{metric},{value},{lo},{hi}\n"));
        }
    }
    out.push_str(&format!("\"{param}\",pass,{},,\n", if r.pass { 1 } else { 0 }));
    out
}

pub fn render(r: &ExperimentReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report values are finite JSON");
            s.push('\n');
            s
        }
        Format::Csv => to_csv(r),
    }
}

/// Parses `argv` (program name first), runs, and writes the report to
/// `--out` or `stdout`. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let text = render(&report, cli.format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                let _ = writeln!(stderr, "error: {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => {
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
