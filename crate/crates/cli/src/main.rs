use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sttc_microsim::benchmark::{default_cases, parse_cases, run_benchmark, BenchmarkConfig, BenchmarkReport};
use sttc_microsim::channel::sample_rayleigh_channel;
use sttc_microsim::dataset::{
    prepare_dataset, random_opponents, read_csv, split_train_test, write_csv, PrepareConfig, FEATURE_DIM,
};
use sttc_microsim::microsim::{microsimulate, ConstantGate, MicrosimConfig, MlpGate};
use sttc_microsim::mlp::{init_model, load_model, save_model, train, TrainConfig, DEFAULT_THRESHOLD};
use sttc_microsim::rng::{self, SimRng};
use sttc_microsim::sim::{
    compete_full, compete_micro, micro_curves, run_ber_curve_full, run_ber_curve_micro, BerCurve, FullSim, FullVerdict,
    SnrGrid,
};
use sttc_microsim::{GeneratorMatrix, MlpModel};

#[derive(Parser)]
#[command(
    name = "sttc",
    version,
    about = "Compare STTC generator matrices by simulation or microsimulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a BER-vs-SNR curve for one generator matrix.
    Simulate(SimulateArgs),
    /// Generate a labelled training dataset for one reference code.
    PrepareData(PrepareArgs),
    /// Train the channel-acceptance MLP on one or more datasets.
    Train(TrainArgs),
    /// Decide a competition between two generator matrices.
    Compete(CompeteArgs),
    /// Accuracy and timing of microsimulation against full simulation.
    Benchmark(BenchmarkArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Full,
    Micro,
    MicroMlp,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// SNR grid in dB as min:step:max.
    #[arg(long, default_value = "0:2:24")]
    snr: SnrGrid,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Generator matrix, e.g. "[0 2 2 3; 2 2 1 2]".
    #[arg(long)]
    g: GeneratorMatrix,
    /// Single iteration on the elementary frame with one channel draw.
    #[arg(long)]
    micro: bool,
    /// Separate seed for the channel draw in micro mode.
    #[arg(long, requires = "micro")]
    channel_seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = 260)]
    frame_bits: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PrepareArgs {
    #[command(flatten)]
    common: Common,
    /// Reference (optimal) generator matrix.
    #[arg(long)]
    g: GeneratorMatrix,
    #[arg(long, default_value_t = 20)]
    opponents: usize,
    /// Micro-competitions per opponent.
    #[arg(long, default_value_t = 20)]
    reps: usize,
    /// Ground-truth simulation iterations.
    #[arg(long, default_value_t = 20)]
    iterations: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset CSV; repeat to concatenate several.
    #[arg(long = "data", required = true)]
    data: Vec<PathBuf>,
    /// Model output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Fraction of rows used for training.
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CompeteArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    g0: GeneratorMatrix,
    #[arg(long)]
    g1: GeneratorMatrix,
    #[arg(long, value_enum, default_value_t = Mode::Full)]
    mode: Mode,
    /// Trained model (required for micro-mlp).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Full-simulation iterations.
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    /// Channel budget for micro-mlp.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Also write the two decisive BER curves as CSV.
    #[arg(long)]
    curves: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    common: Common,
    /// Case file with `NAME [a b c d; e f g h]` lines (defaults to the bundled seven).
    #[arg(long)]
    cases: Option<PathBuf>,
    /// Only run these case names (repeatable).
    #[arg(long = "case")]
    only: Vec<String>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    opponents: usize,
    /// Ground-truth simulation iterations.
    #[arg(long, default_value_t = 20)]
    iterations: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Re-run the ground truth with the same seed and score it too.
    #[arg(long)]
    sanity: bool,
    /// Output format; tables when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<sttc_microsim::Error> for Failure {
    fn from(e: sttc_microsim::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn emit(text: &str, out: Option<&Path>) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Runtime(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn curve_json(c: &BerCurve) -> Value {
    json!({ "snr_db": c.snr_db, "ber": c.ber })
}

fn simulate(a: SimulateArgs) -> CmdResult {
    let mut rng = rng::seeded(a.common.seed);
    let curve = if a.micro {
        let h = match a.channel_seed {
            Some(s) => sample_rayleigh_channel(&mut rng::seeded(s)),
            None => sample_rayleigh_channel(&mut rng),
        };
        run_ber_curve_micro(&a.g, &h, &a.common.snr, &mut rng)?.0
    } else {
        let cfg = FullSim {
            iterations: a.iterations,
            frame_bits: a.frame_bits,
        };
        run_ber_curve_full(&a.g, &a.common.snr, &cfg, &mut rng)?
    };
    let text = match a.format {
        Format::Csv => curve.to_csv(),
        Format::Json => to_json(&curve_json(&curve))?,
    };
    emit(&text, a.out.as_deref())
}

fn prepare_data(a: PrepareArgs) -> CmdResult {
    if a.opponents == 0 || a.reps == 0 {
        return Err(Failure::Usage("--opponents and --reps must be at least 1".into()));
    }
    let mut rng = rng::seeded(a.common.seed);
    let opponents = random_opponents(&a.g, a.opponents, &mut rng);
    let cfg = PrepareConfig {
        reps: a.reps,
        grid: a.common.snr,
        full: FullSim::with_iterations(a.iterations),
    };
    let rows = prepare_dataset(&a.g, &opponents, &cfg, &mut rng)?;
    for (k, (o, chunk)) in opponents.iter().zip(rows.chunks(a.reps)).enumerate() {
        let agree = chunk.iter().filter(|r| r.label == 1).count();
        eprintln!(
            "opponent {}/{} {o}: {agree}/{} micro verdicts agree",
            k + 1,
            opponents.len(),
            chunk.len()
        );
    }
    write_csv(&rows, &a.out)?;
    eprintln!("wrote {} rows to {}", rows.len(), a.out.display());
    Ok(())
}

fn train_cmd(a: TrainArgs) -> CmdResult {
    if !(0.0..1.0).contains(&a.train_fraction) || a.train_fraction == 0.0 {
        return Err(Failure::Usage("--train-fraction must be in (0, 1)".into()));
    }
    let mut rows = Vec::new();
    for p in &a.data {
        rows.extend(read_csv(p)?);
    }
    let mut rng = rng::seeded(a.seed);
    let (train_rows, test_rows) = split_train_test(&rows, a.train_fraction, &mut rng)?;
    let init = init_model(FEATURE_DIM, &mut rng)?;
    let cfg = TrainConfig {
        max_iter: a.max_iter,
        threshold: a.threshold,
        ..TrainConfig::default()
    };
    let (model, report) = train(&init, &train_rows, &test_rows, &cfg)?;
    save_model(&model, &a.out)?;
    emit(&to_json(&report)?, a.report.as_deref())
}

fn load_gate_model(path: Option<&Path>, mode: &str) -> Result<MlpModel, Failure> {
    let p = path.ok_or_else(|| Failure::Usage(format!("--model is required for {mode}")))?;
    Ok(load_model(p)?)
}

fn compete(a: CompeteArgs) -> CmdResult {
    let grid = &a.common.snr;
    let mut rng: SimRng = rng::seeded(a.common.seed);
    let model = match a.mode {
        Mode::MicroMlp => Some(load_gate_model(a.model.as_deref(), "--mode micro-mlp")?),
        _ => None,
    };
    let mode_name = match a.mode {
        Mode::Full => "full",
        Mode::Micro => "micro",
        Mode::MicroMlp => "micro-mlp",
    };

    let start = Instant::now();
    let (winner, tier, status, trials_used, h, curves) = match a.mode {
        Mode::Full => {
            let v = compete_full(&a.g0, &a.g1, grid, &FullSim::with_iterations(a.iterations), &mut rng)?;
            let FullVerdict { verdict, curves, .. } = v;
            (verdict.winner, Some(verdict.tier), "complete", 1, None, Some(curves))
        }
        Mode::Micro => {
            let h = sample_rayleigh_channel(&mut rng);
            let rec = compete_micro(&a.g0, &a.g1, &h, grid, &mut rng)?;
            let curves = micro_curves(&a.g0, &a.g1, &h, grid, &mut rng)?;
            (rec.winner, None, "complete", 1, Some(h), Some(curves))
        }
        Mode::MicroMlp => {
            let gate = MlpGate {
                model: model.as_ref().expect("loaded above"),
                threshold: a.threshold,
            };
            let cfg = MicrosimConfig {
                trials: a.trials,
                grid: grid.clone(),
            };
            let r = microsimulate(&a.g0, &a.g1, &gate, &cfg, &mut rng)?;
            let curves = match &r.representative_channel {
                Some(h) => Some(micro_curves(&a.g0, &a.g1, h, grid, &mut rng)?),
                None => None,
            };
            let status = match r.status {
                sttc_microsim::MicrosimStatus::Accepted => "accepted",
                sttc_microsim::MicrosimStatus::Exhausted => "exhausted",
            };
            (
                r.verdict(),
                None,
                status,
                r.trials_used,
                r.representative_channel,
                curves,
            )
        }
    };
    let elapsed = start.elapsed().as_secs_f64();

    if let (Some(path), Some([c0, c1])) = (a.curves.as_deref(), curves.as_ref()) {
        let mut s = String::from("snr_db,ber_g0,ber_g1\n");
        for ((snr, b0), b1) in c0.snr_db.iter().zip(&c0.ber).zip(&c1.ber) {
            s.push_str(&format!("{snr},{b0},{b1}\n"));
        }
        emit(&s, Some(path))?;
    }

    let winner_g = if winner == 0 { a.g0 } else { a.g1 };
    let text = match a.format {
        Format::Json => {
            let v = json!({
                "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                "seed": a.common.seed,
                "mode": mode_name,
                "g0": a.g0.to_string(),
                "g1": a.g1.to_string(),
                "winner": winner,
                "winner_matrix": winner_g.to_string(),
                "tier": tier.map(|t| t.to_string()),
                "status": status,
                "trials_used": trials_used,
                "elapsed_seconds": elapsed,
                "h_r": h.map(|h| json!({ "h1": [h.h1.re, h.h1.im], "h2": [h.h2.re, h.h2.im] })),
                "curves": curves.as_ref().map(|[c0, c1]| json!([curve_json(c0), curve_json(c1)])),
            });
            to_json(&v)?
        }
        Format::Csv => format!(
            "seed,mode,winner,winner_matrix,status,trials_used,elapsed_seconds\n{},{mode_name},{winner},\"{winner_g}\",{status},{trials_used},{elapsed}\n",
            a.common.seed
        ),
    };
    emit(&text, a.out.as_deref())
}

fn benchmark_csv(r: &BenchmarkReport) -> String {
    let mut s = String::from(
        "case,accuracy_micro,accuracy_micro_mlp,accuracy_improvement_pct,mean_full_seconds,mean_micro_mlp_seconds,time_improvement_pct,ground_truth_ties,accepted,exhausted,mean_trials\n",
    );
    for c in &r.cases {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            c.name,
            c.accuracy_micro,
            c.accuracy_micro_mlp,
            c.accuracy_improvement_pct,
            c.mean_full_seconds,
            c.mean_micro_mlp_seconds,
            c.time_improvement_pct,
            c.ground_truth_ties,
            c.accepted,
            c.exhausted,
            c.mean_trials
        ));
    }
    s
}

fn benchmark(a: BenchmarkArgs) -> CmdResult {
    let mut cases = match &a.cases {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?;
            parse_cases(&text)?
        }
        None => default_cases(),
    };
    if !a.only.is_empty() {
        for name in &a.only {
            if !cases.iter().any(|c| &c.name == name) {
                return Err(Failure::Usage(format!("unknown case {name}")));
            }
        }
        cases.retain(|c| a.only.contains(&c.name));
    }
    let cfg = BenchmarkConfig {
        opponents: a.opponents,
        full: FullSim::with_iterations(a.iterations),
        micro: MicrosimConfig {
            trials: a.trials,
            grid: a.common.snr.clone(),
        },
        sanity: a.sanity,
        seed: a.common.seed,
    };
    // sanity mode may run without a model; the gated column then accepts every channel
    let report = if a.sanity && a.model.is_none() {
        run_benchmark(&cases, &ConstantGate(true), &cfg)?
    } else {
        let model = load_gate_model(a.model.as_deref(), "benchmark")?;
        let gate = MlpGate {
            model: &model,
            threshold: a.threshold,
        };
        run_benchmark(&cases, &gate, &cfg)?
    };
    let text = match a.format {
        None => report.render_tables(),
        Some(Format::Json) => to_json(&report)?,
        Some(Format::Csv) => benchmark_csv(&report),
    };
    emit(&text, a.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::PrepareData(a) => prepare_data(a),
        Command::Train(a) => train_cmd(a),
        Command::Compete(a) => compete(a),
        Command::Benchmark(a) => benchmark(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
