//! Accuracy and wall-time benchmark of microsimulation against full
//! simulation.
//!
//! Every case is an optimal code competing against random opponents. For
//! each pair the full-simulation verdict is the ground truth; plain
//! microsimulation (one random channel) and gated microsimulation are scored
//! by how often they agree with it. Pairs run sequentially so wall times are
//! not distorted by contention.

use std::fmt::Write as _;
use std::time::Instant;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::channel::sample_rayleigh_channel;
use crate::code::GeneratorMatrix;
use crate::dataset::random_opponents;
use crate::error::{Error, Result};
use crate::microsim::{microsimulate, ChannelGate, MicrosimConfig, MicrosimStatus};
use crate::rng;
use crate::sim::{compete_full, compete_micro, FullSim, Tier};

const CASES: &str = include_str!("../data/cases.txt");
const TRAINING: &str = include_str!("../data/training_codes.txt");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCode {
    pub name: String,
    pub g: GeneratorMatrix,
}

/// Parses `NAME [a b c d; e f g h]` lines; `#` starts a comment.
pub fn parse_cases(text: &str) -> Result<Vec<NamedCode>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (name, matrix) = l
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::InvalidArgument(format!("case line {l:?} has no matrix")))?;
            Ok(NamedCode {
                name: name.to_string(),
                g: matrix.trim().parse()?,
            })
        })
        .collect()
}

/// The seven published optimal codes used as benchmark cases.
pub fn default_cases() -> Vec<NamedCode> {
    parse_cases(CASES).expect("bundled case file")
}

/// The two reference codes used to generate training data.
pub fn training_codes() -> Vec<NamedCode> {
    parse_cases(TRAINING).expect("bundled training file")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub opponents: usize,
    pub full: FullSim,
    pub micro: MicrosimConfig,
    /// Also re-run the ground truth with the same seed and score it.
    pub sanity: bool,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            opponents: 20,
            full: FullSim::with_iterations(20),
            micro: MicrosimConfig::default(),
            sanity: false,
            seed: 0,
        }
    }
}

/// Outcome of one (case, opponent) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub opponent: GeneratorMatrix,
    pub truth: usize,
    pub truth_tier: Tier,
    pub micro: usize,
    pub micro_mlp: usize,
    pub mlp_status: MicrosimStatus,
    pub mlp_trials: usize,
    pub sanity: Option<usize>,
    pub full_seconds: f64,
    pub micro_mlp_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub name: String,
    pub g: GeneratorMatrix,
    pub accuracy_micro: f64,
    pub accuracy_micro_mlp: f64,
    pub accuracy_improvement_pct: f64,
    pub mean_full_seconds: f64,
    pub mean_micro_mlp_seconds: f64,
    /// Mean gated time over searches that found a channel, if any did.
    pub mean_accepted_seconds: Option<f64>,
    /// Mean gated time over searches that used the whole budget, if any did.
    pub mean_exhausted_seconds: Option<f64>,
    pub time_improvement_pct: f64,
    pub ground_truth_ties: usize,
    pub accepted: usize,
    pub exhausted: usize,
    pub mean_trials: f64,
    pub sanity_accuracy: Option<f64>,
    pub pairs: Vec<PairOutcome>,
}

/// Mean, sample standard deviation and sample variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub s: f64,
    pub s2: f64,
}

impl Stats {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let s2 = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self { mean, s: s2.sqrt(), s2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub accuracy_micro: Stats,
    pub accuracy_micro_mlp: Stats,
    /// Mean of the per-case improvements.
    pub accuracy_improvement_pct: f64,
    pub full_seconds: Stats,
    pub micro_mlp_seconds: Stats,
    pub time_improvement_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub cases: Vec<CaseReport>,
    pub summary: Summary,
}

/// `(new - old) / old * 100`
pub fn accuracy_improvement(old: f64, new: f64) -> f64 {
    (new - old) / old * 100.0
}

/// `(old - new) / old * 100`
pub fn time_improvement(old: f64, new: f64) -> f64 {
    (old - new) / old * 100.0
}

fn run_pair<G: ChannelGate + ?Sized>(
    g: &GeneratorMatrix,
    opponent: &GeneratorMatrix,
    gate: &G,
    cfg: &BenchmarkConfig,
    pair_rng: &mut rng::SimRng,
) -> Result<PairOutcome> {
    let truth_seed = pair_rng.next_u64();
    let mut micro_rng = rng::fork(pair_rng);
    let mut mlp_rng = rng::fork(pair_rng);
    let grid = &cfg.micro.grid;

    let start = Instant::now();
    let truth = compete_full(g, opponent, grid, &cfg.full, &mut rng::seeded(truth_seed))?;
    let full_seconds = start.elapsed().as_secs_f64();

    let h = sample_rayleigh_channel(&mut micro_rng);
    let micro = compete_micro(g, opponent, &h, grid, &mut micro_rng)?.winner;

    let start = Instant::now();
    let gated = microsimulate(g, opponent, gate, &cfg.micro, &mut mlp_rng)?;
    let micro_mlp_seconds = start.elapsed().as_secs_f64();

    let sanity = if cfg.sanity {
        Some(compete_full(g, opponent, grid, &cfg.full, &mut rng::seeded(truth_seed))?.winner())
    } else {
        None
    };

    Ok(PairOutcome {
        opponent: *opponent,
        truth: truth.winner(),
        truth_tier: truth.verdict.tier,
        micro,
        micro_mlp: gated.verdict(),
        mlp_status: gated.status,
        mlp_trials: gated.trials_used,
        sanity,
        full_seconds,
        micro_mlp_seconds,
    })
}

pub fn run_case<G: ChannelGate + ?Sized>(
    case_index: usize,
    case: &NamedCode,
    gate: &G,
    cfg: &BenchmarkConfig,
) -> Result<CaseReport> {
    if cfg.opponents == 0 {
        return Err(Error::InvalidArgument("need at least one opponent".into()));
    }
    let mut case_rng = rng::stream(cfg.seed, case_index as u64);
    let opponents = random_opponents(&case.g, cfg.opponents, &mut case_rng);
    let pair_base = case_rng.next_u64();
    let pairs = opponents
        .iter()
        .enumerate()
        .map(|(k, o)| run_pair(&case.g, o, gate, cfg, &mut rng::stream(pair_base, k as u64)))
        .collect::<Result<Vec<_>>>()?;

    let n = pairs.len() as f64;
    let frac = |f: &dyn Fn(&PairOutcome) -> bool| pairs.iter().filter(|p| f(p)).count() as f64 / n;
    let accuracy_micro = frac(&|p| p.micro == p.truth);
    let accuracy_micro_mlp = frac(&|p| p.micro_mlp == p.truth);
    let mean_full_seconds = pairs.iter().map(|p| p.full_seconds).sum::<f64>() / n;
    let mean_micro_mlp_seconds = pairs.iter().map(|p| p.micro_mlp_seconds).sum::<f64>() / n;
    let accepted = pairs
        .iter()
        .filter(|p| p.mlp_status == MicrosimStatus::Accepted)
        .count();
    let mean_seconds_with = |status: MicrosimStatus| {
        let t: Vec<f64> = pairs
            .iter()
            .filter(|p| p.mlp_status == status)
            .map(|p| p.micro_mlp_seconds)
            .collect();
        (!t.is_empty()).then(|| t.iter().sum::<f64>() / t.len() as f64)
    };
    Ok(CaseReport {
        name: case.name.clone(),
        g: case.g,
        accuracy_micro,
        accuracy_micro_mlp,
        accuracy_improvement_pct: accuracy_improvement(accuracy_micro, accuracy_micro_mlp),
        mean_full_seconds,
        mean_micro_mlp_seconds,
        mean_accepted_seconds: mean_seconds_with(MicrosimStatus::Accepted),
        mean_exhausted_seconds: mean_seconds_with(MicrosimStatus::Exhausted),
        time_improvement_pct: time_improvement(mean_full_seconds, mean_micro_mlp_seconds),
        ground_truth_ties: pairs.iter().filter(|p| p.truth_tier == Tier::Random).count(),
        accepted,
        exhausted: pairs.len() - accepted,
        mean_trials: pairs.iter().map(|p| p.mlp_trials as f64).sum::<f64>() / n,
        sanity_accuracy: cfg.sanity.then(|| frac(&|p| p.sanity == Some(p.truth))),
        pairs,
    })
}

/// Runs every case. Case `i` draws from stream `i` of `cfg.seed`.
pub fn run_benchmark<G: ChannelGate + ?Sized>(
    cases: &[NamedCode],
    gate: &G,
    cfg: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    if cases.is_empty() {
        return Err(Error::InvalidArgument("no benchmark cases".into()));
    }
    let reports = cases
        .iter()
        .enumerate()
        .map(|(i, c)| run_case(i, c, gate, cfg))
        .collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&CaseReport) -> f64| reports.iter().map(f).collect::<Vec<f64>>();
    let mean = |xs: Vec<f64>| xs.iter().sum::<f64>() / xs.len() as f64;
    let summary = Summary {
        accuracy_micro: Stats::of(&col(|c| c.accuracy_micro)),
        accuracy_micro_mlp: Stats::of(&col(|c| c.accuracy_micro_mlp)),
        accuracy_improvement_pct: mean(col(|c| c.accuracy_improvement_pct)),
        full_seconds: Stats::of(&col(|c| c.mean_full_seconds)),
        micro_mlp_seconds: Stats::of(&col(|c| c.mean_micro_mlp_seconds)),
        time_improvement_pct: mean(col(|c| c.time_improvement_pct)),
    };
    Ok(BenchmarkReport {
        config: cfg.clone(),
        cases: reports,
        summary,
    })
}

impl BenchmarkReport {
    /// Accuracy and timing tables in plain text.
    pub fn render_tables(&self) -> String {
        let mut out = String::new();
        let s = &self.summary;
        let _ = writeln!(out, "ACCURACY");
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>14} {:>16}",
            "CASE", "MICRO", "MICRO+MLP", "IMPROVEMENT(%)"
        );
        for c in &self.cases {
            let _ = writeln!(
                out,
                "{:<10} {:>10.4} {:>14.4} {:>16.2}",
                c.name, c.accuracy_micro, c.accuracy_micro_mlp, c.accuracy_improvement_pct
            );
        }
        let _ = writeln!(
            out,
            "{:<10} {:>10.4} {:>14.4} {:>16.2}",
            "MEAN", s.accuracy_micro.mean, s.accuracy_micro_mlp.mean, s.accuracy_improvement_pct
        );
        let _ = writeln!(
            out,
            "{:<10} {:>10.4} {:>14.4} {:>16}",
            "S", s.accuracy_micro.s, s.accuracy_micro_mlp.s, "-"
        );
        let _ = writeln!(
            out,
            "{:<10} {:>10.4} {:>14.4} {:>16}",
            "S^2", s.accuracy_micro.s2, s.accuracy_micro_mlp.s2, "-"
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "TIME");
        let _ = writeln!(
            out,
            "{:<10} {:>14} {:>16} {:>16}",
            "CASE", "SIMULATION(s)", "MICRO+MLP(s)", "IMPROVEMENT(%)"
        );
        for c in &self.cases {
            let _ = writeln!(
                out,
                "{:<10} {:>14.6} {:>16.6} {:>16.2}",
                c.name, c.mean_full_seconds, c.mean_micro_mlp_seconds, c.time_improvement_pct
            );
        }
        let _ = writeln!(
            out,
            "{:<10} {:>14.6} {:>16.6} {:>16.2}",
            "MEAN", s.full_seconds.mean, s.micro_mlp_seconds.mean, s.time_improvement_pct
        );
        let _ = writeln!(
            out,
            "{:<10} {:>14.6} {:>16.6} {:>16}",
            "S", s.full_seconds.s, s.micro_mlp_seconds.s, "-"
        );
        let _ = writeln!(
            out,
            "{:<10} {:>14.6} {:>16.6} {:>16}",
            "S^2", s.full_seconds.s2, s.micro_mlp_seconds.s2, "-"
        );
        let _ = writeln!(out);
        for c in &self.cases {
            let _ = write!(
                out,
                "{}: accepted {}, exhausted {}, mean trials {:.2}, ground-truth ties {}",
                c.name, c.accepted, c.exhausted, c.mean_trials, c.ground_truth_ties
            );
            let secs = |t: Option<f64>| t.map_or("-".to_string(), |t| format!("{t:.6} s"));
            let _ = write!(
                out,
                ", gated time accepted {} / exhausted {}",
                secs(c.mean_accepted_seconds),
                secs(c.mean_exhausted_seconds)
            );
            if let Some(a) = c.sanity_accuracy {
                let _ = write!(out, ", sanity accuracy {a:.4}");
            }
            let _ = writeln!(out);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microsim::ConstantGate;
    use crate::sim::SnrGrid;

    #[test]
    fn bundled_cases() {
        let cases = default_cases();
        assert_eq!(cases.len(), 7);
        assert_eq!(cases[0].name, "BANARJEE");
        assert_eq!(cases[6].g.to_string(), "[0 2 2 3; 2 2 1 2]");
        let train = training_codes();
        assert_eq!(train[1].g.to_string(), "[2 0 1 3; 2 2 0 1]");
        assert!(parse_cases("X [0 0 1]").is_err());
        assert!(parse_cases("ONLYNAME").is_err());
    }

    #[test]
    fn improvement_conventions() {
        assert!((accuracy_improvement(0.58, 0.95) - 63.79).abs() < 0.01);
        assert!((time_improvement(81.3207, 0.4845) - 99.40).abs() < 0.01);
    }

    #[test]
    fn sample_statistics() {
        let s = Stats::of(&[0.58, 0.65, 0.49, 0.66, 0.52, 0.74, 0.50]);
        assert!((s.mean - 0.5914).abs() < 1e-4);
        assert!((s.s - 0.0949).abs() < 1e-4);
        assert!((s.s2 - 0.0090).abs() < 1e-4);
    }

    #[test]
    fn sanity_mode_scores_full_against_itself() {
        let cases = &default_cases()[..1];
        let cfg = BenchmarkConfig {
            opponents: 3,
            full: FullSim {
                iterations: 2,
                frame_bits: 40,
            },
            micro: MicrosimConfig {
                trials: 2,
                grid: SnrGrid::range(0.0, 8.0, 24.0).unwrap(),
            },
            sanity: true,
            seed: 5,
        };
        let r = run_benchmark(cases, &ConstantGate(true), &cfg).unwrap();
        let c = &r.cases[0];
        assert_eq!(c.sanity_accuracy, Some(1.0));
        assert_eq!(c.accepted, 3);
        assert_eq!(c.pairs.len(), 3);
        let table = r.render_tables();
        assert!(table.contains("BANARJEE") && table.contains("MEAN"));
        // improvement columns recompute from their own inputs
        assert_eq!(
            c.accuracy_improvement_pct,
            accuracy_improvement(c.accuracy_micro, c.accuracy_micro_mlp)
        );
        assert_eq!(
            c.time_improvement_pct,
            time_improvement(c.mean_full_seconds, c.mean_micro_mlp_seconds)
        );
    }
}
