//! BER-vs-SNR curves and head-to-head competitions between two codes.
//!
//! A competition is decided by a three-tier hierarchy over curve metrics:
//! the SNR at which the BER first reaches zero, then the mean BER, then the
//! minimum BER, and finally a fair coin.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, complex_gaussian, sample_rayleigh_channel, transmit, ChannelMatrix, SnrPoint};
use crate::code::{bit_errors, build_trellis, encode_with, viterbi_decode, BitFrame, GeneratorMatrix};
use crate::error::{Error, Result};

/// Frame length used by full simulation (IS-136 slot payload).
pub const DEFAULT_FRAME_BITS: usize = 260;
pub const DEFAULT_FULL_ITERATIONS: usize = 100;
pub const SUBCOMPETITIONS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    points: Vec<f64>,
}

impl SnrGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::SnrGrid("empty grid".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::SnrGrid("non-finite SNR".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::SnrGrid("points must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// Inclusive arithmetic range `min, min+step, ..., max`.
    pub fn range(min: f64, step: f64, max: f64) -> Result<Self> {
        if !(step > 0.0) || !(max >= min) {
            return Err(Error::SnrGrid(format!("bad range {min}:{step}:{max}")));
        }
        let n = ((max - min) / step + 1e-9).floor() as usize + 1;
        Self::new((0..n).map(|i| min + i as f64 * step).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.points.last().expect("non-empty grid")
    }

    /// Spacing of the last two points (2 dB for a single-point grid).
    pub fn step(&self) -> f64 {
        match self.points.len() {
            0 | 1 => 2.0,
            n => self.points[n - 1] - self.points[n - 2],
        }
    }

    /// Finite stand-in for "BER never reached zero": one step past the grid.
    pub fn zero_sentinel(&self) -> f64 {
        self.max() + self.step()
    }

    pub fn snr_points(&self) -> Result<Vec<SnrPoint>> {
        self.points.iter().map(|&p| SnrPoint::from_db(p)).collect()
    }
}

impl Default for SnrGrid {
    fn default() -> Self {
        Self::range(0.0, 2.0, 24.0).expect("static grid")
    }
}

impl FromStr for SnrGrid {
    type Err = Error;

    /// `min:step:max`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::SnrGrid(format!("expected min:step:max, got {s:?}")))?;
        match parts[..] {
            [min, step, max] => Self::range(min, step, max),
            _ => Err(Error::SnrGrid(format!("expected min:step:max, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub snr_db: Vec<f64>,
    pub ber: Vec<f64>,
}

impl BerCurve {
    pub fn new(grid: &SnrGrid, ber: Vec<f64>) -> Result<Self> {
        if ber.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: ber.len(),
            });
        }
        if ber.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::InvalidArgument("BER outside [0, 1]".into()));
        }
        Ok(Self {
            snr_db: grid.points().to_vec(),
            ber,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr_db,ber\n");
        for (s, b) in self.snr_db.iter().zip(&self.ber) {
            out.push_str(&format!("{s},{b}\n"));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    /// First grid SNR with zero BER; `+inf` when never reached.
    pub ber_zero: f64,
    pub ber_ave: f64,
    pub ber_min: f64,
}

pub fn curve_metrics(c: &BerCurve) -> MetricTriple {
    let ber_zero = c
        .snr_db
        .iter()
        .zip(&c.ber)
        .find(|(_, &b)| b == 0.0)
        .map_or(f64::INFINITY, |(&s, _)| s);
    let ber_ave = c.ber.iter().sum::<f64>() / c.ber.len() as f64;
    let ber_min = c.ber.iter().copied().fold(f64::INFINITY, f64::min);
    MetricTriple {
        ber_zero,
        ber_ave,
        ber_min,
    }
}

/// Which tier of the hierarchy decided a comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    BerZero,
    BerAve,
    BerMin,
    Random,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::BerZero => "ber_zero",
            Tier::BerAve => "ber_ave",
            Tier::BerMin => "ber_min",
            Tier::Random => "random",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub winner: usize,
    pub tier: Tier,
}

/// Lexicographic comparison; smaller wins at each tier.
pub fn hierarchy_compare<R: Rng + ?Sized>(m0: &MetricTriple, m1: &MetricTriple, rng: &mut R) -> Verdict {
    let tiers = [
        (m0.ber_zero, m1.ber_zero, Tier::BerZero),
        (m0.ber_ave, m1.ber_ave, Tier::BerAve),
        (m0.ber_min, m1.ber_min, Tier::BerMin),
    ];
    for (a, b, tier) in tiers {
        if a != b {
            return Verdict {
                winner: usize::from(b < a),
                tier,
            };
        }
    }
    Verdict {
        winner: usize::from(rng.random_bool(0.5)),
        tier: Tier::Random,
    }
}

/// Mode of binary votes. Panics on an even-length or empty input.
pub fn majority_vote(votes: &[usize]) -> usize {
    assert!(votes.len() % 2 == 1, "majority vote needs an odd number of votes");
    let ones = votes.iter().filter(|&&v| v == 1).count();
    usize::from(2 * ones > votes.len())
}

/// One noisy pass of a frame at every grid point over a fixed channel.
fn single_pass<R: Rng + ?Sized>(
    g: &GeneratorMatrix,
    frame: &BitFrame,
    counted_bits: usize,
    h: &ChannelMatrix,
    grid: &SnrGrid,
    rng: &mut R,
) -> Result<(BerCurve, f64)> {
    let trellis = build_trellis(g);
    let x = encode_with(&trellis, frame);
    let mut ber = Vec::with_capacity(grid.len());
    let mut noise_sum = 0.0;
    let mut noise_count = 0usize;
    for sp in grid.snr_points()? {
        let rx = transmit(&x, h, &sp, rng)?;
        noise_sum += rx.noise.iter().map(|n| n.norm_sqr()).sum::<f64>();
        noise_count += rx.noise.len();
        let decoded = viterbi_decode(&trellis, &rx.y, h)?;
        let errs = bit_errors(&frame.bits()[..counted_bits], &decoded.frame.bits()[..counted_bits]);
        ber.push(errs as f64 / counted_bits as f64);
    }
    Ok((BerCurve::new(grid, ber)?, noise_sum / noise_count as f64))
}

/// Single-iteration curve of the elementary frame over a fixed channel.
///
/// Returns the curve and the mean `|n_t|^2` over every noise sample drawn.
pub fn run_ber_curve_micro<R: Rng + ?Sized>(
    g: &GeneratorMatrix,
    h: &ChannelMatrix,
    grid: &SnrGrid,
    rng: &mut R,
) -> Result<(BerCurve, f64)> {
    let u = BitFrame::elementary();
    single_pass(g, &u, u.len(), h, grid, rng)
}

/// Single-iteration curves of both codes on the same channel, one after the
/// other.
pub fn micro_curves<R: Rng + ?Sized>(
    g0: &GeneratorMatrix,
    g1: &GeneratorMatrix,
    h: &ChannelMatrix,
    grid: &SnrGrid,
    rng: &mut R,
) -> Result<[BerCurve; 2]> {
    let c0 = run_ber_curve_micro(g0, h, grid, rng)?.0;
    let c1 = run_ber_curve_micro(g1, h, grid, rng)?.0;
    Ok([c0, c1])
}

/// Settings for the many-iteration Monte-Carlo baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullSim {
    pub iterations: usize,
    pub frame_bits: usize,
}

impl Default for FullSim {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_FULL_ITERATIONS,
            frame_bits: DEFAULT_FRAME_BITS,
        }
    }
}

impl FullSim {
    pub fn with_iterations(iterations: usize) -> Self {
        Self {
            iterations,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        if self.frame_bits == 0 || self.frame_bits % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "frame_bits must be positive and even, got {}",
                self.frame_bits
            )));
        }
        Ok(())
    }
}

/// Monte-Carlo curves for several codes under common randomness.
///
/// Every iteration draws one channel, one random frame (plus a terminating
/// zero pair that is not counted) and one unit-variance noise sequence per
/// SNR point; all codes see exactly those draws.
pub fn run_ber_curves_full<R: Rng + ?Sized>(
    codes: &[GeneratorMatrix],
    grid: &SnrGrid,
    cfg: &FullSim,
    rng: &mut R,
) -> Result<Vec<BerCurve>> {
    cfg.validate()?;
    let trellises: Vec<_> = codes.iter().map(build_trellis).collect();
    let snrs = grid.snr_points()?;
    let mut errors = vec![vec![0usize; grid.len()]; codes.len()];
    let symbols = cfg.frame_bits / 2 + 1;
    let mut unit_noise = vec![Complex64::new(0.0, 0.0); symbols];

    for _ in 0..cfg.iterations {
        let h = sample_rayleigh_channel(rng);
        let frame = BitFrame::random(cfg.frame_bits, rng)?;
        let sent = frame.with_zero_tail(1);
        let clean: Vec<Vec<Complex64>> = trellises
            .iter()
            .map(|t| apply_channel(&encode_with(t, &sent), &h))
            .collect::<Result<_>>()?;
        for (k, sp) in snrs.iter().enumerate() {
            for n in unit_noise.iter_mut() {
                *n = complex_gaussian(rng, 1.0);
            }
            let sigma = sp.noise_variance.sqrt();
            for (c, trellis) in trellises.iter().enumerate() {
                let y: Vec<Complex64> = clean[c].iter().zip(&unit_noise).map(|(s, n)| s + n * sigma).collect();
                let decoded = viterbi_decode(trellis, &y, &h)?;
                errors[c][k] += bit_errors(frame.bits(), &decoded.frame.bits()[..cfg.frame_bits]);
            }
        }
    }

    let total = (cfg.iterations * cfg.frame_bits) as f64;
    errors
        .into_iter()
        .map(|e| BerCurve::new(grid, e.into_iter().map(|n| n as f64 / total).collect()))
        .collect()
}

pub fn run_ber_curve_full<R: Rng + ?Sized>(
    g: &GeneratorMatrix,
    grid: &SnrGrid,
    cfg: &FullSim,
    rng: &mut R,
) -> Result<BerCurve> {
    Ok(run_ber_curves_full(std::slice::from_ref(g), grid, cfg, rng)?.remove(0))
}

/// One subcompetition over a fixed channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subcompetition {
    pub verdict: Verdict,
    pub metrics: [MetricTriple; 2],
    pub noise_power: [f64; 2],
    pub curves: [BerCurve; 2],
}

impl Subcompetition {
    pub fn winner(&self) -> usize {
        self.verdict.winner
    }
}

/// Both codes run the elementary frame over `h`, each with its own noise.
pub fn subcompete<R: Rng + ?Sized>(
    g0: &GeneratorMatrix,
    g1: &GeneratorMatrix,
    h: &ChannelMatrix,
    grid: &SnrGrid,
    rng: &mut R,
) -> Result<Subcompetition> {
    let (c0, n0) = run_ber_curve_micro(g0, h, grid, rng)?;
    let (c1, n1) = run_ber_curve_micro(g1, h, grid, rng)?;
    let metrics = [curve_metrics(&c0), curve_metrics(&c1)];
    let verdict = hierarchy_compare(&metrics[0], &metrics[1], rng);
    Ok(Subcompetition {
        verdict,
        metrics,
        noise_power: [n0, n1],
        curves: [c0, c1],
    })
}

/// Everything observed during one micro-competition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompetitionRecord {
    pub g0: GeneratorMatrix,
    pub g1: GeneratorMatrix,
    pub h: ChannelMatrix,
    pub subcompetitions: Vec<Subcompetition>,
    pub winner: usize,
    pub tally: [usize; 2],
    /// Value substituted for an infinite `ber_zero` when averaging.
    pub zero_sentinel: f64,
}

impl CompetitionRecord {
    /// Assembles a record from finished subcompetitions and votes on it.
    pub fn from_subcompetitions(
        g0: GeneratorMatrix,
        g1: GeneratorMatrix,
        h: ChannelMatrix,
        subcompetitions: Vec<Subcompetition>,
        zero_sentinel: f64,
    ) -> Self {
        let votes: Vec<usize> = subcompetitions.iter().map(Subcompetition::winner).collect();
        let ones = votes.iter().filter(|&&v| v == 1).count();
        let winner = majority_vote(&votes);
        Self {
            g0,
            g1,
            h,
            tally: [votes.len() - ones, ones],
            winner,
            subcompetitions,
            zero_sentinel,
        }
    }

    pub fn votes(&self) -> Vec<usize> {
        self.subcompetitions.iter().map(Subcompetition::winner).collect()
    }

    fn mean_of(&self, f: impl Fn(&Subcompetition) -> f64) -> f64 {
        self.subcompetitions.iter().map(f).sum::<f64>() / self.subcompetitions.len() as f64
    }

    pub fn mean_noise_power(&self, code: usize) -> f64 {
        self.mean_of(|s| s.noise_power[code])
    }

    pub fn mean_ber_ave(&self, code: usize) -> f64 {
        self.mean_of(|s| s.metrics[code].ber_ave)
    }

    /// Mean `ber_zero` with `+inf` mapped to the sentinel.
    pub fn mean_ber_zero(&self, code: usize) -> f64 {
        let cap = self.zero_sentinel;
        self.mean_of(|s| s.metrics[code].ber_zero.min(cap))
    }
}

/// Three subcompetitions on the same channel, fresh noise each, decided by
/// majority vote.
pub fn compete_micro<R: Rng + ?Sized>(
    g0: &GeneratorMatrix,
    g1: &GeneratorMatrix,
    h: &ChannelMatrix,
    grid: &SnrGrid,
    rng: &mut R,
) -> Result<CompetitionRecord> {
    let subs = (0..SUBCOMPETITIONS)
        .map(|_| subcompete(g0, g1, h, grid, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(CompetitionRecord::from_subcompetitions(
        *g0,
        *g1,
        *h,
        subs,
        grid.zero_sentinel(),
    ))
}

/// Ground-truth verdict from averaged Monte-Carlo curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullVerdict {
    pub verdict: Verdict,
    pub metrics: [MetricTriple; 2],
    pub curves: [BerCurve; 2],
}

impl FullVerdict {
    pub fn winner(&self) -> usize {
        self.verdict.winner
    }
}

pub fn compete_full<R: Rng + ?Sized>(
    g0: &GeneratorMatrix,
    g1: &GeneratorMatrix,
    grid: &SnrGrid,
    cfg: &FullSim,
    rng: &mut R,
) -> Result<FullVerdict> {
    let mut curves = run_ber_curves_full(&[*g0, *g1], grid, cfg, rng)?;
    let c1 = curves.pop().expect("two curves");
    let c0 = curves.pop().expect("two curves");
    let metrics = [curve_metrics(&c0), curve_metrics(&c1)];
    let verdict = hierarchy_compare(&metrics[0], &metrics[1], rng);
    Ok(FullVerdict {
        verdict,
        metrics,
        curves: [c0, c1],
    })
}
