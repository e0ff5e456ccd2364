//! Feature extraction and labelled training data for the channel gate.
//!
//! A row describes one micro-competition: both generator matrices, the
//! channel, and per-code averages over the three subcompetitions of noise
//! power, mean BER and zero-BER SNR. The label is 1 when the micro verdict
//! agrees with the full-simulation verdict for the same pair.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::sample_rayleigh_channel;
use crate::code::{random_generator_matrix, GeneratorMatrix};
use crate::error::{Error, Result};
use crate::mlp::Example;
use crate::rng::{self, SimRng};
use crate::sim::{compete_full, compete_micro, CompetitionRecord, FullSim, SnrGrid, SUBCOMPETITIONS};

pub const FEATURE_DIM: usize = 26;

pub const CSV_HEADER: [&str; FEATURE_DIM + 1] = [
    "g0_0", "g0_1", "g0_2", "g0_3", "g0_4", "g0_5", "g0_6", "g0_7", "g1_0", "g1_1", "g1_2", "g1_3", "g1_4", "g1_5",
    "g1_6", "g1_7", "h_re1", "h_im1", "h_re2", "h_im2", "n0", "n1", "b0", "b1", "z0", "z1", "label",
];

/// `[g0 (8), g1 (8), Re/Im h1, Re/Im h2, N0, N1, B0, B1, Z0, Z1]`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub features: FeatureVector,
    pub label: u8,
}

impl Example for LabeledRow {
    fn features(&self) -> &[f64] {
        &self.features.0
    }

    fn label(&self) -> u8 {
        self.label
    }
}

pub fn extract_features(rec: &CompetitionRecord) -> Result<FeatureVector> {
    if rec.subcompetitions.len() != SUBCOMPETITIONS {
        return Err(Error::IncompleteRecord(rec.subcompetitions.len()));
    }
    let mut f = [0.0; FEATURE_DIM];
    for (i, e) in rec.g0.entries().iter().chain(rec.g1.entries().iter()).enumerate() {
        f[i] = f64::from(*e);
    }
    f[16..20].copy_from_slice(&rec.h.to_reals());
    f[20] = rec.mean_noise_power(0);
    f[21] = rec.mean_noise_power(1);
    f[22] = rec.mean_ber_ave(0);
    f[23] = rec.mean_ber_ave(1);
    f[24] = rec.mean_ber_zero(0);
    f[25] = rec.mean_ber_zero(1);
    Ok(FeatureVector(f))
}

/// `n` distinct uniformly random matrices, none equal to `exclude`.
pub fn random_opponents<R: Rng + ?Sized>(exclude: &GeneratorMatrix, n: usize, rng: &mut R) -> Vec<GeneratorMatrix> {
    let mut seen = HashSet::from([*exclude]);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let g = random_generator_matrix(rng);
        if seen.insert(g) {
            out.push(g);
        }
    }
    out
}

/// Settings shared by every opponent in a data-preparation run.
#[derive(Clone, Debug)]
pub struct PrepareConfig {
    pub reps: usize,
    pub grid: SnrGrid,
    pub full: FullSim,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        Self {
            reps: 100,
            grid: SnrGrid::default(),
            full: FullSim::default(),
        }
    }
}

/// Rows for one opponent: the full-simulation verdict once, then `reps`
/// micro-competitions on fresh channels.
pub fn opponent_rows(
    g_opt: &GeneratorMatrix,
    opponent: &GeneratorMatrix,
    cfg: &PrepareConfig,
    rng: &mut SimRng,
) -> Result<Vec<LabeledRow>> {
    let truth = compete_full(g_opt, opponent, &cfg.grid, &cfg.full, rng)?.winner();
    (0..cfg.reps)
        .map(|_| {
            let h = sample_rayleigh_channel(rng);
            let rec = compete_micro(g_opt, opponent, &h, &cfg.grid, rng)?;
            Ok(LabeledRow {
                features: extract_features(&rec)?,
                label: u8::from(rec.winner == truth),
            })
        })
        .collect()
}

/// Labelled rows for `g_opt` against each opponent, `reps` per opponent.
///
/// Each opponent draws from its own stream keyed by one seed taken from
/// `rng`, so the output does not depend on thread scheduling.
pub fn prepare_dataset(
    g_opt: &GeneratorMatrix,
    opponents: &[GeneratorMatrix],
    cfg: &PrepareConfig,
    rng: &mut SimRng,
) -> Result<Vec<LabeledRow>> {
    let mut seen = HashSet::new();
    for o in opponents {
        if o == g_opt || !seen.insert(*o) {
            return Err(Error::InvalidArgument(format!(
                "opponent {o} is duplicated or equal to the reference code"
            )));
        }
    }
    let base = rng.next_u64();
    let per: Vec<Vec<LabeledRow>> = opponents
        .par_iter()
        .enumerate()
        .map(|(k, o)| opponent_rows(g_opt, o, cfg, &mut rng::stream(base, k as u64)))
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Shuffles and splits at `ceil(fraction * n)`.
pub fn split_train_test<T: Clone, R: Rng + ?Sized>(rows: &[T], fraction: f64, rng: &mut R) -> Result<(Vec<T>, Vec<T>)> {
    if rows.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 rows to split, got {}",
            rows.len()
        )));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "split fraction {fraction} outside [0, 1]"
        )));
    }
    let mut shuffled = rows.to_vec();
    shuffled.shuffle(rng);
    // the epsilon keeps 0.7 * 20000 from rounding up to 14001
    let cut = ((fraction * rows.len() as f64) - 1e-9).ceil() as usize;
    let test = shuffled.split_off(cut.min(rows.len()));
    Ok((shuffled, test))
}

pub fn write_csv_to<W: Write>(rows: &[LabeledRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for r in rows {
        let mut rec: Vec<String> = r.features.0.iter().map(|v| v.to_string()).collect();
        rec.push(r.label.to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_csv(rows: &[LabeledRow], path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::Io(path.to_path_buf(), e))?;
    write_csv_to(rows, f)
}

pub fn read_csv_from<R: Read>(r: R, origin: &Path) -> Result<Vec<LabeledRow>> {
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(r);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Ok(Vec::new()),
        Some(h) => h?,
    };
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(parse_err(1, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != CSV_HEADER.len() {
            return Err(parse_err(
                line,
                format!("expected {} columns, found {}", CSV_HEADER.len(), rec.len()),
            ));
        }
        let mut f = [0.0; FEATURE_DIM];
        for (i, field) in rec.iter().take(FEATURE_DIM).enumerate() {
            f[i] = field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("column {}: bad number {field:?}", CSV_HEADER[i])))?;
        }
        let label = match rec[FEATURE_DIM].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(line, format!("label must be 0 or 1, found {other:?}"))),
        };
        rows.push(LabeledRow {
            features: FeatureVector(f),
            label,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<LabeledRow>> {
    let f = File::open(path).map_err(|e| Error::Io(path.to_path_buf(), e))?;
    read_csv_from(f, path)
}
