//! Lazy search for a representative channel.
//!
//! Random channels are tried one at a time. Each trial runs a full
//! micro-competition, and a gate (normally the trained MLP) decides whether
//! the verdict on that channel can be trusted. The first accepted channel
//! ends the search.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_rayleigh_channel, ChannelMatrix};
use crate::code::GeneratorMatrix;
use crate::dataset::{extract_features, FeatureVector, FEATURE_DIM};
use crate::error::{Error, Result};
use crate::mlp::{MlpModel, DEFAULT_THRESHOLD};
use crate::sim::{compete_micro, CompetitionRecord, SnrGrid};

pub const DEFAULT_TRIALS: usize = 100;

/// Accept/reject decision on a micro-competition's features.
pub trait ChannelGate {
    fn input_dim(&self) -> usize;
    fn accept(&self, features: &FeatureVector) -> Result<bool>;
}

/// An MLP with its acceptance threshold.
#[derive(Clone, Debug)]
pub struct MlpGate<'a> {
    pub model: &'a MlpModel,
    pub threshold: f64,
}

impl<'a> MlpGate<'a> {
    pub fn new(model: &'a MlpModel) -> Self {
        Self {
            model,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl ChannelGate for MlpGate<'_> {
    fn input_dim(&self) -> usize {
        self.model.input_dim()
    }

    fn accept(&self, features: &FeatureVector) -> Result<bool> {
        Ok(self.model.predict_with_threshold(features.as_slice(), self.threshold)? == 1)
    }
}

/// Gate with a fixed answer.
#[derive(Clone, Copy, Debug)]
pub struct ConstantGate(pub bool);

impl ChannelGate for ConstantGate {
    fn input_dim(&self) -> usize {
        FEATURE_DIM
    }

    fn accept(&self, _: &FeatureVector) -> Result<bool> {
        Ok(self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicrosimConfig {
    pub trials: usize,
    pub grid: SnrGrid,
}

impl Default for MicrosimConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            grid: SnrGrid::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MicrosimStatus {
    Accepted,
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicrosimResult {
    pub status: MicrosimStatus,
    pub winner: Option<usize>,
    pub representative_channel: Option<ChannelMatrix>,
    pub trials_used: usize,
    /// Accepted winner, or the majority over every trial's winner when the
    /// budget ran out (ties broken by a coin flip).
    pub fallback_winner: usize,
    /// Record of the accepted trial.
    pub record: Option<CompetitionRecord>,
}

impl MicrosimResult {
    /// The verdict to score: the accepted winner or the fallback.
    pub fn verdict(&self) -> usize {
        self.winner.unwrap_or(self.fallback_winner)
    }
}

pub fn microsimulate<G: ChannelGate + ?Sized, R: Rng + ?Sized>(
    g0: &GeneratorMatrix,
    g1: &GeneratorMatrix,
    gate: &G,
    cfg: &MicrosimConfig,
    rng: &mut R,
) -> Result<MicrosimResult> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trial budget must be at least 1".into()));
    }
    if gate.input_dim() != FEATURE_DIM {
        return Err(Error::Dimension {
            expected: gate.input_dim(),
            actual: FEATURE_DIM,
        });
    }
    let mut wins = [0usize; 2];
    for trial in 1..=cfg.trials {
        let h = sample_rayleigh_channel(rng);
        let rec = compete_micro(g0, g1, &h, &cfg.grid, rng)?;
        let features = extract_features(&rec)?;
        if gate.accept(&features)? {
            return Ok(MicrosimResult {
                status: MicrosimStatus::Accepted,
                winner: Some(rec.winner),
                representative_channel: Some(h),
                trials_used: trial,
                fallback_winner: rec.winner,
                record: Some(rec),
            });
        }
        wins[rec.winner] += 1;
    }
    let fallback_winner = match wins[0].cmp(&wins[1]) {
        std::cmp::Ordering::Greater => 0,
        std::cmp::Ordering::Less => 1,
        std::cmp::Ordering::Equal => usize::from(rng.random_bool(0.5)),
    };
    Ok(MicrosimResult {
        status: MicrosimStatus::Exhausted,
        winner: None,
        representative_channel: None,
        trials_used: cfg.trials,
        fallback_winner,
        record: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::init_model;
    use crate::rng::seeded;

    fn pair() -> (GeneratorMatrix, GeneratorMatrix) {
        (
            "[0 2 2 3; 2 2 1 2]".parse().unwrap(),
            "[2 2 0 1; 0 0 2 2]".parse().unwrap(),
        )
    }

    #[test]
    fn always_accept_stops_after_one_trial() {
        let (g0, g1) = pair();
        let r = microsimulate(
            &g0,
            &g1,
            &ConstantGate(true),
            &MicrosimConfig::default(),
            &mut seeded(1),
        )
        .unwrap();
        assert_eq!(r.status, MicrosimStatus::Accepted);
        assert_eq!(r.trials_used, 1);
        assert!(r.winner.is_some() && r.representative_channel.is_some());
    }

    #[test]
    fn always_reject_exhausts_budget() {
        let (g0, g1) = pair();
        let r = microsimulate(
            &g0,
            &g1,
            &ConstantGate(false),
            &MicrosimConfig::default(),
            &mut seeded(1),
        )
        .unwrap();
        assert_eq!(r.status, MicrosimStatus::Exhausted);
        assert_eq!(r.trials_used, 100);
        assert!(r.winner.is_none() && r.representative_channel.is_none());
    }

    #[test]
    fn accepted_winner_matches_replayed_competition() {
        let (g0, g1) = pair();
        let cfg = MicrosimConfig::default();
        let r = microsimulate(&g0, &g1, &ConstantGate(true), &cfg, &mut seeded(9)).unwrap();
        let mut rng = seeded(9);
        let h = sample_rayleigh_channel(&mut rng);
        let rec = compete_micro(&g0, &g1, &h, &cfg.grid, &mut rng).unwrap();
        assert_eq!(r.representative_channel, Some(h));
        assert_eq!(r.winner, Some(rec.winner));
    }

    #[test]
    fn deterministic_and_validated() {
        let (g0, g1) = pair();
        let cfg = MicrosimConfig {
            trials: 5,
            ..MicrosimConfig::default()
        };
        let a = microsimulate(&g0, &g1, &ConstantGate(false), &cfg, &mut seeded(4)).unwrap();
        let b = microsimulate(&g0, &g1, &ConstantGate(false), &cfg, &mut seeded(4)).unwrap();
        assert_eq!(a, b);

        // unfitted scaler
        let m = init_model(26, &mut seeded(0)).unwrap();
        assert!(microsimulate(&g0, &g1, &MlpGate::new(&m), &cfg, &mut seeded(4)).is_err());
        // wrong input width
        let mut m = init_model(10, &mut seeded(0)).unwrap();
        m.scaler.fitted = true;
        assert!(matches!(
            microsimulate(&g0, &g1, &MlpGate::new(&m), &cfg, &mut seeded(4)),
            Err(Error::Dimension { .. })
        ));
        let zero = MicrosimConfig { trials: 0, ..cfg };
        assert!(microsimulate(&g0, &g1, &ConstantGate(true), &zero, &mut seeded(4)).is_err());
    }
}
