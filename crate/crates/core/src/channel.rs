//! Quasi-static flat Rayleigh channel and AWGN for the 2×1 link.
//!
//! Each antenna is scaled by `1/sqrt(2)` so the total transmit energy per
//! symbol period is one and `SNR = 1 / noise_variance`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::code::SymbolStreams;
use crate::error::{Error, Result};

/// Per-antenna amplitude scale, `1/sqrt(2)`.
pub const TX_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Complex gains from each transmit antenna to the single receiver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelMatrix {
    pub h1: Complex64,
    pub h2: Complex64,
}

impl ChannelMatrix {
    pub fn new(h1: Complex64, h2: Complex64) -> Self {
        Self { h1, h2 }
    }

    /// `[Re h1, Im h1, Re h2, Im h2]`
    pub fn to_reals(&self) -> [f64; 4] {
        [self.h1.re, self.h1.im, self.h2.re, self.h2.im]
    }

    pub fn from_reals(r: [f64; 4]) -> Self {
        Self::new(Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3]))
    }
}

/// Circularly-symmetric `CN(0, variance)` sample.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// I.i.d. `CN(0, 1)` gains. The caller holds the result fixed for a frame.
pub fn sample_rayleigh_channel<R: Rng + ?Sized>(rng: &mut R) -> ChannelMatrix {
    ChannelMatrix::new(complex_gaussian(rng, 1.0), complex_gaussian(rng, 1.0))
}

pub fn snr_to_noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub noise_variance: f64,
}

impl SnrPoint {
    pub fn from_db(snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::InvalidArgument(format!("SNR {snr_db} dB is not finite")));
        }
        Ok(Self {
            snr_db,
            noise_variance: snr_to_noise_variance(snr_db),
        })
    }
}

/// Received sequence and the noise realisation that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Received {
    pub y: Vec<Complex64>,
    pub noise: Vec<Complex64>,
}

impl Received {
    /// Mean `|n_t|^2` of the realised noise.
    pub fn noise_power(&self) -> f64 {
        mean_power(&self.noise)
    }
}

pub(crate) fn mean_power(v: &[Complex64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().map(|n| n.norm_sqr()).sum::<f64>() / v.len() as f64
}

/// Noiseless `(h1*x1 + h2*x2) / sqrt(2)`.
pub fn apply_channel(x: &SymbolStreams, h: &ChannelMatrix) -> Result<Vec<Complex64>> {
    let [a, b] = &x.points;
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(&x1, &x2)| (h.h1 * x1 + h.h2 * x2) * TX_SCALE)
        .collect())
}

/// `y = h x + n` with fresh `CN(0, noise_variance)` noise.
pub fn transmit<R: Rng + ?Sized>(x: &SymbolStreams, h: &ChannelMatrix, sp: &SnrPoint, rng: &mut R) -> Result<Received> {
    let clean = apply_channel(x, h)?;
    let noise: Vec<Complex64> = (0..clean.len())
        .map(|_| complex_gaussian(rng, sp.noise_variance))
        .collect();
    let y = clean.iter().zip(&noise).map(|(c, n)| c + n).collect();
    Ok(Received { y, noise })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{encode, BitFrame, GeneratorMatrix};
    use crate::rng::seeded;

    fn streams(n: usize, sym: Complex64) -> SymbolStreams {
        SymbolStreams {
            indices: [vec![0; n], vec![0; n]],
            points: [vec![sym; n], vec![sym; n]],
        }
    }

    #[test]
    fn snr_conversion() {
        assert_eq!(snr_to_noise_variance(0.0), 1.0);
        assert!((snr_to_noise_variance(10.0) - 0.1).abs() < 1e-15);
        assert!((snr_to_noise_variance(20.0) - 0.01).abs() < 1e-15);
        assert!(SnrPoint::from_db(f64::NAN).is_err());
    }

    #[test]
    fn channel_reproducible() {
        assert_eq!(
            sample_rayleigh_channel(&mut seeded(1)),
            sample_rayleigh_channel(&mut seeded(1))
        );
    }

    #[test]
    fn channel_gain_power_is_unit() {
        let mut rng = seeded(2024);
        let n = 10_000;
        let (mut p1, mut p2) = (0.0, 0.0);
        for _ in 0..n {
            let h = sample_rayleigh_channel(&mut rng);
            p1 += h.h1.norm_sqr();
            p2 += h.h2.norm_sqr();
        }
        assert!((p1 / n as f64 - 1.0).abs() < 0.05, "{}", p1 / n as f64);
        assert!((p2 / n as f64 - 1.0).abs() < 0.05, "{}", p2 / n as f64);
    }

    #[test]
    fn channel_components_are_symmetric() {
        let mut rng = seeded(77);
        let samples: Vec<f64> = (0..100_000)
            .flat_map(|_| sample_rayleigh_channel(&mut rng).to_reals())
            .collect();
        for k in 0..4 {
            let xs: Vec<f64> = samples.iter().skip(k).step_by(4).copied().collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            let skew = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n / var.powf(1.5);
            assert!((var - 0.5).abs() < 0.02, "var {var}");
            assert!(skew.abs() < 0.1, "skew {skew}");
        }
    }

    #[test]
    fn noiseless_single_antenna() {
        let g: GeneratorMatrix = "[0 0 2 1; 2 1 0 0]".parse().unwrap();
        let x = encode(&g, &BitFrame::elementary()).unwrap();
        let h = ChannelMatrix::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let y = apply_channel(&x, &h).unwrap();
        for (yt, xt) in y.iter().zip(&x.points[0]) {
            assert!((yt - xt * TX_SCALE).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_streams_give_pure_noise() {
        let x = streams(8, Complex64::new(0.0, 0.0));
        let h = sample_rayleigh_channel(&mut seeded(4));
        let r = transmit(&x, &h, &SnrPoint::from_db(3.0).unwrap(), &mut seeded(5)).unwrap();
        assert_eq!(r.y, r.noise);
    }

    #[test]
    fn noise_variance_matches_snr() {
        let x = streams(100_000, Complex64::new(0.0, 0.0));
        let h = ChannelMatrix::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let r = transmit(&x, &h, &SnrPoint::from_db(10.0).unwrap(), &mut seeded(6)).unwrap();
        let p = r.noise_power();
        assert!((p - 0.1).abs() < 0.005, "{p}");
    }

    #[test]
    fn transmit_is_deterministic_and_checks_lengths() {
        let x = encode(&GeneratorMatrix::zero(), &BitFrame::elementary()).unwrap();
        let h = sample_rayleigh_channel(&mut seeded(8));
        let sp = SnrPoint::from_db(6.0).unwrap();
        assert_eq!(
            transmit(&x, &h, &sp, &mut seeded(9)).unwrap(),
            transmit(&x, &h, &sp, &mut seeded(9)).unwrap()
        );
        let mut bad = x.clone();
        bad.points[1].pop();
        assert!(transmit(&bad, &h, &sp, &mut seeded(9)).is_err());
    }
}
