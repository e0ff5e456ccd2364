//! Multilayer perceptron binary classifier.
//!
//! Architecture `input -> 10 -> 6 -> 5 -> 1`, ReLU hidden layers and a
//! logistic output, trained full-batch on mean binary cross-entropy with
//! L-BFGS. Inputs are z-scored with statistics fitted on the training rows
//! and stored in the model.

pub mod lbfgs;

use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use lbfgs::{LbfgsConfig, Termination};

pub const HIDDEN_LAYERS: [usize; 3] = [10, 6, 5];
pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const FORMAT_NAME: &str = "sttc-mlp";
pub const FORMAT_VERSION: u32 = 1;

/// Rows per parallel chunk in batch evaluation. Fixed so the reduction
/// order, and therefore the result, does not depend on the thread count.
const CHUNK: usize = 256;

/// A labelled training example.
pub trait Example: Sync {
    fn features(&self) -> &[f64];
    fn label(&self) -> u8;
}

impl Example for (Vec<f64>, u8) {
    fn features(&self) -> &[f64] {
        &self.0
    }

    fn label(&self) -> u8 {
        self.1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `outputs × inputs`, row-major.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn inputs(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn outputs(&self) -> usize {
        self.biases.len()
    }
}

/// Per-feature z-score standardisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub fitted: bool,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    fn identity(dim: usize) -> Self {
        Self {
            fitted: false,
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Population statistics; constant features get `std = 1`.
    pub fn fit<E: Example>(rows: &[E], dim: usize) -> Self {
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.features()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r.features()).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 1e-12 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self {
            fitted: true,
            mean,
            std,
        }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub scaler: Scaler,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Layer sizes for the fixed architecture with the given input width.
pub fn layer_sizes(input_dim: usize) -> Vec<usize> {
    let mut sizes = vec![input_dim];
    sizes.extend(HIDDEN_LAYERS);
    sizes.push(1);
    sizes
}

/// Glorot-uniform weights, zero biases, unfitted scaler.
pub fn init_model<R: Rng + ?Sized>(input_dim: usize, rng: &mut R) -> Result<MlpModel> {
    if input_dim == 0 {
        return Err(Error::InvalidArgument("input dimension must be at least 1".into()));
    }
    let sizes = layer_sizes(input_dim);
    let layers = sizes
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            Layer {
                weights: (0..fan_out)
                    .map(|_| (0..fan_in).map(|_| rng.random_range(-bound..bound)).collect())
                    .collect(),
                biases: vec![0.0; fan_out],
            }
        })
        .collect();
    Ok(MlpModel {
        layers,
        scaler: Scaler::identity(input_dim),
    })
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(self.layers.iter().map(Layer::outputs));
        sizes
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.outputs() * (l.inputs() + 1)).sum()
    }

    /// Flattened parameters: per layer, weights row-major then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            l.weights.iter().for_each(|row| p.extend_from_slice(row));
            p.extend_from_slice(&l.biases);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.num_params());
        let mut k = 0;
        for l in &mut self.layers {
            for row in &mut l.weights {
                let n = row.len();
                row.copy_from_slice(&p[k..k + n]);
                k += n;
            }
            let n = l.biases.len();
            l.biases.copy_from_slice(&p[k..k + n]);
            k += n;
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Output logit for an already-scaled input.
    fn logit_scaled(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            a = l
                .weights
                .iter()
                .zip(&l.biases)
                .map(|(row, b)| {
                    let z = b + row.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>();
                    if i < last {
                        z.max(0.0)
                    } else {
                        z
                    }
                })
                .collect();
        }
        a[0]
    }

    /// Probability that the input belongs to class 1.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(sigmoid(self.logit_scaled(&self.scaler.transform(x))))
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        self.predict_with_threshold(x, DEFAULT_THRESHOLD)
    }

    /// 1 iff `forward(x) >= threshold`.
    pub fn predict_with_threshold(&self, x: &[f64], threshold: f64) -> Result<u8> {
        if !self.scaler.fitted {
            return Err(Error::Untrained);
        }
        Ok(u8::from(self.forward(x)? >= threshold))
    }

    /// Mean binary cross-entropy over `rows` (scaled with the stored
    /// scaler) and its gradient in [`MlpModel::params`] order.
    pub fn loss_and_gradient<E: Example>(&self, rows: &[E]) -> Result<(f64, Vec<f64>)> {
        let mut xs = Vec::with_capacity(rows.len());
        for r in rows {
            self.check_dim(r.features())?;
            xs.push(self.scaler.transform(r.features()));
        }
        let ys: Vec<f64> = rows.iter().map(|r| f64::from(r.label())).collect();
        let mut grad = vec![0.0; self.num_params()];
        let loss = batch_loss(&self.layer_sizes(), &self.params(), &xs, &ys, &mut grad);
        Ok((loss, grad))
    }

    pub fn accuracy<E: Example>(&self, rows: &[E], threshold: f64) -> Result<f64> {
        if rows.is_empty() {
            return Ok(0.0);
        }
        let mut hits = 0usize;
        for r in rows {
            if u8::from(self.forward(r.features())? >= threshold) == r.label() {
                hits += 1;
            }
        }
        Ok(hits as f64 / rows.len() as f64)
    }
}

/// Loss and gradient of one chunk, accumulated as sums (not means).
fn chunk_loss(sizes: &[usize], p: &[f64], xs: &[Vec<f64>], ys: &[f64], grad: &mut [f64]) -> f64 {
    let nl = sizes.len() - 1;
    let mut offsets = Vec::with_capacity(nl);
    let mut k = 0;
    for w in sizes.windows(2) {
        offsets.push(k);
        k += w[1] * (w[0] + 1);
    }
    let mut loss = 0.0;
    let mut acts: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
    let mut deltas: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();

    for (x, &y) in xs.iter().zip(ys) {
        acts[0].copy_from_slice(x);
        for l in 0..nl {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let w = &p[offsets[l]..offsets[l] + fan_out * fan_in];
            let b = &p[offsets[l] + fan_out * fan_in..offsets[l] + fan_out * (fan_in + 1)];
            let (prev, next) = acts.split_at_mut(l + 1);
            let input = &prev[l];
            for o in 0..fan_out {
                let z = b[o]
                    + w[o * fan_in..(o + 1) * fan_in]
                        .iter()
                        .zip(input)
                        .map(|(a, b)| a * b)
                        .sum::<f64>();
                next[0][o] = if l + 1 < nl { z.max(0.0) } else { z };
            }
        }
        let z = acts[nl][0];
        loss += softplus(z) - y * z;
        deltas[nl][0] = sigmoid(z) - y;

        for l in (0..nl).rev() {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let off = offsets[l];
            for o in 0..fan_out {
                let d = deltas[l + 1][o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
                for (g, a) in row.iter_mut().zip(&acts[l]) {
                    *g += d * a;
                }
                grad[off + fan_out * fan_in + o] += d;
            }
            if l > 0 {
                let w = &p[off..off + fan_out * fan_in];
                let (lower, upper) = deltas.split_at_mut(l + 1);
                for i in 0..fan_in {
                    // ReLU derivative; the subgradient at 0 is taken as 0
                    lower[l][i] = if acts[l][i] > 0.0 {
                        (0..fan_out).map(|o| upper[0][o] * w[o * fan_in + i]).sum()
                    } else {
                        0.0
                    };
                }
            }
        }
    }
    loss
}

fn batch_loss(sizes: &[usize], p: &[f64], xs: &[Vec<f64>], ys: &[f64], grad: &mut [f64]) -> f64 {
    let n = xs.len().max(1) as f64;
    let parts: Vec<(f64, Vec<f64>)> = xs
        .par_chunks(CHUNK)
        .zip(ys.par_chunks(CHUNK))
        .map(|(xc, yc)| {
            let mut g = vec![0.0; p.len()];
            let l = chunk_loss(sizes, p, xc, yc, &mut g);
            (l, g)
        })
        .collect();
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for (l, g) in parts {
        loss += l;
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    }
    grad.iter_mut().for_each(|g| *g /= n);
    loss / n
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_iter: usize,
    pub history: usize,
    pub grad_tol: f64,
    /// Acceptance threshold used for the reported accuracies.
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            history: 10,
            grad_tol: 1e-6,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: usize,
    pub final_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub converged: bool,
    pub train_rows: usize,
    pub test_rows: usize,
    /// Loss after each accepted L-BFGS step, starting from the initial loss.
    pub loss_history: Vec<f64>,
}

/// Fits the scaler on `train_rows`, then runs L-BFGS from the model's
/// current parameters. `test_rows` may be empty.
pub fn train<E: Example>(
    model: &MlpModel,
    train_rows: &[E],
    test_rows: &[E],
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    if train_rows.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 training rows".into()));
    }
    let positives = train_rows.iter().filter(|r| r.label() == 1).count();
    if positives == 0 || positives == train_rows.len() {
        return Err(Error::SingleClass);
    }
    for r in train_rows.iter().chain(test_rows) {
        model.check_dim(r.features())?;
        if r.label() > 1 {
            return Err(Error::InvalidArgument(format!("label {} is not 0 or 1", r.label())));
        }
    }

    let mut fitted = model.clone();
    fitted.scaler = Scaler::fit(train_rows, model.input_dim());
    let xs: Vec<Vec<f64>> = train_rows
        .iter()
        .map(|r| fitted.scaler.transform(r.features()))
        .collect();
    let ys: Vec<f64> = train_rows.iter().map(|r| f64::from(r.label())).collect();
    let sizes = fitted.layer_sizes();

    let mut params = fitted.params();
    let opt = LbfgsConfig {
        history: cfg.history,
        max_iter: cfg.max_iter,
        grad_tol: cfg.grad_tol,
        ..LbfgsConfig::default()
    };
    let report = lbfgs::minimize(&mut params, |p, g| batch_loss(&sizes, p, &xs, &ys, g), &opt);
    fitted.set_params(&params);
    if fitted.params().iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument(
            "training diverged to non-finite parameters".into(),
        ));
    }

    let train_accuracy = fitted.accuracy(train_rows, cfg.threshold)?;
    let test_accuracy = if test_rows.is_empty() {
        None
    } else {
        Some(fitted.accuracy(test_rows, cfg.threshold)?)
    };
    let report = TrainReport {
        iterations: report.iterations,
        final_loss: report.loss,
        train_accuracy,
        test_accuracy,
        converged: report.termination == Termination::GradientTolerance,
        train_rows: train_rows.len(),
        test_rows: test_rows.len(),
        loss_history: report.loss_history,
    };
    Ok((fitted, report))
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    layer_sizes: Vec<usize>,
    hidden_activation: String,
    output_activation: String,
    scaler: Scaler,
    layers: Vec<Layer>,
}

impl MlpModel {
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            layer_sizes: self.layer_sizes(),
            hidden_activation: "relu".into(),
            output_activation: "sigmoid".into(),
            scaler: self.scaler.clone(),
            layers: self.layers.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let bad = |m: String| Error::ModelFormat(m);
        let file: ModelFile = serde_json::from_str(s).map_err(|e| bad(e.to_string()))?;
        if file.format != FORMAT_NAME || file.version != FORMAT_VERSION {
            return Err(bad(format!(
                "unsupported format {} version {}",
                file.format, file.version
            )));
        }
        if file.hidden_activation != "relu" || file.output_activation != "sigmoid" {
            return Err(bad("unsupported activations".into()));
        }
        let sizes = &file.layer_sizes;
        if sizes.len() != file.layers.len() + 1 || sizes.len() < 2 || *sizes.last().unwrap() != 1 {
            return Err(bad(format!("inconsistent layer sizes {sizes:?}")));
        }
        for (l, w) in file.layers.iter().zip(sizes.windows(2)) {
            if l.biases.len() != w[1] || l.weights.len() != w[1] || l.weights.iter().any(|row| row.len() != w[0]) {
                return Err(bad(format!("layer shape does not match {}x{}", w[1], w[0])));
            }
        }
        if file.scaler.mean.len() != sizes[0] || file.scaler.std.len() != sizes[0] {
            return Err(bad("scaler dimension mismatch".into()));
        }
        if file.scaler.std.iter().any(|s| !(*s > 0.0)) {
            return Err(bad("scaler std must be positive".into()));
        }
        let model = MlpModel {
            layers: file.layers,
            scaler: file.scaler,
        };
        if model.params().iter().chain(&model.scaler.mean).any(|p| !p.is_finite()) {
            return Err(bad("non-finite parameter".into()));
        }
        Ok(model)
    }
}

pub fn save_model(m: &MlpModel, path: &Path) -> Result<()> {
    fs::write(path, m.to_json()?).map_err(|e| Error::Io(path.to_path_buf(), e))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let s = fs::read_to_string(path).map_err(|e| Error::Io(path.to_path_buf(), e))?;
    MlpModel::from_json(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand_distr::{Distribution, StandardNormal};

    fn fixture(rows: usize, dim: usize, seed: u64) -> Vec<(Vec<f64>, u8)> {
        let mut rng = seeded(seed);
        (0..rows)
            .map(|i| {
                let x: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                (x, (i % 2) as u8)
            })
            .collect()
    }

    #[test]
    fn parameter_count() {
        let m = init_model(26, &mut seeded(0)).unwrap();
        assert_eq!(m.layer_sizes(), vec![26, 10, 6, 5, 1]);
        assert_eq!(m.num_params(), 26 * 10 + 10 + 10 * 6 + 6 + 6 * 5 + 5 + 5 + 1);
        assert_eq!(m.num_params(), 377);
    }

    #[test]
    fn init_is_seeded_with_zero_biases() {
        let a = init_model(26, &mut seeded(4)).unwrap();
        assert_eq!(a, init_model(26, &mut seeded(4)).unwrap());
        assert!(a.layers.iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
        for l in &a.layers {
            let bound = (6.0 / (l.inputs() + l.outputs()) as f64).sqrt();
            assert!(l.weights.iter().flatten().all(|w| w.abs() <= bound));
        }
        assert!(init_model(0, &mut seeded(4)).is_err());
    }

    #[test]
    fn zero_model_outputs_one_half() {
        let mut m = init_model(26, &mut seeded(1)).unwrap();
        let zeros = vec![0.0; m.num_params()];
        m.set_params(&zeros);
        assert_eq!(m.forward(&[0.0; 26]).unwrap(), 0.5);
        assert_eq!(m.forward(&[1e6; 26]).unwrap(), 0.5);
        m.scaler.mean = vec![3.0; 26];
        m.scaler.std = vec![0.01; 26];
        assert_eq!(m.forward(&[-7.0; 26]).unwrap(), 0.5);
        assert!(m.forward(&[0.0; 25]).is_err());
    }

    #[test]
    fn predict_threshold_boundary() {
        let mut m = init_model(3, &mut seeded(1)).unwrap();
        let zeros = vec![0.0; m.num_params()];
        m.set_params(&zeros);
        assert!(matches!(m.predict(&[0.0; 3]), Err(Error::Untrained)));
        m.scaler.fitted = true;
        // forward == 0.5 exactly is accepted
        assert_eq!(m.predict(&[0.0; 3]).unwrap(), 1);
        // bias making forward = 0.49
        let last = m.layers.len() - 1;
        m.layers[last].biases[0] = (0.49f64 / 0.51).ln();
        assert!((m.forward(&[0.0; 3]).unwrap() - 0.49).abs() < 1e-12);
        assert_eq!(m.predict(&[0.0; 3]).unwrap(), 0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rows = fixture(10, 26, 42);
        let mut m = init_model(26, &mut seeded(7)).unwrap();
        // non-zero biases so every bias gradient is exercised
        let mut p = m.params();
        let mut rng = seeded(8);
        p.iter_mut().for_each(|v| *v += 0.1 * rng.random_range(-1.0..1.0));
        m.set_params(&p);
        let (_, grad) = m.loss_and_gradient(&rows).unwrap();
        let eps = 1e-5;
        let mut worst = 0.0f64;
        for i in 0..p.len() {
            let mut plus = m.clone();
            let mut q = p.clone();
            q[i] += eps;
            plus.set_params(&q);
            q[i] -= 2.0 * eps;
            let mut minus = m.clone();
            minus.set_params(&q);
            let fd =
                (plus.loss_and_gradient(&rows).unwrap().0 - minus.loss_and_gradient(&rows).unwrap().0) / (2.0 * eps);
            let rel = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-7);
            worst = worst.max(rel);
        }
        assert!(worst < 1e-4, "worst relative error {worst}");
    }

    #[test]
    fn learns_separable_toy_set() {
        let mut rng = seeded(5);
        let rows: Vec<(Vec<f64>, u8)> = (0..200)
            .map(|_| {
                let x: f64 = rng.random_range(-1.0..1.0);
                let y: f64 = rng.random_range(-1.0..1.0);
                // keep a margin around the separating line
                let s = x + 0.5 * y;
                let s = if s.abs() < 0.1 { s.signum() * 0.1 + s } else { s };
                (vec![x * 10.0 + 3.0, y], u8::from(s > 0.0))
            })
            .collect();
        let m = init_model(2, &mut seeded(6)).unwrap();
        let (fitted, report) = train(&m, &rows, &[], &TrainConfig::default()).unwrap();
        assert!(report.train_accuracy >= 0.99, "{report:?}");
        assert!(report.iterations <= 1000);
        assert!(report.loss_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(fitted.scaler.fitted);
    }

    #[test]
    fn training_is_deterministic() {
        let rows = fixture(60, 5, 9);
        let m = init_model(5, &mut seeded(2)).unwrap();
        let cfg = TrainConfig {
            max_iter: 50,
            ..TrainConfig::default()
        };
        let a = train(&m, &rows, &rows[..10], &cfg).unwrap();
        let b = train(&m, &rows, &rows[..10], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_single_class() {
        let rows: Vec<(Vec<f64>, u8)> = (0..10).map(|i| (vec![f64::from(i)], 1)).collect();
        let m = init_model(1, &mut seeded(2)).unwrap();
        assert!(matches!(
            train(&m, &rows, &[], &TrainConfig::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn constant_feature_gets_unit_std() {
        let rows: Vec<(Vec<f64>, u8)> = (0..10).map(|i| (vec![2.0, f64::from(i)], (i % 2) as u8)).collect();
        let s = Scaler::fit(&rows, 2);
        assert_eq!(s.std[0], 1.0);
        assert_eq!(s.mean[0], 2.0);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let rows = fixture(40, 26, 3);
        let m = init_model(26, &mut seeded(3)).unwrap();
        let cfg = TrainConfig {
            max_iter: 20,
            ..TrainConfig::default()
        };
        let (m, _) = train(&m, &rows, &[], &cfg).unwrap();
        let back = MlpModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let probes = fixture(100, 26, 4);
        for (x, _) in &probes {
            assert_eq!(m.forward(x).unwrap().to_bits(), back.forward(x).unwrap().to_bits());
            assert_eq!(m.predict(x).unwrap(), back.predict(x).unwrap());
        }
    }

    #[test]
    fn load_rejects_bad_files() {
        let m = init_model(26, &mut seeded(3)).unwrap();
        let json = m.to_json().unwrap();
        assert!(MlpModel::from_json(&json[..json.len() / 2]).is_err());
        let wrong_version = json.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(
            MlpModel::from_json(&wrong_version),
            Err(Error::ModelFormat(_))
        ));
        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["layer_sizes"][1] = serde_json::json!(11);
        assert!(MlpModel::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let rows = fixture(20, 26, 9);
        let (m, _) = train(
            &init_model(26, &mut seeded(9)).unwrap(),
            &rows,
            &[],
            &TrainConfig::default(),
        )
        .unwrap();
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);

        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() - 10]).unwrap();
        assert!(load_model(&path).is_err());
        assert!(load_model(&dir.path().join("missing.json")).is_err());
        assert!(save_model(&m, &dir.path().join("no/such/dir/m.json")).is_err());
    }
}
