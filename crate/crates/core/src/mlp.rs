//! Dense feed-forward network with rectifier hidden layers, trained by
//! mini-batch Adam. Samples are rows.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Identity output, mean squared error.
    Regression,
    /// Softmax output, cross-entropy against target distributions (one-hot rows).
    Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub task: Task,
    widths: Vec<usize>,
    /// Layer `l` maps width `l` to width `l + 1`; shape `out x in`.
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

/// Parameter-shaped gradient (or Adam moment) storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl Mlp {
    /// He-uniform weights `U(-√(6/fan_in), √(6/fan_in))`, zero biases.
    pub fn init(widths: &[usize], task: Task, seed: u64) -> Result<Mlp> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::InvalidParameter(
                "need at least two positive layer widths".into(),
            ));
        }
        let mut rng = seed::rng(seed, streams::INIT);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            // Row-major fill so the draw order does not depend on storage.
            let mut m = DMatrix::zeros(fan_out, fan_in);
            for r in 0..fan_out {
                for c in 0..fan_in {
                    m[(r, c)] = rng.random_range(-limit..limit);
                }
            }
            weights.push(m);
            biases.push(DVector::zeros(fan_out));
        }
        Ok(Mlp {
            task,
            widths: widths.to_vec(),
            weights,
            biases,
        })
    }

    pub fn from_parts(
        task: Task,
        weights: Vec<DMatrix<f64>>,
        biases: Vec<DVector<f64>>,
    ) -> Result<Mlp> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::InvalidParameter("layer count mismatch".into()));
        }
        let mut widths = vec![weights[0].ncols()];
        for (w, b) in weights.iter().zip(&biases) {
            if w.ncols() != *widths.last().unwrap() || w.nrows() != b.len() {
                return Err(Error::InvalidParameter("incompatible layer shapes".into()));
            }
            widths.push(w.nrows());
        }
        Ok(Mlp {
            task,
            widths,
            weights,
            biases,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn weights(&self) -> &[DMatrix<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[DVector<f64>] {
        &self.biases
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Parameters flattened layer by layer: weights (column-major) then bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b.as_slice());
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.param_count() {
            return Err(Error::LengthMismatch {
                expected: self.param_count(),
                got: p.len(),
            });
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let k = w.len();
            w.as_mut_slice().copy_from_slice(&p[at..at + k]);
            at += k;
            let k = b.len();
            b.as_mut_slice().copy_from_slice(&p[at..at + k]);
            at += k;
        }
        Ok(())
    }

    fn check_input(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.input_width() {
            return Err(Error::LengthMismatch {
                expected: self.input_width(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// Pre-activations of every layer.
    fn pre_activations(&self, x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut zs = Vec::with_capacity(self.weights.len());
        let mut a = x.clone();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = &a * w.transpose();
            for mut row in z.row_iter_mut() {
                row += b.transpose();
            }
            if l + 1 < self.weights.len() {
                a = z.map(relu);
            }
            zs.push(z);
        }
        zs
    }

    /// Predictions; class probabilities for classification.
    pub fn forward(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_input(x)?;
        let z = self.pre_activations(x).pop().expect("at least one layer");
        Ok(match self.task {
            Task::Regression => z,
            Task::Classification => softmax_rows(&z),
        })
    }

    fn check_targets(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<()> {
        self.check_input(x)?;
        if y.nrows() != x.nrows() || y.ncols() != *self.widths.last().unwrap() {
            return Err(Error::InvalidParameter(format!(
                "targets are {}x{}, expected {}x{}",
                y.nrows(),
                y.ncols(),
                x.nrows(),
                self.widths.last().unwrap()
            )));
        }
        Ok(())
    }

    /// Mean squared error or mean cross-entropy.
    pub fn loss(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
        self.check_targets(x, y)?;
        let out = self.forward(x)?;
        Ok(loss_of(self.task, &out, y))
    }

    /// Loss and its gradient by backpropagation.
    pub fn gradients(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(f64, Gradients)> {
        self.check_targets(x, y)?;
        let zs = self.pre_activations(x);
        let last = zs.last().unwrap();
        let rows = x.nrows() as f64;
        let (loss, mut delta) = match self.task {
            Task::Regression => {
                let diff = last - y;
                let scale = 2.0 / (rows * y.ncols() as f64);
                (loss_of(self.task, last, y), diff * scale)
            }
            Task::Classification => {
                let p = softmax_rows(last);
                (loss_of(self.task, &p, y), (p - y) / rows)
            }
        };
        let layers = self.weights.len();
        let mut gw = vec![DMatrix::zeros(0, 0); layers];
        let mut gb = vec![DVector::zeros(0); layers];
        for l in (0..layers).rev() {
            let input = if l == 0 { x.clone() } else { zs[l - 1].map(relu) };
            gw[l] = delta.transpose() * &input;
            gb[l] = delta.row_sum().transpose();
            if l > 0 {
                let mut back = &delta * &self.weights[l];
                back.zip_apply(&zs[l - 1], |d, z| {
                    if z <= 0.0 {
                        *d = 0.0
                    }
                });
                delta = back;
            }
        }
        Ok((
            loss,
            Gradients {
                weights: gw,
                biases: gb,
            },
        ))
    }
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

fn softmax_rows(z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut p = z.clone();
    for mut row in p.row_iter_mut() {
        let m = row.max();
        row.apply(|v| *v = (*v - m).exp());
        let s = row.sum();
        row /= s;
    }
    p
}

fn loss_of(task: Task, out: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    match task {
        Task::Regression => (out - y).map(|d| d * d).sum() / out.len() as f64,
        Task::Classification => {
            let mut total = 0.0;
            for (p, t) in out.iter().zip(y.iter()) {
                if *t != 0.0 {
                    total -= t * p.max(1e-300).ln();
                }
            }
            total / out.nrows() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Stop after this many epochs without validation improvement.
    pub patience: Option<usize>,
    /// Share of rows held out for validation (0 disables).
    pub validation_fraction: f64,
    /// Decoupled decay applied to weights (not biases) each step.
    #[serde(default)]
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            patience: Some(50),
            validation_fraction: 0.1,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub train: f64,
    pub validation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation (or train) loss.
    pub model: Mlp,
    pub initial: EpochLoss,
    pub history: Vec<EpochLoss>,
}

fn select_rows(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), m.ncols(), |r, c| m[(idx[r], c)])
}

/// Mini-batch Adam. Rows are permuted once from the seed to carve out the
/// validation share; each epoch reshuffles the training rows from the same
/// stream.
pub fn train(model: &Mlp, x: &DMatrix<f64>, y: &DMatrix<f64>, cfg: &TrainConfig) -> Result<TrainOutcome> {
    model.check_targets(x, y)?;
    if cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) {
        return Err(Error::InvalidParameter("batch size and learning rate must be > 0".into()));
    }
    if !(0.0..1.0).contains(&cfg.validation_fraction) {
        return Err(Error::InvalidParameter("validation fraction must be in [0, 1)".into()));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("training data must be finite".into()));
    }
    let mut rng = seed::rng(cfg.seed, streams::SHUFFLE);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    order.shuffle(&mut rng);
    let n_val = (cfg.validation_fraction * x.nrows() as f64).round() as usize;
    let n_val = n_val.min(x.nrows().saturating_sub(1));
    let (val_idx, train_idx) = order.split_at(n_val);
    let train_idx = train_idx.to_vec();
    let (xt, yt) = (select_rows(x, &train_idx), select_rows(y, &train_idx));
    let val = (n_val > 0).then(|| (select_rows(x, val_idx), select_rows(y, val_idx)));

    let measure = |m: &Mlp| -> Result<EpochLoss> {
        Ok(EpochLoss {
            train: m.loss(&xt, &yt)?,
            validation: match &val {
                Some((xv, yv)) => Some(m.loss(xv, yv)?),
                None => None,
            },
        })
    };
    let score = |e: &EpochLoss| e.validation.unwrap_or(e.train);

    let mut current = model.clone();
    let initial = measure(&current)?;
    let mut best = current.clone();
    let mut best_score = score(&initial);
    let mut since_best = 0;
    let mut history = Vec::with_capacity(cfg.epochs);

    let zeros = Gradients {
        weights: current.weights.iter().map(|w| w * 0.0).collect(),
        biases: current.biases.iter().map(|b| b * 0.0).collect(),
    };
    let mut m1 = zeros.clone();
    let mut m2 = zeros;
    let mut step = 0i32;

    for epoch in 0..cfg.epochs {
        // Positions into the training subset.
        let mut pos: Vec<usize> = (0..train_idx.len()).collect();
        pos.shuffle(&mut rng);
        for batch in pos.chunks(cfg.batch_size) {
            let xb = select_rows(&xt, batch);
            let yb = select_rows(&yt, batch);
            let (_, g) = current.gradients(&xb, &yb)?;
            step += 1;
            let c1 = 1.0 - cfg.beta1.powi(step);
            let c2 = 1.0 - cfg.beta2.powi(step);
            let lr = cfg.learning_rate;
            let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], decay: f64| {
                for i in 0..p.len() {
                    p[i] -= lr * decay * p[i];
                    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                    p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + cfg.epsilon);
                }
            };
            for l in 0..current.weights.len() {
                update(
                    current.weights[l].as_mut_slice(),
                    g.weights[l].as_slice(),
                    m1.weights[l].as_mut_slice(),
                    m2.weights[l].as_mut_slice(),
                    cfg.weight_decay,
                );
                update(
                    current.biases[l].as_mut_slice(),
                    g.biases[l].as_slice(),
                    m1.biases[l].as_mut_slice(),
                    m2.biases[l].as_mut_slice(),
                    0.0,
                );
            }
        }
        let e = measure(&current)?;
        if !(e.train.is_finite() && e.validation.is_none_or(f64::is_finite)) {
            return Err(Error::Diverged { epoch });
        }
        history.push(e);
        if score(&e) < best_score {
            best_score = score(&e);
            best = current.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience.is_some_and(|p| since_best >= p) {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        model: best,
        initial,
        history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mse,
    R2,
    Accuracy,
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse" => Ok(Metric::Mse),
            "r2" => Ok(Metric::R2),
            "accuracy" => Ok(Metric::Accuracy),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

/// Metric between predictions and targets of equal shape.
pub fn score(pred: &DMatrix<f64>, y: &DMatrix<f64>, metric: Metric) -> Result<f64> {
    if pred.shape() != y.shape() {
        return Err(Error::InvalidParameter(format!(
            "prediction shape {:?} differs from target shape {:?}",
            pred.shape(),
            y.shape()
        )));
    }
    if y.is_empty() {
        return Err(Error::UndefinedMetric("no samples".into()));
    }
    match metric {
        Metric::Mse => Ok((pred - y).map(|d| d * d).sum() / y.len() as f64),
        Metric::R2 => {
            let ss_res = (pred - y).map(|d| d * d).sum();
            let mut ss_tot = 0.0;
            for c in 0..y.ncols() {
                let col = y.column(c);
                let mean = col.mean();
                ss_tot += col.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
            }
            if ss_tot == 0.0 {
                return Err(Error::UndefinedMetric("R² of constant targets".into()));
            }
            Ok(1.0 - ss_res / ss_tot)
        }
        Metric::Accuracy => {
            let argmax = |r: nalgebra::RowDVector<f64>| r.transpose().argmax().0;
            let hits = (0..y.nrows())
                .filter(|&i| {
                    if y.ncols() == 1 {
                        pred[(i, 0)].round() == y[(i, 0)].round()
                    } else {
                        argmax(pred.row(i).into_owned()) == argmax(y.row(i).into_owned())
                    }
                })
                .count();
            Ok(hits as f64 / y.nrows() as f64)
        }
    }
}

/// Runs the model and scores it.
pub fn evaluate(model: &Mlp, x: &DMatrix<f64>, y: &DMatrix<f64>, metric: Metric) -> Result<f64> {
    score(&model.forward(x)?, y, metric)
}

/// Column-wise z-scoring with training statistics; constant columns keep a
/// unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Standardizer {
        let rows = x.nrows().max(1) as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut std = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let m = col.sum() / rows;
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / rows;
            mean.push(m);
            std.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Standardizer { mean, std }
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| (x[(r, c)] - self.mean[c]) / self.std[c])
    }

    pub fn inverse(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| x[(r, c)] * self.std[c] + self.mean[c])
    }
}

/// Standardized inputs, network, and (for regression) standardized targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub features: Standardizer,
    pub targets: Option<Standardizer>,
    pub model: Mlp,
}

impl Pipeline {
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let out = self.model.forward(&self.features.transform(x))?;
        Ok(match &self.targets {
            Some(t) => t.inverse(&out),
            None => out,
        })
    }
}

/// Fits standardizers on `x` (and `y` for regression) and trains a network
/// with the given hidden widths.
pub fn fit_pipeline(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    hidden: &[usize],
    task: Task,
    cfg: &TrainConfig,
) -> Result<(Pipeline, TrainOutcome)> {
    let features = Standardizer::fit(x);
    let xs = features.transform(x);
    let (targets, ys) = match task {
        Task::Regression => {
            let t = Standardizer::fit(y);
            let ys = t.transform(y);
            (Some(t), ys)
        }
        Task::Classification => (None, y.clone()),
    };
    let mut widths = vec![x.ncols()];
    widths.extend_from_slice(hidden);
    widths.push(y.ncols());
    let model = Mlp::init(&widths, task, cfg.seed)?;
    let outcome = train(&model, &xs, &ys, cfg)?;
    let pipeline = Pipeline {
        features,
        targets,
        model: outcome.model.clone(),
    };
    Ok((pipeline, outcome))
}

/// Serialized pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub task: Task,
    pub widths: Vec<usize>,
    /// Per layer, `out x in` weights in row-major order.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub target_mean: Option<Vec<f64>>,
    pub target_std: Option<Vec<f64>>,
    pub config: serde_json::Value,
}

impl Checkpoint {
    pub fn from_pipeline(p: &Pipeline, config: serde_json::Value) -> Checkpoint {
        Checkpoint {
            task: p.model.task,
            widths: p.model.widths.clone(),
            weights: p
                .model
                .weights
                .iter()
                .map(|w| w.transpose().as_slice().to_vec())
                .collect(),
            biases: p.model.biases.iter().map(|b| b.as_slice().to_vec()).collect(),
            feature_mean: p.features.mean.clone(),
            feature_std: p.features.std.clone(),
            target_mean: p.targets.as_ref().map(|t| t.mean.clone()),
            target_std: p.targets.as_ref().map(|t| t.std.clone()),
            config,
        }
    }

    pub fn to_pipeline(&self) -> Result<Pipeline> {
        if self.widths.len() != self.weights.len() + 1 || self.weights.len() != self.biases.len() {
            return Err(Error::InvalidParameter("checkpoint layer counts disagree".into()));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (l, w) in self.weights.iter().enumerate() {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            if w.len() != fan_in * fan_out || self.biases[l].len() != fan_out {
                return Err(Error::InvalidParameter(format!("checkpoint layer {l} has wrong size")));
            }
            weights.push(DMatrix::from_row_slice(fan_out, fan_in, w));
            biases.push(DVector::from_column_slice(&self.biases[l]));
        }
        let targets = match (&self.target_mean, &self.target_std) {
            (Some(m), Some(s)) => Some(Standardizer {
                mean: m.clone(),
                std: s.clone(),
            }),
            _ => None,
        };
        Ok(Pipeline {
            features: Standardizer {
                mean: self.feature_mean.clone(),
                std: self.feature_std.clone(),
            },
            targets,
            model: Mlp::from_parts(self.task, weights, biases)?,
        })
    }
}

/// Splits `0..n` into `folds` validation sets from a seeded permutation;
/// every index lands in exactly one fold.
pub fn kfold_indices(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || folds > n {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= folds <= samples, got {folds} folds for {n} samples"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed, streams::FOLDS));
    let mut out = vec![Vec::new(); folds];
    for (i, idx) in order.into_iter().enumerate() {
        out[i % folds].push(idx);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub fold_mse: Vec<f64>,
    /// Per fold, MSE of predicting the training-fold target mean.
    pub fold_baseline_mse: Vec<f64>,
    pub mean_mse: f64,
    pub mean_baseline_mse: f64,
    /// Per fold, the inner validation loss before training and of the
    /// retained parameters.
    pub fold_validation_loss: Vec<(f64, f64)>,
}

/// K-fold cross-validated regression MSE of [`fit_pipeline`] next to the
/// predict-the-mean baseline.
pub fn cross_validate(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    hidden: &[usize],
    cfg: &TrainConfig,
    folds: usize,
    seed: u64,
) -> Result<CrossValidation> {
    let splits = kfold_indices(x.nrows(), folds, seed)?;
    let results: Vec<Result<(f64, f64, (f64, f64))>> = crate::par::map_indexed(splits.len(), |f| {
        let val = &splits[f];
        let train_idx: Vec<usize> = (0..x.nrows()).filter(|i| val.binary_search(i).is_err()).collect();
        let (xt, yt) = (select_rows(x, &train_idx), select_rows(y, &train_idx));
        let (xv, yv) = (select_rows(x, val), select_rows(y, val));
        let fold_cfg = TrainConfig {
            seed: cfg.seed.wrapping_add(f as u64),
            ..cfg.clone()
        };
        let (pipe, outcome) = fit_pipeline(&xt, &yt, hidden, Task::Regression, &fold_cfg)?;
        let start = outcome.initial.validation.unwrap_or(outcome.initial.train);
        let retained = outcome
            .history
            .iter()
            .map(|e| e.validation.unwrap_or(e.train))
            .fold(start, f64::min);
        let mse = score(&pipe.predict(&xv)?, &yv, Metric::Mse)?;
        let means = yt.row_mean();
        let baseline = DMatrix::from_fn(yv.nrows(), yv.ncols(), |_, c| means[c]);
        Ok((mse, score(&baseline, &yv, Metric::Mse)?, (start, retained)))
    });
    let results: Vec<(f64, f64, (f64, f64))> = results.into_iter().collect::<Result<_>>()?;
    let fold_mse: Vec<f64> = results.iter().map(|r| r.0).collect();
    let fold_baseline_mse: Vec<f64> = results.iter().map(|r| r.1).collect();
    let k = folds as f64;
    Ok(CrossValidation {
        mean_mse: fold_mse.iter().sum::<f64>() / k,
        mean_baseline_mse: fold_baseline_mse.iter().sum::<f64>() / k,
        fold_mse,
        fold_baseline_mse,
        fold_validation_loss: results.iter().map(|r| r.2).collect(),
    })
}
