use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::KennModel;
use super::schema::FeatureSchema;
use super::CooperationRecord;
use crate::error::{CoosError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub hidden_width: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    /// Fraction of records held out for evaluation (0 disables the split).
    pub holdout_fraction: f64,
    /// Step-size growth factor after an accepted step.
    pub growth: f64,
    /// Number of seeded initializations raced for `warmup_iterations`; the
    /// one with the lowest training loss continues for the full budget.
    pub restarts: usize,
    pub warmup_iterations: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            hidden_width: 4,
            iterations: 3000,
            learning_rate: 0.5,
            holdout_fraction: 0.2,
            growth: 1.05,
            restarts: 3,
            warmup_iterations: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_r: f64,
    /// `None` when no records were held out.
    pub holdout_r: Option<f64>,
    pub final_loss: f64,
    pub train_size: usize,
    pub holdout_size: usize,
    /// Training loss after every iteration; non-increasing by construction.
    pub loss_history: Vec<f64>,
}

/// Pearson correlation; 0 when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n == 0 {
        return 0.0;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (x[i] - mx, y[i] - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

fn correlation(model: &KennModel, records: &[CooperationRecord]) -> f64 {
    let pred: Vec<f64> = records.iter().map(|r| model.trace(r).rate).collect();
    let obs: Vec<f64> = records.iter().map(|r| r.rate).collect();
    pearson(&pred, &obs)
}

/// Full-batch gradient descent on mean squared error. A step that increases
/// the loss is rejected and the step size halved; accepted steps grow it by
/// `growth`. Masked parameters never move, so the connectivity mask holds
/// after every step.
pub fn train(
    corpus: &[CooperationRecord],
    schema: &FeatureSchema,
    params: &TrainParams,
    seed: u64,
) -> Result<(KennModel, TrainReport)> {
    if corpus.is_empty() {
        return Err(CoosError::domain("training corpus is empty"));
    }
    for r in corpus {
        r.validate(schema)?;
    }
    if !(0.0..1.0).contains(&params.holdout_fraction) {
        return Err(CoosError::domain("holdout fraction must be in [0,1)"));
    }
    if !(params.learning_rate > 0.0) {
        return Err(CoosError::domain("learning rate must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut rng);
    let n_hold = (corpus.len() as f64 * params.holdout_fraction).floor() as usize;
    let n_hold = n_hold.min(corpus.len() - 1);
    let (hold_idx, train_idx) = order.split_at(n_hold);
    let mut train_idx = train_idx.to_vec();
    let mut hold_idx = hold_idx.to_vec();
    train_idx.sort_unstable();
    hold_idx.sort_unstable();
    let train_set: Vec<CooperationRecord> = train_idx.iter().map(|&i| corpus[i].clone()).collect();
    let hold_set: Vec<CooperationRecord> = hold_idx.iter().map(|&i| corpus[i].clone()).collect();

    if params.restarts == 0 {
        return Err(CoosError::domain("restarts must be >= 1"));
    }
    let warmup = params.warmup_iterations.min(params.iterations);
    let mut best: Option<Descent> = None;
    for k in 0..params.restarts as u64 {
        let init_seed = seed ^ 0x6b65_6e6e ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        // trait weights start at zero: traits feed every block, so any
        // initial trait mass could be traded between blocks without
        // changing the loss and would blur the determinant scores
        let model = KennModel::random(schema.clone(), params.hidden_width, init_seed, 1.0, 0.0)?;
        let mut run = Descent::new(model, &train_set, params.learning_rate);
        run.steps(&train_set, warmup, params.growth)?;
        if best.as_ref().is_none_or(|b| run.loss < b.loss) {
            best = Some(run);
        }
    }
    let mut run = best.expect("at least one restart");
    run.steps(&train_set, params.iterations - warmup, params.growth)?;
    let Descent {
        model,
        loss,
        history,
        ..
    } = run;
    let report = TrainReport {
        train_r: correlation(&model, &train_set),
        holdout_r: (!hold_set.is_empty()).then(|| correlation(&model, &hold_set)),
        final_loss: loss,
        train_size: train_set.len(),
        holdout_size: hold_set.len(),
        loss_history: history,
    };
    Ok((model, report))
}

struct Descent {
    model: KennModel,
    trial: KennModel,
    mask: Vec<bool>,
    theta: Vec<f64>,
    loss: f64,
    lr: f64,
    history: Vec<f64>,
}

impl Descent {
    fn new(model: KennModel, data: &[CooperationRecord], lr: f64) -> Self {
        Descent {
            mask: model.trainable_mask(),
            theta: model.flat_params(),
            loss: model.loss(data),
            trial: model.clone(),
            model,
            lr,
            history: Vec::new(),
        }
    }

    /// Masked gradient steps; a step that raises the loss is rejected and the
    /// step size halved, so the recorded loss never increases.
    fn steps(&mut self, data: &[CooperationRecord], count: usize, growth: f64) -> Result<()> {
        for _ in 0..count {
            let grad = self.model.gradient(data);
            let candidate: Vec<f64> = self
                .theta
                .iter()
                .zip(&grad)
                .zip(&self.mask)
                .map(|((&t, &g), &m)| if m { t - self.lr * g } else { t })
                .collect();
            self.trial.set_flat_params(&candidate)?;
            let trial_loss = self.trial.loss(data);
            if trial_loss <= self.loss {
                self.theta = candidate;
                self.loss = trial_loss;
                std::mem::swap(&mut self.model, &mut self.trial);
                self.lr *= growth;
            } else {
                self.lr *= 0.5;
            }
            self.history.push(self.loss);
        }
        Ok(())
    }
}
