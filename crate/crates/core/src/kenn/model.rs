use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::schema::FeatureSchema;
use super::{CooperationRecord, DeterminantScores};
use crate::error::{CoosError, Result};

pub const MODEL_FORMAT: &str = "coos-kenn";
pub const MODEL_VERSION: u32 = 1;

pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Knowledge-embedded network: one small block per determinant group, each
/// seeing only its own features plus the shared trait inputs, combined through
/// nonnegative weights into a logistic cooperation rate.
///
/// Input weights are stored densely (`groups * hidden` rows by
/// `features + traits` columns); entries outside a block's mask are
/// structurally zero and never updated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KennDocument", into = "KennDocument")]
pub struct KennModel {
    schema: FeatureSchema,
    hidden_width: usize,
    input_weights: Vec<Vec<f64>>,
    hidden_bias: Vec<f64>,
    output_weights: Vec<f64>,
    output_bias: Vec<f64>,
    combination_raw: Vec<f64>,
    bias: f64,
    // per block: input columns it may read
    allowed: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct KennDocument {
    format: String,
    version: u32,
    schema: FeatureSchema,
    hidden_width: usize,
    input_weights: Vec<Vec<f64>>,
    hidden_bias: Vec<f64>,
    output_weights: Vec<f64>,
    output_bias: Vec<f64>,
    combination_raw: Vec<f64>,
    bias: f64,
}

impl From<KennModel> for KennDocument {
    fn from(m: KennModel) -> Self {
        KennDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            schema: m.schema,
            hidden_width: m.hidden_width,
            input_weights: m.input_weights,
            hidden_bias: m.hidden_bias,
            output_weights: m.output_weights,
            output_bias: m.output_bias,
            combination_raw: m.combination_raw,
            bias: m.bias,
        }
    }
}

impl TryFrom<KennDocument> for KennModel {
    type Error = CoosError;

    fn try_from(d: KennDocument) -> Result<Self> {
        if d.format != MODEL_FORMAT || d.version == 0 || d.version > MODEL_VERSION {
            return Err(CoosError::Format(format!(
                "unsupported model document {} v{}",
                d.format, d.version
            )));
        }
        let mut m = KennModel::zeros(d.schema, d.hidden_width)?;
        let rows = m.input_weights.len();
        let cols = m.input_columns();
        if d.input_weights.len() != rows
            || d.input_weights.iter().any(|r| r.len() != cols)
            || d.hidden_bias.len() != rows
            || d.output_weights.len() != rows
            || d.output_bias.len() != m.groups()
            || d.combination_raw.len() != m.groups()
        {
            return Err(CoosError::Format("model arrays do not match the schema".into()));
        }
        m.input_weights = d.input_weights;
        m.hidden_bias = d.hidden_bias;
        m.output_weights = d.output_weights;
        m.output_bias = d.output_bias;
        m.combination_raw = d.combination_raw;
        m.bias = d.bias;
        if m.cross_group_weight_count() != 0 {
            return Err(CoosError::Format("model has weights outside its connectivity mask".into()));
        }
        Ok(m)
    }
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub hidden: Vec<f64>,
    pub scores: Vec<f64>,
    pub rate: f64,
}

impl KennModel {
    /// All-zero parameters (output 0.5 everywhere).
    pub fn zeros(schema: FeatureSchema, hidden_width: usize) -> Result<Self> {
        schema.validate()?;
        if hidden_width == 0 {
            return Err(CoosError::domain("hidden width must be >= 1"));
        }
        let groups = schema.groups.len();
        let n_feat = schema.feature_count();
        let n_trait = schema.trait_count();
        let feature_groups = schema.feature_groups();
        let allowed = (0..groups)
            .map(|g| {
                feature_groups
                    .iter()
                    .enumerate()
                    .filter(|(_, fg)| **fg == g)
                    .map(|(i, _)| i)
                    .chain(n_feat..n_feat + n_trait)
                    .collect()
            })
            .collect();
        let rows = groups * hidden_width;
        Ok(KennModel {
            schema,
            hidden_width,
            input_weights: vec![vec![0.0; n_feat + n_trait]; rows],
            hidden_bias: vec![0.0; rows],
            output_weights: vec![0.0; rows],
            output_bias: vec![0.0; groups],
            combination_raw: vec![0.0; groups],
            bias: 0.0,
            allowed,
        })
    }

    /// Seeded random initialization; `scale` multiplies the fan-in normalized
    /// weight spread and `trait_scale` additionally damps trait weights.
    pub fn random(
        schema: FeatureSchema,
        hidden_width: usize,
        seed: u64,
        scale: f64,
        trait_scale: f64,
    ) -> Result<Self> {
        let mut m = Self::zeros(schema, hidden_width)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let std = Normal::new(0.0, 1.0).expect("unit normal");
        let n_feat = m.schema.feature_count();
        for g in 0..m.groups() {
            let fan_in = m.allowed[g].len() as f64;
            for h in 0..hidden_width {
                let row = g * hidden_width + h;
                for &col in &m.allowed[g] {
                    let t = if col >= n_feat { trait_scale } else { 1.0 };
                    m.input_weights[row][col] = scale * t * std.sample(&mut rng) / fan_in.sqrt();
                }
                m.hidden_bias[row] = 0.1 * scale * std.sample(&mut rng);
                m.output_weights[row] = scale * std.sample(&mut rng) / (hidden_width as f64).sqrt();
            }
            m.output_bias[g] = 0.1 * scale * std.sample(&mut rng);
            m.combination_raw[g] = 0.5 * std.sample(&mut rng);
        }
        m.bias = 0.1 * std.sample(&mut rng);
        Ok(m)
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden_width
    }

    pub fn groups(&self) -> usize {
        self.schema.groups.len()
    }

    fn input_columns(&self) -> usize {
        self.schema.feature_count() + self.schema.trait_count()
    }

    /// Combination weights after the softplus reparameterization.
    pub fn combination_weights(&self) -> Vec<f64> {
        self.combination_raw.iter().map(|&r| softplus(r)).collect()
    }

    /// Nonzero input weights connecting a feature to a block of another group.
    pub fn cross_group_weight_count(&self) -> usize {
        let mut count = 0;
        for g in 0..self.groups() {
            for h in 0..self.hidden_width {
                let row = &self.input_weights[g * self.hidden_width + h];
                count += row
                    .iter()
                    .enumerate()
                    .filter(|(col, w)| **w != 0.0 && !self.allowed[g].contains(col))
                    .count();
            }
        }
        count
    }

    /// Sets every outgoing weight of one feature to zero.
    pub fn zero_feature(&mut self, name: &str) -> Result<()> {
        let col = self
            .schema
            .feature_index(name)
            .ok_or_else(|| CoosError::not_found("feature", name))?;
        for row in &mut self.input_weights {
            row[col] = 0.0;
        }
        Ok(())
    }

    /// Affinely rescales one block's score: `s ↦ factor·s + shift`.
    pub(crate) fn rescale_block(&mut self, group: usize, factor: f64, shift: f64) {
        let hw = self.hidden_width;
        for w in &mut self.output_weights[group * hw..(group + 1) * hw] {
            *w *= factor;
        }
        self.output_bias[group] = self.output_bias[group] * factor + shift;
    }

    /// Scales the combination so that `group` dominates the output.
    pub fn set_combination_raw(&mut self, group: usize, raw: f64) {
        self.combination_raw[group] = raw;
    }

    pub(crate) fn check(&self, record: &CooperationRecord) -> Result<()> {
        if record.features.len() != self.schema.feature_count() {
            return Err(CoosError::domain(format!(
                "record has {} features, schema expects {}",
                record.features.len(),
                self.schema.feature_count()
            )));
        }
        if record.traits.len() != self.schema.trait_count() {
            return Err(CoosError::domain(format!(
                "record has {} traits, schema expects {}",
                record.traits.len(),
                self.schema.trait_count()
            )));
        }
        if record.features.iter().chain(&record.traits).any(|v| !v.is_finite()) {
            return Err(CoosError::domain("record contains non-finite inputs"));
        }
        Ok(())
    }

    fn input_at(record: &CooperationRecord, col: usize) -> f64 {
        let n = record.features.len();
        if col < n {
            record.features[col]
        } else {
            record.traits[col - n]
        }
    }

    pub(crate) fn trace(&self, record: &CooperationRecord) -> Trace {
        let hw = self.hidden_width;
        let mut hidden = vec![0.0; self.groups() * hw];
        let mut scores = vec![0.0; self.groups()];
        let mut z = self.bias;
        for g in 0..self.groups() {
            let mut s = self.output_bias[g];
            for h in 0..hw {
                let row = g * hw + h;
                let mut a = self.hidden_bias[row];
                for &col in &self.allowed[g] {
                    a += self.input_weights[row][col] * Self::input_at(record, col);
                }
                let act = a.tanh();
                hidden[row] = act;
                s += self.output_weights[row] * act;
            }
            scores[g] = s;
            z += softplus(self.combination_raw[g]) * s;
        }
        Trace {
            hidden,
            scores,
            rate: logistic(z),
        }
    }

    /// Cooperation rate and per-determinant scores for one record.
    pub fn predict(&self, record: &CooperationRecord) -> Result<(f64, DeterminantScores)> {
        self.check(record)?;
        let t = self.trace(record);
        Ok((
            t.rate,
            DeterminantScores {
                names: self.schema.group_names(),
                normalized: t.scores.iter().map(|&s| logistic(s)).collect(),
                raw: t.scores,
            },
        ))
    }

    pub fn parameter_count(&self) -> usize {
        let rows = self.input_weights.len();
        rows * self.input_columns() + rows * 2 + self.groups() * 2 + 1
    }

    /// Parameters in a fixed flat layout: input weights (row-major), hidden
    /// biases, output weights, output biases, raw combination weights, bias.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.parameter_count());
        for row in &self.input_weights {
            v.extend_from_slice(row);
        }
        v.extend_from_slice(&self.hidden_bias);
        v.extend_from_slice(&self.output_weights);
        v.extend_from_slice(&self.output_bias);
        v.extend_from_slice(&self.combination_raw);
        v.push(self.bias);
        v
    }

    pub fn set_flat_params(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.parameter_count() {
            return Err(CoosError::domain("flat parameter length mismatch"));
        }
        let cols = self.input_columns();
        let mut it = v.iter().copied();
        for row in &mut self.input_weights {
            for w in row.iter_mut().take(cols) {
                *w = it.next().expect("length checked");
            }
        }
        for dst in [
            &mut self.hidden_bias,
            &mut self.output_weights,
            &mut self.output_bias,
            &mut self.combination_raw,
        ] {
            for w in dst.iter_mut() {
                *w = it.next().expect("length checked");
            }
        }
        self.bias = it.next().expect("length checked");
        Ok(())
    }

    /// `true` for every flat parameter that training may change.
    pub fn trainable_mask(&self) -> Vec<bool> {
        let mut mask = Vec::with_capacity(self.parameter_count());
        for g in 0..self.groups() {
            for _ in 0..self.hidden_width {
                let mut row = vec![false; self.input_columns()];
                for &col in &self.allowed[g] {
                    row[col] = true;
                }
                mask.extend(row);
            }
        }
        mask.resize(self.parameter_count(), true);
        mask
    }

    /// Mean squared error of the predicted rate.
    pub fn loss(&self, corpus: &[CooperationRecord]) -> f64 {
        let n = corpus.len() as f64;
        corpus
            .iter()
            .map(|r| (self.trace(r).rate - r.rate).powi(2))
            .sum::<f64>()
            / n
    }

    /// Analytic gradient of [`loss`](Self::loss) in the flat layout. Masked
    /// entries are exactly zero.
    pub fn gradient(&self, corpus: &[CooperationRecord]) -> Vec<f64> {
        let hw = self.hidden_width;
        let cols = self.input_columns();
        let rows = self.input_weights.len();
        let groups = self.groups();
        let off_hb = rows * cols;
        let off_ow = off_hb + rows;
        let off_ob = off_ow + rows;
        let off_cr = off_ob + groups;
        let off_b = off_cr + groups;
        let mut grad = vec![0.0; self.parameter_count()];
        let n = corpus.len() as f64;
        let comb = self.combination_weights();
        for r in corpus {
            let t = self.trace(r);
            let dz = 2.0 * (t.rate - r.rate) / n * t.rate * (1.0 - t.rate);
            grad[off_b] += dz;
            for g in 0..groups {
                grad[off_cr + g] += dz * t.scores[g] * logistic(self.combination_raw[g]);
                let ds = dz * comb[g];
                grad[off_ob + g] += ds;
                for h in 0..hw {
                    let row = g * hw + h;
                    let act = t.hidden[row];
                    grad[off_ow + row] += ds * act;
                    let da = ds * self.output_weights[row] * (1.0 - act * act);
                    grad[off_hb + row] += da;
                    for &col in &self.allowed[g] {
                        grad[row * cols + col] += da * Self::input_at(r, col);
                    }
                }
            }
        }
        grad
    }
}
