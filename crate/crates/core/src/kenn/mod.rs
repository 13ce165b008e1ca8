//! Fast-loop analytics: a knowledge-embedded network that predicts
//! cooperation rates from encoded experiment features, exposes one
//! interpretable score per psychological determinant, and ranks candidate
//! interventions. Also hosts the utility–norm cross-point solver.

mod cross_point;
mod interventions;
mod model;
mod schema;
mod synth;
mod train;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoosError, Result};
use crate::jsonl;

pub use cross_point::{cross_point, BISECTION_TOLERANCE, BISECTION_WIDTH};
pub use interventions::{rank_interventions, ranking_table, InterventionEffect};
pub use model::{KennModel, MODEL_FORMAT, MODEL_VERSION};
pub use schema::{DeterminantGroup, FeatureSchema, FEATURE_COUNT, GROUP_COUNT};
pub use synth::generate_synthetic_corpus;
pub use train::{pearson, spearman, train, TrainParams, TrainReport};

pub const CORPUS_FORMAT: &str = "coos-kenn-corpus";
pub const CORPUS_VERSION: u32 = 1;

/// One encoded experiment: features in schema order, trait inputs, and the
/// observed cooperation rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooperationRecord {
    pub features: Vec<f64>,
    pub traits: Vec<f64>,
    pub rate: f64,
}

impl CooperationRecord {
    /// Checks the record against a schema, including `rate ∈ [0,1]`.
    pub fn validate(&self, schema: &FeatureSchema) -> Result<()> {
        if self.features.len() != schema.feature_count() || self.traits.len() != schema.trait_count()
        {
            return Err(CoosError::domain(format!(
                "record shape {}+{} does not match schema {}+{}",
                self.features.len(),
                self.traits.len(),
                schema.feature_count(),
                schema.trait_count()
            )));
        }
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(CoosError::domain(format!("rate {} outside [0,1]", self.rate)));
        }
        if self.features.iter().chain(&self.traits).any(|v| !v.is_finite()) {
            return Err(CoosError::domain("record contains non-finite inputs"));
        }
        Ok(())
    }
}

/// Per-determinant scores: raw block outputs and their logistic transform for
/// radar display.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminantScores {
    pub names: Vec<String>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

pub fn write_corpus<W: std::io::Write>(out: W, corpus: &[CooperationRecord]) -> Result<()> {
    jsonl::write(out, CORPUS_FORMAT, CORPUS_VERSION, corpus)
}

pub fn read_corpus<R: std::io::BufRead>(input: R) -> Result<Vec<CooperationRecord>> {
    jsonl::read(input, CORPUS_FORMAT, CORPUS_VERSION)
}

pub fn write_corpus_file(path: &Path, corpus: &[CooperationRecord]) -> Result<()> {
    jsonl::write_file(path, CORPUS_FORMAT, CORPUS_VERSION, corpus)
}

pub fn read_corpus_file(path: &Path) -> Result<Vec<CooperationRecord>> {
    jsonl::read_file(path, CORPUS_FORMAT, CORPUS_VERSION)
}

impl KennModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn record(schema: &FeatureSchema, seed: u64) -> CooperationRecord {
        let (mut c, _) = generate_synthetic_corpus(schema, seed, 1, 0.0).unwrap();
        c.pop().unwrap()
    }

    #[test]
    fn zero_model_predicts_one_half() {
        let s = FeatureSchema::default();
        let m = KennModel::zeros(s.clone(), 4).unwrap();
        let (rate, scores) = m.predict(&record(&s, 1)).unwrap();
        assert_eq!(rate, 0.5);
        assert_eq!(scores.names, s.group_names());
        assert!(scores.normalized.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn dimension_mismatch_is_domain_error() {
        let s = FeatureSchema::default();
        let m = KennModel::zeros(s.clone(), 4).unwrap();
        let mut r = record(&s, 1);
        r.features.pop();
        assert!(matches!(m.predict(&r), Err(CoosError::Domain(_))));
    }

    #[test]
    fn feature_perturbation_is_local_to_its_group() {
        let s = FeatureSchema::default();
        let m = KennModel::random(s.clone(), 4, 7, 1.0, 1.0).unwrap();
        let r = record(&s, 2);
        let (_, before) = m.predict(&r).unwrap();
        let col = s.feature_index("risk_perception").unwrap();
        let group = s.feature_groups()[col];
        let mut p = r.clone();
        p.features[col] += 0.7;
        let (_, after) = m.predict(&p).unwrap();
        for g in 0..6 {
            if g == group {
                assert_ne!(before.raw[g], after.raw[g]);
            } else {
                assert_eq!(before.raw[g].to_bits(), after.raw[g].to_bits());
            }
        }
    }

    #[test]
    fn trait_perturbation_reaches_every_group() {
        let s = FeatureSchema::default();
        let m = KennModel::random(s.clone(), 4, 7, 1.0, 1.0).unwrap();
        let r = record(&s, 2);
        let (_, before) = m.predict(&r).unwrap();
        let mut p = r.clone();
        p.traits[0] += 0.7;
        let (_, after) = m.predict(&p).unwrap();
        assert!((0..6).all(|g| before.raw[g] != after.raw[g]));
    }

    #[test]
    fn flat_params_round_trip() {
        let s = FeatureSchema::default();
        let m = KennModel::random(s, 4, 3, 1.0, 1.0).unwrap();
        let mut z = KennModel::zeros(m.schema().clone(), 4).unwrap();
        z.set_flat_params(&m.flat_params()).unwrap();
        assert_eq!(z, m);
        assert_eq!(m.flat_params().len(), m.parameter_count());
        assert_eq!(m.trainable_mask().len(), m.parameter_count());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s = FeatureSchema::default();
        let (corpus, _) = generate_synthetic_corpus(&s, 11, 8, 0.05).unwrap();
        let m = KennModel::random(s, 4, 5, 1.0, 1.0).unwrap();
        let g = m.gradient(&corpus);
        let theta = m.flat_params();
        let mask = m.trainable_mask();
        let h = 1e-5;
        let mut probe = m.clone();
        for i in (0..theta.len()).step_by(7) {
            if !mask[i] {
                assert_eq!(g[i], 0.0);
                continue;
            }
            let mut t = theta.clone();
            t[i] += h;
            probe.set_flat_params(&t).unwrap();
            let up = probe.loss(&corpus);
            t[i] -= 2.0 * h;
            probe.set_flat_params(&t).unwrap();
            let down = probe.loss(&corpus);
            let fd = (up - down) / (2.0 * h);
            let err = (fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-6);
            assert!(err < 1e-4, "param {i}: fd {fd} analytic {}", g[i]);
        }
    }

    #[test]
    fn model_json_round_trip_and_rejects_masked_weights() {
        let s = FeatureSchema::default();
        let m = KennModel::random(s, 4, 9, 1.0, 1.0).unwrap();
        let text = m.to_json().unwrap();
        assert_eq!(KennModel::from_json(&text).unwrap(), m);
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        // row 0 belongs to the first group; the last feature column is in the last group
        doc["input_weights"][0][32] = serde_json::json!(0.5);
        assert!(KennModel::from_json(&doc.to_string()).is_err());
    }

    #[test]
    fn corpus_round_trip() {
        let s = FeatureSchema::default();
        let (corpus, _) = generate_synthetic_corpus(&s, 4, 5, 0.1).unwrap();
        let mut buf = Vec::new();
        write_corpus(&mut buf, &corpus).unwrap();
        assert_eq!(read_corpus(&buf[..]).unwrap(), corpus);
    }

    #[test]
    fn synthetic_corpus_is_deterministic() {
        let s = FeatureSchema::default();
        let (a, ga) = generate_synthetic_corpus(&s, 21, 700, 0.05).unwrap();
        let (b, gb) = generate_synthetic_corpus(&s, 21, 700, 0.05).unwrap();
        assert_eq!(a.len(), 700);
        assert_eq!(a, b);
        assert_eq!(ga, gb);
        assert!(a.iter().all(|r| (0.0..=1.0).contains(&r.rate)));
        assert!(generate_synthetic_corpus(&s, 21, 0, 0.05).is_err());
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let s = FeatureSchema::default();
        assert!(matches!(
            train(&[], &s, &TrainParams::default(), 0),
            Err(CoosError::Domain(_))
        ));
    }

    #[test]
    fn repeated_record_is_fit() {
        let s = FeatureSchema::default();
        let mut r = record(&s, 3);
        r.rate = 0.83;
        let corpus = vec![r; 10];
        let params = TrainParams {
            holdout_fraction: 0.0,
            ..TrainParams::default()
        };
        let (m, report) = train(&corpus, &s, &params, 1).unwrap();
        assert!(report.final_loss <= 1e-4, "loss {}", report.final_loss);
        assert_eq!(m.cross_group_weight_count(), 0);
        assert!(report.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn training_is_deterministic_and_masked() {
        let s = FeatureSchema::default();
        let (corpus, _) = generate_synthetic_corpus(&s, 8, 60, 0.05).unwrap();
        let params = TrainParams {
            iterations: 50,
            ..TrainParams::default()
        };
        let (a, ra) = train(&corpus, &s, &params, 2).unwrap();
        let (b, rb) = train(&corpus, &s, &params, 2).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(ra, rb);
        assert_eq!(a.cross_group_weight_count(), 0);
        assert!(ra.loss_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(a.combination_weights().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn empty_intervention_set_gives_empty_ranking() {
        let s = FeatureSchema::default();
        let m = KennModel::random(s, 4, 1, 1.0, 1.0).unwrap();
        assert!(rank_interventions(&m, &[], &BTreeMap::new()).unwrap().is_empty());
    }

    #[test]
    fn non_actionable_intervention_is_rejected() {
        let s = FeatureSchema::default();
        let m = KennModel::random(s.clone(), 4, 1, 1.0, 1.0).unwrap();
        let corpus = vec![record(&s, 1)];
        let iv = BTreeMap::from([("payoff_temptation".to_string(), 1.0)]);
        assert!(matches!(
            rank_interventions(&m, &corpus, &iv),
            Err(CoosError::Domain(_))
        ));
    }

    #[test]
    fn dead_feature_has_zero_effect() {
        let s = FeatureSchema::default();
        let mut m = KennModel::random(s.clone(), 4, 1, 1.0, 1.0).unwrap();
        m.zero_feature("trust").unwrap();
        let (corpus, _) = generate_synthetic_corpus(&s, 2, 30, 0.0).unwrap();
        let iv: BTreeMap<String, f64> =
            s.actionable.iter().map(|f| (f.clone(), 2.0)).collect();
        let ranked = rank_interventions(&m, &corpus, &iv).unwrap();
        let dead = ranked.iter().position(|e| e.feature == "trust").unwrap();
        assert_eq!(ranked[dead].mean_delta, 0.0);
        assert!(ranked[..dead].iter().all(|e| e.mean_delta > 0.0));
        assert!(ranked[dead + 1..].iter().all(|e| e.mean_delta < 0.0));
        assert!(ranked.windows(2).all(|w| w[0].mean_delta >= w[1].mean_delta));
        let table = ranking_table(&ranked);
        assert_eq!(table.lines().count(), ranked.len() + 1);
    }

    #[test]
    fn dominant_determinant_leads_the_ranking() {
        let s = FeatureSchema::default();
        let mut m = KennModel::random(s.clone(), 4, 5, 1.0, 1.0).unwrap();
        let social = s.group_names().iter().position(|g| g == "social_norms").unwrap();
        for g in 0..6 {
            m.set_combination_raw(g, if g == social { 5.0 } else { -12.0 });
        }
        let (corpus, _) = generate_synthetic_corpus(&s, 2, 50, 0.0).unwrap();
        let iv: BTreeMap<String, f64> = s.actionable.iter().map(|f| (f.clone(), 0.0)).collect();
        let ranked = rank_interventions(&m, &corpus, &iv).unwrap();
        let magnitude = |e: &InterventionEffect| e.mean_delta.abs();
        let mut by_size = ranked.clone();
        by_size.sort_by(|a, b| magnitude(b).total_cmp(&magnitude(a)));
        let social_features = &s.groups[social].features;
        let n_social = s.actionable.iter().filter(|f| social_features.contains(f)).count();
        assert!(by_size[..n_social].iter().all(|e| social_features.contains(&e.feature)));
    }
}
