use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::model::KennModel;
use super::CooperationRecord;
use crate::error::{CoosError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionEffect {
    pub feature: String,
    pub level: f64,
    /// Mean change in predicted cooperation rate across the corpus.
    pub mean_delta: f64,
}

/// Effect of setting each actionable feature to its intervention level,
/// averaged over the corpus. Sorted by effect descending, ties by name.
pub fn rank_interventions(
    model: &KennModel,
    corpus: &[CooperationRecord],
    interventions: &BTreeMap<String, f64>,
) -> Result<Vec<InterventionEffect>> {
    let schema = model.schema();
    let mut columns = Vec::with_capacity(interventions.len());
    for (name, &level) in interventions {
        if !schema.is_actionable(name) {
            return Err(CoosError::domain(format!("feature {name:?} is not actionable")));
        }
        if !level.is_finite() {
            return Err(CoosError::domain(format!("intervention level for {name:?} is not finite")));
        }
        let col = schema.feature_index(name).expect("actionable features are validated");
        columns.push((name.clone(), col, level));
    }
    if columns.is_empty() {
        return Ok(Vec::new());
    }
    if corpus.is_empty() {
        return Err(CoosError::domain("intervention corpus is empty"));
    }
    for r in corpus {
        model.check(r)?;
    }
    let base: Vec<f64> = corpus.iter().map(|r| model.trace(r).rate).collect();
    let mut out: Vec<InterventionEffect> = columns
        .into_iter()
        .map(|(feature, col, level)| {
            let total: f64 = corpus
                .iter()
                .zip(&base)
                .map(|(r, b)| {
                    let mut changed = r.clone();
                    changed.features[col] = level;
                    model.trace(&changed).rate - b
                })
                .sum();
            InterventionEffect {
                feature,
                level,
                mean_delta: total / corpus.len() as f64,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.mean_delta
            .total_cmp(&a.mean_delta)
            .then_with(|| a.feature.cmp(&b.feature))
    });
    Ok(out)
}

/// Plain-text ranking table.
pub fn ranking_table(effects: &[InterventionEffect]) -> String {
    let width = effects
        .iter()
        .map(|e| e.feature.len())
        .max()
        .unwrap_or(0)
        .max("feature".len());
    let mut s = String::new();
    let _ = writeln!(s, "rank  {:<width$}  {:>8}  {:>10}", "feature", "level", "mean_delta");
    for (i, e) in effects.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:>4}  {:<width$}  {:>8.3}  {:>+10.5}",
            i + 1,
            e.feature,
            e.level,
            e.mean_delta
        );
    }
    s
}
