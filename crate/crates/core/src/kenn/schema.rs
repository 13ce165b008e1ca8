use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{CoosError, Result};

pub const FEATURE_COUNT: usize = 33;
pub const GROUP_COUNT: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterminantGroup {
    pub name: String,
    pub features: Vec<String>,
}

/// Assignment of the encoded features to determinant groups, plus the trait
/// inputs that feed every group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub groups: Vec<DeterminantGroup>,
    pub trait_features: Vec<String>,
    pub actionable: Vec<String>,
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Default for FeatureSchema {
    fn default() -> Self {
        let group = |name: &str, features: &[&str]| DeterminantGroup {
            name: name.to_string(),
            features: names(features),
        };
        FeatureSchema {
            groups: vec![
                group(
                    "cost_benefit",
                    &[
                        "payoff_temptation",
                        "payoff_sucker",
                        "cooperation_cost",
                        "benefit_ratio",
                        "monetary_incentive",
                        "time_cost",
                    ],
                ),
                group(
                    "risk_cognition",
                    &[
                        "outcome_uncertainty",
                        "loss_framing",
                        "risk_perception",
                        "perceived_severity",
                        "environmental_uncertainty",
                        "probability_of_loss",
                    ],
                ),
                group(
                    "social_norms",
                    &[
                        "descriptive_norm",
                        "injunctive_norm",
                        "norm_salience",
                        "sanction_presence",
                        "reputation_visibility",
                        "communication",
                    ],
                ),
                group(
                    "responsibility",
                    &[
                        "personal_responsibility",
                        "moral_framing",
                        "efficacy",
                        "accountability",
                        "diffusion_of_responsibility",
                    ],
                ),
                group(
                    "mutual_expectation",
                    &[
                        "expected_cooperation",
                        "trust",
                        "repeated_interaction",
                        "reciprocity_history",
                        "promise_made",
                    ],
                ),
                group(
                    "group_identity",
                    &[
                        "ingroup_salience",
                        "group_size",
                        "shared_identity",
                        "intergroup_competition",
                        "leader_presence",
                    ],
                ),
            ],
            trait_features: names(&[
                "openness",
                "conscientiousness",
                "extraversion",
                "agreeableness",
                "neuroticism",
                "gender",
            ]),
            actionable: names(&[
                "monetary_incentive",
                "cooperation_cost",
                "loss_framing",
                "risk_perception",
                "descriptive_norm",
                "norm_salience",
                "sanction_presence",
                "reputation_visibility",
                "communication",
                "moral_framing",
                "accountability",
                "efficacy",
                "trust",
                "promise_made",
                "shared_identity",
                "ingroup_salience",
            ]),
        }
    }
}

impl FeatureSchema {
    pub fn validate(&self) -> Result<()> {
        if self.groups.len() != GROUP_COUNT {
            return Err(CoosError::domain(format!(
                "schema needs {GROUP_COUNT} determinant groups, found {}",
                self.groups.len()
            )));
        }
        let total: usize = self.groups.iter().map(|g| g.features.len()).sum();
        if total != FEATURE_COUNT {
            return Err(CoosError::domain(format!(
                "schema needs {FEATURE_COUNT} features, found {total}"
            )));
        }
        if let Some(g) = self.groups.iter().find(|g| g.features.is_empty()) {
            return Err(CoosError::domain(format!("group {:?} has no features", g.name)));
        }
        let mut seen = BTreeSet::new();
        for name in self
            .groups
            .iter()
            .map(|g| &g.name)
            .chain(self.groups.iter().flat_map(|g| &g.features))
            .chain(&self.trait_features)
        {
            if !seen.insert(name.as_str()) {
                return Err(CoosError::domain(format!("duplicate schema name {name:?}")));
            }
        }
        for a in &self.actionable {
            if self.feature_index(a).is_none() {
                return Err(CoosError::domain(format!(
                    "actionable feature {a:?} is not a schema feature"
                )));
            }
        }
        Ok(())
    }

    pub fn feature_count(&self) -> usize {
        self.groups.iter().map(|g| g.features.len()).sum()
    }

    pub fn trait_count(&self) -> usize {
        self.trait_features.len()
    }

    /// Feature names in input order (group by group).
    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.groups.iter().flat_map(|g| g.features.iter().map(String::as_str))
    }

    pub fn group_names(&self) -> Vec<String> {
        self.groups.iter().map(|g| g.name.clone()).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names().position(|f| f == name)
    }

    pub fn trait_index(&self, name: &str) -> Option<usize> {
        self.trait_features.iter().position(|t| t == name)
    }

    /// Group index of each feature, in input order.
    pub fn feature_groups(&self) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(g, grp)| std::iter::repeat_n(g, grp.features.len()))
            .collect()
    }

    pub fn is_actionable(&self, name: &str) -> bool {
        self.actionable.iter().any(|a| a == name)
    }
}
