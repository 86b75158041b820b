//! Hyperparameters shared by the split optimizer and the tree builder.

use thiserror::Error;

use crate::split::StepPolicy;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HrtConfig {
    /// Levels of internal nodes allowed; the root sits at depth 0.
    pub max_depth: usize,
    /// Nodes (and split children) with fewer rows become leaves.
    pub min_samples: usize,
    /// A node whose ridge leaf already reaches this RMSE is not split.
    pub rmse_threshold: f64,
    pub ridge_alpha: f64,
    pub step_policy: StepPolicy,
    /// Iteration cap for one node optimization.
    pub t_max: usize,
    /// Parameter-change tolerance for node convergence.
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for HrtConfig {
    fn default() -> Self {
        HrtConfig {
            max_depth: 6,
            min_samples: 10,
            rmse_threshold: 0.0,
            ridge_alpha: 0.0,
            step_policy: StepPolicy::default_auto(),
            t_max: 100,
            epsilon: 1e-6,
            seed: 0,
        }
    }
}

impl HrtConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.min_samples < 1 {
            return Err(invalid("min_samples", "must be at least 1"));
        }
        if !(self.rmse_threshold >= 0.0 && self.rmse_threshold.is_finite()) {
            return Err(invalid("rmse_threshold", "must be finite and >= 0"));
        }
        if !(self.ridge_alpha >= 0.0 && self.ridge_alpha.is_finite()) {
            return Err(invalid("ridge_alpha", "must be finite and >= 0"));
        }
        if self.t_max < 1 {
            return Err(invalid("t_max", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", "must be finite and > 0"));
        }
        self.step_policy
            .validate()
            .map_err(|reason| invalid("step_policy", reason))
    }

    pub fn with_seed(&self, seed: u64) -> HrtConfig {
        HrtConfig {
            seed,
            ..self.clone()
        }
    }
}
