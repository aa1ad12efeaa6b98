//! Experiment configuration files.

use std::path::Path;

use orc_core::bodies::{random, BodySpec, FuncSpec};
use orc_core::separation::SlackMode;
use orc_core::{OracleError, ProblemGeometry, RandomStream, Vector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chains::Chain;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown chain `{0}`; see `orc list-chains`")]
    UnknownChain(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub chain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionConfig>,
    pub dims: Vec<usize>,
    pub eps: Vec<f64>,
    pub seeds: Vec<u64>,
    pub trials: usize,
    #[serde(default = "default_slack_mode")]
    pub slack_mode: SlackMode,
    #[serde(default)]
    pub overrides: Overrides,
}

fn default_slack_mode() -> SlackMode {
    SlackMode::Anchored
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retries: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sep_delta_exponent: Option<i32>,
}

/// Bodies are given per dimension: every entry of `dims` instantiates one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyConfig {
    Ball {
        #[serde(default = "one")]
        radius: f64,
        /// Certified outer radius, when a looser sandwich than `radius` is wanted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        outer_radius: Option<f64>,
    },
    Box {
        #[serde(default = "one")]
        radius: f64,
    },
    Simplex {
        #[serde(default = "one")]
        scale: f64,
    },
    /// A rotated box with `extra_cuts` random facets, drawn from the seed.
    RandomPolytope {
        #[serde(default)]
        extra_cuts: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    Norm,
    NormSquared,
    /// `⟨a, x⟩ + b` with `a` drawn from the seed and scaled to `‖a‖ = slope`.
    Linear {
        #[serde(default = "half")]
        slope: f64,
        #[serde(default = "half")]
        offset: f64,
    },
    /// Random convex quadratic with Hessian eigenvalues in `[lo, hi]`.
    Quadratic {
        lo: f64,
        hi: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

impl BodyConfig {
    /// The body for dimension `n`. Random bodies depend only on `stream`.
    pub fn instantiate(&self, n: usize, stream: &RandomStream) -> Result<BodySpec, OracleError> {
        match *self {
            BodyConfig::Ball {
                radius,
                outer_radius: None,
            } => BodySpec::ball(Vector::zeros(n), radius),
            BodyConfig::Ball {
                radius,
                outer_radius: Some(outer),
            } => BodySpec::intersection(
                vec![BodySpec::ball(Vector::zeros(n), radius)?],
                ProblemGeometry::centered(n, radius, outer)?,
            ),
            BodyConfig::Box { radius } => BodySpec::cube(Vector::zeros(n), radius),
            BodyConfig::Simplex { scale } => BodySpec::simplex(n, scale),
            BodyConfig::RandomPolytope { extra_cuts } => Ok(BodySpec::HPolytope(random::polytope(
                n, extra_cuts, stream,
            )?)),
        }
    }
}

impl FunctionConfig {
    pub fn instantiate(&self, n: usize, stream: &RandomStream) -> Result<FuncSpec, OracleError> {
        match *self {
            FunctionConfig::Norm => Ok(FuncSpec::norm(n)),
            FunctionConfig::NormSquared => Ok(FuncSpec::norm_squared(n)),
            FunctionConfig::Linear { slope, offset } => {
                let a = random::unit_vector(n, &mut stream.rng())
                    .into_vector()
                    .scaled(slope);
                Ok(FuncSpec::linear(a, offset))
            }
            FunctionConfig::Quadratic { lo, hi } => random::quadratic(n, lo, hi, stream),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn chain(&self) -> Result<Chain, ConfigError> {
        Chain::from_name(&self.chain).ok_or_else(|| ConfigError::UnknownChain(self.chain.clone()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        let chain = self.chain()?;
        if self.experiment.is_empty()
            || !self
                .experiment
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return invalid(format!(
                "experiment name `{}` must be non-empty and use only [A-Za-z0-9_-]",
                self.experiment
            ));
        }
        match (chain.needs_function(), &self.body, &self.function) {
            (false, Some(_), None) | (true, None, Some(_)) => {}
            (false, _, _) => {
                return invalid(format!(
                    "chain `{}` needs a `body` and no `function`",
                    self.chain
                ))
            }
            (true, _, _) => {
                return invalid(format!(
                    "chain `{}` needs a `function` and no `body`",
                    self.chain
                ))
            }
        }
        if self.dims.is_empty() || self.eps.is_empty() || self.seeds.is_empty() || self.trials == 0
        {
            return invalid("dims, eps and seeds must be non-empty and trials positive".into());
        }
        if let Some(&n) = self.dims.iter().find(|&&n| n == 0 || n > 64) {
            return invalid(format!("dimension {n} is outside 1..=64"));
        }
        if let Some(&e) = self.eps.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
            return invalid(format!("eps {e} is outside (0, 0.5)"));
        }
        if let Some(BodyConfig::Ball { radius, .. } | BodyConfig::Box { radius }) = &self.body {
            if !(*radius > 0.0 && radius.is_finite()) {
                return invalid(format!("body radius {radius} must be positive"));
            }
        }
        if let Some(BodyConfig::Ball {
            radius,
            outer_radius: Some(outer),
        }) = &self.body
        {
            if !(outer >= radius && outer.is_finite()) {
                return invalid(format!(
                    "outer radius {outer} must be finite and at least the radius {radius}"
                ));
            }
        }
        if let Some(FunctionConfig::Quadratic { lo, hi }) = &self.function {
            if !(*lo >= 0.0 && lo <= hi && hi.is_finite()) {
                return invalid(format!(
                    "quadratic eigenvalue range [{lo}, {hi}] is invalid"
                ));
            }
        }
        if let Some(r1) = self.overrides.r1 {
            if !(r1 > 0.0 && r1.is_finite()) {
                return invalid(format!("override r1 = {r1} must be positive"));
            }
        }
        Ok(())
    }

    /// Rows in the result file.
    pub fn row_count(&self) -> usize {
        self.dims.len() * self.eps.len() * self.seeds.len() * self.trials
    }

    /// SHA-256 of the canonical JSON form, so formatting does not matter.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BALL: &str = r#"{
        "experiment": "separation_ball", "chain": "sep_from_mem",
        "body": {"type": "ball"}, "dims": [2, 3], "eps": [1e-4],
        "seeds": [7], "trials": 5, "slack_mode": "anchored"
    }"#;

    #[test]
    fn parses_and_counts_rows() {
        let cfg = ExperimentConfig::from_json(BALL).unwrap();
        assert_eq!(cfg.row_count(), 10);
        assert_eq!(
            cfg.body,
            Some(BodyConfig::Ball {
                radius: 1.0,
                outer_radius: None
            })
        );
        assert_eq!(cfg.overrides, Overrides::default());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = BALL.replace("\"trials\"", "\"trails\": 1, \"trials\"");
        assert!(matches!(
            ExperimentConfig::from_json(&text),
            Err(ConfigError::Parse(_))
        ));
        let text = BALL.replace(
            "{\"type\": \"ball\"}",
            "{\"type\": \"ball\", \"center\": 1}",
        );
        assert!(matches!(
            ExperimentConfig::from_json(&text),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn rejects_unknown_chain_and_bad_values() {
        let text = BALL.replace("sep_from_mem", "sep_from_magic");
        assert!(matches!(
            ExperimentConfig::from_json(&text),
            Err(ConfigError::UnknownChain(_))
        ));
        let text = BALL.replace("[1e-4]", "[0.7]");
        assert!(matches!(
            ExperimentConfig::from_json(&text),
            Err(ConfigError::Invalid(_))
        ));
        let text = BALL.replace(
            "\"body\": {\"type\": \"ball\"}",
            "\"function\": {\"type\": \"norm\"}",
        );
        assert!(matches!(
            ExperimentConfig::from_json(&text),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = ExperimentConfig::from_json(BALL).unwrap();
        let b = ExperimentConfig::from_json(&BALL.split_whitespace().collect::<Vec<_>>().join(" "))
            .unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.trials = 6;
        assert_ne!(a.hash(), c.hash());
    }
}
