//! Run configuration: a TOML file with dotted-path command-line overrides.
//!
//! Precedence: command-line `--set key=value` overrides beat file values,
//! which beat the built-in defaults. `--seed` and `--out` are shorthands
//! for `seed` and `out_dir`.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// One of: slab1d, cube3d-mono, cube3d-poly, shell-time, inverse-cube.
    pub problem: String,
    pub seed: u64,
    pub out_dir: String,
    /// Grey absorption coefficient of the shell benchmark.
    pub k_nu: f64,
    pub sampling: SamplingConfig,
    pub quadrature: QuadratureConfig,
    pub network: NetworkConfig,
    pub loss: LossSection,
    pub optimizer: OptimizerSection,
    pub evaluation: EvaluationConfig,
    pub ensemble: EnsembleSection,
    pub bound: BoundSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "slab1d".into(),
            seed: 0,
            out_dir: "run".into(),
            k_nu: 10.0,
            sampling: SamplingConfig::default(),
            quadrature: QuadratureConfig::default(),
            network: NetworkConfig::default(),
            loss: LossSection::default(),
            optimizer: OptimizerSection::default(),
            evaluation: EvaluationConfig::default(),
            ensemble: EnsembleSection::default(),
            bound: BoundSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub n_interior: usize,
    pub n_spatial_boundary: usize,
    pub n_temporal_boundary: usize,
    pub n_data: usize,
    /// `sobol` or `uniform-random`.
    pub sampler: String,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n_interior: 2048,
            n_spatial_boundary: 512,
            n_temporal_boundary: 0,
            n_data: 0,
            sampler: "sobol".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub n_mu: usize,
    pub n_phi: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { n_mu: 10, n_phi: 10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub hidden_layers: usize,
    pub hidden_width: usize,
    /// Absorption network (inverse mode); 0 means reuse the intensity
    /// network's configuration.
    pub k_hidden_layers: usize,
    pub k_hidden_width: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            hidden_layers: 4,
            hidden_width: 16,
            k_hidden_layers: 0,
            k_hidden_width: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LossSection {
    pub lambda: f64,
    pub lambda_reg: f64,
    /// 1 or 2.
    pub reg_exponent: u8,
    pub lambda_tikhonov: f64,
    pub k_boundary_weight: f64,
}

impl Default for LossSection {
    fn default() -> Self {
        LossSection {
            lambda: 0.1,
            lambda_reg: 0.0,
            reg_exponent: 2,
            lambda_tikhonov: 0.001,
            k_boundary_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    /// `lbfgs` or `adam`.
    pub algorithm: String,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub loss_change_tolerance: f64,
    pub lbfgs_history: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    pub max_line_search: usize,
    pub adam_learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        OptimizerSection {
            algorithm: "lbfgs".into(),
            max_iterations: 500,
            gradient_tolerance: 1e-12,
            loss_change_tolerance: 0.0,
            lbfgs_history: 50,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            max_line_search: 25,
            adam_learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    pub spatial_resolution: usize,
    pub angular_resolution: usize,
    pub time_resolution: usize,
    pub frequency_resolution: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            spatial_resolution: 48,
            angular_resolution: 64,
            time_resolution: 1,
            frequency_resolution: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub hidden_layers: Vec<usize>,
    pub hidden_widths: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub lambda_regs: Vec<f64>,
    pub retrainings: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            hidden_layers: vec![4, 8],
            hidden_widths: vec![16, 20, 24],
            lambdas: vec![0.1, 1.0, 10.0],
            lambda_regs: vec![0.0],
            retrainings: 5,
        }
    }
}

/// Inputs of the standalone bound evaluator; zeros mean "derive from the
/// problem definition" where possible.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSection {
    pub training_error_interior: f64,
    pub training_error_spatial: f64,
    pub training_error_temporal: f64,
    /// Hardy-Krause variation surrogate applied to all terms.
    pub variation: f64,
    /// Cauchy constant for the steady bound; 0 derives it from the slack.
    pub c_eps: f64,
}

impl Default for BoundSection {
    fn default() -> Self {
        BoundSection {
            training_error_interior: 0.0,
            training_error_spatial: 0.0,
            training_error_temporal: 0.0,
            variation: 1.0,
            c_eps: 0.0,
        }
    }
}

impl RunConfig {
    /// Load from a TOML file, apply dotted overrides, validate.
    pub fn load(path: Option<&std::path::Path>, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                text.parse()
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Value::Table(Default::default()),
        };
        for entry in overrides {
            apply_override(&mut value, entry)?;
        }
        let config: RunConfig = value
            .try_into()
            .context("configuration does not match the expected schema")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !rte_pinn::problems::PROBLEM_NAMES.contains(&self.problem.as_str()) {
            bail!(
                "unknown problem `{}`; expected one of {:?}",
                self.problem,
                rte_pinn::problems::PROBLEM_NAMES
            );
        }
        match self.sampling.sampler.as_str() {
            "sobol" | "uniform-random" => {}
            other => bail!("unknown sampler `{other}`"),
        }
        match self.optimizer.algorithm.as_str() {
            "lbfgs" | "adam" => {}
            other => bail!("unknown optimizer `{other}`"),
        }
        if self.loss.reg_exponent != 1 && self.loss.reg_exponent != 2 {
            bail!("reg_exponent must be 1 or 2");
        }
        if self.network.hidden_layers == 0 || self.network.hidden_width == 0 {
            bail!("network needs at least one hidden layer and unit");
        }
        if self.quadrature.n_mu == 0 {
            bail!("quadrature needs n_mu >= 1");
        }
        Ok(())
    }

    /// Canonical TOML serialization (field order fixed by the struct).
    pub fn canonical_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 prefix of the canonical serialization, with the output
    /// directory normalized out so relocating a run does not change its
    /// scientific identity.
    pub fn hash(&self) -> String {
        let mut normalized = self.clone();
        normalized.out_dir = String::new();
        let digest = Sha256::digest(normalized.canonical_toml().as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    pub fn sampler(&self) -> rte_pinn::sampling::Sampler {
        match self.sampling.sampler.as_str() {
            "uniform-random" => rte_pinn::sampling::Sampler::UniformRandom,
            _ => rte_pinn::sampling::Sampler::Sobol,
        }
    }

    pub fn loss_config(&self) -> rte_pinn::residuals::LossConfig {
        rte_pinn::residuals::LossConfig {
            lambda: self.loss.lambda,
            lambda_reg: self.loss.lambda_reg,
            reg_exponent: if self.loss.reg_exponent == 1 {
                rte_pinn::residuals::RegExponent::L1
            } else {
                rte_pinn::residuals::RegExponent::L2
            },
            lambda_tikhonov: self.loss.lambda_tikhonov,
            k_boundary_weight: self.loss.k_boundary_weight,
        }
    }

    pub fn optimizer_config(&self) -> rte_pinn::training::OptimizerConfig {
        let algorithm = match self.optimizer.algorithm.as_str() {
            "adam" => rte_pinn::training::Algorithm::Adam(rte_pinn::training::AdamParams {
                learning_rate: self.optimizer.adam_learning_rate,
                beta1: self.optimizer.adam_beta1,
                beta2: self.optimizer.adam_beta2,
                epsilon: self.optimizer.adam_epsilon,
            }),
            _ => rte_pinn::training::Algorithm::Lbfgs(rte_pinn::training::LbfgsParams {
                history: self.optimizer.lbfgs_history,
                wolfe_c1: self.optimizer.wolfe_c1,
                wolfe_c2: self.optimizer.wolfe_c2,
                max_line_search: self.optimizer.max_line_search,
            }),
        };
        rte_pinn::training::OptimizerConfig {
            algorithm,
            max_iterations: self.optimizer.max_iterations,
            gradient_tolerance: self.optimizer.gradient_tolerance,
            loss_change_tolerance: self.optimizer.loss_change_tolerance,
        }
    }

    /// Network widths for the intensity net on a given input dimension.
    pub fn u_widths(&self, input_dim: usize) -> Vec<usize> {
        widths(input_dim, self.network.hidden_layers, self.network.hidden_width)
    }

    /// Absorption-net widths (falls back to the intensity configuration).
    pub fn k_widths(&self, input_dim: usize) -> Vec<usize> {
        let layers = if self.network.k_hidden_layers > 0 {
            self.network.k_hidden_layers
        } else {
            self.network.hidden_layers
        };
        let width = if self.network.k_hidden_width > 0 {
            self.network.k_hidden_width
        } else {
            self.network.hidden_width
        };
        widths(input_dim, layers, width)
    }

    /// Resolve the output directory against `RTE_PINN_OUT` when relative.
    pub fn resolved_out_dir(&self) -> std::path::PathBuf {
        let path = std::path::PathBuf::from(&self.out_dir);
        if path.is_absolute() {
            return path;
        }
        match std::env::var_os("RTE_PINN_OUT") {
            Some(root) => std::path::PathBuf::from(root).join(path),
            None => path,
        }
    }
}

fn widths(input_dim: usize, layers: usize, width: usize) -> Vec<usize> {
    std::iter::once(input_dim)
        .chain(std::iter::repeat_n(width, layers))
        .chain(std::iter::once(1))
        .collect()
}

/// Apply one `a.b.c=value` override onto the raw TOML tree.
fn apply_override(root: &mut toml::Value, entry: &str) -> Result<()> {
    let (path, raw) = entry
        .split_once('=')
        .with_context(|| format!("override `{entry}` is not of the form key=value"))?;
    let parsed: toml::Value = match raw.parse::<i64>() {
        Ok(i) => toml::Value::Integer(i),
        Err(_) => match raw.parse::<f64>() {
            Ok(f) => toml::Value::Float(f),
            Err(_) => match raw {
                "true" => toml::Value::Boolean(true),
                "false" => toml::Value::Boolean(false),
                s if s.starts_with('[') => {
                    // A bare array is not a TOML document; parse it behind
                    // a scratch key.
                    let doc: toml::Value = format!("value = {s}")
                        .parse()
                        .with_context(|| format!("override array `{s}` is not valid TOML"))?;
                    doc.get("value").cloned().expect("key just inserted")
                }
                s => toml::Value::String(s.to_string()),
            },
        },
    };
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .with_context(|| format!("override path `{path}` crosses a non-table"))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    unreachable!("loop returns on the last segment")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn overrides_take_precedence() {
        let config = RunConfig::load(
            None,
            &[
                "problem=cube3d-mono".into(),
                "sampling.n_interior=4096".into(),
                "loss.lambda=1.5".into(),
                "optimizer.algorithm=adam".into(),
            ],
        )
        .unwrap();
        assert_eq!(config.problem, "cube3d-mono");
        assert_eq!(config.sampling.n_interior, 4096);
        assert_eq!(config.loss.lambda, 1.5);
        assert_eq!(config.optimizer.algorithm, "adam");
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(RunConfig::load(None, &["problem=warp-core".into()]).is_err());
        assert!(RunConfig::load(None, &["loss.reg_exponent=3".into()]).is_err());
        assert!(RunConfig::load(None, &["sampling.sampler=dice".into()]).is_err());
        assert!(RunConfig::load(None, &["no_such_key=1".into()]).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::default();
        let b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::load(None, &["seed=1".into()]).unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
