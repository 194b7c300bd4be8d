//! Optimizers and the ensemble-training harness.
//!
//! Training is full batch: every step sees the gradient of the complete
//! composite loss. Runs are deterministic per `(seed, config)`; the only
//! parallelism inside a run is the chunked loss assembly, which is
//! schedule-independent.

mod adam;
mod lbfgs;

pub use adam::{adam_step, AdamParams, AdamState};
pub use lbfgs::{LbfgsParams, LbfgsState};

use crate::network::{init_network, InitScheme};
use crate::problems::RteProblem;
use crate::quadrature::SphereRule;
use crate::residuals::{
    total_loss_with_grad, LossConfig, LossReport, PinnModel,
};
use crate::sampling::TrainingSets;
use crate::{Error, Result};
use rayon::prelude::*;
use std::time::Instant;

/// Measured incident radiation closure used by inverse mode.
pub type MeasuredFn<'a> = dyn Fn(f64, &[f64; 3], f64) -> f64 + Sync + 'a;

/// Which optimizer drives a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Adam(AdamParams),
    Lbfgs(LbfgsParams),
}

/// Optimizer settings shared by both algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub max_iterations: usize,
    /// Stop when the max-norm of the gradient falls below this.
    pub gradient_tolerance: f64,
    /// Stop when the relative loss decrease stays below this.
    pub loss_change_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            algorithm: Algorithm::Lbfgs(LbfgsParams::default()),
            max_iterations: 500,
            gradient_tolerance: 1e-10,
            loss_change_tolerance: 0.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gradient_tolerance < 0.0 || self.loss_change_tolerance < 0.0 {
            return Err(Error::config("tolerances must be nonnegative"));
        }
        match &self.algorithm {
            Algorithm::Adam(p) => p.validate(),
            Algorithm::Lbfgs(p) => p.validate(),
        }
    }
}

/// One accepted iterate of a run.
#[derive(Debug, Clone, Copy)]
pub struct HistoryRow {
    pub iteration: usize,
    pub report: LossReport,
    /// Smallest loss seen up to and including this iterate.
    pub best_so_far: f64,
}

/// Outcome of a single optimization run.
#[derive(Debug, Clone)]
pub struct OptimizationRun {
    /// Parameters of the best iterate encountered.
    pub theta: Vec<f64>,
    pub best_loss: f64,
    pub history: Vec<HistoryRow>,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: Vec<String>,
}

/// Objective: loss, gradient and report at `theta`.
pub type ObjectiveFn<'a> = dyn FnMut(&[f64]) -> Result<(f64, Vec<f64>, LossReport)> + 'a;

/// Minimize a generic objective from `theta0`.
///
/// A zero-iteration budget records the initial point and returns it. Steps
/// into non-finite regions are rejected by the line search; if no finite
/// decrease can be found the run stops at the last good iterate.
pub fn minimize(
    objective: &mut ObjectiveFn,
    theta0: Vec<f64>,
    config: &OptimizerConfig,
) -> Result<OptimizationRun> {
    config.validate()?;
    match &config.algorithm {
        Algorithm::Adam(params) => adam::run(objective, theta0, params, config),
        Algorithm::Lbfgs(params) => lbfgs::run(objective, theta0, params, config),
    }
}

/// Everything a training run needs besides the model and optimizer.
#[derive(Clone, Copy)]
pub struct TrainSetup<'a> {
    pub problem: &'a RteProblem,
    pub sets: &'a TrainingSets,
    pub rule: &'a SphereRule,
    pub loss: &'a LossConfig,
    pub measured_g: Option<&'a MeasuredFn<'a>>,
}

/// A trained model with its per-iteration history.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: PinnModel,
    pub best_loss: f64,
    pub history: Vec<HistoryRow>,
    pub converged: bool,
    pub wall_seconds: f64,
    pub diagnostics: Vec<String>,
}

impl TrainedModel {
    pub fn final_report(&self) -> LossReport {
        self.history.last().map(|h| h.report).unwrap_or_default()
    }
}

/// Train a model on the setup with the given optimizer.
pub fn train(
    setup: &TrainSetup,
    mut model: PinnModel,
    optimizer: &OptimizerConfig,
) -> Result<TrainedModel> {
    let start = Instant::now();
    let mut scratch = model.clone();
    let mut objective = |theta: &[f64]| {
        scratch.set_from_flat(theta);
        let (report, grad) = total_loss_with_grad(
            &scratch,
            setup.problem,
            setup.sets,
            setup.rule,
            setup.loss,
            setup.measured_g,
        )?;
        Ok((report.total, grad, report))
    };
    let run = minimize(&mut objective, model.flatten(), optimizer)?;
    model.set_from_flat(&run.theta);
    Ok(TrainedModel {
        model,
        best_loss: run.best_loss,
        history: run.history,
        converged: run.converged,
        wall_seconds: start.elapsed().as_secs_f64(),
        diagnostics: run.diagnostics,
    })
}

/// Hyperparameter grid of the ensemble procedure: every combination of the
/// listed values is trained `retrainings` times from different random
/// initializations and the smallest training loss wins.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleGrid {
    pub hidden_layers: Vec<usize>,
    pub hidden_width: Vec<usize>,
    pub lambda: Vec<f64>,
    pub lambda_reg: Vec<f64>,
    pub retrainings: usize,
    pub seed_base: u64,
}

impl EnsembleGrid {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.is_empty()
            || self.hidden_width.is_empty()
            || self.lambda.is_empty()
            || self.lambda_reg.is_empty()
        {
            return Err(Error::config("ensemble grid lists must be nonempty"));
        }
        if self.retrainings == 0 {
            return Err(Error::config("ensemble needs at least one retraining"));
        }
        Ok(())
    }

    /// All `(configuration, retraining)` combinations. The seed of each run
    /// is derived from the configuration values, not its position, so
    /// permuting the grid lists permutes the runs without changing them.
    pub fn enumerate(&self) -> Vec<EnsembleRunSpec> {
        let mut specs = Vec::new();
        for &layers in &self.hidden_layers {
            for &width in &self.hidden_width {
                for &lambda in &self.lambda {
                    for &lambda_reg in &self.lambda_reg {
                        for retrain in 0..self.retrainings {
                            let spec = EnsembleRunSpec {
                                hidden_layers: layers,
                                hidden_width: width,
                                lambda,
                                lambda_reg,
                                retrain_index: retrain,
                                seed: 0,
                            };
                            specs.push(EnsembleRunSpec {
                                seed: spec.content_seed(self.seed_base),
                                ..spec
                            });
                        }
                    }
                }
            }
        }
        specs
    }
}

/// One run of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleRunSpec {
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub lambda: f64,
    pub lambda_reg: f64,
    pub retrain_index: usize,
    pub seed: u64,
}

impl EnsembleRunSpec {
    /// FNV-1a over the configuration values; position-independent.
    fn content_seed(&self, base: u64) -> u64 {
        let mut h = 0xcbf29ce484222325u64 ^ base;
        let mut eat = |v: u64| {
            for byte in v.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.hidden_layers as u64);
        eat(self.hidden_width as u64);
        eat(self.lambda.to_bits());
        eat(self.lambda_reg.to_bits());
        eat(self.retrain_index as u64);
        h
    }

    /// Network widths for a given input dimension.
    pub fn widths(&self, input_dim: usize) -> Vec<usize> {
        std::iter::once(input_dim)
            .chain(std::iter::repeat_n(self.hidden_width, self.hidden_layers))
            .chain(std::iter::once(1))
            .collect()
    }
}

/// Leaderboard entry of an ensemble run.
#[derive(Debug, Clone)]
pub struct LeaderboardRow {
    pub spec: EnsembleRunSpec,
    pub final_loss: Option<f64>,
    pub report: Option<LossReport>,
    pub wall_seconds: f64,
    pub error: Option<String>,
}

/// Ensemble outcome: the winning model plus the full leaderboard sorted by
/// ascending final loss (failed runs at the end).
#[derive(Debug, Clone)]
pub struct EnsembleOutcome {
    pub best: TrainedModel,
    pub best_spec: EnsembleRunSpec,
    pub leaderboard: Vec<LeaderboardRow>,
}

/// Model family trained by the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Forward,
    Inverse,
}

/// Train every grid combination and select the smallest training loss.
///
/// `base_loss` supplies the weights not covered by the grid (`lambda` and
/// `lambda_reg` are overridden per run). Individual run failures are
/// recorded on the leaderboard and are fatal only if every run fails.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_train(
    problem: &RteProblem,
    sets: &TrainingSets,
    rule: &SphereRule,
    base_loss: &LossConfig,
    measured_g: Option<&MeasuredFn<'_>>,
    grid: &EnsembleGrid,
    optimizer: &OptimizerConfig,
    kind: ModelKind,
) -> Result<EnsembleOutcome> {
    grid.validate()?;
    let specs = grid.enumerate();
    let input_dim = problem.domain.input_dim();
    let k_input_dim = crate::residuals::absorption_input_dim(&problem.domain);

    let results: Vec<(EnsembleRunSpec, Result<TrainedModel>)> = specs
        .par_iter()
        .map(|spec| {
            let mut loss = *base_loss;
            loss.lambda = spec.lambda;
            loss.lambda_reg = spec.lambda_reg;
            let setup = TrainSetup {
                problem,
                sets,
                rule,
                loss: &loss,
                measured_g,
            };
            let outcome = build_model(spec, input_dim, k_input_dim, kind)
                .and_then(|model| train(&setup, model, optimizer));
            (*spec, outcome)
        })
        .collect();

    let mut leaderboard: Vec<LeaderboardRow> = Vec::with_capacity(results.len());
    let mut trained: Vec<Option<TrainedModel>> = Vec::with_capacity(results.len());
    for (spec, outcome) in results {
        match outcome {
            Ok(model) => {
                leaderboard.push(LeaderboardRow {
                    spec,
                    final_loss: Some(model.best_loss),
                    report: Some(model.final_report()),
                    wall_seconds: model.wall_seconds,
                    error: None,
                });
                trained.push(Some(model));
            }
            Err(err) => {
                leaderboard.push(LeaderboardRow {
                    spec,
                    final_loss: None,
                    report: None,
                    wall_seconds: 0.0,
                    error: Some(err.to_string()),
                });
                trained.push(None);
            }
        }
    }

    let best_index = leaderboard
        .iter()
        .enumerate()
        .filter_map(|(i, row)| row.final_loss.map(|l| (i, l)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::config("every ensemble run failed"))?;
    let best = trained[best_index].take().expect("successful run");
    let best_spec = leaderboard[best_index].spec;

    leaderboard.sort_by(|a, b| match (a.final_loss, b.final_loss) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });

    Ok(EnsembleOutcome {
        best,
        best_spec,
        leaderboard,
    })
}

fn build_model(
    spec: &EnsembleRunSpec,
    input_dim: usize,
    k_input_dim: usize,
    kind: ModelKind,
) -> Result<PinnModel> {
    let u = init_network(&spec.widths(input_dim), spec.seed, InitScheme::XavierUniform)?;
    Ok(match kind {
        ModelKind::Forward => PinnModel::Forward { u },
        ModelKind::Inverse => {
            // The absorption network reuses the run's hidden configuration.
            let k = init_network(
                &spec.widths(k_input_dim),
                spec.seed.wrapping_add(0x9e3779b9),
                InitScheme::XavierUniform,
            )?;
            PinnModel::Inverse { u, k }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_objective(center: Vec<f64>) -> impl FnMut(&[f64]) -> Result<(f64, Vec<f64>, LossReport)> {
        move |theta: &[f64]| {
            let diff: Vec<f64> = theta.iter().zip(&center).map(|(t, c)| t - c).collect();
            let loss: f64 = diff.iter().map(|d| d * d).sum();
            let grad: Vec<f64> = diff.iter().map(|d| 2.0 * d).collect();
            let report = LossReport {
                total: loss,
                ..LossReport::default()
            };
            Ok((loss, grad, report))
        }
    }

    #[test]
    fn zero_iteration_budget_returns_initial_point() {
        let mut obj = quadratic_objective(vec![1.0, -2.0]);
        let config = OptimizerConfig {
            max_iterations: 0,
            ..OptimizerConfig::default()
        };
        let run = minimize(&mut obj, vec![0.0, 0.0], &config).unwrap();
        assert_eq!(run.theta, vec![0.0, 0.0]);
        assert_eq!(run.history.len(), 1);
        assert_eq!(run.history[0].iteration, 0);
        assert_eq!(run.best_loss, 5.0);
    }

    #[test]
    fn lbfgs_solves_a_convex_quadratic_quickly() {
        // Anisotropic quadratic in 10 dims.
        let scales: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let mut obj = move |theta: &[f64]| {
            let loss: f64 = theta.iter().zip(&scales).map(|(t, s)| s * t * t).sum();
            let grad: Vec<f64> = theta.iter().zip(&scales).map(|(t, s)| 2.0 * s * t).collect();
            Ok((
                loss,
                grad,
                LossReport {
                    total: loss,
                    ..LossReport::default()
                },
            ))
        };
        let config = OptimizerConfig {
            algorithm: Algorithm::Lbfgs(LbfgsParams::default()),
            max_iterations: 50,
            gradient_tolerance: 1e-10,
            loss_change_tolerance: 0.0,
        };
        let run = minimize(&mut obj, vec![1.0; 10], &config).unwrap();
        assert!(run.converged, "history: {:?}", run.history.len());
        let (_, grad, _) = quadraticish(&run.theta);
        let gnorm = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        assert!(gnorm < 1e-10, "gradient norm {gnorm:e}");

        fn quadraticish(theta: &[f64]) -> (f64, Vec<f64>, ()) {
            let scales: Vec<f64> = (1..=10).map(|i| i as f64).collect();
            let grad: Vec<f64> = theta.iter().zip(&scales).map(|(t, s)| 2.0 * s * t).collect();
            (0.0, grad, ())
        }
    }

    #[test]
    fn lbfgs_never_increases_loss_between_accepted_iterates() {
        // Rosenbrock in 4 dims is a classic non-convex stress case.
        let mut obj = |theta: &[f64]| {
            let mut loss = 0.0;
            let mut grad = vec![0.0; theta.len()];
            for i in 0..theta.len() - 1 {
                let (a, b) = (theta[i], theta[i + 1]);
                loss += 100.0 * (b - a * a).powi(2) + (1.0 - a).powi(2);
                grad[i] += -400.0 * a * (b - a * a) - 2.0 * (1.0 - a);
                grad[i + 1] += 200.0 * (b - a * a);
            }
            Ok((
                loss,
                grad,
                LossReport {
                    total: loss,
                    ..LossReport::default()
                },
            ))
        };
        let config = OptimizerConfig {
            algorithm: Algorithm::Lbfgs(LbfgsParams::default()),
            max_iterations: 200,
            gradient_tolerance: 1e-12,
            loss_change_tolerance: 0.0,
        };
        let run = minimize(&mut obj, vec![-1.2, 1.0, -0.7, 1.3], &config).unwrap();
        for pair in run.history.windows(2) {
            assert!(
                pair[1].report.total <= pair[0].report.total + 1e-14,
                "loss increased: {} -> {}",
                pair[0].report.total,
                pair[1].report.total
            );
            assert!(pair[1].best_so_far <= pair[0].best_so_far);
        }
    }

    #[test]
    fn adam_contracts_a_scalar_quadratic() {
        let params = AdamParams {
            learning_rate: 0.1,
            ..AdamParams::default()
        };
        let config = OptimizerConfig {
            algorithm: Algorithm::Adam(params),
            max_iterations: 200,
            gradient_tolerance: 0.0,
            loss_change_tolerance: 0.0,
        };
        let mut obj = quadratic_objective(vec![0.0]);
        let run = minimize(&mut obj, vec![1.0], &config).unwrap();
        assert!(run.theta[0].abs() < 1e-3, "theta {}", run.theta[0]);
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut state = AdamState::new(3);
        let mut theta = vec![0.4, -0.2, 1.0];
        let before = theta.clone();
        adam_step(&mut state, &AdamParams::default(), &mut theta, &[0.0, 0.0, 0.0]);
        assert_eq!(theta, before);
    }

    #[test]
    fn grid_enumeration_matches_the_published_counts() {
        // 2 x 3 x 3 configurations x 5 retrainings = 90 runs.
        let grid = EnsembleGrid {
            hidden_layers: vec![4, 8],
            hidden_width: vec![16, 20, 24],
            lambda: vec![0.1, 1.0, 10.0],
            lambda_reg: vec![0.0],
            retrainings: 5,
            seed_base: 0,
        };
        let specs = grid.enumerate();
        assert_eq!(specs.len(), 90);
        // Distinct seeds per run.
        let mut seeds: Vec<u64> = specs.iter().map(|s| s.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 90);
    }

    #[test]
    fn run_seeds_are_position_independent() {
        let grid = EnsembleGrid {
            hidden_layers: vec![4, 8],
            hidden_width: vec![16, 24],
            lambda: vec![0.1, 1.0],
            lambda_reg: vec![0.0],
            retrainings: 2,
            seed_base: 7,
        };
        let permuted = EnsembleGrid {
            hidden_layers: vec![8, 4],
            hidden_width: vec![24, 16],
            lambda: vec![1.0, 0.1],
            ..grid.clone()
        };
        let mut a: Vec<(usize, usize, u64, u64)> = grid
            .enumerate()
            .iter()
            .map(|s| (s.hidden_layers, s.hidden_width, s.lambda.to_bits(), s.seed))
            .collect();
        let mut b: Vec<(usize, usize, u64, u64)> = permuted
            .enumerate()
            .iter()
            .map(|s| (s.hidden_layers, s.hidden_width, s.lambda.to_bits(), s.seed))
            .collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }
}
