//! ADAM with bias-corrected moment estimates, full-batch.

use super::{HistoryRow, OptimizationRun, OptimizerConfig};
use crate::{Error, Result};

/// ADAM hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamParams {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::config("adam learning rate must be positive"));
        }
        if !(0.0 < self.beta1 && self.beta1 < 1.0 && 0.0 < self.beta2 && self.beta2 < 1.0) {
            return Err(Error::config("adam betas must lie in (0, 1)"));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::config("adam epsilon must be positive"));
        }
        Ok(())
    }
}

/// First and second moment accumulators.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            step: 0,
        }
    }
}

/// One in-place ADAM update: biased moment update followed by the
/// bias-corrected parameter step.
pub fn adam_step(state: &mut AdamState, params: &AdamParams, theta: &mut [f64], grad: &[f64]) {
    assert_eq!(theta.len(), grad.len(), "gradient length mismatch");
    assert_eq!(theta.len(), state.m.len(), "state length mismatch");
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - params.beta1.powi(t);
    let bc2 = 1.0 - params.beta2.powi(t);
    for i in 0..theta.len() {
        state.m[i] = params.beta1 * state.m[i] + (1.0 - params.beta1) * grad[i];
        state.v[i] = params.beta2 * state.v[i] + (1.0 - params.beta2) * grad[i] * grad[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        theta[i] -= params.learning_rate * m_hat / (v_hat.sqrt() + params.epsilon);
    }
}

pub(super) fn run(
    objective: &mut super::ObjectiveFn,
    mut theta: Vec<f64>,
    params: &AdamParams,
    config: &OptimizerConfig,
) -> Result<OptimizationRun> {
    let (mut loss, mut grad, mut report) = objective(&theta)?;
    let mut state = AdamState::new(theta.len());
    let mut best_theta = theta.clone();
    let mut best_loss = loss;
    let mut history = vec![HistoryRow {
        iteration: 0,
        report,
        best_so_far: best_loss,
    }];
    let mut diagnostics = Vec::new();
    let mut converged = false;
    let mut stall = 0usize;

    for iter in 1..=config.max_iterations {
        let gnorm = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if gnorm <= config.gradient_tolerance {
            converged = true;
            break;
        }
        adam_step(&mut state, params, &mut theta, &grad);
        match objective(&theta) {
            Ok((l, g, r)) => {
                let improved = l < best_loss;
                if improved {
                    best_loss = l;
                    best_theta.copy_from_slice(&theta);
                }
                if (loss - l).abs() <= config.loss_change_tolerance * loss.abs().max(1.0) {
                    stall += 1;
                } else {
                    stall = 0;
                }
                loss = l;
                grad = g;
                report = r;
                history.push(HistoryRow {
                    iteration: iter,
                    report,
                    best_so_far: best_loss,
                });
                if config.loss_change_tolerance > 0.0 && stall >= 25 {
                    converged = true;
                    break;
                }
            }
            Err(Error::NonFinite(msg)) => {
                diagnostics.push(format!("iteration {iter}: aborted on non-finite loss ({msg})"));
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let iterations = history.last().map(|h| h.iteration).unwrap_or(0);
    Ok(OptimizationRun {
        theta: best_theta,
        best_loss,
        history,
        iterations,
        converged,
        diagnostics,
    })
}
