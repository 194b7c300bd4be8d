//! L-BFGS with two-loop recursion and a strong-Wolfe cubic line search.

use super::{HistoryRow, OptimizationRun, OptimizerConfig};
use crate::residuals::LossReport;
use crate::{Error, Result};
use std::collections::VecDeque;

/// L-BFGS hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsParams {
    /// Number of stored correction pairs.
    pub history: usize,
    /// Armijo constant `c1`.
    pub wolfe_c1: f64,
    /// Curvature constant `c2`.
    pub wolfe_c2: f64,
    /// Line-search evaluation budget per iteration.
    pub max_line_search: usize,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        LbfgsParams {
            history: 50,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            max_line_search: 25,
        }
    }
}

impl LbfgsParams {
    pub fn validate(&self) -> Result<()> {
        if self.history == 0 {
            return Err(Error::config("lbfgs history must be positive"));
        }
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(Error::config("wolfe constants need 0 < c1 < c2 < 1"));
        }
        if self.max_line_search == 0 {
            return Err(Error::config("line-search budget must be positive"));
        }
        Ok(())
    }
}

/// Stored correction pairs `(s, y, 1/(s.y))`.
#[derive(Debug, Clone, Default)]
pub struct LbfgsState {
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl LbfgsState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Record a pair; skipped when the curvature `s.y` is nonpositive (or
    /// numerically negligible).
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>, capacity: usize) -> bool {
        let sy = dot(&s, &y);
        let s_norm = dot(&s, &s).sqrt();
        let y_norm = dot(&y, &y).sqrt();
        if sy <= 1e-12 * s_norm * y_norm {
            return false;
        }
        if self.pairs.len() >= capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
        true
    }

    /// Two-loop recursion: `-H g`, with `H_0 = (s.y / y.y) I` from the most
    /// recent pair. Steepest descent when the history is empty.
    pub fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let mut q: Vec<f64> = grad.to_vec();
        if self.pairs.is_empty() {
            for v in q.iter_mut() {
                *v = -*v;
            }
            return q;
        }
        let mut alphas = vec![0.0; self.pairs.len()];
        for (i, (s, y, rho)) in self.pairs.iter().enumerate().rev() {
            let a = rho * dot(s, &q);
            alphas[i] = a;
            for (qj, yj) in q.iter_mut().zip(y) {
                *qj -= a * yj;
            }
        }
        let (s_last, y_last, _) = self.pairs.back().expect("nonempty");
        let gamma = dot(s_last, y_last) / dot(y_last, y_last);
        for v in q.iter_mut() {
            *v *= gamma;
        }
        for (i, (s, y, rho)) in self.pairs.iter().enumerate() {
            let beta = rho * dot(y, &q);
            let coeff = alphas[i] - beta;
            for (qj, sj) in q.iter_mut().zip(s) {
                *qj += coeff * sj;
            }
        }
        for v in q.iter_mut() {
            *v = -*v;
        }
        q
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct LinePoint {
    alpha: f64,
    loss: f64,
    grad: Vec<f64>,
    report: LossReport,
    slope: f64,
}

/// Evaluate `phi(alpha)` treating non-finite losses as `+inf` so the search
/// backs away from overflow regions.
fn eval_phi(
    objective: &mut super::ObjectiveFn,
    theta: &[f64],
    direction: &[f64],
    alpha: f64,
) -> Result<LinePoint> {
    let trial: Vec<f64> = theta
        .iter()
        .zip(direction)
        .map(|(t, d)| t + alpha * d)
        .collect();
    match objective(&trial) {
        Ok((loss, grad, report)) => {
            let slope = dot(&grad, direction);
            let loss = if loss.is_finite() { loss } else { f64::INFINITY };
            Ok(LinePoint {
                alpha,
                loss,
                grad,
                report,
                slope,
            })
        }
        Err(Error::NonFinite(_)) => Ok(LinePoint {
            alpha,
            loss: f64::INFINITY,
            grad: vec![0.0; theta.len()],
            report: LossReport::default(),
            slope: f64::INFINITY,
        }),
        Err(e) => Err(e),
    }
}

/// Cubic interpolation of the minimizer on a bracket (safeguarded).
fn cubic_interpolate(x1: f64, f1: f64, g1: f64, x2: f64, f2: f64, g2: f64) -> f64 {
    let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
    let d2sq = d1 * d1 - g1 * g2;
    if d2sq >= 0.0 {
        let d2 = d2sq.sqrt();
        let min_pos = if x1 <= x2 {
            x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
        } else {
            x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
        };
        min_pos.clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    }
}

/// Strong-Wolfe line search (bracket + zoom). Returns the accepted point or
/// `None` when the budget is exhausted without satisfying both conditions.
fn strong_wolfe(
    objective: &mut super::ObjectiveFn,
    theta: &[f64],
    direction: &[f64],
    f0: f64,
    slope0: f64,
    alpha_init: f64,
    params: &LbfgsParams,
) -> Result<Option<LinePoint>> {
    debug_assert!(slope0 < 0.0, "search direction must be a descent direction");
    let c1 = params.wolfe_c1;
    let c2 = params.wolfe_c2;
    let mut budget = params.max_line_search;

    let mut prev = LinePoint {
        alpha: 0.0,
        loss: f0,
        grad: Vec::new(),
        report: LossReport::default(),
        slope: slope0,
    };
    let mut alpha = alpha_init;
    let mut bracket: Option<(LinePoint, LinePoint)> = None;

    while budget > 0 {
        budget -= 1;
        let point = eval_phi(objective, theta, direction, alpha)?;
        if point.loss > f0 + c1 * point.alpha * slope0 || (prev.alpha > 0.0 && point.loss >= prev.loss)
        {
            bracket = Some((prev, point));
            break;
        }
        if point.slope.abs() <= -c2 * slope0 {
            return Ok(Some(point));
        }
        if point.slope >= 0.0 {
            bracket = Some((point, prev));
            break;
        }
        let next = (2.0 * alpha).min(1e10);
        prev = point;
        alpha = next;
    }

    let (mut lo, mut hi) = match bracket {
        Some(pair) => pair,
        None => return Ok(None),
    };

    // Zoom phase: shrink the bracket with cubic steps.
    while budget > 0 {
        budget -= 1;
        let span = (hi.alpha - lo.alpha).abs();
        if span < 1e-18 {
            break;
        }
        let mut alpha_j = cubic_interpolate(lo.alpha, lo.loss, lo.slope, hi.alpha, hi.loss, hi.slope);
        // Keep strictly inside the bracket.
        let margin = 1e-4 * span;
        let (a_min, a_max) = if lo.alpha < hi.alpha {
            (lo.alpha, hi.alpha)
        } else {
            (hi.alpha, lo.alpha)
        };
        if !alpha_j.is_finite() || (alpha_j - a_min).min(a_max - alpha_j) < margin {
            alpha_j = 0.5 * (a_min + a_max);
        }
        let point = eval_phi(objective, theta, direction, alpha_j)?;
        if point.loss > f0 + c1 * point.alpha * slope0 || point.loss >= lo.loss {
            hi = point;
        } else {
            if point.slope.abs() <= -c2 * slope0 {
                return Ok(Some(point));
            }
            if point.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = point;
        }
    }
    // Budget exhausted: accept the best bracketed decrease if there is one.
    if lo.alpha > 0.0 && lo.loss < f0 && lo.loss.is_finite() {
        return Ok(Some(lo));
    }
    Ok(None)
}

pub(super) fn run(
    objective: &mut super::ObjectiveFn,
    mut theta: Vec<f64>,
    params: &LbfgsParams,
    config: &OptimizerConfig,
) -> Result<OptimizationRun> {
    params.validate()?;
    let (mut loss, mut grad, report) = objective(&theta)?;
    let mut state = LbfgsState::new();
    let mut best_theta = theta.clone();
    let mut best_loss = loss;
    let mut history = vec![HistoryRow {
        iteration: 0,
        report,
        best_so_far: best_loss,
    }];
    let mut diagnostics = Vec::new();
    let mut converged = false;

    for iter in 1..=config.max_iterations {
        let gnorm = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if gnorm <= config.gradient_tolerance {
            converged = true;
            break;
        }
        let mut direction = state.direction(&grad);
        let mut slope = dot(&grad, &direction);
        if slope >= 0.0 {
            // Not a descent direction (stale curvature); restart from
            // steepest descent.
            diagnostics.push(format!("iteration {iter}: reset history, non-descent direction"));
            state.clear();
            direction = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &direction);
        }
        let alpha_init = if iter == 1 {
            (1.0f64).min(1.0 / grad.iter().map(|g| g.abs()).sum::<f64>().max(1e-12))
        } else {
            1.0
        };
        let accepted = strong_wolfe(objective, &theta, &direction, loss, slope, alpha_init, params)?;
        let point = match accepted {
            Some(p) => p,
            None => {
                // Wolfe search failed: fall back to simple Armijo
                // backtracking along the negative gradient.
                diagnostics
                    .push(format!("iteration {iter}: line search failed, gradient fallback"));
                let fallback_dir: Vec<f64> = grad.iter().map(|g| -g).collect();
                let fb_slope = dot(&grad, &fallback_dir);
                let mut alpha = 1.0 / gnorm.max(1.0);
                let mut found = None;
                for _ in 0..30 {
                    let p = eval_phi(objective, &theta, &fallback_dir, alpha)?;
                    if p.loss < loss + params.wolfe_c1 * alpha * fb_slope {
                        found = Some(p);
                        break;
                    }
                    alpha *= 0.25;
                }
                match found {
                    Some(p) => {
                        state.clear();
                        std::mem::drop(std::mem::replace(&mut direction, fallback_dir));
                        p
                    }
                    None => {
                        diagnostics.push(format!(
                            "iteration {iter}: no descent found, stopping at the best iterate"
                        ));
                        break;
                    }
                }
            }
        };

        // Accepted iterate: update the pair history and bookkeeping.
        let step: Vec<f64> = direction.iter().map(|d| d * point.alpha).collect();
        let y: Vec<f64> = point.grad.iter().zip(&grad).map(|(n, o)| n - o).collect();
        state.push(step.clone(), y, params.history);
        for (t, s) in theta.iter_mut().zip(&step) {
            *t += s;
        }
        let loss_change = loss - point.loss;
        loss = point.loss;
        grad = point.grad;
        if loss < best_loss {
            best_loss = loss;
            best_theta.copy_from_slice(&theta);
        }
        history.push(HistoryRow {
            iteration: iter,
            report: point.report,
            best_so_far: best_loss,
        });
        if config.loss_change_tolerance > 0.0
            && loss_change.abs() <= config.loss_change_tolerance * loss.abs().max(1.0)
        {
            converged = true;
            break;
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
