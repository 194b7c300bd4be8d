//! Ensemble harness behavior at tiny scale: selection invariance under
//! grid permutation and equivalence with independent runs.

use rte_pinn::problems::slab_problem;
use rte_pinn::quadrature::sphere_rule;
use rte_pinn::residuals::LossConfig;
use rte_pinn::sampling::{build_training_sets, Sampler};
use rte_pinn::training::{
    ensemble_train, Algorithm, EnsembleGrid, LbfgsParams, ModelKind, OptimizerConfig,
};

fn tiny_optimizer(iters: usize) -> OptimizerConfig {
    OptimizerConfig {
        algorithm: Algorithm::Lbfgs(LbfgsParams::default()),
        max_iterations: iters,
        gradient_tolerance: 1e-12,
        loss_change_tolerance: 0.0,
    }
}

#[test]
fn selection_is_invariant_under_grid_permutation() {
    let problem = slab_problem();
    let rule = sphere_rule(1, 6, 0).unwrap();
    let sets = build_training_sets(&problem.domain, 64, 16, 0, Sampler::Sobol, 0).unwrap();
    let loss = LossConfig::default();
    let grid = EnsembleGrid {
        hidden_layers: vec![1, 2],
        hidden_width: vec![4, 6],
        lambda: vec![0.1, 1.0],
        lambda_reg: vec![0.0],
        retrainings: 2,
        seed_base: 3,
    };
    let permuted = EnsembleGrid {
        hidden_layers: vec![2, 1],
        hidden_width: vec![6, 4],
        lambda: vec![1.0, 0.1],
        ..grid.clone()
    };
    let run = |g: &EnsembleGrid| {
        ensemble_train(
            &problem,
            &sets,
            &rule,
            &loss,
            None,
            g,
            &tiny_optimizer(5),
            ModelKind::Forward,
        )
        .unwrap()
    };
    let a = run(&grid);
    let b = run(&permuted);
    assert_eq!(a.best.best_loss.to_bits(), b.best.best_loss.to_bits());
    assert_eq!(a.leaderboard.len(), 16);
    // The sorted leaderboards carry the same losses.
    let la: Vec<u64> = a
        .leaderboard
        .iter()
        .filter_map(|r| r.final_loss.map(f64::to_bits))
        .collect();
    let lb: Vec<u64> = b
        .leaderboard
        .iter()
        .filter_map(|r| r.final_loss.map(f64::to_bits))
        .collect();
    assert_eq!(la, lb);
}

#[test]
fn single_config_grid_equals_independent_retrainings() {
    let problem = slab_problem();
    let rule = sphere_rule(1, 6, 0).unwrap();
    let sets = build_training_sets(&problem.domain, 64, 16, 0, Sampler::Sobol, 0).unwrap();
    let loss = LossConfig {
        lambda: 0.5,
        ..LossConfig::default()
    };
    let grid = EnsembleGrid {
        hidden_layers: vec![2],
        hidden_width: vec![5],
        lambda: vec![0.5],
        lambda_reg: vec![0.0],
        retrainings: 3,
        seed_base: 11,
    };
    let outcome = ensemble_train(
        &problem,
        &sets,
        &rule,
        &loss,
        None,
        &grid,
        &tiny_optimizer(3),
        ModelKind::Forward,
    )
    .unwrap();
    assert_eq!(outcome.leaderboard.len(), 3);

    // Re-run each spec independently through `train` and compare losses.
    let specs = grid.enumerate();
    let mut independent: Vec<f64> = specs
        .iter()
        .map(|spec| {
            let mut cfg = loss;
            cfg.lambda = spec.lambda;
            cfg.lambda_reg = spec.lambda_reg;
            let u = rte_pinn::network::init_network(
                &spec.widths(problem.domain.input_dim()),
                spec.seed,
                rte_pinn::network::InitScheme::XavierUniform,
            )
            .unwrap();
            let setup = rte_pinn::training::TrainSetup {
                problem: &problem,
                sets: &sets,
                rule: &rule,
                loss: &cfg,
                measured_g: None,
            };
            rte_pinn::training::train(
                &setup,
                rte_pinn::residuals::PinnModel::Forward { u },
                &tiny_optimizer(3),
            )
            .unwrap()
            .best_loss
        })
        .collect();
    independent.sort_by(f64::total_cmp);
    let from_ensemble: Vec<f64> = outcome
        .leaderboard
        .iter()
        .filter_map(|r| r.final_loss)
        .collect();
    assert_eq!(independent.len(), from_ensemble.len());
    for (a, b) in independent.iter().zip(&from_ensemble) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert_eq!(
        outcome.best.best_loss.to_bits(),
        independent[0].to_bits(),
        "best must match the minimum"
    );
}
