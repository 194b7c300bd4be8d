//! Train the desk-scale slab benchmark and print the training error trajectory.

use rte_pinn::network::{init_network, InitScheme};
use rte_pinn::problems::slab_problem;
use rte_pinn::quadrature::sphere_rule;
use rte_pinn::residuals::{LossConfig, PinnModel};
use rte_pinn::sampling::{build_training_sets, Sampler};
use rte_pinn::training::{train, Algorithm, LbfgsParams, OptimizerConfig, TrainSetup};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let iters: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(500);
    let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0);
    let lambda: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0.1);

    let problem = slab_problem();
    let rule = sphere_rule(1, 10, 0).unwrap();
    let sets = build_training_sets(&problem.domain, 2048, 512, 0, Sampler::Sobol, 0).unwrap();
    let u = init_network(&[2, 16, 16, 16, 16, 1], seed, InitScheme::XavierUniform).unwrap();
    let model = PinnModel::Forward { u };
    let loss = LossConfig {
        lambda,
        ..LossConfig::default()
    };
    let setup = TrainSetup {
        problem: &problem,
        sets: &sets,
        rule: &rule,
        loss: &loss,
        measured_g: None,
    };
    let optimizer = OptimizerConfig {
        algorithm: Algorithm::Lbfgs(LbfgsParams::default()),
        max_iterations: iters,
        gradient_tolerance: 1e-12,
        loss_change_tolerance: 0.0,
    };
    let t0 = std::time::Instant::now();
    let trained = train(&setup, model, &optimizer).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    for row in trained.history.iter().step_by(100.max(iters / 20)) {
        println!(
            "iter {:5}  J {:.3e}  E_T {:.3e}  E_int {:.3e}  E_sb {:.3e}",
            row.iteration,
            row.report.total,
            row.report.training_error(),
            row.report.training_error_interior(),
            row.report.training_error_spatial(),
        );
    }
    let last = trained.history.last().unwrap();
    println!(
        "final iter {}  J {:.3e}  E_T {:.3e}  wall {dt:.1}s  converged {}  diagnostics {}",
        last.iteration,
        last.report.total,
        last.report.training_error(),
        trained.converged,
        trained.diagnostics.len()
    );
}
