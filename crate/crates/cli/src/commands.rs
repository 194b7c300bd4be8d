//! The CLI verbs: forward solve, inverse solve, ensemble, oracle suite and
//! the standalone bound evaluator.

use crate::artifacts::{
    self, bound_json, header_block, write_fields_csv, write_history_csv, write_leaderboard_csv,
    FieldGrid,
};
use crate::config::RunConfig;
use crate::svg::Heatmap;
use anyhow::{anyhow, bail, Context, Result};
use rte_pinn::bounds::{
    check_assumption, empirical_generalization_error, transient_bound, steady_bound, psi_sup,
    BoundInputs, EvaluationGrid, SteadyBound,
};
use rte_pinn::network::{init_network, save_checkpoint, InitScheme, MlpNetwork};
use rte_pinn::problems::{problem_by_name, RteProblem};
use rte_pinn::quadrature::{incident_radiation, sphere_rule, SphereRule};
use rte_pinn::residuals::{
    AbsorptionField, IntensityField, NetworkAbsorption, NetworkIntensity, PinnModel,
};
use rte_pinn::sampling::{
    build_data_points, build_training_sets, FrequencyAxis, PhasePoint, Sampler, TrainingSets,
};
use rte_pinn::training::{
    ensemble_train, train, EnsembleGrid, ModelKind, TrainSetup, TrainedModel,
};
use std::fmt::Write as _;
use std::path::PathBuf;

/// Marker for errors that should exit with the configuration status code.
#[derive(Debug)]
pub struct ConfigStage(pub String);

impl std::fmt::Display for ConfigStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigStage {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigStage(msg.into()))
}

/// Wrap core errors, promoting configuration problems to the config stage.
fn lift(err: rte_pinn::Error) -> anyhow::Error {
    match err {
        rte_pinn::Error::Config(msg) => config_err(msg),
        other => anyhow!(other),
    }
}

struct Prepared {
    problem: RteProblem,
    rule: SphereRule,
    sets: TrainingSets,
    out_dir: PathBuf,
}

fn prepare(config: &RunConfig, inverse: bool) -> Result<Prepared> {
    let problem = problem_by_name(&config.problem, config.k_nu).map_err(lift)?;
    let rule = sphere_rule(
        problem.domain.spatial_dim,
        config.quadrature.n_mu,
        config.quadrature.n_phi,
    )
    .map_err(lift)?;
    let mut sets = build_training_sets(
        &problem.domain,
        config.sampling.n_interior,
        config.sampling.n_spatial_boundary,
        config.sampling.n_temporal_boundary,
        config.sampler(),
        config.seed,
    )
    .map_err(lift)?;
    if inverse {
        if config.problem != "inverse-cube" {
            return Err(config_err(format!(
                "inverse mode needs measured data; only `inverse-cube` provides it, got `{}`",
                config.problem
            )));
        }
        if config.sampling.n_data == 0 {
            return Err(config_err("inverse mode requires sampling.n_data > 0"));
        }
        // Measurement locations are uniformly distributed.
        sets.data = build_data_points(
            &problem.domain,
            config.sampling.n_data,
            Sampler::UniformRandom,
            config.seed.wrapping_add(3),
        )
        .map_err(lift)?;
    }
    Ok(Prepared {
        problem,
        rule,
        sets,
        out_dir: config.resolved_out_dir(),
    })
}

fn echo_dry_run(config: &RunConfig, prep: &Prepared) {
    println!("# dry run: no training performed");
    println!("# resolved output directory: {}", prep.out_dir.display());
    println!(
        "# domain input dim: {}, N_S: {}",
        prep.problem.domain.input_dim(),
        prep.rule.len()
    );
    print!("{}", config.canonical_toml());
}

fn write_common_artifacts(
    config: &RunConfig,
    prep: &Prepared,
    trained: &TrainedModel,
) -> Result<()> {
    std::fs::create_dir_all(&prep.out_dir)
        .with_context(|| format!("creating {}", prep.out_dir.display()))?;
    std::fs::write(prep.out_dir.join("config.toml"), config.canonical_toml())?;
    write_history_csv(&prep.out_dir.join("history.csv"), config, &trained.history)?;
    let nets: Vec<&MlpNetwork> = match &trained.model {
        PinnModel::Forward { u } => vec![u],
        PinnModel::Inverse { u, k } => vec![u, k],
    };
    save_checkpoint(&prep.out_dir.join("model.ckpt"), &nets)?;
    if !trained.diagnostics.is_empty() {
        std::fs::write(
            prep.out_dir.join("diagnostics.txt"),
            trained.diagnostics.join("\n") + "\n",
        )?;
    }
    Ok(())
}

/// Estimate coefficient ranges over the interior points (for bound inputs).
fn coefficient_ranges(problem: &RteProblem, sets: &TrainingSets) -> (f64, f64, f64, f64) {
    let mut k_min = f64::INFINITY;
    let mut sigma_min = f64::INFINITY;
    let mut sigma_max: f64 = 0.0;
    let mut sigma_sup: f64 = 0.0;
    for ip in &sets.interior {
        let k = (problem.absorption)(&ip.point.x, ip.point.nu);
        let s = (problem.scattering)(&ip.point.x, ip.point.nu);
        k_min = k_min.min(k);
        sigma_min = sigma_min.min(s);
        sigma_max = sigma_max.max(s);
        sigma_sup = sigma_sup.max(s);
    }
    if !k_min.is_finite() {
        k_min = 0.0;
        sigma_min = 0.0;
    }
    (k_min, sigma_min, sigma_max, sigma_sup)
}

fn bound_inputs_from_run(
    config: &RunConfig,
    prep: &Prepared,
    trained: Option<&TrainedModel>,
) -> BoundInputs {
    let problem = &prep.problem;
    let mut inputs = BoundInputs::new(problem.domain.spatial_dim);
    if let Some(t) = trained {
        let report = t.final_report();
        inputs.training_error_interior = report.training_error_interior();
        inputs.training_error_spatial = report.training_error_spatial();
        inputs.training_error_temporal = report.training_error_temporal();
    } else {
        inputs.training_error_interior = config.bound.training_error_interior;
        inputs.training_error_spatial = config.bound.training_error_spatial;
        inputs.training_error_temporal = config.bound.training_error_temporal;
    }
    inputs.n_int = prep.sets.interior.len().max(1);
    inputs.n_sb = prep.sets.spatial_boundary.len().max(1);
    inputs.n_tb = prep.sets.temporal_boundary.len().max(1);
    inputs.n_s = prep.rule.len().max(1);
    inputs.quadrature_order = config.quadrature.n_mu;
    inputs.time_horizon = if problem.is_steady() {
        0.0
    } else {
        problem.domain.time_horizon
    };
    inputs.light_speed = if problem.inv_c() > 0.0 {
        1.0 / problem.inv_c()
    } else {
        1.0
    };
    inputs.surface_area = problem.surface_area();
    let freqs = match problem.domain.frequency {
        FrequencyAxis::Monochromatic => vec![0.0],
        FrequencyAxis::Band { lo, hi, .. } => vec![lo, 0.5 * (lo + hi), hi],
    };
    inputs.psi_sup = psi_sup(problem.kernel.as_ref(), &prep.rule, &freqs);
    let (k_min, s_min, s_max, s_sup) = coefficient_ranges(problem, &prep.sets);
    inputs.absorption_min = k_min;
    inputs.sigma_min = s_min;
    inputs.sigma_max = s_max;
    inputs.sigma_sup = s_sup;
    let v = config.bound.variation;
    inputs.vhk_interior = v;
    inputs.vhk_spatial = v;
    inputs.vhk_temporal = v;
    inputs.c_bar = v;
    if config.bound.c_eps > 0.0 {
        inputs.c_eps = Some(config.bound.c_eps);
    }
    inputs
}

fn write_bound_report(config: &RunConfig, prep: &Prepared, trained: &TrainedModel) -> Result<()> {
    let inputs = bound_inputs_from_run(config, prep, Some(trained));
    let (transient, steady) = if prep.problem.is_steady() {
        (None, Some(steady_bound(&inputs).map_err(lift)?))
    } else {
        (Some(transient_bound(&inputs).map_err(lift)?), None)
    };
    std::fs::write(
        prep.out_dir.join("bound.json"),
        bound_json(config, &inputs, transient.as_ref(), steady.as_ref()),
    )?;
    Ok(())
}

fn write_heatmap(config: &RunConfig, prep: &Prepared, trained: &TrainedModel) -> Result<()> {
    let problem = &prep.problem;
    let domain = &problem.domain;
    let net = trained.model.u_net();
    let field = NetworkIntensity { net, domain };
    let header = header_block(config);
    let res_x = config.evaluation.spatial_resolution.max(2);
    let res_y = config.evaluation.angular_resolution.max(2);
    let map = match config.problem.as_str() {
        "slab1d" => {
            // Intensity over the (x, mu) plane.
            let xs = artifacts::linspace(0.0, 1.0, res_x);
            let mus = artifacts::linspace(-1.0, 1.0, res_y);
            let values: Vec<Vec<f64>> = mus
                .iter()
                .map(|&mu| {
                    xs.iter()
                        .map(|&x| {
                            field.value(&PhasePoint::steady([x, 0.0, 0.0], [mu, 0.0, 0.0], 0.0))
                        })
                        .collect()
                })
                .collect();
            Heatmap {
                title: "radiative intensity u(x, mu)",
                x_label: "x",
                y_label: "mu",
                values: &values,
                header_comment: &header,
            }
            .render()
        }
        "shell-time" => {
            // Incident radiation in the (r, nu) plane at final time,
            // log-spaced frequencies, physical units.
            let (r_lo, r_hi) = match domain.geometry {
                rte_pinn::sampling::Geometry::SphericalShell { r_inner, r_outer } => {
                    (r_inner, r_outer)
                }
                _ => unreachable!("shell problem uses shell geometry"),
            };
            let rs = artifacts::linspace(r_lo, r_hi, res_x);
            let FrequencyAxis::Band { lo, hi, .. } = domain.frequency else {
                unreachable!("shell problem is polychromatic")
            };
            let nus: Vec<f64> = artifacts::linspace(0.0, 1.0, res_y)
                .into_iter()
                .map(|u| lo * (hi / lo).powf(u))
                .collect();
            let t = domain.time_horizon;
            let values: Vec<Vec<f64>> = nus
                .iter()
                .map(|&nu| {
                    let scale = problem.scale_at(nu);
                    rs.iter()
                        .map(|&r| {
                            scale
                                * incident_radiation(&prep.rule, |omega| {
                                    field.value(&PhasePoint {
                                        t,
                                        x: [r, 0.0, 0.0],
                                        omega: *omega,
                                        nu,
                                    })
                                })
                        })
                        .collect()
                })
                .collect();
            Heatmap {
                title: "incident radiation G(r, nu) at final time",
                x_label: "r",
                y_label: "nu (log scale)",
                values: &values,
                header_comment: &header,
            }
            .render()
        }
        _ => {
            // Cube problems: incident radiation on the z = 0.5 slice.
            let xs = artifacts::linspace(0.0, 1.0, res_x);
            let ys = artifacts::linspace(0.0, 1.0, res_x);
            let nu = match domain.frequency {
                FrequencyAxis::Monochromatic => 0.0,
                FrequencyAxis::Band { lo, hi, .. } => 0.5 * (lo + hi),
            };
            let values: Vec<Vec<f64>> = ys
                .iter()
                .map(|&y| {
                    xs.iter()
                        .map(|&x| {
                            incident_radiation(&prep.rule, |omega| {
                                field.value(&PhasePoint::steady([x, y, 0.5], *omega, nu))
                            })
                        })
                        .collect()
                })
                .collect();
            Heatmap {
                title: "incident radiation G(x, y, 0.5)",
                x_label: "x",
                y_label: "y",
                values: &values,
                header_comment: &header,
            }
            .render()
        }
    };
    let name = if config.problem == "slab1d" {
        "heatmap_u.svg"
    } else {
        "heatmap_G.svg"
    };
    std::fs::write(prep.out_dir.join(name), map)?;
    Ok(())
}

/// `solve`: train the forward problem and emit artifacts.
pub fn run_forward(config: &RunConfig, dry_run: bool) -> Result<()> {
    let prep = prepare(config, false)?;
    if dry_run {
        echo_dry_run(config, &prep);
        return Ok(());
    }
    let widths = config.u_widths(prep.problem.domain.input_dim());
    let u = init_network(&widths, config.seed, InitScheme::XavierUniform).map_err(lift)?;
    let model = PinnModel::Forward { u };
    let loss = config.loss_config();
    let setup = TrainSetup {
        problem: &prep.problem,
        sets: &prep.sets,
        rule: &prep.rule,
        loss: &loss,
        measured_g: None,
    };
    let optimizer = config.optimizer_config();
    let trained = train(&setup, model, &optimizer).map_err(lift)?;

    write_common_artifacts(config, &prep, &trained)?;
    let field = NetworkIntensity {
        net: trained.model.u_net(),
        domain: &prep.problem.domain,
    };
    write_fields_csv(
        &prep.out_dir.join("fields.csv"),
        config,
        &prep.problem,
        &prep.rule,
        &field,
        &FieldGrid {
            spatial: config.evaluation.spatial_resolution,
            time: config.evaluation.time_resolution,
            frequency: config.evaluation.frequency_resolution,
        },
    )?;
    write_bound_report(config, &prep, &trained)?;
    write_heatmap(config, &prep, &trained)?;

    let report = trained.final_report();
    println!(
        "solve {}: iterations {}, J {:.4e}, E_T {:.4e} (int {:.4e}, sb {:.4e}, tb {:.4e}), wall {:.1}s",
        config.problem,
        trained.history.last().map(|h| h.iteration).unwrap_or(0),
        report.total,
        report.training_error(),
        report.training_error_interior(),
        report.training_error_spatial(),
        report.training_error_temporal(),
        trained.wall_seconds
    );
    println!("artifacts written to {}", prep.out_dir.display());
    Ok(())
}

/// `invert`: reconstruct the absorption coefficient from measured incident
/// radiation and emit artifacts including the diagonal cross-sections.
pub fn run_inverse(config: &RunConfig, dry_run: bool) -> Result<()> {
    let prep = prepare(config, true)?;
    if dry_run {
        echo_dry_run(config, &prep);
        return Ok(());
    }
    let fixture = rte_pinn::problems::inverse_problem_fixture();
    let domain = &prep.problem.domain;
    let u = init_network(
        &config.u_widths(domain.input_dim()),
        config.seed,
        InitScheme::XavierUniform,
    )
    .map_err(lift)?;
    let k = init_network(
        &config.k_widths(rte_pinn::residuals::absorption_input_dim(domain)),
        config.seed.wrapping_add(0x9e3779b9),
        InitScheme::XavierUniform,
    )
    .map_err(lift)?;
    let model = PinnModel::Inverse { u, k };
    let loss = config.loss_config();
    let measured = fixture.measured_g.clone();
    let setup = TrainSetup {
        problem: &prep.problem,
        sets: &prep.sets,
        rule: &prep.rule,
        loss: &loss,
        measured_g: Some(measured.as_ref()),
    };
    let optimizer = config.optimizer_config();
    let trained = train(&setup, model, &optimizer).map_err(lift)?;

    write_common_artifacts(config, &prep, &trained)?;
    write_bound_report(config, &prep, &trained)?;

    let u_net = trained.model.u_net();
    let k_net = trained.model.k_net().expect("inverse model");
    let u_field = NetworkIntensity { net: u_net, domain };
    let k_field = NetworkAbsorption { net: k_net, domain };
    let oracles = &fixture.oracles;

    // Absorption field on a cube grid.
    let res = config.evaluation.spatial_resolution.max(2);
    let axis = artifacts::linspace(0.0, 1.0, res);
    let mut k_csv = header_block(config);
    k_csv.push_str("x1,x2,x3,k_pinn,k_true\n");
    for &x in &axis {
        for &y in &axis {
            for &z in &axis {
                let p = [x, y, z];
                writeln!(
                    k_csv,
                    "{x:.9e},{y:.9e},{z:.9e},{:.9e},{:.9e}",
                    k_field.value(&p, 0.0),
                    (oracles.absorption)(&p)
                )
                .expect("string write");
            }
        }
    }
    std::fs::write(prep.out_dir.join("k_field.csv"), k_csv)?;

    // Cross-sections along the main diagonal of the cube.
    let mut diag = header_block(config);
    diag.push_str("s,x1,x2,x3,G_measured,G_pinn,k_true,k_pinn\n");
    for &s in &artifacts::linspace(0.0, 1.0, 101) {
        let p = [s, s, s];
        let g_pinn = incident_radiation(&prep.rule, |omega| {
            u_field.value(&PhasePoint::steady(p, *omega, 0.0))
        });
        writeln!(
            diag,
            "{s:.9e},{s:.9e},{s:.9e},{s:.9e},{:.9e},{g_pinn:.9e},{:.9e},{:.9e}",
            (oracles.incident_radiation)(&p),
            (oracles.absorption)(&p),
            k_field.value(&p, 0.0),
        )
        .expect("string write");
    }
    std::fs::write(prep.out_dir.join("diagonal.csv"), diag)?;

    // Relative L2 errors against the oracle set.
    let eval_rule = sphere_rule(3, 10, 10).map_err(lift)?;
    let grid = EvaluationGrid::tensor(domain, 10, &eval_rule, 1, 1).map_err(lift)?;
    let intensity_oracle = oracles.intensity.clone();
    let (_, u_rel) = empirical_generalization_error(
        &grid,
        |z| u_field.value(z),
        |z| intensity_oracle(&z.x, &z.omega),
    );
    let spatial_gauss = rte_pinn::quadrature::gauss_legendre(24).map_err(lift)?;
    let (nodes, weights) = spatial_gauss.mapped_to(0.0, 1.0);
    let mut k_num = 0.0;
    let mut k_den = 0.0;
    let mut g_num = 0.0;
    let mut g_den = 0.0;
    for (i, &x) in nodes.iter().enumerate() {
        for (j, &y) in nodes.iter().enumerate() {
            for (l, &z) in nodes.iter().enumerate() {
                let w = weights[i] * weights[j] * weights[l];
                let p = [x, y, z];
                let dk = k_field.value(&p, 0.0) - (oracles.absorption)(&p);
                k_num += w * dk * dk;
                let kt = (oracles.absorption)(&p);
                k_den += w * kt * kt;
                let g_pinn = incident_radiation(&prep.rule, |omega| {
                    u_field.value(&PhasePoint::steady(p, *omega, 0.0))
                });
                let gt = (oracles.incident_radiation)(&p);
                g_num += w * (g_pinn - gt) * (g_pinn - gt);
                g_den += w * gt * gt;
            }
        }
    }
    let k_rel = (k_num / k_den).sqrt();
    let g_rel = (g_num / g_den).sqrt();
    let report = trained.final_report();
    let errors = serde_json::json!({
        "config_hash": config.hash(),
        "seed": config.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "relative_l2": {
            "intensity": u_rel,
            "absorption": k_rel,
            "incident_radiation": g_rel,
        },
        "training_error": report.training_error(),
    });
    std::fs::write(
        prep.out_dir.join("errors.json"),
        serde_json::to_string_pretty(&errors)?,
    )?;

    println!(
        "invert {}: E_T {:.4e}, rel L2 errors: u {:.3e}, k {:.3e}, G {:.3e}, wall {:.1}s",
        config.problem,
        report.training_error(),
        u_rel,
        k_rel,
        g_rel,
        trained.wall_seconds
    );
    println!("artifacts written to {}", prep.out_dir.display());
    Ok(())
}

/// `ensemble`: grid search with retrainings, leaderboard persisted.
pub fn run_ensemble(config: &RunConfig, dry_run: bool) -> Result<()> {
    let inverse = config.problem == "inverse-cube" && config.sampling.n_data > 0;
    let prep = prepare(config, inverse)?;
    let grid = EnsembleGrid {
        hidden_layers: config.ensemble.hidden_layers.clone(),
        hidden_width: config.ensemble.hidden_widths.clone(),
        lambda: config.ensemble.lambdas.clone(),
        lambda_reg: config.ensemble.lambda_regs.clone(),
        retrainings: config.ensemble.retrainings,
        seed_base: config.seed,
    };
    grid.validate().map_err(lift)?;
    if dry_run {
        echo_dry_run(config, &prep);
        println!("# ensemble runs: {}", grid.enumerate().len());
        return Ok(());
    }
    let fixture = inverse.then(rte_pinn::problems::inverse_problem_fixture);
    let measured = fixture.as_ref().map(|f| f.measured_g.clone());
    let outcome = ensemble_train(
        &prep.problem,
        &prep.sets,
        &prep.rule,
        &config.loss_config(),
        measured.as_ref().map(|m| m.as_ref() as _),
        &grid,
        &config.optimizer_config(),
        if inverse {
            ModelKind::Inverse
        } else {
            ModelKind::Forward
        },
    )
    .map_err(lift)?;

    std::fs::create_dir_all(&prep.out_dir)?;
    std::fs::write(prep.out_dir.join("config.toml"), config.canonical_toml())?;
    write_leaderboard_csv(&prep.out_dir.join("leaderboard.csv"), config, &outcome.leaderboard)?;
    write_history_csv(&prep.out_dir.join("history.csv"), config, &outcome.best.history)?;
    let nets: Vec<&MlpNetwork> = match &outcome.best.model {
        PinnModel::Forward { u } => vec![u],
        PinnModel::Inverse { u, k } => vec![u, k],
    };
    save_checkpoint(&prep.out_dir.join("model.ckpt"), &nets)?;

    let spec = outcome.best_spec;
    println!(
        "ensemble {}: {} runs, best loss {:.4e} at layers {} width {} lambda {} lambda_reg {} (retrain {})",
        config.problem,
        outcome.leaderboard.len(),
        outcome.best.best_loss,
        spec.hidden_layers,
        spec.hidden_width,
        spec.lambda,
        spec.lambda_reg,
        spec.retrain_index
    );
    println!("artifacts written to {}", prep.out_dir.display());
    Ok(())
}

/// `bound`: evaluate the generalization bounds from explicit inputs.
pub fn run_bound(config: &RunConfig) -> Result<()> {
    let prep = prepare(config, false)?;
    let inputs = bound_inputs_from_run(config, &prep, None);
    let (transient, steady) = if prep.problem.is_steady() {
        let b = steady_bound(&inputs).map_err(lift)?;
        if let SteadyBound::AssumptionViolated { lhs } = b {
            eprintln!(
                "note: steady coercivity assumption violated (lhs = {lhs:.4e}); bound not applicable"
            );
        }
        (None, Some(b))
    } else {
        (Some(transient_bound(&inputs).map_err(lift)?), None)
    };
    match check_assumption(&inputs) {
        rte_pinn::bounds::SteadyAssumption::Holds { kappa } => {
            eprintln!("steady assumption holds with kappa = {kappa:.6e}")
        }
        rte_pinn::bounds::SteadyAssumption::Violated { lhs } => {
            eprintln!("steady assumption violated: lhs = {lhs:.6e}")
        }
    }
    println!(
        "{}",
        bound_json(config, &inputs, transient.as_ref(), steady.as_ref())
    );
    Ok(())
}

/// `oracles`: regression harness over the closed-form oracle and invariant
/// checks. Prints one line per check; fails the process if any check fails.
pub fn run_oracles() -> Result<()> {
    let mut failures = 0usize;
    let mut check = |name: &str, basis: &str, ok: bool| {
        if ok {
            println!("[ok]   {name} ({basis})");
        } else {
            println!("[FAIL] {name} ({basis})");
            failures += 1;
        }
    };

    // Quadrature.
    {
        let rule = rte_pinn::quadrature::gauss_legendre(10).unwrap();
        let mut ok = true;
        for k in 0..=19usize {
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            let got = rule.integrate(|x| x.powi(k as i32));
            ok &= (got - exact).abs() <= 1e-12 * exact.abs().max(1.0);
        }
        check("gauss-legendre exactness to degree 19", "polynomial exactness of Gauss rules", ok);
        let s3 = sphere_rule(3, 10, 10).unwrap();
        let s1 = sphere_rule(1, 10, 0).unwrap();
        check(
            "sphere rule weight sums (2 and 4 pi)",
            "surface area of the angular domain",
            (s3.weight_sum() - 4.0 * std::f64::consts::PI).abs() < 1e-10
                && (s1.weight_sum() - 2.0).abs() < 1e-12,
        );
    }

    // Sobol.
    {
        let pts = rte_pinn::sampling::sobol_sequence(1, 3, 1).unwrap();
        check(
            "sobol dimension-1 prefix is [0.5, 0.75, 0.25]",
            "direction-number recursion cross-checked against a reference table",
            pts[0][0] == 0.5 && pts[1][0] == 0.75 && pts[2][0] == 0.25,
        );
        let pts = rte_pinn::sampling::sobol_sequence(3, 4096, 1).unwrap();
        let mean: f64 =
            pts.iter().map(|p| p.iter().product::<f64>()).sum::<f64>() / pts.len() as f64;
        check(
            "sobol mean of prod z_i over 4096 points in dim 3",
            "exact integral 1/8",
            (mean - 0.125).abs() < 2e-3,
        );
    }

    // Slab problem.
    {
        let slab = rte_pinn::problems::slab_problem();
        let rule = sphere_rule(1, 10, 0).unwrap();
        check(
            "slab kernel normalization",
            "Legendre orthogonality, d_0 = 1",
            slab.check_kernel_normalization(&rule, 1e-10).is_ok(),
        );
        check(
            "slab coefficients sigma(x) = x, k = 0",
            "benchmark definition",
            (slab.scattering)(&[0.7, 0.0, 0.0], 0.0) == 0.7
                && (slab.absorption)(&[0.7, 0.0, 0.0], 0.0) == 0.0,
        );
    }

    // Radial flux oracle.
    {
        use rte_pinn::problems::radial_flux_oracle;
        let v = radial_flux_oracle(0.5, 0.0);
        check(
            "radial flux continuity at r = 1/2 (value pi/6)",
            "closed-form flux of the polychromatic cube",
            (v - std::f64::consts::PI / 6.0).abs() < 1e-14,
        );
        let h = 1e-6;
        let g = |r: f64| r * r * radial_flux_oracle(r, 0.0);
        let div = (g(0.25 + h) - g(0.25 - h)) / (2.0 * h) / (0.25 * 0.25);
        let f = std::f64::consts::PI.sqrt() * ((-0.0f64).exp() / std::f64::consts::PI.sqrt())
            * (1.0 - 0.5);
        check(
            "radial flux satisfies its divergence equation at r = 1/4",
            "finite-difference check of the defining ODE",
            (div - 4.0 * std::f64::consts::PI * f).abs() < 1e-6,
        );
    }

    // Planck and diffusion oracles.
    {
        use rte_pinn::problems::{diffusion_oracle, planck};
        let t = 150.0;
        let nu = 50.0 * t * rte_pinn::problems::constants::ELECTRON_VOLT
            / rte_pinn::problems::constants::PLANCK_H;
        let b = planck(t, nu).unwrap();
        let rayleigh = 2.0 * rte_pinn::problems::constants::PLANCK_H * nu.powi(3)
            / rte_pinn::problems::constants::LIGHT_SPEED.powi(2);
        check(
            "planck Wien limit at h nu / k_b T = 50",
            "algebraic limit of the Planck law",
            (b * 50f64.exp() / rayleigh - 1.0).abs() < 1e-10,
        );
        check(
            "planck monotone in temperature",
            "positivity of dB/dT",
            planck(120.0, 1e16).unwrap() < planck(150.0, 1e16).unwrap(),
        );
        let g = diffusion_oracle(0.5, 2.0, 1e17, 10.0, 150.0, 120.0, 2.0);
        let want = rte_pinn::problems::planck(150.0, 1e17).unwrap() * 4.0 * std::f64::consts::PI;
        check(
            "diffusion oracle recovers b(T_s) at the inner sphere",
            "erfc(-x) + erfc(x) = 2",
            ((g - want) / want).abs() < 1e-10,
        );
        let far = diffusion_oracle(1.0, 500.0, 1e17, 1.0, 150.0, 120.0, 2.0);
        let b_m = rte_pinn::problems::planck(120.0, 1e17).unwrap() * 4.0 * std::f64::consts::PI;
        check(
            "diffusion oracle far-field limit b(T_m)",
            "profile decays to the medium state",
            ((far - b_m) / b_m).abs() < 1e-10,
        );
    }

    // Inverse fixture.
    {
        let fixture = rte_pinn::problems::inverse_problem_fixture();
        let rule = sphere_rule(3, 10, 10).unwrap();
        let oracles = &fixture.oracles;
        let value_fn = oracles.intensity.clone();
        let grad_fn = oracles.intensity_gradient.clone();
        let field = rte_pinn::residuals::OracleIntensity {
            value: move |z: &PhasePoint| value_fn(&z.x, &z.omega),
            transport: move |z: &PhasePoint, _: f64| {
                let g = grad_fn(&z.x, &z.omega);
                z.omega.iter().zip(g).map(|(w, gi)| w * gi).sum()
            },
        };
        let mut max_residual: f64 = 0.0;
        let mut state = 0x2545f4914f6cdd1du64;
        let mut unit = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let x = [unit(), unit(), unit()];
            let mu = 2.0 * unit() - 1.0;
            let phi = std::f64::consts::TAU * unit();
            let s = (1.0 - mu * mu).sqrt();
            let z = PhasePoint::steady(x, [s * phi.cos(), s * phi.sin(), mu], 0.0);
            max_residual = max_residual
                .max(rte_pinn::residuals::interior_residual(&field, &fixture.problem, &rule, &z).abs());
        }
        check(
            "exact inverse-fixture solution solves the transfer equation",
            "source constructed by substitution; residual <= 1e-8 at 100 points",
            max_residual <= 1e-8,
        );
        let x = [0.3, 0.7, 0.2];
        let g = incident_radiation(&rule, |omega| (oracles.intensity)(&x, omega));
        check(
            "incident radiation of the exact intensity",
            "analytic angular integral of 1 + (omega . omega')^2",
            (g - (oracles.incident_radiation)(&x)).abs() < 1e-8,
        );
        check(
            "bound assumption flagged on the inverse fixture",
            "kappa <= 0 for sigma = 0.5, Psi = 4 pi",
            matches!(
                check_assumption(&{
                    let mut b = BoundInputs::new(3);
                    b.sigma_min = 0.5;
                    b.sigma_max = 0.5;
                    b.psi_sup = 4.0 * std::f64::consts::PI;
                    b
                }),
                rte_pinn::bounds::SteadyAssumption::Violated { .. }
            ),
        );
    }

    // Network arithmetic.
    {
        let widths: Vec<usize> = std::iter::once(2)
            .chain(std::iter::repeat_n(24, 8))
            .chain(std::iter::once(1))
            .collect();
        let net = MlpNetwork::zeros(&widths).unwrap();
        check(
            "parameter count of the 8 x 24 slab network is 4297",
            "M = sum (d_k + 1) d_{k+1}",
            net.param_count() == 4297,
        );
    }

    if failures > 0 {
        bail!("{failures} oracle checks failed");
    }
    println!("all oracle checks passed");
    Ok(())
}
