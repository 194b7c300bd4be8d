//! Artifact emission: CSV files with provenance headers, bound reports,
//! field dumps. Every file starts with a `# key: value` header block
//! carrying the config hash, the seed and the code version; no timestamps,
//! so reruns are byte-identical.

use crate::config::RunConfig;
use anyhow::{Context, Result};
use rte_pinn::bounds::{BoundInputs, SteadyBound};
use rte_pinn::problems::RteProblem;
use rte_pinn::quadrature::{heat_flux, incident_radiation, SphereRule};
use rte_pinn::residuals::NetworkIntensity;
use rte_pinn::sampling::{FrequencyAxis, Geometry, PhasePoint};
use rte_pinn::training::{HistoryRow, LeaderboardRow};
use std::fmt::Write as _;
use std::path::Path;

pub fn header_block(config: &RunConfig) -> String {
    format!(
        "# config_hash: {}\n# seed: {}\n# version: {}\n# problem: {}\n",
        config.hash(),
        config.seed,
        env!("CARGO_PKG_VERSION"),
        config.problem
    )
}

pub fn write_history_csv(path: &Path, config: &RunConfig, history: &[HistoryRow]) -> Result<()> {
    let mut out = header_block(config);
    out.push_str(
        "iteration,total,interior_sum,spatial_sum,temporal_sum,data_sum,regularization_sum,\
         tikhonov_sum,k_boundary_sum,e_train_interior,e_train_spatial,e_train_temporal,\
         e_train_data,e_train_total,best_so_far\n",
    );
    for row in history {
        let r = &row.report;
        writeln!(
            out,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            row.iteration,
            r.total,
            r.interior_sum,
            r.spatial_sum,
            r.temporal_sum,
            r.data_sum,
            r.regularization_sum,
            r.tikhonov_sum,
            r.k_boundary_sum,
            r.training_error_interior(),
            r.training_error_spatial(),
            r.training_error_temporal(),
            r.training_error_data(),
            r.training_error(),
            row.best_so_far,
        )
        .expect("string write");
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_leaderboard_csv(
    path: &Path,
    config: &RunConfig,
    rows: &[LeaderboardRow],
) -> Result<()> {
    let mut out = header_block(config);
    out.push_str(
        "hidden_layers,hidden_width,lambda,lambda_reg,retrain_index,seed,final_loss,\
         e_train_interior,e_train_spatial,e_train_temporal,e_train_data,e_train_total,\
         wall_seconds,error\n",
    );
    for row in rows {
        let s = &row.spec;
        let (loss, ei, es, et, ed, e) = match (&row.final_loss, &row.report) {
            (Some(l), Some(r)) => (
                format!("{l:.10e}"),
                format!("{:.10e}", r.training_error_interior()),
                format!("{:.10e}", r.training_error_spatial()),
                format!("{:.10e}", r.training_error_temporal()),
                format!("{:.10e}", r.training_error_data()),
                format!("{:.10e}", r.training_error()),
            ),
            _ => (String::new(), String::new(), String::new(), String::new(), String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.3},{}",
            s.hidden_layers,
            s.hidden_width,
            s.lambda,
            s.lambda_reg,
            s.retrain_index,
            s.seed,
            loss,
            ei,
            es,
            et,
            ed,
            e,
            row.wall_seconds,
            row.error.as_deref().unwrap_or(""),
        )
        .expect("string write");
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Evaluation grid resolution bundle derived from the config.
pub struct FieldGrid {
    pub spatial: usize,
    pub time: usize,
    pub frequency: usize,
}

/// Dump moments (and, for the slab, the intensity itself) on a regular
/// evaluation grid.
///
/// Columns: `t,x1,x2,x3,nu,G,F1,F2,F3` plus `u_omega0` (the intensity along
/// the rule's first direction). Moments are computed with the run's angular
/// rule; physical units (the shell problem's per-frequency intensity scale
/// is applied).
pub fn write_fields_csv(
    path: &Path,
    config: &RunConfig,
    problem: &RteProblem,
    rule: &SphereRule,
    field: &NetworkIntensity<'_>,
    grid: &FieldGrid,
) -> Result<()> {
    let domain = &problem.domain;
    let mut out = header_block(config);
    out.push_str("# u_omega0: intensity along the first quadrature direction\n");
    out.push_str("t,x1,x2,x3,nu,G,F1,F2,F3,u_omega0\n");
    let times: Vec<f64> = if domain.is_steady() {
        vec![0.0]
    } else {
        linspace(0.0, domain.time_horizon, grid.time.max(1))
    };
    let freqs: Vec<f64> = frequency_grid(domain, grid.frequency.max(1));
    let spatial_points = spatial_grid(problem, grid.spatial);
    let omega0 = rule.nodes()[0].omega;
    for &t in &times {
        for x in &spatial_points {
            for &nu in &freqs {
                let scale = problem.scale_at(nu);
                let g = scale
                    * incident_radiation(rule, |omega| {
                        field.net.forward(&domain.to_unit(&PhasePoint {
                            t,
                            x: *x,
                            omega: *omega,
                            nu,
                        }))
                    });
                let f = heat_flux(rule, |omega| {
                    field.net.forward(&domain.to_unit(&PhasePoint {
                        t,
                        x: *x,
                        omega: *omega,
                        nu,
                    }))
                });
                let u0 = scale
                    * field.net.forward(&domain.to_unit(&PhasePoint {
                        t,
                        x: *x,
                        omega: omega0,
                        nu,
                    }));
                writeln!(
                    out,
                    "{t:.9e},{:.9e},{:.9e},{:.9e},{nu:.9e},{g:.9e},{:.9e},{:.9e},{:.9e},{u0:.9e}",
                    x[0],
                    x[1],
                    x[2],
                    scale * f[0],
                    scale * f[1],
                    scale * f[2],
                )
                .expect("string write");
            }
        }
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Regular spatial grid: box grids stay inside the box; shell grids walk a
/// radial ray per angle pair.
fn spatial_grid(problem: &RteProblem, resolution: usize) -> Vec<[f64; 3]> {
    let domain = &problem.domain;
    let n = resolution.max(2);
    match domain.geometry {
        Geometry::Box => {
            let axes: Vec<Vec<f64>> = (0..domain.spatial_dim)
                .map(|i| {
                    let (a, b) = domain.spatial_box[i];
                    linspace(a, b, n)
                })
                .collect();
            let mut points = Vec::new();
            match domain.spatial_dim {
                1 => {
                    for &x in &axes[0] {
                        points.push([x, 0.0, 0.0]);
                    }
                }
                _ => {
                    for &x in &axes[0] {
                        for &y in &axes[1] {
                            for &z in &axes[2] {
                                points.push([x, y, z]);
                            }
                        }
                    }
                }
            }
            points
        }
        Geometry::SphericalShell { r_inner, r_outer } => {
            // Radial profile along a fixed ray; the solution is radially
            // symmetric for the shell benchmark.
            linspace(r_inner, r_outer, n)
                .into_iter()
                .map(|r| [r, 0.0, 0.0])
                .collect()
        }
    }
}

fn frequency_grid(domain: &rte_pinn::sampling::DomainDescriptor, n: usize) -> Vec<f64> {
    match domain.frequency {
        FrequencyAxis::Monochromatic => vec![0.0],
        FrequencyAxis::Band { lo, hi, log_rescale } => {
            if log_rescale {
                linspace(0.0, 1.0, n)
                    .into_iter()
                    .map(|u| lo * (hi / lo).powf(u))
                    .collect()
            } else {
                linspace(lo, hi, n)
            }
        }
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Serialize a bound evaluation to JSON.
pub fn bound_json(
    config: &RunConfig,
    inputs: &BoundInputs,
    transient: Option<&rte_pinn::bounds::BoundValue>,
    steady: Option<&SteadyBound>,
) -> String {
    let mut root = serde_json::Map::new();
    root.insert("config_hash".into(), config.hash().into());
    root.insert("seed".into(), config.seed.into());
    root.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    root.insert(
        "inputs".into(),
        serde_json::json!({
            "training_error_interior": inputs.training_error_interior,
            "training_error_spatial": inputs.training_error_spatial,
            "training_error_temporal": inputs.training_error_temporal,
            "n_int": inputs.n_int,
            "n_sb": inputs.n_sb,
            "n_tb": inputs.n_tb,
            "n_s": inputs.n_s,
            "quadrature_order": inputs.quadrature_order,
            "spatial_dim": inputs.spatial_dim,
            "time_horizon": inputs.time_horizon,
            "light_speed": inputs.light_speed,
            "sigma_sup": inputs.sigma_sup,
            "psi_sup": inputs.psi_sup,
            "surface_area": inputs.surface_area,
            "variation_constant": inputs.variation_constant(),
            "absorption_min": inputs.absorption_min,
            "sigma_min": inputs.sigma_min,
            "sigma_max": inputs.sigma_max,
        }),
    );
    if let Some(v) = transient {
        root.insert(
            "transient_bound".into(),
            serde_json::json!({
                "squared_total": v.total,
                "training_part": v.training_part,
                "quadrature_part": v.quadrature_part,
                "bound_on_error": v.total.sqrt(),
            }),
        );
    }
    if let Some(s) = steady {
        let value = match s {
            SteadyBound::Applicable(v) => serde_json::json!({
                "applicable": true,
                "squared_total": v.total,
                "training_part": v.training_part,
                "quadrature_part": v.quadrature_part,
                "bound_on_error": v.total.sqrt(),
            }),
            SteadyBound::AssumptionViolated { lhs } => serde_json::json!({
                "applicable": false,
                "assumption_lhs": lhs,
                "note": "k_min + sigma_min - (sigma_max + psi_sup)/s_d must be positive",
            }),
        };
        root.insert("steady_bound".into(), value);
    }
    serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("json serializes")
}

/// Machine-readable error record for failed runs.
pub fn error_record(kind: &str, message: &str) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "error": kind,
        "message": message,
    }))
    .expect("json serializes")
}
