//! Full-batch loss and gradient assembly.
//!
//! Residual evaluation over training points is embarrassingly parallel; the
//! points are processed in fixed-size chunks mapped in parallel and reduced
//! sequentially in chunk order, so the floating-point result is bitwise
//! independent of the thread schedule.
//!
//! Per interior point the intensity network is evaluated once in dual
//! arithmetic (value plus transport derivative) and once per scattering
//! node in plain arithmetic; the reverse passes are seeded with the
//! residual coefficients and accumulate straight into the chunk gradient,
//! so no per-point gradient vectors are materialized.

use super::{
    absorption_input, absorption_input_dim, LossConfig, LossReport, PinnModel, RegExponent,
};
use crate::network::{softplus, softplus_prime, softplus_second, Dual, Workspace};
use crate::problems::RteProblem;
use crate::quadrature::SphereRule;
use crate::sampling::{BoundaryPoint, DataPoint, InteriorPoint, TrainingSets};
use crate::{Error, Result};
use rayon::prelude::*;

const CHUNK: usize = 64;

/// Measured incident radiation `(t, x, nu) -> G_bar`.
pub type MeasuredFn<'a> = dyn Fn(f64, &[f64; 3], f64) -> f64 + Sync + 'a;

/// Composite loss of the model on the training sets.
pub fn total_loss(
    model: &PinnModel,
    problem: &RteProblem,
    sets: &TrainingSets,
    rule: &SphereRule,
    config: &LossConfig,
    measured_g: Option<&MeasuredFn<'_>>,
) -> Result<LossReport> {
    assemble(model, problem, sets, rule, config, measured_g, false).map(|(r, _)| r)
}

/// Composite loss and its exact gradient with respect to the concatenated
/// flat parameter vector.
pub fn total_loss_with_grad(
    model: &PinnModel,
    problem: &RteProblem,
    sets: &TrainingSets,
    rule: &SphereRule,
    config: &LossConfig,
    measured_g: Option<&MeasuredFn<'_>>,
) -> Result<(LossReport, Vec<f64>)> {
    assemble(model, problem, sets, rule, config, measured_g, true)
        .map(|(r, g)| (r, g.expect("gradient requested")))
}

struct Partial {
    interior: f64,
    spatial: f64,
    temporal: f64,
    data: f64,
    tikhonov: f64,
    k_boundary: f64,
    grad: Option<Vec<f64>>,
    non_finite: Vec<usize>,
}

impl Partial {
    fn new(want_grad: bool, m: usize) -> Self {
        Partial {
            interior: 0.0,
            spatial: 0.0,
            temporal: 0.0,
            data: 0.0,
            tikhonov: 0.0,
            k_boundary: 0.0,
            grad: want_grad.then(|| vec![0.0; m]),
            non_finite: Vec::new(),
        }
    }
}

/// Reusable per-chunk buffers.
struct Bufs {
    ws_dual_u: Workspace<Dual>,
    node_ws: Vec<Workspace<f64>>,
    ws_plain_u: Workspace<f64>,
    ws_plain_k: Option<Workspace<f64>>,
    ws_dual_k: Option<Workspace<Dual>>,
    input: Vec<f64>,
    node_input: Vec<f64>,
    tangent: Vec<f64>,
    k_input: Vec<f64>,
    k_tangent: Vec<f64>,
    k_input_grad: Vec<f64>,
    node_vals: Vec<f64>,
    node_phi: Vec<f64>,
}

impl Bufs {
    fn new(model: &PinnModel, problem: &RteProblem, rule: &SphereRule) -> Self {
        let u = model.u_net();
        let dim = problem.domain.input_dim();
        let k_dim = absorption_input_dim(&problem.domain);
        Bufs {
            ws_dual_u: Workspace::new(u),
            node_ws: (0..rule.len()).map(|_| Workspace::new(u)).collect(),
            ws_plain_u: Workspace::new(u),
            ws_plain_k: model.k_net().map(Workspace::new),
            ws_dual_k: model.k_net().map(Workspace::new),
            input: vec![0.0; dim],
            node_input: vec![0.0; dim],
            tangent: vec![0.0; dim],
            k_input: Vec::with_capacity(k_dim),
            k_tangent: vec![0.0; k_dim],
            k_input_grad: vec![0.0; k_dim],
            node_vals: vec![0.0; rule.len()],
            node_phi: vec![0.0; rule.len()],
        }
    }
}

fn validate(
    model: &PinnModel,
    problem: &RteProblem,
    sets: &TrainingSets,
    rule: &SphereRule,
    config: &LossConfig,
    measured_g: Option<&MeasuredFn<'_>>,
) -> Result<()> {
    config.validate()?;
    let domain = &problem.domain;
    if model.u_net().input_dim() != domain.input_dim() {
        return Err(Error::config(format!(
            "intensity network expects {} inputs but the domain has {}",
            model.u_net().input_dim(),
            domain.input_dim()
        )));
    }
    if rule.dim() != domain.spatial_dim {
        return Err(Error::config("sphere rule dimension mismatch"));
    }
    if rule.frequency_nodes().is_some() {
        return Err(Error::config(
            "loss assembly uses within-group scattering; drop the frequency factor",
        ));
    }
    if let Some(k) = model.k_net() {
        if k.input_dim() != absorption_input_dim(domain) {
            return Err(Error::config(format!(
                "absorption network expects {} inputs but the domain needs {}",
                k.input_dim(),
                absorption_input_dim(domain)
            )));
        }
        if sets.data.is_empty() {
            return Err(Error::config("inverse mode requires a data training set"));
        }
        if measured_g.is_none() {
            return Err(Error::config(
                "inverse mode requires measured incident radiation",
            ));
        }
    }
    if problem.is_steady() && !sets.temporal_boundary.is_empty() {
        return Err(Error::config(
            "steady problems take no temporal boundary set",
        ));
    }
    Ok(())
}

fn assemble(
    model: &PinnModel,
    problem: &RteProblem,
    sets: &TrainingSets,
    rule: &SphereRule,
    config: &LossConfig,
    measured_g: Option<&MeasuredFn<'_>>,
    want_grad: bool,
) -> Result<(LossReport, Option<Vec<f64>>)> {
    validate(model, problem, sets, rule, config, measured_g)?;
    let m = model.param_count();
    let domain = &problem.domain;
    let node_angular: Vec<(f64, f64)> = rule
        .nodes()
        .iter()
        .map(|n| domain.angular_unit_coords(&n.omega))
        .collect();

    let interior_partials: Vec<Partial> = sets
        .interior
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let mut p = Partial::new(want_grad, m);
            let mut bufs = Bufs::new(model, problem, rule);
            for (off, ip) in chunk.iter().enumerate() {
                let r = interior_point(model, problem, rule, &node_angular, config, ip, &mut p, &mut bufs);
                if !r.is_finite() {
                    p.non_finite.push(ci * CHUNK + off);
                }
            }
            p
        })
        .collect();

    let spatial_partials: Vec<Partial> = sets
        .spatial_boundary
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut p = Partial::new(want_grad, m);
            let mut bufs = Bufs::new(model, problem, rule);
            for bp in chunk {
                spatial_point(model, problem, config, bp, &mut p, &mut bufs);
            }
            p
        })
        .collect();

    let temporal_partials: Vec<Partial> = sets
        .temporal_boundary
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut p = Partial::new(want_grad, m);
            let mut bufs = Bufs::new(model, problem, rule);
            for ip in chunk {
                temporal_point(model, problem, ip, &mut p, &mut bufs);
            }
            p
        })
        .collect();

    let data_partials: Vec<Partial> = if model.k_net().is_some() {
        let measured = measured_g.expect("validated");
        sets.data
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut p = Partial::new(want_grad, m);
                let mut bufs = Bufs::new(model, problem, rule);
                for dp in chunk {
                    data_point(model, problem, rule, &node_angular, measured, dp, &mut p, &mut bufs);
                }
                p
            })
            .collect()
    } else {
        Vec::new()
    };

    // Sequential reduction in chunk order keeps the sums deterministic.
    let mut report = LossReport::default();
    let mut grad = want_grad.then(|| vec![0.0; m]);
    let mut bad = Vec::new();
    for p in interior_partials
        .iter()
        .chain(&spatial_partials)
        .chain(&temporal_partials)
        .chain(&data_partials)
    {
        report.interior_sum += p.interior;
        report.spatial_sum += p.spatial;
        report.temporal_sum += p.temporal;
        report.data_sum += p.data;
        report.tikhonov_sum += p.tikhonov;
        report.k_boundary_sum += p.k_boundary;
        bad.extend_from_slice(&p.non_finite);
        if let (Some(g), Some(pg)) = (grad.as_deref_mut(), p.grad.as_deref()) {
            for (a, b) in g.iter_mut().zip(pg) {
                *a += b;
            }
        }
    }

    // Weight regularization on the concatenated weight blocks.
    let theta = model.flatten();
    let mut reg = 0.0;
    for range in model.weight_index_ranges() {
        for idx in range {
            let w = theta[idx];
            reg += match config.reg_exponent {
                RegExponent::L1 => w.abs(),
                RegExponent::L2 => w * w,
            };
            if let Some(g) = grad.as_deref_mut() {
                g[idx] += config.lambda_reg
                    * match config.reg_exponent {
                        RegExponent::L1 => w.signum() * f64::from(w != 0.0),
                        RegExponent::L2 => 2.0 * w,
                    };
            }
        }
    }
    report.regularization_sum = reg;
    report.total = report.recombined_total(config);

    if !report.total.is_finite() {
        bad.truncate(8);
        return Err(Error::NonFinite(format!(
            "loss is not finite; offending interior point indices: {bad:?}"
        )));
    }
    Ok((report, grad))
}

/// Process one interior collocation point; returns the residual.
#[allow(clippy::too_many_arguments)]
fn interior_point(
    model: &PinnModel,
    problem: &RteProblem,
    rule: &SphereRule,
    node_angular: &[(f64, f64)],
    config: &LossConfig,
    ip: &InteriorPoint,
    p: &mut Partial,
    bufs: &mut Bufs,
) -> f64 {
    let domain = &problem.domain;
    let z = &ip.point;
    let u_net = model.u_net();
    let m_u = u_net.param_count();
    let s_d = problem.surface_area();

    domain.write_unit(z, &mut bufs.input);
    domain.write_transport_tangent(&z.omega, problem.inv_c(), &mut bufs.tangent);
    let out = u_net.dual_forward_tape(&bufs.input, &bufs.tangent, &mut bufs.ws_dual_u);
    let (u_val, transport) = (out.re, out.eps);

    let sigma = (problem.scattering)(&z.x, z.nu);
    let ang_off = domain.angular_offset();

    // Scattering sum over the angular rule (within-group).
    let mut scat = 0.0;
    if sigma != 0.0 {
        bufs.node_input.copy_from_slice(&bufs.input);
        for (i, node) in rule.nodes().iter().enumerate() {
            bufs.node_input[ang_off] = node_angular[i].0;
            if domain.spatial_dim == 3 {
                bufs.node_input[ang_off + 1] = node_angular[i].1;
            }
            bufs.node_vals[i] = u_net.forward_tape(&bufs.node_input, &mut bufs.node_ws[i]);
            bufs.node_phi[i] = (problem.kernel)(&z.omega, &node.omega, z.nu, z.nu);
            scat += node.weight * bufs.node_phi[i] * bufs.node_vals[i];
        }
    }

    // Absorption: fixed coefficient (forward) or softplus network (inverse).
    let (k_val, k_raw) = match model {
        PinnModel::Forward { .. } => ((problem.absorption)(&z.x, z.nu), 0.0),
        PinnModel::Inverse { k, .. } => {
            absorption_input(domain, &z.x, z.nu, &mut bufs.k_input);
            let raw = k.forward_tape(&bufs.k_input, bufs.ws_plain_k.as_mut().expect("inverse"));
            (softplus(raw), raw)
        }
    };

    let residual = transport + k_val * u_val + sigma * (u_val - scat / s_d)
        - (problem.source)(z);
    p.interior += ip.weight * residual * residual;

    if let PinnModel::Inverse { k, .. } = model {
        if config.lambda_tikhonov > 0.0 {
            // |grad_x k_theta|^2 = sp'(z)^2 * sum_j (s_j zhat_j)^2.
            let ws_k = bufs.ws_plain_k.as_mut().expect("inverse");
            bufs.k_input_grad.iter_mut().for_each(|g| *g = 0.0);
            k.backprop_tape(ws_k, 1.0, None, Some(&mut bufs.k_input_grad));
            let sp1 = softplus_prime(k_raw);
            let mut psum = 0.0;
            for j in 0..domain.spatial_dim {
                let s = domain.spatial_scale(j);
                let zh = bufs.k_input_grad[j];
                psum += s * s * zh * zh;
                bufs.k_tangent[j] = s * s * zh;
            }
            for t in bufs.k_tangent.iter_mut().skip(domain.spatial_dim) {
                *t = 0.0;
            }
            p.tikhonov += ip.weight * sp1 * sp1 * psum;
            if p.grad.is_some() {
                let ws_dual_k = bufs.ws_dual_k.as_mut().expect("inverse");
                k.dual_forward_tape(&bufs.k_input, &bufs.k_tangent, ws_dual_k);
                let sp2 = softplus_second(k_raw);
                let c = config.lambda_tikhonov * ip.weight;
                let grad_k = &mut p.grad.as_deref_mut().expect("grad")[m_u..];
                k.dual_backprop_fused(ws_dual_k, c * 2.0 * sp1 * sp2 * psum, c * 2.0 * sp1 * sp1, grad_k);
            }
        }
    }

    if let Some(grad) = p.grad.as_deref_mut() {
        let coeff = 2.0 * config.lambda * ip.weight * residual;
        let grad_u = &mut grad[..m_u];
        u_net.dual_backprop_fused(&mut bufs.ws_dual_u, coeff * (k_val + sigma), coeff, grad_u);
        if sigma != 0.0 {
            for (i, node) in rule.nodes().iter().enumerate() {
                let seed = -coeff * sigma * node.weight * bufs.node_phi[i] / s_d;
                u_net.backprop_tape(&mut bufs.node_ws[i], seed, Some(grad_u), None);
            }
        }
        if let PinnModel::Inverse { k, .. } = model {
            let ws_k = bufs.ws_plain_k.as_mut().expect("inverse");
            let seed = coeff * u_val * softplus_prime(k_raw);
            k.backprop_tape(ws_k, seed, Some(&mut grad[m_u..]), None);
        }
    }
    residual
}

fn spatial_point(
    model: &PinnModel,
    problem: &RteProblem,
    config: &LossConfig,
    bp: &BoundaryPoint,
    p: &mut Partial,
    bufs: &mut Bufs,
) {
    let domain = &problem.domain;
    let z = &bp.point;
    let u_net = model.u_net();
    let m_u = u_net.param_count();
    domain.write_unit(z, &mut bufs.input);
    let u_val = u_net.forward_tape(&bufs.input, &mut bufs.ws_plain_u);
    let residual = u_val - (problem.boundary)(z);
    p.spatial += bp.weight * residual * residual;
    if let Some(grad) = p.grad.as_deref_mut() {
        u_net.backprop_tape(
            &mut bufs.ws_plain_u,
            2.0 * bp.weight * residual,
            Some(&mut grad[..m_u]),
            None,
        );
    }

    // Inverse mode: match the absorption network to the known boundary
    // values of k.
    if let PinnModel::Inverse { k, .. } = model {
        if config.k_boundary_weight > 0.0 {
            absorption_input(domain, &z.x, z.nu, &mut bufs.k_input);
            let ws_k = bufs.ws_plain_k.as_mut().expect("inverse");
            let raw = k.forward_tape(&bufs.k_input, ws_k);
            let r_k = softplus(raw) - (problem.absorption)(&z.x, z.nu);
            p.k_boundary += bp.weight * r_k * r_k;
            if let Some(grad) = p.grad.as_deref_mut() {
                let seed = 2.0 * config.k_boundary_weight * bp.weight * r_k * softplus_prime(raw);
                k.backprop_tape(ws_k, seed, Some(&mut grad[m_u..]), None);
            }
        }
    }
}

fn temporal_point(
    model: &PinnModel,
    problem: &RteProblem,
    ip: &InteriorPoint,
    p: &mut Partial,
    bufs: &mut Bufs,
) {
    let domain = &problem.domain;
    let z = &ip.point;
    let u_net = model.u_net();
    let m_u = u_net.param_count();
    domain.write_unit(z, &mut bufs.input);
    let u_val = u_net.forward_tape(&bufs.input, &mut bufs.ws_plain_u);
    let initial = problem.initial.as_ref().expect("transient problem");
    let residual = u_val - initial(z);
    p.temporal += ip.weight * residual * residual;
    if let Some(grad) = p.grad.as_deref_mut() {
        u_net.backprop_tape(
            &mut bufs.ws_plain_u,
            2.0 * ip.weight * residual,
            Some(&mut grad[..m_u]),
            None,
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn data_point(
    model: &PinnModel,
    problem: &RteProblem,
    rule: &SphereRule,
    node_angular: &[(f64, f64)],
    measured: &MeasuredFn<'_>,
    dp: &DataPoint,
    p: &mut Partial,
    bufs: &mut Bufs,
) {
    let domain = &problem.domain;
    let u_net = model.u_net();
    let m_u = u_net.param_count();
    let probe = crate::sampling::PhasePoint {
        t: dp.t,
        x: dp.x,
        omega: rule.nodes()[0].omega,
        nu: dp.nu,
    };
    domain.write_unit(&probe, &mut bufs.input);
    let ang_off = domain.angular_offset();
    let mut g = 0.0;
    for (i, node) in rule.nodes().iter().enumerate() {
        bufs.input[ang_off] = node_angular[i].0;
        if domain.spatial_dim == 3 {
            bufs.input[ang_off + 1] = node_angular[i].1;
        }
        bufs.node_vals[i] = u_net.forward_tape(&bufs.input, &mut bufs.node_ws[i]);
        g += node.weight * bufs.node_vals[i];
    }
    let residual = g - measured(dp.t, &dp.x, dp.nu);
    p.data += dp.weight * residual * residual;
    if let Some(grad) = p.grad.as_deref_mut() {
        let coeff = 2.0 * dp.weight * residual;
        for (i, node) in rule.nodes().iter().enumerate() {
            u_net.backprop_tape(
                &mut bufs.node_ws[i],
                coeff * node.weight,
                Some(&mut grad[..m_u]),
                None,
            );
        }
    }
}
