//! PDE, boundary and data residuals, and the composite training loss with
//! its exact parameter gradient.
//!
//! The pointwise operations are generic over [`IntensityField`] /
//! [`AbsorptionField`] so closed-form oracle solutions can be plugged in
//! place of a network; the batched loss assembly in [`assembly`] works on
//! networks directly and fuses the reverse passes.

mod assembly;

pub use assembly::{total_loss, total_loss_with_grad};

use crate::network::{softplus, Dual, MlpNetwork, Workspace};
use crate::problems::RteProblem;
use crate::quadrature::SphereRule;
use crate::sampling::{DomainDescriptor, PhasePoint};
use crate::{Error, Result};

/// Exponent of the weight-regularization norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegExponent {
    L1,
    L2,
}

/// Weights of the composite loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Interior-residual weight `lambda`.
    pub lambda: f64,
    /// Weight-regularization strength `lambda_reg` on `||theta_W||_q^q`.
    pub lambda_reg: f64,
    pub reg_exponent: RegExponent,
    /// Tikhonov strength `lambda_k` on `||grad k_theta||_2^2` (inverse mode).
    pub lambda_tikhonov: f64,
    /// Weight of the boundary mismatch of the absorption network (inverse
    /// mode).
    pub k_boundary_weight: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda: 1.0,
            lambda_reg: 0.0,
            reg_exponent: RegExponent::L2,
            lambda_tikhonov: 0.0,
            k_boundary_weight: 0.0,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lambda", self.lambda),
            ("lambda_reg", self.lambda_reg),
            ("lambda_tikhonov", self.lambda_tikhonov),
            ("k_boundary_weight", self.k_boundary_weight),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(format!(
                    "loss weight {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-component residual sums and the derived training errors.
///
/// The component sums are raw weighted sums of squares (no `lambda`
/// factors); `total` is the weighted combination
/// `J = S_sb + S_tb + lambda S_int + S_d + k_boundary_weight S_kb
///    + lambda_k S_tik + lambda_reg S_reg`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossReport {
    pub total: f64,
    pub interior_sum: f64,
    pub spatial_sum: f64,
    pub temporal_sum: f64,
    pub data_sum: f64,
    pub regularization_sum: f64,
    pub tikhonov_sum: f64,
    pub k_boundary_sum: f64,
}

impl LossReport {
    pub fn training_error_interior(&self) -> f64 {
        self.interior_sum.sqrt()
    }

    pub fn training_error_spatial(&self) -> f64 {
        self.spatial_sum.sqrt()
    }

    pub fn training_error_temporal(&self) -> f64 {
        self.temporal_sum.sqrt()
    }

    pub fn training_error_data(&self) -> f64 {
        self.data_sum.sqrt()
    }

    /// Root-sum-square of the training error components.
    pub fn training_error(&self) -> f64 {
        (self.interior_sum + self.spatial_sum + self.temporal_sum + self.data_sum).sqrt()
    }

    /// Recombine the components into the total with the given weights; used
    /// to check the bookkeeping invariant.
    pub fn recombined_total(&self, config: &LossConfig) -> f64 {
        self.spatial_sum
            + self.temporal_sum
            + config.lambda * self.interior_sum
            + self.data_sum
            + config.k_boundary_weight * self.k_boundary_sum
            + config.lambda_tikhonov * self.tikhonov_sum
            + config.lambda_reg * self.regularization_sum
    }
}

/// A scalar intensity field on phase space with the directional derivative
/// needed by the transport term.
pub trait IntensityField: Sync {
    fn value(&self, z: &PhasePoint) -> f64;
    /// `(inv_c) du/dt + omega . grad_x u` at `z`.
    fn transport_derivative(&self, z: &PhasePoint, inv_c: f64) -> f64;
}

/// A scalar absorption field `k(x, nu)`.
pub trait AbsorptionField: Sync {
    fn value(&self, x: &[f64; 3], nu: f64) -> f64;
}

/// Closed-form intensity given by a value closure and a transport closure.
pub struct OracleIntensity<V, T> {
    pub value: V,
    pub transport: T,
}

impl<V, T> IntensityField for OracleIntensity<V, T>
where
    V: Fn(&PhasePoint) -> f64 + Sync,
    T: Fn(&PhasePoint, f64) -> f64 + Sync,
{
    fn value(&self, z: &PhasePoint) -> f64 {
        (self.value)(z)
    }
    fn transport_derivative(&self, z: &PhasePoint, inv_c: f64) -> f64 {
        (self.transport)(z, inv_c)
    }
}

impl<F> AbsorptionField for F
where
    F: Fn(&[f64; 3], f64) -> f64 + Sync,
{
    fn value(&self, x: &[f64; 3], nu: f64) -> f64 {
        self(x, nu)
    }
}

/// A network evaluated through the domain rescale maps.
pub struct NetworkIntensity<'a> {
    pub net: &'a MlpNetwork,
    pub domain: &'a DomainDescriptor,
}

impl IntensityField for NetworkIntensity<'_> {
    fn value(&self, z: &PhasePoint) -> f64 {
        self.net.forward(&self.domain.to_unit(z))
    }

    fn transport_derivative(&self, z: &PhasePoint, inv_c: f64) -> f64 {
        let input = self.domain.to_unit(z);
        let tangent = self.domain.transport_tangent(&z.omega, inv_c);
        let mut ws = Workspace::<Dual>::new(self.net);
        self.net.dual_forward_tape(&input, &tangent, &mut ws).eps
    }
}

/// Input of the absorption network: spatial unit coordinates plus the
/// frequency coordinate when the problem is polychromatic.
pub fn absorption_input(domain: &DomainDescriptor, x: &[f64; 3], nu: f64, out: &mut Vec<f64>) {
    out.clear();
    for i in 0..domain.spatial_dim {
        let (a, b) = domain.spatial_box[i];
        out.push((x[i] - a) / (b - a));
    }
    if let crate::sampling::FrequencyAxis::Band { lo, hi, log_rescale } = domain.frequency {
        out.push(if log_rescale {
            (nu / lo).ln() / (hi / lo).ln()
        } else {
            (nu - lo) / (hi - lo)
        });
    }
}

/// Input dimension of the absorption network for a domain.
pub fn absorption_input_dim(domain: &DomainDescriptor) -> usize {
    domain.spatial_dim + (!domain.is_monochromatic()) as usize
}

/// The absorption network with its softplus positivity transform.
pub struct NetworkAbsorption<'a> {
    pub net: &'a MlpNetwork,
    pub domain: &'a DomainDescriptor,
}

impl AbsorptionField for NetworkAbsorption<'_> {
    fn value(&self, x: &[f64; 3], nu: f64) -> f64 {
        let mut input = Vec::with_capacity(absorption_input_dim(self.domain));
        absorption_input(self.domain, x, nu, &mut input);
        softplus(self.net.forward(&input))
    }
}

/// Quadrature value of the scattering integral of `u` at `z` (no `1/s_d`).
fn scattering_of_field<F: IntensityField + ?Sized>(
    u: &F,
    problem: &RteProblem,
    rule: &SphereRule,
    z: &PhasePoint,
) -> f64 {
    let kernel = problem.kernel.as_ref();
    match rule.frequency_nodes() {
        None => rule
            .nodes()
            .iter()
            .map(|node| {
                let mut zp = *z;
                zp.omega = node.omega;
                node.weight * kernel(&z.omega, &node.omega, z.nu, z.nu) * u.value(&zp)
            })
            .sum(),
        Some(freq) => {
            let mut total = 0.0;
            for node in rule.nodes() {
                for (&nu_p, &w_nu) in freq.nodes.iter().zip(&freq.weights) {
                    let mut zp = *z;
                    zp.omega = node.omega;
                    zp.nu = nu_p;
                    total +=
                        node.weight * w_nu * kernel(&z.omega, &node.omega, z.nu, nu_p) * u.value(&zp);
                }
            }
            total
        }
    }
}

/// PDE residual of the transfer equation at an interior point:
///
/// `R = (1/c) du/dt + omega . grad_x u + k u + sigma (u - scat / s_d) - f`.
pub fn interior_residual<F: IntensityField + ?Sized>(
    u: &F,
    problem: &RteProblem,
    rule: &SphereRule,
    z: &PhasePoint,
) -> f64 {
    interior_residual_with_absorption(u, &|x: &[f64; 3], nu: f64| (problem.absorption)(x, nu), problem, rule, z)
}

/// PDE residual with the absorption coefficient replaced by a trainable
/// field (the inverse-mode residual).
pub fn inverse_interior_residual<F, K>(
    u: &F,
    absorption: &K,
    problem: &RteProblem,
    rule: &SphereRule,
    z: &PhasePoint,
) -> f64
where
    F: IntensityField + ?Sized,
    K: AbsorptionField + ?Sized,
{
    interior_residual_with_absorption(u, absorption, problem, rule, z)
}

fn interior_residual_with_absorption<F, K>(
    u: &F,
    absorption: &K,
    problem: &RteProblem,
    rule: &SphereRule,
    z: &PhasePoint,
) -> f64
where
    F: IntensityField + ?Sized,
    K: AbsorptionField + ?Sized,
{
    let value = u.value(z);
    let transport = u.transport_derivative(z, problem.inv_c());
    let k = absorption.value(&z.x, z.nu);
    let sigma = (problem.scattering)(&z.x, z.nu);
    let scattering = if sigma == 0.0 {
        0.0
    } else {
        scattering_of_field(u, problem, rule, z)
    };
    transport + k * value + sigma * (value - scattering / problem.surface_area())
        - (problem.source)(z)
}

fn on_spatial_boundary(problem: &RteProblem, z: &PhasePoint) -> bool {
    const TOL: f64 = 1e-9;
    match problem.domain.geometry {
        crate::sampling::Geometry::Box => (0..problem.domain.spatial_dim).any(|i| {
            let (a, b) = problem.domain.spatial_box[i];
            (z.x[i] - a).abs() < TOL || (z.x[i] - b).abs() < TOL
        }),
        crate::sampling::Geometry::SphericalShell { r_inner, r_outer } => {
            let r = z.x.iter().map(|c| c * c).sum::<f64>().sqrt();
            (r - r_inner).abs() < TOL || (r - r_outer).abs() < TOL
        }
    }
}

/// Spatial boundary residual `R_sb = u - u_b` at an inflow point.
///
/// # Panics
///
/// Panics when `z` does not lie on the spatial boundary.
pub fn spatial_boundary_residual<F: IntensityField + ?Sized>(
    u: &F,
    problem: &RteProblem,
    z: &PhasePoint,
) -> f64 {
    assert!(
        on_spatial_boundary(problem, z),
        "contract violation: point is not on the spatial boundary"
    );
    u.value(z) - (problem.boundary)(z)
}

/// Temporal boundary residual `R_tb = u - u_0` at `t = 0`.
///
/// # Panics
///
/// Panics when `z.t != 0` or the problem is steady.
pub fn temporal_boundary_residual<F: IntensityField + ?Sized>(
    u: &F,
    problem: &RteProblem,
    z: &PhasePoint,
) -> f64 {
    assert!(
        z.t == 0.0,
        "contract violation: temporal boundary points live at t = 0"
    );
    let initial = problem
        .initial
        .as_ref()
        .expect("contract violation: steady problems have no temporal boundary");
    u.value(z) - initial(z)
}

/// Data residual `R_d = G(u) - G_bar` at a measurement location, with the
/// incident radiation computed by the angular quadrature rule.
pub fn data_residual<F, G>(
    u: &F,
    rule: &SphereRule,
    measured: &G,
    t: f64,
    x: &[f64; 3],
    nu: f64,
) -> f64
where
    F: IntensityField + ?Sized,
    G: Fn(f64, &[f64; 3], f64) -> f64 + ?Sized,
{
    let g = crate::quadrature::incident_radiation(rule, |omega| {
        u.value(&PhasePoint {
            t,
            x: *x,
            omega: *omega,
            nu,
        })
    });
    g - measured(t, x, nu)
}

/// Networks being trained: a single intensity network (forward mode) or an
/// intensity plus absorption pair (inverse mode).
///
/// The flat parameter vector is the concatenation `[theta_u | theta_k]`.
#[derive(Debug, Clone, PartialEq)]
pub enum PinnModel {
    Forward { u: MlpNetwork },
    Inverse { u: MlpNetwork, k: MlpNetwork },
}

impl PinnModel {
    pub fn u_net(&self) -> &MlpNetwork {
        match self {
            PinnModel::Forward { u } | PinnModel::Inverse { u, .. } => u,
        }
    }

    pub fn k_net(&self) -> Option<&MlpNetwork> {
        match self {
            PinnModel::Forward { .. } => None,
            PinnModel::Inverse { k, .. } => Some(k),
        }
    }

    pub fn param_count(&self) -> usize {
        self.u_net().param_count() + self.k_net().map_or(0, |k| k.param_count())
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut theta = self.u_net().flatten();
        if let Some(k) = self.k_net() {
            theta.extend(k.flatten());
        }
        theta
    }

    pub fn set_from_flat(&mut self, theta: &[f64]) {
        assert_eq!(theta.len(), self.param_count(), "parameter count mismatch");
        match self {
            PinnModel::Forward { u } => u.set_from_flat(theta),
            PinnModel::Inverse { u, k } => {
                let mu = u.param_count();
                u.set_from_flat(&theta[..mu]);
                k.set_from_flat(&theta[mu..]);
            }
        }
    }

    /// Weight-block ranges of both networks in the concatenated layout.
    pub fn weight_index_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut ranges = self.u_net().weight_index_ranges();
        if let Some(k) = self.k_net() {
            let offset = self.u_net().param_count();
            ranges.extend(
                k.weight_index_ranges()
                    .into_iter()
                    .map(|r| r.start + offset..r.end + offset),
            );
        }
        ranges
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_network, InitScheme};
    use crate::problems::{
        default_sphere_rule, inverse_problem_fixture, slab_problem,
    };
    use crate::quadrature::sphere_rule;
    use crate::sampling::PhasePoint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_field(c: f64) -> OracleIntensity<impl Fn(&PhasePoint) -> f64 + Sync, impl Fn(&PhasePoint, f64) -> f64 + Sync>
    {
        OracleIntensity {
            value: move |_: &PhasePoint| c,
            transport: |_: &PhasePoint, _| 0.0,
        }
    }

    #[test]
    fn constant_intensity_on_the_slab_has_zero_residual() {
        // The kernel integrates to s_d, so sigma (u - scat/s_d) vanishes for
        // constant u, and k = f = 0.
        let problem = slab_problem();
        let rule = default_sphere_rule(&problem).unwrap();
        let z = PhasePoint::steady([0.3, 0.0, 0.0], [0.45, 0.0, 0.0], 0.0);
        let r = interior_residual(&constant_field(1.0), &problem, &rule, &z);
        assert!(r.abs() < 1e-12, "residual {r}");
    }

    #[test]
    fn exact_inverse_solution_has_vanishing_residual() {
        let fixture = inverse_problem_fixture();
        let oracles = &fixture.oracles;
        let value_fn = oracles.intensity.clone();
        let grad_fn = oracles.intensity_gradient.clone();
        let field = OracleIntensity {
            value: move |z: &PhasePoint| value_fn(&z.x, &z.omega),
            transport: move |z: &PhasePoint, _| {
                let g = grad_fn(&z.x, &z.omega);
                z.omega.iter().zip(g).map(|(w, gi)| w * gi).sum()
            },
        };
        let rule = sphere_rule(3, 10, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let x = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let mu = rng.random_range(-1.0..1.0f64);
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - mu * mu).sqrt();
            let z = PhasePoint::steady(x, [s * phi.cos(), s * phi.sin(), mu], 0.0);
            let r = interior_residual(&field, &fixture.problem, &rule, &z);
            assert!(r.abs() < 1e-8, "residual {r:e} at {x:?}");
            // And through the inverse residual with the exact absorption.
            let ri = inverse_interior_residual(
                &field,
                &|x: &[f64; 3], _: f64| (oracles.absorption)(x),
                &fixture.problem,
                &rule,
                &z,
            );
            assert!(ri.abs() < 1e-8);
        }
    }

    #[test]
    fn perturbing_absorption_shifts_residual_linearly() {
        let fixture = inverse_problem_fixture();
        let rule = sphere_rule(3, 4, 4).unwrap();
        let field = constant_field(0.7);
        let z = PhasePoint::steady([0.2, 0.4, 0.9], [0.0, 0.0, 1.0], 0.0);
        let delta = 0.31;
        let base = inverse_interior_residual(
            &field,
            &|x: &[f64; 3], nu: f64| (fixture.problem.absorption)(x, nu),
            &fixture.problem,
            &rule,
            &z,
        );
        let shifted = inverse_interior_residual(
            &field,
            &|x: &[f64; 3], nu: f64| (fixture.problem.absorption)(x, nu) + delta,
            &fixture.problem,
            &rule,
            &z,
        );
        assert!((shifted - base - delta * 0.7).abs() < 1e-13);
    }

    #[test]
    fn slab_boundary_residual_values() {
        let problem = slab_problem();
        let left = PhasePoint::steady([0.0, 0.0, 0.0], [0.5, 0.0, 0.0], 0.0);
        let r = spatial_boundary_residual(&constant_field(0.9), &problem, &left);
        assert!((r - (0.9 - 1.0)).abs() < 1e-15);
        let right = PhasePoint::steady([1.0, 0.0, 0.0], [-0.5, 0.0, 0.0], 0.0);
        let r = spatial_boundary_residual(&constant_field(0.2), &problem, &right);
        assert!((r - 0.2).abs() < 1e-15);
    }

    #[test]
    #[should_panic(expected = "not on the spatial boundary")]
    fn interior_point_is_rejected_by_boundary_residual() {
        let problem = slab_problem();
        let z = PhasePoint::steady([0.5, 0.0, 0.0], [0.5, 0.0, 0.0], 0.0);
        spatial_boundary_residual(&constant_field(1.0), &problem, &z);
    }

    #[test]
    fn data_residual_cases() {
        let fixture = inverse_problem_fixture();
        let rule = sphere_rule(3, 10, 10).unwrap();
        let x = [0.3, 0.7, 0.2];
        // Exact intensity: residual vanishes.
        let value_fn = fixture.oracles.intensity.clone();
        let field = OracleIntensity {
            value: move |z: &PhasePoint| value_fn(&z.x, &z.omega),
            transport: |_: &PhasePoint, _| 0.0,
        };
        let r = data_residual(&field, &rule, fixture.measured_g.as_ref(), 0.0, &x, 0.0);
        assert!(r.abs() < 1e-8, "residual {r:e}");
        // Zero intensity: residual is minus the measurement.
        let r = data_residual(
            &constant_field(0.0),
            &rule,
            fixture.measured_g.as_ref(),
            0.0,
            &x,
            0.0,
        );
        assert!((r + (fixture.measured_g)(0.0, &x, 0.0)).abs() < 1e-15);
        // Isotropic intensity v: G = 4 pi v.
        let v = 0.37;
        let r = data_residual(
            &constant_field(v),
            &rule,
            &|_: f64, _: &[f64; 3], _: f64| 0.1,
            0.0,
            &x,
            0.0,
        );
        assert!((r - (4.0 * std::f64::consts::PI * v - 0.1)).abs() < 1e-10);
    }

    #[test]
    fn network_intensity_matches_manual_rescale() {
        let problem = slab_problem();
        let net = init_network(&[2, 6, 1], 4, InitScheme::XavierUniform).unwrap();
        let field = NetworkIntensity {
            net: &net,
            domain: &problem.domain,
        };
        let z = PhasePoint::steady([0.25, 0.0, 0.0], [0.6, 0.0, 0.0], 0.0);
        let manual = net.forward(&[0.25, 0.8]);
        assert_eq!(field.value(&z), manual);
        // Transport derivative equals mu du/dx with the chain-rule factor.
        let rec = net.eval_with_gradients(&[0.25, 0.8], false).unwrap();
        let want = 0.6 * rec.input_gradient[0];
        assert!((field.transport_derivative(&z, 0.0) - want).abs() < 1e-14);
    }

    #[test]
    fn model_flatten_round_trip() {
        let u = init_network(&[5, 8, 1], 0, InitScheme::XavierUniform).unwrap();
        let k = init_network(&[3, 6, 1], 1, InitScheme::XavierUniform).unwrap();
        let mut model = PinnModel::Inverse { u: u.clone(), k: k.clone() };
        let theta = model.flatten();
        assert_eq!(theta.len(), u.param_count() + k.param_count());
        let mut perturbed = theta.clone();
        for v in perturbed.iter_mut() {
            *v += 0.25;
        }
        model.set_from_flat(&perturbed);
        assert_eq!(model.flatten(), perturbed);
    }
}
