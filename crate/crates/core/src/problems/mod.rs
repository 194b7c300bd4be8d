//! Benchmark radiative-transfer scenarios and their closed-form oracles.
//!
//! Each problem bundles the coefficients, kernel, source and data of one
//! instance of the transfer equation together with the domain descriptor.
//! Scattering in every benchmark stays within the local frequency group, so
//! the kernel normalization reads `(1/s_d) \int_S Phi d omega' = 1`; it is
//! checked at construction.

mod cube;
mod inverse;
mod shell;
mod slab;

pub use cube::{cube_mono_problem, cube_poly_problem, radial_flux_oracle};
pub use inverse::{inverse_problem_fixture, InverseFixture, OracleSet};
pub use shell::{diffusion_oracle, planck, shell_time_problem, SHELL_T_MEDIUM_EV, SHELL_T_SPHERE_EV};
pub use slab::{slab_problem, SLAB_KERNEL_COEFFS};

use crate::quadrature::{scattering_sum, sphere_rule, surface_area, SphereRule};
use crate::sampling::{DomainDescriptor, PhasePoint};
use crate::{Error, Result};
use std::sync::Arc;

/// Physical constants (CODATA 2018).
pub mod constants {
    /// Planck constant, J s.
    pub const PLANCK_H: f64 = 6.626_070_15e-34;
    /// Boltzmann constant, J / K.
    pub const BOLTZMANN_KB: f64 = 1.380_649e-23;
    /// Speed of light, m / s.
    pub const LIGHT_SPEED: f64 = 299_792_458.0;
    /// Electron volt, J.
    pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;
}

/// Spatial/spectral coefficient `(x, nu) -> value`, e.g. `k` and `sigma`.
pub type CoefficientFn = Arc<dyn Fn(&[f64; 3], f64) -> f64 + Send + Sync>;
/// Scattering kernel `Phi(omega, omega', nu, nu')`.
pub type KernelFn = Arc<dyn Fn(&[f64; 3], &[f64; 3], f64, f64) -> f64 + Send + Sync>;
/// Phase-space function `(t, x, omega, nu) -> value`, e.g. `f`, `u_0`, `u_b`.
pub type PhaseFn = Arc<dyn Fn(&PhasePoint) -> f64 + Send + Sync>;
/// Spectral scale factor `nu -> value`.
pub type SpectrumFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Steady or transient in the problem's own time units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeDependence {
    Steady,
    /// `inv_c` multiplies the time derivative; problems that rescale time by
    /// the light speed use `inv_c = 1`.
    Transient { inv_c: f64 },
}

/// One radiative-transfer scenario.
#[derive(Clone)]
pub struct RteProblem {
    pub name: &'static str,
    pub domain: DomainDescriptor,
    pub time: TimeDependence,
    /// Absorption coefficient `k(x, nu) >= 0`.
    pub absorption: CoefficientFn,
    /// Scattering coefficient `sigma(x, nu) >= 0`.
    pub scattering: CoefficientFn,
    /// Scattering kernel, normalized so `(1/s_d) \int Phi d omega' = 1`.
    pub kernel: KernelFn,
    /// Emission term `f`.
    pub source: PhaseFn,
    /// Initial datum `u_0` (transient problems only).
    pub initial: Option<PhaseFn>,
    /// Boundary datum `u_b` on the inflow set.
    pub boundary: PhaseFn,
    /// Physical intensity = `intensity_scale(nu)` x network output; `None`
    /// means the network output is the physical intensity.
    pub intensity_scale: Option<SpectrumFn>,
}

impl std::fmt::Debug for RteProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RteProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("time", &self.time)
            .finish_non_exhaustive()
    }
}

impl RteProblem {
    /// Angular surface area `s_d` for the problem's dimension.
    pub fn surface_area(&self) -> f64 {
        surface_area(self.domain.spatial_dim)
    }

    pub fn is_steady(&self) -> bool {
        matches!(self.time, TimeDependence::Steady)
    }

    /// Coefficient of the time derivative (0 when steady).
    pub fn inv_c(&self) -> f64 {
        match self.time {
            TimeDependence::Steady => 0.0,
            TimeDependence::Transient { inv_c } => inv_c,
        }
    }

    /// Physical intensity scale at frequency `nu`.
    pub fn scale_at(&self, nu: f64) -> f64 {
        self.intensity_scale.as_ref().map_or(1.0, |s| s(nu))
    }

    /// Verify `(1/s_d) sum_i w_i Phi(omega, omega_i) = 1` at a spread of
    /// evaluation directions and frequencies.
    pub fn check_kernel_normalization(&self, rule: &SphereRule, tol: f64) -> Result<()> {
        let ones = vec![1.0; rule.len()];
        let s_d = self.surface_area();
        let nus = self.probe_frequencies();
        for node in rule.nodes().iter().step_by(3) {
            for &nu in &nus {
                let val =
                    scattering_sum(self.kernel.as_ref(), &ones, rule, &node.omega, nu) / s_d;
                if (val - 1.0).abs() > tol {
                    return Err(Error::config(format!(
                        "kernel of `{}` is not normalized: got {val} at nu = {nu}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    fn probe_frequencies(&self) -> Vec<f64> {
        match self.domain.frequency {
            crate::sampling::FrequencyAxis::Monochromatic => vec![0.0],
            crate::sampling::FrequencyAxis::Band { lo, hi, .. } => {
                vec![lo, 0.5 * (lo + hi), hi]
            }
        }
    }
}

/// Default angular rule for a problem (10 nodes in `mu`, and 10 in `phi`
/// for three dimensions), matching the benchmark configurations.
pub fn default_sphere_rule(problem: &RteProblem) -> Result<SphereRule> {
    sphere_rule(problem.domain.spatial_dim, 10, 10)
}

fn normalization_check_or_panic(problem: &RteProblem) {
    let rule = default_sphere_rule(problem).expect("default rule");
    problem
        .check_kernel_normalization(&rule, 1e-10)
        .expect("kernel normalization invariant");
}

/// Construct a named benchmark problem.
///
/// `k_nu` only affects `shell-time` (the benchmark uses 1 and 10).
pub fn problem_by_name(name: &str, k_nu: f64) -> Result<RteProblem> {
    match name {
        "slab1d" => Ok(slab_problem()),
        "cube3d-mono" => Ok(cube_mono_problem()),
        "cube3d-poly" => Ok(cube_poly_problem()),
        "shell-time" => shell_time_problem(k_nu),
        "inverse-cube" => Ok(inverse_problem_fixture().problem),
        other => Err(Error::config(format!("unknown problem `{other}`"))),
    }
}

/// Names accepted by [`problem_by_name`].
pub const PROBLEM_NAMES: [&str; 5] = [
    "slab1d",
    "cube3d-mono",
    "cube3d-poly",
    "shell-time",
    "inverse-cube",
];
