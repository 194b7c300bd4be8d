//! Synthetic inverse-problem fixture: reconstruct the absorption
//! coefficient from measured incident radiation.
//!
//! The steady monochromatic cube problem with `sigma = 0.5`, isotropic
//! kernel, and source/boundary data generated by substituting the exact
//! pair
//!
//! ```text
//! k(x) = prod x_i^2,
//! u(x, omega) = 3/(16 pi) (1 + (omega . omega')^2) prod x_i (x_i - 1)
//! ```
//!
//! into the transfer equation; the derivatives of `u` enter in closed form.
//! The measured incident radiation is `G(x) = prod x_i (x_i - 1)` (the
//! angular integral of `1 + (omega . omega')^2` is `16 pi / 3`).

use super::{normalization_check_or_panic, RteProblem, TimeDependence};
use crate::sampling::{DomainDescriptor, FrequencyAxis, PhasePoint};
use std::sync::Arc;

/// Fixed reference direction `omega' = (1, 1, 1) / sqrt(3)`.
pub const REFERENCE_DIRECTION: [f64; 3] = [
    0.577_350_269_189_625_8,
    0.577_350_269_189_625_8,
    0.577_350_269_189_625_8,
];

const SIGMA: f64 = 0.5;

fn q_product(x: &[f64; 3]) -> f64 {
    x.iter().map(|&xi| xi * (xi - 1.0)).product()
}

/// Exact absorption coefficient `k(x) = prod x_i^2`.
pub fn exact_absorption(x: &[f64; 3]) -> f64 {
    x.iter().map(|&xi| xi * xi).product()
}

/// Exact radiative intensity.
pub fn exact_intensity(x: &[f64; 3], omega: &[f64; 3]) -> f64 {
    let c: f64 = omega
        .iter()
        .zip(REFERENCE_DIRECTION)
        .map(|(w, r)| w * r)
        .sum();
    3.0 / (16.0 * std::f64::consts::PI) * (1.0 + c * c) * q_product(x)
}

/// Spatial gradient of the exact intensity.
pub fn exact_intensity_gradient(x: &[f64; 3], omega: &[f64; 3]) -> [f64; 3] {
    let c: f64 = omega
        .iter()
        .zip(REFERENCE_DIRECTION)
        .map(|(w, r)| w * r)
        .sum();
    let pref = 3.0 / (16.0 * std::f64::consts::PI) * (1.0 + c * c);
    let q = [
        x[0] * (x[0] - 1.0),
        x[1] * (x[1] - 1.0),
        x[2] * (x[2] - 1.0),
    ];
    [
        pref * (2.0 * x[0] - 1.0) * q[1] * q[2],
        pref * q[0] * (2.0 * x[1] - 1.0) * q[2],
        pref * q[0] * q[1] * (2.0 * x[2] - 1.0),
    ]
}

/// Measured incident radiation `G(x) = prod x_i (x_i - 1)`.
pub fn measured_incident_radiation(x: &[f64; 3]) -> f64 {
    q_product(x)
}

/// Spatial oracle `x -> value`.
pub type SpatialOracle = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;
/// Phase oracle `(x, omega) -> value`.
pub type PhaseOracle = Arc<dyn Fn(&[f64; 3], &[f64; 3]) -> f64 + Send + Sync>;
/// Phase oracle returning the spatial gradient.
pub type PhaseGradientOracle = Arc<dyn Fn(&[f64; 3], &[f64; 3]) -> [f64; 3] + Send + Sync>;
/// Measurement oracle `(t, x, nu) -> value`.
pub type MeasurementOracle = Arc<dyn Fn(f64, &[f64; 3], f64) -> f64 + Send + Sync>;

/// Closed-form oracles of the fixture.
#[derive(Clone)]
pub struct OracleSet {
    pub absorption: SpatialOracle,
    pub intensity: PhaseOracle,
    pub intensity_gradient: PhaseGradientOracle,
    pub incident_radiation: SpatialOracle,
}

/// The inverse-problem fixture: the forward problem (with the true `k`),
/// the measured data, and the oracle set.
#[derive(Clone)]
pub struct InverseFixture {
    pub problem: RteProblem,
    /// Measured incident radiation at `(t, x, nu)`.
    pub measured_g: MeasurementOracle,
    pub oracles: OracleSet,
}

/// Build the fixture. The source is the exact-solution substitution
/// `f = omega . grad u + k u + sigma (u - G / (4 pi))`.
pub fn inverse_problem_fixture() -> InverseFixture {
    let domain = DomainDescriptor::new_box(
        3,
        0.0,
        [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
        FrequencyAxis::Monochromatic,
    )
    .expect("valid cube domain");
    let s_d = 4.0 * std::f64::consts::PI;
    let source = move |z: &PhasePoint| {
        let grad = exact_intensity_gradient(&z.x, &z.omega);
        let transport: f64 = z.omega.iter().zip(grad).map(|(w, g)| w * g).sum();
        let u = exact_intensity(&z.x, &z.omega);
        transport + exact_absorption(&z.x) * u + SIGMA * (u - q_product(&z.x) / s_d)
    };
    let problem = RteProblem {
        name: "inverse-cube",
        domain,
        time: TimeDependence::Steady,
        absorption: Arc::new(|x, _| exact_absorption(x)),
        scattering: Arc::new(|_, _| SIGMA),
        kernel: Arc::new(|_, _, _, _| 1.0),
        source: Arc::new(source),
        initial: None,
        boundary: Arc::new(|z| exact_intensity(&z.x, &z.omega)),
        intensity_scale: None,
    };
    normalization_check_or_panic(&problem);
    InverseFixture {
        problem,
        measured_g: Arc::new(|_, x, _| measured_incident_radiation(x)),
        oracles: OracleSet {
            absorption: Arc::new(exact_absorption),
            intensity: Arc::new(exact_intensity),
            intensity_gradient: Arc::new(exact_intensity_gradient),
            incident_radiation: Arc::new(measured_incident_radiation),
        },
    }
}
