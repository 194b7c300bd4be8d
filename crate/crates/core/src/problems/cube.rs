//! Stationary transfer in the unit cube: a monochromatic variant with a
//! central source, and a polychromatic variant with a closed-form radial
//! flux.

use super::{normalization_check_or_panic, RteProblem, TimeDependence};
use crate::sampling::{DomainDescriptor, FrequencyAxis};
use std::sync::Arc;

const CENTER: [f64; 3] = [0.5, 0.5, 0.5];

fn radius(x: &[f64; 3]) -> f64 {
    x.iter()
        .zip(CENTER)
        .map(|(xi, ci)| (xi - ci) * (xi - ci))
        .sum::<f64>()
        .sqrt()
}

/// Emission profile of the monochromatic cube: `I_b(x) = max(0.5 - r, 0)`.
pub fn emission_profile(x: &[f64; 3]) -> f64 {
    (0.5 - radius(x)).max(0.0)
}

/// Monochromatic cube with a source at the center: `k = I_b`, `sigma = 1`,
/// isotropic kernel, `f = k I_b`, zero Dirichlet inflow.
pub fn cube_mono_problem() -> RteProblem {
    let domain = DomainDescriptor::new_box(
        3,
        0.0,
        [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
        FrequencyAxis::Monochromatic,
    )
    .expect("valid cube domain");
    let problem = RteProblem {
        name: "cube3d-mono",
        domain,
        time: TimeDependence::Steady,
        absorption: Arc::new(|x, _| emission_profile(x)),
        scattering: Arc::new(|_, _| 1.0),
        kernel: Arc::new(|_, _, _, _| 1.0),
        source: Arc::new(|z| {
            let ib = emission_profile(&z.x);
            ib * ib
        }),
        initial: None,
        boundary: Arc::new(|_| 0.0),
        intensity_scale: None,
    };
    normalization_check_or_panic(&problem);
    problem
}

/// Normalized frequency profile `phi(nu) = exp(-nu^2) / sqrt(pi)`.
pub fn frequency_profile(nu: f64) -> f64 {
    (-nu * nu).exp() / std::f64::consts::PI.sqrt()
}

/// Polychromatic cube on the band `[-6, 6]`: zero absorption, `sigma = 1`,
/// isotropic within-group scattering and a spherically symmetric source.
pub fn cube_poly_problem() -> RteProblem {
    let domain = DomainDescriptor::new_box(
        3,
        0.0,
        [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
        FrequencyAxis::Band {
            lo: -6.0,
            hi: 6.0,
            log_rescale: false,
        },
    )
    .expect("valid cube domain");
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let problem = RteProblem {
        name: "cube3d-poly",
        domain,
        time: TimeDependence::Steady,
        absorption: Arc::new(|_, _| 0.0),
        scattering: Arc::new(|_, _| 1.0),
        kernel: Arc::new(|_, _, _, _| 1.0),
        source: Arc::new(move |z| {
            let r = radius(&z.x);
            if r <= 0.5 {
                sqrt_pi * frequency_profile(z.nu) * (1.0 - 2.0 * r)
            } else {
                0.0
            }
        }),
        initial: None,
        boundary: Arc::new(|_| 0.0),
        intensity_scale: None,
    };
    normalization_check_or_panic(&problem);
    problem
}

/// Closed-form radial flux of the polychromatic cube source.
///
/// `F_r = 4 sqrt(pi^3) phi(nu) (r/3 - r^2/2)` inside the source ball and
/// `4 sqrt(pi^3) phi(nu) / (96 r^2)` outside.
pub fn radial_flux_oracle(r: f64, nu: f64) -> f64 {
    debug_assert!(r >= 0.0, "radius must be nonnegative");
    let prefactor = 4.0 * std::f64::consts::PI.powi(3).sqrt() * frequency_profile(nu);
    if r <= 0.5 {
        prefactor * (r / 3.0 - r * r / 2.0)
    } else {
        prefactor / (96.0 * r * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emission_values() {
        assert_eq!(emission_profile(&CENTER), 0.5);
        assert_eq!(emission_profile(&[0.5, 0.5, 1.2]), 0.0); // r = 0.7
        let p = cube_mono_problem();
        let z = crate::sampling::PhasePoint::steady(CENTER, [0.0, 0.0, 1.0], 0.0);
        assert_eq!((p.source)(&z), 0.25);
    }

    #[test]
    fn radial_flux_is_continuous_at_the_source_edge() {
        for nu in [-3.0, 0.0, 1.5] {
            let inside = {
                let r = 0.5;
                4.0 * std::f64::consts::PI.powi(3).sqrt()
                    * frequency_profile(nu)
                    * (r / 3.0 - r * r / 2.0)
            };
            let outside = 4.0 * std::f64::consts::PI.powi(3).sqrt() * frequency_profile(nu)
                / (96.0 * 0.25);
            assert!((inside - outside).abs() < 1e-15 * inside.abs().max(1.0));
            assert!((radial_flux_oracle(0.5, nu) - inside).abs() < 1e-15);
        }
        // Value at the edge for nu = 0 is pi / 6.
        let v = radial_flux_oracle(0.5, 0.0);
        assert!((v - std::f64::consts::PI / 6.0).abs() < 1e-14, "got {v}");
    }

    #[test]
    fn radial_flux_vanishes_at_the_origin() {
        assert!(radial_flux_oracle(1e-12, 0.0).abs() < 1e-11);
    }

    #[test]
    fn radial_flux_satisfies_its_divergence_equation() {
        // (1/r^2) d(r^2 F_r)/dr = 4 pi f at interior radii, via central
        // differences.
        let h = 1e-6;
        for (r, nu) in [(0.25, 0.0), (0.1, 1.0), (0.4, -2.0), (0.7, 0.5)] {
            let g = |rr: f64| rr * rr * radial_flux_oracle(rr, nu);
            let div = (g(r + h) - g(r - h)) / (2.0 * h) / (r * r);
            let f = if r <= 0.5 {
                std::f64::consts::PI.sqrt() * frequency_profile(nu) * (1.0 - 2.0 * r)
            } else {
                0.0
            };
            let rhs = 4.0 * std::f64::consts::PI * f;
            assert!(
                (div - rhs).abs() < 1e-6,
                "r = {r}, nu = {nu}: {div} vs {rhs}"
            );
        }
    }
}
