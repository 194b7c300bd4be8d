//! Monochromatic stationary transfer in slab geometry.
//!
//! `mu du/dx + (sigma(x) + k(x)) u = (sigma(x)/2) \int Phi(mu, mu') u(x, mu') d mu'`
//! on `[0, 1] x [-1, 1]` with `sigma(x) = x`, `k = 0`, inflow data `u = 1`
//! at `x = 0` (`mu > 0`) and `u = 0` at `x = 1` (`mu < 0`), and an
//! anisotropic kernel expanded in Legendre polynomials.

use super::{normalization_check_or_panic, RteProblem, TimeDependence};
use crate::quadrature::legendre;
use crate::sampling::{DomainDescriptor, FrequencyAxis};
use std::sync::Arc;

/// Legendre expansion coefficients `d_l` of the slab scattering kernel.
pub const SLAB_KERNEL_COEFFS: [f64; 8] = [
    1.0, 1.98398, 1.50823, 0.70075, 0.23489, 0.05133, 0.00760, 0.00048,
];

/// `Phi(mu, mu') = sum_l d_l P_l(mu) P_l(mu')`.
pub fn slab_kernel(mu: f64, mu_p: f64) -> f64 {
    SLAB_KERNEL_COEFFS
        .iter()
        .enumerate()
        .map(|(l, &d)| d * legendre(l, mu) * legendre(l, mu_p))
        .sum()
}

/// The slab benchmark problem.
pub fn slab_problem() -> RteProblem {
    let domain = DomainDescriptor::new_box(
        1,
        0.0,
        [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
        FrequencyAxis::Monochromatic,
    )
    .expect("valid slab domain");
    let problem = RteProblem {
        name: "slab1d",
        domain,
        time: TimeDependence::Steady,
        absorption: Arc::new(|_, _| 0.0),
        scattering: Arc::new(|x, _| x[0]),
        kernel: Arc::new(|omega, omega_p, _, _| slab_kernel(omega[0], omega_p[0])),
        source: Arc::new(|_| 0.0),
        initial: None,
        boundary: Arc::new(|z| if z.x[0] == 0.0 { 1.0 } else { 0.0 }),
        intensity_scale: None,
    };
    normalization_check_or_panic(&problem);
    problem
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn kernel_normalization_via_legendre_orthogonality() {
        // Only the l = 0 term survives the mu' integral, and d_0 = 1.
        let rule = gauss_legendre(10).unwrap();
        for mu in [-0.9, -0.3, 0.0, 0.5, 1.0] {
            let half_integral = 0.5 * rule.integrate(|mu_p| slab_kernel(mu, mu_p));
            assert!((half_integral - 1.0).abs() < 1e-12, "mu = {mu}");
        }
    }

    #[test]
    fn coefficients_match_the_benchmark() {
        let p = slab_problem();
        assert_eq!((p.scattering)(&[0.7, 0.0, 0.0], 0.0), 0.7);
        assert_eq!((p.absorption)(&[0.7, 0.0, 0.0], 0.0), 0.0);
        assert_eq!(SLAB_KERNEL_COEFFS[0], 1.0);
    }

    #[test]
    fn boundary_data_values() {
        use crate::sampling::PhasePoint;
        let p = slab_problem();
        let left = PhasePoint::steady([0.0, 0.0, 0.0], [0.3, 0.0, 0.0], 0.0);
        let right = PhasePoint::steady([1.0, 0.0, 0.0], [-0.3, 0.0, 0.0], 0.0);
        assert_eq!((p.boundary)(&left), 1.0);
        assert_eq!((p.boundary)(&right), 0.0);
    }
}
