//! Polychromatic time-dependent transfer in a spherical shell: a hot sphere
//! radiating into a colder static medium, with the diffusion-approximation
//! solution for the incident radiation as comparison oracle.

use super::constants::{BOLTZMANN_KB, ELECTRON_VOLT, LIGHT_SPEED, PLANCK_H};
use super::{normalization_check_or_panic, RteProblem, TimeDependence};
use crate::sampling::{DomainDescriptor, FrequencyAxis};
use crate::{Error, Result};
use std::sync::Arc;

/// Sphere temperature, eV.
pub const SHELL_T_SPHERE_EV: f64 = 150.0;
/// Medium temperature, eV.
pub const SHELL_T_MEDIUM_EV: f64 = 120.0;
/// Inner and outer shell radii.
pub const SHELL_RADII: (f64, f64) = (2.0, 4.0);
/// Frequency band, Hz.
pub const SHELL_BAND: (f64, f64) = (1e15, 1e18);

/// Planck spectral radiance `B(T, nu) = (2 h nu^3 / c^2) / (e^{h nu / k_b T} - 1)`
/// with the temperature given in eV.
pub fn planck(temperature_ev: f64, nu: f64) -> Result<f64> {
    if temperature_ev <= 0.0 || nu <= 0.0 {
        return Err(Error::config(format!(
            "planck needs positive temperature and frequency, got ({temperature_ev}, {nu})"
        )));
    }
    Ok(planck_value(temperature_ev, nu))
}

fn planck_value(temperature_ev: f64, nu: f64) -> f64 {
    // h nu / (k_b T) with T in eV; k_b T = T_ev * e.
    let x = PLANCK_H * nu / (temperature_ev * ELECTRON_VOLT);
    let _ = BOLTZMANN_KB; // conversion absorbed into the eV definition
    2.0 * PLANCK_H * nu.powi(3) / (LIGHT_SPEED * LIGHT_SPEED) / x.exp_m1()
}

/// `b(T, nu) = 4 pi B(T, nu)`, the isotropic incident radiation at
/// temperature `T`.
pub fn planck_b(temperature_ev: f64, nu: f64) -> f64 {
    4.0 * std::f64::consts::PI * planck_value(temperature_ev, nu)
}

/// The shell benchmark for a given grey absorption coefficient `k_nu`.
///
/// Time is rescaled by the light speed (`tau = c t in [0, 1]`), and the
/// network represents the intensity in units of `B(T_s, nu)`, which keeps
/// the unknown O(1) across the five-decade band: the scaled equation is
/// `d u/d tau + omega . grad u = k_nu (rho(nu) - u)` with
/// `rho = B(T_m, nu) / B(T_s, nu)`, inner inflow 1, outer inflow and
/// initial data `rho(nu)`.
pub fn shell_time_problem(k_nu: f64) -> Result<RteProblem> {
    if k_nu <= 0.0 {
        return Err(Error::config("k_nu must be positive"));
    }
    let (r_inner, _r_outer) = SHELL_RADII;
    let domain = DomainDescriptor::new_shell(
        SHELL_RADII.0,
        SHELL_RADII.1,
        1.0,
        FrequencyAxis::Band {
            lo: SHELL_BAND.0,
            hi: SHELL_BAND.1,
            log_rescale: true,
        },
    )?;
    let rho = |nu: f64| planck_value(SHELL_T_MEDIUM_EV, nu) / planck_value(SHELL_T_SPHERE_EV, nu);
    let mid_radius = 0.5 * (SHELL_RADII.0 + SHELL_RADII.1);
    let problem = RteProblem {
        name: "shell-time",
        domain,
        time: TimeDependence::Transient { inv_c: 1.0 },
        absorption: Arc::new(move |_, _| k_nu),
        scattering: Arc::new(|_, _| 0.0),
        kernel: Arc::new(|_, _, _, _| 1.0),
        source: Arc::new(move |z| k_nu * rho(z.nu)),
        initial: Some(Arc::new(move |z| rho(z.nu))),
        boundary: Arc::new(move |z| {
            let r = z.x.iter().map(|c| c * c).sum::<f64>().sqrt();
            if r < mid_radius {
                debug_assert!((r - r_inner).abs() < 1e-9);
                1.0
            } else {
                rho(z.nu)
            }
        }),
        intensity_scale: Some(Arc::new(move |nu| planck_value(SHELL_T_SPHERE_EV, nu))),
    };
    normalization_check_or_panic(&problem);
    Ok(problem)
}

/// Diffusion-approximation incident radiation of the shell experiment
/// (physical units):
///
/// `G = b(T_m) + (R_i / r)(b(T_s) - b(T_m)) F(tau, r)` with the two-erfc
/// similarity profile `F`. `tau = c t` is the rescaled time; the `t -> 0+`
/// limit (`F -> 0` for `r > R_i`) is taken explicitly.
pub fn diffusion_oracle(
    tau: f64,
    r: f64,
    nu: f64,
    k_nu: f64,
    t_sphere_ev: f64,
    t_medium_ev: f64,
    r_inner: f64,
) -> f64 {
    debug_assert!(r >= r_inner, "oracle valid for r >= R_i");
    debug_assert!(tau >= 0.0);
    let b_m = planck_b(t_medium_ev, nu);
    let b_s = planck_b(t_sphere_ev, nu);
    let f = if tau == 0.0 {
        if r > r_inner {
            0.0
        } else {
            1.0
        }
    } else {
        let spread = (3.0 * k_nu / (4.0 * tau)).sqrt() * (r - r_inner);
        let depth = (k_nu * tau).sqrt();
        0.5 * (-3.0 * k_nu * (r - r_inner)).exp()
            * (libm::erfc(spread - depth) + libm::erfc(spread + depth))
    };
    b_m + (r_inner / r) * (b_s - b_m) * f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planck_reference_values() {
        // Frozen from an independent evaluation of the formula.
        let cases = [
            (150.0, 1e15, 5.274_599_567_342_685e-4),
            (120.0, 1e15, 4.205_087_105_272_447e-4),
            (150.0, 1e17, 9.993_709_621_862_354e-1),
            (120.0, 1e17, 4.852_422_511_172_423_4e-1),
            (150.0, 1e18, 1.565_525_769_798_199_5e-8),
            (120.0, 1e18, 1.589_147_178_832_297_5e-11),
        ];
        for (t, nu, want) in cases {
            let got = planck(t, nu).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-12,
                "B({t}, {nu}) = {got:e}, want {want:e}"
            );
        }
    }

    #[test]
    fn planck_rejects_nonpositive_arguments() {
        assert!(planck(0.0, 1e15).is_err());
        assert!(planck(150.0, -1.0).is_err());
    }

    #[test]
    fn wien_limit() {
        // B e^{h nu / k_b T} -> 2 h nu^3 / c^2; at x = 50 the relative
        // deviation is e^{-50}.
        let t = 150.0;
        let nu = 50.0 * t * ELECTRON_VOLT / PLANCK_H;
        let b = planck(t, nu).unwrap();
        let x: f64 = 50.0;
        let rayleigh = 2.0 * PLANCK_H * nu.powi(3) / (LIGHT_SPEED * LIGHT_SPEED);
        assert!((b * x.exp() / rayleigh - 1.0).abs() < 1e-10);
    }

    #[test]
    fn planck_is_monotone_in_temperature() {
        for nu in [1e15, 1e16, 3e17, 1e18] {
            let mut last = 0.0;
            for t in [50.0, 100.0, 150.0, 200.0] {
                let b = planck(t, nu).unwrap();
                assert!(b > last);
                last = b;
            }
        }
    }

    #[test]
    fn b_is_four_pi_times_planck() {
        let nu = 3e16;
        assert!(
            (planck_b(150.0, nu) - 4.0 * std::f64::consts::PI * planck(150.0, nu).unwrap()).abs()
                < 1e-18
        );
    }

    #[test]
    fn diffusion_boundary_recovery() {
        // At r = R_i the two erfc terms sum to 2 and G = b(T_s).
        for tau in [1e-6, 0.3, 1.0] {
            for nu in [1e15, 1e16, 1e18] {
                for k in [1.0, 10.0] {
                    let g = diffusion_oracle(tau, 2.0, nu, k, 150.0, 120.0, 2.0);
                    let want = planck_b(150.0, nu);
                    assert!(((g - want) / want).abs() < 1e-10, "tau={tau} nu={nu} k={k}");
                }
            }
        }
    }

    #[test]
    fn diffusion_far_field_and_initial_limits() {
        let nu = 1e16;
        let b_m = planck_b(120.0, nu);
        let far = diffusion_oracle(1.0, 400.0, nu, 1.0, 150.0, 120.0, 2.0);
        assert!(((far - b_m) / b_m).abs() < 1e-10);
        let early = diffusion_oracle(1e-12, 2.5, nu, 1.0, 150.0, 120.0, 2.0);
        assert!(((early - b_m) / b_m).abs() < 1e-10);
        let initial = diffusion_oracle(0.0, 2.5, nu, 1.0, 150.0, 120.0, 2.0);
        assert_eq!(initial, b_m);
    }

    #[test]
    fn diffusion_reference_profile_values() {
        // F(tau=1, r, k) frozen from an independent erfc evaluation.
        let f = |r: f64, k: f64| {
            let b_m = planck_b(120.0, 1e17);
            let b_s = planck_b(150.0, 1e17);
            (diffusion_oracle(1.0, r, 1e17, k, 150.0, 120.0, 2.0) - b_m) / ((2.0 / r) * (b_s - b_m))
        };
        // Reconstructing F from G subtracts two nearly equal numbers for
        // k = 10, which leaves ~1e-15 of cancellation noise.
        assert!((f(2.5, 1.0) - 1.807_421_129_625_256_8e-1).abs() < 1e-12);
        assert!((f(3.0, 1.0) - 2.884_141_535_482_758e-2).abs() < 1e-13);
        assert!((f(2.5, 10.0) - 3.041_855_862_807_204e-7).abs() < 1e-12);
    }

    #[test]
    fn shell_problem_data_is_consistent() {
        use crate::sampling::PhasePoint;
        let p = shell_time_problem(10.0).unwrap();
        let nu = 1e16;
        let rho = planck(120.0, nu).unwrap() / planck(150.0, nu).unwrap();
        let inner = PhasePoint {
            t: 0.5,
            x: [2.0, 0.0, 0.0],
            omega: [1.0, 0.0, 0.0],
            nu,
        };
        let outer = PhasePoint {
            t: 0.5,
            x: [0.0, 4.0, 0.0],
            omega: [0.0, -1.0, 0.0],
            nu,
        };
        assert_eq!((p.boundary)(&inner), 1.0);
        assert!(((p.boundary)(&outer) - rho).abs() < 1e-15);
        let init = p.initial.as_ref().unwrap();
        assert!((init(&outer) - rho).abs() < 1e-15);
        // Scaled source: k_nu * rho.
        assert!(((p.source)(&outer) - 10.0 * rho).abs() < 1e-14);
        assert!(shell_time_problem(0.0).is_err());
    }
}
