//! Evaluate a trained checkpoint against the closed-form oracles:
//! radial-flux error for the polychromatic cube, diffusion-solution
//! discrepancy for the shell, boundary reproduction for the slab.

use rte_pinn::network::load_checkpoint;
use rte_pinn::problems::{
    cube_poly_problem, diffusion_oracle, radial_flux_oracle, shell_time_problem, slab_problem,
    SHELL_T_MEDIUM_EV, SHELL_T_SPHERE_EV,
};
use rte_pinn::quadrature::{gauss_legendre, heat_flux, incident_radiation, sphere_rule};
use rte_pinn::residuals::{IntensityField, NetworkIntensity};
use rte_pinn::sampling::PhasePoint;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).expect("mode: poly|shell|slab");
    let ckpt = std::path::PathBuf::from(args.get(2).expect("checkpoint path"));
    let nets = load_checkpoint(&ckpt).expect("readable checkpoint");
    let net = &nets[0];

    match mode.as_str() {
        "poly" => {
            let problem = cube_poly_problem();
            let rule = sphere_rule(3, 6, 6).unwrap();
            let field = NetworkIntensity {
                net,
                domain: &problem.domain,
            };
            let spatial = gauss_legendre(10).unwrap();
            let (xs, wxs) = spatial.mapped_to(0.0, 1.0);
            let freq = gauss_legendre(8).unwrap();
            let (nus, wnus) = freq.mapped_to(-6.0, 6.0);
            let center = [0.5, 0.5, 0.5];
            let mut num = 0.0;
            let mut den = 0.0;
            for (i, &x) in xs.iter().enumerate() {
                for (j, &y) in xs.iter().enumerate() {
                    for (l, &z) in xs.iter().enumerate() {
                        let p = [x, y, z];
                        let r: f64 = p
                            .iter()
                            .zip(center)
                            .map(|(a, c)| (a - c) * (a - c))
                            .sum::<f64>()
                            .sqrt();
                        if r < 1e-3 {
                            continue;
                        }
                        let rhat = [
                            (p[0] - center[0]) / r,
                            (p[1] - center[1]) / r,
                            (p[2] - center[2]) / r,
                        ];
                        let wspace = wxs[i] * wxs[j] * wxs[l];
                        for (m, &nu) in nus.iter().enumerate() {
                            let w = wspace * wnus[m];
                            let flux = heat_flux(&rule, |omega| {
                                field.value(&PhasePoint::steady(p, *omega, nu))
                            });
                            let f_r: f64 = flux.iter().zip(rhat).map(|(f, rh)| f * rh).sum();
                            let exact = radial_flux_oracle(r, nu);
                            num += w * (f_r - exact) * (f_r - exact);
                            den += w * exact * exact;
                        }
                    }
                }
            }
            println!("poly flux relative L2 error: {:.5}", (num / den).sqrt());
        }
        "shell" => {
            let k_nu: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(10.0);
            let problem = shell_time_problem(k_nu).unwrap();
            let rule = sphere_rule(3, 6, 6).unwrap();
            let field = NetworkIntensity {
                net,
                domain: &problem.domain,
            };
            for r in [2.5f64, 3.0] {
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..16 {
                    let u01 = (i as f64 + 0.5) / 16.0;
                    let nu = 1e15 * (1e18f64 / 1e15).powf(u01);
                    let scale = problem.scale_at(nu);
                    let g_pinn = scale
                        * incident_radiation(&rule, |omega| {
                            field.value(&PhasePoint {
                                t: 1.0,
                                x: [r, 0.0, 0.0],
                                omega: *omega,
                                nu,
                            })
                        });
                    let g_ex = diffusion_oracle(
                        1.0,
                        r,
                        nu,
                        k_nu,
                        SHELL_T_SPHERE_EV,
                        SHELL_T_MEDIUM_EV,
                        2.0,
                    );
                    num += (g_pinn - g_ex) * (g_pinn - g_ex);
                    den += g_ex * g_ex;
                }
                println!(
                    "shell k={k_nu} r={r}: rel discrepancy vs diffusion {:.5}",
                    (num / den).sqrt()
                );
            }
        }
        "slab" => {
            let problem = slab_problem();
            let field = NetworkIntensity {
                net,
                domain: &problem.domain,
            };
            let gauss = gauss_legendre(64).unwrap();
            let (mus, ws) = gauss.mapped_to(0.0, 1.0);
            let mut num = 0.0;
            let mut den = 0.0;
            for (&mu, &w) in mus.iter().zip(&ws) {
                let left = field.value(&PhasePoint::steady([0.0, 0.0, 0.0], [mu, 0.0, 0.0], 0.0));
                num += w * (left - 1.0) * (left - 1.0);
                den += w;
                let right = field.value(&PhasePoint::steady([1.0, 0.0, 0.0], [-mu, 0.0, 0.0], 0.0));
                num += w * right * right;
            }
            println!("slab boundary rel L2: {:.5}", (num / den).sqrt());
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..=128 {
                for j in 0..=128 {
                    let x = i as f64 / 128.0;
                    let mu = -1.0 + 2.0 * j as f64 / 128.0;
                    let v = field.value(&PhasePoint::steady([x, 0.0, 0.0], [mu, 0.0, 0.0], 0.0));
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            println!("slab range: [{lo:.4}, {hi:.4}]");
        }
        other => panic!("unknown mode {other}"),
    }
}
