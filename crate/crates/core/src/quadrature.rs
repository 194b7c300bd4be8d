//! Gauss-Legendre rules and sphere rules for the scattering integral and
//! angular moments of the radiative intensity.

use crate::{Error, Result};

/// Largest supported Gauss-Legendre order.
pub const MAX_GAUSS_ORDER: usize = 128;

/// Surface area of the angular domain for spatial dimension `d`.
///
/// `d = 1` uses the slab convention `mu in [-1, 1]` with measure `d mu`,
/// so the "surface area" is 2; `d = 3` is the unit sphere with area `4 pi`.
pub fn surface_area(spatial_dim: usize) -> f64 {
    match spatial_dim {
        1 => 2.0,
        3 => 4.0 * std::f64::consts::PI,
        d => panic!("unsupported spatial dimension {d}"),
    }
}

/// Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn legendre(l: usize, x: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut pm1, mut p) = (1.0, x);
            for k in 2..=l {
                let next = ((2 * k - 1) as f64 * x * p - (k - 1) as f64 * pm1) / k as f64;
                pm1 = p;
                p = next;
            }
            p
        }
    }
}

/// A Gauss-Legendre quadrature rule on `[-1, 1]`.
///
/// Nodes are strictly increasing, weights positive, and the rule is exact
/// for polynomials of degree `<= 2n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrate `f` over `[-1, 1]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Nodes and weights affinely mapped to `[a, b]`.
    pub fn mapped_to(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        (
            self.nodes.iter().map(|&x| mid + half * x).collect(),
            self.weights.iter().map(|&w| w * half).collect(),
        )
    }
}

/// Build the `n`-point Gauss-Legendre rule by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Result<GaussRule> {
    if n == 0 || n > MAX_GAUSS_ORDER {
        return Err(Error::UnsupportedOrder {
            order: n,
            max: MAX_GAUSS_ORDER,
        });
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Compute the upper half and mirror; this keeps the rule exactly
    // symmetric so weight sums hit 2 at machine precision.
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess for the i-th root (descending).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 && p.abs() < 1e-14 * (n as f64) {
                break;
            }
        }
        let (p, dp) = legendre_with_derivative(n, x);
        debug_assert!(
            p.abs() < 1e-12,
            "Newton residual {p:e} at order {n}"
        );
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    Ok(GaussRule { nodes, weights })
}

/// `(P_n(x), P_n'(x))` via the recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut pm1, mut p) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let next = ((2 * k - 1) as f64 * x * p - (k - 1) as f64 * pm1) / k as f64;
        pm1 = p;
        p = next;
    }
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

/// One node of a sphere rule: a direction with its quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereNode {
    /// Unit direction for `d = 3`; `[mu, 0, 0]` for the slab convention.
    pub omega: [f64; 3],
    pub weight: f64,
}

/// Optional frequency factor of a scattering rule, mapped onto the band.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyNodes {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Quadrature rule over the angular domain `S` (optionally tensorized with
/// a frequency rule over the band).
///
/// Angular weights sum to [`surface_area`]`(dim)` and directions are unit
/// vectors; for `d = 3` the rule is the tensor of Gauss-Legendre in
/// `mu = cos(theta)` with equal-weight nodes in `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    dim: usize,
    nodes: Vec<SphereNode>,
    freq: Option<FrequencyNodes>,
}

impl SphereRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Angular node count `N_S` (frequency factor excluded).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[SphereNode] {
        &self.nodes
    }

    pub fn frequency_nodes(&self) -> Option<&FrequencyNodes> {
        self.freq.as_ref()
    }

    pub fn weight_sum(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// Attach a Gauss-Legendre frequency factor over `[lo, hi]`.
    pub fn with_frequency_band(mut self, lo: f64, hi: f64, order: usize) -> Result<Self> {
        let rule = gauss_legendre(order)?;
        let (nodes, weights) = rule.mapped_to(lo, hi);
        self.freq = Some(FrequencyNodes { nodes, weights });
        Ok(self)
    }
}

/// Build the angular rule for spatial dimension `d`.
///
/// `d = 1`: Gauss-Legendre on `mu in [-1, 1]` with `n_mu` nodes (`n_phi`
/// ignored). `d = 3`: tensor of Gauss-Legendre in `mu` and `n_phi`
/// equal-weight azimuthal nodes, `N_S = n_mu * n_phi`.
pub fn sphere_rule(dim: usize, n_mu: usize, n_phi: usize) -> Result<SphereRule> {
    let gauss = gauss_legendre(n_mu)?;
    match dim {
        1 => {
            let nodes = gauss
                .nodes()
                .iter()
                .zip(gauss.weights())
                .map(|(&mu, &w)| SphereNode {
                    omega: [mu, 0.0, 0.0],
                    weight: w,
                })
                .collect();
            Ok(SphereRule {
                dim,
                nodes,
                freq: None,
            })
        }
        3 => {
            if n_phi == 0 {
                return Err(Error::config("n_phi must be positive for d = 3"));
            }
            let w_phi = 2.0 * std::f64::consts::PI / n_phi as f64;
            let mut nodes = Vec::with_capacity(n_mu * n_phi);
            for (&mu, &w_mu) in gauss.nodes().iter().zip(gauss.weights()) {
                let s = (1.0 - mu * mu).sqrt();
                for j in 0..n_phi {
                    let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_phi as f64;
                    nodes.push(SphereNode {
                        omega: [s * phi.cos(), s * phi.sin(), mu],
                        weight: w_mu * w_phi,
                    });
                }
            }
            Ok(SphereRule {
                dim,
                nodes,
                freq: None,
            })
        }
        d => Err(Error::config(format!("unsupported spatial dimension {d}"))),
    }
}

/// Quadrature approximation of the scattering integral
/// `\int\int Phi(omega, omega', nu, nu') u(omega', nu') d omega' d nu'`
/// (no `1/s_d` prefactor; the residual applies it).
///
/// `u_vals` must be aligned with the rule's nodes: angular-major when a
/// frequency factor is present (`u_vals[i * n_freq + j]` for angular node
/// `i` and frequency node `j`), plain angular order otherwise. For a rule
/// without frequency nodes the kernel is evaluated at `nu' = nu`.
///
/// # Panics
///
/// Panics when `u_vals` does not match the rule's node count.
pub fn scattering_sum<K>(kernel: K, u_vals: &[f64], rule: &SphereRule, omega: &[f64; 3], nu: f64) -> f64
where
    K: Fn(&[f64; 3], &[f64; 3], f64, f64) -> f64,
{
    match rule.frequency_nodes() {
        None => {
            assert_eq!(
                u_vals.len(),
                rule.len(),
                "u_vals length must match angular node count"
            );
            rule.nodes()
                .iter()
                .zip(u_vals)
                .map(|(node, &u)| node.weight * kernel(omega, &node.omega, nu, nu) * u)
                .sum()
        }
        Some(freq) => {
            let nf = freq.nodes.len();
            assert_eq!(
                u_vals.len(),
                rule.len() * nf,
                "u_vals length must match angular x frequency node count"
            );
            let mut total = 0.0;
            for (i, node) in rule.nodes().iter().enumerate() {
                for j in 0..nf {
                    let nu_p = freq.nodes[j];
                    total += node.weight
                        * freq.weights[j]
                        * kernel(omega, &node.omega, nu, nu_p)
                        * u_vals[i * nf + j];
                }
            }
            total
        }
    }
}

/// Incident radiation (zeroth angular moment) `G = sum_i w_i u(omega_i)`.
///
/// The caller closes `u` over the remaining coordinates `(t, x, nu)`.
pub fn incident_radiation<F: FnMut(&[f64; 3]) -> f64>(rule: &SphereRule, mut u: F) -> f64 {
    rule.nodes()
        .iter()
        .map(|node| node.weight * u(&node.omega))
        .sum()
}

/// Heat flux (first angular moment) `F = sum_i w_i u(omega_i) omega_i`.
pub fn heat_flux<F: FnMut(&[f64; 3]) -> f64>(rule: &SphereRule, mut u: F) -> [f64; 3] {
    let mut flux = [0.0; 3];
    for node in rule.nodes() {
        let v = node.weight * u(&node.omega);
        for (f, w) in flux.iter_mut().zip(node.omega) {
            *f += v * w;
        }
    }
    flux
}
