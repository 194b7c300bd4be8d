//! Training point generation on the rescaled computational domain.
//!
//! Points live in physical coordinates as [`PhasePoint`]s; the
//! [`DomainDescriptor`] maps them onto the `[0, 1]^(2d+1)` network input
//! cube and back. Boundary points parametrize the inward hemisphere
//! directly so the inflow condition `omega . n(x) < 0` holds by
//! construction rather than by rejection.

mod sobol;

pub use sobol::{sobol_sequence, SobolSequence, MAX_SOBOL_DIM};

use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A point of the phase space `(t, x, omega, nu)`.
///
/// Only the first `spatial_dim` entries of `x` are meaningful; the slab
/// convention stores `mu` in `omega[0]`. `t = 0` for steady problems and
/// `nu = 0` for monochromatic ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub t: f64,
    pub x: [f64; 3],
    pub omega: [f64; 3],
    pub nu: f64,
}

impl PhasePoint {
    pub fn steady(x: [f64; 3], omega: [f64; 3], nu: f64) -> Self {
        PhasePoint {
            t: 0.0,
            x,
            omega,
            nu,
        }
    }
}

/// Frequency axis of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyAxis {
    Monochromatic,
    /// `[lo, hi]` band; `log_rescale` maps it to `[0, 1]` logarithmically
    /// (used for bands spanning several decades).
    Band { lo: f64, hi: f64, log_rescale: bool },
}

/// Spatial geometry of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// Axis-aligned box given by `spatial_box`.
    Box,
    /// Spherical shell between two concentric spheres (3D only); network
    /// inputs are rescaled by the bounding box.
    SphericalShell { r_inner: f64, r_outer: f64 },
}

/// Descriptor of the computational domain `D_T x S x Lambda` together with
/// the affine (or logarithmic, for wide frequency bands) rescale maps onto
/// the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainDescriptor {
    pub spatial_dim: usize,
    /// `0` means steady (no time input).
    pub time_horizon: f64,
    pub spatial_box: [(f64, f64); 3],
    pub frequency: FrequencyAxis,
    pub geometry: Geometry,
}

impl DomainDescriptor {
    /// Axis-aligned box domain.
    pub fn new_box(
        spatial_dim: usize,
        time_horizon: f64,
        spatial_box: [(f64, f64); 3],
        frequency: FrequencyAxis,
    ) -> Result<Self> {
        if spatial_dim != 1 && spatial_dim != 3 {
            return Err(Error::config(format!(
                "spatial_dim must be 1 or 3, got {spatial_dim}"
            )));
        }
        if time_horizon < 0.0 {
            return Err(Error::config("time_horizon must be >= 0"));
        }
        for (a, b) in spatial_box.iter().take(spatial_dim) {
            if !(a < b) {
                return Err(Error::config(format!("spatial box needs a < b, got [{a}, {b}]")));
            }
        }
        validate_frequency(&frequency)?;
        Ok(DomainDescriptor {
            spatial_dim,
            time_horizon,
            spatial_box,
            frequency,
            geometry: Geometry::Box,
        })
    }

    /// Spherical shell between radii `r_inner < r_outer`, centered at the
    /// origin.
    pub fn new_shell(
        r_inner: f64,
        r_outer: f64,
        time_horizon: f64,
        frequency: FrequencyAxis,
    ) -> Result<Self> {
        if !(r_inner > 0.0 && r_inner < r_outer) {
            return Err(Error::config(format!(
                "shell needs 0 < r_inner < r_outer, got ({r_inner}, {r_outer})"
            )));
        }
        validate_frequency(&frequency)?;
        Ok(DomainDescriptor {
            spatial_dim: 3,
            time_horizon,
            spatial_box: [(-r_outer, r_outer); 3],
            frequency,
            geometry: Geometry::SphericalShell { r_inner, r_outer },
        })
    }

    pub fn is_steady(&self) -> bool {
        self.time_horizon == 0.0
    }

    pub fn is_monochromatic(&self) -> bool {
        matches!(self.frequency, FrequencyAxis::Monochromatic)
    }

    fn angular_dims(&self) -> usize {
        if self.spatial_dim == 1 {
            1
        } else {
            2
        }
    }

    /// Network input dimension: time? + d + angle + frequency?.
    pub fn input_dim(&self) -> usize {
        (!self.is_steady()) as usize
            + self.spatial_dim
            + self.angular_dims()
            + (!self.is_monochromatic()) as usize
    }

    /// Index of the first angular slot in the input layout.
    pub fn angular_offset(&self) -> usize {
        (!self.is_steady()) as usize + self.spatial_dim
    }

    /// Rescale a physical phase point into the unit input cube.
    ///
    /// Layout: `[t?, x_1..x_d, mu, phi?, nu?]`.
    pub fn write_unit(&self, z: &PhasePoint, out: &mut [f64]) {
        assert_eq!(out.len(), self.input_dim(), "input slice length mismatch");
        let mut k = 0;
        if !self.is_steady() {
            out[k] = z.t / self.time_horizon;
            k += 1;
        }
        for i in 0..self.spatial_dim {
            let (a, b) = self.spatial_box[i];
            out[k] = (z.x[i] - a) / (b - a);
            k += 1;
        }
        let (mu_hat, phi_hat) = self.angular_unit_coords(&z.omega);
        out[k] = mu_hat;
        k += 1;
        if self.spatial_dim == 3 {
            out[k] = phi_hat;
            k += 1;
        }
        if let FrequencyAxis::Band { lo, hi, log_rescale } = self.frequency {
            out[k] = if log_rescale {
                (z.nu / lo).ln() / (hi / lo).ln()
            } else {
                (z.nu - lo) / (hi - lo)
            };
        }
    }

    pub fn to_unit(&self, z: &PhasePoint) -> Vec<f64> {
        let mut out = vec![0.0; self.input_dim()];
        self.write_unit(z, &mut out);
        out
    }

    /// Map unit-cube coordinates back to a physical phase point.
    pub fn from_unit(&self, u: &[f64]) -> PhasePoint {
        assert_eq!(u.len(), self.input_dim(), "input slice length mismatch");
        let mut k = 0;
        let t = if self.is_steady() {
            0.0
        } else {
            let v = u[k] * self.time_horizon;
            k += 1;
            v
        };
        let mut x = [0.0; 3];
        for (i, xi) in x.iter_mut().enumerate().take(self.spatial_dim) {
            let (a, b) = self.spatial_box[i];
            *xi = a + (b - a) * u[k];
            k += 1;
        }
        let omega = if self.spatial_dim == 1 {
            let mu = 2.0 * u[k] - 1.0;
            k += 1;
            [mu, 0.0, 0.0]
        } else {
            let mu = 2.0 * u[k] - 1.0;
            let phi = 2.0 * std::f64::consts::PI * u[k + 1];
            k += 2;
            let s = (1.0 - mu * mu).max(0.0).sqrt();
            [s * phi.cos(), s * phi.sin(), mu]
        };
        let nu = match self.frequency {
            FrequencyAxis::Monochromatic => 0.0,
            FrequencyAxis::Band { lo, hi, log_rescale } => {
                if log_rescale {
                    lo * (hi / lo).powf(u[k])
                } else {
                    lo + (hi - lo) * u[k]
                }
            }
        };
        PhasePoint { t, x, omega, nu }
    }

    /// Unit angular coordinates `(mu_hat, phi_hat)` of a direction.
    pub fn angular_unit_coords(&self, omega: &[f64; 3]) -> (f64, f64) {
        if self.spatial_dim == 1 {
            ((omega[0] + 1.0) / 2.0, 0.0)
        } else {
            let mu_hat = (omega[2] + 1.0) / 2.0;
            let mut phi = omega[1].atan2(omega[0]);
            if phi < 0.0 {
                phi += 2.0 * std::f64::consts::PI;
            }
            (mu_hat, phi / (2.0 * std::f64::consts::PI))
        }
    }

    /// Tangent vector in unit input coordinates whose directional derivative
    /// equals the physical transport operator `inv_c d/dt + omega . grad_x`.
    pub fn transport_tangent(&self, omega: &[f64; 3], inv_c: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.input_dim()];
        self.write_transport_tangent(omega, inv_c, &mut v);
        v
    }

    /// In-place variant of [`Self::transport_tangent`].
    pub fn write_transport_tangent(&self, omega: &[f64; 3], inv_c: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.input_dim(), "tangent slice length mismatch");
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut k = 0;
        if !self.is_steady() {
            out[k] = inv_c / self.time_horizon;
            k += 1;
        }
        for i in 0..self.spatial_dim {
            let (a, b) = self.spatial_box[i];
            out[k] = omega[i] / (b - a);
            k += 1;
        }
    }

    /// `d x_hat_i / d x_i`, the chain-rule factor for spatial axis `i`.
    pub fn spatial_scale(&self, axis: usize) -> f64 {
        let (a, b) = self.spatial_box[axis];
        1.0 / (b - a)
    }
}

fn validate_frequency(f: &FrequencyAxis) -> Result<()> {
    if let FrequencyAxis::Band { lo, hi, log_rescale } = f {
        if !(lo < hi) {
            return Err(Error::config(format!(
                "frequency band needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if *log_rescale && *lo <= 0.0 {
            return Err(Error::config("log frequency rescale needs lo > 0"));
        }
    }
    Ok(())
}

/// Interior or temporal-boundary training point with its QMC weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorPoint {
    pub point: PhasePoint,
    pub weight: f64,
}

/// Spatial-boundary training point; `normal` is the outward unit normal of
/// the flow domain at `point.x` and `point.omega . normal < 0` holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: PhasePoint,
    pub weight: f64,
    pub normal: [f64; 3],
}

/// Measurement location `(t, x, nu)` for the inverse data term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub t: f64,
    pub x: [f64; 3],
    pub nu: f64,
    pub weight: f64,
}

/// The training point collections consumed by the loss.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSets {
    pub interior: Vec<InteriorPoint>,
    pub spatial_boundary: Vec<BoundaryPoint>,
    pub temporal_boundary: Vec<InteriorPoint>,
    pub data: Vec<DataPoint>,
}

impl TrainingSets {
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        (
            self.interior.len(),
            self.spatial_boundary.len(),
            self.temporal_boundary.len(),
            self.data.len(),
        )
    }
}

/// Point source for training set generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Sobol,
    UniformRandom,
}

/// Unified stream of unit-cube points.
enum UnitStream {
    Sobol(SobolSequence),
    Random(ChaCha8Rng, usize),
}

impl UnitStream {
    fn new(sampler: Sampler, dim: usize, seed: u64) -> Result<Self> {
        match sampler {
            Sampler::Sobol => {
                let mut seq = SobolSequence::new(dim)?;
                seq.skip(1); // drop the all-zeros corner point
                Ok(UnitStream::Sobol(seq))
            }
            Sampler::UniformRandom => Ok(UnitStream::Random(ChaCha8Rng::seed_from_u64(seed), dim)),
        }
    }

    fn next(&mut self, out: &mut [f64]) {
        match self {
            UnitStream::Sobol(seq) => seq.next_point(out),
            UnitStream::Random(rng, dim) => {
                debug_assert_eq!(out.len(), *dim);
                for o in out.iter_mut() {
                    *o = rng.random::<f64>();
                }
            }
        }
    }
}

/// Clamp a unit coordinate into `(0, 1]` so hemisphere cosines stay strictly
/// positive (measure-zero event for the random sampler; Sobol coordinates
/// after the skipped origin are never zero).
fn open01(u: f64) -> f64 {
    if u == 0.0 {
        f64::EPSILON
    } else {
        u
    }
}

/// Direction sampled area-uniformly on the hemisphere around the unit axis
/// `inward` from two unit coordinates; the `inward`-component is `open01(u1)`.
fn hemisphere_direction(inward: [f64; 3], u1: f64, u2: f64) -> [f64; 3] {
    let mu = open01(u1);
    let s = (1.0 - mu * mu).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    let (ea, eb) = tangent_frame(inward);
    let (sin_phi, cos_phi) = phi.sin_cos();
    [
        mu * inward[0] + s * (cos_phi * ea[0] + sin_phi * eb[0]),
        mu * inward[1] + s * (cos_phi * ea[1] + sin_phi * eb[1]),
        mu * inward[2] + s * (cos_phi * ea[2] + sin_phi * eb[2]),
    ]
}

/// Deterministic orthonormal tangent frame for a unit vector.
fn tangent_frame(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let mut ea = cross(n, helper);
    let norm = (ea[0] * ea[0] + ea[1] * ea[1] + ea[2] * ea[2]).sqrt();
    for c in ea.iter_mut() {
        *c /= norm;
    }
    (ea, cross(n, ea))
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn full_sphere_direction(dim: usize, u1: f64, u2: f64) -> [f64; 3] {
    if dim == 1 {
        [2.0 * u1 - 1.0, 0.0, 0.0]
    } else {
        let mu = 2.0 * u1 - 1.0;
        let s = (1.0 - mu * mu).max(0.0).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        [s * phi.cos(), s * phi.sin(), mu]
    }
}

/// Generate interior, spatial-boundary and temporal-boundary training sets.
///
/// Boundary points are split equally across the faces (or the two spheres of
/// a shell), with any remainder going to the first faces. All weights are
/// `1/N` of their set. Identical `(sampler, seed, counts)` produce identical
/// sets.
pub fn build_training_sets(
    domain: &DomainDescriptor,
    n_int: usize,
    n_sb: usize,
    n_tb: usize,
    sampler: Sampler,
    seed: u64,
) -> Result<TrainingSets> {
    if domain.is_steady() && n_tb > 0 {
        return Err(Error::config(
            "temporal boundary points requested for a steady domain",
        ));
    }
    match domain.geometry {
        Geometry::Box => build_box_sets(domain, n_int, n_sb, n_tb, sampler, seed),
        Geometry::SphericalShell { .. } => {
            annulus_sampler(domain, n_int, n_sb, n_tb, sampler, seed)
        }
    }
}

fn build_box_sets(
    domain: &DomainDescriptor,
    n_int: usize,
    n_sb: usize,
    n_tb: usize,
    sampler: Sampler,
    seed: u64,
) -> Result<TrainingSets> {
    let d = domain.spatial_dim;
    let transient = !domain.is_steady();
    let has_freq = !domain.is_monochromatic();

    // Interior: the full rescaled cube.
    let int_dim = domain.input_dim();
    let mut stream = UnitStream::new(sampler, int_dim, seed)?;
    let mut buf = vec![0.0; int_dim];
    let mut interior = Vec::with_capacity(n_int);
    let w_int = if n_int > 0 { 1.0 / n_int as f64 } else { 0.0 };
    for _ in 0..n_int {
        stream.next(&mut buf);
        interior.push(InteriorPoint {
            point: domain.from_unit(&buf),
            weight: w_int,
        });
    }

    // Spatial boundary: per-face free coordinates plus the inward hemisphere.
    let n_faces = 2 * d;
    let face_dim = transient as usize + (d - 1) + domain.angular_dims() + has_freq as usize;
    let mut face_stream = UnitStream::new(sampler, face_dim.max(1), seed.wrapping_add(1))?;
    let mut fbuf = vec![0.0; face_dim.max(1)];
    let mut spatial_boundary = Vec::with_capacity(n_sb);
    let w_sb = if n_sb > 0 { 1.0 / n_sb as f64 } else { 0.0 };
    for face in 0..n_faces {
        let axis = face / 2;
        let high_side = face % 2 == 1;
        let per_face = n_sb / n_faces + usize::from(face < n_sb % n_faces);
        let mut normal = [0.0; 3];
        normal[axis] = if high_side { 1.0 } else { -1.0 };
        let inward = [-normal[0], -normal[1], -normal[2]];
        for _ in 0..per_face {
            face_stream.next(&mut fbuf);
            let mut k = 0;
            let t = if transient {
                let v = fbuf[k] * domain.time_horizon;
                k += 1;
                v
            } else {
                0.0
            };
            let mut x = [0.0; 3];
            for (i, xi) in x.iter_mut().enumerate().take(d) {
                let (a, b) = domain.spatial_box[i];
                *xi = if i == axis {
                    if high_side {
                        b
                    } else {
                        a
                    }
                } else {
                    let v = a + (b - a) * fbuf[k];
                    k += 1;
                    v
                };
            }
            let omega = if d == 1 {
                let mu = open01(fbuf[k]);
                k += 1;
                [if high_side { -mu } else { mu }, 0.0, 0.0]
            } else {
                let w = hemisphere_direction(inward, fbuf[k], fbuf[k + 1]);
                k += 2;
                w
            };
            let nu = frequency_from_unit(domain, if has_freq { fbuf[k] } else { 0.0 });
            spatial_boundary.push(BoundaryPoint {
                point: PhasePoint { t, x, omega, nu },
                weight: w_sb,
                normal,
            });
        }
    }

    // Temporal boundary: the t = 0 slice.
    let temporal_boundary = build_temporal_boundary(domain, n_tb, sampler, seed.wrapping_add(2))?;

    Ok(TrainingSets {
        interior,
        spatial_boundary,
        temporal_boundary,
        data: Vec::new(),
    })
}

fn build_temporal_boundary(
    domain: &DomainDescriptor,
    n_tb: usize,
    sampler: Sampler,
    seed: u64,
) -> Result<Vec<InteriorPoint>> {
    if n_tb == 0 {
        return Ok(Vec::new());
    }
    let d = domain.spatial_dim;
    let has_freq = !domain.is_monochromatic();
    let shell = matches!(domain.geometry, Geometry::SphericalShell { .. });
    // Shell positions need (r, 2 angles); box positions need d coordinates.
    let pos_dim = if shell { 3 } else { d };
    let tb_dim = pos_dim + domain.angular_dims() + has_freq as usize;
    let mut stream = UnitStream::new(sampler, tb_dim, seed)?;
    let mut buf = vec![0.0; tb_dim];
    let w = 1.0 / n_tb as f64;
    let mut out = Vec::with_capacity(n_tb);
    for _ in 0..n_tb {
        stream.next(&mut buf);
        let (x, mut k) = if shell {
            (shell_position(domain, buf[0], buf[1], buf[2]), 3)
        } else {
            let mut x = [0.0; 3];
            for (i, xi) in x.iter_mut().enumerate().take(d) {
                let (a, b) = domain.spatial_box[i];
                *xi = a + (b - a) * buf[i];
            }
            (x, d)
        };
        let omega = full_sphere_direction(d, buf[k], if d == 3 { buf[k + 1] } else { 0.0 });
        k += domain.angular_dims();
        let nu = frequency_from_unit(domain, if has_freq { buf[k] } else { 0.0 });
        out.push(InteriorPoint {
            point: PhasePoint {
                t: 0.0,
                x,
                omega,
                nu,
            },
            weight: w,
        });
    }
    Ok(out)
}

fn frequency_from_unit(domain: &DomainDescriptor, u: f64) -> f64 {
    match domain.frequency {
        FrequencyAxis::Monochromatic => 0.0,
        FrequencyAxis::Band { lo, hi, log_rescale } => {
            if log_rescale {
                lo * (hi / lo).powf(u)
            } else {
                lo + (hi - lo) * u
            }
        }
    }
}

/// Volume-uniform shell position via the inverse-CDF radius map.
fn shell_position(domain: &DomainDescriptor, u_r: f64, u_mu: f64, u_phi: f64) -> [f64; 3] {
    let Geometry::SphericalShell { r_inner, r_outer } = domain.geometry else {
        panic!("shell_position requires shell geometry");
    };
    let r = (r_inner.powi(3) + u_r * (r_outer.powi(3) - r_inner.powi(3))).cbrt();
    let mu = 2.0 * u_mu - 1.0;
    let s = (1.0 - mu * mu).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u_phi;
    [r * s * phi.cos(), r * s * phi.sin(), r * mu]
}

/// Training sets for the spherical-shell domain: volume-uniform interior
/// points, boundary points split equally across the two spheres with
/// inflow-restricted directions.
pub fn annulus_sampler(
    domain: &DomainDescriptor,
    n_int: usize,
    n_sb: usize,
    n_tb: usize,
    sampler: Sampler,
    seed: u64,
) -> Result<TrainingSets> {
    let Geometry::SphericalShell { r_inner, r_outer } = domain.geometry else {
        return Err(Error::config("annulus_sampler requires a shell domain"));
    };
    debug_assert!(r_inner < r_outer);
    if domain.is_steady() && n_tb > 0 {
        return Err(Error::config(
            "temporal boundary points requested for a steady domain",
        ));
    }
    let transient = !domain.is_steady();
    let has_freq = !domain.is_monochromatic();

    // Interior: t? + (r, 2 position angles) + 2 direction angles + nu?.
    let int_dim = transient as usize + 3 + 2 + has_freq as usize;
    let mut stream = UnitStream::new(sampler, int_dim, seed)?;
    let mut buf = vec![0.0; int_dim];
    let mut interior = Vec::with_capacity(n_int);
    let w_int = if n_int > 0 { 1.0 / n_int as f64 } else { 0.0 };
    for _ in 0..n_int {
        stream.next(&mut buf);
        let mut k = 0;
        let t = if transient {
            let v = buf[k] * domain.time_horizon;
            k += 1;
            v
        } else {
            0.0
        };
        let x = shell_position(domain, buf[k], buf[k + 1], buf[k + 2]);
        k += 3;
        let omega = full_sphere_direction(3, buf[k], buf[k + 1]);
        k += 2;
        let nu = frequency_from_unit(domain, if has_freq { buf[k] } else { 0.0 });
        interior.push(InteriorPoint {
            point: PhasePoint { t, x, omega, nu },
            weight: w_int,
        });
    }

    // Boundary: equal split across the two spheres. The flow-domain outward
    // normal points toward the center on the inner sphere.
    let sb_dim = transient as usize + 2 + 2 + has_freq as usize;
    let mut sb_stream = UnitStream::new(sampler, sb_dim, seed.wrapping_add(1))?;
    let mut sbuf = vec![0.0; sb_dim];
    let mut spatial_boundary = Vec::with_capacity(n_sb);
    let w_sb = if n_sb > 0 { 1.0 / n_sb as f64 } else { 0.0 };
    for sphere in 0..2 {
        let inner_sphere = sphere == 0;
        let radius = if inner_sphere { r_inner } else { r_outer };
        let count = n_sb / 2 + usize::from(sphere < n_sb % 2);
        for _ in 0..count {
            sb_stream.next(&mut sbuf);
            let mut k = 0;
            let t = if transient {
                let v = sbuf[k] * domain.time_horizon;
                k += 1;
                v
            } else {
                0.0
            };
            let mu = 2.0 * sbuf[k] - 1.0;
            let s = (1.0 - mu * mu).max(0.0).sqrt();
            let phi = 2.0 * std::f64::consts::PI * sbuf[k + 1];
            k += 2;
            let radial = [s * phi.cos(), s * phi.sin(), mu];
            let x = [radius * radial[0], radius * radial[1], radius * radial[2]];
            let normal = if inner_sphere {
                [-radial[0], -radial[1], -radial[2]]
            } else {
                radial
            };
            let inward = [-normal[0], -normal[1], -normal[2]];
            let omega = hemisphere_direction(inward, sbuf[k], sbuf[k + 1]);
            k += 2;
            let nu = frequency_from_unit(domain, if has_freq { sbuf[k] } else { 0.0 });
            spatial_boundary.push(BoundaryPoint {
                point: PhasePoint { t, x, omega, nu },
                weight: w_sb,
                normal,
            });
        }
    }

    let temporal_boundary = build_temporal_boundary(domain, n_tb, sampler, seed.wrapping_add(2))?;

    Ok(TrainingSets {
        interior,
        spatial_boundary,
        temporal_boundary,
        data: Vec::new(),
    })
}

/// Measurement locations `(t, x, nu)` for the inverse data term, weights
/// `1/N`.
pub fn build_data_points(
    domain: &DomainDescriptor,
    n_d: usize,
    sampler: Sampler,
    seed: u64,
) -> Result<Vec<DataPoint>> {
    let transient = !domain.is_steady();
    let has_freq = !domain.is_monochromatic();
    let shell = matches!(domain.geometry, Geometry::SphericalShell { .. });
    let pos_dim = if shell { 3 } else { domain.spatial_dim };
    let dim = transient as usize + pos_dim + has_freq as usize;
    let mut stream = UnitStream::new(sampler, dim, seed)?;
    let mut buf = vec![0.0; dim];
    let w = if n_d > 0 { 1.0 / n_d as f64 } else { 0.0 };
    let mut out = Vec::with_capacity(n_d);
    for _ in 0..n_d {
        stream.next(&mut buf);
        let mut k = 0;
        let t = if transient {
            let v = buf[k] * domain.time_horizon;
            k += 1;
            v
        } else {
            0.0
        };
        let x = if shell {
            let x = shell_position(domain, buf[k], buf[k + 1], buf[k + 2]);
            k += 3;
            x
        } else {
            let mut x = [0.0; 3];
            for (i, xi) in x.iter_mut().enumerate().take(domain.spatial_dim) {
                let (a, b) = domain.spatial_box[i];
                *xi = a + (b - a) * buf[k];
                k += 1;
            }
            x
        };
        let nu = frequency_from_unit(domain, if has_freq { buf[k] } else { 0.0 });
        out.push(DataPoint { t, x, nu, weight: w });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slab_domain() -> DomainDescriptor {
        DomainDescriptor::new_box(
            1,
            0.0,
            [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
            FrequencyAxis::Monochromatic,
        )
        .unwrap()
    }

    fn cube_domain() -> DomainDescriptor {
        DomainDescriptor::new_box(
            3,
            0.0,
            [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
            FrequencyAxis::Monochromatic,
        )
        .unwrap()
    }

    #[test]
    fn rescale_round_trip() {
        let shell = DomainDescriptor::new_shell(
            2.0,
            4.0,
            1.0,
            FrequencyAxis::Band {
                lo: 1e15,
                hi: 1e18,
                log_rescale: true,
            },
        )
        .unwrap();
        assert_eq!(shell.input_dim(), 7);
        let unit = [0.3, 0.55, 0.25, 0.85, 0.15, 0.625, 0.4];
        let z = shell.from_unit(&unit);
        let back = shell.to_unit(&z);
        for (u, b) in unit.iter().zip(&back) {
            assert!((u - b).abs() < 1e-12, "{u} vs {b}");
        }

        let slab = slab_domain();
        assert_eq!(slab.input_dim(), 2);
        let unit = [0.7, 0.2];
        let back = slab.to_unit(&slab.from_unit(&unit));
        for (u, b) in unit.iter().zip(&back) {
            assert!((u - b).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_domains_are_rejected() {
        assert!(DomainDescriptor::new_box(
            1,
            0.0,
            [(1.0, 0.0); 3],
            FrequencyAxis::Monochromatic
        )
        .is_err());
        assert!(DomainDescriptor::new_shell(4.0, 2.0, 1.0, FrequencyAxis::Monochromatic).is_err());
        assert!(DomainDescriptor::new_shell(2.0, 2.0, 1.0, FrequencyAxis::Monochromatic).is_err());
    }

    #[test]
    fn steady_domain_rejects_temporal_points() {
        let err = build_training_sets(&slab_domain(), 8, 8, 4, Sampler::Sobol, 0);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn slab_boundary_split_and_inflow() {
        let sets = build_training_sets(&slab_domain(), 8192, 2048, 0, Sampler::Sobol, 0).unwrap();
        assert_eq!(sets.interior.len(), 8192);
        assert_eq!(sets.spatial_boundary.len(), 2048);
        let mut left = 0;
        let mut right = 0;
        for bp in &sets.spatial_boundary {
            let mu = bp.point.omega[0];
            if bp.point.x[0] == 0.0 {
                assert!(mu > 0.0, "inflow at x=0 needs mu > 0");
                left += 1;
            } else {
                assert_eq!(bp.point.x[0], 1.0);
                assert!(mu < 0.0, "inflow at x=1 needs mu < 0");
                right += 1;
            }
            let dot = bp.point.omega[0] * bp.normal[0];
            assert!(dot < 0.0);
        }
        assert_eq!(left, 1024);
        assert_eq!(right, 1024);
        for ip in &sets.interior {
            assert!((0.0..=1.0).contains(&ip.point.x[0]));
            assert!((-1.0..=1.0).contains(&ip.point.omega[0]));
            assert!((ip.weight - 1.0 / 8192.0).abs() < 1e-18);
        }
    }

    #[test]
    fn cube_faces_receive_equal_allocation() {
        let sets = build_training_sets(&cube_domain(), 64, 12288, 0, Sampler::Sobol, 0).unwrap();
        let mut per_face = std::collections::HashMap::new();
        for bp in &sets.spatial_boundary {
            let key = (0..3)
                .find_map(|i| {
                    if bp.point.x[i] == 0.0 {
                        Some((i, 0))
                    } else if bp.point.x[i] == 1.0 {
                        Some((i, 1))
                    } else {
                        None
                    }
                })
                .expect("boundary point not on any face");
            *per_face.entry(key).or_insert(0usize) += 1;
        }
        assert_eq!(per_face.len(), 6);
        for (&face, &count) in &per_face {
            assert_eq!(count, 2048, "face {face:?}");
        }
    }

    #[test]
    fn inflow_holds_for_every_boundary_point() {
        for sampler in [Sampler::Sobol, Sampler::UniformRandom] {
            for seed in [0u64, 7, 1234] {
                let sets =
                    build_training_sets(&cube_domain(), 16, 600, 0, sampler, seed).unwrap();
                for bp in &sets.spatial_boundary {
                    let dot: f64 = bp
                        .point
                        .omega
                        .iter()
                        .zip(&bp.normal)
                        .map(|(w, n)| w * n)
                        .sum();
                    assert!(dot < 0.0, "sampler {sampler:?} seed {seed}: dot {dot}");
                    let norm: f64 = bp.point.omega.iter().map(|w| w * w).sum::<f64>().sqrt();
                    assert!((norm - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for sampler in [Sampler::Sobol, Sampler::UniformRandom] {
            let a = build_training_sets(&cube_domain(), 128, 60, 0, sampler, 42).unwrap();
            let b = build_training_sets(&cube_domain(), 128, 60, 0, sampler, 42).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn shell_points_stay_in_shell() {
        let domain =
            DomainDescriptor::new_shell(2.0, 4.0, 1.0, FrequencyAxis::Monochromatic).unwrap();
        let sets = build_training_sets(&domain, 512, 128, 64, Sampler::Sobol, 0).unwrap();
        for ip in &sets.interior {
            let r = ip.point.x.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((2.0..=4.0).contains(&r), "r = {r}");
        }
        for bp in &sets.spatial_boundary {
            let r = bp.point.x.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((r - 2.0).abs() < 1e-12 || (r - 4.0).abs() < 1e-12);
            let dot: f64 = bp
                .point
                .omega
                .iter()
                .zip(&bp.normal)
                .map(|(w, n)| w * n)
                .sum();
            assert!(dot < 0.0);
            // Inner-sphere inflow points toward larger radii.
            if (r - 2.0).abs() < 1e-12 {
                let radial: f64 = bp
                    .point
                    .omega
                    .iter()
                    .zip(&bp.point.x)
                    .map(|(w, x)| w * x / r)
                    .sum();
                assert!(radial > 0.0);
            }
        }
        for tb in &sets.temporal_boundary {
            assert_eq!(tb.point.t, 0.0);
        }
    }

    #[test]
    fn shell_volume_monte_carlo() {
        // Volume-uniform radial map: the Monte-Carlo volume estimate of the
        // shell via the indicator r < 3 must match the analytic value to 1%.
        let domain =
            DomainDescriptor::new_shell(2.0, 4.0, 0.0, FrequencyAxis::Monochromatic).unwrap();
        let sets = build_training_sets(&domain, 100_000, 0, 0, Sampler::Sobol, 0).unwrap();
        let total = 4.0 / 3.0 * std::f64::consts::PI * (64.0 - 8.0);
        let inner_frac = sets
            .interior
            .iter()
            .filter(|p| p.point.x.iter().map(|c| c * c).sum::<f64>().sqrt() < 3.0)
            .count() as f64
            / sets.interior.len() as f64;
        let estimate = inner_frac * total;
        let exact = 4.0 / 3.0 * std::f64::consts::PI * (27.0 - 8.0);
        assert!(
            (estimate - exact).abs() / exact < 0.01,
            "estimate {estimate} vs {exact}"
        );
    }

    #[test]
    fn data_points_cover_the_domain() {
        let domain = cube_domain();
        let pts = build_data_points(&domain, 256, Sampler::UniformRandom, 3).unwrap();
        assert_eq!(pts.len(), 256);
        for p in &pts {
            for i in 0..3 {
                assert!((0.0..=1.0).contains(&p.x[i]));
            }
            assert!((p.weight - 1.0 / 256.0).abs() < 1e-18);
        }
    }
}
