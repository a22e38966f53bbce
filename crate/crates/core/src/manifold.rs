//! Array manifolds: ULA and UPA steering vectors and the Dirichlet kernel.
//!
//! Phase convention: a manifold vector carries *positive* phases,
//! `a[i] = exp(+jπ (f/f_c) i u) / √N`, and every gain in this crate is the
//! magnitude of a Hermitian inner product `a^H w`. Beamformers are built to
//! match that form. This is the elementwise complex conjugate of writing the
//! time-delay response as `exp(-j2πft)`; no reported magnitude depends on the
//! choice.
//!
//! UPA elements are flattened row-major with `x` as the row index:
//! element `(x, y)` lives at `x * side + y`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::config::{perfect_square_root, SystemConfig};
use crate::error::{Error, Result};

const SINGULAR_EPS: f64 = 1e-9;

/// Sine of a real angle, `u = sin θ ∈ [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PhysicalDirection1D(f64);

impl PhysicalDirection1D {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value.abs() <= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidDirection(format!(
                "physical direction {value} outside [-1, 1]"
            )))
        }
    }

    pub fn broadside() -> Self {
        Self(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Azimuth/elevation pair for the planar RIS, stored as `sin φ`, `sin ψ`
/// and `cos ψ`. The cosine is carried explicitly so elevations beyond ±90°
/// stay representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalDirection2D {
    azimuth_sin: f64,
    elevation_sin: f64,
    elevation_cos: f64,
}

impl PhysicalDirection2D {
    /// Elevation cosine taken non-negative.
    pub fn new(azimuth_sin: f64, elevation_sin: f64) -> Result<Self> {
        if !elevation_sin.is_finite() || elevation_sin.abs() > 1.0 {
            return Err(Error::InvalidDirection(format!(
                "elevation sine {elevation_sin} outside [-1, 1]"
            )));
        }
        let elevation_cos = (1.0 - elevation_sin * elevation_sin).max(0.0).sqrt();
        Self::with_cos(azimuth_sin, elevation_sin, elevation_cos)
    }

    pub fn with_cos(azimuth_sin: f64, elevation_sin: f64, elevation_cos: f64) -> Result<Self> {
        if !azimuth_sin.is_finite() || azimuth_sin.abs() > 1.0 {
            return Err(Error::InvalidDirection(format!(
                "azimuth sine {azimuth_sin} outside [-1, 1]"
            )));
        }
        let unit = elevation_sin * elevation_sin + elevation_cos * elevation_cos;
        if !unit.is_finite() || (unit - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDirection(format!(
                "elevation sin/cos ({elevation_sin}, {elevation_cos}) not on the unit circle"
            )));
        }
        Ok(Self {
            azimuth_sin,
            elevation_sin,
            elevation_cos,
        })
    }

    pub fn azimuth_sin(&self) -> f64 {
        self.azimuth_sin
    }
    pub fn elevation_sin(&self) -> f64 {
        self.elevation_sin
    }
    pub fn elevation_cos(&self) -> f64 {
        self.elevation_cos
    }

    /// Phase slope along the row index `x`.
    pub fn row_slope(&self) -> f64 {
        self.azimuth_sin * self.elevation_sin
    }

    /// Phase slope along the column index `y`.
    pub fn col_slope(&self) -> f64 {
        self.elevation_cos
    }
}

/// Unit-norm array response at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    entries: DVector<Complex64>,
    frequency_hz: f64,
}

impl SteeringVector {
    pub fn entries(&self) -> &DVector<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DVector<Complex64> {
        self.entries
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Scales a physical direction to the spatial direction seen at `f_m`.
pub fn spatial_from_physical(dir: f64, f_m: f64, f_c: f64) -> f64 {
    f_m / f_c * dir
}

/// `n`-element half-wavelength ULA response toward `dir` at `f_m`.
pub fn ula_steering(
    dir: PhysicalDirection1D,
    f_m: f64,
    cfg: &SystemConfig,
    n: usize,
) -> SteeringVector {
    ula_steering_at(dir.value(), f_m, cfg.f_center_hz(), n)
}

pub(crate) fn ula_steering_at(dir: f64, f_m: f64, f_c: f64, n: usize) -> SteeringVector {
    let slope = PI * spatial_from_physical(dir, f_m, f_c);
    let scale = 1.0 / (n as f64).sqrt();
    let entries = DVector::from_iterator(
        n,
        (0..n).map(|i| Complex64::from_polar(scale, slope * i as f64)),
    );
    SteeringVector {
        entries,
        frequency_hz: f_m,
    }
}

/// Square `f`-cell UPA response toward `dir` at `f_m`.
pub fn upa_steering(
    dir: PhysicalDirection2D,
    f_m: f64,
    cfg: &SystemConfig,
    f: usize,
) -> Result<SteeringVector> {
    upa_steering_at(&dir, f_m, cfg.f_center_hz(), f)
}

pub(crate) fn upa_steering_at(
    dir: &PhysicalDirection2D,
    f_m: f64,
    f_c: f64,
    f: usize,
) -> Result<SteeringVector> {
    let side = perfect_square_root(f).ok_or_else(|| {
        Error::InvalidConfig {
            invariant: "f_ris-perfect-square",
            detail: format!("RIS size {f} is not a perfect square"),
        }
    })?;
    let ratio = f_m / f_c;
    let row = PI * ratio * dir.row_slope();
    let col = PI * ratio * dir.col_slope();
    let scale = 1.0 / (f as f64).sqrt();
    let entries = DVector::from_iterator(
        f,
        (0..f).map(|r| {
            let (x, y) = ((r / side) as f64, (r % side) as f64);
            Complex64::from_polar(scale, x * row + y * col)
        }),
    );
    Ok(SteeringVector {
        entries,
        frequency_hz: f_m,
    })
}

/// `Ξ_n(x) = sin(nπx/2) / sin(πx/2)`.
///
/// At the poles `x = 2k` the ratio is replaced by its L'Hôpital form
/// `n cos(nπx/2) / cos(πx/2)`, which tends to `±n`.
pub fn dirichlet_sinc(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    // reduce to |r| <= 1 first; shifting x by 2 flips the sign when n is even
    let k = (0.5 * x).round();
    let r = x - 2.0 * k;
    let sign = if (k as i64).rem_euclid(2) == 1 && n.is_multiple_of(2) { -1.0 } else { 1.0 };
    let half = 0.5 * PI * r;
    let den = half.sin();
    let v = if den.abs() < SINGULAR_EPS {
        nf * (nf * half).cos() / half.cos()
    } else {
        (nf * half).sin() / den
    };
    sign * v
}

/// `a^H b`.
pub(crate) fn hermitian_dot(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}
