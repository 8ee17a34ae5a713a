//! Two-body building blocks: auxiliary masses, Kepler's equation, action and
//! element maps, and the ellipse embedding used by the averaging code.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute residual accepted by [`solve_kepler`].
pub const KEPLER_TOL: f64 = 1e-13;

/// Physical masses of the sun and the planets, G = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassParameters {
    pub mbar0: f64,
    pub mu: f64,
    pub mbar: Vec<f64>,
}

impl MassParameters {
    pub fn new(mbar0: f64, mu: f64, mbar: Vec<f64>) -> Result<Self> {
        let p = Self { mbar0, mu, mbar };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mbar0 > 0.0) || !(self.mu >= 0.0) || self.mbar.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Domain(format!("masses must be positive: {self:?}")));
        }
        Ok(())
    }

    /// `(M_i, m_i)`, with `i` zero-based.
    pub fn auxiliary(&self, i: usize) -> Result<(f64, f64)> {
        auxiliary_masses(self, i)
    }

    pub fn n_planets(&self) -> usize {
        self.mbar.len()
    }
}

/// `M_i = m̄₀ + μ m̄_i`, `m_i = m̄₀ m̄_i / (m̄₀ + μ m̄_i)`.
pub fn auxiliary_masses(params: &MassParameters, i: usize) -> Result<(f64, f64)> {
    let mb = *params.mbar.get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        len: params.mbar.len(),
    })?;
    let big = params.mbar0 + params.mu * mb;
    Ok((big, params.mbar0 * mb / big))
}

/// Keplerian energy `−M² m³ / (2Λ²)`.
pub fn kepler_energy(lambda: f64, big_m: f64, m: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("Lambda must be positive, got {lambda}")));
    }
    Ok(-big_m * big_m * m.powi(3) / (2.0 * lambda * lambda))
}

/// Derivative of [`kepler_energy`] in Λ, the mean motion.
pub fn kepler_frequency(lambda: f64, big_m: f64, m: f64) -> f64 {
    big_m * big_m * m.powi(3) / lambda.powi(3)
}

pub fn semi_major_axis(lambda: f64, big_m: f64, m: f64) -> f64 {
    (lambda / m).powi(2) / big_m
}

pub fn lambda_from_axis(a: f64, big_m: f64, m: f64) -> f64 {
    m * (big_m * a).sqrt()
}

/// Wrap into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Solves `ζ − e sin ζ = rhs`. The root is continuous in `rhs`.
pub fn solve_kepler(e: f64, rhs: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) || !rhs.is_finite() {
        return Err(Error::Domain(format!("eccentricity {e} outside [0,1)")));
    }
    if e == 0.0 {
        return Ok(rhs);
    }
    // reduce so the residual is evaluated near the origin
    let turns = (rhs / (2.0 * PI)).round();
    let r = rhs - turns * 2.0 * PI;
    let f = |z: f64| z - e * z.sin() - r;

    let (mut lo, mut hi) = (r - e, r + e);
    let mut z = r + e * r.sin();
    for _ in 0..100 {
        let fz = f(z);
        if fz.abs() <= 0.25 * KEPLER_TOL {
            return Ok(z + turns * 2.0 * PI);
        }
        if fz > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let step = fz / (1.0 - e * z.cos());
        let next = z - step;
        z = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo < 4.0 * f64::EPSILON * (1.0 + z.abs()) {
            break;
        }
    }
    if f(z).abs() <= KEPLER_TOL {
        Ok(z + turns * 2.0 * PI)
    } else {
        Err(Error::NoConvergence { e, rhs })
    }
}

/// `e² = 2t/Λ − (t/Λ)²` with `t = (η²+ξ²)/2`.
pub fn eccentricity_from_actions(lambda: f64, eta: f64, xi: f64) -> Result<f64> {
    let t = 0.5 * (eta * eta + xi * xi);
    if !(lambda > 0.0) || t >= lambda {
        return Err(Error::Domain(format!("action {t} not below Lambda {lambda}")));
    }
    let r = t / lambda;
    Ok((2.0 * r - r * r).max(0.0).sqrt())
}

/// Geometry of a Keplerian ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalGeometry {
    pub a: f64,
    pub e: f64,
    pub lambda: f64,
    pub zeta: f64,
}

impl OrbitalGeometry {
    pub fn new(lambda: f64, e: f64, zeta: f64, big_m: f64, m: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(0.0..1.0).contains(&e) {
            return Err(Error::Domain(format!("Lambda {lambda}, e {e}")));
        }
        Ok(Self { a: semi_major_axis(lambda, big_m, m), e, lambda, zeta })
    }

    /// In-plane position `a(cos ζ − e, √(1−e²) sin ζ)`.
    pub fn planar_position(&self) -> [f64; 2] {
        let (s, c) = self.zeta.sin_cos();
        [self.a * (c - self.e), self.a * (1.0 - self.e * self.e).sqrt() * s]
    }
}

/// A Keplerian orbit in space: shape, masses and in-plane basis.
///
/// `p_hat` points to perihelion, `q_hat = n̂ × p_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerOrbit {
    pub a: f64,
    pub e: f64,
    pub big_m: f64,
    pub m: f64,
    pub p_hat: Vector3<f64>,
    pub q_hat: Vector3<f64>,
}

impl KeplerOrbit {
    pub fn normal(&self) -> Vector3<f64> {
        self.p_hat.cross(&self.q_hat)
    }

    pub fn mean_motion(&self) -> f64 {
        (self.big_m / self.a.powi(3)).sqrt()
    }

    /// Angular momentum vector `m √(M a (1−e²)) n̂`.
    pub fn angular_momentum(&self) -> Vector3<f64> {
        self.normal() * self.m * (self.big_m * self.a * (1.0 - self.e * self.e)).sqrt()
    }

    /// Position and momentum `y = m ẋ` at eccentric anomaly ζ.
    pub fn state_at_eccentric(&self, zeta: f64) -> (Vector3<f64>, Vector3<f64>) {
        let (s, c) = zeta.sin_cos();
        let b = (1.0 - self.e * self.e).sqrt();
        let x = self.p_hat * (self.a * (c - self.e)) + self.q_hat * (self.a * b * s);
        let zdot = self.mean_motion() / (1.0 - self.e * c);
        let v = (self.p_hat * (-s) + self.q_hat * (b * c)) * (self.a * zdot);
        (x, v * self.m)
    }

    pub fn state_at_mean(&self, ell: f64) -> Result<(Vector3<f64>, Vector3<f64>)> {
        Ok(self.state_at_eccentric(solve_kepler(self.e, ell)?))
    }
}

/// Osculating elements of the two-body problem `|y|²/2m − mM/|x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elements {
    pub a: f64,
    pub e: f64,
    pub lambda: f64,
    /// Angular momentum `x × y`.
    pub c: [f64; 3],
}

pub fn elements_from_state(x: &Vector3<f64>, y: &Vector3<f64>, big_m: f64, m: f64) -> Result<Elements> {
    let r = x.norm();
    let v = y / m;
    let energy = 0.5 * v.norm_squared() - big_m / r;
    if !(energy < 0.0) || r == 0.0 {
        return Err(Error::Domain(format!("non-elliptic osculating orbit (specific energy {energy})")));
    }
    let a = -big_m / (2.0 * energy);
    let h = x.cross(&v);
    let evec = v.cross(&h) / big_m - x / r;
    let c = x.cross(y);
    Ok(Elements { a, e: evec.norm(), lambda: lambda_from_axis(a, big_m, m), c: [c.x, c.y, c.z] })
}
