//! The twelve-variable canonical chart for two planets: node/inclination
//! geometry, forward and inverse maps, and a finite-difference
//! symplecticity check.

use std::f64::consts::PI;

use nalgebra::{Rotation3, SMatrix, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kepler::{wrap_angle, MassParameters};

/// Relative norm below which a defining vector is treated as degenerate.
pub const DOMAIN_TOL: f64 = 1e-8;
/// Orthogonality tolerance of [`oriented_angle`].
pub const ORTHO_TOL: f64 = 1e-9;

type V3 = Vector3<f64>;

/// Heliocentric positions and momenta of two planets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub y: [[f64; 3]; 2],
    pub x: [[f64; 3]; 2],
}

impl CartesianState {
    pub fn from_vectors(y1: V3, y2: V3, x1: V3, x2: V3) -> Self {
        Self { y: [y1.into(), y2.into()], x: [x1.into(), x2.into()] }
    }

    pub fn y(&self, i: usize) -> V3 {
        V3::from(self.y[i])
    }

    pub fn x(&self, i: usize) -> V3 {
        V3::from(self.x[i])
    }

    /// Flat `(y1, y2, x1, x2)`.
    pub fn to_array(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for k in 0..3 {
            out[k] = self.y[0][k];
            out[3 + k] = self.y[1][k];
            out[6 + k] = self.x[0][k];
            out[9 + k] = self.x[1][k];
        }
        out
    }

    pub fn from_array(a: &[f64; 12]) -> Self {
        Self {
            y: [[a[0], a[1], a[2]], [a[3], a[4], a[5]]],
            x: [[a[6], a[7], a[8]], [a[9], a[10], a[11]]],
        }
    }
}

/// Chart coordinates: actions first, then their conjugates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chart12Point {
    pub c3: f64,
    pub big_g: f64,
    pub big_r1: f64,
    pub big_theta: f64,
    pub big_r2: f64,
    pub big_phi2: f64,
    pub zeta: f64,
    pub g: f64,
    pub r1: f64,
    pub theta: f64,
    pub r2: f64,
    pub phi2: f64,
}

impl Chart12Point {
    /// `(C₃, G, R₁, Θ, R₂, Φ₂, ζ, 𝔤, r₁, ϑ, r₂, φ₂)`; entry `k` pairs with `k + 6`.
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.c3, self.big_g, self.big_r1, self.big_theta, self.big_r2, self.big_phi2, self.zeta, self.g,
            self.r1, self.theta, self.r2, self.phi2,
        ]
    }

    pub fn from_array(a: &[f64; 12]) -> Self {
        Self {
            c3: a[0],
            big_g: a[1],
            big_r1: a[2],
            big_theta: a[3],
            big_r2: a[4],
            big_phi2: a[5],
            zeta: a[6],
            g: a[7],
            r1: a[8],
            theta: a[9],
            r2: a[10],
            phi2: a[11],
        }
    }

    /// Cosines of `(i, i₁, i₂)`.
    pub fn inclination_cosines(&self) -> (f64, f64, f64) {
        (self.c3 / self.big_g, self.big_theta / self.big_g, self.big_theta / self.big_phi2)
    }

    fn check_domain(&self) -> Result<()> {
        let (ci, ci1, ci2) = self.inclination_cosines();
        if !(self.big_g > 0.0 && self.big_phi2 > 0.0 && self.r1 > 0.0 && self.r2 > 0.0) {
            return Err(Error::Domain(format!("nonpositive G, Phi2 or radius: {self:?}")));
        }
        for (name, c) in [("i", ci), ("i1", ci1), ("i2", ci2)] {
            if !(c.abs() < 1.0) {
                return Err(Error::Domain(format!("cos {name} = {c} outside (-1, 1)")));
            }
        }
        Ok(())
    }
}

/// Orthonormal right-handed reference triple `(k¹, k², k³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub k: [V3; 3],
}

impl Default for Frame {
    fn default() -> Self {
        Self { k: [V3::x(), V3::y(), V3::z()] }
    }
}

impl Frame {
    pub fn new(k1: V3, k2: V3, k3: V3) -> Result<Self> {
        let ok = (k1.norm() - 1.0).abs() < ORTHO_TOL
            && (k2.norm() - 1.0).abs() < ORTHO_TOL
            && k1.dot(&k2).abs() < ORTHO_TOL
            && (k1.cross(&k2) - k3).norm() < ORTHO_TOL;
        if !ok {
            return Err(Error::Domain("frame is not an orthonormal right-handed triple".into()));
        }
        Ok(Self { k: [k1, k2, k3] })
    }

    pub fn from_rotation(r: &Rotation3<f64>) -> Self {
        let m = r.matrix();
        Self { k: [m.column(0).into(), m.column(1).into(), m.column(2).into()] }
    }

    fn to_local(&self, v: &V3) -> V3 {
        V3::new(self.k[0].dot(v), self.k[1].dot(v), self.k[2].dot(v))
    }

    fn to_global(&self, v: &V3) -> V3 {
        self.k[0] * v.x + self.k[1] * v.y + self.k[2] * v.z
    }
}

/// Angular momenta and nodes of a two-planet state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularMomenta {
    pub c1: V3,
    pub c2: V3,
    pub c: V3,
    pub nu1: V3,
    pub nu2: V3,
    pub nu3: V3,
}

impl AngularMomenta {
    pub fn of(state: &CartesianState, k3: &V3) -> Self {
        let (x1, x2) = (state.x(0), state.x(1));
        let c1 = x1.cross(&state.y(0));
        let c2 = x2.cross(&state.y(1));
        let c = c1 + c2;
        Self { c1, c2, c, nu1: k3.cross(&c), nu2: c.cross(&x1), nu3: x1.cross(&c2) }
    }
}

/// Positively oriented angle from `u` to `v` about `w`, in (−π, π].
pub fn oriented_angle(u: &V3, v: &V3, w: &V3) -> Result<f64> {
    let (nu, nv, nw) = (u.norm(), v.norm(), w.norm());
    if nu == 0.0 || nv == 0.0 || nw == 0.0 {
        return Err(Error::Domain("zero vector in oriented_angle".into()));
    }
    let wh = w / nw;
    if (u.dot(&wh) / nu).abs() > ORTHO_TOL || (v.dot(&wh) / nv).abs() > ORTHO_TOL {
        return Err(Error::Domain("oriented_angle arguments not orthogonal to the axis".into()));
    }
    Ok(wrap_angle(u.cross(v).dot(&wh).atan2(u.dot(v))))
}

// Same as `oriented_angle` but without the orthogonality check; inputs are
// orthogonal to the axis by construction, up to roundoff.
fn angle_about(u: &V3, v: &V3, w: &V3) -> f64 {
    wrap_angle(u.cross(v).dot(&w.normalize()).atan2(u.dot(v)))
}

/// Cartesian state to chart coordinates.
pub fn chart_inverse(state: &CartesianState, frame: &Frame) -> Result<Chart12Point> {
    let x1 = frame.to_local(&state.x(0));
    let y1 = frame.to_local(&state.y(0));
    let x2 = frame.to_local(&state.x(1));
    let y2 = frame.to_local(&state.y(1));
    let local = CartesianState::from_vectors(y1, y2, x1, x2);
    let k3 = V3::z();
    let am = AngularMomenta::of(&local, &k3);

    let (r1, r2) = (x1.norm(), x2.norm());
    let scale_l = r1.max(r2);
    let scale_c = am.c1.norm().max(am.c2.norm()).max(am.c.norm());
    let tol = DOMAIN_TOL;
    let checks = [
        ("x1", r1 / scale_l),
        ("x2", r2 / scale_l),
        ("C", am.c.norm() / scale_c),
        ("C2", am.c2.norm() / scale_c),
        ("nu1", am.nu1.norm() / scale_c),
        ("nu2", am.nu2.norm() / (scale_c * r1)),
        ("nu3", am.nu3.norm() / (scale_c * r1)),
    ];
    for (name, v) in checks {
        if !(v >= tol) || !v.is_finite() {
            return Err(Error::SingularChart(format!("|{name}| = {v:e} (relative) below {tol:e}")));
        }
    }
    let x1h = x1 / r1;
    Ok(Chart12Point {
        c3: am.c.z,
        big_g: am.c.norm(),
        big_r1: y1.dot(&x1h),
        big_theta: am.c2.dot(&x1h),
        big_r2: y2.dot(&x2) / r2,
        big_phi2: am.c2.norm(),
        zeta: angle_about(&V3::x(), &am.nu1, &k3),
        g: angle_about(&am.nu1, &am.nu2, &am.c),
        r1,
        theta: angle_about(&am.nu2, &am.nu3, &x1),
        r2,
        phi2: angle_about(&am.nu3, &x2, &am.c2),
    })
}

fn r1(a: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&V3::x_axis(), a)
}

fn r3(a: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&V3::z_axis(), a)
}

/// Chart coordinates to Cartesian state.
pub fn chart_forward(p: &Chart12Point, frame: &Frame) -> Result<CartesianState> {
    forward_impl(p, frame, 1.0)
}

// `tangential_scale` multiplies Φ₂ inside y⁽²⁾ only; 1 is the true map.
pub(crate) fn forward_impl(p: &Chart12Point, frame: &Frame, tangential_scale: f64) -> Result<CartesianState> {
    p.check_domain()?;
    let (ci, ci1, ci2) = p.inclination_cosines();
    let rot_c = r3(p.zeta) * r1(ci.acos());
    let rot_x1 = rot_c * r3(p.g) * r1(ci1.acos());
    let rot_c2 = rot_x1 * r3(p.theta) * r1(ci2.acos());

    let x1 = rot_x1 * V3::new(0.0, 0.0, p.r1);
    let c = rot_c * V3::new(0.0, 0.0, p.big_g);
    let c2 = rot_c2 * V3::new(0.0, 0.0, p.big_phi2);
    let c1 = c - c2;
    let y1 = x1 * (p.big_r1 / p.r1) + c1.cross(&x1) / (p.r1 * p.r1);

    let (s, co) = p.phi2.sin_cos();
    let x2 = rot_c2 * V3::new(p.r2 * co, p.r2 * s, 0.0);
    let w = tangential_scale * p.big_phi2 / p.r2;
    let y2 = rot_c2 * V3::new(p.big_r2 * co - w * s, p.big_r2 * s + w * co, 0.0);

    Ok(CartesianState::from_vectors(
        frame.to_global(&y1),
        frame.to_global(&y2),
        frame.to_global(&x1),
        frame.to_global(&x2),
    ))
}

/// `‖JᵀSJ − S‖∞` for a map from (P, Q) to (y, x), with central differences.
pub fn symplectic_deviation<F>(map: F, z: &[f64; 12], fd_step: f64) -> Result<f64>
where
    F: Fn(&[f64; 12]) -> Result<[f64; 12]>,
{
    let mut jac = SMatrix::<f64, 12, 12>::zeros();
    for j in 0..12 {
        let h = fd_step * z[j].abs().max(1.0);
        let mut zp = *z;
        let mut zm = *z;
        zp[j] += h;
        zm[j] -= h;
        let (fp, fm) = (map(&zp)?, map(&zm)?);
        for i in 0..12 {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    if jac.determinant().abs() < 1e-12 {
        return Err(Error::SingularChart("Jacobian is singular".into()));
    }
    let mut s = SMatrix::<f64, 12, 12>::zeros();
    for k in 0..6 {
        s[(k, k + 6)] = 1.0;
        s[(k + 6, k)] = -1.0;
    }
    let dev = jac.transpose() * s * jac - s;
    Ok(dev.abs().max())
}

/// Finite-difference symplecticity defect of [`chart_forward`] at `p`.
pub fn check_symplectic(p: &Chart12Point, frame: &Frame, fd_step: f64) -> Result<f64> {
    symplectic_deviation(
        |z| Ok(chart_forward(&Chart12Point::from_array(z), frame)?.to_array()),
        &p.to_array(),
        fd_step,
    )
}

/// Reduced dipole Hamiltonian in chart variables.
pub fn dipole_hamiltonian(p: &Chart12Point, params: &MassParameters, alpha: f64) -> Result<f64> {
    let (big_m, m) = params.auxiliary(1)?;
    let ratio = p.big_theta / p.big_phi2;
    if ratio.abs() > 1.0 {
        return Err(Error::Domain(format!("|Theta| > Phi2 ({ratio})")));
    }
    let sin_i2 = (1.0 - ratio * ratio).sqrt();
    Ok(p.big_r2 * p.big_r2 / (2.0 * m) - big_m * m / p.r2 + p.big_phi2 * p.big_phi2 / (2.0 * m * p.r2 * p.r2)
        - big_m * m * alpha * (p.r1 / (p.r2 * p.r2)) * sin_i2 * p.phi2.sin())
}

/// The same Hamiltonian evaluated on Cartesian variables.
pub fn dipole_hamiltonian_cartesian(state: &CartesianState, params: &MassParameters, alpha: f64) -> Result<f64> {
    let (big_m, m) = params.auxiliary(1)?;
    let (x1, x2, y2) = (state.x(0), state.x(1), state.y(1));
    let r2 = x2.norm();
    Ok(y2.norm_squared() / (2.0 * m) - m * big_m / r2 - alpha * m * big_m * x1.dot(&x2) / r2.powi(3))
}

/// Generic interior chart point with O(1) entries.
pub fn sample_chart_point<R: Rng + ?Sized>(rng: &mut R) -> Chart12Point {
    let big_g = rng.gen_range(1.0..2.0);
    let big_phi2 = rng.gen_range(0.5..1.5);
    let theta_max = f64::min(big_g, big_phi2);
    let mut ang = || rng.gen_range(-PI..PI);
    let (zeta, g, theta, phi2) = (ang(), ang(), ang(), ang());
    Chart12Point {
        c3: big_g * rng.gen_range(-0.9..0.9),
        big_g,
        big_r1: rng.gen_range(-1.0..1.0),
        big_theta: theta_max * rng.gen_range(-0.9..0.9),
        big_r2: rng.gen_range(-1.0..1.0),
        big_phi2,
        zeta,
        g,
        r1: rng.gen_range(0.5..1.0),
        theta,
        r2: rng.gen_range(1.5..3.0),
        phi2,
    }
}

/// Generic Cartesian state (both planets off the chart's singular set).
pub fn sample_cartesian_state<R: Rng + ?Sized>(rng: &mut R) -> CartesianState {
    let mut v = |lo: f64, hi: f64| V3::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi));
    CartesianState::from_vectors(v(-1.0, 1.0), v(-1.0, 1.0), v(-1.0, 1.0), v(-2.0, 2.0))
}

/// Largest relative discrepancy between chart points, angles compared mod 2π.
pub fn chart_distance(a: &Chart12Point, b: &Chart12Point) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    let scale = a.iter().take(6).chain(&a[8..9]).chain(&a[10..11]).fold(0.0f64, |m, v| m.max(v.abs()));
    (0..12)
        .map(|k| if matches!(k, 6 | 7 | 9 | 11) { wrap_angle(a[k] - b[k]).abs() } else { (a[k] - b[k]).abs() / scale })
        .fold(0.0, f64::max)
}

/// Largest relative discrepancy between Cartesian states.
pub fn state_distance(a: &CartesianState, b: &CartesianState) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(&b).map(|(u, v)| (u - v).abs() / scale).fold(0.0, f64::max)
}
