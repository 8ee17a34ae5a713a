//! Doubly averaged interaction: torus quadrature, the semi-axis-ratio
//! expansion, closed forms of the quadrupole term and ring averages.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kepler::{
    eccentricity_from_actions, lambda_from_axis, semi_major_axis, KeplerOrbit, MassParameters,
};

type V3 = Vector3<f64>;

/// Default nodes per angle for torus quadratures.
pub const DEFAULT_NODES: usize = 256;
/// Relative change allowed between the N/2 and N rules.
pub const DOUBLING_TOL: f64 = 1e-8;

/// Secular coordinates of two planets; `(p₂, q₂)` is fixed to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecularPoint {
    pub lambda: [f64; 2],
    pub eta: [f64; 2],
    pub xi: [f64; 2],
    pub p: f64,
    pub q: f64,
}

impl SecularPoint {
    pub fn circular(lambda: [f64; 2]) -> Self {
        Self { lambda, eta: [0.0; 2], xi: [0.0; 2], p: 0.0, q: 0.0 }
    }

    /// `(t₁, t₂, t₃)`.
    pub fn actions(&self) -> [f64; 3] {
        [
            0.5 * (self.eta[0].powi(2) + self.xi[0].powi(2)),
            0.5 * (self.eta[1].powi(2) + self.xi[1].powi(2)),
            0.5 * (self.p * self.p + self.q * self.q),
        ]
    }

    /// Arguments of `ηᵢ + iξᵢ` and `p + iq`.
    pub fn phases(&self) -> [f64; 3] {
        [self.xi[0].atan2(self.eta[0]), self.xi[1].atan2(self.eta[1]), self.q.atan2(self.p)]
    }

    /// Point with the given actions and phases.
    pub fn from_actions(lambda: [f64; 2], t: [f64; 3], phases: [f64; 3]) -> Self {
        let polar = |t: f64, a: f64| ((2.0 * t).sqrt() * a.cos(), (2.0 * t).sqrt() * a.sin());
        let (e1, x1) = polar(t[0], phases[0]);
        let (e2, x2) = polar(t[1], phases[1]);
        let (p, q) = polar(t[2], phases[2]);
        Self { lambda, eta: [e1, e2], xi: [x1, x2], p, q }
    }

    /// `(u₁, u₁★, u₂, u₂★, v, v★)` with `w = (η − iξ)/√2`, `w★ = (η + iξ)/(i√2)`.
    pub fn birkhoff(&self) -> [Complex64; 6] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::i();
        let w = |a: f64, b: f64| Complex64::new(a * s, -b * s);
        let ws = |a: f64, b: f64| Complex64::new(a * s, b * s) / i;
        [
            w(self.eta[0], self.xi[0]),
            ws(self.eta[0], self.xi[0]),
            w(self.eta[1], self.xi[1]),
            ws(self.eta[1], self.xi[1]),
            w(self.p, self.q),
            ws(self.p, self.q),
        ]
    }
}

/// Auxiliary functions of the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormAux {
    pub ebar1sq: f64,
    pub sbar_sq: f64,
    pub cbar: f64,
    pub ringf: f64,
}

impl ClosedFormAux {
    pub fn at(point: &SecularPoint) -> Result<Self> {
        let [t1, t2, t3] = point.actions();
        let [l1, l2] = point.lambda;
        let (g1, g2) = (l1 - t1, l2 - t2);
        if !(g1 > 0.0 && g2 > 0.0) {
            return Err(Error::Domain("actions exceed Lambda".into()));
        }
        let cbar = (2.0 * g1 + 2.0 * g2 - t3) / (4.0 * g1 * g2);
        let sbar_sq = 2.0 * cbar * (1.0 - t3 * cbar);
        if !(sbar_sq > 0.0) || 1.0 - 2.0 * t3 * cbar < -1.0 {
            return Err(Error::Domain(format!("t3 = {t3} outside the elliptic domain")));
        }
        Ok(Self { ebar1sq: 1.0 / l1 - t1 / (2.0 * l1 * l1), sbar_sq, cbar, ringf: (1.0 - t2 / l2).powi(-3) })
    }
}

/// The two Keplerian orbits represented by a secular point.
///
/// Orbit planes are split about the plane normal to the total angular
/// momentum, with the mutual node along `R₃(arg(p+iq)) k¹` and perihelion
/// arguments `arg(ηᵢ+iξᵢ) − arg(p+iq)` measured from that node.
pub fn embedding(point: &SecularPoint, params: &MassParameters) -> Result<[KeplerOrbit; 2]> {
    let aux = ClosedFormAux::at(point)?;
    let [t1, t2, t3] = point.actions();
    let gam = [point.lambda[0] - t1, point.lambda[1] - t2];
    let cos_i = 1.0 - 2.0 * t3 * aux.cbar;
    let iota = cos_i.clamp(-1.0, 1.0).acos();
    let i1 = (gam[1] * iota.sin()).atan2(gam[0] + gam[1] * cos_i);
    let i2 = iota - i1;
    let normals = [V3::new(0.0, i1.sin(), i1.cos()), V3::new(0.0, -i2.sin(), i2.cos())];
    let [th1, th2, thv] = point.phases();
    let rot = Rotation3::from_axis_angle(&V3::z_axis(), thv);
    let node = V3::x();
    let mut out = Vec::with_capacity(2);
    for k in 0..2 {
        let (big_m, m) = params.auxiliary(k)?;
        let e = eccentricity_from_actions(point.lambda[k], point.eta[k], point.xi[k])?;
        let omega = [th1, th2][k] - thv;
        let perp = normals[k].cross(&node);
        let p_hat = node * omega.cos() + perp * omega.sin();
        let q_hat = normals[k].cross(&p_hat);
        out.push(KeplerOrbit {
            a: semi_major_axis(point.lambda[k], big_m, m),
            e,
            big_m,
            m,
            p_hat: rot * p_hat,
            q_hat: rot * q_hat,
        });
    }
    Ok([out[0], out[1]])
}

/// States at `n` equally spaced mean anomalies.
pub fn orbit_samples(orbit: &KeplerOrbit, n: usize) -> Result<Vec<(V3, V3)>> {
    (0..n).map(|k| orbit.state_at_mean(2.0 * PI * k as f64 / n as f64)).collect()
}

/// Trapezoidal average over the torus of `f(x1, y1, x2, y2)`, together with
/// the change against the rule on every other node relative to the mean of `|f|`.
pub fn torus_average<F>(orbits: &[KeplerOrbit; 2], nodes: usize, f: F) -> Result<(f64, f64)>
where
    F: Fn(&V3, &V3, &V3, &V3) -> f64 + Sync,
{
    if nodes < 4 || nodes % 2 != 0 {
        return Err(Error::Domain(format!("nodes must be even and >= 4, got {nodes}")));
    }
    let s1 = orbit_samples(&orbits[0], nodes)?;
    let s2 = orbit_samples(&orbits[1], nodes)?;
    let rows: Vec<(f64, f64, f64)> = s1
        .par_iter()
        .enumerate()
        .map(|(i, (x1, y1))| {
            let (mut full, mut half, mut abs) = (0.0, 0.0, 0.0);
            for (j, (x2, y2)) in s2.iter().enumerate() {
                let v = f(x1, y1, x2, y2);
                full += v;
                abs += v.abs();
                if i % 2 == 0 && j % 2 == 0 {
                    half += v;
                }
            }
            (full, half, abs)
        })
        .collect();
    let (full, half, abs) = rows.iter().fold((0.0, 0.0, 0.0), |(a, b, c), (f, h, m)| (a + f, b + h, c + m));
    let n = nodes as f64;
    let full = full / (n * n);
    let half = half / (0.25 * n * n);
    let scale = (abs / (n * n)).max(f64::MIN_POSITIVE);
    Ok((full, (full - half).abs() / scale))
}

/// Quadrupole integrand `[3(x₁·x₂)² − r₁²r₂²]/(2r₂⁵)`.
pub fn quadrupole(x1: &V3, x2: &V3) -> f64 {
    let r2sq = x2.norm_squared();
    let d = x1.dot(x2);
    (3.0 * d * d - x1.norm_squared() * r2sq) / (2.0 * r2sq * r2sq * r2sq.sqrt())
}

/// Torus average of the quadrupole term; errors if the N/2 → N change
/// exceeds [`DOUBLING_TOL`].
pub fn double_average_f2(point: &SecularPoint, params: &MassParameters, nodes: usize) -> Result<f64> {
    if nodes < 32 {
        return Err(Error::Domain(format!("nodes must be >= 32, got {nodes}")));
    }
    let orbits = embedding(point, params)?;
    let (value, change) = torus_average(&orbits, nodes, |x1, _, x2, _| quadrupole(x1, x2))?;
    if change > DOUBLING_TOL {
        return Err(Error::Quadrature { change });
    }
    Ok(value)
}

/// Single average over ℓ₂ of the quadrupole at a fixed position `x1`.
pub fn single_average_f2(x1: &V3, outer: &KeplerOrbit, nodes: usize) -> Result<f64> {
    let s2 = orbit_samples(outer, nodes)?;
    Ok(s2.iter().map(|(x2, _)| quadrupole(x1, x2)).sum::<f64>() / nodes as f64)
}

/// Closed form of the ℓ₂ average at fixed `x1`, with `C⁽²⁾` the outer
/// angular momentum.
pub fn pointwise_closed_form(x1: &V3, outer: &KeplerOrbit) -> Result<f64> {
    let c2 = outer.angular_momentum();
    let c2n = c2.norm();
    if c2n < 1e-12 {
        return Err(Error::Domain("|C2| below tolerance".into()));
    }
    let r1 = x1.norm();
    let theta = c2.dot(x1) / r1;
    let inv_r2sq = ring_average(outer.e)? / (outer.a * outer.a);
    Ok(-(outer.big_m * outer.m * outer.m / 4.0) * (3.0 * theta * theta - c2n * c2n) * r1 * r1 / c2n.powi(4) * inv_r2sq)
}

/// `(1/2π)∫ dζ/(1 − e cos ζ)` by trapezoidal quadrature with node doubling.
pub fn ring_average(e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!("eccentricity {e} outside [0,1)")));
    }
    let rule = |n: usize| (0..n).map(|k| 1.0 / (1.0 - e * (2.0 * PI * k as f64 / n as f64).cos())).sum::<f64>() / n as f64;
    let mut n = 32;
    let mut prev = rule(n);
    while n < 1 << 16 {
        n *= 2;
        let next = rule(n);
        if (next - prev).abs() <= 1e-15 * next {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature { change: (rule(n) - prev).abs() / prev })
}

/// `(avg(x₁²+x₂²), avg(x₁²−x₂²), avg(x₁x₂))/a²` over the mean anomaly.
pub fn eccentric_averages(e: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!("eccentricity {e} outside [0,1)")));
    }
    let n = 64;
    let b = (1.0 - e * e).sqrt();
    let (mut s0, mut s2, mut cr) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let z = 2.0 * PI * k as f64 / n as f64;
        let w = 1.0 - e * z.cos();
        let (x1, x2) = (z.cos() - e, b * z.sin());
        s0 += (x1 * x1 + x2 * x2) * w;
        s2 += (x1 * x1 - x2 * x2) * w;
        cr += x1 * x2 * w;
    }
    let n = n as f64;
    Ok((s0 / n, s2 / n, cr / n))
}

/// `avg over ℓ₁ of (C⁽²⁾·x⁽¹⁾)² / (a₁²|C⁽²⁾|²)` in Birkhoff variables.
pub fn vertical_average(point: &SecularPoint) -> Result<f64> {
    let aux = ClosedFormAux::at(point)?;
    let [t1, _, t3] = point.actions();
    let e1sq = 2.0 * t1 * aux.ebar1sq;
    let [u1, u1s, _, _, v, vs] = point.birkhoff();
    let cross = u1s * u1s * v * v + vs * vs * u1 * u1;
    Ok((t3 * (1.0 + 1.5 * e1sq) + 2.5 * cross.re * aux.ebar1sq) * aux.sbar_sq)
}

/// Quadrupole term of the doubly averaged interaction in closed form.
pub fn closed_form_f2(point: &SecularPoint, params: &MassParameters) -> Result<f64> {
    let (big_m2, m2) = params.auxiliary(1)?;
    let [t1, t2, _] = point.actions();
    let a1 = semi_major_axis(point.lambda[0], params.auxiliary(0)?.0, params.auxiliary(0)?.1);
    let a2 = semi_major_axis(point.lambda[1], big_m2, m2);
    let c2 = point.lambda[1] - t2;
    if c2 < 1e-12 * point.lambda[1] {
        return Err(Error::Domain("|C2| below tolerance".into()));
    }
    let e1 = eccentricity_from_actions(point.lambda[0], point.eta[0], point.xi[0])?;
    let e2 = eccentricity_from_actions(point.lambda[1], point.eta[1], point.xi[1])?;
    debug_assert!(t1 >= 0.0);
    let cx_sq = vertical_average(point)? * a1 * a1 * c2 * c2;
    let r1_sq = a1 * a1 * (1.0 + 1.5 * e1 * e1);
    let inv_r2_sq = ring_average(e2)? / (a2 * a2);
    Ok(-(big_m2 * m2 * m2 / 4.0) * (3.0 * cx_sq - r1_sq * c2 * c2) / c2.powi(4) * inv_r2_sq)
}

/// Planar and vertical parts; their sum is `−m̄₁m̄₂·f⁽²⁾`.
pub fn planar_vertical_split(point: &SecularPoint, params: &MassParameters) -> Result<(f64, f64)> {
    let [t1, t2, _] = point.actions();
    let (mm1, mm2) = (params.auxiliary(0)?, params.auxiliary(1)?);
    let a1 = semi_major_axis(point.lambda[0], mm1.0, mm1.1);
    let a2 = semi_major_axis(point.lambda[1], mm2.0, mm2.1);
    let e2 = eccentricity_from_actions(point.lambda[1], point.eta[1], point.xi[1])?;
    let aux = ClosedFormAux::at(point)?;
    let e1sq = 2.0 * t1 * aux.ebar1sq;
    let pref = params.mbar[0] * params.mbar[1] * a1 * a1 / a2.powi(3) * ring_average(e2)?
        / (1.0 - t2 / point.lambda[1]).powi(2);
    let planar = -0.25 * pref * (1.0 + 1.5 * e1sq);
    let vertical = 0.75 * pref * vertical_average(point)?;
    Ok((planar, vertical))
}

/// Taylor coefficients `f⁽ᵏ⁾`, k < `kmax`, of `ε ↦ avg 1/|x⁽²⁾ − εx⁽¹⁾|`,
/// from a Cauchy contour in the complex ε plane.
pub fn epsilon_coefficients(
    point: &SecularPoint,
    params: &MassParameters,
    nodes: usize,
    kmax: usize,
) -> Result<Vec<f64>> {
    let orbits = embedding(point, params)?;
    let reach = orbits[0].a * (1.0 + orbits[0].e);
    let gap = orbits[1].a * (1.0 - orbits[1].e);
    if reach >= gap {
        return Err(Error::Domain("orbits not separated".into()));
    }
    let radius = 0.5 * gap / reach;
    let contour = 64.max(2 * kmax);
    let s1 = orbit_samples(&orbits[0], nodes)?;
    let s2 = orbit_samples(&orbits[1], nodes)?;
    let mut values: Vec<Complex64> = (0..contour)
        .into_par_iter()
        .map(|j| {
            let eps = Complex64::from_polar(radius, 2.0 * PI * j as f64 / contour as f64);
            let mut acc = Complex64::new(0.0, 0.0);
            for (x1, _) in &s1 {
                for (x2, _) in &s2 {
                    let d = [x2.x - eps * x1.x, x2.y - eps * x1.y, x2.z - eps * x1.z];
                    let sq = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                    acc += sq.sqrt().inv();
                }
            }
            acc / (nodes * nodes) as f64
        })
        .collect();
    FftPlanner::new().plan_fft_forward(contour).process(&mut values);
    Ok((0..kmax).map(|k| values[k].re / (contour as f64 * radius.powi(k as i32))).collect())
}

/// Torus average of the indirect term `y⁽¹⁾·y⁽²⁾/m̄₀`.
pub fn indirect_average(point: &SecularPoint, params: &MassParameters, nodes: usize) -> Result<f64> {
    let orbits = embedding(point, params)?;
    let (v, _) = torus_average(&orbits, nodes, |_, y1, _, y2| y1.dot(y2) / params.mbar0)?;
    Ok(v)
}

/// Fourier coefficients of `f⁽²⁾` in the phases of `(η₁+iξ₁, η₂+iξ₂, p+iq)`
/// at fixed actions, from a `grid³` phase lattice; modes `|kⱼ| < grid/2`.
pub fn phase_fourier_modes(
    lambda: [f64; 2],
    t: [f64; 3],
    params: &MassParameters,
    grid: usize,
    nodes: usize,
) -> Result<Vec<([i32; 3], Complex64)>> {
    if grid < 2 {
        return Err(Error::Domain("phase grid must have at least two points".into()));
    }
    let angle = |k: usize| 2.0 * PI * k as f64 / grid as f64;
    let values: Vec<f64> = (0..grid * grid * grid)
        .into_par_iter()
        .map(|idx| {
            let phases = [angle(idx / (grid * grid)), angle((idx / grid) % grid), angle(idx % grid)];
            double_average_f2(&SecularPoint::from_actions(lambda, t, phases), params, nodes)
        })
        .collect::<Result<_>>()?;
    let half = (grid as i32 - 1) / 2;
    let mut modes = Vec::new();
    let norm = (grid * grid * grid) as f64;
    for k0 in -half..=half {
        for k1 in -half..=half {
            for k2 in -half..=half {
                let mut acc = Complex64::new(0.0, 0.0);
                for (idx, v) in values.iter().enumerate() {
                    let ph = k0 as f64 * angle(idx / (grid * grid))
                        + k1 as f64 * angle((idx / grid) % grid)
                        + k2 as f64 * angle(idx % grid);
                    acc += Complex64::from_polar(*v, -ph);
                }
                modes.push(([k0, k1, k2], acc / norm));
            }
        }
    }
    Ok(modes)
}

/// Largest `|c_k|/|c_0|` over modes forbidden by rotation and reflection
/// symmetry: `k₁+k₂+k₃ ≠ 0` or `k₃` odd.
pub fn dalembert_violation(modes: &[([i32; 3], Complex64)]) -> Result<f64> {
    let c0 = modes
        .iter()
        .find(|(k, _)| *k == [0, 0, 0])
        .map(|(_, c)| c.norm())
        .ok_or_else(|| Error::Domain("missing zero mode".into()))?;
    Ok(modes
        .iter()
        .filter(|(k, _)| k.iter().sum::<i32>() != 0 || k[2] % 2 != 0)
        .map(|(_, c)| c.norm() / c0)
        .fold(0.0, f64::max))
}

/// Largest relative change of `f⁽²⁾` when the phase of `η₂ + iξ₂` is rotated.
pub fn rotation_axis_deviation(point: &SecularPoint, params: &MassParameters, angles: &[f64], nodes: usize) -> Result<f64> {
    let base = double_average_f2(point, params, nodes)?;
    let mut phases = point.phases();
    let t = point.actions();
    let mut worst = 0.0f64;
    for a in angles {
        phases[1] = point.phases()[1] + a;
        let v = double_average_f2(&SecularPoint::from_actions(point.lambda, t, phases), params, nodes)?;
        worst = worst.max((v - base).abs() / base.abs());
    }
    Ok(worst)
}

/// Random elliptic, inclined point with `a₂ = 1`, `a₁/a₂ ∈ [α_lo, α_hi]`,
/// eccentricities up to `e_max` and mutual inclination up to `iota_max`.
pub fn sample_point<R: Rng + ?Sized>(
    rng: &mut R,
    params: &MassParameters,
    alpha: (f64, f64),
    e_max: f64,
    iota_max: f64,
) -> Result<SecularPoint> {
    let (mm1, mm2) = (params.auxiliary(0)?, params.auxiliary(1)?);
    let a1 = rng.gen_range(alpha.0..=alpha.1);
    let lambda = [lambda_from_axis(a1, mm1.0, mm1.1), lambda_from_axis(1.0, mm2.0, mm2.1)];
    let mut t = [0.0; 3];
    for k in 0..2 {
        let e: f64 = rng.gen_range(0.0..=e_max);
        t[k] = lambda[k] * (1.0 - (1.0 - e * e).sqrt());
    }
    let (g1, g2) = (lambda[0] - t[0], lambda[1] - t[1]);
    let iota: f64 = rng.gen_range(0.0..=iota_max);
    let s = g1 + g2;
    t[2] = s - (s * s - 2.0 * g1 * g2 * (1.0 - iota.cos())).sqrt();
    let phases = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
    Ok(SecularPoint::from_actions(lambda, t, phases))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kepler::solve_kepler;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn masses() -> MassParameters {
        MassParameters::new(1.0, 1e-3, vec![0.8, 1.3]).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn embedding_reproduces_actions() {
        let params = masses();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let pt = sample_point(&mut rng, &params, (0.1, 0.3), 0.5, 1.2).unwrap();
            let orbits = embedding(&pt, &params).unwrap();
            let [t1, t2, t3] = pt.actions();
            let c1 = orbits[0].angular_momentum();
            let c2 = orbits[1].angular_momentum();
            assert!(rel(c1.norm(), pt.lambda[0] - t1) < 1e-12);
            assert!(rel(c2.norm(), pt.lambda[1] - t2) < 1e-12);
            assert!(rel((c1 + c2).norm(), pt.lambda[0] + pt.lambda[1] - t1 - t2 - t3) < 1e-12);
            // total angular momentum along k³
            let c = c1 + c2;
            assert!(c.x.abs() + c.y.abs() < 1e-12 * c.norm());
        }
    }

    #[test]
    fn ring_examples() {
        assert_eq!(ring_average(0.0).unwrap(), 1.0);
        assert!((ring_average(0.6).unwrap() - 1.25).abs() < 1e-14);
        let mut prev = 1.0;
        for k in 1..10 {
            let r = ring_average(0.1 * k as f64).unwrap();
            assert!(r > prev);
            assert!(rel(r, 1.0 / (1.0 - 0.01 * (k * k) as f64).sqrt()) < 1e-13);
            prev = r;
        }
        assert!(ring_average(1.0).is_err());
    }

    #[test]
    fn eccentric_average_examples() {
        let (s0, s2, c) = eccentric_averages(0.0).unwrap();
        assert!((s0 - 1.0).abs() < 1e-15 && s2.abs() < 1e-15 && c.abs() < 1e-15);
        let (s0, s2, c) = eccentric_averages(0.3).unwrap();
        assert!((s0 - 1.135).abs() < 1e-14 && (s2 - 0.225).abs() < 1e-14 && c.abs() < 1e-15);
    }

    #[test]
    fn eccentric_averages_match_mean_anomaly_quadrature() {
        // direct average over ℓ with a Kepler solve per node
        for &e in &[0.1, 0.45, 0.7] {
            let n = 512;
            let (mut s0, mut s2) = (0.0, 0.0);
            for k in 0..n {
                let z = solve_kepler(e, 2.0 * PI * k as f64 / n as f64).unwrap();
                let (x1, x2) = (z.cos() - e, (1.0 - e * e).sqrt() * z.sin());
                s0 += x1 * x1 + x2 * x2;
                s2 += x1 * x1 - x2 * x2;
            }
            let (a, b, _) = eccentric_averages(e).unwrap();
            assert!((s0 / n as f64 - a).abs() < 1e-12 && (s2 / n as f64 - b).abs() < 1e-12);
        }
    }

    #[test]
    fn circular_coplanar_value() {
        let params = masses();
        let (mm1, mm2) = (params.auxiliary(0).unwrap(), params.auxiliary(1).unwrap());
        let (a1, a2) = (0.3, 1.0);
        let pt = SecularPoint::circular([lambda_from_axis(a1, mm1.0, mm1.1), lambda_from_axis(a2, mm2.0, mm2.1)]);
        let q = double_average_f2(&pt, &params, 64).unwrap();
        let c = closed_form_f2(&pt, &params).unwrap();
        let expect = a1 * a1 / (4.0 * a2.powi(3));
        assert!(rel(q, expect) < 1e-9 && rel(c, expect) < 1e-12);
        let (planar, vertical) = planar_vertical_split(&pt, &params).unwrap();
        assert_eq!(vertical, 0.0);
        assert!(rel(planar, -0.25 * 0.8 * 1.3 * a1 * a1 / a2.powi(3)) < 1e-12);
    }

    #[test]
    fn planar_eccentric_factor() {
        let params = masses();
        let (mm1, mm2) = (params.auxiliary(0).unwrap(), params.auxiliary(1).unwrap());
        let lambda = [lambda_from_axis(0.2, mm1.0, mm1.1), lambda_from_axis(1.0, mm2.0, mm2.1)];
        let t1 = lambda[0] * (1.0 - (1.0f64 - 0.04).sqrt());
        let pt = SecularPoint::from_actions(lambda, [t1, 0.0, 0.0], [0.4, 0.0, 0.0]);
        let circ = SecularPoint::circular(lambda);
        let (p, v) = planar_vertical_split(&pt, &params).unwrap();
        let (p0, _) = planar_vertical_split(&circ, &params).unwrap();
        assert_eq!(v, 0.0);
        assert!(rel(p / p0, 1.06) < 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let params = masses();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let pt = sample_point(&mut rng, &params, (0.1, 0.3), 0.5, 1.2).unwrap();
            let q = double_average_f2(&pt, &params, 128).unwrap();
            let c = closed_form_f2(&pt, &params).unwrap();
            assert!(rel(q, c) < 1e-8, "{q} {c}");
            let (p, v) = planar_vertical_split(&pt, &params).unwrap();
            assert!(rel(p + v, -0.8 * 1.3 * c) < 1e-12);
        }
    }

    #[test]
    fn pointwise_identity() {
        let params = masses();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pt = sample_point(&mut rng, &params, (0.1, 0.3), 0.5, 1.2).unwrap();
        let orbits = embedding(&pt, &params).unwrap();
        for k in 0..8 {
            let (x1, _) = orbits[0].state_at_mean(0.7 * k as f64).unwrap();
            let q = single_average_f2(&x1, &orbits[1], 256).unwrap();
            let c = pointwise_closed_form(&x1, &orbits[1]).unwrap();
            assert!(rel(q, c) < 1e-10);
        }
    }

    #[test]
    fn symmetries() {
        let params = masses();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pt = sample_point(&mut rng, &params, (0.1, 0.3), 0.4, 1.0).unwrap();
        let base = double_average_f2(&pt, &params, 128).unwrap();
        let flipped = SecularPoint { p: -pt.p, q: -pt.q, ..pt };
        assert!(rel(double_average_f2(&flipped, &params, 128).unwrap(), base) < 1e-12);
        let [_, t2, _] = pt.actions();
        let rot = pt.phases()[1] + 1.234;
        let rotated = SecularPoint {
            eta: [pt.eta[0], (2.0 * t2).sqrt() * rot.cos()],
            xi: [pt.xi[0], (2.0 * t2).sqrt() * rot.sin()],
            ..pt
        };
        assert!(rel(double_average_f2(&rotated, &params, 128).unwrap(), base) < 1e-10);
    }

    #[test]
    fn epsilon_terms() {
        let params = masses();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let pt = sample_point(&mut rng, &params, (0.2, 0.3), 0.3, 1.0).unwrap();
        let c = epsilon_coefficients(&pt, &params, 96, 3).unwrap();
        let orbits = embedding(&pt, &params).unwrap();
        // f⁽⁰⁾ = avg 1/r₂ = 1/a₂
        assert!(rel(c[0], 1.0 / orbits[1].a) < 1e-12);
        assert!(c[1].abs() < 1e-9);
        assert!(rel(c[2], double_average_f2(&pt, &params, 96).unwrap()) < 1e-10);
        assert!(indirect_average(&pt, &params, 96).unwrap().abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        let params = masses();
        let pt = SecularPoint { eta: [5.0, 0.0], ..SecularPoint::circular([1.0, 2.0]) };
        assert!(double_average_f2(&pt, &params, 64).is_err());
        assert!(double_average_f2(&SecularPoint::circular([0.3, 1.0]), &params, 16).is_err());
    }

    #[test]
    fn phase_modes_obey_dalembert() {
        let params = masses();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pt = sample_point(&mut rng, &params, (0.2, 0.3), 0.4, 1.0).unwrap();
        let modes = phase_fourier_modes(pt.lambda, pt.actions(), &params, 8, 48).unwrap();
        assert!(dalembert_violation(&modes).unwrap() < 1e-10);
        // the allowed mode from (u₁★)²v² is populated
        let k = modes.iter().find(|(k, _)| *k == [2, 0, -2]).unwrap().1;
        assert!(k.norm() > 1e-6);
        assert!(rotation_axis_deviation(&pt, &params, &[0.5, 2.0], 64).unwrap() < 1e-10);
        // a non-symmetric function is caught
        let mut bad = modes.clone();
        bad.push(([1, 0, 0], Complex64::new(1e-3, 0.0)));
        assert!(dalembert_violation(&bad).unwrap() > 1e-4);
    }
}
