//! Direct integration of the heliocentric three-body Hamiltonian
//! `Σ(|y_i|²/2m_i − m_iM_i/|x_i|) + μ(y₁·y₂/m̄₀ − m̄₁m̄₂/|x₁−x₂|)`
//! by symplectic splitting into Kepler drifts and interaction steps.

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::charts::CartesianState;
use crate::error::{Error, Result};
use crate::kepler::{elements_from_state, solve_kepler, KeplerOrbit, MassParameters};

type V3 = Vector3<f64>;

/// Heliocentric energy.
pub fn hamiltonian_plt(state: &CartesianState, params: &MassParameters) -> Result<f64> {
    if params.n_planets() != 2 {
        return Err(Error::Domain("two planets expected".into()));
    }
    let mut h = 0.0;
    for i in 0..2 {
        let (big_m, m) = params.auxiliary(i)?;
        let r = state.x(i).norm();
        if r == 0.0 {
            return Err(Error::Encounter(format!("planet {} at the star", i + 1)));
        }
        h += state.y(i).norm_squared() / (2.0 * m) - m * big_m / r;
    }
    let d = (state.x(0) - state.x(1)).norm();
    if d == 0.0 {
        return Err(Error::Encounter("planets collide".into()));
    }
    h += params.mu * (state.y(0).dot(&state.y(1)) / params.mbar0 - params.mbar[0] * params.mbar[1] / d);
    Ok(h)
}

pub fn total_angular_momentum(state: &CartesianState) -> V3 {
    state.x(0).cross(&state.y(0)) + state.x(1).cross(&state.y(1))
}

/// Exact two-body flow of `(x, v)` under `ẍ = −gm x/|x|³` for time `dt`.
pub fn kepler_drift(x: &V3, v: &V3, gm: f64, dt: f64) -> Result<(V3, V3)> {
    let r0 = x.norm();
    let inv_a = 2.0 / r0 - v.norm_squared() / gm;
    if !(inv_a > 0.0) {
        return Err(Error::Encounter(format!("unbound two-body orbit (1/a = {inv_a:e})")));
    }
    let a = 1.0 / inv_a;
    let n = (gm * inv_a.powi(3)).sqrt();
    let ec = 1.0 - r0 * inv_a;
    let es = x.dot(v) / (gm * a).sqrt();
    let e = ec.hypot(es);
    let e0 = es.atan2(ec);
    let ndt = n * dt;
    let mut de = solve_kepler(e, e0 - es + ndt)? - e0;
    // polish the increment: ΔE − e_c sin ΔE + e_s(1 − cos ΔE) = n dt
    for _ in 0..4 {
        let (s, c) = de.sin_cos();
        let res = de - ec * s + es * 2.0 * (0.5 * de).sin().powi(2) - ndt;
        let step = res / (1.0 - ec * c + es * s);
        de -= step;
        if step.abs() <= f64::EPSILON * (1.0 + de.abs()) {
            break;
        }
    }
    let (s, c) = de.sin_cos();
    let one_minus_c = 2.0 * (0.5 * de).sin().powi(2);
    let r = a * (1.0 - ec * c + es * s);
    let f = 1.0 - a / r0 * one_minus_c;
    let g = dt + (s - de) / n;
    let fd = -(gm * a).sqrt() * s / (r * r0);
    let gd = 1.0 - a / r * one_minus_c;
    Ok((x * f + v * g, x * fd + v * gd))
}

/// Fixed-step symmetric splittings of `h_Kep + μ f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Leapfrog,
    Saba3,
    Aba864,
}

impl Scheme {
    /// Drift and kick weights `(a₁, b₁, a₂, b₂, …, a_k)` for a symmetric ABA sequence.
    fn weights(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Scheme::Leapfrog => (vec![0.5, 0.5], vec![1.0]),
            Scheme::Saba3 => {
                let s = 15f64.sqrt() / 10.0;
                (vec![0.5 - s, s, s, 0.5 - s], vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0])
            }
            Scheme::Aba864 => {
                let a = [
                    0.071_133_426_498_223_117_777_938_730_006_154_996_417_4,
                    0.241_153_427_956_640_098_736_487_795_326_289_649_618,
                    0.521_411_761_772_814_789_212_136_078_067_994_229_991,
                ];
                let a4 = 0.5 - a[0] - a[1] - a[2];
                let b = [
                    0.183_083_687_472_197_221_961_703_757_166_430_291_072,
                    0.310_782_859_898_574_869_507_522_291_054_262_796_375,
                    -0.026_564_618_511_958_800_697_212_137_916_498_759_266_3,
                ];
                let b4 = 1.0 - 2.0 * (b[0] + b[1] + b[2]);
                (
                    vec![a[0], a[1], a[2], a4, a4, a[2], a[1], a[0]],
                    vec![b[0], b[1], b[2], b4, b[2], b[1], b[0]],
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanetElements {
    pub a: f64,
    pub e: f64,
    /// Inclination to the reference plane.
    pub inclination: f64,
    pub mean_anomaly: f64,
    pub arg_perihelion: f64,
    pub node: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub masses: MassParameters,
    pub planets: [PlanetElements; 2],
    /// Span in inner-orbit periods.
    pub span_periods: f64,
    pub steps_per_period: usize,
    /// Number of output samples (uniform in time, endpoints included).
    pub samples: usize,
    pub scheme: Scheme,
    /// Runs with `|x₁ − x₂| < encounter_factor · a₁` are aborted.
    pub encounter_factor: f64,
    pub max_axis_ratio: f64,
    pub max_mu: f64,
}

impl SystemConfig {
    pub fn planar(mu: f64, a1: f64, a2: f64, e1: f64, e2: f64, span_periods: f64) -> Self {
        let el = |a, e, m, w| PlanetElements { a, e, inclination: 0.0, mean_anomaly: m, arg_perihelion: w, node: 0.0 };
        Self {
            masses: MassParameters { mbar0: 1.0, mu, mbar: vec![1.0, 1.0] },
            planets: [el(a1, e1, 0.3, 0.0), el(a2, e2, 2.1, 1.0)],
            span_periods,
            steps_per_period: 100,
            samples: 1001,
            scheme: Scheme::Saba3,
            encounter_factor: 0.1,
            max_axis_ratio: 0.5,
            max_mu: 1e-2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.masses.validate()?;
        if self.masses.n_planets() != 2 {
            return Err(Error::Config("exactly two planets are supported".into()));
        }
        let [p1, p2] = &self.planets;
        for p in &self.planets {
            if !(p.a > 0.0) || !(0.0..1.0).contains(&p.e) {
                return Err(Error::Config(format!("invalid elements {p:?}")));
            }
        }
        if p1.a / p2.a > self.max_axis_ratio {
            return Err(Error::Config(format!("a1/a2 = {} above {}", p1.a / p2.a, self.max_axis_ratio)));
        }
        if p1.a * (1.0 + p1.e) >= p2.a * (1.0 - p2.e) {
            return Err(Error::Config("orbits cross".into()));
        }
        if self.masses.mu > self.max_mu {
            return Err(Error::Config(format!("mu = {} above {}", self.masses.mu, self.max_mu)));
        }
        if self.steps_per_period == 0 || self.samples < 2 || !(self.span_periods > 0.0) {
            return Err(Error::Config("span, steps and samples must be positive".into()));
        }
        Ok(())
    }

    pub fn inner_period(&self) -> Result<f64> {
        let (big_m, _) = self.masses.auxiliary(0)?;
        Ok(std::f64::consts::TAU * (self.planets[0].a.powi(3) / big_m).sqrt())
    }

    pub fn initial_state(&self) -> Result<CartesianState> {
        let mut xs = [V3::zeros(); 2];
        let mut ys = [V3::zeros(); 2];
        for i in 0..2 {
            let p = &self.planets[i];
            let (big_m, m) = self.masses.auxiliary(i)?;
            let rot = Rotation3::from_axis_angle(&V3::z_axis(), p.node)
                * Rotation3::from_axis_angle(&V3::x_axis(), p.inclination)
                * Rotation3::from_axis_angle(&V3::z_axis(), p.arg_perihelion);
            let orbit = KeplerOrbit { a: p.a, e: p.e, big_m, m, p_hat: rot * V3::x(), q_hat: rot * V3::y() };
            let (x, y) = orbit.state_at_mean(p.mean_anomaly)?;
            xs[i] = x;
            ys[i] = y;
        }
        Ok(CartesianState::from_vectors(ys[0], ys[1], xs[0], xs[1]))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: CartesianState,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub step: f64,
    pub steps_taken: usize,
    /// Reason the run stopped early, if it did.
    pub aborted: Option<String>,
}

struct Integrator<'a> {
    params: &'a MassParameters,
    gm: [f64; 2],
    m: [f64; 2],
    drifts: Vec<f64>,
    kicks: Vec<f64>,
}

impl<'a> Integrator<'a> {
    fn new(params: &'a MassParameters, scheme: Scheme) -> Result<Self> {
        let (m0, m1) = params.auxiliary(0)?;
        let (m20, m21) = params.auxiliary(1)?;
        let (drifts, kicks) = scheme.weights();
        Ok(Self { params, gm: [m0, m20], m: [m1, m21], drifts, kicks })
    }

    fn drift(&self, x: &mut [V3; 2], y: &mut [V3; 2], dt: f64) -> Result<()> {
        for i in 0..2 {
            let (nx, nv) = kepler_drift(&x[i], &(y[i] / self.m[i]), self.gm[i], dt)?;
            x[i] = nx;
            y[i] = nv * self.m[i];
        }
        Ok(())
    }

    /// Flow of `μ(y₁·y₂/m̄₀ − m̄₁m̄₂/|x₁−x₂|)`: half kick, cross drift, half kick.
    fn interact(&self, x: &mut [V3; 2], y: &mut [V3; 2], dt: f64) {
        let mu = self.params.mu;
        let k = mu * self.params.mbar[0] * self.params.mbar[1];
        let kick = |x: &[V3; 2], y: &mut [V3; 2], h: f64| {
            let d = x[0] - x[1];
            let f = d * (k / d.norm().powi(3));
            y[0] -= f * h;
            y[1] += f * h;
        };
        kick(x, y, 0.5 * dt);
        let c = mu / self.params.mbar0 * dt;
        let (y0, y1) = (y[0], y[1]);
        x[0] += y1 * c;
        x[1] += y0 * c;
        kick(x, y, 0.5 * dt);
    }

    fn step(&self, x: &mut [V3; 2], y: &mut [V3; 2], h: f64) -> Result<()> {
        for (j, a) in self.drifts.iter().enumerate() {
            self.drift(x, y, a * h)?;
            if let Some(b) = self.kicks.get(j) {
                self.interact(x, y, b * h);
            }
        }
        Ok(())
    }
}

fn unpack(s: &CartesianState) -> ([V3; 2], [V3; 2]) {
    ([s.x(0), s.x(1)], [s.y(0), s.y(1)])
}

/// Integrates from `state` over `n_steps` steps of size `h` (negative `h`
/// runs backward), recording `samples` uniformly spaced states.
pub fn integrate_from(
    state: &CartesianState,
    params: &MassParameters,
    scheme: Scheme,
    h: f64,
    n_steps: usize,
    samples: usize,
    encounter_distance: f64,
) -> Result<Trajectory> {
    let integ = Integrator::new(params, scheme)?;
    let (mut x, mut y) = unpack(state);
    let samples = samples.max(2);
    let mut out = Vec::with_capacity(samples);
    out.push(Sample { t: 0.0, state: *state });
    let mut next = 1usize;
    let mut aborted = None;
    let mut taken = 0;
    for k in 1..=n_steps {
        if let Err(e) = integ.step(&mut x, &mut y, h) {
            aborted = Some(format!("step {k}: {e}"));
            break;
        }
        taken = k;
        if (x[0] - x[1]).norm() < encounter_distance {
            aborted = Some(format!("close encounter at t = {}", k as f64 * h));
            break;
        }
        while next < samples && next * n_steps <= k * (samples - 1) {
            out.push(Sample { t: k as f64 * h, state: CartesianState::from_vectors(y[0], y[1], x[0], x[1]) });
            next += 1;
        }
    }
    if aborted.is_some() {
        out.push(Sample { t: taken as f64 * h, state: CartesianState::from_vectors(y[0], y[1], x[0], x[1]) });
    }
    Ok(Trajectory { samples: out, step: h, steps_taken: taken, aborted })
}

pub fn integrate(config: &SystemConfig) -> Result<Trajectory> {
    config.validate()?;
    let period = config.inner_period()?;
    let h = period / config.steps_per_period as f64;
    let n = (config.span_periods * config.steps_per_period as f64).round() as usize;
    integrate_from(
        &config.initial_state()?,
        &config.masses,
        config.scheme,
        h,
        n,
        config.samples,
        config.encounter_factor * config.planets[0].a,
    )
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DriftReport {
    pub times: Vec<f64>,
    /// Actions `Λᵢ = mᵢ√(Mᵢaᵢ)`.
    pub big_lambda: [Vec<f64>; 2],
    pub a: [Vec<f64>; 2],
    pub e: [Vec<f64>; 2],
    /// Longitude of perihelion in the reference plane.
    pub varpi: [Vec<f64>; 2],
    pub mutual_inclination: Vec<f64>,
    pub max_big_lambda_drift: [f64; 2],
    pub max_e_drift: [f64; 2],
    pub energy_rel_error: f64,
    pub angular_momentum_rel_error: f64,
    pub c3_rel_error: f64,
    /// Largest `|x₃|, |y₃|` seen.
    pub max_out_of_plane: f64,
    pub aborted: Option<String>,
}

pub fn track_elements(traj: &Trajectory, params: &MassParameters) -> Result<DriftReport> {
    let first = traj.samples.first().ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    let h0 = hamiltonian_plt(&first.state, params)?;
    let c0 = total_angular_momentum(&first.state);
    let mut rep = DriftReport { aborted: traj.aborted.clone(), ..Default::default() };
    let aux = [params.auxiliary(0)?, params.auxiliary(1)?];
    for s in &traj.samples {
        rep.times.push(s.t);
        let mut normals = [V3::zeros(); 2];
        for i in 0..2 {
            let (big_m, m) = aux[i];
            let (x, y) = (s.state.x(i), s.state.y(i));
            let el = elements_from_state(&x, &y, big_m, m)?;
            let v = y / m;
            let evec = v.cross(&x.cross(&v)) / big_m - x / x.norm();
            rep.big_lambda[i].push(el.lambda);
            rep.a[i].push(el.a);
            rep.e[i].push(el.e);
            rep.varpi[i].push(evec.y.atan2(evec.x));
            normals[i] = V3::from(el.c).normalize();
        }
        rep.mutual_inclination.push(normals[0].dot(&normals[1]).clamp(-1.0, 1.0).acos());
        let h = hamiltonian_plt(&s.state, params)?;
        rep.energy_rel_error = rep.energy_rel_error.max(((h - h0) / h0).abs());
        let c = total_angular_momentum(&s.state);
        rep.angular_momentum_rel_error = rep.angular_momentum_rel_error.max((c - c0).norm() / c0.norm());
        rep.c3_rel_error = rep.c3_rel_error.max((c.z - c0.z).abs() / c0.norm());
        for i in 0..2 {
            rep.max_out_of_plane = rep.max_out_of_plane.max(s.state.x[i][2].abs()).max(s.state.y[i][2].abs());
        }
    }
    for i in 0..2 {
        let (l0, e0) = (rep.big_lambda[i][0], rep.e[i][0]);
        rep.max_big_lambda_drift[i] = rep.big_lambda[i].iter().fold(0.0f64, |a, l| a.max((l - l0).abs()));
        rep.max_e_drift[i] = rep.e[i].iter().fold(0.0f64, |a, e| a.max((e - e0).abs()));
    }
    Ok(rep)
}

/// Least-squares slope of the unwrapped angle series.
pub fn mean_angular_rate(times: &[f64], angles: &[f64]) -> Result<f64> {
    if times.len() != angles.len() || times.len() < 3 {
        return Err(Error::Domain("need at least three samples".into()));
    }
    let tau = std::f64::consts::TAU;
    let mut unwrapped = Vec::with_capacity(angles.len());
    let mut acc = angles[0];
    unwrapped.push(acc);
    for w in angles.windows(2) {
        let mut d = w[1] - w[0];
        d -= (d / tau).round() * tau;
        acc += d;
        unwrapped.push(acc);
    }
    let n = times.len() as f64;
    let (st, sa) = (times.iter().sum::<f64>(), unwrapped.iter().sum::<f64>());
    let stt = times.iter().map(|t| t * t).sum::<f64>();
    let sta = times.iter().zip(&unwrapped).map(|(t, a)| t * a).sum::<f64>();
    Ok((n * sta - st * sa) / (n * stt - st * st))
}

/// Inner perihelion precession rate and the span used, for the planar
/// configuration at the given `μ`; the span scales as `base_periods · 10⁻³/μ`.
pub fn secular_rate(base: &SystemConfig, mu: f64, base_periods: f64) -> Result<(f64, DriftReport)> {
    let mut cfg = base.clone();
    cfg.masses.mu = mu;
    cfg.span_periods = base_periods * 1e-3 / mu;
    let traj = integrate(&cfg)?;
    if let Some(r) = &traj.aborted {
        return Err(Error::Encounter(r.clone()));
    }
    let rep = track_elements(&traj, &cfg.masses)?;
    Ok((mean_angular_rate(&rep.times, &rep.varpi[0])?, rep))
}

/// First-order prediction of the inner precession rate, `μ m̄₁m̄₂a₁²/(4a₂³)·3/Λ₁`.
pub fn first_order_precession(cfg: &SystemConfig) -> Result<f64> {
    let p = &cfg.masses;
    let (big_m, m) = p.auxiliary(0)?;
    let lambda1 = m * (big_m * cfg.planets[0].a).sqrt();
    Ok(p.mu * p.mbar[0] * p.mbar[1] * cfg.planets[0].a.powi(2) / (4.0 * cfg.planets[1].a.powi(3)) * 3.0 / lambda1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kepler::kepler_energy;

    #[test]
    fn vis_viva_circular() {
        let s = CartesianState::from_vectors(
            V3::new(0.0, 1.0, 0.0),
            V3::new(0.0, 1e-31, 0.0),
            V3::new(1.0, 0.0, 0.0),
            V3::new(100.0, 0.0, 0.0),
        );
        let params = MassParameters::new(1.0, 0.0, vec![1.0, 1e-30]).unwrap();
        let h = hamiltonian_plt(&s, &params).unwrap();
        assert!((h + 0.5).abs() < 1e-12, "{h}");
    }

    #[test]
    fn decoupled_energy_is_keplerian() {
        let mut cfg = SystemConfig::planar(0.0, 1.0, 2.5, 0.1, 0.05, 1.0);
        cfg.masses.mbar = vec![0.7, 1.3];
        let s = cfg.initial_state().unwrap();
        let mut expect = 0.0;
        for i in 0..2 {
            let (big_m, m) = cfg.masses.auxiliary(i).unwrap();
            let lam = m * (big_m * cfg.planets[i].a).sqrt();
            expect += kepler_energy(lam, big_m, m).unwrap();
        }
        assert!((hamiltonian_plt(&s, &cfg.masses).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn collision_is_an_error() {
        let s = CartesianState::from_vectors(V3::x(), V3::y(), V3::x(), V3::x());
        let params = MassParameters::new(1.0, 1e-3, vec![1.0, 1.0]).unwrap();
        assert!(matches!(hamiltonian_plt(&s, &params), Err(Error::Encounter(_))));
    }

    #[test]
    fn kepler_drift_matches_analytic_orbit() {
        let orbit = KeplerOrbit { a: 1.3, e: 0.4, big_m: 1.1, m: 1.0, p_hat: V3::x(), q_hat: V3::y() };
        let (x0, y0) = orbit.state_at_mean(0.2).unwrap();
        let dt = 2.7;
        let (x1, v1) = kepler_drift(&x0, &y0, 1.1, dt).unwrap();
        let (xe, ye) = orbit.state_at_mean(0.2 + orbit.mean_motion() * dt).unwrap();
        assert!((x1 - xe).norm() < 1e-12 && (v1 - ye).norm() < 1e-12);
        let (xb, vb) = kepler_drift(&x1, &v1, 1.1, -dt).unwrap();
        assert!((xb - x0).norm() < 1e-12 && (vb - y0).norm() < 1e-12);
        assert!(kepler_drift(&V3::x(), &(V3::y() * 2.0), 1.0, 0.1).is_err());
    }

    #[test]
    fn scheme_weights_sum_to_one() {
        for s in [Scheme::Leapfrog, Scheme::Saba3, Scheme::Aba864] {
            let (a, b) = s.weights();
            assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert_eq!(a.len(), b.len() + 1);
        }
    }

    #[test]
    fn uncoupled_elements_constant() {
        let mut cfg = SystemConfig::planar(0.0, 1.0, 2.2, 0.1, 0.05, 50.0);
        cfg.samples = 51;
        let rep = track_elements(&integrate(&cfg).unwrap(), &cfg.masses).unwrap();
        for i in 0..2 {
            assert!(rep.max_big_lambda_drift[i] < 1e-10 && rep.max_e_drift[i] < 1e-10, "{rep:?}");
        }
    }

    #[test]
    fn reversible() {
        let cfg = SystemConfig::planar(1e-3, 1.0, 2.2, 0.05, 0.03, 20.0);
        let h = cfg.inner_period().unwrap() / 100.0;
        let s0 = cfg.initial_state().unwrap();
        let fwd = integrate_from(&s0, &cfg.masses, cfg.scheme, h, 2000, 2, 0.0).unwrap();
        let end = fwd.samples.last().unwrap().state;
        let back = integrate_from(&end, &cfg.masses, cfg.scheme, -h, 2000, 2, 0.0).unwrap();
        let s1 = back.samples.last().unwrap().state;
        let d = s0.to_array().iter().zip(s1.to_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn spatial_run_conserves_angular_momentum_and_planar_stays_planar() {
        let mut cfg = SystemConfig::planar(1e-3, 1.0, 2.4, 0.05, 0.04, 30.0);
        cfg.planets[1].inclination = 0.2;
        cfg.planets[1].node = 0.7;
        let rep = track_elements(&integrate(&cfg).unwrap(), &cfg.masses).unwrap();
        assert!(rep.angular_momentum_rel_error < 1e-12, "{}", rep.angular_momentum_rel_error);
        assert!(rep.mutual_inclination[0] > 0.19);
        let planar = SystemConfig::planar(1e-3, 1.0, 2.4, 0.05, 0.04, 30.0);
        let rep = track_elements(&integrate(&planar).unwrap(), &planar.masses).unwrap();
        assert_eq!(rep.max_out_of_plane, 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::planar(1e-3, 1.0, 1.5, 0.0, 0.0, 1.0).validate().is_err());
        assert!(SystemConfig::planar(1e-3, 1.0, 2.1, 0.5, 0.5, 1.0).validate().is_err());
        assert!(SystemConfig::planar(0.5, 1.0, 3.0, 0.0, 0.0, 1.0).validate().is_err());
        assert!(SystemConfig::planar(1e-3, 1.0, 3.0, 0.0, 0.0, 1.0).validate().is_ok());
    }

    #[test]
    fn encounter_aborts() {
        let mut cfg = SystemConfig::planar(1e-3, 1.0, 2.1, 0.0, 0.0, 2.0);
        cfg.encounter_factor = 1.5;
        let t = integrate(&cfg).unwrap();
        assert!(t.aborted.as_deref().unwrap().contains("close encounter"));
    }

    #[test]
    fn angular_rate_regression() {
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 0.1).collect();
        let a: Vec<f64> = t.iter().map(|t| crate::kepler::wrap_angle(0.8 * t + 0.3)).collect();
        assert!((mean_angular_rate(&t, &a).unwrap() - 0.8).abs() < 1e-12);
    }
}
