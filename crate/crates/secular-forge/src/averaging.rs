//! Two-step averaging over a single fast angle.
//!
//! `H = h(I) + P(I, φ; y)` with `⟨P⟩_φ = 0`. The first generator is
//! `ψ₁ = Σ_{k≠0} P_k e^{ikφ}/(ikω)` and the second-order normal term is
//! `P̄₂ = ½⟨{ψ₁, P}⟩_φ`, with `{I, φ} = 1` and `{q_j, p_j} = 1` on the slow pairs.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::Zero;
use rustfft::FftPlanner;

use crate::coeff::{Field, Q};
use crate::error::{Error, Result};
use crate::series::{cq, TruncatedSeries};

pub const ZERO_AVERAGE_TOL: f64 = 1e-10;

/// Result at one point `z = (I, q₁, p₁, …)`.
#[derive(Clone, Debug)]
pub struct TwoStepResult {
    pub normal: f64,
    /// `⟨P⟩_φ`, zero up to roundoff by assumption.
    pub p_av: f64,
    /// Fourier modes of `ψ₁`, index `k` at position `k mod N`.
    pub generator_modes: Vec<Complex64>,
    pub omega: f64,
}

struct Samples {
    p: Vec<f64>,
    modes: Vec<Complex64>,
}

fn sample<P: Fn(&[f64], f64) -> f64>(p: &P, z: &[f64], nodes: usize, planner: &mut FftPlanner<f64>) -> Samples {
    let vals: Vec<f64> = (0..nodes).map(|j| p(z, TAU * j as f64 / nodes as f64)).collect();
    let mut buf: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(nodes).process(&mut buf);
    for c in buf.iter_mut() {
        *c /= nodes as f64;
    }
    Samples { p: vals, modes: buf }
}

fn wavenumber(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

fn synthesize(modes: &[Complex64], planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let mut buf = modes.to_vec();
    planner.plan_fft_inverse(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

fn generator_modes(s: &Samples, omega: f64) -> Vec<Complex64> {
    let n = s.modes.len();
    (0..n)
        .map(|k| {
            let kk = wavenumber(k, n);
            if k == 0 || (n % 2 == 0 && k == n / 2) {
                Complex64::zero()
            } else {
                s.modes[k] / Complex64::new(0.0, kk * omega)
            }
        })
        .collect()
}

fn psi_samples(s: &Samples, omega: f64, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    synthesize(&generator_modes(s, omega), planner)
}

/// Fourth-order central difference of a vector-valued function.
fn gradient_samples<F: FnMut(&[f64]) -> Vec<f64>>(mut f: F, z: &[f64], m: usize) -> Vec<f64> {
    let h = 1e-3 * z[m].abs().max(1e-2);
    let mut at = |d: f64| {
        let mut w = z.to_vec();
        w[m] += d;
        f(&w)
    };
    let (p2, p1, m1, m2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
    (0..p1.len()).map(|j| (-p2[j] + 8.0 * p1[j] - 8.0 * m1[j] + m2[j]) / (12.0 * h)).collect()
}

/// `P̄₂` at `z`, optionally with an angle-independent `ψ̃` added to `ψ₁`.
pub fn two_step_average<W, P>(
    omega: W,
    p: P,
    z: &[f64],
    nodes: usize,
    extra: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<TwoStepResult>
where
    W: Fn(&[f64]) -> f64,
    P: Fn(&[f64], f64) -> f64,
{
    if z.is_empty() || z.len() % 2 == 0 {
        return Err(Error::Domain("z must be (I, q1, p1, ...)".into()));
    }
    if nodes < 8 {
        return Err(Error::Domain(format!("need at least 8 nodes, got {nodes}")));
    }
    let mut planner = FftPlanner::new();
    let w0 = omega(z);
    let base = sample(&p, z, nodes, &mut planner);
    let scale = base.p.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let p_av = base.modes[0].re;
    if p_av.abs() > ZERO_AVERAGE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!("perturbation average {p_av:e} is not zero")));
    }
    if !(w0.abs() > 1e-12 * scale.max(1.0)) {
        return Err(Error::Resonance { divisor: w0, monomial: [0; 6] });
    }
    if scale == 0.0 {
        return Ok(TwoStepResult { normal: 0.0, p_av, generator_modes: vec![Complex64::zero(); nodes], omega: w0 });
    }
    let psi_at = |w: &[f64], planner: &mut FftPlanner<f64>| -> Vec<f64> {
        let s = sample(&p, w, nodes, planner);
        let mut v = psi_samples(&s, omega(w), planner);
        if let Some(f) = extra {
            let c = f(w);
            v.iter_mut().for_each(|x| *x += c);
        }
        v
    };
    let dim = z.len();
    let mut dpsi = Vec::with_capacity(dim);
    let mut dp = Vec::with_capacity(dim);
    for m in 0..dim {
        dpsi.push(gradient_samples(|w| psi_at(w, &mut planner), z, m));
        dp.push(gradient_samples(|w| sample(&p, w, nodes, &mut planner).p, z, m));
    }
    // ∂φψ = (P − ⟨P⟩)/ω and ∂φP spectrally
    let dphi_psi: Vec<f64> = base.p.iter().map(|v| (v - p_av) / w0).collect();
    let dphi_modes: Vec<Complex64> = base
        .modes
        .iter()
        .enumerate()
        .map(|(k, c)| if nodes % 2 == 0 && k == nodes / 2 { Complex64::zero() } else { c * Complex64::new(0.0, wavenumber(k, nodes)) })
        .collect();
    let dphi_p = synthesize(&dphi_modes, &mut planner);
    let mut acc = 0.0;
    for j in 0..nodes {
        let mut b = dpsi[0][j] * dphi_p[j] - dphi_psi[j] * dp[0][j];
        for pair in 0..(dim - 1) / 2 {
            let (qi, pi) = (1 + 2 * pair, 2 + 2 * pair);
            b += dpsi[qi][j] * dp[pi][j] - dpsi[pi][j] * dp[qi][j];
        }
        acc += b;
    }
    Ok(TwoStepResult {
        normal: 0.5 * acc / nodes as f64,
        p_av,
        generator_modes: generator_modes(&base, w0),
        omega: w0,
    })
}

/// Value of `ψ₁` at `(z, φ)` from its modes.
pub fn generator_value(res: &TwoStepResult, phi: f64) -> f64 {
    let n = res.generator_modes.len();
    res.generator_modes
        .iter()
        .enumerate()
        .map(|(k, c)| (c * Complex64::from_polar(1.0, wavenumber(k, n) * phi)).re)
        .sum()
}

/// `Σ_k P_k e^{ikφ}` with series coefficients in the slow variables.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries<T: Field> {
    pub modes: BTreeMap<i32, TruncatedSeries<T>>,
}

/// Exact two-step average for a frequency independent of the slow variables
/// and of `I`: `P̄₂ = ½ Σ_{k≠0} {P_k, P_{−k}}/(ikω) + ½{ψ̃, P₀}`.
pub fn two_step_average_series<T: Field>(
    omega: &T,
    p: &FourierSeries<T>,
    extra: Option<&TruncatedSeries<T>>,
) -> Result<(TruncatedSeries<T>, FourierSeries<T>)> {
    let max = p.modes.values().map(|s| s.max_degree()).max().unwrap_or(0);
    let zero = TruncatedSeries::zero(max);
    let p0 = p.modes.get(&0).cloned().unwrap_or_else(|| zero.clone());
    if !p0.is_empty() {
        return Err(Error::Domain("perturbation has a nonzero angle average".into()));
    }
    let mut gen = FourierSeries { modes: BTreeMap::new() };
    for (&k, pk) in &p.modes {
        if k == 0 || pk.is_empty() {
            continue;
        }
        let d = omega.clone() * T::from_q(&Q::from_integer(k.into()));
        if d.is_zero() {
            return Err(Error::Resonance { divisor: 0.0, monomial: [0; 6] });
        }
        // 1/(ikω) = −i/(kω)
        let inv = num_complex::Complex::new(T::zero(), -(T::one() / d));
        gen.modes.insert(k, pk.scale(&inv));
    }
    if let Some(e) = extra {
        gen.modes.insert(0, e.clone());
    }
    let mut out = zero;
    for (&k, gk) in &gen.modes {
        if let Some(pm) = p.modes.get(&-k) {
            out = out.add(&gk.bracket(pm));
        }
    }
    Ok((out.scale(&cq(&crate::coeff::q(1, 2))), gen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, RatFunc};
    use num_complex::Complex;
    use num_traits::One;

    fn rich_p(z: &[f64], phi: f64) -> f64 {
        let (q, p) = (z[1], z[2]);
        (1.0 + q * q + 0.5 * p) * phi.cos() + 0.3 * q * p * (2.0 * phi).sin()
    }

    #[test]
    fn zero_perturbation() {
        let r = two_step_average(|z: &[f64]| z[0], |_: &[f64], _| 0.0, &[1.0], 16, None).unwrap();
        assert_eq!(r.normal, 0.0);
        assert!(r.generator_modes.iter().all(|c| c.is_zero()));
        let empty: FourierSeries<RatFunc> = FourierSeries { modes: BTreeMap::new() };
        let (n, g) = two_step_average_series(&RatFunc::one(), &empty, None).unwrap();
        assert!(n.is_empty() && g.modes.is_empty());
    }

    #[test]
    fn constant_amplitude_cosine() {
        // h = I²/2, P = f cos φ: P̄₂ = f² ω'/(4ω²)
        let f = 0.7;
        for i in [0.5, 1.0, 2.0] {
            let r = two_step_average(|z: &[f64]| z[0], |_: &[f64], phi| f * phi.cos(), &[i], 32, None).unwrap();
            let expect = f * f / (4.0 * i * i);
            assert!((r.normal - expect).abs() < 1e-10 * expect, "{} vs {}", r.normal, expect);
            assert!((generator_value(&r, 0.3) - f * 0.3f64.sin() / i).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_nonzero_average_and_zero_frequency() {
        assert!(two_step_average(|z: &[f64]| z[0], |_: &[f64], phi| 1.0 + phi.cos(), &[1.0], 16, None).is_err());
        let e = two_step_average(|_: &[f64]| 0.0, |_: &[f64], phi| phi.cos(), &[1.0], 16, None).unwrap_err();
        assert!(matches!(e, Error::Resonance { .. }));
    }

    fn flow_average(z: &[f64; 3], eps: f64, nodes: usize) -> f64 {
        // ψ = A sin φ/I − B cos 2φ/(2I) with A = 1 + q² + p/2, B = 0.3 q p
        let field = |s: &[f64; 4]| -> [f64; 4] {
            let (i, phi, q, p) = (s[0], s[1], s[2], s[3]);
            let a = 1.0 + q * q + 0.5 * p;
            let b = 0.3 * q * p;
            let psi = a * phi.sin() / i - b * (2.0 * phi).cos() / (2.0 * i);
            let d_i = -psi / i;
            let d_phi = (a * phi.cos() + b * (2.0 * phi).sin()) / i;
            let d_q = 2.0 * q * phi.sin() / i - 0.3 * p * (2.0 * phi).cos() / (2.0 * i);
            let d_p = 0.5 * phi.sin() / i - 0.3 * q * (2.0 * phi).cos() / (2.0 * i);
            // İ = −∂φψ, φ̇ = ∂Iψ, q̇ = −∂pψ, ṗ = ∂qψ, scaled by ε
            [-eps * d_phi, eps * d_i, -eps * d_p, eps * d_q]
        };
        let mut acc = 0.0;
        for j in 0..nodes {
            let mut s = [z[0], TAU * j as f64 / nodes as f64, z[1], z[2]];
            let steps = 40;
            let h = 1.0 / steps as f64;
            for _ in 0..steps {
                let add = |a: &[f64; 4], b: &[f64; 4], c: f64| std::array::from_fn::<f64, 4, _>(|k| a[k] + c * b[k]);
                let k1 = field(&s);
                let k2 = field(&add(&s, &k1, h / 2.0));
                let k3 = field(&add(&s, &k2, h / 2.0));
                let k4 = field(&add(&s, &k3, h));
                for k in 0..4 {
                    s[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
                }
            }
            let hz = 0.5 * s[0] * s[0] + eps * rich_p(&[s[0], s[2], s[3]], s[1]);
            acc += hz - 0.5 * z[0] * z[0];
        }
        acc / nodes as f64
    }

    #[test]
    fn composition_oracle() {
        let z = [1.3, 0.4, -0.2];
        let r = two_step_average(|w: &[f64]| w[0], rich_p, &z, 64, None).unwrap();
        let f = |e: f64| flow_average(&z, e, 64) / (e * e);
        let e = 0.02;
        let c2 = (8.0 * f(e / 4.0) - 6.0 * f(e / 2.0) + f(e)) / 3.0;
        assert!((c2 - r.normal).abs() < 1e-6 * r.normal.abs(), "flow {c2} vs lemma {}", r.normal);
    }

    #[test]
    fn dipole_second_order_term() {
        let (big_m2, m2, r1, r2) = (1.2, 0.8, 0.3, 2.0);
        // z = (Φ₂, Θ, ϑ)
        let omega = |z: &[f64]| z[0] / (m2 * r2 * r2);
        let p = |z: &[f64], phi: f64| -big_m2 * m2 * r1 / (r2 * r2) * (1.0 - (z[1] / z[0]).powi(2)).sqrt() * phi.sin();
        for (phi2, theta) in [(1.1, 0.4), (0.9, -0.6), (1.5, 0.0)] {
            let r = two_step_average(omega, p, &[phi2, theta, 0.2], 32, None).unwrap();
            let expect = -(big_m2 * big_m2 * m2.powi(3) / 4.0) * (r1 * r1 / (r2 * r2 * phi2.powi(4)))
                * (3.0 * theta * theta - phi2 * phi2);
            assert!((r.normal - expect).abs() < 1e-9 * expect.abs(), "{} vs {}", r.normal, expect);
            // ψ₀ = M₂m₂² r₁/Φ₂ · sqrt(1 − Θ²/Φ₂²) cos φ₂, free of r₂
            let psi0 = big_m2 * m2 * m2 * r1 / phi2 * (1.0 - (theta / phi2).powi(2)).sqrt() * 0.7f64.cos();
            assert!((generator_value(&r, 0.7) - psi0).abs() < 1e-13);
        }
    }

    #[test]
    fn angle_independent_generator_shift() {
        let z = [1.3, 0.4, -0.2];
        let base = two_step_average(|w: &[f64]| w[0], rich_p, &z, 64, None).unwrap();
        let tilde = |w: &[f64]| w[0].powi(3) + w[1] * w[2] * w[2] + w[1].sin();
        let shifted = two_step_average(|w: &[f64]| w[0], rich_p, &z, 64, Some(&tilde)).unwrap();
        assert!((base.normal - shifted.normal).abs() < 1e-9 * base.normal.abs());
    }

    #[test]
    fn exact_shift_invariance() {
        // P = v e^{iφ} + v★ e^{−iφ} times slow series, ω = 3
        type S = TruncatedSeries<RatFunc>;
        let one = Complex::new(RatFunc::one(), RatFunc::zero());
        let mut modes = BTreeMap::new();
        modes.insert(1, S::variable(4, 6).add(&S::monomial([1, 1, 0, 0, 1, 0], one.clone(), 6)));
        modes.insert(-1, S::variable(5, 6).add(&S::monomial([1, 1, 0, 0, 0, 1], one.clone(), 6)));
        let p = FourierSeries { modes };
        let w = RatFunc::from_q(&q(3, 1));
        let (n0, _) = two_step_average_series(&w, &p, None).unwrap();
        let tilde = S::action(0, 6).pow(2).add(&S::monomial([0, 0, 3, 1, 0, 0], one, 6));
        let (n1, g1) = two_step_average_series(&w, &p, Some(&tilde)).unwrap();
        assert_eq!(n0, n1);
        assert!(!n0.is_empty());
        assert!(g1.modes.contains_key(&0));
    }
}
