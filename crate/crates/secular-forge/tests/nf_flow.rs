//! The normal form's frequency correction measured on the real flow of a
//! two-mode model `H = Ω₁t₁ + Ω_v t₃ + c X`.

use num_complex::{Complex, Complex64};
use secular_forge::nf::{birkhoff_normalize, NormalizeOptions};
use secular_forge::series::TruncatedSeries;

const OMEGA1: f64 = 1.0;
const OMEGAV: f64 = -0.7;

// z = (η₁, ξ₁, p, q); X = −½ Re[(η₁+iξ₁)²(p−iq)²]
fn grad(z: &[f64; 4], c: f64) -> [f64; 4] {
    let w = Complex64::new(z[0], z[1]);
    let v = Complex64::new(z[2], -z[3]);
    let (a, b) = (w * w, v * v);
    let i = Complex64::new(0.0, 1.0);
    let gx = [
        -(2.0 * w * b).re,
        -(2.0 * i * w * b).re,
        -(a * 2.0 * v).re,
        -(a * (-2.0) * i * v).re,
    ];
    [
        OMEGA1 * z[0] + 0.5 * c * gx[0],
        OMEGA1 * z[1] + 0.5 * c * gx[1],
        OMEGAV * z[2] + 0.5 * c * gx[2],
        OMEGAV * z[3] + 0.5 * c * gx[3],
    ]
}

// {η, ξ} = 1: η̇ = ∂H/∂ξ, ξ̇ = −∂H/∂η
fn field(z: &[f64; 4], c: f64) -> [f64; 4] {
    let g = grad(z, c);
    [g[1], -g[0], g[3], -g[2]]
}

fn rk4(z: &mut [f64; 4], h: f64, c: f64) {
    let add = |a: &[f64; 4], b: &[f64; 4], s: f64| std::array::from_fn::<f64, 4, _>(|k| a[k] + s * b[k]);
    let k1 = field(z, c);
    let k2 = field(&add(z, &k1, h / 2.0), c);
    let k3 = field(&add(z, &k2, h / 2.0), c);
    let k4 = field(&add(z, &k3, h), c);
    for k in 0..4 {
        z[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
}

/// Mean rate of `arg(η₁ − iξ₁)` by least squares on the unwrapped phase.
fn measured_rate(z0: [f64; 4], c: f64, t_end: f64, h: f64) -> f64 {
    let mut z = z0;
    let n = (t_end / h) as usize;
    let (mut prev, mut unwrapped) = (Complex::new(z[0], -z[1]).arg(), 0.0);
    let (mut st, mut sp, mut stt, mut stp) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..=n {
        let t = k as f64 * h;
        let ph = Complex::new(z[0], -z[1]).arg();
        let mut d = ph - prev;
        d -= (d / std::f64::consts::TAU).round() * std::f64::consts::TAU;
        unwrapped += d;
        prev = ph;
        st += t;
        sp += unwrapped;
        stt += t * t;
        stp += t * unwrapped;
        rk4(&mut z, h, c);
    }
    let m = (n + 1) as f64;
    (m * stp - st * sp) / (m * stt - st * st)
}

#[test]
fn cubic_sign_matches_flow() {
    let c = 1.0;
    let mut h: TruncatedSeries<f64> = TruncatedSeries::action(0, 6)
        .scale(&Complex::new(OMEGA1, 0.0))
        .add(&TruncatedSeries::action(2, 6).scale(&Complex::new(OMEGAV, 0.0)));
    h.add_term([0, 2, 0, 0, 2, 0], Complex::new(c, 0.0));
    h.add_term([2, 0, 0, 0, 0, 2], Complex::new(c, 0.0));
    let nf = birkhoff_normalize(&h, &NormalizeOptions::default()).unwrap();
    let d = OMEGA1 - OMEGAV;
    // normal form: Ω₁t₁ + Ω_v t₃ + (2c²/D)(t₁²t₃ − t₁t₃²)
    assert!((nf.normal_part.coeff(&[2, 0, 1]) - 2.0 * c * c / d).abs() < 1e-12);
    assert!((nf.normal_part.coeff(&[1, 0, 2]) + 2.0 * c * c / d).abs() < 1e-12);

    let s: f64 = 0.01;
    let z0 = [(2.0 * s).sqrt(), 0.0, 0.3 * (2.0 * s).sqrt(), (0.91 * 2.0 * s).sqrt()];
    let t1 = 0.5 * (z0[0] * z0[0] + z0[1] * z0[1]);
    let t3 = 0.5 * (z0[2] * z0[2] + z0[3] * z0[3]);
    let predicted = nf.normal_part.derivative(0).eval([t1, 0.0, t3], [0.0, 0.0]) - OMEGA1;
    let measured = measured_rate(z0, c, 3000.0, 0.02) - OMEGA1;
    eprintln!("frequency shift: measured {measured:e}, predicted {predicted:e}");
    assert!(predicted.abs() > 1e-5);
    assert!(
        (measured - predicted).abs() < 0.05 * predicted.abs(),
        "measured shift {measured:e}, normal form predicts {predicted:e}"
    );
    // the opposite sign of the cross-term pickup would predict −predicted
    assert!((measured + predicted).abs() > predicted.abs());
}
