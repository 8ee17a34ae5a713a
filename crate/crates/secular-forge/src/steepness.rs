//! Three-jet conditions for the rescaled planar and spatial systems.

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_REFINE_TOL: f64 = 1e-6;
pub const FLAG_TOL: f64 = 1e-8;

/// Gradient, Hessian and symmetric third-derivative tensor at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeJetSystem {
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
    pub third: Vec<Vec<Vec<f64>>>,
}

impl ThreeJetSystem {
    pub fn zeros(n: usize) -> Self {
        Self { grad: vec![0.0; n], hess: vec![vec![0.0; n]; n], third: vec![vec![vec![0.0; n]; n]; n] }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// Adds `c η_i η_j` to the quadratic form, split symmetrically.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) {
        if i == j {
            self.hess[i][i] += c;
        } else {
            self.hess[i][j] += c / 2.0;
            self.hess[j][i] += c / 2.0;
        }
    }

    /// Adds `c η_i η_j η_k` to the cubic form, spread over all index orders.
    pub fn add_cubic(&mut self, idx: [usize; 3], c: f64) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut distinct: Vec<[usize; 3]> = perms.iter().map(|p| [idx[p[0]], idx[p[1]], idx[p[2]]]).collect();
        distinct.sort();
        distinct.dedup();
        let w = c / distinct.len() as f64;
        for [a, b, d] in distinct {
            self.third[a][b][d] += w;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.hess.len() != n || self.third.len() != n {
            return Err(Error::Domain("jet dimensions disagree".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if (self.hess[i][j] - self.hess[j][i]).abs() > 1e-14 * self.scale() {
                    return Err(Error::Domain("Hessian not symmetric".into()));
                }
                for k in 0..n {
                    let t = self.third[i][j][k];
                    for u in [self.third[j][i][k], self.third[k][j][i], self.third[i][k][j]] {
                        if (t - u).abs() > 1e-14 * self.scale() {
                            return Err(Error::Domain("third derivative not symmetric".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        let g = self.grad.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let h = self.hess.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        let t = self.third.iter().flatten().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        g.max(h).max(t)
    }

    /// `(Σ g_j η_j, Σ H_jk η_j η_k, Σ T_jkh η_j η_k η_h)`.
    pub fn components(&self, eta: &[f64]) -> [f64; 3] {
        let n = self.dim();
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for i in 0..n {
            a += self.grad[i] * eta[i];
            for j in 0..n {
                b += self.hess[i][j] * eta[i] * eta[j];
                for k in 0..n {
                    c += self.third[i][j][k] * eta[i] * eta[j] * eta[k];
                }
            }
        }
        [a, b, c]
    }

    /// Jet in rotated coordinates `η = Q ζ`.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        let n = self.dim();
        let mut out = Self::zeros(n);
        for a in 0..n {
            for i in 0..n {
                out.grad[a] += self.grad[i] * q[(i, a)];
            }
            for b in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        out.hess[a][b] += self.hess[i][j] * q[(i, a)] * q[(j, b)];
                    }
                }
                for c in 0..n {
                    let mut s = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                s += self.third[i][j][k] * q[(i, a)] * q[(j, b)] * q[(k, c)];
                            }
                        }
                    }
                    out.third[a][b][c] = s;
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grad: self.grad.iter().map(|v| v * s).collect(),
            hess: self.hess.iter().map(|r| r.iter().map(|v| v * s).collect()).collect(),
            third: self.third.iter().map(|m| m.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()).collect(),
        }
    }
}

/// Which equations enter the residual: 2 for quasi-convexity, 3 for the three-jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOrder {
    QuasiConvex,
    ThreeJet,
}

/// Euclidean norm of the equations at unit `η`.
pub fn three_jet_residual(jet: &ThreeJetSystem, eta: &[f64]) -> Result<f64> {
    residual_upto(jet, eta, JetOrder::ThreeJet)
}

pub fn residual_upto(jet: &ThreeJetSystem, eta: &[f64], order: JetOrder) -> Result<f64> {
    let norm = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if eta.len() != jet.dim() || norm == 0.0 || !norm.is_finite() {
        return Err(Error::Domain("direction must be a nonzero vector of the jet dimension".into()));
    }
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("direction not unit (|eta| = {norm})")));
    }
    let c = jet.components(eta);
    Ok(match order {
        JetOrder::QuasiConvex => (c[0] * c[0] + c[1] * c[1]).sqrt(),
        JetOrder::ThreeJet => (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt(),
    })
}

fn normalized(x: &[f64]) -> Vec<f64> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter().map(|v| v / n).collect()
}

/// Quasi-uniform points on `S^{n−1}`: Fibonacci lattice for `n = 3`, the
/// super-Fibonacci spiral for `n = 4`, equispaced for `n = 2`.
pub fn sphere_grid(n: usize, points: usize) -> Result<Vec<Vec<f64>>> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let tau = std::f64::consts::TAU;
    match n {
        2 => Ok((0..points).map(|i| {
            let t = std::f64::consts::PI * i as f64 / points as f64;
            vec![t.cos(), t.sin()]
        }).collect()),
        3 => Ok((0..points)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / points as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = tau * i as f64 / golden;
                vec![r * phi.cos(), r * phi.sin(), z]
            })
            .collect()),
        4 => {
            let psi = 1.533_751_168_755_204_3;
            Ok((0..points)
                .map(|i| {
                    let s = i as f64 + 0.5;
                    let r = (s / points as f64).sqrt();
                    let big_r = (1.0 - s / points as f64).sqrt();
                    let a = tau * s / 2f64.sqrt();
                    let b = tau * s / psi;
                    vec![r * a.sin(), r * a.cos(), big_r * b.sin(), big_r * b.cos()]
                })
                .collect())
        }
        _ => Err(Error::Domain(format!("sphere search supports n in {{2,3,4}}, got {n}"))),
    }
}

pub fn default_grid_points(n: usize) -> usize {
    match n {
        2 => 2_000,
        3 => 10_000,
        _ => 100_000,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Verdict {
    OnlyTrivial { min_residual: f64, argmin: Vec<f64> },
    CandidateSolution { eta: Vec<f64>, residual: f64 },
}

impl Verdict {
    pub fn is_only_trivial(&self) -> bool {
        matches!(self, Verdict::OnlyTrivial { .. })
    }

    pub fn min_residual(&self) -> f64 {
        match self {
            Verdict::OnlyTrivial { min_residual, .. } => *min_residual,
            Verdict::CandidateSolution { residual, .. } => *residual,
        }
    }

    pub fn direction(&self) -> &[f64] {
        match self {
            Verdict::OnlyTrivial { argmin, .. } => argmin,
            Verdict::CandidateSolution { eta, .. } => eta,
        }
    }

    pub fn label(&self) -> &'static str {
        if self.is_only_trivial() {
            "only_trivial"
        } else {
            "candidate_solution"
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub grid_points: Option<usize>,
    /// Relative to [`ThreeJetSystem::scale`].
    pub refine_tol: f64,
    pub refine_starts: usize,
    pub order: JetOrder,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { grid_points: None, refine_tol: DEFAULT_REFINE_TOL, refine_starts: 8, order: JetOrder::ThreeJet }
    }
}

struct SphereCost<'a> {
    jet: &'a ThreeJetSystem,
    order: JetOrder,
}

impl CostFunction for SphereCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1e-8 {
            return Ok(f64::INFINITY);
        }
        let eta = normalized(x);
        Ok(residual_upto(self.jet, &eta, self.order).unwrap_or(f64::INFINITY))
    }
}

fn refine(jet: &ThreeJetSystem, start: &[f64], order: JetOrder) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex = vec![start.to_vec()];
    for k in 0..n {
        let mut v = start.to_vec();
        v[k] += 0.05;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-15).expect("valid tolerance");
    let cost = SphereCost { jet, order };
    let fallback = (start.to_vec(), residual_upto(jet, start, order).unwrap_or(f64::INFINITY));
    match Executor::new(cost, solver).configure(|s| s.max_iters(2_000)).run() {
        Ok(res) => {
            let st = res.state();
            match &st.best_param {
                Some(p) if st.best_cost < fallback.1 => (normalized(p), st.best_cost),
                _ => fallback,
            }
        }
        Err(_) => fallback,
    }
}

/// Minimizes the residual over the unit sphere: grid scan, then Nelder–Mead
/// from the best grid points.
pub fn check_three_jet(jet: &ThreeJetSystem, opts: &SearchOptions) -> Result<Verdict> {
    let n = jet.dim();
    let grid = sphere_grid(n, opts.grid_points.unwrap_or_else(|| default_grid_points(n)))?;
    let mut scored: Vec<(f64, usize)> = grid
        .iter()
        .enumerate()
        .map(|(i, eta)| (residual_upto(jet, eta, opts.order).unwrap_or(f64::INFINITY), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = (grid[scored[0].1].clone(), scored[0].0);
    for &(_, i) in scored.iter().take(opts.refine_starts.max(1)) {
        let (eta, r) = refine(jet, &grid[i], opts.order);
        if r < best.1 {
            best = (eta, r);
        }
    }
    let tol = opts.refine_tol * jet.scale();
    Ok(if best.1 > tol {
        Verdict::OnlyTrivial { min_residual: best.1, argmin: best.0 }
    } else {
        Verdict::CandidateSolution { eta: best.0, residual: best.1 }
    })
}

/// Parameters of the rescaled system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RescaledParams {
    pub alpha_star: f64,
    pub eps1: f64,
    pub mu: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub mbar: [f64; 3],
    /// `â₁/â₂`.
    pub a_ratio: f64,
}

impl RescaledParams {
    /// `β₂ = α★^{−3/2}`, `β₃ = μ⁻¹α★⁻³ε₁⁻²`.
    pub fn with_choices(alpha_star: f64, eps1: f64, mu: f64, mbar: [f64; 3], a_ratio: f64) -> Result<Self> {
        let p = Self {
            alpha_star,
            eps1,
            mu,
            beta2: alpha_star.powf(-1.5),
            beta3: 1.0 / (mu * alpha_star.powi(3) * eps1 * eps1),
            mbar,
            a_ratio,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_star > 0.0 && self.alpha_star < 1.0) {
            return Err(Error::Domain(format!("alpha_star = {} outside (0,1)", self.alpha_star)));
        }
        if !(self.eps1 > 0.0 && self.mu > 0.0 && self.a_ratio > 0.0) {
            return Err(Error::Domain("eps1, mu and a_ratio must be positive".into()));
        }
        if self.mbar.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Domain("masses must be positive".into()));
        }
        Ok(())
    }

    pub fn m1_over_m2(&self) -> f64 {
        self.mbar[1] / self.mbar[2]
    }
    pub fn m2_over_m0(&self) -> f64 {
        self.mbar[2] / self.mbar[0]
    }
    pub fn m1_over_m0(&self) -> f64 {
        self.mbar[1] / self.mbar[0]
    }

    /// Draw in `α★ < 0.1`, `ε₁ < 0.1`, `μ < 10⁻³`, `â₁/â₂ ∈ [0.5, 1]`, planet
    /// masses in `[0.5, 2]` relative to the star.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Result<Self> {
        let alpha = rng.gen_range(1e-3..0.1);
        let eps = rng.gen_range(1e-3..0.1);
        let mu = 10f64.powf(rng.gen_range(-6.0..-3.0));
        let mbar = [1.0, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
        Self::with_choices(alpha, eps, mu, mbar, rng.gen_range(0.5..1.0))
    }
}

/// Three equations of the rescaled planar system in `(η₁, η₂, η₃)`.
pub fn planar_jet(p: &RescaledParams) -> ThreeJetSystem {
    let (a, e, mu, rho) = (p.alpha_star, p.eps1, p.mu, p.a_ratio);
    let mut j = ThreeJetSystem::zeros(3);
    j.grad = vec![
        1.0,
        p.beta2 * a.powf(1.5) * rho.powf(1.5),
        p.beta3 * a.powi(3) * e * e * mu * 0.75 * p.m2_over_m0() * rho.powi(3),
    ];
    j.add_quadratic(0, 0, 1.0);
    j.add_quadratic(1, 1, p.m1_over_m2() * p.beta2 * a * a * rho * rho);
    j.add_quadratic(2, 2, -p.beta3 * a.powi(3) * mu * e.powi(4) * 0.25 * p.m2_over_m0() * rho.powi(3));
    j.add_cubic([0, 0, 0], 1.0);
    j.add_cubic([1, 1, 1], p.m1_over_m2().powi(2) * p.beta2 * a.powf(2.5) * rho.powf(2.5));
    j.add_cubic([2, 2, 2], p.beta3 * a.powf(3.5) * mu * e.powi(6) * 9.0 / 16.0 * p.m1_over_m0() * rho.powf(3.5));
    j
}

/// Four-variable spatial system; the `η₃³` entry carries one `ε₁⁶` factor.
pub fn spatial_jet(p: &RescaledParams) -> ThreeJetSystem {
    let planar = planar_jet(p);
    let (a, e, mu, rho) = (p.alpha_star, p.eps1, p.mu, p.a_ratio);
    let k = |pow: i32| p.beta3 * e.powi(pow) * a.powi(3) * mu * p.m2_over_m0() * rho.powi(3);
    let mut j = ThreeJetSystem::zeros(4);
    for i in 0..3 {
        j.grad[i] = planar.grad[i];
        for l in 0..3 {
            j.hess[i][l] = planar.hess[i][l];
            for m in 0..3 {
                j.third[i][l][m] = planar.third[i][l][m];
            }
        }
    }
    j.grad[3] = 1.5 * k(2);
    j.add_quadratic(2, 3, 1.5 * k(4));
    j.add_quadratic(3, 3, 2.0 * k(4));
    j.add_cubic([2, 2, 3], 70.0 / 64.0 * k(6));
    j.add_cubic([2, 3, 3], 105.0 / 32.0 * k(6));
    j.add_cubic([3, 3, 3], 105.0 / 16.0 * k(6));
    j
}

/// Sylvester resultant of `Σ a_i x^{2−i} y^i` and `Σ c_i x^{3−i} y^i`,
/// normalized by `‖a‖³‖c‖²`.
pub fn binary_resultant(a: [f64; 3], c: [f64; 4]) -> f64 {
    let mut m = DMatrix::<f64>::zeros(5, 5);
    for r in 0..3 {
        for (k, v) in c.iter().enumerate() {
            if r < 2 {
                m[(r, r + k)] = *v;
            }
        }
        for (k, v) in a.iter().enumerate() {
            m[(2 + r, r + k)] = *v;
        }
    }
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nc = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    m.determinant() / (na.powi(3) * nc.powi(2))
}

/// Eliminates `η₁ = −(g₂η₂ + g₃η₃)/g₁` from the diagonal planar system and
/// returns the normalized resultant of the remaining quadratic and cubic.
pub fn planar_resultant(jet: &ThreeJetSystem) -> Result<f64> {
    if jet.dim() != 3 || jet.grad[0] == 0.0 {
        return Err(Error::Domain("planar elimination needs a 3-jet with g1 != 0".into()));
    }
    let (b, c) = (-jet.grad[1] / jet.grad[0], -jet.grad[2] / jet.grad[0]);
    // η₁ = bη₂ + cη₃
    let h = &jet.hess;
    let quad = [
        h[0][0] * b * b + 2.0 * h[0][1] * b + h[1][1],
        2.0 * (h[0][0] * b * c + h[0][1] * c + h[0][2] * b + h[1][2]),
        h[0][0] * c * c + 2.0 * h[0][2] * c + h[2][2],
    ];
    // cubic: evaluate on four points and solve for the binary-form coefficients
    let pts: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)];
    let mut m = DMatrix::<f64>::zeros(4, 4);
    let mut rhs = DVector::<f64>::zeros(4);
    for (r, &(x, y)) in pts.iter().enumerate() {
        for k in 0..4 {
            m[(r, k)] = x.powi(3 - k as i32) * y.powi(k as i32);
        }
        rhs[r] = jet.components(&[b * x + c * y, x, y])[2];
    }
    let sol = m.lu().solve(&rhs).ok_or_else(|| Error::Domain("singular interpolation".into()))?;
    Ok(binary_resultant(quad, [sol[0], sol[1], sol[2], sol[3]]))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub draw: usize,
    pub alpha_star: f64,
    pub eps1: f64,
    pub mu: f64,
    pub m1_over_m2: f64,
    pub m2_over_m0: f64,
    pub a_ratio: f64,
    pub min_residual: f64,
    pub relative_residual: f64,
    pub argmin: String,
    pub verdict: String,
    pub resultant: Option<f64>,
    /// Residual below [`FLAG_TOL`] relative to the jet scale.
    pub flagged: bool,
}

/// Per-draw search over parameters drawn from `seed + draw`.
pub fn sweep(spatial: bool, draws: usize, seed: u64, opts: &SearchOptions) -> Result<Vec<SweepRow>> {
    (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(d as u64));
            let p = RescaledParams::sample(&mut rng)?;
            let jet = if spatial { spatial_jet(&p) } else { planar_jet(&p) };
            let v = check_three_jet(&jet, opts)?;
            let resultant = if spatial { None } else { Some(planar_resultant(&jet)?) };
            let rel = v.min_residual() / jet.scale();
            Ok(SweepRow {
                draw: d,
                alpha_star: p.alpha_star,
                eps1: p.eps1,
                mu: p.mu,
                m1_over_m2: p.m1_over_m2(),
                m2_over_m0: p.m2_over_m0(),
                a_ratio: p.a_ratio,
                min_residual: v.min_residual(),
                relative_residual: rel,
                argmin: v.direction().iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" "),
                verdict: v.label().into(),
                resultant,
                flagged: rel < FLAG_TOL,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_jet(g: &[f64], h: &[f64], t: &[f64]) -> ThreeJetSystem {
        let mut j = ThreeJetSystem::zeros(g.len());
        j.grad = g.to_vec();
        for i in 0..g.len() {
            j.hess[i][i] = h[i];
            j.third[i][i][i] = t[i];
        }
        j
    }

    fn draw(seed: u64) -> RescaledParams {
        RescaledParams::sample(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn convex_quadratic_has_only_trivial_solution() {
        // H₀ = ΣI² at I = (1,1,1)
        let j = diag_jet(&[2.0; 3], &[2.0; 3], &[0.0; 3]);
        let v = check_three_jet(&j, &SearchOptions::default()).unwrap();
        assert!(v.is_only_trivial());
        assert!(v.min_residual() >= 2.0 - 1e-9);
    }

    #[test]
    fn linear_function_fails() {
        let j = diag_jet(&[1.0, 2.0, 0.5], &[0.0; 3], &[0.0; 3]);
        let v = check_three_jet(&j, &SearchOptions::default()).unwrap();
        assert!(!v.is_only_trivial());
        let eta = normalized(&[2.0, -1.0, 0.0]);
        assert!(three_jet_residual(&j, &eta).unwrap() < 1e-15);
    }

    #[test]
    fn indefinite_example_has_candidate() {
        // H₀ = I₁ + I₂² − I₃²
        let j = diag_jet(&[1.0, 0.0, 0.0], &[2.0, 2.0, -2.0], &[0.0; 3]);
        assert!((three_jet_residual(&j, &[0.0, 0.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        let s = 0.5f64.sqrt();
        assert!(three_jet_residual(&j, &[0.0, s, s]).unwrap() < 1e-15);
        let v = check_three_jet(&j, &SearchOptions::default()).unwrap();
        assert!(!v.is_only_trivial());
        let d = v.direction();
        assert!(d[0].abs() < 1e-6 && (d[1].abs() - d[2].abs()).abs() < 1e-6);
    }

    #[test]
    fn kepler_energy_is_quasi_convex() {
        // h = −1/(2Λ₁²) − 1/(2Λ₂²) at Λ = (1, 1.7)
        let l = [1.0f64, 1.7];
        let j = diag_jet(&[l[0].powi(-3), l[1].powi(-3)], &[-3.0 * l[0].powi(-4), -3.0 * l[1].powi(-4)], &[0.0; 2]);
        let opts = SearchOptions { order: JetOrder::QuasiConvex, ..Default::default() };
        assert!(check_three_jet(&j, &opts).unwrap().is_only_trivial());
    }

    #[test]
    fn rejects_bad_directions() {
        let j = ThreeJetSystem::zeros(3);
        assert!(three_jet_residual(&j, &[0.0, 0.0, 0.0]).is_err());
        assert!(three_jet_residual(&j, &[1.0, 1.0, 0.0]).is_err());
        assert!(sphere_grid(5, 10).is_err());
    }

    #[test]
    fn grids_are_unit() {
        for n in [2, 3, 4] {
            for p in sphere_grid(n, 500).unwrap() {
                assert!((p.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn planar_draws_only_trivial_with_nonzero_resultant() {
        for s in 0..20 {
            let p = draw(s);
            let j = planar_jet(&p);
            j.validate().unwrap();
            let v = check_three_jet(&j, &SearchOptions::default()).unwrap();
            assert!(v.is_only_trivial(), "draw {s}: {v:?}");
            assert!(planar_resultant(&j).unwrap().abs() > 1e-12, "draw {s}");
        }
    }

    #[test]
    fn choices_normalize_leading_factors() {
        let p = draw(3);
        let j = planar_jet(&p);
        assert!((j.grad[1] - p.a_ratio.powf(1.5)).abs() < 1e-12);
        assert!((j.grad[2] - 0.75 * p.m2_over_m0() * p.a_ratio.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_third_equation_gives_candidates() {
        // drop the μ-dependent entries: η = (−ρ^{3/2}, 1, 0)/norm-type directions remain
        let p = draw(5);
        let mut j = planar_jet(&p);
        j.grad[2] = 0.0;
        j.hess[2][2] = 0.0;
        j.third[2][2][2] = 0.0;
        let v = check_three_jet(&j, &SearchOptions::default()).unwrap();
        assert!(!v.is_only_trivial());
        assert!(three_jet_residual(&j, &[0.0, 0.0, 1.0]).unwrap() == 0.0);
    }

    #[test]
    fn homogeneity_and_scaling() {
        let p = draw(9);
        let j = planar_jet(&p);
        let eta = normalized(&[0.3, -0.5, 0.8]);
        let c1 = j.components(&eta);
        let c2 = j.components(&eta.iter().map(|v| 2.0 * v).collect::<Vec<_>>());
        for k in 0..3 {
            assert!((c2[k] - 2f64.powi(k as i32 + 1) * c1[k]).abs() < 1e-13);
        }
        let v1 = check_three_jet(&j, &SearchOptions::default()).unwrap();
        let v2 = check_three_jet(&j.scaled(37.0), &SearchOptions::default()).unwrap();
        assert_eq!(v1.is_only_trivial(), v2.is_only_trivial());
    }

    #[test]
    fn rotation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cases = [planar_jet(&draw(1)), diag_jet(&[1.0, 0.0, 0.0], &[2.0, 2.0, -2.0], &[0.0; 3])];
        for _ in 0..10 {
            let m = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let q = m.qr().q();
            for j in &cases {
                let a = check_three_jet(j, &SearchOptions::default()).unwrap();
                let b = check_three_jet(&j.rotated(&q), &SearchOptions::default()).unwrap();
                assert_eq!(a.is_only_trivial(), b.is_only_trivial());
            }
        }
    }

    #[test]
    fn spatial_slice_is_planar() {
        let p = draw(4);
        let (pl, sp) = (planar_jet(&p), spatial_jet(&p));
        sp.validate().unwrap();
        for eta in sphere_grid(3, 50).unwrap() {
            let mut e4 = eta.clone();
            e4.push(0.0);
            assert_eq!(pl.components(&eta), sp.components(&e4));
        }
        // η₄ coefficients as listed
        let k = p.beta3 * p.eps1.powi(2) * p.alpha_star.powi(3) * p.mu * p.m2_over_m0() * p.a_ratio.powi(3);
        assert!((sp.grad[3] - 1.5 * k).abs() < 1e-12 * k);
        let c = sp.components(&[0.0, 0.0, 0.0, 1.0]);
        let k6 = k * p.eps1.powi(4);
        assert!((c[2] - 105.0 / 16.0 * k6).abs() < 1e-12 * k6);
    }

    #[test]
    fn resultant_detects_common_root() {
        // (x − y)(x + 2y) and (x − y)(x² + y²) share x = y
        assert!(binary_resultant([1.0, 1.0, -2.0], [1.0, -1.0, 1.0, -1.0]).abs() < 1e-14);
        assert!(binary_resultant([1.0, 0.0, 1.0], [1.0, 0.0, 0.0, 2.0]).abs() > 1e-3);
    }

    #[test]
    fn sweep_is_deterministic() {
        let opts = SearchOptions { grid_points: Some(2000), ..Default::default() };
        let a = sweep(false, 4, 42, &opts).unwrap();
        let b = sweep(false, 4, 42, &opts).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
