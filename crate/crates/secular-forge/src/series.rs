//! Truncated polynomials in the Birkhoff variables `(u₁, u₁★, u₂, u₂★, v, v★)`
//! with complex coefficients over a [`Field`], and the Poisson bracket of the
//! canonical pairs `(u₁,u₁★)`, `(u₂,u₂★)`, `(v,v★)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};

use crate::coeff::{Field, Q};
use crate::error::{Error, Result};

pub type Exp = [u8; 6];
pub type C<T> = Complex<T>;

pub const VARIABLES: [&str; 6] = ["u1", "u1*", "u2", "u2*", "v", "v*"];

pub fn degree(e: &Exp) -> u32 {
    e.iter().map(|&k| k as u32).sum()
}

/// True for monomials of the form `(u₁u₁★)^a (u₂u₂★)^b (vv★)^c`.
pub fn is_normal(e: &Exp) -> bool {
    e[0] == e[1] && e[2] == e[3] && e[4] == e[5]
}

pub fn cq<T: Field>(re: &Q) -> C<T> {
    C::new(T::from_q(re), T::zero())
}

pub fn i_unit<T: Field>() -> C<T> {
    C::new(T::zero(), T::one())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<T: Field> {
    terms: BTreeMap<Exp, C<T>>,
    max_degree: u32,
}

impl<T: Field> TruncatedSeries<T> {
    pub fn zero(max_degree: u32) -> Self {
        Self { terms: BTreeMap::new(), max_degree }
    }

    pub fn constant(c: C<T>, max_degree: u32) -> Self {
        Self::monomial([0; 6], c, max_degree)
    }

    pub fn monomial(e: Exp, c: C<T>, max_degree: u32) -> Self {
        let mut s = Self::zero(max_degree);
        s.add_term(e, c);
        s
    }

    pub fn variable(k: usize, max_degree: u32) -> Self {
        let mut e = [0; 6];
        e[k] = 1;
        Self::monomial(e, C::one(), max_degree)
    }

    /// `t_j = i w_j w_j★` for `j ∈ {0, 1, 2}` (u₁, u₂, v).
    pub fn action(j: usize, max_degree: u32) -> Self {
        let mut e = [0; 6];
        e[2 * j] = 1;
        e[2 * j + 1] = 1;
        Self::monomial(e, i_unit(), max_degree)
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &C<T>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &Exp) -> C<T> {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, e: Exp, c: C<T>) {
        if degree(&e) > self.max_degree || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn with_max_degree(&self, max_degree: u32) -> Self {
        let mut out = Self::zero(max_degree);
        for (e, c) in &self.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn check_compatible(&self, o: &Self) -> Result<()> {
        if self.max_degree != o.max_degree {
            return Err(Error::Series(format!(
                "truncation orders differ: {} vs {}",
                self.max_degree, o.max_degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.with_max_degree(self.max_degree.min(o.max_degree));
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(), max_degree: self.max_degree }
    }

    pub fn scale(&self, k: &C<T>) -> Self {
        let mut out = Self::zero(self.max_degree);
        for (e, c) in &self.terms {
            out.add_term(*e, c.clone() * k.clone());
        }
        out
    }

    /// Product truncated at the smaller of the two orders.
    pub fn mul(&self, o: &Self) -> Self {
        let max = self.max_degree.min(o.max_degree);
        let mut out = Self::zero(max);
        for (ea, ca) in &self.terms {
            let da = degree(ea);
            for (eb, cb) in &o.terms {
                if da + degree(eb) > max {
                    continue;
                }
                let mut e = *ea;
                for k in 0..6 {
                    e[k] += eb[k];
                }
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(C::one(), self.max_degree);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::zero(self.max_degree);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut f = *e;
            f[k] -= 1;
            out.add_term(f, c.clone() * cq(&Q::from_integer(e[k].into())));
        }
        out
    }

    /// `Σ ∂a/∂w ∂b/∂w★ − ∂a/∂w★ ∂b/∂w` over the three pairs.
    pub fn bracket(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.max_degree.min(o.max_degree));
        for j in 0..3 {
            let (w, ws) = (2 * j, 2 * j + 1);
            out = out.add(&self.derivative(w).mul(&o.derivative(ws)));
            out = out.sub(&self.derivative(ws).mul(&o.derivative(w)));
        }
        out
    }

    pub fn filter<F: Fn(&Exp) -> bool>(&self, keep: F) -> Self {
        Self {
            terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (*e, c.clone())).collect(),
            max_degree: self.max_degree,
        }
    }

    pub fn degree_part(&self, d: u32) -> Self {
        self.filter(|e| degree(e) == d)
    }

    pub fn normal_part(&self) -> Self {
        self.filter(is_normal)
    }

    pub fn non_normal_part(&self) -> Self {
        self.filter(|e| !is_normal(e))
    }

    /// `exp(L_χ) self` with `L_χ = {χ, ·}`, truncated.
    pub fn lie_transform(&self, chi: &Self) -> Self {
        let mut out = self.clone();
        let mut term = self.clone();
        let mut k = 1i64;
        loop {
            term = chi.bracket(&term).scale(&cq(&Q::new(1.into(), k.into())));
            if term.is_empty() {
                return out;
            }
            out = out.add(&term);
            k += 1;
        }
    }

    /// Value at complex Birkhoff coordinates, coefficients evaluated at `λ`.
    pub fn eval(&self, z: &[Complex64; 6], lambda: [f64; 2]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut m = Complex64::new(c.re.eval(lambda), c.im.eval(lambda));
                for k in 0..6 {
                    m *= z[k].powu(e[k] as u32);
                }
                m
            })
            .sum()
    }

    /// Normal part rewritten in the actions: `(u u★)^a = (−i t)^a`.
    pub fn to_actions(&self) -> Result<ActionPoly<T>> {
        let mut out = ActionPoly::default();
        let minus_i = -i_unit::<T>();
        for (e, c) in &self.terms {
            if !is_normal(e) {
                return Err(Error::Series(format!("non-normal monomial {e:?}")));
            }
            let mut v = c.clone();
            for _ in 0..(e[0] + e[2] + e[4]) {
                v = v * minus_i.clone();
            }
            if !v.im.negligible(&v.re) {
                return Err(Error::Series(format!("complex action coefficient at {e:?}")));
            }
            out.terms.insert([e[0], e[2], e[4]], v.re);
        }
        Ok(out)
    }

    /// Sorted `exponents  re  im` lines.
    pub fn dump(&self) -> String
    where
        T: std::fmt::Display,
    {
        let mut s = String::new();
        for (e, c) in &self.terms {
            let ex: Vec<String> = e.iter().map(|k| k.to_string()).collect();
            let _ = writeln!(s, "{}\t{}\t{}", ex.join(" "), c.re, c.im);
        }
        s
    }
}

/// Real polynomial in `(t₁, t₂, t₃)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionPoly<T: Field> {
    pub terms: BTreeMap<[u8; 3], T>,
}

impl<T: Field> Default for ActionPoly<T> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<T: Field> ActionPoly<T> {
    pub fn coeff(&self, e: &[u8; 3]) -> T {
        self.terms.get(e).cloned().unwrap_or_else(T::zero)
    }

    pub fn degree_part(&self, d: u8) -> Self {
        Self { terms: self.terms.iter().filter(|(e, _)| e.iter().sum::<u8>() == d).map(|(e, c)| (*e, c.clone())).collect() }
    }

    pub fn eval(&self, t: [f64; 3], lambda: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.eval(lambda) * t[0].powi(e[0] as i32) * t[1].powi(e[1] as i32) * t[2].powi(e[2] as i32))
            .sum()
    }

    /// Partial derivative in `t_j`.
    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::default();
        for (e, c) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let mut f = *e;
            f[j] -= 1;
            out.terms.insert(f, c.clone() * T::from_q(&Q::from_integer(e[j].into())));
        }
        out
    }
}

pub fn action_label(e: &[u8; 3]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(j, &k)| if k == 1 { format!("t{}", j + 1) } else { format!("t{}^{}", j + 1, k) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, LPoly, RatFunc};
    use proptest::prelude::*;

    type S = TruncatedSeries<RatFunc>;

    fn rat(n: i64, d: i64) -> C<RatFunc> {
        cq(&q(n, d))
    }

    #[test]
    fn monomial_products() {
        let t1 = S::action(0, 6);
        let t2 = S::action(1, 6);
        let p = t1.mul(&t2);
        assert_eq!(p.to_actions().unwrap().coeff(&[1, 1, 0]), RatFunc::one());
        assert_eq!(p.len(), 1);
        assert!(t1.mul(&S::zero(6)).is_empty());
        // (1 + t₂/Λ₂)³
        let l2 = S::constant(C::new(RatFunc::poly(LPoly::lambda2()), RatFunc::zero()), 6);
        let base = S::constant(C::one(), 6).add(&t2.mul(&l2));
        let cube = base.pow(3).to_actions().unwrap();
        for (k, c) in [(0u8, 1i64), (1, 3), (2, 3), (3, 1)] {
            assert_eq!(cube.coeff(&[0, k, 0]), RatFunc::poly(LPoly::monomial(q(c, 1), 0, k as i32)));
        }
        assert_eq!(cube.terms.len(), 4);
        // truncation drops degree 8
        assert!(base.pow(4).to_actions().unwrap().coeff(&[0, 4, 0]).is_zero());
    }

    #[test]
    fn canonical_brackets() {
        let u = S::variable(0, 6);
        let us = S::variable(1, 6);
        assert_eq!(u.bracket(&us), S::constant(C::one(), 6));
        assert!(S::action(0, 6).bracket(&S::action(1, 6)).is_empty());
        assert!(S::action(0, 6).bracket(&S::action(0, 6)).is_empty());
    }

    #[test]
    fn hand_checked_bracket() {
        // {u₁²u₁★ + 3u₁★v − v★, u₁★} = ∂/∂u₁ of the first = 2u₁u₁★
        let a = S::monomial([2, 1, 0, 0, 0, 0], C::one(), 6)
            .add(&S::monomial([0, 1, 0, 0, 1, 0], rat(3, 1), 6))
            .sub(&S::variable(5, 6));
        let b = S::variable(1, 6);
        assert_eq!(a.bracket(&b), S::monomial([1, 1, 0, 0, 0, 0], rat(2, 1), 6));
        // {·, v} picks −∂/∂v★
        assert_eq!(a.bracket(&S::variable(4, 6)), S::constant(C::one(), 6));
        // {·, u₁} = −∂/∂u₁★ = −u₁² − 3v
        let expect = S::monomial([2, 0, 0, 0, 0, 0], rat(-1, 1), 6).add(&S::monomial([0, 0, 0, 0, 1, 0], rat(-3, 1), 6));
        assert_eq!(a.bracket(&S::variable(0, 6)), expect);
    }

    fn arb_series() -> impl Strategy<Value = S> {
        prop::collection::vec((prop::array::uniform6(0u8..2), -3i64..4, -2i64..3), 1..5).prop_map(|terms| {
            let mut s = S::zero(12);
            for (e, re, im) in terms {
                if degree(&e) <= 3 {
                    s.add_term(e, C::new(RatFunc::from_q(&q(re, 1)), RatFunc::from_q(&q(im, 2))));
                }
            }
            s
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bracket_identities(a in arb_series(), b in arb_series(), c in arb_series()) {
            prop_assert_eq!(a.bracket(&b), b.bracket(&a).neg());
            prop_assert_eq!(a.bracket(&b.add(&c)), a.bracket(&b).add(&a.bracket(&c)));
            let jacobi = a.bracket(&b.bracket(&c)).add(&b.bracket(&c.bracket(&a))).add(&c.bracket(&a.bracket(&b)));
            prop_assert!(jacobi.is_empty());
            // Leibniz
            prop_assert_eq!(a.bracket(&b.mul(&c)), a.bracket(&b).mul(&c).add(&b.mul(&a.bracket(&c))));
        }
    }

    #[test]
    fn lie_transform_of_quadratic() {
        // χ = s u₁ u₂★; {χ, u₁★} = s u₂★ and the series terminates
        let chi = S::monomial([1, 0, 0, 1, 0, 0], rat(1, 3), 6);
        let out = S::variable(1, 6).lie_transform(&chi);
        let expect = S::variable(1, 6).add(&S::variable(3, 6).scale(&rat(1, 3)));
        assert_eq!(out, expect);
    }

    #[test]
    fn float_mode_matches_exact_evaluation() {
        let a = S::monomial([2, 1, 0, 0, 1, 0], rat(5, 2), 6).add(&S::action(2, 6));
        let f: TruncatedSeries<f64> = TruncatedSeries::monomial([2, 1, 0, 0, 1, 0], C::new(2.5, 0.0), 6)
            .add(&TruncatedSeries::action(2, 6));
        let z = [
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.3, 0.1),
            Complex64::new(0.0, 0.1),
            Complex64::new(0.2, 0.0),
            Complex64::new(0.05, -0.1),
            Complex64::new(0.1, 0.1),
        ];
        assert!((a.eval(&z, [1.0, 1.0]) - f.eval(&z, [1.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn action_labels() {
        assert_eq!(action_label(&[2, 0, 1]), "t1^2*t3");
        assert_eq!(action_label(&[0, 0, 0]), "1");
    }
}
