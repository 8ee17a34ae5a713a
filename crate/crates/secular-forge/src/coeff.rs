//! Exact coefficient field for the series engine: rational functions in
//! `λ₁ = 1/Λ₁`, `λ₂ = 1/Λ₂` with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Laurent polynomial in `(λ₁, λ₂)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LPoly {
    terms: BTreeMap<(i32, i32), Q>,
}

impl LPoly {
    pub fn constant(c: Q) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: Q, i: i32, j: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        Self { terms }
    }

    pub fn lambda1() -> Self {
        Self::monomial(Q::one(), 1, 0)
    }

    pub fn lambda2() -> Self {
        Self::monomial(Q::one(), 0, 1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i32, i32), &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(c, i, j)` if this is the single term `c λ₁ⁱ λ₂ʲ`.
    pub fn as_monomial(&self) -> Option<(Q, i32, i32)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (&(i, j), c) = self.terms.iter().next()?;
        Some((c.clone(), i, j))
    }

    fn add_term(&mut self, key: (i32, i32), c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::default();
        }
        Self { terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    pub fn shift(&self, di: i32, dj: i32) -> Self {
        Self { terms: self.terms.iter().map(|(&(i, j), v)| ((i + di, j + dj), v.clone())).collect() }
    }

    /// Terms of lowest `λ₂` degree, as `(degree, polynomial in λ₁)`.
    pub fn lowest_lambda2(&self) -> Option<(i32, LPoly)> {
        let jmin = self.terms.keys().map(|k| k.1).min()?;
        let slice = self.terms.iter().filter(|(k, _)| k.1 == jmin).map(|(&(i, _), v)| ((i, 0), v.clone()));
        Some((jmin, Self { terms: slice.collect() }))
    }

    pub fn eval(&self, l1: f64, l2: f64) -> f64 {
        self.terms.iter().map(|(&(i, j), c)| c.to_f64().unwrap_or(f64::NAN) * l1.powi(i) * l2.powi(j)).sum()
    }
}

impl Add for &LPoly {
    type Output = LPoly;
    fn add(self, o: &LPoly) -> LPoly {
        let mut out = self.clone();
        for (k, v) in &o.terms {
            out.add_term(*k, v.clone());
        }
        out
    }
}

impl Sub for &LPoly {
    type Output = LPoly;
    fn sub(self, o: &LPoly) -> LPoly {
        let mut out = self.clone();
        for (k, v) in &o.terms {
            out.add_term(*k, -v.clone());
        }
        out
    }
}

impl Mul for &LPoly {
    type Output = LPoly;
    fn mul(self, o: &LPoly) -> LPoly {
        let mut out = LPoly::default();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &o.terms {
                out.add_term((i + k, j + l), a * b);
            }
        }
        out
    }
}

impl Neg for &LPoly {
    type Output = LPoly;
    fn neg(self) -> LPoly {
        LPoly { terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect() }
    }
}

fn fmt_q(c: &Q) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for LPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in &self.terms {
            let s = fmt_q(c);
            if !first {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
                write!(f, "{}", s.trim_start_matches('-'))?;
            } else {
                write!(f, "{s}")?;
            }
            first = false;
            for (name, p) in [("l1", i), ("l2", j)] {
                match p {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{p}")?,
                }
            }
        }
        Ok(())
    }
}

/// Quotient of Laurent polynomials; equality is by cross-multiplication.
#[derive(Clone, Debug)]
pub struct RatFunc {
    pub num: LPoly,
    pub den: LPoly,
}

/// Leading behaviour `c λ₁ⁱ λ₂ʲ` of a coefficient as `Λ₁/Λ₂ → 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leading {
    pub coeff: Q,
    pub l1: i32,
    pub l2: i32,
}

impl fmt::Display for Leading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", LPoly::monomial(self.coeff.clone(), self.l1, self.l2))
    }
}

impl RatFunc {
    pub fn poly(p: LPoly) -> Self {
        Self { num: p, den: LPoly::constant(Q::one()) }
    }

    pub fn rational(c: Q) -> Self {
        Self::poly(LPoly::constant(c))
    }

    pub fn new(num: LPoly, den: LPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Self { num, den }.normalized()
    }

    fn normalized(self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        match self.den.as_monomial() {
            Some((c, i, j)) => Self { num: self.num.scale(&c.recip()).shift(-i, -j), den: LPoly::constant(Q::one()) },
            None => self,
        }
    }

    pub fn eval(&self, l1: f64, l2: f64) -> f64 {
        self.num.eval(l1, l2) / self.den.eval(l1, l2)
    }

    /// Leading term as `λ₂ → 0` at fixed `λ₁` (i.e. `Λ₁/Λ₂ → 0`).
    pub fn leading(&self) -> Option<Leading> {
        let (jn, pn) = self.num.lowest_lambda2()?;
        let (jd, pd) = self.den.lowest_lambda2()?;
        let (cn, in_, _) = pn.as_monomial()?;
        let (cd, id, _) = pd.as_monomial()?;
        Some(Leading { coeff: cn / cd, l1: in_ - id, l2: jn - jd })
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, o: &Self) -> bool {
        &self.num * &o.den == &o.num * &self.den
    }
}

impl Zero for RatFunc {
    fn zero() -> Self {
        Self::poly(LPoly::default())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFunc {
    fn one() -> Self {
        Self::rational(Q::one())
    }
}

impl Add for RatFunc {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        if self.den == o.den {
            return Self { num: &self.num + &o.num, den: self.den }.normalized();
        }
        Self::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }
}

impl Sub for RatFunc {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for RatFunc {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Div for RatFunc {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        Self::new(&self.num * &o.den, &self.den * &o.num)
    }
}

impl Rem for RatFunc {
    type Output = Self;
    fn rem(self, _o: Self) -> Self {
        Self::zero()
    }
}

impl Neg for RatFunc {
    type Output = Self;
    fn neg(self) -> Self {
        Self { num: -&self.num, den: self.den }
    }
}

impl Num for RatFunc {
    type FromStrRadixErr = ();
    fn from_str_radix(_s: &str, _radix: u32) -> Result<Self, ()> {
        Err(())
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_monomial() == Some((Q::one(), 0, 0)) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Scalar field of the series engine.
pub trait Field:
    Clone + fmt::Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_q(c: &Q) -> Self;
    /// Value at numeric `(λ₁, λ₂)`.
    fn eval(&self, lambda: [f64; 2]) -> f64;
    /// Zero up to the arithmetic's rounding, relative to `reference`.
    fn negligible(&self, reference: &Self) -> bool;
}

impl Field for RatFunc {
    fn from_q(c: &Q) -> Self {
        Self::rational(c.clone())
    }
    fn eval(&self, lambda: [f64; 2]) -> f64 {
        RatFunc::eval(self, lambda[0], lambda[1])
    }
    fn negligible(&self, _reference: &Self) -> bool {
        self.is_zero()
    }
}

/// Float coefficients already have numeric `λ` substituted.
impl Field for f64 {
    fn from_q(c: &Q) -> Self {
        c.to_f64().unwrap_or(f64::NAN)
    }
    fn eval(&self, _lambda: [f64; 2]) -> f64 {
        *self
    }
    fn negligible(&self, reference: &Self) -> bool {
        self.abs() <= 1e-12 * reference.abs() + f64::MIN_POSITIVE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1() -> RatFunc {
        RatFunc::poly(LPoly::lambda1())
    }
    fn l2() -> RatFunc {
        RatFunc::poly(LPoly::lambda2())
    }

    #[test]
    fn arithmetic_and_equality() {
        let a = RatFunc::from_q(&q(3, 1)) * l1();
        let b = RatFunc::one() / (RatFunc::from_q(&q(6, 1)) * l1() + RatFunc::from_q(&q(3, 1)) * l2());
        let c = a.clone() * b.clone();
        // 3λ₁/(6λ₁+3λ₂) = λ₁/(2λ₁+λ₂)
        let d = RatFunc::new(LPoly::lambda1(), &LPoly::lambda1().scale(&q(2, 1)) + &LPoly::lambda2());
        assert_eq!(c, d);
        assert_eq!(c.clone() - d, RatFunc::zero());
        assert_eq!((a.clone() / a.clone()), RatFunc::one());
        assert_eq!(a.clone() * RatFunc::zero(), RatFunc::zero());
        assert_eq!(c.leading(), Some(Leading { coeff: q(1, 2), l1: 0, l2: 0 }));
    }

    #[test]
    fn monomial_denominator_folds() {
        let a = RatFunc::new(LPoly::lambda2(), LPoly::monomial(q(2, 1), 1, 0));
        assert_eq!(a.den, LPoly::constant(Q::one()));
        assert_eq!(a.num, LPoly::monomial(q(1, 2), -1, 1));
        assert!((a.eval(2.0, 3.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn leading_picks_lowest_lambda2() {
        // (λ₁² + 5λ₁λ₂) / (λ₁ + λ₂) → λ₁
        let num = &LPoly::monomial(q(1, 1), 2, 0) + &LPoly::monomial(q(5, 1), 1, 1);
        let den = &LPoly::lambda1() + &LPoly::lambda2();
        let r = RatFunc::new(num, den);
        assert_eq!(r.leading(), Some(Leading { coeff: q(1, 1), l1: 1, l2: 0 }));
        let r = RatFunc::poly(&LPoly::monomial(q(10, 1), 0, 3) + &LPoly::monomial(q(-18, 1), 1, 2));
        assert_eq!(r.leading(), Some(Leading { coeff: q(-18, 1), l1: 1, l2: 2 }));
    }

    #[test]
    fn display() {
        let p = &LPoly::monomial(q(-3, 2), 2, 0) + &LPoly::monomial(q(9, 1), 1, 1);
        assert_eq!(p.to_string(), "9*l1*l2 - 3/2*l1^2");
    }
}
