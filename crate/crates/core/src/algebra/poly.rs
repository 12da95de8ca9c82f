//! Sparse multivariate polynomials over the Gaussian rationals in the
//! indeterminates `q1..qN, lambda, omega, hbar`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::gauss::GaussRat;

/// Largest supported configuration-space dimension.
pub const MAX_DIM: usize = 9;
const NVARS: usize = MAX_DIM + 3;
const LAMBDA: usize = MAX_DIM;
const OMEGA: usize = MAX_DIM + 1;
const HBAR: usize = MAX_DIM + 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    /// Position coordinate, zero-based.
    Q(usize),
    Lambda,
    Omega,
    Hbar,
}

impl Var {
    fn slot(self) -> usize {
        match self {
            Var::Q(i) => {
                assert!(i < MAX_DIM, "coordinate index {i} exceeds MAX_DIM");
                i
            }
            Var::Lambda => LAMBDA,
            Var::Omega => OMEGA,
            Var::Hbar => HBAR,
        }
    }

    fn from_slot(slot: usize) -> Var {
        match slot {
            LAMBDA => Var::Lambda,
            OMEGA => Var::Omega,
            HBAR => Var::Hbar,
            i => Var::Q(i),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Q(i) => write!(f, "q{}", i + 1),
            Var::Lambda => write!(f, "lambda"),
            Var::Omega => write!(f, "omega"),
            Var::Hbar => write!(f, "hbar"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial([u16; NVARS]);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: Var) -> Self {
        let mut m = Self::default();
        m.0[v.slot()] = 1;
        m
    }

    pub fn exponent(&self, v: Var) -> u16 {
        self.0[v.slot()]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0.iter()) {
            *a += *b;
        }
        out
    }

    fn with_exponent(&self, v: Var, e: u16) -> Monomial {
        let mut out = *self;
        out.0[v.slot()] = e;
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for slot in (0..NVARS).filter(|&s| self.0[s] > 0) {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            let v = Var::from_slot(slot);
            match self.0[slot] {
                1 => write!(f, "{v}")?,
                e => write!(f, "{v}^{e}")?,
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Sparse polynomial; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, GaussRat>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussRat::one())
    }

    pub fn constant(c: GaussRat) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(GaussRat::from_int(n))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Self::constant(GaussRat::from_frac(num, den))
    }

    pub fn var(v: Var) -> Self {
        Self::term(GaussRat::one(), Monomial::var(v))
    }

    pub fn term(c: GaussRat, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    /// `1 + lambda * (q1^2 + ... + qN^2)`.
    pub fn conformal_factor(dim: usize) -> Self {
        let mut d = Poly::one();
        d += &(&Poly::var(Var::Lambda) * &Poly::radius_squared(dim));
        d
    }

    /// `q1^2 + ... + qN^2`.
    pub fn radius_squared(dim: usize) -> Self {
        let mut s = Poly::zero();
        for i in 0..dim {
            s.add_term(Monomial::one().with_exponent(Var::Q(i), 2), GaussRat::one());
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRat)> {
        self.terms.iter()
    }

    /// Value if the polynomial is a constant (including zero).
    pub fn constant_value(&self) -> Option<GaussRat> {
        match self.terms.len() {
            0 => Some(GaussRat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &GaussRat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect() }
    }

    pub fn scale_rational(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, a)| (*m, a.scale(k))).collect() }
    }

    pub fn conj(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, a)| (*m, a.conj())).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Partial derivative with respect to `v`.
    pub fn derivative(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let k = BigRational::from_integer(BigInt::from(e));
            out.add_term(m.with_exponent(v, e - 1), c.scale(&k));
        }
        out
    }

    pub fn degree_in(&self, v: Var) -> u16 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    /// Splits into `sum_k slice_k * v^k`, returning the slices (free of `v`).
    pub fn slices_in(&self, v: Var) -> Vec<Poly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(); d + 1];
        for (m, c) in &self.terms {
            let k = m.exponent(v) as usize;
            out[k].add_term(m.with_exponent(v, 0), c.clone());
        }
        out
    }

    /// Inverse of [`Poly::slices_in`].
    pub fn from_slices(slices: &[Poly], v: Var) -> Poly {
        let mut out = Poly::zero();
        for (k, s) in slices.iter().enumerate() {
            for (m, c) in &s.terms {
                out.add_term(m.with_exponent(v, k as u16), c.clone());
            }
        }
        out
    }

    /// Substitutes `v = 0`.
    pub fn at_zero(&self, v: Var) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.exponent(v) == 0)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Exact quotient by `1 + lambda * s`, where `s` is free of lambda.
    ///
    /// Works in increasing powers of lambda, where the divisor has unit
    /// constant term; returns `None` when the division leaves a remainder.
    pub fn div_conformal(&self, s: &Poly) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let a = self.slices_in(Var::Lambda);
        let d = a.len() - 1;
        if d == 0 {
            return None;
        }
        let mut quot: Vec<Poly> = Vec::with_capacity(d);
        quot.push(a[0].clone());
        for k in 1..d {
            let next = &a[k] - &(s * &quot[k - 1]);
            quot.push(next);
        }
        if a[d] == s * &quot[d - 1] {
            Some(Poly::from_slices(&quot, Var::Lambda))
        } else {
            None
        }
    }

    /// Numeric evaluation; `q` supplies the coordinates.
    pub fn eval(&self, q: &[f64], lambda: f64, omega: f64, hbar: f64) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (m, c) in &self.terms {
            let mut v = 1.0;
            for (i, &qi) in q.iter().enumerate() {
                v *= qi.powi(m.exponent(Var::Q(i)) as i32);
            }
            v *= lambda.powi(m.exponent(Var::Lambda) as i32);
            v *= omega.powi(m.exponent(Var::Omega) as i32);
            v *= hbar.powi(m.exponent(Var::Hbar) as i32);
            let (cr, ci) = c.to_f64_pair();
            re += cr * v;
            im += ci * v;
        }
        (re, im)
    }

    /// Highest coordinate index appearing, plus one.
    pub fn dim_used(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|m| (0..MAX_DIM).filter(move |&i| m.exponent(Var::Q(i)) > 0))
            .map(|i| i + 1)
            .max()
            .unwrap_or(0)
    }
}

impl<'a> std::ops::Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl std::ops::AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl<'a> std::ops::Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
}

impl<'a> std::ops::Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative_real = c.is_real() && c.re.is_negative();
            let mag = if negative_real { -c } else { c.clone() };
            match (k, negative_real) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: usize) -> Poly {
        Poly::var(Var::Q(i))
    }

    #[test]
    fn product_of_binomials() {
        let a = &q(0) + &Poly::one();
        let b = &q(0) - &Poly::one();
        let p = &a * &b;
        let expected = &(&q(0) * &q(0)) - &Poly::one();
        assert_eq!(p, expected);
    }

    #[test]
    fn derivative_of_square() {
        let p = &q(1) * &q(1);
        assert_eq!(p.derivative(Var::Q(1)), q(1).scale(&GaussRat::from_int(2)));
        assert!(p.derivative(Var::Q(0)).is_zero());
    }

    #[test]
    fn conformal_division_exact_and_inexact() {
        let s = Poly::radius_squared(3);
        let d = Poly::conformal_factor(3);
        let x = &(&q(0) * &Poly::var(Var::Hbar)) + &Poly::var(Var::Omega);
        let prod = &(&d * &d) * &x;
        let once = prod.div_conformal(&s).unwrap();
        assert_eq!(once, &d * &x);
        assert_eq!(once.div_conformal(&s).unwrap(), x);
        assert!(x.div_conformal(&s).is_none());
        assert!(Poly::one().div_conformal(&s).is_none());
        // lambda alone is not a multiple of D
        assert!(Poly::var(Var::Lambda).div_conformal(&s).is_none());
    }

    #[test]
    fn display_is_readable() {
        let p = &(&q(0).scale(&GaussRat::from_frac(-1, 2)) + &Poly::var(Var::Lambda)) + &Poly::int(3);
        assert_eq!(p.to_string(), "3 + lambda - 1/2*q1");
    }
}
