//! Coefficient ring of the operator algebra: `numerator / D^k` with
//! `D = 1 + lambda * |q|^2`.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use super::gauss::GaussRat;
use super::poly::{Poly, Var};

/// Canonical form: the numerator is not divisible by `D` whenever
/// `d_power > 0`, and zero is stored as `0 / D^0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coefficient {
    dim: usize,
    numerator: Poly,
    d_power: u32,
}

impl Coefficient {
    pub fn new(dim: usize, numerator: Poly, d_power: u32) -> Self {
        let mut c = Self { dim, numerator, d_power };
        c.canonicalize();
        c
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, numerator: Poly::zero(), d_power: 0 }
    }

    pub fn one(dim: usize) -> Self {
        Self { dim, numerator: Poly::one(), d_power: 0 }
    }

    pub fn poly(dim: usize, p: Poly) -> Self {
        Self { dim, numerator: p, d_power: 0 }
    }

    pub fn constant(dim: usize, c: GaussRat) -> Self {
        Self::poly(dim, Poly::constant(c))
    }

    /// `D^-k`.
    pub fn inv_d_power(dim: usize, k: u32) -> Self {
        Self { dim, numerator: Poly::one(), d_power: k }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn numerator(&self) -> &Poly {
        &self.numerator
    }

    pub fn d_power(&self) -> u32 {
        self.d_power
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.d_power == 0 && self.numerator.is_one()
    }

    fn d_poly(&self) -> Poly {
        Poly::conformal_factor(self.dim)
    }

    fn canonicalize(&mut self) {
        if self.numerator.is_zero() {
            self.d_power = 0;
            return;
        }
        if self.d_power == 0 {
            return;
        }
        let s = Poly::radius_squared(self.dim);
        while self.d_power > 0 {
            match self.numerator.div_conformal(&s) {
                Some(q) => {
                    self.numerator = q;
                    self.d_power -= 1;
                }
                None => break,
            }
        }
    }

    fn lifted(&self, k: u32) -> Poly {
        debug_assert!(k >= self.d_power);
        let extra = k - self.d_power;
        if extra == 0 {
            self.numerator.clone()
        } else {
            &self.numerator * &self.d_poly().pow(extra)
        }
    }

    pub fn add(&self, other: &Coefficient) -> Coefficient {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let k = self.d_power.max(other.d_power);
        let num = &self.lifted(k) + &other.lifted(k);
        Coefficient::new(self.dim, num, k)
    }

    pub fn sub(&self, other: &Coefficient) -> Coefficient {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Coefficient {
        Coefficient { dim: self.dim, numerator: -&self.numerator, d_power: self.d_power }
    }

    pub fn mul(&self, other: &Coefficient) -> Coefficient {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if self.is_zero() || other.is_zero() {
            return Coefficient::zero(self.dim);
        }
        Coefficient::new(self.dim, &self.numerator * &other.numerator, self.d_power + other.d_power)
    }

    pub fn scale(&self, c: &GaussRat) -> Coefficient {
        Coefficient::new(self.dim, self.numerator.scale(c), self.d_power)
    }

    pub fn scale_rational(&self, k: &BigRational) -> Coefficient {
        Coefficient::new(self.dim, self.numerator.scale_rational(k), self.d_power)
    }

    pub fn conj(&self) -> Coefficient {
        Coefficient { dim: self.dim, numerator: self.numerator.conj(), d_power: self.d_power }
    }

    /// `d/dq_j` keeping the result inside the ring:
    /// `d(a D^-k) = (D da - 2 k lambda q_j a) / D^(k+1)`.
    pub fn derivative(&self, j: usize) -> Coefficient {
        let da = self.numerator.derivative(Var::Q(j));
        if self.d_power == 0 {
            return Coefficient::poly(self.dim, da);
        }
        let k = GaussRat::from_int(2 * self.d_power as i64);
        let lam_q = &Poly::var(Var::Lambda) * &Poly::var(Var::Q(j));
        let num = &(&self.d_poly() * &da) - &(&lam_q * &self.numerator).scale(&k);
        Coefficient::new(self.dim, num, self.d_power + 1)
    }

    /// Substitutes `lambda = 0` (so `D = 1`).
    pub fn flat_limit(&self) -> Coefficient {
        Coefficient::poly(self.dim, self.numerator.at_zero(Var::Lambda))
    }

    /// Multiplicative inverse when the value is `c * D^m` for a nonzero
    /// numeric constant `c` and integer `m`.
    pub fn invert_scalar_d_power(&self) -> Option<Coefficient> {
        if self.is_zero() {
            return None;
        }
        let s = Poly::radius_squared(self.dim);
        let mut num = self.numerator.clone();
        let mut m = 0u32;
        while let Some(q) = num.div_conformal(&s) {
            num = q;
            m += 1;
        }
        let c = num.constant_value()?;
        let cinv = c.inv()?;
        // value = c * D^(m - k); inverse = c^-1 * D^(k - m)
        let k = self.d_power;
        if k >= m {
            let p = self.d_poly().pow(k - m).scale(&cinv);
            Some(Coefficient::poly(self.dim, p))
        } else {
            Some(Coefficient::new(self.dim, Poly::constant(cinv), m - k))
        }
    }

    pub fn eval(&self, q: &[f64], lambda: f64, omega: f64, hbar: f64) -> (f64, f64) {
        let (re, im) = self.numerator.eval(q, lambda, omega, hbar);
        let r2: f64 = q.iter().map(|x| x * x).sum();
        let d = (1.0 + lambda * r2).powi(self.d_power as i32);
        (re / d, im / d)
    }

    pub fn is_real(&self) -> bool {
        self.numerator.terms().all(|(_, c)| c.im.is_zero())
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let single = self.numerator.len() <= 1;
        match (self.d_power, single) {
            (0, _) => write!(f, "{}", self.numerator),
            (k, true) => write!(f, "{}/D^{k}", self.numerator),
            (k, false) => write!(f, "({})/D^{k}", self.numerator),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam() -> Poly {
        Poly::var(Var::Lambda)
    }

    #[test]
    fn d_over_d_collapses() {
        let c = Coefficient::new(2, Poly::conformal_factor(2), 1);
        assert!(c.is_one());
    }

    #[test]
    fn zero_is_unique() {
        let a = Coefficient::new(3, Poly::zero(), 4);
        assert_eq!(a, Coefficient::zero(3));
    }

    #[test]
    fn derivative_of_inverse_d() {
        // d/dq1 D^-1 = -2 lambda q1 D^-2
        let c = Coefficient::inv_d_power(2, 1);
        let expected = Coefficient::new(
            2,
            (&lam() * &Poly::var(Var::Q(0))).scale(&GaussRat::from_int(-2)),
            2,
        );
        assert_eq!(c.derivative(0), expected);
    }

    #[test]
    fn sum_cancels_to_polynomial() {
        // 1/D + lambda q^2 / D = 1
        let a = Coefficient::inv_d_power(3, 1);
        let b = Coefficient::new(3, &lam() * &Poly::radius_squared(3), 1);
        assert!(a.add(&b).is_one());
    }

    #[test]
    fn invert_scalar_times_d_power() {
        let c = Coefficient::new(2, Poly::frac(3, 2), 2);
        let inv = c.invert_scalar_d_power().unwrap();
        assert!(c.mul(&inv).is_one());
        let d = Coefficient::poly(2, Poly::conformal_factor(2).scale(&GaussRat::from_int(2)));
        let dinv = d.invert_scalar_d_power().unwrap();
        assert_eq!(dinv, Coefficient::new(2, Poly::frac(1, 2), 1));
        assert!(Coefficient::poly(2, Poly::var(Var::Q(0))).invert_scalar_d_power().is_none());
        assert!(Coefficient::poly(2, lam()).invert_scalar_d_power().is_none());
    }
}
