//! Normal-ordered differential operators `sum_alpha c_alpha(q) p^alpha`
//! under `[q_i, p_j] = i hbar delta_ij`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::coeff::Coefficient;
use super::gauss::GaussRat;
use super::poly::{Poly, Var, MAX_DIM};

/// Momentum multi-index `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex([u8; MAX_DIM]);

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(i: usize) -> Self {
        let mut m = Self::default();
        m.0[i] = 1;
        m
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn add(&self, other: &MultiIndex) -> MultiIndex {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0.iter()) {
            *a += *b;
        }
        out
    }

    fn sub(&self, other: &MultiIndex) -> MultiIndex {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0.iter()) {
            *a -= *b;
        }
        out
    }

    /// All `gamma <= self` componentwise.
    fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero()];
        for i in 0..MAX_DIM {
            if self.0[i] == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * (self.0[i] as usize + 1));
            for g in &out {
                for k in 0..=self.0[i] {
                    let mut h = *g;
                    h.0[i] = k;
                    next.push(h);
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate().filter(|(_, &e)| e > 0) {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "p{}", i + 1)?;
            } else {
                write!(f, "p{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

fn binomial(n: u8, k: u8) -> i64 {
    let (n, k) = (n as i64, k as i64);
    (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

/// `(-i hbar)^k` as a coefficient.
fn minus_i_hbar_pow(dim: usize, k: u32) -> Coefficient {
    let phase = match k % 4 {
        0 => GaussRat::one(),
        1 => -GaussRat::i(),
        2 => GaussRat::from_int(-1),
        _ => GaussRat::i(),
    };
    Coefficient::poly(dim, Poly::var(Var::Hbar).pow(k).scale(&phase))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperatorExpr {
    dim: usize,
    terms: BTreeMap<MultiIndex, Coefficient>,
}

impl OperatorExpr {
    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_coeff(Coefficient::one(dim))
    }

    pub fn from_coeff(c: Coefficient) -> Self {
        let mut op = Self::zero(c.dim());
        op.add_term(MultiIndex::zero(), c);
        op
    }

    pub fn from_poly(dim: usize, p: Poly) -> Self {
        Self::from_coeff(Coefficient::poly(dim, p))
    }

    pub fn scalar(dim: usize, c: GaussRat) -> Self {
        Self::from_coeff(Coefficient::constant(dim, c))
    }

    pub fn int(dim: usize, n: i64) -> Self {
        Self::scalar(dim, GaussRat::from_int(n))
    }

    pub fn frac(dim: usize, num: i64, den: i64) -> Self {
        Self::scalar(dim, GaussRat::from_frac(num, den))
    }

    pub fn q(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        Self::from_poly(dim, Poly::var(Var::Q(i)))
    }

    pub fn p(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut op = Self::zero(dim);
        op.add_term(MultiIndex::unit(i), Coefficient::one(dim));
        op
    }

    pub fn lambda(dim: usize) -> Self {
        Self::from_poly(dim, Poly::var(Var::Lambda))
    }

    pub fn omega(dim: usize) -> Self {
        Self::from_poly(dim, Poly::var(Var::Omega))
    }

    pub fn hbar(dim: usize) -> Self {
        Self::from_poly(dim, Poly::var(Var::Hbar))
    }

    /// `D = 1 + lambda q^2`.
    pub fn d(dim: usize) -> Self {
        Self::from_poly(dim, Poly::conformal_factor(dim))
    }

    /// `D^-k`.
    pub fn d_inv(dim: usize, k: u32) -> Self {
        Self::from_coeff(Coefficient::inv_d_power(dim, k))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Coefficient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Option<&Coefficient> {
        self.terms.get(alpha)
    }

    /// The momentum-free part if the operator is a pure function of `q`.
    pub fn as_function(&self) -> Option<Coefficient> {
        match self.terms.len() {
            0 => Some(Coefficient::zero(self.dim)),
            1 => self.terms.get(&MultiIndex::zero()).cloned(),
            _ => None,
        }
    }

    pub fn max_momentum_degree(&self) -> u32 {
        self.terms.keys().map(|a| a.degree()).max().unwrap_or(0)
    }

    pub fn max_d_power(&self) -> u32 {
        self.terms.values().map(|c| c.d_power()).max().unwrap_or(0)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_dim(&self, other: &OperatorExpr) {
        assert_eq!(self.dim, other.dim, "operator dimension mismatch");
    }

    pub fn add(&self, other: &OperatorExpr) -> OperatorExpr {
        self.check_dim(other);
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(*a, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &OperatorExpr) -> OperatorExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> OperatorExpr {
        OperatorExpr {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, c)| (*a, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &GaussRat) -> OperatorExpr {
        let mut out = OperatorExpr::zero(self.dim);
        for (a, k) in &self.terms {
            out.add_term(*a, k.scale(c));
        }
        out
    }

    pub fn scale_rational(&self, k: &BigRational) -> OperatorExpr {
        self.scale(&GaussRat::real(k.clone()))
    }

    /// Left multiplication by a function of `q`.
    pub fn left_mul_coeff(&self, f: &Coefficient) -> OperatorExpr {
        let mut out = OperatorExpr::zero(self.dim);
        for (a, c) in &self.terms {
            out.add_term(*a, f.mul(c));
        }
        out
    }

    /// Normal-ordered product, moving momenta right with
    /// `p^alpha f = sum_gamma C(alpha, gamma) (-i hbar)^|gamma| (d^gamma f) p^(alpha-gamma)`.
    pub fn mul(&self, other: &OperatorExpr) -> OperatorExpr {
        self.check_dim(other);
        let dim = self.dim;
        let mut acc: HashMap<MultiIndex, Vec<Coefficient>> = HashMap::new();
        let mut phase_cache: HashMap<u32, Coefficient> = HashMap::new();
        for (beta, d) in &other.terms {
            let mut deriv_cache: HashMap<MultiIndex, Coefficient> = HashMap::new();
            deriv_cache.insert(MultiIndex::zero(), d.clone());
            for (alpha, c) in &self.terms {
                for gamma in alpha.sub_indices() {
                    let dg = derivative_multi(&mut deriv_cache, &gamma);
                    if dg.is_zero() {
                        continue;
                    }
                    let mut weight = 1i64;
                    for i in 0..dim {
                        weight *= binomial(alpha.get(i), gamma.get(i));
                    }
                    let k = gamma.degree();
                    let phase = phase_cache
                        .entry(k)
                        .or_insert_with(|| minus_i_hbar_pow(dim, k))
                        .clone();
                    let term = c
                        .mul(&phase)
                        .mul(&dg)
                        .scale(&GaussRat::from_int(weight));
                    let out_idx = alpha.sub(&gamma).add(beta);
                    acc.entry(out_idx).or_default().push(term);
                }
            }
        }
        let mut out = OperatorExpr::zero(dim);
        for (idx, parts) in acc {
            out.add_term(idx, sum_coefficients(dim, parts));
        }
        out
    }

    pub fn pow(&self, e: u32) -> OperatorExpr {
        let mut out = OperatorExpr::identity(self.dim);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &OperatorExpr) -> OperatorExpr {
        self.mul(other).sub(&other.mul(self))
    }

    /// Formal adjoint with respect to the flat `L^2` product: reverse the
    /// factor order and conjugate constants, then normal-order again.
    pub fn formal_adjoint(&self) -> OperatorExpr {
        let mut out = OperatorExpr::zero(self.dim);
        for (alpha, c) in &self.terms {
            let mut mono = OperatorExpr::identity(self.dim);
            for i in 0..self.dim {
                for _ in 0..alpha.get(i) {
                    mono = mono.mul(&OperatorExpr::p(self.dim, i));
                }
            }
            out = out.add(&mono.mul(&OperatorExpr::from_coeff(c.conj())));
        }
        out
    }

    /// `D^a X D^-a` via `p_i -> p_i + 2 i hbar a lambda q_i / D`.
    pub fn conjugate_by_d_power(&self, a: &BigRational) -> OperatorExpr {
        if a.is_zero() {
            return self.clone();
        }
        let dim = self.dim;
        let two_i_a = GaussRat::new(BigRational::zero(), a * BigRational::from_integer(BigInt::from(2)));
        let shifted: Vec<OperatorExpr> = (0..dim)
            .map(|i| {
                let num = &(&Poly::var(Var::Hbar) * &Poly::var(Var::Lambda)) * &Poly::var(Var::Q(i));
                let shift = Coefficient::new(dim, num.scale(&two_i_a), 1);
                OperatorExpr::p(dim, i).add(&OperatorExpr::from_coeff(shift))
            })
            .collect();
        let mut powers: HashMap<(usize, u8), OperatorExpr> = HashMap::new();
        let mut out = OperatorExpr::zero(dim);
        for (alpha, c) in &self.terms {
            let mut prod = OperatorExpr::from_coeff(c.clone());
            for i in 0..dim {
                let e = alpha.get(i);
                if e == 0 {
                    continue;
                }
                let pw = powers
                    .entry((i, e))
                    .or_insert_with(|| shifted[i].pow(e as u32))
                    .clone();
                prod = prod.mul(&pw);
            }
            out = out.add(&prod);
        }
        out
    }

    /// Substitutes `lambda = 0` in every coefficient.
    pub fn flat_limit(&self) -> OperatorExpr {
        let mut out = OperatorExpr::zero(self.dim);
        for (a, c) in &self.terms {
            out.add_term(*a, c.flat_limit());
        }
        out
    }

    /// Rebuilds the operator in another dimension (coordinates beyond the
    /// target dimension must be absent).
    pub fn with_dim(&self, dim: usize) -> OperatorExpr {
        let mut out = OperatorExpr::zero(dim);
        for (a, c) in &self.terms {
            assert!((dim..MAX_DIM).all(|i| a.get(i) == 0));
            assert!(c.numerator().dim_used() <= dim);
            let d = c.d_power();
            assert!(d == 0 || c.dim() == dim, "cannot re-dimension D powers");
            out.add_term(*a, Coefficient::new(dim, c.numerator().clone(), d));
        }
        out
    }
}

fn derivative_multi(cache: &mut HashMap<MultiIndex, Coefficient>, gamma: &MultiIndex) -> Coefficient {
    if let Some(c) = cache.get(gamma) {
        return c.clone();
    }
    // peel one derivative off the first nonzero slot
    let i = (0..MAX_DIM).find(|&i| gamma.get(i) > 0).unwrap();
    let mut lower = *gamma;
    lower.0[i] -= 1;
    let base = derivative_multi(cache, &lower);
    let d = base.derivative(i);
    cache.insert(*gamma, d.clone());
    d
}

/// Sums many coefficients over a common denominator with a single
/// canonicalization.
fn sum_coefficients(dim: usize, parts: Vec<Coefficient>) -> Coefficient {
    if parts.len() == 1 {
        return parts.into_iter().next().unwrap();
    }
    let k = parts.iter().map(|c| c.d_power()).max().unwrap_or(0);
    let d = Poly::conformal_factor(dim);
    let mut d_pows: Vec<Poly> = vec![Poly::one()];
    for j in 1..=k {
        let next = &d_pows[j as usize - 1] * &d;
        d_pows.push(next);
    }
    let mut num = Poly::zero();
    for c in &parts {
        let extra = (k - c.d_power()) as usize;
        if extra == 0 {
            num += c.numerator();
        } else {
            num += &(c.numerator() * &d_pows[extra]);
        }
    }
    Coefficient::new(dim, num, k)
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (alpha, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if alpha.degree() == 0 {
                write!(f, "({c})")?;
            } else if c.is_one() {
                write!(f, "{alpha}")?;
            } else {
                write!(f, "({c})*{alpha}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i_hbar(dim: usize) -> OperatorExpr {
        OperatorExpr::hbar(dim).scale(&GaussRat::i())
    }

    #[test]
    fn canonical_commutation() {
        let c = OperatorExpr::q(2, 0).commutator(&OperatorExpr::p(2, 0));
        assert_eq!(c, i_hbar(2));
        assert!(OperatorExpr::q(2, 0).commutator(&OperatorExpr::p(2, 1)).is_zero());
    }

    #[test]
    fn single_swap() {
        let pq = OperatorExpr::p(1, 0).mul(&OperatorExpr::q(1, 0));
        let expected = OperatorExpr::q(1, 0).mul(&OperatorExpr::p(1, 0)).sub(&i_hbar(1));
        assert_eq!(pq, expected);
    }

    #[test]
    fn momentum_past_inverse_d() {
        // p1 D^-1 = D^-1 p1 + 2 i hbar lambda q1 D^-2
        let dim = 2;
        let lhs = OperatorExpr::p(dim, 0).mul(&OperatorExpr::d_inv(dim, 1));
        let first = OperatorExpr::d_inv(dim, 1).mul(&OperatorExpr::p(dim, 0));
        let second = i_hbar(dim)
            .mul(&OperatorExpr::lambda(dim))
            .mul(&OperatorExpr::q(dim, 0))
            .mul(&OperatorExpr::d_inv(dim, 2))
            .scale(&GaussRat::from_int(2));
        assert_eq!(lhs, first.add(&second));
    }

    #[test]
    fn identity_is_neutral() {
        let x = OperatorExpr::p(3, 1).mul(&OperatorExpr::q(3, 1)).add(&OperatorExpr::d_inv(3, 2));
        assert_eq!(x.mul(&OperatorExpr::identity(3)), x);
        assert_eq!(OperatorExpr::identity(3).mul(&x), x);
    }

    #[test]
    fn d_times_d_inverse() {
        let one = OperatorExpr::d(3).mul(&OperatorExpr::d_inv(3, 1));
        assert_eq!(one, OperatorExpr::identity(3));
    }

    #[test]
    fn conjugation_by_zero_is_identity_map() {
        let x = OperatorExpr::p(2, 0).pow(2).add(&OperatorExpr::q(2, 1));
        assert_eq!(x.conjugate_by_d_power(&BigRational::zero()), x);
    }

    #[test]
    fn conjugation_of_p_matches_direct_product() {
        // D^1 p1 D^-1 computed by brute multiplication
        let dim = 2;
        let direct = OperatorExpr::d(dim).mul(&OperatorExpr::p(dim, 0)).mul(&OperatorExpr::d_inv(dim, 1));
        let via_shift = OperatorExpr::p(dim, 0).conjugate_by_d_power(&BigRational::one());
        assert_eq!(direct, via_shift);
    }

    #[test]
    fn adjoint_of_q_p() {
        // (q p)^dagger = p q = q p - i hbar
        let dim = 1;
        let qp = OperatorExpr::q(dim, 0).mul(&OperatorExpr::p(dim, 0));
        let expected = qp.sub(&i_hbar(dim));
        assert_eq!(qp.formal_adjoint(), expected);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(3, 3), 1);
    }
}
