//! Constructors for the Hamiltonians and symmetry operators of the
//! curved oscillator under each quantization prescription.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::coeff::Coefficient;
use super::gauss::GaussRat;
use super::operator::OperatorExpr;
use super::poly::{Poly, Var};
use crate::error::{Error, Result};

/// Quantization prescription for the kinetic term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Direct ordering `p^2 / (2D)`.
    Schrodinger,
    /// Laplace-Beltrami kinetic term.
    Lb,
    /// Laplace-Beltrami plus the curvature potential (conformal Laplacian).
    Tlb,
    /// Symmetric position-dependent-mass ordering `p D^-1 p / 2`.
    Pdm,
    /// PDM plus the compensating central potential.
    Tpdm,
}

impl Flavor {
    pub const ALL: [Flavor; 5] = [Flavor::Schrodinger, Flavor::Lb, Flavor::Tlb, Flavor::Pdm, Flavor::Tpdm];
    /// Prescriptions that carry a Fradkin tensor.
    pub const SUPERINTEGRABLE: [Flavor; 3] = [Flavor::Schrodinger, Flavor::Tlb, Flavor::Tpdm];

    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Schrodinger => "schrodinger",
            Flavor::Lb => "lb",
            Flavor::Tlb => "tlb",
            Flavor::Pdm => "pdm",
            Flavor::Tpdm => "tpdm",
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Flavor::Schrodinger => "",
            Flavor::Lb => "_LB",
            Flavor::Tlb => "_TLB",
            Flavor::Pdm => "_PDM",
            Flavor::Tpdm => "_TPDM",
        }
    }

    pub fn hamiltonian_name(self) -> String {
        format!("H{}", self.tag())
    }

    pub fn fradkin_name(self, i: usize, j: usize) -> String {
        format!("I{}[{},{}]", self.tag(), i + 1, j + 1)
    }

    /// Exponent `a` with `H_flavor = D^a H D^-a`, when one exists.
    pub fn similarity_exponent(self, dim: usize) -> Option<BigRational> {
        match self {
            Flavor::Schrodinger => Some(BigRational::from_integer(0.into())),
            Flavor::Tlb => Some(rat(2 - dim as i64, 4)),
            Flavor::Tpdm => Some(rat(1, 2)),
            Flavor::Lb | Flavor::Pdm => None,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "schrodinger" | "schroedinger" | "direct" => Ok(Flavor::Schrodinger),
            "lb" => Ok(Flavor::Lb),
            "tlb" => Ok(Flavor::Tlb),
            "pdm" => Ok(Flavor::Pdm),
            "tpdm" => Ok(Flavor::Tpdm),
            other => Err(Error::UnknownFlavor(other.to_string())),
        }
    }
}

pub(crate) fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn c(num: i64, den: i64) -> GaussRat {
    GaussRat::from_frac(num, den)
}

fn i_hbar(dim: usize) -> OperatorExpr {
    OperatorExpr::hbar(dim).scale(&GaussRat::i())
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || dim > super::poly::MAX_DIM {
        return Err(Error::InvalidParams(format!("dimension must lie in 2..={}, got {dim}", super::poly::MAX_DIM)));
    }
    Ok(())
}

/// `q^2 = sum q_i^2`.
pub fn q_squared(dim: usize) -> OperatorExpr {
    OperatorExpr::from_poly(dim, Poly::radius_squared(dim))
}

/// `p^2 = sum p_i^2`.
pub fn p_squared(dim: usize) -> OperatorExpr {
    (0..dim).fold(OperatorExpr::zero(dim), |acc, i| {
        let p = OperatorExpr::p(dim, i);
        acc.add(&p.mul(&p))
    })
}

/// `q . p = sum q_i p_i`.
pub fn q_dot_p(dim: usize) -> OperatorExpr {
    (0..dim).fold(OperatorExpr::zero(dim), |acc, i| acc.add(&OperatorExpr::q(dim, i).mul(&OperatorExpr::p(dim, i))))
}

/// Oscillator potential `omega^2 q^2 / (2D)`.
pub fn oscillator_potential(dim: usize) -> OperatorExpr {
    let w2 = OperatorExpr::omega(dim).pow(2);
    w2.mul(&q_squared(dim)).mul(&OperatorExpr::d_inv(dim, 1)).scale(&c(1, 2))
}

fn lambda_n2(dim: usize) -> GaussRat {
    GaussRat::from_int(dim as i64 - 2)
}

/// Momentum-dependent LB correction `-i hbar lambda (N-2) (q.p) / (2 D^2)`.
pub fn u1(dim: usize) -> OperatorExpr {
    i_hbar(dim)
        .mul(&OperatorExpr::lambda(dim))
        .mul(&OperatorExpr::d_inv(dim, 2))
        .mul(&q_dot_p(dim))
        .scale(&(&lambda_n2(dim) * &c(-1, 2)))
}

/// Curvature potential `-hbar^2 lambda (N-2) (2N + 3 lambda q^2 (N-2)) / (8 D^3)`.
pub fn u2_coefficient(dim: usize) -> Coefficient {
    let n = dim as i64;
    let inner = &Poly::int(2 * n) + &(&Poly::var(Var::Lambda) * &Poly::radius_squared(dim)).scale(&GaussRat::from_int(3 * (n - 2)));
    let pre = &Poly::var(Var::Hbar).pow(2) * &Poly::var(Var::Lambda);
    Coefficient::new(dim, (&pre * &inner).scale(&c(-(n - 2), 8)), 3)
}

pub fn u2(dim: usize) -> OperatorExpr {
    OperatorExpr::from_coeff(u2_coefficient(dim))
}

/// PDM correction `i hbar lambda (q.p) / D^2`.
pub fn v1(dim: usize) -> OperatorExpr {
    i_hbar(dim)
        .mul(&OperatorExpr::lambda(dim))
        .mul(&OperatorExpr::d_inv(dim, 2))
        .mul(&q_dot_p(dim))
}

/// `hbar^2 lambda (N + lambda q^2 (N-3)) / (2 D^3)`.
pub fn v2(dim: usize) -> OperatorExpr {
    let n = dim as i64;
    let inner = &Poly::int(n) + &(&Poly::var(Var::Lambda) * &Poly::radius_squared(dim)).scale(&GaussRat::from_int(n - 3));
    let pre = &Poly::var(Var::Hbar).pow(2) * &Poly::var(Var::Lambda);
    OperatorExpr::from_coeff(Coefficient::new(dim, (&pre * &inner).scale(&c(1, 2)), 3))
}

/// Direct quantization `p^2/(2D) + omega^2 q^2/(2D)`.
pub fn schrodinger_hamiltonian(dim: usize) -> OperatorExpr {
    OperatorExpr::d_inv(dim, 1).mul(&p_squared(dim)).scale(&c(1, 2)).add(&oscillator_potential(dim))
}

/// `-hbar^2/2 Delta_LB + U` built from the metric `g = D delta`:
/// `-hbar^2 Delta_LB = sum D^(-N/2) p_i D^(N/2 - 1) p_i`.
pub fn laplace_beltrami_hamiltonian(dim: usize) -> OperatorExpr {
    let n = dim as i64;
    // D^(-N/2) p_i D^(N/2-1) = D^-1 (D^-(N/2-1) p_i D^(N/2-1))
    let a = rat(-(n - 2), 2);
    let mut kin = OperatorExpr::zero(dim);
    for i in 0..dim {
        let p = OperatorExpr::p(dim, i);
        let twisted = p.conjugate_by_d_power(&a);
        kin = kin.add(&OperatorExpr::d_inv(dim, 1).mul(&twisted).mul(&p));
    }
    kin.scale(&c(1, 2)).add(&oscillator_potential(dim))
}

/// `(1/2) sum p_i D^-1 p_i + U`.
pub fn symmetric_pdm_hamiltonian(dim: usize) -> OperatorExpr {
    let mut kin = OperatorExpr::zero(dim);
    for i in 0..dim {
        let p = OperatorExpr::p(dim, i);
        kin = kin.add(&p.mul(&OperatorExpr::d_inv(dim, 1)).mul(&p));
    }
    kin.scale(&c(1, 2)).add(&oscillator_potential(dim))
}

/// Hamiltonian of the requested prescription, assembled from the
/// direct Hamiltonian plus its correction terms.
pub fn build_hamiltonian(flavor: Flavor, dim: usize) -> Result<OperatorExpr> {
    check_dim(dim)?;
    let h = schrodinger_hamiltonian(dim);
    Ok(match flavor {
        Flavor::Schrodinger => h,
        Flavor::Lb => h.add(&u1(dim)),
        Flavor::Tlb => h.add(&u1(dim)).add(&u2(dim)),
        Flavor::Pdm => h.add(&v1(dim)),
        Flavor::Tpdm => h.add(&v1(dim)).add(&v2(dim)),
    })
}

/// `L_ij = q_i p_j - q_j p_i`.
pub fn angular_momentum(dim: usize, i: usize, j: usize) -> OperatorExpr {
    OperatorExpr::q(dim, i)
        .mul(&OperatorExpr::p(dim, j))
        .sub(&OperatorExpr::q(dim, j).mul(&OperatorExpr::p(dim, i)))
}

fn sum_l_squared(dim: usize, lo: usize, hi: usize) -> OperatorExpr {
    let mut out = OperatorExpr::zero(dim);
    for i in lo..hi {
        for j in (i + 1)..hi {
            let l = angular_momentum(dim, i, j);
            out = out.add(&l.mul(&l));
        }
    }
    out
}

/// A named Casimir-type angular invariant.
#[derive(Clone, Debug)]
pub struct NamedOperator {
    pub name: String,
    pub op: OperatorExpr,
}

/// `C^(m)` (leading `m` coordinates) for `m = 2..N` and `C_(m)` (trailing
/// `m` coordinates) for `m = 2..N-1`; `C_(N) = C^(N)` is listed once.
pub fn build_angular_invariants(dim: usize) -> Result<Vec<NamedOperator>> {
    check_dim(dim)?;
    let mut out = Vec::with_capacity(2 * dim - 3);
    for m in 2..=dim {
        out.push(NamedOperator { name: format!("C^({m})"), op: sum_l_squared(dim, 0, m) });
    }
    for m in 2..dim {
        out.push(NamedOperator { name: format!("C_({m})"), op: sum_l_squared(dim, dim - m, dim) });
    }
    Ok(out)
}

/// `C_(m)` for `m = 2..N`, trailing coordinates.
pub fn lower_casimir(dim: usize, m: usize) -> OperatorExpr {
    sum_l_squared(dim, dim - m, dim)
}

/// `C^(m)` for `m = 2..N`, leading coordinates.
pub fn upper_casimir(dim: usize, m: usize) -> OperatorExpr {
    sum_l_squared(dim, 0, m)
}

fn qq(dim: usize, i: usize, j: usize) -> OperatorExpr {
    OperatorExpr::q(dim, i).mul(&OperatorExpr::q(dim, j))
}

fn pp(dim: usize, i: usize, j: usize) -> OperatorExpr {
    OperatorExpr::p(dim, i).mul(&OperatorExpr::p(dim, j))
}

fn qp_sym(dim: usize, i: usize, j: usize) -> OperatorExpr {
    OperatorExpr::q(dim, i)
        .mul(&OperatorExpr::p(dim, j))
        .add(&OperatorExpr::q(dim, j).mul(&OperatorExpr::p(dim, i)))
}

/// Common tail `-2 lambda q_i q_j H + omega^2 q_i q_j`.
fn fradkin_tail(dim: usize, i: usize, j: usize, h: &OperatorExpr) -> OperatorExpr {
    let q = qq(dim, i, j);
    let lam = OperatorExpr::lambda(dim);
    q.mul(h)
        .mul(&lam)
        .scale(&GaussRat::from_int(-2))
        .add(&OperatorExpr::omega(dim).pow(2).mul(&q))
}

/// Fradkin tensor `I[i][j]` of the given prescription, each entry written
/// out explicitly.
pub fn build_fradkin(flavor: Flavor, dim: usize) -> Result<Vec<Vec<OperatorExpr>>> {
    check_dim(dim)?;
    let h = build_hamiltonian(flavor, dim)?;
    let n = dim as i64;
    let lam = OperatorExpr::lambda(dim);
    let hb2 = OperatorExpr::hbar(dim).pow(2);
    let entry = |i: usize, j: usize| -> Result<OperatorExpr> {
        let base = pp(dim, i, j).add(&fradkin_tail(dim, i, j, &h));
        let delta = if i == j { 1 } else { 0 };
        match flavor {
            Flavor::Schrodinger => Ok(base),
            Flavor::Tlb => {
                // -(N-2) i hbar lambda/(2D) (q_i p_j + q_j p_i)
                let t1 = i_hbar(dim)
                    .mul(&lam)
                    .mul(&OperatorExpr::d_inv(dim, 1))
                    .mul(&qp_sym(dim, i, j))
                    .scale(&c(-(n - 2), 2));
                // (N-2) hbar^2 lambda^2 q_i q_j / D^2 (1 - (N-2)/4)
                let t2 = hb2
                    .mul(&lam.pow(2))
                    .mul(&qq(dim, i, j))
                    .mul(&OperatorExpr::d_inv(dim, 2))
                    .scale(&(&GaussRat::from_int(n - 2) * &c(6 - n, 4)));
                // -(N-2) hbar^2 lambda / (2D) delta_ij
                let t3 = hb2
                    .mul(&lam)
                    .mul(&OperatorExpr::d_inv(dim, 1))
                    .scale(&c(-(n - 2) * delta, 2));
                Ok(base.add(&t1).add(&t2).add(&t3))
            }
            Flavor::Tpdm => {
                // i hbar lambda / D (q_i p_j + q_j p_i)
                let t1 = i_hbar(dim).mul(&lam).mul(&OperatorExpr::d_inv(dim, 1)).mul(&qp_sym(dim, i, j));
                // hbar^2 lambda / D (delta_ij - 3 lambda q_i q_j / D)
                let t2 = hb2
                    .mul(&lam)
                    .mul(&OperatorExpr::d_inv(dim, 1))
                    .mul(
                        &OperatorExpr::int(dim, delta)
                            .sub(&lam.mul(&qq(dim, i, j)).mul(&OperatorExpr::d_inv(dim, 1)).scale(&GaussRat::from_int(3))),
                    );
                Ok(base.add(&t1).add(&t2))
            }
            other => Err(Error::InvalidParams(format!("{other} has no Fradkin tensor"))),
        }
    };
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut row = Vec::with_capacity(dim);
        for j in 0..dim {
            row.push(entry(i, j)?);
        }
        out.push(row);
    }
    Ok(out)
}

/// sl(2,R) realization `J+ = p^2`, `J- = q^2`, `J3 = q.p - i hbar N / 2`.
pub fn sl2_realization(dim: usize) -> [OperatorExpr; 3] {
    let j3 = q_dot_p(dim).sub(&i_hbar(dim).scale(&c(dim as i64, 2)));
    [p_squared(dim), q_squared(dim), j3]
}

/// Scalar curvature of `g = D delta` from the conformal-flat formula
/// `R = -e^(-2 phi) (2(N-1) Lap phi + (N-2)(N-1) |grad phi|^2)`, `e^(2 phi) = D`.
pub fn scalar_curvature_coefficient(dim: usize) -> Coefficient {
    let n = dim as i64;
    // grad phi = lambda q / D
    let grad: Vec<Coefficient> = (0..dim)
        .map(|i| Coefficient::new(dim, &Poly::var(Var::Lambda) * &Poly::var(Var::Q(i)), 1))
        .collect();
    let lap = grad
        .iter()
        .enumerate()
        .fold(Coefficient::zero(dim), |acc, (i, g)| acc.add(&g.derivative(i)));
    let grad2 = grad.iter().fold(Coefficient::zero(dim), |acc, g| acc.add(&g.mul(g)));
    let bracket = lap
        .scale(&GaussRat::from_int(2 * (n - 1)))
        .add(&grad2.scale(&GaussRat::from_int((n - 2) * (n - 1))));
    bracket.mul(&Coefficient::inv_d_power(dim, 1)).neg()
}

/// Whether `U2 = hbar^2 (N-2) R / (8 (N-1))` holds identically.
pub fn conformal_potential_identity(dim: usize) -> Result<bool> {
    check_dim(dim)?;
    let n = dim as i64;
    let r = scalar_curvature_coefficient(dim);
    let rhs = r
        .mul(&Coefficient::poly(dim, Poly::var(Var::Hbar).pow(2)))
        .scale(&c(n - 2, 8 * (n - 1)));
    Ok(rhs == u2_coefficient(dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse;

    #[test]
    fn parsed_hamiltonian_matches_builder() {
        let text = "(1/(2*D))*(p1^2+p2^2) + (omega^2/(2*D))*(q1^2+q2^2)";
        assert_eq!(parse(text, 2).unwrap(), schrodinger_hamiltonian(2));
    }

    #[test]
    fn lb_equals_direct_in_two_dimensions() {
        assert_eq!(build_hamiltonian(Flavor::Lb, 2).unwrap(), build_hamiltonian(Flavor::Schrodinger, 2).unwrap());
        assert_ne!(build_hamiltonian(Flavor::Lb, 3).unwrap(), build_hamiltonian(Flavor::Schrodinger, 3).unwrap());
    }

    #[test]
    fn lb_from_metric_equals_h_plus_u1() {
        for dim in 2..=4 {
            assert_eq!(laplace_beltrami_hamiltonian(dim), build_hamiltonian(Flavor::Lb, dim).unwrap());
        }
    }

    #[test]
    fn pdm_from_ordering_equals_h_plus_v1() {
        for dim in 2..=4 {
            assert_eq!(symmetric_pdm_hamiltonian(dim), build_hamiltonian(Flavor::Pdm, dim).unwrap());
        }
    }

    #[test]
    fn tlb_minus_direct_minus_u1_is_u2() {
        let dim = 3;
        let diff = build_hamiltonian(Flavor::Tlb, dim)
            .unwrap()
            .sub(&schrodinger_hamiltonian(dim))
            .sub(&u1(dim));
        assert_eq!(diff, u2(dim));
    }

    #[test]
    fn tlb_flat_limit_is_flat_oscillator() {
        let flat = parse("1/2*(p1^2+p2^2+p3^2) + omega^2/2*(q1^2+q2^2+q3^2)", 3).unwrap();
        assert_eq!(build_hamiltonian(Flavor::Tlb, 3).unwrap().flat_limit(), flat);
    }

    #[test]
    fn angular_invariant_counts() {
        let two = build_angular_invariants(2).unwrap();
        assert_eq!(two.len(), 1);
        let l = angular_momentum(2, 0, 1);
        assert_eq!(two[0].op, l.mul(&l));
        assert_eq!(build_angular_invariants(3).unwrap().len(), 3);
        assert_eq!(build_angular_invariants(4).unwrap().len(), 5);
        assert_eq!(upper_casimir(4, 4), lower_casimir(4, 4));
    }

    #[test]
    fn flat_fradkin() {
        let t = build_fradkin(Flavor::Schrodinger, 2).unwrap();
        let expected = parse("p1*p2 + omega^2*q1*q2", 2).unwrap();
        assert_eq!(t[0][1].flat_limit(), expected);
    }

    #[test]
    fn tlb_tensor_in_two_dimensions_has_direct_form() {
        let a = build_fradkin(Flavor::Tlb, 2).unwrap();
        let b = build_fradkin(Flavor::Schrodinger, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn curvature_matches_closed_form() {
        // R = -lambda (N-1)(2N + 3(N-2) lambda q^2) / D^3
        for dim in 2..=5 {
            let n = dim as i64;
            let inner = &Poly::int(2 * n) + &(&Poly::var(Var::Lambda) * &Poly::radius_squared(dim)).scale(&GaussRat::from_int(3 * (n - 2)));
            let closed = Coefficient::new(dim, (&Poly::var(Var::Lambda) * &inner).scale(&GaussRat::from_int(-(n - 1))), 3);
            assert_eq!(scalar_curvature_coefficient(dim), closed, "N = {dim}");
        }
    }

    #[test]
    fn conformal_identity_holds() {
        for dim in 2..=5 {
            assert!(conformal_potential_identity(dim).unwrap());
        }
        assert!(u2_coefficient(2).is_zero());
    }

    #[test]
    fn flavor_parsing() {
        assert_eq!("TLB".parse::<Flavor>().unwrap(), Flavor::Tlb);
        assert!("weyl".parse::<Flavor>().is_err());
        assert!(build_fradkin(Flavor::Lb, 3).is_err());
        assert!(build_hamiltonian(Flavor::Tlb, 1).is_err());
    }
}
