//! Exact verification of the superintegrability statements: every
//! commutator is normal-ordered and compared with the zero operator.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::builders::{
    build_angular_invariants, build_fradkin, build_hamiltonian, lower_casimir, rat, schrodinger_hamiltonian,
    sl2_realization, upper_casimir, Flavor,
};
use super::gauss::GaussRat;
use super::operator::OperatorExpr;
use crate::error::{Error, Result};

/// Momentum degree and `D`-power ceilings for any verified residual.
pub const MAX_RESIDUAL_MOMENTUM_DEGREE: u32 = 4;
pub const MAX_RESIDUAL_D_POWER: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremPart {
    /// Hamiltonian commutes with every angular invariant and Fradkin entry.
    I,
    /// Involution within `{H, C^(m)}`, `{H, C_(m)}` and `{I_ii}`.
    Ii,
    /// sl(2,R) relations of the quadratic realization.
    Sl2,
    /// Trace identity, defining identities and similarity relations.
    Identities,
    /// Formal self-adjointness with respect to the natural weight.
    Adjoint,
}

impl TheoremPart {
    pub const ALL: [TheoremPart; 5] =
        [TheoremPart::I, TheoremPart::Ii, TheoremPart::Sl2, TheoremPart::Identities, TheoremPart::Adjoint];
}

impl FromStr for TheoremPart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(TheoremPart::I),
            "ii" | "2" => Ok(TheoremPart::Ii),
            "sl2" => Ok(TheoremPart::Sl2),
            "identities" | "id" => Ok(TheoremPart::Identities),
            "adjoint" | "iv" => Ok(TheoremPart::Adjoint),
            other => Err(Error::InvalidParams(format!("unknown theorem part `{other}`"))),
        }
    }
}

impl fmt::Display for TheoremPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TheoremPart::I => "i",
            TheoremPart::Ii => "ii",
            TheoremPart::Sl2 => "sl2",
            TheoremPart::Identities => "identities",
            TheoremPart::Adjoint => "adjoint",
        };
        f.write_str(s)
    }
}

/// One checked relation. For commutator checks the residual is
/// `[lhs, rhs]` minus its expected value; for identities it is `lhs - rhs`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub part: TheoremPart,
    pub lhs: String,
    pub rhs: String,
    pub relation: String,
    pub commutator_zero: bool,
    pub residual_terms: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual: Option<String>,
    pub momentum_degree: u32,
    pub d_power: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub flavor: Flavor,
    #[serde(rename = "N")]
    pub dim: usize,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_zero(&self) -> bool {
        self.checks.iter().all(|c| c.commutator_zero)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.commutator_zero)
    }

    /// Residuals stay inside the expected degree envelope.
    pub fn within_degree_bound(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.momentum_degree <= MAX_RESIDUAL_MOMENTUM_DEGREE && c.d_power <= MAX_RESIDUAL_D_POWER)
    }
}

/// Injected fault for mutation testing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corruption {
    /// Drop the `omega^2 q_i q_j` term from the given Fradkin entry.
    DropOmegaTerm { i: usize, j: usize },
}

impl FromStr for Corruption {
    type Err = Error;
    /// Accepts `Iij`, e.g. `I11` or `I23` (1-based).
    fn from_str(s: &str) -> Result<Self> {
        let b = s.as_bytes();
        if b.len() == 3 && (b[0] == b'I' || b[0] == b'i') && b[1].is_ascii_digit() && b[2].is_ascii_digit() {
            let i = (b[1] - b'0') as usize;
            let j = (b[2] - b'0') as usize;
            if i >= 1 && j >= 1 {
                return Ok(Corruption::DropOmegaTerm { i: i - 1, j: j - 1 });
            }
        }
        Err(Error::InvalidParams(format!("unrecognised corruption `{s}` (expected e.g. I11)")))
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub parts: Vec<TheoremPart>,
    pub corrupt: Option<Corruption>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { parts: TheoremPart::ALL.to_vec(), corrupt: None }
    }
}

enum Job {
    Commutator { part: TheoremPart, lhs: String, rhs: String, a: OperatorExpr, b: OperatorExpr, expected: OperatorExpr },
    Equality { part: TheoremPart, lhs: String, rhs: String, a: OperatorExpr, b: OperatorExpr },
}

impl Job {
    fn commutes(part: TheoremPart, lhs: String, rhs: String, a: &OperatorExpr, b: &OperatorExpr) -> Job {
        let dim = a.dim();
        Job::Commutator { part, lhs, rhs, a: a.clone(), b: b.clone(), expected: OperatorExpr::zero(dim) }
    }

    fn run(self) -> Check {
        let (part, lhs, rhs, relation, residual) = match self {
            Job::Commutator { part, lhs, rhs, a, b, expected } => {
                let relation = if expected.is_zero() {
                    format!("[{lhs}, {rhs}] = 0")
                } else {
                    format!("[{lhs}, {rhs}] = {expected}")
                };
                (part, lhs, rhs, relation, a.commutator(&b).sub(&expected))
            }
            Job::Equality { part, lhs, rhs, a, b } => {
                let relation = format!("{lhs} = {rhs}");
                (part, lhs, rhs, relation, a.sub(&b))
            }
        };
        let zero = residual.is_zero();
        Check {
            part,
            lhs,
            rhs,
            relation,
            commutator_zero: zero,
            residual_terms: residual.len(),
            residual: (!zero).then(|| residual.to_string()),
            momentum_degree: residual.max_momentum_degree(),
            d_power: residual.max_d_power(),
        }
    }
}

fn similarity_label(a: &num_rational::BigRational) -> String {
    if a.is_integer() {
        format!("D^({})", a.numer())
    } else {
        format!("D^({}/{})", a.numer(), a.denom())
    }
}

/// Runs the requested parts of the superintegrability theorem for one
/// prescription and dimension.
pub fn verify_theorem(flavor: Flavor, dim: usize, options: &VerifyOptions) -> Result<VerificationReport> {
    if !Flavor::SUPERINTEGRABLE.contains(&flavor) {
        return Err(Error::InvalidParams(format!("{flavor} is not a superintegrable prescription")));
    }
    let h = build_hamiltonian(flavor, dim)?;
    let h_name = flavor.hamiltonian_name();
    let angular = build_angular_invariants(dim)?;
    let mut fradkin = build_fradkin(flavor, dim)?;
    if let Some(Corruption::DropOmegaTerm { i, j }) = options.corrupt {
        if i >= dim || j >= dim {
            return Err(Error::InvalidParams(format!("corruption index out of range for N = {dim}")));
        }
        let w2qq = OperatorExpr::omega(dim).pow(2).mul(&OperatorExpr::q(dim, i)).mul(&OperatorExpr::q(dim, j));
        fradkin[i][j] = fradkin[i][j].sub(&w2qq);
    }
    let fname = |i: usize, j: usize| flavor.fradkin_name(i, j);
    let mut jobs: Vec<Job> = Vec::new();
    let wants = |p: TheoremPart| options.parts.contains(&p);

    if wants(TheoremPart::I) {
        for c in &angular {
            jobs.push(Job::commutes(TheoremPart::I, h_name.clone(), c.name.clone(), &h, &c.op));
        }
        for i in 0..dim {
            for j in 0..dim {
                jobs.push(Job::commutes(TheoremPart::I, h_name.clone(), fname(i, j), &h, &fradkin[i][j]));
            }
        }
    }

    if wants(TheoremPart::Ii) {
        for i in 0..dim {
            for j in (i + 1)..dim {
                jobs.push(Job::commutes(TheoremPart::Ii, fname(i, i), fname(j, j), &fradkin[i][i], &fradkin[j][j]));
            }
        }
        for m in 2..=dim {
            for k in (m + 1)..=dim {
                jobs.push(Job::commutes(
                    TheoremPart::Ii,
                    format!("C^({m})"),
                    format!("C^({k})"),
                    &upper_casimir(dim, m),
                    &upper_casimir(dim, k),
                ));
                jobs.push(Job::commutes(
                    TheoremPart::Ii,
                    format!("C_({m})"),
                    format!("C_({k})"),
                    &lower_casimir(dim, m),
                    &lower_casimir(dim, k),
                ));
            }
        }
    }

    if wants(TheoremPart::Sl2) {
        let [jp, jm, j3] = sl2_realization(dim);
        let i_hbar = |k: i64| OperatorExpr::hbar(dim).scale(&GaussRat::new(num_traits::Zero::zero(), rat(k, 1)));
        jobs.push(Job::Commutator {
            part: TheoremPart::Sl2,
            lhs: "J3".into(),
            rhs: "J+".into(),
            expected: i_hbar(2).mul(&jp),
            a: j3.clone(),
            b: jp.clone(),
        });
        jobs.push(Job::Commutator {
            part: TheoremPart::Sl2,
            lhs: "J3".into(),
            rhs: "J-".into(),
            expected: i_hbar(-2).mul(&jm),
            a: j3.clone(),
            b: jm.clone(),
        });
        jobs.push(Job::Commutator {
            part: TheoremPart::Sl2,
            lhs: "J-".into(),
            rhs: "J+".into(),
            expected: i_hbar(4).mul(&j3),
            a: jm,
            b: jp,
        });
    }

    if wants(TheoremPart::Identities) {
        let trace = (0..dim)
            .fold(OperatorExpr::zero(dim), |acc, i| acc.add(&fradkin[i][i]))
            .scale(&GaussRat::from_frac(1, 2));
        let trace_name = format!("1/2 sum_i {}", fname(0, 0).replace("[1,1]", "[i,i]"));
        jobs.push(Job::Equality { part: TheoremPart::Identities, lhs: h_name.clone(), rhs: trace_name, a: h.clone(), b: trace });
        for i in 0..dim {
            for j in (i + 1)..dim {
                jobs.push(Job::Equality {
                    part: TheoremPart::Identities,
                    lhs: fname(i, j),
                    rhs: fname(j, i),
                    a: fradkin[i][j].clone(),
                    b: fradkin[j][i].clone(),
                });
            }
        }
        if flavor != Flavor::Schrodinger {
            let a = flavor.similarity_exponent(dim).expect("superintegrable flavor");
            let label = similarity_label(&a);
            let base_h = schrodinger_hamiltonian(dim);
            let base_fradkin = build_fradkin(Flavor::Schrodinger, dim)?;
            jobs.push(Job::Equality {
                part: TheoremPart::Identities,
                lhs: h_name.clone(),
                rhs: format!("{label} H {label}^-1"),
                a: h.clone(),
                b: base_h.conjugate_by_d_power(&a),
            });
            for i in 0..dim {
                for j in 0..dim {
                    jobs.push(Job::Equality {
                        part: TheoremPart::Identities,
                        lhs: fname(i, j),
                        rhs: format!("{label} {} {label}^-1", Flavor::Schrodinger.fradkin_name(i, j)),
                        a: fradkin[i][j].clone(),
                        b: base_fradkin[i][j].conjugate_by_d_power(&a),
                    });
                }
            }
            for c in &angular {
                jobs.push(Job::Equality {
                    part: TheoremPart::Identities,
                    lhs: c.name.clone(),
                    rhs: format!("{label} {} {label}^-1", c.name),
                    a: c.op.clone(),
                    b: c.op.conjugate_by_d_power(&a),
                });
            }
        }
    }

    if wants(TheoremPart::Adjoint) {
        // weight w: adjoint is w^-1 X^dagger w = D^-k X^dagger D^k
        let (weight, k) = match flavor {
            Flavor::Schrodinger => ("D", rat(-1, 1)),
            Flavor::Tlb => ("D^(N/2)", rat(-(dim as i64), 2)),
            _ => ("1", rat(0, 1)),
        };
        let adj = h.formal_adjoint().conjugate_by_d_power(&k);
        jobs.push(Job::Equality {
            part: TheoremPart::Adjoint,
            lhs: format!("{h_name}^dagger[{weight}]"),
            rhs: h_name.clone(),
            a: adj,
            b: h.clone(),
        });
    }

    let checks: Vec<Check> = jobs.into_par_iter().map(Job::run).collect();
    Ok(VerificationReport { flavor, dim, checks })
}

/// Equalities between the three Hamiltonians related by powers of `D`,
/// returned as `(label, holds)`.
pub fn similarity_identities(dim: usize) -> Result<Vec<(String, bool)>> {
    let h = build_hamiltonian(Flavor::Schrodinger, dim)?;
    let tlb = build_hamiltonian(Flavor::Tlb, dim)?;
    let tpdm = build_hamiltonian(Flavor::Tpdm, dim)?;
    let a_tlb = Flavor::Tlb.similarity_exponent(dim).unwrap();
    Ok(vec![
        ("H_TLB = D^((2-N)/4) H D^(-(2-N)/4)".to_string(), h.conjugate_by_d_power(&a_tlb) == tlb),
        ("H_TPDM = D^(1/2) H D^(-1/2)".to_string(), h.conjugate_by_d_power(&rat(1, 2)) == tpdm),
        ("H_TPDM = D^(N/4) H_TLB D^(-N/4)".to_string(), tlb.conjugate_by_d_power(&rat(dim as i64, 4)) == tpdm),
    ])
}
