//! Exact symbolic algebra of differential operators with coefficients in
//! `Q(i)[q, lambda, omega, hbar][1/D]`.

pub mod builders;
pub mod coeff;
pub mod gauss;
pub mod operator;
pub mod parse;
pub mod poly;
pub mod verify;

pub use builders::{build_angular_invariants, build_fradkin, build_hamiltonian, Flavor, NamedOperator};
pub use coeff::Coefficient;
pub use gauss::GaussRat;
pub use operator::OperatorExpr;
pub use parse::parse;
pub use poly::{Poly, Var};
pub use verify::{verify_theorem, Check, Corruption, TheoremPart, VerificationReport, VerifyOptions};
