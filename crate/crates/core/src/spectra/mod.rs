//! Bound-state spectra of the quantum Hamiltonians.

pub mod census;
pub mod eigenfunction;
pub mod isospectral;
pub mod radial;
pub mod tridiag;

pub use census::{degeneracy_census, harmonic_dimension, DegeneracyCensus, RadialShell};
pub use eigenfunction::{
    eigenfunction_value, hermite, operator_residual, partitions, residual_check, sample_points,
    CartesianEigenfunction, ResidualReport,
};
pub use isospectral::{isospectrality_check, FlavorTable, IsospectralityReport, PairDifference, RadialOperator};
pub use radial::{
    auto_q_max, effective_1d_problem, radial_wavefunctions, solve_bound_states, threshold_accumulation,
    AccumulationReport, AccumulationStep, LevelRecord, RadialProblem, RadialWavefunction, SpectrumReport,
};
pub use tridiag::{sign_changes, SymTridiagonal};
