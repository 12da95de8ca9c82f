use darboux::classical::{
    all_observables, hamiltonian, independence_rank, integrate, orbit_closure, poisson_bracket, random_bounded_state,
    ClosureReport, InvariantDrift, Observable, PhaseState, RankReport,
};
use darboux::ModelParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::report::{CliError, Output};
use crate::ClassicalArgs;

pub const DRIFT_TOLERANCE: f64 = 1e-7;

#[derive(Serialize)]
struct ClassicalReport {
    params: ModelParams,
    initial: PhaseState,
    energy: f64,
    t_end: f64,
    tolerance: f64,
    steps: usize,
    rejected_steps: usize,
    drift: Vec<InvariantDrift>,
    max_drift: f64,
    /// Largest `|{H, F}|` over all constants of motion at the initial point.
    max_bracket_with_h: f64,
    rank: RankReport,
    expected_rank: usize,
    closure: ClosureReport,
}

pub fn run(args: &ClassicalArgs, out: &Output) -> Result<bool, CliError> {
    let params = args.model.params()?;
    if !(args.t_end > 0.0 && args.tolerance > 0.0) {
        return Err(CliError::Usage("--t-end and --tolerance must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(out.seed);
    let initial = random_bounded_state(&params, &mut rng);
    let traj = integrate(&params, &initial, args.t_end, args.tolerance, args.samples)?;
    let max_bracket_with_h = all_observables(params.dim)
        .into_iter()
        .map(|o| poisson_bracket(&params, Observable::Hamiltonian, o, &initial).abs())
        .fold(0.0, f64::max);
    let rank = independence_rank(&params, &initial, 0)?;
    let closure = orbit_closure(&params, &initial, None, args.tolerance)?;
    let expected_rank = 2 * params.dim - 1;
    let report = ClassicalReport {
        params,
        energy: hamiltonian(&params, &initial),
        initial,
        t_end: args.t_end,
        tolerance: args.tolerance,
        steps: traj.steps,
        rejected_steps: traj.rejected_steps,
        max_drift: traj.max_drift(),
        drift: traj.drift.clone(),
        max_bracket_with_h,
        rank,
        expected_rank,
        closure,
    };
    let ok = report.max_drift < DRIFT_TOLERANCE && report.rank.rank == expected_rank;
    out.emit("classical", ok, &report, |w| traj.write_csv(w).map_err(CliError::from))?;
    if !ok {
        eprintln!(
            "darboux: max drift {:.3e} (tolerance {DRIFT_TOLERANCE:e}), rank {} (expected {expected_rank})",
            report.max_drift, report.rank.rank
        );
    }
    Ok(ok)
}
