use darboux::algebra::{verify_theorem, TheoremPart, VerifyOptions};

use crate::report::{CliError, Output};
use crate::VerifyArgs;

pub fn run(args: &VerifyArgs, out: &Output) -> Result<bool, CliError> {
    let options = VerifyOptions {
        parts: if args.parts.is_empty() { TheoremPart::ALL.to_vec() } else { args.parts.clone() },
        corrupt: args.corrupt,
    };
    let report = verify_theorem(args.flavor, args.dim as usize, &options)?;
    let ok = report.all_zero();
    out.emit("verify", ok, &report, |w| {
        let mut t = csv::Writer::from_writer(w);
        t.write_record(["part", "lhs", "rhs", "relation", "zero", "residual_terms", "momentum_degree", "d_power"])?;
        for c in &report.checks {
            t.write_record([
                c.part.to_string(),
                c.lhs.clone(),
                c.rhs.clone(),
                c.relation.clone(),
                c.commutator_zero.to_string(),
                c.residual_terms.to_string(),
                c.momentum_degree.to_string(),
                c.d_power.to_string(),
            ])?;
        }
        t.flush()?;
        Ok(())
    })?;
    if !ok {
        eprintln!("darboux: {} of {} relations have nonzero residuals", report.failures().count(), report.checks.len());
    }
    Ok(ok)
}
