use darboux::algebra::Flavor;
use darboux::spectra::{isospectrality_check, solve_bound_states, IsospectralityReport, RadialProblem, SpectrumReport};
use serde::Serialize;

use crate::report::{num, CliError, Output};
use crate::{SpectrumArgs, SpectrumFlavor};

/// Largest accepted relative mismatch against the closed form.
pub const SPECTRUM_TOLERANCE: f64 = 1e-5;

#[derive(Serialize)]
struct Combined<'a> {
    spectrum: &'a SpectrumReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    isospectrality: Option<&'a IsospectralityReport>,
}

pub fn run(args: &SpectrumArgs, out: &Output) -> Result<bool, CliError> {
    let params = args.model.params()?;
    let levels = args.levels as usize;
    let flavor = match args.flavor {
        SpectrumFlavor::Schrodinger => Flavor::Schrodinger,
        SpectrumFlavor::Tpdm => Flavor::Tpdm,
        SpectrumFlavor::Tlb | SpectrumFlavor::All => Flavor::Tlb,
    };
    let problem = match args.qmax {
        Some(q) => RadialProblem::new(params, args.l, flavor, q, args.grid)?,
        None => RadialProblem::auto(params, args.l, flavor, levels, args.grid)?,
    };
    let spectrum = solve_bound_states(&problem, levels)?;
    let iso = match args.flavor {
        SpectrumFlavor::All => Some(isospectrality_check(&params, args.l, levels)?),
        _ => None,
    };
    let mut ok = spectrum.is_complete() && spectrum.max_rel_residual <= SPECTRUM_TOLERANCE;
    if let Some(rep) = &iso {
        ok &= rep.agree;
    }
    for w in &spectrum.warnings {
        eprintln!("darboux: warning: {w}");
    }
    let combined = Combined { spectrum: &spectrum, isospectrality: iso.as_ref() };
    out.emit("spectrum", ok, &combined, |w| match &iso {
        None => spectrum.write_csv(w).map_err(CliError::from),
        Some(rep) => {
            let mut t = csv::Writer::from_writer(w);
            t.write_record(["n_r", "n", "e_closed", "e_numeric", "schrodinger", "tlb", "tpdm"])?;
            for (k, lv) in spectrum.levels.iter().enumerate() {
                let mut row = vec![lv.n_r.to_string(), lv.n.to_string(), num(lv.e_closed), num(lv.e_numeric)];
                row.extend(rep.tables.iter().map(|tab| tab.eigenvalues.get(k).map_or(String::new(), |e| num(*e))));
                t.write_record(&row)?;
            }
            t.flush()?;
            Ok(())
        }
    })?;
    if !ok {
        eprintln!(
            "darboux: {} of {} levels resolved, max relative mismatch {:.3e} (tolerance {SPECTRUM_TOLERANCE:e})",
            spectrum.levels.len(),
            spectrum.requested_levels,
            spectrum.max_rel_residual
        );
    }
    Ok(ok)
}
