//! Bound states of `-hbar^2/2 u'' + U_eff,l(Q) u = E u` on `[0, Q_max]`
//! with Dirichlet ends, discretized by second-order central differences
//! on a uniform vertex grid in the flattened coordinate `Q`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tridiag::{sign_changes, SymTridiagonal};
use crate::algebra::Flavor;
use crate::error::{Error, Result};
use crate::model::{ModelParams, Threshold};

pub const DEFAULT_POINTS: usize = 4000;
/// Levels above `(1 - margin) E_inf` are not trusted as bound states.
pub const THRESHOLD_MARGIN: f64 = 0.05;
/// Relative size of the target eigenfunction's Gaussian tail at `r_max`.
pub const TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub params: ModelParams,
    pub l: u32,
    pub flavor: Flavor,
    pub q_max: f64,
    /// Number of grid intervals; unknowns sit at `Q_j = j Q_max / M`,
    /// `j = 1..M-1`.
    pub points: usize,
}

impl RadialProblem {
    pub fn new(params: ModelParams, l: u32, flavor: Flavor, q_max: f64, points: usize) -> Result<Self> {
        params.validate()?;
        if !(q_max > 0.0 && q_max.is_finite()) {
            return Err(Error::InvalidParams(format!("Q_max must be positive, got {q_max}")));
        }
        if points < 100 {
            return Err(Error::InvalidParams(format!("grid needs at least 100 points, got {points}")));
        }
        if !Flavor::SUPERINTEGRABLE.contains(&flavor) {
            return Err(Error::InvalidParams(format!("{flavor} has no radial problem here")));
        }
        Ok(Self { params, l, flavor, q_max, points })
    }

    /// Problem with `Q_max` chosen from the Gaussian tail of the `levels`-th
    /// radial state (see [`auto_q_max`]).
    pub fn auto(params: ModelParams, l: u32, flavor: Flavor, levels: usize, points: usize) -> Result<Self> {
        let q_max = auto_q_max(&params, l, levels)?;
        Self::new(params, l, flavor, q_max, points)
    }

    pub fn step(&self) -> f64 {
        self.q_max / self.points as f64
    }

    pub fn with_points(&self, points: usize) -> Self {
        Self { points, ..self.clone() }
    }

    /// Interior grid in `Q` and the matching radii.
    pub fn grid(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let h = self.step();
        let q: Vec<f64> = (1..self.points).map(|j| j as f64 * h).collect();
        let r = q.iter().map(|&x| self.params.inverse_flattening(x)).collect::<Result<Vec<_>>>()?;
        Ok((q, r))
    }
}

/// `Q_max` such that the radial function of the highest requested level,
/// `r^(n + (N+1)/2) exp(-beta^2 r^2 / 2)` with `n = 2(levels-1) + l`,
/// has decayed to [`TAIL_TOLERANCE`] of its peak.
pub fn auto_q_max(params: &ModelParams, l: u32, levels: usize) -> Result<f64> {
    params.validate()?;
    if levels == 0 {
        return Err(Error::InvalidParams("at least one level is required".into()));
    }
    let n = 2 * (levels as u32 - 1) + l;
    let e = params.closed_form_energy(n);
    let big_omega = params
        .omega_eff(e)
        .filter(|w| *w > 0.0)
        .ok_or_else(|| Error::Domain("requested level lies above the continuum threshold".into()))?;
    let beta2 = big_omega / params.hbar;
    let a = n as f64 + (params.dim as f64 + 1.0) / 2.0;
    // log of r^a exp(-beta^2 r^2 / 2) relative to its peak at r^2 = a / beta^2
    let rel = |r: f64| a * (r * r * beta2 / a).ln() / 2.0 - beta2 * (r * r - a / beta2) / 2.0;
    let target = TAIL_TOLERANCE.ln();
    let mut lo = (a / beta2).sqrt();
    let mut hi = 2.0 * lo + 1.0;
    while rel(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rel(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(params.flattening_coordinate(hi))
}

/// Symmetric tridiagonal matrix of the discretized `u(Q)` problem.
pub fn effective_1d_problem(problem: &RadialProblem) -> Result<(SymTridiagonal, Vec<f64>, Vec<f64>)> {
    let (q, r) = problem.grid()?;
    let h = problem.step();
    let hb2 = problem.params.hbar * problem.params.hbar;
    let kin = hb2 / (h * h);
    let diag = r
        .iter()
        .map(|&ri| problem.params.quantum_effective_potential(problem.l, ri).map(|v| kin + v))
        .collect::<Result<Vec<_>>>()?;
    let off = vec![-0.5 * kin; diag.len() - 1];
    Ok((SymTridiagonal::new(diag, off)?, q, r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub n_r: u32,
    /// Principal number `n = 2 n_r + l`.
    pub n: u32,
    /// Richardson-extrapolated eigenvalue.
    pub e_numeric: f64,
    /// Eigenvalue on the base grid.
    pub e_base_grid: f64,
    pub e_closed: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    /// Observed order `log2((E_M - E_2M)/(E_2M - E_4M))`.
    pub convergence_order: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub params: ModelParams,
    pub l: u32,
    pub flavor: Flavor,
    pub q_max: f64,
    pub points: usize,
    pub threshold: Threshold,
    pub levels: Vec<LevelRecord>,
    pub requested_levels: usize,
    /// Eigenvalues of the base-grid matrix below the threshold.
    pub count_below_threshold: usize,
    pub max_rel_residual: f64,
    pub min_convergence_order: f64,
    pub warnings: Vec<String>,
}

impl SpectrumReport {
    pub fn is_complete(&self) -> bool {
        self.levels.len() == self.requested_levels
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "n_r",
            "n",
            "E_numeric",
            "E_base_grid",
            "E_closed",
            "abs_residual",
            "rel_residual",
            "convergence_order",
        ])
        .map_err(crate::classical::csv_err)?;
        for lv in &self.levels {
            out.write_record([
                lv.n_r.to_string(),
                lv.n.to_string(),
                fmt(lv.e_numeric),
                fmt(lv.e_base_grid),
                fmt(lv.e_closed),
                fmt(lv.abs_residual),
                fmt(lv.rel_residual),
                fmt(lv.convergence_order),
            ])
            .map_err(crate::classical::csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    crate::classical::fmt_f64(x)
}

/// Lowest eigenvalues on the grids `M`, `2M`, `4M`.
fn eigenvalue_ladder(problem: &RadialProblem, k: usize) -> Result<[Vec<f64>; 3]> {
    let grids = [problem.points, 2 * problem.points, 4 * problem.points];
    let vals: Vec<Vec<f64>> = grids
        .par_iter()
        .map(|&m| effective_1d_problem(&problem.with_points(m)).map(|(t, _, _)| t.lowest(k)))
        .collect::<Result<_>>()?;
    let mut it = vals.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// Solves for the lowest `k` radial levels, pairing the `n_r`-th with the
/// closed-form energy of `n = 2 n_r + l`.
pub fn solve_bound_states(problem: &RadialProblem, k: usize) -> Result<SpectrumReport> {
    if k == 0 {
        return Err(Error::InvalidParams("at least one level is required".into()));
    }
    let params = problem.params;
    let mut warnings = Vec::new();
    if params.dim == 2 && problem.l == 0 {
        warnings.push(
            "N = 2, l = 0: effective potential is unbounded below at the origin; \
             the Dirichlet condition selects the regular solution but convergence is slow"
                .to_string(),
        );
    }
    let threshold = params.continuum_threshold();
    let (base, _, r) = effective_1d_problem(problem)?;
    let count_below = match threshold {
        Threshold::Finite(e) => base.count_below(e),
        Threshold::Infinite => base.len(),
    };
    // resolution heuristic: 20 points per shortest local wavelength
    let top_energy = match threshold {
        Threshold::Finite(e) => e,
        Threshold::Infinite => params.closed_form_energy(2 * (k as u32 - 1) + problem.l),
    };
    let v_min = base.diag.iter().fold(f64::INFINITY, |m, d| m.min(*d)) - params.hbar.powi(2) / problem.step().powi(2);
    if top_energy > v_min {
        let wavelength = std::f64::consts::TAU * params.hbar / (2.0 * (top_energy - v_min)).sqrt();
        if problem.step() * 20.0 > wavelength {
            warnings.push(format!(
                "grid spacing {:.3e} gives fewer than 20 points per wavelength ({:.3e}) near the threshold",
                problem.step(),
                wavelength
            ));
        }
    }
    if let Some(&r_end) = r.last() {
        if let Ok(v) = params.quantum_effective_potential(problem.l, r_end) {
            let top = params.closed_form_energy(2 * (k as u32 - 1) + problem.l);
            if v < top {
                warnings.push(format!("box edge potential {v:.4} lies below the highest target level {top:.4}"));
            }
        }
    }

    let ladder = eigenvalue_ladder(problem, k)?;
    let trusted = match threshold {
        Threshold::Finite(e) => (1.0 - THRESHOLD_MARGIN) * e,
        Threshold::Infinite => f64::INFINITY,
    };
    let mut levels = Vec::with_capacity(k);
    for n_r in 0..k.min(ladder[0].len()) {
        let (e1, e2, e4) = (ladder[0][n_r], ladder[1][n_r], ladder[2][n_r]);
        let e = (4.0 * e4 - e2) / 3.0;
        if !(e < trusted) {
            break;
        }
        let order = ((e1 - e2) / (e2 - e4)).abs().log2();
        let n = 2 * n_r as u32 + problem.l;
        let e_closed = params.closed_form_energy(n);
        let abs = (e - e_closed).abs();
        levels.push(LevelRecord {
            n_r: n_r as u32,
            n,
            e_numeric: e,
            e_base_grid: e1,
            e_closed,
            abs_residual: abs,
            rel_residual: abs / e_closed.abs().max(f64::MIN_POSITIVE),
            convergence_order: order,
        });
    }
    if levels.len() < k {
        warnings.push(format!("only {} of {} requested levels resolved below the threshold", levels.len(), k));
    }
    let max_rel = levels.iter().map(|l| l.rel_residual).fold(0.0, f64::max);
    let min_order = levels.iter().map(|l| l.convergence_order).fold(f64::INFINITY, f64::min);
    Ok(SpectrumReport {
        params,
        l: problem.l,
        flavor: problem.flavor,
        q_max: problem.q_max,
        points: problem.points,
        threshold,
        levels,
        requested_levels: k,
        count_below_threshold: count_below,
        max_rel_residual: max_rel,
        min_convergence_order: min_order,
        warnings,
    })
}

/// One radial eigenfunction sampled on the base grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialWavefunction {
    pub n_r: u32,
    pub energy: f64,
    pub flavor: Flavor,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    /// Unit-norm discrete `u(Q_j)` (with respect to `sum_j u_j^2 h`).
    pub u: Vec<f64>,
    /// Radial function of the requested flavor.
    pub phi: Vec<f64>,
    pub nodes: usize,
}

impl RadialWavefunction {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "phi"]).map_err(crate::classical::csv_err)?;
        for (r, phi) in self.r.iter().zip(&self.phi) {
            out.write_record([fmt(*r), fmt(*phi)]).map_err(crate::classical::csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Radial function of `flavor` from the transformed-LB one:
/// `Phi = D^((N-2)/4) Phi_TLB`, `Phi_TPDM = D^(N/4) Phi_TLB`.
pub fn flavor_radial_factor(params: &ModelParams, flavor: Flavor, r: f64) -> f64 {
    let d = params.conformal_factor(r);
    let n = params.dim as f64;
    match flavor {
        Flavor::Tlb => 1.0,
        Flavor::Schrodinger => d.powf((n - 2.0) / 4.0),
        _ => d.powf(n / 4.0),
    }
}

/// `Phi_TLB = r^((1-N)/2) D^(-(N-1)/4) u`.
pub fn tlb_from_u(params: &ModelParams, r: f64, u: f64) -> f64 {
    let n = params.dim as f64;
    r.powf((1.0 - n) / 2.0) * params.conformal_factor(r).powf(-(n - 1.0) / 4.0) * u
}

/// Base-grid eigenvectors for the lowest `k` levels.
pub fn radial_wavefunctions(problem: &RadialProblem, k: usize) -> Result<Vec<RadialWavefunction>> {
    let (t, q, r) = effective_1d_problem(problem)?;
    let h = problem.step();
    Ok(t.lowest(k)
        .into_par_iter()
        .enumerate()
        .map(|(n_r, e)| {
            let mut u = t.eigenvector(e);
            let scale = h.sqrt();
            for v in &mut u {
                *v /= scale;
            }
            let phi = r
                .iter()
                .zip(&u)
                .map(|(&ri, &ui)| flavor_radial_factor(&problem.params, problem.flavor, ri) * tlb_from_u(&problem.params, ri, ui))
                .collect();
            RadialWavefunction {
                n_r: n_r as u32,
                energy: e,
                flavor: problem.flavor,
                q: q.clone(),
                r: r.clone(),
                nodes: sign_changes(&u),
                u,
                phi,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulationStep {
    pub q_max: f64,
    pub points: usize,
    pub count_below_threshold: usize,
    /// Highest few eigenvalues below the threshold, ascending.
    pub top_levels: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulationReport {
    pub threshold: f64,
    pub steps: Vec<AccumulationStep>,
    pub counts_increase: bool,
    /// The third-highest level below threshold rises with each doubling.
    /// The single highest level jitters with the box size and is not used.
    pub top_approaches_threshold: bool,
    pub all_below_threshold: bool,
    /// Gaps between consecutive resolved levels on the largest grid
    /// decrease with `n`.
    pub gaps_decrease: bool,
}

/// Doubles `Q_max` `doublings` times at fixed grid spacing and follows the
/// eigenvalues just below `omega^2 / (2 lambda)`.
pub fn threshold_accumulation(
    params: &ModelParams,
    l: u32,
    q_max0: f64,
    points0: usize,
    doublings: usize,
) -> Result<AccumulationReport> {
    let Threshold::Finite(e_inf) = params.continuum_threshold() else {
        return Err(Error::Domain("threshold accumulation requires lambda > 0".into()));
    };
    let mut steps = Vec::new();
    let mut last_all: Vec<f64> = Vec::new();
    for s in 0..=doublings {
        let f = 1usize << s;
        let problem = RadialProblem::new(*params, l, Flavor::Tlb, q_max0 * f as f64, points0 * f)?;
        let (t, _, _) = effective_1d_problem(&problem)?;
        let count = t.count_below(e_inf);
        let from = count.saturating_sub(3);
        let top: Vec<f64> = (from..count).map(|k| t.eigenvalue(k)).collect();
        if s == doublings {
            last_all = t.lowest(count.min(40));
        }
        steps.push(AccumulationStep {
            q_max: problem.q_max,
            points: problem.points,
            count_below_threshold: count,
            top_levels: top,
        });
    }
    let counts_increase = steps.windows(2).all(|w| w[1].count_below_threshold > w[0].count_below_threshold);
    let tops: Vec<f64> = steps.iter().filter(|s| s.top_levels.len() == 3).map(|s| s.top_levels[0]).collect();
    let top_approaches_threshold = tops.len() == steps.len() && tops.windows(2).all(|w| w[1] > w[0]);
    let all_below_threshold = steps.iter().all(|s| s.top_levels.iter().all(|&e| e < e_inf));
    let gaps: Vec<f64> = last_all.windows(2).map(|w| w[1] - w[0]).collect();
    let gaps_decrease = gaps.windows(2).all(|g| g[1] < g[0]);
    Ok(AccumulationReport { threshold: e_inf, steps, counts_increase, top_approaches_threshold, all_below_threshold, gaps_decrease })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(dim: usize, lambda: f64) -> ModelParams {
        ModelParams::new(dim, lambda, 1.0, 1.0).unwrap()
    }

    #[test]
    fn flat_ladder() {
        let p = RadialProblem::auto(params(3, 0.0), 0, Flavor::Tlb, 5, DEFAULT_POINTS).unwrap();
        let rep = solve_bound_states(&p, 5).unwrap();
        for (k, lv) in rep.levels.iter().enumerate() {
            assert!((lv.e_numeric - (2.0 * k as f64 + 1.5)).abs() < 1e-8, "{lv:?}");
        }
        assert_eq!(rep.threshold, Threshold::Infinite);
    }

    #[test]
    fn curved_levels_match_closed_form() {
        let p = RadialProblem::auto(params(3, 0.02), 1, Flavor::Tlb, 6, DEFAULT_POINTS).unwrap();
        let rep = solve_bound_states(&p, 6).unwrap();
        assert!(rep.is_complete());
        assert!(rep.max_rel_residual < 1e-6, "{}", rep.max_rel_residual);
        assert!(rep.min_convergence_order > 1.9);
        assert!(rep.levels.windows(2).all(|w| w[1].e_numeric > w[0].e_numeric));
        assert!(rep.warnings.is_empty(), "{:?}", rep.warnings);
    }

    #[test]
    fn lowest_level_for_small_lambda() {
        let p = RadialProblem::auto(params(3, 0.01), 0, Flavor::Tlb, 1, DEFAULT_POINTS).unwrap();
        let rep = solve_bound_states(&p, 1).unwrap();
        assert_eq!(format!("{:.4}", rep.levels[0].e_numeric), "1.4777");
    }

    #[test]
    fn eigenvectors_orthogonal_with_nodes() {
        let p = RadialProblem::auto(params(3, 0.02), 2, Flavor::Tpdm, 4, 2000).unwrap();
        let wf = radial_wavefunctions(&p, 4).unwrap();
        let h = p.step();
        for (k, a) in wf.iter().enumerate() {
            assert_eq!(a.nodes, k);
            for b in &wf[..k] {
                let dot: f64 = a.u.iter().zip(&b.u).map(|(x, y)| x * y).sum::<f64>() * h;
                assert!(dot.abs() < 1e-10);
            }
            if k == 0 {
                let tlb = radial_wavefunctions(&RadialProblem { flavor: Flavor::Tlb, ..p.clone() }, 1).unwrap();
                for ((r, x), y) in a.r.iter().zip(&a.phi).zip(&tlb[0].phi) {
                    let d = p.params.conformal_factor(*r).powf(0.75);
                    assert!((x - d * y).abs() <= 1e-12 * x.abs().max(1e-300));
                }
            }
        }
    }

    #[test]
    fn accumulation_below_threshold() {
        let rep = threshold_accumulation(&params(3, 0.02), 0, 40.0, 2000, 2).unwrap();
        assert!(rep.all_below_threshold);
        assert!(rep.counts_increase, "{rep:?}");
        assert!(rep.top_approaches_threshold, "{rep:?}");
        assert!(rep.gaps_decrease);
        assert_eq!(rep.threshold, 25.0);
    }

    #[test]
    fn csv_layout() {
        let p = RadialProblem::auto(params(3, 0.02), 0, Flavor::Tlb, 2, 1000).unwrap();
        let rep = solve_bound_states(&p, 2).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n_r,n,E_numeric,E_base_grid,E_closed"));
        assert_eq!(text.lines().count(), 3);
    }
}
