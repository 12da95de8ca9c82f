//! Independent discretizations of the three radial Hamiltonians in `r`.
//!
//! Each radial operator has the form
//! `-hbar^2/(2 D w) (w Phi')' + hbar^2 l(l+N-2)/(2 D r^2) Phi + V(r) Phi`
//! with its own weight `w` and potential `V`, and is symmetric in the
//! measure `rho = D w`. Cell-centred finite volumes with faces at
//! `r = j h` preserve that symmetry; `w(0) = 0` supplies the regularity
//! condition at the origin.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::radial::auto_q_max;
use super::tridiag::SymTridiagonal;
use crate::algebra::{build_hamiltonian, Flavor};
use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const ISOSPECTRAL_TOLERANCE: f64 = 1e-8;
const BASE_CELLS: usize = 2000;
const LEVELS_OF_REFINEMENT: usize = 4;

/// Weight `w` and potential `V` of one radial Hamiltonian.
#[derive(Clone, Copy, Debug)]
pub struct RadialOperator {
    pub params: ModelParams,
    pub flavor: Flavor,
    pub l: u32,
}

impl RadialOperator {
    pub fn new(params: ModelParams, flavor: Flavor, l: u32) -> Result<Self> {
        if !Flavor::SUPERINTEGRABLE.contains(&flavor) {
            return Err(Error::InvalidParams(format!("{flavor} has no radial operator")));
        }
        Ok(Self { params, flavor, l })
    }

    /// First-derivative coefficient `a(r)` in `Phi'' + a Phi'`.
    pub fn drift(&self, r: f64) -> f64 {
        let n = self.params.dim as f64;
        let lam = self.params.lambda;
        let d = self.params.conformal_factor(r);
        let base = (n - 1.0) / r;
        match self.flavor {
            Flavor::Schrodinger => base,
            Flavor::Tlb => base + lam * (n - 2.0) * r / d,
            _ => base - 2.0 * lam * r / d,
        }
    }

    /// `w` with `w'/w = a`, normalized so that `w ~ r^(N-1)` at the origin.
    pub fn weight(&self, r: f64) -> f64 {
        let n = self.params.dim as f64;
        let d = self.params.conformal_factor(r);
        let rn = r.powi(self.params.dim as i32 - 1);
        match self.flavor {
            Flavor::Schrodinger => rn,
            Flavor::Tlb => rn * d.powf((n - 2.0) / 2.0),
            _ => rn / d,
        }
    }

    /// Potential beyond the centrifugal term.
    pub fn potential(&self, r: f64) -> f64 {
        let p = &self.params;
        let n = p.dim as f64;
        let lam = p.lambda;
        let d = p.conformal_factor(r);
        let h2 = p.hbar * p.hbar;
        let osc = p.oscillator_potential(r);
        match self.flavor {
            Flavor::Schrodinger => osc,
            Flavor::Tlb => osc - h2 * lam * (n - 2.0) * (2.0 * n + 3.0 * lam * r * r * (n - 2.0)) / (8.0 * d * d * d),
            _ => osc + h2 * lam * (n + lam * r * r * (n - 3.0)) / (2.0 * d * d * d),
        }
    }

    fn centrifugal(&self, r: f64) -> f64 {
        let n = self.params.dim as f64;
        let l = self.l as f64;
        let h2 = self.params.hbar * self.params.hbar;
        h2 * l * (l + n - 2.0) / (2.0 * self.params.conformal_factor(r) * r * r)
    }

    /// Symmetrized matrix `rho^{-1/2} A rho^{-1/2}` on `cells` cells of
    /// `[0, r_max]`.
    pub fn discretize(&self, r_max: f64, cells: usize) -> Result<SymTridiagonal> {
        let h = r_max / cells as f64;
        let k = self.params.hbar * self.params.hbar / (2.0 * h * h);
        let centres: Vec<f64> = (0..cells).map(|j| (j as f64 + 0.5) * h).collect();
        let faces: Vec<f64> = (0..=cells).map(|j| self.weight(j as f64 * h)).collect();
        let rho: Vec<f64> = centres.iter().map(|&r| self.params.conformal_factor(r) * self.weight(r)).collect();
        let diag = (0..cells)
            .map(|j| {
                let r = centres[j];
                k * (faces[j] + faces[j + 1]) / rho[j] + self.centrifugal(r) + self.potential(r)
            })
            .collect();
        let off = (0..cells - 1).map(|j| -k * faces[j + 1] / (rho[j] * rho[j + 1]).sqrt()).collect();
        SymTridiagonal::new(diag, off)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlavorTable {
    pub flavor: Flavor,
    /// Romberg-extrapolated eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Raw eigenvalues per grid, coarsest first.
    pub raw: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDifference {
    pub a: Flavor,
    pub b: Flavor,
    pub max_rel_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsospectralityReport {
    pub params: ModelParams,
    pub l: u32,
    pub levels: usize,
    pub r_max: f64,
    pub cells: Vec<usize>,
    pub tables: Vec<FlavorTable>,
    pub closed_form: Vec<f64>,
    pub pairs: Vec<PairDifference>,
    pub tolerance: f64,
    pub agree: bool,
    /// For `N = 2`: the schrodinger and transformed-LB Hamiltonians are
    /// equal as operators and their radial coefficients coincide.
    pub n2_operators_identical: Option<bool>,
}

/// Richardson table for errors in even powers of `h`, grids halving.
fn romberg(values: &[f64]) -> f64 {
    let mut t = values.to_vec();
    let mut factor = 4.0;
    while t.len() > 1 {
        t = t.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 4.0;
    }
    t[0]
}

fn n2_identity(params: &ModelParams, l: u32) -> Result<bool> {
    let symbolic = build_hamiltonian(Flavor::Schrodinger, 2)? == build_hamiltonian(Flavor::Tlb, 2)?;
    let s = RadialOperator::new(*params, Flavor::Schrodinger, l)?;
    let t = RadialOperator::new(*params, Flavor::Tlb, l)?;
    let coefficients = (1..200).map(|k| k as f64 * 0.05).all(|r| {
        s.drift(r) == t.drift(r) && s.weight(r) == t.weight(r) && s.potential(r) == t.potential(r)
    });
    Ok(symbolic && coefficients)
}

/// Solves the three radial problems independently and compares their
/// lowest `k` eigenvalues pairwise.
pub fn isospectrality_check(params: &ModelParams, l: u32, k: usize) -> Result<IsospectralityReport> {
    params.validate()?;
    if k == 0 {
        return Err(Error::InvalidParams("at least one level is required".into()));
    }
    let r_max = params.inverse_flattening(auto_q_max(params, l, k)?)?;
    let cells: Vec<usize> = (0..LEVELS_OF_REFINEMENT).map(|s| BASE_CELLS << s).collect();
    let flavors = [Flavor::Schrodinger, Flavor::Tlb, Flavor::Tpdm];
    let tables: Vec<FlavorTable> = flavors
        .par_iter()
        .map(|&flavor| -> Result<FlavorTable> {
            let op = RadialOperator::new(*params, flavor, l)?;
            let raw: Vec<Vec<f64>> = cells
                .par_iter()
                .map(|&m| op.discretize(r_max, m).map(|t| t.lowest(k)))
                .collect::<Result<_>>()?;
            let eigenvalues = (0..k).map(|i| romberg(&raw.iter().map(|v| v[i]).collect::<Vec<_>>())).collect();
            Ok(FlavorTable { flavor, eigenvalues, raw })
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for a in 0..tables.len() {
        for b in (a + 1)..tables.len() {
            let max_rel_diff = tables[a]
                .eigenvalues
                .iter()
                .zip(&tables[b].eigenvalues)
                .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()))
                .fold(0.0, f64::max);
            pairs.push(PairDifference { a: tables[a].flavor, b: tables[b].flavor, max_rel_diff });
        }
    }
    let agree = pairs.iter().all(|p| p.max_rel_diff <= ISOSPECTRAL_TOLERANCE);
    let closed_form = (0..k as u32).map(|n_r| params.closed_form_energy(2 * n_r + l)).collect();
    let n2_operators_identical = if params.dim == 2 { Some(n2_identity(params, l)?) } else { None };
    Ok(IsospectralityReport {
        params: *params,
        l,
        levels: k,
        r_max,
        cells,
        tables,
        closed_form,
        pairs,
        tolerance: ISOSPECTRAL_TOLERANCE,
        agree,
        n2_operators_identical,
    })
}
