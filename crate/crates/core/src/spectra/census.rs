//! Level degeneracy counted two ways: Cartesian partitions of `n` and
//! radial pairs `(n_r, l)` with `2 n_r + l = n`, weighted by the dimension
//! of the degree-`l` harmonic polynomials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Dimension of the degree-`l` harmonic polynomials in `N` variables.
pub fn harmonic_dimension(dim: usize, l: u32) -> u128 {
    let n = dim as u64;
    let l = u64::from(l);
    let lower = if l >= 2 { binomial(l + n - 3, n - 1) } else { 0 };
    binomial(l + n - 1, n - 1) - lower
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadialShell {
    pub l: u32,
    pub n_r: u32,
    pub harmonic_dimension: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegeneracyCensus {
    #[serde(rename = "N")]
    pub dim: usize,
    pub n: u32,
    pub cartesian: u128,
    pub radial: u128,
    pub shells: Vec<RadialShell>,
    pub agree: bool,
}

pub fn degeneracy_census(dim: usize, n: u32) -> Result<DegeneracyCensus> {
    if dim < 2 {
        return Err(Error::InvalidParams(format!("degeneracy census needs N >= 2, got {dim}")));
    }
    let cartesian = binomial(u64::from(n) + dim as u64 - 1, dim as u64 - 1);
    let shells: Vec<RadialShell> = (0..=n)
        .rev()
        .step_by(2)
        .map(|l| RadialShell { l, n_r: (n - l) / 2, harmonic_dimension: harmonic_dimension(dim, l) })
        .collect();
    let radial = shells.iter().map(|s| s.harmonic_dimension).sum();
    Ok(DegeneracyCensus { dim, n, cartesian, radial, shells, agree: cartesian == radial })
}
