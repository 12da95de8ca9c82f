//! Recurrence search: the time `t*` at which a trajectory comes back
//! closest to its initial point.

use serde::{Deserialize, Serialize};

use super::{hamiltonian, integrate_at, norm2, PhaseState};
use crate::error::{Error, Result};
use crate::model::{golden_section, ModelParams};

/// Orbits returning closer than this are counted as closed.
pub const CLOSURE_THRESHOLD: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosureStatus {
    Closed,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub status: ClosureStatus,
    /// Estimate used to set the scan step and default horizon.
    pub period_estimate: Option<f64>,
    pub horizon: f64,
    pub t_star: f64,
    pub distance: f64,
}

/// Period of a bounded orbit, or `None` when the energy is at or above
/// the continuum threshold.
///
/// On the energy shell, `D (H - E)` generates the same orbit with the
/// time change `dt = D dtau` and is a flat oscillator of frequency
/// `Omega = sqrt(omega^2 - 2 lambda E)` in `tau`. Averaging `D` over one
/// `tau`-period gives `T = (2 pi / Omega) (1 + lambda (q0^2 + p0^2 / Omega^2) / 2)`.
pub fn period_estimate(params: &ModelParams, state: &PhaseState) -> Option<f64> {
    let e = hamiltonian(params, state);
    let big_omega = params.omega_eff(e)?;
    if big_omega <= 0.0 {
        return None;
    }
    let q2 = norm2(&state.q);
    let p2 = norm2(&state.p);
    let mean_d = 1.0 + 0.5 * params.lambda * (q2 + p2 / (big_omega * big_omega));
    Some(std::f64::consts::TAU / big_omega * mean_d)
}

/// Scans `(0, horizon]` at spacing `period / 2000`, then refines the best
/// local minimum of the phase-space distance by golden-section search.
/// The default horizon is 1.25 estimated periods (or 50 time units when
/// no bounded period exists).
pub fn orbit_closure(
    params: &ModelParams,
    initial: &PhaseState,
    horizon: Option<f64>,
    tol: f64,
) -> Result<ClosureReport> {
    let estimate = period_estimate(params, initial);
    let horizon = horizon.unwrap_or_else(|| estimate.map_or(50.0, |t| 1.25 * t));
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParams(format!("horizon must be positive, got {horizon}")));
    }
    let dt = estimate.unwrap_or(horizon) / 2000.0;
    let n = (horizon / dt).ceil() as usize;
    let times: Vec<f64> = (1..=n).map(|k| initial.t + (k as f64 * dt).min(horizon)).collect();
    let states = integrate_at(params, initial, &times, tol)?;
    let dist: Vec<f64> = states.iter().map(|s| s.distance(initial)).collect();

    // skip the initial departure: search only after the first local maximum
    let start = (1..dist.len().saturating_sub(1)).find(|&k| dist[k] >= dist[k - 1] && dist[k] >= dist[k + 1]);
    let Some(start) = start else {
        return Ok(inconclusive(estimate, horizon, &times, &dist));
    };
    let best = (start..dist.len()).min_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap();
    if best + 1 >= dist.len() {
        return Ok(inconclusive(estimate, horizon, &times, &dist));
    }
    let base = &states[best - 1];
    let d_at = |t: f64| -> f64 {
        if t <= base.t {
            return base.distance(initial);
        }
        integrate_at(params, base, &[t], tol).map_or(f64::INFINITY, |s| s[0].distance(initial))
    };
    let t_star = golden_section(&d_at, times[best - 1], times[best + 1], 1e-15);
    let distance = d_at(t_star);
    let status = if distance < CLOSURE_THRESHOLD { ClosureStatus::Closed } else { ClosureStatus::Inconclusive };
    Ok(ClosureReport { status, period_estimate: estimate, horizon, t_star: t_star - initial.t, distance })
}

fn inconclusive(estimate: Option<f64>, horizon: f64, times: &[f64], dist: &[f64]) -> ClosureReport {
    let (k, d) = dist
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or((0, f64::INFINITY), |(k, d)| (k, *d));
    ClosureReport {
        status: ClosureStatus::Inconclusive,
        period_estimate: estimate,
        horizon,
        t_star: times.get(k).copied().unwrap_or(0.0),
        distance: d,
    }
}

#[cfg(test)]
mod tests {
    use super::super::random_bounded_state;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_period_is_two_pi_over_omega() {
        let m = ModelParams::new(3, 0.0, 2.0, 1.0).unwrap();
        let s = PhaseState::new(vec![0.3, -0.5, 0.2], vec![0.1, 0.7, -0.4]).unwrap();
        let r = orbit_closure(&m, &s, None, 1e-12).unwrap();
        assert_eq!(r.status, ClosureStatus::Closed);
        assert!((r.t_star - std::f64::consts::PI).abs() < 1e-8, "{}", r.t_star);
        assert!(r.distance < 1e-6);
    }

    #[test]
    fn curved_orbits_close_at_the_estimated_period() {
        let m = ModelParams::new(3, 0.02, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..3 {
            let s = random_bounded_state(&m, &mut rng);
            let r = orbit_closure(&m, &s, None, 1e-11).unwrap();
            assert_eq!(r.status, ClosureStatus::Closed, "{r:?}");
            let t = r.period_estimate.unwrap();
            assert!((r.t_star - t).abs() < 1e-6 * t, "{} vs {}", r.t_star, t);
        }
    }

    #[test]
    fn unbounded_motion_is_inconclusive() {
        let m = ModelParams::new(3, 0.02, 1.0, 1.0).unwrap();
        let s = PhaseState::new(vec![0.1, 0.0, 0.0], vec![8.0, 0.5, 0.0]).unwrap();
        let r = orbit_closure(&m, &s, None, 1e-10).unwrap();
        assert_eq!(r.status, ClosureStatus::Inconclusive);
        assert!(r.period_estimate.is_none());
    }
}
