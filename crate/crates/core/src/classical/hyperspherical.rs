//! Hyperspherical phase-space chart
//! `q_j = r cos(theta_j) prod_{k<j} sin(theta_k)`, `q_N = r prod_k sin(theta_k)`.
//!
//! Angle ranges are the standard ones: `theta_1..theta_{N-2}` in `[0, pi]`
//! and `theta_{N-1}` in `[0, 2 pi)`.

use serde::{Deserialize, Serialize};

use super::{hamiltonian, PhaseState};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypersphericalState {
    pub r: f64,
    pub theta: Vec<f64>,
    pub p_r: f64,
    pub p_theta: Vec<f64>,
}

impl HypersphericalState {
    /// Total angular momentum `L^2 = sum_j p_theta_j^2 / prod_{k<j} sin^2 theta_k`.
    pub fn angular_momentum_squared(&self) -> f64 {
        let mut acc = 0.0;
        let mut prod = 1.0;
        for (j, pt) in self.p_theta.iter().enumerate() {
            acc += pt * pt / prod;
            prod *= self.theta[j].sin().powi(2);
        }
        acc
    }

    /// Compact chart expression of `C_(m)`, built from the last `m - 1`
    /// angles.
    pub fn lower_casimir(&self, m: usize) -> f64 {
        let n = self.theta.len() + 1;
        let first = n - m;
        let mut acc = 0.0;
        let mut prod = 1.0;
        for j in first..(n - 1) {
            acc += self.p_theta[j].powi(2) / prod;
            prod *= self.theta[j].sin().powi(2);
        }
        acc
    }
}

/// True when some `|sin theta_k|`, `k <= N-2`, is below `eps`.
pub(crate) fn near_axis(q: &[f64], eps: f64) -> bool {
    let n = q.len();
    let mut tail2: f64 = q.iter().map(|x| x * x).sum();
    for qk in q.iter().take(n.saturating_sub(2)) {
        let rho = tail2.sqrt();
        tail2 -= qk * qk;
        let s = tail2.max(0.0).sqrt();
        if rho == 0.0 || s / rho < eps {
            return true;
        }
    }
    false
}

fn angles(q: &[f64]) -> Vec<f64> {
    let n = q.len();
    let mut theta = Vec::with_capacity(n - 1);
    for j in 0..n - 2 {
        let tail: f64 = q[j + 1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        theta.push(tail.atan2(q[j]));
    }
    let last = q[n - 1].atan2(q[n - 2]);
    theta.push(if last < 0.0 { last + std::f64::consts::TAU } else { last });
    theta
}

/// `dq_i / dtheta_j` at unit radius.
fn angular_jacobian(theta: &[f64]) -> Vec<Vec<f64>> {
    let m = theta.len();
    let n = m + 1;
    let s: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
    let c: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let prod_except = |upto: usize, skip: usize| -> f64 { (0..upto).filter(|&k| k != skip).map(|k| s[k]).product() };
    let mut jac = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            jac[i][j] = if i < n - 1 {
                match j.cmp(&i) {
                    std::cmp::Ordering::Less => c[i] * c[j] * prod_except(i, j),
                    std::cmp::Ordering::Equal => -s[i] * prod_except(i, usize::MAX),
                    std::cmp::Ordering::Greater => 0.0,
                }
            } else {
                c[j] * prod_except(m, j)
            };
        }
    }
    jac
}

pub fn to_hyperspherical(state: &PhaseState) -> Result<HypersphericalState> {
    let n = state.dim();
    let r = state.radius();
    if !(r > 0.0) {
        return Err(Error::Domain("hyperspherical chart undefined at r = 0".into()));
    }
    if near_axis(&state.q, 1e-3) {
        return Err(Error::Domain("state too close to a coordinate axis of the angular chart".into()));
    }
    let theta = angles(&state.q);
    let p_r = state.q.iter().zip(&state.p).map(|(a, b)| a * b).sum::<f64>() / r;
    let jac = angular_jacobian(&theta);
    let p_theta = (0..n - 1).map(|j| r * (0..n).map(|i| state.p[i] * jac[i][j]).sum::<f64>()).collect();
    Ok(HypersphericalState { r, theta, p_r, p_theta })
}

/// Inverse chart with the explicit Cartesian momenta
/// `p_j = prod_{k<j} s_k c_j p_r
///      + (c_j / r) sum_{l<j} (prod_{l<k<j} s_k / prod_{m<l} s_m) c_l p_theta_l
///      - s_j / (r prod_{k<j} s_k) p_theta_j`
/// and the analogous expression for `p_N`.
pub fn from_hyperspherical(h: &HypersphericalState) -> Result<PhaseState> {
    let m = h.theta.len();
    let n = m + 1;
    if h.p_theta.len() != m || n < 2 {
        return Err(Error::InvalidParams("angle and angular-momentum lengths disagree".into()));
    }
    let s: Vec<f64> = h.theta.iter().map(|t| t.sin()).collect();
    let c: Vec<f64> = h.theta.iter().map(|t| t.cos()).collect();
    let prod = |from: usize, to: usize| -> f64 { (from..to).map(|k| s[k]).product() };
    let mut q = vec![0.0; n];
    let mut p = vec![0.0; n];
    for j in 0..n {
        let mixed = |upto: usize| -> f64 {
            (0..upto).map(|l| prod(l + 1, upto) / prod(0, l) * c[l] * h.p_theta[l]).sum::<f64>() / h.r
        };
        if j < n - 1 {
            let lead = prod(0, j);
            q[j] = h.r * c[j] * lead;
            p[j] = lead * c[j] * h.p_r + c[j] * mixed(j) - s[j] / (h.r * lead) * h.p_theta[j];
        } else {
            let lead = prod(0, m);
            q[j] = h.r * lead;
            p[j] = lead * h.p_r + mixed(m);
        }
    }
    PhaseState::new(q, p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialReduction {
    pub h_cartesian: f64,
    pub h_hyperspherical: f64,
    pub h_flattened: f64,
    /// Flattened canonical pair `(Q, P)` with `P = p_r / sqrt(D)`.
    pub q_flat: f64,
    pub p_flat: f64,
    pub consistent: bool,
}

/// Evaluates the energy three ways: Cartesian, in hyperspherical
/// variables, and as `P^2/2 + U_eff(Q)` in the flattened radial pair.
pub fn radial_reduction_check(params: &ModelParams, state: &PhaseState) -> Result<RadialReduction> {
    let h = to_hyperspherical(state)?;
    let h_cart = hamiltonian(params, state);
    let d = params.conformal_factor(h.r);
    let l2 = h.angular_momentum_squared();
    let w2 = params.omega * params.omega;
    let h_hyp = (h.p_r * h.p_r + l2 / (h.r * h.r)) / (2.0 * d) + w2 * h.r * h.r / (2.0 * d);
    let p_flat = h.p_r / d.sqrt();
    let q_flat = params.flattening_coordinate(h.r);
    let r_back = params.inverse_flattening(q_flat)?;
    let h_flat = 0.5 * p_flat * p_flat + params.classical_effective_potential(l2, r_back)?;
    let tol = 1e-12 * h_cart.abs().max(1e-300);
    let consistent = (h_cart - h_hyp).abs() <= tol && (h_cart - h_flat).abs() <= tol;
    Ok(RadialReduction { h_cartesian: h_cart, h_hyperspherical: h_hyp, h_flattened: h_flat, q_flat, p_flat, consistent })
}

#[cfg(test)]
mod tests {
    use super::super::{classical_invariants, random_bounded_state};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn planar_point_on_first_axis() {
        let s = PhaseState::new(vec![2.0, 0.0], vec![0.7, -1.3]).unwrap();
        let h = to_hyperspherical(&s).unwrap();
        assert_eq!(h.theta, vec![0.0]);
        assert!((h.p_r - 0.7).abs() < 1e-15);
        assert!((h.p_theta[0] - 2.0 * -1.3).abs() < 1e-15);
    }

    #[test]
    fn round_trip_and_momentum_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for dim in 2..=6 {
            let m = ModelParams::new(dim, 0.02, 1.0, 1.0).unwrap();
            for _ in 0..20 {
                let s = random_bounded_state(&m, &mut rng);
                let h = to_hyperspherical(&s).unwrap();
                let back = from_hyperspherical(&h).unwrap();
                assert!(back.distance(&s) < 1e-12, "N={dim}");
                let p2: f64 = s.p.iter().map(|x| x * x).sum();
                let split = h.p_r * h.p_r + h.angular_momentum_squared() / (h.r * h.r);
                assert!((p2 - split).abs() < 1e-12 * p2.max(1.0));
                let inv = classical_invariants(&m, &s).unwrap();
                for mm in 2..=dim {
                    let c = inv.lower[mm - 2];
                    assert!((h.lower_casimir(mm) - c).abs() < 1e-12 * c.max(1.0), "N={dim} m={mm}");
                }
                assert!((h.angular_momentum_squared() - inv.lower[dim - 2]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn on_axis_rejected() {
        let s = PhaseState::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!(to_hyperspherical(&s).is_err());
        let z = PhaseState::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert!(to_hyperspherical(&z).is_err());
    }

    #[test]
    fn radial_reduction_three_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for lambda in [0.0, 0.02, 0.3] {
            let m = ModelParams::new(3, lambda, 1.0, 1.0).unwrap();
            for _ in 0..10 {
                let s = random_bounded_state(&m, &mut rng);
                let red = radial_reduction_check(&m, &s).unwrap();
                assert!(red.consistent, "{red:?}");
                if lambda == 0.0 {
                    let h = to_hyperspherical(&s).unwrap();
                    assert_eq!(red.q_flat, h.r);
                    assert_eq!(red.p_flat, h.p_r);
                }
            }
        }
        // purely radial state
        let m = ModelParams::new(3, 0.1, 1.0, 1.0).unwrap();
        let s = PhaseState::new(vec![0.3, 0.4, 0.5], vec![0.6, 0.8, 1.0]).unwrap();
        let red = radial_reduction_check(&m, &s).unwrap();
        let r2: f64 = 0.5;
        let pr = (0.18 + 0.32 + 0.5) / r2.sqrt();
        let expected = pr * pr / (2.0 * (1.0 + 0.1 * r2)) + m.oscillator_potential(r2.sqrt());
        assert!((red.h_hyperspherical - expected).abs() < 1e-14);
    }
}
