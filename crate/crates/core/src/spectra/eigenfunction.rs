//! Closed-form Cartesian eigenfunctions
//! `Psi_TLB = D^{(2-N)/4} prod_i exp(-beta^2 q_i^2 / 2) H_{n_i}(beta q_i)`,
//! `beta^2 = Omega / hbar`, and their residual checks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{build_hamiltonian, Flavor};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartesianEigenfunction {
    pub partition: Vec<u32>,
    pub flavor: Flavor,
}

/// `(H_n(y), H_n'(y), H_n''(y))` for physicists' Hermite polynomials.
pub fn hermite(n: u32, y: f64) -> (f64, f64, f64) {
    let mut hist = vec![1.0, 2.0 * y];
    for k in 1..n as usize {
        hist.push(2.0 * y * hist[k] - 2.0 * k as f64 * hist[k - 1]);
    }
    let at = |k: i64| if k < 0 { 0.0 } else { hist[k as usize] };
    let n = n as i64;
    let nf = n as f64;
    (at(n), 2.0 * nf * at(n - 1), 4.0 * nf * (nf - 1.0) * at(n - 2))
}

/// Value, gradient and Hessian at a point.
#[derive(Clone, Debug, PartialEq)]
struct Jet {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<Vec<f64>>,
}

impl Jet {
    fn laplacian(&self) -> f64 {
        (0..self.grad.len()).map(|i| self.hess[i][i]).sum()
    }

    /// `∂^alpha` for `|alpha| <= 2`.
    fn derivative(&self, alpha: &[u8]) -> Option<f64> {
        let idx: Vec<usize> = alpha.iter().enumerate().flat_map(|(i, &a)| std::iter::repeat_n(i, a as usize)).collect();
        match idx.as_slice() {
            [] => Some(self.value),
            [i] => Some(self.grad[*i]),
            [i, j] => Some(self.hess[*i][*j]),
            _ => None,
        }
    }
}

impl CartesianEigenfunction {
    pub fn new(partition: Vec<u32>, flavor: Flavor) -> Result<Self> {
        if !(2..=crate::algebra::poly::MAX_DIM).contains(&partition.len()) {
            return Err(Error::InvalidParams(format!("partition length {} out of range", partition.len())));
        }
        if !Flavor::SUPERINTEGRABLE.contains(&flavor) {
            return Err(Error::InvalidParams(format!("{flavor} has no closed-form eigenfunctions")));
        }
        Ok(Self { partition, flavor })
    }

    pub fn dim(&self) -> usize {
        self.partition.len()
    }

    pub fn n(&self) -> u32 {
        self.partition.iter().sum()
    }

    pub fn energy(&self, params: &ModelParams) -> f64 {
        params.closed_form_energy(self.n())
    }

    /// Effective frequency `Omega(E_n)`; fails above the continuum threshold.
    pub fn frequency(&self, params: &ModelParams) -> Result<f64> {
        if params.dim != self.dim() {
            return Err(Error::InvalidParams(format!(
                "partition has {} entries but N = {}",
                self.dim(),
                params.dim
            )));
        }
        let e = self.energy(params);
        match params.omega_eff(e) {
            Some(w) if w > 0.0 => Ok(w),
            _ => Err(Error::Domain(format!("E_{} = {e} is not below the continuum threshold", self.n()))),
        }
    }

    pub fn beta(&self, params: &ModelParams) -> Result<f64> {
        Ok((self.frequency(params)? / params.hbar).sqrt())
    }

    /// Exponent `a` in `Psi_flavor = D^a Psi` relative to the flat Hermite
    /// product `Psi`.
    pub fn prefactor_power(&self) -> f64 {
        match self.flavor {
            Flavor::Schrodinger => 0.0,
            Flavor::Tlb => (2.0 - self.dim() as f64) / 4.0,
            _ => 0.5,
        }
    }

    /// Jet of the flat Hermite product.
    fn hermite_jet(&self, beta: f64, q: &[f64]) -> Jet {
        let n = self.dim();
        let factors: Vec<(f64, f64, f64)> = self
            .partition
            .iter()
            .zip(q)
            .map(|(&k, &x)| {
                let y = beta * x;
                let g = (-0.5 * y * y).exp();
                let (h, dh, ddh) = hermite(k, y);
                let b2 = beta * beta;
                (
                    g * h,
                    g * (beta * dh - b2 * x * h),
                    g * (b2 * ddh - 2.0 * b2 * beta * x * dh + (b2 * b2 * x * x - b2) * h),
                )
            })
            .collect();
        let prod_except = |skip: &[usize]| -> f64 {
            (0..n).filter(|k| !skip.contains(k)).map(|k| factors[k].0).product()
        };
        let value = prod_except(&[]);
        let grad = (0..n).map(|i| factors[i].1 * prod_except(&[i])).collect();
        let hess = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            factors[i].2 * prod_except(&[i])
                        } else {
                            factors[i].1 * factors[j].1 * prod_except(&[i, j])
                        }
                    })
                    .collect()
            })
            .collect();
        Jet { value, grad, hess }
    }

    /// Jet of `D^a Psi` by the product rule.
    fn flavor_jet(&self, params: &ModelParams, beta: f64, q: &[f64]) -> Jet {
        let psi = self.hermite_jet(beta, q);
        let a = self.prefactor_power();
        if a == 0.0 {
            return psi;
        }
        let n = self.dim();
        let lam = params.lambda;
        let d = 1.0 + lam * q.iter().map(|x| x * x).sum::<f64>();
        let f = d.powf(a);
        let df: Vec<f64> = q.iter().map(|x| 2.0 * lam * a * d.powf(a - 1.0) * x).collect();
        let ddf = |i: usize, j: usize| -> f64 {
            let delta = if i == j { d.powf(a - 1.0) } else { 0.0 };
            2.0 * lam * a * (delta + 2.0 * lam * (a - 1.0) * d.powf(a - 2.0) * q[i] * q[j])
        };
        Jet {
            value: f * psi.value,
            grad: (0..n).map(|i| f * psi.grad[i] + df[i] * psi.value).collect(),
            hess: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            f * psi.hess[i][j] + df[i] * psi.grad[j] + df[j] * psi.grad[i] + ddf(i, j) * psi.value
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// Unnormalized value of the eigenfunction in its own flavor.
pub fn eigenfunction_value(ef: &CartesianEigenfunction, params: &ModelParams, q: &[f64]) -> Result<f64> {
    if q.len() != ef.dim() {
        return Err(Error::InvalidParams("point dimension does not match the partition".into()));
    }
    let beta = ef.beta(params)?;
    let d = params.conformal_factor(q.iter().map(|x| x * x).sum::<f64>().sqrt());
    Ok(d.powf(ef.prefactor_power()) * ef.hermite_jet(beta, q).value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub partition: Vec<u32>,
    pub flavor: Flavor,
    pub energy: f64,
    pub points_used: usize,
    pub max_rel_residual: f64,
}

fn usable(values: &[f64]) -> Vec<bool> {
    let big = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values.iter().map(|v| v.abs() >= 1e-8 * big && big > 0.0).collect()
}

/// Max relative residual of `(-hbar^2 Delta + Omega^2 q^2) Psi = 2 E Psi`
/// for the flat Hermite product, normalized by the sum of the three term
/// magnitudes. `energy` replaces `E_n` in the equation (not in `Psi`).
pub fn residual_check(
    ef: &CartesianEigenfunction,
    params: &ModelParams,
    points: &[Vec<f64>],
    energy: Option<f64>,
) -> Result<ResidualReport> {
    let beta = ef.beta(params)?;
    let e = energy.unwrap_or_else(|| ef.energy(params));
    let big_omega2 = params.omega * params.omega - 2.0 * params.lambda * e;
    let h2 = params.hbar * params.hbar;
    let jets: Vec<Jet> = points.iter().map(|q| ef.hermite_jet(beta, q)).collect();
    let keep = usable(&jets.iter().map(|j| j.value).collect::<Vec<_>>());
    let mut worst = 0.0f64;
    let mut used = 0;
    for ((q, jet), ok) in points.iter().zip(&jets).zip(keep) {
        if !ok {
            continue;
        }
        used += 1;
        let r2: f64 = q.iter().map(|x| x * x).sum();
        let kinetic = -h2 * jet.laplacian();
        let potential = big_omega2 * r2 * jet.value;
        let rhs = 2.0 * e * jet.value;
        let scale = kinetic.abs() + potential.abs() + rhs.abs();
        worst = worst.max((kinetic + potential - rhs).abs() / scale);
    }
    Ok(ResidualReport {
        partition: ef.partition.clone(),
        flavor: ef.flavor,
        energy: e,
        points_used: used,
        max_rel_residual: worst,
    })
}

/// Max relative residual of `H_flavor Psi_flavor = E_n Psi_flavor`, applying
/// the symbolic Hamiltonian term by term to the analytic 2-jet of
/// `Psi_flavor`.
pub fn operator_residual(
    ef: &CartesianEigenfunction,
    params: &ModelParams,
    points: &[Vec<f64>],
) -> Result<ResidualReport> {
    let beta = ef.beta(params)?;
    let e = ef.energy(params);
    let h = build_hamiltonian(ef.flavor, ef.dim())?;
    let hb = params.hbar;
    let jets: Vec<Jet> = points.iter().map(|q| ef.flavor_jet(params, beta, q)).collect();
    let keep = usable(&jets.iter().map(|j| j.value).collect::<Vec<_>>());
    let mut worst = 0.0f64;
    let mut used = 0;
    for ((q, jet), ok) in points.iter().zip(&jets).zip(keep) {
        if !ok {
            continue;
        }
        used += 1;
        let mut re = 0.0;
        let mut im = 0.0;
        let mut scale = (e * jet.value).abs();
        for (alpha, c) in h.terms() {
            let idx: Vec<u8> = (0..ef.dim()).map(|i| alpha.get(i)).collect();
            let k = alpha.degree();
            let deriv = jet
                .derivative(&idx)
                .ok_or_else(|| Error::Domain("Hamiltonian has momentum degree above two".into()))?;
            let (cr, ci) = c.eval(q, params.lambda, params.omega, hb);
            // (-i hbar)^k
            let mag = hb.powi(k as i32);
            let (pr, pi) = match k % 4 {
                0 => (mag, 0.0),
                1 => (0.0, -mag),
                2 => (-mag, 0.0),
                _ => (0.0, mag),
            };
            let tr = (cr * pr - ci * pi) * deriv;
            let ti = (cr * pi + ci * pr) * deriv;
            re += tr;
            im += ti;
            scale += tr.hypot(ti);
        }
        worst = worst.max(((re - e * jet.value).hypot(im)) / scale);
    }
    Ok(ResidualReport {
        partition: ef.partition.clone(),
        flavor: ef.flavor,
        energy: e,
        points_used: used,
        max_rel_residual: worst,
    })
}

/// Uniform samples in the cube `|q_i| <= 3 / beta` around the origin.
pub fn sample_points<R: Rng>(ef: &CartesianEigenfunction, params: &ModelParams, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let half = 3.0 / ef.beta(params)?;
    Ok((0..count).map(|_| (0..ef.dim()).map(|_| rng.gen_range(-half..=half)).collect()).collect())
}

/// All partitions `(n_1, .., n_N)` with `sum n_i = n`.
pub fn partitions(dim: usize, n: u32) -> Vec<Vec<u32>> {
    if dim == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|first| {
            partitions(dim - 1, n - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(dim: usize, lambda: f64) -> ModelParams {
        ModelParams::new(dim, lambda, 1.0, 1.0).unwrap()
    }

    #[test]
    fn hermite_low_orders() {
        let y = 0.7;
        assert_eq!(hermite(0, y), (1.0, 0.0, 0.0));
        let (h, dh, ddh) = hermite(3, y);
        assert!((h - (8.0 * y * y * y - 12.0 * y)).abs() < 1e-14);
        assert!((dh - (24.0 * y * y - 12.0)).abs() < 1e-14);
        assert!((ddh - 48.0 * y).abs() < 1e-14);
        let (h4, _, _) = hermite(4, y);
        assert!((h4 - (16.0 * y.powi(4) - 48.0 * y * y + 12.0)).abs() < 1e-13);
    }

    #[test]
    fn ground_state_shape() {
        let p = params(3, 0.02);
        let ef = CartesianEigenfunction::new(vec![0, 0, 0], Flavor::Tlb).unwrap();
        let beta = ef.beta(&p).unwrap();
        let q = [0.4, -0.2, 0.9];
        let r2: f64 = q.iter().map(|x| x * x).sum();
        let expected = (1.0 + 0.02 * r2).powf(-0.25) * (-beta * beta * r2 / 2.0).exp();
        assert!((eigenfunction_value(&ef, &p, &q).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn parity() {
        let p = params(3, 0.05);
        for part in partitions(3, 3) {
            let ef = CartesianEigenfunction::new(part, Flavor::Tpdm).unwrap();
            let q = [0.3, -1.1, 0.6];
            let mq: Vec<f64> = q.iter().map(|x| -x).collect();
            let a = eigenfunction_value(&ef, &p, &q).unwrap();
            let b = eigenfunction_value(&ef, &p, &mq).unwrap();
            assert!((a + b).abs() <= 1e-14 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn flat_residual_is_roundoff() {
        let p = params(2, 0.0);
        let ef = CartesianEigenfunction::new(vec![2, 1], Flavor::Schrodinger).unwrap();
        let pts = sample_points(&ef, &p, 100, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(residual_check(&ef, &p, &pts, None).unwrap().max_rel_residual < 1e-12);
    }

    #[test]
    fn curved_residual_and_mutation() {
        let p = params(3, 0.02);
        let ef = CartesianEigenfunction::new(vec![1, 0, 1], Flavor::Tlb).unwrap();
        let pts = sample_points(&ef, &p, 100, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let good = residual_check(&ef, &p, &pts, None).unwrap();
        assert!(good.max_rel_residual < 1e-10, "{good:?}");
        assert!(good.points_used > 50);
        let bad = residual_check(&ef, &p, &pts, Some(1.01 * ef.energy(&p))).unwrap();
        assert!(bad.max_rel_residual > 1e-3, "{bad:?}");
    }

    #[test]
    fn symbolic_hamiltonians_annihilate_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2, 3] {
            let p = params(dim, 0.05);
            for flavor in Flavor::SUPERINTEGRABLE {
                for part in partitions(dim, 2) {
                    let ef = CartesianEigenfunction::new(part, flavor).unwrap();
                    let pts = sample_points(&ef, &p, 30, &mut rng).unwrap();
                    let rep = operator_residual(&ef, &p, &pts).unwrap();
                    assert!(rep.max_rel_residual < 1e-10, "{rep:?}");
                }
            }
        }
        // wrong prefactor is detected
        let p = params(3, 0.05);
        let ef = CartesianEigenfunction::new(vec![1, 0, 0], Flavor::Tpdm).unwrap();
        let wrong = CartesianEigenfunction { flavor: Flavor::Tlb, ..ef.clone() };
        let pts = sample_points(&ef, &p, 30, &mut rng).unwrap();
        let beta = ef.beta(&p).unwrap();
        let h = build_hamiltonian(Flavor::Tpdm, 3).unwrap();
        let jet = wrong.flavor_jet(&p, beta, &pts[0]);
        let applied: f64 = h
            .terms()
            .map(|(a, c)| {
                let idx: Vec<u8> = (0..3).map(|i| a.get(i)).collect();
                let (cr, ci) = c.eval(&pts[0], p.lambda, p.omega, p.hbar);
                let d = jet.derivative(&idx).unwrap();
                match a.degree() % 4 {
                    0 => cr * d,
                    1 => ci * d,
                    2 => -cr * d,
                    _ => -ci * d,
                }
            })
            .sum();
        assert!((applied - ef.energy(&p) * jet.value).abs() > 1e-6 * jet.value.abs());
    }

    #[test]
    fn partitions_enumerate_compositions() {
        assert_eq!(partitions(3, 2).len(), 6);
        assert_eq!(partitions(2, 3).len(), 4);
        assert!(partitions(4, 3).iter().all(|p| p.iter().sum::<u32>() == 3));
    }

    #[test]
    fn high_levels_stay_bound_and_dimension_checked() {
        let p = params(3, 0.5);
        let ef = CartesianEigenfunction::new(vec![0, 0, 40], Flavor::Tlb).unwrap();
        assert!(ef.energy(&p) < 1.0);
        assert!(ef.beta(&p).unwrap() > 0.0);
        let ef2 = CartesianEigenfunction::new(vec![0, 0], Flavor::Tlb).unwrap();
        assert!(ef2.beta(&p).is_err());
        assert!(CartesianEigenfunction::new(vec![1, 1], Flavor::Lb).is_err());
    }
}
