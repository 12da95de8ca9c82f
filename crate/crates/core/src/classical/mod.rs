//! Classical dynamics of `H = (p^2 + omega^2 q^2) / (2 (1 + lambda q^2))`.

mod closure;
mod hyperspherical;
pub mod integrator;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use integrator::{Dopri5, StepControl};

pub use closure::{orbit_closure, period_estimate, ClosureReport, ClosureStatus};
pub use hyperspherical::{
    from_hyperspherical, radial_reduction_check, to_hyperspherical, HypersphericalState, RadialReduction,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() || q.len() < 2 {
            return Err(Error::InvalidParams(format!("q and p need equal length >= 2, got {} and {}", q.len(), p.len())));
        }
        if q.iter().chain(&p).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("state entries must be finite".into()));
        }
        Ok(Self { q, p, t: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    fn flat(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    fn from_flat(y: &[f64], t: f64) -> Self {
        let n = y.len() / 2;
        Self { q: y[..n].to_vec(), p: y[n..].to_vec(), t }
    }

    /// Euclidean distance in phase space, ignoring time.
    pub fn distance(&self, other: &PhaseState) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .chain(self.p.iter().zip(&other.p))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn radius(&self) -> f64 {
        norm2(&self.q).sqrt()
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn check_dim(params: &ModelParams, state: &PhaseState) -> Result<()> {
    if params.dim != state.dim() {
        return Err(Error::InvalidParams(format!("state has dimension {}, model has {}", state.dim(), params.dim)));
    }
    Ok(())
}

pub fn hamiltonian(params: &ModelParams, state: &PhaseState) -> f64 {
    let q2 = norm2(&state.q);
    let p2 = norm2(&state.p);
    (p2 + params.omega * params.omega * q2) / (2.0 * (1.0 + params.lambda * q2))
}

/// Canonical equations: `dq/dt = p / D`,
/// `dp/dt = lambda q (p^2 + omega^2 q^2) / D^2 - omega^2 q / D`.
pub fn equations_of_motion(params: &ModelParams, q: &[f64], p: &[f64], dq: &mut [f64], dp: &mut [f64]) {
    let q2 = norm2(q);
    let p2 = norm2(p);
    let w2 = params.omega * params.omega;
    let d = 1.0 + params.lambda * q2;
    let a = params.lambda * (p2 + w2 * q2) / (d * d) - w2 / d;
    for i in 0..q.len() {
        dq[i] = p[i] / d;
        dp[i] = a * q[i];
    }
}

/// Values of all the constants of motion at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalInvariants {
    pub hamiltonian: f64,
    /// `C^(m)` for `m = 2..=N`.
    pub upper: Vec<f64>,
    /// `C_(m)` for `m = 2..=N`.
    pub lower: Vec<f64>,
    pub fradkin: Vec<Vec<f64>>,
}

impl ClassicalInvariants {
    /// Flattened `(name, value)` list: `H`, `C^(m)`, `C_(m)` for
    /// `m < N`, and the independent Fradkin entries `I[i,j]`, `i <= j`.
    pub fn named(&self) -> Vec<(String, f64)> {
        let n = self.fradkin.len();
        let mut out = vec![("H".to_string(), self.hamiltonian)];
        for (k, v) in self.upper.iter().enumerate() {
            out.push((format!("C^({})", k + 2), *v));
        }
        for (k, v) in self.lower.iter().enumerate().take(n - 2) {
            out.push((format!("C_({})", k + 2), *v));
        }
        for i in 0..n {
            for j in i..n {
                out.push((format!("I[{},{}]", i + 1, j + 1), self.fradkin[i][j]));
            }
        }
        out
    }
}

fn angular_sum(q: &[f64], p: &[f64], from: usize, to: usize) -> f64 {
    let mut s = 0.0;
    for i in from..to {
        for j in (i + 1)..to {
            let l = q[i] * p[j] - q[j] * p[i];
            s += l * l;
        }
    }
    s
}

pub fn classical_invariants(params: &ModelParams, state: &PhaseState) -> Result<ClassicalInvariants> {
    check_dim(params, state)?;
    let n = state.dim();
    let (q, p) = (&state.q, &state.p);
    let h = hamiltonian(params, state);
    let upper = (2..=n).map(|m| angular_sum(q, p, 0, m)).collect();
    let lower = (2..=n).map(|m| angular_sum(q, p, n - m, n)).collect();
    let k = 2.0 * params.lambda * h - params.omega * params.omega;
    let fradkin = (0..n).map(|i| (0..n).map(|j| p[i] * p[j] - k * q[i] * q[j]).collect()).collect();
    Ok(ClassicalInvariants { hamiltonian: h, upper, lower, fradkin })
}

/// Which function from the constants of motion to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    Hamiltonian,
    Upper(usize),
    Lower(usize),
    Fradkin(usize, usize),
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::Hamiltonian => "H".into(),
            Observable::Upper(m) => format!("C^({m})"),
            Observable::Lower(m) => format!("C_({m})"),
            Observable::Fradkin(i, j) => format!("I[{},{}]", i + 1, j + 1),
        }
    }

    pub fn eval(&self, params: &ModelParams, q: &[f64], p: &[f64]) -> f64 {
        let n = q.len();
        match *self {
            Observable::Hamiltonian => {
                let q2 = norm2(q);
                (norm2(p) + params.omega * params.omega * q2) / (2.0 * (1.0 + params.lambda * q2))
            }
            Observable::Upper(m) => angular_sum(q, p, 0, m),
            Observable::Lower(m) => angular_sum(q, p, n - m, n),
            Observable::Fradkin(i, j) => {
                let h = Observable::Hamiltonian.eval(params, q, p);
                p[i] * p[j] - (2.0 * params.lambda * h - params.omega * params.omega) * q[i] * q[j]
            }
        }
    }

    /// Analytic gradient with respect to `(q, p)`.
    pub fn gradient(&self, params: &ModelParams, q: &[f64], p: &[f64]) -> Vec<f64> {
        let n = q.len();
        let mut g = vec![0.0; 2 * n];
        let lam = params.lambda;
        let w2 = params.omega * params.omega;
        let q2 = norm2(q);
        let d = 1.0 + lam * q2;
        let h = Observable::Hamiltonian.eval(params, q, p);
        let grad_h = |g: &mut [f64], scale: f64| {
            for i in 0..n {
                g[i] += scale * (w2 - 2.0 * lam * h) * q[i] / d;
                g[n + i] += scale * p[i] / d;
            }
        };
        match *self {
            Observable::Hamiltonian => grad_h(&mut g, 1.0),
            Observable::Upper(m) | Observable::Lower(m) => {
                let (from, to) = if matches!(self, Observable::Upper(_)) { (0, m) } else { (n - m, n) };
                for i in from..to {
                    for j in (i + 1)..to {
                        let l = q[i] * p[j] - q[j] * p[i];
                        g[i] += 2.0 * l * p[j];
                        g[j] -= 2.0 * l * p[i];
                        g[n + j] += 2.0 * l * q[i];
                        g[n + i] -= 2.0 * l * q[j];
                    }
                }
            }
            Observable::Fradkin(i, j) => {
                let k = 2.0 * lam * h - w2;
                g[n + i] += p[j];
                g[n + j] += p[i];
                g[i] -= k * q[j];
                g[j] -= k * q[i];
                grad_h(&mut g, -2.0 * lam * q[i] * q[j]);
            }
        }
        g
    }
}

/// Finite-difference gradient with per-coordinate step `h * max(1, |x|)`.
pub fn numerical_gradient(f: &dyn Fn(&[f64], &[f64]) -> f64, q: &[f64], p: &[f64], h: f64) -> Vec<f64> {
    let n = q.len();
    let mut x: Vec<f64> = q.iter().chain(p).copied().collect();
    let mut g = vec![0.0; 2 * n];
    for k in 0..2 * n {
        let x0 = x[k];
        let step = h * x0.abs().max(1.0);
        x[k] = x0 + step;
        let fp = f(&x[..n], &x[n..]);
        x[k] = x0 - step;
        let fm = f(&x[..n], &x[n..]);
        x[k] = x0;
        g[k] = (fp - fm) / (2.0 * step);
    }
    g
}

/// Poisson bracket `{f, g}` from central finite differences.
pub fn poisson_bracket(params: &ModelParams, f: Observable, g: Observable, state: &PhaseState) -> f64 {
    let n = state.dim();
    let ff = |q: &[f64], p: &[f64]| f.eval(params, q, p);
    let gf = |q: &[f64], p: &[f64]| g.eval(params, q, p);
    let df = numerical_gradient(&ff, &state.q, &state.p, 1e-6);
    let dg = numerical_gradient(&gf, &state.q, &state.p, 1e-6);
    (0..n).map(|i| df[i] * dg[n + i] - df[n + i] * dg[i]).sum()
}

/// Every constant of motion, Fradkin entries with `i <= j`.
pub fn all_observables(dim: usize) -> Vec<Observable> {
    let mut out = vec![Observable::Hamiltonian];
    out.extend((2..=dim).map(Observable::Upper));
    out.extend((2..dim).map(Observable::Lower));
    for i in 0..dim {
        for j in i..dim {
            out.push(Observable::Fradkin(i, j));
        }
    }
    out
}

/// `{H, C^(m), C_(m), I_ii}` for a fixed `i`, expected to be `2N - 1`
/// independent functions.
pub fn independence_set(dim: usize, fixed_i: usize) -> Vec<Observable> {
    let mut out = vec![Observable::Hamiltonian];
    out.extend((2..=dim).map(Observable::Upper));
    out.extend((2..dim).map(Observable::Lower));
    out.push(Observable::Fradkin(fixed_i, fixed_i));
    out
}

/// `{H, C_(m)}`, `m = 2..=N`: the involutive set built on the trailing
/// coordinates.
pub fn lower_involutive_set(dim: usize) -> Vec<Observable> {
    let mut out = vec![Observable::Hamiltonian];
    out.extend((2..=dim).map(Observable::Lower));
    out
}

pub fn upper_involutive_set(dim: usize) -> Vec<Observable> {
    let mut out = vec![Observable::Hamiltonian];
    out.extend((2..=dim).map(Observable::Upper));
    out
}

pub fn fradkin_diagonal_set(dim: usize) -> Vec<Observable> {
    (0..dim).map(|i| Observable::Fradkin(i, i)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Numerical rank of the Jacobian of `set`; singular values below
/// `1e-8` times the largest are treated as zero.
pub fn jacobian_rank(params: &ModelParams, set: &[Observable], state: &PhaseState) -> RankReport {
    let n = state.dim();
    let rows: Vec<Vec<f64>> = set.iter().map(|o| o.gradient(params, &state.q, &state.p)).collect();
    let m = DMatrix::from_fn(rows.len(), 2 * n, |i, j| rows[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > 1e-8 * top).count();
    RankReport { rank, singular_values: sv }
}

pub fn independence_rank(params: &ModelParams, state: &PhaseState, fixed_i: usize) -> Result<RankReport> {
    check_dim(params, state)?;
    if fixed_i >= params.dim {
        return Err(Error::InvalidParams(format!("fixed index {fixed_i} out of range")));
    }
    Ok(jacobian_rank(params, &independence_set(params.dim, fixed_i), state))
}

/// Uniform sample from the unit ball in `R^n`.
fn unit_ball<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if norm2(&v) <= 1.0 {
            return v;
        }
    }
}

/// Random state with `q` and `p` from the unit ball, rejecting
/// configurations too close to the hyperspherical chart singularities
/// and, for `lambda > 0`, energies at or above the continuum threshold.
pub fn random_bounded_state<R: Rng>(params: &ModelParams, rng: &mut R) -> PhaseState {
    loop {
        let q = unit_ball(rng, params.dim);
        let p = unit_ball(rng, params.dim);
        let s = PhaseState { q, p, t: 0.0 };
        if s.radius() < 1e-3 || hyperspherical::near_axis(&s.q, 1e-3) {
            continue;
        }
        if let crate::model::Threshold::Finite(e) = params.continuum_threshold() {
            if hamiltonian(params, &s) >= e {
                continue;
            }
        }
        return s;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantDrift {
    pub name: String,
    pub initial: f64,
    /// `max |I(t) - I(0)| / max(1, |I(0)|)` over the samples.
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub samples: Vec<PhaseState>,
    pub drift: Vec<InvariantDrift>,
    pub steps: usize,
    pub rejected_steps: usize,
}

impl TrajectoryRecord {
    pub fn max_drift(&self) -> f64 {
        self.drift.iter().map(|d| d.drift).fold(0.0, f64::max)
    }

    pub fn energy_drift(&self) -> f64 {
        self.drift.iter().find(|d| d.name == "H").map_or(0.0, |d| d.drift)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let n = self.samples.first().map_or(0, PhaseState::dim);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("q{i}")));
        header.extend((1..=n).map(|i| format!("p{i}")));
        out.write_record(&header).map_err(csv_err)?;
        for s in &self.samples {
            let row: Vec<String> =
                std::iter::once(s.t).chain(s.q.iter().copied()).chain(s.p.iter().copied()).map(fmt_f64).collect();
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Shortest representation that round-trips.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Integrates from `initial` and records the state at each of `times`.
pub fn integrate_at(params: &ModelParams, initial: &PhaseState, times: &[f64], tol: f64) -> Result<Vec<PhaseState>> {
    check_dim(params, initial)?;
    let n = params.dim;
    let p = *params;
    let rhs = move |y: &[f64], dy: &mut [f64]| {
        let (dq, dp) = dy.split_at_mut(n);
        equations_of_motion(&p, &y[..n], &y[n..], dq, dp);
    };
    let mut ig = Dopri5::new(rhs, initial.t, initial.flat(), StepControl::new(tol)?);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        ig.advance_to(t)?;
        out.push(PhaseState::from_flat(&ig.y, t));
    }
    Ok(out)
}

/// Integrates to `t_end` with `n_samples` evenly spaced records and
/// measures the drift of every constant of motion.
pub fn integrate(
    params: &ModelParams,
    initial: &PhaseState,
    t_end: f64,
    tol: f64,
    n_samples: usize,
) -> Result<TrajectoryRecord> {
    check_dim(params, initial)?;
    params.validate()?;
    if !(t_end > initial.t) {
        return Err(Error::InvalidParams(format!("t_end must exceed the initial time, got {t_end}")));
    }
    let n_samples = n_samples.max(2);
    let times: Vec<f64> = (1..n_samples)
        .map(|k| initial.t + (t_end - initial.t) * k as f64 / (n_samples - 1) as f64)
        .collect();
    let n = params.dim;
    let p = *params;
    let rhs = move |y: &[f64], dy: &mut [f64]| {
        let (dq, dp) = dy.split_at_mut(n);
        equations_of_motion(&p, &y[..n], &y[n..], dq, dp);
    };
    let mut ig = Dopri5::new(rhs, initial.t, initial.flat(), StepControl::new(tol)?);
    let mut samples = Vec::with_capacity(n_samples);
    samples.push(initial.clone());
    for &t in &times {
        ig.advance_to(t)?;
        samples.push(PhaseState::from_flat(&ig.y, t));
    }
    let reference = classical_invariants(params, initial)?.named();
    let mut drift: Vec<InvariantDrift> = reference
        .iter()
        .map(|(name, v)| InvariantDrift { name: name.clone(), initial: *v, drift: 0.0 })
        .collect();
    for s in &samples[1..] {
        for (d, (_, v)) in drift.iter_mut().zip(classical_invariants(params, s)?.named()) {
            d.drift = d.drift.max((v - d.initial).abs() / d.initial.abs().max(1.0));
        }
    }
    Ok(TrajectoryRecord { samples, drift, steps: ig.steps, rejected_steps: ig.rejected })
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
    fn hamiltonian_hand_values() {
        let s = PhaseState::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!((hamiltonian(&params(3, 0.1), &s) - 10.0 / 11.0).abs() < 1e-15);
        let s0 = PhaseState::new(vec![0.0, 0.0], vec![0.3, 0.4]).unwrap();
        assert!((hamiltonian(&params(2, 7.0), &s0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn equations_match_finite_differences() {
        let m = params(3, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let s = random_bounded_state(&m, &mut rng);
            let (mut dq, mut dp) = (vec![0.0; 3], vec![0.0; 3]);
            equations_of_motion(&m, &s.q, &s.p, &mut dq, &mut dp);
            let g = numerical_gradient(&|q, p| Observable::Hamiltonian.eval(&m, q, p), &s.q, &s.p, 1e-6);
            for i in 0..3 {
                assert!((dq[i] - g[3 + i]).abs() < 1e-6);
                assert!((dp[i] + g[i]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn flat_equations_and_restoring_force() {
        let m = params(2, 0.0);
        let (mut dq, mut dp) = (vec![0.0; 2], vec![0.0; 2]);
        equations_of_motion(&m, &[0.5, -1.0], &[2.0, 3.0], &mut dq, &mut dp);
        assert_eq!(dq, vec![2.0, 3.0]);
        assert_eq!(dp, vec![-0.5, 1.0]);
        let m = params(2, 0.02);
        equations_of_motion(&m, &[0.5, 0.0], &[0.0, 0.0], &mut dq, &mut dp);
        assert_eq!(dq, vec![0.0, 0.0]);
        assert!(dp[0] < 0.0);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let m = params(4, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_bounded_state(&m, &mut rng);
        for o in all_observables(4) {
            let g = o.gradient(&m, &s.q, &s.p);
            let fd = numerical_gradient(&|q, p| o.eval(&m, q, p), &s.q, &s.p, 1e-6);
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-7, "{}", o.name());
            }
        }
    }

    #[test]
    fn trace_identity_and_parallel_state() {
        let m = params(3, 0.02);
        let s = PhaseState::new(vec![0.3, -0.2, 0.5], vec![0.6, -0.4, 1.0]).unwrap();
        let inv = classical_invariants(&m, &s).unwrap();
        assert!(inv.upper.iter().chain(&inv.lower).all(|c| c.abs() < 1e-15));
        let trace: f64 = (0..3).map(|i| inv.fradkin[i][i]).sum::<f64>() / 2.0;
        assert!((trace - inv.hamiltonian).abs() < 1e-14 * inv.hamiltonian);
        let flat = classical_invariants(&params(3, 0.0), &s).unwrap();
        assert!((flat.fradkin[0][2] - (0.6 * 1.0 + 0.3 * 0.5)).abs() < 1e-15);
        assert_eq!(inv.upper[1], inv.lower[1]);
    }

    #[test]
    fn brackets_with_hamiltonian_vanish() {
        let m = params(3, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_bounded_state(&m, &mut rng);
        for o in all_observables(3) {
            assert!(poisson_bracket(&m, Observable::Hamiltonian, o, &s).abs() < 1e-6, "{}", o.name());
        }
        // a non-invariant does not commute
        let l12 = Observable::Fradkin(0, 1);
        assert!(poisson_bracket(&m, Observable::Fradkin(0, 0), l12, &s).abs() > 1e-4);
    }

    #[test]
    fn ranks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dim in [2, 3, 4] {
            let m = params(dim, 0.02);
            let s = random_bounded_state(&m, &mut rng);
            assert_eq!(independence_rank(&m, &s, 0).unwrap().rank, 2 * dim - 1);
            assert_eq!(jacobian_rank(&m, &lower_involutive_set(dim), &s).rank, dim);
            assert_eq!(jacobian_rank(&m, &all_observables(dim), &s).rank, 2 * dim - 1);
        }
    }

    #[test]
    fn flat_circular_orbit_has_period_two_pi() {
        let m = params(2, 0.0);
        let s = PhaseState::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let out = integrate_at(&m, &s, &[std::f64::consts::TAU], 1e-12).unwrap();
        assert!(out[0].distance(&s) < 1e-9);
    }

    #[test]
    fn drift_is_small_at_tight_tolerance() {
        let m = params(3, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_bounded_state(&m, &mut rng);
        let rec = integrate(&m, &s, 100.0, 1e-10, 201).unwrap();
        assert!(rec.max_drift() < 1e-7, "{}", rec.max_drift());
        assert!(rec.samples.windows(2).all(|w| w[1].t > w[0].t));
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,q1,q2,q3,p1,p2,p3\n"));
        assert_eq!(text.lines().count(), 202);
    }

    #[test]
    fn energy_above_threshold_escapes() {
        let m = params(3, 0.02);
        // H = p^2 / 2 at the origin, threshold 25
        let s = PhaseState::new(vec![0.0, 0.0, 0.0], vec![8.0, 0.0, 0.0]).unwrap();
        let rec = integrate(&m, &s, 200.0, 1e-10, 41).unwrap();
        let radii: Vec<f64> = rec.samples.iter().map(PhaseState::radius).collect();
        assert!(radii.windows(2).all(|w| w[1] > w[0]));
        assert!(*radii.last().unwrap() > 30.0);
    }
}
