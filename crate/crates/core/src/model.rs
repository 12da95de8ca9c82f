//! Closed-form scalar functions of the model: geometry, potentials,
//! effective potentials and the exact spectrum. Every function takes the
//! radius `r` as its argument; callers working in the flattened coordinate
//! `Q` compose with [`ModelParams::inverse_flattening`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "N")]
    pub dim: usize,
    pub lambda: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { dim: 3, lambda: 0.02, omega: 1.0, hbar: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveMinimum {
    pub r_min: f64,
    pub u_min: f64,
}

/// Energy value that may be infinite; serialized as the string `"inf"`
/// rather than an overflowing float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Finite(f64),
    Infinite,
}

impl Threshold {
    pub fn value(self) -> f64 {
        match self {
            Threshold::Finite(v) => v,
            Threshold::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Threshold::Finite(_))
    }
}

impl Serialize for Threshold {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threshold::Finite(v) => s.serialize_f64(*v),
            Threshold::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Threshold::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Threshold::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad threshold `{s}`"))),
        }
    }
}

impl ModelParams {
    pub fn new(dim: usize, lambda: f64, omega: f64, hbar: f64) -> Result<Self> {
        let p = Self { dim, lambda, omega, hbar };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParams(format!("N must be at least 2, got {}", self.dim)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParams(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::InvalidParams(format!("omega must be finite and >= 0, got {}", self.omega)));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::InvalidParams(format!("hbar must be finite and > 0, got {}", self.hbar)));
        }
        Ok(())
    }

    pub fn is_flat(&self) -> bool {
        self.lambda == 0.0
    }

    /// Conformal factor `D = 1 + lambda r^2`.
    pub fn conformal_factor(&self, r: f64) -> f64 {
        1.0 + self.lambda * r * r
    }

    pub fn scalar_curvature(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        let l = self.lambda;
        let d = self.conformal_factor(r);
        -l * (n - 1.0) * (2.0 * n + 3.0 * (n - 2.0) * l * r * r) / (d * d * d)
    }

    pub fn oscillator_potential(&self, r: f64) -> f64 {
        self.omega * self.omega * r * r / (2.0 * self.conformal_factor(r))
    }

    /// `Q(r) = r sqrt(D)/2 + asinh(sqrt(lambda) r)/(2 sqrt(lambda))`, with
    /// `Q = r` at `lambda = 0`.
    pub fn flattening_coordinate(&self, r: f64) -> f64 {
        if self.is_flat() {
            return r;
        }
        let s = self.lambda.sqrt();
        let x = s * r;
        if x < 1e-4 {
            // series avoids cancellation between the two halves
            let x2 = x * x;
            return r * (1.0 + x2 / 6.0 - x2 * x2 / 40.0 + x2 * x2 * x2 / 112.0);
        }
        0.5 * r * self.conformal_factor(r).sqrt() + x.asinh() / (2.0 * s)
    }

    /// `dQ/dr = sqrt(D)`.
    pub fn flattening_derivative(&self, r: f64) -> f64 {
        self.conformal_factor(r).sqrt()
    }

    /// Inverse of [`Self::flattening_coordinate`] by safeguarded Newton
    /// iteration on a geometrically grown bracket.
    pub fn inverse_flattening(&self, q_target: f64) -> Result<f64> {
        if !(q_target.is_finite() && q_target >= 0.0) {
            return Err(Error::Domain(format!("Q must be finite and >= 0, got {q_target}")));
        }
        if self.is_flat() || q_target == 0.0 {
            return Ok(q_target);
        }
        let f = |r: f64| self.flattening_coordinate(r) - q_target;
        let mut lo = 0.0;
        let mut hi = 2.0 * q_target + 1.0;
        while f(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        // Q >= r always, so r* <= Q is a good start
        let mut r = q_target.min(hi).max(lo);
        for _ in 0..200 {
            let val = f(r);
            if val.abs() <= 1e-12 * (1.0 + q_target) * 1e-2 {
                return Ok(r);
            }
            if val < 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let mut next = r - val / self.flattening_derivative(r);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= f64::EPSILON * r.max(1.0) {
                return Ok(next);
            }
            r = next;
        }
        Ok(r)
    }

    pub fn classical_effective_potential(&self, c_n: f64, r: f64) -> Result<f64> {
        if r < 0.0 || (r == 0.0 && c_n > 0.0) {
            return Err(Error::Domain(format!("effective potential needs r > 0, got {r}")));
        }
        if c_n == 0.0 {
            return Ok(self.oscillator_potential(r));
        }
        let d = self.conformal_factor(r);
        Ok(c_n / (2.0 * d * r * r) + self.omega * self.omega * r * r / (2.0 * d))
    }

    pub fn classical_effective_minimum(&self, c_n: f64) -> Result<EffectiveMinimum> {
        if !(c_n > 0.0) {
            return Err(Error::Domain("effective minimum requires c_N > 0".into()));
        }
        if !(self.omega > 0.0) {
            return Err(Error::Domain("effective minimum requires omega > 0".into()));
        }
        let l = self.lambda;
        let w2 = self.omega * self.omega;
        let root = (l * l * c_n * c_n + w2 * c_n).sqrt();
        let r_min = ((l * c_n + root) / w2).sqrt();
        Ok(EffectiveMinimum { r_min, u_min: root - l * c_n })
    }

    /// Quantum effective potential of the transformed radial problem in
    /// `u(Q)` form. For `N = 2, l = 0` this is the exceptional expression
    /// that is negative near the origin.
    pub fn quantum_effective_potential(&self, l: u32, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("quantum effective potential needs r > 0, got {r}")));
        }
        let n = self.dim as f64;
        let lf = l as f64;
        let d = self.conformal_factor(r);
        let h2 = self.hbar * self.hbar;
        let r2 = r * r;
        let curvature_term = h2 * (8.0 * d - 5.0) / (4.0 * r2 * d * d);
        let centrifugal = h2 / r2 * (lf * (lf + n - 2.0) + n * (n - 4.0) / 4.0);
        Ok((curvature_term + centrifugal + self.omega * self.omega * r2) / (2.0 * d))
    }

    /// Minimum of the quantum effective potential for `l`, located by
    /// golden-section search on a bracket around the classical minimum.
    pub fn quantum_effective_minimum(&self, l: u32) -> Result<EffectiveMinimum> {
        if self.dim == 2 && l == 0 {
            return Err(Error::Domain("N = 2, l = 0 effective potential has no minimum".into()));
        }
        let f = |r: f64| self.quantum_effective_potential(l, r).unwrap_or(f64::INFINITY);
        // coarse logarithmic scan followed by golden-section refinement
        let samples: Vec<f64> = (0..=4000).map(|k| 1e-3 * 10f64.powf(k as f64 * 6.0 / 4000.0)).collect();
        let (mut best, mut best_val) = (0usize, f64::INFINITY);
        for (k, &r) in samples.iter().enumerate() {
            let v = f(r);
            if v < best_val {
                best = k;
                best_val = v;
            }
        }
        if best == 0 || best == samples.len() - 1 {
            return Err(Error::Domain("quantum effective potential has no interior minimum".into()));
        }
        let r_min = golden_section(&f, samples[best - 1], samples[best + 1], 1e-13);
        Ok(EffectiveMinimum { r_min, u_min: f(r_min) })
    }

    /// `E_n = -lambda hbar^2 k^2 + hbar k sqrt(hbar^2 lambda^2 k^2 + omega^2)`
    /// with `k = n + N/2`.
    pub fn closed_form_energy(&self, n: u32) -> f64 {
        let k = n as f64 + self.dim as f64 / 2.0;
        let hk = self.hbar * k;
        let l = self.lambda;
        if self.is_flat() {
            return hk * self.omega;
        }
        // rationalized form avoids cancellation for small lambda
        let w2 = self.omega * self.omega;
        hk * w2 / (l * hk + (l * l * hk * hk + w2).sqrt())
    }

    /// `Omega(E) = sqrt(omega^2 - 2 lambda E)`; `None` above threshold.
    pub fn omega_eff(&self, energy: f64) -> Option<f64> {
        let s = self.omega * self.omega - 2.0 * self.lambda * energy;
        (s >= 0.0).then(|| s.sqrt())
    }

    pub fn continuum_threshold(&self) -> Threshold {
        if self.is_flat() {
            Threshold::Infinite
        } else {
            Threshold::Finite(self.omega * self.omega / (2.0 * self.lambda))
        }
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs() + b.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(dim: usize, lambda: f64) -> ModelParams {
        ModelParams::new(dim, lambda, 1.0, 1.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ModelParams::new(1, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(3, -0.1, 1.0, 1.0).is_err());
        assert!(ModelParams::new(3, 0.1, 1.0, 0.0).is_err());
        assert!(ModelParams::new(3, 0.1, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn curvature_values() {
        assert!((p(3, 0.1).scalar_curvature(0.0) + 1.2).abs() < 1e-14);
        assert_eq!(p(5, 0.0).scalar_curvature(2.0), 0.0);
        let m = p(3, 0.1);
        let (n, l, r) = (3.0, 0.1, 2.0);
        let direct = -2.0 * l * n * (n - 1.0) * (2.0 * n + 3.0 * (n - 2.0) * l * r * r)
            / (2.0 * n * (1.0f64 + l * r * r).powi(3));
        assert!((m.scalar_curvature(r) - direct).abs() < 1e-14);
    }

    #[test]
    fn potential_asymptotes() {
        assert!((p(3, 0.1).oscillator_potential(1e9) - 5.0).abs() < 1e-6);
        assert!((p(3, 0.04).oscillator_potential(1e9) - 12.5).abs() < 1e-6);
        assert_eq!(p(3, 0.0).oscillator_potential(2.0), 2.0);
    }

    #[test]
    fn flattening_values_and_inverse() {
        assert_eq!(p(3, 0.0).flattening_coordinate(3.7), 3.7);
        let q = p(3, 1.0).flattening_coordinate(1.0);
        assert!((q - (2f64.sqrt() / 2.0 + 1f64.asinh() / 2.0)).abs() < 1e-15);
        let m = p(3, 0.02);
        let r = m.inverse_flattening(m.flattening_coordinate(3.49)).unwrap();
        assert!((r - 3.49).abs() < 1e-10);
        for &lam in &[1e-9, 1e-6, 0.02, 1.0, 50.0] {
            let m = p(3, lam);
            for &qs in &[1e-8, 1e-3, 0.5, 3.0, 40.0, 3000.0] {
                let r = m.inverse_flattening(qs).unwrap();
                assert!((m.flattening_coordinate(r) - qs).abs() <= 1e-12 * (1.0 + qs), "lam={lam} Q={qs}");
            }
        }
    }

    #[test]
    fn flattening_series_matches_closed_form() {
        let m = p(3, 1.0);
        for &r in &[2e-5, 5e-5, 9.9e-5] {
            let s = m.lambda.sqrt();
            let direct = 0.5 * r * m.conformal_factor(r).sqrt() + (s * r).asinh() / (2.0 * s);
            assert!((m.flattening_coordinate(r) - direct).abs() < 1e-16);
        }
    }

    #[test]
    fn classical_minimum() {
        let m = p(3, 0.02);
        let e = m.classical_effective_minimum(100.0).unwrap();
        assert_eq!(format!("{:.2}", e.r_min), "3.49");
        assert_eq!(format!("{:.1}", e.u_min), "8.2");
        let v = m.classical_effective_potential(100.0, e.r_min).unwrap();
        assert!((v - e.u_min).abs() < 1e-12 * e.u_min);
        let h = 1e-6;
        let dv = (m.classical_effective_potential(100.0, e.r_min + h).unwrap()
            - m.classical_effective_potential(100.0, e.r_min - h).unwrap())
            / (2.0 * h);
        assert!(dv.abs() < 1e-6);
        let flat = p(3, 0.0).classical_effective_minimum(100.0).unwrap();
        assert!((flat.r_min - 10f64.sqrt()).abs() < 1e-14);
        assert!((flat.u_min - 10.0).abs() < 1e-12);
        assert!(e.r_min > flat.r_min && e.u_min < flat.u_min);
        assert!(m.classical_effective_minimum(0.0).is_err());
        assert!(m.classical_effective_potential(1.0, 0.0).is_err());
    }

    #[test]
    fn quantum_minimum_fig_values() {
        let e = p(3, 0.02).quantum_effective_minimum(10).unwrap();
        assert_eq!(format!("{:.2}", e.r_min), "3.59");
        assert_eq!(format!("{:.2}", e.u_min), "8.52");
        let f = p(3, 0.0).quantum_effective_minimum(10).unwrap();
        assert!((f.u_min - 110f64.sqrt()).abs() < 1e-9);
        assert!((f.r_min - 110f64.powf(0.25)).abs() < 1e-6);
    }

    #[test]
    fn exceptional_two_dimensional_s_wave() {
        let m = p(2, 0.1);
        assert!(m.quantum_effective_potential(0, 0.1).unwrap() < 0.0);
        assert!((m.quantum_effective_potential(0, 1e7).unwrap() - 5.0).abs() < 1e-6);
        assert!(m.quantum_effective_minimum(0).is_err());
    }

    #[test]
    fn energies() {
        let e0: Vec<String> =
            [0.0, 0.01, 0.02, 0.04].iter().map(|&l| format!("{:.2}", p(3, l).closed_form_energy(0))).collect();
        assert_eq!(e0, ["1.50", "1.48", "1.46", "1.41"]);
        let m = p(3, 0.02);
        for n in 0..50 {
            let e = m.closed_form_energy(n);
            let k = n as f64 + 1.5;
            let direct = -0.02 * k * k + k * (0.0004 * k * k + 1.0f64).sqrt();
            assert!((e - direct).abs() < 1e-12 * e);
            assert!((m.omega_eff(e).unwrap() * k - e).abs() < 1e-12 * e);
            assert!(e < 25.0 && m.closed_form_energy(n + 1) > e);
            let gap = m.closed_form_energy(n + 1) - e;
            assert!(m.closed_form_energy(n + 2) - m.closed_form_energy(n + 1) < gap);
        }
        assert_eq!(p(4, 0.0).closed_form_energy(3), 5.0);
    }

    #[test]
    fn thresholds() {
        assert_eq!(p(3, 0.02).continuum_threshold(), Threshold::Finite(25.0));
        assert_eq!(p(3, 0.01).continuum_threshold(), Threshold::Finite(50.0));
        assert_eq!(p(3, 0.04).continuum_threshold(), Threshold::Finite(12.5));
        assert_eq!(p(3, 0.0).continuum_threshold(), Threshold::Infinite);
        assert_eq!(serde_json::to_string(&Threshold::Infinite).unwrap(), "\"inf\"");
    }
}
