//! Energy lineshapes of decaying modes.
//!
//! A mode's time factor `T(t) = exp[-(1/tau - i l) t]`, with `l` its phase
//! frequency (`l = nu` in the elliptic model), has the half-line transform
//! `F(E) = ∫_0^∞ e^{iEt} T(t) dt = 1 / (1/tau - i (E + l))`, and
//! `|F|^2 / (pi tau)` is a Cauchy-Lorentz (Breit-Wigner) density with HWHM
//! `1/tau` centred at `E = -l`.
//!
//! Sign convention: elliptic distributions are located at `-l = -nu`;
//! hyperbolic ones at `+nu sqrt(1 + alpha^2)`. Only `|location|` and shifts
//! between modes are physically meaningful here.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::elliptic::eigenvalue;
use crate::evolution::hyperbolic_eigenvalue;
use crate::error::{Error, Result};
use crate::params::{Model, ModeIndex, NhParams};
use crate::special::CompositeGauss;

/// Truncation of the numerical transform in units of the lifetime.
pub const TRANSFORM_SPAN_LIFETIMES: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    hwhm: f64,
    location: f64,
}

impl Lorentzian {
    pub fn new(hwhm: f64, location: f64) -> Result<Self> {
        if !(hwhm.is_finite() && hwhm > 0.0) {
            return Err(Error::InvalidParams(format!("HWHM must be positive, got {hwhm}")));
        }
        if !location.is_finite() {
            return Err(Error::InvalidParams(format!("location must be finite, got {location}")));
        }
        Ok(Self { hwhm, location })
    }

    pub fn hwhm(&self) -> f64 {
        self.hwhm
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn pdf(&self, e: f64) -> f64 {
        let x = e - self.location;
        self.hwhm / (PI * (x * x + self.hwhm * self.hwhm))
    }

    pub fn peak(&self) -> f64 {
        1.0 / (PI * self.hwhm)
    }

    pub fn cdf(&self, e: f64) -> f64 {
        0.5 + ((e - self.location) / self.hwhm).atan() / PI
    }

    /// Probability mass in `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.cdf(b) - self.cdf(a)
    }
}

/// Time factor of the elliptic mode `(n, nu)`, `t -> e^{-t/tau} e^{i nu t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSignal {
    decay: f64,
    frequency: f64,
}

pub fn time_signal(mode: ModeIndex, params: &NhParams) -> Result<TimeSignal> {
    let lambda = eigenvalue(mode, params)?;
    if lambda.re < 0.0 {
        return Err(Error::NonPositiveDecay(lambda.re));
    }
    Ok(TimeSignal { decay: lambda.re, frequency: -lambda.im })
}

impl TimeSignal {
    pub fn new(decay: f64, frequency: f64) -> Result<Self> {
        if !decay.is_finite() || !frequency.is_finite() {
            return Err(Error::InvalidParams(format!("non-finite signal ({decay}, {frequency})")));
        }
        Ok(Self { decay, frequency })
    }

    pub fn decay_constant(&self) -> f64 {
        self.decay
    }

    /// Phase frequency `l`.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        Complex64::new(-self.decay * t, self.frequency * t).exp()
    }

    fn require_decay(&self) -> Result<()> {
        if self.decay > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveDecay(self.decay))
        }
    }

    /// Closed form `1 / (1/tau - i (E + l))`.
    pub fn half_line_fourier(&self, e: f64) -> Result<Complex64> {
        self.require_decay()?;
        Ok(Complex64::new(self.decay, -(e + self.frequency)).inv())
    }

    /// Composite Gauss-Legendre quadrature of `e^{iEt} T(t)` on
    /// `[0, 20 tau]`; the discarded tail is below `e^{-20} tau`.
    pub fn half_line_fourier_numeric(&self, e: f64) -> Result<Complex64> {
        self.require_decay()?;
        let t_max = TRANSFORM_SPAN_LIFETIMES / self.decay;
        // enough panels to resolve the fastest oscillation on the window
        let cycles = (e + self.frequency).abs() * t_max / (2.0 * PI);
        let panels = (200.0 + 4.0 * cycles).ceil() as usize;
        let rule = CompositeGauss::new(0.0, t_max, panels, 10);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            acc += w * Complex64::new(-self.decay * t, (e + self.frequency) * t).exp();
        }
        Ok(acc)
    }
}

/// Closed-form transform for mode `(n, nu)`.
pub fn half_line_fourier(mode: ModeIndex, params: &NhParams, e: f64) -> Result<Complex64> {
    time_signal(mode, params)?.half_line_fourier(e)
}

pub fn half_line_fourier_numeric(mode: ModeIndex, params: &NhParams, e: f64) -> Result<Complex64> {
    time_signal(mode, params)?.half_line_fourier_numeric(e)
}

/// `f(E) = (Upsilon/pi) |F(E)|^2` with `Upsilon = 1/tau`, located at `-nu`.
pub fn energy_distribution(mode: ModeIndex, params: &NhParams) -> Result<Lorentzian> {
    let signal = time_signal(mode, params)?;
    signal.require_decay()?;
    Lorentzian::new(signal.decay, -signal.frequency)
}

/// Hyperbolic distribution: HWHM `gamma`, location `nu sqrt(1 + alpha^2)`.
pub fn hyperbolic_energy_distribution(nu: i32, params: &NhParams) -> Result<Lorentzian> {
    params.require(Model::Hyperbolic)?;
    if params.gamma() <= 0.0 {
        return Err(Error::NonPositiveDecay(params.gamma()));
    }
    let a = params.alpha();
    Lorentzian::new(params.gamma(), nu as f64 * (1.0 + a * a).sqrt())
}

/// Time factor of a hyperbolic mode, decaying at `gamma`; its distribution is
/// [`hyperbolic_energy_distribution`].
pub fn hyperbolic_time_signal(nu: i32, params: &NhParams) -> Result<TimeSignal> {
    let lambda = hyperbolic_eigenvalue(nu, params)?;
    TimeSignal::new(lambda.re, -lambda.im)
}

/// HWHM read off sampled values by linear interpolation of the half-maximum
/// crossings on each side of the sampled peak.
pub fn measure_hwhm(energies: &[f64], values: &[f64]) -> Option<f64> {
    let (k, &peak) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = 0.5 * peak;
    let cross = |a: usize, b: usize| {
        let (ya, yb) = (values[a], values[b]);
        energies[a] + (half - ya) * (energies[b] - energies[a]) / (yb - ya)
    };
    let right = (k + 1..values.len()).find(|&m| values[m] <= half).map(|m| cross(m - 1, m))?;
    let left = (0..k).rev().find(|&m| values[m] <= half).map(|m| cross(m + 1, m))?;
    Some(0.5 * (right - left))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ell(alpha: f64, gamma: f64) -> NhParams {
        NhParams::elliptic(alpha, gamma).unwrap()
    }

    #[test]
    fn time_signal_examples() {
        let s = time_signal(ModeIndex::new(0, 0), &ell(1.0, 0.0)).unwrap();
        assert!((s.eval(1.0).re - (-1.0f64).exp()).abs() < 1e-15);
        // critical state with nu = 1: alpha (0 + 1 + 1) + gamma = 0
        let s = time_signal(ModeIndex::new(0, 1), &ell(1.0, -2.0)).unwrap();
        for k in 0..20 {
            assert!((s.eval(k as f64 * 0.9).norm() - 1.0).abs() < 1e-14);
        }
        // 1/tau = 0.5 * (0 + 1 + 2) = 1.5
        let s = time_signal(ModeIndex::new(0, 2), &ell(0.5, 0.0)).unwrap();
        let v = s.eval(PI);
        assert!((v.norm() - (-1.5 * PI).exp()).abs() < 1e-15);
        // gamma = -0.5 brings the same mode to e^{-t} e^{2it}
        let s = time_signal(ModeIndex::new(0, 2), &ell(0.5, -0.5)).unwrap();
        assert!((s.eval(PI).norm() - (-PI).exp()).abs() < 1e-15);
        assert!((v.arg() - (2.0 * PI).sin().atan2((2.0 * PI).cos())).abs() < 1e-12);
        assert!(time_signal(ModeIndex::new(0, 0), &ell(1.0, -2.0)).is_err());
    }

    #[test]
    fn transform_peak_and_half_width() {
        let p = ell(0.5, 0.2);
        let m = ModeIndex::new(1, 2);
        let s = time_signal(m, &p).unwrap();
        let l = s.frequency();
        let ups = s.decay_constant();
        let at_peak = half_line_fourier(m, &p, -l).unwrap();
        assert!((at_peak.re - 1.0 / ups).abs() < 1e-14);
        assert_eq!(at_peak.im, 0.0);
        let peak2 = at_peak.norm_sqr();
        for e in [-l - ups, -l + ups] {
            let v = half_line_fourier(m, &p, e).unwrap().norm_sqr();
            assert!((v - 0.5 * peak2).abs() < 1e-14 * peak2);
        }
    }

    #[test]
    fn transform_rejects_non_decaying() {
        let p = ell(1.0, -1.0);
        assert!(matches!(half_line_fourier(ModeIndex::new(0, 0), &p, 0.0), Err(Error::NonPositiveDecay(_))));
        assert!(energy_distribution(ModeIndex::new(0, 0), &p).is_err());
    }

    #[test]
    fn energy_distribution_examples() {
        let f = energy_distribution(ModeIndex::new(0, 0), &ell(1.0, 0.0)).unwrap();
        assert_eq!(f.hwhm(), 1.0);
        assert!((f.pdf(f.location()) - 1.0 / PI).abs() < 1e-16);
        let f = energy_distribution(ModeIndex::new(1, 0), &ell(0.5, 0.0)).unwrap();
        assert_eq!((f.hwhm(), f.location()), (1.5, 0.0));
    }

    #[test]
    fn narrow_width_limit_concentrates_mass() {
        let eps = 1e-2;
        let mut last = 0.0;
        for gamma_shift in [1e-1, 1e-2, 1e-3, 1e-4, 1e-6] {
            // gamma -> -alpha makes the ground-state width -> 0
            let f = energy_distribution(ModeIndex::new(0, 0), &ell(1.0, -1.0 + gamma_shift)).unwrap();
            let m = f.mass(f.location() - eps, f.location() + eps);
            assert!(m > last);
            last = m;
        }
        assert!(last > 0.999);
    }

    #[test]
    fn hyperbolic_distribution_examples() {
        let f = hyperbolic_energy_distribution(0, &NhParams::hyperbolic(2.3, 0.5).unwrap()).unwrap();
        assert_eq!((f.hwhm(), f.location()), (0.5, 0.0));
        let p = NhParams::hyperbolic(1.0, 1.0).unwrap();
        let f1 = hyperbolic_energy_distribution(1, &p).unwrap();
        let f2 = hyperbolic_energy_distribution(2, &p).unwrap();
        assert_eq!(f1.hwhm(), f2.hwhm());
        assert!((f1.location() - 2f64.sqrt()).abs() < 1e-15);
        assert!((f2.location() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        let f = hyperbolic_energy_distribution(3, &NhParams::hyperbolic(1e-12, 1.0).unwrap()).unwrap();
        assert_eq!(f.location(), 3.0);
        assert!(hyperbolic_energy_distribution(1, &NhParams::hyperbolic(1.0, 0.0).unwrap()).is_err());
        assert!(hyperbolic_energy_distribution(1, &ell(1.0, 1.0)).is_err());
    }

    #[test]
    fn hyperbolic_signal_matches_its_distribution() {
        let p = NhParams::hyperbolic(1.0, 0.4).unwrap();
        for nu in [1, 2] {
            let s = hyperbolic_time_signal(nu, &p).unwrap();
            let f = hyperbolic_energy_distribution(nu, &p).unwrap();
            for e in [-1.0, 0.5, 1.4, 2.9] {
                let g = s.decay_constant() / PI * s.half_line_fourier(e).unwrap().norm_sqr();
                assert!((g - f.pdf(e)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hwhm_from_samples() {
        let f = Lorentzian::new(0.7, -1.2).unwrap();
        let es: Vec<f64> = (0..=1000).map(|k| f.location() - 3.5 + 7.0 * k as f64 / 1000.0).collect();
        let vs: Vec<f64> = es.iter().map(|&e| f.pdf(e)).collect();
        let h = measure_hwhm(&es, &vs).unwrap();
        assert!((h - 0.7).abs() < 1e-3 * 0.7);
    }
}
