//! Closed-form eigenbasis and decay spectrum of the elliptic model
//! (`beta == alpha`).
//!
//! In polar phase-space coordinates the evolution law becomes
//! `dW/dt = (alpha/4) Lap W - (alpha R^2 + gamma) W + dW/dPhi`. Its
//! square-integrable, single-valued solutions are
//!
//! ```text
//! B_{n,nu}(R, Phi, t) = e^{-lambda t} e^{i nu Phi} b_{n,nu}(R),
//! b_{n,nu}(R) = (-1)^n / pi * R^|nu| e^{-R^2} L_n^|nu|(2 R^2),
//! lambda = alpha (2n + 1 + |nu|) + gamma - i nu.
//! ```
//!
//! The real cosine/sine combinations `B+`, `B-` are what gets sampled and
//! projected on.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{rhs_with, Stencil};
use crate::grid::{integrate, l2_norm, GridSpec, WignerGrid};
use crate::params::{Model, ModeIndex, NhParams, Parity};
use crate::special::{laguerre, laguerre_sequence, rising_factorial_ratio};

/// `lambda = re + i im`; `re` is the decay constant `1/tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEigenvalue {
    pub re: f64,
    pub im: f64,
}

impl ComplexEigenvalue {
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Mean lifetime `1/re`; infinite when `re == 0`.
    pub fn lifetime(self) -> f64 {
        1.0 / self.re
    }
}

pub fn eigenvalue(mode: ModeIndex, params: &NhParams) -> Result<ComplexEigenvalue> {
    params.require(Model::Elliptic)?;
    Ok(ComplexEigenvalue { re: decay_constant(mode, params), im: -(mode.nu as f64) })
}

fn decay_constant(mode: ModeIndex, params: &NhParams) -> f64 {
    params.alpha() * (2.0 * mode.n as f64 + 1.0 + mode.abs_nu() as f64) + params.gamma()
}

/// Radial profile `b_{n,nu}(R)`.
pub fn radial_b(mode: ModeIndex, r: f64) -> f64 {
    let a = mode.abs_nu();
    let sign = if mode.n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign / PI * r.powi(a as i32) * (-r * r).exp() * laguerre(mode.n, a, 2.0 * r * r)
}

/// `N_{n,nu} = 2^{-(nu+2)} pi^{-2} (n+nu)!/n! = ∫_0^∞ b_{n,nu}^2 R dR`.
pub fn radial_norm(mode: ModeIndex) -> f64 {
    let a = mode.abs_nu();
    2f64.powi(-(a as i32 + 2)) / (PI * PI) * rising_factorial_ratio(mode.n, a)
}

/// `‖B±_{n,nu}(t=0)‖^2` over the plane: `2 pi N` for `nu = 0`, `pi N` otherwise.
pub fn basis_norm_squared(mode: ModeIndex, parity: Parity) -> Result<f64> {
    match (mode.nu, parity) {
        (0, Parity::Minus) => Err(Error::DegenerateBasis),
        (0, Parity::Plus) => Ok(2.0 * PI * radial_norm(mode)),
        _ => Ok(PI * radial_norm(mode)),
    }
}

/// A real basis member `A(t,R) cos[nu(t+Phi)]` or `A(t,R) sin[nu(t+Phi)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealBasis {
    mode: ModeIndex,
    parity: Parity,
    decay: f64,
}

/// Real basis member for elliptic parameters. Negative `nu` is allowed and
/// equals `B+_{n,|nu|}` or `-B-_{n,|nu|}`.
pub fn basis_real(mode: ModeIndex, parity: Parity, params: &NhParams) -> Result<RealBasis> {
    let decay = eigenvalue(mode, params)?.re;
    if mode.nu == 0 && parity == Parity::Minus {
        return Err(Error::DegenerateBasis);
    }
    Ok(RealBasis { mode, parity, decay })
}

/// Samples `B±_{n,nu}` at `t = 0`, where no parameters enter.
pub fn initial_basis_grid(mode: ModeIndex, parity: Parity, spec: GridSpec) -> Result<WignerGrid> {
    if mode.nu == 0 && parity == Parity::Minus {
        return Err(Error::DegenerateBasis);
    }
    let b = RealBasis { mode, parity, decay: 0.0 };
    Ok(b.sample(spec, 0.0))
}

impl RealBasis {
    pub fn mode(&self) -> ModeIndex {
        self.mode
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// `1/tau_{n,nu}`.
    pub fn decay_constant(&self) -> f64 {
        self.decay
    }

    pub fn amplitude(&self, r: f64, t: f64) -> f64 {
        (-self.decay * t).exp() * radial_b(self.mode, r)
    }

    fn angular(&self, phi: f64, t: f64) -> f64 {
        let arg = self.mode.nu as f64 * (t + phi);
        match self.parity {
            Parity::Plus => arg.cos(),
            Parity::Minus => arg.sin(),
        }
    }

    pub fn eval_polar(&self, r: f64, phi: f64, t: f64) -> f64 {
        self.amplitude(r, t) * self.angular(phi, t)
    }

    pub fn eval(&self, q: f64, p: f64, t: f64) -> f64 {
        self.eval_polar(q.hypot(p), p.atan2(q), t)
    }

    /// Analytic `dB/dt`.
    pub fn time_derivative(&self, q: f64, p: f64, t: f64) -> f64 {
        let r = q.hypot(p);
        let phi = p.atan2(q);
        let a = self.amplitude(r, t);
        let nu = self.mode.nu as f64;
        let arg = nu * (t + phi);
        let rotation = match self.parity {
            Parity::Plus => -nu * arg.sin(),
            Parity::Minus => nu * arg.cos(),
        };
        -self.decay * a * self.angular(phi, t) + a * rotation
    }

    pub fn sample(&self, spec: GridSpec, t: f64) -> WignerGrid {
        WignerGrid::from_fn(spec, |q, p| self.eval(q, p, t)).with_time(t)
    }
}

/// Number of strict local extrema (8-neighbourhood) over interior nodes whose
/// magnitude exceeds `1e-6 max|W|`.
pub fn count_extrema(w: &WignerGrid) -> usize {
    let n = w.n_points();
    let floor = 1e-6 * w.max_abs();
    let mut count = 0;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let c = w.at(i, j);
            if c.abs() <= floor {
                continue;
            }
            let mut is_max = true;
            let mut is_min = true;
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let v = w.at((i as isize + di) as usize, (j as isize + dj) as usize);
                    is_max &= c > v;
                    is_min &= c < v;
                }
            }
            if is_max || is_min {
                count += 1;
            }
        }
    }
    count
}

/// Strict local extrema of `b_{n,nu}` on `R >= 0`, counting `R = 0` when the
/// profile is extremal there (the profile is continued evenly).
pub fn count_radial_extrema(mode: ModeIndex, r_max: f64, samples: usize) -> usize {
    let h = r_max / samples as f64;
    let profile: Vec<f64> = (-(samples as isize)..=samples as isize)
        .map(|k| radial_b(mode, k as f64 * h))
        .collect();
    let floor = 1e-6 * profile.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (samples..profile.len() - 1)
        .filter(|&k| {
            let (l, c, r) = (profile[k - 1], profile[k], profile[k + 1]);
            c.abs() > floor && ((c > l && c > r) || (c < l && c < r))
        })
        .count()
}

/// Largest spread of `B` around circles `R = r_k`, relative to `max|B|`.
pub fn angular_asymmetry(basis: &RealBasis, t: f64, r_max: f64, rings: usize, angles: usize) -> f64 {
    let mut peak: f64 = 0.0;
    let mut spread: f64 = 0.0;
    for k in 0..=rings {
        let r = r_max * k as f64 / rings as f64;
        let vals: Vec<f64> =
            (0..angles).map(|m| basis.eval_polar(r, 2.0 * PI * m as f64 / angles as f64, t)).collect();
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        peak = peak.max(hi.abs()).max(lo.abs());
        spread = spread.max(hi - lo);
    }
    spread / peak
}

/// Coefficients over the real basis, keyed by `(mode, parity)` with `nu >= 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpectralCoeffs {
    terms: BTreeMap<(ModeIndex, Parity), f64>,
    n_max: u32,
    nu_max: u32,
}

impl SpectralCoeffs {
    pub fn new(n_max: u32, nu_max: u32) -> Self {
        Self { terms: BTreeMap::new(), n_max, nu_max }
    }

    /// Sets a coefficient. Negative `nu` is folded onto `|nu|` (the minus
    /// parity flips sign); `(n, 0, -)` is rejected.
    pub fn set(&mut self, mode: ModeIndex, parity: Parity, value: f64) -> Result<()> {
        let (mode, value) = canonical(mode, parity, value)?;
        self.n_max = self.n_max.max(mode.n);
        self.nu_max = self.nu_max.max(mode.abs_nu());
        self.terms.insert((mode, parity), value);
        Ok(())
    }

    pub fn add(&mut self, mode: ModeIndex, parity: Parity, value: f64) -> Result<()> {
        let (m, v) = canonical(mode, parity, value)?;
        let current = self.get(m, parity);
        self.set(m, parity, current + v)
    }

    pub fn get(&self, mode: ModeIndex, parity: Parity) -> f64 {
        match canonical(mode, parity, 1.0) {
            Ok((m, sign)) => sign * self.terms.get(&(m, parity)).copied().unwrap_or(0.0),
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Parity, f64)> + '_ {
        self.terms.iter().map(|(&(m, p), &v)| (m, p, v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn nu_max(&self) -> u32 {
        self.nu_max
    }

    /// Only `nu = 0` members carry trace; a density needs at least one.
    pub fn is_normalizable(&self) -> bool {
        self.terms.iter().any(|(&(m, _), &v)| m.nu == 0 && v != 0.0)
    }

    /// Trace implied by the expansion. Every `B+_{n,0}` integrates to one
    /// and every `nu != 0` member to zero.
    pub fn trace(&self) -> f64 {
        self.terms.iter().filter(|((m, _), _)| m.nu == 0).map(|(_, v)| v).sum()
    }
}

fn canonical(mode: ModeIndex, parity: Parity, value: f64) -> Result<(ModeIndex, f64)> {
    if mode.nu == 0 && parity == Parity::Minus {
        return Err(Error::DegenerateBasis);
    }
    if mode.nu < 0 {
        let sign = if parity == Parity::Minus { -1.0 } else { 1.0 };
        Ok((ModeIndex::new(mode.n, -mode.nu), sign * value))
    } else {
        Ok((mode, value))
    }
}

/// Result of projecting a grid on the truncated basis.
#[derive(Debug, Clone)]
pub struct Projection {
    pub coeffs: SpectralCoeffs,
    /// `‖W0 - reconstruction‖ / ‖W0‖` on the same grid.
    pub residual: f64,
}

/// Expands `W0` over `{B±_{n,nu}(t=0)}` for `n <= n_max`, `0 <= nu <= nu_max`.
pub fn project(w0: &WignerGrid, n_max: u32, nu_max: u32) -> Projection {
    let trace = integrate(w0);
    if (trace - 1.0).abs() > 1e-6 {
        warn!("projecting data with trace {trace}; expected 1 for a density at t = 0");
    }
    let spec = *w0.spec();
    let coords = spec.coords();
    let n = spec.n_points();
    let n_count = n_max as usize + 1;
    let nu_count = nu_max as usize + 1;
    // [nu][n][parity]
    let mut acc = vec![[0.0f64; 2]; nu_count * n_count];
    let mut lag = Vec::with_capacity(n_count);
    for j in 0..n {
        let wj = spec.weight(j);
        let p = coords[j];
        for i in 0..n {
            let v = w0.at(i, j);
            if v == 0.0 {
                continue;
            }
            let q = coords[i];
            let weighted = wj * spec.weight(i) * v;
            let r2 = q * q + p * p;
            let r = r2.sqrt();
            let phi = p.atan2(q);
            let gauss = (-r2).exp() / PI;
            let mut rpow = 1.0;
            for nu in 0..nu_count {
                laguerre_sequence(n_max, nu as u32, 2.0 * r2, &mut lag);
                let (s, c) = (nu as f64 * phi).sin_cos();
                for (k, l) in lag.iter().enumerate() {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let radial = sign * gauss * rpow * l;
                    let slot = &mut acc[nu * n_count + k];
                    slot[0] += weighted * radial * c;
                    slot[1] += weighted * radial * s;
                }
                rpow *= r;
            }
        }
    }
    let mut coeffs = SpectralCoeffs::new(n_max, nu_max);
    for nu in 0..nu_count {
        for k in 0..n_count {
            let mode = ModeIndex::new(k as u32, nu as i32);
            let slot = acc[nu * n_count + k];
            let plus = basis_norm_squared(mode, Parity::Plus).expect("plus parity always valid");
            coeffs.set(mode, Parity::Plus, slot[0] / plus).expect("canonical index");
            if nu > 0 {
                let minus = basis_norm_squared(mode, Parity::Minus).expect("nu > 0");
                coeffs.set(mode, Parity::Minus, slot[1] / minus).expect("canonical index");
            }
        }
    }
    let recon = synthesize(&coeffs, spec, 0.0, None);
    let mut diff = w0.clone();
    diff.add_scaled(-1.0, &recon).expect("same grid");
    let norm = l2_norm(w0);
    let residual = if norm > 0.0 { l2_norm(&diff) / norm } else { 0.0 };
    Projection { coeffs, residual }
}

/// `W(t) = Σ c± B±_{n,nu}(t)` sampled on `spec`.
pub fn evolve_analytic(coeffs: &SpectralCoeffs, t: f64, spec: GridSpec, params: &NhParams) -> Result<WignerGrid> {
    params.require(Model::Elliptic)?;
    if t < 0.0 {
        warn!("evolving backwards to t = {t}; decaying modes grow in this direction");
    }
    Ok(synthesize(coeffs, spec, t, Some(params)))
}

fn synthesize(coeffs: &SpectralCoeffs, spec: GridSpec, t: f64, params: Option<&NhParams>) -> WignerGrid {
    // Group terms by nu so one Laguerre recurrence serves every n.
    let mut by_nu: BTreeMap<u32, Vec<(u32, Parity, f64)>> = BTreeMap::new();
    for (m, parity, c) in coeffs.iter() {
        if c == 0.0 {
            continue;
        }
        let weight = match params {
            Some(p) => c * (-decay_constant(m, p) * t).exp(),
            None => c,
        };
        by_nu.entry(m.abs_nu()).or_default().push((m.n, parity, weight));
    }
    let mut lag = Vec::new();
    let mut out = WignerGrid::from_fn(spec, |q, p| {
        let r2 = q * q + p * p;
        let r = r2.sqrt();
        let phi = p.atan2(q);
        let gauss = (-r2).exp() / PI;
        let mut total = 0.0;
        for (&nu, terms) in &by_nu {
            let n_top = terms.iter().map(|t| t.0).max().unwrap_or(0);
            laguerre_sequence(n_top, nu, 2.0 * r2, &mut lag);
            let (s, c) = (nu as f64 * (t + phi)).sin_cos();
            let rpow = r.powi(nu as i32);
            for &(n, parity, weight) in terms {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let ang = if parity == Parity::Plus { c } else { s };
                total += weight * sign * gauss * rpow * lag[n as usize] * ang;
            }
        }
        total
    });
    out.set_time(t);
    out
}

/// Mean lifetime from the lifetime-energy constraint
/// `alpha (2 E0 + |nu| + gamma/alpha) tau = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lifetime {
    Finite(f64),
    /// The decay constant vanishes.
    Infinite,
}

pub fn lifetime_energy_constraint(e0: f64, nu: i32, params: &NhParams) -> Result<Lifetime> {
    params.require(Model::Elliptic)?;
    let rate = params.alpha() * (2.0 * e0 + nu.unsigned_abs() as f64) + params.gamma();
    if rate == 0.0 {
        Ok(Lifetime::Infinite)
    } else {
        Ok(Lifetime::Finite(1.0 / rate))
    }
}

/// Energy `E_c = -(|nu| + gamma/alpha)/2` at which the lifetime is maximal.
pub fn resonance_energy(nu: i32, params: &NhParams) -> Result<f64> {
    params.require(Model::Elliptic)?;
    Ok(-0.5 * (nu.unsigned_abs() as f64 + params.gamma() / params.alpha()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalState {
    /// `n_c = -(1 + |nu| + gamma/alpha)/2`.
    pub n_c: f64,
    pub gamma_over_alpha: f64,
    pub nu: u32,
    /// `n_c` is a non-negative integer: that mode never decays.
    pub realizable: bool,
}

impl CriticalState {
    /// Critical `(gamma/alpha)_c = -2k - 1 - |nu|` for the `k` nearest to `n_c`.
    pub fn nearest_critical_ratio(&self) -> f64 {
        let k = self.n_c.round().max(0.0);
        -2.0 * k - 1.0 - self.nu as f64
    }
}

pub fn critical_state(nu: i32, params: &NhParams) -> Result<CriticalState> {
    params.require(Model::Elliptic)?;
    let ratio = params.gamma() / params.alpha();
    let abs_nu = nu.unsigned_abs();
    let n_c = -0.5 * (1.0 + abs_nu as f64 + ratio);
    let realizable = n_c >= 0.0 && n_c.fract() == 0.0;
    Ok(CriticalState { n_c, gamma_over_alpha: ratio, nu: abs_nu, realizable })
}

/// `U(R) = 4 R^2 + (nu^2 - 1/4)/R^2`, the potential seen by `psi = sqrt(R) b(R)`
/// in the equivalent Schrödinger problem (mass 1/2, energy `4(lambda_r - gamma)/alpha`).
pub fn schrodinger_form_potential(nu: i32, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParams(format!("radius must be positive, got {r}")));
    }
    let nu = nu as f64;
    Ok(4.0 * r * r + (nu * nu - 0.25) / (r * r))
}

/// Max of `|rhs_fd(B) - dB/dt|` over nodes at least two cells from the edge,
/// relative to `max|B|`, with fourth-order differences.
pub fn pde_residual(basis: &RealBasis, params: &NhParams, spec: GridSpec, t: f64) -> Result<f64> {
    params.require(Model::Elliptic)?;
    let w = basis.sample(spec, t);
    let r = rhs_with(&w, params, Stencil::Central4);
    let n = spec.n_points();
    let coords = spec.coords();
    let mut worst: f64 = 0.0;
    for j in 2..n - 2 {
        for i in 2..n - 2 {
            let exact = basis.time_derivative(coords[i], coords[j], t);
            worst = worst.max((r.at(i, j) - exact).abs());
        }
    }
    Ok(worst / w.max_abs())
}
