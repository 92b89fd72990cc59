//! Finite-difference integration of the quadratic phase-space evolution law
//!
//! ```text
//! dW/dt = -(alpha p^2 + beta q^2 + gamma) W - (p d_q - q d_p) W
//!         + (alpha d_q^2 + beta d_p^2) W / 4
//! ```
//!
//! For quadratic `H_W` and `Gamma_W` every third and higher phase-space
//! derivative of the symbols vanishes, so the sine/cosine Moyal brackets
//! terminate after the terms above and this equation is exact, not a
//! truncation.

use log::warn;
use rayon::prelude::*;

use crate::elliptic::ComplexEigenvalue;
use crate::error::{Error, Result};
use crate::grid::{integrate, integrate_abs, l2_norm, GridSpec, WignerGrid};
use crate::params::{Model, NhParams};

/// Growth of `max|W|` beyond this factor aborts non-normalized elliptic runs.
pub const INSTABILITY_GROWTH: f64 = 1e6;

/// Default cap on `t_end` when `beta < 0` makes the `d_p^2` term anti-diffusive.
pub const ANTI_DIFFUSIVE_HORIZON: f64 = 0.25;

/// Normalized runs need `|Tr W0|` above this fraction of `∫|W0|`.
pub const ZERO_TRACE_FRACTION: f64 = 1e-8;

/// Boundary values above this fraction of the peak trigger a warning.
const BOUNDARY_ADVISORY: f64 = 1e-12;

/// Central-difference stencil for all spatial derivatives. Either one keeps
/// `dt * lambda_max <= 1/3` at the stability bound, well inside the RK4
/// region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// Three-point, second order.
    Central2,
    /// Five-point, fourth order.
    #[default]
    Central4,
}

/// Largest stable time step:
/// `min(0.25 h^2 / (|alpha| + |beta|), 0.5 h / (sqrt(2) L))`.
pub fn stability_bound(spec: &GridSpec, params: &NhParams) -> f64 {
    let h = spec.spacing();
    let diffusive = 0.25 * h * h / (params.alpha().abs() + params.beta().abs());
    let advective = 0.5 * h / (std::f64::consts::SQRT_2 * spec.half_width());
    diffusive.min(advective)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between recorded snapshots.
    pub record_every: usize,
    /// Rescale to unit trace after every step.
    pub normalized: bool,
    pub stencil: Stencil,
    /// Maximum `t_end` accepted when `beta < 0`.
    pub anti_diffusive_horizon: f64,
}

impl EvolverConfig {
    pub fn new(dt: f64, t_end: f64, spec: &GridSpec, params: &NhParams) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            record_every: 1,
            normalized: false,
            stencil: Stencil::default(),
            anti_diffusive_horizon: ANTI_DIFFUSIVE_HORIZON,
        };
        cfg.validate(spec, params)?;
        Ok(cfg)
    }

    /// `dt = fraction * stability_bound`.
    pub fn at_fraction_of_bound(fraction: f64, t_end: f64, spec: &GridSpec, params: &NhParams) -> Result<Self> {
        Self::new(fraction * stability_bound(spec, params), t_end, spec, params)
    }

    pub fn record_every(mut self, steps: usize) -> Self {
        self.record_every = steps;
        self
    }

    pub fn normalized(mut self, on: bool) -> Self {
        self.normalized = on;
        self
    }

    pub fn stencil(mut self, stencil: Stencil) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn validate(&self, spec: &GridSpec, params: &NhParams) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidParams(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParams("record_every must be at least 1".into()));
        }
        let bound = stability_bound(spec, params);
        if self.dt > bound {
            return Err(Error::StabilityBound { dt: self.dt, bound });
        }
        if params.beta() < 0.0 && self.t_end > self.anti_diffusive_horizon {
            return Err(Error::HorizonTooLong { t_end: self.t_end, limit: self.anti_diffusive_horizon });
        }
        Ok(())
    }
}

/// Recorded trace `∫ W dq dp` and L2 norm along a run.
///
/// In normalized mode `traces` still holds the trace of the non-normalized
/// density, rebuilt from the accumulated rescaling factors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceSeries {
    pub times: Vec<f64>,
    pub traces: Vec<f64>,
    pub norms: Vec<f64>,
}

impl TraceSeries {
    fn push(&mut self, t: f64, trace: f64, norm: f64) {
        self.times.push(t);
        self.traces.push(trace);
        self.norms.push(norm);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Decay constant from the L2 norm, usable when the trace vanishes
    /// (every mode with `nu != 0`).
    pub fn norm_decay_rate(&self) -> Result<f64> {
        fit_decay_rate(&self.times, &self.norms)
    }

    /// `d ln Tr / dt` at every recorded time.
    pub fn log_trace_derivative(&self) -> Result<Vec<f64>> {
        let logs = log_positive(&self.traces)?;
        Ok(derivative(&self.times, &logs))
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_grid: WignerGrid,
    pub snapshots: Vec<WignerGrid>,
    pub series: TraceSeries,
}

/// Local exponential rate `gamma + alpha p^2 + beta q^2`.
pub fn effective_decay_constant(q: f64, p: f64, params: &NhParams) -> f64 {
    params.gamma() + params.alpha() * p * p + params.beta() * q * q
}

/// Right-hand side of the evolution law with second-order differences and
/// zero Dirichlet ghosts.
pub fn rhs(w: &WignerGrid, params: &NhParams) -> WignerGrid {
    rhs_with(w, params, Stencil::Central2)
}

pub fn rhs_with(w: &WignerGrid, params: &NhParams, stencil: Stencil) -> WignerGrid {
    let mut out = WignerGrid::zeros(*w.spec()).with_time(w.time());
    rhs_into(w.spec(), params, stencil, w.values(), out.values_mut());
    out
}

fn rhs_into(spec: &GridSpec, params: &NhParams, stencil: Stencil, w: &[f64], out: &mut [f64]) {
    let n = spec.n_points();
    let h = spec.spacing();
    let coords = spec.coords();
    let (alpha, beta, gamma) = (params.alpha(), params.beta(), params.gamma());
    let q_decay: Vec<f64> = coords.iter().map(|q| beta * q * q).collect();
    let zeros = vec![0.0; n];
    // Rows outside the domain read as the zero ghost row.
    let row = |j: isize| -> &[f64] {
        if j < 0 || j >= n as isize {
            &zeros
        } else {
            &w[j as usize * n..(j as usize + 1) * n]
        }
    };
    let (d1, d2) = match stencil {
        Stencil::Central2 => (1.0 / (2.0 * h), 1.0 / (h * h)),
        Stencil::Central4 => (1.0 / (12.0 * h), 1.0 / (12.0 * h * h)),
    };
    let (da, db) = (0.25 * alpha * d2, 0.25 * beta * d2);
    out.par_chunks_mut(n).enumerate().for_each(|(j, out_row)| {
        let p = coords[j];
        let p_decay = alpha * p * p + gamma;
        let jj = j as isize;
        let c = row(jj);
        let at = |i: isize| -> f64 {
            if i < 0 || i >= n as isize {
                0.0
            } else {
                c[i as usize]
            }
        };
        // Edge columns go through the bounds-checked path; the interior
        // runs over equal-length slices so the compiler can drop the checks.
        let margin = if stencil == Stencil::Central2 { 1 } else { 2 };
        let m = n - 2 * margin;
        let (dn2, dn, up, up2) = (row(jj - 2), row(jj - 1), row(jj + 1), row(jj + 2));
        let point = |i: usize| -> f64 {
            let ii = i as isize;
            let v = c[i];
            let (dq, dp, lq, lp) = match stencil {
                Stencil::Central2 => {
                    let (qm, qp, pm, pp) = (at(ii - 1), at(ii + 1), dn[i], up[i]);
                    ((qp - qm) * d1, (pp - pm) * d1, qp - 2.0 * v + qm, pp - 2.0 * v + pm)
                }
                Stencil::Central4 => {
                    let (qm2, qm, qp, qp2) = (at(ii - 2), at(ii - 1), at(ii + 1), at(ii + 2));
                    let (pm2, pm, pp, pp2) = (dn2[i], dn[i], up[i], up2[i]);
                    (
                        (8.0 * (qp - qm) - (qp2 - qm2)) * d1,
                        (8.0 * (pp - pm) - (pp2 - pm2)) * d1,
                        16.0 * (qp + qm) - 30.0 * v - (qp2 + qm2),
                        16.0 * (pp + pm) - 30.0 * v - (pp2 + pm2),
                    )
                }
            };
            -(p_decay + q_decay[i]) * v - (p * dq - coords[i] * dp) + da * lq + db * lp
        };
        for i in (0..margin).chain(n - margin..n) {
            out_row[i] = point(i);
        }
        let o = &mut out_row[margin..margin + m];
        let qd = &q_decay[margin..margin + m];
        let qc = &coords[margin..margin + m];
        let v0 = &c[margin..margin + m];
        let (dn, up) = (&dn[margin..margin + m], &up[margin..margin + m]);
        match stencil {
            Stencil::Central2 => {
                let (qm, qp) = (&c[margin - 1..margin - 1 + m], &c[margin + 1..margin + 1 + m]);
                for k in 0..m {
                    let v = v0[k];
                    let dq = (qp[k] - qm[k]) * d1;
                    let dp = (up[k] - dn[k]) * d1;
                    o[k] = -(p_decay + qd[k]) * v - (p * dq - qc[k] * dp)
                        + da * (qp[k] - 2.0 * v + qm[k])
                        + db * (up[k] - 2.0 * v + dn[k]);
                }
            }
            Stencil::Central4 => {
                let (qm2, qm) = (&c[0..m], &c[1..1 + m]);
                let (qp, qp2) = (&c[3..3 + m], &c[4..4 + m]);
                let (dn2, up2) = (&dn2[2..2 + m], &up2[2..2 + m]);
                for k in 0..m {
                    let v = v0[k];
                    let dq = (8.0 * (qp[k] - qm[k]) - (qp2[k] - qm2[k])) * d1;
                    let dp = (8.0 * (up[k] - dn[k]) - (up2[k] - dn2[k])) * d1;
                    o[k] = -(p_decay + qd[k]) * v - (p * dq - qc[k] * dp)
                        + da * (16.0 * (qp[k] + qm[k]) - 30.0 * v - (qp2[k] + qm2[k]))
                        + db * (16.0 * (up[k] + dn[k]) - 30.0 * v - (up2[k] + dn2[k]));
                }
            }
        }
    });
}

/// Classic four-stage Runge-Kutta integration of [`rhs`].
pub fn evolve(w0: &WignerGrid, params: &NhParams, cfg: &EvolverConfig) -> Result<Evolution> {
    let spec = *w0.spec();
    cfg.validate(&spec, params)?;

    let peak0 = w0.max_abs();
    let boundary = boundary_max(w0);
    if boundary > BOUNDARY_ADVISORY * peak0 {
        warn!(
            "initial data reaches {:.3e} of its peak on the boundary; Dirichlet-zero truncation is not negligible",
            boundary / peak0
        );
    }

    let steps = ((cfg.t_end / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let len = spec.n_points() * spec.n_points();
    let t0 = w0.time();

    let mut w = w0.clone();
    let mut scale = 1.0;
    if cfg.normalized {
        let tr = integrate(&w);
        if !tr.is_finite() || tr.abs() <= ZERO_TRACE_FRACTION * integrate_abs(&w) {
            return Err(Error::ZeroTrace);
        }
        w.scale(1.0 / tr);
        scale = tr;
    }

    let mut series = TraceSeries::default();
    let mut snapshots = vec![w.clone()];
    series.push(t0, scale * integrate(&w), scale * l2_norm(&w));

    let check_growth = !cfg.normalized && params.classification() == Model::Elliptic;
    let mut k1 = vec![0.0; len];
    let mut k2 = vec![0.0; len];
    let mut k3 = vec![0.0; len];
    let mut k4 = vec![0.0; len];
    let mut stage = vec![0.0; len];

    for step in 1..=steps {
        let y = w.values();
        rhs_into(&spec, params, cfg.stencil, y, &mut k1);
        axpy_into(&mut stage, y, 0.5 * dt, &k1);
        rhs_into(&spec, params, cfg.stencil, &stage, &mut k2);
        axpy_into(&mut stage, y, 0.5 * dt, &k2);
        rhs_into(&spec, params, cfg.stencil, &stage, &mut k3);
        axpy_into(&mut stage, y, dt, &k3);
        rhs_into(&spec, params, cfg.stencil, &stage, &mut k4);

        let sixth = dt / 6.0;
        w.values_mut()
            .par_iter_mut()
            .zip(k1.par_iter().zip(k2.par_iter()))
            .zip(k3.par_iter().zip(k4.par_iter()))
            .for_each(|((v, (a, b)), (c, d))| *v += sixth * (a + 2.0 * b + 2.0 * c + d));
        let t = t0 + step as f64 * dt;
        w.set_time(t);

        let peak = w.max_abs();
        if !peak.is_finite() || (check_growth && peak > INSTABILITY_GROWTH * peak0) {
            return Err(Error::Instability { t, growth: peak / peak0 });
        }

        if cfg.normalized {
            let tr = integrate(&w);
            if tr == 0.0 || !tr.is_finite() {
                return Err(Error::Instability { t, growth: peak / peak0 });
            }
            w.scale(1.0 / tr);
            scale *= tr;
        }

        if step % cfg.record_every == 0 || step == steps {
            series.push(t, scale * integrate(&w), scale * l2_norm(&w));
            snapshots.push(w.clone());
        }
    }

    Ok(Evolution { final_grid: w, snapshots, series })
}

fn axpy_into(out: &mut [f64], y: &[f64], a: f64, x: &[f64]) {
    out.par_iter_mut()
        .zip(y.par_iter().zip(x.par_iter()))
        .for_each(|(o, (y, x))| *o = y + a * x);
}

fn boundary_max(w: &WignerGrid) -> f64 {
    let n = w.n_points();
    let mut m: f64 = 0.0;
    for k in 0..n {
        m = m
            .max(w.at(k, 0).abs())
            .max(w.at(k, n - 1).abs())
            .max(w.at(0, k).abs())
            .max(w.at(n - 1, k).abs());
    }
    m
}

/// Least-squares slope of `-ln(trace)` against time.
pub fn decay_rate_fit(series: &TraceSeries) -> Result<f64> {
    fit_decay_rate(&series.times, &series.traces)
}

/// Least-squares slope of `-ln(values)` against `times`.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() < 2 || times.len() != values.len() {
        return Err(Error::SeriesTooShort(times.len().min(values.len())));
    }
    let logs = log_positive(values)?;
    let n = times.len() as f64;
    let t_mean = times.iter().sum::<f64>() / n;
    let y_mean = logs.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (t, y) in times.iter().zip(&logs) {
        sxy += (t - t_mean) * (y - y_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    Ok(-sxy / sxx)
}

fn log_positive(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 && value.is_finite() {
                Ok(value.ln())
            } else {
                Err(Error::NonPositiveSeries { index, value })
            }
        })
        .collect()
}

/// Second-order finite-difference derivative on a possibly non-uniform mesh.
fn derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 2 {
        return vec![0.0; n];
    }
    if n == 2 {
        let s = (y[1] - y[0]) / (t[1] - t[0]);
        return vec![s, s];
    }
    let three_point = |k: usize, at: f64| {
        let (t0, t1, t2) = (t[k], t[k + 1], t[k + 2]);
        y[k] * (2.0 * at - t1 - t2) / ((t0 - t1) * (t0 - t2))
            + y[k + 1] * (2.0 * at - t0 - t2) / ((t1 - t0) * (t1 - t2))
            + y[k + 2] * (2.0 * at - t0 - t1) / ((t2 - t0) * (t2 - t1))
    };
    (0..n)
        .map(|k| {
            let base = k.saturating_sub(1).min(n - 3);
            three_point(base, t[k])
        })
        .collect()
}

/// Evolution eigenvalue of the hyperbolic model, `gamma + i nu sqrt(1 + alpha^2)`.
pub fn hyperbolic_eigenvalue(nu: i32, params: &NhParams) -> Result<ComplexEigenvalue> {
    params.require(Model::Hyperbolic)?;
    let a = params.alpha();
    Ok(ComplexEigenvalue { re: params.gamma(), im: nu as f64 * (1.0 + a * a).sqrt() })
}
