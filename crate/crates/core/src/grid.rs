//! Uniform phase-space grids and the quadratures defined on them.

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

/// Geometry of an endpoint-inclusive square grid on `[-L, L]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    n_points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {half_width}")));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points per axis, got {n_points}"
            )));
        }
        Ok(Self { half_width, n_points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    /// `i`-th coordinate; the same formula serves both axes.
    pub fn coord(&self, i: usize) -> f64 {
        if i == self.n_points - 1 {
            self.half_width
        } else {
            -self.half_width + i as f64 * self.spacing()
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.coord(i)).collect()
    }

    /// One-dimensional trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i == self.n_points - 1 {
            0.5 * h
        } else {
            h
        }
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.half_width == other.half_width && self.n_points == other.n_points
    }
}

/// Real Wigner function sampled on a [`GridSpec`].
///
/// Values are stored row-major with the momentum index as the row:
/// `values[j * N + i] = W(q_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    spec: GridSpec,
    values: Vec<f64>,
    time: f64,
}

/// Zero-initialized grid at `t = 0`.
pub fn make_grid(half_width: f64, n_points: usize) -> Result<WignerGrid> {
    Ok(WignerGrid::zeros(GridSpec::new(half_width, n_points)?))
}

impl WignerGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        let n = spec.n_points();
        Self { spec, values: vec![0.0; n * n], time: 0.0 }
    }

    /// Samples `f(q, p)` at every node.
    pub fn from_fn<F: FnMut(f64, f64) -> f64>(spec: GridSpec, mut f: F) -> Self {
        let coords = spec.coords();
        let mut values = Vec::with_capacity(coords.len() * coords.len());
        for &p in &coords {
            for &q in &coords {
                values.push(f(q, p));
            }
        }
        Self { spec, values, time: 0.0 }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>, time: f64) -> Result<Self> {
        let n = spec.n_points();
        if values.len() != n * n {
            return Err(Error::InvalidGrid(format!("expected {} values, got {}", n * n, values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at flat index {k}")));
        }
        Ok(Self { spec, values, time })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn n_points(&self) -> usize {
        self.spec.n_points()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    /// Value at `(q_i, p_j)`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.n_points() + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// `self + factor * other`, same geometry required.
    pub fn add_scaled(&mut self, factor: f64, other: &WignerGrid) -> Result<()> {
        check_same(&self.spec, &other.spec)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Bilinear interpolation; zero outside the domain.
    pub fn interpolate(&self, q: f64, p: f64) -> f64 {
        let l = self.spec.half_width();
        let n = self.spec.n_points();
        let h = self.spec.spacing();
        if !(-l..=l).contains(&q) || !(-l..=l).contains(&p) {
            return 0.0;
        }
        let x = ((q + l) / h).min((n - 1) as f64);
        let y = ((p + l) / h).min((n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let j = (y.floor() as usize).min(n - 2);
        let fx = x - i as f64;
        let fy = y - j as f64;
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11)
    }
}

fn check_same(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            l1: a.half_width(),
            n1: a.n_points(),
            l2: b.half_width(),
            n2: b.n_points(),
        })
    }
}

/// Trapezoid-weighted sum of `f(i, j)` in a fixed row-major order.
fn quadrature<F: Fn(usize, usize) -> f64>(spec: &GridSpec, f: F) -> f64 {
    let n = spec.n_points();
    let mut total = 0.0;
    for j in 0..n {
        let wj = spec.weight(j);
        let mut row = 0.0;
        for i in 0..n {
            row += spec.weight(i) * f(i, j);
        }
        total += wj * row;
    }
    total
}

/// Trace of the density operator in the Weyl sense: `∫ W dq dp`.
pub fn integrate(w: &WignerGrid) -> f64 {
    quadrature(&w.spec, |i, j| w.at(i, j))
}

/// `∫ |W| dq dp`.
pub fn integrate_abs(w: &WignerGrid) -> f64 {
    quadrature(&w.spec, |i, j| w.at(i, j).abs())
}

/// `∫ W1 W2 dq dp`. Symmetric in its arguments bit for bit.
pub fn inner_product(w1: &WignerGrid, w2: &WignerGrid) -> Result<f64> {
    check_same(&w1.spec, &w2.spec)?;
    Ok(quadrature(&w1.spec, |i, j| w1.at(i, j) * w2.at(i, j)))
}

/// `∫ W A_W dq dp` for a phase-space symbol `A_W(q, p)`.
///
/// This is the non-normalized average; divide by [`integrate`] for the
/// normalized one. For `A_W = (q^2 + p^2)/2` this is the Weyl-symbol average,
/// which for the oscillator equals the energy expectation without any extra
/// ordering correction.
pub fn expectation<F: Fn(f64, f64) -> f64>(w: &WignerGrid, symbol: F) -> f64 {
    let coords = w.spec.coords();
    quadrature(&w.spec, |i, j| w.at(i, j) * symbol(coords[i], coords[j]))
}

pub fn l2_norm(w: &WignerGrid) -> f64 {
    quadrature(&w.spec, |i, j| {
        let v = w.at(i, j);
        v * v
    })
    .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_geometry() {
        let g = make_grid(6.0, 17).unwrap();
        assert_eq!(g.spec().spacing(), 0.75);
        let g = make_grid(6.0, 257).unwrap();
        assert_eq!(g.spec().coord(0), -6.0);
        assert_eq!(g.spec().coord(256), 6.0);
        assert_eq!(g.spec().coord(128), 0.0);
        assert_eq!(g.time(), 0.0);
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_grid(0.0, 64).is_err());
        assert!(make_grid(-1.0, 64).is_err());
        assert!(make_grid(6.0, 15).is_err());
    }

    #[test]
    fn zero_grid_integrates_to_zero() {
        let g = make_grid(6.0, 33).unwrap();
        assert_eq!(integrate(&g), 0.0);
        let other = WignerGrid::from_fn(*g.spec(), |q, p| q + p * p);
        assert_eq!(inner_product(&other, &g).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = make_grid(6.0, 33).unwrap();
        let b = make_grid(6.0, 65).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn gaussian_moments() {
        let spec = GridSpec::new(6.0, 257).unwrap();
        let w = WignerGrid::from_fn(spec, |q, p| (-(q * q + p * p)).exp() / PI);
        let tr = integrate(&w);
        assert!((tr - 1.0).abs() < 1e-6);
        assert_eq!(expectation(&w, |_, _| 1.0), tr);
        let e = expectation(&w, |q, p| 0.5 * (q * q + p * p));
        assert!((e - 0.5).abs() < 1e-6);
    }

    #[test]
    fn interpolation_reproduces_nodes_and_bilinear_functions() {
        let spec = GridSpec::new(2.0, 21).unwrap();
        let w = WignerGrid::from_fn(spec, |q, p| 1.0 + 2.0 * q - p + 0.5 * q * p);
        assert!((w.interpolate(spec.coord(3), spec.coord(7)) - w.at(3, 7)).abs() < 1e-14);
        let v = w.interpolate(0.33, -1.27);
        assert!((v - (1.0 + 0.66 + 1.27 - 0.5 * 0.33 * 1.27)).abs() < 1e-12);
        assert_eq!(w.interpolate(3.0, 0.0), 0.0);
    }
}
