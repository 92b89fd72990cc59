//! Dimensionless model parameters.
//!
//! Positions, momenta and energies are measured in units of `sqrt(hbar/(m w))`,
//! `sqrt(hbar m w)` and `hbar w`; `alpha`, `beta` and `gamma` carry units of
//! `1/m`, `m w^2` and `hbar w`. With `hbar = 1` nothing here has runtime units.

use std::fmt;

use crate::error::{Error, Result};

/// Shape of the decay-rate operator `Gamma = alpha p^2/2 + beta q^2/2 + gamma/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `beta == alpha`: O(2)-symmetric, commutes with the oscillator.
    Elliptic,
    /// `beta == -alpha`.
    Hyperbolic,
    General,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Elliptic => "elliptic",
            Model::Hyperbolic => "hyperbolic",
            Model::General => "general",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NhParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl NhParams {
    /// `alpha` must be positive; `beta` may take either sign so that the
    /// hyperbolic case `beta = -alpha` is representable.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParams(format!("alpha must be positive, got {alpha}")));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidParams(format!("beta must be finite, got {beta}")));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidParams(format!("gamma must be finite, got {gamma}")));
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn elliptic(alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(alpha, alpha, gamma)
    }

    pub fn hyperbolic(alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(alpha, -alpha, gamma)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Exact comparison of the stored values; no tolerance.
    pub fn classification(&self) -> Model {
        if self.beta == self.alpha {
            Model::Elliptic
        } else if self.beta == -self.alpha {
            Model::Hyperbolic
        } else {
            Model::General
        }
    }

    pub(crate) fn require(&self, model: Model) -> Result<()> {
        let got = self.classification();
        if got == model {
            Ok(())
        } else {
            Err(Error::WrongModel { expected: model.name(), got: got.name() })
        }
    }

    /// Weyl symbol of the decay-rate operator.
    pub fn gamma_symbol(&self, q: f64, p: f64) -> f64 {
        0.5 * (self.alpha * p * p + self.beta * q * q + self.gamma)
    }
}

/// Quantum-number pair `(n, nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub n: u32,
    pub nu: i32,
}

impl ModeIndex {
    pub fn new(n: u32, nu: i32) -> Self {
        Self { n, nu }
    }

    pub fn abs_nu(&self) -> u32 {
        self.nu.unsigned_abs()
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n, self.nu)
    }
}

/// Cosine (`+`) or sine (`-`) real combination of `B_{n,nu}` and `B_{n,-nu}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn symbol(self) -> char {
        match self {
            Parity::Plus => '+',
            Parity::Minus => '-',
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "+" | "plus" | "p" | "cos" => Some(Parity::Plus),
            "-" | "minus" | "m" | "sin" => Some(Parity::Minus),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_is_exact() {
        assert_eq!(NhParams::new(1.0, 1.0, 0.0).unwrap().classification(), Model::Elliptic);
        assert_eq!(NhParams::new(0.5, -0.5, 0.3).unwrap().classification(), Model::Hyperbolic);
        assert_eq!(
            NhParams::new(1.0, 1.0 + f64::EPSILON, 0.0).unwrap().classification(),
            Model::General
        );
    }

    #[test]
    fn rejects_non_positive_alpha() {
        assert!(NhParams::new(0.0, 1.0, 0.0).is_err());
        assert!(NhParams::new(-1.0, -1.0, 0.0).is_err());
        assert!(NhParams::new(1.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn gamma_symbol_at_origin() {
        let p = NhParams::new(2.0, 3.0, -0.4).unwrap();
        assert_eq!(p.gamma_symbol(0.0, 0.0), -0.2);
        assert_eq!(p.gamma_symbol(1.0, 1.0), 0.5 * (2.0 + 3.0 - 0.4));
    }
}
