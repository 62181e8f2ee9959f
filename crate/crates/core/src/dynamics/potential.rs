use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-independent polynomial potential.
///
/// `Harmonic` is `m ω² x² / 2`, so its coefficients depend on the particle
/// mass; every method therefore takes the mass explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Potential {
    Harmonic {
        omega: f64,
    },
    /// `λ x⁴`
    Quartic {
        lambda: f64,
    },
    /// `a x² + b x⁴` with `a < 0 < b`
    DoubleWell {
        a: f64,
        b: f64,
    },
    /// `Σ c_k x^k`
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl Potential {
    pub fn free() -> Self {
        Potential::Polynomial {
            coefficients: vec![0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, param| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param("dynamics", param, "must be finite"))
            }
        };
        match self {
            Potential::Harmonic { omega } => {
                if !(*omega > 0.0 && omega.is_finite()) {
                    return Err(Error::param(
                        "dynamics",
                        "omega",
                        format!("must be positive, got {omega}"),
                    ));
                }
            }
            Potential::Quartic { lambda } => finite(*lambda, "lambda")?,
            Potential::DoubleWell { a, b } => {
                if !(*a < 0.0) {
                    return Err(Error::param(
                        "dynamics",
                        "a",
                        format!("double well needs a < 0, got {a}"),
                    ));
                }
                if !(*b > 0.0 && b.is_finite()) {
                    return Err(Error::param(
                        "dynamics",
                        "b",
                        format!("double well needs b > 0, got {b}"),
                    ));
                }
            }
            Potential::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::param(
                        "dynamics",
                        "coefficients",
                        "at least one coefficient is required",
                    ));
                }
                for c in coefficients {
                    finite(*c, "coefficients")?;
                }
            }
        }
        Ok(())
    }

    /// Monomial coefficients `c_0..c_K`.
    pub fn coefficients(&self, mass: f64) -> Vec<f64> {
        match self {
            Potential::Harmonic { omega } => vec![0.0, 0.0, 0.5 * mass * omega * omega],
            Potential::Quartic { lambda } => vec![0.0, 0.0, 0.0, 0.0, *lambda],
            Potential::DoubleWell { a, b } => vec![0.0, 0.0, *a, 0.0, *b],
            Potential::Polynomial { coefficients } => coefficients.clone(),
        }
    }

    pub fn value(&self, x: f64, mass: f64) -> f64 {
        Poly::new(self.coefficients(mass)).derivative(x, 0)
    }

    /// `d^k V / dx^k` in closed form; zero above the polynomial degree.
    pub fn derivative(&self, x: f64, order: usize, mass: f64) -> f64 {
        Poly::new(self.coefficients(mass)).derivative(x, order)
    }

    /// `−V'(x)`.
    pub fn force(&self, x: f64, mass: f64) -> f64 {
        -self.derivative(x, 1, mass)
    }

    pub(crate) fn poly(&self, mass: f64) -> Poly {
        Poly::new(self.coefficients(mass))
    }
}

/// Dense polynomial with exact derivatives.
#[derive(Debug, Clone)]
pub(crate) struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub(crate) fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub(crate) fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    pub(crate) fn derivative(&self, x: f64, order: usize) -> f64 {
        if order > self.degree() {
            return 0.0;
        }
        // Horner on c_i · i!/(i−order)!
        let mut acc = 0.0;
        for i in (order..self.coeffs.len()).rev() {
            let falling: f64 = ((i - order + 1)..=i).map(|f| f as f64).product();
            acc = acc * x + self.coeffs[i] * falling;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_are_exact() {
        let v = Potential::DoubleWell { a: -1.0, b: 0.1 };
        let x = 1.7;
        assert!((v.value(x, 1.0) - (-x * x + 0.1 * x.powi(4))).abs() < 1e-14);
        assert!((v.derivative(x, 1, 1.0) - (-2.0 * x + 0.4 * x.powi(3))).abs() < 1e-13);
        assert!((v.derivative(x, 3, 1.0) - 2.4 * x).abs() < 1e-13);
        assert!((v.derivative(x, 4, 1.0) - 2.4).abs() < 1e-14);
        assert_eq!(v.derivative(x, 5, 1.0), 0.0);
        assert_eq!(v.derivative(x, 9, 1.0), 0.0);
    }

    #[test]
    fn harmonic_depends_on_mass() {
        let v = Potential::Harmonic { omega: 2.0 };
        assert_eq!(v.value(1.0, 3.0), 6.0);
        assert_eq!(v.derivative(0.3, 3, 3.0), 0.0);
    }

    #[test]
    fn validation() {
        assert!(Potential::DoubleWell { a: 1.0, b: 0.1 }.validate().is_err());
        assert!(Potential::Harmonic { omega: 0.0 }.validate().is_err());
        assert!(Potential::Polynomial { coefficients: vec![] }.validate().is_err());
        assert!(Potential::free().validate().is_ok());
    }
}
