//! Position/momentum lattice with exact FFT conjugacy.
//!
//! The position axis is `x_k = x_min + k·dx` for `k in 0..n`; the momentum
//! axis is `p_j = (j - n/2)·dp`, stored in monotonic order. The spacings obey
//! `dx · dp · n = 2π ħ`, so a length-`n` DFT maps one axis onto the other.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    n: usize,
    x_min: f64,
    hbar: f64,
    mass: f64,
    dx: f64,
    dp: f64,
}

impl PhaseGrid {
    pub fn new(n: usize, x_min: f64, x_max: f64, hbar: f64, mass: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::param("grid", "n", format!("need n >= 8, got {n}")));
        }
        if n % 2 != 0 {
            return Err(Error::param("grid", "n", format!("need an even sample count, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::param(
                "grid",
                "x_max",
                format!("degenerate bounds: x_max ({x_max}) must exceed x_min ({x_min})"),
            ));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::param("grid", "hbar", format!("must be positive, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::param("grid", "mass", format!("must be positive, got {mass}")));
        }
        let dx = (x_max - x_min) / n as f64;
        let dp = 2.0 * PI * hbar / (n as f64 * dx);
        Ok(PhaseGrid {
            n,
            x_min,
            hbar,
            mass,
            dx,
            dp,
        })
    }

    /// Rebuild a grid from its stored spacings without re-deriving them.
    pub fn from_spacings(n: usize, x_min: f64, dx: f64, dp: f64, hbar: f64, mass: f64) -> Result<Self> {
        let reference = Self::new(n, x_min, x_min + n as f64 * dx, hbar, mass)?;
        let tol = 1e-12;
        if (reference.dx - dx).abs() > tol * dx.abs() || (reference.dp - dp).abs() > tol * dp.abs() {
            return Err(Error::param("grid", "dp", "spacings violate dx·dp·n = 2πħ"));
        }
        Ok(PhaseGrid { dx, dp, ..reference })
    }

    /// Grid centered on the origin with `dx == dp`, i.e. `L = sqrt(2π ħ n)`.
    ///
    /// Phase-space rotations (tomography) are best conditioned on such grids.
    pub fn isotropic(n: usize, hbar: f64, mass: f64) -> Result<Self> {
        let half = 0.5 * (2.0 * PI * hbar.abs() * n as f64).sqrt();
        Self::new(n, -half, half, hbar, mass)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    /// `x_min + n·dx`; may differ from the constructor argument in the last bit.
    pub fn x_max(&self) -> f64 {
        self.x_min + self.n as f64 * self.dx
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dp(&self) -> f64 {
        self.dp
    }
    pub fn length(&self) -> f64 {
        self.n as f64 * self.dx
    }

    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx
    }

    #[inline]
    pub fn p(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dp
    }

    pub fn x_axis(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    pub fn p_axis(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.p(j)).collect()
    }

    /// Largest representable momentum magnitude, `n·dp/2`.
    pub fn p_nyquist(&self) -> f64 {
        0.5 * self.n as f64 * self.dp
    }

    /// Signed FFT frequency index for bin `m` of a length-`n` transform.
    #[inline]
    pub(crate) fn signed_index(&self, m: usize) -> i64 {
        signed_index(m, self.n)
    }

    /// True when `other` describes the same lattice bit-for-bit.
    pub fn same_as(&self, other: &PhaseGrid) -> bool {
        self == other
    }
}

#[inline]
pub(crate) fn signed_index(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}
