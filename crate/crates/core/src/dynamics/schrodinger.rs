use num_complex::Complex64;

use super::monitor::{self, BANDWIDTH_LIMIT, BOUNDARY_LIMIT, NORM_DRIFT_LIMIT};
use super::potential::Potential;
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::spectral::{self, Plan, C64};
use crate::states::Wavefunction;
use std::sync::Arc;

/// Strang split-step propagator for one spatial axis.
///
/// A run of `k` steps is `K/2 · (V · K)^(k−1) · V · K/2`, which merges the
/// adjacent kinetic half steps of consecutive Strang steps.
pub(crate) struct SplitStep {
    n: usize,
    plan: Arc<Plan>,
    half_kinetic: Vec<C64>,
    full_kinetic: Vec<C64>,
    potential: Vec<C64>,
    outer_band: Vec<bool>,
}

impl SplitStep {
    pub(crate) fn new(grid: &PhaseGrid, v: &Potential, dt: f64) -> Self {
        let n = grid.n();
        let hbar = grid.hbar();
        let mass = grid.mass();
        let poly = v.poly(mass);
        let p_cut = 0.8 * grid.p_nyquist();
        let momenta: Vec<f64> = (0..n).map(|m| hbar * spectral::wavenumber(m, n, grid.dx())).collect();
        let kinetic = |tau: f64| -> Vec<C64> {
            momenta
                .iter()
                .map(|p| Complex64::from_polar(1.0, -p * p * tau / (2.0 * mass * hbar)))
                .collect()
        };
        SplitStep {
            n,
            plan: spectral::plan(n),
            half_kinetic: kinetic(0.5 * dt),
            full_kinetic: kinetic(dt),
            potential: (0..n)
                .map(|k| Complex64::from_polar(1.0, -poly.value(grid.x(k)) * dt / hbar))
                .collect(),
            outer_band: momenta.iter().map(|p| p.abs() > p_cut).collect(),
        }
    }

    /// Propagator for the complex-conjugate wavefunction.
    pub(crate) fn conjugated(&self) -> Self {
        let conj = |v: &[C64]| v.iter().map(|z| z.conj()).collect();
        SplitStep {
            n: self.n,
            plan: self.plan.clone(),
            half_kinetic: conj(&self.half_kinetic),
            full_kinetic: conj(&self.full_kinetic),
            potential: conj(&self.potential),
            outer_band: self.outer_band.clone(),
        }
    }

    fn outer_power(&self, spectrum: &[C64]) -> f64 {
        spectrum
            .iter()
            .zip(&self.outer_band)
            .filter(|(_, &o)| o)
            .map(|(z, _)| z.norm_sqr())
            .sum()
    }

    fn kinetic(&self, row: &mut [C64], phases: &[C64], band: &mut Band) {
        self.plan.forward(row);
        band.outer = band.outer.max(self.outer_power(row));
        if band.total == 0.0 {
            band.total = row.iter().map(|z| z.norm_sqr()).sum();
        }
        let scale = 1.0 / self.n as f64;
        for (z, ph) in row.iter_mut().zip(phases) {
            *z *= ph * scale;
        }
        self.plan.inverse(row);
    }

    /// Advance `row` by `steps` Strang steps and report its spectral power
    /// beyond 80% of Nyquist.
    pub(crate) fn evolve(&self, row: &mut [C64], steps: usize) -> Band {
        let mut band = Band::default();
        if steps == 0 {
            return band;
        }
        self.kinetic(row, &self.half_kinetic, &mut band);
        for _ in 1..steps {
            mul(row, &self.potential);
            self.kinetic(row, &self.full_kinetic, &mut band);
        }
        mul(row, &self.potential);
        self.kinetic(row, &self.half_kinetic, &mut band);
        band
    }
}

/// Out-of-band spectral power: the largest value seen during a run and the
/// total power at its start.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Band {
    pub outer: f64,
    pub total: f64,
}

impl Band {
    pub(crate) fn fraction(self) -> f64 {
        if self.total > 0.0 {
            self.outer / self.total
        } else {
            0.0
        }
    }
}

fn mul(row: &mut [C64], phases: &[C64]) {
    for (z, ph) in row.iter_mut().zip(phases) {
        *z *= ph;
    }
}

pub(crate) fn check_step(module: &'static str, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::NonpositiveStep { module, dt });
    }
    Ok(())
}

/// Strang split-step spectral evolution of `iħ ∂ψ/∂t = (p²/2m + V) ψ`.
pub fn propagate_schrodinger(psi: &Wavefunction, v: &Potential, dt: f64, steps: usize) -> Result<Wavefunction> {
    check_step("dynamics", dt)?;
    v.validate()?;
    if steps == 0 {
        return Ok(psi.clone());
    }
    let grid = *psi.grid();
    let stepper = SplitStep::new(&grid, v, dt);
    let mut samples = psi.samples().to_vec();
    let band = stepper.evolve(&mut samples, steps).fraction();
    if band > BANDWIDTH_LIMIT {
        return Err(Error::BandwidthOverflow { fraction: band });
    }
    let out = Wavefunction::from_parts(grid, samples, psi.time() + steps as f64 * dt);
    let drift = (out.norm_sqr() - psi.norm_sqr()).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift {
            drift,
            limit: NORM_DRIFT_LIMIT,
        });
    }
    let boundary = monitor::wave_boundary(&out);
    if boundary > BOUNDARY_LIMIT {
        return Err(Error::BoundaryOverflow {
            mass: boundary,
            limit: BOUNDARY_LIMIT,
        });
    }
    Ok(out)
}
