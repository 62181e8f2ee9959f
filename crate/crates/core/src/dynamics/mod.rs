//! Time evolution by three independent routes and their cross-validation.
//!
//! * route (a): split-step Schrödinger evolution of `ψ`, then the Wigner transform;
//! * route (b): Wigner transform, then exact phase-space (Moyal) evolution;
//! * route (c): characteristic kernel `Z`, its two-coordinate evolution,
//!   rank-1 factorization back to `ψ`, then the Wigner transform.

mod characteristic;
pub mod monitor;
mod moyal;
mod potential;
mod schrodinger;

pub use characteristic::propagate_characteristic;
pub use moyal::{propagate_moyal_exact, propagate_moyal_truncated, STIFFNESS_LIMIT};
pub use potential::Potential;
pub use schrodinger::propagate_schrodinger;

pub(crate) use schrodinger::check_step;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables;
use crate::states::Wavefunction;
use crate::wigner::{factorize_characteristic, to_characteristic, wigner_transform};

/// Number of `dt` steps that reach `t`, rejecting times off the step lattice.
pub fn steps_to(t: f64, dt: f64) -> Result<usize> {
    check_step("dynamics", dt)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param(
            "dynamics",
            "sample_times",
            format!("time {t} must be non-negative"),
        ));
    }
    let r = t / dt;
    let k = r.round();
    if (r - k).abs() > 1e-6 * k.max(1.0) {
        return Err(Error::param(
            "dynamics",
            "sample_times",
            format!("time {t} is not a multiple of dt = {dt}"),
        ));
    }
    Ok(k as usize)
}

/// Per-route drift monitors, one entry per sample time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RouteSeries {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    /// Largest boundary mass over the three routes.
    pub boundary: Vec<f64>,
    /// `boundary > BOUNDARY_FLAG`.
    pub boundary_flagged: Vec<bool>,
    /// `|norm(t) − norm(0)|` per route.
    pub norm_drift: RouteSeries,
    /// `|⟨H⟩(t) − ⟨H⟩(0)| / |⟨H⟩(0)|` for routes (a) and (b); `c` mirrors `a`
    /// after factorization.
    pub energy_drift: RouteSeries,
    /// Rank-1 residual of the route (c) kernel.
    pub factorization_residual: Vec<f64>,
}

/// Pairwise L2 discrepancies between the three routes at each sample time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub times: Vec<f64>,
    pub ab: Vec<f64>,
    pub ac: Vec<f64>,
    pub bc: Vec<f64>,
    pub monitors: Monitors,
}

impl EvolutionReport {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest pairwise discrepancy over all samples and route pairs.
    pub fn max_discrepancy(&self) -> f64 {
        self.ab
            .iter()
            .chain(&self.ac)
            .chain(&self.bc)
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn any_boundary_flag(&self) -> bool {
        self.monitors.boundary_flagged.iter().any(|&f| f)
    }
}

fn relative(value: f64, reference: f64) -> f64 {
    let d = (value - reference).abs();
    if reference != 0.0 {
        d / reference.abs()
    } else {
        d
    }
}

/// Propagate `psi0` by routes (a), (b) and (c) with a common step `dt` and
/// compare them at each of `sample_times` (sorted, within `[0, t_final]`).
///
/// Propagation stops at the last requested sample.
pub fn cross_validate(
    psi0: &Wavefunction,
    v: &Potential,
    t_final: f64,
    dt: f64,
    sample_times: &[f64],
) -> Result<EvolutionReport> {
    check_step("dynamics", dt)?;
    v.validate()?;
    let mut report = EvolutionReport::default();
    if sample_times.is_empty() {
        return Ok(report);
    }
    let final_steps = steps_to(t_final, dt)?;
    let mut targets = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        let k = steps_to(t, dt)?;
        if k > final_steps {
            return Err(Error::param(
                "dynamics",
                "sample_times",
                format!("time {t} exceeds t_final {t_final}"),
            ));
        }
        if targets.last().is_some_and(|&last| k < last) {
            return Err(Error::param(
                "dynamics",
                "sample_times",
                "times must be sorted ascending",
            ));
        }
        targets.push(k);
    }

    let mass = psi0.grid().mass();
    let mut psi = psi0.clone();
    let mut w = wigner_transform(psi0)?;
    let mut z = to_characteristic(&w);
    let norm0 = (psi.norm_sqr(), w.integral(), z.trace());
    let energy0 = (
        observables::energy(&psi, v)?,
        observables::phase_space_energy(&w, v, mass),
    );

    let mut done = 0usize;
    for (&t, &k) in sample_times.iter().zip(&targets) {
        let step = k - done;
        psi = propagate_schrodinger(&psi, v, dt, step)?;
        w = propagate_moyal_exact(&w, v, dt, step)?;
        z = propagate_characteristic(&z, v, dt, step)?;
        done = k;

        let wa = wigner_transform(&psi)?;
        let fac = factorize_characteristic(&z)?;
        let wc = wigner_transform(&fac.state)?;

        report.times.push(t);
        report.ab.push(wa.l2_distance(&w));
        report.ac.push(wa.l2_distance(&wc));
        report.bc.push(w.l2_distance(&wc));

        let boundary = monitor::wave_boundary(&psi)
            .max(monitor::wigner_boundary(&w))
            .max(monitor::kernel_boundary(&z));
        let m = &mut report.monitors;
        m.boundary.push(boundary);
        m.boundary_flagged.push(boundary > monitor::BOUNDARY_FLAG);
        m.norm_drift.a.push((psi.norm_sqr() - norm0.0).abs());
        m.norm_drift.b.push((w.integral() - norm0.1).abs());
        m.norm_drift.c.push((z.trace() - norm0.2).abs());
        m.energy_drift
            .a
            .push(relative(observables::energy(&psi, v)?, energy0.0));
        m.energy_drift
            .b
            .push(relative(observables::phase_space_energy(&w, v, mass), energy0.1));
        m.energy_drift
            .c
            .push(relative(observables::energy(&fac.state, v)?, energy0.0));
        m.factorization_residual.push(fac.residual);
    }
    Ok(report)
}
