//! Expectation values by the operator route (acting on `ψ`) and by the
//! phase-space route (weighting with `W`), plus uncertainty, purity,
//! negativity and Ehrenfest diagnostics.
//!
//! Mixed monomials use the Weyl (symmetrized) correspondence: the
//! phase-space average of `x·p` matches `⟨(x̂p̂ + p̂x̂)/2⟩`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{check_step, propagate_schrodinger, steps_to, Potential};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{self, C64};
use crate::states::Wavefunction;
use crate::wigner::WignerFunction;

/// Operator whose expectation value is taken on a wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    X,
    P,
    X2,
    P2,
    Energy(Potential),
    /// `(x̂p̂ + p̂x̂)/2`
    SymXP,
}

/// `−iħ ∂ψ/∂x` evaluated spectrally (Nyquist bin dropped).
fn momentum_applied(psi: &Wavefunction) -> Vec<C64> {
    let g = psi.grid();
    let n = g.n();
    let mut buf = psi.samples().to_vec();
    let plan = spectral::plan(n);
    plan.forward(&mut buf);
    let scale = g.hbar() / n as f64;
    for (m, z) in buf.iter_mut().enumerate() {
        *z = if m == n / 2 {
            C64::new(0.0, 0.0)
        } else {
            *z * (spectral::wavenumber(m, n, g.dx()) * scale)
        };
    }
    plan.inverse(&mut buf);
    buf
}

pub fn expectation_operator(psi: &Wavefunction, which: &Observable) -> Result<f64> {
    psi.ensure_normalized("observables")?;
    let g = psi.grid();
    let dx = g.dx();
    let s = psi.samples();
    let position =
        |f: &dyn Fn(f64) -> f64| par::ordered_sum(s.iter().enumerate().map(|(k, z)| f(g.x(k)) * z.norm_sqr())) * dx;
    Ok(match which {
        Observable::X => position(&|x| x),
        Observable::X2 => position(&|x| x * x),
        Observable::P => {
            let pp = momentum_applied(psi);
            par::ordered_sum(s.iter().zip(&pp).map(|(a, b)| (a.conj() * b).re)) * dx
        }
        Observable::P2 => {
            let pp = momentum_applied(psi);
            par::ordered_sum(pp.iter().map(|b| b.norm_sqr())) * dx
        }
        Observable::SymXP => {
            let pp = momentum_applied(psi);
            par::ordered_sum(
                s.iter()
                    .zip(&pp)
                    .enumerate()
                    .map(|(k, (a, b))| (a.conj() * b).re * g.x(k)),
            ) * dx
        }
        Observable::Energy(v) => {
            v.validate()?;
            let p2 = expectation_operator(psi, &Observable::P2)?;
            let mass = g.mass();
            let poly = v.poly(mass);
            p2 / (2.0 * mass) + position(&|x| poly.value(x))
        }
    })
}

/// `⟨p̂²⟩/2m + ⟨V⟩` on a wavefunction.
pub fn energy(psi: &Wavefunction, v: &Potential) -> Result<f64> {
    expectation_operator(psi, &Observable::Energy(v.clone()))
}

/// Polynomial `Σ c · x^i · p^j` in phase-space variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePolynomial {
    terms: Vec<(f64, u32, u32)>,
}

impl PhasePolynomial {
    pub fn new(terms: Vec<(f64, u32, u32)>) -> Self {
        PhasePolynomial { terms }
    }
    pub fn monomial(coefficient: f64, x_power: u32, p_power: u32) -> Self {
        Self::new(vec![(coefficient, x_power, p_power)])
    }
    pub fn x() -> Self {
        Self::monomial(1.0, 1, 0)
    }
    pub fn p() -> Self {
        Self::monomial(1.0, 0, 1)
    }
    pub fn xp() -> Self {
        Self::monomial(1.0, 1, 1)
    }
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.1 + t.2).max().unwrap_or(0)
    }
    fn eval(&self, x: f64, p: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, i, j)| c * x.powi(i as i32) * p.powi(j as i32))
            .sum()
    }
}

fn phase_space_average(w: &WignerFunction, f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let g = w.grid();
    let n = g.n();
    let rows = par::map_indices(n, |k| {
        let x = g.x(k);
        let row = &w.values()[k * n..(k + 1) * n];
        par::ordered_sum(row.iter().enumerate().map(|(j, v)| f(x, g.p(j)) * v))
    });
    par::ordered_sum(rows) * g.dx() * g.dp()
}

/// `∫∫ f(x, p) W(x, p) dx dp` for polynomials of total degree ≤ 4.
pub fn expectation_phase_space(w: &WignerFunction, f: &PhasePolynomial) -> Result<f64> {
    let degree = f.degree();
    if degree > 4 {
        return Err(Error::DegreeTooHigh { degree });
    }
    w.ensure_normalized("observables")?;
    Ok(phase_space_average(w, |x, p| f.eval(x, p)))
}

/// `∫∫ (p²/2m + V(x)) W dx dp`; the Weyl symbol of `H` has no mixed terms.
pub fn phase_space_energy(w: &WignerFunction, v: &Potential, mass: f64) -> f64 {
    let poly = v.poly(mass);
    phase_space_average(w, |x, p| p * p / (2.0 * mass) + poly.value(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// Symmetrized covariance `⟨(x̂p̂+p̂x̂)/2⟩ − ⟨x⟩⟨p⟩`.
    pub cov_xp: f64,
    /// `Δx · Δp`
    pub uncertainty_product: f64,
    /// `sqrt(var_x · var_p − cov_xp²)`
    pub blob_area: f64,
}

impl MomentReport {
    fn from_raw(mean_x: f64, mean_p: f64, x2: f64, p2: f64, xp: f64) -> Self {
        let var_x = (x2 - mean_x * mean_x).max(0.0);
        let var_p = (p2 - mean_p * mean_p).max(0.0);
        let cov_xp = xp - mean_x * mean_p;
        MomentReport {
            mean_x,
            mean_p,
            var_x,
            var_p,
            cov_xp,
            uncertainty_product: (var_x * var_p).sqrt(),
            blob_area: (var_x * var_p - cov_xp * cov_xp).max(0.0).sqrt(),
        }
    }
}

/// Either representation of a pure state.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Wave(&'a Wavefunction),
    Wigner(&'a WignerFunction),
}

impl<'a> From<&'a Wavefunction> for StateRef<'a> {
    fn from(v: &'a Wavefunction) -> Self {
        StateRef::Wave(v)
    }
}

impl<'a> From<&'a WignerFunction> for StateRef<'a> {
    fn from(v: &'a WignerFunction) -> Self {
        StateRef::Wigner(v)
    }
}

/// First and second moments: operator route for wavefunctions,
/// phase-space route for Wigner functions.
pub fn moments<'a>(state: impl Into<StateRef<'a>>) -> Result<MomentReport> {
    match state.into() {
        StateRef::Wave(psi) => Ok(MomentReport::from_raw(
            expectation_operator(psi, &Observable::X)?,
            expectation_operator(psi, &Observable::P)?,
            expectation_operator(psi, &Observable::X2)?,
            expectation_operator(psi, &Observable::P2)?,
            expectation_operator(psi, &Observable::SymXP)?,
        )),
        StateRef::Wigner(w) => {
            let e = |i, j| expectation_phase_space(w, &PhasePolynomial::monomial(1.0, i, j));
            Ok(MomentReport::from_raw(e(1, 0)?, e(0, 1)?, e(2, 0)?, e(0, 2)?, e(1, 1)?))
        }
    }
}

/// `2πħ ∫∫ W² dx dp`; one for pure states.
pub fn purity(w: &WignerFunction) -> f64 {
    let g = w.grid();
    2.0 * PI * g.hbar() * par::ordered_sum(w.values().iter().map(|v| v * v)) * g.dx() * g.dp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Negativity {
    pub min_value: f64,
    /// `∫∫ |W| dx dp − 1`
    pub negative_volume: f64,
}

pub fn negativity(w: &WignerFunction) -> Negativity {
    let g = w.grid();
    let min_value = w.values().iter().copied().fold(f64::INFINITY, f64::min);
    let abs = par::ordered_sum(w.values().iter().map(|v| v.abs())) * g.dx() * g.dp();
    Negativity {
        min_value,
        negative_volume: abs - 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub x: f64,
    pub p: f64,
}

/// RK4 integration of Hamilton's equations `ẋ = p/m`, `ṗ = −V'(x)`,
/// reported at each time in `t_grid` (sorted multiples of `dt`).
pub fn classical_trajectory(
    x0: f64,
    p0: f64,
    v: &Potential,
    mass: f64,
    t_grid: &[f64],
    dt: f64,
) -> Result<Vec<PhasePoint>> {
    check_step("observables", dt)?;
    v.validate()?;
    let poly = v.poly(mass);
    let rhs = |x: f64, p: f64| (p / mass, -poly.derivative(x, 1));
    let (mut x, mut p) = (x0, p0);
    let mut done = 0usize;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let k = steps_to(t, dt)?;
        if k < done {
            return Err(Error::param("observables", "t_grid", "times must be sorted ascending"));
        }
        for _ in done..k {
            let (k1x, k1p) = rhs(x, p);
            let (k2x, k2p) = rhs(x + 0.5 * dt * k1x, p + 0.5 * dt * k1p);
            let (k3x, k3p) = rhs(x + 0.5 * dt * k2x, p + 0.5 * dt * k2p);
            let (k4x, k4p) = rhs(x + dt * k3x, p + dt * k3p);
            x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
        done = k;
        out.push(PhasePoint { t, x, p });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EhrenfestRow {
    pub t: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    /// `⟨F(x̂)⟩`
    pub mean_force: f64,
    /// `F(⟨x̂⟩)`
    pub force_at_mean: f64,
    pub classical_x: f64,
    pub classical_p: f64,
    /// `|d⟨x⟩/dt − ⟨p⟩/m|` by centered differences; zero at `t = 0`.
    pub velocity_residual: f64,
    /// `|d⟨p⟩/dt − ⟨F⟩|` by centered differences; zero at `t = 0`.
    pub force_residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EhrenfestTable {
    pub dt: f64,
    pub rows: Vec<EhrenfestRow>,
}

impl EhrenfestTable {
    pub fn max_velocity_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.velocity_residual).fold(0.0, f64::max)
    }
    pub fn max_force_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.force_residual).fold(0.0, f64::max)
    }
    /// `max_t |⟨x⟩ − x_classical|` and the same for momentum.
    pub fn max_classical_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.mean_x - r.classical_x).abs().max((r.mean_p - r.classical_p).abs()))
            .fold(0.0, f64::max)
    }
    /// `max_t |⟨F⟩ − F(⟨x⟩)|`.
    pub fn max_force_gap(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.mean_force - r.force_at_mean).abs())
            .fold(0.0, f64::max)
    }
}

struct Means {
    x: f64,
    p: f64,
    force: f64,
}

fn means(psi: &Wavefunction, v: &Potential) -> Result<Means> {
    let g = psi.grid();
    let poly = v.poly(g.mass());
    let force = par::ordered_sum(
        psi.samples()
            .iter()
            .enumerate()
            .map(|(k, z)| -poly.derivative(g.x(k), 1) * z.norm_sqr()),
    ) * g.dx();
    Ok(Means {
        x: expectation_operator(psi, &Observable::X)?,
        p: expectation_operator(psi, &Observable::P)?,
        force,
    })
}

/// Quantum means along a split-step trajectory next to the classical orbit
/// started from the initial means, with centered-difference checks of the
/// Ehrenfest identities `d⟨x⟩/dt = ⟨p⟩/m` and `d⟨p⟩/dt = ⟨F⟩`.
pub fn ehrenfest_track(psi0: &Wavefunction, v: &Potential, t_grid: &[f64], dt: f64) -> Result<EhrenfestTable> {
    check_step("observables", dt)?;
    v.validate()?;
    let mass = psi0.grid().mass();
    let start = means(psi0, v)?;
    let classical = classical_trajectory(start.x, start.p, v, mass, t_grid, dt)?;
    let poly = v.poly(mass);

    let mut psi = psi0.clone();
    let mut done = 0usize;
    let mut rows: Vec<EhrenfestRow> = Vec::with_capacity(t_grid.len());
    for (&t, cl) in t_grid.iter().zip(&classical) {
        let k = steps_to(t, dt)?;
        if k < done {
            return Err(Error::param("observables", "t_grid", "times must be sorted ascending"));
        }
        if k == done && k > 0 {
            // repeated time: the state one step back is no longer available
            let last = *rows.last().expect("a row exists for the current step");
            rows.push(EhrenfestRow { t, ..last });
            continue;
        }
        let (here, velocity_residual, force_residual) = if k == 0 {
            (means(&psi, v)?, 0.0, 0.0)
        } else {
            if k - 1 > done {
                psi = propagate_schrodinger(&psi, v, dt, k - 1 - done)?;
            }
            let before = means(&psi, v)?;
            psi = propagate_schrodinger(&psi, v, dt, 1)?;
            done = k;
            let here = means(&psi, v)?;
            let after = means(&propagate_schrodinger(&psi, v, dt, 1)?, v)?;
            let vel = ((after.x - before.x) / (2.0 * dt) - here.p / mass).abs();
            let frc = ((after.p - before.p) / (2.0 * dt) - here.force).abs();
            (here, vel, frc)
        };
        rows.push(EhrenfestRow {
            t,
            mean_x: here.x,
            mean_p: here.p,
            mean_force: here.force,
            force_at_mean: -poly.derivative(here.x, 1),
            classical_x: cl.x,
            classical_p: cl.p,
            velocity_residual,
            force_residual,
        });
    }
    Ok(EhrenfestTable { dt, rows })
}
