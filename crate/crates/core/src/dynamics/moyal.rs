//! Phase-space propagation of the Wigner function.
//!
//! The exact route splits the Moyal generator into a kinetic shear (solved
//! by an FFT over `x`) and a potential kick applied in the `x'`
//! representation, where the full odd-derivative series resums to the phase
//! `exp(−(i dt/ħ)[V(x + x'/2) − V(x − x'/2)])`.
//!
//! The truncated route keeps the series terms up to `n_max` explicitly and
//! integrates them with classical RK4.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::monitor::{self, BANDWIDTH_LIMIT, BOUNDARY_LIMIT, NORM_DRIFT_LIMIT, REALNESS_LIMIT};
use super::potential::Potential;
use super::schrodinger::check_step;
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::par;
use crate::spectral::{self, C64};
use crate::wigner::WignerFunction;

/// Growth of the field's L2 norm per RK4 step treated as instability.
pub const STIFFNESS_LIMIT: f64 = 1e-6;

/// Multipliers for the kinetic shear `W(x, p) → W(x − p τ/m, p)`, laid out
/// with one row per momentum sample and one column per `x` frequency bin.
fn shear_table(grid: &PhaseGrid, tau: f64) -> Vec<C64> {
    let n = grid.n();
    let mut table = vec![C64::new(0.0, 0.0); n * n];
    par::for_each_row(&mut table, n, |j, row| {
        let p = grid.p(j);
        for (m, v) in row.iter_mut().enumerate() {
            let kappa = spectral::wavenumber(m, n, grid.dx());
            let phase = Complex64::from_polar(1.0, -kappa * p * tau / grid.mass());
            // the Nyquist bin has no conjugate partner; keep it real
            *v = if m == n / 2 { C64::new(phase.re, 0.0) } else { phase };
        }
    });
    table
}

/// Multipliers for the potential kick, one row per position sample and one
/// column per forward-FFT bin over momentum. Bin `s` carries separation
/// `x' = −s·dx`.
fn kick_table(grid: &PhaseGrid, v: &Potential, dt: f64) -> Vec<C64> {
    let n = grid.n();
    let poly = v.poly(grid.mass());
    let hbar = grid.hbar();
    let mut table = vec![C64::new(0.0, 0.0); n * n];
    par::for_each_row(&mut table, n, |k, row| {
        let x = grid.x(k);
        for (s, out) in row.iter_mut().enumerate() {
            let sep = -(grid.signed_index(s) as f64) * grid.dx();
            let dv = poly.value(x + 0.5 * sep) - poly.value(x - 0.5 * sep);
            let phase = Complex64::from_polar(1.0, -dt * dv / hbar);
            *out = if s == n / 2 { C64::new(phase.re, 0.0) } else { phase };
        }
    });
    table
}

fn apply_table(values: &mut Vec<f64>, n: usize, table: &[C64], transposed: bool) -> f64 {
    if transposed {
        let mut t = spectral::transpose(values, n);
        let r = spectral::filter_real_rows(&mut t, n, |i, row| {
            for (z, m) in row.iter_mut().zip(&table[i * n..(i + 1) * n]) {
                *z *= m;
            }
        });
        *values = spectral::transpose(&t, n);
        r
    } else {
        spectral::filter_real_rows(values, n, |i, row| {
            for (z, m) in row.iter_mut().zip(&table[i * n..(i + 1) * n]) {
                *z *= m;
            }
        })
    }
}

fn finish(w0: &WignerFunction, values: Vec<f64>, t: f64) -> Result<WignerFunction> {
    let out = WignerFunction::from_parts(*w0.grid(), values, t);
    let drift = (out.integral() - w0.integral()).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift {
            drift,
            limit: NORM_DRIFT_LIMIT,
        });
    }
    let band = monitor::wigner_band_fraction(&out);
    if band > BANDWIDTH_LIMIT {
        return Err(Error::BandwidthOverflow { fraction: band });
    }
    let boundary = monitor::wigner_boundary(&out);
    if boundary > BOUNDARY_LIMIT {
        return Err(Error::BoundaryOverflow {
            mass: boundary,
            limit: BOUNDARY_LIMIT,
        });
    }
    Ok(out)
}

/// Exact (resummed) Moyal evolution by Strang splitting in phase space.
pub fn propagate_moyal_exact(w: &WignerFunction, v: &Potential, dt: f64, steps: usize) -> Result<WignerFunction> {
    check_step("dynamics", dt)?;
    v.validate()?;
    if steps == 0 {
        return Ok(w.clone());
    }
    let grid = *w.grid();
    let n = grid.n();
    let half = shear_table(&grid, 0.5 * dt);
    let full = shear_table(&grid, dt);
    let kick = kick_table(&grid, v, dt);
    let limit = REALNESS_LIMIT / (PI * grid.hbar());
    let check = |r: f64| {
        if r > limit {
            Err(Error::RealnessViolation {
                module: "dynamics",
                residue: r,
                limit,
            })
        } else {
            Ok(())
        }
    };

    let mut values = w.values().to_vec();
    check(apply_table(&mut values, n, &half, true))?;
    for _ in 1..steps {
        check(apply_table(&mut values, n, &kick, false))?;
        check(apply_table(&mut values, n, &full, true))?;
    }
    check(apply_table(&mut values, n, &kick, false))?;
    check(apply_table(&mut values, n, &half, true))?;
    finish(w, values, w.time() + steps as f64 * dt)
}

/// Right-hand side of the truncated Moyal equation,
/// `−(p/m) ∂W/∂x + Σ_{q≤n_max} (−ħ²/4)^q/(2q+1)! · V^{(2q+1)}(x) · ∂^{2q+1}W/∂p^{2q+1}`.
struct TruncatedGenerator {
    n: usize,
    series: Vec<C64>,
    transport: Vec<C64>,
}

impl TruncatedGenerator {
    fn new(grid: &PhaseGrid, v: &Potential, n_max: usize) -> Self {
        let n = grid.n();
        let poly = v.poly(grid.mass());
        let hbar = grid.hbar();
        let coeffs: Vec<f64> = (0..=n_max)
            .map(|q| {
                let fact: f64 = (1..=(2 * q + 1)).map(|f| f as f64).product();
                (-hbar * hbar / 4.0).powi(q as i32) / fact
            })
            .collect();
        let mut series = vec![C64::new(0.0, 0.0); n * n];
        par::for_each_row(&mut series, n, |k, row| {
            let x = grid.x(k);
            let dv: Vec<f64> = (0..=n_max).map(|q| poly.derivative(x, 2 * q + 1)).collect();
            for (s, out) in row.iter_mut().enumerate() {
                if s == n / 2 {
                    continue;
                }
                let sigma = spectral::wavenumber(s, n, grid.dp());
                let ik = C64::new(0.0, sigma);
                let mut acc = C64::new(0.0, 0.0);
                let mut pow = ik;
                for q in 0..=n_max {
                    acc += pow * (coeffs[q] * dv[q]);
                    pow *= ik * ik;
                }
                *out = acc;
            }
        });
        let mut transport = vec![C64::new(0.0, 0.0); n * n];
        par::for_each_row(&mut transport, n, |j, row| {
            let vel = grid.p(j) / grid.mass();
            for (m, out) in row.iter_mut().enumerate() {
                if m == n / 2 {
                    continue;
                }
                *out = C64::new(0.0, -vel * spectral::wavenumber(m, n, grid.dx()));
            }
        });
        TruncatedGenerator { n, series, transport }
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        let mut a = w.to_vec();
        apply_table(&mut a, self.n, &self.series, false);
        let mut b = w.to_vec();
        apply_table(&mut b, self.n, &self.transport, true);
        a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
        a
    }
}

fn axpy(base: &[f64], h: f64, dir: &[f64]) -> Vec<f64> {
    base.iter().zip(dir).map(|(b, d)| b + h * d).collect()
}

fn sq_norm(v: &[f64]) -> f64 {
    par::ordered_sum(v.iter().map(|a| a * a))
}

/// Truncated-series Moyal evolution; `n_max = 0` is the classical Liouville
/// equation.
pub fn propagate_moyal_truncated(
    w: &WignerFunction,
    v: &Potential,
    dt: f64,
    steps: usize,
    n_max: usize,
) -> Result<WignerFunction> {
    check_step("dynamics", dt)?;
    v.validate()?;
    if steps == 0 {
        return Ok(w.clone());
    }
    let generator = TruncatedGenerator::new(w.grid(), v, n_max);
    let mut values = w.values().to_vec();
    let mut norm = sq_norm(&values).sqrt();
    for _ in 0..steps {
        let k1 = generator.apply(&values);
        let k2 = generator.apply(&axpy(&values, 0.5 * dt, &k1));
        let k3 = generator.apply(&axpy(&values, 0.5 * dt, &k2));
        let k4 = generator.apply(&axpy(&values, dt, &k3));
        for i in 0..values.len() {
            values[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let next = sq_norm(&values).sqrt();
        let growth = next / norm - 1.0;
        if !(growth <= STIFFNESS_LIMIT) {
            return Err(Error::Stiffness { growth });
        }
        norm = next;
    }
    // classical (n_max = 0) flow filaments below the grid resolution over long
    // runs, so only the stiffness monitor applies to this route
    Ok(WignerFunction::from_parts(
        *w.grid(),
        values,
        w.time() + steps as f64 * dt,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::gaussian_packet;
    use crate::wigner::wigner_transform;

    fn start() -> WignerFunction {
        let g = PhaseGrid::new(256, -16.0, 16.0, 1.0, 1.0).unwrap();
        wigner_transform(&gaussian_packet(&g, 1.0, 0.0, 0.5f64.sqrt()).unwrap()).unwrap()
    }

    #[test]
    fn zero_steps_return_input_bit_exact() {
        let w = start();
        let v = Potential::Quartic { lambda: 0.1 };
        assert_eq!(propagate_moyal_exact(&w, &v, 1e-3, 0).unwrap(), w);
        assert_eq!(propagate_moyal_truncated(&w, &v, 1e-3, 0, 1).unwrap(), w);
    }

    #[test]
    fn integral_is_conserved() {
        let w = start();
        let v = Potential::DoubleWell { a: -1.0, b: 0.1 };
        let out = propagate_moyal_exact(&w, &v, 1e-2, 50).unwrap();
        assert!((out.integral() - w.integral()).abs() < 1e-12);
        // the explicit series is stiff where V' is large, so keep the domain tight
        let g = PhaseGrid::new(256, -10.0, 10.0, 1.0, 1.0).unwrap();
        let w = wigner_transform(&gaussian_packet(&g, 1.0, 0.0, 0.5f64.sqrt()).unwrap()).unwrap();
        let out = propagate_moyal_truncated(&w, &v, 2.5e-4, 200, 1).unwrap();
        assert!((out.integral() - w.integral()).abs() < 1e-12);
    }

    #[test]
    fn oversized_step_trips_stiffness_monitor() {
        let w = start();
        let err = propagate_moyal_truncated(&w, &Potential::Quartic { lambda: 0.1 }, 0.5, 20, 1).unwrap_err();
        assert!(matches!(err, Error::Stiffness { .. }), "{err}");
    }
}
