//! Numerical health monitors shared by the propagators.

use crate::grid::PhaseGrid;
use crate::states::Wavefunction;
use crate::wigner::{CharacteristicZ, WignerFunction};

/// Boundary mass above which a result is flagged in reports.
pub const BOUNDARY_FLAG: f64 = 1e-8;
/// Boundary mass above which propagation fails.
pub const BOUNDARY_LIMIT: f64 = 1e-4;
/// Largest tolerated spectral fraction beyond 80% of Nyquist.
pub const BANDWIDTH_LIMIT: f64 = 1e-8;
/// Largest tolerated cumulative change of the total probability.
pub const NORM_DRIFT_LIMIT: f64 = 1e-9;
/// Largest tolerated imaginary residue of a phase-space step.
pub const REALNESS_LIMIT: f64 = 1e-10;

/// Width in samples of the outer 5% band at each end of an axis.
fn edge(n: usize) -> usize {
    (0.05 * n as f64).ceil() as usize
}

fn in_edge(i: usize, n: usize) -> bool {
    let e = edge(n);
    i < e || i >= n - e
}

fn edge_mass(density: &[f64], step: f64) -> f64 {
    let n = density.len();
    density
        .iter()
        .enumerate()
        .filter(|(i, _)| in_edge(*i, n))
        .map(|(_, d)| d.abs())
        .sum::<f64>()
        * step
}

/// Probability in the outer 5% of the position axis plus the outer 5% of
/// the momentum axis.
pub fn wave_boundary(psi: &Wavefunction) -> f64 {
    let g = psi.grid();
    edge_mass(&psi.position_density(), g.dx()) + edge_mass(&psi.momentum_density(), g.dp())
}

/// `Σ |W| dx dp` over cells in the outer 5% of either axis.
pub fn wigner_boundary(w: &WignerFunction) -> f64 {
    let g: &PhaseGrid = w.grid();
    let n = g.n();
    let mut acc = 0.0;
    for (k, row) in w.values().chunks(n).enumerate() {
        let x_edge = in_edge(k, n);
        for (j, v) in row.iter().enumerate() {
            if x_edge || in_edge(j, n) {
                acc += v.abs();
            }
        }
    }
    acc * g.dx() * g.dp()
}

/// Diagonal (position density) mass of a kernel in the outer 5%.
pub fn kernel_boundary(z: &CharacteristicZ) -> f64 {
    let d: Vec<f64> = z.diagonal().iter().map(|c| c.re).collect();
    edge_mass(&d, z.grid().dx())
}

/// Fraction of `Σ|W|` at momenta beyond 80% of Nyquist.
pub fn wigner_band_fraction(w: &WignerFunction) -> f64 {
    let g = w.grid();
    let n = g.n();
    let cut = 0.8 * g.p_nyquist();
    let mut total = 0.0;
    let mut outer = 0.0;
    for row in w.values().chunks(n) {
        for (j, v) in row.iter().enumerate() {
            total += v.abs();
            if g.p(j).abs() > cut {
                outer += v.abs();
            }
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}
