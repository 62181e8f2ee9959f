use super::monitor::{self, BANDWIDTH_LIMIT, BOUNDARY_LIMIT, NORM_DRIFT_LIMIT};
use super::potential::Potential;
use super::schrodinger::{check_step, Band, SplitStep};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral;
use crate::wigner::CharacteristicZ;
use num_complex::Complex64;

/// Evolve `Z(y, y')` under
/// `[ħ²/2m (∂²_y − ∂²_y') − (V(y) − V(y'))] Z = −iħ ∂Z/∂t`.
///
/// The generator separates, so `Z → U Z U†`: every column (a function of
/// `y`) takes the split-step propagator and every row (a function of `y'`)
/// its complex conjugate.
pub fn propagate_characteristic(z: &CharacteristicZ, v: &Potential, dt: f64, steps: usize) -> Result<CharacteristicZ> {
    check_step("dynamics", dt)?;
    v.validate()?;
    if steps == 0 {
        return Ok(z.clone());
    }
    let grid = *z.grid();
    let n = grid.n();
    let forward = SplitStep::new(&grid, v, dt);
    let backward = forward.conjugated();
    let run = |data: &[Complex64], stepper: &SplitStep| -> (Vec<Complex64>, Band) {
        let rows: Vec<(Vec<Complex64>, Band)> = par::map_indices(n, |i| {
            let mut row = data[i * n..(i + 1) * n].to_vec();
            let band = stepper.evolve(&mut row, steps);
            (row, band)
        });
        let mut out = Vec::with_capacity(n * n);
        let mut total = Band::default();
        for (row, band) in rows {
            out.extend(row);
            total.outer += band.outer;
            total.total += band.total;
        }
        (out, total)
    };
    let (values, rows_band) = run(z.values(), &backward);
    let (cols, cols_band) = run(&spectral::transpose(&values, n), &forward);
    let values = spectral::transpose(&cols, n);

    // a row carries the weight of its fixed coordinate, so pool the power
    let band = rows_band.fraction().max(cols_band.fraction());
    if band > BANDWIDTH_LIMIT {
        return Err(Error::BandwidthOverflow { fraction: band });
    }
    let out = CharacteristicZ::from_parts(grid, values, z.time() + steps as f64 * dt);
    let drift = (out.trace() - z.trace()).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift {
            drift,
            limit: NORM_DRIFT_LIMIT,
        });
    }
    let boundary = monitor::kernel_boundary(&out);
    if boundary > BOUNDARY_LIMIT {
        return Err(Error::BoundaryOverflow {
            mass: boundary,
            limit: BOUNDARY_LIMIT,
        });
    }
    Ok(out)
}
