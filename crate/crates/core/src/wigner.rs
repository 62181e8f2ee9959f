//! Wavefunction ↔ Wigner function ↔ characteristic kernel transforms.
//!
//! The Wigner integral over the separation `x'` is sampled with step `dx`,
//! which needs `ψ` at half-integer grid points. Those come from a periodic
//! band-limited (FFT) interpolation of `ψ` onto a doubled axis, so every
//! sample is exact for band-limited, well-contained states and no local
//! interpolation is involved.
//!
//! Accuracy requires the state's momentum content to stay below half of the
//! grid's momentum Nyquist, and its spatial extent below half the domain.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::observables;
use crate::par;
use crate::spectral::{self, C64};
use crate::states::Wavefunction;

/// Purity below which reconstruction refuses to treat a field as pure.
pub const PURITY_GATE: f64 = 0.999;

/// Real Wigner distribution sampled on the full `(x, p)` grid.
///
/// `values[k * n + j] = W(x_k, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerFunction {
    grid: PhaseGrid,
    values: Vec<f64>,
    t: f64,
}

impl WignerFunction {
    pub fn from_values(grid: PhaseGrid, values: Vec<f64>, t: f64) -> Result<Self> {
        let n = grid.n();
        if values.len() != n * n {
            return Err(Error::param(
                "wigner",
                "values",
                format!("expected {} values, got {}", n * n, values.len()),
            ));
        }
        Ok(WignerFunction { grid, values, t })
    }

    pub(crate) fn from_parts(grid: PhaseGrid, values: Vec<f64>, t: f64) -> Self {
        WignerFunction { grid, values, t }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn time(&self) -> f64 {
        self.t
    }
    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// `W(x_k, p_j)`.
    #[inline]
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.grid.n() + j]
    }

    /// `Σ W dx dp`.
    pub fn integral(&self) -> f64 {
        par::ordered_sum(self.values.iter().copied()) * self.grid.dx() * self.grid.dp()
    }

    pub(crate) fn ensure_normalized(&self, module: &'static str) -> Result<()> {
        let norm = self.integral();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { module, norm });
        }
        Ok(())
    }

    /// `sqrt(Σ (W − W')² dx dp)`.
    pub fn l2_distance(&self, other: &WignerFunction) -> f64 {
        let s = par::ordered_sum(self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)));
        (s * self.grid.dx() * self.grid.dp()).sqrt()
    }

    /// `sqrt(Σ W² dx dp)`.
    pub fn l2_norm(&self) -> f64 {
        let s = par::ordered_sum(self.values.iter().map(|a| a * a));
        (s * self.grid.dx() * self.grid.dp()).sqrt()
    }

    /// Weighted sum of fields on a common grid, e.g. a statistical mixture.
    pub fn mix(fields: &[WignerFunction], weights: &[f64]) -> Result<WignerFunction> {
        let first = fields
            .first()
            .ok_or_else(|| Error::param("wigner", "fields", "at least one field is required"))?;
        if fields.len() != weights.len() {
            return Err(Error::param("wigner", "weights", "length differs from fields"));
        }
        if fields.iter().any(|f| !f.grid.same_as(&first.grid)) {
            return Err(Error::GridMismatch { module: "wigner" });
        }
        let mut values = vec![0.0; first.values.len()];
        for (f, w) in fields.iter().zip(weights) {
            for (acc, v) in values.iter_mut().zip(&f.values) {
                *acc += w * v;
            }
        }
        Ok(WignerFunction::from_parts(first.grid, values, first.t))
    }
}

/// Fourier transform of `W` over momentum, indexed by `(y, y') = (x + x'/2, x − x'/2)`.
///
/// `values[a * n + b] = Z(y_a, y'_b)`; for a pure state this is `Ψ(y_a) Ψ*(y'_b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicZ {
    grid: PhaseGrid,
    values: Vec<Complex64>,
    t: f64,
}

impl CharacteristicZ {
    pub fn from_values(grid: PhaseGrid, values: Vec<Complex64>, t: f64) -> Result<Self> {
        let n = grid.n();
        if values.len() != n * n {
            return Err(Error::param(
                "wigner",
                "values",
                format!("expected {} values, got {}", n * n, values.len()),
            ));
        }
        Ok(CharacteristicZ { grid, values, t })
    }

    pub(crate) fn from_parts(grid: PhaseGrid, values: Vec<Complex64>, t: f64) -> Self {
        CharacteristicZ { grid, values, t }
    }

    /// Rank-1 kernel `Ψ(y) Ψ*(y')` built directly from a wavefunction.
    pub fn from_wavefunction(psi: &Wavefunction) -> Self {
        let n = psi.grid().n();
        let s = psi.samples();
        let mut values = vec![Complex64::new(0.0, 0.0); n * n];
        par::for_each_row(&mut values, n, |a, row| {
            for (b, v) in row.iter_mut().enumerate() {
                *v = s[a] * s[b].conj();
            }
        });
        CharacteristicZ::from_parts(*psi.grid(), values, psi.time())
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn time(&self) -> f64 {
        self.t
    }
    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.grid.n() + b]
    }

    /// `Z(y_a, y_a)`, which is the position density.
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.grid.n()).map(|a| self.get(a, a)).collect()
    }

    /// `Σ_a Z(y_a, y_a) dx`.
    pub fn trace(&self) -> f64 {
        par::ordered_sum(self.diagonal().iter().map(|z| z.re)) * self.grid.dx()
    }

    /// `max |Z(y, y') − conj(Z(y', y))|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.grid.n();
        let rows = par::map_indices(n, |a| {
            (0..n)
                .map(|b| (self.get(a, b) - self.get(b, a).conj()).norm())
                .fold(0.0, f64::max)
        });
        rows.into_iter().fold(0.0, f64::max)
    }
}

/// Evaluate `W(x_k, p_j) = (dx/2πħ) Σ_s K(2k+s, 2k−s) e^{−i p_j s dx/ħ}`,
/// where `K(m1, m2)` samples the kernel `ρ(y, y')` on the doubled axis
/// `y = x_min + m·dx/2` and is treated as zero outside `0..2n`.
///
/// Returns the real field and the largest discarded imaginary part.
fn wigner_from_doubled_kernel<K>(grid: &PhaseGrid, kernel: K) -> (Vec<f64>, f64)
where
    K: Fn(usize, usize) -> Complex64 + Sync + Send,
{
    let n = grid.n();
    let two_n = 2 * n as i64;
    let plan = spectral::plan(n);
    let scale = grid.dx() / (2.0 * PI * grid.hbar());
    let rows: Vec<(Vec<f64>, f64)> = par::map_indices(n, |k| {
        let mut buf = vec![C64::new(0.0, 0.0); n];
        let centre = 2 * k as i64;
        for s in -(n as i64)..(n as i64) {
            let (plus, minus) = (centre + s, centre - s);
            if plus < 0 || plus >= two_n || minus < 0 || minus >= two_n {
                continue;
            }
            buf[s.rem_euclid(n as i64) as usize] += kernel(plus as usize, minus as usize);
        }
        for (s, v) in buf.iter_mut().enumerate() {
            if s % 2 == 1 {
                *v = -*v;
            }
        }
        plan.forward(&mut buf);
        let residue = buf.iter().map(|z| z.im.abs()).fold(0.0, f64::max) * scale;
        (buf.iter().map(|z| z.re * scale).collect(), residue)
    });
    let mut values = Vec::with_capacity(n * n);
    let mut residue = 0.0f64;
    for (row, r) in rows {
        values.extend(row);
        residue = residue.max(r);
    }
    (values, residue)
}

fn check_residue(grid: &PhaseGrid, residue: f64) -> Result<()> {
    let limit = 1e-12 / (PI * grid.hbar());
    if residue > limit {
        return Err(Error::RealnessViolation {
            module: "wigner",
            residue,
            limit,
        });
    }
    Ok(())
}

/// Wigner function of a pure state, normalized so that `∫∫ W dx dp = 1`.
pub fn wigner_transform(psi: &Wavefunction) -> Result<WignerFunction> {
    psi.ensure_normalized("wigner")?;
    let up = spectral::upsample2(psi.samples());
    let (values, residue) = wigner_from_doubled_kernel(psi.grid(), |plus, minus| up[plus] * up[minus].conj());
    check_residue(psi.grid(), residue)?;
    Ok(WignerFunction::from_parts(*psi.grid(), values, psi.time()))
}

/// `∫ W(x, p) dp` on the position axis.
pub fn marginal_position(w: &WignerFunction) -> Vec<f64> {
    let n = w.grid.n();
    let dp = w.grid.dp();
    w.values
        .chunks(n)
        .map(|row| par::ordered_sum(row.iter().copied()) * dp)
        .collect()
}

/// `∫ W(x, p) dx` on the momentum axis.
pub fn marginal_momentum(w: &WignerFunction) -> Vec<f64> {
    let n = w.grid.n();
    let dx = w.grid.dx();
    let mut out = vec![0.0; n];
    for row in w.values.chunks(n) {
        for (acc, v) in out.iter_mut().zip(row) {
            *acc += v;
        }
    }
    out.iter_mut().for_each(|v| *v *= dx);
    out
}

/// `Z(x, x') = ∫ W(x, p) e^{i p x'/ħ} dp`, re-indexed to `(y, y')`.
///
/// Rows of `W` are first interpolated to half-step positions so that every
/// `(y_a, y'_b)` pair has its midpoint `(y_a + y'_b)/2` on a sampled row.
/// Pairs further apart than half the domain are set to zero, which is exact
/// for states confined to half the domain.
pub fn to_characteristic(w: &WignerFunction) -> CharacteristicZ {
    let grid = w.grid;
    let n = grid.n();
    let up = spectral::upsample_columns(&w.values, n);
    let mut rows: Vec<C64> = up.iter().map(|&v| C64::new(v, 0.0)).collect();
    let dp = grid.dp();
    spectral::plan(n).rows(&mut rows, true, |_, row| {
        for (s, v) in row.iter_mut().enumerate() {
            *v *= if s % 2 == 1 { -dp } else { dp };
        }
    });
    // separations are only known modulo L; keep the principal branch
    // |y − y'| < L/2 and share the Nyquist separation between both signs
    let half = (n / 2) as i64;
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    par::for_each_row(&mut values, n, |a, out| {
        for (b, v) in out.iter_mut().enumerate() {
            let sep = a as i64 - b as i64;
            let weight = match sep.abs().cmp(&half) {
                std::cmp::Ordering::Less => 1.0,
                std::cmp::Ordering::Equal => 0.5,
                std::cmp::Ordering::Greater => continue,
            };
            let s = sep.rem_euclid(n as i64) as usize;
            *v = rows[(a + b) * n + s] * weight;
        }
    });
    CharacteristicZ::from_parts(grid, values, w.t)
}

/// Inverse of [`to_characteristic`]: Fourier transform back over `x'`.
pub fn from_characteristic(z: &CharacteristicZ) -> Result<WignerFunction> {
    let grid = z.grid;
    let n = grid.n();
    // band-limited interpolation of the kernel to the doubled (y, y') lattice
    let rows_up: Vec<Vec<C64>> = par::map_indices(n, |a| spectral::upsample2(&z.values[a * n..(a + 1) * n]));
    let mut cols: Vec<C64> = vec![C64::new(0.0, 0.0); 2 * n * n];
    par::for_each_row(&mut cols, n, |m2, col| {
        for (a, v) in col.iter_mut().enumerate() {
            *v = rows_up[a][m2];
        }
    });
    let cols_up: Vec<Vec<C64>> = par::map_indices(2 * n, |m2| spectral::upsample2(&cols[m2 * n..(m2 + 1) * n]));
    let (values, residue) = wigner_from_doubled_kernel(&grid, |m1, m2| cols_up[m2][m1]);
    check_residue(&grid, residue)?;
    Ok(WignerFunction::from_parts(grid, values, z.t))
}

/// Recover `Ψ` (up to a global phase) from a pure-state Wigner function.
///
/// Uses `Ψ(x) Ψ*(x_a) = ∫ W((x + x_a)/2, p) e^{i p (x − x_a)/ħ} dp` with the
/// anchor `x_a` at the maximum of the position marginal, and fixes the phase
/// so that `Ψ(x_a)` is real and positive.
pub fn reconstruct_wavefunction(w: &WignerFunction) -> Result<Wavefunction> {
    let purity = observables::purity(w);
    if purity < PURITY_GATE {
        return Err(Error::Impure {
            purity,
            gate: PURITY_GATE,
        });
    }
    let density = marginal_position(w);
    let (anchor, peak) = argmax(&density);
    if peak < 1e-6 {
        return Err(Error::EmptyAnchor { density: peak });
    }
    let z = to_characteristic(w);
    let n = w.grid.n();
    let scale = 1.0 / z.get(anchor, anchor).re.max(f64::MIN_POSITIVE).sqrt();
    let samples: Vec<Complex64> = (0..n).map(|a| z.get(a, anchor) * scale).collect();
    let mut psi = Wavefunction::from_parts(w.grid, samples, w.t);
    psi.normalize()?;
    Ok(psi)
}

/// Dominant eigenfunction of a Hermitian kernel and its rank-1 residual.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub state: Wavefunction,
    /// `1 − λ_max / trace`; zero for an exactly rank-1 kernel.
    pub residual: f64,
    pub eigenvalue: f64,
    pub iterations: usize,
}

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

pub fn factorize_characteristic(z: &CharacteristicZ) -> Result<Factorization> {
    factorize_characteristic_with(z, DEFAULT_MAX_ITERATIONS)
}

/// Power iteration on the integral operator `φ ↦ ∫ Z(y, y') φ(y') dy'`,
/// stopped when the Rayleigh quotient changes by less than `1e-12` relative.
pub fn factorize_characteristic_with(z: &CharacteristicZ, max_iterations: usize) -> Result<Factorization> {
    let grid = z.grid;
    let n = grid.n();
    let dx = grid.dx();
    let scale = z.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::NonConvergence { iterations: 0 });
    }
    if z.hermiticity_deviation() > 1e-8 * scale {
        return Err(Error::param("wigner", "z", "kernel is not Hermitian"));
    }
    let diag: Vec<f64> = z.diagonal().iter().map(|d| d.re).collect();
    let trace = par::ordered_sum(diag.iter().copied()) * dx;
    let (anchor, _) = argmax(&diag);

    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        par::map_indices(n, |a| {
            let row = &z.values[a * n..(a + 1) * n];
            row.iter().zip(v).map(|(zab, vb)| zab * vb).sum::<Complex64>() * dx
        })
    };
    let norm = |v: &[Complex64]| (par::ordered_sum(v.iter().map(|c| c.norm_sqr())) * dx).sqrt();

    let mut v: Vec<Complex64> = (0..n).map(|a| z.get(a, anchor)).collect();
    let mut lambda_prev = f64::NAN;
    for it in 1..=max_iterations {
        let nv = norm(&v);
        if !(nv > 0.0) || !nv.is_finite() {
            return Err(Error::NonConvergence { iterations: it });
        }
        v.iter_mut().for_each(|c| *c /= nv);
        let mv = apply(&v);
        let lambda = v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum::<Complex64>().re * dx;
        let converged = (lambda - lambda_prev).abs() <= 1e-12 * lambda.abs();
        v = mv;
        if converged && lambda > 0.0 {
            let mut state = Wavefunction::from_parts(grid, v, z.t);
            state.normalize()?;
            let (anchor, _) = argmax(&state.position_density());
            let phase = state.samples()[anchor].conj() / state.samples()[anchor].norm();
            let samples: Vec<Complex64> = state.samples().iter().map(|s| s * phase).collect();
            let state = Wavefunction::from_parts(grid, samples, z.t);
            return Ok(Factorization {
                state,
                residual: 1.0 - lambda / trace,
                eigenvalue: lambda,
                iterations: it,
            });
        }
        lambda_prev = lambda;
    }
    Err(Error::NonConvergence {
        iterations: max_iterations,
    })
}

pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    values.iter().copied().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (i, v)| if v > best.1 { (i, v) } else { best },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{cat_state, gaussian_packet, harmonic_eigenstate};

    fn grid() -> PhaseGrid {
        PhaseGrid::new(256, -10.0, 10.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn ground_state_peak_and_normalization() {
        let g = grid();
        let psi = gaussian_packet(&g, 0.0, 0.0, 0.5f64.sqrt()).unwrap();
        let w = wigner_transform(&psi).unwrap();
        assert!((w.get(128, 128) - 1.0 / PI).abs() < 1e-8);
        assert!((w.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_unnormalized_input() {
        let g = grid();
        let psi = gaussian_packet(&g, 0.0, 0.0, 1.0).unwrap();
        let doubled: Vec<_> = psi.samples().iter().map(|z| z * 2.0).collect();
        let bad = Wavefunction::from_samples(g, doubled, 0.0).unwrap();
        assert!(matches!(wigner_transform(&bad), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn mixture_fails_purity_gate() {
        let g = grid();
        let a = wigner_transform(&gaussian_packet(&g, 2.0, 0.0, 0.7).unwrap()).unwrap();
        let b = wigner_transform(&gaussian_packet(&g, -2.0, 1.0, 0.7).unwrap()).unwrap();
        let mixed = WignerFunction::mix(&[a, b], &[0.5, 0.5]).unwrap();
        assert!(matches!(reconstruct_wavefunction(&mixed), Err(Error::Impure { .. })));
    }

    #[test]
    fn odd_state_reconstructs_despite_node_at_origin() {
        let g = grid();
        let psi = harmonic_eigenstate(&g, 1, 1.0).unwrap();
        let w = wigner_transform(&psi).unwrap();
        let back = reconstruct_wavefunction(&w).unwrap();
        assert!(back.fidelity(&psi) >= 1.0 - 1e-8);
    }

    #[test]
    fn characteristic_diagonal_is_position_marginal() {
        let g = grid();
        let psi = cat_state(&g, 3.0, 0.5f64.sqrt()).unwrap();
        let w = wigner_transform(&psi).unwrap();
        let z = to_characteristic(&w);
        let m = marginal_position(&w);
        for (d, m) in z.diagonal().iter().zip(&m) {
            assert!((d.re - m).abs() < 1e-10 && d.im.abs() < 1e-10);
        }
        assert!(z.hermiticity_deviation() < 1e-10);
    }

    #[test]
    fn zero_kernel_does_not_converge() {
        let g = PhaseGrid::new(16, -4.0, 4.0, 1.0, 1.0).unwrap();
        let z = CharacteristicZ::from_values(g, vec![Complex64::new(0.0, 0.0); 256], 0.0).unwrap();
        assert!(matches!(
            factorize_characteristic(&z),
            Err(Error::NonConvergence { .. })
        ));
    }
}
