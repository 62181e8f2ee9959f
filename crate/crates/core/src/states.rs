//! Reference pure states: Gaussian packets, oscillator eigenstates and
//! superpositions (two-slit pairs, cat states).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::spectral::{self, C64};

/// Complex position-space amplitudes on a [`PhaseGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: PhaseGrid,
    samples: Vec<Complex64>,
    t: f64,
}

impl Wavefunction {
    /// Wrap raw samples without normalizing them.
    pub fn from_samples(grid: PhaseGrid, samples: Vec<Complex64>, t: f64) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::param(
                "states",
                "samples",
                format!("expected {} samples, got {}", grid.n(), samples.len()),
            ));
        }
        Ok(Wavefunction { grid, samples, t })
    }

    pub(crate) fn from_parts(grid: PhaseGrid, samples: Vec<Complex64>, t: f64) -> Self {
        debug_assert_eq!(samples.len(), grid.n());
        Wavefunction { grid, samples, t }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
    pub fn time(&self) -> f64 {
        self.t
    }
    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// `Σ|ψ_k|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Rescale to unit norm; returns the norm before rescaling.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 1e-14) {
            return Err(Error::Cancellation { norm });
        }
        let inv = 1.0 / norm;
        for z in self.samples.iter_mut() {
            *z *= inv;
        }
        Ok(norm)
    }

    pub(crate) fn ensure_normalized(&self, module: &'static str) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { module, norm });
        }
        Ok(())
    }

    /// `|ψ(x_k)|²`.
    pub fn position_density(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Momentum-space wavefunction `Φ(p_j)` on the grid's momentum axis,
    /// normalized so that `Σ|Φ_j|² dp = Σ|ψ_k|² dx`.
    pub fn momentum_wavefunction(&self) -> Vec<Complex64> {
        let g = &self.grid;
        let n = g.n();
        let mut buf: Vec<C64> = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, z)| if k % 2 == 0 { *z } else { -*z })
            .collect();
        spectral::plan(n).forward(&mut buf);
        let scale = g.dx() / (2.0 * PI * g.hbar()).sqrt();
        buf.iter()
            .enumerate()
            .map(|(j, z)| {
                let phase = -g.p(j) * g.x_min() / g.hbar();
                z * Complex64::from_polar(scale, phase)
            })
            .collect()
    }

    /// `|Φ(p_j)|²` on the momentum axis.
    pub fn momentum_density(&self) -> Vec<f64> {
        self.momentum_wavefunction().iter().map(|z| z.norm_sqr()).collect()
    }

    /// `⟨self|other⟩ = Σ conj(ψ_k) φ_k dx`.
    pub fn inner(&self, other: &Wavefunction) -> Complex64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    /// `|⟨self|other⟩|` for normalized states.
    pub fn fidelity(&self, other: &Wavefunction) -> f64 {
        self.inner(other).norm()
    }

    /// L2 distance minimized over a global phase: `sqrt(|a|² + |b|² − 2|⟨a|b⟩|)`.
    pub fn phase_aligned_distance(&self, other: &Wavefunction) -> f64 {
        let d = self.norm_sqr() + other.norm_sqr() - 2.0 * self.inner(other).norm();
        d.max(0.0).sqrt()
    }
}

/// Normalized Gaussian packet `∝ exp(−(x−x0)²/(4σ²) + i p0 x/ħ)`.
///
/// `σ` is the position standard deviation, so `Δp = ħ/(2σ)`.
pub fn gaussian_packet(grid: &PhaseGrid, x0: f64, p0: f64, sigma: f64) -> Result<Wavefunction> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param(
            "states",
            "sigma",
            format!("must be positive, got {sigma}"),
        ));
    }
    let (lo, hi) = (x0 - 5.0 * sigma, x0 + 5.0 * sigma);
    if lo < grid.x_min() || hi > grid.x_max() {
        return Err(Error::SupportOverflow {
            lo,
            hi,
            x_min: grid.x_min(),
            x_max: grid.x_max(),
        });
    }
    if sigma < 2.0 * grid.dx() {
        return Err(Error::Resolution {
            what: "gaussian packet",
            reason: format!("sigma {sigma} spans fewer than two samples (dx = {})", grid.dx()),
        });
    }
    let hbar = grid.hbar();
    let amp = (2.0 * PI * sigma * sigma).powf(-0.25);
    let samples = (0..grid.n())
        .map(|k| {
            let x = grid.x(k);
            let u = x - x0;
            Complex64::from_polar(amp * (-u * u / (4.0 * sigma * sigma)).exp(), p0 * x / hbar)
        })
        .collect();
    let mut psi = Wavefunction::from_parts(*grid, samples, 0.0);
    psi.normalize()?;
    Ok(psi)
}

/// Harmonic-oscillator eigenstate `level` of `H = p²/2m + mω²x²/2`.
///
/// Hermite functions are generated by the normalized three-term recurrence,
/// which stays finite for every supported level.
pub fn harmonic_eigenstate(grid: &PhaseGrid, level: usize, omega: f64) -> Result<Wavefunction> {
    if level > 20 {
        return Err(Error::param(
            "states",
            "level",
            format!("supported levels are 0..=20, got {level}"),
        ));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::param(
            "states",
            "omega",
            format!("must be positive, got {omega}"),
        ));
    }
    let ell = (grid.hbar() / (grid.mass() * omega)).sqrt();
    if ell < 4.0 * grid.dx() {
        return Err(Error::Resolution {
            what: "oscillator eigenstate",
            reason: format!(
                "length scale {ell:.4} resolved by fewer than 4 samples (dx = {})",
                grid.dx()
            ),
        });
    }
    let reach = ((2 * level + 1) as f64).sqrt() * ell + 3.5 * ell;
    if -reach < grid.x_min() || reach > grid.x_max() {
        return Err(Error::Resolution {
            what: "oscillator eigenstate",
            reason: format!(
                "state extends over [{:.3}, {:.3}], outside the domain [{}, {}]",
                -reach,
                reach,
                grid.x_min(),
                grid.x_max()
            ),
        });
    }
    let norm0 = PI.powf(-0.25) / ell.sqrt();
    let samples = (0..grid.n())
        .map(|k| Complex64::new(hermite_function(level, grid.x(k) / ell) * norm0, 0.0))
        .collect();
    let mut psi = Wavefunction::from_parts(*grid, samples, 0.0);
    psi.normalize()?;
    Ok(psi)
}

/// `h_n(ξ)·π^{1/4}` where `h_n` is the unit-norm Hermite function in `ξ`.
fn hermite_function(level: usize, xi: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = (-0.5 * xi * xi).exp();
    for k in 0..level {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized linear combination together with its pre-normalization norm.
#[derive(Debug, Clone)]
pub struct Superposition {
    pub state: Wavefunction,
    pub raw_norm: f64,
}

pub fn superpose(states: &[Wavefunction], coefficients: &[Complex64]) -> Result<Superposition> {
    let first = states
        .first()
        .ok_or_else(|| Error::param("states", "states", "at least one state is required"))?;
    if states.len() != coefficients.len() {
        return Err(Error::param(
            "states",
            "coefficients",
            format!("{} states but {} coefficients", states.len(), coefficients.len()),
        ));
    }
    if states.iter().any(|s| !s.grid.same_as(&first.grid) || s.t != first.t) {
        return Err(Error::GridMismatch { module: "states" });
    }
    if coefficients.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::Cancellation { norm: 0.0 });
    }
    let mut samples = vec![Complex64::new(0.0, 0.0); first.grid.n()];
    for (s, c) in states.iter().zip(coefficients) {
        for (acc, z) in samples.iter_mut().zip(&s.samples) {
            *acc += c * z;
        }
    }
    let mut state = Wavefunction::from_parts(first.grid, samples, first.t);
    let raw_norm = state.normalize()?;
    Ok(Superposition { state, raw_norm })
}

/// Even cat state: equal-weight sum of Gaussians centered at `±x0`.
pub fn cat_state(grid: &PhaseGrid, x0: f64, sigma: f64) -> Result<Wavefunction> {
    let a = gaussian_packet(grid, x0, 0.0, sigma)?;
    let b = gaussian_packet(grid, -x0, 0.0, sigma)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(superpose(&[a, b], &[one, one])?.state)
}

/// State just behind a double slit: two Gaussian apertures of width `width`
/// centered at `±separation/2`, equal amplitude and phase.
pub fn slit_pair(grid: &PhaseGrid, separation: f64, width: f64) -> Result<Wavefunction> {
    if !(separation > 0.0) {
        return Err(Error::param("states", "separation", "must be positive"));
    }
    cat_state(grid, 0.5 * separation, width)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(256, -10.0, 10.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn gaussian_is_normalized_and_centered() {
        let g = grid();
        let psi = gaussian_packet(&g, 2.0, -1.0, 1.0).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        let mean_x: f64 = psi
            .position_density()
            .iter()
            .enumerate()
            .map(|(k, d)| g.x(k) * d * g.dx())
            .sum();
        assert!((mean_x - 2.0).abs() < 1e-10);
        let mean_p: f64 = psi
            .momentum_density()
            .iter()
            .enumerate()
            .map(|(j, d)| g.p(j) * d * g.dp())
            .sum();
        assert!((mean_p + 1.0).abs() < 1e-10, "{mean_p}");
    }

    #[test]
    fn gaussian_support_overflow() {
        let err = gaussian_packet(&grid(), 9.9, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::SupportOverflow { .. }));
    }

    #[test]
    fn ground_state_peak_value() {
        let psi = harmonic_eigenstate(&grid(), 0, 1.0).unwrap();
        let v = psi.samples()[128];
        assert!((v.re - 0.751_125_544_5).abs() < 1e-10, "{v}");
        let odd = harmonic_eigenstate(&grid(), 1, 1.0).unwrap();
        assert!(odd.samples()[128].norm() < 1e-14);
    }

    #[test]
    fn eigenstates_are_orthonormal() {
        let g = grid();
        let states: Vec<_> = (0..=5).map(|l| harmonic_eigenstate(&g, l, 1.0).unwrap()).collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b).norm() - expect).abs() < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn eigenstate_rejects_unresolvable_grid() {
        let coarse = PhaseGrid::new(16, -10.0, 10.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            harmonic_eigenstate(&coarse, 0, 1.0),
            Err(Error::Resolution { .. })
        ));
        assert!(harmonic_eigenstate(&grid(), 21, 1.0).is_err());
    }

    #[test]
    fn cancelling_superposition_is_rejected() {
        let psi = gaussian_packet(&grid(), 0.0, 0.0, 1.0).unwrap();
        let err = superpose(
            &[psi.clone(), psi],
            &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Cancellation { .. }));
    }

    #[test]
    fn superpose_reports_raw_norm() {
        let g = grid();
        let a = gaussian_packet(&g, 3.0, 0.0, 0.7).unwrap();
        let b = gaussian_packet(&g, -3.0, 0.0, 0.7).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let s = superpose(&[a, b], &[one, one]).unwrap();
        // overlap of two equal-width packets is exp(-d²/8σ²)
        let expected = (2.0 + 2.0 * (-36.0f64 / (8.0 * 0.49)).exp()).sqrt();
        assert!((s.raw_norm - expected).abs() < 1e-9);
        let other = PhaseGrid::new(128, -10.0, 10.0, 1.0, 1.0).unwrap();
        let c = gaussian_packet(&other, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            superpose(&[s.state, c], &[one, one]),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn cat_position_density_is_symmetric() {
        let g = grid();
        let cat = cat_state(&g, 3.0, 1.0 / 2f64.sqrt()).unwrap();
        let d = cat.position_density();
        // x_k and x_{n-k} are mirror images about 0
        for k in 1..g.n() {
            assert!((d[k] - d[g.n() - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn cat_momentum_fringe_spacing() {
        let g = PhaseGrid::new(512, -20.0, 20.0, 1.0, 1.0).unwrap();
        let cat = cat_state(&g, 3.0, 1.0 / 2f64.sqrt()).unwrap();
        let d = cat.momentum_density();
        let peaks: Vec<f64> = (1..g.n() - 1)
            .filter(|&j| d[j] > d[j - 1] && d[j] >= d[j + 1] && d[j] > 1e-6)
            .map(|j| g.p(j))
            .collect();
        assert!(peaks.len() >= 3);
        let period = PI / 3.0;
        for w in peaks.windows(2) {
            assert!(((w[1] - w[0]) - period).abs() <= g.dp(), "{w:?}");
        }
    }
}
