//! Quadrature marginals `w(X; θ)` of the Wigner function and their inversion
//! by filtered back-projection.
//!
//! Frames are pure rotations, `X = cos θ · x + sin θ · p`, with the quadrature
//! axis sampled on the position axis of the source grid. A scaled frame
//! `X' = μx + νp` with `μ² + ν² = r²` is the rotated frame with `X' = r·X`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::par;
use crate::spectral::{self, C64};
use crate::wigner::WignerFunction;

/// Frame count below which reconstruction is flagged as qualitative only.
pub const RECOMMENDED_FRAMES: usize = 32;
/// Oversampling of filtered projections used for back-projection lookup.
const OVERSAMPLE: usize = 8;

/// Family of quadrature marginals, one density per angle.
#[derive(Debug, Clone)]
pub struct Tomogram {
    grid: PhaseGrid,
    angles: Vec<f64>,
    values: Vec<f64>,
    min_before_clip: f64,
}

/// Equality ignores the pre-clip diagnostic.
impl PartialEq for Tomogram {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.angles == other.angles && self.values == other.values
    }
}

impl Tomogram {
    pub fn from_parts(grid: PhaseGrid, angles: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != angles.len() * grid.n() {
            return Err(Error::param(
                "tomography",
                "values",
                format!("expected {} values, got {}", angles.len() * grid.n(), values.len()),
            ));
        }
        let min_before_clip = values.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Tomogram {
            grid,
            angles,
            values,
            min_before_clip,
        })
    }

    /// Grid whose position axis carries the quadrature samples.
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
    /// `(μ, ν) = (cos θ, sin θ)` per frame.
    pub fn frames(&self) -> Vec<(f64, f64)> {
        self.angles.iter().map(|t| (t.cos(), t.sin())).collect()
    }
    pub fn x_axis(&self) -> Vec<f64> {
        self.grid.x_axis()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn frame(&self, i: usize) -> &[f64] {
        let n = self.grid.n();
        &self.values[i * n..(i + 1) * n]
    }
    pub fn len(&self) -> usize {
        self.angles.len()
    }
    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
    /// Smallest marginal value before negative round-off was clipped.
    pub fn min_before_clip(&self) -> f64 {
        self.min_before_clip
    }
    /// `Σ w dX` for frame `i`.
    pub fn frame_integral(&self, i: usize) -> f64 {
        par::ordered_sum(self.frame(i).iter().copied()) * self.grid.dx()
    }
    /// `Σ X w dX` for frame `i`.
    pub fn frame_mean(&self, i: usize) -> f64 {
        let g = &self.grid;
        par::ordered_sum(self.frame(i).iter().enumerate().map(|(k, w)| g.x(k) * w)) * g.dx()
    }
}

/// Shift every row of `values` (row-major, `n × n`) by `shift(row)` along
/// the row axis, whose sample spacing is `d`: `f(u) → f(u − shift)`.
fn shear_rows(values: &mut [f64], n: usize, d: f64, shift: impl Fn(usize) -> f64 + Sync + Send) {
    spectral::filter_real_rows(values, n, |i, row| {
        let a = shift(i);
        for (m, z) in row.iter_mut().enumerate() {
            if m == n / 2 {
                *z = C64::new(z.re * (spectral::wavenumber(m, n, d) * a).cos(), 0.0);
            } else {
                *z *= Complex64::from_polar(1.0, -spectral::wavenumber(m, n, d) * a);
            }
        }
    });
}

/// `G(x, p) = W(R_θ (x, p))` by three spectral shears, with `|θ| ≤ π/2`.
fn rotate_field(values: &mut Vec<f64>, grid: &PhaseGrid, theta: f64) {
    let n = grid.n();
    let t = (0.5 * theta).tan();
    let s = theta.sin();
    let x_shear = |values: &mut Vec<f64>| {
        let mut tr = spectral::transpose(values, n);
        shear_rows(&mut tr, n, grid.dx(), |j| t * grid.p(j));
        *values = spectral::transpose(&tr, n);
    };
    x_shear(values);
    shear_rows(values, n, grid.dp(), |k| -s * grid.x(k));
    x_shear(values);
}

fn validate_angles(angles: &[f64]) -> Result<()> {
    if angles.is_empty() {
        return Err(Error::TooFewFrames { count: 0, required: 1 });
    }
    for &theta in angles {
        if !(0.0..PI).contains(&theta) {
            return Err(Error::AngleOutOfRange { theta });
        }
    }
    let mut sorted = angles.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::param("tomography", "angles", "angles must be pairwise distinct"));
    }
    Ok(())
}

/// `w(X; θ) = ∫∫ δ(X − cos θ x − sin θ p) W(x, p) dx dp` for each angle.
///
/// Negative round-off in the marginals is clipped to zero; the smallest
/// pre-clip value is kept in [`Tomogram::min_before_clip`].
pub fn forward_tomogram(w: &WignerFunction, angles: &[f64]) -> Result<Tomogram> {
    validate_angles(angles)?;
    w.ensure_normalized("tomography")?;
    let grid = *w.grid();
    let n = grid.n();
    let frames: Vec<Vec<f64>> = par::map_indices(angles.len(), |i| {
        let theta = angles[i];
        let mut g = w.values().to_vec();
        if theta > 0.5 * PI {
            rotate_field(&mut g, &grid, 0.5 * theta);
            rotate_field(&mut g, &grid, 0.5 * theta);
        } else if theta != 0.0 {
            rotate_field(&mut g, &grid, theta);
        }
        g.chunks(n)
            .map(|row| par::ordered_sum(row.iter().copied()) * grid.dp())
            .collect()
    });
    let mut values = Vec::with_capacity(angles.len() * n);
    let mut min_before_clip = f64::INFINITY;
    for f in frames {
        for v in f {
            min_before_clip = min_before_clip.min(v);
            values.push(v.max(0.0));
        }
    }
    Ok(Tomogram {
        grid,
        angles: angles.to_vec(),
        values,
        min_before_clip,
    })
}

/// Output of [`inverse_tomogram`].
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub wigner: WignerFunction,
    pub warnings: Vec<String>,
}

/// Ram-Lak ramp response for a zero-padded length `len` and spacing `d`,
/// rolled off with a raised cosine between 80% and 100% of Nyquist.
fn ramp_filter(len: usize, d: f64) -> Vec<f64> {
    let mut h = vec![C64::new(0.0, 0.0); len];
    for (i, v) in h.iter_mut().enumerate() {
        let k = crate::grid::signed_index(i, len);
        *v = C64::new(
            if k == 0 {
                0.25 / (d * d)
            } else if k % 2 != 0 {
                -1.0 / (PI * PI * (k * k) as f64 * d * d)
            } else {
                0.0
            },
            0.0,
        );
    }
    spectral::plan(len).forward(&mut h);
    (0..len)
        .map(|i| {
            let frac = crate::grid::signed_index(i, len).unsigned_abs() as f64 / (len / 2) as f64;
            let window = if frac <= 0.8 {
                1.0
            } else {
                0.5 * (1.0 + (PI * (frac - 0.8) / 0.2).cos())
            };
            h[i].re * window
        })
        .collect()
}

/// Four-point Lagrange interpolation on a periodic sample array.
fn cubic_periodic(samples: &[f64], u: f64) -> f64 {
    let len = samples.len() as i64;
    let i = u.floor();
    let f = u - i;
    let i = i as i64;
    let at = |o: i64| samples[(i + o).rem_euclid(len) as usize];
    let (pm, p0, p1, p2) = (at(-1), at(0), at(1), at(2));
    -f * (f - 1.0) * (f - 2.0) / 6.0 * pm + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * p0
        - (f + 1.0) * f * (f - 2.0) / 2.0 * p1
        + (f + 1.0) * f * (f - 1.0) / 6.0 * p2
}

/// Filtered back-projection of a tomogram onto `target`.
///
/// Angular weights are half the gaps to the neighbouring frames (periodic
/// over π), so nearly equispaced frame sets are handled consistently. The
/// result is normalized to unit integral.
pub fn inverse_tomogram(tomo: &Tomogram, target: &PhaseGrid) -> Result<Reconstruction> {
    let frames = tomo.len();
    if frames < 2 {
        return Err(Error::TooFewFrames {
            count: frames,
            required: 2,
        });
    }
    let mut warnings = Vec::new();
    if frames < RECOMMENDED_FRAMES {
        warnings.push(format!(
            "tomography: only {frames} frames; at least {RECOMMENDED_FRAMES} are needed for a quantitative reconstruction"
        ));
    }
    let src = tomo.grid;
    let nx = src.n();
    let d = src.dx();
    let padded = 2 * nx;
    let fine = OVERSAMPLE * padded;
    let filter = ramp_filter(padded, d);

    let mut order: Vec<usize> = (0..frames).collect();
    order.sort_by(|&a, &b| tomo.angles[a].total_cmp(&tomo.angles[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| tomo.angles[i]).collect();
    let weights: Vec<f64> = (0..frames)
        .map(|i| {
            let prev = if i == 0 { sorted[frames - 1] - PI } else { sorted[i - 1] };
            let next = if i + 1 == frames { sorted[0] + PI } else { sorted[i + 1] };
            0.5 * (next - prev)
        })
        .collect();

    // filtered projections, oversampled on the padded periodic axis
    let filtered: Vec<Vec<f64>> = par::map_indices(frames, |slot| {
        let frame = tomo.frame(order[slot]);
        let mut buf = vec![C64::new(0.0, 0.0); padded];
        for (b, v) in buf.iter_mut().zip(frame) {
            *b = C64::new(*v, 0.0);
        }
        spectral::plan(padded).forward(&mut buf);
        let mut wide = vec![C64::new(0.0, 0.0); fine];
        let half = padded / 2;
        for (m, z) in buf.iter().enumerate() {
            let z = z * filter[m];
            if m < half {
                wide[m] = z;
            } else if m > half {
                wide[fine - padded + m] = z;
            } else {
                wide[m] = z * 0.5;
                wide[fine - half] = z * 0.5;
            }
        }
        spectral::plan(fine).inverse(&mut wide);
        // discrete convolution carries a factor d; the FFT pair carries 1/padded
        let scale = d / padded as f64;
        wide.iter().map(|z| z.re * scale).collect()
    });

    let n = target.n();
    let x0 = src.x_min();
    let step = d / OVERSAMPLE as f64;
    let trig: Vec<(f64, f64)> = sorted.iter().map(|t| (t.cos(), t.sin())).collect();
    let mut values = vec![0.0; n * n];
    par::for_each_row(&mut values, n, |k, row| {
        let x = target.x(k);
        for (j, out) in row.iter_mut().enumerate() {
            let p = target.p(j);
            let mut acc = 0.0;
            for ((q, (c, s)), wgt) in filtered.iter().zip(&trig).zip(&weights) {
                let u = (c * x + s * p - x0) / step;
                acc += wgt * cubic_periodic(q, u);
            }
            *out = acc;
        }
    });
    let total = par::ordered_sum(values.iter().copied()) * target.dx() * target.dp();
    if !(total.abs() > 0.0) {
        return Err(Error::param(
            "tomography",
            "tomogram",
            "reconstruction has zero integral",
        ));
    }
    values.iter_mut().for_each(|v| *v /= total);
    Ok(Reconstruction {
        wigner: WignerFunction::from_parts(*target, values, 0.0),
        warnings,
    })
}

/// Relative L2 error `‖a − b‖ / ‖b‖`.
pub fn relative_l2(a: &WignerFunction, b: &WignerFunction) -> f64 {
    a.l2_distance(b) / b.l2_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::harmonic_eigenstate;
    use crate::wigner::{marginal_position, wigner_transform};

    fn ground() -> WignerFunction {
        let g = PhaseGrid::isotropic(128, 1.0, 1.0).unwrap();
        wigner_transform(&harmonic_eigenstate(&g, 0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn zero_angle_is_position_marginal() {
        let w = ground();
        let t = forward_tomogram(&w, &[0.0]).unwrap();
        for (a, b) in t.frame(0).iter().zip(marginal_position(&w)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn angle_validation() {
        let w = ground();
        assert!(matches!(forward_tomogram(&w, &[]), Err(Error::TooFewFrames { .. })));
        assert!(matches!(
            forward_tomogram(&w, &[PI]),
            Err(Error::AngleOutOfRange { .. })
        ));
        assert!(matches!(
            forward_tomogram(&w, &[-0.1]),
            Err(Error::AngleOutOfRange { .. })
        ));
    }

    #[test]
    fn one_frame_cannot_be_inverted() {
        let w = ground();
        let t = forward_tomogram(&w, &[0.3]).unwrap();
        assert!(matches!(
            inverse_tomogram(&t, w.grid()),
            Err(Error::TooFewFrames { count: 1, .. })
        ));
    }

    #[test]
    fn sparse_frames_warn_but_succeed() {
        let w = ground();
        let angles: Vec<f64> = (0..8).map(|i| i as f64 * PI / 8.0).collect();
        let t = forward_tomogram(&w, &angles).unwrap();
        let r = inverse_tomogram(&t, w.grid()).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn lagrange_interpolation_is_exact_for_cubics() {
        let f = |u: f64| 0.5 + u - 0.1 * u * u + 0.01 * u * u * u;
        let s: Vec<f64> = (0..32).map(|i| f(i as f64)).collect();
        assert!((cubic_periodic(&s, 10.3) - f(10.3)).abs() < 1e-10);
    }
}
