//! FFT plumbing shared by the transforms and propagators.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::par;

pub(crate) type C64 = Complex64;

pub(crate) struct Plan {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Plan>>>> = OnceLock::new();

/// Cached forward/inverse plans for length `n`.
pub(crate) fn plan(n: usize) -> Arc<Plan> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan {
                n,
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl Plan {
    fn scratch_len(&self) -> usize {
        self.fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len())
    }

    /// Unnormalized forward transform `X_m = Σ x_k e^{-2πi km/n}` of one buffer.
    pub(crate) fn forward(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.fwd.process(buf);
    }

    /// Unnormalized inverse transform `x_k = Σ X_m e^{+2πi km/n}` of one buffer.
    pub(crate) fn inverse(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inv.process(buf);
    }

    /// Transform every row, then hand it to `post(row_index, row)`.
    pub(crate) fn rows<F>(&self, data: &mut [C64], inverse: bool, post: F)
    where
        F: Fn(usize, &mut [C64]) + Sync + Send,
    {
        let n = self.n;
        let len = self.scratch_len();
        let fft = if inverse { &self.inv } else { &self.fwd };
        par::for_each_row_with(
            data,
            n,
            || vec![C64::new(0.0, 0.0); len],
            |scratch, i, row| {
                fft.process_with_scratch(row, scratch);
                post(i, row);
            },
        );
    }
}

/// Filter every real row of `data` through `kernel` in the Fourier domain
/// (forward FFT, multiply, inverse FFT, `1/n`), keeping the real part.
///
/// Returns the largest discarded imaginary part.
pub(crate) fn filter_real_rows<F>(data: &mut [f64], n: usize, kernel: F) -> f64
where
    F: Fn(usize, &mut [C64]) + Sync + Send,
{
    let plan = plan(n);
    let len = plan.scratch_len();
    let scale = 1.0 / n as f64;
    // max over non-negative floats is order independent, so the bit pattern
    // comparison keeps the result deterministic
    let residue = AtomicU64::new(0);
    par::for_each_row_with(
        data,
        n,
        || (vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); len]),
        |(buf, scratch), i, row| {
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = C64::new(*v, 0.0);
            }
            plan.fwd.process_with_scratch(buf, scratch);
            kernel(i, buf);
            plan.inv.process_with_scratch(buf, scratch);
            let mut worst = 0.0f64;
            for (v, b) in row.iter_mut().zip(buf.iter()) {
                *v = b.re * scale;
                worst = worst.max((b.im * scale).abs());
            }
            residue.fetch_max(worst.to_bits(), Ordering::Relaxed);
        },
    );
    f64::from_bits(residue.load(Ordering::Relaxed))
}

/// Transpose a square `n × n` row-major array.
pub(crate) fn transpose<T: Copy + Send + Sync>(src: &[T], n: usize) -> Vec<T> {
    debug_assert_eq!(src.len(), n * n);
    let mut out = src.to_vec();
    par::for_each_row(&mut out, n, |i, row| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = src[j * n + i];
        }
    });
    out
}

/// Periodic band-limited interpolation onto a twice-as-fine grid.
///
/// `out[2k] == x[k]` up to rounding; odd entries are the spectral midpoints.
pub(crate) fn upsample2(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    let mut spectrum = x.to_vec();
    plan(n).forward(&mut spectrum);
    let mut wide = vec![C64::new(0.0, 0.0); 2 * n];
    let half = n / 2;
    wide[..half].copy_from_slice(&spectrum[..half]);
    for m in half + 1..n {
        wide[n + m] = spectrum[m];
    }
    wide[half] = spectrum[half] * 0.5;
    wide[n + half] = spectrum[half] * 0.5;
    plan(2 * n).inverse(&mut wide);
    let scale = 1.0 / n as f64;
    for v in wide.iter_mut() {
        *v *= scale;
    }
    wide
}

/// Upsample every column of an `n × n` real field to `2n` rows.
pub(crate) fn upsample_columns(field: &[f64], n: usize) -> Vec<f64> {
    let t: Vec<C64> = transpose(field, n).into_iter().map(|v| C64::new(v, 0.0)).collect();
    let rows: Vec<Vec<C64>> = par::map_indices(n, |j| upsample2(&t[j * n..(j + 1) * n]));
    let mut out = vec![0.0; 2 * n * n];
    par::for_each_row(&mut out, n, |h, row| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = rows[j][h].re;
        }
    });
    out
}

/// Angular wavenumber of FFT bin `m` on an axis of `n` samples with spacing `d`.
#[inline]
pub(crate) fn wavenumber(m: usize, n: usize, d: f64) -> f64 {
    2.0 * std::f64::consts::PI * crate::grid::signed_index(m, n) as f64 / (n as f64 * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upsample_reproduces_even_samples_and_bandlimited_midpoints() {
        let n = 32;
        let f = |t: f64| C64::new((t).cos() + 0.3 * (3.0 * t).sin(), 0.5 * (2.0 * t).cos());
        let x: Vec<C64> = (0..n)
            .map(|k| f(2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        let up = upsample2(&x);
        for (m, v) in up.iter().enumerate() {
            let t = std::f64::consts::PI * m as f64 / n as f64;
            assert!((v - f(t)).norm() < 1e-13, "m={m}");
        }
    }

    #[test]
    fn transpose_is_involution() {
        let n = 5;
        let a: Vec<f64> = (0..25).map(|v| v as f64).collect();
        let t = transpose(&a, n);
        assert_eq!(t[1], 5.0);
        assert_eq!(transpose(&t, n), a);
    }
}
