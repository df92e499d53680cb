//! Discrete companions of the continuum transform pair
//! `f(omega) = integral dt e^{i omega t} f(t)`,
//! `f(t) = integral domega/2pi e^{-i omega t} f(omega)`,
//! sampled on a [`FrequencyGrid`] and its implied time grid.
//!
//! Retarded kernels with pole widths far below the frequency spacing cannot be
//! recovered by the plain discrete transform; [`shifted_retarded_kernel`]
//! evaluates the integrand on a contour lifted `alpha` above the real axis
//! (legal for functions analytic in the upper half plane) and undoes the
//! `e^{-alpha t}` damping afterwards, which restores spectral accuracy.

use crate::grid::FrequencyGrid;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// `f(t_m) = (domega/2pi) (-1)^m DFT_fwd[F]_m` with `t_m = m dt`; indices past
/// `n/2` alias to `t_m - period` (negative times).
pub fn freq_to_time(grid: &FrequencyGrid, values: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(grid.n_samples, values.len());
    let n = grid.n_samples;
    let mut buf: Vec<Complex64> = values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = grid.d_omega() / (2.0 * std::f64::consts::PI);
    for (m, v) in buf.iter_mut().enumerate() {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        *v *= scale * sign;
    }
    buf
}

/// Inverse companion of [`freq_to_time`]: `F(omega_k) = dt sum_m e^{i omega_k t_m} g_m`.
pub fn time_to_freq(grid: &FrequencyGrid, values: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(grid.n_samples, values.len());
    let n = grid.n_samples;
    let mut buf: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(m, v)| if m % 2 == 0 { *v } else { -*v })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let dt = grid.time_step();
    for v in buf.iter_mut() {
        *v *= dt;
    }
    buf
}

/// Exponent of the default contour lift: `alpha = SHIFT_DECADES / period`,
/// which suppresses periodization images by `e^{-SHIFT_DECADES}` and places
/// the contour `SHIFT_DECADES / 2pi` grid spacings above the real axis.
pub const SHIFT_DECADES: f64 = 30.0;

pub fn default_shift(grid: &FrequencyGrid) -> f64 {
    SHIFT_DECADES / grid.period()
}

/// Reconstruct the time kernel of a retarded function from samples of
/// `f(omega + i alpha)` along the lifted contour. Returns samples on the
/// implied time grid in natural DFT order; entry `m` approximates
/// `f(t_m)` for `t_m` well below the period (accuracy degrades as
/// `e^{-alpha (period - t)}` near the end) and carries only an
/// `e^{-alpha period}`-suppressed wrap of positive-time data on the
/// negative-time half.
pub fn shifted_retarded_kernel<F>(
    grid: &FrequencyGrid,
    alpha: f64,
    mut f: F,
) -> Vec<Complex64>
where
    F: FnMut(Complex64) -> Complex64,
{
    let samples: Vec<Complex64> = (0..grid.n_samples)
        .map(|k| f(Complex64::new(grid.omega(k), alpha)))
        .collect();
    let mut time = freq_to_time(grid, &samples);
    for (m, v) in time.iter_mut().enumerate() {
        *v *= (alpha * grid.fold_time(m)).exp();
    }
    time
}

/// Periodic Catmull-Rom interpolation over samples in natural DFT time order.
/// `t` may be negative; it is reduced into the principal period.
pub fn interp_periodic(grid: &FrequencyGrid, samples: &[Complex64], t: f64) -> Complex64 {
    let n = samples.len();
    debug_assert_eq!(n, grid.n_samples);
    let period = grid.period();
    let mut s = (t / period).rem_euclid(1.0) * n as f64;
    if s >= n as f64 {
        s -= n as f64;
    }
    let i1 = s.floor() as usize % n;
    let u = s - s.floor();
    let i0 = (i1 + n - 1) % n;
    let i2 = (i1 + 1) % n;
    let i3 = (i1 + 2) % n;
    let (p0, p1, p2, p3) = (samples[i0], samples[i1], samples[i2], samples[i3]);
    // Catmull-Rom in u
    let a = 2.0 * p1;
    let b = p2 - p0;
    let c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
    let d = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
    0.5 * (a + b * u + c * u * u + d * u * u * u)
}
