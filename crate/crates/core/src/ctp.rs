//! Closed-time-path layer: doublet trajectories built by folding forward
//! evolution at the final time, the doubled action with its infinitesimal
//! imaginary part, the 2x2 propagator algebra in the `(D^n, D^f, Dbar)`
//! parametrization, the quantum harmonic propagator, and the decoherence
//! weight carried by the symmetric imaginary kernel.

use crate::grid::{FrequencyGrid, TimeGrid};
use crate::model::{DiscreteBath, SourceProfile, SystemSpec};
use crate::oracle::Trajectory;
use crate::transform::{freq_to_time, interp_periodic, time_to_freq};
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CtpError {
    #[error("trajectory grid cannot be folded at its midpoint: {0}")]
    GridNotFoldable(String),
    #[error("{which} fails its time-parity requirement (residual {residual:.3e})")]
    ParityViolation { which: &'static str, residual: f64 },
    #[error("CTP block violates the consistency identity (residual {0:.3e})")]
    InconsistentBlock(f64),
    #[error("kernel has a negative eigenvalue ({0:.3e})")]
    NotPsd(f64),
    #[error("eps * period = {0:.2} leaves the sampled block unresolved in time")]
    UnresolvedDamping(f64),
}

/// Doublet `(x^+, x^-)` on `[0, t_f]`; the two branches share the final point
/// by construction of the fold.
#[derive(Debug, Clone, PartialEq)]
pub struct CtpTrajectory {
    pub grid: TimeGrid,
    pub x_plus: Vec<f64>,
    pub x_minus: Vec<f64>,
}

impl CtpTrajectory {
    pub fn closure_residual(&self) -> f64 {
        (self.x_plus[self.x_plus.len() - 1] - self.x_minus[self.x_minus.len() - 1]).abs()
    }
}

/// Fold a series on `[0, 2 t_f]` into the doublet `x^+(t) = x(t)`,
/// `x^-(t) = x(2 t_f - t)`. The grid must start at 0 and hold a sample
/// exactly at `t_f` (odd sample count).
pub fn lift_series(grid: &TimeGrid, series: &[f64]) -> Result<CtpTrajectory, CtpError> {
    if grid.n_samples % 2 == 0 {
        return Err(CtpError::GridNotFoldable(
            "even sample count leaves no node at the folding time".into(),
        ));
    }
    if grid.t_start.abs() > 1e-12 * (1.0 + grid.t_end.abs()) {
        return Err(CtpError::GridNotFoldable("grid must start at t = 0".into()));
    }
    if series.len() != grid.n_samples {
        return Err(CtpError::GridNotFoldable("series length does not match grid".into()));
    }
    let mid = grid.n_samples / 2;
    let x_plus: Vec<f64> = series[..=mid].to_vec();
    let x_minus: Vec<f64> = (0..=mid).map(|i| series[grid.n_samples - 1 - i]).collect();
    let half = TimeGrid::new(0.0, grid.time(mid), mid + 1)
        .map_err(|e| CtpError::GridNotFoldable(e.to_string()))?;
    Ok(CtpTrajectory { grid: half, x_plus, x_minus })
}

/// Fold the system coordinate of a full trajectory.
pub fn lift_trajectory(traj: &Trajectory) -> Result<CtpTrajectory, CtpError> {
    lift_series(&traj.grid, &traj.x)
}

/// Branch exchange `tau x^{+-} = x^{-+}`; an involution.
pub fn tau_exchange(traj: &CtpTrajectory) -> CtpTrajectory {
    CtpTrajectory {
        grid: traj.grid,
        x_plus: traj.x_minus.clone(),
        x_minus: traj.x_plus.clone(),
    }
}

/// Physical and decoherence combinations `x = (x^+ + x^-)/2`, `y = x^+ - x^-`.
pub fn split_physical_decoherence(traj: &CtpTrajectory) -> (Vec<f64>, Vec<f64>) {
    let x = traj
        .x_plus
        .iter()
        .zip(&traj.x_minus)
        .map(|(p, m)| 0.5 * (p + m))
        .collect();
    let y = traj
        .x_plus
        .iter()
        .zip(&traj.x_minus)
        .map(|(p, m)| p - m)
        .collect();
    (x, y)
}

fn derivative(series: &[f64], dt: f64) -> Vec<f64> {
    let n = series.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            d[0] = (series[1] - series[0]) / dt;
            d[1] = d[0];
        }
        return d;
    }
    d[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt);
    for i in 1..n - 1 {
        d[i] = (series[i + 1] - series[i - 1]) / (2.0 * dt);
    }
    d[n - 1] = (3.0 * series[n - 1] - 4.0 * series[n - 2] + series[n - 3]) / (2.0 * dt);
    d
}

fn trapezoid(series: &[f64], dt: f64) -> f64 {
    let n = series.len();
    let interior: f64 = series[1..n - 1].iter().sum();
    dt * (0.5 * series[0] + interior + 0.5 * series[n - 1])
}

/// Doubled action
/// `S = int_0^{t_f} [L_ctp(x^+, xdot^+) - L_ctp^*(x^-, xdot^-)] dt` with
/// `L_ctp = m xdot^2/2 - m w0^2 x^2/2 + j x + i (m eps/2) x^2`; trapezoid
/// quadrature, centered-difference velocities (both second order). The
/// conjugation on the lower branch flips only the `i eps` term, so
/// `Im S = (m eps/2) int (x^+^2 + x^-^2) >= 0`.
pub fn ctp_action(
    system: &SystemSpec,
    traj: &CtpTrajectory,
    epsilon: f64,
    sources: Option<(&[f64], &[f64])>,
) -> Complex64 {
    let dt = traj.grid.dt();
    let m = system.mass;
    let w02 = system.omega0 * system.omega0;
    let vp = derivative(&traj.x_plus, dt);
    let vm = derivative(&traj.x_minus, dt);
    let n = traj.x_plus.len();

    let lagrangian = |x: f64, v: f64| 0.5 * m * v * v - 0.5 * m * w02 * x * x;
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for i in 0..n {
        let mut diff = lagrangian(traj.x_plus[i], vp[i]) - lagrangian(traj.x_minus[i], vm[i]);
        if let Some((jp, jm)) = sources {
            diff += jp[i] * traj.x_plus[i] - jm[i] * traj.x_minus[i];
        }
        re.push(diff);
        im.push(0.5 * m * epsilon
            * (traj.x_plus[i] * traj.x_plus[i] + traj.x_minus[i] * traj.x_minus[i]));
    }
    Complex64::new(trapezoid(&re, dt), trapezoid(&im, dt))
}

/// Action including the bath branch terms
/// `sum_n [m ydot_n^2/2 - m w_n^2 y_n^2/2 + g_n x y_n]` on both contours.
pub fn ctp_action_with_bath(
    system: &SystemSpec,
    bath: &DiscreteBath,
    traj: &CtpTrajectory,
    bath_doublets: &[CtpTrajectory],
    epsilon: f64,
) -> Complex64 {
    assert_eq!(bath_doublets.len(), bath.n_modes());
    let dt = traj.grid.dt();
    let m = system.mass;
    let mut total = ctp_action(system, traj, epsilon, None);
    for (mode, yd) in bath.modes.iter().zip(bath_doublets) {
        let vp = derivative(&yd.x_plus, dt);
        let vm = derivative(&yd.x_minus, dt);
        let w2 = mode.omega * mode.omega;
        let n = yd.x_plus.len();
        let mut re = Vec::with_capacity(n);
        let mut im = Vec::with_capacity(n);
        for i in 0..n {
            let lp = 0.5 * m * vp[i] * vp[i] - 0.5 * m * w2 * yd.x_plus[i] * yd.x_plus[i]
                + mode.g * traj.x_plus[i] * yd.x_plus[i];
            let lm = 0.5 * m * vm[i] * vm[i] - 0.5 * m * w2 * yd.x_minus[i] * yd.x_minus[i]
                + mode.g * traj.x_minus[i] * yd.x_minus[i];
            re.push(lp - lm);
            im.push(0.5 * m * epsilon
                * (yd.x_plus[i] * yd.x_plus[i] + yd.x_minus[i] * yd.x_minus[i]));
        }
        total += Complex64::new(trapezoid(&re, dt), trapezoid(&im, dt));
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// CTP Green function in the three-function parametrization
/// `D = [[D^n + i Dbar, -D^f + i Dbar], [D^f + i Dbar, -D^n + i Dbar]]`.
#[derive(Debug, Clone)]
pub struct CtpBlock {
    pub grid: FrequencyGrid,
    pub d_n: Vec<Complex64>,
    pub d_f: Vec<Complex64>,
    pub d_bar: Vec<Complex64>,
}

/// The four materialized components on a shared grid.
#[derive(Debug, Clone)]
pub struct CtpComponents {
    pub grid: FrequencyGrid,
    pub pp: Vec<Complex64>,
    pub pm: Vec<Complex64>,
    pub mp: Vec<Complex64>,
    pub mm: Vec<Complex64>,
}

impl CtpBlock {
    pub fn components(&self) -> CtpComponents {
        let n = self.grid.n_samples;
        let i = Complex64::i();
        let mut pp = Vec::with_capacity(n);
        let mut pm = Vec::with_capacity(n);
        let mut mp = Vec::with_capacity(n);
        let mut mm = Vec::with_capacity(n);
        for k in 0..n {
            let ib = i * self.d_bar[k];
            pp.push(self.d_n[k] + ib);
            pm.push(-self.d_f[k] + ib);
            mp.push(self.d_f[k] + ib);
            mm.push(-self.d_n[k] + ib);
        }
        CtpComponents { grid: self.grid, pp, pm, mp, mm }
    }

    pub fn component(&self, row: Branch, col: Branch) -> Vec<Complex64> {
        let c = self.components();
        match (row, col) {
            (Branch::Plus, Branch::Plus) => c.pp,
            (Branch::Plus, Branch::Minus) => c.pm,
            (Branch::Minus, Branch::Plus) => c.mp,
            (Branch::Minus, Branch::Minus) => c.mm,
        }
    }

    /// `D^{r/a} = D^n +- D^f`.
    pub fn retarded(&self) -> Vec<Complex64> {
        self.d_n.iter().zip(&self.d_f).map(|(n, f)| n + f).collect()
    }

    pub fn advanced(&self) -> Vec<Complex64> {
        self.d_n.iter().zip(&self.d_f).map(|(n, f)| n - f).collect()
    }

    pub fn consistency_residual(&self) -> f64 {
        check_consistency(&self.components())
    }
}

fn parity_residual(grid: &FrequencyGrid, values: &[Complex64], sign: f64) -> f64 {
    let mut worst: f64 = 0.0;
    // k = 0 is the lone -omega_max node without a positive partner
    for k in 1..grid.n_samples {
        let nk = grid.negation_index(k);
        worst = worst.max((values[nk] - sign * values[k]).norm());
    }
    worst
}

/// Assemble a block from its three functions after checking their
/// time-parity: `d_n`, `d_bar` even and `d_f` odd in frequency.
pub fn assemble_ctp(
    grid: &FrequencyGrid,
    d_n: Vec<Complex64>,
    d_f: Vec<Complex64>,
    d_bar: Vec<Complex64>,
) -> Result<CtpBlock, CtpError> {
    for (which, values, sign) in [
        ("d_n", &d_n, 1.0),
        ("d_f", &d_f, -1.0),
        ("d_bar", &d_bar, 1.0),
    ] {
        let residual = parity_residual(grid, values, sign);
        if residual > 1e-8 {
            return Err(CtpError::ParityViolation { which, residual });
        }
    }
    Ok(CtpBlock { grid: *grid, d_n, d_f, d_bar })
}

/// Max-norm residual of `D^{++} - D^{+-} = D^{-+} - D^{--}` over the grid.
pub fn check_consistency(c: &CtpComponents) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..c.grid.n_samples {
        let lhs = c.pp[k] - c.pm[k];
        let rhs = c.mp[k] - c.mm[k];
        worst = worst.max((lhs - rhs).norm());
    }
    worst
}

/// Trajectory generated by a physical source `j^{+-} = +- j`:
/// `x^s(t) = -sum_{s'} s' int D^{s s'}(t - t') j(t') dt'`. Both branches are
/// returned; consistency makes them equal and drops `Dbar` from the result.
pub fn physical_response(
    block: &CtpBlock,
    source: &SourceProfile,
    grid: &TimeGrid,
) -> Result<(Vec<f64>, Vec<f64>), CtpError> {
    physical_response_components(&block.components(), source, grid)
}

/// Same response from four raw components, gated on the consistency identity.
pub fn physical_response_components(
    c: &CtpComponents,
    source: &SourceProfile,
    grid: &TimeGrid,
) -> Result<(Vec<f64>, Vec<f64>), CtpError> {
    let residual = check_consistency(c);
    if residual > 1e-8 {
        return Err(CtpError::InconsistentBlock(residual));
    }
    let n = c.grid.n_samples;
    let mut kernel_plus = Vec::with_capacity(n);
    let mut kernel_minus = Vec::with_capacity(n);
    for k in 0..n {
        kernel_plus.push(c.pp[k] - c.pm[k]);
        kernel_minus.push(c.mp[k] - c.mm[k]);
    }
    let x_plus = convolve_kernel(&c.grid, &kernel_plus, source, grid)?;
    let x_minus = convolve_kernel(&c.grid, &kernel_minus, source, grid)?;
    Ok((x_plus, x_minus))
}

fn convolve_kernel(
    fgrid: &FrequencyGrid,
    kernel_freq: &[Complex64],
    source: &SourceProfile,
    grid: &TimeGrid,
) -> Result<Vec<f64>, CtpError> {
    match source.as_kicks() {
        Some(kicks) => {
            let kernel_time = freq_to_time(fgrid, kernel_freq);
            Ok((0..grid.n_samples)
                .map(|i| {
                    let t = grid.time(i);
                    -kicks
                        .iter()
                        .map(|k| k.j0 * interp_periodic(fgrid, &kernel_time, t - k.t0).re)
                        .sum::<f64>()
                })
                .collect())
        }
        None => {
            let SourceProfile::Sampled { grid: sgrid, values } = source else {
                unreachable!()
            };
            let dt = fgrid.time_step();
            let j_time: Vec<Complex64> = (0..fgrid.n_samples)
                .map(|m| {
                    let t = m as f64 * dt;
                    if t >= sgrid.t_start && t <= sgrid.t_end {
                        let s = (t - sgrid.t_start) / sgrid.dt();
                        let i = (s.floor() as usize).min(values.len() - 2);
                        let u = s - i as f64;
                        Complex64::new(values[i] * (1.0 - u) + values[i + 1] * u, 0.0)
                    } else {
                        Complex64::ZERO
                    }
                })
                .collect();
            let j_hat = time_to_freq(fgrid, &j_time);
            let prod: Vec<Complex64> = kernel_freq
                .iter()
                .zip(&j_hat)
                .map(|(d, j)| -d * j)
                .collect();
            let x_time = freq_to_time(fgrid, &prod);
            Ok((0..grid.n_samples)
                .map(|i| interp_periodic(fgrid, &x_time, grid.time(i)).re)
                .collect())
        }
    }
}

/// Quantum CTP propagator of the ground-state free oscillator with
/// on-shell structure regularized at width `eps`: the four components are
/// built independently from the two-point function
/// `<x(t) x(0)> = (hbar / 2 m w0) e^{-i w0 t}` and then reduced to the
/// three-function parametrization.
#[derive(Debug, Clone)]
pub struct QuantumCtp {
    pub components: CtpComponents,
    pub block: CtpBlock,
    /// residual between the two symmetric functions recovered from the
    /// diagonal and the off-diagonal (zero when the reduction is exact)
    pub dbar_split_residual: f64,
}

pub fn quantum_ctp_propagator(
    system: &SystemSpec,
    hbar: f64,
    epsilon: f64,
    grid: &FrequencyGrid,
) -> QuantumCtp {
    assert!(hbar > 0.0 && epsilon > 0.0);
    let w0 = system.omega0;
    let c0 = hbar / (2.0 * system.mass * w0);
    let i = Complex64::i();
    let n = grid.n_samples;

    let mut pp = Vec::with_capacity(n);
    let mut pm = Vec::with_capacity(n);
    let mut mp = Vec::with_capacity(n);
    let mut mm = Vec::with_capacity(n);
    for k in 0..n {
        let w = grid.omega(k);
        // time-ordered: e^{-i w0 |t| - eps |t|}
        pp.push(c0 * (1.0 / Complex64::new(w - w0, epsilon) - 1.0 / Complex64::new(w + w0, -epsilon)));
        // lesser: e^{+i w0 t - eps |t|}
        pm.push(-2.0 * i * c0 * epsilon / ((w + w0) * (w + w0) + epsilon * epsilon));
        // greater: e^{-i w0 t - eps |t|}
        mp.push(-2.0 * i * c0 * epsilon / ((w - w0) * (w - w0) + epsilon * epsilon));
        // anti-time-ordered with the lower-branch sign: -conj of pp
        mm.push(c0 * (1.0 / Complex64::new(w + w0, epsilon) - 1.0 / Complex64::new(w - w0, -epsilon)));
    }
    let components = CtpComponents { grid: *grid, pp: pp.clone(), pm: pm.clone(), mp: mp.clone(), mm: mm.clone() };

    let mut d_n = Vec::with_capacity(n);
    let mut d_f = Vec::with_capacity(n);
    let mut d_bar = Vec::with_capacity(n);
    let mut split_residual: f64 = 0.0;
    for k in 0..n {
        d_n.push(0.5 * (pp[k] - mm[k]));
        d_f.push(0.5 * (mp[k] - pm[k]));
        let bar1 = (pp[k] + mm[k]) / (2.0 * i);
        let bar2 = (pm[k] + mp[k]) / (2.0 * i);
        split_residual = split_residual.max((bar1 - bar2).norm());
        d_bar.push(0.5 * (bar1 + bar2));
    }
    QuantumCtp {
        components,
        block: CtpBlock { grid: *grid, d_n, d_f, d_bar },
        dbar_split_residual: split_residual,
    }
}

/// Inverse-propagator blocks in the parametrization
/// `K = [[K^n + i Kbar, K^f - i Kbar], [-K^f - i Kbar, -K^n + i Kbar]]`.
#[derive(Debug, Clone)]
pub struct CtpKernel {
    pub grid: FrequencyGrid,
    pub k_n: Vec<Complex64>,
    pub k_f: Vec<Complex64>,
    pub k_bar: Vec<Complex64>,
    /// residual between the symmetric functions recovered from the diagonal
    /// and off-diagonal entries of the inverse
    pub kbar_split_residual: f64,
}

impl CtpKernel {
    pub fn retarded(&self) -> Vec<Complex64> {
        self.k_n.iter().zip(&self.k_f).map(|(n, f)| n + f).collect()
    }

    pub fn advanced(&self) -> Vec<Complex64> {
        self.k_n.iter().zip(&self.k_f).map(|(n, f)| n - f).collect()
    }
}

/// Frequency-wise 2x2 inversion `K = D^{-1}`.
pub fn invert_block(block: &CtpBlock) -> CtpKernel {
    let c = block.components();
    let n = block.grid.n_samples;
    let i = Complex64::i();
    let mut k_n = Vec::with_capacity(n);
    let mut k_f = Vec::with_capacity(n);
    let mut k_bar = Vec::with_capacity(n);
    let mut split: f64 = 0.0;
    for k in 0..n {
        let det = c.pp[k] * c.mm[k] - c.pm[k] * c.mp[k];
        let m11 = c.mm[k] / det;
        let m12 = -c.pm[k] / det;
        let m21 = -c.mp[k] / det;
        let m22 = c.pp[k] / det;
        k_n.push(0.5 * (m11 - m22));
        k_f.push(0.5 * (m12 - m21));
        let bar1 = (m11 + m22) / (2.0 * i);
        let bar2 = -(m12 + m21) / (2.0 * i);
        split = split.max((bar1 - bar2).norm());
        k_bar.push(0.5 * (bar1 + bar2));
    }
    CtpKernel { grid: block.grid, k_n, k_f, k_bar, kbar_split_residual: split }
}

/// Frequency-wise 2x2 inversion `D = K^{-1}` back to a propagator block.
pub fn invert_kernel(kernel: &CtpKernel) -> CtpBlock {
    let n = kernel.grid.n_samples;
    let i = Complex64::i();
    let mut d_n = Vec::with_capacity(n);
    let mut d_f = Vec::with_capacity(n);
    let mut d_bar = Vec::with_capacity(n);
    for k in 0..n {
        let m11 = kernel.k_n[k] + i * kernel.k_bar[k];
        let m12 = kernel.k_f[k] - i * kernel.k_bar[k];
        let m21 = -kernel.k_f[k] - i * kernel.k_bar[k];
        let m22 = -kernel.k_n[k] + i * kernel.k_bar[k];
        let det = m11 * m22 - m12 * m21;
        let inv11 = m22 / det;
        let inv12 = -m12 / det;
        let inv21 = -m21 / det;
        let inv22 = m11 / det;
        d_n.push(0.5 * (inv11 - inv22));
        d_f.push(0.5 * (inv21 - inv12));
        d_bar.push((inv11 + inv22) / (2.0 * i));
    }
    CtpBlock { grid: kernel.grid, d_n, d_f, d_bar }
}

/// Symmetric time-domain kernel backing the decoherence quadratic form.
#[derive(Debug, Clone)]
pub struct TimeKernel {
    pub grid: TimeGrid,
    pub matrix: DMatrix<f64>,
}

impl TimeKernel {
    /// The infinitesimal classical kernel `m eps delta(t - t')`.
    pub fn epsilon_delta(system: &SystemSpec, grid: &TimeGrid, epsilon: f64) -> TimeKernel {
        let n = grid.n_samples;
        let v = system.mass * epsilon / grid.dt();
        TimeKernel { grid: *grid, matrix: DMatrix::from_diagonal_element(n, n, v) }
    }

    /// Band-limited kernel `g(t-t') = (dw/2pi) sum_k Kbar(w_k) cos(w_k (t-t'))`
    /// sampled on `grid`; positive semidefinite whenever `Kbar >= 0` on the
    /// frequency grid.
    pub fn from_kbar(fgrid: &FrequencyGrid, k_bar: &[Complex64], grid: &TimeGrid) -> TimeKernel {
        let n = grid.n_samples;
        let dt = grid.dt();
        let scale = fgrid.d_omega() / (2.0 * std::f64::consts::PI);
        let mut lags = vec![0.0; n];
        for (d, lag) in lags.iter_mut().enumerate() {
            let tau = d as f64 * dt;
            let mut acc = 0.0;
            for (k, kb) in k_bar.iter().enumerate() {
                acc += kb.re * (fgrid.omega(k) * tau).cos();
            }
            *lag = scale * acc;
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| lags[i.abs_diff(j)]);
        TimeKernel { grid: *grid, matrix }
    }
}

/// Suppression factor `exp(-y Kbar y / 2 hbar)` of a decoherence trajectory.
/// The kernel must be symmetric positive semidefinite.
pub fn decoherence_weight(kernel: &TimeKernel, y: &[f64], hbar: f64) -> Result<f64, CtpError> {
    assert!(hbar > 0.0);
    assert_eq!(y.len(), kernel.grid.n_samples);
    let eig = kernel.matrix.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 * max_eig.max(1.0) {
        return Err(CtpError::NotPsd(min_eig));
    }
    let dt = kernel.grid.dt();
    let mut q = 0.0;
    for i in 0..y.len() {
        for j in 0..y.len() {
            q += y[i] * kernel.matrix[(i, j)] * y[j];
        }
    }
    q *= dt * dt;
    Ok((-q.max(0.0) / (2.0 * hbar)).exp())
}
