//! Ground-truth time-domain solver for the coupled system-bath equations of
//! motion under the environment initial conditions `y_n(0) = ydot_n(0) = 0`,
//! plus the exact normal-mode construction it is checked against.
//!
//! The stepper is velocity Verlet: second order, symplectic, and exactly
//! time-reversible up to roundoff, which the energy-drift and velocity-flip
//! contracts rely on.

use crate::grid::TimeGrid;
use crate::model::{DiscreteBath, Kick, ModelError, SourceProfile, SystemSpec};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("stiffness matrix is not positive definite (eigenvalue {0})")]
    NotPositiveDefinite(f64),
    #[error("dt * max normal frequency = {0:.3e} exceeds the 0.1 accuracy guard")]
    StepTooLarge(f64),
    #[error("sampled sources need evolve_full, not the normal-mode response")]
    UnsupportedSource,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Trajectory of the system coordinate, with bath coordinates when requested.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub x: Vec<f64>,
    pub bath: Option<Vec<Vec<f64>>>,
}

/// Eigenfrequencies and orthogonal transform of the quadratic form; column `j`
/// of `transform` maps normal coordinate `j` to the physical coordinates.
#[derive(Debug, Clone)]
pub struct NormalModes {
    pub frequencies: Vec<f64>,
    pub transform: DMatrix<f64>,
}

impl NormalModes {
    /// Weight of normal mode `j` in physical coordinate `k`.
    pub fn weight(&self, k: usize, j: usize) -> f64 {
        self.transform[(k, j)]
    }

    /// Synthetic mode set whose observed row (coordinate 0) weights every mode
    /// equally at `1/sqrt(N)`: a Householder reflection mapping `e_0` onto the
    /// uniform unit vector. Frequencies are sorted ascending.
    pub fn with_uniform_observed_row(frequencies: &[f64]) -> NormalModes {
        let n = frequencies.len();
        assert!(n >= 1);
        let mut freqs = frequencies.to_vec();
        freqs.sort_by(f64::total_cmp);
        let u = 1.0 / (n as f64).sqrt();
        let mut v = DVector::from_element(n, -u);
        v[0] += 1.0;
        let norm2 = v.dot(&v);
        let transform = if norm2 < 1e-30 {
            DMatrix::identity(n, n)
        } else {
            DMatrix::identity(n, n) - (2.0 / norm2) * &v * v.transpose()
        };
        NormalModes { frequencies: freqs, transform }
    }

    /// Max-norm departure of `a^T a` from the identity.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.transform.nrows();
        let prod = self.transform.transpose() * &self.transform;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - expect).abs());
            }
        }
        worst
    }

    /// Rebuild the stiffness matrix `a diag(w^2) a^T`.
    pub fn stiffness(&self) -> DMatrix<f64> {
        let n = self.frequencies.len();
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            self.frequencies.iter().map(|w| w * w),
        ));
        &self.transform * d * self.transform.transpose()
    }
}

/// Coupled linear system `qddot = -K q + f(t)/m e_0` with the per-mass
/// stiffness `K`; coordinate 0 is the observed one.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub mass: f64,
    pub stiffness: DMatrix<f64>,
}

impl CoupledSystem {
    pub fn from_bath(system: &SystemSpec, bath: &DiscreteBath) -> Self {
        let n = bath.n_modes() + 1;
        let mut k = DMatrix::zeros(n, n);
        k[(0, 0)] = system.omega0 * system.omega0;
        for (i, mode) in bath.modes.iter().enumerate() {
            k[(i + 1, i + 1)] = mode.omega * mode.omega;
            k[(0, i + 1)] = -mode.g / system.mass;
            k[(i + 1, 0)] = -mode.g / system.mass;
        }
        Self { mass: system.mass, stiffness: k }
    }

    pub fn from_modes(mass: f64, modes: &NormalModes) -> Self {
        Self { mass, stiffness: modes.stiffness() }
    }

    pub fn dim(&self) -> usize {
        self.stiffness.nrows()
    }

    fn accel(&self, q: &DVector<f64>, drive: f64, out: &mut DVector<f64>) {
        out.gemv(-1.0, &self.stiffness, q, 0.0);
        out[0] += drive / self.mass;
    }

    /// Total energy of a state with no source active.
    pub fn energy(&self, state: &State) -> f64 {
        let q = DVector::from_column_slice(&state.positions);
        let v = DVector::from_column_slice(&state.velocities);
        let kinetic = 0.5 * self.mass * v.dot(&v);
        let potential = 0.5 * self.mass * (&self.stiffness * &q).dot(&q);
        kinetic + potential
    }

    /// Velocity-Verlet integration from `state` across `grid`, with a smooth
    /// drive on coordinate 0 and impulses applied after the position update of
    /// the step containing them. Returns the per-sample positions of
    /// coordinate 0, optionally all coordinates, and the final state.
    pub fn evolve<F>(
        &self,
        state: State,
        mut drive: F,
        kicks: &[Kick],
        grid: &TimeGrid,
        store_all: bool,
    ) -> (Vec<f64>, Option<Vec<Vec<f64>>>, State)
    where
        F: FnMut(f64) -> f64,
    {
        let n = self.dim();
        let dt = grid.dt();
        let mut q = DVector::from_column_slice(&state.positions);
        let mut v = DVector::from_column_slice(&state.velocities);
        let mut a = DVector::zeros(n);
        let mut a_new = DVector::zeros(n);

        let mut x = Vec::with_capacity(grid.n_samples);
        let mut all: Option<Vec<Vec<f64>>> = if store_all {
            Some(vec![Vec::with_capacity(grid.n_samples); n - 1])
        } else {
            None
        };
        let record = |q: &DVector<f64>, all: &mut Option<Vec<Vec<f64>>>, x: &mut Vec<f64>| {
            x.push(q[0]);
            if let Some(cols) = all {
                for (i, col) in cols.iter_mut().enumerate() {
                    col.push(q[i + 1]);
                }
            }
        };

        // kicks at or before the first sample fold into the initial velocity
        let t0 = grid.t_start;
        let eps_t = 1e-12 * (1.0 + t0.abs() + grid.t_end.abs());
        let mut pending: Vec<&Kick> = kicks.iter().collect();
        pending.retain(|k| {
            if k.t0 <= t0 + eps_t {
                v[0] += k.j0 / self.mass;
                false
            } else {
                true
            }
        });

        record(&q, &mut all, &mut x);
        self.accel(&q, drive(t0), &mut a);
        for step in 1..grid.n_samples {
            let t_next = grid.time(step);
            // x(t+dt) = x + v dt + a dt^2/2
            q.axpy(dt, &v, 1.0);
            q.axpy(0.5 * dt * dt, &a, 1.0);
            // momentum jumps inside (t_prev, t_next] land after the position update
            pending.retain(|k| {
                if k.t0 <= t_next + eps_t {
                    v[0] += k.j0 / self.mass;
                    false
                } else {
                    true
                }
            });
            self.accel(&q, drive(t_next), &mut a_new);
            // v(t+dt) = v + (a_old + a_new) dt/2
            v.axpy(0.5 * dt, &a, 1.0);
            v.axpy(0.5 * dt, &a_new, 1.0);
            std::mem::swap(&mut a, &mut a_new);
            record(&q, &mut all, &mut x);
        }

        let final_state = State {
            positions: q.iter().copied().collect(),
            velocities: v.iter().copied().collect(),
        };
        (x, all, final_state)
    }
}

/// Full phase-space state (positions then velocities, coordinate 0 first).
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl State {
    pub fn at_rest(dim: usize) -> Self {
        Self { positions: vec![0.0; dim], velocities: vec![0.0; dim] }
    }

    pub fn flip_velocities(&self) -> Self {
        Self {
            positions: self.positions.clone(),
            velocities: self.velocities.iter().map(|v| -v).collect(),
        }
    }

    pub fn max_distance(&self, other: &State) -> f64 {
        self.positions
            .iter()
            .zip(&other.positions)
            .chain(self.velocities.iter().zip(&other.velocities))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Diagonalize the quadratic form of the coupled model into normal modes.
pub fn diagonalize(system: &SystemSpec, bath: &DiscreteBath) -> Result<NormalModes, OracleError> {
    let cs = CoupledSystem::from_bath(system, bath);
    diagonalize_stiffness(&cs.stiffness)
}

pub fn diagonalize_stiffness(stiffness: &DMatrix<f64>) -> Result<NormalModes, OracleError> {
    let eig = stiffness.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    if eig.eigenvalues[order[0]] <= 0.0 {
        return Err(OracleError::NotPositiveDefinite(eig.eigenvalues[order[0]]));
    }
    let n = order.len();
    let mut transform = DMatrix::zeros(n, n);
    let mut frequencies = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        frequencies.push(eig.eigenvalues[src].sqrt());
        transform.set_column(col, &eig.eigenvectors.column(src));
    }
    Ok(NormalModes { frequencies, transform })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveOptions {
    /// Override `x(0), xdot(0)`; bath coordinates always start at rest.
    pub initial: Option<(f64, f64)>,
    pub store_bath: bool,
}

/// Integrate the full coupled Newton equations across `grid` (which must
/// start at the initial time of the environment conditions).
pub fn evolve_full(
    system: &SystemSpec,
    bath: &DiscreteBath,
    source: &SourceProfile,
    grid: &TimeGrid,
    opts: EvolveOptions,
) -> Result<Trajectory, OracleError> {
    source.validate(Some(grid))?;
    let cs = CoupledSystem::from_bath(system, bath);
    let modes = diagonalize_stiffness(&cs.stiffness)?;
    let w_max = modes.frequencies.last().copied().unwrap_or(0.0);
    if grid.dt() * w_max > 0.1 {
        return Err(OracleError::StepTooLarge(grid.dt() * w_max));
    }

    let mut state = State::at_rest(cs.dim());
    if let Some((x0, v0)) = opts.initial {
        state.positions[0] = x0;
        state.velocities[0] = v0;
    }

    let kicks = source.as_kicks().unwrap_or_default();
    let sampled = match source {
        SourceProfile::Sampled { grid: sgrid, values } => Some((*sgrid, values.clone())),
        _ => None,
    };
    let drive = move |t: f64| -> f64 {
        match &sampled {
            Some((sgrid, values)) => sample_linear(sgrid, values, t),
            None => 0.0,
        }
    };

    let (x, bath_series, _) = cs.evolve(state, drive, &kicks, grid, opts.store_bath);
    Ok(Trajectory { grid: *grid, x, bath: bath_series })
}

fn sample_linear(grid: &TimeGrid, values: &[f64], t: f64) -> f64 {
    if t < grid.t_start || t > grid.t_end {
        return 0.0;
    }
    let s = (t - grid.t_start) / grid.dt();
    let i = (s.floor() as usize).min(values.len() - 2);
    let u = s - i as f64;
    values[i] * (1.0 - u) + values[i + 1] * u
}

/// Exact superposition response of physical coordinate 0 to kick sources:
/// `x(t) = sum_j a_{0j}^2 j0 sin(w_j (t - t0)) / (m w_j)` for `t > t0`.
pub fn respond_via_modes(
    modes: &NormalModes,
    mass: f64,
    source: &SourceProfile,
    grid: &TimeGrid,
) -> Result<Trajectory, OracleError> {
    let kicks = source.as_kicks().ok_or(OracleError::UnsupportedSource)?;
    let mut x = vec![0.0; grid.n_samples];
    for (i, xi) in x.iter_mut().enumerate() {
        let t = grid.time(i);
        let mut acc = 0.0;
        for kick in &kicks {
            if t <= kick.t0 {
                continue;
            }
            for (j, &wj) in modes.frequencies.iter().enumerate() {
                let a = modes.weight(0, j);
                acc += a * a * kick.j0 * (wj * (t - kick.t0)).sin() / (mass * wj);
            }
        }
        *xi = acc;
    }
    Ok(Trajectory { grid: *grid, x, bath: None })
}
