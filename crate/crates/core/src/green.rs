//! Frequency-domain effective dynamics of the observed oscillator after the
//! bath is eliminated: retarded self-energies, the retarded/advanced
//! propagator `D(omega) = 1/(m[(omega + i eps)^2 - omega0^2] - Sigma(omega))`,
//! its near/far (time-even/odd) split, pole analysis, and the convolution
//! response to external sources.

use crate::grid::{FrequencyGrid, TimeGrid};
use crate::model::{DiscreteBath, OhmicBath, SourceProfile, SystemSpec};
use crate::oracle::Trajectory;
use crate::series::ComplexSeries;
use crate::transform::{default_shift, freq_to_time, interp_periodic, shifted_retarded_kernel, time_to_freq};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GreenError {
    #[error("evaluation requested on a singularity of the self-energy or propagator")]
    PoleOnGrid,
    #[error("quadrature failed to reach the requested accuracy (estimate {0:.3e})")]
    QuadratureFailure(f64),
    #[error("time grid incompatible with the frequency grid: {0}")]
    GridMismatch(String),
    #[error("root refinement lost a zero counted by the boundary winding")]
    RootCountMismatch,
    #[error("winding walk could not resolve the boundary phase (zero or pole too close)")]
    BoundaryIndeterminate,
}

/// Which environment boundary condition the `i eps` prescription encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeArrow {
    Forward,
    Backward,
}

/// Retarded self-energy model entering the inverse propagator; evaluated at
/// the already-shifted argument `zeta = omega + i eps`.
#[derive(Debug, Clone)]
pub enum SelfEnergyModel {
    None,
    Discrete { modes: Vec<(f64, f64)>, mass: f64 },
    Ohmic { g: f64, omega_d: f64, mass: f64 },
}

impl SelfEnergyModel {
    pub fn from_discrete(bath: &DiscreteBath, mass: f64) -> Self {
        SelfEnergyModel::Discrete {
            modes: bath.modes.iter().map(|m| (m.omega, m.g)).collect(),
            mass,
        }
    }

    pub fn from_ohmic(bath: &OhmicBath, mass: f64) -> Self {
        SelfEnergyModel::Ohmic { g: bath.g, omega_d: bath.omega_d, mass }
    }

    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        match self {
            SelfEnergyModel::None => Complex64::ZERO,
            SelfEnergyModel::Discrete { modes, mass } => {
                let z2 = zeta * zeta;
                modes
                    .iter()
                    .map(|&(w, g)| g * g / mass / (z2 - w * w))
                    .sum()
            }
            SelfEnergyModel::Ohmic { g, omega_d, mass } => {
                -Complex64::i() * PI * g * g
                    / (mass * omega_d * (zeta + Complex64::i() * omega_d))
            }
        }
    }

    pub fn eval_deriv(&self, zeta: Complex64) -> Complex64 {
        match self {
            SelfEnergyModel::None => Complex64::ZERO,
            SelfEnergyModel::Discrete { modes, mass } => {
                let z2 = zeta * zeta;
                modes
                    .iter()
                    .map(|&(w, g)| {
                        let d = z2 - w * w;
                        -2.0 * zeta * g * g / mass / (d * d)
                    })
                    .sum()
            }
            SelfEnergyModel::Ohmic { g, omega_d, mass } => {
                let d = zeta + Complex64::i() * omega_d;
                Complex64::i() * PI * g * g / (mass * omega_d * d * d)
            }
        }
    }

    /// Singularities of the self-energy in the `zeta` plane.
    pub fn singularities(&self) -> Vec<Complex64> {
        match self {
            SelfEnergyModel::None => vec![],
            SelfEnergyModel::Discrete { modes, .. } => modes
                .iter()
                .flat_map(|&(w, _)| [Complex64::new(w, 0.0), Complex64::new(-w, 0.0)])
                .collect(),
            SelfEnergyModel::Ohmic { omega_d, .. } => vec![Complex64::new(0.0, -omega_d)],
        }
    }

    fn near_singularity(&self, zeta: Complex64) -> bool {
        self.singularities()
            .iter()
            .any(|s| (zeta - s).norm() < 1e-12 * (1.0 + s.norm()))
    }
}

/// `Sigma^r` of a discrete bath at `omega + i eps`:
/// `sum_n (g_n^2/m) / ((omega + i eps)^2 - omega_n^2)`.
pub fn self_energy_discrete(
    bath: &DiscreteBath,
    mass: f64,
    omega: Complex64,
    epsilon: f64,
) -> Result<Complex64, GreenError> {
    let model = SelfEnergyModel::from_discrete(bath, mass);
    let zeta = omega + Complex64::i() * epsilon;
    if model.near_singularity(zeta) {
        return Err(GreenError::PoleOnGrid);
    }
    Ok(model.eval(zeta))
}

/// Closed form of the Ohmic self-energy, `-i pi g^2 / (m W_D (omega + i W_D))`:
/// the contour integral of the spectral density against the resolvent kernel,
/// carrying the same `1/m` prefactor the quadrature oracle integrates.
pub fn self_energy_ohmic(
    bath: &OhmicBath,
    mass: f64,
    omega: Complex64,
) -> Result<Complex64, GreenError> {
    let model = SelfEnergyModel::from_ohmic(bath, mass);
    if model.near_singularity(omega) {
        return Err(GreenError::PoleOnGrid);
    }
    Ok(model.eval(omega))
}

/// Independent oracle for the Ohmic closed form: adaptive quadrature of
/// `int_0^inf dW rho(W) 2W / ((omega + i eps)^2 - W^2)` with the `i eps`
/// prescription. Returns the value and an absolute error estimate.
pub fn self_energy_ohmic_quadrature(
    bath: &OhmicBath,
    mass: f64,
    omega: f64,
    epsilon: f64,
) -> Result<(Complex64, f64), GreenError> {
    assert!(epsilon > 0.0, "the quadrature oracle needs eps > 0");
    if bath.g == 0.0 {
        return Ok((Complex64::ZERO, 0.0));
    }
    // the integrand depends on zeta^2 only; reduce to omega >= 0
    if omega < 0.0 {
        let (v, e) = self_energy_ohmic_quadrature(bath, mass, -omega, epsilon)?;
        return Ok((v.conj(), e));
    }
    let z = Complex64::new(omega, epsilon);
    let pref = 2.0 * bath.g * bath.g / (mass * bath.omega_d);
    let h = move |w: f64| pref * w * w / (bath.omega_d * bath.omega_d + w * w);
    let phi = move |w: f64| h(w) / (z + w);

    let r0 = 10.0 * omega.abs().max(bath.omega_d).max(1.0);
    let tol = 4e-9;

    // [0, r0]: subtract the pole, integrate the remainder, add the log term
    let phi_at = phi(omega);
    let near = move |w: f64| {
        let num = phi(w) - phi_at;
        if (w - omega).abs() < 1e-14 * (1.0 + omega.abs()) {
            // removable point: slope of phi
            let d = 1e-7 * (1.0 + omega.abs());
            return (phi(omega + d) - phi(omega - d)) / (2.0 * d) * (-1.0);
        }
        num / (z - w)
    };
    let (near_val, near_err) = adaptive_simpson(&near, 0.0, r0, tol)?;
    let log_term = phi_at * ((z.ln()) - ((z - r0).ln()));

    // [r0, inf): substitute W = r0/u
    let h_inf = pref;
    let tail = move |u: f64| {
        if u < 1e-12 {
            return Complex64::new(-h_inf / r0, 0.0);
        }
        let w = r0 / u;
        h(w) * r0 / (z * z * u * u - r0 * r0)
    };
    let (tail_val, tail_err) = adaptive_simpson(&tail, 0.0, 1.0, tol)?;

    let err = near_err + tail_err;
    if err > 1e-8 {
        return Err(GreenError::QuadratureFailure(err));
    }
    Ok((near_val + log_term + tail_val, err))
}

/// Adaptive Simpson quadrature of a complex integrand, returning the value and
/// an absolute error estimate.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<(Complex64, f64), GreenError>
where
    F: Fn(f64) -> Complex64,
{
    fn simpson(fa: Complex64, fm: Complex64, fb: Complex64, h: f64) -> Complex64 {
        (fa + 4.0 * fm + fb) * (h / 6.0)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
        err_acc: &mut f64,
    ) -> Result<Complex64, GreenError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.norm() <= 15.0 * tol || (b - a) < 1e-14 * (1.0 + a.abs() + b.abs()) {
            *err_acc += delta.norm() / 15.0;
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(GreenError::QuadratureFailure(delta.norm()));
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err_acc)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err_acc)?;
        Ok(l + r)
    }

    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    let mut err = 0.0;
    let val = recurse(f, a, b, fa, fm, fb, whole, tol, 48, &mut err)?;
    Ok((val, err))
}

/// Pole of the propagator with its residue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub position: Complex64,
    pub residue: Complex64,
}

/// Sampled retarded (or advanced) propagator together with everything needed
/// to re-evaluate it off the real axis.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    pub d_r: ComplexSeries,
    pub epsilon: f64,
    pub time_arrow: TimeArrow,
    pub poles: Option<Vec<Pole>>,
    pub system: SystemSpec,
    pub sigma: SelfEnergyModel,
}

impl GreenFunction {
    pub fn grid(&self) -> &FrequencyGrid {
        self.d_r.frequency_grid().expect("propagator is sampled in frequency")
    }

    /// Forward-arrow propagator at a complex argument.
    pub fn eval_forward(&self, z: Complex64) -> Complex64 {
        let zeta = z + Complex64::i() * self.epsilon;
        let m = self.system.mass;
        let w0 = self.system.omega0;
        1.0 / (m * (zeta * zeta - w0 * w0) - self.sigma.eval(zeta))
    }

    /// Locate the propagator poles inside `search` and store them on the
    /// function, sorted by real part.
    pub fn locate_poles(&mut self, search: SearchBox) -> Result<&[Pole], GreenError> {
        let mut poles = find_poles(&self.system, &self.sigma, self.epsilon, search)?;
        poles.sort_by(|a, b| a.position.re.total_cmp(&b.position.re));
        self.poles = Some(poles);
        Ok(self.poles.as_deref().unwrap())
    }
}

/// Sample the retarded propagator on `grid`; the Backward arrow flips the sign
/// of `eps`, which on the real axis is the complex conjugate (advanced)
/// propagator.
pub fn retarded_propagator(
    system: &SystemSpec,
    sigma: &SelfEnergyModel,
    grid: &FrequencyGrid,
    epsilon: f64,
    time_arrow: TimeArrow,
) -> Result<GreenFunction, GreenError> {
    assert!(epsilon > 0.0, "eps must be positive; the arrow chooses its sign");
    let m = system.mass;
    let w0 = system.omega0;
    let mut values = Vec::with_capacity(grid.n_samples);
    for k in 0..grid.n_samples {
        let zeta = Complex64::new(grid.omega(k), epsilon);
        let denom = m * (zeta * zeta - w0 * w0) - sigma.eval(zeta);
        if denom.norm() < 1e-14 {
            return Err(GreenError::PoleOnGrid);
        }
        let v = 1.0 / denom;
        values.push(match time_arrow {
            TimeArrow::Forward => v,
            TimeArrow::Backward => v.conj(),
        });
    }
    Ok(GreenFunction {
        d_r: ComplexSeries::over_frequency(*grid, values),
        epsilon,
        time_arrow,
        poles: None,
        system: *system,
        sigma: sigma.clone(),
    })
}

/// Split into the near (time-even, `Re D`) and far (time-odd, `i Im D`)
/// parts; the two recombine to the input exactly.
pub fn near_far_split(gf: &GreenFunction) -> (ComplexSeries, ComplexSeries) {
    let grid = *gf.grid();
    let d_n: Vec<Complex64> = gf.d_r.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
    let d_f: Vec<Complex64> = gf.d_r.values.iter().map(|v| Complex64::new(0.0, v.im)).collect();
    (
        ComplexSeries::over_frequency(grid, d_n),
        ComplexSeries::over_frequency(grid, d_f),
    )
}

/// Rectangle in the complex frequency plane.
#[derive(Debug, Clone, Copy)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchBox {
    fn contains(&self, z: Complex64, pad: f64) -> bool {
        z.re >= self.re_min - pad
            && z.re <= self.re_max + pad
            && z.im >= self.im_min - pad
            && z.im <= self.im_max + pad
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }
}

/// Locate all zeros of the inverse propagator inside `search` by
/// argument-principle counting on box boundaries, subdividing until each box
/// isolates a single zero away from the known self-energy singularities, then
/// refining with Newton to 1e-10.
pub fn find_poles(
    system: &SystemSpec,
    sigma: &SelfEnergyModel,
    epsilon: f64,
    search: SearchBox,
) -> Result<Vec<Pole>, GreenError> {
    let m = system.mass;
    let w0 = system.omega0;
    let f = |z: Complex64| {
        let zeta = z + Complex64::i() * epsilon;
        m * (zeta * zeta - w0 * w0) - sigma.eval(zeta)
    };
    let fp = |z: Complex64| {
        let zeta = z + Complex64::i() * epsilon;
        2.0 * m * zeta - sigma.eval_deriv(zeta)
    };
    // singularities of f in the z plane
    let sing: Vec<Complex64> = sigma
        .singularities()
        .iter()
        .map(|s| s - Complex64::i() * epsilon)
        .collect();

    let mut zeros = Vec::new();
    collect_zeros(&f, &fp, &sing, search, 0, &mut zeros)?;

    // a zero sitting on a subdivision line would be double-counted
    let scale = 1.0 + search.diameter();
    for i in 0..zeros.len() {
        for j in i + 1..zeros.len() {
            if (zeros[i] - zeros[j]).norm() < 1e-9 * scale {
                return Err(GreenError::RootCountMismatch);
            }
        }
    }

    Ok(zeros
        .into_iter()
        .map(|z| Pole { position: z, residue: 1.0 / fp(z) })
        .collect())
}

fn collect_zeros<F, G>(
    f: &F,
    fp: &G,
    sing: &[Complex64],
    bx: SearchBox,
    depth: u32,
    out: &mut Vec<Complex64>,
) -> Result<(), GreenError>
where
    F: Fn(Complex64) -> Complex64,
    G: Fn(Complex64) -> Complex64,
{
    const MAX_DEPTH: u32 = 44;
    let w = winding_number(f, &bx)?;
    let poles_inside = sing
        .iter()
        .filter(|s| bx.contains(**s, 0.0))
        .count() as i64;
    let zeros_inside = w + poles_inside;
    if zeros_inside < 0 {
        return Err(GreenError::RootCountMismatch);
    }
    if zeros_inside == 0 {
        return Ok(());
    }
    if zeros_inside == 1 && poles_inside == 0 {
        // Newton may still wander across a nearby self-energy pole; in that
        // case keep subdividing until the box pins the zero
        if let Ok(z) = newton(f, fp, bx.center(), &bx) {
            out.push(z);
            return Ok(());
        }
    }
    if depth >= MAX_DEPTH {
        return Err(GreenError::RootCountMismatch);
    }
    // quadrisect slightly off-center so zeros do not land on the cut lines
    for frac in [0.5137, 0.4719, 0.5521] {
        let sx = bx.re_min + frac * (bx.re_max - bx.re_min);
        let sy = bx.im_min + frac * (bx.im_max - bx.im_min);
        let quads = [
            SearchBox { re_min: bx.re_min, re_max: sx, im_min: bx.im_min, im_max: sy },
            SearchBox { re_min: sx, re_max: bx.re_max, im_min: bx.im_min, im_max: sy },
            SearchBox { re_min: bx.re_min, re_max: sx, im_min: sy, im_max: bx.im_max },
            SearchBox { re_min: sx, re_max: bx.re_max, im_min: sy, im_max: bx.im_max },
        ];
        let mut sub = Vec::new();
        let mut ok = true;
        for q in quads {
            match collect_zeros(f, fp, sing, q, depth + 1, &mut sub) {
                Ok(()) => {}
                Err(GreenError::BoundaryIndeterminate) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            if sub.len() as i64 != zeros_inside {
                return Err(GreenError::RootCountMismatch);
            }
            out.extend(sub);
            return Ok(());
        }
    }
    Err(GreenError::BoundaryIndeterminate)
}

/// Winding number of `f` around the box boundary via adaptive phase tracking.
fn winding_number<F>(f: &F, bx: &SearchBox) -> Result<i64, GreenError>
where
    F: Fn(Complex64) -> Complex64,
{
    let corners = [
        Complex64::new(bx.re_min, bx.im_min),
        Complex64::new(bx.re_max, bx.im_min),
        Complex64::new(bx.re_max, bx.im_max),
        Complex64::new(bx.re_min, bx.im_max),
    ];
    let mut total = 0.0;
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        let fa = f(a);
        let fb = f(b);
        if fa.norm() == 0.0 || fb.norm() == 0.0 {
            return Err(GreenError::BoundaryIndeterminate);
        }
        total += edge_phase(f, a, b, fa, fb, 0)?;
    }
    let w = total / (2.0 * PI);
    let rounded = w.round();
    if (w - rounded).abs() > 1e-3 {
        return Err(GreenError::BoundaryIndeterminate);
    }
    Ok(rounded as i64)
}

fn edge_phase<F>(
    f: &F,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: u32,
) -> Result<f64, GreenError>
where
    F: Fn(Complex64) -> Complex64,
{
    let dphi = (fb / fa).arg();
    if dphi.abs() < 0.5 * PI {
        if depth >= 6 {
            return Ok(dphi);
        }
        // one halving of confirmation so a full turn cannot hide in one step
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.norm() == 0.0 {
            return Err(GreenError::BoundaryIndeterminate);
        }
        let d1 = (fm / fa).arg();
        let d2 = (fb / fm).arg();
        if (d1 + d2 - dphi).abs() < 1e-9 && d1.abs() < 0.5 * PI && d2.abs() < 0.5 * PI {
            return Ok(dphi);
        }
        let l = edge_phase(f, a, m, fa, fm, depth + 1)?;
        let r = edge_phase(f, m, b, fm, fb, depth + 1)?;
        return Ok(l + r);
    }
    if depth > 52 {
        return Err(GreenError::BoundaryIndeterminate);
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    if fm.norm() == 0.0 {
        return Err(GreenError::BoundaryIndeterminate);
    }
    let l = edge_phase(f, a, m, fa, fm, depth + 1)?;
    let r = edge_phase(f, m, b, fm, fb, depth + 1)?;
    Ok(l + r)
}

fn newton<F, G>(
    f: &F,
    fp: &G,
    start: Complex64,
    bx: &SearchBox,
) -> Result<Complex64, GreenError>
where
    F: Fn(Complex64) -> Complex64,
    G: Fn(Complex64) -> Complex64,
{
    let pad = bx.diameter();
    let max_step = 0.3 * bx.diameter();
    let mut z = start;
    for _ in 0..300 {
        let d = fp(z);
        if d.norm() == 0.0 {
            return Err(GreenError::RootCountMismatch);
        }
        let mut step = f(z) / d;
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        z -= step;
        if !bx.contains(z, pad) {
            return Err(GreenError::RootCountMismatch);
        }
        if step.norm() < 1e-13 * (1.0 + z.norm()) {
            if !bx.contains(z, 1e-9 * (1.0 + z.norm())) {
                return Err(GreenError::RootCountMismatch);
            }
            return Ok(z);
        }
    }
    Err(GreenError::RootCountMismatch)
}

/// Closed-form time kernel of the free reference propagator
/// `1/(m[(omega + i eps)^2 - omega0^2])`.
pub fn free_retarded_kernel(system: &SystemSpec, epsilon: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    -(-epsilon * t).exp() * (system.omega0 * t).sin() / (system.mass * system.omega0)
}

/// Reconstructed time kernel of a propagator: the free reference in closed
/// form plus a spectrally-accurate transform of the (fast-decaying)
/// difference, evaluated on a lifted contour.
pub struct SampledKernel {
    grid: FrequencyGrid,
    system: SystemSpec,
    epsilon: f64,
    correction: Vec<Complex64>,
}

impl SampledKernel {
    pub fn build(gf: &GreenFunction) -> SampledKernel {
        let grid = *gf.grid();
        let alpha = default_shift(&grid);
        let system = gf.system;
        let eps = gf.epsilon;
        let correction = shifted_retarded_kernel(&grid, alpha, |z| {
            let zeta = z + Complex64::i() * eps;
            let free = system.mass * (zeta * zeta - system.omega0 * system.omega0);
            gf.eval_forward(z) - 1.0 / free
        });
        SampledKernel { grid, system, epsilon: eps, correction }
    }

    /// Forward (retarded) kernel value at time `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let reference = free_retarded_kernel(&self.system, self.epsilon, t);
        reference + interp_periodic(&self.grid, &self.correction, t).re
    }
}

/// Response of the system coordinate, `x(t) = -int dt' D(t - t') j(t')`.
///
/// Kicks are evaluated directly against the reconstructed kernel; sampled
/// sources go through a fast-transform convolution on the lifted contour. A
/// Backward-arrow propagator responds as the time mirror of the Forward one.
pub fn response(
    gf: &GreenFunction,
    source: &SourceProfile,
    grid: &TimeGrid,
) -> Result<Trajectory, GreenError> {
    let fgrid = gf.grid();
    if grid.dt() < fgrid.time_step() * (1.0 - 1e-9) {
        return Err(GreenError::GridMismatch(format!(
            "requested dt {:.3e} is below the frequency grid's Nyquist step {:.3e}",
            grid.dt(),
            fgrid.time_step()
        )));
    }
    let reach = fgrid.period() / 4.0;

    match gf.time_arrow {
        TimeArrow::Forward => {}
        TimeArrow::Backward => {
            // mirror the source about the grid midpoint, respond forward,
            // mirror the output back
            let c = 0.5 * (grid.t_start + grid.t_end);
            let forward = GreenFunction { time_arrow: TimeArrow::Forward, ..gf.clone() };
            let mirrored = mirror_source(source, c);
            let resp = response(&forward, &mirrored, grid)?;
            let x: Vec<f64> = (0..grid.n_samples)
                .map(|i| {
                    let t = 2.0 * c - grid.time(i);
                    let s = (t - grid.t_start) / grid.dt();
                    let idx = s.round() as isize;
                    let idx = idx.clamp(0, grid.n_samples as isize - 1) as usize;
                    resp.x[idx]
                })
                .collect();
            return Ok(Trajectory { grid: *grid, x, bath: None });
        }
    }

    match source {
        SourceProfile::DeltaKick { .. } | SourceProfile::Kicks { .. } => {
            let kicks = source.as_kicks().expect("kick source");
            for k in &kicks {
                let lo = (grid.t_start - k.t0).abs();
                let hi = (grid.t_end - k.t0).abs();
                if lo.max(hi) > reach {
                    return Err(GreenError::GridMismatch(format!(
                        "kernel argument {:.3e} exceeds the reliable quarter-period {:.3e}",
                        lo.max(hi),
                        reach
                    )));
                }
            }
            let kernel = SampledKernel::build(gf);
            let x: Vec<f64> = (0..grid.n_samples)
                .map(|i| {
                    let t = grid.time(i);
                    -kicks.iter().map(|k| k.j0 * kernel.eval(t - k.t0)).sum::<f64>()
                })
                .collect();
            Ok(Trajectory { grid: *grid, x, bath: None })
        }
        SourceProfile::Sampled { grid: sgrid, values } => {
            if sgrid.t_start < -1e-12 || sgrid.t_end > reach || grid.t_end > reach {
                return Err(GreenError::GridMismatch(
                    "sampled source or output grid outside the reliable quarter-period".into(),
                ));
            }
            let alpha = default_shift(fgrid);
            let n = fgrid.n_samples;
            let dt_f = fgrid.time_step();
            let mut j_alpha = vec![Complex64::ZERO; n];
            for (m, v) in j_alpha.iter_mut().enumerate().take(n / 2) {
                let t = m as f64 * dt_f;
                let j = sample_linear(sgrid, values, t);
                *v = Complex64::new(j * (-alpha * t).exp(), 0.0);
            }
            let j_hat = time_to_freq(fgrid, &j_alpha);
            let prod: Vec<Complex64> = (0..n)
                .map(|k| {
                    let z = Complex64::new(fgrid.omega(k), alpha);
                    -gf.eval_forward(z) * j_hat[k]
                })
                .collect();
            let mut x_time = freq_to_time(fgrid, &prod);
            for (m, v) in x_time.iter_mut().enumerate() {
                *v *= (alpha * fgrid.fold_time(m)).exp();
            }
            let x: Vec<f64> = (0..grid.n_samples)
                .map(|i| interp_periodic(fgrid, &x_time, grid.time(i)).re)
                .collect();
            Ok(Trajectory { grid: *grid, x, bath: None })
        }
    }
}

fn mirror_source(source: &SourceProfile, c: f64) -> SourceProfile {
    match source {
        SourceProfile::DeltaKick { t0, j0 } => SourceProfile::DeltaKick { t0: 2.0 * c - t0, j0: *j0 },
        SourceProfile::Kicks { kicks } => SourceProfile::Kicks {
            kicks: kicks
                .iter()
                .map(|k| crate::model::Kick { t0: 2.0 * c - k.t0, j0: k.j0 })
                .collect(),
        },
        SourceProfile::Sampled { grid, values } => {
            let mut rev = values.clone();
            rev.reverse();
            let g = TimeGrid {
                t_start: 2.0 * c - grid.t_end,
                t_end: 2.0 * c - grid.t_start,
                n_samples: grid.n_samples,
            };
            SourceProfile::Sampled { grid: g, values: rev }
        }
    }
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathMode, DiscreteBath, OhmicBath};
    use crate::oracle::{evolve_full, EvolveOptions};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_system() -> SystemSpec {
        SystemSpec::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn discrete_self_energy_values() {
        let bath = DiscreteBath::new(vec![BathMode { omega: 2.0, g: 1.0 }]).unwrap();
        let v = self_energy_discrete(&bath, 1.0, Complex64::ZERO, 1e-9).unwrap();
        assert!((v - Complex64::new(-0.25, 0.0)).norm() < 1e-8);

        let decoupled = DiscreteBath::new(vec![BathMode { omega: 2.0, g: 0.0 }]).unwrap();
        let z = self_energy_discrete(&decoupled, 1.0, Complex64::new(0.7, 0.0), 1e-9).unwrap();
        assert_eq!(z, Complex64::ZERO);

        assert!(matches!(
            self_energy_discrete(&bath, 1.0, Complex64::new(2.0, 0.0), 0.0),
            Err(GreenError::PoleOnGrid)
        ));
    }

    #[test]
    fn ohmic_closed_form_at_zero() {
        let bath = OhmicBath::new(1.0, 1.0).unwrap();
        let v = self_energy_ohmic(&bath, 1.0, Complex64::ZERO).unwrap();
        assert!((v - Complex64::new(-PI, 0.0)).norm() < 1e-14);
        let zero = self_energy_ohmic(&OhmicBath::new(0.0, 1.0).unwrap(), 1.0, Complex64::ZERO)
            .unwrap();
        assert_eq!(zero, Complex64::ZERO);
        assert!(matches!(
            self_energy_ohmic(&bath, 1.0, Complex64::new(0.0, -1.0)),
            Err(GreenError::PoleOnGrid)
        ));
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let eps = 1e-6;
        let decoupled = OhmicBath::new(0.0, 2.0).unwrap();
        let (zero, err0) = self_energy_ohmic_quadrature(&decoupled, 1.0, 1.0, eps).unwrap();
        assert_eq!(zero, Complex64::ZERO);
        assert_eq!(err0, 0.0);

        let bath = OhmicBath::new(1.0, 2.0).unwrap();
        let (q, err) = self_energy_ohmic_quadrature(&bath, 1.0, 1.0, eps).unwrap();
        let closed = self_energy_ohmic(&bath, 1.0, Complex64::new(1.0, eps)).unwrap();
        assert!(err <= 1e-8);
        assert!((q - closed).norm() / closed.norm() < 1e-6, "{q} vs {closed}");

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let g: f64 = rng.random_range(0.1..3.0);
            let wd: f64 = rng.random_range(0.5..20.0);
            let m: f64 = rng.random_range(0.5..2.0);
            let w: f64 = rng.random_range(-5.0..5.0);
            let bath = OhmicBath::new(g, wd).unwrap();
            let (q, _) = self_energy_ohmic_quadrature(&bath, m, w, eps).unwrap();
            let closed = self_energy_ohmic(&bath, m, Complex64::new(w, eps)).unwrap();
            assert!(
                (q - closed).norm() / closed.norm() < 1e-6,
                "g={g} wd={wd} m={m} w={w}: {q} vs {closed}"
            );
        }
    }

    #[test]
    fn quadrature_tail_decays_like_inverse_frequency() {
        let bath = OhmicBath::new(1.0, 1.0).unwrap();
        let (a, _) = self_energy_ohmic_quadrature(&bath, 1.0, 50.0, 1e-6).unwrap();
        let (b, _) = self_energy_ohmic_quadrature(&bath, 1.0, 100.0, 1e-6).unwrap();
        assert!((a.norm() / b.norm() - 2.0).abs() < 0.05);
    }

    #[test]
    fn free_propagator_static_value() {
        let sys = unit_system();
        let grid = FrequencyGrid::new(8.0, 64).unwrap();
        let gf =
            retarded_propagator(&sys, &SelfEnergyModel::None, &grid, 1e-6, TimeArrow::Forward)
                .unwrap();
        let k0 = grid.n_samples / 2; // omega = 0
        assert!((gf.d_r.values[k0] - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn conjugation_symmetry_and_arrow_flip() {
        let sys = unit_system();
        let bath = OhmicBath::new(1.0, 10.0).unwrap();
        let sigma = SelfEnergyModel::from_ohmic(&bath, sys.mass);
        let grid = FrequencyGrid::new(20.0, 256).unwrap();
        let fwd = retarded_propagator(&sys, &sigma, &grid, 1e-6, TimeArrow::Forward).unwrap();
        let bwd = retarded_propagator(&sys, &sigma, &grid, 1e-6, TimeArrow::Backward).unwrap();
        assert!(fwd.d_r.conjugation_residual() < 1e-12);
        for (a, b) in fwd.d_r.values.iter().zip(&bwd.d_r.values) {
            assert!((a.conj() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shifted_transform_reproduces_free_kernel() {
        // lifted-contour transform of the propagator against the
        // contour-integral closed form; the 1/(m zeta^2) large-frequency
        // asymptote (kernel -theta(t) t e^{-eps t}/m) is split off so the
        // window truncation does not pollute small times
        let sys = unit_system();
        let eps = 1e-6;
        let grid = FrequencyGrid::new(50.0, 1 << 16).unwrap();
        let alpha = default_shift(&grid);
        let kernel = shifted_retarded_kernel(&grid, alpha, |z| {
            let zeta = z + Complex64::i() * eps;
            1.0 / (sys.mass * (zeta * zeta - sys.omega0 * sys.omega0))
                - 1.0 / (sys.mass * zeta * zeta)
        });
        let mut worst: f64 = 0.0;
        for m in 0..grid.n_samples {
            let t = grid.fold_time(m);
            if !(0.0..=100.0).contains(&t) {
                continue;
            }
            let asymptote = if t > 0.0 { -t / sys.mass * (-eps * t).exp() } else { 0.0 };
            let got = kernel[m].re + asymptote;
            let expect = free_retarded_kernel(&sys, eps, t);
            worst = worst.max((got - expect).abs().max(kernel[m].im.abs()));
        }
        assert!(worst < 1e-4, "worst deviation {worst:.3e}");
    }

    #[test]
    fn near_far_split_properties() {
        let sys = unit_system();
        let grid = FrequencyGrid::new(10.0, 4096).unwrap();

        // default-scale eps: near part matches the principal-value form away
        // from the shell, recombination is exact
        let gf_sharp =
            retarded_propagator(&sys, &SelfEnergyModel::None, &grid, 1e-6, TimeArrow::Forward)
                .unwrap();
        let (d_n_sharp, d_f_sharp) = near_far_split(&gf_sharp);
        for k in 0..grid.n_samples {
            assert_eq!(
                d_n_sharp.values[k] + d_f_sharp.values[k],
                gf_sharp.d_r.values[k]
            );
            let w = grid.omega(k);
            // exclusion zone: at distance d from the shell the value grows
            // like 1/(2 w0 d), so the 1e-6 match is relative there
            if (w.abs() - sys.omega0).abs() < 2e-3 {
                continue;
            }
            let p = 1.0 / (sys.mass * (w * w - sys.omega0 * sys.omega0));
            assert!(
                (d_n_sharp.values[k].re - p).abs() < 1e-6 * p.abs().max(1.0),
                "omega {w}: {} vs {p}",
                d_n_sharp.values[k].re
            );
        }

        // wide eps resolvable on the grid: on-shell spike shape of the far part
        let eps = 10.0 * grid.d_omega();
        let gf = retarded_propagator(&sys, &SelfEnergyModel::None, &grid, eps, TimeArrow::Forward)
            .unwrap();
        let (_d_n, d_f) = near_far_split(&gf);

        // far part is an on-shell spike of width eps and sign -sign(omega)
        let k_peak = (0..grid.n_samples)
            .max_by(|&a, &b| d_f.values[a].im.abs().total_cmp(&d_f.values[b].im.abs()))
            .unwrap();
        let w_peak = grid.omega(k_peak).abs();
        assert!((w_peak - sys.omega0).abs() < 2.0 * grid.d_omega());
        for k in 0..grid.n_samples {
            let w = grid.omega(k);
            if w > 0.0 {
                assert!(d_f.values[k].im <= 0.0);
            } else if w < 0.0 {
                assert!(d_f.values[k].im >= 0.0);
            }
        }
        // half width at half maximum is about eps
        let peak = d_f.values[k_peak].im.abs();
        let mut hwhm = 0.0;
        for k in k_peak..grid.n_samples {
            if d_f.values[k].im.abs() < 0.5 * peak {
                hwhm = grid.omega(k) - grid.omega(k_peak);
                break;
            }
        }
        assert!((hwhm - eps).abs() < 3.0 * grid.d_omega(), "hwhm {hwhm} vs eps {eps}");

        // time-domain parity through the discrete transform (sharp eps keeps
        // the lone -omega_max node negligible in the odd series)
        let tn = freq_to_time(&grid, &d_n_sharp.values);
        let tf = freq_to_time(&grid, &d_f_sharp.values);
        let n = grid.n_samples;
        let mut worst_even: f64 = 0.0;
        let mut worst_odd: f64 = 0.0;
        for m in 1..n {
            worst_even = worst_even.max((tn[m] - tn[n - m]).norm());
            worst_odd = worst_odd.max((tf[m] + tf[n - m]).norm());
        }
        assert!(worst_even < 1e-10, "even residual {worst_even:.3e}");
        assert!(worst_odd < 1e-10, "odd residual {worst_odd:.3e}");

        // a purely real series has no far part
        let real_gf = GreenFunction {
            d_r: ComplexSeries::over_frequency(
                grid,
                grid.omegas().iter().map(|&w| Complex64::new(1.0 / (1.0 + w * w), 0.0)).collect(),
            ),
            ..gf.clone()
        };
        let (_, df0) = near_far_split(&real_gf);
        assert!(df0.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn free_poles_and_residues() {
        let sys = SystemSpec::new(1.0, 1.0).unwrap();
        let eps = 1e-6;
        let bx = SearchBox { re_min: -2.0, re_max: 2.0, im_min: -0.4, im_max: 0.1 };
        let mut poles = find_poles(&sys, &SelfEnergyModel::None, eps, bx).unwrap();
        poles.sort_by(|a, b| a.position.re.total_cmp(&b.position.re));
        assert_eq!(poles.len(), 2);
        for (p, sign) in poles.iter().zip([-1.0, 1.0]) {
            assert!((p.position.re - sign * 1.0).abs() < 1e-10);
            assert!(p.position.im.abs() <= 10.0 * eps);
            let expect = sign * 0.5; // +-1/(2 m w0)
            assert!((p.residue - Complex64::new(expect, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn discrete_poles_sit_at_normal_modes() {
        let sys = unit_system();
        let bath = DiscreteBath::new(vec![BathMode { omega: 1.0, g: 0.5 }]).unwrap();
        let sigma = SelfEnergyModel::from_discrete(&bath, sys.mass);
        let eps = 1e-6;
        let bx = SearchBox { re_min: 0.01, re_max: 3.0, im_min: -0.4, im_max: 0.1 };
        let mut poles = find_poles(&sys, &sigma, eps, bx).unwrap();
        poles.sort_by(|a, b| a.position.re.total_cmp(&b.position.re));
        assert_eq!(poles.len(), 2);
        assert!((poles[0].position.re - 0.5f64.sqrt()).abs() < 1e-9);
        assert!((poles[1].position.re - 1.5f64.sqrt()).abs() < 1e-9);
        for p in &poles {
            assert!(p.position.im.abs() <= 10.0 * eps);
        }
    }

    #[test]
    fn ohmic_dominant_pair_has_finite_lifetime() {
        let sys = unit_system();
        let bath = OhmicBath::new(1.0, 10.0).unwrap();
        let sigma = SelfEnergyModel::from_ohmic(&bath, sys.mass);
        let eps = 1e-6;
        let bx = SearchBox { re_min: -3.0, re_max: 3.0, im_min: -2.0, im_max: 0.5 };
        let poles = find_poles(&sys, &sigma, eps, bx).unwrap();
        assert_eq!(poles.len(), 2, "expected the dominant pair, got {poles:?}");
        for p in &poles {
            assert!(p.position.im.abs() > 1e3 * eps, "pole {p:?} too long-lived");
            // residual check: the located point really is a zero
            let zeta = p.position + Complex64::i() * eps;
            let f = sys.mass * (zeta * zeta - 1.0) - sigma.eval(zeta);
            assert!(f.norm() < 1e-9);
        }
        // mirror pair
        assert!((poles[0].position.re + poles[1].position.re).abs() < 1e-9);
        assert!((poles[0].position.im - poles[1].position.im).abs() < 1e-9);
    }

    #[test]
    fn response_free_kick_is_sine() {
        let sys = unit_system();
        let grid_f = FrequencyGrid::new(50.0, 1 << 14).unwrap();
        let gf = retarded_propagator(&sys, &SelfEnergyModel::None, &grid_f, 1e-8, TimeArrow::Forward)
            .unwrap();
        let grid_t = TimeGrid::new(0.0, 20.0, 301).unwrap();
        let resp = response(&gf, &SourceProfile::kick(0.0, 1.0), &grid_t).unwrap();
        for (i, &x) in resp.x.iter().enumerate() {
            let t = grid_t.time(i);
            assert!((x - t.sin()).abs() < 1e-6, "t={t}: {x} vs {}", t.sin());
        }

        let zero = response(&gf, &SourceProfile::kick(0.0, 0.0), &grid_t).unwrap();
        assert!(zero.x.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn response_matches_oracle_for_discrete_bath() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sys = unit_system();
        let mut modes = Vec::new();
        for _ in 0..5 {
            modes.push(BathMode {
                omega: rng.random_range(0.4..3.0),
                g: rng.random_range(0.05..0.35),
            });
        }
        let bath = DiscreteBath::new(modes).unwrap();
        assert!(crate::model::stability_check(&sys, &crate::model::BathSpec::Discrete(bath.clone())).stable);

        let grid_f = FrequencyGrid::new(200.0, 1 << 18).unwrap();
        let sigma = SelfEnergyModel::from_discrete(&bath, sys.mass);
        let gf = retarded_propagator(&sys, &sigma, &grid_f, 1e-6, TimeArrow::Forward).unwrap();
        let grid_t = TimeGrid::new(0.0, 50.0, 2_501).unwrap();
        let resp = response(&gf, &SourceProfile::kick(0.0, 1.0), &grid_t).unwrap();

        let fine = TimeGrid::new(0.0, 50.0, 100_001).unwrap();
        let oracle = evolve_full(&sys, &bath, &SourceProfile::kick(0.0, 1.0), &fine, EvolveOptions::default())
            .unwrap();
        let max_x = oracle.x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let mut worst: f64 = 0.0;
        for (i, &x) in resp.x.iter().enumerate() {
            worst = worst.max((x - oracle.x[40 * i]).abs());
        }
        assert!(worst <= 1e-4 * max_x, "worst {worst:.3e}, scale {max_x:.3e}");
    }

    #[test]
    fn response_is_causal_for_delayed_kick() {
        let sys = unit_system();
        let bath = DiscreteBath::new(vec![
            BathMode { omega: 1.5, g: 0.4 },
            BathMode { omega: 0.7, g: 0.2 },
        ])
        .unwrap();
        let sigma = SelfEnergyModel::from_discrete(&bath, sys.mass);
        let grid_f = FrequencyGrid::new(100.0, 1 << 16).unwrap();
        let gf = retarded_propagator(&sys, &sigma, &grid_f, 1e-6, TimeArrow::Forward).unwrap();
        let grid_t = TimeGrid::new(0.0, 40.0, 1001).unwrap();
        let t_kick = 20.0;
        let resp = response(&gf, &SourceProfile::kick(t_kick, 1.0), &grid_t).unwrap();
        let max_x = resp.x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for (i, &x) in resp.x.iter().enumerate() {
            if grid_t.time(i) < t_kick - 10.0 * grid_t.dt() {
                assert!(x.abs() <= 1e-6 * max_x, "acausal value {x:.3e} at t={}", grid_t.time(i));
            }
        }
    }

    #[test]
    fn backward_arrow_mirrors_forward_response() {
        let sys = unit_system();
        let bath = DiscreteBath::new(vec![BathMode { omega: 1.5, g: 0.4 }]).unwrap();
        let sigma = SelfEnergyModel::from_discrete(&bath, sys.mass);
        let grid_f = FrequencyGrid::new(100.0, 1 << 16).unwrap();
        let fwd = retarded_propagator(&sys, &sigma, &grid_f, 1e-6, TimeArrow::Forward).unwrap();
        let bwd = retarded_propagator(&sys, &sigma, &grid_f, 1e-6, TimeArrow::Backward).unwrap();
        let t0 = 15.0;
        let grid_t = TimeGrid::new(0.0, 30.0, 601).unwrap();
        let xf = response(&fwd, &SourceProfile::kick(t0, 1.0), &grid_t).unwrap();
        let xb = response(&bwd, &SourceProfile::kick(t0, 1.0), &grid_t).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..grid_t.n_samples {
            // mirror about t0: x_b(t0 + s) = x_f(t0 - s)
            let j = grid_t.n_samples - 1 - i;
            worst = worst.max((xb.x[i] - xf.x[j]).abs());
        }
        assert!(worst < 1e-6, "mirror residual {worst:.3e}");
    }

    #[test]
    fn sampled_source_matches_oracle() {
        let sys = unit_system();
        let bath = DiscreteBath::new(vec![BathMode { omega: 1.8, g: 0.5 }]).unwrap();
        let sigma = SelfEnergyModel::from_discrete(&bath, sys.mass);
        let grid_f = FrequencyGrid::new(100.0, 1 << 16).unwrap();
        let gf = retarded_propagator(&sys, &sigma, &grid_f, 1e-8, TimeArrow::Forward).unwrap();

        let sgrid = TimeGrid::new(0.0, 20.0, 40_001).unwrap();
        let values: Vec<f64> = sgrid
            .times()
            .iter()
            .map(|&t| (-(t - 3.0) * (t - 3.0) / 0.5).exp())
            .collect();
        let source = SourceProfile::Sampled { grid: sgrid, values };

        let grid_t = TimeGrid::new(0.0, 20.0, 501).unwrap();
        let resp = response(&gf, &source, &grid_t).unwrap();
        let fine = TimeGrid::new(0.0, 20.0, 40_001).unwrap();
        let oracle = evolve_full(&sys, &bath, &source, &fine, EvolveOptions::default()).unwrap();
        let mut worst: f64 = 0.0;
        for (i, &x) in resp.x.iter().enumerate() {
            worst = worst.max((x - oracle.x[80 * i]).abs());
        }
        assert!(worst < 1e-5, "worst {worst:.3e}");
    }

    #[test]
    fn grid_mismatch_guards() {
        let sys = unit_system();
        let grid_f = FrequencyGrid::new(10.0, 256).unwrap();
        let gf = retarded_propagator(&sys, &SelfEnergyModel::None, &grid_f, 1e-6, TimeArrow::Forward)
            .unwrap();
        // dt below the Nyquist step of the frequency grid
        let too_fine = TimeGrid::new(0.0, 1.0, 100_001).unwrap();
        assert!(matches!(
            response(&gf, &SourceProfile::kick(0.0, 1.0), &too_fine),
            Err(GreenError::GridMismatch(_))
        ));
        // beyond the reliable quarter period
        let too_long = TimeGrid::new(0.0, 1000.0, 1001).unwrap();
        assert!(matches!(
            response(&gf, &SourceProfile::kick(0.0, 1.0), &too_long),
            Err(GreenError::GridMismatch(_))
        ));
    }

    #[test]
    fn discrete_atoms_integrate_to_self_energy() {
        // cross-module check: the spectral atoms against the resolvent kernel
        // reproduce the discrete self-energy
        let sys = unit_system();
        let bath = DiscreteBath::new(vec![
            BathMode { omega: 1.3, g: 0.4 },
            BathMode { omega: 2.6, g: 0.7 },
        ])
        .unwrap();
        let atoms = crate::model::spectral_atoms(&sys, &bath);
        let zeta = Complex64::new(0.8, 1e-6);
        let from_atoms: Complex64 = atoms
            .iter()
            .map(|a| a.weight * 2.0 * a.omega / (zeta * zeta - a.omega * a.omega))
            .sum();
        let direct = self_energy_discrete(&bath, sys.mass, Complex64::new(0.8, 0.0), 1e-6).unwrap();
        assert!((from_atoms - direct).norm() < 1e-12);
    }
}
