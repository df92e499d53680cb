//! C ABI over the core toolkit: opaque model handles, status codes, and
//! flat-buffer outputs so other languages can drive the solvers.
//!
//! Every function is panic-safe; failures return a status code and leave a
//! thread-local message readable through [`cthm_last_error`]. Pointer-taking
//! entry points are `unsafe`: the caller guarantees the pointers are valid
//! for the documented lengths.

use ctp_harmonics::green::{
    find_poles, response, retarded_propagator, SearchBox, SelfEnergyModel, TimeArrow,
};
use ctp_harmonics::grid::{FrequencyGrid, TimeGrid};
use ctp_harmonics::model::{
    stability_check, BathMode, BathSpec, DiscreteBath, OhmicBath, SourceProfile, SystemSpec,
};
use ctp_harmonics::oracle::{diagonalize, evolve_full, EvolveOptions, NormalModes};
use ctp_harmonics::window::{apparent_spectral_function, Window};
use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CthmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    NumericFailure = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

enum Bath {
    None,
    Discrete(DiscreteBath),
    Ohmic(OhmicBath),
}

/// Opaque model handle: the observed oscillator plus its environment.
pub struct CthmModel {
    system: SystemSpec,
    bath: Bath,
}

impl CthmModel {
    fn sigma(&self) -> SelfEnergyModel {
        match &self.bath {
            Bath::None => SelfEnergyModel::None,
            Bath::Discrete(b) => SelfEnergyModel::from_discrete(b, self.system.mass),
            Bath::Ohmic(b) => SelfEnergyModel::from_ohmic(b, self.system.mass),
        }
    }

    fn bath_spec(&self) -> Option<BathSpec> {
        match &self.bath {
            Bath::None => None,
            Bath::Discrete(b) => Some(BathSpec::Discrete(b.clone())),
            Bath::Ohmic(b) => Some(BathSpec::Ohmic(*b)),
        }
    }

    fn modes(&self) -> Result<NormalModes, String> {
        match &self.bath {
            Bath::Discrete(b) => diagonalize(&self.system, b).map_err(|e| e.to_string()),
            Bath::None => Ok(NormalModes::with_uniform_observed_row(&[self.system.omega0])),
            Bath::Ohmic(_) => Err("an ohmic bath has no discrete mode spectrum".into()),
        }
    }
}

fn guarded<F: FnOnce() -> CthmStatus>(f: F) -> CthmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            CthmStatus::Panic
        }
    }
}

/// Copy the last error message into `buf` (NUL terminated, truncated to
/// `cap`); returns the full message length.
#[no_mangle]
pub unsafe extern "C" fn cthm_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// New model with no environment.
#[no_mangle]
pub extern "C" fn cthm_model_new(mass: f64, omega0: f64) -> *mut CthmModel {
    match SystemSpec::new(mass, omega0) {
        Ok(system) => Box::into_raw(Box::new(CthmModel { system, bath: Bath::None })),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Attach a discrete bath of `n` modes with frequencies `omegas` and
/// couplings `couplings`.
#[no_mangle]
pub unsafe extern "C" fn cthm_model_set_discrete_bath(
    model: *mut CthmModel,
    omegas: *const f64,
    couplings: *const f64,
    n: usize,
) -> CthmStatus {
    guarded(|| {
        if model.is_null() || omegas.is_null() || couplings.is_null() {
            set_error("null argument");
            return CthmStatus::NullArgument;
        }
        let (omegas, couplings) = unsafe {
            (
                std::slice::from_raw_parts(omegas, n),
                std::slice::from_raw_parts(couplings, n),
            )
        };
        let modes: Vec<BathMode> = omegas
            .iter()
            .zip(couplings)
            .map(|(&omega, &g)| BathMode { omega, g })
            .collect();
        match DiscreteBath::new(modes) {
            Ok(bath) => {
                unsafe { &mut *model }.bath = Bath::Discrete(bath);
                CthmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                CthmStatus::InvalidArgument
            }
        }
    })
}

/// Attach an Ohmic bath with coupling `g` and Drude cutoff `omega_d`.
#[no_mangle]
pub unsafe extern "C" fn cthm_model_set_ohmic_bath(
    model: *mut CthmModel,
    g: f64,
    omega_d: f64,
) -> CthmStatus {
    guarded(|| {
        if model.is_null() {
            set_error("null argument");
            return CthmStatus::NullArgument;
        }
        match OhmicBath::new(g, omega_d) {
            Ok(bath) => {
                unsafe { &mut *model }.bath = Bath::Ohmic(bath);
                CthmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                CthmStatus::InvalidArgument
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn cthm_model_free(model: *mut CthmModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Stability margin of the coupled motion; positive means stable.
#[no_mangle]
pub unsafe extern "C" fn cthm_stability_margin(
    model: *const CthmModel,
    margin_out: *mut f64,
) -> CthmStatus {
    guarded(|| {
        if model.is_null() || margin_out.is_null() {
            set_error("null argument");
            return CthmStatus::NullArgument;
        }
        let model = unsafe { &*model };
        let margin = match model.bath_spec() {
            Some(bath) => stability_check(&model.system, &bath).margin,
            None => model.system.mass * model.system.omega0 * model.system.omega0,
        };
        unsafe { *margin_out = margin };
        CthmStatus::Ok
    })
}

/// Integrate the full coupled equations of motion under a kick `j0` at `t0`
/// and write the system coordinate on the uniform grid `[0, t_end]` with
/// `n_samples` points into `x_out`.
#[no_mangle]
pub unsafe extern "C" fn cthm_simulate_kick(
    model: *const CthmModel,
    j0: f64,
    t0: f64,
    t_end: f64,
    n_samples: usize,
    x_out: *mut f64,
) -> CthmStatus {
    guarded(|| {
        if model.is_null() || x_out.is_null() {
            set_error("null argument");
            return CthmStatus::NullArgument;
        }
        let model = unsafe { &*model };
        let bath = match &model.bath {
            Bath::Discrete(b) => b.clone(),
            Bath::None => DiscreteBath::new(vec![BathMode {
                omega: model.system.omega0,
                g: 0.0,
            }])
            .expect("valid placeholder"),
            Bath::Ohmic(_) => {
                set_error("an ohmic bath has no microscopic dynamics to integrate");
                return CthmStatus::InvalidArgument;
            }
        };
        let grid = match TimeGrid::new(0.0, t_end, n_samples) {
            Ok(g) => g,
            Err(e) => {
                set_error(e.to_string());
                return CthmStatus::InvalidArgument;
            }
        };
        match evolve_full(
            &model.system,
            &bath,
            &SourceProfile::kick(t0, j0),
            &grid,
            EvolveOptions::default(),
        ) {
            Ok(traj) => {
                unsafe {
                    std::ptr::copy_nonoverlapping(traj.x.as_ptr(), x_out, n_samples);
                }
                CthmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                CthmStatus::NumericFailure
            }
        }
    })
}

/// Kick response through the retarded propagator sampled on a frequency grid
/// `[-omega_max, omega_max)` with `n_freq` nodes and prescription `epsilon`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn cthm_response_kick(
    model: *const CthmModel,
    omega_max: f64,
    n_freq: usize,
    epsilon: f64,
    j0: f64,
    t0: f64,
    t_end: f64,
    n_samples: usize,
    x_out: *mut f64,
) -> CthmStatus {
    guarded(|| {
        if model.is_null() || x_out.is_null() {
            set_error("null argument");
            return CthmStatus::NullArgument;
        }
        let model = unsafe { &*model };
        let fgrid = match FrequencyGrid::new(omega_max, n_freq) {
            Ok(g) => g,
            Err(e) => {
                set_error(e.to_string());
                return CthmStatus::InvalidArgument;
            }
        };
        let tgrid = match TimeGrid::new(0.0, t_end, n_samples) {
            Ok(g) => g,
            Err(e) => {
                set_error(e.to_string());
                return CthmStatus::InvalidArgument;
            }
        };
        let sigma = model.sigma();
        let gf = match retarded_propagator(&model.system, &sigma, &fgrid, epsilon, TimeArrow::Forward)
        {
            Ok(gf) => gf,
            Err(e) => {
                set_error(e.to_string());
                return CthmStatus::NumericFailure;
            }
        };
        match response(&gf, &SourceProfile::kick(t0, j0), &tgrid) {
            Ok(traj) => {
                unsafe {
                    std::ptr::copy_nonoverlapping(traj.x.as_ptr(), x_out, n_samples);
                }
                CthmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                CthmStatus::NumericFailure
            }
        }
    })
}

/// Locate propagator poles inside the rectangle; writes up to `cap` entries
/// and the found count.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn cthm_find_poles(
    model: *const CthmModel,
    epsilon: f64,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    re_out: *mut f64,
    im_out: *mut f64,
    residue_re_out: *mut f64,
    residue_im_out: *mut f64,
    cap: usize,
    n_found: *mut usize,
) -> CthmStatus {
    guarded(|| {
        if model.is_null()
            || re_out.is_null()
            || im_out.is_null()
            || residue_re_out.is_null()
            || residue_im_out.is_null()
            || n_found.is_null()
        {
            set_error("null argument");
            return CthmStatus::NullArgument;
        }
        let model = unsafe { &*model };
        let sigma = model.sigma();
        let bx = SearchBox { re_min, re_max, im_min, im_max };
        match find_poles(&model.system, &sigma, epsilon, bx) {
            Ok(mut poles) => {
                poles.sort_by(|a, b| a.position.re.total_cmp(&b.position.re));
                unsafe { *n_found = poles.len() };
                if poles.len() > cap {
                    set_error(format!("{} poles found, buffer holds {cap}", poles.len()));
                    return CthmStatus::BufferTooSmall;
                }
                for (i, p) in poles.iter().enumerate() {
                    unsafe {
                        *re_out.add(i) = p.position.re;
                        *im_out.add(i) = p.position.im;
                        *residue_re_out.add(i) = p.residue.re;
                        *residue_im_out.add(i) = p.residue.im;
                    }
                }
                CthmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                CthmStatus::NumericFailure
            }
        }
    })
}

/// Apparent spectral function of physical coordinate `k` under a Gaussian
/// (`lorentzian = 0`) or Lorentzian (`lorentzian != 0`) window of observation
/// time `t_obs`, sampled at `omegas`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn cthm_apparent_spectral_function(
    model: *const CthmModel,
    k: usize,
    t_obs: f64,
    lorentzian: i32,
    omegas: *const f64,
    n: usize,
    rho_out: *mut f64,
) -> CthmStatus {
    guarded(|| {
        if model.is_null() || omegas.is_null() || rho_out.is_null() {
            set_error("null argument");
            return CthmStatus::NullArgument;
        }
        if !(t_obs > 0.0) {
            set_error("observation time must be positive");
            return CthmStatus::InvalidArgument;
        }
        let model = unsafe { &*model };
        let modes = match model.modes() {
            Ok(m) => m,
            Err(e) => {
                set_error(e);
                return CthmStatus::InvalidArgument;
            }
        };
        if k >= modes.frequencies.len() {
            set_error(format!(
                "coordinate {k} out of range for {} modes",
                modes.frequencies.len()
            ));
            return CthmStatus::InvalidArgument;
        }
        let window = if lorentzian != 0 {
            Window::lorentzian_for_period(t_obs)
        } else {
            Window::gaussian(t_obs)
        };
        let omegas = unsafe { std::slice::from_raw_parts(omegas, n) };
        let rho = apparent_spectral_function(&modes, k, model.system.mass, &window, omegas);
        unsafe {
            std::ptr::copy_nonoverlapping(rho.as_ptr(), rho_out, n);
        }
        CthmStatus::Ok
    })
}
