//! System-bath model: one observed oscillator of mass `m` and frequency
//! `omega0` coupled linearly to a set of bath oscillators sharing the same
//! mass, plus the external source profiles driving it.

use crate::grid::TimeGrid;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("mass must be positive (got {0})")]
    NonPositiveMass(f64),
    #[error("omega0 must be positive (got {0})")]
    NonPositiveFrequency(f64),
    #[error("bath mode frequencies must be positive (got {0})")]
    NonPositiveBathFrequency(f64),
    #[error("discrete bath needs at least one mode")]
    EmptyBath,
    #[error("Drude cutoff must be positive (got {0})")]
    NonPositiveCutoff(f64),
    #[error("sampled source contains non-finite values")]
    NonFiniteSource,
    #[error("kick at t = {t0} lies outside the simulated interval")]
    KickOutsideInterval { t0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub mass: f64,
    pub omega0: f64,
}

impl SystemSpec {
    pub fn new(mass: f64, omega0: f64) -> Result<Self, ModelError> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(ModelError::NonPositiveMass(mass));
        }
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(ModelError::NonPositiveFrequency(omega0));
        }
        Ok(Self { mass, omega0 })
    }
}

impl Default for SystemSpec {
    fn default() -> Self {
        Self { mass: 1.0, omega0: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathMode {
    pub omega: f64,
    pub g: f64,
}

/// Discrete set of bath oscillators `(omega_n, g_n)`; all modes share the
/// system mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteBath {
    pub modes: Vec<BathMode>,
}

impl DiscreteBath {
    pub fn new(modes: Vec<BathMode>) -> Result<Self, ModelError> {
        if modes.is_empty() {
            return Err(ModelError::EmptyBath);
        }
        for m in &modes {
            if !(m.omega > 0.0) || !m.omega.is_finite() {
                return Err(ModelError::NonPositiveBathFrequency(m.omega));
            }
        }
        Ok(Self { modes })
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }
}

/// Ohmic bath with a Drude cutoff: `rho(W) = theta(W) g^2 W / (m W_D (W_D^2 + W^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OhmicBath {
    pub g: f64,
    #[serde(rename = "omegaD")]
    pub omega_d: f64,
}

impl OhmicBath {
    pub fn new(g: f64, omega_d: f64) -> Result<Self, ModelError> {
        if !(omega_d > 0.0) || !omega_d.is_finite() {
            return Err(ModelError::NonPositiveCutoff(omega_d));
        }
        Ok(Self { g, omega_d })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BathSpec {
    Discrete(DiscreteBath),
    Ohmic(OhmicBath),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kick {
    pub t0: f64,
    pub j0: f64,
}

/// External source `j(t)` coupled to the system coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceProfile {
    DeltaKick { t0: f64, j0: f64 },
    Kicks { kicks: Vec<Kick> },
    Sampled { grid: TimeGrid, values: Vec<f64> },
}

impl SourceProfile {
    pub fn kick(t0: f64, j0: f64) -> Self {
        SourceProfile::DeltaKick { t0, j0 }
    }

    pub fn validate(&self, interval: Option<&TimeGrid>) -> Result<(), ModelError> {
        match self {
            SourceProfile::DeltaKick { t0, .. } => {
                if let Some(g) = interval {
                    if !g.contains(*t0) {
                        return Err(ModelError::KickOutsideInterval { t0: *t0 });
                    }
                }
            }
            SourceProfile::Kicks { kicks } => {
                for k in kicks {
                    if let Some(g) = interval {
                        if !g.contains(k.t0) {
                            return Err(ModelError::KickOutsideInterval { t0: k.t0 });
                        }
                    }
                }
            }
            SourceProfile::Sampled { values, .. } => {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(ModelError::NonFiniteSource);
                }
            }
        }
        Ok(())
    }

    pub fn as_kicks(&self) -> Option<Vec<Kick>> {
        match self {
            SourceProfile::DeltaKick { t0, j0 } => Some(vec![Kick { t0: *t0, j0: *j0 }]),
            SourceProfile::Kicks { kicks } => Some(kicks.clone()),
            SourceProfile::Sampled { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SourceProfile::DeltaKick { j0, .. } => *j0 == 0.0,
            SourceProfile::Kicks { kicks } => kicks.iter().all(|k| k.j0 == 0.0),
            SourceProfile::Sampled { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub margin: f64,
}

/// Static stability of the coupled motion. Both bath kinds reduce to the sign
/// of the inverse retarded propagator at zero frequency: the discrete case is
/// the inequality `sum_n g_n^2/(m w_n^2) < m w0^2`, the Ohmic threshold is the
/// static limit `m w0^2 - pi g^2/(m W_D^2)` of the same quantity (derived).
pub fn stability_check(system: &SystemSpec, bath: &BathSpec) -> StabilityReport {
    let free = system.mass * system.omega0 * system.omega0;
    let margin = match bath {
        BathSpec::Discrete(b) => {
            let pull: f64 = b
                .modes
                .iter()
                .map(|m| m.g * m.g / (system.mass * m.omega * m.omega))
                .sum();
            free - pull
        }
        BathSpec::Ohmic(b) => free - PI * b.g * b.g / (system.mass * b.omega_d * b.omega_d),
    };
    StabilityReport { stable: margin > 0.0, margin }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAtom {
    pub omega: f64,
    pub weight: f64,
}

/// Spectral function of a discrete bath as its delta-comb atoms
/// `(w_n, g_n^2 / (2 m w_n))`; smearing is left to the observation window.
pub fn spectral_atoms(system: &SystemSpec, bath: &DiscreteBath) -> Vec<SpectralAtom> {
    bath.modes
        .iter()
        .map(|m| SpectralAtom {
            omega: m.omega,
            weight: m.g * m.g / (2.0 * system.mass * m.omega),
        })
        .collect()
}

/// Ohmic spectral density at frequency `omega`; zero for `omega <= 0`.
pub fn ohmic_spectral_density(system: &SystemSpec, bath: &OhmicBath, omega: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    bath.g * bath.g * omega
        / (system.mass * bath.omega_d * (bath.omega_d * bath.omega_d + omega * omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_system() -> SystemSpec {
        SystemSpec::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn stability_single_mode() {
        let sys = unit_system();
        let bath = BathSpec::Discrete(
            DiscreteBath::new(vec![BathMode { omega: 2.0, g: 1.0 }]).unwrap(),
        );
        let rep = stability_check(&sys, &bath);
        assert!(rep.stable);
        assert!((rep.margin - 0.75).abs() < 1e-15);
    }

    #[test]
    fn stability_decoupled_margin_is_free_stiffness() {
        let sys = SystemSpec::new(2.0, 3.0).unwrap();
        let bath = BathSpec::Discrete(
            DiscreteBath::new(vec![
                BathMode { omega: 1.0, g: 0.0 },
                BathMode { omega: 5.0, g: 0.0 },
            ])
            .unwrap(),
        );
        let rep = stability_check(&sys, &bath);
        assert!(rep.stable);
        assert!((rep.margin - 18.0).abs() < 1e-12);
    }

    #[test]
    fn stability_overcoupled_mode_is_unstable() {
        let sys = unit_system();
        let bath = BathSpec::Discrete(
            DiscreteBath::new(vec![BathMode { omega: 1.0, g: 1.2 }]).unwrap(),
        );
        let rep = stability_check(&sys, &bath);
        assert!(!rep.stable);
        assert!((rep.margin - (1.0 - 1.44)).abs() < 1e-12);
    }

    #[test]
    fn ohmic_spectral_density_values() {
        let sys = unit_system();
        let bath = OhmicBath::new(1.0, 1.0).unwrap();
        assert_eq!(ohmic_spectral_density(&sys, &bath, -1.0), 0.0);
        assert!((ohmic_spectral_density(&sys, &bath, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ohmic_spectral_density_tail_falls_like_inverse_square() {
        let sys = unit_system();
        let bath = OhmicBath::new(1.3, 0.7).unwrap();
        let r = ohmic_spectral_density(&sys, &bath, 1e4) / ohmic_spectral_density(&sys, &bath, 2e4);
        assert!((r - 2.0).abs() < 1e-3);
        for w in [-3.0, 0.0, 0.3, 5.0, 500.0] {
            assert!(ohmic_spectral_density(&sys, &bath, w) >= 0.0);
        }
    }

    #[test]
    fn discrete_atoms() {
        let sys = unit_system();
        let bath = DiscreteBath::new(vec![BathMode { omega: 2.0, g: 1.0 }]).unwrap();
        let atoms = spectral_atoms(&sys, &bath);
        assert_eq!(atoms.len(), 1);
        assert!((atoms[0].omega - 2.0).abs() < 1e-15);
        assert!((atoms[0].weight - 0.25).abs() < 1e-15);
    }

    #[test]
    fn stability_monotone_under_coupling_scale() {
        // scaling all couplings by s in (0,1) never destabilizes
        let sys = unit_system();
        let modes = vec![
            BathMode { omega: 0.8, g: 0.4 },
            BathMode { omega: 2.5, g: 0.9 },
            BathMode { omega: 1.7, g: 0.3 },
        ];
        let full = stability_check(
            &sys,
            &BathSpec::Discrete(DiscreteBath::new(modes.clone()).unwrap()),
        );
        assert!(full.stable);
        for s in [0.1, 0.5, 0.9] {
            let scaled: Vec<BathMode> = modes
                .iter()
                .map(|m| BathMode { omega: m.omega, g: s * m.g })
                .collect();
            let rep = stability_check(
                &sys,
                &BathSpec::Discrete(DiscreteBath::new(scaled).unwrap()),
            );
            assert!(rep.stable);
            assert!(rep.margin >= full.margin);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(SystemSpec::new(0.0, 1.0).is_err());
        assert!(SystemSpec::new(1.0, -2.0).is_err());
        assert!(DiscreteBath::new(vec![]).is_err());
        assert!(DiscreteBath::new(vec![BathMode { omega: -1.0, g: 0.1 }]).is_err());
        assert!(OhmicBath::new(1.0, 0.0).is_err());
    }
}
