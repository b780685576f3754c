//! Central-spin scenario descriptors and bath-state labels.

use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::SpinBath;
use crate::{CoreError, Result};

/// Scenario parameters of the central spin.
#[derive(Debug, Clone, PartialEq)]
pub enum CentralSpinModel {
    /// NV electron spin near zero field with strain-induced transverse
    /// anisotropy. Qubit levels {|0>, |+>} with splitting
    /// E = sqrt(eps^2 + (omega_e + h_z)^2), omega_e = -gamma_e B.
    Nv { b_gauss: f64, epsilon_khz: f64 },
    /// Singlet-triplet qubit of a GaAs double dot at high field. Qubit levels
    /// |S>, |T0> at -E/2, +E/2 with E = sqrt(J_ex^2 + (h1 - h2)^2).
    DoubleDot { j_ex_ghz: f64, b_tesla: f64 },
    /// Driven spin in the rotating frame: dressed levels at +-E/2 with
    /// E = sqrt(rabi^2 + (detuning + h_z)^2). `bath_b_gauss` sets the static
    /// field seen by the bath nuclei.
    DrivenSpin {
        rabi_khz: f64,
        detuning_khz: f64,
        bath_b_gauss: f64,
    },
}

impl CentralSpinModel {
    pub fn name(&self) -> &'static str {
        match self {
            CentralSpinModel::Nv { .. } => "nv",
            CentralSpinModel::DoubleDot { .. } => "dqd",
            CentralSpinModel::DrivenSpin { .. } => "driven",
        }
    }
}

/// Assignment of one local quantization-axis eigenlabel per site. Labels are
/// stored as twice the projection (so spin-1/2 labels are -1, +1 and spin-3/2
/// labels are -3, -1, +1, +3).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BathState {
    pub labels_2m: Vec<i8>,
}

impl BathState {
    pub fn uniform_up(n: usize) -> Self {
        BathState {
            labels_2m: alloc::vec![1; n],
        }
    }

    pub fn m(&self, site: usize) -> f64 {
        self.labels_2m[site] as f64 / 2.0
    }

    /// Basis index of the label at `site` for a spin with 2s = `spin_2x`,
    /// with index 0 holding the highest projection.
    pub fn local_index(&self, site: usize, spin_2x: u32) -> Result<usize> {
        let l = self.labels_2m[site] as i32;
        let s2 = spin_2x as i32;
        if l.abs() > s2 || (s2 - l) % 2 != 0 {
            return Err(CoreError::InvalidArgument(label_error(site)));
        }
        Ok(((s2 - l) / 2) as usize)
    }

    pub fn validate(&self, bath: &SpinBath) -> Result<()> {
        if self.labels_2m.len() != bath.len() {
            return Err(CoreError::InvalidArgument(
                "bath state length does not match bath size".into(),
            ));
        }
        for (j, site) in bath.sites.iter().enumerate() {
            self.local_index(j, site.spin_2x)?;
        }
        Ok(())
    }

    /// Compact id used in output metadata.
    pub fn id_string(&self) -> String {
        use alloc::format;
        let mut s = String::new();
        for &l in &self.labels_2m {
            s.push_str(&format!("{l},"));
        }
        s.pop();
        s
    }
}

fn label_error(site: usize) -> String {
    use alloc::format;
    format!("bath-state label at site {site} is not a valid projection")
}

/// How the qubit splitting maps onto the two conditional energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitStyle {
    /// NV: levels {0, E} (qubit |0>, |+>).
    UpperOnly,
    /// DQD and driven spin: levels {-E/2, +E/2}.
    Symmetric,
}

/// How the splitting depends on the total Overhauser value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyMode {
    /// E(h) = sqrt(eps^2 + (base + h)^2), treated exactly. The modified
    /// expansion: the square root is never expanded.
    Exact,
    /// Comparison mode: second-order Taylor expansion of E about the
    /// mean-field point, E ~ E_M + (Delta_M / E_M) d + d^2 / (2 E_M) with
    /// d = (base + h) - Delta_M. This is the original expansion whose
    /// hyperfine-mediated pair terms spoil convergence near the clock
    /// transition.
    Taylor2 { e_m_khz: f64, delta_m_khz: f64 },
}

/// Central-spin splitting as a function of the summed bath coupling h (kHz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    /// Transverse gap (strain eps, |J_ex|, or Rabi frequency), kHz.
    pub epsilon_khz: f64,
    /// Static detuning added to h (omega_e for NV, detuning for driven spin,
    /// zero for the DQD), kHz.
    pub base_khz: f64,
    pub style: SplitStyle,
    pub mode: EnergyMode,
}

impl EnergyModel {
    pub fn splitting_khz(&self, h_khz: f64) -> f64 {
        let delta = self.base_khz + h_khz;
        match self.mode {
            EnergyMode::Exact => libm::sqrt(self.epsilon_khz * self.epsilon_khz + delta * delta),
            EnergyMode::Taylor2 {
                e_m_khz,
                delta_m_khz,
            } => {
                let d = delta - delta_m_khz;
                e_m_khz + delta_m_khz / e_m_khz * d + d * d / (2.0 * e_m_khz)
            }
        }
    }

    /// Conditional energies (upper, lower) of the two qubit levels, kHz.
    pub fn energies_khz(&self, h_khz: f64) -> (f64, f64) {
        let e = self.splitting_khz(h_khz);
        match self.style {
            SplitStyle::UpperOnly => (e, 0.0),
            SplitStyle::Symmetric => (e / 2.0, -e / 2.0),
        }
    }

    /// Switch to the second-order-expansion comparison mode around the
    /// mean-field point `h_m_khz`. Fails at an exact degeneracy where the
    /// expansion divides by zero.
    pub fn to_taylor2(&self, h_m_khz: f64) -> Result<EnergyModel> {
        let delta_m = self.base_khz + h_m_khz;
        let e_m = libm::sqrt(self.epsilon_khz * self.epsilon_khz + delta_m * delta_m);
        if e_m == 0.0 {
            return Err(CoreError::InvalidArgument(
                "second-order expansion undefined at exact degeneracy (E_M = 0)".into(),
            ));
        }
        Ok(EnergyModel {
            mode: EnergyMode::Taylor2 {
                e_m_khz: e_m,
                delta_m_khz: delta_m,
            },
            ..*self
        })
    }
}

/// NV central-spin eigen data for a given Overhauser field: splitting E (kHz)
/// and mixing angle theta_e = atan(eps / (omega_e + h_z)) of the strain-mixed
/// |+-1> doublet.
pub fn nv_eigenbasis(model: &CentralSpinModel, h_z_khz: f64, gamma_e_mhz_per_g: f64) -> Result<(f64, f64)> {
    match model {
        CentralSpinModel::Nv {
            b_gauss,
            epsilon_khz,
        } => {
            let omega_e = -gamma_e_mhz_per_g * 1e3 * b_gauss;
            let delta = omega_e + h_z_khz;
            let e = libm::sqrt(epsilon_khz * epsilon_khz + delta * delta);
            let theta = libm::atan2(*epsilon_khz, delta);
            Ok((e, theta))
        }
        _ => Err(CoreError::InvalidArgument(
            "nv_eigenbasis requires the NV scenario".into(),
        )),
    }
}
