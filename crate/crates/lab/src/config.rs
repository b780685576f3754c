//! Run configuration: JSON schema, defaults, validation, and the mapping
//! onto core types.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use cce_lab_core::cce::{CceConfig, ExpansionMode, PulseSequence};
use cce_lab_core::constants::PhysicalConstants;
use cce_lab_core::geometry::DotEnvelope;
use cce_lab_core::model::CentralSpinModel;

pub const CONFIG_VERSION: u32 = 1;

fn default_version() -> u32 {
    CONFIG_VERSION
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum ModelConfig {
    Nv {
        b_gauss: f64,
        epsilon_khz: f64,
    },
    Dqd {
        j_ex_ghz: f64,
        b_tesla: f64,
        envelope: EnvelopeConfig,
        #[serde(default = "default_n_c")]
        n_strongest: usize,
    },
    Driven {
        rabi_khz: f64,
        detuning_khz: f64,
        bath_b_gauss: f64,
    },
}

fn default_n_c() -> usize {
    2000
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct EnvelopeConfig {
    pub l_z_nm: f64,
    pub rho0_nm: f64,
}

impl From<EnvelopeConfig> for DotEnvelope {
    fn from(e: EnvelopeConfig) -> Self {
        DotEnvelope {
            l_z_nm: e.l_z_nm,
            rho0_nm: e.rho0_nm,
        }
    }
}

impl ModelConfig {
    pub fn to_model(&self) -> CentralSpinModel {
        match *self {
            ModelConfig::Nv {
                b_gauss,
                epsilon_khz,
            } => CentralSpinModel::Nv {
                b_gauss,
                epsilon_khz,
            },
            ModelConfig::Dqd {
                j_ex_ghz, b_tesla, ..
            } => CentralSpinModel::DoubleDot { j_ex_ghz, b_tesla },
            ModelConfig::Driven {
                rabi_khz,
                detuning_khz,
                bath_b_gauss,
            } => CentralSpinModel::DrivenSpin {
                rabi_khz,
                detuning_khz,
                bath_b_gauss,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SequenceConfig {
    Fid,
    Hahn,
    Rotary { switch_times_ms: Vec<f64> },
}

impl SequenceConfig {
    pub fn to_sequence(&self) -> PulseSequence {
        match self {
            SequenceConfig::Fid => PulseSequence::Fid,
            SequenceConfig::Hahn => PulseSequence::HahnEcho,
            SequenceConfig::Rotary { switch_times_ms } => PulseSequence::RotaryEcho {
                switch_times_ms: switch_times_ms.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct TimeGridConfig {
    pub start_ms: f64,
    pub stop_ms: f64,
    pub points: usize,
}

impl TimeGridConfig {
    pub fn build(&self) -> anyhow::Result<Vec<f64>> {
        if self.points < 2 || !(self.stop_ms > self.start_ms) || self.start_ms < 0.0 {
            bail!("time grid needs points >= 2 and 0 <= start < stop");
        }
        let n = self.points;
        Ok((0..n)
            .map(|i| {
                self.start_ms + (self.stop_ms - self.start_ms) * i as f64 / (n - 1) as f64
            })
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CceSection {
    #[serde(default = "default_order")]
    pub max_order: usize,
    pub pair_cutoff_nm: f64,
    #[serde(default = "default_mode")]
    pub mode: String,
}

fn default_order() -> usize {
    2
}

fn default_mode() -> String {
    "modified".into()
}

impl CceSection {
    pub fn to_cce(&self) -> anyhow::Result<CceConfig> {
        let mode = match self.mode.as_str() {
            "modified" => ExpansionMode::Modified,
            "original" => ExpansionMode::Original,
            other => bail!("unknown expansion mode '{other}' (modified|original)"),
        };
        Ok(CceConfig {
            max_order: self.max_order,
            pair_cutoff_nm: self.pair_cutoff_nm,
            mode,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateConfig {
    /// All labels at the highest projection.
    UniformUp,
    /// Greedy minimum-|Overhauser| state.
    MinOverhauser,
    /// One uniformly random state from this seed.
    Sampled { seed: u64 },
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig::MinOverhauser
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub model: ModelConfig,
    /// Bath file paths; one for NV / driven, two for the double dot.
    pub baths: Vec<PathBuf>,
    pub sequence: SequenceConfig,
    pub times: TimeGridConfig,
    pub cce: CceSection,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub compare_exact: bool,
    /// Optional JSON file overriding physical constants field by field.
    #[serde(default)]
    pub constants: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.version != CONFIG_VERSION {
            bail!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            );
        }
        let expected = match self.model {
            ModelConfig::Dqd { .. } => 2,
            _ => 1,
        };
        if self.baths.len() != expected {
            bail!(
                "scenario expects {expected} bath file(s), got {}",
                self.baths.len()
            );
        }
        self.times.build()?;
        self.cce.to_cce()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    /// NV scenario only: the swept parameter is the field in Gauss.
    pub epsilon_khz: f64,
    pub bath: PathBuf,
    pub b_start_gauss: f64,
    pub b_stop_gauss: f64,
    pub b_points: usize,
    pub sequence: SequenceConfig,
    pub times: TimeGridConfig,
    pub cce: CceSection,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub constants: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Also emit an Overhauser histogram with this many samples.
    #[serde(default)]
    pub overhauser_samples: usize,
}

impl SweepConfig {
    pub fn load(path: &Path) -> anyhow::Result<SweepConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: SweepConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.version != CONFIG_VERSION {
            bail!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            );
        }
        if self.b_points < 2 || !(self.b_stop_gauss > self.b_start_gauss) {
            bail!("field sweep needs b_points >= 2 and b_stop > b_start");
        }
        self.times.build()?;
        self.cce.to_cce()?;
        Ok(())
    }

    pub fn b_values(&self) -> Vec<f64> {
        (0..self.b_points)
            .map(|i| {
                self.b_start_gauss
                    + (self.b_stop_gauss - self.b_start_gauss) * i as f64
                        / (self.b_points - 1) as f64
            })
            .collect()
    }
}

/// Field-by-field constants override. Absent fields keep their defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConstantsOverride {
    pub mu0_over_4pi: Option<f64>,
    pub planck_h: Option<f64>,
    pub gamma_e_nv_mhz_per_g: Option<f64>,
    pub gamma_n_c13_khz_per_g: Option<f64>,
    pub d_zfs_ghz: Option<f64>,
    pub gamma_e_free_rad_s_t: Option<f64>,
    pub gamma_e_star_gaas_rad_s_t: Option<f64>,
    pub diamond_lattice_nm: Option<f64>,
    pub gaas_lattice_nm: Option<f64>,
}

impl ConstantsOverride {
    pub fn apply(&self, base: &PhysicalConstants) -> PhysicalConstants {
        let mut c = base.clone();
        macro_rules! set {
            ($f:ident) => {
                if let Some(v) = self.$f {
                    c.$f = v;
                }
            };
        }
        set!(mu0_over_4pi);
        set!(planck_h);
        set!(gamma_e_nv_mhz_per_g);
        set!(gamma_n_c13_khz_per_g);
        set!(d_zfs_ghz);
        set!(gamma_e_free_rad_s_t);
        set!(gamma_e_star_gaas_rad_s_t);
        set!(diamond_lattice_nm);
        set!(gaas_lattice_nm);
        c
    }
}

pub fn load_constants(path: Option<&Path>) -> anyhow::Result<PhysicalConstants> {
    let base = PhysicalConstants::default();
    match path {
        None => Ok(base),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading constants {}", p.display()))?;
            let over: ConstantsOverride =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            Ok(over.apply(&base))
        }
    }
}

/// SHA-256 of the serialized configuration, used to stamp outputs.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_vec(cfg).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(&json);
    let digest = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
