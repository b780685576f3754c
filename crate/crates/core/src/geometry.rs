//! Randomized spin-bath geometries.
//!
//! Diamond-lattice 13C baths around an NV center and zincblende isotope baths
//! inside a GaAs dot envelope. Generation is deterministic per 64-bit seed:
//! lattice candidates are enumerated in a fixed integer scan order and the
//! generator is consumed once per candidate decision, so identical inputs give
//! bit-identical baths.

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::constants::PhysicalConstants;
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    C13,
    As75,
    Ga69,
    Ga71,
    Generic,
}

impl Species {
    pub fn name(&self) -> &'static str {
        match self {
            Species::C13 => "C13",
            Species::As75 => "As75",
            Species::Ga69 => "Ga69",
            Species::Ga71 => "Ga71",
            Species::Generic => "Generic",
        }
    }

    pub fn parse(s: &str) -> Option<Species> {
        Some(match s {
            "C13" => Species::C13,
            "As75" => Species::As75,
            "Ga69" => Species::Ga69,
            "Ga71" => Species::Ga71,
            "Generic" => Species::Generic,
            _ => return None,
        })
    }
}

/// One bath nucleus.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSite {
    /// Position relative to the central spin, nm. Never the origin.
    pub position_nm: [f64; 3],
    pub species: Species,
    /// Gyromagnetic ratio as ordinary frequency, kHz per Gauss.
    pub gamma_khz_per_g: f64,
    /// Twice the spin quantum number.
    pub spin_2x: u32,
}

impl SpinSite {
    pub fn distance_nm(&self) -> f64 {
        let [x, y, z] = self.position_nm;
        libm::sqrt(x * x + y * y + z * z)
    }

    pub fn local_dim(&self) -> usize {
        self.spin_2x as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathScenario {
    NvDiamond,
    GaasDot,
    Generic,
}

impl BathScenario {
    pub fn name(&self) -> &'static str {
        match self {
            BathScenario::NvDiamond => "nv-diamond",
            BathScenario::GaasDot => "gaas-dot",
            BathScenario::Generic => "generic",
        }
    }

    pub fn parse(s: &str) -> Option<BathScenario> {
        Some(match s {
            "nv-diamond" => BathScenario::NvDiamond,
            "gaas-dot" => BathScenario::GaasDot,
            "generic" => BathScenario::Generic,
            _ => return None,
        })
    }
}

/// Immutable bath: sites sorted by distance from the origin ascending, ties
/// broken lexicographically by position, so "the nearest k spins" is
/// well-defined and stable.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBath {
    pub sites: Vec<SpinSite>,
    pub scenario: BathScenario,
    pub rng_seed: u64,
}

impl SpinBath {
    pub fn new(mut sites: Vec<SpinSite>, scenario: BathScenario, rng_seed: u64) -> Result<Self> {
        if sites.is_empty() {
            return Err(CoreError::EmptyBath);
        }
        sites.sort_by(|a, b| {
            a.distance_nm()
                .total_cmp(&b.distance_nm())
                .then(a.position_nm[0].total_cmp(&b.position_nm[0]))
                .then(a.position_nm[1].total_cmp(&b.position_nm[1]))
                .then(a.position_nm[2].total_cmp(&b.position_nm[2]))
        });
        Ok(SpinBath {
            sites,
            scenario,
            rng_seed,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Keep only the first `n` sites in distance order.
    pub fn truncated(&self, n: usize) -> SpinBath {
        SpinBath {
            sites: self.sites.iter().take(n).cloned().collect(),
            scenario: self.scenario,
            rng_seed: self.rng_seed,
        }
    }
}

/// Dot envelope: hard-wall confinement of width `l_z_nm` along z and a
/// parabolic (Fock-Darwin) lateral confinement of radius `rho0_nm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotEnvelope {
    pub l_z_nm: f64,
    pub rho0_nm: f64,
}

impl DotEnvelope {
    pub fn validate(&self) -> Result<()> {
        if self.l_z_nm > 0.0 && self.rho0_nm > 0.0 {
            Ok(())
        } else {
            Err(CoreError::InvalidArgument(
                "envelope dimensions must be positive".into(),
            ))
        }
    }
}

/// |f(r)|^2 in nm^-3 for the ground-state envelope
/// f = sqrt(2/L_z) cos(pi z / L_z) * exp(-rho^2 / 2 rho_0^2) / (sqrt(pi) rho_0),
/// zero outside |z| <= L_z / 2.
pub fn envelope_density(r_nm: [f64; 3], envelope: &DotEnvelope) -> f64 {
    let [x, y, z] = r_nm;
    let lz = envelope.l_z_nm;
    let rho0 = envelope.rho0_nm;
    if libm::fabs(z) >= lz / 2.0 {
        return 0.0;
    }
    let c = libm::cos(core::f64::consts::PI * z / lz);
    let rho2 = x * x + y * y;
    (2.0 / lz) * c * c * libm::exp(-rho2 / (rho0 * rho0)) / (core::f64::consts::PI * rho0 * rho0)
}

fn uniform_f64(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Settings for NV-center diamond bath generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiamondBathConfig {
    pub seed: u64,
    /// 13C occupation probability per carbon site (natural abundance 0.011).
    pub abundance: f64,
    /// Ball radius around the vacancy, nm. Capped at 6 nm.
    pub radius_nm: f64,
    /// Sites closer than this to the vacancy are excluded, nm.
    pub exclusion_nm: f64,
}

impl DiamondBathConfig {
    pub fn new(seed: u64, abundance: f64, radius_nm: f64) -> Self {
        DiamondBathConfig {
            seed,
            abundance,
            radius_nm,
            exclusion_nm: 0.5,
        }
    }
}

const FCC_OFFSETS: [[f64; 3]; 4] = [
    [0.0, 0.0, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
    [0.5, 0.5, 0.0],
];

/// Orthonormal frame with z along the NV axis [111].
fn nv_frame() -> [[f64; 3]; 3] {
    let s2 = 1.0 / libm::sqrt(2.0);
    let s3 = 1.0 / libm::sqrt(3.0);
    let s6 = 1.0 / libm::sqrt(6.0);
    [
        [s2, -s2, 0.0],
        [s6, s6, -2.0 * s6],
        [s3, s3, s3],
    ]
}

fn rotate(frame: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    let dot = |a: &[f64; 3]| a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
    [dot(&frame[0]), dot(&frame[1]), dot(&frame[2])]
}

/// Enumerate diamond-lattice carbon positions inside the radius (crystal
/// frame, vacancy at a lattice site at the origin), in a fixed scan order.
fn diamond_candidates(a_nm: f64, radius_nm: f64, exclusion_nm: f64) -> Vec<[f64; 3]> {
    let n = (radius_nm / a_nm) as i64 + 2;
    let mut out = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            for k in -n..=n {
                for basis in 0..8 {
                    let off = FCC_OFFSETS[basis % 4];
                    let shift = if basis < 4 { 0.0 } else { 0.25 };
                    let p = [
                        a_nm * (i as f64 + off[0] + shift),
                        a_nm * (j as f64 + off[1] + shift),
                        a_nm * (k as f64 + off[2] + shift),
                    ];
                    let r = libm::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
                    if r > 1e-9 && r >= exclusion_nm && r <= radius_nm {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Generate a 13C bath on the diamond lattice around the vacancy. Positions
/// are returned in the NV frame (z along [111]).
pub fn generate_diamond_bath(
    constants: &PhysicalConstants,
    config: &DiamondBathConfig,
) -> Result<SpinBath> {
    if !(0.0..=1.0).contains(&config.abundance) {
        return Err(CoreError::InvalidArgument(
            "abundance must lie in [0, 1]".into(),
        ));
    }
    if !(config.radius_nm > 0.0 && config.radius_nm <= 6.0) {
        return Err(CoreError::InvalidArgument(
            "radius must lie in (0, 6] nm".into(),
        ));
    }
    if config.exclusion_nm < 0.0 {
        return Err(CoreError::InvalidArgument(
            "exclusion radius must be non-negative".into(),
        ));
    }
    let a = constants.diamond_lattice_nm;
    let frame = nv_frame();
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut sites = Vec::new();
    for p in diamond_candidates(a, config.radius_nm, config.exclusion_nm) {
        if uniform_f64(&mut rng) < config.abundance {
            sites.push(SpinSite {
                position_nm: rotate(&frame, p),
                species: Species::C13,
                gamma_khz_per_g: constants.gamma_n_c13_khz_per_g,
                spin_2x: 1,
            });
        }
    }
    SpinBath::new(sites, BathScenario::NvDiamond, config.seed)
}

/// Settings for GaAs dot bath generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaasBathConfig {
    pub seed: u64,
    pub envelope: DotEnvelope,
    /// Sites are kept where |f|^2 exceeds this fraction of its maximum.
    pub density_cutoff: f64,
}

/// Generate the nuclear bath of one GaAs dot: As75 on the anion sublattice,
/// Ga69/Ga71 on the cation sublattice with their natural abundances.
/// Positions are dot-local (dot center at the origin).
pub fn generate_gaas_bath(
    constants: &PhysicalConstants,
    config: &GaasBathConfig,
) -> Result<SpinBath> {
    config.envelope.validate()?;
    if !(config.density_cutoff > 0.0 && config.density_cutoff <= 1.0) {
        return Err(CoreError::InvalidArgument(
            "density cutoff must lie in (0, 1]".into(),
        ));
    }
    let a = constants.gaas_lattice_nm;
    let env = &config.envelope;
    let peak = envelope_density([0.0, 0.0, 0.0], env);
    let rho_max = env.rho0_nm * libm::sqrt(libm::log(1.0 / config.density_cutoff)).max(1e-3);
    let n_xy = (rho_max / a) as i64 + 2;
    let n_z = (env.l_z_nm / 2.0 / a) as i64 + 2;

    let ga69 = constants.isotope(Species::Ga69).expect("Ga69 params");
    let ga71 = constants.isotope(Species::Ga71).expect("Ga71 params");
    let as75 = constants.isotope(Species::As75).expect("As75 params");

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut sites = Vec::new();
    for i in -n_xy..=n_xy {
        for j in -n_xy..=n_xy {
            for k in -n_z..=n_z {
                for basis in 0..8 {
                    let off = FCC_OFFSETS[basis % 4];
                    let anion = basis < 4;
                    let shift = if anion { 0.0 } else { 0.25 };
                    let p = [
                        a * (i as f64 + off[0] + shift),
                        a * (j as f64 + off[1] + shift),
                        a * (k as f64 + off[2] + shift),
                    ];
                    let rel = envelope_density(p, env) / peak;
                    if rel < config.density_cutoff {
                        continue;
                    }
                    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                    if r2 < 1e-18 {
                        // The dot center is not a spin site; keeps the
                        // origin-excluded invariant. One lattice point lost
                        // out of ~1e4 is immaterial.
                        continue;
                    }
                    let iso = if anion {
                        as75
                    } else if uniform_f64(&mut rng) < ga69.abundance {
                        ga69
                    } else {
                        ga71
                    };
                    sites.push(SpinSite {
                        position_nm: p,
                        species: iso.species,
                        gamma_khz_per_g: PhysicalConstants::gamma_khz_per_g(iso.gamma_1e7_rad_s_t),
                        spin_2x: 3,
                    });
                }
            }
        }
    }
    SpinBath::new(sites, BathScenario::GaasDot, config.seed)
}

/// Brute-force nearest-neighbor distance among a set of positions.
pub fn min_pair_distance(positions: &[[f64; 3]]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = [
                positions[i][0] - positions[j][0],
                positions[i][1] - positions[j][1],
                positions[i][2] - positions[j][2],
            ];
            let r = libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
            best = Some(best.map_or(r, |b: f64| b.min(r)));
        }
    }
    best
}

/// Human-readable summary used by the CLI.
pub fn bath_summary(bath: &SpinBath) -> String {
    use alloc::format;
    let nearest = bath
        .sites
        .first()
        .map(|s| s.distance_nm())
        .unwrap_or(f64::NAN);
    format!(
        "N = {}, scenario = {}, seed = {}, nearest site at {:.3} nm",
        bath.len(),
        bath.scenario.name(),
        bath.rng_seed,
        nearest
    )
}
