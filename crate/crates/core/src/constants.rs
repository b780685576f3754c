//! Physical constants and material parameters.
//!
//! Defaults are the published values for the NV / diamond and GaAs systems;
//! every field can be overridden through the CLI constants file. Gyromagnetic
//! ratios are stored in the units they are usually quoted in and converted to
//! ordinary frequency (kHz per Gauss) where couplings are assembled.

use crate::geometry::Species;

/// Per-isotope parameters for the GaAs bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotopeParams {
    pub species: Species,
    /// Natural abundance on its sublattice, as a fraction.
    pub abundance: f64,
    /// Gyromagnetic ratio, units of 1e7 rad s^-1 T^-1.
    pub gamma_1e7_rad_s_t: f64,
    /// Electron density at the nucleus, units of 1e25 cm^-3.
    pub d_n_1e25_cm3: f64,
    /// Contact hyperfine constant, units of 1e9 rad s^-1.
    pub a_n_1e9_rad_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalConstants {
    /// mu_0 / 4 pi in SI (T m A^-1).
    pub mu0_over_4pi: f64,
    /// Planck constant, J s.
    pub planck_h: f64,
    /// NV electron gyromagnetic ratio, MHz per Gauss (ordinary frequency).
    pub gamma_e_nv_mhz_per_g: f64,
    /// 13C gyromagnetic ratio, kHz per Gauss (ordinary frequency).
    pub gamma_n_c13_khz_per_g: f64,
    /// NV zero-field splitting, GHz. Enters only validity discussions; it is
    /// never placed in a constructed matrix.
    pub d_zfs_ghz: f64,
    /// Free-electron gyromagnetic ratio, rad s^-1 T^-1.
    pub gamma_e_free_rad_s_t: f64,
    /// Effective electron gyromagnetic ratio in GaAs, rad s^-1 T^-1.
    pub gamma_e_star_gaas_rad_s_t: f64,
    /// Diamond cubic lattice constant, nm.
    pub diamond_lattice_nm: f64,
    /// GaAs zincblende lattice constant, nm.
    pub gaas_lattice_nm: f64,
    /// As75, Ga69, Ga71 in that order.
    pub gaas_isotopes: [IsotopeParams; 3],
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            mu0_over_4pi: 1.0e-7,
            planck_h: 6.62607015e-34,
            gamma_e_nv_mhz_per_g: -2.8,
            gamma_n_c13_khz_per_g: 1.1,
            d_zfs_ghz: 2.87,
            gamma_e_free_rad_s_t: -1.76e11,
            gamma_e_star_gaas_rad_s_t: 1.32e11,
            diamond_lattice_nm: 0.3567,
            gaas_lattice_nm: 0.563,
            gaas_isotopes: [
                IsotopeParams {
                    species: Species::As75,
                    abundance: 1.0,
                    gamma_1e7_rad_s_t: 4.60,
                    d_n_1e25_cm3: 9.8,
                    a_n_1e9_rad_s: 69.8,
                },
                IsotopeParams {
                    species: Species::Ga69,
                    abundance: 0.601,
                    gamma_1e7_rad_s_t: 6.44,
                    d_n_1e25_cm3: 5.8,
                    a_n_1e9_rad_s: 58.1,
                },
                IsotopeParams {
                    species: Species::Ga71,
                    abundance: 0.399,
                    gamma_1e7_rad_s_t: 8.18,
                    d_n_1e25_cm3: 5.8,
                    a_n_1e9_rad_s: 73.8,
                },
            ],
        }
    }
}

impl PhysicalConstants {
    /// Point-dipole coupling prefactor in kHz for gyromagnetic ratios in
    /// kHz/G (i.e. ordinary frequency) and a separation in nm:
    /// f = (mu0 h / 4 pi) g1 g2 / r^3.
    pub fn dipolar_prefactor_khz(&self, g1_khz_per_g: f64, g2_khz_per_g: f64, r_nm: f64) -> f64 {
        // Unit collection: (1e7 Hz/T per kHz/G)^2 * 1e27 nm^-3 -> m^-3, /1e3 Hz->kHz.
        let c = self.mu0_over_4pi * self.planck_h * 1e38;
        c * g1_khz_per_g * g2_khz_per_g / (r_nm * r_nm * r_nm)
    }

    /// kHz/G equivalent of a gyromagnetic ratio quoted in 1e7 rad s^-1 T^-1.
    pub fn gamma_khz_per_g(gamma_1e7_rad_s_t: f64) -> f64 {
        gamma_1e7_rad_s_t / crate::TWO_PI
    }

    pub fn isotope(&self, species: Species) -> Option<&IsotopeParams> {
        self.gaas_isotopes.iter().find(|p| p.species == species)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn electron_nuclear_prefactor_matches_hand_value() {
        let c = PhysicalConstants::default();
        // |gamma_e| = 2.8e3 kHz/G, gamma_n = 1.1 kHz/G, r = 0.77 nm: 44.7 kHz.
        let f = c.dipolar_prefactor_khz(2.8e3, 1.1, 0.77);
        assert!((f - 44.7).abs() < 0.1, "got {f}");
    }

    #[test]
    fn nuclear_nuclear_prefactor_is_sub_khz() {
        let c = PhysicalConstants::default();
        let f = c.dipolar_prefactor_khz(1.1, 1.1, 0.5);
        assert!(f > 0.04 && f < 0.1, "got {f}");
    }

    #[test]
    fn quoted_free_electron_gamma_consistent_with_nv_value() {
        // -2.8 MHz/G in angular units is about -1.76e11 rad/s/T.
        let angular = -2.8e10 * crate::TWO_PI;
        assert!((angular - (-1.76e11)).abs() / 1.76e11 < 0.005);
    }
}
