use cce_lab_core::constants::PhysicalConstants;
use cce_lab_core::ensemble::{seeded_rng, uniform_f64};
use cce_lab_core::geometry::{BathScenario, Species, SpinBath, SpinSite};
use cce_lab_core::hamiltonians::SpinSystem;
use cce_lab_core::scenario;

/// Random 13C positions in a spherical shell with a minimum pair separation,
/// so couplings stay bounded and reproducible.
pub fn random_c13_bath(seed: u64, n: usize) -> SpinBath {
    let mut rng = seeded_rng(seed);
    let mut positions: Vec<[f64; 3]> = Vec::new();
    while positions.len() < n {
        let r = 0.45 + 1.1 * uniform_f64(&mut rng);
        let cos_t = 2.0 * uniform_f64(&mut rng) - 1.0;
        let sin_t = (1.0 - cos_t * cos_t).sqrt();
        let phi = std::f64::consts::TAU * uniform_f64(&mut rng);
        let p = [
            r * sin_t * phi.cos(),
            r * sin_t * phi.sin(),
            r * cos_t,
        ];
        let ok = positions.iter().all(|q| {
            let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() > 0.35
        });
        if ok {
            positions.push(p);
        }
    }
    let sites = positions
        .into_iter()
        .map(|position_nm| SpinSite {
            position_nm,
            species: Species::C13,
            gamma_khz_per_g: 1.1,
            spin_2x: 1,
        })
        .collect();
    SpinBath::new(sites, BathScenario::NvDiamond, seed).unwrap()
}

pub fn nv_test_system(seed: u64, n: usize, b_gauss: f64, epsilon_khz: f64) -> SpinSystem {
    let constants = PhysicalConstants::default();
    let bath = random_c13_bath(seed, n);
    scenario::nv_system(&constants, &bath, b_gauss, epsilon_khz).unwrap()
}

pub fn time_grid(stop_ms: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| stop_ms * i as f64 / (points - 1) as f64)
        .collect()
}

pub fn max_dev(a: &[cce_lab_core::spinops::Cx], b: &[cce_lab_core::spinops::Cx]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
