//! Cross-checks between independent evaluation paths: the cluster product at
//! full order, full diagonalization, the leap-frog integrator, and brute
//! force constructions.

mod common;

use cce_lab_core::cce::{
    cce_coherence, cluster_coherence, enumerate_clusters, CceConfig, ExpansionMode, PulseSequence,
};
use cce_lab_core::ensemble::{self, seeded_rng};
use cce_lab_core::exact;
use cce_lab_core::exec::{Executor, Serial};
use cce_lab_core::hamiltonians::cluster_hamiltonians;
use cce_lab_core::model::BathState;
use cce_lab_core::spinops::{expm_i, CVec, Cx};

use common::{max_dev, nv_test_system, time_grid};

fn full_order_config(n: usize) -> CceConfig {
    CceConfig {
        max_order: n,
        pair_cutoff_nm: 1e6,
        mode: ExpansionMode::Modified,
    }
}

#[test]
fn full_order_cce_equals_exact_diagonalization() {
    let times = time_grid(2.0, 40);
    for seed in [1, 2, 3] {
        for n in [2, 3, 4] {
            for b in [0.0, 0.1] {
                let sys = nv_test_system(seed * 100 + n as u64, n, b, 100.0);
                let state = ensemble::min_overhauser_state(&sys);
                for seq in [PulseSequence::Fid, PulseSequence::HahnEcho] {
                    let cce = cce_coherence(
                        &sys,
                        &state,
                        &seq,
                        &times,
                        &full_order_config(n),
                        &Serial,
                    )
                    .unwrap();
                    let ex = exact::exact_coherence(&sys, &state, &seq, &times).unwrap();
                    let dev = max_dev(cce.top(), &ex);
                    assert!(dev < 1e-8, "seed {seed} n {n} B {b} {}: dev {dev:.2e}", seq.name());
                }
            }
        }
    }
}

#[test]
fn leapfrog_agrees_with_diagonalization() {
    // The scheme's phase dispersion grows as T lambda^3 dt^2, so keep the
    // conditional splitting modest and the step tight.
    let times = time_grid(0.8, 9);
    let sys = nv_test_system(7, 3, 0.0, 20.0);
    let state = BathState::uniform_up(3);
    for seq in [
        PulseSequence::Fid,
        PulseSequence::HahnEcho,
        PulseSequence::RotaryEcho {
            switch_times_ms: vec![0.2, 0.5],
        },
    ] {
        let eig = exact::exact_coherence(&sys, &state, &seq, &times).unwrap();
        let lf = exact::exact_coherence_leapfrog(&sys, &state, &seq, &times, 5e-4).unwrap();
        let dev = max_dev(&eig, &lf);
        assert!(dev < 1e-4, "{}: dev {dev:.2e}", seq.name());
    }
}

#[test]
fn single_spin_fid_matches_closed_form() {
    // One bath spin, no Zeeman, no partner: the conditional Hamiltonians are
    // diagonal in the hyperfine eigenbasis, so the FID is a pure phase
    // exp(i E(h_M) t) with |L| = 1.
    let sys = nv_test_system(11, 1, 0.0, 100.0);
    let state = BathState::uniform_up(1);
    let h_m = sys.overhauser_of_state(&state).unwrap();
    let e_m = sys.energy.splitting_khz(h_m);
    let times = time_grid(1.0, 17);
    let vals = exact::exact_coherence(&sys, &state, &PulseSequence::Fid, &times).unwrap();
    for (&t, v) in times.iter().zip(&vals) {
        let expect = cce_lab_core::spinops::cis(cce_lab_core::TWO_PI * e_m * t);
        assert!((v - expect).norm() < 1e-10, "t {t}");
    }
}

#[test]
fn cluster_enumeration_matches_brute_force() {
    let sys = nv_test_system(23, 12, 0.0, 100.0);
    let cutoff = 0.8;
    let max_order = 3;
    let fast = enumerate_clusters(&sys, max_order, cutoff);

    let n = sys.len();
    let dist = |i: usize, j: usize| {
        let a = sys.sites[i].position_nm;
        let b = sys.sites[j].position_nm;
        let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    };
    let mut brute: Vec<Vec<u32>> = Vec::new();
    for mask in 1u32..(1 << n) {
        let members: Vec<u32> = (0..n as u32).filter(|b| mask & (1 << b) != 0).collect();
        if members.len() > max_order {
            continue;
        }
        let clique = members.iter().enumerate().all(|(k, &i)| {
            members[k + 1..]
                .iter()
                .all(|&j| dist(i as usize, j as usize) <= cutoff)
        });
        if clique {
            brute.push(members);
        }
    }
    brute.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    assert_eq!(fast, brute);
    assert!(fast.iter().any(|c| c.len() == 2), "geometry has no pairs");
}

#[test]
fn conditional_diagonal_difference_is_cluster_energy() {
    // H+ - H0 must be diagonal, and its entries must match the frozen-energy
    // evaluation at the decoded labels.
    let sys = nv_test_system(31, 4, 0.07, 120.0);
    let mut rng = seeded_rng(5);
    let state = ensemble::sample_bath_state(&sys, &mut rng);
    let cluster: Vec<u32> = vec![0, 2, 3];
    let ch = cluster_hamiltonians(&sys, &state, &cluster).unwrap();
    let diff = &ch.h_plus - &ch.h_zero;
    for r in 0..ch.dim() {
        for c in 0..ch.dim() {
            if r != c {
                assert!(diff[(r, c)].norm() < 1e-12);
            }
        }
    }
    for idx in 0..ch.dim() {
        let mut labels = vec![0i8; cluster.len()];
        let mut rem = idx;
        for k in (0..cluster.len()).rev() {
            let d = ch.dims[k];
            let digit = rem % d;
            rem /= d;
            labels[k] = (sys.sites[cluster[k] as usize].spin_2x as i64 - 2 * digit as i64) as i8;
        }
        let e = ch.frozen_energy_khz(&labels).unwrap();
        // UpperOnly split: upper - lower = E.
        let got = diff[(idx, idx)].re / cce_lab_core::TWO_PI;
        assert!((got - e).abs() < 1e-9, "idx {idx}: {got} vs {e}");
    }
    // Consistency with the state's own labels.
    let h_m = sys.overhauser_of_state(&state).unwrap();
    let state_labels: Vec<i8> = cluster
        .iter()
        .map(|&j| state.labels_2m[j as usize])
        .collect();
    let e_state = ch.frozen_energy_khz(&state_labels).unwrap();
    assert!((e_state - sys.energy.splitting_khz(h_m)).abs() < 1e-9);
}

#[test]
fn rotary_cluster_matches_brute_force_segment_product() {
    let sys = nv_test_system(43, 2, 0.02, 150.0);
    let state = BathState::uniform_up(2);
    let ch = cluster_hamiltonians(&sys, &state, &[0, 1]).unwrap();
    let switches = vec![0.11, 0.31];
    let t = 0.5;
    let fast = cluster_coherence(
        &sys,
        &state,
        &[0, 1],
        &PulseSequence::RotaryEcho {
            switch_times_ms: switches.clone(),
        },
        &[t],
    )
    .unwrap()[0];

    // Brute force: time-ordered dense propagator products for both chains.
    let seg = |h: &cce_lab_core::spinops::CMat, dt: f64| expm_i(h, dt, -1.0).unwrap();
    let mut edges = vec![0.0];
    edges.extend(switches.iter().copied());
    edges.push(t);
    let mut ket_u = cce_lab_core::spinops::identity(4);
    let mut bra_u = cce_lab_core::spinops::identity(4);
    for (k, w) in edges.windows(2).enumerate() {
        let dt = w[1] - w[0];
        let (kh, bh) = if k % 2 == 0 {
            (&ch.h_zero, &ch.h_plus)
        } else {
            (&ch.h_plus, &ch.h_zero)
        };
        ket_u = seg(kh, dt) * ket_u;
        bra_u = seg(bh, dt) * bra_u;
    }
    let mut v0 = CVec::zeros(4);
    v0[ch.initial_index] = Cx::new(1.0, 0.0);
    let brute = (bra_u * &v0).dotc(&(ket_u * &v0));
    assert!((fast - brute).norm() < 1e-10, "{fast} vs {brute}");
}

#[test]
fn original_mode_matches_modified_far_from_clock_transition() {
    // With couplings orders of magnitude below the gap, the second-order
    // expansion is essentially exact.
    let mut sys = nv_test_system(17, 4, 0.0, 100.0);
    for site in &mut sys.sites {
        site.strength_khz *= 1e-4;
    }
    let state = BathState::uniform_up(4);
    let times = time_grid(2.0, 21);
    let cfg_mod = full_order_config(2);
    let cfg_orig = CceConfig {
        mode: ExpansionMode::Original,
        ..cfg_mod.clone()
    };
    let a = cce_coherence(&sys, &state, &PulseSequence::HahnEcho, &times, &cfg_mod, &Serial)
        .unwrap();
    let b = cce_coherence(&sys, &state, &PulseSequence::HahnEcho, &times, &cfg_orig, &Serial)
        .unwrap();
    let dev = max_dev(a.top(), b.top());
    assert!(dev < 1e-8, "dev {dev:.2e}");
}

#[test]
fn ensemble_average_matches_direct_enumeration() {
    let sys = nv_test_system(53, 3, 0.05, 100.0);
    let times = time_grid(1.5, 11);
    let cfg = full_order_config(3);
    let ens = ensemble::EnsembleConfig {
        n_states: 1,
        exact_sites: 3,
        seed: 9,
    };
    let avg = ensemble::ensemble_average(
        &sys,
        &PulseSequence::HahnEcho,
        &times,
        &cfg,
        &ens,
        &Serial,
    )
    .unwrap();

    // Direct mean over all 8 product states via the exact solver.
    let mut direct = vec![Cx::new(0.0, 0.0); times.len()];
    for mask in 0..8u8 {
        let labels: Vec<i8> = (0..3).map(|b| if mask & (1 << b) != 0 { 1 } else { -1 }).collect();
        let state = BathState { labels_2m: labels };
        let vals = exact::exact_coherence(&sys, &state, &PulseSequence::HahnEcho, &times).unwrap();
        for (d, v) in direct.iter_mut().zip(&vals) {
            *d += *v / 8.0;
        }
    }
    let dev = max_dev(&avg, &direct);
    assert!(dev < 1e-8, "dev {dev:.2e}");

    // Triangle inequality: |mean| cannot exceed the max pure-state magnitude.
    for (ti, v) in avg.iter().enumerate() {
        let mut max_pure = 0.0f64;
        for mask in 0..8u8 {
            let labels: Vec<i8> =
                (0..3).map(|b| if mask & (1 << b) != 0 { 1 } else { -1 }).collect();
            let state = BathState { labels_2m: labels };
            let vals =
                exact::exact_coherence(&sys, &state, &PulseSequence::HahnEcho, &times).unwrap();
            max_pure = max_pure.max(vals[ti].norm());
        }
        assert!(v.norm() <= max_pure + 1e-12);
    }
}

/// Executor that evaluates work items in reverse order; results must still
/// come back in index order and match the serial product bitwise.
struct ReverseExec;

impl Executor for ReverseExec {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let mut rev: Vec<T> = (0..n).rev().map(&f).collect();
        rev.reverse();
        rev
    }
}

#[test]
fn result_is_bitwise_independent_of_evaluation_order() {
    let sys = nv_test_system(61, 6, 0.03, 100.0);
    let state = ensemble::min_overhauser_state(&sys);
    let times = time_grid(2.0, 25);
    let cfg = CceConfig {
        max_order: 3,
        pair_cutoff_nm: 1.5,
        mode: ExpansionMode::Modified,
    };
    let a = cce_coherence(&sys, &state, &PulseSequence::HahnEcho, &times, &cfg, &Serial).unwrap();
    let b =
        cce_coherence(&sys, &state, &PulseSequence::HahnEcho, &times, &cfg, &ReverseExec).unwrap();
    for (x, y) in a.top().iter().zip(b.top()) {
        assert!(x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits());
    }
}

#[test]
fn static_noise_echo_is_exact() {
    // Zero Zeeman and infinitely dilute pairs: the Hahn echo refocuses the
    // static Overhauser shift exactly.
    let mut sys = nv_test_system(71, 4, 0.0, 100.0);
    for site in &mut sys.sites {
        site.zeeman_khz.fill(Cx::new(0.0, 0.0));
    }
    // Push sites far apart so the dipolar pair couplings vanish.
    for (j, site) in sys.sites.iter_mut().enumerate() {
        let r = site.position_nm;
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        let scale = 1e4 * (j as f64 + 1.0) / norm;
        site.position_nm = [r[0] * scale, r[1] * scale, r[2] * scale];
    }
    let state = BathState::uniform_up(4);
    let times = time_grid(5.0, 21);
    let vals = exact::exact_coherence(&sys, &state, &PulseSequence::HahnEcho, &times).unwrap();
    for v in &vals {
        assert!((v.norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn gaas_magic_angle_pair_contributes_unity() {
    use cce_lab_core::geometry::{BathScenario, DotEnvelope, Species, SpinBath, SpinSite};
    use cce_lab_core::scenario::dqd_system;
    let constants = cce_lab_core::constants::PhysicalConstants::default();
    let env = DotEnvelope {
        l_z_nm: 6.0,
        rho0_nm: 30.0,
    };
    // Two Ga69 in dot 1 at the magic angle from each other, one As75 in dot 2.
    let ct: f64 = (1.0f64 / 3.0).sqrt();
    let st = (1.0 - ct * ct).sqrt();
    let mk = |sp: Species, g: f64, p: [f64; 3]| SpinSite {
        position_nm: p,
        species: sp,
        gamma_khz_per_g: cce_lab_core::constants::PhysicalConstants::gamma_khz_per_g(g),
        spin_2x: 3,
    };
    let r = 0.6;
    let b1 = SpinBath::new(
        vec![
            mk(Species::Ga69, 6.44, [1.0, 0.0, 0.0]),
            mk(Species::Ga69, 6.44, [1.0 + r * st, 0.0, r * ct]),
        ],
        BathScenario::GaasDot,
        1,
    )
    .unwrap();
    let b2 = SpinBath::new(vec![mk(Species::As75, 4.60, [2.0, 2.0, 0.1])], BathScenario::GaasDot, 2)
        .unwrap();
    let sys = dqd_system(&constants, &b1, &b2, -0.24, 1.0, &env).unwrap();
    let state = BathState::uniform_up(3);
    let times = time_grid(0.2, 9);
    let cfg = full_order_config(2);
    let res =
        cce_coherence(&sys, &state, &PulseSequence::HahnEcho, &times, &cfg, &Serial).unwrap();
    // All pair correlations are unity here (magic angle kills the homo pair,
    // cross-dot pairs never cluster), so CCE-2 equals CCE-1 equals 1.
    for (a, b) in res.order(1).iter().zip(res.order(2)) {
        assert!((a - b).norm() < 1e-10);
        assert!((a - Cx::new(1.0, 0.0)).norm() < 1e-10);
    }
}
