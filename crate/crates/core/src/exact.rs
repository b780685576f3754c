//! Small-bath exact references.
//!
//! Two independent oracles: full diagonalization of the conditioned
//! Hamiltonians on the whole bath (the cluster machinery with one cluster
//! containing every site), and an explicit three-point leap-frog integrator
//! that never diagonalizes anything. A third check drops the conditioning
//! approximation entirely and evolves the central spin as a dynamical degree
//! of freedom in a fixed (static) basis.

use alloc::vec::Vec;

use crate::cce::{evaluate_cluster, PulseSequence};
use crate::hamiltonians::{cluster_hamiltonians, SpinSystem};
use crate::model::{BathState, SplitStyle};
use crate::spinops::{kron, CMat, CVec, Cx, HermitianEigen};
use crate::{CoreError, Result, TWO_PI};

/// Largest Hilbert-space dimension any assembly routine will touch.
pub const DIM_CAP: usize = 1 << 16;

fn full_cluster(system: &SpinSystem) -> Result<Vec<u32>> {
    if system.is_empty() {
        return Err(CoreError::EmptyBath);
    }
    let dim: usize = system.sites.iter().map(|s| s.dim).product();
    if dim > DIM_CAP {
        return Err(CoreError::DimensionCap { dim, cap: DIM_CAP });
    }
    Ok((0..system.len() as u32).collect())
}

/// Exact coherence by full diagonalization of the conditioned pair of
/// Hamiltonians on the entire bath.
pub fn exact_coherence(
    system: &SpinSystem,
    state: &BathState,
    sequence: &PulseSequence,
    times_ms: &[f64],
) -> Result<Vec<Cx>> {
    let cluster = full_cluster(system)?;
    let ch = cluster_hamiltonians(system, state, &cluster)?;
    evaluate_cluster(&ch, sequence, times_ms)
}

/// Upper bound on the spectral radius of a Hermitian matrix: the maximum
/// absolute row sum.
pub fn spectral_bound(h: &CMat) -> f64 {
    let mut bound = 0.0f64;
    for i in 0..h.nrows() {
        let mut row = 0.0;
        for j in 0..h.ncols() {
            row += h[(i, j)].norm();
        }
        bound = bound.max(row);
    }
    bound
}

/// Evolve |psi> under H (rad/ms) for `t_ms` with the explicit three-point
/// scheme psi(t + dt) = psi(t - dt) - 2 i dt H psi(t). The backward point is
/// bootstrapped with a fourth-order Taylor step. Stability requires
/// dt < 1 / ||H||; `dt_ms` is an upper bound on the step actually used (the
/// interval is split into a whole number of steps).
pub fn leapfrog_evolve(h: &CMat, psi0: &CVec, t_ms: f64, dt_ms: f64) -> Result<CVec> {
    if !(dt_ms > 0.0) || !t_ms.is_finite() || t_ms < 0.0 {
        return Err(CoreError::InvalidArgument(
            "leapfrog needs t >= 0 and dt > 0".into(),
        ));
    }
    let bound = spectral_bound(h).max(1e-300);
    if dt_ms >= 1.0 / bound {
        return Err(CoreError::UnstableTimeStep {
            dt_ms,
            bound_ms: 1.0 / bound,
        });
    }
    if t_ms == 0.0 {
        return Ok(psi0.clone());
    }
    let steps = libm::ceil(t_ms / dt_ms) as usize;
    let dt = t_ms / steps as f64;

    let mi_dt = Cx::new(0.0, -dt);
    // Taylor-4 step backward: psi(-dt).
    let taylor = |sign: f64, v: &CVec| -> CVec {
        let mut acc = v.clone();
        let mut term = v.clone();
        let z = Cx::new(0.0, -sign * dt);
        for k in 1..=4 {
            term = (h * &term).scale(1.0 / k as f64) * z;
            acc += &term;
        }
        acc
    };
    let mut prev = taylor(-1.0, psi0);
    let mut curr = psi0.clone();
    for _ in 0..steps {
        let next = &prev + (h * &curr) * (mi_dt * 2.0);
        prev = curr;
        curr = next;
    }
    Ok(curr)
}

/// Exact coherence via leap-frog integration of both conditional branches.
/// Independent of any eigendecomposition. The step is chosen as
/// `safety / max(||H+||, ||H0||)`.
pub fn exact_coherence_leapfrog(
    system: &SpinSystem,
    state: &BathState,
    sequence: &PulseSequence,
    times_ms: &[f64],
    safety: f64,
) -> Result<Vec<Cx>> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(CoreError::InvalidArgument(
            "leapfrog safety factor must lie in (0, 1)".into(),
        ));
    }
    sequence.validate()?;
    let cluster = full_cluster(system)?;
    let ch = cluster_hamiltonians(system, state, &cluster)?;
    let bound = spectral_bound(&ch.h_plus).max(spectral_bound(&ch.h_zero));
    let dt = safety / bound.max(1e-300);
    let mut v0 = CVec::zeros(ch.dim());
    v0[ch.initial_index] = Cx::new(1.0, 0.0);

    let mut out = Vec::with_capacity(times_ms.len());
    match sequence {
        PulseSequence::Fid => {
            for &t in times_ms {
                let ket = leapfrog_evolve(&ch.h_zero, &v0, t, dt)?;
                let bra = leapfrog_evolve(&ch.h_plus, &v0, t, dt)?;
                out.push(bra.dotc(&ket));
            }
        }
        PulseSequence::HahnEcho => {
            for &t in times_ms {
                let tau = t / 2.0;
                let ket = leapfrog_evolve(&ch.h_plus, &leapfrog_evolve(&ch.h_zero, &v0, tau, dt)?, tau, dt)?;
                let bra = leapfrog_evolve(&ch.h_zero, &leapfrog_evolve(&ch.h_plus, &v0, tau, dt)?, tau, dt)?;
                out.push(bra.dotc(&ket));
            }
        }
        PulseSequence::RotaryEcho { switch_times_ms } => {
            for &t in times_ms {
                let mut ket = v0.clone();
                let mut bra = v0.clone();
                let mut t0 = 0.0;
                let mut ket_zero_role = true;
                for &s in switch_times_ms.iter().take_while(|&&s| s <= t) {
                    let (kh, bh) = if ket_zero_role {
                        (&ch.h_zero, &ch.h_plus)
                    } else {
                        (&ch.h_plus, &ch.h_zero)
                    };
                    ket = leapfrog_evolve(kh, &ket, s - t0, dt)?;
                    bra = leapfrog_evolve(bh, &bra, s - t0, dt)?;
                    t0 = s;
                    ket_zero_role = !ket_zero_role;
                }
                let (kh, bh) = if ket_zero_role {
                    (&ch.h_zero, &ch.h_plus)
                } else {
                    (&ch.h_plus, &ch.h_zero)
                };
                ket = leapfrog_evolve(kh, &ket, t - t0, dt)?;
                bra = leapfrog_evolve(bh, &bra, t - t0, dt)?;
                out.push(bra.dotc(&ket));
            }
        }
    }
    Ok(out)
}

/// FID of the full sigma-model in which the central spin is dynamical:
/// H = 2 pi [ (eps/2) sigma_x + (1/2) sigma_z (base + sum_j strength_j D_j)
/// + 1 (x) H_bath ], with D_j the diagonal projection operator of site j in
/// its working basis. The initial state is the equal superposition of the
/// dressed levels at the mean field times |M>, and the returned coherence is
/// 2 <alpha(t)|beta(t)> between the upper and lower dressed branches.
///
/// Quantifies the static-basis (conditional-evolution) approximation; it is
/// meaningful for the symmetric-split scenarios.
pub fn static_basis_check(
    system: &SpinSystem,
    state: &BathState,
    times_ms: &[f64],
) -> Result<Vec<Cx>> {
    if system.energy.style != SplitStyle::Symmetric {
        return Err(CoreError::InvalidArgument(
            "static-basis check requires the symmetric level split".into(),
        ));
    }
    let cluster = full_cluster(system)?;
    let ch = cluster_hamiltonians(system, state, &cluster)?;
    let d = ch.dim();
    if 2 * d > DIM_CAP {
        return Err(CoreError::DimensionCap {
            dim: 2 * d,
            cap: DIM_CAP,
        });
    }

    // Bath part and Overhauser operator, kHz, from the conditioned pair:
    // h_plus - h_zero = 2 pi E(h) diag, and (h_plus + h_zero)/2 = 2 pi H_b
    // only when the split is symmetric; rebuild the pieces directly instead.
    let mut h_bath = ch.h_zero.clone();
    let mut overhauser = CMat::zeros(d, d);
    for idx in 0..d {
        let mut rem = idx;
        let mut h = ch.h_rest_khz;
        for (k, &dim_k) in ch.dims.iter().enumerate().rev() {
            let digit = rem % dim_k;
            rem /= dim_k;
            let site = &system.sites[cluster[k] as usize];
            let m = site.spin_2x as f64 / 2.0 - digit as f64;
            h += site.strength_khz * m;
        }
        let (_, e_lo) = system.energy.energies_khz(h);
        h_bath[(idx, idx)] -= Cx::new(TWO_PI * e_lo, 0.0);
        overhauser[(idx, idx)] = Cx::new(system.energy.base_khz + h, 0.0);
    }

    let eps = system.energy.epsilon_khz;
    let id2 = CMat::identity(2, 2);
    let mut sx = CMat::zeros(2, 2);
    sx[(0, 1)] = Cx::new(1.0, 0.0);
    sx[(1, 0)] = Cx::new(1.0, 0.0);
    let mut sz = CMat::zeros(2, 2);
    sz[(0, 0)] = Cx::new(1.0, 0.0);
    sz[(1, 1)] = Cx::new(-1.0, 0.0);

    let idb = CMat::identity(d, d);
    let h_full = kron(&sx, &idb).scale(TWO_PI * eps / 2.0)
        + kron(&sz, &overhauser).scale(TWO_PI / 2.0)
        + kron(&id2, &h_bath);

    // Dressed doublet at the mean field.
    let h_m = system.overhauser_of_state(state)?;
    let delta_m = system.energy.base_khz + h_m;
    let e_m = libm::sqrt(eps * eps + delta_m * delta_m);
    if e_m == 0.0 {
        return Err(CoreError::InvalidArgument(
            "static-basis check undefined at exact degeneracy".into(),
        ));
    }
    // Eigenvectors of (delta_m sz + eps sx)/2: angle th with cos th = delta/E.
    let th = libm::atan2(eps, delta_m);
    let (c, s) = (libm::cos(th / 2.0), libm::sin(th / 2.0));
    let up = [Cx::new(c, 0.0), Cx::new(s, 0.0)];
    let lo = [Cx::new(-s, 0.0), Cx::new(c, 0.0)];

    let mut psi0 = CVec::zeros(2 * d);
    let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
    for spin in 0..2 {
        let amp = (up[spin] + lo[spin]) * inv_sqrt2;
        psi0[spin * d + ch.initial_index] = amp;
    }

    let eig = HermitianEigen::new(&h_full)?;
    let mut out = Vec::with_capacity(times_ms.len());
    for &t in times_ms {
        let psi = eig.evolve(t, -1.0, &psi0);
        let mut alpha = CVec::zeros(d);
        let mut beta = CVec::zeros(d);
        for k in 0..d {
            alpha[k] = up[0].conj() * psi[k] + up[1].conj() * psi[d + k];
            beta[k] = lo[0].conj() * psi[k] + lo[1].conj() * psi[d + k];
        }
        out.push(alpha.dotc(&beta) * 2.0);
    }
    Ok(out)
}
