//! Cluster enumeration, per-cluster coherence, and the cluster-correlation
//! product.
//!
//! A cluster of order K contributes the correlation
//! L~_C = L_C / prod_{C' subset C} L~_{C'}, with the empty cluster carrying
//! the bare central-spin phase. Clusters are cliques of the distance graph
//! (every pair within the cutoff), so every subset of an enumerated cluster
//! is itself enumerated and the division recursion always has its factors.
//!
//! Raw cluster coherences are computed independently (and in parallel when a
//! parallel executor is supplied); the division and product passes run
//! serially in a canonical cluster order, which makes the output bitwise
//! independent of the worker count.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::exec::Executor;
use crate::hamiltonians::{cluster_hamiltonians, ClusterHamiltonians, SpinSystem};
use crate::model::BathState;
use crate::spinops::{CVec, Cx, HermitianEigen};
use crate::{CoreError, Result};

/// Magnitude below which dividing by a cluster correlation is refused.
pub const DIVISOR_FLOOR: f64 = 1e-12;

/// Free-evolution pulse sequence seen by the bath.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseSequence {
    /// Free induction decay: conditional evolution from 0 to t.
    Fid,
    /// Hahn echo of total duration t with the pi pulse at t/2.
    HahnEcho,
    /// Rotary echo: the conditional Hamiltonians swap roles at each switch
    /// time. No switches reduces to the FID.
    RotaryEcho { switch_times_ms: Vec<f64> },
}

impl PulseSequence {
    pub fn name(&self) -> &'static str {
        match self {
            PulseSequence::Fid => "fid",
            PulseSequence::HahnEcho => "hahn",
            PulseSequence::RotaryEcho { .. } => "rotary",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let PulseSequence::RotaryEcho { switch_times_ms } = self {
            let mut prev = 0.0;
            for &s in switch_times_ms {
                if !(s > prev) {
                    return Err(CoreError::InvalidArgument(
                        "rotary switch times must be positive and strictly increasing".into(),
                    ));
                }
                prev = s;
            }
        }
        Ok(())
    }
}

/// Which expansion of the central-spin energy the engine uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionMode {
    /// Exact conditional splitting (the modified expansion).
    Modified,
    /// Second-order expansion about the mean field, for comparison.
    Original,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CceConfig {
    /// Largest cluster size K.
    pub max_order: usize,
    /// Clique cutoff distance for cluster membership, nm.
    pub pair_cutoff_nm: f64,
    pub mode: ExpansionMode,
}

impl CceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 {
            return Err(CoreError::InvalidArgument("max_order must be >= 1".into()));
        }
        if !(self.pair_cutoff_nm > 0.0) {
            return Err(CoreError::InvalidArgument(
                "pair_cutoff_nm must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Coherence of every order 1..=max_order on a common time grid. Order k is
/// the product of all cluster correlations up to size k, including the bare
/// phase factor of the empty cluster.
#[derive(Debug, Clone)]
pub struct CceResult {
    pub times_ms: Vec<f64>,
    /// `order_curves[k - 1]` is the CCE-k coherence.
    pub order_curves: Vec<Vec<Cx>>,
    /// Number of non-empty clusters entering the product.
    pub cluster_count: usize,
}

impl CceResult {
    pub fn order(&self, k: usize) -> &[Cx] {
        &self.order_curves[k - 1]
    }

    pub fn top(&self) -> &[Cx] {
        self.order_curves.last().expect("at least one order")
    }
}

fn site_distance(system: &SpinSystem, i: usize, j: usize) -> f64 {
    let a = system.sites[i].position_nm;
    let b = system.sites[j].position_nm;
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
}

/// All cliques of the cutoff graph with 1..=max_order vertices, in canonical
/// order (ascending size, then lexicographic). Sites in different dots are
/// never clustered together.
pub fn enumerate_clusters(
    system: &SpinSystem,
    max_order: usize,
    cutoff_nm: f64,
) -> Vec<Vec<u32>> {
    let n = system.len();
    let mut adj: Vec<Vec<u32>> = alloc::vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if system.sites[i].dot == system.sites[j].dot
                && site_distance(system, i, j) <= cutoff_nm
            {
                adj[i].push(j as u32);
            }
        }
    }
    let mut out = Vec::new();
    let mut stack: Vec<u32> = Vec::new();
    for i in 0..n as u32 {
        stack.push(i);
        out.push(stack.clone());
        extend_clique(&adj, max_order, &mut stack, &adj[i as usize].clone(), &mut out);
        stack.pop();
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn extend_clique(
    adj: &[Vec<u32>],
    max_order: usize,
    stack: &mut Vec<u32>,
    candidates: &[u32],
    out: &mut Vec<Vec<u32>>,
) {
    if stack.len() == max_order {
        return;
    }
    for (k, &c) in candidates.iter().enumerate() {
        stack.push(c);
        out.push(stack.clone());
        // New candidates: later neighbors of c that are also candidates.
        let next: Vec<u32> = candidates[k + 1..]
            .iter()
            .copied()
            .filter(|x| adj[c as usize].binary_search(x).is_ok())
            .collect();
        extend_clique(adj, max_order, stack, &next, out);
        stack.pop();
    }
}

fn basis_vector(dim: usize, idx: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[idx] = Cx::new(1.0, 0.0);
    v
}

fn check_times(times_ms: &[f64]) -> Result<()> {
    let mut prev = -1.0;
    for &t in times_ms {
        if !t.is_finite() || t < 0.0 || t <= prev {
            return Err(CoreError::InvalidArgument(
                "time grid must be finite, non-negative, strictly increasing".into(),
            ));
        }
        prev = t;
    }
    Ok(())
}

/// Coherence of one conditioned cluster over a time grid.
///
/// The FID value is <m_C| exp(+i H+ t) exp(-i H0 t) |m_C>; the echoes insert
/// the corresponding role swaps. For the empty cluster this reduces to the
/// pure phase exp(i E_M t) (FID) or unity (balanced echoes).
pub fn evaluate_cluster(
    ch: &ClusterHamiltonians,
    sequence: &PulseSequence,
    times_ms: &[f64],
) -> Result<Vec<Cx>> {
    sequence.validate()?;
    check_times(times_ms)?;
    let ep = HermitianEigen::new(&ch.h_plus)?;
    let e0 = HermitianEigen::new(&ch.h_zero)?;
    let v0 = basis_vector(ch.dim(), ch.initial_index);
    let mut out = Vec::with_capacity(times_ms.len());
    match sequence {
        PulseSequence::Fid => {
            for &t in times_ms {
                let ket = e0.evolve(t, -1.0, &v0);
                let bra = ep.evolve(t, -1.0, &v0);
                out.push(bra.dotc(&ket));
            }
        }
        PulseSequence::HahnEcho => {
            for &t in times_ms {
                let tau = t / 2.0;
                let ket = ep.evolve(tau, -1.0, &e0.evolve(tau, -1.0, &v0));
                let bra = e0.evolve(tau, -1.0, &ep.evolve(tau, -1.0, &v0));
                out.push(bra.dotc(&ket));
            }
        }
        PulseSequence::RotaryEcho { switch_times_ms } => {
            // Incremental evolution: keep both chains at the last processed
            // switch boundary and apply the trailing partial segment per
            // requested time. The ket chain starts under H0, the bra chain
            // under H+, and the roles swap at each switch.
            let mut boundary_t = 0.0;
            let mut ket = v0.clone();
            let mut bra = v0;
            let mut ket_zero_role = true;
            let mut next_switch = 0usize;
            for &t in times_ms {
                while next_switch < switch_times_ms.len() && switch_times_ms[next_switch] <= t {
                    let s = switch_times_ms[next_switch];
                    let dt = s - boundary_t;
                    let (ket_h, bra_h) = if ket_zero_role { (&e0, &ep) } else { (&ep, &e0) };
                    ket = ket_h.evolve(dt, -1.0, &ket);
                    bra = bra_h.evolve(dt, -1.0, &bra);
                    boundary_t = s;
                    ket_zero_role = !ket_zero_role;
                    next_switch += 1;
                }
                let dt = t - boundary_t;
                let (ket_h, bra_h) = if ket_zero_role { (&e0, &ep) } else { (&ep, &e0) };
                let ket_t = ket_h.evolve(dt, -1.0, &ket);
                let bra_t = bra_h.evolve(dt, -1.0, &bra);
                out.push(bra_t.dotc(&ket_t));
            }
        }
    }
    Ok(out)
}

/// Raw coherence of a named cluster of the system.
pub fn cluster_coherence(
    system: &SpinSystem,
    state: &BathState,
    cluster: &[u32],
    sequence: &PulseSequence,
    times_ms: &[f64],
) -> Result<Vec<Cx>> {
    let ch = cluster_hamiltonians(system, state, cluster)?;
    evaluate_cluster(&ch, sequence, times_ms)
}

/// Run the cluster-correlation expansion.
pub fn cce_coherence<E: Executor>(
    system: &SpinSystem,
    state: &BathState,
    sequence: &PulseSequence,
    times_ms: &[f64],
    config: &CceConfig,
    executor: &E,
) -> Result<CceResult> {
    config.validate()?;
    sequence.validate()?;
    check_times(times_ms)?;
    if system.is_empty() {
        return Err(CoreError::EmptyBath);
    }

    let working = match config.mode {
        ExpansionMode::Modified => system.clone(),
        ExpansionMode::Original => {
            let h_m = system.overhauser_of_state(state)?;
            system.with_energy(system.energy.to_taylor2(h_m)?)
        }
    };

    let clusters = enumerate_clusters(&working, config.max_order, config.pair_cutoff_nm);
    let cluster_count = clusters.len();
    let mut all: Vec<Vec<u32>> = Vec::with_capacity(cluster_count + 1);
    all.push(Vec::new());
    all.extend(clusters);

    let raw: Vec<Result<Vec<Cx>>> = executor.map(all.len(), |i| {
        cluster_coherence(&working, state, &all[i], sequence, times_ms)
    });
    let mut raw_ok: Vec<Vec<Cx>> = Vec::with_capacity(raw.len());
    for r in raw {
        raw_ok.push(r?);
    }

    // Serial division pass in canonical order.
    let index: BTreeMap<&[u32], usize> = all
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_slice(), i))
        .collect();
    let nt = times_ms.len();
    let mut tilde: Vec<Vec<Cx>> = Vec::with_capacity(all.len());
    for (i, cluster) in all.iter().enumerate() {
        let mut values = raw_ok[i].clone();
        if !cluster.is_empty() {
            for sub_idx in proper_subset_indices(cluster, &index) {
                let sub = &tilde[sub_idx];
                for (ti, v) in values.iter_mut().enumerate() {
                    let d = sub[ti];
                    if d.norm() < DIVISOR_FLOOR {
                        return Err(CoreError::NumericalBreakdown {
                            cluster: all[sub_idx].clone(),
                            time_ms: times_ms[ti],
                        });
                    }
                    *v /= d;
                }
            }
        }
        tilde.push(values);
        let _ = nt;
    }

    // Cumulative product by cluster size gives every order at once.
    let mut order_curves: Vec<Vec<Cx>> = Vec::with_capacity(config.max_order);
    let mut acc = tilde[0].clone();
    let mut pos = 1usize;
    for k in 1..=config.max_order {
        while pos < all.len() && all[pos].len() == k {
            for (ti, v) in acc.iter_mut().enumerate() {
                *v *= tilde[pos][ti];
            }
            pos += 1;
        }
        order_curves.push(acc.clone());
    }

    Ok(CceResult {
        times_ms: times_ms.to_vec(),
        order_curves,
        cluster_count,
    })
}

/// Indices (into the canonical list) of the empty cluster and every proper
/// non-empty subset of `cluster` that was enumerated. For clique clusters
/// the list is always complete.
fn proper_subset_indices(cluster: &[u32], index: &BTreeMap<&[u32], usize>) -> Vec<usize> {
    let n = cluster.len();
    let mut out = Vec::with_capacity(1 << n);
    out.push(index[&[][..]]);
    let mut buf: Vec<u32> = Vec::with_capacity(n);
    for mask in 1u32..((1u32 << n) - 1) {
        buf.clear();
        for (b, &site) in cluster.iter().enumerate() {
            if mask & (1 << b) != 0 {
                buf.push(site);
            }
        }
        if let Some(&i) = index.get(buf.as_slice()) {
            out.push(i);
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{LocalOps, PairCoupling, SystemSite};
    use crate::model::{EnergyMode, EnergyModel, SplitStyle};
    use crate::spinops::CMat;

    fn chain_system(n: usize, spacing_nm: f64) -> SpinSystem {
        let sites = (0..n)
            .map(|j| {
                let ops = LocalOps::lab(1).unwrap();
                SystemSite {
                    spin_2x: 1,
                    dim: 2,
                    position_nm: [j as f64 * spacing_nm, 0.0, 0.0],
                    species: crate::geometry::Species::C13,
                    gamma_khz_per_g: 1.1,
                    dot: 0,
                    strength_khz: 10.0 + j as f64,
                    zeeman_khz: CMat::zeros(2, 2),
                    ops,
                }
            })
            .collect();
        SpinSystem {
            sites,
            energy: EnergyModel {
                epsilon_khz: 100.0,
                base_khz: 0.0,
                style: SplitStyle::UpperOnly,
                mode: EnergyMode::Exact,
            },
            pair_coupling: PairCoupling::FullDipolar,
            constants: crate::constants::PhysicalConstants::default(),
        }
    }

    #[test]
    fn chain_cluster_enumeration() {
        // Spacing 1 nm, cutoff 1.5 nm: cliques are singletons and adjacent
        // pairs only.
        let sys = chain_system(5, 1.0);
        let clusters = enumerate_clusters(&sys, 3, 1.5);
        let singles = clusters.iter().filter(|c| c.len() == 1).count();
        let pairs: Vec<_> = clusters.iter().filter(|c| c.len() == 2).collect();
        let triples = clusters.iter().filter(|c| c.len() == 3).count();
        assert_eq!(singles, 5);
        assert_eq!(pairs.len(), 4);
        assert!(pairs.iter().all(|c| c[1] == c[0] + 1));
        assert_eq!(triples, 0);
        // Cutoff 2.5 nm: next-nearest pairs and consecutive triples appear.
        let clusters = enumerate_clusters(&sys, 3, 2.5);
        assert_eq!(clusters.iter().filter(|c| c.len() == 2).count(), 7);
        assert_eq!(clusters.iter().filter(|c| c.len() == 3).count(), 3);
    }

    #[test]
    fn clusters_are_subset_closed() {
        let sys = chain_system(7, 0.8);
        let clusters = enumerate_clusters(&sys, 4, 2.0);
        let set: alloc::collections::BTreeSet<Vec<u32>> = clusters.iter().cloned().collect();
        for c in &clusters {
            let n = c.len();
            for mask in 1u32..(1 << n) {
                let sub: Vec<u32> = c
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask & (1 << *b) != 0)
                    .map(|(_, &s)| s)
                    .collect();
                assert!(set.contains(&sub), "missing subset {sub:?} of {c:?}");
            }
        }
    }

    #[test]
    fn empty_cluster_phase() {
        let sys = chain_system(3, 1.0);
        let state = BathState::uniform_up(3);
        let h_m: f64 = (0..3).map(|j| (10.0 + j as f64) * 0.5).sum();
        let e_m = sys.energy.splitting_khz(h_m);
        let times = [0.0, 0.013, 0.21];
        let vals =
            cluster_coherence(&sys, &state, &[], &PulseSequence::Fid, &times).unwrap();
        for (&t, v) in times.iter().zip(&vals) {
            let expect = crate::spinops::cis(crate::TWO_PI * e_m * t);
            assert!((v - expect).norm() < 1e-10, "t {t}");
        }
        let vals =
            cluster_coherence(&sys, &state, &[], &PulseSequence::HahnEcho, &times).unwrap();
        for v in &vals {
            assert!((v - Cx::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotary_without_switches_matches_fid() {
        let sys = chain_system(3, 0.6);
        let state = BathState::uniform_up(3);
        let times = [0.0, 0.05, 0.11, 0.4];
        let fid =
            cluster_coherence(&sys, &state, &[0, 1, 2], &PulseSequence::Fid, &times).unwrap();
        let rot = cluster_coherence(
            &sys,
            &state,
            &[0, 1, 2],
            &PulseSequence::RotaryEcho {
                switch_times_ms: alloc::vec![],
            },
            &times,
        )
        .unwrap();
        for (a, b) in fid.iter().zip(&rot) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn rotary_single_switch_matches_hahn_at_double_time() {
        let sys = chain_system(2, 0.6);
        let state = BathState::uniform_up(2);
        let tau = 0.17;
        let hahn = cluster_coherence(
            &sys,
            &state,
            &[0, 1],
            &PulseSequence::HahnEcho,
            &[2.0 * tau],
        )
        .unwrap();
        let rot = cluster_coherence(
            &sys,
            &state,
            &[0, 1],
            &PulseSequence::RotaryEcho {
                switch_times_ms: alloc::vec![tau],
            },
            &[2.0 * tau],
        )
        .unwrap();
        assert!((hahn[0] - rot[0]).norm() < 1e-12);
    }

    #[test]
    fn coherence_starts_at_unity_and_is_bounded() {
        let sys = chain_system(4, 0.5);
        let state = BathState::uniform_up(4);
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
        let cfg = CceConfig {
            max_order: 2,
            pair_cutoff_nm: 1.1,
            mode: ExpansionMode::Modified,
        };
        let res = cce_coherence(&sys, &state, &PulseSequence::HahnEcho, &times, &cfg, &crate::exec::Serial)
            .unwrap();
        for curve in &res.order_curves {
            assert!((curve[0] - Cx::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn invalid_sequences_rejected() {
        assert!(PulseSequence::RotaryEcho {
            switch_times_ms: alloc::vec![0.2, 0.1]
        }
        .validate()
        .is_err());
        assert!(PulseSequence::RotaryEcho {
            switch_times_ms: alloc::vec![0.0]
        }
        .validate()
        .is_err());
        assert!(check_times(&[0.0, 0.1, 0.1]).is_err());
        assert!(check_times(&[0.1, 0.05]).is_err());
    }
}
