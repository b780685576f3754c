//! Property tests for the operator kernels and generators.

use cce_lab_core::geometry::{generate_diamond_bath, DiamondBathConfig};
use cce_lab_core::spinops::{
    embed, expm_i, kron, max_abs, spin_operators, unitarity_deviation, CMat, Cx,
};
use proptest::prelude::*;

fn arb_hermitian(dim: usize) -> impl Strategy<Value = CMat> {
    proptest::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0),
        dim * dim,
    )
    .prop_map(move |vals| {
        let mut m = CMat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = Cx::new(vals[i * dim + j].0, vals[i * dim + j].1);
            }
        }
        (&m + m.adjoint()).scale(0.5)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagator_composition(h in arb_hermitian(4), t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let u1 = expm_i(&h, t1, -1.0).unwrap();
        let u2 = expm_i(&h, t2, -1.0).unwrap();
        let u12 = expm_i(&h, t1 + t2, -1.0).unwrap();
        let dev = max_abs(&(&u1 * &u2 - u12));
        prop_assert!(dev < 1e-9, "composition dev {dev:.2e}");
    }

    #[test]
    fn propagator_unitarity_and_inverse(h in arb_hermitian(5), t in 0.0f64..3.0) {
        let u = expm_i(&h, t, -1.0).unwrap();
        prop_assert!(unitarity_deviation(&u) < 1e-10);
        let back = expm_i(&h, t, 1.0).unwrap();
        let dev = max_abs(&(&u * &back - CMat::identity(5, 5)));
        prop_assert!(dev < 1e-10);
    }

    #[test]
    fn embedded_disjoint_operators_commute(
        ha in arb_hermitian(2),
        hb in arb_hermitian(3),
        i in 0usize..3,
        j in 0usize..3,
    ) {
        prop_assume!(i != j);
        let mut dims = [0usize; 3];
        for (k, d) in dims.iter_mut().enumerate() {
            *d = if k == i { 2 } else if k == j { 3 } else { 2 };
        }
        let dims = dims.to_vec();
        let a = embed(&ha, i, &dims).unwrap();
        let b = embed(&if dims[j] == 3 { hb.clone() } else { hb.view((0, 0), (2, 2)).into_owned() }, j, &dims).unwrap();
        let comm = &a * &b - &b * &a;
        prop_assert!(max_abs(&comm) < 1e-12);
    }

    #[test]
    fn kron_mixed_product(a in arb_hermitian(2), b in arb_hermitian(2), c in arb_hermitian(2), d in arb_hermitian(2)) {
        // (A x B)(C x D) = AC x BD.
        let lhs = kron(&a, &b) * kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn spin_commutators(spin_2x in 1u32..5) {
        let ops = spin_operators(spin_2x).unwrap();
        let comm = &ops.sx * &ops.sy - &ops.sy * &ops.sx;
        let dev = max_abs(&(comm - ops.sz.map(|z| z * Cx::new(0.0, 1.0))));
        prop_assert!(dev < 1e-12);
    }

    #[test]
    fn bath_generation_deterministic(seed in 0u64..1000) {
        let constants = cce_lab_core::constants::PhysicalConstants::default();
        let cfg = DiamondBathConfig::new(seed, 0.03, 2.0);
        let a = generate_diamond_bath(&constants, &cfg);
        let b = generate_diamond_bath(&constants, &cfg);
        match (a, b) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "one generation failed"),
        }
    }
}
