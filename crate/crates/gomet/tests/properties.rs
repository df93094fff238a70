//! Property tests over random coefficient vectors: algebraic identities
//! that must hold on the whole algebra, not only on basis elements.

use nalgebra::DVector;
use proptest::prelude::*;

use gomet::liealg::{so_basis, sp_basis, su_basis, u_basis, AlgebraVector};

fn coeff_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, dim)
}

fn algebras() -> Vec<std::sync::Arc<gomet::liealg::LieAlgebra>> {
    vec![
        su_basis(3).unwrap(),
        so_basis(4).unwrap(),
        u_basis(3).unwrap(),
        sp_basis(2).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bracket_is_antisymmetric_and_jacobi_holds(
        raw in coeff_vec(21 * 3),
        which in 0usize..4,
    ) {
        let alg = algebras()[which].clone();
        let dim = alg.dim;
        let take = |k: usize| {
            AlgebraVector::new(
                alg.clone(),
                DVector::from_fn(dim, |i, _| raw[k * 21 + i % 21]),
            )
            .unwrap()
        };
        let (x, y, z) = (take(0), take(1), take(2));

        let xy = x.bracket(&y).unwrap();
        let yx = y.bracket(&x).unwrap();
        prop_assert!(xy.add(&yx).unwrap().q_norm() <= 1e-10 * (1.0 + xy.q_norm()));

        let jac = xy.bracket(&z).unwrap()
            .add(&y.bracket(&z).unwrap().bracket(&x).unwrap()).unwrap()
            .add(&z.bracket(&x).unwrap().bracket(&y).unwrap()).unwrap();
        let scale = x.q_norm() * y.q_norm() * z.q_norm();
        prop_assert!(jac.q_norm() <= 1e-10 * (1.0 + scale));
    }

    #[test]
    fn q_is_ad_invariant_on_random_triples(
        raw in coeff_vec(21 * 3),
        which in 0usize..4,
    ) {
        let alg = algebras()[which].clone();
        let dim = alg.dim;
        let take = |k: usize| {
            AlgebraVector::new(
                alg.clone(),
                DVector::from_fn(dim, |i, _| raw[k * 21 + i % 21]),
            )
            .unwrap()
        };
        let (z, x, y) = (take(0), take(1), take(2));
        let lhs = z.bracket(&x).unwrap().inner(&y).unwrap();
        let rhs = x.inner(&z.bracket(&y).unwrap()).unwrap();
        let scale = z.q_norm() * x.q_norm() * y.q_norm();
        prop_assert!((lhs + rhs).abs() <= 1e-10 * (1.0 + scale));
    }

    #[test]
    fn bar_map_is_q_orthogonal_on_off_diagonal_span(
        raw in coeff_vec(20 * 2),
    ) {
        // su(5): indices 0..20 are the off-diagonal e/f part of the basis.
        let alg = su_basis(5).unwrap();
        let dim = alg.dim;
        let take = |k: usize| {
            AlgebraVector::new(
                alg.clone(),
                DVector::from_fn(dim, |i, _| if i < 20 { raw[k * 20 + i] } else { 0.0 }),
            )
            .unwrap()
        };
        let (x, y) = (take(0), take(1));
        let bx = x.bar().unwrap();
        let by = y.bar().unwrap();
        prop_assert!(
            (bx.inner(&by).unwrap() - x.inner(&y).unwrap()).abs()
                <= 1e-10 * (1.0 + x.q_norm() * y.q_norm())
        );
        // Complex-structure square: bar(bar(x)) = -x.
        prop_assert!(bx.bar().unwrap().add(&x).unwrap().q_norm() <= 1e-12 * (1.0 + x.q_norm()));
    }
}
