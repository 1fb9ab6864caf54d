use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use proptest::prelude::*;

use quon_core::parastat::{
    build_green, rotation, ParaError, ParaKind, ParaVector, ProjectorKind, SymmetryProjector,
    DEFAULT_MAX_DIM,
};

fn unitary(theta: f64, phi: f64, psi: f64) -> DMatrix<Complex64> {
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::from_polar(1.0, phi),
        Complex64::from_polar(1.0, psi),
    ]));
    rotation(theta) * phases
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn projectors_commute_with_tensor_powers(
        theta in -3.2f64..3.2, phi in -3.2f64..3.2, psi in -3.2f64..3.2, n in 2usize..=3, anti in any::<bool>()
    ) {
        let kind = if anti { ProjectorKind::Antisymmetrizer } else { ProjectorKind::Symmetrizer };
        let p = SymmetryProjector::new(n, 2, kind);
        prop_assert!(p.idempotency_defect() < 1e-12);
        prop_assert!(p.commutator_norm(&unitary(theta, phi, psi)) < 1e-12);
    }

    #[test]
    fn parafermi_states_have_nonnegative_norm(
        p in 1usize..=3, ops in prop::collection::vec((0usize..2, any::<bool>()), 0..6)
    ) {
        let r = build_green(ParaKind::Parafermi, p, 2, None, DEFAULT_MAX_DIM).unwrap();
        let v = r.apply_product(&ops, &ParaVector::basis(r.vacuum())).unwrap();
        prop_assert!(r.norm_sq(&v) >= Zero::zero());
    }

    #[test]
    fn parabose_states_have_nonnegative_norm(
        ops in prop::collection::vec((0usize..2, any::<bool>()), 0..6)
    ) {
        let r = build_green(ParaKind::Parabose, 2, 2, Some(6), DEFAULT_MAX_DIM).unwrap();
        let v = r.apply_product(&ops, &ParaVector::basis(r.vacuum())).unwrap();
        prop_assert!(r.norm_sq(&v) >= Zero::zero());
    }

    #[test]
    fn creation_beyond_order_vanishes_for_parafermi(p in 1usize..=3, k in 0usize..2) {
        let r = build_green(ParaKind::Parafermi, p, 2, None, DEFAULT_MAX_DIM).unwrap();
        let ops = vec![(k, true); p + 1];
        let v = r.apply_product(&ops, &ParaVector::basis(r.vacuum())).unwrap();
        prop_assert!(v.is_zero());
        let ops = vec![(k, true); p];
        let v = r.apply_product(&ops, &ParaVector::basis(r.vacuum())).unwrap();
        prop_assert!(!v.is_zero());
    }
}

#[test]
fn budget_and_cap_errors() {
    assert!(matches!(
        build_green(ParaKind::Parabose, 3, 3, Some(3), 100),
        Err(ParaError::DimensionBudget { .. })
    ));
    assert!(matches!(build_green(ParaKind::Parabose, 2, 2, None, DEFAULT_MAX_DIM), Err(ParaError::MissingCap)));
    assert!(matches!(build_green(ParaKind::Parafermi, 0, 2, None, DEFAULT_MAX_DIM), Err(ParaError::ZeroOrder)));
    let r = build_green(ParaKind::Parabose, 1, 1, Some(1), DEFAULT_MAX_DIM).unwrap();
    let one = r.apply(0, true, &ParaVector::basis(r.vacuum())).unwrap();
    assert!(matches!(r.apply(0, true, &one), Err(ParaError::Truncated { cap: 1 })));
}

#[test]
fn green_matrices_are_mutual_adjoints_for_parafermi() {
    let r = build_green(ParaKind::Parafermi, 2, 2, None, DEFAULT_MAX_DIM).unwrap();
    for k in 0..2 {
        let a = r.matrix(k, false).unwrap().to_dense();
        let ad = r.matrix(k, true).unwrap().to_dense();
        assert_eq!(a.transpose(), ad);
    }
}
