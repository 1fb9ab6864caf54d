use quon_core::gram::{
    bareiss_det, compose, det_exact, gram_matrix, inverse, inversions, permutations,
    zagier_determinant, GramLimits, ZagierProduct,
};
use quon_core::QPolynomial;

#[test]
fn zagier_small_cases() {
    assert_eq!(zagier_determinant(1), QPolynomial::one());
    assert_eq!(zagier_determinant(2), QPolynomial::from_i64s(&[1, 0, -1]));
    assert_eq!(ZagierProduct::new(3).to_string(), "(1-q^2)^6 (1-q^6)");
}

#[test]
fn determinant_degree_matches_product() {
    let limits = GramLimits::default();
    for n in 2..=4 {
        let m = gram_matrix(n, &limits).unwrap();
        let det = det_exact(&m, &limits).unwrap();
        assert_eq!(det.degree(), zagier_determinant(n).degree());
        assert_eq!(det.coeff(0), 1.into());
    }
}

/// Mixing the two composition orders between the triangles breaks symmetry
/// and the determinant identity.
#[test]
fn asymmetric_convention_flip_breaks_identity() {
    let n = 3;
    let perms = permutations(n);
    let rows: Vec<Vec<QPolynomial>> = perms
        .iter()
        .enumerate()
        .map(|(i, s)| {
            perms
                .iter()
                .enumerate()
                .map(|(j, t)| {
                    let p = if i <= j {
                        compose(&inverse(s), t)
                    } else {
                        compose(s, &inverse(t))
                    };
                    QPolynomial::q_pow(inversions(&p))
                })
                .collect()
        })
        .collect();
    assert_ne!(bareiss_det(rows), zagier_determinant(n));
}

#[test]
fn gram_limits_error_instead_of_building() {
    let limits = GramLimits::default();
    assert!(gram_matrix(0, &limits).is_err());
    assert!(gram_matrix(limits.max_n + 1, &limits).is_err());
    let m = gram_matrix(5, &limits).unwrap();
    assert!(det_exact(&m, &limits).is_err());
}
