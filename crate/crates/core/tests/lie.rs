use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use symlab_core::lie::{
    ad_inner, adjoint_action, bracket, casimir_adjoint, exp_map, log_map, AlgebraElement, GroupElement, GroupKind, Mat,
};

const TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(i/√2)σ_a`, written out by hand.
fn pauli_basis() -> [Mat; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    [
        Mat::from_rows(&[&[z, c(0.0, s)], &[c(0.0, s), z]]),
        Mat::from_rows(&[&[z, c(s, 0.0)], &[c(-s, 0.0), z]]),
        Mat::from_rows(&[&[c(0.0, s), z], &[z, c(0.0, -s)]]),
    ]
}

fn su2(x: [f64; 3]) -> AlgebraElement {
    let b = pauli_basis();
    AlgebraElement::new(b[0].scale(x[0]) + b[1].scale(x[1]) + b[2].scale(x[2])).unwrap()
}

fn coords() -> impl Strategy<Value = [f64; 3]> {
    [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0]
}

#[test]
fn pauli_bracket() {
    let b = pauli_basis();
    let e: Vec<AlgebraElement> = b.iter().map(|m| AlgebraElement::new(*m).unwrap()).collect();
    let lhs = bracket(&e[0], &e[1]).unwrap();
    let rhs = e[2].scale(-std::f64::consts::SQRT_2);
    assert!((*lhs.matrix() - *rhs.matrix()).max_abs() < TOL);
    for a in 0..3 {
        for bb in 0..3 {
            assert_abs_diff_eq!(ad_inner(&e[a], &e[bb]).unwrap(), if a == bb { 1.0 } else { 0.0 }, epsilon = TOL);
        }
    }
}

#[test]
fn u1_facts() {
    let (x, y) = (AlgebraElement::u1(0.7), AlgebraElement::u1(-2.0));
    assert_eq!(bracket(&x, &y).unwrap().norm(), 0.0);
    assert_abs_diff_eq!(ad_inner(&x, &x).unwrap(), 0.49, epsilon = 1e-15);
    let g = exp_map(&x);
    assert!((g.matrix().get(0, 0) - Complex64::from_polar(1.0, 0.7)).norm() < 1e-15);
    assert_eq!(adjoint_action(&g, &y).unwrap(), y);
    let lam = casimir_adjoint(GroupKind::U1.algebra().basis()).unwrap();
    assert!(lam.is_zero());
}

#[test]
fn su2_casimir_matches_double_sum() {
    let b = pauli_basis();
    let lam = casimir_adjoint(GroupKind::SU2.algebra().basis()).unwrap();
    for a in 0..3 {
        for bb in 0..3 {
            let mut acc = Mat::zeros(2);
            for e in &b {
                acc += e.commutator(&e.commutator(&b[bb]));
            }
            let want = -(b[a].matmul(&acc)).trace().re;
            assert_abs_diff_eq!(lam.get(a, bb), want, epsilon = TOL);
            assert_abs_diff_eq!(want, if a == bb { -4.0 } else { 0.0 }, epsilon = TOL);
        }
    }
}

#[test]
fn dimension_mismatch_and_domain_errors() {
    let x = su2([1.0, 0.0, 0.0]);
    assert!(bracket(&x, &AlgebraElement::u1(1.0)).is_err());
    assert!(ad_inner(&x, &AlgebraElement::u1(1.0)).is_err());
    let far = exp_map(&su2([3.0, 0.0, 0.0]));
    assert!(matches!(log_map(&far), Err(symlab_core::Error::Domain(_))));
    assert!(GroupElement::new(Mat::identity(2).scale(1.1)).is_err());
    assert_eq!(exp_map(&AlgebraElement::zero(2)), GroupElement::identity(2));
}

#[test]
fn casimir_is_symmetric_negative_definite() {
    let lam = casimir_adjoint(GroupKind::SU2.algebra().basis()).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            assert!((lam.get(a, b) - lam.get(b, a)).abs() < TOL);
        }
    }
    // Diagonal in this basis, so definiteness is the sign of the diagonal.
    for a in 0..3 {
        assert!(lam.get(a, a) < 0.0);
    }
}

proptest! {
    #[test]
    fn bracket_is_antisymmetric(x in coords(), y in coords()) {
        let (x, y) = (su2(x), su2(y));
        let s = *bracket(&x, &y).unwrap().matrix() + *bracket(&y, &x).unwrap().matrix();
        prop_assert!(s.max_abs() < TOL);
        prop_assert!(bracket(&x, &x).unwrap().norm() < TOL);
    }

    #[test]
    fn jacobi_identity(x in coords(), y in coords(), z in coords()) {
        let (x, y, z) = (su2(x), su2(y), su2(z));
        let b = |p: &AlgebraElement, q: &AlgebraElement| bracket(p, q).unwrap();
        let s = *b(&x, &b(&y, &z)).matrix() + *b(&y, &b(&z, &x)).matrix() + *b(&z, &b(&x, &y)).matrix();
        prop_assert!(s.max_abs() < TOL);
    }

    #[test]
    fn inner_product_is_ad_invariant(x in coords(), y in coords(), z in coords()) {
        let (x, y, z) = (su2(x), su2(y), su2(z));
        let r = ad_inner(&bracket(&z, &x).unwrap(), &y).unwrap() + ad_inner(&x, &bracket(&z, &y).unwrap()).unwrap();
        prop_assert!(r.abs() < TOL);
    }

    #[test]
    fn adjoint_action_is_isometric(x in coords(), y in coords(), w in coords()) {
        let g = exp_map(&su2(w));
        let (x, y) = (su2(x), su2(y));
        let (gx, gy) = (adjoint_action(&g, &x).unwrap(), adjoint_action(&g, &y).unwrap());
        prop_assert!((ad_inner(&gx, &gy).unwrap() - ad_inner(&x, &y).unwrap()).abs() < TOL);
        prop_assert!((gx.norm() - x.norm()).abs() < TOL);
    }

    #[test]
    fn exp_is_unitary_and_log_inverts(x in coords()) {
        let small = su2(x).scale(0.2);
        let g = exp_map(&small);
        prop_assert!(g.matrix().unitary_defect() < TOL);
        prop_assert!((g.matrix().det() - Complex64::new(1.0, 0.0)).norm() < TOL);
        let back = log_map(&g).unwrap();
        prop_assert!((*back.matrix() - *small.matrix()).max_abs() < TOL);
    }

    #[test]
    fn casimir_commutes_with_adjoint_action(x in coords(), w in coords()) {
        let alg = GroupKind::SU2.algebra();
        let lam = casimir_adjoint(alg.basis()).unwrap();
        let g = exp_map(&su2(w));
        let x = su2(x);
        let a = lam.apply(alg, adjoint_action(&g, &x).unwrap().matrix());
        let b = *adjoint_action(&g, &AlgebraElement::new(lam.apply(alg, x.matrix())).unwrap()).unwrap().matrix();
        prop_assert!((a - b).max_abs() < TOL);
    }
}
