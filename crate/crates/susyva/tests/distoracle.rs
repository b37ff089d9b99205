//! Truncated formal distributions: the delta-function identities in both cases, an
//! explicit coefficient oracle for the delta function, and negative controls.

use susyva::distoracle::{
    d_deriv, delta, expand_binomial, fourier_zw, run_suite, sample_local, Direction, SuperLaurent, W, Z,
};
use susyva::params::{Case, Family, LMono, LambdaPoly};
use susyva::scalar::Scalar;
use susyva::Error;

const WINDOW: (i64, i64) = (-8, 8);

#[test]
fn identity_suites_pass_for_small_n() {
    for case in [Case::W, Case::K] {
        for n in 0..=2u8 {
            for r in run_suite(case, n, WINDOW) {
                assert!(r.passed, "{case:?} N={n}: {} ({})", r.name, r.detail);
            }
        }
    }
}

#[test]
fn even_delta_has_unit_coefficients_on_the_antidiagonal() {
    // δ(z,w) = Σ_n z^n w^{-n-1}
    let d = delta(0, WINDOW);
    let (lo, hi) = (WINDOW.0 + 2, WINDOW.1 - 2);
    for a in lo..=hi {
        for b in lo..=hi {
            let want = if a + b == -1 { Scalar::one() } else { Scalar::zero() };
            assert_eq!(d.coeff(&[a, b], 0), want, "z^{a} w^{b}");
        }
    }
}

#[test]
fn odd_delta_carries_theta_minus_zeta() {
    // N = 1: δ = (θ - ζ) Σ_n z^n w^{-n-1}
    let d = delta(1, WINDOW);
    let theta = d.odd_mask(Z, 1 << 1);
    let zeta = d.odd_mask(W, 1 << 1);
    for a in -4..=4 {
        let b = -1 - a;
        assert_eq!(d.coeff(&[a, b], theta), Scalar::one());
        assert_eq!(d.coeff(&[a, b], zeta), Scalar::from_int(-1));
        assert_eq!(d.coeff(&[a, b], 0), Scalar::zero());
    }
}

#[test]
fn difference_times_delta_vanishes_but_not_times_its_derivative() {
    for n in 0..=1u8 {
        let d = delta(n, WINDOW);
        let zw = SuperLaurent::difference(n, 2, WINDOW, Z, W);
        let (lo, hi) = (WINDOW.0 + 3, WINDOW.1 - 3);
        assert!(zw.mul(&d).restrict(lo, hi).is_zero(), "N={n}");
        let dd = d_deriv(Case::W, 1, 0, &d);
        assert!(!zw.mul(&dd).restrict(lo, hi).is_zero(), "N={n}");
        // (z - w) ∂_w δ = δ
        assert!(zw.mul(&dd).eq_within(&d, lo, hi), "N={n}");
    }
}

#[test]
fn fourier_transform_of_delta_and_its_derivative() {
    for case in [Case::W, Case::K] {
        for n in 0..=2u8 {
            let d = delta(n, WINDOW);
            let one = LambdaPoly::monomial(case, n, Family::Lambda, LMono::new(0, 0), Scalar::one());
            let lambda = LambdaPoly::monomial(case, n, Family::Lambda, LMono::new(1, 0), Scalar::one());
            let f = fourier_zw(case, &d, 4).unwrap().constant_poly().unwrap();
            assert!(f == one, "{case:?} N={n}: {f}");
            let f = fourier_zw(case, &d_deriv(case, 1, 0, &d), 4).unwrap().constant_poly().unwrap();
            assert!(f == lambda, "{case:?} N={n}: {f}");
        }
    }
}

#[test]
fn one_sided_expansion_is_not_local() {
    let full = (1u16 << 1) | (1 << 2);
    let half = expand_binomial(Case::W, 2, -1, full, Direction::ZW, WINDOW);
    assert!(matches!(fourier_zw(Case::W, &half, 4), Err(Error::NotLocal(4))));
}

#[test]
fn sampled_series_are_local_with_small_order() {
    for case in [Case::W, Case::K] {
        for seed in 0..4 {
            let s = sample_local(case, 1, (-16, 16), seed);
            let f = fourier_zw(case, &s, 6).unwrap();
            assert!(f.locality <= 3, "{case:?} seed {seed}: locality {}", f.locality);
        }
    }
}

#[test]
fn odd_coordinates_square_to_zero() {
    let theta = SuperLaurent::monomial(2, 2, WINDOW, &[0, 0], &[(Z, 1)], Scalar::one());
    assert!(theta.mul(&theta).is_zero());
    let zeta = SuperLaurent::monomial(2, 2, WINDOW, &[0, 0], &[(W, 1)], Scalar::one());
    assert!(theta.mul(&zeta).add(&zeta.mul(&theta)).is_zero());
}
