//! Sign conventions of index tuples and products in the parameter algebras, checked
//! against brute-force reorderings of explicit letter words.

use std::collections::BTreeMap;

use susyva::params::{
    lp_mul, mixed_mono_mul, sum_image, Case, Family, LMono, LambdaPoly, MixedConvention, MixedMono, MixedPoly,
};
use susyva::scalar::Scalar;
use susyva::superindex::{mask_elems, sigma, sigma_complement, sigma_mask, IndexTuple, Sign};

/// Sign of the bubble sort that brings `word` into ascending order, or zero on a repeat.
fn sort_sign(word: &[u8]) -> i8 {
    let mut w = word.to_vec();
    let mut sign = 1;
    for i in 0..w.len() {
        for j in 0..w.len() - 1 - i {
            if w[j] == w[j + 1] {
                return 0;
            }
            if w[j] > w[j + 1] {
                w.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if w.windows(2).any(|p| p[0] == p[1]) {
        0
    } else {
        sign
    }
}

#[test]
fn sigma_matches_sorting_the_concatenation() {
    for n in 0..=5u8 {
        let all = 1u16 << n;
        for a in 0..all {
            for b in 0..all {
                let (ma, mb) = (a << 1, b << 1);
                let mut word = mask_elems(ma);
                word.extend(mask_elems(mb));
                let expected = sort_sign(&word);
                assert_eq!(sigma_mask(ma, mb).value(), expected, "sigma({:?}, {:?})", mask_elems(ma), mask_elems(mb));
            }
        }
    }
}

#[test]
fn sigma_of_tuples_and_complements() {
    let n = 4;
    for i in IndexTuple::all(n) {
        let c = i.complement();
        let mut word = i.elems();
        word.extend(c.elems());
        assert_eq!(sigma_complement(i).value(), sort_sign(&word));
        assert_eq!(sigma(i, c).expect("same ambient"), sigma_complement(i));
        // σ(I, J)σ(J, I) = (-1)^{|I||J|} on disjoint tuples
        for j in IndexTuple::all(n) {
            if i.mask() & j.mask() == 0 {
                let prod = sigma(i, j).unwrap() * sigma(j, i).unwrap();
                assert_eq!(prod, Sign::parity(i.len() * j.len()));
            }
        }
    }
}

#[test]
fn index_tuple_validation() {
    assert!(IndexTuple::from_sorted(3, &[1, 2]).is_ok());
    assert!(IndexTuple::from_sorted(3, &[2, 1]).is_err());
    assert!(IndexTuple::from_sorted(3, &[4]).is_err());
    let (t, s) = IndexTuple::from_unsorted(3, &[3, 1]).expect("distinct");
    assert_eq!(t.elems(), vec![1, 3]);
    assert_eq!(s, Sign::MINUS);
    let (_, s) = IndexTuple::from_unsorted(3, &[2, 2]).expect("in range");
    assert!(s.is_zero());
    assert!(IndexTuple::from_unsorted(3, &[0]).is_err());
}

/// A monomial `λ^a χ^{i1}…χ^{ik}` as an unordered letter word.
type Word = (u32, Vec<u8>);

/// Reduces a letter word to normal form using only the defining relations:
/// odd letters anticommute and `(χ^i)² = -λ` (K case) or `0` (W case).
fn reduce(case: Case, word: Word) -> Option<(i64, LMono)> {
    let (mut pow, mut w) = word;
    let mut sign = 1i64;
    loop {
        let mut changed = false;
        let mut k = 0;
        while k + 1 < w.len() {
            if w[k] == w[k + 1] {
                if case == Case::W {
                    return None;
                }
                w.drain(k..k + 2);
                pow += 1;
                sign = -sign;
                changed = true;
            } else if w[k] > w[k + 1] {
                w.swap(k, k + 1);
                sign = -sign;
                changed = true;
                k += 1;
            } else {
                k += 1;
            }
        }
        if !changed {
            break;
        }
    }
    let mask = w.iter().fold(0u16, |m, i| m | (1 << i));
    Some((sign, LMono::new(pow, mask)))
}

#[test]
fn lambda_products_match_letter_rewriting() {
    for case in [Case::W, Case::K] {
        for n in 0..=3u8 {
            let monos: Vec<LMono> =
                (0..2).flat_map(|p| (0..1u16 << n).map(move |m| LMono::new(p, m << 1))).collect();
            for &x in &monos {
                for &y in &monos {
                    let px = LambdaPoly::monomial(case, n, Family::Lambda, x, Scalar::one());
                    let py = LambdaPoly::monomial(case, n, Family::Lambda, y, Scalar::one());
                    let got = lp_mul(&px, &py).expect("same algebra");
                    let mut word = mask_elems(x.mask);
                    word.extend(mask_elems(y.mask));
                    let want = match reduce(case, (x.pow + y.pow, word)) {
                        None => LambdaPoly::zero(case, n, Family::Lambda),
                        Some((s, m)) => LambdaPoly::monomial(case, n, Family::Lambda, m, Scalar::from_int(s)),
                    };
                    assert!(got == want, "{case:?} N={n}: {x:?} * {y:?} = {got} but rewriting gives {want}");
                }
            }
        }
    }
}

#[test]
fn lambda_product_rejects_mismatched_algebras() {
    let a = LambdaPoly::<Scalar>::even_gen(Case::K, 1, Family::Lambda);
    let b = LambdaPoly::<Scalar>::even_gen(Case::W, 1, Family::Lambda);
    assert!(lp_mul(&a, &b).is_err());
}

fn mixed_mul(p: &MixedPoly<Scalar>, q: &MixedPoly<Scalar>) -> MixedPoly<Scalar> {
    let mut out = MixedPoly::zero(p.case, p.n, p.convention);
    for (m, c) in p.terms() {
        for (m2, c2) in q.terms() {
            for (mm, s) in mixed_mono_mul(p.case, p.n, p.convention, *m, *m2) {
                out.add_term(mm, &(&s * c) * c2);
            }
        }
    }
    out
}

/// Whether `Λ ↦ Λ + Γ` is multiplicative on all monomials of degree ≤ 1 in `λ`.
fn substitution_is_multiplicative(case: Case, n: u8, conv: MixedConvention) -> bool {
    let monos: Vec<LMono> = (0..2).flat_map(|p| (0..1u16 << n).map(move |m| LMono::new(p, m << 1))).collect();
    monos.iter().all(|&x| {
        monos.iter().all(|&y| {
            let px = LambdaPoly::monomial(case, n, Family::Lambda, x, Scalar::one());
            let py = LambdaPoly::monomial(case, n, Family::Lambda, y, Scalar::one());
            let mut lhs = MixedPoly::zero(case, n, conv);
            for (m, c) in lp_mul(&px, &py).unwrap().terms() {
                lhs.add_scaled(&sum_image(case, n, conv, *m), c);
            }
            let rhs = mixed_mul(&sum_image(case, n, conv, x), &sum_image(case, n, conv, y));
            lhs == rhs
        })
    })
}

#[test]
fn supercommuting_mixed_algebra_makes_the_sum_substitution_an_algebra_map() {
    for case in [Case::W, Case::K] {
        for n in 1..=3 {
            assert!(substitution_is_multiplicative(case, n, MixedConvention::Supercommuting), "{case:?} N={n}");
        }
    }
}

#[test]
fn anticommutator_relation_breaks_the_sum_substitution() {
    assert!(!substitution_is_multiplicative(Case::K, 1, MixedConvention::LiteralAnticommutator));
}

#[test]
fn mixed_odd_letters_anticommute_across_families() {
    let chi = MixedMono { a: 0, b: 0, chi: 1 << 1, eta: 0 };
    let eta = MixedMono { a: 0, b: 0, chi: 0, eta: 1 << 1 };
    let eta_chi: BTreeMap<_, _> =
        mixed_mono_mul(Case::K, 1, MixedConvention::Supercommuting, eta, chi).into_iter().collect();
    let both = MixedMono { a: 0, b: 0, chi: 1 << 1, eta: 1 << 1 };
    assert_eq!(eta_chi.len(), 1);
    assert_eq!(eta_chi[&both], Scalar::from_int(-1));
}
