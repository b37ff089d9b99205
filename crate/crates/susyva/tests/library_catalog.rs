//! Catalog entries, load-time validation and the Lie-data constructors.

use num_bigint::BigInt;
use num_rational::BigRational;

use susyva::engine::{parity_check, weight_homogeneity_check, Engine};
use susyva::library::{self, LieData};
use susyva::params::Case;
use susyva::parse::parse_expr;
use susyva::scalar::Scalar;
use susyva::Error;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn every_catalog_entry_loads_and_is_consistent() {
    for (name, description) in library::names() {
        assert!(!description.is_empty());
        let alg = library::get(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(parity_check(&alg).is_empty(), "{name}");
        assert!(weight_homogeneity_check(&alg).unwrap().is_empty(), "{name}");
        let eng = Engine::new(&alg);
        for &(i, j) in alg.brackets.keys() {
            let a = parse_expr(&alg, &alg.gen(i).name).unwrap();
            let b = parse_expr(&alg, &alg.gen(j).name).unwrap();
            assert!(eng.skew_residual(&a, &b).unwrap().is_zero(), "{name}");
        }
    }
}

#[test]
fn indexed_families_and_unknown_names() {
    assert_eq!(library::get("K5").unwrap().n, 5);
    assert_eq!(library::get("W3").unwrap().case, Case::W);
    assert_eq!(library::get("bcbg3").unwrap().gens.iter().filter(|g| !g.central).count(), 6);
    assert_eq!(library::get("nonsense").unwrap_err(), Error::UnknownAlgebra("nonsense".into()));
    assert!(library::get("B0").is_err());
}

#[test]
fn conformal_vectors_are_documented_where_expected() {
    for name in ["B1", "F1", "bcbg1", "affine-sl2", "K1", "W2", "free-boson"] {
        assert!(library::conformal_vector(&library::get(name).unwrap()).is_ok(), "{name}");
    }
    assert!(library::conformal_vector(&library::get("B2").unwrap()).is_err());
}

#[test]
fn lie_data_validation_rejects_bad_input() {
    let mut not_antisymmetric = LieData::sl2();
    not_antisymmetric.bracket[1][0][2] = q(1, 1);
    assert!(not_antisymmetric.validate().is_err());

    let mut not_invariant = LieData::sl2();
    not_invariant.form[2][2] = q(1, 1);
    assert!(not_invariant.validate().is_err());

    let mut not_symmetric = LieData::sl2();
    not_symmetric.form[0][1] = q(2, 1);
    assert!(not_symmetric.validate().is_err());

    let mut degenerate = LieData::abelian(2);
    degenerate.form[1][1] = q(0, 1);
    assert!(degenerate.validate().is_err());

    assert!(LieData::sl2().validate().is_ok());
    assert!(library::currents(&not_invariant, &q(1, 1), Case::K, 1).is_err());
}

#[test]
fn affine_central_charge_formula() {
    // k dim g/(k + h) + dim g/2 for sl2 (dim 3, h = 2)
    for k in [q(1, 1), q(2, 1), q(1, 2), q(-1, 1)] {
        let alg = library::affine_supercurrents(&LieData::sl2(), &k).unwrap();
        let eng = Engine::new(&alg);
        let c = eng.central_charge(&library::conformal_vector(&alg).unwrap()).unwrap();
        let want = &k * q(3, 1) / (&k + q(2, 1)) + q(3, 2);
        assert_eq!(c, Scalar::from_rational(want.clone()), "k = {k}");
        assert_eq!(library::affine_central_charge(&LieData::sl2(), &k), want);
    }
    assert!(library::affine_supercurrents(&LieData::sl2(), &q(-2, 1)).is_err());
}

#[test]
fn abelian_currents_are_free_fields() {
    let alg = library::currents(&LieData::abelian(2), &q(1, 1), Case::W, 1).unwrap();
    let eng = Engine::new(&alg);
    let names: Vec<String> = alg.gens.iter().filter(|g| !g.central).map(|g| g.name.clone()).collect();
    let a = parse_expr(&alg, &names[0]).unwrap();
    let b = parse_expr(&alg, &names[1]).unwrap();
    // distinct orthogonal currents commute
    assert!(eng.bracket(&a, &b).is_zero());
    assert!(!eng.bracket(&a, &a).is_zero());
}

#[test]
fn odd_generator_free_fields_need_parity_matching_the_case() {
    // F2: alpha and phi are both even, so that [alpha_Λ phi] = 1 has parity N mod 2
    let alg = library::get("F2").unwrap();
    let phi = alg.gens.iter().find(|g| g.name == "phi").unwrap();
    assert_eq!(phi.parity, 0);
}

#[test]
fn spin7_is_catalogued_as_given_and_with_central_charge_twelve() {
    let given = library::get("spin7").unwrap();
    let fixed = library::get("spin7-c12").unwrap();
    let g = given.gen_id("G").unwrap();
    let given_gg = given.brackets.get(&(g, g)).unwrap();
    let fixed_gg = fixed.brackets.get(&(g, g)).unwrap();
    assert!(given_gg != fixed_gg);
    let odake = library::get("odake").unwrap();
    assert!(odake.gen_id("Xp").is_some() && odake.gen_id("Xm").is_some());
}
