//! Bracket values of catalogued algebras, Jacobi and structural suites, and negative
//! controls on deliberately broken presentations.

use rayon::prelude::*;

use susyva::engine::{parity_check, weight_homogeneity_check, Engine};
use susyva::expr::{Algebra, Atom, FieldExpr};
use susyva::library;
use susyva::parse::{parse_algebra, parse_expr_with, parse_poly_with};
use susyva::scalar::Scalar;

fn load(name: &str) -> Algebra {
    library::get(name).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn expr(eng: &Engine, text: &str) -> FieldExpr {
    parse_expr_with(eng, text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn generators(alg: &Algebra) -> Vec<FieldExpr> {
    (0..alg.gens.len() as u16)
        .filter(|g| !alg.gen(*g).central)
        .map(|g| FieldExpr::atom(Atom::gen(g)))
        .collect()
}

fn assert_bracket(alg: &Algebra, a: &str, b: &str, expected: &str) {
    let eng = Engine::new(alg);
    let got = eng.bracket(&expr(&eng, a), &expr(&eng, b));
    let want = parse_poly_with(&eng, expected, 0).unwrap();
    assert!(got == want, "[{a}_Λ {b}] in {}: expected {expected}, got {}", alg.name, alg.render_bracket(&got));
}

/// All generator triples whose Jacobi residual is nonzero.
fn jacobi_failures(alg: &Algebra) -> Vec<String> {
    let gs = generators(alg);
    let mut triples = Vec::new();
    for x in &gs {
        for y in &gs {
            for z in &gs {
                triples.push((x.clone(), y.clone(), z.clone()));
            }
        }
    }
    triples
        .par_iter()
        .filter_map(|(x, y, z)| {
            let eng = Engine::new(alg);
            let r = eng.jacobi_residual(x, y, z).expect("homogeneous generators");
            let r = r.map_coeffs(|e| alg.quotient(e));
            (!r.is_zero()).then(|| alg.render_mixed(&r))
        })
        .collect()
}

#[test]
fn catalog_bracket_values() {
    assert_bracket(&load("K1"), "G", "G", "(2*T + 3*lambda + chi*S) G + 1/3*lambda^2*chi*C");
    assert_bracket(&load("N2asK1"), "J", "J", "G + 1/3*lambda*chi*C");
    assert_bracket(&load("free-fermion"), "phi", "phi", "1");
    assert_bracket(&load("free-boson"), "alpha", "alpha", "lambda");
    assert_bracket(&load("B1"), "Psi", "G", "(lambda + chi*S) Psi + m*lambda*chi");
    assert_bracket(&load("B1"), "S Psi", "S Psi", "lambda*chi");
    assert_bracket(&load("F1"), "tau", "tau", "S tau + lambda*chi");
}

#[test]
fn sesquilinearity_on_generators() {
    // [Ta_Λ b] = -λ[a_Λ b], [a_Λ Tb] = (λ + T)[a_Λ b]
    let alg = load("W1");
    let eng = Engine::new(&alg);
    let (l, q) = (expr(&eng, "L"), expr(&eng, "Q"));
    let base = eng.bracket(&l, &q);
    let left = eng.bracket(&eng.apply_t(&l), &q);
    let mut want = base.mul_even(1);
    want = want.negated();
    assert!(left == want);
    let right = eng.bracket(&l, &eng.apply_t(&q));
    let mut want = base.mul_even(1);
    want.add_assign(&eng.op_t(&base));
    assert!(right == want);
}

#[test]
fn vacuum_and_normal_products() {
    let alg = load("B1");
    let eng = Engine::new(&alg);
    assert!(expr(&eng, "T vac").is_zero());
    // :vac a: = a
    assert!(eng.nprod(&FieldExpr::vacuum(), &expr(&eng, "Psi")) == expr(&eng, "Psi"));
    // :ΨΨ: for an odd field is its own quasi-commutativity correction, half of T-derivative terms
    let pp = eng.nprod(&expr(&eng, "Psi"), &expr(&eng, "Psi"));
    assert_eq!(alg.render_expr(&pp), alg.render_expr(&eng.normalize(&pp)));
}

macro_rules! jacobi_suite {
    ($($test:ident => $name:expr),* $(,)?) => {$(
        #[test]
        fn $test() {
            let alg = load($name);
            let bad = jacobi_failures(&alg);
            assert!(bad.is_empty(), "{}: {}", $name, bad.join("; "));
        }
    )*};
}

jacobi_suite! {
    jacobi_free_boson => "free-boson",
    jacobi_free_fermion => "free-fermion",
    jacobi_f1 => "F1",
    jacobi_f2 => "F2",
    jacobi_b1 => "B1",
    jacobi_b2 => "B2",
    jacobi_w1 => "W1",
    jacobi_w2 => "W2",
    jacobi_k1 => "K1",
    jacobi_k2 => "K2",
    jacobi_k3 => "K3",
    jacobi_k4 => "K4",
    jacobi_n2_as_k1 => "N2asK1",
    jacobi_n4_as_k1 => "N4asK1",
    jacobi_bcbg1 => "bcbg1",
    jacobi_affine_supercurrents => "affine-sl2",
    jacobi_chiral_de_rham => "cdr-abelian2",
    jacobi_spin7_at_central_charge_12 => "spin7-c12",
}

#[test]
fn jacobi_detects_non_lie_structure_constants() {
    // antisymmetric currents with [x,y] = x, [x,z] = y violate the Lie Jacobi identity
    let text = "[header]\nname = broken\ncase = W\nN = 0\n[generators]\nx even 1\ny even 1\nz even 1\n\
                [brackets]\n[x, y] = x\n[x, z] = y\n";
    let alg = parse_algebra(text).unwrap();
    assert!(!jacobi_failures(&alg).is_empty());
}

#[test]
fn skew_violating_presentation_is_rejected_at_load() {
    let text = "[header]\nname = broken\ncase = K\nN = 1\n[generators]\nG odd 3/2\n\
                [brackets]\n[G, G] = (2*T + 4*lambda + chi*S) G\n";
    let err = parse_algebra(text).unwrap_err();
    assert!(err.to_string().contains("skew-symmetry"), "{err}");
}

#[test]
fn jacobi_detects_the_spin7_central_charge() {
    assert!(!jacobi_failures(&load("spin7")).is_empty());
}

#[test]
fn structural_identities_on_generators() {
    for name in ["B1", "F2", "K2", "W2", "N2asK1", "bcbg1", "cdr-abelian2"] {
        let alg = load(name);
        let eng = Engine::new(&alg);
        let gs = generators(&alg);
        assert!(parity_check(&alg).is_empty(), "{name}");
        assert!(weight_homogeneity_check(&alg).unwrap().is_empty(), "{name}");
        for a in &gs {
            for b in &gs {
                assert!(eng.skew_residual(a, b).unwrap().is_zero(), "{name} skew");
                let br = eng.bracket(a, b);
                assert!(eng.subst_minus_nabla(&eng.subst_minus_nabla(&br)) == br, "{name} involution");
                assert!(alg.quotient(&eng.quasi_comm_residual(a, b).unwrap()).is_zero(), "{name} qc");
                for c in &gs {
                    assert!(alg.quotient(&eng.quasi_assoc_residual(a, b, c).unwrap()).is_zero(), "{name} qa");
                }
            }
        }
    }
}

#[test]
fn skew_and_quasi_commutativity_hold_for_composite_fields() {
    let alg = load("B1");
    let eng = Engine::new(&alg);
    let fields: Vec<FieldExpr> =
        ["G", "Psi", "S Psi", ":Psi (T Psi):"].iter().map(|t| expr(&eng, t)).collect();
    for a in &fields {
        for b in &fields {
            assert!(eng.skew_residual(a, b).unwrap().is_zero());
            assert!(eng.quasi_comm_residual(a, b).unwrap().is_zero());
        }
    }
}

#[test]
fn weight_check_flags_inhomogeneous_structure_constants() {
    let text = "[header]\nname = heavy\ncase = K\nN = 1\n[generators]\nG odd 2\n\
                [brackets]\n[G, G] = (2*T + 3*lambda + chi*S) G\n";
    let alg = parse_algebra(text).unwrap();
    let defects = weight_homogeneity_check(&alg).unwrap();
    assert!(!defects.is_empty());
    assert_eq!(defects[0].pair, ("G".to_string(), "G".to_string()));
}

#[test]
fn parity_inconsistent_bracket_is_rejected() {
    let text = "[header]\nname = odd\ncase = K\nN = 1\n[generators]\nG even 3/2\n\
                [brackets]\n[G, G] = (2*T + 3*lambda + chi*S) G\n";
    let err = parse_algebra(text).unwrap_err();
    assert!(
        matches!(err.category(), "parity-inhomogeneous" | "invalid-input" | "not-local"),
        "unexpected category {}",
        err.category()
    );
}

#[test]
fn central_charges_of_catalogued_conformal_vectors() {
    let cases = [("K1", "c"), ("K2", "c"), ("W1", "c"), ("W2", "c"), ("F1", "3"), ("bcbg1", "3"), ("bcbg2", "6")];
    for (name, want) in cases {
        let alg = load(name);
        let eng = Engine::new(&alg);
        let c = eng.central_charge(&library::conformal_vector(&alg).unwrap()).unwrap();
        let want = if want == "c" { Scalar::param("c") } else { Scalar::from_int(want.parse().unwrap()) };
        assert_eq!(c, want, "{name}");
    }
}

#[test]
fn central_charge_rejects_a_non_virasoro_field() {
    let alg = load("B1");
    let eng = Engine::new(&alg);
    let err = eng.central_charge(&[expr(&eng, "Psi")]).unwrap_err();
    assert_eq!(err.category(), "not-super-virasoro");
}
