//! Acceptance harness: one PASS/FAIL line per criterion, with the failing sub-checks
//! listed underneath. Criterion 10 is report-only.
//!
//! The process exits nonzero when a failure appears that is not one of the known
//! deviations in `KNOWN_DEVIATIONS`, or when a known deviation unexpectedly passes.
//! The deviations are analysed in the repository README.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use susyva::distoracle;
use susyva::engine::{parity_check, Engine};
use susyva::expr::{Algebra, Atom, Bracket, FieldExpr};
use susyva::library;
use susyva::modes::{self, presets, Method, ModeTable};
use susyva::params::Case;
use susyva::parse::{parse_expr_with, parse_poly_with, parse_scalar};
use susyva::scalar::Scalar;

/// Sub-checks whose failure is documented and expected.
const KNOWN_DEVIATIONS: &[(u8, &str)] = &[
    (1, "[G_L G]"),
    (1, "central charge"),
    (6, "N=2 [T_-2, J_2]"),
    (6, "N=2 [T_1, J_-1]"),
    (6, "N=2 [T_2, J_-2]"),
];

/// Algebras of the Jacobi and structural suites.
const LINEAR_SUITE: &[&str] = &[
    "free-boson",
    "free-fermion",
    "F1",
    "F2",
    "B1",
    "B2",
    "W1",
    "W2",
    "K1",
    "K2",
    "K3",
    "N2asK1",
    "N4asK1",
    "cdr-abelian2",
];

struct Check {
    label: String,
    ok: bool,
    detail: String,
}

impl Check {
    fn new(label: impl Into<String>, ok: bool, detail: impl Into<String>) -> Check {
        Check { label: label.into(), ok, detail: detail.into() }
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

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

/// Compares `[a_Λ b]` with a polynomial written in the expression grammar, after the
/// quotient map on central generators.
fn bracket_check(eng: &Engine, a: &str, b: &str, expected: &str) -> Check {
    let alg = eng.alg;
    let actual = alg.quotient_bracket(&eng.bracket(&expr(eng, a), &expr(eng, b)));
    let want = alg.quotient_bracket(&parse_poly_with(eng, expected, 0).unwrap_or_else(|e| panic!("{expected}: {e}")));
    let mut diff: Bracket = actual.clone();
    diff.add_scaled(&want, &Scalar::from_int(-1));
    Check::new(
        format!("[{a}_L {b}]"),
        diff.is_zero(),
        format!("expected {expected}, got {}", alg.render_bracket(&actual)),
    )
}

fn central_charge_check(alg: &Algebra, fields: &[FieldExpr], expected: &Scalar) -> Check {
    let eng = Engine::new(alg);
    match eng.central_charge(fields) {
        Ok(c) => Check::new("central charge", &c == expected, format!("expected {expected}, got {c}")),
        Err(e) => Check::new("central charge", false, format!("not of super-Virasoro form: {e}")),
    }
}

fn criterion_1() -> Vec<Check> {
    let alg = load("B1");
    let eng = Engine::new(&alg);
    let mut out = vec![
        bracket_check(&eng, "Psi", "S Psi", "lambda"),
        bracket_check(&eng, "S Psi", "Psi", "-lambda"),
        bracket_check(&eng, "S Psi", "S Psi", "chi*lambda"),
        bracket_check(&eng, "Psi", "G", "(lambda + chi*S) Psi + m*lambda*chi"),
        bracket_check(&eng, "G", "G", "(2*T + 3*lambda + chi*S) G - m^2*lambda^2*chi"),
    ];
    let want = parse_scalar(&alg, "-3*m^2").expect("scalar");
    out.push(central_charge_check(&alg, &library::conformal_vector(&alg).expect("B1 conformal"), &want));
    out
}

fn criterion_2() -> Vec<Check> {
    let alg = load("F1");
    let eng = Engine::new(&alg);
    vec![
        bracket_check(&eng, "nu", "nu", "(T + 2*lambda) nu"),
        bracket_check(&eng, "tau", "tau", "S tau + lambda*chi"),
        bracket_check(&eng, "nu", "tau", "(T + lambda) tau - chi*nu + 1/2*lambda^2"),
        central_charge_check(&alg, &library::conformal_vector(&alg).expect("F1 conformal"), &Scalar::from_int(3)),
    ]
}

fn criterion_3() -> Vec<Check> {
    [1usize, 2]
        .iter()
        .map(|&n| {
            let alg = load(&format!("bcbg{n}"));
            let mut c = central_charge_check(
                &alg,
                &library::conformal_vector(&alg).expect("bcbg conformal"),
                &Scalar::from_int(3 * n as i64),
            );
            c.label = format!("n={n} {}", c.label);
            c
        })
        .collect()
}

fn criterion_4() -> Vec<Check> {
    let alg = load("affine-sl2");
    // k dim g / (k + h) + dim g / 2 with dim sl2 = 3, h = 2, k = 1
    let (k, dim, h) = (q(1, 1), q(3, 1), q(2, 1));
    let c = &k * &dim / (&k + &h) + &dim / q(2, 1);
    vec![central_charge_check(
        &alg,
        &library::conformal_vector(&alg).expect("KT conformal"),
        &Scalar::from_rational(c),
    )]
}

/// Nonzero Jacobi residuals of all generator triples, rendered.
fn jacobi_failures(alg: &Algebra) -> (usize, Vec<String>) {
    let gs = generators(alg);
    let mut triples = Vec::new();
    for x in &gs {
        for y in &gs {
            for z in &gs {
                triples.push((x.clone(), y.clone(), z.clone()));
            }
        }
    }
    let bad: Vec<String> = triples
        .par_iter()
        .filter_map(|(x, y, z)| {
            let eng = Engine::new(alg);
            let names = format!("({}, {}, {})", alg.render_expr(x), alg.render_expr(y), alg.render_expr(z));
            match eng.jacobi_residual(x, y, z) {
                Ok(r) => {
                    let r = r.map_coeffs(|e| alg.quotient(e));
                    (!r.is_zero()).then(|| format!("{names}: {}", alg.render_mixed(&r)))
                }
                Err(e) => Some(format!("{names}: error {e}")),
            }
        })
        .collect();
    (triples.len(), bad)
}

fn criterion_5() -> Vec<Check> {
    LINEAR_SUITE
        .iter()
        .map(|name| {
            let alg = load(name);
            let (n, bad) = jacobi_failures(&alg);
            Check::new(*name, bad.is_empty(), format!("{n} triples, {} nonzero; {}", bad.len(), bad.join("; ")))
        })
        .collect()
}

/// Table entry compared with `Σ coeff·field_index + central`.
fn table_check(
    label: &str,
    table: &ModeTable,
    (left, m): (&str, &BigRational),
    (right, n): (&str, &BigRational),
    expected: &[(&str, Scalar)],
    central: Scalar,
) -> Check {
    let name = format!("{label} [{left}_{m}, {right}_{n}]");
    let Some(v) = table.get(left, m, right, n) else {
        return Check::new(name, false, "entry missing from table");
    };
    let got: BTreeMap<String, Scalar> =
        v.terms.iter().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (table.fields[*i].name.clone(), c.clone())).collect();
    let want: BTreeMap<String, Scalar> =
        expected.iter().filter(|(_, c)| !c.is_zero()).map(|(f, c)| (f.to_string(), c.clone())).collect();
    let ok = got == want && v.central == central;
    let want_text: Vec<String> = want.iter().map(|(f, c)| format!("({c})*{f}_{}", m + n)).collect();
    Check::new(
        name,
        ok,
        format!("expected {} + ({central}), got {}", want_text.join(" + "), v.render(&table.fields)),
    )
}

fn range(lo: BigRational, hi: BigRational, step: BigRational) -> Vec<BigRational> {
    let mut out = Vec::new();
    let mut x = lo;
    while x <= hi {
        out.push(x.clone());
        x += &step;
    }
    out
}

fn rs(r: &BigRational) -> Scalar {
    Scalar::from_rational(r.clone())
}

fn criterion_6() -> Vec<Check> {
    let mut out = Vec::new();
    let one = BigRational::one();
    let delta = |m: &BigRational, n: &BigRational| (m + n).is_zero();

    let k1 = load("K1");
    let eng = Engine::new(&k1);
    let c = Scalar::param("c");
    // Virasoro, m, n in [-3, 3]
    let vir = presets::virasoro_k1(&k1).expect("virasoro fields");
    let table = modes::mode_table(&eng, &vir, &q(-3, 1), &q(3, 1), Method::ClosedForm).expect("table");
    for m in range(q(-3, 1), q(3, 1), one.clone()) {
        for n in range(q(-3, 1), q(3, 1), one.clone()) {
            let central = if delta(&m, &n) { c.scale(&((&m * &m * &m - &m) / q(12, 1))) } else { Scalar::zero() };
            out.push(table_check("Vir", &table, ("L", &m), ("L", &n), &[("L", rs(&(&m - &n)))], central));
        }
    }
    // Neveu-Schwarz, r, s in {±1/2, ±3/2}; L modes in the same window
    let ns = presets::neveu_schwarz_k1(&k1).expect("ns fields");
    let table = modes::mode_table(&eng, &ns, &q(-3, 2), &q(3, 2), Method::ClosedForm).expect("table");
    let halves = range(q(-3, 2), q(3, 2), one.clone());
    let ints = range(q(-1, 1), q(1, 1), one.clone());
    for r in &halves {
        for s in &halves {
            let central = if delta(r, s) { c.scale(&((r * r - q(1, 4)) / q(3, 1))) } else { Scalar::zero() };
            out.push(table_check("NS", &table, ("G", r), ("G", s), &[("L", Scalar::from_int(2))], central));
        }
        for n in &ints {
            out.push(table_check("NS", &table, ("G", r), ("L", n), &[("G", rs(&(r - n / q(2, 1))))], Scalar::zero()));
        }
    }
    // N=2 from the W1 superfields, m, n in [-2, 2]
    let w1 = load("W1");
    let eng = Engine::new(&w1);
    let n2 = presets::n2_from_w1(&w1).expect("n2 fields");
    let table = modes::mode_table(&eng, &n2, &q(-2, 1), &q(2, 1), Method::ClosedForm).expect("table");
    let ints = range(q(-2, 1), q(2, 1), one.clone());
    for m in &ints {
        for n in &ints {
            let d = delta(m, n);
            let z = Scalar::zero;
            out.push(table_check("N=2", &table, ("T", m), ("T", n), &[("T", rs(&(m - n)))], z()));
            out.push(table_check("N=2", &table, ("Q", m), ("Q", n), &[], z()));
            out.push(table_check("N=2", &table, ("H", m), ("H", n), &[], z()));
            out.push(table_check("N=2", &table, ("T", m), ("H", n), &[("H", rs(&-n))], z()));
            let tj = if d { c.scale(&-(m * (m + &one) / q(12, 1))) } else { z() };
            out.push(table_check("N=2", &table, ("T", m), ("J", n), &[("J", rs(&-n))], tj));
            out.push(table_check("N=2", &table, ("T", m), ("Q", n), &[("Q", rs(&(m - n)))], z()));
            let hq = if d { c.scale(&(m * (m - &one) / q(6, 1))) } else { z() };
            out.push(table_check("N=2", &table, ("H", m), ("Q", n), &[("T", Scalar::one()), ("J", rs(&-m))], hq));
        }
    }
    out
}

fn criterion_7() -> Vec<Check> {
    let alg = load("K1");
    let eng = Engine::new(&alg);
    let mut out = Vec::new();
    for (label, fields, lo, hi) in [
        ("Virasoro", presets::virasoro_k1(&alg).expect("fields"), q(-3, 1), q(3, 1)),
        ("NS", presets::neveu_schwarz_k1(&alg).expect("fields"), q(-3, 2), q(3, 2)),
    ] {
        let closed = modes::mode_table(&eng, &fields, &lo, &hi, Method::ClosedForm).expect("closed form");
        let ope = modes::mode_table(&eng, &fields, &lo, &hi, Method::Ope).expect("ope");
        let mut mismatches = Vec::new();
        for (a, b) in closed.entries.iter().zip(&ope.entries) {
            if a.left != b.left || a.right != b.right || a.value != b.value {
                mismatches.push(format!("{} vs {}", closed.render_entry(a), ope.render_entry(b)));
            }
        }
        out.push(Check::new(
            label,
            mismatches.is_empty() && closed.entries.len() == ope.entries.len(),
            format!("{} entries; {}", closed.entries.len(), mismatches.join("; ")),
        ));
    }
    out
}

fn criterion_8() -> Vec<Check> {
    let cases: Vec<(Case, u8)> = [Case::W, Case::K].iter().flat_map(|&c| (0..=3).map(move |n| (c, n))).collect();
    cases
        .par_iter()
        .flat_map(|&(case, n)| {
            distoracle::run_suite(case, n, (-8, 8))
                .into_iter()
                .map(|r| Check::new(format!("{case:?} N={n} {}", r.name), r.passed, r.detail))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Random text in the expression grammar over the generators of `alg`.
fn fuzz_expression(alg: &Algebra, rng: &mut impl rand::Rng) -> String {
    let names: Vec<String> =
        (0..alg.gens.len() as u16).filter(|g| !alg.gen(*g).central).map(|g| alg.gen(g).name.clone()).collect();
    let n = alg.n;
    let atom = |rng: &mut dyn rand::RngCore| -> String {
        let mut s = String::new();
        for _ in 0..rand::Rng::gen_range(rng, 0..3u32) {
            s.push_str("T ");
        }
        for i in 1..=n {
            if rand::Rng::gen_bool(rng, 0.4) {
                if n == 1 {
                    s.push_str("S ");
                } else {
                    s.push_str(&format!("S{i} "));
                }
            }
        }
        let g = &names[rand::Rng::gen_range(rng, 0..names.len())];
        if s.is_empty() {
            g.clone()
        } else {
            format!("({s}{g})")
        }
    };
    let terms = rng.gen_range(1..4);
    let mut parts = Vec::new();
    for _ in 0..terms {
        let len = rng.gen_range(1..4);
        let atoms: Vec<String> = (0..len).map(|_| atom(rng)).collect();
        let body = if len == 1 { atoms[0].clone() } else { format!(":{}:", atoms.join(" ")) };
        let (num, den) = (rng.gen_range(-5..6), rng.gen_range(1..4));
        parts.push(format!("({num}/{den})*{body}"));
    }
    parts.join(" + ")
}

fn criterion_9() -> Vec<Check> {
    use rand::SeedableRng;
    let mut out: Vec<Check> = LINEAR_SUITE
        .par_iter()
        .flat_map(|name| {
            let alg = load(name);
            let eng = Engine::new(&alg);
            let gs = generators(&alg);
            let mut skew = Vec::new();
            let mut involution = Vec::new();
            let mut parity = parity_check(&alg);
            let mut qc = Vec::new();
            for a in &gs {
                for b in &gs {
                    let label = format!("({}, {})", alg.render_expr(a), alg.render_expr(b));
                    let br = eng.bracket(a, b);
                    match eng.skew_residual(a, b) {
                        Ok(r) if r.is_zero() => {}
                        Ok(r) => skew.push(format!("{label}: {}", alg.render_bracket(&r))),
                        Err(e) => skew.push(format!("{label}: {e}")),
                    }
                    if eng.subst_minus_nabla(&eng.subst_minus_nabla(&br)) != br {
                        involution.push(label.clone());
                    }
                    let want = (alg.parity(a).unwrap() + alg.parity(b).unwrap() + alg.n as usize) % 2;
                    for (m, e) in br.terms() {
                        for (w, _) in e.terms() {
                            if (m.parity() + alg.word_parity(w)) % 2 != want {
                                parity.push(label.clone());
                            }
                        }
                    }
                    match eng.quasi_comm_residual(a, b) {
                        Ok(r) if alg.quotient(&r).is_zero() => {}
                        Ok(r) => qc.push(format!("{label}: {}", alg.render_expr(&r))),
                        Err(e) => qc.push(format!("{label}: {e}")),
                    }
                }
            }
            let mut qa = Vec::new();
            for a in &gs {
                for b in &gs {
                    for c in &gs {
                        match eng.quasi_assoc_residual(a, b, c) {
                            Ok(r) if alg.quotient(&r).is_zero() => {}
                            Ok(r) => qa.push(alg.render_expr(&r)),
                            Err(e) => qa.push(e.to_string()),
                        }
                    }
                }
            }
            parity.dedup();
            vec![
                Check::new(format!("{name} double skew"), skew.is_empty() && involution.is_empty(), {
                    let mut v = skew;
                    v.extend(involution.into_iter().map(|l| format!("{l}: substitution not an involution")));
                    v.join("; ")
                }),
                Check::new(format!("{name} bracket parity"), parity.is_empty(), parity.join("; ")),
                Check::new(format!("{name} quasi-commutativity"), qc.is_empty(), qc.join("; ")),
                Check::new(format!("{name} quasi-associativity"), qa.is_empty(), qa.join("; ")),
            ]
        })
        .collect();

    // canonical form idempotence and render/parse round trip on fuzz-generated expressions
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let algebras: Vec<Algebra> = LINEAR_SUITE.iter().map(|n| load(n)).collect();
    let mut failures = Vec::new();
    let total = 1000;
    for k in 0..total {
        let alg = &algebras[k % algebras.len()];
        let eng = Engine::new(alg);
        let text = fuzz_expression(alg, &mut rng);
        let e = match parse_expr_with(&eng, &text) {
            Ok(e) => e,
            Err(err) => {
                failures.push(format!("{}: {text}: {err}", alg.name));
                continue;
            }
        };
        let once = eng.normalize(&e);
        let twice = eng.normalize(&once);
        if once != e || twice != once {
            failures.push(format!("{}: {text}: not idempotent", alg.name));
        }
        match parse_expr_with(&eng, &alg.render_expr(&once)) {
            Ok(back) if back == once => {}
            _ => failures.push(format!("{}: {text}: render/parse round trip", alg.name)),
        }
    }
    out.push(Check::new(
        format!("canonical form on {total} fuzz expressions"),
        failures.is_empty(),
        failures.join("; "),
    ));
    out
}

fn criterion_10() {
    for name in ["spin7", "spin7-c12", "odake"] {
        let alg = load(name);
        let t = Instant::now();
        let (n, bad) = jacobi_failures(&alg);
        println!("    {name}: {n} triples, {} nonzero Jacobi residuals ({:.1?})", bad.len(), t.elapsed());
        for line in bad {
            println!("      {line}");
        }
    }
}

fn main() {
    type Runner = fn() -> Vec<Check>;
    let criteria: [(u8, &str, Runner); 9] = [
        (1, "B1 bracket suite", criterion_1),
        (2, "F1 bracket suite", criterion_2),
        (3, "bc-beta-gamma central charges", criterion_3),
        (4, "affine supercurrents of sl2 at k=1", criterion_4),
        (5, "Jacobi identity on generator triples", criterion_5),
        (6, "Virasoro, Neveu-Schwarz and N=2 mode tables", criterion_6),
        (7, "K1 closed-form modes against OPE coefficients", criterion_7),
        (8, "distribution calculus suite, N <= 3", criterion_8),
        (9, "structural properties and canonical form", criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (id, title, run) in criteria {
        let t = Instant::now();
        let checks = run();
        let failed: Vec<&Check> = checks.iter().filter(|c| !c.ok).collect();
        let status = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {status}: {title} ({} of {} checks, {:.1?})",
            checks.len() - failed.len(),
            checks.len(),
            t.elapsed()
        );
        for c in &failed {
            let known = KNOWN_DEVIATIONS.contains(&(id, c.label.as_str()));
            println!("    {} {}: {}", if known { "known deviation" } else { "FAILED" }, c.label, c.detail);
            if !known {
                unexpected.push(format!("criterion {id}: {}", c.label));
            }
        }
        for &(_, label) in KNOWN_DEVIATIONS.iter().filter(|(k, _)| *k == id) {
            if checks.iter().any(|c| c.label == label && c.ok) {
                unexpected.push(format!("criterion {id}: known deviation {label} now passes"));
            }
        }
    }
    let t = Instant::now();
    println!("criterion 10 REPORT: Spin7 and Odake Jacobi residuals (non-gating)");
    criterion_10();
    println!("    ({:.1?})", t.elapsed());
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance results:\n  {}", unexpected.join("\n  "));
        std::process::exit(1);
    }
}
