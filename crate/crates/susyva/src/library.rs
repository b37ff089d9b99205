//! Built-in algebra presentations.
//!
//! Every entry is produced as algebra-file text and loaded through
//! [`parse_algebra`](crate::parse::parse_algebra), so the catalog exercises the same
//! validation as user files. Central generators carry their quotient value; entries
//! whose examples are stated after the quotient (`B_N`, `F_N`, free fields) use the
//! vacuum directly.
//!
//! | name | case | N | generators |
//! |---|---|---|---|
//! | `B<N>` | K | N | boson-fermion superfield `Psi` |
//! | `F<N>` | W | N | free fields `alpha`, `phi` |
//! | `W<N>` | W | N | `L`, `Q1..QN` (central extension for N ≤ 2) |
//! | `K<N>` | K | N | super Virasoro `G` (central extension for N ≤ 4) |
//! | `N2asK1`, `N4asK1` | K | 1 | `G`, `J` / `G`, `J1..J3` |
//! | `bcbg<n>` | K | 1 | `B1..Bn`, `Psi1..Psin` |
//! | `affine-sl2` | K | 1 | affine supercurrents of sl₂ at level 1 |
//! | `spin7`, `spin7-c12`, `odake` | K | 1 | quadratic presentations |
//! | `cdr-abelian2` | K | 1 | chiral de Rham local brackets on the plane |
//! | `free-boson`, `free-fermion` | W | 0 | `alpha` / `phi` |

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::expr::{Algebra, FieldExpr};
use crate::params::Case;
use crate::parse::{parse_algebra, parse_expr};

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// A rational as a parenthesised literal accepted by the expression grammar.
fn lit(r: &BigRational) -> String {
    if r.is_integer() {
        if r.is_negative() {
            format!("({})", r.numer())
        } else {
            r.numer().to_string()
        }
    } else if r.is_negative() {
        format!("(-{}/{})", -r.numer(), r.denom())
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

fn chi_word(n: u8) -> String {
    if n == 1 {
        return "chi".into();
    }
    (1..=n).map(|i| format!("chi{i}")).collect::<Vec<_>>().join("*")
}

fn s_letter(n: u8, i: u8) -> String {
    if n == 1 {
        "S".into()
    } else {
        format!("S{i}")
    }
}

fn chi_letter(n: u8, i: u8) -> String {
    if n == 1 {
        "chi".into()
    } else {
        format!("chi{i}")
    }
}

/// Catalogued names with one-line descriptions.
pub fn names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("B1", "boson-fermion system, K case N=1, [Psi_L Psi] = chi"),
        ("B2", "boson-fermion system, K case N=2, [Psi_L Psi] = lambda chi1 chi2"),
        ("F1", "free fields, W case N=1, [alpha_L phi] = 1"),
        ("F2", "free fields, W case N=2, [alpha_L phi] = 1"),
        ("W1", "W_1 with central extension (quotient C = c)"),
        ("W2", "W_2 with central extension (quotient C = c)"),
        ("K1", "K_1 (Neveu-Schwarz) with central extension"),
        ("K2", "K_2 (N=2) with central extension"),
        ("K3", "K_3 with central extension"),
        ("K4", "K_4 with central extension lambda C"),
        ("N2asK1", "N=2 vertex algebra as an N_K=1 algebra"),
        ("N4asK1", "N=4 vertex algebra as an N_K=1 algebra"),
        ("bcbg1", "bc-beta-gamma system with n=1"),
        ("bcbg2", "bc-beta-gamma system with n=2"),
        ("affine-sl2", "affine supercurrents of sl2 at level k=1"),
        ("spin7", "Spin7 holonomy algebra (quadratic)"),
        ("spin7-c12", "Spin7 brackets with central charge 12 (Jacobi-consistent)"),
        ("odake", "Odake algebra of central charge 9 (quadratic)"),
        ("cdr-abelian2", "chiral de Rham local brackets, 2-dimensional abelian vector fields"),
        ("free-boson", "free boson, N=0, [alpha_lambda alpha] = lambda"),
        ("free-fermion", "free fermion, N=0, [phi_lambda phi] = 1"),
    ]
}

/// Looks up a catalogued algebra. Families accept any index: `B<N>`, `F<N>`, `W<N>`,
/// `K<N>` and `bcbg<n>`.
pub fn get(name: &str) -> Result<Algebra> {
    let indexed = |prefix: &str| -> Option<u8> {
        name.strip_prefix(prefix).and_then(|r| r.parse::<u8>().ok())
    };
    let alg = match name {
        "N2asK1" => n2_as_k1(),
        "N4asK1" => n4_as_k1(),
        "affine-sl2" => affine_supercurrents(&LieData::sl2(), &q(1, 1)),
        "spin7" => spin7(),
        "spin7-c12" => spin7_with_central_charge("spin7-c12", &q(12, 1)),
        "odake" => odake(),
        "cdr-abelian2" => chiral_de_rham(&CdrData::abelian(2)),
        "free-boson" => free_boson(),
        "free-fermion" => free_fermion(),
        _ => {
            if let Some(n) = indexed("bcbg") {
                bcbg(n as usize)
            } else if let Some(n) = indexed("B") {
                boson_fermion(n)
            } else if let Some(n) = indexed("F") {
                free_fields_w(n)
            } else if let Some(n) = indexed("W") {
                w_series(n)
            } else if let Some(n) = indexed("K") {
                k_series(n)
            } else {
                return Err(Error::UnknownAlgebra(name.to_string()));
            }
        }
    }?;
    Ok(alg)
}

/// The expressions named in the `[conformal]` section, parsed in canonical form.
pub fn conformal_vector(alg: &Algebra) -> Result<Vec<FieldExpr>> {
    if alg.conformal.is_empty() {
        return Err(Error::invalid(format!("{} has no documented conformal vector", alg.name)));
    }
    let eng = Engine::new(alg);
    alg.conformal
        .iter()
        .map(|n| crate::parse::parse_expr_with(&eng, n))
        .collect()
}

/// `B_N`: one superfield `Psi` of parity `N mod 2` with `[Psi_Λ Psi] = Λ^{1|N}` (N even)
/// or `Λ^{0|N}` (N odd).
pub fn boson_fermion(n: u8) -> Result<Algebra> {
    if n == 0 {
        return Err(Error::invalid("B_N needs N ≥ 1"));
    }
    let parity = if n % 2 == 1 { "odd" } else { "even" };
    let weight = if n % 2 == 1 { "1/2" } else { "1" };
    let rhs = if n % 2 == 1 { chi_word(n) } else { format!("lambda*{}", chi_word(n)) };
    let mut t = String::new();
    writeln!(t, "[header]\nname = B{n}\ncase = K\nN = {n}").unwrap();
    if n == 1 {
        t.push_str("params = m\n");
    }
    writeln!(t, "description = boson-fermion system\n[generators]\nPsi {parity} {weight}").unwrap();
    writeln!(t, "[brackets]\n[Psi, Psi] = {rhs}").unwrap();
    if n == 1 {
        t.push_str("[definitions]\nG = :(S Psi) Psi: + m*T Psi\n[conformal]\nG\n");
    }
    parse_algebra(&t)
}

/// `F_N`: `alpha` even, `phi` of parity `N mod 2`, `[alpha_Λ phi] = 1`.
pub fn free_fields_w(n: u8) -> Result<Algebra> {
    let parity = if n % 2 == 1 { "odd" } else { "even" };
    let mut t = String::new();
    writeln!(t, "[header]\nname = F{n}\ncase = W\nN = {n}").unwrap();
    writeln!(t, "description = free fields\n[generators]\nalpha even 0\nphi {parity} 1").unwrap();
    t.push_str("[brackets]\n[alpha, phi] = 1\n");
    if n == 1 {
        t.push_str("[definitions]\nnu = :(T alpha) phi:\ntau = -:(S alpha) phi:\n[conformal]\nnu, tau\n");
    }
    parse_algebra(&t)
}

/// `𝒲_N` with the central extension for `N ≤ 2`.
pub fn w_series(n: u8) -> Result<Algebra> {
    let lp = if n.is_multiple_of(2) { "even" } else { "odd" };
    let qp = if n.is_multiple_of(2) { "odd" } else { "even" };
    let qname = |i: u8| if n == 1 { "Q".to_string() } else { format!("Q{i}") };
    let mut t = String::new();
    writeln!(t, "[header]\nname = W{n}\ncase = W\nN = {n}").unwrap();
    let central = n <= 2;
    if central {
        t.push_str("params = c\n");
    }
    writeln!(t, "description = W_N superconformal algebra\n[generators]\nL {lp} 2").unwrap();
    for i in 1..=n {
        writeln!(t, "{} {qp} 1", qname(i)).unwrap();
    }
    if central {
        t.push_str("C even 0 central quotient=c\n");
    }
    t.push_str("[brackets]\n");
    let vir = if n == 0 { " + 1/12*lambda^3*C" } else { "" };
    writeln!(t, "[L, L] = (T + 2*lambda) L{vir}").unwrap();
    let sign = if n.is_multiple_of(2) { "+" } else { "-" };
    for i in 1..=n {
        let cocycle = if n == 1 { " + 1/6*lambda^2*C" } else { "" };
        writeln!(
            t,
            "[L, {q}] = (T + lambda) {q} {sign} {c} L{cocycle}",
            q = qname(i),
            c = chi_letter(n, i)
        )
        .unwrap();
    }
    for i in 1..=n {
        for j in i..=n {
            let (qi, qj) = (qname(i), qname(j));
            let (si, ci, cj) = (s_letter(n, i), chi_letter(n, i), chi_letter(n, j));
            let mut rhs = format!("({si} + {ci}) {qj} - {cj} {qi}");
            if n == 1 {
                rhs.push_str(" + 1/3*lambda*chi*C");
            }
            if n == 2 && i == 1 && j == 2 {
                rhs.push_str(" + 1/6*lambda*C");
            }
            writeln!(t, "[{qi}, {qj}] = {rhs}").unwrap();
        }
    }
    t.push_str("[conformal]\nL");
    for i in 1..=n {
        write!(t, ", {}", qname(i)).unwrap();
    }
    t.push('\n');
    parse_algebra(&t)
}

fn super_virasoro_rhs(n: u8, central: &str) -> String {
    let k = 4 - n as i64;
    let mut op = match k.signum() {
        1 => format!("2*T + {k}*lambda"),
        -1 => format!("2*T - {}*lambda", -k),
        _ => "2*T".to_string(),
    };
    for i in 1..=n {
        write!(op, " + {}*{}", chi_letter(n, i), s_letter(n, i)).unwrap();
    }
    format!("({op}) G{central}")
}

fn k_central(n: u8) -> String {
    match n {
        0 => " + 1/3*lambda^3*C".into(),
        1 | 2 => format!(" + 1/3*lambda^{}*{}*C", 3 - n, chi_word(n)),
        3 => format!(" + 1/3*{}*C", chi_word(3)),
        4 => " + lambda*C".into(),
        _ => String::new(),
    }
}

/// `𝒦_N` with the central extension for `N ≤ 4`.
pub fn k_series(n: u8) -> Result<Algebra> {
    let parity = if n.is_multiple_of(2) { "even" } else { "odd" };
    let weight = lit(&(q(2, 1) - q(n as i64, 2)));
    let weight = weight.trim_matches(|c| c == '(' || c == ')');
    let central = n <= 4;
    let mut t = String::new();
    writeln!(t, "[header]\nname = K{n}\ncase = K\nN = {n}").unwrap();
    if central {
        t.push_str("params = c\n");
    }
    if n == 2 {
        t.push_str("imaginary = true\n");
    }
    writeln!(t, "description = K_N superconformal algebra\n[generators]\nG {parity} {weight}")
        .unwrap();
    if central {
        t.push_str("C even 0 central quotient=c\n");
    }
    writeln!(t, "[brackets]\n[G, G] = {}", super_virasoro_rhs(n, &k_central(n))).unwrap();
    t.push_str("[conformal]\nG\n");
    parse_algebra(&t)
}

fn k1_header(name: &str, params: &str, imaginary: bool, desc: &str) -> String {
    let mut t = format!("[header]\nname = {name}\ncase = K\nN = 1\n");
    if !params.is_empty() {
        writeln!(t, "params = {params}").unwrap();
    }
    if imaginary {
        t.push_str("imaginary = true\n");
    }
    writeln!(t, "description = {desc}").unwrap();
    t
}

/// The N=2 vertex algebra as an `N_K = 1` algebra generated by `G` and `J`.
pub fn n2_as_k1() -> Result<Algebra> {
    let mut t = k1_header("N2asK1", "c", false, "N=2 vertex algebra as an N_K=1 algebra");
    t.push_str("[generators]\nG odd 3/2\nJ even 1\nC even 0 central quotient=c\n[brackets]\n");
    t.push_str("[G, G] = (2*T + 3*lambda + chi*S) G + 1/3*lambda^2*chi*C\n");
    t.push_str("[G, J] = (2*T + 2*lambda + chi*S) J\n");
    t.push_str("[J, J] = G + 1/3*lambda*chi*C\n[conformal]\nG\n");
    parse_algebra(&t)
}

/// The N=4 vertex algebra as an `N_K = 1` algebra of rank 3|1.
pub fn n4_as_k1() -> Result<Algebra> {
    let mut t = k1_header("N4asK1", "c", true, "N=4 vertex algebra as an N_K=1 algebra");
    t.push_str("[generators]\nG odd 3/2\nJ1 even 1\nJ2 even 1\nJ3 even 1\n");
    t.push_str("C even 0 central quotient=c\n[brackets]\n");
    t.push_str("[G, G] = (2*T + 3*lambda + chi*S) G + 1/3*lambda^2*chi*C\n");
    for i in 1..=3 {
        writeln!(t, "[G, J{i}] = (2*T + 2*lambda + chi*S) J{i}").unwrap();
        writeln!(t, "[J{i}, J{i}] = G + 1/3*lambda*chi*C").unwrap();
    }
    t.push_str("[J1, J2] = i*(S + 2*chi) J3\n");
    t.push_str("[J1, J3] = -i*(S + 2*chi) J2\n");
    t.push_str("[J2, J3] = i*(S + 2*chi) J1\n[conformal]\nG\n");
    parse_algebra(&t)
}

/// The bc-βγ system with `n` pairs `(B^i, Psi^i)`, `[B^i_Λ Psi^j] = δ_ij`.
pub fn bcbg(n: usize) -> Result<Algebra> {
    if n == 0 {
        return Err(Error::invalid("bcbg needs n ≥ 1"));
    }
    let mut t = k1_header(&format!("bcbg{n}"), "", false, "bc-beta-gamma system");
    t.push_str("[generators]\n");
    for i in 1..=n {
        writeln!(t, "B{i} even 0").unwrap();
    }
    for i in 1..=n {
        writeln!(t, "Psi{i} odd 1/2").unwrap();
    }
    t.push_str("[brackets]\n");
    for i in 1..=n {
        writeln!(t, "[B{i}, Psi{i}] = 1").unwrap();
    }
    let g: Vec<String> =
        (1..=n).map(|i| format!(":(S B{i}) (S Psi{i}): + :(T B{i}) Psi{i}:")).collect();
    writeln!(t, "[definitions]\nG = {}\n[conformal]\nG", g.join(" + ")).unwrap();
    parse_algebra(&t)
}

/// Spin₇ algebra as presented: super Virasoro `G` of central charge 1/2 and an even `X`
/// of weight 2.
pub fn spin7() -> Result<Algebra> {
    spin7_with_central_charge("spin7", &q(1, 2))
}

/// Spin₇ brackets with the super Virasoro central charge `c` as a free choice. The
/// Jacobi identity on generators holds exactly for `c = 12`.
pub fn spin7_with_central_charge(name: &str, c: &BigRational) -> Result<Algebra> {
    let mut t = k1_header(name, "", false, "Spin7 holonomy vertex algebra");
    t.push_str("[generators]\nG odd 3/2\nX even 2\n[brackets]\n");
    writeln!(t, "[G, G] = (2*T + 3*lambda + chi*S) G + {}*lambda^2*chi", lit(&(c / q(3, 1)))).unwrap();
    t.push_str("[G, X] = (2*T + chi*S + 4*lambda) X + 1/2*chi*lambda*G + 2/3*lambda^3\n");
    t.push_str(
        "[X, X] = 5/2*T*S X + 5/4*T^2 G + 6 :G X: + 8*(chi*T + lambda*S + 2*lambda*chi) X \
         + 15/4*lambda*(T + lambda) G + 8/3*lambda^3*chi\n",
    );
    t.push_str("[conformal]\nG\n");
    parse_algebra(&t)
}

/// Odake's algebra: an N=2 pair `(G, J)` of central charge 9 and odd primaries `Xp`, `Xm`.
pub fn odake() -> Result<Algebra> {
    let mut t = k1_header("odake", "", false, "Odake vertex algebra of central charge 9");
    t.push_str("[generators]\nG odd 3/2\nJ even 1\nXp odd 3/2\nXm odd 3/2\n[brackets]\n");
    t.push_str("[G, G] = (2*T + 3*lambda + chi*S) G + 3*lambda^2*chi\n");
    t.push_str("[G, J] = (2*T + 2*lambda + chi*S) J\n");
    t.push_str("[G, Xp] = (2*T + 3*lambda + chi*S) Xp\n");
    t.push_str("[G, Xm] = (2*T + 3*lambda + chi*S) Xm\n");
    t.push_str("[J, J] = G + 3*lambda*chi\n");
    t.push_str("[J, Xp] = (S + 3*chi) Xp\n");
    t.push_str("[J, Xm] = -(S + 3*chi) Xm\n");
    t.push_str(
        "[Xp, Xm] = :J G: + :J (S J): + T G + T*S J + chi*(:J J: + T J) \
         + lambda*(G + S J) + 2*lambda*chi*J + lambda^2*chi\n",
    );
    t.push_str("[conformal]\nG\n");
    parse_algebra(&t)
}

/// Free boson, `N = 0`.
pub fn free_boson() -> Result<Algebra> {
    parse_algebra(
        "[header]\nname = free-boson\ncase = W\nN = 0\ndescription = free boson\n\
         [generators]\nalpha even 1\n[brackets]\n[alpha, alpha] = lambda\n\
         [definitions]\nL = 1/2 :alpha alpha:\n[conformal]\nL\n",
    )
}

/// Free fermion, `N = 0`.
pub fn free_fermion() -> Result<Algebra> {
    parse_algebra(
        "[header]\nname = free-fermion\ncase = W\nN = 0\ndescription = free fermion\n\
         [generators]\nphi odd 1/2\n[brackets]\n[phi, phi] = 1\n\
         [definitions]\nL = 1/2 :(T phi) phi:\n[conformal]\nL\n",
    )
}

// --------------------------------------------------------------------------------------
// Lie algebra data, currents and affine supercurrents

/// A finite-dimensional (even) Lie algebra with an invariant symmetric bilinear form.
#[derive(Clone, Debug)]
pub struct LieData {
    pub names: Vec<String>,
    /// `[a_i, a_j] = Σ_k bracket[i][j][k] a_k`.
    pub bracket: Vec<Vec<Vec<BigRational>>>,
    pub form: Vec<Vec<BigRational>>,
    /// Half the Casimir eigenvalue on the adjoint representation.
    pub dual_coxeter: BigRational,
}

impl LieData {
    /// `sl₂` with basis `e, f, h`, trace form and `h^∨ = 2`.
    pub fn sl2() -> LieData {
        let z = BigRational::zero;
        let mut br = vec![vec![vec![z(); 3]; 3]; 3];
        // [e,f] = h, [h,e] = 2e, [h,f] = -2f
        br[0][1][2] = q(1, 1);
        br[1][0][2] = q(-1, 1);
        br[2][0][0] = q(2, 1);
        br[0][2][0] = q(-2, 1);
        br[2][1][1] = q(-2, 1);
        br[1][2][1] = q(2, 1);
        let form = vec![
            vec![z(), q(1, 1), z()],
            vec![q(1, 1), z(), z()],
            vec![z(), z(), q(2, 1)],
        ];
        LieData {
            names: vec!["e".into(), "f".into(), "h".into()],
            bracket: br,
            form,
            dual_coxeter: q(2, 1),
        }
    }

    /// Abelian Lie algebra of dimension `d` with the identity form and `h^∨ = 0`.
    pub fn abelian(d: usize) -> LieData {
        let mut form = vec![vec![BigRational::zero(); d]; d];
        for (i, row) in form.iter_mut().enumerate() {
            row[i] = BigRational::one();
        }
        LieData {
            names: (1..=d).map(|i| format!("a{i}")).collect(),
            bracket: vec![vec![vec![BigRational::zero(); d]; d]; d],
            form,
            dual_coxeter: BigRational::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Antisymmetry, Jacobi, symmetry, invariance and non-degeneracy of the form.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let bad = |m: &str| Err(Error::invalid(format!("invalid Lie data: {m}")));
        if self.bracket.len() != d || self.form.len() != d {
            return bad("dimension mismatch");
        }
        let br = |i: usize, j: usize, k: usize| &self.bracket[i][j][k];
        for i in 0..d {
            for j in 0..d {
                if self.form[i][j] != self.form[j][i] {
                    return bad("form is not symmetric");
                }
                for k in 0..d {
                    if br(i, j, k) != &-br(j, i, k) {
                        return bad("structure constants are not antisymmetric");
                    }
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    // ([a_i, a_j], a_k) = (a_i, [a_j, a_k])
                    let lhs: BigRational = (0..d).map(|l| br(i, j, l) * &self.form[l][k]).sum();
                    let rhs: BigRational = (0..d).map(|l| &self.form[i][l] * br(j, k, l)).sum();
                    if lhs != rhs {
                        return bad("form is not invariant");
                    }
                    for out in 0..d {
                        let mut s = BigRational::zero();
                        for l in 0..d {
                            s += br(j, k, l) * br(i, l, out);
                            s += br(k, i, l) * br(j, l, out);
                            s += br(i, j, l) * br(k, l, out);
                        }
                        if !s.is_zero() {
                            return bad("Jacobi identity fails");
                        }
                    }
                }
            }
        }
        if invert(&self.form).is_none() {
            return bad("form is degenerate");
        }
        Ok(())
    }
}

/// Inverse of a square rational matrix by Gauss-Jordan elimination.
pub fn invert(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let d = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..d).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for col in 0..d {
        let pivot = (col..d).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..d {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row.iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[d..].to_vec()).collect())
}

fn lin_comb(names: &[String], coeffs: &[BigRational]) -> Option<String> {
    let terms: Vec<String> = coeffs
        .iter()
        .zip(names)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, n)| if c.is_one() { n.clone() } else { format!("{}*{n}", lit(c)) })
        .collect();
    (!terms.is_empty()).then(|| terms.join(" + "))
}

/// Current algebra `V^k(𝔤)` in either case for any `N`: `[a_Λ b] = [a,b] + (k+h^∨)(a,b)λ`
/// for even `N`, and the parity-reversed version with `Σχ^i` for odd `N`.
pub fn currents(lie: &LieData, k: &BigRational, case: Case, n: u8) -> Result<Algebra> {
    lie.validate()?;
    let d = lie.dim();
    let level = k + &lie.dual_coxeter;
    let odd_n = n % 2 == 1;
    let mut t = format!("[header]\nname = currents\ncase = {case}\nN = {n}\n");
    t.push_str("description = supercurrent algebra\n[generators]\n");
    let weight = match (case, odd_n) {
        (Case::K, _) => Some(q(1, 1) - q(n as i64, 2)),
        (Case::W, false) => Some(q(1, 1)),
        (Case::W, true) => None,
    };
    for name in &lie.names {
        let w = weight.as_ref().map(|w| format!(" {}", lit(w).trim_matches(|c| c == '(' || c == ')'))).unwrap_or_default();
        writeln!(t, "{name} {}{w}", if odd_n { "odd" } else { "even" }).unwrap();
    }
    t.push_str("[brackets]\n");
    let central = if odd_n {
        (1..=n).map(|i| chi_letter(n, i)).collect::<Vec<_>>().join(" + ")
    } else {
        "lambda".to_string()
    };
    for i in 0..d {
        for j in i..d {
            let mut parts = Vec::new();
            if let Some(s) = lin_comb(&lie.names, &lie.bracket[i][j]) {
                parts.push(s);
            }
            let f = &level * &lie.form[i][j];
            if !f.is_zero() {
                parts.push(format!("{}*({central})", lit(&f)));
            }
            if !parts.is_empty() {
                writeln!(t, "[{}, {}] = {}", lie.names[i], lie.names[j], parts.join(" + ")).unwrap();
            }
        }
    }
    parse_algebra(&t)
}

/// affine supercurrent construction: `N_K = 1` supercurrents of `𝔤` at numeric level `k` together
/// with the conformal vector `tau`.
pub fn affine_supercurrents(lie: &LieData, k: &BigRational) -> Result<Algebra> {
    let level = k + &lie.dual_coxeter;
    if level.is_zero() {
        return Err(Error::invalid("critical level k = -h^∨"));
    }
    let alg = currents(lie, k, Case::K, 1)?;
    let d = lie.dim();
    let inv = invert(&lie.form).expect("validated");
    // dual basis b^i = Σ_l inv[i][l] a_l, so that (a_i, b^j) = δ_ij
    let dual: Vec<String> = (0..d)
        .map(|i| format!("({})", lin_comb(&lie.names, &inv[i]).unwrap_or_else(|| "0".into())))
        .collect();
    let mut terms = Vec::new();
    let inv_level = BigRational::one() / &level;
    for i in 0..d {
        terms.push(format!("{}*:(S {}) {}:", lit(&inv_level), lie.names[i], dual[i]));
    }
    let cubic = &inv_level * &inv_level / q(3, 1);
    for i in 0..d {
        for j in 0..d {
            for r in 0..d {
                let f: BigRational =
                    (0..d).map(|l| &lie.bracket[i][j][l] * &lie.form[l][r]).sum();
                if !f.is_zero() {
                    terms.push(format!(
                        "{}*:{} {} {}:",
                        lit(&(&cubic * &f)),
                        dual[i],
                        dual[j],
                        dual[r]
                    ));
                }
            }
        }
    }
    let mut text = crate::parse::render_algebra(&alg);
    text = text.replacen("name = currents", &format!("name = KT-{}", lie_name(lie)), 1);
    write!(text, "\n[definitions]\ntau = {}\n[conformal]\ntau\n", terms.join(" + ")).unwrap();
    parse_algebra(&text)
}

fn lie_name(lie: &LieData) -> String {
    if lie.names == ["e", "f", "h"] {
        "sl2".into()
    } else {
        format!("g{}", lie.dim())
    }
}

/// The central charge `k sdim 𝔤/(k+h^∨) + sdim 𝔤/2` of the affine supercurrent conformal vector.
pub fn affine_central_charge(lie: &LieData, k: &BigRational) -> BigRational {
    let d = BigRational::from_integer(BigInt::from(lie.dim()));
    k * &d / (k + &lie.dual_coxeter) + d / q(2, 1)
}

// --------------------------------------------------------------------------------------
// chiral de Rham local brackets

/// Finite-dimensional data for the local chiral de Rham brackets: vector fields `X_a`
/// (odd), functions `f_p` (even), 1-forms `α_u` (even) and their parity-reversed copies.
#[derive(Clone, Debug)]
pub struct CdrData {
    pub vector_fields: Vec<String>,
    pub functions: Vec<String>,
    pub forms: Vec<String>,
    /// `[X_a, X_b]_Lie = Σ lie[a][b][c] X_c`.
    pub lie: Vec<Vec<Vec<BigRational>>>,
    /// `X_a(f_p) = Σ action[a][p][q] f_q`.
    pub action: Vec<Vec<Vec<BigRational>>>,
    /// `L_{X_a} α_u = Σ lie_derivative[a][u][v] α_v`.
    pub lie_derivative: Vec<Vec<Vec<BigRational>>>,
    /// `<α_u, X_a> = Σ pairing[u][a][q] f_q`.
    pub pairing: Vec<Vec<Vec<BigRational>>>,
}

impl CdrData {
    /// Constant vector fields `∂_1..∂_d` on `ℝ^d` with coordinate functions `x1..xd`, the
    /// constant function `u`, and the constant forms `dx1..dxd`.
    pub fn abelian(d: usize) -> CdrData {
        let z = BigRational::zero;
        let nf = d + 1; // u, x1..xd
        let mut action = vec![vec![vec![z(); nf]; nf]; d];
        let mut pairing = vec![vec![vec![z(); nf]; d]; d];
        for a in 0..d {
            action[a][a + 1][0] = BigRational::one();
            pairing[a][a][0] = BigRational::one();
        }
        let mut functions = vec!["u".to_string()];
        functions.extend((1..=d).map(|i| format!("x{i}")));
        CdrData {
            vector_fields: (1..=d).map(|i| format!("X{i}")).collect(),
            functions,
            forms: (1..=d).map(|i| format!("dx{i}")).collect(),
            lie: vec![vec![vec![z(); d]; d]; d],
            action,
            lie_derivative: vec![vec![vec![z(); d]; d]; d],
            pairing,
        }
    }
}

/// Local brackets `[X_Λ f] = X(f)`, `[X_Λ Y] = [X,Y]`, `[X_Λ α] = L_X α + λ<α,X>`,
/// `[X_Λ ᾱ] = (L_X α)‾ + χ<α,X>` as an `N_K = 1` presentation. Barred forms are named
/// with a `bar_` prefix.
pub fn chiral_de_rham(data: &CdrData) -> Result<Algebra> {
    let nv = data.vector_fields.len();
    for a in 0..nv {
        for b in 0..nv {
            for c in 0..nv {
                if data.lie[a][b][c] != -&data.lie[b][a][c] {
                    return Err(Error::invalid("vector field brackets are not antisymmetric"));
                }
            }
        }
    }
    let bars: Vec<String> = data.forms.iter().map(|f| format!("bar_{f}")).collect();
    let mut t = k1_header("cdr", "", false, "chiral de Rham local brackets");
    t.push_str("[generators]\n");
    for f in &data.functions {
        writeln!(t, "{f} even 0").unwrap();
    }
    for x in &data.vector_fields {
        writeln!(t, "{x} odd 1/2").unwrap();
    }
    for f in &data.forms {
        writeln!(t, "{f} even 1").unwrap();
    }
    for f in &bars {
        writeln!(t, "{f} odd 1/2").unwrap();
    }
    t.push_str("[brackets]\n");
    for a in 0..nv {
        let x = &data.vector_fields[a];
        for b in a..nv {
            if let Some(s) = lin_comb(&data.vector_fields, &data.lie[a][b]) {
                writeln!(t, "[{x}, {}] = {s}", data.vector_fields[b]).unwrap();
            }
        }
        for (p, f) in data.functions.iter().enumerate() {
            if let Some(s) = lin_comb(&data.functions, &data.action[a][p]) {
                writeln!(t, "[{x}, {f}] = {s}").unwrap();
            }
        }
        for (u, form) in data.forms.iter().enumerate() {
            let lie = lin_comb(&data.forms, &data.lie_derivative[a][u]);
            let lie_bar = lin_comb(&bars, &data.lie_derivative[a][u]);
            let pair = lin_comb(&data.functions, &data.pairing[u][a]);
            let mut plain = Vec::new();
            let mut barred = Vec::new();
            if let Some(s) = lie {
                plain.push(s);
            }
            if let Some(s) = lie_bar {
                barred.push(s);
            }
            if let Some(p) = &pair {
                plain.push(format!("lambda*({p})"));
                barred.push(format!("chi*({p})"));
            }
            if !plain.is_empty() {
                writeln!(t, "[{x}, {form}] = {}", plain.join(" + ")).unwrap();
            }
            if !barred.is_empty() {
                writeln!(t, "[{x}, {}] = {}", bars[u], barred.join(" + ")).unwrap();
            }
        }
    }
    let mut alg = parse_algebra(&t)?;
    alg.name = format!("cdr-abelian{nv}");
    Ok(alg)
}

// --------------------------------------------------------------------------------------
// general free fields

/// Free-field algebra `F(A, Q)`: `[a_Λ b] = Q(Λ)(a,b)` on a basis of `A` with the given
/// parities, bilinear form and parameter polynomial `q_text` (e.g. `"chi"`).
pub fn free_fields(
    case: Case,
    n: u8,
    basis: &[(&str, u8)],
    form: &[Vec<BigRational>],
    q_text: &str,
) -> Result<Algebra> {
    let d = basis.len();
    if form.len() != d || form.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("form must be a square matrix matching the basis"));
    }
    if invert(form).is_none() {
        return Err(Error::invalid("form is degenerate"));
    }
    let mut t = format!("[header]\nname = free-fields\ncase = {case}\nN = {n}\n");
    t.push_str("description = free field algebra F(A,Q)\n[generators]\n");
    for (name, p) in basis {
        writeln!(t, "{name} {}", if p % 2 == 1 { "odd" } else { "even" }).unwrap();
    }
    t.push_str("[brackets]\n");
    for i in 0..d {
        for j in i..d {
            if !form[i][j].is_zero() {
                writeln!(t, "[{}, {}] = {}*({q_text})", basis[i].0, basis[j].0, lit(&form[i][j]))
                    .unwrap();
            }
        }
    }
    let alg = parse_algebra(&t)?;
    // transposed entries must agree with skew-symmetry
    let eng = Engine::new(&alg);
    for i in 0..d {
        for j in 0..i {
            let a = parse_expr(&alg, basis[i].0)?;
            let b = parse_expr(&alg, basis[j].0)?;
            let br = eng.bracket(&a, &b);
            let qpoly = crate::parse::parse_poly(&alg, q_text)?;
            let expected = qpoly.scaled(&crate::scalar::Scalar::from_rational(form[i][j].clone()));
            if br != expected {
                return Err(Error::invalid(format!(
                    "form entry ({}, {}) violates skew-symmetry",
                    basis[i].0, basis[j].0
                )));
            }
        }
    }
    Ok(alg)
}
