//! Parameter superalgebras: polynomials in `Λ = (λ, χ¹..χᴺ)` (and the renamed copies
//! `Γ = (γ, η)` and `Ψ = (ψ, υ)`) with generic coefficients, the mixed algebra in `Λ` and `Γ`
//! together, `Γ`-integrals and the substitution `Ψ → Λ + Γ`.
//!
//! In the W case the odd generators anticommute and square to zero. In the K case they
//! form a Clifford algebra over `ℂ[λ]`: `χ^iχ^j + χ^jχ^i = -2δ_ij λ`, so `(χ^i)² = -λ`.
//! A monomial `λ^j χ^J` is stored as the pair `(j, mask of J)` with `J` ascending.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::superindex::{bit, full_mask, inversions, left_derivative, mask_elems, Sign};

/// The two flavours of supersymmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    /// `N_W = N`: odd translations anticommute and square to zero.
    W,
    /// `N_K = N`: `[S^i, S^j] = 2δ_ij T`.
    K,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Case::W => write!(f, "W"),
            Case::K => write!(f, "K"),
        }
    }
}

/// Which renamed copy of the parameter algebra a polynomial lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `(λ, χ)`
    Lambda,
    /// `(γ, η)`
    Gamma,
    /// `(ψ, υ)`
    Psi,
}

impl Family {
    pub fn even_name(self) -> &'static str {
        match self {
            Family::Lambda => "lambda",
            Family::Gamma => "gamma",
            Family::Psi => "psi",
        }
    }

    pub fn odd_name(self) -> &'static str {
        match self {
            Family::Lambda => "chi",
            Family::Gamma => "eta",
            Family::Psi => "upsilon",
        }
    }
}

/// Coefficient types usable in parameter polynomials.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn scaled(&self, s: &Scalar) -> Self;
    fn negated(&self) -> Self {
        self.scaled(&Scalar::from_int(-1))
    }
}

impl Coeff for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other.clone();
    }
    fn scaled(&self, s: &Scalar) -> Self {
        self * s
    }
}

/// A parameter monomial `λ^pow χ^mask` (or its Γ/Ψ copy).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LMono {
    pub pow: u32,
    pub mask: u16,
}

impl LMono {
    pub const ONE: LMono = LMono { pow: 0, mask: 0 };

    pub fn new(pow: u32, mask: u16) -> LMono {
        LMono { pow, mask }
    }

    pub fn odd_degree(self) -> usize {
        self.mask.count_ones() as usize
    }

    /// Parity of the monomial.
    pub fn parity(self) -> usize {
        self.odd_degree() % 2
    }
}

/// Product of two Clifford/Grassmann monomials: `(sign, λ-power shift, mask)`, or `None`
/// if the product vanishes (W case overlap).
pub fn clifford_mul(case: Case, a: u16, b: u16) -> Option<(Sign, u32, u16)> {
    let overlap = a & b;
    if overlap != 0 && case == Case::W {
        return None;
    }
    let mut sign = Sign::parity(inversions(a, b) as usize);
    let k = overlap.count_ones();
    // each repeated letter contributes (χ^i)² = -λ
    sign = sign * Sign::parity(k as usize);
    Some((sign, k, a ^ b))
}

fn sign_scalar(s: Sign) -> Scalar {
    Scalar::from_int(s.value() as i64)
}

/// A polynomial in one parameter family with coefficients of type `C`.
#[derive(Clone, PartialEq)]
pub struct LambdaPoly<C: Coeff> {
    pub case: Case,
    pub n: u8,
    pub family: Family,
    terms: BTreeMap<LMono, C>,
}

impl<C: Coeff> LambdaPoly<C> {
    pub fn zero(case: Case, n: u8, family: Family) -> Self {
        LambdaPoly { case, n, family, terms: BTreeMap::new() }
    }

    /// The constant polynomial `c`.
    pub fn constant(case: Case, n: u8, family: Family, c: C) -> Self {
        let mut p = LambdaPoly::zero(case, n, family);
        p.add_term(LMono::ONE, c);
        p
    }

    pub fn monomial(case: Case, n: u8, family: Family, m: LMono, c: C) -> Self {
        let mut p = LambdaPoly::zero(case, n, family);
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LMono, &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (LMono, C)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: LMono) -> Option<&C> {
        self.terms.get(&m)
    }

    /// Same shape, different family name.
    pub fn renamed(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn add_term(&mut self, m: LMono, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(*m, c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(*m, c.scaled(s));
        }
    }

    pub fn scaled(&self, s: &Scalar) -> Self {
        let mut out = LambdaPoly::zero(self.case, self.n, self.family);
        out.add_scaled(self, s);
        out
    }

    pub fn negated(&self) -> Self {
        self.scaled(&Scalar::from_int(-1))
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs<D: Coeff>(&self, mut f: impl FnMut(&C) -> D) -> LambdaPoly<D> {
        let mut out = LambdaPoly::zero(self.case, self.n, self.family);
        for (m, c) in &self.terms {
            out.add_term(*m, f(c));
        }
        out
    }

    /// Applies `f(monomial, coefficient)` and sums the results.
    pub fn flat_map(&self, mut f: impl FnMut(LMono, &C) -> LambdaPoly<C>) -> LambdaPoly<C> {
        let mut out = LambdaPoly::zero(self.case, self.n, self.family);
        for (m, c) in &self.terms {
            out.add_assign(&f(*m, c));
        }
        out
    }

    /// Left multiplication by the monomial `s·λ^pow χ^mask`.
    pub fn left_mul_mono(&self, m: LMono, s: &Scalar) -> Self {
        let mut out = LambdaPoly::zero(self.case, self.n, self.family);
        for (t, c) in &self.terms {
            if let Some((sign, shift, mask)) = clifford_mul(self.case, m.mask, t.mask) {
                let coeff = s * &sign_scalar(sign);
                out.add_term(LMono::new(m.pow + t.pow + shift, mask), c.scaled(&coeff));
            }
        }
        out
    }

    /// Left multiplication by the odd generator `χ^i`.
    pub fn left_mul_odd(&self, i: u8) -> Self {
        self.left_mul_mono(LMono::new(0, bit(i)), &Scalar::one())
    }

    /// Left multiplication by `λ`.
    pub fn mul_even(&self, k: u32) -> Self {
        self.left_mul_mono(LMono::new(k, 0), &Scalar::one())
    }

    /// Left multiplication by a scalar polynomial.
    pub fn left_mul_scalar_poly(&self, p: &LambdaPoly<Scalar>) -> Self {
        let mut out = LambdaPoly::zero(self.case, self.n, self.family);
        for (m, s) in &p.terms {
            out.add_assign(&self.left_mul_mono(*m, s));
        }
        out
    }

    /// The operator `S^i` acting from the left on `p`, where `s_coeff` is its action on
    /// coefficients. `S^i` passes each odd parameter with a sign; in the K case passing
    /// `χ^i` also produces `[S^i, χ^i] = 2λ`.
    pub fn apply_odd_operator(&self, i: u8, mut s_coeff: impl FnMut(&C) -> C) -> Self {
        let mut out = LambdaPoly::zero(self.case, self.n, self.family);
        for (m, c) in &self.terms {
            let passed = Sign::parity(m.odd_degree());
            out.add_term(*m, s_coeff(c).scaled(&sign_scalar(passed)));
            if self.case == Case::K {
                if let Some((sign, rest)) = left_derivative(m.mask, i) {
                    let k = Scalar::from_int(2 * sign.value() as i64);
                    out.add_term(LMono::new(m.pow + 1, rest), c.scaled(&k));
                }
            }
        }
        out
    }

    /// Applies an even operator (such as `T`) to every coefficient.
    pub fn apply_even_operator(&self, t_coeff: impl FnMut(&C) -> C) -> Self {
        self.map_coeffs(t_coeff)
    }

    /// Total parity of the odd parameters of each monomial must agree; returns it if so.
    pub fn odd_parity(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|m| m.parity());
        let first = it.next()?;
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Highest power of the even generator.
    pub fn max_pow(&self) -> u32 {
        self.terms.keys().map(|m| m.pow).max().unwrap_or(0)
    }
}

impl LambdaPoly<Scalar> {
    /// The generator `λ`.
    pub fn even_gen(case: Case, n: u8, family: Family) -> Self {
        LambdaPoly::monomial(case, n, family, LMono::new(1, 0), Scalar::one())
    }

    /// The generator `χ^i`.
    pub fn odd_gen(case: Case, n: u8, family: Family, i: u8) -> Self {
        LambdaPoly::monomial(case, n, family, LMono::new(0, bit(i)), Scalar::one())
    }

    pub fn scalar(case: Case, n: u8, family: Family, s: Scalar) -> Self {
        LambdaPoly::constant(case, n, family, s)
    }
}

/// Product of two scalar parameter polynomials.
pub fn lp_mul(p: &LambdaPoly<Scalar>, q: &LambdaPoly<Scalar>) -> Result<LambdaPoly<Scalar>> {
    if p.case != q.case || p.n != q.n || p.family != q.family {
        return Err(Error::invalid(format!(
            "parameter polynomial mismatch: ({}, N={}, {:?}) vs ({}, N={}, {:?})",
            p.case, p.n, p.family, q.case, q.n, q.family
        )));
    }
    let mut out = LambdaPoly::zero(p.case, p.n, p.family);
    for (m, s) in &p.terms {
        out.add_assign(&q.left_mul_mono(*m, s));
    }
    Ok(out)
}

impl<C: Coeff> fmt::Debug for LambdaPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{:?}*{}", c, mono_name(self.family, self.n, *m)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Display for LambdaPoly<Scalar> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let (neg, coef) = c.fmt_coefficient();
            let mono = mono_name(self.family, self.n, *m);
            let body = match (coef.is_empty(), mono.is_empty()) {
                (true, true) => "1".to_string(),
                (true, false) => mono,
                (false, true) => coef,
                (false, false) => format!("{coef}*{mono}"),
            };
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        write!(f, "{out}")
    }
}

/// Name of a single odd parameter (`chi` when `N = 1`, `chi2` otherwise).
pub fn odd_letter(family: Family, n: u8, i: u8) -> String {
    if n == 1 {
        family.odd_name().to_string()
    } else {
        format!("{}{}", family.odd_name(), i)
    }
}

/// Rendering of `λ^pow χ^mask` as a `*`-separated product; empty for the unit.
pub fn mono_name(family: Family, n: u8, m: LMono) -> String {
    let mut parts = Vec::new();
    match m.pow {
        0 => {}
        1 => parts.push(family.even_name().to_string()),
        k => parts.push(format!("{}^{}", family.even_name(), k)),
    }
    for i in mask_elems(m.mask) {
        parts.push(odd_letter(family, n, i));
    }
    parts.join("*")
}

/// How the odd generators of `Λ` and `Γ` relate in the mixed algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixedConvention {
    /// Graded tensor product: every `η^i` anticommutes with every `χ^j`.
    Supercommuting,
    /// The literal relation `η^iχ^j = -χ^jη^i + 2λδ_ij` (K case only).
    LiteralAnticommutator,
}

/// A mixed monomial `λ^a γ^b χ^J η^K` with all `χ` left of all `η`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MixedMono {
    pub a: u32,
    pub b: u32,
    pub chi: u16,
    pub eta: u16,
}

impl MixedMono {
    pub const ONE: MixedMono = MixedMono { a: 0, b: 0, chi: 0, eta: 0 };

    pub fn parity(self) -> usize {
        ((self.chi.count_ones() + self.eta.count_ones()) % 2) as usize
    }
}

/// A polynomial in the mixed algebra of `Λ` and `Γ`.
#[derive(Clone, PartialEq)]
pub struct MixedPoly<C: Coeff> {
    pub case: Case,
    pub n: u8,
    pub convention: MixedConvention,
    terms: BTreeMap<MixedMono, C>,
}

/// A letter of the mixed algebra, used by the literal rewriting normaliser.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Letter {
    Lambda,
    Gamma,
    Chi(u8),
    Eta(u8),
}

impl<C: Coeff> MixedPoly<C> {
    pub fn zero(case: Case, n: u8, convention: MixedConvention) -> Self {
        MixedPoly { case, n, convention, terms: BTreeMap::new() }
    }

    pub fn monomial(
        case: Case,
        n: u8,
        convention: MixedConvention,
        m: MixedMono,
        c: C,
    ) -> Self {
        let mut p = MixedPoly::zero(case, n, convention);
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MixedMono, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: MixedMono) -> Option<&C> {
        self.terms.get(&m)
    }

    pub fn add_term(&mut self, m: MixedMono, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(*m, c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(*m, c.scaled(s));
        }
    }

    pub fn map_coeffs<D: Coeff>(&self, mut f: impl FnMut(&C) -> D) -> MixedPoly<D> {
        let mut out = MixedPoly::zero(self.case, self.n, self.convention);
        for (m, c) in &self.terms {
            out.add_term(*m, f(c));
        }
        out
    }

    /// Left multiplication by a scalar mixed monomial `s·x`.
    pub fn left_mul_mono(&self, x: MixedMono, s: &Scalar) -> Self {
        let mut out = MixedPoly::zero(self.case, self.n, self.convention);
        for (t, c) in &self.terms {
            for (m, k) in mixed_mono_mul(self.case, self.n, self.convention, x, *t) {
                out.add_term(m, c.scaled(&(s * &k)));
            }
        }
        out
    }
}

/// Product of two mixed monomials, normalised, as a list of `(monomial, scalar)`.
pub fn mixed_mono_mul(
    case: Case,
    n: u8,
    convention: MixedConvention,
    x: MixedMono,
    y: MixedMono,
) -> Vec<(MixedMono, Scalar)> {
    match convention {
        MixedConvention::Supercommuting => {
            // χ^{J1} η^{K1} χ^{J2} η^{K2} = (-1)^{|K1||J2|} χ^{J1}χ^{J2} η^{K1}η^{K2}
            let cross = Sign::parity((x.eta.count_ones() * y.chi.count_ones()) as usize);
            let Some((s1, l, chi)) = clifford_mul(case, x.chi, y.chi) else {
                return Vec::new();
            };
            let Some((s2, g, eta)) = clifford_mul(case, x.eta, y.eta) else {
                return Vec::new();
            };
            let m = MixedMono { a: x.a + y.a + l, b: x.b + y.b + g, chi, eta };
            vec![(m, sign_scalar(cross * s1 * s2))]
        }
        MixedConvention::LiteralAnticommutator => {
            let mut word = mixed_letters(x);
            word.extend(mixed_letters(y));
            normalize_letters(case, n, convention, &word).into_iter().collect()
        }
    }
}

/// The letters of a normal-form mixed monomial, left to right.
pub fn mixed_letters(m: MixedMono) -> Vec<Letter> {
    let mut w = Vec::new();
    w.extend(std::iter::repeat_n(Letter::Lambda, m.a as usize));
    w.extend(std::iter::repeat_n(Letter::Gamma, m.b as usize));
    w.extend(mask_elems(m.chi).into_iter().map(Letter::Chi));
    w.extend(mask_elems(m.eta).into_iter().map(Letter::Eta));
    w
}

/// Normalises an arbitrary word of letters by exhaustive application of the defining
/// relations of the chosen convention.
pub fn normalize_letters(
    case: Case,
    n: u8,
    convention: MixedConvention,
    word: &[Letter],
) -> BTreeMap<MixedMono, Scalar> {
    let _ = n;
    let mut out: BTreeMap<MixedMono, Scalar> = BTreeMap::new();
    let mut stack: Vec<(Vec<Letter>, Scalar)> = vec![(word.to_vec(), Scalar::one())];
    while let Some((w, c)) = stack.pop() {
        // find the first adjacent pair out of order or repeated
        let mut rewritten = false;
        for k in 0..w.len().saturating_sub(1) {
            let (x, y) = (w[k], w[k + 1]);
            let is_even = |l: Letter| matches!(l, Letter::Lambda | Letter::Gamma);
            if (is_even(x) || is_even(y)) && x > y {
                let mut v = w.clone();
                v.swap(k, k + 1);
                stack.push((v, c.clone()));
                rewritten = true;
                break;
            }
            let (xo, yo) = (odd_key(x), odd_key(y));
            if let (Some(xk), Some(yk)) = (xo, yo) {
                if xk == yk {
                    // square of an odd generator
                    if case == Case::W {
                        rewritten = true;
                        break;
                    }
                    let even = if matches!(x, Letter::Chi(_)) { Letter::Lambda } else { Letter::Gamma };
                    let mut v = w[..k].to_vec();
                    v.push(even);
                    v.extend_from_slice(&w[k + 2..]);
                    stack.push((v, -c.clone()));
                    rewritten = true;
                    break;
                }
                if xk > yk {
                    let mut v = w.clone();
                    v.swap(k, k + 1);
                    stack.push((v, -c.clone()));
                    // η^i χ^i under the literal convention picks up 2λ
                    if let (Letter::Eta(i), Letter::Chi(j)) = (x, y) {
                        if i == j
                            && case == Case::K
                            && convention == MixedConvention::LiteralAnticommutator
                        {
                            let mut u = w[..k].to_vec();
                            u.push(Letter::Lambda);
                            u.extend_from_slice(&w[k + 2..]);
                            stack.push((u, c.scale_int(2)));
                        }
                    }
                    rewritten = true;
                    break;
                }
            }
        }
        if !rewritten {
            let mut m = MixedMono::ONE;
            for l in &w {
                match *l {
                    Letter::Lambda => m.a += 1,
                    Letter::Gamma => m.b += 1,
                    Letter::Chi(i) => m.chi |= bit(i),
                    Letter::Eta(i) => m.eta |= bit(i),
                }
            }
            let e = out.entry(m).or_insert_with(Scalar::zero);
            *e += c;
            if e.is_zero() {
                out.remove(&m);
            }
        }
    }
    out
}

fn odd_key(l: Letter) -> Option<(u8, u8)> {
    match l {
        Letter::Chi(i) => Some((0, i)),
        Letter::Eta(i) => Some((1, i)),
        _ => None,
    }
}

/// Normalises a mixed polynomial given as a sum of arbitrary letter words.
pub fn mixed_normalize(
    case: Case,
    n: u8,
    convention: MixedConvention,
    words: &[(Vec<Letter>, Scalar)],
) -> MixedPoly<Scalar> {
    let mut out = MixedPoly::zero(case, n, convention);
    for (w, c) in words {
        for (m, k) in normalize_letters(case, n, convention, w) {
            out.add_term(m, &k * c);
        }
    }
    out
}

/// The sign `(-1)^{N(N-1)/2}` of extracting the coefficient of `η¹…ηᴺ` with the
/// derivative `∂_{ηᴺ}` applied first.
pub fn top_sign(n: u8) -> Sign {
    let n = n as usize;
    Sign::parity(n * n.saturating_sub(1) / 2)
}

/// `∫₀^Λ p dΓ` for a mixed polynomial: apply `∂_η^N` (`∂_{ηᴺ}` first), integrate in `γ`
/// and evaluate between `Γ = 0` and `Γ = Λ`.
pub fn integrate_gamma<C: Coeff>(p: &MixedPoly<C>) -> LambdaPoly<C> {
    let full = full_mask(p.n);
    let mut out = LambdaPoly::zero(p.case, p.n, Family::Lambda);
    for (m, c) in p.terms() {
        if m.eta != full {
            continue;
        }
        // passing the N derivatives across χ^J, then the top coefficient sign
        let passed = Sign::parity(p.n as usize * m.chi.count_ones() as usize);
        let sign = passed * top_sign(p.n);
        let k = BigRational::new(BigInt::from(sign.value() as i64), BigInt::from(m.b + 1));
        out.add_term(LMono::new(m.a + m.b + 1, m.chi), c.scaled(&Scalar::from_rational(k)));
    }
    out
}

/// Substitutes `ψ → λ + γ`, `υ^i → χ^i + η^i` in a polynomial over `Ψ`.
pub fn substitute_sum<C: Coeff>(p: &LambdaPoly<C>, convention: MixedConvention) -> MixedPoly<C> {
    let mut out = MixedPoly::zero(p.case, p.n, convention);
    let mut cache: BTreeMap<LMono, MixedPoly<Scalar>> = BTreeMap::new();
    for (m, c) in p.terms() {
        let image = cache
            .entry(*m)
            .or_insert_with(|| sum_image(p.case, p.n, convention, *m))
            .clone();
        for (x, s) in image.terms() {
            out.add_term(*x, c.scaled(s));
        }
    }
    out
}

/// Image of `ψ^pow υ^mask` under `Ψ → Λ + Γ`.
pub fn sum_image(case: Case, n: u8, convention: MixedConvention, m: LMono) -> MixedPoly<Scalar> {
    let mut acc = MixedPoly::monomial(case, n, convention, MixedMono::ONE, Scalar::one());
    // build right to left: ... (χ^i + η^i) acc
    for i in mask_elems(m.mask).into_iter().rev() {
        let mut next = acc.left_mul_mono(MixedMono { chi: bit(i), ..MixedMono::ONE }, &Scalar::one());
        next.add_assign(&acc.left_mul_mono(MixedMono { eta: bit(i), ..MixedMono::ONE }, &Scalar::one()));
        acc = next;
    }
    for _ in 0..m.pow {
        let mut next = acc.left_mul_mono(MixedMono { a: 1, ..MixedMono::ONE }, &Scalar::one());
        next.add_assign(&acc.left_mul_mono(MixedMono { b: 1, ..MixedMono::ONE }, &Scalar::one()));
        acc = next;
    }
    acc
}

impl fmt::Display for MixedPoly<Scalar> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{}*{}", c.fmt_factor(), mixed_name(self.n, *m)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<C: Coeff> fmt::Debug for MixedPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{:?}*{}", c, mixed_name(self.n, *m)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Rendering of a mixed monomial.
pub fn mixed_name(n: u8, m: MixedMono) -> String {
    let l = mono_name(Family::Lambda, n, LMono::new(m.a, m.chi));
    let g = mono_name(Family::Gamma, n, LMono::new(m.b, m.eta));
    match (l.is_empty(), g.is_empty()) {
        (true, true) => "1".into(),
        (false, true) => l,
        (true, false) => g,
        (false, false) => format!("{l}*{g}"),
    }
}

/// Convenience: scalar `k` as a rational.
pub fn rat(num: i64, den: i64) -> Scalar {
    Scalar::from_ratio(num, den)
}

impl<C: Coeff> LambdaPoly<C> {
    /// True if every coefficient is zero after applying `pred` to the nonzero ones.
    pub fn all_coeffs(&self, pred: impl Fn(&C) -> bool) -> bool {
        self.terms.values().all(pred)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_square_k() {
        assert_eq!(clifford_mul(Case::K, bit(1), bit(1)), Some((Sign::MINUS, 1, 0)));
        assert_eq!(clifford_mul(Case::W, bit(1), bit(1)), None);
        assert_eq!(clifford_mul(Case::K, bit(2), bit(1)), Some((Sign::MINUS, 0, bit(1) | bit(2))));
    }

    #[test]
    fn top_sign_values() {
        assert_eq!(top_sign(0), Sign::PLUS);
        assert_eq!(top_sign(1), Sign::PLUS);
        assert_eq!(top_sign(2), Sign::MINUS);
        assert_eq!(top_sign(3), Sign::MINUS);
        assert_eq!(top_sign(4), Sign::PLUS);
    }
}
