//! Symbolic elements of a SUSY vertex algebra and algebra presentations.
//!
//! An expression is a finite sum of scalar multiples of right-nested normally ordered
//! words `:a₁:a₂:…aₙ:…::` of atoms `T^t S^I g`. The empty word is the vacuum. The
//! canonical form (sorted words, odd atoms at most once) is maintained by the
//! normally ordered product in [`crate::engine`], which needs the Λ-bracket.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::params::{mixed_name, Case, Coeff, Family, LMono, LambdaPoly, MixedPoly};
use crate::scalar::Scalar;
use crate::superindex::{bit, inversions, mask_elems, Sign};

/// A derivative monomial `T^t S^I` applied to a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub gen: u16,
    pub t: u16,
    pub s: u16,
}

impl Atom {
    pub fn gen(gen: u16) -> Atom {
        Atom { gen, t: 0, s: 0 }
    }

    /// `S^i` applied on the left: `S^i T^t S^I = ± T^{t'} S^{I△i}`.
    ///
    /// In the K case `(S^i)² = T`; in the W case it vanishes.
    pub fn apply_s(self, case: Case, i: u8) -> Option<(Sign, Atom)> {
        let b = bit(i);
        let sign = Sign::parity(inversions(b, self.s) as usize);
        if self.s & b != 0 {
            match case {
                Case::W => None,
                Case::K => Some((sign, Atom { gen: self.gen, t: self.t + 1, s: self.s & !b })),
            }
        } else {
            Some((sign, Atom { gen: self.gen, t: self.t, s: self.s | b }))
        }
    }

    pub fn apply_t(self) -> Atom {
        Atom { t: self.t + 1, ..self }
    }

    pub fn s_len(self) -> usize {
        self.s.count_ones() as usize
    }
}

/// A right-nested normally ordered word; empty means the vacuum.
pub type Word = Vec<Atom>;

/// A finite linear combination of words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldExpr {
    terms: BTreeMap<Word, Scalar>,
}

impl FieldExpr {
    pub fn zero() -> FieldExpr {
        FieldExpr { terms: BTreeMap::new() }
    }

    pub fn vacuum() -> FieldExpr {
        FieldExpr::word(Vec::new(), Scalar::one())
    }

    pub fn scalar(s: Scalar) -> FieldExpr {
        FieldExpr::word(Vec::new(), s)
    }

    pub fn atom(a: Atom) -> FieldExpr {
        FieldExpr::word(vec![a], Scalar::one())
    }

    pub fn word(w: Word, s: Scalar) -> FieldExpr {
        let mut e = FieldExpr::zero();
        e.add_term(w, s);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, w: Word, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(s);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += s;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&mut self, other: &FieldExpr) {
        for (w, s) in &other.terms {
            self.add_term(w.clone(), s.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &FieldExpr, k: &Scalar) {
        if k.is_zero() {
            return;
        }
        for (w, s) in &other.terms {
            self.add_term(w.clone(), s * k);
        }
    }

    pub fn scale(&self, k: &Scalar) -> FieldExpr {
        let mut out = FieldExpr::zero();
        out.add_scaled(self, k);
        out
    }

    /// Coefficient of the vacuum.
    pub fn vacuum_coeff(&self) -> Scalar {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Scalar::zero)
    }

    /// True if the expression is a scalar multiple of the vacuum.
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|w| w.is_empty())
    }

    /// Maximum word length.
    pub fn max_len(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    /// Substitutes a parameter inside every coefficient.
    pub fn substitute_param(&self, name: &str, value: &Scalar) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (w, s) in &self.terms {
            out.add_term(w.clone(), s.substitute(name, value));
        }
        out
    }
}

impl Coeff for FieldExpr {
    fn zero() -> Self {
        FieldExpr::zero()
    }
    fn is_zero(&self) -> bool {
        FieldExpr::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        self.add(other)
    }
    fn scaled(&self, s: &Scalar) -> Self {
        self.scale(s)
    }
}

impl fmt::Debug for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, s)| {
                let atoms: Vec<String> =
                    w.iter().map(|a| format!("g{}T{}S{:b}", a.gen, a.t, a.s)).collect();
                format!("{}*[{}]", s.fmt_factor(), atoms.join(" "))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A declared generator.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub name: String,
    /// 0 even, 1 odd.
    pub parity: u8,
    pub weight: Option<BigRational>,
    pub central: bool,
    /// Value `C ↦ value·vac` used by the quotient map of a central generator.
    pub quotient: Option<Scalar>,
}

/// A Λ-bracket valued in field expressions.
pub type Bracket = LambdaPoly<FieldExpr>;

/// An algebra presentation: generators and the Λ-brackets of ordered generator pairs.
#[derive(Clone, Debug)]
pub struct Algebra {
    pub name: String,
    pub case: Case,
    pub n: u8,
    pub params: Vec<String>,
    /// Whether the scalar field is extended by the imaginary unit.
    pub imaginary: bool,
    pub gens: Vec<Generator>,
    /// Entries for ordered pairs `(i, j)` with `i ≤ j`.
    pub brackets: BTreeMap<(u16, u16), Bracket>,
    /// Named composite expressions (conformal vectors and similar), as source text.
    pub definitions: Vec<(String, String)>,
    /// Name of the super Virasoro vector, or of `(ν, τ¹..τᴺ)` in the W case.
    pub conformal: Vec<String>,
    pub description: String,
}

impl Algebra {
    pub fn new(name: &str, case: Case, n: u8) -> Algebra {
        Algebra {
            name: name.to_string(),
            case,
            n,
            params: Vec::new(),
            imaginary: false,
            gens: Vec::new(),
            brackets: BTreeMap::new(),
            definitions: Vec::new(),
            conformal: Vec::new(),
            description: String::new(),
        }
    }

    pub fn add_generator(
        &mut self,
        name: &str,
        parity: u8,
        weight: Option<BigRational>,
        central: bool,
    ) -> Result<u16> {
        if self.gen_id(name).is_some() {
            return Err(Error::invalid(format!("generator `{name}` declared twice")));
        }
        if is_reserved(name, self.n) {
            return Err(Error::invalid(format!("`{name}` is a reserved word")));
        }
        self.gens.push(Generator {
            name: name.to_string(),
            parity: parity % 2,
            weight,
            central,
            quotient: None,
        });
        Ok((self.gens.len() - 1) as u16)
    }

    pub fn add_param(&mut self, name: &str) {
        if !self.params.iter().any(|p| p == name) {
            self.params.push(name.to_string());
        }
    }

    pub fn gen_id(&self, name: &str) -> Option<u16> {
        self.gens.iter().position(|g| g.name == name).map(|i| i as u16)
    }

    pub fn gen(&self, id: u16) -> &Generator {
        &self.gens[id as usize]
    }

    pub fn definition(&self, name: &str) -> Option<&str> {
        self.definitions.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    pub fn zero_bracket(&self) -> Bracket {
        LambdaPoly::zero(self.case, self.n, Family::Lambda)
    }

    /// Parity of an atom.
    pub fn atom_parity(&self, a: Atom) -> usize {
        (self.gen(a.gen).parity as usize + a.s_len()) % 2
    }

    /// Parity of a word.
    pub fn word_parity(&self, w: &[Atom]) -> usize {
        w.iter().map(|a| self.atom_parity(*a)).sum::<usize>() % 2
    }

    /// Parity of a homogeneous expression (zero is even).
    pub fn parity(&self, e: &FieldExpr) -> Result<usize> {
        let mut p = None;
        for (w, _) in e.terms() {
            let q = self.word_parity(w);
            match p {
                None => p = Some(q),
                Some(r) if r != q => {
                    return Err(Error::ParityInhomogeneous(self.render_expr(e)));
                }
                _ => {}
            }
        }
        Ok(p.unwrap_or(0))
    }

    /// Conformal weight of an atom, if the generator has one.
    pub fn atom_weight(&self, a: Atom) -> Option<BigRational> {
        let base = self.gen(a.gen).weight.clone()?;
        let mut w = base + BigRational::from_integer(a.t.into());
        if self.case == Case::K {
            w += BigRational::new((a.s_len() as i64).into(), 2.into());
        }
        Some(w)
    }

    pub fn word_weight(&self, w: &[Atom]) -> Option<BigRational> {
        let mut total = BigRational::zero();
        for a in w {
            total += self.atom_weight(*a)?;
        }
        Some(total)
    }

    /// Weight of an expression: `Ok(Some(w))` if homogeneous, `Ok(None)` if inhomogeneous.
    pub fn weight(&self, e: &FieldExpr) -> Result<Option<BigRational>> {
        let mut out: Option<BigRational> = None;
        for (w, _) in e.terms() {
            let x = self.word_weight(w).ok_or_else(|| {
                Error::invalid("weight requested but a generator has no declared weight")
            })?;
            match &out {
                None => out = Some(x),
                Some(y) if *y != x => return Ok(None),
                _ => {}
            }
        }
        Ok(Some(out.unwrap_or_else(BigRational::zero)))
    }

    /// Weight of a parameter monomial: `Δ(λ) = 1`, `Δ(χ) = 0` (W) or `1/2` (K).
    pub fn param_weight(&self, m: LMono) -> BigRational {
        let mut w = BigRational::from_integer(m.pow.into());
        if self.case == Case::K {
            w += BigRational::new((m.odd_degree() as i64).into(), 2.into());
        }
        w
    }

    /// Replaces central generators that carry a quotient value by that value times vacuum.
    pub fn quotient(&self, e: &FieldExpr) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (w, s) in e.terms() {
            let mut k = s.clone();
            let mut rest = Vec::with_capacity(w.len());
            for a in w {
                let g = self.gen(a.gen);
                match (&g.quotient, g.central) {
                    (Some(v), true) => k = &k * v,
                    _ => rest.push(*a),
                }
            }
            out.add_term(rest, k);
        }
        out
    }

    pub fn quotient_bracket(&self, p: &Bracket) -> Bracket {
        p.map_coeffs(|e| self.quotient(e))
    }

    fn s_letter(&self, i: u8) -> String {
        if self.n == 1 {
            "S".to_string()
        } else {
            format!("S{i}")
        }
    }

    /// Text of an atom, e.g. `T^2 S1 G`.
    pub fn render_atom(&self, a: Atom) -> String {
        let mut parts = Vec::new();
        match a.t {
            0 => {}
            1 => parts.push("T".to_string()),
            k => parts.push(format!("T^{k}")),
        }
        for i in mask_elems(a.s) {
            parts.push(self.s_letter(i));
        }
        parts.push(self.gen(a.gen).name.clone());
        parts.join(" ")
    }

    /// Text of a word: `vac`, an atom, or `:a b c:` for the right-nested product.
    pub fn render_word(&self, w: &[Atom]) -> String {
        match w.len() {
            0 => "vac".into(),
            1 => self.render_atom(w[0]),
            _ => {
                let parts: Vec<String> = w
                    .iter()
                    .map(|a| {
                        if a.t == 0 && a.s == 0 {
                            self.render_atom(*a)
                        } else {
                            format!("({})", self.render_atom(*a))
                        }
                    })
                    .collect();
                format!(":{}:", parts.join(" "))
            }
        }
    }

    /// Canonical text of an expression.
    pub fn render_expr(&self, e: &FieldExpr) -> String {
        let p = LambdaPoly::constant(self.case, self.n, Family::Lambda, e.clone());
        self.render_bracket(&p)
    }

    /// Canonical text of a Λ-polynomial with expression coefficients. Terms acting on a
    /// single generator are grouped as an operator polynomial applied to it.
    pub fn render_bracket(&self, p: &Bracket) -> String {
        self.render_poly(p, Family::Lambda)
    }

    /// Canonical text of a two-parameter polynomial such as a Jacobi residual.
    pub fn render_mixed(&self, p: &MixedPoly<FieldExpr>) -> String {
        let parts: Vec<String> = p
            .terms()
            .map(|(m, e)| format!("({})*{}", self.render_expr(e), mixed_name(self.n, *m)))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    pub fn render_poly(&self, p: &Bracket, family: Family) -> String {
        #[derive(PartialEq, Eq, PartialOrd, Ord, Clone)]
        enum Key {
            Gen(u16),
            Word(Word),
            Vac,
        }
        // item: (sort key, scalar, parameter monomial, t, s)
        type Item = ((usize, u32, u16, std::cmp::Reverse<u16>, u16), Scalar, LMono, u16, u16);
        let mut groups: BTreeMap<Key, Vec<Item>> = BTreeMap::new();
        for (m, e) in p.terms() {
            for (w, s) in e.terms() {
                let (key, t, sm) = match w.len() {
                    0 => (Key::Vac, 0, 0),
                    1 => (Key::Gen(w[0].gen), w[0].t, w[0].s),
                    _ => (Key::Word(w.clone()), 0, 0),
                };
                let odd = m.odd_degree() + sm.count_ones() as usize;
                let sort = (odd, m.pow, m.mask, std::cmp::Reverse(t), sm);
                groups.entry(key).or_default().push((sort, s.clone(), *m, t, sm));
            }
        }
        if groups.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (key, mut items) in groups {
            items.sort_by_key(|a| a.0);
            let target = match &key {
                Key::Gen(g) => Some(self.gen(*g).name.clone()),
                Key::Word(w) => Some(self.render_word(w)),
                Key::Vac => None,
            };
            let rendered: Vec<(bool, String)> = items
                .iter()
                .map(|(_, s, m, t, sm)| self.render_op(s, *m, *t, *sm, family))
                .collect();
            let (neg, body) = match (&target, rendered.len()) {
                (None, _) => {
                    let body = join_signed(&rendered);
                    match body.strip_prefix('-') {
                        Some(rest) => (true, rest.to_string()),
                        None => (false, body),
                    }
                }
                (Some(tg), 1) => {
                    let (neg, op) = rendered[0].clone();
                    if op == "1" {
                        (neg, tg.clone())
                    } else {
                        (neg, format!("{op} {tg}"))
                    }
                }
                (Some(tg), _) => (false, format!("({}) {}", join_signed(&rendered), tg)),
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }

    /// One operator monomial `s·λ^a χ^J T^t S^I` as `(negative, text)`; text `1` for unity.
    fn render_op(&self, s: &Scalar, m: LMono, t: u16, sm: u16, family: Family) -> (bool, String) {
        let (neg, coef) = s.fmt_coefficient();
        let mut parts = Vec::new();
        if !coef.is_empty() {
            parts.push(coef);
        }
        let mono = crate::params::mono_name(family, self.n, m);
        if !mono.is_empty() {
            parts.push(mono);
        }
        match t {
            0 => {}
            1 => parts.push("T".into()),
            k => parts.push(format!("T^{k}")),
        }
        for i in mask_elems(sm) {
            parts.push(self.s_letter(i));
        }
        if parts.is_empty() {
            (neg, "1".into())
        } else {
            (neg, parts.join("*"))
        }
    }
}

fn join_signed(items: &[(bool, String)]) -> String {
    let mut out = String::new();
    for (k, (neg, text)) in items.iter().enumerate() {
        if k == 0 {
            if *neg {
                out.push('-');
            }
        } else {
            out.push_str(if *neg { " - " } else { " + " });
        }
        out.push_str(text);
    }
    out
}

/// Words with a fixed meaning in the expression grammar.
pub fn is_reserved(name: &str, n: u8) -> bool {
    if matches!(name, "T" | "lambda" | "vac" | "i" | "S" | "chi") {
        return true;
    }
    for prefix in ["S", "chi"] {
        if let Some(rest) = name.strip_prefix(prefix) {
            if let Ok(k) = rest.parse::<u8>() {
                if k >= 1 && k <= n.max(9) {
                    return true;
                }
            }
        }
    }
    false
}
