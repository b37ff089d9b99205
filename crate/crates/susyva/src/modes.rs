//! Fourier modes of superfields and their Lie superalgebra.
//!
//! For a vector `a` the superfield is `Y(a, Z) = Σ_{n, I} θ^{N∖I} z^{-1-n} a_(n|I)`. The
//! bracket of two generator modes is available through two independent routes:
//!
//! * [`Method::ClosedForm`] evaluates the closed commutator formulas of the W and K cases,
//!   with the falling factorial `(n)_{j + #(J∖I)}` in the K case;
//! * [`Method::Ope`] expands `[Y(a,Z), Y(b,W)] = Σ D_W^{(j|J)} δ(Z,W) · Y(a_(j|J)b, W)` as a
//!   truncated super-Laurent series (see [`crate::distoracle`]) and reads off the
//!   coefficient of `θ^{N∖I} ζ^{N∖K} z^{-1-n} w^{-1-k}`.
//!
//! Both routes need structure constants that are linear in derivatives of generators,
//! plus central terms; composite coefficients are rejected.
//!
//! Component fields use the shifted convention `φ(z) = Σ_m φ_m z^{-m-Δ}`, so the
//! component of `θ^{N∖I}` in `Y(e, Z)` with weight `Δ` has `φ_m = e_(m+Δ-1|I)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::distoracle::{self, SuperLaurent, W, Z};
use crate::engine::{product_from_bracket, Engine};
use crate::error::{Error, Result};
use crate::expr::{Algebra, Atom, FieldExpr};
use crate::params::Case;
use crate::scalar::{binomial, factorial, falling, Scalar};
use crate::superindex::{bit, full_mask, mask_elems, sigma_mask, Sign};

/// A basis element of the mode algebra: a raw generator mode `g_(n|I)` or the central unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeKey {
    Unit,
    Raw { gen: u16, n: i64, mask: u16 },
}

/// A finite linear combination of [`ModeKey`]s.
#[derive(Clone, Default, PartialEq)]
pub struct ModeSum {
    terms: BTreeMap<ModeKey, Scalar>,
}

impl ModeSum {
    pub fn zero() -> ModeSum {
        ModeSum::default()
    }

    pub fn single(k: ModeKey, c: Scalar) -> ModeSum {
        let mut s = ModeSum::zero();
        s.add_term(k, c);
        s
    }

    pub fn add_term(&mut self, k: ModeKey, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&k) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(k, sum);
        }
    }

    pub fn add_scaled(&mut self, other: &ModeSum, k: &Scalar) {
        for (m, c) in &other.terms {
            self.add_term(*m, c * k);
        }
    }

    pub fn scale(&self, k: &Scalar) -> ModeSum {
        let mut out = ModeSum::zero();
        out.add_scaled(self, k);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ModeKey, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, k: &ModeKey) -> Scalar {
        self.terms.get(k).cloned().unwrap_or_default()
    }

    pub fn render(&self, alg: &Algebra) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let name = match k {
                    ModeKey::Unit => "1".to_string(),
                    ModeKey::Raw { gen, n, mask } => {
                        format!("{}_({}|{})", alg.gen(*gen).name, n, mask_label(*mask))
                    }
                };
                format!("({c})*{name}")
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Debug for ModeSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.terms)
    }
}

fn mask_label(mask: u16) -> String {
    mask_elems(mask).iter().map(|i| i.to_string()).collect::<Vec<_>>().join("")
}

fn sgn(s: Sign) -> Scalar {
    Scalar::from_int(s.value() as i64)
}

fn sigma(a: u16, b: u16) -> Scalar {
    sgn(sigma_mask(a, b))
}

fn pm(k: usize) -> Scalar {
    sgn(Sign::parity(k))
}

/// Which evaluation route [`mode_bracket`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Ope,
}

/// Parity of the mode `g_(n|I)`: `p(g) + N - |I|`.
pub fn mode_parity(alg: &Algebra, k: &ModeKey) -> usize {
    match k {
        ModeKey::Unit => 0,
        ModeKey::Raw { gen, mask, .. } => {
            (alg.atom_parity(Atom::gen(*gen)) + alg.n as usize + mask.count_ones() as usize) % 2
        }
    }
}

/// `(T^t S^I g)_(n|M)` in terms of raw modes of `g`.
fn atom_mode(alg: &Algebra, a: Atom, n: i64, mask: u16) -> ModeSum {
    if a.t > 0 {
        let inner = Atom { t: a.t - 1, ..a };
        return atom_mode(alg, inner, n - 1, mask).scale(&Scalar::from_int(-n));
    }
    if a.s == 0 {
        return ModeSum::single(ModeKey::Raw { gen: a.gen, n, mask }, Scalar::one());
    }
    let full = full_mask(alg.n);
    let i = *mask_elems(a.s).first().expect("non-empty");
    let e = bit(i);
    let inner = Atom { s: a.s & !e, ..a };
    if mask & e != 0 {
        atom_mode(alg, inner, n, mask & !e).scale(&sigma(e, full & !mask))
    } else {
        match alg.case {
            Case::W => ModeSum::zero(),
            Case::K => atom_mode(alg, inner, n - 1, mask | e)
                .scale(&sigma(e, full & !(mask | e)).scale_int(-n)),
        }
    }
}

/// `e_(n|M)` for an expression linear in generators (after the central quotient).
pub fn expr_mode(alg: &Algebra, e: &FieldExpr, n: i64, mask: u16) -> Result<ModeSum> {
    let e = alg.quotient(e);
    let mut out = ModeSum::zero();
    for (w, c) in e.terms() {
        match w.len() {
            0 => {
                if n == -1 && mask == full_mask(alg.n) {
                    out.add_term(ModeKey::Unit, c.clone());
                }
            }
            1 => out.add_scaled(&atom_mode(alg, w[0], n, mask), c),
            _ => {
                return Err(Error::Unsupported(format!(
                    "composite structure constant {}",
                    alg.render_expr(&FieldExpr::word(w.clone(), c.clone()))
                )))
            }
        }
    }
    Ok(out)
}

/// The brackets `a_(j|J)b` (conformal-algebra products) of two generators, keyed by `(j, J)`.
fn products(eng: &Engine, a: u16, b: u16) -> Result<Vec<(u32, u16, FieldExpr)>> {
    let alg = eng.alg;
    let br = eng.bracket(&FieldExpr::atom(Atom::gen(a)), &FieldExpr::atom(Atom::gen(b)));
    let mut out = Vec::new();
    for (m, _) in br.terms() {
        let p = alg.quotient(&product_from_bracket(&br, alg.n, m.pow, m.mask));
        if p.is_zero() {
            continue;
        }
        if p.max_len() > 1 {
            return Err(Error::Unsupported(format!(
                "composite structure constant in [{}_Λ {}]",
                alg.gen(a).name,
                alg.gen(b).name
            )));
        }
        out.push((m.pow, m.mask, p));
    }
    Ok(out)
}

fn closed_form(eng: &Engine, x: (u16, i64, u16), y: (u16, i64, u16)) -> Result<ModeSum> {
    let alg = eng.alg;
    let n_odd = alg.n as usize;
    let full = full_mask(alg.n);
    let (a, n, imask) = x;
    let (b, k, kmask) = y;
    let pa = alg.atom_parity(Atom::gen(a));
    let ni = imask.count_ones() as usize;
    let nk = kmask.count_ones() as usize;
    let outer = pm((pa + n_odd + ni) * (n_odd + nk));
    let sigma_i = sigma(imask, full & !imask);
    let mut out = ModeSum::zero();
    for (j, jmask, p) in products(eng, a, b)? {
        let nj = jmask.count_ones() as usize;
        let (coef, target) = match alg.case {
            Case::W => {
                if jmask & imask != jmask {
                    continue;
                }
                let d = imask & !jmask;
                if d & kmask != 0 {
                    continue;
                }
                let c = Scalar::from_rational(binomial(n, j as i64))
                    * pm((ni - nj) * (n_odd - nj))
                    * sigma_i.clone()
                    * sigma(jmask, d)
                    * sigma(d, (full & !kmask) & !d);
                (c, (n + k - j as i64, kmask | d))
            }
            Case::K => {
                let d = imask ^ jmask;
                if d & kmask != 0 {
                    continue;
                }
                let j_minus_i = jmask & !imask;
                let j_and_i = jmask & imask;
                let i_minus_j = imask & !jmask;
                let e = j_minus_i.count_ones() as i64;
                let ci = j_and_i.count_ones() as usize;
                let exponent = nj * (n_odd - ni) + ni * n_odd + ci * ci.saturating_sub(1) / 2 + nj * (nj + 1) / 2;
                let ff = BigRational::from_integer(falling(n, j as i64 + e)) / factorial(j);
                let c = pm(exponent)
                    * Scalar::from_rational(ff)
                    * sigma(d, full & !(kmask | d))
                    * sigma_i.clone()
                    * sigma(j_minus_i, j_and_i)
                    * sigma(j_and_i, i_minus_j)
                    * sigma(j_minus_i, i_minus_j);
                (c, (n + k - j as i64 - e, kmask | d))
            }
        };
        if coef.is_zero() {
            continue;
        }
        let m = expr_mode(alg, &p, target.0, target.1)?;
        out.add_scaled(&m, &(coef * outer.clone()));
    }
    Ok(out)
}

/// Odd monomial `ζ^{M}` times `w^{p}`, as a two-variable series.
fn w_monomial(n_odd: u8, window: (i64, i64), p: i64, mask: u16) -> SuperLaurent {
    let odd: Vec<(usize, u8)> = mask_elems(mask).into_iter().map(|i| (W, i)).collect();
    SuperLaurent::monomial(n_odd, 2, window, &[0, p], &odd, Scalar::one())
}

fn ope(eng: &Engine, x: (u16, i64, u16), y: (u16, i64, u16)) -> Result<ModeSum> {
    let alg = eng.alg;
    let case = alg.case;
    let n_odd = alg.n;
    let full = full_mask(n_odd);
    let (a, n, imask) = x;
    let (b, k, kmask) = y;
    let prods = products(eng, a, b)?;
    let max_j = prods.iter().map(|p| p.0 as i64).max().unwrap_or(0);
    let max_t = prods
        .iter()
        .flat_map(|p| p.2.terms().map(|(w, _)| w.first().map(|a| a.t as i64 + a.s_len() as i64).unwrap_or(0)))
        .max()
        .unwrap_or(0);
    let reach = n.abs().max(k.abs()) + max_j + max_t + n_odd as i64 + 6;
    let window = (-reach - 2, reach + 2);
    let delta = distoracle::delta(n_odd, window);
    let theta_target = {
        let probe = SuperLaurent::zero(n_odd, 2, window);
        probe.odd_mask(Z, full & !imask) | probe.odd_mask(W, full & !kmask)
    };
    let target = [-1 - n, -1 - k];
    let mut c = ModeSum::zero();
    for (j, jmask, p) in prods {
        let dd = distoracle::d_deriv(case, j, jmask, &delta);
        // Y(1, W) is the identity
        let vac = p.vacuum_coeff();
        if !vac.is_zero() {
            let co = dd.coeff(&target, theta_target);
            c.add_term(ModeKey::Unit, co * vac);
        }
        for (w, coef) in p.terms() {
            if w.is_empty() {
                continue;
            }
            let atom = w[0];
            let derivs = atom.t as i64 + atom.s_len() as i64;
            let centre = n + k - j as i64 - derivs;
            for m in (centre - n_odd as i64 - 2)..=(centre + derivs + n_odd as i64 + 2) {
                for mm in 0..(1u16 << n_odd) {
                    let mmask = mm << 1;
                    // Y(T^t S^J g, W) = ∂_w^t D_W^J Y(g, W)
                    let f = w_monomial(n_odd, window, -1 - m, full & !mmask)
                        .super_d_pow(case, W, atom.t as u32, atom.s);
                    if f.is_zero() {
                        continue;
                    }
                    let co = dd.mul(&f).coeff(&target, theta_target);
                    if !co.is_zero() {
                        c.add_term(ModeKey::Raw { gen: atom.gen, n: m, mask: mmask }, co * coef.clone());
                    }
                }
            }
        }
    }
    let pa = alg.atom_parity(Atom::gen(a));
    let outer = pm((pa + n_odd as usize + imask.count_ones() as usize) * (n_odd as usize + kmask.count_ones() as usize));
    Ok(c.scale(&outer))
}

/// `[a_(n|I), b_(k|K)]` for generator modes.
pub fn raw_bracket(eng: &Engine, x: (u16, i64, u16), y: (u16, i64, u16), method: Method) -> Result<ModeSum> {
    match method {
        Method::ClosedForm => closed_form(eng, x, y),
        Method::Ope => ope(eng, x, y),
    }
}

/// Bracket of two linear combinations of modes, extended bilinearly with the central unit.
pub fn mode_bracket(eng: &Engine, x: &ModeSum, y: &ModeSum, method: Method) -> Result<ModeSum> {
    let mut out = ModeSum::zero();
    for (kx, cx) in x.terms() {
        for (ky, cy) in y.terms() {
            if let (ModeKey::Raw { gen: a, n, mask: i }, ModeKey::Raw { gen: b, n: k, mask: kk }) = (kx, ky) {
                let r = raw_bracket(eng, (*a, *n, *i), (*b, *k, *kk), method)?;
                // scalars pass through modes of the left factor with no sign: they are even
                out.add_scaled(&r, &(cx * cy));
            }
        }
    }
    Ok(out)
}

/// A raw generator mode `(generator, n, mask)`.
type RawMode = (u16, i64, u16);

/// Memoized raw-mode brackets for repeated evaluation (Jacobi sweeps).
pub struct CachedBrackets<'a> {
    alg: &'a Algebra,
    method: Method,
    cache: Mutex<HashMap<(RawMode, RawMode), ModeSum>>,
}

impl<'a> CachedBrackets<'a> {
    pub fn new(alg: &'a Algebra, method: Method) -> CachedBrackets<'a> {
        CachedBrackets { alg, method, cache: Mutex::new(HashMap::new()) }
    }

    pub fn raw(&self, x: (u16, i64, u16), y: (u16, i64, u16)) -> Result<ModeSum> {
        if let Some(v) = self.cache.lock().unwrap().get(&(x, y)) {
            return Ok(v.clone());
        }
        let v = raw_bracket(&Engine::new(self.alg), x, y, self.method)?;
        self.cache.lock().unwrap().insert((x, y), v.clone());
        Ok(v)
    }

    pub fn bracket(&self, x: &ModeSum, y: &ModeSum) -> Result<ModeSum> {
        let mut out = ModeSum::zero();
        for (kx, cx) in x.terms() {
            for (ky, cy) in y.terms() {
                if let (ModeKey::Raw { gen: a, n, mask: i }, ModeKey::Raw { gen: b, n: k, mask: kk }) = (kx, ky) {
                    out.add_scaled(&self.raw((*a, *n, *i), (*b, *k, *kk))?, &(cx * cy));
                }
            }
        }
        Ok(out)
    }

    /// `[x,[y,z]] - [[x,y],z] - (-1)^{p(x)p(y)}[y,[x,z]]`.
    pub fn jacobi_defect(&self, x: ModeKey, y: ModeKey, z: ModeKey) -> Result<ModeSum> {
        let alg = self.alg;
        let one = Scalar::one();
        let sx = ModeSum::single(x, one.clone());
        let sy = ModeSum::single(y, one.clone());
        let sz = ModeSum::single(z, one);
        let a = self.bracket(&sx, &self.bracket(&sy, &sz)?)?;
        let b = self.bracket(&self.bracket(&sx, &sy)?, &sz)?;
        let c = self.bracket(&sy, &self.bracket(&sx, &sz)?)?;
        let mut out = a;
        out.add_scaled(&b, &Scalar::from_int(-1));
        out.add_scaled(&c, &pm(mode_parity(alg, &x) * mode_parity(alg, &y)).scale_int(-1));
        Ok(out)
    }
}

/// Raw modes `g_(n|I)` of the non-central generators with `lo ≤ n ≤ hi`.
pub fn raw_modes(alg: &Algebra, lo: i64, hi: i64) -> Vec<ModeKey> {
    let mut out = Vec::new();
    for g in 0..alg.gens.len() as u16 {
        if alg.gen(g).central {
            continue;
        }
        for n in lo..=hi {
            for m in 0..(1u16 << alg.n) {
                out.push(ModeKey::Raw { gen: g, n, mask: m << 1 });
            }
        }
    }
    out
}

/// Graded antisymmetry defect `[x,y] + (-1)^{p(x)p(y)}[y,x]` for raw modes.
pub fn antisymmetry_defect(eng: &Engine, x: ModeKey, y: ModeKey, method: Method) -> Result<ModeSum> {
    let alg = eng.alg;
    let xy = mode_bracket(eng, &ModeSum::single(x, Scalar::one()), &ModeSum::single(y, Scalar::one()), method)?;
    let yx = mode_bracket(eng, &ModeSum::single(y, Scalar::one()), &ModeSum::single(x, Scalar::one()), method)?;
    let s = pm(mode_parity(alg, &x) * mode_parity(alg, &y));
    let mut out = xy;
    out.add_scaled(&yx, &s);
    Ok(out)
}

// --------------------------------------------------------------------------------------
// component fields

/// A component field `φ(z) = Σ_r factor_r · [θ^{N∖I_r} component of Y(e_r, Z)]`, with
/// shifted modes `φ_m = Σ_r factor_r (e_r)_(m+Δ-1|I_r)`.
#[derive(Clone, Debug)]
pub struct ComponentField {
    pub name: String,
    pub weight: BigRational,
    pub parts: Vec<(FieldExpr, u16, Scalar)>,
}

impl ComponentField {
    /// The raw index `m + Δ - 1`, when it is an integer.
    pub fn raw_index(&self, m: &BigRational) -> Option<i64> {
        let r = m + &self.weight - BigRational::one();
        if r.is_integer() {
            r.to_integer().to_i64()
        } else {
            None
        }
    }

    /// `φ_m` in raw generator modes.
    pub fn mode(&self, alg: &Algebra, m: &BigRational) -> Result<ModeSum> {
        let r = self
            .raw_index(m)
            .ok_or_else(|| Error::invalid(format!("{}_{} is not a mode of weight {}", self.name, m, self.weight)))?;
        let mut out = ModeSum::zero();
        for (e, mask, f) in &self.parts {
            out.add_scaled(&expr_mode(alg, e, r, *mask)?, f);
        }
        Ok(out)
    }

    /// Admissible mode indices in `[lo, hi]`.
    pub fn indices(&self, lo: &BigRational, hi: &BigRational) -> Vec<BigRational> {
        let frac = (&self.weight - BigRational::one()).fract();
        let shift = if frac.is_zero() { BigRational::zero() } else { BigRational::one() - frac.abs() };
        let shift = if self.weight.fract().is_zero() { BigRational::zero() } else { shift };
        let mut out = Vec::new();
        let mut m = lo.floor() - BigRational::one() + shift;
        while &m <= hi {
            if &m >= lo && self.raw_index(&m).is_some() {
                out.push(m.clone());
            }
            m += BigRational::one();
        }
        out
    }
}

/// One component of a superfield expansion: `Y(g, Z) ∋ θ^{theta} · factor · field(z)`.
#[derive(Clone, Debug)]
pub struct ComponentDecl {
    pub theta: u16,
    pub factor: Scalar,
    pub field: ComponentField,
}

/// Expands the superfield of generator `gen` into its `2^N` components.
///
/// The superconformal generator of the K case with `N ≤ 2` uses the classical names and
/// normalizations: `G = G(z) + 2θL(z)` for `N = 1` and
/// `G = √-1 J(z) + θ¹G⁽²⁾(z) - θ²G⁽¹⁾(z) + 2θ¹θ²L(z)` for `N = 2`. In the W case with
/// `N = 1` the components are `a(z) + θ (Sa)(z)`. Otherwise component `θ^{N∖I}` is named
/// `g[I]` with factor 1.
pub fn component_expand(alg: &Algebra, gen: &str) -> Result<Vec<ComponentDecl>> {
    let id = alg.gen_id(gen).ok_or_else(|| Error::invalid(format!("unknown generator {gen}")))?;
    let n = alg.n;
    let full = full_mask(n);
    let base = alg
        .gen(id)
        .weight
        .clone()
        .ok_or_else(|| Error::invalid(format!("generator {gen} has no weight")))?;
    let e = FieldExpr::atom(Atom::gen(id));
    let is_virasoro = alg.case == Case::K && alg.conformal.first().map(|c| c == gen).unwrap_or(false);
    let named: Vec<(u16, &str, Scalar)> = match (alg.case, n, is_virasoro) {
        (Case::K, 1, true) => vec![(0, "G", Scalar::one()), (bit(1), "L", Scalar::from_int(2))],
        (Case::K, 2, true) => vec![
            (0, "J", Scalar::imag()),
            (bit(1), "G2", Scalar::one()),
            (bit(2), "G1", Scalar::from_int(-1)),
            (bit(1) | bit(2), "L", Scalar::from_int(2)),
        ],
        _ => Vec::new(),
    };
    let mut out = Vec::new();
    for theta_bits in 0..(1u16 << n) {
        let theta = theta_bits << 1;
        let mask = full & !theta;
        let weight = &base + BigRational::new(BigInt::from(theta.count_ones()), BigInt::from(2));
        let (name, factor) = if let Some((_, nm, f)) = named.iter().find(|x| x.0 == theta) {
            (nm.to_string(), f.clone())
        } else if alg.case == Case::W && n == 1 {
            (if theta == 0 { gen.to_string() } else { format!("S{gen}") }, Scalar::one())
        } else {
            (format!("{gen}[{}]", mask_label(mask)), Scalar::one())
        };
        let inv = invert_unit(&factor).expect("normalization factors are invertible");
        out.push(ComponentDecl {
            theta,
            factor,
            field: ComponentField { name, weight, parts: vec![(e.clone(), mask, inv)] },
        });
    }
    Ok(out)
}

/// Inverse of a nonzero rational or a rational multiple of `√-1`.
fn invert_unit(s: &Scalar) -> Option<Scalar> {
    if let Some(r) = s.as_rational() {
        return if r.is_zero() { None } else { Some(Scalar::from_rational(r.recip())) };
    }
    let i = Scalar::imag();
    let r = (s * &i).as_rational()?;
    // s = -r·i, so s⁻¹ = i / r
    if r.is_zero() {
        None
    } else {
        Some(i.scale(&r.recip()))
    }
}

/// Expresses a raw mode combination in terms of the given component modes of index `p`
/// plus a central term. Fails when the combination is outside their span.
pub fn express(alg: &Algebra, fields: &[ComponentField], p: &BigRational, value: &ModeSum) -> Result<TableValue> {
    let mut basis = Vec::new();
    for (i, f) in fields.iter().enumerate() {
        if f.raw_index(p).is_some() {
            let m = f.mode(alg, p)?;
            if !m.is_zero() {
                basis.push((i, m));
            }
        }
    }
    let central = value.coeff(&ModeKey::Unit);
    let mut rows: Vec<ModeKey> = Vec::new();
    for (_, m) in &basis {
        for (k, _) in m.terms() {
            if !rows.contains(k) {
                rows.push(*k);
            }
        }
    }
    for (k, _) in value.terms() {
        if *k != ModeKey::Unit && !rows.contains(k) {
            return Err(Error::invalid(format!("{} is outside the component span", value.render(alg))));
        }
    }
    // augmented matrix: rows = raw modes, columns = basis elements, last column = value
    let cols = basis.len();
    let mut mat: Vec<Vec<Scalar>> = rows
        .iter()
        .map(|r| {
            let mut row: Vec<Scalar> = basis.iter().map(|(_, m)| m.coeff(r)).collect();
            row.push(value.coeff(r));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r0 = 0;
    for c in 0..cols {
        let Some(pr) = (r0..mat.len()).find(|&r| invert_unit(&mat[r][c]).is_some()) else {
            continue;
        };
        mat.swap(r0, pr);
        let inv = invert_unit(&mat[r0][c]).unwrap();
        for x in mat[r0].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..mat.len() {
            if r != r0 && !mat[r][c].is_zero() {
                let f = mat[r][c].clone();
                for cc in 0..=cols {
                    let sub = &mat[r0][cc] * &f;
                    mat[r][cc] = &mat[r][cc] - &sub;
                }
            }
        }
        pivots.push((c, r0));
        r0 += 1;
    }
    if mat[r0..].iter().any(|row| !row[cols].is_zero()) {
        return Err(Error::invalid(format!("{} is outside the component span", value.render(alg))));
    }
    let mut terms = Vec::new();
    for (c, r) in pivots {
        let x = mat[r][cols].clone();
        if !x.is_zero() {
            terms.push((basis[c].0, x));
        }
    }
    Ok(TableValue { index: p.clone(), terms, central })
}

/// A bracket value `Σ c_i φ^{(i)}_p + central · 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TableValue {
    pub index: BigRational,
    pub terms: Vec<(usize, Scalar)>,
    pub central: Scalar,
}

impl TableValue {
    pub fn render(&self, fields: &[ComponentField]) -> String {
        let mut parts: Vec<(bool, String)> = self
            .terms
            .iter()
            .map(|(i, c)| {
                let name = format!("{}_{}", fields[*i].name, self.index);
                let (neg, text) = c.fmt_coefficient();
                (neg, if text.is_empty() { name } else { format!("{text}*{name}") })
            })
            .collect();
        if !self.central.is_zero() {
            let (neg, text) = self.central.fmt_coefficient();
            parts.push((neg, if text.is_empty() { "1".into() } else { text }));
        }
        let mut out = String::new();
        for (k, (neg, text)) in parts.iter().enumerate() {
            match (k, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(text);
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }
}

/// One entry `[φ_m, ψ_n]` of a mode table.
#[derive(Clone, Debug)]
pub struct TableEntry {
    pub left: (usize, BigRational),
    pub right: (usize, BigRational),
    pub value: TableValue,
}

/// All brackets of component modes with indices in `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct ModeTable {
    pub fields: Vec<ComponentField>,
    pub entries: Vec<TableEntry>,
}

impl ModeTable {
    pub fn get(&self, left: &str, m: &BigRational, right: &str, n: &BigRational) -> Option<&TableValue> {
        let li = self.fields.iter().position(|f| f.name == left)?;
        let ri = self.fields.iter().position(|f| f.name == right)?;
        self.entries
            .iter()
            .find(|e| e.left.0 == li && &e.left.1 == m && e.right.0 == ri && &e.right.1 == n)
            .map(|e| &e.value)
    }

    pub fn render_entry(&self, e: &TableEntry) -> String {
        format!(
            "[{}_{}, {}_{}] = {}",
            self.fields[e.left.0].name,
            e.left.1,
            self.fields[e.right.0].name,
            e.right.1,
            e.value.render(&self.fields)
        )
    }
}

fn field_parity(alg: &Algebra, f: &ComponentField, m: &BigRational) -> Result<Option<usize>> {
    let mode = f.mode(alg, m)?;
    let ps: Vec<usize> = mode.terms().map(|(k, _)| mode_parity(alg, k)).collect();
    Ok(ps.first().copied())
}

/// Builds the table of all pairwise brackets and validates graded antisymmetry.
pub fn mode_table(
    eng: &Engine,
    fields: &[ComponentField],
    lo: &BigRational,
    hi: &BigRational,
    method: Method,
) -> Result<ModeTable> {
    let alg = eng.alg;
    let mut pairs = Vec::new();
    for (i, f) in fields.iter().enumerate() {
        for m in f.indices(lo, hi) {
            for (j, g) in fields.iter().enumerate() {
                for n in g.indices(lo, hi) {
                    pairs.push(((i, m.clone()), (j, n)));
                }
            }
        }
    }
    let values: Vec<Result<(ModeSum, TableEntry)>> = pairs
        .par_iter()
        .map(|((i, m), (j, n))| {
            let eng = Engine::new(alg);
            let x = fields[*i].mode(alg, m)?;
            let y = fields[*j].mode(alg, n)?;
            let raw = mode_bracket(&eng, &x, &y, method)?;
            let value = express(alg, fields, &(m + n), &raw)?;
            Ok((raw, TableEntry { left: (*i, m.clone()), right: (*j, n.clone()), value }))
        })
        .collect();
    let mut entries = Vec::new();
    let mut raws = BTreeMap::new();
    for v in values {
        let (raw, e) = v?;
        raws.insert((e.left.clone(), e.right.clone()), raw);
        entries.push(e);
    }
    for e in &entries {
        let (Some(pl), Some(pr)) = (
            field_parity(alg, &fields[e.left.0], &e.left.1)?,
            field_parity(alg, &fields[e.right.0], &e.right.1)?,
        ) else {
            continue;
        };
        let xy = &raws[&(e.left.clone(), e.right.clone())];
        let yx = &raws[&(e.right.clone(), e.left.clone())];
        let mut d = xy.clone();
        d.add_scaled(yx, &pm(pl * pr));
        if !d.is_zero() {
            return Err(Error::invalid(format!(
                "graded antisymmetry fails for {}: {}",
                ModeTable { fields: fields.to_vec(), entries: vec![e.clone()] }.render_entry(e),
                d.render(alg)
            )));
        }
    }
    Ok(ModeTable { fields: fields.to_vec(), entries })
}

/// Components used for the classical tables.
pub mod presets {
    use super::*;

    fn field(name: &str, weight: BigRational, parts: Vec<(FieldExpr, u16, Scalar)>) -> ComponentField {
        ComponentField { name: name.into(), weight, parts }
    }

    fn generator(alg: &Algebra, name: &str) -> Result<FieldExpr> {
        let id = alg.gen_id(name).ok_or_else(|| Error::invalid(format!("{} has no generator {name}", alg.name)))?;
        Ok(FieldExpr::atom(Atom::gen(id)))
    }

    /// `L` with `L(z) = Σ L_m z^{-2-m}`, from `G(z,θ) = G(z) + 2θL(z)` in the K case, `N = 1`.
    pub fn virasoro_k1(alg: &Algebra) -> Result<Vec<ComponentField>> {
        let g = generator(alg, &alg.conformal[0])?;
        Ok(vec![field("L", BigRational::from_integer(2.into()), vec![(g, 0, Scalar::from_ratio(1, 2))])])
    }

    /// `L` and `G` (Neveu–Schwarz, `G_r` with `r ∈ ½ + ℤ`) from the K case, `N = 1`.
    pub fn neveu_schwarz_k1(alg: &Algebra) -> Result<Vec<ComponentField>> {
        let g = generator(alg, &alg.conformal[0])?;
        Ok(vec![
            field("L", BigRational::from_integer(2.into()), vec![(g.clone(), 0, Scalar::from_ratio(1, 2))]),
            field("G", BigRational::new(3.into(), 2.into()), vec![(g, bit(1), Scalar::one())]),
        ])
    }

    /// `T, Q, H, J` of the twisted N = 2 algebra from the W case, `N = 1`, with
    /// `Y(ν) = H + θ(T + ∂J)` and `Y(τ) = -J + θQ` for the conformal pair `(ν, τ)`.
    pub fn n2_from_w1(alg: &Algebra) -> Result<Vec<ComponentField>> {
        let nu = generator(alg, &alg.conformal[0])?;
        let tau = generator(alg, &alg.conformal[1])?;
        let t_tau = FieldExpr::atom(Atom { t: 1, ..Atom::gen(alg.gen_id(&alg.conformal[1]).unwrap()) });
        let one = Scalar::one();
        let two = BigRational::from_integer(2.into());
        let unit = BigRational::one();
        Ok(vec![
            field("T", two.clone(), vec![(nu.clone(), 0, one.clone()), (t_tau, bit(1), one.clone())]),
            field("Q", two, vec![(tau.clone(), 0, one.clone())]),
            field("H", unit.clone(), vec![(nu, bit(1), one)]),
            field("J", unit, vec![(tau, bit(1), Scalar::from_int(-1))]),
        ])
    }
}
