//! The Λ-bracket calculus.
//!
//! [`Engine`] computes `[a_Λ b]` and the normally ordered product `:ab:` of canonical
//! expressions by structural recursion. The two operations are mutually recursive:
//!
//! * brackets with a normally ordered product on the right use the non-commutative Wick
//!   formula, brackets with a product on the left use skew-symmetry, and brackets of two
//!   atoms use sesquilinearity and the structure constants;
//! * normally ordered products are brought to canonical form with the quasi-commutativity
//!   and quasi-associativity corrections, which are built from brackets.
//!
//! Every correction term has either fewer atoms or lower generator order than the product
//! it replaces, which is what makes the recursion terminate. Results are memoised per
//! engine; an engine is cheap to create and is meant to be used from a single thread.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expr::{Algebra, Atom, Bracket, FieldExpr, Word};
use crate::params::{
    mixed_mono_mul, substitute_sum, top_sign, Case, Family, LMono, LambdaPoly, MixedConvention,
    MixedMono, MixedPoly,
};
use crate::scalar::{factorial, Scalar};
use crate::superindex::{full_mask, mask_elems, Sign};

/// Residual of the Jacobi identity, a polynomial in the mixed algebra of `Λ` and `Γ`.
pub type JacobiResidual = MixedPoly<FieldExpr>;

fn sign(s: Sign) -> Scalar {
    Scalar::from_int(s.value() as i64)
}

fn parity_sign(k: usize) -> Scalar {
    sign(Sign::parity(k))
}

/// Bracket and normal-product engine over one algebra presentation.
pub struct Engine<'a> {
    pub alg: &'a Algebra,
    pub convention: MixedConvention,
    nprod_memo: RefCell<HashMap<(Atom, Word), FieldExpr>>,
    bracket_memo: RefCell<HashMap<(Word, Word), Rc<Bracket>>>,
    deriv_memo: RefCell<HashMap<(u8, Word), FieldExpr>>,
    gen_memo: RefCell<HashMap<(u16, u16), Rc<Bracket>>>,
}

impl<'a> Engine<'a> {
    pub fn new(alg: &'a Algebra) -> Engine<'a> {
        Engine::with_convention(alg, MixedConvention::Supercommuting)
    }

    pub fn with_convention(alg: &'a Algebra, convention: MixedConvention) -> Engine<'a> {
        Engine {
            alg,
            convention,
            nprod_memo: RefCell::new(HashMap::new()),
            bracket_memo: RefCell::new(HashMap::new()),
            deriv_memo: RefCell::new(HashMap::new()),
            gen_memo: RefCell::new(HashMap::new()),
        }
    }

    fn n(&self) -> u8 {
        self.alg.n
    }

    fn full(&self) -> u16 {
        full_mask(self.alg.n)
    }

    fn zero(&self) -> Bracket {
        self.alg.zero_bracket()
    }

    fn is_central(&self, a: Atom) -> bool {
        self.alg.gen(a.gen).central
    }

    /// Number of memoised entries (normal products, brackets).
    pub fn memo_sizes(&self) -> (usize, usize) {
        (self.nprod_memo.borrow().len(), self.bracket_memo.borrow().len())
    }

    // ----------------------------------------------------------------------------------
    // normal products and derivations

    /// Canonical form of an arbitrary (possibly unordered) expression.
    pub fn normalize(&self, e: &FieldExpr) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (w, s) in e.terms() {
            out.add_scaled(&self.normalize_word(w), s);
        }
        out
    }

    fn normalize_word(&self, w: &[Atom]) -> FieldExpr {
        let mut acc = FieldExpr::vacuum();
        for a in w.iter().rev() {
            acc = self.nprod_atom_expr(*a, &acc);
        }
        acc
    }

    /// The normally ordered product `:ab:` in canonical form.
    pub fn nprod(&self, a: &FieldExpr, b: &FieldExpr) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (u, s) in a.terms() {
            for (w, t) in b.terms() {
                out.add_scaled(&self.nprod_words(u, w), &(s * t));
            }
        }
        out
    }

    fn nprod_words(&self, u: &[Atom], w: &[Atom]) -> FieldExpr {
        match u.len() {
            0 => FieldExpr::word(w.to_vec(), Scalar::one()),
            1 => self.nprod_atom_word(u[0], w),
            _ => {
                // ::x u': w: = :x:u' w:: + QA(x, u', w)
                let x = u[0];
                let rest = FieldExpr::word(u[1..].to_vec(), Scalar::one());
                let we = FieldExpr::word(w.to_vec(), Scalar::one());
                let inner = self.nprod_words(&u[1..], w);
                let mut out = self.nprod_atom_expr(x, &inner);
                out.add(&self.qa(&FieldExpr::atom(x), &rest, &we));
                out
            }
        }
    }

    fn nprod_atom_expr(&self, x: Atom, e: &FieldExpr) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (w, s) in e.terms() {
            out.add_scaled(&self.nprod_atom_word(x, w), s);
        }
        out
    }

    fn nprod_atom_word(&self, x: Atom, w: &[Atom]) -> FieldExpr {
        if w.is_empty() {
            return FieldExpr::atom(x);
        }
        let y = w[0];
        let px = self.alg.atom_parity(x);
        if x < y || (x == y && px == 0) {
            let mut v = Vec::with_capacity(w.len() + 1);
            v.push(x);
            v.extend_from_slice(w);
            return FieldExpr::word(v, Scalar::one());
        }
        let key = (x, w.to_vec());
        if let Some(hit) = self.nprod_memo.borrow().get(&key) {
            return hit.clone();
        }
        let r = &w[1..];
        let xe = FieldExpr::atom(x);
        let re = FieldExpr::word(r.to_vec(), Scalar::one());
        let result = if x == y {
            // x odd: :xx: = QC(x,x)/2, then ::xx:r: = :x:xr:: + QA(x,x,r)
            let half = self.qc(&xe, &xe).scale(&Scalar::from_ratio(1, 2));
            let mut out = self.nprod(&half, &re);
            out.add_scaled(&self.qa(&xe, &xe, &re), &Scalar::from_int(-1));
            out
        } else {
            // x > y
            let ye = FieldExpr::atom(y);
            let py = self.alg.atom_parity(y);
            let s = parity_sign(px * py);
            let mut swapped = self.nprod_atom_expr(y, &self.nprod_atom_word(x, r));
            swapped.add(&self.qa(&ye, &xe, &re));
            let mut out = swapped.scale(&s);
            out.add(&self.nprod(&self.qc(&xe, &ye), &re));
            out.add_scaled(&self.qa(&xe, &ye, &re), &Scalar::from_int(-1));
            out
        };
        self.nprod_memo.borrow_mut().insert(key, result.clone());
        result
    }

    /// The even derivation `T`.
    pub fn apply_t(&self, e: &FieldExpr) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (w, s) in e.terms() {
            out.add_scaled(&self.deriv_word(0, w), s);
        }
        out
    }

    /// The odd derivation `S^i`.
    pub fn apply_s(&self, i: u8, e: &FieldExpr) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (w, s) in e.terms() {
            out.add_scaled(&self.deriv_word(i, w), s);
        }
        out
    }

    /// `T^k e`.
    pub fn apply_t_pow(&self, k: u32, e: &FieldExpr) -> FieldExpr {
        let mut out = e.clone();
        for _ in 0..k {
            out = self.apply_t(&out);
        }
        out
    }

    /// Derivation `op` (0 for `T`, `i` for `S^i`) of a canonical word.
    fn deriv_word(&self, op: u8, w: &[Atom]) -> FieldExpr {
        if w.is_empty() {
            return FieldExpr::zero();
        }
        let key = (op, w.to_vec());
        if let Some(hit) = self.deriv_memo.borrow().get(&key) {
            return hit.clone();
        }
        let x = w[0];
        let rest = &w[1..];
        let mut out = FieldExpr::zero();
        if !self.is_central(x) {
            if op == 0 {
                out.add(&self.nprod_atom_word(x.apply_t(), rest));
            } else if let Some((s, x2)) = x.apply_s(self.alg.case, op) {
                out.add_scaled(&self.nprod_atom_word(x2, rest), &sign(s));
            }
        }
        let d_rest = self.deriv_word(op, rest);
        if !d_rest.is_zero() {
            let k = if op == 0 { Scalar::one() } else { parity_sign(self.alg.atom_parity(x)) };
            out.add_scaled(&self.nprod_atom_expr(x, &d_rest), &k);
        }
        self.deriv_memo.borrow_mut().insert(key, out.clone());
        out
    }

    /// `a_{(j|N)} b`: the coefficient products with the full odd index.
    fn top_products(&self, a: &FieldExpr, b: &FieldExpr) -> Vec<(u32, FieldExpr)> {
        let full = self.full();
        self.bracket(a, b)
            .into_terms()
            .filter(|(m, _)| m.mask == full)
            .map(|(m, e)| (m.pow, e))
            .collect()
    }

    /// `:ab: - (-1)^{ab}:ba:` computed as `∫_{-∇}^0 [a_Λ b] dΛ`.
    pub fn qc(&self, a: &FieldExpr, b: &FieldExpr) -> FieldExpr {
        let cn = sign(top_sign(self.n()));
        let mut out = FieldExpr::zero();
        for (k, e) in self.top_products(a, b) {
            let coef = Scalar::from_rational(BigRational::new(
                if k % 2 == 0 { 1.into() } else { (-1).into() },
                (k + 1).into(),
            ));
            out.add_scaled(&self.apply_t_pow(k + 1, &e), &(&coef * &cn));
        }
        out
    }

    /// `::ab:c: - :a:bc::` by the quasi-associativity formula.
    pub fn qa(&self, a: &FieldExpr, b: &FieldExpr, c: &FieldExpr) -> FieldExpr {
        if c.is_zero() || c.is_scalar() {
            return FieldExpr::zero();
        }
        let cn = sign(top_sign(self.n()));
        let mut out = FieldExpr::zero();
        for (j, e) in self.top_products(b, c) {
            let k = Scalar::from_ratio(1, (j + 1) as i64);
            out.add_scaled(&self.nprod(&self.apply_t_pow(j + 1, a), &e), &(&k * &cn));
        }
        let pa = self.alg.parity(a).unwrap_or(0);
        let pb = self.alg.parity(b).unwrap_or(0);
        let s = parity_sign(pa * pb);
        for (j, e) in self.top_products(a, c) {
            let k = Scalar::from_ratio(1, (j + 1) as i64);
            out.add_scaled(&self.nprod(&self.apply_t_pow(j + 1, b), &e), &(&(&k * &cn) * &s));
        }
        out
    }

    // ----------------------------------------------------------------------------------
    // operators on Λ-polynomials

    /// `T · p` with `T` acting on coefficients.
    pub fn op_t(&self, p: &Bracket) -> Bracket {
        p.apply_even_operator(|e| self.apply_t(e))
    }

    /// `S^i · p`, commuting `S^i` to the right of the parameters.
    pub fn op_s(&self, i: u8, p: &Bracket) -> Bracket {
        p.apply_odd_operator(i, |e| self.apply_s(i, e))
    }

    /// Replaces `Γ` by `-Λ-∇` in a polynomial over `Γ`.
    pub fn subst_minus_nabla(&self, p: &Bracket) -> Bracket {
        let mut out = self.zero();
        for (m, e) in p.terms() {
            let mut acc = LambdaPoly::constant(self.alg.case, self.n(), Family::Lambda, e.clone());
            for k in mask_elems(m.mask).into_iter().rev() {
                let mut next = self.op_s(k, &acc);
                next.add_assign(&acc.left_mul_odd(k));
                acc = next.negated();
            }
            for _ in 0..m.pow {
                let mut next = self.op_t(&acc);
                next.add_assign(&acc.mul_even(1));
                acc = next.negated();
            }
            out.add_assign(&acc);
        }
        out
    }

    // ----------------------------------------------------------------------------------
    // brackets

    /// `[a_Λ b]`.
    pub fn bracket(&self, a: &FieldExpr, b: &FieldExpr) -> Bracket {
        let mut out = self.zero();
        for (u, s) in a.terms() {
            for (w, t) in b.terms() {
                out.add_scaled(&self.bracket_words(u, w), &(s * t));
            }
        }
        out
    }

    /// `[a_Λ b]` with parity checks on the inputs; returns the bracket and its parity.
    pub fn bracket_checked(&self, a: &FieldExpr, b: &FieldExpr) -> Result<(Bracket, usize)> {
        let pa = self.alg.parity(a)?;
        let pb = self.alg.parity(b)?;
        Ok((self.bracket(a, b), (pa + pb + self.n() as usize) % 2))
    }

    fn bracket_words(&self, u: &[Atom], w: &[Atom]) -> Rc<Bracket> {
        if u.is_empty() || w.is_empty() {
            return Rc::new(self.zero());
        }
        let key = (u.to_vec(), w.to_vec());
        if let Some(hit) = self.bracket_memo.borrow().get(&key) {
            return hit.clone();
        }
        let result = if w.len() >= 2 {
            self.wick(u, w[0], &w[1..])
        } else if u.len() >= 2 {
            let py = self.alg.atom_parity(w[0]);
            let pu = self.alg.word_parity(u);
            let back = self.bracket_words(w, u);
            let s = -parity_sign(pu * py + self.n() as usize);
            self.subst_minus_nabla(&back).scaled(&s)
        } else {
            self.atom_bracket(u[0], w[0])
        };
        let result = Rc::new(result);
        self.bracket_memo.borrow_mut().insert(key, result.clone());
        result
    }

    /// `[u_Λ :b c:]` by the non-commutative Wick formula.
    fn wick(&self, u: &[Atom], b: Atom, c: &[Atom]) -> Bracket {
        let n = self.n() as usize;
        let full = self.full();
        let pu = self.alg.word_parity(u);
        let pb = self.alg.atom_parity(b);
        let ce = FieldExpr::word(c.to_vec(), Scalar::one());
        let ub = self.bracket_words(u, &[b]);
        let uc = self.bracket_words(u, c);
        let mut out = self.zero();
        // :[u_Λ b] c:
        for (p, d) in ub.terms() {
            out.add_term(*p, self.nprod(d, &ce));
        }
        // (-1)^{(u+N)b} :b [u_Λ c]:
        let s2 = Sign::parity((pu + n) * pb);
        for (p, e) in uc.terms() {
            let s = s2 * Sign::parity(p.odd_degree() * pb);
            out.add_term(*p, self.nprod_atom_expr(b, e).scale(&sign(s)));
        }
        // ∫₀^Λ [[u_Λ b]_Γ c] dΓ
        let cn = sign(top_sign(self.n()));
        for (p, d) in ub.terms() {
            let inner = self.bracket(d, &ce);
            for (q, f) in inner.terms() {
                if q.mask != full {
                    continue;
                }
                let k = Scalar::from_ratio(1, (q.pow + 1) as i64);
                let m = LMono::new(p.pow + q.pow + 1, p.mask);
                out.add_term(m, f.scale(&(&k * &cn)));
            }
        }
        out
    }

    /// Bracket of two generators, using skew-symmetry for transposed pairs.
    fn gen_bracket(&self, g: u16, h: u16) -> Rc<Bracket> {
        if let Some(hit) = self.gen_memo.borrow().get(&(g, h)) {
            return hit.clone();
        }
        let result = if g <= h {
            self.alg.brackets.get(&(g, h)).cloned().unwrap_or_else(|| self.zero())
        } else {
            let back = self.gen_bracket(h, g);
            let pg = self.alg.gen(g).parity as usize;
            let ph = self.alg.gen(h).parity as usize;
            let s = -parity_sign(pg * ph + self.n() as usize);
            self.subst_minus_nabla(&back).scaled(&s)
        };
        let result = Rc::new(result);
        self.gen_memo.borrow_mut().insert((g, h), result.clone());
        result
    }

    /// `[x_Λ y]` for atoms, by sesquilinearity from the generator bracket.
    fn atom_bracket(&self, x: Atom, y: Atom) -> Bracket {
        if self.is_central(x) || self.is_central(y) {
            return self.zero();
        }
        let n = self.n() as usize;
        let mut p = (*self.gen_bracket(x.gen, y.gen)).clone();
        // [S^i a_Λ b] = -(-1)^N χ^i [a_Λ b]
        let left = -parity_sign(n);
        for i in mask_elems(x.s).into_iter().rev() {
            p = p.left_mul_odd(i).scaled(&left);
        }
        // [T a_Λ b] = -λ [a_Λ b]
        for _ in 0..x.t {
            p = p.mul_even(1).negated();
        }
        // [a_Λ S^j b] = (-1)^{a+N} (S^j + χ^j) [a_Λ b]
        let right = parity_sign(self.alg.atom_parity(x) + n);
        for j in mask_elems(y.s).into_iter().rev() {
            let mut next = self.op_s(j, &p);
            next.add_assign(&p.left_mul_odd(j));
            p = next.scaled(&right);
        }
        // [a_Λ T b] = (T + λ) [a_Λ b]
        for _ in 0..y.t {
            let mut next = self.op_t(&p);
            next.add_assign(&p.mul_even(1));
            p = next;
        }
        p
    }

    /// `a_{(j|J)} b`, read off from `[a_Λ b] = Σ (-1)^{JN} Λ^{(j|J)} a_{(j|J)} b` with
    /// `Λ^{(j|J)} = (-1)^{J(J+1)/2} λ^j χ^J / j!`.
    pub fn product(&self, a: &FieldExpr, b: &FieldExpr, j: u32, mask: u16) -> FieldExpr {
        let br = self.bracket(a, b);
        product_from_bracket(&br, self.n(), j, mask)
    }

    // ----------------------------------------------------------------------------------
    // identities

    /// `[b_Λ a] + (-1)^{ab+N} [a_{-Λ-∇} b]`; zero when skew-symmetry holds.
    pub fn skew_residual(&self, a: &FieldExpr, b: &FieldExpr) -> Result<Bracket> {
        let pa = self.alg.parity(a)?;
        let pb = self.alg.parity(b)?;
        let ba = self.bracket(b, a);
        let ab = self.bracket(a, b);
        let s = parity_sign(pa * pb + self.n() as usize);
        let mut out = ba;
        out.add_scaled(&self.subst_minus_nabla(&ab), &s);
        Ok(out)
    }

    /// `:ab: - (-1)^{ab}:ba: - ∫_{-∇}^0 [a_Λ b] dΛ`.
    pub fn quasi_comm_residual(&self, a: &FieldExpr, b: &FieldExpr) -> Result<FieldExpr> {
        let pa = self.alg.parity(a)?;
        let pb = self.alg.parity(b)?;
        let mut out = self.nprod(a, b);
        out.add_scaled(&self.nprod(b, a), &-parity_sign(pa * pb));
        out.add_scaled(&self.qc(a, b), &Scalar::from_int(-1));
        Ok(out)
    }

    /// `::ab:c: - :a:bc:: - QA(a,b,c)`.
    pub fn quasi_assoc_residual(
        &self,
        a: &FieldExpr,
        b: &FieldExpr,
        c: &FieldExpr,
    ) -> Result<FieldExpr> {
        self.alg.parity(a)?;
        self.alg.parity(b)?;
        self.alg.parity(c)?;
        let mut out = self.nprod(&self.nprod(a, b), c);
        out.add_scaled(&self.nprod(a, &self.nprod(b, c)), &Scalar::from_int(-1));
        out.add_scaled(&self.qa(a, b, c), &Scalar::from_int(-1));
        Ok(out)
    }

    /// `[a_Λ[b_Γ c]] - (-1)^{aN+N}[[a_Λ b]_{Λ+Γ} c] - (-1)^{(a+N)(b+N)}[b_Γ[a_Λ c]]`.
    pub fn jacobi_residual(
        &self,
        a: &FieldExpr,
        b: &FieldExpr,
        c: &FieldExpr,
    ) -> Result<JacobiResidual> {
        let n = self.n() as usize;
        let case = self.alg.case;
        let conv = self.convention;
        let pa = self.alg.parity(a)?;
        let pb = self.alg.parity(b)?;
        self.alg.parity(c)?;
        let mut out: JacobiResidual = MixedPoly::zero(case, self.n(), conv);

        // [a_Λ [b_Γ c]]: the Γ-monomial q is moved to the left of the bracket with a
        for (q, e) in self.bracket(b, c).terms() {
            let s1 = parity_sign(q.odd_degree() * (pa + n));
            let qm = MixedMono { a: 0, b: q.pow, chi: 0, eta: q.mask };
            for (p, f) in self.bracket(a, e).terms() {
                let pm = MixedMono { a: p.pow, b: 0, chi: p.mask, eta: 0 };
                for (m, k) in mixed_mono_mul(case, self.n(), conv, qm, pm) {
                    out.add_term(m, f.scale(&(&k * &s1)));
                }
            }
        }

        // [[a_Λ b]_{Λ+Γ} c]
        let s_mid = parity_sign(pa * n + n);
        for (p, d) in self.bracket(a, b).terms() {
            let s = &s_mid * &parity_sign(p.odd_degree() * n);
            let inner = self.bracket(d, c).renamed(Family::Psi);
            let summed = substitute_sum(&inner, conv);
            let pm = MixedMono { a: p.pow, b: 0, chi: p.mask, eta: 0 };
            let prod = summed.left_mul_mono(pm, &s);
            for (m, f) in prod.terms() {
                out.add_term(*m, f.scale(&Scalar::from_int(-1)));
            }
        }

        // [b_Γ [a_Λ c]]
        let s_third = parity_sign((pa + n) * (pb + n));
        for (p, e) in self.bracket(a, c).terms() {
            let s = &s_third * &parity_sign(p.odd_degree() * (pb + n));
            let pm = MixedMono { a: p.pow, b: 0, chi: p.mask, eta: 0 };
            for (q, f) in self.bracket(b, e).terms() {
                let qm = MixedMono { a: 0, b: q.pow, chi: 0, eta: q.mask };
                for (m, k) in mixed_mono_mul(case, self.n(), conv, pm, qm) {
                    out.add_term(m, f.scale(&(&(&k * &s) * &Scalar::from_int(-1))));
                }
            }
        }
        Ok(out)
    }

    /// Central charge of a super Virasoro vector (K case) or of the conformal pair
    /// `(ν, τ¹..τᴺ)` (W case, `N ≤ 2`), after applying the quotient map to central
    /// generators.
    pub fn central_charge(&self, fields: &[FieldExpr]) -> Result<Scalar> {
        match self.alg.case {
            Case::K => {
                let g = fields
                    .first()
                    .ok_or_else(|| Error::invalid("central charge needs a field"))?;
                self.central_charge_k(g)
            }
            Case::W => self.central_charge_w(fields),
        }
    }

    fn central_charge_k(&self, g: &FieldExpr) -> Result<Scalar> {
        let n = self.n();
        if n > 3 {
            return Err(Error::invalid("central charge is defined here for N ≤ 3"));
        }
        let alg = self.alg;
        let gg = alg.quotient_bracket(&self.bracket(g, g));
        // (2T + (4-N)λ + Σ χ^i S^i) G
        let gp = LambdaPoly::constant(alg.case, n, Family::Lambda, g.clone());
        let mut expected = self.op_t(&gp).scaled(&Scalar::from_int(2));
        expected.add_scaled(&gp.mul_even(1), &Scalar::from_int(4 - n as i64));
        for i in 1..=n {
            expected.add_assign(&self.op_s(i, &gp).left_mul_odd(i));
        }
        let mut residual = gg;
        residual.add_scaled(&expected, &Scalar::from_int(-1));
        let top = LMono::new((3 - n) as u32, self.full());
        let central = residual.coeff(top).cloned().unwrap_or_default();
        if !central.is_scalar() {
            return Err(Error::NotSuperVirasoro(alg.render_bracket(&residual)));
        }
        let mut rest = residual.clone();
        rest.add_term(top, central.scale(&Scalar::from_int(-1)));
        if !rest.is_zero() {
            return Err(Error::NotSuperVirasoro(alg.render_bracket(&residual)));
        }
        Ok(central.vacuum_coeff().scale_int(3))
    }

    fn central_charge_w(&self, fields: &[FieldExpr]) -> Result<Scalar> {
        let n = self.n();
        let alg = self.alg;
        if fields.len() != n as usize + 1 || n > 2 {
            return Err(Error::invalid(
                "W case central charge needs (ν, τ¹..τᴺ) with N ≤ 2",
            ));
        }
        if n == 0 {
            let l = fields.first().ok_or_else(|| Error::invalid("central charge needs a field"))?;
            // [L_λ L] = (T + 2λ)L + (c/12) λ³
            let br = alg.quotient_bracket(&self.bracket(l, l));
            let lp = LambdaPoly::constant(alg.case, 0, Family::Lambda, l.clone());
            let mut e = self.op_t(&lp);
            e.add_scaled(&lp.mul_even(1), &Scalar::from_int(2));
            return self.extract_central(br, e, LMono::new(3, 0), 12);
        }
        let tau = &fields[1..];
        let (br, expected, top, factor) = if n == 1 {
            // [τ_Λ τ] = Sτ + (c/3) λχ
            let br = alg.quotient_bracket(&self.bracket(&tau[0], &tau[0]));
            let tp = LambdaPoly::constant(alg.case, n, Family::Lambda, tau[0].clone());
            (br, self.op_s(1, &tp), LMono::new(1, self.full()), 3)
        } else {
            // [τ¹_Λ τ²] = (S¹ + χ¹)τ² - χ²τ¹ + (c/6) λ
            let br = alg.quotient_bracket(&self.bracket(&tau[0], &tau[1]));
            let t2 = LambdaPoly::constant(alg.case, n, Family::Lambda, tau[1].clone());
            let t1 = LambdaPoly::constant(alg.case, n, Family::Lambda, tau[0].clone());
            let mut e = self.op_s(1, &t2);
            e.add_assign(&t2.left_mul_odd(1));
            e.add_scaled(&t1.left_mul_odd(2), &Scalar::from_int(-1));
            (br, e, LMono::new(1, 0), 6)
        };
        self.extract_central(br, expected, top, factor)
    }

    fn extract_central(&self, br: Bracket, expected: Bracket, top: LMono, factor: i64) -> Result<Scalar> {
        let alg = self.alg;
        let mut residual = br;
        residual.add_scaled(&expected, &Scalar::from_int(-1));
        let central = residual.coeff(top).cloned().unwrap_or_default();
        let mut rest = residual.clone();
        rest.add_term(top, central.scale(&Scalar::from_int(-1)));
        if !central.is_scalar() || !rest.is_zero() {
            return Err(Error::NotSuperVirasoro(alg.render_bracket(&residual)));
        }
        Ok(central.vacuum_coeff().scale_int(factor))
    }
}

/// `a_{(j|J)}b` from a computed bracket.
pub fn product_from_bracket(br: &Bracket, n: u8, j: u32, mask: u16) -> FieldExpr {
    let k = mask.count_ones() as usize;
    let s = Sign::parity(k * n as usize) * Sign::parity(k * (k + 1) / 2);
    match br.coeff(LMono::new(j, mask)) {
        Some(e) => e.scale(&Scalar::from_rational(factorial(j) * BigRational::from_integer(s.value().into()))),
        None => FieldExpr::zero(),
    }
}

/// One offending monomial of a weight check.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightDefect {
    pub pair: (String, String),
    pub monomial: String,
    pub expected: BigRational,
    pub found: Option<BigRational>,
}

/// Checks that every stored structure constant is homogeneous of weight
/// `Δa + Δb - 1 (+ N/2 in the K case)`.
pub fn weight_homogeneity_check(alg: &Algebra) -> Result<Vec<WeightDefect>> {
    let mut defects = Vec::new();
    let half_n = if alg.case == Case::K {
        BigRational::new((alg.n as i64).into(), 2.into())
    } else {
        BigRational::zero()
    };
    for (&(i, j), br) in &alg.brackets {
        let (wi, wj) = match (&alg.gen(i).weight, &alg.gen(j).weight) {
            (Some(a), Some(b)) => (a.clone(), b.clone()),
            _ => return Err(Error::invalid("all generators need declared weights")),
        };
        let expected = wi + wj - BigRational::one() + half_n.clone();
        for (m, e) in br.terms() {
            for (w, s) in e.terms() {
                let found = alg.word_weight(w).map(|x| x + alg.param_weight(*m));
                if found.as_ref() != Some(&expected) {
                    let single = FieldExpr::word(w.clone(), s.clone());
                    let poly = LambdaPoly::monomial(alg.case, alg.n, Family::Lambda, *m, single);
                    defects.push(WeightDefect {
                        pair: (alg.gen(i).name.clone(), alg.gen(j).name.clone()),
                        monomial: alg.render_bracket(&poly),
                        expected: expected.clone(),
                        found,
                    });
                }
            }
        }
    }
    Ok(defects)
}

/// Checks that every stored entry has parity `p(a) + p(b) + N`.
pub fn parity_check(alg: &Algebra) -> Vec<String> {
    let mut bad = Vec::new();
    for (&(i, j), br) in &alg.brackets {
        let want = (alg.gen(i).parity as usize + alg.gen(j).parity as usize + alg.n as usize) % 2;
        for (m, e) in br.terms() {
            for (w, _) in e.terms() {
                if (m.parity() + alg.word_parity(w)) % 2 != want {
                    bad.push(format!("[{}_Λ {}]", alg.gen(i).name, alg.gen(j).name));
                }
            }
        }
    }
    bad.dedup();
    bad
}
