//! Truncated formal super-Laurent series.
//!
//! A [`SuperLaurent`] is a finite sum of monomials `c · Θ · x₀^{p₀} x₁^{p₁} …` in one or
//! more super coordinates `X_v = (x_v, θ_v^1..θ_v^N)`, with every even power inside a
//! common window `[lo, hi]`. The Grassmann part `Θ` is an ordered product of odd
//! coordinates, sorted by `(v, i)`. Coefficients outside the window are dropped, so a
//! result is exact only where every contribution stayed inside the window; the checks in
//! this module compare on interior sub-windows only.
//!
//! With two variables `Z = X₀` and `W = X₁` this implements the expansions `i_{z,w}`,
//! `i_{w,z}`, the super δ-function, its derivatives, residues and the Fourier transform,
//! independently of the Λ-bracket engine.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::params::{Case, LMono, LambdaPoly};
use crate::scalar::{binomial, factorial, Scalar};
use crate::superindex::{mask_elems, sigma_mask, Sign};

/// Expansion domain: `ZW` is `|z| > |w|`, `WZ` is `|w| > |z|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ZW,
    WZ,
}

/// Index of the `Z` coordinates in a two-variable series.
pub const Z: usize = 0;
/// Index of the `W` coordinates in a two-variable series.
pub const W: usize = 1;

type Key = (Vec<i64>, u32);

/// A truncated formal super-Laurent series in `vars` super coordinates of odd dimension `n`.
#[derive(Clone, PartialEq)]
pub struct SuperLaurent {
    n: u8,
    vars: usize,
    lo: i64,
    hi: i64,
    terms: BTreeMap<Key, Scalar>,
}

fn parity(k: u32) -> Sign {
    Sign::parity(k as usize)
}

/// Number of pairs `(x, y)` with `x ∈ a`, `y ∈ b`, `x > y`.
fn inversions32(a: u32, b: u32) -> u32 {
    let mut count = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j >= 31 { 0 } else { a & !((1u32 << (j + 1)) - 1) };
        count += above.count_ones();
    }
    count
}

impl SuperLaurent {
    pub fn zero(n: u8, vars: usize, window: (i64, i64)) -> SuperLaurent {
        assert!(n as usize * vars <= 30, "too many odd coordinates");
        SuperLaurent { n, vars, lo: window.0, hi: window.1, terms: BTreeMap::new() }
    }

    /// The constant `c`.
    pub fn constant(n: u8, vars: usize, window: (i64, i64), c: Scalar) -> SuperLaurent {
        let mut s = SuperLaurent::zero(n, vars, window);
        s.add_term(vec![0; vars], 0, c);
        s
    }

    /// `c · x₀^{p₀}… · Θ` where `odd` lists `(variable, index)` pairs in the written order.
    pub fn monomial(
        n: u8,
        vars: usize,
        window: (i64, i64),
        pows: &[i64],
        odd: &[(usize, u8)],
        c: Scalar,
    ) -> SuperLaurent {
        let mut s = SuperLaurent::constant(n, vars, window, c);
        for &(v, i) in odd.iter().rev() {
            s = s.mul_odd(v, i);
        }
        let mut out = SuperLaurent::zero(n, vars, window);
        for ((p, m), c) in s.terms {
            let p: Vec<i64> = p.iter().zip(pows).map(|(a, b)| a + b).collect();
            out.add_term(p, m, c);
        }
        out
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    /// Bit of the odd coordinate `θ_v^i`.
    pub fn odd_bit(&self, v: usize, i: u8) -> u32 {
        debug_assert!(i >= 1 && i <= self.n);
        1u32 << (v * self.n as usize + (i as usize - 1))
    }

    /// Grassmann mask of `θ_v^I` for a superindex mask `I` (bits `1..=N`).
    pub fn odd_mask(&self, v: usize, mask: u16) -> u32 {
        mask_elems(mask).into_iter().map(|i| self.odd_bit(v, i)).fold(0, |a, b| a | b)
    }

    fn in_window(&self, pows: &[i64]) -> bool {
        pows.iter().all(|p| *p >= self.lo && *p <= self.hi)
    }

    pub fn add_term(&mut self, pows: Vec<i64>, mask: u32, c: Scalar) {
        if c.is_zero() || !self.in_window(&pows) {
            return;
        }
        let key = (pows, mask);
        let sum = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Vec<i64>, u32), &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, pows: &[i64], mask: u32) -> Scalar {
        self.terms.get(&(pows.to_vec(), mask)).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &SuperLaurent) -> SuperLaurent {
        let mut out = self.clone();
        for ((p, m), c) in &other.terms {
            out.add_term(p.clone(), *m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SuperLaurent) -> SuperLaurent {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, k: &Scalar) -> SuperLaurent {
        let mut out = SuperLaurent::zero(self.n, self.vars, (self.lo, self.hi));
        for ((p, m), c) in &self.terms {
            out.add_term(p.clone(), *m, c * k);
        }
        out
    }

    fn map_terms(&self, mut f: impl FnMut(&[i64], u32, &Scalar, &mut SuperLaurent)) -> SuperLaurent {
        let mut out = SuperLaurent::zero(self.n, self.vars, (self.lo, self.hi));
        for ((p, m), c) in &self.terms {
            f(p, *m, c, &mut out);
        }
        out
    }

    /// Product in the supercommutative algebra of series.
    pub fn mul(&self, other: &SuperLaurent) -> SuperLaurent {
        assert_eq!((self.n, self.vars), (other.n, other.vars), "shape mismatch");
        let mut out = SuperLaurent::zero(self.n, self.vars, (self.lo, self.hi));
        for ((p1, m1), c1) in &self.terms {
            for ((p2, m2), c2) in &other.terms {
                if m1 & m2 != 0 {
                    continue;
                }
                let sign = parity(inversions32(*m1, *m2));
                let p: Vec<i64> = p1.iter().zip(p2).map(|(a, b)| a + b).collect();
                let c = c1 * c2;
                out.add_term(p, m1 | m2, if sign == Sign::MINUS { -c } else { c });
            }
        }
        out
    }

    /// `∂_{x_v}`.
    pub fn d_even(&self, v: usize) -> SuperLaurent {
        self.map_terms(|p, m, c, out| {
            if p[v] != 0 {
                let mut q = p.to_vec();
                q[v] -= 1;
                out.add_term(q, m, c.scale_int(p[v]));
            }
        })
    }

    /// Multiplication by `x_v^k`.
    pub fn shift(&self, v: usize, k: i64) -> SuperLaurent {
        self.map_terms(|p, m, c, out| {
            let mut q = p.to_vec();
            q[v] += k;
            out.add_term(q, m, c.clone());
        })
    }

    /// Left derivative `∂_{θ_v^i}`.
    pub fn d_odd(&self, v: usize, i: u8) -> SuperLaurent {
        let b = self.odd_bit(v, i);
        self.map_terms(|p, m, c, out| {
            if m & b != 0 {
                let sign = parity((m & (b - 1)).count_ones());
                out.add_term(p.to_vec(), m & !b, if sign == Sign::MINUS { -c.clone() } else { c.clone() });
            }
        })
    }

    /// Left multiplication by `θ_v^i`.
    pub fn mul_odd(&self, v: usize, i: u8) -> SuperLaurent {
        let b = self.odd_bit(v, i);
        self.map_terms(|p, m, c, out| {
            if m & b == 0 {
                let sign = parity((m & (b - 1)).count_ones());
                out.add_term(p.to_vec(), m | b, if sign == Sign::MINUS { -c.clone() } else { c.clone() });
            }
        })
    }

    /// `D^i_v`: `∂_{θ^i}` in the W case, `∂_{θ^i} + θ^i ∂_x` in the K case.
    pub fn super_d(&self, case: Case, v: usize, i: u8) -> SuperLaurent {
        let d = self.d_odd(v, i);
        match case {
            Case::W => d,
            Case::K => d.add(&self.d_even(v).mul_odd(v, i)),
        }
    }

    /// Non-divided `D_v^{j|J} = ∂^j D^{j₁}…D^{j_k}`.
    pub fn super_d_pow(&self, case: Case, v: usize, j: u32, mask: u16) -> SuperLaurent {
        let mut s = self.clone();
        for i in mask_elems(mask).into_iter().rev() {
            s = s.super_d(case, v, i);
        }
        for _ in 0..j {
            s = s.d_even(v);
        }
        s
    }

    /// Exchanges two coordinate sets.
    pub fn swap_vars(&self, a: usize, b: usize) -> SuperLaurent {
        let n = self.n as usize;
        self.map_terms(|p, m, c, out| {
            let mut q = p.to_vec();
            q.swap(a, b);
            // rebuild the Grassmann monomial in the new order
            let mut letters = Vec::new();
            for bitpos in 0..(self.vars * n) {
                if m & (1 << bitpos) != 0 {
                    let v = bitpos / n;
                    let v2 = if v == a { b } else if v == b { a } else { v };
                    letters.push((v2 * n + bitpos % n) as u32);
                }
            }
            let mut inv = 0;
            for x in 0..letters.len() {
                for y in x + 1..letters.len() {
                    if letters[x] > letters[y] {
                        inv += 1;
                    }
                }
            }
            let nm = letters.iter().fold(0u32, |acc, l| acc | (1 << l));
            out.add_term(q, nm, if inv % 2 == 1 { -c.clone() } else { c.clone() });
        })
    }

    /// Terms whose powers all lie in `[lo, hi]`.
    pub fn restrict(&self, lo: i64, hi: i64) -> SuperLaurent {
        self.map_terms(|p, m, c, out| {
            if p.iter().all(|x| *x >= lo && *x <= hi) {
                out.add_term(p.to_vec(), m, c.clone());
            }
        })
    }

    /// Equality of all coefficients with powers in `[lo, hi]`.
    pub fn eq_within(&self, other: &SuperLaurent, lo: i64, hi: i64) -> bool {
        self.sub(other).restrict(lo, hi).is_zero()
    }

    /// The power-`k` of a polynomial series (exact as long as `self` is a polynomial).
    pub fn pow(&self, k: u32) -> SuperLaurent {
        let mut out = SuperLaurent::constant(self.n, self.vars, (self.lo, self.hi), Scalar::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// `x_v - x_u` (polynomial).
    pub fn difference(n: u8, vars: usize, window: (i64, i64), v: usize, u: usize) -> SuperLaurent {
        let mut pv = vec![0; vars];
        pv[v] = 1;
        let mut pu = vec![0; vars];
        pu[u] = 1;
        let mut s = SuperLaurent::zero(n, vars, window);
        s.add_term(pv, 0, Scalar::one());
        s.add_term(pu, 0, Scalar::from_int(-1));
        s
    }
}

impl std::fmt::Debug for SuperLaurent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((p, m), c)| format!("({c})*x^{p:?}*θ[{m:#b}]"))
            .collect();
        write!(f, "{}", if parts.is_empty() { "0".into() } else { parts.join(" + ") })
    }
}

// --------------------------------------------------------------------------------------
// two-variable constructions

/// `(θ - ζ)^J = Π_{i ∈ J}(θ^i - ζ^i)` in ascending order.
fn theta_minus_zeta(n: u8, window: (i64, i64), mask: u16) -> SuperLaurent {
    let mut s = SuperLaurent::constant(n, 2, window, Scalar::one());
    for i in mask_elems(mask) {
        let one = SuperLaurent::constant(n, 2, window, Scalar::one());
        let f = one.mul_odd(Z, i).sub(&one.mul_odd(W, i));
        s = s.mul(&f);
    }
    s
}

/// `Σ_i θ^i ζ^i`.
fn theta_zeta(n: u8, window: (i64, i64)) -> SuperLaurent {
    let mut s = SuperLaurent::zero(n, 2, window);
    let one = SuperLaurent::constant(n, 2, window, Scalar::one());
    for i in 1..=n {
        s = s.add(&one.mul_odd(W, i).mul_odd(Z, i));
    }
    s
}

/// Expansion of `(z - w)^e` in the given domain, truncated to the window.
fn expand_power(n: u8, window: (i64, i64), e: i64, dir: Direction) -> SuperLaurent {
    let (lo, hi) = window;
    let mut s = SuperLaurent::zero(n, 2, window);
    if e >= 0 {
        for k in 0..=e {
            let c = Scalar::from_rational(binomial(e, k)).scale_int(if k % 2 == 0 { 1 } else { -1 });
            s.add_term(vec![e - k, k], 0, c);
        }
        return s;
    }
    let span = (hi - lo + 1).max(0) + e.abs();
    for k in 0..=span {
        let c = Scalar::from_rational(binomial(e, k));
        match dir {
            // z^{e-k} (-w)^k
            Direction::ZW => {
                let c = c.scale_int(if k % 2 == 0 { 1 } else { -1 });
                s.add_term(vec![e - k, k], 0, c);
            }
            // (-w)^{e-k} z^k
            Direction::WZ => {
                let c = c.scale_int(if (e - k).rem_euclid(2) == 0 { 1 } else { -1 });
                s.add_term(vec![k, e - k], 0, c);
            }
        }
    }
    s
}

/// `(Z - W)^{j|J}` expanded in the given domain: `(z - w)^j (θ - ζ)^J` in the W case and
/// `(z - w - Σθ^iζ^i)^j (θ - ζ)^J` in the K case.
pub fn expand_binomial(
    case: Case,
    n: u8,
    j: i64,
    mask: u16,
    dir: Direction,
    window: (i64, i64),
) -> SuperLaurent {
    let grass = theta_minus_zeta(n, window, mask);
    let even = match case {
        Case::W => expand_power(n, window, j, dir),
        Case::K => {
            let s = theta_zeta(n, window);
            let mut acc = SuperLaurent::zero(n, 2, window);
            for r in 0..=(n as i64) {
                let c = Scalar::from_rational(binomial(j, r)).scale_int(if r % 2 == 0 { 1 } else { -1 });
                if c.is_zero() {
                    continue;
                }
                acc = acc.add(&expand_power(n, window, j - r, dir).mul(&s.pow(r as u32)).scale(&c));
            }
            acc
        }
    };
    even.mul(&grass)
}

/// `δ(Z,W) = (i_{z,w} - i_{w,z}) (θ - ζ)^N / (z - w)`.
pub fn delta(n: u8, window: (i64, i64)) -> SuperLaurent {
    let full = crate::superindex::full_mask(n);
    expand_binomial(Case::W, n, -1, full, Direction::ZW, window)
        .sub(&expand_binomial(Case::W, n, -1, full, Direction::WZ, window))
}

/// `(i_{z,w} - i_{w,z}) (Z - W)^{j|J}`.
pub fn binomial_delta(case: Case, n: u8, j: i64, mask: u16, window: (i64, i64)) -> SuperLaurent {
    expand_binomial(case, n, j, mask, Direction::ZW, window)
        .sub(&expand_binomial(case, n, j, mask, Direction::WZ, window))
}

fn divided_factor(j: u32, mask: u16) -> Scalar {
    let k = mask.count_ones() as usize;
    let s = Sign::parity(k * (k + 1) / 2);
    Scalar::from_rational(BigRational::one() / factorial(j)).scale_int(s.value() as i64)
}

/// `D_W^{(j|J)} s = (-1)^{J(J+1)/2}/j! · ∂_w^j D_W^{j₁} … D_W^{j_k} s` (W case: `∂_W^{(j|J)}`).
pub fn d_deriv(case: Case, j: u32, mask: u16, s: &SuperLaurent) -> SuperLaurent {
    s.super_d_pow(case, W, j, mask).scale(&divided_factor(j, mask))
}

/// `res_Z s`: the coefficient of `θ^1…θ^N z^{-1}`, as a series in `W`.
pub fn residue_z(s: &SuperLaurent) -> SuperLaurent {
    let n = s.n;
    let full: u32 = (0..n).fold(0, |a, i| a | (1 << i));
    let mut out = SuperLaurent::zero(n, s.vars, (s.lo, s.hi));
    for ((p, m), c) in &s.terms {
        if p[Z] == -1 && m & full == full {
            let mut q = p.clone();
            q[Z] = 0;
            out.add_term(q, m & !full, c.clone());
        }
    }
    out
}

/// Result of [`fourier_zw`]: the coefficient series of each plain monomial `λ^jχ^J`.
#[derive(Clone, Debug)]
pub struct Fourier {
    pub case: Case,
    pub n: u8,
    /// Smallest `k` with `(z - w)^k s = 0` on the checked interior.
    pub locality: u32,
    pub coeffs: BTreeMap<LMono, SuperLaurent>,
}

impl Fourier {
    /// The transform as a polynomial with scalar coefficients, when every coefficient
    /// series is a constant.
    pub fn constant_poly(&self) -> Option<LambdaPoly<Scalar>> {
        let mut p = LambdaPoly::zero(self.case, self.n, crate::params::Family::Lambda);
        for (m, s) in &self.coeffs {
            for ((pows, mask), c) in s.terms() {
                if pows.iter().any(|x| *x != 0) || *mask != 0 {
                    return None;
                }
                p.add_term(*m, c.clone());
            }
        }
        Some(p)
    }
}

/// Formal Fourier transform `res_Z exp((Z - W)Λ) s = Σ (-1)^{JN} Λ^{(j|J)} c_{j|J}(W)` with
/// `c_{j|J} = res_Z (Z - W)^{j|J} s`. Fails with [`Error::NotLocal`] when no power
/// `(z - w)^k`, `k ≤ cap`, annihilates `s` on the window interior.
pub fn fourier_zw(case: Case, s: &SuperLaurent, cap: u32) -> Result<Fourier> {
    fourier_zw_with_margin(case, s, cap, 2 + s.n as i64)
}

/// [`fourier_zw`] trusting only coefficients at distance at least `margin` from the window
/// edges; the input may be inexact inside that band.
pub fn fourier_zw_with_margin(case: Case, s: &SuperLaurent, cap: u32, margin: i64) -> Result<Fourier> {
    let (lo, hi) = s.window();
    let n = s.n;
    let zw = SuperLaurent::difference(n, 2, (lo, hi), Z, W);
    let mut locality = None;
    let mut prod = s.clone();
    for k in 0..=cap {
        if prod.restrict(lo + margin + k as i64, hi - margin).is_zero() {
            locality = Some(k);
            break;
        }
        prod = prod.mul(&zw);
    }
    let locality = locality.ok_or(Error::NotLocal(cap as i64))?;
    let mut coeffs = BTreeMap::new();
    let top = locality + n as u32;
    for j in 0..top {
        for mask in 0..(1u16 << n) {
            let mask = mask << 1;
            let bin = expand_binomial(case, n, j as i64, mask, Direction::ZW, (lo, hi));
            let c = residue_z(&bin.mul(s)).restrict(lo + margin + j as i64, hi - margin);
            if c.is_zero() {
                continue;
            }
            let k = mask.count_ones() as usize;
            let sign = Sign::parity(k * n as usize) * Sign::parity(k * (k + 1) / 2);
            let f = Scalar::from_rational(BigRational::one() / factorial(j)).scale_int(sign.value() as i64);
            coeffs.insert(LMono::new(j, mask), c.scale(&f));
        }
    }
    Ok(Fourier { case, n, locality, coeffs })
}

// --------------------------------------------------------------------------------------
// identity checks

/// Outcome of one identity check.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: impl Into<String>, failures: Vec<String>, count: usize) -> CheckReport {
        let passed = failures.is_empty();
        let detail = if passed {
            format!("{count} instances")
        } else {
            format!("{} of {count} failed; first: {}", failures.len(), failures[0])
        };
        CheckReport { name: name.into(), passed, detail }
    }
}

fn masks(n: u8) -> impl Iterator<Item = u16> {
    (0..(1u16 << n)).map(|m| m << 1)
}

fn sigma(a: u16, b: u16) -> Scalar {
    Scalar::from_int(sigma_mask(a, b).value() as i64)
}

/// `(Z-W)^{m|J} D_W^{k|I} δ = 0` for `m > k` or `J ⊋ I`.
pub fn check_delta_annihilation(case: Case, n: u8, window: (i64, i64)) -> CheckReport {
    let d = delta(n, window);
    let (lo, hi) = window;
    let mut fails = Vec::new();
    let mut count = 0;
    for k in 0..=2u32 {
        for imask in masks(n) {
            let dd = d.super_d_pow(case, W, k, imask);
            for m in 0..=3i64 {
                for jmask in masks(n) {
                    let strict_super = jmask & imask == imask && jmask != imask;
                    if !(m > k as i64 || strict_super) {
                        continue;
                    }
                    count += 1;
                    let b = expand_binomial(case, n, m, jmask, Direction::ZW, window);
                    let margin = (m + k as i64 + n as i64) + 1;
                    if !b.mul(&dd).restrict(lo + margin, hi - margin).is_zero() {
                        fails.push(format!("m={m} J={jmask:#b} k={k} I={imask:#b}"));
                    }
                }
            }
        }
    }
    CheckReport::new("delta annihilation", fails, count)
}

/// `(Z-W)^{j|J} D_W^{(k|I)} δ = σ(I∖J, J) D_W^{(k-j|I∖J)} δ` for `k ≥ j`, `J ⊂ I`.
pub fn check_delta_lowering(case: Case, n: u8, window: (i64, i64)) -> CheckReport {
    let d = delta(n, window);
    let (lo, hi) = window;
    let mut fails = Vec::new();
    let mut count = 0;
    for k in 0..=3u32 {
        for imask in masks(n) {
            let lhs_d = d_deriv(case, k, imask, &d);
            for j in 0..=k {
                for jmask in masks(n) {
                    if jmask & imask != jmask {
                        continue;
                    }
                    count += 1;
                    let rest = imask & !jmask;
                    let b = expand_binomial(case, n, j as i64, jmask, Direction::ZW, window);
                    let lhs = b.mul(&lhs_d);
                    let rhs = d_deriv(case, k - j, rest, &d).scale(&sigma(rest, jmask));
                    let margin = (k + n as u32) as i64 + 1;
                    if !lhs.eq_within(&rhs, lo + margin, hi - margin) {
                        fails.push(format!("j={j} J={jmask:#b} k={k} I={imask:#b}"));
                    }
                }
            }
        }
    }
    CheckReport::new("delta lowering", fails, count)
}

/// `δ(Z,W) = (-1)^N δ(W,Z)`.
pub fn check_delta_symmetry(n: u8, window: (i64, i64)) -> CheckReport {
    let d = delta(n, window);
    let swapped = d.swap_vars(Z, W).scale(&Scalar::from_int(if n.is_multiple_of(2) { 1 } else { -1 }));
    let fails = if d.eq_within(&swapped, window.0, window.1) {
        vec![]
    } else {
        vec!["δ(Z,W) vs (-1)^N δ(W,Z)".into()]
    };
    CheckReport::new("delta symmetry", fails, 1)
}

/// `D_Z^{j|J} δ(Z,W) = (-1)^{j+N+J} D_W^{j|J} δ(W,Z)`.
pub fn check_delta_derivative_swap(case: Case, n: u8, window: (i64, i64)) -> CheckReport {
    let d = delta(n, window);
    let dwz = d.swap_vars(Z, W);
    let (lo, hi) = window;
    let mut fails = Vec::new();
    let mut count = 0;
    for j in 0..=3u32 {
        for mask in masks(n) {
            count += 1;
            let lhs = d.super_d_pow(case, Z, j, mask);
            let sgn = if (j as usize + n as usize + mask.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 };
            let rhs = dwz.super_d_pow(case, W, j, mask).scale(&Scalar::from_int(sgn));
            let margin = (j + n as u32) as i64 + 1;
            if !lhs.eq_within(&rhs, lo + margin, hi - margin) {
                fails.push(format!("j={j} J={mask:#b}"));
            }
        }
    }
    CheckReport::new("delta derivative swap", fails, count)
}

fn monomial_in(n: u8, window: (i64, i64), v: usize, p: i64, mask: u16) -> SuperLaurent {
    let odd: Vec<(usize, u8)> = mask_elems(mask).into_iter().map(|i| (v, i)).collect();
    let mut pows = vec![0; 2];
    pows[v] = p;
    SuperLaurent::monomial(n, 2, window, &pows, &odd, Scalar::one())
}

/// Substitution and residue: `δ(Z,W) a(Z) = δ(Z,W) a(W)` and `res_Z δ(Z,W) a(Z) = a(W)` for
/// Laurent monomials `a`.
pub fn check_delta_substitution(n: u8, window: (i64, i64)) -> Vec<CheckReport> {
    let d = delta(n, window);
    let (lo, hi) = window;
    let (mut f5, mut f6, mut count) = (Vec::new(), Vec::new(), 0);
    for p in -3..=3i64 {
        for mask in masks(n) {
            count += 1;
            let az = monomial_in(n, window, Z, p, mask);
            let aw = monomial_in(n, window, W, p, mask);
            let m = p.abs() + 1;
            if !d.mul(&az).eq_within(&d.mul(&aw), lo + m, hi - m) {
                f5.push(format!("a = z^{p} θ^{mask:#b}"));
            }
            if !residue_z(&d.mul(&az)).eq_within(&aw, lo + m, hi - m) {
                f6.push(format!("a = z^{p} θ^{mask:#b}"));
            }
        }
    }
    vec![
        CheckReport::new("delta substitution", f5, count),
        CheckReport::new("delta residue", f6, count),
    ]
}

/// Fourier transform of delta derivatives, in residue form: `F^Λ_{Z,W} D_W^{(j|J)} δ = (-1)^{JN} Λ^{(j|J)}`.
pub fn check_delta_fourier(case: Case, n: u8, window: (i64, i64)) -> CheckReport {
    // the support of D^{(j|J)}δ lies near the anti-diagonal z + w = -1 - j, so the trusted
    // interior must still reach it after trimming the edges
    let window = (window.0.min(-14), window.1.max(14));
    let d = delta(n, window);
    let mut fails = Vec::new();
    let mut count = 0;
    for j in 0..=3u32 {
        for mask in masks(n) {
            count += 1;
            let s = d_deriv(case, j, mask, &d);
            let k = mask.count_ones() as usize;
            let sign = Sign::parity(k * n as usize) * Sign::parity(k * (k + 1) / 2);
            let mut expected = LambdaPoly::zero(case, n, crate::params::Family::Lambda);
            expected.add_term(
                LMono::new(j, mask),
                Scalar::from_rational(BigRational::one() / factorial(j)).scale_int(sign.value() as i64),
            );
            match fourier_zw(case, &s, j + 2 * n as u32 + 2).map(|f| f.constant_poly()) {
                Ok(Some(p)) if p == expected => {}
                other => fails.push(format!("j={j} J={mask:#b}: {other:?}")),
            }
        }
    }
    CheckReport::new("delta Fourier of derivatives", fails, count)
}

/// `D_W^{(j|J)} δ(Z,W) = σ(J) (i_{z,w} - i_{w,z}) (Z-W)^{-1-j|N∖J}` (K case).
pub fn check_k_deriv(n: u8, window: (i64, i64)) -> CheckReport {
    let d = delta(n, window);
    let full = crate::superindex::full_mask(n);
    let (lo, hi) = window;
    let mut fails = Vec::new();
    let mut count = 0;
    for j in 0..=3u32 {
        for mask in masks(n) {
            count += 1;
            let lhs = d_deriv(Case::K, j, mask, &d);
            let rhs = binomial_delta(Case::K, n, -1 - j as i64, full & !mask, window)
                .scale(&sigma(mask, full & !mask));
            let margin = (j + n as u32) as i64 + 1;
            if !lhs.eq_within(&rhs, lo + margin, hi - margin) {
                fails.push(format!("j={j} J={mask:#b}"));
            }
        }
    }
    CheckReport::new("K-case derivative of delta", fails, count)
}

/// `D^i_Z (Z-W)^{j|J} = σ(e_i, J∖e_i)(Z-W)^{j|J∖e_i} + j σ(e_i, J)(Z-W)^{j-1|J∪e_i}`; the
/// first term is present when `i ∈ J`, the second when `i ∉ J`.
pub fn check_k_binomial_derivative(n: u8, window: (i64, i64)) -> CheckReport {
    let (lo, hi) = window;
    let mut fails = Vec::new();
    let mut count = 0;
    for dir in [Direction::ZW, Direction::WZ] {
        for j in -3..=3i64 {
            for mask in masks(n) {
                for i in 1..=n {
                    count += 1;
                    let e = crate::superindex::bit(i);
                    let lhs = expand_binomial(Case::K, n, j, mask, dir, window).super_d(Case::K, Z, i);
                    let rhs = if mask & e != 0 {
                        expand_binomial(Case::K, n, j, mask & !e, dir, window).scale(&sigma(e, mask & !e))
                    } else {
                        expand_binomial(Case::K, n, j - 1, mask | e, dir, window)
                            .scale(&sigma(e, mask).scale_int(j))
                    };
                    let margin = n as i64 + 2;
                    if !lhs.eq_within(&rhs, lo + margin, hi - margin) {
                        fails.push(format!("{dir:?} j={j} J={mask:#b} i={i}"));
                    }
                }
            }
        }
    }
    CheckReport::new("K-case derivative of binomials", fails, count)
}

/// `(Z-W)^{-1|N}` is the same series in both cases.
pub fn check_k_binomial_top(n: u8, window: (i64, i64)) -> CheckReport {
    let full = crate::superindex::full_mask(n);
    let mut fails = Vec::new();
    for dir in [Direction::ZW, Direction::WZ] {
        let k = expand_binomial(Case::K, n, -1, full, dir, window);
        let w = expand_binomial(Case::W, n, -1, full, dir, window);
        if !k.eq_within(&w, window.0, window.1) {
            fails.push(format!("{dir:?}"));
        }
    }
    CheckReport::new("K-case (Z-W)^{-1|N} matches W case", fails, 2)
}

/// `i_{x,z} δ(X-Z, W) = i_{w,z} δ(X, W+Z)` in the W case, three coordinate sets `(X, Z, W)`.
pub fn check_deltas_are_equal(n: u8, window: (i64, i64)) -> CheckReport {
    assert!(n <= 1, "three-variable check implemented for N ≤ 1");
    let (lo, hi) = window;
    let (x, z, w) = (0usize, 1usize, 2usize);
    let one = SuperLaurent::constant(n, 3, window, Scalar::one());
    // Grassmann factor (θ_X - θ_Z - θ_W)^N, identical on both sides
    let grass = if n == 1 {
        one.mul_odd(x, 1).sub(&one.mul_odd(z, 1)).sub(&one.mul_odd(w, 1))
    } else {
        one.clone()
    };
    let span = hi - lo + 2;
    let sgn = |k: i64| if k.rem_euclid(2) == 0 { 1 } else { -1 };
    let mut lhs = SuperLaurent::zero(n, 3, window);
    let mut rhs = SuperLaurent::zero(n, 3, window);
    for k in 0..=span {
        // i_{x,z} (x-z)^{-1-k} w^k
        for l in 0..=span {
            let c = Scalar::from_rational(binomial(-1 - k, l)).scale_int(sgn(l));
            lhs.add_term(vec![-1 - k - l, l, k], 0, c);
        }
        // + w^{-1-k} (x-z)^k
        for l in 0..=k {
            let c = Scalar::from_rational(binomial(k, l)).scale_int(sgn(l));
            lhs.add_term(vec![k - l, l, -1 - k], 0, c);
        }
        // x^{-1-k} (w+z)^k
        for l in 0..=k {
            rhs.add_term(vec![-1 - k, l, k - l], 0, Scalar::from_rational(binomial(k, l)));
        }
        // + x^k i_{w,z} (w+z)^{-1-k}
        for l in 0..=span {
            let c = Scalar::from_rational(binomial(-1 - k, l));
            rhs.add_term(vec![k, l, -1 - k - l], 0, c);
        }
    }
    let lhs = lhs.mul(&grass);
    let rhs = rhs.mul(&grass);
    let fails = if lhs.eq_within(&rhs, lo, hi) { vec![] } else { vec!["coefficients differ".into()] };
    CheckReport::new("deltas are equal", fails, 1)
}

/// Taylor expansions on monomials `f` of degree ≤ 4.
///
/// W case: `f(Z) = Σ (-1)^J (Z-W)^{j|J} ∂_W^{(j|J)} f(W)`.
/// K case: `f(W+Z) = Σ (-1)^{J(J-1)/2} W^{j|J}/j! D_Z^{j|J} f(Z)` with
/// `W + Z = (w + z + Σ ζ^iθ^i, ζ + θ)`.
pub fn check_taylor(case: Case, n: u8, window: (i64, i64)) -> CheckReport {
    let (lo, hi) = window;
    let mut fails = Vec::new();
    let mut count = 0;
    for p in 0..=4i64 {
        for mask in masks(n) {
            if p + mask.count_ones() as i64 > 4 {
                continue;
            }
            count += 1;
            let ok = match case {
                Case::W => {
                    let fz = monomial_in(n, window, Z, p, mask);
                    let fw = monomial_in(n, window, W, p, mask);
                    let mut sum = SuperLaurent::zero(n, 2, window);
                    for j in 0..=p as u32 {
                        for jm in masks(n) {
                            let sgn = if jm.count_ones() % 2 == 0 { 1 } else { -1 };
                            let term = expand_binomial(Case::W, n, j as i64, jm, Direction::ZW, window)
                                .mul(&d_deriv(Case::W, j, jm, &fw))
                                .scale(&Scalar::from_int(sgn));
                            sum = sum.add(&term);
                        }
                    }
                    sum.eq_within(&fz, lo, hi)
                }
                Case::K => {
                    let fz = monomial_in(n, window, Z, p, mask);
                    // f(W+Z)
                    let one = SuperLaurent::constant(n, 2, window, Scalar::one());
                    let mut base = SuperLaurent::zero(n, 2, window);
                    base.add_term(vec![1, 0], 0, Scalar::one());
                    base.add_term(vec![0, 1], 0, Scalar::one());
                    for i in 1..=n {
                        base = base.add(&one.mul_odd(Z, i).mul_odd(W, i));
                    }
                    let mut shifted = base.pow(p as u32);
                    let mut grass = one.clone();
                    for i in mask_elems(mask) {
                        grass = grass.mul(&one.mul_odd(W, i).add(&one.mul_odd(Z, i)));
                    }
                    shifted = shifted.mul(&grass);
                    let mut sum = SuperLaurent::zero(n, 2, window);
                    for j in 0..=(p as u32 + n as u32) {
                        for jm in masks(n) {
                            let k = jm.count_ones() as usize;
                            let sgn = Sign::parity(k * (k.saturating_sub(1)) / 2).value() as i64;
                            let wj = monomial_in(n, window, W, j as i64, jm);
                            let f = Scalar::from_rational(BigRational::one() / factorial(j)).scale_int(sgn);
                            sum = sum.add(&wj.mul(&fz.super_d_pow(Case::K, Z, j, jm)).scale(&f));
                        }
                    }
                    sum.eq_within(&shifted, lo, hi)
                }
            };
            if !ok {
                fails.push(format!("f = z^{p} θ^{mask:#b}"));
            }
        }
    }
    CheckReport::new("Taylor expansion", fails, count)
}

/// Band near the window edges where sampled series may be inexact.
const SAMPLE_MARGIN: i64 = 5;

/// A local series `Σ_r D_W^{(j_r|J_r)} δ · c_r(W)` with polynomial coefficients `c_r`, from a
/// deterministic seed.
pub fn sample_local(case: Case, n: u8, window: (i64, i64), seed: u64) -> SuperLaurent {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = |m: u64| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) % m
    };
    let d = delta(n, window);
    let mut s = SuperLaurent::zero(n, 2, window);
    let terms = 1 + next(3);
    for _ in 0..terms {
        let j = next(3) as u32;
        let jm = (next(1 << n) as u16) << 1;
        let mut c = SuperLaurent::zero(n, 2, window);
        for _ in 0..(1 + next(2)) {
            let p = next(3) as i64;
            let cm = (next(1 << n) as u16) << 1;
            let coef = Scalar::from_int(next(7) as i64 - 3);
            c = c.add(&monomial_in(n, window, W, p, cm).scale(&coef));
        }
        s = s.add(&d_deriv(case, j, jm, &d).mul(&c));
    }
    s
}

/// Decomposition round trip: `s = Σ D_W^{(j|J)} δ · c_{j|J}(W)` with the residue
/// coefficients, on sampled local series.
pub fn check_decomposition(case: Case, n: u8, window: (i64, i64), samples: u64) -> CheckReport {
    let (lo, hi) = window;
    let d = delta(n, window);
    let mut fails = Vec::new();
    for seed in 0..samples {
        let s = sample_local(case, n, window, seed);
        let f = match fourier_zw_with_margin(case, &s, 6, SAMPLE_MARGIN) {
            Ok(f) => f,
            Err(e) => {
                fails.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let mut back = SuperLaurent::zero(n, 2, window);
        for (m, c) in &f.coeffs {
            // undo the (-1)^{JN} Λ^{(j|J)} normalisation to recover c_{j|J}
            let k = m.mask.count_ones() as usize;
            let sign = Sign::parity(k * n as usize) * Sign::parity(k * (k + 1) / 2);
            let undo = Scalar::from_rational(factorial(m.pow)).scale_int(sign.value() as i64);
            back = back.add(&d_deriv(case, m.pow, m.mask, &d).mul(&c.scale(&undo)));
        }
        let margin = 6 + n as i64;
        if !back.eq_within(&s, lo + margin, hi - margin) {
            fails.push(format!("seed {seed}"));
        }
    }
    CheckReport::new("decomposition round trip", fails, samples as usize)
}

/// `F^Λ ∂_z s = -λ F^Λ s` and `F^Λ D^i_Z s = -(-1)^N χ^i F^Λ s` (W case), on sampled local
/// series; both sides are compared coefficientwise as series in `W`.
pub fn check_fourier_sesquilinearity(case: Case, n: u8, window: (i64, i64), samples: u64) -> CheckReport {
    let (lo, hi) = window;
    let mut fails = Vec::new();
    let margin = 8 + n as i64;
    let cmp = |a: &Fourier, b: &BTreeMap<LMono, SuperLaurent>| -> bool {
        let keys: std::collections::BTreeSet<LMono> = a.coeffs.keys().chain(b.keys()).cloned().collect();
        keys.into_iter().all(|k| {
            let x = a.coeffs.get(&k).cloned().unwrap_or_else(|| SuperLaurent::zero(n, 2, window));
            let y = b.get(&k).cloned().unwrap_or_else(|| SuperLaurent::zero(n, 2, window));
            x.eq_within(&y, lo + margin, hi - margin)
        })
    };
    for seed in 0..samples {
        let s = sample_local(case, n, window, 100 + seed);
        let base = match fourier_zw_with_margin(case, &s, 6, SAMPLE_MARGIN) {
            Ok(f) => f,
            Err(e) => {
                fails.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        // ∂_z
        let lhs = fourier_zw_with_margin(case, &s.d_even(Z), 7, SAMPLE_MARGIN);
        let mut expected = BTreeMap::new();
        for (m, c) in &base.coeffs {
            let key = LMono::new(m.pow + 1, m.mask);
            let entry = expected.entry(key).or_insert_with(|| SuperLaurent::zero(n, 2, window));
            *entry = entry.sub(c);
        }
        match lhs {
            Ok(l) if cmp(&l, &expected) => {}
            _ => fails.push(format!("seed {seed}: ∂_z")),
        }
        // ∂_{θ^i} in the W case
        if case == Case::W {
            for i in 1..=n {
                let lhs = fourier_zw_with_margin(case, &s.d_odd(Z, i), 7, SAMPLE_MARGIN);
                let mut expected = BTreeMap::new();
                let e = crate::superindex::bit(i);
                for (m, c) in &base.coeffs {
                    if m.mask & e != 0 {
                        continue;
                    }
                    let sign = sigma_mask(e, m.mask).value() as i64 * if n.is_multiple_of(2) { -1 } else { 1 };
                    let key = LMono::new(m.pow, m.mask | e);
                    let entry = expected.entry(key).or_insert_with(|| SuperLaurent::zero(n, 2, window));
                    *entry = entry.add(&c.scale(&Scalar::from_int(sign)));
                }
                match lhs {
                    Ok(l) if cmp(&l, &expected) => {}
                    _ => fails.push(format!("seed {seed}: ∂_θ{i}")),
                }
            }
        }
    }
    CheckReport::new("Fourier sesquilinearity", fails, samples as usize)
}

/// The full suite for one case and `N`.
pub fn run_suite(case: Case, n: u8, window: (i64, i64)) -> Vec<CheckReport> {
    let mut out = vec![
        check_delta_annihilation(case, n, window),
        check_delta_lowering(case, n, window),
        check_delta_symmetry(n, window),
        check_delta_derivative_swap(case, n, window),
    ];
    out.extend(check_delta_substitution(n, window));
    out.push(check_delta_fourier(case, n, window));
    if case == Case::K {
        out.push(check_k_deriv(n, window));
        out.push(check_k_binomial_top(n, window));
        if n <= 2 {
            out.push(check_k_binomial_derivative(n, window));
        }
    }
    if case == Case::W && n <= 1 {
        out.push(check_deltas_are_equal(n, window));
    }
    out.push(check_taylor(case, n, window));
    let wide = (window.0 - 8, window.1 + 8);
    out.push(check_decomposition(case, n, wide, 6));
    out.push(check_fourier_sesquilinearity(case, n, wide, 4));
    out
}
