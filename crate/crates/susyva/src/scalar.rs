//! The coefficient ring: polynomials with exact rational coefficients in named formal
//! parameters, optionally extended by a formal imaginary unit `i` with `i² = -1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use parking_lot::RwLock;

/// Reserved name of the imaginary unit.
pub const IMAG: &str = "i";

static NAMES: Lazy<RwLock<Vec<String>>> = Lazy::new(|| RwLock::new(vec![IMAG.to_string()]));

/// Interns a parameter name and returns its id. Id 0 is the imaginary unit.
pub fn intern(name: &str) -> u32 {
    if let Some(id) = NAMES.read().iter().position(|n| n == name) {
        return id as u32;
    }
    let mut names = NAMES.write();
    if let Some(id) = names.iter().position(|n| n == name) {
        return id as u32;
    }
    names.push(name.to_string());
    (names.len() - 1) as u32
}

/// Name of an interned parameter.
pub fn name_of(id: u32) -> String {
    NAMES.read()[id as usize].clone()
}

/// A monomial in the parameters: sorted `(id, exponent)` pairs with positive exponents.
pub type Mono = Vec<(u32, u32)>;

fn mono_mul(a: &Mono, b: &Mono) -> (bool, Mono) {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 + b[j].1));
            i += 1;
            j += 1;
        }
    }
    // fold i^2 = -1
    let mut negate = false;
    if let Some(first) = out.first_mut() {
        if first.0 == 0 && first.1 >= 2 {
            if (first.1 / 2) % 2 == 1 {
                negate = true;
            }
            first.1 %= 2;
        }
    }
    out.retain(|&(_, e)| e > 0);
    (negate, out)
}

/// Exact polynomial scalar.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Scalar {
    terms: BTreeMap<Mono, BigRational>,
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar { terms: BTreeMap::new() }
    }

    pub fn one() -> Scalar {
        Scalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Scalar {
        Scalar::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Scalar {
        Scalar::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Scalar {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(Vec::new(), r);
        }
        Scalar { terms }
    }

    /// The parameter with the given name (the name `i` is the imaginary unit).
    pub fn param(name: &str) -> Scalar {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(intern(name), 1)], BigRational::one());
        Scalar { terms }
    }

    pub fn imag() -> Scalar {
        Scalar::param(IMAG)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map(|r| r.is_one()).unwrap_or(false)
    }

    /// The value if this scalar is a rational constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &BigRational)> {
        self.terms.iter()
    }

    pub fn scale(&self, r: &BigRational) -> Scalar {
        if r.is_zero() {
            return Scalar::zero();
        }
        Scalar { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect() }
    }

    pub fn scale_int(&self, n: i64) -> Scalar {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }

    fn add_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Names of the parameters occurring in this scalar.
    pub fn params(&self) -> Vec<String> {
        let mut ids: Vec<u32> = self.terms.keys().flat_map(|m| m.iter().map(|p| p.0)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().map(name_of).collect()
    }

    /// Substitutes `name ↦ value` everywhere.
    pub fn substitute(&self, name: &str, value: &Scalar) -> Scalar {
        let id = intern(name);
        let mut out = Scalar::zero();
        for (m, c) in &self.terms {
            let mut rest = Vec::new();
            let mut power = 0;
            for &(v, e) in m {
                if v == id {
                    power = e;
                } else {
                    rest.push((v, e));
                }
            }
            let mut term = Scalar { terms: BTreeMap::from([(rest, c.clone())]) };
            for _ in 0..power {
                term = &term * value;
            }
            out += term;
        }
        out
    }

    /// Complex conjugation `i ↦ -i`.
    pub fn conj(&self) -> Scalar {
        self.substitute(IMAG, &-Scalar::imag())
    }

    /// Total degree in the parameters (ignoring the imaginary unit); zero has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().filter(|p| p.0 != 0).map(|p| p.1).sum())
            .max()
            .unwrap_or(0)
    }

    /// True if the scalar is a single monomial with coefficient of either sign.
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::from_int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Scalar {
        Scalar::from_rational(r)
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        out += rhs.clone();
        out
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(mut self, rhs: Scalar) -> Scalar {
        self += rhs;
        self
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let (neg, m) = mono_mul(ma, mb);
                let c = ca * cb;
                out.add_term(m, if neg { -c } else { c });
            }
        }
        out
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_mono(m: &Mono) -> Vec<String> {
    let mut parts: Vec<(String, u32)> = m.iter().map(|&(v, e)| (name_of(v), e)).collect();
    // imaginary unit first, then alphabetical
    parts.sort_by(|a, b| (a.0 != IMAG, &a.0).cmp(&(b.0 != IMAG, &b.0)));
    parts
        .into_iter()
        .map(|(n, e)| if e == 1 { n } else { format!("{n}^{e}") })
        .collect()
}

impl Scalar {
    /// Renders as a product factor: parenthesised when it is a sum.
    pub fn fmt_factor(&self) -> String {
        if self.terms.len() > 1 {
            format!("({})", self)
        } else {
            self.to_string()
        }
    }

    /// Renders the scalar as a leading coefficient of a monomial `rest`:
    /// returns `(negative, text)` where `text` is empty for a unit coefficient.
    pub fn fmt_coefficient(&self) -> (bool, String) {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let neg = c.is_negative();
            let a = c.abs();
            let mut parts = Vec::new();
            if !a.is_one() || m.is_empty() {
                parts.push(fmt_rational(&a));
            }
            parts.extend(fmt_mono(m));
            let text = parts.join("*");
            return (neg, if text == "1" { String::new() } else { text });
        }
        (false, format!("({})", self))
    }

    /// Value as `f64` when constant and real (used only for reporting).
    pub fn to_f64(&self) -> Option<f64> {
        self.as_rational().and_then(|r| r.to_f64())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // higher degree first, then by rendered name
        let mut items: Vec<(u32, String, &BigRational, &Mono)> = self
            .terms
            .iter()
            .map(|(m, c)| (m.iter().map(|p| p.1).sum::<u32>(), fmt_mono(m).join("*"), c, m))
            .collect();
        items.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let mut out = String::new();
        for (k, (_, names, c, _)) in items.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            let body = if names.is_empty() {
                fmt_rational(&a)
            } else if a.is_one() {
                names.clone()
            } else {
                format!("{}*{}", fmt_rational(&a), names)
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

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `n choose k` for any integer `n` and `k ≥ 0` (generalised binomial).
pub fn binomial(n: i64, k: i64) -> BigRational {
    if k < 0 {
        return BigRational::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for t in 0..k {
        num *= BigInt::from(n - t);
        den *= BigInt::from(t + 1);
    }
    BigRational::new(num, den)
}

/// Falling factorial `(n)_k = n (n-1) … (n-k+1)`.
pub fn falling(n: i64, k: i64) -> BigInt {
    let mut out = BigInt::one();
    for t in 0..k.max(0) {
        out *= BigInt::from(n - t);
    }
    out
}

/// `k!` as a rational.
pub fn factorial(k: u32) -> BigRational {
    let mut out = BigInt::one();
    for t in 2..=k {
        out *= BigInt::from(t);
    }
    BigRational::from_integer(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let i = Scalar::imag();
        assert_eq!(&i * &i, Scalar::from_int(-1));
        assert_eq!(&(&i * &i) * &i, -Scalar::imag());
    }

    #[test]
    fn rendering() {
        let m = Scalar::param("m");
        assert_eq!((&m * &m).scale_int(-3).to_string(), "-3*m^2");
        let c = Scalar::param("c").scale(&BigRational::new(1.into(), 3.into()));
        assert_eq!(c.to_string(), "1/3*c");
        assert_eq!(Scalar::zero().to_string(), "0");
    }

    #[test]
    fn substitution() {
        let c = Scalar::param("c");
        let e = &(&c * &c) + &Scalar::from_int(1);
        assert_eq!(e.substitute("c", &Scalar::from_int(2)), Scalar::from_int(5));
    }

    #[test]
    fn generalised_binomial() {
        assert_eq!(binomial(-1, 3), BigRational::from_integer((-1).into()));
        assert_eq!(binomial(5, 2), BigRational::from_integer(10.into()));
        assert_eq!(falling(-2, 2), BigInt::from(6));
    }
}
