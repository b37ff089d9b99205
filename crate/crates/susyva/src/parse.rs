//! Expression grammar and algebra definition files.
//!
//! Expressions:
//!
//! ```text
//! sum      := ['+'|'-'] product (('+'|'-') product)*
//! product  := factor (['*'] factor | '/' number)*
//! factor   := primary ['^' integer]
//! primary  := number | identifier | '(' sum ')' | ':' operand operand+ ':'
//! operand  := ('T' | 'S<i>')* (identifier | '(' sum ')' | ':' ... ':')
//! ```
//!
//! `T`, `S<i>`, `lambda`, `chi<i>` and scalars act as operators on whatever stands to
//! their right; a product without a field factor denotes that operator applied to the
//! vacuum. `: a b c :` nests to the right. Identifiers resolve, in order, to generators,
//! named definitions of the algebra and declared parameters.
//!
//! Algebra files have `[header]`, `[generators]`, `[brackets]`, `[definitions]` and
//! `[conformal]` sections with one declaration per line; `#` starts a comment.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::expr::{Algebra, Atom, Bracket, FieldExpr};
use crate::params::{Case, Family, LMono, LambdaPoly};
use crate::scalar::Scalar;
use crate::superindex::Sign;

// --------------------------------------------------------------------------------------
// lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigInt),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str, line: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Num(s.parse().expect("digits")), line, col });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line, col });
        } else if "+-*/^():".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line, col });
            i += 1;
        } else {
            return Err(Error::Syntax { line, col, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push(Token { tok: Tok::End, line, col: chars.len() + 1 });
    Ok(out)
}

// --------------------------------------------------------------------------------------
// builders: canonical (engine) and raw (structure-constant loading)

/// The operations the parser needs from an expression backend.
pub trait ExprBuilder {
    fn algebra(&self) -> &Algebra;
    fn nprod(&self, a: &FieldExpr, b: &FieldExpr) -> FieldExpr;
    fn apply_t(&self, e: &FieldExpr) -> FieldExpr;
    fn apply_s(&self, i: u8, e: &FieldExpr) -> FieldExpr;
}

impl ExprBuilder for Engine<'_> {
    fn algebra(&self) -> &Algebra {
        self.alg
    }
    fn nprod(&self, a: &FieldExpr, b: &FieldExpr) -> FieldExpr {
        Engine::nprod(self, a, b)
    }
    fn apply_t(&self, e: &FieldExpr) -> FieldExpr {
        Engine::apply_t(self, e)
    }
    fn apply_s(&self, i: u8, e: &FieldExpr) -> FieldExpr {
        Engine::apply_s(self, i, e)
    }
}

/// Builder that keeps words exactly as written: products concatenate and derivations
/// act by the Leibniz rule without reordering.
pub struct RawBuilder<'a>(pub &'a Algebra);

impl RawBuilder<'_> {
    fn deriv(&self, e: &FieldExpr, op: u8) -> FieldExpr {
        let alg = self.0;
        let mut out = FieldExpr::zero();
        for (w, s) in e.terms() {
            let mut before = 0usize;
            for (k, a) in w.iter().enumerate() {
                if !alg.gen(a.gen).central {
                    let hit = if op == 0 {
                        Some((Sign::PLUS, a.apply_t()))
                    } else {
                        a.apply_s(alg.case, op).map(|(sg, b)| (sg * Sign::parity(before), b))
                    };
                    if let Some((sg, b)) = hit {
                        let mut v = w.clone();
                        v[k] = b;
                        out.add_term(v, s.scale_int(sg.value() as i64));
                    }
                }
                before += alg.atom_parity(*a);
            }
        }
        out
    }
}

impl ExprBuilder for RawBuilder<'_> {
    fn algebra(&self) -> &Algebra {
        self.0
    }
    fn nprod(&self, a: &FieldExpr, b: &FieldExpr) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (u, s) in a.terms() {
            for (w, t) in b.terms() {
                let mut v = u.clone();
                v.extend_from_slice(w);
                out.add_term(v, s * t);
            }
        }
        out
    }
    fn apply_t(&self, e: &FieldExpr) -> FieldExpr {
        self.deriv(e, 0)
    }
    fn apply_s(&self, i: u8, e: &FieldExpr) -> FieldExpr {
        self.deriv(e, i)
    }
}

// --------------------------------------------------------------------------------------
// values

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Letter {
    T,
    S(u8),
    Lambda,
    Chi(u8),
}

/// Operator polynomial: sums of scalar multiples of letter strings.
type Op = BTreeMap<Vec<Letter>, Scalar>;

enum Val {
    Op(Op),
    Field(Bracket),
}

fn op_scalar(s: Scalar) -> Op {
    let mut m = Op::new();
    if !s.is_zero() {
        m.insert(Vec::new(), s);
    }
    m
}

fn op_letter(l: Letter) -> Op {
    let mut m = Op::new();
    m.insert(vec![l], Scalar::one());
    m
}

fn op_add(a: &mut Op, b: &Op, k: &Scalar) {
    for (w, s) in b {
        let e = a.entry(w.clone()).or_insert_with(Scalar::zero);
        *e = &*e + &(s * k);
        if e.is_zero() {
            a.remove(w);
        }
    }
}

fn op_mul(a: &Op, b: &Op) -> Op {
    let mut out = Op::new();
    for (u, s) in a {
        for (w, t) in b {
            let mut v = u.clone();
            v.extend_from_slice(w);
            let e = out.entry(v).or_insert_with(Scalar::zero);
            *e = &*e + &(s * t);
        }
    }
    out.retain(|_, s| !s.is_zero());
    out
}

fn op_pure_scalar(a: &Op) -> Option<Scalar> {
    match a.len() {
        0 => Some(Scalar::zero()),
        1 => a.get(&Vec::new()).cloned(),
        _ => None,
    }
}

struct Parser<'b, B: ExprBuilder> {
    b: &'b B,
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

const MAX_DEPTH: usize = 64;

impl<'b, B: ExprBuilder> Parser<'b, B> {
    fn alg(&self) -> &Algebra {
        self.b.algebra()
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn vac_field(&self) -> Bracket {
        let a = self.alg();
        LambdaPoly::constant(a.case, a.n, Family::Lambda, FieldExpr::vacuum())
    }

    fn apply_op(&self, op: &Op, f: &Bracket) -> Bracket {
        let a = self.alg();
        let mut out = a.zero_bracket();
        for (letters, s) in op {
            let mut acc = f.clone();
            for l in letters.iter().rev() {
                acc = match *l {
                    Letter::T => acc.apply_even_operator(|e| self.b.apply_t(e)),
                    Letter::S(i) => acc.apply_odd_operator(i, |e| self.b.apply_s(i, e)),
                    Letter::Lambda => acc.mul_even(1),
                    Letter::Chi(i) => acc.left_mul_odd(i),
                };
            }
            out.add_scaled(&acc, s);
        }
        out
    }

    fn to_field(&self, v: Val) -> Bracket {
        match v {
            Val::Field(f) => f,
            Val::Op(o) => self.apply_op(&o, &self.vac_field()),
        }
    }

    fn sum(&mut self) -> Result<Val> {
        let mut neg = false;
        if *self.peek() == Tok::Sym('+') || *self.peek() == Tok::Sym('-') {
            neg = self.next().tok == Tok::Sym('-');
        }
        let mut acc = self.product()?;
        if neg {
            acc = scale_val(acc, &Scalar::from_int(-1));
        }
        loop {
            let k = match self.peek() {
                Tok::Sym('+') => 1,
                Tok::Sym('-') => -1,
                _ => break,
            };
            self.next();
            let rhs = self.product()?;
            acc = self.add_vals(acc, rhs, &Scalar::from_int(k));
        }
        Ok(acc)
    }

    fn add_vals(&self, a: Val, b: Val, k: &Scalar) -> Val {
        match (a, b) {
            (Val::Op(mut x), Val::Op(y)) => {
                op_add(&mut x, &y, k);
                Val::Op(x)
            }
            (a, b) => {
                let mut x = self.to_field(a);
                x.add_scaled(&self.to_field(b), k);
                Val::Field(x)
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Num(_) | Tok::Sym('(') | Tok::Sym(':'))
    }

    /// Rejects an operator word containing some `S<i>` twice in the W case, where
    /// `(S^i)^2 = 0` makes the expression vanish identically.
    fn check_word(&self, op: &Op, at: usize) -> Result<()> {
        if self.alg().case != Case::W {
            return Ok(());
        }
        for letters in op.keys() {
            for (k, l) in letters.iter().enumerate() {
                if let Letter::S(i) = l {
                    if letters[k + 1..].contains(l) {
                        let t = &self.toks[at];
                        return Err(Error::invalid(format!(
                            "line {}, column {}: repeated S-index S{i}; in the W case (S^{i})^2 = 0, \
                             so the operator word vanishes identically",
                            t.line, t.col
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn product(&mut self) -> Result<Val> {
        let mut starts = vec![self.pos];
        let mut factors = vec![self.factor()?];
        let mut divisor = BigInt::from(1);
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.next();
                    starts.push(self.pos);
                    factors.push(self.factor()?);
                }
                Tok::Sym('/') => {
                    self.next();
                    match self.next().tok {
                        Tok::Num(d) if d != BigInt::from(0) => divisor *= d,
                        _ => {
                            self.pos -= 1;
                            return self.err("expected a nonzero integer after `/`");
                        }
                    }
                }
                _ if self.starts_factor() => {
                    starts.push(self.pos);
                    factors.push(self.factor()?);
                }
                _ => break,
            }
        }
        // consecutive operator factors compose into one word
        let mut run: Option<Op> = None;
        for (v, &at) in factors.iter().zip(&starts) {
            match v {
                Val::Op(o) => {
                    let word = match &run {
                        Some(r) => op_mul(r, o),
                        None => o.clone(),
                    };
                    self.check_word(&word, at)?;
                    run = Some(word);
                }
                Val::Field(_) => run = None,
            }
        }
        let mut acc = factors.pop().expect("at least one factor");
        while let Some(f) = factors.pop() {
            acc = self.combine(f, acc)?;
        }
        if divisor != BigInt::from(1) {
            let k = Scalar::from_rational(BigRational::new(1.into(), divisor));
            acc = scale_val(acc, &k);
        }
        Ok(acc)
    }

    fn combine(&self, left: Val, right: Val) -> Result<Val> {
        match (left, right) {
            (Val::Op(a), Val::Op(b)) => Ok(Val::Op(op_mul(&a, &b))),
            (Val::Op(a), Val::Field(f)) => Ok(Val::Field(self.apply_op(&a, &f))),
            (Val::Field(f), Val::Op(b)) => match op_pure_scalar(&b) {
                Some(s) => Ok(Val::Field(f.scaled(&s))),
                None => self.err("operators must stand to the left of the field they act on"),
            },
            (Val::Field(_), Val::Field(_)) => {
                self.err("adjacent fields: write a normally ordered product as `:a b:`")
            }
        }
    }

    fn factor(&mut self) -> Result<Val> {
        let at = self.pos;
        let base = self.primary()?;
        if *self.peek() == Tok::Sym('^') {
            self.next();
            let k = match self.next().tok {
                Tok::Num(k) => k,
                _ => {
                    self.pos -= 1;
                    return self.err("expected an integer exponent");
                }
            };
            let k: u32 = k.try_into().map_err(|_| Error::invalid("exponent too large"))?;
            return match base {
                Val::Op(o) => {
                    let mut acc = op_scalar(Scalar::one());
                    for _ in 0..k {
                        acc = op_mul(&acc, &o);
                    }
                    self.check_word(&acc, at)?;
                    Ok(Val::Op(acc))
                }
                Val::Field(_) => self.err("only operators and scalars can be raised to a power"),
            };
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Val> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("expression nested too deeply");
        }
        let out = self.primary_inner();
        self.depth -= 1;
        out
    }

    fn primary_inner(&mut self) -> Result<Val> {
        match self.peek().clone() {
            Tok::Num(k) => {
                self.next();
                Ok(Val::Op(op_scalar(Scalar::from_rational(BigRational::from_integer(k)))))
            }
            Tok::Sym('(') => {
                self.next();
                let v = self.sum()?;
                self.expect(')')?;
                Ok(v)
            }
            Tok::Sym(':') => self.normal_product(),
            Tok::Ident(name) => {
                let v = self.ident(&name)?;
                self.next();
                Ok(v)
            }
            Tok::End => self.err("unexpected end of input"),
            Tok::Sym(c) => self.err(format!("unexpected `{c}`")),
        }
    }

    fn odd_index(&self, name: &str, prefix: &str) -> Option<u8> {
        let rest = name.strip_prefix(prefix)?;
        let n = self.alg().n;
        if rest.is_empty() {
            return if n == 1 { Some(1) } else { None };
        }
        let k: u8 = rest.parse().ok()?;
        (1..=n).contains(&k).then_some(k)
    }

    fn ident(&mut self, name: &str) -> Result<Val> {
        let alg = self.alg();
        if name == "T" {
            return Ok(Val::Op(op_letter(Letter::T)));
        }
        if name == "lambda" {
            return Ok(Val::Op(op_letter(Letter::Lambda)));
        }
        if name == "vac" {
            return Ok(Val::Field(self.vac_field()));
        }
        if let Some(i) = self.odd_index(name, "S") {
            return Ok(Val::Op(op_letter(Letter::S(i))));
        }
        if let Some(i) = self.odd_index(name, "chi") {
            return Ok(Val::Op(op_letter(Letter::Chi(i))));
        }
        if let Some(g) = alg.gen_id(name) {
            let f = FieldExpr::atom(Atom::gen(g));
            return Ok(Val::Field(LambdaPoly::constant(alg.case, alg.n, Family::Lambda, f)));
        }
        if let Some(text) = alg.definition(name) {
            let text = text.to_string();
            let toks = lex(&text, 1)?;
            let mut sub = Parser { b: self.b, toks, pos: 0, depth: self.depth + 1 };
            if sub.depth > MAX_DEPTH {
                return self.err("definitions nested too deeply");
            }
            let v = sub.sum()?;
            if *sub.peek() != Tok::End {
                return sub.err("trailing input in definition");
            }
            return Ok(Val::Field(self.to_field(v)));
        }
        if alg.params.iter().any(|p| p == name) {
            return Ok(Val::Op(op_scalar(Scalar::param(name))));
        }
        if name == "i" && alg.imaginary {
            return Ok(Val::Op(op_scalar(Scalar::imag())));
        }
        if crate::expr::is_reserved(name, alg.n) {
            return self.err(format!("`{name}` is not available for N = {}", alg.n));
        }
        Err(Error::UnknownGenerator(name.to_string()))
    }

    fn normal_product(&mut self) -> Result<Val> {
        self.expect(':')?;
        let mut operands = Vec::new();
        while !(*self.peek() == Tok::Sym(':') && self.colon_closes(operands.len())) {
            if *self.peek() == Tok::End {
                return self.err("unclosed `:`");
            }
            operands.push(self.operand()?);
        }
        self.next();
        if operands.len() < 2 {
            return self.err("a normally ordered product needs at least two operands");
        }
        let mut acc = operands.pop().expect("nonempty");
        while let Some(x) = operands.pop() {
            acc = self.b.nprod(&x, &acc);
        }
        let a = self.alg();
        Ok(Val::Field(LambdaPoly::constant(a.case, a.n, Family::Lambda, acc)))
    }

    /// Whether the `:` at the cursor closes the current product rather than opening a
    /// nested one. It opens when the next token starts a field operand and either fewer
    /// than two operands have been read or that token is a derivation, generator,
    /// definition or `(`.
    fn colon_closes(&self, operands: usize) -> bool {
        let next = &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok;
        let alg = self.alg();
        let fieldish = match next {
            Tok::Sym('(') => true,
            Tok::Ident(name) => {
                name == "T"
                    || name == "vac"
                    || self.odd_index(name, "S").is_some()
                    || alg.gen_id(name).is_some()
                    || alg.definition(name).is_some()
            }
            _ => false,
        };
        let starts = matches!(next, Tok::Ident(_) | Tok::Sym('('));
        !(starts && (operands < 2 || fieldish))
    }

    /// One operand of `: ... :`: derivative prefixes followed by a field primary.
    fn operand(&mut self) -> Result<FieldExpr> {
        let at = self.pos;
        let mut ops = Vec::new();
        loop {
            if let Tok::Ident(name) = self.peek().clone() {
                let letter = if name == "T" {
                    Some(Letter::T)
                } else {
                    self.odd_index(&name, "S").map(Letter::S)
                };
                if let Some(l) = letter {
                    self.next();
                    let mut times = 1;
                    if *self.peek() == Tok::Sym('^') {
                        self.next();
                        match self.next().tok {
                            Tok::Num(k) => times = k.try_into().unwrap_or(0u32),
                            _ => {
                                self.pos -= 1;
                                return self.err("expected an integer exponent");
                            }
                        }
                    }
                    for _ in 0..times {
                        ops.push(l);
                    }
                    continue;
                }
            }
            break;
        }
        let mut word = Op::new();
        word.insert(ops.clone(), Scalar::one());
        self.check_word(&word, at)?;
        let v = match self.peek() {
            Tok::Ident(_) | Tok::Sym('(') | Tok::Sym(':') => self.primary()?,
            _ => return self.err("expected a field inside `: :`"),
        };
        let mut f = match v {
            Val::Field(f) => f,
            Val::Op(_) => return self.err("operands of `: :` must be fields"),
        };
        for l in ops.iter().rev() {
            f = match *l {
                Letter::T => f.apply_even_operator(|e| self.b.apply_t(e)),
                Letter::S(i) => f.apply_odd_operator(i, |e| self.b.apply_s(i, e)),
                _ => unreachable!("only derivations appear as prefixes"),
            };
        }
        field_only(&f).ok_or_else(|| Error::Syntax {
            line: self.toks[self.pos].line,
            col: self.toks[self.pos].col,
            msg: "operands of `: :` must not carry parameters".into(),
        })
    }
}

fn scale_val(v: Val, k: &Scalar) -> Val {
    match v {
        Val::Op(mut o) => {
            for s in o.values_mut() {
                *s = &*s * k;
            }
            o.retain(|_, s| !s.is_zero());
            Val::Op(o)
        }
        Val::Field(f) => Val::Field(f.scaled(k)),
    }
}

fn field_only(p: &Bracket) -> Option<FieldExpr> {
    let mut out = FieldExpr::zero();
    for (m, e) in p.terms() {
        if *m != LMono::ONE {
            return None;
        }
        out.add(e);
    }
    Some(out)
}

/// Reports an unbalanced `(` or `:` at the offending delimiter, before any name is
/// resolved.
fn check_delimiters(toks: &[Token]) -> Result<()> {
    let mut open: Vec<&Token> = Vec::new();
    let mut colons: Vec<&Token> = Vec::new();
    for t in toks {
        match t.tok {
            Tok::Sym('(') => open.push(t),
            Tok::Sym(')') => {
                if open.pop().is_none() {
                    return Err(Error::Syntax { line: t.line, col: t.col, msg: "unmatched `)`".into() });
                }
            }
            Tok::Sym(':') => colons.push(t),
            _ => {}
        }
    }
    if let Some(t) = open.last() {
        return Err(Error::Syntax { line: t.line, col: t.col, msg: "unclosed `(`".into() });
    }
    if colons.len() % 2 == 1 {
        let t = colons[0];
        return Err(Error::Syntax { line: t.line, col: t.col, msg: "unclosed `:`".into() });
    }
    Ok(())
}

/// Parses a Λ-polynomial with expression coefficients.
pub fn parse_poly_with<B: ExprBuilder>(b: &B, text: &str, line: usize) -> Result<Bracket> {
    let toks = lex(text, line)?;
    check_delimiters(&toks)?;
    let mut p = Parser { b, toks, pos: 0, depth: 0 };
    let v = p.sum()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(p.to_field(v))
}

/// Parses a field expression (no parameters `lambda`, `chi`) into canonical form.
pub fn parse_expr_with<B: ExprBuilder>(b: &B, text: &str) -> Result<FieldExpr> {
    let p = parse_poly_with(b, text, 1)?;
    field_only(&p).ok_or_else(|| {
        Error::invalid(format!("`{text}` contains lambda or chi; expected a field expression"))
    })
}

/// Parses a field expression over `alg` into canonical form.
pub fn parse_expr(alg: &Algebra, text: &str) -> Result<FieldExpr> {
    parse_expr_with(&Engine::new(alg), text)
}

/// Parses a Λ-polynomial over `alg` into canonical form.
pub fn parse_poly(alg: &Algebra, text: &str) -> Result<Bracket> {
    parse_poly_with(&Engine::new(alg), text, 1)
}

// --------------------------------------------------------------------------------------
// algebra files

fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t),
    };
    let r = match t.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| Error::invalid(format!("bad number `{text}`")))?;
            let b: BigInt = b.trim().parse().map_err(|_| Error::invalid(format!("bad number `{text}`")))?;
            if b == BigInt::from(0) {
                return Err(Error::invalid("zero denominator"));
            }
            BigRational::new(a, b)
        }
        None => BigRational::from_integer(
            t.parse().map_err(|_| Error::invalid(format!("bad number `{text}`")))?,
        ),
    };
    Ok(if neg { -r } else { r })
}

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col: 1, msg: msg.into() }
}

/// Raw bracket declaration collected before the table is canonicalised.
struct RawEntry {
    left: u16,
    right: u16,
    text: String,
    line: usize,
}

/// Parses an algebra definition file and validates the result.
pub fn parse_algebra(text: &str) -> Result<Algebra> {
    let mut section = String::new();
    let mut header: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut gen_lines = Vec::new();
    let mut bracket_lines = Vec::new();
    let mut defs = Vec::new();
    let mut conformal = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with('[') && body.ends_with(']') && !body.contains(',') {
            section = body[1..body.len() - 1].trim().to_string();
            continue;
        }
        match section.as_str() {
            "header" => {
                let (key, val) = body
                    .split_once('=')
                    .ok_or_else(|| syntax(line, "expected `key = value`"))?;
                header.insert(key.trim().to_string(), (val.trim().to_string(), line));
            }
            "generators" => gen_lines.push((body.to_string(), line)),
            "brackets" => bracket_lines.push((body.to_string(), line)),
            "definitions" => {
                let (key, val) = body
                    .split_once('=')
                    .ok_or_else(|| syntax(line, "expected `name = expression`"))?;
                defs.push((key.trim().to_string(), val.trim().to_string()));
            }
            "conformal" => {
                conformal.extend(body.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(String::from));
            }
            "" => return Err(syntax(line, "declaration outside of any section")),
            other => return Err(syntax(line, format!("unknown section `[{other}]`"))),
        }
    }
    let get = |key: &str| header.get(key).map(|(v, l)| (v.as_str(), *l));
    let name = get("name").map(|x| x.0).unwrap_or("unnamed");
    let case = match get("case") {
        Some(("W", _)) => Case::W,
        Some(("K", _)) => Case::K,
        Some((other, l)) => return Err(syntax(l, format!("case must be W or K, got `{other}`"))),
        None => return Err(Error::invalid("header needs `case = W|K`")),
    };
    let n: u8 = match get("N") {
        Some((v, l)) => v.parse().map_err(|_| syntax(l, "N must be a small integer"))?,
        None => return Err(Error::invalid("header needs `N = ...`")),
    };
    if n > crate::superindex::MAX_N {
        return Err(Error::invalid(format!("N = {n} exceeds the supported maximum")));
    }
    let mut alg = Algebra::new(name, case, n);
    if let Some((v, _)) = get("params") {
        for p in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            alg.add_param(p);
        }
    }
    if let Some((v, l)) = get("imaginary") {
        alg.imaginary = match v {
            "true" | "yes" => true,
            "false" | "no" => false,
            _ => return Err(syntax(l, "imaginary must be true or false")),
        };
    }
    if let Some((v, _)) = get("description") {
        alg.description = v.to_string();
    }
    // generators: `name parity [weight] [central] [quotient=expr]`
    let mut quotients = Vec::new();
    for (body, line) in &gen_lines {
        let mut parts = body.split_whitespace();
        let gname = parts.next().ok_or_else(|| syntax(*line, "missing generator name"))?;
        let parity = match parts.next() {
            Some("even") | Some("0") => 0,
            Some("odd") | Some("1") => 1,
            _ => return Err(syntax(*line, "parity must be even or odd")),
        };
        let mut weight = None;
        let mut central = false;
        for p in parts {
            if p == "central" {
                central = true;
            } else if let Some(q) = p.strip_prefix("quotient=") {
                quotients.push((gname.to_string(), q.to_string(), *line));
            } else if let Some(w) = p.strip_prefix("weight=") {
                weight = Some(parse_rational(w).map_err(|_| syntax(*line, "bad weight"))?);
            } else {
                weight = Some(parse_rational(p).map_err(|_| syntax(*line, format!("unexpected `{p}`")))?);
            }
        }
        alg.add_generator(gname, parity, weight, central).map_err(|e| match e {
            Error::InvalidInput(m) => syntax(*line, m),
            e => e,
        })?;
    }
    for (gname, q, line) in quotients {
        let s = parse_scalar(&alg, &q).map_err(|_| syntax(line, "quotient must be a scalar"))?;
        let id = alg.gen_id(&gname).expect("declared above");
        alg.gens[id as usize].quotient = Some(s);
    }
    alg.definitions = defs;
    alg.conformal = conformal;
    // brackets: `[a, b] = poly`
    let mut raw = Vec::new();
    for (body, line) in &bracket_lines {
        let (lhs, rhs) = body
            .split_once('=')
            .ok_or_else(|| syntax(*line, "expected `[a, b] = expression`"))?;
        let lhs = lhs.trim();
        let inner = lhs
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| syntax(*line, "bracket left side must look like `[a, b]`"))?;
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| syntax(*line, "bracket left side must look like `[a, b]`"))?;
        let ga = alg.gen_id(a.trim()).ok_or_else(|| Error::UnknownGenerator(a.trim().into()))?;
        let gb = alg.gen_id(b.trim()).ok_or_else(|| Error::UnknownGenerator(b.trim().into()))?;
        raw.push(RawEntry { left: ga, right: gb, text: rhs.trim().to_string(), line: *line });
    }
    install_brackets(&mut alg, raw)?;
    Ok(alg)
}

/// Parses a scalar (parameters, rationals and `i`).
pub fn parse_scalar(alg: &Algebra, text: &str) -> Result<Scalar> {
    let p = parse_poly_with(&RawBuilder(alg), text, 1)?;
    let e = field_only(&p).ok_or_else(|| Error::invalid("expected a scalar"))?;
    if !e.is_scalar() {
        return Err(Error::invalid("expected a scalar"));
    }
    Ok(e.vacuum_coeff())
}

fn install_brackets(alg: &mut Algebra, raw: Vec<RawEntry>) -> Result<()> {
    let mut table: BTreeMap<(u16, u16), (Bracket, bool)> = BTreeMap::new();
    for e in &raw {
        let p = parse_poly_with(&RawBuilder(alg), &e.text, e.line)?;
        let key = (e.left.min(e.right), e.left.max(e.right));
        if table.contains_key(&key) {
            return Err(syntax(e.line, "bracket declared twice"));
        }
        table.insert(key, (p, e.left > e.right));
    }
    let raw_table: BTreeMap<(u16, u16), Bracket> = table
        .iter()
        .filter(|(_, (_, t))| !*t)
        .map(|(k, (p, _))| (*k, p.clone()))
        .collect();
    alg.brackets = raw_table;
    canonicalize_table(alg)?;
    // transposed declarations are converted by skew-symmetry
    let transposed: Vec<_> = table.into_iter().filter(|(_, (_, t))| *t).collect();
    if !transposed.is_empty() {
        let mut converted = Vec::new();
        {
            let eng = Engine::new(alg);
            for ((i, j), (p, _)) in transposed {
                let canon = p.map_coeffs(|e| eng.normalize(e));
                let pg = alg.gen(i).parity as usize;
                let ph = alg.gen(j).parity as usize;
                let s = if (pg * ph + alg.n as usize).is_multiple_of(2) { -1 } else { 1 };
                converted.push(((i, j), eng.subst_minus_nabla(&canon).scaled(&Scalar::from_int(s))));
            }
        }
        for (k, v) in converted {
            alg.brackets.insert(k, v);
        }
        canonicalize_table(alg)?;
    }
    validate(alg)
}

/// Rewrites every stored structure constant into canonical form, iterating until the
/// table is stable.
pub fn canonicalize_table(alg: &mut Algebra) -> Result<()> {
    for _ in 0..8 {
        let next: BTreeMap<(u16, u16), Bracket> = {
            let eng = Engine::new(alg);
            alg.brackets
                .iter()
                .map(|(k, p)| (*k, p.map_coeffs(|e| eng.normalize(e))))
                .filter(|(_, p)| !p.is_zero())
                .collect()
        };
        if next == alg.brackets {
            return Ok(());
        }
        alg.brackets = next;
    }
    Err(Error::invalid("structure constants do not reach a stable canonical form"))
}

/// Load-time checks: parities, central generators and skew-symmetry of diagonal entries.
pub fn validate(alg: &Algebra) -> Result<()> {
    for &(i, j) in alg.brackets.keys() {
        if alg.gen(i).central || alg.gen(j).central {
            return Err(Error::invalid(format!(
                "central generator in bracket [{}, {}]",
                alg.gen(i).name,
                alg.gen(j).name
            )));
        }
    }
    let bad = crate::engine::parity_check(alg);
    if let Some(b) = bad.first() {
        return Err(Error::invalid(format!("bracket {b} has the wrong parity")));
    }
    let eng = Engine::new(alg);
    for &(i, j) in alg.brackets.keys() {
        if i == j {
            let g = FieldExpr::atom(Atom::gen(i));
            let r = eng.skew_residual(&g, &g)?;
            if !r.is_zero() {
                return Err(Error::invalid(format!(
                    "[{0}_Λ {0}] violates skew-symmetry: residual {1}",
                    alg.gen(i).name,
                    alg.render_bracket(&r)
                )));
            }
        }
    }
    Ok(())
}

/// Renders an algebra as a definition file accepted by [`parse_algebra`].
pub fn render_algebra(alg: &Algebra) -> String {
    let mut out = String::new();
    out.push_str("[header]\n");
    out.push_str(&format!("name = {}\n", alg.name));
    out.push_str(&format!("case = {}\n", alg.case));
    out.push_str(&format!("N = {}\n", alg.n));
    if !alg.params.is_empty() {
        out.push_str(&format!("params = {}\n", alg.params.join(", ")));
    }
    if alg.imaginary {
        out.push_str("imaginary = true\n");
    }
    if !alg.description.is_empty() {
        out.push_str(&format!("description = {}\n", alg.description));
    }
    out.push_str("\n[generators]\n");
    for g in &alg.gens {
        let mut line = format!("{} {}", g.name, if g.parity == 1 { "odd" } else { "even" });
        if let Some(w) = &g.weight {
            line.push_str(&format!(" {w}"));
        }
        if g.central {
            line.push_str(" central");
        }
        if let Some(q) = &g.quotient {
            line.push_str(&format!(" quotient={}", q.to_string().replace(' ', "")));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("\n[brackets]\n");
    for (&(i, j), p) in &alg.brackets {
        out.push_str(&format!(
            "[{}, {}] = {}\n",
            alg.gen(i).name,
            alg.gen(j).name,
            alg.render_bracket(p)
        ));
    }
    if !alg.definitions.is_empty() {
        out.push_str("\n[definitions]\n");
        for (k, v) in &alg.definitions {
            out.push_str(&format!("{k} = {v}\n"));
        }
    }
    if !alg.conformal.is_empty() {
        out.push_str("\n[conformal]\n");
        out.push_str(&alg.conformal.join(", "));
        out.push('\n');
    }
    out
}
