//! Central charges computed on a Fock space of free boson and free fermion modes, with
//! no use of the bracket engine, compared against the engine's values.
//!
//! Boson: `[α_m, α_n] = m δ_{m+n,0}`, `α_n|0⟩ = 0` for `n ≥ 0`.
//! Fermion: `{ψ_r, ψ_s} = δ_{r+s,0}`, `r ∈ ½ + ℤ`, `ψ_r|0⟩ = 0` for `r > 0`.
//! The central charge is read off from `⟨0|L_2 L_{-2}|0⟩ = c/2`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use susyva::engine::Engine;
use susyva::library;
use susyva::parse::parse_expr_with;
use susyva::scalar::Scalar;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Basis state: sorted boson creation indices and sorted fermion creation indices, the
/// latter stored doubled (`2r`).
type Basis = (Vec<i64>, Vec<i64>);

#[derive(Clone, Default)]
struct State(BTreeMap<Basis, BigRational>);

/// Largest mode index kept in the normally ordered sums; enough for states of
/// energy at most 2.
const CUTOFF: i64 = 8;

impl State {
    fn vacuum() -> State {
        let mut m = BTreeMap::new();
        m.insert((Vec::new(), Vec::new()), BigRational::one());
        State(m)
    }

    fn add(&mut self, b: Basis, c: BigRational) {
        let e = self.0.entry(b.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&b);
        }
    }

    fn plus(&mut self, other: &State, k: &BigRational) {
        for (b, c) in &other.0 {
            self.add(b.clone(), c * k);
        }
    }

    fn alpha(&self, n: i64) -> State {
        let mut out = State::default();
        for ((bos, fer), c) in &self.0 {
            if n < 0 {
                let mut b = bos.clone();
                let pos = b.partition_point(|&x| x <= n);
                b.insert(pos, n);
                out.add((b, fer.clone()), c.clone());
            } else if n > 0 {
                for i in 0..bos.len() {
                    if bos[i] == -n {
                        let mut b = bos.clone();
                        b.remove(i);
                        out.add((b, fer.clone()), c * BigRational::from_integer(n.into()));
                    }
                }
            }
        }
        out
    }

    /// `ψ_r` with `r2 = 2r`.
    fn psi(&self, r2: i64) -> State {
        let mut out = State::default();
        for ((bos, fer), c) in &self.0 {
            if r2 < 0 {
                if fer.contains(&r2) {
                    continue;
                }
                let pos = fer.partition_point(|&x| x < r2);
                let mut f = fer.clone();
                f.insert(pos, r2);
                let sign = if pos % 2 == 0 { c.clone() } else { -c.clone() };
                out.add((bos.clone(), f), sign);
            } else {
                for i in 0..fer.len() {
                    if fer[i] == -r2 {
                        let mut f = fer.clone();
                        f.remove(i);
                        let sign = if i % 2 == 0 { c.clone() } else { -c.clone() };
                        out.add((bos.clone(), f), sign);
                    }
                }
            }
        }
        out
    }

    fn vacuum_coeff(&self) -> BigRational {
        self.0.get(&(Vec::new(), Vec::new())).cloned().unwrap_or_else(BigRational::zero)
    }
}

/// Virasoro mode `L_n` of `½:αα: + β∂α` (boson) plus `½:∂ψ ψ:` (fermion, if enabled).
fn virasoro(n: i64, beta: &BigRational, fermion: bool, v: &State) -> State {
    let half = q(1, 2);
    let mut out = State::default();
    for k in -CUTOFF..=CUTOFF {
        let (a, b) = (n - k, k);
        let (l, r) = if a <= b { (a, b) } else { (b, a) };
        out.plus(&v.alpha(r).alpha(l), &half);
    }
    // ∂α(z) = Σ (-n-1) α_n z^{-n-2}
    out.plus(&v.alpha(n), &(beta * BigRational::from_integer((-n - 1).into())));
    if fermion {
        // ½ Σ_s (-s-½) :ψ_s ψ_{n-s}:
        for s2 in (-2 * CUTOFF - 1..=2 * CUTOFF + 1).step_by(2) {
            let t2 = 2 * n - s2;
            let coeff = &half * q(-s2 - 1, 2);
            if s2 <= t2 {
                out.plus(&v.psi(t2).psi(s2), &coeff);
            } else {
                out.plus(&v.psi(s2).psi(t2), &-coeff);
            }
        }
    }
    out
}

fn fock_central_charge(beta: &BigRational, fermion: bool) -> BigRational {
    let v = virasoro(-2, beta, fermion, &State::vacuum());
    virasoro(2, beta, fermion, &v).vacuum_coeff() * q(2, 1)
}

#[test]
fn fock_oracle_reproduces_textbook_values() {
    // the oracle itself: c = 1 - 12β² for the boson, 1/2 for the fermion
    for beta in [q(0, 1), q(1, 2), q(1, 3), q(-2, 1)] {
        let want = q(1, 1) - q(12, 1) * &beta * &beta;
        assert_eq!(fock_central_charge(&beta, false), want);
        assert_eq!(fock_central_charge(&beta, true), want + q(1, 2));
    }
    // L_0 ψ_{-1/2}|0⟩ = ½ ψ_{-1/2}|0⟩ fixes the fermion normalisation
    let v = State::vacuum().psi(-1);
    let l0 = virasoro(0, &q(0, 1), true, &v);
    let mut diff = l0;
    diff.plus(&v, &q(-1, 2));
    assert!(diff.0.is_empty());
}

#[test]
fn free_boson_with_background_charge_matches_engine() {
    let alg = library::get("free-boson").unwrap();
    let eng = Engine::new(&alg);
    for beta in [q(0, 1), q(1, 2), q(2, 3), q(-3, 1)] {
        let l = parse_expr_with(&eng, &format!("1/2 :alpha alpha: + ({beta})*T alpha")).unwrap();
        let c = eng.central_charge(&[l]).unwrap();
        assert_eq!(c, Scalar::from_rational(fock_central_charge(&beta, false)), "beta = {beta}");
    }
}

/// The `θ⁰` part of `½ SG` for the B1 vector `G = :(SΨ)Ψ: + mTΨ` is the boson-fermion
/// Virasoro field with background charge `β = m/2`; the engine value must agree with
/// the Fock space at every `m`.
#[test]
fn boson_fermion_central_charge_matches_fock_space() {
    let alg = library::get("B1").unwrap();
    let eng = Engine::new(&alg);
    let g = library::conformal_vector(&alg).unwrap();
    let c = eng.central_charge(&g).unwrap();
    for m in [q(0, 1), q(1, 1), q(2, 1), q(1, 3), q(-5, 2)] {
        let at_m = c.substitute("m", &Scalar::from_rational(m.clone()));
        let beta = &m / q(2, 1);
        assert_eq!(at_m, Scalar::from_rational(fock_central_charge(&beta, true)), "m = {m}");
    }
}
