//! Exact arithmetic in the cyclotomic field Q(ζ_M).
//!
//! Elements are polynomials in ζ reduced modulo the M-th cyclotomic
//! polynomial Φ_M, stored on the basis ζ^0, …, ζ^(φ(M)−1). Reduction is
//! canonical: equal field elements have equal coefficient vectors, so `==`
//! on `Cyclo` is field equality.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

pub type Rat = BigRational;

fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Monic integer coefficients of Φ_M, index = power of x.
fn cyclotomic_poly(m: u32) -> Vec<BigInt> {
    // x^m - 1 divided by the product of Φ_d over proper divisors d of m.
    let mut num: Vec<BigInt> = vec![BigInt::zero(); m as usize + 1];
    num[0] = BigInt::from(-1);
    num[m as usize] = BigInt::one();
    for d in 1..m {
        if m % d == 0 {
            let phi_d = cyclotomic_poly_cached(d);
            num = poly_div_exact(&num, &phi_d);
        }
    }
    num
}

fn cyclotomic_poly_cached(m: u32) -> Vec<BigInt> {
    static CACHE: Lazy<Mutex<HashMap<u32, Vec<BigInt>>>> = Lazy::new(|| Mutex::new(HashMap::new()));
    if let Some(p) = CACHE.lock().unwrap().get(&m) {
        return p.clone();
    }
    let p = cyclotomic_poly(m);
    CACHE.lock().unwrap().insert(m, p.clone());
    p
}

/// Exact division of integer polynomials (remainder must vanish).
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dd = den.len() - 1;
    let mut rem: Vec<BigInt> = num.to_vec();
    let dn = rem.len() - 1;
    assert!(den[dd].is_one(), "divisor must be monic");
    let mut quot = vec![BigInt::zero(); dn - dd + 1];
    for k in (0..=dn - dd).rev() {
        let c = rem[k + dd].clone();
        quot[k] = c.clone();
        if c.is_zero() {
            continue;
        }
        for j in 0..=dd {
            let t = &den[j] * &c;
            rem[k + j] -= t;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "non-exact polynomial division");
    quot
}

/// An element of Q(ζ_M) in reduced canonical form.
#[derive(Clone, PartialEq, Eq)]
pub struct Cyclo {
    order: u32,
    /// Length φ(M); coefficient of ζ^k at index k.
    coeffs: Vec<Rat>,
}

impl std::fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cyclo(M={})[", self.order)?;
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}ζ^{}", c, k)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, "]")
    }
}

impl Cyclo {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn degree(order: u32) -> usize {
        cyclotomic_poly_cached(order).len() - 1
    }

    pub fn zero(order: u32) -> Self {
        Cyclo { order, coeffs: vec![Rat::zero(); Self::degree(order)] }
    }

    pub fn one(order: u32) -> Self {
        Self::from_rational(order, Rat::one())
    }

    pub fn from_rational(order: u32, r: Rat) -> Self {
        let mut c = Self::zero(order);
        c.coeffs[0] = r;
        c
    }

    pub fn from_i64(order: u32, n: i64) -> Self {
        Self::from_rational(order, rat_i64(n))
    }

    /// ζ^k (any integer k, reduced mod M and then mod Φ_M).
    pub fn zeta_pow(order: u32, k: i64) -> Self {
        let m = order as i64;
        let k = k.rem_euclid(m) as usize;
        let mut raw = vec![Rat::zero(); order as usize];
        raw[k] = Rat::one();
        Self::reduce(order, raw)
    }

    /// Reduce a raw polynomial in ζ (any length) modulo Φ_M.
    fn reduce(order: u32, mut raw: Vec<Rat>) -> Self {
        let phi = cyclotomic_poly_cached(order);
        let d = phi.len() - 1;
        // substitute x^d = -(phi[0] + ... + phi[d-1] x^{d-1}) repeatedly
        while raw.len() > d {
            let top = raw.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let k = raw.len() - d; // top was coefficient of x^{k+d}
            for j in 0..d {
                let t = Rat::from_integer(phi[j].clone()) * &top;
                raw[k + j] -= t;
            }
        }
        raw.resize(d, Rat::zero());
        Cyclo { order, coeffs: raw }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, rhs: &Cyclo) -> Cyclo {
        assert_eq!(self.order, rhs.order, "cyclotomic order mismatch");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Cyclo { order: self.order, coeffs }
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo { order: self.order, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn sub(&self, rhs: &Cyclo) -> Cyclo {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Cyclo) -> Cyclo {
        assert_eq!(self.order, rhs.order, "cyclotomic order mismatch");
        let mut raw = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                raw[i + j] += a * b;
            }
        }
        Self::reduce(self.order, raw)
    }

    pub fn scale(&self, r: &Rat) -> Cyclo {
        Cyclo { order: self.order, coeffs: self.coeffs.iter().map(|a| a * r).collect() }
    }

    /// Complex conjugation: ζ ↦ ζ^{M−1}.
    pub fn conj(&self) -> Cyclo {
        let m = self.order as i64;
        let mut acc = Cyclo::zero(self.order);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&Cyclo::zeta_pow(self.order, -(k as i64) % m).scale(c));
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x]/(Φ_M).
    pub fn inv(&self) -> Option<Cyclo> {
        if self.is_zero() {
            return None;
        }
        let phi: Vec<Rat> = cyclotomic_poly_cached(self.order)
            .iter()
            .map(|c| Rat::from_integer(c.clone()))
            .collect();
        // extended gcd of self (as poly) and phi
        let (mut r0, mut r1) = (phi, trim(self.coeffs.clone()));
        let (mut s0, mut s1) = (vec![Rat::zero()], vec![Rat::one()]);
        while !poly_is_zero(&r1) {
            let (q, r) = poly_divmod(&r0, &r1);
            let s = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        // r0 = gcd (a nonzero constant, since Φ_M is irreducible over Q)
        if r0.len() != 1 || r0[0].is_zero() {
            return None;
        }
        let inv_lead = r0[0].recip();
        let coeffs: Vec<Rat> = s0.iter().map(|c| c * &inv_lead).collect();
        Some(Self::reduce(self.order, coeffs))
    }

    pub fn to_complex(&self) -> num_complex::Complex64 {
        use std::f64::consts::TAU;
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let ang = TAU * (k as f64) / (self.order as f64);
            acc += rat_to_f64(c) * num_complex::Complex64::new(ang.cos(), ang.sin());
        }
        acc
    }

    /// The rational part if the element is rational, else None.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // good enough for the coefficient sizes this engine produces
    let num = r.numer();
    let den = r.denom();
    let fnum: f64 = num.to_string().parse().unwrap_or(f64::NAN);
    let fden: f64 = den.to_string().parse().unwrap_or(f64::NAN);
    fnum / fden
}

fn trim(mut p: Vec<Rat>) -> Vec<Rat> {
    while p.len() > 1 && p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
    p
}

fn poly_is_zero(p: &[Rat]) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut out = vec![Rat::zero(); n];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    trim(out)
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_divmod(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let b = trim(b.to_vec());
    let mut rem = trim(a.to_vec());
    let db = b.len() - 1;
    if rem.len() <= db && !(rem.len() == b.len()) {
        return (vec![Rat::zero()], rem);
    }
    let mut quot = vec![Rat::zero(); rem.len().saturating_sub(db).max(1)];
    while rem.len() > db || (rem.len() == b.len() && !poly_is_zero(&rem)) {
        let k = rem.len() - 1 - db;
        let c = rem.last().unwrap() / &b[db];
        quot[k] = c.clone();
        for j in 0..=db {
            let t = &b[j] * &c;
            rem[k + j] -= t;
        }
        rem = trim(rem);
        if rem.len() <= db && rem.len() < b.len() {
            break;
        }
        if poly_is_zero(&rem) {
            break;
        }
    }
    (trim(quot), trim(rem))
}
