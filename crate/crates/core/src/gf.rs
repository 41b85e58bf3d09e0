//! Finite fields `F_{p^k}` realized as `F_p[x]/(modulus)`.
//!
//! Elements are packed integers `Σ c_i p^i` over the power basis of the
//! stored modulus. Multiplication goes through discrete-log tables built from
//! a fixed generator, so `a^{q^n}` and inverses are a table lookup.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A packed finite-field element.
pub type Fe = u32;

const ZERO_LOG: u32 = u32::MAX;
const ADD_TABLE_LIMIT: u32 = 1024;
const ORDER_LIMIT: u64 = 1 << 22;

#[derive(Debug, Clone)]
pub struct Gf {
    p: u32,
    s: u32,
    m: u32,
    degree: u32,
    order: u32,
    modulus: Vec<u32>,
    generator: Fe,
    exp: Vec<Fe>,
    log: Vec<u32>,
    neg: Vec<Fe>,
    add: Option<Vec<u16>>,
}

impl PartialEq for Gf {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.s == other.s && self.m == other.m && self.modulus == other.modulus
    }
}

impl Gf {
    /// Builds `F_{q^m}` with `q = p^s` from an explicit monic modulus of degree `s·m`
    /// over `F_p` (coefficients low to high). Irreducibility is verified.
    pub fn with_modulus(p: u32, s: u32, m: u32, modulus: Vec<u32>) -> Result<Self> {
        check_prime(p)?;
        let degree = s
            .checked_mul(m)
            .filter(|d| *d >= 1)
            .ok_or_else(|| Error::Config(format!("bad extension degree s={s}, m={m}")))?;
        if modulus.len() != degree as usize + 1 || *modulus.last().unwrap() != 1 {
            return Err(Error::Config(format!(
                "modulus must be monic of degree {degree}, got {modulus:?}"
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::Config(format!("modulus coefficients must lie in [0, {p})")));
        }
        let order = (p as u64).pow(degree);
        if order > ORDER_LIMIT {
            return Err(Error::Config(format!(
                "field of order {order} is too large for log tables"
            )));
        }
        if !is_irreducible(p, &modulus) {
            return Err(Error::Config(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        let order = order as u32;
        let mut gf = Gf {
            p,
            s,
            m,
            degree,
            order,
            modulus,
            generator: 0,
            exp: Vec::new(),
            log: Vec::new(),
            neg: Vec::new(),
            add: None,
        };
        gf.generator = gf.find_generator();
        gf.build_tables();
        Ok(gf)
    }

    /// Builds `F_{q^m}` from the lexicographically first primitive polynomial.
    pub fn new(p: u32, s: u32, m: u32) -> Result<Self> {
        check_prime(p)?;
        let degree = s * m;
        if degree == 0 {
            return Err(Error::Config("extension degree must be positive".into()));
        }
        let modulus = first_primitive(p, degree)?;
        Self::with_modulus(p, s, m, modulus)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn s(&self) -> u32 {
        self.s
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    /// `q = p^s`, the size of the constant field.
    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.s)
    }
    /// Number of elements, `q^m`.
    pub fn order(&self) -> u32 {
        self.order
    }
    /// Degree of the stored modulus over `F_p`.
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn generator(&self) -> Fe {
        self.generator
    }

    #[inline]
    pub fn zero(&self) -> Fe {
        0
    }
    #[inline]
    pub fn one(&self) -> Fe {
        1
    }

    /// The image of an integer under `Z → F_p ⊆ F_{q^m}`.
    pub fn from_int(&self, n: i64) -> Fe {
        n.rem_euclid(self.p as i64) as Fe
    }

    /// Packs a coefficient vector over `F_p` (power basis, low to high).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fe> {
        if coeffs.len() > self.degree as usize {
            return Err(Error::Config(format!(
                "coefficient vector of length {} exceeds degree {}",
                coeffs.len(),
                self.degree
            )));
        }
        let mut acc: u32 = 0;
        for &c in coeffs.iter().rev() {
            acc = acc * self.p + c % self.p;
        }
        Ok(acc)
    }

    /// The coefficient vector of `a` over `F_p`, always of length `degree`.
    pub fn coeffs(&self, mut a: Fe) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.degree as usize);
        for _ in 0..self.degree {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match &self.add {
            Some(t) => t[(a * self.order + b) as usize] as Fe,
            None => self.add_digits(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Discrete log with respect to the stored generator (`None` for zero).
    #[inline]
    pub fn log(&self, a: Fe) -> Option<u32> {
        let l = self.log[a as usize];
        (l != ZERO_LOG).then_some(l)
    }

    /// `g^k` for the stored generator; `k` is reduced modulo `q^m - 1`.
    #[inline]
    pub fn exp(&self, k: u64) -> Fe {
        self.exp[(k % (self.order as u64 - 1)) as usize]
    }

    /// Multiplication where one factor is given by its logarithm.
    #[inline]
    pub(crate) fn mul_log(&self, log_a: u32, b: Fe) -> Fe {
        if b == 0 {
            return 0;
        }
        self.exp[(log_a + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a == 0 {
            return Err(Error::DivisionByApparentZero);
        }
        let n = self.order - 1;
        Ok(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    pub fn pow(&self, a: Fe, k: i64) -> Result<Fe> {
        if a == 0 {
            return if k > 0 {
                Ok(0)
            } else if k == 0 {
                Ok(1)
            } else {
                Err(Error::DivisionByApparentZero)
            };
        }
        let n = (self.order - 1) as i64;
        let e = ((self.log[a as usize] as i64) * k.rem_euclid(n)).rem_euclid(n);
        Ok(self.exp[e as usize])
    }

    /// The `q^n`-power map (the `n`-fold twist on constants); negative `n` inverts it.
    pub fn frobenius(&self, a: Fe, n: i64) -> Fe {
        if a == 0 {
            return 0;
        }
        let r = n.rem_euclid(self.m as i64) as u32;
        let nm = (self.order - 1) as u64;
        let mut mult: u64 = 1;
        let q = self.q() % nm.max(1);
        for _ in 0..r {
            mult = mult * q % nm;
        }
        let l = self.log[a as usize] as u64;
        self.exp[(l * mult % nm) as usize]
    }

    /// True when `a` lies in the constant field `F_q`.
    pub fn in_base_field(&self, a: Fe) -> bool {
        self.frobenius(a, 1) == a
    }

    /// Elements of `F_q^×` in increasing packed order.
    pub fn base_units(&self) -> Vec<Fe> {
        (1..self.order).filter(|&a| self.in_base_field(a)).collect()
    }

    /// Roots in `F_{q^m}` of a polynomial with `F_{q^m}` coefficients (low to high),
    /// each with its multiplicity, in increasing packed order.
    pub fn poly_roots(&self, coeffs: &[Fe]) -> Vec<(Fe, usize)> {
        let mut out = Vec::new();
        let mut poly: Vec<Fe> = coeffs.to_vec();
        while poly.last() == Some(&0) {
            poly.pop();
        }
        if poly.len() <= 1 {
            return out;
        }
        for a in 0..self.order {
            let mut mult = 0;
            loop {
                if poly.len() <= 1 || self.eval_poly(&poly, a) != 0 {
                    break;
                }
                poly = self.synthetic_div(&poly, a);
                mult += 1;
            }
            if mult > 0 {
                out.push((a, mult));
            }
        }
        out
    }

    pub fn eval_poly(&self, coeffs: &[Fe], x: Fe) -> Fe {
        coeffs.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    fn synthetic_div(&self, coeffs: &[Fe], a: Fe) -> Vec<Fe> {
        let d = coeffs.len() - 1;
        let mut out = vec![0; d];
        let mut carry = 0;
        for i in (1..=d).rev() {
            carry = self.add(coeffs[i], self.mul(carry, a));
            out[i - 1] = carry;
        }
        out
    }

    fn add_digits(&self, mut a: Fe, mut b: Fe) -> Fe {
        let p = self.p;
        let mut r = 0;
        let mut pw = 1;
        for _ in 0..self.degree {
            r += ((a % p + b % p) % p) * pw;
            pw *= p;
            a /= p;
            b /= p;
        }
        r
    }

    fn neg_digits(&self, mut a: Fe) -> Fe {
        let p = self.p;
        let mut r = 0;
        let mut pw = 1;
        for _ in 0..self.degree {
            r += ((p - a % p) % p) * pw;
            pw *= p;
            a /= p;
        }
        r
    }

    /// Multiplication in `F_p[x]/(modulus)` without tables.
    fn ring_mul(&self, a: Fe, b: Fe) -> Fe {
        let pa = self.coeffs(a);
        let pb = self.coeffs(b);
        let prod = poly_mulmod(self.p, &pa, &pb, &self.modulus);
        let mut acc = 0;
        for &c in prod.iter().rev() {
            acc = acc * self.p + c;
        }
        acc
    }

    fn ring_pow(&self, a: Fe, mut k: u64) -> Fe {
        let mut base = a;
        let mut acc = 1;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.ring_mul(acc, base);
            }
            base = self.ring_mul(base, base);
            k >>= 1;
        }
        acc
    }

    fn find_generator(&self) -> Fe {
        let n = (self.order - 1) as u64;
        let primes = prime_factors(n);
        let x = if self.degree == 1 { 2 % self.order } else { self.p };
        let mut candidates = core::iter::once(x).chain(1..self.order);
        candidates
            .find(|&a| {
                a != 0
                    && (n == 1 || self.ring_pow(a, n) == 1)
                    && primes.iter().all(|&r| n == 1 || self.ring_pow(a, n / r) != 1)
            })
            .expect("a finite field has a primitive element")
    }

    fn build_tables(&mut self) {
        let n = (self.order - 1) as usize;
        let mut exp = vec![0u32; 2 * n.max(1)];
        let mut log = vec![ZERO_LOG; self.order as usize];
        let mut cur: Fe = 1;
        for i in 0..n.max(1) {
            exp[i] = cur;
            log[cur as usize] = i as u32;
            cur = self.ring_mul(cur, self.generator);
        }
        for i in n..2 * n {
            exp[i] = exp[i - n];
        }
        self.exp = exp;
        self.log = log;
        self.neg = (0..self.order).map(|a| self.neg_digits(a)).collect();
        if self.order <= ADD_TABLE_LIMIT {
            let o = self.order;
            let mut t = vec![0u16; (o * o) as usize];
            for a in 0..o {
                for b in 0..o {
                    t[(a * o + b) as usize] = self.add_digits(a, b) as u16;
                }
            }
            self.add = Some(t);
        }
    }
}

fn check_prime(p: u32) -> Result<()> {
    if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p.is_multiple_of(d)) {
        return Err(Error::Config(format!("{p} is not prime")));
    }
    Ok(())
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mulmod(p: u32, a: &[u32], b: &[u32], modulus: &[u32]) -> Vec<u32> {
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let mut r: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    poly_rem(p, &mut r, modulus);
    r
}

/// Reduces `r` modulo a monic `modulus` in place.
fn poly_rem(p: u32, r: &mut Vec<u32>, modulus: &[u32]) {
    let d = modulus.len() - 1;
    trim(r);
    while r.len() > d {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - d;
        for (i, &mc) in modulus.iter().enumerate() {
            let sub = (lead as u64 * mc as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        trim(r);
    }
}

fn poly_rem_general(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let lead_inv = inv_mod(*b.last().unwrap(), p);
    let d = b.len() - 1;
    while r.len() > d && !r.is_empty() {
        let coef = (*r.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
        let shift = r.len() - 1 - d;
        for (i, &bc) in b.iter().enumerate() {
            let sub = (coef as u64 * bc as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        trim(&mut r);
    }
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut base = a as u64 % p as u64;
    let mut k = p - 2;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        k >>= 1;
    }
    acc as u32
}

fn poly_gcd(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem_general(p, &x, &y);
        x = y;
        y = r;
    }
    x
}

/// `h^p mod modulus`.
fn poly_pow_p(p: u32, h: &[u32], modulus: &[u32]) -> Vec<u32> {
    let mut acc = vec![1u32];
    let mut base = h.to_vec();
    let mut k = p;
    while k > 0 {
        if k & 1 == 1 {
            acc = poly_mulmod(p, &acc, &base, modulus);
        }
        base = poly_mulmod(p, &base, &base, modulus);
        k >>= 1;
    }
    acc
}

/// Rabin's irreducibility test for a monic polynomial over `F_p`.
pub(crate) fn is_irreducible(p: u32, modulus: &[u32]) -> bool {
    let k = modulus.len() - 1;
    if k == 1 {
        return true;
    }
    if modulus[0] == 0 {
        return false;
    }
    let x = vec![0u32, 1];
    // frob[j] = x^{p^j} mod modulus
    let mut frob = Vec::with_capacity(k + 1);
    frob.push(x.clone());
    for j in 1..=k {
        let next = poly_pow_p(p, &frob[j - 1], modulus);
        frob.push(next);
    }
    let mut last = frob[k].clone();
    trim(&mut last);
    if last != x {
        return false;
    }
    for r in prime_factors(k as u64) {
        let mut h = frob[k / r as usize].clone();
        h.resize(h.len().max(2), 0);
        h[1] = (h[1] + p - 1) % p;
        trim(&mut h);
        let g = poly_gcd(p, &h, modulus);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn first_primitive(p: u32, degree: u32) -> Result<Vec<u32>> {
    let total = (p as u64).pow(degree);
    if total > ORDER_LIMIT {
        return Err(Error::Config(format!(
            "field of order {total} is too large for log tables"
        )));
    }
    let n = total - 1;
    let primes = prime_factors(n);
    for idx in 0..total {
        let mut modulus = Vec::with_capacity(degree as usize + 1);
        let mut t = idx;
        for _ in 0..degree {
            modulus.push((t % p as u64) as u32);
            t /= p as u64;
        }
        modulus.push(1);
        if modulus[0] == 0 || !is_irreducible(p, &modulus) {
            continue;
        }
        let x: Vec<u32> = if degree == 1 {
            vec![(p - modulus[0]) % p]
        } else {
            vec![0, 1]
        };
        let pow = |k: u64| -> Vec<u32> {
            let mut acc = vec![1u32];
            let mut base = x.clone();
            let mut k = k;
            while k > 0 {
                if k & 1 == 1 {
                    acc = poly_mulmod(p, &acc, &base, &modulus);
                }
                base = poly_mulmod(p, &base, &base, &modulus);
                k >>= 1;
            }
            trim(&mut acc);
            acc
        };
        if primes.iter().all(|&r| pow(n / r) != [1]) {
            return Ok(modulus);
        }
    }
    Err(Error::Config(format!(
        "no primitive polynomial of degree {degree} over F_{p}"
    )))
}
