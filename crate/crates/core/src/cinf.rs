//! Precision-tracked elements of `K_{m,e} = F_{q^m}((θ^{-1/e}))`.
//!
//! An element is a finite set of terms `c·θ^{-n/e}` together with an absolute
//! precision `prec`: every exponent `n ≥ prec` is unknown. Writing `π = θ^{-1/e}`,
//! the stored exponent `n` is the power of `π`, so `v(π) = 1` grid unit and
//! `v(θ) = -e`.
//!
//! Precision rules:
//! * `a ± b` is known below `min(prec_a, prec_b)`;
//! * `a·b` is known below `min(prec_a + v(b), prec_b + v(a))`;
//! * `1/b` keeps the relative precision of `b`;
//! * the `q^n`-power map scales precision by `q^n`.
//!
//! Results are additionally truncated by the tower's [`Precision`](crate::Precision)
//! policy. Exact elements (finite sums, `prec = EXACT`) stay exact under ring
//! operations and twists.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::min;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::gf::Fe;
use crate::rational::Rational;
use crate::tower::Tower;

/// Precision marker of an exact element.
pub const EXACT: i64 = i64::MAX;
const FINITE_MAX: i64 = i64::MAX / 4;
const DENSE_WINDOW: i64 = 1 << 22;

/// `p + v` in precision arithmetic: exact stays exact, finite values saturate.
#[inline]
pub(crate) fn padd(p: i64, v: i64) -> i64 {
    if p == EXACT {
        EXACT
    } else {
        p.saturating_add(v).min(FINITE_MAX)
    }
}

/// Valuation of an element in grid units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

/// Which arithmetic operation [`arith`] performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone)]
pub struct Cinf {
    tower: Arc<Tower>,
    terms: Vec<(i64, Fe)>,
    prec: i64,
}

/// Structural equality: same tower, same known terms, same precision.
impl PartialEq for Cinf {
    fn eq(&self, other: &Self) -> bool {
        same_tower(&self.tower, &other.tower) && self.prec == other.prec && self.terms == other.terms
    }
}

pub(crate) fn same_tower(a: &Arc<Tower>, b: &Arc<Tower>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Cinf {
    /// Builds an element from arbitrary terms; merges duplicates and drops zeros
    /// and terms at or beyond `prec`.
    pub fn from_terms(tower: &Arc<Tower>, terms: impl IntoIterator<Item = (i64, Fe)>, prec: i64) -> Self {
        let gf = tower.gf();
        let mut map: BTreeMap<i64, Fe> = BTreeMap::new();
        for (e, c) in terms {
            if e >= prec || c == 0 {
                continue;
            }
            let slot = map.entry(e).or_insert(0);
            *slot = gf.add(*slot, c);
        }
        Cinf {
            tower: tower.clone(),
            terms: map.into_iter().filter(|&(_, c)| c != 0).collect(),
            prec,
        }
    }

    fn from_sorted(tower: &Arc<Tower>, terms: Vec<(i64, Fe)>, prec: i64) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|&(e, c)| c != 0 && e < prec));
        Cinf {
            tower: tower.clone(),
            terms,
            prec,
        }
    }

    pub fn zero(tower: &Arc<Tower>) -> Self {
        Self::from_sorted(tower, Vec::new(), EXACT)
    }

    /// An element known only to be `O(π^prec)`.
    pub fn zero_to(tower: &Arc<Tower>, prec: i64) -> Self {
        Self::from_sorted(tower, Vec::new(), prec)
    }

    pub fn one(tower: &Arc<Tower>) -> Self {
        Self::constant(tower, 1)
    }

    pub fn constant(tower: &Arc<Tower>, c: Fe) -> Self {
        Self::monomial(tower, c, 0)
    }

    pub fn from_int(tower: &Arc<Tower>, n: i64) -> Self {
        Self::constant(tower, tower.gf().from_int(n))
    }

    /// `c·π^exp`, exact.
    pub fn monomial(tower: &Arc<Tower>, c: Fe, exp: i64) -> Self {
        if c == 0 {
            return Self::zero(tower);
        }
        Self::from_sorted(tower, vec![(exp, c)], EXACT)
    }

    /// `θ`, i.e. `π^{-e}`.
    pub fn theta(tower: &Arc<Tower>) -> Self {
        Self::theta_pow(tower, 1)
    }

    /// `θ^k` for integer `k`.
    pub fn theta_pow(tower: &Arc<Tower>, k: i64) -> Self {
        Self::monomial(tower, 1, -k * tower.e())
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    /// Known terms as `(exponent, coefficient)`, exponents ascending.
    pub fn terms(&self) -> &[(i64, Fe)] {
        &self.terms
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    /// No known nonzero term: zero to the stored precision.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.prec == EXACT
    }

    /// Leading exponent and coefficient, if a nonzero term is known.
    pub fn leading(&self) -> Option<(i64, Fe)> {
        self.terms.first().copied()
    }

    pub fn coeff(&self, exp: i64) -> Option<Fe> {
        if exp >= self.prec {
            return None;
        }
        Some(
            self.terms
                .binary_search_by_key(&exp, |t| t.0)
                .map(|i| self.terms[i].1)
                .unwrap_or(0),
        )
    }

    /// A lower bound for the valuation: the leading exponent, or `prec` when no
    /// term is known.
    pub fn valuation_lb(&self) -> i64 {
        self.terms.first().map(|t| t.0).unwrap_or(self.prec)
    }

    /// Residual size used by every identity check: the leading exponent if a term
    /// is known, otherwise the precision to which the element vanishes.
    pub fn zero_order(&self) -> i64 {
        self.valuation_lb()
    }

    /// Valuation in grid units.
    pub fn valuation(&self) -> Result<Valuation> {
        match self.terms.first() {
            Some(&(e, _)) => Ok(Valuation::Finite(e)),
            None if self.is_exact() => Ok(Valuation::Infinite),
            None => Err(Error::IndeterminateValuation { prec: self.prec }),
        }
    }

    /// Valuation in `θ`-units (`v(θ) = -1`); `None` for exact zero.
    pub fn valuation_theta(&self) -> Result<Option<Rational>> {
        Ok(match self.valuation()? {
            Valuation::Finite(v) => Some(Rational::new(v, self.tower.e())),
            Valuation::Infinite => None,
        })
    }

    /// `|a| = q^{-v(a)}` with `v` in `θ`-units, returned as the exponent of `q`;
    /// `None` for exact zero.
    pub fn abs_log_q(&self) -> Result<Option<Rational>> {
        Ok(self.valuation_theta()?.map(|v| -v))
    }

    /// Drops every term at or beyond `prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        let prec = min(prec, self.prec);
        let terms = self.terms.iter().copied().filter(|&(e, _)| e < prec).collect();
        Self::from_sorted(&self.tower, terms, prec)
    }

    /// Multiplication by `π^k`.
    pub fn shift(&self, k: i64) -> Self {
        let terms = self.terms.iter().map(|&(e, c)| (e + k, c)).collect();
        Self::from_sorted(&self.tower, terms, padd(self.prec, k))
    }

    /// Multiplication by `θ^k`.
    pub fn mul_theta_pow(&self, k: i64) -> Self {
        self.shift(-k * self.tower.e())
    }

    pub fn scale(&self, c: Fe) -> Self {
        if c == 0 {
            return Self::zero(&self.tower);
        }
        let gf = self.tower.gf();
        let terms = self.terms.iter().map(|&(e, x)| (e, gf.mul(x, c))).collect();
        Self::from_sorted(&self.tower, terms, self.prec)
    }

    /// `(a - b)` vanishes to the smaller of the two precisions.
    pub fn eq_to_prec(&self, other: &Cinf) -> bool {
        (self - other).is_zero()
    }

    fn check_tower(&self, other: &Cinf) {
        assert!(same_tower(&self.tower, &other.tower), "elements of different towers");
    }

    fn add_impl(&self, other: &Cinf, negate: bool) -> Cinf {
        self.check_tower(other);
        let gf = self.tower.gf();
        let prec = min(self.prec, other.prec);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        let nb = |c: Fe| if negate { gf.neg(c) } else { c };
        loop {
            let next = match (a.get(i), b.get(j)) {
                (None, None) => break,
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&(e, c))) => {
                    j += 1;
                    (e, nb(c))
                }
                (Some(&(ea, ca)), Some(&(eb, cb))) => {
                    if ea < eb {
                        i += 1;
                        (ea, ca)
                    } else if eb < ea {
                        j += 1;
                        (eb, nb(cb))
                    } else {
                        i += 1;
                        j += 1;
                        (ea, gf.add(ca, nb(cb)))
                    }
                }
            };
            if next.0 >= prec {
                break;
            }
            if next.1 != 0 {
                out.push(next);
            }
        }
        Cinf::from_sorted(&self.tower, out, prec)
    }

    fn mul_impl(&self, other: &Cinf) -> Cinf {
        self.check_tower(other);
        let tower = &self.tower;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Cinf::zero(tower);
        }
        let va = self.valuation_lb();
        let vb = other.valuation_lb();
        let natural = min(padd(self.prec, vb), padd(other.prec, va));
        if self.terms.is_empty() || other.terms.is_empty() {
            return Cinf::zero_to(tower, natural);
        }
        let lead = va + vb;
        let limit = if natural == EXACT {
            EXACT
        } else {
            min(natural, tower.cap(lead))
        };
        let hi = if limit == EXACT {
            self.terms.last().unwrap().0 + other.terms.last().unwrap().0 + 1
        } else {
            limit
        };
        let gf = tower.gf();
        let blogs: Vec<(i64, u32)> = other.terms.iter().map(|&(e, c)| (e, gf.log(c).unwrap())).collect();
        let window = hi - lead;
        let mut out = Vec::new();
        if window <= DENSE_WINDOW {
            let mut acc = vec![0 as Fe; window.max(0) as usize];
            for &(ea, ca) in &self.terms {
                if ea + vb >= hi {
                    break;
                }
                let la = gf.log(ca).unwrap();
                let base = ea - lead;
                for &(eb, lb) in &blogs {
                    let idx = base + eb;
                    if idx >= window {
                        break;
                    }
                    let slot = &mut acc[idx as usize];
                    *slot = gf.add(*slot, gf.exp(la as u64 + lb as u64));
                }
            }
            for (k, c) in acc.into_iter().enumerate() {
                if c != 0 {
                    out.push((lead + k as i64, c));
                }
            }
        } else {
            let mut map: BTreeMap<i64, Fe> = BTreeMap::new();
            for &(ea, ca) in &self.terms {
                if ea + vb >= hi {
                    break;
                }
                let la = gf.log(ca).unwrap();
                for &(eb, lb) in &blogs {
                    let ex = ea + eb;
                    if ex >= hi {
                        break;
                    }
                    let slot = map.entry(ex).or_insert(0);
                    *slot = gf.add(*slot, gf.exp(la as u64 + lb as u64));
                }
            }
            out.extend(map.into_iter().filter(|&(_, c)| c != 0));
        }
        Cinf::from_sorted(tower, out, limit)
    }

    /// Multiplicative inverse by leading-term inversion and geometric expansion.
    pub fn inv(&self) -> Result<Cinf> {
        let tower = &self.tower;
        let gf = tower.gf();
        let (vb, c0) = self.leading().ok_or(Error::DivisionByApparentZero)?;
        let c0inv = gf.inv(c0)?;
        if self.terms.len() == 1 && self.is_exact() {
            return Ok(Cinf::monomial(tower, c0inv, -vb));
        }
        let v = -vb;
        let limit = if self.is_exact() {
            tower.cap(v)
        } else {
            min(padd(self.prec, -2 * vb), tower.cap(v))
        };
        let len = (limit - v).max(0) as usize;
        let r: Vec<(usize, u32)> = self.terms[1..]
            .iter()
            .map(|&(e, c)| ((e - vb) as usize, gf.log(gf.mul(c, c0inv)).unwrap()))
            .take_while(|&(j, _)| j < len)
            .collect();
        let mut w = vec![0 as Fe; len];
        if len > 0 {
            w[0] = 1;
        }
        for k in 1..len {
            let mut s: Fe = 0;
            for &(j, lr) in &r {
                if j > k {
                    break;
                }
                let wk = w[k - j];
                if wk != 0 {
                    s = gf.add(s, gf.mul_log(lr, wk));
                }
            }
            w[k] = gf.neg(s);
        }
        let terms = w
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c != 0)
            .map(|(k, c)| (v + k as i64, gf.mul(c, c0inv)))
            .collect();
        Ok(Cinf::from_sorted(tower, terms, limit))
    }

    pub fn div(&self, other: &Cinf) -> Result<Cinf> {
        Ok(self * &other.inv()?)
    }

    /// `a^k` for `k ≥ 0` by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Cinf {
        let mut acc = Cinf::one(&self.tower);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `a^k` for any integer `k`.
    pub fn powi(&self, k: i64) -> Result<Cinf> {
        if k >= 0 {
            Ok(self.pow(k as u64))
        } else {
            Ok(self.inv()?.pow(k.unsigned_abs()))
        }
    }

    /// The `q^n`-power map, `(Σ a_j π^j)^{q^n} = Σ a_j^{q^n} π^{j q^n}`.
    ///
    /// For `n < 0` every stored exponent must be divisible by `q^{|n|}`.
    pub fn frobenius(&self, n: i64) -> Result<Cinf> {
        let tower = &self.tower;
        let gf = tower.gf();
        let q = tower.q() as i64;
        let qn = q
            .checked_pow(n.unsigned_abs() as u32)
            .ok_or_else(|| Error::PrecisionExhausted(format!("twist {n} overflows exponents")))?;
        if n >= 0 {
            let mut terms = Vec::with_capacity(self.terms.len());
            for &(e, c) in &self.terms {
                let ex = e
                    .checked_mul(qn)
                    .ok_or_else(|| Error::PrecisionExhausted(format!("twist {n} overflows exponent {e}")))?;
                terms.push((ex, gf.frobenius(c, n)));
            }
            let prec = if self.prec == EXACT {
                EXACT
            } else {
                self.prec.saturating_mul(qn).min(FINITE_MAX)
            };
            Ok(Cinf::from_sorted(tower, terms, prec))
        } else {
            let mut terms = Vec::with_capacity(self.terms.len());
            for &(e, c) in &self.terms {
                if e % qn != 0 {
                    return Err(Error::GridTooCoarse(format!(
                        "exponent {e}/{} has no q^{} -th root on the grid",
                        tower.e(),
                        -n
                    )));
                }
                terms.push((e / qn, gf.frobenius(c, n)));
            }
            let prec = if self.prec == EXACT {
                EXACT
            } else {
                -(-self.prec).div_euclid(qn)
            };
            Ok(Cinf::from_sorted(tower, terms, prec))
        }
    }
}

/// Checked arithmetic: fails when the result carries no known term although the
/// inputs were not exact.
pub fn arith(a: &Cinf, b: &Cinf, kind: ArithKind) -> Result<Cinf> {
    if !same_tower(a.tower(), b.tower()) {
        return Err(Error::TowerMismatch);
    }
    let r = match kind {
        ArithKind::Add => a + b,
        ArithKind::Sub => a - b,
        ArithKind::Mul => a * b,
        ArithKind::Div => a.div(b)?,
    };
    if r.is_zero() && !r.is_exact() && !(a.is_zero() && b.is_zero()) && kind != ArithKind::Sub && kind != ArithKind::Add
    {
        return Err(Error::PrecisionExhausted(format!(
            "{kind:?} result is known only to be O(π^{})",
            r.prec()
        )));
    }
    Ok(r)
}

impl<'a> Add<&'a Cinf> for &'a Cinf {
    type Output = Cinf;
    fn add(self, rhs: &'a Cinf) -> Cinf {
        self.add_impl(rhs, false)
    }
}

impl<'a> Sub<&'a Cinf> for &'a Cinf {
    type Output = Cinf;
    fn sub(self, rhs: &'a Cinf) -> Cinf {
        self.add_impl(rhs, true)
    }
}

impl<'a> Mul<&'a Cinf> for &'a Cinf {
    type Output = Cinf;
    fn mul(self, rhs: &'a Cinf) -> Cinf {
        self.mul_impl(rhs)
    }
}

impl Neg for &Cinf {
    type Output = Cinf;
    fn neg(self) -> Cinf {
        let gf = self.tower.gf();
        let terms = self.terms.iter().map(|&(e, c)| (e, gf.neg(c))).collect();
        Cinf::from_sorted(&self.tower, terms, self.prec)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Cinf> for Cinf {
            type Output = Cinf;
            fn $m(self, rhs: Cinf) -> Cinf {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Cinf> for Cinf {
            type Output = Cinf;
            fn $m(self, rhs: &'a Cinf) -> Cinf {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Cinf> for &'a Cinf {
            type Output = Cinf;
            fn $m(self, rhs: Cinf) -> Cinf {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Cinf {
    type Output = Cinf;
    fn neg(self) -> Cinf {
        -&self
    }
}

impl fmt::Debug for Cinf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Cinf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.tower.e();
        if self.terms.is_empty() && self.is_exact() {
            return write!(f, "0");
        }
        let shown = 6;
        for (i, &(ex, c)) in self.terms.iter().take(shown).enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{c}]θ^({})", Rational::new(-ex, e))?;
        }
        if self.terms.len() > shown {
            write!(f, " + …({} more)", self.terms.len() - shown)?;
        }
        if !self.is_exact() {
            if !self.terms.is_empty() {
                write!(f, " + ")?;
            }
            write!(f, "O(θ^({}))", Rational::new(-self.prec, e))?;
        }
        Ok(())
    }
}
