//! Truncated power series in `t` with `Cinf` coefficients, and exact polynomials
//! in `t`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::min;

use crate::cinf::{Cinf, EXACT};
use crate::error::{Error, Result};
use crate::tower::Tower;

/// What is known about the dropped coefficients `c_j`, `j ≥ T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailBound {
    /// Every dropped coefficient is exactly zero.
    Zero,
    /// `v(c_j) ≥ base + slope·j` for every dropped `j`.
    Affine {
        base: i64,
        slope: i64,
    },
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TSeries {
    tower: Arc<Tower>,
    coeffs: Vec<Cinf>,
    tail: TailBound,
}

/// `base` such that `v(c_j) ≥ base + slope·j` for all `j` covered by `coeffs`
/// and the tail.
fn global_base(coeffs: &[Cinf], tail: TailBound, slope: i64) -> Option<i64> {
    let mut base = match tail {
        TailBound::Zero => EXACT,
        TailBound::Affine { base, slope: s } if s >= slope => base,
        _ => return None,
    };
    for (j, c) in coeffs.iter().enumerate() {
        if c.is_exact_zero() {
            continue;
        }
        base = min(base, c.valuation_lb().saturating_sub(slope.saturating_mul(j as i64)));
    }
    Some(base)
}

impl TSeries {
    pub fn new(tower: &Arc<Tower>, coeffs: Vec<Cinf>, tail: TailBound) -> Self {
        TSeries {
            tower: tower.clone(),
            coeffs,
            tail,
        }
    }

    pub fn zero(tower: &Arc<Tower>, t: usize) -> Self {
        Self::new(tower, vec![Cinf::zero(tower); t], TailBound::Zero)
    }

    pub fn one(tower: &Arc<Tower>, t: usize) -> Self {
        Self::constant(&Cinf::one(tower), t)
    }

    pub fn constant(c: &Cinf, t: usize) -> Self {
        let tower = c.tower();
        let mut coeffs = vec![Cinf::zero(tower); t];
        if t > 0 {
            coeffs[0] = c.clone();
        }
        let tail = if t > 0 { TailBound::Zero } else { TailBound::Unknown };
        Self::new(tower, coeffs, tail)
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    /// Truncation order `T`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Cinf] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &Cinf {
        &self.coeffs[j]
    }

    pub fn tail(&self) -> TailBound {
        self.tail
    }

    /// Keeps the first `t` coefficients.
    pub fn truncate(&self, t: usize) -> TSeries {
        if t >= self.len() {
            return self.clone();
        }
        let dropped = &self.coeffs[t..];
        let tail = match self.tail {
            TailBound::Zero if dropped.iter().all(|c| c.is_exact_zero()) => TailBound::Zero,
            TailBound::Unknown => TailBound::Unknown,
            TailBound::Zero => {
                let base = global_base(dropped, TailBound::Zero, 0).unwrap();
                TailBound::Affine { base, slope: 0 }
            }
            TailBound::Affine { base, slope } => {
                let mut b = base;
                for (k, c) in dropped.iter().enumerate() {
                    if !c.is_exact_zero() {
                        b = min(b, c.valuation_lb() - slope * (t + k) as i64);
                    }
                }
                TailBound::Affine { base: b, slope }
            }
        };
        TSeries::new(&self.tower, self.coeffs[..t].to_vec(), tail)
    }

    fn combine_tail(&self, other: &TSeries, t: usize) -> TailBound {
        let a = self.truncate(t);
        let b = other.truncate(t);
        match (a.tail, b.tail) {
            (TailBound::Zero, TailBound::Zero) => TailBound::Zero,
            (TailBound::Unknown, _) | (_, TailBound::Unknown) => TailBound::Unknown,
            (TailBound::Affine { base: b1, slope: s1 }, TailBound::Affine { base: b2, slope: s2 }) => {
                let s = min(s1, s2);
                let base = min(
                    if s1 == s {
                        b1
                    } else {
                        b1.saturating_add((s1 - s) * t as i64)
                    },
                    if s2 == s {
                        b2
                    } else {
                        b2.saturating_add((s2 - s) * t as i64)
                    },
                );
                TailBound::Affine { base, slope: s }
            }
            (TailBound::Affine { .. }, TailBound::Zero) => a.tail,
            (TailBound::Zero, TailBound::Affine { .. }) => b.tail,
        }
    }

    fn zip(&self, other: &TSeries, negate: bool) -> TSeries {
        let t = min(self.len(), other.len());
        let coeffs = (0..t)
            .map(|j| {
                if negate {
                    &self.coeffs[j] - &other.coeffs[j]
                } else {
                    &self.coeffs[j] + &other.coeffs[j]
                }
            })
            .collect();
        TSeries::new(&self.tower, coeffs, self.combine_tail(other, t))
    }

    pub fn add(&self, other: &TSeries) -> TSeries {
        self.zip(other, false)
    }

    pub fn sub(&self, other: &TSeries) -> TSeries {
        self.zip(other, true)
    }

    pub fn neg(&self) -> TSeries {
        TSeries::new(&self.tower, self.coeffs.iter().map(|c| -c).collect(), self.tail)
    }

    /// Product truncated at the shorter of the two orders.
    pub fn mul(&self, other: &TSeries) -> TSeries {
        let t = min(self.len(), other.len());
        let mut coeffs = vec![Cinf::zero(&self.tower); t];
        for (i, a) in self.coeffs.iter().take(t).enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(t - i).enumerate() {
                if b.is_exact_zero() {
                    continue;
                }
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        let tail = self.product_tail(other, t);
        TSeries::new(&self.tower, coeffs, tail)
    }

    fn degree_bound(&self) -> Option<usize> {
        match self.tail {
            TailBound::Zero => Some(self.coeffs.iter().rposition(|c| !c.is_exact_zero()).map_or(0, |d| d)),
            _ => None,
        }
    }

    fn slope(&self) -> Option<i64> {
        match self.tail {
            TailBound::Affine { slope, .. } => Some(slope),
            _ => None,
        }
    }

    fn product_tail(&self, other: &TSeries, t: usize) -> TailBound {
        if let (Some(d1), Some(d2)) = (self.degree_bound(), other.degree_bound()) {
            if d1 + d2 < t {
                return TailBound::Zero;
            }
        }
        if matches!(self.tail, TailBound::Unknown) || matches!(other.tail, TailBound::Unknown) {
            return TailBound::Unknown;
        }
        let s = match (self.slope(), other.slope()) {
            (Some(a), Some(b)) => min(a, b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0,
        };
        match (
            global_base(&self.coeffs, self.tail, s),
            global_base(&other.coeffs, other.tail, s),
        ) {
            (Some(b1), Some(b2)) => TailBound::Affine {
                base: b1.saturating_add(b2),
                slope: s,
            },
            _ => TailBound::Unknown,
        }
    }

    /// Multiplication by a constant of `C_∞`.
    pub fn scale(&self, c: &Cinf) -> TSeries {
        let tail = match (self.tail, c.is_exact_zero()) {
            (_, true) => TailBound::Zero,
            (TailBound::Affine { base, slope }, false) => TailBound::Affine {
                base: base.saturating_add(c.valuation_lb()),
                slope,
            },
            (other, false) => other,
        };
        TSeries::new(&self.tower, self.coeffs.iter().map(|x| x * c).collect(), tail)
    }

    /// Multiplication by `t`; the order `T` is kept.
    pub fn mul_t(&self) -> TSeries {
        let t = self.len();
        if t == 0 {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(t);
        coeffs.push(Cinf::zero(&self.tower));
        coeffs.extend(self.coeffs[..t - 1].iter().cloned());
        let last = &self.coeffs[t - 1];
        let tail = match self.tail {
            TailBound::Zero if last.is_exact_zero() => TailBound::Zero,
            TailBound::Unknown => TailBound::Unknown,
            _ => {
                let s = self.slope().unwrap_or(0);
                match global_base(&self.coeffs, self.tail, s) {
                    Some(b) => TailBound::Affine {
                        base: b.saturating_sub(s),
                        slope: s,
                    },
                    None => TailBound::Unknown,
                }
            }
        };
        TSeries::new(&self.tower, coeffs, tail)
    }

    /// Coefficientwise `q^n`-power, `n ≥ 0`.
    pub fn twist(&self, n: u32) -> Result<TSeries> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.frobenius(n as i64))
            .collect::<Result<Vec<_>>>()?;
        let qn = (self.tower.q() as i64).pow(n);
        let tail = match self.tail {
            TailBound::Affine { base, slope } => TailBound::Affine {
                base: base.saturating_mul(qn),
                slope: slope.saturating_mul(qn),
            },
            other => other,
        };
        Ok(TSeries::new(&self.tower, coeffs, tail))
    }

    /// `Σ c_j t0^j`, with the tail certificate folded into the precision.
    pub fn specialize(&self, t0: &Cinf) -> Result<Cinf> {
        if t0.is_exact_zero() {
            return match self.coeffs.first() {
                Some(c) => Ok(c.clone()),
                None => Err(Error::DivergentEvaluation("empty series".into())),
            };
        }
        let v0 = t0.valuation_lb();
        let bound = match self.tail {
            TailBound::Zero => EXACT,
            TailBound::Affine { base, slope } => {
                let growth = slope.saturating_add(v0);
                if growth <= 0 {
                    return Err(Error::DivergentEvaluation(format!(
                        "coefficient decay {slope} per degree does not beat |t0| (valuation {v0})"
                    )));
                }
                base.saturating_add(growth.saturating_mul(self.len() as i64))
            }
            TailBound::Unknown => return Err(Error::DivergentEvaluation("no tail bound certifies convergence".into())),
        };
        let mut acc = Cinf::zero(&self.tower);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * t0) + c;
        }
        Ok(acc.truncate(bound))
    }

    /// Smallest zero order among the coefficients.
    pub fn zero_order(&self) -> i64 {
        self.coeffs.iter().map(|c| c.zero_order()).min().unwrap_or(EXACT)
    }

    /// Formal inverse; requires an invertible constant term.
    pub fn inv(&self) -> Result<TSeries> {
        let t = self.len();
        let c0inv = self.coeffs.first().ok_or(Error::DivisionByApparentZero)?.inv()?;
        let mut w: Vec<Cinf> = Vec::with_capacity(t);
        for k in 0..t {
            let mut s = if k == 0 {
                Cinf::one(&self.tower)
            } else {
                Cinf::zero(&self.tower)
            };
            for j in 1..=k {
                if !self.coeffs[j].is_exact_zero() {
                    s = &s - &(&self.coeffs[j] * &w[k - j]);
                }
            }
            w.push(&s * &c0inv);
        }
        Ok(TSeries::new(&self.tower, w, TailBound::Unknown))
    }
}

/// An exact polynomial in `t`: every coefficient beyond the stored ones is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyT {
    tower: Arc<Tower>,
    coeffs: Vec<Cinf>,
}

impl PolyT {
    pub fn new(tower: &Arc<Tower>, mut coeffs: Vec<Cinf>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        PolyT {
            tower: tower.clone(),
            coeffs,
        }
    }

    pub fn zero(tower: &Arc<Tower>) -> Self {
        Self::new(tower, Vec::new())
    }

    pub fn constant(c: Cinf) -> Self {
        let t = c.tower().clone();
        Self::new(&t, vec![c])
    }

    /// `t - a`.
    pub fn t_minus(a: &Cinf) -> Self {
        let t = a.tower().clone();
        Self::new(&t, vec![-a, Cinf::one(&t)])
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn coeffs(&self) -> &[Cinf] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &PolyT) -> PolyT {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = Cinf::zero(&self.tower);
        let c = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&z) + other.coeffs.get(i).unwrap_or(&z))
            .collect();
        PolyT::new(&self.tower, c)
    }

    pub fn neg(&self) -> PolyT {
        PolyT::new(&self.tower, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &PolyT) -> PolyT {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PolyT) -> PolyT {
        if self.is_zero() || other.is_zero() {
            return PolyT::zero(&self.tower);
        }
        let mut c = vec![Cinf::zero(&self.tower); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        PolyT::new(&self.tower, c)
    }

    pub fn scale(&self, k: &Cinf) -> PolyT {
        PolyT::new(&self.tower, self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Coefficientwise twist; negative `n` is allowed for exact polynomials.
    pub fn twist(&self, n: i64) -> Result<PolyT> {
        let c = self.coeffs.iter().map(|a| a.frobenius(n)).collect::<Result<Vec<_>>>()?;
        Ok(PolyT::new(&self.tower, c))
    }

    pub fn eval(&self, t0: &Cinf) -> Cinf {
        let mut acc = Cinf::zero(&self.tower);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * t0) + c;
        }
        acc
    }

    pub fn to_tseries(&self, t: usize) -> TSeries {
        let mut c: Vec<Cinf> = self.coeffs.iter().take(t).cloned().collect();
        c.resize(t, Cinf::zero(&self.tower));
        let tail = if self.coeffs.len() <= t {
            TailBound::Zero
        } else {
            TSeries::new(&self.tower, self.coeffs.clone(), TailBound::Zero)
                .truncate(t)
                .tail
        };
        TSeries::new(&self.tower, c, tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::tests::tower;
    use proptest::prelude::*;

    fn th(t: &Arc<Tower>, k: i64) -> Cinf {
        Cinf::theta_pow(t, k)
    }

    #[test]
    fn twist_examples() {
        let t = tower(3, 2, 6, 60);
        let f = TSeries::new(&t, vec![Cinf::zero(&t), th(&t, -1)], TailBound::Zero);
        let g = f.twist(1).unwrap();
        assert_eq!(g.coeff(1), &th(&t, -3));
        assert_eq!(f.twist(0).unwrap(), f);
    }

    #[test]
    fn specialize_examples() {
        let t = tower(3, 2, 6, 60);
        let f = PolyT::new(&t, vec![Cinf::one(&t), Cinf::one(&t)]).to_tseries(4);
        let v = f.specialize(&th(&t, 1)).unwrap();
        assert!(v.eq_to_prec(&(&Cinf::one(&t) + &th(&t, 1))));
        assert!(v.is_exact());
        assert_eq!(f.specialize(&Cinf::zero(&t)).unwrap(), Cinf::one(&t));
    }

    #[test]
    fn specialize_requires_certificate() {
        let t = tower(3, 2, 6, 60);
        let c: Vec<Cinf> = (0..8).map(|j| th(&t, -(j as i64))).collect();
        // coefficients θ^{-j}: decay of one θ-unit per degree
        let f = TSeries::new(&t, c, TailBound::Affine { base: 0, slope: 6 });
        assert!(matches!(f.specialize(&th(&t, 1)), Err(Error::DivergentEvaluation(_))));
        let half = f.specialize(&Cinf::one(&t)).unwrap();
        assert_eq!(half.prec(), 48);
        let u = TSeries::new(&t, f.coeffs().to_vec(), TailBound::Unknown);
        assert!(matches!(
            u.specialize(&Cinf::one(&t)),
            Err(Error::DivergentEvaluation(_))
        ));
    }

    #[test]
    fn geometric_tail_is_certified() {
        let t = tower(3, 2, 6, 60);
        let one = Cinf::one(&t);
        // 1/(1 - t/θ) = Σ θ^{-j} t^j, exact tail v(c_j) = 6j
        let f = PolyT::new(&t, vec![one.clone(), -th(&t, -1)]).to_tseries(12);
        let g = f.inv().unwrap();
        let g = TSeries::new(&t, g.coeffs().to_vec(), TailBound::Affine { base: 0, slope: 6 });
        let prod = f.mul(&g);
        assert!(prod.sub(&TSeries::one(&t, 12)).coeffs().iter().all(|c| c.is_zero()));
        assert_eq!(prod.tail(), TailBound::Affine { base: 0, slope: 6 });
    }

    fn arb_series(t: Arc<Tower>) -> impl Strategy<Value = TSeries> {
        let order = t.gf().order();
        proptest::collection::vec(proptest::collection::vec((-4i64..10, 1u32..order), 0..3), 6).prop_map(move |cs| {
            let coeffs = cs.into_iter().map(|terms| Cinf::from_terms(&t, terms, 80)).collect();
            TSeries::new(&t, coeffs, TailBound::Affine { base: -4, slope: 0 })
        })
    }

    fn shared() -> Arc<Tower> {
        tower(5, 2, 4, 80)
    }

    proptest! {
        #[test]
        fn twist_is_ring_homomorphism(f in arb_series(shared()), g in arb_series(shared())) {
            let lhs = f.mul(&g).twist(1).unwrap();
            let rhs = f.twist(1).unwrap().mul(&g.twist(1).unwrap());
            prop_assert!(lhs.sub(&rhs).coeffs().iter().all(|c| c.is_zero()));
            let lhs = f.add(&g).twist(1).unwrap();
            let rhs = f.twist(1).unwrap().add(&g.twist(1).unwrap());
            prop_assert!(lhs.sub(&rhs).coeffs().iter().all(|c| c.is_zero()));
        }

        #[test]
        fn tail_bound_dominates_truncated_terms(f in arb_series(shared()), g in arb_series(shared())) {
            let full = f.mul(&g);
            let short = f.truncate(3).mul(&g.truncate(3));
            if let TailBound::Affine { base, slope } = short.tail() {
                for j in 3..6 {
                    let c = full.coeff(j);
                    prop_assert!(c.valuation_lb() >= base + slope * j as i64);
                }
            } else {
                prop_assert!(false, "tail bound lost");
            }
        }
    }
}
