//! Twisted polynomial rings `K[τ]` (`τc = c^q τ`) and `K[σ]` (`σc = c^{(-1)} σ`).

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cinf::{same_tower, Cinf};
use crate::error::Result;
use crate::tower::Tower;

fn trim(mut c: Vec<Cinf>) -> Vec<Cinf> {
    while c.last().is_some_and(|x| x.is_exact_zero()) {
        c.pop();
    }
    c
}

fn add_coeffs(tower: &Arc<Tower>, a: &[Cinf], b: &[Cinf], negate: bool) -> Vec<Cinf> {
    let n = a.len().max(b.len());
    let zero = Cinf::zero(tower);
    (0..n)
        .map(|i| {
            let x = a.get(i).unwrap_or(&zero);
            let y = b.get(i).unwrap_or(&zero);
            if negate {
                x - y
            } else {
                x + y
            }
        })
        .collect()
}

fn min_zero_order(c: &[Cinf]) -> i64 {
    c.iter().map(|x| x.zero_order()).min().unwrap_or(crate::cinf::EXACT)
}

/// `Σ a_i τ^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewPoly {
    tower: Arc<Tower>,
    coeffs: Vec<Cinf>,
}

/// `Σ b_i σ^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaPoly {
    tower: Arc<Tower>,
    coeffs: Vec<Cinf>,
}

impl SkewPoly {
    pub fn new(tower: &Arc<Tower>, coeffs: Vec<Cinf>) -> Self {
        assert!(coeffs.iter().all(|c| same_tower(c.tower(), tower)));
        SkewPoly {
            tower: tower.clone(),
            coeffs: trim(coeffs),
        }
    }

    pub fn zero(tower: &Arc<Tower>) -> Self {
        Self::new(tower, Vec::new())
    }

    pub fn constant(c: Cinf) -> Self {
        let t = c.tower().clone();
        Self::new(&t, alloc::vec![c])
    }

    /// `τ^k`.
    pub fn tau_pow(tower: &Arc<Tower>, k: usize) -> Self {
        let mut c = alloc::vec![Cinf::zero(tower); k + 1];
        c[k] = Cinf::one(tower);
        Self::new(tower, c)
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn coeffs(&self) -> &[Cinf] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Cinf {
        self.coeffs.get(i).cloned().unwrap_or_else(|| Cinf::zero(&self.tower))
    }

    /// `τ`-degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &SkewPoly) -> SkewPoly {
        SkewPoly::new(&self.tower, add_coeffs(&self.tower, &self.coeffs, &other.coeffs, false))
    }

    pub fn sub(&self, other: &SkewPoly) -> SkewPoly {
        SkewPoly::new(&self.tower, add_coeffs(&self.tower, &self.coeffs, &other.coeffs, true))
    }

    /// Ore product: `(aτ^i)(bτ^j) = a b^{q^i} τ^{i+j}`.
    pub fn mul(&self, other: &SkewPoly) -> Result<SkewPoly> {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(SkewPoly::zero(&self.tower));
        }
        let mut out = alloc::vec![Cinf::zero(&self.tower); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_exact_zero() {
                    continue;
                }
                let term = a * &b.frobenius(i as i64)?;
                out[i + j] = &out[i + j] + &term;
            }
        }
        Ok(SkewPoly::new(&self.tower, out))
    }

    /// `Σ a_i x^{q^i}`.
    pub fn eval(&self, x: &Cinf) -> Result<Cinf> {
        let mut acc = Cinf::zero(&self.tower);
        let mut xp = x.clone();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                xp = xp.frobenius(1)?;
            }
            if !a.is_exact_zero() {
                acc = &acc + &(a * &xp);
            }
        }
        Ok(acc)
    }

    /// The ordinary polynomial `Σ a_i x^{q^i}` as a dense coefficient list.
    pub fn to_linearized(&self) -> Vec<Cinf> {
        let q = self.tower.q() as usize;
        let deg = match self.degree() {
            Some(d) => q.pow(d as u32),
            None => return Vec::new(),
        };
        let mut out = alloc::vec![Cinf::zero(&self.tower); deg + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            out[q.pow(i as u32)] = a.clone();
        }
        out
    }

    /// `f* = Σ a_i^{(-i)} σ^i`.
    pub fn adjoint(&self) -> Result<SigmaPoly> {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a.frobenius(-(i as i64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SigmaPoly::new(&self.tower, c))
    }

    /// Applies the `n`-fold twist to every coefficient.
    pub fn twist(&self, n: i64) -> Result<SkewPoly> {
        let c = self.coeffs.iter().map(|a| a.frobenius(n)).collect::<Result<Vec<_>>>()?;
        Ok(SkewPoly::new(&self.tower, c))
    }

    /// Smallest zero order among the coefficients: the residual size of `self`.
    pub fn zero_order(&self) -> i64 {
        min_zero_order(&self.coeffs)
    }
}

impl SigmaPoly {
    pub fn new(tower: &Arc<Tower>, coeffs: Vec<Cinf>) -> Self {
        SigmaPoly {
            tower: tower.clone(),
            coeffs: trim(coeffs),
        }
    }

    pub fn coeffs(&self) -> &[Cinf] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &SigmaPoly) -> SigmaPoly {
        SigmaPoly::new(&self.tower, add_coeffs(&self.tower, &self.coeffs, &other.coeffs, false))
    }

    pub fn sub(&self, other: &SigmaPoly) -> SigmaPoly {
        SigmaPoly::new(&self.tower, add_coeffs(&self.tower, &self.coeffs, &other.coeffs, true))
    }

    /// `(aσ^i)(bσ^j) = a b^{(-i)} σ^{i+j}`.
    pub fn mul(&self, other: &SigmaPoly) -> Result<SigmaPoly> {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(SigmaPoly::new(&self.tower, Vec::new()));
        }
        let mut out = alloc::vec![Cinf::zero(&self.tower); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                if a.is_exact_zero() || b.is_exact_zero() {
                    continue;
                }
                let term = a * &b.frobenius(-(i as i64))?;
                out[i + j] = &out[i + j] + &term;
            }
        }
        Ok(SigmaPoly::new(&self.tower, out))
    }

    /// Inverse of [`SkewPoly::adjoint`]: `(Σ b_i σ^i)* = Σ b_i^{(i)} τ^i`.
    pub fn adjoint(&self) -> Result<SkewPoly> {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, b)| b.frobenius(i as i64))
            .collect::<Result<Vec<_>>>()?;
        Ok(SkewPoly::new(&self.tower, c))
    }

    pub fn zero_order(&self) -> i64 {
        min_zero_order(&self.coeffs)
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
    fn ore_law() {
        let t = tower(3, 2, 2, 40);
        let c = Cinf::constant(&t, 4);
        let lhs = SkewPoly::tau_pow(&t, 1).mul(&SkewPoly::constant(c.clone())).unwrap();
        let cq = c.frobenius(1).unwrap();
        assert_eq!(lhs.coeffs(), &[Cinf::zero(&t), cq]);
    }

    #[test]
    fn carlitz_square() {
        let t = tower(3, 2, 2, 40);
        let c = SkewPoly::new(&t, alloc::vec![th(&t, 1), Cinf::one(&t)]);
        let sq = c.mul(&c).unwrap();
        let expect = [th(&t, 2), &th(&t, 1) + &th(&t, 3), Cinf::one(&t)];
        assert_eq!(sq.coeffs().len(), 3);
        for (a, b) in sq.coeffs().iter().zip(expect.iter()) {
            assert!(a.eq_to_prec(b));
        }
        assert_eq!(c.mul(&SkewPoly::constant(Cinf::one(&t))).unwrap(), c);
    }

    #[test]
    fn eval_examples() {
        let t = tower(3, 2, 2, 40);
        let c = Cinf::constant(&t, 5);
        assert!(SkewPoly::tau_pow(&t, 1)
            .eval(&c)
            .unwrap()
            .eq_to_prec(&c.frobenius(1).unwrap()));
        let f = SkewPoly::new(&t, alloc::vec![th(&t, 1), Cinf::one(&t)]);
        assert!(f.eval(&Cinf::zero(&t)).unwrap().is_exact_zero());
    }

    #[test]
    fn adjoint_examples() {
        let t = tower(3, 2, 6, 40);
        let c = &th(&t, 1) + &Cinf::constant(&t, 7);
        let f = SkewPoly::new(&t, alloc::vec![Cinf::zero(&t), c.clone()]);
        let fs = f.adjoint().unwrap();
        assert_eq!(fs.coeffs()[1], c.frobenius(-1).unwrap());
        let k = SkewPoly::constant(c.clone());
        assert_eq!(k.adjoint().unwrap().coeffs(), &[c]);
    }

    fn arb_skew(t: Arc<Tower>, maxdeg: usize) -> impl Strategy<Value = SkewPoly> {
        let order = t.gf().order();
        let q = t.q() as i64;
        // exponents divisible by q^{2·maxdeg} keep inverse twists of products on the grid
        let unit = q.pow(2 * maxdeg as u32);
        proptest::collection::vec(proptest::collection::vec((-3i64..4, 1u32..order), 0..3), 1..=maxdeg + 1).prop_map(
            move |cs| {
                let coeffs = cs
                    .into_iter()
                    .map(|terms| {
                        Cinf::from_terms(&t, terms.into_iter().map(|(e, c)| (e * unit, c)), crate::cinf::EXACT)
                    })
                    .collect();
                SkewPoly::new(&t, coeffs)
            },
        )
    }

    fn shared() -> Arc<Tower> {
        tower(3, 2, 2 * 81, 20000)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn ore_associative(f in arb_skew(shared(), 2), g in arb_skew(shared(), 2), h in arb_skew(shared(), 2)) {
            let a = f.mul(&g).unwrap().mul(&h).unwrap();
            let b = f.mul(&g.mul(&h).unwrap()).unwrap();
            prop_assert!(a.sub(&b).coeffs().iter().all(|c| c.is_zero()));
        }

        #[test]
        fn adjoint_antihomomorphism(f in arb_skew(shared(), 2), g in arb_skew(shared(), 2)) {
            let lhs = f.mul(&g).unwrap().adjoint().unwrap();
            let rhs = g.adjoint().unwrap().mul(&f.adjoint().unwrap()).unwrap();
            prop_assert!(lhs.sub(&rhs).coeffs().iter().all(|c| c.is_zero()));
            let sum = f.add(&g).adjoint().unwrap();
            let sum2 = f.adjoint().unwrap().add(&g.adjoint().unwrap());
            prop_assert!(sum.sub(&sum2).coeffs().iter().all(|c| c.is_zero()));
            prop_assert_eq!(f.adjoint().unwrap().adjoint().unwrap(), f);
        }

        #[test]
        fn eval_is_action(f in arb_skew(shared(), 2), g in arb_skew(shared(), 2), x in arb_skew(shared(), 0), y in arb_skew(shared(), 0)) {
            let x = x.coeff(0);
            let y = y.coeff(0);
            let lhs = f.mul(&g).unwrap().eval(&x).unwrap();
            let rhs = f.eval(&g.eval(&x).unwrap()).unwrap();
            prop_assert!(lhs.eq_to_prec(&rhs));
            let s = f.eval(&(&x + &y)).unwrap();
            prop_assert!(s.eq_to_prec(&(&f.eval(&x).unwrap() + &f.eval(&y).unwrap())));
            let two = Cinf::from_int(x.tower(), 2);
            prop_assert!(f.eval(&(&two * &x)).unwrap().eq_to_prec(&(&two * &f.eval(&x).unwrap())));
        }
    }
}
