//! Drinfeld `F_q[t]`-modules `ρ_t = θ + κτ + uτ²` (rank 2) and `θ + κτ` (rank 1).

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::cinf::Cinf;
use crate::error::{Error, Result};
use crate::poly::{self, newton_polygon};
use crate::rational::Rational;
use crate::residual::required_order;
use crate::skew::SkewPoly;
use crate::tower::Tower;

/// Default number of exp/log coefficients computed at construction.
pub const DEFAULT_DEPTH: usize = 12;
/// Default cap on the division-tower height.
pub const DEFAULT_TOWER_CAP: usize = 12;

const ABSENT: i128 = i128::MAX / 4;

#[derive(Clone, Debug)]
pub struct DrinfeldModule {
    tower: Arc<Tower>,
    rank: u8,
    kappa: Cinf,
    u: Cinf,
    alpha: Vec<Cinf>,
    beta: Vec<Cinf>,
}

/// A biderivation, determined by `δ_t ∈ C_∞[τ]τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Biderivation {
    delta_t: SkewPoly,
}

impl Biderivation {
    pub fn new(delta_t: SkewPoly) -> Result<Self> {
        if delta_t.coeffs().first().is_some_and(|c| !c.is_exact_zero()) {
            return Err(Error::Config("δ_t must have zero constant term".into()));
        }
        Ok(Biderivation { delta_t })
    }

    /// The inner biderivation `δ^{(1)}`: `δ_t = θ - ρ_t`.
    pub fn inner(rho: &DrinfeldModule) -> Self {
        let t = rho.tower();
        Biderivation {
            delta_t: SkewPoly::new(t, vec![Cinf::zero(t), -&rho.kappa, -&rho.u]),
        }
    }

    /// `δ_t = τ`.
    pub fn tau(tower: &Arc<Tower>) -> Self {
        Biderivation {
            delta_t: SkewPoly::tau_pow(tower, 1),
        }
    }

    pub fn delta_t(&self) -> &SkewPoly {
        &self.delta_t
    }
}

/// Nonzero `t`-torsion points sharing one valuation.
#[derive(Clone, Debug)]
pub struct TorsionGroup {
    /// Valuation in `θ`-units.
    pub valuation: Rational,
    pub count: usize,
    /// The points, or the reason they are not representable in the working field.
    pub points: core::result::Result<Vec<Cinf>, Error>,
}

/// A period obtained from a torsion seed.
#[derive(Clone, Debug)]
pub struct Period {
    pub omega: Cinf,
    pub seed: Cinf,
    /// Height `n` of the division tower: `ω = θ^n · log(e^{(n)})`.
    pub height: usize,
}

/// Periods `ω_1, …, ω_r` obtained from torsion seeds.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub periods: Vec<Period>,
}

impl Lattice {
    pub fn omega(&self, i: usize) -> &Cinf {
        &self.periods[i].omega
    }

    pub fn rank(&self) -> usize {
        self.periods.len()
    }
}

/// Outcome of [`verify_morphism`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismReport {
    pub commutes: bool,
    /// Zero order of `eρ_t - ρ′_t e`.
    pub residual: i64,
    /// Zero order of `ρ_t* e* - e* ρ′_t*`, checked only when `commutes`.
    pub adjoint_residual: Option<i64>,
}

fn vlb(c: &Cinf) -> i128 {
    if c.is_exact_zero() {
        ABSENT
    } else {
        c.valuation_lb() as i128
    }
}

fn clamp(x: i128) -> i64 {
    x.clamp(i64::MIN as i128 / 4, i64::MAX as i128 / 4) as i64
}

impl DrinfeldModule {
    /// The Carlitz module `C_t = θ + τ`.
    pub fn carlitz(tower: &Arc<Tower>, depth: usize) -> Result<Self> {
        Self::build(tower, 1, Cinf::one(tower), Cinf::zero(tower), depth)
    }

    pub fn rank1(tower: &Arc<Tower>, kappa: Cinf, depth: usize) -> Result<Self> {
        if kappa.is_zero() {
            return Err(Error::Config("rank 1 needs κ ≠ 0".into()));
        }
        Self::build(tower, 1, kappa, Cinf::zero(tower), depth)
    }

    pub fn rank2(tower: &Arc<Tower>, kappa: Cinf, u: Cinf, depth: usize) -> Result<Self> {
        if u.is_zero() {
            return Err(Error::Config("rank 2 needs u ≠ 0".into()));
        }
        Self::build(tower, 2, kappa, u, depth)
    }

    fn build(tower: &Arc<Tower>, rank: u8, kappa: Cinf, u: Cinf, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Config("coefficient depth must be at least 1".into()));
        }
        let mut m = DrinfeldModule {
            tower: tower.clone(),
            rank,
            kappa,
            u,
            alpha: Vec::new(),
            beta: Vec::new(),
        };
        m.alpha = m.compute_alpha(depth)?;
        m.beta = m.compute_beta(depth)?;
        Ok(m)
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn kappa(&self) -> &Cinf {
        &self.kappa
    }

    pub fn u(&self) -> &Cinf {
        &self.u
    }

    pub fn depth(&self) -> usize {
        self.alpha.len() - 1
    }

    /// The same module with coefficient tables of a different depth.
    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        Self::build(&self.tower, self.rank, self.kappa.clone(), self.u.clone(), depth)
    }

    /// `ρ_t` as a twisted polynomial.
    pub fn rho_t(&self) -> SkewPoly {
        let t = &self.tower;
        SkewPoly::new(t, vec![Cinf::theta(t), self.kappa.clone(), self.u.clone()])
    }

    /// `θ^{q^i} - θ`.
    fn pole_gap(&self, i: usize) -> Result<Cinf> {
        let th = Cinf::theta(&self.tower);
        Ok(&th.frobenius(i as i64)? - &th)
    }

    fn compute_alpha(&self, depth: usize) -> Result<Vec<Cinf>> {
        let mut a = vec![Cinf::one(&self.tower)];
        for i in 1..=depth {
            let mut rhs = &self.kappa * &a[i - 1].frobenius(1)?;
            if i >= 2 && !self.u.is_exact_zero() {
                rhs = &rhs + &(&self.u * &a[i - 2].frobenius(2)?);
            }
            a.push(rhs.div(&self.pole_gap(i)?)?);
        }
        Ok(a)
    }

    fn compute_beta(&self, depth: usize) -> Result<Vec<Cinf>> {
        let mut b = vec![Cinf::one(&self.tower)];
        for i in 1..=depth {
            let mut rhs = &b[i - 1] * &self.kappa.frobenius(i as i64 - 1)?;
            if i >= 2 && !self.u.is_exact_zero() {
                rhs = &rhs + &(&b[i - 2] * &self.u.frobenius(i as i64 - 2)?);
            }
            b.push((-&rhs).div(&self.pole_gap(i)?)?);
        }
        Ok(b)
    }

    /// `α_0, …, α_depth` with `exp_ρ(z) = Σ α_i z^{q^i}`.
    pub fn exp_coeffs(&self) -> &[Cinf] {
        &self.alpha
    }

    /// `β_0, …, β_depth` with `log_ρ(z) = Σ β_i z^{q^i}`.
    pub fn log_coeffs(&self) -> &[Cinf] {
        &self.beta
    }

    fn q(&self) -> i128 {
        self.tower.q() as i128
    }

    /// Lower bound for `v(α_i z^{q^i})` over all `i > j`, given the actual term
    /// valuations `t_j`, `t_{j-1}`; `None` while the tail is not yet monotone.
    ///
    /// Uses `v(α_i) = e q^i + v(κ α_{i-1}^q + u α_{i-2}^{q²})`.
    fn exp_tail(&self, j: usize, tj: i128, tjm1: i128) -> Option<i128> {
        let q = self.q();
        let e = self.tower.e() as i128;
        let m = tj.min(tjm1);
        let vk = vlb(&self.kappa);
        let vu = vlb(&self.u);
        if m < 0 {
            return None;
        }
        let qj1 = q.checked_pow(j as u32 + 1)?;
        let lead = e.checked_mul(qj1)?;
        if lead + vk.min(vu) < 0 {
            return None;
        }
        let b = lead + (vk + q * m).min(vu + q * q * m);
        (b >= m).then_some(b)
    }

    /// `exp_ρ(z)` with the computed tail bound folded into the precision.
    pub fn exp_eval(&self, z: &Cinf) -> Result<Cinf> {
        self.exp_eval_detail(z).map(|r| r.0)
    }

    /// `exp_ρ(z)` and a lower bound for `min_i v(α_i z^{q^i})`.
    pub fn exp_eval_detail(&self, z: &Cinf) -> Result<(Cinf, i128)> {
        if z.is_exact_zero() {
            return Ok((Cinf::zero(&self.tower), ABSENT));
        }
        let vz = z.valuation_lb() as i128;
        let target = self.tower.cap(z.valuation_lb()) as i128;
        let mut acc = Cinf::zero(&self.tower);
        let mut prev = 0i128;
        let mut min_term = ABSENT;
        let mut zq = z.clone();
        for (i, a) in self.alpha.iter().enumerate() {
            if i > 0 {
                zq = zq.frobenius(1)?;
            }
            acc = &acc + &(a * &zq);
            let ti = vlb(a) + self.q().pow(i as u32) * vz;
            min_term = min_term.min(ti);
            if i >= 1 {
                if let Some(b) = self.exp_tail(i, ti, prev) {
                    if b >= target {
                        return Ok((acc.truncate(clamp(b)), min_term.min(b)));
                    }
                }
            }
            prev = ti;
        }
        Err(Error::PrecisionExhausted(format!(
            "exp needs more than {} coefficients at valuation {vz}",
            self.depth()
        )))
    }

    /// `log_ρ(z)` inside the certified disc.
    ///
    /// With `T_i = v(β_i z^{q^i})` the recursion gives
    /// `T_i ≥ min(T_{i-1} + q^{i-1}c_1, T_{i-2} + q^{i-2}c_2)` where
    /// `c_1 = (q-1)v(z) + qe + v(κ)` and `c_2 = (q²-1)v(z) + q²e + v(u)`.
    /// The evaluation is accepted only when `min(q c_1, c_2) ≥ e`, so consecutive
    /// term sizes shrink by at least a factor `q`.
    pub fn log_eval(&self, z: &Cinf) -> Result<Cinf> {
        if z.is_exact_zero() {
            return Ok(Cinf::zero(&self.tower));
        }
        let q = self.q();
        let e = self.tower.e() as i128;
        let vz = z.valuation_lb() as i128;
        let c1 = if self.kappa.is_exact_zero() {
            ABSENT
        } else {
            (q - 1) * vz + q * e + vlb(&self.kappa)
        };
        let c2 = if self.u.is_exact_zero() {
            ABSENT
        } else {
            (q * q - 1) * vz + q * q * e + vlb(&self.u)
        };
        let step = (q.saturating_mul(c1)).min(c2);
        if step < e {
            return Err(Error::DivergentEvaluation(format!(
                "log at valuation {}/{} is outside the certified disc",
                vz,
                self.tower.e()
            )));
        }
        let target = self.tower.cap(z.valuation_lb()) as i128;
        let mut acc = Cinf::zero(&self.tower);
        let mut prev = ABSENT;
        let mut zq = z.clone();
        for (i, b) in self.beta.iter().enumerate() {
            if i > 0 {
                zq = zq.frobenius(1)?;
            }
            acc = &acc + &(b * &zq);
            let ti = vlb(b) + q.pow(i as u32) * vz;
            if i >= 1 {
                let m = ti.min(prev);
                let bound = m + q.pow(i as u32 - 1) * step;
                if bound >= target {
                    return Ok(acc.truncate(clamp(bound)));
                }
            }
            prev = ti;
        }
        Err(Error::PrecisionExhausted(format!(
            "log needs more than {} coefficients",
            self.depth()
        )))
    }

    /// Coefficients `c_0 = 0, c_1, …, c_depth` of `F_δ(z) = Σ c_i z^{q^i}`.
    pub fn quasi_period_coeffs(&self, delta: &Biderivation) -> Result<Vec<Cinf>> {
        let d = delta.delta_t().coeffs();
        let mut c = vec![Cinf::zero(&self.tower)];
        for i in 1..=self.depth() {
            let mut rhs = Cinf::zero(&self.tower);
            for (j, dj) in d.iter().enumerate().skip(1) {
                if j > i || dj.is_exact_zero() {
                    continue;
                }
                rhs = &rhs + &(dj * &self.alpha[i - j].frobenius(j as i64)?);
            }
            c.push(if rhs.is_exact_zero() {
                rhs
            } else {
                rhs.div(&self.pole_gap(i)?)?
            });
        }
        Ok(c)
    }

    /// Lower bound for `v(α_k λ^{q^k})` over all `k ≥ from`.
    pub(crate) fn exp_term_floor(&self, vl: i128, from: usize) -> Option<i128> {
        let q = self.q();
        let t: Vec<i128> = self
            .alpha
            .iter()
            .enumerate()
            .map(|(k, a)| vlb(a) + q.pow(k as u32) * vl)
            .collect();
        let d = self.depth();
        let tail = self.exp_tail(d, t[d], t[d - 1])?;
        Some(t.iter().skip(from).copied().fold(tail, i128::min))
    }

    /// `F_δ(λ) = Σ c_i λ^{q^i}` with a tail bound derived from the exp tail.
    pub fn quasi_period_series(&self, delta: &Biderivation, lambda: &Cinf) -> Result<Cinf> {
        if lambda.is_exact_zero() {
            return Ok(Cinf::zero(&self.tower));
        }
        let c = self.quasi_period_coeffs(delta)?;
        let q = self.q();
        let e = self.tower.e() as i128;
        let vl = lambda.valuation_lb() as i128;
        let mut acc = Cinf::zero(&self.tower);
        let mut lq = lambda.clone();
        for ci in c.iter().skip(1) {
            lq = lq.frobenius(1)?;
            acc = &acc + &(ci * &lq);
        }
        // for i > D: v(c_i λ^{q^i}) ≥ e q^i + min_j (v(d_j) + q^j · min_{k ≥ i-j} v(α_k λ^{q^k}))
        let dd = self.depth();
        let d = delta.delta_t().coeffs();
        let mut floor = ABSENT;
        for (j, dj) in d.iter().enumerate().skip(1) {
            if dj.is_exact_zero() {
                continue;
            }
            let from = (dd + 1).saturating_sub(j);
            let a = self
                .exp_term_floor(vl, from)
                .ok_or_else(|| Error::DivergentEvaluation("exp tail not yet monotone".into()))?;
            floor = floor.min(vlb(dj) + q.pow(j as u32) * a);
        }
        let bound = e * q.pow(dd as u32 + 1) + floor;
        Ok(acc.truncate(clamp(bound)))
    }

    /// `F_τ(λ) = Σ_{j ≥ 0} exp_ρ(λ/θ^{j+1})^q θ^j`.
    pub fn f_tau_display(&self, lambda: &Cinf) -> Result<Cinf> {
        if lambda.is_exact_zero() {
            return Ok(Cinf::zero(&self.tower));
        }
        let q = self.q();
        let e = self.tower.e() as i128;
        let target = self.tower.n() as i128;
        let mut acc = Cinf::zero(&self.tower);
        for j in 0..4096usize {
            let x = lambda.mul_theta_pow(-(j as i64) - 1);
            let (ex, mu) = self.exp_eval_detail(&x)?;
            acc = &acc + &ex.frobenius(1)?.mul_theta_pow(j as i64);
            // μ grows by at least e per step in j, so terms beyond j are ≥ this
            let jj = j as i128;
            let bound = q * mu - e * jj + (q - 1) * e;
            if bound >= target && mu < ABSENT {
                return Ok(acc.truncate(clamp(bound)));
            }
        }
        Err(Error::DivergentEvaluation(
            "quasi-period display did not certify".into(),
        ))
    }

    /// `F_τ(λ)` from the coefficient series; with `cross_check` also from the
    /// exponential display, failing if the two disagree.
    pub fn quasi_period_eval(&self, lambda: &Cinf, cross_check: bool) -> Result<Cinf> {
        let a = self.quasi_period_series(&Biderivation::tau(&self.tower), lambda)?;
        if cross_check {
            let b = self.f_tau_display(lambda)?;
            if !a.eq_to_prec(&b) {
                return Err(Error::VerificationFailed(format!(
                    "F_τ evaluations disagree at valuation {}",
                    (&a - &b).zero_order()
                )));
            }
        }
        Ok(a)
    }

    /// Nonzero roots of `ρ_t(x) = 0`, grouped by valuation.
    pub fn torsion_points(&self) -> Result<Vec<TorsionGroup>> {
        let lin = self.rho_t().to_linearized();
        let np = newton_polygon(&lin)?;
        let e = self.tower.e();
        let mut out = Vec::new();
        for seg in &np.segments {
            let points = poly::segment_roots(&lin, seg).and_then(|roots| {
                if roots.iter().any(|r| r.1 != 1) {
                    return Err(Error::NoConvergence("torsion root with multiplicity".into()));
                }
                Ok(roots.into_iter().map(|r| r.0).collect::<Vec<_>>())
            });
            out.push(TorsionGroup {
                valuation: seg.root_valuation() * Rational::new(1, e),
                count: seg.length,
                points,
            });
        }
        out.sort_by_key(|a| a.valuation);
        Ok(out)
    }

    /// Pairs of torsion points that are not `F_q`-proportional, in a fixed order.
    pub fn seed_pairs(&self, points: &[Cinf]) -> Vec<(usize, usize)> {
        let units = self.tower.gf().base_units();
        let mut out = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let proportional = units.iter().any(|&c| (&points[j] - &points[i].scale(c)).is_zero());
                if !proportional {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Solves `ρ_t(x) = rhs` for the root closest to `seed`.
    pub fn divide_by_t(&self, rhs: &Cinf, seed: &Cinf) -> Result<Cinf> {
        let mut lin = self.rho_t().to_linearized();
        lin[0] = -rhs;
        poly::hensel_root(&lin, seed)
    }

    /// Period through a torsion seed: `e^{(1)} = seed`, `e^{(n+1)}` the root of
    /// `ρ_t(x) = e^{(n)}` near `e^{(n)}/θ`, stopping at the first `n` where the
    /// logarithm certifies; then `ω = θ^n log(e^{(n)})`.
    pub fn period_from_seed(&self, seed: &Cinf, cap: usize) -> Result<Period> {
        let mut e = seed.clone();
        for n in 1..=cap {
            match self.log_eval(&e) {
                Ok(l) => {
                    let omega = l.mul_theta_pow(n as i64);
                    log::debug!("period: tower height {n}");
                    let need = required_order(&self.tower);
                    let r = self.exp_eval(&omega)?;
                    if r.zero_order() < need {
                        return Err(Error::VerificationFailed(format!(
                            "exp(ω) vanishes only to order {} of {need}",
                            r.zero_order()
                        )));
                    }
                    return Ok(Period {
                        omega,
                        seed: seed.clone(),
                        height: n,
                    });
                }
                Err(Error::DivergentEvaluation(_)) => {}
                Err(other) => return Err(other),
            }
            let next_seed = e.mul_theta_pow(-1);
            e = self.divide_by_t(&e, &next_seed)?;
        }
        Err(Error::NoConvergence(format!("division tower exceeded height {cap}")))
    }

    /// Periods through each seed, in order.
    pub fn lattice(&self, seeds: &[Cinf], cap: usize) -> Result<Lattice> {
        let periods = seeds
            .iter()
            .map(|s| self.period_from_seed(s, cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(Lattice { periods })
    }

    /// The isomorphic module with `u = 1`: returns `(ν, x)` with `x^{q²-1} = 1/u`
    /// and `ν_t = x^{-1} ρ_t x`.
    pub fn normalize(&self) -> Result<(DrinfeldModule, Cinf)> {
        if self.rank != 2 {
            return Err(Error::Config("normalization applies to rank 2".into()));
        }
        let q = self.tower.q();
        let x = if self.u == Cinf::one(&self.tower) {
            Cinf::one(&self.tower)
        } else {
            poly::nth_root(&self.u.inv()?, q * q - 1)?
        };
        let kappa = &self.kappa * &x.pow(q - 1);
        let nu = DrinfeldModule::rank2(&self.tower, kappa, Cinf::one(&self.tower), self.depth())?;
        Ok((nu, x))
    }

    /// Residuals of `exp_ρ∘log_ρ = id`: entry `n` is the coefficient of `z^{q^n}`.
    pub fn exp_log_residuals(&self, depth: usize) -> Result<Vec<Cinf>> {
        let d = depth.min(self.depth());
        let mut out = Vec::with_capacity(d + 1);
        for n in 0..=d {
            let mut s = if n == 0 {
                -&Cinf::one(&self.tower)
            } else {
                Cinf::zero(&self.tower)
            };
            for i in 0..=n {
                s = &s + &(&self.alpha[i] * &self.beta[n - i].frobenius(i as i64)?);
            }
            out.push(s);
        }
        Ok(out)
    }

    /// Residuals of the series identity `exp_ρ(θz) = ρ_t(exp_ρ(z))`, per `z^{q^i}`.
    pub fn functional_equation_residuals(&self) -> Result<Vec<Cinf>> {
        let th = Cinf::theta(&self.tower);
        let mut out = Vec::new();
        for i in 0..=self.depth() {
            let lhs = &self.alpha[i] * &th.frobenius(i as i64)?;
            let mut rhs = &th * &self.alpha[i];
            if i >= 1 {
                rhs = &rhs + &(&self.kappa * &self.alpha[i - 1].frobenius(1)?);
            }
            if i >= 2 {
                rhs = &rhs + &(&self.u * &self.alpha[i - 2].frobenius(2)?);
            }
            out.push(&lhs - &rhs);
        }
        Ok(out)
    }
}

/// Checks `eρ_t = ρ′_t e` and, when it holds, the adjoint square
/// `ρ_t* e* = e* ρ′_t*`.
pub fn verify_morphism(e: &SkewPoly, rho: &DrinfeldModule, rho2: &DrinfeldModule) -> Result<MorphismReport> {
    let lhs = e.mul(&rho.rho_t())?;
    let rhs = rho2.rho_t().mul(e)?;
    let diff = lhs.sub(&rhs);
    let commutes = diff.coeffs().iter().all(|c| c.is_zero());
    let adjoint_residual = if commutes {
        let es = e.adjoint()?;
        let a = rho.rho_t().adjoint()?.mul(&es)?;
        let b = es.mul(&rho2.rho_t().adjoint()?)?;
        Some(a.sub(&b).zero_order())
    } else {
        None
    };
    Ok(MorphismReport {
        commutes,
        residual: diff.zero_order(),
        adjoint_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::tests::tower;

    fn th(t: &Arc<Tower>, k: i64) -> Cinf {
        Cinf::theta_pow(t, k)
    }

    fn sample_q3() -> DrinfeldModule {
        let t = tower(3, 4, 8, 240);
        DrinfeldModule::rank2(&t, Cinf::one(&t), Cinf::one(&t), DEFAULT_DEPTH).unwrap()
    }

    #[test]
    fn carlitz_first_coefficients() {
        let t = tower(3, 2, 2, 120);
        let c = DrinfeldModule::carlitz(&t, 6).unwrap();
        assert_eq!(c.exp_coeffs()[0], Cinf::one(&t));
        let expect = (&th(&t, 3) - &th(&t, 1)).inv().unwrap();
        assert!(c.exp_coeffs()[1].eq_to_prec(&expect));
        assert!((&c.log_coeffs()[1] + &c.exp_coeffs()[1]).is_zero());
    }

    #[test]
    fn rank2_second_coefficient() {
        let rho = sample_q3();
        let t = rho.tower().clone();
        let a1 = &rho.exp_coeffs()[1];
        let expect = (&(rho.kappa() * &a1.frobenius(1).unwrap()) + rho.u())
            .div(&(&th(&t, 9) - &th(&t, 1)))
            .unwrap();
        assert!(rho.exp_coeffs()[2].eq_to_prec(&expect));
    }

    #[test]
    fn series_identities() {
        let rho = sample_q3();
        for r in rho.functional_equation_residuals().unwrap() {
            assert!(r.is_zero());
        }
        for r in rho.exp_log_residuals(5).unwrap() {
            assert!(r.is_zero());
        }
    }

    #[test]
    fn inner_quasi_period_is_z_minus_exp() {
        let rho = sample_q3();
        let c = rho.quasi_period_coeffs(&Biderivation::inner(&rho)).unwrap();
        for i in 1..=6 {
            assert!((&c[i] + &rho.exp_coeffs()[i]).is_zero(), "coefficient {i}");
        }
        let t = rho.tower().clone();
        let ctau = rho.quasi_period_coeffs(&Biderivation::tau(&t)).unwrap();
        assert!(ctau[1].eq_to_prec(&(&th(&t, 3) - &th(&t, 1)).inv().unwrap()));
        let zero = Biderivation::new(SkewPoly::zero(&t)).unwrap();
        assert!(rho
            .quasi_period_coeffs(&zero)
            .unwrap()
            .iter()
            .all(|c| c.is_exact_zero()));
    }

    #[test]
    fn exp_and_log_round_trip() {
        let rho = sample_q3();
        let t = rho.tower().clone();
        assert!(rho.exp_eval(&Cinf::zero(&t)).unwrap().is_exact_zero());
        let z = &th(&t, -1) + &Cinf::constant(&t, 7).mul_theta_pow(-2);
        let ez = rho.exp_eval(&z).unwrap();
        let back = rho.log_eval(&ez).unwrap();
        assert!(back.eq_to_prec(&z));
        assert!(back.prec() >= 192);
    }

    #[test]
    fn log_rejects_large_arguments() {
        let rho = sample_q3();
        let t = rho.tower().clone();
        assert!(matches!(rho.log_eval(&th(&t, 2)), Err(Error::DivergentEvaluation(_))));
    }

    #[test]
    fn carlitz_torsion_and_period() {
        let t = tower(3, 2, 2, 240);
        let c = DrinfeldModule::carlitz(&t, DEFAULT_DEPTH).unwrap();
        let groups = c.torsion_points().unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].valuation, Rational::new(-1, 2));
        let pts = groups[0].points.clone().unwrap();
        assert_eq!(pts.len(), 2);
        for x in &pts {
            assert!((x * x).eq_to_prec(&-th(&t, 1)));
        }
        let p = c.period_from_seed(&pts[0], DEFAULT_TOWER_CAP).unwrap();
        let ez = c.exp_eval(&p.omega).unwrap();
        assert!(ez.zero_order() >= 192, "exp(ω) only zero to {}", ez.zero_order());
    }

    #[test]
    fn rank2_torsion_valuations() {
        let rho = sample_q3();
        let groups = rho.torsion_points().unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].valuation, Rational::new(-1, 8));
        let pts = groups[0].points.clone().unwrap();
        assert_eq!(pts.len(), 8);
        for x in &pts {
            assert!(rho.rho_t().eval(x).unwrap().zero_order() >= 192);
        }
        assert!(!rho.seed_pairs(&pts).is_empty());
    }

    #[test]
    fn rank2_periods_vanish_under_exp() {
        let rho = sample_q3();
        let pts = rho.torsion_points().unwrap()[0].points.clone().unwrap();
        let (i, j) = rho.seed_pairs(&pts)[0];
        let w1 = rho.period_from_seed(&pts[i], DEFAULT_TOWER_CAP).unwrap().omega;
        let w2 = rho.period_from_seed(&pts[j], DEFAULT_TOWER_CAP).unwrap().omega;
        for w in [&w1, &w2] {
            assert!(rho.exp_eval(w).unwrap().zero_order() >= 192);
        }
        let t = rho.tower().clone();
        let comb = &w1 + &(&Cinf::theta(&t) * &w2);
        assert!(rho.exp_eval(&comb).unwrap().zero_order() >= 192);
        let z = th(&t, -1);
        let shifted = rho.exp_eval(&(&z + &w1)).unwrap();
        assert!(shifted.eq_to_prec(&rho.exp_eval(&z).unwrap()));
    }

    #[test]
    fn quasi_period_evaluations_agree() {
        let rho = sample_q3();
        let t = rho.tower().clone();
        let lam = &th(&t, -1) + &th(&t, 1);
        let a = rho.quasi_period_eval(&lam, true).unwrap();
        assert!(!a.is_zero());
        assert!(rho.quasi_period_eval(&Cinf::zero(&t), true).unwrap().is_exact_zero());
        let pts = rho.torsion_points().unwrap()[0].points.clone().unwrap();
        let w = rho.period_from_seed(&pts[0], DEFAULT_TOWER_CAP).unwrap().omega;
        let inner = rho.quasi_period_series(&Biderivation::inner(&rho), &w).unwrap();
        assert!(inner.eq_to_prec(&w));
        assert!((&inner - &w).zero_order() >= 192);
    }

    #[test]
    fn quasi_periodic_functional_equation() {
        let rho = sample_q3();
        let t = rho.tower().clone();
        let z = &th(&t, -1) + &Cinf::one(&t);
        let tau = Biderivation::tau(&t);
        let lhs = &rho.quasi_period_series(&tau, &z.mul_theta_pow(1)).unwrap()
            - &(&Cinf::theta(&t) * &rho.quasi_period_series(&tau, &z).unwrap());
        let rhs = tau.delta_t().eval(&rho.exp_eval(&z).unwrap()).unwrap();
        assert!(lhs.eq_to_prec(&rhs));
        assert!((&lhs - &rhs).zero_order() >= 192);
    }

    #[test]
    fn normalization() {
        let t = tower(3, 4, 8 * 9, 240);
        let gf = t.gf();
        // an eighth power, so 1/u has an eighth root
        let u0 = gf.exp(16);
        let rho = DrinfeldModule::rank2(&t, Cinf::one(&t), Cinf::constant(&t, u0), 8).unwrap();
        let (nu, x) = rho.normalize().unwrap();
        assert!((&x.pow(8) * rho.u()).eq_to_prec(&Cinf::one(&t)));
        let xi = x.inv().unwrap();
        for i in 0..=4 {
            let xq = xi.frobenius(i as i64).unwrap();
            let lhs = &(&x * &nu.exp_coeffs()[i]) * &xq;
            assert!(lhs.eq_to_prec(&rho.exp_coeffs()[i]), "coefficient {i}");
        }
        let same = DrinfeldModule::rank2(&t, Cinf::one(&t), Cinf::one(&t), 4).unwrap();
        assert_eq!(same.normalize().unwrap().1, Cinf::one(&t));
    }

    #[test]
    fn morphisms() {
        let t = tower(3, 2, 2, 60);
        let rho = DrinfeldModule::rank2(&t, Cinf::zero(&t), Cinf::one(&t), 4).unwrap();
        let c = Cinf::constant(&t, t.gf().generator());
        let r = verify_morphism(&SkewPoly::constant(c), &rho, &rho).unwrap();
        assert!(r.commutes);
        assert_eq!(r.adjoint_residual, Some(crate::cinf::EXACT));
        let one = SkewPoly::constant(Cinf::one(&t));
        assert!(verify_morphism(&one, &rho, &rho).unwrap().commutes);
        let rho2 = DrinfeldModule::rank2(&t, Cinf::one(&t), Cinf::one(&t), 4).unwrap();
        let r = verify_morphism(&SkewPoly::tau_pow(&t, 1), &rho2, &rho2).unwrap();
        assert!(!r.commutes);
        assert!(r.adjoint_residual.is_none());
    }
}
