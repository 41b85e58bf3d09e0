//! Anderson generating functions
//! `f_u(t) = Σ_{i≥0} α_i u^{q^i}/(θ^{q^i} - t) = Σ_{j≥0} exp_ρ(u/θ^{j+1}) t^j`.

use alloc::format;
use alloc::vec::Vec;

use crate::cinf::{Cinf, EXACT};
use crate::drinfeld::DrinfeldModule;
use crate::error::{Error, Result};
use crate::residual::Residuals;
use crate::tseries::{PolyT, TSeries, TailBound};

/// Partial-fraction form of `f_u` with `I` explicit poles and a certified tail.
#[derive(Clone, Debug)]
pub struct Agf {
    rho: DrinfeldModule,
    u: Cinf,
    numerators: Vec<Cinf>,
    /// Lower bound for `v(α_i u^{q^i})` over every dropped `i ≥ I`.
    tail_floor: i128,
}

fn clamp(x: i128) -> i64 {
    x.clamp(i64::MIN as i128 / 4, EXACT as i128 / 4) as i64
}

impl Agf {
    /// Keeps the poles `θ^{q^i}`, `i < poles`; `poles` may not exceed the
    /// module's coefficient depth plus one.
    pub fn build(rho: &DrinfeldModule, u: &Cinf, poles: usize) -> Result<Agf> {
        if poles == 0 || poles > rho.depth() + 1 {
            return Err(Error::Config(format!(
                "pole count {poles} must lie in 1..={}",
                rho.depth() + 1
            )));
        }
        let mut numerators = Vec::with_capacity(poles);
        let mut uq = u.clone();
        for (i, a) in rho.exp_coeffs().iter().take(poles).enumerate() {
            if i > 0 {
                uq = uq.frobenius(1)?;
            }
            numerators.push(a * &uq);
        }
        let tail_floor = if u.is_exact_zero() {
            EXACT as i128
        } else {
            rho.exp_term_floor(u.valuation_lb() as i128, poles).ok_or_else(|| {
                Error::PrecisionExhausted(format!(
                    "exp coefficients of depth {} do not bound the dropped poles",
                    rho.depth()
                ))
            })?
        };
        Ok(Agf {
            rho: rho.clone(),
            u: u.clone(),
            numerators,
            tail_floor,
        })
    }

    /// All poles the module's coefficient table supports.
    pub fn build_full(rho: &DrinfeldModule, u: &Cinf) -> Result<Agf> {
        Self::build(rho, u, rho.depth() + 1)
    }

    pub fn module(&self) -> &DrinfeldModule {
        &self.rho
    }

    pub fn u(&self) -> &Cinf {
        &self.u
    }

    pub fn pole_count(&self) -> usize {
        self.numerators.len()
    }

    /// `α_i u^{q^i}`.
    pub fn numerators(&self) -> &[Cinf] {
        &self.numerators
    }

    /// `θ^{q^i}`.
    pub fn pole(&self, i: usize) -> Result<Cinf> {
        Cinf::theta(self.rho.tower()).frobenius(i as i64)
    }

    /// `Res_{t=θ^{q^i}} f_u = -α_i u^{q^i}`.
    pub fn residue(&self, i: usize) -> Result<Cinf> {
        self.numerators
            .get(i)
            .map(|c| -c)
            .ok_or_else(|| Error::Config(format!("pole index {i} beyond {}", self.pole_count())))
    }

    /// Lower bound for the valuation of `Σ_{i≥I} (α_i u^{q^i})^{q^n}/(θ^{q^{i+n}} - t0)`.
    pub fn tail_bound(&self, n: u32, t0: &Cinf) -> Result<i64> {
        if self.tail_floor >= EXACT as i128 {
            return Ok(EXACT);
        }
        let tower = self.rho.tower();
        let q = tower.q() as i128;
        let e = tower.e() as i128;
        let i = self.pole_count() as u32;
        let pole_v = e
            .checked_mul(q.checked_pow(i + n).ok_or_else(|| overflow(i + n))?)
            .ok_or_else(|| overflow(i + n))?;
        if !t0.is_exact_zero() && (t0.valuation_lb() as i128) <= -pole_v {
            return Err(Error::DivergentEvaluation(format!(
                "t0 is not inside the disc of the dropped poles (valuation {})",
                t0.valuation_lb()
            )));
        }
        let qn = q.pow(n);
        Ok(clamp(qn * self.tail_floor + pole_v))
    }

    /// `f_u^{(n)}(t0) = Σ_i (α_i u^{q^i})^{q^n}/(θ^{q^{i+n}} - t0)`.
    pub fn eval_twisted(&self, n: u32, t0: &Cinf) -> Result<Cinf> {
        let tower = self.rho.tower();
        let mut acc = Cinf::zero(tower);
        for (i, num) in self.numerators.iter().enumerate() {
            if num.is_exact_zero() {
                continue;
            }
            let gap = &self.pole(i + n as usize)? - t0;
            if gap.is_zero() {
                return Err(Error::PoleHit { index: i + n as usize });
            }
            acc = &acc + &num.frobenius(n as i64)?.div(&gap)?;
        }
        Ok(acc.truncate(self.tail_bound(n, t0)?))
    }

    /// The first `t` coefficients from the partial fractions, with the tail
    /// `v(c_j) ≥ μ + e j` where `μ = min_i v(α_i u^{q^i}) + e q^i`.
    pub fn to_tseries(&self, t: usize) -> Result<TSeries> {
        let tower = self.rho.tower();
        if self.u.is_exact_zero() {
            return Ok(TSeries::zero(tower, t));
        }
        let q = tower.q() as i128;
        let e = tower.e() as i128;
        let big_i = self.pole_count() as u32;
        let qi = q.pow(big_i);
        let mut mu = self.tail_floor + e * qi;
        for (i, num) in self.numerators.iter().enumerate() {
            if !num.is_exact_zero() {
                mu = mu.min(num.valuation_lb() as i128 + e * q.pow(i as u32));
            }
        }
        let mut coeffs = Vec::with_capacity(t);
        for j in 0..t {
            let k = j as i64 + 1;
            let mut c = Cinf::zero(tower);
            for (i, num) in self.numerators.iter().enumerate() {
                let qi = tower.q().pow(i as u32) as i64;
                c = &c + &num.mul_theta_pow(-qi * k);
            }
            let bound = self.tail_floor + e * qi * k as i128;
            coeffs.push(c.truncate(clamp(bound)));
        }
        Ok(TSeries::new(
            tower,
            coeffs,
            TailBound::Affine {
                base: clamp(mu),
                slope: tower.e(),
            },
        ))
    }

    /// Differences between the partial-fraction coefficients and `exp_ρ(u/θ^{j+1})`.
    pub fn dual_residuals(&self, t: usize) -> Result<Residuals> {
        let series = self.to_tseries(t)?;
        let mut diffs = Vec::with_capacity(t);
        for (j, c) in series.coeffs().iter().enumerate() {
            let direct = self.rho.exp_eval(&self.u.mul_theta_pow(-(j as i64) - 1))?;
            diffs.push(c - &direct);
        }
        Ok(Residuals::of(&diffs))
    }
}

fn overflow(k: u32) -> Error {
    Error::PrecisionExhausted(format!("pole θ^(q^{k}) overflows exponents"))
}

/// Coefficients of `κ f_u^{(1)} + U f_u^{(2)} - (t - θ) f_u - exp_ρ(u)` through `t^{T-1}`,
/// where `ρ_t = θ + κτ + Uτ²`.
pub fn verify_fu1(rho: &DrinfeldModule, u: &Cinf, t: usize) -> Result<Residuals> {
    let tower = rho.tower();
    let f = Agf::build_full(rho, u)?.to_tseries(t)?;
    let mut lhs = f.twist(1)?.scale(rho.kappa());
    if !rho.u().is_exact_zero() {
        lhs = lhs.add(&f.twist(2)?.scale(rho.u()));
    }
    let shift = PolyT::t_minus(&Cinf::theta(tower)).to_tseries(t);
    let rhs = shift.mul(&f).add(&TSeries::constant(&rho.exp_eval(u)?, t));
    Ok(Residuals::of(lhs.sub(&rhs).coeffs()))
}

/// `κ f_u^{(1)}(θ) + U f_u^{(2)}(θ) + u - exp_ρ(u)`.
pub fn fu2_residual(rho: &DrinfeldModule, u: &Cinf) -> Result<Cinf> {
    let f = Agf::build_full(rho, u)?;
    let th = Cinf::theta(rho.tower());
    let mut acc = &(rho.kappa() * &f.eval_twisted(1, &th)?) + u;
    if !rho.u().is_exact_zero() {
        acc = &acc + &(rho.u() * &f.eval_twisted(2, &th)?);
    }
    Ok(&acc - &rho.exp_eval(u)?)
}

pub fn verify_fu2(rho: &DrinfeldModule, u: &Cinf) -> Result<Residuals> {
    Ok(Residuals::single(&fu2_residual(rho, u)?))
}
