//! Logarithms of algebraic points: the vectors `g`, the block systems
//! `Φ_n`, `Ψ_n`, and numeric certificates for linear relations among
//! `ω₁, ω₂, λ₁, …, λ_n`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::agf::Agf;
use crate::cinf::Cinf;
use crate::drinfeld::{DrinfeldModule, Lattice};
use crate::error::{Error, Result};
use crate::motive::{difference_residuals, psi_matrix, specialize_psi, OmegaSeries};
use crate::residual::{required_order, Residuals};
use crate::tmatrix::{ExactMatrix, Matrix, TMatrix};
use crate::tseries::{PolyT, TSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    GivenLambda,
    LiftedFromAlpha,
}

/// A pair with `exp_ρ(λ) = α`, checked to `0.8 N`.
#[derive(Clone, Debug)]
pub struct LogPoint {
    pub lambda: Cinf,
    pub alpha: Cinf,
    pub provenance: Provenance,
}

impl LogPoint {
    pub fn from_lambda(rho: &DrinfeldModule, lambda: &Cinf) -> Result<Self> {
        let alpha = rho.exp_eval(lambda)?;
        Ok(LogPoint {
            lambda: lambda.clone(),
            alpha,
            provenance: Provenance::GivenLambda,
        })
    }

    pub fn from_alpha(rho: &DrinfeldModule, alpha: &Cinf) -> Result<Self> {
        let lambda = rho.log_eval(alpha)?;
        let p = LogPoint {
            lambda,
            alpha: alpha.clone(),
            provenance: Provenance::LiftedFromAlpha,
        };
        p.check(rho)?;
        Ok(p)
    }

    /// A supplied pair, rejected unless `exp_ρ(λ) = α` to precision.
    pub fn new(rho: &DrinfeldModule, lambda: &Cinf, alpha: &Cinf) -> Result<Self> {
        let p = LogPoint {
            lambda: lambda.clone(),
            alpha: alpha.clone(),
            provenance: Provenance::GivenLambda,
        };
        p.check(rho)?;
        Ok(p)
    }

    fn check(&self, rho: &DrinfeldModule) -> Result<()> {
        let r = (&rho.exp_eval(&self.lambda)? - &self.alpha).zero_order();
        let need = required_order(rho.tower());
        if r < need {
            return Err(Error::VerificationFailed(format!(
                "exp(λ) - α vanishes only to order {r} of {need}"
            )));
        }
        Ok(())
    }
}

fn require_normalized(rho: &DrinfeldModule) -> Result<()> {
    if rho.rank() != 2 || *rho.u() != Cinf::one(rho.tower()) {
        return Err(Error::Config("g-vectors are built for rank 2 with u = 1".into()));
    }
    Ok(())
}

/// `g = (-κf_λ^{(1)} - f_λ^{(2)}, -f_λ^{(1)})` and `h = (α, 0)`.
#[derive(Clone, Debug)]
pub struct GVector {
    pub g1: TSeries,
    pub g2: TSeries,
    pub alpha: Cinf,
    agf: Agf,
}

impl GVector {
    pub fn new(rho: &DrinfeldModule, point: &LogPoint, t: usize) -> Result<Self> {
        require_normalized(rho)?;
        let agf = Agf::build_full(rho, &point.lambda)?;
        let f = agf.to_tseries(t)?;
        let f1 = f.twist(1)?;
        let g1 = f1.scale(rho.kappa()).add(&f.twist(2)?).neg();
        Ok(GVector {
            g1,
            g2: f1.neg(),
            alpha: point.alpha.clone(),
            agf,
        })
    }

    /// `(g₁(θ), g₂(θ))` from the partial-fraction form.
    pub fn at_theta(&self) -> Result<(Cinf, Cinf)> {
        let rho = self.agf.module();
        let th = Cinf::theta(rho.tower());
        let a = self.agf.eval_twisted(1, &th)?;
        let b = self.agf.eval_twisted(2, &th)?;
        Ok((-&(&(rho.kappa() * &a) + &b), -&a))
    }

    /// `g₁(θ) - (λ - α)` and `g₂(θ) + F_τ(λ)`.
    pub fn specialization_residuals(&self, point: &LogPoint) -> Result<Residuals> {
        let rho = self.agf.module();
        let (a, b) = self.at_theta()?;
        let r1 = &a - &(&point.lambda - &point.alpha);
        let r2 = &b + &rho.quasi_period_eval(&point.lambda, true)?;
        Ok(Residuals::of([&r1, &r2]))
    }

    fn column(&self) -> Result<TMatrix> {
        Matrix::from_rows(vec![vec![self.g1.clone()], vec![self.g2.clone()]])
    }
}

/// Coefficients of `(Φ^tr)^{(1)} g - g^{(1)} - h^{(1)}`, the twisted form of
/// `Φ^tr g^{(-1)} = g + h`.
pub fn verify_log_fneq(rho: &DrinfeldModule, point: &LogPoint, t: usize) -> Result<Residuals> {
    let g = GVector::new(rho, point, t)?;
    let phi = crate::motive::phi_matrix(rho)?;
    let lhs = phi.twist(1)?.transpose().to_tmatrix(t).mul(&g.column()?)?;
    let h1 = TSeries::constant(&point.alpha.frobenius(1)?, t);
    let col = g.column()?.twist(1)?;
    let rhs = Matrix::from_rows(vec![vec![col.get(0, 0).add(&h1)], vec![col.get(1, 0).clone()]])?;
    let diff = lhs.sub(&rhs)?;
    Ok(Residuals::of(diff.entries().iter().flat_map(|s| s.coeffs().iter())))
}

/// The block system for `n` logarithms.
#[derive(Clone, Debug)]
pub struct ExtendedSystem {
    pub n: usize,
    pub points: Vec<LogPoint>,
    pub phi_n: ExactMatrix,
    pub psi_n: TMatrix,
    /// Coefficients of `Ψ_n - Φ_n^{(1)} Ψ_n^{(1)}`.
    pub difference: Residuals,
    /// `ω₁, ω₂, λ_i, F_τ(ω₁), F_τ(ω₂), F_τ(λ_i)`.
    pub generators: Vec<(String, Cinf)>,
    /// `Ψ_n(θ)` from generating functions minus its closed form in the generators.
    pub reconstruction: Residuals,
}

pub fn extended_system(
    rho: &DrinfeldModule,
    lattice: &Lattice,
    points: &[LogPoint],
    omega: &OmegaSeries,
) -> Result<ExtendedSystem> {
    let tower = rho.tower();
    let t = omega.series.len();
    let n = points.len();
    let d = n + 2;
    let mm = psi_matrix(rho, lattice, omega)?;
    let gs = points
        .iter()
        .map(|p| GVector::new(rho, p, t))
        .collect::<Result<Vec<_>>>()?;

    let pzero = PolyT::zero(tower);
    let pone = PolyT::constant(Cinf::one(tower));
    let mut phi = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            phi.push(match (r < 2, c < 2) {
                (true, true) => mm.phi.get(r, c).clone(),
                (true, false) => pzero.clone(),
                (false, true) if c == 0 => PolyT::constant(points[r - 2].alpha.clone()),
                (false, true) => pzero.clone(),
                (false, false) if r == c => pone.clone(),
                (false, false) => pzero.clone(),
            });
        }
    }
    let phi_n = Matrix::new(d, d, phi)?;

    let szero = TSeries::zero(tower, t);
    let sone = TSeries::one(tower, t);
    let mut psi = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            psi.push(match (r < 2, c < 2) {
                (true, true) => mm.psi.get(r, c).clone(),
                (true, false) => szero.clone(),
                (false, true) => {
                    let g = &gs[r - 2];
                    g.g1.mul(mm.psi.get(0, c)).add(&g.g2.mul(mm.psi.get(1, c)))
                }
                (false, false) if r == c => sone.clone(),
                (false, false) => szero.clone(),
            });
        }
    }
    let psi_n = Matrix::new(d, d, psi)?;
    let difference = difference_residuals(&phi_n, &psi_n)?;

    let pm = specialize_psi(rho, lattice, omega)?;
    let mut generators: Vec<(String, Cinf)> = vec![
        ("omega1".into(), lattice.omega(0).clone()),
        ("omega2".into(), lattice.omega(1).clone()),
    ];
    let mut f_lambda = Vec::with_capacity(n);
    for (i, p) in points.iter().enumerate() {
        generators.push((format!("lambda{}", i + 1), p.lambda.clone()));
        f_lambda.push(rho.quasi_period_eval(&p.lambda, true)?);
    }
    generators.push(("F_tau(omega1)".into(), pm.f_tau[0].clone()));
    generators.push(("F_tau(omega2)".into(), pm.f_tau[1].clone()));
    for (i, f) in f_lambda.iter().enumerate() {
        generators.push((format!("F_tau(lambda{})", i + 1), f.clone()));
    }

    let mut diffs = pm.agreement.orders.clone();
    for (k, g) in gs.iter().enumerate() {
        let (a, b) = g.at_theta()?;
        let p = &points[k];
        let ca = &p.lambda - &p.alpha;
        let cb = -&f_lambda[k];
        for c in 0..2 {
            let direct = &(&a * pm.psi_theta.get(0, c)) + &(&b * pm.psi_theta.get(1, c));
            let closed = &(&ca * pm.expected.get(0, c)) + &(&cb * pm.expected.get(1, c));
            diffs.push((&direct - &closed).zero_order());
        }
    }
    Ok(ExtendedSystem {
        n,
        points: points.to_vec(),
        phi_n,
        psi_n,
        difference,
        generators,
        reconstruction: Residuals::new(diffs),
    })
}

/// Values at `θ` of the coefficients in `Σ ℓ_i λ_i - ℓ₁₁ω₁ - ℓ₂₁ω₂`.
#[derive(Clone, Debug)]
pub struct Relation {
    pub l11: Cinf,
    pub l21: Cinf,
    pub l: Vec<Cinf>,
}

#[derive(Clone, Debug)]
pub struct RelationReport {
    pub value: Cinf,
    /// Zero order of `value`.
    pub order: i64,
    pub pass: bool,
    /// Zero orders of the two specialized identities, when `B(θ)` was supplied.
    pub specialized: Option<[i64; 2]>,
}

/// Evaluates `Σ ℓ_i λ_i - ℓ₁₁ω₁ - ℓ₂₁ω₂`; passes when it vanishes to `0.8 N`.
/// With `b_theta` also evaluates
/// `SξF_τ(ω₂) + (B - Σℓ_iF_τ(λ_i))ξω₂ - ℓ₁₁π̃` and
/// `-SξF_τ(ω₁) - (B - Σℓ_iF_τ(λ_i))ξω₁ - ℓ₂₁π̃`, `S = Σ ℓ_i λ_i`.
pub fn relation_certificate(
    rho: &DrinfeldModule,
    lattice: &Lattice,
    points: &[LogPoint],
    rel: &Relation,
    b_theta: Option<(&Cinf, &OmegaSeries)>,
) -> Result<RelationReport> {
    if rel.l.len() != points.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficients for {} points",
            rel.l.len(),
            points.len()
        )));
    }
    let tower = rho.tower();
    let mut s = Cinf::zero(tower);
    for (l, p) in rel.l.iter().zip(points) {
        s = &s + &(l * &p.lambda);
    }
    let w1 = lattice.omega(0);
    let w2 = lattice.omega(1);
    let value = &(&s - &(&rel.l11 * w1)) - &(&rel.l21 * w2);
    let order = value.zero_order();
    let specialized = match b_theta {
        None => None,
        Some((b, omega)) => {
            let xi = omega.xi_value();
            let pt = omega.pi_tilde()?;
            let f1 = rho.quasi_period_eval(w1, true)?;
            let f2 = rho.quasi_period_eval(w2, true)?;
            let mut fl = Cinf::zero(tower);
            for (l, p) in rel.l.iter().zip(points) {
                fl = &fl + &(l * &rho.quasi_period_eval(&p.lambda, true)?);
            }
            let m = b - &fl;
            let e1 = &(&(&(&s * &xi) * &f2) + &(&(&m * &xi) * w2)) - &(&rel.l11 * &pt);
            let e2 = &(&-&(&(&s * &xi) * &f1) - &(&(&m * &xi) * w1)) - &(&rel.l21 * &pt);
            Some([e1.zero_order(), e2.zero_order()])
        }
    };
    Ok(RelationReport {
        pass: order >= required_order(tower),
        value,
        order,
        specialized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::tests::tower;
    use crate::drinfeld::{DEFAULT_DEPTH, DEFAULT_TOWER_CAP};
    use crate::motive::certified_lattice;

    struct Fixture {
        rho: DrinfeldModule,
        omega: OmegaSeries,
        lattice: Lattice,
    }

    fn fixture() -> Fixture {
        let t = tower(3, 4, 8, 240);
        let rho = DrinfeldModule::rank2(&t, Cinf::one(&t), Cinf::one(&t), DEFAULT_DEPTH).unwrap();
        let omega = OmegaSeries::new(&t, 16).unwrap();
        let (lattice, _) = certified_lattice(&rho, &omega, DEFAULT_TOWER_CAP).unwrap();
        Fixture { rho, omega, lattice }
    }

    #[test]
    fn log_points() {
        let fx = fixture();
        let t = fx.rho.tower().clone();
        let p = LogPoint::from_lambda(&fx.rho, fx.lattice.omega(0)).unwrap();
        assert!(p.alpha.zero_order() >= required_order(&t));
        let a = Cinf::theta_pow(&t, -1);
        let p = LogPoint::from_alpha(&fx.rho, &a).unwrap();
        assert_eq!(p.provenance, Provenance::LiftedFromAlpha);
        let shifted = LogPoint::from_lambda(&fx.rho, &(&p.lambda + fx.lattice.omega(0))).unwrap();
        assert!((&shifted.alpha - &a).zero_order() >= required_order(&t));
        assert!(matches!(
            LogPoint::new(&fx.rho, &p.lambda, &Cinf::one(&t)),
            Err(Error::VerificationFailed(_))
        ));
    }

    #[test]
    fn g_vector_specializations() {
        let fx = fixture();
        let t = fx.rho.tower().clone();
        let need = required_order(&t);
        let p = LogPoint::from_alpha(&fx.rho, &Cinf::theta_pow(&t, -1)).unwrap();
        let g = GVector::new(&fx.rho, &p, 16).unwrap();
        assert!(g.specialization_residuals(&p).unwrap().holds_to(need));
        let zero = LogPoint::from_lambda(&fx.rho, &Cinf::zero(&t)).unwrap();
        let g0 = GVector::new(&fx.rho, &zero, 8).unwrap();
        assert!(g0.g1.coeffs().iter().chain(g0.g2.coeffs()).all(|c| c.is_exact_zero()));
        for pt in [&p, &zero, &LogPoint::from_lambda(&fx.rho, fx.lattice.omega(0)).unwrap()] {
            assert!(verify_log_fneq(&fx.rho, pt, 16).unwrap().holds_to(need));
        }
    }

    #[test]
    fn g_vector_is_additive() {
        let fx = fixture();
        let t = fx.rho.tower().clone();
        let a = LogPoint::from_alpha(&fx.rho, &Cinf::theta_pow(&t, -1)).unwrap();
        let b = LogPoint::from_alpha(&fx.rho, &Cinf::theta_pow(&t, -2)).unwrap();
        let s = LogPoint::new(&fx.rho, &(&a.lambda + &b.lambda), &(&a.alpha + &b.alpha)).unwrap();
        let (ga, gb, gs) = (
            GVector::new(&fx.rho, &a, 8).unwrap(),
            GVector::new(&fx.rho, &b, 8).unwrap(),
            GVector::new(&fx.rho, &s, 8).unwrap(),
        );
        assert!(ga.g1.add(&gb.g1).sub(&gs.g1).zero_order() >= required_order(&t));
        assert!(ga.g2.add(&gb.g2).sub(&gs.g2).zero_order() >= required_order(&t));
    }

    #[test]
    fn block_systems() {
        let fx = fixture();
        let t = fx.rho.tower().clone();
        let need = required_order(&t);
        let empty = extended_system(&fx.rho, &fx.lattice, &[], &fx.omega).unwrap();
        assert_eq!(empty.phi_n, crate::motive::phi_matrix(&fx.rho).unwrap());
        let p1 = LogPoint::from_alpha(&fx.rho, &Cinf::theta_pow(&t, -1)).unwrap();
        let p2 = LogPoint::from_lambda(&fx.rho, &(&Cinf::theta(&t) * &p1.lambda)).unwrap();
        for pts in [vec![p1.clone()], vec![p1.clone(), p2]] {
            let sys = extended_system(&fx.rho, &fx.lattice, &pts, &fx.omega).unwrap();
            assert_eq!(sys.psi_n.rows(), 2 + pts.len());
            assert!(sys.difference.holds_to(need), "n={}: {}", sys.n, sys.difference.min());
            assert!(sys.reconstruction.holds_to(need));
            assert_eq!(sys.generators.len(), 4 + 2 * pts.len());
        }
    }

    #[test]
    fn relation_certificates() {
        let fx = fixture();
        let t = fx.rho.tower().clone();
        let zero = Cinf::zero(&t);
        let one = Cinf::one(&t);
        let w = LogPoint::from_lambda(&fx.rho, fx.lattice.omega(0)).unwrap();
        let taut = Relation {
            l11: one.clone(),
            l21: zero.clone(),
            l: vec![one.clone()],
        };
        let r = relation_certificate(&fx.rho, &fx.lattice, &[w], &taut, None).unwrap();
        assert!(r.pass);
        let p = LogPoint::from_alpha(&fx.rho, &Cinf::theta_pow(&t, -1)).unwrap();
        let trivial = Relation {
            l11: zero.clone(),
            l21: zero.clone(),
            l: vec![zero.clone()],
        };
        assert!(
            relation_certificate(&fx.rho, &fx.lattice, core::slice::from_ref(&p), &trivial, None)
                .unwrap()
                .pass
        );
        let generic = Relation {
            l11: Cinf::theta(&t),
            l21: one.clone(),
            l: vec![one.clone()],
        };
        let r = relation_certificate(&fx.rho, &fx.lattice, core::slice::from_ref(&p), &generic, Some((&zero, &fx.omega))).unwrap();
        assert!(!r.pass);
        assert!(r.order < required_order(&t));
        let sides = r.specialized.unwrap();
        assert!(sides[0] < required_order(&t) || sides[1] < required_order(&t));
        let bad = Relation { l: vec![], ..generic };
        assert!(relation_certificate(&fx.rho, &fx.lattice, &[p], &bad, None).is_err());
    }
}
