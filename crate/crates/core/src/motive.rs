//! The Carlitz function `Ω`, the constant `ξ`, and the rank-2 motive matrices
//! `Φ_ρ`, `Ψ_ρ` with their difference equations and the Legendre invariant.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::agf::Agf;
use crate::cinf::Cinf;
use crate::drinfeld::{DrinfeldModule, Lattice};
use crate::error::{Error, Result};
use crate::gf::Fe;
use crate::residual::Residuals;
use crate::tmatrix::{CMatrix, ExactMatrix, Matrix, TMatrix};
use crate::tower::Tower;
use crate::tseries::{PolyT, TSeries, TailBound};

/// The designated root of `X^{q-1} = -1`: the smallest in packed order.
pub fn xi_constant(tower: &Tower) -> Result<Fe> {
    let gf = tower.gf();
    let q = tower.q() as usize;
    let mut poly = vec![0 as Fe; q];
    poly[0] = 1;
    poly[q - 1] = 1;
    gf.poly_roots(&poly).first().map(|r| r.0).ok_or_else(|| {
        Error::ResidueFieldTooSmall(format!(
            "X^{} = -1 has no root in F_(q^{}); use an even extension degree",
            q - 1,
            gf.m()
        ))
    })
}

/// `Ω(t) = (-θ)^{-q/(q-1)} Π_{i≥1} (1 - t/θ^{q^i})` truncated to `T` coefficients.
#[derive(Clone, Debug)]
pub struct OmegaSeries {
    /// `(-θ)^{-q/(q-1)}` for `(-θ)^{1/(q-1)} = ξ π^{-e/(q-1)}`.
    pub prefactor: Cinf,
    pub series: TSeries,
    /// Number of explicit product factors.
    pub factors: usize,
    pub xi: Fe,
}

impl OmegaSeries {
    pub fn new(tower: &Arc<Tower>, t: usize) -> Result<Self> {
        let q = tower.q() as i64;
        let e = tower.e();
        let gf = tower.gf();
        let xi = xi_constant(tower)?;
        let prefactor = Cinf::monomial(tower, gf.pow(xi, -q)?, e * q / (q - 1));
        // dropped factors perturb c_j by valuation ≥ e(q^{I+1} + (j-1)q)
        let mut factors = 1usize;
        while e * q.pow(factors as u32 + 1) < 2 * tower.n() + e * q {
            factors += 1;
        }
        let mut prod = PolyT::constant(Cinf::one(tower));
        for i in 1..=factors {
            let root = Cinf::theta_pow(tower, -q.pow(i as u32));
            prod = prod.mul(&PolyT::new(tower, vec![Cinf::one(tower), -&root]));
        }
        let coeffs = prod
            .to_tseries(t)
            .coeffs()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j == 0 {
                    c.clone()
                } else {
                    c.truncate(e * (q.pow(factors as u32 + 1) + (j as i64 - 1) * q))
                }
            })
            .collect();
        // c_j is a sum of products of j distinct θ^{-q^i}; for j > I at least
        // j - I of them come from dropped factors
        let big = e * q.pow(factors as u32 + 1);
        let tail = if t > factors {
            TailBound::Affine {
                base: -big * factors as i64,
                slope: big,
            }
        } else {
            TailBound::Affine { base: 0, slope: e * q }
        };
        let product = TSeries::new(tower, coeffs, tail);
        Ok(OmegaSeries {
            series: product.scale(&prefactor),
            prefactor,
            factors,
            xi,
        })
    }

    pub fn tower(&self) -> &Arc<Tower> {
        self.series.tower()
    }

    /// `ξ` as a constant of `C_∞`.
    pub fn xi_value(&self) -> Cinf {
        Cinf::constant(self.tower(), self.xi)
    }

    /// Coefficients of `Ω - (t - θ^q) Ω^{(1)}`.
    pub fn difference_residuals(&self) -> Result<Residuals> {
        let tower = self.tower();
        let t = self.series.len();
        let thq = Cinf::theta(tower).frobenius(1)?;
        let rhs = PolyT::t_minus(&thq).to_tseries(t).mul(&self.series.twist(1)?);
        Ok(Residuals::of(self.series.sub(&rhs).coeffs()))
    }

    pub fn at_theta(&self) -> Result<Cinf> {
        self.series.specialize(&Cinf::theta(self.tower()))
    }

    /// `π̃ = -1/Ω(θ)`.
    pub fn pi_tilde(&self) -> Result<Cinf> {
        Ok(-&self.at_theta()?.inv()?)
    }
}

/// `Φ_C = (t - θ)` for the Carlitz motive.
pub fn carlitz_phi(tower: &Arc<Tower>) -> ExactMatrix {
    Matrix::from_rows(vec![vec![PolyT::t_minus(&Cinf::theta(tower))]]).expect("1×1")
}

/// `Φ_ρ = [[0, 1], [(t-θ)/u^{(-2)}, -κ^{(-1)}/u^{(-2)}]]`.
pub fn phi_matrix(rho: &DrinfeldModule) -> Result<ExactMatrix> {
    let tower = rho.tower();
    if rho.rank() != 2 {
        return Err(Error::Config("Φ_ρ is defined for rank 2".into()));
    }
    let uinv = rho.u().frobenius(-2)?.inv()?;
    let k = rho.kappa().frobenius(-1)?;
    let zero = PolyT::zero(tower);
    let one = PolyT::constant(Cinf::one(tower));
    Matrix::from_rows(vec![
        vec![zero, one],
        vec![
            PolyT::t_minus(&Cinf::theta(tower)).scale(&uinv),
            PolyT::constant(-&(&k * &uinv)),
        ],
    ])
}

#[derive(Clone, Debug)]
pub struct MotiveMatrices {
    pub phi: ExactMatrix,
    pub psi: TMatrix,
    pub xi: Fe,
}

fn require_normalized(rho: &DrinfeldModule) -> Result<()> {
    if rho.rank() != 2 || *rho.u() != Cinf::one(rho.tower()) {
        return Err(Error::Config(
            "Ψ_ρ is built for rank 2 with u = 1; normalize the module first".into(),
        ));
    }
    Ok(())
}

/// `Ψ_ρ = ξΩ [[-f₂^{(1)}, f₁^{(1)}], [κf₂^{(1)} + f₂^{(2)}, -κf₁^{(1)} - f₁^{(2)}]]`
/// with `f_i` the generating function of `ω_i`.
pub fn psi_matrix(rho: &DrinfeldModule, lattice: &Lattice, omega: &OmegaSeries) -> Result<MotiveMatrices> {
    require_normalized(rho)?;
    if lattice.rank() != 2 {
        return Err(Error::Config("Ψ_ρ needs two periods".into()));
    }
    let t = omega.series.len();
    let xo = omega.series.scale(&omega.xi_value());
    let mut cols = Vec::with_capacity(2);
    for i in 0..2 {
        let f = Agf::build_full(rho, lattice.omega(i))?.to_tseries(t)?;
        let f1 = f.twist(1)?;
        let f2 = f.twist(2)?;
        cols.push((f1.clone(), f1.scale(rho.kappa()).add(&f2)));
    }
    let (f11, g1) = &cols[0];
    let (f21, g2) = &cols[1];
    let psi = Matrix::from_rows(vec![
        vec![xo.mul(&f21.neg()), xo.mul(f11)],
        vec![xo.mul(g2), xo.mul(&g1.neg())],
    ])?;
    Ok(MotiveMatrices {
        phi: phi_matrix(rho)?,
        psi,
        xi: omega.xi,
    })
}

/// Coefficients of `Ψ - Φ^{(1)} Ψ^{(1)}`, the twisted form of `Ψ^{(-1)} = ΦΨ`.
pub fn difference_residuals(phi: &ExactMatrix, psi: &TMatrix) -> Result<Residuals> {
    let t = psi.get(0, 0).len();
    let rhs = phi.twist(1)?.to_tmatrix(t).mul(&psi.twist(1)?)?;
    let diff = psi.sub(&rhs)?;
    Ok(Residuals::of(diff.entries().iter().flat_map(|s| s.coeffs().iter())))
}

/// `Ψ_ρ(θ)` from the generating functions next to the closed form built from
/// independently computed periods and quasi-periods.
#[derive(Clone, Debug)]
pub struct PeriodMatrix {
    pub psi_theta: CMatrix,
    /// `(ξ/π̃) [[F_τ(ω₂), -F_τ(ω₁)], [ω₂, -ω₁]]`.
    pub expected: CMatrix,
    /// `P_ρ = Ψ_ρ(θ)^{-1}`.
    pub p: CMatrix,
    pub f_tau: [Cinf; 2],
    /// `ζ` with `P_ρ = ζ [[ω₁, -F_τ(ω₁)], [ω₂, -F_τ(ω₂)]]`.
    pub zeta: Cinf,
    pub agreement: Residuals,
    pub inverse: Residuals,
    pub zeta_form: Residuals,
}

pub fn specialize_psi(rho: &DrinfeldModule, lattice: &Lattice, omega: &OmegaSeries) -> Result<PeriodMatrix> {
    require_normalized(rho)?;
    let tower = rho.tower();
    let th = Cinf::theta(tower);
    let xo = &omega.xi_value() * &omega.at_theta()?;
    let mut g = Vec::with_capacity(2);
    for i in 0..2 {
        let f = Agf::build_full(rho, lattice.omega(i))?;
        let a = f.eval_twisted(1, &th)?;
        let b = &(rho.kappa() * &a) + &f.eval_twisted(2, &th)?;
        g.push((a, b));
    }
    let psi_theta = Matrix::from_rows(vec![vec![-&g[1].0, g[0].0.clone()], vec![g[1].1.clone(), -&g[0].1]])?.scale(&xo);
    let w1 = lattice.omega(0);
    let w2 = lattice.omega(1);
    let f1 = rho.quasi_period_eval(w1, true)?;
    let f2 = rho.quasi_period_eval(w2, true)?;
    let c = omega.xi_value().div(&omega.pi_tilde()?)?;
    let expected = Matrix::from_rows(vec![vec![f2.clone(), -&f1], vec![w2.clone(), -w1]])?.scale(&c);
    let p = psi_theta.inverse()?;
    let agreement = Residuals::of(psi_theta.sub(&expected)?.entries());
    let inverse = Residuals::of(p.mul(&psi_theta)?.sub(&Matrix::identity(&th, 2))?.entries());
    let zeta = p.get(0, 0).div(w1)?;
    let form = Matrix::from_rows(vec![vec![w1.clone(), -&f1], vec![w2.clone(), -&f2]])?.scale(&zeta);
    let zeta_form = Residuals::of(p.sub(&form)?.entries());
    Ok(PeriodMatrix {
        psi_theta,
        expected,
        p,
        f_tau: [f1, f2],
        zeta,
        agreement,
        inverse,
        zeta_form,
    })
}

/// `[(ω₁F_τ(ω₂) - ω₂F_τ(ω₁)) Ω(θ)]^{q-1}` as a residue-field element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegendreInvariant {
    pub value: Fe,
    /// Zero order of the bracket minus its constant term.
    pub tail: i64,
}

pub fn legendre_invariant(w: [&Cinf; 2], f: [&Cinf; 2], omega_theta: &Cinf) -> Result<LegendreInvariant> {
    let tower = omega_theta.tower();
    let bracket = &(&(w[0] * f[1]) - &(w[1] * f[0])) * omega_theta;
    let (v, c) = bracket.leading().ok_or(Error::NotAUnit {
        valuation: bracket.zero_order(),
    })?;
    if v != 0 {
        return Err(Error::NotAUnit { valuation: v });
    }
    let tail = (&bracket - &Cinf::constant(tower, c)).zero_order();
    let value = tower.gf().pow(c, tower.q() as i64 - 1)?;
    Ok(LegendreInvariant { value, tail })
}

/// Periods of `ρ` from the first pair of torsion seeds whose Legendre bracket is a unit.
pub fn certified_lattice(
    rho: &DrinfeldModule,
    omega: &OmegaSeries,
    cap: usize,
) -> Result<(Lattice, LegendreInvariant)> {
    let groups = rho.torsion_points()?;
    let mut points = Vec::new();
    let mut first_err = None;
    for g in groups {
        match g.points {
            Ok(p) => points.extend(p),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if rho.rank() == 1 {
        let seed = points
            .first()
            .ok_or_else(|| first_err.clone().unwrap_or(Error::NoConvergence("no torsion".into())))?;
        let lat = rho.lattice(core::slice::from_ref(seed), cap)?;
        return Ok((lat, LegendreInvariant { value: 0, tail: 0 }));
    }
    let omega_theta = omega.at_theta()?;
    let mut last = None;
    for (i, j) in rho.seed_pairs(&points) {
        let lat = match rho.lattice(&[points[i].clone(), points[j].clone()], cap) {
            Ok(l) => l,
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        let f1 = rho.quasi_period_eval(lat.omega(0), true)?;
        let f2 = rho.quasi_period_eval(lat.omega(1), true)?;
        match legendre_invariant([lat.omega(0), lat.omega(1)], [&f1, &f2], &omega_theta) {
            Ok(inv) => return Ok((lat, inv)),
            Err(e @ Error::NotAUnit { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(match (first_err, last) {
        (Some(e), _) => e,
        (None, Some(e)) => Error::IndependenceFailure(format!("no torsion seed pair gives independent periods: {e}")),
        (None, None) => Error::IndependenceFailure("no pair of non-proportional torsion seeds".into()),
    })
}

/// `(c, tail)` with `a = c·b + O(π^tail)`, `c` a residue-field constant.
pub fn constant_ratio(a: &Cinf, b: &Cinf) -> Result<(Fe, i64)> {
    let r = a.div(b)?;
    let (v, c) = r.leading().ok_or(Error::DivisionByApparentZero)?;
    if v != 0 {
        return Err(Error::NotAUnit { valuation: v });
    }
    let tail = (a - &b.scale(c)).zero_order();
    Ok((c, tail))
}

/// Residuals of the tensor-square and determinant constructions.
#[derive(Clone, Debug)]
pub struct TensorReport {
    /// `Ψ⊗Ψ - (Φ⊗Φ)^{(1)} (Ψ⊗Ψ)^{(1)}`.
    pub kronecker: Residuals,
    /// `det(Φ⊗Φ) - det(Φ)^4`.
    pub kronecker_det: Residuals,
    /// `det Ψ - (det Φ)^{(1)} (det Ψ)^{(1)}`.
    pub wedge: Residuals,
    /// `det Φ`.
    pub wedge_multiplier: PolyT,
    /// `x - x^{(1)}` for `x = det Ψ/(ξΩ)`.
    pub det_ratio_sigma: Residuals,
    /// Coefficients of `x = det Ψ/(ξΩ)`.
    pub det_ratio: TSeries,
}

pub fn tensor_constructions(mm: &MotiveMatrices, omega: &OmegaSeries) -> Result<TensorReport> {
    let t = mm.psi.get(0, 0).len();
    let phi2 = mm.phi.kronecker(&mm.phi);
    let psi2 = mm.psi.kronecker(&mm.psi);
    let kronecker = difference_residuals(&phi2, &psi2)?;
    let dphi = mm.phi.det()?;
    let d4 = dphi.mul(&dphi).mul(&dphi.mul(&dphi));
    let kronecker_det = Residuals::of(phi2.det()?.sub(&d4).coeffs());
    let dpsi = mm.psi.det()?;
    let rhs = dphi.twist(1)?.to_tseries(t).mul(&dpsi.twist(1)?);
    let wedge = Residuals::of(dpsi.sub(&rhs).coeffs());
    let xo = omega.series.scale(&omega.xi_value());
    let ratio = dpsi.mul(&xo.inv()?);
    let det_ratio_sigma = Residuals::of(ratio.sub(&ratio.twist(1)?).coeffs());
    Ok(TensorReport {
        kronecker,
        kronecker_det,
        wedge,
        wedge_multiplier: dphi,
        det_ratio_sigma,
        det_ratio: ratio,
    })
}
