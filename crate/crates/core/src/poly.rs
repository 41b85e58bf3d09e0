//! Polynomials with `Cinf` coefficients: Newton polygons, residual root finding
//! and Hensel lifting.
//!
//! Coefficient slices are ordered low to high: `[a_0, a_1, …, a_d]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cinf::{Cinf, EXACT};
use crate::error::{Error, Result};
use crate::gf::Fe;
use crate::rational::Rational;

const HENSEL_MAX_ITER: usize = 64;
const REFINE_MAX_DEPTH: usize = 8;

/// One edge of the lower convex hull of `{(i, v(a_i))}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Index of the left endpoint.
    pub start: usize,
    /// Horizontal length: the number of roots the edge certifies.
    pub length: usize,
    /// Slope in grid units per degree.
    pub slope: Rational,
}

impl Segment {
    /// Valuation (grid units) of every root certified by the edge.
    pub fn root_valuation(&self) -> Rational {
        -self.slope
    }

    pub fn end(&self) -> usize {
        self.start + self.length
    }
}

/// Lower convex hull of the coefficient valuations.
///
/// A segment of slope `λ` and length `ℓ` certifies exactly `ℓ` roots of
/// valuation `-λ`. Slopes are strictly increasing; lengths sum to the degree
/// minus `zero_order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Multiplicity of the root `0`.
    pub zero_order: usize,
    pub segments: Vec<Segment>,
}

impl NewtonPolygon {
    pub fn degree(&self) -> usize {
        self.zero_order + self.segments.iter().map(|s| s.length).sum::<usize>()
    }

    /// Root valuations in `θ`-units with their multiplicities, ascending.
    pub fn root_valuations_theta(&self, e: i64) -> Vec<(Rational, usize)> {
        let mut out: Vec<(Rational, usize)> = self
            .segments
            .iter()
            .map(|s| (s.root_valuation() * Rational::new(1, e), s.length))
            .collect();
        out.sort();
        out
    }
}

fn strip_top(coeffs: &[Cinf]) -> &[Cinf] {
    let mut d = coeffs.len();
    while d > 0 && coeffs[d - 1].is_exact_zero() {
        d -= 1;
    }
    &coeffs[..d]
}

/// Newton polygon of `Σ a_i x^i`.
///
/// Coefficients known only to be `O(π^p)` are allowed strictly above the hull;
/// the extreme coefficients must have determinate valuations.
pub fn newton_polygon(coeffs: &[Cinf]) -> Result<NewtonPolygon> {
    let coeffs = strip_top(coeffs);
    if coeffs.is_empty() {
        return Err(Error::ShapeMismatch("the zero polynomial has no Newton polygon".into()));
    }
    let zero_order = coeffs.iter().take_while(|c| c.is_exact_zero()).count();
    let top = coeffs.len() - 1;
    for idx in [zero_order, top] {
        if coeffs[idx].is_zero() {
            return Err(Error::IndeterminateValuation {
                prec: coeffs[idx].prec(),
            });
        }
    }
    let pts: Vec<(i64, i64)> = coeffs
        .iter()
        .enumerate()
        .skip(zero_order)
        .filter_map(|(i, c)| c.leading().map(|(v, _)| (i as i64, v)))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // keep b only if it lies strictly below the chord a–p
            let cross = (b.0 - a.0) as i128 * (p.1 - a.1) as i128 - (b.1 - a.1) as i128 * (p.0 - a.0) as i128;
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let segments: Vec<Segment> = hull
        .windows(2)
        .map(|w| Segment {
            start: w[0].0 as usize,
            length: (w[1].0 - w[0].0) as usize,
            slope: Rational::new(w[1].1 - w[0].1, w[1].0 - w[0].0),
        })
        .collect();
    for (i, c) in coeffs.iter().enumerate().skip(zero_order) {
        if !c.is_zero() || c.is_exact() {
            continue;
        }
        let seg = segments
            .iter()
            .find(|s| s.start <= i && i <= s.end())
            .expect("interior index lies under some segment");
        let base = coeffs[seg.start].valuation_lb();
        let hull_at = Rational::integer(base) + seg.slope * Rational::integer((i - seg.start) as i64);
        if Rational::integer(c.prec()) <= hull_at {
            return Err(Error::IndeterminateValuation { prec: c.prec() });
        }
    }
    Ok(NewtonPolygon { zero_order, segments })
}

/// `Σ a_i x^i`, skipping exactly-zero coefficients.
pub fn eval(coeffs: &[Cinf], x: &Cinf) -> Cinf {
    let mut acc = Cinf::zero(x.tower());
    let mut xp = Cinf::one(x.tower());
    let mut last = 0;
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_exact_zero() {
            continue;
        }
        if i > last {
            xp = &xp * &x.pow((i - last) as u64);
            last = i;
        }
        acc = &acc + &(c * &xp);
    }
    acc
}

pub fn derivative(coeffs: &[Cinf]) -> Vec<Cinf> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| {
            let k = c.tower().gf().from_int(i as i64);
            c.scale(k)
        })
        .collect()
}

/// Coefficients of `f(s + x)`.
pub fn taylor_shift(coeffs: &[Cinf], s: &Cinf) -> Vec<Cinf> {
    let d = coeffs.len();
    if d == 0 {
        return Vec::new();
    }
    let tower = s.tower();
    let gf = tower.gf();
    let p = gf.p();
    let mut pow = vec![Cinf::one(tower)];
    for j in 1..d {
        let next = &pow[j - 1] * s;
        pow.push(next);
    }
    // binomials mod p, row by row
    let mut binom: Vec<Vec<u32>> = Vec::with_capacity(d);
    for i in 0..d {
        let mut row = vec![0u32; i + 1];
        row[0] = 1;
        row[i] = 1;
        for k in 1..i {
            row[k] = (binom[i - 1][k - 1] + binom[i - 1][k]) % p;
        }
        binom.push(row);
    }
    (0..d)
        .map(|k| {
            let mut acc = Cinf::zero(tower);
            for i in k..d {
                let b = binom[i][k];
                if b == 0 || coeffs[i].is_exact_zero() {
                    continue;
                }
                let term = (&coeffs[i] * &pow[i - k]).scale(b as Fe);
                acc = &acc + &term;
            }
            acc
        })
        .collect()
}

fn residual_polynomial(coeffs: &[Cinf], seg: &Segment, w: i64) -> Vec<Fe> {
    let start_v = coeffs[seg.start].valuation_lb() + seg.start as i64 * w;
    (seg.start..=seg.end())
        .map(|i| match coeffs[i].leading() {
            Some((v, c)) if v + i as i64 * w == start_v => c,
            _ => 0,
        })
        .collect()
}

fn integral_valuation(seg: &Segment, e: i64) -> Result<i64> {
    let w = seg.root_valuation();
    w.to_integer().ok_or_else(|| {
        Error::GridTooCoarse(format!(
            "roots of valuation {} θ-units need a grid denominator divisible by {}",
            w * Rational::new(1, e),
            Rational::new(1, e).den() * w.den()
        ))
    })
}

/// All roots certified by one segment, each with its multiplicity.
pub fn segment_roots(coeffs: &[Cinf], seg: &Segment) -> Result<Vec<(Cinf, usize)>> {
    segment_roots_at(coeffs, seg, 0)
}

fn segment_roots_at(coeffs: &[Cinf], seg: &Segment, depth: usize) -> Result<Vec<(Cinf, usize)>> {
    let tower = coeffs[seg.start].tower().clone();
    let gf = tower.gf();
    let w = integral_valuation(seg, tower.e())?;
    let residual = residual_polynomial(coeffs, seg, w);
    let rroots: Vec<(Fe, usize)> = gf.poly_roots(&residual).into_iter().filter(|&(y, _)| y != 0).collect();
    let found: usize = rroots.iter().map(|r| r.1).sum();
    if found < seg.length {
        return Err(Error::ResidueFieldTooSmall(format!(
            "residual equation of degree {} has only {found} roots in F_{{q^{}}}",
            seg.length,
            gf.m()
        )));
    }
    let mut out = Vec::new();
    for (y, k) in rroots {
        let seed = Cinf::monomial(&tower, y, w);
        if k == 1 {
            out.push((hensel_root(coeffs, &seed)?, 1));
            continue;
        }
        if depth >= REFINE_MAX_DEPTH {
            return Err(Error::NoConvergence(format!(
                "repeated residual root survives {REFINE_MAX_DEPTH} refinements"
            )));
        }
        let shifted = taylor_shift(coeffs, &seed);
        let sub = roots_above(&shifted, w, depth + 1)?;
        let got: usize = sub.iter().map(|r| r.1).sum();
        if got != k {
            return Err(Error::IndeterminateValuation {
                prec: shifted.iter().map(|c| c.prec()).min().unwrap_or(0),
            });
        }
        out.extend(sub.into_iter().map(|(z, mult)| (&seed + &z, mult)));
    }
    Ok(out)
}

/// Roots of valuation strictly greater than `w`, including `0`.
fn roots_above(coeffs: &[Cinf], w: i64, depth: usize) -> Result<Vec<(Cinf, usize)>> {
    let poly = newton_polygon(coeffs)?;
    let tower = coeffs[0].tower().clone();
    let mut out = Vec::new();
    if poly.zero_order > 0 {
        out.push((Cinf::zero(&tower), poly.zero_order));
    }
    for seg in &poly.segments {
        if seg.root_valuation() > Rational::integer(w) {
            out.extend(segment_roots_at(coeffs, seg, depth)?);
        }
    }
    Ok(out)
}

/// Every nonzero root of `Σ a_i x^i` in the working field, with multiplicities.
pub fn nonzero_roots(coeffs: &[Cinf]) -> Result<Vec<(Cinf, usize)>> {
    let coeffs = strip_top(coeffs);
    let poly = newton_polygon(coeffs)?;
    let mut out = Vec::new();
    for seg in &poly.segments {
        out.extend(segment_roots(coeffs, seg)?);
    }
    Ok(out)
}

/// Newton iteration from `seed` to the unique root in its disc.
///
/// The seed must be isolated by the Taylor expansion `f(s + x) = Σ b_k x^k`:
/// with `δ = b_0/b_1`, every `k ≥ 2` has `v(b_k δ^k) > v(b_0)`, checked against
/// a lower bound for `v(b_k)`. For monic integral `f` this is the classical
/// `|f(s)| < |f′(s)|²`.
pub fn hensel_root(coeffs: &[Cinf], seed: &Cinf) -> Result<Cinf> {
    let coeffs = strip_top(coeffs);
    let deriv = derivative(coeffs);
    let f0 = eval(coeffs, seed);
    if f0.is_zero() {
        return Ok(seed.clone());
    }
    let f1 = eval(&deriv, seed);
    if f1.is_zero() {
        return Err(Error::NoConvergence("derivative vanishes at the seed".into()));
    }
    let v0 = f0.valuation_lb();
    let vd = v0 - f1.valuation_lb();
    let vs = if seed.is_exact_zero() {
        None
    } else {
        Some(seed.valuation_lb())
    };
    let p = seed.tower().gf().p() as usize;
    for k in 2..coeffs.len() {
        // v(b_k) ≥ min over i ≥ k with C(i,k) ≢ 0 of v(a_i) + (i-k)·v(s)
        let mut lb: Option<i64> = None;
        for (i, a) in coeffs.iter().enumerate().skip(k) {
            if a.is_exact_zero() || !binomial_nonzero_mod(i, k, p) {
                continue;
            }
            let vpow = match vs {
                Some(v) => v.saturating_mul((i - k) as i64),
                None if i == k => 0,
                None => continue,
            };
            let b = a.valuation_lb().saturating_add(vpow);
            lb = Some(lb.map_or(b, |x: i64| x.min(b)));
        }
        if let Some(b) = lb {
            if b.saturating_add(k as i64 * vd) <= v0 {
                return Err(Error::NoConvergence(format!(
                    "seed is not isolated: term {k} of the Taylor expansion may dominate"
                )));
            }
        }
    }
    let tower = seed.tower().clone();
    let mut x = seed.clone();
    for iter in 1..=HENSEL_MAX_ITER {
        let fx = eval(coeffs, &x);
        let dfx = eval(&deriv, &x);
        if fx.is_zero() {
            log::debug!("hensel: converged after {} iterations", iter - 1);
            return Ok(certify(x, &fx, &dfx));
        }
        let delta = fx.div(&dfx)?;
        let next = &x - &delta;
        // iterates are kept to the working cap so exact inputs stay finite
        let target = next.leading().map_or(EXACT, |(v, _)| tower.cap(v));
        if delta.is_zero() || delta.valuation_lb() >= target {
            log::debug!("hensel: converged after {} iterations", iter - 1);
            return Ok(certify(x.truncate(target), &fx, &dfx));
        }
        x = next.truncate(target);
    }
    Err(Error::NoConvergence(format!(
        "no fixed point after {HENSEL_MAX_ITER} Newton steps"
    )))
}

/// Lucas: `C(n, k) mod p ≠ 0` iff every base-`p` digit of `k` is at most that of `n`.
fn binomial_nonzero_mod(mut n: usize, mut k: usize, p: usize) -> bool {
    while k > 0 {
        if k % p > n % p {
            return false;
        }
        n /= p;
        k /= p;
    }
    true
}

/// Inside the isolating disc `v(x - r) = v(f(x)) - v(f′(x))`.
fn certify(x: Cinf, fx: &Cinf, dfx: &Cinf) -> Cinf {
    let bound = fx.zero_order().saturating_sub(dfx.valuation_lb());
    x.truncate(bound)
}

/// The designated `n`-th root of `a` (`p ∤ n`): leading coefficient the smallest
/// packed root in the residue field, lifted by Newton iteration.
pub fn nth_root(a: &Cinf, n: u64) -> Result<Cinf> {
    let tower = a.tower().clone();
    let gf = tower.gf();
    if n == 0 || n.is_multiple_of(gf.p() as u64) {
        return Err(Error::Config(format!("root index {n} must be prime to p")));
    }
    let (v, c) = a.leading().ok_or(Error::DivisionByApparentZero)?;
    if v % n as i64 != 0 {
        return Err(Error::GridTooCoarse(format!(
            "valuation {v}/{} has no {n}-th part on the grid",
            tower.e()
        )));
    }
    let mut res = vec![0 as Fe; n as usize + 1];
    res[0] = gf.neg(c);
    res[n as usize] = 1;
    let y = gf
        .poly_roots(&res)
        .first()
        .map(|r| r.0)
        .ok_or_else(|| Error::ResidueFieldTooSmall(format!("no {n}-th root of {c} in the residue field")))?;
    let seed = Cinf::monomial(&tower, y, v / n as i64);
    let mut coeffs = vec![Cinf::zero(&tower); n as usize + 1];
    coeffs[0] = -a;
    coeffs[n as usize] = Cinf::one(&tower);
    hensel_root(&coeffs, &seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cinf::tests::tower;
    use crate::tower::Tower;
    use alloc::sync::Arc;

    fn th(t: &Arc<Tower>, k: i64) -> Cinf {
        Cinf::theta_pow(t, k)
    }

    #[test]
    fn square_root_of_theta() {
        let t = tower(3, 2, 2, 60);
        let f = [-th(&t, 1), Cinf::zero(&t), Cinf::one(&t)];
        let np = newton_polygon(&f).unwrap();
        assert_eq!(np.segments.len(), 1);
        assert_eq!(np.segments[0].length, 2);
        assert_eq!(np.root_valuations_theta(2), vec![(Rational::new(-1, 2), 2)]);
        let roots = nonzero_roots(&f).unwrap();
        assert_eq!(roots.len(), 2);
        for (r, k) in roots {
            assert_eq!(k, 1);
            assert!((&r * &r).eq_to_prec(&th(&t, 1)));
        }
    }

    #[test]
    fn linear_polygon() {
        let t = tower(3, 2, 2, 60);
        let f = [-th(&t, 1), Cinf::one(&t)];
        let np = newton_polygon(&f).unwrap();
        assert_eq!(np.root_valuations_theta(2), vec![(Rational::integer(-1), 1)]);
    }

    #[test]
    fn torsion_resolvent_has_one_slope() {
        // θ + Y + Y⁴: the hull from (0,-1) to (4,0) passes below (1,0).
        let t = tower(3, 4, 8, 60);
        let mut f = vec![Cinf::zero(&t); 5];
        f[0] = th(&t, 1);
        f[1] = Cinf::one(&t);
        f[4] = Cinf::one(&t);
        let np = newton_polygon(&f).unwrap();
        assert_eq!(np.root_valuations_theta(8), vec![(Rational::new(-1, 4), 4)]);
        let total: Rational = np
            .root_valuations_theta(8)
            .iter()
            .fold(Rational::integer(0), |acc, (v, k)| {
                acc + *v * Rational::integer(*k as i64)
            });
        assert_eq!(total, Rational::integer(-1));
    }

    #[test]
    fn hensel_examples() {
        let t = tower(3, 2, 2, 60);
        let f = [-th(&t, -1), Cinf::one(&t)];
        let r = hensel_root(&f, &Cinf::zero(&t)).unwrap();
        assert!(r.eq_to_prec(&th(&t, -1)));

        let target = &Cinf::one(&t) + &th(&t, -2);
        let g = [-&target, Cinf::zero(&t), Cinf::one(&t)];
        let r = hensel_root(&g, &Cinf::one(&t)).unwrap();
        assert_eq!(r.coeff(0), Some(1));
        assert_eq!(r.coeff(4), Some(2));
        let sq = &r * &r;
        assert!(sq.eq_to_prec(&target));
        assert!(eval(&g, &r).zero_order().saturating_mul(10) >= 8 * 60);
    }

    #[test]
    fn hensel_rejects_unisolated_seed() {
        let t = tower(3, 2, 2, 60);
        let g = [-Cinf::one(&t), Cinf::zero(&t), Cinf::one(&t)];
        assert!(matches!(hensel_root(&g, &Cinf::zero(&t)), Err(Error::NoConvergence(_))));
    }

    #[test]
    fn carlitz_torsion() {
        let t = tower(3, 2, 2, 60);
        let f = [Cinf::zero(&t), th(&t, 1), Cinf::zero(&t), Cinf::one(&t)];
        let roots = nonzero_roots(&f).unwrap();
        assert_eq!(roots.len(), 2);
        for (r, _) in &roots {
            assert_eq!(r.valuation_theta().unwrap(), Some(Rational::new(-1, 2)));
            let sq = r * r;
            assert!(sq.eq_to_prec(&-th(&t, 1)));
            assert!(eval(&f, r).zero_order().saturating_mul(10) >= 8 * 60);
        }
    }

    #[test]
    fn repeated_residual_root_refines() {
        // (x - 1)^2 (x - 1 - θ^{-1}) has residual (y - 1)^3 at valuation 0.
        let t = tower(5, 1, 4, 60);
        let one = Cinf::one(&t);
        let a = &one + &th(&t, -1);
        let lin = |r: &Cinf| vec![-r, one.clone()];
        let mul = |f: &[Cinf], g: &[Cinf]| {
            let mut out = vec![Cinf::zero(&t); f.len() + g.len() - 1];
            for (i, x) in f.iter().enumerate() {
                for (j, y) in g.iter().enumerate() {
                    out[i + j] = &out[i + j] + &(x * y);
                }
            }
            out
        };
        let f = mul(&mul(&lin(&one), &lin(&one)), &lin(&a));
        let roots = nonzero_roots(&f).unwrap();
        let total: usize = roots.iter().map(|r| r.1).sum();
        assert_eq!(total, 3);
        assert!(roots.iter().any(|(r, k)| *k == 2 && r.eq_to_prec(&one)));
        assert!(roots.iter().any(|(r, k)| *k == 1 && r.eq_to_prec(&a)));
    }

    #[test]
    fn residue_field_too_small() {
        // x^2 + 1 has no root in F_3.
        let t = tower(3, 1, 2, 40);
        let f = [Cinf::one(&t), Cinf::zero(&t), Cinf::one(&t)];
        assert!(matches!(nonzero_roots(&f), Err(Error::ResidueFieldTooSmall(_))));
    }

    #[test]
    fn fractional_slope_needs_finer_grid() {
        let t = tower(3, 2, 2, 40);
        let f = [-th(&t, 1), Cinf::zero(&t), Cinf::zero(&t), Cinf::one(&t)];
        assert!(matches!(nonzero_roots(&f), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn nth_root_lifts() {
        let t = tower(5, 2, 4, 80);
        let a = &th(&t, 1) + &Cinf::from_int(&t, 3);
        let r = nth_root(&a, 4).unwrap();
        assert!(r.pow(4).eq_to_prec(&a));
        assert_eq!(r.valuation_theta().unwrap(), Some(Rational::new(-1, 4)));
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn root_valuation_bookkeeping(vals in proptest::collection::vec(-6i64..6, 2..7)) {
            let t = tower(3, 2, 2, 60);
            let f: Vec<Cinf> = vals.iter().map(|&v| Cinf::monomial(&t, 1, 2 * v)).collect();
            let np = newton_polygon(&f).unwrap();
            let d = f.len() - 1;
            prop_assert_eq!(np.degree(), d);
            let sum: Rational = np.segments.iter().fold(Rational::integer(0), |acc, s| {
                acc + s.root_valuation() * Rational::integer(s.length as i64)
            });
            prop_assert_eq!(sum, Rational::integer(2 * vals[0] - 2 * vals[d]));
            for w in np.segments.windows(2) {
                prop_assert!(w[0].slope < w[1].slope);
            }
        }
    }
}
