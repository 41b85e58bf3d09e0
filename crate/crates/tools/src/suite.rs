//! Verification reports and the batch identity suite run by `verify`.

use std::collections::BTreeMap;
use std::time::Instant;

use drinfeld_core::{
    certified_lattice, constant_ratio, difference_residuals, extended_system, psi_matrix, required_order,
    specialize_psi, tensor_constructions, verify_fu1, verify_fu2, verify_log_fneq, Cinf, DrinfeldModule, Error,
    GVector, LogPoint, OmegaSeries, Residuals, Result, EXACT,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::codec;
use crate::config::{GridChoice, Resolved};

/// One checked identity. `residual_valuations` lists zero orders in grid
/// units; `null` means the residual is exactly zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub check: String,
    pub parameters: BTreeMap<String, Value>,
    pub residual_valuations: Vec<Option<i64>>,
    pub pass: bool,
    /// Set when the check could not be carried out.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    pub exit_code: u8,
}

impl ErrorRecord {
    pub fn of(e: &Error) -> Self {
        ErrorRecord {
            kind: crate::cli::error_kind(e).to_string(),
            message: e.to_string(),
            exit_code: crate::cli::core_exit_code(e),
        }
    }
}

impl Report {
    pub fn min_residual(&self) -> i64 {
        self.residual_valuations
            .iter()
            .map(|r| r.unwrap_or(EXACT))
            .min()
            .unwrap_or(EXACT)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub grid: GridChoice,
    pub required_order: i64,
    pub reports: Vec<Report>,
    pub pass: bool,
    /// Exit status when `pass` is false: the most specific error code, else 4.
    #[serde(skip)]
    pub exit_code: u8,
}

struct Suite {
    need: i64,
    timings: bool,
    reports: Vec<Report>,
}

fn orders(r: &Residuals) -> Vec<Option<i64>> {
    r.orders.iter().map(|&o| (o != EXACT).then_some(o)).collect()
}

impl Suite {
    fn push(&mut self, check: &str, params: Value, residuals: &Residuals, pass: bool, start: Instant) {
        let parameters = match params {
            Value::Object(m) => m.into_iter().collect(),
            Value::Null => BTreeMap::new(),
            other => BTreeMap::from([("value".to_string(), other)]),
        };
        self.reports.push(Report {
            check: check.to_string(),
            parameters,
            residual_valuations: orders(residuals),
            pass,
            error: None,
            wall_time: self.timings.then(|| start.elapsed().as_secs_f64()),
        });
    }

    fn error(&mut self, check: &str, params: Value, e: &Error, start: Instant) {
        self.push(check, params, &Residuals::default(), false, start);
        if let Some(r) = self.reports.last_mut() {
            r.error = Some(ErrorRecord::of(e));
        }
    }

    fn residual(&mut self, check: &str, params: Value, residuals: Residuals, start: Instant) {
        let pass = residuals.holds_to(self.need);
        self.push(check, params, &residuals, pass, start);
    }
}

/// The tame torsion point and period used as sample arguments.
fn first_period(rho: &DrinfeldModule, cap: usize) -> Result<(Cinf, Cinf)> {
    let mut first_err = None;
    for g in rho.torsion_points()? {
        match g.points {
            Ok(pts) if !pts.is_empty() => {
                let w = rho.period_from_seed(&pts[0], cap)?;
                return Ok((pts[0].clone(), w.omega));
            }
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| Error::VerificationFailed("no torsion points".into())))
}

/// Runs every identity check that applies to the configured module.
///
/// Rank-2 modules with `u ≠ 1` are normalized first for the motive and
/// logarithm checks. Reports are sorted by check name and parameters.
pub fn run(res: &Resolved, timings: bool) -> Result<SuiteResult> {
    let rho = &res.rho;
    let tower = &res.tower;
    let prec = &res.config.precision;
    let t = prec.t_terms;
    let cap = prec.tower_cap;
    let mut s = Suite {
        need: required_order(tower),
        timings,
        reports: Vec::new(),
    };

    let st = Instant::now();
    let fe = Residuals::of(&rho.functional_equation_residuals()?);
    s.residual("series.functional_equation", Value::Null, fe, st);
    let st = Instant::now();
    let depth = rho.depth().min(5);
    let el = Residuals::of(&rho.exp_log_residuals(depth)?);
    s.residual("series.exp_log", json!({ "depth": depth }), el, st);

    let st = Instant::now();
    let omega = OmegaSeries::new(tower, t)?;
    s.residual(
        "omega.difference",
        json!({ "t_terms": t }),
        omega.difference_residuals()?,
        st,
    );
    let pi = omega.pi_tilde()?;

    let th_inv = Cinf::theta_pow(tower, -1);
    let fu_t = t.max(24);
    let st = Instant::now();
    let mut args = vec![("theta^-1", th_inv)];
    let sample = first_period(rho, cap);
    match &sample {
        Ok((torsion, w1)) => {
            args.push(("torsion", torsion.clone()));
            args.push(("omega1", w1.clone()));
        }
        Err(e) => s.error("periods.seed", Value::Null, e, st),
    }
    for (label, u) in &args {
        let st = Instant::now();
        s.residual(
            "fu1",
            json!({ "u": label, "t_terms": fu_t }),
            verify_fu1(rho, u, fu_t)?,
            st,
        );
        let st = Instant::now();
        s.residual("fu2", json!({ "u": label }), verify_fu2(rho, u)?, st);
    }

    if let (1, Ok((_, w1))) = (rho.rank(), &sample) {
        let st = Instant::now();
        s.residual(
            "periods.exp",
            json!({ "index": 1 }),
            Residuals::single(&rho.exp_eval(w1)?),
            st,
        );
        let st = Instant::now();
        let (k, tail) = constant_ratio(w1, &pi)?;
        let ok = k != 0 && tower.gf().in_base_field(k) && tail >= s.need;
        let params = json!({ "ratio": tower.gf().coeffs(k) });
        s.push("periods.pi_tilde_ratio", params, &Residuals::new(vec![tail]), ok, st);
    } else if rho.rank() == 2 {
        let (nu, normalized) = if *rho.u() == Cinf::one(tower) {
            (rho.clone(), false)
        } else {
            (rho.normalize()?.0, true)
        };
        let st = Instant::now();
        if let Err(e) = motive_checks(&mut s, &nu, &omega, cap, normalized) {
            s.error("motive", json!({ "normalized": normalized }), &e, st);
        }
    }

    s.reports.sort_by(|a, b| {
        (
            a.check.as_str(),
            serde_json::to_string(&a.parameters).unwrap_or_default(),
        )
            .cmp(&(
                b.check.as_str(),
                serde_json::to_string(&b.parameters).unwrap_or_default(),
            ))
    });
    Ok(SuiteResult {
        grid: res.grid.clone(),
        required_order: s.need,
        pass: s.reports.iter().all(|r| r.pass),
        exit_code: s
            .reports
            .iter()
            .filter_map(|r| r.error.as_ref().map(|e| e.exit_code))
            .min()
            .unwrap_or(4),
        reports: s.reports,
    })
}

fn motive_checks(s: &mut Suite, rho: &DrinfeldModule, omega: &OmegaSeries, cap: usize, normalized: bool) -> Result<()> {
    let tower = rho.tower();
    let gf = tower.gf();
    let base = json!({ "normalized": normalized });

    let st = Instant::now();
    let (lattice, inv) = certified_lattice(rho, omega, cap)?;
    for (i, p) in lattice.periods.iter().enumerate() {
        let r = Residuals::single(&rho.exp_eval(&p.omega)?);
        s.residual("periods.exp", json!({ "index": i + 1, "height": p.height }), r, st);
    }
    let ok = inv.value == gf.neg(1) && inv.tail >= s.need;
    let params = json!({ "normalized": normalized, "value": gf.coeffs(inv.value) });
    s.push("legendre", params, &Residuals::new(vec![inv.tail]), ok, st);

    let st = Instant::now();
    let mm = psi_matrix(rho, &lattice, omega)?;
    s.residual(
        "psi.difference",
        base.clone(),
        difference_residuals(&mm.phi, &mm.psi)?,
        st,
    );
    let st = Instant::now();
    let pm = specialize_psi(rho, &lattice, omega)?;
    s.residual("psi.specialization", base.clone(), pm.agreement.clone(), st);
    s.residual("psi.inverse", base.clone(), pm.inverse.clone(), st);
    s.residual("psi.zeta", base.clone(), pm.zeta_form.clone(), st);

    let st = Instant::now();
    let tr = tensor_constructions(&mm, omega)?;
    s.residual("tensor.kronecker", base.clone(), tr.kronecker, st);
    s.residual("tensor.kronecker_det", base.clone(), tr.kronecker_det, st);
    s.residual("tensor.wedge", base.clone(), tr.wedge, st);
    let c0 = tr.det_ratio.coeff(0).leading().map(|(v, c)| json!([v, gf.coeffs(c)]));
    let params = json!({ "normalized": normalized, "det_ratio_leading": c0 });
    s.residual("tensor.det_ratio_sigma", params, tr.det_ratio_sigma, st);

    let t = omega.series.len();
    let st = Instant::now();
    let p1 = LogPoint::from_alpha(rho, &Cinf::theta_pow(tower, -1))?;
    let g = GVector::new(rho, &p1, t)?;
    let params = json!({ "normalized": normalized, "alpha": "theta^-1" });
    s.residual(
        "log.g_specialization",
        params.clone(),
        g.specialization_residuals(&p1)?,
        st,
    );
    let st = Instant::now();
    s.residual("log.fneq", params, verify_log_fneq(rho, &p1, t)?, st);
    let p2 = LogPoint::from_lambda(rho, &(&Cinf::theta(tower) * &p1.lambda))?;
    for pts in [vec![p1.clone()], vec![p1, p2]] {
        let st = Instant::now();
        let sys = extended_system(rho, &lattice, &pts, omega)?;
        let params = json!({ "normalized": normalized, "n": sys.n });
        s.residual("log.block_difference", params.clone(), sys.difference, st);
        s.residual("log.block_reconstruction", params, sys.reconstruction, st);
    }
    Ok(())
}

/// JSON for an element, used by command outputs.
pub fn el(x: &Cinf) -> Value {
    serde_json::to_value(codec::encode(x)).unwrap_or(Value::Null)
}
