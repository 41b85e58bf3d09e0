//! The `drinfeld` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use drinfeld_core::{
    certified_lattice, constant_ratio, difference_residuals, extended_system, psi_matrix, relation_certificate,
    specialize_psi, verify_fu1, verify_fu2, verify_log_fneq, Agf, CMatrix, Cinf, Error, GVector, LogPoint, OmegaSeries,
    Provenance, Relation, Residuals, Result, EXACT,
};
use serde_json::{json, Value};

use crate::codec;
use crate::config::{resolve, ModuleDescriptor, Needs, RelationSpec, Resolved, RunConfig};
use crate::expr;
use crate::suite::{self, el};

#[derive(Debug, Parser)]
#[command(
    name = "drinfeld",
    version,
    about = "Drinfeld module periods, motives and identity checks"
)]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Module descriptor (JSON), overriding the configured field and module.
    #[arg(long, global = true)]
    pub module: Option<PathBuf>,
    /// Named sample configuration: q3, q5, q5-theta, carlitz3, carlitz5.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Valuation precision N in grid units.
    #[arg(long = "prec-n", global = true)]
    pub prec_n: Option<i64>,
    /// Number of t-coefficients T.
    #[arg(long = "prec-t", global = true)]
    pub prec_t: Option<usize>,
    /// Size of the constant field F_q.
    #[arg(long, global = true)]
    pub q: Option<u64>,
    /// Compact single-line JSON instead of indented JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Add wall-clock times to verification reports.
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// exp_ρ(z).
    ExpEval {
        #[arg(long)]
        z: Option<String>,
    },
    /// log_ρ(z).
    LogEval {
        #[arg(long)]
        z: Option<String>,
    },
    /// Nonzero t-torsion grouped by valuation.
    Torsion,
    /// Periods from torsion seeds.
    Periods,
    /// F_τ(λ); defaults to the periods.
    QuasiPeriod {
        #[arg(long)]
        lambda: Vec<String>,
    },
    /// The Anderson generating function of u and its functional equations.
    Agf {
        #[arg(long)]
        u: Option<String>,
    },
    /// The Carlitz Ω series.
    Omega,
    /// Φ_ρ, Ψ_ρ and the difference equation.
    Psi,
    /// Ψ_ρ(θ), P_ρ and their closed forms.
    Specialize,
    /// Logarithm points from α = exp(λ) or λ.
    LogPoint {
        #[arg(long)]
        alpha: Vec<String>,
        #[arg(long)]
        lambda: Vec<String>,
    },
    /// The block system Φ_n, Ψ_n and an optional relation certificate.
    Extend {
        #[arg(long)]
        alpha: Vec<String>,
        #[arg(long)]
        lambda: Vec<String>,
        #[arg(long)]
        l11: Option<String>,
        #[arg(long)]
        l21: Option<String>,
        #[arg(long)]
        l: Vec<String>,
        #[arg(long = "b-theta")]
        b_theta: Option<String>,
    },
    /// The full identity suite.
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ExpEval { .. } => "exp-eval",
            Command::LogEval { .. } => "log-eval",
            Command::Torsion => "torsion",
            Command::Periods => "periods",
            Command::QuasiPeriod { .. } => "quasi-period",
            Command::Agf { .. } => "agf",
            Command::Omega => "omega",
            Command::Psi => "psi",
            Command::Specialize => "specialize",
            Command::LogPoint { .. } => "log-point",
            Command::Extend { .. } => "extend",
            Command::Verify => "verify",
        }
    }

    fn needs(&self) -> Needs {
        match self {
            Command::ExpEval { .. } | Command::LogEval { .. } | Command::Agf { .. } => Needs::default(),
            Command::Torsion => Needs {
                xi: false,
                torsion: true,
            },
            Command::Omega => Needs {
                xi: true,
                torsion: false,
            },
            Command::LogPoint { .. } => Needs {
                xi: false,
                torsion: false,
            },
            _ => Needs {
                xi: true,
                torsion: true,
            },
        }
    }
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Config(String),
    /// The command ran but at least one check failed; carries the exit code
    /// and the output.
    Verification(u8, Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Core(e) => core_exit_code(e),
            Failure::Verification(code, _) => *code,
        }
    }
}

/// 2 for configuration errors, 3 for precision or grid errors, 4 otherwise.
pub fn core_exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::ShapeMismatch(_) | Error::TowerMismatch => 2,
        e if e.is_precision_or_grid() => 3,
        Error::PoleHit { .. } | Error::SingularSpecialization => 3,
        _ => 4,
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "Config",
        Error::PrecisionExhausted(_) => "PrecisionExhausted",
        Error::DivisionByApparentZero => "DivisionByApparentZero",
        Error::IndeterminateValuation { .. } => "IndeterminateValuation",
        Error::GridTooCoarse(_) => "GridTooCoarse",
        Error::ResidueFieldTooSmall(_) => "ResidueFieldTooSmall",
        Error::NoConvergence(_) => "NoConvergence",
        Error::DivergentEvaluation(_) => "DivergentEvaluation",
        Error::ShapeMismatch(_) => "ShapeMismatch",
        Error::PoleHit { .. } => "PoleHit",
        Error::IndependenceFailure(_) => "IndependenceFailure",
        Error::SingularSpecialization => "SingularSpecialization",
        Error::NotAUnit { .. } => "NotAUnit",
        Error::VerificationFailed(_) => "VerificationFailed",
        Error::TowerMismatch => "TowerMismatch",
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn prime_power(q: u64) -> Option<(u32, u32)> {
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut s = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        s += 1;
    }
    (r == 1).then_some((p as u32, s))
}

/// Merges preset, config file, module descriptor, flags and command
/// arguments, in increasing priority.
pub fn build_config(cli: &Cli) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => read_json(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => RunConfig::preset("q3")?,
    };
    if let (Some(_), Some(name)) = (&cli.config, &cli.preset) {
        return Err(Failure::Config(format!("--preset {name} conflicts with --config")));
    }
    if let Some(path) = &cli.module {
        let d: ModuleDescriptor = read_json(path)?;
        cfg.apply_descriptor(d);
    }
    if let Some(n) = cli.prec_n {
        cfg.precision.valuation_terms = n;
    }
    if let Some(t) = cli.prec_t {
        cfg.precision.t_terms = t;
    }
    if let Some(q) = cli.q {
        let (p, s) = prime_power(q).ok_or_else(|| Failure::Config(format!("q = {q} is not a prime power")))?;
        if (p, s) != (cfg.field.p, cfg.field.s) {
            cfg.field.p = p;
            cfg.field.s = s;
            cfg.field.m = None;
            cfg.field.e = None;
            cfg.field.modulus = None;
        }
    }
    let pr = &mut cfg.params;
    match &cli.command {
        Command::ExpEval { z } | Command::LogEval { z } => {
            if z.is_some() {
                pr.z = z.clone();
            }
        }
        Command::QuasiPeriod { lambda } => {
            if !lambda.is_empty() {
                pr.lambda = lambda.clone();
            }
        }
        Command::Agf { u } => {
            if u.is_some() {
                pr.u = u.clone();
            }
        }
        Command::LogPoint { alpha, lambda } => {
            if !alpha.is_empty() || !lambda.is_empty() {
                pr.alpha = alpha.clone();
                pr.lambda = lambda.clone();
            }
        }
        Command::Extend {
            alpha,
            lambda,
            l11,
            l21,
            l,
            b_theta,
        } => {
            if !alpha.is_empty() || !lambda.is_empty() {
                pr.alpha = alpha.clone();
                pr.lambda = lambda.clone();
            }
            if l11.is_some() || l21.is_some() || !l.is_empty() {
                pr.relation = Some(RelationSpec {
                    l11: l11.clone().unwrap_or_else(|| "0".into()),
                    l21: l21.clone().unwrap_or_else(|| "0".into()),
                    l: l.clone(),
                    b_theta: b_theta.clone(),
                });
            }
        }
        _ => {}
    }
    Ok(cfg)
}

fn parse(s: &str, r: &Resolved) -> Result<Cinf> {
    expr::parse(s, &r.tower)
}

fn residuals(r: &Residuals, need: i64) -> Value {
    let v: Vec<Option<i64>> = r.orders.iter().map(|&o| (o != EXACT).then_some(o)).collect();
    json!({ "residual_valuations": v, "min": (r.min() != EXACT).then_some(r.min()), "pass": r.holds_to(need) })
}

fn matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| el(m.get(i, j))).collect()))
            .collect(),
    )
}

fn points(r: &Resolved, allow_default: bool) -> Result<Vec<LogPoint>> {
    let mut out = Vec::new();
    for a in &r.config.params.alpha {
        out.push(LogPoint::from_alpha(&r.rho, &parse(a, r)?)?);
    }
    for l in &r.config.params.lambda {
        out.push(LogPoint::from_lambda(&r.rho, &parse(l, r)?)?);
    }
    if out.is_empty() && allow_default {
        out.push(LogPoint::from_alpha(&r.rho, &Cinf::theta_pow(&r.tower, -1))?);
    }
    Ok(out)
}

fn point_json(p: &LogPoint) -> Value {
    let prov = match p.provenance {
        Provenance::GivenLambda => "lambda",
        Provenance::LiftedFromAlpha => "alpha",
    };
    json!({ "lambda": el(&p.lambda), "alpha": el(&p.alpha), "provenance": prov })
}

/// Runs a command; the value is the `result` member of the output.
fn execute(cmd: &Command, r: &Resolved, timings: bool) -> std::result::Result<Value, Failure> {
    let rho = &r.rho;
    let tower = &r.tower;
    let prec = &r.config.precision;
    let need = drinfeld_core::required_order(tower);
    let omega = || OmegaSeries::new(tower, prec.t_terms);
    let z = || parse(r.config.params.z.as_deref().unwrap_or("0"), r);
    Ok(match cmd {
        Command::ExpEval { .. } => {
            let z = z()?;
            json!({ "z": el(&z), "value": el(&rho.exp_eval(&z)?) })
        }
        Command::LogEval { .. } => {
            let z = z()?;
            json!({ "z": el(&z), "value": el(&rho.log_eval(&z)?) })
        }
        Command::Torsion => {
            let groups: Vec<Value> = rho
                .torsion_points()?
                .iter()
                .map(|g| {
                    let pts = match &g.points {
                        Ok(p) => json!({ "points": p.iter().map(el).collect::<Vec<_>>() }),
                        Err(e) => json!({ "error": error_kind(e), "message": e.to_string() }),
                    };
                    json!({ "valuation": g.valuation.to_string(), "count": g.count, "result": pts })
                })
                .collect();
            json!({ "groups": groups })
        }
        Command::Periods => {
            let om = omega()?;
            let pi = om.pi_tilde()?;
            if rho.rank() == 1 {
                let seed = rho
                    .torsion_points()?
                    .into_iter()
                    .find_map(|g| g.points.ok().and_then(|p| p.into_iter().next()))
                    .ok_or_else(|| Error::VerificationFailed("no torsion seed".into()))?;
                let p = rho.period_from_seed(&seed, prec.tower_cap)?;
                let (k, tail) = constant_ratio(&p.omega, &pi)?;
                json!({
                    "periods": [{ "omega": el(&p.omega), "height": p.height }],
                    "pi_tilde": el(&pi),
                    "ratio": { "constant": tower.gf().coeffs(k), "in_base_field": k != 0 && tower.gf().in_base_field(k), "tail": tail },
                })
            } else {
                let (lat, inv) = certified_lattice(rho, &om, prec.tower_cap)?;
                let ps: Vec<Value> = lat
                    .periods
                    .iter()
                    .map(|p| json!({ "omega": el(&p.omega), "seed": el(&p.seed), "height": p.height }))
                    .collect();
                json!({
                    "periods": ps,
                    "legendre": { "value": tower.gf().coeffs(inv.value), "tail": inv.tail },
                })
            }
        }
        Command::QuasiPeriod { .. } => {
            let lams: Vec<Cinf> = if r.config.params.lambda.is_empty() {
                let (lat, _) = certified_lattice(rho, &omega()?, prec.tower_cap)?;
                lat.periods.into_iter().map(|p| p.omega).collect()
            } else {
                r.config
                    .params
                    .lambda
                    .iter()
                    .map(|s| parse(s, r))
                    .collect::<Result<_>>()?
            };
            let vals = lams
                .iter()
                .map(|l| Ok(json!({ "lambda": el(l), "f_tau": el(&rho.quasi_period_eval(l, true)?) })))
                .collect::<Result<Vec<_>>>()?;
            json!({ "values": vals })
        }
        Command::Agf { .. } => {
            let u = parse(r.config.params.u.as_deref().unwrap_or("theta^-1"), r)?;
            let f = match prec.pole_count {
                Some(n) => Agf::build(rho, &u, n)?,
                None => Agf::build_full(rho, &u)?,
            };
            let t = prec.t_terms;
            json!({
                "u": el(&u),
                "pole_count": f.pole_count(),
                "series": codec::encode_series(&f.to_tseries(t)?),
                "fu1": residuals(&verify_fu1(rho, &u, t)?, need),
                "fu2": residuals(&verify_fu2(rho, &u)?, need),
            })
        }
        Command::Omega => {
            let om = omega()?;
            json!({
                "series": codec::encode_series(&om.series),
                "xi": tower.gf().coeffs(om.xi),
                "pi_tilde": el(&om.pi_tilde()?),
                "difference": residuals(&om.difference_residuals()?, need),
            })
        }
        Command::Psi => {
            let om = omega()?;
            let (lat, _) = certified_lattice(rho, &om, prec.tower_cap)?;
            let mm = psi_matrix(rho, &lat, &om)?;
            let phi: Vec<Value> = mm
                .phi
                .entries()
                .iter()
                .map(|e| Value::Array(e.coeffs().iter().map(el).collect()))
                .collect();
            let psi: Vec<Value> = mm
                .psi
                .entries()
                .iter()
                .map(|s| serde_json::to_value(codec::encode_series(s)).unwrap_or(Value::Null))
                .collect();
            json!({ "phi": phi, "psi": psi, "difference": residuals(&difference_residuals(&mm.phi, &mm.psi)?, need) })
        }
        Command::Specialize => {
            let om = omega()?;
            let (lat, _) = certified_lattice(rho, &om, prec.tower_cap)?;
            let pm = specialize_psi(rho, &lat, &om)?;
            json!({
                "psi_theta": matrix(&pm.psi_theta),
                "expected": matrix(&pm.expected),
                "p": matrix(&pm.p),
                "f_tau": [el(&pm.f_tau[0]), el(&pm.f_tau[1])],
                "zeta": el(&pm.zeta),
                "agreement": residuals(&pm.agreement, need),
                "inverse": residuals(&pm.inverse, need),
                "zeta_form": residuals(&pm.zeta_form, need),
            })
        }
        Command::LogPoint { .. } => {
            let normalized = rho.rank() == 2 && *rho.u() == Cinf::one(tower);
            let out = points(r, true)?
                .iter()
                .map(|p| {
                    let mut v = point_json(p);
                    if normalized {
                        let g = GVector::new(rho, p, prec.t_terms)?;
                        v["g_specialization"] = residuals(&g.specialization_residuals(p)?, need);
                        v["fneq"] = residuals(&verify_log_fneq(rho, p, prec.t_terms)?, need);
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?;
            json!({ "points": out })
        }
        Command::Extend { .. } => {
            let om = omega()?;
            let (lat, _) = certified_lattice(rho, &om, prec.tower_cap)?;
            let pts = points(r, true)?;
            let sys = extended_system(rho, &lat, &pts, &om)?;
            let mut out = json!({
                "n": sys.n,
                "points": pts.iter().map(|p| json!({ "lambda": el(&p.lambda), "alpha": el(&p.alpha) })).collect::<Vec<_>>(),
                "residuals": { "difference": residuals(&sys.difference, need), "reconstruction": residuals(&sys.reconstruction, need) },
                "generators": sys.generators.iter().map(|(n, v)| json!({ "name": n, "value": el(v) })).collect::<Vec<_>>(),
            });
            if let Some(rel) = &r.config.params.relation {
                let relation = Relation {
                    l11: parse(&rel.l11, r)?,
                    l21: parse(&rel.l21, r)?,
                    l: rel.l.iter().map(|s| parse(s, r)).collect::<Result<_>>()?,
                };
                let b = rel.b_theta.as_deref().map(|s| parse(s, r)).transpose()?;
                let rep = relation_certificate(rho, &lat, &pts, &relation, b.as_ref().map(|b| (b, &om)))?;
                out["relation"] = json!({
                    "value": el(&rep.value),
                    "residual_valuation": (rep.order != EXACT).then_some(rep.order),
                    "pass": rep.pass,
                    "specialized": rep.specialized.map(|s| s.map(|o| (o != EXACT).then_some(o))),
                });
            }
            out
        }
        Command::Verify => {
            let res = suite::run(r, timings)?;
            let (pass, code) = (res.pass, res.exit_code);
            let v = serde_json::to_value(res).map_err(|e| Failure::Config(e.to_string()))?;
            if !pass {
                return Err(Failure::Verification(code, v));
            }
            v
        }
    })
}

/// Runs the parsed command line; returns the document for standard output.
pub fn run(cli: &Cli) -> std::result::Result<Value, Failure> {
    let cfg = build_config(cli)?;
    let resolved = resolve(&cfg, cli.command.needs())?;
    let wrap = |result: Value| {
        json!({
            "command": cli.command.name(),
            "config": serde_json::to_value(&resolved.config).unwrap_or(Value::Null),
            "grid": serde_json::to_value(&resolved.grid).unwrap_or(Value::Null),
            "result": result,
        })
    };
    match execute(&cli.command, &resolved, cli.timings) {
        Ok(v) => Ok(wrap(v)),
        Err(Failure::Verification(c, v)) => Err(Failure::Verification(c, wrap(v))),
        Err(e) => Err(e),
    }
}

fn render(v: &Value, compact: bool) -> String {
    let s = if compact {
        serde_json::to_string(v)
    } else {
        serde_json::to_string_pretty(v)
    };
    s.unwrap_or_default()
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = run(&cli);
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    match out {
        Ok(v) => {
            let _ = writeln!(stdout.lock(), "{}", render(&v, cli.json));
            ExitCode::SUCCESS
        }
        Err(f) => {
            let code = f.exit_code();
            let record = match &f {
                Failure::Core(e) => json!({ "error": error_kind(e), "message": e.to_string(), "exit_code": code }),
                Failure::Config(m) => json!({ "error": "Config", "message": m, "exit_code": code }),
                Failure::Verification(_, v) => {
                    let _ = writeln!(stdout.lock(), "{}", render(v, cli.json));
                    json!({ "error": "SuiteFailed", "message": "at least one check failed or could not be carried out", "exit_code": code })
                }
            };
            let _ = writeln!(stderr.lock(), "{}", serde_json::to_string(&record).unwrap_or_default());
            ExitCode::from(code)
        }
    }
}
