//! Run configuration: field, precisions, module and command parameters, with
//! named presets and automatic choice of the grid denominator `e` and residue
//! degree `m`.

use std::sync::Arc;

use drinfeld_core::{Cinf, DrinfeldModule, Error, FieldConfig, Precision, Result, Tower};
use serde::{Deserialize, Serialize};

use crate::codec::{self, CinfJson};
use crate::expr;

/// Largest residue field the automatic search will build.
const MAX_RESIDUE_ORDER: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Element {
    Expr(String),
    Approx(CinfJson),
}

impl Element {
    pub fn expr(s: &str) -> Self {
        Element::Expr(s.to_string())
    }

    pub fn eval(&self, tower: &Arc<Tower>) -> Result<Cinf> {
        match self {
            Element::Expr(s) => expr::parse(s, tower),
            Element::Approx(j) => codec::decode(j, tower),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u32,
    pub s: u32,
    pub m: Option<u32>,
    pub e: Option<u32>,
    pub modulus: Option<Vec<u32>>,
    pub max_twist_depth: u32,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec {
            p: 3,
            s: 1,
            m: None,
            e: None,
            modulus: None,
            max_twist_depth: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrecisionSpec {
    pub valuation_terms: i64,
    pub t_terms: usize,
    pub exp_depth: usize,
    pub pole_count: Option<usize>,
    pub tower_cap: usize,
}

impl Default for PrecisionSpec {
    fn default() -> Self {
        PrecisionSpec {
            valuation_terms: 240,
            t_terms: 16,
            exp_depth: drinfeld_core::drinfeld::DEFAULT_DEPTH,
            pole_count: None,
            tower_cap: drinfeld_core::drinfeld::DEFAULT_TOWER_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModuleSpec {
    pub rank: u8,
    pub kappa: Element,
    pub u: Element,
}

impl Default for ModuleSpec {
    fn default() -> Self {
        ModuleSpec {
            rank: 2,
            kappa: Element::expr("1"),
            u: Element::expr("1"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelationSpec {
    pub l11: String,
    pub l21: String,
    pub l: Vec<String>,
    pub b_theta: Option<String>,
}

/// Command arguments; each command reads the ones it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub z: Option<String>,
    pub u: Option<String>,
    pub lambda: Vec<String>,
    pub alpha: Vec<String>,
    pub relation: Option<RelationSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub field: FieldSpec,
    pub precision: PrecisionSpec,
    pub module: ModuleSpec,
    pub params: Params,
}

/// The module descriptor format read by `--module`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDescriptor {
    pub p: u32,
    #[serde(default = "one")]
    pub s: u32,
    pub m: Option<u32>,
    pub modulus: Option<Vec<u32>>,
    pub e: Option<u32>,
    pub rank: u8,
    pub kappa: Element,
    pub u: Element,
    #[serde(default)]
    pub prec: DescriptorPrecision,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescriptorPrecision {
    pub valuation_terms: Option<i64>,
    pub t_terms: Option<usize>,
    pub depth: Option<usize>,
}

pub const PRESETS: &[&str] = &["q3", "q5", "q5-theta", "carlitz3", "carlitz5"];

impl RunConfig {
    /// `q3`, `q5`: `θ + τ + τ²`; `q5-theta`: `θ + θτ + τ²`; `carlitz3`,
    /// `carlitz5`: `θ + τ`.
    pub fn preset(name: &str) -> Result<Self> {
        let (p, rank, kappa) = match name {
            "q3" => (3, 2, "1"),
            "q5" => (5, 2, "1"),
            "q5-theta" => (5, 2, "theta"),
            "carlitz3" => (3, 1, "1"),
            "carlitz5" => (5, 1, "1"),
            _ => {
                return Err(Error::Config(format!(
                    "unknown preset {name:?}; expected one of {}",
                    PRESETS.join(", ")
                )))
            }
        };
        let mut c = RunConfig::default();
        c.field.p = p;
        c.module.rank = rank;
        c.module.kappa = Element::expr(kappa);
        Ok(c)
    }

    pub fn apply_descriptor(&mut self, d: ModuleDescriptor) {
        self.field.p = d.p;
        self.field.s = d.s;
        self.field.m = d.m;
        self.field.e = d.e;
        self.field.modulus = d.modulus;
        self.module = ModuleSpec {
            rank: d.rank,
            kappa: d.kappa,
            u: d.u,
        };
        if let Some(n) = d.prec.valuation_terms {
            self.precision.valuation_terms = n;
        }
        if let Some(t) = d.prec.t_terms {
            self.precision.t_terms = t;
        }
        if let Some(k) = d.prec.depth {
            self.precision.exp_depth = k;
        }
    }

    pub fn q(&self) -> u64 {
        (self.field.p as u64).pow(self.field.s)
    }
}

/// What a command needs from the field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Needs {
    /// `ξ` with `ξ^{q-1} = -1`, i.e. even `m`.
    pub xi: bool,
    /// Torsion points of the module.
    pub torsion: bool,
}

/// The grid the run settled on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridChoice {
    pub e: u32,
    pub m: u32,
    pub automatic: bool,
    /// Torsion lines whose points lie outside every admissible grid.
    pub unreachable: Vec<String>,
}

pub struct Resolved {
    /// The input with `m`, `e` and `modulus` filled in.
    pub config: RunConfig,
    pub tower: Arc<Tower>,
    pub rho: DrinfeldModule,
    pub grid: GridChoice,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn pinned(el: &Element) -> Option<(u32, u32, Vec<u32>)> {
    match el {
        Element::Approx(j) => Some((j.m, j.e, j.modulus.clone())),
        Element::Expr(_) => None,
    }
}

fn build(cfg: &RunConfig, m: u32, e: u32) -> Result<(Arc<Tower>, DrinfeldModule)> {
    let f = &cfg.field;
    let mut fc = FieldConfig::new(f.p, f.s, m, e, f.max_twist_depth)?;
    if let Some(modulus) = &f.modulus {
        fc.modulus = modulus.clone();
    }
    let tower = Tower::new(fc, Precision::new(cfg.precision.valuation_terms))?;
    let kappa = cfg.module.kappa.eval(&tower)?;
    let depth = cfg.precision.exp_depth;
    let rho = match cfg.module.rank {
        1 => DrinfeldModule::rank1(&tower, kappa, depth)?,
        2 => DrinfeldModule::rank2(&tower, kappa, cfg.module.u.eval(&tower)?, depth)?,
        r => return Err(Error::Config(format!("rank {r} is not supported; use 1 or 2"))),
    };
    Ok((tower, rho))
}

/// Builds the tower and module, choosing the smallest admissible `m` and `e`
/// that are not fixed by the configuration.
///
/// `e` starts at `(q-1)·q^D` and is raised to cover the valuation denominators
/// of the torsion lines; `m` runs upward (even only when `ξ` is needed) until
/// every reachable torsion line splits.
pub fn resolve(cfg: &RunConfig, needs: Needs) -> Result<Resolved> {
    let mut cfg = cfg.clone();
    let q = cfg.q();
    if q < 3 {
        return Err(Error::Config("q must be at least 3".into()));
    }
    for el in [&cfg.module.kappa, &cfg.module.u] {
        if let Some((m, e, modulus)) = pinned(el) {
            cfg.field.m.get_or_insert(m);
            cfg.field.e.get_or_insert(e);
            cfg.field.modulus.get_or_insert(modulus);
        }
    }
    let automatic = cfg.field.m.is_none() || cfg.field.e.is_none();
    let ms: Vec<u32> = match cfg.field.m {
        Some(m) => vec![m],
        None => (1..)
            .take_while(|&m| q.checked_pow(m).is_some_and(|o| o <= MAX_RESIDUE_ORDER))
            .filter(|m| !needs.xi || m % 2 == 0)
            .collect(),
    };
    let base = FieldConfig::minimal_grid(q, cfg.field.max_twist_depth, 1);
    let mut last = Error::ResidueFieldTooSmall(format!("no residue degree with q^m ≤ {MAX_RESIDUE_ORDER} works"));
    'm: for &m in &ms {
        let mut e = cfg.field.e.map(u64::from).unwrap_or(base);
        loop {
            let e32 = u32::try_from(e).map_err(|_| Error::Config(format!("grid denominator {e} too large")))?;
            let (tower, rho) = build(&cfg, m, e32)?;
            let mut unreachable = Vec::new();
            if needs.torsion {
                let mut next = e;
                for g in rho.torsion_points()? {
                    match &g.points {
                        Ok(_) => {}
                        Err(Error::ResidueFieldTooSmall(msg)) => {
                            last = Error::ResidueFieldTooSmall(msg.clone());
                            continue 'm;
                        }
                        Err(Error::GridTooCoarse(msg)) => {
                            let den = g.valuation.den() as u64;
                            if cfg.field.e.is_none() && !e.is_multiple_of(den) {
                                next = lcm(next, den);
                            } else {
                                unreachable.push(format!("valuation {}: {msg}", g.valuation));
                            }
                        }
                        Err(other) => return Err(other.clone()),
                    }
                }
                if next != e {
                    e = next;
                    continue;
                }
            }
            let mut config = cfg.clone();
            config.field.m = Some(m);
            config.field.e = Some(e32);
            config.field.modulus = Some(tower.config().modulus.clone());
            return Ok(Resolved {
                config,
                tower,
                rho,
                grid: GridChoice {
                    e: e32,
                    m,
                    automatic,
                    unreachable,
                },
            });
        }
    }
    Err(last)
}
