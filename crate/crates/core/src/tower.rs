//! Configuration of the working field `K_{m,e} = F_{q^m}((θ^{-1/e}))`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gf::{self, Gf};

/// The plain-data description of a field tower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldConfig {
    pub p: u32,
    pub s: u32,
    pub m: u32,
    /// Monic modulus of degree `s·m` over `F_p`, coefficients low to high.
    pub modulus: Vec<u32>,
    /// Grid denominator: exponents are stored in units of `1/e` of a `θ`-power.
    pub e: u32,
    /// Largest inverse twist the grid is sized for.
    pub max_twist_depth: u32,
    /// Characteristic 2 is accepted only when this is set.
    pub allow_char2: bool,
}

impl FieldConfig {
    /// A configuration using the first primitive modulus of the right degree.
    pub fn new(p: u32, s: u32, m: u32, e: u32, max_twist_depth: u32) -> Result<Self> {
        let gf = Gf::new(p, s, m)?;
        Ok(FieldConfig {
            p,
            s,
            m,
            modulus: gf.modulus().to_vec(),
            e,
            max_twist_depth,
            allow_char2: false,
        })
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.s)
    }

    /// The smallest admissible grid denominator divisible by `base`.
    pub fn minimal_grid(q: u64, depth: u32, base: u64) -> u64 {
        let unit = (q - 1) * q.pow(depth);
        crate::rational::lcm(unit as i64, base.max(1) as i64) as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 2 && !self.allow_char2 {
            return Err(Error::Config(
                "characteristic 2 is untested; set allow_char2 to proceed".into(),
            ));
        }
        if self.e == 0 {
            return Err(Error::Config("grid denominator e must be positive".into()));
        }
        let q = self.q();
        let unit = (q - 1)
            .checked_mul(q.pow(self.max_twist_depth))
            .ok_or_else(|| Error::Config("twist depth too large".into()))?;
        if !(self.e as u64).is_multiple_of(unit) {
            return Err(Error::Config(format!(
                "e = {} must be divisible by (q-1)·q^D = {unit} (q = {q}, D = {})",
                self.e, self.max_twist_depth
            )));
        }
        if !gf::is_irreducible(self.p, &self.modulus) {
            return Err(Error::Config(format!("modulus {:?} is reducible", self.modulus)));
        }
        Ok(())
    }
}

/// How much of each series is computed.
///
/// A result with leading exponent `v` is truncated at `max(absolute, v + relative)`:
/// large elements keep every term above the absolute floor, small ones keep
/// `relative` terms past their leading term so they survive multiplication by
/// large elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub absolute: i64,
    pub relative: i64,
}

impl Precision {
    pub fn new(absolute: i64) -> Self {
        Precision {
            absolute,
            relative: absolute + absolute / 2,
        }
    }
}

/// A validated field tower shared by all elements computed in it.
#[derive(Debug)]
pub struct Tower {
    config: FieldConfig,
    gf: Gf,
    precision: Precision,
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.precision == other.precision
    }
}

impl Tower {
    pub fn new(config: FieldConfig, precision: Precision) -> Result<Arc<Self>> {
        config.validate()?;
        if precision.absolute <= 0 || precision.relative <= 0 {
            return Err(Error::Config("precision must be positive".into()));
        }
        let gf = Gf::with_modulus(config.p, config.s, config.m, config.modulus.clone())?;
        Ok(Arc::new(Tower { config, gf, precision }))
    }

    pub fn config(&self) -> &FieldConfig {
        &self.config
    }

    pub fn gf(&self) -> &Gf {
        &self.gf
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Working precision `N` in grid units.
    pub fn n(&self) -> i64 {
        self.precision.absolute
    }

    pub fn e(&self) -> i64 {
        self.config.e as i64
    }

    pub fn q(&self) -> u64 {
        self.config.q()
    }

    /// Truncation point for a result whose leading exponent is `v`.
    pub fn cap(&self, v: i64) -> i64 {
        self.precision.absolute.max(v.saturating_add(self.precision.relative))
    }

    /// The same field with a different working precision.
    pub fn with_precision(&self, precision: Precision) -> Result<Arc<Tower>> {
        Tower::new(self.config.clone(), precision)
    }
}
