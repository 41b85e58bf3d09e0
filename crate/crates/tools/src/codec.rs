//! JSON encodings of field elements and `t`-series.
//!
//! An element is `{p, s, e, m, modulus, prec, terms}` with `terms` a list of
//! `[exponent, [c_0, …, c_{sm-1}]]`, exponents ascending, coefficients over
//! `F_p` in the power basis of `F_{q^m}`. `prec = null` marks an exact value.

use std::sync::Arc;

use drinfeld_core::{Cinf, Error, Result, TSeries, TailBound, Tower, EXACT};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CinfJson {
    pub p: u32,
    pub s: u32,
    pub e: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
    pub prec: Option<i64>,
    pub terms: Vec<(i64, Vec<u32>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TailJson {
    Zero,
    Affine { base: i64, slope: i64 },
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TSeriesJson {
    pub coeffs: Vec<CinfJson>,
    pub tail: TailJson,
}

pub fn encode(x: &Cinf) -> CinfJson {
    let tower = x.tower();
    let cfg = tower.config();
    let gf = tower.gf();
    CinfJson {
        p: cfg.p,
        s: cfg.s,
        e: cfg.e,
        m: cfg.m,
        modulus: cfg.modulus.clone(),
        prec: (x.prec() != EXACT).then_some(x.prec()),
        terms: x.terms().iter().map(|&(k, c)| (k, gf.coeffs(c))).collect(),
    }
}

/// Decodes into `tower`; the record's field data must match it.
pub fn decode(j: &CinfJson, tower: &Arc<Tower>) -> Result<Cinf> {
    let cfg = tower.config();
    if (j.p, j.s, j.e, j.m) != (cfg.p, cfg.s, cfg.e, cfg.m) || j.modulus != cfg.modulus {
        return Err(Error::TowerMismatch);
    }
    let gf = tower.gf();
    let mut terms = Vec::with_capacity(j.terms.len());
    for w in j.terms.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(Error::Config("element exponents must be strictly ascending".into()));
        }
    }
    for (k, c) in &j.terms {
        if c.iter().any(|&x| x >= cfg.p) {
            return Err(Error::Config(format!("coefficient {c:?} is not reduced mod {}", cfg.p)));
        }
        terms.push((*k, gf.from_coeffs(c)?));
    }
    Ok(Cinf::from_terms(tower, terms, j.prec.unwrap_or(EXACT)))
}

pub fn encode_series(s: &TSeries) -> TSeriesJson {
    TSeriesJson {
        coeffs: s.coeffs().iter().map(encode).collect(),
        tail: match s.tail() {
            TailBound::Zero => TailJson::Zero,
            TailBound::Affine { base, slope } => TailJson::Affine { base, slope },
            TailBound::Unknown => TailJson::Unknown,
        },
    }
}

pub fn decode_series(j: &TSeriesJson, tower: &Arc<Tower>) -> Result<TSeries> {
    let coeffs = j.coeffs.iter().map(|c| decode(c, tower)).collect::<Result<Vec<_>>>()?;
    let tail = match j.tail {
        TailJson::Zero => TailBound::Zero,
        TailJson::Affine { base, slope } => TailBound::Affine { base, slope },
        TailJson::Unknown => TailBound::Unknown,
    };
    Ok(TSeries::new(tower, coeffs, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use drinfeld_core::{FieldConfig, Precision};

    fn tower() -> Arc<Tower> {
        Tower::new(FieldConfig::new(3, 1, 2, 4, 0).unwrap(), Precision::new(40)).unwrap()
    }

    #[test]
    fn exact_and_truncated_elements() {
        let t = tower();
        let x = &Cinf::theta_pow(&t, 2) + &Cinf::constant(&t, t.gf().generator());
        let j = encode(&x);
        assert_eq!(j.prec, None);
        assert_eq!(j.terms[0].0, -8);
        assert_eq!(decode(&j, &t).unwrap(), x);
        let y = Cinf::theta_pow(&t, -1).inv().unwrap().truncate(7);
        assert_eq!(decode(&encode(&y), &t).unwrap(), y);
    }

    #[test]
    fn rejects_foreign_towers() {
        let t = tower();
        let mut j = encode(&Cinf::one(&t));
        j.e = 8;
        assert_eq!(decode(&j, &t), Err(Error::TowerMismatch));
        let mut j = encode(&Cinf::one(&t));
        j.terms[0].1[0] = 3;
        assert!(decode(&j, &t).is_err());
    }

    #[test]
    fn series_round_trip() {
        let t = tower();
        let s = TSeries::new(
            &t,
            vec![Cinf::one(&t), Cinf::theta_pow(&t, -1).truncate(30)],
            TailBound::Affine { base: 3, slope: 4 },
        );
        let text = serde_json::to_string(&encode_series(&s)).unwrap();
        let back: TSeriesJson = serde_json::from_str(&text).unwrap();
        assert_eq!(decode_series(&back, &t).unwrap(), s);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn elements_round_trip(terms in proptest::collection::vec((-20i64..40, 0u32..9), 0..8), prec in proptest::option::of(10i64..60)) {
            let t = tower();
            let x = Cinf::from_terms(&t, terms, prec.unwrap_or(EXACT));
            let text = serde_json::to_string(&encode(&x)).unwrap();
            let back: CinfJson = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(decode(&back, &t).unwrap(), x);
        }
    }
}
