//! JSON layout of truncated series.
//!
//! ```text
//! {
//!   "schema": "qseries.series/1",
//!   "q_den": 24,
//!   "prec": 73,
//!   "terms": [ {"exp": 1, "den": 24, "coeff": ...}, ... ]
//! }
//! ```
//!
//! `exp/den` is the q-exponent and `prec/q_den` the precision. Coefficients
//! are exact:
//! - rational or Gaussian rational: a string such as `"-3/2"` or `"(1-2*i)"`;
//! - Laurent polynomial in `w`: `{"w_den": 6, "terms": [[3, "i"], [-3, "-i"]]}`
//!   where `[e, c]` stands for `c * w^(e/w_den)`;
//! - rational function: `{"w_den": 6, "num": [...], "den": [...]}`.

use num_rational::BigRational;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exponent::{format_rational, parse_rational, QExp};
use crate::rings::{GaussRat, Ring, WLaurent, WRational};
use crate::series::TruncatedSeries;

pub const SERIES_SCHEMA: &str = "qseries.series/1";

pub trait JsonCoeff: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

fn bad(what: &str) -> Error {
    Error::Parse(format!("series JSON: {what}"))
}

impl JsonCoeff for BigRational {
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self> {
        parse_rational(v.as_str().ok_or_else(|| bad("rational coefficient must be a string"))?)
    }
}

impl JsonCoeff for GaussRat {
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(v: &Value) -> Result<Self> {
        GaussRat::parse(v.as_str().ok_or_else(|| bad("coefficient must be a string"))?)
    }
}

fn laurent_terms(p: &WLaurent) -> Value {
    Value::Array(p.terms().iter().map(|(e, c)| json!([e, c.to_string()])).collect())
}

fn parse_laurent_terms(den: u32, v: &Value) -> Result<WLaurent> {
    let items = v.as_array().ok_or_else(|| bad("w terms must be an array"))?;
    let mut terms = Vec::with_capacity(items.len());
    for item in items {
        let pair = item.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("w term must be [exp, coeff]"))?;
        let e = pair[0].as_i64().ok_or_else(|| bad("w exponent must be an integer"))?;
        terms.push((e, GaussRat::from_json(&pair[1])?));
    }
    Ok(WLaurent::from_terms(den, terms))
}

fn w_den(v: &Value) -> Result<u32> {
    v.get("w_den")
        .and_then(Value::as_u64)
        .and_then(|d| u32::try_from(d).ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| bad("missing w_den"))
}

impl JsonCoeff for WLaurent {
    fn to_json(&self) -> Value {
        json!({"w_den": self.den(), "terms": laurent_terms(self)})
    }

    fn from_json(v: &Value) -> Result<Self> {
        parse_laurent_terms(w_den(v)?, v.get("terms").ok_or_else(|| bad("missing terms"))?)
    }
}

impl JsonCoeff for WRational {
    fn to_json(&self) -> Value {
        json!({"w_den": self.grid(), "num": laurent_terms(self.numer()), "den": laurent_terms(self.denom())})
    }

    fn from_json(v: &Value) -> Result<Self> {
        let den = w_den(v)?;
        let n = parse_laurent_terms(den, v.get("num").ok_or_else(|| bad("missing num"))?)?;
        let d = parse_laurent_terms(den, v.get("den").ok_or_else(|| bad("missing den"))?)?;
        WRational::reduce(n, d)
    }
}

pub fn series_to_json<R: Ring + JsonCoeff>(s: &TruncatedSeries<R>) -> Value {
    let terms: Vec<Value> = s
        .raw_terms()
        .iter()
        .map(|(e, c)| json!({"exp": e, "den": s.den(), "coeff": c.to_json()}))
        .collect();
    json!({
        "schema": SERIES_SCHEMA,
        "q_den": s.den(),
        "prec": s.prec_num(),
        "terms": terms,
    })
}

pub fn series_from_json<R: Ring + JsonCoeff>(v: &Value) -> Result<TruncatedSeries<R>> {
    if v.get("schema").and_then(Value::as_str) != Some(SERIES_SCHEMA) {
        return Err(bad("unknown schema"));
    }
    let den = v
        .get("q_den")
        .and_then(Value::as_u64)
        .and_then(|d| u32::try_from(d).ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| bad("missing q_den"))?;
    let prec = v.get("prec").and_then(Value::as_i64).ok_or_else(|| bad("missing prec"))?;
    let items = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("missing terms"))?;
    let mut terms = Vec::with_capacity(items.len());
    for t in items {
        let e = t.get("exp").and_then(Value::as_i64).ok_or_else(|| bad("term without exp"))?;
        if t.get("den").and_then(Value::as_u64) != Some(den as u64) {
            return Err(bad("term denominator differs from q_den"));
        }
        let c = R::from_json(t.get("coeff").ok_or_else(|| bad("term without coeff"))?)?;
        terms.push((e, c));
    }
    TruncatedSeries::from_terms(QExp::new(prec, den), terms)
}
