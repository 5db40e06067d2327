//! Checking catalogue identities coefficient by coefficient.

use std::time::Instant;

use num_rational::BigRational;
use serde::Serialize;

use super::eval::{exact_order, Evaluator, LeafCache, Series};
use super::expr::Expr;
use super::{Identity, Kind};
use crate::arg::ThetaArg;
use crate::error::Result;
use crate::exponent::{format_rational, rat_int, QExp, DEFAULT_Q_DEN, DEFAULT_W_DEN};
use crate::rings::GaussRat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub name: String,
    pub location: String,
    pub kind: String,
    /// Residual checked to `O(q^order)`; `exact` for families.
    pub order: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_exponent: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub wall_ms: u128,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// One line summary, without timing so that output is reproducible.
    pub fn line(&self) -> String {
        let mut out = format!(
            "{:<22} {:<6} order {:<8} {}",
            self.name,
            self.kind,
            self.order,
            match self.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
            }
        );
        if let (Some(e), Some(c)) = (&self.first_exponent, &self.coefficient) {
            out.push_str(&format!("  first nonzero q^({e}): {c}"));
        }
        if let Some(m) = &self.message {
            out.push_str(&format!("  {m}"));
        }
        out.push_str(&format!("  ({})", self.location));
        out
    }
}

fn first_term(s: &Series) -> Option<(String, String)> {
    s.leading().map(|(e, c)| (e.to_string(), c.to_string()))
}

enum Outcome {
    Zero,
    Nonzero { exponent: String, coefficient: String, note: Option<String> },
}

/// Verifies with a private cache on the default grids.
pub fn verify(identity: &Identity, order: Option<&BigRational>) -> VerifyReport {
    let cache = LeafCache::new();
    verify_with(identity, order, &cache, DEFAULT_Q_DEN, DEFAULT_W_DEN)
}

pub fn verify_with(
    identity: &Identity,
    order: Option<&BigRational>,
    cache: &LeafCache,
    qden: u32,
    wden: u32,
) -> VerifyReport {
    let start = Instant::now();
    let order = order.cloned().unwrap_or_else(|| identity.default_order.clone());
    let order_text = match identity.kind {
        Kind::Family { .. } => "exact".to_string(),
        _ => format_rational(&order),
    };
    let outcome = run(identity, &order, cache, qden, wden);
    let mut report = VerifyReport {
        name: identity.name.clone(),
        location: identity.location.clone(),
        kind: identity.kind_name().to_string(),
        order: order_text,
        status: Status::Pass,
        first_exponent: None,
        coefficient: None,
        message: None,
        wall_ms: 0,
    };
    match outcome {
        Ok(Outcome::Zero) => {}
        Ok(Outcome::Nonzero { exponent, coefficient, note }) => {
            report.status = Status::Fail;
            report.first_exponent = Some(exponent);
            report.coefficient = Some(coefficient);
            report.message = note;
        }
        Err(e) => {
            report.status = Status::Error;
            report.message = Some(e.to_string());
        }
    }
    report.wall_ms = start.elapsed().as_millis();
    report
}

fn run(identity: &Identity, order: &BigRational, cache: &LeafCache, qden: u32, wden: u32) -> Result<Outcome> {
    let residual = identity.residual()?;
    match &identity.kind {
        Kind::Series | Kind::Shift(_) => {
            let mut ev = Evaluator::new(qden, wden, cache);
            let s = ev.eval(&residual, QExp::from_rational(order, qden)?)?;
            Ok(match first_term(&s) {
                None => Outcome::Zero,
                Some((exponent, coefficient)) => Outcome::Nonzero {
                    exponent,
                    coefficient,
                    note: None,
                },
            })
        }
        Kind::Family { rank, lo, hi } => {
            let mut k = vec![*lo; *rank];
            loop {
                let mut ev = Evaluator::new(qden, wden, cache).with_params(k.clone());
                let s = ev.eval(&residual, exact_order(qden))?;
                if let Some((exponent, coefficient)) = first_term(&s) {
                    let params = k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
                    return Ok(Outcome::Nonzero {
                        exponent,
                        coefficient,
                        note: Some(format!("at k = ({params})")),
                    });
                }
                let mut i = *rank;
                loop {
                    if i == 0 {
                        return Ok(Outcome::Zero);
                    }
                    i -= 1;
                    if k[i] < *hi {
                        k[i] += 1;
                        break;
                    }
                    k[i] = *lo;
                }
            }
        }
    }
}

/// Checks `f(z + t tau) = sign * w^w_exp * q^q_exp * f(z)` to `O(q^order)`.
pub fn shift_check(
    f: &Expr,
    t: i64,
    w_exp: BigRational,
    q_exp: BigRational,
    sign: i64,
    order: &BigRational,
) -> VerifyReport {
    let identity = Identity {
        name: format!("shift {t}tau"),
        location: String::new(),
        description: String::new(),
        tex: String::new(),
        kind: Kind::Shift(ThetaArg::new(rat_int(1), rat_int(t), rat_int(0))),
        default_order: order.clone(),
        lhs: f.clone(),
        rhs: Expr::mono(GaussRat::from_int(sign), w_exp, q_exp),
        mutant: false,
    };
    verify(&identity, None)
}
