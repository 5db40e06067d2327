//! Exact evaluation of expression trees to truncated series over `Q(i)(w)`.
//!
//! Precisions are grid numerators. Every node is asked for a target
//! precision and returns a series known at least that far; products and
//! quotients raise the precision requested from their children using lower
//! bounds on the valuations of the other factors.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::expr::Expr;
use crate::appell::expand_appell;
use crate::error::{Error, Result};
use crate::exponent::{grid_numerator, QExp};
use crate::rings::{GaussRat, WLaurent, WRational};
use crate::series::TruncatedSeries;
use crate::specfun::{b_rk, b_spec, eta, theta, theta_spec};

pub type Series = TruncatedSeries<WRational>;

/// How far a valuation search may look past the lower bound, in units of q.
const VALUATION_SEARCH: i64 = 48;

/// Leaf expansions shared between evaluators (and threads).
#[derive(Default)]
pub struct LeafCache {
    map: Mutex<HashMap<String, Arc<Series>>>,
}

impl LeafCache {
    pub fn new() -> Self {
        LeafCache::default()
    }

    fn get(&self, key: &str, prec: i64) -> Option<Arc<Series>> {
        let map = self.map.lock().ok()?;
        map.get(key).filter(|s| s.prec_num() >= prec).cloned()
    }

    fn put(&self, key: String, value: Arc<Series>) {
        if let Ok(mut map) = self.map.lock() {
            let keep = map.get(&key).map_or(false, |old| old.prec_num() >= value.prec_num());
            if !keep {
                map.insert(key, value);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.map.lock().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub struct Evaluator<'c> {
    qden: u32,
    wden: u32,
    leaves: &'c LeafCache,
    /// Values of `k1, k2, ...` for family monomials.
    params: Vec<i64>,
    memo: HashMap<(String, i64), Series>,
    valuations: HashMap<String, i64>,
}

fn floor_grid(x: &BigRational, den: u32) -> Result<i64> {
    let scaled = x * BigRational::from_integer(BigInt::from(den));
    scaled.floor().to_integer().to_i64().ok_or(Error::Overflow)
}

fn add_checked(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow)
}

impl<'c> Evaluator<'c> {
    pub fn new(qden: u32, wden: u32, leaves: &'c LeafCache) -> Self {
        Evaluator {
            qden,
            wden,
            leaves,
            params: Vec::new(),
            memo: HashMap::new(),
            valuations: HashMap::new(),
        }
    }

    pub fn with_params(mut self, params: Vec<i64>) -> Self {
        self.params = params;
        self
    }

    pub fn qden(&self) -> u32 {
        self.qden
    }

    /// `expr + O(q^order)`.
    pub fn eval(&mut self, expr: &Expr, order: QExp) -> Result<Series> {
        if order.den() != self.qden {
            return Err(Error::MismatchedQGrid(order.den(), self.qden));
        }
        let s = self.eval_num(expr, order.num())?;
        s.truncate(order)
    }

    fn q(&self, num: i64) -> QExp {
        QExp::new(num, self.qden)
    }

    fn constant(&self, c: GaussRat, prec: i64) -> Result<Series> {
        TruncatedSeries::from_terms(self.q(prec), [(0, WRational::constant(self.wden, c))])
    }

    /// Lower bound on the valuation, as a grid numerator.
    pub fn valuation_lb(&mut self, expr: &Expr) -> Result<i64> {
        Ok(match expr {
            Expr::Eta => floor_grid(&BigRational::new(1.into(), 24.into()), self.qden)?,
            Expr::Theta { arg, .. } => floor_grid(&theta_spec().substitute(arg)?.valuation_bound()?, self.qden)?,
            Expr::B { r, k, arg } => floor_grid(&b_spec(*r, *k)?.substitute(arg)?.valuation_bound()?, self.qden)?,
            Expr::Appell { spec, .. } => floor_grid(&spec.valuation_bound()?, self.qden)?,
            Expr::Const(_) => 0,
            Expr::Mono { q, .. } => floor_grid(q, self.qden)?,
            Expr::KMono { q, .. } => floor_grid(&q.at(&self.params)?, self.qden)?,
            Expr::Sum(v) => {
                let mut lb = None;
                for e in v {
                    let x = self.valuation_lb(e)?;
                    lb = Some(lb.map_or(x, |y: i64| y.min(x)));
                }
                lb.unwrap_or(0)
            }
            Expr::Prod(v) => {
                let mut total = 0i64;
                for e in v {
                    total = add_checked(total, self.valuation_lb(e)?)?;
                }
                total
            }
            Expr::Quot(a, b) => {
                let la = self.valuation_lb(a)?;
                let vb = self.exact_valuation(b)?;
                la.checked_sub(vb).ok_or(Error::Overflow)?
            }
            Expr::Pow(a, n) => {
                if *n >= 0 {
                    self.valuation_lb(a)?.checked_mul(*n).ok_or(Error::Overflow)?
                } else {
                    self.exact_valuation(a)?.checked_mul(*n).ok_or(Error::Overflow)?
                }
            }
            Expr::Neg(a) | Expr::WDeriv(a) | Expr::AtW1(a) => self.valuation_lb(a)?,
        })
    }

    /// Exact valuation of a series that is known to be nonzero.
    pub fn exact_valuation(&mut self, expr: &Expr) -> Result<i64> {
        let key = format!("{expr:?}");
        if let Some(&v) = self.valuations.get(&key) {
            return Ok(v);
        }
        let lb = self.valuation_lb(expr)?;
        let unit = self.qden as i64;
        let mut step = unit;
        let mut searched = 0;
        while searched <= VALUATION_SEARCH * unit {
            let prec = add_checked(lb, step)?;
            let s = self.eval_num(expr, prec)?;
            if let Some(v) = s.valuation() {
                self.valuations.insert(key, v.num());
                return Ok(v.num());
            }
            searched = step;
            step *= 2;
        }
        Err(Error::ZeroSeries)
    }

    fn eval_num(&mut self, expr: &Expr, prec: i64) -> Result<Series> {
        match expr {
            Expr::Eta | Expr::Theta { .. } | Expr::B { .. } | Expr::Appell { .. } => self.leaf(expr, prec),
            Expr::Const(c) => self.constant(c.clone(), prec),
            Expr::Mono { coeff, w, q } => {
                let qe = grid_numerator(q, self.qden)?;
                let c = WRational::from_laurent(WLaurent::monomial_rat(self.wden, w, coeff.clone())?);
                TruncatedSeries::from_terms(self.q(prec), [(qe, c)])
            }
            Expr::KMono { coeff, w, q } => {
                let qe = grid_numerator(&q.at(&self.params)?, self.qden)?;
                let we = w.at(&self.params)?;
                let c = WRational::from_laurent(WLaurent::monomial_rat(self.wden, &we, coeff.clone())?);
                TruncatedSeries::from_terms(self.q(prec), [(qe, c)])
            }
            Expr::Neg(a) => Ok(self.eval_num(a, prec)?.neg()),
            _ => {
                let key = (format!("{expr:?}"), prec);
                if let Some(s) = self.memo.get(&key) {
                    return Ok(s.clone());
                }
                let s = self.eval_composite(expr, prec)?;
                self.memo.insert(key, s.clone());
                Ok(s)
            }
        }
    }

    fn eval_composite(&mut self, expr: &Expr, prec: i64) -> Result<Series> {
        match expr {
            Expr::Sum(v) => {
                let mut acc = TruncatedSeries::zero(self.q(prec));
                for e in v {
                    let s = self.eval_num(e, prec)?;
                    acc = acc.add(&s)?;
                }
                Ok(acc)
            }
            Expr::Prod(v) => {
                if v.is_empty() {
                    return self.constant(GaussRat::one(), prec);
                }
                let lbs = v.iter().map(|e| self.valuation_lb(e)).collect::<Result<Vec<_>>>()?;
                let total: i64 = lbs.iter().try_fold(0i64, |acc, &x| add_checked(acc, x))?;
                if total >= prec {
                    return Ok(TruncatedSeries::zero(self.q(prec)));
                }
                let mut acc: Option<Series> = None;
                for (e, lb) in v.iter().zip(&lbs) {
                    let want = (prec - total).checked_add(*lb).ok_or(Error::Overflow)?;
                    let s = self.eval_num(e, want)?;
                    acc = Some(match acc {
                        None => s,
                        Some(a) => a.mul(&s)?,
                    });
                }
                Ok(acc.expect("nonempty product"))
            }
            Expr::Quot(a, b) => self.quotient(a, b, prec),
            Expr::Pow(a, n) => {
                if *n == 0 {
                    return self.constant(GaussRat::one(), prec);
                }
                if *n < 0 {
                    let m = u32::try_from(-*n).map_err(|_| Error::Overflow)?;
                    let vb = self.exact_valuation(a)?;
                    // 1/a^m = (1/a)^m with 1/a of valuation -vb
                    let inv_prec = add_checked(prec, (m as i64 - 1) * vb)?;
                    let inv = self.reciprocal(a, vb, inv_prec)?;
                    return inv.pow(m);
                }
                let m = u32::try_from(*n).map_err(|_| Error::Overflow)?;
                let lb = self.valuation_lb(a)?;
                if lb.checked_mul(m as i64).ok_or(Error::Overflow)? >= prec {
                    return Ok(TruncatedSeries::zero(self.q(prec)));
                }
                let want = add_checked(prec, -(m as i64 - 1) * lb)?;
                self.eval_num(a, want)?.pow(m)
            }
            Expr::WDeriv(a) => self.eval_num(a, prec)?.try_map_coefficients(|c| c.euler_derivative()),
            Expr::AtW1(a) => {
                let wden = self.wden;
                self.eval_num(a, prec)?
                    .try_map_coefficients(|c| Ok(WRational::constant(wden, c.at_one()?)))
            }
            _ => unreachable!("leaves are handled in eval_num"),
        }
    }

    /// `1/b` known to `O(q^prec)`, given the exact valuation `vb` of `b`.
    fn reciprocal(&mut self, b: &Expr, vb: i64, prec: i64) -> Result<Series> {
        // (b + O(q^p))^{-1} is known to O(q^{p - 2 vb})
        let want = add_checked(prec, 2 * vb)?;
        if want <= vb {
            // nothing of 1/b lies below prec
            return Ok(TruncatedSeries::zero(self.q(prec)));
        }
        self.eval_num(b, want)?.invert()
    }

    fn quotient(&mut self, a: &Expr, b: &Expr, prec: i64) -> Result<Series> {
        let vb = self.exact_valuation(b)?;
        let la = self.valuation_lb(a)?;
        if la - vb >= prec {
            return Ok(TruncatedSeries::zero(self.q(prec)));
        }
        let inv = self.reciprocal(b, vb, add_checked(prec, -la)?)?;
        let num = self.eval_num(a, add_checked(prec, vb)?)?;
        num.mul(&inv)
    }

    fn leaf(&mut self, expr: &Expr, prec: i64) -> Result<Series> {
        let key = format!("{}|{expr:?}", self.wden);
        if let Some(s) = self.leaves.get(&key, prec) {
            return if s.prec_num() == prec { Ok((*s).clone()) } else { s.truncate(self.q(prec)) };
        }
        let order = self.q(prec);
        let wden = self.wden;
        let s: Series = match expr {
            Expr::Eta => eta(order)?.map_coefficients(|c| WRational::constant(wden, GaussRat::real(c.clone()))),
            Expr::Theta { arg, form } => theta(arg, order, *form, wden)?.map_coefficients(|c| WRational::from_laurent(c.clone())),
            Expr::B { r, k, arg } => b_rk(*r, *k, arg, order, wden)?.map_coefficients(|c| WRational::from_laurent(c.clone())),
            Expr::Appell { spec, .. } => expand_appell(spec, order, wden)?,
            _ => unreachable!("not a leaf"),
        };
        self.leaves.put(key, Arc::new(s.clone()));
        Ok(s)
    }
}

/// Precision used for identities of Laurent polynomials in `w` and `q`.
pub fn exact_order(qden: u32) -> QExp {
    QExp::new(1 << 40, qden)
}
