//! Truncated Laurent series in `q` with exact rational exponents.
//!
//! A [`TruncatedSeries`] is a finite set of nonzero terms below a precision
//! `prec`: the value is known modulo `O(q^prec)`. Exponents are integer
//! numerators over the series grid denominator `D`. Precision always
//! propagates pessimistically, so a zero residual is a trustworthy zero.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exponent::{format_ratio, QExp};
use crate::rings::Ring;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<R> {
    den: u32,
    terms: BTreeMap<i64, R>,
    prec: i64,
}

/// Where two series first disagree on their common precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch<R> {
    pub exponent: QExp,
    pub left: Option<R>,
    pub right: Option<R>,
}

impl<R: Ring> TruncatedSeries<R> {
    /// The series `0 + O(q^prec)`.
    pub fn zero(prec: QExp) -> Self {
        TruncatedSeries {
            den: prec.den(),
            terms: BTreeMap::new(),
            prec: prec.num(),
        }
    }

    /// Builds a series from grid-numerator terms, merging duplicates and
    /// discarding zeros and exponents at or above `prec`.
    pub fn from_terms(prec: QExp, terms: impl IntoIterator<Item = (i64, R)>) -> Result<Self> {
        let mut out = TruncatedSeries::zero(prec);
        let mut pending: BTreeMap<i64, Vec<R>> = BTreeMap::new();
        for (e, c) in terms {
            if e < out.prec && !c.is_zero() {
                pending.entry(e).or_default().push(c);
            }
        }
        for (e, cs) in pending {
            if let Some(c) = R::sum_all(cs)? {
                if !c.is_zero() {
                    out.terms.insert(e, c);
                }
            }
        }
        Ok(out)
    }

    /// `c q^exp + O(q^prec)`.
    pub fn monomial(exp: QExp, c: R, prec: QExp) -> Result<Self> {
        if exp.den() != prec.den() {
            return Err(Error::MismatchedQGrid(exp.den(), prec.den()));
        }
        TruncatedSeries::from_terms(prec, [(exp.num(), c)])
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn prec(&self) -> QExp {
        QExp::new(self.prec, self.den)
    }

    pub fn prec_num(&self) -> i64 {
        self.prec
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (QExp, &R)> + '_ {
        self.terms.iter().map(|(&e, c)| (QExp::new(e, self.den), c))
    }

    pub fn raw_terms(&self) -> &BTreeMap<i64, R> {
        &self.terms
    }

    pub fn coeff(&self, exp: QExp) -> Option<&R> {
        if exp.den() != self.den {
            return None;
        }
        self.terms.get(&exp.num())
    }

    pub fn valuation(&self) -> Option<QExp> {
        self.terms.keys().next().map(|&e| QExp::new(e, self.den))
    }

    /// Valuation, or the precision for `0 + O(q^prec)`.
    fn order_num(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(self.prec)
    }

    pub fn leading(&self) -> Option<(QExp, &R)> {
        self.terms.iter().next().map(|(&e, c)| (QExp::new(e, self.den), c))
    }

    fn check_grid(&self, other_den: u32) -> Result<()> {
        if self.den == other_den {
            Ok(())
        } else {
            Err(Error::MismatchedQGrid(self.den, other_den))
        }
    }

    /// Lowers the precision to `prec` (no-op when already lower).
    pub fn truncate(&self, prec: QExp) -> Result<Self> {
        self.check_grid(prec.den())?;
        let p = prec.num().min(self.prec);
        Ok(TruncatedSeries {
            den: self.den,
            terms: self.terms.range(..p).map(|(&e, c)| (e, c.clone())).collect(),
            prec: p,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_grid(other.den)?;
        let prec = self.prec.min(other.prec);
        let mut terms: BTreeMap<i64, R> = self.terms.range(..prec).map(|(&e, c)| (e, c.clone())).collect();
        for (&e, c) in other.terms.range(..prec) {
            match terms.remove(&e) {
                Some(existing) => {
                    let s = existing.try_add(c)?;
                    if !s.is_zero() {
                        terms.insert(e, s);
                    }
                }
                None => {
                    terms.insert(e, c.clone());
                }
            }
        }
        Ok(TruncatedSeries {
            den: self.den,
            terms,
            prec,
        })
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries {
            den: self.den,
            terms: self.terms.iter().map(|(&e, c)| (e, c.neg())).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Cauchy product with precision `min(val(a) + prec(b), val(b) + prec(a))`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_grid(other.den)?;
        let va = self.order_num();
        let vb = other.order_num();
        let prec = va
            .checked_add(other.prec)
            .ok_or(Error::Overflow)?
            .min(vb.checked_add(self.prec).ok_or(Error::Overflow)?);
        let mut buckets: BTreeMap<i64, Vec<R>> = BTreeMap::new();
        for (&ea, ca) in &self.terms {
            if ea + vb >= prec {
                break;
            }
            for (&eb, cb) in &other.terms {
                let e = ea + eb;
                if e >= prec {
                    break;
                }
                buckets.entry(e).or_default().push(ca.try_mul(cb)?);
            }
        }
        let mut terms = BTreeMap::new();
        for (e, cs) in buckets {
            if let Some(c) = R::sum_all(cs)? {
                if !c.is_zero() {
                    terms.insert(e, c);
                }
            }
        }
        Ok(TruncatedSeries {
            den: self.den,
            terms,
            prec,
        })
    }

    /// Multiplies every coefficient by a ring element.
    pub fn scale(&self, c: &R) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (&e, x) in &self.terms {
            let y = x.try_mul(c)?;
            if !y.is_zero() {
                terms.insert(e, y);
            }
        }
        Ok(TruncatedSeries {
            den: self.den,
            terms,
            prec: self.prec,
        })
    }

    /// Multiplicative inverse; the leading coefficient must be a unit of `R`.
    /// The result has valuation `-val(a)` and the same relative precision.
    pub fn invert(&self) -> Result<Self> {
        let (&v, lead) = self.terms.iter().next().ok_or(Error::ZeroSeries)?;
        let lead_inv = lead
            .unit_inverse()
            .ok_or_else(|| Error::NonUnit(format!("{lead:?}")))?;
        let rel = self.prec - v;
        let shifted: Vec<(usize, &R)> = self
            .terms
            .iter()
            .skip(1)
            .map(|(&e, c)| ((e - v) as usize, c))
            .collect();
        let neg_inv = lead_inv.neg();
        let mut out: Vec<Option<R>> = vec![None; rel as usize];
        out[0] = Some(lead_inv);
        for t in 1..rel as usize {
            let mut parts = Vec::new();
            for &(j, a) in &shifted {
                if j > t {
                    break;
                }
                if let Some(b) = &out[t - j] {
                    parts.push(a.try_mul(b)?);
                }
            }
            if let Some(s) = R::sum_all(parts)? {
                if !s.is_zero() {
                    let value = s.try_mul(&neg_inv)?;
                    if !value.is_zero() {
                        out[t] = Some(value);
                    }
                }
            }
        }
        let terms = out
            .into_iter()
            .enumerate()
            .filter_map(|(t, c)| c.map(|c| (t as i64 - v, c)))
            .collect();
        Ok(TruncatedSeries {
            den: self.den,
            terms,
            prec: self.prec - 2 * v,
        })
    }

    /// `self / other`, computed as `self * other^{-1}`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.invert()?)
    }

    /// Non-negative integer power by repeated multiplication.
    pub fn pow(&self, n: u32) -> Result<Self> {
        let one = match self.terms.values().next() {
            Some(c) => c.one_like(),
            None => return Ok(TruncatedSeries::zero(QExp::new(self.prec * n as i64, self.den))),
        };
        let mut acc = TruncatedSeries::from_terms(QExp::new(i64::MAX / 4, self.den), [(0, one)])?;
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplies by `q^e`: every exponent and the precision move by `e`.
    pub fn shift_q(&self, e: QExp) -> Result<Self> {
        self.check_grid(e.den())?;
        let s = e.num();
        Ok(TruncatedSeries {
            den: self.den,
            terms: self.terms.iter().map(|(&k, c)| (k + s, c.clone())).collect(),
            prec: self.prec.checked_add(s).ok_or(Error::Overflow)?,
        })
    }

    /// Applies `f` to every coefficient. `f` must be a ring homomorphism for
    /// the result to mean anything; zero images are pruned.
    pub fn map_coefficients<S: Ring>(&self, f: impl Fn(&R) -> S) -> TruncatedSeries<S> {
        TruncatedSeries {
            den: self.den,
            terms: self
                .terms
                .iter()
                .map(|(&e, c)| (e, f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
            prec: self.prec,
        }
    }

    pub fn try_map_coefficients<S: Ring>(&self, f: impl Fn(&R) -> Result<S>) -> Result<TruncatedSeries<S>> {
        let mut terms = BTreeMap::new();
        for (&e, c) in &self.terms {
            let y = f(c)?;
            if !y.is_zero() {
                terms.insert(e, y);
            }
        }
        Ok(TruncatedSeries {
            den: self.den,
            terms,
            prec: self.prec,
        })
    }

    /// Maps each term `c q^e` to a new series contribution `f(e, c)` and sums
    /// the results; used for substitutions that move q-exponents.
    pub fn try_map_terms<S: Ring>(
        &self,
        prec: QExp,
        f: impl Fn(i64, &R) -> Result<Vec<(i64, S)>>,
    ) -> Result<TruncatedSeries<S>> {
        let mut all = Vec::new();
        for (&e, c) in &self.terms {
            all.extend(f(e, c)?);
        }
        TruncatedSeries::from_terms(prec, all)
    }

    /// First exponent below the common precision where the series differ.
    pub fn first_difference(&self, other: &Self) -> Result<Option<Mismatch<R>>> {
        self.check_grid(other.den)?;
        let prec = self.prec.min(other.prec);
        let mut keys: Vec<i64> = self
            .terms
            .range(..prec)
            .map(|(&e, _)| e)
            .chain(other.terms.range(..prec).map(|(&e, _)| e))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        for e in keys {
            let a = self.terms.get(&e);
            let b = other.terms.get(&e);
            if a != b {
                return Ok(Some(Mismatch {
                    exponent: QExp::new(e, self.den),
                    left: a.cloned(),
                    right: b.cloned(),
                }));
            }
        }
        Ok(None)
    }

    /// Equality on the common precision.
    pub fn agrees_with(&self, other: &Self) -> Result<bool> {
        Ok(self.first_difference(other)?.is_none())
    }
}

impl<R: Ring + fmt::Display> fmt::Display for TruncatedSeries<R> {
    /// Text layout: terms in increasing exponent order. When every exponent
    /// differs from the valuation by an integer and the valuation is nonzero,
    /// the valuation is factored out: `q^(1/24) * (1 - q - q^2) + O(q^(73/24))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let den = self.den as i64;
        let big_o = format!("O({})", q_power(self.prec, den).unwrap_or_else(|| "1".into()));
        let Some(&v) = self.terms.keys().next() else {
            return write!(f, "0 + {big_o}");
        };
        let factor = v != 0 && self.terms.keys().all(|e| (e - v) % den == 0);
        let base = if factor { v } else { 0 };
        let mut body = String::new();
        for (idx, (&e, c)) in self.terms.iter().enumerate() {
            let text = c.to_string();
            let atomic = !text.contains(' ');
            let (negative, magnitude) = match text.strip_prefix('-') {
                Some(rest) if atomic => (true, rest.to_string()),
                _ => (false, text),
            };
            let magnitude = if atomic { magnitude } else { format!("({magnitude})") };
            if idx == 0 {
                if negative {
                    body.push('-');
                }
            } else {
                body.push_str(if negative { " - " } else { " + " });
            }
            match (q_power(e - base, den), magnitude.as_str()) {
                (None, m) => body.push_str(m),
                (Some(q), "1") => body.push_str(&q),
                (Some(q), m) => {
                    body.push_str(m);
                    body.push('*');
                    body.push_str(&q);
                }
            }
        }
        if factor {
            write!(f, "{} * ({body}) + {big_o}", q_power(v, den).unwrap())
        } else {
            write!(f, "{body} + {big_o}")
        }
    }
}

fn q_power(num: i64, den: i64) -> Option<String> {
    if num == 0 {
        return None;
    }
    if num == den {
        return Some("q".into());
    }
    let text = format_ratio(num, den);
    Some(if text.contains('/') || text.starts_with('-') {
        format!("q^({text})")
    } else {
        format!("q^{text}")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::rat_int;
    use num_rational::BigRational;

    type S = TruncatedSeries<BigRational>;

    fn series(terms: &[(i64, i64)], prec: i64) -> S {
        // exponents in whole q units on the 24-grid
        TruncatedSeries::from_terms(
            QExp::new(prec * 24, 24),
            terms.iter().map(|&(e, c)| (e * 24, rat_int(c))),
        )
        .unwrap()
    }

    #[test]
    fn additive_inverse_and_precision_minimum() {
        let a = series(&[(1, 1)], 5);
        let b = series(&[(1, -1)], 5);
        let s = a.add(&b).unwrap();
        assert!(s.is_zero());
        assert_eq!(s.prec(), QExp::new(120, 24));

        let c = series(&[(0, 1), (1, 1)], 3);
        let d = series(&[(2, 1)], 2);
        assert_eq!(c.add(&d).unwrap(), series(&[(0, 1), (1, 1)], 2));
    }

    #[test]
    fn fractional_exponents_share_the_grid() {
        let a = TruncatedSeries::from_terms(QExp::new(24, 24), [(1, rat_int(1))]).unwrap();
        let b = TruncatedSeries::from_terms(QExp::new(24, 24), [(3, rat_int(1))]).unwrap();
        let s = a.add(&b).unwrap();
        let exps: Vec<i64> = s.raw_terms().keys().copied().collect();
        assert_eq!(exps, vec![1, 3]);
        assert_eq!(s.to_string(), "q^(1/24) + q^(1/8) + O(q)");
    }

    #[test]
    fn product_precision() {
        let a = series(&[(0, 1), (1, -1)], 3);
        let b = series(&[(0, 1), (1, 1)], 3);
        assert_eq!(a.mul(&b).unwrap(), series(&[(0, 1), (2, -1)], 3));

        let x = TruncatedSeries::from_terms(QExp::new(48, 24), [(1, rat_int(1))]).unwrap();
        let sq = x.mul(&x).unwrap();
        assert_eq!(sq.valuation(), Some(QExp::new(2, 24)));
        assert_eq!(sq.prec(), QExp::new(49, 24));
    }

    #[test]
    fn geometric_inverse() {
        let a = series(&[(0, 1), (1, -1)], 4);
        assert_eq!(a.invert().unwrap(), series(&[(0, 1), (1, 1), (2, 1), (3, 1)], 4));
        assert_eq!(S::zero(QExp::new(24, 24)).invert(), Err(Error::ZeroSeries));
    }

    #[test]
    fn shift_round_trip() {
        let a = series(&[(0, 1)], 1);
        let s = a.shift_q(QExp::new(8, 24)).unwrap();
        assert_eq!(s.valuation(), Some(QExp::new(8, 24)));
        assert_eq!(s.prec(), QExp::new(32, 24));
        assert_eq!(a.shift_q(QExp::zero(24)).unwrap(), a);
        assert_eq!(s.shift_q(QExp::new(-8, 24)).unwrap(), a);
    }

    #[test]
    fn mixed_grids_error() {
        let a = series(&[(0, 1)], 1);
        let b = TruncatedSeries::from_terms(QExp::new(12, 12), [(0, rat_int(1))]).unwrap();
        assert_eq!(a.add(&b), Err(Error::MismatchedQGrid(24, 12)));
        assert_eq!(a.mul(&b), Err(Error::MismatchedQGrid(24, 12)));
    }

    #[test]
    fn difference_reporting() {
        let a = series(&[(0, 1), (2, 3)], 5);
        let b = series(&[(0, 1), (2, 4)], 3);
        let m = a.first_difference(&b).unwrap().unwrap();
        assert_eq!(m.exponent, QExp::new(48, 24));
        assert!(series(&[(0, 1), (4, 7)], 5).agrees_with(&series(&[(0, 1)], 3)).unwrap());
    }

    #[test]
    fn display_factors_valuation() {
        let s = TruncatedSeries::from_terms(
            QExp::new(73, 24),
            [(1, rat_int(1)), (25, rat_int(-1)), (49, rat_int(-1))],
        )
        .unwrap();
        assert_eq!(s.to_string(), "q^(1/24) * (1 - q - q^2) + O(q^(73/24))");
    }
}
