//! Laurent polynomials in `w` with exponents on the grid `Z/E`.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_bigint::BigInt;
use num_rational::BigRational;
use rug::ops::Pow;

use super::complex::{self, BigComplex};
use super::poly::Dense;
use super::{GaussRat, Ring};
use crate::error::{Error, Result};
use crate::exponent::{format_ratio, grid_numerator};

/// Sparse Laurent polynomial `sum c_e w^{e/E}`; terms sorted by exponent,
/// no zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct WLaurent {
    den: u32,
    terms: Vec<(i64, GaussRat)>,
}

impl WLaurent {
    pub fn zero(den: u32) -> Self {
        assert!(den > 0, "w-exponent denominator must be positive");
        WLaurent {
            den,
            terms: Vec::new(),
        }
    }

    pub fn constant(den: u32, c: GaussRat) -> Self {
        WLaurent::monomial(den, 0, c)
    }

    pub fn one(den: u32) -> Self {
        WLaurent::constant(den, GaussRat::one())
    }

    /// `c * w^{exp/den}` where `exp` is a grid numerator.
    pub fn monomial(den: u32, exp: i64, c: GaussRat) -> Self {
        let mut out = WLaurent::zero(den);
        if !c.is_zero() {
            out.terms.push((exp, c));
        }
        out
    }

    /// `c * w^{e}` for a rational `e`, which must lie on the grid.
    pub fn monomial_rat(den: u32, exp: &BigRational, c: GaussRat) -> Result<Self> {
        Ok(WLaurent::monomial(den, grid_numerator(exp, den)?, c))
    }

    pub fn from_terms(den: u32, terms: impl IntoIterator<Item = (i64, GaussRat)>) -> Self {
        let mut acc: BTreeMap<i64, GaussRat> = BTreeMap::new();
        for (e, c) in terms {
            match acc.entry(e) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    let sum = &*o.get() + &c;
                    *o.get_mut() = sum;
                }
            }
        }
        WLaurent {
            den,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn terms(&self) -> &[(i64, GaussRat)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0 && self.terms[0].1.is_one()
    }

    /// Single-term polynomials are exactly the units of the Laurent ring.
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.first().map(|t| t.0)
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.last().map(|t| t.0)
    }

    pub fn coeff(&self, exp: i64) -> GaussRat {
        self.terms
            .binary_search_by_key(&exp, |t| t.0)
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| GaussRat::zero())
    }

    pub fn lowest_coeff(&self) -> Option<&GaussRat> {
        self.terms.first().map(|t| &t.1)
    }

    fn check_grid(&self, other: &WLaurent) -> Result<()> {
        if self.den == other.den {
            Ok(())
        } else {
            Err(Error::MismatchedWGrid(self.den, other.den))
        }
    }

    pub fn add(&self, other: &WLaurent) -> Result<WLaurent> {
        self.check_grid(other)?;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ea, ca) = &self.terms[i];
            let (eb, cb) = &other.terms[j];
            match ea.cmp(eb) {
                std::cmp::Ordering::Less => {
                    out.push((*ea, ca.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((*eb, cb.clone()));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let s = ca + cb;
                    if !s.is_zero() {
                        out.push((*ea, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Ok(WLaurent {
            den: self.den,
            terms: out,
        })
    }

    pub fn sub(&self, other: &WLaurent) -> Result<WLaurent> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> WLaurent {
        WLaurent {
            den: self.den,
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn mul(&self, other: &WLaurent) -> Result<WLaurent> {
        self.check_grid(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(WLaurent::zero(self.den));
        }
        if other.is_monomial() {
            let (e, c) = &other.terms[0];
            return Ok(self.mul_monomial(*e, c));
        }
        if self.is_monomial() {
            let (e, c) = &self.terms[0];
            return Ok(other.mul_monomial(*e, c));
        }
        let mut acc: BTreeMap<i64, GaussRat> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let p = ca * cb;
                acc.entry(ea + eb)
                    .and_modify(|v| *v = &*v + &p)
                    .or_insert(p);
            }
        }
        Ok(WLaurent {
            den: self.den,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// Multiplies by `c * w^{e/E}`.
    pub fn mul_monomial(&self, exp: i64, c: &GaussRat) -> WLaurent {
        if c.is_zero() {
            return WLaurent::zero(self.den);
        }
        WLaurent {
            den: self.den,
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (e + exp, if c.is_one() { x.clone() } else { x * c }))
                .collect(),
        }
    }

    pub fn scale(&self, c: &GaussRat) -> WLaurent {
        self.mul_monomial(0, c)
    }

    /// Substitutes `w -> w^a`, i.e. the argument scaling `z -> a z`.
    pub fn w_scale(&self, a: &BigRational) -> Result<WLaurent> {
        let den = BigRational::from_integer(BigInt::from(self.den));
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            let value = BigRational::from_integer(BigInt::from(*e)) * a / &den;
            terms.push((grid_numerator(&value, self.den)?, c.clone()));
        }
        // a < 0 reverses the order; a == 0 collapses everything onto w^0
        Ok(WLaurent::from_terms(self.den, terms))
    }

    /// Substitutes `w -> e^{2 pi i s} w` (the shift `z -> z + s`); every
    /// resulting phase must be a fourth root of unity.
    pub fn twist(&self, s: &BigRational) -> Result<WLaurent> {
        let den = BigRational::from_integer(BigInt::from(self.den));
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            let phase = GaussRat::unit_phase(&(BigRational::from_integer(BigInt::from(*e)) * s / &den))?;
            terms.push((*e, c * &phase));
        }
        Ok(WLaurent {
            den: self.den,
            terms,
        })
    }

    /// The Euler operator `w d/dw`, equal to `(1/(2 pi i)) d/dz`.
    pub fn euler_derivative(&self) -> WLaurent {
        let den = BigRational::from_integer(BigInt::from(self.den));
        WLaurent {
            den: self.den,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| *e != 0)
                .map(|(e, c)| (*e, c.scale(&(BigRational::from_integer(BigInt::from(*e)) / &den))))
                .collect(),
        }
    }

    /// Value at `w = 1`.
    pub fn at_one(&self) -> GaussRat {
        self.terms.iter().fold(GaussRat::zero(), |acc, (_, c)| &acc + c)
    }

    /// Evaluates at `w = e^{2 pi i z}` with the branch `w^{1/E} = e^{2 pi i z/E}`.
    pub fn eval_z(&self, z: &BigComplex) -> BigComplex {
        let prec = z.prec().0;
        let mut root = z.clone() / self.den;
        root = complex::exp_2pi_i(&root);
        self.horner(&root, prec)
    }

    /// Evaluates at a given `w`, taking the principal branch of `w^{1/E}`.
    pub fn eval_w(&self, w: &BigComplex) -> Result<BigComplex> {
        let prec = w.prec().0;
        if self.terms.iter().any(|(e, _)| *e < 0) && complex::is_zero(w) {
            return Err(Error::Pole("negative power of w at w = 0".into()));
        }
        let root = if complex::is_zero(w) {
            w.clone()
        } else {
            let log = w.clone().ln();
            (log / self.den).exp()
        };
        Ok(self.horner(&root, prec))
    }

    fn horner(&self, root: &BigComplex, prec: u32) -> BigComplex {
        let mut acc = BigComplex::new(prec);
        let Some(&(mut prev, _)) = self.terms.last() else {
            return acc;
        };
        for (e, c) in self.terms.iter().rev() {
            if *e != prev {
                acc *= root.clone().pow(prev - e);
                prev = *e;
            }
            acc += complex::from_gauss(c, prec);
        }
        if prev != 0 {
            acc *= root.clone().pow(prev);
        }
        acc
    }

    /// Largest `s` such that every exponent offset from the minimum is a multiple of `s`.
    pub(crate) fn stride(&self) -> i64 {
        let Some(min) = self.min_exp() else { return 0 };
        self.terms.iter().fold(0i64, |g, (e, _)| g.gcd(&(e - min)))
    }

    /// Dense polynomial in `u = w^{stride/E}` after removing the lowest power.
    pub(crate) fn to_dense(&self, stride: i64) -> Dense {
        let Some(min) = self.min_exp() else { return Vec::new() };
        let stride = stride.max(1);
        let top = ((self.max_exp().unwrap() - min) / stride) as usize;
        let mut out = vec![GaussRat::zero(); top + 1];
        for (e, c) in &self.terms {
            out[((e - min) / stride) as usize] = c.clone();
        }
        out
    }

    pub(crate) fn from_dense(den: u32, dense: &[GaussRat], stride: i64, shift: i64) -> WLaurent {
        WLaurent {
            den,
            terms: dense
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (shift + i as i64 * stride.max(1), c.clone()))
                .collect(),
        }
    }

    /// Formats an exponent numerator of this grid as a reduced rational.
    pub fn format_exp(&self, exp: i64) -> String {
        format_ratio(exp, self.den as i64)
    }
}

impl Ring for WLaurent {
    fn zero_like(&self) -> Self {
        WLaurent::zero(self.den)
    }
    fn one_like(&self) -> Self {
        WLaurent::one(self.den)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.add(rhs)
    }
    fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.mul(rhs)
    }
    fn neg(&self) -> Self {
        WLaurent::neg(self)
    }
    fn unit_inverse(&self) -> Option<Self> {
        if !self.is_monomial() {
            return None;
        }
        let (e, c) = &self.terms[0];
        Some(WLaurent::monomial(self.den, -e, c.inv()?))
    }
    fn sum_all(items: Vec<Self>) -> Result<Option<Self>> {
        let Some(first) = items.first() else {
            return Ok(None);
        };
        let den = first.den;
        if items.iter().any(|p| p.den != den) {
            return Err(Error::MismatchedWGrid(den, items.iter().find(|p| p.den != den).unwrap().den));
        }
        Ok(Some(WLaurent::from_terms(den, items.into_iter().flat_map(|p| p.terms))))
    }
}

impl fmt::Display for WLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let (negative, magnitude) = split_sign(c);
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let w = match *e {
                0 => String::new(),
                e if e == self.den as i64 => "w".to_string(),
                e => {
                    let text = self.format_exp(e);
                    if text.contains('/') || text.starts_with('-') {
                        format!("w^({text})")
                    } else {
                        format!("w^{text}")
                    }
                }
            };
            match (magnitude.is_one(), w.is_empty()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{w}")?,
                (false, true) => write!(f, "{magnitude}")?,
                (false, false) => write!(f, "{magnitude}*{w}")?,
            }
        }
        Ok(())
    }
}

/// Splits off a leading sign for display, returning the magnitude to print.
pub(crate) fn split_sign(c: &GaussRat) -> (bool, GaussRat) {
    use num_traits::Signed;
    let negative = if num_traits::Zero::is_zero(&c.re) {
        c.im.is_negative()
    } else {
        c.re.is_negative() && num_traits::Zero::is_zero(&c.im)
    };
    if negative {
        (true, -c)
    } else {
        (false, c.clone())
    }
}
