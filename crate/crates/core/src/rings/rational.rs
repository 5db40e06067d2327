//! Reduced rational functions in `w`.
//!
//! Canonical form: the denominator is a polynomial with nonzero constant term
//! equal to one, all powers of `w` live in the numerator, and numerator and
//! denominator are coprime. Two values are equal iff their canonical forms are
//! identical, so derived equality is exact equality of functions.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use rug::Float;

use super::complex::{self, BigComplex};
use super::poly;
use super::{GaussRat, Ring, WLaurent};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct WRational {
    num: WLaurent,
    den: WLaurent,
}

impl WRational {
    pub fn zero(den: u32) -> Self {
        WRational {
            num: WLaurent::zero(den),
            den: WLaurent::one(den),
        }
    }

    pub fn one(den: u32) -> Self {
        WRational::from_laurent(WLaurent::one(den))
    }

    pub fn from_laurent(p: WLaurent) -> Self {
        let den = WLaurent::one(p.den());
        WRational { num: p, den }
    }

    pub fn constant(den: u32, c: GaussRat) -> Self {
        WRational::from_laurent(WLaurent::constant(den, c))
    }

    /// Reduces `n / d` to canonical form.
    pub fn reduce(n: WLaurent, d: WLaurent) -> Result<Self> {
        if n.den() != d.den() {
            return Err(Error::MismatchedWGrid(n.den(), d.den()));
        }
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let grid = n.den();
        if n.is_zero() {
            return Ok(WRational::zero(grid));
        }
        let shift = d.min_exp().unwrap();
        let one = GaussRat::one();
        let mut n = n.mul_monomial(-shift, &one);
        let mut d = d.mul_monomial(-shift, &one);
        if !d.is_monomial() {
            let stride = n.stride().gcd(&d.stride());
            let nd = n.to_dense(stride);
            let dd = d.to_dense(stride);
            let g = poly::gcd(&nd, &dd);
            if !poly::is_constant(&g) {
                let nq = poly::div_exact(&nd, &g).expect("gcd divides numerator");
                let dq = poly::div_exact(&dd, &g).expect("gcd divides denominator");
                n = WLaurent::from_dense(grid, &nq, stride, n.min_exp().unwrap());
                d = WLaurent::from_dense(grid, &dq, stride, 0);
            }
        }
        let lead = d.lowest_coeff().expect("nonzero denominator").clone();
        if !lead.is_one() {
            let inv = lead.inv().expect("nonzero");
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        Ok(WRational { num: n, den: d })
    }

    pub fn numer(&self) -> &WLaurent {
        &self.num
    }

    pub fn denom(&self) -> &WLaurent {
        &self.den
    }

    pub fn grid(&self) -> u32 {
        self.num.den()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_laurent(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, other: &WRational) -> Result<WRational> {
        if self.grid() != other.grid() {
            return Err(Error::MismatchedWGrid(self.grid(), other.grid()));
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.den == other.den {
            let n = self.num.add(&other.num)?;
            if self.den.is_one() {
                return Ok(WRational::from_laurent(n));
            }
            return WRational::reduce(n, self.den.clone());
        }
        if other.den.is_one() {
            let n = self.num.add(&other.num.mul(&self.den)?)?;
            return WRational::reduce(n, self.den.clone());
        }
        if self.den.is_one() {
            let n = other.num.add(&self.num.mul(&other.den)?)?;
            return WRational::reduce(n, other.den.clone());
        }
        let (a_part, b_part) = cancel(&self.den, &other.den);
        // a_part = den_a / g, b_part = den_b / g
        let n = self.num.mul(&b_part)?.add(&other.num.mul(&a_part)?)?;
        let d = self.den.mul(&b_part)?;
        WRational::reduce(n, d)
    }

    pub fn neg(&self) -> WRational {
        WRational {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &WRational) -> Result<WRational> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &WRational) -> Result<WRational> {
        if self.grid() != other.grid() {
            return Err(Error::MismatchedWGrid(self.grid(), other.grid()));
        }
        if self.is_zero() || other.is_zero() {
            return Ok(WRational::zero(self.grid()));
        }
        if self.den.is_one() && other.den.is_one() {
            return Ok(WRational::from_laurent(self.num.mul(&other.num)?));
        }
        let (n1, d2) = cancel(&self.num, &other.den);
        let (n2, d1) = cancel(&other.num, &self.den);
        let n = n1.mul(&n2)?;
        let d = d1.mul(&d2)?;
        Ok(normalize_coprime(n, d))
    }

    pub fn inv(&self) -> Option<WRational> {
        if self.is_zero() {
            return None;
        }
        let shift = self.num.min_exp().unwrap();
        let one = GaussRat::one();
        let n = self.den.mul_monomial(-shift, &one);
        let d = self.num.mul_monomial(-shift, &one);
        Some(normalize_coprime(n, d))
    }

    pub fn div(&self, other: &WRational) -> Result<WRational> {
        let inv = other.inv().ok_or(Error::ZeroDenominator)?;
        self.mul(&inv)
    }

    pub fn scale(&self, c: &GaussRat) -> WRational {
        if c.is_zero() {
            return WRational::zero(self.grid());
        }
        WRational {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Multiplies by `c * w^{exp/E}`.
    pub fn mul_monomial(&self, exp: i64, c: &GaussRat) -> WRational {
        if c.is_zero() {
            return WRational::zero(self.grid());
        }
        WRational {
            num: self.num.mul_monomial(exp, c),
            den: self.den.clone(),
        }
    }

    pub fn w_scale(&self, a: &BigRational) -> Result<WRational> {
        WRational::reduce(self.num.w_scale(a)?, self.den.w_scale(a)?)
    }

    pub fn twist(&self, s: &BigRational) -> Result<WRational> {
        if self.den.is_one() {
            return Ok(WRational::from_laurent(self.num.twist(s)?));
        }
        WRational::reduce(self.num.twist(s)?, self.den.twist(s)?)
    }

    /// `w d/dw` of the rational function.
    pub fn euler_derivative(&self) -> Result<WRational> {
        if self.den.is_one() {
            return Ok(WRational::from_laurent(self.num.euler_derivative()));
        }
        let top = self
            .num
            .euler_derivative()
            .mul(&self.den)?
            .sub(&self.num.mul(&self.den.euler_derivative())?)?;
        WRational::reduce(top, self.den.mul(&self.den)?)
    }

    /// Value at `w = 1`; a vanishing denominator is a pole.
    pub fn at_one(&self) -> Result<GaussRat> {
        let d = self.den.at_one();
        let inv = d
            .inv()
            .ok_or_else(|| Error::Pole("coefficient has a pole at w = 1".into()))?;
        Ok(&self.num.at_one() * &inv)
    }

    pub fn eval_z(&self, z: &BigComplex) -> Result<BigComplex> {
        let n = self.num.eval_z(z);
        if self.den.is_one() {
            return Ok(n);
        }
        let d = self.den.eval_z(z);
        self.finish_eval(n, d, z.prec().0)
    }

    pub fn eval_w(&self, w: &BigComplex) -> Result<BigComplex> {
        let n = self.num.eval_w(w)?;
        if self.den.is_one() {
            return Ok(n);
        }
        let d = self.den.eval_w(w)?;
        self.finish_eval(n, d, w.prec().0)
    }

    fn finish_eval(&self, n: BigComplex, d: BigComplex, prec: u32) -> Result<BigComplex> {
        let scale: f64 = self
            .den
            .terms()
            .iter()
            .map(|(_, c)| complex::abs_f64(&complex::from_gauss(c, 64)))
            .sum();
        let threshold = scale * Float::with_val(64, Float::i_exp(1, -(prec as i32) / 2)).to_f64();
        if complex::abs_f64(&d) <= threshold {
            return Err(Error::Pole(format!("denominator {} vanishes", self.den)));
        }
        Ok(n / d)
    }
}

/// Divides both arguments by their gcd.
fn cancel(a: &WLaurent, b: &WLaurent) -> (WLaurent, WLaurent) {
    if a.is_monomial() || b.is_monomial() {
        return (a.clone(), b.clone());
    }
    let stride = a.stride().gcd(&b.stride());
    let ad = a.to_dense(stride);
    let bd = b.to_dense(stride);
    let g = poly::gcd(&ad, &bd);
    if poly::is_constant(&g) {
        return (a.clone(), b.clone());
    }
    let aq = poly::div_exact(&ad, &g).expect("gcd divides");
    let bq = poly::div_exact(&bd, &g).expect("gcd divides");
    (
        WLaurent::from_dense(a.den(), &aq, stride, a.min_exp().unwrap()),
        WLaurent::from_dense(b.den(), &bq, stride, b.min_exp().unwrap()),
    )
}

/// Canonical form of a pair already known to be coprime.
fn normalize_coprime(n: WLaurent, d: WLaurent) -> WRational {
    let one = GaussRat::one();
    let shift = d.min_exp().expect("nonzero denominator");
    let mut n = n.mul_monomial(-shift, &one);
    let mut d = d.mul_monomial(-shift, &one);
    let lead = d.lowest_coeff().unwrap().clone();
    if !lead.is_one() {
        let inv = lead.inv().unwrap();
        n = n.scale(&inv);
        d = d.scale(&inv);
    }
    WRational { num: n, den: d }
}

impl Ring for WRational {
    fn zero_like(&self) -> Self {
        WRational::zero(self.grid())
    }
    fn one_like(&self) -> Self {
        WRational::one(self.grid())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.add(rhs)
    }
    fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.mul(rhs)
    }
    fn neg(&self) -> Self {
        WRational::neg(self)
    }
    fn unit_inverse(&self) -> Option<Self> {
        self.inv()
    }

    /// Groups terms by denominator so that each group costs one reduction.
    fn sum_all(items: Vec<Self>) -> Result<Option<Self>> {
        if items.is_empty() {
            return Ok(None);
        }
        let grid = items[0].grid();
        let mut order: Vec<WLaurent> = Vec::new();
        let mut groups: HashMap<WLaurent, Vec<WLaurent>> = HashMap::new();
        for item in items {
            if item.grid() != grid {
                return Err(Error::MismatchedWGrid(grid, item.grid()));
            }
            let entry = groups.entry(item.den.clone()).or_insert_with(|| {
                order.push(item.den.clone());
                Vec::new()
            });
            entry.push(item.num);
        }
        let mut acc = WRational::zero(grid);
        for den in order {
            let nums = groups.remove(&den).unwrap();
            let n = WLaurent::sum_all(nums)?.unwrap();
            let part = if den.is_one() {
                WRational::from_laurent(n)
            } else {
                WRational::reduce(n, den)?
            };
            acc = acc.add(&part)?;
        }
        Ok(Some(acc))
    }
}

impl fmt::Display for WRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let num = if self.num.len() > 1 {
            format!("({})", self.num)
        } else {
            self.num.to_string()
        };
        write!(f, "{num}/({})", self.den)
    }
}
