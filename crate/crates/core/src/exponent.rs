//! Exact rational exponents on a fixed denominator grid.
//!
//! Every q-exponent in a computation is stored as an integer numerator over a
//! shared denominator `D` (24 by default, enough for `q^{1/24}`, `q^{1/8}` and
//! `q^{1/3}`). The same representation is used for w-exponents with their own
//! denominator `E`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default denominator of the q-exponent grid.
pub const DEFAULT_Q_DEN: u32 = 24;
/// Default denominator of the w-exponent grid.
pub const DEFAULT_W_DEN: u32 = 6;

/// A rational exponent `num / den`.
#[derive(Clone, Copy, Debug, Hash)]
pub struct QExp {
    num: i64,
    den: u32,
}

impl QExp {
    pub fn new(num: i64, den: u32) -> Self {
        assert!(den > 0, "exponent denominator must be positive");
        QExp { num, den }
    }

    pub fn zero(den: u32) -> Self {
        QExp::new(0, den)
    }

    pub fn integer(value: i64, den: u32) -> Result<Self> {
        value
            .checked_mul(den as i64)
            .map(|num| QExp::new(num, den))
            .ok_or(Error::Overflow)
    }

    /// Places an arbitrary rational on the grid, failing if it does not fit.
    pub fn from_rational(value: &BigRational, den: u32) -> Result<Self> {
        Ok(QExp::new(grid_numerator(value, den)?, den))
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn same_grid(&self, other: &QExp) -> Result<()> {
        if self.den == other.den {
            Ok(())
        } else {
            Err(Error::MismatchedQGrid(self.den, other.den))
        }
    }

    pub fn checked_add(&self, other: &QExp) -> Result<QExp> {
        self.same_grid(other)?;
        let num = self.num.checked_add(other.num).ok_or(Error::Overflow)?;
        Ok(QExp::new(num, self.den))
    }

    pub fn checked_sub(&self, other: &QExp) -> Result<QExp> {
        self.same_grid(other)?;
        let num = self.num.checked_sub(other.num).ok_or(Error::Overflow)?;
        Ok(QExp::new(num, self.den))
    }

    pub fn neg(&self) -> QExp {
        QExp::new(-self.num, self.den)
    }

    /// Parses `p`, `p/q` or a mixed form such as `3+1/24`, then grids it.
    pub fn parse(text: &str, den: u32) -> Result<QExp> {
        QExp::from_rational(&parse_rational(text)?, den)
    }
}

impl PartialEq for QExp {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QExp {}

impl PartialOrd for QExp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QExp {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as i128 * other.den as i128;
        let rhs = other.num as i128 * self.den as i128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for QExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_ratio(self.num, self.den as i64))
    }
}

/// Formats `num/den` in lowest terms, dropping a unit denominator.
pub fn format_ratio(num: i64, den: i64) -> String {
    let g = num.gcd(&den).max(1);
    let (n, d) = (num / g, den / g);
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

/// Numerator of `value` on the grid with denominator `den`.
pub fn grid_numerator(value: &BigRational, den: u32) -> Result<i64> {
    let scaled = value * BigRational::from_integer(BigInt::from(den));
    if !scaled.is_integer() {
        return Err(Error::OffGrid {
            value: format_rational(value),
            den,
        });
    }
    scaled.to_integer().to_i64().ok_or(Error::Overflow)
}

pub fn format_rational(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(value: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}

/// Parses exact rational syntax: `7`, `-3/2`, and sums/differences of such
/// terms like `2+1/24` or `1/2-1/3`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    let mut total = BigRational::zero();
    let mut start = 0;
    let bytes = cleaned.as_bytes();
    for i in 1..=bytes.len() {
        let at_split = i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'/');
        if at_split {
            total += parse_simple_rational(&cleaned[start..i])?;
            start = i;
        }
    }
    Ok(total)
}

fn parse_simple_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("invalid rational `{text}`"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let num: BigInt = num.trim_start_matches('+').parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() || den.is_negative() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}
