//! Gaussian rationals `Q(i)`, the base field of every symbolic coefficient.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exponent::{format_rational, parse_rational};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_int(value: i64) -> Self {
        GaussRat::real(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn zero() -> Self {
        GaussRat::real(BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::real(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// `i^k` for any integer `k`.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => GaussRat::one(),
            1 => GaussRat::i(),
            2 => GaussRat::from_int(-1),
            _ => -GaussRat::i(),
        }
    }

    /// `e^{2 pi i x}` for rational `x`, when it lies in `{1, i, -1, -i}`.
    pub fn unit_phase(x: &BigRational) -> Result<Self> {
        let quarters = x * BigRational::from_integer(BigInt::from(4));
        if !quarters.is_integer() {
            return Err(Error::Unsupported(format!(
                "phase e^(2 pi i {}) is not a Gaussian rational",
                format_rational(x)
            )));
        }
        let k: i64 = (quarters.to_integer() % BigInt::from(4))
            .try_into()
            .map_err(|_| Error::Overflow)?;
        Ok(GaussRat::i_pow(k))
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(GaussRat::real(self.re.recip()));
        }
        let n = self.norm();
        Some(GaussRat::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        GaussRat::new(&self.re * k, &self.im * k)
    }

    /// Parses `3/2`, `i`, `-2/3*i`, `1+i`, `1/2-3/4i`.
    pub fn parse(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let s = s.trim_start_matches('(').trim_end_matches(')').to_string();
        if s.is_empty() {
            return Err(Error::Parse("empty coefficient".into()));
        }
        let mut total = GaussRat::zero();
        let bytes = s.as_bytes();
        let mut start = 0;
        for idx in 1..=bytes.len() {
            if idx == bytes.len() || ((bytes[idx] == b'+' || bytes[idx] == b'-') && bytes[idx - 1] != b'/')
            {
                total = &total + &parse_gauss_term(&s[start..idx])?;
                start = idx;
            }
        }
        Ok(total)
    }
}

fn parse_gauss_term(term: &str) -> Result<GaussRat> {
    if let Some(body) = term.strip_suffix('i') {
        let body = body.strip_suffix('*').unwrap_or(body);
        let im = match body {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other)?,
        };
        Ok(GaussRat::new(BigRational::zero(), im))
    } else {
        Ok(GaussRat::real(parse_rational(term)?))
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussRat::real(&self.re * &rhs.re);
        }
        if self.im.is_zero() {
            return rhs.scale(&self.re);
        }
        if rhs.im.is_zero() {
            return self.scale(&rhs.re);
        }
        GaussRat::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re, -self.im)
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-&self.re, -&self.im)
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = format_rational(&self.re);
        let im_abs = format_rational(&self.im.abs());
        let im_part = if self.im.abs().is_one() {
            "i".to_string()
        } else {
            format!("{im_abs}*i")
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{re}"),
            (true, false) => {
                if self.im.is_negative() {
                    write!(f, "-{im_part}")
                } else {
                    write!(f, "{im_part}")
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "({re}{sign}{im_part})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::rat;

    #[test]
    fn field_operations() {
        let a = GaussRat::new(rat(1, 2), rat(3, 1));
        let inv = a.inv().unwrap();
        assert!((&a * &inv).is_one());
        assert_eq!(&GaussRat::i() * &GaussRat::i(), GaussRat::from_int(-1));
        assert!(GaussRat::zero().inv().is_none());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["3/2", "i", "-i", "-2/3*i", "(1+i)", "(1/2-3/4*i)", "0"] {
            let value = GaussRat::parse(text).unwrap();
            assert_eq!(value.to_string(), text);
        }
        assert_eq!(GaussRat::parse("2i").unwrap(), GaussRat::new(rat(0, 1), rat(2, 1)));
    }

    #[test]
    fn phases() {
        assert_eq!(GaussRat::unit_phase(&rat(1, 4)).unwrap(), GaussRat::i());
        assert_eq!(GaussRat::unit_phase(&rat(-1, 2)).unwrap(), GaussRat::from_int(-1));
        assert!(GaussRat::unit_phase(&rat(1, 3)).is_err());
    }
}
