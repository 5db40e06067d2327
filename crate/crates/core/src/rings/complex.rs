//! Arbitrary-precision complex helpers on top of MPC.
//!
//! The working precision is always carried by the values themselves; helpers
//! that create new values take it explicitly.

use num_rational::BigRational;
use rug::float::Constant;
use rug::{Complex, Float};

use super::GaussRat;

pub type BigComplex = Complex;

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn float_from_rational(r: &BigRational, prec: u32) -> Float {
    let num = Float::with_val(prec, Float::parse(r.numer().to_string()).expect("integer literal"));
    let den = Float::with_val(prec, Float::parse(r.denom().to_string()).expect("integer literal"));
    num / den
}

pub fn from_rational(r: &BigRational, prec: u32) -> BigComplex {
    Complex::with_val(prec, (float_from_rational(r, prec), 0))
}

pub fn from_gauss(g: &GaussRat, prec: u32) -> BigComplex {
    Complex::with_val(prec, (float_from_rational(&g.re, prec), float_from_rational(&g.im, prec)))
}

pub fn from_f64(re: f64, im: f64, prec: u32) -> BigComplex {
    Complex::with_val(prec, (re, im))
}

/// `e^{2 pi i x}` at the precision of `x`.
pub fn exp_2pi_i(x: &BigComplex) -> BigComplex {
    let prec = x.prec().0;
    let two_pi = pi(prec) * 2u32;
    let scaled = x.clone() * Complex::with_val(prec, (0, two_pi));
    scaled.exp()
}

pub fn is_zero(c: &BigComplex) -> bool {
    c.real().is_zero() && c.imag().is_zero()
}

pub fn abs_f64(c: &BigComplex) -> f64 {
    Float::with_val(c.prec().0, c.abs_ref()).to_f64()
}

/// Decimal rendering `re+im*i` with `digits` significant digits per part.
pub fn format(c: &BigComplex, digits: usize) -> String {
    let re = c.real().to_string_radix(10, Some(digits));
    let im = c.imag().to_string_radix(10, Some(digits));
    if im.starts_with('-') {
        format!("{re}{im}*i")
    } else {
        format!("{re}+{im}*i")
    }
}
