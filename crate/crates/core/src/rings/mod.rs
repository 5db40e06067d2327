//! Coefficient rings: Gaussian rationals, Laurent polynomials in `w` with
//! rational exponents, reduced rational functions in `w`, and the
//! arbitrary-precision complex numbers used for numeric evaluation.

pub mod complex;
pub mod gaussian;
pub mod laurent;
mod poly;
pub mod rational;

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Result;

pub use complex::BigComplex;
pub use gaussian::GaussRat;
pub use laurent::WLaurent;
pub use rational::WRational;

/// A commutative ring whose elements may carry grid context (the w-exponent
/// denominator). Binary operations are fallible so that mixing grids is an
/// error rather than a silent rescale.
pub trait Ring: Clone + PartialEq + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn try_add(&self, rhs: &Self) -> Result<Self>;
    fn try_mul(&self, rhs: &Self) -> Result<Self>;
    fn neg(&self) -> Self;

    fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.try_add(&rhs.neg())
    }

    /// Inverse of a unit, `None` for non-units.
    fn unit_inverse(&self) -> Option<Self>;

    /// Sum of a non-empty batch; rings with expensive normalization override this.
    fn sum_all(items: Vec<Self>) -> Result<Option<Self>> {
        let mut iter = items.into_iter();
        let Some(mut acc) = iter.next() else {
            return Ok(None);
        };
        for item in iter {
            acc = acc.try_add(&item)?;
        }
        Ok(Some(acc))
    }
}

impl Ring for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn try_add(&self, rhs: &Self) -> Result<Self> {
        Ok(self + rhs)
    }
    fn try_mul(&self, rhs: &Self) -> Result<Self> {
        Ok(self * rhs)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn unit_inverse(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
}

impl Ring for GaussRat {
    fn zero_like(&self) -> Self {
        GaussRat::zero()
    }
    fn one_like(&self) -> Self {
        GaussRat::one()
    }
    fn is_zero(&self) -> bool {
        GaussRat::is_zero(self)
    }
    fn try_add(&self, rhs: &Self) -> Result<Self> {
        Ok(self + rhs)
    }
    fn try_mul(&self, rhs: &Self) -> Result<Self> {
        Ok(self * rhs)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn unit_inverse(&self) -> Option<Self> {
        self.inv()
    }
}
