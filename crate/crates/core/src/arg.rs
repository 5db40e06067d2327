//! Affine arguments `z -> a z + s tau + u` applied to functions of `z`.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponent::{format_rational, parse_rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThetaArg {
    /// Multiplier `a` of `z`.
    pub mul: BigRational,
    /// Coefficient `s` of `tau`.
    pub tau: BigRational,
    /// Real shift `u`.
    pub one: BigRational,
}

impl Default for ThetaArg {
    fn default() -> Self {
        ThetaArg::identity()
    }
}

impl ThetaArg {
    pub fn identity() -> Self {
        ThetaArg {
            mul: BigRational::one(),
            tau: BigRational::zero(),
            one: BigRational::zero(),
        }
    }

    pub fn scaled(a: BigRational) -> Self {
        ThetaArg {
            mul: a,
            ..ThetaArg::identity()
        }
    }

    pub fn new(mul: BigRational, tau: BigRational, one: BigRational) -> Self {
        ThetaArg { mul, tau, one }
    }

    pub fn is_identity(&self) -> bool {
        self.mul.is_one() && self.tau.is_zero() && self.one.is_zero()
    }

    /// `self(inner(z))`.
    pub fn compose(&self, inner: &ThetaArg) -> ThetaArg {
        ThetaArg {
            mul: &self.mul * &inner.mul,
            tau: &self.mul * &inner.tau + &self.tau,
            one: &self.mul * &inner.one + &self.one,
        }
    }

    pub fn to_json(&self) -> ArgJson {
        ArgJson {
            mul: Some(format_rational(&self.mul)),
            tau: Some(format_rational(&self.tau)),
            one: Some(format_rational(&self.one)),
        }
    }
}

/// JSON form; missing fields default to the identity argument.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mul: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one: Option<String>,
}

impl ArgJson {
    pub fn parse(&self) -> Result<ThetaArg> {
        let get = |field: &Option<String>, default: BigRational| match field {
            Some(text) => parse_rational(text),
            None => Ok(default),
        };
        Ok(ThetaArg {
            mul: get(&self.mul, BigRational::one())?,
            tau: get(&self.tau, BigRational::zero())?,
            one: get(&self.one, BigRational::zero())?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{rat, rat_int};

    #[test]
    fn composition_order() {
        let outer = ThetaArg::scaled(rat_int(2));
        let inner = ThetaArg::new(rat_int(1), rat_int(1), rat(1, 3));
        let c = outer.compose(&inner);
        assert_eq!(c, ThetaArg::new(rat_int(2), rat_int(2), rat(2, 3)));
        assert_eq!(ThetaArg::identity().compose(&inner), inner);
    }
}
