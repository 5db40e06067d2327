//! Identities between q-series, the shipped catalogue and the verifier.

mod catalogue;
mod eval;
mod expr;
mod mutate;
mod verify;

pub use catalogue::{builtin_catalogue, Catalogue, CatalogueFile, IdentityFile};
pub use eval::{exact_order, Evaluator, LeafCache, Series};
pub use expr::{parse_specs, Expr, ExprJson, LinearExp, Scope};
pub use mutate::{detect, mutants, Detection, Mutant, MutantClass};
pub use verify::{shift_check, verify, verify_with, Status, VerifyReport};

use num_rational::BigRational;

use crate::arg::ThetaArg;

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    /// `lhs = rhs` as q-series to a requested order.
    Series,
    /// `lhs(z + shift) = rhs * lhs(z)`; `rhs` is the multiplier.
    Shift(ThetaArg),
    /// Laurent polynomial identity in `w, q` for every parameter vector in
    /// the box `[lo, hi]^rank`.
    Family { rank: usize, lo: i64, hi: i64 },
}

#[derive(Clone, Debug)]
pub struct Identity {
    pub name: String,
    pub location: String,
    pub description: String,
    pub tex: String,
    pub kind: Kind,
    pub default_order: BigRational,
    pub lhs: Expr,
    pub rhs: Expr,
    /// Deliberately false entries kept for testing the verifier.
    pub mutant: bool,
}

impl Identity {
    /// The expression that must vanish.
    pub fn residual(&self) -> crate::Result<Expr> {
        Ok(match &self.kind {
            Kind::Series | Kind::Family { .. } => self.lhs.clone().minus(self.rhs.clone()),
            Kind::Shift(arg) => self
                .lhs
                .substitute(arg)?
                .minus(Expr::Prod(vec![self.rhs.clone(), self.lhs.clone()])),
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Series => "series",
            Kind::Shift(_) => "shift",
            Kind::Family { .. } => "family",
        }
    }
}
