//! Single-edit mutants of an identity: one sign flipped or one exponent
//! moved by 1.

use num_rational::BigRational;
use num_traits::One;

use super::eval::LeafCache;
use super::expr::Expr;
use super::verify::{verify_with, Status};
use super::Identity;
use crate::appell::AppellSpec;
use crate::exponent::{DEFAULT_Q_DEN, DEFAULT_W_DEN};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutantClass {
    /// One sign flipped.
    Sign,
    /// One exponent (or power) moved by 1.
    Exponent,
    /// One coefficient of a parameter `k_i` inside an exponent moved by 1.
    Coefficient,
}

#[derive(Clone, Debug)]
pub struct Mutant {
    pub description: String,
    pub class: MutantClass,
    pub identity: Identity,
}

fn bump(x: &BigRational) -> BigRational {
    x + BigRational::one()
}

type Edit = (String, MutantClass, Expr);

fn spec_mutations(spec: &AppellSpec) -> Vec<(String, MutantClass, AppellSpec)> {
    use MutantClass::{Coefficient, Exponent};
    let mut out = Vec::new();
    let mut push = |label: String, class: MutantClass, f: &dyn Fn(&mut AppellSpec)| {
        let mut s = spec.clone();
        f(&mut s);
        out.push((label, class, s));
    };
    push("const_q+1".into(), Exponent, &|s| s.const_q = bump(&s.const_q));
    push("const_w+1".into(), Exponent, &|s| s.const_w = bump(&s.const_w));
    for i in 0..spec.lin_q.len() {
        push(format!("lin_q[{i}]+1"), Coefficient, &|s| s.lin_q[i] = bump(&s.lin_q[i]));
        push(format!("lin_w[{i}]+1"), Coefficient, &|s| s.lin_w[i] = bump(&s.lin_w[i]));
    }
    for (d, den) in spec.denoms.iter().enumerate() {
        for i in 0..den.m.len() {
            push(format!("denom[{d}].m[{i}]+1"), Coefficient, &|s| {
                s.denoms[d].m[i] = bump(&s.denoms[d].m[i])
            });
        }
        push(format!("denom[{d}].w_pow+1"), Exponent, &|s| s.denoms[d].w_pow = bump(&s.denoms[d].w_pow));
        push(format!("denom[{d}].q_off+1"), Exponent, &|s| s.denoms[d].q_off = bump(&s.denoms[d].q_off));
    }
    out
}

fn expr_mutations(e: &Expr, path: &str) -> Vec<Edit> {
    use MutantClass::{Exponent, Sign};
    let mut out: Vec<Edit> = Vec::new();
    match e {
        Expr::Eta | Expr::Theta { .. } | Expr::B { .. } => {}
        Expr::Appell { name, spec } => {
            for (label, class, s) in spec_mutations(spec) {
                out.push((
                    format!("{path}: {name}.{label}"),
                    class,
                    Expr::Appell {
                        name: name.clone(),
                        spec: s,
                    },
                ));
            }
        }
        Expr::Const(c) => {
            if !c.is_zero() {
                out.push((format!("{path}: negate constant"), Sign, Expr::Const(-c)));
            }
        }
        Expr::Mono { coeff, w, q } => {
            out.push((format!("{path}: negate monomial"), Sign, Expr::mono(-coeff, w.clone(), q.clone())));
            out.push((format!("{path}: w exponent+1"), Exponent, Expr::mono(coeff.clone(), bump(w), q.clone())));
            out.push((format!("{path}: q exponent+1"), Exponent, Expr::mono(coeff.clone(), w.clone(), bump(q))));
        }
        Expr::KMono { coeff, w, q } => {
            out.push((
                format!("{path}: negate monomial"),
                Sign,
                Expr::KMono {
                    coeff: -coeff,
                    w: w.clone(),
                    q: q.clone(),
                },
            ));
            let mut w1 = w.clone();
            w1.constant = bump(&w1.constant);
            out.push((
                format!("{path}: w exponent+1"),
                Exponent,
                Expr::KMono {
                    coeff: coeff.clone(),
                    w: w1,
                    q: q.clone(),
                },
            ));
            let mut q1 = q.clone();
            q1.constant = bump(&q1.constant);
            out.push((
                format!("{path}: q exponent+1"),
                Exponent,
                Expr::KMono {
                    coeff: coeff.clone(),
                    w: w.clone(),
                    q: q1,
                },
            ));
        }
        Expr::Sum(v) | Expr::Prod(v) => {
            let is_sum = matches!(e, Expr::Sum(_));
            let rebuild = |items: Vec<Expr>| if is_sum { Expr::Sum(items) } else { Expr::Prod(items) };
            for (i, child) in v.iter().enumerate() {
                let child_path = format!("{path}.{i}");
                if is_sum && !matches!(child, Expr::Neg(_)) {
                    let mut items = v.clone();
                    items[i] = Expr::Neg(Box::new(child.clone()));
                    out.push((format!("{child_path}: flip sign"), Sign, rebuild(items)));
                }
                for (label, class, m) in expr_mutations(child, &child_path) {
                    let mut items = v.clone();
                    items[i] = m;
                    out.push((label, class, rebuild(items)));
                }
            }
        }
        Expr::Quot(a, b) => {
            for (label, class, m) in expr_mutations(a, &format!("{path}.num")) {
                out.push((label, class, Expr::Quot(Box::new(m), b.clone())));
            }
            for (label, class, m) in expr_mutations(b, &format!("{path}.den")) {
                out.push((label, class, Expr::Quot(a.clone(), Box::new(m))));
            }
        }
        Expr::Neg(a) => {
            out.push((format!("{path}: flip sign"), Sign, (**a).clone()));
            for (label, class, m) in expr_mutations(a, path) {
                out.push((label, class, Expr::Neg(Box::new(m))));
            }
        }
        Expr::Pow(a, n) => {
            out.push((format!("{path}: power {n}->{}", n + 1), Exponent, Expr::Pow(a.clone(), n + 1)));
            for (label, class, m) in expr_mutations(a, path) {
                out.push((label, class, Expr::Pow(Box::new(m), *n)));
            }
        }
        Expr::WDeriv(a) => {
            for (label, class, m) in expr_mutations(a, path) {
                out.push((label, class, Expr::WDeriv(Box::new(m))));
            }
        }
        Expr::AtW1(a) => {
            for (label, class, m) in expr_mutations(a, path) {
                out.push((label, class, Expr::AtW1(Box::new(m))));
            }
        }
    }
    out
}

/// Every single-edit mutant of both sides.
pub fn mutants(identity: &Identity) -> Vec<Mutant> {
    let mut out = Vec::new();
    for (side, expr) in [("lhs", &identity.lhs), ("rhs", &identity.rhs)] {
        for (label, class, m) in expr_mutations(expr, side) {
            let mut id = identity.clone();
            id.name = format!("{}~{}", identity.name, out.len());
            id.mutant = true;
            if side == "lhs" {
                id.lhs = m;
            } else {
                id.rhs = m;
            }
            out.push(Mutant {
                description: label,
                class,
                identity: id,
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum Detection {
    /// Residual nonzero at `exponent` when checked to `O(q^order)`.
    Caught { order: i64, exponent: String },
    /// Residual vanished at every tried order.
    Survived,
    /// The mutant could not be evaluated (e.g. a denominator became `1 - 1`).
    Invalid(String),
}

/// Verifies a mutant at increasing orders, stopping at the first failure.
pub fn detect(mutant: &Mutant, orders: &[i64], cache: &LeafCache) -> Detection {
    for &o in orders {
        let report = verify_with(
            &mutant.identity,
            Some(&BigRational::from_integer(o.into())),
            cache,
            DEFAULT_Q_DEN,
            DEFAULT_W_DEN,
        );
        match report.status {
            Status::Pass => continue,
            Status::Fail => {
                return Detection::Caught {
                    order: o,
                    exponent: report.first_exponent.unwrap_or_default(),
                }
            }
            Status::Error => return Detection::Invalid(report.message.unwrap_or_default()),
        }
    }
    Detection::Survived
}
