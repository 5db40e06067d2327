//! Expression trees over named q-series and their JSON form.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::appell::{AppellSpec, SpecFile};
use crate::arg::{ArgJson, ThetaArg};
use crate::error::{Error, Result};
use crate::exponent::{format_rational, parse_rational, rat_int};
use crate::rings::GaussRat;
use crate::specfun::ThetaForm;

/// Exponent `lin . k + c` of a family monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearExp {
    pub lin: Vec<BigRational>,
    pub constant: BigRational,
}

impl LinearExp {
    pub fn constant(c: BigRational) -> Self {
        LinearExp {
            lin: Vec::new(),
            constant: c,
        }
    }

    pub fn at(&self, k: &[i64]) -> Result<BigRational> {
        if self.lin.len() > k.len() {
            return Err(Error::Dimension(format!(
                "exponent uses k{} but only {} parameters are bound",
                self.lin.len(),
                k.len()
            )));
        }
        Ok(self
            .lin
            .iter()
            .zip(k)
            .fold(self.constant.clone(), |acc, (a, &ki)| acc + a * BigRational::from_integer(ki.into())))
    }

    /// Parses `3k1+6k2-3`, `k2-k1`, `-1/3`, `2*k1`.
    pub fn parse(text: &str) -> Result<Self> {
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(Error::Parse("empty exponent".into()));
        }
        let mut lin: Vec<BigRational> = Vec::new();
        let mut constant = BigRational::zero();
        let bytes = cleaned.as_bytes();
        let mut start = 0;
        for i in 1..=bytes.len() {
            let split = i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'/');
            if !split {
                continue;
            }
            let term = &cleaned[start..i];
            start = i;
            match term.find('k') {
                None => constant += parse_rational(term)?,
                Some(pos) => {
                    let idx: usize = term[pos + 1..]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad parameter in `{term}`")))?;
                    if idx == 0 {
                        return Err(Error::Parse("parameters are numbered from k1".into()));
                    }
                    let head = term[..pos].trim_end_matches('*');
                    let coeff = match head {
                        "" | "+" => BigRational::one(),
                        "-" => -BigRational::one(),
                        h => parse_rational(h)?,
                    };
                    if lin.len() < idx {
                        lin.resize(idx, BigRational::zero());
                    }
                    lin[idx - 1] += coeff;
                }
            }
        }
        Ok(LinearExp { lin, constant })
    }

    fn format(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.lin.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let text = format_rational(a);
            let body = match text.as_str() {
                "1" => String::new(),
                "-1" => "-".into(),
                t => t.to_string(),
            };
            if !out.is_empty() && !body.starts_with('-') {
                out.push('+');
            }
            out.push_str(&format!("{body}k{}", i + 1));
        }
        if !self.constant.is_zero() || out.is_empty() {
            let c = format_rational(&self.constant);
            if !out.is_empty() && !c.starts_with('-') {
                out.push('+');
            }
            out.push_str(&c);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Eta,
    Theta { arg: ThetaArg, form: ThetaForm },
    B { r: u32, k: i64, arg: ThetaArg },
    Appell { name: String, spec: AppellSpec },
    Const(GaussRat),
    /// `coeff * w^w * q^q` with rational exponents.
    Mono { coeff: GaussRat, w: BigRational, q: BigRational },
    /// Monomial whose exponents depend linearly on family parameters.
    KMono { coeff: GaussRat, w: LinearExp, q: LinearExp },
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Quot(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64),
    /// `w d/dw`.
    WDeriv(Box<Expr>),
    /// Value at `w = 1`.
    AtW1(Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(GaussRat::zero())
    }

    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn mono(coeff: GaussRat, w: BigRational, q: BigRational) -> Expr {
        Expr::Mono { coeff, w, q }
    }

    /// `self - other`.
    pub fn minus(self, other: Expr) -> Expr {
        if other.is_literal_zero() {
            self
        } else {
            Expr::Sum(vec![self, Expr::Neg(Box::new(other))])
        }
    }

    /// `f(a z + s tau + u)`, pushed down to the leaves.
    pub fn substitute(&self, arg: &ThetaArg) -> Result<Expr> {
        if arg.is_identity() {
            return Ok(self.clone());
        }
        let sub = |e: &Expr| e.substitute(arg);
        Ok(match self {
            Expr::Eta | Expr::Const(_) | Expr::AtW1(_) => self.clone(),
            Expr::Theta { arg: inner, form } => Expr::Theta {
                arg: inner.compose(arg),
                form: *form,
            },
            Expr::B { r, k, arg: inner } => Expr::B {
                r: *r,
                k: *k,
                arg: inner.compose(arg),
            },
            Expr::Appell { name, spec } => Expr::Appell {
                name: name.clone(),
                spec: spec.substitute(arg)?,
            },
            Expr::Mono { coeff, w, q } => {
                let phase = GaussRat::unit_phase(&(&arg.one * w))?;
                Expr::Mono {
                    coeff: coeff * &phase,
                    w: &arg.mul * w,
                    q: q + &arg.tau * w,
                }
            }
            Expr::KMono { coeff, w, q } => {
                if !w.lin.iter().all(Zero::is_zero) {
                    return Err(Error::Unsupported("substitution into a family monomial".into()));
                }
                let phase = GaussRat::unit_phase(&(&arg.one * &w.constant))?;
                let mut q = q.clone();
                q.constant += &arg.tau * &w.constant;
                Expr::KMono {
                    coeff: coeff * &phase,
                    w: LinearExp::constant(&arg.mul * &w.constant),
                    q,
                }
            }
            Expr::Sum(v) => Expr::Sum(v.iter().map(sub).collect::<Result<_>>()?),
            Expr::Prod(v) => Expr::Prod(v.iter().map(sub).collect::<Result<_>>()?),
            Expr::Quot(a, b) => Expr::Quot(Box::new(sub(a)?), Box::new(sub(b)?)),
            Expr::Neg(a) => Expr::Neg(Box::new(sub(a)?)),
            Expr::Pow(a, n) => Expr::Pow(Box::new(sub(a)?), *n),
            Expr::WDeriv(a) => {
                // d/dz f(a z + c) = a f'(a z + c)
                let inner = Expr::WDeriv(Box::new(sub(a)?));
                if arg.mul.is_one() {
                    inner
                } else {
                    Expr::Prod(vec![Expr::Const(GaussRat::real(arg.mul.clone())), inner])
                }
            }
        })
    }

    /// Number of nodes, for diagnostics.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Sum(v) | Expr::Prod(v) => v.iter().map(Expr::size).sum(),
            Expr::Quot(a, b) => a.size() + b.size(),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::WDeriv(a) | Expr::AtW1(a) => a.size(),
            _ => 0,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arg_text = |a: &ThetaArg| {
            let mut parts = Vec::new();
            if a.mul.is_one() {
                parts.push("z".to_string());
            } else if !a.mul.is_zero() {
                parts.push(format!("{}z", format_rational(&a.mul)));
            }
            if !a.tau.is_zero() {
                parts.push(format!("{}tau", format_rational(&a.tau)));
            }
            if !a.one.is_zero() {
                parts.push(format_rational(&a.one));
            }
            parts.join("+")
        };
        match self {
            Expr::Eta => write!(f, "eta"),
            Expr::Theta { arg, .. } => write!(f, "theta({})", arg_text(arg)),
            Expr::B { r, k, arg } => write!(f, "b{r}{k}({})", arg_text(arg)),
            Expr::Appell { name, .. } => write!(f, "{name}"),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Mono { coeff, w, q } => write!(f, "{coeff}*w^({})*q^({})", format_rational(w), format_rational(q)),
            Expr::KMono { coeff, w, q } => write!(f, "{coeff}*w^({})*q^({})", w.format(), q.format()),
            Expr::Sum(v) => {
                write!(f, "(")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            Expr::Prod(v) => {
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            Expr::Quot(a, b) => write!(f, "({a})/({b})"),
            Expr::Neg(a) => write!(f, "-{a}"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::WDeriv(a) => write!(f, "wd({a})"),
            Expr::AtW1(a) => write!(f, "({a})|w=1"),
        }
    }
}

/// JSON layout of an expression node.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ExprJson {
    Eta,
    Theta {
        #[serde(default)]
        arg: ArgJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        form: Option<String>,
    },
    B {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<u32>,
        k: i64,
        #[serde(default)]
        arg: ArgJson,
    },
    Appell {
        spec: String,
        #[serde(default)]
        arg: ArgJson,
    },
    Const(String),
    Mono {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeff: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<String>,
    },
    Kmono {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeff: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<String>,
    },
    Sum(Vec<ExprJson>),
    Prod(Vec<ExprJson>),
    Quot(Box<ExprJson>, Box<ExprJson>),
    Neg(Box<ExprJson>),
    Pow(Box<ExprJson>, i64),
    Wderiv(Box<ExprJson>),
    AtW1(Box<ExprJson>),
    Subst {
        expr: Box<ExprJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mul: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        one: Option<String>,
    },
    /// Reference to a named definition.
    Ref(String),
}

/// Named specs and named sub-expressions available while resolving.
#[derive(Default)]
pub struct Scope<'a> {
    pub specs: BTreeMap<String, AppellSpec>,
    pub defs: BTreeMap<String, &'a ExprJson>,
}

fn opt_rational(text: &Option<String>, default: BigRational) -> Result<BigRational> {
    match text {
        Some(t) => parse_rational(t),
        None => Ok(default),
    }
}

fn opt_gauss(text: &Option<String>) -> Result<GaussRat> {
    match text {
        Some(t) => GaussRat::parse(t),
        None => Ok(GaussRat::one()),
    }
}

impl ExprJson {
    pub fn resolve(&self, scope: &Scope<'_>) -> Result<Expr> {
        self.resolve_depth(scope, 0)
    }

    fn resolve_depth(&self, scope: &Scope<'_>, depth: usize) -> Result<Expr> {
        if depth > 64 {
            return Err(Error::Parse("definitions nest too deeply (cycle?)".into()));
        }
        let go = |e: &ExprJson| e.resolve_depth(scope, depth + 1);
        Ok(match self {
            ExprJson::Eta => Expr::Eta,
            ExprJson::Theta { arg, form } => Expr::Theta {
                arg: arg.parse()?,
                form: match form.as_deref() {
                    None | Some("sum") => ThetaForm::Sum,
                    Some("product") => ThetaForm::Product,
                    Some(other) => return Err(Error::Parse(format!("unknown theta form `{other}`"))),
                },
            },
            ExprJson::B { r, k, arg } => Expr::B {
                r: r.unwrap_or(3),
                k: *k,
                arg: arg.parse()?,
            },
            ExprJson::Appell { spec, arg } => {
                let base = scope
                    .specs
                    .get(spec)
                    .ok_or_else(|| Error::Parse(format!("unknown spec `{spec}`")))?;
                Expr::Appell {
                    name: spec.clone(),
                    spec: base.substitute(&arg.parse()?)?,
                }
            }
            ExprJson::Const(c) => Expr::Const(GaussRat::parse(c)?),
            ExprJson::Mono { coeff, w, q } => Expr::Mono {
                coeff: opt_gauss(coeff)?,
                w: opt_rational(w, BigRational::zero())?,
                q: opt_rational(q, BigRational::zero())?,
            },
            ExprJson::Kmono { coeff, w, q } => Expr::KMono {
                coeff: opt_gauss(coeff)?,
                w: match w {
                    Some(t) => LinearExp::parse(t)?,
                    None => LinearExp::constant(BigRational::zero()),
                },
                q: match q {
                    Some(t) => LinearExp::parse(t)?,
                    None => LinearExp::constant(BigRational::zero()),
                },
            },
            ExprJson::Sum(v) => Expr::Sum(v.iter().map(go).collect::<Result<_>>()?),
            ExprJson::Prod(v) => Expr::Prod(v.iter().map(go).collect::<Result<_>>()?),
            ExprJson::Quot(a, b) => Expr::Quot(Box::new(go(a)?), Box::new(go(b)?)),
            ExprJson::Neg(a) => Expr::Neg(Box::new(go(a)?)),
            ExprJson::Pow(a, n) => Expr::Pow(Box::new(go(a)?), *n),
            ExprJson::Wderiv(a) => Expr::WDeriv(Box::new(go(a)?)),
            ExprJson::AtW1(a) => Expr::AtW1(Box::new(go(a)?)),
            ExprJson::Subst { expr, mul, tau, one } => {
                let arg = ThetaArg::new(
                    opt_rational(mul, rat_int(1))?,
                    opt_rational(tau, BigRational::zero())?,
                    opt_rational(one, BigRational::zero())?,
                );
                go(expr)?.substitute(&arg)?
            }
            ExprJson::Ref(name) => {
                let def = scope
                    .defs
                    .get(name)
                    .ok_or_else(|| Error::Parse(format!("unknown definition `{name}`")))?;
                def.resolve_depth(scope, depth + 1)?
            }
        })
    }
}

/// Parses a map of spec files keyed by name.
pub fn parse_specs(value: &serde_json::Value) -> Result<BTreeMap<String, AppellSpec>> {
    let files: BTreeMap<String, SpecFile> =
        serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    files
        .into_iter()
        .map(|(name, file)| {
            let spec = file
                .to_spec()
                .map_err(|e| Error::Parse(format!("spec `{name}`: {e}")))?;
            Ok((name, spec))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::rat;

    #[test]
    fn linear_exponents() {
        let e = LinearExp::parse("3k1+6k2-3").unwrap();
        assert_eq!(e.lin, vec![rat_int(3), rat_int(6)]);
        assert_eq!(e.constant, rat_int(-3));
        assert_eq!(e.at(&[1, -1]).unwrap(), rat_int(-6));
        let f = LinearExp::parse("k2-k1+1/3").unwrap();
        assert_eq!(f.lin, vec![rat_int(-1), rat_int(1)]);
        assert_eq!(f.constant, rat(1, 3));
        assert_eq!(f.format(), "-k1+k2+1/3");
        assert!(LinearExp::parse("k0").is_err());
    }

    #[test]
    fn json_nodes() {
        let text = r#"{"prod": [{"const": "i"}, {"pow": ["eta", 3]},
                       {"pow": [{"theta": {"arg": {"mul": "2"}}}, -1]}]}"#;
        let json: ExprJson = serde_json::from_str(text).unwrap();
        let e = json.resolve(&Scope::default()).unwrap();
        assert_eq!(e.to_string(), "i*(eta)^3*(theta(2z))^-1");
    }

    #[test]
    fn substitution_reaches_leaves() {
        let e = Expr::Prod(vec![
            Expr::Theta {
                arg: ThetaArg::scaled(rat_int(2)),
                form: ThetaForm::Sum,
            },
            Expr::mono(GaussRat::one(), rat_int(1), rat_int(0)),
        ]);
        let shifted = e.substitute(&ThetaArg::new(rat_int(1), rat_int(1), rat_int(0))).unwrap();
        assert_eq!(shifted.to_string(), "theta(2z+2tau)*1*w^(1)*q^(1)");
    }
}
