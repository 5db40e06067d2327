//! Floating-point evaluation of expression trees at a point `(z, tau)` and
//! contour residues.
//!
//! Lattice sums are summed directly: all lattice points whose effective
//! exponent `Q(k) + a(k) Im z / Im tau` lies below the order are kept, and the
//! first discarded shell bounds the tail geometrically.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rug::{Complex, Float};
use serde::Serialize;

use crate::appell::AppellSpec;
use crate::arg::ThetaArg;
use crate::error::{Error, Result};
use crate::exponent::{rat, rat_int};
use crate::identity::Expr;
use crate::rings::complex::{exp_2pi_i, float_from_rational, from_gauss, from_rational, pi};
use crate::specfun::{b_spec, theta_spec};

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 256;
/// Default truncation order of lattice sums.
pub const DEFAULT_ORDER: u32 = 40;

/// `eta` as a rank one lattice sum: `sum (-1)^n q^{(6n-1)^2/24}`.
pub fn eta_spec() -> AppellSpec {
    let mut spec = AppellSpec::theta(vec![vec![rat_int(3)]], vec![rat(-1, 2)], rat(1, 24), vec![rat_int(0)], rat_int(0));
    spec.lin_phase = vec![rat(1, 2)];
    spec
}

/// A value with an absolute error estimate.
#[derive(Clone, Debug)]
pub struct Value {
    pub value: Complex,
    pub err: f64,
}

impl Value {
    pub fn abs(&self) -> f64 {
        abs(&self.value)
    }
}

fn abs(c: &Complex) -> f64 {
    Float::with_val(c.prec().0, c.abs_ref()).to_f64()
}

/// Evaluation options.
#[derive(Clone, Copy, Debug)]
pub struct NumOptions {
    pub prec: u32,
    /// Lattice sums keep effective q-exponents below this.
    pub order: u32,
}

impl Default for NumOptions {
    fn default() -> Self {
        NumOptions {
            prec: DEFAULT_PREC,
            order: DEFAULT_ORDER,
        }
    }
}

/// Parses `re,im` into a complex number.
pub fn parse_complex(text: &str, prec: u32) -> Result<Complex> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Parse(format!("expected `re,im`, got `{text}`")));
    }
    let parse = |s: &str| {
        Float::parse(s)
            .map(|p| Float::with_val(prec, p))
            .map_err(|_| Error::Parse(format!("bad number `{s}`")))
    };
    Ok(Complex::with_val(prec, (parse(parts[0])?, parse(parts[1])?)))
}

/// One lattice point of a leaf with its `tau` dependent part precomputed.
struct Term {
    /// `e^{2 pi i (Q(k) tau + phase)}`.
    tau_part: Complex,
    /// Exponent of `w` in the numerator.
    w_exp: Float,
    /// `(e^{2 pi i (N tau + phase)}, w exponent)` per denominator factor.
    factors: Vec<(Complex, Float)>,
    /// Effective exponent at the enumeration center.
    eff: f64,
}

struct LeafTerms {
    terms: Vec<Term>,
}

enum Node {
    Leaf(usize),
    Const(Complex),
    Mono { coeff: Complex, w: Float, q: Float },
    Sum(Vec<Node>),
    Prod(Vec<Node>),
    Quot(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, i64),
    WDeriv(Box<Node>),
    AtW1(Box<Node>),
}

/// An expression compiled for numerical evaluation at fixed `tau`.
pub struct NumExpr {
    root: Node,
    leaves: Vec<AppellSpec>,
    tau: Complex,
    q_abs: f64,
    opts: NumOptions,
    /// Enumerations keyed by leaf and bucket of `Im z / Im tau`.
    cache: HashMap<(usize, i64), Arc<LeafTerms>>,
}

const BUCKETS_PER_UNIT: f64 = 8.0;
const ENUM_MARGIN: i64 = 2;

fn leaf_spec(e: &Expr) -> Result<Option<AppellSpec>> {
    Ok(match e {
        Expr::Eta => Some(eta_spec()),
        Expr::Theta { arg, .. } => Some(theta_spec().substitute(arg)?),
        Expr::B { r, k, arg } => Some(b_spec(*r, *k)?.substitute(arg)?),
        Expr::Appell { spec, .. } => Some(spec.clone()),
        _ => None,
    })
}

fn dot(a: &[BigRational], k: &[i64]) -> BigRational {
    a.iter()
        .zip(k)
        .fold(BigRational::zero(), |acc, (x, &ki)| acc + x * BigRational::from_integer(ki.into()))
}

impl NumExpr {
    pub fn new(expr: &Expr, tau: &Complex, opts: NumOptions) -> Result<NumExpr> {
        if tau.imag().is_sign_negative() || tau.imag().is_zero() {
            return Err(Error::Numeric("tau must lie in the upper half-plane".into()));
        }
        let tau = Complex::with_val(opts.prec, tau);
        let q_abs = (-2.0 * std::f64::consts::PI * tau.imag().to_f64()).exp();
        let mut leaves = Vec::new();
        let mut keys: HashMap<String, usize> = HashMap::new();
        let root = Self::compile(expr, opts.prec, &mut leaves, &mut keys)?;
        Ok(NumExpr {
            root,
            leaves,
            tau,
            q_abs,
            opts,
            cache: HashMap::new(),
        })
    }

    fn compile(
        e: &Expr,
        prec: u32,
        leaves: &mut Vec<AppellSpec>,
        keys: &mut HashMap<String, usize>,
    ) -> Result<Node> {
        if let Some(spec) = leaf_spec(e)? {
            let key = format!("{spec:?}");
            let idx = match keys.get(&key) {
                Some(&i) => i,
                None => {
                    leaves.push(spec);
                    keys.insert(key, leaves.len() - 1);
                    leaves.len() - 1
                }
            };
            return Ok(Node::Leaf(idx));
        }
        let mut go = |x: &Expr| Self::compile(x, prec, leaves, keys);
        Ok(match e {
            Expr::Const(c) => Node::Const(from_gauss(c, prec)),
            Expr::Mono { coeff, w, q } => Node::Mono {
                coeff: from_gauss(coeff, prec),
                w: float_from_rational(w, prec),
                q: float_from_rational(q, prec),
            },
            Expr::KMono { .. } => return Err(Error::Unsupported("family monomials have no numeric value".into())),
            Expr::Sum(v) => Node::Sum(v.iter().map(&mut go).collect::<Result<_>>()?),
            Expr::Prod(v) => Node::Prod(v.iter().map(&mut go).collect::<Result<_>>()?),
            Expr::Quot(a, b) => Node::Quot(Box::new(go(a)?), Box::new(go(b)?)),
            Expr::Neg(a) => Node::Neg(Box::new(go(a)?)),
            Expr::Pow(a, n) => Node::Pow(Box::new(go(a)?), *n),
            Expr::WDeriv(a) => Node::WDeriv(Box::new(go(a)?)),
            Expr::AtW1(a) => Node::AtW1(Box::new(go(a)?)),
            _ => unreachable!("leaves handled above"),
        })
    }

    pub fn prec(&self) -> u32 {
        self.opts.prec
    }

    pub fn tau(&self) -> &Complex {
        &self.tau
    }

    /// Value at `z`.
    pub fn eval(&mut self, z: &Complex) -> Result<Value> {
        let z = Complex::with_val(self.opts.prec, z);
        let mut memo: Vec<Option<Value>> = vec![None; self.leaves.len()];
        // the tree is borrowed while leaves are filled in
        let root = std::mem::replace(&mut self.root, Node::Sum(Vec::new()));
        let out = self.eval_node(&root, &z, &mut memo);
        self.root = root;
        out
    }

    fn eval_node(&mut self, node: &Node, z: &Complex, memo: &mut Vec<Option<Value>>) -> Result<Value> {
        let prec = self.opts.prec;
        Ok(match node {
            Node::Leaf(i) => {
                if let Some(v) = &memo[*i] {
                    return Ok(v.clone());
                }
                let v = self.leaf_value(*i, z)?;
                memo[*i] = Some(v.clone());
                v
            }
            Node::Const(c) => Value {
                value: c.clone(),
                err: 0.0,
            },
            Node::Mono { coeff, w, q } => {
                let x = Complex::with_val(prec, z * w) + Complex::with_val(prec, &self.tau * q);
                Value {
                    value: exp_2pi_i(&x) * coeff,
                    err: 0.0,
                }
            }
            Node::Sum(v) => {
                let mut acc = Value {
                    value: Complex::with_val(prec, 0),
                    err: 0.0,
                };
                for n in v {
                    let x = self.eval_node(n, z, memo)?;
                    acc.value += &x.value;
                    acc.err += x.err;
                }
                acc
            }
            Node::Prod(v) => {
                let vals = v.iter().map(|n| self.eval_node(n, z, memo)).collect::<Result<Vec<_>>>()?;
                let mut value = Complex::with_val(prec, 1);
                for x in &vals {
                    value *= &x.value;
                }
                let mut err = 0.0;
                for (i, x) in vals.iter().enumerate() {
                    let others: f64 = vals
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, y)| y.abs() + y.err)
                        .product();
                    err += x.err * others;
                }
                Value { value, err }
            }
            Node::Quot(a, b) => {
                let a = self.eval_node(a, z, memo)?;
                let b = self.eval_node(b, z, memo)?;
                quotient(&a, &b)?
            }
            Node::Neg(a) => {
                let x = self.eval_node(a, z, memo)?;
                Value {
                    value: -x.value,
                    err: x.err,
                }
            }
            Node::Pow(a, n) => {
                let x = self.eval_node(a, z, memo)?;
                power(&x, *n)?
            }
            Node::WDeriv(a) => self.derivative(a, z)?,
            Node::AtW1(a) => {
                let zero = Complex::with_val(prec, 0);
                let mut fresh = vec![None; self.leaves.len()];
                self.eval_node(a, &zero, &mut fresh)?
            }
        })
    }

    /// `(2 pi i)^{-1} f'(z)` by the Cauchy formula on a small circle.
    fn derivative(&mut self, node: &Node, z: &Complex) -> Result<Value> {
        let prec = self.opts.prec;
        let h = 1e-2 * self.tau.imag().to_f64().min(1.0);
        let m = 48usize;
        let mut acc = Complex::with_val(prec, 0);
        let mut err = 0.0f64;
        let two_pi = pi(prec) * 2u32;
        for j in 0..m {
            let angle = Float::with_val(prec, &two_pi * j as u32) / m as u32;
            let omega = Complex::with_val(prec, (angle.clone().cos(), angle.sin()));
            let point = Complex::with_val(prec, &omega * h) + z;
            let mut fresh = vec![None; self.leaves.len()];
            let f = self.eval_node(node, &point, &mut fresh)?;
            err = err.max(f.err);
            acc += f.value / omega;
        }
        // f'(z) = (1/(m h)) sum f(z + h w_j) / w_j, then divide by 2 pi i
        let scale = Complex::with_val(prec, (0, two_pi * (m as f64 * h)));
        Ok(Value {
            value: acc / scale,
            err: err / (h * 2.0 * std::f64::consts::PI) + abs_precision_floor(prec),
        })
    }

    fn terms_for(&mut self, leaf: usize, y: f64) -> Result<Arc<LeafTerms>> {
        let bucket = (y * BUCKETS_PER_UNIT).round() as i64;
        if let Some(t) = self.cache.get(&(leaf, bucket)) {
            return Ok(t.clone());
        }
        let prec = self.opts.prec;
        let spec = &self.leaves[leaf];
        let y0 = BigRational::new(BigInt::from(bucket), BigInt::from(BUCKETS_PER_UNIT as i64));
        let shifted = spec.substitute(&ThetaArg::new(rat_int(1), y0, rat_int(0)))?;
        let bound = BigRational::from_integer((self.opts.order as i64 + ENUM_MARGIN).into());
        let form = spec.numerator_form()?;
        let eff_form = shifted.numerator_form()?;
        let mut terms = Vec::new();
        for k in eff_form.enumerate_below(&bound)? {
            let qe = form.value(&k);
            let phase = dot(&spec.lin_phase, &k) + &spec.const_phase;
            let x = Complex::with_val(prec, &self.tau * float_from_rational(&qe, prec)) + from_rational(&phase, prec);
            let factors = spec
                .denoms
                .iter()
                .map(|d| {
                    let n = dot(&d.m, &k) + &d.q_off;
                    let xd = Complex::with_val(prec, &self.tau * float_from_rational(&n, prec))
                        + from_rational(&d.phase, prec);
                    (exp_2pi_i(&xd), float_from_rational(&d.w_pow, prec))
                })
                .collect();
            terms.push(Term {
                tau_part: exp_2pi_i(&x),
                w_exp: float_from_rational(&(dot(&spec.lin_w, &k) + &spec.const_w), prec),
                factors,
                eff: eff_form.value(&k).to_f64().unwrap_or(f64::INFINITY),
            });
        }
        let t = Arc::new(LeafTerms { terms });
        self.cache.insert((leaf, bucket), t.clone());
        Ok(t)
    }

    fn leaf_value(&mut self, leaf: usize, z: &Complex) -> Result<Value> {
        let prec = self.opts.prec;
        let y = z.imag().to_f64() / self.tau.imag().to_f64();
        let data = self.terms_for(leaf, y)?;
        let mut factor_cache: Vec<(Float, Complex)> = Vec::new();
        let mut total = Complex::with_val(prec, 0);
        let mut shell = 0.0f64;
        let mut mass = 0.0f64;
        let pole_tol = 2f64.powi(-(prec as i32) / 2);
        let edge = self.opts.order as f64 - 1.0;
        for t in &data.terms {
            let mut v = Complex::with_val(prec, z * &t.w_exp);
            v = exp_2pi_i(&v) * &t.tau_part;
            for (dq, wp) in &t.factors {
                let wz = match factor_cache.iter().find(|(p, _)| p == wp) {
                    Some((_, c)) => c.clone(),
                    None => {
                        let c = exp_2pi_i(&Complex::with_val(prec, z * wp));
                        factor_cache.push((wp.clone(), c.clone()));
                        c
                    }
                };
                let one_minus = Complex::with_val(prec, 1) - Complex::with_val(prec, dq * &wz);
                if abs(&one_minus) < pole_tol {
                    return Err(Error::Pole(format!("denominator vanishes at z = {}", crate::rings::complex::format(z, 12))));
                }
                v /= one_minus;
            }
            let a = abs(&v);
            mass += a;
            if t.eff >= edge {
                shell = shell.max(a);
            }
            total += v;
        }
        let q = self.q_abs;
        let floor = self.q_abs.powi(self.opts.order as i32);
        let tail = shell.max(floor * mass.max(1.0)) * q / (1.0 - q);
        Ok(Value {
            value: total,
            err: tail + mass * abs_precision_floor(prec),
        })
    }
}

fn abs_precision_floor(prec: u32) -> f64 {
    2f64.powi(-(prec as i32) + 8)
}

fn quotient(a: &Value, b: &Value) -> Result<Value> {
    let bb = b.abs();
    if bb == 0.0 || b.err >= bb {
        return Err(Error::Numeric("division by a value indistinguishable from zero".into()));
    }
    let value = Complex::with_val(a.value.prec().0, &a.value / &b.value);
    let err = (a.err + abs(&value) * b.err) / (bb - b.err);
    Ok(Value { value, err })
}

fn power(x: &Value, n: i64) -> Result<Value> {
    let prec = x.value.prec().0;
    if n == 0 {
        return Ok(Value {
            value: Complex::with_val(prec, 1),
            err: 0.0,
        });
    }
    let m = n.unsigned_abs();
    let mut value = Complex::with_val(prec, 1);
    for _ in 0..m {
        value *= &x.value;
    }
    let a = x.abs();
    let err = m as f64 * (a + x.err).powi(m as i32 - 1) * x.err;
    let v = Value { value, err };
    if n < 0 {
        let one = Value {
            value: Complex::with_val(prec, 1),
            err: 0.0,
        };
        quotient(&one, &v)
    } else {
        Ok(v)
    }
}

/// Result of a contour residue computation.
#[derive(Clone, Debug)]
pub struct Residue {
    pub value: Complex,
    pub err: f64,
    pub radius: f64,
    pub nodes: usize,
    /// `|residue| < 1e-12`.
    pub removable: bool,
    /// The `(z - z0)^{-2}` coefficient is not negligible.
    pub higher_order: bool,
}

pub const REMOVABLE_TOL: f64 = 1e-12;

/// Radius used around `z0`: a quarter of the distance to the nearest other
/// point of `(Z + Z tau)/6`.
pub fn contour_radius(tau: &Complex) -> f64 {
    let (tr, ti) = (tau.real().to_f64(), tau.imag().to_f64());
    let mut best = f64::INFINITY;
    for a in -6i32..=6 {
        for b in -6i32..=6 {
            if a == 0 && b == 0 {
                continue;
            }
            let re = (a as f64 + b as f64 * tr) / 6.0;
            let im = b as f64 * ti / 6.0;
            best = best.min((re * re + im * im).sqrt());
        }
    }
    best / 4.0
}

struct Contour {
    sum: Complex,
    sum2: Complex,
    err: f64,
}

fn contour_nodes(f: &mut NumExpr, z0: &Complex, rho: f64, m: usize, odd_only: bool) -> Result<Contour> {
    let prec = f.prec();
    let two_pi = pi(prec) * 2u32;
    let mut sum = Complex::with_val(prec, 0);
    let mut sum2 = Complex::with_val(prec, 0);
    let mut err = 0.0f64;
    let step = if odd_only { 2 } else { 1 };
    let start = if odd_only { 1 } else { 0 };
    let mut j = start;
    while j < m {
        let angle = Float::with_val(prec, &two_pi * j as u32) / m as u32;
        let omega = Complex::with_val(prec, (angle.clone().cos(), angle.sin()));
        let point = Complex::with_val(prec, &omega * rho) + z0;
        let v = f.eval(&point)?;
        err = err.max(v.err);
        let t = v.value * &omega;
        sum2 += Complex::with_val(prec, &t * &omega);
        sum += t;
        j += step;
    }
    Ok(Contour { sum, sum2, err })
}

/// Residue of `f` at `z0` by the trapezoid rule on a circle, doubling the
/// node count from `min_nodes` until successive values agree, and repeating
/// on the half radius as a stability check.
pub fn residue(f: &mut NumExpr, z0: &Complex, min_nodes: usize, max_nodes: usize) -> Result<Residue> {
    let rho = contour_radius(f.tau());
    let (r1, e1, n1, a2) = trapezoid(f, z0, rho, min_nodes, max_nodes)?;
    let (r2, e2, _, _) = trapezoid(f, z0, rho / 2.0, min_nodes, max_nodes)?;
    let prec = f.prec();
    let spread = abs(&Complex::with_val(prec, &r1 - &r2));
    let err = e1.max(e2).max(spread);
    let mag = abs(&r1);
    Ok(Residue {
        removable: mag < REMOVABLE_TOL,
        higher_order: abs(&a2) > 1e-10 * mag.max(1.0),
        value: r1,
        err,
        radius: rho,
        nodes: n1,
    })
}

fn trapezoid(f: &mut NumExpr, z0: &Complex, rho: f64, min_nodes: usize, max_nodes: usize) -> Result<(Complex, f64, usize, Complex)> {
    let prec = f.prec();
    let mut m = min_nodes.max(4);
    let mut c = contour_nodes(f, z0, rho, m, false)?;
    let scale = |s: &Complex, m: usize, power: i32| Complex::with_val(prec, s * rho.powi(power)) / m as u32;
    let mut prev = scale(&c.sum, m, 1);
    loop {
        let next_m = m * 2;
        let extra = contour_nodes(f, z0, rho, next_m, true)?;
        c.sum += &extra.sum;
        c.sum2 += &extra.sum2;
        c.err = c.err.max(extra.err);
        let cur = scale(&c.sum, next_m, 1);
        let diff = abs(&Complex::with_val(prec, &cur - &prev));
        m = next_m;
        let done = diff <= 1e-30 * abs(&cur).max(1e-30) || m >= max_nodes;
        prev = cur;
        if done {
            let a2 = scale(&c.sum2, m, 2);
            return Ok((prev, diff + c.err * rho, m, a2));
        }
    }
}

/// One row of the residue table.
#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub m: i64,
    pub n: i64,
    pub computed: String,
    pub expected: String,
    pub err: f64,
    pub rel_diff: f64,
    pub removable: bool,
    pub pass: bool,
}

/// The pole `m tau/3 + n/3`.
pub fn pole(tau: &Complex, m: i64, n: i64) -> Complex {
    let prec = tau.prec().0;
    Complex::with_val(prec, tau * m as i32) / 3u32 + Complex::with_val(prec, n as f64) / 3u32
}

/// `(-1)^{m+n+1} q^{m^2/2} theta(m tau/3 + n/3) / (6 pi eta^3)`, the residue of
/// `theta(2z)^2/eta^6` times the Theorem 1.1 left side, for `(m, n) != (0, 0)`.
pub fn closed_form_residue(tau: &Complex, m: i64, n: i64, opts: NumOptions) -> Result<Value> {
    let prec = opts.prec;
    let theta_expr = Expr::Theta {
        arg: ThetaArg::identity(),
        form: crate::specfun::ThetaForm::Sum,
    };
    let mut th = NumExpr::new(&theta_expr, tau, opts)?;
    let t = th.eval(&pole(tau, m, n))?;
    let mut et = NumExpr::new(&Expr::Pow(Box::new(Expr::Eta), 3), tau, opts)?;
    let e3 = et.eval(&Complex::with_val(prec, 0))?;
    let half_m2 = BigRational::new(BigInt::from(m * m), BigInt::from(2));
    let qpow = exp_2pi_i(&Complex::with_val(prec, tau * float_from_rational(&half_m2, prec)));
    let sign = if (m + n + 1) % 2 == 0 { 1 } else { -1 };
    let six_pi = Complex::with_val(prec, pi(prec) * 6u32);
    let num = Value {
        value: qpow * t.value * sign,
        err: t.err,
    };
    let den = Value {
        value: six_pi * &e3.value,
        err: e3.err * 6.0 * std::f64::consts::PI,
    };
    quotient(&num, &den)
}

/// Residues of `expr` at the nine points `m tau/3 + n/3`, compared with the
/// closed forms (and removability at `(0,0)`).
pub fn residue_table(expr: &Expr, tau: &Complex, opts: NumOptions, rel_tol: f64) -> Result<Vec<TableRow>> {
    let mut f = NumExpr::new(expr, tau, opts)?;
    let mut rows = Vec::new();
    for m in 0..3 {
        for n in 0..3 {
            rows.push(table_row(&mut f, tau, m, n, opts, rel_tol)?);
        }
    }
    Ok(rows)
}

pub fn table_row(f: &mut NumExpr, tau: &Complex, m: i64, n: i64, opts: NumOptions, rel_tol: f64) -> Result<TableRow> {
    let digits = 20;
    let r = residue(f, &pole(tau, m, n), 64, 1024)?;
    let fmt = |c: &Complex| crate::rings::complex::format(c, digits);
    if m == 0 && n == 0 {
        return Ok(TableRow {
            m,
            n,
            computed: fmt(&r.value),
            expected: "0 (removable)".into(),
            err: r.err,
            rel_diff: abs(&r.value),
            removable: r.removable,
            pass: r.removable && !r.higher_order,
        });
    }
    let expected = closed_form_residue(tau, m, n, opts)?;
    let diff = abs(&Complex::with_val(opts.prec, &r.value - &expected.value));
    let rel = diff / expected.abs();
    Ok(TableRow {
        m,
        n,
        computed: fmt(&r.value),
        expected: fmt(&expected.value),
        err: r.err,
        rel_diff: rel,
        removable: r.removable,
        pass: rel < rel_tol && !r.higher_order && !r.removable,
    })
}

/// The documented sample point for the residue table: `|q| = e^{-0.96 pi}`.
pub fn sample_tau(prec: u32) -> Complex {
    parse_complex(SAMPLE_TAU, prec).expect("valid literal")
}

pub const SAMPLE_TAU: &str = "0.1,0.48";
