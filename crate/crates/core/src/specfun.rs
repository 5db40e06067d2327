//! Pochhammer products, Dedekind eta, Jacobi theta and the A_{r-1} theta
//! functions `b_{r,k}` as exact truncated series.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::appell::AppellSpec;
use crate::arg::ThetaArg;
use crate::error::{Error, Result};
use crate::exponent::{grid_numerator, rat, rat_int, QExp};
use crate::rings::{GaussRat, WLaurent};
use crate::series::TruncatedSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaForm {
    Sum,
    Product,
}

/// `(a; q)_inf` with `a = w^{w_exp} q^{q_exp}`, i.e. the product of
/// `1 - w^{w_exp} q^{q_exp + j}` over `j >= 0`, truncated at `order`.
pub fn pochhammer(w_exp: &BigRational, q_exp: QExp, order: QExp, wden: u32) -> Result<TruncatedSeries<WLaurent>> {
    if q_exp.den() != order.den() {
        return Err(Error::MismatchedQGrid(q_exp.den(), order.den()));
    }
    if q_exp.num() < 0 {
        return Err(Error::DivergentProduct(format!(
            "(a; q)_inf with q-exponent {q_exp} < 0"
        )));
    }
    let step = order.den() as i64;
    let a = grid_numerator(w_exp, wden)?;
    let one = WLaurent::one(wden);
    let mut acc = TruncatedSeries::from_terms(order, [(0, one.clone())])?;
    let mut e = q_exp.num();
    if e == 0 {
        let c = one.sub(&WLaurent::monomial(wden, a, GaussRat::one()))?;
        acc = acc.scale(&c)?;
        e += step;
    }
    while e < order.num() {
        acc = mul_one_minus(&acc, e, &WLaurent::monomial(wden, a, GaussRat::one()))?;
        e += step;
    }
    Ok(acc)
}

/// `s * (1 - c q^e)` for `e > 0`, keeping the precision of `s`.
fn mul_one_minus(s: &TruncatedSeries<WLaurent>, e: i64, c: &WLaurent) -> Result<TruncatedSeries<WLaurent>> {
    let prec = s.prec();
    let mut terms: Vec<(i64, WLaurent)> = s.raw_terms().iter().map(|(&k, v)| (k, v.clone())).collect();
    for (&k, v) in s.raw_terms() {
        if k + e < prec.num() {
            terms.push((k + e, v.mul(c)?.neg()));
        }
    }
    TruncatedSeries::from_terms(prec, terms)
}

/// `eta = q^{1/24} prod (1 - q^n)` via Euler's pentagonal theorem.
pub fn eta(order: QExp) -> Result<TruncatedSeries<BigRational>> {
    let den = order.den() as i64;
    if den % 24 != 0 {
        return Err(Error::OffGrid {
            value: "1/24".into(),
            den: order.den(),
        });
    }
    let base = den / 24;
    let mut terms = Vec::new();
    let mut n: i64 = 0;
    loop {
        let mut any = false;
        for m in if n == 0 { vec![0] } else { vec![n, -n] } {
            let e = base + den * (m * (3 * m - 1) / 2);
            if e < order.num() {
                any = true;
                terms.push((e, rat_int(if m % 2 == 0 { 1 } else { -1 })));
            }
        }
        if !any && n > 0 {
            break;
        }
        n += 1;
    }
    TruncatedSeries::from_terms(order, terms)
}

/// `theta(z) = i sum_{r in 1/2+Z} (-1)^{r-1/2} q^{r^2/2} w^r` written as a
/// rank one lattice sum over `n = r - 1/2`.
pub fn theta_spec() -> AppellSpec {
    let mut spec = AppellSpec::theta(
        vec![vec![rat_int(1)]],
        vec![rat(1, 2)],
        rat(1, 8),
        vec![rat_int(1)],
        rat(1, 2),
    );
    spec.lin_phase = vec![rat(1, 2)];
    spec.const_phase = rat(1, 4);
    spec
}

/// `theta(a z + s tau + u)` to `O(q^order)`. Symbolic phases require
/// `u` in `Z/2`; the product form only covers the plain argument `a z`.
pub fn theta(arg: &ThetaArg, order: QExp, form: ThetaForm, wden: u32) -> Result<TruncatedSeries<WLaurent>> {
    match form {
        ThetaForm::Sum => theta_spec().substitute(arg)?.expand_theta(order, wden),
        ThetaForm::Product => {
            if !arg.tau.is_zero() || !arg.one.is_zero() {
                return Err(Error::Unsupported("product form of theta with a shifted argument".into()));
            }
            let plain = theta_product(order, wden)?;
            plain.try_map_coefficients(|c| c.w_scale(&arg.mul))
        }
    }
}

/// `i w^{1/2} q^{1/8} (q)_inf (wq)_inf (w^{-1})_inf` at the plain argument.
fn theta_product(order: QExp, wden: u32) -> Result<TruncatedSeries<WLaurent>> {
    let den = order.den();
    let eighth = QExp::from_rational(&rat(1, 8), den)?;
    let one_q = QExp::integer(1, den)?;
    let inner = order.checked_sub(&eighth)?;
    let a = pochhammer(&rat_int(0), one_q, inner, wden)?;
    let b = pochhammer(&rat_int(1), one_q, inner, wden)?;
    let c = pochhammer(&rat_int(-1), QExp::zero(den), inner, wden)?;
    let prefactor = WLaurent::monomial_rat(wden, &rat(1, 2), GaussRat::i())?;
    a.mul(&b)?.mul(&c)?.scale(&prefactor)?.shift_q(eighth)
}

/// Lattice data of `b_{r,k}` in the coordinates `a_j = k/r + n_j` for
/// `j < r`, `a_r = -(a_1 + ... + a_{r-1})`.
pub fn b_spec(r: u32, k: i64) -> Result<AppellSpec> {
    if r < 2 {
        return Err(Error::Dimension("b_{r,k} needs r >= 2".into()));
    }
    let n = (r - 1) as usize;
    let ri = r as i64;
    let gram = (0..n)
        .map(|i| (0..n).map(|j| rat_int(if i == j { 2 } else { 1 })).collect())
        .collect();
    let lin_q = vec![rat_int(k); n];
    let const_q = BigRational::new(BigInt::from((ri - 1) * k * k), BigInt::from(2 * ri));
    let lin_w = (0..n).map(|j| rat_int(ri - 1 - j as i64)).collect();
    let const_w = BigRational::new(BigInt::from((ri - 1) * k), BigInt::from(2));
    Ok(AppellSpec::theta(gram, lin_q, const_q, lin_w, const_w))
}

/// `b_{r,k}(a z + s tau + u)` to `O(q^order)`.
pub fn b_rk(r: u32, k: i64, arg: &ThetaArg, order: QExp, wden: u32) -> Result<TruncatedSeries<WLaurent>> {
    b_spec(r, k)?.substitute(arg)?.expand_theta(order, wden)
}

/// `w d/dw` applied termwise, which is `(2 pi i)^{-1} d/dz`.
pub fn euler_derivative(s: &TruncatedSeries<WLaurent>) -> TruncatedSeries<WLaurent> {
    s.map_coefficients(|c| c.euler_derivative())
}

/// Substitution `w -> 1` (that is `z = 0`).
pub fn at_w_one(s: &TruncatedSeries<WLaurent>) -> TruncatedSeries<GaussRat> {
    s.map_coefficients(|c| c.at_one())
}
