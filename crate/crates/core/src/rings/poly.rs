//! Dense univariate polynomials over `Q(i)`, coefficients stored low to high.
//! Only used behind [`super::WRational`] to compute gcds.

use super::GaussRat;

pub(crate) type Dense = Vec<GaussRat>;

fn trim(p: &mut Dense) {
    while p.last().is_some_and(GaussRat::is_zero) {
        p.pop();
    }
}

pub(crate) fn is_constant(p: &[GaussRat]) -> bool {
    p.len() <= 1
}

/// Euclidean division `a = q*b + r` with `deg r < deg b`. `b` must be nonzero.
pub(crate) fn divrem(a: &[GaussRat], b: &[GaussRat]) -> (Dense, Dense) {
    let db = b.len() - 1;
    let lead_inv = b[db].inv().expect("divisor must be nonzero");
    let mut rem: Dense = a.to_vec();
    trim(&mut rem);
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let mut quot = vec![GaussRat::zero(); rem.len() - db];
    for shift in (0..quot.len()).rev() {
        let top = &rem[shift + db];
        if top.is_zero() {
            continue;
        }
        let factor = top * &lead_inv;
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                let t = &factor * bj;
                rem[shift + j] = &rem[shift + j] - &t;
            }
        }
        quot[shift] = factor;
    }
    rem.truncate(db);
    trim(&mut rem);
    trim(&mut quot);
    (quot, rem)
}

fn make_monic(mut p: Dense) -> Dense {
    if let Some(lead) = p.last() {
        if !lead.is_one() {
            let inv = lead.inv().expect("nonzero leading coefficient");
            for c in p.iter_mut() {
                *c = &*c * &inv;
            }
        }
    }
    p
}

/// Monic gcd of two polynomials, at least one of them nonzero.
pub(crate) fn gcd(a: &[GaussRat], b: &[GaussRat]) -> Dense {
    let mut x: Dense = a.to_vec();
    let mut y: Dense = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    while !y.is_empty() {
        if y.len() == 1 {
            return vec![GaussRat::one()];
        }
        let (_, r) = divrem(&x, &y);
        x = y;
        y = make_monic(r);
    }
    make_monic(x)
}

/// Exact quotient, or `None` when `b` does not divide `a`.
pub(crate) fn div_exact(a: &[GaussRat], b: &[GaussRat]) -> Option<Dense> {
    let (q, r) = divrem(a, b);
    r.is_empty().then_some(q)
}
