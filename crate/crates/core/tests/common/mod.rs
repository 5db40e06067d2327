//! Naive reference evaluators. They share nothing with the library beyond
//! the coefficient rings: lattice points come from a box scan, exponents are
//! computed in plain rational arithmetic and denominators are expanded as
//! geometric series term by term.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use qseries::appell::AppellSpec;
use qseries::identity::{builtin_catalogue, Expr};
use qseries::rings::{GaussRat, WLaurent, WRational};
use qseries::specfun::{b_spec, theta_spec};
use qseries::TruncatedSeries;

pub fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn ri(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn dot(a: &[BigRational], k: &[i64]) -> BigRational {
    a.iter().zip(k).map(|(x, &y)| x * ri(y)).fold(BigRational::zero(), |s, t| s + t)
}

/// `1/2 k^T G k + lin.k + c`.
pub fn form_value(gram: &[Vec<BigRational>], lin: &[BigRational], c: &BigRational, k: &[i64]) -> BigRational {
    let mut quad = BigRational::zero();
    for (i, row) in gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            quad += g * ri(k[i] * k[j]);
        }
    }
    quad / ri(2) + dot(lin, k) + c
}

/// Every point of `[-b, b]^n`.
pub fn cube(n: usize, b: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-b..=b).map(move |x| {
                    let mut p = p.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

/// Points of `[-b, b]^n` with form value below `bound`, lexicographic.
pub fn box_scan(gram: &[Vec<BigRational>], lin: &[BigRational], c: &BigRational, bound: &BigRational, b: i64) -> Vec<Vec<i64>> {
    cube(gram.len(), b)
        .into_iter()
        .filter(|k| &form_value(gram, lin, c, k) < bound)
        .collect()
}

/// A box half-width that safely contains every point below `bound`: twice
/// the first width whose outer shell is entirely at or above the bound.
pub fn safe_box(gram: &[Vec<BigRational>], lin: &[BigRational], c: &BigRational, bound: &BigRational) -> i64 {
    let n = gram.len();
    let mut b = 1;
    loop {
        let shell_ok = cube(n, b)
            .iter()
            .filter(|k| k.iter().any(|x| x.abs() == b))
            .all(|k| &form_value(gram, lin, c, k) >= bound);
        if shell_ok {
            return 2 * b + 2;
        }
        b += 1;
        assert!(b < 200, "form does not look positive definite");
    }
}

/// `e^{2 pi i x}` for `x` a multiple of 1/4.
pub fn quarter_phase(x: &BigRational) -> GaussRat {
    let four = x * ri(4);
    assert!(four.is_integer(), "phase {x} is not a quarter");
    let k = four.to_integer().to_i64().unwrap().rem_euclid(4);
    match k {
        0 => GaussRat::one(),
        1 => GaussRat::i(),
        2 => GaussRat::from_int(-1),
        _ => -GaussRat::i(),
    }
}

fn to_grid(x: &BigRational, den: u32) -> i64 {
    let s = x * ri(den as i64);
    assert!(s.is_integer(), "{x} is off the 1/{den} grid");
    s.to_integer().to_i64().unwrap()
}

/// Brute-force expansion of an Appell spec: q-exponent -> coefficient in
/// `Q(i)(w)`, exponents strictly below `order`.
pub fn brute_appell(spec: &AppellSpec, order: &BigRational, wden: u32) -> BTreeMap<BigRational, WRational> {
    let b = safe_box(&spec.gram, &spec.lin_q, &spec.const_q, order);
    // (q, mask) -> [(w, c)]
    let mut acc: BTreeMap<(BigRational, u64), Vec<(BigRational, GaussRat)>> = BTreeMap::new();
    for k in cube(spec.gram.len(), b) {
        let q0 = form_value(&spec.gram, &spec.lin_q, &spec.const_q, &k);
        if &q0 >= order {
            continue;
        }
        let w0 = dot(&spec.lin_w, &k) + &spec.const_w;
        let c0 = quarter_phase(&(dot(&spec.lin_phase, &k) + &spec.const_phase));
        // partial products: (q, w, c, mask)
        let mut partial = vec![(q0, w0, c0, 0u64)];
        for (idx, d) in spec.denoms.iter().enumerate() {
            let n = dot(&d.m, &k) + &d.q_off;
            let zeta = quarter_phase(&d.phase);
            let mut next = Vec::new();
            for (q, w, c, mask) in partial {
                if n.is_zero() {
                    next.push((q, w, c, mask | (1 << idx)));
                    continue;
                }
                // 1/(1-x) = sum_{j>=0} x^j, or -sum_{j>=1} x^{-j} when the
                // q-exponent of x is negative
                let (sign, first, step_q, step_w, ratio) = if n.is_positive() {
                    (GaussRat::one(), 0, n.clone(), d.w_pow.clone(), zeta.clone())
                } else {
                    let inv = zeta.inv().unwrap();
                    (GaussRat::from_int(-1), 1, -n.clone(), -d.w_pow.clone(), inv)
                };
                let mut j = first;
                loop {
                    let qj = &q + &step_q * ri(j);
                    if &qj >= order {
                        break;
                    }
                    let mut cj = &c * &sign;
                    for _ in 0..j {
                        cj = &cj * &ratio;
                    }
                    next.push((qj, &w + &step_w * ri(j), cj, mask));
                    j += 1;
                }
            }
            partial = next;
        }
        for (q, w, c, mask) in partial {
            acc.entry((q, mask)).or_default().push((w, c));
        }
    }
    let mut out: BTreeMap<BigRational, WRational> = BTreeMap::new();
    for ((q, mask), terms) in acc {
        let num = WLaurent::from_terms(wden, terms.iter().map(|(w, c)| (to_grid(w, wden), c.clone())));
        let mut den = WLaurent::one(wden);
        for (idx, d) in spec.denoms.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                let f = WLaurent::one(wden)
                    .sub(&WLaurent::monomial(wden, to_grid(&d.w_pow, wden), quarter_phase(&d.phase)))
                    .unwrap();
                den = den.mul(&f).unwrap();
            }
        }
        let value = WRational::reduce(num, den).unwrap();
        let slot = out.entry(q).or_insert_with(|| WRational::zero(wden));
        *slot = slot.add(&value).unwrap();
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Nonzero coefficients of a library series keyed by rational exponent.
pub fn series_map<R: qseries::Ring>(s: &TruncatedSeries<R>) -> BTreeMap<BigRational, R> {
    s.terms().map(|(e, c)| (e.to_rational(), c.clone())).collect()
}

/// Library Laurent coefficients flattened to `(q, w) -> c`.
pub fn laurent_map(s: &TruncatedSeries<WLaurent>) -> BTreeMap<(BigRational, BigRational), GaussRat> {
    let mut out = BTreeMap::new();
    for (e, c) in s.terms() {
        for (w, x) in c.terms() {
            out.insert((e.to_rational(), r(*w, c.den() as i64)), x.clone());
        }
    }
    out
}

/// `q^{1/24} prod_{n>=1} (1 - q^n)` by repeated polynomial multiplication,
/// as integer coefficients of `q^{1/24 + j}`, `j < len`.
pub fn eta_product(len: usize) -> Vec<i64> {
    let mut p = vec![0i64; len];
    p[0] = 1;
    for n in 1..len {
        for j in (n..len).rev() {
            p[j] -= p[j - n];
        }
    }
    p
}

/// `i sum_{r in 1/2 + Z} (-1)^{r - 1/2} q^{r^2/2} w^r` below `order`.
pub fn theta_direct(order: &BigRational) -> BTreeMap<(BigRational, BigRational), GaussRat> {
    let mut out = BTreeMap::new();
    for n in -100i64..100 {
        let rr = r(2 * n + 1, 2);
        let q = &rr * &rr / ri(2);
        if &q < order {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            out.insert((q, rr), &GaussRat::i() * &GaussRat::from_int(sign));
        }
    }
    out
}

/// Coefficients of `prod (1 - q^n)^3`, by multiplication.
pub fn eta_cubed_product(len: usize) -> Vec<i64> {
    let e = eta_product(len);
    let mut sq = vec![0i64; len];
    for i in 0..len {
        for j in 0..len - i {
            sq[i + j] += e[i] * e[j];
        }
    }
    let mut cu = vec![0i64; len];
    for i in 0..len {
        for j in 0..len - i {
            cu[i + j] += sq[i] * e[j];
        }
    }
    cu
}

/// The explicit double sums `b_{3,0} = sum q^{m^2+n^2+mn} w^{m+2n}` and
/// `b_{3,1} = sum q^{m^2+n^2+mn+m+n+1/3} w^{m+2n+1}`.
pub fn cubic_theta_direct(k: i64, order: &BigRational) -> BTreeMap<(BigRational, BigRational), GaussRat> {
    let mut out: BTreeMap<(BigRational, BigRational), GaussRat> = BTreeMap::new();
    for m in -40i64..=40 {
        for n in -40i64..=40 {
            let (q, w) = if k == 0 {
                (ri(m * m + n * n + m * n), ri(m + 2 * n))
            } else {
                (ri(m * m + n * n + m * n + m + n) + r(1, 3), ri(m + 2 * n + 1))
            };
            if &q < order {
                let slot = out.entry((q, w)).or_insert_with(GaussRat::zero);
                *slot = &*slot + &GaussRat::one();
            }
        }
    }
    out
}

fn collect_specs(e: &Expr, out: &mut Vec<(String, AppellSpec)>) {
    match e {
        Expr::Appell { name, spec } => out.push((name.clone(), spec.clone())),
        Expr::Theta { arg, .. } => out.push(("theta".into(), theta_spec().substitute(arg).unwrap())),
        Expr::B { r, k, arg } => out.push((format!("b{r}{k}"), b_spec(*r, *k).unwrap().substitute(arg).unwrap())),
        Expr::Sum(v) | Expr::Prod(v) => v.iter().for_each(|c| collect_specs(c, out)),
        Expr::Quot(a, b) => {
            collect_specs(a, out);
            collect_specs(b, out);
        }
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::WDeriv(a) | Expr::AtW1(a) => collect_specs(a, out),
        Expr::Eta | Expr::Const(_) | Expr::Mono { .. } | Expr::KMono { .. } => {}
    }
}

/// Distinct lattice-sum leaves of the built-in catalogue, as substituted in
/// the identities.
pub fn catalogue_leaf_specs() -> Vec<(String, AppellSpec)> {
    let cat = builtin_catalogue().unwrap();
    let mut all = Vec::new();
    for id in &cat.identities {
        collect_specs(&id.lhs, &mut all);
        collect_specs(&id.rhs, &mut all);
    }
    let mut seen = std::collections::BTreeSet::new();
    all.retain(|(_, s)| seen.insert(format!("{s:?}")));
    all
}

pub fn one() -> BigRational {
    BigRational::one()
}
