//! Enumeration of lattice points below a bound of a positive definite
//! quadratic polynomial `f(k) = 1/2 k^T G k + lin . k + c`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A quadratic polynomial on `Z^n` with rational data.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    pub gram: Vec<Vec<BigRational>>,
    pub lin: Vec<BigRational>,
    pub constant: BigRational,
}

impl QuadraticForm {
    pub fn new(gram: Vec<Vec<BigRational>>, lin: Vec<BigRational>, constant: BigRational) -> Result<Self> {
        let n = gram.len();
        if n == 0 {
            return Err(Error::Dimension("empty Gram matrix".into()));
        }
        if gram.iter().any(|row| row.len() != n) || lin.len() != n {
            return Err(Error::Dimension(format!("Gram matrix and linear part must be {n}-dimensional")));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Dimension("Gram matrix is not symmetric".into()));
                }
            }
        }
        Ok(QuadraticForm { gram, lin, constant })
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn value(&self, k: &[i64]) -> BigRational {
        let n = self.rank();
        let kb: Vec<BigRational> = k.iter().map(|&x| BigRational::from_integer(x.into())).collect();
        let mut quad = BigRational::zero();
        for i in 0..n {
            for j in 0..n {
                if !self.gram[i][j].is_zero() {
                    quad += &self.gram[i][j] * &kb[i] * &kb[j];
                }
            }
        }
        let mut v = quad / BigRational::from_integer(2.into()) + &self.constant;
        for i in 0..n {
            v += &self.lin[i] * &kb[i];
        }
        v
    }

    /// Positive definiteness via the leading principal minors, computed as
    /// the pivots of exact symmetric elimination.
    pub fn is_positive_definite(&self) -> bool {
        let mut a = self.gram.clone();
        let n = a.len();
        for p in 0..n {
            if !a[p][p].is_positive() {
                return false;
            }
            for i in p + 1..n {
                let factor = &a[i][p] / &a[p][p];
                for j in p..n {
                    let t = &factor * &a[p][j];
                    a[i][j] -= t;
                }
            }
        }
        true
    }

    /// Exact inverse of the Gram matrix (Gauss-Jordan).
    fn gram_inverse(&self) -> Result<Vec<Vec<BigRational>>> {
        let n = self.rank();
        let mut a = self.gram.clone();
        let mut inv: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
            .collect();
        for p in 0..n {
            let pivot_row = (p..n).find(|&r| !a[r][p].is_zero()).ok_or(Error::NotPositiveDefinite)?;
            a.swap(p, pivot_row);
            inv.swap(p, pivot_row);
            let pivot = a[p][p].clone();
            for j in 0..n {
                a[p][j] = &a[p][j] / &pivot;
                inv[p][j] = &inv[p][j] / &pivot;
            }
            for r in 0..n {
                if r != p && !a[r][p].is_zero() {
                    let factor = a[r][p].clone();
                    for j in 0..n {
                        let t = &factor * &a[p][j];
                        a[r][j] -= t;
                        let u = &factor * &inv[p][j];
                        inv[r][j] -= u;
                    }
                }
            }
        }
        Ok(inv)
    }

    /// Real minimiser `k0 = -G^{-1} lin` and minimum value `f(k0)`.
    pub fn real_minimum(&self) -> Result<(Vec<BigRational>, BigRational)> {
        if !self.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        let inv = self.gram_inverse()?;
        let n = self.rank();
        let k0: Vec<BigRational> = (0..n)
            .map(|i| -(0..n).fold(BigRational::zero(), |acc, j| acc + &inv[i][j] * &self.lin[j]))
            .collect();
        let half_dot = (0..n).fold(BigRational::zero(), |acc, i| acc + &self.lin[i] * &k0[i]) / BigRational::from_integer(2.into());
        Ok((k0, &self.constant + half_dot))
    }

    /// Smallest value of `f` over the integer lattice.
    pub fn lattice_minimum(&self) -> Result<BigRational> {
        let (_, fmin) = self.real_minimum()?;
        let mut width = BigRational::one();
        loop {
            let points = self.enumerate_below(&(&fmin + &width))?;
            if let Some(best) = points.iter().map(|k| self.value(k)).min() {
                return Ok(best);
            }
            width *= BigRational::from_integer(2.into());
        }
    }

    /// All `k` with `f(k) < bound`, sorted lexicographically.
    pub fn enumerate_below(&self, bound: &BigRational) -> Result<Vec<Vec<i64>>> {
        let (k0, fmin) = self.real_minimum()?;
        if bound <= &fmin {
            return Ok(Vec::new());
        }
        let inv = self.gram_inverse()?;
        let n = self.rank();
        let two = BigRational::from_integer(2.into());
        let budget = (bound - &fmin) * &two;
        let mut ranges = Vec::with_capacity(n);
        for i in 0..n {
            // max of x_i on 1/2 x^T G x <= t is sqrt(2 t (G^{-1})_ii)
            let r2 = &budget * &inv[i][i];
            let r = r2.to_f64().ok_or(Error::Overflow)?.sqrt();
            let c = k0[i].to_f64().ok_or(Error::Overflow)?;
            let lo = (c - r).floor() - 1.0;
            let hi = (c + r).ceil() + 1.0;
            if !(lo.is_finite() && hi.is_finite()) || hi - lo > 1e7 {
                return Err(Error::Overflow);
            }
            ranges.push((lo as i64, hi as i64));
        }
        let scan = IntegerForm::new(self)?;
        let limit = scan.scaled_bound(bound);
        let mut out = Vec::new();
        let mut k: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            if scan.value(&k) < limit {
                out.push(k.clone());
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if k[i] < ranges[i].1 {
                    k[i] += 1;
                    break;
                }
                k[i] = ranges[i].0;
            }
        }
    }
}

/// `f` scaled to integer coefficients, evaluated in `i128`.
struct IntegerForm {
    scale: BigInt,
    gram: Vec<Vec<i128>>,
    lin: Vec<i128>,
    constant: i128,
}

impl IntegerForm {
    fn new(form: &QuadraticForm) -> Result<Self> {
        let mut scale = BigInt::from(2);
        let all = form.gram.iter().flatten().chain(form.lin.iter()).chain(std::iter::once(&form.constant));
        for x in all {
            scale = scale.lcm(x.denom());
        }
        let s = BigRational::from_integer(scale.clone());
        let conv = |x: &BigRational| -> Result<i128> {
            let y = x * &s;
            y.to_integer().to_i128().ok_or(Error::Overflow)
        };
        // 2 f scale = k^T (scale G) k + 2 scale lin . k + 2 scale c
        let gram = form
            .gram
            .iter()
            .map(|row| row.iter().map(conv).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let lin = form.lin.iter().map(|x| conv(x).map(|v| 2 * v)).collect::<Result<Vec<_>>>()?;
        let constant = 2 * conv(&form.constant)?;
        Ok(IntegerForm {
            scale,
            gram,
            lin,
            constant,
        })
    }

    /// `2 * scale * bound`, rounded up so that `value < result` iff `f < bound`.
    fn scaled_bound(&self, bound: &BigRational) -> i128 {
        let b = bound * BigRational::from_integer(&self.scale * 2);
        b.ceil().to_integer().to_i128().unwrap_or(i128::MAX)
    }

    fn value(&self, k: &[i64]) -> i128 {
        let n = k.len();
        let mut v = self.constant;
        for i in 0..n {
            let ki = k[i] as i128;
            v += self.lin[i] * ki;
            for j in 0..n {
                v += self.gram[i][j] * ki * k[j] as i128;
            }
        }
        v
    }
}

/// Convenience wrapper: lattice points with `f(k) < bound`.
pub fn enumerate_lattice(
    gram: &[Vec<BigRational>],
    lin: &[BigRational],
    constant: &BigRational,
    bound: &BigRational,
) -> Result<Vec<Vec<i64>>> {
    QuadraticForm::new(gram.to_vec(), lin.to_vec(), constant.clone())?.enumerate_below(bound)
}
