//! Generalized Appell sums
//!
//! ```text
//! sum_k  phase(k) w^{lin_w.k + const_w} q^{1/2 k^T G k + lin_q.k + const_q}
//!        / prod_l (1 - zeta_l w^{w_pow_l} q^{m_l.k + q_off_l})
//! ```
//!
//! expanded as truncated q-series over `Q(i)(w)`. Factors whose q-exponent
//! vanishes at a lattice point stay symbolic as `1/(1 - zeta w^a)`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arg::ThetaArg;
use crate::error::{Error, Result};
use crate::exponent::{format_rational, grid_numerator, parse_rational, QExp};
use crate::lattice::QuadraticForm;
use crate::rings::{GaussRat, Ring, WLaurent, WRational};
use crate::series::TruncatedSeries;

pub const SPEC_VERSION: u32 = 1;

/// One factor `(1 - e^{2 pi i phase} w^{w_pow} q^{m.k + q_off})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Denominator {
    pub m: Vec<BigRational>,
    pub w_pow: BigRational,
    pub q_off: BigRational,
    pub phase: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppellSpec {
    pub gram: Vec<Vec<BigRational>>,
    pub lin_q: Vec<BigRational>,
    pub const_q: BigRational,
    pub lin_w: Vec<BigRational>,
    pub const_w: BigRational,
    /// Numerator phase `e^{2 pi i (lin_phase.k + const_phase)}`; values must
    /// be multiples of 1/4.
    pub lin_phase: Vec<BigRational>,
    pub const_phase: BigRational,
    pub denoms: Vec<Denominator>,
}

fn dot(a: &[BigRational], k: &[i64]) -> BigRational {
    a.iter()
        .zip(k)
        .fold(BigRational::zero(), |acc, (x, &ki)| acc + x * BigRational::from_integer(ki.into()))
}

impl AppellSpec {
    /// A pure lattice theta series (no denominators, no phases).
    pub fn theta(
        gram: Vec<Vec<BigRational>>,
        lin_q: Vec<BigRational>,
        const_q: BigRational,
        lin_w: Vec<BigRational>,
        const_w: BigRational,
    ) -> Self {
        let n = gram.len();
        AppellSpec {
            gram,
            lin_q,
            const_q,
            lin_w,
            const_w,
            lin_phase: vec![BigRational::zero(); n],
            const_phase: BigRational::zero(),
            denoms: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rank();
        let bad = |what: &str| Err(Error::Dimension(format!("{what} must have length {n}")));
        if self.lin_q.len() != n {
            return bad("lin_q");
        }
        if self.lin_w.len() != n {
            return bad("lin_w");
        }
        if self.lin_phase.len() != n {
            return bad("lin_phase");
        }
        if self.denoms.iter().any(|d| d.m.len() != n) {
            return bad("every denominator vector m");
        }
        let form = self.numerator_form()?;
        if !form.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(())
    }

    pub fn numerator_form(&self) -> Result<QuadraticForm> {
        QuadraticForm::new(self.gram.clone(), self.lin_q.clone(), self.const_q.clone())
    }

    /// Exact least numerator q-exponent over the lattice. Every term of the
    /// expansion has valuation at least this.
    pub fn valuation_bound(&self) -> Result<BigRational> {
        self.numerator_form()?.lattice_minimum()
    }

    /// The spec of `f(a z + s tau + u)` where `f` is the function of `self`.
    /// Requires `u * w_pow` to leave denominators on quarter phases.
    pub fn substitute(&self, arg: &ThetaArg) -> Result<AppellSpec> {
        let s = &arg.tau;
        let u = &arg.one;
        let a = &arg.mul;
        let lin_q = self.lin_q.iter().zip(&self.lin_w).map(|(q, w)| q + s * w).collect();
        let lin_phase = self.lin_phase.iter().zip(&self.lin_w).map(|(p, w)| p + u * w).collect();
        let denoms = self
            .denoms
            .iter()
            .map(|d| Denominator {
                m: d.m.clone(),
                w_pow: a * &d.w_pow,
                q_off: &d.q_off + s * &d.w_pow,
                phase: &d.phase + u * &d.w_pow,
            })
            .collect();
        Ok(AppellSpec {
            gram: self.gram.clone(),
            lin_q,
            const_q: &self.const_q + s * &self.const_w,
            lin_w: self.lin_w.iter().map(|w| a * w).collect(),
            const_w: a * &self.const_w,
            lin_phase,
            const_phase: &self.const_phase + u * &self.const_w,
            denoms,
        })
    }

    /// Spec of `z -> z + t tau`: a monomial `w^e` picks up `q^{t e}`.
    pub fn shift_z(&self, t: i64) -> Result<AppellSpec> {
        self.substitute(&ThetaArg::new(
            BigRational::from_integer(1.into()),
            BigRational::from_integer(t.into()),
            BigRational::zero(),
        ))
    }

    /// Per lattice point data: numerator exponents and phase, and the
    /// denominator q/w exponents on the grids.
    fn point_data(&self, k: &[i64], qden: u32, wden: u32) -> Result<PointData> {
        let form = self.numerator_form()?;
        let q = grid_numerator(&form.value(k), qden)?;
        let w = grid_numerator(&(dot(&self.lin_w, k) + &self.const_w), wden)?;
        let phase = GaussRat::unit_phase(&(dot(&self.lin_phase, k) + &self.const_phase))?;
        let mut factors = Vec::with_capacity(self.denoms.len());
        for d in &self.denoms {
            factors.push(FactorData {
                n: grid_numerator(&(dot(&d.m, k) + &d.q_off), qden)?,
                a: grid_numerator(&d.w_pow, wden)?,
                zeta: GaussRat::unit_phase(&d.phase)?,
            });
        }
        Ok(PointData { q, w, phase, factors })
    }

    /// Lattice points whose numerator exponent lies below `order`.
    pub fn points_below(&self, order: &BigRational) -> Result<Vec<Vec<i64>>> {
        self.validate()?;
        self.numerator_form()?.enumerate_below(order)
    }

    /// Expansion of a denominator-free spec as a series over `Q(i)[w^{±1/E}]`.
    pub fn expand_theta(&self, order: QExp, wden: u32) -> Result<TruncatedSeries<WLaurent>> {
        if !self.denoms.is_empty() {
            return Err(Error::Unsupported("spec has denominators; use expand_appell".into()));
        }
        let qden = order.den();
        let points = self.points_below(&order.to_rational())?;
        let terms = points
            .par_iter()
            .map(|k| {
                let p = self.point_data(k, qden, wden)?;
                Ok((p.q, WLaurent::monomial(wden, p.w, p.phase)))
            })
            .collect::<Result<Vec<_>>>()?;
        TruncatedSeries::from_terms(order, terms)
    }
}

struct FactorData {
    n: i64,
    a: i64,
    zeta: GaussRat,
}

struct PointData {
    q: i64,
    w: i64,
    phase: GaussRat,
    factors: Vec<FactorData>,
}

/// Geometric expansion of one factor at one lattice point.
#[derive(Clone, Debug)]
enum Expansion {
    /// `prefactor * sum_j (ratio)^j` with `ratio = zeta^j w^{ja} q^{j step}`.
    Geometric {
        shift_q: i64,
        shift_w: i64,
        sign: GaussRat,
        step_q: i64,
        step_w: i64,
        ratio: GaussRat,
    },
    /// The symbolic constant `1/(1 - zeta w^a)`.
    Constant,
}

fn expansion_of(f: &FactorData) -> Result<Expansion> {
    if f.n > 0 {
        Ok(Expansion::Geometric {
            shift_q: 0,
            shift_w: 0,
            sign: GaussRat::one(),
            step_q: f.n,
            step_w: f.a,
            ratio: f.zeta.clone(),
        })
    } else if f.n < 0 {
        // 1/(1 - x) = -x^{-1}/(1 - x^{-1})
        let inv = f.zeta.inv().expect("phase is a unit");
        Ok(Expansion::Geometric {
            shift_q: -f.n,
            shift_w: -f.a,
            sign: -&inv,
            step_q: -f.n,
            step_w: -f.a,
            ratio: inv,
        })
    } else if f.a == 0 && f.zeta.is_one() {
        Err(Error::ZeroFactor)
    } else {
        Ok(Expansion::Constant)
    }
}

/// Expansion of a single denominator factor `1/(1 - zeta w^a q^N)` as a
/// series, given `N` and `a` as grid numerators.
pub fn expand_denominator(
    n: i64,
    a: i64,
    zeta: &GaussRat,
    order: QExp,
    wden: u32,
) -> Result<TruncatedSeries<WRational>> {
    let f = FactorData {
        n,
        a,
        zeta: zeta.clone(),
    };
    match expansion_of(&f)? {
        Expansion::Constant => {
            let den = WLaurent::one(wden).sub(&WLaurent::monomial(wden, a, zeta.clone()))?;
            let c = WRational::reduce(WLaurent::one(wden), den)?;
            TruncatedSeries::from_terms(order, [(0, c)])
        }
        Expansion::Geometric {
            shift_q,
            shift_w,
            sign,
            step_q,
            step_w,
            ratio,
        } => {
            let mut terms = Vec::new();
            let mut coeff = sign;
            let mut j = 0i64;
            while shift_q + j * step_q < order.num() {
                terms.push((
                    shift_q + j * step_q,
                    WRational::from_laurent(WLaurent::monomial(wden, shift_w + j * step_w, coeff.clone())),
                ));
                coeff = &coeff * &ratio;
                j += 1;
            }
            TruncatedSeries::from_terms(order, terms)
        }
    }
}

type Buckets = BTreeMap<(i64, u64), Vec<(i64, GaussRat)>>;

fn expand_point(p: &PointData, order: i64, out: &mut Buckets) -> Result<()> {
    if p.factors.len() > 64 {
        return Err(Error::Unsupported("more than 64 denominator factors".into()));
    }
    let mut mask = 0u64;
    let mut geos = Vec::new();
    for (idx, f) in p.factors.iter().enumerate() {
        match expansion_of(f)? {
            Expansion::Constant => mask |= 1 << idx,
            g => geos.push(g),
        }
    }
    // fold the fixed prefactors of the geometric factors into the start
    let mut start_q = p.q;
    let mut start_w = p.w;
    let mut start_c = p.phase.clone();
    for g in &geos {
        if let Expansion::Geometric { shift_q, shift_w, sign, .. } = g {
            start_q += shift_q;
            start_w += shift_w;
            start_c = &start_c * sign;
        }
    }
    // minimal q cost of the remaining factors is zero, so prune at order
    fn recurse(
        geos: &[Expansion],
        q: i64,
        w: i64,
        c: GaussRat,
        order: i64,
        mask: u64,
        out: &mut Buckets,
    ) {
        if q >= order {
            return;
        }
        match geos.split_first() {
            None => out.entry((q, mask)).or_default().push((w, c)),
            Some((Expansion::Geometric { step_q, step_w, ratio, .. }, rest)) => {
                let (mut q, mut w, mut c) = (q, w, c);
                while q < order {
                    recurse(rest, q, w, c.clone(), order, mask, out);
                    q += step_q;
                    w += step_w;
                    c = &c * ratio;
                }
            }
            Some((Expansion::Constant, rest)) => recurse(rest, q, w, c, order, mask, out),
        }
    }
    recurse(&geos, start_q, start_w, start_c, order, mask, out);
    Ok(())
}

/// Expands `spec` to `O(q^order)` over `Q(i)(w)` with w-grid `wden`.
pub fn expand_appell(spec: &AppellSpec, order: QExp, wden: u32) -> Result<TruncatedSeries<WRational>> {
    let qden = order.den();
    let points = spec.points_below(&order.to_rational())?;
    let partial: Vec<Buckets> = points
        .par_iter()
        .map(|k| {
            let data = spec.point_data(k, qden, wden)?;
            let mut b = Buckets::new();
            expand_point(&data, order.num(), &mut b)?;
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut merged = Buckets::new();
    for b in partial {
        for (key, mut v) in b {
            merged.entry(key).or_default().append(&mut v);
        }
    }
    let mut mask_dens: BTreeMap<u64, WLaurent> = BTreeMap::new();
    let mut by_q: BTreeMap<i64, Vec<WRational>> = BTreeMap::new();
    for ((q, mask), terms) in merged {
        let num = WLaurent::from_terms(wden, terms);
        if num.is_zero() {
            continue;
        }
        let value = if mask == 0 {
            WRational::from_laurent(num)
        } else {
            let den = match mask_dens.get(&mask) {
                Some(d) => d.clone(),
                None => {
                    let d = mask_denominator(spec, mask, wden)?;
                    mask_dens.insert(mask, d.clone());
                    d
                }
            };
            WRational::reduce(num, den)?
        };
        by_q.entry(q).or_default().push(value);
    }
    let mut terms = Vec::with_capacity(by_q.len());
    for (q, values) in by_q {
        if let Some(c) = WRational::sum_all(values)? {
            terms.push((q, c));
        }
    }
    TruncatedSeries::from_terms(order, terms)
}

fn mask_denominator(spec: &AppellSpec, mask: u64, wden: u32) -> Result<WLaurent> {
    let mut den = WLaurent::one(wden);
    for (idx, d) in spec.denoms.iter().enumerate() {
        if mask & (1 << idx) != 0 {
            let a = grid_numerator(&d.w_pow, wden)?;
            let zeta = GaussRat::unit_phase(&d.phase)?;
            let factor = WLaurent::one(wden).sub(&WLaurent::monomial(wden, a, zeta))?;
            den = den.mul(&factor)?;
        }
    }
    Ok(den)
}

/// Spec file layout. Rationals are strings in `p/q` syntax; integers may
/// also be given as JSON numbers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default = "default_version")]
    pub version: u32,
    pub gram: Vec<Vec<RatText>>,
    pub lin_q: Vec<RatText>,
    pub const_q: RatText,
    pub lin_w: Vec<RatText>,
    pub const_w: RatText,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lin_phase: Option<Vec<RatText>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub const_phase: Option<RatText>,
    #[serde(default)]
    pub denoms: Vec<DenomFile>,
}

fn default_version() -> u32 {
    SPEC_VERSION
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenomFile {
    pub m: Vec<RatText>,
    pub w_pow: RatText,
    pub q_off: RatText,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<RatText>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatText {
    Int(i64),
    Text(String),
}

impl RatText {
    pub fn parse(&self) -> Result<BigRational> {
        match self {
            RatText::Int(v) => Ok(BigRational::from_integer((*v).into())),
            RatText::Text(t) => parse_rational(t),
        }
    }

    fn of(x: &BigRational) -> RatText {
        RatText::Text(format_rational(x))
    }
}

fn parse_vec(v: &[RatText]) -> Result<Vec<BigRational>> {
    v.iter().map(RatText::parse).collect()
}

impl SpecFile {
    pub fn to_spec(&self) -> Result<AppellSpec> {
        if self.version != SPEC_VERSION {
            return Err(Error::Parse(format!("unsupported spec version {}", self.version)));
        }
        let gram = self.gram.iter().map(|row| parse_vec(row)).collect::<Result<Vec<_>>>()?;
        let n = gram.len();
        let spec = AppellSpec {
            gram,
            lin_q: parse_vec(&self.lin_q)?,
            const_q: self.const_q.parse()?,
            lin_w: parse_vec(&self.lin_w)?,
            const_w: self.const_w.parse()?,
            lin_phase: match &self.lin_phase {
                Some(v) => parse_vec(v)?,
                None => vec![BigRational::zero(); n],
            },
            const_phase: match &self.const_phase {
                Some(v) => v.parse()?,
                None => BigRational::zero(),
            },
            denoms: self
                .denoms
                .iter()
                .map(|d| {
                    Ok(Denominator {
                        m: parse_vec(&d.m)?,
                        w_pow: d.w_pow.parse()?,
                        q_off: d.q_off.parse()?,
                        phase: match &d.phase {
                            Some(p) => p.parse()?,
                            None => BigRational::zero(),
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &AppellSpec) -> SpecFile {
        let vec = |v: &[BigRational]| v.iter().map(RatText::of).collect::<Vec<_>>();
        let opt = |x: &BigRational| (!Zero::is_zero(x)).then(|| RatText::of(x));
        SpecFile {
            version: SPEC_VERSION,
            gram: spec.gram.iter().map(|row| vec(row)).collect(),
            lin_q: vec(&spec.lin_q),
            const_q: RatText::of(&spec.const_q),
            lin_w: vec(&spec.lin_w),
            const_w: RatText::of(&spec.const_w),
            lin_phase: spec.lin_phase.iter().any(|p| !Zero::is_zero(p)).then(|| vec(&spec.lin_phase)),
            const_phase: opt(&spec.const_phase),
            denoms: spec
                .denoms
                .iter()
                .map(|d| DenomFile {
                    m: vec(&d.m),
                    w_pow: RatText::of(&d.w_pow),
                    q_off: RatText::of(&d.q_off),
                    phase: opt(&d.phase),
                })
                .collect(),
        }
    }
}

impl AppellSpec {
    pub fn from_json(text: &str) -> Result<AppellSpec> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.to_spec()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpecFile::from_spec(self)).expect("spec serializes")
    }

    /// True when some denominator has a negative q-exponent at a point.
    pub fn has_negative_factor(&self, points: &[Vec<i64>]) -> bool {
        points.iter().any(|k| self.denoms.iter().any(|d| (dot(&d.m, k) + &d.q_off).is_negative()))
    }
}
