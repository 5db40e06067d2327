mod common;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use common::*;
use qseries::appell::expand_appell;
use qseries::arg::ThetaArg;
use qseries::lattice::QuadraticForm;
use qseries::rings::GaussRat;
use qseries::specfun::{at_w_one, b_rk, eta, euler_derivative, theta, ThetaForm};
use qseries::QExp;

const D: u32 = 24;
const E: u32 = 6;

fn upto(n: i64) -> QExp {
    // through q^n inclusive on the D grid
    QExp::new(n * D as i64 + 1, D)
}

#[test]
fn appell_expansion_matches_box_scan_for_catalogue_leaves() {
    let leaves = catalogue_leaf_specs();
    assert!(leaves.len() >= 20, "only {} leaves", leaves.len());
    let order = upto(3);
    for (name, spec) in &leaves {
        let lib = series_map(&expand_appell(spec, order, E).unwrap());
        let oracle = brute_appell(spec, &order.to_rational(), E);
        let keys: std::collections::BTreeSet<_> = lib.keys().chain(oracle.keys()).cloned().collect();
        for k in keys {
            let a = lib.get(&k).cloned().unwrap_or_else(|| qseries::WRational::zero(E));
            let b = oracle.get(&k).cloned().unwrap_or_else(|| qseries::WRational::zero(E));
            assert!(a.sub(&b).unwrap().is_zero(), "{name} at q^{k}: library {a}, box scan {b}");
        }
    }
}

fn test_forms() -> Vec<(Vec<Vec<BigRational>>, Vec<BigRational>, BigRational)> {
    let mut forms = vec![
        (vec![vec![ri(1)]], vec![r(1, 2)], r(1, 8)),
        (vec![vec![ri(6)]], vec![ri(-3)], ri(0)),
        (vec![vec![ri(2), ri(1)], vec![ri(1), ri(2)]], vec![ri(0), ri(0)], ri(0)),
        (vec![vec![ri(2), ri(1)], vec![ri(1), ri(2)]], vec![ri(1), ri(1)], r(1, 3)),
        (vec![vec![ri(6), ri(3)], vec![ri(3), ri(2)]], vec![ri(-1), r(-1, 2)], r(1, 3)),
        (vec![vec![ri(4), ri(1)], vec![ri(1), ri(2)]], vec![r(1, 3), ri(-2)], ri(0)),
        (
            vec![vec![ri(2), ri(1), ri(0)], vec![ri(1), ri(2), ri(1)], vec![ri(0), ri(1), ri(2)]],
            vec![ri(1), ri(0), r(-1, 2)],
            ri(0),
        ),
    ];
    for (_, s) in catalogue_leaf_specs() {
        forms.push((s.gram.clone(), s.lin_q.clone(), s.const_q.clone()));
    }
    forms
}

#[test]
fn lattice_enumeration_matches_box_scan_up_to_six() {
    for (gram, lin, c) in test_forms() {
        let form = QuadraticForm::new(gram.clone(), lin.clone(), c.clone()).unwrap();
        let b = safe_box(&gram, &lin, &c, &ri(6));
        for twice in 1..=12 {
            let bound = r(twice, 2);
            let mut lib = form.enumerate_below(&bound).unwrap();
            lib.sort();
            let oracle = box_scan(&gram, &lin, &c, &bound, b);
            assert_eq!(lib, oracle, "gram {gram:?} lin {lin:?} bound {bound}");
        }
    }
}

#[test]
fn lattice_minimum_matches_box_scan() {
    for (gram, lin, c) in test_forms() {
        let form = QuadraticForm::new(gram.clone(), lin.clone(), c.clone()).unwrap();
        let b = safe_box(&gram, &lin, &c, &(&c + ri(1)));
        let oracle = cube(gram.len(), b).iter().map(|k| form_value(&gram, &lin, &c, k)).min().unwrap();
        assert_eq!(form.lattice_minimum().unwrap(), oracle, "gram {gram:?} lin {lin:?}");
    }
}

#[test]
fn eta_matches_product_definition() {
    let s = eta(upto(20)).unwrap();
    let lib = series_map(&s);
    let mut oracle = BTreeMap::new();
    for (j, c) in eta_product(21).into_iter().enumerate() {
        if c != 0 {
            oracle.insert(ri(j as i64) + r(1, 24), ri(c));
        }
    }
    assert_eq!(lib, oracle);
}

#[test]
fn theta_sum_form_matches_direct_sum() {
    let order = upto(20);
    let s = theta(&ThetaArg::identity(), order, ThetaForm::Sum, E).unwrap();
    assert_eq!(laurent_map(&s), theta_direct(&order.to_rational()));
}

#[test]
fn theta_product_form_matches_direct_sum() {
    let order = upto(12);
    let s = theta(&ThetaArg::identity(), order, ThetaForm::Product, E).unwrap();
    assert_eq!(laurent_map(&s), theta_direct(&order.to_rational()));
}

#[test]
fn cubic_thetas_match_explicit_double_sums() {
    let order = upto(8);
    for k in [0, 1] {
        let s = b_rk(3, k, &ThetaArg::identity(), order, E).unwrap();
        assert_eq!(laurent_map(&s), cubic_theta_direct(k, &order.to_rational()), "k = {k}");
    }
}

#[test]
fn hexagonal_lattice_counts() {
    let s = b_rk(3, 0, &ThetaArg::identity(), upto(8), E).unwrap();
    let at_one = series_map(&at_w_one(&s));
    let expect: BTreeMap<BigRational, GaussRat> = [(0, 1), (1, 6), (3, 6), (4, 6), (7, 12)]
        .into_iter()
        .map(|(e, c)| (ri(e), GaussRat::from_int(c)))
        .collect();
    assert_eq!(at_one, expect);
}

#[test]
fn jacobi_cube_identity_oracle() {
    // sum_{r in 1/2+Z} (-1)^{r-1/2} r q^{r^2/2} against q^{1/8} prod (1-q^n)^3,
    // both computed naively
    let mut lhs: BTreeMap<BigRational, BigRational> = BTreeMap::new();
    for n in -50i64..50 {
        let rr = r(2 * n + 1, 2);
        let q = &rr * &rr / ri(2);
        if q < ri(20) {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            *lhs.entry(q).or_insert_with(BigRational::zero) += rr * ri(sign);
        }
    }
    lhs.retain(|_, v| !v.is_zero());
    let mut rhs = BTreeMap::new();
    for (j, c) in eta_cubed_product(21).into_iter().enumerate() {
        let e = ri(j as i64) + r(1, 8);
        if c != 0 && e < ri(20) {
            rhs.insert(e, ri(c));
        }
    }
    assert_eq!(lhs, rhs);
}

#[test]
fn theta_derivative_at_zero_is_i_eta_cubed() {
    let order = upto(20);
    let th = theta(&ThetaArg::identity(), order, ThetaForm::Sum, E).unwrap();
    let lib = series_map(&at_w_one(&euler_derivative(&th)));
    let mut oracle = BTreeMap::new();
    for (j, c) in eta_cubed_product(21).into_iter().enumerate() {
        let e = ri(j as i64) + r(1, 8);
        if c != 0 && e < order.to_rational() {
            oracle.insert(e, &GaussRat::i() * &GaussRat::from_int(c));
        }
    }
    assert_eq!(lib, oracle);
}
