use rug::{Complex, Float};

use qseries::arg::ThetaArg;
use qseries::identity::{builtin_catalogue, Expr};
use qseries::numeric::*;
use qseries::specfun::ThetaForm;

const PREC: u32 = 160;

fn opts() -> NumOptions {
    NumOptions { prec: PREC, order: 30 }
}

fn c(text: &str) -> Complex {
    parse_complex(text, PREC).unwrap()
}

fn e2pi(x: &Complex) -> Complex {
    let two_pi_i = Complex::with_val(PREC, (0, Float::with_val(PREC, rug::float::Constant::Pi) * 2u32));
    Complex::with_val(PREC, x * &two_pi_i).exp()
}

fn absdiff(a: &Complex, b: &Complex) -> f64 {
    Complex::with_val(PREC, a - b).abs().real().to_f64()
}

fn theta_expr() -> Expr {
    Expr::Theta {
        arg: ThetaArg::identity(),
        form: ThetaForm::Sum,
    }
}

/// `q^{1/24} prod (1 - q^n)` summed directly.
fn eta_direct(tau: &Complex) -> Complex {
    let q = e2pi(tau);
    let mut acc = e2pi(&Complex::with_val(PREC, tau / 24u32));
    let mut qn = q.clone();
    for _ in 0..400 {
        acc *= Complex::with_val(PREC, 1 - &qn);
        qn *= &q;
    }
    acc
}

/// `i sum (-1)^{r-1/2} q^{r^2/2} w^r` summed directly.
fn theta_direct(z: &Complex, tau: &Complex) -> Complex {
    let mut acc = Complex::with_val(PREC, 0);
    for n in -60i32..60 {
        let r = Float::with_val(PREC, 2 * n + 1) / 2u32;
        let half_r2 = Float::with_val(PREC, &r * &r) / 2u32;
        let expo = Complex::with_val(PREC, tau * &half_r2) + Complex::with_val(PREC, z * &r);
        let term = e2pi(&expo);
        if n % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc * Complex::with_val(PREC, (0, 1))
}

#[test]
fn rejects_lower_half_plane_and_bad_text() {
    assert!(parse_complex("1;2", PREC).is_err());
    assert!(parse_complex("abc", PREC).is_err());
    assert!(NumExpr::new(&Expr::Eta, &c("0.1,-0.5"), opts()).is_err());
    assert!(NumExpr::new(&Expr::Eta, &c("0.1,0"), opts()).is_err());
}

#[test]
fn eta_matches_product() {
    for t in ["0.1,0.48", "-0.3,1.2", "0.45,0.3"] {
        let tau = c(t);
        let mut f = NumExpr::new(&Expr::Eta, &tau, opts()).unwrap();
        let v = f.eval(&c("0,0")).unwrap();
        let d = absdiff(&v.value, &eta_direct(&tau));
        // the reported error must cover the true one
        assert!(d <= v.err.max(1e-40), "tau {t}: diff {d:e}, reported {:e}", v.err);
        assert!(v.err < 1e-20);
    }
}

#[test]
fn theta_matches_direct_sum() {
    let tau = c("0.1,0.48");
    let mut f = NumExpr::new(&theta_expr(), &tau, opts()).unwrap();
    for z in ["0.137,0.061", "-0.4,0.2", "0.25,-0.1"] {
        let v = f.eval(&c(z)).unwrap();
        let d = absdiff(&v.value, &theta_direct(&c(z), &tau));
        assert!(d < 1e-35, "z {z}: diff {d:e}");
    }
}

#[test]
fn theta_quasi_periodicity_numerically() {
    // theta(z + tau) = -q^{-1/2} w^{-1} theta(z)
    let tau = c("0.1,0.48");
    let z = c("0.21,0.03");
    let mut f = NumExpr::new(&theta_expr(), &tau, opts()).unwrap();
    let shifted = f.eval(&Complex::with_val(PREC, &z + &tau)).unwrap().value;
    let base = f.eval(&z).unwrap().value;
    let factor = e2pi(&Complex::with_val(PREC, -(Complex::with_val(PREC, &tau / 2u32) + &z)));
    let expect = -(base * factor);
    assert!(absdiff(&shifted, &expect) < 1e-30 * Complex::with_val(PREC, expect.abs_ref()).real().to_f64());
}

#[test]
fn normalized_first_theorem_holds_off_the_poles() {
    let cat = builtin_catalogue().unwrap();
    let id = cat.get("thm1-normalized").unwrap();
    let tau = sample_tau(PREC);
    let mut l = NumExpr::new(&id.lhs, &tau, opts()).unwrap();
    let mut r = NumExpr::new(&id.rhs, &tau, opts()).unwrap();
    for z in ["0.137,0.061", "0.41,-0.05"] {
        let a = l.eval(&c(z)).unwrap();
        let b = r.eval(&c(z)).unwrap();
        let d = absdiff(&a.value, &b.value);
        assert!(d < 1e-25 * a.abs().max(1.0), "z {z}: {d:e}");
    }
}

#[test]
fn residue_of_reciprocal_theta() {
    // 1/theta has a simple pole at 0 with residue 1/theta'(0) = -1/(2 pi eta^3)
    let tau = c("0.1,0.48");
    let mut f = NumExpr::new(&Expr::Pow(Box::new(theta_expr()), -1), &tau, opts()).unwrap();
    let res = residue(&mut f, &c("0,0"), 64, 512).unwrap();
    let pi = Float::with_val(PREC, rug::float::Constant::Pi);
    let e = eta_direct(&tau);
    let expect = Complex::with_val(PREC, -1) / (Complex::with_val(PREC, &e * &e) * &e * pi * 2u32);
    let rel = absdiff(&res.value, &expect) / Complex::with_val(PREC, expect.abs_ref()).real().to_f64();
    assert!(rel < 1e-20, "rel {rel:e}");
    assert!(!res.removable && !res.higher_order);
}

#[test]
fn double_pole_is_flagged() {
    let tau = c("0.1,0.48");
    let mut f = NumExpr::new(&Expr::Pow(Box::new(theta_expr()), -2), &tau, opts()).unwrap();
    let res = residue(&mut f, &c("0,0"), 64, 512).unwrap();
    assert!(res.higher_order);
}

#[test]
fn one_residue_row_against_closed_form() {
    let cat = builtin_catalogue().unwrap();
    let id = cat.get("thm1-normalized").unwrap();
    let tau = sample_tau(PREC);
    let mut f = NumExpr::new(&id.lhs, &tau, opts()).unwrap();
    let row = table_row(&mut f, &tau, 1, 1, opts(), 1e-12).unwrap();
    assert!(row.pass, "{row:?}");
}
