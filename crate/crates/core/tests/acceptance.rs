//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit status if
//! any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use num_rational::BigRational;
use rayon::prelude::*;

use qseries::appell::expand_appell;
use qseries::exponent::parse_rational;
use qseries::identity::{builtin_catalogue, detect, mutants, verify_with, Catalogue, Detection, LeafCache, MutantClass};
use qseries::lattice::QuadraticForm;
use qseries::numeric::{self, NumExpr, NumOptions, SAMPLE_TAU};
use qseries::{QExp, WRational, DEFAULT_Q_DEN, DEFAULT_W_DEN};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Exponents up to and including `q^n`.
fn through(n: i64) -> BigRational {
    parse_rational(&format!("{n}+1/{DEFAULT_Q_DEN}")).unwrap()
}

fn check_identities(cat: &Catalogue, cache: &LeafCache, names: &[&str], orders: &[BigRational]) -> Outcome {
    let mut bad = Vec::new();
    let mut ms = 0;
    let mut checks = 0;
    for name in names {
        let id = match cat.get(name) {
            Ok(id) => id,
            Err(e) => {
                bad.push(e.to_string());
                continue;
            }
        };
        for o in orders {
            let r = verify_with(id, Some(o), cache, DEFAULT_Q_DEN, DEFAULT_W_DEN);
            ms += r.wall_ms;
            checks += 1;
            if !r.passed() {
                bad.push(r.line());
            }
        }
    }
    if bad.is_empty() {
        outcome(true, format!("{} zero in {checks} checks, {ms} ms", names.join(", ")))
    } else {
        outcome(false, bad.join("; "))
    }
}

fn criterion_oracles() -> Outcome {
    let order = QExp::from_rational(&through(3), DEFAULT_Q_DEN).unwrap();
    let leaves = common::catalogue_leaf_specs();
    let mut bad = Vec::new();
    for (name, spec) in &leaves {
        let lib = match expand_appell(spec, order, DEFAULT_W_DEN) {
            Ok(s) => common::series_map(&s),
            Err(e) => {
                bad.push(format!("{name}: {e}"));
                continue;
            }
        };
        let oracle = common::brute_appell(spec, &order.to_rational(), DEFAULT_W_DEN);
        let keys: std::collections::BTreeSet<_> = lib.keys().chain(oracle.keys()).cloned().collect();
        for k in keys {
            let zero = WRational::zero(DEFAULT_W_DEN);
            let a = lib.get(&k).unwrap_or(&zero);
            let b = oracle.get(&k).unwrap_or(&zero);
            if !a.sub(b).map(|d| d.is_zero()).unwrap_or(false) {
                bad.push(format!("{name} at q^{k}"));
            }
        }
    }
    let mut forms = 0;
    for (_, spec) in &leaves {
        let form = QuadraticForm::new(spec.gram.clone(), spec.lin_q.clone(), spec.const_q.clone()).unwrap();
        let b = common::safe_box(&spec.gram, &spec.lin_q, &spec.const_q, &common::ri(6));
        for twice in 1..=12 {
            let bound = common::r(twice, 2);
            let mut lib = form.enumerate_below(&bound).unwrap();
            lib.sort();
            if lib != common::box_scan(&spec.gram, &spec.lin_q, &spec.const_q, &bound, b) {
                bad.push(format!("enumeration differs for gram {:?} below {bound}", spec.gram));
            }
        }
        forms += 1;
    }
    if bad.is_empty() {
        outcome(
            true,
            format!("{} catalogue leaves agree through q^3; enumeration agrees on {forms} forms for bounds 1/2..6", leaves.len()),
        )
    } else {
        outcome(false, bad.join("; "))
    }
}

fn criterion_residues() -> Outcome {
    let cat = builtin_catalogue().unwrap();
    let id = cat.get("thm1-normalized").unwrap();
    let opts = NumOptions {
        prec: 256,
        order: 40,
    };
    let tau = numeric::sample_tau(opts.prec);
    let q_abs = (-2.0 * std::f64::consts::PI * tau.imag().to_f64()).exp();
    let mut f = NumExpr::new(&id.lhs, &tau, opts).unwrap();
    let mut bad = Vec::new();
    let mut worst_rel: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    let mut removable = None;
    for m in 0..3 {
        for n in 0..3 {
            let t = Instant::now();
            let row = match numeric::table_row(&mut f, &tau, m, n, opts, 1e-12) {
                Ok(r) => r,
                Err(e) => {
                    bad.push(format!("({m},{n}): {e}"));
                    continue;
                }
            };
            let secs = t.elapsed().as_secs_f64();
            slowest = slowest.max(secs);
            if secs >= 60.0 {
                bad.push(format!("({m},{n}) took {secs:.1} s"));
            }
            if m == 0 && n == 0 {
                removable = Some(row.rel_diff);
            } else {
                worst_rel = worst_rel.max(row.rel_diff);
            }
            if !row.pass {
                bad.push(format!("({m},{n}) computed {} expected {} rel {:.1e}", row.computed, row.expected, row.rel_diff));
            }
        }
    }
    let detail = format!(
        "tau = {SAMPLE_TAU} (|q| = {q_abs:.3}), 256 bits, order 40: worst relative difference {worst_rel:.1e}, |res(0,0)| = {:.1e}, slowest point {slowest:.1} s",
        removable.unwrap_or(f64::NAN)
    );
    if bad.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; {}", bad.join("; ")))
    }
}

fn criterion_mutants(cat: &Catalogue, cache: &LeafCache) -> (Outcome, String) {
    let orders = [1, 2, 4, 6];
    let mut bad = Vec::new();
    let mut total = 0;
    let mut info = Vec::new();
    for name in ["thm1", "thm2", "thm3"] {
        let id = cat.get(name).unwrap();
        let ms = mutants(id);
        let results: Vec<(MutantClass, String, Detection)> = ms
            .par_iter()
            .map(|m| (m.class, m.description.clone(), detect(m, &orders, cache)))
            .collect();
        let mut coeff_total = 0;
        let mut coeff_missed = Vec::new();
        for (class, desc, det) in results {
            let caught = matches!(det, Detection::Caught { order, .. } if order <= 6);
            match class {
                MutantClass::Sign | MutantClass::Exponent => {
                    total += 1;
                    if !caught {
                        bad.push(format!("{name} [{desc}]: {det:?}"));
                    }
                }
                MutantClass::Coefficient => {
                    coeff_total += 1;
                    if !caught {
                        coeff_missed.push(desc);
                    }
                }
            }
        }
        info.push(format!(
            "{name}: {}/{coeff_total} caught by q^6{}",
            coeff_total - coeff_missed.len(),
            if coeff_missed.is_empty() {
                String::new()
            } else {
                format!(" (not caught: {})", coeff_missed.join(", "))
            }
        ));
    }
    let o = if bad.is_empty() {
        outcome(true, format!("{total} sign/exponent mutants of thm1, thm2, thm3 all fail by q^6"))
    } else {
        outcome(false, format!("{} of {total} not caught: {}", bad.len(), bad.join("; ")))
    };
    (o, format!("parameter-coefficient mutants (informational): {}", info.join("; ")))
}

fn main() -> ExitCode {
    let cat = builtin_catalogue().expect("built-in catalogue loads");
    let cache = LeafCache::new();
    let shift_orders: Vec<BigRational> = (1..=10).map(common::ri).chain([through(10)]).collect();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            "first theorem, w symbolic, through q^6",
            Box::new(|| check_identities(&cat, &cache, &["thm1"], &[through(6)])),
        ),
        (
            "second and third theorems through q^6",
            Box::new(|| check_identities(&cat, &cache, &["thm2", "thm3"], &[through(6)])),
        ),
        (
            "lemma identities through q^6, proof identities through q^5",
            Box::new(|| {
                let a = check_identities(&cat, &cache, &["eq2.11", "eq2.12"], &[through(6)]);
                let b = check_identities(
                    &cat,
                    &cache,
                    &["thm2-first-id", "thm2-second-id", "thm2-third-id", "thm2-fourth-id"],
                    &[through(5)],
                );
                outcome(a.pass && b.pass, format!("{}; {}", a.detail, b.detail))
            }),
        ),
        (
            "elliptic shift laws exact at every order up to q^10",
            Box::new(|| {
                check_identities(
                    &cat,
                    &cache,
                    &["genshift-1", "genshift-2", "bshift-0", "bshift-1", "bshift2-0", "bshift2-1", "rhs-shift"],
                    &shift_orders,
                )
            }),
        ),
        (
            "theta derivative at zero against eta^3 through q^20",
            Box::new(|| check_identities(&cat, &cache, &["theta-prime"], &[through(20)])),
        ),
        (
            "theta sum form equals product form through q^20",
            Box::new(|| check_identities(&cat, &cache, &["theta-sum-product"], &[through(20)])),
        ),
        ("oracle equivalence", Box::new(criterion_oracles)),
        ("numeric residue table", Box::new(criterion_residues)),
    ];
    let mut all = true;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        all &= o.pass;
        println!(
            "criterion {} [{}] {title}: {} ({:.1} s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    let t = Instant::now();
    let (o, info) = criterion_mutants(&cat, &cache);
    all &= o.pass;
    println!(
        "criterion 9 [{}] mutation sensitivity: {} ({:.1} s)",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        t.elapsed().as_secs_f64()
    );
    println!("  note: {info}");
    if all {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
