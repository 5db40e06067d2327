//! `qseries` command line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qseries::appell::{expand_appell, AppellSpec};
use qseries::arg::ThetaArg;
use qseries::exponent::{format_rational, parse_rational, rat};
use qseries::identity::{builtin_catalogue, verify_with, Catalogue, Expr, Identity, Kind, LeafCache, VerifyReport};
use qseries::json::series_to_json;
use qseries::numeric::{self, NumExpr, NumOptions, TableRow, REMOVABLE_TOL, SAMPLE_TAU};
use qseries::rings::complex::format as format_complex;
use qseries::specfun::{b_rk, b_spec, eta, theta, theta_spec, ThetaForm};
use qseries::{Error, QExp, DEFAULT_Q_DEN, DEFAULT_W_DEN};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const DIGITS: usize = 25;

#[derive(Parser, Debug)]
#[command(name = "qseries", version, about = "Exact q-series expansion and identity verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand eta, theta, b_{3,k} or an Appell spec file as a truncated series.
    Expand(ExpandArgs),
    /// Verify catalogue identities. Exit status 0 iff every identity passes.
    Verify(VerifyArgs),
    /// Contour residues of an identity's left side at the points m tau/3 + n/3.
    Residue(ResidueArgs),
    /// Evaluate both sides of an identity numerically at one point.
    Eval(EvalArgs),
    /// List the catalogue.
    List(ListArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Function {
    Eta,
    Theta,
    B3,
}

#[derive(Args, Debug)]
struct Grid {
    /// q-exponent grid denominator D.
    #[arg(long = "q-den", default_value_t = DEFAULT_Q_DEN)]
    q_den: u32,
    /// w-exponent grid denominator E.
    #[arg(long = "w-den", default_value_t = DEFAULT_W_DEN)]
    w_den: u32,
}

#[derive(Args, Debug)]
struct CatalogueArgs {
    /// Load a catalogue from a specs file and an identities file instead of
    /// the built-in one.
    #[arg(long, num_args = 2, value_names = ["SPECS", "IDENTITIES"])]
    catalogue: Option<Vec<PathBuf>>,
}

#[derive(Args, Debug)]
struct ExpandArgs {
    /// Built-in function.
    #[arg(long = "fn", value_enum, conflicts_with = "spec", required_unless_present = "spec")]
    function: Option<Function>,
    /// Parameter k of b_{3,k}.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    k: i64,
    /// Appell spec file (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Truncation order as an exact rational (`3`, `5/2`, `2+1/3`), counted
    /// from the leading prefactor q^c of the function: eta c = 1/24,
    /// theta c = 1/8, spec files c = const_q.
    #[arg(long, allow_negative_numbers = true)]
    order: String,
    /// Read --order as an absolute exponent.
    #[arg(long)]
    absolute: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    grid: Grid,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Identity name (see `qseries list`).
    #[arg(long, required_unless_present = "all", conflicts_with = "all")]
    identity: Option<String>,
    /// Every non-mutant catalogue identity.
    #[arg(long)]
    all: bool,
    /// Truncation order (exact rational); default is each identity's own.
    #[arg(long)]
    order: Option<String>,
    /// Worker threads for --all (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Include wall-clock times (makes output non-reproducible).
    #[arg(long)]
    timings: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    grid: Grid,
    #[command(flatten)]
    catalogue: CatalogueArgs,
}

#[derive(Args, Debug)]
struct NumericArgs {
    /// Working precision in bits.
    #[arg(long, env = "QSERIES_PREC", default_value_t = numeric::DEFAULT_PREC)]
    prec: u32,
    /// Lattice sums keep effective q-exponents below this order.
    #[arg(long, default_value_t = numeric::DEFAULT_ORDER)]
    order: u32,
    /// tau as RE,IM with IM > 0.
    #[arg(long, default_value = SAMPLE_TAU, allow_hyphen_values = true)]
    tau: String,
}

#[derive(Args, Debug)]
#[group(id = "what", required = true, multiple = false, args = ["table", "point"])]
struct ResidueArgs {
    /// Identity whose left side is examined; when the catalogue has a
    /// `NAME-normalized` entry its left side is used instead.
    #[arg(long, default_value = "thm1")]
    identity: String,
    /// All nine points 0 <= m, n <= 2 with closed form comparison.
    #[arg(long)]
    table: bool,
    /// A single point M,N.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Relative tolerance for the closed form comparison.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    num: NumericArgs,
    #[command(flatten)]
    catalogue: CatalogueArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    identity: String,
    /// z as RE,IM.
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    num: NumericArgs,
    #[command(flatten)]
    catalogue: CatalogueArgs,
}

#[derive(Args, Debug)]
struct ListArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    catalogue: CatalogueArgs,
}

/// An error with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn eval(e: Error) -> Self {
        Failure {
            code: EXIT_FAIL,
            message: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Expand(a) => cmd_expand(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Residue(a) => cmd_residue(a),
        Command::Eval(a) => cmd_eval(a),
        Command::List(a) => cmd_list(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn cmd_expand(a: ExpandArgs) -> Outcome {
    let order = parse_rational(&a.order).map_err(|e| Failure::usage(format!("--order: {e}")))?;
    let spec = match &a.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            Some(AppellSpec::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let offset = match (&spec, a.function) {
        (Some(s), _) => s.const_q.clone(),
        (None, Some(Function::Eta)) => rat(1, 24),
        (None, Some(Function::Theta)) => theta_spec().const_q,
        (None, Some(Function::B3)) => b_spec(3, a.k).map_err(Failure::eval)?.const_q,
        (None, None) => unreachable!("clap requires --fn or --spec"),
    };
    let absolute = if a.absolute { order } else { order + offset };
    let (qden, wden) = (a.grid.q_den, a.grid.w_den);
    if qden == 0 || wden == 0 {
        return Err(Failure::usage("grid denominators must be positive"));
    }
    let o = QExp::from_rational(&absolute, qden).map_err(|e| Failure::usage(format!("--order: {e}")))?;
    let id = ThetaArg::identity();
    let (text, value) = match (&spec, a.function) {
        (Some(s), _) => {
            let series = expand_appell(s, o, wden).map_err(Failure::eval)?;
            (series.to_string(), series_to_json(&series))
        }
        (None, Some(Function::Eta)) => {
            let series = eta(o).map_err(Failure::eval)?;
            (series.to_string(), series_to_json(&series))
        }
        (None, Some(Function::Theta)) => {
            let series = theta(&id, o, ThetaForm::Sum, wden).map_err(Failure::eval)?;
            (series.to_string(), series_to_json(&series))
        }
        (None, Some(Function::B3)) => {
            let series = b_rk(3, a.k, &id, o, wden).map_err(Failure::eval)?;
            (series.to_string(), series_to_json(&series))
        }
        (None, None) => unreachable!(),
    };
    match a.format {
        Format::Text => println!("{text}"),
        Format::Json => print_json(&value),
    }
    Ok(0)
}

fn load_catalogue(c: &CatalogueArgs) -> std::result::Result<Catalogue, Failure> {
    match &c.catalogue {
        None => builtin_catalogue().map_err(Failure::eval),
        Some(paths) => {
            let read = |p: &PathBuf| std::fs::read_to_string(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())));
            let specs = read(&paths[0])?;
            let ids = read(&paths[1])?;
            Catalogue::from_json(&specs, &ids).map_err(|e| Failure::usage(e.to_string()))
        }
    }
}

fn listing(cat: &Catalogue) -> String {
    let mut out = String::new();
    for id in &cat.identities {
        let marker = if id.mutant { "  [mutant]" } else { "" };
        out.push_str(&format!(
            "  {:<22} {:<6} {:<12} {}{marker}\n",
            id.name,
            id.kind_name(),
            id.location,
            id.description
        ));
    }
    out
}

fn lookup<'a>(cat: &'a Catalogue, name: &str) -> std::result::Result<&'a Identity, Failure> {
    cat.get(name)
        .map_err(|_| Failure::usage(format!("unknown identity `{name}`; the catalogue has:\n{}", listing(cat).trim_end())))
}

fn report_json(r: &VerifyReport, timings: bool) -> Value {
    let mut v = serde_json::to_value(r).expect("serializable");
    if !timings {
        v.as_object_mut().expect("object").remove("wall_ms");
    }
    v
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let cat = load_catalogue(&a.catalogue)?;
    let order = match &a.order {
        Some(o) => Some(parse_rational(o).map_err(|e| Failure::usage(format!("--order: {e}")))?),
        None => None,
    };
    let targets: Vec<&Identity> = if a.all {
        cat.genuine().collect()
    } else {
        vec![lookup(&cat, a.identity.as_deref().expect("clap requires --identity"))?]
    };
    let cache = LeafCache::new();
    let run = || -> Vec<VerifyReport> {
        use rayon::prelude::*;
        targets
            .par_iter()
            .map(|id| verify_with(id, order.as_ref(), &cache, a.grid.q_den, a.grid.w_den))
            .collect()
    };
    let reports = match a.jobs {
        Some(0) => return Err(Failure::usage("--jobs must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::usage(e.to_string()))?
            .install(run),
        None => run(),
    };
    let passed = reports.iter().filter(|r| r.passed()).count();
    match a.format {
        Format::Text => {
            for r in &reports {
                if a.timings {
                    println!("{}  [{} ms]", r.line(), r.wall_ms);
                } else {
                    println!("{}", r.line());
                }
            }
            if reports.len() > 1 {
                println!("{passed}/{} passed", reports.len());
            }
        }
        Format::Json => print_json(&json!({
            "schema": "qseries.verify/1",
            "passed": passed,
            "total": reports.len(),
            "reports": reports.iter().map(|r| report_json(r, a.timings)).collect::<Vec<_>>(),
        })),
    }
    Ok(if passed == reports.len() { 0 } else { EXIT_FAIL })
}

fn parse_tau(n: &NumericArgs) -> std::result::Result<rug::Complex, Failure> {
    let tau = numeric::parse_complex(&n.tau, n.prec).map_err(|e| Failure::usage(format!("--tau: {e}")))?;
    if *tau.imag() <= 0 {
        return Err(Failure::usage("--tau: the imaginary part must be positive"));
    }
    Ok(tau)
}

fn num_options(n: &NumericArgs) -> std::result::Result<NumOptions, Failure> {
    if n.prec < 64 {
        return Err(Failure::usage("--prec must be at least 64 bits"));
    }
    Ok(NumOptions {
        prec: n.prec,
        order: n.order,
    })
}

fn parse_point(text: &str) -> std::result::Result<(i64, i64), Failure> {
    let bad = || Failure::usage(format!("--point: expected M,N, got `{text}`"));
    let (m, n) = text.split_once(',').ok_or_else(bad)?;
    Ok((m.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
}

fn row_line(r: &TableRow) -> String {
    let verdict = if r.pass { "ok" } else { "MISMATCH" };
    if r.m == 0 && r.n == 0 {
        return format!(
            "({}, {})  {} ±{:.1e}  removable: {}  {}",
            r.m,
            r.n,
            r.computed,
            r.err,
            if r.removable { "yes" } else { "no" },
            verdict
        );
    }
    format!(
        "({}, {})  computed {} ±{:.1e}  expected {}  rel diff {:.1e}  {}",
        r.m, r.n, r.computed, r.err, r.expected, r.rel_diff, verdict
    )
}

fn cmd_residue(a: ResidueArgs) -> Outcome {
    let cat = load_catalogue(&a.catalogue)?;
    let base = lookup(&cat, &a.identity)?;
    let normalized = format!("{}-normalized", base.name);
    let id = cat.get(&normalized).unwrap_or(base);
    let opts = num_options(&a.num)?;
    let tau = parse_tau(&a.num)?;
    let point = a.point.as_deref().map(parse_point).transpose()?;
    let closed_form = id.name == "thm1-normalized";
    if a.table && !closed_form {
        return Err(Failure::usage(format!("no closed-form residues are known for `{}`", base.name)));
    }
    let mut f = NumExpr::new(&id.lhs, &tau, opts).map_err(Failure::eval)?;
    let header = json!({
        "schema": "qseries.residue/1",
        "identity": id.name,
        "tau": a.num.tau,
        "prec": opts.prec,
        "order": opts.order,
    });
    let rows: Vec<TableRow> = if closed_form {
        let points: Vec<(i64, i64)> = match point {
            Some(p) => vec![p],
            None => (0..3).flat_map(|m| (0..3).map(move |n| (m, n))).collect(),
        };
        points
            .into_iter()
            .map(|(m, n)| numeric::table_row(&mut f, &tau, m, n, opts, a.tol))
            .collect::<qseries::Result<_>>()
            .map_err(Failure::eval)?
    } else {
        let (m, n) = point.expect("--table was rejected above");
        let r = numeric::residue(&mut f, &numeric::pole(&tau, m, n), 64, 1024).map_err(Failure::eval)?;
        let computed = format_complex(&r.value, DIGITS);
        let rel_diff = r.value.clone().abs().real().to_f64();
        vec![TableRow {
            m,
            n,
            computed,
            expected: "-".into(),
            err: r.err,
            rel_diff,
            removable: r.removable,
            pass: !r.higher_order,
        }]
    };
    match a.format {
        Format::Text => {
            println!(
                "residues of {} lhs at m tau/3 + n/3, tau = {}, prec = {}, order = {} (tail bounds are heuristic)",
                id.name, a.num.tau, opts.prec, opts.order
            );
            for r in &rows {
                if closed_form {
                    println!("{}", row_line(r));
                } else {
                    println!(
                        "({}, {})  {} ±{:.1e}{}",
                        r.m,
                        r.n,
                        r.computed,
                        r.err,
                        if r.removable { "  removable" } else { "" }
                    );
                }
            }
        }
        Format::Json => {
            let mut v = header;
            v["removable_tol"] = json!(REMOVABLE_TOL);
            v["rows"] = serde_json::to_value(&rows).expect("serializable");
            print_json(&v);
        }
    }
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { EXIT_FAIL })
}

fn numeric_sides(id: &Identity) -> qseries::Result<(Expr, Expr)> {
    Ok(match &id.kind {
        Kind::Series => (id.lhs.clone(), id.rhs.clone()),
        Kind::Shift(arg) => (id.lhs.substitute(arg)?, Expr::Prod(vec![id.rhs.clone(), id.lhs.clone()])),
        Kind::Family { .. } => {
            return Err(Error::Unsupported(
                "parametrized families have no numeric value; verify them symbolically".into(),
            ))
        }
    })
}

fn cmd_eval(a: EvalArgs) -> Outcome {
    let cat = load_catalogue(&a.catalogue)?;
    let id = lookup(&cat, &a.identity)?;
    let opts = num_options(&a.num)?;
    let tau = parse_tau(&a.num)?;
    let z = numeric::parse_complex(&a.z, opts.prec).map_err(|e| Failure::usage(format!("--z: {e}")))?;
    let (l, r) = numeric_sides(id).map_err(Failure::eval)?;
    let lv = NumExpr::new(&l, &tau, opts).and_then(|mut f| f.eval(&z)).map_err(Failure::eval)?;
    let rv = NumExpr::new(&r, &tau, opts).and_then(|mut f| f.eval(&z)).map_err(Failure::eval)?;
    let diff = rug::Complex::with_val(opts.prec, &lv.value - &rv.value);
    let diff_abs = diff.clone().abs().real().to_f64();
    let scale = lv.abs().max(rv.abs());
    let allowed = lv.err + rv.err + 1e-12 * scale;
    let agree = diff_abs <= allowed;
    match a.format {
        Format::Text => {
            println!("{} at z = {}, tau = {}, prec = {}", id.name, a.z, a.num.tau, opts.prec);
            println!("lhs  {} ±{:.1e}", format_complex(&lv.value, DIGITS), lv.err);
            println!("rhs  {} ±{:.1e}", format_complex(&rv.value, DIGITS), rv.err);
            println!("|lhs - rhs| = {diff_abs:.3e}  {}", if agree { "agree" } else { "DISAGREE" });
        }
        Format::Json => print_json(&json!({
            "schema": "qseries.eval/1",
            "identity": id.name,
            "z": a.z,
            "tau": a.num.tau,
            "prec": opts.prec,
            "lhs": {"value": format_complex(&lv.value, DIGITS), "err": lv.err},
            "rhs": {"value": format_complex(&rv.value, DIGITS), "err": rv.err},
            "abs_diff": diff_abs,
            "agree": agree,
        })),
    }
    Ok(if agree { 0 } else { EXIT_FAIL })
}

fn cmd_list(a: ListArgs) -> Outcome {
    let cat = load_catalogue(&a.catalogue)?;
    match a.format {
        Format::Text => print!("{}", listing(&cat)),
        Format::Json => print_json(&Value::Array(
            cat.identities
                .iter()
                .map(|id| {
                    json!({
                        "name": id.name,
                        "location": id.location,
                        "kind": id.kind_name(),
                        "default_order": format_rational(&id.default_order),
                        "description": id.description,
                        "tex": id.tex,
                        "mutant": id.mutant,
                    })
                })
                .collect(),
        )),
    }
    Ok(0)
}
