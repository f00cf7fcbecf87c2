//! padic-deform: invariants of elliptic curves over F_q((t)) and their
//! deformation to ramified p-adic fields.
//!
//! Exit codes: 0 success, 1 mismatch, 2 input error, 3 precision cap,
//! 4 internal invariant violation.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use padic_deform::curves::TateResult;
use padic_deform::deform::{run_match, CurveInput, DeformOptions, MatchReport, TwistEcho, DEFAULT_MAX_E, MAX_E_ENV};
use padic_deform::gf::GFq;
use padic_deform::literal::{parse_curve, parse_twist};
use padic_deform::quadratic::{twist_exact, QuadChar, TwistDatum};
use padic_deform::rootnum::root_number;
use padic_deform::{selftest, sweep, Error};

#[derive(Parser)]
#[command(name = "padic-deform", version, about = "Deform elliptic curves over F_q((t)) to characteristic 0 and compare invariants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tate's algorithm and root number of one curve.
    Tate(CurveArgs),
    /// The quadratic twist of a curve and both sets of invariants.
    Twist(TwistArgs),
    /// Deform (E, chi) and compare every invariant across the deformation.
    Deform(DeformArgs),
    /// As deform, reporting the root-number and norm-index terms.
    KtCheck(DeformArgs),
    /// Randomized deformation sweep.
    Sweep(SweepArgs),
    /// Run the built-in worked examples.
    Selftest(FormatArg),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct FormatArg {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct FieldArgs {
    /// Residue characteristic.
    #[arg(long)]
    p: u32,
    /// Residue degree: the residue field is F_(p^n).
    #[arg(long, default_value_t = 1)]
    n: usize,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// "a1,a2,a3,a4,a6" or "a4=..., a6=..." with literals in t (and g when n > 1).
    #[arg(long)]
    curve: String,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct TwistArgs {
    #[command(flatten)]
    curve: CurveArgs,
    /// {"kind":"sqrt_d","d":"t"} or {"kind":"artin_schreier","gamma":"1/t^3"}.
    #[arg(long)]
    twist: String,
}

#[derive(Args)]
struct DeformArgs {
    #[command(flatten)]
    twist: TwistArgs,
    /// Starting deformation level (raised to the required minimum if lower).
    #[arg(long)]
    e: Option<i64>,
    /// Largest deformation level tried.
    #[arg(long, env = MAX_E_ENV, default_value_t = DEFAULT_MAX_E)]
    max_e: i64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value_t = 200)]
    count: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, env = MAX_E_ENV, default_value_t = DEFAULT_MAX_E)]
    max_e: i64,
    #[command(flatten)]
    format: FormatArg,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::PrecisionCapExceeded { .. } | Error::InsufficientPrecision(_) | Error::PrecisionLoss => 3,
        e if e.is_input_error() => 2,
        _ => 4,
    }
}

fn error_json(e: &Error) -> Value {
    let mut v = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    if let Error::Parse { column, .. } = e {
        v["error"]["column"] = json!(column);
    }
    v
}

fn emit(format: Format, value: &Value, text: impl FnOnce() -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("serializable")),
        Format::Text => print!("{}", text()),
    }
}

/// Parse errors in a named option are reported with the option name.
fn in_option(opt: &str, e: Error) -> Error {
    match e {
        Error::Parse { column, message } => Error::Parse { column, message: format!("--{opt}: {message}") },
        other => other,
    }
}

fn load_curve(args: &CurveArgs) -> Result<CurveInput, Error> {
    let k = GFq::new(args.field.p, args.field.n)?;
    let a = parse_curve(&k, &args.curve).map_err(|e| in_option("curve", e))?;
    CurveInput::new(&k, a)
}

fn load_twist(curve: &CurveInput, twist: &str) -> Result<TwistDatum, Error> {
    parse_twist(&curve.source_field(), twist).map_err(|e| in_option("twist", e))
}

fn tate_text(t: &TateResult) -> String {
    let m = &t.minimal_model;
    format!(
        "kodaira: {}\nv_delta: {}\nv_delta_min: {}\nf: {}\nc: {}\nm: {}\nreduction: {:?}\npotential: {:?}\nminimal_model: [{}, {}, {}, {}, {}]\nsmooth_points: {}\n",
        t.kodaira, t.v_delta, t.v_delta_min, t.conductor_f, t.tamagawa_c, t.num_components, t.reduction, t.potential,
        m.a1, m.a2, m.a3, m.a4, m.a6, t.smooth_points
    )
}

fn fmt_w(w: Option<i8>) -> String {
    w.map_or("unsupported".into(), |w| format!("{w:+}"))
}

fn cmd_tate(args: &CurveArgs) -> Result<u8, Error> {
    let curve = load_curve(args)?;
    let t = curve.tate()?;
    let w = root_number(&curve.field, &t)?;
    let out = json!({
        "command": "tate", "p": curve.field.p(), "n": curve.field.n(),
        "curve": curve.literals(), "result": t, "root_number": w,
    });
    emit(args.format.format, &out, || format!("{}w: {} ({})\n", tate_text(&t), fmt_w(w.w), w.justification));
    Ok(0)
}

fn cmd_twist(args: &TwistArgs) -> Result<u8, Error> {
    let curve = load_curve(&args.curve)?;
    let datum = load_twist(&curve, &args.twist)?;
    let chi = QuadChar::new(&datum)?;
    let twisted = CurveInput::new(&curve.field, twist_exact(&curve.a, &datum)?)?;
    let (t, tw) = (curve.tate()?, twisted.tate()?);
    let out = json!({
        "command": "twist", "p": curve.field.p(), "n": curve.field.n(),
        "curve": curve.literals(), "twist": TwistEcho::new(&chi),
        "twisted_curve": twisted.literals(), "result": t, "twist_result": tw,
    });
    emit(args.curve.format.format, &out, || {
        let l = twisted.literals();
        format!(
            "twist: {} {} (r = {}, disc_val = {}, conductor = {})\ntwisted_curve: [{}, {}, {}, {}, {}]\n-- curve\n{}-- twist\n{}",
            datum.kind_name(), datum.param_literal(), datum.r, datum.disc_val, chi.conductor(),
            l.a1, l.a2, l.a3, l.a4, l.a6, tate_text(&t), tate_text(&tw)
        )
    });
    Ok(0)
}

const KT_ENTRIES: [&str; 7] = ["chi_delta", "chi_minus_one", "w", "w_twist", "w_base_change", "w_twist_identity", "kt_parity"];

fn deform_text(r: &MatchReport, only: Option<&[&str]>) -> String {
    let mut s = format!(
        "twist: {} {} -> {} {}\ne_used: {} (floor {}, retries {})\n",
        r.twist.kind, r.twist.param, r.deformed_twist.kind, r.deformed_twist.param, r.e_used, r.e_floor, r.retries
    );
    let c = &r.deformed_curve;
    s += &format!("deformed_curve: [{}, {}, {}, {}, {}]\n", c.a1, c.a2, c.a3, c.a4, c.a6);
    for e in r.entries.iter().filter(|e| only.is_none_or(|o| o.contains(&e.name.as_str()))) {
        let status = if e.unsupported { "unsupported" } else if e.matched { "ok" } else { "MISMATCH" };
        s += &format!("{:<24} {:<12} {} | {}\n", e.name, status, e.value_k, e.value_k_prime);
    }
    s += &format!("kt: {}\nall_matched: {}\n", r.kt_status, r.all_matched);
    s
}

fn cmd_deform(args: &DeformArgs, kt: bool) -> Result<u8, Error> {
    let curve = load_curve(&args.twist.curve)?;
    let datum = load_twist(&curve, &args.twist.twist)?;
    let options = DeformOptions { e_override: args.e, max_e: args.max_e };
    let start = Instant::now();
    let report = run_match(&curve, &datum, &options)?;
    eprintln!("deform: e_used {} after {} retries in {:.3?}", report.e_used, report.retries, start.elapsed());
    let format = args.twist.curve.format.format;
    if kt {
        let side = |s: &padic_deform::deform::SideResults| {
            json!({
                "w": s.w, "w_twist": s.w_twist, "w_base_change": s.w_base_change,
                "chi_delta": s.chi_delta, "chi_minus_one": s.chi_minus_one, "kt_parity": s.kt_parity,
            })
        };
        let entries: Vec<_> = report.entries.iter().filter(|e| KT_ENTRIES.contains(&e.name.as_str())).collect();
        let out = json!({
            "command": "kt-check", "p": report.p, "n": report.n, "curve": report.curve, "twist": report.twist,
            "e_used": report.e_used, "deformed_curve": report.deformed_curve, "deformed_twist": report.deformed_twist,
            "kt_status": report.kt_status, "k": side(&report.k), "k_prime": side(&report.k_prime),
            "entries": entries, "all_matched": report.all_matched,
        });
        emit(format, &out, || deform_text(&report, Some(&KT_ENTRIES)));
    } else {
        let mut out = serde_json::to_value(&report).expect("serializable");
        out["command"] = json!("deform");
        emit(format, &out, || deform_text(&report, None));
    }
    Ok(if report.all_matched { 0 } else { 1 })
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8, Error> {
    let options = DeformOptions { e_override: None, max_e: args.max_e };
    let start = Instant::now();
    let s = sweep::sweep(args.field.p, args.field.n, args.count, args.seed, &options)?;
    let elapsed = start.elapsed();
    eprintln!(
        "sweep: {} cases in {:.3?} ({:.1} ms/case), {} failures",
        s.count,
        elapsed,
        elapsed.as_secs_f64() * 1e3 / s.count.max(1) as f64,
        s.failures.len()
    );
    let mut out = serde_json::to_value(&s).expect("serializable");
    out["command"] = json!("sweep");
    emit(args.format.format, &out, || {
        let mut t = format!("sweep p={} n={} count={} seed={}: {}/{} cases matched\n", s.p, s.n, s.count, s.seed, s.cases_ok, s.count);
        for (name, st) in &s.per_entry {
            t += &format!("{:<24} matched {:>5}  mismatched {:>3}  unsupported {:>5}\n", name, st.matched, st.mismatched, st.unsupported);
        }
        t += &format!("e_used: {:?}\n", s.e_used);
        for f in &s.failures {
            t += &format!("case {} [{}]: {}\n", f.index, f.kind, f.error);
        }
        t
    });
    Ok(if s.has_kind("internal") {
        4
    } else if s.has_kind("precision_cap_exceeded") {
        3
    } else if s.failures.is_empty() {
        0
    } else {
        1
    })
}

fn cmd_selftest(args: &FormatArg) -> Result<u8, Error> {
    let checks = selftest::run_all();
    let passed = checks.iter().all(|c| c.passed);
    let out = json!({ "command": "selftest", "checks": checks, "passed": passed });
    emit(args.format, &out, || {
        let mut t = String::new();
        for c in &checks {
            t += &format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        t
    });
    Ok(if passed { 0 } else { 4 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, format) = match &cli.command {
        Command::Tate(a) => (cmd_tate(a), a.format.format),
        Command::Twist(a) => (cmd_twist(a), a.curve.format.format),
        Command::Deform(a) => (cmd_deform(a, false), a.twist.curve.format.format),
        Command::KtCheck(a) => (cmd_deform(a, true), a.twist.curve.format.format),
        Command::Sweep(a) => (cmd_sweep(a), a.format.format),
        Command::Selftest(a) => (cmd_selftest(a), a.format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if format == Format::Json {
                println!("{}", serde_json::to_string_pretty(&error_json(&e)).expect("serializable"));
            }
            ExitCode::from(exit_code_for(&e))
        }
    }
}
