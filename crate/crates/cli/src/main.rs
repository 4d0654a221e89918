//! `treeschur`: Schur norms of radial kernels on homogeneous trees.
//!
//! Exit codes: 0 success, 1 malformed input, 2 not a Schur multiplier,
//! 3 no convergence, 4 a verification check failed.

mod output;
mod symbol;
mod verify;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use treeschur::padic::{is_prime, lattice_distance, parse_rational, PMatrix2, DEFAULT_PRECISION};
use treeschur::peller::{g_from_symbol, peller_sandwich, PolarQuadrature};
use treeschur::radial::{build_hankel, schur_norm_with, Certification, NormOptions, TailModel};
use treeschur::spherical::{eigenvalue_from_z, in_ellipse, schur_norm_in_s, schur_norm_in_z, NormValue};
use treeschur::{Degree, Error};

use output::{cnum, num, to_csv, to_json, SCHEMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "treeschur", version, about = "Schur norms of radial kernels on homogeneous trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Tree degree parameter: an integer q >= 2 or "inf".
    #[arg(long, global = true, default_value = "inf")]
    q: String,
    /// Target certified error.
    #[arg(long, global = true, default_value_t = 1e-8)]
    err: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    out: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Schur norm of a radial symbol read from FILE (or stdin).
    Norm { file: Option<PathBuf> },
    /// Closed-form norms of spherical functions.
    Spherical {
        /// Eigenvalue, e.g. "0.4i", "0.3-0.2i" or "0.3,-0.2".
        #[arg(long, conflicts_with_all = ["z", "grid"])]
        s: Option<String>,
        /// Spectral parameter (finite q only).
        #[arg(long, conflicts_with = "grid")]
        z: Option<String>,
        /// Points per axis on the box around the ellipse.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Run invariant suites: tree, peller, padic, sandwich or all.
    Verify { suite: String },
    /// Tree distance between two lattices given by 2x2 bases.
    PadicDistance {
        #[arg(long)]
        prime: u64,
        /// Row-major entries "a,b,c,d", each an integer or "n/d".
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
    /// Disc-integral sandwich for the Hankel matrix of a symbol in FILE (or stdin).
    Peller { file: Option<PathBuf> },
}

struct Failure {
    code: u8,
    status: &'static str,
    message: String,
    extra: Map<String, Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, status) = match &e {
            Error::DivergentDiagonals { .. } | Error::DivergentTraceNorm { .. } | Error::DivergentSeries => (2, "not_multiplier"),
            Error::NoConvergence { .. } | Error::PrecisionExhausted(_) => (3, "no_convergence"),
            _ => (1, "invalid_input"),
        };
        let mut extra = Map::new();
        match &e {
            Error::DivergentTraceNorm {
                sizes,
                trace_norms,
                block_lower_bounds,
            } => {
                extra.insert("sizes".into(), json!(sizes));
                extra.insert("trace_norms".into(), Value::Array(trace_norms.iter().map(|&x| num(x)).collect()));
                extra.insert(
                    "block_lower_bounds".into(),
                    Value::Array(block_lower_bounds.iter().map(|&x| num(x)).collect()),
                );
            }
            Error::DivergentDiagonals { tolerance, increment } => {
                extra.insert("tolerance".into(), num(*tolerance));
                extra.insert("increment".into(), num(*increment));
            }
            Error::NoConvergence { iterations, residual, .. } => {
                extra.insert("iterations".into(), json!(iterations));
                extra.insert("residual".into(), num(*residual));
            }
            _ => {}
        }
        let message = match code {
            2 => format!("not a Schur multiplier at certified tolerance: {e}"),
            _ => e.to_string(),
        };
        Failure {
            code,
            status,
            message,
            extra,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::from(Error::InvalidArgument(msg.into()))
}

fn read_input(file: &Option<PathBuf>) -> Result<String, Failure> {
    match file {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| invalid(format!("cannot read {}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| invalid(format!("cannot read stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn degree(common: &Common) -> Result<Degree, Failure> {
    Ok(common.q.parse::<Degree>()?)
}

fn norm_value(v: NormValue) -> (bool, Value, Value) {
    match v {
        NormValue::Multiplier(x) => (true, num(x), num(16.0 * f64::EPSILON * x)),
        NormValue::NotMultiplier => (false, Value::Null, Value::Null),
    }
}

fn cmd_norm(common: &Common, file: &Option<PathBuf>) -> Result<(Value, Value), Failure> {
    let text = read_input(file)?;
    let spec = symbol::parse(&text)?;
    let sym = spec.build()?;
    let q = degree(common)?;
    let inputs = json!({"symbol": serde_json::from_str::<Value>(&text).unwrap_or(Value::Null), "q": q.to_string(), "err": num(common.err)});
    let opts = NormOptions {
        allow_uncertified: true,
        ..NormOptions::default()
    };
    if let Some(param) = spec.spherical_param()? {
        if !in_ellipse(param.q, param.s) {
            return Err(Failure {
                code: 2,
                status: "not_multiplier",
                message: format!("eigenvalue {} lies outside the multiplier ellipse for q = {}", param.s, param.q),
                extra: Map::new(),
            });
        }
    }
    let r = match schur_norm_with(&sym, q, common.err, opts) {
        // an uncertified symbol whose values overflow is unbounded
        Err(Error::NonFinite { .. }) if !sym.tail().certifies_trace_class() => Err(Error::DivergentSeries),
        other => other,
    }?;
    let results = json!({
        "label": sym.label(),
        "c_plus": cnum(r.c_plus),
        "c_minus": cnum(r.c_minus),
        "hankel_term": num(r.hankel_term),
        "total": num(r.total),
        "truncation_n": r.truncation_n,
        "certified_error": num(r.certified_error),
        "certified": r.certified,
    });
    Ok((inputs, results))
}

fn spherical_row(q: Degree, s: Complex64, z: Option<Complex64>) -> Value {
    let (mult, norm, err) = match (q, z) {
        (Degree::Finite(qq), Some(z)) => norm_value(schur_norm_in_z(qq, z)),
        _ => norm_value(schur_norm_in_s(q, s)),
    };
    let mut row = json!({
        "q": q.to_string(),
        "s": cnum(s),
        "in_ellipse": in_ellipse(q, s),
        "multiplier": mult,
        "norm": norm,
        "certified_error": err,
    });
    if let Some(z) = z {
        row["z"] = cnum(z);
    }
    row
}

fn cmd_spherical(common: &Common, s: &Option<String>, z: &Option<String>, grid: &Option<usize>) -> Result<(Value, Value), Failure> {
    let q = degree(common)?;
    let mut inputs = json!({"q": q.to_string()});
    let rows: Vec<Value> = if let Some(n) = grid {
        if *n == 0 {
            return Err(invalid("grid needs at least one point per axis"));
        }
        inputs["grid"] = json!(n);
        let k = q.ellipse_factor();
        let coord = |j: usize| -1.0 + 2.0 * (j as f64 + 0.5) / *n as f64;
        let mut rows = Vec::with_capacity(n * n);
        for a in 0..*n {
            for b in 0..*n {
                rows.push(spherical_row(q, Complex64::new(coord(a), coord(b) / k), None));
            }
        }
        rows
    } else if let Some(zs) = z {
        let Degree::Finite(qq) = q else {
            return Err(invalid("the z parameter needs a finite q"));
        };
        let zv = symbol::parse_complex(zs)?;
        inputs["z"] = cnum(zv);
        vec![spherical_row(q, eigenvalue_from_z(qq, zv), Some(zv))]
    } else if let Some(ss) = s {
        let sv = symbol::parse_complex(ss)?;
        inputs["s"] = cnum(sv);
        vec![spherical_row(q, sv, None)]
    } else {
        return Err(invalid("give one of --s, --z or --grid"));
    };
    Ok((inputs, json!({ "rows": rows })))
}

fn cmd_verify(common: &Common, suite: &str) -> Result<(Value, Value, bool), Failure> {
    let checks = verify::run(suite, common.seed)?;
    let all = checks.iter().all(|c| c.pass);
    let rows: Vec<Value> = checks
        .iter()
        .map(|c| {
            json!({
                "suite": c.suite,
                "check": c.name,
                "pass": c.pass,
                "max_error": num(c.max_error),
                "tolerance": num(c.tolerance),
            })
        })
        .collect();
    Ok((json!({"suite": suite, "seed": common.seed}), json!({"rows": rows, "all_pass": all}), all))
}

fn parse_matrix(q: u64, text: &str, prec: u32) -> Result<PMatrix2, Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(invalid(format!("expected four comma-separated entries, got {text:?}")));
    }
    let mut entries = Vec::with_capacity(4);
    for p in parts {
        entries.push(parse_rational(p)?);
    }
    let entries: [_; 4] = entries.try_into().expect("four entries");
    Ok(PMatrix2::from_bigint_rationals(q, &entries, prec)?)
}

fn cmd_padic(prime: u64, a: &str, b: &str, precision: u32) -> Result<(Value, Value), Failure> {
    if !is_prime(prime) {
        return Err(Error::NotPrime(prime).into());
    }
    let ma = parse_matrix(prime, a, precision)?;
    let mb = parse_matrix(prime, b, precision)?;
    let d = lattice_distance(&ma, &mb)?;
    Ok((
        json!({"prime": prime, "a": a, "b": b, "precision": precision}),
        json!({"distance": d, "certified_error": 0}),
    ))
}

fn cmd_peller(common: &Common, file: &Option<PathBuf>) -> Result<(Value, Value), Failure> {
    let text = read_input(file)?;
    let sym = symbol::parse(&text)?.build()?;
    if matches!(sym.tail(), TailModel::Lacunary { .. } | TailModel::Undeclared) {
        return Err(Failure::from(Error::UndeclaredTail));
    }
    let g = g_from_symbol(&sym)?;
    let mut n = 32;
    let h = loop {
        let h = build_hankel(&sym, Degree::Infinite, n, Certification::Required)?;
        if h.tail_bound <= common.err || n >= 4096 {
            break h;
        }
        n *= 2;
    };
    let r = peller_sandwich(&h, &g, &PolarQuadrature::default())?;
    Ok((
        json!({"symbol": serde_json::from_str::<Value>(&text).unwrap_or(Value::Null)}),
        json!({
            "trace_norm": num(r.lhs),
            "disc_l1_norm": num(r.mid),
            "upper": num(r.rhs),
            "certified_error": num(r.error),
            "holds": r.holds,
            "truncation_n": h.n,
        }),
    ))
}

fn emit(format: Format, report: &Value) {
    match format {
        Format::Json => print!("{}", to_json(report)),
        Format::Csv => print!("{}", to_csv(report)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let start = Instant::now();
    let (name, outcome) = match &cli.command {
        Command::Norm { file } => ("norm", cmd_norm(&cli.common, file).map(|(i, r)| (i, r, true))),
        Command::Spherical { s, z, grid } => ("spherical", cmd_spherical(&cli.common, s, z, grid).map(|(i, r)| (i, r, true))),
        Command::Verify { suite } => ("verify", cmd_verify(&cli.common, suite)),
        Command::PadicDistance { prime, a, b, precision } => {
            ("padic-distance", cmd_padic(*prime, a, b, *precision).map(|(i, r)| (i, r, true)))
        }
        Command::Peller { file } => ("peller", cmd_peller(&cli.common, file).map(|(i, r)| (i, r, true))),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let mut report = json!({"schema": SCHEMA, "command": name});
    let code = match outcome {
        Ok((inputs, results, ok)) => {
            report["inputs"] = inputs;
            report["results"] = results;
            report["status"] = json!(if ok { "ok" } else { "checks_failed" });
            if ok {
                0
            } else {
                4
            }
        }
        Err(f) => {
            report["status"] = json!(f.status);
            report["message"] = json!(f.message);
            report["results"] = Value::Object(f.extra);
            eprintln!("treeschur {name}: {}", f.message);
            f.code
        }
    };
    report["wall_time_s"] = num(elapsed);
    emit(cli.common.out, &report);
    ExitCode::from(code)
}
