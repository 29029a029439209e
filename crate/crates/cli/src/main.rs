//! `squeezelab`: kernels, metrics, squeezing certificates and inequality reports
//! for domains described in plain-text config files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use squeezelab::bergman::{build_evaluator, io as kernel_io, KernelOptions};
use squeezelab::domain::config::DomainConfig;
use squeezelab::domain::squeeze::{squeeze_certificate, DEFAULT_BOUNDARY_SAMPLES};
use squeezelab::finsler::{bracket, kobayashi_model, trace_csv, FinslerOptions};
use squeezelab::ke::{ke_metric, KeModelMetric};
use squeezelab::verify::{self, InequalityReport, VerifyOptions};
use squeezelab::{CDirection, CPoint, Domain, Error};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Bergman kernel K(z, z).
    Kernel,
    /// Bergman metric, plus the closed-form KE and Kobayashi metrics on models.
    Metric,
    /// Squeezing certificate at a point, validated on fresh boundary samples.
    Squeeze,
    /// Caratheodory lower and Kobayashi upper bounds.
    Bracket,
    /// Full inequality suite.
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

/// Invariant metrics and squeezing certificates for bounded domains in C^n.
#[derive(Debug, Parser)]
#[command(name = "squeezelab", version)]
struct Args {
    /// Domain config file.
    #[arg(long)]
    domain: PathBuf,
    #[arg(long = "cmd", value_enum)]
    cmd: Command,
    /// Comma-separated complex coordinates such as `0.5,0.1+0.2i`; the origin by default.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Tangent direction, same syntax; `e_1` by default.
    #[arg(long, allow_hyphen_values = true)]
    dir: Option<String>,
    /// Polynomial degree: kernel basis (12 in one variable, 8 otherwise), or the
    /// ansatz degree for `bracket` (6).
    #[arg(long)]
    degree: Option<usize>,
    /// Quadrature points (2e5 in one variable, 1e6 otherwise).
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Relative slack on verified inequalities.
    #[arg(long, default_value_t = verify::DEFAULT_SLACK)]
    slack: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the optimizer trace of `bracket` as CSV next to the output (stderr without `--out`).
    #[arg(long)]
    trace: bool,
    /// Save the kernel evaluator built by `kernel` to this file.
    #[arg(long)]
    save_kernel: Option<PathBuf>,
}

fn parse_complex_list(s: &str) -> Result<Vec<Complex64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            Complex64::from_str(t).map_err(|_| format!("bad complex number '{t}'"))
        })
        .collect()
}

/// `--point`, which must lie inside the domain.
fn point_arg(args: &Args, domain: &Domain) -> Result<CPoint, String> {
    let dim = domain.dim();
    let z = match &args.point {
        None => CPoint::origin(dim),
        Some(s) => {
            let c = parse_complex_list(s)?;
            if c.len() != dim {
                return Err(format!(
                    "--point has {} coordinates, the domain has dimension {dim}",
                    c.len()
                ));
            }
            CPoint::from_slice(&c)
        }
    };
    let rho = domain.rho(&z);
    if !(rho < 0.0) {
        return Err(Error::OutsideDomain { rho }.to_string());
    }
    Ok(z)
}

fn dir_arg(args: &Args, dim: usize) -> Result<CDirection, String> {
    match &args.dir {
        None => Ok(CDirection::axis(dim, 0)),
        Some(s) => {
            let c = parse_complex_list(s)?;
            if c.len() != dim {
                return Err(format!(
                    "--dir has {} coordinates, the domain has dimension {dim}",
                    c.len()
                ));
            }
            Ok(CDirection::from_slice(&c))
        }
    }
}

fn kernel_opts(args: &Args, dim: usize) -> KernelOptions {
    let d = KernelOptions::for_dim(dim);
    KernelOptions {
        degree: args.degree.unwrap_or(d.degree),
        count: args.count.unwrap_or(d.count),
        seed: args.seed,
    }
}

fn complex_json(c: &[Complex64]) -> Value {
    Value::Array(c.iter().map(|z| json!([z.re, z.im])).collect())
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_complex(c: &[Complex64]) -> String {
    c.iter()
        .map(|z| format!("{}{:+.16e}i", fmt_num(z.re), z.im))
        .collect::<Vec<_>>()
        .join(";")
}

/// Flat record rendered as JSON, a two-line CSV or `key = value` lines.
#[derive(Default)]
struct Record(Vec<(&'static str, Field)>);

enum Field {
    Num(f64),
    Int(u64),
    Bool(bool),
    Str(String),
    Complex(Vec<Complex64>),
}

impl Record {
    fn num(&mut self, k: &'static str, v: f64) -> &mut Self {
        self.0.push((k, Field::Num(v)));
        self
    }
    fn int(&mut self, k: &'static str, v: u64) -> &mut Self {
        self.0.push((k, Field::Int(v)));
        self
    }
    fn flag(&mut self, k: &'static str, v: bool) -> &mut Self {
        self.0.push((k, Field::Bool(v)));
        self
    }
    fn text(&mut self, k: &'static str, v: impl Into<String>) -> &mut Self {
        self.0.push((k, Field::Str(v.into())));
        self
    }
    fn complex(&mut self, k: &'static str, v: &[Complex64]) -> &mut Self {
        self.0.push((k, Field::Complex(v.to_vec())));
        self
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut m = Map::new();
                for (k, f) in &self.0 {
                    let v = match f {
                        Field::Num(x) => json!(x),
                        Field::Int(x) => json!(x),
                        Field::Bool(x) => json!(x),
                        Field::Str(s) => json!(s),
                        Field::Complex(c) => complex_json(c),
                    };
                    m.insert((*k).to_string(), v);
                }
                serde_json::to_string_pretty(&Value::Object(m)).expect("record serializes") + "\n"
            }
            Format::Csv => {
                let head: Vec<&str> = self.0.iter().map(|(k, _)| *k).collect();
                let row: Vec<String> = self.0.iter().map(|(_, f)| Self::plain(f)).collect();
                format!("{}\n{}\n", head.join(","), row.join(","))
            }
            Format::Text => {
                let w = self.0.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                let mut s = String::new();
                for (k, f) in &self.0 {
                    let _ = writeln!(s, "{k:<w$} = {}", Self::plain(f));
                }
                s
            }
        }
    }

    fn plain(f: &Field) -> String {
        match f {
            Field::Num(x) => fmt_num(*x),
            Field::Int(x) => x.to_string(),
            Field::Bool(x) => x.to_string(),
            Field::Str(s) => s.clone(),
            Field::Complex(c) => fmt_complex(c),
        }
    }
}

fn reports_csv(reports: &[InequalityReport]) -> String {
    let mut s = String::from("claim_id,label,point,direction,lhs,rhs,margin,pass,skipped\n");
    let cl = |c: &squeezelab::point::ComplexList| {
        let v: Vec<Complex64> = c.0.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        fmt_complex(&v)
    };
    for r in reports {
        if let Some(e) = &r.error {
            let _ = writeln!(s, "{},,,,,,,false,\"{}\"", r.claim_id, e.replace('"', "'"));
        }
        for row in &r.rows {
            let _ = writeln!(
                s,
                "{},\"{}\",{},{},{},{},{},{},{}",
                r.claim_id,
                row.label,
                cl(&row.point),
                row.direction.as_ref().map(cl).unwrap_or_default(),
                fmt_num(row.lhs),
                fmt_num(row.rhs),
                fmt_num(row.margin),
                row.pass,
                row.skipped
                    .as_deref()
                    .map(|x| format!("\"{}\"", x.replace('"', "'")))
                    .unwrap_or_default(),
            );
        }
    }
    s
}

enum Failure {
    Usage(String),
    Claims,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Usage(e)
    }
}

fn emit(args: &Args, body: &str) -> Result<(), Failure> {
    match &args.out {
        Some(p) => std::fs::write(p, body).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(args: &Args) -> Result<(), Failure> {
    let config = DomainConfig::load(&args.domain)?;
    if config.is_empty() && args.cmd != Command::Verify {
        return Err(Failure::Usage(format!(
            "{}: empty domain config",
            args.domain.display()
        )));
    }
    if args.cmd == Command::Verify && config.is_empty() {
        let body = match args.format {
            Format::Json => verify::to_json(&[]) + "\n",
            Format::Csv => reports_csv(&[]),
            Format::Text => String::new(),
        };
        return emit(args, &body);
    }
    let domain = config.build()?;
    let n = domain.dim();
    let mut rec = Record::default();
    rec.text("domain", domain.model_kind().to_string());
    match args.cmd {
        Command::Kernel => {
            let z = point_arg(args, &domain)?;
            let opts = kernel_opts(args, n);
            let ev = build_evaluator(&domain, &opts)?;
            if let Some(p) = &args.save_kernel {
                kernel_io::save(&ev, p)?;
            }
            rec.complex("point", z.coords().as_slice())
                .num("kernel", ev.kernel_diag(&z)?)
                .int("degree", opts.degree as u64)
                .int("count", opts.count as u64)
                .int("seed", opts.seed)
                .int("rank", ev.rank() as u64)
                .int("dropped", ev.dropped.len() as u64);
        }
        Command::Metric => {
            let z = point_arg(args, &domain)?;
            let v = dir_arg(args, n)?;
            let opts = kernel_opts(args, n);
            let ev = build_evaluator(&domain, &opts)?;
            rec.complex("point", z.coords().as_slice())
                .complex("direction", v.coords().as_slice())
                .num("bergman", ev.metric(&z, &v)?);
            if let Ok(m) = KeModelMetric::for_domain(&domain) {
                rec.num("kahler_einstein", ke_metric(&m, &z, &v)?);
            }
            if let Ok(k) = kobayashi_model(&domain, &z, &v) {
                rec.num("kobayashi", k);
            }
            rec.int("degree", opts.degree as u64)
                .int("count", opts.count as u64)
                .int("seed", opts.seed);
        }
        Command::Squeeze => {
            let z = point_arg(args, &domain)?;
            let cert = squeeze_certificate(&domain, &z)?;
            let check = cert.validate(&domain, 1000, args.seed)?;
            rec.complex("point", z.coords().as_slice())
                .text("map", format!("{:?}", cert.map.kind()))
                .num("a", cert.a)
                .num("b", cert.b)
                .flag("automorphism", cert.automorphism)
                .int("boundary_samples", DEFAULT_BOUNDARY_SAMPLES as u64)
                .num("check_min_modulus", check.min_modulus)
                .num("check_max_modulus", check.max_modulus)
                .flag("valid", check.passes(&cert));
        }
        Command::Bracket => {
            let z = point_arg(args, &domain)?;
            let v = dir_arg(args, n)?;
            let opts = FinslerOptions {
                degree: args.degree.unwrap_or(FinslerOptions::default().degree),
                seed: args.seed,
                trace: args.trace,
                ..FinslerOptions::default()
            };
            let b = bracket(&domain, &z, &v, &opts)?;
            rec.complex("point", z.coords().as_slice())
                .complex("direction", v.coords().as_slice())
                .num("caratheodory_lower", b.lo)
                .num("kobayashi_upper", b.hi)
                .num("relative_width", b.width() / b.midpoint())
                .int("degree", opts.degree as u64)
                .int("seed", opts.seed);
            if args.trace {
                let mut rows = b.upper.trace.clone();
                rows.extend(b.lower.trace.iter().cloned());
                let csv = trace_csv(&rows);
                match &args.out {
                    Some(p) => {
                        let mut t = p.clone().into_os_string();
                        t.push(".trace.csv");
                        std::fs::write(&t, csv).map_err(|e| Failure::Usage(e.to_string()))?;
                    }
                    None => eprint!("{csv}"),
                }
            }
        }
        Command::Verify => {
            let mut opts = VerifyOptions::for_dim(n);
            if let Some(d) = args.degree {
                opts.kernel.degree = d;
            }
            if let Some(c) = args.count {
                opts.kernel.count = c;
            }
            if !(args.slack >= 0.0) {
                return Err(Failure::Usage(format!(
                    "--slack must be nonnegative, got {}",
                    args.slack
                )));
            }
            opts.slack = args.slack;
            let reports = verify::run_suite(&domain, args.seed, &opts);
            let body = match args.format {
                Format::Json => verify::to_json(&reports) + "\n",
                Format::Csv => reports_csv(&reports),
                Format::Text => verify::to_text(&reports),
            };
            emit(args, &body)?;
            return if verify::all_pass(&reports) {
                Ok(())
            } else {
                Err(Failure::Claims)
            };
        }
    }
    emit(args, &rec.render(args.format))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Claims) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("squeezelab: {msg}");
            ExitCode::from(2)
        }
    }
}
