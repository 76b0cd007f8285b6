//! Command-line front end. Every subcommand writes one JSON document (or a
//! CSV table where noted) that carries the result, a config echo, the
//! library version and the wall-clock time.

mod selftest;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::counting::{count_distinct_values, elekes_lower_bound, fit_exponent, generate_point_set, CountMode, Scheme};
use crate::curve::{builtin, check_simplicity, curve_from_json, curve_to_json, CurveSpec};
use crate::elekes::{admissibility_scan, verify_incidence_invariant, ElekesCurve};
use crate::error::{Error, Result};
use crate::motion::{classify_helix, derivative_norm_profile, trace_framework_motion, trace_triangle_motion};
use crate::quantity::QuantitySpec;
use crate::rigidity::{exact_kernel, infinitesimal_nullity, kernel_to_strings, scan_t_degeneracy, Framework};
use crate::VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELF_TEST: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "curve-rigidity", version, about = "Distinct values, Elekes curves and rigidity on parametrized curves")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Global {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Run the built-in checks for this subcommand instead.
    #[arg(long, global = true)]
    self_test: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CurveArgs {
    /// Curve: a JSON file, inline JSON, or `builtin:<name>`.
    #[arg(long)]
    curve: Option<String>,
    /// Quantity: a JSON file, inline JSON, `sq_euclidean` or `pinned_area`.
    #[arg(long)]
    quantity: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Count distinct values of D on a generated point set.
    CountDistances {
        #[command(flatten)]
        #[serde(flatten)]
        input: CurveArgs,
        /// `arith:a:h:N`, `geom:a:r:N`, `random:seed:N` or `angle:N`.
        #[arg(long)]
        scheme: Option<String>,
        /// `exact` or `tol:<eps>`; defaults to exact on exact data.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Fit the growth exponent of the distinct-value count.
    EstimateExponent {
        #[command(flatten)]
        #[serde(flatten)]
        input: CurveArgs,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
        sizes: Vec<usize>,
        #[arg(long)]
        mode: Option<String>,
    },
    /// Incidence check and admissibility scan of the Elekes curves.
    ElekesAnalyze {
        #[command(flatten)]
        #[serde(flatten)]
        input: CurveArgs,
        /// Point-set scheme; defaults to `random:<seed>:8`.
        #[arg(long)]
        points: Option<String>,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Number of implicit polynomials to include in the report.
        #[arg(long, default_value_t = 3)]
        show_implicit: usize,
    },
    /// Scan H for variation in tau.
    TestDegeneracy {
        #[command(flatten)]
        #[serde(flatten)]
        input: CurveArgs,
        #[arg(long, default_value_t = 16)]
        pairs: usize,
        #[arg(long, default_value_t = 256)]
        tau_grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Infinitesimal flexibility of a framework.
    Flex {
        /// Framework: a JSON file or inline JSON.
        #[arg(long)]
        framework: Option<String>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Trace a finite motion of a triangle or framework.
    TraceMotion {
        #[command(flatten)]
        #[serde(flatten)]
        input: CurveArgs,
        /// Initial `alpha,tau,beta`.
        #[arg(long, value_delimiter = ',')]
        triangle: Option<Vec<f64>>,
        /// Framework JSON (file or inline) instead of a triangle.
        #[arg(long, conflicts_with = "triangle")]
        framework: Option<String>,
        #[arg(long, default_value_t = 0)]
        driver: usize,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Derivative-norm profile and helix classification.
    ClassifyCurve {
        #[command(flatten)]
        #[serde(flatten)]
        input: CurveArgs,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_denominator: u64,
        #[arg(long, default_value_t = 1e-12)]
        ratio_tol: f64,
    },
    /// Grid check of the simplicity conditions.
    CheckSimplicity {
        #[command(flatten)]
        #[serde(flatten)]
        input: CurveArgs,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Lower bound on the number of distinct values from the incidence count.
    Bound {
        #[arg(long)]
        np: Option<u64>,
        #[arg(long)]
        nxi: Option<u64>,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CountDistances { .. } => "count-distances",
            Command::EstimateExponent { .. } => "estimate-exponent",
            Command::ElekesAnalyze { .. } => "elekes-analyze",
            Command::TestDegeneracy { .. } => "test-degeneracy",
            Command::Flex { .. } => "flex",
            Command::TraceMotion { .. } => "trace-motion",
            Command::ClassifyCurve { .. } => "classify-curve",
            Command::CheckSimplicity { .. } => "check-simplicity",
            Command::Bound { .. } => "bound",
        }
    }
}

/// A finished subcommand: the JSON body, plus a CSV rendering when the
/// result is a table.
struct Output {
    body: Value,
    csv: Option<String>,
}

impl Output {
    fn json(v: impl Serialize) -> Result<Self> {
        Ok(Output {
            body: to_value(v)?,
            csv: None,
        })
    }
}

/// A failure that still carries partial results.
struct Failure {
    error: Error,
    partial: Value,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let partial = match &error {
            Error::NewtonDivergence { partial, .. } | Error::DomainExit { partial, .. } => {
                serde_json::to_value(partial).unwrap_or(Value::Null)
            }
            _ => Value::Null,
        };
        Failure { error, partial }
    }
}

fn to_value(v: impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::invalid(format!("serialization: {e}")))
}

/// Parses `args` (program name first), runs the subcommand and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let pool = match cli.global.threads {
        Some(0) => {
            eprintln!("error: --threads must be positive");
            return EXIT_INVALID;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_INVALID;
        }
    };
    pool.install(|| dispatch(&cli))
}

fn dispatch(cli: &Cli) -> i32 {
    let name = cli.command.name();
    if cli.global.self_test {
        return selftest::run(name);
    }
    let start = Instant::now();
    let outcome = execute(&cli.command, &cli.global);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let meta = json!({
        "command": name,
        "version": VERSION,
        "seed": cli.global.seed,
        "threads": cli.global.threads,
        "config": to_value(&cli.command).unwrap_or(Value::Null),
        "elapsed_ms": elapsed_ms,
    });
    match outcome {
        Ok(out) => {
            let text = match (cli.global.format, out.csv) {
                (Format::Csv, Some(csv)) => csv,
                (Format::Csv, None) => {
                    eprintln!("error: {name} has no tabular output; use --format json");
                    return EXIT_INVALID;
                }
                (Format::Json, _) => render(out.body, meta),
            };
            match emit(&cli.global.out, &text) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INVALID
                }
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.error);
            if !f.error.is_numeric_failure() {
                return EXIT_INVALID;
            }
            let body = json!({"error": f.error.to_string(), "partial": f.partial});
            if let Err(e) = emit(&cli.global.out, &render(body, meta)) {
                eprintln!("error: {e}");
            }
            EXIT_NUMERIC
        }
    }
}

fn render(body: Value, meta: Value) -> String {
    let mut obj = match body {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    obj.insert("meta".into(), meta);
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("JSON values serialize");
    s.push('\n');
    s
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

/// Reads a JSON document given inline (leading `{`) or as a file path.
fn load_json(arg: &str) -> Result<Value> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Error::invalid(format!("cannot read {arg:?}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::invalid(format!("bad JSON in {arg:?}: {e}")))
}

pub fn load_curve(arg: &str) -> Result<CurveSpec> {
    match arg.strip_prefix("builtin:") {
        Some(name) => builtin(name),
        None => curve_from_json(&load_json(arg)?),
    }
}

pub fn load_quantity(arg: Option<&str>, dim: usize) -> Result<QuantitySpec> {
    match arg.map(str::trim) {
        None | Some("sq_euclidean") => Ok(QuantitySpec::squared_euclidean(dim)),
        Some("pinned_area") => QuantitySpec::from_json(&json!({"kind": "pinned_area"}), dim),
        Some(a) => QuantitySpec::from_json(&load_json(a)?, dim),
    }
}

fn inputs(a: &CurveArgs) -> Result<(CurveSpec, QuantitySpec)> {
    let curve = load_curve(a.curve.as_deref().ok_or_else(|| Error::invalid("--curve is required"))?)?;
    let q = load_quantity(a.quantity.as_deref(), curve.dim())?;
    Ok((curve, q))
}

fn required<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::invalid(format!("{flag} is required")))
}

fn positive(x: f64, flag: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{flag} must be positive")))
    }
}

fn mode_for(arg: &Option<String>, exact: bool) -> Result<CountMode> {
    match arg {
        Some(m) => m.parse(),
        None if exact => Ok(CountMode::Exact),
        None => Ok(CountMode::Tolerance(1e-9)),
    }
}

fn execute(cmd: &Command, g: &Global) -> std::result::Result<Output, Failure> {
    Ok(match cmd {
        Command::CountDistances { input, scheme, mode } => {
            let (curve, q) = inputs(input)?;
            let scheme: Scheme = required(scheme, "--scheme")?.parse()?;
            let pset = generate_point_set(&curve, &scheme)?;
            let mode = mode_for(mode, pset.is_exact())?;
            let res = count_distinct_values(&pset, &q, mode)?;
            Output::json(json!({
                "count": res.count,
                "scheme": scheme.to_string(),
                "curve": curve_to_json(&curve),
                "quantity": q.to_json(),
                "summary": res,
            }))?
        }
        Command::EstimateExponent {
            input,
            scheme,
            sizes,
            mode,
        } => {
            let (curve, q) = inputs(input)?;
            let scheme: Scheme = required(scheme, "--scheme")?.parse()?;
            let mut samples = Vec::with_capacity(sizes.len());
            for &n in sizes {
                let pset = generate_point_set(&curve, &scheme.with_len(n))?;
                let res = count_distinct_values(&pset, &q, mode_for(mode, pset.is_exact())?)?;
                samples.push((n, res.count));
            }
            let fit = fit_exponent(&samples)?;
            let mut csv = String::from("n,count\n");
            for (n, c) in &samples {
                csv.push_str(&format!("{n},{c}\n"));
            }
            Output {
                body: json!({"samples": samples, "fit": to_value(&fit)?}),
                csv: Some(csv),
            }
        }
        Command::ElekesAnalyze {
            input,
            points,
            pairs,
            grid,
            tol,
            show_implicit,
        } => {
            let (curve, q) = inputs(input)?;
            positive(*tol, "--tol")?;
            let scheme: Scheme = match points {
                Some(s) => s.parse()?,
                None => Scheme::UniformRandom { seed: g.seed, n: 8 },
            };
            let pset = generate_point_set(&curve, &scheme)?;
            let incidence = verify_incidence_invariant(&pset, &q)?;
            let scan = admissibility_scan(&pset, &q, *pairs, *grid, *tol, g.seed)?;
            let params = pset.params();
            let mut implicit = Vec::new();
            'outer: for i in 0..params.len() {
                for j in 0..params.len() {
                    if implicit.len() >= *show_implicit {
                        break 'outer;
                    }
                    if i == j {
                        continue;
                    }
                    let e = ElekesCurve::new(&curve, &q, params[i].clone(), params[j].clone())?;
                    if let Some(poly) = e.implicit() {
                        let poly = poly?;
                        implicit.push(json!({
                            "p": params[i],
                            "q": params[j],
                            "polynomial": poly.to_string(),
                            "implicit": poly.to_json(),
                        }));
                    }
                }
            }
            Output::json(json!({
                "points": params,
                "incidence": incidence,
                "admissibility": scan,
                "implicit": implicit,
            }))?
        }
        Command::TestDegeneracy {
            input,
            pairs,
            tau_grid,
            tol,
        } => {
            let (curve, q) = inputs(input)?;
            positive(*tol, "--tol")?;
            Output::json(scan_t_degeneracy(&curve, &q, *pairs, *tau_grid, *tol, g.seed)?)?
        }
        Command::Flex { framework, tol } => {
            let fw = Framework::from_json(&load_json(&required(framework, "--framework")?)?)?;
            let res = infinitesimal_nullity(&fw, *tol)?;
            let kernel = if fw.is_exact() {
                Some(kernel_to_strings(&exact_kernel(&fw)?))
            } else {
                None
            };
            Output::json(json!({"flexibility": res, "exact_kernel": kernel}))?
        }
        Command::TraceMotion {
            input,
            triangle,
            framework,
            driver,
            step,
            steps,
        } => {
            let trace = match (triangle, framework) {
                (Some(t), None) => {
                    if t.len() != 3 {
                        return Err(Error::invalid("--triangle takes alpha,tau,beta").into());
                    }
                    let (curve, q) = inputs(input)?;
                    trace_triangle_motion(&curve, &q, (t[0], t[1], t[2]), *step, *steps)?
                }
                (None, Some(f)) => {
                    let fw = Framework::from_json(&load_json(f)?)?;
                    trace_framework_motion(&fw, *driver, *step, *steps)?
                }
                _ => return Err(Error::invalid("give exactly one of --triangle or --framework").into()),
            };
            Output::json(json!({
                "max_drift": trace.monitored_drift(),
                "max_ode_error": if trace.ode_check.is_empty() { None } else { Some(trace.max_ode_error()) },
                "trace": trace,
            }))?
        }
        Command::ClassifyCurve {
            input,
            max_order,
            samples,
            h,
            max_denominator,
            ratio_tol,
        } => {
            let (curve, _) = inputs(input)?;
            positive(*ratio_tol, "--ratio-tol")?;
            if *max_denominator < 2 {
                return Err(Error::invalid("--max-denominator must be at least 2").into());
            }
            let profile = derivative_norm_profile(&curve, *max_order, *samples, *h)?;
            let helix = curve.as_helix().map(|hc| classify_helix(hc, *max_denominator, *ratio_tol));
            let csv = profile.to_csv();
            Output {
                body: json!({
                    "helix_candidate": profile.helix_candidate,
                    "classification": to_value(&helix)?,
                    "profile": to_value(&profile)?,
                }),
                csv: Some(csv),
            }
        }
        Command::CheckSimplicity { input, grid, tol } => {
            let (curve, q) = inputs(input)?;
            let report = check_simplicity(&curve, &q, *grid, *tol)?;
            Output::json(json!({"simple": report.all_passed(), "report": report}))?
        }
        Command::Bound { np, nxi, k, c } => {
            let b = elekes_lower_bound(required(np, "--np")?, required(nxi, "--nxi")?, *c, *k)?;
            Output::json(b)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_curve_is_a_usage_error() {
        assert_eq!(run(["curve-rigidity", "count-distances", "--scheme", "angle:6"]), EXIT_INVALID);
        assert_eq!(run(["curve-rigidity", "no-such-command"]), EXIT_INVALID);
    }

    #[test]
    fn circle_count_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.json");
        let code = run([
            "curve-rigidity",
            "count-distances",
            "--curve",
            "builtin:unit_circle",
            "--scheme",
            "angle:6",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(v["count"], 3);
        assert_eq!(v["meta"]["version"], VERSION);
    }

    #[test]
    fn csv_only_for_tables() {
        let code = run(["curve-rigidity", "bound", "--np", "100", "--nxi", "10000", "--format", "csv"]);
        assert_eq!(code, EXIT_INVALID);
    }

    #[test]
    fn domain_exit_writes_partial_trace() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t.json");
        let code = run([
            "curve-rigidity",
            "trace-motion",
            "--curve",
            r#"{"kind":"builtin","name":"parabola","domain":["-1","1"]}"#,
            "--triangle",
            "0.0,0.3,0.6",
            "--step",
            "0.1",
            "--steps",
            "50",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_NUMERIC);
        let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert!(v["partial"]["steps"].as_array().unwrap().len() > 1);
    }
}
