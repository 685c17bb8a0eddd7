//! Command line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 a computation refused to run
//! (budget or certification guard), 3 a verification experiment ran and
//! failed its acceptance rule. Diagnostics go to stderr as single lines of
//! the form `error kind=<kind> msg="<text>"` so callers can parse them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde_json::json;

use crate::analysis::{szekeres_log_estimate, AnalysisError};
use crate::counting::{hr_log_upper_bound, CountCache, CountError};
use crate::limits::{clt_law, limit_pmf_k1, LimitError, LimitLawSpec};
use crate::persist;
use crate::samplers::{
    rng_for_stream, sample_uniform_at_most, GeneralSampler, GeometricPartitionSampler, SampleError,
};
use crate::verify::{
    run_experiment, ExperimentConfig, ExperimentId, Report, VerifyError, ALL_EXPERIMENTS,
};

/// Per-invocation draw budget; bulk generation belongs in the library.
const SAMPLE_DRAW_CAP: u64 = 1_000_000;

const AFTER_HELP: &str = "\
Verification experiments (verify --experiment <ID>):
  THM_1_1_JOINT        centered part vector against its discrete limit (TV)
  COR_1_2_MARGINAL     largest-part offset against the limit pmf (TV)
  COR_1_2_CONDITIONAL  uniformity of the completion given the largest part (chi-square)
  THM_1_3_CLT          standardized largest part against N(0, sigma^2) (KS)
  THM_1_4_GENERAL      scaled parts against the weighting density (KS)
  COR_1_5_DIRICHLET    scaled parts against Dirichlet(1) order statistics (KS)
  COR_1_6_TRANSFORM    powered scaled parts against the transformed reference (KS)
  SZEKERES_ACCURACY    saddle-point log-count estimate against exact logs
  LEMMA_2_1_IDENTITY   largest-part counting identity sweep (exact)
  M_SWEEP_THM_1_5      top scaled part against Dirichlet(1) for m = 3, 5, 8 (KS)

Exit codes:
  0  success
  1  invalid input
  2  computation refused (budget or certification guard)
  3  a verification experiment ran and failed

Environment:
  PARTITION_LAB_CACHE_DIR  directory where counting tables persist between runs
";

/// Exact counting, asymptotics, samplers, and limit-law verification for
/// integer partitions with a bounded number of parts.
#[derive(Parser)]
#[command(name = "partition-lab", version, about, after_help = AFTER_HELP)]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact number of partitions of n into at most m parts.
    Count {
        #[arg(long)]
        n: u64,
        /// Cap on the number of parts.
        #[arg(long)]
        m: u64,
        /// Count only partitions whose largest part equals this value.
        #[arg(long)]
        k1: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Pretty)]
        format: OutputFormat,
        /// Write the output here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Saddle-point estimate of ln count(n, m) with its internals.
    Asymptotic {
        #[arg(long)]
        n: u64,
        /// Cap on the number of parts.
        #[arg(long)]
        m: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Pretty)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw random partitions of n into at most m parts, one per line.
    ///
    /// The default measure is uniform. --q reweights by q^(largest part),
    /// --alpha by the product of (part/n)^(alpha-1) over the parts.
    Sample {
        #[arg(long)]
        n: u64,
        /// Cap on the number of parts.
        #[arg(long)]
        m: u64,
        /// Geometric weight on the largest part, in (0, 1).
        #[arg(long, conflicts_with = "alpha")]
        q: Option<String>,
        /// Exponent of the product weighting, positive.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Pretty)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Limit-law reference tables.
    Limit {
        /// k1: pmf of the largest-part offset along n = j (mod m).
        /// clt: cdf table of the N(0, sigma^2(q)) largest-part limit.
        #[arg(long, value_enum)]
        kind: LimitKind,
        /// Cap on the number of parts (kind k1).
        #[arg(long)]
        m: Option<u64>,
        /// Residue class of n mod m, in [1, m] (kind k1).
        #[arg(long)]
        j: Option<u64>,
        /// Weight ratio, in (0, 1).
        #[arg(long)]
        q: String,
        /// Certified bound on the truncated tail mass (kind k1).
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one verification experiment and print its report.
    ///
    /// Flags override the experiment's default parameters; unset flags keep
    /// the defaults. With --out, the report (text and json) and the
    /// experiment's artifact tables are also written into that directory.
    Verify {
        /// Experiment id; see the listing under --help.
        #[arg(long)]
        experiment: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        samples: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Sets n = n_factor * m^3 in experiments that sweep m.
        #[arg(long)]
        n_factor: Option<f64>,
        /// Worker threads; the report is identical for any worker count.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Pretty)]
        format: OutputFormat,
        /// Directory for the report and artifact files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize the *_report.json files a verify run wrote into a directory.
    Report {
        /// Directory holding report files.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Pretty)]
        format: OutputFormat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Pretty,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LimitKind {
    K1,
    Clt,
}

/// A failed invocation: what to tell stderr and which code to exit with.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Budget(String),
    Io(String),
}

impl Failure {
    fn emit(self) -> i32 {
        let (kind, msg, code) = match self {
            Failure::Usage(m) => ("usage", m, 1),
            Failure::Budget(m) => ("budget", m, 2),
            Failure::Io(m) => ("io", m, 1),
        };
        eprintln!("error kind={kind} msg=\"{}\"", sanitize(&msg));
        code
    }
}

/// Keeps stderr diagnostics one line, with no embedded double quotes.
fn sanitize(s: &str) -> String {
    s.replace('\n', " ").replace('"', "'")
}

fn classify_count(e: CountError) -> Failure {
    match e {
        CountError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

fn classify_sample(e: SampleError) -> Failure {
    match e {
        SampleError::Count(inner) => classify_count(inner),
        SampleError::RegimeTooSmall { .. }
        | SampleError::TailNotCertified { .. }
        | SampleError::RejectionStalled { .. } => Failure::Budget(e.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

fn classify_limit(e: LimitError) -> Failure {
    match e {
        LimitError::Count(inner) => classify_count(inner),
        other => Failure::Usage(other.to_string()),
    }
}

fn classify_analysis(e: AnalysisError) -> Failure {
    Failure::Usage(e.to_string())
}

fn classify_verify(e: VerifyError) -> Failure {
    match e {
        VerifyError::InvalidConfig(msg) => Failure::Usage(msg),
        VerifyError::Io(inner) => Failure::Io(inner.to_string()),
    }
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    return 0;
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    eprintln!("error kind=usage msg=\"missing subcommand\"");
                    return 1;
                }
                _ => {
                    let rendered = e.render().to_string();
                    let first = rendered.lines().next().unwrap_or("invalid arguments");
                    let msg = first.trim_start_matches("error: ");
                    eprintln!("error kind=usage msg=\"{}\"", sanitize(msg));
                    return 1;
                }
            }
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => f.emit(),
    }
}

fn execute(cmd: Command) -> Result<i32, Failure> {
    match cmd {
        Command::Count { n, m, k1, format, out } => {
            let mut cache = persist::load_cache(n, m).unwrap_or_else(CountCache::new);
            let count = match k1 {
                Some(k1) => cache.count_with_largest(n, m, k1),
                None => cache.count_at_most(n, m),
            }
            .map_err(classify_count)?;
            persist::store_cache(&cache);
            let text = match format {
                OutputFormat::Pretty => format!("{count}\n"),
                OutputFormat::Csv => match k1 {
                    Some(k1) => format!("n,m,k1,count\n{n},{m},{k1},{count}\n"),
                    None => format!("n,m,count\n{n},{m},{count}\n"),
                },
                OutputFormat::Json => {
                    let v = match k1 {
                        Some(k1) => json!({"n": n, "m": m, "k1": k1, "count": count.to_string()}),
                        None => json!({"n": n, "m": m, "count": count.to_string()}),
                    };
                    format!("{v}\n")
                }
            };
            emit_text(out.as_deref(), &text)?;
            Ok(0)
        }

        Command::Asymptotic { n, m, format, out } => {
            if n == 0 || m == 0 {
                return Err(Failure::Usage(format!("require n >= 1 and m >= 1, got n={n} m={m}")));
            }
            let est = szekeres_log_estimate(n, m).map_err(classify_analysis)?;
            let upper = hr_log_upper_bound(n);
            let text = match format {
                OutputFormat::Pretty => format!(
                    "log_count_estimate={}\nu={}\nv={}\nf_factor={}\ng_exponent={}\n\
                     uniform_regime={}\nlog_upper_bound={}\n",
                    est.log_value, est.u, est.v, est.f_factor, est.g_exponent,
                    est.uniform_regime, upper
                ),
                OutputFormat::Csv => format!(
                    "n,m,u,v,log_count_estimate,f_factor,g_exponent,uniform_regime,log_upper_bound\n\
                     {},{},{},{},{},{},{},{},{}\n",
                    n, m, est.u, est.v, est.log_value, est.f_factor, est.g_exponent,
                    est.uniform_regime, upper
                ),
                OutputFormat::Json => {
                    let v = json!({
                        "n": n, "m": m, "u": est.u, "v": est.v,
                        "log_count_estimate": est.log_value,
                        "f_factor": est.f_factor, "g_exponent": est.g_exponent,
                        "uniform_regime": est.uniform_regime,
                        "log_upper_bound": upper,
                    });
                    format!("{v}\n")
                }
            };
            emit_text(out.as_deref(), &text)?;
            Ok(0)
        }

        Command::Sample { n, m, q, alpha, samples, seed, format, out } => {
            if samples > SAMPLE_DRAW_CAP {
                return Err(Failure::Budget(format!(
                    "draw budget is {SAMPLE_DRAW_CAP} per invocation, got {samples}"
                )));
            }
            let mut cache = persist::load_cache(n, m).unwrap_or_else(CountCache::new);
            enum Measure {
                Uniform,
                Geometric(GeometricPartitionSampler),
                General(Box<GeneralSampler>),
            }
            let measure = match (&q, alpha) {
                (Some(text), None) => {
                    let q = parse_q(text)?;
                    Measure::Geometric(
                        GeometricPartitionSampler::new(&mut cache, n, m, q)
                            .map_err(classify_sample)?,
                    )
                }
                (None, Some(a)) => Measure::General(Box::new(
                    GeneralSampler::new(&mut cache, n, m, a).map_err(classify_sample)?,
                )),
                (None, None) => Measure::Uniform,
                (Some(_), Some(_)) => {
                    return Err(Failure::Usage("--q and --alpha are mutually exclusive".into()))
                }
            };
            let mut rng = rng_for_stream(seed, 0);
            let mut body = String::new();
            if format == OutputFormat::Csv {
                body.push_str("draw,parts\n");
            } else if format == OutputFormat::Json {
                body.push('[');
            }
            for i in 0..samples {
                let p = match &measure {
                    Measure::Uniform => sample_uniform_at_most(&mut cache, n, m, &mut rng),
                    Measure::Geometric(s) => s.sample(&mut cache, &mut rng),
                    Measure::General(s) => s.sample(&mut cache, &mut rng),
                }
                .map_err(classify_sample)?;
                let joined =
                    p.parts().iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
                match format {
                    OutputFormat::Pretty => {
                        body.push_str(&joined);
                        body.push('\n');
                    }
                    OutputFormat::Csv => {
                        body.push_str(&format!("{i},{joined}\n"));
                    }
                    OutputFormat::Json => {
                        body.push_str(if i == 0 { "\n" } else { ",\n" });
                        let row =
                            p.parts().iter().map(u64::to_string).collect::<Vec<_>>().join(",");
                        body.push_str(&format!("  [{row}]"));
                    }
                }
            }
            if format == OutputFormat::Json {
                body.push_str("\n]\n");
            }
            persist::store_cache(&cache);
            emit_text(out.as_deref(), &body)?;
            Ok(0)
        }

        Command::Limit { kind, m, j, q, tol, format, out } => {
            let q = parse_q(&q)?;
            let text = match kind {
                LimitKind::K1 => {
                    let (m, j) = match (m, j) {
                        (Some(m), Some(j)) => (m, j),
                        _ => {
                            return Err(Failure::Usage(
                                "limit --kind k1 requires --m and --j".into(),
                            ))
                        }
                    };
                    let spec = LimitLawSpec { m, j, q, tol };
                    // Rows needed reach roughly m * (truncation length).
                    let mut cache =
                        persist::load_cache(64 * m, m).unwrap_or_else(CountCache::new);
                    let pmf = limit_pmf_k1(&mut cache, &spec).map_err(classify_limit)?;
                    persist::store_cache(&cache);
                    let label =
                        format!("largest-part offset pmf, m={m} j={j} q={q} tol={tol:e}");
                    match format {
                        OutputFormat::Csv => {
                            let mut buf = Vec::new();
                            pmf.write_csv(&mut buf, &label)
                                .map_err(|e| Failure::Io(e.to_string()))?;
                            String::from_utf8(buf).expect("csv output is utf8")
                        }
                        OutputFormat::Pretty => {
                            let mut s = format!("{label}\n");
                            for (i, p) in pmf.probs.iter().enumerate() {
                                s.push_str(&format!(
                                    "{:>6}  {p}\n",
                                    pmf.base_offset + i as i64
                                ));
                            }
                            s.push_str(&format!("tail_bound={:e}\n", pmf.tail_bound));
                            s.push_str(&format!("mean={}\n", pmf.mean()));
                            s
                        }
                        OutputFormat::Json => {
                            let v = json!({
                                "m": m, "j": j, "q": q, "tol": tol,
                                "base_offset": pmf.base_offset,
                                "probs": pmf.probs,
                                "tail_bound": pmf.tail_bound,
                            });
                            format!("{v}\n")
                        }
                    }
                }
                LimitKind::Clt => {
                    let law = clt_law(q).map_err(classify_limit)?;
                    let sigma = law.sigma();
                    let xs: Vec<f64> = (-32..=32).map(|i| i as f64 * sigma / 8.0).collect();
                    match format {
                        OutputFormat::Csv => {
                            let mut s =
                                format!("# normal cdf, q={q} sigma={sigma}\nx,cdf\n");
                            for &x in &xs {
                                s.push_str(&format!("{x},{}\n", law.cdf(x)));
                            }
                            s
                        }
                        OutputFormat::Pretty => {
                            let mut s = format!("sigma={sigma}\n");
                            for &x in &xs {
                                s.push_str(&format!("{x:>12.6}  {:.8}\n", law.cdf(x)));
                            }
                            s
                        }
                        OutputFormat::Json => {
                            let cdf: Vec<f64> = xs.iter().map(|&x| law.cdf(x)).collect();
                            let v = json!({"q": q, "sigma": sigma, "x": xs, "cdf": cdf});
                            format!("{v}\n")
                        }
                    }
                }
            };
            emit_text(out.as_deref(), &text)?;
            Ok(0)
        }

        Command::Verify {
            experiment,
            seed,
            n,
            m,
            q,
            alpha,
            samples,
            tol,
            n_factor,
            workers,
            format,
            out,
        } => {
            let id = ExperimentId::from_str(&experiment).map_err(|_| {
                let ids = ALL_EXPERIMENTS
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(", ");
                Failure::Usage(format!("unknown experiment {experiment:?}; expected one of {ids}"))
            })?;
            let mut overrides = BTreeMap::new();
            let mut put = |k: &str, v: Option<f64>| {
                if let Some(v) = v {
                    overrides.insert(k.to_string(), v);
                }
            };
            put("n", n);
            put("m", m);
            put("alpha", alpha);
            put("samples", samples);
            put("tol", tol);
            put("n_factor", n_factor);
            if let Some(text) = &q {
                overrides.insert("q".to_string(), parse_q(text)?);
            }
            let config = ExperimentConfig::with_overrides(id, seed, &overrides);
            let report =
                run_experiment(&config, workers, out.as_deref()).map_err(classify_verify)?;
            let text = match format {
                OutputFormat::Pretty => format!("{report}\n"),
                OutputFormat::Csv => report_csv(&report),
                OutputFormat::Json => {
                    let mut s =
                        serde_json::to_string_pretty(&report).expect("report serializes");
                    s.push('\n');
                    s
                }
            };
            print!("{text}");
            if let Some(reason) = &report.refusal {
                eprintln!("error kind=refused msg=\"{}\"", sanitize(reason));
                return Ok(2);
            }
            if !report.pass {
                let shown = report
                    .statistics
                    .get(&report.primary_statistic)
                    .copied()
                    .unwrap_or(f64::NAN);
                eprintln!(
                    "error kind=verify msg=\"{} failed: {}={} with threshold {}\"",
                    report.experiment_id, report.primary_statistic, shown, report.threshold
                );
                return Ok(3);
            }
            Ok(0)
        }

        Command::Report { out, format } => {
            let entries = fs::read_dir(&out)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", out.display())))?;
            let mut reports: Vec<Report> = Vec::new();
            for entry in entries {
                let path = entry.map_err(|e| Failure::Io(e.to_string()))?.path();
                let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
                if !name.ends_with("_report.json") {
                    continue;
                }
                let text = fs::read_to_string(&path)
                    .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
                let report = serde_json::from_str(&text)
                    .map_err(|e| Failure::Usage(format!("cannot parse {name}: {e}")))?;
                reports.push(report);
            }
            if reports.is_empty() {
                return Err(Failure::Usage(format!(
                    "no *_report.json files in {}",
                    out.display()
                )));
            }
            reports.sort_by(|a, b| a.experiment_id.cmp(&b.experiment_id));
            let status_of = |r: &Report| {
                if r.refusal.is_some() {
                    "refused"
                } else if r.pass {
                    "pass"
                } else {
                    "FAIL"
                }
            };
            let value_of = |r: &Report| r.statistics.get(&r.primary_statistic).copied();
            let text = match format {
                OutputFormat::Pretty => {
                    let mut s = format!(
                        "{:<20} {:<8} {:<16} {:>12} {:>10}\n",
                        "experiment", "status", "primary", "value", "threshold"
                    );
                    for r in &reports {
                        let value = value_of(r)
                            .map(|v| format!("{v:.6}"))
                            .unwrap_or_else(|| "-".to_string());
                        s.push_str(&format!(
                            "{:<20} {:<8} {:<16} {:>12} {:>10}\n",
                            r.experiment_id, status_of(r), r.primary_statistic, value, r.threshold
                        ));
                    }
                    let pass = reports.iter().filter(|r| r.pass).count();
                    let refused = reports.iter().filter(|r| r.refusal.is_some()).count();
                    let fail = reports.len() - pass - refused;
                    s.push_str(&format!(
                        "\n{} reports: {pass} pass, {fail} fail, {refused} refused\n",
                        reports.len()
                    ));
                    s
                }
                OutputFormat::Csv => {
                    let mut s =
                        String::from("experiment_id,status,primary_statistic,value,threshold\n");
                    for r in &reports {
                        let value =
                            value_of(r).map(|v| v.to_string()).unwrap_or_default();
                        s.push_str(&format!(
                            "{},{},{},{value},{}\n",
                            r.experiment_id, status_of(r), r.primary_statistic, r.threshold
                        ));
                    }
                    s
                }
                OutputFormat::Json => {
                    let rows: Vec<_> = reports
                        .iter()
                        .map(|r| {
                            json!({
                                "experiment_id": r.experiment_id,
                                "status": status_of(r),
                                "primary_statistic": r.primary_statistic,
                                "value": value_of(r),
                                "threshold": r.threshold,
                                "runtime_ms": r.runtime_ms,
                            })
                        })
                        .collect();
                    format!("{}\n", serde_json::Value::Array(rows))
                }
            };
            print!("{text}");
            let any_fail = reports.iter().any(|r| !r.pass && r.refusal.is_none());
            let any_refused = reports.iter().any(|r| r.refusal.is_some());
            Ok(if any_fail {
                3
            } else if any_refused {
                2
            } else {
                0
            })
        }
    }
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Report as "key,value" rows, quoting values that contain commas.
fn report_csv(r: &Report) -> String {
    let esc = |v: &str| {
        if v.contains(',') || v.contains('"') {
            format!("\"{}\"", v.replace('"', "\"\""))
        } else {
            v.to_string()
        }
    };
    let mut s = String::from("key,value\n");
    s.push_str(&format!("experiment_id,{}\n", r.experiment_id));
    s.push_str(&format!("claim,{}\n", esc(&r.claim)));
    s.push_str(&format!("version,{}\n", r.version));
    s.push_str(&format!("thresholds_version,{}\n", r.thresholds_version));
    s.push_str(&format!("seed,{}\n", r.seed));
    for (k, v) in &r.params {
        s.push_str(&format!("param.{k},{v}\n"));
    }
    for (k, v) in &r.statistics {
        s.push_str(&format!("stat.{k},{v}\n"));
    }
    s.push_str(&format!("primary_statistic,{}\n", r.primary_statistic));
    s.push_str(&format!("threshold,{}\n", r.threshold));
    s.push_str(&format!("pass,{}\n", r.pass));
    if let Some(reason) = &r.refusal {
        s.push_str(&format!("refusal,{}\n", esc(reason)));
    }
    s.push_str(&format!("runtime_ms,{}\n", r.runtime_ms));
    s
}

/// Parses q to the nearest double and warns (stderr, one line) when the text
/// denotes a value more than 1e-15 away in relative terms. Rust's decimal
/// parse is correctly rounded, so the warning only fires for inputs a double
/// genuinely cannot represent to that precision.
fn parse_q(text: &str) -> Result<f64, Failure> {
    let trimmed = text.trim();
    let q: f64 = trimmed
        .parse()
        .map_err(|_| Failure::Usage(format!("cannot parse q value {trimmed:?}")))?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Failure::Usage(format!("q must lie strictly inside (0, 1), got {trimmed}")));
    }
    if let (Some(exact), Some(parsed)) =
        (decimal_to_rational(trimmed), BigRational::from_float(q))
    {
        let gap = (&parsed - &exact).abs();
        let rel = &gap / exact.abs();
        if rel > BigRational::new(BigInt::one(), ten_pow(15)) {
            let shown = rel.to_f64().unwrap_or(f64::NAN);
            eprintln!(
                "warning kind=rounding msg=\"q {trimmed} is not a double; using {q:?} (relative gap {shown:.3e})\""
            );
        }
    }
    Ok(q)
}

fn ten_pow(k: u32) -> BigInt {
    let mut x = BigInt::one();
    for _ in 0..k {
        x *= 10;
    }
    x
}

/// Exact rational value of a plain or scientific decimal literal. None for
/// anything else (hex, inf, nan, wild exponents), in which case no rounding
/// check is made.
fn decimal_to_rational(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0i64),
    };
    if exp.unsigned_abs() > 10_000 {
        return None;
    }
    let negative = mantissa.starts_with('-');
    let mantissa = mantissa.trim_start_matches(['+', '-']);
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits =
        |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let shift = exp - frac_part.len() as i64;
    let mut value = BigRational::from_integer(digits);
    if shift >= 0 {
        value *= BigRational::from_integer(ten_pow(shift as u32));
    } else {
        value /= BigRational::from_integer(ten_pow((-shift) as u32));
    }
    if negative {
        value = -value;
    }
    Some(value)
}
