//! Command-line front end: argument parsing, dispatch and output formatting.
//!
//! [`run`] is the whole program minus process exit, so tests can drive it
//! in-process with captured streams.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pagrow::acceptance::{self, AcceptanceOptions, CriterionOutcome, DEFAULT_SEED};
use pagrow::analytics::{
    all_pass, check_pa_class, compare_degree_distribution, compare_degree_sequence_median,
    compare_models_tv, reports_to_json, run_replicas, sample_step_increments, ComparisonReport,
    Tolerances,
};
use pagrow::graph::MultiGraph;
use pagrow::growth::{
    enumerate_process_distribution, grow_kneighbour, grow_lcd, GrowthConfig, NeighbourRule,
    SeedGraph,
};
use pagrow::numerics::{to_f64, EvalMode};
use pagrow::pmf::{format_float, format_rational, total_variation_exact, DegreePmf, Probabilities};
use pagrow::urn::{
    alpha_degree_seq, degree_pmf_from_seed, degree_urn, urn_gf_oracle, urn_mean, urn_mean_float,
    urn_pmf, urn_pmf_dp_oracle, urn_second_moment, urn_second_moment_float, TriangularUrnSpec,
    DP_MAX_TRIALS, GF_MAX_TRIALS,
};
use pagrow::{Error, Rational, RngStream};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_STRICT_WARNING: i32 = 3;

/// Above this `n`, `--mode auto` evaluates expectation tables in floating point.
pub const AUTO_FLOAT_TABLE_N: u64 = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "pagrow",
    version,
    about = "k-neighbour preferential attachment: simulation and exact analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Mode {
    Exact,
    Float,
    Auto,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Common {
    /// Master seed.
    #[arg(long, env = "PAGROW_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write data here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Exit with status 3 when a numeric warning is raised.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Rule {
    Slots,
    /// Distinct neighbours; sensitivity runs only.
    DistinctNeighbours,
}

#[derive(Debug, Clone, Args, Serialize)]
struct GrowArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    n: usize,
    /// Start from K_j instead of a single vertex with k loops.
    #[arg(long)]
    j: Option<u32>,
    /// Random stream id.
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Emit the degree trace of this vertex.
    #[arg(long)]
    trace: Option<u32>,
    /// How the k - 1 secondary targets are drawn.
    #[arg(long, value_enum, default_value_t = Rule::Slots)]
    neighbour_rule: Rule,
    /// Emit the degree histogram instead of the edge list.
    #[arg(long)]
    histogram: bool,
    /// Also write the plain `u v` edge-list dump here.
    #[arg(long)]
    edge_list: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct LcdArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long)]
    histogram: bool,
    #[arg(long)]
    edge_list: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct VertexArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    i: u64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    j: Option<u32>,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct MomentArgs {
    #[command(flatten)]
    vertex: VertexArgs,
    /// Emit one row per `n' = i, i + step, ..., n` instead of a single row.
    #[arg(long)]
    step: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct AlphaArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    d_max: u64,
    #[arg(long)]
    d_min: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct OracleArgs {
    /// Urn given directly: alpha, sigma, a0, b0 and m.
    #[arg(long, requires_all = ["sigma", "a0", "b0", "m"])]
    alpha: Option<u64>,
    #[arg(long)]
    sigma: Option<u64>,
    #[arg(long)]
    a0: Option<i64>,
    #[arg(long)]
    b0: Option<i64>,
    #[arg(long)]
    m: Option<u64>,
    /// Urn of vertex i at time n instead.
    #[arg(long, conflicts_with = "alpha")]
    k: Option<u32>,
    #[arg(long)]
    i: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    j: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Check {
    Distribution,
    Sequence,
    Models,
    PaClass,
}

#[derive(Debug, Clone, Args, Serialize)]
struct McArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    i: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    replicas: u64,
    #[arg(long, value_enum, default_value_t = Check::Distribution)]
    check: Check,
    #[arg(long, default_value_t = 10)]
    d_max: u64,
    #[arg(long, value_delimiter = ',', default_value = "4,10,20")]
    d_values: Vec<u32>,
    /// Candidate steps drawn per replica for `--check pa-class`.
    #[arg(long, default_value_t = 1000)]
    steps: u64,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    threads: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct VerifyArgs {
    /// Comma-separated criterion ids; all when omitted.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u32>,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct BenchArgs {
    #[arg(long, default_value_t = 5)]
    k: u32,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Grow a k-neighbour graph.
    Grow(GrowArgs),
    /// Grow an LCD graph.
    Lcd(LcdArgs),
    /// Exact (or float) degree distribution of v_i at time n.
    ExactPmf(VertexArgs),
    /// First and second moments of d_n(v_i).
    ExactMoments(MomentArgs),
    /// Limiting degree proportions alpha(k, d).
    Alpha(AlphaArgs),
    /// Cross-check the closed form against the DP, GF and enumeration oracles.
    Oracle(OracleArgs),
    /// Monte Carlo replicas compared with exact or limiting values.
    Mc(McArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
    /// Time a large growth run.
    Bench(BenchArgs),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Grow(a) => &a.common,
            Command::Lcd(a) => &a.common,
            Command::ExactPmf(a) => &a.common,
            Command::ExactMoments(a) => &a.vertex.common,
            Command::Alpha(a) => &a.common,
            Command::Oracle(a) => &a.common,
            Command::Mc(a) => &a.common,
            Command::Verify(a) => &a.common,
            Command::Bench(a) => &a.common,
        }
    }
}

/// Data plus the exit status and any warnings to report on stderr.
struct Output {
    body: String,
    status: i32,
    warnings: Vec<String>,
}

impl Output {
    fn ok(body: String) -> Self {
        Output {
            body,
            status: EXIT_OK,
            warnings: Vec::new(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status. Data goes to `out` (or `--output`), diagnostics and the
/// config echo to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let echo = json!({
        "command": serde_json::to_value(&cli.command).expect("arguments serialize"),
        "version": env!("CARGO_PKG_VERSION"),
    });
    let _ = writeln!(err, "config {echo}");

    let result = dispatch(&cli.command, err);
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    for w in &output.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let common = cli.command.common();
    let written = match &common.output {
        Some(path) => std::fs::write(path, output.body.as_bytes()),
        None => out.write_all(output.body.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: writing output: {e}");
        return EXIT_USAGE;
    }
    if output.status == EXIT_OK && common.strict && !output.warnings.is_empty() {
        return EXIT_STRICT_WARNING;
    }
    output.status
}

fn dispatch(cmd: &Command, err: &mut dyn Write) -> Result<Output, Error> {
    match cmd {
        Command::Grow(a) => cmd_grow(a),
        Command::Lcd(a) => cmd_lcd(a),
        Command::ExactPmf(a) => cmd_exact_pmf(a),
        Command::ExactMoments(a) => cmd_exact_moments(a),
        Command::Alpha(a) => cmd_alpha(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Verify(a) => cmd_verify(a, err),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn seed_graph(j: Option<u32>) -> SeedGraph {
    j.map_or(SeedGraph::KLoops, SeedGraph::CompleteKj)
}

fn eval_mode(mode: Mode, trials: u64) -> EvalMode {
    match mode {
        Mode::Exact => EvalMode::exact(),
        Mode::Float => EvalMode::float(),
        Mode::Auto => EvalMode::auto(trials),
    }
}

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn histogram_json(g: &MultiGraph) -> Value {
    Value::Object(
        g.degree_histogram()
            .into_iter()
            .map(|(d, c)| (d.to_string(), json!(c)))
            .collect(),
    )
}

fn graph_output(
    g: &MultiGraph,
    trace: Option<&pagrow::growth::DegreeTrace>,
    histogram: bool,
    edge_list: Option<&PathBuf>,
    format: Format,
) -> Result<Output, Error> {
    if let Some(path) = edge_list {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let mut w = std::io::BufWriter::new(file);
        g.write_edge_list(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    }
    let body = match format {
        Format::Csv => {
            if let Some(t) = trace {
                t.to_csv()
            } else if histogram {
                let mut s = String::from("degree,count\n");
                for (d, c) in g.degree_histogram() {
                    let _ = writeln!(s, "{d},{c}");
                }
                s
            } else {
                let mut s = String::from("u,v\n");
                for (u, v) in g.edges() {
                    let _ = writeln!(s, "{u},{v}");
                }
                s
            }
        }
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("vertices".into(), json!(g.vertex_count()));
            obj.insert("edge_count".into(), json!(g.edge_count()));
            obj.insert("degree_histogram".into(), histogram_json(g));
            if !histogram {
                obj.insert(
                    "edges".into(),
                    json!(g.edges().map(|(u, v)| [u, v]).collect::<Vec<_>>()),
                );
            }
            if let Some(t) = trace {
                obj.insert(
                    "trace".into(),
                    json!(t.points.iter().map(|&(t, d)| [t, d]).collect::<Vec<_>>()),
                );
            }
            to_json_text(&Value::Object(obj))
        }
    };
    Ok(Output::ok(body))
}

fn cmd_grow(a: &GrowArgs) -> Result<Output, Error> {
    let mut cfg = GrowthConfig::new(a.k, a.n, a.common.seed)
        .with_seed_graph(seed_graph(a.j))
        .with_stream(a.stream)
        .with_neighbour_rule(match a.neighbour_rule {
            Rule::Slots => NeighbourRule::Slots,
            Rule::DistinctNeighbours => NeighbourRule::DistinctNeighbours,
        });
    cfg.trace_vertex = a.trace;
    let run = grow_kneighbour(&cfg)?;
    graph_output(
        &run.graph,
        run.trace.as_ref(),
        a.histogram,
        a.edge_list.as_ref(),
        a.common.format,
    )
}

fn cmd_lcd(a: &LcdArgs) -> Result<Output, Error> {
    let g = grow_lcd(a.k, a.n, RngStream::new(a.common.seed, a.stream))?;
    graph_output(&g, None, a.histogram, a.edge_list.as_ref(), a.common.format)
}

fn pmf_rows(pmf: &DegreePmf) -> Vec<(String, Value, String)> {
    match &pmf.probs {
        Probabilities::Exact(p) => p
            .iter()
            .enumerate()
            .map(|(idx, q)| {
                let s = format_rational(q);
                (format_rational(&pmf.value(idx)), json!(s), s)
            })
            .collect(),
        Probabilities::Float(p) => p
            .iter()
            .enumerate()
            .map(|(idx, &q)| (format_rational(&pmf.value(idx)), json!(q), format_float(q)))
            .collect(),
    }
}

fn cmd_exact_pmf(a: &VertexArgs) -> Result<Output, Error> {
    let seed = seed_graph(a.j);
    let urn = degree_urn(a.k, &seed, a.i, a.n)?;
    let mode = eval_mode(a.mode, urn.trials);
    let pmf = degree_pmf_from_seed(a.k, &seed, a.i, a.n, mode)?;
    let rows = pmf_rows(&pmf);
    let body = match a.common.format {
        Format::Csv => {
            let mut s = String::from("degree,probability\n");
            for (d, _, p) in &rows {
                let _ = writeln!(s, "{d},{p}");
            }
            s
        }
        Format::Json => to_json_text(&json!({
            "mode": if mode.is_exact() { "exact" } else { "float" },
            "rows": rows.iter().map(|(d, p, _)| json!({"degree": d.parse::<u64>().ok(), "probability": p})).collect::<Vec<_>>(),
            "warnings": pmf.warnings,
        })),
    };
    let warnings = pmf
        .warnings
        .iter()
        .map(|w| {
            format!(
                "cancellation at degree {}: estimated relative error {:.2e}",
                format_rational(&pmf.value(w.index)),
                w.estimated_relative_error
            )
        })
        .collect();
    Ok(Output {
        body,
        status: EXIT_OK,
        warnings,
    })
}

fn cmd_exact_moments(a: &MomentArgs) -> Result<Output, Error> {
    let v = &a.vertex;
    let seed = seed_graph(v.j);
    let start = v.i.max(seed.vertex_count() as u64);
    let points: Vec<u64> = match a.step {
        Some(0) => return Err(Error::InvalidConfig("--step must be positive".into())),
        Some(step) => {
            let mut p: Vec<u64> = (start..=v.n).step_by(step as usize).collect();
            if p.last() != Some(&v.n) {
                p.push(v.n);
            }
            p
        }
        None => vec![v.n],
    };
    let exact = match v.mode {
        Mode::Exact => true,
        Mode::Float => false,
        Mode::Auto => v.n <= AUTO_FLOAT_TABLE_N,
    };
    let mut rows: Vec<[String; 4]> = Vec::new();
    let mut json_rows = Vec::new();
    for &n in &points {
        let urn = degree_urn(v.k, &seed, v.i, n)?;
        let alpha = urn.spec.alpha();
        if exact {
            let a1 = Rational::from_integer(alpha.into());
            let mean = urn_mean(&urn.spec, urn.trials) / &a1;
            let second = urn_second_moment(&urn.spec, urn.trials) / (&a1 * &a1);
            let var = &second - &mean * &mean;
            let cells = [
                n.to_string(),
                format_rational(&mean),
                format_rational(&second),
                format_rational(&var),
            ];
            json_rows.push(
                json!({"n": n, "mean": cells[1], "second_moment": cells[2], "variance": cells[3]}),
            );
            rows.push(cells);
        } else {
            let a1 = alpha as f64;
            let mean = urn_mean_float(&urn.spec, urn.trials) / a1;
            let second = urn_second_moment_float(&urn.spec, urn.trials) / (a1 * a1);
            let var = second - mean * mean;
            json_rows.push(json!({"n": n, "mean": mean, "second_moment": second, "variance": var}));
            rows.push([
                n.to_string(),
                format_float(mean),
                format_float(second),
                format_float(var),
            ]);
        }
    }
    let body = match v.common.format {
        Format::Csv => {
            let mut s = String::from("n,mean,second_moment,variance\n");
            for r in &rows {
                let _ = writeln!(s, "{}", r.join(","));
            }
            s
        }
        Format::Json => to_json_text(&json!({
            "mode": if exact { "exact" } else { "float" },
            "rows": json_rows,
        })),
    };
    Ok(Output::ok(body))
}

fn cmd_alpha(a: &AlphaArgs) -> Result<Output, Error> {
    let d_min = a.d_min.unwrap_or(u64::from(a.k));
    let mut rows = Vec::new();
    for d in d_min..=a.d_max {
        rows.push((d, format_rational(&alpha_degree_seq(a.k, d)?)));
    }
    let body = match a.common.format {
        Format::Csv => {
            let mut s = String::from("d,alpha\n");
            for (d, v) in &rows {
                let _ = writeln!(s, "{d},{v}");
            }
            s
        }
        Format::Json => to_json_text(&json!({
            "k": a.k,
            "rows": rows.iter().map(|(d, v)| json!({"d": d, "alpha": v})).collect::<Vec<_>>(),
        })),
    };
    Ok(Output::ok(body))
}

struct CheckRow {
    check: &'static str,
    result: &'static str,
    detail: String,
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn cmd_oracle(a: &OracleArgs) -> Result<Output, Error> {
    let (spec, m, vertex) = match (a.alpha, a.k) {
        (Some(alpha), _) => {
            let (sigma, a0, b0, m) = (a.sigma.unwrap(), a.a0.unwrap(), a.b0.unwrap(), a.m.unwrap());
            (TriangularUrnSpec::from_ints(alpha, sigma, a0, b0)?, m, None)
        }
        (None, Some(k)) => {
            let (i, n) = match (a.i, a.n) {
                (Some(i), Some(n)) => (i, n),
                _ => return Err(Error::InvalidConfig("--k needs --i and --n".into())),
            };
            let urn = degree_urn(k, &seed_graph(a.j), i, n)?;
            (urn.spec, urn.trials, Some((k, i, n)))
        }
        (None, None) => {
            return Err(Error::InvalidConfig(
                "give either --alpha/--sigma/--a0/--b0/--m or --k/--i/--n".into(),
            ))
        }
    };
    let mut rows = Vec::new();
    let closed = urn_pmf(&spec, m, EvalMode::exact())?;
    let one = Rational::from_integer(1.into());
    rows.push(CheckRow {
        check: "closed_sums_to_one",
        result: pass_fail(closed.total_exact() == Some(one)),
        detail: format!("{} support points", closed.len()),
    });
    if m <= DP_MAX_TRIALS {
        let dp = urn_pmf_dp_oracle(&spec, m)?;
        rows.push(CheckRow {
            check: "closed_vs_dp",
            result: pass_fail(closed == dp),
            detail: format!("m={m}"),
        });
        let mean_ok = dp.moment_exact(1) == Some(urn_mean(&spec, m));
        let second_ok = dp.moment_exact(2) == Some(urn_second_moment(&spec, m));
        rows.push(CheckRow {
            check: "moments_vs_dp",
            result: pass_fail(mean_ok && second_ok),
            detail: format!("mean {}", format_rational(&urn_mean(&spec, m))),
        });
    } else {
        rows.push(CheckRow {
            check: "closed_vs_dp",
            result: "skip",
            detail: format!("m > {DP_MAX_TRIALS}"),
        });
    }
    match urn_gf_oracle(&spec, m) {
        Ok(gf) => rows.push(CheckRow {
            check: "closed_vs_gf",
            result: pass_fail(gf == closed),
            detail: format!("m={m}"),
        }),
        Err(e) => rows.push(CheckRow {
            check: "closed_vs_gf",
            result: "skip",
            detail: if m > GF_MAX_TRIALS {
                format!("m > {GF_MAX_TRIALS}")
            } else {
                e.to_string()
            },
        }),
    }
    if let Some((k, i, n)) = vertex {
        let seed = seed_graph(a.j);
        match enumerate_process_distribution(k, i as u32, n as usize, &seed) {
            Ok(process) => {
                let urn = degree_pmf_from_seed(k, &seed, i, n, EvalMode::exact())?;
                let tv = total_variation_exact(&process, &urn).expect("exact");
                rows.push(CheckRow {
                    check: "process_vs_urn_tv",
                    result: "info",
                    detail: format!("{} ({:.3e})", format_rational(&tv), to_f64(&tv)),
                });
            }
            Err(e) => rows.push(CheckRow {
                check: "process_vs_urn_tv",
                result: "skip",
                detail: e.to_string(),
            }),
        }
    }
    let failed = rows.iter().any(|r| r.result == "fail");
    let body = match a.common.format {
        Format::Csv => {
            let mut s = String::from("check,result,detail\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{}", r.check, r.result, r.detail.replace(',', ";"));
            }
            s
        }
        Format::Json => to_json_text(&Value::Array(
            rows.iter()
                .map(|r| json!({"check": r.check, "result": r.result, "detail": r.detail}))
                .collect(),
        )),
    };
    Ok(Output {
        body,
        status: if failed { EXIT_VERIFY_FAILED } else { EXIT_OK },
        warnings: Vec::new(),
    })
}

fn reports_output(reports: &[ComparisonReport], format: Format) -> Output {
    let body = match format {
        Format::Csv => {
            let mut s = String::from("name,empirical,exact,tolerance,verdict\n");
            for r in reports {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.name,
                    format_float(r.empirical),
                    format_float(r.exact),
                    format_float(r.tolerance),
                    r.verdict.as_str()
                );
            }
            s
        }
        Format::Json => {
            let mut s = reports_to_json(reports);
            s.push('\n');
            s
        }
    };
    Output {
        body,
        status: if all_pass(reports) {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        },
        warnings: Vec::new(),
    }
}

fn cmd_mc(a: &McArgs) -> Result<Output, Error> {
    let tol = Tolerances::embedded();
    let seed = a.common.seed;
    let need_i = || {
        a.i.ok_or_else(|| Error::InvalidConfig("this check needs --i".into()))
    };
    let mut warnings = Vec::new();
    let reports = match a.check {
        Check::Distribution => {
            let i = need_i()?;
            let cfg = GrowthConfig::new(a.k, a.n, seed).with_trace(i);
            let s = run_replicas(&cfg, a.replicas, a.threads)?;
            let trials = (a.n as u64).saturating_sub(u64::from(i));
            let exact = degree_pmf_from_seed(
                a.k,
                &SeedGraph::KLoops,
                u64::from(i),
                a.n as u64,
                eval_mode(a.mode, trials),
            )?;
            warnings.extend(
                exact
                    .warnings
                    .iter()
                    .map(|w| format!("cancellation in exact table at index {}", w.index)),
            );
            compare_degree_distribution(&s, &exact, &tol)?
        }
        Check::Sequence => {
            compare_degree_sequence_median(a.k, a.n, a.d_max, a.replicas, seed, a.threads, &tol)?
        }
        Check::Models => vec![compare_models_tv(
            a.k,
            need_i()?,
            a.n,
            a.replicas,
            seed,
            a.threads,
            &tol,
        )?],
        Check::PaClass => {
            let sample = sample_step_increments(
                a.k,
                a.n,
                &a.d_values,
                a.replicas,
                a.steps,
                seed,
                a.threads,
            )?;
            check_pa_class(&sample, &tol)?
        }
    };
    let mut out = reports_output(&reports, a.common.format);
    out.warnings = warnings;
    Ok(out)
}

fn cmd_verify(a: &VerifyArgs, err: &mut dyn Write) -> Result<Output, Error> {
    let opts = AcceptanceOptions {
        seed: a.common.seed,
        parallelism: a
            .threads
            .unwrap_or_else(|| AcceptanceOptions::default().parallelism),
        tolerances: Tolerances::embedded(),
    };
    let ids: Vec<u32> = if a.only.is_empty() {
        (1..=10).collect()
    } else {
        a.only.clone()
    };
    let mut outcomes = Vec::new();
    for id in ids {
        let o = if id == 10 {
            criterion_determinism()
        } else {
            acceptance::run_criterion(id, &opts)?
        };
        let _ = writeln!(err, "{}", o.line());
        outcomes.push(o);
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let body = match a.common.format {
        Format::Csv => {
            let mut s = String::from("id,title,verdict,detail\n");
            for o in &outcomes {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    o.id,
                    o.title,
                    if o.passed { "pass" } else { "fail" },
                    o.detail.replace(',', ";")
                );
            }
            s
        }
        Format::Json => to_json_text(&serde_json::to_value(&outcomes).expect("outcomes serialize")),
    };
    Ok(Output {
        body,
        status: if passed { EXIT_OK } else { EXIT_VERIFY_FAILED },
        warnings: Vec::new(),
    })
}

fn cmd_bench(a: &BenchArgs) -> Result<Output, Error> {
    let b = acceptance::benchmark_growth(a.k, a.n, a.common.seed)?;
    let body = match a.common.format {
        Format::Csv => format!(
            "k,n,seconds,vertices_per_second,edges_per_second,graph_heap_bytes,peak_rss_bytes\n{},{},{:.6},{:.1},{:.1},{},{}\n",
            b.k,
            b.n,
            b.seconds,
            b.vertices_per_second,
            b.edges_per_second,
            b.graph_heap_bytes,
            b.peak_rss_bytes.map_or(String::new(), |v| v.to_string())
        ),
        Format::Json => to_json_text(&serde_json::to_value(&b).expect("benchmark serializes")),
    };
    Ok(Output::ok(body))
}

/// Captured result of one in-process invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Captured {
    pub status: i32,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
}

pub fn run_captured(args: &[&str]) -> Captured {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv = std::iter::once("pagrow").chain(args.iter().copied());
    let status = run(argv, &mut stdout, &mut stderr);
    Captured {
        status,
        stdout,
        stderr,
    }
}

/// Invocations whose outputs must be byte-identical across repeated runs.
pub const DETERMINISM_CASES: &[&[&str]] = &[
    &["grow", "--k", "3", "--n", "2000", "--seed", "11"],
    &[
        "grow",
        "--k",
        "2",
        "--n",
        "500",
        "--seed",
        "3",
        "--histogram",
        "--format",
        "json",
    ],
    &[
        "grow", "--k", "2", "--n", "300", "--seed", "5", "--trace", "7",
    ],
    &["lcd", "--k", "2", "--n", "500", "--seed", "3"],
    &["exact-pmf", "--k", "2", "--i", "3", "--n", "40"],
    &[
        "exact-moments",
        "--k",
        "2",
        "--i",
        "3",
        "--n",
        "60",
        "--step",
        "7",
        "--format",
        "json",
    ],
    &["alpha", "--k", "3", "--d-max", "20"],
];

/// `mc` invocations that must not depend on `--threads`.
pub const THREAD_CASES: &[&[&str]] = &[
    &[
        "mc",
        "--k",
        "2",
        "--n",
        "300",
        "--i",
        "5",
        "--replicas",
        "400",
        "--seed",
        "9",
    ],
    &[
        "mc",
        "--k",
        "2",
        "--n",
        "300",
        "--i",
        "5",
        "--replicas",
        "200",
        "--check",
        "models",
        "--format",
        "json",
        "--seed",
        "9",
    ],
    &[
        "mc",
        "--k",
        "2",
        "--n",
        "400",
        "--replicas",
        "8",
        "--check",
        "pa-class",
        "--d-values",
        "2,4",
        "--steps",
        "200",
        "--seed",
        "9",
    ],
    &[
        "mc",
        "--k",
        "2",
        "--n",
        "2000",
        "--replicas",
        "5",
        "--check",
        "sequence",
        "--d-max",
        "6",
        "--seed",
        "9",
    ],
];

pub const THREAD_COUNTS: [usize; 3] = [1, 2, 4];

/// Byte-determinism of command outputs across runs and thread counts.
pub fn criterion_determinism() -> CriterionOutcome {
    let mut problems = Vec::new();
    let mut compared = 0;
    for case in DETERMINISM_CASES {
        let a = run_captured(case);
        let b = run_captured(case);
        compared += 1;
        if a != b || a.status != EXIT_OK || a.stdout.is_empty() {
            problems.push(case.join(" "));
        }
    }
    for case in THREAD_CASES {
        let outputs: Vec<Captured> = THREAD_COUNTS
            .iter()
            .map(|t| {
                let mut argv: Vec<&str> = case.to_vec();
                let t = t.to_string();
                argv.extend(["--threads", &t]);
                run_captured(&argv)
            })
            .collect();
        let again = {
            let mut argv: Vec<&str> = case.to_vec();
            argv.extend(["--threads", "2"]);
            run_captured(&argv)
        };
        compared += 1;
        let base = &outputs[0];
        let same_stdout = outputs
            .iter()
            .all(|o| o.stdout == base.stdout && o.status == base.status);
        if !same_stdout || again != outputs[1] || base.stdout.is_empty() {
            problems.push(format!("{} (threads {:?})", case.join(" "), THREAD_COUNTS));
        }
    }
    let passed = problems.is_empty();
    let detail = if passed {
        format!(
            "{compared} invocations byte-identical across repeated runs; mc identical for threads {:?}",
            THREAD_COUNTS
        )
    } else {
        format!("outputs differ for: {}", problems.join("; "))
    };
    CriterionOutcome {
        id: 10,
        title: acceptance::title(10),
        passed,
        detail,
        reports: Vec::new(),
    }
}
