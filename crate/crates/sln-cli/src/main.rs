//! `sln` — command-line driver for the latent-nonclassicality steering
//! detector.
//!
//! Subcommands cover the full workflow: evaluate or search witnesses at the
//! built-in benchmark operating points (`table1`), search arbitrary
//! parameters (`search`), map the classical amplitude threshold
//! (`gamma-min-scan`), generate and analyze synthetic click records
//! (`simulate`, `estimate`), test a single click triple (`check-classical`),
//! and optimize the amplitude pair (`optimize`).
//!
//! Exit codes: 0 success, 1 numerical or I/O failure, 2 usage error.

mod emit;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sln_core::cases::{benchmark_case, BENCHMARK_CASES};
use sln_core::geometry::reduce_to_independent;
use sln_core::optimizer::{optimize, OptimizerConfig};
use sln_core::physics::{classicality_margin, gamma_min, joint_table, ExperimentParams};
use sln_core::stats::{estimate, simulate};
use sln_core::witness::{evaluate, find_witness, SearchConfig, SearchMethod, Witness};

#[derive(Parser)]
#[command(name = "sln", version, about = "Detect steering of latent nonclassicality")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format. CSV flattens reports to key,value rows; event streams,
    /// scans and traces become one row per entry.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Size of the worker thread pool (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Exact facet enumeration of the classical polytope.
    Hull,
    /// Separating-hyperplane linear program (default; scales to fine grids).
    Lp,
}

impl From<Method> for SearchMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Hull => SearchMethod::Hull,
            Method::Lp => SearchMethod::Lp,
        }
    }
}

#[derive(Args)]
struct ScenarioArgs {
    /// Squeezing parameter of the source.
    #[arg(long)]
    r: f64,
    /// Alice-side detection efficiency, in (0, 1].
    #[arg(long)]
    eta_a: f64,
    /// Bob-side detection efficiency, in (0, 1].
    #[arg(long)]
    eta_b: f64,
    /// Local-oscillator amplitude of Alice's first setting.
    #[arg(long)]
    gamma1: f64,
    /// Local-oscillator amplitude of Alice's second setting.
    #[arg(long)]
    gamma2: f64,
}

impl ScenarioArgs {
    fn params(&self) -> anyhow::Result<ExperimentParams> {
        Ok(ExperimentParams::new(self.r, self.eta_a, self.eta_b, self.gamma1, self.gamma2)?)
    }
}

#[derive(Args)]
struct SearchArgs {
    /// Vertex-grid resolution M (the family has 4M points).
    #[arg(long, default_value_t = 30)]
    grid_m: usize,
    #[arg(long, value_enum, default_value_t = Method::Lp)]
    method: Method,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig { grid_m: self.grid_m, method: self.method.into(), ..Default::default() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a benchmark operating point (A, B or C).
    Table1 {
        /// Benchmark case label.
        #[arg(long, value_parser = parse_case)]
        case: String,
        /// Evaluate the stored reference direction instead of searching for
        /// a witness.
        #[arg(long)]
        reference_lambda: bool,
        #[command(flatten)]
        search: SearchArgs,
        /// Also simulate this many events per setting and append the sample
        /// estimate for the evaluated direction.
        #[arg(long)]
        n: Option<usize>,
        /// Seed for the event simulation.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },

    /// Search for a violation witness at explicit scenario parameters.
    Search {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        search: SearchArgs,
    },

    /// Tabulate the classical amplitude threshold γ_min over a range of
    /// Bob-side efficiencies.
    GammaMinScan {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        eta_a: f64,
        #[arg(long)]
        eta_b_from: f64,
        #[arg(long)]
        eta_b_to: f64,
        #[arg(long, default_value_t = 0.05)]
        eta_b_step: f64,
    },

    /// Draw synthetic click records (CSV columns setting,n_a,n_b).
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Events per setting.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },

    /// Estimate the scaled violation from a click-record file.
    Estimate {
        /// Events CSV as produced by `simulate`.
        #[arg(long)]
        events: PathBuf,
        #[command(flatten)]
        direction: DirectionArgs,
    },

    /// Test a single conditional click distribution "q0,q1,q2" against the
    /// classicality margin.
    CheckClassical {
        #[arg(value_parser = parse_triple)]
        triple: Triple,
    },

    /// Grid-plus-simplex search for the amplitude pair with the largest
    /// certified violation.
    Optimize {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        eta_a: f64,
        #[arg(long)]
        eta_b: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma_lo: f64,
        #[arg(long, default_value_t = 2.0)]
        gamma_hi: f64,
        /// Coarse-grid spacing.
        #[arg(long, default_value_t = 0.05)]
        gamma_step: f64,
        /// Amplitude resolution of the simplex refinement.
        #[arg(long, default_value_t = 1e-4)]
        gamma_tol: f64,
        #[command(flatten)]
        search: SearchArgs,
        /// Re-certify the optimum with the exact hull method.
        #[arg(long)]
        certify_hull: bool,
    },
}

/// Witness direction for `estimate`: either explicit coefficients or a
/// benchmark case's stored direction.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct DirectionArgs {
    /// Eight comma-separated witness coefficients.
    #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
    lambda: Option<Lambda>,
    /// Benchmark case label (uses that case's reference direction).
    #[arg(long, value_parser = parse_case)]
    case: Option<String>,
}

impl DirectionArgs {
    fn witness(&self) -> Witness {
        match (&self.lambda, &self.case) {
            (Some(l), _) => Witness { lambda: l.0 },
            (None, Some(c)) => benchmark_case(c).unwrap().witness(),
            (None, None) => unreachable!("clap group requires one"),
        }
    }
}

#[derive(Clone, Debug)]
struct Lambda([f64; 8]);

#[derive(Clone, Debug)]
struct Triple([f64; 3]);

fn parse_f64_fields<const N: usize>(s: &str, what: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated {what}, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("bad value {part:?}: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("value {part:?} is not finite"));
        }
    }
    Ok(out)
}

fn parse_lambda(s: &str) -> Result<Lambda, String> {
    parse_f64_fields::<8>(s, "witness coefficients").map(Lambda)
}

fn parse_triple(s: &str) -> Result<Triple, String> {
    let q = parse_f64_fields::<3>(s, "probabilities")?;
    if q.iter().any(|&x| x < -1e-9) {
        return Err("probabilities must be nonnegative".into());
    }
    let sum: f64 = q.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(format!("probabilities must sum to 1, got {sum}"));
    }
    Ok(Triple(q))
}

fn parse_case(s: &str) -> Result<String, String> {
    benchmark_case(s)
        .map(|c| c.label.to_string())
        .ok_or_else(|| {
            let known: Vec<&str> = BENCHMARK_CASES.iter().map(|c| c.label).collect();
            format!("unknown case {s:?} (known cases: {})", known.join(", "))
        })
}

/// A cross-flag validation failure: report like clap and exit 2.
fn usage_error(msg: &str) -> ! {
    Cli::command().error(clap::error::ErrorKind::ValueValidation, msg).exit()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            usage_error("--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: failed to size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let output = match &cli.command {
        Command::Table1 { case, reference_lambda, search, n, seed } => {
            run_table1(cli, case, *reference_lambda, search, *n, *seed)?
        }
        Command::Search { scenario, search } => run_search(cli, scenario, search)?,
        Command::GammaMinScan { r, eta_a, eta_b_from, eta_b_to, eta_b_step } => {
            run_gamma_scan(cli, *r, *eta_a, *eta_b_from, *eta_b_to, *eta_b_step)?
        }
        Command::Simulate { scenario, n, seed } => {
            let params = scenario.params()?;
            let events = simulate(&params, *n, *seed)?;
            match cli.format {
                Format::Csv => emit::events_csv(&events),
                Format::Json => {
                    let rows: Vec<Value> =
                        events.iter().map(|e| json!([e.setting, e.n_a, e.n_b])).collect();
                    emit::to_json(&json!({ "n": n, "seed": seed, "events": rows }))?
                }
            }
        }
        Command::Estimate { events, direction } => {
            let text = fs::read_to_string(events)
                .with_context(|| format!("reading {}", events.display()))?;
            let records = emit::parse_events_csv(&text)?;
            let witness = direction.witness();
            let est = estimate(&witness, &records)?;
            render(cli, emit::estimate_json(&witness.lambda, &est))?
        }
        Command::CheckClassical { triple } => {
            let margin = classicality_margin(&triple.0);
            render(
                cli,
                json!({
                    "q": triple.0.to_vec(),
                    "margin": margin,
                    "classical": margin >= -1e-12,
                }),
            )?
        }
        Command::Optimize {
            r,
            eta_a,
            eta_b,
            gamma_lo,
            gamma_hi,
            gamma_step,
            gamma_tol,
            search,
            certify_hull,
        } => {
            let cfg = OptimizerConfig {
                gamma_lo: *gamma_lo,
                gamma_hi: *gamma_hi,
                step: *gamma_step,
                gamma_tol: *gamma_tol,
                search: SearchConfig { polish: false, ..search.config() },
                certify_with_hull: *certify_hull,
            };
            match optimize(*r, *eta_a, *eta_b, &cfg)? {
                None => render(cli, json!({ "found": false }))?,
                Some(res) => {
                    if cli.format == Format::Csv {
                        let mut rows = String::from("gamma1,gamma2,v_coeff\n");
                        for (g1, g2, v) in &res.trace {
                            rows.push_str(&format!("{g1:.16e},{g2:.16e},{v:.16e}\n"));
                        }
                        rows
                    } else {
                        let trace: Vec<Value> =
                            res.trace.iter().map(|&(g1, g2, v)| json!([g1, g2, v])).collect();
                        emit::to_json(&json!({
                            "found": true,
                            "gamma1": res.gamma1,
                            "gamma2": res.gamma2,
                            "report": emit::report_json(&res.report),
                            "trace": trace,
                        }))?
                    }
                }
            }
        }
    };
    write_output(cli, &output)
}

fn render(cli: &Cli, doc: Value) -> anyhow::Result<String> {
    Ok(match cli.format {
        Format::Json => emit::to_json(&doc)?,
        Format::Csv => emit::to_kv_csv(&doc),
    })
}

fn write_output(cli: &Cli, content: &str) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

fn params_json(p: &ExperimentParams) -> Value {
    json!({
        "r": p.r,
        "eta_a": p.eta_a,
        "eta_b": p.eta_b,
        "gamma1": p.gamma1,
        "gamma2": p.gamma2,
    })
}

fn run_table1(
    cli: &Cli,
    case: &str,
    reference_lambda: bool,
    search: &SearchArgs,
    n: Option<usize>,
    seed: u64,
) -> anyhow::Result<String> {
    let case = benchmark_case(case).unwrap();
    let params = case.params();
    let witness = if reference_lambda {
        case.witness()
    } else {
        let v = reduce_to_independent(&joint_table(&params)?);
        match find_witness(&v, &search.config())? {
            Some(out) => out.witness,
            None => bail!("no witness certified at case {}", case.label),
        }
    };
    let report = evaluate(&witness, &params)?;
    let mut doc = json!({
        "case": case.label,
        "params": params_json(&params),
        "report": emit::report_json(&report),
    });
    if let Some(n) = n {
        let events = simulate(&params, n, seed)?;
        let est = estimate(&Witness { lambda: report.lambda }, &events)?;
        doc["estimate"] = emit::estimate_json(&report.lambda, &est);
    }
    render(cli, doc)
}

fn run_search(cli: &Cli, scenario: &ScenarioArgs, search: &SearchArgs) -> anyhow::Result<String> {
    let params = scenario.params()?;
    let v = reduce_to_independent(&joint_table(&params)?);
    let doc = match find_witness(&v, &search.config())? {
        None => json!({
            "params": params_json(&params),
            "found": false,
        }),
        Some(out) => {
            let report = evaluate(&out.witness, &params)?;
            json!({
                "params": params_json(&params),
                "found": true,
                "gap": out.gap,
                "report": emit::report_json(&report),
            })
        }
    };
    render(cli, doc)
}

fn run_gamma_scan(
    cli: &Cli,
    r: f64,
    eta_a: f64,
    from: f64,
    to: f64,
    step: f64,
) -> anyhow::Result<String> {
    if !(eta_a > 0.0 && eta_a <= 1.0) {
        usage_error("--eta-a must lie in (0, 1]");
    }
    if !(from > 0.0 && from <= to && to <= 1.0) {
        usage_error("need 0 < --eta-b-from <= --eta-b-to <= 1");
    }
    if !(step > 0.0) {
        usage_error("--eta-b-step must be positive");
    }
    if !(r >= 0.0 && r.is_finite()) {
        usage_error("--r must be a finite nonnegative number");
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    let rows: Vec<(f64, f64)> = (0..count)
        .map(|k| {
            let eta_b = from + k as f64 * step;
            (eta_b, gamma_min(r, eta_a, eta_b))
        })
        .collect();
    Ok(match cli.format {
        Format::Csv => {
            let mut out = String::from("eta_b,gamma_min\n");
            for (eta_b, g) in &rows {
                out.push_str(&format!("{eta_b:.16e},{g:.16e}\n"));
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = rows.iter().map(|&(e, g)| json!([e, g])).collect();
            emit::to_json(&json!({ "r": r, "eta_a": eta_a, "rows": rows }))?
        }
    })
}
