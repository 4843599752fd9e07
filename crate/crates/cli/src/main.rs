//! Command-line front end: compute tensors at a point, run verification
//! suites, or scan a change-parameter grid.
//!
//! Exit codes: 0 on success, 1 when any identity fails, 2 on configuration
//! or usage errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use finslerlab::output;
use finslerlab::{Format, RunConfig};
use finslerlab_core::catalog::{CovectorField, FieldSpec, MetricSpec, ScalarField};
use finslerlab_core::change::{classify_change, ChangeFields, ChangeFrame};
use finslerlab_core::geometry::{Frame, PointState};
use finslerlab_core::jet::JetContext;
use finslerlab_core::verify::{run_suites, summary_line, VerificationReport};

#[derive(Parser)]
#[command(
    name = "finslerlab",
    version,
    about = "Finsler tensor computation and identity verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every tensor of the pipeline at one point and print a JSON dump.
    Compute(ComputeArgs),
    /// Run verification suites over seeded sample sets.
    Verify(VerifyArgs),
    /// Sweep a grid of change parameters and tabulate the difference tensor.
    Scan(ScanArgs),
}

#[derive(Args)]
struct ComputeArgs {
    /// Metric spec JSON file.
    #[arg(long)]
    metric: PathBuf,
    /// Change spec JSON file (sigma and b); omit for the unbarred frame only.
    #[arg(long)]
    change: Option<PathBuf>,
    /// Sample point as "x1,..,xn;y1,..,yn".
    #[arg(long)]
    at: String,
    /// Jet truncation order.
    #[arg(long, default_value_t = finslerlab_core::DEFAULT_ORDER)]
    order: usize,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Full run-config JSON file (metric and change inline).
    #[arg(long, conflicts_with_all = ["metric", "change"])]
    config: Option<PathBuf>,
    /// Metric spec JSON file; omit to run the built-in catalog matrix.
    #[arg(long, requires = "change")]
    metric: Option<PathBuf>,
    /// Change spec JSON file.
    #[arg(long, requires = "metric")]
    change: Option<PathBuf>,
    /// Suite name (repeatable); defaults to all suites.
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Sample count per combination.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Sampling seed.
    #[arg(long, default_value_t = 0xf1a5_1e55)]
    seed: u64,
    /// Jet truncation order.
    #[arg(long, default_value_t = finslerlab_core::DEFAULT_ORDER)]
    order: usize,
    /// Report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, default_value_t = Format::Json)]
    format: Format,
    /// Also sweep the reduced dimension-3 matrix (built-in runs only).
    #[arg(long)]
    include_n3: bool,
}

#[derive(Args)]
struct ScanArgs {
    /// Metric spec JSON file; defaults to the flat metric in dimension 2.
    #[arg(long)]
    metric: Option<PathBuf>,
    /// Comma-separated scalar-field amplitudes (sigma = a * x^1).
    #[arg(long, default_value = "0,0.1,0.2,0.4")]
    sigma_amplitudes: String,
    /// Comma-separated 1-form magnitudes (b = (m, 0, ..)).
    #[arg(long, default_value = "0,0.1,0.3")]
    b_magnitudes: String,
    /// Samples per cell (at least 30 for the predicates).
    #[arg(long, default_value_t = 30)]
    samples: usize,
    #[arg(long, default_value_t = 0xf1a5_1e55)]
    seed: u64,
    #[arg(long, default_value_t = finslerlab_core::DEFAULT_ORDER)]
    order: usize,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}


/// Command failures split by exit class: data errors (a valid request whose
/// point or change is outside the domain) exit 1, usage and config errors
/// exit 2.
enum CmdError {
    Data(String),
    Usage(String),
}

impl From<String> for CmdError {
    fn from(message: String) -> Self {
        CmdError::Usage(message)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(args) => cmd_compute(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Scan(args) => cmd_scan(args),
    };
    match result {
        Ok(code) => code,
        Err(CmdError::Data(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CmdError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf, what: &str) -> Result<T, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {what} file {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid {what} JSON: {e}"))
}

fn parse_point(at: &str, n: usize) -> Result<PointState, String> {
    let (xs, ys) =
        at.split_once(';').ok_or_else(|| format!("--at expects \"x1,..;y1,..\", got `{at}`"))?;
    let parse = |part: &str, label: &str| -> Result<Vec<f64>, String> {
        part.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad {label} coordinate `{tok}`: {e}"))
            })
            .collect()
    };
    let x = parse(xs, "x")?;
    let y = parse(ys, "y")?;
    if x.len() != n || y.len() != n {
        return Err(format!("point arity {}/{} does not match dimension {n}", x.len(), y.len()));
    }
    Ok(PointState::new(x, y))
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_compute(args: ComputeArgs) -> Result<ExitCode, CmdError> {
    let metric: MetricSpec = read_json(&args.metric, "metric")?;
    metric.validate().map_err(|e| CmdError::Usage(e.to_string()))?;
    if args.order < 4 {
        return Err(CmdError::Usage("--order must be at least 4".to_string()));
    }
    let point = parse_point(&args.at, metric.dim())?;
    let ctx = JetContext::new(metric.dim(), args.order);

    let l = metric.eval(&ctx, &point).map_err(|e| CmdError::Data(e.to_string()))?;
    let frame = Frame::build(&ctx, point, l).map_err(|e| CmdError::Data(e.to_string()))?;

    let mut doc = serde_json::Map::new();
    doc.insert("metric".into(), serde_json::to_value(&metric).expect("spec serializes"));
    doc.insert("jet_order".into(), args.order.into());
    doc.insert("unbarred".into(), output::frame_to_json(&frame));

    if let Some(change_path) = &args.change {
        let change: FieldSpec = read_json(change_path, "change")?;
        let fields = ChangeFields::from_spec(&change, &ctx, &frame.point.x)
            .map_err(|e| CmdError::Data(e.to_string()))?;
        let cf = ChangeFrame::build(&frame, &fields).map_err(|e| CmdError::Data(e.to_string()))?;
        let barred = Frame::build(&ctx, frame.point.clone(), cf.lbar.clone())
            .map_err(|e| CmdError::Data(e.to_string()))?;
        doc.insert("change".into(), serde_json::to_value(&change).expect("spec serializes"));
        doc.insert("barred".into(), output::change_to_json(&frame, &cf, &barred));
    }

    let mut text =
        serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("dump serializes");
    text.push('\n');
    write_or_print(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn run_one(config: &RunConfig) -> Result<Vec<VerificationReport>, String> {
    let suites = config.resolve_suites()?;
    let vc = config.to_verify_config();
    run_suites(&suites, &vc).map_err(|e| e.to_string())
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, CmdError> {
    let mut runs: Vec<RunConfig> = Vec::new();
    if let Some(path) = &args.config {
        let mut config: RunConfig = read_json(path, "run config")?;
        if !args.suites.is_empty() {
            config.suites = args.suites.clone();
        }
        runs.push(config);
    } else if let (Some(mpath), Some(cpath)) = (&args.metric, &args.change) {
        let metric: MetricSpec = read_json(mpath, "metric")?;
        let change: FieldSpec = read_json(cpath, "change")?;
        runs.push(assemble(&args, metric, change));
    } else {
        for (_, metric, change) in finslerlab::matrix::combinations(2) {
            runs.push(assemble(&args, metric, change));
        }
        if args.include_n3 {
            for (_, metric, change) in finslerlab::matrix::combinations_n3() {
                runs.push(assemble(&args, metric, change));
            }
        }
    }

    let mut all_reports = Vec::new();
    let mut any_fail = false;
    for config in &runs {
        let reports = run_one(config)?;
        for r in &reports {
            if !r.pass {
                any_fail = true;
                eprintln!("FAIL {}", summary_line(r));
            }
        }
        all_reports.extend(reports);
    }

    // The echoed run block uses the first run (the only one for explicit
    // configs; matrix runs echo the matrix head). A config-file output block
    // applies when no flags override it.
    let head = runs.first().expect("at least one run");
    let (out_path, format) = match (&args.out, &head.output) {
        (None, Some(spec)) => (Some(PathBuf::from(&spec.path)), spec.format),
        (path, _) => (path.clone(), args.format),
    };
    let text = match format {
        Format::Json => output::reports_to_json(head, &all_reports),
        Format::Csv => output::reports_to_csv(&all_reports),
    };
    write_or_print(&out_path, &text)?;
    // File output in JSON also gets the CSV summary next to it.
    if let (Some(path), Format::Json) = (&out_path, format) {
        let csv_path = path.with_extension("csv");
        fs::write(&csv_path, output::reports_to_csv(&all_reports))
            .map_err(|e| format!("cannot write {}: {e}", csv_path.display()))?;
    }

    eprintln!(
        "{} reports, {} failed",
        all_reports.len(),
        all_reports.iter().filter(|r| !r.pass).count()
    );
    Ok(if any_fail { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn assemble(args: &VerifyArgs, metric: MetricSpec, change: FieldSpec) -> RunConfig {
    let mut config = RunConfig::new(metric, change);
    if !args.suites.is_empty() {
        config.suites = args.suites.clone();
    }
    config.samples = args.samples;
    config.seed = args.seed;
    config.jet_order = args.order;
    config
}

fn parse_grid(list: &str, label: &str) -> Result<Vec<f64>, String> {
    let values: Result<Vec<f64>, String> = list
        .split(',')
        .map(|tok| tok.trim().parse::<f64>().map_err(|e| format!("bad {label} entry `{tok}`: {e}")))
        .collect();
    let values = values?;
    if values.is_empty() {
        return Err(format!("{label} grid is empty"));
    }
    Ok(values)
}

fn cmd_scan(args: ScanArgs) -> Result<ExitCode, CmdError> {
    let metric: MetricSpec = match &args.metric {
        Some(path) => read_json(path, "metric")?,
        None => MetricSpec::Euclidean { n: 2 },
    };
    metric.validate().map_err(|e| CmdError::Usage(e.to_string()))?;
    let n = metric.dim();
    let sigma_amps = parse_grid(&args.sigma_amplitudes, "sigma amplitude")?;
    let b_mags = parse_grid(&args.b_magnitudes, "b magnitude")?;
    let ctx = JetContext::new(n, args.order);

    let mut csv = String::from("sigma_amplitude,b_magnitude,max_d,homothetic,b_parallel,status\n");
    for &amp in &sigma_amps {
        for &mag in &b_mags {
            let sigma = if amp == 0.0 {
                ScalarField::Zero
            } else {
                let mut coeffs = vec![0.0; n];
                coeffs[0] = amp;
                ScalarField::Linear { coeffs }
            };
            let mut values = vec![0.0; n];
            values[0] = mag;
            let b =
                if mag == 0.0 { CovectorField::Zero } else { CovectorField::Constant { values } };
            let change = FieldSpec { sigma, b };

            // A constant 1-form of unit length or longer breaks positivity of
            // the changed metric over a flat base; mark and continue.
            let structurally_invalid = mag >= 1.0 && matches!(metric, MetricSpec::Euclidean { .. });
            let row = if structurally_invalid {
                format!("{amp},{mag},,,,invalid\n")
            } else {
                match finslerlab_core::catalog::sample_points(
                    &metric,
                    Some(&change),
                    args.samples,
                    args.seed,
                    &ctx,
                )
                .map_err(|e| e.to_string())
                .and_then(|batch| {
                    classify_change(&metric, &change, &batch.points, &ctx)
                        .map_err(|e| e.to_string())
                }) {
                    Ok(class) => format!(
                        "{amp},{mag},{:e},{},{},ok\n",
                        class.max_d, class.is_homothetic, class.is_b_parallel
                    ),
                    Err(_) => format!("{amp},{mag},,,,invalid\n"),
                }
            };
            csv.push_str(&row);
        }
    }

    write_or_print(&args.out, &csv)?;
    Ok(ExitCode::SUCCESS)
}
