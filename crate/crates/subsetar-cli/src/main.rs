//! Command-line workflow for subset AR modelling: identification plots,
//! subset search, exact-likelihood fitting, residual diagnostics,
//! forecasting and simulation.
//!
//! Every command is a pure function of its input file, flags and seed:
//! identical invocations produce byte-identical outputs. Errors go to
//! stderr with a stable `error[CODE]:` prefix and a nonzero exit status.

mod report;
mod seriesfile;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use report::{digest, run_report, sig6, write_json, write_tsv};
use seriesfile::{read_series, write_series};
use subsetar::diagnostics;
use subsetar::forecast as fc;
use subsetar::likelihood;
use subsetar::pacf;
use subsetar::selection::{self, Criterion, SelectionConfig};
use subsetar::types::{SubsetSpec, TimeSeries, ZetaVector};

/// CLI-level error: a stable code plus a message.
#[derive(Debug)]
pub struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    fn new(code: &'static str, message: String) -> Self {
        CliError { code, message }
    }
    pub fn usage(message: String) -> Self {
        Self::new("E_USAGE", message)
    }
    pub fn parse(message: String) -> Self {
        Self::new("E_PARSE", message)
    }
    pub fn io(message: String) -> Self {
        Self::new("E_IO", message)
    }
}

impl From<subsetar::Error> for CliError {
    fn from(e: subsetar::Error) -> Self {
        use subsetar::Error::*;
        let code = match e {
            InvalidConfig(_)
            | EmptyLags
            | NonPositiveLag(_)
            | LagBeyondTable { .. }
            | DegreesOfFreedomNonPositive { .. } => "E_USAGE",
            TooShort { .. }
            | NonFiniteValue(_)
            | SeriesShorterThanOrder { .. }
            | OrderExceedsLength { .. }
            | HistoryTooShort { .. } => "E_DATA",
            _ => "E_NUMERIC",
        };
        CliError::new(code, e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "subsetar",
    version,
    about = "Subset autoregression toolkit: identify, select, fit, diagnose, forecast, simulate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Burg,
    Yw,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Bic,
    Aic,
    Aicc,
    Hq,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Criterion {
        match c {
            CriterionArg::Bic => Criterion::Bic,
            CriterionArg::Aic => Criterion::Aic,
            CriterionArg::Aicc => Criterion::Aicc,
            CriterionArg::Hq => Criterion::HannanQuinn,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Partial-autocorrelation plot data with pointwise 95% limits
    Pacf(PacfArgs),
    /// Subset search over an information criterion
    Select(SelectArgs),
    /// Exact maximum-likelihood fit of one lag set
    Fit(FitArgs),
    /// Residual autocorrelation diagnostics for one lag set
    Diagnose(DiagnoseArgs),
    /// Holdout evaluation or h-step forecasts
    Forecast(ForecastArgs),
    /// Simulate a Gaussian subset AR series to a file
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct PacfArgs {
    /// Series file (one value per line, optional header)
    input: PathBuf,
    /// Number of lags (default min(n/4, 40))
    #[arg(long)]
    lags: Option<usize>,
    /// Estimation method
    #[arg(long, value_enum, default_value = "burg")]
    method: MethodArg,
    /// Write plot data TSV (lag, value, lo, hi)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    input: PathBuf,
    /// Maximum autoregression order scanned
    #[arg(long, default_value_t = 20)]
    max_order: usize,
    /// Maximum number of parameters per candidate
    #[arg(long, default_value_t = 10)]
    max_params: usize,
    /// Number of candidates kept
    #[arg(long, default_value_t = 5)]
    top: usize,
    #[arg(long, value_enum, default_value = "bic")]
    criterion: CriterionArg,
    /// Refit the retained candidates by exact maximum likelihood and
    /// re-rank on the exact criterion
    #[arg(long)]
    exact: bool,
    /// Write the JSON run report
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    input: PathBuf,
    /// Comma-separated lag set, e.g. 1,2,7
    #[arg(long)]
    lags: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    input: PathBuf,
    #[arg(long)]
    lags: String,
    /// Residual-autocorrelation lags pooled in the diagnostics
    #[arg(long, default_value_t = 20)]
    acf_lags: usize,
    /// Simultaneous band level
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write residual-ACF plot data TSV (lag, value, lo, hi)
    #[arg(long)]
    acf_out: Option<PathBuf>,
}

#[derive(Args)]
struct ForecastArgs {
    input: PathBuf,
    #[arg(long)]
    lags: String,
    /// Train/test split index: fit on the first SPLIT values, evaluate
    /// rolling one-step forecasts on the rest
    #[arg(long, conflicts_with = "horizon")]
    split: Option<usize>,
    /// Forecast this many steps past the end of the series
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Comma-separated lag set, e.g. 1,2,7
    #[arg(long)]
    lags: String,
    /// Comma-separated partial autocorrelations, one per lag
    #[arg(long)]
    zeta: String,
    /// Series length
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Process mean added to the simulated values
    #[arg(long, default_value_t = 0.0)]
    mean: f64,
    /// Innovation variance
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Output series file
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Pacf(args) => cmd_pacf(args),
        Command::Select(args) => cmd_select(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Forecast(args) => cmd_forecast(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code, e.message);
            if e.code == "E_USAGE" {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Worker count for the parallel batch operations, capped by the
/// SUBSETAR_THREADS environment variable when set.
fn init_thread_pool() {
    if let Ok(raw) = std::env::var("SUBSETAR_THREADS") {
        if let Ok(k) = raw.trim().parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
        }
    }
}

fn parse_lags(raw: &str) -> Result<Vec<i64>, CliError> {
    raw.split(',')
        .map(|tok| {
            tok.trim().parse::<i64>().map_err(|_| {
                CliError::usage(format!("malformed lag list {raw:?}: bad token {tok:?}"))
            })
        })
        .collect()
}

fn parse_reals(raw: &str, what: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|_| {
                CliError::usage(format!("malformed {what} list {raw:?}: bad token {tok:?}"))
            })
        })
        .collect()
}

fn load(input: &Path) -> Result<(TimeSeries, Value), CliError> {
    let file = read_series(input)?;
    let series = TimeSeries::new(file.values.clone()).map_err(CliError::from)?;
    let meta = json!({
        "path": input.display().to_string(),
        "sha256": digest(&file.bytes),
        "n": series.len(),
        "header": file.header,
    });
    Ok((series, meta))
}

fn maybe_write(out: Option<&PathBuf>, doc: &Value) -> Result<(), CliError> {
    if let Some(path) = out {
        write_json(path, doc)?;
    }
    Ok(())
}

fn cmd_pacf(args: PacfArgs) -> Result<(), CliError> {
    let (series, _meta) = load(&args.input)?;
    let centered = series.centered();
    let k = match args.lags {
        Some(0) => {
            return Err(CliError::usage("--lags must be at least 1".into()));
        }
        Some(k) => k,
        None => pacf::default_lag_max(centered.len()),
    };
    let mut table = match args.method {
        MethodArg::Burg => pacf::burg_pacf(&centered, k)?,
        MethodArg::Yw => pacf::yule_walker_pacf(&centered, k)?,
    };
    table.compute_stderr()?;
    let stderr = table.stderr().expect("just computed").to_vec();

    println!(
        "# partial autocorrelations ({}), n = {}",
        table.method(),
        centered.len()
    );
    println!(
        "{:>4} {:>12} {:>12} {:>12} {:>12}",
        "lag", "estimate", "sd", "lo", "hi"
    );
    let mut rows = Vec::with_capacity(k);
    for (i, (&e, &sd)) in table.estimates().iter().zip(&stderr).enumerate() {
        let lo = e - 1.96 * sd;
        let hi = e + 1.96 * sd;
        println!(
            "{:>4} {:>12} {:>12} {:>12} {:>12}",
            i + 1,
            sig6(e),
            sig6(sd),
            sig6(lo),
            sig6(hi)
        );
        rows.push(vec![(i + 1) as f64, e, lo, hi]);
    }
    if let Some(out) = &args.out {
        write_tsv(out, &["lag", "value", "lo", "hi"], &rows)?;
    }
    Ok(())
}

fn cmd_select(args: SelectArgs) -> Result<(), CliError> {
    let (series, meta) = load(&args.input)?;
    let criterion: Criterion = args.criterion.into();
    let mut cfg = SelectionConfig::new(args.max_order, args.max_params, args.top);
    cfg.criterion = criterion;
    let candidates = selection::select_models(&series, &cfg)?;

    let mut results = json!({
        "criterion": criterion.to_string(),
        "candidates": candidates.iter().map(|c| json!({
            "lags": c.lags,
            "score": c.score,
            "approximate": c.approximate,
        })).collect::<Vec<_>>(),
    });

    println!(
        "# candidate lag sets by approximate {} (L = {}, M = {})",
        criterion, args.max_order, args.max_params
    );
    println!("{:>4}  {:<24} {:>12}", "rank", "lags", "score");
    for (i, c) in candidates.iter().enumerate() {
        println!(
            "{:>4}  {:<24} {:>12}",
            i + 1,
            lag_string(&c.lags),
            sig6(c.score)
        );
    }

    if args.exact {
        let outcome = selection::rescore_exact(&series, &candidates, criterion);
        println!("\n# exact re-ranking (criterion from the exact loglikelihood)");
        println!(
            "{:>4}  {:<24} {:>12} {:>12} {:>12}",
            "rank", "lags", "score", "loglik", "sigma2"
        );
        for (i, c) in outcome.models.iter().enumerate() {
            println!(
                "{:>4}  {:<24} {:>12} {:>12} {:>12}",
                i + 1,
                lag_string(&c.lags),
                sig6(c.score),
                sig6(c.loglik.unwrap_or(f64::NAN)),
                sig6(c.sigma2.unwrap_or(f64::NAN))
            );
        }
        for (lags, err) in &outcome.failures {
            eprintln!("warning: exact fit failed for {}: {err}", lag_string(lags));
        }
        results["exact"] = json!(outcome
            .models
            .iter()
            .map(|c| json!({
                "lags": c.lags,
                "score": c.score,
                "loglik": c.loglik,
                "sigma2": c.sigma2,
            }))
            .collect::<Vec<_>>());
        results["exact_failures"] = json!(outcome
            .failures
            .iter()
            .map(|(lags, err)| json!({"lags": lags, "error": err.to_string()}))
            .collect::<Vec<_>>());
    }

    let config = json!({
        "max_order": args.max_order,
        "max_params": args.max_params,
        "top": args.top,
        "criterion": criterion.to_string(),
        "exact": args.exact,
    });
    maybe_write(
        args.out.as_ref(),
        &run_report("select", meta, config, results),
    )
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let (series, meta) = load(&args.input)?;
    let spec = SubsetSpec::new(&parse_lags(&args.lags)?)?;
    let fit = likelihood::fit_mle(&series, &spec, None)?;

    println!("# fit of lag set {spec}  (n = {})", fit.n);
    println!("{:>4} {:>12} {:>12}", "lag", "zeta", "sd");
    for ((lag, z), sd) in spec.lags().iter().zip(fit.zeta.values()).zip(&fit.stderr) {
        println!("{:>4} {:>12} {:>12}", lag, sig6(*z), sig6(*sd));
    }
    println!(
        "phi: {}",
        fit.phi
            .values()
            .iter()
            .map(|v| sig6(*v))
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!("mean      {}", sig6(fit.mean));
    println!("sigma2    {}", sig6(fit.sigma2));
    println!("sigma     {}", sig6(fit.sigma2.sqrt()));
    println!("loglik    {}", sig6(fit.loglik));
    println!("iterations {}", fit.iterations);

    let info_rows: Vec<Vec<f64>> = (0..fit.info.nrows())
        .map(|i| (0..fit.info.ncols()).map(|j| fit.info[(i, j)]).collect())
        .collect();
    let results = json!({
        "lags": spec.lags(),
        "zeta": fit.zeta.values(),
        "stderr": fit.stderr,
        "phi": fit.phi.values(),
        "mean": fit.mean,
        "sigma2": fit.sigma2,
        "loglik": fit.loglik,
        "n": fit.n,
        "iterations": fit.iterations,
        "information": info_rows,
    });
    let config = json!({ "lags": spec.lags() });
    maybe_write(args.out.as_ref(), &run_report("fit", meta, config, results))
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<(), CliError> {
    let (series, meta) = load(&args.input)?;
    let spec = SubsetSpec::new(&parse_lags(&args.lags)?)?;
    if args.acf_lags <= spec.len() {
        return Err(CliError::from(
            subsetar::Error::DegreesOfFreedomNonPositive {
                lags: args.acf_lags,
                m: spec.len(),
            },
        ));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::usage(format!(
            "--alpha must be in (0, 1), got {}",
            args.alpha
        )));
    }
    let fit = likelihood::fit_mle(&series, &spec, None)?;
    let rep = diagnostics::diagnose(&series, &fit, args.acf_lags, args.alpha)?;

    println!(
        "# residual diagnostics for lag set {spec}  (L = {}, alpha = {})",
        args.acf_lags, args.alpha
    );
    println!("{:>4} {:>12} {:>12} {:>12}", "lag", "racf", "lo", "hi");
    let mut rows = Vec::new();
    for (i, (&r, &hw)) in rep.racf.iter().zip(&rep.band_halfwidth).enumerate() {
        println!(
            "{:>4} {:>12} {:>12} {:>12}",
            i + 1,
            sig6(r),
            sig6(-hw),
            sig6(hw)
        );
        rows.push(vec![(i + 1) as f64, r, -hw, hw]);
    }

    // portmanteau table at round checkpoints up to L, plus L itself
    let mut checkpoints: Vec<usize> = (1..=args.acf_lags / 10).map(|i| i * 10).collect();
    checkpoints.push(args.acf_lags);
    checkpoints.retain(|&l| l > spec.len());
    checkpoints.dedup();
    println!("\n{:>4} {:>12} {:>4} {:>12}", "L", "Q", "df", "p");
    let mut q_table = Vec::new();
    for &l in &checkpoints {
        let t = diagnostics::ljung_box(&rep.racf, series.len(), spec.len(), l)?;
        println!(
            "{:>4} {:>12} {:>4} {:>12}",
            l,
            sig6(t.statistic),
            t.df,
            sig6(t.p_value)
        );
        q_table.push(json!({
            "lags": l,
            "statistic": t.statistic,
            "df": t.df,
            "p_value": t.p_value,
        }));
    }

    if let Some(acf_out) = &args.acf_out {
        write_tsv(acf_out, &["lag", "value", "lo", "hi"], &rows)?;
    }
    let results = json!({
        "racf": rep.racf,
        "est_sd": rep.est_sd,
        "band_multiplier": rep.band_multiplier,
        "band_halfwidth": rep.band_halfwidth,
        "ljung_box": q_table,
        "fit": {
            "lags": spec.lags(),
            "zeta": fit.zeta.values(),
            "stderr": fit.stderr,
            "sigma2": fit.sigma2,
            "loglik": fit.loglik,
        },
    });
    let config = json!({
        "lags": spec.lags(),
        "acf_lags": args.acf_lags,
        "alpha": args.alpha,
    });
    maybe_write(
        args.out.as_ref(),
        &run_report("diagnose", meta, config, results),
    )
}

fn cmd_forecast(args: ForecastArgs) -> Result<(), CliError> {
    let (series, meta) = load(&args.input)?;
    let spec = SubsetSpec::new(&parse_lags(&args.lags)?)?;
    match (args.split, args.horizon) {
        (Some(split), None) => {
            if split >= series.len() {
                return Err(CliError::usage(format!(
                    "--split {split} must be below the series length {}",
                    series.len()
                )));
            }
            let report = fc::holdout_eval(&series, split, std::slice::from_ref(&spec))?;
            println!(
                "# holdout: train {} / test {}",
                report.train_len, report.test_len
            );
            println!(
                "{:<24} {:>12} {:>12} {:>12} {:>12}",
                "lags", "loglik", "BIC", "sigma", "RMSE"
            );
            for e in &report.entries {
                println!(
                    "{:<24} {:>12} {:>12} {:>12} {:>12}",
                    e.spec.to_string(),
                    sig6(e.loglik),
                    sig6(e.bic),
                    sig6(e.sigma2.sqrt()),
                    sig6(e.rmse)
                );
            }
            for (s, err) in &report.failures {
                eprintln!("warning: fit failed for {s}: {err}");
            }
            let results = json!({
                "train_len": report.train_len,
                "test_len": report.test_len,
                "models": report.entries.iter().map(|e| json!({
                    "lags": e.spec.lags(),
                    "loglik": e.loglik,
                    "bic": e.bic,
                    "sigma2": e.sigma2,
                    "rmse": e.rmse,
                })).collect::<Vec<_>>(),
                "failures": report.failures.iter().map(|(s, err)| json!({
                    "lags": s.lags(), "error": err,
                })).collect::<Vec<_>>(),
            });
            let config = json!({ "lags": spec.lags(), "split": split });
            maybe_write(
                args.out.as_ref(),
                &run_report("forecast", meta, config, results),
            )
        }
        (None, Some(horizon)) => {
            let fit = likelihood::fit_mle(&series, &spec, None)?;
            let out = fc::forecast(&fit, &series, horizon)?;
            println!("# {horizon}-step forecasts from t = {}", out.origin);
            println!("{:>4} {:>12} {:>12}", "h", "forecast", "sd");
            for h in 0..horizon {
                println!(
                    "{:>4} {:>12} {:>12}",
                    h + 1,
                    sig6(out.forecasts[h]),
                    sig6(out.stderr[h])
                );
            }
            let results = json!({
                "origin": out.origin,
                "forecasts": out.forecasts,
                "stderr": out.stderr,
                "fit": {
                    "lags": spec.lags(),
                    "zeta": fit.zeta.values(),
                    "sigma2": fit.sigma2,
                    "loglik": fit.loglik,
                },
            });
            let config = json!({ "lags": spec.lags(), "horizon": horizon });
            maybe_write(
                args.out.as_ref(),
                &run_report("forecast", meta, config, results),
            )
        }
        _ => Err(CliError::usage(
            "exactly one of --split or --horizon is required".into(),
        )),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let spec = SubsetSpec::new(&parse_lags(&args.lags)?)?;
    let zeta_vals = parse_reals(&args.zeta, "zeta")?;
    if zeta_vals.len() != spec.len() {
        return Err(CliError::usage(format!(
            "{} zeta values supplied for {} lags",
            zeta_vals.len(),
            spec.len()
        )));
    }
    let zeta = ZetaVector::new(spec.clone(), zeta_vals)?;
    let series = fc::simulate(&zeta, args.mean, args.sigma2, args.n, args.seed)?;
    write_series(&args.out, series.values())?;
    println!(
        "wrote {} values for lag set {spec} (seed {}) to {}",
        args.n,
        args.seed,
        args.out.display()
    );
    Ok(())
}

fn lag_string(lags: &[usize]) -> String {
    if lags.is_empty() {
        return "(none)".to_string();
    }
    format!(
        "({})",
        lags.iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )
}
