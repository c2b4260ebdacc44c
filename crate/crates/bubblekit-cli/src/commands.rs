//! Subcommand definitions and execution.
//!
//! Exit codes: 0 success, 1 numerical/convergence/runtime failure,
//! 2 usage or validation error. Every command resolves its configuration
//! (flags over optional `--config` manifest), writes the resolved manifest
//! next to its outputs, and is bit-reproducible from that manifest.

// `!(x > 0.0)` rejects NaN as well; keep the negated form in validations.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use bubblekit::analytics::{cond_mean_return, superexp_condition, superexp_duration};
use bubblekit::calibrate::{fit_qmle_default, yield_series_from_prices};
use bubblekit::divergence::run_matrix;
use bubblekit::model::{
    amplification_phi, classify_regime, emergent_premium, stationary_moments, PriceContext, Regime,
    YieldParams,
};
use bubblekit::sde::{price_path, simulate_ensemble, Scheme, SeriesSample, SimSpec, YieldModel};

use bubblekit_cli::csvio;
use bubblekit_cli::report::{
    AnalyzeConfig, CalibrateReport, FitConfig, SimulateConfig, TestCell, TestReport, SCHEMA_VERSION,
};

#[derive(Parser)]
#[command(
    name = "bubblekit",
    version,
    about = "Earning-yield bubble model: simulation, analysis, calibration and model comparison"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate yield and price paths, one CSV per path plus a manifest.
    Simulate(SimulateArgs),
    /// Emit expected-return curves, stationary summaries and the
    /// super-exponential diagnostics as plot-ready CSV.
    Analyze(AnalyzeArgs),
    /// Calibrate the yield dynamics to a price CSV by quasi-maximum
    /// likelihood and write the report JSON plus the yield series.
    Calibrate(CalibrateArgs),
    /// Run the 3 alternatives x 3 divergence kinds comparison matrix.
    Test(TestArgs),
}

enum CmdError {
    Usage(String),
    Runtime(String),
}

impl From<csvio::CsvError> for CmdError {
    fn from(e: csvio::CsvError) -> Self {
        CmdError::Usage(e.to_string())
    }
}

impl From<bubblekit::Error> for CmdError {
    fn from(e: bubblekit::Error) -> Self {
        match e {
            bubblekit::Error::Invalid(_) | bubblekit::Error::Domain(_) => {
                CmdError::Usage(e.to_string())
            }
            _ => CmdError::Runtime(e.to_string()),
        }
    }
}

type CmdResult = Result<i32, CmdError>;

pub fn run(cli: Cli) -> i32 {
    configure_threads();
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Test(args) => cmd_test(args),
    };
    match outcome {
        Ok(code) => code,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CmdError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

/// BUBBLEKIT_THREADS caps the rayon pool; unset means rayon's default.
fn configure_threads() {
    if let Ok(v) = std::env::var("BUBBLEKIT_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CmdError> {
    fs::create_dir_all(dir)
        .map_err(|e| CmdError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CmdError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CmdError::Runtime(format!("serialization failed: {e}")))?;
    fs::write(path, text + "\n")
        .map_err(|e| CmdError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CmdError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CmdError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CmdError::Usage(format!("malformed config {}: {e}", path.display())))
}

fn parse_grid(s: &str, what: &str) -> Result<Vec<f64>, CmdError> {
    let grid: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    let grid = grid.map_err(|_| CmdError::Usage(format!("{what} grid `{s}` is not numeric")))?;
    if grid.is_empty() {
        return Err(CmdError::Usage(format!("{what} grid is empty")));
    }
    Ok(grid)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SimulateArgs {
    /// Manifest JSON providing defaults for any omitted flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Yield dynamics: cir | bm | gbm | ckls.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Long-run mean yield gamma* (CIR/CKLS); b = alpha * gamma*.
    #[arg(long)]
    gamma_star: Option<f64>,
    /// Drift intercept b; alternative to --gamma-star.
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    psi: Option<f64>,
    /// CKLS elasticity exponent in (0, 1.5].
    #[arg(long)]
    elasticity: Option<f64>,
    #[arg(long)]
    earnings: Option<f64>,
    /// Initial price; the initial yield is earnings / p0.
    #[arg(long)]
    p0: Option<f64>,
    /// Number of steps per path.
    #[arg(long)]
    n: Option<usize>,
    /// Step size in years (1/252 is one trading day).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// euler | exact (exact is CIR-only).
    #[arg(long)]
    scheme: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "simulate_out")]
    out: PathBuf,
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let base: Option<SimulateConfig> = match &args.config {
        Some(p) => Some(load_json(p)?),
        None => None,
    };
    let get = |flag: Option<f64>, from_cfg: Option<f64>, name: &str| -> Result<f64, CmdError> {
        flag.or(from_cfg)
            .ok_or_else(|| CmdError::Usage(format!("--{name} is required")))
    };

    let model_name = args
        .model
        .or(base.as_ref().map(|c| c.model.clone()))
        .unwrap_or_else(|| "cir".to_string())
        .to_lowercase();
    let psi = get(args.psi, base.as_ref().map(|c| c.psi), "psi")?;
    let earnings = get(args.earnings, base.as_ref().map(|c| c.earnings), "earnings")?;
    let p0 = get(args.p0, base.as_ref().map(|c| c.p0), "p0")?;
    let n = args
        .n
        .or(base.as_ref().map(|c| c.n))
        .ok_or_else(|| CmdError::Usage("--n is required".to_string()))?;
    let dt = get(args.dt, base.as_ref().map(|c| c.dt), "dt")?;
    let paths = args
        .paths
        .or(base.as_ref().map(|c| c.paths))
        .ok_or_else(|| CmdError::Usage("--paths is required".to_string()))?;
    let seed = args
        .seed
        .or(base.as_ref().map(|c| c.seed))
        .ok_or_else(|| CmdError::Usage("--seed is required".to_string()))?;
    let scheme_name = args
        .scheme
        .or(base.as_ref().map(|c| c.scheme.clone()))
        .unwrap_or_else(|| "euler".to_string())
        .to_lowercase();

    if paths == 0 {
        return Err(CmdError::Usage("--paths must be >= 1".to_string()));
    }
    if !(p0 > 0.0 && earnings > 0.0) {
        return Err(CmdError::Usage(
            "--p0 and --earnings must be > 0".to_string(),
        ));
    }
    let x0 = earnings / p0;

    let alpha = args.alpha.or(base.as_ref().and_then(|c| c.alpha));
    let gamma_star = args.gamma_star.or(base.as_ref().and_then(|c| c.gamma_star));
    let b_flag = args.b.or(base.as_ref().and_then(|c| c.b));
    let elasticity = args.elasticity.or(base.as_ref().and_then(|c| c.elasticity));

    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| CmdError::Usage(format!("--{name} is required for model {model_name}")))
    };
    let resolve_b = |alpha: f64| -> Result<f64, CmdError> {
        match (b_flag, gamma_star) {
            (Some(b), _) => Ok(b),
            (None, Some(g)) => Ok(alpha * g),
            (None, None) => Err(CmdError::Usage("provide --b or --gamma-star".to_string())),
        }
    };
    let model = match model_name.as_str() {
        "cir" => {
            let a = need(alpha, "alpha")?;
            YieldModel::Cir {
                b: resolve_b(a)?,
                alpha: a,
                psi,
            }
        }
        "bm" => YieldModel::Bm {
            b: need(b_flag, "b")?,
            psi,
        },
        "gbm" => YieldModel::Gbm {
            alpha: need(alpha, "alpha")?,
            psi,
        },
        "ckls" => {
            let a = need(alpha, "alpha")?;
            YieldModel::Ckls {
                b: resolve_b(a)?,
                alpha: a,
                psi,
                v: need(elasticity, "elasticity")?,
            }
        }
        other => return Err(CmdError::Usage(format!("unknown model `{other}`"))),
    };
    let scheme = match scheme_name.as_str() {
        "euler" | "euler-full-truncation" => Scheme::EulerFullTruncation,
        "exact" | "exact-cir" => Scheme::ExactCir,
        other => return Err(CmdError::Usage(format!("unknown scheme `{other}`"))),
    };

    let spec = SimSpec {
        model,
        x0,
        n_steps: n,
        dt,
        seed,
        scheme,
    };
    spec.validate()
        .map_err(|e| CmdError::Usage(e.to_string()))?;

    ensure_dir(&args.out)?;
    let ensemble = simulate_ensemble(&spec, paths)?;
    let mut any_clamped = Vec::new();
    for (i, yield_path) in ensemble.iter().enumerate() {
        let prices = price_path(yield_path, earnings)?;
        if !prices.clamped.is_empty() {
            any_clamped.push((format!("path_{i:03}"), prices.clamped.clone()));
        }
        let rows: Vec<Vec<f64>> = yield_path
            .values
            .iter()
            .zip(&prices.series.values)
            .enumerate()
            .map(|(k, (g, p))| vec![yield_path.time(k), *g, *p])
            .collect();
        csvio::write_table(
            &args.out.join(format!("path_{i:03}.csv")),
            "t,gamma,price",
            &rows,
        )?;
    }
    if !any_clamped.is_empty() {
        let flagged: serde_json::Value = any_clamped
            .into_iter()
            .map(|(k, v)| (k, serde_json::json!(v)))
            .collect::<serde_json::Map<String, serde_json::Value>>()
            .into();
        write_json(&args.out.join("clamped.json"), &flagged)?;
    }

    let (cfg_alpha, cfg_gamma_star, cfg_b, cfg_v) = match model {
        YieldModel::Cir { b, alpha, .. } => (Some(alpha), Some(b / alpha), Some(b), None),
        YieldModel::Bm { b, .. } => (None, None, Some(b), None),
        YieldModel::Gbm { alpha, .. } => (Some(alpha), None, None, None),
        YieldModel::Ckls { b, alpha, v, .. } => (Some(alpha), None, Some(b), Some(v)),
    };
    let manifest = SimulateConfig {
        schema_version: SCHEMA_VERSION,
        command: "simulate".to_string(),
        model: model_name,
        alpha: cfg_alpha,
        gamma_star: cfg_gamma_star,
        b: cfg_b,
        psi,
        elasticity: cfg_v,
        earnings,
        p0,
        n,
        dt,
        paths,
        seed,
        scheme: match scheme {
            Scheme::EulerFullTruncation => "euler".to_string(),
            Scheme::ExactCir => "exact".to_string(),
        },
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    println!("wrote {} path file(s) to {}", paths, args.out.display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma_star: Option<f64>,
    #[arg(long)]
    earnings: Option<f64>,
    #[arg(long)]
    p0: Option<f64>,
    /// Comma-separated psi values for the curve family.
    #[arg(long)]
    psi_grid: Option<String>,
    /// Comma-separated initial prices for the duration sweep.
    #[arg(long)]
    p0_grid: Option<String>,
    /// Comma-separated mean-reversion strengths for the duration sweep
    /// (defaults to just --alpha).
    #[arg(long)]
    alpha_grid: Option<String>,
    /// Largest holding duration on the curves (years).
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of time points per curve.
    #[arg(long)]
    t_points: Option<usize>,
    #[arg(long, default_value = "analyze_out")]
    out: PathBuf,
}

fn cmd_analyze(args: AnalyzeArgs) -> CmdResult {
    let base: Option<AnalyzeConfig> = match &args.config {
        Some(p) => Some(load_json(p)?),
        None => None,
    };
    let alpha = args
        .alpha
        .or(base.as_ref().map(|c| c.alpha))
        .ok_or_else(|| CmdError::Usage("--alpha is required".to_string()))?;
    let gamma_star = args
        .gamma_star
        .or(base.as_ref().map(|c| c.gamma_star))
        .ok_or_else(|| CmdError::Usage("--gamma-star is required".to_string()))?;
    let earnings = args
        .earnings
        .or(base.as_ref().map(|c| c.earnings))
        .ok_or_else(|| CmdError::Usage("--earnings is required".to_string()))?;
    let p0 = args
        .p0
        .or(base.as_ref().map(|c| c.p0))
        .ok_or_else(|| CmdError::Usage("--p0 is required".to_string()))?;
    let psi_grid = match (&args.psi_grid, &base) {
        (Some(s), _) => parse_grid(s, "psi")?,
        (None, Some(c)) => c.psi_grid.clone(),
        (None, None) => vec![0.001, 0.003, 0.005, 0.007, 0.009],
    };
    let p0_grid = match (&args.p0_grid, &base) {
        (Some(s), _) => parse_grid(s, "p0")?,
        (None, Some(c)) => c.p0_grid.clone(),
        (None, None) => vec![1.0, 1.5, 2.0, 3.0, 4.0],
    };
    let alpha_grid = match (&args.alpha_grid, &base) {
        (Some(s), _) => parse_grid(s, "alpha")?,
        (None, Some(c)) => c.alpha_grid.clone(),
        (None, None) => vec![alpha],
    };
    let t_max = args
        .t_max
        .or(base.as_ref().map(|c| c.t_max))
        .unwrap_or(2000.0);
    let t_points = args
        .t_points
        .or(base.as_ref().map(|c| c.t_points))
        .unwrap_or(200);
    if !(t_max > 1.0) || t_points < 2 {
        return Err(CmdError::Usage(
            "need t_max > 1 and t_points >= 2".to_string(),
        ));
    }

    let ctx = PriceContext::from_initial_price(earnings, p0).map_err(cmd_usage)?;
    ensure_dir(&args.out)?;

    // expected-return curves: one column per psi, inf marks a diverging mean
    let times: Vec<f64> = (0..t_points)
        .map(|i| {
            let frac = i as f64 / (t_points - 1) as f64;
            // geometric spacing resolves the early super-exponential phase
            1.0 * (t_max / 1.0_f64).powf(frac)
        })
        .collect();
    let mut curve_rows = Vec::with_capacity(times.len());
    let mut params_by_psi = Vec::new();
    for &psi in &psi_grid {
        params_by_psi
            .push(YieldParams::from_mean_reversion(alpha, gamma_star, psi).map_err(cmd_usage)?);
    }
    for &t in &times {
        let mut row = vec![t];
        for params in &params_by_psi {
            // explosive regime: the mean diverges, emit inf for the cell
            row.push(cond_mean_return(t, p0, params, &ctx).unwrap_or(f64::INFINITY));
        }
        curve_rows.push(row);
    }
    let header = std::iter::once("t".to_string())
        .chain(psi_grid.iter().map(|p| format!("psi={p}")))
        .collect::<Vec<_>>()
        .join(",");
    csvio::write_table(&args.out.join("expected_return.csv"), &header, &curve_rows)?;

    // stationary summary per psi
    let mut summary_rows = Vec::new();
    for (params, &psi) in params_by_psi.iter().zip(&psi_grid) {
        let explosive = classify_regime(params) == Regime::RecurrentExplosive;
        let h = ctx.h_threshold(params);
        let p_star = ctx.p_star(params);
        let mu_star = ctx.mu_star(params);
        let phi = amplification_phi(params, &ctx).unwrap_or(f64::INFINITY);
        let rho = emergent_premium(params, &ctx).unwrap_or(f64::INFINITY);
        let m = stationary_moments(params, &ctx);
        summary_rows.push(vec![
            psi,
            if explosive { 1.0 } else { 0.0 },
            h,
            p_star,
            mu_star,
            phi,
            rho,
            if phi.is_finite() {
                phi * p_star
            } else {
                f64::INFINITY
            },
            m.mean_return.value(),
            m.var_return.value(),
        ]);
    }
    csvio::write_table(
        &args.out.join("summary.csv"),
        "psi,explosive,h,p_star,mu_star,phi,rho_e,phi_p_star,mean_return,var_return",
        &summary_rows,
    )?;

    // super-exponential condition and duration across (alpha, psi, p0);
    // condition: 1 true, 0 false, -1 regime violation; t_c is NaN when absent
    let mut super_rows = Vec::new();
    for &alpha_i in &alpha_grid {
        for &psi in &psi_grid {
            let params =
                YieldParams::from_mean_reversion(alpha_i, gamma_star, psi).map_err(cmd_usage)?;
            for &p0_i in &p0_grid {
                let (cond, tc) = match superexp_condition(p0_i, &params, &ctx) {
                    Ok(true) => {
                        let tc = superexp_duration(p0_i, &params, &ctx).unwrap_or(f64::NAN);
                        (1.0, tc)
                    }
                    Ok(false) => (0.0, f64::NAN),
                    Err(_) => (-1.0, f64::NAN),
                };
                super_rows.push(vec![alpha_i, psi, p0_i, cond, tc]);
            }
        }
    }
    csvio::write_table(
        &args.out.join("superexp.csv"),
        "alpha,psi,p0,condition,t_c",
        &super_rows,
    )?;

    let manifest = AnalyzeConfig {
        schema_version: SCHEMA_VERSION,
        command: "analyze".to_string(),
        alpha,
        gamma_star,
        earnings,
        p0,
        psi_grid,
        p0_grid,
        alpha_grid,
        t_max,
        t_points,
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    println!("wrote analysis tables to {}", args.out.display());
    Ok(0)
}

fn cmd_usage(e: bubblekit::Error) -> CmdError {
    CmdError::Usage(e.to_string())
}

// ---------------------------------------------------------------------------
// calibrate / test
// ---------------------------------------------------------------------------

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Price CSV with header `date,close`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Initial yield at the window start (e.g. 1/150 for a P/E of 150).
    #[arg(long)]
    gamma0: Option<f64>,
    /// Inclusive ISO-8601 window bounds on the date column.
    #[arg(long)]
    window_start: Option<String>,
    #[arg(long)]
    window_end: Option<String>,
    /// Sampling step in years (default 1/252).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value = "calibrate_out")]
    out: PathBuf,
}

struct LoadedSeries {
    config: FitConfig,
    dates: Vec<String>,
    yields: bubblekit::calibrate::YieldSeries,
    window: (String, String),
}

#[allow(clippy::too_many_arguments)]
fn load_windowed_series(
    command: &str,
    config: Option<&PathBuf>,
    input: Option<PathBuf>,
    gamma0: Option<f64>,
    window_start: Option<String>,
    window_end: Option<String>,
    dt: Option<f64>,
    df_override: Option<u32>,
) -> Result<LoadedSeries, CmdError> {
    let base: Option<FitConfig> = match config {
        Some(p) => Some(load_json(p)?),
        None => None,
    };
    let input = input
        .or(base.as_ref().map(|c| PathBuf::from(&c.input)))
        .ok_or_else(|| CmdError::Usage("--input is required".to_string()))?;
    let gamma0 = gamma0
        .or(base.as_ref().map(|c| c.gamma0))
        .ok_or_else(|| CmdError::Usage("--gamma0 is required".to_string()))?;
    let window_start = window_start.or(base.as_ref().and_then(|c| c.window_start.clone()));
    let window_end = window_end.or(base.as_ref().and_then(|c| c.window_end.clone()));
    let dt = dt.or(base.as_ref().map(|c| c.dt)).unwrap_or(1.0 / 252.0);
    let df_override = df_override.or(base.as_ref().and_then(|c| c.df_override));
    if !(gamma0 > 0.0) {
        return Err(CmdError::Usage(format!(
            "--gamma0 must be > 0, got {gamma0}"
        )));
    }
    if !(dt > 0.0) {
        return Err(CmdError::Usage(format!("--dt must be > 0, got {dt}")));
    }

    let rows = csvio::read_price_csv(&input)?;
    let in_window = |d: &str| {
        window_start.as_deref().is_none_or(|s| d >= s)
            && window_end.as_deref().is_none_or(|e| d <= e)
    };
    let selected: Vec<&csvio::PriceRow> = rows.iter().filter(|r| in_window(&r.date)).collect();
    if selected.len() < 2 {
        return Err(CmdError::Usage(format!(
            "window [{:?}, {:?}] selects {} row(s); need at least 2",
            window_start,
            window_end,
            selected.len()
        )));
    }
    let closes: Vec<f64> = selected.iter().map(|r| r.close).collect();
    let dates: Vec<String> = selected.iter().map(|r| r.date.clone()).collect();
    let prices = SeriesSample::new(closes, dt, 0.0).map_err(cmd_usage)?;
    let yields = yield_series_from_prices(&prices, gamma0).map_err(cmd_usage)?;
    let window = (
        dates.first().unwrap().clone(),
        dates.last().unwrap().clone(),
    );
    Ok(LoadedSeries {
        config: FitConfig {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            input: input.display().to_string(),
            gamma0,
            window_start,
            window_end,
            dt,
            df_override,
        },
        dates,
        yields,
        window,
    })
}

fn cmd_calibrate(args: CalibrateArgs) -> CmdResult {
    let loaded = load_windowed_series(
        "calibrate",
        args.config.as_ref(),
        args.input,
        args.gamma0,
        args.window_start,
        args.window_end,
        args.dt,
        None,
    )?;
    ensure_dir(&args.out)?;

    let fit = fit_qmle_default(&loaded.yields.series, loaded.yields.earnings)?;
    let converged = fit.diagnostics.converged;

    // yield series CSV with the dates carried through
    let mut gamma_csv = String::from("date,gamma\n");
    for (d, g) in loaded.dates.iter().zip(&loaded.yields.series.values) {
        gamma_csv.push_str(&format!("{d},{g}\n"));
    }
    fs::write(args.out.join("gamma_series.csv"), gamma_csv)
        .map_err(|e| CmdError::Runtime(format!("cannot write gamma series: {e}")))?;

    let report = CalibrateReport {
        schema_version: SCHEMA_VERSION,
        config: loaded.config.clone(),
        earnings: loaded.yields.earnings,
        n_observations: loaded.yields.series.len(),
        window: loaded.window,
        two_loglik: 2.0 * fit.loglik,
        regime: match fit.regime() {
            Regime::NonExplosive => "non-explosive".to_string(),
            Regime::RecurrentExplosive => "recurrent-explosive".to_string(),
        },
        fit,
    };
    write_json(&args.out.join("report.json"), &report)?;
    write_json(&args.out.join("manifest.json"), &loaded.config)?;
    println!("wrote calibration report to {}", args.out.display());
    if converged {
        Ok(0)
    } else {
        eprintln!("warning: optimizer did not converge; see diagnostics in the report");
        Ok(1)
    }
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    window_start: Option<String>,
    #[arg(long)]
    window_end: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    /// Override the chi-square degrees of freedom (default 4).
    #[arg(long)]
    df: Option<u32>,
    #[arg(long, default_value = "test_out")]
    out: PathBuf,
}

fn cmd_test(args: TestArgs) -> CmdResult {
    let loaded = load_windowed_series(
        "test",
        args.config.as_ref(),
        args.input,
        args.gamma0,
        args.window_start,
        args.window_end,
        args.dt,
        args.df,
    )?;
    ensure_dir(&args.out)?;

    let null_fit = fit_qmle_default(&loaded.yields.series, loaded.yields.earnings)?;
    let null_converged = null_fit.diagnostics.converged;
    let cells = run_matrix(&loaded.yields.series, &null_fit, loaded.config.df_override);
    let cells: Vec<TestCell> = cells
        .iter()
        .zip(matrix_labels())
        .map(|(cell, (alt, kind))| match cell {
            Ok(rep) => TestCell::from_report(rep),
            Err(e) => TestCell {
                alternative: alt.to_string(),
                kind: kind.to_string(),
                statistic: f64::NAN,
                df: loaded
                    .config
                    .df_override
                    .unwrap_or(bubblekit::divergence::DEFAULT_DF),
                p_value: f64::NAN,
                stars: String::new(),
                theta_alt: vec![],
                valid: false,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let report = TestReport {
        schema_version: SCHEMA_VERSION,
        config: loaded.config.clone(),
        earnings: loaded.yields.earnings,
        n_observations: loaded.yields.series.len(),
        null_fit,
        cells,
    };
    write_json(&args.out.join("report.json"), &report)?;
    write_json(&args.out.join("manifest.json"), &loaded.config)?;
    println!("wrote divergence test report to {}", args.out.display());
    if null_converged {
        Ok(0)
    } else {
        eprintln!("warning: null fit did not converge; the matrix is unreliable");
        Ok(1)
    }
}

fn matrix_labels() -> Vec<(&'static str, &'static str)> {
    let alts = ["BM", "GBM", "CKLS"];
    let kinds = ["KL", "BS", "RK"];
    alts.iter()
        .flat_map(|a| kinds.iter().map(move |k| (*a, *k)))
        .collect()
}
