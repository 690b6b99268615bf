//! Command-line front end: long-format CSV in, plot-ready CSV/JSON out.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ctmva::basis::{make_basis, BasisKind, BasisSystem, Interval, Region};
use ctmva::ctstats::{
    center, ct_cor, ct_cov, ct_mean, detrend_common, pairwise_ct_cor_batch, trend_r2,
    PairCorConfig,
};
use ctmva::kmeans::{ct_kmeans, silhouette, KmeansConfig, Partition};
use ctmva::mgp::{run_correlation_experiment, MgpSpec, SimConfig};
use ctmva::smoothing::{smooth_dataset, FDataset, Lambda, LambdaPolicy, LongSeries};
use ctmva::spectral::{ct_cca, ct_lda, ct_pca};
use nalgebra::DMatrix;
use serde_json::json;
use std::collections::HashMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ctmva", version = ctmva::VERSION, about = "Continuous-time multivariate analysis of irregular time series")]
struct Cli {
    /// Cap on worker threads (falls back to CTMVA_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, ValueEnum)]
enum BasisChoice {
    Bspline,
    Fourier,
}

#[derive(Copy, Clone, PartialEq, ValueEnum)]
enum PolicyChoice {
    Shared,
    PerSeries,
}

#[derive(Args, Clone)]
struct BasisArgs {
    /// Basis family.
    #[arg(long, value_enum, default_value_t = BasisChoice::Bspline)]
    basis: BasisChoice,
    /// Basis dimension K (odd for fourier).
    #[arg(long, default_value_t = 20)]
    nbasis: usize,
    /// Spline order (ignored for fourier).
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Interval start; defaults to the earliest observation.
    #[arg(long)]
    t_min: Option<f64>,
    /// Interval end; defaults to the latest observation.
    #[arg(long)]
    t_max: Option<f64>,
}

#[derive(Args, Clone)]
struct SmoothArgs {
    /// Roughness penalty: "auto" (GCV) or a nonnegative number.
    #[arg(long, default_value = "auto")]
    lambda: String,
    /// Penalty selection policy across series.
    #[arg(long, value_enum, default_value_t = PolicyChoice::PerSeries)]
    lambda_policy: PolicyChoice,
}

#[derive(Subcommand)]
enum Command {
    /// Smooth series into basis coefficients and fitted curves.
    Smooth {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        smooth: SmoothArgs,
        /// Output grid resolution for fitted curves.
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Continuous-time mean, covariance, and correlation.
    Describe {
        #[arg(long, conflicts_with = "coef_dir")]
        input: Option<PathBuf>,
        /// Directory holding basis.json + coefficients.csv from `smooth`.
        #[arg(long)]
        coef_dir: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        smooth: SmoothArgs,
        /// Subtract each curve's time average first.
        #[arg(long)]
        center: bool,
        /// Subtract the cross-sectional mean curve first.
        #[arg(long)]
        detrend: bool,
    },
    /// Continuous-time principal component analysis.
    Pca {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        smooth: SmoothArgs,
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Fisher discriminant analysis over a temporal partition.
    Lda {
        #[arg(long)]
        input: PathBuf,
        /// Partition as comma-separated lo:hi:label triples covering the interval.
        #[arg(long)]
        groups: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        smooth: SmoothArgs,
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Canonical correlation analysis of two curve sets.
    Cca {
        #[arg(long)]
        input_x: PathBuf,
        #[arg(long)]
        input_y: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        smooth: SmoothArgs,
    },
    /// Temporal k-means clustering of the time axis.
    Kmeans {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        smooth: SmoothArgs,
    },
    /// Silhouette profile of a clustering or explicit partition.
    Silhouette {
        #[arg(long)]
        input: PathBuf,
        /// Cluster count; runs k-means first.
        #[arg(long, conflicts_with = "groups")]
        k: Option<usize>,
        /// Explicit partition as lo:hi:label triples.
        #[arg(long)]
        groups: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6000)]
        grid: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        smooth: SmoothArgs,
    },
    /// All-pairs overlap-gated correlations of irregular series.
    Paircor {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        min_obs: usize,
        #[arg(long, default_value_t = 12.0)]
        min_overlap: f64,
        #[arg(long, default_value_t = 40)]
        max_nbasis: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Gaussian-process correlation-recovery experiment.
    Simulate {
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        /// Kernel length parameters, comma separated.
        #[arg(long, default_value = "0.1")]
        ell: String,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        noise_sd: f64,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value_t = 40)]
        nbasis: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

struct AppError {
    code: u8,
    msg: String,
}

impl AppError {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 1, msg: msg.into() }
    }
    fn data(msg: impl Into<String>) -> Self {
        Self { code: 2, msg: msg.into() }
    }
    fn io(e: std::io::Error) -> Self {
        Self { code: 2, msg: format!("io: {e}") }
    }
}

fn lib_exit_code(e: &ctmva::Error) -> u8 {
    use ctmva::Error::*;
    match e {
        Domain(_) | Dimension(_) | Parity(_) | UnsupportedKind(_) | Partition(_) => 2,
        Rank(_) | DegenerateVariance(_) | DegenerateCenters(_) | Covariance(_) | Numeric(_) => 3,
        Series { source, .. } => lib_exit_code(source),
    }
}

impl From<ctmva::Error> for AppError {
    fn from(e: ctmva::Error) -> Self {
        Self { code: lib_exit_code(&e), msg: e.to_string() }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::io(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_threads(cli.threads);
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: code={} message={:?}", e.code, e.msg);
            ExitCode::from(e.code)
        }
    }
}

#[cfg(feature = "parallel")]
fn init_threads(threads: Option<usize>) {
    let n = threads.or_else(|| {
        std::env::var("CTMVA_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_threads(_threads: Option<usize>) {}

// ---------------------------------------------------------------- input

struct ParsedInput {
    series: Vec<LongSeries>,
    skipped_empty: usize,
    duplicates: usize,
    dropped_series: usize,
}

fn parse_long_csv(path: &Path) -> Result<ParsedInput, AppError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| AppError::data(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (si, ti, vi) = match (col("series"), col("t"), col("value")) {
        (Some(s), Some(t), Some(v)) => (s, t, v),
        (s, t, v) => {
            let mut missing = Vec::new();
            if s.is_none() {
                missing.push("series");
            }
            if t.is_none() {
                missing.push("t");
            }
            if v.is_none() {
                missing.push("value");
            }
            return Err(AppError::data(format!(
                "{}: missing required columns: {} (header must contain series,t,value)",
                path.display(),
                missing.join(",")
            )));
        }
    };

    let mut order: Vec<String> = Vec::new();
    let mut by_name: HashMap<String, Vec<(f64, f64)>> = HashMap::new();
    let mut skipped_empty = 0usize;
    for (row_no, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| AppError::data(format!("{} row {}: {e}", path.display(), row_no + 2)))?;
        let name = rec.get(si).unwrap_or("").to_string();
        let t_raw = rec.get(ti).unwrap_or("");
        let v_raw = rec.get(vi).unwrap_or("");
        if name.is_empty() {
            return Err(AppError::data(format!("{} row {}: empty series id", path.display(), row_no + 2)));
        }
        let t: f64 = t_raw.parse().map_err(|_| {
            AppError::data(format!("{} row {}: cannot parse t = {t_raw:?}", path.display(), row_no + 2))
        })?;
        if v_raw.is_empty() {
            skipped_empty += 1;
            continue;
        }
        let v: f64 = v_raw.parse().map_err(|_| {
            AppError::data(format!("{} row {}: cannot parse value = {v_raw:?}", path.display(), row_no + 2))
        })?;
        if !by_name.contains_key(&name) {
            order.push(name.clone());
        }
        by_name.entry(name).or_default().push((t, v));
    }

    let mut duplicates = 0usize;
    let mut dropped_series = 0usize;
    let mut series = Vec::new();
    for name in order {
        let mut obs = by_name.remove(&name).unwrap();
        // stable sort keeps input order among equal t; last one wins
        obs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(obs.len());
        for o in obs {
            if let Some(last) = dedup.last_mut() {
                if last.0 == o.0 {
                    *last = o;
                    duplicates += 1;
                    continue;
                }
            }
            dedup.push(o);
        }
        if dedup.is_empty() {
            eprintln!("warning: series {name:?} has no usable rows, dropped");
            dropped_series += 1;
            continue;
        }
        series.push(LongSeries::new(name, dedup));
    }
    if series.is_empty() {
        return Err(AppError::data(format!("{}: no usable series", path.display())));
    }
    if skipped_empty > 0 {
        eprintln!("warning: skipped {skipped_empty} rows with empty values");
    }
    if duplicates > 0 {
        eprintln!("warning: {duplicates} duplicate (series, t) rows resolved last-wins");
    }
    Ok(ParsedInput {
        series,
        skipped_empty,
        duplicates,
        dropped_series,
    })
}

// ---------------------------------------------------------------- config helpers

fn build_basis(args: &BasisArgs, series: &[LongSeries]) -> Result<BasisSystem, AppError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        if let Some((a, b)) = s.time_range() {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    let lo = args.t_min.unwrap_or(lo);
    let hi = args.t_max.unwrap_or(hi);
    if !(hi > lo) {
        return Err(AppError::data(format!("degenerate time interval [{lo}, {hi}]")));
    }
    let kind = match args.basis {
        BasisChoice::Bspline => BasisKind::BSpline,
        BasisChoice::Fourier => BasisKind::Fourier,
    };
    Ok(make_basis(kind, Interval::new(lo, hi)?, args.nbasis, args.order)?)
}

fn parse_lambda(s: &str) -> Result<Lambda, AppError> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Lambda::Auto);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| AppError::usage(format!("--lambda must be \"auto\" or a number, got {s:?}")))?;
    if v < 0.0 {
        return Err(AppError::usage(format!("--lambda must be nonnegative, got {v}")));
    }
    Ok(Lambda::Fixed(v))
}

fn policy_of(p: PolicyChoice) -> LambdaPolicy {
    match p {
        PolicyChoice::Shared => LambdaPolicy::Shared,
        PolicyChoice::PerSeries => LambdaPolicy::PerSeries,
    }
}

fn smooth_input(
    input: &Path,
    basis_args: &BasisArgs,
    smooth_args: &SmoothArgs,
) -> Result<(FDataset, ParsedInput), AppError> {
    let parsed = parse_long_csv(input)?;
    let basis = build_basis(basis_args, &parsed.series)?;
    let lambda = parse_lambda(&smooth_args.lambda)?;
    let ds = smooth_dataset(&parsed.series, &basis, policy_of(smooth_args.lambda_policy), lambda)?;
    Ok((ds, parsed))
}

/// Parse "lo:hi:label,lo:hi:label,..." into a partition plus group labels in
/// first-appearance order.
fn parse_groups(spec: &str) -> Result<(Partition, Vec<String>), AppError> {
    let mut labels: Vec<String> = Vec::new();
    let mut segs: Vec<Vec<Interval>> = Vec::new();
    for part in spec.split(',') {
        let fields: Vec<&str> = part.split(':').collect();
        if fields.len() != 3 {
            return Err(AppError::usage(format!(
                "--groups entries must be lo:hi:label, got {part:?}"
            )));
        }
        let lo: f64 = fields[0]
            .parse()
            .map_err(|_| AppError::usage(format!("bad group bound {:?}", fields[0])))?;
        let hi: f64 = fields[1]
            .parse()
            .map_err(|_| AppError::usage(format!("bad group bound {:?}", fields[1])))?;
        let label = fields[2].to_string();
        let idx = match labels.iter().position(|l| l == &label) {
            Some(i) => i,
            None => {
                labels.push(label);
                segs.push(Vec::new());
                segs.len() - 1
            }
        };
        segs[idx].push(Interval::new(lo, hi).map_err(|e| AppError::data(e.to_string()))?);
    }
    let regions = segs
        .into_iter()
        .map(|mut s| {
            s.sort_by(|a, b| a.lo().partial_cmp(&b.lo()).unwrap());
            Region::new(s)
        })
        .collect::<ctmva::Result<Vec<_>>>()?;
    Ok((Partition::new(regions)?, labels))
}

// ---------------------------------------------------------------- output helpers

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), AppError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

fn matrix_csv(corner: &str, cols: &[String], rows: &[String], m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    s.push_str(corner);
    for c in cols {
        s.push(',');
        s.push_str(c);
    }
    s.push('\n');
    for (i, r) in rows.iter().enumerate() {
        s.push_str(r);
        for j in 0..m.ncols() {
            s.push(',');
            s.push_str(&fmt_num(m[(i, j)]));
        }
        s.push('\n');
    }
    s
}

fn curves_csv(ds: &FDataset, col_names: &[String], grid: usize) -> Result<String, AppError> {
    let iv = ds.basis().interval();
    let times: Vec<f64> = (0..grid)
        .map(|i| iv.lo() + iv.length() * i as f64 / (grid - 1) as f64)
        .collect();
    let x = ds.eval(&times)?;
    let mut s = String::from("t");
    for n in col_names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for (q, &t) in times.iter().enumerate() {
        s.push_str(&fmt_num(t));
        for u in 0..x.ncols() {
            s.push(',');
            s.push_str(&fmt_num(x[(q, u)]));
        }
        s.push('\n');
    }
    Ok(s)
}

fn basis_json(b: &BasisSystem) -> serde_json::Value {
    json!({
        "kind": b.kind().to_string(),
        "k": b.k(),
        "order": b.order(),
        "t_min": b.interval().lo(),
        "t_max": b.interval().hi(),
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), AppError> {
    write_file(path, &format!("{}\n", serde_json::to_string_pretty(value).unwrap()))
}

fn load_coef_dir(dir: &Path) -> Result<FDataset, AppError> {
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("basis.json"))
            .map_err(|e| AppError::data(format!("cannot read basis.json: {e}")))?,
    )
    .map_err(|e| AppError::data(format!("basis.json: {e}")))?;
    let kind = match meta["kind"].as_str() {
        Some("bspline") => BasisKind::BSpline,
        Some("fourier") => BasisKind::Fourier,
        other => return Err(AppError::data(format!("basis.json: unknown kind {other:?}"))),
    };
    let k = meta["k"].as_u64().ok_or_else(|| AppError::data("basis.json: missing k"))? as usize;
    let order = meta["order"].as_u64().unwrap_or(4) as usize;
    let lo = meta["t_min"].as_f64().ok_or_else(|| AppError::data("basis.json: missing t_min"))?;
    let hi = meta["t_max"].as_f64().ok_or_else(|| AppError::data("basis.json: missing t_max"))?;
    let basis = make_basis(kind, Interval::new(lo, hi)?, k, order)?;

    let text = std::fs::read_to_string(dir.join("coefficients.csv"))
        .map_err(|e| AppError::data(format!("cannot read coefficients.csv: {e}")))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| AppError::data("coefficients.csv is empty"))?;
    let names: Vec<String> = header.split(',').skip(1).map(String::from).collect();
    let mut coef = DMatrix::zeros(k, names.len());
    for (i, line) in lines.enumerate() {
        if i >= k {
            return Err(AppError::data("coefficients.csv has more rows than basis functions"));
        }
        for (j, cell) in line.split(',').skip(1).enumerate() {
            coef[(i, j)] = cell
                .parse()
                .map_err(|_| AppError::data(format!("coefficients.csv row {}: bad number {cell:?}", i + 2)))?;
        }
    }
    Ok(FDataset::new(basis, coef, names)?)
}

fn input_stats_json(p: &ParsedInput) -> serde_json::Value {
    json!({
        "n_series": p.series.len(),
        "skipped_empty_values": p.skipped_empty,
        "duplicate_rows": p.duplicates,
        "dropped_series": p.dropped_series,
    })
}

fn partition_segments_csv(partition: &Partition, labels: &[String]) -> String {
    let mut s = String::from("cluster,label,lo,hi\n");
    for (i, part) in partition.parts().iter().enumerate() {
        let label = labels.get(i).cloned().unwrap_or_else(|| format!("c{}", i + 1));
        for seg in part.segments() {
            s.push_str(&format!("{},{},{},{}\n", i + 1, label, fmt_num(seg.lo()), fmt_num(seg.hi())));
        }
    }
    s
}

// ---------------------------------------------------------------- subcommands

fn run(cmd: Command) -> Result<(), AppError> {
    match cmd {
        Command::Smooth { input, out, basis, smooth, grid } => {
            let (ds, parsed) = smooth_input(&input, &basis, &smooth)?;
            write_json(&out.join("basis.json"), &basis_json(ds.basis()))?;
            let row_labels: Vec<String> = (1..=ds.basis().k()).map(|i| i.to_string()).collect();
            write_file(
                &out.join("coefficients.csv"),
                &matrix_csv("basis_fn", ds.names(), &row_labels, ds.coef()),
            )?;
            write_file(&out.join("curves.csv"), &curves_csv(&ds, ds.names(), grid)?)?;
            write_json(
                &out.join("summary.json"),
                &json!({
                    "command": "smooth",
                    "version": ctmva::VERSION,
                    "config": {
                        "input": input.display().to_string(),
                        "basis": basis_json(ds.basis()),
                        "lambda": smooth.lambda,
                        "lambda_policy": match smooth.lambda_policy { PolicyChoice::Shared => "shared", PolicyChoice::PerSeries => "per-series" },
                        "grid": grid,
                    },
                    "input_stats": input_stats_json(&parsed),
                    "series": ds.names(),
                }),
            )?;
            Ok(())
        }
        Command::Describe { input, coef_dir, out, basis, smooth, center: do_center, detrend } => {
            let (ds, stats) = match (&input, &coef_dir) {
                (Some(p), None) => {
                    let (ds, parsed) = smooth_input(p, &basis, &smooth)?;
                    (ds, Some(parsed))
                }
                (None, Some(dir)) => (load_coef_dir(dir)?, None),
                _ => return Err(AppError::usage("describe needs exactly one of --input or --coef-dir")),
            };
            let mut diag = serde_json::Map::new();
            let mut ds = ds;
            if detrend {
                let r2 = trend_r2(&ds, 1000)?;
                diag.insert("trend_r2".into(), json!(r2));
                println!("trend_r2 = {}", fmt_num(r2));
                ds = detrend_common(&ds)?;
            }
            if do_center {
                ds = center(&ds)?;
            }
            let names = ds.names().to_vec();
            let mean = ct_mean(&ds)?;
            let cov = ct_cov(&ds)?;
            let cor = ct_cor(&ds)?;
            let mut mean_csv = String::from("series,mean\n");
            for (n, v) in names.iter().zip(mean.iter()) {
                mean_csv.push_str(&format!("{n},{}\n", fmt_num(*v)));
            }
            write_file(&out.join("mean.csv"), &mean_csv)?;
            write_file(&out.join("cov.csv"), &matrix_csv("series", &names, &names, &cov))?;
            write_file(&out.join("cor.csv"), &matrix_csv("series", &names, &names, &cor))?;
            write_json(
                &out.join("summary.json"),
                &json!({
                    "command": "describe",
                    "version": ctmva::VERSION,
                    "config": {
                        "input": input.as_ref().map(|p| p.display().to_string()),
                        "coef_dir": coef_dir.as_ref().map(|p| p.display().to_string()),
                        "basis": basis_json(ds.basis()),
                        "center": do_center,
                        "detrend": detrend,
                        "lambda": smooth.lambda,
                    },
                    "input_stats": stats.as_ref().map(input_stats_json),
                    "diagnostics": diag,
                    "series": names,
                }),
            )?;
            Ok(())
        }
        Command::Pca { input, out, basis, smooth, grid } => {
            let (ds, parsed) = smooth_input(&input, &basis, &smooth)?;
            let pca = ct_pca(&ds)?;
            let mut eig = String::from("component,eigenvalue,var_explained\n");
            for i in 0..pca.eigenvalues.len() {
                eig.push_str(&format!(
                    "pc{},{},{}\n",
                    i + 1,
                    fmt_num(pca.eigenvalues[i]),
                    fmt_num(pca.var_explained[i])
                ));
            }
            write_file(&out.join("eigenvalues.csv"), &eig)?;
            let comp_names: Vec<String> =
                (1..=pca.loadings.ncols()).map(|i| format!("pc{i}")).collect();
            write_file(
                &out.join("loadings.csv"),
                &matrix_csv("series", &comp_names, ds.names(), &pca.loadings),
            )?;
            write_file(
                &out.join("scores.csv"),
                &curves_csv(&pca.scores, &comp_names, grid)?,
            )?;
            write_json(
                &out.join("summary.json"),
                &json!({
                    "command": "pca",
                    "version": ctmva::VERSION,
                    "config": {
                        "input": input.display().to_string(),
                        "basis": basis_json(ds.basis()),
                        "lambda": smooth.lambda,
                        "grid": grid,
                    },
                    "input_stats": input_stats_json(&parsed),
                    "eigenvalues": pca.eigenvalues.as_slice(),
                    "var_explained": pca.var_explained.as_slice(),
                }),
            )?;
            Ok(())
        }
        Command::Lda { input, groups, out, basis, smooth, grid } => {
            let (ds, parsed) = smooth_input(&input, &basis, &smooth)?;
            let (partition, labels) = parse_groups(&groups)?;
            let lda = ct_lda(&ds, &partition)?;
            let comp_names: Vec<String> =
                (1..=lda.discriminants.ncols()).map(|i| format!("ld{i}")).collect();
            write_file(
                &out.join("discriminants.csv"),
                &matrix_csv("series", &comp_names, ds.names(), &lda.discriminants),
            )?;
            let mut eig = String::from("component,eigenvalue\n");
            for i in 0..lda.eigenvalues.len() {
                eig.push_str(&format!("ld{},{}\n", i + 1, fmt_num(lda.eigenvalues[i])));
            }
            write_file(&out.join("eigenvalues.csv"), &eig)?;
            write_file(
                &out.join("group_means.csv"),
                &matrix_csv("group", &comp_names, &labels, &lda.group_means),
            )?;
            write_file(&out.join("scores.csv"), &curves_csv(&lda.scores, &comp_names, grid)?)?;
            write_json(
                &out.join("summary.json"),
                &json!({
                    "command": "lda",
                    "version": ctmva::VERSION,
                    "config": {
                        "input": input.display().to_string(),
                        "groups": groups,
                        "basis": basis_json(ds.basis()),
                        "lambda": smooth.lambda,
                    },
                    "input_stats": input_stats_json(&parsed),
                    "eigenvalues": lda.eigenvalues.as_slice(),
                }),
            )?;
            Ok(())
        }
        Command::Cca { input_x, input_y, out, basis, smooth } => {
            let px = parse_long_csv(&input_x)?;
            let py = parse_long_csv(&input_y)?;
            // shared basis over the common time window
            let range = |series: &[LongSeries]| {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for s in series {
                    if let Some((a, b)) = s.time_range() {
                        lo = lo.min(a);
                        hi = hi.max(b);
                    }
                }
                (lo, hi)
            };
            let (xlo, xhi) = range(&px.series);
            let (ylo, yhi) = range(&py.series);
            let lo = basis.t_min.unwrap_or_else(|| xlo.max(ylo));
            let hi = basis.t_max.unwrap_or_else(|| xhi.min(yhi));
            if !(hi > lo) {
                return Err(AppError::data("the two inputs have no overlapping time window"));
            }
            let clip = |series: &[LongSeries]| -> Result<Vec<LongSeries>, AppError> {
                let clipped: Vec<LongSeries> = series
                    .iter()
                    .map(|s| {
                        LongSeries::new(
                            s.name.clone(),
                            s.obs.iter().copied().filter(|&(t, _)| t >= lo && t <= hi).collect(),
                        )
                    })
                    .filter(|s| !s.obs.is_empty())
                    .collect();
                if clipped.is_empty() {
                    return Err(AppError::data("no observations inside the common window"));
                }
                Ok(clipped)
            };
            let xs = clip(&px.series)?;
            let ys = clip(&py.series)?;
            let kind = match basis.basis {
                BasisChoice::Bspline => BasisKind::BSpline,
                BasisChoice::Fourier => BasisKind::Fourier,
            };
            let shared = make_basis(kind, Interval::new(lo, hi)?, basis.nbasis, basis.order)?;
            let lambda = parse_lambda(&smooth.lambda)?;
            let policy = policy_of(smooth.lambda_policy);
            let dx = smooth_dataset(&xs, &shared, policy, lambda)?;
            let dy = smooth_dataset(&ys, &shared, policy, lambda)?;
            let cca = ct_cca(&dx, &dy)?;
            let mut cors = String::from("component,correlation\n");
            for (i, r) in cca.correlations.iter().enumerate() {
                cors.push_str(&format!("cc{},{}\n", i + 1, fmt_num(*r)));
            }
            write_file(&out.join("correlations.csv"), &cors)?;
            let comp_names: Vec<String> =
                (1..=cca.correlations.len()).map(|i| format!("cc{i}")).collect();
            write_file(
                &out.join("x_weights.csv"),
                &matrix_csv("series", &comp_names, dx.names(), &cca.a_vectors),
            )?;
            write_file(
                &out.join("y_weights.csv"),
                &matrix_csv("series", &comp_names, dy.names(), &cca.b_vectors),
            )?;
            write_json(
                &out.join("summary.json"),
                &json!({
                    "command": "cca",
                    "version": ctmva::VERSION,
                    "config": {
                        "input_x": input_x.display().to_string(),
                        "input_y": input_y.display().to_string(),
                        "basis": basis_json(&shared),
                        "lambda": smooth.lambda,
                    },
                    "correlations": cca.correlations,
                }),
            )?;
            Ok(())
        }
        Command::Kmeans { input, k, restarts, seed, out, basis, smooth } => {
            let (ds, parsed) = smooth_input(&input, &basis, &smooth)?;
            let cfg = KmeansConfig { restarts, ..KmeansConfig::new(k, seed) };
            let res = ct_kmeans(&ds, &cfg)?;
            let labels: Vec<String> = (1..=k).map(|i| format!("c{i}")).collect();
            write_file(&out.join("segments.csv"), &partition_segments_csv(&res.partition, &labels))?;
            let mut centers = DMatrix::zeros(ds.p(), k);
            for (i, c) in res.centers.iter().enumerate() {
                centers.column_mut(i).copy_from(c);
            }
            write_file(
                &out.join("centers.csv"),
                &matrix_csv("series", &labels, ds.names(), &centers),
            )?;
            write_json(
                &out.join("summary.json"),
                &json!({
                    "command": "kmeans",
                    "version": ctmva::VERSION,
                    "config": {
                        "input": input.display().to_string(),
                        "k": k,
                        "restarts": restarts,
                        "seed": seed,
                        "basis": basis_json(ds.basis()),
                        "lambda": smooth.lambda,
                    },
                    "input_stats": input_stats_json(&parsed),
                    "objective": res.objective,
                    "iterations": res.iterations,
                    "converged": res.converged,
                    "objective_trace": res.objective_trace,
                    "restart_objectives": res.restart_objectives,
                }),
            )?;
            Ok(())
        }
        Command::Silhouette { input, k, groups, seed, grid, out, basis, smooth } => {
            let (ds, parsed) = smooth_input(&input, &basis, &smooth)?;
            let (partition, labels, kmeans_info) = match (k, groups) {
                (Some(k), None) => {
                    let cfg = KmeansConfig::new(k, seed);
                    let res = ct_kmeans(&ds, &cfg)?;
                    let labels: Vec<String> = (1..=k).map(|i| format!("c{i}")).collect();
                    let info = json!({"objective": res.objective, "converged": res.converged});
                    (res.partition, labels, Some(info))
                }
                (None, Some(g)) => {
                    let (p, l) = parse_groups(&g)?;
                    (p, l, None)
                }
                _ => return Err(AppError::usage("silhouette needs exactly one of --k or --groups")),
            };
            let prof = silhouette(&ds, &partition, grid)?;
            let mut csv = String::from("t,s,cluster\n");
            for (t, s) in prof.grid.iter().zip(&prof.s_values) {
                let ci = partition.part_index(*t).unwrap_or(0);
                csv.push_str(&format!("{},{},{}\n", fmt_num(*t), fmt_num(*s), labels[ci]));
            }
            write_file(&out.join("profile.csv"), &csv)?;
            write_file(&out.join("segments.csv"), &partition_segments_csv(&partition, &labels))?;
            write_json(
                &out.join("summary.json"),
                &json!({
                    "command": "silhouette",
                    "version": ctmva::VERSION,
                    "config": {
                        "input": input.display().to_string(),
                        "k": k,
                        "seed": seed,
                        "grid": grid,
                        "basis": basis_json(ds.basis()),
                        "lambda": smooth.lambda,
                    },
                    "input_stats": input_stats_json(&parsed),
                    "mean_s": prof.mean_s,
                    "kmeans": kmeans_info,
                }),
            )?;
            Ok(())
        }
        Command::Paircor { input, min_obs, min_overlap, max_nbasis, out } => {
            let parsed = parse_long_csv(&input)?;
            let cfg = PairCorConfig { min_obs, min_overlap, max_k: max_nbasis };
            let results = pairwise_ct_cor_batch(&parsed.series, &cfg);
            let mut csv = String::from("series_a,series_b,status,r,overlap_lo,overlap_hi,n_a,n_b\n");
            let mut counts: HashMap<String, usize> = HashMap::new();
            for (i, j, res) in &results {
                let a = &parsed.series[*i].name;
                let b = &parsed.series[*j].name;
                match res {
                    Ok(r) => {
                        *counts.entry(r.status.to_string()).or_default() += 1;
                        csv.push_str(&format!(
                            "{a},{b},{},{},{},{},{},{}\n",
                            r.status,
                            r.r.map(fmt_num).unwrap_or_default(),
                            r.overlap.map(|o| fmt_num(o.lo())).unwrap_or_default(),
                            r.overlap.map(|o| fmt_num(o.hi())).unwrap_or_default(),
                            r.n_u,
                            r.n_v
                        ));
                    }
                    Err(e) => {
                        *counts.entry("error".into()).or_default() += 1;
                        eprintln!("warning: pair ({a}, {b}): {e}");
                        csv.push_str(&format!("{a},{b},error,,,,,\n"));
                    }
                }
            }
            write_file(&out.join("pairs.csv"), &csv)?;
            let mut count_json = serde_json::Map::new();
            let mut keys: Vec<_> = counts.keys().cloned().collect();
            keys.sort();
            for key in keys {
                count_json.insert(key.clone(), json!(counts[&key]));
            }
            write_json(
                &out.join("summary.json"),
                &json!({
                    "command": "paircor",
                    "version": ctmva::VERSION,
                    "config": {
                        "input": input.display().to_string(),
                        "min_obs": min_obs,
                        "min_overlap": min_overlap,
                        "max_nbasis": max_nbasis,
                    },
                    "input_stats": input_stats_json(&parsed),
                    "n_pairs": results.len(),
                    "status_counts": count_json,
                }),
            )?;
            Ok(())
        }
        Command::Simulate { rho, ell, n, noise_sd, reps, nbasis, seed, out } => {
            let ells: Vec<f64> = ell
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| AppError::usage(format!("bad --ell entry {s:?}")))
                })
                .collect::<Result<_, _>>()?;
            if ells.is_empty() {
                return Err(AppError::usage("--ell must list at least one value"));
            }
            let mut csv = String::from("ell,rep,r_star,r_hat,r_hat_star\n");
            let mut summaries = Vec::new();
            for &l in &ells {
                let spec = MgpSpec::pair(rho, l)?;
                let mut cfg = SimConfig::new(spec, n, noise_sd, reps, seed)?;
                cfg.k_basis = nbasis;
                let (records, summary) = run_correlation_experiment(&cfg)?;
                for (rep, r) in records.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        fmt_num(l),
                        rep,
                        fmt_num(r.r_star),
                        fmt_num(r.r_hat),
                        fmt_num(r.r_hat_star)
                    ));
                }
                summaries.push(json!({
                    "ell": l,
                    "median_abs_err_ordinary": summary.median_abs_err_ordinary,
                    "median_abs_err_ct": summary.median_abs_err_ct,
                    "rmse_ratio": summary.rmse_ratio,
                }));
            }
            write_file(&out.join("records.csv"), &csv)?;
            write_json(
                &out.join("summary.json"),
                &json!({
                    "command": "simulate",
                    "version": ctmva::VERSION,
                    "config": {
                        "rho": rho,
                        "ell": ells,
                        "n": n,
                        "noise_sd": noise_sd,
                        "reps": reps,
                        "nbasis": nbasis,
                        "seed": seed,
                    },
                    "summaries": summaries,
                }),
            )?;
            Ok(())
        }
    }
}
