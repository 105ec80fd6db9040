//! Command-line interface: degrade clip trees, measure residual statistics,
//! reproduce the downscaling and shuffle-variance analyses, and run the
//! noise-regularization theorem check.
//!
//! Exit codes: 0 success, 1 processing failure, 2 usage or config error.

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use io::{discover_clips, load_clip, save_clip_like, save_clip_pngs, write_y4m, ClipSource};
use vidnoise::analysis::{downscale_noise_report, shuffle_variance_report};
use vidnoise::error::Error;
use vidnoise::frame::Clip;
use vidnoise::pipeline::{degrade_clip, ClipRecord, Manifest, PipelineConfig, MANIFEST_VERSION};
use vidnoise::resample::ResizeMode;
use vidnoise::rng::SeededRng;
use vidnoise::stats::{merge_stats, stats, ResidualStats};
use vidnoise::theorem::{
    log_log_slope, perfect_fit_dataset, random_dataset, verify_theorem, DifferentiableModel,
    LinearModel, MlpTiny, MonomialModel, TheoremCheck,
};

#[derive(Parser)]
#[command(name = "vidnoise", version, about = "Synthesize and analyze realistically degraded video clips")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ClampMode {
    /// Clamp to [0,1] after every stage.
    Each,
    /// Clamp only once, after the last stage.
    Final,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum ModeArg {
    Bilinear,
    #[default]
    Area,
    Bicubic,
}

impl From<ModeArg> for ResizeMode {
    fn from(m: ModeArg) -> ResizeMode {
        match m {
            ModeArg::Bilinear => ResizeMode::Bilinear,
            ModeArg::Area => ResizeMode::Area,
            ModeArg::Bicubic => ResizeMode::Bicubic,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Linear,
    Quadratic,
    Cubic,
    MlpTiny,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum ClipFormat {
    #[default]
    PngDir,
    Y4m,
}

#[derive(Subcommand)]
enum Command {
    /// Degrade every clip under INPUT into OUTPUT per a pipeline config.
    Degrade {
        input: PathBuf,
        output: PathBuf,
        /// Pipeline config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for clip-level parallelism (0 = all cores).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override the config's clamping policy.
        #[arg(long, value_enum)]
        clamp_mode: Option<ClampMode>,
    },
    /// Residual statistics between aligned CLEAN and DEGRADED trees (CSV).
    Stats {
        clean: PathBuf,
        degraded: PathBuf,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for interface uniformity; this command draws no randomness.
        #[arg(long, hide_short_help = true)]
        seed: Option<u64>,
    },
    /// PSNR between downscaled noisy and clean clips, per scale (CSV).
    DownscaleReport {
        clean: PathBuf,
        degraded: PathBuf,
        /// Comma-separated descending scale factors.
        #[arg(long, default_value = "1,0.5,0.25")]
        scales: String,
        #[arg(long, value_enum, default_value_t)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for interface uniformity; this command draws no randomness.
        #[arg(long, hide_short_help = true)]
        seed: Option<u64>,
    },
    /// Dispersion of residual stds for shuffled vs fixed-order pipelines.
    ShuffleVariance {
        /// Clean clip (PNG directory or .y4m file).
        clean: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 200)]
        pipelines: usize,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the per-pipeline std table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo check of the noise-regularization identity.
    VerifyTheorem {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Comma-separated noise levels.
        #[arg(long, default_value = "0.1,0.05,0.025")]
        eta: String,
        #[arg(long, default_value_t = 100_000)]
        n_mc: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a deterministic synthetic test clip.
    GenClip {
        output: PathBuf,
        #[arg(long, default_value_t = 5)]
        frames: usize,
        #[arg(long, default_value_t = 96)]
        height: usize,
        #[arg(long, default_value_t = 96)]
        width: usize,
        /// Content variant selector.
        #[arg(long, default_value_t = 0)]
        variant: u64,
        #[arg(long, value_enum, default_value_t)]
        format: ClipFormat,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Argument(_) | Error::Shape(_) => 2,
        _ => 1,
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Degrade {
            input,
            output,
            config,
            seed,
            jobs,
            clamp_mode,
        } => cmd_degrade(&input, &output, &config, seed, jobs, clamp_mode),
        Command::Stats {
            clean,
            degraded,
            out,
            seed: _,
        } => cmd_stats(&clean, &degraded, out.as_deref()),
        Command::DownscaleReport {
            clean,
            degraded,
            scales,
            mode,
            out,
            seed: _,
        } => cmd_downscale_report(&clean, &degraded, &scales, mode.into(), out.as_deref()),
        Command::ShuffleVariance {
            clean,
            config,
            pipelines,
            seed,
            csv,
            out,
        } => cmd_shuffle_variance(&clean, &config, pipelines, seed, csv.as_deref(), out.as_deref()),
        Command::VerifyTheorem {
            model,
            eta,
            n_mc,
            seed,
            out,
        } => cmd_verify_theorem(model, &eta, n_mc, seed, out.as_deref()),
        Command::GenClip {
            output,
            frames,
            height,
            width,
            variant,
            format,
        } => cmd_gen_clip(&output, frames, height, width, variant, format),
    }
}

fn load_config(path: &Path) -> Result<PipelineConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    PipelineConfig::from_json(&text)
}

fn cmd_degrade(
    input: &Path,
    output: &Path,
    config_path: &Path,
    seed_override: Option<u64>,
    jobs: usize,
    clamp_mode: Option<ClampMode>,
) -> Result<ExitCode, Error> {
    let mut config = load_config(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    if let Some(mode) = clamp_mode {
        config.clamp_each_stage = matches!(mode, ClampMode::Each);
    }
    config.validate()?;

    let sources = discover_clips(input)?;
    std::fs::create_dir_all(output)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;

    type ClipOutcome = (String, Result<ClipRecord, Error>);
    let results: Vec<ClipOutcome> = pool.install(|| {
        sources
            .par_iter()
            .enumerate()
            .map(|(index, source)| {
                let outcome = process_one_clip(source, index as u64, &config, output);
                (source.name.clone(), outcome)
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (name, result) in results {
        match result {
            Ok(record) => records.push(record),
            Err(e) => {
                eprintln!("clip {name}: {e}");
                failures.push((name, e.to_string()));
            }
        }
    }
    let failed = !failures.is_empty();
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        config,
        clips: records,
        failures,
    };
    std::fs::write(output.join("manifest.json"), manifest.to_json())?;
    println!(
        "degraded {} clip(s), {} failure(s); manifest at {}",
        manifest.clips.len(),
        manifest.failures.len(),
        output.join("manifest.json").display()
    );
    Ok(if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn process_one_clip(
    source: &ClipSource,
    index: u64,
    config: &PipelineConfig,
    output: &Path,
) -> Result<ClipRecord, Error> {
    let clip = load_clip(source)?;
    let (degraded, record) = degrade_clip(&clip, config, index, &source.name)?;
    save_clip_like(source, &degraded, output)?;
    Ok(record)
}

/// Aligned clean/degraded clip pairs by name.
fn paired_clips(clean: &Path, degraded: &Path) -> Result<Vec<(String, Clip, Clip)>, Error> {
    let clean_sources = discover_clips(clean)?;
    let degraded_sources = discover_clips(degraded)?;
    let mut pairs = Vec::new();
    for cs in &clean_sources {
        let ds = degraded_sources
            .iter()
            .find(|d| d.name == cs.name)
            .ok_or_else(|| {
                Error::Argument(format!("degraded tree missing clip {:?}", cs.name))
            })?;
        let c = load_clip(cs)?;
        let d = load_clip(ds)?;
        if !c.same_shape(&d) {
            return Err(Error::Shape(format!("clip {:?} shapes differ", cs.name)));
        }
        pairs.push((cs.name.clone(), c, d));
    }
    Ok(pairs)
}

fn residual_stats_of(clean: &Clip, degraded: &Clip) -> Result<ResidualStats, Error> {
    let mut all = Vec::new();
    for (c, d) in clean.frames().iter().zip(degraded.frames().iter()) {
        all.extend(vidnoise::residual(d, c)?);
    }
    stats(&all)
}

fn stats_csv_row(name: &str, s: &ResidualStats) -> String {
    let hist: Vec<String> = s.histogram.iter().map(|h| h.to_string()).collect();
    format!(
        "{name},{},{},{},{},{}\n",
        s.sample_count,
        s.mean,
        s.variance,
        s.std,
        hist.join(",")
    )
}

fn cmd_stats(clean: &Path, degraded: &Path, out: Option<&Path>) -> Result<ExitCode, Error> {
    let pairs = paired_clips(clean, degraded)?;
    let mut csv = String::from("clip,sample_count,mean,variance,std");
    for i in 0..vidnoise::stats::DEFAULT_BINS {
        csv.push_str(&format!(",hist_{i}"));
    }
    csv.push('\n');
    let mut per_clip = Vec::new();
    for (name, c, d) in &pairs {
        let s = residual_stats_of(c, d)?;
        csv.push_str(&stats_csv_row(name, &s));
        per_clip.push(s);
    }
    let aggregate = merge_stats(&per_clip)?;
    csv.push_str(&stats_csv_row("aggregate", &aggregate));
    emit(out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_float_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Argument(format!("bad number {t:?}")))
        })
        .collect()
}

fn cmd_downscale_report(
    clean: &Path,
    degraded: &Path,
    scales: &str,
    mode: ResizeMode,
    out: Option<&Path>,
) -> Result<ExitCode, Error> {
    let scales = parse_float_list(scales)?;
    let pairs = paired_clips(clean, degraded)?;
    // One block of rows per clip; averaging PSNR across clips would mix
    // content, so the rows stay per-clip.
    let mut csv = String::from("clip,scale,mode,psnr_db\n");
    for (name, c, d) in &pairs {
        let report = downscale_noise_report(c, d, &scales, mode)?;
        for row in &report.rows {
            let mode_name = match row.mode {
                ResizeMode::Bilinear => "bilinear",
                ResizeMode::Area => "area",
                ResizeMode::Bicubic => "bicubic",
            };
            csv.push_str(&format!("{name},{},{mode_name},{}\n", row.scale, row.psnr_db));
        }
    }
    emit(out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_shuffle_variance(
    clean: &Path,
    config_path: &Path,
    pipelines: usize,
    seed_override: Option<u64>,
    csv: Option<&Path>,
    out: Option<&Path>,
) -> Result<ExitCode, Error> {
    let mut config = load_config(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let sources = discover_clips(clean)?;
    let clip = load_clip(&sources[0])?;
    let report = shuffle_variance_report(&clip, &config, pipelines)?;
    if let Some(path) = csv {
        std::fs::write(path, report.to_csv())?;
    }
    let json = serde_json::to_string_pretty(&report).expect("report serialization");
    emit(out, &json)?;
    Ok(ExitCode::SUCCESS)
}

type Dataset = Vec<(Vec<f64>, Vec<f64>)>;

fn builtin_model_and_dataset(model: ModelArg, seed: u64) -> (Box<dyn DifferentiableModel>, Dataset) {
    let mut rng = SeededRng::new(seed, 100);
    match model {
        ModelArg::Linear => {
            let m = LinearModel::random(4, 3, &mut rng);
            let dataset = random_dataset(4, 3, 8, &mut rng);
            (Box::new(m), dataset)
        }
        ModelArg::Quadratic => {
            let m = MonomialModel { power: 2 };
            let xs: Vec<Vec<f64>> = vec![vec![0.8], vec![-0.6], vec![0.3], vec![1.1]];
            let dataset = perfect_fit_dataset(&m, &xs);
            (Box::new(m), dataset)
        }
        ModelArg::Cubic => {
            let m = MonomialModel { power: 3 };
            let xs: Vec<Vec<f64>> = vec![vec![-1.0], vec![-0.5], vec![0.25], vec![0.75], vec![1.0]];
            let dataset = perfect_fit_dataset(&m, &xs);
            (Box::new(m), dataset)
        }
        ModelArg::MlpTiny => {
            let m = MlpTiny::seeded(3, 8, 2, &mut rng);
            let xs: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..3).map(|_| rng.normal() * 0.5).collect())
                .collect();
            let dataset = perfect_fit_dataset(&m, &xs);
            (Box::new(m), dataset)
        }
    }
}

fn cmd_verify_theorem(
    model_arg: ModelArg,
    eta_list: &str,
    n_mc: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExitCode, Error> {
    let etas = parse_float_list(eta_list)?;
    if etas.is_empty() {
        return Err(Error::Argument("need at least one eta".into()));
    }
    let slope_needed = !matches!(model_arg, ModelArg::Linear);
    if slope_needed && etas.len() < 2 {
        return Err(Error::Argument(
            "nonlinear models need at least two eta values for the slope criterion".into(),
        ));
    }
    let (model, dataset) = builtin_model_and_dataset(model_arg, seed);
    // One base stream reused across eta values: common random numbers.
    let base_rng = SeededRng::new(seed, 1);
    let mut checks: Vec<TheoremCheck> = Vec::with_capacity(etas.len());
    let mut csv = String::from("eta,lhs,rhs,abs_gap,mc_std_err\n");
    for eta in &etas {
        let mut rng = base_rng.clone();
        let check = verify_theorem(model.as_ref(), &dataset, *eta, n_mc, &mut rng)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            check.eta, check.lhs, check.rhs, check.abs_gap, check.mc_std_err
        ));
        checks.push(check);
    }
    emit(out, &csv)?;

    let passed = if slope_needed {
        let slope = log_log_slope(&checks);
        println!("log-log gap slope: {slope:.3} (criterion >= 2.5)");
        slope >= 2.5
    } else {
        let ok = checks
            .iter()
            .all(|c| c.abs_gap <= 3.0 * c.mc_std_err.max(1e-300));
        println!("linear identity |gap| <= 3 se: {}", if ok { "yes" } else { "no" });
        ok
    };
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_gen_clip(
    output: &Path,
    frames: usize,
    height: usize,
    width: usize,
    variant: u64,
    format: ClipFormat,
) -> Result<ExitCode, Error> {
    if frames == 0 || height < 8 || width < 8 {
        return Err(Error::Argument("need frames >= 1 and dimensions >= 8".into()));
    }
    let clip = vidnoise::fixtures::natural_clip(frames, height, width, variant);
    match format {
        ClipFormat::PngDir => save_clip_pngs(&clip, output)?,
        ClipFormat::Y4m => {
            if let Some(parent) = output.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            write_y4m(&clip, output)?;
        }
    }
    println!("wrote {} frame(s) to {}", frames, output.display());
    Ok(ExitCode::SUCCESS)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
