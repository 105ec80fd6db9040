//! Statistical analyses of the degradation model: the downscaling
//! noise-reduction curve and the shuffled-vs-fixed order variance comparison.

use crate::error::{Error, Result};
use crate::frame::{residual, Clip};
use crate::metrics::psnr_clip;
use crate::pipeline::{apply_plan, root_rng, sample_plan, PipelineConfig};
use crate::resample::{resize_clip, ResizeMode};
use crate::stats::stats;
use serde::Serialize;

/// One row of the downscaling report.
#[derive(Clone, Debug, Serialize)]
pub struct DownscaleRow {
    pub scale: f64,
    pub mode: ResizeMode,
    pub psnr_db: f64,
}

/// PSNR between downscaled noisy and downscaled clean clips, per scale.
#[derive(Clone, Debug, Serialize)]
pub struct DownscaleReport {
    pub rows: Vec<DownscaleRow>,
}

impl DownscaleReport {
    /// Flat CSV with a fixed header: `scale,mode,psnr_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,mode,psnr_db\n");
        for row in &self.rows {
            let mode = match row.mode {
                ResizeMode::Bilinear => "bilinear",
                ResizeMode::Area => "area",
                ResizeMode::Bicubic => "bicubic",
            };
            out.push_str(&format!("{},{},{}\n", row.scale, mode, row.psnr_db));
        }
        out
    }
}

/// For each scale `s`, PSNR(down_s(noisy), down_s(clean)). Scale 1 is the
/// plain PSNR. Scales must be distinct and descending.
pub fn downscale_noise_report(
    clean: &Clip,
    noisy: &Clip,
    scales: &[f64],
    mode: ResizeMode,
) -> Result<DownscaleReport> {
    if !clean.same_shape(noisy) {
        return Err(Error::Shape("downscale report: clips misaligned".into()));
    }
    if scales.is_empty() {
        return Err(Error::Argument("no scales given".into()));
    }
    if scales.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Argument("scales must be strictly descending".into()));
    }
    let mut rows = Vec::with_capacity(scales.len());
    for &scale in scales {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Argument(format!("invalid scale {scale}")));
        }
        let psnr_db = if scale == 1.0 {
            psnr_clip(noisy, clean)?
        } else {
            let th = ((clean.height() as f64) * scale).round().max(1.0) as usize;
            let tw = ((clean.width() as f64) * scale).round().max(1.0) as usize;
            let down_noisy = resize_clip(noisy, th, tw, mode)?;
            let down_clean = resize_clip(clean, th, tw, mode)?;
            psnr_clip(&down_noisy, &down_clean)?
        };
        rows.push(DownscaleRow {
            scale,
            mode,
            psnr_db,
        });
    }
    Ok(DownscaleReport { rows })
}

/// Spread statistics of a list of per-plan residual stds.
#[derive(Clone, Debug, Serialize)]
pub struct Dispersion {
    /// Sample standard deviation of the list.
    pub std_of_stds: f64,
    /// Interquartile range of the list.
    pub iqr: f64,
}

/// Residual stds of independently sampled pipelines, run with and without
/// order shuffling under identical parameter draws.
#[derive(Clone, Debug, Serialize)]
pub struct VarianceReport {
    pub shuffled_stds: Vec<f64>,
    pub fixed_stds: Vec<f64>,
    pub shuffled_dispersion: Dispersion,
    pub fixed_dispersion: Dispersion,
}

impl VarianceReport {
    /// Flat CSV: `pipeline,shuffled_std,fixed_std`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pipeline,shuffled_std,fixed_std\n");
        for (i, (s, f)) in self
            .shuffled_stds
            .iter()
            .zip(self.fixed_stds.iter())
            .enumerate()
        {
            out.push_str(&format!("{i},{s},{f}\n"));
        }
        out
    }
}

fn dispersion(values: &[f64]) -> Dispersion {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Dispersion {
        std_of_stds: var.sqrt(),
        iqr: quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
    }
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Run `n_pipelines` independently sampled plans twice each — shuffled and
/// fixed order, identical parameter draws — and report per-plan residual
/// stds with their dispersion.
///
/// The degradation realizations are keyed by (clip stream, stage kind,
/// frame), not by position in the order, so the shuffled and fixed runs of
/// one plan see identical noise draws and differ only in composition order.
pub fn shuffle_variance_report(
    clean: &Clip,
    config: &PipelineConfig,
    n_pipelines: usize,
) -> Result<VarianceReport> {
    if n_pipelines < 2 {
        return Err(Error::Argument("need at least two pipelines".into()));
    }
    config.validate()?;
    let shuffled_config = PipelineConfig {
        shuffle: true,
        ..config.clone()
    };
    let fixed_config = PipelineConfig {
        shuffle: false,
        ..config.clone()
    };
    let root = root_rng(config.seed);
    let mut shuffled_stds = Vec::with_capacity(n_pipelines);
    let mut fixed_stds = Vec::with_capacity(n_pipelines);
    for p in 0..n_pipelines {
        let clip_rng = root.child(p as u64);
        let plan_s = sample_plan(&shuffled_config, &clip_rng)?;
        let plan_f = sample_plan(&fixed_config, &clip_rng)?;
        let out_s = apply_plan(clean, &plan_s, &clip_rng, config.clamp_each_stage)?;
        let out_f = apply_plan(clean, &plan_f, &clip_rng, config.clamp_each_stage)?;
        shuffled_stds.push(clip_residual_std(&out_s, clean)?);
        fixed_stds.push(clip_residual_std(&out_f, clean)?);
    }
    let shuffled_dispersion = dispersion(&shuffled_stds);
    let fixed_dispersion = dispersion(&fixed_stds);
    Ok(VarianceReport {
        shuffled_stds,
        fixed_stds,
        shuffled_dispersion,
        fixed_dispersion,
    })
}

fn clip_residual_std(degraded: &Clip, clean: &Clip) -> Result<f64> {
    let mut all = Vec::new();
    for (d, c) in degraded.frames().iter().zip(clean.frames().iter()) {
        all.extend(residual(d, c)?);
    }
    Ok(stats(&all)?.std)
}
