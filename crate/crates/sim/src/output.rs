//! CSV emission: per-sample dumps, percentile summaries, and plot-ready CDF
//! tables. All files are UTF-8 with LF line endings, a `#` header line
//! echoing the effective configuration, and a fixed column header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mmimo::montecarlo::{likely_rate, throughput_from_se, CdfSummary, RealizationOutput};
use mmimo::prelude::PowerTag;

use crate::config::ScenarioConfig;

pub fn samples_path(stem: &Path) -> PathBuf {
    with_suffix(stem, "samples.csv")
}

pub fn summary_path(stem: &Path) -> PathBuf {
    with_suffix(stem, "summary.csv")
}

pub fn cdf_path(stem: &Path, power: PowerTag) -> PathBuf {
    with_suffix(stem, &format!("cdf_{power}.csv"))
}

pub fn report_path(stem: &Path) -> PathBuf {
    with_suffix(stem, "report.csv")
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mmimo".into());
    name.push('_');
    name.push_str(suffix);
    stem.with_file_name(name)
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// One row per (realization, user, configuration, power).
pub fn write_samples(
    path: &Path,
    config: &ScenarioConfig,
    outputs: &[RealizationOutput],
) -> std::io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# {}", config.echo())?;
    writeln!(
        w,
        "realization_index,user_index,config,power,sinr_linear,se_bps_hz,eta"
    )?;
    for out in outputs {
        for block in &out.blocks {
            for user in 0..block.se.len() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    out.index,
                    user,
                    block.config,
                    block.power,
                    block.sinr[user],
                    block.se[user],
                    block.eta[user]
                )?;
            }
        }
    }
    w.flush()
}

/// One row per (configuration, power, percentile).
pub fn write_summary(
    path: &Path,
    config: &ScenarioConfig,
    summaries: &[CdfSummary],
) -> std::io::Result<()> {
    let uplink_bandwidth_hz = config.budget.total_bandwidth_hz / 2.0;
    let mut w = create(path)?;
    writeln!(w, "# {}", config.echo())?;
    writeln!(
        w,
        "config,power,percentile,se_bps_hz,throughput_mbps,n_samples,seed"
    )?;
    for summary in summaries {
        for &(percentile, se) in &summary.percentile_values {
            let throughput_mbps = throughput_from_se(se, uplink_bandwidth_hz) / 1e6;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                summary.config,
                summary.power,
                percentile,
                se,
                throughput_mbps,
                summary.num_samples(),
                config.seed
            )?;
        }
    }
    w.flush()
}

/// Sorted SE samples with their cumulative probability; for cell-free MR two
/// extra columns carry the per-sample cap and the max-min cap so the bound
/// curves can be overlaid on the same axes.
pub fn write_cdf(
    path: &Path,
    config: &ScenarioConfig,
    summary: &CdfSummary,
) -> std::io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# {}", config.echo())?;
    let with_bounds = summary.bound_samples.is_some();
    if with_bounds {
        writeln!(
            w,
            "cumulative_probability,se_bps_hz,se_upper_bound,se_maxmin_bound"
        )?;
    } else {
        writeln!(w, "cumulative_probability,se_bps_hz")?;
    }
    let n = summary.num_samples();
    for (i, &se) in summary.samples.iter().enumerate() {
        let p = (i + 1) as f64 / n as f64;
        if with_bounds {
            let bounds = summary.bound_samples.as_ref().expect("bounds present");
            let caps = summary
                .maxmin_bound_samples
                .as_ref()
                .expect("max-min caps present");
            // Each realization's common cap covers its K user samples, so the
            // cap quantile at row i is entry i / K of the sorted caps.
            let cap = caps[(i / summary.num_users).min(caps.len() - 1)];
            writeln!(w, "{},{},{},{}", p, se, bounds[i], cap)?;
        } else {
            writeln!(w, "{},{}", p, se)?;
        }
    }
    w.flush()
}

/// Summary rows recomputed straight from pooled outputs; lets tests confirm
/// the emitted summary matches the samples file exactly.
pub fn recompute_percentiles(summary: &CdfSummary) -> Vec<(f64, f64)> {
    summary
        .percentile_values
        .iter()
        .map(|&(p, _)| (p, likely_rate(summary, p).expect("non-empty summary")))
        .collect()
}
