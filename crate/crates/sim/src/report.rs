//! Benchmark-table reproduction: run every cell of a reference table, then
//! lay the simulated percentiles side by side with the published values.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use mmimo::montecarlo::{likely_rate, plan_for};
use mmimo::prelude::*;

use crate::runner::run_parallel;
use crate::targets::{table_targets, Check, TargetRow};

/// Reproduction scale: the published experiment size or a desk-scale cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Full,
    Reduced,
}

impl std::str::FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(Scale::Full),
            "reduced" => Ok(Scale::Reduced),
            other => Err(format!(
                "unknown scale `{other}` (expected full or reduced)"
            )),
        }
    }
}

/// One comparison row of the reproduction report.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub target: TargetRow,
    pub simulated_se: f64,
    pub n_largescale: usize,
}

impl ReportRow {
    pub fn delta(&self) -> f64 {
        (self.simulated_se - self.target.target_se).abs()
    }

    pub fn passes(&self) -> bool {
        self.target.passes(self.simulated_se)
    }
}

/// Run all cells of one table. Cells sharing a scenario (same morphology,
/// decoder, and antenna count) run as a single experiment with both power
/// strategies, which also shares the cf-ZF expectations between them.
pub fn reproduce_table(
    table: Deployment,
    scale: Scale,
    seed: u64,
    n_smallscale: usize,
) -> mmimo::Result<Vec<ReportRow>> {
    reproduce_table_sized(table, scale, seed, n_smallscale, None)
}

/// As [`reproduce_table`], with the per-cell realization counts overridden;
/// meant for smoke runs, not for comparisons against the reference values.
pub fn reproduce_table_sized(
    table: Deployment,
    scale: Scale,
    seed: u64,
    n_smallscale: usize,
    n_largescale_override: Option<usize>,
) -> mmimo::Result<Vec<ReportRow>> {
    let rows = table_targets(table);

    // Group by scenario; BTreeMap keeps the run order stable.
    let mut groups: BTreeMap<(String, usize, String), Vec<TargetRow>> = BTreeMap::new();
    for row in rows {
        let key = (row.morphology.to_string(), row.m, row.decoder.to_string());
        groups.entry(key).or_default().push(row);
    }

    let mut report = Vec::new();
    for rows in groups.into_values() {
        let first = &rows[0];
        let n_largescale = n_largescale_override.unwrap_or(match scale {
            Scale::Full => 1000,
            Scale::Reduced => first.n_largescale_reduced,
        });
        let mut powers: Vec<PowerTag> = Vec::new();
        for row in &rows {
            if !powers.contains(&row.power) {
                powers.push(row.power);
            }
        }
        let plan = plan_for(
            MorphologyParams::preset(first.morphology),
            table,
            first.decoder,
            &powers,
            first.m,
            18,
            n_largescale,
            n_smallscale,
            seed,
        );
        let summaries = run_parallel(&plan)?;
        for row in rows {
            let summary = summaries
                .iter()
                .find(|s| s.power == row.power)
                .expect("summary for requested power");
            let simulated_se = likely_rate(summary, row.percentile)?;
            report.push(ReportRow {
                target: row,
                simulated_se,
                n_largescale,
            });
        }
    }
    Ok(report)
}

/// Human-readable side-by-side comparison.
pub fn print_report(rows: &[ReportRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<9} {:<9} {:<4} {:<7} {:>7} {:>5} {:>8} {:>10} {:>7} {:>10}  status",
        "table", "morph", "dec", "power", "m", "pct", "target", "simulated", "|delta|", "tolerance"
    )?;
    for row in rows {
        let t = &row.target;
        let status = if row.passes() {
            "ok"
        } else {
            "OUT-OF-TOLERANCE"
        };
        let tol = match t.check {
            Check::Near => format!("+/-{}", t.tolerance),
            Check::Below => format!("<={}", t.tolerance),
        };
        writeln!(
            out,
            "{:<9} {:<9} {:<4} {:<7} {:>7} {:>5} {:>8.2} {:>10.3} {:>7.3} {:>10}  {}",
            t.table.to_string(),
            t.morphology.to_string(),
            t.decoder.to_string(),
            t.power.to_string(),
            t.m,
            t.percentile,
            t.target_se,
            row.simulated_se,
            row.delta(),
            tol,
            status
        )?;
    }
    Ok(())
}

/// CSV form of the comparison.
pub fn write_report_csv(path: &Path, seed: u64, rows: &[ReportRow]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# reference-table reproduction seed={seed}")?;
    writeln!(
        w,
        "table,morphology,decoder,power,m,percentile,target_se,simulated_se,abs_delta,tolerance,check,n_largescale,status"
    )?;
    for row in rows {
        let t = &row.target;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.table,
            t.morphology,
            t.decoder,
            t.power,
            t.m,
            t.percentile,
            t.target_se,
            row.simulated_se,
            row.delta(),
            t.tolerance,
            match t.check {
                Check::Near => "near",
                Check::Below => "below",
            },
            row.n_largescale,
            if row.passes() {
                "ok"
            } else {
                "out_of_tolerance"
            }
        )?;
    }
    w.flush()
}
