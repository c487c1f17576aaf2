//! Published reference values for the two benchmark tables, embedded as a
//! data file so the tolerance checks are self-documenting.

use std::str::FromStr;

use mmimo::prelude::{Decoder, Deployment, Morphology, PowerTag};

const RAW: &str = include_str!("../data/reference_targets.csv");

/// How a simulated value is compared against its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    /// |simulated - target| <= tolerance.
    Near,
    /// simulated <= tolerance (the target is a qualitative collapse value).
    Below,
}

/// One cell of a benchmark table.
#[derive(Clone, Debug)]
pub struct TargetRow {
    pub table: Deployment,
    pub morphology: Morphology,
    pub decoder: Decoder,
    pub power: PowerTag,
    pub m: usize,
    pub percentile: f64,
    pub target_se: f64,
    pub check: Check,
    pub tolerance: f64,
    pub n_largescale_reduced: usize,
}

impl TargetRow {
    pub fn passes(&self, simulated_se: f64) -> bool {
        match self.check {
            Check::Near => (simulated_se - self.target_se).abs() <= self.tolerance,
            Check::Below => simulated_se <= self.tolerance,
        }
    }
}

/// All rows of one table.
pub fn table_targets(table: Deployment) -> Vec<TargetRow> {
    parse_all()
        .into_iter()
        .filter(|row| row.table == table)
        .collect()
}

fn parse_all() -> Vec<TargetRow> {
    RAW.lines()
        .skip(1)
        .filter(|line| !line.trim().is_empty())
        .map(parse_row)
        .collect()
}

fn parse_row(line: &str) -> TargetRow {
    let fields: Vec<&str> = line.split(',').collect();
    assert_eq!(fields.len(), 10, "malformed target row: {line}");
    let table = match fields[0] {
        "cellular" => Deployment::Cellular,
        "cellfree" => Deployment::CellFree,
        other => panic!("unknown table {other}"),
    };
    let power = match fields[3] {
        "full" => PowerTag::Full,
        "maxmin" => PowerTag::MaxMin,
        other => panic!("unknown power {other}"),
    };
    let check = match fields[7] {
        "near" => Check::Near,
        "below" => Check::Below,
        other => panic!("unknown check {other}"),
    };
    TargetRow {
        table,
        morphology: Morphology::from_str(fields[1]).expect("morphology"),
        decoder: Decoder::from_str(fields[2]).expect("decoder"),
        power,
        m: fields[4].parse().expect("m"),
        percentile: fields[5].parse().expect("percentile"),
        target_se: fields[6].parse().expect("target"),
        check,
        tolerance: fields[8].parse().expect("tolerance"),
        n_largescale_reduced: fields[9].parse().expect("n_largescale"),
    }
}
