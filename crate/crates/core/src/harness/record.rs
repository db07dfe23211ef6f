//! Experiment rows and their CSV form.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;

/// Fixed CSV column order.
pub const COLUMNS: [&str; 14] = [
    "case",
    "eps",
    "h",
    "htilde",
    "hfine",
    "err_l2",
    "err_h1",
    "err_l2_homog",
    "err_h1_homog",
    "cond2",
    "cells",
    "t_ref_s",
    "t_cells_s",
    "t_solve_s",
];

const CONFIG_PREFIX: &str = "# config: ";

/// One row of a convergence study. Missing quantities are written as empty fields.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub case: String,
    pub eps: f64,
    pub h: Option<f64>,
    pub htilde: Option<f64>,
    pub hfine: Option<f64>,
    pub err_l2: Option<f64>,
    pub err_h1: Option<f64>,
    pub err_l2_homog: Option<f64>,
    pub err_h1_homog: Option<f64>,
    pub cond2: Option<f64>,
    pub cells: Option<usize>,
    pub t_ref_s: Option<f64>,
    pub t_cells_s: Option<f64>,
    pub t_solve_s: Option<f64>,
}

impl ConvergenceRecord {
    /// Numeric column by name.
    pub fn get(&self, column: &str) -> Option<f64> {
        match column {
            "eps" => Some(self.eps),
            "h" => self.h,
            "htilde" => self.htilde,
            "hfine" => self.hfine,
            "err_l2" => self.err_l2,
            "err_h1" => self.err_h1,
            "err_l2_homog" => self.err_l2_homog,
            "err_h1_homog" => self.err_h1_homog,
            "cond2" => self.cond2,
            "cells" => self.cells.map(|c| c as f64),
            "t_ref_s" => self.t_ref_s,
            "t_cells_s" => self.t_cells_s,
            "t_solve_s" => self.t_solve_s,
            _ => None,
        }
    }
}

/// CSV text: a config comment line, the header, one line per record.
pub fn to_csv(config: &ExperimentConfig, records: &[ConvergenceRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::Parse(format!("csv: {e}")))?;
    }
    if records.is_empty() {
        w.write_record(COLUMNS).map_err(|e| Error::Parse(format!("csv: {e}")))?;
    }
    let body = w.into_inner().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    let mut out = format!("{CONFIG_PREFIX}{}\n", config.to_json());
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    Ok(out)
}

pub fn write_csv(path: &Path, config: &ExperimentConfig, records: &[ConvergenceRecord]) -> Result<()> {
    let text = to_csv(config, records)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Parses CSV text produced by [`to_csv`]; the config comment is optional.
pub fn from_csv(text: &str) -> Result<(Option<ExperimentConfig>, Vec<ConvergenceRecord>)> {
    let config = match text.lines().next().and_then(|l| l.strip_prefix(CONFIG_PREFIX)) {
        Some(json) => Some(ExperimentConfig::from_json(json)?),
        None => None,
    };
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> =
        r.headers().map_err(|e| Error::Parse(format!("csv: {e}")))?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(Error::Parse(format!("unexpected CSV columns {header:?}")));
    }
    let records = r
        .deserialize()
        .collect::<std::result::Result<Vec<ConvergenceRecord>, _>>()
        .map_err(|e| Error::Parse(format!("csv: {e}")))?;
    Ok((config, records))
}

pub fn read_csv(path: &Path) -> Result<(Option<ExperimentConfig>, Vec<ConvergenceRecord>)> {
    from_csv(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
