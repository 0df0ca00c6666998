//! JSON records and CSV tables.
//!
//! Every JSON file is one [`Envelope`]; every CSV file starts with a
//! `# logsob-csv/<version> <table> config=<hash>` line followed by a fixed
//! header row.

use std::collections::BTreeMap;

use logsob_core::inequality::{InequalityReport, TheoremForm};
use logsob_core::Flags;
use serde::Serialize;

use crate::Error;

pub const SCHEMA: &str = "logsob/report";
pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_VERSION: u32 = 1;

pub fn flag_names(flags: Flags) -> Vec<String> {
    flags.iter_names().map(|(n, _)| n.to_string()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema: &'static str,
    pub version: u32,
    pub command: &'static str,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub status: Status,
    pub exit_code: i32,
    pub warnings: Vec<String>,
    pub result: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Violated,
    Error,
    Policy,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Violated | Status::Error => 1,
            Status::Policy => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub flags: Vec<String>,
}

impl From<&TheoremForm> for TheoremRecord {
    fn from(t: &TheoremForm) -> Self {
        TheoremRecord { lhs: t.lhs, rhs: t.rhs, residual: t.residual, flags: flag_names(t.flags) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRecord {
    pub kind: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub error_budget: f64,
    pub holds: bool,
    pub normalization_factor: f64,
    pub flags: Vec<String>,
    pub constants: BTreeMap<String, f64>,
    pub input_hash: String,
    pub theorem_form: Option<TheoremRecord>,
}

impl From<&InequalityReport> for ReportRecord {
    fn from(r: &InequalityReport) -> Self {
        ReportRecord {
            kind: r.kind.as_str(),
            lhs: r.lhs,
            rhs: r.rhs,
            residual: r.residual,
            error_budget: r.error_budget,
            holds: r.holds(),
            normalization_factor: r.normalization_factor,
            flags: flag_names(r.flags),
            constants: r.constants.clone(),
            input_hash: format!("{:016x}", r.input_hash),
            theorem_form: r.theorem_form.as_ref().map(TheoremRecord::from),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, Error> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::Output(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// A CSV table with a fixed header.
pub struct Table {
    name: &'static str,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&str]) -> Result<Self, Error> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).map_err(|e| Error::Output(e.to_string()))?;
        Ok(Table { name, writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), Error>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| Error::Output(e.to_string()))
    }

    pub fn finish(self, config_hash: &str) -> Result<Vec<u8>, Error> {
        let body = self.writer.into_inner().map_err(|e| Error::Output(e.to_string()))?;
        let mut out = format!("# logsob-csv/{CSV_VERSION} {} config={config_hash}\n", self.name).into_bytes();
        out.extend(body);
        Ok(out)
    }
}

/// Shortest round-trip formatting for CSV cells.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
