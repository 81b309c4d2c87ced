use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::census::CensusRecord;
use crate::error::{Error, Result};
use crate::theorems::{ClassificationReport, IdentitySuiteReport, RangeReport};

pub const CENSUS_COLUMNS: [&str; 11] = [
    "n",
    "d_n",
    "omega_n",
    "bigomega_n",
    "omega_M",
    "bound_prop2",
    "bound_divisors",
    "hw_value",
    "lemma6_holds",
    "final_holds",
    "complete",
];

/// Output of `verify`: the identity sub-suites plus, optionally, the
/// per-index range checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub identities: IdentitySuiteReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeReport>,
}

impl VerificationReport {
    pub fn failures(&self) -> u64 {
        self.identities.failures() + self.range.as_ref().map_or(0, |r| r.failures())
    }

    pub fn inconclusive(&self) -> u64 {
        self.identities.inconclusive() + self.range.as_ref().map_or(0, |r| r.inconclusive())
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    CensusCsv(&'a [CensusRecord]),
    ClassificationJson(&'a ClassificationReport),
    SuiteJson(&'a VerificationReport),
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Fixed column order, empty cells for absent values, `\n` line ends.
pub fn census_csv(records: &[CensusRecord]) -> String {
    let mut out = CENSUS_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.d_n,
            r.omega_n,
            r.bigomega_n,
            opt(r.omega_m),
            r.bound_prop2,
            r.bound_divisors,
            r.hw_value.map(|h| format!("{h:.12}")).unwrap_or_default(),
            opt(r.lemma6_holds),
            opt(r.final_inequality_holds),
            r.complete,
        );
    }
    out
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    s.push('\n');
    s
}

pub fn render_report(report: &Report<'_>) -> String {
    match report {
        Report::CensusCsv(records) => census_csv(records),
        Report::ClassificationJson(c) => json(c),
        Report::SuiteJson(v) => json(v),
    }
}

pub fn export_report(report: &Report<'_>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_report(report)).map_err(|e| Error::io(path, e))
}
