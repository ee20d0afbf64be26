use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::scenario::Kind;
use crate::error::Result;
use crate::extreal::ExtReal;
use crate::status::Status;

/// Outcome of one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub kind: Kind,
    pub status: Status,
    pub hypotheses: BTreeMap<String, bool>,
    pub lhs: Option<ExtReal>,
    pub rhs: Option<ExtReal>,
    pub gap: Option<ExtReal>,
    /// Tolerance of the final assertion.
    pub tol: f64,
    /// The verifier's own report.
    pub witnesses: Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Excluded from determinism comparisons.
    pub wall_time_ms: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub vacuous: usize,
    pub error: usize,
}

impl Summary {
    pub fn of(reports: &[Report]) -> Self {
        let mut s = Summary {
            total: reports.len(),
            ..Summary::default()
        };
        for r in reports {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Vacuous => s.vacuous += 1,
                Status::Error => s.error += 1,
            }
        }
        s
    }

    pub fn all_ok(&self) -> bool {
        self.fail == 0 && self.error == 0
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.all_ok())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub summary: Summary,
    pub reports: Vec<Report>,
}

impl SuiteReport {
    pub fn new(reports: Vec<Report>) -> Self {
        SuiteReport {
            summary: Summary::of(&reports),
            reports,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with every timing field zeroed, for byte comparisons.
    pub fn to_json_untimed(&self) -> String {
        let mut copy = self.clone();
        for r in &mut copy.reports {
            r.wall_time_ms = 0.0;
        }
        copy.to_json()
    }

    /// Aligned columns for humans.
    pub fn to_text(&self) -> String {
        let header = ["id", "kind", "status", "lhs", "rhs", "gap"];
        let rows: Vec<[String; 6]> = self
            .reports
            .iter()
            .map(|r| {
                [
                    r.id.clone(),
                    r.kind.to_string(),
                    r.status.as_str().to_string(),
                    cell(r.lhs),
                    cell(r.rhs),
                    cell(r.gap),
                ]
            })
            .collect();
        let mut width = header.map(str::len);
        for row in &rows {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[&str]| {
            let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &header);
        for row in &rows {
            line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
        }
        let s = self.summary;
        let _ = writeln!(
            out,
            "\n{} scenarios: {} pass, {} fail, {} vacuous, {} error",
            s.total, s.pass, s.fail, s.vacuous, s.error
        );
        out
    }

    /// Gap table as CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "kind", "status", "lhs", "rhs", "gap", "tol"])
            .map_err(csv_err)?;
        for r in &self.reports {
            out.write_record([
                r.id.clone(),
                r.kind.to_string(),
                r.status.as_str().to_string(),
                cell(r.lhs),
                cell(r.rhs),
                cell(r.gap),
                format!("{:e}", r.tol),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e))
}

fn cell(v: Option<ExtReal>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}
